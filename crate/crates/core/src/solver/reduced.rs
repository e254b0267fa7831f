use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{BoundaryCondition, PairConstraint, SpinConfiguration};
use crate::lattice::LatticeGraph;
use crate::{Error, Result};

/// How a vertex is determined by the reduced variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Slot {
    Fixed(i8),
    Var { index: usize, sign: i8 },
}

/// `H(x) = constant - sum_{a<b} w_ab x_a x_b - sum_a h_a x_a` over the free
/// variables left after folding in fixed spins and merging a pair constraint.
#[derive(Debug, Clone)]
pub(crate) struct ReducedProblem {
    pub n_vars: usize,
    pub offsets: Vec<usize>,
    pub nbrs: Vec<(usize, f64)>,
    pub pairs: Vec<(usize, usize, f64)>,
    pub fields: Vec<f64>,
    pub constant: f64,
    pub slots: Vec<Slot>,
    /// No fixed vertices: `H(x) = H(-x)`.
    pub symmetric: bool,
}

impl ReducedProblem {
    /// `couplings` must already have the constrained edge zeroed if requested.
    pub fn build(
        g: &LatticeGraph,
        couplings: &[f64],
        bc: &BoundaryCondition,
        constraint: Option<&PairConstraint>,
    ) -> Result<Self> {
        let n = g.n_vertices();
        let mut fixed: Vec<Option<i8>> = vec![None; n];
        if let BoundaryCondition::Fixed(gamma) = bc {
            for (b, &s) in g.boundary().iter().zip(gamma.iter()) {
                fixed[b] = Some(s);
            }
        }

        // Vertex `partner` is tied to `anchor` by `sigma_partner = sign * sigma_anchor`.
        let mut tie: Option<(usize, usize, i8)> = None;
        if let Some(c) = constraint {
            match (fixed[c.i], fixed[c.j]) {
                (Some(a), Some(b)) => {
                    if a * b != c.sign {
                        return Err(Error::InfeasibleConstraint);
                    }
                }
                (Some(a), None) => fixed[c.j] = Some(a * c.sign),
                (None, Some(b)) => fixed[c.i] = Some(b * c.sign),
                (None, None) => tie = Some((c.i.min(c.j), c.i.max(c.j), c.sign)),
            }
        }

        let mut slots = Vec::with_capacity(n);
        let mut n_vars = 0;
        for v in 0..n {
            let slot = match (fixed[v], tie) {
                (Some(s), _) => Slot::Fixed(s),
                (None, Some((anchor, partner, sign))) if v == partner => match slots[anchor] {
                    Slot::Var { index, sign: s } => Slot::Var { index, sign: s * sign },
                    Slot::Fixed(s) => Slot::Fixed(s * sign),
                },
                (None, _) => {
                    n_vars += 1;
                    Slot::Var { index: n_vars - 1, sign: 1 }
                }
            };
            slots.push(slot);
        }

        let mut fields = vec![0.0; n_vars];
        let mut constant = 0.0;
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            let w = couplings[e];
            match (slots[u], slots[v]) {
                (Slot::Fixed(a), Slot::Fixed(b)) => constant -= w * (a * b) as f64,
                (Slot::Fixed(a), Slot::Var { index, sign }) | (Slot::Var { index, sign }, Slot::Fixed(a)) => {
                    fields[index] += w * (a * sign) as f64;
                }
                (Slot::Var { index: a, sign: s }, Slot::Var { index: b, sign: t }) => {
                    if a == b {
                        constant -= w * (s * t) as f64;
                    } else {
                        *merged.entry((a.min(b), a.max(b))).or_insert(0.0) += w * (s * t) as f64;
                    }
                }
            }
        }
        let pairs: Vec<_> = merged.into_iter().map(|((a, b), w)| (a, b, w)).collect();

        let mut degree = vec![0usize; n_vars];
        for &(a, b, _) in &pairs {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut offsets = vec![0usize; n_vars + 1];
        for a in 0..n_vars {
            offsets[a + 1] = offsets[a] + degree[a];
        }
        let mut fill = offsets.clone();
        let mut nbrs = vec![(0, 0.0); 2 * pairs.len()];
        for &(a, b, w) in &pairs {
            nbrs[fill[a]] = (b, w);
            fill[a] += 1;
            nbrs[fill[b]] = (a, w);
            fill[b] += 1;
        }
        let symmetric = slots.iter().all(|s| matches!(s, Slot::Var { .. }));
        Ok(Self { n_vars, offsets, nbrs, pairs, fields, constant, slots, symmetric })
    }

    pub fn neighbors(&self, a: usize) -> &[(usize, f64)] {
        &self.nbrs[self.offsets[a]..self.offsets[a + 1]]
    }

    pub fn energy(&self, x: &[f64]) -> f64 {
        let mut e = self.constant;
        for &(a, b, w) in &self.pairs {
            e -= w * x[a] * x[b];
        }
        for (h, xa) in self.fields.iter().zip(x) {
            e -= h * xa;
        }
        e
    }

    /// `h_a + sum_b w_ab x_b` for every variable.
    pub fn local_fields(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_vars)
            .map(|a| self.fields[a] + self.neighbors(a).iter().map(|&(b, w)| w * x[b]).sum::<f64>())
            .collect()
    }

    pub fn expand(&self, x: &[f64]) -> SpinConfiguration {
        SpinConfiguration::from_spins_unchecked(
            self.slots
                .iter()
                .map(|slot| match *slot {
                    Slot::Fixed(s) => s,
                    Slot::Var { index, sign } => {
                        if x[index] > 0.0 {
                            sign
                        } else {
                            -sign
                        }
                    }
                })
                .collect(),
        )
    }

    pub fn expand_mask(&self, mask: u64) -> SpinConfiguration {
        self.expand(&mask_to_spins(mask, self.n_vars))
    }
}

/// Bit `a` set means variable `a` is `-1`.
pub(crate) fn mask_to_spins(mask: u64, n: usize) -> Vec<f64> {
    (0..n).map(|a| if mask >> a & 1 == 1 { -1.0 } else { 1.0 }).collect()
}

/// Near-optimal configurations seen during a search.
pub(crate) struct Candidates {
    best: f64,
    window: f64,
    items: Vec<(f64, u64)>,
}

impl Candidates {
    const CAP: usize = 1024;

    pub fn new(window: f64) -> Self {
        Self { best: f64::INFINITY, window, items: Vec::new() }
    }

    pub fn threshold(&self) -> f64 {
        self.best + self.window
    }

    #[inline]
    pub fn offer(&mut self, energy: f64, mask: u64) {
        if energy > self.best + self.window {
            return;
        }
        if energy < self.best {
            self.best = energy;
            if self.items.len() >= 64 {
                let cut = self.best + self.window;
                self.items.retain(|&(e, _)| e <= cut);
            }
        }
        if self.items.len() < Self::CAP {
            self.items.push((energy, mask));
        } else if let Some(worst) = self.items.iter().enumerate().max_by(|a, b| a.1 .0.total_cmp(&b.1 .0)).map(|(i, _)| i) {
            if energy < self.items[worst].0 {
                self.items[worst] = (energy, mask);
            }
        }
    }

    pub fn into_masks(self) -> Vec<u64> {
        let cut = self.best + self.window;
        self.items.into_iter().filter(|&(e, _)| e <= cut).map(|(_, m)| m).collect()
    }
}
