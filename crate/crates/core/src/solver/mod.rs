//! Ground states of `H_J(σ) = -Σ_{ij ∈ E} J_ij σ_i σ_j`.
//!
//! Every solve first reduces the instance: spins fixed by the boundary
//! condition become external fields on their interior neighbours, and a pair
//! constraint ties one spin to the other. The reduced problem is then handed
//! to Gray-code enumeration, branch and bound, or simulated annealing.
//!
//! Under a free boundary condition the two global-flip ground states are
//! reported through their canonical representative (see [`canonicalize`]).
//! When two optima that are not global flips of each other lie within
//! [`TIE_TOLERANCE`], the lexicographically smallest spin sequence (with
//! `-1 < +1`) is returned and `tie_detected` is set.

mod anneal;
mod branch_bound;
mod exhaustive;
mod reduced;

use alloc::vec;
use alloc::vec::Vec;

use crate::disorder::Disorder;
use crate::lattice::LatticeGraph;
use crate::rng::{CounterRng, Stream};
use crate::{Error, Result};

pub(crate) use reduced::ReducedProblem;

/// Two optima closer than this are reported as a tie.
pub const TIE_TOLERANCE: f64 = 1e-12;
/// Search window kept around the running optimum before exact re-evaluation.
const CANDIDATE_WINDOW: f64 = 1e-9;

/// Spins `±1` per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfiguration(Vec<i8>);

impl SpinConfiguration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidBoundaryCondition("spins must be +1 or -1"));
        }
        Ok(Self(spins))
    }

    pub(crate) fn from_spins_unchecked(spins: Vec<i8>) -> Self {
        Self(spins)
    }

    pub fn all_plus(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, v: usize) -> i8 {
        self.0[v]
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|&s| -s).collect())
    }

    pub fn into_vec(self) -> Vec<i8> {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Free,
    /// Spins for the boundary vertices, in the order of `LatticeGraph::boundary`.
    Fixed(Vec<i8>),
}

impl BoundaryCondition {
    pub fn fixed(g: &LatticeGraph, assignment: Vec<i8>) -> Result<Self> {
        let bc = Self::Fixed(assignment);
        bc.validate(g)?;
        Ok(bc)
    }

    /// `γ ≡ +1` on the boundary.
    pub fn all_plus(g: &LatticeGraph) -> Result<Self> {
        Self::fixed(g, vec![1; g.boundary().len()])
    }

    pub fn is_free(&self) -> bool {
        matches!(self, Self::Free)
    }

    pub fn validate(&self, g: &LatticeGraph) -> Result<()> {
        match self {
            Self::Free => Ok(()),
            Self::Fixed(gamma) => {
                if g.boundary().is_empty() {
                    return Err(Error::InvalidBoundaryCondition("fixed boundary condition on a graph without boundary"));
                }
                if gamma.len() != g.boundary().len() {
                    return Err(Error::DimensionMismatch { expected: g.boundary().len(), found: gamma.len() });
                }
                if gamma.iter().any(|&s| s != 1 && s != -1) {
                    return Err(Error::InvalidBoundaryCondition("boundary spins must be +1 or -1"));
                }
                Ok(())
            }
        }
    }

    /// Spin imposed on vertex `v`, if any.
    pub fn spin_at(&self, g: &LatticeGraph, v: usize) -> Option<i8> {
        match self {
            Self::Free => None,
            Self::Fixed(gamma) => g.boundary().as_slice().binary_search(&v).ok().map(|k| gamma[k]),
        }
    }
}

/// Requires `σ_i σ_j = sign` on the edge `{i, j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairConstraint {
    pub i: usize,
    pub j: usize,
    pub sign: i8,
}

impl PairConstraint {
    pub fn new(g: &LatticeGraph, i: usize, j: usize, sign: i8) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidBoundaryCondition("constraint sign must be +1 or -1"));
        }
        g.edge_index(i, j).ok_or(Error::ConstraintNotEdge(i, j))?;
        Ok(Self { i, j, sign })
    }

    pub fn on_edge(g: &LatticeGraph, e: usize, sign: i8) -> Result<Self> {
        let (i, j) = g.edge(e);
        Self::new(g, i, j, sign)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveMethod {
    Exhaustive,
    BranchBound,
    Anneal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub config: SpinConfiguration,
    pub energy: f64,
    pub method: SolveMethod,
    pub exact: bool,
    pub tie_detected: bool,
    /// Independent spins searched: unfixed vertices, less one when a pair constraint ties two of them.
    pub free_spin_count: usize,
}

/// `H_J(σ)`, summed in edge-index order.
pub fn energy(g: &LatticeGraph, j: &Disorder, sigma: &SpinConfiguration) -> Result<f64> {
    j.check_graph(g)?;
    if sigma.len() != g.n_vertices() {
        return Err(Error::DimensionMismatch { expected: g.n_vertices(), found: sigma.len() });
    }
    Ok(energy_of(g, j.couplings(), sigma.spins()))
}

pub(crate) fn energy_of(g: &LatticeGraph, couplings: &[f64], spins: &[i8]) -> f64 {
    g.edges().iter().zip(couplings).fold(0.0, |acc, (&(u, v), &w)| acc - w * f64::from(spins[u] * spins[v]))
}

/// Global-flip representative: under a free boundary condition, the spin at
/// the lowest-indexed interior vertex is made `+1`. Identity under fixed spins.
pub fn canonicalize(g: &LatticeGraph, bc: &BoundaryCondition, sigma: &SpinConfiguration) -> SpinConfiguration {
    match bc {
        BoundaryCondition::Fixed(_) => sigma.clone(),
        BoundaryCondition::Free => {
            let reference = g.interior().as_slice().first().copied().unwrap_or(0);
            if sigma.0.get(reference) == Some(&-1) {
                sigma.negated()
            } else {
                sigma.clone()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ExactMethod {
    /// Enumeration up to `exhaustive_cap`, branch and bound beyond it.
    #[default]
    Auto,
    Exhaustive,
    BranchBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExactOptions {
    pub exhaustive_cap: usize,
    pub branch_bound_cap: usize,
    pub method: ExactMethod,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self { exhaustive_cap: 24, branch_bound_cap: 40, method: ExactMethod::Auto }
    }
}

impl ExactOptions {
    pub fn with_method(method: ExactMethod) -> Self {
        Self { method, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    pub t_init: f64,
    pub t_final: f64,
    pub sweeps: usize,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self { t_init: 2.0, t_final: 0.05, sweeps: 2000 }
    }
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidSchedule("final temperature must be positive"));
        }
        if !(self.t_init > self.t_final && self.t_init.is_finite()) {
            return Err(Error::InvalidSchedule("initial temperature must exceed the final temperature"));
        }
        if self.sweeps == 0 {
            return Err(Error::InvalidSchedule("at least one sweep is required"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealOptions {
    pub schedule: AnnealSchedule,
    pub restarts: usize,
}

impl Default for AnnealOptions {
    fn default() -> Self {
        Self { schedule: AnnealSchedule::default(), restarts: 32 }
    }
}

/// Spin-glass instance as seen by a solver: couplings with an optionally
/// zeroed constrained edge.
struct Instance<'a> {
    g: &'a LatticeGraph,
    bc: &'a BoundaryCondition,
    couplings: Vec<f64>,
    problem: ReducedProblem,
}

impl<'a> Instance<'a> {
    fn new(
        g: &'a LatticeGraph,
        j: &Disorder,
        bc: &'a BoundaryCondition,
        constraint: Option<&PairConstraint>,
        zero_edge: bool,
    ) -> Result<Self> {
        j.check_graph(g)?;
        bc.validate(g)?;
        let mut couplings = j.couplings().to_vec();
        if let Some(c) = constraint {
            let e = g.edge_index(c.i, c.j).ok_or(Error::ConstraintNotEdge(c.i, c.j))?;
            if zero_edge {
                couplings[e] = 0.0;
            }
        }
        let problem = ReducedProblem::build(g, &couplings, bc, constraint)?;
        Ok(Self { g, bc, couplings, problem })
    }

    /// Exact re-evaluation of the candidates on the full graph, then the tie rule.
    fn finish(&self, candidates: impl IntoIterator<Item = SpinConfiguration>, method: SolveMethod) -> SolveResult {
        let mut scored: Vec<(f64, SpinConfiguration)> = candidates
            .into_iter()
            .map(|s| {
                let s = canonicalize(self.g, self.bc, &s);
                (energy_of(self.g, &self.couplings, s.spins()), s)
            })
            .collect();
        scored.sort_by(|a, b| a.1.cmp(&b.1));
        scored.dedup_by(|a, b| a.1 == b.1);
        let best = scored.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let mut optimal: Vec<_> = scored.into_iter().filter(|c| c.0 <= best + TIE_TOLERANCE).collect();
        let tie_detected = optimal.len() > 1;
        // sorted by configuration, so the first is the lexicographically smallest
        let (energy, config) = optimal.swap_remove(0);
        SolveResult {
            config,
            energy,
            method,
            exact: method != SolveMethod::Anneal,
            tie_detected,
            free_spin_count: self.problem.n_vars,
        }
    }

    fn exact(&self, opts: &ExactOptions) -> Result<SolveResult> {
        let n = self.problem.n_vars;
        let too_large = |cap: usize| -> Result<SolveResult> { Err(Error::TooLarge { free_spins: n, cap }) };
        let method = match opts.method {
            ExactMethod::Exhaustive if n > opts.exhaustive_cap => return too_large(opts.exhaustive_cap),
            ExactMethod::Exhaustive => SolveMethod::Exhaustive,
            ExactMethod::BranchBound if n > opts.branch_bound_cap => return too_large(opts.branch_bound_cap),
            ExactMethod::BranchBound => SolveMethod::BranchBound,
            ExactMethod::Auto if n <= opts.exhaustive_cap => SolveMethod::Exhaustive,
            ExactMethod::Auto if n <= opts.branch_bound_cap => SolveMethod::BranchBound,
            ExactMethod::Auto => return too_large(opts.exhaustive_cap.max(opts.branch_bound_cap)),
        };
        let masks = match method {
            SolveMethod::Exhaustive => exhaustive::enumerate(&self.problem, CANDIDATE_WINDOW),
            _ => branch_bound::search(&self.problem, CANDIDATE_WINDOW),
        };
        Ok(self.finish(masks.into_iter().map(|m| self.problem.expand_mask(m)), method))
    }

    fn anneal(&self, opts: &AnnealOptions, seed: u64) -> Result<SolveResult> {
        opts.schedule.validate()?;
        if opts.restarts == 0 {
            return Err(Error::InvalidRestarts);
        }
        let finals = (0..opts.restarts).map(|r| {
            let mut rng = CounterRng::new(seed, &Stream::new("anneal").with_index(r as u64));
            self.problem.expand(&anneal::anneal_once(&self.problem, &opts.schedule, &mut rng))
        });
        Ok(self.finish(finals, SolveMethod::Anneal))
    }
}

/// Exact ground state. Fails with [`Error::TooLarge`] beyond the caps in `opts`.
pub fn solve_exact(g: &LatticeGraph, j: &Disorder, bc: &BoundaryCondition, opts: &ExactOptions) -> Result<SolveResult> {
    Instance::new(g, j, bc, None, false)?.exact(opts)
}

/// Best of `opts.restarts` annealing runs, each followed by a greedy quench.
/// Restart `r` draws from stream `anneal#r` of `seed`.
pub fn solve_anneal(
    g: &LatticeGraph,
    j: &Disorder,
    bc: &BoundaryCondition,
    opts: &AnnealOptions,
    seed: u64,
) -> Result<SolveResult> {
    Instance::new(g, j, bc, None, false)?.anneal(opts, seed)
}

/// Exact minimizer subject to `σ_i σ_j = sign`. With `zero_edge` the
/// constrained coupling is taken as zero, which shifts the reported energy
/// by the constant `J_ij · sign` but leaves the minimizer unchanged.
pub fn solve_constrained(
    g: &LatticeGraph,
    j: &Disorder,
    bc: &BoundaryCondition,
    constraint: &PairConstraint,
    zero_edge: bool,
    opts: &ExactOptions,
) -> Result<SolveResult> {
    Instance::new(g, j, bc, Some(constraint), zero_edge)?.exact(opts)
}

/// Annealing counterpart of [`solve_constrained`].
pub fn solve_constrained_anneal(
    g: &LatticeGraph,
    j: &Disorder,
    bc: &BoundaryCondition,
    constraint: &PairConstraint,
    zero_edge: bool,
    opts: &AnnealOptions,
    seed: u64,
) -> Result<SolveResult> {
    Instance::new(g, j, bc, Some(constraint), zero_edge)?.anneal(opts, seed)
}

/// Number of independent spins a solve of this instance would search.
pub fn free_spin_count(g: &LatticeGraph, bc: &BoundaryCondition) -> usize {
    match bc {
        BoundaryCondition::Free => g.n_vertices(),
        BoundaryCondition::Fixed(_) => g.interior().len(),
    }
}

/// Exact when the instance has at most `exact_cap` free spins, annealing otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverPolicy {
    pub exact_cap: usize,
    pub exact: ExactOptions,
    pub anneal: AnnealOptions,
}

impl Default for SolverPolicy {
    fn default() -> Self {
        Self { exact_cap: 24, exact: ExactOptions::default(), anneal: AnnealOptions::default() }
    }
}

impl SolverPolicy {
    pub fn solve(
        &self,
        g: &LatticeGraph,
        j: &Disorder,
        bc: &BoundaryCondition,
        constraint: Option<(&PairConstraint, bool)>,
        seed: u64,
    ) -> Result<SolveResult> {
        let instance = Instance::new(g, j, bc, constraint.map(|c| c.0), constraint.is_some_and(|c| c.1))?;
        if instance.problem.n_vars <= self.exact_cap {
            let opts = ExactOptions { branch_bound_cap: self.exact.branch_bound_cap.max(self.exact_cap), ..self.exact };
            instance.exact(&opts)
        } else {
            instance.anneal(&self.anneal, seed)
        }
    }
}
