//! Gaussian couplings and the two coupled perturbations.
//!
//! `GaussianRotation` replaces each coupling by `(1-p) J + sqrt(2p - p^2) J'`,
//! which is again standard normal. `Resample` replaces each coupling by the
//! fresh `J'` independently with probability `p`.

use alloc::vec::Vec;

use crate::lattice::LatticeGraph;
pub use crate::rng::Stream;
use crate::rng::CounterStream;
use crate::{Error, Result};

/// Where a coupling array came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeedTag {
    Sampled { seed: u64, stream: Stream },
    /// Derived from other arrays (perturbation) or loaded from a file.
    External,
}

/// One real coupling per edge index.
#[derive(Debug, Clone, PartialEq)]
pub struct Disorder {
    couplings: Vec<f64>,
    seed_tag: SeedTag,
}

impl Disorder {
    /// Wraps explicit couplings; every value must be finite.
    pub fn from_couplings(couplings: Vec<f64>) -> Result<Self> {
        if let Some(pos) = couplings.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoupling(pos));
        }
        Ok(Self { couplings, seed_tag: SeedTag::External })
    }

    /// Checks that this array belongs to `g`.
    pub fn check_graph(&self, g: &LatticeGraph) -> Result<()> {
        if self.couplings.len() != g.n_edges() {
            return Err(Error::DimensionMismatch { expected: g.n_edges(), found: self.couplings.len() });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.couplings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.couplings.is_empty()
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn get(&self, e: usize) -> f64 {
        self.couplings[e]
    }

    pub fn seed_tag(&self) -> &SeedTag {
        &self.seed_tag
    }

    pub fn max_abs(&self) -> f64 {
        self.couplings.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Copy with the sign of every edge in `edges` reversed.
    pub fn with_flipped(&self, edges: impl IntoIterator<Item = usize>) -> Self {
        let mut couplings = self.couplings.clone();
        for e in edges {
            couplings[e] = -couplings[e];
        }
        Self { couplings, seed_tag: SeedTag::External }
    }
}

/// Draws `|E|` i.i.d. standard normals; edge `e` uses counter `e` of the stream.
pub fn sample_disorder(g: &LatticeGraph, seed: u64, stream: &Stream) -> Disorder {
    sample_couplings(g.n_edges(), seed, stream)
}

pub fn sample_couplings(n_edges: usize, seed: u64, stream: &Stream) -> Disorder {
    let source = CounterStream::new(seed, stream);
    let couplings = (0..n_edges as u64).map(|e| source.normal(e)).collect();
    Disorder { couplings, seed_tag: SeedTag::Sampled { seed, stream: stream.clone() } }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PerturbationKind {
    GaussianRotation,
    Resample,
}

/// Perturbation kind and strength `p` in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    kind: PerturbationKind,
    p: f64,
}

impl PerturbationSpec {
    pub fn new(kind: PerturbationKind, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidPerturbation(p));
        }
        Ok(Self { kind, p })
    }

    pub fn kind(&self) -> PerturbationKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `t = -ln(1 - p)`, so that `1 - p = e^{-t}`.
    pub fn t(&self) -> f64 {
        -libm::log1p(-self.p)
    }

    /// `(1 - p, sqrt(2p - p^2))`.
    pub fn rotation_coefficients(&self) -> (f64, f64) {
        (1.0 - self.p, libm::sqrt(self.p * (2.0 - self.p)))
    }
}

/// Original, fresh and perturbed couplings on the same graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledEnvironments {
    pub original: Disorder,
    pub fresh: Disorder,
    pub perturbed: Disorder,
    pub spec: PerturbationSpec,
    /// Which edges were resampled; `None` for the rotation kind.
    pub resample_mask: Option<Vec<bool>>,
}

pub fn perturb(original: &Disorder, fresh: &Disorder, spec: PerturbationSpec, mask_seed: u64) -> Result<CoupledEnvironments> {
    if original.len() != fresh.len() {
        return Err(Error::LengthMismatch { expected: original.len(), found: fresh.len() });
    }
    let (perturbed, resample_mask) = match spec.kind {
        PerturbationKind::GaussianRotation => {
            let (a, b) = spec.rotation_coefficients();
            let values = original.couplings.iter().zip(&fresh.couplings).map(|(&j, &k)| a * j + b * k).collect();
            (values, None)
        }
        PerturbationKind::Resample => {
            let source = CounterStream::new(mask_seed, &Stream::new("resample-mask"));
            let mask: Vec<bool> = (0..original.len() as u64).map(|e| source.uniform(e) < spec.p).collect();
            let values = original
                .couplings
                .iter()
                .zip(&fresh.couplings)
                .zip(&mask)
                .map(|((&j, &k), &m)| if m { k } else { j })
                .collect();
            (values, Some(mask))
        }
    };
    Ok(CoupledEnvironments {
        original: original.clone(),
        fresh: fresh.clone(),
        perturbed: Disorder { couplings: perturbed, seed_tag: SeedTag::External },
        spec,
        resample_mask,
    })
}

/// Pooled first and second moments of `(J_e, J(p)_e)` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentReport {
    pub n: usize,
    pub mean_original: f64,
    pub var_original: f64,
    pub mean_perturbed: f64,
    pub var_perturbed: f64,
    pub correlation: f64,
}

impl MomentReport {
    /// Welford accumulation over pairs; variances use the `n - 1` denominator.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let (mut n, mut mx, mut my, mut sxx, mut syy, mut sxy) = (0usize, 0.0, 0.0, 0.0, 0.0, 0.0);
        for (x, y) in pairs {
            n += 1;
            let dx = x - mx;
            mx += dx / n as f64;
            let dy = y - my;
            my += dy / n as f64;
            sxx += dx * (x - mx);
            syy += dy * (y - my);
            sxy += dx * (y - my);
        }
        if n < 2 {
            return Self { n, mean_original: mx, mean_perturbed: my, ..Self::default() };
        }
        let denom = (n - 1) as f64;
        Self {
            n,
            mean_original: mx,
            var_original: sxx / denom,
            mean_perturbed: my,
            var_perturbed: syy / denom,
            correlation: sxy / libm::sqrt(sxx * syy),
        }
    }
}

/// Moments pooled over the edges of every environment in `envs`.
pub fn marginal_check(envs: &[CoupledEnvironments]) -> MomentReport {
    MomentReport::from_pairs(
        envs.iter().flat_map(|env| env.original.couplings.iter().copied().zip(env.perturbed.couplings.iter().copied())),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn env(kind: PerturbationKind, p: f64, n: usize, seed: u64) -> CoupledEnvironments {
        let j = sample_couplings(n, seed, &Stream::new("J"));
        let k = sample_couplings(n, seed, &Stream::new("J'"));
        perturb(&j, &k, PerturbationSpec::new(kind, p).unwrap(), seed).unwrap()
    }

    #[test]
    fn sampling_is_deterministic_and_stream_separated() {
        let a = sample_couplings(50, 9, &Stream::new("J"));
        assert_eq!(a, sample_couplings(50, 9, &Stream::new("J")));
        let b = sample_couplings(50, 9, &Stream::new("J'"));
        assert!(a.couplings().iter().zip(b.couplings()).any(|(x, y)| x != y));
    }

    #[test]
    fn standard_normal_moments() {
        let d = sample_couplings(100_000, 3, &Stream::new("J"));
        let r = MomentReport::from_pairs(d.couplings().iter().map(|&x| (x, x)));
        assert!(r.mean_original.abs() < 0.02, "{r:?}");
        assert!((r.var_original - 1.0).abs() < 0.02, "{r:?}");
    }

    #[test]
    fn rotation_formula() {
        let j = Disorder::from_couplings(vec![1.0, 0.0]).unwrap();
        let k = Disorder::from_couplings(vec![-1.0, 2.0]).unwrap();
        let spec = PerturbationSpec::new(PerturbationKind::GaussianRotation, 0.5).unwrap();
        let env = perturb(&j, &k, spec, 0).unwrap();
        assert!((env.perturbed.get(0) - (0.5 - libm::sqrt(0.75))).abs() < 1e-15);
        assert!((env.perturbed.get(0) + 0.366_025_403_784_438_6).abs() < 1e-12);
        assert!(env.resample_mask.is_none());
    }

    #[test]
    fn tiny_p_is_continuous() {
        let e = env(PerturbationKind::GaussianRotation, 1e-12, 1000, 1);
        let scale = 1.0 + e.original.max_abs().max(e.fresh.max_abs());
        let max_diff = e.original.couplings().iter().zip(e.perturbed.couplings()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(max_diff < 1e-5 * scale);
    }

    #[test]
    fn resample_mask_density() {
        let e = env(PerturbationKind::Resample, 0.3, 100_000, 2);
        let mask = e.resample_mask.as_ref().unwrap();
        let density = mask.iter().filter(|&&m| m).count() as f64 / mask.len() as f64;
        assert!((density - 0.3).abs() < 0.01, "{density}");
        for (i, &m) in mask.iter().enumerate() {
            let expected = if m { e.fresh.get(i) } else { e.original.get(i) };
            assert_eq!(e.perturbed.get(i), expected);
        }
    }

    #[test]
    fn correlation_is_one_minus_p_for_both_kinds() {
        for kind in [PerturbationKind::GaussianRotation, PerturbationKind::Resample] {
            let e = env(kind, 0.2, 100_000, 4);
            let r = marginal_check(core::slice::from_ref(&e));
            assert!((r.correlation - 0.8).abs() < 0.01, "{kind:?} {r:?}");
            assert!((r.var_perturbed - 1.0).abs() < 0.02, "{kind:?} {r:?}");
        }
    }

    #[test]
    fn spec_rejects_closed_endpoints() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(PerturbationSpec::new(PerturbationKind::Resample, p).is_err());
        }
        let s = PerturbationSpec::new(PerturbationKind::GaussianRotation, 0.5).unwrap();
        assert!((s.t() - core::f64::consts::LN_2).abs() < 1e-15);
        assert!(s.t() >= s.p());
    }

    #[test]
    fn rotation_coefficients_are_unit_norm() {
        let mut rng = crate::rng::CounterRng::new(11, &Stream::new("p"));
        for _ in 0..100 {
            let p = rng.uniform();
            let (a, b) = PerturbationSpec::new(PerturbationKind::GaussianRotation, p).unwrap().rotation_coefficients();
            assert!((a * a + b * b - 1.0).abs() < 1e-15, "p={p}");
        }
    }

    #[test]
    fn regeneration_is_bit_exact() {
        for kind in [PerturbationKind::GaussianRotation, PerturbationKind::Resample] {
            assert_eq!(env(kind, 0.37, 500, 8), env(kind, 0.37, 500, 8));
        }
    }

    #[test]
    fn length_mismatch() {
        let j = sample_couplings(3, 1, &Stream::new("J"));
        let k = sample_couplings(4, 1, &Stream::new("J'"));
        let spec = PerturbationSpec::new(PerturbationKind::Resample, 0.5).unwrap();
        assert_eq!(perturb(&j, &k, spec, 0), Err(Error::LengthMismatch { expected: 3, found: 4 }));
    }
}
