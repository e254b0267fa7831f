//! Experiment configuration: a JSON file, command-line flags, or both.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ea_core::disorder::PerturbationKind;
use ea_core::lattice::Topology;
use ea_core::solver::{AnnealOptions, AnnealSchedule, ExactOptions, SolverPolicy};
use serde::{Deserialize, Serialize};

use crate::record::Format;
use crate::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Chaos,
    #[serde(alias = "paircorr")]
    PairCorrelation,
    Fractal,
    Valleys,
    #[serde(alias = "tail")]
    FixedRegionTail,
    Critical,
    Decay,
}

impl Experiment {
    /// Identifier written to the `experiment` column.
    pub fn id(self) -> &'static str {
        match self {
            Self::Chaos => "chaos",
            Self::PairCorrelation => "paircorr",
            Self::Fractal => "fractal",
            Self::Valleys => "valleys",
            Self::FixedRegionTail => "tail",
            Self::Critical => "critical",
            Self::Decay => "decay",
        }
    }
}

macro_rules! named_enum {
    ($name:ident { $($variant:ident => $text:literal $(| $alias:literal)*),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text $(, alias = $alias)*)] $variant),+
        }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self { $(Self::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($text $(| $alias)* => Ok(Self::$variant),)+
                    _ => Err(format!("unknown value `{s}` (expected one of: {})", [$($text),+].join(", "))),
                }
            }
        }
    };
}

named_enum!(TopologyKind { Open => "open", Free => "free", Torus => "torus" | "periodic" });
named_enum!(BcPolicy {
    Free => "free",
    Periodic => "periodic",
    FixedPlus => "fixed-plus" | "fixed_all_plus",
    FixedRandom => "fixed-random" | "fixed_random_once",
});
named_enum!(Kind { Rotate => "rotate" | "gaussian_rotation", Resample => "resample" });

impl TopologyKind {
    pub fn build(self, d: usize, l: usize) -> Topology {
        match self {
            Self::Open => Topology::OpenCube { d, l },
            Self::Free => Topology::FreeCube { d, l },
            Self::Torus => Topology::Torus { d, l },
        }
    }
}

impl Kind {
    pub fn perturbation(self) -> PerturbationKind {
        match self {
            Self::Rotate => PerturbationKind::GaussianRotation,
            Self::Resample => PerturbationKind::Resample,
        }
    }
}

/// `T_init,T_final,sweeps,restarts`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealSpec {
    pub t_init: f64,
    pub t_final: f64,
    pub sweeps: usize,
    pub restarts: usize,
}

impl Default for AnnealSpec {
    fn default() -> Self {
        let o = AnnealOptions::default();
        Self { t_init: o.schedule.t_init, t_final: o.schedule.t_final, sweeps: o.schedule.sweeps, restarts: o.restarts }
    }
}

impl FromStr for AnnealSpec {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [a, b, c, d] = parts[..] else {
            return Err(format!("`{s}`: expected T_init,T_final,sweeps,restarts"));
        };
        let num = |x: &str| x.parse::<f64>().map_err(|_| format!("`{x}` is not a number"));
        let count = |x: &str| x.parse::<usize>().map_err(|_| format!("`{x}` is not a count"));
        Ok(Self { t_init: num(a)?, t_final: num(b)?, sweeps: count(c)?, restarts: count(d)? })
    }
}

impl AnnealSpec {
    pub fn options(&self) -> AnnealOptions {
        AnnealOptions {
            schedule: AnnealSchedule { t_init: self.t_init, t_final: self.t_final, sweeps: self.sweeps },
            restarts: self.restarts,
        }
    }
}

/// Every key optional, as read from a file or collected from flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: Option<Experiment>,
    pub d: Option<usize>,
    #[serde(rename = "L")]
    pub sizes: Option<Vec<usize>>,
    pub topology: Option<TopologyKind>,
    pub bc: Option<BcPolicy>,
    pub kind: Option<Kind>,
    pub p: Option<Vec<f64>>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub exact_cap: Option<usize>,
    pub anneal: Option<AnnealSpec>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub timing: Option<bool>,
    pub pairs: Option<Vec<[usize; 2]>>,
    #[serde(rename = "c")]
    pub thresholds: Option<Vec<f64>>,
    pub control: Option<bool>,
    pub spot_checks: Option<usize>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let message = e.to_string();
            match message.strip_prefix("unknown field `").and_then(|rest| rest.split('`').next()) {
                Some(key) => LabError::UnknownKey(format!("{key}` at line {}", e.line())),
                None => LabError::Parse(message),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            LabError::Parse(m) => LabError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Values set in `over` win.
    pub fn overlay(self, over: RawConfig) -> RawConfig {
        macro_rules! pick {
            ($($f:ident),+) => { RawConfig { $($f: over.$f.or(self.$f)),+ } };
        }
        pick!(
            experiment, d, sizes, topology, bc, kind, p, k, replicates, seed, threads, exact_cap, anneal, out, format,
            timing, pairs, thresholds, control, spot_checks
        )
    }

    pub fn resolve(self) -> Result<ExperimentConfig> {
        let fail = |m: String| Err(LabError::Parse(m));
        let Some(experiment) = self.experiment else {
            return fail("missing key `experiment`".into());
        };
        let d = self.d.unwrap_or(2);
        if d == 0 {
            return fail("`d` must be at least 1".into());
        }
        let sizes = self.sizes.unwrap_or_default();
        if sizes.is_empty() || sizes.contains(&0) {
            return fail("`L` must be a nonempty list of positive sizes".into());
        }
        let default_topology = match (experiment, self.bc) {
            (_, Some(BcPolicy::Periodic)) | (Experiment::Critical, None) => TopologyKind::Torus,
            _ => TopologyKind::Open,
        };
        let topology = self.topology.unwrap_or(default_topology);
        let bc = self.bc.unwrap_or(match topology {
            TopologyKind::Open => BcPolicy::FixedPlus,
            TopologyKind::Torus => BcPolicy::Periodic,
            TopologyKind::Free => BcPolicy::Free,
        });
        match (topology, bc) {
            (TopologyKind::Torus, BcPolicy::Free | BcPolicy::Periodic) => {}
            (_, BcPolicy::Periodic) => return fail("`bc` periodic needs the torus topology".into()),
            (TopologyKind::Open, _) | (TopologyKind::Free, BcPolicy::Free) => {}
            (t, b) => return fail(format!("topology {t} has no boundary for `bc` {b}")),
        }
        let kind = self.kind.unwrap_or(Kind::Rotate);
        let p = self.p.unwrap_or_default();
        if let Some(bad) = p.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
            return fail(format!("p = {bad} must lie in the open interval (0, 1)"));
        }
        if self.k.is_some() && !p.is_empty() {
            return fail("`p` and `K` are mutually exclusive".into());
        }
        if let Some(k) = self.k {
            if !(k > 0.0 && k.is_finite()) {
                return fail(format!("K = {k} must be positive"));
            }
        }
        let needs_p = matches!(experiment, Experiment::Chaos | Experiment::PairCorrelation | Experiment::Fractal);
        if needs_p && p.is_empty() {
            return fail(format!("experiment {} needs a `p` list", experiment.id()));
        }
        if experiment == Experiment::Valleys && p.is_empty() && self.k.is_none() {
            return fail("experiment valleys needs `K` or `p`".into());
        }
        if matches!(experiment, Experiment::Fractal | Experiment::Valleys) && kind != Kind::Rotate {
            return fail(format!("experiment {} needs kind rotate", experiment.id()));
        }
        let replicates = self.replicates.unwrap_or(match experiment {
            Experiment::Chaos | Experiment::PairCorrelation => 2000,
            _ => 500,
        });
        if replicates == 0 {
            return fail("`replicates` must be at least 1".into());
        }
        if self.threads == Some(0) {
            return fail("`threads` must be at least 1".into());
        }
        let anneal = self.anneal.unwrap_or_default();
        if let Err(e) = anneal.options().schedule.validate() {
            return fail(format!("anneal: {e}"));
        }
        if anneal.restarts == 0 {
            return fail("anneal: restarts must be at least 1".into());
        }
        let thresholds = self.thresholds.unwrap_or_else(|| vec![0.0, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 10.0]);
        Ok(ExperimentConfig {
            experiment,
            d,
            sizes,
            topology,
            bc,
            kind,
            p,
            k: self.k,
            replicates,
            seed: self.seed.unwrap_or(1),
            threads: self.threads,
            exact_cap: self.exact_cap.unwrap_or(24),
            anneal,
            out: self.out,
            format: self.format.unwrap_or_default(),
            timing: self.timing.unwrap_or(false),
            pairs: self.pairs.map(|v| v.into_iter().map(|[i, j]| (i, j)).collect()),
            thresholds,
            control: self.control.unwrap_or(false),
            spot_checks: self.spot_checks.unwrap_or(20),
        })
    }
}

/// A fully specified experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub d: usize,
    pub sizes: Vec<usize>,
    pub topology: TopologyKind,
    pub bc: BcPolicy,
    pub kind: Kind,
    pub p: Vec<f64>,
    pub k: Option<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub exact_cap: usize,
    pub anneal: AnnealSpec,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub timing: bool,
    pub pairs: Option<Vec<(usize, usize)>>,
    pub thresholds: Vec<f64>,
    pub control: bool,
    /// Annealed critical droplets re-solved exactly for comparison.
    pub spot_checks: usize,
}

impl ExperimentConfig {
    /// Defaults for `experiment` with the given sizes and perturbation strengths.
    pub fn new(experiment: Experiment, sizes: Vec<usize>, p: Vec<f64>) -> Result<Self> {
        RawConfig { experiment: Some(experiment), sizes: Some(sizes), p: Some(p), ..RawConfig::default() }.resolve()
    }

    pub fn solver_policy(&self) -> SolverPolicy {
        SolverPolicy {
            exact_cap: self.exact_cap,
            exact: ExactOptions { branch_bound_cap: self.exact_cap.max(40), ..ExactOptions::default() },
            anneal: self.anneal.options(),
        }
    }
}

/// Parses and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    RawConfig::load(path)?.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_is_valid() {
        let raw = RawConfig::parse(r#"{"experiment":"chaos","d":2,"L":[5],"p":[0.3],"replicates":100,"seed":1}"#).unwrap();
        let cfg = raw.resolve().unwrap();
        assert_eq!(cfg.experiment, Experiment::Chaos);
        assert_eq!(cfg.sizes, vec![5]);
        assert_eq!(cfg.bc, BcPolicy::FixedPlus);
        assert_eq!(cfg.replicates, 100);
    }

    #[test]
    fn p_outside_the_open_interval_is_rejected() {
        let raw = RawConfig::parse(r#"{"experiment":"chaos","L":[5],"p":[1.0]}"#).unwrap();
        assert!(matches!(raw.resolve(), Err(LabError::Parse(m)) if m.contains("open interval")));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RawConfig::parse("{\"experiment\":\"chaos\",\n\"colour\":1}").unwrap_err();
        assert!(matches!(err, LabError::UnknownKey(k) if k.starts_with("colour") && k.contains("line 2")));
        assert!(matches!(RawConfig::parse("{\"d\": \"two\"}"), Err(LabError::Parse(m)) if m.contains("line 1")));
    }

    #[test]
    fn flags_override_file() {
        let file = RawConfig::parse(r#"{"experiment":"chaos","L":[5],"p":[0.3],"replicates":100}"#).unwrap();
        let flags = RawConfig { replicates: Some(10), ..RawConfig::default() };
        assert_eq!(file.overlay(flags).resolve().unwrap().replicates, 10);
    }

    #[test]
    fn p_and_k_are_exclusive() {
        let raw = RawConfig::parse(r#"{"experiment":"valleys","L":[8],"p":[0.3],"K":2}"#).unwrap();
        assert!(raw.resolve().is_err());
    }

    #[test]
    fn policies_and_topologies_must_agree() {
        let raw = RawConfig::parse(r#"{"experiment":"critical","L":[4]}"#).unwrap().resolve().unwrap();
        assert_eq!((raw.topology, raw.bc), (TopologyKind::Torus, BcPolicy::Periodic));
        let bad = RawConfig::parse(r#"{"experiment":"decay","L":[4],"topology":"torus","bc":"fixed_all_plus"}"#).unwrap();
        assert!(bad.resolve().is_err());
        let aliases = RawConfig::parse(r#"{"experiment":"tail","L":[4],"bc":"fixed_random_once"}"#).unwrap();
        assert_eq!(aliases.resolve().unwrap().bc, BcPolicy::FixedRandom);
    }

    #[test]
    fn anneal_strings() {
        let a: AnnealSpec = "3,0.1,500,8".parse().unwrap();
        assert_eq!(a, AnnealSpec { t_init: 3.0, t_final: 0.1, sweeps: 500, restarts: 8 });
        assert!("3,0.1,500".parse::<AnnealSpec>().is_err());
        let raw = RawConfig { anneal: Some("0.1,3,10,1".parse().unwrap()), ..RawConfig::default() };
        let raw = raw.overlay(RawConfig::parse(r#"{"experiment":"decay","L":[4]}"#).unwrap());
        assert!(raw.resolve().is_err());
    }
}
