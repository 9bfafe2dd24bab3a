use std::path::{Path, PathBuf};

use csbp::mechanism::MechanismConfig;
use csbp::{LevyTriplet, Mechanism};
use csbp::simulate::DsbpSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Largest ensemble a single run may request.
pub const MAX_PATHS: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run: RunConfig,
    pub process: ProcessConfig,
    pub mechanism: MechanismConfig,
    pub dsbp: DsbpConfig,
    pub flow: FlowConfig,
    pub plot: PlotConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment_id: String,
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; `0` uses every core.
    pub threads: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    /// Discrete-state branching process from `[dsbp]`.
    Dsbp,
    /// Compound Poisson walk with the `[dsbp]` jump law.
    CompoundPoisson,
    /// Spectrally positive Lévy process from the `[mechanism]` triplet.
    Levy,
    /// CSBP from the `[mechanism]` triplet by the jump SDE.
    Csbp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProcessConfig {
    pub kind: ProcessKind,
    /// One ensemble block of `n_paths` paths per start value.
    pub start: Vec<f64>,
    pub horizon: f64,
    pub step: f64,
    pub n_paths: usize,
    /// Keep every `record_every`-th Euler node of `csbp` paths.
    pub record_every: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DsbpConfig {
    /// `[k, μ_k]` pairs.
    pub offspring: Vec<(u64, f64)>,
    /// Mass `μ_∞`.
    pub infinite: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub lambdas: Vec<f64>,
    pub times: Vec<f64>,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlotConfig {
    /// Time points of the ensemble series, spread evenly over the horizon.
    pub points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment_id: "default".into(),
            seed: 42,
            out: PathBuf::from("out"),
            threads: 0,
        }
    }
}

impl Default for ProcessConfig {
    fn default() -> Self {
        ProcessConfig {
            kind: ProcessKind::Dsbp,
            start: vec![5.0],
            horizon: 3.0,
            step: 1e-3,
            n_paths: 100,
            record_every: 1,
        }
    }
}

impl Default for DsbpConfig {
    fn default() -> Self {
        DsbpConfig {
            offspring: vec![(0, 1.5), (2, 1.0)],
            infinite: 0.0,
        }
    }
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            lambdas: vec![0.5, 1.0, 2.0, 4.0],
            times: vec![0.0, 0.1, 0.5, 1.0, 2.0],
            tol: 1e-10,
        }
    }
}

impl Default for PlotConfig {
    fn default() -> Self {
        PlotConfig { points: 101 }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            run: RunConfig::default(),
            process: ProcessConfig::default(),
            mechanism: MechanismConfig {
                tag: Some("quadratic".into()),
                c: Some(1.0),
                ..MechanismConfig::default()
            },
            dsbp: DsbpConfig::default(),
            flow: FlowConfig::default(),
            plot: PlotConfig::default(),
        }
    }
}

fn bad(field: &str, reason: &str) -> CliError {
    CliError::Config(format!("`{field}`: {reason}"))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the config with the output directory and thread count
    /// blanked, neither of which affects results.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.run.out = PathBuf::new();
        c.run.threads = 0;
        hex::encode(Sha256::digest(c.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.process;
        if p.start.is_empty() {
            return Err(bad("process.start", "at least one start value is required"));
        }
        if let Some(x) = p.start.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(bad("process.start", &format!("{x} is not a finite value >= 0")));
        }
        if matches!(p.kind, ProcessKind::Dsbp | ProcessKind::CompoundPoisson)
            && p.start.iter().any(|x| x.fract() != 0.0)
        {
            return Err(bad("process.start", "discrete processes start from integers"));
        }
        if !(p.horizon.is_finite() && p.horizon > 0.0) {
            return Err(bad("process.horizon", "must be finite and positive"));
        }
        if !(p.step.is_finite() && p.step > 0.0 && p.step <= p.horizon) {
            return Err(bad("process.step", "must be positive and at most the horizon"));
        }
        if p.n_paths == 0 || p.n_paths > MAX_PATHS {
            return Err(bad("process.n_paths", &format!("must be in 1..={MAX_PATHS}")));
        }
        if p.record_every == 0 {
            return Err(bad("process.record_every", "must be positive"));
        }
        let f = &self.flow;
        if f.lambdas.is_empty() || f.lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(bad("flow.lambdas", "need finite values >= 0"));
        }
        if f.times.is_empty() || f.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(bad("flow.times", "need finite values >= 0"));
        }
        if !(f.tol > 0.0 && f.tol < 1.0) {
            return Err(bad("flow.tol", "must be in (0, 1)"));
        }
        if self.plot.points < 2 {
            return Err(bad("plot.points", "must be at least 2"));
        }
        Ok(())
    }

    pub fn dsbp_spec(&self) -> Result<DsbpSpec<f64>, CliError> {
        Ok(DsbpSpec::new(&self.dsbp.offspring, self.dsbp.infinite)?)
    }

    pub fn mechanism(&self) -> Result<Mechanism, CliError> {
        Ok(self.mechanism.to_mechanism()?)
    }

    pub fn triplet(&self) -> Result<LevyTriplet, CliError> {
        Ok(self.mechanism.to_triplet()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip_through_toml() {
        let c = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::parse(&c.to_toml()).unwrap(), c);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::parse("[run]\nsed = 1\n").is_err());
        assert!(ExperimentConfig::parse("[extra]\n").is_err());
    }

    #[test]
    fn partial_sections_keep_defaults() {
        let c = ExperimentConfig::parse("[process]\nn_paths = 7\n").unwrap();
        assert_eq!(c.process.n_paths, 7);
        assert_eq!(c.process.horizon, 3.0);
    }

    #[test]
    fn digest_ignores_out_and_threads() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.run.out = "elsewhere".into();
        b.run.threads = 8;
        assert_eq!(a.digest(), b.digest());
        b.run.seed = 7;
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn range_checks_name_the_field() {
        let mut c = ExperimentConfig::default();
        c.process.n_paths = 0;
        assert!(c.validate().unwrap_err().to_string().contains("process.n_paths"));
        let mut c = ExperimentConfig::default();
        c.process.start = vec![2.5];
        assert!(c.validate().unwrap_err().to_string().contains("process.start"));
    }
}
