//! JSON run configuration.
//!
//! ```json
//! {
//!   "system": { "L": 6 },
//!   "trotter": { "t": 1.0, "m_trot": 16 },
//!   "noise": { "p": 0.01 },
//!   "denoiser": { "M": 1, "optimize_L": 4, "refine_iters": 10 },
//!   "optimizer": { "max_iters": 500 },
//!   "tasks": [{ "kind": "two_point_zz", "times": [0.5, 1.0], "depths": [0, 1] }],
//!   "output": "runs/l6",
//!   "seed": 7
//! }
//! ```

use std::path::{Path, PathBuf};

use denoiser_core::channels::NoiseModel;
use denoiser_core::circuits::{Couplings, TrotterSpec, MAX_COMPOSE_QUBITS};
use denoiser_core::optimizer::OptimizerConfig;
use denoiser_core::sampler::SamplerOptions;
use denoiser_core::QubitCount;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Largest chain for which observables are evaluated by vector application.
pub const MAX_VECTOR_QUBITS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub trotter: TrotterConfig,
    pub noise: NoiseConfig,
    #[serde(default)]
    pub denoiser: DenoiserConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub tasks: Vec<Task>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(default)]
    pub couplings: Couplings,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterConfig {
    pub t: f64,
    pub m_trot: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub p: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    /// Every channel starts at the identity.
    Identity,
    /// Small random angles around the identity, seeded by the run seed.
    #[default]
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenoiserConfig {
    #[serde(rename = "M", default = "one")]
    pub depth: usize,
    #[serde(default)]
    pub init: InitKind,
    /// Parameter file to use instead of optimizing.
    #[serde(default)]
    pub load: Option<PathBuf>,
    /// Optimize on a shorter chain and transfer the translation-invariant result.
    #[serde(rename = "optimize_L", default)]
    pub optimize_l: Option<usize>,
    /// Adam iterations on the full chain after a transfer.
    #[serde(default)]
    pub refine_iters: usize,
}

fn one() -> usize {
    1
}

impl Default for DenoiserConfig {
    fn default() -> Self {
        Self { depth: 1, init: InitKind::Random, load: None, optimize_l: None, refine_iters: 0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampledObservable {
    #[default]
    TwoPointZz,
    DomainWallMagnetization,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub observable: SampledObservable,
    pub i: Option<usize>,
    pub j: Option<usize>,
    pub delta: f64,
    pub omega: f64,
    pub max_shots: Option<u64>,
    pub pauli_unraveling: bool,
    /// Stream every shot to `shots.jsonl`.
    pub telemetry: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        let o = SamplerOptions::default();
        Self {
            observable: SampledObservable::TwoPointZz,
            i: None,
            j: None,
            delta: o.delta,
            omega: o.omega,
            max_shots: o.max_shots,
            pauli_unraveling: o.pauli_unraveling,
            telemetry: false,
        }
    }
}

impl SamplerConfig {
    pub fn options(&self) -> SamplerOptions {
        SamplerOptions {
            delta: self.delta,
            omega: self.omega,
            max_shots: self.max_shots,
            pauli_unraveling: self.pauli_unraveling,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub ps: Vec<f64>,
    /// Denoiser depths per noise strength; empty means the configured `M`.
    pub depths: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { ps: vec![0.001, 0.003, 0.01, 0.03, 0.1], depths: Vec::new() }
    }
}

/// One requested result table. Site indices are 0-based; omitted sites
/// default to `L/2 - 1`, omitted times to the configured `t`, and omitted
/// depths to `[0, M]` where depth 0 is the bare noisy circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    TwoPointZz {
        #[serde(default)]
        i: Option<usize>,
        #[serde(default)]
        j: Option<usize>,
        #[serde(default)]
        times: Option<Vec<f64>>,
        #[serde(default)]
        depths: Option<Vec<usize>>,
        #[serde(default = "one")]
        n_stack: usize,
    },
    Otoc {
        #[serde(default)]
        i: Option<usize>,
        /// Probe sites; all sites when omitted.
        #[serde(default)]
        sites: Option<Vec<usize>>,
        #[serde(default)]
        times: Option<Vec<f64>>,
        #[serde(default)]
        depths: Option<Vec<usize>>,
    },
    DomainWallMagnetization {
        #[serde(default)]
        times: Option<Vec<f64>>,
        #[serde(default)]
        depths: Option<Vec<usize>>,
        #[serde(default = "one")]
        n_stack: usize,
    },
    /// `C^zz` of the circuit repeated `n = 1..=max_n` times.
    Stacking {
        #[serde(default)]
        i: Option<usize>,
        #[serde(default)]
        j: Option<usize>,
        max_n: usize,
    },
    Spectrum {},
    Entropy {},
    /// Per-channel quasiprobability weights, ZZ angles and overheads.
    Overhead {},
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::TwoPointZz { .. } => "two_point_zz",
            Task::Otoc { .. } => "otoc",
            Task::DomainWallMagnetization { .. } => "domain_wall_magnetization",
            Task::Stacking { .. } => "stacking",
            Task::Spectrum {} => "spectrum",
            Task::Entropy {} => "entropy",
            Task::Overhead {} => "overhead",
        }
    }

    /// Spectrum, entropy and overhead tables belong to `analyze`.
    pub fn is_analysis(&self) -> bool {
        matches!(self, Task::Spectrum {} | Task::Entropy {} | Task::Overhead {})
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let l = self.n()?.get();
        if l > MAX_VECTOR_QUBITS {
            return Err(CliError::Config(format!("system.L = {l} exceeds the supported maximum {MAX_VECTOR_QUBITS}")));
        }
        self.noise()?;
        self.trotter_spec(self.trotter.t)?;
        self.optimizer.validate()?;
        if let Some(lo) = self.denoiser.optimize_l {
            let lo = QubitCount::new(lo).map_err(|e| CliError::Config(format!("denoiser.optimize_L: {e}")))?.get();
            if lo > MAX_COMPOSE_QUBITS || lo > l {
                return Err(CliError::Config(format!(
                    "denoiser.optimize_L = {lo} must be at most min(L, {MAX_COMPOSE_QUBITS})"
                )));
            }
        }
        if !(self.sampler.delta > 0.0) || !(self.sampler.omega > 0.0 && self.sampler.omega < 1.0) {
            return Err(CliError::Config("sampler needs delta > 0 and 0 < omega < 1".into()));
        }
        for p in &self.sweep.ps {
            NoiseModel::new(*p).map_err(|e| CliError::Config(format!("sweep.ps: {e}")))?;
        }
        for task in &self.tasks {
            self.validate_task(task, l)?;
        }
        Ok(())
    }

    fn validate_task(&self, task: &Task, l: usize) -> CliResult<()> {
        let site = |s: Option<usize>| match s {
            Some(s) if s >= l => Err(CliError::Config(format!("task {}: site {s} out of range for L = {l}", task.name()))),
            _ => Ok(()),
        };
        let stack = |n: usize| {
            if n == 0 {
                Err(CliError::Config(format!("task {}: stack count must be at least 1", task.name())))
            } else {
                Ok(())
            }
        };
        match task {
            Task::TwoPointZz { i, j, n_stack, .. } => {
                site(*i)?;
                site(*j)?;
                stack(*n_stack)
            }
            Task::Otoc { i, sites, .. } => {
                site(*i)?;
                sites.iter().flatten().try_for_each(|&s| site(Some(s)))
            }
            Task::DomainWallMagnetization { n_stack, .. } => stack(*n_stack),
            Task::Stacking { i, j, max_n } => {
                site(*i)?;
                site(*j)?;
                stack(*max_n)
            }
            Task::Spectrum {} | Task::Entropy {} => {
                if l > MAX_COMPOSE_QUBITS {
                    Err(CliError::Config(format!(
                        "task {} composes 4^L x 4^L matrices and needs L <= {MAX_COMPOSE_QUBITS}",
                        task.name()
                    )))
                } else {
                    Ok(())
                }
            }
            Task::Overhead {} => Ok(()),
        }
    }

    pub fn n(&self) -> CliResult<QubitCount> {
        QubitCount::new(self.system.l).map_err(|e| CliError::Config(format!("system.L: {e}")))
    }

    pub fn noise(&self) -> CliResult<NoiseModel> {
        NoiseModel::new(self.noise.p).map_err(|e| CliError::Config(format!("noise.p: {e}")))
    }

    pub fn trotter_spec(&self, t: f64) -> CliResult<TrotterSpec> {
        self.trotter_spec_on(self.n()?, t, self.noise()?)
    }

    pub fn trotter_spec_on(&self, n: QubitCount, t: f64, noise: NoiseModel) -> CliResult<TrotterSpec> {
        let spec = TrotterSpec { n, t, m_trot: self.trotter.m_trot, noise, couplings: self.system.couplings };
        spec.validate().map_err(|e| CliError::Config(format!("trotter: {e}")))?;
        Ok(spec)
    }

    /// Optimizer settings with the run seed.
    pub fn optimizer_config(&self) -> OptimizerConfig {
        OptimizerConfig { seed: self.seed, ..self.optimizer.clone() }
    }

    /// Default site `L/2 - 1` (the middle of the chain, 0-based).
    pub fn middle_site(&self) -> usize {
        self.system.l / 2 - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"system":{"L":4},"trotter":{"t":1.0,"m_trot":8},"noise":{"p":0.01}}"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.denoiser.depth, 1);
        assert_eq!(cfg.optimizer, OptimizerConfig::default());
        assert!(cfg.tasks.is_empty());
        assert_eq!(cfg.middle_site(), 1);
    }

    #[test]
    fn missing_field_is_named() {
        let err = RunConfig::from_json(r#"{"system":{},"trotter":{"t":1.0,"m_trot":8},"noise":{"p":0.01}}"#).unwrap_err();
        assert!(err.to_string().contains("`L`"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("\"m_trot\":8", "\"m_trot\":8,\"order\":2");
        assert!(RunConfig::from_json(&text).unwrap_err().to_string().contains("order"));
        let text = MINIMAL.replace("}}", "},\"tasks\":[{\"kind\":\"entropy\",\"cut\":1}]}");
        assert!(RunConfig::from_json(&text).is_err());
        let text = MINIMAL.replace("}}", "},\"tasks\":[{\"kind\":\"magic\"}]}");
        assert!(RunConfig::from_json(&text).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        for (from, to) in [
            ("\"L\":4", "\"L\":5"),
            ("\"p\":0.01", "\"p\":0.99"),
            ("\"m_trot\":8", "\"m_trot\":0"),
        ] {
            let err = RunConfig::from_json(&MINIMAL.replace(from, to)).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{to}: {err}");
        }
        let text = MINIMAL.replace("\"L\":4", "\"L\":8").replace("}}", "},\"tasks\":[{\"kind\":\"spectrum\"}]}");
        assert!(RunConfig::from_json(&text).is_err());
        let text = MINIMAL.replace("}}", "},\"denoiser\":{\"M\":1,\"optimize_L\":6}}");
        assert!(RunConfig::from_json(&text).is_err());
    }

    #[test]
    fn tasks_parse() {
        let text = MINIMAL.replace(
            "}}",
            r#"},"tasks":[{"kind":"two_point_zz","times":[0.5,1.0],"depths":[0,1]},{"kind":"stacking","max_n":3},{"kind":"spectrum"}]}"#,
        );
        let cfg = RunConfig::from_json(&text).unwrap();
        assert_eq!(cfg.tasks.len(), 3);
        assert!(cfg.tasks[2].is_analysis());
        assert_eq!(cfg.tasks[1], Task::Stacking { i: None, j: None, max_n: 3 });
    }
}
