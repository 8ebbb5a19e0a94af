//! Run configuration: a TOML file with one table per concern, overridden by flags.

use std::path::{Path, PathBuf};

use cqe_core::experiment::{SweepSpec, CALIBRATED_SHOTS, CALIBRATION_TARGET, DEFAULT_SHOT_GRID};
use cqe_core::{BackendSpec, CqeConfig, InitialState, LineSearchSpec, TcParams};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub n_sites: usize,
    pub omega_b: f64,
    pub omega_f: f64,
    pub g_c: f64,
    pub n_max: usize,
    /// Term file in the `re im | create_f | annih_f | create_b | annih_b` format.
    pub hamiltonian_file: Option<PathBuf>,
    pub fermion_modes: Option<usize>,
    pub boson_modes: usize,
    /// `all`, `one_per_pair` or `particles:K`.
    pub filter: String,
}

impl Default for ModelSection {
    fn default() -> Self {
        let p = TcParams::default();
        Self {
            n_sites: p.n_sites,
            omega_b: p.omega_b,
            omega_f: p.omega_f,
            g_c: p.g_c,
            n_max: p.n_max,
            hamiltonian_file: None,
            fermion_modes: None,
            boson_modes: 1,
            filter: "all".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tol_variance: f64,
    pub tol_energy: f64,
    pub max_iters: usize,
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub eta_tol: f64,
    pub eta_max_evals: usize,
    /// `tc_product` or `uniform`.
    pub initial_state: String,
    pub theta: Option<f64>,
    pub kappa: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let c = CqeConfig::default();
        Self {
            tol_variance: c.tol_variance,
            tol_energy: c.tol_energy,
            max_iters: c.max_iters,
            eta_lo: c.line_search.lo,
            eta_hi: c.line_search.hi,
            eta_tol: c.line_search.tol,
            eta_max_evals: c.line_search.max_evals,
            initial_state: "tc_product".into(),
            theta: None,
            kappa: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSection {
    /// `exact` or `sampled`.
    pub mode: String,
    pub shots: u64,
}

impl Default for BackendSection {
    fn default() -> Self {
        Self {
            mode: "exact".into(),
            shots: CALIBRATED_SHOTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub out: PathBuf,
    pub golden_dir: PathBuf,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 2024,
            out: PathBuf::from("out"),
            golden_dir: PathBuf::from("goldens"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationSection {
    pub levels: Vec<usize>,
}

impl Default for TruncationSection {
    fn default() -> Self {
        Self {
            levels: vec![2, 3, 4, 5, 6],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSection {
    pub shots: Vec<u64>,
    pub target: f64,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        Self {
            shots: DEFAULT_SHOT_GRID.to_vec(),
            target: CALIBRATION_TARGET,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub sweep: SweepSpec,
    pub solver: SolverSection,
    pub backend: BackendSection,
    pub run: RunSection,
    pub truncation: TruncationSection,
    pub calibration: CalibrationSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        // relative model paths resolve against the config file
        if let (Some(file), Some(dir)) = (&cfg.model.hamiltonian_file, path.parent()) {
            if file.is_relative() {
                cfg.model.hamiltonian_file = Some(dir.join(file));
            }
        }
        Ok(cfg)
    }

    pub fn tc_params(&self) -> TcParams {
        TcParams {
            n_sites: self.model.n_sites,
            omega_b: self.model.omega_b,
            omega_f: self.model.omega_f,
            g_c: self.model.g_c,
            n_max: self.model.n_max,
        }
    }

    pub fn backend_spec(&self) -> Result<BackendSpec, CliError> {
        match self.backend.mode.as_str() {
            "exact" => Ok(BackendSpec::Exact),
            "sampled" => Ok(BackendSpec::Sampled {
                shots: self.backend.shots,
                seed: self.run.seed,
            }),
            other => Err(CliError::Validation(format!(
                "unknown backend mode {other:?}"
            ))),
        }
    }

    pub fn cqe_config(&self) -> Result<CqeConfig, CliError> {
        let s = &self.solver;
        let initial_state = match (s.initial_state.as_str(), s.theta, s.kappa) {
            ("tc_product", None, None) => InitialState::TcProduct,
            ("tc_product", theta, kappa) => InitialState::TcProductWith {
                theta: theta.unwrap_or(cqe_core::cqe::DEFAULT_THETA),
                kappa: kappa.unwrap_or(cqe_core::cqe::DEFAULT_KAPPA),
            },
            ("uniform", ..) => InitialState::Uniform,
            (other, ..) => {
                return Err(CliError::Validation(format!(
                    "unknown initial state {other:?}"
                )))
            }
        };
        let config = CqeConfig {
            line_search: LineSearchSpec {
                lo: s.eta_lo,
                hi: s.eta_hi,
                tol: s.eta_tol,
                max_evals: s.eta_max_evals,
            },
            tol_variance: s.tol_variance,
            tol_energy: s.tol_energy,
            max_iters: s.max_iters,
            initial_state,
            backend: self.backend_spec()?,
            ..CqeConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}
