//! JSON run-configuration files and their merge with command-line flags.
//!
//! Flags override file values; defaults fill whatever remains. Unknown keys
//! anywhere in the file are rejected.

use npg_core::problems::{ProblemKind, ProblemSpec};
use npg_core::{SolverConfig, StepInit, Variant};
use serde::Deserialize;
use std::path::{Path, PathBuf};

use crate::commands::RunPlan;

/// Front-end failures that map to exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read config file {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config file {path}: {source}")]
    ParseConfig {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    InvalidArgument(String),
    #[error("invalid solver configuration: {0}")]
    Solver(#[from] npg_core::ConfigError),
    #[error("cannot build problem: {0}")]
    Problem(#[from] npg_core::ProblemError),
    #[error("solver aborted: {0}")]
    Run(#[from] npg_core::SolverError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("trace too short for rate estimation: {len} iterations, need at least 30")]
    TraceTooShort { len: usize },
    #[error("{0}")]
    Other(String),
}

/// The JSON config document. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub kind: Option<String>,
    pub seed: Option<u64>,
    /// Residual rows.
    pub m: Option<usize>,
    /// Dimension.
    pub n: Option<usize>,
    pub lam: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub variant: Option<String>,
    pub tau: Option<f64>,
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
    pub delta: Option<f64>,
    pub p_min: Option<f64>,
    /// Window memory of the max variant.
    pub m: Option<usize>,
    pub step_init: Option<String>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub csv_path: Option<PathBuf>,
    pub json_path: Option<PathBuf>,
}

impl RunConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CliError::ParseConfig {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn parse_kind(s: &str) -> Result<ProblemKind, CliError> {
    match s {
        "lasso" => Ok(ProblemKind::Lasso),
        "quartic" => Ok(ProblemKind::Quartic),
        "l0quad" => Ok(ProblemKind::L0Quad),
        "box_rosenbrock" => Ok(ProblemKind::BoxRosenbrock),
        other => Err(CliError::InvalidArgument(format!(
            "unknown problem kind '{other}' (expected lasso, quartic, l0quad, or box_rosenbrock)"
        ))),
    }
}

pub fn parse_variant(s: &str) -> Result<Variant, CliError> {
    match s {
        "average" => Ok(Variant::Average),
        "max" => Ok(Variant::Max),
        "monotone" => Ok(Variant::Monotone),
        other => Err(CliError::InvalidArgument(format!(
            "unknown variant '{other}' (expected average, max, or monotone)"
        ))),
    }
}

pub fn parse_step_init(s: &str) -> Result<StepInit, CliError> {
    match s {
        "constant" => Ok(StepInit::Constant),
        "bb" | "barzilai_borwein" => Ok(StepInit::BarzilaiBorwein),
        other => Err(CliError::InvalidArgument(format!(
            "unknown step-init rule '{other}' (expected constant or bb)"
        ))),
    }
}

/// Flag-level overrides collected from the command line; `None` means the
/// flag was not given.
#[derive(Debug, Default, Clone)]
pub struct OverrideSet {
    pub problem: Option<String>,
    pub seed: Option<u64>,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub lam: Option<f64>,
    pub variant: Option<String>,
    pub tau: Option<f64>,
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
    pub delta: Option<f64>,
    pub p_min: Option<f64>,
    pub m: Option<usize>,
    pub step_init: Option<String>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl OverrideSet {
    /// Resolves file < flags < defaults into a runnable plan and validates
    /// the solver configuration.
    pub fn resolve(&self, file: Option<&RunConfigFile>) -> Result<RunPlan, CliError> {
        let empty = RunConfigFile::default();
        let file = file.unwrap_or(&empty);
        let defaults = SolverConfig::default();

        let kind_str = self
            .problem
            .clone()
            .or_else(|| file.problem.kind.clone())
            .unwrap_or_else(|| "lasso".to_string());
        let spec = ProblemSpec {
            kind: parse_kind(&kind_str)?,
            seed: self.seed.or(file.problem.seed).unwrap_or(42),
            rows: self.rows.or(file.problem.m).unwrap_or(30),
            cols: self.cols.or(file.problem.n).unwrap_or(20),
            lam: self.lam.or(file.problem.lam).unwrap_or(0.1),
        };

        let variant_str = self
            .variant
            .clone()
            .or_else(|| file.solver.variant.clone());
        let variant = match variant_str {
            Some(s) => parse_variant(&s)?,
            None => defaults.variant,
        };
        let step_init_str = self
            .step_init
            .clone()
            .or_else(|| file.solver.step_init.clone());
        let step_init = match step_init_str {
            Some(s) => parse_step_init(&s)?,
            None => defaults.step_init,
        };

        let config = SolverConfig {
            tau: self.tau.or(file.solver.tau).unwrap_or(defaults.tau),
            gamma_min: self
                .gamma_min
                .or(file.solver.gamma_min)
                .unwrap_or(defaults.gamma_min),
            gamma_max: self
                .gamma_max
                .or(file.solver.gamma_max)
                .unwrap_or(defaults.gamma_max),
            delta: self.delta.or(file.solver.delta).unwrap_or(defaults.delta),
            variant,
            p_min: self.p_min.or(file.solver.p_min).unwrap_or(defaults.p_min),
            m: self.m.or(file.solver.m).unwrap_or(defaults.m),
            step_init,
            tol: self.tol.or(file.solver.tol).unwrap_or(defaults.tol),
            max_iter: self
                .max_iter
                .or(file.solver.max_iter)
                .unwrap_or(defaults.max_iter),
            ..SolverConfig::default()
        };
        config.validate()?;

        Ok(RunPlan {
            spec,
            config,
            csv_path: self.csv.clone().or_else(|| file.output.csv_path.clone()),
            json_path: self.json.clone().or_else(|| file.output.json_path.clone()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let err = serde_json::from_str::<RunConfigFile>(r#"{"problem": {"kinds": "lasso"}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("unknown field"));
        let err =
            serde_json::from_str::<RunConfigFile>(r#"{"frobnicate": true}"#).unwrap_err();
        assert!(err.to_string().contains("unknown field"));
    }

    #[test]
    fn flags_override_file_values() {
        let file: RunConfigFile = serde_json::from_str(
            r#"{"problem": {"kind": "quartic", "seed": 7}, "solver": {"tol": 0.001}}"#,
        )
        .unwrap();
        let overrides = OverrideSet {
            seed: Some(99),
            ..Default::default()
        };
        let plan = overrides.resolve(Some(&file)).unwrap();
        assert_eq!(plan.spec.kind, ProblemKind::Quartic); // from file
        assert_eq!(plan.spec.seed, 99); // flag wins
        assert_eq!(plan.config.tol, 0.001); // from file
        assert_eq!(plan.config.tau, 2.0); // default
    }

    #[test]
    fn defaults_fill_missing_solver_keys() {
        let plan = OverrideSet::default().resolve(None).unwrap();
        let d = SolverConfig::default();
        assert_eq!(plan.config.tau, d.tau);
        assert_eq!(plan.config.delta, d.delta);
        assert_eq!(plan.config.p_min, d.p_min);
        assert_eq!(plan.config.max_iter, d.max_iter);
        assert_eq!(plan.spec.kind, ProblemKind::Lasso);
    }

    #[test]
    fn invalid_p_min_surfaces_as_config_error() {
        let overrides = OverrideSet {
            p_min: Some(0.8),
            ..Default::default()
        };
        let err = overrides.resolve(None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("p_min"), "message: {msg}");
        assert!(msg.contains("4/5"), "message: {msg}");
    }

    #[test]
    fn step_init_accepts_bb_alias() {
        assert_eq!(parse_step_init("bb").unwrap(), StepInit::BarzilaiBorwein);
        assert_eq!(
            parse_step_init("barzilai_borwein").unwrap(),
            StepInit::BarzilaiBorwein
        );
        assert_eq!(parse_step_init("constant").unwrap(), StepInit::Constant);
        assert!(parse_step_init("newton").is_err());
    }
}
