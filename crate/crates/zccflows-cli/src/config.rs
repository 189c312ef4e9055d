//! Config-file loading and flag merging.
//!
//! Every subcommand accepts `--config <json>`; explicit flags override file
//! values, which override built-in defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use zccflows::flows::{IntegratorConfig, Method};
use zccflows::liealg::{AlgebraTag, LieElement, Splitting};

use crate::CliError;

/// Optional values readable from a JSON config file. Field names match the
/// long flag names.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub degree: Option<usize>,
    pub probes: Option<usize>,
    pub points: Option<usize>,
    pub letters: Option<Vec<usize>>,
    pub grid: Option<Vec<f64>>,
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub time: Option<f64>,
    pub samples: Option<usize>,
    pub pair: Option<String>,
    pub a: Option<PathBuf>,
    pub b: Option<PathBuf>,
    pub splitting: Option<String>,
    pub right_nested: Option<bool>,
    pub integrator: Option<String>,
    pub step: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_steps: Option<usize>,
    pub out: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::usage(format!("bad config {}: {e}", p.display())))
            }
        }
    }
}

/// Flag value, then file value, then default.
pub fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>, default: T) -> T {
    flag.clone().or_else(|| file.clone()).unwrap_or(default)
}

pub fn pick_opt<T: Clone>(flag: &Option<T>, file: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| file.clone())
}

pub fn parse_method(name: &str) -> Result<Method, CliError> {
    match name {
        "rk4" | "rk4-fixed" => Ok(Method::Rk4Fixed),
        "dp54" | "dp54-adaptive" => Ok(Method::Dp54Adaptive),
        other => Err(CliError::usage(format!(
            "unknown integrator '{other}' (expected rk4 or dp54)"
        ))),
    }
}

pub fn integrator_config(
    method: Option<&str>,
    step: Option<f64>,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    max_steps: Option<usize>,
) -> Result<IntegratorConfig, CliError> {
    let mut cfg = IntegratorConfig::default();
    if let Some(m) = method {
        cfg.method = parse_method(m)?;
    }
    if let Some(v) = step {
        cfg.step = v;
    }
    if let Some(v) = rel_tol {
        cfg.rel_tol = v;
    }
    if let Some(v) = abs_tol {
        cfg.abs_tol = v;
    }
    if let Some(v) = max_steps {
        cfg.max_steps = v;
    }
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(cfg)
}

pub fn load_splitting(name: &str) -> Result<Splitting, CliError> {
    Splitting::by_name(name).map_err(|e| CliError::usage(e.to_string()))
}

/// Load a matrix literal (row-major nested JSON arrays) as an sl element.
pub fn load_matrix(path: &Path) -> Result<LieElement, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("bad matrix literal {}: {e}", path.display())))?;
    LieElement::from_rows(&rows, AlgebraTag::SpecialLinear)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// The (a, b) pair for zcc experiments: a named builtin pair or explicit
/// matrix files.
pub fn resolve_pair(
    pair: Option<&str>,
    a: Option<&Path>,
    b: Option<&Path>,
) -> Result<(LieElement, LieElement, String), CliError> {
    match (a, b) {
        (Some(pa), Some(pb)) => {
            let a = load_matrix(pa)?;
            let b = load_matrix(pb)?;
            Ok((a, b, "explicit".to_string()))
        }
        (None, None) => {
            let name = pair.unwrap_or("commuting");
            let e = |i, j| {
                LieElement::elementary(3, i, j, AlgebraTag::SpecialLinear).expect("elementary")
            };
            match name {
                // a = E_31, b = E_32 commute.
                "commuting" => Ok((e(3, 1), e(3, 2), name.to_string())),
                // a = E_31, b = E_12: [a, b] = E_32, whose skew part is not
                // central, so the flows cannot commute.
                "non-commuting" => Ok((e(3, 1), e(1, 2), name.to_string())),
                other => Err(CliError::usage(format!(
                    "unknown pair '{other}' (expected commuting or non-commuting)"
                ))),
            }
        }
        _ => Err(CliError::usage(
            "matrix files must be given for both --a and --b",
        )),
    }
}
