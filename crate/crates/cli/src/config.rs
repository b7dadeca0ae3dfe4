//! The resolved run configuration: one flat record per invocation, loadable
//! from a JSON file, overridden by flags, and embedded verbatim in every
//! report so a run can be reproduced from its own output.

use crate::CliError;
use dioph_core::{derive_params, EpsPreset, Mode, ProblemParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub command: String,

    // problem parameters
    pub c: Option<f64>,
    pub eta: Option<f64>,
    pub n_target: Option<f64>,
    pub mode: Option<String>,
    /// "log-x2", "log-n", or a positive number.
    pub eps_preset: Option<String>,
    pub range_override: bool,

    // randomness and budgets
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub threads: Option<usize>,

    // tables and grids
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    /// "start:stop:count[:log]"
    pub grid: Option<String>,
    /// comma-separated frequency list
    pub freqs: Option<String>,

    // evaluator / moment knobs
    pub kind: Option<String>,
    pub power: Option<u32>,
    pub tau: Option<f64>,
    pub k_cut: Option<f64>,

    // counting
    pub m_window: Option<u64>,
    pub gamma: Option<f64>,
    pub uv_tau: Option<f64>,

    // exponent pairs
    pub word: Option<String>,
    /// "kappa,lambda" as rationals, e.g. "0,1" or "1/2,1/2"
    pub pair_seed: Option<String>,
    /// rational c for the built-in Type-I objective
    pub objective_c: Option<String>,
    /// "c0,ck,cl" rationals for a custom linear objective
    pub linear_objective: Option<String>,
    pub max_word_len: Option<usize>,

    // balancing
    /// terms as "coef^expo" joined by commas, e.g. "2.0^1.5,0.3^0.8"
    pub rising: Option<String>,
    pub falling: Option<String>,
    pub h1: Option<f64>,
    pub h2: Option<f64>,

    // shift inequality
    pub q_shift: Option<u64>,
    pub window_len: Option<usize>,
    /// CSV file of "re,im" rows for the shifted window
    pub input: Option<String>,

    // searches
    pub r_target: Option<f64>,
    pub eps: Option<f64>,
    pub window: Option<String>,
    pub bound: Option<f64>,
    pub all: bool,

    // minor-arc report
    /// "M:N:F0" triples joined by ';'
    pub splits: Option<String>,
    pub kappa: Option<String>,
    pub lambda: Option<String>,

    // outputs
    pub out: Option<String>,
    pub csv: Option<String>,
}

impl RunConfig {
    pub fn load(path: &str) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {path}: {e}")))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("cannot parse config {path}: {e}")))
    }

    pub fn require_f64(&self, field: &str, v: Option<f64>) -> Result<f64, CliError> {
        v.ok_or_else(|| CliError::Config(format!("missing required parameter --{field}")))
    }

    pub fn eps_preset(&self) -> Result<EpsPreset, CliError> {
        match self.eps_preset.as_deref() {
            None | Some("log-x2") => Ok(EpsPreset::LogX2Inv),
            Some("log-n") => Ok(EpsPreset::LogNInv),
            Some(other) => {
                let v: f64 = other.parse().map_err(|_| {
                    CliError::Config(format!(
                        "eps preset must be log-x2, log-n or a number, got '{other}'"
                    ))
                })?;
                Ok(EpsPreset::Fixed(v))
            }
        }
    }

    pub fn mode(&self) -> Result<Mode, CliError> {
        match self.mode.as_deref() {
            Some("ternary") | None => Ok(Mode::Ternary),
            Some("senary") => Ok(Mode::Senary),
            Some(other) => Err(CliError::Config(format!(
                "mode must be ternary or senary, got '{other}'"
            ))),
        }
    }

    /// Build the problem parameters from (c, eta, n, mode, eps preset).
    pub fn params(&self) -> Result<ProblemParams, CliError> {
        let c = self.require_f64("c", self.c)?;
        let eta = self.eta.unwrap_or(0.01);
        let n = self.require_f64("n-target", self.n_target)?;
        Ok(derive_params(
            c,
            eta,
            n,
            self.mode()?,
            self.eps_preset()?,
            self.range_override,
        )?)
    }
}

/// Parse "start:stop:count[:log]" into a grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 && parts.len() != 4 {
        return Err(CliError::Config(format!(
            "grid must be start:stop:count[:log], got '{spec}'"
        )));
    }
    let bad = |what: &str| CliError::Config(format!("bad grid {what} in '{spec}'"));
    let start: f64 = parts[0].parse().map_err(|_| bad("start"))?;
    let stop: f64 = parts[1].parse().map_err(|_| bad("stop"))?;
    let count: usize = parts[2].parse().map_err(|_| bad("count"))?;
    let log = match parts.get(3) {
        None | Some(&"lin") => false,
        Some(&"log") => true,
        Some(other) => return Err(CliError::Config(format!("bad grid scale '{other}'"))),
    };
    if count < 1 || (log && (start <= 0.0 || stop <= 0.0)) {
        return Err(bad("range"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let pts = (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            if log {
                start * (stop / start).powf(t)
            } else {
                start + (stop - start) * t
            }
        })
        .collect();
    Ok(pts)
}

/// Parse a comma-separated list of floats.
pub fn parse_f64_list(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad number '{s}'")))
        })
        .collect()
}

/// Parse balance terms "coef^expo,coef^expo,...".
pub fn parse_terms(spec: &str) -> Result<Vec<(f64, f64)>, CliError> {
    spec.split(',')
        .map(|t| {
            let (a, b) = t
                .split_once('^')
                .ok_or_else(|| CliError::Config(format!("term '{t}' must be coef^expo")))?;
            let coef = a
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad coefficient '{a}'")))?;
            let expo = b
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad exponent '{b}'")))?;
            Ok((coef, expo))
        })
        .collect()
}

/// Parse "M:N:F0;M:N:F0" split specs.
pub fn parse_splits(spec: &str) -> Result<Vec<dioph_core::bilinear::SplitSpec>, CliError> {
    spec.split(';')
        .map(|s| {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err(CliError::Config(format!("split '{s}' must be M:N:F0")));
            }
            let get = |i: usize| -> Result<f64, CliError> {
                parts[i]
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad split number '{}'", parts[i])))
            };
            Ok(dioph_core::bilinear::SplitSpec {
                m: get(0)?,
                n: get(1)?,
                f0: get(2)?,
            })
        })
        .collect()
}
