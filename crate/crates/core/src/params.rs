//! Experiment parameters: the exponent `c`, the target scale, and every
//! derived scalar the evaluators and searches share.

use crate::dd::Dd;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Upper end of the supported exponent range, 37/18.
pub const C_MAX: f64 = 37.0 / 18.0;

/// How many primes the triple-sum estimates may assume; see `derive_params`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Three-variable problem: targets R in (N, 2N], window scale X = (2N/3)^(1/c).
    Ternary,
    /// Six-variable problem: target N itself, window scale X = (N/5)^(1/c).
    Senary,
}

/// Which epsilon the run uses: the notation default 1/log^2 X, the
/// solvability-scan width 1/log N, or an explicit override. Reports always
/// embed the resolved value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpsPreset {
    LogX2Inv,
    LogNInv,
    Fixed(f64),
}

/// All derived scalars for one experiment. Immutable after construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub c: f64,
    pub eta: f64,
    /// Target scale N.
    pub n_target: f64,
    pub mode: Mode,
    /// Prime window scale: primes are drawn from (X/2, X].
    pub x: f64,
    /// Major-arc cutoff tau = X^(1 - c - eta).
    pub tau: f64,
    /// Inequality width epsilon.
    pub eps: f64,
    pub eps_preset: EpsPreset,
    /// Minor-arc cutoff K = log^5 X.
    pub k_cut: f64,
    /// L = log X.
    pub l: f64,
    /// E = exp(-L^(1/5)).
    pub e_decay: f64,
    /// P = (2/E^2)^(1/3) * L.
    pub p_split: f64,
    /// delta = c/2 - 1 + eta, defined only for c > 2.
    pub delta: Option<f64>,
    /// True when the run was allowed outside the supported parameter range.
    pub range_override: bool,
}

/// Window scale X for a target N: (2N/3)^(1/c) in ternary mode, (N/5)^(1/c)
/// in senary mode.
pub fn scale_from_target(c: f64, n_target: f64, mode: Mode) -> f64 {
    let base = match mode {
        Mode::Ternary => Dd::prod(2.0, n_target) / Dd::from_f64(3.0),
        Mode::Senary => Dd::from_f64(n_target) / Dd::from_f64(5.0),
    };
    Dd::pow_dd(base, Dd::ONE / Dd::from_f64(c)).to_f64()
}

/// Derive every scalar of [`ProblemParams`] from `(c, eta, N, mode)`.
///
/// The supported range is 1 < c < 37/18, c != 2, eta > 0, N >= 100;
/// `range_override` relaxes the c-range and the N floor for exploratory runs
/// and is recorded in the output.
pub fn derive_params(
    c: f64,
    eta: f64,
    n_target: f64,
    mode: Mode,
    eps_preset: EpsPreset,
    range_override: bool,
) -> Result<ProblemParams> {
    if !(eta > 0.0) {
        return Err(Error::precondition(format!(
            "eta must be positive, got {eta}"
        )));
    }
    if !(c > 1.0) {
        return Err(Error::precondition(format!("c must exceed 1, got {c}")));
    }
    if !range_override {
        if c >= C_MAX || c == 2.0 {
            return Err(Error::precondition(format!(
                "c = {c} outside supported range (1, 37/18) \\ {{2}}; pass the override flag for exploratory runs"
            )));
        }
        if !(n_target >= 100.0) {
            return Err(Error::precondition(format!(
                "N must be at least 100, got {n_target}"
            )));
        }
    } else if !(n_target > 0.0) {
        return Err(Error::precondition("N must be positive".to_string()));
    }

    let x = scale_from_target(c, n_target, mode);
    let l = x.ln();
    if !(l > 0.0) {
        return Err(Error::precondition(format!(
            "derived window scale X = {x} must exceed 1"
        )));
    }
    let tau = Dd::pow_f64(x, 1.0 - c - eta).to_f64();
    let k_cut = l.powi(5);
    let e_decay = (-l.powf(0.2)).exp();
    let p_split = (2.0 / (e_decay * e_decay)).cbrt() * l;
    let eps = match eps_preset {
        EpsPreset::LogX2Inv => 1.0 / (l * l),
        EpsPreset::LogNInv => 1.0 / n_target.ln(),
        EpsPreset::Fixed(v) => {
            if !(v > 0.0) {
                return Err(Error::precondition(format!(
                    "epsilon must be positive, got {v}"
                )));
            }
            v
        }
    };
    let delta = if c > 2.0 {
        Some(c / 2.0 - 1.0 + eta)
    } else {
        None
    };

    Ok(ProblemParams {
        c,
        eta,
        n_target,
        mode,
        x,
        tau,
        eps,
        eps_preset,
        k_cut,
        l,
        e_decay,
        p_split,
        delta,
        range_override,
    })
}

impl ProblemParams {
    /// Short deterministic identifier used to tag samples and reports.
    pub fn id(&self) -> String {
        format!(
            "c{:.6}-eta{:.6}-N{:.6e}-{}",
            self.c,
            self.eta,
            self.n_target,
            match self.mode {
                Mode::Ternary => "t3",
                Mode::Senary => "s6",
            }
        )
    }

    /// Lower/upper bounds of the prime window (X/2, X].
    pub fn window(&self) -> (f64, f64) {
        (self.x / 2.0, self.x)
    }
}
