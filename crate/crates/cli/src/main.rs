//! Batch experiment driver: every subcommand resolves a configuration
//! (flags over an optional JSON config file), runs one library operation,
//! and writes a JSON report embedding the resolved configuration, plus
//! optional CSV plot data. Exit codes: 0 success, 2 configuration error,
//! 3 precondition violation, 4 resource cap.

mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{parse_f64_list, parse_grid, parse_splits, parse_terms, RunConfig};
use dioph_core::bilinear::{
    bound_ratio_report, classify_component, hb_decompose, recombine, HbContext,
};
use dioph_core::exppairs::{
    apply_word, gk_balance, minimize_objective, parse_rational, weyl_shift_check, BalanceProblem,
    ExponentPair, FractionalObjective,
};
use dioph_core::expsum::{eval_i, eval_s, eval_u_lambda, SumKind, SumSample};
use dioph_core::moments::{
    count_near_solutions, laporta_kernel_bound, moment, moment_oracle, uv_split,
};
use dioph_core::solver::{
    scan_exceptional, search_six, search_three, variance_probe, weighted_count, SearchWindow,
};
use dioph_core::{build_table, PhiBand, SmoothingKernel};
use num::complex::Complex64;
use num::ToPrimitive;
use output::{fmt_f64, to_json_string, write_csv, write_text};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] dioph_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(dioph_core::Error::Precondition(_)) => 3,
            CliError::Core(dioph_core::Error::OscillationBudget { .. }) => 3,
            CliError::Core(dioph_core::Error::ResourceCap(_)) => 4,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "dioph", version, about = "Prime power-inequality experiments")]
struct Cli {
    /// JSON config file; explicit flags override its fields
    #[arg(long, global = true)]
    config: Option<String>,
    /// Write the JSON report here (default: stdout); relative paths resolve
    /// against DIOPH_OUT_DIR
    #[arg(long, global = true)]
    out: Option<String>,
    /// Write CSV plot data here
    #[arg(long, global = true)]
    csv: Option<String>,
    /// Cap the worker pool (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct ParamArgs {
    /// Exponent c
    #[arg(long)]
    c: Option<f64>,
    /// Notation parameter eta (default 0.01)
    #[arg(long)]
    eta: Option<f64>,
    /// Target scale N
    #[arg(long = "n-target")]
    n_target: Option<f64>,
    /// ternary | senary
    #[arg(long)]
    mode: Option<String>,
    /// log-x2 | log-n | a positive number
    #[arg(long = "eps-preset")]
    eps_preset: Option<String>,
    /// Admit c outside (1, 37/18) and small N; recorded in the report
    #[arg(long = "range-override")]
    range_override: bool,
}

impl ParamArgs {
    fn merge(&self, cfg: &mut RunConfig) {
        if self.c.is_some() {
            cfg.c = self.c;
        }
        if self.eta.is_some() {
            cfg.eta = self.eta;
        }
        if self.n_target.is_some() {
            cfg.n_target = self.n_target;
        }
        if self.mode.is_some() {
            cfg.mode = self.mode.clone();
        }
        if self.eps_preset.is_some() {
            cfg.eps_preset = self.eps_preset.clone();
        }
        if self.range_override {
            cfg.range_override = true;
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build a weighted prime table over (lo, hi]
    Sieve {
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
    },
    /// Verify the kernel Fourier envelope on a grid
    KernelCheck {
        #[command(flatten)]
        params: ParamArgs,
        /// start:stop:count[:log]
        #[arg(long)]
        grid: Option<String>,
    },
    /// Evaluate S, I or the Mangoldt-weighted sum on a frequency grid
    EvalSum {
        #[command(flatten)]
        params: ParamArgs,
        /// S | I | U
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        grid: Option<String>,
    },
    /// Quadrature moment of |S| or |I| with optional termwise oracle
    Moments {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        power: Option<u32>,
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Count quadruples |n1^c + n2^c - n3^c - n4^c| < gamma over (M, 2M]
    CountQuadruples {
        #[arg(long = "m-window")]
        m_window: Option<u64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        /// Also report the U/V split at this tau
        #[arg(long = "uv-tau")]
        uv_tau: Option<f64>,
    },
    /// Estimate the annulus kernel integral A and its ratio to log N
    LaportaA {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long = "k-cut")]
        k_cut: Option<f64>,
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Apply an A/B word to a seed pair
    Exppair {
        #[arg(long)]
        word: Option<String>,
        /// "kappa,lambda" as rationals, e.g. 0,1
        #[arg(long = "seed")]
        pair_seed: Option<String>,
    },
    /// Exhaustive word search minimizing an exact objective
    ExppairSearch {
        /// rational exponent c for the built-in Type-I objective
        #[arg(long = "objective-c")]
        objective_c: Option<String>,
        /// custom linear objective "c0,ck,cl" (rationals)
        #[arg(long = "linear")]
        linear_objective: Option<String>,
        #[arg(long = "max-word-len")]
        max_word_len: Option<usize>,
    },
    /// Grid-minimize a rising/falling term balance and compare to the
    /// closed-form right side
    GkBalance {
        /// terms "coef^expo,..." growing in H
        #[arg(long)]
        rising: Option<String>,
        /// terms "coef^expo,..." decaying in H
        #[arg(long)]
        falling: Option<String>,
        #[arg(long)]
        h1: Option<f64>,
        #[arg(long)]
        h2: Option<f64>,
    },
    /// Evaluate the shifted-autocorrelation inequality on a window
    WeylCheck {
        /// CSV of re,im rows for the window values
        #[arg(long)]
        input: Option<String>,
        /// Or: deterministic phase window of this length
        #[arg(long = "window-len")]
        window_len: Option<usize>,
        #[arg(long = "q-shift")]
        q_shift: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Decompose the Mangoldt window sum and verify recombination
    HbCheck {
        #[command(flatten)]
        params: ParamArgs,
        /// comma-separated frequencies
        #[arg(long)]
        freqs: Option<String>,
    },
    /// Classify every decomposition component as Type I / II (needs c > 2)
    Classify {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// |S| against the proven minor-arc bound shapes, with split bookkeeping
    MinorArcReport {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        freqs: Option<String>,
        /// "M:N:F0;..." bilinear splits to report
        #[arg(long)]
        splits: Option<String>,
        #[arg(long)]
        kappa: Option<String>,
        #[arg(long)]
        lambda: Option<String>,
    },
    /// Search three-prime representations of R
    Search3 {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long = "r-target")]
        r_target: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        /// paper | full
        #[arg(long)]
        window: Option<String>,
        /// prime bound for full-range mode
        #[arg(long)]
        bound: Option<f64>,
    },
    /// Search six-prime representations of N
    Search6 {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        eps: Option<f64>,
        /// collect all representations instead of stopping at the first
        #[arg(long)]
        all: bool,
    },
    /// Sample targets in (N, 2N] and report the no-solution fraction
    ScanExceptional {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Monte Carlo probe of the smoothed-count variance against its shape
    VarianceProbe {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn base_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.csv.is_some() {
        cfg.csv = cli.csv.clone();
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = base_config(&cli)?;
    if let Some(threads) = cfg.threads {
        // ignore the error if a pool already exists (e.g. in tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let out: CmdOut = match &cli.command {
        Command::Sieve { lo, hi, c } => {
            cfg.command = "sieve".into();
            if lo.is_some() {
                cfg.lo = *lo;
            }
            if hi.is_some() {
                cfg.hi = *hi;
            }
            if c.is_some() {
                cfg.c = *c;
            }
            cmd_sieve(&cfg)?
        }
        Command::KernelCheck { params, grid } => {
            cfg.command = "kernel-check".into();
            params.merge(&mut cfg);
            if grid.is_some() {
                cfg.grid = grid.clone();
            }
            cmd_kernel_check(&cfg)?
        }
        Command::EvalSum { params, kind, grid } => {
            cfg.command = "eval-sum".into();
            params.merge(&mut cfg);
            if kind.is_some() {
                cfg.kind = kind.clone();
            }
            if grid.is_some() {
                cfg.grid = grid.clone();
            }
            cmd_eval_sum(&cfg)?
        }
        Command::Moments {
            params,
            kind,
            power,
            tau,
        } => {
            cfg.command = "moments".into();
            params.merge(&mut cfg);
            if kind.is_some() {
                cfg.kind = kind.clone();
            }
            if power.is_some() {
                cfg.power = *power;
            }
            if tau.is_some() {
                cfg.tau = *tau;
            }
            cmd_moments(&cfg)?
        }
        Command::CountQuadruples {
            m_window,
            c,
            gamma,
            uv_tau,
        } => {
            cfg.command = "count-quadruples".into();
            if m_window.is_some() {
                cfg.m_window = *m_window;
            }
            if c.is_some() {
                cfg.c = *c;
            }
            if gamma.is_some() {
                cfg.gamma = *gamma;
            }
            if uv_tau.is_some() {
                cfg.uv_tau = *uv_tau;
            }
            cmd_count_quadruples(&cfg)?
        }
        Command::LaportaA {
            params,
            tau,
            k_cut,
            samples,
        } => {
            cfg.command = "laporta-a".into();
            params.merge(&mut cfg);
            if tau.is_some() {
                cfg.tau = *tau;
            }
            if k_cut.is_some() {
                cfg.k_cut = *k_cut;
            }
            if samples.is_some() {
                cfg.samples = *samples;
            }
            cmd_laporta(&cfg)?
        }
        Command::Exppair { word, pair_seed } => {
            cfg.command = "exppair".into();
            if word.is_some() {
                cfg.word = word.clone();
            }
            if pair_seed.is_some() {
                cfg.pair_seed = pair_seed.clone();
            }
            cmd_exppair(&cfg)?
        }
        Command::ExppairSearch {
            objective_c,
            linear_objective,
            max_word_len,
        } => {
            cfg.command = "exppair-search".into();
            if objective_c.is_some() {
                cfg.objective_c = objective_c.clone();
            }
            if linear_objective.is_some() {
                cfg.linear_objective = linear_objective.clone();
            }
            if max_word_len.is_some() {
                cfg.max_word_len = *max_word_len;
            }
            cmd_exppair_search(&cfg)?
        }
        Command::GkBalance {
            rising,
            falling,
            h1,
            h2,
        } => {
            cfg.command = "gk-balance".into();
            if rising.is_some() {
                cfg.rising = rising.clone();
            }
            if falling.is_some() {
                cfg.falling = falling.clone();
            }
            if h1.is_some() {
                cfg.h1 = *h1;
            }
            if h2.is_some() {
                cfg.h2 = *h2;
            }
            cmd_gk_balance(&cfg)?
        }
        Command::WeylCheck {
            input,
            window_len,
            q_shift,
            seed,
        } => {
            cfg.command = "weyl-check".into();
            if input.is_some() {
                cfg.input = input.clone();
            }
            if window_len.is_some() {
                cfg.window_len = *window_len;
            }
            if q_shift.is_some() {
                cfg.q_shift = *q_shift;
            }
            if seed.is_some() {
                cfg.seed = *seed;
            }
            cmd_weyl_check(&cfg)?
        }
        Command::HbCheck { params, freqs } => {
            cfg.command = "hb-check".into();
            params.merge(&mut cfg);
            if freqs.is_some() {
                cfg.freqs = freqs.clone();
            }
            cmd_hb_check(&cfg)?
        }
        Command::Classify { params } => {
            cfg.command = "classify".into();
            params.merge(&mut cfg);
            cmd_classify(&cfg)?
        }
        Command::MinorArcReport {
            params,
            freqs,
            splits,
            kappa,
            lambda,
        } => {
            cfg.command = "minor-arc-report".into();
            params.merge(&mut cfg);
            if freqs.is_some() {
                cfg.freqs = freqs.clone();
            }
            if splits.is_some() {
                cfg.splits = splits.clone();
            }
            if kappa.is_some() {
                cfg.kappa = kappa.clone();
            }
            if lambda.is_some() {
                cfg.lambda = lambda.clone();
            }
            cmd_minor_arc(&cfg)?
        }
        Command::Search3 {
            params,
            r_target,
            eps,
            window,
            bound,
        } => {
            cfg.command = "search3".into();
            params.merge(&mut cfg);
            if r_target.is_some() {
                cfg.r_target = *r_target;
            }
            if eps.is_some() {
                cfg.eps = *eps;
            }
            if window.is_some() {
                cfg.window = window.clone();
            }
            if bound.is_some() {
                cfg.bound = *bound;
            }
            cmd_search3(&cfg)?
        }
        Command::Search6 { params, eps, all } => {
            cfg.command = "search6".into();
            params.merge(&mut cfg);
            if eps.is_some() {
                cfg.eps = *eps;
            }
            if *all {
                cfg.all = true;
            }
            cmd_search6(&cfg)?
        }
        Command::ScanExceptional {
            params,
            samples,
            seed,
        } => {
            cfg.command = "scan-exceptional".into();
            params.merge(&mut cfg);
            if samples.is_some() {
                cfg.samples = *samples;
            }
            if seed.is_some() {
                cfg.seed = *seed;
            }
            cmd_scan(&cfg)?
        }
        Command::VarianceProbe {
            params,
            samples,
            seed,
        } => {
            cfg.command = "variance-probe".into();
            params.merge(&mut cfg);
            if samples.is_some() {
                cfg.samples = *samples;
            }
            if seed.is_some() {
                cfg.seed = *seed;
            }
            cmd_variance(&cfg)?
        }
    };

    let report = json!({
        "command": cfg.command,
        "config": cfg,
        "result": out.result,
    });
    let text = to_json_string(&report)?;
    match &cfg.out {
        Some(path) => write_text(path, &text)?,
        None if !out.printed => print!("{text}"),
        None => {}
    }
    if let Some((header, rows)) = out.csv {
        if let Some(path) = &cfg.csv {
            write_csv(path, &header, &rows)?;
        }
    }
    Ok(())
}

struct CmdOut {
    result: Value,
    csv: Option<(String, Vec<Vec<String>>)>,
    /// Set when the command already printed its human-readable line; the
    /// JSON report then goes to stdout only if --out asked for a file.
    printed: bool,
}

impl CmdOut {
    fn json(result: Value, csv: Option<(String, Vec<Vec<String>>)>) -> Self {
        CmdOut {
            result,
            csv,
            printed: false,
        }
    }
}

fn cmd_sieve(cfg: &RunConfig) -> Result<CmdOut, CliError> {
    let lo = cfg.require_f64("lo", cfg.lo)?;
    let hi = cfg.require_f64("hi", cfg.hi)?;
    let c = cfg.require_f64("c", cfg.c)?;
    let table = build_table(lo, hi, c)?;
    let rows: Vec<Vec<String>> = table
        .entries
        .iter()
        .map(|e| vec![e.p.to_string(), fmt_f64(e.logp), fmt_f64(e.pc)])
        .collect();
    let result = json!({
        "count": table.len(),
        "total_log_weight": table.total_log_weight(),
        "first": table.entries.first().map(|e| e.p),
        "last": table.entries.last().map(|e| e.p),
    });
    Ok(CmdOut::json(result, Some(("p,logp,pc".into(), rows))))
}

fn cmd_kernel_check(cfg: &RunConfig) -> Result<CmdOut, CliError> {
    let params = cfg.params()?;
    let kernel = SmoothingKernel::for_params(&params)?;
    let grid = parse_grid(cfg.grid.as_deref().unwrap_or("1e-3:1e6:1000:log"))?;
    let rep = kernel.verify_bound(&grid)?;
    let rows: Vec<Vec<String>> = grid
        .iter()
        .map(|&x| {
            vec![
                fmt_f64(x),
                fmt_f64(kernel.phi_hat(x)),
                fmt_f64(kernel.envelope(x)),
                fmt_f64(kernel.envelope_ratio(x)),
            ]
        })
        .collect();
    let result = json!({
        "kernel": kernel,
        "max_ratio": rep.max_ratio,
        "argmax": rep.argmax,
        "pass": rep.pass,
    });
    Ok(CmdOut::json(
        result,
        Some(("x,phi_hat,envelope,ratio".into(), rows)),
    ))
}

fn cmd_eval_sum(cfg: &RunConfig) -> Result<CmdOut, CliError> {
    let params = cfg.params()?;
    let grid = parse_grid(
        cfg.grid
            .as_deref()
            .ok_or_else(|| CliError::Config("eval-sum needs --grid".into()))?,
    )?;
    let (kind_name, kind) = match cfg.kind.as_deref().unwrap_or("S") {
        "S" => ("S", SumKind::S),
        "I" => ("I", SumKind::I),
        "U" => ("U", SumKind::ULambda),
        other => {
            return Err(CliError::Config(format!(
                "kind must be S, I or U, got '{other}'"
            )))
        }
    };
    let values: Vec<Complex64> = match kind {
        SumKind::S => {
            let table = build_table(params.x / 2.0, params.x, params.c)?;
            grid.iter().map(|&x| eval_s(&table, x)).collect()
        }
        SumKind::I => grid
            .iter()
            .map(|&x| eval_i(&params, x))
            .collect::<dioph_core::Result<_>>()?,
        SumKind::ULambda => grid
            .iter()
            .map(|&x| eval_u_lambda(&params, x))
            .collect::<dioph_core::Result<_>>()?,
    };
    let samples: Vec<SumSample> = grid
        .iter()
        .zip(&values)
        .map(|(&x, v)| SumSample {
            x,
            re: v.re,
            im: v.im,
            kind,
            params_id: params.id(),
        })
        .collect();
    let rows: Vec<Vec<String>> = samples
        .iter()
        .map(|s| vec![fmt_f64(s.x), fmt_f64(s.re), fmt_f64(s.im)])
        .collect();
    let result = json!({
        "params_id": params.id(),
        "kind": kind_name,
        "samples": samples,
    });
    Ok(CmdOut::json(result, Some(("x,re,im".into(), rows))))
}

fn cmd_moments(cfg: &RunConfig) -> Result<CmdOut, CliError> {
    let params = cfg.params()?;
    let table = build_table(params.x / 2.0, params.x, params.c)?;
    let kind = match cfg.kind.as_deref().unwrap_or("S") {
        "S" => SumKind::S,
        "I" => SumKind::I,
        other => {
            return Err(CliError::Config(format!(
                "moment kind must be S or I, got '{other}'"
            )))
        }
    };
    let power = cfg.power.unwrap_or(2);
    let tau = cfg.tau.unwrap_or(params.tau);
    let mut rep = moment(&params, &table, kind, power, tau)?;
    if kind == SumKind::S && (power == 2 || table.len() <= 200) {
        rep.oracle = Some(moment_oracle(&table, power, tau)?);
    }
    let rows = vec![vec![
        format!("{kind:?}"),
        power.to_string(),
        fmt_f64(tau),
        fmt_f64(rep.estimate),
        rep.oracle.map(fmt_f64).unwrap_or_default(),
        fmt_f64(rep.bound_ratio),
    ]];
    Ok(CmdOut::json(
        serde_json::to_value(&rep).map_err(|e| CliError::Config(e.to_string()))?,
        Some(("kind,power,tau,estimate,oracle,bound_ratio".into(), rows)),
    ))
}

fn cmd_count_quadruples(cfg: &RunConfig) -> Result<CmdOut, CliError> {
    let m = cfg
        .m_window
        .ok_or_else(|| CliError::Config("missing --m-window".into()))?;
    let c = cfg.require_f64("c", cfg.c)?;
    let gamma = cfg.require_f64("gamma", cfg.gamma)?;
    let count = count_near_solutions(m, c, gamma)?;
    let uv = match cfg.uv_tau {
        Some(tau) => {
            let (u, v) = uv_split(m, c, tau)?;
            Some(json!({"tau": tau, "u": u, "v": v}))
        }
        None => None,
    };
    let result = json!({"m": m, "c": c, "gamma": gamma, "count": count, "uv": uv});
    let rows = vec![vec![
        m.to_string(),
        fmt_f64(c),
        fmt_f64(gamma),
        count.to_string(),
    ]];
    Ok(CmdOut::json(result, Some(("m,c,gamma,count".into(), rows))))
}

fn cmd_laporta(cfg: &RunConfig) -> Result<CmdOut, CliError> {
    let params = cfg.params()?;
    let tau = cfg.tau.unwrap_or(params.tau);
    let k_cut = cfg.k_cut.unwrap_or(params.k_cut);
    let samples = cfg.samples.unwrap_or(100_000);
    let rep = laporta_kernel_bound(params.n_target, tau, k_cut, samples)?;
    let rows: Vec<Vec<String>> = rep
        .per_target
        .iter()
        .map(|&(rp, v)| vec![fmt_f64(rp), fmt_f64(v)])
        .collect();
    Ok(CmdOut::json(
        serde_json::to_value(&rep).map_err(|e| CliError::Config(e.to_string()))?,
        Some(("r_prime,integral".into(), rows)),
    ))
}

fn parse_pair(spec: &str) -> Result<ExponentPair, CliError> {
    let (k, l) = spec
        .split_once(',')
        .ok_or_else(|| CliError::Config(format!("pair '{spec}' must be kappa,lambda")))?;
    Ok(ExponentPair::new(parse_rational(k)?, parse_rational(l)?)?)
}

fn cmd_exppair(cfg: &RunConfig) -> Result<CmdOut, CliError> {
    let word = cfg
        .word
        .as_deref()
        .ok_or_else(|| CliError::Config("missing --word".into()))?;
    let seed = parse_pair(cfg.pair_seed.as_deref().unwrap_or("0,1"))?;
    let result_pair = apply_word(word, &seed)?;
    println!("{result_pair}");
    let (kf, lf) = result_pair.as_f64();
    let result = json!({
        "word": word,
        "seed": cfg.pair_seed.as_deref().unwrap_or("0,1"),
        "kappa": result_pair.kappa().to_string(),
        "lambda": result_pair.lambda().to_string(),
        "kappa_f64": kf,
        "lambda_f64": lf,
    });
    Ok(CmdOut {
        result,
        csv: None,
        printed: true,
    })
}

fn cmd_exppair_search(cfg: &RunConfig) -> Result<CmdOut, CliError> {
    let objective = if let Some(c) = &cfg.objective_c {
        FractionalObjective::type_i_exponent(&parse_rational(c)?)
    } else if let Some(lin) = &cfg.linear_objective {
        let parts: Vec<&str> = lin.split(',').collect();
        if parts.len() != 3 {
            return Err(CliError::Config("linear objective must be c0,ck,cl".into()));
        }
        FractionalObjective::linear(
            parse_rational(parts[0])?,
            parse_rational(parts[1])?,
            parse_rational(parts[2])?,
        )
    } else {
        return Err(CliError::Config(
            "exppair-search needs --objective-c or --linear".into(),
        ));
    };
    let max_len = cfg.max_word_len.unwrap_or(8);
    let (pair, word, value) = minimize_objective(&objective, max_len)?;
    println!("{word} -> {pair} (objective {value})");
    let result = json!({
        "word": word,
        "kappa": pair.kappa().to_string(),
        "lambda": pair.lambda().to_string(),
        "objective": value.to_string(),
        "objective_f64": value.to_f64(),
        "max_word_len": max_len,
    });
    Ok(CmdOut {
        result,
        csv: None,
        printed: true,
    })
}

fn cmd_gk_balance(cfg: &RunConfig) -> Result<CmdOut, CliError> {
    let prob = BalanceProblem {
        rising: parse_terms(
            cfg.rising
                .as_deref()
                .ok_or_else(|| CliError::Config("missing --rising".into()))?,
        )?,
        falling: parse_terms(
            cfg.falling
                .as_deref()
                .ok_or_else(|| CliError::Config("missing --falling".into()))?,
        )?,
        h1: cfg.require_f64("h1", cfg.h1)?,
        h2: cfg.require_f64("h2", cfg.h2)?,
    };
    let res = gk_balance(&prob)?;
    let rows = vec![vec![fmt_f64(res.h), fmt_f64(res.value), fmt_f64(res.rhs)]];
    Ok(CmdOut::json(
        json!({"problem": prob, "h": res.h, "value": res.value, "rhs": res.rhs}),
        Some(("h,value,rhs".into(), rows)),
    ))
}

fn cmd_weyl_check(cfg: &RunConfig) -> Result<CmdOut, CliError> {
    let z: Vec<Complex64> = if let Some(path) = &cfg.input {
        let text = std::fs::read_to_string(output::resolve_path(path))
            .map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
        text.lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with("re"))
            .map(|l| {
                let (re, im) = l
                    .split_once(',')
                    .ok_or_else(|| CliError::Config(format!("bad window row '{l}'")))?;
                Ok(Complex64::new(
                    re.trim()
                        .parse()
                        .map_err(|_| CliError::Config(format!("bad re '{re}'")))?,
                    im.trim()
                        .parse()
                        .map_err(|_| CliError::Config(format!("bad im '{im}'")))?,
                ))
            })
            .collect::<Result<_, CliError>>()?
    } else {
        let len = cfg
            .window_len
            .ok_or_else(|| CliError::Config("weyl-check needs --input or --window-len".into()))?;
        let seed = cfg.seed.unwrap_or(1) as f64;
        // deterministic quadratic phase window
        (0..len)
            .map(|i| {
                let phase = seed * (i * i) as f64 / (2.0 * len as f64 + 1.0);
                Complex64::new(
                    (2.0 * std::f64::consts::PI * phase).cos(),
                    (2.0 * std::f64::consts::PI * phase).sin(),
                )
            })
            .collect()
    };
    let q = cfg
        .q_shift
        .ok_or_else(|| CliError::Config("missing --q-shift".into()))?;
    let (lhs, rhs) = weyl_shift_check(&z, q)?;
    let result = json!({
        "window_len": z.len(),
        "q": q,
        "lhs": lhs,
        "rhs": rhs,
        "holds": lhs <= rhs,
    });
    Ok(CmdOut::json(result, None))
}

fn cmd_hb_check(cfg: &RunConfig) -> Result<CmdOut, CliError> {
    let params = cfg.params()?;
    let comps = hb_decompose(params.x)?;
    let ctx = HbContext::new(params.x)?;
    let freqs = match &cfg.freqs {
        Some(spec) => parse_f64_list(spec)?,
        None => vec![0.0, 1e-4, 1e-3],
    };
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for &x in &freqs {
        let rec = recombine(&comps, &ctx, x, params.c);
        let direct = eval_u_lambda(&params, x)?;
        let rel = (rec - direct).norm() / direct.norm().max(1.0);
        checks.push(json!({
            "x": x,
            "recombined": {"re": rec.re, "im": rec.im},
            "direct": {"re": direct.re, "im": direct.im},
            "rel_dev": rel,
        }));
        rows.push(vec![
            fmt_f64(x),
            fmt_f64(rec.re),
            fmt_f64(rec.im),
            fmt_f64(rel),
        ]);
    }
    let result = json!({
        "x_scale": params.x,
        "component_count": comps.len(),
        "mobius_cutoff": ctx.z_cutoff,
        "checks": checks,
    });
    Ok(CmdOut::json(result, Some(("x,re,im,rel_dev".into(), rows))))
}

fn cmd_classify(cfg: &RunConfig) -> Result<CmdOut, CliError> {
    let params = cfg.params()?;
    let comps = hb_decompose(params.x)?;
    let mut rows = Vec::new();
    let mut items = Vec::new();
    let mut case_counts = [0u64; 3];
    for comp in &comps {
        let cls = classify_component(comp, &params)?;
        let case = format!("{:?}", cls.case);
        case_counts[match cls.case {
            dioph_core::bilinear::CaseKind::TypeICase1 => 0,
            dioph_core::bilinear::CaseKind::TypeIICase2 => 1,
            dioph_core::bilinear::CaseKind::TypeIICase3 => 2,
        }] += 1;
        rows.push(vec![
            format!("{:?}", comp.blocks),
            case.clone(),
            fmt_f64(cls.m),
            fmt_f64(cls.n),
        ]);
        items.push(json!({
            "j": comp.j,
            "blocks": comp.blocks,
            "roles": comp.roles,
            "case": case,
            "m": cls.m,
            "n": cls.n,
        }));
    }
    let result = json!({
        "x_scale": params.x,
        "delta": params.delta,
        "component_count": comps.len(),
        "case_counts": {"type_i_case1": case_counts[0], "type_ii_case2": case_counts[1], "type_ii_case3": case_counts[2]},
        "components": items,
    });
    Ok(CmdOut::json(result, Some(("blocks,case,m,n".into(), rows))))
}

fn cmd_minor_arc(cfg: &RunConfig) -> Result<CmdOut, CliError> {
    let params = cfg.params()?;
    let table = build_table(params.x / 2.0, params.x, params.c)?;
    let freqs = match &cfg.freqs {
        Some(spec) => parse_f64_list(spec)?,
        None => parse_grid(&format!("{}:{}:50:log", params.tau, params.k_cut))?,
    };
    let splits = match &cfg.splits {
        Some(spec) => parse_splits(spec)?,
        None => Vec::new(),
    };
    let kappa = match &cfg.kappa {
        Some(k) => parse_rational(k)?
            .to_f64()
            .ok_or_else(|| CliError::Config("kappa out of f64 range".into()))?,
        None => 1.0 / 11.0,
    };
    let lambda = match &cfg.lambda {
        Some(l) => parse_rational(l)?
            .to_f64()
            .ok_or_else(|| CliError::Config("lambda out of f64 range".into()))?,
        None => 0.75,
    };
    let rep = bound_ratio_report(&params, &table, &freqs, &splits, kappa, lambda)?;
    let rows: Vec<Vec<String>> = rep
        .per_x
        .iter()
        .map(|&(x, s, ratio)| vec![fmt_f64(x), fmt_f64(s), fmt_f64(ratio)])
        .collect();
    Ok(CmdOut::json(
        serde_json::to_value(&rep).map_err(|e| CliError::Config(e.to_string()))?,
        Some(("x,abs_s,ratio".into(), rows)),
    ))
}

fn search_table(cfg: &RunConfig) -> Result<(dioph_core::PrimeTable, SearchWindow), CliError> {
    match cfg.window.as_deref().unwrap_or("paper") {
        "paper" => {
            let params = cfg.params()?;
            Ok((
                build_table(params.x / 2.0, params.x, params.c)?,
                SearchWindow::PaperWindow,
            ))
        }
        "full" => {
            let bound = cfg.require_f64("bound", cfg.bound)?;
            let c = cfg.require_f64("c", cfg.c)?;
            Ok((build_table(1.0, bound, c)?, SearchWindow::FullRange))
        }
        other => Err(CliError::Config(format!(
            "window must be paper or full, got '{other}'"
        ))),
    }
}

fn reps_to_rows(reps: &[dioph_core::solver::Representation]) -> Vec<Vec<String>> {
    reps.iter()
        .map(|r| {
            let mut row = vec![r
                .primes
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(" ")];
            row.push(fmt_f64(r.value));
            row.push(fmt_f64(r.deviation));
            row
        })
        .collect()
}

fn cmd_search3(cfg: &RunConfig) -> Result<CmdOut, CliError> {
    let (table, window) = search_table(cfg)?;
    let r = cfg.require_f64("r-target", cfg.r_target)?;
    let eps = match cfg.eps {
        Some(e) => e,
        None => cfg.params()?.eps,
    };
    let reps = search_three(&table, r, eps);
    let count = reps.len();
    let weighted = weighted_count(&table, r, eps, 3)?;
    let result = json!({
        "window": window,
        "r_target": r,
        "eps": eps,
        "table_primes": table.len(),
        "count": count,
        "weighted_count": weighted,
        "representations": reps,
    });
    Ok(CmdOut::json(
        result,
        Some(("primes,value,deviation".into(), reps_to_rows(&reps))),
    ))
}

fn cmd_search6(cfg: &RunConfig) -> Result<CmdOut, CliError> {
    let params = cfg.params()?;
    let table = build_table(params.x / 2.0, params.x, params.c)?;
    let eps = cfg.eps.unwrap_or(params.eps);
    let reps = search_six(&table, params.n_target, eps, cfg.all)?;
    let result = json!({
        "window": SearchWindow::PaperWindow,
        "n_target": params.n_target,
        "eps": eps,
        "table_primes": table.len(),
        "all": cfg.all,
        "count": reps.len(),
        "representations": reps,
    });
    Ok(CmdOut::json(
        result,
        Some(("primes,value,deviation".into(), reps_to_rows(&reps))),
    ))
}

fn cmd_scan(cfg: &RunConfig) -> Result<CmdOut, CliError> {
    let params = cfg.params()?;
    let samples = cfg.samples.unwrap_or(200);
    let seed = cfg.seed.unwrap_or(1);
    let rep = scan_exceptional(&params, samples, seed)?;
    let rows: Vec<Vec<String>> = rep
        .samples
        .iter()
        .map(|s| vec![fmt_f64(s.r), (s.found as u8).to_string()])
        .collect();
    Ok(CmdOut::json(
        serde_json::to_value(&rep).map_err(|e| CliError::Config(e.to_string()))?,
        Some(("r,found".into(), rows)),
    ))
}

fn cmd_variance(cfg: &RunConfig) -> Result<CmdOut, CliError> {
    let params = cfg.params()?;
    let samples = cfg.samples.unwrap_or(20);
    let seed = cfg.seed.unwrap_or(1);
    let kernel = SmoothingKernel::for_params(&params)?;
    let band = PhiBand::build(&kernel, 2048);
    let rep = variance_probe(&params, &band, samples, seed)?;
    let rows: Vec<Vec<String>> = rep
        .samples
        .iter()
        .map(|s| {
            vec![
                fmt_f64(s.r),
                fmt_f64(s.b1),
                fmt_f64(s.main_term),
                fmt_f64(s.main_term_se),
            ]
        })
        .collect();
    Ok(CmdOut::json(
        serde_json::to_value(&rep).map_err(|e| CliError::Config(e.to_string()))?,
        Some(("r,b1,main_term,main_term_se".into(), rows)),
    ))
}
