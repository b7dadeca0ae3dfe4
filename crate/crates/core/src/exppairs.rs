//! Exact-rational exponent-pair calculus: the A and B processes, word
//! application and exhaustive word search, the term-balancing minimum, and
//! the shifted-autocorrelation inequality check.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// An exponent pair (kappa, lambda) with 0 <= kappa <= 1/2 <= lambda <= 1,
/// kept as exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentPair {
    kappa: BigRational,
    lambda: BigRational,
}

impl fmt::Display for ExponentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kappa, self.lambda)
    }
}

impl ExponentPair {
    pub fn new(kappa: BigRational, lambda: BigRational) -> Result<Self> {
        let half = ratio(1, 2);
        if kappa < BigRational::zero() || kappa > half {
            return Err(Error::precondition(format!(
                "kappa = {kappa} outside [0, 1/2]"
            )));
        }
        if lambda < half || lambda > BigRational::one() {
            return Err(Error::precondition(format!(
                "lambda = {lambda} outside [1/2, 1]"
            )));
        }
        Ok(ExponentPair { kappa, lambda })
    }

    pub fn from_ints(kn: i64, kd: i64, ln: i64, ld: i64) -> Result<Self> {
        ExponentPair::new(ratio(kn, kd), ratio(ln, ld))
    }

    /// The trivial pair (0, 1).
    pub fn trivial() -> Self {
        ExponentPair {
            kappa: BigRational::zero(),
            lambda: BigRational::one(),
        }
    }

    pub fn kappa(&self) -> &BigRational {
        &self.kappa
    }

    pub fn lambda(&self) -> &BigRational {
        &self.lambda
    }

    pub fn as_f64(&self) -> (f64, f64) {
        use num::ToPrimitive;
        (
            self.kappa.to_f64().unwrap_or(f64::NAN),
            self.lambda.to_f64().unwrap_or(f64::NAN),
        )
    }
}

/// Parse a rational "p/q" or integer "p" string.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt> {
        t.parse::<BigInt>()
            .map_err(|_| Error::precondition(format!("bad integer '{t}'")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let den = parse_int(d)?;
            if den.is_zero() {
                return Err(Error::precondition("zero denominator"));
            }
            Ok(BigRational::new(parse_int(n)?, den))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

/// The A process: (kappa, lambda) -> (kappa/(2kappa+2), (kappa+lambda+1)/(2kappa+2)).
/// Total on valid pairs.
pub fn process_a(p: &ExponentPair) -> ExponentPair {
    let two = ratio(2, 1);
    let denom = &two * &p.kappa + &two;
    let kappa = &p.kappa / &denom;
    let lambda = (&p.kappa + &p.lambda + BigRational::one()) / &denom;
    ExponentPair::new(kappa, lambda).expect("A preserves the pair invariants")
}

/// The B process: (kappa, lambda) -> (lambda - 1/2, kappa + 1/2).
/// An involution; rejects inputs whose image leaves the valid region.
pub fn process_b(p: &ExponentPair) -> Result<ExponentPair> {
    let half = ratio(1, 2);
    ExponentPair::new(&p.lambda - &half, &p.kappa + &half)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    A,
    B,
}

/// Expand shorthand like "ABABA2B" (digits repeat the preceding letter)
/// into the letter sequence.
fn parse_word(word: &str) -> Result<Vec<Step>> {
    let mut steps = Vec::new();
    let chars: Vec<char> = word.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let step = match chars[i] {
            'A' | 'a' => Step::A,
            'B' | 'b' => Step::B,
            c => return Err(Error::precondition(format!("unexpected '{c}' in word"))),
        };
        i += 1;
        let mut digits = String::new();
        while i < chars.len() && chars[i].is_ascii_digit() {
            digits.push(chars[i]);
            i += 1;
        }
        let rep: usize = if digits.is_empty() {
            1
        } else {
            let r = digits
                .parse()
                .map_err(|_| Error::precondition(format!("bad repeat count '{digits}'")))?;
            if r == 0 {
                return Err(Error::precondition("repeat count must be >= 1"));
            }
            r
        };
        for _ in 0..rep {
            steps.push(step);
        }
    }
    Ok(steps)
}

/// Apply a word over {A, B} to a seed pair, rightmost letter first
/// (function-composition order), validating every intermediate pair.
pub fn apply_word(word: &str, seed: &ExponentPair) -> Result<ExponentPair> {
    let steps = parse_word(word)?;
    let mut current = seed.clone();
    for step in steps.iter().rev() {
        current = match step {
            Step::A => process_a(&current),
            Step::B => process_b(&current)?,
        };
    }
    Ok(current)
}

/// A linear-fractional objective
/// (c0 + ck*kappa + cl*lambda) / (d0 + dk*kappa + dl*lambda), exact.
#[derive(Debug, Clone)]
pub struct FractionalObjective {
    pub num: [BigRational; 3],
    pub den: [BigRational; 3],
}

impl FractionalObjective {
    /// A plain linear objective c0 + ck*kappa + cl*lambda.
    pub fn linear(c0: BigRational, ck: BigRational, cl: BigRational) -> Self {
        FractionalObjective {
            num: [c0, ck, cl],
            den: [BigRational::one(), BigRational::zero(), BigRational::zero()],
        }
    }

    /// The Type-I minor-arc exponent kappa*c + lambda - kappa + (1 + kappa - lambda)/3,
    /// as a linear objective in (kappa, lambda) for a rational c.
    pub fn type_i_exponent(c: &BigRational) -> Self {
        let third = ratio(1, 3);
        FractionalObjective::linear(third.clone(), c - ratio(2, 3), BigRational::one() - third)
    }

    pub fn eval(&self, p: &ExponentPair) -> Result<BigRational> {
        let lin = |coef: &[BigRational; 3]| -> BigRational {
            &coef[0] + &coef[1] * &p.kappa + &coef[2] * &p.lambda
        };
        let den = lin(&self.den);
        if den.is_zero() {
            return Err(Error::precondition(format!(
                "objective denominator vanishes at ({}, {})",
                p.kappa, p.lambda
            )));
        }
        Ok(lin(&self.num) / den)
    }
}

/// Exhaustive search over all words up to `max_word_len` applied to the
/// trivial seed (0, 1). Returns the minimizing pair, a witness word and the
/// exact objective value. Ties break toward shorter, then lexicographically
/// smaller words.
pub fn minimize_objective(
    objective: &FractionalObjective,
    max_word_len: usize,
) -> Result<(ExponentPair, String, BigRational)> {
    if max_word_len > 20 {
        return Err(Error::cap(format!(
            "word search length {max_word_len} exceeds cap 20"
        )));
    }
    let seed = ExponentPair::trivial();
    let seed_value = objective.eval(&seed)?;

    // Depth-first over the word tree; appending a process on the left of the
    // word applies it to the current composed value.
    fn dfs(
        current: &ExponentPair,
        word: &str,
        depth_left: usize,
        objective: &FractionalObjective,
        best: &mut (ExponentPair, String, BigRational),
    ) -> Result<()> {
        if depth_left == 0 {
            return Ok(());
        }
        for step in [Step::A, Step::B] {
            let next = match step {
                Step::A => Some(process_a(current)),
                Step::B => process_b(current).ok(),
            };
            let Some(next) = next else { continue };
            let next_word = format!(
                "{}{}",
                match step {
                    Step::A => 'A',
                    Step::B => 'B',
                },
                word
            );
            let value = objective.eval(&next)?;
            let better = value < best.2
                || (value == best.2
                    && (next_word.len() < best.1.len()
                        || (next_word.len() == best.1.len() && next_word < best.1)));
            if better {
                *best = (next.clone(), next_word.clone(), value);
            }
            dfs(&next, &next_word, depth_left - 1, objective, best)?;
        }
        Ok(())
    }

    let mut best = (seed.clone(), String::new(), seed_value);
    dfs(&seed, "", max_word_len, objective, &mut best)?;
    Ok(best)
}

/// A balancing problem: minimize L(H) = sum A_i H^{a_i} + sum B_j H^{-b_j}
/// over H in [h1, h2].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalanceProblem {
    pub rising: Vec<(f64, f64)>,
    pub falling: Vec<(f64, f64)>,
    pub h1: f64,
    pub h2: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BalanceResult {
    pub h: f64,
    pub value: f64,
    /// sum A_i h1^{a_i} + sum B_j h2^{-b_j} + sum_{i,j} (A_i^{b_j} B_j^{a_i})^{1/(a_i+b_j)}
    pub rhs: f64,
}

impl BalanceProblem {
    fn validate(&self) -> Result<()> {
        if self.rising.is_empty() && self.falling.is_empty() {
            return Err(Error::precondition(
                "balance problem needs at least one term",
            ));
        }
        for &(coef, expo) in self.rising.iter().chain(&self.falling) {
            if !(coef > 0.0 && expo > 0.0) {
                return Err(Error::precondition(
                    "balance coefficients and exponents must be positive",
                ));
            }
        }
        if !(self.h1 > 0.0 && self.h1 <= self.h2) {
            return Err(Error::precondition("need 0 < H1 <= H2"));
        }
        Ok(())
    }

    pub fn eval(&self, h: f64) -> f64 {
        let mut v = 0.0;
        for &(a, e) in &self.rising {
            v += a * h.powf(e);
        }
        for &(b, e) in &self.falling {
            v += b * h.powf(-e);
        }
        v
    }
}

/// Brute-force the balancing minimum over a 10^4-point log grid and compare
/// with the closed-form right-hand side.
pub fn gk_balance(prob: &BalanceProblem) -> Result<BalanceResult> {
    prob.validate()?;
    let n = 10_000usize;
    let (mut best_h, mut best_v) = (prob.h1, prob.eval(prob.h1));
    if prob.h2 > prob.h1 {
        let log_ratio = (prob.h2 / prob.h1).ln();
        for i in 1..n {
            let h = prob.h1 * (log_ratio * i as f64 / (n - 1) as f64).exp();
            let v = prob.eval(h);
            if v < best_v {
                best_v = v;
                best_h = h;
            }
        }
    }
    let mut rhs = 0.0;
    for &(a, e) in &prob.rising {
        rhs += a * prob.h1.powf(e);
    }
    for &(b, e) in &prob.falling {
        rhs += b * prob.h2.powf(-e);
    }
    for &(a, ae) in &prob.rising {
        for &(b, be) in &prob.falling {
            rhs += (a.powf(be) * b.powf(ae)).powf(1.0 / (ae + be));
        }
    }
    Ok(BalanceResult {
        h: best_h,
        value: best_v,
        rhs,
    })
}

/// Shifted-autocorrelation inequality: for z supported on the window
/// (N, 2N] (N = z.len()) and any Q >= 1,
///
///   |sum z_n|^2 <= (2 + N/Q) sum_{|q|<Q} (1 - |q|/Q) sum z_{n+q} conj(z_{n-q}),
///
/// the inner sum over n with both n+q and n-q in the window. Returns
/// (lhs, rhs); rhs is real by the q <-> -q symmetry.
pub fn weyl_shift_check(z: &[Complex64], q: u64) -> Result<(f64, f64)> {
    if z.is_empty() {
        return Err(Error::precondition("window must be non-empty"));
    }
    if q < 1 {
        return Err(Error::precondition("Q must be >= 1"));
    }
    let n = z.len();
    let lhs = z.iter().sum::<Complex64>().norm_sqr();
    let qf = q as f64;
    let term = |s: usize| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut i = s;
        while i + s < n {
            acc += z[i + s] * z[i - s].conj();
            i += 1;
        }
        acc
    };
    let mut rhs = term(0).re;
    for s in 1..q as usize {
        rhs += 2.0 * (1.0 - s as f64 / qf) * term(s).re;
    }
    rhs *= 2.0 + n as f64 / qf;
    Ok((lhs, rhs))
}
