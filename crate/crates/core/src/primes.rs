//! Prime tables over (lo, hi] with log weights and precomputed c-th powers,
//! plus the von Mangoldt function.

use crate::dd::Dd;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimeEntry {
    pub p: u64,
    pub logp: f64,
    /// p^c, computed in double-double precision and rounded once.
    pub pc: f64,
}

/// Sorted primes in (lo, hi] with weights, bound to one exponent `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimeTable {
    pub lo: f64,
    pub hi: f64,
    pub c: f64,
    pub entries: Vec<PrimeEntry>,
}

/// Deterministic Miller-Rabin, valid for all u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// All primes in [2, n] by a plain sieve.
pub fn sieve_primes(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Primes in (lo, hi] as integers.
pub fn primes_in(lo: f64, hi: f64) -> Vec<u64> {
    if hi < 2.0 || hi <= lo {
        return Vec::new();
    }
    let start = (lo.max(1.0).floor() as u64) + 1;
    let end = hi.floor() as u64;
    if end < start {
        return Vec::new();
    }
    // Segmented sieve for large spans, trial testing for short ones.
    if end - start > 4096 {
        let base = sieve_primes((end as f64).sqrt().ceil() as u64 + 1);
        let len = (end - start + 1) as usize;
        let mut composite = vec![false; len];
        if start == 1 {
            composite[0] = true;
        }
        for &p in &base {
            let mut j = start.div_ceil(p).max(2) * p;
            while j <= end {
                composite[(j - start) as usize] = true;
                j += p;
            }
        }
        (0..len)
            .filter(|&i| !composite[i])
            .map(|i| start + i as u64)
            .filter(|&n| n >= 2)
            .collect()
    } else {
        (start..=end).filter(|&n| is_prime(n)).collect()
    }
}

/// Build the weighted table of primes in (lo, hi] for exponent `c`.
///
/// An empty interval yields an empty table.
pub fn build_table(lo: f64, hi: f64, c: f64) -> Result<PrimeTable> {
    // lo = 1 admits full-range tables containing p = 2; the window is
    // half-open at the bottom, so lo = 2 excludes 2 itself.
    if !(lo >= 1.0) || !(lo < hi) {
        return Err(Error::precondition(format!(
            "need 1 <= lo < hi, got ({lo}, {hi}]"
        )));
    }
    if hi > 1e9 {
        return Err(Error::cap(format!(
            "table bound {hi:.3e} above desk-scale cap 1e9"
        )));
    }
    let entries = primes_in(lo, hi)
        .into_iter()
        .map(|p| PrimeEntry {
            p,
            logp: (p as f64).ln(),
            pc: Dd::pow_u64(p, c).to_f64(),
        })
        .collect();
    Ok(PrimeTable { lo, hi, c, entries })
}

impl PrimeTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total log weight, i.e. the chebyshev theta difference over the window.
    pub fn total_log_weight(&self) -> f64 {
        let mut k = crate::dd::Kahan::new();
        for e in &self.entries {
            k.add(e.logp);
        }
        k.total()
    }

    pub fn pc_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.pc)
    }

    /// CSV with columns p, logp, pc (17 significant digits).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,logp,pc\n");
        for e in &self.entries {
            out.push_str(&format!("{},{:.16e},{:.16e}\n", e.p, e.logp, e.pc));
        }
        out
    }
}

/// Von Mangoldt function: log p for prime powers p^m, 0 otherwise.
pub fn mangoldt(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    // Find the smallest prime factor, then check the rest is a power of it.
    let mut p = 0u64;
    if n.is_multiple_of(2) {
        p = 2;
    } else {
        let mut d = 3u64;
        while d * d <= n {
            if n.is_multiple_of(d) {
                p = d;
                break;
            }
            d += 2;
        }
        if p == 0 {
            return (n as f64).ln(); // n itself is prime
        }
    }
    let mut m = n;
    while m.is_multiple_of(p) {
        m /= p;
    }
    if m == 1 {
        (p as f64).ln()
    } else {
        0.0
    }
}
