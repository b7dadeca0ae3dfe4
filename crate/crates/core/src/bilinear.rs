//! Combinatorial decomposition of the von Mangoldt weight into bilinear
//! pieces, the Type I / Type II classification of the resulting dyadic
//! components, direct bilinear-sum evaluation, and minor-arc ratio reports.
//!
//! The identity used is the k = 3 expansion
//!
//!   Lambda = sum_{j=1}^{3} (-1)^(j-1) C(3,j) (mu_Z)^{*j} * log * 1^{*(j-1)},
//!
//! with the Mobius factors truncated at Z = (2X)^(1/3); it is exact for
//! every n <= Z^3 = 2X, so in particular on the window (X/2, X]. Components
//! are half-open dyadic boxes [B, 2B) per coordinate, the log factor in
//! position 1 and the Mobius factors in positions 4-6.

use crate::dd::{Dd, Kahan};
use crate::error::{Error, Result};
use crate::expsum::e_of;
use crate::params::ProblemParams;
use crate::primes::PrimeTable;
use num::complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    /// Weight log n (the differentiated factor); vanishes on n = 1.
    Log,
    /// Weight 1.
    Plain,
    /// Weight mu(n), support truncated at Z.
    Mobius,
    /// Position unused for this j; the factor is pinned to 1.
    Unit,
}

/// One dyadic component of the decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumComponent {
    /// Which term of the identity (1..=3).
    pub j: u32,
    /// (-1)^(j-1).
    pub sign: i8,
    /// C(3, j).
    pub multiplicity: u32,
    /// Dyadic bases per position; unused positions hold 1.
    pub blocks: [u64; 6],
    pub roles: [Role; 6],
}

impl SumComponent {
    /// Product of the block bases; lies in (X/2^7, X] for components that
    /// can meet the window constraint.
    pub fn base_product(&self) -> u64 {
        self.blocks.iter().product()
    }
}

fn roles_for_j(j: u32) -> [Role; 6] {
    let mut roles = [Role::Unit; 6];
    roles[0] = Role::Log;
    for r in roles.iter_mut().take(j as usize).skip(1) {
        *r = Role::Plain;
    }
    for r in roles.iter_mut().skip(3).take(j as usize) {
        *r = Role::Mobius;
    }
    roles
}

/// Shared evaluation context: the window scale, the Mobius cutoff and a
/// sieved mu table up to the cutoff.
#[derive(Debug, Clone)]
pub struct HbContext {
    pub x_scale: f64,
    pub z_cutoff: u64,
    mobius: Vec<i8>,
}

impl HbContext {
    pub fn new(x_scale: f64) -> Result<Self> {
        if !(x_scale >= 16.0) {
            return Err(Error::precondition(format!(
                "decomposition needs X >= 16, got {x_scale}"
            )));
        }
        if x_scale > crate::expsum::DESK_SCALE_X_CAP {
            return Err(Error::cap(format!(
                "X = {x_scale:.3e} above the decomposition desk-scale cap"
            )));
        }
        let z_cutoff = (2.0 * x_scale).cbrt().floor() as u64;
        Ok(HbContext {
            x_scale,
            z_cutoff,
            mobius: mobius_sieve(z_cutoff),
        })
    }

    pub fn mu(&self, n: u64) -> i8 {
        self.mobius[n as usize]
    }
}

/// mu(0..=n) by a smallest-prime-factor sieve.
fn mobius_sieve(n: u64) -> Vec<i8> {
    let n = n as usize;
    let mut mu = vec![1i8; n + 1];
    if n >= 1 {
        let mut primes = Vec::new();
        let mut spf = vec![0usize; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i;
                primes.push(i);
                mu[i] = -1;
            }
            for &p in &primes {
                if p > spf[i] || i * p > n {
                    break;
                }
                spf[i * p] = p;
                mu[i * p] = if p == spf[i] { 0 } else { -mu[i] };
            }
        }
    }
    if !mu.is_empty() {
        mu[0] = 0;
    }
    mu
}

/// All components of the k = 3 decomposition at window scale X.
///
/// Components whose log-position block is {1} are omitted: their weight is
/// identically zero. The list is complete in the sense that the signed,
/// multiplicity-weighted component sums recombine to U(x) exactly.
pub fn hb_decompose(x_scale: f64) -> Result<Vec<SumComponent>> {
    let ctx = HbContext::new(x_scale)?;
    let mut out = Vec::new();
    for j in 1..=3u32 {
        let roles = roles_for_j(j);
        let sign = if j % 2 == 1 { 1i8 } else { -1 };
        let multiplicity = match j {
            1 => 3,
            2 => 3,
            _ => 1,
        };
        let mut blocks = [1u64; 6];
        gen_blocks(&ctx, &roles, 0, 1, &mut blocks, &mut |blocks: &[u64; 6]| {
            out.push(SumComponent {
                j,
                sign,
                multiplicity,
                blocks: *blocks,
                roles,
            });
        });
    }
    Ok(out)
}

fn gen_blocks(
    ctx: &HbContext,
    roles: &[Role; 6],
    pos: usize,
    product: u64,
    blocks: &mut [u64; 6],
    emit: &mut impl FnMut(&[u64; 6]),
) {
    let x = ctx.x_scale;
    if pos == 6 {
        // a box can only meet X/2 < prod(n_i) <= X if the doubled base
        // product clears X/2
        if (product as f64) * 64.0 > x / 2.0 {
            emit(blocks);
        }
        return;
    }
    match roles[pos] {
        Role::Unit => {
            blocks[pos] = 1;
            gen_blocks(ctx, roles, pos + 1, product, blocks, emit);
        }
        role => {
            // the log factor vanishes on {1}
            let mut base = if role == Role::Log { 2u64 } else { 1 };
            let cap = if role == Role::Mobius {
                ctx.z_cutoff
            } else {
                x.floor() as u64
            };
            while base <= cap && (product as f64) * (base as f64) <= x {
                blocks[pos] = base;
                gen_blocks(ctx, roles, pos + 1, product * base, blocks, emit);
                base *= 2;
            }
            blocks[pos] = 1;
        }
    }
}

/// The signed, weighted sum of one component at frequency x:
/// sum over box tuples with X/2 < n1...n6 <= X and Mobius factors <= Z of
/// log n1 * mu(n4) mu(n5) mu(n6) * e(x (n1...n6)^c).
pub fn component_sum(comp: &SumComponent, ctx: &HbContext, x: f64, c: f64) -> Complex64 {
    let used: Vec<usize> = (0..6).filter(|&i| comp.roles[i] != Role::Unit).collect();
    let mut eval = ComponentEval {
        comp,
        ctx,
        used: &used,
        window_lo: ctx.x_scale / 2.0,
        window_hi: ctx.x_scale.floor() as u64,
        x,
        c,
        re: Kahan::new(),
        im: Kahan::new(),
    };
    eval.descend(0, 1, 1.0);
    Complex64::new(eval.re.total(), eval.im.total())
}

/// Depth-first enumeration state for one component: walks the used
/// positions with running product pruning.
struct ComponentEval<'a> {
    comp: &'a SumComponent,
    ctx: &'a HbContext,
    used: &'a [usize],
    window_lo: f64,
    window_hi: u64,
    x: f64,
    c: f64,
    re: Kahan,
    im: Kahan,
}

impl ComponentEval<'_> {
    fn descend(&mut self, depth: usize, product: u64, weight: f64) {
        if weight == 0.0 {
            return;
        }
        if depth == self.used.len() {
            if (product as f64) > self.window_lo {
                let z = e_of(Dd::pow_u64(product, self.c).mul_f64(self.x));
                self.re.add(weight * z.re);
                self.im.add(weight * z.im);
            }
            return;
        }
        let pos = self.used[depth];
        let base = self.comp.blocks[pos];
        let mut hi = 2 * base - 1;
        if self.comp.roles[pos] == Role::Mobius {
            hi = hi.min(self.ctx.z_cutoff);
        }
        hi = hi.min(self.window_hi / product);
        let mut lo = base;
        if depth + 1 == self.used.len() {
            // final factor must push the product above X/2
            let need = (self.window_lo / product as f64).floor() as u64 + 1;
            lo = lo.max(need);
        }
        for n in lo..=hi {
            let w = match self.comp.roles[pos] {
                Role::Log => weight * (n as f64).ln(),
                Role::Mobius => weight * self.ctx.mu(n) as f64,
                _ => weight,
            };
            self.descend(depth + 1, product * n, w);
        }
    }
}

/// Recombine the full decomposition at frequency x; equals U(x) up to
/// floating-point rounding.
pub fn recombine(components: &[SumComponent], ctx: &HbContext, x: f64, c: f64) -> Complex64 {
    let mut re = Kahan::new();
    let mut im = Kahan::new();
    for comp in components {
        let v = component_sum(comp, ctx, x, c);
        let w = comp.sign as f64 * comp.multiplicity as f64;
        re.add(w * v.re);
        im.add(w * v.im);
    }
    Complex64::new(re.total(), im.total())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseKind {
    /// A single oversized block: Type I with M that block.
    TypeICase1,
    /// A mid-range block: Type II around it.
    TypeIICase2,
    /// All blocks small: Type II after grouping the largest blocks.
    TypeIICase3,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BlockClassification {
    pub case: CaseKind,
    pub m: f64,
    pub n: f64,
}

/// Deterministic trichotomy over a component's block sizes, for c > 2.
///
/// With delta = c/2 - 1 + eta and thresholds X^(72 delta / 7) and
/// X^(1 - 72 delta / 7): case 1 fires on any block above the upper
/// threshold (Type I); case 2 on any block between the thresholds (Type II,
/// sides ordered so M <= sqrt(X)); case 3 groups the largest blocks until
/// their product first clears the lower threshold (then necessarily stays
/// below X^(144 delta/7), inside the case-2 range). Exhaustive whenever
/// delta < 7/216, which the supported c-range guarantees.
pub fn classify_component(
    comp: &SumComponent,
    params: &ProblemParams,
) -> Result<BlockClassification> {
    let delta = params
        .delta
        .ok_or_else(|| Error::precondition("classification needs c > 2 (delta undefined)"))?;
    if !(delta < 7.0 / 216.0) {
        return Err(Error::precondition(format!(
            "delta = {delta} >= 7/216; the trichotomy is not exhaustive"
        )));
    }
    let x = params.x;
    let alpha = 72.0 * delta / 7.0;
    let t_mid = Dd::pow_f64(x, alpha).to_f64();
    let t_hi = Dd::pow_f64(x, 1.0 - alpha).to_f64();
    let sqrt_x = x.sqrt();
    let bases: Vec<f64> = comp.blocks.iter().map(|&b| b as f64).collect();
    let total: f64 = bases.iter().product();

    // case 1: an oversized block (the log/plain positions; Mobius blocks
    // sit below (2X)^(1/3) < X^(1-72delta/7) automatically)
    for &nj in &bases {
        if nj >= t_hi {
            return Ok(BlockClassification {
                case: CaseKind::TypeICase1,
                m: nj,
                n: total / nj,
            });
        }
    }
    // case 2: a mid-range block
    for &nj in &bases {
        if nj >= t_mid && nj <= t_hi {
            let (m, n) = orient(nj, total / nj, sqrt_x);
            return Ok(BlockClassification {
                case: CaseKind::TypeIICase2,
                m,
                n,
            });
        }
    }
    // case 3: group the largest blocks until the product clears t_mid
    let mut sorted = bases.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut grouped = 1.0;
    for &nj in &sorted {
        grouped *= nj;
        if grouped >= t_mid {
            break;
        }
    }
    debug_assert!(grouped < t_hi);
    let (m, n) = orient(grouped, total / grouped, sqrt_x);
    Ok(BlockClassification {
        case: CaseKind::TypeIICase3,
        m,
        n,
    })
}

/// Order a bilinear split so the reported M side is at most sqrt(X).
fn orient(m_star: f64, n_star: f64, sqrt_x: f64) -> (f64, f64) {
    if m_star <= sqrt_x {
        (m_star, n_star)
    } else {
        (n_star, m_star)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoefKind {
    Unit,
    Log,
    Mobius,
}

/// A concrete bilinear range for direct evaluation: inclusive integer
/// ranges for both variables and a coefficient kind per side.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BilinearSplit {
    pub m_lo: u64,
    pub m_hi: u64,
    pub n_lo: u64,
    pub n_hi: u64,
    pub a: CoefKind,
    pub b: CoefKind,
}

/// Direct double sum sum_m sum_n a_m b_n e(x (m n)^c).
pub fn eval_bilinear(split: &BilinearSplit, x: f64, c: f64) -> Result<Complex64> {
    if split.m_lo < 1 || split.n_lo < 1 || split.m_hi < split.m_lo || split.n_hi < split.n_lo {
        return Err(Error::precondition(
            "bilinear ranges must be non-empty and start at 1",
        ));
    }
    let m_count = split.m_hi - split.m_lo + 1;
    let n_count = split.n_hi - split.n_lo + 1;
    if m_count.saturating_mul(n_count) > 20_000_000 {
        return Err(Error::cap(format!(
            "bilinear evaluation of {m_count} x {n_count} terms exceeds the cap"
        )));
    }
    let mu_cap = match (split.a, split.b) {
        (CoefKind::Mobius, _) | (_, CoefKind::Mobius) => split.m_hi.max(split.n_hi),
        _ => 0,
    };
    let mu = mobius_sieve(mu_cap);
    let coef = |kind: CoefKind, v: u64| -> f64 {
        match kind {
            CoefKind::Unit => 1.0,
            CoefKind::Log => (v as f64).ln(),
            CoefKind::Mobius => mu[v as usize] as f64,
        }
    };
    let mut re = Kahan::new();
    let mut im = Kahan::new();
    for m in split.m_lo..=split.m_hi {
        let am = coef(split.a, m);
        if am == 0.0 {
            continue;
        }
        for n in split.n_lo..=split.n_hi {
            let bn = coef(split.b, n);
            if bn == 0.0 {
                continue;
            }
            let z = e_of(Dd::pow_u64(m * n, c).mul_f64(x));
            re.add(am * bn * z.re);
            im.add(am * bn * z.im);
        }
    }
    Ok(Complex64::new(re.total(), im.total()))
}

/// A configured bilinear split for the minor-arc bookkeeping report.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSpec {
    pub m: f64,
    pub n: f64,
    pub f0: f64,
}

/// The four double-large-sieve terms and the shift-length threshold Q0
/// for one split, evaluated at exponent pair (kappa, lambda).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitTerms {
    pub m: f64,
    pub n: f64,
    pub f0: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    pub q0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinorArcReport {
    /// (x, |S(x)|, |S(x)| / bound shape) per sample.
    pub per_x: Vec<(f64, f64, f64)>,
    pub max_ratio: f64,
    /// Human-readable description of the bound shape used.
    pub bound_shape: String,
    pub split_terms: Vec<SplitTerms>,
}

/// Evaluate |S| on minor-arc samples against the applicable bound shape
/// (reported, never asserted: the implied constants are unknown), plus the
/// bookkeeping quantities for any configured splits.
pub fn bound_ratio_report(
    params: &ProblemParams,
    table: &PrimeTable,
    xs: &[f64],
    splits: &[SplitSpec],
    kappa: f64,
    lambda: f64,
) -> Result<MinorArcReport> {
    if xs
        .iter()
        .any(|x| x.abs() < params.tau || x.abs() > params.k_cut)
    {
        return Err(Error::precondition(
            "minor-arc report needs tau <= |x| <= K for every sample",
        ));
    }
    let x_scale = params.x;
    let (shape, bound): (String, f64) = if params.c < 2.0 {
        (
            "X^((6+c)/8) + X^(14/15)".to_string(),
            Dd::pow_f64(x_scale, (6.0 + params.c) / 8.0).to_f64()
                + Dd::pow_f64(x_scale, 14.0 / 15.0).to_f64(),
        )
    } else {
        let delta = params
            .delta
            .ok_or_else(|| Error::precondition("c > 2 report needs delta"))?;
        (
            "X^(1-delta)".to_string(),
            Dd::pow_f64(x_scale, 1.0 - delta).to_f64(),
        )
    };
    let mut per_x = Vec::with_capacity(xs.len());
    let mut max_ratio = 0.0f64;
    for &x in xs {
        let s = crate::expsum::eval_s(table, x).norm();
        let ratio = s / bound;
        per_x.push((x, s, ratio));
        max_ratio = max_ratio.max(ratio);
    }
    let split_terms = splits
        .iter()
        .map(|sp| {
            let (m, n, f0) = (sp.m, sp.n, sp.f0);
            SplitTerms {
                m,
                n,
                f0,
                i1: m.powf(7.0 / 8.0) * n.powf(13.0 / 16.0) * f0.powf(1.0 / 16.0),
                i2: m.powf(93.0 / 104.0) * n.powf(23.0 / 26.0) * f0.powf(1.0 / 26.0),
                i3: m.powf(467.0 / 512.0) * n.powf(65.0 / 64.0) * f0.powf(-1.0 / 128.0),
                i4: m.powf(65.0 / 72.0) * n,
                q0: f0.powf(-kappa / (1.0 + kappa))
                    * m.powf(kappa / (1.0 + kappa))
                    * n.powf((1.0 + kappa - lambda) / (1.0 + kappa)),
            }
        })
        .collect();
    Ok(MinorArcReport {
        per_x,
        max_ratio,
        bound_shape: shape,
        split_terms,
    })
}
