//! Compactly supported smoothing weight phi and its closed-form Fourier
//! transform Phi.
//!
//! The construction is the indicator of [-a, a] convolved with the k-fold
//! self-convolution of the unit-mass box on [-b/k, b/k]. That gives
//!
//!   Phi(x) = sin(2 pi a x)/(pi x) * (sin(2 pi b x / k) / (2 pi b x / k))^k,
//!
//! which satisfies |Phi(x)| <= min(2a, 1/(pi|x|), (1/(pi|x|)) * (k/(2 pi |x| b))^k)
//! pointwise, and phi is exactly 1 on [-(a-b), a-b] and exactly 0 outside
//! (-(a+b), a+b).
//!
//! The weight itself has no convenient closed form for large k, so on the
//! transition bands it is recovered by numeric Fourier inversion of Phi with
//! the truncation point chosen from the envelope above.

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingKernel {
    pub a: f64,
    pub b: f64,
    pub k: u32,
}

/// 16-point Gauss-Legendre nodes/weights on [-1, 1].
pub(crate) const GL16: [(f64, f64); 16] = [
    (-0.9894009349916499, 0.027152459411754094),
    (-0.9445750230732326, 0.06225352393864789),
    (-0.8656312023878318, 0.09515851168249278),
    (-0.755404408355003, 0.12462897125553387),
    (-0.6178762444026438, 0.14959598881657673),
    (-0.45801677765722737, 0.16915651939500254),
    (-0.2816035507792589, 0.18260341504492358),
    (-0.09501250983763744, 0.1894506104550685),
    (0.09501250983763744, 0.1894506104550685),
    (0.2816035507792589, 0.18260341504492358),
    (0.45801677765722737, 0.16915651939500254),
    (0.6178762444026438, 0.14959598881657673),
    (0.755404408355003, 0.12462897125553387),
    (0.8656312023878318, 0.09515851168249278),
    (0.9445750230732326, 0.06225352393864789),
    (0.9894009349916499, 0.027152459411754094),
];

#[inline]
pub(crate) fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

impl SmoothingKernel {
    pub fn new(a: f64, b: f64, k: u32) -> Result<Self> {
        if !(b > 0.0 && b < a / 4.0) {
            return Err(Error::precondition(format!(
                "kernel needs 0 < b < a/4, got a={a}, b={b}"
            )));
        }
        if k < 1 {
            return Err(Error::precondition("kernel order k must be >= 1"));
        }
        Ok(SmoothingKernel { a, b, k })
    }

    /// Default instantiation: a = 9 eps / 10, b = eps / 10, k = ceil(log X).
    pub fn for_params(params: &ProblemParams) -> Result<Self> {
        SmoothingKernel::new(
            0.9 * params.eps,
            0.1 * params.eps,
            params.l.ceil().max(1.0) as u32,
        )
    }

    /// Edge of the flat plateau, a - b.
    pub fn plateau(&self) -> f64 {
        self.a - self.b
    }

    /// Edge of the support, a + b.
    pub fn support(&self) -> f64 {
        self.a + self.b
    }

    /// The Fourier transform Phi(x); real, even, total on the reals.
    pub fn phi_hat(&self, x: f64) -> f64 {
        let x = x.abs();
        if x == 0.0 {
            return 2.0 * self.a;
        }
        let u = 2.0 * PI * self.a * x;
        let v = 2.0 * PI * self.b * x / self.k as f64;
        2.0 * self.a * sinc(u) * sinc(v).powi(self.k as i32)
    }

    /// Pointwise envelope from the construction:
    /// min(2a, 1/(pi|x|), (1/(pi|x|)) (k/(2 pi |x| b))^k).
    pub fn envelope(&self, x: f64) -> f64 {
        let x = x.abs();
        if x == 0.0 {
            return 2.0 * self.a;
        }
        let b1 = 2.0 * self.a;
        let b2 = 1.0 / (PI * x);
        let b3 = b2 * (self.k as f64 / (2.0 * PI * x * self.b)).powi(self.k as i32);
        b1.min(b2).min(b3)
    }

    /// |Phi(x)| / envelope(x), computed in a cancellation-free form.
    ///
    /// Each of the three candidate ratios is a product of |sin z| or |sinc z|
    /// factors, so no overflow or 0/0 can occur even when the naive envelope
    /// under- or overflows.
    pub fn envelope_ratio(&self, x: f64) -> f64 {
        let x = x.abs();
        if x == 0.0 {
            return 1.0; // |Phi(0)| = 2a = envelope
        }
        let u = 2.0 * PI * self.a * x;
        let v = 2.0 * PI * self.b * x / self.k as f64;
        let k = self.k as i32;
        let r1 = sinc(u).abs() * sinc(v).abs().powi(k);
        let r2 = u.sin().abs() * sinc(v).abs().powi(k);
        let r3 = u.sin().abs() * v.sin().abs().powi(k);
        r1.max(r2).max(r3)
    }

    /// Check |Phi| <= envelope over a grid. Passes iff the worst ratio is
    /// at most 1 + 1e-12.
    pub fn verify_bound(&self, grid: &[f64]) -> Result<BoundReport> {
        if grid.is_empty() {
            return Err(Error::precondition("verify_bound needs a non-empty grid"));
        }
        let mut max_ratio = f64::MIN;
        let mut argmax = grid[0];
        for &x in grid {
            let r = self.envelope_ratio(x);
            if r > max_ratio {
                max_ratio = r;
                argmax = x;
            }
        }
        Ok(BoundReport {
            max_ratio,
            argmax,
            pass: max_ratio <= 1.0 + 1e-12,
        })
    }

    /// The smoothing weight phi(y): exactly 1 on the plateau, exactly 0
    /// outside the support, Fourier inversion of Phi on the bands.
    pub fn phi(&self, y: f64) -> f64 {
        self.phi_with_error(y).0
    }

    /// phi(y) together with an upper bound on the truncation error of the
    /// band quadrature (0 on the plateau and outside the support).
    pub fn phi_with_error(&self, y: f64) -> (f64, f64) {
        let y = y.abs();
        if y <= self.plateau() {
            return (1.0, 0.0);
        }
        if y >= self.support() {
            return (0.0, 0.0);
        }
        let (t, tail) = self.inversion_cutoff(1e-9);
        let val = self.inversion_integral(y, t);
        (val.clamp(0.0, 1.0), tail)
    }

    /// Truncation point T with tail bound 2 int_T^inf |Phi| <= tol, from the
    /// envelope's third term; the panel budget caps T for tiny k.
    fn inversion_cutoff(&self, tol: f64) -> (f64, f64) {
        let k = self.k as f64;
        let a_env = k / (2.0 * PI * self.b);
        let mut t = a_env * (2.0 / (PI * k * tol)).powf(1.0 / k);
        // Keep the panel count workable; the achieved tail is reported.
        let max_panels = 2e6;
        let freq = self.a + 2.0 * self.b + self.support();
        let t_cap = max_panels / (4.0 * freq);
        if t > t_cap {
            t = t_cap;
        }
        let tail = 2.0 / (PI * k) * (a_env / t).powi(self.k as i32);
        (t, tail)
    }

    /// 2 int_0^T Phi(x) cos(2 pi x y) dx by composite Gauss-Legendre on
    /// quarter-period panels.
    fn inversion_integral(&self, y: f64, t: f64) -> f64 {
        let freq = self.a + 2.0 * self.b + y;
        let n_panels = ((t * 4.0 * freq).ceil() as usize).clamp(16, 4_000_000);
        let h = t / n_panels as f64;
        let mut acc = crate::dd::Kahan::new();
        for i in 0..n_panels {
            let x0 = i as f64 * h;
            let mid = x0 + 0.5 * h;
            for &(node, w) in GL16.iter() {
                let x = mid + 0.5 * h * node;
                acc.add(w * self.phi_hat(x) * (2.0 * PI * x * y).cos());
            }
        }
        acc.total() * h // GL weights sum to 2; panel scale h/2, doubled for the even integral
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundReport {
    pub max_ratio: f64,
    pub argmax: f64,
    pub pass: bool,
}

/// Precomputed transition-band table for bulk phi evaluation.
///
/// The inversion quadrature shares its Phi samples across all band points,
/// so building the table costs barely more than a single phi call.
#[derive(Debug, Clone)]
pub struct PhiBand {
    kernel: SmoothingKernel,
    lo: f64,
    step: f64,
    values: Vec<f64>,
}

impl PhiBand {
    pub fn build(kernel: &SmoothingKernel, grid_points: usize) -> Self {
        let n = grid_points.max(64);
        let lo = kernel.plateau();
        let hi = kernel.support();
        let step = (hi - lo) / (n - 1) as f64;
        let (t, _) = kernel.inversion_cutoff(1e-9);
        let freq = kernel.a + 2.0 * kernel.b + hi;
        let n_panels = ((t * 4.0 * freq).ceil() as usize).clamp(16, 4_000_000);
        let h = t / n_panels as f64;
        // Shared Phi samples at all panel nodes.
        let mut nodes = Vec::with_capacity(n_panels * GL16.len());
        for i in 0..n_panels {
            let mid = i as f64 * h + 0.5 * h;
            for &(node, w) in GL16.iter() {
                let x = mid + 0.5 * h * node;
                nodes.push((x, w * kernel.phi_hat(x)));
            }
        }
        let values: Vec<f64> = (0..n)
            .map(|j| {
                let y = lo + j as f64 * step;
                let mut acc = crate::dd::Kahan::new();
                for &(x, wphi) in &nodes {
                    acc.add(wphi * (2.0 * PI * x * y).cos());
                }
                (acc.total() * h).clamp(0.0, 1.0)
            })
            .collect();
        PhiBand {
            kernel: *kernel,
            lo,
            step,
            values,
        }
    }

    pub fn kernel(&self) -> &SmoothingKernel {
        &self.kernel
    }

    /// phi(y) with linear interpolation on the band; exact on the plateau
    /// and outside the support, so it never leaves [0, 1].
    pub fn eval(&self, y: f64) -> f64 {
        let y = y.abs();
        if y <= self.kernel.plateau() {
            return 1.0;
        }
        if y >= self.kernel.support() {
            return 0.0;
        }
        let pos = (y - self.lo) / self.step;
        let i = (pos.floor() as usize).min(self.values.len() - 2);
        let frac = pos - i as f64;
        (self.values[i] * (1.0 - frac) + self.values[i + 1] * frac).clamp(0.0, 1.0)
    }
}
