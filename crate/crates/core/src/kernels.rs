//! Free-space Green's functions of `-Δ + ε` and their s-wave reductions.
//!
//! With `κ = √ε`:
//!
//! | n | `G_ε(r)`              | reduced radial kernel                    |
//! |---|-----------------------|------------------------------------------|
//! | 1 | `e^{-κ|r|} / (2κ)`    | `e^{-κ|x-x'|} / (2κ)` on the full line   |
//! | 2 | `K0(κr) / (2π)`       | `I0(κr<) K0(κr>)`, measure `r' dr'`      |
//! | 3 | `e^{-κr} / (4πr)`     | `sinh(κr<) e^{-κr>} / κ` acting on `w = r u` |
//!
//! Every reduced kernel has the semi-separable form
//! `A(x<) B(x>) e^{-κ (x> - x<)}`, which [`ReducedKernel`] exploits to apply
//! the integral operator in linear time.

use std::f64::consts::PI;

use crate::error::{ensure_positive, invalid, Result};
use crate::quadrature::adaptive_simpson;
use crate::special::{bessel_i0_scaled, bessel_k0, bessel_k0_scaled, EULER_GAMMA};
use crate::Dimension;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    dimension: Dimension,
    epsilon: f64,
    kappa: f64,
}

impl KernelSpec {
    pub fn new(dimension: Dimension, epsilon: f64) -> Result<Self> {
        ensure_positive("epsilon", epsilon)?;
        Ok(Self {
            dimension,
            epsilon,
            kappa: epsilon.sqrt(),
        })
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Decay rate `κ = √ε`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

fn check_radius(spec: &KernelSpec, name: &'static str, r: f64) -> Result<()> {
    match spec.dimension {
        Dimension::One if r.is_finite() => Ok(()),
        Dimension::One => Err(invalid(name, "must be finite")),
        _ if r.is_finite() && r > 0.0 => Ok(()),
        _ => Err(invalid(name, format!("must be positive in n = {} (kernel is singular at 0), got {r}", spec.dimension))),
    }
}

/// `G_ε(r)`, the decaying solution of `(-Δ + ε) G = δ`.
pub fn green_free(spec: &KernelSpec, r: f64) -> Result<f64> {
    check_radius(spec, "r", r)?;
    let k = spec.kappa;
    Ok(match spec.dimension {
        Dimension::One => (-k * r.abs()).exp() / (2.0 * k),
        Dimension::Two => bessel_k0(k * r)? / (2.0 * PI),
        Dimension::Three => (-k * r).exp() / (4.0 * PI * r),
    })
}

/// Leading small-`ε` form of [`green_free`].
pub fn green_small_eps(spec: &KernelSpec, r: f64) -> Result<f64> {
    check_radius(spec, "r", r)?;
    let k = spec.kappa;
    Ok(match spec.dimension {
        Dimension::One => 1.0 / (2.0 * k),
        Dimension::Two => ((1.0 / k).ln() + (2.0 * (-EULER_GAMMA).exp() / r).ln()) / (2.0 * PI),
        Dimension::Three => 1.0 / (4.0 * PI * r),
    })
}

/// Zero-angular-momentum kernel between radii (or, in 1D, coordinates) `r`
/// and `rp`. See the module table for the conventions.
pub fn green_reduced_radial(spec: &KernelSpec, r: f64, rp: f64) -> Result<f64> {
    check_radius(spec, "r", r)?;
    check_radius(spec, "rp", rp)?;
    let k = spec.kappa;
    let (lo, hi) = if r <= rp { (r, rp) } else { (rp, r) };
    Ok(match spec.dimension {
        Dimension::One => (-k * (hi - lo)).exp() / (2.0 * k),
        Dimension::Two => bessel_i0_scaled(k * lo) * bessel_k0_scaled(k * hi) * (-k * (hi - lo)).exp(),
        Dimension::Three => -(-2.0 * k * lo).exp_m1() / (2.0 * k) * (-k * (hi - lo)).exp(),
    })
}

/// `∫_0^{t_cut} (4πt)^{-n/2} e^{-r²/(4t)} dt`, the time a diffusing particle
/// started at the origin spends near `r` up to time `t_cut`.
///
/// As `t_cut → ∞` this tends to `G_0(r)`: finite (`1/(4πr)`) for `n = 3`,
/// divergent like `√t_cut` for `n = 1` and like `ln t_cut` for `n = 2`.
pub fn heat_kernel_occupation(dimension: Dimension, r: f64, t_cut: f64) -> Result<f64> {
    ensure_positive("r", r)?;
    ensure_positive("t_cut", t_cut)?;
    let half_n = 0.5 * dimension.get() as f64;
    let r2 = r * r;
    // substitute t = e^s; dt = t ds
    let integrand = |s: f64| {
        let t = s.exp();
        t * (4.0 * PI * t).powf(-half_n) * (-r2 / (4.0 * t)).exp()
    };
    let hi = t_cut.ln();
    // below t = r²/2980 the Gaussian factor is under e^{-745}
    let lo = (r2 / 2980.0).ln().min(hi - 1.0);
    Ok(adaptive_simpson(&integrand, lo, hi, 1e-10, 64))
}

/// The reduced kernel discretized on a set of increasing nodes, in the form
/// `K(x_i, x_j) = A(x<) B(x>) e^{-κ (x> - x<)}`.
#[derive(Debug, Clone)]
pub struct ReducedKernel {
    inner: Vec<f64>,
    outer: Vec<f64>,
    decay: Vec<f64>,
}

impl ReducedKernel {
    /// `nodes` must be increasing; in `n = 2, 3` they must be `>= 0`. An origin
    /// node is allowed: there the kernel takes its `r → 0` limit (`K0(κr')` in
    /// 2D, zero in 3D). In 2D the origin column is treated as zero, which is
    /// exact because the radial measure `r'` vanishes there.
    pub fn new(spec: &KernelSpec, nodes: &[f64]) -> Result<Self> {
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("nodes", "must be strictly increasing"));
        }
        if spec.dimension != Dimension::One && nodes.first().is_some_and(|&r| r < 0.0) {
            return Err(invalid("nodes", "radial nodes must be nonnegative"));
        }
        let k = spec.kappa;
        let (inner, outer): (Vec<f64>, Vec<f64>) = nodes
            .iter()
            .map(|&r| match spec.dimension {
                Dimension::One => (1.0, 1.0 / (2.0 * k)),
                Dimension::Two if r == 0.0 => (1.0, 0.0),
                Dimension::Two => (bessel_i0_scaled(k * r), bessel_k0_scaled(k * r)),
                Dimension::Three => (-(-2.0 * k * r).exp_m1() / (2.0 * k), 1.0),
            })
            .unzip();
        let mut decay = vec![1.0; nodes.len()];
        for i in 1..nodes.len() {
            decay[i] = (-k * (nodes[i] - nodes[i - 1])).exp();
        }
        Ok(Self { inner, outer, decay })
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    /// `out_i = Σ_j K(x_i, x_j) f_j`.
    pub fn apply(&self, f: &[f64], out: &mut [f64]) {
        let n = self.len();
        assert_eq!(f.len(), n);
        assert_eq!(out.len(), n);
        // j <= i
        let mut acc = 0.0;
        for i in 0..n {
            acc = acc * self.decay[i] + self.inner[i] * f[i];
            out[i] = self.outer[i] * acc;
        }
        // j > i
        let mut acc = 0.0;
        for i in (0..n.saturating_sub(1)).rev() {
            acc = (acc + self.outer[i + 1] * f[i + 1]) * self.decay[i + 1];
            out[i] += self.inner[i] * acc;
        }
    }

    /// `Σ_j K(x_i, x_j) f_j` for a single row.
    pub fn apply_row(&self, i: usize, f: &[f64]) -> f64 {
        let mut below = 0.0;
        for ((d, a), v) in self.decay[..=i].iter().zip(&self.inner[..=i]).zip(&f[..=i]) {
            below = below * d + a * v;
        }
        let mut above = 0.0;
        for j in (i + 1..self.len()).rev() {
            above = (above + self.outer[j] * f[j]) * self.decay[j];
        }
        self.outer[i] * below + self.inner[i] * above
    }
}
