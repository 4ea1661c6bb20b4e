//! Modified Bessel functions of order zero, `I0` and `K0`.
//!
//! Both functions are evaluated from their ascending power series below a
//! crossover argument and from the large-argument asymptotic expansion above
//! it. `K0` has one extra regime: between `x = 2` and the crossover the series
//! cancels catastrophically (the `ln(x/2) I0(x)` term is many orders of
//! magnitude larger than the result), so there the integral representation
//!
//! ```text
//! K0(x) = ∫_0^∞ exp(-x cosh t) dt
//! ```
//!
//! is summed with the trapezoid rule, which converges geometrically for this
//! analytic, doubly-exponentially decaying integrand.
//!
//! The `_scaled` variants return `exp(-x) I0(x)` and `exp(x) K0(x)`; they never
//! overflow and are what the radial Green's kernels use.

use crate::error::{invalid, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this argument the ascending series for `K0` is used directly.
const K0_SERIES_LIMIT: f64 = 2.0;

/// Largest argument accepted by the unscaled `I0` (`e^700` is near `f64::MAX`).
pub const I0_MAX_ARG: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselAccuracySpec {
    /// Maximum number of ascending-series terms.
    pub series_terms: usize,
    /// Argument at which the series hands off to the asymptotic expansion.
    pub crossover: f64,
    pub target_rel_err: f64,
}

impl Default for BesselAccuracySpec {
    fn default() -> Self {
        Self {
            series_terms: 30,
            crossover: 12.0,
            target_rel_err: 1e-9,
        }
    }
}

impl BesselAccuracySpec {
    pub fn validate(&self) -> Result<()> {
        if self.series_terms < 10 {
            return Err(invalid("series_terms", "must be at least 10"));
        }
        if !(4.0..=12.0).contains(&self.crossover) {
            return Err(invalid("crossover", "must lie in [4, 12]"));
        }
        if !(self.target_rel_err > 0.0 && self.target_rel_err <= 1e-6) {
            return Err(invalid("target_rel_err", "must lie in (0, 1e-6]"));
        }
        Ok(())
    }

    /// `exp(-x) I0(x)` for `x >= 0`.
    pub fn i0_scaled(&self, x: f64) -> f64 {
        if x < self.crossover {
            (-x).exp() * self.i0_series(x)
        } else {
            asymptotic(x, 1.0) / (2.0 * std::f64::consts::PI * x).sqrt()
        }
    }

    /// `exp(x) K0(x)` for `x > 0`.
    pub fn k0_scaled(&self, x: f64) -> f64 {
        if x <= K0_SERIES_LIMIT {
            x.exp() * self.k0_series(x)
        } else if x < self.crossover {
            k0_scaled_trapezoid(x)
        } else {
            asymptotic(x, -1.0) * (std::f64::consts::FRAC_PI_2 / x).sqrt()
        }
    }

    pub fn i0(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(invalid("x", format!("I0 requires x >= 0, got {x}")));
        }
        if x > I0_MAX_ARG {
            return Err(invalid("x", format!("I0({x}) overflows; maximum argument is {I0_MAX_ARG}")));
        }
        if x < self.crossover {
            Ok(self.i0_series(x))
        } else {
            Ok(self.i0_scaled(x) * x.exp())
        }
    }

    pub fn k0(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(invalid("x", format!("K0 requires x > 0, got {x}")));
        }
        if x <= K0_SERIES_LIMIT {
            Ok(self.k0_series(x))
        } else {
            Ok(self.k0_scaled(x) * (-x).exp())
        }
    }

    fn i0_series(&self, x: f64) -> f64 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=self.series_terms {
            term *= q / (k * k) as f64;
            sum += term;
            if term < f64::EPSILON * 1e-2 * sum {
                break;
            }
        }
        sum
    }

    /// `K0(x) = -(ln(x/2) + γ) I0(x) + Σ_{k≥1} (x²/4)^k / (k!)² · H_k`.
    fn k0_series(&self, x: f64) -> f64 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut harmonic = 0.0;
        let mut i0 = 1.0;
        let mut tail = 0.0;
        for k in 1..=self.series_terms {
            let kf = k as f64;
            term *= q / (kf * kf);
            harmonic += 1.0 / kf;
            i0 += term;
            tail += term * harmonic;
            if term * harmonic < f64::EPSILON * 1e-2 * tail {
                break;
            }
        }
        -((0.5 * x).ln() + EULER_GAMMA) * i0 + tail
    }
}

/// `1 + Σ sign^k · ((2k-1)!!)² / (k! (8x)^k)`, truncated at its smallest term.
fn asymptotic(x: f64, sign: f64) -> f64 {
    let mut term = 1.0_f64;
    let mut sum = 1.0;
    for k in 1..64 {
        let odd = (2 * k - 1) as f64;
        let next = term * sign * odd * odd / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < f64::EPSILON * 1e-2 {
            break;
        }
    }
    sum
}

/// `exp(x) K0(x) = ∫_0^∞ exp(-2x sinh²(t/2)) dt` by the trapezoid rule.
fn k0_scaled_trapezoid(x: f64) -> f64 {
    const STEP: f64 = 0.1;
    // exp(-50) is below double precision relative to the t = 0 term.
    let mut sum = 0.5;
    let mut k = 1;
    loop {
        let s = (0.5 * STEP * k as f64).sinh();
        let exponent = 2.0 * x * s * s;
        if exponent > 50.0 {
            break;
        }
        sum += (-exponent).exp();
        k += 1;
    }
    sum * STEP
}

/// `I0(x)` with the default accuracy settings.
pub fn bessel_i0(x: f64) -> Result<f64> {
    BesselAccuracySpec::default().i0(x)
}

/// `K0(x)` with the default accuracy settings.
pub fn bessel_k0(x: f64) -> Result<f64> {
    BesselAccuracySpec::default().k0(x)
}

pub fn bessel_i0_scaled(x: f64) -> f64 {
    BesselAccuracySpec::default().i0_scaled(x)
}

pub fn bessel_k0_scaled(x: f64) -> f64 {
    BesselAccuracySpec::default().k0_scaled(x)
}

/// The two sides of the series/asymptotic hand-off evaluated at the crossover.
/// Returns `(low_branch, high_branch)` for `I0` and `K0` respectively.
pub fn crossover_branches(spec: &BesselAccuracySpec) -> ((f64, f64), (f64, f64)) {
    let x = spec.crossover;
    let i0_low = spec.i0_series(x);
    let i0_high = asymptotic(x, 1.0) / (2.0 * std::f64::consts::PI * x).sqrt() * x.exp();
    let k0_low = k0_scaled_trapezoid(x) * (-x).exp();
    let k0_high = asymptotic(x, -1.0) * (std::f64::consts::FRAC_PI_2 / x).sqrt() * (-x).exp();
    ((i0_low, i0_high), (k0_low, k0_high))
}
