//! Composite Simpson grids and an adaptive Simpson integrator.

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Uniform composite-Simpson grid on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    lo: f64,
    hi: f64,
    /// Set when an even point count was bumped to the next odd number.
    adjusted: bool,
}

impl Grid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn adjusted(&self) -> bool {
        self.adjusted
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.nodes.len() - 1) as f64
    }

    pub fn integrate(&self, samples: &[f64]) -> Result<f64> {
        integrate(self, samples)
    }

    /// Integrates `f` sampled at the nodes.
    pub fn integrate_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

pub fn build_grid(lo: f64, hi: f64, points: usize) -> Result<Grid> {
    if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
        return Err(invalid("grid domain", format!("need finite lo < hi, got [{lo}, {hi}]")));
    }
    if points < 5 {
        return Err(invalid("grid.points", format!("need at least 5 points, got {points}")));
    }
    let adjusted = points.is_multiple_of(2);
    let n = if adjusted { points + 1 } else { points };
    let h = (hi - lo) / (n - 1) as f64;
    let nodes: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + h * i as f64 })
        .collect();
    let weights = (0..n)
        .map(|i| {
            let c = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect();
    Ok(Grid {
        nodes,
        weights,
        lo,
        hi,
        adjusted,
    })
}

pub fn integrate(grid: &Grid, samples: &[f64]) -> Result<f64> {
    if samples.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    Ok(grid.weights.iter().zip(samples).map(|(w, s)| w * s).sum())
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to relative tolerance `rel_tol`.
///
/// The interval is first split into `initial_panels` pieces so that narrow
/// features are not missed by the first Simpson estimate.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, initial_panels: usize) -> f64 {
    let panels = initial_panels.max(1);
    let h = (b - a) / panels as f64;
    let coarse: Vec<(f64, f64, f64, f64, f64, f64)> = (0..panels)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i + 1 == panels { b } else { lo + h };
            let (flo, fhi) = (f(lo), f(hi));
            let mid = 0.5 * (lo + hi);
            let fmid = f(mid);
            (lo, hi, flo, fmid, fhi, (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi))
        })
        .collect();
    let scale: f64 = coarse.iter().map(|c| c.5.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let abs_tol = rel_tol * scale / panels as f64;
    coarse
        .into_iter()
        .map(|(lo, hi, flo, fmid, fhi, whole)| refine(f, lo, hi, flo, fmid, fhi, whole, abs_tol, 48))
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn refine(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}
