//! Origin occupation of simple symmetric walks on the integer lattice `Zⁿ`.
//!
//! # Random stream
//!
//! Trial `i` of a run with seed `s` draws from its own xoshiro256++ generator
//! (`rand_xoshiro::Xoshiro256PlusPlus`), seeded through `seed_from_u64` (which
//! expands its argument with SplitMix64) on
//!
//! ```text
//! s ⊕ (i + 1) · 0x9E37_79B9_7F4A_7C15      (wrapping multiply)
//! ```
//!
//! Each step consumes one `u64` output `x`; the step direction is
//! `d = ((x >> 32) · 2n) >> 32 ∈ [0, 2n)`, moving coordinate `d / 2` by `+1`
//! if `d` is even and `-1` otherwise. Results therefore do not depend on how
//! trials are scheduled across threads.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::sweep::{linear_fit, r_squared, slope_through_origin};
use crate::Dimension;

const STREAM_INCREMENT: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkResult {
    pub dimension: Dimension,
    pub steps: u64,
    pub trials: u64,
    pub seed: u64,
    /// Mean number of times `t ∈ [0, steps]` with the walker at the origin.
    pub mean_visits: f64,
    /// Sample standard deviation over `√trials`.
    pub stderr: f64,
}

fn trial_rng(seed: u64, trial: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed ^ (trial + 1).wrapping_mul(STREAM_INCREMENT))
}

/// Origin visits of one walk, recorded at each checkpoint of the increasing `ladder`.
fn walk_visits(dimension: Dimension, ladder: &[u64], rng: &mut Xoshiro256PlusPlus) -> Vec<u64> {
    let two_n = 2 * dimension.get() as u64;
    let mut pos = [0i64; 3];
    let mut visits = 1u64;
    let mut t = 0u64;
    let mut out = Vec::with_capacity(ladder.len());
    for &checkpoint in ladder {
        while t < checkpoint {
            let d = (((rng.next_u64() >> 32) * two_n) >> 32) as usize;
            pos[d >> 1] += if d & 1 == 0 { 1 } else { -1 };
            t += 1;
            if pos == [0, 0, 0] {
                visits += 1;
            }
        }
        out.push(visits);
    }
    out
}

/// Runs `trials` walks once and reports the occupation statistics at every
/// step count in `ladder` (which must be nondecreasing).
pub fn occupation_ladder(dimension: Dimension, ladder: &[u64], trials: u64, seed: u64) -> Result<Vec<WalkResult>> {
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    if ladder.is_empty() {
        return Err(invalid("ladder", "must not be empty"));
    }
    if ladder.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("ladder", "must be nondecreasing"));
    }
    let per_trial: Vec<Vec<u64>> = (0..trials)
        .into_par_iter()
        .map(|i| walk_visits(dimension, ladder, &mut trial_rng(seed, i)))
        .collect();
    let m = trials as u128;
    Ok(ladder
        .iter()
        .enumerate()
        .map(|(k, &steps)| {
            let (sum, sumsq) = per_trial.iter().fold((0u128, 0u128), |(s, q), v| {
                let x = v[k] as u128;
                (s + x, q + x * x)
            });
            let stderr = if m > 1 {
                let var = (m * sumsq - sum * sum) as f64 / (m * (m - 1)) as f64;
                (var / m as f64).sqrt()
            } else {
                0.0
            };
            WalkResult {
                dimension,
                steps,
                trials,
                seed,
                mean_visits: sum as f64 / m as f64,
                stderr,
            }
        })
        .collect())
}

/// Occupation statistics for walks of `steps` steps.
pub fn occupation_time(dimension: Dimension, steps: u64, trials: u64, seed: u64) -> Result<WalkResult> {
    Ok(occupation_ladder(dimension, &[steps], trials, seed)?.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModel {
    /// `c √T`
    Sqrt,
    /// `c ln T + b`
    Log,
    /// `A - B / √T`, approaching a finite limit
    Saturating,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    pub model: GrowthModel,
    /// `R²` of the selected model.
    pub fit_quality: f64,
    /// RMS relative residual of each model, in the order sqrt, log, saturating.
    pub normalized_rms: [f64; 3],
    pub points: Vec<WalkResult>,
}

/// Fits the three growth models to `mean_visits(T)` over the ladder and keeps
/// the one with the smallest RMS relative residual.
pub fn growth_fit(dimension: Dimension, ladder: &[u64], trials: u64, seed: u64) -> Result<GrowthFit> {
    if ladder.len() < 4 {
        return Err(Error::InsufficientData(format!("ladder needs at least 4 entries, got {}", ladder.len())));
    }
    if ladder[0] == 0 || ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("ladder", "must be positive and strictly increasing"));
    }
    if ladder[ladder.len() - 1] < 100 * ladder[0] {
        return Err(invalid("ladder", "must span at least two decades"));
    }
    let points = occupation_ladder(dimension, ladder, trials, seed)?;
    let (model, fit_quality, normalized_rms) = select_growth_model(ladder, &points.iter().map(|p| p.mean_visits).collect::<Vec<_>>())?;
    Ok(GrowthFit {
        model,
        fit_quality,
        normalized_rms,
        points,
    })
}

fn select_growth_model(ladder: &[u64], ys: &[f64]) -> Result<(GrowthModel, f64, [f64; 3])> {
    let ts: Vec<f64> = ladder.iter().map(|&t| t as f64).collect();
    let sqrt_t: Vec<f64> = ts.iter().map(|t| t.sqrt()).collect();
    let c = slope_through_origin(&sqrt_t, ys)?;
    let sqrt_fit: Vec<f64> = sqrt_t.iter().map(|s| c * s).collect();

    let ln_t: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let lf = linear_fit(&ln_t, ys)?;
    let log_fit: Vec<f64> = ln_t.iter().map(|l| lf.slope * l + lf.intercept).collect();

    let inv_sqrt: Vec<f64> = ts.iter().map(|t| 1.0 / t.sqrt()).collect();
    let sf = linear_fit(&inv_sqrt, ys)?;
    let sat_fit: Vec<f64> = inv_sqrt.iter().map(|x| sf.slope * x + sf.intercept).collect();

    let nrms = |fit: &[f64]| -> f64 {
        (ys.iter().zip(fit).map(|(y, f)| ((y - f) / y).powi(2)).sum::<f64>() / ys.len() as f64).sqrt()
    };
    let fits = [
        (GrowthModel::Sqrt, sqrt_fit),
        (GrowthModel::Log, log_fit),
        (GrowthModel::Saturating, sat_fit),
    ];
    let scores = [nrms(&fits[0].1), nrms(&fits[1].1), nrms(&fits[2].1)];
    let best = (0..3)
        .min_by(|&a, &b| scores[a].total_cmp(&scores[b]))
        .expect("three candidates");
    let quality = r_squared(ys, fits[best].1.iter().copied());
    Ok((fits[best].0, quality, scores))
}
