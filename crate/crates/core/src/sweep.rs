//! `λ(ε)` curves, their inversion, the analytic threshold laws and the 3D
//! critical-coupling extrapolation.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure_positive, invalid, Error, Result};
use crate::interp::MonotoneCubic;
use crate::solver::{solve_lambda, IterationResult, SolverConfig};
use crate::Dimension;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

impl From<&IterationResult> for SweepRow {
    fn from(r: &IterationResult) -> Self {
        Self {
            epsilon: r.epsilon,
            lambda: r.lambda,
            iterations: r.iterations,
            residual: r.residual,
            converged: r.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub dimension: Dimension,
    pub potential: String,
    pub rows: Vec<SweepRow>,
    /// Run parameters. Deliberately free of wall-clock data so that identical
    /// inputs give identical documents.
    pub metadata: BTreeMap<String, String>,
    /// Data checks that failed (e.g. `λ` not increasing in `ε`).
    pub anomalies: Vec<String>,
}

pub const CSV_HEADER: &str = "epsilon,lambda,iterations,residual,converged";

impl SweepResult {
    pub fn converged_rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.converged)
    }

    /// CSV with `\n` line endings and 17 significant digits per real.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{:.16e},{:.16e},{},{:.16e},{}",
                r.epsilon, r.lambda, r.iterations, r.residual, r.converged
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// `n` points from `lo` to `hi` (inclusive), evenly spaced in `ln ε`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    ensure_positive("eps_min", lo)?;
    ensure_positive("eps_max", hi)?;
    if n == 0 {
        return Err(invalid("points", "must be at least 1"));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    if !(hi > lo) {
        return Err(invalid("eps_max", format!("must exceed eps_min ({lo}), got {hi}")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| (a + step * i as f64).exp()).collect();
    out[0] = lo;
    out[n - 1] = hi;
    Ok(out)
}

/// `n` points from `lo` to `hi` (inclusive), evenly spaced.
pub fn linear_spaced(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    ensure_positive("eps_min", lo)?;
    if n == 0 {
        return Err(invalid("points", "must be at least 1"));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    if !(hi > lo) {
        return Err(invalid("eps_max", format!("must exceed eps_min ({lo}), got {hi}")));
    }
    let step = (hi - lo) / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    out[n - 1] = hi;
    Ok(out)
}

/// One [`solve_lambda`] per `ε`, computed in parallel and returned in input
/// order. Rows that fail to converge are kept with `converged = false`.
pub fn sweep_lambda(cfg: &SolverConfig, eps_values: &[f64]) -> Result<SweepResult> {
    if eps_values.is_empty() {
        return Err(invalid("eps_values", "must not be empty"));
    }
    for &e in eps_values {
        ensure_positive("epsilon", e)?;
    }
    if eps_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("eps_values", "must be strictly increasing"));
    }
    let rows: Vec<SweepRow> = eps_values
        .par_iter()
        .map(|&eps| match solve_lambda(cfg, eps) {
            Ok(r) => SweepRow::from(&r),
            Err(_) => SweepRow {
                epsilon: eps,
                lambda: f64::NAN,
                iterations: 0,
                residual: f64::NAN,
                converged: false,
            },
        })
        .collect();
    if !rows.iter().any(|r| r.converged) {
        return Err(Error::EmptySweep);
    }

    let mut anomalies = Vec::new();
    let converged: Vec<&SweepRow> = rows.iter().filter(|r| r.converged).collect();
    for w in converged.windows(2) {
        if !(w[1].lambda > w[0].lambda) {
            anomalies.push(format!(
                "lambda not increasing: lambda({:e}) = {:e} >= lambda({:e}) = {:e}",
                w[0].epsilon, w[0].lambda, w[1].epsilon, w[1].lambda
            ));
        }
    }
    for r in rows.iter().filter(|r| !r.converged) {
        anomalies.push(format!("not converged at epsilon = {:e}", r.epsilon));
    }

    let mut metadata = BTreeMap::new();
    metadata.insert("generator".into(), format!("threshold-core {}", env!("CARGO_PKG_VERSION")));
    metadata.insert("grid_points".into(), cfg.grid().len().to_string());
    let (lo, hi) = cfg.grid().domain();
    metadata.insert("grid_domain".into(), format!("[{lo:e}, {hi:e}]"));
    metadata.insert("ref_index".into(), cfg.ref_index().to_string());
    metadata.insert("tol".into(), format!("{:e}", cfg.tol()));
    metadata.insert("max_iter".into(), cfg.max_iter().to_string());

    Ok(SweepResult {
        dimension: cfg.dimension(),
        potential: cfg.potential().summary(),
        rows,
        metadata,
        anomalies,
    })
}

/// `λ(ε)`, treating an unconverged iteration as an error.
fn converged_lambda(cfg: &SolverConfig, epsilon: f64) -> Result<f64> {
    let r = solve_lambda(cfg, epsilon)?;
    if r.converged {
        Ok(r.lambda)
    } else {
        Err(Error::NotConverged {
            epsilon,
            iterations: r.iterations,
            residual: r.residual,
        })
    }
}

/// Number of samples used to seed [`invert_epsilon`].
const INVERT_SAMPLES: usize = 7;
const INVERT_MAX_STEPS: usize = 100;
/// Refinement stops once `|λ(ε) - λ_target| <= STOP_TOL · λ_target`.
const INVERT_STOP_TOL: f64 = 1e-11;
/// The answer is rejected unless `|λ(ε) - λ_target| <= ACCEPT_TOL · λ_target`.
const INVERT_ACCEPT_TOL: f64 = 1e-8;

/// The `ε` at which the ground state needs coupling `lambda_target`.
///
/// `λ(ε)` is sampled at a few log-spaced points of the bracket, a monotone
/// cubic through `(λ, ln ε)` supplies the first guess, and Illinois
/// false-position on `λ(ε) - λ_target` (in `ln ε`) finishes the job.
pub fn invert_epsilon(cfg: &SolverConfig, lambda_target: f64, bracket: (f64, f64)) -> Result<f64> {
    ensure_positive("lambda", lambda_target)?;
    let (lo, hi) = bracket;
    let samples = log_spaced(lo, hi, INVERT_SAMPLES)?;
    let lambdas = samples
        .par_iter()
        .map(|&e| converged_lambda(cfg, e))
        .collect::<Result<Vec<f64>>>()?;
    let (l_lo, l_hi) = (lambdas[0], lambdas[INVERT_SAMPLES - 1]);
    if !(l_lo < lambda_target && lambda_target < l_hi) {
        return Err(Error::EmptyBracket {
            lo,
            hi,
            lambda_lo: l_lo,
            lambda_hi: l_hi,
            target: lambda_target,
        });
    }

    let f = |log_eps: f64| -> Result<f64> { Ok(converged_lambda(cfg, log_eps.exp())? - lambda_target) };
    let logs: Vec<f64> = samples.iter().map(|e| e.ln()).collect();

    // narrowest sampled bracket
    let k = lambdas.iter().position(|&l| l >= lambda_target).expect("checked above");
    if lambdas[k] == lambda_target {
        return Ok(samples[k]);
    }
    let (mut a, mut fa) = (logs[k - 1], lambdas[k - 1] - lambda_target);
    let (mut b, mut fb) = (logs[k], lambdas[k] - lambda_target);

    let seed = if lambdas.windows(2).all(|w| w[1] > w[0]) {
        MonotoneCubic::new(&lambdas, &logs)?.eval(lambda_target)
    } else {
        0.5 * (a + b)
    };
    let mut x = if seed > a && seed < b { seed } else { 0.5 * (a + b) };
    let mut fx = f(x)?;
    let mut side = 0i8;
    for _ in 0..INVERT_MAX_STEPS {
        if fx.abs() <= INVERT_STOP_TOL * lambda_target {
            break;
        }
        if fx < 0.0 {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        let next = (a * fb - b * fa) / (fb - fa);
        x = if next > a && next < b { next } else { 0.5 * (a + b) };
        if b - a <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
        fx = f(x)?;
    }
    if fx.abs() > INVERT_ACCEPT_TOL * lambda_target {
        return Err(Error::NotConverged {
            epsilon: x.exp(),
            iterations: INVERT_MAX_STEPS,
            residual: fx.abs() / lambda_target,
        });
    }
    Ok(x.exp())
}

/// One-dimensional threshold law `λ ≈ 2√ε / ∫V`.
pub fn threshold_lambda_1d(epsilon: f64, moment: f64) -> Result<f64> {
    ensure_positive("epsilon", epsilon)?;
    ensure_positive("moment", moment)?;
    Ok(2.0 * epsilon.sqrt() / moment)
}

/// The 1D law solved for `ε`: `λ² (∫V)² / 4`, or `½ λ² (∫V)²` with `half_factor`.
pub fn simon_epsilon_1d(lambda: f64, moment: f64, half_factor: bool) -> Result<f64> {
    ensure_positive("lambda", lambda)?;
    ensure_positive("moment", moment)?;
    let lm2 = (lambda * moment).powi(2);
    Ok(if half_factor { 0.5 * lm2 } else { 0.25 * lm2 })
}

/// Constant in the 2D threshold law `λ ≈ C / (ln(1/ε) ∫V)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `C = 2π`, the constant as printed.
    PaperLiteral,
    /// `C = 4π`, implied by the `√ε` kernel `K0(√ε r) / 2π`.
    #[default]
    PdeConsistent,
}

impl Convention {
    pub fn constant(self) -> f64 {
        match self {
            Convention::PaperLiteral => 2.0 * std::f64::consts::PI,
            Convention::PdeConsistent => 4.0 * std::f64::consts::PI,
        }
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" | "paper_literal" => Ok(Convention::PaperLiteral),
            "consistent" | "pde_consistent" => Ok(Convention::PdeConsistent),
            _ => Err(invalid(
                "convention",
                format!("expected paper or consistent, got {s:?}"),
            )),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::PaperLiteral => "paper_literal",
            Convention::PdeConsistent => "pde_consistent",
        })
    }
}

/// Two-dimensional threshold law `C / (ln(1/ε) ∫V)`.
pub fn threshold_lambda_2d(epsilon: f64, moment: f64, convention: Convention) -> Result<f64> {
    ensure_positive("epsilon", epsilon)?;
    ensure_positive("moment", moment)?;
    if epsilon >= 1.0 {
        return Err(invalid("epsilon", format!("must be below 1 so that ln(1/epsilon) > 0, got {epsilon}")));
    }
    Ok(convention.constant() / ((1.0 / epsilon).ln() * moment))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope · x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch { expected: xs.len(), got: ys.len() });
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!("linear fit needs 2 points, got {}", xs.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("linear fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Ok(LinearFit {
        slope,
        intercept,
        r_squared: r_squared(ys, xs.iter().map(|x| slope * x + intercept)),
    })
}

/// Least squares `y = slope · x` through the origin.
pub fn slope_through_origin(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch { expected: xs.len(), got: ys.len() });
    }
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("fit through the origin needs a nonzero abscissa".into()));
    }
    Ok(xs.iter().zip(ys).map(|(x, y)| x * y).sum::<f64>() / sxx)
}

/// `1 - SS_res / SS_tot`.
pub(crate) fn r_squared(ys: &[f64], fitted: impl Iterator<Item = f64>) -> f64 {
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = ys.iter().zip(fitted).map(|(y, f)| (y - f).powi(2)).sum();
    if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        1.0 - ss_res / ss_tot
    }
}

/// Maximum relative fit residual above which a critical-coupling fit is flagged.
pub const CRITICAL_FIT_FLAG: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalFit {
    pub lambda_c: f64,
    pub slope: f64,
    /// `max |λ_fit - λ| / λ` over the rows used.
    pub fit_residual: f64,
    pub flagged: bool,
    pub rows_used: usize,
}

/// Least-squares `λ = λ_c + a √ε` over `(ε, λ)` pairs.
pub fn fit_sqrt_law(rows: &[(f64, f64)]) -> Result<CriticalFit> {
    if rows.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "critical-coupling fit needs at least 4 converged rows, got {}",
            rows.len()
        )));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.0.sqrt()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let fit = linear_fit(&xs, &ys)?;
    let fit_residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| ((fit.intercept + fit.slope * x - y) / y).abs())
        .fold(0.0, f64::max);
    Ok(CriticalFit {
        lambda_c: fit.intercept,
        slope: fit.slope,
        fit_residual,
        flagged: fit_residual > CRITICAL_FIT_FLAG,
        rows_used: rows.len(),
    })
}

/// Extrapolates the 3D critical coupling from a sweep over `eps_values`,
/// which must span at least two decades and stay at or below `10⁻²`.
pub fn critical_lambda_3d(cfg: &SolverConfig, eps_values: &[f64]) -> Result<CriticalFit> {
    if cfg.dimension() != Dimension::Three {
        return Err(invalid("dimension", format!("critical coupling needs n = 3, got {}", cfg.dimension())));
    }
    let (Some(&lo), Some(&hi)) = (eps_values.first(), eps_values.last()) else {
        return Err(invalid("eps_values", "must not be empty"));
    };
    if hi > 1e-2 * (1.0 + 1e-12) {
        return Err(invalid("eps_values", format!("must not exceed 1e-2, got {hi:e}")));
    }
    if !(hi >= 100.0 * lo * (1.0 - 1e-12)) {
        return Err(invalid("eps_values", "must span at least two decades"));
    }
    let sweep = sweep_lambda(cfg, eps_values)?;
    let rows: Vec<(f64, f64)> = sweep.converged_rows().map(|r| (r.epsilon, r.lambda)).collect();
    fit_sqrt_law(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::square_well_exact;
    use crate::potentials::{make_potential, PotentialSpec};
    use crate::solver::SolverOptions;

    fn config(spec: PotentialSpec, points: usize) -> SolverConfig {
        let opts = SolverOptions { points, ..Default::default() };
        SolverConfig::with_options(make_potential(spec).unwrap(), &opts).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn log_spacing() {
        let v = log_spaced(1e-8, 1e-4, 9).unwrap();
        assert_eq!(v.len(), 9);
        assert_eq!(v[0], 1e-8);
        assert_eq!(v[8], 1e-4);
        assert!(rel(v[2], 1e-7) < 1e-12);
        assert_eq!(log_spaced(3.0, 3.0, 1).unwrap(), vec![3.0]);
        assert!(log_spaced(1e-3, 1e-4, 3).is_err());
        assert!(log_spaced(0.0, 1.0, 3).is_err());
        assert!(log_spaced(1e-3, 1e-2, 0).is_err());
        let lin = linear_spaced(1.0, 2.0, 5).unwrap();
        assert_eq!(lin, vec![1.0, 1.25, 1.5, 1.75, 2.0]);
    }

    #[test]
    fn threshold_laws() {
        assert!(rel(threshold_lambda_1d(1e-6, 2.0).unwrap(), 1e-3) < 1e-15);
        let r = threshold_lambda_1d(4e-5, 1.3).unwrap() / threshold_lambda_1d(1e-5, 1.3).unwrap();
        assert!(rel(r, 2.0) < 1e-15);
        let g = threshold_lambda_1d(1e-4, std::f64::consts::PI.sqrt()).unwrap();
        assert!((g - 0.011_283_8).abs() < 1e-7);
        assert!(threshold_lambda_1d(0.0, 1.0).is_err());
        assert!(threshold_lambda_1d(1e-3, -1.0).is_err());

        assert!(rel(simon_epsilon_1d(0.1, 1.0, true).unwrap(), 0.005) < 1e-15);
        assert!(rel(simon_epsilon_1d(0.1, 1.0, false).unwrap(), 0.0025) < 1e-15);
        let (a, b) = (simon_epsilon_1d(0.3, 2.0 * 0.7, false).unwrap(), simon_epsilon_1d(2.0 * 0.3, 0.7, false).unwrap());
        assert!(rel(a, b) < 1e-15);
        assert!(simon_epsilon_1d(-0.1, 1.0, true).is_err());

        let two_pi = 2.0 * std::f64::consts::PI;
        let eps = (-10.0_f64).exp();
        assert!(rel(threshold_lambda_2d(eps, two_pi, Convention::PaperLiteral).unwrap(), 0.1) < 1e-14);
        assert!(rel(threshold_lambda_2d(eps, 2.0 * two_pi, Convention::PdeConsistent).unwrap(), 0.1) < 1e-14);
        for c in [Convention::PaperLiteral, Convention::PdeConsistent] {
            let r = threshold_lambda_2d(1e-6, 3.0, c).unwrap() / threshold_lambda_2d(1e-3, 3.0, c).unwrap();
            assert!(rel(r, 0.5) < 1e-14);
        }
        assert!(threshold_lambda_2d(1.0, 1.0, Convention::default()).is_err());
        assert!(threshold_lambda_2d(2.0, 1.0, Convention::default()).is_err());
    }

    #[test]
    fn convention_parsing() {
        assert_eq!("paper".parse::<Convention>().unwrap(), Convention::PaperLiteral);
        assert_eq!("consistent".parse::<Convention>().unwrap(), Convention::PdeConsistent);
        assert_eq!("pde_consistent".parse::<Convention>().unwrap(), Convention::PdeConsistent);
        assert!("literal".parse::<Convention>().is_err());
        assert_eq!(Convention::default(), Convention::PdeConsistent);
    }

    #[test]
    fn fits_recover_synthetic_data() {
        let rows: Vec<(f64, f64)> = log_spaced(1e-6, 1e-2, 9)
            .unwrap()
            .into_iter()
            .map(|e| (e, 3.0 + 0.7 * e.sqrt()))
            .collect();
        let fit = fit_sqrt_law(&rows).unwrap();
        assert!((fit.lambda_c - 3.0).abs() < 1e-12);
        assert!((fit.slope - 0.7).abs() < 1e-10);
        assert!(fit.fit_residual < 1e-13);
        assert!(!fit.flagged);
        assert!(fit_sqrt_law(&rows[..3]).is_err());

        let xs = [1.0, 2.0, 3.0];
        assert!(rel(slope_through_origin(&xs, &[2.0, 4.0, 6.0]).unwrap(), 2.0) < 1e-15);
        let lf = linear_fit(&xs, &[1.0, 3.0, 5.0]).unwrap();
        assert!((lf.slope - 2.0).abs() < 1e-14 && (lf.intercept + 1.0).abs() < 1e-14);
        assert!((lf.r_squared - 1.0).abs() < 1e-14);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
        assert!(linear_fit(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn sweep_preserves_order_and_matches_single_solves() {
        let cfg = config(PotentialSpec::gaussian(Dimension::One, 1.0, 1.0), 401);
        let eps = log_spaced(1e-6, 1e-2, 5).unwrap();
        let sweep = sweep_lambda(&cfg, &eps).unwrap();
        assert_eq!(sweep.rows.len(), 5);
        assert!(sweep.anomalies.is_empty(), "{:?}", sweep.anomalies);
        for (row, &e) in sweep.rows.iter().zip(&eps) {
            assert_eq!(row.epsilon, e);
            let single = solve_lambda(&cfg, e).unwrap();
            assert_eq!(row, &SweepRow::from(&single));
            assert!(row.lambda > 0.0);
        }
        let one = sweep_lambda(&cfg, &eps[2..3]).unwrap();
        assert_eq!(one.rows.len(), 1);
        assert_eq!(one.rows[0], sweep.rows[2]);
        // rerun is bit-identical
        assert_eq!(sweep_lambda(&cfg, &eps).unwrap().to_csv(), sweep.to_csv());
    }

    #[test]
    fn sweep_rejects_bad_epsilon_lists() {
        let cfg = config(PotentialSpec::gaussian(Dimension::One, 1.0, 1.0), 201);
        assert!(sweep_lambda(&cfg, &[]).is_err());
        assert!(sweep_lambda(&cfg, &[1e-3, 1e-4]).is_err());
        assert!(sweep_lambda(&cfg, &[-1e-3]).is_err());
    }

    #[test]
    fn non_converged_rows_are_flagged() {
        let potential = make_potential(PotentialSpec::gaussian(Dimension::One, 1.0, 1.0)).unwrap();
        let opts = SolverOptions { points: 201, max_iter: 10, ..Default::default() };
        let cfg = SolverConfig::with_options(potential, &opts).unwrap();
        // convergence slows as ε grows; 10 steps suffice only near threshold
        let sweep = sweep_lambda(&cfg, &[1e-8, 50.0]);
        match sweep {
            Ok(s) => {
                assert!(s.rows[0].converged);
                assert!(!s.rows[1].converged);
                assert!(s.anomalies.iter().any(|a| a.contains("not converged")));
            }
            Err(e) => panic!("unexpected {e}"),
        }
        assert!(matches!(sweep_lambda(&cfg, &[50.0, 60.0]), Err(Error::EmptySweep)));
    }

    #[test]
    fn csv_format() {
        let result = SweepResult {
            dimension: Dimension::One,
            potential: "x".into(),
            rows: vec![SweepRow { epsilon: 0.1, lambda: 1.0 / 3.0, iterations: 7, residual: 0.0, converged: true }],
            metadata: BTreeMap::new(),
            anomalies: vec![],
        };
        let csv = result.to_csv();
        assert_eq!(
            csv,
            "epsilon,lambda,iterations,residual,converged\n1.0000000000000001e-1,3.3333333333333331e-1,7,0.0000000000000000e0,true\n"
        );
        let lambda: f64 = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(lambda, 1.0 / 3.0);
    }

    #[test]
    fn inversion_round_trip_and_oracle() {
        let cfg = config(PotentialSpec::square(Dimension::One, 1.0, 1.0), 2001);
        let eps = invert_epsilon(&cfg, 5.0, (1.0, 10.0)).unwrap();
        let exact = square_well_exact(Dimension::One, 5.0, 1.0).unwrap().unwrap();
        assert!(rel(eps, exact) < 1e-4, "{eps} vs {exact}");
        assert!(rel(eps, 3.852_504_625_369_541) < 1e-4);
        let lam = solve_lambda(&cfg, eps).unwrap().lambda;
        assert!(rel(lam, 5.0) <= 1e-8);

        let gcfg = config(PotentialSpec::gaussian(Dimension::One, 1.0, 1.0), 801);
        let eps0 = 3.7e-5;
        let target = solve_lambda(&gcfg, eps0).unwrap().lambda;
        let back = invert_epsilon(&gcfg, target, (1e-7, 1e-3)).unwrap();
        assert!(rel(back, eps0) < 1e-8, "{back} vs {eps0}");
    }

    #[test]
    fn inversion_rejects_non_straddling_bracket() {
        let cfg = config(PotentialSpec::square(Dimension::One, 1.0, 1.0), 401);
        let err = invert_epsilon(&cfg, 5.0, (5.0, 10.0)).unwrap_err();
        assert!(matches!(err, Error::EmptyBracket { .. }), "{err}");
        assert!(invert_epsilon(&cfg, -1.0, (1.0, 2.0)).is_err());
        assert!(invert_epsilon(&cfg, 5.0, (2.0, 1.0)).is_err());
    }

    #[test]
    fn inversion_reports_inner_non_convergence() {
        let potential = make_potential(PotentialSpec::gaussian(Dimension::One, 1.0, 1.0)).unwrap();
        let opts = SolverOptions { points: 201, max_iter: 10, ..Default::default() };
        let cfg = SolverConfig::with_options(potential, &opts).unwrap();
        assert!(matches!(invert_epsilon(&cfg, 30.0, (1e-8, 60.0)), Err(Error::NotConverged { .. })));
    }

    #[test]
    fn narrow_well_inversion_matches_delta_limit() {
        // moment 1: λ = 0.02 binds at ε ≈ λ²/4 = 1e-4
        let cfg = config(PotentialSpec::square(Dimension::One, 50.0, 0.01), 801);
        let eps = invert_epsilon(&cfg, 0.02, (1e-6, 1e-2)).unwrap();
        assert!(rel(eps, 1e-4) < 1e-2, "{eps}");
    }

    #[test]
    fn three_d_sweep_stays_above_critical() {
        let cfg = config(PotentialSpec::square(Dimension::Three, 1.0, 1.0), 801);
        let eps = log_spaced(1e-6, 1e-2, 5).unwrap();
        let sweep = sweep_lambda(&cfg, &eps).unwrap();
        assert!(sweep.rows.iter().all(|r| r.converged && r.lambda > 2.0));
        let fit = critical_lambda_3d(&cfg, &eps).unwrap();
        let exact = std::f64::consts::PI.powi(2) / 4.0;
        assert!(rel(fit.lambda_c, exact) < 1e-2, "{fit:?}");
        assert!(!fit.flagged);
    }

    #[test]
    fn critical_input_checks() {
        let cfg3 = config(PotentialSpec::square(Dimension::Three, 1.0, 1.0), 201);
        assert!(critical_lambda_3d(&cfg3, &log_spaced(1e-4, 1e-3, 5).unwrap()).is_err());
        assert!(critical_lambda_3d(&cfg3, &log_spaced(1e-4, 1e-1, 5).unwrap()).is_err());
        let cfg1 = config(PotentialSpec::square(Dimension::One, 1.0, 1.0), 201);
        assert!(critical_lambda_3d(&cfg1, &log_spaced(1e-6, 1e-2, 5).unwrap()).is_err());
    }

    #[test]
    fn scaling_covariance() {
        let spec = PotentialSpec::gaussian(Dimension::Two, 1.0, 1.0);
        let base = solve_lambda(&config(spec.clone(), 801), 1e-3).unwrap().lambda;
        for s in [0.5, 2.0] {
            let scaled = solve_lambda(&config(spec.rescaled(s), 801), s * s * 1e-3).unwrap().lambda;
            assert!(rel(scaled, base) < 1e-6, "s={s}: {scaled} vs {base}");
        }
    }
}
