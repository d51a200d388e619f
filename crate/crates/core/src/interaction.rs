//! Two-bubble interaction integrals `∫ (U^{λ₁})^θ (U^{λ₂})^η |x|^{−s}` with `θ + η = 2*(s)`.
//!
//! Both bubbles are Euler–Lagrange normalized. In Emden–Fowler form the
//! integral is `|S^{N−1}| ∫ φ(t + ln λ₁)^θ φ(t + ln λ₂)^η dt`, which depends on
//! the scales only through `Q = λ₂/λ₁`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::bubble::{normalization_constant, Normalization};
use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::quadrature::{integrate_line, Layout, TailPolicy};
use crate::radial::profile::ln_2cosh;

/// `|θ − η|` below which a scan is flagged near-degenerate.
pub const NEAR_DEGENERATE: f64 = 0.1;

fn check_exponents(p: &ProblemParams, theta: f64, eta: f64) -> Result<()> {
    let pc = p.critical_exponent();
    if !(theta >= 0.0 && eta >= 0.0) {
        return Err(Error::domain("θ and η must be nonnegative"));
    }
    if (theta + eta - pc).abs() > 1e-12 * pc {
        return Err(Error::domain(format!("θ + η must equal 2*(s) = {pc}, got {}", theta + eta)));
    }
    Ok(())
}

/// `I(θ, η, λ) = ∫ U^θ (U^λ)^η |x|^{−s} dx` for `λ ∈ (0, 1]`.
pub fn interaction_integral(p: &ProblemParams, theta: f64, eta: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::domain(format!("λ must lie in (0, 1], got {lambda}")));
    }
    pair_integral(p, theta, eta, 1.0, lambda)
}

/// `∫ (U^{λ₁})^θ (U^{λ₂})^η |x|^{−s} dx` for arbitrary positive scales.
pub fn pair_integral(p: &ProblemParams, theta: f64, eta: f64, lambda1: f64, lambda2: f64) -> Result<f64> {
    check_exponents(p, theta, eta)?;
    if !(lambda1 > 0.0 && lambda2 > 0.0) || !lambda1.is_finite() || !lambda2.is_finite() {
        return Err(Error::domain("scales must be positive and finite"));
    }
    let ae = p.bubble_rate() * p.epsilon();
    let a = p.bubble_rate();
    let ln_c = normalization_constant(p, Normalization::EulerLagrange).ln();
    let (c1, c2) = (-lambda1.ln(), -lambda2.ln());
    // ln φ(t + ln λ) = ln C − ln(2 cosh(aε(t − centre)))/a
    let g = move |t: f64| {
        let l1 = ln_c - ln_2cosh(ae * (t - c1)) / a;
        let l2 = ln_c - ln_2cosh(ae * (t - c2)) / a;
        (theta * l1 + eta * l2).exp()
    };
    // the integrand decays like e^{−ε 2*(s) |t|} away from the two centres
    let decay = p.epsilon() * p.critical_exponent();
    let margin = 40.0 / decay;
    let (lo, hi) = (c1.min(c2) - margin, c1.max(c2) + margin);
    if lo < -650.0 || hi > 650.0 {
        return Err(Error::accuracy(
            format!("scales {lambda1:e}, {lambda2:e} need the window [{lo:.0}, {hi:.0}], beyond |t| ≤ 650; rescale both scales towards 1"),
            f64::INFINITY,
        ));
    }
    let width = (0.5 / ae).min(0.5);
    let panels = ((hi - lo) / width).ceil() as usize;
    let layout = Layout::new(lo, hi, panels, &[]);
    let r = integrate_line(&g, &layout, TailPolicy::AnalyticPowerlaw, 1e-12, true)?;
    if r.error > 1e-9 * r.value.abs() {
        return Err(Error::accuracy("interaction quadrature did not settle", r.error / r.value.abs()));
    }
    Ok(p.sphere_area() * r.value)
}

/// Least-squares line `y = slope x + intercept` and its residual sum of squares.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    (slope, intercept, rss)
}

/// Fits of the equal-exponent case `θ = η = 2*(s)/2`, where `I ≈ λ^e log(1/λ)` with
/// `e = ε(N−s)/(N−2)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogCorrection {
    /// `ln I = e ln λ + ln ln(1/λ) + c`: residual sum of squares with `c` fitted.
    pub literal_rss: f64,
    /// `I = λ^e (A ln(1/λ) + B)`: residual sum of squares of `ln I`.
    pub affine_rss: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InteractionScan {
    pub params: ProblemParams,
    pub theta: f64,
    pub eta: f64,
    pub lambda_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Grid points whose quadrature failed.
    pub dropped: usize,
    #[serde(rename = "exponent_fit")]
    pub fitted_exponent: f64,
    pub intercept: f64,
    pub power_rss: f64,
    /// `ε min(θ, η)`, or `ε(N−s)/(N−2)` in the equal case.
    pub predicted_exponent: f64,
    pub log_correction: Option<LogCorrection>,
    pub log_correction_detected: bool,
    /// `|θ − η| < 0.1` with `θ ≠ η`: the pure-power law is not asserted.
    pub near_degenerate: bool,
    /// `max/min` over the grid of `I` divided by the predicted law.
    pub max_ratio_envelope: f64,
}

/// Geometric grid of `n` points from `lambda_min` to `lambda_max`.
pub fn geometric_grid(lambda_min: f64, lambda_max: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lambda_min.ln(), lambda_max.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Computes `I` on a geometric grid and fits `ln I` against `ln λ`.
pub fn scan_and_fit(
    p: &ProblemParams,
    theta: f64,
    eta: f64,
    lambda_min: f64,
    lambda_max: f64,
    n_points: usize,
) -> Result<InteractionScan> {
    check_exponents(p, theta, eta)?;
    if !(lambda_min > 0.0 && lambda_min < lambda_max && lambda_max <= 1.0) {
        return Err(Error::domain("need 0 < lambda_min < lambda_max ≤ 1"));
    }
    if n_points < 8 {
        return Err(Error::domain(format!("a scan needs at least 8 points, got {n_points}")));
    }
    let grid = geometric_grid(lambda_min, lambda_max, n_points);
    let results: Vec<Result<f64>> = grid
        .par_iter()
        .map(|&l| interaction_integral(p, theta, eta, l))
        .collect();
    let (mut lambdas, mut values) = (Vec::new(), Vec::new());
    for (l, r) in grid.iter().zip(results) {
        if let Ok(v) = r {
            if v > 0.0 {
                lambdas.push(*l);
                values.push(v);
            }
        }
    }
    let dropped = grid.len() - lambdas.len();
    if lambdas.len() < 6 {
        return Err(Error::accuracy(
            format!("only {} of {} grid points survived", lambdas.len(), grid.len()),
            dropped as f64,
        ));
    }
    let x: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (slope, intercept, power_rss) = line_fit(&x, &y);
    let eps = p.epsilon();
    let equal = (theta - eta).abs() <= 1e-12 * p.critical_exponent();
    let (predicted, log_correction) = if equal {
        let e = eps * (p.dim() as f64 - p.s()) / (p.dim() as f64 - 2.0);
        (e, Some(log_fits(&x, &y, e)))
    } else {
        (eps * theta.min(eta), None)
    };
    let log_correction_detected = log_correction
        .as_ref()
        .is_some_and(|c| c.affine_rss <= 0.5 * power_rss);
    let law: Vec<f64> = x
        .iter()
        .map(|&lx| {
            let base = predicted * lx;
            if equal {
                base + (-lx).ln()
            } else {
                base
            }
        })
        .collect();
    let ratios: Vec<f64> = y.iter().zip(&law).map(|(a, b)| (a - b).exp()).collect();
    let (rmin, rmax) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    Ok(InteractionScan {
        params: *p,
        theta,
        eta,
        lambda_grid: lambdas,
        values,
        dropped,
        fitted_exponent: slope,
        intercept,
        power_rss,
        predicted_exponent: predicted,
        log_correction,
        log_correction_detected,
        near_degenerate: !equal && (theta - eta).abs() < NEAR_DEGENERATE,
        max_ratio_envelope: rmax / rmin,
    })
}

fn log_fits(x: &[f64], y: &[f64], e: f64) -> LogCorrection {
    // literal model: only the constant is free
    let z: Vec<f64> = x.iter().zip(y).map(|(lx, ly)| ly - e * lx - (-lx).ln()).collect();
    let mz = z.iter().sum::<f64>() / z.len() as f64;
    let literal_rss = z.iter().map(|v| (v - mz).powi(2)).sum();
    // affine model: w = I λ^{−e} = A L + B with L = ln(1/λ), relative weights 1/w
    let w: Vec<f64> = x.iter().zip(y).map(|(lx, ly)| (ly - e * lx).exp()).collect();
    let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (lx, wi) in x.iter().zip(&w) {
        let (u1, u2) = (-lx / wi, 1.0 / wi);
        s11 += u1 * u1;
        s12 += u1 * u2;
        s22 += u2 * u2;
        t1 += u1;
        t2 += u2;
    }
    let det = s11 * s22 - s12 * s12;
    let a = (t1 * s22 - t2 * s12) / det;
    let b = (s11 * t2 - s12 * t1) / det;
    let affine_rss = x
        .iter()
        .zip(&w)
        .map(|(lx, wi)| {
            let m = a * (-lx) + b;
            if m > 0.0 {
                (m.ln() - wi.ln()).powi(2)
            } else {
                f64::INFINITY
            }
        })
        .sum();
    LogCorrection {
        literal_rss,
        affine_rss,
        a,
        b,
    }
}

#[derive(Serialize)]
struct FitSummary {
    exponent_fit: f64,
    predicted_exponent: f64,
    log_correction_detected: bool,
    max_ratio_envelope: f64,
}

impl InteractionScan {
    /// `lambda,integral,log_lambda,log_integral` rows after `header` comment lines.
    pub fn write_csv(&self, header: &[String], out: &mut dyn Write) -> Result<()> {
        for line in header {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lambda", "integral", "log_lambda", "log_integral"])?;
        for (l, v) in self.lambda_grid.iter().zip(&self.values) {
            w.write_record([
                format!("{l:e}"),
                format!("{v:e}"),
                format!("{:e}", l.ln()),
                format!("{:e}", v.ln()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::to_value(FitSummary {
            exponent_fit: self.fitted_exponent,
            predicted_exponent: self.predicted_exponent,
            log_correction_detected: self.log_correction_detected,
            max_ratio_envelope: self.max_ratio_envelope,
        })
        .expect("plain struct")
    }
}
