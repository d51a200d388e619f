//! Scripted stability experiments: Bianchi–Egnell ratio scans, the one-bubble
//! estimate `‖ρ‖_γ ≲ Γ(u)`, and tables of `α` over parameter grids.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bubble::{tangent_generator, Bubble, Normalization};
use crate::error::{Error, Result};
use crate::functionals::{
    dual_norm_with, el_residual, gamma_norm_sq_with, inner_gamma_with, joint_knots, zonal_harmonic, DualInner,
};
use crate::manifold::{project_with, Manifold, ProjectOptions};
use crate::params::{best_constant, sphere_area, ProblemParams};
use crate::quadrature::gauss;
use crate::radial::{QuadratureSpec, RadialFunction};
use crate::spectral::{solve_sector, spectrum_report_with, SectorEigenproblem, SpectrumOptions, SpectrumReport};

/// Largest perturbation amplitude accepted by the scans.
pub const MAX_AMPLITUDE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    ThirdEigenfunction,
    RandomOrthogonal,
    ManifoldTangent,
}

impl PerturbationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PerturbationKind::ThirdEigenfunction => "third_eigenfunction",
            PerturbationKind::RandomOrthogonal => "random_orthogonal",
            PerturbationKind::ManifoldTangent => "manifold_tangent",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ScanOptions {
    pub seed: u64,
    pub quadrature: QuadratureSpec,
}

/// One amplitude of a scan. Quantities that were not computed are `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StabilityRow {
    pub d: f64,
    /// Amplitude actually used after the nonnegativity clip.
    pub d_used: f64,
    pub deficit: Option<f64>,
    pub distance: Option<f64>,
    /// `deficit / distance²`.
    pub ratio: Option<f64>,
    /// `Γ(u)`, the dual norm of the Euler–Lagrange residual.
    pub gamma: Option<f64>,
    /// `‖u − c*U^{λ*}‖_γ`.
    pub rho_norm: Option<f64>,
    pub rho_over_gamma: Option<f64>,
    /// `‖u‖_γ²`.
    pub norm_sq: Option<f64>,
    /// `½ μ^{(N−s)/(2−s)} ≤ ‖u‖_γ² ≤ (3/2) μ^{(N−s)/(2−s)}`.
    pub energy_window: Option<bool>,
    /// The same bounds applied to `‖u‖_γ`.
    pub norm_window: Option<bool>,
    pub flag: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityScan {
    pub params: ProblemParams,
    /// `None` for a user-supplied family (cfm scans).
    pub perturbation_kind: Option<PerturbationKind>,
    pub family_size: usize,
    pub d_grid: Vec<f64>,
    pub rows: Vec<StabilityRow>,
    /// Extrapolated `deficit/distance²` as `d → 0`.
    pub limit_estimate: Option<f64>,
    /// Value at the smallest `d`, then the linear and quadratic extrapolants.
    pub richardson_stages: Vec<f64>,
    /// `1 − η₂/η₃` from the spectral solver.
    pub alpha: Option<f64>,
    pub max_rho_over_gamma: Option<f64>,
    /// `max/min` of `‖ρ‖_γ/Γ(u)` over the rows.
    pub rho_over_gamma_drift: Option<f64>,
}

fn check_grid(d_grid: &[f64], allow_zero: bool) -> Result<()> {
    if d_grid.is_empty() {
        return Err(Error::domain("empty amplitude grid"));
    }
    for &d in d_grid {
        let ok = if allow_zero { d >= 0.0 } else { d > 0.0 };
        if !ok || d > MAX_AMPLITUDE {
            return Err(Error::domain(format!("amplitudes must lie in (0, {MAX_AMPLITUDE}], got {d}")));
        }
    }
    if d_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::domain("amplitude grid must be strictly decreasing"));
    }
    Ok(())
}

/// `deficit(B + d Σ_k w_k Y_k)` for an extremal `B`, computed from the
/// increments so that the `O(d²)` result does not cancel against `O(1)` terms:
///
/// ```text
/// ‖B + dW‖² − ‖B‖²       = 2d⟨B, w₀⟩ + d²‖W‖²
/// ∫|B + dW|^p − ∫B^p     = ∫ B^p (|1 + dW/B|^p − 1)
/// ```
///
/// and `‖B‖² = μ(∫B^p)^{2/p}` because `B` is an extremal.
pub fn perturbed_deficit(base: &Bubble, parts: &[RadialFunction], d: f64, q: &QuadratureSpec) -> Result<f64> {
    let p = base.params;
    if parts.iter().any(|w| *w.params() != p) {
        return Err(Error::domain("perturbation built for different parameters"));
    }
    let b = base.to_radial();
    let e = p.critical_exponent();
    let c = p.half_weight();
    let mut d1 = 0.0;
    for (i, u) in parts.iter().enumerate() {
        if u.sector() == 0 {
            d1 += 2.0 * d * inner_gamma_with(&b, u, q)?;
        }
        for (j, v) in parts.iter().enumerate().skip(i) {
            let x = inner_gamma_with(u, v, q)?;
            d1 += d * d * if j == i { x } else { 2.0 * x };
        }
    }
    let area = p.sphere_area();
    let i0 = area * q.integrate(&|t: f64| b.value_at(t, c).powf(e), &[])?;
    let dim = p.dim();
    let radial = parts.iter().all(|u| u.sector() == 0);
    let rule = gauss(64);
    let pi = std::f64::consts::PI;
    // (weight, Y_k(θ) per part) for ∫_S dσ = |S^{N−2}| ∫_0^π sin^{N−2}θ dθ
    let angles: Vec<(f64, Vec<f64>)> = if radial {
        vec![(area, vec![1.0; parts.len()])]
    } else {
        let ring = sphere_area(dim - 1);
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| {
                let th = 0.5 * pi * (1.0 + x);
                let wt = ring * 0.5 * pi * w * th.sin().powf(dim as f64 - 2.0);
                (wt, parts.iter().map(|u| zonal_harmonic(dim, u.sector(), th)).collect())
            })
            .collect()
    };
    let refs: Vec<&RadialFunction> = parts.iter().collect();
    let knots = joint_knots(&refs);
    let g = |t: f64| {
        let phi_b = b.value_at(t, c);
        if phi_b == 0.0 {
            return 0.0;
        }
        let ws: Vec<f64> = parts.iter().map(|u| d * u.value_at(t, c) / phi_b).collect();
        let bp = phi_b.powf(e);
        angles
            .iter()
            .map(|(wt, ys)| {
                let x: f64 = ws.iter().zip(ys).map(|(a, y)| a * y).sum();
                let l = if x > -1.0 { x.ln_1p() } else { (-1.0 - x).ln() };
                wt * bp * (e * l).exp_m1()
            })
            .sum()
    };
    let d2 = q.integrate(&g, &knots)?;
    let mu = best_constant(&p);
    let base_norm = mu * i0.powf(2.0 / e);
    Ok(d1 - base_norm * ((2.0 / e) * (d2 / i0).ln_1p()).exp_m1())
}

/// Smooth radial bump combination, orthogonal to `U` and `Z` in `⟨·,·⟩_γ`, unit norm.
pub fn random_orthogonal_perturbation(p: &ProblemParams, seed: u64, q: &QuadratureSpec) -> Result<RadialFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (p.bubble_rate() * p.epsilon());
    let bumps: Vec<RadialFunction> = (0..3)
        .map(|_| {
            let amp = rng.gen_range(-1.0..1.0);
            let centre = rng.gen_range(-1.5..1.5) * scale;
            let width = rng.gen_range(0.4..1.2) * scale;
            RadialFunction::log_gaussian(*p, 0, amp, centre, width)
        })
        .collect();
    let terms: Vec<(f64, &RadialFunction)> = bumps.iter().map(|b| (1.0, b)).collect();
    orthogonalize(&RadialFunction::linear_combination(&terms)?, q)
}

/// Removes the `U` and `Z` components of `f` and normalizes.
pub fn orthogonalize(f: &RadialFunction, q: &QuadratureSpec) -> Result<RadialFunction> {
    let p = *f.params();
    let one = Bubble::standard(p, Normalization::UnitGammaNorm);
    let u = one.to_radial();
    let z = tangent_generator(&one);
    // ⟨U, Z⟩_γ = ½ d/dλ ‖U^λ‖² = 0, so the two projections commute
    let cu = inner_gamma_with(f, &u, q)? / gamma_norm_sq_with(&u, q)?;
    let cz = inner_gamma_with(f, &z, q)? / gamma_norm_sq_with(&z, q)?;
    let g = RadialFunction::linear_combination(&[(1.0, f), (-cu, &u), (-cz, &z)])?;
    let n = gamma_norm_sq_with(&g, q)?.sqrt();
    if !(n > 1e-12) {
        return Err(Error::domain("perturbation lies in span{U, Z}"));
    }
    Ok(g.scale(1.0 / n))
}

/// `(sector, index)` of `η₃` in a report.
fn eta3_location(r: &SpectrumReport) -> (usize, usize) {
    for s in &r.sectors {
        if let Some(i) = s.eigenvalues.iter().position(|&e| e == r.eta3) {
            return (s.k, i);
        }
    }
    unreachable!("η₃ is taken from the sector lists")
}

/// Third-eigenfunction direction for `p` in unit normalization, with `α`.
pub fn third_eigenfunction(p: &ProblemParams) -> Result<(RadialFunction, f64)> {
    let opts = SpectrumOptions {
        normalization: Normalization::UnitGammaNorm,
        eigenfunctions: false,
        ..Default::default()
    };
    let report = spectrum_report_with(p, &opts)?;
    let (k, i) = eta3_location(&report);
    let sol = solve_sector(&SectorEigenproblem::new(*p, k, Normalization::UnitGammaNorm), i + 1)?;
    Ok((sol.eigenfunctions[i].clone(), report.alpha))
}

pub fn bianchi_egnell_scan(p: &ProblemParams, kind: PerturbationKind, d_grid: &[f64]) -> Result<StabilityScan> {
    bianchi_egnell_scan_with(p, kind, d_grid, &ScanOptions::default())
}

/// `u = U + d v` with `U` the unit-norm bubble and `v` a unit direction of the
/// given kind. The deficit comes from [`perturbed_deficit`], the distance from
/// projection. A direction in a sector `k ≥ 1` is invisible to the radial
/// projection, so there `dist(u, 𝓜) = d‖v‖_γ` exactly. `Γ` is left to [`cfm_scan`].
pub fn bianchi_egnell_scan_with(
    p: &ProblemParams,
    kind: PerturbationKind,
    d_grid: &[f64],
    opts: &ScanOptions,
) -> Result<StabilityScan> {
    check_grid(d_grid, false)?;
    let q = &opts.quadrature;
    let base = Bubble::standard(*p, Normalization::UnitGammaNorm);
    let (v, alpha) = match kind {
        PerturbationKind::ThirdEigenfunction => {
            let (v, a) = third_eigenfunction(p)?;
            (v, Some(a))
        }
        PerturbationKind::RandomOrthogonal => (random_orthogonal_perturbation(p, opts.seed, q)?, None),
        PerturbationKind::ManifoldTangent => {
            let z = tangent_generator(&base);
            let n = gamma_norm_sq_with(&z, q)?.sqrt();
            (z.scale(1.0 / n), None)
        }
    };
    let vnorm = gamma_norm_sq_with(&v, q)?.sqrt();
    let popts = ProjectOptions {
        quadrature: *q,
        ..Default::default()
    };
    let rows: Vec<StabilityRow> = d_grid
        .par_iter()
        .map(|&d| -> Result<StabilityRow> {
            let mut row = StabilityRow {
                d,
                d_used: d,
                ..Default::default()
            };
            let deficit = perturbed_deficit(&base, std::slice::from_ref(&v), d, q)?;
            let distance = if v.sector() == 0 {
                let u = base.to_radial().add(&v.scale(d))?;
                row.norm_sq = Some(gamma_norm_sq_with(&u, q)?);
                match project_with(&u, Manifold::M, &popts) {
                    Ok(r) => Some(r.distance),
                    Err(e) => {
                        row.flag = format!("projection failed: {e}");
                        None
                    }
                }
            } else {
                row.norm_sq = Some(1.0 + d * d * vnorm * vnorm);
                Some(d * vnorm)
            };
            row.deficit = Some(deficit);
            row.distance = distance;
            row.rho_norm = distance;
            row.ratio = distance.filter(|&x| x > 0.0).map(|x| deficit / (x * x));
            if kind == PerturbationKind::ManifoldTangent {
                row.flag = "tangent direction: distance is o(d), ratio not meaningful".into();
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let (limit, stages) = if kind == PerturbationKind::ManifoldTangent {
        (None, Vec::new())
    } else {
        let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.ratio.map(|x| (r.d, x))).collect();
        richardson_limit(&pts)
    };
    Ok(StabilityScan {
        params: *p,
        perturbation_kind: Some(kind),
        family_size: 1,
        d_grid: d_grid.to_vec(),
        rows,
        limit_estimate: limit,
        richardson_stages: stages,
        alpha,
        max_rho_over_gamma: None,
        rho_over_gamma_drift: None,
    })
}

/// Extrapolates `r(d)` to `d = 0` with polynomials in `d` through the smallest
/// one, two and three amplitudes. Returns the last stage and all stages.
pub fn richardson_limit(points: &[(f64, f64)]) -> (Option<f64>, Vec<f64>) {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite amplitudes"));
    let mut stages = Vec::new();
    for m in 1..=pts.len().min(3) {
        let sel = &pts[..m];
        // Lagrange interpolant at 0
        let v: f64 = sel
            .iter()
            .enumerate()
            .map(|(i, &(di, ri))| {
                let w: f64 = sel
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &(dj, _))| dj / (dj - di))
                    .product();
                ri * w
            })
            .sum();
        stages.push(v);
    }
    (stages.last().copied(), stages)
}

/// The default family for [`cfm_scan`]: the second excited radial eigenfunction
/// of the Euler–Lagrange problem, then seeded bump combinations, all orthogonal
/// to `U` and `Z` with `‖ρ‖_γ = 1`.
pub fn default_cfm_family(p: &ProblemParams, size: usize, seed: u64) -> Result<Vec<RadialFunction>> {
    if size == 0 {
        return Err(Error::domain("family size must be positive"));
    }
    let q = QuadratureSpec::default();
    let sol = solve_sector(&SectorEigenproblem::new(*p, 0, Normalization::EulerLagrange), 3)?;
    let mut family = vec![sol.eigenfunctions[2].clone()];
    for i in 1..size {
        family.push(random_orthogonal_perturbation(p, seed.wrapping_add(i as u64), &q)?);
    }
    Ok(family)
}

pub fn cfm_scan(p: &ProblemParams, family: &[RadialFunction], d_grid: &[f64]) -> Result<StabilityScan> {
    cfm_scan_with(p, family, d_grid, &ScanOptions::default())
}

/// `u = U + dρ` around the Euler–Lagrange bubble for each `ρ` of the family.
/// Each row keeps the family member with the largest `‖ρ_proj‖_γ/Γ(u)`.
/// Amplitudes that would make `u` change sign are clipped; `d = 0` is admitted
/// as the trivial limit, where the ratio is absent.
pub fn cfm_scan_with(
    p: &ProblemParams,
    family: &[RadialFunction],
    d_grid: &[f64],
    opts: &ScanOptions,
) -> Result<StabilityScan> {
    check_grid(d_grid, true)?;
    if family.is_empty() {
        return Err(Error::domain("empty perturbation family"));
    }
    let q = &opts.quadrature;
    for r in family {
        if r.sector() != 0 || r.params() != p {
            return Err(Error::domain("family members must be radial and built for the same parameters"));
        }
        let n = gamma_norm_sq_with(r, q)?.sqrt();
        if (n - 1.0).abs() > 1e-6 {
            return Err(Error::domain(format!("family members need ‖ρ‖_γ = 1, got {n}")));
        }
    }
    let base = Bubble::standard(*p, Normalization::EulerLagrange);
    let u0 = base.to_radial();
    let energy = gamma_norm_sq_with(&u0, q)?;
    let caps: Vec<f64> = family.iter().map(|r| nonnegative_cap(&u0, r)).collect();
    let popts = ProjectOptions {
        normalization: Normalization::EulerLagrange,
        quadrature: *q,
        ..Default::default()
    };
    let rows: Vec<StabilityRow> = d_grid
        .par_iter()
        .map(|&d| -> Result<StabilityRow> {
            let mut best: Option<StabilityRow> = None;
            let mut notes = Vec::new();
            for (i, r) in family.iter().enumerate() {
                let d_used = d.min(0.999 * caps[i]);
                if d_used < d {
                    notes.push(format!("member {i}: d clipped to {d_used:.3e} for u ≥ 0"));
                }
                if d > 0.0 && d_used <= 1e-12 {
                    notes.push(format!("member {i}: skipped, u changes sign for every d > 0"));
                    continue;
                }
                let u = u0.add(&r.scale(d_used))?;
                let norm_sq = gamma_norm_sq_with(&u, q)?;
                let gamma = dual_norm_with(&el_residual(&u)?, q, DualInner::Gamma)?;
                let proj = project_with(&u, Manifold::M, &popts)?;
                let ratio = if d == 0.0 { None } else { Some(proj.distance / gamma) };
                let row = StabilityRow {
                    d,
                    d_used,
                    deficit: None,
                    distance: Some(proj.distance),
                    ratio: None,
                    gamma: Some(gamma),
                    rho_norm: Some(proj.distance),
                    rho_over_gamma: ratio,
                    norm_sq: Some(norm_sq),
                    energy_window: Some(norm_sq >= 0.5 * energy && norm_sq <= 1.5 * energy),
                    norm_window: Some(norm_sq.sqrt() >= 0.5 * energy && norm_sq.sqrt() <= 1.5 * energy),
                    flag: String::new(),
                };
                let better = match &best {
                    None => true,
                    Some(b) => row.rho_over_gamma.unwrap_or(f64::NEG_INFINITY) > b.rho_over_gamma.unwrap_or(f64::NEG_INFINITY),
                };
                if better {
                    best = Some(row);
                }
            }
            let mut row = best.unwrap_or(StabilityRow {
                d,
                d_used: 0.0,
                ..Default::default()
            });
            row.flag = notes.join("; ");
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.rho_over_gamma).collect();
    let (max, drift) = if ratios.is_empty() {
        (None, None)
    } else {
        let hi = ratios.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let lo = ratios.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        (Some(hi), Some(hi / lo))
    };
    Ok(StabilityScan {
        params: *p,
        perturbation_kind: None,
        family_size: family.len(),
        d_grid: d_grid.to_vec(),
        rows,
        limit_estimate: None,
        richardson_stages: Vec::new(),
        alpha: None,
        max_rho_over_gamma: max,
        rho_over_gamma_drift: drift,
    })
}

/// Largest `d` with `U + dρ ≥ 0`, checked on a fine log-radius grid.
fn nonnegative_cap(u: &RadialFunction, rho: &RadialFunction) -> f64 {
    let p = u.params();
    let c = p.half_weight();
    let span = (40.0 / p.epsilon()).min(600.0);
    let n = 8000;
    let mut cap = f64::INFINITY;
    for i in 0..=n {
        let t = -span + 2.0 * span * i as f64 / n as f64;
        let (a, b) = (u.value_at(t, c), rho.value_at(t, c));
        if b < 0.0 && a.is_finite() && b.is_finite() {
            cap = cap.min(a / -b);
        }
    }
    cap
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:e}"))
}

#[derive(Serialize)]
struct ScanSummary<'a> {
    params: &'a ProblemParams,
    perturbation_kind: Option<PerturbationKind>,
    family_size: usize,
    limit_estimate: Option<f64>,
    richardson_stages: &'a [f64],
    alpha: Option<f64>,
    max_rho_over_gamma: Option<f64>,
    rho_over_gamma_drift: Option<f64>,
}

impl StabilityScan {
    pub fn write_csv(&self, header: &[String], out: &mut dyn Write) -> Result<()> {
        for line in header {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "d",
            "d_used",
            "deficit",
            "distance",
            "ratio",
            "gamma",
            "rho_norm",
            "rho_over_gamma",
            "norm_sq",
            "energy_window",
            "norm_window",
            "flag",
        ])?;
        for r in &self.rows {
            w.write_record([
                format!("{:e}", r.d),
                format!("{:e}", r.d_used),
                opt(r.deficit),
                opt(r.distance),
                opt(r.ratio),
                opt(r.gamma),
                opt(r.rho_norm),
                opt(r.rho_over_gamma),
                opt(r.norm_sq),
                r.energy_window.map_or_else(String::new, |b| b.to_string()),
                r.norm_window.map_or_else(String::new, |b| b.to_string()),
                r.flag.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::to_value(ScanSummary {
            params: &self.params,
            perturbation_kind: self.perturbation_kind,
            family_size: self.family_size,
            limit_estimate: self.limit_estimate,
            richardson_stages: &self.richardson_stages,
            alpha: self.alpha,
            max_rho_over_gamma: self.max_rho_over_gamma,
            rho_over_gamma_drift: self.rho_over_gamma_drift,
        })
        .expect("plain struct")
    }
}

/// One point of an `α` table; `error` is set when the spectrum failed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaRow {
    #[serde(rename = "N")]
    pub dim: usize,
    pub gamma: f64,
    pub s: f64,
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
    pub eta3: Option<f64>,
    pub alpha: Option<f64>,
    /// `η₂/η₁`, which should equal `2*(s) − 1`.
    pub eta2_over_eta1: Option<f64>,
    pub error: Option<String>,
}

/// One spectrum report per grid point, in unit normalization.
pub fn alpha_table(grid: &[ProblemParams]) -> Vec<AlphaRow> {
    let opts = SpectrumOptions {
        eigenfunctions: false,
        ..Default::default()
    };
    grid.par_iter()
        .map(|p| {
            let mut row = AlphaRow {
                dim: p.dim(),
                gamma: p.gamma(),
                s: p.s(),
                eta1: None,
                eta2: None,
                eta3: None,
                alpha: None,
                eta2_over_eta1: None,
                error: None,
            };
            match spectrum_report_with(p, &opts) {
                Ok(r) => {
                    row.eta1 = Some(r.eta1);
                    row.eta2 = Some(r.eta2);
                    row.eta3 = Some(r.eta3);
                    row.alpha = Some(r.alpha);
                    row.eta2_over_eta1 = Some(r.eta2 / r.eta1);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect()
}

pub fn write_alpha_csv(rows: &[AlphaRow], header: &[String], out: &mut dyn Write) -> Result<()> {
    for line in header {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["N", "gamma", "s", "eta1", "eta2", "eta3", "alpha", "eta2_over_eta1", "error"])?;
    for r in rows {
        w.write_record([
            r.dim.to_string(),
            format!("{:e}", r.gamma),
            format!("{:e}", r.s),
            opt(r.eta1),
            opt(r.eta2),
            opt(r.eta3),
            opt(r.alpha),
            opt(r.eta2_over_eta1),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
