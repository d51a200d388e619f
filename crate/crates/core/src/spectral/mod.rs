//! Spectrum of the linearized operator around the bubble, sector by sector.
//!
//! With `R(r) = r^{−(N−2)/2} ψ(ln r)` the sector-`k` problem
//! `−ΔR − (γ−λ_k)R/r² = η U^{2*(s)−2} R/|x|^s` becomes
//!
//! ```text
//! −ψ″ + κ_k² ψ = η q(t) ψ,    q = φ_U^{2*(s)−2} = C^{2*(s)−2} (2 cosh(a ε (t + ln λ)))^{−2}
//! ```
//!
//! on the line. The ends decay like `e^{−κ_k |t|}`, so Dirichlet conditions on a
//! wide enough window only cost `e^{−2κ_k L}`. The second-order difference
//! scheme gives a symmetric tridiagonal pencil; eigenvalues come from Sturm
//! bisection on three nested grids and double Richardson extrapolation.

mod tridiag;

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

pub use tridiag::{bisect_eigenvalue, solve_shifted, sturm_count};

use crate::bubble::{normalization_constant, Normalization};
use crate::error::{Error, Result};
use crate::functionals::{check_resolution, fd_jet, gamma_norm_sq_with, sector_kappa_sq};
use crate::params::{best_constant, harmonic_multiplicity, ProblemParams};
use crate::radial::profile::{ln_2cosh, Jet, Profile};
use crate::radial::{DecayHints, FunctionKind, QuadratureSpec, RadialFunction};

/// Largest number of eigenvalues per sector.
pub const MAX_COUNT: usize = 6;
/// Smallest admissible coarse grid.
pub const MIN_GRID: usize = 512;
/// Acceptance threshold for `|R₂ − R₁|/η` between the two Richardson levels.
pub const REFINEMENT_TOL: f64 = 1e-7;

/// Log-radius window and coarse interior node count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
}

impl GridSpec {
    fn step(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n + 1) as f64
    }

    /// The grid with every interval halved.
    fn refined(&self) -> Self {
        Self {
            n: 2 * self.n + 1,
            ..*self
        }
    }

    fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        (1..=self.n).map(|i| self.t_min + i as f64 * h).collect()
    }
}

/// One sector of the linearized problem around `U^λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SectorEigenproblem {
    pub params: ProblemParams,
    pub sector: usize,
    pub normalization: Normalization,
    /// Scale of the bubble that defines the weight.
    pub lambda: f64,
    /// Coarse grid; `None` picks one from the sector's length scales.
    pub grid: Option<GridSpec>,
}

impl SectorEigenproblem {
    pub fn new(params: ProblemParams, sector: usize, normalization: Normalization) -> Self {
        Self {
            params,
            sector,
            normalization,
            lambda: 1.0,
            grid: None,
        }
    }

    pub fn with_scale(mut self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("bubble scale must be positive, got {lambda}")));
        }
        self.lambda = lambda;
        Ok(self)
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Result<Self> {
        if grid.n < MIN_GRID {
            return Err(Error::domain(format!("grid needs n ≥ {MIN_GRID} nodes, got {}", grid.n)));
        }
        if !(grid.t_min < grid.t_max) || !grid.t_min.is_finite() || !grid.t_max.is_finite() {
            return Err(Error::domain("grid needs t_min < t_max"));
        }
        self.grid = Some(grid);
        Ok(self)
    }

    /// `γ − λ_k`, the inverse-square coefficient left in the radial equation.
    pub fn effective_gamma(&self) -> f64 {
        self.params.gamma() - self.params.angular_eigenvalue(self.sector)
    }

    pub fn kappa(&self) -> f64 {
        sector_kappa_sq(&self.params, self.sector).sqrt()
    }

    /// Window centred on the bubble at `t = −ln λ`, wide enough for the slowest
    /// decay, with about 40 nodes per unit of the fastest length scale.
    pub fn auto_grid(&self) -> GridSpec {
        let kappa = self.kappa();
        let ae = self.params.bubble_rate() * self.params.epsilon();
        let half = (20.0 / kappa).max(14.0 / ae);
        let h = 1.0 / (40.0 * (kappa + MAX_COUNT as f64 * ae));
        let n = ((2.0 * half / h).ceil() as usize).max(MIN_GRID);
        let centre = -self.lambda.ln();
        GridSpec {
            t_min: centre - half,
            t_max: centre + half,
            n,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid.unwrap_or_else(|| self.auto_grid())
    }

    /// The weight `q(t) = φ_U(t)^{2*(s)−2}`.
    pub fn weight(&self, t: f64) -> f64 {
        weight_fn(&self.params, self.normalization, self.lambda)(t)
    }
}

/// `q(t) = C^{2*(s)−2} (2 cosh(aε(t + ln λ)))^{−2}`, using `(2*(s)−2)/a = 2`.
fn weight_fn(p: &ProblemParams, norm: Normalization, lambda: f64) -> impl Fn(f64) -> f64 + Send + Sync {
    let amp = normalization_constant(p, norm).powf(p.critical_exponent() - 2.0);
    let ae = p.bubble_rate() * p.epsilon();
    let shift = lambda.ln();
    move |t| amp * (-2.0 * ln_2cosh(ae * (t + shift))).exp()
}

/// The discrete pencil `A ψ = η D ψ` on one grid.
struct Pencil {
    t: Vec<f64>,
    diag: Vec<f64>,
    off: Vec<f64>,
    weight: Vec<f64>,
}

impl Pencil {
    fn new(prob: &SectorEigenproblem, grid: &GridSpec) -> Self {
        let h = grid.step();
        let k2 = sector_kappa_sq(&prob.params, prob.sector);
        let t = grid.nodes();
        let q = weight_fn(&prob.params, prob.normalization, prob.lambda);
        Self {
            diag: vec![2.0 / (h * h) + k2; grid.n],
            off: vec![-1.0 / (h * h); grid.n - 1],
            weight: t.iter().map(|&x| q(x)).collect(),
            t,
        }
    }

    fn eigenvalue(&self, index: usize) -> f64 {
        // A is positive definite, so every eigenvalue is positive
        let mut hi = 1.0;
        while sturm_count(&self.diag, &self.off, &self.weight, hi) <= index {
            hi *= 2.0;
        }
        bisect_eigenvalue(&self.diag, &self.off, &self.weight, index, 0.0, hi)
    }

    /// Inverse iteration at the converged eigenvalue; normalized by
    /// `h Σ q ψ²` with the first significant lobe positive.
    fn eigenvector(&self, eta: f64) -> Vec<f64> {
        let n = self.t.len();
        let mut x = vec![1.0; n];
        for _ in 0..3 {
            let b: Vec<f64> = x.iter().zip(&self.weight).map(|(v, w)| v * w).collect();
            x = solve_shifted(&self.diag, &self.off, &self.weight, eta, &b);
            let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            x.iter_mut().for_each(|v| *v /= m);
        }
        let h = self.t[1] - self.t[0];
        let norm = (h * x.iter().zip(&self.weight).map(|(v, w)| w * v * v).sum::<f64>()).sqrt();
        let peak = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let lead = x.iter().find(|v| v.abs() > 1e-2 * peak).copied().unwrap_or(1.0);
        let sign = lead.signum() / norm;
        x.iter_mut().for_each(|v| *v *= sign);
        x
    }
}

/// `(16 R₂ − R₁)/15` with `R_j = (4 v_{j+1} − v_j)/3`, plus `R₁`, `R₂`.
fn richardson(v: [f64; 3]) -> (f64, f64, f64) {
    let r1 = (4.0 * v[1] - v[0]) / 3.0;
    let r2 = (4.0 * v[2] - v[1]) / 3.0;
    ((16.0 * r2 - r1) / 15.0, r1, r2)
}

/// Eigenvalues of one sector, ascending, with their normalized eigenfunctions.
#[derive(Clone, Debug)]
pub struct SectorSolution {
    pub sector: usize,
    pub eigenvalues: Vec<f64>,
    /// `|R₂ − R₁|/η` per eigenvalue.
    pub refinement: Vec<f64>,
    pub eigenfunctions: Vec<RadialFunction>,
    pub grid: GridSpec,
}

/// The lowest `count` eigenvalues of one sector together with eigenfunctions,
/// sampled on the coarse grid and normalized to `‖·‖_γ = 1`.
pub fn solve_sector(prob: &SectorEigenproblem, count: usize) -> Result<SectorSolution> {
    solve(prob, count, true)
}

/// Eigenvalues only.
pub fn sector_eigenvalues(prob: &SectorEigenproblem, count: usize) -> Result<Vec<f64>> {
    Ok(solve(prob, count, false)?.eigenvalues)
}

fn solve(prob: &SectorEigenproblem, count: usize, vectors: bool) -> Result<SectorSolution> {
    if count == 0 || count > MAX_COUNT {
        return Err(Error::domain(format!("count must lie in 1..={MAX_COUNT}, got {count}")));
    }
    let g0 = prob.grid();
    if g0.n < MIN_GRID {
        return Err(Error::domain(format!("grid needs n ≥ {MIN_GRID} nodes, got {}", g0.n)));
    }
    let grids = [g0, g0.refined(), g0.refined().refined()];
    let pencils: Vec<Pencil> = grids.par_iter().map(|g| Pencil::new(prob, g)).collect();
    let raw: Vec<[f64; 3]> = (0..count)
        .into_par_iter()
        .map(|i| std::array::from_fn(|j| pencils[j].eigenvalue(i)))
        .collect();
    let mut eigenvalues = Vec::with_capacity(count);
    let mut refinement = Vec::with_capacity(count);
    for v in &raw {
        let (eta, r1, r2) = richardson(*v);
        let change = (r2 - r1).abs() / eta.abs();
        if change > REFINEMENT_TOL {
            return Err(Error::Refinement {
                message: format!(
                    "sector {} eigenvalue {} changed by {change:.2e} between grids",
                    prob.sector,
                    eigenvalues.len() + 1
                ),
                coarse: r1,
                fine: r2,
            });
        }
        eigenvalues.push(eta);
        refinement.push(change);
    }
    let eigenfunctions = if vectors {
        (0..count)
            .into_par_iter()
            .map(|i| eigenfunction(prob, &pencils, &raw[i], eigenvalues[i]))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(SectorSolution {
        sector: prob.sector,
        eigenvalues,
        refinement,
        eigenfunctions,
        grid: g0,
    })
}

fn eigenfunction(prob: &SectorEigenproblem, pencils: &[Pencil], raw: &[f64; 3], eta: f64) -> Result<RadialFunction> {
    let vecs: Vec<Vec<f64>> = pencils.iter().zip(raw).map(|(p, &e)| p.eigenvector(e)).collect();
    let n = vecs[0].len();
    // coarse node i sits at index 2i+1 and 4i+3 on the finer grids
    let phi: Vec<f64> = (0..n)
        .map(|i| richardson([vecs[0][i], vecs[1][2 * i + 1], vecs[2][4 * i + 3]]).0)
        .collect();
    let t = &pencils[0].t;
    let peak = phi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let keep = |v: &f64| v.abs() > 1e-14 * peak;
    let first = phi.iter().position(keep).unwrap_or(0).saturating_sub(2);
    let last = (phi.iter().rposition(keep).unwrap_or(n - 1) + 3).min(n);
    let h = t[1] - t[0];
    let k2 = sector_kappa_sq(&prob.params, prob.sector);
    let kappa = k2.sqrt();
    // Hermite interpolation with exact second derivatives needs far fewer
    // knots than the difference scheme needs nodes
    let ae = prob.params.bubble_rate() * prob.params.epsilon();
    let stride = ((0.05 / (kappa + 2.0 * ae)) / h).floor().max(1.0) as usize;
    let idx: Vec<usize> = (first..last).step_by(stride).collect();
    let d1: Vec<f64> = idx.iter().map(|&i| five_point(&phi, i, h)).collect();
    let d2: Vec<f64> = idx.iter().map(|&i| (k2 - eta * pencils[0].weight[i]) * phi[i]).collect();
    let ts: Vec<f64> = idx.iter().map(|&i| t[i]).collect();
    let vs: Vec<f64> = idx.iter().map(|&i| phi[i]).collect();
    let c = prob.params.half_weight();
    let hints = DecayHints {
        at_zero: c - kappa,
        at_infinity: c + kappa,
    };
    let raw_fn = RadialFunction::from_ef_samples(
        prob.params,
        prob.sector,
        ts.clone(),
        vs.clone(),
        d1.clone(),
        Some(d2.clone()),
        Some(hints),
    )?;
    let scale = 1.0 / gamma_norm_sq_with(&raw_fn, &QuadratureSpec::default())?.sqrt();
    let sc = |v: Vec<f64>| v.into_iter().map(|x| x * scale).collect::<Vec<_>>();
    RadialFunction::from_ef_samples(prob.params, prob.sector, ts, sc(vs), sc(d1), Some(sc(d2)), Some(hints))
}

/// Five-point derivative, dropping to three points at the ends.
fn five_point(v: &[f64], i: usize, h: f64) -> f64 {
    let n = v.len();
    if i >= 2 && i + 2 < n {
        (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h)
    } else if i >= 1 && i + 1 < n {
        (v[i + 1] - v[i - 1]) / (2.0 * h)
    } else if i == 0 {
        (v[1] - v[0]) / h
    } else {
        (v[i] - v[i - 1]) / h
    }
}

/// Eigenvalues of one sector as they appear in the report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectorEntry {
    pub k: usize,
    /// Dimension of the degree-`k` spherical harmonics.
    pub multiplicity: usize,
    pub eigenvalues: Vec<f64>,
}

/// Options for [`spectrum_report_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumOptions {
    pub normalization: Normalization,
    /// Eigenvalues per sector.
    pub count: usize,
    /// Also compute eigenfunctions.
    pub eigenfunctions: bool,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            normalization: Normalization::UnitGammaNorm,
            count: 4,
            eigenfunctions: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub params: ProblemParams,
    pub normalization: Normalization,
    pub sectors: Vec<SectorEntry>,
    pub eta1: f64,
    pub eta2: f64,
    /// Third entry of the merged list counted with multiplicity.
    pub eta3: f64,
    /// Third distinct value of the merged list.
    pub eta3_distinct: f64,
    pub alpha: f64,
    /// `η₃` in Euler–Lagrange normalization.
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    pub kernel_dim: usize,
    /// Ground eigenvalue of the sector `k = 1`.
    pub sector1_ground: f64,
    /// Whether `sector1_ground` equals `(2*(s)−1) μ^{2*(s)/2}` in this normalization (rel. 1e−6).
    pub sector1_is_kernel_value: bool,
    #[serde(skip)]
    pub eigenfunctions: Vec<Vec<RadialFunction>>,
}

/// `μ^{2*(s)/2}` for unit-norm bubbles, `1` for Euler–Lagrange ones.
pub fn eigenvalue_scale(p: &ProblemParams, norm: Normalization) -> f64 {
    match norm {
        Normalization::EulerLagrange => 1.0,
        Normalization::UnitGammaNorm => best_constant(p).powf(p.critical_exponent() / 2.0),
    }
}

pub fn spectrum_report(p: &ProblemParams) -> Result<SpectrumReport> {
    spectrum_report_with(p, &SpectrumOptions::default())
}

/// Solves sectors `k = 0, 1, …` until a sector's ground eigenvalue exceeds the
/// current `η₃` candidate under both readings; ground eigenvalues grow with `k`.
pub fn spectrum_report_with(p: &ProblemParams, opts: &SpectrumOptions) -> Result<SpectrumReport> {
    if opts.count < 3 {
        return Err(Error::domain("the report needs at least 3 eigenvalues per sector"));
    }
    let mut sectors: Vec<SectorEntry> = Vec::new();
    let mut functions = Vec::new();
    let mut k = 0;
    loop {
        let prob = SectorEigenproblem::new(*p, k, opts.normalization);
        let sol = solve(&prob, opts.count, opts.eigenfunctions)?;
        let ground = sol.eigenvalues[0];
        if k >= 2 {
            let (_, distinct) = third_values(&sectors);
            if ground > distinct {
                break;
            }
        }
        sectors.push(SectorEntry {
            k,
            multiplicity: harmonic_multiplicity(p.dim(), k),
            eigenvalues: sol.eigenvalues,
        });
        functions.push(sol.eigenfunctions);
        k += 1;
    }
    let mut merged: Vec<f64> = sectors.iter().flat_map(|s| s.eigenvalues.iter().copied()).collect();
    merged.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let (eta3, eta3_distinct) = third_values(&sectors);
    let (eta1, eta2) = (merged[0], merged[1]);
    let scale = eigenvalue_scale(p, opts.normalization);
    let kernel_dim = sectors
        .iter()
        .map(|s| s.multiplicity * s.eigenvalues.iter().filter(|&&e| (e - eta2).abs() <= 1e-5 * eta2).count())
        .sum();
    let sector1_ground = sectors[1].eigenvalues[0];
    let kernel_value = (p.critical_exponent() - 1.0) * scale;
    Ok(SpectrumReport {
        params: *p,
        normalization: opts.normalization,
        eta1,
        eta2,
        eta3,
        eta3_distinct,
        alpha: 1.0 - eta2 / eta3,
        lambda: eta3 / scale,
        kernel_dim,
        sector1_ground,
        sector1_is_kernel_value: (sector1_ground - kernel_value).abs() <= 1e-6 * kernel_value,
        sectors,
        eigenfunctions: functions,
    })
}

/// Third value of the merged eigenvalue list with and without multiplicity.
fn third_values(sectors: &[SectorEntry]) -> (f64, f64) {
    let mut with: Vec<f64> = Vec::new();
    for s in sectors {
        for &e in &s.eigenvalues {
            with.extend(std::iter::repeat_n(e, s.multiplicity));
        }
    }
    with.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let mut distinct = with.clone();
    distinct.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());
    let pick = |v: &[f64]| v.get(2).copied().unwrap_or(f64::INFINITY);
    (pick(&with), pick(&distinct))
}

/// `−Δρ − γρ/|x|² − coefficient · U^{2*(s)−2} ρ/|x|^s` for the bubble `U = U^1`
/// in the given normalization.
#[derive(Debug)]
struct LinearizedProfile {
    rho: RadialFunction,
    kappa2: f64,
    coefficient: f64,
    normalization: Normalization,
}

impl LinearizedProfile {
    fn eval(&self, t: f64) -> f64 {
        let p = self.rho.params();
        let j = self.rho.jet_at(t, p.half_weight());
        let q = weight_fn(p, self.normalization, 1.0)(t);
        -j.d2 + self.kappa2 * j.value - self.coefficient * q * j.value
    }
}

impl Profile for LinearizedProfile {
    fn jet(&self, t: f64) -> Jet {
        fd_jet(|x| self.eval(x), t)
    }

    fn value(&self, t: f64) -> f64 {
        self.eval(t)
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        self.rho.profile().breakpoints(out);
    }
}

/// The linearized operator applied to `rho`, at Emden–Fowler weight `(N+2)/2`.
/// Use `coefficient = 1` for the eigenvalue form and `2*(s)−1` for the kernel operator.
pub fn apply_linearized(
    p: &ProblemParams,
    rho: &RadialFunction,
    coefficient: f64,
    normalization: Normalization,
) -> Result<RadialFunction> {
    if rho.params() != p {
        return Err(Error::domain("rho was built for different parameters"));
    }
    check_resolution(rho)?;
    let prof = LinearizedProfile {
        rho: rho.clone(),
        kappa2: sector_kappa_sq(p, rho.sector()),
        coefficient,
        normalization,
    };
    Ok(RadialFunction::from_profile(
        *p,
        rho.sector(),
        p.half_weight() + 2.0,
        Arc::new(prof),
        None,
        FunctionKind::ClosedForm,
    ))
}

/// `∫ (U^{2*(s)−2}/|x|^s)^{N/2} dx = |S^{N−1}| ∫ q(t)^{N/2} dt`.
pub fn weight_admissibility(p: &ProblemParams, normalization: Normalization) -> Result<f64> {
    let q = weight_fn(p, normalization, 1.0);
    let half = p.dim() as f64 / 2.0;
    let g = move |t: f64| q(t).powf(half);
    let v = QuadratureSpec::default().integrate(&g, &[])?;
    Ok(p.sphere_area() * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::{tangent_generator, Bubble};
    use crate::functionals::inner_gamma;
    use crate::params::gamma_fn;

    /// Pöschl–Teller levels of `−ψ″ + κ²ψ = η q ψ` in Euler–Lagrange normalization.
    fn exact(p: &ProblemParams, k: usize, n: usize) -> f64 {
        let (e, a) = (p.epsilon(), p.bubble_rate());
        let nu = sector_kappa_sq(p, k).sqrt() / (e * a) + n as f64;
        nu * (nu + 1.0) * a * a / (1.0 + a)
    }

    fn cases() -> Vec<ProblemParams> {
        vec![
            ProblemParams::new(3, 0.1, 0.5).unwrap(),
            ProblemParams::new(4, 0.5, 1.0).unwrap(),
            ProblemParams::new(6, 3.6, 1.5).unwrap(),
        ]
    }

    #[test]
    fn matches_exact_levels_in_several_sectors() {
        for p in cases() {
            for k in 0..3 {
                let prob = SectorEigenproblem::new(p, k, Normalization::EulerLagrange);
                let ev = sector_eigenvalues(&prob, 4).unwrap();
                for (n, got) in ev.iter().enumerate() {
                    let want = exact(&p, k, n);
                    assert!((got - want).abs() < 1e-8 * want, "{p:?} k={k} n={n}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn unit_norm_scales_by_mu_power() {
        let p = ProblemParams::new(4, 0.5, 1.0).unwrap();
        let ev = sector_eigenvalues(&SectorEigenproblem::new(p, 0, Normalization::UnitGammaNorm), 2).unwrap();
        let m = best_constant(&p).powf(p.critical_exponent() / 2.0);
        assert!((ev[0] / m - 1.0).abs() < 1e-8);
        assert!((ev[1] / m - (p.critical_exponent() - 1.0)).abs() < 1e-8);
    }

    #[test]
    fn eigenvalues_do_not_depend_on_the_scale() {
        let p = ProblemParams::new(3, 0.1, 0.5).unwrap();
        let base = SectorEigenproblem::new(p, 0, Normalization::UnitGammaNorm);
        let a = sector_eigenvalues(&base, 3).unwrap();
        let b = sector_eigenvalues(&base.with_scale(0.3).unwrap(), 3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10 * x);
        }
    }

    #[test]
    fn eigenfunctions_are_bubble_and_tangent() {
        let p = ProblemParams::new(4, 0.5, 1.0).unwrap();
        let sol = solve_sector(&SectorEigenproblem::new(p, 0, Normalization::UnitGammaNorm), 2).unwrap();
        let u = Bubble::standard(p, Normalization::UnitGammaNorm).to_radial();
        let z = tangent_generator(&Bubble::standard(p, Normalization::UnitGammaNorm));
        for (f, g) in [(&sol.eigenfunctions[0], &u), (&sol.eigenfunctions[1], &z)] {
            let fg = inner_gamma(f, g).unwrap();
            let ff = gamma_norm_sq_with(f, &QuadratureSpec::default()).unwrap();
            let gg = gamma_norm_sq_with(g, &QuadratureSpec::default()).unwrap();
            assert!((ff - 1.0).abs() < 1e-10);
            let cos = (fg / (ff * gg).sqrt()).abs().min(1.0);
            assert!(cos.acos() < 1e-5, "angle {}", cos.acos());
        }
    }

    #[test]
    fn report_for_two_reference_cases() {
        for (p, want_k) in [
            (ProblemParams::new(3, 0.1, 0.5).unwrap(), 1),
            (ProblemParams::new(4, 0.5, 1.0).unwrap(), 0),
        ] {
            let opts = SpectrumOptions {
                normalization: Normalization::EulerLagrange,
                eigenfunctions: false,
                ..Default::default()
            };
            let r = spectrum_report_with(&p, &opts).unwrap();
            let pc = p.critical_exponent();
            assert!((r.eta1 - 1.0).abs() < 1e-8);
            assert!((r.eta2 - (pc - 1.0)).abs() < 1e-8);
            let want3 = if want_k == 0 { exact(&p, 0, 2) } else { exact(&p, 1, 0) };
            assert!((r.eta3 - want3).abs() < 1e-8 * want3, "{} vs {want3}", r.eta3);
            assert_eq!(r.eta3, r.eta3_distinct);
            assert_eq!(r.kernel_dim, 1);
            assert!(r.alpha > 0.0 && r.alpha < 1.0);
            assert!(r.lambda > pc - 1.0);
            assert!(!r.sector1_is_kernel_value);
        }
    }

    #[test]
    fn lambda_agrees_across_normalizations() {
        let p = ProblemParams::new(5, 1.0, 0.7).unwrap();
        let mut opts = SpectrumOptions {
            eigenfunctions: false,
            ..Default::default()
        };
        let unit = spectrum_report_with(&p, &opts).unwrap();
        opts.normalization = Normalization::EulerLagrange;
        let el = spectrum_report_with(&p, &opts).unwrap();
        assert!((unit.lambda - el.lambda).abs() < 1e-6 * el.lambda);
        assert!((unit.lambda - el.eta3).abs() < 1e-6 * el.lambda);
    }

    #[test]
    fn sector_ground_grows_with_k() {
        let p = ProblemParams::new(3, 0.1, 1.0).unwrap();
        let grounds: Vec<f64> = (0..5)
            .map(|k| sector_eigenvalues(&SectorEigenproblem::new(p, k, Normalization::UnitGammaNorm), 1).unwrap()[0])
            .collect();
        assert!(grounds.windows(2).all(|w| w[1] > w[0]), "{grounds:?}");
    }

    #[test]
    fn linearized_operator_kills_the_tangent() {
        let p = ProblemParams::new(4, 0.5, 1.0).unwrap();
        let z = tangent_generator(&Bubble::standard(p, Normalization::EulerLagrange));
        let lz = apply_linearized(&p, &z, p.critical_exponent() - 1.0, Normalization::EulerLagrange).unwrap();
        for t in [-3.0, -0.5, 0.0, 0.7, 4.0] {
            let scale = z.jet_at(t, p.half_weight()).d2.abs() + 1e-3;
            assert!(lz.value_at(t, p.half_weight() + 2.0).abs() < 1e-12 * scale.max(1.0));
        }
        let zero = apply_linearized(&p, &RadialFunction::zero(p, 0), 1.0, Normalization::EulerLagrange).unwrap();
        assert_eq!(zero.value_at(0.3, 3.0), 0.0);
    }

    #[test]
    fn weight_integral_matches_beta_function() {
        for p in cases() {
            let amp = normalization_constant(&p, Normalization::EulerLagrange).powf(p.critical_exponent() - 2.0);
            let nh = p.dim() as f64 / 2.0;
            // ∫ (2 cosh x)^{−N} dx = 2^{−N} B(N/2, 1/2)
            let beta = gamma_fn(nh).unwrap() * gamma_fn(0.5).unwrap() / gamma_fn(nh + 0.5).unwrap();
            let want = p.sphere_area() * amp.powf(nh) * beta / (2f64.powi(p.dim() as i32) * p.bubble_rate() * p.epsilon());
            let got = weight_admissibility(&p, Normalization::EulerLagrange).unwrap();
            assert!((got - want).abs() < 1e-10 * want);
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let p = ProblemParams::new(3, 0.1, 0.5).unwrap();
        let prob = SectorEigenproblem::new(p, 0, Normalization::EulerLagrange);
        assert!(sector_eigenvalues(&prob, 7).is_err());
        assert!(sector_eigenvalues(&prob, 0).is_err());
        let g = GridSpec {
            t_min: -10.0,
            t_max: 10.0,
            n: 100,
        };
        assert!(prob.with_grid(g).is_err());
        assert!(prob.with_scale(0.0).is_err());
    }

    #[test]
    fn coarse_grid_fails_refinement() {
        let p = ProblemParams::new(3, 0.1, 0.5).unwrap();
        let g = GridSpec {
            t_min: -60.0,
            t_max: 60.0,
            n: 512,
        };
        let prob = SectorEigenproblem::new(p, 0, Normalization::EulerLagrange).with_grid(g).unwrap();
        assert!(matches!(sector_eigenvalues(&prob, 4), Err(Error::Refinement { .. })));
    }
}
