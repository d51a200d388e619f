//! Norms, deficit, energy, Euler–Lagrange residual and the dual norm `Γ`.
//!
//! For `u = r^{−(N−2)/2} φ(ln r) Y_k` with `‖Y_k‖²_{L²(S^{N−1})} = |S^{N−1}|`:
//!
//! ```text
//! ‖u‖_γ²            = |S| ∫ (φ′² + κ_k² φ²) dt,   κ_k² = ε² + λ_k
//! ∫ |u|^p |x|^{−s}  = A_k ∫ |φ|^p dt,            A_k = ∫_S |Y_k|^p
//! ```

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{best_constant, sphere_area, ProblemParams};
use crate::quadrature::{gauss, Layout};
use crate::radial::profile::{Jet, Profile};
use crate::radial::{sort_knots, FunctionKind, QuadratureSpec, RadialFunction};

/// Minimum knot count for second derivatives of sampled inputs.
pub const MIN_RESIDUAL_KNOTS: usize = 128;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeficitReport {
    pub gamma_norm_sq: f64,
    pub hs_norm: f64,
    pub deficit: f64,
    pub mu: f64,
    pub params: ProblemParams,
}

/// `κ_k² = (N−2)²/4 − γ + λ_k`.
pub fn sector_kappa_sq(p: &ProblemParams, k: usize) -> f64 {
    let e = p.epsilon();
    e * e + p.angular_eigenvalue(k)
}

pub fn gamma_norm_sq(u: &RadialFunction) -> Result<f64> {
    gamma_norm_sq_with(u, &QuadratureSpec::default())
}

pub fn gamma_norm_sq_with(u: &RadialFunction, q: &QuadratureSpec) -> Result<f64> {
    inner_gamma_with(u, u, q)
}

pub fn inner_gamma(u: &RadialFunction, v: &RadialFunction) -> Result<f64> {
    inner_gamma_with(u, v, &QuadratureSpec::default())
}

/// `⟨u, v⟩_γ`; different sectors are orthogonal and give exactly 0.
pub fn inner_gamma_with(u: &RadialFunction, v: &RadialFunction, q: &QuadratureSpec) -> Result<f64> {
    check_same_params(u, v)?;
    if u.sector() != v.sector() {
        return Ok(0.0);
    }
    let p = u.params();
    inner_kappa(u, v, sector_kappa_sq(p, u.sector()), q)
}

/// `⟨u, v⟩` with `γ = 0`, the plain `Ḣ¹` product.
pub fn gradient_inner(u: &RadialFunction, v: &RadialFunction, q: &QuadratureSpec) -> Result<f64> {
    check_same_params(u, v)?;
    if u.sector() != v.sector() {
        return Ok(0.0);
    }
    let p = u.params();
    let c = p.half_weight();
    inner_kappa(u, v, c * c + p.angular_eigenvalue(u.sector()), q)
}

fn inner_kappa(u: &RadialFunction, v: &RadialFunction, kappa2: f64, q: &QuadratureSpec) -> Result<f64> {
    q.validate()?;
    let p = u.params();
    let c = p.half_weight();
    let knots = joint_knots(&[u, v]);
    let g = |t: f64| {
        let (a, b) = (u.jet_at(t, c), v.jet_at(t, c));
        a.d1 * b.d1 + kappa2 * a.value * b.value
    };
    Ok(p.sphere_area() * q.integrate(&g, &knots)?)
}

fn check_same_params(u: &RadialFunction, v: &RadialFunction) -> Result<()> {
    if u.params() != v.params() {
        return Err(Error::domain("functions belong to different problem parameters"));
    }
    Ok(())
}

pub(crate) fn joint_knots(us: &[&RadialFunction]) -> Vec<f64> {
    let mut k: Vec<f64> = us.iter().flat_map(|u| u.knots()).collect();
    sort_knots(&mut k);
    k
}

/// `∫ |R|^p r^{N−1−s} dr = ∫ |φ|^p dt`.
pub fn radial_lp_integral(u: &RadialFunction, q: &QuadratureSpec) -> Result<f64> {
    q.validate()?;
    let p = u.params();
    let (c, e) = (p.half_weight(), p.critical_exponent());
    let g = |t: f64| {
        let v = u.value_at(t, c).abs();
        if v == 0.0 {
            0.0
        } else {
            v.powf(e)
        }
    };
    let mut knots = u.knots();
    knots.extend(sign_changes(u, c, q));
    sort_knots(&mut knots);
    q.integrate(&g, &knots)
}

/// Zeros of the profile inside the quadrature window; `|φ|^p` has a kink at each
/// one unless `p` is an even integer, so they go in as panel breaks.
fn sign_changes(u: &RadialFunction, weight: f64, q: &QuadratureSpec) -> Vec<f64> {
    let (mut lo, mut hi) = (q.t_min, q.t_max);
    let k = u.knots();
    if let (Some(&a), Some(&b)) = (k.first(), k.last()) {
        lo = lo.min(a);
        hi = hi.max(b);
    }
    let n = 8 * q.panels();
    let h = (hi - lo) / n as f64;
    let f = |t: f64| u.value_at(t, weight);
    let mut out = Vec::new();
    let (mut a, mut fa) = (lo, f(lo));
    for i in 1..=n {
        let b = lo + i as f64 * h;
        let fb = f(b);
        if fa != 0.0 && fb != 0.0 && (fa < 0.0) != (fb < 0.0) {
            let (mut x0, mut x1, mut f0) = (a, b, fa);
            for _ in 0..60 {
                let m = 0.5 * (x0 + x1);
                let fm = f(m);
                if fm == 0.0 {
                    x0 = m;
                    x1 = m;
                    break;
                }
                if (fm < 0.0) == (f0 < 0.0) {
                    x0 = m;
                    f0 = fm;
                } else {
                    x1 = m;
                }
            }
            out.push(0.5 * (x0 + x1));
        }
        a = b;
        fa = fb;
    }
    out
}

/// `∫_{S^{N−1}} |Y_k|^p dσ` for the zonal harmonic with mean square one.
pub fn angular_lp_factor(dim: usize, k: usize, p: f64) -> f64 {
    if k == 0 {
        return sphere_area(dim);
    }
    let alpha = 0.5 * (dim as f64 - 2.0);
    let pieces = zonal_pieces(dim, k);
    let wsum = |f: &dyn Fn(f64) -> f64| -> f64 {
        pieces
            .windows(2)
            .map(|w| gauss(32).integrate(w[0], w[1], |th| f(th) * th.sin().powf(dim as f64 - 2.0)))
            .sum()
    };
    let sub = sphere_area(dim - 1);
    let norm_sq = sub * wsum(&|th| gegenbauer(k, alpha, th.cos()).powi(2)) / sphere_area(dim);
    let scale = norm_sq.sqrt();
    sub * wsum(&|th| (gegenbauer(k, alpha, th.cos()) / scale).abs().powf(p))
}

/// Zonal harmonic of order `k` normalized to mean square one, as a function of the polar angle.
pub fn zonal_harmonic(dim: usize, k: usize, theta: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let alpha = 0.5 * (dim as f64 - 2.0);
    let pieces = zonal_pieces(dim, k);
    let norm_sq: f64 = pieces
        .windows(2)
        .map(|w| {
            gauss(32).integrate(w[0], w[1], |th| {
                gegenbauer(k, alpha, th.cos()).powi(2) * th.sin().powf(dim as f64 - 2.0)
            })
        })
        .sum::<f64>()
        * sphere_area(dim - 1)
        / sphere_area(dim);
    gegenbauer(k, alpha, theta.cos()) / norm_sq.sqrt()
}

/// `[0, π]` split at the zeros of `C_k^{α}(cos θ)`.
fn zonal_pieces(dim: usize, k: usize) -> Vec<f64> {
    let alpha = 0.5 * (dim as f64 - 2.0);
    let pi = std::f64::consts::PI;
    let m = 4000;
    let mut out = vec![0.0];
    let f = |th: f64| gegenbauer(k, alpha, th.cos());
    for i in 0..m {
        let (mut a, mut b) = (pi * i as f64 / m as f64, pi * (i + 1) as f64 / m as f64);
        let (mut fa, fb) = (f(a), f(b));
        if fa == 0.0 && i > 0 {
            out.push(a);
            continue;
        }
        if fa * fb < 0.0 {
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                let fm = f(mid);
                if fa * fm <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            out.push(0.5 * (a + b));
        }
    }
    out.push(pi);
    out
}

/// Gegenbauer polynomial `C_k^{α}(x)`; Chebyshev-like `α = 0` is not needed since `N ≥ 3`.
fn gegenbauer(k: usize, alpha: f64, x: f64) -> f64 {
    let (mut c0, mut c1) = (1.0, 2.0 * alpha * x);
    if k == 0 {
        return c0;
    }
    for n in 2..=k {
        let nf = n as f64;
        let c2 = (2.0 * x * (nf + alpha - 1.0) * c1 - (nf + 2.0 * alpha - 2.0) * c0) / nf;
        c0 = c1;
        c1 = c2;
    }
    c1
}

pub fn hs_norm(u: &RadialFunction) -> Result<f64> {
    hs_norm_with(u, &QuadratureSpec::default())
}

/// `(∫ |u|^{2*(s)} |x|^{−s} dx)^{1/2*(s)}` including the angular factor of the sector.
pub fn hs_norm_with(u: &RadialFunction, q: &QuadratureSpec) -> Result<f64> {
    let p = u.params();
    let e = p.critical_exponent();
    let ang = angular_lp_factor(p.dim(), u.sector(), e);
    Ok((ang * radial_lp_integral(u, q)?).powf(1.0 / e))
}

pub fn deficit(u: &RadialFunction) -> Result<DeficitReport> {
    deficit_with(u, &QuadratureSpec::default())
}

/// `‖u‖_γ² − μ ‖u‖²_{L^{2*(s)}(|x|^{−s})}` for radial `u`.
pub fn deficit_with(u: &RadialFunction, q: &QuadratureSpec) -> Result<DeficitReport> {
    if u.sector() != 0 {
        return Err(Error::domain("the deficit is defined here for radial (sector 0) functions"));
    }
    let p = *u.params();
    let g = gamma_norm_sq_with(u, q)?;
    let h = hs_norm_with(u, q)?;
    let mu = best_constant(&p);
    Ok(DeficitReport {
        gamma_norm_sq: g,
        hs_norm: h,
        deficit: g - mu * h * h,
        mu,
        params: p,
    })
}

pub fn energy(u: &RadialFunction) -> Result<f64> {
    energy_with(u, &QuadratureSpec::default())
}

/// `½‖u‖_γ² − (1/2*(s)) ∫ |u|^{2*(s)} |x|^{−s}`.
pub fn energy_with(u: &RadialFunction, q: &QuadratureSpec) -> Result<f64> {
    let p = u.params();
    let e = p.critical_exponent();
    let ang = angular_lp_factor(p.dim(), u.sector(), e);
    Ok(0.5 * gamma_norm_sq_with(u, q)? - ang * radial_lp_integral(u, q)? / e)
}

/// Right-hand side profile `F = φ″ − κ²φ + c_nl |φ|^{p−2}φ` at weight `(N+2)/2`.
#[derive(Debug)]
struct ResidualProfile {
    u: RadialFunction,
    kappa2: f64,
    power: f64,
    nonlinear: f64,
}

impl ResidualProfile {
    fn eval(&self, t: f64) -> f64 {
        let c = self.u.params().half_weight();
        let j = self.u.jet_at(t, c);
        let v = j.value;
        let nl = if v == 0.0 {
            0.0
        } else {
            v.signum() * v.abs().powf(self.power - 1.0)
        };
        j.d2 - self.kappa2 * v + self.nonlinear * nl
    }
}

impl Profile for ResidualProfile {
    fn jet(&self, t: f64) -> Jet {
        fd_jet(|x| self.eval(x), t)
    }

    fn value(&self, t: f64) -> f64 {
        self.eval(t)
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        self.u.profile().breakpoints(out);
    }
}

pub(crate) fn fd_jet(f: impl Fn(f64) -> f64, t: f64) -> Jet {
    const H: f64 = 2e-3;
    let v: [f64; 5] = std::array::from_fn(|i| f(t + (i as f64 - 2.0) * H));
    Jet {
        value: v[2],
        d1: (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * H),
        d2: (-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) / (12.0 * H * H),
    }
}

pub(crate) fn check_resolution(u: &RadialFunction) -> Result<()> {
    if u.kind() == FunctionKind::Sampled {
        let n = u.knots().len();
        if n < MIN_RESIDUAL_KNOTS {
            return Err(Error::Resolution(format!(
                "second derivatives of sampled data need at least {MIN_RESIDUAL_KNOTS} points, got {n}"
            )));
        }
    }
    Ok(())
}

/// `Δu + γu/|x|² + |u|^{2*(s)−2}u/|x|^s` on the sector of `u` (for `u ≥ 0` the
/// last term is `u^{2*(s)−1}/|x|^s`).
pub fn el_residual(u: &RadialFunction) -> Result<RadialFunction> {
    check_resolution(u)?;
    let p = *u.params();
    let prof = ResidualProfile {
        u: u.clone(),
        kappa2: sector_kappa_sq(&p, u.sector()),
        power: p.critical_exponent(),
        nonlinear: 1.0,
    };
    Ok(RadialFunction::from_profile(
        p,
        u.sector(),
        p.half_weight() + 2.0,
        Arc::new(prof),
        None,
        FunctionKind::ClosedForm,
    ))
}

/// Which inner product the dual norm is taken against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DualInner {
    /// `⟨·,·⟩_γ`.
    Gamma,
    /// Plain `∫ ∇u·∇v`; a reference option.
    Gradient,
}

pub fn dual_norm(f: &RadialFunction) -> Result<f64> {
    dual_norm_with(f, &QuadratureSpec::default(), DualInner::Gamma)
}

/// `sup ⟨f, φ⟩_{L²} / ‖φ‖` over the sector of `f`, evaluated with the exact
/// Green kernel `e^{−κ|t−t′|}/(2κ)` of `−d²/dt² + κ²`.
pub fn dual_norm_with(f: &RadialFunction, q: &QuadratureSpec, inner: DualInner) -> Result<f64> {
    q.validate()?;
    let p = *f.params();
    let kappa = green_kappa(&p, f.sector(), inner);
    let cw = p.half_weight() + 2.0;
    let rhs = |t: f64| f.value_at(t, cw);
    let layout = green_layout(&rhs, f, q)?;
    let mut acc = 0.0;
    let mut a_left = 0.0;
    for seg in &layout.segments {
        let rule = gauss(seg.order);
        let half = 0.5 * (seg.b - seg.a);
        let ts: Vec<f64> = rule.nodes.iter().map(|x| seg.a + half * (1.0 + x)).collect();
        let fv: Vec<f64> = ts.iter().map(|&t| rhs(t)).collect();
        let g: Vec<f64> = ts
            .iter()
            .zip(&fv)
            .map(|(&t, &v)| v * (kappa * (t - seg.a)).exp())
            .collect();
        for (i, &t) in ts.iter().enumerate() {
            let cum: f64 = rule.integ[i].iter().zip(&g).map(|(s, v)| s * v).sum::<f64>() * half;
            let a_t = (-kappa * (t - seg.a)).exp() * (a_left + cum);
            acc += half * rule.weights[i] * fv[i] * a_t;
        }
        let total: f64 = rule.weights.iter().zip(&g).map(|(w, v)| w * v).sum::<f64>() * half;
        a_left = (-kappa * (seg.b - seg.a)).exp() * (a_left + total);
    }
    let sq = p.sphere_area() / kappa * acc;
    if !sq.is_finite() {
        return Err(Error::accuracy("dual norm is not finite", f64::INFINITY));
    }
    Ok(sq.max(0.0).sqrt())
}

fn green_kappa(p: &ProblemParams, k: usize, inner: DualInner) -> f64 {
    match inner {
        DualInner::Gamma => sector_kappa_sq(p, k).sqrt(),
        DualInner::Gradient => {
            let c = p.half_weight();
            (c * c + p.angular_eigenvalue(k)).sqrt()
        }
    }
}

/// Window wide enough that the right-hand side is negligible at both edges.
fn green_layout(rhs: &dyn Fn(f64) -> f64, f: &RadialFunction, q: &QuadratureSpec) -> Result<Layout> {
    let knots = f.knots();
    let width = (q.t_max - q.t_min) / q.panels() as f64;
    let (mut lo, mut hi) = (q.t_min, q.t_max);
    if let (Some(&a), Some(&b)) = (knots.first(), knots.last()) {
        lo = lo.min(a);
        hi = hi.max(b);
    }
    let mut peak = 0.0f64;
    for i in 0..=400 {
        let v = rhs(lo + (hi - lo) * i as f64 / 400.0);
        if !v.is_finite() {
            return Err(Error::Extrapolation(
                "right-hand side is not finite inside the window; sampled data need decay hints".into(),
            ));
        }
        peak = peak.max(v.abs());
    }
    let small = |t: f64| -> Result<bool> {
        let v = rhs(t);
        if !v.is_finite() {
            return Err(Error::Extrapolation(format!(
                "right-hand side is not finite at t = {t:.2}; sampled data need decay hints"
            )));
        }
        Ok(v.abs() <= 1e-14 * peak)
    };
    const LIMIT: f64 = 650.0;
    while !small(lo)? {
        if lo <= -LIMIT {
            return Err(Error::accuracy(
                "right-hand side does not decay as r → 0",
                rhs(lo).abs() / peak.max(1e-300),
            ));
        }
        lo = (lo - (hi - lo).max(20.0)).max(-LIMIT);
    }
    while !small(hi)? {
        if hi >= LIMIT {
            return Err(Error::accuracy(
                "right-hand side does not decay as r → ∞",
                rhs(hi).abs() / peak.max(1e-300),
            ));
        }
        hi = (hi + (hi - lo).max(20.0)).min(LIMIT);
    }
    let panels = ((hi - lo) / width).ceil() as usize;
    Ok(Layout::new(lo, hi, panels, &knots))
}

/// Solves `−Δw − (γ − λ_k) w/|x|² = f` with the Green kernel and samples `w` at `t_grid`.
///
/// The returned samples carry the exact derivatives `w′ = (B − A)/2` and
/// `w″ = κ² w − F`, with `A`, `B` the left and right kernel integrals.
pub fn green_solve(f: &RadialFunction, t_grid: &[f64], q: &QuadratureSpec) -> Result<RadialFunction> {
    q.validate()?;
    let p = *f.params();
    let kappa = green_kappa(&p, f.sector(), DualInner::Gamma);
    let cw = p.half_weight() + 2.0;
    let rhs = |t: f64| f.value_at(t, cw);
    let mut layout = green_layout(&rhs, f, q)?;
    let (glo, ghi) = (
        t_grid.first().copied().unwrap_or(0.0),
        t_grid.last().copied().unwrap_or(0.0),
    );
    if glo < layout.lo() || ghi > layout.hi() {
        let width = (q.t_max - q.t_min) / q.panels() as f64;
        let (lo, hi) = (layout.lo().min(glo - 1.0), layout.hi().max(ghi + 1.0));
        layout = Layout::new(lo, hi, ((hi - lo) / width).ceil() as usize, &f.knots());
    }
    let segs = &layout.segments;
    let rule = gauss(16);
    let seg_int = |a: f64, b: f64, decay_from: f64, sign: f64| -> f64 {
        rule.integrate(a, b, |t| rhs(t) * (-kappa * sign * (decay_from - t)).exp())
    };
    // A at left edges, B at right edges of every segment
    let mut a_edge = vec![0.0; segs.len() + 1];
    for (j, s) in segs.iter().enumerate() {
        a_edge[j + 1] = (-kappa * (s.b - s.a)).exp() * a_edge[j] + seg_int(s.a, s.b, s.b, 1.0);
    }
    let mut b_edge = vec![0.0; segs.len() + 1];
    for (j, s) in segs.iter().enumerate().rev() {
        b_edge[j] = (-kappa * (s.b - s.a)).exp() * b_edge[j + 1] + seg_int(s.a, s.b, s.a, -1.0);
    }
    let mut vals = Vec::with_capacity(t_grid.len());
    let mut d1 = Vec::with_capacity(t_grid.len());
    let mut d2 = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let j = segs.partition_point(|s| s.b < t).min(segs.len() - 1);
        let s = segs[j];
        let a = (-kappa * (t - s.a)).exp() * a_edge[j] + seg_int(s.a, t, t, 1.0);
        let b = (-kappa * (s.b - t)).exp() * b_edge[j + 1] + seg_int(t, s.b, t, -1.0);
        let w = (a + b) / (2.0 * kappa);
        vals.push(w);
        d1.push(0.5 * (b - a));
        d2.push(kappa * kappa * w - rhs(t));
    }
    RadialFunction::from_ef_samples(p, f.sector(), t_grid.to_vec(), vals, d1, Some(d2), None)
}

/// `u(r, θ) = Σ_k R_k(r) Y_k(θ)`: a finite sum of zonal sectors.
#[derive(Clone, Debug)]
pub struct AxisymmetricFunction {
    pub parts: Vec<RadialFunction>,
}

impl AxisymmetricFunction {
    pub fn new(parts: Vec<RadialFunction>) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::domain("no sectors given"))?;
        if parts.iter().any(|u| u.params() != first.params()) {
            return Err(Error::domain("all sectors must share the problem parameters"));
        }
        Ok(Self { parts })
    }

    pub fn params(&self) -> &ProblemParams {
        self.parts[0].params()
    }

    pub fn gamma_norm_sq(&self, q: &QuadratureSpec) -> Result<f64> {
        let mut total = 0.0;
        for (i, u) in self.parts.iter().enumerate() {
            for v in &self.parts[i..] {
                let x = inner_gamma_with(u, v, q)?;
                total += if std::ptr::eq(u, v) { x } else { 2.0 * x };
            }
        }
        Ok(total)
    }

    /// `∫ |u|^{2*(s)} |x|^{−s} dx` by tensor quadrature in `(ln r, θ)`.
    pub fn lp_integral(&self, q: &QuadratureSpec) -> Result<f64> {
        q.validate()?;
        let p = *self.params();
        let (c, e, dim) = (p.half_weight(), p.critical_exponent(), p.dim());
        let rule = gauss(64);
        let pi = std::f64::consts::PI;
        let angles: Vec<(f64, Vec<f64>)> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| {
                let th = 0.5 * pi * (1.0 + x);
                let wt = 0.5 * pi * w * th.sin().powf(dim as f64 - 2.0);
                (wt, self.parts.iter().map(|u| zonal_harmonic(dim, u.sector(), th)).collect())
            })
            .collect();
        let refs: Vec<&RadialFunction> = self.parts.iter().collect();
        let knots = joint_knots(&refs);
        let g = |t: f64| {
            let phis: Vec<f64> = self.parts.iter().map(|u| u.value_at(t, c)).collect();
            angles
                .iter()
                .map(|(w, ys)| {
                    let v: f64 = phis.iter().zip(ys).map(|(a, b)| a * b).sum();
                    w * v.abs().powf(e)
                })
                .sum()
        };
        Ok(sphere_area(dim - 1) * q.integrate(&g, &knots)?)
    }
}

/// Deficit of an axisymmetric function.
pub fn deficit_axisymmetric(u: &AxisymmetricFunction, q: &QuadratureSpec) -> Result<DeficitReport> {
    let p = *u.params();
    let g = u.gamma_norm_sq(q)?;
    let h = u.lp_integral(q)?.powf(1.0 / p.critical_exponent());
    let mu = best_constant(&p);
    Ok(DeficitReport {
        gamma_norm_sq: g,
        hs_norm: h,
        deficit: g - mu * h * h,
        mu,
        params: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::{Bubble, Normalization};

    #[test]
    fn zonal_harmonics_are_normalized() {
        let th = 0.4f64;
        assert!((zonal_harmonic(3, 1, th) - 3f64.sqrt() * th.cos()).abs() < 1e-13);
        // p = 2 recovers the mean-square normalization
        for (n, k) in [(3, 1), (3, 2), (4, 1), (5, 3)] {
            let a = angular_lp_factor(n, k, 2.0);
            assert!((a - sphere_area(n)).abs() < 1e-11 * a, "N={n} k={k}");
        }
        // ∫_{S²} |√3 cos θ|^4 = 2π · 9 · 2/5
        let a4 = angular_lp_factor(3, 1, 4.0);
        assert!((a4 - 2.0 * std::f64::consts::PI * 9.0 * 0.4).abs() < 1e-11);
    }

    #[test]
    fn unit_bubble_has_unit_norm() {
        let p = ProblemParams::new(4, 0.5, 1.0).unwrap();
        let u = Bubble::standard(p, Normalization::UnitGammaNorm).to_radial();
        assert!((gamma_norm_sq(&u).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cross_sector_product_is_exactly_zero() {
        let p = ProblemParams::new(3, 0.1, 0.5).unwrap();
        let u = RadialFunction::log_gaussian(p, 0, 1.0, 0.0, 1.0);
        let v = RadialFunction::log_gaussian(p, 1, 1.0, 0.0, 1.0);
        assert_eq!(inner_gamma(&u, &v).unwrap(), 0.0);
    }

    #[test]
    fn sampled_residual_needs_resolution() {
        let p = ProblemParams::new(3, 0.1, 0.5).unwrap();
        let radii = crate::radial::log_grid(1e-2, 1e2, 40);
        let vals: Vec<f64> = radii.iter().map(|r| 1.0 / (1.0 + r)).collect();
        let u = RadialFunction::from_samples(p, 0, &radii, &vals, None).unwrap();
        assert!(matches!(el_residual(&u), Err(Error::Resolution(_))));
    }
}
