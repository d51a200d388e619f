//! One-sector functions `u(x) = R(|x|) Y_k(x/|x|)` and quadrature against the
//! singular weights of the problem.
//!
//! A [`RadialFunction`] stores `R` through an Emden–Fowler profile:
//! `R(r) = r^{−w} φ(ln r)`, where the weight `w` is `(N−2)/2` for ordinary
//! functions and `(N+2)/2` for right-hand sides such as residuals. The
//! harmonic `Y_k` is the zonal one, normalized to mean square one on the sphere.

mod io;
pub mod profile;
mod sampled;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use io::{read_csv, read_csv_str, write_csv};
pub use profile::{Jet, Profile};
pub use sampled::{Sampled, MIN_SAMPLES};

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::quadrature::{integrate_line, Integral, Layout, TailPolicy, PANEL_ORDER};

use profile::{Combination, FnProfile, GaussianProfile, Reweighted, Shifted, ZeroProfile};

/// Power-law decay `R(r) ~ r^{−at_zero}` as `r → 0` and `R(r) ~ r^{−at_infinity}` as `r → ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayHints {
    pub at_zero: f64,
    pub at_infinity: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    ClosedForm,
    Sampled,
}

/// Quadrature on `t = ln r`: `n` Gauss–Legendre nodes on `[t_min, t_max]` plus tails.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
    pub tail_policy: TailPolicy,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            t_min: -34.0,
            t_max: 34.0,
            n: 2048,
            tail_policy: TailPolicy::AnalyticPowerlaw,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_min < self.t_max) || !self.t_min.is_finite() || !self.t_max.is_finite() {
            return Err(Error::domain("quadrature window needs t_min < t_max"));
        }
        if self.t_min < -650.0 || self.t_max > 650.0 {
            return Err(Error::domain("quadrature window must stay inside |t| ≤ 650"));
        }
        if self.n < 64 {
            return Err(Error::domain(format!("quadrature needs n ≥ 64 nodes, got {}", self.n)));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::domain("rel_tol must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn panels(&self) -> usize {
        self.n.div_ceil(PANEL_ORDER).max(4)
    }

    pub(crate) fn layout(&self, knots: &[f64]) -> Layout {
        Layout::new(self.t_min, self.t_max, self.panels(), knots)
    }

    /// `∫ g(t) dt` over the line.
    pub(crate) fn integrate(&self, g: &(dyn Fn(f64) -> f64 + Sync), knots: &[f64]) -> Result<f64> {
        Ok(integrate_line(g, &self.layout(knots), self.tail_policy, self.rel_tol, false)?.value)
    }

    pub(crate) fn integrate_with_error(
        &self,
        g: &(dyn Fn(f64) -> f64 + Sync),
        knots: &[f64],
    ) -> Result<Integral> {
        integrate_line(g, &self.layout(knots), self.tail_policy, self.rel_tol, true)
    }
}

/// A function of one spherical-harmonic sector, closed-form or sampled.
#[derive(Clone, Debug)]
pub struct RadialFunction {
    params: ProblemParams,
    sector: usize,
    weight: f64,
    profile: Arc<dyn Profile>,
    hints: Option<DecayHints>,
    kind: FunctionKind,
}

impl RadialFunction {
    /// Wraps an Emden–Fowler profile at weight `w`: `R(r) = r^{−w} φ(ln r)`.
    pub fn from_profile(
        params: ProblemParams,
        sector: usize,
        weight: f64,
        profile: Arc<dyn Profile>,
        hints: Option<DecayHints>,
        kind: FunctionKind,
    ) -> Self {
        Self {
            params,
            sector,
            weight,
            profile,
            hints,
            kind,
        }
    }

    pub fn zero(params: ProblemParams, sector: usize) -> Self {
        Self::from_profile(
            params,
            sector,
            params.half_weight(),
            Arc::new(ZeroProfile),
            None,
            FunctionKind::ClosedForm,
        )
    }

    /// Closed-form `R(r)` given as a closure, stored at Emden–Fowler weight `weight`.
    pub fn from_fn(
        params: ProblemParams,
        sector: usize,
        weight: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        hints: Option<DecayHints>,
    ) -> Self {
        Self::from_profile(
            params,
            sector,
            weight,
            Arc::new(FnProfile {
                f: Box::new(f),
                weight,
            }),
            hints,
            FunctionKind::ClosedForm,
        )
    }

    /// `amp · exp(−(ln r − center)²/(2 width²)) · r^{−(N−2)/2}`, a smooth bump in log-radius.
    pub fn log_gaussian(params: ProblemParams, sector: usize, amp: f64, center: f64, width: f64) -> Self {
        Self::from_profile(
            params,
            sector,
            params.half_weight(),
            Arc::new(GaussianProfile { amp, center, width }),
            None,
            FunctionKind::ClosedForm,
        )
    }

    /// Samples `(r_i, R(r_i))` with strictly increasing positive radii.
    pub fn from_samples(
        params: ProblemParams,
        sector: usize,
        radii: &[f64],
        values: &[f64],
        hints: Option<DecayHints>,
    ) -> Result<Self> {
        if radii.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::domain("sample radii must be positive"));
        }
        let w = params.half_weight();
        let t: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let phi: Vec<f64> = radii.iter().zip(values).map(|(r, v)| r.powf(w) * v).collect();
        let (lr, rr) = continuation_rates(w, hints);
        let profile = Sampled::new(t, phi, lr, rr)?;
        Ok(Self::from_profile(params, sector, w, Arc::new(profile), hints, FunctionKind::Sampled))
    }

    /// Sampled Emden–Fowler profile at weight `(N−2)/2` with known derivatives.
    pub(crate) fn from_ef_samples(
        params: ProblemParams,
        sector: usize,
        t: Vec<f64>,
        phi: Vec<f64>,
        d1: Vec<f64>,
        d2: Option<Vec<f64>>,
        hints: Option<DecayHints>,
    ) -> Result<Self> {
        let w = params.half_weight();
        let (lr, rr) = continuation_rates(w, hints);
        let profile = Sampled::with_derivatives(t, phi, d1, d2, lr, rr)?;
        Ok(Self::from_profile(params, sector, w, Arc::new(profile), hints, FunctionKind::Sampled))
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn sector(&self) -> usize {
        self.sector
    }

    /// `λ_k = k² + (N−2)k`.
    pub fn angular_eigenvalue(&self) -> f64 {
        self.params.angular_eigenvalue(self.sector)
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn hints(&self) -> Option<DecayHints> {
        self.hints
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn profile(&self) -> &Arc<dyn Profile> {
        &self.profile
    }

    /// Sorted knots of the sampled parts, if any.
    pub fn knots(&self) -> Vec<f64> {
        let mut k = Vec::new();
        self.profile.breakpoints(&mut k);
        sort_knots(&mut k);
        k
    }

    /// Jet of `e^{wt} R(e^t)` at the requested weight `w`.
    pub fn jet_at(&self, t: f64, weight: f64) -> Jet {
        self.profile.jet(t).times_exp(weight - self.weight, t)
    }

    /// Value of `e^{wt} R(e^t)`.
    pub fn value_at(&self, t: f64, weight: f64) -> f64 {
        let v = self.profile.value(t);
        if weight == self.weight || v == 0.0 {
            v
        } else {
            v * ((weight - self.weight) * t).exp()
        }
    }

    /// Emden–Fowler jet `φ(t) = r^{(N−2)/2} R(r)`.
    pub fn ef_jet(&self, t: f64) -> Jet {
        self.jet_at(t, self.params.half_weight())
    }

    /// `R(r)`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::domain(format!("radius must be positive and finite, got {r}")));
        }
        let t = r.ln();
        let v = self.profile.value(t);
        if !v.is_finite() {
            return Err(self.outside(r));
        }
        Ok(if v == 0.0 { 0.0 } else { v * (-self.weight * t).exp() })
    }

    /// `R′(r)`.
    pub fn derivative(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::domain(format!("radius must be positive and finite, got {r}")));
        }
        let t = r.ln();
        let j = self.profile.jet(t);
        if !j.is_finite() {
            return Err(self.outside(r));
        }
        Ok((j.d1 - self.weight * j.value) * (-(self.weight + 1.0) * t).exp())
    }

    fn outside(&self, r: f64) -> Error {
        Error::Extrapolation(format!(
            "r = {r:e} lies outside the sampled range and no decay hints were given"
        ))
    }

    /// `c · u`.
    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.profile = Arc::new(Combination {
            terms: vec![(c, self.profile.clone())],
        });
        out
    }

    /// `Σ c_i u_i`; all terms must share the parameters and the sector.
    pub fn linear_combination(terms: &[(f64, &RadialFunction)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::domain("empty linear combination"))?
            .1;
        let w = first.weight;
        let mut hints: Option<DecayHints> = None;
        let mut any_sampled_without = false;
        let mut kind = FunctionKind::ClosedForm;
        let mut parts: Vec<(f64, Arc<dyn Profile>)> = Vec::with_capacity(terms.len());
        for &(c, u) in terms {
            if u.params != first.params || u.sector != first.sector {
                return Err(Error::domain(
                    "linear combinations need equal parameters and sector",
                ));
            }
            if u.kind == FunctionKind::Sampled {
                kind = FunctionKind::Sampled;
                any_sampled_without |= u.hints.is_none();
            }
            if let Some(h) = u.hints {
                hints = Some(match hints {
                    None => h,
                    Some(g) => DecayHints {
                        at_zero: g.at_zero.max(h.at_zero),
                        at_infinity: g.at_infinity.min(h.at_infinity),
                    },
                });
            }
            let p = if u.weight == w {
                u.profile.clone()
            } else {
                Arc::new(Reweighted {
                    inner: u.profile.clone(),
                    sigma: w - u.weight,
                }) as Arc<dyn Profile>
            };
            parts.push((c, p));
        }
        if any_sampled_without {
            hints = None;
        }
        Ok(Self {
            params: first.params,
            sector: first.sector,
            weight: w,
            profile: Arc::new(Combination { terms: parts }),
            hints,
            kind,
        })
    }

    pub fn add(&self, other: &RadialFunction) -> Result<Self> {
        Self::linear_combination(&[(1.0, self), (1.0, other)])
    }

    pub fn sub(&self, other: &RadialFunction) -> Result<Self> {
        Self::linear_combination(&[(1.0, self), (-1.0, other)])
    }

    /// `T_λ u(x) = λ^{−(N−2)/2} u(x/λ)`: a shift by `ln λ` of the Emden–Fowler profile.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("dilation needs λ > 0, got {lambda}")));
        }
        let mut out = self.clone();
        // at weight w the profile picks up λ^{w − (N−2)/2}
        let factor = lambda.powf(self.weight - self.params.half_weight());
        out.profile = Arc::new(Shifted {
            inner: self.profile.clone(),
            shift: lambda.ln(),
            factor,
        });
        Ok(out)
    }

    /// Same function with the parameters replaced (e.g. to read it in another problem).
    pub fn with_params(&self, params: ProblemParams) -> Self {
        let mut out = self.clone();
        let shift = params.half_weight() - self.params.half_weight();
        if shift != 0.0 {
            out.profile = Arc::new(Reweighted {
                inner: self.profile.clone(),
                sigma: shift,
            });
            out.weight = self.weight + shift;
        }
        out.params = params;
        out
    }
}

fn continuation_rates(weight: f64, hints: Option<DecayHints>) -> (Option<f64>, Option<f64>) {
    match hints {
        Some(h) => (Some(weight - h.at_zero), Some(weight - h.at_infinity)),
        None => (None, None),
    }
}

pub(crate) fn sort_knots(k: &mut Vec<f64>) {
    k.retain(|x| x.is_finite());
    k.sort_by(|a, b| a.partial_cmp(b).expect("finite knots"));
    k.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
}

/// `∫_0^∞ f(r) r^{weight_exponent} dr` through `r = e^t`.
///
/// With hints, integrability at both ends is checked first: the integral
/// diverges unless `weight_exponent + 1 − at_zero > 0` and
/// `weight_exponent + 1 − at_infinity < 0`.
pub fn integrate_radial(
    f: &(dyn Fn(f64) -> f64 + Sync),
    weight_exponent: f64,
    hints: Option<DecayHints>,
    q: &QuadratureSpec,
) -> Result<f64> {
    Ok(integrate_radial_with_error(f, weight_exponent, hints, q)?.value)
}

pub fn integrate_radial_with_error(
    f: &(dyn Fn(f64) -> f64 + Sync),
    weight_exponent: f64,
    hints: Option<DecayHints>,
    q: &QuadratureSpec,
) -> Result<Integral> {
    q.validate()?;
    let e = weight_exponent + 1.0;
    if let Some(h) = hints {
        if e - h.at_zero <= 0.0 {
            return Err(Error::accuracy("integrand is not integrable at r = 0", f64::INFINITY));
        }
        if e - h.at_infinity >= 0.0 {
            return Err(Error::accuracy("integrand is not integrable at r = ∞", f64::INFINITY));
        }
    }
    let g = |t: f64| {
        let v = f(t.exp());
        if v == 0.0 {
            0.0
        } else {
            v * (e * t).exp()
        }
    };
    q.integrate_with_error(&g, &[])
}

/// Samples `u` on the given radii. Values and slopes are taken from `u` itself,
/// so resampling on the same grid is idempotent.
pub fn resample(u: &RadialFunction, radii: &[f64]) -> Result<RadialFunction> {
    if radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::domain("resampling radii must be positive"));
    }
    let w = u.params.half_weight();
    let t: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let jets: Vec<Jet> = t.iter().map(|&x| u.jet_at(x, w)).collect();
    if jets.iter().any(|j| !j.is_finite()) {
        return Err(Error::Extrapolation(
            "resampling grid leaves the sampled range and no decay hints were given".into(),
        ));
    }
    let hints = u.hints;
    RadialFunction::from_ef_samples(
        u.params,
        u.sector,
        t,
        jets.iter().map(|j| j.value).collect(),
        jets.iter().map(|j| j.d1).collect(),
        Some(jets.iter().map(|j| j.d2).collect()),
        hints,
    )
}

/// `n` log-spaced radii on `[r_min, r_max]`.
pub fn log_grid(r_min: f64, r_max: f64, n: usize) -> Vec<f64> {
    let (a, b) = (r_min.ln(), r_max.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> ProblemParams {
        ProblemParams::new(3, 0.1, 0.5).unwrap()
    }

    #[test]
    fn gamma_integral() {
        let q = QuadratureSpec::default();
        let v = integrate_radial(&|r: f64| (-r).exp(), 2.0, None, &q).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn indicator_integral() {
        // the jump at t = 0 sits on a panel boundary
        let q = QuadratureSpec::default();
        let v = integrate_radial(&|r: f64| if r < 1.0 { 1.0 } else { 0.0 }, 2.0, None, &q).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn divergence_from_hints() {
        let q = QuadratureSpec::default();
        let h = DecayHints {
            at_zero: 3.5,
            at_infinity: 5.0,
        };
        assert!(integrate_radial(&|r: f64| r.powf(-3.5) / (1.0 + r * r), 2.0, Some(h), &q).is_err());
    }

    #[test]
    fn quadrature_spec_validation() {
        let mut q = QuadratureSpec::default();
        q.n = 32;
        assert!(q.validate().is_err());
        let mut q = QuadratureSpec::default();
        q.t_min = 1.0;
        q.t_max = 1.0;
        assert!(q.validate().is_err());
    }

    #[test]
    fn sampled_roundtrip_and_extrapolation() {
        let p = p3();
        let radii = log_grid(1e-3, 1e3, 64);
        let vals: Vec<f64> = radii.iter().map(|r| 1.0 / (1.0 + r * r)).collect();
        let u = RadialFunction::from_samples(p, 0, &radii, &vals, None).unwrap();
        assert!((u.eval(radii[10]).unwrap() - vals[10]).abs() < 1e-15);
        assert!(matches!(u.eval(1e4), Err(Error::Extrapolation(_))));
        assert!(matches!(u.eval(-1.0), Err(Error::Domain(_))));
        let h = DecayHints {
            at_zero: 0.0,
            at_infinity: 2.0,
        };
        let u = RadialFunction::from_samples(p, 0, &radii, &vals, Some(h)).unwrap();
        let far = u.eval(1e5).unwrap();
        assert!((far - 1e-10).abs() < 1e-15, "{far}");
    }

    #[test]
    fn dilation_is_a_profile_shift() {
        let p = p3();
        let u = RadialFunction::log_gaussian(p, 0, 1.0, 0.2, 0.7);
        let lam = 2.5;
        let v = u.dilate(lam).unwrap();
        let c = p.half_weight();
        for r in [0.1, 0.9, 3.0] {
            let want = lam.powf(-c) * u.eval(r / lam).unwrap();
            assert!((v.eval(r).unwrap() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_differences() {
        let p = p3();
        let u = RadialFunction::from_fn(p, 0, p.half_weight(), |r: f64| (-r).exp() / (1.0 + r), None);
        for r in [0.2, 1.0, 4.0] {
            let h = 1e-5 * r;
            let fd = (u.eval(r + h).unwrap() - u.eval(r - h).unwrap()) / (2.0 * h);
            assert!((u.derivative(r).unwrap() - fd).abs() < 1e-8);
        }
    }
}
