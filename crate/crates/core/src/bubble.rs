//! The extremal family `c U^λ`, with `U^λ(x) = λ^{(N−2)/2} U(λx)`.
//!
//! In Emden–Fowler form the bubble is `C (2 cosh(a ε (t + ln λ)))^{−1/a}` with
//! `a = (2−s)/(N−2)`, so a dilation is a translation in `t`. The dilation
//! `T_λ u(x) = λ^{−(N−2)/2} u(x/λ)` therefore maps `U^μ` to `U^{μ/λ}`.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{best_constant, el_normalization_constant, ProblemParams};
use crate::radial::profile::BubbleProfile;
use crate::radial::{DecayHints, FunctionKind, RadialFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `‖U‖_γ = 1`.
    UnitGammaNorm,
    /// `U` solves `−ΔU − γU/|x|² = U^{2*(s)−1}/|x|^s`.
    EulerLagrange,
}

impl Normalization {
    pub fn as_str(&self) -> &'static str {
        match self {
            Normalization::UnitGammaNorm => "unit_gamma_norm",
            Normalization::EulerLagrange => "euler_lagrange",
        }
    }
}

/// Prefactor `C` of the bubble for the given normalization.
pub fn normalization_constant(p: &ProblemParams, norm: Normalization) -> f64 {
    let c = el_normalization_constant(p);
    match norm {
        Normalization::EulerLagrange => c,
        Normalization::UnitGammaNorm => c * unit_over_el(p),
    }
}

/// `C_unit / C_EL = μ^{−2*(s)/(2(2*(s)−2))}`, since `‖U_EL‖_γ² = μ^{(N−s)/(2−s)}`.
pub fn unit_over_el(p: &ProblemParams) -> f64 {
    let q = p.critical_exponent();
    best_constant(p).powf(-q / (2.0 * (q - 2.0)))
}

/// `c U^λ` in a chosen normalization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bubble {
    pub params: ProblemParams,
    pub lambda: f64,
    pub coeff: f64,
    pub normalization: Normalization,
}

/// A point `c U^λ` of the extremal manifold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ManifoldPoint {
    pub bubble: Bubble,
}

impl Bubble {
    pub fn new(params: ProblemParams, lambda: f64, coeff: f64, normalization: Normalization) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("bubble scale must be positive, got {lambda}")));
        }
        if coeff == 0.0 || !coeff.is_finite() {
            return Err(Error::domain("bubble coefficient must be finite and nonzero"));
        }
        Ok(Self {
            params,
            lambda,
            coeff,
            normalization,
        })
    }

    /// `U` itself: `λ = 1`, `c = 1`.
    pub fn standard(params: ProblemParams, normalization: Normalization) -> Self {
        Self {
            params,
            lambda: 1.0,
            coeff: 1.0,
            normalization,
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.coeff * normalization_constant(&self.params, self.normalization)
    }

    pub fn hints(&self) -> DecayHints {
        DecayHints {
            at_zero: self.params.beta_minus(),
            at_infinity: self.params.beta_plus(),
        }
    }

    pub(crate) fn profile(&self) -> BubbleProfile {
        BubbleProfile {
            amp: self.amplitude(),
            epsilon: self.params.epsilon(),
            rate: self.params.bubble_rate(),
            shift: self.lambda.ln(),
            derivative: false,
        }
    }

    pub fn to_radial(&self) -> RadialFunction {
        RadialFunction::from_profile(
            self.params,
            0,
            self.params.half_weight(),
            Arc::new(self.profile()),
            Some(self.hints()),
            FunctionKind::ClosedForm,
        )
    }

    /// The same function expressed in another normalization.
    pub fn renormalized(&self, normalization: Normalization) -> Self {
        let from = normalization_constant(&self.params, self.normalization);
        let to = normalization_constant(&self.params, normalization);
        Self {
            coeff: self.coeff * from / to,
            normalization,
            ..*self
        }
    }

    /// Writes samples at `radii` with a `# bubble ...` header comment.
    pub fn write_csv(&self, radii: &[f64], out: &mut dyn Write) -> Result<()> {
        let header = format!(
            "bubble N={} gamma={} s={} lambda={} coeff={} norm={}",
            self.params.dim(),
            self.params.gamma(),
            self.params.s(),
            self.lambda,
            self.coeff,
            self.normalization.as_str()
        );
        crate::radial::write_csv(&self.to_radial(), radii, &[header], out)
    }
}

/// `c λ^{(N−2)/2} C / ((λr)^{aβ₋} + (λr)^{aβ₊})^{1/a}` with `a = (2−s)/(N−2)`.
pub fn eval_bubble(b: &Bubble, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("radius must be positive and finite, got {r}")));
    }
    let t = r.ln();
    let phi = crate::radial::Profile::value(&b.profile(), t);
    Ok(phi * (-b.params.half_weight() * t).exp())
}

/// `V = ∂_μ (c U^μ)|_{μ=λ}`, whose profile is `λ^{−1} φ′(t + ln λ)`.
pub fn tangent_generator(b: &Bubble) -> RadialFunction {
    let mut prof = b.profile();
    prof.amp /= b.lambda;
    prof.derivative = true;
    RadialFunction::from_profile(
        b.params,
        0,
        b.params.half_weight(),
        Arc::new(prof),
        Some(b.hints()),
        FunctionKind::ClosedForm,
    )
}

/// `T_λ f(x) = λ^{−(N−2)/2} f(x/λ)`.
pub fn apply_t(lambda: f64, f: &RadialFunction) -> Result<RadialFunction> {
    f.dilate(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> ProblemParams {
        ProblemParams::new(4, 0.5, 1.0).unwrap()
    }

    #[test]
    fn value_at_one() {
        for norm in [Normalization::EulerLagrange, Normalization::UnitGammaNorm] {
            let p = params();
            let b = Bubble::standard(p, norm);
            let want = normalization_constant(&p, norm) / 2f64.powf((4.0 - 2.0) / (2.0 - 1.0));
            assert!((eval_bubble(&b, 1.0).unwrap() - want).abs() < 1e-15 * want.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = params();
        assert!(Bubble::new(p, 0.0, 1.0, Normalization::EulerLagrange).is_err());
        assert!(Bubble::new(p, 1.0, 0.0, Normalization::EulerLagrange).is_err());
        assert!(eval_bubble(&Bubble::standard(p, Normalization::EulerLagrange), -1.0).is_err());
    }

    #[test]
    fn matches_explicit_formula() {
        let p = ProblemParams::new(5, 1.3, 0.7).unwrap();
        let b = Bubble::new(p, 0.37, -1.7, Normalization::EulerLagrange).unwrap();
        let a = p.bubble_rate();
        let (bm, bp) = (p.beta_minus(), p.beta_plus());
        let c = el_normalization_constant(&p);
        for r in [1e-6, 0.01, 0.5, 2.0, 1e3, 1e7] {
            let x = b.lambda * r;
            let want = b.coeff * b.lambda.powf(p.half_weight()) * c / (x.powf(a * bm) + x.powf(a * bp)).powf(1.0 / a);
            let got = eval_bubble(&b, r).unwrap();
            assert!((got - want).abs() <= 1e-13 * want.abs(), "r={r}: {got} vs {want}");
        }
    }

    #[test]
    fn decay_slope_at_infinity() {
        let p = params();
        let b = Bubble::standard(p, Normalization::EulerLagrange);
        let (r1, r2) = (1e4, 1e6);
        let slope = (eval_bubble(&b, r2).unwrap().ln() - eval_bubble(&b, r1).unwrap().ln()) / (r2 / r1).ln();
        assert!((slope + p.beta_plus()).abs() < 1e-3, "{slope}");
    }

    #[test]
    fn normalization_round_trip() {
        let p = params();
        let b = Bubble::new(p, 2.0, 1.5, Normalization::EulerLagrange).unwrap();
        let back = b.renormalized(Normalization::UnitGammaNorm).renormalized(Normalization::EulerLagrange);
        assert!((back.coeff - b.coeff).abs() < 4.0 * f64::EPSILON * b.coeff);
        let u = b.renormalized(Normalization::UnitGammaNorm);
        let (x, y) = (eval_bubble(&b, 0.3).unwrap(), eval_bubble(&u, 0.3).unwrap());
        assert!((x - y).abs() < 1e-14 * x);
    }

    #[test]
    fn tangent_is_the_scale_derivative() {
        let p = ProblemParams::new(3, 0.1, 0.5).unwrap();
        let lam = 0.8;
        let b = Bubble::new(p, lam, 1.0, Normalization::EulerLagrange).unwrap();
        let v = tangent_generator(&b);
        let h = 1e-6;
        for r in [0.05, 0.8, 1.25, 9.0] {
            let up = eval_bubble(&Bubble { lambda: lam + h, ..b }, r).unwrap();
            let dn = eval_bubble(&Bubble { lambda: lam - h, ..b }, r).unwrap();
            let fd = (up - dn) / (2.0 * h);
            assert!((v.eval(r).unwrap() - fd).abs() < 1e-7 * fd.abs().max(1e-3), "r={r}");
        }
    }

    proptest! {
        #[test]
        fn scaling_definition(lam in 0.01f64..100.0, r in 0.001f64..1000.0) {
            let p = params();
            let b = Bubble::new(p, lam, 1.0, Normalization::UnitGammaNorm).unwrap();
            let one = Bubble::standard(p, Normalization::UnitGammaNorm);
            let got = eval_bubble(&b, r).unwrap();
            let want = lam.powf(p.half_weight()) * eval_bubble(&one, lam * r).unwrap();
            prop_assert!((got - want).abs() <= 1e-12 * want.abs());
        }

        #[test]
        fn tangent_scaling_identity(lam in 0.05f64..20.0, r in 0.01f64..100.0) {
            // V_λ = λ^{−1} T_{1/λ} V_1 in this parameterization
            let p = params();
            let v1 = tangent_generator(&Bubble::standard(p, Normalization::EulerLagrange));
            let vl = tangent_generator(&Bubble::new(p, lam, 1.0, Normalization::EulerLagrange).unwrap());
            let rhs = apply_t(1.0 / lam, &v1).unwrap().scale(1.0 / lam);
            let (a, b) = (vl.eval(r).unwrap(), rhs.eval(r).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * (a.abs() + 1e-12));
        }
    }
}
