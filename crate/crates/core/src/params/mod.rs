//! Problem parameters `(N, γ, s)` and the closed-form constants attached to them.

mod gamma;

pub use gamma::gamma_fn;
pub(crate) use gamma::gamma_pos;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Dimension `N`, Hardy coefficient `γ` and singular exponent `s`.
///
/// Ordinary construction enforces `N ≥ 3`, `0 < γ < γ_H` and `0 < s < 2`.
/// [`ProblemParams::reference`] additionally admits `γ = 0` and/or `s = 0`, the
/// classical Sobolev and pure Hardy–Sobolev cases, and marks the value so that
/// callers can tell the two regimes apart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProblemParams {
    #[serde(rename = "N")]
    dim: usize,
    gamma: f64,
    s: f64,
    reference_mode: bool,
}

/// Constants derived from `(N, γ, s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivedConstants {
    /// `ε = sqrt((N−2)²/4 − γ)`.
    pub epsilon: f64,
    pub beta_minus: f64,
    pub beta_plus: f64,
    /// Critical exponent `2*(s) = 2(N−s)/(N−2)`.
    pub two_star_s: f64,
    /// Surface area of the unit sphere `S^{N−1}`.
    pub sphere_area: f64,
    /// Surface area of the unit sphere `S^N` in `R^{N+1}`.
    pub omega_n: f64,
}

impl ProblemParams {
    pub fn new(dim: usize, gamma: f64, s: f64) -> Result<Self> {
        Self::validate(dim, gamma, s, false)?;
        Ok(Self {
            dim,
            gamma,
            s,
            reference_mode: false,
        })
    }

    /// Reference-mode parameters: also accepts `γ = 0` and `s = 0`.
    pub fn reference(dim: usize, gamma: f64, s: f64) -> Result<Self> {
        Self::validate(dim, gamma, s, true)?;
        Ok(Self {
            dim,
            gamma,
            s,
            reference_mode: true,
        })
    }

    fn validate(dim: usize, gamma: f64, s: f64, reference: bool) -> Result<()> {
        if dim < 3 {
            return Err(Error::domain(format!("dimension N must be at least 3, got {dim}")));
        }
        if !gamma.is_finite() || !s.is_finite() {
            return Err(Error::domain("γ and s must be finite"));
        }
        let hardy = hardy_constant(dim);
        let gamma_ok = if reference { gamma >= 0.0 } else { gamma > 0.0 };
        if !gamma_ok || gamma >= hardy {
            return Err(Error::domain(format!(
                "γ must lie in {}0, {hardy}) for N = {dim}, got {gamma}",
                if reference { "[" } else { "(" }
            )));
        }
        let s_ok = if reference { s >= 0.0 } else { s > 0.0 };
        if !s_ok || s >= 2.0 {
            return Err(Error::domain(format!(
                "s must lie in {}0, 2), got {s}",
                if reference { "[" } else { "(" }
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn is_reference_mode(&self) -> bool {
        self.reference_mode
    }

    /// True when `γ = 0` or `s = 0` (only reachable in reference mode).
    pub fn is_boundary_case(&self) -> bool {
        self.gamma == 0.0 || self.s == 0.0
    }

    /// `γ_H = (N−2)²/4`.
    pub fn hardy_constant(&self) -> f64 {
        hardy_constant(self.dim)
    }

    pub fn epsilon(&self) -> f64 {
        (self.hardy_constant() - self.gamma).sqrt()
    }

    pub fn beta_minus(&self) -> f64 {
        self.half_weight() - self.epsilon()
    }

    pub fn beta_plus(&self) -> f64 {
        self.half_weight() + self.epsilon()
    }

    /// `2*(s)`.
    pub fn critical_exponent(&self) -> f64 {
        2.0 * (self.dim as f64 - self.s) / (self.dim as f64 - 2.0)
    }

    /// `(N−2)/2`, the exponent of `r` in the Emden–Fowler profile `r^{(N−2)/2} R(r)`.
    pub fn half_weight(&self) -> f64 {
        0.5 * (self.dim as f64 - 2.0)
    }

    /// `(2−s)/(N−2)`; the bubble profile is `(2 cosh(ε a t))^{−1/a}` in `t = ln r`.
    pub fn bubble_rate(&self) -> f64 {
        (2.0 - self.s) / (self.dim as f64 - 2.0)
    }

    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.dim)
    }

    /// `|S^N|`, the area of the unit `N`-sphere.
    pub fn omega_n(&self) -> f64 {
        sphere_area(self.dim + 1)
    }

    /// Eigenvalue `k² + (N−2)k` of the Laplace–Beltrami operator on harmonics of order `k`.
    pub fn angular_eigenvalue(&self, k: usize) -> f64 {
        angular_eigenvalue(self.dim, k)
    }

    pub fn derived(&self) -> DerivedConstants {
        DerivedConstants {
            epsilon: self.epsilon(),
            beta_minus: self.beta_minus(),
            beta_plus: self.beta_plus(),
            two_star_s: self.critical_exponent(),
            sphere_area: self.sphere_area(),
            omega_n: self.omega_n(),
        }
    }
}

pub fn hardy_constant(dim: usize) -> f64 {
    let d = dim as f64 - 2.0;
    0.25 * d * d
}

/// Area of the unit sphere `S^{n−1} ⊂ R^n`.
pub fn sphere_area(n: usize) -> f64 {
    let h = 0.5 * n as f64;
    2.0 * PI.powf(h) / gamma_pos(h)
}

pub fn angular_eigenvalue(dim: usize, k: usize) -> f64 {
    let k = k as f64;
    k * k + (dim as f64 - 2.0) * k
}

/// Dimension of the space of spherical harmonics of order `k` on `S^{N−1}`.
pub fn harmonic_multiplicity(dim: usize, k: usize) -> usize {
    fn binom(n: usize, r: usize) -> usize {
        let r = r.min(n - r);
        (0..r).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
    }
    match k {
        0 => 1,
        1 => dim,
        _ => binom(dim + k - 1, k) - binom(dim + k - 3, k - 2),
    }
}

/// Best constant `μ_{γ,s}(R^N)` of the Hardy–Sobolev inequality.
///
/// Boundary reference cases use their classical formulas: the Sobolev
/// constant `N(N−2)ω_N^{2/N}/4` for `γ = s = 0` and the `μ_{0,s}` closed form
/// for `γ = 0 < s`.
pub fn best_constant(p: &ProblemParams) -> f64 {
    let n = p.dim() as f64;
    let s = p.s();
    if p.gamma() == 0.0 && s == 0.0 {
        return n * (n - 2.0) * p.omega_n().powf(2.0 / n) / 4.0;
    }
    let q = (n - s) / (2.0 - s);
    if p.gamma() == 0.0 {
        // Γ(2(N−s)/(2−s)) enters to the first power: this is the value that
        // reduces to S(R^N) at s = 0 and matches the γ → 0 limit of the general case.
        let g1 = gamma_pos(q);
        let g2 = gamma_pos(2.0 * q);
        let inner = p.sphere_area() / (2.0 - s) * g1 * g1 / g2;
        return (n - 2.0) * (n - s) * inner.powf((2.0 - s) / (n - s));
    }
    let crit = p.critical_exponent();
    let area = p.sphere_area();
    let ratio = gamma_pos(q) * gamma_pos((n + 2.0 - 2.0 * s) / (2.0 - s)) / gamma_pos(2.0 * q);
    let d_s = area.powf((2.0 - s) / (n - s))
        * (0.5 * crit).powf(2.0 / crit)
        * ratio.powf((2.0 - s) / (n - s));
    let prefactor = (n - 2.0) * (n - 2.0) - 4.0 * p.gamma();
    prefactor.powf(1.0 / crit + 0.5) * d_s
}

/// Constant `C_{N,γ,s}` making the bubble an exact solution of the Euler–Lagrange equation.
pub fn el_normalization_constant(p: &ProblemParams) -> f64 {
    let n = p.dim() as f64;
    let eps = p.epsilon();
    let base = 4.0 * (n - p.s()) / (n - 2.0) * eps * eps;
    base.powf(1.0 / (p.critical_exponent() - 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, frac: f64, s: f64) -> ProblemParams {
        ProblemParams::new(n, frac * hardy_constant(n), s).unwrap()
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ProblemParams::new(2, 0.1, 0.5).is_err());
        assert!(ProblemParams::new(3, 0.0, 0.5).is_err());
        assert!(ProblemParams::new(3, 0.25, 0.5).is_err());
        assert!(ProblemParams::new(3, 0.1, 0.0).is_err());
        assert!(ProblemParams::new(3, 0.1, 2.0).is_err());
        assert!(ProblemParams::reference(3, 0.0, 0.0).is_ok());
        assert!(ProblemParams::reference(3, 0.25, 0.0).is_err());
    }

    #[test]
    fn indicial_root_identities() {
        for n in 3..9 {
            for frac in [0.05, 0.3, 0.7, 0.99] {
                for s in [0.1, 1.0, 1.9] {
                    let p = params(n, frac, s);
                    let (bm, bp) = (p.beta_minus(), p.beta_plus());
                    assert!((bm * bp - p.gamma()).abs() <= 1e-14 * (1.0 + p.gamma()));
                    assert!((bm + bp - (n as f64 - 2.0)).abs() <= 1e-14 * n as f64);
                    assert!(bp - bm > 0.0);
                    let crit = p.critical_exponent();
                    assert!(crit > 2.0 && crit < 2.0 * n as f64 / (n as f64 - 2.0));
                }
            }
        }
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert_eq!(harmonic_multiplicity(3, 2), 5);
        assert_eq!(harmonic_multiplicity(4, 2), 9);
        assert_eq!(harmonic_multiplicity(5, 1), 5);
    }

    #[test]
    fn sobolev_reference_constant() {
        let p = ProblemParams::reference(3, 0.0, 0.0).unwrap();
        let omega3 = 2.0 * PI * PI;
        let want = 0.75 * omega3.powf(2.0 / 3.0);
        assert!((best_constant(&p) - want).abs() <= 1e-14 * want);
    }

    #[test]
    fn sobolev_el_constant_matches_aubin_talenti_prefactor() {
        for n in 3..8 {
            let p = ProblemParams::reference(n, 0.0, 0.0).unwrap();
            let nf = n as f64;
            let want = (nf * (nf - 2.0)).powf((nf - 2.0) / 4.0);
            let got = el_normalization_constant(&p);
            assert!((got - want).abs() <= 1e-13 * want, "N={n}: {got} vs {want}");
        }
    }

    #[test]
    fn gamma_zero_formula_is_the_continuous_limit() {
        // The separate μ_{0,s} formula agrees with the γ → 0 limit of the general one.
        for (n, s) in [(3, 0.5), (4, 1.0), (5, 0.3), (6, 1.7)] {
            let r = ProblemParams::reference(n, 0.0, s).unwrap();
            let near = ProblemParams::new(n, 1e-12, s).unwrap();
            let (a, b) = (best_constant(&r), best_constant(&near));
            assert!((a - b).abs() <= 1e-9 * a, "N={n} s={s}: {a} vs {b}");
        }
    }

    #[test]
    fn gamma_zero_formula_tends_to_sobolev_constant() {
        for n in 3..8 {
            let s0 = best_constant(&ProblemParams::reference(n, 0.0, 0.0).unwrap());
            let near = best_constant(&ProblemParams::reference(n, 0.0, 1e-9).unwrap());
            assert!((s0 - near).abs() <= 1e-7 * s0, "N={n}: {s0} vs {near}");
        }
    }

    #[test]
    fn best_constant_vanishes_at_hardy_threshold() {
        let n = 4;
        let near = params(n, 1.0 - 1e-10, 1.0);
        assert!(best_constant(&near) < 1e-5);
        assert!(el_normalization_constant(&near) < 1e-4);
    }

    #[test]
    fn best_constant_decreases_in_gamma() {
        for (n, s) in [(3, 0.5), (4, 1.0), (6, 1.5)] {
            let values: Vec<f64> = (1..=10)
                .map(|i| best_constant(&params(n, i as f64 / 11.0, s)))
                .collect();
            assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
        }
    }
}
