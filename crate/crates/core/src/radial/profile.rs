use std::fmt;
use std::sync::Arc;

/// Value and first two `t`-derivatives of an Emden–Fowler profile.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl std::ops::Add for Jet {
    type Output = Jet;

    fn add(self, o: Jet) -> Jet {
        Jet {
            value: self.value + o.value,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
        }
    }
}

impl Jet {
    pub const ZERO: Jet = Jet {
        value: 0.0,
        d1: 0.0,
        d2: 0.0,
    };

    pub fn scale(self, c: f64) -> Jet {
        Jet {
            value: c * self.value,
            d1: c * self.d1,
            d2: c * self.d2,
        }
    }

    /// Jet of `e^{σt} φ(t)` given the jet of `φ`.
    pub fn times_exp(self, sigma: f64, t: f64) -> Jet {
        if sigma == 0.0 {
            return self;
        }
        let e = (sigma * t).exp();
        if e == 0.0 || self.value == 0.0 && self.d1 == 0.0 && self.d2 == 0.0 {
            return Jet::ZERO;
        }
        Jet {
            value: e * self.value,
            d1: e * (self.d1 + sigma * self.value),
            d2: e * (self.d2 + 2.0 * sigma * self.d1 + sigma * sigma * self.value),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }
}

/// A profile `φ(t)` on the whole line.
pub trait Profile: Send + Sync + fmt::Debug {
    fn jet(&self, t: f64) -> Jet;

    fn value(&self, t: f64) -> f64 {
        self.jet(t).value
    }

    /// Points where the profile is only piecewise smooth.
    fn breakpoints(&self, _out: &mut Vec<f64>) {}
}

/// `ln(2 cosh x)` without overflow.
pub(crate) fn ln_2cosh(x: f64) -> f64 {
    let ax = x.abs();
    ax + (-2.0 * ax).exp().ln_1p()
}

/// `amp · (2 cosh(a ε (t + shift)))^{−1/a}` or, with `derivative`, its `t`-derivative.
#[derive(Clone, Copy, Debug)]
pub struct BubbleProfile {
    pub amp: f64,
    pub epsilon: f64,
    pub rate: f64,
    pub shift: f64,
    pub derivative: bool,
}

impl BubbleProfile {
    /// `amp · (2 cosh(a ε τ))^{−1/a}` and the ratios `tanh`, `sech²` at `τ = t + shift`.
    fn parts(&self, t: f64) -> (f64, f64, f64) {
        let x = self.rate * self.epsilon * (t + self.shift);
        let phi = self.amp * (-ln_2cosh(x) / self.rate).exp();
        let q = (-2.0 * x.abs()).exp();
        let sech2 = 4.0 * q / ((1.0 + q) * (1.0 + q));
        (phi, x.tanh(), sech2)
    }
}

impl Profile for BubbleProfile {
    fn jet(&self, t: f64) -> Jet {
        let (phi, th, s2) = self.parts(t);
        let (e, a) = (self.epsilon, self.rate);
        let d1 = -e * th * phi;
        let c2 = e * e * (th * th - a * s2);
        let d2 = c2 * phi;
        if !self.derivative {
            return Jet { value: phi, d1, d2 };
        }
        let d3 = 2.0 * a * (1.0 + a) * e * e * e * s2 * th * phi - c2 * e * th * phi;
        Jet {
            value: d1,
            d1: d2,
            d2: d3,
        }
    }

    fn value(&self, t: f64) -> f64 {
        let (phi, th, _) = self.parts(t);
        if self.derivative {
            -self.epsilon * th * phi
        } else {
            phi
        }
    }
}

/// `amp · exp(−(t − center)² / (2 width²))`.
#[derive(Clone, Copy, Debug)]
pub struct GaussianProfile {
    pub amp: f64,
    pub center: f64,
    pub width: f64,
}

impl Profile for GaussianProfile {
    fn jet(&self, t: f64) -> Jet {
        let z = (t - self.center) / self.width;
        let v = self.amp * (-0.5 * z * z).exp();
        let w = self.width;
        Jet {
            value: v,
            d1: -z / w * v,
            d2: (z * z - 1.0) / (w * w) * v,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ZeroProfile;

impl Profile for ZeroProfile {
    fn jet(&self, _t: f64) -> Jet {
        Jet::ZERO
    }
}

/// `Σ c_i φ_i(t)`.
#[derive(Clone, Debug)]
pub struct Combination {
    pub terms: Vec<(f64, Arc<dyn Profile>)>,
}

impl Profile for Combination {
    fn jet(&self, t: f64) -> Jet {
        self.terms
            .iter()
            .fold(Jet::ZERO, |acc, (c, p)| acc + p.jet(t).scale(*c))
    }

    fn value(&self, t: f64) -> f64 {
        self.terms.iter().map(|(c, p)| c * p.value(t)).sum()
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        for (_, p) in &self.terms {
            p.breakpoints(out);
        }
    }
}

/// `factor · φ(t − shift)`.
#[derive(Clone, Debug)]
pub struct Shifted {
    pub inner: Arc<dyn Profile>,
    pub shift: f64,
    pub factor: f64,
}

impl Profile for Shifted {
    fn jet(&self, t: f64) -> Jet {
        self.inner.jet(t - self.shift).scale(self.factor)
    }

    fn value(&self, t: f64) -> f64 {
        self.factor * self.inner.value(t - self.shift)
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        let start = out.len();
        self.inner.breakpoints(out);
        for k in &mut out[start..] {
            *k += self.shift;
        }
    }
}

/// `e^{σt} φ(t)`: the same radial function seen at another Emden–Fowler weight.
#[derive(Clone, Debug)]
pub struct Reweighted {
    pub inner: Arc<dyn Profile>,
    pub sigma: f64,
}

impl Profile for Reweighted {
    fn jet(&self, t: f64) -> Jet {
        self.inner.jet(t).times_exp(self.sigma, t)
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        self.inner.breakpoints(out);
    }
}

/// `e^{wt} f(e^t)` for a user closure `f(r)`; derivatives by five-point differences.
pub struct FnProfile {
    pub f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub weight: f64,
}

impl fmt::Debug for FnProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnProfile")
            .field("weight", &self.weight)
            .finish_non_exhaustive()
    }
}

impl FnProfile {
    fn phi(&self, t: f64) -> f64 {
        let v = (self.f)(t.exp());
        if v == 0.0 {
            0.0
        } else {
            v * (self.weight * t).exp()
        }
    }
}

impl Profile for FnProfile {
    fn jet(&self, t: f64) -> Jet {
        const H: f64 = 2e-3;
        let f: [f64; 5] = std::array::from_fn(|i| self.phi(t + (i as f64 - 2.0) * H));
        Jet {
            value: f[2],
            d1: (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * H),
            d2: (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * H * H),
        }
    }

    fn value(&self, t: f64) -> f64 {
        self.phi(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bubble_jet_matches_differences() {
        let p = BubbleProfile {
            amp: 1.3,
            epsilon: 0.4,
            rate: 1.5,
            shift: 0.2,
            derivative: false,
        };
        let z = BubbleProfile {
            derivative: true,
            ..p
        };
        let h = 1e-4;
        for t in [-20.0, -3.0, -0.2, 0.0, 0.7, 5.0, 30.0] {
            let j = p.jet(t);
            let fd1 = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
            let fd2 = (p.value(t + h) - 2.0 * p.value(t) + p.value(t - h)) / (h * h);
            let scale = j.value.abs() + 1e-300;
            assert!((j.d1 - fd1).abs() <= 1e-7 * scale, "t={t}");
            assert!((j.d2 - fd2).abs() <= 1e-5 * scale, "t={t}");
            let jz = z.jet(t);
            assert_eq!(jz.value, j.d1);
            assert_eq!(jz.d1, j.d2);
            let fd3 = (p.jet(t + h).d2 - p.jet(t - h).d2) / (2.0 * h);
            assert!((jz.d2 - fd3).abs() <= 1e-6 * scale, "t={t}");
        }
    }

    #[test]
    fn ln_2cosh_is_stable() {
        assert!((ln_2cosh(0.0) - 2f64.ln()).abs() < 1e-16);
        assert!((ln_2cosh(800.0) - 800.0).abs() < 1e-12);
        assert!((ln_2cosh(-3.0) - (2.0 * 3f64.cosh()).ln()).abs() < 1e-15);
    }

    #[test]
    fn reweighting_product_rule() {
        let g = GaussianProfile {
            amp: 2.0,
            center: 0.3,
            width: 0.8,
        };
        let r = Reweighted {
            inner: Arc::new(g),
            sigma: 0.7,
        };
        let h = 1e-4;
        let t = 0.9;
        let fd1 = (r.value(t + h) - r.value(t - h)) / (2.0 * h);
        let fd2 = (r.value(t + h) - 2.0 * r.value(t) + r.value(t - h)) / (h * h);
        let j = r.jet(t);
        assert!((j.d1 - fd1).abs() < 1e-7);
        assert!((j.d2 - fd2).abs() < 1e-5);
    }
}
