use super::profile::{Jet, Profile};
use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 16;

/// Cubic Hermite interpolant of samples `φ(t_i)` with exponential continuation.
///
/// Nodal slopes come from five-point Lagrange differentiation, limited by
/// Hyman's filter wherever the data are locally monotone. Second derivatives
/// are centred differences of the slopes, interpolated linearly.
#[derive(Clone, Debug)]
pub struct Sampled {
    t: Vec<f64>,
    v: Vec<f64>,
    m: Vec<f64>,
    s: Vec<f64>,
    /// `φ ~ e^{σ t}` continuation rates below and above the data.
    left_rate: Option<f64>,
    right_rate: Option<f64>,
}

impl Sampled {
    pub fn new(t: Vec<f64>, v: Vec<f64>, left_rate: Option<f64>, right_rate: Option<f64>) -> Result<Self> {
        validate(&t, &v)?;
        let m = monotone_slopes(&t, &v);
        let s = centred_slope_differences(&t, &m);
        Ok(Self {
            t,
            v,
            m,
            s,
            left_rate,
            right_rate,
        })
    }

    /// Samples with known slopes and, optionally, known second derivatives.
    pub fn with_derivatives(
        t: Vec<f64>,
        v: Vec<f64>,
        m: Vec<f64>,
        s: Option<Vec<f64>>,
        left_rate: Option<f64>,
        right_rate: Option<f64>,
    ) -> Result<Self> {
        validate(&t, &v)?;
        if m.len() != t.len() || s.as_ref().is_some_and(|s| s.len() != t.len()) {
            return Err(Error::domain("derivative arrays must match the sample count"));
        }
        let s = s.unwrap_or_else(|| centred_slope_differences(&t, &m));
        Ok(Self {
            t,
            v,
            m,
            s,
            left_rate,
            right_rate,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn range(&self) -> (f64, f64) {
        (self.t[0], self.t[self.t.len() - 1])
    }

    fn continuation(&self, t: f64, node: usize, rate: Option<f64>) -> Jet {
        match rate {
            Some(sigma) => {
                let v = self.v[node] * (sigma * (t - self.t[node])).exp();
                Jet {
                    value: v,
                    d1: sigma * v,
                    d2: sigma * sigma * v,
                }
            }
            None => Jet {
                value: f64::NAN,
                d1: f64::NAN,
                d2: f64::NAN,
            },
        }
    }
}

fn validate(t: &[f64], v: &[f64]) -> Result<()> {
    if t.len() != v.len() {
        return Err(Error::domain("abscissae and values differ in length"));
    }
    if t.len() < MIN_SAMPLES {
        return Err(Error::domain(format!(
            "sampled functions need at least {MIN_SAMPLES} points, got {}",
            t.len()
        )));
    }
    if t.iter().chain(v).any(|x| !x.is_finite()) {
        return Err(Error::domain("samples must be finite"));
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("sample radii must be strictly increasing"));
    }
    Ok(())
}

/// Derivative at `x[i]` of the Lagrange interpolant through `x[lo..lo+5]`.
fn lagrange_slope(x: &[f64], y: &[f64], i: usize, lo: usize) -> f64 {
    let idx: Vec<usize> = (lo..lo + 5).collect();
    let xi = x[i];
    let mut d = 0.0;
    for &j in &idx {
        let lj = if j == i {
            idx.iter()
                .filter(|&&m| m != i)
                .map(|&m| 1.0 / (xi - x[m]))
                .sum::<f64>()
        } else {
            let mut num = 1.0;
            let mut den = x[j] - xi;
            for &m in idx.iter().filter(|&&m| m != i && m != j) {
                num *= xi - x[m];
                den *= x[j] - x[m];
            }
            num / den
        };
        d += lj * y[j];
    }
    d
}

fn monotone_slopes(t: &[f64], v: &[f64]) -> Vec<f64> {
    let n = t.len();
    let secant: Vec<f64> = (0..n - 1).map(|i| (v[i + 1] - v[i]) / (t[i + 1] - t[i])).collect();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2).min(n - 5);
            let m = lagrange_slope(t, v, i, lo);
            let left = if i > 0 { Some(secant[i - 1]) } else { None };
            let right = secant.get(i).copied();
            match (left, right) {
                (Some(l), Some(r)) if l * r > 0.0 => hyman(m, l.abs().min(r.abs()), l.signum()),
                (Some(l), Some(r)) if l == 0.0 || r == 0.0 => 0.0,
                (None, Some(d)) | (Some(d), None) => hyman(m, d.abs(), d.signum()),
                _ => m,
            }
        })
        .collect()
}

fn hyman(m: f64, bound: f64, sign: f64) -> f64 {
    if bound == 0.0 || m * sign <= 0.0 {
        0.0
    } else {
        sign * m.abs().min(3.0 * bound)
    }
}

fn centred_slope_differences(t: &[f64], m: &[f64]) -> Vec<f64> {
    let n = t.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (m[1] - m[0]) / (t[1] - t[0])
            } else if i == n - 1 {
                (m[n - 1] - m[n - 2]) / (t[n - 1] - t[n - 2])
            } else {
                let (hl, hr) = (t[i] - t[i - 1], t[i + 1] - t[i]);
                ((m[i + 1] - m[i]) / hr * hl + (m[i] - m[i - 1]) / hl * hr) / (hl + hr)
            }
        })
        .collect()
}

impl Profile for Sampled {
    fn jet(&self, t: f64) -> Jet {
        let n = self.t.len();
        if t < self.t[0] {
            return self.continuation(t, 0, self.left_rate);
        }
        if t > self.t[n - 1] {
            return self.continuation(t, n - 1, self.right_rate);
        }
        let i = match self.t.partition_point(|&x| x <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.t[i + 1] - self.t[i];
        let s = (t - self.t[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let (v0, v1) = (self.v[i], self.v[i + 1]);
        let (m0, m1) = (self.m[i] * h, self.m[i + 1] * h);
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * v0
            + (s3 - 2.0 * s2 + s) * m0
            + (3.0 * s2 - 2.0 * s3) * v1
            + (s3 - s2) * m1;
        let d1 = ((6.0 * s2 - 6.0 * s) * (v0 - v1) + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (3.0 * s2 - 2.0 * s) * m1) / h;
        let d2 = (1.0 - s) * self.s[i] + s * self.s[i + 1];
        Jet { value, d1, d2 }
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.t);
    }
}
