//! Gauss–Legendre panels on a window of the `t = ln r` axis plus exp-sinh tails.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

/// Gauss–Legendre rule on `[−1, 1]` with its integration matrix.
#[derive(Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `integ[i][j] = ∫_{−1}^{x_i} ℓ_j(x) dx` for the Lagrange basis `ℓ_j` on the nodes.
    pub integ: Vec<Vec<f64>>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        let integ = (0..n)
            .map(|i| {
                let half = 0.5 * (1.0 + nodes[i]);
                (0..n)
                    .map(|j| {
                        half * (0..n)
                            .map(|m| {
                                let y = -1.0 + half * (1.0 + nodes[m]);
                                weights[m] * lagrange(&nodes, j, y)
                            })
                            .sum::<f64>()
                    })
                    .collect()
            })
            .collect();
        Self {
            nodes,
            weights,
            integ,
        }
    }

    /// `∫_a^b f` with this rule.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn lagrange(nodes: &[f64], j: usize, y: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(m, _)| m != j)
        .map(|(_, &xm)| (y - xm) / (nodes[j] - xm))
        .product()
}

/// Cached rule of order `n`.
pub fn gauss(n: usize) -> &'static GaussRule {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussRule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(n)
        .or_insert_with(|| Box::leak(Box::new(GaussRule::new(n))))
}

/// Panel order used on the uniform part of the window.
pub const PANEL_ORDER: usize = 16;
/// Order used on the knot intervals of sampled functions.
pub const KNOT_ORDER: usize = 8;

/// One panel of a composite rule.
#[derive(Clone, Copy, Debug)]
pub struct Segment {
    pub a: f64,
    pub b: f64,
    pub order: usize,
}

/// Composite layout: uniform panels on a window, knot intervals where the
/// integrand is only piecewise smooth.
#[derive(Clone, Debug)]
pub struct Layout {
    pub segments: Vec<Segment>,
}

impl Layout {
    /// `panels` uniform panels on `[t_min, t_max]`; inside `[knots[0], knots[last]]`
    /// the panels are replaced by the knot intervals, so the window is widened
    /// to contain every knot.
    pub fn new(t_min: f64, t_max: f64, panels: usize, knots: &[f64]) -> Self {
        let width = (t_max - t_min) / panels as f64;
        let (mut lo, mut hi) = (t_min, t_max);
        if let (Some(&k0), Some(&k1)) = (knots.first(), knots.last()) {
            if k0 < lo {
                lo = t_min - width * ((t_min - k0) / width).ceil();
            }
            if k1 > hi {
                hi = t_max + width * ((k1 - t_max) / width).ceil();
            }
        }
        let count = ((hi - lo) / width).round() as usize;
        let mut segments = Vec::with_capacity(count + knots.len());
        let push_uniform = |segments: &mut Vec<Segment>, a: f64, b: f64| {
            if b - a <= 1e-14 * (1.0 + a.abs()) {
                return;
            }
            let m = ((b - a) / width).ceil().max(1.0) as usize;
            let h = (b - a) / m as f64;
            for i in 0..m {
                segments.push(Segment {
                    a: a + i as f64 * h,
                    b: if i + 1 == m { b } else { a + (i + 1) as f64 * h },
                    order: PANEL_ORDER,
                });
            }
        };
        if knots.len() >= 2 {
            let (k0, k1) = (knots[0], knots[knots.len() - 1]);
            // uniform panels left of the knots, aligned to the regular grid
            let left_edge = lo + width * ((k0 - lo) / width).floor();
            push_uniform(&mut segments, lo, left_edge.min(k0));
            if left_edge < k0 {
                push_uniform(&mut segments, left_edge, k0);
            }
            // knot intervals longer than a panel are split evenly
            for w in knots.windows(2) {
                let m = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
                let h = (w[1] - w[0]) / m as f64;
                for i in 0..m {
                    segments.push(Segment {
                        a: w[0] + i as f64 * h,
                        b: if i + 1 == m { w[1] } else { w[0] + (i + 1) as f64 * h },
                        order: KNOT_ORDER,
                    });
                }
            }
            let right_edge = lo + width * ((k1 - lo) / width).ceil();
            if right_edge > k1 {
                push_uniform(&mut segments, k1, right_edge.min(hi));
            }
            push_uniform(&mut segments, right_edge.max(k1), hi);
        } else {
            push_uniform(&mut segments, lo, hi);
        }
        Self { segments }
    }

    pub fn lo(&self) -> f64 {
        self.segments.first().map_or(0.0, |s| s.a)
    }

    pub fn hi(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.b)
    }

    /// Flattened nodes and weights.
    pub fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let total: usize = self.segments.iter().map(|s| s.order).sum();
        let (mut t, mut w) = (Vec::with_capacity(total), Vec::with_capacity(total));
        for seg in &self.segments {
            let rule = gauss(seg.order);
            let (mid, half) = (0.5 * (seg.a + seg.b), 0.5 * (seg.b - seg.a));
            for (x, wx) in rule.nodes.iter().zip(&rule.weights) {
                t.push(mid + half * x);
                w.push(half * wx);
            }
        }
        (t, w)
    }
}

/// Nodes and weights of an exp-sinh rule for `∫_T^{±∞}`.
///
/// `t = T ± exp((π/2) sinh x)`, `x = k h`, `|k h| ≤ 5`; nodes with `|t| > 700`
/// are dropped. `step` selects every `step`-th node (1 or 2) for error estimation.
pub fn exp_sinh_nodes(edge: f64, direction: f64, step: usize) -> (Vec<f64>, Vec<f64>) {
    const H: f64 = 1.0 / 32.0;
    const K: i64 = 160;
    let h = H * step as f64;
    let (mut t, mut w) = (Vec::new(), Vec::new());
    let mut k = -K;
    while k <= K {
        let x = k as f64 * H;
        let e = (FRAC_PI_2 * x.sinh()).exp();
        let node = edge + direction * e;
        if node.abs() > 700.0 {
            break;
        }
        t.push(node);
        w.push(h * FRAC_PI_2 * x.cosh() * e);
        k += step as i64;
    }
    (t, w)
}

/// How the integrand is treated outside the quadrature window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailPolicy {
    /// Integrate the tails; sampled data are continued by their power-law hints.
    AnalyticPowerlaw,
    /// Drop the tails; fails if they are not negligible.
    Truncate,
}

/// Integral together with an error estimate and the absolute mass `∫|g|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub mass: f64,
}

/// `∫_{−∞}^{∞} g(t) dt` on a layout with tails.
///
/// With `estimate` set, every segment is also integrated as two halves and the
/// difference is reported; the tails are compared at steps `h` and `2h`.
pub fn integrate_line(
    g: &(dyn Fn(f64) -> f64 + Sync),
    layout: &Layout,
    tails: TailPolicy,
    rel_tol: f64,
    estimate: bool,
) -> Result<Integral> {
    let mut value = 0.0;
    let mut mass = 0.0;
    let mut error = 0.0;
    for seg in &layout.segments {
        let rule = gauss(seg.order);
        let mut abs = 0.0;
        let full = rule.integrate(seg.a, seg.b, |t| {
            let v = g(t);
            abs += v.abs();
            v
        });
        if !full.is_finite() {
            return Err(non_finite(seg.a, seg.b));
        }
        mass += abs * (seg.b - seg.a) / seg.order as f64;
        if estimate {
            let m = 0.5 * (seg.a + seg.b);
            let halves = rule.integrate(seg.a, m, g) + rule.integrate(m, seg.b, g);
            error += (halves - full).abs();
            value += halves;
        } else {
            value += full;
        }
    }
    let mut tail_value = 0.0;
    let mut tail_left = 0.0;
    for (edge, dir) in [(layout.lo(), -1.0), (layout.hi(), 1.0)] {
        let (t, w) = exp_sinh_nodes(edge, dir, 1);
        let vals: Vec<f64> = t.iter().map(|&x| g(x)).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(non_finite(edge, edge + dir * 700.0));
        }
        let fine: f64 = vals.iter().zip(&w).map(|(v, w)| v * w).sum();
        let coarse: f64 = vals
            .iter()
            .zip(&w)
            .step_by(2)
            .map(|(v, w)| 2.0 * v * w)
            .sum();
        mass += vals.iter().zip(&w).map(|(v, w)| (v * w).abs()).sum::<f64>();
        tail_value += fine;
        if estimate {
            error += (fine - coarse).abs();
        }
        tail_left += leftover(&t, &vals);
    }
    match tails {
        TailPolicy::AnalyticPowerlaw => {
            value += tail_value;
            error += tail_left;
            if tail_left > rel_tol * value.abs().max(mass * 1e-3) && tail_left > 1e-300 {
                return Err(Error::accuracy(
                    "integrand does not decay within the representable range |t| ≤ 700",
                    tail_left,
                ));
            }
        }
        TailPolicy::Truncate => {
            let tail = tail_value.abs() + tail_left;
            if tail > rel_tol * value.abs().max(mass * 1e-3) && tail > 1e-300 {
                return Err(Error::accuracy(
                    "truncated tail exceeds the requested tolerance",
                    tail,
                ));
            }
            error += tail;
        }
    }
    Ok(Integral { value, error, mass })
}

/// Mass left beyond the last exp-sinh node, assuming exponential decay fitted to the last two.
fn leftover(t: &[f64], vals: &[f64]) -> f64 {
    let n = vals.len();
    if n < 2 {
        return 0.0;
    }
    let (g1, g2) = (vals[n - 2].abs(), vals[n - 1].abs());
    if g2 == 0.0 {
        return 0.0;
    }
    let dt = (t[n - 1] - t[n - 2]).abs();
    if g1 <= g2 {
        return f64::INFINITY;
    }
    let rate = (g1 / g2).ln() / dt;
    g2 / rate
}

fn non_finite(a: f64, b: f64) -> Error {
    Error::Extrapolation(format!(
        "integrand is not finite on t ∈ [{a:.3}, {b:.3}]; sampled data need decay hints there"
    ))
}
