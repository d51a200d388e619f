//! Symmetric tridiagonal pencils `A − σD` with `D` positive diagonal.

/// Number of eigenvalues of `A x = η D x` below `sigma`: the count of negative
/// pivots in the `LDLᵀ` factorization of `A − σD` (Sylvester's law of inertia).
pub fn sturm_count(diag: &[f64], off: &[f64], weight: &[f64], sigma: f64) -> usize {
    let n = diag.len();
    let mut count = 0;
    let mut d = diag[0] - sigma * weight[0];
    if d < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let guard = if d == 0.0 { -f64::EPSILON * (diag[i - 1].abs() + 1.0) } else { d };
        d = diag[i] - sigma * weight[i] - off[i - 1] * off[i - 1] / guard;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest `σ` with `sturm_count(σ) ≥ index + 1`, bracketed by `[lo, hi]`.
pub fn bisect_eigenvalue(
    diag: &[f64],
    off: &[f64],
    weight: &[f64],
    index: usize,
    mut lo: f64,
    mut hi: f64,
) -> f64 {
    debug_assert!(sturm_count(diag, off, weight, lo) <= index);
    debug_assert!(sturm_count(diag, off, weight, hi) > index);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * hi.abs() {
            break;
        }
        if sturm_count(diag, off, weight, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(A − σD) x = b` by Gaussian elimination with partial pivoting.
pub fn solve_shifted(diag: &[f64], off: &[f64], weight: &[f64], sigma: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    // rows carry (sub, main, sup, sup2) after pivoting
    let mut dl: Vec<f64> = off.to_vec();
    let mut d: Vec<f64> = (0..n).map(|i| diag[i] - sigma * weight[i]).collect();
    let mut du: Vec<f64> = off.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut x = b.to_vec();
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            let l = if d[i] != 0.0 { dl[i] / d[i] } else { 0.0 };
            dl[i] = l;
            d[i + 1] -= l * du[i];
            x[i + 1] -= l * x[i];
        } else {
            let l = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = l;
            let tmp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = tmp - l * d[i + 1];
            if i + 1 < n - 1 {
                du2[i] = du[i + 1];
                du[i + 1] *= -l;
            }
            x.swap(i, i + 1);
            x[i + 1] -= l * x[i];
        }
    }
    let tiny = f64::MIN_POSITIVE.sqrt();
    let pivot = |v: f64| if v.abs() < tiny { tiny.copysign(v) } else { v };
    x[n - 1] /= pivot(d[n - 1]);
    if n >= 2 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / pivot(d[n - 2]);
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / pivot(d[i]);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        (vec![2.0; n], vec![-1.0; n - 1], vec![1.0; n])
    }

    #[test]
    fn counts_and_bisection_match_the_discrete_laplacian() {
        let n = 50;
        let (a, o, w) = laplacian(n);
        let exact = |j: usize| 2.0 - 2.0 * ((j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
        assert_eq!(sturm_count(&a, &o, &w, 0.0), 0);
        assert_eq!(sturm_count(&a, &o, &w, 4.0), n);
        for j in [0, 1, 7, 49] {
            let got = bisect_eigenvalue(&a, &o, &w, j, 0.0, 4.0);
            assert!((got - exact(j)).abs() < 1e-13, "j={j}");
        }
    }

    #[test]
    fn generalized_pencil_against_dense_reference() {
        use nalgebra::DMatrix;
        let n = 12;
        let a: Vec<f64> = (0..n).map(|i| 3.0 + (i as f64 * 0.37).sin()).collect();
        let o: Vec<f64> = (0..n - 1).map(|i| -1.0 + 0.1 * (i as f64).cos()).collect();
        let w: Vec<f64> = (0..n).map(|i| 0.5 + 0.4 * (i as f64 * 0.9).cos().abs()).collect();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = a[i] / w[i];
            if i + 1 < n {
                let v = o[i] / (w[i] * w[i + 1]).sqrt();
                m[(i, i + 1)] = v;
                m[(i + 1, i)] = v;
            }
        }
        let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (j, want) in ev.iter().enumerate() {
            let got = bisect_eigenvalue(&a, &o, &w, j, 0.0, 100.0);
            assert!((got - want).abs() < 1e-12 * want.abs().max(1.0), "j={j}: {got} vs {want}");
        }
    }

    #[test]
    fn pivoted_solve_handles_zero_leading_pivot() {
        let a = vec![0.0, 1.0, 4.0, 2.0];
        let o = vec![2.0, -1.0, 0.5];
        let w = vec![1.0; 4];
        let xs = [1.0, -2.0, 0.5, 3.0];
        let b: Vec<f64> = (0..4)
            .map(|i| {
                let mut v = a[i] * xs[i];
                if i > 0 {
                    v += o[i - 1] * xs[i - 1];
                }
                if i < 3 {
                    v += o[i] * xs[i + 1];
                }
                v
            })
            .collect();
        let x = solve_shifted(&a, &o, &w, 0.0, &b);
        for (g, e) in x.iter().zip(xs) {
            assert!((g - e).abs() < 1e-13);
        }
    }
}
