//! Sturm-sequence bisection for symmetric tridiagonal matrices.

/// Number of eigenvalues strictly below `lambda`, from the signs of the
/// LDL^T pivots of `T - lambda I`.
pub fn sturm_count(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    let mut count = 0;
    let mut pivot = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 {
            0.0
        } else {
            off[i - 1] * off[i - 1] / pivot
        };
        pivot = diag[i] - lambda - coupling;
        if pivot == 0.0 {
            pivot = -f64::EPSILON * (diag[i].abs() + lambda.abs()).max(f64::MIN_POSITIVE);
        }
        if pivot < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing the spectrum.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    (lo, hi)
}

/// The `k`-th smallest eigenvalue (0-based), bisected to absolute width `tol`.
pub fn kth_eigenvalue(diag: &[f64], off: &[f64], k: usize, tol: f64) -> f64 {
    assert!(k < diag.len(), "eigenvalue index out of range");
    assert_eq!(off.len() + 1, diag.len(), "off-diagonal length mismatch");
    let (mut lo, mut hi) = gershgorin(diag, off);
    let pad = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
    lo -= pad;
    hi += pad;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn smallest_eigenvalue(diag: &[f64], off: &[f64], tol: f64) -> f64 {
    kth_eigenvalue(diag, off, 0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn discrete_laplacian_spectrum() {
        // tridiag(-1, 2, -1) of size n: 2 - 2 cos(k pi / (n + 1)).
        let n = 50;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        for k in 0..n {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            let got = kth_eigenvalue(&diag, &off, k, 1e-13);
            assert!((got - exact).abs() < 1e-12, "k = {k}: {got} vs {exact}");
        }
    }

    #[test]
    fn counts_are_monotone() {
        let diag = [4.0, -1.0, 3.0, 0.5];
        let off = [1.0, 2.0, -0.5];
        let mut prev = 0;
        for i in -100..=100 {
            let c = sturm_count(&diag, &off, i as f64 * 0.1);
            assert!(c >= prev);
            prev = c;
        }
        assert_eq!(sturm_count(&diag, &off, 100.0), 4);
        assert_eq!(sturm_count(&diag, &off, -100.0), 0);
    }

    #[test]
    fn two_by_two() {
        // [[a, b], [b, c]] eigenvalues (a + c)/2 -+ sqrt(((a - c)/2)^2 + b^2).
        let (a, b, c) = (1.0_f64, 0.5_f64, 3.0_f64);
        let m = 0.5 * (a + c);
        let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        assert!((smallest_eigenvalue(&[a, c], &[b], 1e-14) - (m - r)).abs() < 1e-13);
        assert!((kth_eigenvalue(&[a, c], &[b], 1, 1e-14) - (m + r)).abs() < 1e-13);
    }
}
