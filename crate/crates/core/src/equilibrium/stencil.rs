//! Finite-difference stencils on uniform grids.

/// Fourth-order first derivative at every node. Interior nodes use the
/// five-point central stencil; the two nodes at each end use one-sided
/// fourth-order stencils.
pub fn first_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 5, "need at least five nodes");
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
    }
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
    let k = n - 1;
    d[k] = (25.0 * f[k] - 48.0 * f[k - 1] + 36.0 * f[k - 2] - 16.0 * f[k - 3] + 3.0 * f[k - 4])
        / (12.0 * h);
    d[k - 1] =
        (3.0 * f[k] + 10.0 * f[k - 1] - 18.0 * f[k - 2] + 6.0 * f[k - 3] - f[k - 4]) / (12.0 * h);
    d
}

/// Five-point fourth-order second derivative at node `i` (`2 <= i < n - 2`).
#[inline]
pub fn second_derivative_at(f: &[f64], i: usize, h: f64) -> f64 {
    (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2]) / (12.0 * h * h)
}

/// Five-point fourth-order first derivative at node `i` (`2 <= i < n - 2`).
#[inline]
pub fn first_derivative_at(f: &[f64], i: usize, h: f64) -> f64 {
    (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h)
}

/// Three-point second derivative at node `i` (`1 <= i < n - 1`).
#[inline]
pub fn laplacian3_at(f: &[f64], i: usize, h: f64) -> f64 {
    (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h)
}

/// Composite Simpson rule; `f.len()` must be odd.
pub fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    assert!(n >= 3 && n % 2 == 1, "Simpson needs an odd number of nodes");
    let mut sum = f[0] + f[n - 1];
    for (i, v) in f.iter().enumerate().take(n - 1).skip(1) {
        sum += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    sum * h / 3.0
}
