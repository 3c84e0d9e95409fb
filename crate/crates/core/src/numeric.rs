//! Small shared numeric helpers.

/// Sums a slice by pairwise (tree) reduction.
///
/// Used wherever a result must not depend on how work was distributed across
/// threads: partial results are collected into an index-ordered buffer and
/// reduced with this fixed tree, so the floating-point rounding is identical
/// from run to run. The tree also keeps rounding error O(log n) instead of
/// O(n) for long accumulations.
pub(crate) fn tree_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    tree_sum(&xs[..mid]) + tree_sum(&xs[mid..])
}

/// Ordinary least squares for y = intercept + slope·x.
///
/// Returns (slope, intercept, slope standard error). The standard error uses
/// the unbiased residual variance; with fewer than three points it is zero.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(&u, &v)| (u - mx) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if x.len() < 3 {
        return (slope, intercept, 0.0);
    }
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&u, &v)| {
            let r = v - (intercept + slope * u);
            r * r
        })
        .sum();
    let stderr = (ss_res / (n - 2.0) / sxx).sqrt();
    (slope, intercept, stderr)
}
