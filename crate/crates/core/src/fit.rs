//! Log-log least-squares fitting shared by the tail, classifier and
//! Wiener-Hopf modules.

/// Least-squares line through (ln x, ln y). Returns (slope, intercept).
/// Points with y <= 0 are rejected by the caller.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Max relative deviation of ys from the fitted power law.
pub fn max_relative_residual(xs: &[f64], ys: &[f64], slope: f64, intercept: f64) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let fit = (intercept + slope * x.ln()).exp();
            ((y - fit) / fit).abs()
        })
        .fold(0.0, f64::max)
}
