//! Shared formatting for the CSV and JSON artifacts.

/// A float with 17 significant digits, scientific notation.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Least-squares line `y ≈ slope·x + intercept`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
