//! Error metrics and aggregation helpers.

use crate::error::{Error, Result};

/// Mean squared error over all entries (scaled space during training).
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::shape(
            "mse",
            format!("{}", target.len()),
            format!("{}", pred.len()),
        ));
    }
    let sum: f64 = pred
        .iter()
        .zip(target.iter())
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Relative L2 error in percent: `||ref - pred||_2 / ||ref||_2 * 100`.
pub fn rel_l2(pred: &[f64], reference: &[f64]) -> Result<f64> {
    if pred.len() != reference.len() || pred.is_empty() {
        return Err(Error::shape(
            "rel_l2",
            format!("{}", reference.len()),
            format!("{}", pred.len()),
        ));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (p, r) in pred.iter().zip(reference.iter()) {
        num += (r - p) * (r - p);
        den += r * r;
    }
    if den == 0.0 {
        return Err(Error::ZeroNormReference);
    }
    Ok((num / den).sqrt() * 100.0)
}

pub fn mae(pred: &[f64], reference: &[f64]) -> Result<f64> {
    if pred.len() != reference.len() || pred.is_empty() {
        return Err(Error::shape(
            "mae",
            format!("{}", reference.len()),
            format!("{}", pred.len()),
        ));
    }
    let sum: f64 = pred
        .iter()
        .zip(reference.iter())
        .map(|(p, r)| (r - p).abs())
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r2(pred: &[f64], reference: &[f64]) -> Result<f64> {
    if pred.len() != reference.len() || pred.is_empty() {
        return Err(Error::shape(
            "r2",
            format!("{}", reference.len()),
            format!("{}", pred.len()),
        ));
    }
    let mean = reference.iter().sum::<f64>() / reference.len() as f64;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (p, r) in pred.iter().zip(reference.iter()) {
        ss_res += (r - p) * (r - p);
        ss_tot += (r - mean) * (r - mean);
    }
    if ss_tot == 0.0 {
        // constant reference: perfect prediction scores 1, anything else 0
        return Ok(if ss_res == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(1.0 - ss_res / ss_tot)
}

/// Row means (per-case time average) and column means (per-step case
/// average) of a rectangular `[rows x cols]` error matrix.
pub fn aggregate_errors(errors: &[f64], rows: usize, cols: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if rows == 0 || cols == 0 || errors.len() != rows * cols {
        return Err(Error::shape(
            "aggregate",
            format!("{rows} x {cols}"),
            format!("{}", errors.len()),
        ));
    }
    let mut row_means = vec![0.0; rows];
    let mut col_means = vec![0.0; cols];
    for r in 0..rows {
        for c in 0..cols {
            let v = errors[r * cols + c];
            row_means[r] += v;
            col_means[c] += v;
        }
    }
    for v in row_means.iter_mut() {
        *v /= cols as f64;
    }
    for v in col_means.iter_mut() {
        *v /= rows as f64;
    }
    Ok((row_means, col_means))
}

/// Ordinary least-squares line fit; returns `(slope, intercept, r2)`.
///
/// When y is constant the fit is the constant itself and r2 is defined as 0.
pub fn linear_trend(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::shape(
            "linear_trend",
            "two or more matched points",
            format!("{} x / {} y", x.len(), y.len()),
        ));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (xi, yi) in x.iter().zip(y.iter()) {
        sxx += (xi - mean_x) * (xi - mean_x);
        sxy += (xi - mean_x) * (yi - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateAbscissa);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (xi, yi) in x.iter().zip(y.iter()) {
        let fit = slope * xi + intercept;
        ss_res += (yi - fit) * (yi - fit);
        ss_tot += (yi - mean_y) * (yi - mean_y);
    }
    let r2 = if ss_tot == 0.0 {
        0.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok((slope, intercept, r2))
}
