use super::Tensor2;
use crate::error::{Error, Result};

/// Compare an analytic gradient against central differences.
///
/// Each scalar of `point` is perturbed by `±h`; the numeric derivative
/// `(f(θ+h) − f(θ−h)) / 2h` is compared with the analytic one. Returns the
/// maximum of `|a − n| / max(|a|, |n|, 1e-8)` over all scalars.
pub fn grad_check<F>(mut f: F, analytic: &[Tensor2], point: &[Tensor2], h: f64) -> Result<f64>
where
    F: FnMut(&[Tensor2]) -> f64,
{
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {h}"
        )));
    }
    if analytic.len() != point.len() {
        return Err(Error::Shape(format!(
            "{} analytic tensors for {} parameters",
            analytic.len(),
            point.len()
        )));
    }
    for (a, p) in analytic.iter().zip(point) {
        a.check_same_shape(p)?;
    }
    let mut theta: Vec<Tensor2> = point.to_vec();
    let mut worst = 0.0f64;
    for t in 0..theta.len() {
        for i in 0..theta[t].data().len() {
            let orig = theta[t].data()[i];
            theta[t].data_mut()[i] = orig + h;
            let plus = f(&theta);
            theta[t].data_mut()[i] = orig - h;
            let minus = f(&theta);
            theta[t].data_mut()[i] = orig;
            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::NonFinite(format!(
                    "objective at parameter {t}, index {i}"
                )));
            }
            let numeric = (plus - minus) / (2.0 * h);
            let a = analytic[t].data()[i];
            let denom = a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max((a - numeric).abs() / denom);
        }
    }
    Ok(worst)
}
