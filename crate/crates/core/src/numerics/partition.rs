use ndarray::{ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// `log Σ exp(xᵢ)`, shifted by the maximum so large arguments do not overflow.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.into_iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// `log F(u)` where `F(u) = Σᵢ exp(uᵀ wᵢ)` over the rows `wᵢ` of `data`.
pub fn log_partition(u: ArrayView1<'_, f64>, data: ArrayView2<'_, f64>) -> Result<f64> {
    if u.len() != data.ncols() {
        return Err(Error::Argument(format!(
            "direction has {} entries, data has {} columns",
            u.len(),
            data.ncols()
        )));
    }
    if data.nrows() == 0 {
        return Err(Error::Argument("partition function over zero rows".into()));
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("direction has non-finite entries".into()));
    }
    let dots = data.dot(&u);
    Ok(log_sum_exp(dots.iter().copied()))
}
