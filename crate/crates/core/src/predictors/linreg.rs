use serde::{Deserialize, Serialize};

use super::PredictorError;

/// Ridge damping added to the normal equations (intercept not damped).
pub const RIDGE_LAMBDA: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinRegModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

impl LinRegModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(x)
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }
}

/// Least squares with intercept via the normal equations.
#[allow(clippy::needless_range_loop)]
pub fn linreg_fit(xs: &[Vec<f64>], ys: &[f64]) -> Result<LinRegModel, PredictorError> {
    let first = xs.first().ok_or(PredictorError::EmptyInput)?;
    if xs.len() != ys.len() {
        return Err(PredictorError::Config(format!(
            "{} feature rows for {} targets",
            xs.len(),
            ys.len()
        )));
    }
    let dim = first.len() + 1;
    // a = [1 x]^T [1 x] + lambda * diag(0, 1, ..., 1)
    let mut a = vec![vec![0.0; dim]; dim];
    let mut b = vec![0.0; dim];
    let mut row = vec![0.0; dim];
    for (x, &y) in xs.iter().zip(ys) {
        if x.len() + 1 != dim {
            return Err(PredictorError::FeatureLength {
                expected: dim - 1,
                found: x.len(),
            });
        }
        row[0] = 1.0;
        row[1..].copy_from_slice(x);
        for i in 0..dim {
            b[i] += row[i] * y;
            for j in i..dim {
                a[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            a[i][j] = a[j][i];
        }
        if i > 0 {
            a[i][i] += RIDGE_LAMBDA;
        }
    }
    let beta =
        solve(a, b).ok_or_else(|| PredictorError::Diverged("singular normal equations".into()))?;
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(PredictorError::Diverged("non-finite coefficients".into()));
    }
    Ok(LinRegModel {
        intercept: beta[0],
        coefficients: beta[1..].to_vec(),
    })
}

/// Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= factor * a[col][c];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}
