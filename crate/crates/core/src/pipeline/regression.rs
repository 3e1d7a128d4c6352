//! Quadratic least squares with HC1 heteroskedasticity-robust errors.
//!
//! The model is `y = b0 + b1·x + b2·x²`. It is fitted on centered `x` and
//! mapped back to the raw parameterization; the sandwich covariance is
//! carried through the same linear map, so the reported errors are exactly
//! those of the raw design.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest tolerated determinant of the scale-normalized `XᵀX`.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    /// `(intercept, linear, quadratic)`.
    pub coefficients: [f64; 3],
    /// HC1 standard errors in the same order.
    pub robust_ses: [f64; 3],
    /// 0 when `y` is constant.
    pub r_squared: f64,
    pub n: usize,
}

impl RegressionFit {
    pub fn t_stats(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.coefficients[i] / self.robust_ses[i])
    }
}

pub fn regress_quadratic(points: &[(f64, f64)]) -> Result<RegressionFit> {
    let n = points.len();
    if n < 4 {
        return Err(Error::TooFewPoints(n));
    }
    let nf = n as f64;
    let x_mean = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let y_mean = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let row = |x: f64| {
        let z = x - x_mean;
        Vector3::new(1.0, z, z * z)
    };

    let mut xtx = Matrix3::zeros();
    let mut xty = Vector3::zeros();
    for &(x, y) in points {
        let r = row(x);
        xtx += r * r.transpose();
        xty += r * y;
    }

    let diag = xtx.diagonal();
    if diag.iter().any(|d| *d <= 0.0) {
        return Err(Error::RankDeficient);
    }
    let scale = diag.map(|d| 1.0 / d.sqrt());
    let normalized = Matrix3::from_diagonal(&scale) * xtx * Matrix3::from_diagonal(&scale);
    if normalized.determinant().abs() < RANK_TOL {
        return Err(Error::RankDeficient);
    }
    let inv = xtx.try_inverse().ok_or(Error::RankDeficient)?;
    let gamma = inv * xty;

    let mut meat = Matrix3::zeros();
    let mut ssr = 0.0;
    let mut sst = 0.0;
    for &(x, y) in points {
        let r = row(x);
        let e = y - r.dot(&gamma);
        meat += r * r.transpose() * (e * e);
        ssr += e * e;
        sst += (y - y_mean) * (y - y_mean);
    }
    let cov_centered = inv * meat * inv * (nf / (nf - 3.0));

    // raw = T · centered
    let t = Matrix3::new(
        1.0,
        -x_mean,
        x_mean * x_mean,
        0.0,
        1.0,
        -2.0 * x_mean,
        0.0,
        0.0,
        1.0,
    );
    let beta = t * gamma;
    let cov = t * cov_centered * t.transpose();

    let r_squared = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(RegressionFit {
        coefficients: [beta[0], beta[1], beta[2]],
        robust_ses: [0, 1, 2].map(|i| cov[(i, i)].max(0.0).sqrt()),
        r_squared,
        n,
    })
}
