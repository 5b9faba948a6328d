//! Ordinary least squares with classical or HC1 sandwich covariance.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Relative threshold on the pivoted-QR diagonal below which a column counts
/// as linearly dependent.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceKind {
    #[default]
    Classical,
    /// Heteroscedasticity-robust sandwich with the `n / (n - p)` correction.
    Hc1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub residual_variance: f64,
    pub n_obs: usize,
    pub regressor_names: Vec<String>,
    pub covariance_kind: CovarianceKind,
}

impl LinearFit {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.regressor_names.iter().position(|r| r == name)
    }

    /// Coefficient by regressor name.
    pub fn coef(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.coefficients[i])
    }

    pub fn variance(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.covariance[(i, i)])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.variance(name).map(f64::sqrt)
    }

    pub fn covariance_between(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.covariance[(self.index_of(a)?, self.index_of(b)?)])
    }
}

/// Fits `response ~ design` by least squares. `design` must already contain
/// the intercept column; `names` labels its columns.
pub fn ols_fit(
    design: &DMatrix<f64>,
    response: &[f64],
    names: Vec<String>,
    covariance: CovarianceKind,
) -> Result<LinearFit> {
    let (n, p) = design.shape();
    if response.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "design has {n} rows, response has {}",
            response.len()
        )));
    }
    if names.len() != p {
        return Err(Error::DimensionMismatch(format!("{} names for {p} columns", names.len())));
    }
    if n <= p {
        return Err(Error::TooFewObservations { n_obs: n, columns: p });
    }

    let rank = numerical_rank(design);
    if rank < p {
        return Err(Error::RankDeficient { rank, columns: p });
    }

    let y = DVector::from_column_slice(response);
    let xtx = design.tr_mul(design);
    let chol = xtx
        .cholesky()
        .ok_or(Error::RankDeficient { rank: p - 1, columns: p })?;
    let xtx_inv = chol.inverse();
    let beta = &xtx_inv * design.tr_mul(&y);
    let resid = &y - design * &beta;
    let rss = resid.norm_squared();
    let residual_variance = rss / (n - p) as f64;

    let cov = match covariance {
        CovarianceKind::Classical => &xtx_inv * residual_variance,
        CovarianceKind::Hc1 => {
            let mut meat = DMatrix::<f64>::zeros(p, p);
            for i in 0..n {
                let row = design.row(i);
                let e2 = resid[i] * resid[i];
                for a in 0..p {
                    let ra = row[a] * e2;
                    for b in a..p {
                        meat[(a, b)] += ra * row[b];
                    }
                }
            }
            for a in 0..p {
                for b in 0..a {
                    meat[(a, b)] = meat[(b, a)];
                }
            }
            &xtx_inv * meat * &xtx_inv * (n as f64 / (n - p) as f64)
        }
    };
    // Symmetrize away rounding noise.
    let covariance_matrix = (&cov + cov.transpose()) * 0.5;

    Ok(LinearFit {
        coefficients: beta.iter().copied().collect(),
        covariance: covariance_matrix,
        residual_variance,
        n_obs: n,
        regressor_names: names,
        covariance_kind: covariance,
    })
}

fn numerical_rank(design: &DMatrix<f64>) -> usize {
    let p = design.ncols();
    // Scale columns so the tolerance is relative to each column's magnitude.
    let mut scaled = design.clone();
    for mut col in scaled.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    let qr = scaled.col_piv_qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..p).map(|i| r[(i, i)].abs()).collect();
    let largest = diag.iter().copied().fold(0.0, f64::max);
    if largest == 0.0 {
        return 0;
    }
    diag.iter().filter(|&&d| d > RANK_TOLERANCE * largest).count()
}

/// Design matrix with a leading intercept column followed by `columns`.
pub fn design_with_intercept(n: usize, columns: &[&[f64]]) -> DMatrix<f64> {
    let p = columns.len() + 1;
    DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { columns[j - 1][i] })
}
