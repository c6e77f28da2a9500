use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::special::normal_two_sided;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticParams {
    /// Converged once every coefficient moves less than this in one step.
    pub tol: f64,
    pub max_iter: usize,
    /// Any |β| beyond this is reported as separation.
    pub separation_bound: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100,
            separation_bound: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub z: Vec<f64>,
    pub p_values: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub log_likelihood: f64,
    /// Log-likelihood before the first step and after every accepted step.
    pub log_likelihood_trace: Vec<f64>,
    /// Max-abs score of the per-row mean log-likelihood at the returned estimate.
    pub gradient_norm: f64,
}

/// The fit diverged or the information matrix became singular.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub reason: String,
    pub coefficients: Vec<f64>,
    pub iterations: usize,
}

impl fmt::Display for Separation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "separation after {} iterations: {} (coefficients {:?})",
            self.iterations, self.reason, self.coefficients
        )
    }
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

// log(1 + e^eta) without overflow
fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

fn log_likelihood(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    eta.iter().zip(y.iter()).map(|(e, yi)| yi * e - softplus(*e)).sum()
}

/// Score vector and Fisher information at `beta`.
fn score_and_information(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    beta: &DVector<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    let p = (x * beta).map(sigmoid);
    let score = x.transpose() * (y - &p);
    let mut xw = x.clone();
    for (mut row, pi) in xw.row_iter_mut().zip(p.iter()) {
        row *= pi * (1.0 - pi);
    }
    (score, x.transpose() * xw)
}

/// Maximum-likelihood logistic regression by IRLS with step halving.
///
/// `x` is row-major and must already contain the intercept column.
pub fn logistic_fit(x: &[Vec<f64>], y: &[bool], params: &LogisticParams) -> Result<RegressionResult> {
    let n = x.len();
    let k = x.first().map_or(0, Vec::len);
    if n != y.len() {
        return Err(Error::InvalidArgument(format!("{n} rows but {} labels", y.len())));
    }
    if k == 0 || n < k {
        return Err(Error::InvalidArgument(format!("need rows >= columns > 0, got {n}x{k}")));
    }
    if x.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidArgument("ragged design matrix".into()));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in design matrix".into()));
    }
    let xm = DMatrix::from_fn(n, k, |i, j| x[i][j]);
    let ym = DVector::from_iterator(n, y.iter().map(|&b| f64::from(u8::from(b))));

    let separation = |reason: &str, beta: &DVector<f64>, iterations| {
        Error::Separation(Separation {
            reason: reason.into(),
            coefficients: beta.iter().copied().collect(),
            iterations,
        })
    };

    let mut beta = DVector::zeros(k);
    let mut ll = log_likelihood(&xm, &ym, &beta);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iter {
        iterations += 1;
        let (score, info) = score_and_information(&xm, &ym, &beta);
        let Some(chol) = info.cholesky() else {
            return Err(separation("singular information matrix", &beta, iterations));
        };
        let step = chol.solve(&score);
        let mut scale = 1.0;
        let (mut candidate, mut cand_ll);
        loop {
            candidate = &beta + &step * scale;
            cand_ll = log_likelihood(&xm, &ym, &candidate);
            if cand_ll >= ll || scale < 1e-10 {
                break;
            }
            scale *= 0.5;
        }
        if cand_ll < ll {
            // no ascent direction left at working precision
            converged = step.amax() * scale < params.tol;
            break;
        }
        let change = (&candidate - &beta).amax();
        beta = candidate;
        ll = cand_ll;
        trace.push(ll);
        if beta.amax() > params.separation_bound {
            return Err(separation("coefficient magnitude exceeds bound", &beta, iterations));
        }
        if change < params.tol {
            converged = true;
            break;
        }
    }

    let (score, info) = score_and_information(&xm, &ym, &beta);
    let Some(cov) = info.cholesky().map(|c| c.inverse()) else {
        return Err(separation("singular information matrix", &beta, iterations));
    };
    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let std_errors: Vec<f64> = (0..k).map(|j| cov[(j, j)].sqrt()).collect();
    let z: Vec<f64> = coefficients.iter().zip(&std_errors).map(|(b, s)| b / s).collect();
    let p_values = z.iter().map(|z| normal_two_sided(*z)).collect();
    Ok(RegressionResult {
        coefficients,
        std_errors,
        z,
        p_values,
        converged,
        iterations,
        log_likelihood: ll,
        log_likelihood_trace: trace,
        gradient_norm: score.amax() / n as f64,
    })
}
