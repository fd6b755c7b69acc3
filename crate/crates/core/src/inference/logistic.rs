//! Logistic regression by Newton-Raphson, with Wald inference, and the
//! covariate table reader used to build designs.

use std::collections::HashMap;
use std::io::Read;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats;

pub const GRADIENT_TOL: f64 = 1e-8;
pub const MAX_ITER: usize = 100;
pub const SEPARATION_NORM: f64 = 1e3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionFit {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub se: Vec<f64>,
    pub z: Vec<f64>,
    pub ci_lower: Vec<f64>,
    pub ci_upper: Vec<f64>,
    pub level: f64,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(x))` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn log_likelihood(x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    eta.iter().zip(y).map(|(&e, &t)| t * e - softplus(e)).sum()
}

fn gradient_and_information(x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eta = x * beta;
    let p: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
    let resid = DVector::from_iterator(y.len(), y.iter().zip(&p).map(|(t, q)| t - q));
    let grad = x.transpose() * resid;
    let w = DVector::from_iterator(y.len(), p.iter().map(|q| q * (1.0 - q)));
    let mut xw = x.clone();
    for (mut row, wi) in xw.row_iter_mut().zip(w.iter()) {
        row *= *wi;
    }
    let info = x.transpose() * xw;
    (grad, info)
}

/// Fit `P(y = 1) = logistic(X beta)`. `rows` is the design (include an
/// intercept column explicitly); `names` labels its columns.
pub fn logistic_fit(rows: &[Vec<f64>], y: &[u8], names: &[String], level: f64) -> Result<RegressionFit> {
    let n = rows.len();
    if n == 0 || n != y.len() {
        return Err(Error::InvalidInput("design and response lengths differ or are empty".into()));
    }
    let p = rows[0].len();
    if names.len() != p || rows.iter().any(|r| r.len() != p) {
        return Err(Error::InvalidInput("ragged design matrix".into()));
    }
    if n < p {
        return Err(Error::InvalidInput(format!("{n} observations for {p} coefficients")));
    }
    for c in 0..p {
        if rows.iter().all(|r| r[c] == 0.0) {
            return Err(Error::InvalidInput(format!("column {} is identically zero", names[c])));
        }
    }
    let x = DMatrix::from_fn(n, p, |r, c| rows[r][c]);
    let sv = x.clone().svd(false, false).singular_values;
    if sv.min() <= 1e-10 * sv.max() {
        return Err(Error::Collinear);
    }
    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    let mut beta = DVector::zeros(p);
    let mut ll = log_likelihood(&x, &yf, &beta);
    let mut iterations = 0;
    let mut converged = false;
    let (mut grad, mut info) = gradient_and_information(&x, &yf, &beta);
    loop {
        if grad.amax() < GRADIENT_TOL {
            converged = true;
            break;
        }
        if iterations == MAX_ITER || beta.norm() > SEPARATION_NORM {
            break;
        }
        iterations += 1;
        let step = info.clone().cholesky().map(|c| c.solve(&grad)).or_else(|| info.clone().lu().solve(&grad));
        let step = match step {
            Some(s) => s,
            None => return Err(Error::Collinear),
        };
        // near the optimum the log-likelihood only moves by rounding error
        let slack = 1e-12 * (1.0 + ll.abs());
        let mut t = 1.0;
        loop {
            let cand = &beta + &step * t;
            let cand_ll = log_likelihood(&x, &yf, &cand);
            if cand_ll >= ll - slack || t < 1e-10 {
                beta = cand;
                ll = cand_ll;
                break;
            }
            t /= 2.0;
        }
        (grad, info) = gradient_and_information(&x, &yf, &beta);
    }
    let eta = &x * &beta;
    let perfect = eta.iter().zip(&yf).all(|(&e, &t)| (sigmoid(e) - t).abs() < 1e-6);
    if beta.norm() > SEPARATION_NORM || perfect {
        return Err(Error::Separation(beta.norm()));
    }
    let cov = match info.clone().cholesky() {
        Some(c) => c.inverse(),
        None => return Err(Error::Collinear),
    };
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::Collinear);
    }
    let zq = stats::normal_quantile(0.5 + level / 2.0);
    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let se: Vec<f64> = (0..p).map(|j| cov[(j, j)].sqrt()).collect();
    Ok(RegressionFit {
        names: names.to_vec(),
        z: coefficients.iter().zip(&se).map(|(b, s)| b / s).collect(),
        ci_lower: coefficients.iter().zip(&se).map(|(b, s)| b - zq * s).collect(),
        ci_upper: coefficients.iter().zip(&se).map(|(b, s)| b + zq * s).collect(),
        covariance: (0..p).map(|r| (0..p).map(|c| cov[(r, c)]).collect()).collect(),
        coefficients,
        se,
        level,
        log_likelihood: ll,
        iterations,
        gradient_norm: grad.amax(),
        converged,
    })
}

/// Observed information at `beta`: `X' W X`.
pub fn information(rows: &[Vec<f64>], y: &[u8], beta: &[f64]) -> Vec<Vec<f64>> {
    let (n, p) = (rows.len(), beta.len());
    let x = DMatrix::from_fn(n, p, |r, c| rows[r][c]);
    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    let (_, info) = gradient_and_information(&x, &yf, &DVector::from_column_slice(beta));
    (0..p).map(|r| (0..p).map(|c| info[(r, c)]).collect()).collect()
}

/// Log-likelihood at `beta` for a row-major design.
pub fn log_likelihood_at(rows: &[Vec<f64>], y: &[u8], beta: &[f64]) -> f64 {
    let (n, p) = (rows.len(), beta.len());
    let x = DMatrix::from_fn(n, p, |r, c| rows[r][c]);
    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    log_likelihood(&x, &yf, &DVector::from_column_slice(beta))
}

/// A covariate table: `vertex_id,label,extra...` with a header row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovariateTable {
    pub extra_names: Vec<String>,
    pub vertex: Vec<String>,
    pub label: Vec<u8>,
    pub extra: Vec<Vec<f64>>,
}

impl CovariateTable {
    pub fn read<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?.clone();
        if header.len() < 2 || &header[0] != "vertex_id" || &header[1] != "label" {
            return Err(Error::Parse {
                line: 1,
                msg: "header must start with vertex_id,label".into(),
            });
        }
        let extra_names: Vec<String> = header.iter().skip(2).map(String::from).collect();
        let mut table = CovariateTable {
            extra_names,
            vertex: Vec::new(),
            label: Vec::new(),
            extra: Vec::new(),
        };
        for (idx, rec) in rdr.records().enumerate() {
            let line = idx + 2;
            let rec = rec.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
            let label = match &rec[1] {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("label must be 0 or 1, found {other:?}"),
                    })
                }
            };
            let extra = rec
                .iter()
                .skip(2)
                .map(|v| {
                    v.parse::<f64>().map_err(|_| Error::Parse {
                        line,
                        msg: format!("non-numeric covariate {v:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            table.vertex.push(rec[0].to_string());
            table.label.push(label);
            table.extra.push(extra);
        }
        Ok(table)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.extra_names.iter().position(|n| n == name)
    }

    /// Rows aligned to graph vertices: `(vertex, row index)` pairs for rows
    /// whose vertex exists, plus the number of rows dropped.
    pub fn align(&self, vertex_of: &HashMap<&str, usize>) -> (Vec<(usize, usize)>, usize) {
        let mut kept = Vec::new();
        let mut dropped = 0;
        for (r, id) in self.vertex.iter().enumerate() {
            match vertex_of.get(id.as_str()) {
                Some(&v) => kept.push((v, r)),
                None => dropped += 1,
            }
        }
        kept.sort_unstable();
        (kept, dropped)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn synthetic(n: usize, beta: [f64; 2], seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut rng = crate::rng::chacha(seed, 0, 0);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![1.0, rng.gen::<f64>() * 2.0 - 1.0]).collect();
        let y = rows
            .iter()
            .map(|r| u8::from(rng.gen::<f64>() < sigmoid(beta[0] + beta[1] * r[1])))
            .collect();
        (rows, y)
    }

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("x{j}")).collect()
    }

    #[test]
    fn recovers_coefficients() {
        let (rows, y) = synthetic(5000, [0.5, -1.5], 1);
        let fit = logistic_fit(&rows, &y, &names(2), 0.95).unwrap();
        assert!(fit.converged && fit.gradient_norm < GRADIENT_TOL);
        assert!((fit.coefficients[0] - 0.5).abs() < 4.0 * fit.se[0]);
        assert!((fit.coefficients[1] + 1.5).abs() < 4.0 * fit.se[1]);
    }

    #[test]
    fn information_matches_finite_difference_hessian() {
        let (rows, y) = synthetic(400, [0.2, 1.0], 2);
        let fit = logistic_fit(&rows, &y, &names(2), 0.95).unwrap();
        let info = information(&rows, &y, &fit.coefficients);
        let h = 1e-4;
        for a in 0..2 {
            for b in 0..2 {
                let at = |da: f64, db: f64| {
                    let mut beta = fit.coefficients.clone();
                    beta[a] += da;
                    beta[b] += db;
                    log_likelihood_at(&rows, &y, &beta)
                };
                let fd = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
                assert!((-fd - info[a][b]).abs() < 1e-4 * info[a][b].abs().max(1.0), "{a}{b}");
            }
        }
    }

    #[test]
    fn single_observation_separates() {
        let err = logistic_fit(&[vec![1.0]], &[1], &names(1), 0.95).unwrap_err();
        assert!(matches!(err, Error::Separation(_)));
    }

    #[test]
    fn perfect_separation_detected() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![1.0, i as f64]).collect();
        let y: Vec<u8> = (0..20).map(|i| u8::from(i >= 10)).collect();
        assert!(matches!(logistic_fit(&rows, &y, &names(2), 0.95), Err(Error::Separation(_))));
    }

    #[test]
    fn collinear_columns() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![1.0, i as f64, 2.0 * i as f64]).collect();
        let y: Vec<u8> = (0..30).map(|i| (i % 3 == 0) as u8).collect();
        assert!(matches!(logistic_fit(&rows, &y, &names(3), 0.95), Err(Error::Collinear)));
    }

    #[test]
    fn zero_column_rejected() {
        let rows = vec![vec![1.0, 0.0]; 5];
        assert!(logistic_fit(&rows, &[0, 1, 0, 1, 1], &names(2), 0.95).is_err());
    }

    #[test]
    fn covariate_table() {
        let text = "vertex_id,label,age\na,1,15\nb,0,16\nzz,1,14\n";
        let t = CovariateTable::read(text.as_bytes()).unwrap();
        assert_eq!(t.extra_names, vec!["age"]);
        let idx: HashMap<&str, usize> = [("a", 0), ("b", 1)].into_iter().collect();
        let (kept, dropped) = t.align(&idx);
        assert_eq!(kept, vec![(0, 0), (1, 1)]);
        assert_eq!(dropped, 1);
        assert!(CovariateTable::read("id,label\n".as_bytes()).is_err());
        assert!(CovariateTable::read("vertex_id,label\na,2\n".as_bytes()).is_err());
    }
}
