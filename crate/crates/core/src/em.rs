//! CSV ingestion and maximum-likelihood fitting of full-covariance Gaussian
//! mixtures by EM, restarted from several k-means++ seedings.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Component, Mixture};
use crate::numeric::log_sum_exp;

/// Ridge added to every covariance, relative to the mean data variance.
pub const RIDGE_FACTOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    /// One observation per row.
    pub rows: DMatrix<f64>,
    pub names: Option<Vec<String>>,
}

impl DataMatrix {
    pub fn new(rows: DMatrix<f64>, names: Option<Vec<String>>) -> Result<Self> {
        if let Some(n) = &names {
            if n.len() != rows.ncols() {
                return Err(Error::DimensionMismatch {
                    expected: rows.ncols(),
                    found: n.len(),
                    context: "column names",
                });
            }
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("data contain non-finite entries".into()));
        }
        Ok(Self { rows, names })
    }

    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    fn row(&self, i: usize) -> DVector<f64> {
        self.rows.row(i).transpose()
    }
}

pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<DataMatrix> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let names = if has_header {
        Some(reader.headers()?.iter().map(str::to_owned).collect::<Vec<_>>())
    } else {
        None
    };
    let mut width = names.as_ref().map(Vec::len);
    let mut values = Vec::new();
    let mut n = 0;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        match width {
            Some(w) if w != record.len() => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {w} fields, found {}", record.len()),
                })
            }
            None => width = Some(record.len()),
            _ => {}
        }
        for cell in record.iter() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                message: format!("non-numeric cell {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite cell {cell:?}"),
                });
            }
            values.push(v);
        }
        n += 1;
    }
    let d = width.unwrap_or(0);
    if n == 0 || d == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    }
    DataMatrix::new(DMatrix::from_row_slice(n, d, &values), names)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    pub k: usize,
    pub n_seeds: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop when the relative log-likelihood change drops below this.
    pub tol: f64,
}

impl EmOptions {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            n_seeds: 50,
            seed: 0,
            max_iter: 1000,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmFit {
    pub mixture: Mixture,
    pub log_likelihood: f64,
    /// Log-likelihood after every iteration of the winning run.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Which restart won.
    pub seed_index: usize,
}

pub fn fit_em(data: &DataMatrix, opts: &EmOptions) -> Result<EmFit> {
    let (n, d, k) = (data.n(), data.dim(), opts.k);
    if k == 0 || opts.n_seeds == 0 || opts.max_iter == 0 || opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument(
            "k, n_seeds, max_iter and tol must be positive".into(),
        ));
    }
    if n < k * (d + 1) {
        return Err(Error::TooFewRows { rows: n, k, dim: d });
    }
    let mean = data.rows.row_mean().transpose();
    let centered = DMatrix::from_fn(n, d, |i, j| data.rows[(i, j)] - mean[j]);
    let mean_var = centered.iter().map(|v| v * v).sum::<f64>() / (n * d) as f64;
    let ridge = RIDGE_FACTOR * mean_var;
    if ridge.is_nan() || ridge <= 0.0 {
        return Err(Error::DegenerateFit { component: 0 });
    }
    let runs: Vec<Result<EmFit>> = (0..opts.n_seeds)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(s as u64));
            let resp = kmeanspp_responsibilities(data, k, &mut rng);
            let mut fit = run_em(data, resp, ridge, opts)?;
            fit.seed_index = s;
            Ok(fit)
        })
        .collect();
    let mut best: Option<EmFit> = None;
    let mut first_err = None;
    for run in runs {
        match run {
            Ok(fit) => {
                if best.as_ref().is_none_or(|b| fit.log_likelihood > b.log_likelihood) {
                    best = Some(fit);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("at least one seed ran"))
}

/// Hard assignments to k-means++ centers, as an initial responsibility matrix.
fn kmeanspp_responsibilities(data: &DataMatrix, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = data.n();
    let mut centers = vec![data.row(rng.random_range(0..n))];
    let mut dist: Vec<f64> = (0..n).map(|i| (data.row(i) - &centers[0]).norm_squared()).collect();
    while centers.len() < k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            dist.iter()
                .position(|&w| {
                    u -= w;
                    u < 0.0
                })
                .unwrap_or(n - 1)
        } else {
            rng.random_range(0..n)
        };
        let c = data.row(pick);
        for (i, di) in dist.iter_mut().enumerate() {
            *di = di.min((data.row(i) - &c).norm_squared());
        }
        centers.push(c);
    }
    let mut resp = DMatrix::zeros(n, k);
    for i in 0..n {
        let x = data.row(i);
        let best = (0..k)
            .min_by(|&a, &b| {
                (&x - &centers[a])
                    .norm_squared()
                    .total_cmp(&(&x - &centers[b]).norm_squared())
            })
            .expect("k >= 1");
        resp[(i, best)] = 1.0;
    }
    resp
}

fn m_step(data: &DataMatrix, resp: &DMatrix<f64>, ridge: f64) -> Result<Mixture> {
    let (n, d) = (data.n(), data.dim());
    let k = resp.ncols();
    let mut comps = Vec::with_capacity(k);
    let mut weights = Vec::with_capacity(k);
    for j in 0..k {
        let nk: f64 = resp.column(j).sum();
        if nk.is_nan() || nk <= 1e-10 * n as f64 {
            return Err(Error::DegenerateFit { component: j });
        }
        let mut mu = DVector::zeros(d);
        for i in 0..n {
            mu.axpy(resp[(i, j)] / nk, &data.row(i), 1.0);
        }
        let mut cov = DMatrix::identity(d, d) * ridge;
        for i in 0..n {
            let r = data.row(i) - &mu;
            cov.ger(resp[(i, j)] / nk, &r, &r, 1.0);
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        comps.push(Component::new(mu, cov, j).map_err(|_| Error::DegenerateFit { component: j })?);
        weights.push(nk / n as f64);
    }
    Mixture::new(comps, weights)
}

/// E-step: fills `resp` with posteriors and returns the log-likelihood.
fn e_step(data: &DataMatrix, m: &Mixture, resp: &mut DMatrix<f64>) -> f64 {
    let logw: Vec<f64> = m.weights().iter().map(|w| w.ln()).collect();
    let mut ll = 0.0;
    for i in 0..data.n() {
        let x = data.row(i);
        let logs: Vec<f64> = m
            .components()
            .iter()
            .zip(&logw)
            .map(|(c, lw)| lw + c.log_pdf(&x))
            .collect();
        let lse = log_sum_exp(&logs);
        ll += lse;
        for (j, l) in logs.iter().enumerate() {
            resp[(i, j)] = (l - lse).exp();
        }
    }
    ll
}

fn run_em(data: &DataMatrix, mut resp: DMatrix<f64>, ridge: f64, opts: &EmOptions) -> Result<EmFit> {
    let mut m = m_step(data, &resp, ridge)?;
    let mut history = vec![e_step(data, &m, &mut resp)];
    let mut converged = false;
    for _ in 0..opts.max_iter {
        m = m_step(data, &resp, ridge)?;
        let ll = e_step(data, &m, &mut resp);
        let prev = *history.last().expect("nonempty");
        history.push(ll);
        if ((ll - prev) / ll.abs().max(1.0)).abs() < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(EmFit {
        mixture: m,
        log_likelihood: *history.last().expect("nonempty"),
        iterations: history.len() - 1,
        history,
        converged,
        seed_index: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_plain_and_headed_files() {
        let f = write_tmp("1,2\n3,4\n5,6\n");
        let d = load_csv(f.path(), false).unwrap();
        assert_eq!((d.n(), d.dim()), (3, 2));
        assert_eq!(d.rows[(2, 1)], 6.0);
        let f = write_tmp("a,b\n1,2\n3,4\n");
        let d = load_csv(f.path(), true).unwrap();
        assert_eq!(d.names.as_deref().unwrap(), ["a", "b"]);
        assert_eq!(d.n(), 2);
    }

    #[test]
    fn ragged_row_names_its_line() {
        let f = write_tmp("a,b\n1,2\n3\n");
        match load_csv(f.path(), true) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let f = write_tmp("1,2\n3,x\n");
        assert!(matches!(load_csv(f.path(), false), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_csv("/nonexistent/file.csv", false),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn single_component_is_sample_moments() {
        let rows = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 2.0, 0.0, 0.0, 2.0, 2.0, 2.0]);
        let data = DataMatrix::new(rows, None).unwrap();
        let fit = fit_em(
            &data,
            &EmOptions {
                n_seeds: 2,
                ..EmOptions::new(1)
            },
        )
        .unwrap();
        let c = fit.mixture.component(0);
        assert!((c.mean() - DVector::from_vec(vec![1.0, 1.0])).amax() < 1e-15);
        let ridge = RIDGE_FACTOR * 1.0;
        assert!((c.cov()[(0, 0)] - (1.0 + ridge)).abs() < 1e-14);
        assert!(c.cov()[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn too_few_rows() {
        let data = DataMatrix::new(DMatrix::from_row_slice(3, 2, &[0.0, 1.0, 2.0, 3.0, 4.0, 6.0]), None).unwrap();
        assert!(matches!(
            fit_em(&data, &EmOptions::new(2)),
            Err(Error::TooFewRows { .. })
        ));
    }

    #[test]
    fn constant_data_is_degenerate() {
        let data = DataMatrix::new(DMatrix::from_element(10, 2, 1.0), None).unwrap();
        assert!(matches!(
            fit_em(&data, &EmOptions::new(1)),
            Err(Error::DegenerateFit { .. })
        ));
    }
}
