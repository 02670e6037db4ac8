//! Brute-force cross-checks: dense grid search for modes, multistart
//! quasi-Newton ascent, and finite-difference derivative checks.
//!
//! Nothing here goes through the ridgeline. The density and its gradient are
//! summed component by component so that agreement with the topography
//! pipeline is evidence rather than tautology.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Mixture;
use crate::numeric::{primes, radical_inverse};
use crate::ridgeline::ser_dvec;
use crate::topo::TopographyReport;

/// Scaled gradient norm at which the polish stops.
pub const POLISH_GTOL: f64 = 1e-10;
/// Modes closer than this (times `max(1, σ_max)`) are one mode.
pub const MODE_MERGE_TOL: f64 = 1e-6;
/// Location agreement between the oracle and a report.
pub const AGREEMENT_TOL: f64 = 1e-3;
pub const RESIDUAL_CHECK_TOL: f64 = 1e-8;
pub const POSTERIOR_CHECK_TOL: f64 = 1e-8;
pub const FD_GRADIENT_TOL: f64 = 1e-5;
pub const FD_HESSIAN_TOL: f64 = 1e-4;
pub const FD_POINTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points: usize,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, points: usize) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
                context: "grid bounds",
            });
        }
        if points < 3 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 3 points per axis, got {points}"
            )));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(l, u)| !(l.is_finite() && u.is_finite() && l < u))
        {
            return Err(Error::InvalidArgument(
                "grid bounds must be finite with lower < upper".into(),
            ));
        }
        Ok(Self { lower, upper, points })
    }

    /// Componentwise range of the means, widened by 4 of the largest marginal SDs.
    pub fn default_for(m: &Mixture, points: usize) -> Self {
        let pad = 4.0 * m.length_scale();
        let d = m.dim();
        let mut lower = vec![f64::INFINITY; d];
        let mut upper = vec![f64::NEG_INFINITY; d];
        for c in m.components() {
            for k in 0..d {
                lower[k] = lower[k].min(c.mean()[k] - pad);
                upper[k] = upper[k].max(c.mean()[k] + pad);
            }
        }
        Self {
            lower,
            upper,
            points: points.max(3),
        }
    }

    fn coord(&self, axis: usize, idx: usize) -> f64 {
        let t = idx as f64 / (self.points - 1) as f64;
        self.lower[axis] + t * (self.upper[axis] - self.lower[axis])
    }

    fn contains(&self, x: &DVector<f64>) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| v >= l && v <= u)
    }
}

/// Default points per axis for the cross-check in `verify_report`.
pub fn default_points(dim: usize) -> usize {
    match dim {
        1 => 2001,
        2 => 401,
        _ => 201,
    }
}

/// `log g(x)` and `∇log g(x)` by direct summation over components.
fn log_g_and_grad(m: &Mixture, x: &DVector<f64>) -> (f64, DVector<f64>) {
    let terms: Vec<(f64, DVector<f64>)> = m
        .components()
        .iter()
        .zip(m.weights())
        .filter(|(_, &w)| w > 0.0)
        .map(|(c, &w)| (w.ln() + c.log_pdf(x), c.precision() * (c.mean() - x)))
        .collect();
    let top = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut grad = DVector::zeros(x.len());
    for (l, g) in &terms {
        let w = (l - top).exp();
        total += w;
        grad.axpy(w, g, 1.0);
    }
    (top + total.ln(), grad / total)
}

fn log_g(m: &Mixture, x: &DVector<f64>) -> f64 {
    let terms: Vec<f64> = m
        .components()
        .iter()
        .zip(m.weights())
        .filter(|(_, &w)| w > 0.0)
        .map(|(c, &w)| w.ln() + c.log_pdf(x))
        .collect();
    crate::numeric::log_sum_exp(&terms)
}

/// Maximizes `log g` from `x0` by BFGS with Armijo backtracking, each step
/// capped at one length scale.
pub fn bfgs_ascent(m: &Mixture, x0: &DVector<f64>) -> DVector<f64> {
    let scale = m.length_scale();
    let d = x0.len();
    let mut x = x0.clone();
    let (mut f, mut g) = log_g_and_grad(m, &x);
    let mut h = DMatrix::identity(d, d) * (scale * scale);
    for _ in 0..500 {
        if g.norm() * scale <= POLISH_GTOL {
            break;
        }
        let mut dir = &h * &g;
        let mut slope = g.dot(&dir);
        if slope.is_nan() || slope <= 0.0 {
            h = DMatrix::identity(d, d) * (scale * scale);
            dir = &g * (scale * scale);
            slope = g.dot(&dir);
        }
        let len = dir.norm();
        if len > scale {
            dir *= scale / len;
            slope *= scale / len;
        }
        let mut t = 1.0;
        let accepted = loop {
            let cand = &x + &dir * t;
            let (fc, gc) = log_g_and_grad(m, &cand);
            if fc >= f + 1e-4 * t * slope {
                break Some((cand, fc, gc));
            }
            t *= 0.5;
            if t < 1e-20 {
                break None;
            }
        };
        let Some((xn, fn_, gn)) = accepted else { break };
        let s = &xn - &x;
        // ascent on f is descent on -f: y = ∇(-f)_new - ∇(-f)_old
        let y = &g - &gn;
        let sy = s.dot(&y);
        if sy > 1e-300 {
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            h += (&s * s.transpose()) * (rho * (1.0 + rho * yhy)) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        if s.norm() == 0.0 {
            break;
        }
        x = xn;
        f = fn_;
        g = gn;
    }
    x
}

/// Negative definite finite-difference Hessian of the direct-sum `log g`.
fn is_strict_max(m: &Mixture, x: &DVector<f64>) -> bool {
    let h = fd_hessian(|y| log_g_and_grad(m, y).1, x, 1e-4);
    SymmetricEigen::new(h).eigenvalues.iter().all(|&e| e < 0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleMode {
    #[serde(serialize_with = "ser_dvec")]
    pub x: DVector<f64>,
    pub log_density: f64,
    /// `‖∇log g‖·σ_max` after polishing.
    pub residual: f64,
}

fn polish_and_merge(m: &Mixture, seeds: &[DVector<f64>]) -> Vec<OracleMode> {
    let scale = m.length_scale();
    let polished: Vec<OracleMode> = seeds
        .par_iter()
        .map(|s| {
            let x = bfgs_ascent(m, s);
            let (f, g) = log_g_and_grad(m, &x);
            OracleMode {
                residual: g.norm() * scale,
                log_density: f,
                x,
            }
        })
        .collect();
    let tol = MODE_MERGE_TOL * scale.max(1.0);
    let mut out: Vec<OracleMode> = Vec::new();
    for p in polished {
        if p.residual > 1e-6 {
            continue;
        }
        match out.iter_mut().find(|q| (&q.x - &p.x).amax() < tol) {
            Some(q) if p.residual < q.residual => *q = p,
            Some(_) => {}
            None => out.push(p),
        }
    }
    // a stationary point on a symmetry plane stays there under ascent
    out.retain(|p| is_strict_max(m, &p.x));
    out.sort_by(|a, b| {
        a.x.iter()
            .zip(b.x.iter())
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    out
}

/// Interior grid points strictly higher than all `3^D - 1` neighbors, each
/// polished by [`bfgs_ascent`].
pub fn grid_modes(m: &Mixture, spec: &GridSpec) -> Result<Vec<OracleMode>> {
    let d = m.dim();
    if d > 3 {
        return Err(Error::DimensionTooLarge(d));
    }
    if spec.lower.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: spec.lower.len(),
            context: "grid bounds",
        });
    }
    let n = spec.points;
    let total = n.pow(d as u32);
    let unravel = |mut flat: usize| {
        let mut idx = [0usize; 3];
        for slot in idx.iter_mut().take(d) {
            *slot = flat % n;
            flat /= n;
        }
        idx
    };
    let point = |idx: &[usize; 3]| DVector::from_iterator(d, (0..d).map(|k| spec.coord(k, idx[k])));
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|f| log_g(m, &point(&unravel(f))))
        .collect();
    let strides: Vec<usize> = (0..d).map(|k| n.pow(k as u32)).collect();
    let center = (3usize.pow(d as u32) - 1) / 2;
    let offsets: Vec<isize> = (0..3usize.pow(d as u32))
        .filter(|&c| c != center)
        .map(|mut c| {
            strides
                .iter()
                .map(|&s| {
                    let step = (c % 3) as isize - 1;
                    c /= 3;
                    step * s as isize
                })
                .sum()
        })
        .collect();
    let seeds: Vec<DVector<f64>> = (0..total)
        .into_par_iter()
        .filter(|&f| {
            let idx = unravel(f);
            if idx.iter().take(d).any(|&i| i == 0 || i == n - 1) {
                return false;
            }
            let v = values[f];
            offsets.iter().all(|&o| values[(f as isize + o) as usize] < v)
        })
        .map(|f| point(&unravel(f)))
        .collect();
    Ok(polish_and_merge(m, &seeds))
}

/// BFGS ascent from `n_starts` seeded Halton points in the default box.
pub fn multistart_ascent(m: &Mixture, n_starts: usize, seed: u64) -> Vec<OracleMode> {
    let spec = GridSpec::default_for(m, 3);
    let d = m.dim();
    let bases = primes(d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let starts: Vec<DVector<f64>> = (1..=n_starts.max(1) as u64)
        .map(|i| {
            DVector::from_iterator(
                d,
                (0..d).map(|k| {
                    let u = (radical_inverse(i, bases[k]) + shift[k]).fract();
                    spec.lower[k] + u * (spec.upper[k] - spec.lower[k])
                }),
            )
        })
        .collect();
    polish_and_merge(m, &starts)
}

/// Central differences of a scalar function with one Richardson step, base step `h·max(1, |x_k|)`.
pub fn fd_gradient<F: Fn(&DVector<f64>) -> f64>(f: F, x: &DVector<f64>, h: f64) -> DVector<f64> {
    DVector::from_iterator(
        x.len(),
        (0..x.len()).map(|k| {
            let central = |step: f64| {
                let mut up = x.clone();
                let mut dn = x.clone();
                up[k] += step;
                dn[k] -= step;
                (f(&up) - f(&dn)) / (2.0 * step)
            };
            let step = h * x[k].abs().max(1.0);
            richardson(central(step), central(step / 2.0))
        }),
    )
}

/// Central differences of a gradient with one Richardson step, symmetrized.
pub fn fd_hessian<F: Fn(&DVector<f64>) -> DVector<f64>>(grad: F, x: &DVector<f64>, h: f64) -> DMatrix<f64> {
    let d = x.len();
    let mut out = DMatrix::zeros(d, d);
    for k in 0..d {
        let central = |step: f64| {
            let mut up = x.clone();
            let mut dn = x.clone();
            up[k] += step;
            dn[k] -= step;
            (grad(&up) - grad(&dn)) / (2.0 * step)
        };
        let step = h * x[k].abs().max(1.0);
        let (coarse, fine) = (central(step), central(step / 2.0));
        out.set_column(k, &coarse.zip_map(&fine, richardson));
    }
    (&out + out.transpose()) * 0.5
}

/// Cancels the `h²` term of two central differences at steps `h` and `h/2`.
fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub skipped: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub all_passed: bool,
    pub diagnostics: Vec<String>,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check(name: &str, measured: f64, tolerance: f64, detail: String) -> Check {
    Check {
        name: name.into(),
        passed: measured <= tolerance,
        skipped: false,
        measured,
        tolerance,
        detail,
    }
}

/// Largest distance from each of `a` to its nearest point of `b`, both ways.
fn set_distance(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    let one_way = |p: &[DVector<f64>], q: &[DVector<f64>]| {
        p.iter()
            .map(|x| q.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Cross-checks a topography report: (a) gradient residuals, (b) the
/// posterior fixed point, (c) agreement with [`grid_modes`] when `D <= 3`,
/// (d) analytic against finite-difference derivatives at seeded points.
pub fn verify_report(m: &Mixture, report: &TopographyReport) -> VerifyReport {
    verify_report_with(m, report, default_points(m.dim()))
}

pub fn verify_report_with(m: &Mixture, report: &TopographyReport, grid_points: usize) -> VerifyReport {
    let scale = m.length_scale();
    let mut checks = Vec::new();
    let mut diagnostics = Vec::new();

    let residual = report
        .critical_points
        .iter()
        .map(|c| log_g_and_grad(m, &c.x).1.norm() * scale)
        .fold(0.0, f64::max);
    checks.push(check(
        "gradient_residual",
        residual,
        RESIDUAL_CHECK_TOL,
        format!(
            "max ‖∇log g‖·σ_max over {} critical points",
            report.critical_points.len()
        ),
    ));

    let posterior = report
        .critical_points
        .iter()
        .map(|c| {
            let logs: Vec<f64> = m
                .components()
                .iter()
                .zip(m.weights())
                .map(|(comp, &w)| {
                    if w > 0.0 {
                        w.ln() + comp.log_pdf(&c.x)
                    } else {
                        f64::NEG_INFINITY
                    }
                })
                .collect();
            let lse = crate::numeric::log_sum_exp(&logs);
            logs.iter()
                .zip(c.alpha.coords())
                .map(|(l, a)| ((l - lse).exp() - a).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    checks.push(check(
        "posterior_identity",
        posterior,
        POSTERIOR_CHECK_TOL,
        "max |posterior(x) - α|".into(),
    ));

    if m.dim() <= 3 {
        let spec = GridSpec::default_for(m, grid_points);
        let oracle = grid_modes(m, &spec).expect("dimension checked");
        let theirs: Vec<DVector<f64>> = oracle.iter().map(|o| o.x.clone()).collect();
        let ours: Vec<DVector<f64>> = report.modes().map(|c| c.x.clone()).collect();
        for x in &ours {
            if !spec.contains(x) {
                diagnostics.push(format!("mode at {:?} lies outside the oracle box", x.as_slice()));
            }
        }
        let same_count = theirs.len() == ours.len();
        let dist = if same_count {
            set_distance(&ours, &theirs)
        } else {
            f64::INFINITY
        };
        let mut c = check(
            "grid_agreement",
            dist,
            AGREEMENT_TOL,
            format!(
                "report {} modes, grid {} modes ({} points per axis)",
                ours.len(),
                theirs.len(),
                grid_points
            ),
        );
        c.passed = same_count && dist <= AGREEMENT_TOL;
        checks.push(c);
    } else {
        checks.push(Check {
            name: "grid_agreement".into(),
            passed: true,
            skipped: true,
            measured: f64::NAN,
            tolerance: AGREEMENT_TOL,
            detail: format!("skipped: dimension {} > 3", m.dim()),
        });
    }

    let (grad_err, hess_err) = fd_errors(m, FD_POINTS, 0);
    checks.push(check(
        "fd_gradient",
        grad_err,
        FD_GRADIENT_TOL,
        format!("max relative error at {FD_POINTS} points"),
    ));
    checks.push(check(
        "fd_hessian",
        hess_err,
        FD_HESSIAN_TOL,
        format!("max relative error at {FD_POINTS} points"),
    ));

    let all_passed = checks.iter().all(|c| c.passed);
    VerifyReport {
        checks,
        all_passed,
        diagnostics,
    }
}

/// Worst relative errors of the analytic gradient and Hessian of `log g`
/// against finite differences at `n` seeded points of the default box.
pub fn fd_errors(m: &Mixture, n: usize, seed: u64) -> (f64, f64) {
    let spec = GridSpec::default_for(m, 3);
    let scale = m.length_scale();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grad_err: f64 = 0.0;
    let mut hess_err: f64 = 0.0;
    for _ in 0..n {
        let x = DVector::from_iterator(
            m.dim(),
            (0..m.dim()).map(|k| rng.random_range(spec.lower[k]..spec.upper[k])),
        );
        let an = m.grad_log_density(&x).expect("dimension matches");
        let fd = fd_gradient(|y| log_g(m, y), &x, 1e-5);
        grad_err = grad_err.max((&an - &fd).amax() / an.amax().max(1.0 / scale));
        let an_h = m.log_density_hessian(&x).expect("dimension matches");
        let fd_h = fd_hessian(|y| log_g_and_grad(m, y).1, &x, 1e-4);
        hess_err = hess_err.max((&an_h - &fd_h).amax() / an_h.amax().max(1.0 / (scale * scale)));
    }
    (grad_err, hess_err)
}
