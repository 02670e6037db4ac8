//! The curvature function `κ(α) = p(α)²·q(α)`, `q(α) = 1 - αᾱ·p(α)`, whose
//! sign changes are the turning points of `Π`, and the closed-form
//! equal- and proportional-variance analyses.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::model::Mixture;
use crate::numeric::{bisect, composite_grid, golden_min, ALPHA_EDGE, DEFAULT_UNIFORM_POINTS};
use crate::pair::PairLine;

/// `|q|` at a grid-refined extremum below which a touching zero is degenerate.
pub const TANGENCY_TOL: f64 = 1e-12;
/// Relative Frobenius deviation accepted for `Σ_j = σ²Σ_i`.
pub const PROPORTIONAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureEval {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub kappa: f64,
}

/// Zeroes of `q` on `(0, 1)`: sign changes, and touching zeroes that change no sign.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct QZeroes {
    pub crossings: Vec<f64>,
    pub degenerate: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpecialCase {
    EqualVariance,
    ProportionalVariance,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecialCaseReport {
    pub case: SpecialCase,
    /// `σ²` with `Σ_j = σ²Σ_i`, when proportional.
    pub sigma2: Option<f64>,
    /// `(μ_j - μ_i)'Σ_i⁻¹(μ_j - μ_i)`.
    pub mahalanobis2: f64,
    pub unimodal_for_all_pi: bool,
    pub root_alphas: Vec<f64>,
    /// The pair is bimodal exactly for weights on `j` inside this interval.
    pub pi_interval: Option<(f64, f64)>,
    /// Separation `μ₀²` at or below which the pair is unimodal for every weight.
    pub rf_bound: Option<f64>,
    /// `s(μ)`; nonpositive exactly when unimodal.
    pub discriminant: Option<f64>,
}

pub(crate) fn eval_line(line: &PairLine, alpha: f64) -> CurvatureEval {
    let p = line.p(alpha);
    let q = 1.0 - alpha * (1.0 - alpha) * p;
    CurvatureEval {
        alpha,
        p,
        q,
        kappa: p * p * q,
    }
}

pub fn curvature_eval(m: &Mixture, i: usize, j: usize, alpha: f64) -> Result<CurvatureEval> {
    let line = PairLine::new(m, i, j)?;
    Ok(eval_line(&line, alpha))
}

/// `κ` on the composite α-grid, endpoints included.
pub fn curvature_curve(m: &Mixture, i: usize, j: usize, n_samples: usize) -> Result<Vec<CurvatureEval>> {
    let line = PairLine::new(m, i, j)?;
    Ok(composite_grid(n_samples, None)
        .par_iter()
        .map(|&a| eval_line(&line, a))
        .collect())
}

/// All zeroes of `q` strictly inside `(0, 1)`.
pub fn q_zeroes(m: &Mixture, i: usize, j: usize) -> Result<QZeroes> {
    let line = PairLine::new(m, i, j)?;
    if line.coincident() {
        return Ok(QZeroes::default());
    }
    Ok(q_zeroes_line(&line))
}

pub(crate) fn q_zeroes_line(line: &PairLine) -> QZeroes {
    let grid = composite_grid(DEFAULT_UNIFORM_POINTS, Some(ALPHA_EDGE));
    let q: Vec<f64> = grid.par_iter().map(|&a| line.q(a)).collect();
    let f = |a: f64| line.q(a);
    let mut out = QZeroes::default();
    for k in 0..grid.len() - 1 {
        let (a, b) = (grid[k], grid[k + 1]);
        if q[k] == 0.0 {
            let before = if k > 0 { q[k - 1] } else { q[k + 1] };
            if k > 0 && before * q[k + 1] > 0.0 {
                out.degenerate.push(a);
            } else {
                out.crossings.push(a);
            }
        } else if q[k] * q[k + 1] < 0.0 {
            out.crossings.push(bisect(f, a, b, 0.0));
        }
    }
    // a dip of q below zero between two grid nodes leaves no sign change
    for k in 1..grid.len() - 1 {
        let (lo, hi) = (grid[k - 1], grid[k + 1]);
        // ties resolve to the left node so a symmetric pair is searched once
        let dip = q[k] > 0.0 && q[k] < 0.25 && q[k] < q[k - 1] && q[k] <= q[k + 1];
        let bump = q[k] < 0.0 && q[k] > -0.25 && q[k] > q[k - 1] && q[k] >= q[k + 1];
        if !(dip || bump) {
            continue;
        }
        let sign = if dip { 1.0 } else { -1.0 };
        let (am, fm) = golden_min(|a| sign * line.q(a), lo, hi, 1e-15);
        if fm.abs() <= TANGENCY_TOL {
            out.degenerate.push(am);
        } else if fm < 0.0 {
            out.crossings.push(bisect(f, lo, am, 0.0));
            out.crossings.push(bisect(f, am, hi, 0.0));
        }
    }
    out.crossings.sort_by(f64::total_cmp);
    out.degenerate.sort_by(f64::total_cmp);
    out
}

/// `μ₀²(σ²) = [2(1 - σ² + σ⁴)^{3/2} - (2σ⁶ - 3σ⁴ - 3σ² + 2)] / σ²`.
pub fn rf_bound(sigma2: f64) -> f64 {
    let s = sigma2;
    (2.0 * (1.0 - s + s * s).powf(1.5) - (2.0 * s.powi(3) - 3.0 * s * s - 3.0 * s + 2.0)) / s
}

/// `s(μ) = μ⁴σ² + 2μ²(σ²-2)(σ²+1)(2σ²-1) - 27σ²(σ²-1)²`.
pub fn discriminant_s(mahalanobis2: f64, sigma2: f64) -> f64 {
    let (m2, s) = (mahalanobis2, sigma2);
    m2 * m2 * s + 2.0 * m2 * (s - 2.0) * (s + 1.0) * (2.0 * s - 1.0) - 27.0 * s * (s - 1.0).powi(2)
}

/// Coefficients `[c0, c1, c2, c3]` of `q1(α) = (σ²ᾱ + α)³ - αᾱμ²σ²`.
fn q1_coefficients(mahalanobis2: f64, sigma2: f64) -> [f64; 4] {
    let (a, b, k) = (sigma2, 1.0 - sigma2, mahalanobis2 * sigma2);
    [a.powi(3), 3.0 * a * a * b - k, 3.0 * a * b * b + k, b.powi(3)]
}

pub fn q1(alpha: f64, mahalanobis2: f64, sigma2: f64) -> f64 {
    (sigma2 * (1.0 - alpha) + alpha).powi(3) - alpha * (1.0 - alpha) * mahalanobis2 * sigma2
}

/// Real roots of `c3 x³ + c2 x² + c1 x + c0`, by the trigonometric or Cardano
/// formula (a stable quadratic when the cubic term is negligible), each
/// polished by Newton's method.
pub fn real_cubic_roots(c: [f64; 4]) -> Vec<f64> {
    let [c0, c1, c2, c3] = c;
    let scale = c0.abs().max(c1.abs()).max(c2.abs());
    let mut roots = if c3.abs() <= 1e-6 * scale {
        quadratic_roots(c2, c1, c0)
    } else {
        let (a, b, cc) = (c2 / c3, c1 / c3, c0 / c3);
        let p = b - a * a / 3.0;
        let q = 2.0 * a.powi(3) / 27.0 - a * b / 3.0 + cc;
        let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
        let shift = -a / 3.0;
        if p == 0.0 {
            vec![(-q).cbrt() + shift]
        } else if disc > 0.0 {
            let sd = disc.sqrt();
            vec![(-q / 2.0 + sd).cbrt() + (-q / 2.0 - sd).cbrt() + shift]
        } else {
            let r = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
            let phi = arg.acos() / 3.0;
            (0..3)
                .map(|k| r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift)
                .collect()
        }
    };
    let poly = |x: f64| ((c3 * x + c2) * x + c1) * x + c0;
    let deriv = |x: f64| (3.0 * c3 * x + 2.0 * c2) * x + c1;
    for r in roots.iter_mut() {
        for _ in 0..50 {
            let d = deriv(*r);
            if d == 0.0 {
                break;
            }
            let step = poly(*r) / d;
            *r -= step;
            if step.abs() <= 1e-16 * r.abs().max(1.0) {
                break;
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { vec![] } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let t = -0.5 * (b + b.signum() * disc.sqrt());
    let mut r = vec![t / a];
    if t != 0.0 {
        r.push(c / t);
    }
    r
}

/// Roots of `q1` in `(0, 1)` for the proportional-variance pair.
pub fn proportional_roots(mahalanobis2: f64, sigma2: f64) -> Vec<f64> {
    real_cubic_roots(q1_coefficients(mahalanobis2, sigma2))
        .into_iter()
        .filter(|&a| a > 0.0 && a < 1.0)
        .collect()
}

/// Detects `Σ_j = σ²Σ_i`; returns `σ²`.
pub(crate) fn proportionality(line: &PairLine) -> Option<f64> {
    let (si, sj) = (line.ci.cov(), line.cj.cov());
    let sigma2 = sj.trace() / si.trace();
    let dev = (sj - si * sigma2).norm() / sj.norm();
    (dev <= PROPORTIONAL_TOL).then_some(sigma2)
}

pub fn special_case_analysis(m: &Mixture, i: usize, j: usize) -> Result<SpecialCaseReport> {
    let line = PairLine::new(m, i, j)?;
    let mahalanobis2 = line.ci.mahalanobis2(line.cj.mean());
    let pi_pair = |roots: &[f64]| match roots {
        [a, b] => {
            let (pa, pb) = (line.pi(*a), line.pi(*b));
            Some((pa.min(pb), pa.max(pb)))
        }
        _ => None,
    };
    match proportionality(&line) {
        Some(raw) => {
            let equal = (raw - 1.0).abs() <= PROPORTIONAL_TOL;
            let sigma2 = if equal { 1.0 } else { raw };
            let bound = rf_bound(sigma2);
            let unimodal = mahalanobis2 <= bound * (1.0 + 1e-12);
            let root_alphas = if unimodal {
                vec![]
            } else {
                proportional_roots(mahalanobis2, sigma2)
            };
            Ok(SpecialCaseReport {
                case: if equal {
                    SpecialCase::EqualVariance
                } else {
                    SpecialCase::ProportionalVariance
                },
                sigma2: Some(sigma2),
                mahalanobis2,
                unimodal_for_all_pi: unimodal,
                pi_interval: pi_pair(&root_alphas),
                root_alphas,
                rf_bound: Some(bound),
                discriminant: Some(discriminant_s(mahalanobis2, sigma2)),
            })
        }
        None => {
            let zeroes = if line.coincident() {
                QZeroes::default()
            } else {
                q_zeroes_line(&line)
            };
            Ok(SpecialCaseReport {
                case: SpecialCase::General,
                sigma2: None,
                mahalanobis2,
                unimodal_for_all_pi: zeroes.crossings.is_empty(),
                pi_interval: pi_pair(&zeroes.crossings),
                root_alphas: zeroes.crossings,
                rf_bound: None,
                discriminant: None,
            })
        }
    }
}
