//! The Π-function of a component pair and the pi-equation `Π(α) = π`.
//!
//! For the pair `(i, j)` with `α` the ridgeline coordinate of `j`, the point
//! `x*(α)` is a critical point of `(1-π)φ_i + πφ_j` exactly when
//! `π = Π(α) = 1 / (1 + ᾱφ_j(x*)/(αφ_i(x*)))`. Rising crossings of a
//! horizontal line are modes; falling crossings are saddles.

use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::q_zeroes_line;
use crate::error::{Error, Result};
use crate::model::{Mixture, SimplexPoint};
use crate::numeric::{bisect, composite_grid, ALPHA_EDGE, DEFAULT_UNIFORM_POINTS};
use crate::pair::PairLine;
use crate::ridgeline::{classify_at, CriticalKind, CriticalPoint};

/// Smallest α tried when a crossing hides below the grid's first node.
const ALPHA_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiCurve {
    /// `(α, Π(α))` pairs on the composite grid, endpoints included.
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Rising,
    Falling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub alpha: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    pub modes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModalityBands {
    /// 0-based component indices.
    pub pair: (usize, usize),
    pub breakpoints: Vec<f64>,
    pub bands: Vec<Band>,
    pub zero_alphas: Vec<f64>,
    /// Touching zeroes of `q`; they split no band.
    pub degenerate_alphas: Vec<f64>,
}

impl ModalityBands {
    /// Mode count at weight `pi`; on a breakpoint the lower band wins.
    pub fn modes_at(&self, pi: f64) -> usize {
        self.bands
            .iter()
            .find(|b| pi <= b.hi)
            .or(self.bands.last())
            .map_or(1, |b| b.modes)
    }

    /// Union of bands with at least `n` modes, as `(lo, hi)` hulls of each run.
    pub fn at_least(&self, n: usize) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for b in self.bands.iter().filter(|b| b.modes >= n) {
            match out.last_mut() {
                Some(last) if last.1 == b.lo => last.1 = b.hi,
                _ => out.push((b.lo, b.hi)),
            }
        }
        out
    }
}

fn check_pi(pi: f64) -> Result<()> {
    if !(pi > 0.0 && pi < 1.0) {
        return Err(Error::InvalidArgument(format!("mixing proportion {pi} outside (0, 1)")));
    }
    Ok(())
}

pub fn pi_of_alpha(m: &Mixture, i: usize, j: usize, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::BadSimplexPoint(format!("{alpha} outside [0, 1]")));
    }
    Ok(PairLine::distinct(m, i, j)?.pi(alpha))
}

pub fn pi_curve(m: &Mixture, i: usize, j: usize, n_samples: usize) -> Result<PiCurve> {
    let line = PairLine::distinct(m, i, j)?;
    let samples = composite_grid(n_samples, None)
        .par_iter()
        .map(|&a| (a, line.pi(a)))
        .collect();
    Ok(PiCurve { samples })
}

/// Search nodes: the composite grid, the zeroes of `q` (between which `Π` is
/// monotone), and the endpoints 0 and 1.
fn search_nodes(breaks: &[f64]) -> Vec<f64> {
    let mut nodes = composite_grid(DEFAULT_UNIFORM_POINTS, Some(ALPHA_EDGE));
    nodes.extend(breaks.iter().copied().filter(|&a| a > 0.0 && a < 1.0));
    nodes.push(0.0);
    nodes.push(1.0);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    nodes
}

pub(crate) fn crossings_on(line: &PairLine, pi: f64, breaks: &[f64]) -> Vec<Crossing> {
    let nodes = search_nodes(breaks);
    let f: Vec<f64> = nodes.par_iter().map(|&a| line.pi(a) - pi).collect();
    let g = |a: f64| line.pi(a) - pi;
    let mut out = Vec::new();
    for k in 0..nodes.len() - 1 {
        let (a, b) = (nodes[k], nodes[k + 1]);
        let (fa, fb) = (f[k], f[k + 1]);
        let alpha = if fa == 0.0 && k > 0 {
            a
        } else if fa * fb < 0.0 {
            if a == 0.0 {
                bisect_log(&g, b)
            } else {
                bisect(g, a, b, 0.0)
            }
        } else {
            continue;
        };
        let direction = if fb > fa { Direction::Rising } else { Direction::Falling };
        out.push(Crossing { alpha, direction });
    }
    out
}

/// Bisection in `log α` on `[ALPHA_FLOOR, hi]`, for crossings below the grid.
fn bisect_log(g: &impl Fn(f64) -> f64, hi: f64) -> f64 {
    if g(ALPHA_FLOOR) > 0.0 {
        return ALPHA_FLOOR;
    }
    bisect(|t: f64| g(t.exp()), ALPHA_FLOOR.ln(), hi.ln(), 0.0).exp()
}

/// All solutions of `Π(α) = π` in `(0, 1)`, in increasing α.
pub fn solve_pi_equation(m: &Mixture, i: usize, j: usize, pi: f64) -> Result<Vec<Crossing>> {
    check_pi(pi)?;
    let line = PairLine::distinct(m, i, j)?;
    let zeroes = q_zeroes_line(&line);
    Ok(crossings_on(&line, pi, &zeroes.crossings))
}

/// Critical points of `(1-π)φ_i + πφ_j`, classified by their Hessians and
/// checked against the crossing directions.
pub fn critical_points_for_pi(m: &Mixture, i: usize, j: usize, pi: f64) -> Result<Vec<CriticalPoint>> {
    let crossings = solve_pi_equation(m, i, j, pi)?;
    let pair = m.pair(i, j, pi)?;
    let line = PairLine::new(&pair, 0, 1)?;
    classify_crossings(&pair, &line, &crossings)
}

pub(crate) fn classify_crossings(
    pair: &Mixture,
    line: &PairLine,
    crossings: &[Crossing],
) -> Result<Vec<CriticalPoint>> {
    let d = pair.dim();
    crossings
        .iter()
        .map(|c| {
            let alpha = SimplexPoint::pair(c.alpha)?;
            let cp = classify_at(pair, alpha, line.x(c.alpha))?;
            let expected = match c.direction {
                Direction::Rising => d,
                Direction::Falling => d - 1,
            };
            if !cp.degenerate && cp.neg_eigs != expected {
                return Err(Error::InternalInconsistency(format!(
                    "{:?} crossing at alpha = {} has {} negative Hessian eigenvalues, expected {expected}",
                    c.direction, c.alpha, cp.neg_eigs
                )));
            }
            Ok(cp)
        })
        .collect()
}

/// Mode count as a function of the weight on `j`.
pub fn modality_bands(m: &Mixture, i: usize, j: usize) -> Result<ModalityBands> {
    let line = PairLine::new(m, i, j)?;
    if line.coincident() {
        return Ok(ModalityBands {
            pair: (i, j),
            breakpoints: vec![],
            bands: vec![Band {
                lo: 0.0,
                hi: 1.0,
                modes: 1,
            }],
            zero_alphas: vec![],
            degenerate_alphas: vec![],
        });
    }
    let zeroes = q_zeroes_line(&line);
    let mut breakpoints: Vec<f64> = zeroes.crossings.iter().map(|&a| line.pi(a)).collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    let mut edges = vec![0.0];
    edges.extend(breakpoints.iter().copied().filter(|&b| b > 0.0 && b < 1.0));
    edges.push(1.0);
    let counts: Vec<usize> = edges
        .par_windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            crossings_on(&line, mid, &zeroes.crossings)
                .iter()
                .filter(|c| c.direction == Direction::Rising)
                .count()
        })
        .collect();
    let mut bands: Vec<Band> = Vec::new();
    for (w, &modes) in edges.windows(2).zip(&counts) {
        match bands.last_mut() {
            Some(last) if last.modes == modes => last.hi = w[1],
            _ => bands.push(Band {
                lo: w[0],
                hi: w[1],
                modes,
            }),
        }
    }
    Ok(ModalityBands {
        pair: (i, j),
        breakpoints,
        bands,
        zero_alphas: zeroes.crossings,
        degenerate_alphas: zeroes.degenerate,
    })
}

pub fn mode_count(m: &Mixture, i: usize, j: usize, pi: f64) -> Result<usize> {
    check_pi(pi)?;
    let line = PairLine::new(m, i, j)?;
    if line.coincident() {
        return Ok(1);
    }
    let zeroes = q_zeroes_line(&line);
    Ok(crossings_on(&line, pi, &zeroes.crossings)
        .iter()
        .filter(|c| c.direction == Direction::Rising)
        .count())
}

/// Kind expected for a crossing of the given direction in dimension `d`.
pub fn expected_kind(direction: Direction, d: usize) -> CriticalKind {
    match direction {
        Direction::Rising => CriticalKind::Mode,
        Direction::Falling if d > 1 => CriticalKind::Saddle,
        Direction::Falling => CriticalKind::LocalMin,
    }
}
