//! Full topography reports, pairwise analyses, and the linkage graph of
//! components whose pairwise submixtures share a single mode.

use nalgebra::{DVector, SymmetricEigen};
use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{q_zeroes_line, special_case_analysis, SpecialCaseReport};
use crate::error::{Error, Result};
use crate::model::{Mixture, SimplexPoint};
use crate::numeric::{primes, radical_inverse};
use crate::pair::PairLine;
use crate::piplot::{classify_crossings, crossings_on, modality_bands, Crossing, Direction, ModalityBands};
use crate::ridgeline::{
    classify_at, ridgeline_point, simplex_grid_elevation, CriticalKind, CriticalPoint, PLATEAU_TOL,
};

/// Critical points closer than this in α (∞-norm) are one point.
pub const MERGE_TOL: f64 = 1e-6;
/// Target for data-space refinement, `‖∇log g‖·σ_max`.
pub const REFINE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Single,
    ExactK2,
    GridK3,
    MultistartKGE4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopoOptions {
    pub resolution: usize,
    pub n_starts: usize,
    pub seed: u64,
}

impl Default for TopoOptions {
    fn default() -> Self {
        Self {
            resolution: 400,
            n_starts: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TopographyReport {
    pub k: usize,
    pub dim: usize,
    pub weights: Vec<f64>,
    pub method: Method,
    /// No completeness guarantee (multistart search).
    pub heuristic: bool,
    pub mode_count: usize,
    pub saddle_count: usize,
    pub local_min_count: usize,
    pub critical_points: Vec<CriticalPoint>,
    /// Weight bands of the pair, for two components.
    pub bands: Option<ModalityBands>,
    pub diagnostics: Vec<String>,
}

impl TopographyReport {
    pub fn modes(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.critical_points.iter().filter(|c| c.kind == CriticalKind::Mode)
    }

    pub fn saddles(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.critical_points.iter().filter(|c| c.kind == CriticalKind::Saddle)
    }

    fn from_points(m: &Mixture, method: Method, mut cps: Vec<CriticalPoint>, diagnostics: Vec<String>) -> Self {
        cps.sort_by(|a, b| {
            a.alpha
                .coords()
                .iter()
                .zip(b.alpha.coords())
                .map(|(x, y)| y.total_cmp(x))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let count = |k: CriticalKind| cps.iter().filter(|c| c.kind == k).count();
        Self {
            k: m.k(),
            dim: m.dim(),
            weights: m.weights().to_vec(),
            method,
            heuristic: method == Method::MultistartKGE4,
            mode_count: count(CriticalKind::Mode),
            saddle_count: count(CriticalKind::Saddle),
            local_min_count: count(CriticalKind::LocalMin),
            critical_points: cps,
            bands: None,
            diagnostics,
        }
    }
}

pub fn full_topography(m: &Mixture) -> Result<TopographyReport> {
    full_topography_with(m, &TopoOptions::default())
}

pub fn full_topography_with(m: &Mixture, opts: &TopoOptions) -> Result<TopographyReport> {
    let active: Vec<usize> = (0..m.k()).filter(|&j| m.weights()[j] > 0.0).collect();
    if active.len() < m.k() {
        return reduced_topography(m, &active, opts);
    }
    match m.k() {
        1 => {
            let cp = classify_at(m, SimplexPoint::vertex(1, 0), m.component(0).mean().clone())?;
            Ok(TopographyReport::from_points(m, Method::Single, vec![cp], vec![]))
        }
        2 => exact_pair(m),
        3 => grid_k3(m, opts),
        _ => multistart(m, opts),
    }
}

/// Analyzes the positive-weight components alone and re-embeds the result.
fn reduced_topography(m: &Mixture, active: &[usize], opts: &TopoOptions) -> Result<TopographyReport> {
    let sub = Mixture::new(
        active.iter().map(|&j| m.component(j).clone()).collect(),
        active.iter().map(|&j| m.weights()[j]).collect(),
    )?;
    let inner = full_topography_with(&sub, opts)?;
    let cps = inner
        .critical_points
        .into_iter()
        .map(|mut cp| {
            let mut coords = vec![0.0; m.k()];
            for (&j, &a) in active.iter().zip(cp.alpha.coords()) {
                coords[j] = a;
            }
            cp.alpha = SimplexPoint::normalized(coords)?;
            Ok(cp)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut diagnostics = inner.diagnostics;
    diagnostics.push(format!("{} zero-weight component(s) ignored", m.k() - active.len()));
    let mut report = TopographyReport::from_points(m, inner.method, cps, diagnostics);
    report.heuristic = inner.heuristic;
    Ok(report)
}

fn exact_pair(m: &Mixture) -> Result<TopographyReport> {
    let pi = m.weights()[1];
    let line = PairLine::new(m, 0, 1)?;
    if line.coincident() {
        let cp = classify_at(m, SimplexPoint::pair(0.5)?, m.component(0).mean().clone())?;
        let mut r = TopographyReport::from_points(
            m,
            Method::ExactK2,
            vec![cp],
            vec!["coincident means: the ridgeline is a single point".into()],
        );
        r.bands = Some(modality_bands(m, 0, 1)?);
        return Ok(r);
    }
    let zeroes = q_zeroes_line(&line);
    let crossings = crossings_on(&line, pi, &zeroes.crossings);
    let cps = classify_crossings(m, &line, &crossings)?;
    let mut diagnostics = Vec::new();
    if cps.iter().any(|c| c.degenerate) {
        diagnostics.push("degenerate critical point: a Hessian eigenvalue is numerically zero".into());
    }
    let mut r = TopographyReport::from_points(m, Method::ExactK2, cps, diagnostics);
    r.bands = Some(modality_bands(m, 0, 1)?);
    Ok(r)
}

/// Step along an ascent direction from the eigen-modified Newton system of
/// `log g`, capped at one length scale, with Armijo backtracking.
pub(crate) fn ascend(m: &Mixture, x0: &DVector<f64>) -> Result<DVector<f64>> {
    let scale = m.length_scale();
    let mut x = x0.clone();
    let mut f = m.log_density(&x)?;
    for _ in 0..500 {
        let grad = m.grad_log_density(&x)?;
        if grad.norm() * scale <= REFINE_TOL {
            break;
        }
        let eig = SymmetricEigen::new(m.log_density_hessian(&x)?);
        let floor = 1e-10 * eig.eigenvalues.amax().max(1.0 / (scale * scale));
        let mut dir = DVector::zeros(x.len());
        for (k, lam) in eig.eigenvalues.iter().enumerate() {
            let v = eig.eigenvectors.column(k);
            dir.axpy(v.dot(&grad) / lam.abs().max(floor), &v, 1.0);
        }
        let len = dir.norm();
        if len > scale {
            dir *= scale / len;
        }
        let slope = grad.dot(&dir);
        let mut t = 1.0;
        let mut moved = false;
        while t > 1e-16 {
            let cand = &x + &dir * t;
            let fc = m.log_density(&cand)?;
            if fc >= f + 1e-4 * t * slope {
                moved = cand != x;
                x = cand;
                f = fc;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok(x)
}

/// Undamped Newton on `∇log g = 0`, for saddles and minima.
pub(crate) fn newton_critical(m: &Mixture, x0: &DVector<f64>) -> Result<Option<DVector<f64>>> {
    let scale = m.length_scale();
    let mut x = x0.clone();
    for _ in 0..100 {
        let grad = m.grad_log_density(&x)?;
        if grad.norm() * scale <= REFINE_TOL {
            return Ok(Some(x));
        }
        let h = m.log_density_hessian(&x)?;
        let Some(step) = h.lu().solve(&grad) else {
            return Ok(None);
        };
        let len = step.norm();
        let step = if len > scale { step * (scale / len) } else { step };
        x -= step;
        if !x.iter().all(|v| v.is_finite()) {
            return Ok(None);
        }
    }
    let grad = m.grad_log_density(&x)?;
    Ok((grad.norm() * scale <= 1e3 * REFINE_TOL).then_some(x))
}

/// Classifies a refined data-space point, with `α` its posterior.
fn settle(m: &Mixture, x: DVector<f64>) -> Result<Option<CriticalPoint>> {
    let alpha = m.posterior(&x)?;
    match classify_at(m, alpha, x) {
        Ok(cp) => Ok(Some(cp)),
        Err(Error::NotCritical { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn merge(points: Vec<CriticalPoint>) -> Vec<CriticalPoint> {
    let mut out: Vec<CriticalPoint> = Vec::new();
    for p in points {
        if !out.iter().any(|q| q.alpha.max_abs_diff(&p.alpha) < MERGE_TOL) {
            out.push(p);
        }
    }
    out
}

fn grid_k3(m: &Mixture, opts: &TopoOptions) -> Result<TopographyReport> {
    let grid = simplex_grid_elevation(m, opts.resolution)?;
    let lh: Vec<f64> = grid.nodes.iter().map(|n| n.log_h).collect();
    let mut mode_seeds = Vec::new();
    let mut other_seeds = Vec::new();
    for (k, node) in grid.nodes.iter().enumerate() {
        if node.is_local_max {
            mode_seeds.push(k);
            continue;
        }
        let ring = grid.ring(k);
        if ring.iter().any(|r| r.is_none()) {
            continue;
        }
        let diffs: Vec<f64> = ring.iter().map(|r| lh[r.unwrap()] - lh[k]).collect();
        if diffs.iter().any(|d| d.abs() <= PLATEAU_TOL) {
            continue;
        }
        let changes = (0..6)
            .filter(|&s| (diffs[s] > 0.0) != (diffs[(s + 1) % 6] > 0.0))
            .count();
        if changes >= 4 || diffs.iter().all(|&d| d > 0.0) {
            other_seeds.push(k);
        }
    }
    let modes: Vec<Option<CriticalPoint>> = mode_seeds
        .par_iter()
        .map(|&k| settle(m, ascend(m, &grid.nodes[k].x)?))
        .collect::<Result<_>>()?;
    let mut seeds: Vec<DVector<f64>> = other_seeds.iter().map(|&k| grid.nodes[k].x.clone()).collect();
    seeds.extend(pair_seeds(m)?);
    let others: Vec<Option<CriticalPoint>> = seeds
        .par_iter()
        .map(|x| match newton_critical(m, x)? {
            Some(x) => settle(m, x),
            None => Ok(None),
        })
        .collect::<Result<_>>()?;
    let mut diagnostics = Vec::new();
    let unrefined = modes.iter().filter(|c| c.is_none()).count();
    if unrefined > 0 {
        diagnostics.push(format!("{unrefined} grid maxima failed to refine"));
    }
    let found: Vec<CriticalPoint> = modes.into_iter().chain(others).flatten().collect();
    let cps = merge(found);
    if cps.iter().any(|c| c.degenerate) {
        diagnostics.push("degenerate critical point: a Hessian eigenvalue is numerically zero".into());
    }
    Ok(TopographyReport::from_points(m, Method::GridK3, cps, diagnostics))
}

/// Critical points of every pair at its renormalized weights. They seed the
/// critical points on the simplex edges, where the grid ring is incomplete.
fn pair_seeds(m: &Mixture) -> Result<Vec<DVector<f64>>> {
    let k = m.k();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let reports: Vec<PairReport> = pairs
        .par_iter()
        .map(|&(i, j)| analyze_pair(m, i, j))
        .collect::<Result<_>>()?;
    Ok(reports
        .into_iter()
        .flat_map(|r| r.critical_points.into_iter().map(|c| c.x))
        .collect())
}

/// Low-discrepancy points of the K-simplex: a Halton sequence in `K - 1`
/// dimensions with a seeded random shift, mapped through sorted spacings.
pub(crate) fn simplex_starts(k: usize, n: usize, seed: u64) -> Vec<SimplexPoint> {
    let bases = primes(k - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..k - 1).map(|_| rng.random::<f64>()).collect();
    let mut out: Vec<SimplexPoint> = (0..k).map(|v| SimplexPoint::vertex(k, v)).collect();
    for idx in 1..=n as u64 {
        let mut u: Vec<f64> = bases
            .iter()
            .zip(&shift)
            .map(|(&b, s)| (radical_inverse(idx, b) + s).fract())
            .collect();
        u.sort_by(f64::total_cmp);
        let mut coords = Vec::with_capacity(k);
        let mut prev = 0.0;
        for v in u.iter().chain(std::iter::once(&1.0)) {
            coords.push(v - prev);
            prev = *v;
        }
        out.push(SimplexPoint::normalized(coords).expect("spacings sum to one"));
    }
    out
}

fn multistart(m: &Mixture, opts: &TopoOptions) -> Result<TopographyReport> {
    let starts = simplex_starts(m.k(), opts.n_starts, opts.seed);
    let found: Vec<Option<CriticalPoint>> = starts
        .par_iter()
        .map(|a| settle(m, ascend(m, &ridgeline_point(m, a)?)?))
        .collect::<Result<_>>()?;
    let modes: Vec<CriticalPoint> = found
        .into_iter()
        .flatten()
        .filter(|c| c.kind == CriticalKind::Mode)
        .collect();
    let diagnostics = vec![format!(
        "multistart ascent from {} starts (seed {}); saddles are not enumerated",
        starts.len(),
        opts.seed
    )];
    Ok(TopographyReport::from_points(
        m,
        Method::MultistartKGE4,
        merge(modes),
        diagnostics,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    /// 0-based component indices.
    pub pair: (usize, usize),
    /// Relative weight of the second component within the pair.
    pub pi_pair: f64,
    pub crossings: Vec<Crossing>,
    pub critical_points: Vec<CriticalPoint>,
    pub mode_count: usize,
    pub bands: ModalityBands,
    pub curvature: SpecialCaseReport,
    /// Lowest saddle elevation over lowest peak elevation, when multimodal.
    pub saddle_ratio: Option<f64>,
}

/// Pair `(i, j)` at its relative weight `π_j/(π_i + π_j)` in the full mixture.
pub fn analyze_pair(m: &Mixture, i: usize, j: usize) -> Result<PairReport> {
    m.check_pair(i, j)?;
    let (wi, wj) = (m.weights()[i], m.weights()[j]);
    if wi + wj <= 0.0 {
        return Err(Error::ZeroWeightPair { i, j });
    }
    analyze_pair_at(m, i, j, wj / (wi + wj))
}

/// Pair `(i, j)` with weight `pi_pair` on `j`.
pub fn analyze_pair_at(m: &Mixture, i: usize, j: usize, pi_pair: f64) -> Result<PairReport> {
    if !(0.0..=1.0).contains(&pi_pair) {
        return Err(Error::InvalidArgument(format!("pair weight {pi_pair} outside [0, 1]")));
    }
    let bands = modality_bands(m, i, j)?;
    let curvature = special_case_analysis(m, i, j)?;
    let pair = m.pair(i, j, pi_pair)?;
    let line = PairLine::new(&pair, 0, 1)?;
    let (crossings, critical_points) = if pi_pair == 0.0 || pi_pair == 1.0 || line.coincident() {
        // a single effective component, or a ridgeline collapsed to one point
        let (alpha, x) = if pi_pair == 1.0 {
            (1.0, pair.component(1).mean().clone())
        } else {
            (0.0, pair.component(0).mean().clone())
        };
        let cp = classify_at(&pair, SimplexPoint::pair(alpha)?, x)?;
        (vec![], vec![cp])
    } else {
        let zeroes = q_zeroes_line(&line);
        let crossings = crossings_on(&line, pi_pair, &zeroes.crossings);
        let cps = classify_crossings(&pair, &line, &crossings)?;
        (crossings, cps)
    };
    let mode_count = if crossings.is_empty() {
        1
    } else {
        crossings.iter().filter(|c| c.direction == Direction::Rising).count()
    };
    let saddle_ratio = (mode_count > 1).then(|| {
        let lowest = |k: CriticalKind| {
            critical_points
                .iter()
                .filter(|c| c.kind == k)
                .map(|c| c.log_elevation)
                .fold(f64::INFINITY, f64::min)
        };
        (lowest(CriticalKind::Saddle).min(lowest(CriticalKind::LocalMin)) - lowest(CriticalKind::Mode)).exp()
    });
    Ok(PairReport {
        pair: (i, j),
        pi_pair,
        crossings,
        critical_points,
        mode_count,
        bands,
        curvature,
        saddle_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LinkReason {
    Unimodal,
    HighPass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkageEdge {
    pub i: usize,
    pub j: usize,
    pub reason: LinkReason,
    pub saddle_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkageGraph {
    pub nodes: Vec<usize>,
    pub edges: Vec<LinkageEdge>,
    /// Connected components, each sorted, ordered by smallest member.
    pub supercomponents: Vec<Vec<usize>>,
    pub tau: Option<f64>,
    #[serde(skip)]
    pub pairs: Vec<PairReport>,
}

impl LinkageGraph {
    /// `graph linkage { i -- j; ... }` with 1-based labels.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph linkage {\n");
        for n in &self.nodes {
            s.push_str(&format!("  {};\n", n + 1));
        }
        for e in &self.edges {
            s.push_str(&format!("  {} -- {};\n", e.i + 1, e.j + 1));
        }
        s.push_str("}\n");
        s
    }
}

pub fn linkage_graph(m: &Mixture, high_pass_tau: Option<f64>) -> Result<LinkageGraph> {
    linkage_graph_with(m, high_pass_tau, false)
}

/// As [`linkage_graph`]; `equal_pair_weights` analyzes every pair at 1/2
/// instead of its renormalized weights.
pub fn linkage_graph_with(m: &Mixture, high_pass_tau: Option<f64>, equal_pair_weights: bool) -> Result<LinkageGraph> {
    if m.k() < 2 {
        return Err(Error::InvalidArgument("linkage needs at least two components".into()));
    }
    if let Some(t) = high_pass_tau {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidArgument(format!("tau {t} outside (0, 1)")));
        }
    }
    let k = m.k();
    let pairs_idx: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let pairs: Vec<PairReport> = pairs_idx
        .par_iter()
        .map(|&(i, j)| {
            if equal_pair_weights {
                analyze_pair_at(m, i, j, 0.5)
            } else {
                analyze_pair(m, i, j)
            }
        })
        .collect::<Result<_>>()?;
    let mut edges = Vec::new();
    for p in &pairs {
        let (i, j) = p.pair;
        if p.mode_count == 1 {
            edges.push(LinkageEdge {
                i,
                j,
                reason: LinkReason::Unimodal,
                saddle_ratio: None,
            });
        } else if let (Some(tau), Some(r)) = (high_pass_tau, p.saddle_ratio) {
            if r >= tau {
                edges.push(LinkageEdge {
                    i,
                    j,
                    reason: LinkReason::HighPass,
                    saddle_ratio: Some(r),
                });
            }
        }
    }
    let mut uf = UnionFind::<usize>::new(k);
    for e in &edges {
        uf.union(e.i, e.j);
    }
    let labels = uf.into_labeling();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for n in 0..k {
        match blocks.iter_mut().find(|b| labels[b[0]] == labels[n]) {
            Some(b) => b.push(n),
            None => blocks.push(vec![n]),
        }
    }
    Ok(LinkageGraph {
        nodes: (0..k).collect(),
        edges,
        supercomponents: blocks,
        tau: high_pass_tau,
        pairs,
    })
}

pub fn supercomponents(m: &Mixture) -> Result<Vec<Vec<usize>>> {
    Ok(linkage_graph(m, None)?.supercomponents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use nalgebra::DMatrix;

    #[test]
    fn single_component_mode_at_mean() {
        let m = Mixture::from_parts(
            vec![DVector::from_vec(vec![2.0, -1.0])],
            vec![DMatrix::identity(2, 2)],
            vec![1.0],
        )
        .unwrap();
        let r = full_topography(&m).unwrap();
        assert_eq!(r.mode_count, 1);
        assert_eq!(r.critical_points[0].x, *m.component(0).mean());
    }

    #[test]
    fn example1_topography() {
        let r = full_topography(&fixtures::example1()).unwrap();
        assert_eq!((r.mode_count, r.saddle_count), (3, 2));
        let central = r.modes().find(|c| (c.alpha.coords()[1] - 0.5).abs() < 1e-6).unwrap();
        assert!((central.x[0] - 20.0 / 21.0).abs() < 1e-9);
        assert!((central.x[1] - 1.0 / 21.0).abs() < 1e-9);
        for cp in &r.critical_points {
            let post = fixtures::example1().posterior(&cp.x).unwrap();
            assert!(post.max_abs_diff(&cp.alpha) < 1e-8);
        }
    }

    #[test]
    fn example3_modes_near_means() {
        let m = fixtures::example3();
        let r = full_topography_with(
            &m,
            &TopoOptions {
                resolution: 200,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.mode_count, 3);
        for mode in r.modes() {
            assert!(m.components().iter().any(|c| (c.mean() - &mode.x).norm() < 0.25));
        }
    }

    #[test]
    fn example4_five_modes() {
        let m = fixtures::example4();
        let r = full_topography(&m).unwrap();
        assert_eq!(r.mode_count, 5, "{:#?}", r.critical_points);
        // two saddles per pair ridgeline, two of them next to the simplex edges
        assert_eq!(r.saddle_count, 4);
        assert!(r.modes().any(|c| (&c.x - m.component(1).mean()).norm() < 1e-9));
        for cp in &r.critical_points {
            assert!(m.posterior(&cp.x).unwrap().max_abs_diff(&cp.alpha) < 1e-8);
        }
    }

    #[test]
    fn multistart_finds_separated_modes() {
        let means = [[0.0, 0.0], [6.0, 0.0], [0.0, 6.0], [6.0, 6.0]];
        let m = Mixture::from_parts(
            means.iter().map(|v| DVector::from_column_slice(v)).collect(),
            vec![DMatrix::identity(2, 2); 4],
            vec![0.25; 4],
        )
        .unwrap();
        let r = full_topography_with(
            &m,
            &TopoOptions {
                n_starts: 200,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.heuristic);
        assert_eq!(r.method, Method::MultistartKGE4);
        assert_eq!(r.mode_count, 4);
    }

    #[test]
    fn zero_weight_components_are_skipped() {
        let m = fixtures::example1().with_weights(vec![1.0, 0.0]).unwrap();
        let r = full_topography(&m).unwrap();
        assert_eq!(r.mode_count, 1);
        assert_eq!(r.critical_points[0].alpha.coords(), &[1.0, 0.0]);
    }

    #[test]
    fn example4_pairs() {
        let m = fixtures::example4();
        for (i, j) in [(0, 1), (1, 2)] {
            let p = analyze_pair(&m, i, j).unwrap();
            assert!((p.pi_pair - 0.5).abs() < 1e-15);
            assert_eq!(p.crossings.len(), 5);
            assert_eq!(p.mode_count, 3);
        }
        let g = linkage_graph(&m, None).unwrap();
        assert!(g.edges.is_empty());
        assert_eq!(g.supercomponents, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn identical_components_fully_linked() {
        let m = Mixture::from_parts(
            vec![DVector::from_vec(vec![1.0]); 3],
            vec![DMatrix::from_element(1, 1, 0.5); 3],
            vec![0.2, 0.3, 0.5],
        )
        .unwrap();
        let g = linkage_graph(&m, None).unwrap();
        assert_eq!(g.edges.len(), 3);
        assert_eq!(g.supercomponents, vec![vec![0, 1, 2]]);
        assert_eq!(
            g.to_dot(),
            "graph linkage {\n  1;\n  2;\n  3;\n  1 -- 2;\n  1 -- 3;\n  2 -- 3;\n}\n"
        );
    }

    #[test]
    fn two_far_pairs_of_near_duplicates() {
        let pts = [0.0, 0.5, 20.0, 20.5];
        let m = Mixture::from_parts(
            pts.iter().map(|&p| DVector::from_vec(vec![p, 0.0])).collect(),
            vec![DMatrix::identity(2, 2); 4],
            vec![0.25; 4],
        )
        .unwrap();
        assert_eq!(supercomponents(&m).unwrap(), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn high_pass_links_shallow_valleys() {
        let m = Mixture::from_parts(
            vec![DVector::from_vec(vec![0.0]), DVector::from_vec(vec![2.2])],
            vec![DMatrix::from_element(1, 1, 1.0); 2],
            vec![0.5, 0.5],
        )
        .unwrap();
        let plain = linkage_graph(&m, None).unwrap();
        assert!(plain.edges.is_empty());
        let ratio = plain.pairs[0].saddle_ratio.unwrap();
        assert!(ratio > 0.9 && ratio < 1.0);
        let g = linkage_graph(&m, Some(0.9)).unwrap();
        assert_eq!(g.edges[0].reason, LinkReason::HighPass);
        assert_eq!(g.supercomponents, vec![vec![0, 1]]);
        assert!(linkage_graph(&m, Some(1.5)).is_err());
    }
}
