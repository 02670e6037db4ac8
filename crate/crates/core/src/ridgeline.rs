//! The ridgeline map `x*(α) = S_α⁻¹ Σ_j α_j Σ_j⁻¹ μ_j`, `S_α = Σ_j α_j Σ_j⁻¹`,
//! the elevation `h(α) = g(x*(α))` along it, and the classification of the
//! critical points it carries.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{Mixture, SimplexPoint};
use crate::numeric::{adaptive_simpson, composite_grid};
use crate::pair::PairLine;

/// Largest scaled gradient `‖∇log g‖·σ_max` accepted as a critical point.
pub const CRITICAL_TOL: f64 = 1e-6;
/// Hessian eigenvalues within this fraction of the spectral radius count as zero.
pub const DEGENERATE_EIG_TOL: f64 = 1e-9;
/// Absolute tolerance on `log h` inside which neighboring grid nodes tie.
pub const PLATEAU_TOL: f64 = 1e-12;
/// Absolute quadrature tolerance for arclength.
pub const ARCLENGTH_TOL: f64 = 1e-8;

pub(crate) fn ser_dvec<S: Serializer>(v: &DVector<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter())
}

#[derive(Debug, Clone, Serialize)]
pub struct RidgelineEval {
    pub alpha: SimplexPoint,
    #[serde(serialize_with = "ser_dvec")]
    pub x: DVector<f64>,
    pub elevation: f64,
    pub log_elevation: f64,
}

#[derive(Debug, Clone)]
pub struct TangentFrame {
    pub s_alpha: DMatrix<f64>,
    /// `v_j = Σ_j⁻¹(x*(α) - μ_j)`.
    pub v: Vec<DVector<f64>>,
    /// `d_j = S_α⁻¹(v_j - v_K)`, `j < K`.
    pub d: Vec<DVector<f64>>,
    /// Basis of `{w : w'S_α d_j = 0 ∀j}`; empty on the simplex boundary.
    pub w_basis: Vec<DVector<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CriticalKind {
    Mode,
    Saddle,
    LocalMin,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    pub alpha: SimplexPoint,
    #[serde(serialize_with = "ser_dvec")]
    pub x: DVector<f64>,
    pub elevation: f64,
    pub log_elevation: f64,
    pub neg_eigs: usize,
    pub kind: CriticalKind,
    /// Some Hessian eigenvalue is numerically zero; `kind` is then unreliable.
    pub degenerate: bool,
    /// `‖∇log g(x)‖·σ_max`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProfileAxis {
    #[default]
    Alpha,
    Arclength,
}

#[derive(Debug, Clone)]
pub struct ProfileSample {
    /// `alpha` or `arclength`, depending on the requested axis.
    pub position: f64,
    pub alpha: f64,
    pub arclength: f64,
    pub x: DVector<f64>,
    pub h: f64,
    pub log_h: f64,
}

#[derive(Debug, Clone)]
pub struct GridNode {
    pub i: usize,
    pub j: usize,
    pub alpha: [f64; 3],
    pub tx: f64,
    pub ty: f64,
    pub x: DVector<f64>,
    pub h: f64,
    pub log_h: f64,
    pub is_local_max: bool,
}

/// Barycentric grid `α = (i, j, r-i-j)/r` over the 3-simplex.
#[derive(Debug, Clone)]
pub struct SimplexGrid {
    pub resolution: usize,
    pub nodes: Vec<GridNode>,
}

/// Lattice offsets of the six neighbors, in angular order.
pub const RING: [(isize, isize); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

impl SimplexGrid {
    fn row_offset(r: usize, i: usize) -> usize {
        // rows i' < i hold r - i' + 1 nodes each
        i * (r + 1) - i * i.saturating_sub(1) / 2
    }

    pub fn index(&self, i: isize, j: isize) -> Option<usize> {
        let r = self.resolution as isize;
        if i < 0 || j < 0 || i + j > r {
            return None;
        }
        Some(Self::row_offset(self.resolution, i as usize) + j as usize)
    }

    /// Neighbor indices in [`RING`] order; `None` outside the simplex.
    pub fn ring(&self, node: usize) -> [Option<usize>; 6] {
        let n = &self.nodes[node];
        RING.map(|(di, dj)| self.index(n.i as isize + di, n.j as isize + dj))
    }

    pub fn local_maxima(&self) -> impl Iterator<Item = &GridNode> {
        self.nodes.iter().filter(|n| n.is_local_max)
    }
}

fn check_alpha(m: &Mixture, alpha: &SimplexPoint) -> Result<()> {
    if alpha.len() != m.k() {
        return Err(Error::DimensionMismatch {
            expected: m.k(),
            found: alpha.len(),
            context: "simplex point vs number of components",
        });
    }
    Ok(())
}

fn s_and_rhs(m: &Mixture, alpha: &SimplexPoint) -> (DMatrix<f64>, DVector<f64>) {
    let d = m.dim();
    let mut s = DMatrix::zeros(d, d);
    let mut rhs = DVector::zeros(d);
    for (c, &a) in m.components().iter().zip(alpha.coords()) {
        if a > 0.0 {
            s += c.precision() * a;
            rhs.gemv(a, c.precision(), c.mean(), 1.0);
        }
    }
    (s, rhs)
}

/// `x*(α)`, by a Cholesky solve of `S_α x = Σ α_j Σ_j⁻¹ μ_j`.
pub fn ridgeline_point(m: &Mixture, alpha: &SimplexPoint) -> Result<DVector<f64>> {
    check_alpha(m, alpha)?;
    let (s, rhs) = s_and_rhs(m, alpha);
    let chol =
        Cholesky::new(s).ok_or_else(|| Error::InternalInconsistency("S_alpha lost positive definiteness".into()))?;
    Ok(chol.solve(&rhs))
}

pub fn tangent_frame(m: &Mixture, alpha: &SimplexPoint) -> Result<TangentFrame> {
    check_alpha(m, alpha)?;
    let k = m.k();
    if k < 2 {
        return Err(Error::DegenerateFrame);
    }
    let (s, rhs) = s_and_rhs(m, alpha);
    let chol = Cholesky::new(s.clone())
        .ok_or_else(|| Error::InternalInconsistency("S_alpha lost positive definiteness".into()))?;
    let x = chol.solve(&rhs);
    let v: Vec<DVector<f64>> = m.components().iter().map(|c| c.whitened_residual(&x)).collect();
    let d: Vec<DVector<f64>> = (0..k - 1).map(|j| chol.solve(&(&v[j] - &v[k - 1]))).collect();
    let scale = m.length_scale().max(f64::MIN_POSITIVE);
    let spread = m
        .components()
        .iter()
        .map(|c| (c.mean() - m.component(0).mean()).norm())
        .fold(0.0, f64::max);
    if spread <= 1e-14 * scale.max(m.component(0).mean().amax()) {
        return Err(Error::DegenerateFrame);
    }
    let w_basis = if alpha.is_interior() {
        // null space of the (K-1) x D matrix with rows (S d_j)' = (v_j - v_K)'
        let dim = m.dim();
        let mut ata = DMatrix::zeros(dim, dim);
        for j in 0..k - 1 {
            let row = &v[j] - &v[k - 1];
            ata.ger(1.0, &row, &row, 1.0);
        }
        let eig = SymmetricEigen::new(ata);
        let top = eig.eigenvalues.amax();
        let rank = eig.eigenvalues.iter().filter(|&&l| l > 1e-12 * top).count();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        order
            .into_iter()
            .take(dim - rank)
            .map(|c| eig.eigenvectors.column(c).into_owned())
            .collect()
    } else {
        Vec::new()
    };
    Ok(TangentFrame {
        s_alpha: s,
        v,
        d,
        w_basis,
    })
}

pub fn elevation(m: &Mixture, alpha: &SimplexPoint) -> Result<RidgelineEval> {
    let x = ridgeline_point(m, alpha)?;
    let log_elevation = m.log_density(&x)?;
    Ok(RidgelineEval {
        alpha: alpha.clone(),
        x,
        elevation: log_elevation.exp(),
        log_elevation,
    })
}

/// `L(α_end) = ∫₀^α_end ‖ẋ*(t)‖ dt` for a two-component mixture.
pub fn arclength(m: &Mixture, alpha_end: f64) -> Result<f64> {
    if m.k() != 2 {
        return Err(Error::NotTwoComponents(m.k()));
    }
    if !(0.0..=1.0).contains(&alpha_end) {
        return Err(Error::BadSimplexPoint(format!("{alpha_end} outside [0, 1]")));
    }
    let line = PairLine::new(m, 0, 1)?;
    Ok(adaptive_simpson(|t| line.speed(t), 0.0, alpha_end, ARCLENGTH_TOL))
}

/// Elevation along the two-component ridgeline on the composite α-grid
/// (`n_samples` uniform points plus geometric ladders toward both ends).
pub fn elevation_profile(m: &Mixture, n_samples: usize, axis: ProfileAxis) -> Result<Vec<ProfileSample>> {
    if m.k() != 2 {
        return Err(Error::NotTwoComponents(m.k()));
    }
    if n_samples < 2 {
        return Err(Error::InvalidArgument("profile needs at least 2 samples".into()));
    }
    let line = PairLine::new(m, 0, 1)?;
    let grid = composite_grid(n_samples, None);
    let seg_tol = ARCLENGTH_TOL / grid.len() as f64;
    let segments: Vec<f64> = grid
        .par_windows(2)
        .map(|w| adaptive_simpson(|t| line.speed(t), w[0], w[1], seg_tol))
        .collect();
    let points: Vec<(DVector<f64>, f64)> = grid
        .par_iter()
        .map(|&a| {
            let x = line.x(a);
            let lh = m.log_density(&x).expect("dimension checked");
            (x, lh)
        })
        .collect();
    let mut length = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    for (k, ((x, log_h), &alpha)) in points.into_iter().zip(&grid).enumerate() {
        if k > 0 {
            length += segments[k - 1];
        }
        out.push(ProfileSample {
            position: match axis {
                ProfileAxis::Alpha => alpha,
                ProfileAxis::Arclength => length,
            },
            alpha,
            arclength: length,
            x,
            h: log_h.exp(),
            log_h,
        });
    }
    Ok(out)
}

/// Elevation on the barycentric grid of resolution `r`, with local maxima of
/// `h` flagged against the six lattice neighbors. Runs of tied nodes, and tied
/// nodes with the same image `x*(α)`, are treated as one plateau; a plateau strictly higher than all its
/// neighbors is flagged once, at its most central node.
pub fn simplex_grid_elevation(m: &Mixture, resolution: usize) -> Result<SimplexGrid> {
    if m.k() != 3 {
        return Err(Error::NotThreeComponents(m.k()));
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument("grid resolution must be at least 2".into()));
    }
    let r = resolution;
    let rf = r as f64;
    let coords: Vec<(usize, usize)> = (0..=r).flat_map(|i| (0..=r - i).map(move |j| (i, j))).collect();
    let nodes: Vec<GridNode> = coords
        .par_iter()
        .map(|&(i, j)| {
            let alpha = [i as f64 / rf, j as f64 / rf, (r - i - j) as f64 / rf];
            let point = SimplexPoint::from_normalized(alpha.to_vec());
            let x = ridgeline_point(m, &point).expect("K checked");
            let log_h = m.log_density(&x).expect("dimension checked");
            GridNode {
                i,
                j,
                alpha,
                tx: alpha[1] + alpha[2] / 2.0,
                ty: alpha[2] * 3f64.sqrt() / 2.0,
                x,
                h: log_h.exp(),
                log_h,
                is_local_max: false,
            }
        })
        .collect();
    let mut grid = SimplexGrid { resolution: r, nodes };
    flag_maxima(&mut grid);
    Ok(grid)
}

/// How far along the elevation order to look for nodes sharing an image.
const SAME_POINT_WINDOW: usize = 64;

fn flag_maxima(grid: &mut SimplexGrid) {
    let n = grid.nodes.len();
    let rings: Vec<[Option<usize>; 6]> = (0..n).map(|k| grid.ring(k)).collect();
    let lh: Vec<f64> = grid.nodes.iter().map(|g| g.log_h).collect();
    let mut plateaus = UnionFind::<usize>::new(n);
    for (k, ring) in rings.iter().enumerate() {
        for &nb in ring.iter().flatten() {
            if (lh[k] - lh[nb]).abs() <= PLATEAU_TOL {
                plateaus.union(k, nb);
            }
        }
    }
    // distinct α with one image x*(α) are one point of the density surface
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lh[a].total_cmp(&lh[b]));
    let reach = grid.nodes.iter().map(|g| g.x.amax()).fold(1.0, f64::max);
    for (pos, &a) in order.iter().enumerate() {
        for &b in order[pos + 1..].iter().take(SAME_POINT_WINDOW) {
            if lh[b] - lh[a] > PLATEAU_TOL {
                break;
            }
            if (&grid.nodes[a].x - &grid.nodes[b].x).amax() <= 1e-12 * reach {
                plateaus.union(a, b);
            }
        }
    }
    let labels = plateaus.into_labeling();
    let mut members: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (k, &l) in labels.iter().enumerate() {
        members.entry(l).or_default().push(k);
    }
    for group in members.values() {
        if group.len() == n {
            continue;
        }
        let dominant = group.iter().all(|&k| {
            rings[k]
                .iter()
                .flatten()
                .all(|&nb| labels[nb] == labels[k] || lh[nb] < lh[k])
        });
        if !dominant {
            continue;
        }
        let centroid = group.iter().fold([0.0; 3], |acc, &k| {
            let a = grid.nodes[k].alpha;
            [acc[0] + a[0], acc[1] + a[1], acc[2] + a[2]]
        });
        let c = centroid.map(|v| v / group.len() as f64);
        let rep = group
            .iter()
            .copied()
            .min_by(|&a, &b| {
                let da = dist3(&grid.nodes[a].alpha, &c);
                let db = dist3(&grid.nodes[b].alpha, &c);
                da.total_cmp(&db).then(a.cmp(&b))
            })
            .expect("non-empty plateau");
        grid.nodes[rep].is_local_max = true;
    }
}

fn dist3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>()
}

/// Classifies the critical point `x*(α)` by the inertia of the Hessian of `g`.
pub fn classify_critical(m: &Mixture, alpha: &SimplexPoint) -> Result<CriticalPoint> {
    let x = ridgeline_point(m, alpha)?;
    classify_at(m, alpha.clone(), x)
}

/// Classification at a data-space point already known to be critical.
pub(crate) fn classify_at(m: &Mixture, alpha: SimplexPoint, x: DVector<f64>) -> Result<CriticalPoint> {
    let residual = m.grad_log_density(&x)?.norm() * m.length_scale();
    if residual.is_nan() || residual > CRITICAL_TOL {
        return Err(Error::NotCritical {
            residual,
            tolerance: CRITICAL_TOL,
        });
    }
    let h = m.normalized_hessian(&x)?;
    let eig = SymmetricEigen::new(h).eigenvalues;
    let radius = eig.amax();
    let degenerate = eig.iter().any(|l| l.abs() <= DEGENERATE_EIG_TOL * radius);
    let neg_eigs = eig.iter().filter(|&&l| l < 0.0).count();
    let d = m.dim();
    let kind = if neg_eigs == d {
        CriticalKind::Mode
    } else if neg_eigs == 0 {
        CriticalKind::LocalMin
    } else {
        CriticalKind::Saddle
    };
    if kind == CriticalKind::LocalMin && d + 1 > m.k() && !degenerate {
        return Err(Error::InternalInconsistency(format!(
            "local minimum found with D = {d} > K - 1 = {}",
            m.k() - 1
        )));
    }
    let log_elevation = m.log_density(&x)?;
    Ok(CriticalPoint {
        alpha,
        x,
        elevation: log_elevation.exp(),
        log_elevation,
        neg_eigs,
        kind,
        degenerate,
        residual,
    })
}
