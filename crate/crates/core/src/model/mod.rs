//! Gaussian mixture data types and their density, derivative and posterior
//! evaluations. All likelihood arithmetic is carried in the log domain.

mod file;
mod simplex;

pub use file::{load_model, validate_mixture, ComponentRecord, ModelFile};
pub use simplex::SimplexPoint;

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, softmax_in_place};

/// Tolerance on `|Σπ - 1|` inside which weights are silently renormalized.
pub const WEIGHT_RENORMALIZE_TOL: f64 = 1e-9;
/// Relative asymmetry allowed in an input covariance before it is rejected.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// One Gaussian component with its factorizations cached.
#[derive(Debug, Clone)]
pub struct Component {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    precision: DMatrix<f64>,
    log_det: f64,
}

impl Component {
    /// Validates and factors a component. `index` is only used in error messages.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>, index: usize) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::InvalidArgument("component mean is empty".into()));
        }
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: if cov.nrows() != d { cov.nrows() } else { cov.ncols() },
                context: "covariance size vs mean length",
            });
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "component {index} has non-finite entries"
            )));
        }
        let scale = cov.amax();
        for r in 0..d {
            for c in (r + 1)..d {
                if (cov[(r, c)] - cov[(c, r)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::NotSymmetric { component: index });
                }
            }
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        let chol = Cholesky::new(cov.clone()).ok_or(Error::NotPositiveDefinite { component: index })?;
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        if !log_det.is_finite() {
            return Err(Error::NotPositiveDefinite { component: index });
        }
        let precision = chol.inverse();
        let precision = (&precision + precision.transpose()) * 0.5;
        Ok(Self {
            mean,
            cov,
            chol,
            precision,
            log_det,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Σ⁻¹, computed once from the Cholesky factor.
    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub fn cholesky(&self) -> &Cholesky<f64, Dyn> {
        &self.chol
    }

    /// `(x-μ)'Σ⁻¹(x-μ)` through a triangular solve.
    pub fn mahalanobis2(&self, x: &DVector<f64>) -> f64 {
        let r = x - &self.mean;
        let z = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&r)
            .expect("cholesky factor has a positive diagonal");
        z.norm_squared()
    }

    /// `log φ(x; μ, Σ)`.
    pub fn log_pdf(&self, x: &DVector<f64>) -> f64 {
        let d = self.dim() as f64;
        -0.5 * (d * (2.0 * PI).ln() + self.log_det + self.mahalanobis2(x))
    }

    /// `Σ⁻¹(x - μ)`; the score of the component is its negative.
    pub fn whitened_residual(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.precision * (x - &self.mean)
    }
}

/// A validated K-component mixture `g(x) = Σ π_j φ(x; μ_j, Σ_j)`.
#[derive(Debug, Clone)]
pub struct Mixture {
    components: Vec<Component>,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
}

impl Mixture {
    pub fn new(components: Vec<Component>, weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("mixture needs at least one component".into()));
        }
        if weights.len() != components.len() {
            return Err(Error::DimensionMismatch {
                expected: components.len(),
                found: weights.len(),
                context: "number of weights vs number of components",
            });
        }
        let d = components[0].dim();
        if let Some(c) = components.iter().find(|c| c.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: c.dim(),
                context: "component dimension",
            });
        }
        let weights = normalize_weights(weights)?;
        let log_weights = weights.iter().map(|w| w.ln()).collect();
        Ok(Self {
            components,
            weights,
            log_weights,
        })
    }

    /// Builds a mixture from raw means, covariances and weights.
    pub fn from_parts(means: Vec<DVector<f64>>, covs: Vec<DMatrix<f64>>, weights: Vec<f64>) -> Result<Self> {
        if means.len() != covs.len() {
            return Err(Error::DimensionMismatch {
                expected: means.len(),
                found: covs.len(),
                context: "number of covariances vs number of means",
            });
        }
        let components = means
            .into_iter()
            .zip(covs)
            .enumerate()
            .map(|(i, (m, c))| Component::new(m, c, i))
            .collect::<Result<Vec<_>>>()?;
        Self::new(components, weights)
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &Component {
        &self.components[j]
    }

    /// Same components, new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.components.clone(), weights)
    }

    /// Two-component submixture of `i` and `j` (in that order) with the given
    /// relative weight on `j`.
    pub fn pair(&self, i: usize, j: usize, weight_j: f64) -> Result<Self> {
        self.check_pair(i, j)?;
        Self::new(
            vec![self.components[i].clone(), self.components[j].clone()],
            vec![1.0 - weight_j, weight_j],
        )
    }

    pub(crate) fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        if i == j || i >= self.k() || j >= self.k() {
            return Err(Error::BadPair { i, j, k: self.k() });
        }
        Ok(())
    }

    fn check_point(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
                context: "evaluation point",
            });
        }
        Ok(())
    }

    /// `log φ_j(x)` for every component.
    pub fn component_log_pdfs(&self, x: &DVector<f64>) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(self.components.iter().map(|c| c.log_pdf(x)).collect())
    }

    /// `log π_j + log φ_j(x)` for every component.
    fn joint_logs(&self, x: &DVector<f64>) -> Result<Vec<f64>> {
        let mut logs = self.component_log_pdfs(x)?;
        for (l, lw) in logs.iter_mut().zip(&self.log_weights) {
            *l += lw;
        }
        Ok(logs)
    }

    pub fn log_density(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(log_sum_exp(&self.joint_logs(x)?))
    }

    pub fn density(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.log_density(x)?.exp())
    }

    /// Posterior component responsibilities `π_iφ_i(x) / Σ π_jφ_j(x)`.
    pub fn posterior(&self, x: &DVector<f64>) -> Result<SimplexPoint> {
        let mut logs = self.joint_logs(x)?;
        softmax_in_place(&mut logs);
        Ok(SimplexPoint::from_normalized(logs))
    }

    /// `∇ log g(x) = -Σ_j α_j(x) Σ_j⁻¹(x - μ_j)` with `α(x)` the posterior.
    pub fn grad_log_density(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let post = self.posterior(x)?;
        let mut grad = DVector::zeros(self.dim());
        for (c, a) in self.components.iter().zip(post.coords()) {
            if *a > 0.0 {
                grad.axpy(-a, &c.whitened_residual(x), 1.0);
            }
        }
        Ok(grad)
    }

    /// `∇g(x) = -Σ_j π_j φ_j(x) Σ_j⁻¹(x - μ_j)`.
    pub fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let g = self.density(x)?;
        Ok(self.grad_log_density(x)? * g)
    }

    /// `∇²g(x) / g(x) = Σ_j α_j(x) [v_j v_j' - Σ_j⁻¹]`, `v_j = Σ_j⁻¹(x-μ_j)`.
    /// Same inertia as the Hessian of `g` but immune to underflow of `g`.
    pub fn normalized_hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let post = self.posterior(x)?;
        let d = self.dim();
        let mut h = DMatrix::zeros(d, d);
        for (c, a) in self.components.iter().zip(post.coords()) {
            if *a > 0.0 {
                let v = c.whitened_residual(x);
                h.ger(*a, &v, &v, 1.0);
                h -= c.precision() * *a;
            }
        }
        Ok((&h + h.transpose()) * 0.5)
    }

    /// `∇²g(x) = Σ_j π_j φ_j(x) [Σ_j⁻¹(x-μ_j)(x-μ_j)'Σ_j⁻¹ - Σ_j⁻¹]`.
    pub fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let g = self.density(x)?;
        Ok(self.normalized_hessian(x)? * g)
    }

    /// `∇² log g(x) = ∇²g/g - ∇log g ∇log g'`.
    pub fn log_density_hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let grad = self.grad_log_density(x)?;
        let mut h = self.normalized_hessian(x)?;
        h.ger(-1.0, &grad, &grad, 1.0);
        Ok(h)
    }

    /// Largest marginal standard deviation over all components; the length
    /// scale used to make gradient tolerances dimensionless.
    pub fn length_scale(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.cov().diagonal().iter().copied().collect::<Vec<_>>())
            .fold(0.0, f64::max)
            .sqrt()
    }
}

fn normalize_weights(weights: Vec<f64>) -> Result<Vec<f64>> {
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::BadWeights(format!("weight {w} is negative or not finite")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_RENORMALIZE_TOL {
        return Err(Error::BadWeights(format!("weights sum to {total}, not 1")));
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}
