//! The two-component ridgeline `x*(α)` for a pair `(i, j)`, with `α` the
//! coordinate of component `j`, so `x*(0) = μ_i` and `x*(1) = μ_j`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::model::{Component, Mixture};

pub(crate) struct PairLine<'a> {
    pub ci: &'a Component,
    pub cj: &'a Component,
    bi: DVector<f64>,
    bj: DVector<f64>,
    delta: DVector<f64>,
}

/// Everything needed at one α.
pub(crate) struct PairPoint {
    pub x: DVector<f64>,
    pub s: Cholesky<f64, Dyn>,
}

impl<'a> PairLine<'a> {
    pub fn new(m: &'a Mixture, i: usize, j: usize) -> Result<Self> {
        m.check_pair(i, j)?;
        Ok(Self::from_components(m.component(i), m.component(j)))
    }

    /// Like [`PairLine::new`] but rejects coincident means.
    pub fn distinct(m: &'a Mixture, i: usize, j: usize) -> Result<Self> {
        let line = Self::new(m, i, j)?;
        if line.coincident() {
            return Err(Error::CoincidentMeans { i, j });
        }
        Ok(line)
    }

    pub fn from_components(ci: &'a Component, cj: &'a Component) -> Self {
        Self {
            bi: ci.precision() * ci.mean(),
            bj: cj.precision() * cj.mean(),
            delta: cj.mean() - ci.mean(),
            ci,
            cj,
        }
    }

    pub fn coincident(&self) -> bool {
        let scale = self.ci.mean().amax().max(self.cj.mean().amax()).max(1.0);
        self.delta.amax() <= 1e-14 * scale
    }

    fn s_matrix(&self, alpha: f64) -> DMatrix<f64> {
        self.ci.precision() * (1.0 - alpha) + self.cj.precision() * alpha
    }

    pub fn point(&self, alpha: f64) -> PairPoint {
        let s = Cholesky::new(self.s_matrix(alpha)).expect("convex combination of SPD matrices");
        let rhs = &self.bi * (1.0 - alpha) + &self.bj * alpha;
        PairPoint { x: s.solve(&rhs), s }
    }

    pub fn x(&self, alpha: f64) -> DVector<f64> {
        self.point(alpha).x
    }

    /// `log φ_j(x*) - log φ_i(x*)`.
    pub fn log_ratio(&self, x: &DVector<f64>) -> f64 {
        self.cj.log_pdf(x) - self.ci.log_pdf(x)
    }

    /// The weight on `j` that makes `x*(α)` a critical point of the pair mixture.
    pub fn pi(&self, alpha: f64) -> f64 {
        if alpha <= 0.0 {
            return 0.0;
        }
        if alpha >= 1.0 {
            return 1.0;
        }
        let x = self.x(alpha);
        let z = (1.0 - alpha).ln() - alpha.ln() + self.log_ratio(&x);
        1.0 / (1.0 + z.exp())
    }

    /// `‖dx*/dα‖`, from `S_α ẋ = Σ_i⁻¹(x-μ_i) - Σ_j⁻¹(x-μ_j)`.
    pub fn speed(&self, alpha: f64) -> f64 {
        let PairPoint { x, s } = self.point(alpha);
        let rhs = self.ci.whitened_residual(&x) - self.cj.whitened_residual(&x);
        s.solve(&rhs).norm()
    }

    /// `p(α) = u'S_α⁻¹u` with `u = Σ_i⁻¹ S_α⁻¹ Σ_j⁻¹ (μ_j - μ_i)`.
    pub fn p(&self, alpha: f64) -> f64 {
        let s = Cholesky::new(self.s_matrix(alpha)).expect("convex combination of SPD matrices");
        let u = self.ci.precision() * s.solve(&(self.cj.precision() * &self.delta));
        u.dot(&s.solve(&u)).max(0.0)
    }

    pub fn q(&self, alpha: f64) -> f64 {
        1.0 - alpha * (1.0 - alpha) * self.p(alpha)
    }
}
