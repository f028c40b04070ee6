//! Forward problem: potential → eigenvalues, Weyl matrix and weight matrices.

mod integrate;
mod roots;
mod weyl;

pub use integrate::{integrate, sine_trace, ConstantBlocks, ConstantPotential, Fundamental, Rk4, SolutionTrace};
pub use roots::EigenRecord;
pub use weyl::WeylSample;

use crate::error::Result;
use crate::linalg::{self, CMat, C64};
use crate::problem::{BoundaryCoefficient, Problem, Projector, SpectralData, ToleranceConfig};

/// A boundary value problem ready for spectral computations: a fundamental
/// system together with the boundary form `V`.
pub struct Operator<'a> {
    fundamental: Box<dyn Fundamental + 'a>,
    t: CMat,
    tperp: CMat,
    h: CMat,
    h_norm: f64,
    lower: f64,
    tol: ToleranceConfig,
}

impl<'a> Operator<'a> {
    pub fn with_fundamental(
        fundamental: Box<dyn Fundamental + 'a>,
        projector: &Projector,
        boundary: &BoundaryCoefficient,
        potential_min: f64,
        tol: &ToleranceConfig,
    ) -> Self {
        let h = boundary.matrix().clone();
        let hn = linalg::spectral_norm(&h);
        Self {
            fundamental,
            t: projector.matrix().clone(),
            tperp: projector.complement(),
            h,
            h_norm: hn,
            lower: potential_min - hn * hn - 1.0,
            tol: tol.clone(),
        }
    }

    /// RK4 shooting on the grid of `problem`.
    pub fn new(problem: &Problem, tol: &ToleranceConfig) -> Operator<'static> {
        Operator::with_fundamental(
            Box::new(Rk4::new(&problem.potential)),
            &problem.projector,
            &problem.boundary,
            problem.potential.min_eigenvalue(),
            tol,
        )
    }

    /// Closed-form solutions for the constant potential `q`.
    pub fn constant(
        q: &CMat,
        projector: &Projector,
        boundary: &BoundaryCoefficient,
        n_grid: usize,
        tol: &ToleranceConfig,
    ) -> Operator<'static> {
        Operator::with_fundamental(
            Box::new(ConstantPotential::new(q, n_grid)),
            projector,
            boundary,
            linalg::min_eigenvalue(q),
            tol,
        )
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn fundamental(&self) -> &dyn Fundamental {
        self.fundamental.as_ref()
    }

    pub fn tolerances(&self) -> &ToleranceConfig {
        &self.tol
    }

    /// `V(Y) = T(Y'(π) − H Y(π)) − T⊥ Y(π)`.
    pub fn boundary_form(&self, y: &CMat, dy: &CMat) -> CMat {
        &self.t * (dy - &self.h * y) - &self.tperp * y
    }

    /// `V(S(·, λ))`.
    pub fn vs(&self, lambda: C64) -> Result<CMat> {
        Ok(self.vs_scaled(lambda)?.0)
    }

    /// `V(S(·, λ))` with a scale for its singular values: the largest singular
    /// value of `[S(π); S'(π)]` times `1 + ‖H‖`, which never vanishes.
    pub(crate) fn vs_scaled(&self, lambda: C64) -> Result<(CMat, f64)> {
        let m = self.dim();
        let (s, ds) = self
            .fundamental
            .terminal(lambda, &CMat::zeros(m, m), &linalg::identity(m))?;
        let mut stacked = CMat::zeros(2 * m, m);
        stacked.rows_mut(0, m).copy_from(&s);
        stacked.rows_mut(m, m).copy_from(&ds);
        let scale = linalg::spectral_norm(&stacked) * (1.0 + self.h_norm);
        Ok((self.boundary_form(&s, &ds), scale))
    }

    /// `det V(S(·, λ))`; its zeros are the eigenvalues.
    pub fn characteristic(&self, lambda: C64) -> Result<C64> {
        Ok(self.vs(lambda)?.determinant())
    }

    /// Eigenvalues of bands `1..=n_max` and their weight matrices.
    pub fn spectral_data(&self, n_max: usize) -> Result<SpectralData> {
        use rayon::prelude::*;
        let records = self.eigenvalues(n_max)?;
        let alphas = records
            .par_iter()
            .map(|r| self.weight(r))
            .collect::<Result<Vec<_>>>()?;
        let mut data = Vec::with_capacity(n_max * self.dim());
        for (r, a) in records.iter().zip(alphas) {
            for &(n, k) in &r.slots {
                data.push(crate::problem::SpectralDatum {
                    n,
                    k,
                    lambda: r.lambda,
                    alpha: a.clone(),
                });
            }
        }
        SpectralData::new(self.dim(), data)
    }
}

/// `V(Y)` for the terminal values of `trace`.
pub fn boundary_form(problem: &Problem, trace: &SolutionTrace) -> CMat {
    let (y, dy) = trace.terminal();
    let t = problem.projector.matrix();
    t * (dy - problem.boundary.matrix() * y) - problem.projector.complement() * y
}

pub fn characteristic(problem: &Problem, lambda: C64) -> Result<C64> {
    Operator::new(problem, &ToleranceConfig::default()).characteristic(lambda)
}

pub fn find_eigenvalues(problem: &Problem, n_max: usize) -> Result<Vec<EigenRecord>> {
    Operator::new(problem, &ToleranceConfig::default()).eigenvalues(n_max)
}

pub fn weyl_matrix(problem: &Problem, lambda: C64) -> Result<WeylSample> {
    Operator::new(problem, &ToleranceConfig::default()).weyl(lambda)
}

pub fn weight_matrix(problem: &Problem, eigen: &EigenRecord) -> Result<CMat> {
    Operator::new(problem, &ToleranceConfig::default()).weight(eigen)
}

pub fn spectral_data(problem: &Problem, n_max: usize) -> Result<SpectralData> {
    Operator::new(problem, &ToleranceConfig::default()).spectral_data(n_max)
}
