//! Star-shaped graphs: `m` edges `[0, π]` with Dirichlet ends at `x = 0`,
//! joined at `x = π` by continuity and Kirchhoff conditions.
//!
//! Such a graph is the matrix problem with `Q = diag(q_j)`, `H = 0` and the
//! averaging projector `T_jk = 1/m`. A diagonal model keeps `S̃` and `D̃`
//! diagonal, so the main equation splits into scalar equations, one per
//! edge, which need only the diagonal weight entries `α^(ii)`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result, StageExt};
use crate::linalg::{self, CMat};
use crate::model::{self, AsymptoticSummary};
use crate::problem::{
    shift_spectrum, BoundaryCoefficient, PotentialGrid, Problem, Projector, SpectralData,
    SpectralDatum, ToleranceConfig,
};
use crate::reconstruct::{self, EpsilonTrace, InverseConfig};

/// Real edge potentials sampled on a common uniform grid of `[0, π]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StarGraphProblem {
    edges: Vec<Vec<f64>>,
}

impl StarGraphProblem {
    pub fn new(edges: Vec<Vec<f64>>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidInput("a star needs at least two edges".into()));
        }
        let len = edges[0].len();
        if len < 2 {
            return Err(Error::InvalidInput("edge grids need at least two nodes".into()));
        }
        for (j, e) in edges.iter().enumerate() {
            if e.len() != len {
                return Err(Error::DimensionMismatch(format!(
                    "edge {} has {} samples, edge 1 has {len}",
                    j + 1,
                    e.len()
                )));
            }
            if e.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("edge {} has non-finite samples", j + 1)));
            }
        }
        Ok(Self { edges })
    }

    pub fn from_fns(n_grid: usize, fs: &[&dyn Fn(f64) -> f64]) -> Result<Self> {
        let h = PI / n_grid as f64;
        Self::new(
            fs.iter()
                .map(|f| (0..=n_grid).map(|i| f(i as f64 * h)).collect())
                .collect(),
        )
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn n_grid(&self) -> usize {
        self.edges[0].len() - 1
    }

    pub fn edge(&self, j: usize) -> &[f64] {
        &self.edges[j - 1]
    }
}

pub fn graph_to_matrix(g: &StarGraphProblem) -> Problem {
    let m = g.m();
    let samples = (0..=g.n_grid())
        .map(|i| linalg::diag_real(&g.edges.iter().map(|e| e[i]).collect::<Vec<_>>()))
        .collect();
    Problem::new(
        PotentialGrid::new(samples).expect("grid validated on construction"),
        Projector::star(m),
        BoundaryCoefficient::zero(m),
    )
}

/// Eigenvalues `λ_nk` of a star with `m` edges and the diagonal weight
/// entries `α_nk^(ii)` of edge `i`, in lexicographic `(n, k)` order.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarLocalData {
    pub i: usize,
    pub m: usize,
    pub lambdas: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl ScalarLocalData {
    pub fn new(i: usize, m: usize, lambdas: Vec<f64>, alpha: Vec<f64>) -> Result<Self> {
        if i == 0 || i > m {
            return Err(Error::InvalidInput(format!("edge {i} outside 1..={m}")));
        }
        if lambdas.len() != alpha.len() || lambdas.is_empty() || lambdas.len() % m != 0 {
            return Err(Error::InvalidInput(format!(
                "{} eigenvalues and {} weights do not fill whole bands of {m}",
                lambdas.len(),
                alpha.len()
            )));
        }
        if let Some(a) = alpha.iter().find(|a| !(**a >= -1e-10)) {
            return Err(Error::InvalidInput(format!("diagonal weight {a} is negative")));
        }
        Ok(Self { i, m, lambdas, alpha })
    }

    /// Extracts edge `i` from full matrix data; the entries must be real.
    pub fn from_spectral(data: &SpectralData, i: usize, tol: &ToleranceConfig) -> Result<Self> {
        let m = data.m();
        if i == 0 || i > m {
            return Err(Error::InvalidInput(format!("edge {i} outside 1..={m}")));
        }
        let mut lambdas = Vec::with_capacity(data.entries().len());
        let mut alpha = Vec::with_capacity(data.entries().len());
        for d in data.entries() {
            let a = d.alpha[(i - 1, i - 1)];
            if a.im.abs() > tol.matrix * (1.0 + a.re.abs()) {
                return Err(Error::InvalidInput(format!(
                    "α^({i}{i})_{},{} is not real",
                    d.n, d.k
                )));
            }
            lambdas.push(d.lambda);
            alpha.push(a.re);
        }
        Self::new(i, m, lambdas, alpha)
    }

    pub fn n_bands(&self) -> usize {
        self.lambdas.len() / self.m
    }

    /// Matrix data whose only nonzero weight entry is `(i, i)`.
    pub fn embedded(&self) -> SpectralData {
        let m = self.m;
        let d = self
            .lambdas
            .iter()
            .zip(&self.alpha)
            .enumerate()
            .map(|(j, (&lambda, &a))| {
                let mut alpha = CMat::zeros(m, m);
                alpha[(self.i - 1, self.i - 1)] = linalg::re(a);
                SpectralDatum {
                    n: j / m + 1,
                    k: j % m + 1,
                    lambda,
                    alpha,
                }
            })
            .collect();
        SpectralData::new(m, d).expect("shape checked on construction")
    }
}

/// Constant diagonal star model `diag(q̃_j)`, `H̃ = 0`, for the local problem
/// of edge `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarModel {
    pub i: usize,
    pub potentials: Vec<f64>,
    pub n_grid: usize,
}

impl ScalarModel {
    pub fn star_problem(&self) -> Problem {
        let m = self.potentials.len();
        Problem::new(
            PotentialGrid::constant(linalg::diag_real(&self.potentials), self.n_grid),
            Projector::star(m),
            BoundaryCoefficient::zero(m),
        )
    }

    /// The scalar problem of edge `i` alone.
    pub fn edge_problem(&self) -> Problem {
        Problem::new(
            PotentialGrid::constant(linalg::diag_real(&[self.potentials[self.i - 1]]), self.n_grid),
            Projector::new(linalg::identity(1)),
            BoundaryCoefficient::zero(1),
        )
    }
}

/// Asymptotics of (already non-negative) local data with the known star
/// projector, and the model they determine.
///
/// With `Ω = diag(ω_j)`, `Θ_ii = (1 − 2/m) ω_i + 2Σ/m²` and the half-integer
/// slot gives `z₁ = Σ/m`. The remaining `Σ − ω_i` is spread evenly over the
/// other edges. For `m = 2`, `Θ_ii` carries no information on `ω_i` and the
/// model is the average.
pub fn local_asymptotics(
    data: &ScalarLocalData,
    n_grid: usize,
    tol: &ToleranceConfig,
) -> Result<(AsymptoticSummary, ScalarModel)> {
    let m = data.m;
    let i = data.i;
    let embedded = data.embedded();
    let weights = model::collapse_weights(&embedded, 1, tol);
    let summary = model::estimate_z_a_theta(&embedded, &weights, &Projector::star(m), tol)?;
    let mf = m as f64;
    let total = mf * summary.z[0];
    let theta_ii = summary.theta[(i - 1, i - 1)].re;
    let omega_i = if m >= 3 {
        (theta_ii - 2.0 * total / (mf * mf)) / (1.0 - 2.0 / mf)
    } else {
        total / mf
    };
    let rest = (total - omega_i) / (mf - 1.0);
    let potentials = (1..=m)
        .map(|j| 2.0 / PI * if j == i { omega_i } else { rest })
        .collect();
    Ok((
        summary,
        ScalarModel {
            i,
            potentials,
            n_grid,
        },
    ))
}

#[derive(Clone, Debug)]
pub struct LocalReconstruction {
    pub i: usize,
    /// `q_i` at the grid nodes.
    pub q: Vec<f64>,
    /// `ε₀` of the scalar equation at the grid nodes.
    pub eps0: Vec<f64>,
    pub model: ScalarModel,
    pub shift: f64,
    pub max_residual: f64,
    pub condition: f64,
    /// Largest `|Im ε|` discarded.
    pub imag_defect: f64,
    pub tail_applied: bool,
}

impl LocalReconstruction {
    pub fn step(&self) -> f64 {
        PI / (self.q.len() - 1) as f64
    }
}

fn scalar_entry(epsilon: &EpsilonTrace, i: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let mut imag: f64 = 0.0;
    let eps = epsilon
        .eps
        .iter()
        .map(|e| {
            let v = e[(i, i)];
            imag = imag.max(v.im.abs());
            v.re
        })
        .collect();
    let eps0 = epsilon.eps0.iter().map(|e| e[(i, i)].re).collect();
    (eps, eps0, imag)
}

/// Local inverse problem of edge `i` against a given model; `data` must
/// already be non-negative, `shift` is removed from the result.
pub fn solve_local_with_model(
    data: &ScalarLocalData,
    summary: Option<&AsymptoticSummary>,
    model: &ScalarModel,
    shift: f64,
    config: &InverseConfig,
) -> Result<LocalReconstruction> {
    local_path(data, None, summary, model, shift, config)
}

fn local_path(
    data: &ScalarLocalData,
    full: Option<&SpectralData>,
    summary: Option<&AsymptoticSummary>,
    model: &ScalarModel,
    shift: f64,
    config: &InverseConfig,
) -> Result<LocalReconstruction> {
    let tol = &config.tol;
    let i = data.i;
    let star = model.star_problem();
    let model_data = reconstruct::model_spectral_data(&star, data.n_bands(), tol).stage("model spectrum")?;
    let model_weights = model::collapse_weights(&model_data, 1, tol);
    let (spectral, weights, model_weights, edge, entry) = match full {
        None => {
            let embedded = data.embedded();
            let w = model::collapse_weights(&embedded, 1, tol).diagonal_entry(i);
            (embedded, w, model_weights.diagonal_entry(i), model.edge_problem(), 0)
        }
        Some(full) => {
            let w = model::collapse_weights(full, 1, tol).diagonal_part();
            (full.clone(), w, model_weights.diagonal_part(), star, i - 1)
        }
    };
    let tail = match summary {
        Some(s) => reconstruct::tail_terms(s, &weights, &model_weights, config.tail_bands),
        None => Vec::new(),
    };
    let (_, _, solution, epsilon) = reconstruct::solve_against_model(
        &spectral,
        &weights,
        &edge,
        &model_data,
        &model_weights,
        1,
        &config.identity_nodes,
        &tail,
        tol,
    )?;
    let (eps, eps0, imag_defect) = scalar_entry(&epsilon, entry);
    let base = model.potentials[i - 1] - shift;
    Ok(LocalReconstruction {
        i,
        q: eps.iter().map(|e| base + e).collect(),
        eps0,
        model: model.clone(),
        shift,
        max_residual: solution.residuals.iter().copied().fold(0.0, f64::max),
        condition: solution.condition,
        imag_defect,
        tail_applied: !tail.is_empty(),
    })
}

fn prepare(data: &ScalarLocalData, config: &InverseConfig) -> Result<(ScalarLocalData, f64, AsymptoticSummary, ScalarModel)> {
    let (shifted, shift) = shift_spectrum(&data.embedded(), config.tol.shift_margin);
    let shifted = ScalarLocalData {
        lambdas: shifted.lambdas(),
        ..data.clone()
    };
    let (summary, model) = local_asymptotics(&shifted, config.n_grid, &config.tol).stage("model")?;
    Ok((shifted, shift, summary, model))
}

/// Recovers `q_i` from `{λ_nk, α_nk^(ii)}` through the scalar main equation.
pub fn solve_local_inverse(data: &ScalarLocalData, config: &InverseConfig) -> Result<LocalReconstruction> {
    if data.i >= data.m {
        return Err(Error::InvalidInput(format!(
            "local problems cover edges 1..={}, got {}",
            data.m - 1,
            data.i
        )));
    }
    let (shifted, shift, summary, model) = prepare(data, config)?;
    local_path(&shifted, None, Some(&summary), &model, shift, config)
}

/// The same local problem through the matrix main equation with the
/// diagonal parts of all weights; entry `(i, i)` is read off.
pub fn solve_local_matrix_path(data: &SpectralData, i: usize, config: &InverseConfig) -> Result<LocalReconstruction> {
    let local = ScalarLocalData::from_spectral(data, i, &config.tol)?;
    let (shifted, shift, summary, model) = prepare(&local, config)?;
    let full = data.map_lambdas(|l| l + shift);
    local_path(&shifted, Some(&full), Some(&summary), &model, shift, config)
}

/// Local problems for edges `1..m` in parallel.
pub fn solve_all_local(data: &SpectralData, config: &InverseConfig) -> Result<Vec<LocalReconstruction>> {
    (1..data.m())
        .into_par_iter()
        .map(|i| {
            let local = ScalarLocalData::from_spectral(data, i, &config.tol)?;
            solve_local_inverse(&local, config)
        })
        .collect()
}

/// Every edge, including the last, from the full matrix inverse problem.
pub fn matrix_fallback(data: &SpectralData, config: &InverseConfig) -> Result<Vec<Vec<f64>>> {
    let result = reconstruct::solve_inverse(data, config)?;
    let m = data.m();
    Ok((0..m)
        .map(|j| {
            result
                .problem
                .potential
                .samples()
                .iter()
                .map(|q| q[(j, j)].re)
                .collect()
        })
        .collect())
}
