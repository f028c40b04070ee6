//! `ε₀`, `ε`, recovery of `Q` and `H`, and the end-to-end inverse pipeline.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result, StageExt};
use crate::forward::{sine_trace, ConstantPotential, Fundamental, Operator, SolutionTrace};
use crate::linalg::{self, CMat};
use crate::maineq::{self, GridSolution, Grouping, SpectralNode, XiDiagnostics};
use crate::model::{self, AsymptoticSummary, CollapsedWeights};
use crate::problem::{
    shift_spectrum, BoundaryCoefficient, PotentialGrid, Problem, Projector, SpectralData, SpectralDatum,
    ToleranceConfig,
};

#[derive(Clone, Debug)]
pub struct EpsilonTrace {
    pub eps0: Vec<CMat>,
    pub eps: Vec<CMat>,
}

/// `ε₀ = Σ_u S_u C_u S̃_u†` and `ε = −2 Σ_u (S'_u C_u S̃_u† + S_u C_u S̃'_u†)`.
pub fn epsilon_series(
    solution: &GridSolution,
    nodes: &[SpectralNode],
    traces: &[&SolutionTrace],
) -> Result<EpsilonTrace> {
    let m = solution.m;
    let n = solution.n_grid();
    if traces.len() != nodes.len() || traces.iter().any(|t| t.n_grid() != n) {
        return Err(Error::DimensionMismatch("model traces do not match the solution".into()));
    }
    let (eps0, eps) = (0..=n)
        .into_par_iter()
        .map(|i| {
            let mut e0 = CMat::zeros(m, m);
            let mut e = CMat::zeros(m, m);
            for (a, &u) in solution.active.iter().enumerate() {
                let c = &nodes[u].coeff;
                let st = traces[u].values[i].adjoint();
                let dst = traces[u].derivs[i].adjoint();
                let x = solution.value(a, i);
                let dx = solution.deriv(a, i);
                e0 += &x * c * &st;
                e += dx * c * st + x * c * dst;
            }
            (e0, e * linalg::re(-2.0))
        })
        .unzip();
    Ok(EpsilonTrace { eps0, eps })
}

/// Bands beyond the data: weight differences extrapolated per slot class as
/// `(2c²/π)(A/n² + B/n³)` from the last supplied bands, placed at the model
/// eigenvalues `(c + z/(πc))²`. Each entry is `(λ, α − α̃)`.
pub fn tail_terms(
    summary: &AsymptoticSummary,
    weights: &CollapsedWeights,
    model_weights: &CollapsedWeights,
    last_band: usize,
) -> Vec<(f64, CMat)> {
    let n_bands = weights.n_bands();
    let mut terms = Vec::new();
    if last_band <= n_bands || n_bands < 4 {
        return terms;
    }
    let fit_from = n_bands + 1 - 4usize.max(n_bands.div_ceil(2)).min(n_bands);
    for class in &summary.classes {
        let half = class[0] <= summary.p;
        let center = |n: usize| if half { n as f64 - 0.5 } else { n as f64 };
        let ns: Vec<usize> = (fit_from..=n_bands).collect();
        let design: Vec<Vec<f64>> = ns
            .iter()
            .map(|&n| {
                let n = n as f64;
                vec![1.0 / (n * n), 1.0 / (n * n * n)]
            })
            .collect();
        let rel: Vec<CMat> = ns
            .iter()
            .map(|&n| {
                let c = center(n);
                (weights.class_sum(n, class) - model_weights.class_sum(n, class)) * linalg::re(PI / (2.0 * c * c))
            })
            .collect();
        let coef = linalg::fit_basis_matrix(&design, &rel);
        if coef.iter().all(|c| linalg::max_abs(c) == 0.0) {
            continue;
        }
        let z = summary.z[class[0] - 1];
        for n in n_bands + 1..=last_band {
            let c = center(n);
            let nf = n as f64;
            let rho = c + z / (PI * c);
            let d = (&coef[0] / linalg::re(nf * nf) + &coef[1] / linalg::re(nf * nf * nf))
                * linalg::re(2.0 * c * c / PI);
            terms.push((rho * rho, linalg::hermitian_part(&d)));
        }
    }
    terms
}

/// Contribution of the tail to `ε₀` and `ε`. Tail solutions are taken to
/// first order, `S_u ≈ S̃_u − Σ_w S_w C_w D̃(x, λ_w, λ_u)` over the solved
/// unknowns `w`.
pub fn tail_epsilon(
    terms: &[(f64, CMat)],
    model: &Problem,
    solution: &GridSolution,
    nodes: &[SpectralNode],
    traces: &[&SolutionTrace],
) -> Result<EpsilonTrace> {
    let q = model
        .potential
        .constant_value()
        .ok_or_else(|| Error::InvalidInput("model potential must be constant".into()))?;
    let f = ConstantPotential::new(q, model.potential.n_grid());
    let m = model.dim();
    let n = model.potential.n_grid();
    let h = model.potential.step();
    let active: Vec<&SolutionTrace> = solution.active.iter().map(|&u| traces[u]).collect();
    let coeffs: Vec<&CMat> = solution.active.iter().map(|&u| &nodes[u].coeff).collect();
    let size = m * active.len();
    // per node: [S̃_w], [S̃'_w], [S_w C_w], [S'_w C_w]
    let head: Vec<(CMat, CMat, CMat, CMat)> = if size == 0 {
        Vec::new()
    } else {
        (0..=n)
            .map(|i| {
                let (phi, dphi) = maineq::stacked(&active, i);
                let xc = maineq::left_coeff(&coeffs, &solution.values[i].transpose()).transpose();
                let dxc = maineq::left_coeff(&coeffs, &solution.derivs[i].transpose()).transpose();
                (phi, dphi, xc, dxc)
            })
            .collect()
    };
    let zero = || vec![(CMat::zeros(m, m), CMat::zeros(m, m)); n + 1];
    let sums = terms
        .par_iter()
        .fold(zero, |mut acc, (lambda, d)| {
            let mut run = maineq::Running::new(h, size, m);
            for (i, slot) in acc.iter_mut().enumerate() {
                let (s, ds) = f.sine(linalg::re(*lambda), i as f64 * h);
                let (mut xu, mut dxu) = (s.clone(), ds.clone());
                if size > 0 {
                    let (phi, dphi, xc, dxc) = &head[i];
                    let g = phi.adjoint() * &s;
                    let dg = dphi.adjoint() * &s + phi.adjoint() * &ds;
                    let k = run.push(g.clone(), &dg);
                    xu -= xc * &k;
                    dxu -= dxc * &k + xc * g;
                }
                slot.0 += &xu * d * s.adjoint();
                slot.1 -= (&dxu * d * s.adjoint() + &xu * d * ds.adjoint()) * linalg::re(2.0);
            }
            acc
        })
        .reduce(zero, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x.0 += y.0;
                x.1 += y.1;
            }
            a
        });
    let (eps0, eps) = sums.into_iter().unzip();
    Ok(EpsilonTrace { eps0, eps })
}

#[derive(Clone, Debug)]
pub struct Recovery {
    pub problem: Problem,
    /// Largest `‖Q − Q†‖` before symmetrisation.
    pub q_defect: f64,
    pub h_defect: f64,
}

/// `Q = Q̃ + ε`, `H = H̃ − T ε₀(π) T`, both symmetrised; `shift·I` is then
/// removed from `Q`.
pub fn recover_qh(model: &Problem, epsilon: &EpsilonTrace, shift: f64) -> Result<Recovery> {
    let m = model.dim();
    let n = model.potential.n_grid();
    if epsilon.eps.len() != n + 1 {
        return Err(Error::DimensionMismatch("ε is not on the model grid".into()));
    }
    let mut q_defect: f64 = 0.0;
    let mut scale: f64 = 1.0;
    let samples = (0..=n)
        .map(|i| {
            let q = model.potential.sample(i) + &epsilon.eps[i];
            q_defect = q_defect.max(linalg::hermitian_defect(&q));
            scale = scale.max(linalg::max_abs(&q));
            linalg::hermitian_part(&q) - linalg::identity(m) * linalg::re(shift)
        })
        .collect();
    if q_defect > 1e-4 * scale {
        return Err(Error::ReconstructionInconsistency { defect: q_defect });
    }
    let t = model.projector.matrix();
    let h = model.boundary.matrix() - t * &epsilon.eps0[n] * t;
    let h_defect = linalg::hermitian_defect(&h);
    let h = t * linalg::hermitian_part(&h) * t;
    Ok(Recovery {
        problem: Problem::new(
            PotentialGrid::new(samples)?,
            model.projector.clone(),
            BoundaryCoefficient::new(linalg::hermitian_part(&h)),
        ),
        q_defect,
        h_defect,
    })
}

/// `Q = S'' S⁻¹ + λI` at the nodes where `cond(S) ≤ 10⁶`; `None` elsewhere.
pub fn recover_q_direct(values: &[CMat], second: &[CMat], lambda: f64) -> Vec<Option<CMat>> {
    values
        .iter()
        .zip(second)
        .map(|(s, ds2)| {
            let sv = linalg::singular_values(s);
            let (hi, lo) = (sv[0], *sv.last().unwrap());
            if !(lo > 0.0) || hi / lo > 1e6 {
                return None;
            }
            let inv = s.clone().try_inverse()?;
            Some(ds2 * inv + linalg::identity(s.nrows()) * linalg::re(lambda))
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct InverseConfig {
    pub n_grid: usize,
    pub tol: ToleranceConfig,
    /// Grid nodes at which `(I − R)(I + R̃) = I` is checked.
    pub identity_nodes: Vec<usize>,
    /// Re-solve with four fewer bands and report the sup-norm change in `Q`.
    pub truncation_check: bool,
    /// Last band of the extrapolated tail; no tail when not above the data.
    pub tail_bands: usize,
}

impl Default for InverseConfig {
    fn default() -> Self {
        Self {
            n_grid: 1000,
            tol: ToleranceConfig::default(),
            identity_nodes: Vec::new(),
            truncation_check: false,
            tail_bands: 500,
        }
    }
}

impl InverseConfig {
    /// Default settings on a grid of `n_grid` intervals, with the tail
    /// extending to band `n_grid / 2`.
    pub fn with_grid(n_grid: usize) -> Self {
        Self {
            n_grid,
            tail_bands: n_grid / 2,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct Diagnostics {
    pub n0: usize,
    pub n_groups: usize,
    pub active_nodes: usize,
    pub max_residual: f64,
    pub condition: f64,
    /// `(x, ‖(I − R(x))(I + R̃(x)) − I‖_F)`.
    pub identity: Vec<(f64, f64)>,
    pub xi: XiDiagnostics,
    pub q_hermitian_defect: f64,
    pub h_hermitian_defect: f64,
    pub truncation_delta: Option<f64>,
    pub unstable_classes: bool,
    /// Whether an extrapolated tail entered `ε`.
    pub tail_applied: bool,
}

#[derive(Clone, Debug)]
pub struct ReconstructionResult {
    /// Recovered problem, with the spectrum shift removed.
    pub problem: Problem,
    pub model: Problem,
    pub summary: AsymptoticSummary,
    pub epsilon: EpsilonTrace,
    pub shift: f64,
    pub grouping: Grouping,
    pub nodes: Vec<SpectralNode>,
    pub solution: GridSolution,
    pub diagnostics: Diagnostics,
}

impl ReconstructionResult {
    /// Solved `S(x, λ)` for the active unknown closest to `rho`.
    pub fn solved_trace(&self, rho: f64) -> Option<SolutionTrace> {
        let (a, &u) = self
            .solution
            .active
            .iter()
            .enumerate()
            .min_by(|x, y| {
                (self.nodes[*x.1].rho - rho)
                    .abs()
                    .total_cmp(&(self.nodes[*y.1].rho - rho).abs())
            })?;
        Some(self.solution.trace(a, self.nodes[u].lambda))
    }
}

fn model_traces(model: &Problem, nodes: &[SpectralNode]) -> Result<Vec<SolutionTrace>> {
    let q = model
        .potential
        .constant_value()
        .ok_or_else(|| Error::InvalidInput("model potential must be constant".into()))?;
    let f = ConstantPotential::new(q, model.potential.n_grid());
    nodes
        .par_iter()
        .map(|n| sine_trace(&f as &dyn Fundamental, linalg::re(n.lambda)))
        .collect()
}

/// Main equation, `ε` and recovery for data against a given model problem
/// and its spectral data. The data must already be non-negative.
#[allow(clippy::too_many_arguments)]
pub fn solve_against_model(
    data: &SpectralData,
    weights: &CollapsedWeights,
    model: &Problem,
    model_data: &SpectralData,
    model_weights: &CollapsedWeights,
    p: usize,
    identity_nodes: &[usize],
    tail: &[(f64, CMat)],
    tol: &ToleranceConfig,
) -> Result<(Grouping, Vec<SpectralNode>, GridSolution, EpsilonTrace)> {
    let grouping = maineq::build_groups(data, model_data, p).stage("grouping")?;
    let nodes = maineq::spectral_nodes(&grouping, data, model_data, weights, model_weights, tol)
        .stage("grouping")?;
    let traces = model_traces(model, &nodes).stage("model traces")?;
    let refs: Vec<&SolutionTrace> = traces.iter().collect();
    let solution = maineq::solve_on_grid(&nodes, &refs, &model.potential, identity_nodes, tol)
        .stage("main equation")?;
    let mut epsilon = epsilon_series(&solution, &nodes, &refs).stage("epsilon")?;
    if !tail.is_empty() {
        let extra = tail_epsilon(tail, model, &solution, &nodes, &refs).stage("tail")?;
        for (e, t) in epsilon.eps0.iter_mut().zip(extra.eps0) {
            *e += t;
        }
        for (e, t) in epsilon.eps.iter_mut().zip(extra.eps) {
            *e += t;
        }
    }
    Ok((grouping, nodes, solution, epsilon))
}

/// Spectral data of a constant-potential model problem by closed-form shooting.
pub fn model_spectral_data(model: &Problem, n_bands: usize, tol: &ToleranceConfig) -> Result<SpectralData> {
    let q = model
        .potential
        .constant_value()
        .ok_or_else(|| Error::InvalidInput("model potential must be constant".into()))?;
    Operator::constant(q, &model.projector, &model.boundary, model.potential.n_grid(), tol).spectral_data(n_bands)
}

pub fn solve_inverse(data: &SpectralData, config: &InverseConfig) -> Result<ReconstructionResult> {
    let tol = &config.tol;
    let report = data.validate(tol);
    if !report.is_empty() {
        let text: Vec<String> = report.iter().map(|v| v.to_string()).collect();
        return Err(Error::InvalidInput(text.join("; ")).at_stage("validate"));
    }
    let (shifted, shift) = shift_spectrum(data, tol.shift_margin);
    let construction = model::construct_model(&shifted, config.n_grid, tol).stage("model")?;
    let p = construction.summary.p;
    let model_data =
        model_spectral_data(&construction.model, shifted.n_bands(), tol).stage("model spectrum")?;
    let model_weights = model::collapse_weights(&model_data, p, tol);
    let tail = tail_terms(
        &construction.summary,
        &construction.weights,
        &model_weights,
        config.tail_bands,
    );
    let (grouping, nodes, solution, epsilon) = solve_against_model(
        &shifted,
        &construction.weights,
        &construction.model,
        &model_data,
        &model_weights,
        p,
        &config.identity_nodes,
        &tail,
        tol,
    )?;
    let recovery = recover_qh(&construction.model, &epsilon, shift).stage("recover")?;
    let xi = maineq::diagnostics_xi(
        &grouping,
        &construction.weights,
        &model_weights,
        &construction.summary.classes,
    );

    let truncation_delta = if config.truncation_check && shifted.n_bands() >= 9 {
        let fewer = InverseConfig {
            truncation_check: false,
            identity_nodes: Vec::new(),
            ..config.clone()
        };
        let other = solve_inverse(&data.truncated(data.n_bands() - 4), &fewer)?;
        Some(
            recovery
                .problem
                .potential
                .samples()
                .iter()
                .zip(other.problem.potential.samples())
                .map(|(a, b)| linalg::max_abs(&(a - b)))
                .fold(0.0, f64::max),
        )
    } else {
        None
    };

    let h = solution.step;
    let diagnostics = Diagnostics {
        n0: grouping.n0,
        n_groups: grouping.groups.len(),
        active_nodes: solution.active.len(),
        max_residual: solution.residuals.iter().copied().fold(0.0, f64::max),
        condition: solution.condition,
        identity: solution.identity.iter().map(|&(i, d)| (i as f64 * h, d)).collect(),
        xi,
        q_hermitian_defect: recovery.q_defect,
        h_hermitian_defect: recovery.h_defect,
        truncation_delta,
        unstable_classes: construction.summary.unstable_classes,
        tail_applied: !tail.is_empty(),
    };
    let mut problem = recovery.problem;
    problem.shift = 0.0;
    Ok(ReconstructionResult {
        problem,
        model: construction.model,
        summary: construction.summary,
        epsilon,
        shift,
        grouping,
        nodes,
        solution,
        diagnostics,
    })
}

/// Closed-form solution of the two-equation system for a single perturbed
/// eigenvalue `λ_11 = a²` of the three-edge star model.
#[derive(Clone, Debug)]
pub struct Sec6Values {
    pub f11: f64,
    pub f12: f64,
    pub f22: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub s110: CMat,
    pub s111: CMat,
    pub eps0: CMat,
}

fn check_a(a: f64) -> Result<()> {
    if !(0.0..1.0).contains(&a) || (a - 0.5).abs() < 1e-12 {
        return Err(Error::InvalidInput(format!("a = {a} must lie in [0, 1) with a ≠ 1/2")));
    }
    Ok(())
}

/// `sin(ax)/a`.
fn sin_over(a: f64, x: f64) -> f64 {
    if a.abs() < 1e-6 {
        x - a * a * x.powi(3) / 6.0
    } else {
        (a * x).sin() / a
    }
}

/// `(x − sin(2ax)/(2a)) / (4a²)`.
fn f11_core(a: f64, x: f64) -> f64 {
    let b = 2.0 * a;
    if b.abs() < 1e-3 {
        x.powi(3) / 6.0 - b * b * x.powi(5) / 120.0 + b.powi(4) * x.powi(7) / 5040.0
    } else {
        (x - (b * x).sin() / b) / (b * b)
    }
}

/// `(1/a)(sin((a − ½)x)/(a − ½) − sin((a + ½)x)/(a + ½))`.
fn f12_core(a: f64, x: f64) -> f64 {
    if a.abs() < 1e-6 {
        // −2 d/dc [sin(cx)/c] at c = 1/2
        -2.0 * (2.0 * x * (x / 2.0).cos() - 4.0 * (x / 2.0).sin())
    } else {
        ((a - 0.5) * x).sin() / (a - 0.5) / a - ((a + 0.5) * x).sin() / (a + 0.5) / a
    }
}

pub fn sec6_closed_form(a: f64, x: f64) -> Result<Sec6Values> {
    check_a(a)?;
    let t = Projector::star(3);
    let tm = t.matrix();
    let tp = t.complement();
    let f11 = 1.0 + f11_core(a, x) / PI;
    let f22 = 1.0 - (x - x.sin()) / PI;
    let f12 = f12_core(a, x) / (2.0 * PI);
    let sa = sin_over(a, x);
    let sh = 2.0 * (x / 2.0).sin();
    let delta0 = f11 * f22 + f12 * f12;
    let delta1 = sa * f22 + sh * f12;
    let delta2 = f11 * sh - f12 * sa;
    let r = linalg::re;
    Ok(Sec6Values {
        f11,
        f12,
        f22,
        delta0,
        delta1,
        delta2,
        s110: tm * r(delta1 / delta0) + &tp * r(sa),
        s111: tm * r(delta2 / delta0) + &tp * r(sh),
        eps0: tm * r((delta1 * sa - 2.0 * delta2 * (x / 2.0).sin()) / (2.0 * PI * delta0)),
    })
}

/// Spectral data of the three-edge star model with `λ_11` replaced by `a²`.
pub fn sec6_data(a: f64, n_bands: usize) -> Result<SpectralData> {
    check_a(a)?;
    let t = Projector::star(3);
    let mut d = Vec::with_capacity(3 * n_bands);
    for n in 1..=n_bands {
        let h = n as f64 - 0.5;
        d.push(SpectralDatum {
            n,
            k: 1,
            lambda: if n == 1 { a * a } else { h * h },
            alpha: t.matrix() * linalg::re(2.0 * h * h / PI),
        });
        for k in 2..=3 {
            d.push(SpectralDatum {
                n,
                k,
                lambda: (n * n) as f64,
                alpha: t.complement() * linalg::re(2.0 * (n * n) as f64 / PI),
            });
        }
    }
    SpectralData::new(3, d)
}

/// The unperturbed star model `Q̃ ≡ 0`, `T̃ = (1/3)·ones`, `H̃ = 0`.
pub fn sec6_model(n_grid: usize) -> Problem {
    Problem::new(
        PotentialGrid::zero(3, n_grid),
        Projector::star(3),
        BoundaryCoefficient::zero(3),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_at_origin() {
        let v = sec6_closed_form(0.3, 0.0).unwrap();
        assert_eq!((v.f11, v.f22, v.f12, v.delta0), (1.0, 1.0, 0.0, 1.0));
        assert_eq!(linalg::max_abs(&v.eps0), 0.0);
    }

    #[test]
    fn half_is_rejected() {
        assert!(sec6_closed_form(0.5, 1.0).is_err());
        assert!(sec6_data(0.5, 3).is_err());
    }

    #[test]
    fn boundary_coefficient_from_closed_form() {
        let v = sec6_closed_form(0.3, PI).unwrap();
        let h = -v.eps0[(0, 0)].re * 3.0;
        assert!((h + 0.361838).abs() < 5e-6, "{h}");
    }

    #[test]
    fn small_a_limits_are_continuous() {
        for x in [0.4, 1.7, 3.0] {
            let near = sec6_closed_form(2e-6, x).unwrap();
            let lim = sec6_closed_form(0.0, x).unwrap();
            assert!((near.f11 - lim.f11).abs() < 1e-9);
            assert!((near.f12 - lim.f12).abs() < 1e-9);
        }
    }

    #[test]
    fn closed_form_satisfies_the_system() {
        let a = 0.7;
        let t = Projector::star(3);
        for x in [0.3, 1.1, 2.9] {
            let v = sec6_closed_form(a, x).unwrap();
            let tm = t.matrix();
            let tp = t.complement();
            let r = linalg::re;
            let lhs1 = &v.s110 * (tm * r(v.f11) + &tp) - &v.s111 * tm * r(v.f12);
            let lhs2 = &v.s110 * tm * r(v.f12) + &v.s111 * (tm * r(v.f22) + &tp);
            let rhs1 = linalg::identity(3) * r((a * x).sin() / a);
            let rhs2 = linalg::identity(3) * r(2.0 * (x / 2.0).sin());
            assert!(linalg::max_abs(&(lhs1 - rhs1)) < 1e-13);
            assert!(linalg::max_abs(&(lhs2 - rhs2)) < 1e-13);
        }
    }
}
