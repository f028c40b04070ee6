//! Asymptotics of spectral data and the constant model problem matched to them.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::forward::{ConstantPotential, Fundamental, SolutionTrace};
use crate::linalg::{self, CMat, C64};
use crate::problem::{
    BoundaryCoefficient, PotentialGrid, Problem, Projector, SpectralData, ToleranceConfig,
};

/// Weight matrices with every group of equal eigenvalues counted once.
#[derive(Clone, Debug)]
pub struct CollapsedWeights {
    m: usize,
    p: usize,
    alpha_prime: Vec<CMat>,
}

impl CollapsedWeights {
    /// Slots per band.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Size of the stored matrices.
    pub fn dim(&self) -> usize {
        self.alpha_prime[0].nrows()
    }

    /// The `(i, i)` entries as `1×1` weights, 1-based `i`.
    pub fn diagonal_entry(&self, i: usize) -> Self {
        Self {
            m: self.m,
            p: self.p,
            alpha_prime: self
                .alpha_prime
                .iter()
                .map(|a| CMat::from_element(1, 1, a[(i - 1, i - 1)]))
                .collect(),
        }
    }

    /// Same weights with the off-diagonal entries dropped.
    pub fn diagonal_part(&self) -> Self {
        Self {
            m: self.m,
            p: self.p,
            alpha_prime: self
                .alpha_prime
                .iter()
                .map(|a| CMat::from_diagonal(&a.diagonal()))
                .collect(),
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_bands(&self) -> usize {
        self.alpha_prime.len() / self.m
    }

    /// `α'_nk`.
    pub fn get(&self, n: usize, k: usize) -> &CMat {
        &self.alpha_prime[(n - 1) * self.m + (k - 1)]
    }

    /// `Σ_{k ∈ slots} α'_nk`.
    pub fn class_sum(&self, n: usize, slots: &[usize]) -> CMat {
        let mut acc = CMat::zeros(self.dim(), self.dim());
        for &k in slots {
            acc += self.get(n, k);
        }
        acc
    }

    /// `α_n^I`.
    pub fn sum_i(&self, n: usize) -> CMat {
        self.class_sum(n, &(1..=self.p).collect::<Vec<_>>())
    }

    /// `α_n^II`.
    pub fn sum_ii(&self, n: usize) -> CMat {
        self.class_sum(n, &(self.p + 1..=self.m).collect::<Vec<_>>())
    }
}

/// Groups of numerically equal eigenvalues as `[start, end)` ranges into the
/// lexicographically ordered data.
pub fn multiplicity_groups(lambdas: &[f64], tol_mult: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=lambdas.len() {
        if i == lambdas.len()
            || (lambdas[i] - lambdas[start]).abs() > tol_mult * (1.0 + lambdas[start].abs())
        {
            out.push((start, i));
            start = i;
        }
    }
    out
}

pub fn collapse_weights(data: &SpectralData, p: usize, tol: &ToleranceConfig) -> CollapsedWeights {
    let m = data.m();
    let entries = data.entries();
    let lambdas = data.lambdas();
    let mut alpha_prime: Vec<CMat> = entries.iter().map(|d| d.alpha.clone()).collect();
    for (a, b) in multiplicity_groups(&lambdas, tol.mult) {
        for ap in &mut alpha_prime[a + 1..b] {
            *ap = CMat::zeros(m, m);
        }
    }
    CollapsedWeights { m, p, alpha_prime }
}

fn rho(lambda: f64) -> f64 {
    lambda.max(0.0).sqrt()
}

fn tail_bands(n_bands: usize) -> std::ops::RangeInclusive<usize> {
    let len = 3usize.max(n_bands.div_ceil(2)).min(n_bands);
    n_bands - len + 1..=n_bands
}

/// Number of slots per band whose square roots sit near half-integers,
/// by majority vote over the last half of the bands.
pub fn estimate_p(data: &SpectralData) -> Result<usize> {
    let n_bands = data.n_bands();
    if n_bands < 5 {
        return Err(Error::InvalidInput(format!(
            "at least 5 bands are needed to classify slots, got {n_bands}"
        )));
    }
    let from = n_bands - n_bands.div_ceil(2) + 1;
    let mut p = 0;
    let mut worst: f64 = 1.0;
    for k in 1..=data.m() {
        let mut half = 0usize;
        let mut total = 0usize;
        for n in from..=n_bands {
            let r = rho(data.get(n, k).lambda);
            let d_half = (r - ((r - 0.5).round() + 0.5)).abs();
            let d_int = (r - r.round()).abs();
            if d_half < d_int {
                half += 1;
            }
            total += 1;
        }
        let frac = half as f64 / total as f64;
        worst = worst.min(frac.max(1.0 - frac));
        if frac > 0.5 {
            p += 1;
        }
    }
    if worst < 2.0 / 3.0 {
        return Err(Error::InconclusiveRank { margin: worst });
    }
    Ok(p)
}

/// Snaps the eigenvalues of a Hermitian matrix to `{0, 1}`; returns the
/// projector and the largest snapping distance.
pub fn round_to_projector(a: &CMat) -> (CMat, f64) {
    let (vals, vecs) = linalg::eigh(a);
    let mut defect: f64 = 0.0;
    let snapped: Vec<f64> = vals
        .iter()
        .map(|&v| {
            let s = if v > 0.5 { 1.0 } else { 0.0 };
            defect = defect.max((v - s).abs());
            s
        })
        .collect();
    let t = &vecs * linalg::diag_real(&snapped) * vecs.adjoint();
    (linalg::hermitian_part(&t), defect)
}

/// `T = lim π/(2(n − 1/2)²) α_n^I`, fitted and rounded to a projector.
pub fn estimate_t(weights: &CollapsedWeights, tol: &ToleranceConfig) -> Result<Projector> {
    let n_bands = weights.n_bands();
    if n_bands < 3 {
        return Err(Error::InvalidInput("at least 3 bands are needed to fit T".into()));
    }
    let bands: Vec<usize> = tail_bands(n_bands).collect();
    let ns: Vec<f64> = bands.iter().map(|&n| n as f64).collect();
    let mats: Vec<CMat> = bands
        .iter()
        .map(|&n| {
            let nh = n as f64 - 0.5;
            weights.sum_i(n) * linalg::re(PI / (2.0 * nh * nh))
        })
        .collect();
    let (limit, _) = linalg::fit_inverse_n_matrix(&ns, &mats, &ns);
    let (t, defect) = round_to_projector(&linalg::hermitian_part(&limit));
    if defect > tol.fit {
        return Err(Error::NoisyData { residual: defect });
    }
    Ok(Projector::new(t))
}

/// The constants `z_k`, the matrices `A^(s)` and `Θ = Σ_{s∈S} z_s A^(s)`.
#[derive(Clone, Debug)]
pub struct AsymptoticSummary {
    pub p: usize,
    pub t: Projector,
    /// `z_1..z_p` then `z_{p+1}..z_m`.
    pub z: Vec<f64>,
    /// Slots (1-based) of each equality class of `z`; the first slot of a
    /// class is its representative `s ∈ S`.
    pub classes: Vec<Vec<usize>>,
    /// `A^(s)` per class.
    pub a: Vec<CMat>,
    pub theta: CMat,
    /// Set when doubling `tol_z` changes the classes.
    pub unstable_classes: bool,
}

impl AsymptoticSummary {
    /// The index set `S`.
    pub fn s_set(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c[0]).collect()
    }
}

fn z_classes(z: &[f64], p: usize, tol_z: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &zk) in z.iter().enumerate() {
        let k = i + 1;
        let joins = k != 1
            && k != p + 1
            && out
                .last()
                .is_some_and(|c| (zk - z[c[c.len() - 1] - 1]).abs() <= tol_z);
        if joins {
            out.last_mut().unwrap().push(k);
        } else {
            out.push(vec![k]);
        }
    }
    out
}

pub fn estimate_z_a_theta(
    data: &SpectralData,
    weights: &CollapsedWeights,
    t: &Projector,
    tol: &ToleranceConfig,
) -> Result<AsymptoticSummary> {
    let m = data.m();
    let p = weights.p();
    let n_bands = data.n_bands();
    if n_bands < 3 {
        return Err(Error::InvalidInput("at least 3 bands are needed for asymptotics".into()));
    }
    let bands: Vec<usize> = tail_bands(n_bands).collect();
    let ns: Vec<f64> = bands.iter().map(|&n| n as f64).collect();

    let mut z = Vec::with_capacity(m);
    for k in 1..=m {
        let vals: Vec<f64> = bands
            .iter()
            .map(|&n| {
                let center = if k <= p { n as f64 - 0.5 } else { n as f64 };
                (rho(data.get(n, k).lambda) - center) * PI * center
            })
            .collect();
        z.push(linalg::fit_inverse_n(&ns, &vals, &ns).0);
    }

    let classes = z_classes(&z, p, tol.z);
    let unstable_classes = z_classes(&z, p, 2.0 * tol.z) != classes;
    let mut a = Vec::with_capacity(classes.len());
    let mut theta = CMat::zeros(m, m);
    for class in &classes {
        let mats: Vec<CMat> = bands
            .iter()
            .map(|&n| {
                let c = if class[0] <= p { n as f64 - 0.5 } else { n as f64 };
                weights.class_sum(n, class) * linalg::re(PI / (2.0 * c * c))
            })
            .collect();
        let (limit, _) = linalg::fit_inverse_n_matrix(&ns, &mats, &ns);
        let limit = linalg::hermitian_part(&limit);
        theta += &limit * linalg::re(z[class[0] - 1]);
        a.push(limit);
    }
    Ok(AsymptoticSummary {
        p,
        t: t.clone(),
        z,
        classes,
        a,
        theta: linalg::hermitian_part(&theta),
        unstable_classes,
    })
}

/// `L̃`: `Q̃ ≡ (2/π) Θ`, `T̃ = T`, `H̃ = 0`.
pub fn build_model(summary: &AsymptoticSummary, n_grid: usize) -> Problem {
    let m = summary.t.dim();
    Problem::new(
        PotentialGrid::constant(model_potential(summary), n_grid),
        summary.t.clone(),
        BoundaryCoefficient::zero(m),
    )
}

pub fn model_potential(summary: &AsymptoticSummary) -> CMat {
    &summary.theta * linalg::re(2.0 / PI)
}

/// Closed-form `S̃(x, λ)` of the model problem on a grid of `n_grid` intervals.
pub fn model_solution(summary: &AsymptoticSummary, lambda: C64, n_grid: usize) -> Result<SolutionTrace> {
    let f = ConstantPotential::new(&model_potential(summary), n_grid);
    crate::forward::sine_trace(&f as &dyn Fundamental, lambda)
}

/// Asymptotic constants of a given problem:
/// `Ω = ½∫Q`, `z_1..z_p` the eigenvalues of `T(Ω − H)T` on `range T`,
/// `z_{p+1}..z_m` those of `T⊥ΩT⊥` on `range T⊥`, `A^(s)` the spectral
/// projectors of those restrictions and `Θ = T(Ω − H)T + T⊥ΩT⊥`.
pub fn forward_asymptotics(problem: &Problem, tol: &ToleranceConfig) -> AsymptoticSummary {
    let t = problem.projector.matrix();
    let tp = problem.projector.complement();
    let omega = problem.potential.integral() * linalg::re(0.5);
    let top = t * (&omega - problem.boundary.matrix()) * t;
    let bottom = &tp * &omega * &tp;
    let p = problem.projector.rank();

    let mut z = Vec::new();
    let mut vectors = Vec::new();
    for (block, proj) in [(&top, t), (&bottom, &tp)] {
        let basis = linalg::range_basis(proj);
        let r = basis.adjoint() * block * &basis;
        let (vals, vecs) = linalg::eigh(&r);
        let lifted = &basis * vecs;
        for (i, v) in vals.into_iter().enumerate() {
            z.push(v);
            vectors.push(lifted.column(i).into_owned());
        }
    }
    let classes = z_classes(&z, p, tol.z);
    let unstable_classes = z_classes(&z, p, 2.0 * tol.z) != classes;
    let a = classes
        .iter()
        .map(|class| {
            let mut acc = CMat::zeros(t.nrows(), t.ncols());
            for &k in class {
                let v = &vectors[k - 1];
                acc += v * v.adjoint();
            }
            acc
        })
        .collect();
    AsymptoticSummary {
        p,
        t: problem.projector.clone(),
        z,
        classes,
        a,
        theta: linalg::hermitian_part(&(top + bottom)),
        unstable_classes,
    }
}

/// Everything produced while constructing the model problem from data.
#[derive(Clone, Debug)]
pub struct ModelConstruction {
    pub summary: AsymptoticSummary,
    pub weights: CollapsedWeights,
    pub model: Problem,
}

/// Runs the model construction end to end on non-negative data.
pub fn construct_model(data: &SpectralData, n_grid: usize, tol: &ToleranceConfig) -> Result<ModelConstruction> {
    let p = estimate_p(data)?;
    if p == 0 || p >= data.m() {
        return Err(Error::InvalidInput(format!(
            "slot classification gave p = {p}, but p < m required (m = {})",
            data.m()
        )));
    }
    let weights = collapse_weights(data, p, tol);
    let t = estimate_t(&weights, tol)?;
    if t.rank() != p {
        return Err(Error::NoisyData {
            residual: (t.rank() as f64 - p as f64).abs(),
        });
    }
    let summary = estimate_z_a_theta(data, &weights, &t, tol)?;
    let model = build_model(&summary, n_grid);
    Ok(ModelConstruction {
        summary,
        weights,
        model,
    })
}
