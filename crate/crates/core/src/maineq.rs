//! Groups of eigenvalue square roots, the kernel `D̃` and the truncated main
//! equation `ψ̃(x) = ψ(x)(I + R̃(x))`.
//!
//! Unknowns are keyed by distinct `ρ` inside a group. Each unknown `u` carries
//! the coefficient `C_u = Σ α'_{lj0} − Σ α̃'_{lj1}` over its members, so the
//! equation at one node reads `X_v + Σ_u X_u C_u D̃(x, λ_u, λ_v) = S̃_v`.

use crate::error::{Error, Result};
use crate::forward::SolutionTrace;
use crate::linalg::{self, CMat};
use crate::model::CollapsedWeights;
use crate::problem::{PotentialGrid, SpectralData, ToleranceConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupEntry {
    pub n: usize,
    pub k: usize,
    /// 0 for the problem being recovered, 1 for the model.
    pub s: u8,
    pub rho: f64,
}

#[derive(Clone, Debug)]
pub struct Group {
    /// 1-based.
    pub index: usize,
    pub entries: Vec<GroupEntry>,
    /// `n − 1/2` or `n`; `None` for the leading group.
    pub center: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Grouping {
    pub n0: usize,
    pub p: usize,
    pub groups: Vec<Group>,
}

impl Grouping {
    /// Index of the group holding slot `(n, k)`.
    pub fn group_of(&self, n: usize, k: usize) -> usize {
        if n <= self.n0 {
            1
        } else if k <= self.p {
            2 * (n - self.n0)
        } else {
            2 * (n - self.n0) + 1
        }
    }
}

fn sqrt_lambda(lambda: f64) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::InvalidInput(format!(
            "negative eigenvalue {lambda}; shift the spectrum first"
        )));
    }
    Ok(lambda.sqrt())
}

pub fn build_groups(data: &SpectralData, model: &SpectralData, p: usize) -> Result<Grouping> {
    let m = data.m();
    let n_bands = data.n_bands();
    if model.m() != m || model.n_bands() != n_bands {
        return Err(Error::DimensionMismatch(format!(
            "data has {} bands of {} slots, model data {} bands of {}",
            n_bands,
            m,
            model.n_bands(),
            model.m()
        )));
    }
    let center = |n: usize, k: usize| if k <= p { n as f64 - 0.5 } else { n as f64 };
    let mut rhos = vec![[0.0; 2]; n_bands * m];
    for n in 1..=n_bands {
        for k in 1..=m {
            rhos[(n - 1) * m + k - 1] = [
                sqrt_lambda(data.get(n, k).lambda)?,
                sqrt_lambda(model.get(n, k).lambda)?,
            ];
        }
    }
    let regular = |n: usize| {
        (1..=m).all(|k| {
            rhos[(n - 1) * m + k - 1]
                .iter()
                .all(|r| (r - center(n, k)).abs() < 0.25)
        })
    };
    let mut n0 = n_bands;
    while n0 > 1 && regular(n0) {
        n0 -= 1;
    }
    if n0 + 2 > n_bands {
        return Err(Error::GroupingFailure(format!(
            "square roots do not settle within 1/4 of n − 1/2 or n before band {n_bands}"
        )));
    }

    let mut groups = vec![Group {
        index: 1,
        entries: Vec::new(),
        center: None,
    }];
    for j in 1..=n_bands - n0 {
        let n = n0 + j;
        groups.push(Group {
            index: 2 * j,
            entries: Vec::new(),
            center: Some(n as f64 - 0.5),
        });
        groups.push(Group {
            index: 2 * j + 1,
            entries: Vec::new(),
            center: Some(n as f64),
        });
    }
    let grouping = Grouping { n0, p, groups };
    let mut groups = grouping.groups.clone();
    for n in 1..=n_bands {
        for k in 1..=m {
            let g = grouping.group_of(n, k);
            for s in 0..2u8 {
                groups[g - 1].entries.push(GroupEntry {
                    n,
                    k,
                    s,
                    rho: rhos[(n - 1) * m + k - 1][s as usize],
                });
            }
        }
    }
    Ok(Grouping { groups, ..grouping })
}

/// A function on the distinct values of one group.
#[derive(Clone, Debug)]
pub struct GroupFunction {
    pub group: usize,
    pub values: Vec<(f64, CMat)>,
}

impl GroupFunction {
    /// `max(sup ‖f‖, sup ‖f(a) − f(b)‖ / |a − b|)`.
    pub fn norm(&self) -> f64 {
        let mut out: f64 = 0.0;
        for (i, (a, fa)) in self.values.iter().enumerate() {
            out = out.max(linalg::spectral_norm(fa));
            for (b, fb) in &self.values[i + 1..] {
                if a != b {
                    out = out.max(linalg::spectral_norm(&(fa - fb)) / (a - b).abs());
                }
            }
        }
        out
    }
}

/// `sup_n n·‖f_n‖`.
pub fn sequence_norm(fs: &[GroupFunction]) -> f64 {
    fs.iter()
        .map(|f| f.group as f64 * f.norm())
        .fold(0.0, f64::max)
}

/// One unknown of the main equation: a distinct `ρ` within a group.
#[derive(Clone, Debug)]
pub struct SpectralNode {
    pub group: usize,
    pub rho: f64,
    pub lambda: f64,
    /// `C_u`.
    pub coeff: CMat,
    /// `(n, k, s)` of every merged entry.
    pub members: Vec<(usize, usize, u8)>,
}

impl SpectralNode {
    pub fn is_active(&self) -> bool {
        linalg::max_abs(&self.coeff) > 0.0
    }
}

/// Relative distance below which two square roots become one unknown.
pub fn merge_tolerance(tol: &ToleranceConfig) -> f64 {
    (10.0 * tol.root).max(1e-10)
}

pub fn spectral_nodes(
    grouping: &Grouping,
    data: &SpectralData,
    model: &SpectralData,
    weights: &CollapsedWeights,
    model_weights: &CollapsedWeights,
    tol: &ToleranceConfig,
) -> Result<Vec<SpectralNode>> {
    let m = weights.dim();
    let merge = merge_tolerance(tol);
    let mut out = Vec::new();
    for g in &grouping.groups {
        for e in &g.entries {
            if e.s == 0 {
                let partner = g.entries.iter().any(|f| f.n == e.n && f.k == e.k && f.s == 1);
                if !partner {
                    return Err(Error::GroupingInconsistency { n: e.n, k: e.k });
                }
            }
        }
        let mut entries = g.entries.clone();
        entries.sort_by(|a, b| a.rho.total_cmp(&b.rho));
        let start = out.len();
        for e in entries {
            let contribution = if e.s == 0 {
                weights.get(e.n, e.k).clone()
            } else {
                -model_weights.get(e.n, e.k)
            };
            let lambda = if e.s == 0 {
                data.get(e.n, e.k).lambda
            } else {
                model.get(e.n, e.k).lambda
            };
            let joins = out.len() > start && {
                let last: &SpectralNode = out.last().unwrap();
                (e.rho - last.rho).abs() <= merge * (1.0 + last.rho)
            };
            if joins {
                let last = out.last_mut().unwrap();
                last.coeff += contribution;
                last.members.push((e.n, e.k, e.s));
            } else {
                out.push(SpectralNode {
                    group: g.index,
                    rho: e.rho,
                    lambda,
                    coeff: CMat::zeros(m, m) + contribution,
                    members: vec![(e.n, e.k, e.s)],
                });
            }
        }
        // exact cancellation of coinciding pairs
        for node in &mut out[start..] {
            let scale = node
                .members
                .iter()
                .map(|&(n, k, s)| {
                    let w = if s == 0 { weights.get(n, k) } else { model_weights.get(n, k) };
                    linalg::max_abs(w)
                })
                .fold(0.0, f64::max);
            if linalg::max_abs(&node.coeff) <= 1e-14 * scale {
                node.coeff = CMat::zeros(m, m);
            }
        }
    }
    Ok(out)
}

/// Cumulative trapezoid with the end correction `−h²/12 (g'(x) − g'(0))`.
pub(crate) struct Running {
    h: f64,
    acc: CMat,
    prev: Option<CMat>,
    dg0: Option<CMat>,
}

impl Running {
    pub(crate) fn new(h: f64, rows: usize, cols: usize) -> Self {
        Self {
            h,
            acc: CMat::zeros(rows, cols),
            prev: None,
            dg0: None,
        }
    }

    pub(crate) fn push(&mut self, g: CMat, dg: &CMat) -> CMat {
        match &self.prev {
            Some(prev) => self.acc += (prev + &g) * linalg::re(0.5 * self.h),
            None => self.dg0 = Some(dg.clone()),
        }
        self.prev = Some(g);
        &self.acc - (dg - self.dg0.as_ref().unwrap()) * linalg::re(self.h * self.h / 12.0)
    }
}

/// `D(x_i, λ_A, λ_B) = ∫₀^{x_i} S†(t, λ_A) S(t, λ_B) dt` at every node.
pub fn kernel_d(a: &SolutionTrace, b: &SolutionTrace) -> Result<Vec<CMat>> {
    if a.n_grid() != b.n_grid() || a.values[0].shape() != b.values[0].shape() {
        return Err(Error::DimensionMismatch("kernel traces on different grids".into()));
    }
    let m = a.values[0].ncols();
    let mut run = Running::new(a.step(), m, m);
    Ok((0..=a.n_grid())
        .map(|i| {
            let (s, ds) = (&a.values[i], &a.derivs[i]);
            let (t, dt) = (&b.values[i], &b.derivs[i]);
            let g = s.adjoint() * t;
            let dg = ds.adjoint() * t + s.adjoint() * dt;
            run.push(g, &dg)
        })
        .collect())
}

/// `[S_1 … S_N]` and its derivative at node `i`.
pub(crate) fn stacked(traces: &[&SolutionTrace], i: usize) -> (CMat, CMat) {
    let m = traces[0].values[0].nrows();
    let mut phi = CMat::zeros(m, m * traces.len());
    let mut dphi = CMat::zeros(m, m * traces.len());
    for (u, t) in traces.iter().enumerate() {
        phi.columns_mut(u * m, m).copy_from(&t.values[i]);
        dphi.columns_mut(u * m, m).copy_from(&t.derivs[i]);
    }
    (phi, dphi)
}

/// `blockdiag(C_u) · A`.
pub(crate) fn left_coeff(coeffs: &[&CMat], a: &CMat) -> CMat {
    let m = coeffs[0].nrows();
    let mut out = CMat::zeros(a.nrows(), a.ncols());
    for (u, c) in coeffs.iter().enumerate() {
        let rows = *c * a.rows(u * m, m);
        out.rows_mut(u * m, m).copy_from(&rows);
    }
    out
}

/// `D̃(x, λ_u, λ_v)` for all pairs at a set of nodes, as block matrices.
#[derive(Clone, Debug)]
pub struct KernelTable {
    pub m: usize,
    pub nodes: Vec<usize>,
    pub x: Vec<f64>,
    pub tables: Vec<CMat>,
}

impl KernelTable {
    pub fn build(traces: &[&SolutionTrace], nodes: &[usize]) -> Result<Self> {
        let m = traces[0].values[0].nrows();
        let n_grid = traces[0].n_grid();
        if traces.iter().any(|t| t.n_grid() != n_grid) {
            return Err(Error::DimensionMismatch("kernel traces on different grids".into()));
        }
        let last = nodes.iter().copied().max().unwrap_or(0);
        let size = m * traces.len();
        let mut run = Running::new(traces[0].step(), size, size);
        let mut tables = Vec::with_capacity(nodes.len());
        let mut at = vec![None; last + 1];
        for (i, slot) in at.iter_mut().enumerate() {
            let (phi, dphi) = stacked(traces, i);
            let g = phi.adjoint() * &phi;
            let dg = dphi.adjoint() * &phi + phi.adjoint() * &dphi;
            let d = run.push(g, &dg);
            if nodes.contains(&i) {
                *slot = Some(d);
            }
        }
        for &i in nodes {
            tables.push(at[i].clone().unwrap());
        }
        Ok(Self {
            m,
            nodes: nodes.to_vec(),
            x: nodes.iter().map(|&i| i as f64 * traces[0].step()).collect(),
            tables,
        })
    }

    pub fn block(&self, t: usize, u: usize, v: usize) -> CMat {
        self.tables[t].view((u * self.m, v * self.m), (self.m, self.m)).into_owned()
    }
}

/// The main equation at one node, over all unknowns.
#[derive(Clone, Debug)]
pub struct TruncatedMainEquation {
    pub x: f64,
    pub m: usize,
    /// Groups of the unknowns, in layout order.
    pub groups: Vec<usize>,
    pub rhos: Vec<f64>,
    /// `R̃(x)` as a block matrix; block `(u, v)` is `C_u D̃(x, λ_u, λ_v)`.
    pub blocks: CMat,
    /// `ψ̃(x) = [S̃_1 … S̃_N]`.
    pub rhs: CMat,
    pub n_groups: usize,
}

pub fn assemble(
    node: usize,
    nodes: &[SpectralNode],
    traces: &[&SolutionTrace],
    kernels: Option<&KernelTable>,
) -> Result<TruncatedMainEquation> {
    if nodes.len() != traces.len() {
        return Err(Error::DimensionMismatch("one trace per spectral node required".into()));
    }
    let owned;
    let (table, t) = match kernels.and_then(|k| k.nodes.iter().position(|&i| i == node).map(|t| (k, t))) {
        Some(found) => found,
        None => {
            owned = KernelTable::build(traces, &[node])?;
            (&owned, 0)
        }
    };
    let coeffs: Vec<&CMat> = nodes.iter().map(|n| &n.coeff).collect();
    let (rhs, _) = stacked(traces, node);
    Ok(TruncatedMainEquation {
        x: node as f64 * traces[0].step(),
        m: traces[0].values[0].nrows(),
        groups: nodes.iter().map(|n| n.group).collect(),
        rhos: nodes.iter().map(|n| n.rho).collect(),
        blocks: left_coeff(&coeffs, &table.tables[t]),
        rhs,
        n_groups: nodes.iter().map(|n| n.group).max().unwrap_or(0),
    })
}

/// Splits a stacked row `[Y_1 … Y_N]` into group functions.
pub fn to_group_functions(eq: &TruncatedMainEquation, stacked: &CMat) -> Vec<GroupFunction> {
    let mut out: Vec<GroupFunction> = (1..=eq.n_groups)
        .map(|g| GroupFunction {
            group: g,
            values: Vec::new(),
        })
        .collect();
    for (u, (&g, &rho)) in eq.groups.iter().zip(&eq.rhos).enumerate() {
        out[g - 1]
            .values
            .push((rho, stacked.columns(u * eq.m, eq.m).into_owned()));
    }
    out
}

#[derive(Clone, Debug)]
pub struct MainSolution {
    /// `ψ(x) = [S_1 … S_N]`.
    pub psi: CMat,
    pub functions: Vec<GroupFunction>,
    /// `‖ψ̃ − ψ(I + R̃)‖_B / ‖ψ̃‖_B`.
    pub residual: f64,
    pub condition: f64,
}

fn lu_condition(lu: &nalgebra::LU<linalg::C64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let u = lu.u();
    let d: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].norm()).collect();
    let max = d.iter().copied().fold(0.0, f64::max);
    let min = d.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

/// Solves `X (I + K) = B` for `X`.
fn right_solve(
    lu: &nalgebra::LU<linalg::C64, nalgebra::Dyn, nalgebra::Dyn>,
    b: &CMat,
) -> Option<CMat> {
    lu.solve(&b.transpose()).map(|x| x.transpose())
}

pub fn solve_main(eq: &TruncatedMainEquation, tol: &ToleranceConfig) -> Result<MainSolution> {
    let size = eq.blocks.nrows();
    let a = linalg::identity(size) + &eq.blocks;
    let lu = a.transpose().lu();
    let condition = lu_condition(&lu);
    let psi = right_solve(&lu, &eq.rhs).ok_or(Error::SolveFailure {
        x: eq.x,
        residual: f64::INFINITY,
        condition,
    })?;
    let defect = &eq.rhs - &psi * &a;
    let rhs_norm = sequence_norm(&to_group_functions(eq, &eq.rhs));
    let residual = sequence_norm(&to_group_functions(eq, &defect)) / rhs_norm.max(f64::MIN_POSITIVE);
    if !(residual <= tol.solve) {
        return Err(Error::SolveFailure {
            x: eq.x,
            residual,
            condition,
        });
    }
    Ok(MainSolution {
        functions: to_group_functions(eq, &psi),
        psi,
        residual,
        condition,
    })
}

/// Main-equation solution on the whole grid, restricted to the unknowns with
/// nonzero `C_u` (the only ones entering `ε₀`).
#[derive(Clone, Debug)]
pub struct GridSolution {
    pub m: usize,
    pub step: f64,
    /// Indices into the spectral node list.
    pub active: Vec<usize>,
    pub values: Vec<CMat>,
    pub derivs: Vec<CMat>,
    pub second: Vec<CMat>,
    /// Relative residual `‖ψ̃ − ψ(I + R̃)‖ / ‖ψ̃‖` per node (max-norm).
    pub residuals: Vec<f64>,
    pub condition: f64,
    /// `‖(I − R(x))(I + R̃(x)) − I‖_F` at the requested nodes.
    pub identity: Vec<(usize, f64)>,
}

impl GridSolution {
    pub fn n_grid(&self) -> usize {
        self.values.len() - 1
    }

    /// `S_u` for the `a`-th active unknown at node `i`.
    pub fn value(&self, a: usize, i: usize) -> CMat {
        self.values[i].columns(a * self.m, self.m).into_owned()
    }

    pub fn deriv(&self, a: usize, i: usize) -> CMat {
        self.derivs[i].columns(a * self.m, self.m).into_owned()
    }

    pub fn second_deriv(&self, a: usize, i: usize) -> CMat {
        self.second[i].columns(a * self.m, self.m).into_owned()
    }

    /// The trace of the `a`-th active unknown over the grid.
    pub fn trace(&self, a: usize, lambda: f64) -> SolutionTrace {
        SolutionTrace {
            lambda: linalg::re(lambda),
            values: (0..=self.n_grid()).map(|i| self.value(a, i)).collect(),
            derivs: (0..=self.n_grid()).map(|i| self.deriv(a, i)).collect(),
        }
    }
}

/// Marches over the grid solving `X(I + K) = Ψ̃`, together with
/// `X'(I + K) = Ψ̃' − X K'` and `X''(I + K) = Ψ̃'' − 2X'K' − XK''`, where
/// `K' = C S̃†S̃` and `Ψ̃'' = (Q̃ − λ)S̃`.
pub fn solve_on_grid(
    nodes: &[SpectralNode],
    traces: &[&SolutionTrace],
    model_potential: &PotentialGrid,
    identity_nodes: &[usize],
    tol: &ToleranceConfig,
) -> Result<GridSolution> {
    if nodes.len() != traces.len() {
        return Err(Error::DimensionMismatch("one trace per spectral node required".into()));
    }
    let active: Vec<usize> = (0..nodes.len()).filter(|&u| nodes[u].is_active()).collect();
    let m = model_potential.dim();
    let n_grid = model_potential.n_grid();
    let h = model_potential.step();
    if traces.iter().any(|t| t.n_grid() != n_grid) {
        return Err(Error::DimensionMismatch("traces and model potential on different grids".into()));
    }
    let size = m * active.len();
    let mut out = GridSolution {
        m,
        step: h,
        active: active.clone(),
        values: Vec::with_capacity(n_grid + 1),
        derivs: Vec::with_capacity(n_grid + 1),
        second: Vec::with_capacity(n_grid + 1),
        residuals: Vec::with_capacity(n_grid + 1),
        condition: 1.0,
        identity: Vec::new(),
    };
    if active.is_empty() {
        for _ in 0..=n_grid {
            out.values.push(CMat::zeros(m, 0));
            out.derivs.push(CMat::zeros(m, 0));
            out.second.push(CMat::zeros(m, 0));
            out.residuals.push(0.0);
        }
        out.identity = identity_nodes.iter().map(|&i| (i, 0.0)).collect();
        return Ok(out);
    }
    let tr: Vec<&SolutionTrace> = active.iter().map(|&u| traces[u]).collect();
    let coeffs: Vec<&CMat> = active.iter().map(|&u| &nodes[u].coeff).collect();
    let lambdas: Vec<f64> = active.iter().map(|&u| nodes[u].lambda).collect();
    let eye = linalg::identity(size);
    let mut model_kernel = Running::new(h, size, size);
    let mut solved_kernel = Running::new(h, size, size);
    let want_identity = !identity_nodes.is_empty();

    for i in 0..=n_grid {
        let x = i as f64 * h;
        let (phi, dphi) = stacked(&tr, i);
        let g = phi.adjoint() * &phi;
        let dg = dphi.adjoint() * &phi + phi.adjoint() * &dphi;
        let d = model_kernel.push(g.clone(), &dg);
        let k = left_coeff(&coeffs, &d);
        let k1 = left_coeff(&coeffs, &g);
        let k2 = left_coeff(&coeffs, &dg);
        let a = &eye + &k;
        let lu = a.transpose().lu();
        out.condition = out.condition.max(lu_condition(&lu));
        let fail = |residual| Error::SolveFailure {
            x,
            residual,
            condition: out.condition,
        };
        let xv = right_solve(&lu, &phi).ok_or_else(|| fail(f64::INFINITY))?;
        let xd = right_solve(&lu, &(&dphi - &xv * &k1)).ok_or_else(|| fail(f64::INFINITY))?;
        let q = model_potential.sample(i);
        let mut ddphi = CMat::zeros(m, size);
        for (u, &lam) in lambdas.iter().enumerate() {
            let s = phi.columns(u * m, m);
            let col = q * s - s * linalg::re(lam);
            ddphi.columns_mut(u * m, m).copy_from(&col);
        }
        let xdd = right_solve(&lu, &(ddphi - &xd * &k1 * linalg::re(2.0) - &xv * &k2))
            .ok_or_else(|| fail(f64::INFINITY))?;
        let scale = linalg::max_abs(&phi).max(f64::MIN_POSITIVE);
        let residual = if i == 0 { 0.0 } else { linalg::max_abs(&(&phi - &xv * &a)) / scale };
        if !(residual <= tol.solve) {
            return Err(fail(residual));
        }
        if want_identity {
            let gs = xv.adjoint() * &xv;
            let dgs = xd.adjoint() * &xv + xv.adjoint() * &xd;
            let ds = solved_kernel.push(gs, &dgs);
            if identity_nodes.contains(&i) {
                let r = left_coeff(&coeffs, &ds);
                let defect = (&eye - r) * &a - &eye;
                out.identity.push((i, linalg::frob(&defect)));
            }
        }
        out.values.push(xv);
        out.derivs.push(xd);
        out.second.push(xdd);
        out.residuals.push(residual);
    }
    Ok(out)
}

/// `ξ_k` per group and `Λ = (Σ (k ξ_k)²)^{1/2}`.
#[derive(Clone, Debug)]
pub struct XiDiagnostics {
    pub xi: Vec<f64>,
    pub lambda: f64,
}

/// `ξ_k = Σ |ρ_{lj0} − ρ_{lj1}| + k⁻³ Σ_i ‖α(G_ki) − α̃(G_ki)‖ + k⁻² ‖α(G_k) − α̃(G_k)‖`,
/// with the sub-collections `G_ki` given by the slot classes.
pub fn diagnostics_xi(
    grouping: &Grouping,
    weights: &CollapsedWeights,
    model_weights: &CollapsedWeights,
    classes: &[Vec<usize>],
) -> XiDiagnostics {
    let m = weights.dim();
    let mut xi = Vec::with_capacity(grouping.groups.len());
    for g in &grouping.groups {
        let k = g.index as f64;
        let mut gap = 0.0;
        let mut total = CMat::zeros(m, m);
        let mut per_class = vec![CMat::zeros(m, m); classes.len()];
        for e in g.entries.iter().filter(|e| e.s == 0) {
            let partner = g
                .entries
                .iter()
                .find(|f| f.n == e.n && f.k == e.k && f.s == 1)
                .expect("paired entries");
            gap += (e.rho - partner.rho).abs();
            let diff = weights.get(e.n, e.k) - model_weights.get(e.n, e.k);
            if let Some(c) = classes.iter().position(|c| c.contains(&e.k)) {
                per_class[c] += &diff;
            }
            total += diff;
        }
        let sub: f64 = per_class.iter().map(linalg::spectral_norm).sum();
        xi.push(gap + sub / k.powi(3) + linalg::spectral_norm(&total) / (k * k));
    }
    let lambda = xi
        .iter()
        .enumerate()
        .map(|(i, x)| ((i + 1) as f64 * x).powi(2))
        .sum::<f64>()
        .sqrt();
    XiDiagnostics { xi, lambda }
}
