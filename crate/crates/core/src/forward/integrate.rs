//! Fundamental systems of `-Y'' + Q Y = λ Y` on `[0, π]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, re, CMat, C64};
use crate::problem::PotentialGrid;

/// Values `Y(x_i)` and derivatives `Y'(x_i)` on every grid node for one λ.
#[derive(Clone, Debug)]
pub struct SolutionTrace {
    pub lambda: C64,
    pub values: Vec<CMat>,
    pub derivs: Vec<CMat>,
}

impl SolutionTrace {
    pub fn n_grid(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        PI / self.n_grid() as f64
    }

    pub fn terminal(&self) -> (&CMat, &CMat) {
        let n = self.n_grid();
        (&self.values[n], &self.derivs[n])
    }

    /// `‖S†S' − S'†S‖_F` at node `i`; vanishes for real λ.
    pub fn self_wronskian(&self, i: usize) -> f64 {
        let (s, d) = (&self.values[i], &self.derivs[i]);
        linalg::frob(&(s.adjoint() * d - d.adjoint() * s))
    }
}

/// A way of producing solutions of the initial value problem
/// `Y(0) = y0`, `Y'(0) = y1` for a fixed potential.
pub trait Fundamental: Send + Sync {
    fn dim(&self) -> usize;

    fn n_grid(&self) -> usize;

    /// `(Y(π), Y'(π))`.
    fn terminal(&self, lambda: C64, y0: &CMat, y1: &CMat) -> Result<(CMat, CMat)>;

    fn trace(&self, lambda: C64, y0: &CMat, y1: &CMat) -> Result<SolutionTrace>;
}

/// Classical fourth-order Runge–Kutta on the first-order system for `(Y, Y')`
/// with the grid step `h = π/N`.
///
/// Half-step values of `Q` come from four-point cubic interpolation of the
/// nodes so the scheme keeps its order for smooth potentials.
pub struct Rk4 {
    m: usize,
    n: usize,
    nodes: Vec<C64>,
    mids: Vec<C64>,
}

impl Rk4 {
    pub fn new(potential: &PotentialGrid) -> Self {
        let m = potential.dim();
        let n = potential.n_grid();
        let s = potential.samples();
        let mut nodes = Vec::with_capacity((n + 1) * m * m);
        for q in s {
            nodes.extend_from_slice(q.as_slice());
        }
        let mut mids = Vec::with_capacity(n * m * m);
        for i in 0..n {
            let mid = if n < 3 {
                (&s[i] + &s[i + 1]) * re(0.5)
            } else if i == 0 {
                cubic_mid(&s[0], &s[1], &s[2], &s[3], true)
            } else if i == n - 1 {
                cubic_mid(&s[n], &s[n - 1], &s[n - 2], &s[n - 3], true)
            } else {
                cubic_mid(&s[i - 1], &s[i], &s[i + 1], &s[i + 2], false)
            };
            mids.extend_from_slice(mid.as_slice());
        }
        Self { m, n, nodes, mids }
    }

    fn run(
        &self,
        lambda: C64,
        y0: &CMat,
        y1: &CMat,
        mut visit: impl FnMut(usize, &[C64], &[C64]),
    ) -> Result<(Vec<C64>, Vec<C64>)> {
        let m = self.m;
        let k = y0.ncols();
        let len = m * k;
        let h = PI / self.n as f64;
        let mut y = y0.as_slice().to_vec();
        let mut p = y1.as_slice().to_vec();
        let mut k1y = vec![C64::default(); len];
        let mut k1p = k1y.clone();
        let mut k2y = k1y.clone();
        let mut k2p = k1y.clone();
        let mut k3y = k1y.clone();
        let mut k3p = k1y.clone();
        let mut k4p = k1y.clone();
        let mut tmp = k1y.clone();
        visit(0, &y, &p);
        let mm = m * m;
        for i in 0..self.n {
            let q0 = &self.nodes[i * mm..(i + 1) * mm];
            let qm = &self.mids[i * mm..(i + 1) * mm];
            let q1 = &self.nodes[(i + 1) * mm..(i + 2) * mm];

            // k1 = (P, (Q − λ) Y)
            k1y.copy_from_slice(&p);
            apply(q0, lambda, &y, &mut k1p, m, k);

            for j in 0..len {
                k2y[j] = p[j] + k1p[j] * (0.5 * h);
                tmp[j] = y[j] + k1y[j] * (0.5 * h);
            }
            apply(qm, lambda, &tmp, &mut k2p, m, k);

            for j in 0..len {
                k3y[j] = p[j] + k2p[j] * (0.5 * h);
                tmp[j] = y[j] + k2y[j] * (0.5 * h);
            }
            apply(qm, lambda, &tmp, &mut k3p, m, k);

            for j in 0..len {
                // k4y = p + h k3p, folded into the update below
                tmp[j] = y[j] + k3y[j] * h;
            }
            apply(q1, lambda, &tmp, &mut k4p, m, k);

            for j in 0..len {
                let k4y = p[j] + k3p[j] * h;
                y[j] += (k1y[j] + (k2y[j] + k3y[j]) * 2.0 + k4y) * (h / 6.0);
                p[j] += (k1p[j] + (k2p[j] + k3p[j]) * 2.0 + k4p[j]) * (h / 6.0);
            }
            if (i + 1) % 64 == 0 || i + 1 == self.n {
                if y.iter().chain(&p).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::IntegrationOverflow { lambda });
                }
            }
            visit(i + 1, &y, &p);
        }
        Ok((y, p))
    }
}

/// Cubic interpolation at the midpoint of the middle interval of four
/// nodes, or of the first interval when `edge` is set.
fn cubic_mid(a: &CMat, b: &CMat, c: &CMat, d: &CMat, edge: bool) -> CMat {
    if edge {
        (a * re(5.0) + b * re(15.0) - c * re(5.0) + d) * re(1.0 / 16.0)
    } else {
        ((b + c) * re(9.0) - a - d) * re(1.0 / 16.0)
    }
}

/// `out = (Q − λ) y` with column-major `m×m` `Q` and `m×k` `y`.
#[inline]
fn apply(q: &[C64], lambda: C64, y: &[C64], out: &mut [C64], m: usize, k: usize) {
    for c in 0..k {
        let yc = &y[c * m..(c + 1) * m];
        let oc = &mut out[c * m..(c + 1) * m];
        for (r, o) in oc.iter_mut().enumerate() {
            *o = -lambda * yc[r];
        }
        for (j, &yj) in yc.iter().enumerate() {
            let col = &q[j * m..(j + 1) * m];
            for r in 0..m {
                oc[r] += col[r] * yj;
            }
        }
    }
}

fn check_init(m: usize, y0: &CMat, y1: &CMat) -> Result<()> {
    if y0.nrows() != m || y1.shape() != y0.shape() {
        return Err(Error::DimensionMismatch(format!(
            "initial data {}×{} / {}×{} for an {m}×{m} system",
            y0.nrows(),
            y0.ncols(),
            y1.nrows(),
            y1.ncols()
        )));
    }
    Ok(())
}

impl Fundamental for Rk4 {
    fn dim(&self) -> usize {
        self.m
    }

    fn n_grid(&self) -> usize {
        self.n
    }

    fn terminal(&self, lambda: C64, y0: &CMat, y1: &CMat) -> Result<(CMat, CMat)> {
        check_init(self.m, y0, y1)?;
        let k = y0.ncols();
        let (y, p) = self.run(lambda, y0, y1, |_, _, _| {})?;
        Ok((
            CMat::from_column_slice(self.m, k, &y),
            CMat::from_column_slice(self.m, k, &p),
        ))
    }

    fn trace(&self, lambda: C64, y0: &CMat, y1: &CMat) -> Result<SolutionTrace> {
        check_init(self.m, y0, y1)?;
        let (m, k) = (self.m, y0.ncols());
        let mut values = Vec::with_capacity(self.n + 1);
        let mut derivs = Vec::with_capacity(self.n + 1);
        self.run(lambda, y0, y1, |_, y, p| {
            values.push(CMat::from_column_slice(m, k, y));
            derivs.push(CMat::from_column_slice(m, k, p));
        })?;
        Ok(SolutionTrace {
            lambda,
            values,
            derivs,
        })
    }
}

/// Closed-form fundamental system for a constant Hermitian potential
/// `Q = U diag(d) U†`:
///
/// ```text
/// S(x) = U diag(sin(ω_j x)/ω_j) U†,   C(x) = U diag(cos(ω_j x)) U†,   ω_j = √(λ − d_j).
/// ```
#[derive(Clone, Debug)]
pub struct ConstantPotential {
    u: CMat,
    d: Vec<f64>,
    n: usize,
}

/// `S, S', C, C'` of a constant potential at one point.
pub struct ConstantBlocks {
    pub s: CMat,
    pub ds: CMat,
    pub c: CMat,
    pub dc: CMat,
}

impl ConstantPotential {
    pub fn new(q: &CMat, n_grid: usize) -> Self {
        let (d, u) = linalg::eigh(q);
        Self { u, d, n: n_grid }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.d
    }

    fn omegas(&self, lambda: C64) -> Vec<C64> {
        self.d.iter().map(|&d| linalg::sqrt_upper(lambda - d)).collect()
    }

    fn conj(&self, diag: &[C64]) -> CMat {
        let m = self.d.len();
        let mut scaled = self.u.clone();
        for j in 0..m {
            for r in 0..m {
                scaled[(r, j)] *= diag[j];
            }
        }
        scaled * self.u.adjoint()
    }

    /// `S(x, λ)` and `S'(x, λ)` only.
    pub fn sine(&self, lambda: C64, x: f64) -> (CMat, CMat) {
        let w = self.omegas(lambda);
        let s: Vec<C64> = w.iter().map(|&w| linalg::sinc_x(w, x)).collect();
        let ds: Vec<C64> = w.iter().map(|&w| (w * x).cos()).collect();
        (self.conj(&s), self.conj(&ds))
    }

    pub fn blocks(&self, lambda: C64, x: f64) -> ConstantBlocks {
        let w = self.omegas(lambda);
        let sn: Vec<C64> = w.iter().map(|&w| linalg::sinc_x(w, x)).collect();
        let cs: Vec<C64> = w.iter().map(|&w| (w * x).cos()).collect();
        let dc: Vec<C64> = w.iter().zip(&sn).map(|(&w, &s)| -(w * w) * s).collect();
        ConstantBlocks {
            s: self.conj(&sn),
            ds: self.conj(&cs),
            c: self.conj(&cs),
            dc: self.conj(&dc),
        }
    }

    fn at(&self, lambda: C64, x: f64, y0: &CMat, y1: &CMat) -> (CMat, CMat) {
        let b = self.blocks(lambda, x);
        (&b.c * y0 + &b.s * y1, &b.dc * y0 + &b.ds * y1)
    }
}

impl Fundamental for ConstantPotential {
    fn dim(&self) -> usize {
        self.d.len()
    }

    fn n_grid(&self) -> usize {
        self.n
    }

    fn terminal(&self, lambda: C64, y0: &CMat, y1: &CMat) -> Result<(CMat, CMat)> {
        check_init(self.dim(), y0, y1)?;
        Ok(self.at(lambda, PI, y0, y1))
    }

    fn trace(&self, lambda: C64, y0: &CMat, y1: &CMat) -> Result<SolutionTrace> {
        check_init(self.dim(), y0, y1)?;
        let h = PI / self.n as f64;
        let (values, derivs) = (0..=self.n).map(|i| self.at(lambda, i as f64 * h, y0, y1)).unzip();
        Ok(SolutionTrace {
            lambda,
            values,
            derivs,
        })
    }
}

/// Integrates the equation of `potential` from `init = (Y(0), Y'(0))` with RK4.
pub fn integrate(potential: &PotentialGrid, lambda: C64, init: (&CMat, &CMat)) -> Result<SolutionTrace> {
    Rk4::new(potential).trace(lambda, init.0, init.1)
}

/// The sine-type solution `S` with `S(0) = 0`, `S'(0) = I`.
pub fn sine_trace(f: &dyn Fundamental, lambda: C64) -> Result<SolutionTrace> {
    let m = f.dim();
    f.trace(lambda, &CMat::zeros(m, m), &linalg::identity(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn free_sine_solution() {
        let grid = PotentialGrid::zero(2, 1000);
        let rk = Rk4::new(&grid);
        for rho in [0.5, 3.0, 10.0] {
            let tr = sine_trace(&rk, re(rho * rho)).unwrap();
            let worst = (0..=1000)
                .map(|i| {
                    let x = grid.node_x(i);
                    (tr.values[i][(0, 0)].re - (rho * x).sin() / rho).abs()
                })
                .fold(0.0, f64::max);
            assert!(worst < 1e-10 * rho.powi(4).max(1.0), "rho {rho}: {worst}");
            assert_eq!(tr.values[0], CMat::zeros(2, 2));
            assert_eq!(tr.derivs[0], linalg::identity(2));
        }
    }

    #[test]
    fn constant_shift_matches_closed_form() {
        let cst = 1.7;
        let grid = PotentialGrid::constant(linalg::identity(2) * re(cst), 1000);
        let lambda = 5.0;
        let tr = sine_trace(&Rk4::new(&grid), re(lambda)).unwrap();
        let w: f64 = (lambda - cst).sqrt();
        let (s, _) = tr.terminal();
        assert!((s[(1, 1)].re - (w * PI).sin() / w).abs() < 1e-10);
        assert!(s[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn closed_form_agrees_with_rk4_for_hermitian_constant() {
        let q = CMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => re(0.8),
            (1, 1) => re(-0.3),
            (0, 1) => c(0.2, 0.4),
            _ => c(0.2, -0.4),
        });
        let grid = PotentialGrid::constant(q.clone(), 1000);
        let exact = ConstantPotential::new(&q, 1000);
        for lambda in [c(0.1, 0.0), c(4.0, 0.0), c(2.0, 1.5)] {
            let a = sine_trace(&Rk4::new(&grid), lambda).unwrap();
            let b = sine_trace(&exact, lambda).unwrap();
            for i in [0, 317, 1000] {
                assert!(linalg::frob(&(&a.values[i] - &b.values[i])) < 1e-9);
                assert!(linalg::frob(&(&a.derivs[i] - &b.derivs[i])) < 1e-9);
            }
        }
    }

    #[test]
    fn overflow_is_reported() {
        let grid = PotentialGrid::zero(1, 100);
        let r = sine_trace(&Rk4::new(&grid), re(-1e6));
        assert!(matches!(r, Err(Error::IntegrationOverflow { .. })));
    }

    #[test]
    fn self_wronskian_vanishes_for_real_lambda() {
        let grid = PotentialGrid::from_fn(500, |x| {
            CMat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) => re(x.sin()),
                (1, 1) => re(x * x / 4.0),
                (0, 1) => c(0.3 * x, 0.1),
                _ => c(0.3 * x, -0.1),
            })
        })
        .unwrap();
        let tr = sine_trace(&Rk4::new(&grid), re(7.3)).unwrap();
        assert!((0..=500).all(|i| tr.self_wronskian(i) < 1e-8));
    }
}
