//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(m: usize) -> CMat {
    CMat::identity(m, m)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

/// Builds a complex matrix from real rows.
pub fn from_real_rows(rows: &[Vec<f64>]) -> CMat {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(m, n, |i, j| re(rows[i][j]))
}

pub fn diag_real(d: &[f64]) -> CMat {
    let m = d.len();
    CMat::from_fn(m, m, |i, j| if i == j { re(d[i]) } else { C64::default() })
}

/// Frobenius norm.
pub fn frob(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `‖A − A†‖_F`.
pub fn hermitian_defect(a: &CMat) -> f64 {
    if a.nrows() != a.ncols() {
        return f64::INFINITY;
    }
    let mut s = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            s += (a[(i, j)] - a[(j, i)].conj()).norm_sqr();
        }
    }
    s.sqrt()
}

/// `(A + A†) / 2`, exactly Hermitian in floating point.
pub fn hermitian_part(a: &CMat) -> CMat {
    let n = a.nrows();
    CMat::from_fn(n, n, |i, j| {
        if i == j {
            re(a[(i, i)].re)
        } else {
            (a[(i, j)] + a[(j, i)].conj()) * 0.5
        }
    })
}

/// Singular values in descending order.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Operator norm induced by the Euclidean vector norm.
pub fn spectral_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    singular_values(a)[0]
}

/// Eigen-decomposition of a Hermitian matrix (the Hermitian part is used),
/// eigenvalues ascending, eigenvectors as columns.
pub fn eigh(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    let eig = hermitian_part(a).symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, col| eig.eigenvectors[(r, idx[col])]);
    (values, vectors)
}

/// Orthonormal basis (as columns) of the range of an orthogonal projector.
pub fn range_basis(projector: &CMat) -> CMat {
    let (vals, vecs) = eigh(projector);
    let cols: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 0.5).collect();
    CMat::from_fn(projector.nrows(), cols.len(), |r, col| vecs[(r, cols[col])])
}

/// Eigenvalues of `P† A P` where `P` has orthonormal columns, ascending.
pub fn restricted_eigenvalues(a: &CMat, basis: &CMat) -> Vec<f64> {
    if basis.ncols() == 0 {
        return Vec::new();
    }
    let r = basis.adjoint() * a * basis;
    eigh(&r).0
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
pub fn hermitian_function(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(a);
    let d = diag_real(&vals.iter().map(|&v| f(v)).collect::<Vec<_>>());
    &vecs * d * vecs.adjoint()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &CMat) -> f64 {
    eigh(a).0.first().copied().unwrap_or(0.0)
}

/// `sin(ωx)/ω` for complex `ω`, continuous through `ω = 0`.
pub fn sinc_x(omega: C64, x: f64) -> C64 {
    let t = omega * x;
    if t.norm() < 1e-3 {
        let t2 = t * t;
        re(x) * (re(1.0) - t2 / 6.0 + t2 * t2 / 120.0 - t2 * t2 * t2 / 5040.0)
    } else {
        t.sin() / omega
    }
}

/// Principal square root with non-negative imaginary part.
pub fn sqrt_upper(z: C64) -> C64 {
    let s = z.sqrt();
    if s.im < 0.0 {
        -s
    } else {
        s
    }
}

/// `x ↦ x` copied into a 1×1 matrix.
pub fn scalar(z: C64) -> CMat {
    CMat::from_element(1, 1, z)
}

/// Least-squares fit of `v(n) ≈ a + b/n` with weights `w`; returns `(a, b, rms residual)`.
pub fn fit_inverse_n(ns: &[f64], values: &[f64], weights: &[f64]) -> (f64, f64, f64) {
    let (mut s0, mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&n, &v), &w) in ns.iter().zip(values).zip(weights) {
        let u = 1.0 / n;
        s0 += w;
        s1 += w * u;
        s2 += w * u * u;
        t0 += w * v;
        t1 += w * v * u;
    }
    let det = s0 * s2 - s1 * s1;
    let (a, b) = if det.abs() < 1e-300 {
        (t0 / s0, 0.0)
    } else {
        ((t0 * s2 - t1 * s1) / det, (s0 * t1 - s1 * t0) / det)
    };
    let mut r = 0.0;
    for ((&n, &v), &w) in ns.iter().zip(values).zip(weights) {
        let e = v - a - b / n;
        r += w * e * e;
    }
    (a, b, (r / s0).sqrt())
}

/// Entrywise version of [`fit_inverse_n`] for matrix sequences; returns the
/// limit matrix and the largest entrywise rms residual.
pub fn fit_inverse_n_matrix(ns: &[f64], mats: &[CMat], weights: &[f64]) -> (CMat, f64) {
    let (r, cl) = mats[0].shape();
    let mut out = CMat::zeros(r, cl);
    let mut worst: f64 = 0.0;
    for i in 0..r {
        for j in 0..cl {
            let vr: Vec<f64> = mats.iter().map(|m| m[(i, j)].re).collect();
            let vi: Vec<f64> = mats.iter().map(|m| m[(i, j)].im).collect();
            let (ar, _, rr) = fit_inverse_n(ns, &vr, weights);
            let (ai, _, ri) = fit_inverse_n(ns, &vi, weights);
            out[(i, j)] = c(ar, ai);
            worst = worst.max(rr).max(ri);
        }
    }
    (out, worst)
}

/// Least-squares coefficients `c_j` of `M_i ≈ Σ_j design[i][j]·c_j`, entrywise.
pub fn fit_basis_matrix(design: &[Vec<f64>], mats: &[CMat]) -> Vec<CMat> {
    let rows = design.len();
    let cols = design[0].len();
    let a = nalgebra::DMatrix::from_fn(rows, cols, |i, j| design[i][j]);
    let svd = a.svd(true, true);
    let (r, cl) = mats[0].shape();
    let mut out = vec![CMat::zeros(r, cl); cols];
    for i in 0..r {
        for j in 0..cl {
            let b = nalgebra::DVector::from_fn(rows, |k, _| mats[k][(i, j)].re);
            let bi = nalgebra::DVector::from_fn(rows, |k, _| mats[k][(i, j)].im);
            let xr = svd.solve(&b, 1e-12).expect("svd with vectors");
            let xi = svd.solve(&bi, 1e-12).expect("svd with vectors");
            for (q, o) in out.iter_mut().enumerate() {
                o[(i, j)] = c(xr[q], xi[q]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_fit_recovers_exact_coefficients() {
        let ns = [5.0, 6.0, 7.0, 8.0, 9.0];
        let design: Vec<Vec<f64>> = ns.iter().map(|n| vec![1.0 / (n * n), 1.0 / (n * n * n)]).collect();
        let mats: Vec<CMat> = ns
            .iter()
            .map(|n| CMat::from_element(1, 1, c(0.3 / (n * n) - 2.0 / (n * n * n), 1.0 / (n * n))))
            .collect();
        let k = fit_basis_matrix(&design, &mats);
        assert!((k[0][(0, 0)] - c(0.3, 1.0)).norm() < 1e-10);
        assert!((k[1][(0, 0)] - c(-2.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn eigh_sorted_and_reconstructs() {
        let a = from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let (vals, vecs) = eigh(&a);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let back = &vecs * diag_real(&vals) * vecs.adjoint();
        assert!(frob(&(back - a)) < 1e-13);
    }

    #[test]
    fn hermitian_part_is_exact() {
        let a = CMat::from_fn(3, 3, |i, j| c(i as f64 * 0.1 + 0.3, j as f64 - 0.7 * i as f64));
        let h = hermitian_part(&a);
        assert_eq!(hermitian_defect(&h), 0.0);
    }

    #[test]
    fn sinc_continuous_at_zero() {
        let x = 2.0;
        let small = sinc_x(c(1e-5, 0.0), x);
        assert!((small - c(x, 0.0)).norm() < 1e-9);
        let big = sinc_x(c(0.7, 0.0), x);
        assert!((big.re - (0.7f64 * x).sin() / 0.7).abs() < 1e-15);
    }

    #[test]
    fn inverse_n_fit_recovers_exact_model() {
        let ns: Vec<f64> = (5..=12).map(|n| n as f64).collect();
        let vals: Vec<f64> = ns.iter().map(|n| 0.25 - 1.5 / n).collect();
        let w = vec![1.0; ns.len()];
        let (a, b, r) = fit_inverse_n(&ns, &vals, &w);
        assert!((a - 0.25).abs() < 1e-12 && (b + 1.5).abs() < 1e-12 && r < 1e-12);
    }
}
