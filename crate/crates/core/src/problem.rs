//! Domain types shared by every stage: the boundary value problem `L(Q, T, H)`
//! and its spectral data, with validation of the structural hypotheses.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Every tolerance used across the crate, in one place.
#[derive(Clone, Debug, PartialEq)]
pub struct ToleranceConfig {
    /// Hermiticity / idempotency of `T`, Hermiticity and `H = THT` for `H`.
    pub matrix: f64,
    /// Hermiticity of potential samples.
    pub potential: f64,
    /// Relative PSD slack for weight matrices.
    pub psd: f64,
    /// Root polishing target on `ρ = √λ`.
    pub root: f64,
    /// Relative singular-value threshold for the geometric multiplicity.
    pub rank: f64,
    /// Equal-eigenvalue grouping: `|λ − μ| ≤ mult · (1 + |λ|)`.
    pub mult: f64,
    /// Equality classes of the asymptotic constants `z_k`.
    pub z: f64,
    /// Relative residual allowed for the truncated main equation.
    pub solve: f64,
    /// Spectral fidelity of a reconstruction (absolute, on λ).
    pub spec: f64,
    /// Spectral fidelity of a reconstruction (relative, on α).
    pub alpha: f64,
    /// Largest admissible distance of the fitted projector from `{0, 1}` spectra.
    pub fit: f64,
    /// Margin added by [`shift_spectrum`] when negative eigenvalues are present.
    pub shift_margin: f64,
    /// Largest radius of the residue contour in λ units.
    pub contour_radius: f64,
    /// Trapezoid points on the residue contour.
    pub contour_points: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            matrix: 1e-12,
            potential: 1e-10,
            psd: 1e-10,
            root: 1e-10,
            rank: 1e-7,
            mult: 1e-6,
            z: 1e-3,
            solve: 1e-9,
            spec: 1e-3,
            alpha: 1e-2,
            fit: 0.2,
            shift_margin: 0.25,
            contour_radius: 0.1,
            contour_points: 64,
        }
    }
}

/// An orthogonal projector `T` together with its rank `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: CMat,
    rank: usize,
}

impl Projector {
    /// The rank is read off the trace; use [`validate_problem`] to check the
    /// projector identities.
    pub fn new(matrix: CMat) -> Self {
        let rank = matrix.trace().re.round().max(0.0) as usize;
        Self { matrix, rank }
    }

    /// `T_{jk} = 1/m`, the projector of the star-shaped graph with `m` edges.
    pub fn star(m: usize) -> Self {
        Self::new(CMat::from_element(m, m, linalg::re(1.0 / m as f64)))
    }

    /// Diagonal projector with ones where `mask` is true.
    pub fn diagonal(mask: &[bool]) -> Self {
        let d: Vec<f64> = mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Self::new(linalg::diag_real(&d))
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn complement(&self) -> CMat {
        linalg::identity(self.dim()) - &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Potential samples on the uniform grid `x_i = iπ/N`, `i = 0..=N`, linearly
/// interpolated in between.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialGrid {
    samples: Vec<CMat>,
}

impl PotentialGrid {
    pub fn new(samples: Vec<CMat>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidInput(
                "a potential grid needs at least two nodes".into(),
            ));
        }
        let m = samples[0].nrows();
        if samples.iter().any(|s| s.nrows() != m || s.ncols() != m) {
            return Err(Error::DimensionMismatch(format!(
                "potential samples must all be {m}×{m}"
            )));
        }
        Ok(Self { samples })
    }

    pub fn from_fn(n_grid: usize, f: impl Fn(f64) -> CMat) -> Result<Self> {
        let h = PI / n_grid as f64;
        Self::new((0..=n_grid).map(|i| f(i as f64 * h)).collect())
    }

    pub fn constant(value: CMat, n_grid: usize) -> Self {
        Self {
            samples: vec![value; n_grid + 1],
        }
    }

    pub fn zero(m: usize, n_grid: usize) -> Self {
        Self::constant(CMat::zeros(m, m), n_grid)
    }

    /// Diagonal potential `diag(q_1(x), …, q_m(x))` from real scalar functions.
    pub fn diagonal(n_grid: usize, fs: &[&dyn Fn(f64) -> f64]) -> Self {
        let h = PI / n_grid as f64;
        let samples = (0..=n_grid)
            .map(|i| {
                let x = i as f64 * h;
                linalg::diag_real(&fs.iter().map(|f| f(x)).collect::<Vec<_>>())
            })
            .collect();
        Self { samples }
    }

    pub fn dim(&self) -> usize {
        self.samples[0].nrows()
    }

    pub fn n_grid(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn step(&self) -> f64 {
        PI / self.n_grid() as f64
    }

    pub fn node_x(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }

    pub fn samples(&self) -> &[CMat] {
        &self.samples
    }

    pub fn sample(&self, i: usize) -> &CMat {
        &self.samples[i]
    }

    /// Linear interpolation between nodes; clamps outside `[0, π]`.
    pub fn at(&self, x: f64) -> CMat {
        let n = self.n_grid();
        let t = (x / self.step()).clamp(0.0, n as f64);
        let i = (t.floor() as usize).min(n - 1);
        let w = t - i as f64;
        &self.samples[i] * linalg::re(1.0 - w) + &self.samples[i + 1] * linalg::re(w)
    }

    /// The common value when every sample is identical.
    pub fn constant_value(&self) -> Option<&CMat> {
        let first = &self.samples[0];
        self.samples.iter().all(|s| s == first).then_some(first)
    }

    /// `∫_0^π Q(x) dx` by the trapezoid rule.
    pub fn integral(&self) -> CMat {
        let n = self.n_grid();
        let mut acc = (&self.samples[0] + &self.samples[n]) * linalg::re(0.5);
        for s in &self.samples[1..n] {
            acc += s;
        }
        acc * linalg::re(self.step())
    }

    /// Smallest eigenvalue of any sample; a lower bound for the potential on the grid.
    pub fn min_eigenvalue(&self) -> f64 {
        self.samples
            .iter()
            .map(linalg::min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(usize, &CMat) -> CMat) -> Self {
        Self {
            samples: self.samples.iter().enumerate().map(|(i, s)| f(i, s)).collect(),
        }
    }
}

/// The boundary coefficient `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCoefficient {
    matrix: CMat,
}

impl BoundaryCoefficient {
    pub fn new(matrix: CMat) -> Self {
        Self { matrix }
    }

    pub fn zero(m: usize) -> Self {
        Self::new(CMat::zeros(m, m))
    }

    /// `h · T`.
    pub fn scaled_projector(h: f64, projector: &Projector) -> Self {
        Self::new(projector.matrix() * linalg::re(h))
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }
}

/// The eigenvalue problem `L(Q, T, H)`.
///
/// `shift` records a spectral shift applied to the data the problem was
/// recovered from (the potential stored here is already un-shifted).
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub potential: PotentialGrid,
    pub projector: Projector,
    pub boundary: BoundaryCoefficient,
    pub shift: f64,
}

impl Problem {
    pub fn new(potential: PotentialGrid, projector: Projector, boundary: BoundaryCoefficient) -> Self {
        Self {
            potential,
            projector,
            boundary,
            shift: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.projector.dim()
    }

    /// Lower bound for the spectrum from the quadratic form
    /// `∫ |Y'|² + Y*QY − Y(π)*HY(π) ≥ (q_min − ‖H‖²) ‖Y‖²`.
    pub fn spectrum_lower_bound(&self) -> f64 {
        let hn = linalg::spectral_norm(self.boundary.matrix());
        self.potential.min_eigenvalue() - hn * hn
    }
}

/// A violated structural hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    ProjectorNotHermitian { defect: f64 },
    ProjectorNotIdempotent { defect: f64 },
    /// `1 ≤ p < m` fails.
    RankOutOfRange { p: usize, m: usize },
    ComplementRank { expected: usize, found: usize },
    BoundaryNotHermitian { defect: f64 },
    /// `H ≠ THT`.
    BoundaryNotCompatible { defect: f64 },
    PotentialNotHermitian { node: usize, defect: f64 },
    NonFinite { what: &'static str },
    WeightNotHermitian { n: usize, k: usize, defect: f64 },
    WeightNotPositive { n: usize, k: usize, min_eigenvalue: f64 },
    UnequalWeights { n: usize, k: usize },
    NotSorted { n: usize, k: usize },
    Incomplete { expected: usize, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ProjectorNotHermitian { defect } => write!(f, "T = T† violated ({defect:e})"),
            Violation::ProjectorNotIdempotent { defect } => write!(f, "T² = T violated ({defect:e})"),
            Violation::RankOutOfRange { p, m } => write!(f, "p < m required (p = {p}, m = {m})"),
            Violation::ComplementRank { expected, found } => {
                write!(f, "rank T⊥ = {found}, expected {expected}")
            }
            Violation::BoundaryNotHermitian { defect } => write!(f, "H = H† violated ({defect:e})"),
            Violation::BoundaryNotCompatible { defect } => write!(f, "H = THT violated ({defect:e})"),
            Violation::PotentialNotHermitian { node, defect } => {
                write!(f, "Q(x_{node}) not Hermitian ({defect:e})")
            }
            Violation::NonFinite { what } => write!(f, "non-finite entries in {what}"),
            Violation::WeightNotHermitian { n, k, defect } => {
                write!(f, "α_{n},{k} not Hermitian ({defect:e})")
            }
            Violation::WeightNotPositive { n, k, min_eigenvalue } => {
                write!(f, "α_{n},{k} not PSD (min eigenvalue {min_eigenvalue:e})")
            }
            Violation::UnequalWeights { n, k } => {
                write!(f, "λ_{n},{k} repeats an eigenvalue with a different weight")
            }
            Violation::NotSorted { n, k } => write!(f, "λ_{n},{k} breaks nondecreasing order"),
            Violation::Incomplete { expected, found } => {
                write!(f, "expected {expected} spectral data entries, found {found}")
            }
        }
    }
}

pub type ValidationReport = Vec<Violation>;

/// Checks the structural hypotheses on `(Q, T, H)`.
///
/// Dimension mismatches are structural errors; everything else is reported as
/// a [`Violation`]. The report is empty iff the problem is valid.
pub fn validate_problem(problem: &Problem, tol: &ToleranceConfig) -> Result<ValidationReport> {
    let t = problem.projector.matrix();
    let m = t.nrows();
    if t.ncols() != m {
        return Err(Error::DimensionMismatch(format!(
            "projector is {}×{}",
            t.nrows(),
            t.ncols()
        )));
    }
    let h = problem.boundary.matrix();
    if h.shape() != (m, m) {
        return Err(Error::DimensionMismatch(format!(
            "boundary coefficient is {}×{}, projector {m}×{m}",
            h.nrows(),
            h.ncols()
        )));
    }
    if problem.potential.dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "potential is {0}×{0}, projector {m}×{m}",
            problem.potential.dim()
        )));
    }

    let mut report = Vec::new();
    if t.iter().chain(h.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        report.push(Violation::NonFinite { what: "T or H" });
    }

    let d = linalg::hermitian_defect(t);
    if d > tol.matrix {
        report.push(Violation::ProjectorNotHermitian { defect: d });
    }
    let d = linalg::frob(&(t * t - t));
    if d > tol.matrix {
        report.push(Violation::ProjectorNotIdempotent { defect: d });
    }
    let p = numerical_rank(t);
    if p == 0 || p >= m {
        report.push(Violation::RankOutOfRange { p, m });
    }
    let tc = problem.projector.complement();
    let pc = numerical_rank(&tc);
    if pc + p != m {
        report.push(Violation::ComplementRank {
            expected: m - p.min(m),
            found: pc,
        });
    }

    let d = linalg::hermitian_defect(h);
    if d > tol.matrix {
        report.push(Violation::BoundaryNotHermitian { defect: d });
    }
    let d = linalg::frob(&(t * h * t - h));
    if d > tol.matrix {
        report.push(Violation::BoundaryNotCompatible { defect: d });
    }

    for (i, q) in problem.potential.samples().iter().enumerate() {
        if q.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            report.push(Violation::NonFinite { what: "Q" });
            break;
        }
        let d = linalg::hermitian_defect(q);
        if d > tol.potential {
            report.push(Violation::PotentialNotHermitian { node: i, defect: d });
            break;
        }
    }
    Ok(report)
}

fn numerical_rank(a: &CMat) -> usize {
    let s = linalg::singular_values(a);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > 1e-8 * top.max(1.0)).count()
}

/// One eigenvalue `λ_nk` with its weight matrix `α_nk`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDatum {
    pub n: usize,
    pub k: usize,
    pub lambda: f64,
    pub alpha: CMat,
}

/// `{λ_nk, α_nk}` for bands `n = 1..=N` and slots `k = 1..=m`, stored in
/// lexicographic `(n, k)` order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData {
    m: usize,
    data: Vec<SpectralDatum>,
}

impl SpectralData {
    /// Sorts the entries lexicographically and checks completeness.
    pub fn new(m: usize, mut data: Vec<SpectralDatum>) -> Result<Self> {
        if m == 0 || data.is_empty() {
            return Err(Error::InvalidInput("empty spectral data".into()));
        }
        data.sort_by_key(|d| (d.n, d.k));
        if data.len() % m != 0 {
            return Err(Error::InvalidInput(format!(
                "{} entries do not fill whole bands of {m} slots",
                data.len()
            )));
        }
        for (i, d) in data.iter().enumerate() {
            if d.n != i / m + 1 || d.k != i % m + 1 {
                return Err(Error::InvalidInput(format!(
                    "missing or duplicated entry near (n, k) = ({}, {})",
                    d.n, d.k
                )));
            }
            if d.alpha.shape() != (m, m) {
                return Err(Error::DimensionMismatch(format!(
                    "α_{},{} is {}×{}, expected {m}×{m}",
                    d.n,
                    d.k,
                    d.alpha.nrows(),
                    d.alpha.ncols()
                )));
            }
        }
        Ok(Self { m, data })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_bands(&self) -> usize {
        self.data.len() / self.m
    }

    pub fn entries(&self) -> &[SpectralDatum] {
        &self.data
    }

    pub fn get(&self, n: usize, k: usize) -> &SpectralDatum {
        &self.data[(n - 1) * self.m + (k - 1)]
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.data.iter().map(|d| d.lambda).collect()
    }

    /// Keeps bands `1..=n_bands`.
    pub fn truncated(&self, n_bands: usize) -> Self {
        let keep = n_bands.min(self.n_bands()) * self.m;
        Self {
            m: self.m,
            data: self.data[..keep].to_vec(),
        }
    }

    pub fn map_lambdas(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            m: self.m,
            data: self
                .data
                .iter()
                .map(|d| SpectralDatum {
                    lambda: f(d.lambda),
                    ..d.clone()
                })
                .collect(),
        }
    }

    /// Checks Hermitian PSD weights, sortedness and the equal-λ ⇒ equal-α rule.
    pub fn validate(&self, tol: &ToleranceConfig) -> ValidationReport {
        let mut report = Vec::new();
        for (i, d) in self.data.iter().enumerate() {
            let scale = linalg::frob(&d.alpha).max(1e-300);
            let hd = linalg::hermitian_defect(&d.alpha);
            if hd > 1e-8 * scale.max(1.0) {
                report.push(Violation::WeightNotHermitian {
                    n: d.n,
                    k: d.k,
                    defect: hd,
                });
            }
            let me = linalg::min_eigenvalue(&d.alpha);
            if me < -tol.psd * scale.max(1.0) {
                report.push(Violation::WeightNotPositive {
                    n: d.n,
                    k: d.k,
                    min_eigenvalue: me,
                });
            }
            if i > 0 {
                let prev = &self.data[i - 1];
                if d.lambda < prev.lambda - tol.mult * (1.0 + prev.lambda.abs()) {
                    report.push(Violation::NotSorted { n: d.n, k: d.k });
                }
                if (d.lambda - prev.lambda).abs() <= tol.mult * (1.0 + d.lambda.abs())
                    && linalg::frob(&(&d.alpha - &prev.alpha)) > 1e-8 * scale.max(1.0)
                {
                    report.push(Violation::UnequalWeights { n: d.n, k: d.k });
                }
            }
        }
        report
    }
}

/// Translates the spectrum so every eigenvalue is non-negative.
///
/// Returns the shifted data and the shift `c`; `λ' = λ + c`. Data that is
/// already non-negative is returned unchanged with `c = 0`; otherwise
/// `c = −min λ + margin`. Weights are unaffected. A potential recovered from
/// the shifted data must have `c·I` subtracted.
pub fn shift_spectrum(data: &SpectralData, margin: f64) -> (SpectralData, f64) {
    let min = data
        .entries()
        .iter()
        .map(|d| d.lambda)
        .fold(f64::INFINITY, f64::min);
    if min >= 0.0 {
        return (data.clone(), 0.0);
    }
    let shift = -min + margin;
    (data.map_lambdas(|l| l + shift), shift)
}
