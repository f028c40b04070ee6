//! Command implementations behind the `spectral-mappings` binary.
//!
//! Each command returns its text report together with the files it would
//! write; [`run`] prints the report and stores the files under `--output`.

pub mod io;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forward;
use crate::graph::{self, ScalarLocalData, StarGraphProblem};
use crate::linalg;
use crate::problem::{
    BoundaryCoefficient, PotentialGrid, Problem, Projector, SpectralData, ToleranceConfig,
};
use crate::reconstruct::{self, InverseConfig, ReconstructionResult};

#[derive(Debug, Parser)]
#[command(name = "spectral-mappings", version, about = "Forward and inverse spectral problems for the matrix Sturm-Liouville operator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues and weight matrices of a problem file.
    Forward { problem: PathBuf },
    /// Recover Q and H from a spectral data file.
    Inverse { data: PathBuf },
    /// Forward, inverse and forward again; without a file a seeded
    /// two-channel potential is used.
    Roundtrip { problem: Option<PathBuf> },
    /// Star model with the first eigenvalue moved to a²: closed form
    /// against the pipeline.
    ExampleSec6 {
        #[arg(long, default_value_t = 0.3)]
        a: f64,
    },
    /// Local inverse problems of a star graph; without a file, data of the
    /// star with q₁ = 0.3 sin x, q₂ = q₃ = 0 is generated.
    GraphLocal {
        data: Option<PathBuf>,
        /// Solve only this edge.
        #[arg(long)]
        edge: Option<usize>,
    },
}

#[derive(Clone, Debug, Args)]
pub struct RunArgs {
    /// Number of eigenvalue bands.
    #[arg(long, global = true, default_value_t = 15)]
    pub bands: usize,
    /// Grid intervals on [0, π].
    #[arg(long, global = true, default_value_t = 1000)]
    pub grid: usize,
    /// Eigenvalue agreement threshold in comparisons.
    #[arg(long = "tol-spec", global = true, default_value_t = 1e-3)]
    pub tol_spec: f64,
    /// Relative weight agreement threshold in comparisons.
    #[arg(long = "tol-alpha", global = true, default_value_t = 1e-2)]
    pub tol_alpha: f64,
    /// Directory for output files.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for synthetic problems.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

/// Validated run settings.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub bands: usize,
    pub grid: usize,
    pub tol_spec: f64,
    pub tol_alpha: f64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub tol: ToleranceConfig,
}

impl RunConfig {
    pub fn from_args(a: &RunArgs) -> Result<Self> {
        if a.bands == 0 || a.grid < 2 {
            return Err(Error::InvalidInput("--bands and --grid must be positive".into()));
        }
        if !(a.tol_spec > 0.0 && a.tol_alpha > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        Ok(Self {
            bands: a.bands,
            grid: a.grid,
            tol_spec: a.tol_spec,
            tol_alpha: a.tol_alpha,
            seed: a.seed,
            output: a.output.clone(),
            tol: ToleranceConfig::default(),
        })
    }

    pub fn inverse(&self) -> InverseConfig {
        InverseConfig {
            tol: self.tol.clone(),
            ..InverseConfig::with_grid(self.grid)
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            bands: 15,
            grid: 1000,
            tol_spec: 1e-3,
            tol_alpha: 1e-2,
            seed: 0,
            output: None,
            tol: ToleranceConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CommandOutput {
    pub report: String,
    /// `(file name, contents)`.
    pub files: Vec<(String, String)>,
}

pub fn run(cli: &Cli) -> Result<CommandOutput> {
    let config = RunConfig::from_args(&cli.run)?;
    let out = match &cli.command {
        Command::Forward { problem } => cmd_forward(&io::read_problem(problem)?, &config)?,
        Command::Inverse { data } => cmd_inverse(&io::read_spectral_data(data)?, &config)?,
        Command::Roundtrip { problem } => {
            let p = match problem {
                Some(path) => io::read_problem(path)?,
                None => seeded_problem(config.seed, config.grid),
            };
            cmd_roundtrip(&p, &config)?
        }
        Command::ExampleSec6 { a } => cmd_example_sec6(*a, &config)?,
        Command::GraphLocal { data, edge } => {
            let data = data.as_deref().map(io::read_spectral_data).transpose()?;
            cmd_graph_local(data.as_ref(), *edge, &config)?
        }
    };
    if let Some(dir) = &config.output {
        write_files(dir, &out.files)?;
    }
    Ok(out)
}

fn write_files(dir: &Path, files: &[(String, String)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, text) in files {
        fs::write(dir.join(name), text)?;
    }
    Ok(())
}

/// `Q = diag(Σ_j c_j sin(jx), 0)`, `T = diag(1, 0)`, `H = 0`, with
/// `c_j ∈ [−0.3, 0.3]` drawn from `seed`.
pub fn seeded_problem(seed: u64, n_grid: usize) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<f64> = (0..3).map(|_| rng.random_range(-0.3..=0.3)).collect();
    let q = move |x: f64| {
        c.iter()
            .enumerate()
            .map(|(j, cj)| cj * ((j + 1) as f64 * x).sin())
            .sum::<f64>()
    };
    Problem::new(
        PotentialGrid::diagonal(n_grid, &[&q, &|_| 0.0]),
        Projector::diagonal(&[true, false]),
        BoundaryCoefficient::zero(2),
    )
}

/// Rows `n | λ_n1 | … | λ_nm`.
pub fn eigenvalue_table(data: &SpectralData, n_max: usize) -> String {
    let m = data.m();
    let mut out = String::from("n");
    for k in 1..=m {
        let _ = write!(out, " | lambda_n{k}");
    }
    out.push('\n');
    for n in 1..=n_max.min(data.n_bands()) {
        let _ = write!(out, "{n}");
        for k in 1..=m {
            let _ = write!(out, " | {:.6}", data.get(n, k).lambda);
        }
        out.push('\n');
    }
    out
}

pub fn cmd_forward(problem: &Problem, config: &RunConfig) -> Result<CommandOutput> {
    let data = forward::Operator::new(problem, &config.tol).spectral_data(config.bands)?;
    Ok(CommandOutput {
        report: eigenvalue_table(&data, config.bands),
        files: vec![("spectral_data.json".into(), io::spectral_data_to_string(&data))],
    })
}

/// `h` with `H = h·T`, when `H` has that form.
pub fn scalar_boundary(problem: &Problem) -> Option<f64> {
    let t = problem.projector.matrix();
    let h_mat = problem.boundary.matrix();
    let h = (h_mat * t).trace().re / t.trace().re;
    let dev = linalg::max_abs(&(h_mat - t * linalg::re(h)));
    (dev <= 1e-8 * (1.0 + h.abs())).then_some(h)
}

/// `q(x)` with `Q(x) = q(x)·T` at every node, when `Q` has that form.
pub fn scalar_potential(problem: &Problem) -> Option<Vec<f64>> {
    let t = problem.projector.matrix();
    let rank = t.trace().re;
    let mut q = Vec::with_capacity(problem.potential.samples().len());
    for s in problem.potential.samples() {
        let v = (s * t).trace().re / rank;
        if linalg::max_abs(&(s - t * linalg::re(v))) > 1e-8 * (1.0 + v.abs()) {
            return None;
        }
        q.push(v);
    }
    Some(q)
}

fn scalar_csv(problem: &Problem, q: &[f64]) -> String {
    let mut out = String::from("x,q\n");
    for (i, v) in q.iter().enumerate() {
        let _ = writeln!(out, "{:.9},{:.9}", problem.potential.node_x(i), v);
    }
    out
}

fn inverse_report(r: &ReconstructionResult) -> String {
    let d = &r.diagnostics;
    let mut out = String::new();
    let _ = writeln!(out, "shift            {:.6}", r.shift);
    let _ = writeln!(out, "p                {}", r.summary.p);
    let _ = writeln!(out, "z                {:?}", r.summary.z.iter().map(|z| format!("{z:.6}")).collect::<Vec<_>>());
    let _ = writeln!(out, "n0               {}", d.n0);
    let _ = writeln!(out, "groups           {}", d.n_groups);
    let _ = writeln!(out, "active nodes     {}", d.active_nodes);
    let _ = writeln!(out, "max residual     {:.3e}", d.max_residual);
    let _ = writeln!(out, "condition        {:.3e}", d.condition);
    if let Some(worst) = d.identity.iter().map(|p| p.1).reduce(f64::max) {
        let _ = writeln!(out, "identity defect  {worst:.3e}");
    }
    let _ = writeln!(out, "Lambda (xi)      {:.6}", d.xi.lambda);
    let _ = writeln!(out, "tail applied     {}", d.tail_applied);
    if let Some(delta) = d.truncation_delta {
        let _ = writeln!(out, "truncation delta {delta:.3e}");
    }
    if d.unstable_classes {
        let _ = writeln!(out, "warning: asymptotic classes change when the z tolerance doubles");
    }
    match scalar_boundary(&r.problem) {
        Some(h) => {
            let _ = writeln!(out, "H = h T, h = {h:.6}");
        }
        None => {
            let _ = writeln!(out, "H = {:?}", io::matrix_to_rows(r.problem.boundary.matrix()));
        }
    }
    if scalar_potential(&r.problem).is_some() {
        let _ = writeln!(out, "Q(x) = q(x) T");
    }
    out
}

pub fn cmd_inverse(data: &SpectralData, config: &RunConfig) -> Result<CommandOutput> {
    let r = reconstruct::solve_inverse(data, &config.inverse())?;
    let report = inverse_report(&r);
    let mut files = vec![
        ("problem.json".into(), io::problem_to_string(&r.problem)),
        ("report.txt".into(), report.clone()),
        ("q.csv".into(), io::potential_csv(&r.problem.potential)),
    ];
    if let Some(q) = scalar_potential(&r.problem) {
        files.push(("q_scalar.csv".into(), scalar_csv(&r.problem, &q)));
    }
    Ok(CommandOutput { report, files })
}

/// Relative L₂ distance of two potentials on a common grid (trapezoid, Frobenius).
pub fn relative_l2(a: &PotentialGrid, b: &PotentialGrid) -> f64 {
    let n = a.n_grid();
    let w = |i: usize| if i == 0 || i == n { 0.5 } else { 1.0 };
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..=n {
        num += w(i) * linalg::frob(&(a.sample(i) - b.sample(i))).powi(2);
        den += w(i) * linalg::frob(b.sample(i)).powi(2);
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Largest `|Δλ|` and largest `‖Δα‖ / ‖α‖` over matching `(n, k)` slots.
pub fn compare_spectra(a: &SpectralData, b: &SpectralData) -> (f64, f64) {
    let mut dl: f64 = 0.0;
    let mut da: f64 = 0.0;
    for (x, y) in a.entries().iter().zip(b.entries()) {
        dl = dl.max((x.lambda - y.lambda).abs());
        let scale = linalg::frob(&x.alpha).max(1e-300);
        da = da.max(linalg::frob(&(&x.alpha - &y.alpha)) / scale);
    }
    (dl, da)
}

pub fn cmd_roundtrip(problem: &Problem, config: &RunConfig) -> Result<CommandOutput> {
    let data = forward::Operator::new(problem, &config.tol).spectral_data(config.bands)?;
    let r = reconstruct::solve_inverse(&data, &config.inverse())?;
    let again = forward::Operator::new(&r.problem, &config.tol).spectral_data(config.bands)?;
    let (dl, da) = compare_spectra(&data, &again);
    let resampled = if problem.potential.n_grid() == r.problem.potential.n_grid() {
        problem.potential.clone()
    } else {
        PotentialGrid::from_fn(r.problem.potential.n_grid(), |x| problem.potential.at(x))?
    };
    let q_err = relative_l2(&r.problem.potential, &resampled);
    let h_err = linalg::max_abs(&(r.problem.boundary.matrix() - problem.boundary.matrix()));
    let mut report = String::new();
    let _ = writeln!(report, "eigenvalues  max |dlambda| = {dl:.3e}  (tol {:.1e}) {}", config.tol_spec, pass(dl <= config.tol_spec));
    let _ = writeln!(report, "weights      max rel dalpha = {da:.3e}  (tol {:.1e}) {}", config.tol_alpha, pass(da <= config.tol_alpha));
    let _ = writeln!(report, "potential    relative L2 = {q_err:.3e}  (bound 5e-2) {}", pass(q_err <= 0.05));
    let _ = writeln!(report, "boundary     max |dH| = {h_err:.3e}  (bound 1e-2) {}", pass(h_err <= 1e-2));
    report.push_str("\ninput\n");
    report.push_str(&eigenvalue_table(&data, config.bands.min(7)));
    report.push_str("recovered\n");
    report.push_str(&eigenvalue_table(&again, config.bands.min(7)));
    Ok(CommandOutput {
        files: vec![
            ("report.txt".into(), report.clone()),
            ("problem.json".into(), io::problem_to_string(&r.problem)),
            ("q.csv".into(), io::potential_csv(&r.problem.potential)),
        ],
        report,
    })
}

/// Sup-norm distances between the pipeline and the closed form over 100
/// nodes: `(S₁₁₀, S₁₁₁, ε₀)`.
pub fn sec6_deltas(a: f64, r: &ReconstructionResult) -> Result<(f64, f64, f64)> {
    let s0 = r
        .solved_trace(a)
        .ok_or_else(|| Error::InvalidInput("no unknown near ρ = a".into()))?;
    let s1 = r
        .solved_trace(0.5)
        .ok_or_else(|| Error::InvalidInput("no unknown near ρ = 1/2".into()))?;
    let n = r.solution.n_grid();
    let mut d = (0.0f64, 0.0f64, 0.0f64);
    for j in 0..100 {
        let i = j * n / 99;
        let x = i as f64 * PI / n as f64;
        let v = reconstruct::sec6_closed_form(a, x)?;
        d.0 = d.0.max(linalg::max_abs(&(&s0.values[i] - &v.s110)));
        d.1 = d.1.max(linalg::max_abs(&(&s1.values[i] - &v.s111)));
        d.2 = d.2.max(linalg::max_abs(&(&r.epsilon.eps0[i] - &v.eps0)));
    }
    Ok(d)
}

pub fn cmd_example_sec6(a: f64, config: &RunConfig) -> Result<CommandOutput> {
    let data = reconstruct::sec6_data(a, config.bands)?;
    let r = reconstruct::solve_inverse(&data, &config.inverse())?;
    let (d0, d1, de) = sec6_deltas(a, &r)?;
    let mut report = format!("a = {a}\n");
    let _ = writeln!(report, "sup |S_110 - closed form| = {d0:.3e}");
    let _ = writeln!(report, "sup |S_111 - closed form| = {d1:.3e}");
    let _ = writeln!(report, "sup |eps0 - closed form|  = {de:.3e}");
    match scalar_boundary(&r.problem) {
        Some(h) => {
            let _ = writeln!(report, "H = h T, h = {h:.6}");
        }
        None => {
            let _ = writeln!(report, "H is not a multiple of T");
        }
    }
    let rows = 7.min(config.bands);
    let check = forward::Operator::new(&r.problem, &config.tol).spectral_data(rows)?;
    report.push_str("\nforward eigenvalues of the recovered problem\nn | lambda_n1\n");
    for n in 1..=rows {
        let _ = writeln!(report, "{n} | {:.6}", check.get(n, 1).lambda);
    }
    let mut files = vec![
        ("report.txt".into(), report.clone()),
        ("problem.json".into(), io::problem_to_string(&r.problem)),
    ];
    match scalar_potential(&r.problem) {
        Some(q) => files.push(("q.csv".into(), scalar_csv(&r.problem, &q))),
        None => files.push(("q.csv".into(), io::potential_csv(&r.problem.potential))),
    }
    Ok(CommandOutput { report, files })
}

/// The three-edge star with `q₁ = 0.3 sin x`, `q₂ = q₃ = 0`.
pub fn demo_star(n_grid: usize) -> StarGraphProblem {
    StarGraphProblem::from_fns(n_grid, &[&|x: f64| 0.3 * x.sin(), &|_| 0.0, &|_| 0.0])
        .expect("finite samples")
}

pub fn cmd_graph_local(data: Option<&SpectralData>, edge: Option<usize>, config: &RunConfig) -> Result<CommandOutput> {
    let truth = data.is_none().then(|| demo_star(config.grid));
    let generated;
    let data = match data {
        Some(d) => d,
        None => {
            let p = graph::graph_to_matrix(truth.as_ref().unwrap());
            generated = forward::Operator::new(&p, &config.tol).spectral_data(config.bands)?;
            &generated
        }
    };
    let inv = config.inverse();
    let results = match edge {
        Some(i) => vec![graph::solve_local_inverse(&ScalarLocalData::from_spectral(data, i, &config.tol)?, &inv)?],
        None => graph::solve_all_local(data, &inv)?,
    };
    let mut report = String::new();
    let mut csv = String::from("x");
    for r in &results {
        let _ = write!(csv, ",q{}", r.i);
        let _ = write!(report, "edge {}  model q~ = {:.6}  max residual {:.3e}", r.i, r.model.potentials[r.i - 1] - r.shift, r.max_residual);
        if let Some(g) = &truth {
            let exact = g.edge(r.i);
            let grid = |v: &[f64]| PotentialGrid::new(v.iter().map(|&x| linalg::diag_real(&[x])).collect());
            let err = relative_l2(&grid(&r.q)?, &grid(exact)?);
            let _ = write!(report, "  relative L2 vs generating potential {err:.3e}");
        }
        report.push('\n');
    }
    csv.push('\n');
    let n = results.first().map_or(0, |r| r.q.len());
    for i in 0..n {
        let _ = write!(csv, "{:.9}", i as f64 * results[0].step());
        for r in &results {
            let _ = write!(csv, ",{:.9}", r.q[i]);
        }
        csv.push('\n');
    }
    let mut files = vec![("report.txt".into(), report.clone()), ("q_local.csv".into(), csv)];
    if truth.is_some() {
        files.push(("spectral_data.json".into(), io::spectral_data_to_string(data)));
    }
    Ok(CommandOutput { report, files })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "spectral-mappings",
            "roundtrip",
            "--bands",
            "9",
            "--grid",
            "400",
            "--tol-spec",
            "1e-4",
            "--tol-alpha",
            "0.1",
            "--seed",
            "7",
            "--output",
            "out",
        ])
        .unwrap();
        let c = RunConfig::from_args(&cli.run).unwrap();
        assert_eq!((c.bands, c.grid, c.seed), (9, 400, 7));
        assert_eq!((c.tol_spec, c.tol_alpha), (1e-4, 0.1));
        assert!(matches!(cli.command, Command::Roundtrip { problem: None }));
    }

    #[test]
    fn zero_tolerance_rejected() {
        let cli = Cli::try_parse_from(["spectral-mappings", "example-sec6", "--tol-spec", "0"]).unwrap();
        assert!(RunConfig::from_args(&cli.run).is_err());
    }

    #[test]
    fn seeded_problem_is_deterministic() {
        assert_eq!(seeded_problem(3, 50), seeded_problem(3, 50));
        assert_ne!(seeded_problem(3, 50), seeded_problem(4, 50));
    }

    #[test]
    fn scalar_structure_detection() {
        let mut p = reconstruct::sec6_model(20);
        assert_eq!(scalar_boundary(&p), Some(0.0));
        assert!(scalar_potential(&p).is_some());
        p.boundary = BoundaryCoefficient::new(linalg::identity(3));
        assert_eq!(scalar_boundary(&p), None);
        p.potential = PotentialGrid::constant(linalg::diag_real(&[1.0, 0.0, 0.0]), 20);
        assert!(scalar_potential(&p).is_none());
    }
}
