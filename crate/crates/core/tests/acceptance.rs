// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use spectral_mappings::cli::{relative_l2, sec6_deltas};
use spectral_mappings::forward::{self, Operator};
use spectral_mappings::graph::{self, ScalarLocalData, StarGraphProblem};
use spectral_mappings::linalg::{self, re};
use spectral_mappings::maineq;
use spectral_mappings::reconstruct::{self, InverseConfig, ReconstructionResult};
use spectral_mappings::{
    BoundaryCoefficient, CMat, PotentialGrid, Problem, Projector, SpectralData, ToleranceConfig,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Shared {
    star_data: SpectralData,
    perturbed: SpectralData,
    perturbed_result: ReconstructionResult,
    round_trip_data: SpectralData,
    round_trip: ReconstructionResult,
    graph_data: SpectralData,
}

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn star_spectrum(elapsed: &mut Duration) -> (SpectralData, Outcome) {
    let t0 = Instant::now();
    let data = Operator::new(&reconstruct::sec6_model(1000), &tol())
        .spectral_data(10)
        .expect("star spectrum");
    *elapsed = t0.elapsed();
    let t = Projector::star(3);
    let (mut drho, mut dalpha) = (0.0f64, 0.0f64);
    for n in 1..=10 {
        let h = n as f64 - 0.5;
        drho = drho.max((data.get(n, 1).lambda.sqrt() - h).abs());
        for k in 2..=3 {
            drho = drho.max((data.get(n, k).lambda.sqrt() - n as f64).abs());
        }
        let expected = t.matrix() * re(2.0 * h * h / PI);
        dalpha = dalpha.max(linalg::frob(&(&data.get(n, 1).alpha - &expected)) / linalg::frob(&expected));
    }
    let secs = elapsed.as_secs_f64();
    let pass = drho <= 1e-6 && dalpha <= 1e-4 && secs <= 30.0;
    (
        data,
        outcome(pass, format!("max |Δρ| = {drho:.2e}, max rel Δα = {dalpha:.2e}, {secs:.1} s")),
    )
}

fn boundary_scalar(p: &Problem) -> (f64, f64) {
    let t = p.projector.matrix();
    let h_mat = p.boundary.matrix();
    let h = (h_mat * t).trace().re / t.trace().re;
    (h, linalg::max_abs(&(h_mat - t * re(h))))
}

fn criterion_2(result: &ReconstructionResult, secs: f64) -> Outcome {
    let (h, dev) = boundary_scalar(&result.problem);
    let pass = (h + 0.361838).abs() <= 5e-3 && dev <= 1e-10 && secs <= 120.0;
    outcome(pass, format!("h = {h:.6}, |H − hT| = {dev:.1e}, {secs:.1} s"))
}

fn criterion_3(result: &ReconstructionResult) -> Outcome {
    // the published row for n = 7 reads 40.250000; (7 − 1/2)² = 42.25
    let table = [0.09, 2.25, 6.25, 12.25, 20.25, 30.25, 40.25];
    let expected = [0.09, 2.25, 6.25, 12.25, 20.25, 30.25, 42.25];
    let check = Operator::new(&result.problem, &tol())
        .spectral_data(7)
        .expect("forward of recovered problem");
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for n in 1..=7 {
        let l = check.get(n, 1).lambda;
        worst = worst.max((l - expected[n - 1]).abs());
        rows.push(format!("{l:.6}"));
    }
    outcome(
        worst <= 1e-3,
        format!(
            "λ_n1 = [{}], max dev {worst:.1e} (published row 7: {:.6}, (n − 1/2)² = {:.6})",
            rows.join(", "),
            table[6],
            expected[6]
        ),
    )
}

fn criterion_4(shared: &Shared) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for a in [0.1, 0.3, 0.7] {
        let d = if a == 0.3 {
            sec6_deltas(a, &shared.perturbed_result)
        } else {
            let data = reconstruct::sec6_data(a, 15).expect("data");
            let r = reconstruct::solve_inverse(&data, &InverseConfig::with_grid(1000)).expect("inverse");
            sec6_deltas(a, &r)
        }
        .expect("closed form comparison");
        let m = d.0.max(d.1).max(d.2);
        worst = worst.max(m);
        parts.push(format!("a = {a}: {m:.1e}"));
    }
    outcome(worst <= 1e-6, format!("sup-norm deltas {}", parts.join(", ")))
}

fn two_channel(n_grid: usize) -> Problem {
    Problem::new(
        PotentialGrid::diagonal(n_grid, &[&|x: f64| 0.5 * x.sin(), &|_| 0.0]),
        Projector::diagonal(&[true, false]),
        BoundaryCoefficient::zero(2),
    )
}

fn criterion_5(problem: &Problem, result: &ReconstructionResult, secs: f64) -> Outcome {
    let err = relative_l2(&result.problem.potential, &problem.potential);
    let dh = linalg::max_abs(&(result.problem.boundary.matrix() - problem.boundary.matrix()));
    outcome(
        err <= 0.05 && dh <= 1e-2 && secs <= 180.0,
        format!("relative L2 = {err:.4}, max |ΔH| = {dh:.2e}, {secs:.1} s"),
    )
}

fn criterion_6(result: &ReconstructionResult) -> Outcome {
    let id = &result.diagnostics.identity;
    let worst = id.iter().map(|p| p.1).fold(0.0, f64::max);
    outcome(
        id.len() == 10 && worst <= 1e-7,
        format!("{} nodes, max ‖(I − R)(I + R̃) − I‖ = {worst:.1e}", id.len()),
    )
}

fn psd_defect(data: &SpectralData) -> f64 {
    data.entries()
        .iter()
        .map(|d| {
            let scale = linalg::frob(&d.alpha).max(1e-300);
            (linalg::hermitian_defect(&d.alpha) / scale).max(-linalg::min_eigenvalue(&d.alpha) / scale)
        })
        .fold(0.0, f64::max)
}

fn kernel_symmetry(potential: &PotentialGrid, lambdas: &[f64]) -> f64 {
    let traces: Vec<_> = lambdas
        .iter()
        .map(|&l| forward::sine_trace(&forward::Rk4::new(potential), re(l)).expect("trace"))
        .collect();
    let mut worst: f64 = 0.0;
    for a in &traces {
        for b in &traces {
            let ab = maineq::kernel_d(a, b).expect("kernel");
            let ba = maineq::kernel_d(b, a).expect("kernel");
            for (x, y) in ab.iter().zip(&ba) {
                worst = worst.max(linalg::max_abs(&(x.adjoint() - y)));
            }
        }
    }
    worst
}

fn coupled(n_grid: usize) -> Problem {
    let t = Projector::star(3);
    let q = PotentialGrid::from_fn(n_grid, |x| {
        CMat::from_fn(3, 3, |i, j| match (i, j) {
            (0, 0) => re(0.5 * x.cos()),
            (1, 2) => linalg::c(0.2, 0.1 * x),
            (2, 1) => linalg::c(0.2, -0.1 * x),
            _ => re(0.0),
        })
    })
    .expect("grid");
    Problem::new(q, t.clone(), BoundaryCoefficient::scaled_projector(-0.3, &t))
}

fn criterion_7(shared: &Shared) -> Outcome {
    let coupled = coupled(400);
    let coupled_data = Operator::new(&coupled, &tol()).spectral_data(4).expect("coupled spectrum");
    let psd = [
        &shared.star_data,
        &shared.perturbed,
        &shared.round_trip_data,
        &shared.graph_data,
        &coupled_data,
    ]
    .iter()
    .map(|d| psd_defect(d))
    .fold(0.0, f64::max);

    let lambdas = [0.3, 2.0, 7.5];
    let kernel = kernel_symmetry(&coupled.potential, &lambdas)
        .max(kernel_symmetry(&shared.round_trip.model.potential, &lambdas));

    let mut wronskian: f64 = 0.0;
    for p in [&coupled, &shared.round_trip.problem, &shared.perturbed_result.problem] {
        let rk = forward::Rk4::new(&p.potential);
        for &l in &lambdas {
            let tr = forward::sine_trace(&rk, re(l)).expect("trace");
            for i in 0..=tr.n_grid() {
                wronskian = wronskian.max(tr.self_wronskian(i));
            }
        }
    }

    let eps0 = [&shared.perturbed_result, &shared.round_trip]
        .iter()
        .map(|r| linalg::max_abs(&r.epsilon.eps0[0]))
        .fold(0.0, f64::max);

    let mut h_defect: f64 = 0.0;
    for r in [&shared.perturbed_result, &shared.round_trip] {
        let h = r.problem.boundary.matrix();
        let t = r.problem.projector.matrix();
        h_defect = h_defect
            .max(linalg::max_abs(&(h - h.adjoint())))
            .max(linalg::max_abs(&(t * h * t - h)) / (1.0 + linalg::max_abs(h)));
    }
    let pass = psd <= 1e-8 && kernel <= 1e-8 && wronskian <= 1e-8 && eps0 == 0.0 && h_defect <= 1e-14;
    outcome(
        pass,
        format!(
            "PSD/Hermitian {psd:.1e}, kernel symmetry {kernel:.1e}, self-Wronskian {wronskian:.1e}, |ε₀(0)| = {eps0:.1e}, H defect {h_defect:.1e}"
        ),
    )
}

fn criterion_8(data: &SpectralData, star: &StarGraphProblem) -> Outcome {
    let local = ScalarLocalData::from_spectral(data, 1, &tol()).expect("diagonal data");
    let r = graph::solve_local_inverse(&local, &InverseConfig::with_grid(1000)).expect("local inverse");
    let grid = |v: &[f64]| PotentialGrid::new(v.iter().map(|&x| linalg::diag_real(&[x])).collect()).unwrap();
    let err = relative_l2(&grid(&r.q), &grid(star.edge(1)));

    let coarse_star = StarGraphProblem::from_fns(300, &[&|x: f64| 0.3 * x.sin(), &|_| 0.0, &|_| 0.0]).unwrap();
    let coarse = Operator::new(&graph::graph_to_matrix(&coarse_star), &tol())
        .spectral_data(10)
        .expect("coarse spectrum");
    let config = InverseConfig::with_grid(300);
    let scalar = graph::solve_local_inverse(&ScalarLocalData::from_spectral(&coarse, 1, &tol()).unwrap(), &config)
        .expect("scalar path");
    let matrix = graph::solve_local_matrix_path(&coarse, 1, &config).expect("matrix path");
    let diff = scalar
        .q
        .iter()
        .zip(&matrix.q)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    outcome(
        err <= 0.05 && diff <= tol().solve,
        format!("relative L2 of q₁ = {err:.4}, scalar vs matrix path {diff:.1e}"),
    )
}

fn main() -> ExitCode {
    let mut lines: Vec<(usize, Outcome)> = Vec::new();
    let report = |lines: &mut Vec<(usize, Outcome)>, i: usize, o: Outcome| {
        println!("criterion {i}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        lines.push((i, o));
    };

    let mut c1_time = Duration::ZERO;
    let (star_data, c1) = star_spectrum(&mut c1_time);
    report(&mut lines, 1, c1);

    let perturbed = reconstruct::sec6_data(0.3, 15).expect("perturbed data");
    let config = InverseConfig {
        identity_nodes: (0..10).map(|j| 50 + 100 * j).collect(),
        ..InverseConfig::with_grid(1000)
    };
    let t0 = Instant::now();
    let perturbed_result = reconstruct::solve_inverse(&perturbed, &config).expect("perturbed inverse");
    report(&mut lines, 2, criterion_2(&perturbed_result, t0.elapsed().as_secs_f64()));
    report(&mut lines, 3, criterion_3(&perturbed_result));

    let problem = two_channel(1000);
    let t0 = Instant::now();
    let round_trip_data = Operator::new(&problem, &tol()).spectral_data(15).expect("round-trip data");
    let round_trip = reconstruct::solve_inverse(&round_trip_data, &InverseConfig::with_grid(1000)).expect("round-trip inverse");
    let c5 = criterion_5(&problem, &round_trip, t0.elapsed().as_secs_f64());

    let star = StarGraphProblem::from_fns(1000, &[&|x: f64| 0.3 * x.sin(), &|_| 0.0, &|_| 0.0]).unwrap();
    let graph_data = Operator::new(&graph::graph_to_matrix(&star), &tol())
        .spectral_data(15)
        .expect("graph data");

    let shared = Shared {
        star_data,
        perturbed,
        perturbed_result,
        round_trip_data,
        round_trip,
        graph_data,
    };
    report(&mut lines, 4, criterion_4(&shared));
    report(&mut lines, 5, c5);
    report(&mut lines, 6, criterion_6(&shared.perturbed_result));
    report(&mut lines, 7, criterion_7(&shared));
    report(&mut lines, 8, criterion_8(&shared.graph_data, &star));

    let failed: Vec<usize> = lines.iter().filter(|(_, o)| !o.pass).map(|(i, _)| *i).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria PASS", lines.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAIL in criteria {failed:?}");
        ExitCode::FAILURE
    }
}
