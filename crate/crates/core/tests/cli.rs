use std::fs;
use std::process::Command;

use clap::Parser;
use proptest::prelude::*;
use spectral_mappings::cli::{self, io, Cli};
use spectral_mappings::linalg::{self, c, re};
use spectral_mappings::reconstruct::{sec6_data, sec6_model};
use spectral_mappings::{BoundaryCoefficient, CMat, PotentialGrid, Problem, Projector, SpectralData, SpectralDatum};

fn parse(args: &[&str]) -> Cli {
    Cli::try_parse_from(std::iter::once("spectral-mappings").chain(args.iter().copied())).unwrap()
}

#[test]
fn forward_on_star_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("star.json");
    fs::write(&path, io::problem_to_string(&sec6_model(1000))).unwrap();
    let out = cli::run(&parse(&["forward", path.to_str().unwrap(), "--bands", "4", "--grid", "1000"])).unwrap();
    assert!(out.report.contains("1 | 0.250000"), "{}", out.report);
    assert!(out.report.contains("4 | 12.250000"), "{}", out.report);
}

#[test]
fn inverse_writes_recovered_problem() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.json");
    fs::write(&data, io::spectral_data_to_string(&sec6_data(0.3, 8).unwrap())).unwrap();
    let out_dir = dir.path().join("out");
    let out = cli::run(&parse(&[
        "inverse",
        data.to_str().unwrap(),
        "--grid",
        "300",
        "--output",
        out_dir.to_str().unwrap(),
    ]))
    .unwrap();
    assert!(out.report.contains("h = -0.361838"), "{}", out.report);
    for name in ["problem.json", "report.txt", "q.csv", "q_scalar.csv"] {
        assert!(out_dir.join(name).is_file(), "{name}");
    }
    let recovered = io::read_problem(&out_dir.join("problem.json")).unwrap();
    assert_eq!(recovered.potential.n_grid(), 300);
    let q = fs::read_to_string(out_dir.join("q_scalar.csv")).unwrap();
    assert_eq!(q.lines().count(), 302);
}

#[test]
fn half_is_rejected_by_the_worked_example() {
    assert!(cli::run(&parse(&["example-sec6", "--a", "0.5"])).is_err());
}

#[test]
fn bad_flags_are_rejected() {
    assert!(cli::run(&parse(&["example-sec6", "--bands", "0"])).is_err());
    assert!(Cli::try_parse_from(["spectral-mappings", "inverse"]).is_err());
    assert!(Cli::try_parse_from(["spectral-mappings", "forward", "x.json", "--grid", "many"]).is_err());
}

#[test]
fn malformed_file_names_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\n  \"m\": 2,\n  \"entries\": [\n").unwrap();
    let err = cli::run(&parse(&["inverse", path.to_str().unwrap()])).unwrap_err();
    assert!(err.to_string().contains("line"), "{err}");
}

#[test]
fn binary_reports_errors_with_exit_status() {
    let status = Command::new(env!("CARGO_BIN_EXE_spectral-mappings"))
        .args(["example-sec6", "--a", "0.5"])
        .output()
        .unwrap();
    assert!(!status.status.success());
    assert!(String::from_utf8_lossy(&status.stderr).contains("error:"));
}

fn hermitian(v: &[f64]) -> CMat {
    let mut a = CMat::zeros(2, 2);
    a[(0, 0)] = re(v[0]);
    a[(1, 1)] = re(v[1]);
    a[(0, 1)] = c(v[2], v[3]);
    a[(1, 0)] = c(v[2], -v[3]);
    a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn problem_files_round_trip(
        v in prop::collection::vec(-1e3f64..1e3, 4),
        h in -10.0f64..10.0,
        n_grid in 2usize..20,
    ) {
        let t = Projector::diagonal(&[true, false]);
        let p = Problem::new(
            PotentialGrid::from_fn(n_grid, |x| hermitian(&v) * re(x.cos())).unwrap(),
            t.clone(),
            BoundaryCoefficient::scaled_projector(h, &t),
        );
        let back = io::parse_problem(&io::problem_to_string(&p)).unwrap();
        for (a, b) in p.potential.samples().iter().zip(back.potential.samples()) {
            prop_assert_eq!(a, b);
        }
        prop_assert_eq!(back.boundary.matrix(), p.boundary.matrix());
        prop_assert_eq!(back.projector.matrix(), p.projector.matrix());
    }

    #[test]
    fn spectral_files_round_trip(lams in prop::collection::vec(0.0f64..1e4, 4), w in 1e-6f64..1e6) {
        let mut sorted = lams.clone();
        sorted.sort_by(f64::total_cmp);
        let d: Vec<SpectralDatum> = sorted
            .iter()
            .enumerate()
            .map(|(j, &l)| SpectralDatum { n: j / 2 + 1, k: j % 2 + 1, lambda: l, alpha: linalg::identity(2) * re(w) })
            .collect();
        let data = SpectralData::new(2, d).unwrap();
        let back = io::parse_spectral_data(&io::spectral_data_to_string(&data)).unwrap();
        prop_assert_eq!(back.entries().len(), data.entries().len());
        for (a, b) in data.entries().iter().zip(back.entries()) {
            prop_assert_eq!((a.n, a.k, a.lambda), (b.n, b.k, b.lambda));
            prop_assert_eq!(&a.alpha, &b.alpha);
        }
    }
}
