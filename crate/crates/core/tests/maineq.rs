use std::f64::consts::PI;

use proptest::prelude::*;
use spectral_mappings::forward::{sine_trace, ConstantPotential, Fundamental, SolutionTrace};
use spectral_mappings::linalg::{self, re};
use spectral_mappings::maineq::{self, build_groups, spectral_nodes};
use spectral_mappings::model::collapse_weights;
use spectral_mappings::reconstruct::sec6_data;
use spectral_mappings::{CMat, SpectralData, SpectralDatum, ToleranceConfig};

mod common;
use common::{perturbed_star, star_model_data};

fn free_trace(lambda: f64, m: usize, n_grid: usize) -> SolutionTrace {
    let f = ConstantPotential::new(&CMat::zeros(m, m), n_grid);
    sine_trace(&f as &dyn Fundamental, re(lambda)).unwrap()
}

/// `∫₀ˣ sin(αt) sin(βt) / (αβ) dt`.
fn sine_kernel(alpha: f64, beta: f64, x: f64) -> f64 {
    if (alpha - beta).abs() < 1e-14 {
        (x / 2.0 - (2.0 * alpha * x).sin() / (4.0 * alpha)) / (alpha * alpha)
    } else {
        (((alpha - beta) * x).sin() / (2.0 * (alpha - beta)) - ((alpha + beta) * x).sin() / (2.0 * (alpha + beta)))
            / (alpha * beta)
    }
}

#[test]
fn kernel_matches_sine_integrals() {
    let n_grid = 1000;
    for (l, mu) in [(0.3f64, 0.3f64), (0.09, 2.25), (4.0, 30.25)] {
        let d = maineq::kernel_d(&free_trace(l, 2, n_grid), &free_trace(mu, 2, n_grid)).unwrap();
        for i in (0..=n_grid).step_by(50) {
            let x = i as f64 * PI / n_grid as f64;
            let exact = sine_kernel(l.sqrt(), mu.sqrt(), x);
            assert!((d[i][(0, 0)].re - exact).abs() < 1e-9, "λ = {l}, μ = {mu}, x = {x}");
            assert!(d[i][(0, 1)].norm() < 1e-15);
        }
    }
}

#[test]
fn single_node_solve_matches_closed_form() {
    let tol = ToleranceConfig::default();
    let a = 0.3;
    let n_grid = 600;
    let data = sec6_data(a, 8).unwrap();
    let model = star_model_data(8);
    let grouping = build_groups(&data, &model, 1).unwrap();
    let w = collapse_weights(&data, 1, &tol);
    let wm = collapse_weights(&model, 1, &tol);
    let nodes = spectral_nodes(&grouping, &data, &model, &w, &wm, &tol).unwrap();
    let traces: Vec<SolutionTrace> = nodes.iter().map(|n| free_trace(n.lambda, 3, n_grid)).collect();
    let refs: Vec<&SolutionTrace> = traces.iter().collect();
    let ua = nodes.iter().position(|n| (n.rho - a).abs() < 1e-12).unwrap();
    let uh = nodes.iter().position(|n| (n.rho - 0.5).abs() < 1e-12).unwrap();
    for i in [60, 300, 550] {
        let eq = maineq::assemble(i, &nodes, &refs, None).unwrap();
        let sol = maineq::solve_main(&eq, &tol).unwrap();
        let (s0, s1, _) = perturbed_star(a, eq.x);
        let got0 = sol.psi.columns(3 * ua, 3).into_owned();
        let got1 = sol.psi.columns(3 * uh, 3).into_owned();
        assert!(linalg::max_abs(&(got0 - s0)) < 1e-8, "x = {}", eq.x);
        assert!(linalg::max_abs(&(got1 - s1)) < 1e-8, "x = {}", eq.x);
        assert!(sol.residual < 1e-12);
        assert!(maineq::sequence_norm(&sol.functions) > 0.0);
    }
}

#[test]
fn coinciding_pairs_cancel() {
    let tol = ToleranceConfig::default();
    let data = sec6_data(0.3, 6).unwrap();
    let model = star_model_data(6);
    let grouping = build_groups(&data, &model, 1).unwrap();
    let w = collapse_weights(&data, 1, &tol);
    let wm = collapse_weights(&model, 1, &tol);
    let nodes = spectral_nodes(&grouping, &data, &model, &w, &wm, &tol).unwrap();
    let active: Vec<f64> = nodes.iter().filter(|n| n.is_active()).map(|n| n.rho).collect();
    assert_eq!(active.len(), 2, "{active:?}");
}

fn synthetic(m: usize, p: usize, n_bands: usize, shift: &[f64]) -> SpectralData {
    let mut d = Vec::new();
    for n in 1..=n_bands {
        for k in 1..=m {
            let c = if k <= p { n as f64 - 0.5 } else { n as f64 };
            let r = c + shift[k - 1] / (PI * c);
            d.push(SpectralDatum {
                n,
                k,
                lambda: r * r,
                alpha: linalg::identity(m) * re(c * c),
            });
        }
    }
    SpectralData::new(m, d).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kernel_is_hermitian_symmetric(l in 0.05f64..40.0, mu in 0.05f64..40.0) {
        let q = linalg::from_real_rows(&[vec![0.4, 0.1], vec![0.1, -0.2]]);
        let f = ConstantPotential::new(&q, 200);
        let a = sine_trace(&f as &dyn Fundamental, re(l)).unwrap();
        let b = sine_trace(&f as &dyn Fundamental, re(mu)).unwrap();
        let ab = maineq::kernel_d(&a, &b).unwrap();
        let ba = maineq::kernel_d(&b, &a).unwrap();
        for (x, y) in ab.iter().zip(&ba) {
            prop_assert!(linalg::max_abs(&(x.adjoint() - y)) <= 1e-8);
        }
    }

    #[test]
    fn pairs_never_straddle_groups(z in prop::collection::vec(-0.6f64..0.6, 3), zm in prop::collection::vec(-0.6f64..0.6, 3)) {
        let data = synthetic(3, 1, 10, &z);
        let model = synthetic(3, 1, 10, &zm);
        let g = build_groups(&data, &model, 1).unwrap();
        for n in 1..=10 {
            for k in 1..=3 {
                let owners: Vec<usize> = g.groups.iter()
                    .filter(|gr| gr.entries.iter().any(|e| e.n == n && e.k == k))
                    .map(|gr| gr.index)
                    .collect();
                prop_assert_eq!(owners.len(), 1);
            }
        }
        for gr in g.groups.iter().skip(1) {
            let c = gr.center.unwrap();
            prop_assert!(gr.entries.iter().all(|e| (e.rho - c).abs() < 0.25));
        }
    }
}
