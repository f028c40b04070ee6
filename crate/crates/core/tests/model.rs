use std::f64::consts::PI;

use proptest::prelude::*;
use spectral_mappings::linalg::{self, re};
use spectral_mappings::model::{
    collapse_weights, construct_model, estimate_p, forward_asymptotics, round_to_projector,
};
use spectral_mappings::reconstruct::sec6_data;
use spectral_mappings::{
    forward, BoundaryCoefficient, CMat, Error, PotentialGrid, Problem, Projector, SpectralData, SpectralDatum,
    ToleranceConfig,
};

#[test]
fn constant_potential_gives_scaled_identity_theta() {
    let c = 0.7;
    let problem = Problem::new(
        PotentialGrid::constant(linalg::identity(3) * re(c), 200),
        Projector::star(3),
        BoundaryCoefficient::zero(3),
    );
    let s = forward_asymptotics(&problem, &ToleranceConfig::default());
    let expected = linalg::identity(3) * re(PI / 2.0 * c);
    assert!(linalg::max_abs(&(&s.theta - expected)) < 1e-12);
    for z in &s.z {
        assert!((z - PI / 2.0 * c).abs() < 1e-12);
    }
}

#[test]
fn boundary_coefficient_enters_only_the_range_block() {
    let t = Projector::star(3);
    let h = -0.4;
    let q = linalg::from_real_rows(&[vec![0.2, 0.1, 0.0], vec![0.1, -0.3, 0.05], vec![0.0, 0.05, 0.4]]);
    let problem = Problem::new(
        PotentialGrid::constant(q.clone(), 200),
        t.clone(),
        BoundaryCoefficient::scaled_projector(h, &t),
    );
    let s = forward_asymptotics(&problem, &ToleranceConfig::default());
    let omega = &q * re(PI / 2.0);
    let tm = t.matrix();
    let tp = t.complement();
    let expected = tm * &omega * tm - tm * re(h) + &tp * &omega * &tp;
    assert!(linalg::max_abs(&(&s.theta - expected)) < 1e-12);
    assert_eq!(s.p, 1);
}

#[test]
fn perturbed_star_data_gives_star_model() {
    let tol = ToleranceConfig::default();
    let built = construct_model(&sec6_data(0.3, 12).unwrap(), 100, &tol).unwrap();
    assert_eq!(built.summary.p, 1);
    assert!(linalg::max_abs(&(built.summary.t.matrix() - Projector::star(3).matrix())) < 1e-8);
    assert!(linalg::max_abs(&built.summary.theta) < 1e-8);
    assert!(built.summary.z.iter().all(|z| z.abs() < 1e-8));
}

#[test]
fn model_matches_forward_asymptotics_of_decoupled_problem() {
    let tol = ToleranceConfig::default();
    let t = Projector::diagonal(&[true, false]);
    let problem = Problem::new(
        PotentialGrid::constant(linalg::diag_real(&[0.4, -0.2]), 1000),
        t.clone(),
        BoundaryCoefficient::scaled_projector(0.3, &t),
    );
    let data = forward::spectral_data(&problem, 12).unwrap();
    let built = construct_model(&data, 200, &tol).unwrap();
    let exact = forward_asymptotics(&problem, &tol);
    assert_eq!(built.summary.p, exact.p);
    assert!(linalg::max_abs(&(built.summary.t.matrix() - t.matrix())) < 1e-6);
    let err = linalg::max_abs(&(&built.summary.theta - &exact.theta));
    assert!(err < 1e-3, "{err}");
}

#[test]
fn slot_count_needs_five_bands() {
    let data = sec6_data(0.3, 4).unwrap();
    assert!(matches!(estimate_p(&data), Err(Error::InvalidInput(_))));
    assert_eq!(estimate_p(&sec6_data(0.3, 5).unwrap()).unwrap(), 1);
}

#[test]
fn boundary_coefficient_outside_range_rejected_by_model_pipeline() {
    let mut d = Vec::new();
    for n in 1..=6 {
        for k in 1..=2 {
            d.push(SpectralDatum {
                n,
                k,
                lambda: (n as f64 - 0.5).powi(2),
                alpha: linalg::identity(2),
            });
        }
    }
    let data = SpectralData::new(2, d).unwrap();
    assert!(construct_model(&data, 50, &ToleranceConfig::default()).is_err());
}

fn hermitian(entries: &[f64], m: usize) -> CMat {
    let mut a = CMat::zeros(m, m);
    let mut it = entries.iter();
    for i in 0..m {
        for j in i..m {
            let v = *it.next().unwrap();
            a[(i, j)] = re(v);
            a[(j, i)] = re(v);
        }
    }
    a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn collapse_keeps_first_slot_of_each_multiplicity(repeat in prop::collection::vec(any::<bool>(), 8)) {
        let m = 3;
        let mut d = Vec::new();
        let mut value = 0.0;
        let mut keep = Vec::new();
        for n in 1..=3 {
            for k in 1..=m {
                let idx = (n - 1) * m + (k - 1);
                let first = idx == 0 || !repeat[idx - 1];
                if first {
                    value += 1.0;
                }
                keep.push(first);
                d.push(SpectralDatum { n, k, lambda: value, alpha: linalg::identity(m) * re(value) });
            }
        }
        let data = SpectralData::new(m, d).unwrap();
        let w = collapse_weights(&data, 1, &ToleranceConfig::default());
        for (idx, &first) in keep.iter().enumerate() {
            let (n, k) = (idx / m + 1, idx % m + 1);
            let expected = if first { data.get(n, k).alpha.clone() } else { CMat::zeros(m, m) };
            prop_assert_eq!(w.get(n, k), &expected);
        }
    }

    #[test]
    fn rounding_yields_orthogonal_projector(entries in prop::collection::vec(-2.0f64..2.0, 6)) {
        let (t, defect) = round_to_projector(&hermitian(&entries, 3));
        prop_assert!(linalg::max_abs(&(&t * &t - &t)) < 1e-10);
        prop_assert!(linalg::hermitian_defect(&t) < 1e-12);
        prop_assert!(defect >= 0.0);
        let (t2, d2) = round_to_projector(&t);
        prop_assert!(linalg::max_abs(&(t2 - &t)) < 1e-10 && d2 < 1e-10);
    }
}
