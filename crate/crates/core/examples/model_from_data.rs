// Asymptotic summary of spectral data and the constant model problem.

use std::error::Error;
use std::f64::consts::PI;

use spectral_mappings::forward::Operator;
use spectral_mappings::model::{construct_model, forward_asymptotics};
use spectral_mappings::{linalg, BoundaryCoefficient, PotentialGrid, Problem, Projector, ToleranceConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let tol = ToleranceConfig::default();
    let problem = Problem::new(
        PotentialGrid::diagonal(600, &[&|x: f64| 0.5 * x.sin(), &|_| 0.0]),
        Projector::diagonal(&[true, false]),
        BoundaryCoefficient::zero(2),
    );
    let data = Operator::new(&problem, &tol).spectral_data(12)?;
    let built = construct_model(&data, 600, &tol)?;
    let exact = forward_asymptotics(&problem, &tol);
    println!("p = {}", built.summary.p);
    println!("z from data  {:?}", built.summary.z);
    println!("z from Q     {:?}", exact.z);
    let q = built.model.potential.sample(0);
    println!("model Q̃ = {:.6} (exact (2/π)Θ₁₁ = {:.6})", q[(0, 0)].re, 2.0 / PI * exact.theta[(0, 0)].re);
    if linalg::max_abs(&(&built.summary.theta - &exact.theta)) > 1e-2 {
        return Err("Θ estimate is off".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
