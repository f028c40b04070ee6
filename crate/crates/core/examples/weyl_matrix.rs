// The Weyl matrix near a pole: `M(λ) ≈ −α/(λ − λ₀)`.

use std::error::Error;

use spectral_mappings::forward::{find_eigenvalues, weight_matrix, weyl_matrix};
use spectral_mappings::linalg::{self, c};
use spectral_mappings::{BoundaryCoefficient, PotentialGrid, Problem, Projector};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let problem = Problem::new(
        PotentialGrid::diagonal(400, &[&|x: f64| x.cos(), &|x: f64| 0.2 * x]),
        Projector::diagonal(&[true, false]),
        BoundaryCoefficient::new(linalg::diag_real(&[0.5, 0.0])),
    );
    let eig = &find_eigenvalues(&problem, 2)?[0];
    let alpha = weight_matrix(&problem, eig)?;
    println!("λ₁ = {:.8}, multiplicity {}", eig.lambda, eig.multiplicity);
    for delta in [1e-2, 1e-3, 1e-4] {
        let w = weyl_matrix(&problem, c(eig.lambda + delta, 0.0))?;
        let scaled = w.m * linalg::re(-delta);
        println!("δ = {delta:.0e}: |−δ M − α| = {:.3e}", linalg::max_abs(&(scaled - &alpha)));
    }
    let w = weyl_matrix(&problem, c(eig.lambda + 1e-4, 0.0))?;
    if linalg::max_abs(&(w.m * linalg::re(-1e-4) - &alpha)) > 1e-3 * (1.0 + linalg::max_abs(&alpha)) {
        return Err("residue does not match the weight matrix".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
