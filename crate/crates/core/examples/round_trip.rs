// Forward then inverse for a two-channel problem.

use std::error::Error;

use spectral_mappings::cli::relative_l2;
use spectral_mappings::forward::Operator;
use spectral_mappings::reconstruct::{solve_inverse, InverseConfig};
use spectral_mappings::{linalg, BoundaryCoefficient, PotentialGrid, Problem, Projector};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let n_grid = 600;
    let problem = Problem::new(
        PotentialGrid::diagonal(n_grid, &[&|x: f64| 0.5 * x.sin(), &|_| 0.0]),
        Projector::diagonal(&[true, false]),
        BoundaryCoefficient::zero(2),
    );
    let config = InverseConfig::with_grid(n_grid);
    let data = Operator::new(&problem, &config.tol).spectral_data(12)?;
    let r = solve_inverse(&data, &config)?;
    let err = relative_l2(&r.problem.potential, &problem.potential);
    let h = linalg::max_abs(r.problem.boundary.matrix());
    println!("relative L2 error of Q  {err:.4}");
    println!("max |H|                 {h:.2e}");
    for i in (0..=n_grid).step_by(n_grid / 6) {
        let q = r.problem.potential.sample(i);
        println!("x = {:.3}  q11 = {:+.5}  exact {:+.5}", problem.potential.node_x(i), q[(0, 0)].re, 0.5 * problem.potential.node_x(i).sin());
    }
    if err > 0.08 || h > 1e-2 {
        return Err("round trip drifted".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
