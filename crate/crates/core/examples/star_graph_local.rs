// Local inverse problem on a three-edge star from diagonal weights only.

use std::error::Error;

use spectral_mappings::forward::Operator;
use spectral_mappings::graph::{graph_to_matrix, solve_local_inverse, ScalarLocalData, StarGraphProblem};
use spectral_mappings::reconstruct::InverseConfig;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let n_grid = 600;
    let star = StarGraphProblem::from_fns(n_grid, &[&|x: f64| 0.3 * x.sin(), &|_| 0.0, &|_| 0.0])?;
    let config = InverseConfig::with_grid(n_grid);
    let data = Operator::new(&graph_to_matrix(&star), &config.tol).spectral_data(12)?;
    let local = ScalarLocalData::from_spectral(&data, 1, &config.tol)?;
    let r = solve_local_inverse(&local, &config)?;
    let exact = star.edge(1);
    let num: f64 = r.q.iter().zip(exact).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = exact.iter().map(|b| b * b).sum();
    let err = (num / den).sqrt();
    println!("model q̃₁ = {:.6}", r.model.potentials[0]);
    println!("relative L2 error of q₁ = {err:.4}");
    if err > 0.08 {
        return Err("local reconstruction drifted".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
