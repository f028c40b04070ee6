// Star model with its first eigenvalue moved to a² = 0.09: recover
// `H = hT` and check the spectrum of the recovered problem.

use std::error::Error;

use spectral_mappings::cli::scalar_boundary;
use spectral_mappings::forward::Operator;
use spectral_mappings::reconstruct::{sec6_data, solve_inverse, InverseConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data = sec6_data(0.3, 15)?;
    let config = InverseConfig::with_grid(1000);
    let r = solve_inverse(&data, &config)?;
    let h = scalar_boundary(&r.problem).ok_or("H is not a multiple of T")?;
    println!("h = {h:.6}");
    let check = Operator::new(&r.problem, &config.tol).spectral_data(4)?;
    for n in 1..=4 {
        println!("{n} | {:.6}", check.get(n, 1).lambda);
    }
    if (h + 0.361838).abs() > 5e-3 || (check.get(1, 1).lambda - 0.09).abs() > 1e-3 {
        return Err("recovered problem is off".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
