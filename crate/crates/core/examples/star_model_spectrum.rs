// Eigenvalues and weight matrices of the unperturbed three-edge star.

use std::error::Error;
use std::f64::consts::PI;

use spectral_mappings::forward::Operator;
use spectral_mappings::reconstruct::sec6_model;
use spectral_mappings::{linalg, ToleranceConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let model = sec6_model(1000);
    let data = Operator::new(&model, &ToleranceConfig::default()).spectral_data(5)?;
    let t = model.projector.matrix();
    println!("n  k  rho        |alpha - expected|");
    for d in data.entries() {
        let rho = d.lambda.sqrt();
        let (c, proj) = if d.k == 1 {
            (d.n as f64 - 0.5, t.clone())
        } else {
            (d.n as f64, model.projector.complement())
        };
        let expected = proj * linalg::re(2.0 * c * c / PI);
        let err = linalg::max_abs(&(&d.alpha - expected));
        println!("{}  {}  {rho:.8} {err:.2e}", d.n, d.k);
        if (rho - c).abs() > 1e-6 || err > 1e-4 * c * c {
            return Err(format!("slot ({}, {}) is off", d.n, d.k).into());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
