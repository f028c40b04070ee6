// One perturbed eigenvalue of the star: solve the main equation on the
// grid, compare with the closed form and check `(I − R)(I + R̃) = I`.

use std::error::Error;

use spectral_mappings::reconstruct::{sec6_closed_form, sec6_data, solve_inverse, InverseConfig};
use spectral_mappings::linalg;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let a = 0.3;
    let data = sec6_data(a, 10)?;
    let config = InverseConfig {
        identity_nodes: (0..10).map(|j| 50 + 100 * j).collect(),
        ..InverseConfig::with_grid(1000)
    };
    let r = solve_inverse(&data, &config)?;
    let s = r.solved_trace(a).ok_or("no unknown at ρ = a")?;
    let mut worst: f64 = 0.0;
    for i in (0..=1000).step_by(10) {
        let exact = sec6_closed_form(a, i as f64 * std::f64::consts::PI / 1000.0)?;
        worst = worst.max(linalg::max_abs(&(&s.values[i] - &exact.s110)));
    }
    println!("active unknowns       {}", r.diagnostics.active_nodes);
    println!("sup |S_110 − exact|   {worst:.3e}");
    for (x, d) in &r.diagnostics.identity {
        println!("identity at x = {x:.4}: {d:.3e}");
    }
    if worst > 1e-6 || r.diagnostics.identity.iter().any(|(_, d)| *d > 1e-7) {
        return Err("main equation disagrees with the closed form".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
