// Problem and spectral-data documents, and the potential CSV.

use std::error::Error;

use spectral_mappings::cli::io;
use spectral_mappings::forward::Operator;
use spectral_mappings::reconstruct::sec6_model;
use spectral_mappings::ToleranceConfig;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = std::env::temp_dir().join(format!("spectral-mappings-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let model = sec6_model(20);
    let data = Operator::new(&model, &ToleranceConfig::default()).spectral_data(2)?;

    std::fs::write(dir.join("problem.json"), io::problem_to_string(&model))?;
    std::fs::write(dir.join("data.json"), io::spectral_data_to_string(&data))?;
    let problem = io::read_problem(&dir.join("problem.json"))?;
    let back = io::read_spectral_data(&dir.join("data.json"))?;
    let csv = io::potential_csv(&problem.potential);
    println!("{}", &io::spectral_data_to_string(&data)[..200]);
    println!("{}", csv.lines().next().unwrap_or_default());
    std::fs::remove_dir_all(&dir)?;
    if problem != model || back != data {
        return Err("documents did not round-trip".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
