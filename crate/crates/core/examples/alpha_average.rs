//! Grover success and interference averaged over every marked item, written as JSON.

use qinterference::algorithms::GroverSpec;
use qinterference::harness::{
    render, run_experiment_with_threads, Algorithm, ErrorFamily, ExperimentSpec, Grid, OutputFormat,
};

fn main() -> qinterference::Result<()> {
    let spec = ExperimentSpec {
        algorithm: Algorithm::Grover(GroverSpec::new(3, 0)?),
        family: ErrorFamily::Systematic {
            grid: Grid::linspace(0.5, 1.0, 3)?,
        },
        average_over_alpha: true,
        master_seed: 1,
        outputs: "au".parse()?,
    };
    let rows = run_experiment_with_threads(&spec, 2)?;
    println!(
        "{}",
        String::from_utf8_lossy(&render(&rows, OutputFormat::Json)?)
    );
    Ok(())
}
