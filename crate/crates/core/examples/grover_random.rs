//! Grover search with independently drawn Hadamard angles.

use qinterference::algorithms::GroverSpec;
use qinterference::harness::{
    render_csv, run_experiment, Algorithm, ErrorFamily, ExperimentSpec, Grid, Outputs,
};

fn main() -> qinterference::Result<()> {
    let spec = ExperimentSpec {
        algorithm: Algorithm::Grover(GroverSpec::new(4, 5)?),
        family: ErrorFamily::Random {
            grid: Grid::linspace(0.0, std::f64::consts::PI, 5)?,
            realizations: 200,
        },
        average_over_alpha: false,
        master_seed: 7,
        outputs: Outputs::default(),
    };
    let rows = run_experiment(&spec)?;
    print!("{}", String::from_utf8_lossy(&render_csv(&rows)?));
    Ok(())
}
