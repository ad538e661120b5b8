//! Order finding for a = 2 mod 3 with every Hadamard rotated to a common angle.

use qinterference::algorithms::ShorSpec;
use qinterference::harness::{
    render_csv, run_experiment, Algorithm, ErrorFamily, ExperimentSpec, Grid, Outputs,
};

fn main() -> qinterference::Result<()> {
    let spec = ExperimentSpec {
        algorithm: Algorithm::Shor(ShorSpec::new(3, 2)?),
        family: ErrorFamily::Systematic {
            grid: Grid::linspace(0.0, std::f64::consts::FRAC_PI_2, 9)?,
        },
        average_over_alpha: false,
        master_seed: 7,
        outputs: Outputs::default(),
    };
    let rows = run_experiment(&spec)?;
    print!("{}", String::from_utf8_lossy(&render_csv(&rows)?));
    Ok(())
}
