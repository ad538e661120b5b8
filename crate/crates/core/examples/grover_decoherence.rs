//! Grover search with phase-flip noise after the initial Hadamard layer.

use qinterference::algorithms::GroverSpec;
use qinterference::channels::PauliError;
use qinterference::harness::{
    render_csv, run_experiment, Algorithm, ErrorFamily, ExperimentSpec, Grid, Outputs, SubsetPolicy,
};

fn main() -> qinterference::Result<()> {
    let spec = ExperimentSpec {
        algorithm: Algorithm::Grover(GroverSpec::new(4, 5)?),
        family: ErrorFamily::Decoherence {
            kind: PauliError::PhaseFlip,
            grid: Grid::linspace(0.0, 1.0, 5)?,
            nf: vec![1, 4],
            subset_policy: SubsetPolicy::Prefix,
        },
        average_over_alpha: false,
        master_seed: 7,
        outputs: Outputs::default(),
    };
    let rows = run_experiment(&spec)?;
    print!("{}", String::from_utf8_lossy(&render_csv(&rows)?));
    Ok(())
}
