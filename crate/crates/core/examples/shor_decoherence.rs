//! Order finding with bit-flip noise on the first register.

use qinterference::algorithms::ShorSpec;
use qinterference::channels::PauliError;
use qinterference::harness::{
    render_csv, run_experiment, Algorithm, ErrorFamily, ExperimentSpec, Grid, Outputs, SubsetPolicy,
};

fn main() -> qinterference::Result<()> {
    let spec = ExperimentSpec {
        algorithm: Algorithm::Shor(ShorSpec::new(3, 2)?),
        family: ErrorFamily::Decoherence {
            kind: PauliError::BitFlip,
            grid: Grid::linspace(0.0, 1.0, 5)?,
            nf: vec![1, 2],
            subset_policy: SubsetPolicy::All,
        },
        average_over_alpha: false,
        master_seed: 7,
        outputs: Outputs::default(),
    };
    let rows = run_experiment(&spec)?;
    print!("{}", String::from_utf8_lossy(&render_csv(&rows)?));
    Ok(())
}
