//! Parameter sweeps over error strength, CUE baseline and result files.
//!
//! Every sweep is a flat list of independent tasks (grid point, realization,
//! qubit subset, marked item) evaluated in parallel. Random draws come from a
//! per-task generator seeded by hashing the master seed with the task
//! coordinates, and results are reduced in task order, so output depends
//! only on the [`ExperimentSpec`].

mod cue;
mod grid;
mod output;
mod sampler;
mod sweep;

pub use cue::{
    cue_baseline, haar_unitary, random_kraus_channel, CueStats, MAX_CUE_QUBITS, MIN_CUE_SAMPLES,
};
pub use grid::{parse_real, Grid};
pub use output::{
    format_real, parse_csv, read_results_csv, render, render_csv, render_json, write_results,
    OutputFormat, ResultRow, COLUMNS,
};
pub use sampler::{derive_seed, AngleStream, RandomAngleSampler};
pub use sweep::{
    combinations, run_decoherence_sweep, run_experiment, run_experiment_with_threads,
    run_random_sweep, run_systematic_sweep, with_threads, Algorithm, ErrorFamily, ExperimentSpec,
    Outputs, SubsetPolicy,
};

/// Default realization count for a Grover register of `n` qubits.
pub fn default_grover_realizations(n: usize) -> usize {
    if n <= 4 {
        1000
    } else {
        100
    }
}

/// Default realization count for a Shor instance with parameter `L`.
pub fn default_shor_realizations(l: usize) -> usize {
    match l {
        0..=2 => 5000,
        3 => 1000,
        _ => 100,
    }
}
