use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::output::ResultRow;
use super::sampler::RandomAngleSampler;
use crate::algorithms::{
    build_grover, build_shor, decoherence_channels, grover_success, shor_success,
    AlgorithmCircuits, AlgorithmUnitaries, GroverSpec, ShorParams, ShorSpec,
};
use crate::channels::{ErrorModel, PauliError};
use crate::error::{Error, Result};
use crate::gates::circuit_apply_basis;
use crate::interference::{ibits, interference_circuit};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Grover(GroverSpec),
    Shor(ShorSpec),
}

impl Algorithm {
    pub fn n(&self) -> usize {
        match self {
            Algorithm::Grover(g) => g.n,
            Algorithm::Shor(s) => s.n(),
        }
    }

    /// Qubits that receive the initial Hadamard layer.
    pub fn layer_qubits(&self) -> usize {
        match self {
            Algorithm::Grover(g) => g.n,
            Algorithm::Shor(s) => s.first_register(),
        }
    }
}

/// Which qubits a decoherence sweep with `n_f` faulty qubits hits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsetPolicy {
    /// Average over every choice of `n_f` layer qubits.
    #[default]
    All,
    /// Only the first `n_f` qubits.
    Prefix,
}

impl FromStr for SubsetPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(Self::All),
            "prefix" => Ok(Self::Prefix),
            _ => Err(Error::argument(format!(
                "unknown subset policy '{s}' (all or prefix)"
            ))),
        }
    }
}

impl fmt::Display for SubsetPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::All => "all",
            Self::Prefix => "prefix",
        })
    }
}

impl SubsetPolicy {
    pub fn subsets(self, qubits: usize, nf: usize) -> Vec<Vec<usize>> {
        match self {
            Self::Prefix => vec![(0..nf).collect()],
            Self::All => combinations(qubits, nf),
        }
    }
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ErrorFamily {
    Systematic {
        grid: Grid,
    },
    Random {
        grid: Grid,
        realizations: usize,
    },
    Decoherence {
        kind: PauliError,
        grid: Grid,
        nf: Vec<usize>,
        subset_policy: SubsetPolicy,
    },
}

impl ErrorFamily {
    pub fn grid(&self) -> &Grid {
        match self {
            Self::Systematic { grid }
            | Self::Random { grid, .. }
            | Self::Decoherence { grid, .. } => grid,
        }
    }

    fn tag(&self) -> u64 {
        match self {
            Self::Systematic { .. } => 1,
            Self::Random { .. } => 2,
            Self::Decoherence { .. } => 3,
        }
    }
}

/// Which interference columns to compute; success is always reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Outputs {
    pub pa: bool,
    pub au: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self { pa: true, au: true }
    }
}

impl FromStr for Outputs {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pa" => Ok(Self {
                pa: true,
                au: false,
            }),
            "au" => Ok(Self {
                pa: false,
                au: true,
            }),
            "both" => Ok(Self::default()),
            _ => Err(Error::argument(format!(
                "unknown measure '{s}' (pa, au or both)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub algorithm: Algorithm,
    pub family: ErrorFamily,
    /// Grover only: average every row over all marked items.
    pub average_over_alpha: bool,
    pub master_seed: u64,
    pub outputs: Outputs,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if let ErrorFamily::Random {
            realizations: 0, ..
        } = self.family
        {
            return Err(Error::argument("at least one realization is required"));
        }
        if let ErrorFamily::Decoherence { nf, .. } = &self.family {
            if nf.is_empty() {
                return Err(Error::argument("no faulty-qubit counts given"));
            }
            let max = self.algorithm.layer_qubits();
            if let Some(bad) = nf.iter().find(|&&k| k > max) {
                return Err(Error::argument(format!(
                    "n_f={bad} exceeds the {max} layer qubits"
                )));
            }
        }
        Ok(())
    }

    /// Identifier mixed into every random substream of this experiment.
    pub fn experiment_id(&self) -> u64 {
        let alg = match self.algorithm {
            Algorithm::Grover(g) => (1u64 << 32) | g.n as u64,
            Algorithm::Shor(s) => (2u64 << 32) | (s.r() << 8) | s.a(),
        };
        (alg << 4) | self.family.tag()
    }

    fn alphas(&self) -> Vec<usize> {
        match self.algorithm {
            Algorithm::Grover(g) if self.average_over_alpha => (0..1 << g.n).collect(),
            Algorithm::Grover(g) => vec![g.alpha],
            Algorithm::Shor(_) => vec![0],
        }
    }
}

/// Measured values of one configuration.
#[derive(Clone, Copy, Debug)]
struct Sample {
    pa: Option<f64>,
    au: Option<f64>,
    success: f64,
}

/// Mean and sample standard deviation, shifted by the first value so a
/// constant input gives its value back exactly.
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, 0.0);
    }
    let shift = values[0];
    let (s, s2) = values.iter().fold((0.0, 0.0), |(a, b), &x| {
        (a + (x - shift), b + (x - shift) * (x - shift))
    });
    let mean = shift + s / n as f64;
    let var = if n > 1 {
        ((s2 - s * s / n as f64) / (n - 1) as f64).max(0.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn average(samples: &[Sample]) -> Sample {
    let col = |f: fn(&Sample) -> Option<f64>| -> Option<f64> {
        samples
            .iter()
            .map(f)
            .collect::<Option<Vec<_>>>()
            .map(|v| mean_std(&v).0)
    };
    Sample {
        pa: col(|s| s.pa),
        au: col(|s| s.au),
        success: mean_std(&samples.iter().map(|s| s.success).collect::<Vec<_>>()).0,
    }
}

fn make_row(
    spec: &ExperimentSpec,
    sweep_value: f64,
    n_f: Option<usize>,
    mean: Sample,
    stderr: f64,
    n_samples: usize,
) -> Result<ResultRow> {
    Ok(ResultRow {
        sweep_value,
        n: spec.algorithm.n(),
        n_f,
        interference_pa: mean.pa,
        interference_au: mean.au,
        ibits_pa: mean.pa.map(ibits).transpose()?,
        ibits_au: mean.au.map(ibits).transpose()?,
        success: mean.success.clamp(0.0, 1.0),
        success_stderr: stderr,
        n_samples,
        seed: spec.master_seed,
    })
}

/// Exact-algorithm output distribution over the full register.
fn shor_ideal(s: &ShorSpec) -> Result<Vec<f64>> {
    let c = build_shor(s, &ShorParams::exact(s))?;
    Ok(circuit_apply_basis(&c.full, 0)?.probabilities())
}

fn measure_circuits(
    c: &AlgorithmCircuits,
    outputs: Outputs,
    success: impl Fn(&AlgorithmCircuits) -> Result<f64>,
) -> Result<Sample> {
    Ok(Sample {
        pa: if outputs.pa {
            Some(interference_circuit(&c.full)?.value)
        } else {
            None
        },
        au: if outputs.au {
            Some(interference_circuit(&c.rest)?.value)
        } else {
            None
        },
        success: success(c)?,
    })
}

/// Grover with the given Hadamard angles, averaged over the requested marked items.
fn grover_sample(spec: &ExperimentSpec, g: &GroverSpec, thetas: &[f64]) -> Result<Sample> {
    let samples = spec
        .alphas()
        .into_iter()
        .map(|alpha| {
            let ga = GroverSpec { alpha, ..*g };
            let c = build_grover(&ga, thetas)?;
            measure_circuits(&c, spec.outputs, |c| {
                grover_success(&circuit_apply_basis(&c.full, 0)?, alpha)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(average(&samples))
}

fn shor_sample(
    spec: &ExperimentSpec,
    s: &ShorSpec,
    params: &ShorParams,
    ideal: &[f64],
) -> Result<Sample> {
    let c = build_shor(s, params)?;
    measure_circuits(&c, spec.outputs, |c| {
        shor_success(ideal, &circuit_apply_basis(&c.full, 0)?.probabilities())
    })
}

fn ideal_for(spec: &ExperimentSpec) -> Result<Vec<f64>> {
    match &spec.algorithm {
        Algorithm::Shor(s) => shor_ideal(s),
        Algorithm::Grover(_) => Ok(Vec::new()),
    }
}

/// Every Hadamard at angle θ (Shor: QFT Hadamards too, phases exact).
pub fn run_systematic_sweep(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let ErrorFamily::Systematic { grid } = &spec.family else {
        return Err(Error::argument("not a systematic-error experiment"));
    };
    let ideal = ideal_for(spec)?;
    let samples = grid
        .values()
        .par_iter()
        .map(|&theta| match &spec.algorithm {
            Algorithm::Grover(g) => grover_sample(spec, g, &vec![theta; g.hadamard_count()]),
            Algorithm::Shor(s) => shor_sample(spec, s, &ShorParams::systematic(s, theta), &ideal),
        })
        .collect::<Result<Vec<_>>>()?;
    let n_samples = spec.alphas().len();
    grid.values()
        .iter()
        .zip(samples)
        .map(|(&theta, m)| make_row(spec, theta, None, m, 0.0, n_samples))
        .collect()
}

/// `n_r` realizations per ε with independently drawn angles.
pub fn run_random_sweep(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let ErrorFamily::Random { grid, realizations } = &spec.family else {
        return Err(Error::argument("not a random-error experiment"));
    };
    let nr = *realizations;
    let ideal = ideal_for(spec)?;
    let sampler = RandomAngleSampler::new(spec.master_seed, spec.experiment_id());
    let tasks: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..nr).map(move |r| (g, r)))
        .collect();
    let samples = tasks
        .par_iter()
        .map(|&(gi, r)| {
            let eps = grid.values()[gi];
            let mut stream = sampler.stream(gi, r);
            match &spec.algorithm {
                Algorithm::Grover(g) => {
                    grover_sample(spec, g, &stream.hadamard_angles(g.hadamard_count(), eps))
                }
                Algorithm::Shor(s) => {
                    let m = s.first_register();
                    let params = ShorParams {
                        initial_thetas: stream.hadamard_angles(m, eps),
                        qft_thetas: stream.hadamard_angles(m, eps),
                        qft_phases: stream.offsets(s.phase_count(), eps),
                    };
                    shor_sample(spec, s, &params, &ideal)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    samples
        .chunks(nr)
        .zip(grid.values())
        .map(|(chunk, &eps)| {
            let success: Vec<f64> = chunk.iter().map(|s| s.success).collect();
            let (_, sd) = mean_std(&success);
            make_row(spec, eps, None, average(chunk), sd / (nr as f64).sqrt(), nr)
        })
        .collect()
}

/// Pauli errors right after the initial layer, for every (n_f, p) pair.
/// Rows are ordered by n_f, then p.
pub fn run_decoherence_sweep(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let ErrorFamily::Decoherence {
        kind,
        grid,
        nf,
        subset_policy,
    } = &spec.family
    else {
        return Err(Error::argument("not a decoherence experiment"));
    };
    let ideal = ideal_for(spec)?;
    let alphas = spec.alphas();
    let unitaries: Vec<AlgorithmUnitaries> = match &spec.algorithm {
        Algorithm::Grover(g) => alphas
            .par_iter()
            .map(|&alpha| {
                let ga = GroverSpec { alpha, ..*g };
                build_grover(&ga, &vec![std::f64::consts::FRAC_PI_4; ga.hadamard_count()])?
                    .unitaries()
            })
            .collect::<Result<_>>()?,
        Algorithm::Shor(s) => vec![build_shor(s, &ShorParams::exact(s))?.unitaries()?],
    };
    let layer = spec.algorithm.layer_qubits();
    let subsets: Vec<Vec<Vec<usize>>> = nf
        .iter()
        .map(|&k| subset_policy.subsets(layer, k))
        .collect();
    struct Task<'a> {
        point: usize,
        p: f64,
        subset: &'a [usize],
        which: usize,
    }
    let mut tasks = Vec::new();
    let mut point = 0;
    for subs in &subsets {
        for &p in grid.values() {
            for subset in subs {
                for which in 0..unitaries.len() {
                    tasks.push(Task {
                        point,
                        p,
                        subset,
                        which,
                    });
                }
            }
            point += 1;
        }
    }
    let evaluated = tasks
        .par_iter()
        .map(|t| {
            let model = ErrorModel::new(*kind, t.p, t.subset.to_vec())?;
            let ch = decoherence_channels(&unitaries[t.which], &model)?;
            let success = match &spec.algorithm {
                Algorithm::Grover(_) => grover_success(&ch.final_state, alphas[t.which])?,
                Algorithm::Shor(_) => shor_success(&ideal, &ch.final_state.probabilities())?,
            };
            Ok((
                t.point,
                Sample {
                    pa: if spec.outputs.pa {
                        Some(ch.potentially_available.interference()?.value)
                    } else {
                        None
                    },
                    au: if spec.outputs.au {
                        Some(ch.actually_used.interference()?.value)
                    } else {
                        None
                    },
                    success,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(point);
    let mut rest = evaluated.as_slice();
    for (subs, &k) in subsets.iter().zip(nf) {
        for &p in grid.values() {
            let count = subs.len() * unitaries.len();
            let (chunk, tail) = rest.split_at(count);
            rest = tail;
            let samples: Vec<Sample> = chunk.iter().map(|(_, s)| *s).collect();
            rows.push(make_row(spec, p, Some(k), average(&samples), 0.0, count)?);
        }
    }
    Ok(rows)
}

/// Dispatches on the error family.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    match spec.family {
        ErrorFamily::Systematic { .. } => run_systematic_sweep(spec),
        ErrorFamily::Random { .. } => run_random_sweep(spec),
        ErrorFamily::Decoherence { .. } => run_decoherence_sweep(spec),
    }
}

/// Runs on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(
    spec: &ExperimentSpec,
    threads: usize,
) -> Result<Vec<ResultRow>> {
    with_threads(threads, || run_experiment(spec))
}

pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if threads == 0 {
        return Err(Error::argument("thread count must be positive"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::argument(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(f)
}
