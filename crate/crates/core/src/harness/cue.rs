use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::sampler::derive_seed;
use super::sweep::mean_std;
use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::interference::unitary_value;
use crate::linalg::{ComplexMatrix, C64};

pub const MAX_CUE_QUBITS: usize = 8;
pub const MIN_CUE_SAMPLES: usize = 10;

const CUE_EXPERIMENT: u64 = 0xC0E;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CueStats {
    pub n: usize,
    pub samples: usize,
    pub mean: f64,
    pub stddev: f64,
}

fn gaussian_columns<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Vec<Vec<C64>> {
    (0..cols)
        .map(|_| {
            (0..rows)
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect()
        })
        .collect()
}

/// Modified Gram–Schmidt, run twice per column for numerical orthogonality.
fn orthonormalize(cols: &mut [Vec<C64>]) {
    for j in 0..cols.len() {
        let (done, todo) = cols.split_at_mut(j);
        let v = &mut todo[0];
        for _ in 0..2 {
            for q in done.iter() {
                let proj: C64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (x, a) in v.iter_mut().zip(q) {
                    *x -= proj * a;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Haar-random `dim × dim` unitary: Gram–Schmidt on the columns of a
/// complex Gaussian matrix. The implied `R` factor has a positive diagonal,
/// which keeps the distribution exactly Haar.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols = gaussian_columns(dim, dim, rng);
    orthonormalize(&mut cols);
    ComplexMatrix::from_columns(&cols)
}

/// Random channel with `count` Kraus operators: the `dim × dim` blocks of a
/// random `count·dim × dim` isometry.
pub fn random_kraus_channel<R: Rng + ?Sized>(
    dim: usize,
    count: usize,
    rng: &mut R,
) -> Result<KrausChannel> {
    if dim == 0 || count == 0 {
        return Err(Error::argument(
            "a channel needs a positive dimension and operator count",
        ));
    }
    let mut cols = gaussian_columns(dim * count, dim, rng);
    orthonormalize(&mut cols);
    let ops = (0..count)
        .map(|l| ComplexMatrix::from_fn(dim, dim, |i, k| cols[k][l * dim + i]))
        .collect();
    KrausChannel::new(ops)
}

/// Mean and standard deviation of the interference of Haar-random unitaries.
pub fn cue_baseline(n: usize, samples: usize, seed: u64) -> Result<CueStats> {
    if n > MAX_CUE_QUBITS {
        return Err(Error::size(format!(
            "CUE baseline is limited to {MAX_CUE_QUBITS} qubits"
        )));
    }
    if samples < MIN_CUE_SAMPLES {
        return Err(Error::argument(format!(
            "CUE baseline needs at least {MIN_CUE_SAMPLES} samples"
        )));
    }
    let dim = 1usize << n;
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(seed, CUE_EXPERIMENT, n as u64, i as u64));
            unitary_value(&haar_unitary(dim, &mut rng))
        })
        .collect();
    let (mean, stddev) = mean_std(&values);
    Ok(CueStats {
        n,
        samples,
        mean,
        stddev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::check_unitary;

    #[test]
    fn haar_samples_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in [1, 2, 8, 32] {
            assert!(check_unitary(&haar_unitary(dim, &mut rng), 1e-10));
        }
    }

    #[test]
    fn random_channels_are_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (dim, count) in [(2, 1), (4, 3), (16, 8)] {
            let ch = random_kraus_channel(dim, count, &mut rng).unwrap();
            assert_eq!(ch.len(), count);
            assert!(ch.completeness_error() < 1e-12);
        }
    }

    #[test]
    fn single_qubit_mean_respects_bound() {
        let s = cue_baseline(1, 500, 9).unwrap();
        assert!((0.0..=1.0).contains(&s.mean));
    }

    #[test]
    fn deterministic_for_a_seed() {
        assert_eq!(
            cue_baseline(3, 20, 5).unwrap(),
            cue_baseline(3, 20, 5).unwrap()
        );
    }

    #[test]
    fn limits() {
        assert!(matches!(cue_baseline(9, 20, 0), Err(Error::Size(_))));
        assert!(matches!(cue_baseline(2, 5, 0), Err(Error::Argument(_))));
    }
}
