use std::f64::consts::FRAC_PI_4;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the substream of one task, mixed from every coordinate.
pub fn derive_seed(master_seed: u64, experiment_id: u64, grid_index: u64, realization: u64) -> u64 {
    [experiment_id, grid_index, realization]
        .into_iter()
        .fold(splitmix64(master_seed), |h, x| {
            splitmix64(h ^ splitmix64(x))
        })
}

/// Hands out an independent generator per (experiment, grid point,
/// realization), so draws never depend on scheduling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomAngleSampler {
    pub master_seed: u64,
    pub experiment_id: u64,
}

impl RandomAngleSampler {
    pub fn new(master_seed: u64, experiment_id: u64) -> Self {
        Self {
            master_seed,
            experiment_id,
        }
    }

    pub fn stream(&self, grid_index: usize, realization: usize) -> AngleStream {
        let seed = derive_seed(
            self.master_seed,
            self.experiment_id,
            grid_index as u64,
            realization as u64,
        );
        AngleStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

pub struct AngleStream {
    rng: ChaCha8Rng,
}

impl AngleStream {
    /// Uniform on `[−ε/2, ε/2]`; exactly zero when `ε = 0`.
    pub fn offset(&mut self, epsilon: f64) -> f64 {
        epsilon * (self.rng.random::<f64>() - 0.5)
    }

    /// Hadamard angles uniform on `[π/4 − ε/2, π/4 + ε/2]`.
    pub fn hadamard_angles(&mut self, count: usize, epsilon: f64) -> Vec<f64> {
        (0..count)
            .map(|_| FRAC_PI_4 + self.offset(epsilon))
            .collect()
    }

    pub fn offsets(&mut self, count: usize, epsilon: f64) -> Vec<f64> {
        (0..count).map(|_| self.offset(epsilon)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let s = RandomAngleSampler::new(42, 7);
        let a = s.stream(3, 5).hadamard_angles(10, 1.0);
        let b = s.stream(3, 5).hadamard_angles(10, 1.0);
        let c = s.stream(3, 6).hadamard_angles(10, 1.0);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(
            a,
            RandomAngleSampler::new(43, 7)
                .stream(3, 5)
                .hadamard_angles(10, 1.0)
        );
    }

    #[test]
    fn angles_stay_in_the_window() {
        let mut s = RandomAngleSampler::new(1, 1).stream(0, 0);
        for t in s.hadamard_angles(1000, 0.5) {
            assert!((t - FRAC_PI_4).abs() <= 0.25);
        }
        assert!(s.hadamard_angles(10, 0.0).iter().all(|&t| t == FRAC_PI_4));
        assert!(s.offsets(10, 0.0).iter().all(|&d| d == 0.0));
    }
}
