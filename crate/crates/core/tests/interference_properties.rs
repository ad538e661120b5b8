use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qinterference::channels::{
    layered_error_channel, sandwich, ErrorModel, FactoredChannel, KrausChannel, PauliError,
    PauliLayer,
};
use qinterference::harness::{haar_unitary, random_kraus_channel};
use qinterference::interference::{
    interference_factored, interference_kraus, interference_kraus_naive,
    interference_superoperator, interference_unitary, superoperator_from_kraus,
};
use qinterference::linalg::{ComplexMatrix, C64};

fn permutation_matrix(perm: &[usize]) -> ComplexMatrix {
    let n = perm.len();
    ComplexMatrix::from_fn(n, n, |i, j| {
        if perm[j] == i {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unitary_interference_is_bounded(qubits in 0usize..5, seed: u64) {
        let n = 1usize << qubits;
        let u = haar_unitary(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let v = interference_unitary(&u).unwrap().value;
        prop_assert!(v >= -1e-9 && v <= (n - 1) as f64 + 1e-9);
    }

    #[test]
    fn permutations_leave_interference_unchanged(qubits in 1usize..5, seed: u64, p1: u64, p2: u64) {
        let n = 1usize << qubits;
        let u = haar_unitary(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let (p, q) = (permutation_matrix(&shuffled(n, p1)), permutation_matrix(&shuffled(n, p2)));
        let puq = p.matmul(&u).unwrap().matmul(&q).unwrap();
        let a = interference_unitary(&u).unwrap().value;
        let b = interference_unitary(&puq).unwrap().value;
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn all_routes_agree_on_random_channels(qubits in 1usize..4, count in 1usize..7, seed: u64) {
        let n = 1usize << qubits;
        let ch = random_kraus_channel(n, count, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let gram = interference_kraus(&ch).unwrap().value;
        let naive = interference_kraus_naive(&ch).unwrap().value;
        let sup = interference_superoperator(&superoperator_from_kraus(&ch).unwrap()).unwrap().value;
        prop_assert!((gram - naive).abs() < 1e-9);
        prop_assert!((gram - sup).abs() < 1e-9);
        prop_assert!(gram >= -1e-9);
    }

    #[test]
    fn splitting_a_kraus_operator_changes_nothing(qubits in 1usize..4, count in 1usize..5, t in 0.01f64..0.99, seed: u64) {
        let n = 1usize << qubits;
        let ch = random_kraus_channel(n, count, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let mut ops = ch.ops().to_vec();
        let first = ops.remove(0);
        ops.push(first.scale(C64::new(t.sqrt(), 0.0)));
        ops.push(first.scale(C64::new((1.0 - t).sqrt(), 0.0)));
        let split = KrausChannel::new(ops).unwrap();
        let a = interference_kraus(&ch).unwrap().value;
        let b = interference_kraus(&split).unwrap().value;
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn factored_route_matches_explicit_operators(
        seed: u64,
        bitflip: bool,
        p in 0.0f64..=1.0,
        mask in 0usize..8,
    ) {
        let kind = if bitflip { PauliError::BitFlip } else { PauliError::PhaseFlip };
        let affected: Vec<usize> = (0..3).filter(|q| mask >> q & 1 == 1).collect();
        let u = haar_unitary(8, &mut ChaCha8Rng::seed_from_u64(seed));
        let model = ErrorModel::new(kind, p, affected).unwrap();
        let fc = FactoredChannel::new(u.clone(), PauliLayer::new(3, model.clone()).unwrap()).unwrap();
        let explicit = sandwich(&layered_error_channel(3, &model).unwrap(), &ComplexMatrix::identity(8), &u).unwrap();
        let a = interference_factored(&fc).unwrap().value;
        let b = interference_kraus(&explicit).unwrap().value;
        prop_assert!((a - b).abs() < 1e-10, "{} vs {}", a, b);
    }
}

#[test]
fn single_kraus_channels_match_the_unitary_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2, 4, 8, 16] {
        let u = haar_unitary(n, &mut rng);
        let a = interference_kraus(&KrausChannel::unitary(u.clone()).unwrap())
            .unwrap()
            .value;
        let b = interference_unitary(&u).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }
}
