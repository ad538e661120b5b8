//! Grover search and Shor order finding as circuits, their error channels
//! and success probabilities.
//!
//! Each builder returns three circuits on the same register: the initial
//! Walsh–Hadamard layer, the remainder of the algorithm, and their
//! composition. Interference of `full` is the potentially available
//! interference; interference of `rest` is the part actually used.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::Arc;

use crate::channels::{
    layered_error_channel, sandwich, ErrorModel, FactoredChannel, KrausChannel, MixedState,
    PauliError, PauliLayer,
};
use crate::error::{Error, Result};
use crate::gates::{
    circuit_unitary, qft_circuit_perturbed, qft_phase_count, walsh_layer, Circuit, Gate,
};
use crate::interference::{interference_factored, interference_kraus, InterferenceReport};
use crate::linalg::{
    qubit_mask, qubits_for_dim, ComplexMatrix, DensityMatrix, StateVector, MAX_QUBITS, STATE_TOL,
};

/// Explicit Kraus sandwiches are refused beyond this many stored amplitudes.
pub const MAX_EXPLICIT_KRAUS_ENTRIES: usize = 1 << 24;

/// `floor(π / (4 asin(2^{-n/2})))`, the optimal number of Grover iterations.
pub fn grover_iteration_count(n: usize) -> usize {
    let theta = (0.5f64).powf(n as f64 / 2.0).asin();
    (PI / (4.0 * theta)).floor() as usize
}

fn sign_flip_at(n: usize, index: usize) -> Result<Gate> {
    let dim = 1usize << n;
    if index >= dim {
        return Err(Error::argument(format!(
            "index {index} outside a {n}-qubit register"
        )));
    }
    let mut signs = vec![1i8; dim];
    signs[index] = -1;
    Gate::diagonal_phase(signs, (0..n).collect())
}

/// Oracle `R₁`: `−1` on the marked item, `+1` elsewhere.
pub fn grover_oracle(n: usize, alpha: usize) -> Result<Gate> {
    sign_flip_at(n, alpha)
}

/// Reflection `R₂`: `−1` on `|0…0⟩`, `+1` elsewhere.
pub fn grover_zero_reflection(n: usize) -> Result<Gate> {
    sign_flip_at(n, 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroverSpec {
    pub n: usize,
    pub alpha: usize,
    pub k_override: Option<usize>,
}

impl GroverSpec {
    pub fn new(n: usize, alpha: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::size(format!(
                "Grover register of {n} qubits is outside 1..={MAX_QUBITS}"
            )));
        }
        if alpha >= 1 << n {
            return Err(Error::argument(format!(
                "marked item {alpha} outside a {n}-qubit register"
            )));
        }
        Ok(Self {
            n,
            alpha,
            k_override: None,
        })
    }

    pub fn with_iterations(mut self, k: usize) -> Self {
        self.k_override = Some(k);
        self
    }

    pub fn iterations(&self) -> usize {
        self.k_override
            .unwrap_or_else(|| grover_iteration_count(self.n))
    }

    /// Hadamard gates in the whole circuit: `n + 2nk`.
    pub fn hadamard_count(&self) -> usize {
        self.n * (1 + 2 * self.iterations())
    }

    /// Closed-form success of the exact algorithm.
    pub fn exact_success(&self) -> f64 {
        let theta = (0.5f64).powf(self.n as f64 / 2.0).asin();
        ((2 * self.iterations() + 1) as f64 * theta).sin().powi(2)
    }
}

/// The three circuits of an algorithm; `full` is `initial` followed by `rest`.
#[derive(Clone, Debug)]
pub struct AlgorithmCircuits {
    pub initial: Circuit,
    pub rest: Circuit,
    pub full: Circuit,
    /// Qubits `0..layer_qubits` carry the initial Hadamards.
    pub layer_qubits: usize,
}

impl AlgorithmCircuits {
    fn from_parts(initial: Circuit, rest: Circuit, layer_qubits: usize) -> Result<Self> {
        let mut full = initial.clone();
        full.append(&rest)?;
        Ok(Self {
            initial,
            rest,
            full,
            layer_qubits,
        })
    }

    pub fn n(&self) -> usize {
        self.full.n()
    }

    pub fn unitaries(&self) -> Result<AlgorithmUnitaries> {
        AlgorithmUnitaries::new(
            circuit_unitary(&self.full)?,
            circuit_unitary(&self.rest)?,
            circuit_unitary(&self.initial)?,
            self.layer_qubits,
        )
    }
}

/// Grover circuit `(W R₂ W R₁)^k W` with one angle per Hadamard, in order:
/// the initial layer, then per iteration the two inner layers.
pub fn build_grover(spec: &GroverSpec, hadamard_thetas: &[f64]) -> Result<AlgorithmCircuits> {
    let n = spec.n;
    if hadamard_thetas.len() != spec.hadamard_count() {
        return Err(Error::argument(format!(
            "Grover with n={n}, k={} needs {} Hadamard angles, got {}",
            spec.iterations(),
            spec.hadamard_count(),
            hadamard_thetas.len()
        )));
    }
    let (first, inner) = hadamard_thetas.split_at(n);
    let initial = walsh_layer(first)?;
    let oracle = grover_oracle(n, spec.alpha)?;
    let reflect = grover_zero_reflection(n)?;
    let mut rest = Circuit::new(n)?;
    for layers in inner.chunks(2 * n) {
        let (a, b) = layers.split_at(n);
        rest.push(oracle.clone())?;
        rest.append(&walsh_layer(a)?)?;
        rest.push(reflect.clone())?;
        rest.append(&walsh_layer(b)?)?;
    }
    AlgorithmCircuits::from_parts(initial, rest, n)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Order finding for `f(x) = aˣ mod R` with registers of `2L` and `L` qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShorSpec {
    l: usize,
    r: u64,
    a: u64,
}

impl ShorSpec {
    pub fn new(r: u64, a: u64) -> Result<Self> {
        if r < 2 {
            return Err(Error::argument(format!("modulus {r} must be at least 2")));
        }
        if a == 0 || a >= r || gcd(a, r) != 1 {
            return Err(Error::argument(format!(
                "base {a} must lie in (0, {r}) and be coprime to it"
            )));
        }
        let l = (64 - r.leading_zeros()) as usize;
        if 3 * l > MAX_QUBITS {
            return Err(Error::size(format!(
                "modulus {r} needs {} qubits, more than the cap {MAX_QUBITS}",
                3 * l
            )));
        }
        Ok(Self { l, r, a })
    }

    /// Like [`ShorSpec::new`] but also checks a caller-supplied `L`.
    pub fn with_l(l: usize, r: u64, a: u64) -> Result<Self> {
        let spec = Self::new(r, a)?;
        if spec.l != l {
            return Err(Error::argument(format!(
                "L={l} does not match modulus {r}, which needs L={}",
                spec.l
            )));
        }
        Ok(spec)
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    /// Total register width `3L`.
    pub fn n(&self) -> usize {
        3 * self.l
    }

    /// Width `2L` of the first register.
    pub fn first_register(&self) -> usize {
        2 * self.l
    }

    pub fn f(&self, x: u64) -> u64 {
        let mut acc = 1 % self.r;
        let mut base = self.a % self.r;
        let mut e = x;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % self.r;
            }
            base = base * base % self.r;
            e >>= 1;
        }
        acc
    }

    /// Smallest `r > 0` with `aʳ ≡ 1 (mod R)`.
    pub fn period(&self) -> u64 {
        (1..=self.r).find(|&k| self.f(k) == 1).unwrap_or(self.r)
    }

    pub fn phase_count(&self) -> usize {
        qft_phase_count(self.first_register())
    }
}

/// `|x⟩|y⟩ → |x⟩|y ⊕ f(x)⟩` on all `3L` qubits.
pub fn modexp_permutation(spec: &ShorSpec) -> Result<Gate> {
    let l = spec.l;
    let dim = 1usize << (3 * l);
    let low = (1usize << l) - 1;
    let map = (0..dim)
        .map(|i| {
            let x = i >> l;
            (i & !low) | ((i & low) ^ spec.f(x as u64) as usize)
        })
        .collect();
    Gate::permutation(map, (0..3 * l).collect())
}

/// Gate parameters of a Shor circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct ShorParams {
    /// `2L` angles for the initial layer.
    pub initial_thetas: Vec<f64>,
    /// `2L` angles for the Hadamards inside the QFT.
    pub qft_thetas: Vec<f64>,
    /// `L(2L−1)` additive offsets on the QFT controlled phases.
    pub qft_phases: Vec<f64>,
}

impl ShorParams {
    pub fn exact(spec: &ShorSpec) -> Self {
        Self::systematic(spec, FRAC_PI_4)
    }

    /// Every Hadamard at `theta`, QFT phases unperturbed.
    pub fn systematic(spec: &ShorSpec, theta: f64) -> Self {
        let m = spec.first_register();
        Self {
            initial_thetas: vec![theta; m],
            qft_thetas: vec![theta; m],
            qft_phases: vec![0.0; spec.phase_count()],
        }
    }
}

/// Hadamards on register 1, modular exponentiation, then the QFT on register 1.
pub fn build_shor(spec: &ShorSpec, params: &ShorParams) -> Result<AlgorithmCircuits> {
    let m = spec.first_register();
    let n = spec.n();
    if params.initial_thetas.len() != m {
        return Err(Error::argument(format!(
            "initial layer needs {m} angles, got {}",
            params.initial_thetas.len()
        )));
    }
    let initial = walsh_layer(&params.initial_thetas)?.widen(n)?;
    let mut rest = Circuit::new(n)?;
    rest.push(modexp_permutation(spec)?)?;
    rest.append(&qft_circuit_perturbed(
        m,
        &params.qft_thetas,
        &params.qft_phases,
    )?)?;
    AlgorithmCircuits::from_parts(initial, rest, m)
}

/// Register-1 marginal of a distribution over the full `3L`-qubit basis.
pub fn first_register_distribution(spec: &ShorSpec, probs: &[f64]) -> Result<Vec<f64>> {
    if probs.len() != 1 << spec.n() {
        return Err(Error::argument(
            "distribution does not cover the full register",
        ));
    }
    let mut out = vec![0.0; 1 << spec.first_register()];
    for (i, p) in probs.iter().enumerate() {
        out[i >> spec.l] += p;
    }
    Ok(out)
}

/// Dense matrices of an algorithm, as needed for channel construction.
#[derive(Clone, Debug)]
pub struct AlgorithmUnitaries {
    full: Arc<ComplexMatrix>,
    rest: Arc<ComplexMatrix>,
    walsh: Arc<ComplexMatrix>,
    layer_qubits: usize,
    n: usize,
    /// Qubits on which `walsh` swaps bit flips and phase flips exactly,
    /// as masks for (bit flip, phase flip).
    exact: (usize, usize),
}

impl AlgorithmUnitaries {
    pub fn new(
        full: ComplexMatrix,
        rest: ComplexMatrix,
        walsh: ComplexMatrix,
        layer_qubits: usize,
    ) -> Result<Self> {
        let dim = full.rows();
        let n = qubits_for_dim(dim)
            .ok_or_else(|| Error::shape("algorithm dimension is not a power of two"))?;
        if [&full, &rest, &walsh]
            .iter()
            .any(|m| !m.is_square() || m.rows() != dim)
        {
            return Err(Error::shape(
                "algorithm matrices must share one square shape",
            ));
        }
        if layer_qubits > n {
            return Err(Error::argument(format!(
                "{layer_qubits} layer qubits on a {n}-qubit register"
            )));
        }
        let mut exact = (0, 0);
        for q in 0..layer_qubits {
            if intertwines(&walsh, PauliError::BitFlip, q, n) {
                exact.0 |= qubit_mask(q, n);
            }
            if intertwines(&walsh, PauliError::PhaseFlip, q, n) {
                exact.1 |= qubit_mask(q, n);
            }
        }
        Ok(Self {
            full: Arc::new(full),
            rest: Arc::new(rest),
            walsh: Arc::new(walsh),
            layer_qubits,
            n,
            exact,
        })
    }

    pub fn full(&self) -> &ComplexMatrix {
        &self.full
    }

    pub fn rest(&self) -> &ComplexMatrix {
        &self.rest
    }

    pub fn walsh(&self) -> &ComplexMatrix {
        &self.walsh
    }

    pub fn layer_qubits(&self) -> usize {
        self.layer_qubits
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// A channel either in factored form `{U √c_l P_l}` or as explicit operators.
#[derive(Clone, Debug)]
pub enum AlgorithmChannel {
    Factored(FactoredChannel),
    Kraus(KrausChannel),
}

impl AlgorithmChannel {
    pub fn dim(&self) -> usize {
        match self {
            Self::Factored(f) => f.dim(),
            Self::Kraus(k) => k.dim(),
        }
    }

    pub fn kraus_count(&self) -> usize {
        match self {
            Self::Factored(f) => f.kraus_count(),
            Self::Kraus(k) => k.len(),
        }
    }

    pub fn to_kraus(&self) -> Result<KrausChannel> {
        match self {
            Self::Factored(f) => f.to_kraus(),
            Self::Kraus(k) => Ok(k.clone()),
        }
    }

    pub fn interference(&self) -> Result<InterferenceReport> {
        match self {
            Self::Factored(f) => interference_factored(f),
            Self::Kraus(k) => interference_kraus(k),
        }
    }

    pub fn apply_to_basis(&self, index: usize) -> Result<MixedState> {
        match self {
            Self::Factored(f) => f.apply_to_basis(index),
            Self::Kraus(k) => k.apply_to_basis(index),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AlgorithmChannels {
    pub potentially_available: AlgorithmChannel,
    pub actually_used: AlgorithmChannel,
    /// Image of `|0…0⟩` under the potentially available channel.
    pub final_state: MixedState,
}

/// `P W = W P̃` holds for an exact Hadamard on `q`, with `P̃` the dual Pauli.
fn intertwines(w: &ComplexMatrix, kind: PauliError, q: usize, n: usize) -> bool {
    let m = qubit_mask(q, n);
    let dim = w.rows();
    (0..dim).all(|i| {
        (0..dim).all(|j| {
            let (lhs, rhs) = match kind {
                PauliError::BitFlip => {
                    let s = if j & m == 0 { 1.0 } else { -1.0 };
                    (w.get(i ^ m, j), w.get(i, j) * s)
                }
                PauliError::PhaseFlip => {
                    let s = if i & m == 0 { 1.0 } else { -1.0 };
                    (w.get(i, j) * s, w.get(i, j ^ m))
                }
            };
            (lhs - rhs).norm() < 1e-12
        })
    })
}

/// Errors strike just after the initial Hadamard layer.
///
/// The potentially available channel is `{U_rest E_l W}`, the actually used
/// one `{U_rest E_l}`. When the layer is exact on the affected qubits the
/// error commutes through it as the dual Pauli, so the first channel is
/// kept in the factored form `{U_full P̃_l}`.
pub fn decoherence_channels(
    alg: &AlgorithmUnitaries,
    model: &ErrorModel,
) -> Result<AlgorithmChannels> {
    let n = alg.n;
    let dim = 1usize << n;
    if let Some(&q) = model.affected().iter().find(|&&q| q >= alg.layer_qubits) {
        return Err(Error::argument(format!(
            "qubit {q} does not receive an initial Hadamard (only 0..{})",
            alg.layer_qubits
        )));
    }
    let layer = PauliLayer::new(n, model.clone())?;
    let actually_used =
        AlgorithmChannel::Factored(FactoredChannel::new(alg.rest.clone(), layer.clone())?);
    let exact_mask = match model.kind() {
        PauliError::BitFlip => alg.exact.0,
        PauliError::PhaseFlip => alg.exact.1,
    };
    let potentially_available = if layer.mask() & !exact_mask == 0 {
        let dual = layer.with_kind(model.kind().hadamard_dual());
        AlgorithmChannel::Factored(FactoredChannel::new(alg.full.clone(), dual)?)
    } else {
        let count = layer.terms().len();
        if count.saturating_mul(dim * dim) > MAX_EXPLICIT_KRAUS_ENTRIES {
            return Err(Error::size(format!(
                "{count} explicit Kraus operators of dimension {dim} exceed the cap"
            )));
        }
        let errors = layered_error_channel(n, model)?;
        AlgorithmChannel::Kraus(sandwich(&errors, &alg.walsh, &alg.rest)?)
    };
    let final_state = potentially_available.apply_to_basis(0)?;
    Ok(AlgorithmChannels {
        potentially_available,
        actually_used,
        final_state,
    })
}

/// Computational-basis populations of a state.
pub trait Populations {
    fn populations(&self) -> Vec<f64>;
}

impl Populations for StateVector {
    fn populations(&self) -> Vec<f64> {
        self.probabilities()
    }
}

impl Populations for DensityMatrix {
    fn populations(&self) -> Vec<f64> {
        self.probabilities()
    }
}

impl Populations for MixedState {
    fn populations(&self) -> Vec<f64> {
        self.probabilities()
    }
}

/// `S = ⟨α|ρ|α⟩`, clamped to `[0, 1]`.
pub fn grover_success<S: Populations + ?Sized>(state: &S, alpha: usize) -> Result<f64> {
    let pops = state.populations();
    let p = pops
        .get(alpha)
        .ok_or_else(|| Error::argument(format!("marked item {alpha} outside the state")))?;
    Ok(p.clamp(0.0, 1.0))
}

/// `S = 1 − ½ Σ_i |p_i − q_i|`.
pub fn shor_success(ideal: &[f64], observed: &[f64]) -> Result<f64> {
    if ideal.len() != observed.len() {
        return Err(Error::argument(format!(
            "distributions of length {} and {} cannot be compared",
            ideal.len(),
            observed.len()
        )));
    }
    for d in [ideal, observed] {
        let total: f64 = d.iter().sum();
        if (total - 1.0).abs() > 1e-6 || d.iter().any(|&p| p < -STATE_TOL) {
            return Err(Error::argument(format!("distribution sums to {total}")));
        }
    }
    let tv: f64 = ideal
        .iter()
        .zip(observed)
        .map(|(p, q)| (p - q).abs())
        .sum::<f64>()
        / 2.0;
    Ok((1.0 - tv).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::circuit_apply_basis;
    use crate::interference::{interference_circuit, interference_unitary};
    use crate::linalg::check_unitary;

    fn exact_grover(spec: &GroverSpec) -> AlgorithmCircuits {
        build_grover(spec, &vec![FRAC_PI_4; spec.hadamard_count()]).unwrap()
    }

    #[test]
    fn iteration_counts() {
        assert_eq!(grover_iteration_count(2), 1);
        assert_eq!(grover_iteration_count(4), 3);
        assert_eq!(grover_iteration_count(10), 25);
    }

    #[test]
    fn reflections() {
        let o = grover_oracle(2, 3).unwrap().local_matrix();
        let d = ComplexMatrix::from_real(
            4,
            4,
            &[
                1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 1., 0., 0., 0., 0., -1.,
            ],
        )
        .unwrap();
        assert_eq!(o, d);
        assert_eq!(o.matmul(&o).unwrap(), ComplexMatrix::identity(4));
        let o = grover_oracle(1, 0).unwrap().local_matrix();
        assert_eq!(
            o,
            ComplexMatrix::from_real(2, 2, &[-1., 0., 0., 1.]).unwrap()
        );
        let z = grover_zero_reflection(2).unwrap().local_matrix();
        assert_eq!(z.get(0, 0).re, -1.0);
        assert_eq!(z.matmul(&z).unwrap(), ComplexMatrix::identity(4));
        let o = grover_oracle(2, 2).unwrap().local_matrix();
        assert_eq!(z.matmul(&o).unwrap(), o.matmul(&z).unwrap());
    }

    #[test]
    fn exact_grover_success_matches_closed_form() {
        for n in 2..=6 {
            for alpha in 0..1 << n {
                let spec = GroverSpec::new(n, alpha).unwrap();
                let c = exact_grover(&spec);
                let psi = circuit_apply_basis(&c.full, 0).unwrap();
                let s = grover_success(&psi, alpha).unwrap();
                assert!(
                    (s - spec.exact_success()).abs() < 1e-9,
                    "n={n} alpha={alpha}"
                );
            }
        }
        assert!((GroverSpec::new(4, 0).unwrap().exact_success() - 0.9613).abs() < 1e-4);
    }

    #[test]
    fn grover_wrong_angle_count() {
        let spec = GroverSpec::new(4, 1).unwrap();
        assert!(matches!(
            build_grover(&spec, &[FRAC_PI_4; 5]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn grover_interference_independent_of_alpha() {
        let reference = interference_circuit(&exact_grover(&GroverSpec::new(4, 0).unwrap()).full)
            .unwrap()
            .value;
        for alpha in 1..16 {
            let c = exact_grover(&GroverSpec::new(4, alpha).unwrap());
            let v = interference_circuit(&c.full).unwrap().value;
            assert!((v - reference).abs() < 1e-10);
        }
    }

    #[test]
    fn exact_full_unitaries_are_unitary() {
        let c = exact_grover(&GroverSpec::new(4, 5).unwrap());
        assert!(check_unitary(&circuit_unitary(&c.full).unwrap(), 1e-10));
        let spec = ShorSpec::new(3, 2).unwrap();
        let c = build_shor(&spec, &ShorParams::exact(&spec)).unwrap();
        assert!(check_unitary(&circuit_unitary(&c.full).unwrap(), 1e-10));
    }

    #[test]
    fn modexp_values() {
        let spec = ShorSpec::new(3, 2).unwrap();
        assert_eq!(spec.l(), 2);
        assert_eq!(
            (0..4).map(|x| spec.f(x)).collect::<Vec<_>>(),
            vec![1, 2, 1, 2]
        );
        let spec = ShorSpec::new(15, 7).unwrap();
        assert_eq!(spec.l(), 4);
        assert_eq!(
            (0..4).map(|x| spec.f(x)).collect::<Vec<_>>(),
            vec![1, 7, 4, 13]
        );
        let spec = ShorSpec::new(7, 3).unwrap();
        assert_eq!(spec.period(), 6);
        assert_ne!(64 % spec.period(), 0);
    }

    #[test]
    fn modexp_is_xor_extension() {
        let spec = ShorSpec::new(3, 2).unwrap();
        let g = modexp_permutation(&spec).unwrap();
        let crate::gates::GateKind::Permutation(map) = g.kind() else {
            panic!("expected a permutation");
        };
        for x in 0..16usize {
            for y in 0..4usize {
                let i = x * 4 + y;
                assert_eq!(map[i], x * 4 + (y ^ spec.f(x as u64) as usize));
            }
        }
    }

    #[test]
    fn shor_spec_validation() {
        assert!(matches!(ShorSpec::new(15, 5), Err(Error::Argument(_))));
        assert!(matches!(ShorSpec::new(15, 15), Err(Error::Argument(_))));
        assert!(matches!(ShorSpec::new(21, 2), Err(Error::Size(_))));
        assert!(ShorSpec::with_l(3, 3, 2).is_err());
    }

    #[test]
    fn exact_shor_l2_distribution() {
        let spec = ShorSpec::new(3, 2).unwrap();
        let c = build_shor(&spec, &ShorParams::exact(&spec)).unwrap();
        let probs = circuit_apply_basis(&c.full, 0).unwrap().probabilities();
        let total: f64 = probs.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        let reg = first_register_distribution(&spec, &probs).unwrap();
        for (i, p) in reg.iter().enumerate() {
            let expected = if i == 0 || i == 8 { 0.5 } else { 0.0 };
            assert!((p - expected).abs() < 1e-9, "index {i}: {p}");
        }
        assert_eq!(shor_success(&probs, &probs).unwrap(), 1.0);
    }

    #[test]
    fn shor_wrong_parameter_lengths() {
        let spec = ShorSpec::new(3, 2).unwrap();
        let mut p = ShorParams::exact(&spec);
        p.qft_phases.pop();
        assert!(build_shor(&spec, &p).is_err());
        let mut p = ShorParams::exact(&spec);
        p.initial_thetas.push(0.0);
        assert!(build_shor(&spec, &p).is_err());
    }

    #[test]
    fn shor_success_examples() {
        assert_eq!(
            shor_success(&[0.5, 0.5, 0.0, 0.0], &[0.25; 4]).unwrap(),
            0.5
        );
        assert_eq!(shor_success(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!(shor_success(&[1.0], &[0.5, 0.5]).is_err());
        assert!(shor_success(&[0.7, 0.7], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn grover_success_baselines() {
        let rho = DensityMatrix::maximally_mixed(16);
        assert!((grover_success(&rho, 3).unwrap() - 0.0625).abs() < 1e-12);
        let psi = StateVector::basis(16, 3).unwrap();
        assert_eq!(grover_success(&DensityMatrix::pure(&psi), 3).unwrap(), 1.0);
    }

    fn grover_unitaries(n: usize, alpha: usize) -> (GroverSpec, AlgorithmUnitaries) {
        let spec = GroverSpec::new(n, alpha).unwrap();
        (spec, exact_grover(&spec).unitaries().unwrap())
    }

    #[test]
    fn decoherence_at_p_zero_is_the_algorithm() {
        let (_, u) = grover_unitaries(3, 1);
        let model = ErrorModel::new(PauliError::PhaseFlip, 0.0, vec![0, 1, 2]).unwrap();
        let ch = decoherence_channels(&u, &model).unwrap();
        assert_eq!(ch.potentially_available.kraus_count(), 1);
        assert_eq!(ch.actually_used.kraus_count(), 1);
        let pa = ch.potentially_available.to_kraus().unwrap();
        assert!(pa.ops()[0].max_abs_diff(u.full()) < 1e-12);
        let a = ch.potentially_available.interference().unwrap().value;
        assert!((a - interference_unitary(u.full()).unwrap().value).abs() < 1e-12);
    }

    #[test]
    fn factored_pa_matches_explicit_sandwich() {
        let (_, u) = grover_unitaries(3, 6);
        for kind in [PauliError::BitFlip, PauliError::PhaseFlip] {
            for p in [0.2, 0.5, 1.0] {
                let model = ErrorModel::new(kind, p, vec![0, 2]).unwrap();
                let ch = decoherence_channels(&u, &model).unwrap();
                let explicit = sandwich(
                    &layered_error_channel(3, &model).unwrap(),
                    u.walsh(),
                    u.rest(),
                )
                .unwrap();
                let a = ch.potentially_available.interference().unwrap().value;
                let b = interference_kraus(&explicit).unwrap().value;
                assert!((a - b).abs() < 1e-10, "{kind:?} {p}: {a} vs {b}");
                let rho_a = ch.final_state.to_density();
                let rho_b = explicit.apply_to_basis(0).unwrap().to_density();
                assert!(rho_a.matrix().max_abs_diff(rho_b.matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn perturbed_layer_falls_back_to_explicit() {
        let spec = GroverSpec::new(2, 1).unwrap();
        let mut thetas = vec![FRAC_PI_4; spec.hadamard_count()];
        thetas[0] = 0.6;
        let u = build_grover(&spec, &thetas).unwrap().unitaries().unwrap();
        let model = ErrorModel::new(PauliError::BitFlip, 0.3, vec![0, 1]).unwrap();
        let ch = decoherence_channels(&u, &model).unwrap();
        assert!(matches!(
            ch.potentially_available,
            AlgorithmChannel::Kraus(_)
        ));
    }

    #[test]
    fn bit_flips_leave_grover_success_alone() {
        let (spec, u) = grover_unitaries(4, 2);
        for nf in 1..=4 {
            for p in [0.1, 0.5, 0.9, 1.0] {
                let model = ErrorModel::new(PauliError::BitFlip, p, (0..nf).collect()).unwrap();
                let ch = decoherence_channels(&u, &model).unwrap();
                let s = grover_success(&ch.final_state, 2).unwrap();
                assert!((s - spec.exact_success()).abs() < 1e-9);
            }
        }
        let model = ErrorModel::new(PauliError::BitFlip, 0.5, vec![0, 1, 2, 3]).unwrap();
        let ch = decoherence_channels(&u, &model).unwrap();
        assert!(ch.potentially_available.interference().unwrap().value.abs() < 1e-6);
    }

    #[test]
    fn affected_qubits_must_follow_the_layer() {
        let spec = ShorSpec::new(3, 2).unwrap();
        let u = build_shor(&spec, &ShorParams::exact(&spec))
            .unwrap()
            .unitaries()
            .unwrap();
        let model = ErrorModel::new(PauliError::BitFlip, 0.5, vec![4]).unwrap();
        assert!(matches!(
            decoherence_channels(&u, &model),
            Err(Error::Argument(_))
        ));
    }
}
