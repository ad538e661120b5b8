//! Gate set and circuits.
//!
//! Gates are stored symbolically and only materialised as matrices on demand.
//! A [`Circuit`] is compiled into a flat list of index-level kernels before it
//! is applied, so permutation and diagonal gates cost O(N) per state.

use std::f64::consts::{FRAC_PI_4, PI};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    check_qubit_count, check_unitary, gather_bits, qubit_mask, scatter_bits, validate_targets,
    ComplexMatrix, StateVector, C64, UNITARY_TOL,
};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// `H(θ) = [[cos θ, sin θ], [sin θ, −cos θ]]`; θ = π/4 is the Hadamard gate,
/// θ = 0 is σ_z and θ = π/2 is σ_x.
pub fn perturbed_hadamard(theta: f64) -> ComplexMatrix {
    let (s, c) = theta.sin_cos();
    ComplexMatrix::from_raw(
        2,
        2,
        vec![
            C64::new(c, 0.0),
            C64::new(s, 0.0),
            C64::new(s, 0.0),
            C64::new(-c, 0.0),
        ],
    )
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    PerturbedHadamard(f64),
    PauliX,
    PauliZ,
    /// `diag(1, 1, 1, e^{iφ})` on `[control, target]`.
    ControlledPhase(f64),
    /// Basis permutation of the local index space: `|k⟩ → |map[k]⟩`.
    Permutation(Vec<usize>),
    /// Diagonal of ±1 over the local index space.
    DiagonalPhase(Vec<i8>),
    RawUnitary(ComplexMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    kind: GateKind,
    targets: Vec<usize>,
}

impl Gate {
    pub fn perturbed_hadamard(theta: f64, qubit: usize) -> Self {
        Self {
            kind: GateKind::PerturbedHadamard(theta),
            targets: vec![qubit],
        }
    }

    pub fn hadamard(qubit: usize) -> Self {
        Self::perturbed_hadamard(FRAC_PI_4, qubit)
    }

    pub fn pauli_x(qubit: usize) -> Self {
        Self {
            kind: GateKind::PauliX,
            targets: vec![qubit],
        }
    }

    pub fn pauli_z(qubit: usize) -> Self {
        Self {
            kind: GateKind::PauliZ,
            targets: vec![qubit],
        }
    }

    pub fn controlled_phase(phi: f64, control: usize, target: usize) -> Result<Self> {
        if control == target {
            return Err(Error::argument(
                "controlled phase needs two distinct qubits",
            ));
        }
        Ok(Self {
            kind: GateKind::ControlledPhase(phi),
            targets: vec![control, target],
        })
    }

    pub fn permutation(map: Vec<usize>, targets: Vec<usize>) -> Result<Self> {
        if map.len() != 1 << targets.len() {
            return Err(Error::shape(format!(
                "permutation of length {} does not match {} target qubits",
                map.len(),
                targets.len()
            )));
        }
        let mut seen = vec![false; map.len()];
        for &m in &map {
            if m >= map.len() || std::mem::replace(&mut seen[m], true) {
                return Err(Error::argument("permutation map is not a bijection"));
            }
        }
        Ok(Self {
            kind: GateKind::Permutation(map),
            targets,
        })
    }

    pub fn diagonal_phase(signs: Vec<i8>, targets: Vec<usize>) -> Result<Self> {
        if signs.len() != 1 << targets.len() {
            return Err(Error::shape(format!(
                "{} diagonal entries do not match {} target qubits",
                signs.len(),
                targets.len()
            )));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::argument("diagonal phase entries must be +1 or -1"));
        }
        Ok(Self {
            kind: GateKind::DiagonalPhase(signs),
            targets,
        })
    }

    pub fn raw_unitary(matrix: ComplexMatrix, targets: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != 1 << targets.len() {
            return Err(Error::shape(format!(
                "{}x{} matrix does not act on {} qubits",
                matrix.rows(),
                matrix.cols(),
                targets.len()
            )));
        }
        if !check_unitary(&matrix, UNITARY_TOL) {
            return Err(Error::validation("raw gate matrix is not unitary"));
        }
        Ok(Self {
            kind: GateKind::RawUnitary(matrix),
            targets,
        })
    }

    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    /// Matrix of the gate on its own targets (`2^k × 2^k`).
    pub fn local_matrix(&self) -> ComplexMatrix {
        match &self.kind {
            GateKind::PerturbedHadamard(theta) => perturbed_hadamard(*theta),
            GateKind::PauliX => ComplexMatrix::from_raw(2, 2, vec![ZERO, ONE, ONE, ZERO]),
            GateKind::PauliZ => ComplexMatrix::diagonal(&[ONE, -ONE]),
            GateKind::ControlledPhase(phi) => {
                ComplexMatrix::diagonal(&[ONE, ONE, ONE, C64::from_polar(1.0, *phi)])
            }
            GateKind::Permutation(map) => {
                let mut m = ComplexMatrix::zeros(map.len(), map.len());
                for (k, &to) in map.iter().enumerate() {
                    m.set(to, k, ONE);
                }
                m
            }
            GateKind::DiagonalPhase(signs) => ComplexMatrix::diagonal(
                &signs
                    .iter()
                    .map(|&s| C64::new(f64::from(s), 0.0))
                    .collect::<Vec<_>>(),
            ),
            GateKind::RawUnitary(m) => m.clone(),
        }
    }
}

/// Ordered list of gate applications on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    ops: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::argument("a circuit needs at least one qubit"));
        }
        check_qubit_count(n)?;
        Ok(Self { n, ops: Vec::new() })
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        validate_targets(&gate.targets, self.n)?;
        self.ops.push(gate);
        Ok(())
    }

    pub fn with(mut self, gate: Gate) -> Result<Self> {
        self.push(gate)?;
        Ok(self)
    }

    /// Appends every gate of `other` (applied after the gates already present).
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n > self.n {
            return Err(Error::argument(format!(
                "cannot append a {}-qubit circuit to a {}-qubit one",
                other.n, self.n
            )));
        }
        self.ops.extend(other.ops.iter().cloned());
        Ok(())
    }

    /// Same gates on a wider register; qubit indices are kept, so the
    /// original qubits become the leading (most significant) ones.
    pub fn widen(&self, n: usize) -> Result<Self> {
        if n < self.n {
            return Err(Error::argument("cannot narrow a circuit"));
        }
        check_qubit_count(n)?;
        Ok(Self {
            n,
            ops: self.ops.clone(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    fn compile(&self) -> Vec<Kernel> {
        self.ops
            .iter()
            .map(|g| Kernel::compile(g, self.n))
            .collect()
    }
}

/// Index-level form of a gate on the full register.
enum Kernel {
    Single {
        mask: usize,
        m: [C64; 4],
    },
    Flip(usize),
    Negate(usize),
    Phase {
        mask: usize,
        factor: C64,
    },
    /// `dest[i]` is where amplitude `i` moves to.
    Permute(Vec<usize>),
    Diagonal(Vec<f64>),
    Dense {
        masks: Vec<usize>,
        m: ComplexMatrix,
    },
}

impl Kernel {
    fn compile(gate: &Gate, n: usize) -> Self {
        let dim = 1usize << n;
        let masks: Vec<usize> = gate.targets.iter().map(|&q| qubit_mask(q, n)).collect();
        match &gate.kind {
            GateKind::PerturbedHadamard(theta) => {
                let h = perturbed_hadamard(*theta);
                Kernel::Single {
                    mask: masks[0],
                    m: [h.get(0, 0), h.get(0, 1), h.get(1, 0), h.get(1, 1)],
                }
            }
            GateKind::PauliX => Kernel::Flip(masks[0]),
            GateKind::PauliZ => Kernel::Negate(masks[0]),
            GateKind::ControlledPhase(phi) => Kernel::Phase {
                mask: masks[0] | masks[1],
                factor: C64::from_polar(1.0, *phi),
            },
            GateKind::Permutation(map) => Kernel::Permute(
                (0..dim)
                    .map(|i| scatter_bits(i, map[gather_bits(i, &masks)], &masks))
                    .collect(),
            ),
            GateKind::DiagonalPhase(signs) => Kernel::Diagonal(
                (0..dim)
                    .map(|i| f64::from(signs[gather_bits(i, &masks)]))
                    .collect(),
            ),
            GateKind::RawUnitary(m) if m.rows() == 2 => Kernel::Single {
                mask: masks[0],
                m: [m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)],
            },
            GateKind::RawUnitary(m) => Kernel::Dense {
                masks,
                m: m.clone(),
            },
        }
    }

    fn apply(&self, v: &mut [C64], scratch: &mut Vec<C64>) {
        match self {
            Kernel::Single { mask, m } => {
                for i in 0..v.len() {
                    if i & mask == 0 {
                        let j = i | mask;
                        let (x, y) = (v[i], v[j]);
                        v[i] = m[0] * x + m[1] * y;
                        v[j] = m[2] * x + m[3] * y;
                    }
                }
            }
            Kernel::Flip(mask) => {
                for i in 0..v.len() {
                    if i & mask == 0 {
                        v.swap(i, i | mask);
                    }
                }
            }
            Kernel::Negate(mask) => {
                for (i, z) in v.iter_mut().enumerate() {
                    if i & mask != 0 {
                        *z = -*z;
                    }
                }
            }
            Kernel::Phase { mask, factor } => {
                for (i, z) in v.iter_mut().enumerate() {
                    if i & mask == *mask {
                        *z *= factor;
                    }
                }
            }
            Kernel::Permute(dest) => {
                scratch.clear();
                scratch.extend_from_slice(v);
                for (i, &d) in dest.iter().enumerate() {
                    v[d] = scratch[i];
                }
            }
            Kernel::Diagonal(d) => {
                for (z, &s) in v.iter_mut().zip(d) {
                    *z *= s;
                }
            }
            Kernel::Dense { masks, m } => {
                let all: usize = masks.iter().fold(0, |a, &b| a | b);
                let local_dim = m.rows();
                let mut local = vec![ZERO; local_dim];
                for base in 0..v.len() {
                    if base & all != 0 {
                        continue;
                    }
                    for (k, slot) in local.iter_mut().enumerate() {
                        *slot = v[scatter_bits(base, k, masks)];
                    }
                    for r in 0..local_dim {
                        v[scatter_bits(base, r, masks)] =
                            m.row(r).iter().zip(&local).map(|(a, b)| a * b).sum();
                    }
                }
            }
        }
    }
}

fn run_kernels(kernels: &[Kernel], v: &mut [C64]) {
    let mut scratch = Vec::new();
    for k in kernels {
        k.apply(v, &mut scratch);
    }
}

/// Applies `c` gate by gate to `psi` without forming the circuit matrix.
pub fn circuit_apply(c: &Circuit, psi: &StateVector) -> Result<StateVector> {
    if psi.dim() != c.dim() {
        return Err(Error::argument(format!(
            "state of dimension {} does not match {}-qubit circuit",
            psi.dim(),
            c.n
        )));
    }
    let mut amps = psi.amplitudes().to_vec();
    run_kernels(&c.compile(), &mut amps);
    Ok(StateVector::from_raw(amps))
}

/// Applies `c` to the computational basis state `|index⟩`.
pub fn circuit_apply_basis(c: &Circuit, index: usize) -> Result<StateVector> {
    circuit_apply(c, &StateVector::basis(c.dim(), index)?)
}

/// Evaluates `f(j, U|j⟩)` for every column of the circuit matrix without
/// storing the matrix; results are returned in column order.
pub(crate) fn map_columns<T, F>(c: &Circuit, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &[C64]) -> T + Sync,
{
    check_qubit_count(c.n)?;
    let dim = c.dim();
    let kernels = c.compile();
    Ok((0..dim)
        .into_par_iter()
        .map_init(
            || vec![ZERO; dim],
            |col, j| {
                col.fill(ZERO);
                col[j] = ONE;
                run_kernels(&kernels, col);
                f(j, col)
            },
        )
        .collect())
}

/// Full `2^n × 2^n` matrix of the circuit; later gates multiply from the left.
pub fn circuit_unitary(c: &Circuit) -> Result<ComplexMatrix> {
    check_qubit_count(c.n)?;
    let dim = c.dim();
    let kernels = c.compile();
    // Column-major working buffer: column j is the image of |j⟩.
    let mut columns = vec![ZERO; dim * dim];
    columns
        .par_chunks_mut(dim)
        .enumerate()
        .for_each(|(j, col)| {
            col[j] = ONE;
            run_kernels(&kernels, col);
        });
    let mut data = vec![ZERO; dim * dim];
    data.par_chunks_mut(dim).enumerate().for_each(|(i, row)| {
        for (j, z) in row.iter_mut().enumerate() {
            *z = columns[j * dim + i];
        }
    });
    Ok(ComplexMatrix::from_raw(dim, dim, data))
}

/// `H(θ_q)` on every qubit `q`, in ascending qubit order.
pub fn walsh_layer(thetas: &[f64]) -> Result<Circuit> {
    if thetas.is_empty() {
        return Err(Error::argument("walsh layer needs at least one angle"));
    }
    let mut c = Circuit::new(thetas.len())?;
    for (q, &theta) in thetas.iter().enumerate() {
        c.push(Gate::perturbed_hadamard(theta, q))?;
    }
    Ok(c)
}

/// Number of controlled-phase gates in the `m`-qubit QFT.
pub fn qft_phase_count(m: usize) -> usize {
    m * m.saturating_sub(1) / 2
}

/// Exact-Hadamard QFT with additive controlled-phase perturbations.
pub fn qft_circuit(m: usize, phase_perturbations: &[f64]) -> Result<Circuit> {
    qft_circuit_perturbed(m, &vec![FRAC_PI_4; m], phase_perturbations)
}

/// QFT on `m` qubits whose unitary is `F_{jk} = e^{2πi jk/2^m} / √2^m`.
///
/// For each qubit `j` in ascending order: `H(θ_j)`, then a controlled phase
/// `π/2^d + δ` from every qubit `j + d` (d = 1, 2, …). The perturbations δ are
/// consumed in exactly that order. A final permutation reverses the qubit
/// order of the register.
pub fn qft_circuit_perturbed(
    m: usize,
    hadamard_thetas: &[f64],
    phase_perturbations: &[f64],
) -> Result<Circuit> {
    if hadamard_thetas.len() != m {
        return Err(Error::argument(format!(
            "QFT on {m} qubits needs {m} Hadamard angles, got {}",
            hadamard_thetas.len()
        )));
    }
    if phase_perturbations.len() != qft_phase_count(m) {
        return Err(Error::argument(format!(
            "QFT on {m} qubits needs {} phase perturbations, got {}",
            qft_phase_count(m),
            phase_perturbations.len()
        )));
    }
    let mut c = Circuit::new(m)?;
    let mut deltas = phase_perturbations.iter();
    for (j, &theta) in hadamard_thetas.iter().enumerate() {
        c.push(Gate::perturbed_hadamard(theta, j))?;
        for d in 1..m - j {
            let delta = deltas.next().copied().unwrap_or(0.0);
            let phi = PI / f64::from(1u32 << d) + delta;
            c.push(Gate::controlled_phase(phi, j + d, j)?)?;
        }
    }
    if m > 1 {
        let reversal = (0..1usize << m).map(|k| reverse_bits(k, m)).collect();
        c.push(Gate::permutation(reversal, (0..m).collect())?)?;
    }
    Ok(c)
}

fn reverse_bits(k: usize, width: usize) -> usize {
    (0..width).fold(0, |acc, b| (acc << 1) | ((k >> b) & 1))
}
