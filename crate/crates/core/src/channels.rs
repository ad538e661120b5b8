//! Kraus channels for bit-flip and phase-flip decoherence.
//!
//! Two representations are provided. [`KrausChannel`] stores every operator
//! explicitly and is what the reference formulas consume. [`FactoredChannel`]
//! keeps a unitary `U` together with a [`PauliLayer`] so that the operators
//! `U · √c_l P_l` never have to be materialised; this is the form used for
//! large registers.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    check_unitary, qubit_mask, ComplexMatrix, DensityMatrix, StateVector, C64, STATE_TOL,
    UNITARY_TOL,
};

/// Largest number of affected qubits (and hence `2^{n_f}` Kraus operators).
pub const MAX_AFFECTED: usize = 20;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliError {
    /// σ_x with probability p.
    BitFlip,
    /// σ_z with probability p.
    PhaseFlip,
}

impl PauliError {
    pub fn matrix(self) -> ComplexMatrix {
        match self {
            PauliError::BitFlip => ComplexMatrix::from_raw(2, 2, vec![ZERO, ONE, ONE, ZERO]),
            PauliError::PhaseFlip => ComplexMatrix::diagonal(&[ONE, -ONE]),
        }
    }

    /// Pauli obtained by conjugating with an exact Hadamard.
    pub fn hadamard_dual(self) -> Self {
        match self {
            PauliError::BitFlip => PauliError::PhaseFlip,
            PauliError::PhaseFlip => PauliError::BitFlip,
        }
    }
}

impl fmt::Display for PauliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PauliError::BitFlip => "bitflip",
            PauliError::PhaseFlip => "phaseflip",
        })
    }
}

impl FromStr for PauliError {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "bitflip" | "x" => Ok(PauliError::BitFlip),
            "phaseflip" | "z" => Ok(PauliError::PhaseFlip),
            other => Err(Error::argument(format!("unknown error kind `{other}`"))),
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::argument(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// Which qubits suffer which error, and how often.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorModel {
    kind: PauliError,
    p: f64,
    affected: Vec<usize>,
}

impl ErrorModel {
    pub fn new(kind: PauliError, p: f64, affected: Vec<usize>) -> Result<Self> {
        check_probability(p)?;
        let mut sorted = affected.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::argument("affected qubits must be distinct"));
        }
        if affected.len() > MAX_AFFECTED {
            return Err(Error::size(format!(
                "{} affected qubits exceeds the cap of {MAX_AFFECTED}",
                affected.len()
            )));
        }
        Ok(Self { kind, p, affected })
    }

    pub fn kind(&self) -> PauliError {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn affected(&self) -> &[usize] {
        &self.affected
    }
}

/// Trace-preserving channel given by explicit Kraus operators.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Checks shapes and completeness `Σ E†E = 1` within 1e-9.
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let ch = Self::from_ops_unchecked(ops)?;
        let err = ch.completeness_error();
        if err > STATE_TOL {
            return Err(Error::validation(format!(
                "Kraus operators violate completeness by {err:e}"
            )));
        }
        Ok(ch)
    }

    fn from_ops_unchecked(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::argument("a channel needs at least one Kraus operator"))?;
        let dim = first.rows();
        if ops.iter().any(|e| e.rows() != dim || e.cols() != dim) {
            return Err(Error::shape(
                "Kraus operators must all be square of equal size",
            ));
        }
        Ok(Self { dim, ops })
    }

    /// Single-operator channel.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        if !check_unitary(&u, UNITARY_TOL) {
            return Err(Error::validation("operator is not unitary"));
        }
        Self::from_ops_unchecked(vec![u])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Largest entry of `|Σ E†E − 1|`.
    pub fn completeness_error(&self) -> f64 {
        let n = self.dim;
        // (E†E)_{jk} = Σ_i conj(E_ij) E_ik
        let mut sum = vec![ZERO; n * n];
        for e in &self.ops {
            for i in 0..n {
                let row = e.row(i);
                for (j, a) in row.iter().enumerate() {
                    let a = a.conj();
                    if a == ZERO {
                        continue;
                    }
                    for (s, b) in sum[j * n..(j + 1) * n].iter_mut().zip(row) {
                        *s += a * b;
                    }
                }
            }
        }
        let acc = ComplexMatrix::from_raw(n, n, sum);
        acc.max_abs_diff(&ComplexMatrix::identity(n))
    }

    /// Outputs `E_l |index⟩` as a weighted ensemble of pure states.
    pub fn apply_to_basis(&self, index: usize) -> Result<MixedState> {
        if index >= self.dim {
            return Err(Error::argument(format!("basis index {index} out of range")));
        }
        let members = self
            .ops
            .iter()
            .filter_map(|e| {
                let col = e.column(index);
                let w: f64 = col.iter().map(|z| z.norm_sqr()).sum();
                (w > 0.0).then(|| StateVector::normalized(col).map(|s| (w, s)))
            })
            .collect::<Result<Vec<_>>>()?;
        MixedState::new(members)
    }
}

/// `{√(1−p)·1, √p·σ}`; zero-weight operators are dropped.
pub fn pauli_error_kraus(kind: PauliError, p: f64) -> Result<KrausChannel> {
    check_probability(p)?;
    let mut ops = Vec::with_capacity(2);
    if p < 1.0 {
        ops.push(ComplexMatrix::identity(2).scale(C64::new((1.0 - p).sqrt(), 0.0)));
    }
    if p > 0.0 {
        ops.push(kind.matrix().scale(C64::new(p.sqrt(), 0.0)));
    }
    KrausChannel::new(ops)
}

/// Tensor-product Pauli channel on `n` qubits acting on the affected ones.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliLayer {
    n: usize,
    model: ErrorModel,
}

/// One operator `√weight · P` of a [`PauliLayer`]; `flips` is the basis-index
/// mask of qubits carrying the Pauli.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliTerm {
    pub weight: f64,
    pub flips: usize,
}

impl PauliLayer {
    pub fn new(n: usize, model: ErrorModel) -> Result<Self> {
        crate::linalg::check_qubit_count(n)?;
        if let Some(&q) = model.affected.iter().find(|&&q| q >= n) {
            return Err(Error::argument(format!(
                "affected qubit {q} out of range for {n} qubits"
            )));
        }
        Ok(Self { n, model })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn model(&self) -> &ErrorModel {
        &self.model
    }

    pub fn kind(&self) -> PauliError {
        self.model.kind
    }

    pub fn p(&self) -> f64 {
        self.model.p
    }

    /// Union of the affected qubits' basis-index bits.
    pub fn mask(&self) -> usize {
        self.model
            .affected
            .iter()
            .fold(0, |m, &q| m | qubit_mask(q, self.n))
    }

    /// Same layer with a different Pauli.
    pub fn with_kind(&self, kind: PauliError) -> Self {
        Self {
            n: self.n,
            model: ErrorModel {
                kind,
                ..self.model.clone()
            },
        }
    }

    /// Non-zero terms in binary subset order: bit `b` of the subset index set
    /// means qubit `affected[b]` carries the Pauli.
    pub fn terms(&self) -> Vec<PauliTerm> {
        let affected = &self.model.affected;
        let p = self.model.p;
        (0..1usize << affected.len())
            .filter_map(|subset| {
                let mut weight = 1.0;
                let mut flips = 0;
                for (b, &q) in affected.iter().enumerate() {
                    if (subset >> b) & 1 == 1 {
                        weight *= p;
                        flips |= qubit_mask(q, self.n);
                    } else {
                        weight *= 1.0 - p;
                    }
                }
                (weight > 0.0).then_some(PauliTerm { weight, flips })
            })
            .collect()
    }

    /// Explicit `√c · P` for one term.
    pub fn term_matrix(&self, term: PauliTerm) -> ComplexMatrix {
        let dim = self.dim();
        let amp = term.weight.sqrt();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for k in 0..dim {
            match self.model.kind {
                PauliError::BitFlip => m.set(k ^ term.flips, k, C64::new(amp, 0.0)),
                PauliError::PhaseFlip => {
                    let sign = if (k & term.flips).count_ones().is_multiple_of(2) {
                        1.0
                    } else {
                        -1.0
                    };
                    m.set(k, k, C64::new(sign * amp, 0.0));
                }
            }
        }
        m
    }

    pub fn to_kraus(&self) -> Result<KrausChannel> {
        KrausChannel::from_ops_unchecked(
            self.terms()
                .into_iter()
                .map(|t| self.term_matrix(t))
                .collect(),
        )
    }
}

/// All `2^{n_f}` products of `{√(1−p)·1, √p·σ}` over the affected qubits,
/// identity elsewhere.
pub fn layered_error_channel(n: usize, model: &ErrorModel) -> Result<KrausChannel> {
    PauliLayer::new(n, model.clone())?.to_kraus()
}

/// `{post · E_l · pre}`.
pub fn sandwich(
    ch: &KrausChannel,
    pre: &ComplexMatrix,
    post: &ComplexMatrix,
) -> Result<KrausChannel> {
    for (name, m) in [("pre", pre), ("post", post)] {
        if !m.is_square() || m.rows() != ch.dim {
            return Err(Error::argument(format!(
                "{name} operator is {}x{}, channel dimension is {}",
                m.rows(),
                m.cols(),
                ch.dim
            )));
        }
        if !check_unitary(m, UNITARY_TOL) {
            return Err(Error::validation(format!("{name} operator is not unitary")));
        }
    }
    let ops = ch
        .ops
        .iter()
        .map(|e| post.matmul(e)?.matmul(pre))
        .collect::<Result<Vec<_>>>()?;
    KrausChannel::from_ops_unchecked(ops)
}

/// `ρ' = Σ_l E_l ρ E_l†`.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != ch.dim {
        return Err(Error::argument(format!(
            "density matrix of dimension {} does not match channel dimension {}",
            rho.dim(),
            ch.dim
        )));
    }
    let n = ch.dim;
    let mut acc = ComplexMatrix::zeros(n, n);
    for e in &ch.ops {
        acc = acc.add(&e.matmul(rho.matrix())?.matmul(&e.adjoint())?)?;
    }
    Ok(DensityMatrix::from_matrix_unchecked(acc))
}

/// Channel whose Kraus operators are `U · √c_l P_l` for the terms of a Pauli layer.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredChannel {
    unitary: Arc<ComplexMatrix>,
    layer: PauliLayer,
}

impl FactoredChannel {
    pub fn new(unitary: impl Into<Arc<ComplexMatrix>>, layer: PauliLayer) -> Result<Self> {
        let unitary = unitary.into();
        if !unitary.is_square() || unitary.rows() != layer.dim() {
            return Err(Error::argument(format!(
                "{}x{} unitary does not match a {}-qubit layer",
                unitary.rows(),
                unitary.cols(),
                layer.n()
            )));
        }
        Ok(Self { unitary, layer })
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn layer(&self) -> &PauliLayer {
        &self.layer
    }

    pub fn dim(&self) -> usize {
        self.unitary.rows()
    }

    pub fn kraus_count(&self) -> usize {
        self.layer.terms().len()
    }

    /// Materialises every Kraus operator; only sensible for small registers.
    pub fn to_kraus(&self) -> Result<KrausChannel> {
        let ops = self
            .layer
            .terms()
            .into_iter()
            .map(|t| self.unitary.matmul(&self.layer.term_matrix(t)))
            .collect::<Result<Vec<_>>>()?;
        KrausChannel::from_ops_unchecked(ops)
    }

    /// Image of `|index⟩⟨index|` as an ensemble of columns of `U`.
    pub fn apply_to_basis(&self, index: usize) -> Result<MixedState> {
        if index >= self.dim() {
            return Err(Error::argument(format!("basis index {index} out of range")));
        }
        // Terms that send |index⟩ to the same column (up to sign) give the same state.
        let mut by_column: Vec<(usize, f64)> = Vec::new();
        for t in self.layer.terms() {
            let col = match self.layer.kind() {
                PauliError::BitFlip => index ^ t.flips,
                PauliError::PhaseFlip => index,
            };
            match by_column.iter_mut().find(|(c, _)| *c == col) {
                Some((_, w)) => *w += t.weight,
                None => by_column.push((col, t.weight)),
            }
        }
        let members = by_column
            .into_iter()
            .map(|(col, w)| Ok((w, StateVector::normalized(self.unitary.column(col))?)))
            .collect::<Result<Vec<_>>>()?;
        MixedState::new(members)
    }
}

/// Finite ensemble `Σ_j w_j |ψ_j⟩⟨ψ_j|`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedState {
    members: Vec<(f64, StateVector)>,
}

impl MixedState {
    pub fn new(members: Vec<(f64, StateVector)>) -> Result<Self> {
        let dim = members
            .first()
            .map(|(_, s)| s.dim())
            .ok_or_else(|| Error::argument("an ensemble needs at least one member"))?;
        if members.iter().any(|(w, s)| *w < 0.0 || s.dim() != dim) {
            return Err(Error::argument(
                "ensemble weights must be non-negative with equal dimensions",
            ));
        }
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::validation(format!(
                "ensemble weights sum to {total}"
            )));
        }
        Ok(Self { members })
    }

    pub fn pure(psi: StateVector) -> Self {
        Self {
            members: vec![(1.0, psi)],
        }
    }

    pub fn dim(&self) -> usize {
        self.members[0].1.dim()
    }

    pub fn members(&self) -> &[(f64, StateVector)] {
        &self.members
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (w, psi) in &self.members {
            for (o, z) in out.iter_mut().zip(psi.amplitudes()) {
                *o += w * z.norm_sqr();
            }
        }
        out
    }

    pub fn to_density(&self) -> DensityMatrix {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for (w, psi) in &self.members {
            let a = psi.amplitudes();
            for i in 0..n {
                for j in 0..n {
                    m.set(i, j, m.get(i, j) + a[i] * a[j].conj() * *w);
                }
            }
        }
        DensityMatrix::from_matrix_unchecked(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{circuit_unitary, walsh_layer};
    use crate::linalg::evolve_density;
    use std::f64::consts::FRAC_PI_4;

    fn plus_state() -> DensityMatrix {
        DensityMatrix::from_matrix(ComplexMatrix::from_real(2, 2, &[0.5; 4]).unwrap()).unwrap()
    }

    #[test]
    fn single_qubit_kraus_examples() {
        let id = pauli_error_kraus(PauliError::BitFlip, 0.0).unwrap();
        assert_eq!(id.ops(), &[ComplexMatrix::identity(2)]);

        let z = pauli_error_kraus(PauliError::PhaseFlip, 1.0).unwrap();
        assert_eq!(z.ops(), &[PauliError::PhaseFlip.matrix()]);

        let half = pauli_error_kraus(PauliError::BitFlip, 0.5).unwrap();
        assert_eq!(half.len(), 2);
        assert!(half.completeness_error() < 1e-15);

        assert!(matches!(
            pauli_error_kraus(PauliError::BitFlip, 1.5),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn layered_channel_examples() {
        let p = 0.3;
        let model = ErrorModel::new(PauliError::BitFlip, p, vec![0]).unwrap();
        let ch = layered_error_channel(2, &model).unwrap();
        assert_eq!(ch.len(), 2);
        let expect0 = ComplexMatrix::identity(4).scale(C64::new((1.0 - p).sqrt(), 0.0));
        let expect1 =
            crate::linalg::kron(&PauliError::BitFlip.matrix(), &ComplexMatrix::identity(2))
                .unwrap()
                .scale(C64::new(p.sqrt(), 0.0));
        assert!(ch.ops()[0].max_abs_diff(&expect0) < 1e-15);
        assert!(ch.ops()[1].max_abs_diff(&expect1) < 1e-15);

        for kind in [PauliError::BitFlip, PauliError::PhaseFlip] {
            let all = ErrorModel::new(kind, 0.2, vec![0, 1, 2, 3]).unwrap();
            let ch = layered_error_channel(4, &all).unwrap();
            assert_eq!(ch.len(), 16);
            assert!(ch.completeness_error() < 1e-9);
        }

        let none = ErrorModel::new(PauliError::PhaseFlip, 0.4, vec![]).unwrap();
        assert_eq!(
            layered_error_channel(3, &none).unwrap().ops(),
            &[ComplexMatrix::identity(8)]
        );
    }

    #[test]
    fn layered_channel_rejects_bad_models() {
        assert!(ErrorModel::new(PauliError::BitFlip, 0.1, vec![1, 1]).is_err());
        assert!(ErrorModel::new(PauliError::BitFlip, -0.1, vec![0]).is_err());
        let big: Vec<usize> = (0..21).collect();
        assert!(matches!(
            ErrorModel::new(PauliError::BitFlip, 0.1, big),
            Err(Error::Size(_))
        ));
        let model = ErrorModel::new(PauliError::BitFlip, 0.1, vec![3]).unwrap();
        assert!(layered_error_channel(2, &model).is_err());
    }

    #[test]
    fn sandwich_examples() {
        let u = circuit_unitary(&walsh_layer(&[0.3, 1.0]).unwrap()).unwrap();
        let v = circuit_unitary(&walsh_layer(&[FRAC_PI_4, 0.7]).unwrap()).unwrap();
        let id = KrausChannel::unitary(ComplexMatrix::identity(4)).unwrap();
        let s = sandwich(&id, &u, &v).unwrap();
        assert!(s.ops()[0].max_abs_diff(&v.matmul(&u).unwrap()) < 1e-14);

        let model = ErrorModel::new(PauliError::BitFlip, 0.0, vec![0, 1]).unwrap();
        let s = sandwich(&layered_error_channel(2, &model).unwrap(), &u, &v).unwrap();
        assert_eq!(s.len(), 1);

        let model = ErrorModel::new(PauliError::PhaseFlip, 0.35, vec![0, 1]).unwrap();
        let s = sandwich(&layered_error_channel(2, &model).unwrap(), &u, &v).unwrap();
        assert!(s.completeness_error() < 1e-9);

        assert!(sandwich(&id, &ComplexMatrix::identity(2), &v).is_err());
    }

    #[test]
    fn apply_channel_examples() {
        let dephase = pauli_error_kraus(PauliError::PhaseFlip, 0.5).unwrap();
        let out = apply_channel(&dephase, &plus_state()).unwrap();
        assert!(
            out.matrix()
                .max_abs_diff(&ComplexMatrix::identity(2).scale(C64::new(0.5, 0.0)))
                < 1e-15
        );

        let flip = pauli_error_kraus(PauliError::BitFlip, 0.5).unwrap();
        let out = apply_channel(&flip, &plus_state()).unwrap();
        assert!(out.matrix().max_abs_diff(plus_state().matrix()) < 1e-15);
        assert!((out.trace() - 1.0).abs() < 1e-9);
        out.validate().unwrap();
    }

    #[test]
    fn single_op_channel_matches_unitary_evolution() {
        let u = circuit_unitary(&walsh_layer(&[0.4, 1.2]).unwrap()).unwrap();
        let ch = KrausChannel::unitary(u.clone()).unwrap();
        let rho = DensityMatrix::pure(
            &StateVector::normalized(vec![
                C64::new(1.0, 0.0),
                C64::new(0.0, 2.0),
                C64::new(-1.0, 0.5),
                C64::new(0.3, 0.0),
            ])
            .unwrap(),
        );
        let a = apply_channel(&ch, &rho).unwrap();
        let b = evolve_density(&rho, &u).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-15);
    }

    #[test]
    fn factored_matches_explicit_kraus() {
        let u = circuit_unitary(&walsh_layer(&[0.4, 1.2, 0.1]).unwrap()).unwrap();
        for kind in [PauliError::BitFlip, PauliError::PhaseFlip] {
            let model = ErrorModel::new(kind, 0.3, vec![2, 0]).unwrap();
            let layer = PauliLayer::new(3, model.clone()).unwrap();
            let fc = FactoredChannel::new(u.clone(), layer).unwrap();
            let explicit = sandwich(
                &layered_error_channel(3, &model).unwrap(),
                &ComplexMatrix::identity(8),
                &u,
            )
            .unwrap();
            let k = fc.to_kraus().unwrap();
            assert_eq!(k.len(), explicit.len());
            for (a, b) in k.ops().iter().zip(explicit.ops()) {
                assert!(a.max_abs_diff(b) < 1e-14);
            }
            for idx in [0, 5] {
                let pa = fc.apply_to_basis(idx).unwrap().probabilities();
                let pb = explicit.apply_to_basis(idx).unwrap().probabilities();
                for (x, y) in pa.iter().zip(&pb) {
                    assert!((x - y).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn mixed_state_density_agrees_with_channel() {
        let model = ErrorModel::new(PauliError::BitFlip, 0.25, vec![0, 1]).unwrap();
        let ch = layered_error_channel(2, &model).unwrap();
        let w = circuit_unitary(&walsh_layer(&[0.5, 0.9]).unwrap()).unwrap();
        let ch = sandwich(&ch, &ComplexMatrix::identity(4), &w).unwrap();
        let ens = ch.apply_to_basis(1).unwrap().to_density();
        let direct = apply_channel(
            &ch,
            &DensityMatrix::pure(&StateVector::basis(4, 1).unwrap()),
        )
        .unwrap();
        assert!(ens.matrix().max_abs_diff(direct.matrix()) < 1e-14);
        ens.validate().unwrap();
    }

    #[test]
    fn parse_error_kind() {
        assert_eq!(
            "bitflip".parse::<PauliError>().unwrap(),
            PauliError::BitFlip
        );
        assert_eq!(
            "phase-flip".parse::<PauliError>().unwrap(),
            PauliError::PhaseFlip
        );
        assert!("amplitude".parse::<PauliError>().is_err());
    }
}
