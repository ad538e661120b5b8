//! The interference measure of a quantum channel.
//!
//! For a propagator `P` acting as `ρ'_{ij} = Σ_{kl} P_{ij,kl} ρ_{kl}` the
//! measure is
//!
//! ```text
//! I(P) = Σ_{i,k,l} |P_{ii,kl}|² − Σ_{i,k} |P_{ii,kk}|²
//! ```
//!
//! Four evaluation routes are provided, all computing the same number:
//!
//! * [`interference_superoperator`] on an explicit `N² × N²` propagator,
//! * [`interference_kraus_naive`], the triple sum over Kraus operators,
//! * [`interference_kraus`], the production route through per-row Gram
//!   matrices (`O(N² L²)` instead of `O(N³ L)`),
//! * [`interference_factored`] for channels `{U · √c_l P_l}` with a Pauli
//!   layer, which needs neither the operators nor `L` at all.
//!
//! For unitary propagation everything collapses to `I = N − Σ |U_ik|⁴`.
//!
//! Rows of the output index are processed in parallel; the per-row partial
//! sums are always reduced in row order so results do not depend on the
//! number of worker threads.

use rayon::prelude::*;

use crate::channels::{FactoredChannel, KrausChannel, PauliError};
use crate::error::{Error, Result};
use crate::gates::{map_columns, Circuit};
use crate::linalg::{check_unitary, ComplexMatrix, DensityMatrix, C64, UNITARY_TOL};

/// Superoperators are only formed for `N ≤ 2^6`.
pub const MAX_SUPEROPERATOR_DIM: usize = 1 << 6;

/// Values above `−NEGATIVE_TOL` are treated as round-off around zero.
pub const NEGATIVE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterferenceReport {
    pub value: f64,
    /// `log₂(value)`; `-∞` when the value is zero.
    pub ibits: f64,
}

impl InterferenceReport {
    pub fn from_value(value: f64) -> Result<Self> {
        Ok(Self {
            value,
            ibits: ibits(value)?,
        })
    }
}

/// Number of i-bits `log₂ I`; tiny negative round-off is clamped to zero.
pub fn ibits(value: f64) -> Result<f64> {
    if value.is_nan() || value < -NEGATIVE_TOL {
        return Err(Error::argument(format!("interference {value} is negative")));
    }
    let v = value.max(0.0);
    Ok(if v == 0.0 {
        f64::NEG_INFINITY
    } else {
        v.log2()
    })
}

fn ordered_sum(parts: Vec<f64>) -> f64 {
    parts.into_iter().sum()
}

/// `N − Σ |U_ik|⁴` without the unitarity check.
pub(crate) fn unitary_value(u: &ComplexMatrix) -> f64 {
    let n = u.rows();
    let quartic = ordered_sum(
        (0..n)
            .into_par_iter()
            .map(|i| u.row(i).iter().map(|z| z.norm_sqr().powi(2)).sum())
            .collect(),
    );
    n as f64 - quartic
}

/// Interference of unitary propagation.
pub fn interference_unitary(u: &ComplexMatrix) -> Result<InterferenceReport> {
    if !u.is_square() {
        return Err(Error::shape("interference needs a square matrix"));
    }
    if !check_unitary(u, UNITARY_TOL) {
        return Err(Error::validation("matrix is not unitary"));
    }
    InterferenceReport::from_value(unitary_value(u))
}

/// Unitary interference of a circuit, streamed column by column so the
/// `N × N` matrix is never formed.
pub fn interference_circuit(c: &Circuit) -> Result<InterferenceReport> {
    let quartic = ordered_sum(map_columns(c, |_, col| {
        col.iter().map(|z| z.norm_sqr().powi(2)).sum()
    })?);
    InterferenceReport::from_value(c.dim() as f64 - quartic)
}

/// Per-row Gram route: with `V_i` the `L × N` stack of row `i` of every
/// operator, the coherent term is `Σ_i ‖V_i V_i†‖_F²`.
pub fn interference_kraus(ch: &KrausChannel) -> Result<InterferenceReport> {
    let n = ch.dim();
    let ops = ch.ops();
    let l = ops.len();
    let per_row: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let rows: Vec<&[C64]> = ops.iter().map(|e| e.row(i)).collect();
            let mut coherent = 0.0;
            for a in 0..l {
                for b in a..l {
                    let g: C64 = rows[a].iter().zip(rows[b]).map(|(x, y)| x * y.conj()).sum();
                    coherent += if a == b {
                        g.norm_sqr()
                    } else {
                        2.0 * g.norm_sqr()
                    };
                }
            }
            let classical: f64 = (0..n)
                .map(|k| rows.iter().map(|r| r[k].norm_sqr()).sum::<f64>().powi(2))
                .sum();
            coherent - classical
        })
        .collect();
    InterferenceReport::from_value(ordered_sum(per_row))
}

/// Direct triple sum `Σ_{i,k,m} |Σ_l (E_l)_ik (E_l)*_im|² − Σ_{i,k} (Σ_l |(E_l)_ik|²)²`.
pub fn interference_kraus_naive(ch: &KrausChannel) -> Result<InterferenceReport> {
    let n = ch.dim();
    let ops = ch.ops();
    let mut coherent = 0.0;
    let mut classical = 0.0;
    for i in 0..n {
        for k in 0..n {
            for m in 0..n {
                let s: C64 = ops.iter().map(|e| e.get(i, k) * e.get(i, m).conj()).sum();
                coherent += s.norm_sqr();
            }
            let d: f64 = ops.iter().map(|e| e.get(i, k).norm_sqr()).sum();
            classical += d * d;
        }
    }
    InterferenceReport::from_value(coherent - classical)
}

/// In-place Walsh–Hadamard butterfly restricted to the bits in `mask`
/// (unnormalised).
fn walsh_butterfly<T>(v: &mut [T], mask: usize, combine: impl Fn(T, T) -> (T, T))
where
    T: Copy,
{
    let mut bit = 1;
    while bit < v.len() {
        if mask & bit != 0 {
            for i in 0..v.len() {
                if i & bit == 0 {
                    let (x, y) = combine(v[i], v[i | bit]);
                    v[i] = x;
                    v[i | bit] = y;
                }
            }
        }
        bit <<= 1;
    }
}

/// Structured route for `{U · √c_l P_l}`.
///
/// Phase flips: `P_{ii,km} = U_ik U*_im f(k⊕m)` with
/// `f(d) = (1−2p)^{|d ∩ A|}`, so the coherent term is a XOR-convolution of
/// the row's `|U_ik|²` with a product kernel (constant along unaffected bits).
///
/// Bit flips: the coherent term equals `Σ_{δ⊆A} |R_i(δ)|² C(δ)` where
/// `R_i(δ) = Σ_k U_ik U*_{i,k⊕δ}` is the XOR autocorrelation of the row
/// (obtained from its Walsh transform) and `C(δ) = Σ_l c_l c_{l⊕δ}` is the
/// pairwise correlator of the Kraus weights, a product of
/// `p² + (1−p)²` and `2p(1−p)` factors.
pub fn interference_factored(fc: &FactoredChannel) -> Result<InterferenceReport> {
    let u = fc.unitary();
    let n = u.rows();
    let layer = fc.layer();
    let mask = layer.mask();
    let p = layer.p();
    let per_row: Vec<f64> = match layer.kind() {
        PauliError::PhaseFlip => {
            let gamma = (1.0 - 2.0 * p).powi(2);
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let a: Vec<f64> = u.row(i).iter().map(|z| z.norm_sqr()).collect();
                    let mut b = a.clone();
                    walsh_butterfly(&mut b, mask, |x, y| (x + gamma * y, y + gamma * x));
                    walsh_butterfly(&mut b, (n - 1) & !mask, |x, y| (x + y, x + y));
                    let coherent: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
                    let classical: f64 = a.iter().map(|x| x * x).sum();
                    coherent - classical
                })
                .collect()
        }
        PauliError::BitFlip => {
            let keep = p * p + (1.0 - p) * (1.0 - p);
            let cross = 2.0 * p * (1.0 - p);
            let full = n - 1;
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let row = u.row(i);
                    let mut hat = row.to_vec();
                    walsh_butterfly(&mut hat, full, |x, y| (x + y, x - y));
                    // Marginalise |û(s)|² onto the affected bits, then transform back.
                    let mut h = vec![0.0; n];
                    for (s, z) in hat.iter().enumerate() {
                        h[s & mask] += z.norm_sqr();
                    }
                    walsh_butterfly(&mut h, mask, |x, y| (x + y, x - y));
                    let mut coherent = 0.0;
                    let mut delta = 0usize;
                    // Enumerate every subset δ of the mask.
                    loop {
                        let r = h[delta] / n as f64;
                        let ones = delta.count_ones() as i32;
                        let zeros = mask.count_ones() as i32 - ones;
                        coherent += r * r * cross.powi(ones) * keep.powi(zeros);
                        if delta == mask {
                            break;
                        }
                        delta = (delta.wrapping_sub(mask)) & mask;
                    }
                    let mut b: Vec<f64> = row.iter().map(|z| z.norm_sqr()).collect();
                    walsh_butterfly(&mut b, mask, |x, y| {
                        ((1.0 - p) * x + p * y, p * x + (1.0 - p) * y)
                    });
                    let classical: f64 = b.iter().map(|x| x * x).sum();
                    coherent - classical
                })
                .collect()
        }
    };
    InterferenceReport::from_value(ordered_sum(per_row))
}

/// Explicit propagator `P_{ij,kl}`, row index `i·N + j`, column index `k·N + l`.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    entries: Vec<C64>,
}

impl Superoperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        let n = self.dim;
        self.entries[(i * n + j) * n * n + k * n + l]
    }

    /// `ρ'_{ij} = Σ_{kl} P_{ij,kl} ρ_{kl}`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let n = self.dim;
        if rho.dim() != n {
            return Err(Error::argument(
                "density matrix does not match superoperator",
            ));
        }
        let vec = rho.matrix().as_slice();
        let nn = n * n;
        let out: Vec<C64> = (0..nn)
            .map(|r| {
                self.entries[r * nn..(r + 1) * nn]
                    .iter()
                    .zip(vec)
                    .map(|(p, x)| p * x)
                    .sum()
            })
            .collect();
        Ok(DensityMatrix::from_matrix_unchecked(
            ComplexMatrix::from_raw(n, n, out),
        ))
    }
}

/// `P_{ij,kl} = Σ_e (E_e)_{ik} (E_e)*_{jl}`.
pub fn superoperator_from_kraus(ch: &KrausChannel) -> Result<Superoperator> {
    let n = ch.dim();
    if n > MAX_SUPEROPERATOR_DIM {
        return Err(Error::size(format!(
            "superoperator of dimension {n} exceeds the cap {MAX_SUPEROPERATOR_DIM}"
        )));
    }
    let mut entries = vec![C64::new(0.0, 0.0); n * n * n * n];
    for e in ch.ops() {
        for i in 0..n {
            for j in 0..n {
                let base = (i * n + j) * n * n;
                for k in 0..n {
                    let a = e.get(i, k);
                    for l in 0..n {
                        entries[base + k * n + l] += a * e.get(j, l).conj();
                    }
                }
            }
        }
    }
    Ok(Superoperator { dim: n, entries })
}

/// Interference read directly off the propagator.
pub fn interference_superoperator(p: &Superoperator) -> Result<InterferenceReport> {
    let n = p.dim;
    if n > MAX_SUPEROPERATOR_DIM {
        return Err(Error::size(format!(
            "superoperator of dimension {n} exceeds the cap {MAX_SUPEROPERATOR_DIM}"
        )));
    }
    let mut coherent = 0.0;
    let mut classical = 0.0;
    for i in 0..n {
        for k in 0..n {
            for l in 0..n {
                coherent += p.get(i, i, k, l).norm_sqr();
            }
            classical += p.get(i, i, k, k).norm_sqr();
        }
    }
    InterferenceReport::from_value(coherent - classical)
}
