//! Interference in quantum algorithms.
//!
//! The interference of a channel measures how strongly it spreads
//! computational basis states over each other: zero for permutations and
//! phase gates, `2ⁿ − 1` for a full Walsh–Hadamard transform. This crate
//! computes it, together with the success probability, for Grover search and
//! Shor order finding under three error families:
//!
//! * systematic unitary errors: every Hadamard rotated to angle θ,
//! * random unitary errors: Hadamard angles (and QFT phases) drawn
//!   independently around their ideal values,
//! * bit-flip or phase-flip decoherence right after the initial Hadamard
//!   layer.
//!
//! Two numbers are reported for every configuration: the interference of
//! the whole algorithm ("potentially available") and of the part after the
//! initial Hadamard layer ("actually used").
//!
//! ```
//! use std::f64::consts::FRAC_PI_4;
//! use qinterference::algorithms::{build_grover, GroverSpec};
//! use qinterference::interference::interference_circuit;
//!
//! let spec = GroverSpec::new(4, 3).unwrap();
//! let c = build_grover(&spec, &vec![FRAC_PI_4; spec.hadamard_count()]).unwrap();
//! let used = interference_circuit(&c.rest).unwrap();
//! assert!(used.value > 4.0 && used.value < 5.0);
//! ```
//!
//! Module overview:
//!
//! * [`linalg`]: dense complex matrices, states, density matrices.
//! * [`gates`]: perturbed Hadamards, circuits, the QFT.
//! * [`channels`]: Kraus channels and Pauli error layers.
//! * [`interference`]: the measure, by several independent routes.
//! * [`algorithms`]: Grover and Shor circuits, error channels, success.
//! * [`harness`]: seeded parameter sweeps and result files.
//! * [`verify`]: built-in acceptance checks.
//! * [`cli`]: the command-line front end.
//!
//! Qubit 0 is the most significant bit of a basis index throughout.

pub mod algorithms;
pub mod channels;
pub mod cli;
pub mod error;
pub mod gates;
pub mod harness;
pub mod interference;
pub mod linalg;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
