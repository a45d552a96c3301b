//! Toolkit for continuous-variable entanglement-assisted operator
//! quantum error-correcting codes.
//!
//! The crate works in the Heisenberg/phase-space picture throughout: states
//! never appear explicitly, only the real vectors describing displacement
//! errors and quadrature observables. It provides
//!
//! - exact-rational and float symplectic linear algebra ([`scalar`],
//!   [`phase`], [`symplectic`]),
//! - construction, transformation and validation of codes built from
//!   ancilla, gauge and entangled modes ([`code`], [`barnes`]),
//! - syndrome extraction, recovery and Monte Carlo simulation of
//!   displacement-error channels ([`channel`]),
//! - linear-optical encoding-circuit synthesis by Bloch-Messiah
//!   decomposition ([`circuit`]),
//! - text formats for codes, matrices and circuits ([`io`]).

pub mod barnes;
pub mod channel;
pub mod circuit;
pub mod code;
pub mod error;
pub mod io;
pub mod linalg;
pub mod phase;
pub mod scalar;
pub mod symplectic;

pub use barnes::{barnes_lift, zero_pattern, PairingPattern};
pub use channel::{
    canonical_recovery, decode, extract_syndrome, residual_logical, run_trials, structured_error,
    DecoderConfig, ErrorVector, NoiseModel, SqueezingModel, Syndrome, TrialStats,
};
pub use circuit::{
    bloch_messiah, emit_circuit, parse_circuit, random_passive, CircuitDecomposition,
    PassiveNetwork, SqueezeStage,
};
pub use code::{
    apply_symplectic, build_symplectic_basis, canonical_code, correctable_pair, example_code,
    example_code_unencoded, example_encoding_map, single_mode_correctability, validate, CheckKind,
    CheckRow, Code, CodeParams, GaugeMatrix, ModeRole, ModeRoles, SymplecticBasis,
    ValidationReport,
};
pub use error::{Error, Result};
pub use phase::{symplectic_product, syndrome_pairing, PhaseVector};
pub use scalar::{Scalar, DEFAULT_TOL};
pub use symplectic::{random_symplectic, symplectic_gram_schmidt, Subspace, SymplecticMatrix};
