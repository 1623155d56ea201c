//! Density-matrix simulation of radical-pair quantum beats under thermal
//! relaxation.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense complex matrices, Hermitian eigensolver, partial trace.
//! * [`spinsys`]: radical-pair Hamiltonians, the singlet initial state and the
//!   exact singlet probability `S(t)`.
//! * [`channels`]: generalized amplitude damping and dephasing Kraus maps,
//!   decay parameters and the closed-form relaxed singlet yield.
//! * [`circuits`]: a gate-level density-matrix simulator with a
//!   zero-temperature qubit noise model and shot sampling.
//! * [`protocols`]: the Kraus, inherent-noise and correction-circuit methods
//!   for emulating relaxation, plus the magnetic field effect.
//! * [`experiments`]: presets, the detector-noise study and error metrics.
//!
//! Sweeps over time grids and Monte Carlo trials go through [`sweep`], which
//! runs on rayon when the `parallel` feature is enabled (default) and falls
//! back to a sequential loop otherwise.

// `!(x > 0.0)` deliberately rejects NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod circuits;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod protocols;
pub mod spinsys;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix, C64};
