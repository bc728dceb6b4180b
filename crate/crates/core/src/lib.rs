//! Simulation and encoded-logic compilation for detected-jump-correcting
//! (DJC) codes built from XY / XXZ exchange interactions.
//!
//! The crate is organised bottom-up:
//!
//! * [`operator`]: dense operators, states and pulse schedules,
//! * [`code`]: the balanced-bitstring DFS, code words and the known-location
//!   error-correction condition,
//! * [`logic`]: encoded generators, Euler synthesis, Ising-from-XY sequences,
//!   controlled phase and circuit compilation,
//! * [`channel`]: spontaneous-emission trajectories and collective dephasing,
//! * [`recovery`]: block-local recovery and the post-recovery logical frame,
//! * [`prep`]: ground-state preparation and singlet/triplet readout,
//! * [`ensemble`]: seeded trajectory ensembles and their reports.

pub mod channel;
pub mod code;
pub mod ensemble;
pub mod error;
pub mod logic;
pub mod operator;
pub mod prep;
pub mod recovery;
pub mod wire;

pub use code::{build_code, check_qecc, dfs_basis, encode, CodeSpec, QeccCheckResult};
pub use error::{DjcError, Result};
pub use logic::{ControlModel, LogicalGate};
pub use operator::{
    apply, build_term, conjugate_with, exponentiate, DenseOperator, HamiltonianTerm, Pulse,
    PulseSchedule, QState, Step, TermKind, C64,
};
