//! Shared fixtures for the criterion benches.

use djc::channel::{random_amplitudes, trajectory_rng};
use djc::{LogicalGate, QState};

pub fn random_state(n_qubits: usize, seed: u64) -> QState {
    QState::from_amplitudes(random_amplitudes(1 << n_qubits, &mut trajectory_rng(seed, 0))).unwrap()
}

/// Euler rotation on every logical qubit followed by a ladder of controlled phases.
pub fn layered_circuit(n_logical: usize) -> Vec<LogicalGate> {
    let mut c: Vec<LogicalGate> = (1..=n_logical)
        .map(|t| LogicalGate::Euler {
            target: t,
            alpha: 0.3 * t as f64,
            theta: 0.7,
            beta: -0.2,
        })
        .collect();
    c.extend((1..n_logical).map(|t| LogicalGate::CP { control: t, target: t + 1 }));
    c
}
