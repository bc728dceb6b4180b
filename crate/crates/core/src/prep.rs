//! Preparation by cooling into the ground state of independent pair
//! couplings, and readout by singlet/triplet discrimination.
//!
//! For `J > 0` the pair ground state is the singlet `|s> = (|01> - |10>)/sqrt2`,
//! for `J < 0` the triplet `|t> = (|01> + |10>)/sqrt2`, each with energy `-|J|`.
//! The product of pair ground states is the uniform logical superposition of
//! the code whose pair signs match the couplings.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::code::{build_code, encode, CodeSpec};
use crate::error::{DjcError, Result};
use crate::logic::{compile_gate, ControlModel, LogicalGate};
use crate::operator::{build_term, site_mask, DenseOperator, HamiltonianTerm, QState, C64};

#[derive(Clone, Debug)]
pub struct PrepReport {
    pub ground_state: QState,
    pub ground_energy: f64,
    pub gap: f64,
    pub in_code_space: bool,
    pub overlap_with_code_projector: f64,
    /// Code whose pair signs match the couplings.
    pub code: CodeSpec,
}

/// `sum_i J_i T_{2i-1,2i}`.
pub fn pair_hamiltonian(couplings: &[f64]) -> Result<DenseOperator> {
    let n = 2 * couplings.len();
    let mut h = DenseOperator::zeros(n);
    for (k, &j) in couplings.iter().enumerate() {
        let t = build_term(&HamiltonianTerm::xy(2 * k + 1, 2 * k + 2).scaled(j), n)?;
        h = h.add(&t)?;
    }
    Ok(h)
}

pub fn pair_signs(couplings: &[f64]) -> Result<Vec<i8>> {
    couplings
        .iter()
        .enumerate()
        .map(|(k, &j)| {
            if j == 0.0 || !j.is_finite() {
                Err(DjcError::ZeroCoupling(k + 1))
            } else {
                Ok(if j > 0.0 { 1 } else { -1 })
            }
        })
        .collect()
}

/// Diagonalizes the pair Hamiltonian and compares its ground state with the code.
pub fn prepare_ground_state(couplings: &[f64]) -> Result<PrepReport> {
    let signs = pair_signs(couplings)?;
    let code = build_code(couplings.len(), &signs)?;
    let h = pair_hamiltonian(couplings)?;
    let m = h.matrix();
    let eig = ((m + m.adjoint()) * C64::new(0.5, 0.0)).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let e0 = eig.eigenvalues[order[0]];
    // first level above the (numerically) degenerate ground level
    let e1 = order
        .iter()
        .map(|&k| eig.eigenvalues[k])
        .find(|&e| e > e0 + 1e-9)
        .unwrap_or(e0);
    let mut ground = QState::from_vector(eig.eigenvectors.column(order[0]).into_owned())?;
    // fix the arbitrary eigenvector phase against the uniform logical state
    let d = code.logical_dim();
    let reference = encode(&code, &vec![C64::new(1.0 / (d as f64).sqrt(), 0.0); d])?;
    let ov = reference.inner(&ground);
    if ov.norm() > 1e-6 {
        ground = ground.scaled(ov.conj() / ov.norm());
    }
    let b = code.basis_matrix();
    let overlap = (b.adjoint() * ground.amplitudes()).norm_squared();
    Ok(PrepReport {
        ground_state: ground,
        ground_energy: e0,
        gap: e1 - e0,
        in_code_space: overlap > 1.0 - 1e-10,
        overlap_with_code_projector: overlap,
        code,
    })
}

/// `tensor_i |s>` or `|t>` according to the sign of each coupling.
pub fn pair_ground_product(signs: &[i8]) -> Result<QState> {
    let r = FRAC_1_SQRT_2;
    let mut out: Option<QState> = None;
    for &s in signs {
        let pair = QState::from_amplitudes(vec![
            C64::new(0.0, 0.0),
            C64::new(r, 0.0),
            C64::new(-f64::from(s) * r, 0.0),
            C64::new(0.0, 0.0),
        ])?;
        out = Some(match out {
            None => pair,
            Some(acc) => acc.tensor(&pair)?,
        });
    }
    out.ok_or(DjcError::TooFewPairs(0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairOutcome {
    Singlet,
    Triplet,
    Other,
}

#[derive(Clone, Debug)]
pub struct PairMeasurement {
    pub outcome: PairOutcome,
    pub collapsed: QState,
    /// Born probabilities of singlet, triplet and other.
    pub probabilities: [f64; 3],
}

/// Dense projectors `(|s><s|, |t><t|, rest)` on pair `pair` of an `n`-qubit register.
pub fn pair_projectors(pair: usize, n_qubits: usize) -> Result<[DenseOperator; 3]> {
    let r = 0.5;
    let z = C64::new(0.0, 0.0);
    let c = |x: f64| C64::new(x, 0.0);
    let sites = [2 * pair - 1, 2 * pair];
    let s = DMatrix::from_row_slice(4, 4, &[z, z, z, z, z, c(r), c(-r), z, z, c(-r), c(r), z, z, z, z, z]);
    let t = DMatrix::from_row_slice(4, 4, &[z, z, z, z, z, c(r), c(r), z, z, c(r), c(r), z, z, z, z, z]);
    let o = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), z, z, c(1.0)]));
    Ok([
        DenseOperator::embed(&s, &sites, n_qubits)?,
        DenseOperator::embed(&t, &sites, n_qubits)?,
        DenseOperator::embed(&o, &sites, n_qubits)?,
    ])
}

/// Projective singlet / triplet / other measurement on pair `(2 pair - 1, 2 pair)`.
pub fn singlet_triplet_measure<R: Rng + ?Sized>(state: &QState, pair: usize, rng: &mut R) -> Result<PairMeasurement> {
    let n = state.n_qubits();
    if pair == 0 || 2 * pair > n {
        return Err(DjcError::SiteOutOfRange {
            site: 2 * pair,
            n_qubits: n,
        });
    }
    let (ma, mb) = (site_mask(n, 2 * pair - 1), site_mask(n, 2 * pair));
    let amps = state.amplitudes();
    let total = state.norm_squared();
    let mut p = [0.0; 3];
    for b in 0..amps.len() {
        if b & (ma | mb) != 0 {
            continue;
        }
        let (a01, a10) = (amps[b | mb], amps[b | ma]);
        p[0] += 0.5 * (a01 - a10).norm_sqr();
        p[1] += 0.5 * (a01 + a10).norm_sqr();
        p[2] += amps[b].norm_sqr() + amps[b | ma | mb].norm_sqr();
    }
    for x in &mut p {
        *x /= total;
    }
    let r: f64 = rng.random();
    let outcome = if r < p[0] {
        PairOutcome::Singlet
    } else if r < p[0] + p[1] {
        PairOutcome::Triplet
    } else {
        PairOutcome::Other
    };
    let mut out = state.clone();
    let v = out.amplitudes_mut();
    for b in 0..v.len() {
        if b & (ma | mb) != 0 {
            continue;
        }
        let (a01, a10) = (v[b | mb], v[b | ma]);
        match outcome {
            PairOutcome::Singlet => {
                let d = (a01 - a10) * 0.5;
                v[b | mb] = d;
                v[b | ma] = -d;
                v[b] = C64::new(0.0, 0.0);
                v[b | ma | mb] = C64::new(0.0, 0.0);
            }
            PairOutcome::Triplet => {
                let s = (a01 + a10) * 0.5;
                v[b | mb] = s;
                v[b | ma] = s;
                v[b] = C64::new(0.0, 0.0);
                v[b | ma | mb] = C64::new(0.0, 0.0);
            }
            PairOutcome::Other => {
                v[b | mb] = C64::new(0.0, 0.0);
                v[b | ma] = C64::new(0.0, 0.0);
            }
        }
    }
    Ok(PairMeasurement {
        outcome,
        collapsed: out.normalized(),
        probabilities: p,
    })
}

/// Logical bit for a pair outcome; `None` for the leakage outcome.
pub fn outcome_bit(outcome: PairOutcome, pair_sign: i8) -> Option<u8> {
    match (outcome, pair_sign > 0) {
        (PairOutcome::Singlet, true) | (PairOutcome::Triplet, false) => Some(0),
        (PairOutcome::Triplet, true) | (PairOutcome::Singlet, false) => Some(1),
        (PairOutcome::Other, _) => None,
    }
}

#[derive(Clone, Debug)]
pub struct Readout {
    pub bit: Option<u8>,
    pub measurement: PairMeasurement,
}

/// Encoded Hadamard on logical qubit `j`, then singlet/triplet measurement of pair `j`.
pub fn encoded_readout<R: Rng + ?Sized>(
    state: &QState,
    j: usize,
    code: &CodeSpec,
    model: ControlModel,
    rng: &mut R,
) -> Result<Readout> {
    code.check_logical(j)?;
    let weight = (code.basis_matrix().adjoint() * state.amplitudes()).norm_squared() / state.norm_squared();
    if weight < 1.0 - 1e-8 {
        log::warn!("readout of a state with code-space weight {weight:.3e}");
    }
    let h = compile_gate(&LogicalGate::Hadamard { target: j }, code, model)?;
    let rotated = h.apply(state)?;
    let measurement = singlet_triplet_measure(&rotated, j, rng)?;
    Ok(Readout {
        bit: outcome_bit(measurement.outcome, code.pair_sign(j)),
        measurement,
    })
}

/// Reads out every logical qubit in order; the state collapses between readouts.
pub fn read_all<R: Rng + ?Sized>(state: &QState, code: &CodeSpec, model: ControlModel, rng: &mut R) -> Result<Vec<Option<u8>>> {
    let mut cur = state.clone();
    let mut bits = Vec::with_capacity(code.n_logical());
    for j in 1..=code.n_logical() {
        let r = encoded_readout(&cur, j, code, model, rng)?;
        bits.push(r.bit);
        cur = r.measurement.collapsed;
    }
    Ok(bits)
}
