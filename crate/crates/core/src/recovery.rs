//! Block-local recovery after a detected emission, and the logical frame the
//! recovered state lives in.
//!
//! With `P = exp(-i 3pi/4 Z)` and `W` the Hadamard,
//! `CX1 = e^{i 3pi/4} (WP (x) P^2) exp(i pi/4 Z1 Z2) (W (x) P)`.
//! (With an `e^{-i pi/4}` prefactor the same product is `-CX1`.) `CX2` swaps
//! the tensor factors.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::code::CodeSpec;
use crate::error::{DjcError, Result};
use crate::logic::ControlModel;
use crate::operator::{
    build_term, DenseOperator, HamiltonianTerm, Pulse, PulseSchedule, QState, Step, C64,
};

const P_ANGLE: f64 = 3.0 * FRAC_PI_4;
const FRAME_TOL: f64 = 1e-10;

/// `(CX1, CX2)` in the basis `|00>, |01>, |10>, |11>`.
pub fn recovery_unitaries() -> (DMatrix<C64>, DMatrix<C64>) {
    let perm = |swap: (usize, usize)| {
        DMatrix::from_fn(4, 4, |r, c| {
            let image = if c == swap.0 {
                swap.1
            } else if c == swap.1 {
                swap.0
            } else {
                c
            };
            C64::new(if r == image { 1.0 } else { 0.0 }, 0.0)
        })
    };
    (perm((0, 2)), perm((0, 1)))
}

/// Which qubit of a pair emitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JumpParity {
    /// qubit `2i-1`
    Odd,
    /// qubit `2i`
    Even,
}

impl JumpParity {
    pub fn of(qubit: usize) -> Self {
        if qubit % 2 == 1 {
            JumpParity::Odd
        } else {
            JumpParity::Even
        }
    }
}

/// Block-local `exp(-i theta Z_a Z_b)` from two XY pulses and single-qubit gates.
///
/// `W X W = Z`, and `S^dagger`-conjugated `Y` is `X`, so in the rotated frame
/// `T_ab = (X_a X_b + Y_a Y_b)/2` becomes two commuting halves whose product of
/// evolutions is the Ising rotation.
fn block_ising(a: usize, b: usize, theta: f64) -> Vec<Step> {
    let h = |s| Pulse::Hadamard { site: s };
    let z = |s, t| Pulse::evolve(HamiltonianTerm::local_z(s), t);
    let xy = || Step::single(Pulse::evolve(HamiltonianTerm::xy(a, b), theta));
    vec![
        Step {
            pulses: vec![z(a, -FRAC_PI_2), h(a), h(b)],
        },
        xy(),
        Step {
            pulses: vec![h(a), z(a, FRAC_PI_2), h(a)],
        },
        xy(),
        Step {
            pulses: vec![h(a), h(b)],
        },
    ]
}

/// Recovery schedule for pair `block` (1-based); composes to `CX1` (odd) or
/// `CX2` (even) on qubits `(2 block - 1, 2 block)` including global phase.
///
/// XXZ: 3 steps. XY: 7 steps, with the Ising pulse replaced by [`block_ising`].
pub fn recovery_schedule(block: usize, parity: JumpParity, model: ControlModel) -> Result<PulseSchedule> {
    if block == 0 {
        return Err(DjcError::SiteOutOfRange {
            site: 0,
            n_qubits: 0,
        });
    }
    let (first, second) = (2 * block - 1, 2 * block);
    // `w` carries the W factors, `p` only phase gates
    let (w, p) = match parity {
        JumpParity::Odd => (first, second),
        JumpParity::Even => (second, first),
    };
    let z = |s, t| Pulse::evolve(HamiltonianTerm::local_z(s), t);
    let mut steps = vec![Step {
        pulses: vec![z(p, P_ANGLE), Pulse::Hadamard { site: w }],
    }];
    match model {
        ControlModel::XXZ => steps.push(Step::single(Pulse::evolve(
            HamiltonianTerm::ising(first, second),
            -FRAC_PI_4,
        ))),
        ControlModel::XY => steps.extend(block_ising(first, second, -FRAC_PI_4)),
    }
    steps.push(Step {
        pulses: vec![z(w, P_ANGLE), Pulse::Hadamard { site: w }, z(p, 2.0 * P_ANGLE)],
    });
    Ok(PulseSchedule {
        steps,
        global_phase: 3.0 * FRAC_PI_4,
    })
}

/// Applies the recovery for a jump on physical `qubit`; touches only that qubit's pair.
pub fn apply_recovery(state: &QState, qubit: usize, code: &CodeSpec, model: ControlModel) -> Result<QState> {
    let n = code.n_physical();
    if qubit == 0 || qubit > n {
        return Err(DjcError::SiteOutOfRange { site: qubit, n_qubits: n });
    }
    recovery_schedule(qubit.div_ceil(2), JumpParity::of(qubit), model)?.apply(state)
}

/// Partial isometry `M (M^dagger M)^{-1/2}` on the support of `m`.
///
/// Singular values below `1e-12` times the largest are dropped, so a map that
/// destroys part of the logical space yields a rank-deficient frame.
pub fn polar_isometry(m: &DMatrix<C64>) -> DMatrix<C64> {
    let svd = m.clone().svd(true, true);
    let (u, vt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    if smax == 0.0 {
        return out;
    }
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > 1e-12 * smax {
            out += u.column(k) * vt.row(k);
        }
    }
    out
}

/// `|| G / (tr G / k) - 1 ||` for the Gram matrix `G = M^dagger M`; zero iff `M`
/// is proportional to an isometry.
pub fn gram_residual(m: &DMatrix<C64>) -> f64 {
    let g = m.adjoint() * m;
    let k = g.nrows();
    let scale = g.trace().re / k as f64;
    if scale <= 0.0 {
        return f64::INFINITY;
    }
    (g / C64::new(scale, 0.0) - DMatrix::identity(k, k)).norm()
}

/// `|<V a | psi>|^2` for logical amplitudes `a` and a frame isometry `V`.
pub fn logical_fidelity(state: &QState, logical_amplitudes: &[C64], isometry: &DMatrix<C64>) -> Result<f64> {
    if isometry.ncols() != logical_amplitudes.len() {
        return Err(DjcError::DimensionMismatch {
            expected: isometry.ncols(),
            got: logical_amplitudes.len(),
        });
    }
    if isometry.nrows() != state.dim() {
        return Err(DjcError::DimensionMismatch {
            expected: isometry.nrows(),
            got: state.dim(),
        });
    }
    let a = nalgebra::DVector::from_column_slice(logical_amplitudes);
    let ideal = isometry * a;
    Ok(ideal.dotc(state.amplitudes()).norm_sqr())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PauliKind {
    X,
    Z,
}

/// A physical operator found to act as a logical Pauli on a frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameGenerator {
    pub logical: usize,
    pub pauli: PauliKind,
    /// The operator is `sign * prod(factors)`.
    pub factors: Vec<HamiltonianTerm>,
    pub sign: f64,
}

impl FrameGenerator {
    pub fn operator(&self, n_qubits: usize) -> Result<DenseOperator> {
        let mut op = DenseOperator::identity(n_qubits).scale(C64::new(self.sign, 0.0));
        for f in &self.factors {
            op = op.mul(&build_term(f, n_qubits)?)?;
        }
        Ok(op)
    }
}

#[derive(Clone, Debug)]
pub struct RecoveryFrame {
    pub jump_qubit: usize,
    /// Columns are the recovered images of the logical basis words.
    pub isometry: DMatrix<C64>,
    pub gram_residual: f64,
    pub generators: Vec<FrameGenerator>,
}

#[derive(Serialize)]
struct FrameDocument<'a> {
    jump_qubit: usize,
    gram_residual: f64,
    /// `[index, re, im]` of nonzero amplitudes per column
    columns: Vec<Vec<(usize, f64, f64)>>,
    generators: &'a [FrameGenerator],
}

impl RecoveryFrame {
    pub fn to_json(&self) -> serde_json::Value {
        let columns = self
            .isometry
            .column_iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .filter(|(_, a)| a.norm() > 1e-14)
                    .map(|(i, a)| (i, a.re, a.im))
                    .collect()
            })
            .collect();
        serde_json::to_value(FrameDocument {
            jump_qubit: self.jump_qubit,
            gram_residual: self.gram_residual,
            columns,
            generators: &self.generators,
        })
        .expect("frame serializes")
    }

    pub fn generator(&self, logical: usize, pauli: PauliKind) -> Option<&FrameGenerator> {
        self.generators
            .iter()
            .find(|g| g.logical == logical && g.pauli == pauli)
    }
}

/// Pauli on logical qubit `i` of `n_logical` (qubit 1 most significant).
pub fn logical_pauli(n_logical: usize, i: usize, kind: PauliKind) -> DMatrix<C64> {
    let dim = 1 << n_logical;
    let m = 1 << (n_logical - i);
    DMatrix::from_fn(dim, dim, |r, c| match kind {
        PauliKind::X => C64::new(if r == c ^ m { 1.0 } else { 0.0 }, 0.0),
        PauliKind::Z if r == c => C64::new(if r & m == 0 { 1.0 } else { -1.0 }, 0.0),
        PauliKind::Z => C64::new(0.0, 0.0),
    })
}

/// `Some(sign)` if `op` maps the frame to itself and acts there as `sign * target`.
pub fn acts_as(op: &DenseOperator, frame: &DMatrix<C64>, target: &DMatrix<C64>) -> Option<f64> {
    let image = op.matrix() * frame;
    let restricted = frame.adjoint() * &image;
    if (&image - frame * &restricted).norm() > FRAME_TOL {
        return None;
    }
    [1.0, -1.0]
        .into_iter()
        .find(|&s| (&restricted - target * C64::new(s, 0.0)).norm() < FRAME_TOL)
}

/// `(R S_q B)` scaled to unit column norm: the recovered images of the logical basis.
pub fn recovered_images(code: &CodeSpec, qubit: usize, model: ControlModel) -> Result<DMatrix<C64>> {
    let n = code.n_physical();
    if qubit == 0 || qubit > n {
        return Err(DjcError::SiteOutOfRange { site: qubit, n_qubits: n });
    }
    let schedule = recovery_schedule(qubit.div_ceil(2), JumpParity::of(qubit), model)?;
    let cols: Vec<QState> = code
        .logical_basis()
        .iter()
        .map(|w| schedule.apply(&w.lowered(qubit)))
        .collect::<Result<_>>()?;
    let mut m = DMatrix::from_fn(1 << n, cols.len(), |r, c| cols[c].amplitudes()[r]);
    // all words lose the same norm, so one common factor normalizes every column
    let scale = (m.norm_squared() / cols.len() as f64).sqrt();
    if scale > 0.0 {
        m /= C64::new(scale, 0.0);
    }
    Ok(m)
}

fn subsets<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = (1u32..(1 << items.len()))
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, t)| t.clone())
                .collect()
        })
        .collect();
    out.sort_by_key(Vec::len);
    out
}

/// Image of the logical basis after a jump on `jump_qubit` plus recovery,
/// together with physical operators that act as logical Paulis on it.
///
/// Each original generator is tried first; if it no longer acts as the
/// required Pauli, products of pair flips `T_{2a-1,2a}` (for X) or
/// even products of `Z_{2a-1}` (for Z) are searched, smallest first.
pub fn derive_recovery_frame(code: &CodeSpec, jump_qubit: usize, model: ControlModel) -> Result<RecoveryFrame> {
    let isometry = recovered_images(code, jump_qubit, model)?;
    let gram_residual = gram_residual(&isometry);
    if gram_residual > FRAME_TOL {
        return Err(DjcError::BrokenFrame(gram_residual));
    }
    let n = code.n_physical();
    let np = code.n_pairs();
    let nl = code.n_logical();
    let flips: Vec<HamiltonianTerm> = (1..=np).map(|a| HamiltonianTerm::xy(2 * a - 1, 2 * a)).collect();
    let zs: Vec<HamiltonianTerm> = (1..=np).map(|a| HamiltonianTerm::local_z(2 * a - 1)).collect();
    let x_candidates = subsets(&flips);
    let z_candidates: Vec<Vec<HamiltonianTerm>> =
        subsets(&zs).into_iter().filter(|s| s.len() % 2 == 0).collect();

    let mut generators = Vec::with_capacity(2 * nl);
    for i in 1..=nl {
        for (pauli, original, pool) in [
            (
                PauliKind::X,
                vec![HamiltonianTerm::xy(2 * i - 1, 2 * i)],
                &x_candidates,
            ),
            (
                PauliKind::Z,
                vec![
                    HamiltonianTerm::local_z(2 * i - 1),
                    HamiltonianTerm::local_z(2 * np - 1),
                ],
                &z_candidates,
            ),
        ] {
            let target = logical_pauli(nl, i, pauli);
            let found = std::iter::once(&original)
                .chain(pool.iter())
                .find_map(|factors| {
                    let g = FrameGenerator {
                        logical: i,
                        pauli,
                        factors: factors.clone(),
                        sign: 1.0,
                    };
                    let op = g.operator(n).ok()?;
                    acts_as(&op, &isometry, &target).map(|sign| FrameGenerator { sign, ..g })
                });
            if let Some(g) = found {
                generators.push(g);
            } else {
                log::warn!("no {pauli:?} generator for logical qubit {i} after a jump on {jump_qubit}");
            }
        }
    }
    Ok(RecoveryFrame {
        jump_qubit,
        isometry,
        gram_residual,
        generators,
    })
}
