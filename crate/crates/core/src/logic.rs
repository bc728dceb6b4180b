//! Encoded generators and compilation of logical circuits into pulse schedules.
//!
//! Logical rotations use the convention `RotX(t) = exp(-i t sigma_x)` (no
//! factor 1/2), matching the way pulse angles multiply the generators.
//!
//! In the XY model a `Z_{2a-1} Z_{2b-1}` rotation is built from five XY
//! pulses. The composed operator is `exp(-i t (Z_{2a-1}Z_{2b-1} - Z_{2a-1}Z_{2a}))`,
//! which on any state with pair `a` singly excited (all code words) equals
//! `e^{-it} exp(-i t Z_{2a-1}Z_{2b-1})`. Code-level rotations fold the extra
//! `e^{-it}` back into the schedule's global phase so that compiled gates are
//! exact on the logical span, not just up to phase.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::code::{dfs_leakage, djc_space, CodeSpec};
use crate::error::{DjcError, Result};
use crate::operator::{
    build_term, DenseOperator, HamiltonianTerm, Pulse, PulseSchedule, QState, TermKind, C64,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ControlModel {
    /// Only `T_ij` terms are switchable.
    XY,
    /// `T_ij` and `Z_i Z_j` terms are switchable.
    XXZ,
}

impl ControlModel {
    pub fn name(self) -> &'static str {
        match self {
            ControlModel::XY => "XY",
            ControlModel::XXZ => "XXZ",
        }
    }

    pub fn permits(self, kind: TermKind) -> bool {
        matches!((self, kind), (_, TermKind::XY) | (ControlModel::XXZ, TermKind::Ising))
    }

    /// Fails on any pulse outside the model (single-qubit pulses are never permitted here).
    pub fn check(self, schedule: &PulseSchedule) -> Result<()> {
        for p in schedule.pulses() {
            match p {
                Pulse::Evolve { term, .. } if self.permits(term.kind) => {}
                Pulse::Evolve { term, .. } => {
                    return Err(DjcError::ModelViolation(term.kind, self.name()))
                }
                Pulse::Hadamard { .. } => {
                    return Err(DjcError::ModelViolation(TermKind::LocalZ, self.name()))
                }
            }
        }
        Ok(())
    }
}

/// One gate of a logical circuit; qubit indices are logical and 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate")]
pub enum LogicalGate {
    RotX { target: usize, theta: f64 },
    RotZ { target: usize, theta: f64 },
    Euler { target: usize, alpha: f64, theta: f64, beta: f64 },
    Hadamard { target: usize },
    CP { control: usize, target: usize },
}

impl LogicalGate {
    pub fn targets(&self) -> Vec<usize> {
        match *self {
            LogicalGate::RotX { target, .. }
            | LogicalGate::RotZ { target, .. }
            | LogicalGate::Euler { target, .. }
            | LogicalGate::Hadamard { target } => vec![target],
            LogicalGate::CP { control, target } => vec![control, target],
        }
    }

    /// The 2x2 matrix of a single-qubit gate, `None` for `CP`.
    pub fn single_qubit_matrix(&self) -> Option<DMatrix<C64>> {
        match *self {
            LogicalGate::RotX { theta, .. } => Some(rot_x(theta)),
            LogicalGate::RotZ { theta, .. } => Some(rot_z(theta)),
            LogicalGate::Euler {
                alpha, theta, beta, ..
            } => Some(rot_z(beta) * rot_x(theta) * rot_z(alpha)),
            LogicalGate::Hadamard { .. } => Some(hadamard()),
            LogicalGate::CP { .. } => None,
        }
    }

    /// Full logical unitary on `n_logical` qubits (logical qubit 1 most significant).
    pub fn logical_unitary(&self, n_logical: usize) -> Result<DMatrix<C64>> {
        for t in self.targets() {
            if t == 0 || t > n_logical {
                return Err(DjcError::LogicalIndexOutOfRange {
                    index: t,
                    n_logical,
                });
            }
        }
        let dim = 1 << n_logical;
        match self {
            LogicalGate::CP { control, target } => {
                if control == target {
                    return Err(DjcError::SameLogicalQubit(*control));
                }
                let (mc, mt) = (1 << (n_logical - control), 1 << (n_logical - target));
                Ok(DMatrix::from_fn(dim, dim, |r, c| {
                    if r != c {
                        C64::new(0.0, 0.0)
                    } else if r & mc != 0 && r & mt != 0 {
                        C64::new(-1.0, 0.0)
                    } else {
                        C64::new(1.0, 0.0)
                    }
                }))
            }
            _ => {
                let u = self.single_qubit_matrix().expect("single-qubit gate");
                let t = self.targets()[0];
                let m = 1 << (n_logical - t);
                Ok(DMatrix::from_fn(dim, dim, |r, c| {
                    if (r & !m) != (c & !m) {
                        C64::new(0.0, 0.0)
                    } else {
                        u[(usize::from(r & m != 0), usize::from(c & m != 0))]
                    }
                }))
            }
        }
    }
}

/// `exp(-i t sigma_x)`
pub fn rot_x(t: f64) -> DMatrix<C64> {
    let (c, s) = (C64::new(t.cos(), 0.0), C64::new(0.0, -t.sin()));
    DMatrix::from_row_slice(2, 2, &[c, s, s, c])
}

/// `exp(-i t sigma_z)`
pub fn rot_z(t: f64) -> DMatrix<C64> {
    let z = C64::new(0.0, 0.0);
    DMatrix::from_row_slice(2, 2, &[C64::from_polar(1.0, -t), z, z, C64::from_polar(1.0, t)])
}

pub fn hadamard() -> DMatrix<C64> {
    let r = C64::new(FRAC_1_SQRT_2, 0.0);
    DMatrix::from_row_slice(2, 2, &[r, r, r, -r])
}

/// Physical term whose evolution is `exp(-i t Xbar_i)`: `T_{2i-1,2i}` scaled by
/// `-sign(J_i)` so that it acts as `+sigma_x` on the code words.
pub fn logical_x_term(code: &CodeSpec, i: usize) -> Result<HamiltonianTerm> {
    code.check_logical(i)?;
    Ok(HamiltonianTerm::xy(2 * i - 1, 2 * i).scaled(-f64::from(code.pair_sign(i))))
}

/// `Zbar_i = Z_{2i-1} Z_{2n-1}`.
pub fn logical_z_term(code: &CodeSpec, i: usize) -> Result<HamiltonianTerm> {
    code.check_logical(i)?;
    Ok(HamiltonianTerm::ising(2 * i - 1, 2 * code.n_pairs() - 1))
}

/// Dense `(Xbar_i, Zbar_i)` on the physical register.
pub fn logical_generators(code: &CodeSpec, i: usize) -> Result<(DenseOperator, DenseOperator)> {
    let n = code.n_physical();
    Ok((
        build_term(&logical_x_term(code, i)?, n)?,
        build_term(&logical_z_term(code, i)?, n)?,
    ))
}

/// Five XY pulses composing to `exp(-i theta Z_i Z_j)` on states where the
/// pair of `i` holds one excitation.
///
/// `i` and `j` are odd physical indices. With `c = i + 1`, the pulses are
/// `T_{c,j}(-pi/4)`, `T_{i,c}(-pi/2)`, `T_{i,j}(2 theta)`, `T_{i,c}(pi/2)`,
/// `T_{c,j}(pi/4)` in application order, i.e. the central `T_{i,j}` evolution
/// conjugated first by `exp(-i pi/2 T_{i,c})` and then by `exp(-i pi/4 T_{c,j})`.
pub fn ising_via_xy(i: usize, j: usize, theta: f64) -> Result<PulseSchedule> {
    for s in [i, j] {
        if s % 2 == 0 {
            return Err(DjcError::EvenIndex(s));
        }
    }
    if i == j {
        return Err(DjcError::DuplicateSite(i));
    }
    let c = i + 1;
    Ok(PulseSchedule::from_pulses([
        Pulse::evolve(HamiltonianTerm::xy(c, j), -FRAC_PI_4),
        Pulse::evolve(HamiltonianTerm::xy(i, c), -FRAC_PI_2),
        Pulse::evolve(HamiltonianTerm::xy(i, j), 2.0 * theta),
        Pulse::evolve(HamiltonianTerm::xy(i, c), FRAC_PI_2),
        Pulse::evolve(HamiltonianTerm::xy(c, j), FRAC_PI_4),
    ]))
}

/// `exp(-i theta Z_i Z_j)` on code states for odd `i`, `j`, exact including phase.
fn code_ising(i: usize, j: usize, theta: f64, model: ControlModel) -> Result<PulseSchedule> {
    match model {
        ControlModel::XXZ => Ok(PulseSchedule::from_pulses([Pulse::evolve(
            HamiltonianTerm::ising(i, j),
            theta,
        )])),
        ControlModel::XY => {
            let mut s = ising_via_xy(i, j, theta)?;
            s.global_phase += theta;
            Ok(s)
        }
    }
}

/// `exp(-i theta Zbar_i)`.
pub fn logical_z_rotation(
    code: &CodeSpec,
    i: usize,
    theta: f64,
    model: ControlModel,
) -> Result<PulseSchedule> {
    code.check_logical(i)?;
    code_ising(2 * i - 1, 2 * code.n_pairs() - 1, theta, model)
}

/// `exp(-i theta Xbar_i)`: one XY pulse in either model.
pub fn logical_x_rotation(code: &CodeSpec, i: usize, theta: f64) -> Result<PulseSchedule> {
    Ok(PulseSchedule::from_pulses([Pulse::evolve(
        logical_x_term(code, i)?,
        theta,
    )]))
}

/// Angles with `u = e^{i phase} exp(-i beta Z) exp(-i theta X) exp(-i alpha Z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerAngles {
    pub alpha: f64,
    pub theta: f64,
    pub beta: f64,
    pub phase: f64,
}

impl EulerAngles {
    pub fn matrix(&self) -> DMatrix<C64> {
        rot_z(self.beta) * rot_x(self.theta) * rot_z(self.alpha) * C64::from_polar(1.0, self.phase)
    }
}

/// Z-X-Z Euler decomposition of a 2x2 unitary.
pub fn euler_angles(u: &DMatrix<C64>) -> Result<EulerAngles> {
    if u.nrows() != 2 || u.ncols() != 2 {
        return Err(DjcError::DimensionMismatch {
            expected: 2,
            got: u.nrows(),
        });
    }
    let residual = (u.adjoint() * u - DMatrix::<C64>::identity(2, 2)).norm();
    if residual > 1e-10 {
        return Err(DjcError::NotUnitary { residual });
    }
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    // det = -1 sits on the branch cut; take +pi so the Hadamard gets quarter turns
    let arg = if det.im.abs() < 1e-14 && det.re < 0.0 { std::f64::consts::PI } else { det.arg() };
    let phase = arg / 2.0;
    let v = u * C64::from_polar(1.0, -phase);
    let (a, b) = (v[(0, 0)], v[(0, 1)]);
    // v = [[cos t e^{-i(al+be)}, -i sin t e^{-i(be-al)}], ...]
    let theta = b.norm().atan2(a.norm());
    let sum = if a.norm() > 1e-14 { -a.arg() } else { 0.0 };
    let diff = if b.norm() > 1e-14 {
        -(b * C64::new(0.0, 1.0)).arg()
    } else {
        0.0
    };
    Ok(EulerAngles {
        alpha: (sum - diff) / 2.0,
        theta,
        beta: (sum + diff) / 2.0,
        phase,
    })
}

fn wrap(angle: f64) -> f64 {
    // exp(-i a sigma) has period 2 pi up to sign; keep angles in (-pi, pi]
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = angle.rem_euclid(two_pi);
    if r > std::f64::consts::PI {
        r - two_pi
    } else {
        r
    }
}

/// Schedule realizing the 2x2 `target` on logical qubit `i` (identity on the others).
///
/// The Euler phase is carried in the schedule's global phase, so the
/// composed unitary equals the target exactly on the logical span.
pub fn euler_synthesize(
    target: &DMatrix<C64>,
    code: &CodeSpec,
    i: usize,
    model: ControlModel,
) -> Result<PulseSchedule> {
    code.check_logical(i)?;
    let e = euler_angles(target)?;
    let mut out = PulseSchedule::new();
    out.global_phase = e.phase;
    const EPS: f64 = 1e-15;
    let (alpha, theta, beta) = (wrap(e.alpha), e.theta, wrap(e.beta));
    if alpha.abs() > EPS {
        out.append(logical_z_rotation(code, i, alpha, model)?);
    }
    if theta.abs() > EPS {
        out.append(logical_x_rotation(code, i, theta)?);
    }
    if beta.abs() > EPS {
        out.append(logical_z_rotation(code, i, beta, model)?);
    }
    Ok(out)
}

/// Controlled phase between logical qubits `i` and `j`.
///
/// Uses `CP = e^{i pi/4} exp(-i pi/4 Zbar_i) exp(-i pi/4 Zbar_j) exp(i pi/4 Zbar_i Zbar_j)`
/// with `Zbar_i Zbar_j = Z_{2i-1} Z_{2j-1}`: one Ising rotation plus the two
/// single-qubit Z corrections and the global phase.
pub fn encoded_cp(code: &CodeSpec, i: usize, j: usize, model: ControlModel) -> Result<PulseSchedule> {
    code.check_logical(i)?;
    code.check_logical(j)?;
    if i == j {
        return Err(DjcError::SameLogicalQubit(i));
    }
    let mut out = code_ising(2 * i - 1, 2 * j - 1, -FRAC_PI_4, model)?;
    out.append(logical_z_rotation(code, i, FRAC_PI_4, model)?);
    out.append(logical_z_rotation(code, j, FRAC_PI_4, model)?);
    out.global_phase += FRAC_PI_4;
    Ok(out)
}

pub fn compile_gate(gate: &LogicalGate, code: &CodeSpec, model: ControlModel) -> Result<PulseSchedule> {
    for t in gate.targets() {
        code.check_logical(t)?;
    }
    match *gate {
        LogicalGate::RotX { target, theta } => logical_x_rotation(code, target, theta),
        LogicalGate::RotZ { target, theta } => logical_z_rotation(code, target, theta, model),
        LogicalGate::CP { control, target } => encoded_cp(code, control, target, model),
        ref g => euler_synthesize(
            &g.single_qubit_matrix().expect("single-qubit gate"),
            code,
            g.targets()[0],
            model,
        ),
    }
}

/// Concatenates the compiled gates in circuit order.
pub fn compile_circuit(
    circuit: &[LogicalGate],
    code: &CodeSpec,
    model: ControlModel,
) -> Result<PulseSchedule> {
    circuit.iter().try_fold(PulseSchedule::new(), |acc, g| {
        Ok(acc.then(compile_gate(g, code, model)?))
    })
}

/// Product of the gates' logical unitaries (the reference for compiled circuits).
pub fn circuit_unitary(circuit: &[LogicalGate], n_logical: usize) -> Result<DMatrix<C64>> {
    let dim = 1 << n_logical;
    circuit.iter().try_fold(DMatrix::identity(dim, dim), |acc, g| {
        Ok(g.logical_unitary(n_logical)? * acc)
    })
}

/// Action of a schedule on the logical span together with how much of it leaves that span.
#[derive(Clone, Debug)]
pub struct LogicalAction {
    /// `B^dagger U B` for the logical basis `B`.
    pub matrix: DMatrix<C64>,
    /// Frobenius norm of `(1 - B B^dagger) U B`.
    pub leakage: f64,
}

pub fn logical_action(schedule: &PulseSchedule, code: &CodeSpec) -> Result<LogicalAction> {
    let basis = code.basis_matrix();
    let images: Vec<QState> = code
        .logical_basis()
        .iter()
        .map(|s| schedule.apply(s))
        .collect::<Result<_>>()?;
    let ub = DMatrix::from_fn(basis.nrows(), basis.ncols(), |r, c| images[c].amplitudes()[r]);
    let matrix = basis.adjoint() * &ub;
    let leakage = (&ub - &basis * &matrix).norm();
    Ok(LogicalAction { matrix, leakage })
}

/// Phase-insensitive Frobenius distance between a schedule's logical action
/// and a target logical unitary, with the leakage norm added in quadrature.
pub fn logical_distance(
    schedule: &PulseSchedule,
    code: &CodeSpec,
    target: &DMatrix<C64>,
) -> Result<f64> {
    let action = logical_action(schedule, code)?;
    let d = crate::operator::phase_insensitive_distance(&action.matrix, target);
    Ok((d * d + action.leakage * action.leakage).sqrt())
}

/// `|tr(T^dagger U)|^2 / d^2` between the logical action and a target.
pub fn logical_fidelity_to(schedule: &PulseSchedule, code: &CodeSpec, target: &DMatrix<C64>) -> Result<f64> {
    let action = logical_action(schedule, code)?;
    let d = target.nrows() as f64;
    let overlap: C64 = target
        .iter()
        .zip(action.matrix.iter())
        .map(|(t, u)| t.conj() * u)
        .sum();
    Ok(overlap.norm_sqr() / (d * d))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepLeakage {
    /// Number of schedule steps applied (1-based).
    pub step: usize,
    /// Largest norm, over logical inputs, outside the balanced subspace.
    pub dfs: f64,
    /// Largest norm, over logical inputs, outside the extended DJC space.
    pub djc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub steps: Vec<StepLeakage>,
    pub max_dfs: f64,
    pub max_djc: f64,
}

/// Tracks every logical basis word through every prefix of the schedule.
pub fn leakage_check(schedule: &PulseSchedule, code: &CodeSpec) -> Result<LeakageReport> {
    let space = djc_space(code);
    let outside_djc = |s: &QState| {
        let coeffs = space.adjoint() * s.amplitudes();
        (s.amplitudes() - &space * coeffs).norm()
    };
    let mut steps: Vec<StepLeakage> = (1..=schedule.len())
        .map(|step| StepLeakage {
            step,
            dfs: 0.0,
            djc: 0.0,
        })
        .collect();
    for word in code.logical_basis() {
        for (k, s) in schedule.trace_states(word)?.iter().enumerate() {
            steps[k].dfs = steps[k].dfs.max(dfs_leakage(s));
            steps[k].djc = steps[k].djc.max(outside_djc(s));
        }
    }
    let max_dfs = steps.iter().map(|s| s.dfs).fold(0.0, f64::max);
    let max_djc = steps.iter().map(|s| s.djc).fold(0.0, f64::max);
    Ok(LeakageReport {
        steps,
        max_dfs,
        max_djc,
    })
}
