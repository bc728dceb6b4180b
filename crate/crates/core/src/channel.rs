//! Spontaneous emission as detected jumps, conditional (no-jump) evolution and
//! collective dephasing kicks.
//!
//! Trajectories use first-order jump/no-jump stepping. At the start of every
//! slice of length `delta` a jump on qubit `i` happens with probability
//! `kappa_i * delta * <n_i>`. The no-jump branch applies the Strang split
//! `D(delta/2) U D(delta/2)` with `D` the diagonal decay of the conditional
//! Hamiltonian, then renormalizes. For a computation step whose pulses
//! conserve excitation number `U` and `D` commute and the split is exact.
//!
//! Each trajectory draws from `ChaCha8Rng::seed_from_u64(seed)` with the
//! stream set to the trajectory index, so every trajectory is reproducible on
//! its own and ensembles do not depend on scheduling order.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::code::{encode, CodeSpec};
use crate::error::{DjcError, Result};
use crate::logic::ControlModel;
use crate::operator::{site_mask, DenseOperator, Pulse, PulseSchedule, QState, Step, C64};
use crate::recovery::{gram_residual, logical_fidelity, polar_isometry, recovery_schedule, JumpParity};

/// Largest allowed `dt * max(kappa)` for the first-order step.
pub const STEP_LIMIT: f64 = 0.05;

/// `S_q = |0><1|_q` on an `n`-qubit register.
pub fn jump_operator(qubit: usize, n_qubits: usize) -> Result<DenseOperator> {
    let lower = DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
    );
    DenseOperator::embed(&lower, &[qubit], n_qubits)
}

fn check_rates(rates: &[f64]) -> Result<()> {
    match rates.iter().find(|k| !(**k >= 0.0) || !k.is_finite()) {
        Some(&k) => Err(DjcError::NegativeRate(k)),
        None => Ok(()),
    }
}

/// `H_C = H_S - (i/2) sum_i kappa_i |1><1|_i`.
pub fn conditional_hamiltonian(h_s: &DenseOperator, rates: &[f64]) -> Result<DenseOperator> {
    check_rates(rates)?;
    let n = h_s.n_qubits();
    if rates.len() != n {
        return Err(DjcError::DimensionMismatch {
            expected: n,
            got: rates.len(),
        });
    }
    let residual = h_s.hermiticity_residual();
    if residual > crate::operator::HERMITIAN_TOL {
        return Err(DjcError::NotHermitian { residual });
    }
    let damping = DenseOperator::diagonal(n, |b| C64::new(0.0, -0.5 * decay_rate(b, rates, n)));
    h_s.add(&damping)
}

/// `sum_i kappa_i n_i(b)` for basis index `b`.
fn decay_rate(b: usize, rates: &[f64], n: usize) -> f64 {
    (1..=n)
        .filter(|&q| b & site_mask(n, q) != 0)
        .map(|q| rates[q - 1])
        .sum()
}

/// `exp(-i H t)` for a general (non-Hermitian) generator, via the matrix exponential.
pub fn conditional_propagator(h_c: &DenseOperator, t: f64) -> DMatrix<C64> {
    (h_c.matrix() * C64::new(0.0, -t)).exp()
}

/// `exp(-i phi S_z)` with `S_z = sum_i Z_i`.
pub fn dephasing_kick(state: &QState, phi: f64) -> QState {
    let n = state.n_qubits();
    let mut out = state.clone();
    for (b, a) in out.amplitudes_mut().iter_mut().enumerate() {
        let sz = n as f64 - 2.0 * b.count_ones() as f64;
        *a *= C64::from_polar(1.0, -phi * sz);
    }
    out
}

/// Collective-dephasing kicks at fixed times with angles uniform in `[low, high)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DephasingSpec {
    pub times: Vec<f64>,
    #[serde(default)]
    pub low: f64,
    #[serde(default = "full_turn")]
    pub high: f64,
}

fn full_turn() -> f64 {
    TAU
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryConfig {
    /// Per-qubit emission rates.
    pub rates: Vec<f64>,
    pub dt: f64,
    pub seed: u64,
    pub recovery_enabled: bool,
    /// Control model used to build recovery schedules.
    pub model: ControlModel,
    pub dephasing: Option<DephasingSpec>,
    /// Computation run while the system decays.
    pub schedule: PulseSchedule,
    /// Duration of one radian of pulse rotation.
    pub tau: f64,
    /// Free decay after the schedule.
    pub idle_time: f64,
}

impl TrajectoryConfig {
    /// Pure free decay for `time` with uniform rate `kappa`.
    pub fn idle(n_qubits: usize, kappa: f64, dt: f64, time: f64, seed: u64) -> Self {
        Self {
            rates: vec![kappa; n_qubits],
            dt,
            seed,
            recovery_enabled: false,
            model: ControlModel::XXZ,
            dephasing: None,
            schedule: PulseSchedule::new(),
            tau: 1.0,
            idle_time: time,
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        check_rates(&self.rates)?;
        if self.rates.len() != n_qubits {
            return Err(DjcError::DimensionMismatch {
                expected: n_qubits,
                got: self.rates.len(),
            });
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(DjcError::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(DjcError::InvalidConfig(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.idle_time >= 0.0) || !self.idle_time.is_finite() {
            return Err(DjcError::InvalidConfig(format!(
                "idle_time must be non-negative, got {}",
                self.idle_time
            )));
        }
        let max_rate = self.rates.iter().copied().fold(0.0, f64::max);
        if self.dt * max_rate >= STEP_LIMIT {
            return Err(DjcError::StepTooLarge {
                dt: self.dt,
                max_rate,
                limit: STEP_LIMIT,
            });
        }
        if let Some(d) = &self.dephasing {
            if !(d.low <= d.high) || d.times.iter().any(|t| !t.is_finite()) {
                return Err(DjcError::InvalidConfig("dephasing range or times invalid".into()));
            }
        }
        self.schedule.validate(n_qubits)
    }

    /// Total simulated time: schedule duration plus idle time.
    pub fn duration(&self) -> f64 {
        self.schedule.steps.iter().map(|s| step_duration(s, self.tau)).sum::<f64>() + self.idle_time
    }
}

fn step_duration(step: &Step, tau: f64) -> f64 {
    step.pulses.iter().map(Pulse::rotation).fold(0.0, f64::max) * tau
}

/// What carries the logical information.
#[derive(Clone, Debug)]
pub enum Register {
    Encoded(CodeSpec),
    /// One unencoded physical qubit, the comparison baseline.
    Bare,
}

impl Register {
    pub fn n_physical(&self) -> usize {
        match self {
            Register::Encoded(c) => c.n_physical(),
            Register::Bare => 1,
        }
    }

    /// Number of logical amplitudes.
    pub fn logical_dim(&self) -> usize {
        match self {
            Register::Encoded(c) => c.logical_dim(),
            Register::Bare => 2,
        }
    }

    /// Encoding isometry; columns are the encoded logical basis states.
    pub fn basis_matrix(&self) -> DMatrix<C64> {
        match self {
            Register::Encoded(c) => c.basis_matrix(),
            Register::Bare => DMatrix::identity(2, 2),
        }
    }

    pub fn encode(&self, logical: &[C64]) -> Result<QState> {
        match self {
            Register::Encoded(c) => encode(c, logical),
            Register::Bare => {
                let s = QState::from_amplitudes(logical.to_vec())?;
                if !s.is_normalized(1e-10) {
                    return Err(DjcError::NotNormalized(s.norm()));
                }
                Ok(s)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub qubit: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppliedRecovery {
    pub time: f64,
    pub block: usize,
    pub parity: JumpParity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub events: Vec<JumpEvent>,
    pub recoveries: Vec<AppliedRecovery>,
    /// `(time, angle)` of every dephasing kick.
    pub kicks: Vec<(f64, f64)>,
    pub final_state: QState,
    /// Overlap with the ideal image of the input under the known events.
    pub logical_fidelity: f64,
    /// Whether the known events kept the logical space isometric.
    pub frame_intact: bool,
}

/// Haar-random normalized amplitude vector.
pub fn random_amplitudes<R: Rng>(dim: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

/// Generator for trajectory `index` of an ensemble with master seed `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

struct Engine<'a> {
    register: &'a Register,
    config: &'a TrajectoryConfig,
    n: usize,
    psi: QState,
    /// Reference map: the encoded basis under the intended pulses and the known jumps/recoveries.
    map: DMatrix<C64>,
    /// `sum_i kappa_i n_i(b) / 2` per basis index.
    damping: Vec<f64>,
    total_rate: f64,
    t: f64,
    kicks_done: usize,
    kick_times: Vec<f64>,
    rng: ChaCha8Rng,
    record_events: Vec<JumpEvent>,
    record_recoveries: Vec<AppliedRecovery>,
    record_kicks: Vec<(f64, f64)>,
}

impl Engine<'_> {
    fn apply_pulses(&mut self, pulses: &[Pulse]) {
        let n = self.n;
        for p in pulses {
            p.apply_in_place(self.psi.amplitudes_mut(), n);
        }
        for mut col in self.map.column_iter_mut() {
            let s = col.as_mut_slice();
            for p in pulses {
                p.apply_in_place(s, n);
            }
        }
    }

    fn decay(&mut self, delta: f64) {
        if self.total_rate == 0.0 {
            return;
        }
        for (a, g) in self.psi.amplitudes_mut().iter_mut().zip(&self.damping) {
            *a *= (-g * delta).exp();
        }
    }

    /// Attempts a jump; returns whether one happened.
    fn maybe_jump(&mut self, delta: f64) -> Result<bool> {
        if self.total_rate == 0.0 {
            return Ok(false);
        }
        let probs: Vec<f64> = (1..=self.n)
            .map(|q| self.config.rates[q - 1] * delta * self.psi.excited_population(q))
            .collect();
        let r: f64 = self.rng.random();
        let mut acc = 0.0;
        let Some(q) = probs.iter().position(|p| {
            acc += p;
            r < acc
        }) else {
            return Ok(false);
        };
        let qubit = q + 1;
        self.psi = self.psi.lowered(qubit).normalized();
        let m = site_mask(self.n, qubit);
        for mut col in self.map.column_iter_mut() {
            let s = col.as_mut_slice();
            for b in 0..s.len() {
                if b & m == 0 {
                    s[b] = s[b | m];
                    s[b | m] = C64::new(0.0, 0.0);
                }
            }
        }
        self.record_events.push(JumpEvent { time: self.t, qubit });
        if self.config.recovery_enabled {
            if let Register::Encoded(_) = self.register {
                let (block, parity) = (qubit.div_ceil(2), JumpParity::of(qubit));
                let rec = recovery_schedule(block, parity, self.config.model)?;
                let pulses: Vec<Pulse> = rec.pulses().cloned().collect();
                self.apply_pulses(&pulses);
                self.record_recoveries.push(AppliedRecovery {
                    time: self.t,
                    block,
                    parity,
                });
            }
        }
        Ok(true)
    }

    fn apply_due_kicks(&mut self) {
        let Some(spec) = &self.config.dephasing else {
            return;
        };
        while self.kicks_done < self.kick_times.len() && self.kick_times[self.kicks_done] <= self.t + 1e-12 {
            let phi = if spec.high > spec.low {
                self.rng.random_range(spec.low..spec.high)
            } else {
                spec.low
            };
            self.psi = dephasing_kick(&self.psi, phi);
            self.record_kicks.push((self.t, phi));
            self.kicks_done += 1;
        }
    }

    /// One slice of length `delta` with the given (already sliced) pulses.
    fn slice(&mut self, delta: f64, pulses: &[Pulse], observer: &mut dyn FnMut(f64, &QState)) -> Result<()> {
        if self.maybe_jump(delta)? {
            self.apply_pulses(pulses);
        } else {
            self.decay(delta / 2.0);
            self.apply_pulses(pulses);
            self.decay(delta / 2.0);
            self.psi.normalize();
        }
        self.t += delta;
        self.apply_due_kicks();
        observer(self.t, &self.psi);
        Ok(())
    }

    fn run_interval(
        &mut self,
        duration: f64,
        pulses: &[Pulse],
        observer: &mut dyn FnMut(f64, &QState),
    ) -> Result<()> {
        if duration <= 0.0 {
            self.apply_pulses(pulses);
            return Ok(());
        }
        let parts = (duration / self.config.dt).ceil().max(1.0) as usize;
        let delta = duration / parts as f64;
        let sliced: Vec<Pulse> = pulses.iter().map(|p| p.slice(parts)).collect();
        for _ in 0..parts {
            self.slice(delta, &sliced, observer)?;
        }
        Ok(())
    }

    fn run_step(&mut self, step: &Step, observer: &mut dyn FnMut(f64, &QState)) -> Result<()> {
        let disjoint = {
            let mut seen = std::collections::HashSet::new();
            step.pulses.iter().flat_map(|p| p.sites()).all(|s| seen.insert(*s))
        };
        let simultaneous = disjoint && step.pulses.iter().all(|p| matches!(p, Pulse::Evolve { .. }));
        if simultaneous {
            self.run_interval(step_duration(step, self.config.tau), &step.pulses, observer)
        } else {
            // fixed gates and overlapping pulses run one after another
            for p in &step.pulses {
                self.run_interval(p.rotation() * self.config.tau, std::slice::from_ref(p), observer)?;
            }
            Ok(())
        }
    }
}

/// Runs one trajectory of `logical` (encoded by `register`) under `config`.
///
/// `index` selects the random stream; the observer sees `(t, state)` at
/// `t = 0` and after every slice.
pub fn run_trajectory_observed(
    register: &Register,
    logical: &[C64],
    config: &TrajectoryConfig,
    index: u64,
    observer: &mut dyn FnMut(f64, &QState),
) -> Result<TrajectoryRecord> {
    let n = register.n_physical();
    config.validate(n)?;
    let psi = register.encode(logical)?;
    let damping = (0..1usize << n)
        .map(|b| 0.5 * decay_rate(b, &config.rates, n))
        .collect();
    let mut kick_times = config.dephasing.as_ref().map(|d| d.times.clone()).unwrap_or_default();
    kick_times.sort_by(f64::total_cmp);
    let mut e = Engine {
        register,
        config,
        n,
        psi,
        map: register.basis_matrix(),
        damping,
        total_rate: config.rates.iter().sum(),
        t: 0.0,
        kicks_done: 0,
        kick_times,
        rng: trajectory_rng(config.seed, index),
        record_events: Vec::new(),
        record_recoveries: Vec::new(),
        record_kicks: Vec::new(),
    };
    e.apply_due_kicks();
    observer(0.0, &e.psi);
    for step in &config.schedule.steps {
        e.run_step(step, observer)?;
    }
    if config.idle_time > 0.0 {
        e.run_interval(config.idle_time, &[], observer)?;
    }
    let phase = C64::from_polar(1.0, config.schedule.global_phase);
    let final_state = e.psi.scaled(phase);
    let map = e.map * phase;
    let logical_fidelity = logical_fidelity(&final_state, logical, &polar_isometry(&map))?;
    Ok(TrajectoryRecord {
        events: e.record_events,
        recoveries: e.record_recoveries,
        kicks: e.record_kicks,
        final_state,
        logical_fidelity,
        frame_intact: gram_residual(&map) < 1e-10,
    })
}

pub fn run_trajectory(
    register: &Register,
    logical: &[C64],
    config: &TrajectoryConfig,
    index: u64,
) -> Result<TrajectoryRecord> {
    run_trajectory_observed(register, logical, config, index, &mut |_, _| {})
}

/// Exact no-jump state after `t` under `H_S` and uniform decay, for comparison.
pub fn no_jump_state(h_s: &DenseOperator, rates: &[f64], state: &QState, t: f64) -> Result<QState> {
    let h_c = conditional_hamiltonian(h_s, rates)?;
    let v: DVector<C64> = conditional_propagator(&h_c, t) * state.amplitudes();
    QState::from_vector(v)
}
