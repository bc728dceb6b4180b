//! Seeded trajectory ensembles and their CSV / JSON summaries.
//!
//! Trajectory `k` uses random stream `k` of the master seed (see
//! [`trajectory_rng`]); random logical inputs come from the same stream index
//! of a second seed, `seed ^ INPUT_SEED_MIX`. Results are collected in index
//! order, so the output does not depend on thread scheduling.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{random_amplitudes, run_trajectory, run_trajectory_observed, trajectory_rng, Register, TrajectoryConfig};
use crate::error::{DjcError, Result};
use crate::operator::C64;

pub const INPUT_SEED_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Debug, PartialEq)]
pub enum InitialLogical {
    Fixed(Vec<C64>),
    /// Haar-random per trajectory.
    Random,
}

impl InitialLogical {
    pub fn amplitudes(&self, dim: usize, seed: u64, index: u64) -> Vec<C64> {
        match self {
            InitialLogical::Fixed(a) => a.clone(),
            InitialLogical::Random => random_amplitudes(dim, &mut trajectory_rng(seed ^ INPUT_SEED_MIX, index)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub trajectory_id: u64,
    pub n_jumps: usize,
    pub first_jump_qubit: Option<usize>,
    pub logical_fidelity: f64,
    pub frame_intact: bool,
}

pub fn run_ensemble(
    register: &Register,
    config: &TrajectoryConfig,
    initial: &InitialLogical,
    n_trajectories: usize,
) -> Result<Vec<TrajectoryRow>> {
    config.validate(register.n_physical())?;
    let dim = register.logical_dim();
    (0..n_trajectories as u64)
        .into_par_iter()
        .map(|k| {
            let a = initial.amplitudes(dim, config.seed, k);
            let r = run_trajectory(register, &a, config, k)?;
            Ok(TrajectoryRow {
                trajectory_id: k,
                n_jumps: r.events.len(),
                first_jump_qubit: r.events.first().map(|e| e.qubit),
                logical_fidelity: r.logical_fidelity,
                frame_intact: r.frame_intact,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub n: usize,
    pub mean: f64,
    pub stddev: f64,
    pub stderr: f64,
}

impl MeanEstimate {
    pub fn of(xs: impl IntoIterator<Item = f64>) -> Self {
        let xs: Vec<f64> = xs.into_iter().collect();
        let n = xs.len();
        if n == 0 {
            return Self {
                n,
                mean: f64::NAN,
                stddev: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            n,
            mean,
            stddev: var.sqrt(),
            stderr: (var / n as f64).sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub fidelity: MeanEstimate,
    /// Fidelity over trajectories with exactly one jump.
    pub single_jump_fidelity: MeanEstimate,
    pub min_fidelity: f64,
    pub frame_intact_fraction: f64,
    /// Number of trajectories per jump count.
    pub jump_histogram: BTreeMap<usize, usize>,
}

pub fn summarize(rows: &[TrajectoryRow]) -> EnsembleSummary {
    let mut jump_histogram = BTreeMap::new();
    for r in rows {
        *jump_histogram.entry(r.n_jumps).or_insert(0) += 1;
    }
    EnsembleSummary {
        fidelity: MeanEstimate::of(rows.iter().map(|r| r.logical_fidelity)),
        single_jump_fidelity: MeanEstimate::of(rows.iter().filter(|r| r.n_jumps == 1).map(|r| r.logical_fidelity)),
        min_fidelity: rows.iter().map(|r| r.logical_fidelity).fold(f64::INFINITY, f64::min),
        frame_intact_fraction: rows.iter().filter(|r| r.frame_intact).count() as f64 / rows.len().max(1) as f64,
        jump_histogram,
    }
}

/// CSV with columns `trajectory_id, n_jumps, first_jump_qubit, logical_fidelity`.
pub fn write_csv<W: Write>(rows: &[TrajectoryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| DjcError::InvalidConfig(format!("csv: {e}"));
    w.write_record(["trajectory_id", "n_jumps", "first_jump_qubit", "logical_fidelity"])
        .map_err(io)?;
    for r in rows {
        w.write_record([
            r.trajectory_id.to_string(),
            r.n_jumps.to_string(),
            r.first_jump_qubit.map(|q| q.to_string()).unwrap_or_default(),
            format!("{:.16e}", r.logical_fidelity),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| DjcError::InvalidConfig(format!("csv: {e}")))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationSample {
    pub time: f64,
    /// Per-qubit excited population estimate.
    pub qubits: Vec<MeanEstimate>,
}

/// Ensemble average of `<n_i>` at the requested times (rounded up to the next slice end).
pub fn population_decay(
    register: &Register,
    logical: &[C64],
    config: &TrajectoryConfig,
    n_trajectories: usize,
    sample_times: &[f64],
) -> Result<Vec<PopulationSample>> {
    let n = register.n_physical();
    let mut times = sample_times.to_vec();
    times.sort_by(f64::total_cmp);
    let per: Vec<(Vec<f64>, Vec<Vec<f64>>)> = (0..n_trajectories as u64)
        .into_par_iter()
        .map(|k| {
            let mut actual = Vec::with_capacity(times.len());
            let mut pops = Vec::with_capacity(times.len());
            run_trajectory_observed(register, logical, config, k, &mut |t, s| {
                while actual.len() < times.len() && t >= times[actual.len()] - 1e-9 {
                    actual.push(t);
                    pops.push((1..=n).map(|q| s.excited_population(q)).collect());
                }
            })?;
            Ok((actual, pops))
        })
        .collect::<Result<_>>()?;
    let recorded = per.iter().map(|(a, _)| a.len()).min().unwrap_or(0);
    Ok((0..recorded)
        .map(|i| PopulationSample {
            time: per[0].0[i],
            qubits: (0..n)
                .map(|q| MeanEstimate::of(per.iter().map(|(_, p)| p[i][q])))
                .collect(),
        })
        .collect())
}
