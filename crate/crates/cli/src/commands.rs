use std::path::Path;

use djc::channel::trajectory_rng;
use djc::code::{check_qecc, dfs_leakage};
use djc::ensemble::{run_ensemble, summarize, write_csv};
use djc::logic::{
    circuit_unitary, compile_circuit, leakage_check, logical_action, logical_distance, logical_fidelity_to,
    logical_generators,
};
use djc::operator::phase_insensitive_distance;
use djc::prep::{pair_ground_product, prepare_ground_state, read_all};
use djc::recovery::{logical_pauli, PauliKind};
use djc::wire::{to_exact_json, ScheduleDocument};
use djc::{CodeSpec, C64};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CompileConfig, PrepCheckConfig, SimulateConfig, VerifyConfig};
use crate::output::{write_file, write_report};
use crate::CliError;

/// Identities checked by `verify` and `compile` hold to this tolerance.
pub const CHECK_TOL: f64 = 1e-12;
/// Compiled schedules must reproduce their circuit to this logical distance.
pub const COMPILE_TOL: f64 = 1e-8;
/// Ground states must overlap the code space to within this.
pub const PREP_TOL: f64 = 1e-10;

pub struct Outcome {
    pub passed: bool,
}

fn code_summary(code: &CodeSpec) -> Value {
    json!({
        "n_pairs": code.n_pairs(),
        "pair_signs": code.pair_signs(),
        "n_physical": code.n_physical(),
        "n_logical": code.n_logical(),
    })
}

fn generator_algebra(code: &CodeSpec) -> djc::Result<Value> {
    let b = code.basis_matrix();
    let nl = code.n_logical();
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for i in 1..=nl {
        let (x, z) = logical_generators(code, i)?;
        let rx = (x.matrix() * &b - &b * logical_pauli(nl, i, PauliKind::X)).norm();
        let rz = (z.matrix() * &b - &b * logical_pauli(nl, i, PauliKind::Z)).norm();
        let anti = (x.mul(&z)?.add(&z.mul(&x)?)?.matrix() * &b).norm();
        worst = worst.max(rx).max(rz).max(anti);
        rows.push(json!({ "logical": i, "x_residual": rx, "z_residual": rz, "anticommutator": anti }));
    }
    let mut commute = 0.0f64;
    for i in 1..=nl {
        for j in i + 1..=nl {
            let (xi, zi) = logical_generators(code, i)?;
            let (xj, zj) = logical_generators(code, j)?;
            for (a, bb) in [(&xi, &xj), (&xi, &zj), (&zi, &xj), (&zi, &zj)] {
                commute = commute.max((a.commutator(bb)?.matrix() * &b).norm());
            }
        }
    }
    worst = worst.max(commute);
    Ok(json!({
        "generators": rows,
        "max_commutator_between_qubits": commute,
        "max_residual": worst,
        "pass": worst < CHECK_TOL,
    }))
}

pub fn verify(cfg: &VerifyConfig, base: &Path, out: &Path) -> Result<Outcome, CliError> {
    let code = cfg.code(base)?;
    let b = code.basis_matrix();
    let dim = code.logical_dim();
    let ortho = (b.adjoint() * &b - DMatrix::<C64>::identity(dim, dim)).norm();
    let dfs = code.logical_basis().iter().map(dfs_leakage).fold(0.0, f64::max);
    let qecc = check_qecc(&code, &[]);
    let (num, den) = code.rate();
    let n = code.n_pairs();
    let rate_ok = num * 2 * n == den * (n - 1);
    let algebra = generator_algebra(&code)?;
    let passed = ortho < CHECK_TOL && dfs < CHECK_TOL && qecc.pass && rate_ok && algebra["pass"] == true;
    let body = json!({
        "code": code_summary(&code),
        "orthonormality": { "residual": ortho, "pass": ortho < CHECK_TOL },
        "dfs_membership": { "max_leakage": dfs, "pass": dfs < CHECK_TOL },
        "qecc": qecc,
        "rate": {
            "numerator": num,
            "denominator": den,
            "value": num as f64 / den as f64,
            "expected": format!("{}/{}", n - 1, 2 * n),
            "pass": rate_ok,
        },
        "generator_algebra": algebra,
        "passed": passed,
    });
    write_report(out, "verify", &body)?;
    Ok(Outcome { passed })
}

#[derive(Serialize)]
struct ScheduleFile<'a> {
    #[serde(flatten)]
    schedule: &'a ScheduleDocument,
    verification: &'a Value,
}

pub fn compile(cfg: &CompileConfig, out: &Path) -> Result<Outcome, CliError> {
    let code = cfg.code()?;
    let schedule = compile_circuit(&cfg.circuit, &code, cfg.model)?;
    let target = circuit_unitary(&cfg.circuit, code.n_logical())?;
    let action = logical_action(&schedule, &code)?;
    let distance = logical_distance(&schedule, &code, &target)?;
    let leakage = leakage_check(&schedule, &code)?;
    let model_ok = cfg.model.check(&schedule).is_ok();
    let passed = distance < COMPILE_TOL && leakage.max_djc < COMPILE_TOL && model_ok;
    let verification = json!({
        "logical_distance": distance,
        "phase_insensitive_distance": phase_insensitive_distance(&action.matrix, &target),
        "span_leakage": action.leakage,
        "logical_fidelity": logical_fidelity_to(&schedule, &code, &target)?,
        "model_respected": model_ok,
        "leakage": leakage,
        "pass": passed,
    });
    let doc = ScheduleDocument::from_schedule(&schedule);
    let text = to_exact_json(&ScheduleFile {
        schedule: &doc,
        verification: &verification,
    })?;
    write_file(out, "schedule.json", text.as_bytes())?;
    let body = json!({
        "code": code_summary(&code),
        "model": cfg.model,
        "circuit": cfg.circuit,
        "n_steps": schedule.len(),
        "n_pulses": schedule.pulses().count(),
        "global_phase": schedule.global_phase,
        "verification": verification,
        "passed": passed,
    });
    write_report(out, "compile", &body)?;
    Ok(Outcome { passed })
}

pub fn simulate(cfg: &SimulateConfig, seed: u64, out: &Path) -> Result<Outcome, CliError> {
    let plan = cfg.plan(seed)?;
    log::info!(
        "running {} trajectories on {} qubits for t = {}",
        plan.n_trajectories,
        plan.register.n_physical(),
        plan.config.duration()
    );
    let rows = run_ensemble(&plan.register, &plan.config, &plan.initial, plan.n_trajectories)?;
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv)?;
    write_file(out, "trajectories.csv", &csv)?;
    let body = json!({
        "config": cfg,
        "seed": seed,
        "n_physical": plan.register.n_physical(),
        "duration": plan.config.duration(),
        "recovery_enabled": plan.config.recovery_enabled,
        "summary": summarize(&rows),
        "passed": true,
    });
    write_report(out, "simulate", &body)?;
    Ok(Outcome { passed: true })
}

pub fn prep_check(cfg: &PrepCheckConfig, seed: u64, out: &Path) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let report = prepare_ground_state(&cfg.couplings)?;
    let code = report.code.clone();
    let product = pair_ground_product(code.pair_signs())?.distance(&report.ground_state);
    let overlap_ok = (report.overlap_with_code_projector - 1.0).abs() < PREP_TOL;
    let mut passed = overlap_ok && product < PREP_TOL;
    let mut body = json!({
        "code": code_summary(&code),
        "couplings": cfg.couplings,
        "ground_energy": report.ground_energy,
        "gap": report.gap,
        "overlap_with_code_projector": report.overlap_with_code_projector,
        "in_code_space": report.in_code_space,
        "product_state_distance": product,
    });
    if cfg.shots > 0 {
        let nl = code.n_logical();
        let state = if cfg.circuit.is_empty() {
            report.ground_state.clone()
        } else {
            compile_circuit(&cfg.circuit, &code, cfg.model)?.apply(&report.ground_state)?
        };
        // each shot reads a fresh copy with its own random stream
        let shots: Vec<Vec<Option<u8>>> = (0..cfg.shots as u64)
            .into_par_iter()
            .map(|k| read_all(&state, &code, cfg.model, &mut trajectory_rng(seed, k)))
            .collect::<djc::Result<_>>()?;
        let mut csv = String::from("shot,logical_index,bit\n");
        let mut counts = vec![0usize; 1 << nl];
        let mut invalid = 0usize;
        for (k, bits) in shots.iter().enumerate() {
            for (j, b) in bits.iter().enumerate() {
                csv.push_str(&format!("{k},{},{}\n", j + 1, b.map(|b| b.to_string()).unwrap_or_default()));
            }
            match bits.iter().try_fold(0usize, |acc, b| b.map(|b| (acc << 1) | usize::from(b))) {
                Some(word) => counts[word] += 1,
                None => invalid += 1,
            }
        }
        write_file(out, "readout.csv", csv.as_bytes())?;

        let ideal = circuit_unitary(&cfg.circuit, nl)? * DVector::from_element(1 << nl, C64::new((0.5f64).powi(nl as i32).sqrt(), 0.0));
        let probs: Vec<f64> = ideal.iter().map(|a| a.norm_sqr()).collect();
        let (chi2, cells) = chi_square(&counts, &probs, cfg.shots);
        let df = cells.saturating_sub(1) as f64;
        let limit = df + 3.0 * (2.0 * df).sqrt();
        let readout_ok = invalid == 0 && chi2 <= limit;
        passed &= readout_ok;
        body["readout"] = json!({
            "shots": cfg.shots,
            "counts": counts,
            "invalid_shots": invalid,
            "born_probabilities": probs,
            "chi_square": chi2,
            "degrees_of_freedom": df,
            "limit": limit,
            "pass": readout_ok,
        });
    }
    body["seed"] = json!(seed);
    body["passed"] = json!(passed);
    write_report(out, "prep-check", &body)?;
    Ok(Outcome { passed })
}

/// Pearson statistic over outcomes with nonzero expected probability; any
/// count in a zero-probability outcome makes the statistic infinite.
fn chi_square(counts: &[usize], probs: &[f64], shots: usize) -> (f64, usize) {
    let mut chi2 = 0.0;
    let mut cells = 0;
    for (&n, &p) in counts.iter().zip(probs) {
        let e = p * shots as f64;
        if e > 1e-9 {
            chi2 += (n as f64 - e).powi(2) / e;
            cells += 1;
        } else if n > 0 {
            chi2 = f64::INFINITY;
        }
    }
    (chi2, cells)
}
