//! JSON forms of schedules and a serializer that writes every float with 17
//! significant digits so values round-trip exactly.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{DjcError, Result};
use crate::operator::{HamiltonianTerm, Pulse, PulseSchedule, Step, TermKind};

/// One pulse of a schedule file; `step` groups pulses executed together.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseRecord {
    pub step: usize,
    /// `XY`, `Ising`, `LocalZ` or `Hadamard`.
    pub kind: String,
    pub sites: Vec<usize>,
    pub coefficient: f64,
    pub angle: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDocument {
    pub global_phase: f64,
    pub n_steps: usize,
    pub pulses: Vec<PulseRecord>,
}

impl ScheduleDocument {
    pub fn from_schedule(s: &PulseSchedule) -> Self {
        let pulses = s
            .steps
            .iter()
            .enumerate()
            .flat_map(|(k, step)| {
                step.pulses.iter().map(move |p| match p {
                    Pulse::Evolve { term, angle } => PulseRecord {
                        step: k + 1,
                        kind: format!("{:?}", term.kind),
                        sites: term.sites.clone(),
                        coefficient: term.coefficient,
                        angle: *angle,
                    },
                    Pulse::Hadamard { site } => PulseRecord {
                        step: k + 1,
                        kind: "Hadamard".into(),
                        sites: vec![*site],
                        coefficient: 1.0,
                        angle: 0.0,
                    },
                })
            })
            .collect();
        Self {
            global_phase: s.global_phase,
            n_steps: s.len(),
            pulses,
        }
    }

    pub fn to_schedule(&self) -> Result<PulseSchedule> {
        let mut steps = vec![Step::default(); self.n_steps];
        for p in &self.pulses {
            let slot = p
                .step
                .checked_sub(1)
                .and_then(|k| steps.get_mut(k))
                .ok_or_else(|| DjcError::InvalidConfig(format!("pulse step {} out of range", p.step)))?;
            let kind = match p.kind.as_str() {
                "XY" => Some(TermKind::XY),
                "Ising" => Some(TermKind::Ising),
                "LocalZ" => Some(TermKind::LocalZ),
                "Hadamard" => None,
                other => return Err(DjcError::InvalidConfig(format!("unknown pulse kind `{other}`"))),
            };
            let pulse = match kind {
                Some(kind) => Pulse::Evolve {
                    term: HamiltonianTerm {
                        kind,
                        sites: p.sites.clone(),
                        coefficient: p.coefficient,
                    },
                    angle: p.angle,
                },
                None => Pulse::Hadamard {
                    site: *p.sites.first().ok_or_else(|| DjcError::InvalidConfig("Hadamard without site".into()))?,
                },
            };
            slot.pulses.push(pulse);
        }
        Ok(PulseSchedule {
            steps,
            global_phase: self.global_phase,
        })
    }
}

/// Pretty JSON with floats written as `{:.16e}` (17 significant digits).
pub struct ExactFloats<'a> {
    inner: PrettyFormatter<'a>,
}

impl Default for ExactFloats<'_> {
    fn default() -> Self {
        Self {
            inner: PrettyFormatter::new(),
        }
    }
}

impl Formatter for ExactFloats<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

pub fn to_exact_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats::default());
    value
        .serialize(&mut ser)
        .map_err(|e| DjcError::InvalidConfig(e.to_string()))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::build_code;
    use crate::logic::{compile_circuit, ControlModel, LogicalGate};
    use crate::recovery::{recovery_schedule, JumpParity};

    #[test]
    fn schedule_round_trips() {
        let code = build_code(3, &[1, -1, 1]).unwrap();
        let s = compile_circuit(
            &[
                LogicalGate::Hadamard { target: 1 },
                LogicalGate::CP { control: 1, target: 2 },
            ],
            &code,
            ControlModel::XY,
        )
        .unwrap();
        let doc = ScheduleDocument::from_schedule(&s);
        let text = to_exact_json(&doc).unwrap();
        let back: ScheduleDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_schedule().unwrap(), s);

        let r = recovery_schedule(2, JumpParity::Even, ControlModel::XY).unwrap();
        assert_eq!(ScheduleDocument::from_schedule(&r).to_schedule().unwrap(), r);
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        let x = 0.1 + 0.2;
        let text = to_exact_json(&serde_json::json!({ "x": x, "bad": f64::NAN })).unwrap();
        assert!(text.contains("3.0000000000000004e-1"), "{text}");
        assert!(text.contains("null"));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["x"].as_f64().unwrap(), x);
    }

    #[test]
    fn bad_documents_are_rejected() {
        let doc = ScheduleDocument {
            global_phase: 0.0,
            n_steps: 1,
            pulses: vec![PulseRecord {
                step: 2,
                kind: "XY".into(),
                sites: vec![1, 2],
                coefficient: 1.0,
                angle: 0.1,
            }],
        };
        assert!(doc.to_schedule().is_err());
        let doc = ScheduleDocument {
            pulses: vec![PulseRecord {
                step: 1,
                kind: "XX".into(),
                ..doc.pulses[0].clone()
            }],
            ..doc
        };
        assert!(doc.to_schedule().is_err());
    }
}
