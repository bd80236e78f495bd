//! JSON file formats.
//!
//! Probabilities and weights may be written as strings (`"1/2"`, `"0.85"`)
//! or JSON numbers; both are read exactly. Output always uses strings.
//!
//! ```json
//! {"preparations": ["P1", "P2"],
//!  "measurements": [{"id": "M1", "outcomes": ["0", "1"],
//!                    "probs": {"P1": {"0": "1", "1": "0"}, "P2": {"0": "1/2", "1": "1/2"}}}]}
//! ```
//!
//! Scenarios and references list preparation ids and effects; an effect is
//! `"null"`, `"trivial"`, a label such as `"0+1|M1"`, or
//! `{"m": "M1", "event": ["0"]}`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{
    DataTable, EffectDensity, EffectRef, Measurement, ModelError, PrepDensity, Reference,
    Scenario, Violation,
};
use crate::rational::{format_rational, from_json, Rational};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {what}: {message}")]
    Parse { what: String, message: String },
    #[error("invalid table: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidTable(Vec<Violation>),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl IoError {
    fn parse(what: &str, message: impl ToString) -> Self {
        IoError::Parse {
            what: what.to_string(),
            message: message.to_string(),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementFile {
    pub id: String,
    pub outcomes: Vec<String>,
    /// preparation → outcome → probability
    pub probs: BTreeMap<String, BTreeMap<String, serde_json::Value>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableFile {
    pub preparations: Vec<String>,
    pub measurements: Vec<MeasurementFile>,
}

impl TableFile {
    /// Converts to a table, reporting missing, unknown and unparsable
    /// entries as violations.
    pub fn to_table(&self) -> Result<DataTable, Vec<Violation>> {
        let mut violations = Vec::new();
        let mut measurements = Vec::new();
        for m in &self.measurements {
            let loc = format!("measurement {}", m.id);
            for p in m.probs.keys() {
                if !self.preparations.contains(p) {
                    violations.push(Violation::new(
                        "unknown-preparation",
                        &loc,
                        format!("probabilities given for unknown preparation {p:?}"),
                    ));
                }
            }
            let mut probs = vec![Vec::with_capacity(self.preparations.len()); m.outcomes.len()];
            for p in &self.preparations {
                let column = m.probs.get(p);
                if let Some(column) = column {
                    for o in column.keys() {
                        if !m.outcomes.contains(o) {
                            violations.push(Violation::new(
                                "unknown-outcome",
                                format!("{loc}, preparation {p}"),
                                format!("probability given for unknown outcome {o:?}"),
                            ));
                        }
                    }
                }
                for (i, o) in m.outcomes.iter().enumerate() {
                    match column.and_then(|c| c.get(o)) {
                        None => violations.push(Violation::new(
                            "missing",
                            format!("{loc}, outcome {o}, preparation {p}"),
                            "no probability given",
                        )),
                        Some(v) => match from_json(v) {
                            Ok(r) => probs[i].push(r),
                            Err(e) => violations.push(Violation::new(
                                "parse",
                                format!("{loc}, outcome {o}, preparation {p}"),
                                e.to_string(),
                            )),
                        },
                    }
                }
            }
            measurements.push(Measurement {
                id: m.id.clone(),
                outcomes: m.outcomes.clone(),
                probs,
            });
        }
        if !violations.is_empty() {
            return Err(violations);
        }
        DataTable::new(self.preparations.clone(), measurements)
    }

    pub fn from_table(table: &DataTable) -> Self {
        let measurements = table
            .measurements()
            .iter()
            .map(|m| MeasurementFile {
                id: m.id.clone(),
                outcomes: m.outcomes.clone(),
                probs: table
                    .preparations()
                    .iter()
                    .enumerate()
                    .map(|(p, prep)| {
                        let column = m
                            .outcomes
                            .iter()
                            .enumerate()
                            .map(|(o, outcome)| {
                                (
                                    outcome.clone(),
                                    serde_json::Value::String(format_rational(&m.probs[o][p])),
                                )
                            })
                            .collect();
                        (prep.clone(), column)
                    })
                    .collect(),
            })
            .collect();
        TableFile {
            preparations: table.preparations().to_vec(),
            measurements,
        }
    }
}

pub fn parse_table(text: &str) -> Result<DataTable, IoError> {
    let file: TableFile = serde_json::from_str(text).map_err(|e| IoError::parse("table", e))?;
    file.to_table().map_err(IoError::InvalidTable)
}

pub fn table_to_json(table: &DataTable) -> String {
    serde_json::to_string_pretty(&TableFile::from_table(table)).expect("table serializes")
}

pub fn read_table(path: &Path) -> Result<DataTable, IoError> {
    parse_table(&read_text(path)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EffectJson {
    Label(String),
    Event { m: String, event: Vec<String> },
}

impl EffectJson {
    pub fn from_effect(effect: &EffectRef) -> Self {
        match effect {
            EffectRef::Null => EffectJson::Label("null".into()),
            EffectRef::Trivial => EffectJson::Label("trivial".into()),
            EffectRef::Event { measurement, event } => EffectJson::Event {
                m: measurement.clone(),
                event: event.iter().cloned().collect(),
            },
        }
    }

    pub fn to_effect(&self) -> Result<EffectRef, ModelError> {
        match self {
            EffectJson::Label(label) => EffectRef::parse_label(label),
            EffectJson::Event { m, event } => Ok(EffectRef::Event {
                measurement: m.clone(),
                event: event.iter().cloned().collect(),
            }),
        }
    }
}

/// Shared shape of scenario and reference files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProceduresFile {
    #[serde(default)]
    pub preparations: Vec<String>,
    #[serde(default)]
    pub effects: Vec<EffectJson>,
}

impl ProceduresFile {
    pub fn from_parts(preparations: &[String], effects: &[EffectRef]) -> Self {
        Self {
            preparations: preparations.to_vec(),
            effects: effects.iter().map(EffectJson::from_effect).collect(),
        }
    }

    fn effects(&self) -> Result<Vec<EffectRef>, ModelError> {
        self.effects.iter().map(EffectJson::to_effect).collect()
    }

    pub fn to_scenario(&self) -> Result<Scenario, ModelError> {
        Ok(Scenario {
            preparations: self.preparations.clone(),
            effects: self.effects()?,
        })
    }

    pub fn to_reference(&self) -> Result<Reference, ModelError> {
        Ok(Reference {
            preparations: self.preparations.clone(),
            effects: self.effects()?,
        })
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, IoError> {
    let file: ProceduresFile = serde_json::from_str(text).map_err(|e| IoError::parse("scenario", e))?;
    Ok(file.to_scenario()?)
}

pub fn parse_reference(text: &str) -> Result<Reference, IoError> {
    let file: ProceduresFile =
        serde_json::from_str(text).map_err(|e| IoError::parse("reference", e))?;
    Ok(file.to_reference()?)
}

pub fn read_scenario(path: &Path) -> Result<Scenario, IoError> {
    parse_scenario(&read_text(path)?)
}

pub fn read_reference(path: &Path) -> Result<Reference, IoError> {
    parse_reference(&read_text(path)?)
}

pub fn scenario_to_json(scenario: &Scenario) -> String {
    serde_json::to_string_pretty(&ProceduresFile::from_parts(
        &scenario.preparations,
        &scenario.effects,
    ))
    .expect("scenario serializes")
}

pub fn reference_to_json(reference: &Reference) -> String {
    serde_json::to_string_pretty(&ProceduresFile::from_parts(
        &reference.preparations,
        &reference.effects,
    ))
    .expect("reference serializes")
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ReferenceListFile {
    Bare(Vec<ProceduresFile>),
    Wrapped { references: Vec<ProceduresFile> },
}

/// A list of references, either a bare array or `{"references": [...]}`.
pub fn parse_reference_list(text: &str) -> Result<Vec<Reference>, IoError> {
    let file: ReferenceListFile =
        serde_json::from_str(text).map_err(|e| IoError::parse("reference list", e))?;
    let items = match file {
        ReferenceListFile::Bare(v) | ReferenceListFile::Wrapped { references: v } => v,
    };
    Ok(items
        .iter()
        .map(ProceduresFile::to_reference)
        .collect::<Result<_, _>>()?)
}

fn parse_weights(what: &str, raw: &BTreeMap<String, serde_json::Value>) -> Result<Vec<(String, Rational)>, IoError> {
    raw.iter()
        .map(|(k, v)| Ok((k.clone(), from_json(v).map_err(|e| IoError::parse(what, e))?)))
        .collect()
}

/// `{"P1": "1/2", "P2": "1/2"}`
pub fn parse_prep_density(value: &serde_json::Value) -> Result<PrepDensity, IoError> {
    let raw: BTreeMap<String, serde_json::Value> =
        serde_json::from_value(value.clone()).map_err(|e| IoError::parse("preparation density", e))?;
    let mut density = PrepDensity::default();
    for (k, w) in parse_weights("preparation density", &raw)? {
        *density.weights.entry(k).or_insert_with(num_traits::Zero::zero) += w;
    }
    Ok(density)
}

/// `{"z0|M1": "1/2", "z1|M1": "1/2"}`
pub fn parse_effect_density(value: &serde_json::Value) -> Result<EffectDensity, IoError> {
    let raw: BTreeMap<String, serde_json::Value> =
        serde_json::from_value(value.clone()).map_err(|e| IoError::parse("effect density", e))?;
    let mut density = EffectDensity::default();
    for (k, w) in parse_weights("effect density", &raw)? {
        *density.weights.entry(EffectRef::parse_label(&k)?).or_insert_with(num_traits::Zero::zero) += w;
    }
    Ok(density)
}

fn default_max_references() -> usize {
    4096
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFile {
    #[serde(default)]
    prep_pool: Vec<String>,
    #[serde(default)]
    effect_pool: Vec<EffectJson>,
    #[serde(default)]
    fixed_preps: Vec<String>,
    #[serde(default)]
    fixed_effects: Vec<EffectJson>,
    #[serde(default = "default_max_references")]
    max_references: usize,
    #[serde(default)]
    faithful_only: bool,
}

/// Power-set enumeration policy:
/// `{"prep_pool", "effect_pool", "fixed_preps", "fixed_effects", "max_references", "faithful_only"}`.
pub fn parse_reference_policy(text: &str) -> Result<crate::graph::ReferencePolicy, IoError> {
    let file: PolicyFile = serde_json::from_str(text).map_err(|e| IoError::parse("enumeration policy", e))?;
    let effects = |v: &[EffectJson]| v.iter().map(EffectJson::to_effect).collect::<Result<Vec<_>, _>>();
    Ok(crate::graph::ReferencePolicy {
        source: crate::graph::ReferenceSource::PowerSet {
            prep_pool: file.prep_pool,
            effect_pool: effects(&file.effect_pool)?,
            fixed_preps: file.fixed_preps,
            fixed_effects: effects(&file.fixed_effects)?,
            max_references: file.max_references,
        },
        faithful_only: file.faithful_only,
    })
}
