//! Quantum models of data tables and the quantum-fragment cross-check.
//!
//! States and effects are real coordinate vectors paired by a bilinear
//! form: the plain dot product for diagonal models, or a user-supplied
//! matrix `G` (`pair(N, σ) = Nᵀ·G·σ`) for general Hermitian coordinates.
//! Two state combinations are indistinguishable on the scenario's effects
//! iff their difference projects to zero on `span{Gᵀ·N_e}`; dually for
//! effects against `span{G·σ_P}`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::decision::{decide_fragment, decide_rnc_with, DecisionConfig, DecisionError, Fragment};
use crate::indist::Density;
use crate::linalg::{dot, is_zero_vector, kernel_basis, project_onto_span, RationalMatrix};
use crate::model::{
    check_effect_density, check_outcome_complete, check_prep_density, coarse_grainings,
    DataTable, EffectKey, EffectRef, ModelError, ResolvedScenario, Scenario, Violation,
};
use crate::rational::{format_rational, from_json, is_probability, Rational};

#[derive(Debug, thiserror::Error)]
pub enum QuantumError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("scenario is not outcome-complete: {}", .0.join(", "))]
    NotOutcomeComplete(Vec<String>),
    #[error("invalid quantum model: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidModel(Vec<Violation>),
    #[error(transparent)]
    Decision(#[from] DecisionError),
    #[error("cannot parse quantum model: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pairing {
    Dot,
    Matrix(RationalMatrix),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantumModel {
    pub dim: usize,
    pub states: BTreeMap<String, Vec<Rational>>,
    pub effects: BTreeMap<EffectRef, Vec<Rational>>,
    pub pairing: Pairing,
}

impl QuantumModel {
    /// Length of every coordinate vector.
    pub fn coordinates(&self) -> usize {
        match &self.pairing {
            Pairing::Dot => self.dim,
            Pairing::Matrix(g) => g.cols(),
        }
    }

    pub fn pair(&self, effect: &[Rational], state: &[Rational]) -> Rational {
        match &self.pairing {
            Pairing::Dot => dot(effect, state),
            Pairing::Matrix(g) => dot(effect, &g.mul_vec(state)),
        }
    }

    /// `Gᵀ·N`, the functional an effect applies to state coordinates.
    fn functional(&self, effect: &[Rational]) -> Vec<Rational> {
        match &self.pairing {
            Pairing::Dot => effect.to_vec(),
            Pairing::Matrix(g) => g.transpose().mul_vec(effect),
        }
    }

    /// `G·σ`, the vector a state presents to effect coordinates.
    fn presented(&self, state: &[Rational]) -> Vec<Rational> {
        match &self.pairing {
            Pairing::Dot => state.to_vec(),
            Pairing::Matrix(g) => g.mul_vec(state),
        }
    }

    fn effect_vector(&self, table: &DataTable, key: EffectKey) -> Option<&Vec<Rational>> {
        self.effects
            .iter()
            .find(|(e, _)| table.effect_key(e).ok() == Some(key))
            .map(|(_, v)| v)
    }
}

/// The canonical diagonal model: preparation `j` is the `j`-th basis state,
/// effect `k` has diagonal `(Pr(k|P_j))_j`.
pub fn diagonal_model(table: &DataTable, scenario: &Scenario) -> Result<QuantumModel, ModelError> {
    let s = table.resolve_scenario(scenario)?;
    let d = s.preps.len();
    let states = s
        .preps
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let mut v = vec![Rational::zero(); d];
            v[j] = Rational::one();
            (table.preparations()[p].clone(), v)
        })
        .collect();
    let effects = s
        .effects
        .iter()
        .map(|&k| {
            (
                table.effect_ref(k),
                s.preps.iter().map(|&p| table.prob_key(k, p)).collect(),
            )
        })
        .collect();
    Ok(QuantumModel {
        dim: d,
        states,
        effects,
        pairing: Pairing::Dot,
    })
}

/// Checks density-operator, effect, additivity and reproduction conditions.
/// Positivity of general (matrix-paired) coordinates is not decidable here
/// and is taken on trust.
pub fn validate_quantum_model(qm: &QuantumModel, table: &DataTable, scenario: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let s = match table.resolve_scenario(scenario) {
        Ok(s) => s,
        Err(e) => return vec![Violation::new("structure", "scenario", e.to_string())],
    };
    let n = qm.coordinates();
    if let Pairing::Matrix(g) = &qm.pairing {
        if g.rows() != g.cols() {
            out.push(Violation::new("shape", "pairing", "pairing matrix is not square"));
            return out;
        }
    }
    let diagonal = qm.pairing == Pairing::Dot;

    let mut states = Vec::new();
    for &p in &s.preps {
        let name = &table.preparations()[p];
        let Some(v) = qm.states.get(name) else {
            out.push(Violation::new("missing", format!("state {name}"), "no state vector"));
            continue;
        };
        if v.len() != n {
            out.push(Violation::new("shape", format!("state {name}"), format!("length {} instead of {n}", v.len())));
            continue;
        }
        if diagonal {
            if v.iter().any(Signed::is_negative) {
                out.push(Violation::new("not positive", format!("state {name}"), "negative diagonal entry"));
            }
            let trace = v.iter().fold(Rational::zero(), |a, b| a + b);
            if !trace.is_one() {
                out.push(Violation::new("not trace-one", format!("state {name}"), format!("trace is {}", format_rational(&trace))));
            }
        }
        states.push((p, v));
    }

    let mut effects: BTreeMap<EffectKey, &Vec<Rational>> = BTreeMap::new();
    for &k in &s.effects {
        let label = table.effect_label(k);
        let Some(v) = qm.effect_vector(table, k) else {
            out.push(Violation::new("missing", format!("effect {label}"), "no effect vector"));
            continue;
        };
        if v.len() != n {
            out.push(Violation::new("shape", format!("effect {label}"), format!("length {} instead of {n}", v.len())));
            continue;
        }
        if diagonal {
            if !v.iter().all(is_probability) {
                out.push(Violation::new("not a POVM element", format!("effect {label}"), "diagonal entry outside [0, 1]"));
            }
            if k == EffectKey::Trivial && !v.iter().all(One::is_one) {
                out.push(Violation::new("identity", format!("effect {label}"), "trivial effect is not the identity"));
            }
        }
        if k == EffectKey::Null && !is_zero_vector(v) {
            out.push(Violation::new("null", format!("effect {label}"), "null effect is not zero"));
        }
        effects.insert(k, v);
    }

    for cg in coarse_grainings(table, &s.effects) {
        let whole = s.effects[cg.whole];
        let (Some(w), true) = (effects.get(&whole), cg.parts.iter().all(|p| effects.contains_key(&s.effects[*p]))) else {
            continue;
        };
        let mut sum = vec![Rational::zero(); n];
        for p in &cg.parts {
            for (x, y) in sum.iter_mut().zip(effects[&s.effects[*p]]) {
                *x += y;
            }
        }
        if &sum != *w {
            out.push(Violation::new("additivity", format!("effect {}", table.effect_label(whole)), "differs from the sum of its parts"));
        }
    }

    for (k, nv) in &effects {
        for (p, sv) in &states {
            let predicted = qm.pair(nv, sv);
            let actual = table.prob_key(*k, *p);
            if predicted != actual {
                out.push(Violation::new(
                    "statistics",
                    format!("{}|{}", table.effect_label(*k), table.preparations()[*p]),
                    format!("model gives {}, table has {}", format_rational(&predicted), format_rational(&actual)),
                ));
            }
        }
    }
    out
}

fn ensure_model(qm: &QuantumModel, table: &DataTable, scenario: &Scenario) -> Result<ResolvedScenario, QuantumError> {
    let v = validate_quantum_model(qm, table, scenario);
    if !v.is_empty() {
        return Err(QuantumError::InvalidModel(v));
    }
    Ok(table.resolve_scenario(scenario)?)
}

/// Whether two densities are indistinguishable on the opposite side of the
/// scenario, decided by projecting their difference.
pub fn projection_indist_check(
    qm: &QuantumModel,
    table: &DataTable,
    scenario: &Scenario,
    d1: &Density,
    d2: &Density,
) -> Result<bool, QuantumError> {
    let s = ensure_model(qm, table, scenario)?;
    let n = qm.coordinates();
    let scenario_preps: Vec<String> = s.preps.iter().map(|&p| table.preparations()[p].clone()).collect();
    match (d1, d2) {
        (Density::Prep(a), Density::Prep(b)) => {
            check_prep_density(a, &scenario_preps)?;
            check_prep_density(b, &scenario_preps)?;
            let mut diff = vec![Rational::zero(); n];
            for (density, sign) in [(a, 1), (b, -1)] {
                for (p, w) in &density.weights {
                    for (x, y) in diff.iter_mut().zip(&qm.states[p]) {
                        *x += Rational::from_integer(sign.into()) * w * y;
                    }
                }
            }
            let span: Vec<Vec<Rational>> = s
                .effects
                .iter()
                .map(|&k| qm.functional(qm.effect_vector(table, k).expect("validated")))
                .collect();
            Ok(is_zero_vector(&project_onto_span(&span, &diff)))
        }
        (Density::Effect(a), Density::Effect(b)) => {
            check_effect_density(table, a, &s.effects)?;
            check_effect_density(table, b, &s.effects)?;
            let mut diff = vec![Rational::zero(); n];
            for (density, sign) in [(a, 1), (b, -1)] {
                for (e, w) in &density.weights {
                    let key = table.effect_key(e)?;
                    let v = qm.effect_vector(table, key).expect("validated");
                    for (x, y) in diff.iter_mut().zip(v) {
                        *x += Rational::from_integer(sign.into()) * w * y;
                    }
                }
            }
            let span: Vec<Vec<Rational>> = scenario_preps.iter().map(|p| qm.presented(&qm.states[p])).collect();
            Ok(is_zero_vector(&project_onto_span(&span, &diff)))
        }
        _ => Err(ModelError::InvalidDensity("cannot compare a preparation density with an effect density".into()).into()),
    }
}

/// The decision fragment of the quantum model: projected states as
/// quotient vectors, statistics from the pairing, and the effect kernel
/// computed from projected effects.
pub fn quantum_fragment(qm: &QuantumModel, table: &DataTable, scenario: &Scenario) -> Result<Fragment, QuantumError> {
    let s = ensure_model(qm, table, scenario)?;
    let preps: Vec<&String> = s.preps.iter().map(|&p| &table.preparations()[p]).collect();
    let effect_vectors: Vec<&Vec<Rational>> = s
        .effects
        .iter()
        .map(|&k| qm.effect_vector(table, k).expect("validated"))
        .collect();
    let functionals: Vec<Vec<Rational>> = effect_vectors.iter().map(|v| qm.functional(v)).collect();
    let presented: Vec<Vec<Rational>> = preps.iter().map(|p| qm.presented(&qm.states[*p])).collect();

    let generators: Vec<Vec<Rational>> = preps
        .iter()
        .map(|p| project_onto_span(&functionals, &qm.states[*p]))
        .collect();
    let projected_effects: Vec<Vec<Rational>> = effect_vectors
        .iter()
        .map(|v| project_onto_span(&presented, v))
        .collect();
    let n = qm.coordinates();
    let mut rows = vec![vec![Rational::one(); s.effects.len()]];
    for i in 0..n {
        rows.push(projected_effects.iter().map(|v| v[i].clone()).collect());
    }
    let k_e = kernel_basis(&RationalMatrix::from_rows(s.effects.len(), rows));

    let stats = effect_vectors
        .iter()
        .map(|nv| preps.iter().map(|p| qm.pair(nv, &qm.states[*p])).collect())
        .collect();
    let missing = || ModelError::InvalidScenario(crate::model::validate_scenario(table, scenario));
    Ok(Fragment {
        prep_labels: preps.iter().map(|p| p.to_string()).collect(),
        effect_labels: s.effects.iter().map(|&k| table.effect_label(k)).collect(),
        generators,
        stats,
        coarse_grainings: coarse_grainings(table, &s.effects),
        k_e,
        omega: s.effect_position(EffectKey::Trivial).ok_or_else(missing)?,
        null: s.effect_position(EffectKey::Null).ok_or_else(missing)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossCheck {
    /// Operational noncontextuality of the table.
    pub operational: bool,
    /// Noncontextuality of the projected quantum fragment.
    pub quantum: bool,
    pub agree: bool,
}

/// Runs the operational decision and the quantum-fragment decision on the
/// diagonal model; they must agree.
pub fn cross_check_equivalence(table: &DataTable, scenario: &Scenario) -> Result<CrossCheck, QuantumError> {
    let qm = diagonal_model(table, scenario)?;
    cross_check_with_model(&qm, table, scenario, &DecisionConfig::default())
}

pub fn cross_check_with_model(
    qm: &QuantumModel,
    table: &DataTable,
    scenario: &Scenario,
    config: &DecisionConfig,
) -> Result<CrossCheck, QuantumError> {
    let complete = check_outcome_complete(table, scenario)?;
    if !complete.complete {
        return Err(QuantumError::NotOutcomeComplete(complete.missing));
    }
    let operational = decide_rnc_with(table, scenario, &scenario.as_reference(), config)?
        .verdict
        .is_noncontextual();
    let fragment = quantum_fragment(qm, table, scenario)?;
    let quantum = decide_fragment(&fragment, config)?.0.is_ok();
    Ok(CrossCheck {
        operational,
        quantum,
        agree: operational == quantum,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PairingFile {
    Named(String),
    Matrix(Vec<Vec<serde_json::Value>>),
}

#[derive(Serialize, Deserialize)]
struct QuantumModelFile {
    dim: usize,
    states: BTreeMap<String, Vec<serde_json::Value>>,
    effects: BTreeMap<String, Vec<serde_json::Value>>,
    #[serde(default = "dot_pairing")]
    pairing: PairingFile,
}

fn dot_pairing() -> PairingFile {
    PairingFile::Named("dot".into())
}

fn parse_vec(values: &[serde_json::Value]) -> Result<Vec<Rational>, QuantumError> {
    values
        .iter()
        .map(|v| from_json(v).map_err(|e| QuantumError::Parse(e.to_string())))
        .collect()
}

fn text_vec(values: &[Rational]) -> Vec<serde_json::Value> {
    values.iter().map(|v| serde_json::Value::String(format_rational(v))).collect()
}

/// `{"dim": d, "states": {P: [...]}, "effects": {label: [...]}, "pairing": "dot" | [[...]]}`
pub fn parse_quantum_model(text: &str) -> Result<QuantumModel, QuantumError> {
    let file: QuantumModelFile = serde_json::from_str(text).map_err(|e| QuantumError::Parse(e.to_string()))?;
    let pairing = match file.pairing {
        PairingFile::Named(name) if name == "dot" => Pairing::Dot,
        PairingFile::Named(name) => return Err(QuantumError::Parse(format!("unknown pairing {name:?}"))),
        PairingFile::Matrix(rows) => {
            let cols = rows.first().map_or(0, Vec::len);
            if rows.iter().any(|r| r.len() != cols) {
                return Err(QuantumError::Parse("ragged pairing matrix".into()));
            }
            Pairing::Matrix(RationalMatrix::from_rows(
                cols,
                rows.iter().map(|r| parse_vec(r)).collect::<Result<_, _>>()?,
            ))
        }
    };
    let states = file
        .states
        .iter()
        .map(|(k, v)| Ok((k.clone(), parse_vec(v)?)))
        .collect::<Result<_, QuantumError>>()?;
    let effects = file
        .effects
        .iter()
        .map(|(k, v)| Ok((EffectRef::parse_label(k)?, parse_vec(v)?)))
        .collect::<Result<_, QuantumError>>()?;
    Ok(QuantumModel {
        dim: file.dim,
        states,
        effects,
        pairing,
    })
}

pub fn quantum_model_to_json(qm: &QuantumModel) -> String {
    let file = QuantumModelFile {
        dim: qm.dim,
        states: qm.states.iter().map(|(k, v)| (k.clone(), text_vec(v))).collect(),
        effects: qm.effects.iter().map(|(k, v)| (k.label(), text_vec(v))).collect(),
        pairing: match &qm.pairing {
            Pairing::Dot => dot_pairing(),
            Pairing::Matrix(g) => PairingFile::Matrix(g.to_rows().iter().map(|r| text_vec(r)).collect()),
        },
    };
    serde_json::to_string_pretty(&file).expect("model serializes")
}
