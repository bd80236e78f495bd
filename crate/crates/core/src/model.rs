//! Data tables, effects, scenarios, references and densities.
//!
//! A [`DataTable`] stores one complete outcome distribution per
//! (measurement, preparation) pair. Effects are events of a single
//! measurement; the empty event and the full event are canonicalized to the
//! table-wide [`EffectRef::Null`] and [`EffectRef::Trivial`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::rational::{format_rational, is_probability, Rational};

/// Upper bound on outcomes per measurement (events are stored as bitmasks).
pub const MAX_OUTCOMES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown preparation {0:?}")]
    UnknownPreparation(String),
    #[error("unknown measurement {0:?}")]
    UnknownMeasurement(String),
    #[error("measurement {measurement:?} has no outcome {outcome:?}")]
    UnknownOutcome { measurement: String, outcome: String },
    #[error("cannot parse effect label {0:?}")]
    BadEffectLabel(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("invalid table: {}", summarize(.0))]
    InvalidTable(Vec<Violation>),
    #[error("invalid scenario: {}", summarize(.0))]
    InvalidScenario(Vec<Violation>),
    #[error("invalid reference: {}", summarize(.0))]
    InvalidReference(Vec<Violation>),
}

fn summarize(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// One failed structural or probabilistic identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: String,
    pub location: String,
    pub message: String,
}

impl Violation {
    pub fn new(kind: &str, location: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            kind: kind.to_string(),
            location: location.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.kind, self.location, self.message)
    }
}

/// A measurement with its full table of outcome probabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measurement {
    pub id: String,
    pub outcomes: Vec<String>,
    /// `probs[outcome][preparation]`, preparations in table order.
    pub probs: Vec<Vec<Rational>>,
}

impl Measurement {
    pub fn new(id: impl Into<String>, outcomes: &[&str], probs: Vec<Vec<Rational>>) -> Self {
        Self {
            id: id.into(),
            outcomes: outcomes.iter().map(|s| s.to_string()).collect(),
            probs,
        }
    }

    fn full_mask(&self) -> u64 {
        full_mask(self.outcomes.len())
    }
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// An effect named by ids: the null event, the trivial event, or an event
/// (set of outcome labels) of one measurement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EffectRef {
    Null,
    Trivial,
    Event {
        measurement: String,
        event: BTreeSet<String>,
    },
}

impl EffectRef {
    pub fn event(measurement: &str, outcomes: &[&str]) -> Self {
        EffectRef::Event {
            measurement: measurement.to_string(),
            event: outcomes.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// `null`, `trivial`, or `o1+o2|M`.
    pub fn label(&self) -> String {
        match self {
            EffectRef::Null => "null".into(),
            EffectRef::Trivial => "trivial".into(),
            EffectRef::Event { measurement, event } => {
                let outcomes: Vec<&str> = event.iter().map(String::as_str).collect();
                format!("{}|{}", outcomes.join("+"), measurement)
            }
        }
    }

    pub fn parse_label(label: &str) -> Result<Self, ModelError> {
        match label {
            "null" => Ok(EffectRef::Null),
            "trivial" => Ok(EffectRef::Trivial),
            _ => {
                let (event, measurement) = label
                    .rsplit_once('|')
                    .ok_or_else(|| ModelError::BadEffectLabel(label.to_string()))?;
                if measurement.is_empty() {
                    return Err(ModelError::BadEffectLabel(label.to_string()));
                }
                let event = if event.is_empty() {
                    BTreeSet::new()
                } else {
                    event.split('+').map(str::to_string).collect()
                };
                Ok(EffectRef::Event {
                    measurement: measurement.to_string(),
                    event,
                })
            }
        }
    }
}

impl fmt::Display for EffectRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Index-level effect, canonical with respect to one table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EffectKey {
    Null,
    Trivial,
    Event { measurement: usize, mask: u64 },
}

impl EffectKey {
    /// The event mask of this effect seen as an event of measurement `m`.
    pub fn mask_on(&self, m: usize, table: &DataTable) -> Option<u64> {
        match *self {
            EffectKey::Null => Some(0),
            EffectKey::Trivial => Some(table.measurements[m].full_mask()),
            EffectKey::Event { measurement, mask } if measurement == m => Some(mask),
            EffectKey::Event { .. } => None,
        }
    }
}

/// A prepare-and-measure scenario `(S, E)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub preparations: Vec<String>,
    pub effects: Vec<EffectRef>,
}

/// A reference of indistinguishability `(S_R, E_R)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reference {
    pub preparations: Vec<String>,
    pub effects: Vec<EffectRef>,
}

impl Scenario {
    pub fn new(preparations: &[&str], effects: Vec<EffectRef>) -> Self {
        Self {
            preparations: preparations.iter().map(|s| s.to_string()).collect(),
            effects,
        }
    }

    /// The scenario used as its own reference.
    pub fn as_reference(&self) -> Reference {
        Reference {
            preparations: self.preparations.clone(),
            effects: self.effects.clone(),
        }
    }
}

impl Reference {
    pub fn new(preparations: &[&str], effects: Vec<EffectRef>) -> Self {
        Self {
            preparations: preparations.iter().map(|s| s.to_string()).collect(),
            effects,
        }
    }
}

/// A convex mixture of preparations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PrepDensity {
    pub weights: BTreeMap<String, Rational>,
}

/// A convex mixture of effects.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EffectDensity {
    pub weights: BTreeMap<EffectRef, Rational>,
}

impl PrepDensity {
    pub fn point(prep: &str) -> Self {
        Self::from_pairs(&[(prep, Rational::one())])
    }

    pub fn from_pairs(pairs: &[(&str, Rational)]) -> Self {
        let mut weights = BTreeMap::new();
        for (p, w) in pairs {
            *weights.entry(p.to_string()).or_insert_with(Rational::zero) += w;
        }
        Self { weights }
    }
}

impl EffectDensity {
    pub fn point(effect: EffectRef) -> Self {
        Self::from_pairs(vec![(effect, Rational::one())])
    }

    pub fn from_pairs(pairs: Vec<(EffectRef, Rational)>) -> Self {
        let mut weights = BTreeMap::new();
        for (e, w) in pairs {
            *weights.entry(e).or_insert_with(Rational::zero) += w;
        }
        Self { weights }
    }
}

/// Scenario resolved to table indices; effects canonical and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedScenario {
    pub preps: Vec<usize>,
    pub effects: Vec<EffectKey>,
}

impl ResolvedScenario {
    pub fn prep_position(&self, prep: usize) -> Option<usize> {
        self.preps.iter().position(|&p| p == prep)
    }

    pub fn effect_position(&self, effect: EffectKey) -> Option<usize> {
        self.effects.iter().position(|&e| e == effect)
    }
}

/// Reference resolved to table indices, deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedReference {
    pub preps: Vec<usize>,
    pub effects: Vec<EffectKey>,
}

/// An exact data table `Pr(k|P)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataTable {
    preparations: Vec<String>,
    measurements: Vec<Measurement>,
}

impl DataTable {
    /// Builds a table after structural checks (unique ids, outcome counts,
    /// probability array shapes). Probability ranges and normalization are
    /// not checked here; see [`validate_table`].
    pub fn new(
        preparations: Vec<String>,
        measurements: Vec<Measurement>,
    ) -> Result<Self, Vec<Violation>> {
        let mut violations = Vec::new();
        check_unique(
            preparations.iter().map(String::as_str),
            "preparation",
            "table",
            &mut violations,
        );
        check_unique(
            measurements.iter().map(|m| m.id.as_str()),
            "measurement",
            "table",
            &mut violations,
        );
        for m in &measurements {
            let loc = format!("measurement {}", m.id);
            if m.outcomes.is_empty() {
                violations.push(Violation::new("structure", &loc, "no outcomes"));
            }
            if m.outcomes.len() > MAX_OUTCOMES {
                violations.push(Violation::new(
                    "structure",
                    &loc,
                    format!("more than {MAX_OUTCOMES} outcomes"),
                ));
            }
            check_unique(
                m.outcomes.iter().map(String::as_str),
                "outcome",
                &loc,
                &mut violations,
            );
            if m.probs.len() != m.outcomes.len()
                || m.probs.iter().any(|row| row.len() != preparations.len())
            {
                violations.push(Violation::new(
                    "missing",
                    &loc,
                    "probability array does not cover every (outcome, preparation) pair",
                ));
            }
        }
        if violations.is_empty() {
            Ok(Self {
                preparations,
                measurements,
            })
        } else {
            Err(violations)
        }
    }

    pub fn preparations(&self) -> &[String] {
        &self.preparations
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn prep_index(&self, id: &str) -> Result<usize, ModelError> {
        self.preparations
            .iter()
            .position(|p| p == id)
            .ok_or_else(|| ModelError::UnknownPreparation(id.to_string()))
    }

    pub fn measurement_index(&self, id: &str) -> Result<usize, ModelError> {
        self.measurements
            .iter()
            .position(|m| m.id == id)
            .ok_or_else(|| ModelError::UnknownMeasurement(id.to_string()))
    }

    /// Canonical index form of an effect.
    pub fn effect_key(&self, effect: &EffectRef) -> Result<EffectKey, ModelError> {
        match effect {
            EffectRef::Null => Ok(EffectKey::Null),
            EffectRef::Trivial => Ok(EffectKey::Trivial),
            EffectRef::Event { measurement, event } => {
                let m = self.measurement_index(measurement)?;
                let meas = &self.measurements[m];
                let mut mask = 0u64;
                for outcome in event {
                    let o = meas.outcomes.iter().position(|x| x == outcome).ok_or_else(|| {
                        ModelError::UnknownOutcome {
                            measurement: measurement.clone(),
                            outcome: outcome.clone(),
                        }
                    })?;
                    mask |= 1 << o;
                }
                Ok(if mask == 0 {
                    EffectKey::Null
                } else if mask == meas.full_mask() {
                    EffectKey::Trivial
                } else {
                    EffectKey::Event {
                        measurement: m,
                        mask,
                    }
                })
            }
        }
    }

    /// Canonical id form of an effect key.
    pub fn effect_ref(&self, key: EffectKey) -> EffectRef {
        match key {
            EffectKey::Null => EffectRef::Null,
            EffectKey::Trivial => EffectRef::Trivial,
            EffectKey::Event { measurement, mask } => {
                let meas = &self.measurements[measurement];
                EffectRef::Event {
                    measurement: meas.id.clone(),
                    event: meas
                        .outcomes
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, o)| o.clone())
                        .collect(),
                }
            }
        }
    }

    pub fn effect_label(&self, key: EffectKey) -> String {
        self.effect_ref(key).label()
    }

    /// `Pr(k|P)` for an effect key and preparation index.
    pub fn prob_key(&self, effect: EffectKey, prep: usize) -> Rational {
        match effect {
            EffectKey::Null => Rational::zero(),
            EffectKey::Trivial => Rational::one(),
            EffectKey::Event { measurement, mask } => {
                let meas = &self.measurements[measurement];
                let mut total = Rational::zero();
                for (o, row) in meas.probs.iter().enumerate() {
                    if mask & (1 << o) != 0 {
                        total += &row[prep];
                    }
                }
                total
            }
        }
    }

    pub fn resolve_preps(&self, ids: &[String]) -> Result<Vec<usize>, ModelError> {
        let mut out = Vec::with_capacity(ids.len());
        for id in ids {
            let idx = self.prep_index(id)?;
            if !out.contains(&idx) {
                out.push(idx);
            }
        }
        Ok(out)
    }

    pub fn resolve_effects(&self, effects: &[EffectRef]) -> Result<Vec<EffectKey>, ModelError> {
        let mut out = Vec::with_capacity(effects.len());
        for e in effects {
            let key = self.effect_key(e)?;
            if !out.contains(&key) {
                out.push(key);
            }
        }
        Ok(out)
    }

    pub fn resolve_scenario(&self, scenario: &Scenario) -> Result<ResolvedScenario, ModelError> {
        Ok(ResolvedScenario {
            preps: self.resolve_preps(&scenario.preparations)?,
            effects: self.resolve_effects(&scenario.effects)?,
        })
    }

    pub fn resolve_reference(&self, reference: &Reference) -> Result<ResolvedReference, ModelError> {
        Ok(ResolvedReference {
            preps: self.resolve_preps(&reference.preparations)?,
            effects: self.resolve_effects(&reference.effects)?,
        })
    }

    /// Every effect of the table: null, trivial, and each single outcome.
    pub fn atomic_effects(&self) -> Vec<EffectRef> {
        let mut out = vec![EffectRef::Null, EffectRef::Trivial];
        for m in &self.measurements {
            for o in &m.outcomes {
                out.push(EffectRef::event(&m.id, &[o]));
            }
        }
        out
    }

    /// All single-outcome effects of one measurement.
    pub fn measurement_effects(&self, id: &str) -> Result<Vec<EffectRef>, ModelError> {
        let m = &self.measurements[self.measurement_index(id)?];
        Ok(m.outcomes
            .iter()
            .map(|o| EffectRef::event(&m.id, &[o]))
            .collect())
    }
}

fn check_unique<'a>(
    ids: impl Iterator<Item = &'a str>,
    what: &str,
    location: &str,
    violations: &mut Vec<Violation>,
) {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            violations.push(Violation::new(
                "duplicate",
                location,
                format!("duplicate {what} id {id:?}"),
            ));
        }
    }
}

/// Range and normalization checks; empty means the table is a valid
/// probability table.
pub fn validate_table(table: &DataTable) -> Vec<Violation> {
    let mut violations = Vec::new();
    for m in &table.measurements {
        for (p, prep) in table.preparations.iter().enumerate() {
            let mut total = Rational::zero();
            for (o, outcome) in m.outcomes.iter().enumerate() {
                let value = &m.probs[o][p];
                if !is_probability(value) {
                    violations.push(Violation::new(
                        "range",
                        format!("measurement {}, outcome {}, preparation {}", m.id, outcome, prep),
                        format!("probability {} outside [0, 1]", format_rational(value)),
                    ));
                }
                total += value;
            }
            if !total.is_one() {
                violations.push(Violation::new(
                    "normalization",
                    format!("measurement {}, preparation {}", m.id, prep),
                    format!("outcome probabilities sum to {}, not 1", format_rational(&total)),
                ));
            }
        }
    }
    violations
}

/// Checks that the scenario's procedures exist and that it contains the
/// null and trivial effects.
pub fn validate_scenario(table: &DataTable, scenario: &Scenario) -> Vec<Violation> {
    let mut violations = Vec::new();
    if scenario.preparations.is_empty() {
        violations.push(Violation::new(
            "scenario",
            "preparations",
            "scenario needs at least one preparation",
        ));
    }
    check_procedures(
        table,
        &scenario.preparations,
        &scenario.effects,
        "scenario",
        &mut violations,
    );
    let keys: Vec<EffectKey> = scenario
        .effects
        .iter()
        .filter_map(|e| table.effect_key(e).ok())
        .collect();
    if !keys.contains(&EffectKey::Null) {
        violations.push(Violation::new(
            "scenario",
            "effects",
            "the null effect is missing",
        ));
    }
    if !keys.contains(&EffectKey::Trivial) {
        violations.push(Violation::new(
            "scenario",
            "effects",
            "the trivial effect is missing",
        ));
    }
    violations
}

/// References may be empty and need not overlap the scenario; only the ids
/// are checked.
pub fn validate_reference(table: &DataTable, reference: &Reference) -> Vec<Violation> {
    let mut violations = Vec::new();
    check_procedures(
        table,
        &reference.preparations,
        &reference.effects,
        "reference",
        &mut violations,
    );
    violations
}

fn check_procedures(
    table: &DataTable,
    preps: &[String],
    effects: &[EffectRef],
    what: &str,
    violations: &mut Vec<Violation>,
) {
    check_unique(
        preps.iter().map(String::as_str),
        "preparation",
        what,
        violations,
    );
    for p in preps {
        if table.prep_index(p).is_err() {
            violations.push(Violation::new(
                "unknown-preparation",
                what,
                format!("preparation {p:?} is not in the table"),
            ));
        }
    }
    for e in effects {
        if let Err(err) = table.effect_key(e) {
            violations.push(Violation::new("unknown-effect", what, err.to_string()));
        }
    }
}

/// Validates a density over `allowed` preparation ids.
pub fn check_prep_density(density: &PrepDensity, allowed: &[String]) -> Result<(), ModelError> {
    let mut total = Rational::zero();
    for (p, w) in &density.weights {
        if !allowed.contains(p) {
            return Err(ModelError::InvalidDensity(format!(
                "preparation {p:?} is outside the support"
            )));
        }
        if w < &Rational::zero() {
            return Err(ModelError::InvalidDensity(format!("negative weight on {p:?}")));
        }
        total += w;
    }
    if !total.is_one() {
        return Err(ModelError::InvalidDensity(format!(
            "weights sum to {}",
            format_rational(&total)
        )));
    }
    Ok(())
}

/// Validates an effect density over `allowed` canonical effects.
pub fn check_effect_density(
    table: &DataTable,
    density: &EffectDensity,
    allowed: &[EffectKey],
) -> Result<(), ModelError> {
    let mut total = Rational::zero();
    for (e, w) in &density.weights {
        let key = table.effect_key(e)?;
        if !allowed.contains(&key) {
            return Err(ModelError::InvalidDensity(format!(
                "effect {e} is outside the support"
            )));
        }
        if w < &Rational::zero() {
            return Err(ModelError::InvalidDensity(format!("negative weight on {e}")));
        }
        total += w;
    }
    if !total.is_one() {
        return Err(ModelError::InvalidDensity(format!(
            "weights sum to {}",
            format_rational(&total)
        )));
    }
    Ok(())
}

/// `Pr(τ|ρ) = Σ_k Σ_P τ_k ρ_P Pr(k|P)`, with densities supported anywhere
/// in the table.
pub fn prob(
    table: &DataTable,
    effect: &EffectDensity,
    prep: &PrepDensity,
) -> Result<Rational, ModelError> {
    check_prep_density(prep, &table.preparations)?;
    let all_effects: Vec<EffectKey> = effect
        .weights
        .keys()
        .map(|e| table.effect_key(e))
        .collect::<Result<_, _>>()?;
    check_effect_density(table, effect, &all_effects)?;
    let mut total = Rational::zero();
    for (e, we) in &effect.weights {
        let key = table.effect_key(e)?;
        for (p, wp) in &prep.weights {
            let idx = table.prep_index(p)?;
            total += we * wp * table.prob_key(key, idx);
        }
    }
    Ok(total)
}

/// Result of the outcome-completeness check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutcomeCompleteness {
    pub complete: bool,
    /// Effects with no disjoint complement family inside the scenario.
    pub missing: Vec<String>,
}

/// Whether every scenario effect can be completed to its measurement's full
/// outcome set by disjoint scenario effects of the same measurement.
pub fn check_outcome_complete(
    table: &DataTable,
    scenario: &Scenario,
) -> Result<OutcomeCompleteness, ModelError> {
    let resolved = table.resolve_scenario(scenario)?;
    let mut missing = Vec::new();
    for &e in &resolved.effects {
        let EffectKey::Event { measurement, mask } = e else {
            // null ∪ trivial and trivial itself cover everything
            continue;
        };
        let full = table.measurements[measurement].full_mask();
        let parts: Vec<u64> = resolved
            .effects
            .iter()
            .filter(|&&k| k != e)
            .filter_map(|k| k.mask_on(measurement, table))
            .filter(|&m| m != 0 && m & mask == 0)
            .collect();
        if !has_exact_cover(full & !mask, &parts) {
            missing.push(table.effect_label(e));
        }
    }
    Ok(OutcomeCompleteness {
        complete: missing.is_empty(),
        missing,
    })
}

fn has_exact_cover(target: u64, parts: &[u64]) -> bool {
    if target == 0 {
        return true;
    }
    let low = target & target.wrapping_neg();
    parts
        .iter()
        .filter(|&&p| p & low != 0 && p & !target == 0)
        .any(|&p| has_exact_cover(target & !p, parts))
}

/// A coarse-graining relation `whole = Σ parts` among scenario effects;
/// indices point into the effect list it was computed from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoarseGraining {
    pub whole: usize,
    pub parts: Vec<usize>,
}

/// Enumerates every decomposition of an effect into two or more pairwise
/// disjoint non-null effects of the same measurement, all drawn from
/// `effects`. The trivial effect counts as the full event of every
/// measurement.
pub fn coarse_grainings(table: &DataTable, effects: &[EffectKey]) -> Vec<CoarseGraining> {
    let mut out = Vec::new();
    let measurements: BTreeSet<usize> = effects
        .iter()
        .filter_map(|e| match e {
            EffectKey::Event { measurement, .. } => Some(*measurement),
            _ => None,
        })
        .collect();
    for m in measurements {
        let on_m: Vec<(usize, u64)> = effects
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.mask_on(m, table).map(|mask| (i, mask)))
            .filter(|&(_, mask)| mask != 0)
            .collect();
        for &(whole, whole_mask) in &on_m {
            let candidates: Vec<(usize, u64)> = on_m
                .iter()
                .copied()
                .filter(|&(_, mask)| mask != whole_mask && mask & !whole_mask == 0)
                .collect();
            let mut chosen = Vec::new();
            exact_covers(whole_mask, &candidates, &mut chosen, &mut |parts| {
                out.push(CoarseGraining {
                    whole,
                    parts: parts.to_vec(),
                });
            });
        }
    }
    out
}

fn exact_covers(
    target: u64,
    candidates: &[(usize, u64)],
    chosen: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if target == 0 {
        if chosen.len() >= 2 {
            emit(chosen);
        }
        return;
    }
    let low = target & target.wrapping_neg();
    for &(idx, mask) in candidates {
        if mask & low != 0 && mask & !target == 0 {
            chosen.push(idx);
            exact_covers(target & !mask, candidates, chosen, emit);
            chosen.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::toy_bit_table;
    use crate::rational::{int, ratio};

    fn t_star_scenario() -> Scenario {
        Scenario::new(
            &["P1", "P2", "P3", "P4"],
            vec![
                EffectRef::Null,
                EffectRef::Trivial,
                EffectRef::event("M1", &["z0"]),
                EffectRef::event("M1", &["z1"]),
                EffectRef::event("M2", &["x0"]),
                EffectRef::event("M2", &["x1"]),
            ],
        )
    }

    #[test]
    fn toy_bit_table_is_valid() {
        assert!(validate_table(&toy_bit_table()).is_empty());
    }

    #[test]
    fn normalization_violation_is_reported() {
        let table = DataTable::new(
            vec!["P1".into()],
            vec![Measurement::new(
                "M1",
                &["a", "b"],
                vec![vec![ratio(1, 2)], vec![ratio(2, 5)]],
            )],
        )
        .unwrap();
        let v = validate_table(&table);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, "normalization");
        assert!(v[0].location.contains("M1"));
    }

    #[test]
    fn range_violation_is_reported() {
        let table = DataTable::new(
            vec!["P1".into()],
            vec![Measurement::new(
                "M1",
                &["a", "b"],
                vec![vec![ratio(3, 2)], vec![ratio(-1, 2)]],
            )],
        )
        .unwrap();
        let v = validate_table(&table);
        assert!(v.iter().any(|x| x.kind == "range"));
        assert!(!v.iter().any(|x| x.kind == "normalization"));
    }

    #[test]
    fn structural_problems_do_not_panic() {
        let err = DataTable::new(
            vec!["P1".into(), "P1".into()],
            vec![Measurement::new("M1", &["a", "a"], vec![vec![int(1)]])],
        )
        .unwrap_err();
        assert!(err.iter().any(|v| v.kind == "duplicate"));
        assert!(err.iter().any(|v| v.kind == "missing"));
    }

    #[test]
    fn prob_examples() {
        let t = toy_bit_table();
        let any = PrepDensity::point("P2");
        assert_eq!(
            prob(&t, &EffectDensity::point(EffectRef::Trivial), &any).unwrap(),
            int(1)
        );
        assert_eq!(
            prob(&t, &EffectDensity::point(EffectRef::Null), &any).unwrap(),
            int(0)
        );
        assert_eq!(
            prob(
                &t,
                &EffectDensity::point(EffectRef::event("M1", &["z0"])),
                &PrepDensity::point("P3")
            )
            .unwrap(),
            ratio(1, 2)
        );
        let half_half = EffectDensity::from_pairs(vec![
            (EffectRef::event("M1", &["z0"]), ratio(1, 2)),
            (EffectRef::event("M1", &["z1"]), ratio(1, 2)),
        ]);
        assert_eq!(
            prob(&t, &half_half, &PrepDensity::point("P1")).unwrap(),
            ratio(1, 2)
        );
        assert!(matches!(
            prob(&t, &half_half, &PrepDensity::point("P9")),
            Err(ModelError::InvalidDensity(_))
        ));
    }

    #[test]
    fn full_and_empty_events_canonicalize() {
        let t = toy_bit_table();
        assert_eq!(
            t.effect_key(&EffectRef::event("M1", &["z0", "z1"])).unwrap(),
            EffectKey::Trivial
        );
        assert_eq!(
            t.effect_key(&EffectRef::event("M2", &[])).unwrap(),
            EffectKey::Null
        );
        assert!(t.effect_key(&EffectRef::event("M3", &["a"])).is_err());
    }

    #[test]
    fn scenario_validation() {
        let t = toy_bit_table();
        assert!(validate_scenario(&t, &t_star_scenario()).is_empty());

        let mut no_trivial = t_star_scenario();
        no_trivial.effects.retain(|e| e != &EffectRef::Trivial);
        let v = validate_scenario(&t, &no_trivial);
        assert_eq!(v.len(), 1);
        assert!(v[0].message.contains("trivial"));

        let mut unknown = t_star_scenario();
        unknown.preparations.push("P9".into());
        let v = validate_scenario(&t, &unknown);
        assert!(v.iter().any(|x| x.kind == "unknown-preparation" && x.message.contains("P9")));
    }

    #[test]
    fn outcome_completeness_examples() {
        let t = toy_bit_table();
        let z_only = Scenario::new(
            &["P1", "P2"],
            vec![
                EffectRef::Null,
                EffectRef::Trivial,
                EffectRef::event("M1", &["z0"]),
                EffectRef::event("M1", &["z1"]),
            ],
        );
        assert!(check_outcome_complete(&t, &z_only).unwrap().complete);

        let half = Scenario::new(
            &["P1"],
            vec![
                EffectRef::Null,
                EffectRef::Trivial,
                EffectRef::event("M1", &["z0"]),
            ],
        );
        let res = check_outcome_complete(&t, &half).unwrap();
        assert!(!res.complete);
        assert_eq!(res.missing, vec!["z0|M1".to_string()]);

        assert!(check_outcome_complete(&t, &t_star_scenario()).unwrap().complete);
    }

    #[test]
    fn coarse_grainings_of_a_three_outcome_measurement() {
        let t = DataTable::new(
            vec!["P".into()],
            vec![Measurement::new(
                "M",
                &["a", "b", "c"],
                vec![vec![ratio(1, 3)], vec![ratio(1, 3)], vec![ratio(1, 3)]],
            )],
        )
        .unwrap();
        let effects: Vec<EffectKey> = [
            EffectRef::Null,
            EffectRef::Trivial,
            EffectRef::event("M", &["a"]),
            EffectRef::event("M", &["b"]),
            EffectRef::event("M", &["c"]),
            EffectRef::event("M", &["a", "b"]),
        ]
        .iter()
        .map(|e| t.effect_key(e).unwrap())
        .collect();
        let cg = coarse_grainings(&t, &effects);
        // trivial = a+b+c, trivial = ab+c, ab = a+b
        assert_eq!(cg.len(), 3);
        assert!(cg.contains(&CoarseGraining { whole: 1, parts: vec![2, 3, 4] }));
        assert!(cg.contains(&CoarseGraining { whole: 1, parts: vec![5, 4] }));
        assert!(cg.contains(&CoarseGraining { whole: 5, parts: vec![2, 3] }));
    }

    #[test]
    fn effect_labels_round_trip() {
        for label in ["null", "trivial", "z0|M1", "a+b|M"] {
            assert_eq!(EffectRef::parse_label(label).unwrap().label(), label);
        }
        assert!(EffectRef::parse_label("nobar").is_err());
    }
}
