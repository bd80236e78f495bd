//! Fingerprints, indistinguishability kernels, faithfulness and the
//! reference preorder.
//!
//! Two densities over the scenario are indistinguishable with respect to a
//! reference iff their difference lies in the kernel of the fingerprint
//! matrix. Since differences of densities span the whole sum-zero subspace,
//! "every pair indistinguishable under B is indistinguishable under A" is
//! the same as `K(B) ⊆ K(A)`; the all-ones row of each fingerprint restricts
//! kernels to sum-zero vectors.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::linalg::{kernel_basis, subspace_contains, RationalMatrix, SubspaceBasis};
use crate::model::{
    check_effect_density, check_prep_density, DataTable, EffectDensity, EffectKey, ModelError,
    PrepDensity, Reference, ResolvedReference, ResolvedScenario, Scenario,
};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Preparation,
    Effect,
}

/// Fingerprint matrix: one column per scenario procedure, an all-ones first
/// row, then one row per reference procedure of the opposite kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FingerprintMap {
    pub side: Side,
    pub matrix: RationalMatrix,
    pub column_labels: Vec<String>,
    pub row_labels: Vec<String>,
}

/// Canonical kernels of both fingerprint maps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct KernelPair {
    pub k_s: SubspaceBasis,
    pub k_e: SubspaceBasis,
}

fn ones_row(n: usize) -> Vec<Rational> {
    vec![Rational::one(); n]
}

pub(crate) fn prep_matrix(
    table: &DataTable,
    scenario: &ResolvedScenario,
    reference: &ResolvedReference,
) -> RationalMatrix {
    let n = scenario.preps.len();
    let mut rows = vec![ones_row(n)];
    for &k in &reference.effects {
        rows.push(scenario.preps.iter().map(|&p| table.prob_key(k, p)).collect());
    }
    RationalMatrix::from_rows(n, rows)
}

pub(crate) fn effect_matrix(
    table: &DataTable,
    scenario: &ResolvedScenario,
    reference: &ResolvedReference,
) -> RationalMatrix {
    let n = scenario.effects.len();
    let mut rows = vec![ones_row(n)];
    for &p in &reference.preps {
        rows.push(scenario.effects.iter().map(|&e| table.prob_key(e, p)).collect());
    }
    RationalMatrix::from_rows(n, rows)
}

pub fn prep_fingerprints(
    table: &DataTable,
    scenario: &Scenario,
    reference: &Reference,
) -> Result<FingerprintMap, ModelError> {
    let s = table.resolve_scenario(scenario)?;
    let r = table.resolve_reference(reference)?;
    let mut row_labels = vec!["1".to_string()];
    row_labels.extend(r.effects.iter().map(|&k| table.effect_label(k)));
    Ok(FingerprintMap {
        side: Side::Preparation,
        matrix: prep_matrix(table, &s, &r),
        column_labels: s.preps.iter().map(|&p| table.preparations()[p].clone()).collect(),
        row_labels,
    })
}

pub fn effect_fingerprints(
    table: &DataTable,
    scenario: &Scenario,
    reference: &Reference,
) -> Result<FingerprintMap, ModelError> {
    let s = table.resolve_scenario(scenario)?;
    let r = table.resolve_reference(reference)?;
    let mut row_labels = vec!["1".to_string()];
    row_labels.extend(r.preps.iter().map(|&p| table.preparations()[p].clone()));
    Ok(FingerprintMap {
        side: Side::Effect,
        matrix: effect_matrix(table, &s, &r),
        column_labels: s.effects.iter().map(|&k| table.effect_label(k)).collect(),
        row_labels,
    })
}

pub(crate) fn resolved_kernels(
    table: &DataTable,
    scenario: &ResolvedScenario,
    reference: &ResolvedReference,
) -> KernelPair {
    KernelPair {
        k_s: kernel_basis(&prep_matrix(table, scenario, reference)),
        k_e: kernel_basis(&effect_matrix(table, scenario, reference)),
    }
}

pub fn kernels(
    table: &DataTable,
    scenario: &Scenario,
    reference: &Reference,
) -> Result<KernelPair, ModelError> {
    let s = table.resolve_scenario(scenario)?;
    let r = table.resolve_reference(reference)?;
    Ok(resolved_kernels(table, &s, &r))
}

/// A preparation or effect density, for indistinguishability queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Density {
    Prep(PrepDensity),
    Effect(EffectDensity),
}

impl Density {
    pub fn side(&self) -> Side {
        match self {
            Density::Prep(_) => Side::Preparation,
            Density::Effect(_) => Side::Effect,
        }
    }
}

/// Statistics of a density against the reference procedures of the opposite kind.
pub fn density_fingerprint(
    table: &DataTable,
    density: &Density,
    reference: &Reference,
) -> Result<Vec<Rational>, ModelError> {
    let r = table.resolve_reference(reference)?;
    match density {
        Density::Prep(rho) => {
            check_prep_density(rho, table.preparations())?;
            let weights: Vec<(usize, &Rational)> = rho
                .weights
                .iter()
                .map(|(p, w)| Ok((table.prep_index(p)?, w)))
                .collect::<Result<_, ModelError>>()?;
            Ok(r.effects
                .iter()
                .map(|&k| {
                    weights
                        .iter()
                        .map(|(p, w)| *w * table.prob_key(k, *p))
                        .fold(Rational::zero(), |a, b| a + b)
                })
                .collect())
        }
        Density::Effect(tau) => {
            let support: Vec<EffectKey> = tau
                .weights
                .keys()
                .map(|e| table.effect_key(e))
                .collect::<Result<_, _>>()?;
            check_effect_density(table, tau, &support)?;
            let weights: Vec<(EffectKey, &Rational)> = tau
                .weights
                .iter()
                .map(|(e, w)| Ok((table.effect_key(e)?, w)))
                .collect::<Result<_, ModelError>>()?;
            Ok(r.preps
                .iter()
                .map(|&p| {
                    weights
                        .iter()
                        .map(|(k, w)| *w * table.prob_key(*k, p))
                        .fold(Rational::zero(), |a, b| a + b)
                })
                .collect())
        }
    }
}

/// Exact equality of the two densities' reference statistics.
pub fn are_indistinguishable(
    table: &DataTable,
    d1: &Density,
    d2: &Density,
    reference: &Reference,
) -> Result<bool, ModelError> {
    if d1.side() != d2.side() {
        return Err(ModelError::InvalidDensity(
            "cannot compare a preparation density with an effect density".into(),
        ));
    }
    Ok(density_fingerprint(table, d1, reference)? == density_fingerprint(table, d2, reference)?)
}

/// A reference-kernel vector the scenario itself does not annihilate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FaithfulnessWitness {
    pub side: Side,
    /// Coefficients over the scenario's preparations or effects.
    #[serde(with = "crate::rational::serde_vec")]
    pub vector: Vec<Rational>,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FaithfulnessReport {
    pub faithful: bool,
    pub witness: Option<FaithfulnessWitness>,
}

/// Prefers a plain difference `δ_i − δ_j`, falling back to a basis vector.
fn find_witness(reference: &SubspaceBasis, scenario: &SubspaceBasis) -> Option<Vec<Rational>> {
    let n = reference.ambient();
    for i in 0..n {
        for j in i + 1..n {
            let mut v = vec![Rational::zero(); n];
            v[i] = Rational::one();
            v[j] = -Rational::one();
            if reference.contains_vector(&v) && !scenario.contains_vector(&v) {
                return Some(v);
            }
        }
    }
    reference
        .vectors()
        .iter()
        .find(|v| !scenario.contains_vector(v))
        .cloned()
}

pub(crate) fn resolved_faithfulness(
    table: &DataTable,
    scenario: &ResolvedScenario,
    reference: &KernelPair,
) -> FaithfulnessReport {
    let own = ResolvedReference {
        preps: scenario.preps.clone(),
        effects: scenario.effects.clone(),
    };
    let base = resolved_kernels(table, scenario, &own);
    if let Some(vector) = find_witness(&reference.k_s, &base.k_s) {
        return FaithfulnessReport {
            faithful: false,
            witness: Some(FaithfulnessWitness {
                side: Side::Preparation,
                vector,
                labels: scenario.preps.iter().map(|&p| table.preparations()[p].clone()).collect(),
            }),
        };
    }
    if let Some(vector) = find_witness(&reference.k_e, &base.k_e) {
        return FaithfulnessReport {
            faithful: false,
            witness: Some(FaithfulnessWitness {
                side: Side::Effect,
                vector,
                labels: scenario.effects.iter().map(|&k| table.effect_label(k)).collect(),
            }),
        };
    }
    FaithfulnessReport {
        faithful: true,
        witness: None,
    }
}

/// Whether the reference refines the scenario's own indistinguishability
/// relations (scenario-as-reference ⪯ reference).
pub fn is_faithful(
    table: &DataTable,
    scenario: &Scenario,
    reference: &Reference,
) -> Result<FaithfulnessReport, ModelError> {
    let s = table.resolve_scenario(scenario)?;
    let r = table.resolve_reference(reference)?;
    let k = resolved_kernels(table, &s, &r);
    Ok(resolved_faithfulness(table, &s, &k))
}

/// `A ⪯ B` for kernel pairs over the same scenario.
pub fn kernels_leq(a: &KernelPair, b: &KernelPair) -> bool {
    subspace_contains(&a.k_s, &b.k_s).expect("kernels share the scenario dimension")
        && subspace_contains(&a.k_e, &b.k_e).expect("kernels share the scenario dimension")
}

/// `A ⪯ B`: every pair indistinguishable under B is indistinguishable under A.
pub fn preorder_leq(
    table: &DataTable,
    scenario: &Scenario,
    a: &Reference,
    b: &Reference,
) -> Result<bool, ModelError> {
    Ok(kernels_leq(&kernels(table, scenario, a)?, &kernels(table, scenario, b)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{toy_bit_scenario, toy_bit_table};
    use crate::model::EffectRef;
    use crate::rational::{int, ratio};

    fn refs(effects: Vec<EffectRef>) -> Reference {
        Reference::new(&["P1", "P2", "P3", "P4"], effects)
    }

    fn e1() -> Reference {
        refs(vec![
            EffectRef::Null,
            EffectRef::Trivial,
            EffectRef::event("M1", &["z0"]),
            EffectRef::event("M1", &["z1"]),
        ])
    }

    fn e2() -> Reference {
        let mut r = e1();
        r.effects.push(EffectRef::event("M2", &["x0"]));
        r
    }

    fn x_only() -> Reference {
        refs(vec![
            EffectRef::Null,
            EffectRef::Trivial,
            EffectRef::event("M2", &["x0"]),
            EffectRef::event("M2", &["x1"]),
        ])
    }

    fn mix(pairs: &[(&str, Rational)]) -> Density {
        Density::Prep(PrepDensity::from_pairs(pairs))
    }

    #[test]
    fn fingerprint_shapes() {
        let t = toy_bit_table();
        let s = toy_bit_scenario();
        let empty = prep_fingerprints(&t, &s, &refs(vec![])).unwrap();
        assert_eq!(empty.matrix.rows(), 1);
        let fp = prep_fingerprints(&t, &s, &e1()).unwrap();
        assert_eq!(fp.matrix.column(0), vec![int(1), int(0), int(1), int(1), int(0)]);
        assert_eq!(
            fp.matrix.column(2),
            vec![int(1), int(0), int(1), ratio(1, 2), ratio(1, 2)]
        );
    }

    #[test]
    fn toy_bit_kernels() {
        let t = toy_bit_table();
        let s = toy_bit_scenario();
        let target = [ratio(-1, 2), ratio(-1, 2), int(1), int(0)];
        assert!(kernels(&t, &s, &e1()).unwrap().k_s.contains_vector(&target));
        assert!(!kernels(&t, &s, &e2()).unwrap().k_s.contains_vector(&target));
    }

    #[test]
    fn indistinguishability_examples() {
        let t = toy_bit_table();
        let p3 = mix(&[("P3", int(1))]);
        let half = mix(&[("P1", ratio(1, 2)), ("P2", ratio(1, 2))]);
        assert!(are_indistinguishable(&t, &p3, &p3, &e2()).unwrap());
        assert!(are_indistinguishable(&t, &p3, &half, &e1()).unwrap());
        assert!(!are_indistinguishable(&t, &p3, &half, &e2()).unwrap());
    }

    #[test]
    fn faithfulness_examples() {
        let t = toy_bit_table();
        let s = toy_bit_scenario();
        assert!(is_faithful(&t, &s, &s.as_reference()).unwrap().faithful);
        let report = is_faithful(&t, &s, &refs(vec![EffectRef::Null, EffectRef::Trivial])).unwrap();
        assert!(!report.faithful);
        let w = report.witness.unwrap();
        assert_eq!(w.side, Side::Preparation);
        assert_eq!(w.vector, vec![int(1), int(-1), int(0), int(0)]);
    }

    #[test]
    fn preorder_examples() {
        let t = toy_bit_table();
        let s = toy_bit_scenario();
        assert!(preorder_leq(&t, &s, &e1(), &e1()).unwrap());
        assert!(preorder_leq(&t, &s, &e1(), &e2()).unwrap());
        assert!(!preorder_leq(&t, &s, &e2(), &e1()).unwrap());
        assert!(!preorder_leq(&t, &s, &e1(), &x_only()).unwrap());
        assert!(!preorder_leq(&t, &s, &x_only(), &e1()).unwrap());
    }
}
