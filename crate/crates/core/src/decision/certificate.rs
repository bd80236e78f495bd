use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::DecisionError;
use crate::indist::kernels;
use crate::lp::{check_farkas, FeasibilityProgram, LpOutcome, Relation};
use crate::model::{DataTable, EffectKey, Reference, Scenario, Violation};
use crate::rational::{format_rational, Rational};

/// A finite ontological model: ontic state distributions per preparation
/// and response functions per effect (keyed by effect label).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntModelCertificate {
    pub ontic_states: Vec<String>,
    #[serde(with = "nested")]
    pub mu: BTreeMap<String, BTreeMap<String, Rational>>,
    #[serde(with = "nested")]
    pub xi: BTreeMap<String, BTreeMap<String, Rational>>,
}

mod nested {
    use super::*;
    use serde::{Deserializer, Serializer};

    type Nested = BTreeMap<String, BTreeMap<String, Rational>>;

    pub fn serialize<S: Serializer>(value: &Nested, s: S) -> Result<S::Ok, S::Error> {
        let text: BTreeMap<&String, BTreeMap<&String, String>> = value
            .iter()
            .map(|(k, inner)| (k, inner.iter().map(|(l, v)| (l, format_rational(v))).collect()))
            .collect();
        text.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Nested, D::Error> {
        let raw: BTreeMap<String, BTreeMap<String, serde_json::Value>> = BTreeMap::deserialize(d)?;
        raw.into_iter()
            .map(|(k, inner)| {
                let inner = inner
                    .into_iter()
                    .map(|(l, v)| {
                        crate::rational::from_json(&v)
                            .map(|r| (l, r))
                            .map_err(serde::de::Error::custom)
                    })
                    .collect::<Result<_, _>>()?;
                Ok((k, inner))
            })
            .collect()
    }
}

impl OntModelCertificate {
    fn mu_at(&self, prep: &str, lambda: &str) -> Rational {
        self.mu
            .get(prep)
            .and_then(|d| d.get(lambda))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    fn xi_at(&self, effect: &str, lambda: &str) -> Rational {
        self.xi
            .get(effect)
            .and_then(|d| d.get(lambda))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }
}

/// Checks every ontological-model and noncontextuality identity exactly.
/// Empty output means the certificate is valid. This does not share code
/// with the solver or the extraction.
pub fn verify_model(
    cert: &OntModelCertificate,
    table: &DataTable,
    scenario: &Scenario,
    reference: &Reference,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let resolved = match table.resolve_scenario(scenario) {
        Ok(r) => r,
        Err(e) => return vec![Violation::new("structure", "scenario", e.to_string())],
    };
    let lambdas = &cert.ontic_states;
    let mut seen = std::collections::BTreeSet::new();
    for l in lambdas {
        if !seen.insert(l) {
            out.push(Violation::new("structure", "ontic states", format!("duplicate ontic state {l}")));
        }
    }
    let preps: Vec<&String> = resolved.preps.iter().map(|&p| &table.preparations()[p]).collect();
    let effects: Vec<(EffectKey, String)> = resolved
        .effects
        .iter()
        .map(|&k| (k, table.effect_label(k)))
        .collect();

    for (key, dist) in &cert.mu {
        if !preps.contains(&key) {
            out.push(Violation::new("structure", format!("mu[{key}]"), "not a scenario preparation"));
        }
        for l in dist.keys().filter(|l| !lambdas.contains(l)) {
            out.push(Violation::new("structure", format!("mu[{key}]"), format!("unknown ontic state {l}")));
        }
    }
    for (key, resp) in &cert.xi {
        if !effects.iter().any(|(_, label)| label == key) {
            out.push(Violation::new("structure", format!("xi[{key}]"), "not a scenario effect"));
        }
        for l in resp.keys().filter(|l| !lambdas.contains(l)) {
            out.push(Violation::new("structure", format!("xi[{key}]"), format!("unknown ontic state {l}")));
        }
    }

    for p in &preps {
        let mut total = Rational::zero();
        for l in lambdas {
            let w = cert.mu_at(p, l);
            if w.is_negative() {
                out.push(Violation::new(
                    "ontic state distribution",
                    format!("mu[{p}][{l}]"),
                    format!("negative weight {}", format_rational(&w)),
                ));
            }
            total += w;
        }
        if !total.is_one() {
            out.push(Violation::new(
                "ontic state distribution",
                format!("mu[{p}]"),
                format!("weights sum to {}", format_rational(&total)),
            ));
        }
    }

    for (key, label) in &effects {
        for l in lambdas {
            let v = cert.xi_at(label, l);
            if v.is_negative() || v > Rational::one() {
                out.push(Violation::new(
                    "response function",
                    format!("xi[{label}][{l}]"),
                    format!("value {} outside [0, 1]", format_rational(&v)),
                ));
            }
            if *key == EffectKey::Trivial && !v.is_one() {
                out.push(Violation::new(
                    "trivial event",
                    format!("xi[{label}][{l}]"),
                    format!("trivial effect responds {}", format_rational(&v)),
                ));
            }
        }
    }

    // every disjoint family of scenario effects whose union is a scenario effect
    for (m, _) in table.measurements().iter().enumerate() {
        let on_m: Vec<(u64, &String)> = effects
            .iter()
            .filter_map(|(k, label)| k.mask_on(m, table).map(|mask| (mask, label)))
            .collect();
        if on_m.len() > 20 {
            out.push(Violation::new(
                "additivity",
                format!("measurement {}", table.measurements()[m].id),
                "too many effects to check coarse-grainings exhaustively",
            ));
            continue;
        }
        for subset in 1u32..(1 << on_m.len()) {
            let members: Vec<usize> = (0..on_m.len()).filter(|i| subset & (1 << i) != 0).collect();
            if members.len() < 2 {
                continue;
            }
            let mut union = 0u64;
            let mut disjoint = true;
            for &i in &members {
                if union & on_m[i].0 != 0 {
                    disjoint = false;
                }
                union |= on_m[i].0;
            }
            if !disjoint {
                continue;
            }
            for (_, whole) in on_m.iter().filter(|(mask, _)| *mask == union) {
                for l in lambdas {
                    let sum = members
                        .iter()
                        .map(|&i| cert.xi_at(on_m[i].1, l))
                        .fold(Rational::zero(), |a, b| a + b);
                    if cert.xi_at(whole, l) != sum {
                        let parts: Vec<&str> = members.iter().map(|&i| on_m[i].1.as_str()).collect();
                        out.push(Violation::new(
                            "additivity",
                            format!("xi[{whole}][{l}]"),
                            format!("differs from the sum over {}", parts.join(" + ")),
                        ));
                    }
                }
            }
        }
    }

    for (key, label) in &effects {
        for (&p, prep) in resolved.preps.iter().zip(&preps) {
            let predicted = lambdas
                .iter()
                .map(|l| cert.xi_at(label, l) * cert.mu_at(prep, l))
                .fold(Rational::zero(), |a, b| a + b);
            let actual = table.prob_key(*key, p);
            if predicted != actual {
                out.push(Violation::new(
                    "statistics",
                    format!("{label}|{prep}"),
                    format!(
                        "model predicts {}, table has {}",
                        format_rational(&predicted),
                        format_rational(&actual)
                    ),
                ));
            }
        }
    }

    let k = match kernels(table, scenario, reference) {
        Ok(k) => k,
        Err(e) => {
            out.push(Violation::new("structure", "reference", e.to_string()));
            return out;
        }
    };
    for (i, v) in k.k_s.vectors().iter().enumerate() {
        for l in lambdas {
            let s = v
                .iter()
                .zip(&preps)
                .map(|(c, p)| c * cert.mu_at(p, l))
                .fold(Rational::zero(), |a, b| a + b);
            if !s.is_zero() {
                out.push(Violation::new(
                    "preparation noncontextuality",
                    format!("ontic state {l}"),
                    format!("indistinguishable preparation combination {i} has weight {}", format_rational(&s)),
                ));
            }
        }
    }
    for (i, w) in k.k_e.vectors().iter().enumerate() {
        for l in lambdas {
            let s = w
                .iter()
                .zip(&effects)
                .map(|(c, (_, label))| c * cert.xi_at(label, l))
                .fold(Rational::zero(), |a, b| a + b);
            if !s.is_zero() {
                out.push(Violation::new(
                    "effect noncontextuality",
                    format!("ontic state {l}"),
                    format!("indistinguishable effect combination {i} responds {}", format_rational(&s)),
                ));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessTerm {
    pub label: String,
    pub group: String,
    #[serde(with = "crate::rational::serde_str")]
    pub multiplier: Rational,
}

/// A Farkas certificate rendered as the contradictory constraint combination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InequalityWitness {
    pub terms: Vec<WitnessTerm>,
    /// Nonzero coefficients of the combined row, by variable name.
    #[serde(with = "crate::rational::serde_map")]
    pub combined: BTreeMap<String, Rational>,
    #[serde(with = "crate::rational::serde_str")]
    pub rhs: Rational,
    pub statement: String,
}

/// Renders verified Farkas multipliers as a human-readable contradiction.
pub fn farkas_to_inequality(
    outcome: &LpOutcome,
    program: &FeasibilityProgram,
) -> Result<InequalityWitness, DecisionError> {
    let LpOutcome::Infeasible { farkas } = outcome else {
        return Err(DecisionError::NotInfeasible);
    };
    check_farkas(program, farkas).map_err(DecisionError::Unverifiable)?;
    let mut terms = Vec::new();
    let mut combined: BTreeMap<String, Rational> = BTreeMap::new();
    let mut rhs = Rational::zero();
    let mut strict = false;
    for (c, y) in program.constraints.iter().zip(farkas) {
        if y.is_zero() {
            continue;
        }
        strict |= c.relation == Relation::Le;
        terms.push(WitnessTerm {
            label: c.label.clone(),
            group: c.group.clone(),
            multiplier: y.clone(),
        });
        for (j, a) in &c.coeffs {
            *combined
                .entry(program.variables[*j].name.clone())
                .or_insert_with(Rational::zero) += y * a;
        }
        rhs += y * &c.rhs;
    }
    combined.retain(|_, v| !v.is_zero());
    let lhs = if combined.is_empty() {
        "0".to_string()
    } else {
        combined
            .iter()
            .map(|(name, c)| format!("{}·{}", format_rational(c), name))
            .collect::<Vec<_>>()
            .join(" + ")
    };
    let statement = format!(
        "summing {} constraint(s) gives 0 <= {} {} {}, impossible since every coefficient is nonnegative",
        terms.len(),
        lhs,
        if strict { "<=" } else { "=" },
        format_rational(&rhs)
    );
    Ok(InequalityWitness {
        terms,
        combined,
        rhs,
        statement,
    })
}
