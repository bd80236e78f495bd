//! Seeded generators of small exact tables for property tests and benches.

use rand::Rng;

use crate::indist::{kernels, Density, Side};
use crate::model::{DataTable, EffectDensity, EffectRef, Measurement, PrepDensity, Reference, Scenario};
use crate::rational::{int, ratio, Rational};

fn prep_ids(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("P{i}")).collect()
}

/// Rebit-like table: preparations are rational Bloch vectors on a grid
/// inside the unit disc, measurements are unsharp binary measurements along
/// grid directions with `Pr(0|P) = (1 + n·r)/2`.
pub fn qubit_table<R: Rng>(rng: &mut R, preps: usize, measurements: usize) -> DataTable {
    let point = |rng: &mut R| loop {
        let x = rng.random_range(-4i64..=4);
        let y = rng.random_range(-4i64..=4);
        if x * x + y * y <= 16 {
            return (x, y);
        }
    };
    let states: Vec<(i64, i64)> = (0..preps).map(|_| point(rng)).collect();
    let ms = (0..measurements)
        .map(|m| {
            let (nx, ny) = point(rng);
            let first: Vec<Rational> = states
                .iter()
                .map(|&(x, y)| ratio(16 + nx * x + ny * y, 32))
                .collect();
            binary(&format!("M{}", m + 1), &first)
        })
        .collect();
    DataTable::new(prep_ids(preps), ms).expect("generated table is well formed")
}

/// Table generated by a random ontological model with `ontic` states and
/// deterministic or random responses, so it admits at least one model.
pub fn classical_table<R: Rng>(
    rng: &mut R,
    preps: usize,
    measurements: usize,
    outcomes: usize,
    ontic: usize,
) -> DataTable {
    let dists: Vec<Vec<Rational>> = (0..preps).map(|_| random_distribution(rng, ontic)).collect();
    let ms = (0..measurements)
        .map(|m| {
            let responses: Vec<Vec<Rational>> =
                (0..ontic).map(|_| random_distribution(rng, outcomes)).collect();
            let probs = (0..outcomes)
                .map(|o| {
                    dists
                        .iter()
                        .map(|mu| {
                            mu.iter()
                                .zip(&responses)
                                .map(|(w, xi)| w * &xi[o])
                                .fold(int(0), |a, b| a + b)
                        })
                        .collect()
                })
                .collect();
            Measurement {
                id: format!("M{}", m + 1),
                outcomes: (0..outcomes).map(|o| o.to_string()).collect(),
                probs,
            }
        })
        .collect();
    DataTable::new(prep_ids(preps), ms).expect("generated table is well formed")
}

/// Arbitrary valid table with small-denominator entries.
pub fn any_table<R: Rng>(rng: &mut R, preps: usize, measurements: usize, outcomes: usize) -> DataTable {
    let ms = (0..measurements)
        .map(|m| {
            let cols: Vec<Vec<Rational>> =
                (0..preps).map(|_| random_distribution(rng, outcomes)).collect();
            Measurement {
                id: format!("M{}", m + 1),
                outcomes: (0..outcomes).map(|o| o.to_string()).collect(),
                probs: (0..outcomes)
                    .map(|o| cols.iter().map(|c| c[o].clone()).collect())
                    .collect(),
            }
        })
        .collect();
    DataTable::new(prep_ids(preps), ms).expect("generated table is well formed")
}

/// Two-bit encoding table: preparation `Qab`, measurement `M0` reads `a`
/// and `M1` reads `b`, each correct with probability `k/20` for a random
/// `k ≥ 10`. Contextual exactly when `k > 15`.
pub fn parity_family_table<R: Rng>(rng: &mut R) -> DataTable {
    let p = ratio(rng.random_range(10..=20), 20);
    let q = int(1) - &p;
    let bit = |x: bool| if x { p.clone() } else { q.clone() };
    let preps: Vec<String> = ["Q00", "Q01", "Q10", "Q11"].map(String::from).to_vec();
    let reads = |shift: usize| -> Vec<Rational> {
        (0..4usize).map(|i| bit((i >> shift) & 1 == 0)).collect()
    };
    DataTable::new(preps, vec![binary("M0", &reads(1)), binary("M1", &reads(0))])
        .expect("generated table is well formed")
}

/// One of the generators above, at most 4 preparations and 6 outcome
/// effects in total.
pub fn small_table<R: Rng>(rng: &mut R) -> DataTable {
    let preps = rng.random_range(2..=4);
    let outcomes = rng.random_range(2..=3);
    let measurements = rng.random_range(1..=6 / outcomes);
    match rng.random_range(0..4) {
        3 => parity_family_table(rng),
        0 => {
            let measurements = rng.random_range(1..=3);
            qubit_table(rng, preps, measurements)
        }
        1 => {
            let ontic = rng.random_range(1..=4);
            classical_table(rng, preps, measurements, outcomes, ontic)
        }
        _ => any_table(rng, preps, measurements, outcomes),
    }
}

fn binary(id: &str, first: &[Rational]) -> Measurement {
    Measurement {
        id: id.to_string(),
        outcomes: vec!["0".into(), "1".into()],
        probs: vec![first.to_vec(), first.iter().map(|p| int(1) - p).collect()],
    }
}

/// A probability vector with denominator at most 12, sometimes deterministic.
fn random_distribution<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    if rng.random_bool(0.25) {
        let hot = rng.random_range(0..n);
        return (0..n).map(|i| int(i64::from(i == hot))).collect();
    }
    let den = rng.random_range(1i64..=12);
    let mut left = den;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let take = if i + 1 == n { left } else { rng.random_range(0..=left) };
        left -= take;
        out.push(ratio(take, den));
    }
    out
}

/// Random subset of the table's preparations (nonempty) and effects
/// (always containing null and trivial, optionally with complements).
pub fn random_scenario<R: Rng>(rng: &mut R, table: &DataTable, outcome_complete: bool) -> Scenario {
    let mut preparations: Vec<String> = table
        .preparations()
        .iter()
        .filter(|_| rng.random_bool(0.8))
        .cloned()
        .collect();
    if preparations.is_empty() {
        preparations.push(table.preparations()[0].clone());
    }
    let mut effects = vec![EffectRef::Null, EffectRef::Trivial];
    for m in table.measurements() {
        if outcome_complete {
            if rng.random_bool(0.75) {
                for o in &m.outcomes {
                    effects.push(EffectRef::event(&m.id, &[o]));
                }
            }
        } else {
            for o in &m.outcomes {
                if rng.random_bool(0.6) {
                    effects.push(EffectRef::event(&m.id, &[o]));
                }
            }
        }
    }
    Scenario {
        preparations,
        effects,
    }
}

/// Random reference drawn from the whole table.
pub fn random_reference<R: Rng>(rng: &mut R, table: &DataTable) -> Reference {
    let preparations = table
        .preparations()
        .iter()
        .filter(|_| rng.random_bool(0.5))
        .cloned()
        .collect();
    let effects = table
        .atomic_effects()
        .into_iter()
        .filter(|_| rng.random_bool(0.5))
        .collect();
    Reference {
        preparations,
        effects,
    }
}

/// A reference containing every procedure of `base` plus random extras.
pub fn random_refinement<R: Rng>(rng: &mut R, table: &DataTable, base: &Reference) -> Reference {
    let extra = random_reference(rng, table);
    let mut out = base.clone();
    for p in extra.preparations {
        if !out.preparations.contains(&p) {
            out.preparations.push(p);
        }
    }
    for e in extra.effects {
        if !out.effects.contains(&e) {
            out.effects.push(e);
        }
    }
    out
}

/// Two densities over the scenario's preparations or effects. When
/// `related` is set they are built as `u ± ε·v` for a scenario-kernel vector
/// `v`, so they are indistinguishable whenever the kernel is nontrivial.
pub fn random_density_pair<R: Rng>(
    rng: &mut R,
    table: &DataTable,
    scenario: &Scenario,
    side: Side,
    related: bool,
) -> (Density, Density) {
    let s = table
        .resolve_scenario(scenario)
        .expect("scenario belongs to the table");
    let n = match side {
        Side::Preparation => s.preps.len(),
        Side::Effect => s.effects.len(),
    };
    let (a, b) = if related {
        let k = kernels(table, scenario, &scenario.as_reference()).expect("scenario resolves");
        let basis = match side {
            Side::Preparation => k.k_s,
            Side::Effect => k.k_e,
        };
        let mut v = vec![int(0); n];
        for row in basis.vectors() {
            let c = int(rng.random_range(-2i64..=2));
            for (x, y) in v.iter_mut().zip(row) {
                *x += &c * y;
            }
        }
        let top = v.iter().map(num_traits::Signed::abs).max().unwrap_or_else(|| int(0));
        let u = ratio(1, n as i64);
        if top == int(0) {
            (vec![u.clone(); n], vec![u; n])
        } else {
            let eps = &u / top;
            (
                v.iter().map(|x| &u + &eps * x).collect(),
                v.iter().map(|x| &u - &eps * x).collect(),
            )
        }
    } else {
        (random_distribution(rng, n), random_distribution(rng, n))
    };
    let wrap = |w: Vec<Rational>| match side {
        Side::Preparation => Density::Prep(PrepDensity {
            weights: s
                .preps
                .iter()
                .zip(w)
                .map(|(&p, x)| (table.preparations()[p].clone(), x))
                .collect(),
        }),
        Side::Effect => Density::Effect(EffectDensity {
            weights: s.effects.iter().zip(w).map(|(&k, x)| (table.effect_ref(k), x)).collect(),
        }),
    };
    (wrap(a), wrap(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_table;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_tables_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            assert!(validate_table(&qubit_table(&mut rng, 4, 3)).is_empty());
            assert!(validate_table(&classical_table(&mut rng, 3, 2, 3, 3)).is_empty());
            assert!(validate_table(&any_table(&mut rng, 3, 2, 2)).is_empty());
            assert!(validate_table(&parity_family_table(&mut rng)).is_empty());
        }
    }
}
