//! Small fixed tables used in examples, tests and benchmarks.

use crate::model::{DataTable, EffectRef, Measurement, Reference, Scenario};
use crate::rational::{int, ratio, Rational};

fn table(preps: &[&str], measurements: Vec<Measurement>) -> DataTable {
    DataTable::new(preps.iter().map(|s| s.to_string()).collect(), measurements)
        .expect("fixture table is well formed")
}

fn binary(id: &str, outcomes: [&str; 2], first: &[Rational]) -> Measurement {
    let second = first.iter().map(|p| int(1) - p).collect();
    Measurement::new(id, &outcomes, vec![first.to_vec(), second])
}

/// The toy-bit table: four preparations, a z-type and an x-type binary
/// measurement. `P3`/`P4` look unbiased to `M1` and `P1`/`P2` to `M2`.
pub fn toy_bit_table() -> DataTable {
    let h = ratio(1, 2);
    table(
        &["P1", "P2", "P3", "P4"],
        vec![
            binary("M1", ["z0", "z1"], &[int(1), int(0), h.clone(), h.clone()]),
            binary("M2", ["x0", "x1"], &[h.clone(), h, int(0), int(1)]),
        ],
    )
}

/// Every preparation and every single-outcome effect of the toy-bit table.
pub fn toy_bit_scenario() -> Scenario {
    full_scenario(&toy_bit_table())
}

/// Four preparations `Qab` encoding two bits; `M0` reads `a`, `M1` reads
/// `b`, each correct with probability 17/20.
pub fn parity_table() -> DataTable {
    let hi = ratio(17, 20);
    let lo = ratio(3, 20);
    table(
        &["Q00", "Q01", "Q10", "Q11"],
        vec![
            binary("M0", ["0", "1"], &[hi.clone(), hi.clone(), lo.clone(), lo.clone()]),
            binary("M1", ["0", "1"], &[hi.clone(), lo.clone(), hi, lo]),
        ],
    )
}

pub fn parity_scenario() -> Scenario {
    full_scenario(&parity_table())
}

/// The parity table with an extra measurement `D` that identifies each
/// preparation with certainty.
pub fn parity_table_with_distinguisher() -> DataTable {
    with_identity_block(&parity_table(), "D")
}

/// Reference made of the scenario plus every outcome of `D`.
pub fn parity_distinguishing_reference() -> Reference {
    let t = parity_table_with_distinguisher();
    let mut r = parity_scenario().as_reference();
    r.effects
        .extend(t.measurement_effects("D").expect("D exists"));
    r
}

/// Scenario with all preparations, null, trivial and each single outcome.
pub fn full_scenario(table: &DataTable) -> Scenario {
    let mut effects = vec![EffectRef::Null, EffectRef::Trivial];
    for m in table.measurements() {
        for o in &m.outcomes {
            effects.push(EffectRef::event(&m.id, &[o]));
        }
    }
    Scenario {
        preparations: table.preparations().to_vec(),
        effects,
    }
}

/// Appends a measurement with one outcome per preparation that fires with
/// certainty exactly on that preparation.
pub fn with_identity_block(table: &DataTable, id: &str) -> DataTable {
    let preps = table.preparations().to_vec();
    let n = preps.len();
    let outcomes: Vec<String> = preps.iter().map(|p| format!("is_{p}")).collect();
    let probs = (0..n)
        .map(|o| (0..n).map(|p| int(i64::from(o == p))).collect())
        .collect();
    let mut measurements = table.measurements().to_vec();
    measurements.push(Measurement {
        id: id.to_string(),
        outcomes,
        probs,
    });
    DataTable::new(preps, measurements).expect("identity block keeps the table well formed")
}
