//! Fixed workloads shared by the benchmarks.

use nclab::instances::{full_scenario, toy_bit_scenario, toy_bit_table};
use nclab::random::qubit_table;
use nclab::{DataTable, EffectRef, Reference, Scenario};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seeded rebit tables with `preps` preparations and `measurements`
/// binary measurements, each with its full scenario.
pub fn qubit_workload(preps: usize, measurements: usize, seed: u64) -> (DataTable, Scenario) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = qubit_table(&mut rng, preps, measurements);
    let s = full_scenario(&t);
    (t, s)
}

/// The toy-bit table with every subset of its four outcome effects as a
/// reference (16 references).
pub fn toy_power_set() -> (DataTable, Scenario, Vec<Reference>) {
    let t = toy_bit_table();
    let s = toy_bit_scenario();
    let pool = [("M1", "z0"), ("M1", "z1"), ("M2", "x0"), ("M2", "x1")];
    let refs = (0..16u32)
        .map(|mask| {
            let mut effects = vec![EffectRef::Null, EffectRef::Trivial];
            for (i, (m, o)) in pool.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    effects.push(EffectRef::event(m, &[o]));
                }
            }
            Reference {
                preparations: s.preparations.clone(),
                effects,
            }
        })
        .collect();
    (t, s, refs)
}
