//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Exact arithmetic throughout; the only tolerances are wall-clock
//! limits.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nclab::decision::transposed::decide_transposed;
use nclab::instances::*;
use nclab::lp::Relation;
use nclab::quantum::cross_check_equivalence;
use nclab::random::*;
use nclab::rational::{int, ratio};
use nclab::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIXED_INSTANCE_LIMIT: Duration = Duration::from_secs(5);
const GRAPH_LIMIT: Duration = Duration::from_secs(60);
const SEED: u64 = 0x5eed_0001;

const UNFAITHFUL_TRIPLES: usize = 200;
const PREORDER_PAIRS: usize = 200;
const RANDOM_GRAPHS: usize = 20;
const IDENTITY_BLOCK_TABLES: usize = 100;
const CROSS_CHECK_SCENARIOS: usize = 100;
const DENSITY_PAIRS: usize = 500;

/// Every certificate seen during the run, checked again here.
#[derive(Default)]
struct Audit {
    models: usize,
    farkas: usize,
    failures: Vec<String>,
}

impl Audit {
    fn record(&mut self, d: &Decision, t: &DataTable, s: &Scenario, r: &Reference) {
        match &d.verdict {
            Verdict::Noncontextual(cert) => {
                self.models += 1;
                let v = verify_model(cert, t, s, r);
                if let Some(first) = v.first() {
                    self.failures.push(format!("model rejected: {first}"));
                }
            }
            Verdict::ContextualInfeasible(f) => {
                self.farkas += 1;
                if let Err(m) = recombine_farkas(f) {
                    self.failures.push(format!("Farkas rejected: {m}"));
                }
            }
            Verdict::ContextualUnfaithful(_) => {}
        }
    }
}

/// Dense recombination `yᵀA`, `yᵀb`, separate from the library checker.
fn recombine_farkas(f: &nclab::decision::FarkasCertificate) -> Result<(), String> {
    let p = &f.program;
    if f.multipliers.len() != p.constraints.len() {
        return Err("multiplier count".into());
    }
    let mut combined = vec![int(0); p.variables.len()];
    let mut rhs = int(0);
    for (c, y) in p.constraints.iter().zip(&f.multipliers) {
        if c.relation == Relation::Le && *y < int(0) {
            return Err(format!("negative multiplier on {}", c.label));
        }
        for (j, a) in &c.coeffs {
            combined[*j] += y * a;
        }
        rhs += y * &c.rhs;
    }
    for (v, c) in p.variables.iter().zip(&combined) {
        if (v.nonneg && *c < int(0)) || (!v.nonneg && *c != int(0)) {
            return Err(format!("bad combined coefficient on {}", v.name));
        }
    }
    if rhs >= int(0) {
        return Err("right-hand side not negative".into());
    }
    Ok(())
}

struct Report {
    pass: bool,
    detail: String,
}

fn report(pass: bool, detail: impl Into<String>) -> Report {
    Report {
        pass,
        detail: detail.into(),
    }
}

fn dist(pairs: &[(&str, Rational)]) -> BTreeMap<String, Rational> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Four ontic states (z, x); P1/P2 fix z, P3/P4 fix x.
fn hand_toy_model() -> OntModelCertificate {
    let h = ratio(1, 2);
    let states = ["z0x0", "z0x1", "z1x0", "z1x1"];
    let mu = [
        ("P1", ["z0x0", "z0x1"]),
        ("P2", ["z1x0", "z1x1"]),
        ("P3", ["z0x1", "z1x1"]),
        ("P4", ["z0x0", "z1x0"]),
    ]
    .iter()
    .map(|(p, ls)| (p.to_string(), dist(&[(ls[0], h.clone()), (ls[1], h.clone())])))
    .collect();
    let fires = |pred: &dyn Fn(&str) -> bool| -> BTreeMap<String, Rational> {
        states.iter().map(|l| (l.to_string(), int(i64::from(pred(l))))).collect()
    };
    let mut xi = BTreeMap::new();
    xi.insert("null".to_string(), fires(&|_| false));
    xi.insert("trivial".to_string(), fires(&|_| true));
    xi.insert("z0|M1".to_string(), fires(&|l| l.starts_with("z0")));
    xi.insert("z1|M1".to_string(), fires(&|l| l.starts_with("z1")));
    xi.insert("x0|M2".to_string(), fires(&|l| l.ends_with("x0")));
    xi.insert("x1|M2".to_string(), fires(&|l| l.ends_with("x1")));
    OntModelCertificate {
        ontic_states: states.iter().map(|s| s.to_string()).collect(),
        mu,
        xi,
    }
}

fn criterion_1(audit: &mut Audit) -> Report {
    let t = toy_bit_table();
    let s = toy_bit_scenario();
    let r = s.as_reference();
    let oracle = verify_model(&hand_toy_model(), &t, &s, &r);
    let start = Instant::now();
    let d = decide_rnc(&t, &s, &r).expect("toy bit decides");
    let elapsed = start.elapsed();
    audit.record(&d, &t, &s, &r);
    let accepted = d
        .verdict
        .certificate()
        .is_some_and(|c| verify_model(c, &t, &s, &r).is_empty());
    report(
        oracle.is_empty() && accepted && elapsed < FIXED_INSTANCE_LIMIT,
        format!(
            "hand model accepted={}, verdict={}, certificate accepted={accepted}, {elapsed:?}",
            oracle.is_empty(),
            d.verdict.status()
        ),
    )
}

/// Best parity-oblivious success over the four deterministic strategies.
fn parity_oblivious_bound() -> Rational {
    let mut best = int(0);
    for g0 in 0..2 {
        for g1 in 0..2 {
            let success = |a: i32, b: i32| ratio(i64::from(a == g0) + i64::from(b == g1), 2);
            let even = success(0, 0).max(success(1, 1));
            let odd = success(0, 1).max(success(1, 0));
            best = best.max((even + odd) / int(2));
        }
    }
    best
}

fn criterion_2(audit: &mut Audit) -> Report {
    let t = parity_table();
    let s = parity_scenario();
    let r = s.as_reference();
    let mix = |a: &str, b: &str| Density::Prep(PrepDensity::from_pairs(&[(a, ratio(1, 2)), (b, ratio(1, 2))]));
    let parity_equivalent = are_indistinguishable(&t, &mix("Q00", "Q11"), &mix("Q01", "Q10"), &r).unwrap();

    // average probability of decoding the requested bit
    let mut success = int(0);
    for (i, q) in ["Q00", "Q01", "Q10", "Q11"].iter().enumerate() {
        let bits = [i >> 1, i & 1];
        for (m, bit) in ["M0", "M1"].iter().zip(bits) {
            let e = EffectRef::event(m, &[&bit.to_string()]);
            success += prob(&t, &EffectDensity::point(e), &PrepDensity::point(q)).unwrap();
        }
    }
    success /= int(8);
    let bound = parity_oblivious_bound();

    let start = Instant::now();
    let d = decide_rnc(&t, &s, &r).expect("parity decides");
    let elapsed = start.elapsed();
    audit.record(&d, &t, &s, &r);
    let farkas_ok = match &d.verdict {
        Verdict::ContextualInfeasible(f) => f.verify().is_ok() && recombine_farkas(f).is_ok(),
        _ => false,
    };
    report(
        parity_equivalent && bound == ratio(3, 4) && success > bound && farkas_ok && elapsed < FIXED_INSTANCE_LIMIT,
        format!(
            "success {} > bound {}, verdict={}/{}, Farkas checked={farkas_ok}, {elapsed:?}",
            format_rational(&success),
            format_rational(&bound),
            d.verdict.status(),
            d.verdict.reason().unwrap_or("-")
        ),
    )
}

fn no_shortcut() -> DecisionConfig {
    DecisionConfig {
        faithfulness_shortcut: false,
        ..DecisionConfig::default()
    }
}

fn criterion_3(rng: &mut ChaCha8Rng, audit: &mut Audit) -> Report {
    let mut found = 0;
    let mut bad = 0;
    let mut tries = 0;
    while found < UNFAITHFUL_TRIPLES && tries < 50 * UNFAITHFUL_TRIPLES {
        tries += 1;
        let t = small_table(rng);
        let s = random_scenario(rng, &t, false);
        let r = random_reference(rng, &t);
        if is_faithful(&t, &s, &r).unwrap().faithful {
            continue;
        }
        found += 1;
        // without the shortcut the linear program itself must refute
        let d = decide_rnc_with(&t, &s, &r, &no_shortcut()).unwrap();
        audit.record(&d, &t, &s, &r);
        let quick = decide_rnc(&t, &s, &r).unwrap();
        if d.verdict.is_noncontextual() || quick.verdict.is_noncontextual() {
            bad += 1;
        }
    }
    report(
        found >= UNFAITHFUL_TRIPLES && bad == 0,
        format!("{found} unfaithful triples, {bad} noncontextual verdicts"),
    )
}

fn criterion_4(rng: &mut ChaCha8Rng, audit: &mut Audit) -> Report {
    let mut pairs = 0;
    let mut both_yes = 0;
    let mut violations = 0;
    let mut tries = 0;
    while pairs < PREORDER_PAIRS && tries < 50 * PREORDER_PAIRS {
        tries += 1;
        let t = small_table(rng);
        let s = random_scenario(rng, &t, false);
        let (a, b) = if rng.random_bool(0.5) {
            let a = random_refinement(rng, &t, &s.as_reference());
            let b = random_refinement(rng, &t, &a);
            (a, b)
        } else {
            (random_reference(rng, &t), random_reference(rng, &t))
        };
        if !preorder_leq(&t, &s, &a, &b).unwrap() {
            continue;
        }
        pairs += 1;
        let da = decide_rnc(&t, &s, &a).unwrap();
        let db = decide_rnc(&t, &s, &b).unwrap();
        audit.record(&da, &t, &s, &a);
        audit.record(&db, &t, &s, &b);
        match (da.verdict.is_noncontextual(), db.verdict.is_noncontextual()) {
            (true, false) => violations += 1,
            (true, true) => both_yes += 1,
            _ => {}
        }
    }
    let mut non_monotone = 0;
    for _ in 0..RANDOM_GRAPHS {
        let t = small_table(rng);
        let s = random_scenario(rng, &t, false);
        let mut refs = vec![s.as_reference()];
        for _ in 0..6 {
            refs.push(random_refinement(rng, &t, &s.as_reference()));
            refs.push(random_reference(rng, &t));
        }
        let g = build_graph(&t, &s, &refs).unwrap();
        if !check_monotonicity(&g).monotone {
            non_monotone += 1;
        }
    }
    report(
        pairs >= PREORDER_PAIRS && violations == 0 && non_monotone == 0,
        format!(
            "{pairs} ordered pairs ({both_yes} YES/YES), {violations} YES->NO, {RANDOM_GRAPHS} graphs with {non_monotone} non-monotone"
        ),
    )
}

fn criterion_5(rng: &mut ChaCha8Rng, audit: &mut Audit) -> Report {
    let mut failures = 0;
    for _ in 0..IDENTITY_BLOCK_TABLES {
        let base = small_table(rng);
        let t = with_identity_block(&base, "D");
        let s = full_scenario(&base);
        let mut r = s.as_reference();
        r.effects.extend(t.measurement_effects("D").unwrap());
        let d = decide_rnc(&t, &s, &r).unwrap();
        audit.record(&d, &t, &s, &r);
        let ok = d.verdict.certificate().is_some_and(|cert| {
            let mut used = BTreeSet::new();
            let point_masses = cert.mu.values().all(|m| {
                let live: Vec<&String> = m.iter().filter(|(_, w)| **w > int(0)).map(|(l, _)| l).collect();
                live.len() == 1 && used.insert(live[0].clone())
            });
            point_masses && used.len() == t.preparations().len()
        });
        if !ok {
            failures += 1;
        }
    }
    report(
        failures == 0,
        format!("{IDENTITY_BLOCK_TABLES} augmented tables, {failures} without one ontic state per preparation"),
    )
}

fn criterion_6(rng: &mut ChaCha8Rng, audit: &mut Audit) -> Report {
    let mut disagreements = 0;
    let mut yes = 0;
    let mut transposed_mismatch = 0;
    for i in 0..CROSS_CHECK_SCENARIOS {
        // every third instance is a parity-family table so both verdicts occur
        let (t, s) = if i % 3 == 0 {
            let t = parity_family_table(rng);
            let s = full_scenario(&t);
            (t, s)
        } else {
            let t = small_table(rng);
            let s = random_scenario(rng, &t, true);
            (t, s)
        };
        let check = cross_check_equivalence(&t, &s).unwrap();
        if !check.agree {
            disagreements += 1;
        }
        yes += usize::from(check.operational);
        let r = s.as_reference();
        let d = decide_rnc(&t, &s, &r).unwrap();
        audit.record(&d, &t, &s, &r);
        let other = decide_transposed(&t, &s, &r, &DecisionConfig::default()).unwrap();
        if other.noncontextual != d.verdict.is_noncontextual() {
            transposed_mismatch += 1;
        }
    }
    report(
        disagreements == 0 && transposed_mismatch == 0 && yes > 0 && yes < CROSS_CHECK_SCENARIOS,
        format!(
            "{CROSS_CHECK_SCENARIOS} outcome-complete scenarios ({yes} noncontextual), {disagreements} disagreements, {transposed_mismatch} transposed-route mismatches"
        ),
    )
}

fn criterion_7(rng: &mut ChaCha8Rng) -> Report {
    let mut mismatches = 0;
    let mut equal = 0;
    for i in 0..DENSITY_PAIRS {
        let t = small_table(rng);
        let s = random_scenario(rng, &t, false);
        let qm = diagonal_model(&t, &s).unwrap();
        let side = if i % 2 == 0 { Side::Preparation } else { Side::Effect };
        let related = rng.random_bool(0.5);
        let (d1, d2) = random_density_pair(rng, &t, &s, side, related);
        let projected = projection_indist_check(&qm, &t, &s, &d1, &d2).unwrap();
        let operational = are_indistinguishable(&t, &d1, &d2, &s.as_reference()).unwrap();
        if projected != operational {
            mismatches += 1;
        }
        equal += usize::from(operational);
    }
    report(
        mismatches == 0 && equal > 0 && equal < DENSITY_PAIRS,
        format!(
            "{DENSITY_PAIRS} pairs ({equal} indistinguishable, {} distinguishable), {mismatches} mismatches",
            DENSITY_PAIRS - equal
        ),
    )
}

fn criterion_8(audit: &Audit) -> Report {
    report(
        audit.failures.is_empty() && audit.models > 0 && audit.farkas > 0,
        format!(
            "{} models and {} Farkas certificates re-checked, {} rejected{}",
            audit.models,
            audit.farkas,
            audit.failures.len(),
            audit.failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

fn run_graph(dir: &Path, cache: Option<&Path>) -> (Vec<u8>, Vec<u8>, serde_json::Value) {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nclab"));
    cmd.arg("graph")
        .arg("--table")
        .arg(data.join("toy_bit.table.json"))
        .arg("--scenario")
        .arg(data.join("toy_bit.scenario.json"))
        .arg("--enumerate")
        .arg(data.join("toy_bit.powerset_policy.json"))
        .arg("--dot")
        .arg(dir.join("g.dot"))
        .arg("--json")
        .arg(dir.join("g.json"))
        .env_remove("NCLAB_CACHE");
    match cache {
        Some(c) => cmd.arg("--cache-dir").arg(c),
        None => cmd.arg("--no-cache"),
    };
    let out = cmd.output().expect("nclab runs");
    assert!(out.status.success(), "graph command failed: {}", String::from_utf8_lossy(&out.stdout));
    (
        std::fs::read(dir.join("g.dot")).unwrap(),
        std::fs::read(dir.join("g.json")).unwrap(),
        serde_json::from_slice(&out.stdout).unwrap(),
    )
}

fn criterion_9() -> Report {
    let tmp = tempfile::tempdir().unwrap();
    let dirs: Vec<_> = (0..3).map(|i| tmp.path().join(format!("run{i}"))).collect();
    for d in &dirs {
        std::fs::create_dir_all(d).unwrap();
    }
    let cache = tmp.path().join("cache");
    let start = Instant::now();
    let first = run_graph(&dirs[0], None);
    let elapsed = start.elapsed();
    let second = run_graph(&dirs[1], Some(&cache));
    let third = run_graph(&dirs[2], Some(&cache));
    let identical = first.0 == second.0 && first.0 == third.0 && first.1 == second.1 && first.1 == third.1;
    let references = first.2["references"].as_u64().unwrap_or(u64::MAX);
    let nodes = first.2["nodes"].as_u64().unwrap_or(u64::MAX);
    let monotone = first.2["monotone"].as_bool() == Some(true);
    report(
        identical && references <= 16 && nodes <= 10 && monotone && elapsed < GRAPH_LIMIT,
        format!("{references} references, {nodes} classes, byte-identical across 3 runs={identical}, {elapsed:?}"),
    )
}

fn main() {
    // `cargo test -- --list` and filters: this target has a single entry
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut audit = Audit::default();
    let results = vec![
        ("1 toy-bit noncontextual", criterion_1(&mut audit)),
        ("2 parity 17/20 infeasible", criterion_2(&mut audit)),
        ("3 unfaithful never noncontextual", criterion_3(&mut rng, &mut audit)),
        ("4 inclusion monotonicity", criterion_4(&mut rng, &mut audit)),
        ("5 perfect distinguishability", criterion_5(&mut rng, &mut audit)),
        ("6 quantum fragment cross-check", criterion_6(&mut rng, &mut audit)),
        ("7 projection equivalence", criterion_7(&mut rng)),
        ("8 certificate integrity", criterion_8(&audit)),
        ("9 graph determinism", criterion_9()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        println!("{} criterion {name}: {}", if r.pass { "PASS" } else { "FAIL" }, r.detail);
        failed += usize::from(!r.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
