use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nclab::cone::dual_cone_rays;
use nclab::decision::table_fragment;
use nclab::instances::{parity_scenario, parity_table, toy_bit_scenario, toy_bit_table};
use nclab::{decide_rnc, Scenario};
use nclab_bench::qubit_workload;

fn fixed_instances(c: &mut Criterion) {
    let cases = [
        ("toy_bit", toy_bit_table(), toy_bit_scenario()),
        ("parity85", parity_table(), parity_scenario()),
    ];
    let mut group = c.benchmark_group("decide");
    for (name, t, s) in &cases {
        let r = s.as_reference();
        group.bench_function(*name, |b| b.iter(|| decide_rnc(t, s, &r).unwrap()));
    }
    group.finish();
}

fn qubit_sizes(c: &mut Criterion) {
    let mut group = c.benchmark_group("decide_qubit");
    group.sample_size(20);
    for preps in [4, 6, 8] {
        let (t, s): (_, Scenario) = qubit_workload(preps, 3, 11);
        let r = s.as_reference();
        group.bench_with_input(BenchmarkId::from_parameter(preps), &preps, |b, _| {
            b.iter(|| decide_rnc(&t, &s, &r).unwrap())
        });
    }
    group.finish();
}

fn dual_cone(c: &mut Criterion) {
    let mut group = c.benchmark_group("dual_cone_rays");
    for preps in [4, 6, 8] {
        let (t, s) = qubit_workload(preps, 3, 11);
        let fragment = table_fragment(&t, &s, &s.as_reference()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(preps), &fragment.generators, |b, g| {
            b.iter(|| dual_cone_rays(g))
        });
    }
    group.finish();
}

criterion_group!(benches, fixed_instances, qubit_sizes, dual_cone);
criterion_main!(benches);
