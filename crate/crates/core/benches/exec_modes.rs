use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hornpair::chc::parse_program;
use hornpair::model::check_model_with;
use hornpair::oracle::{bounded_lm_with, OracleBudget};
use hornpair::pairing::{pair_goal, PairingConfig};
use hornpair::smtlib::parse_model;
use hornpair::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn model_check(c: &mut Criterion) {
    let p = parse_program(include_str!("../corpus/sum_square_p4.chc")).unwrap();
    let sigma = parse_model(include_str!("../corpus/sum_square_p4.model")).unwrap();
    let mut g = c.benchmark_group("check_model");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| b.iter(|| check_model_with(e, &p, &sigma).unwrap()));
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let p = parse_program(include_str!("../corpus/ackermann.chc")).unwrap();
    let mut g = c.benchmark_group("bounded_lm");
    g.sample_size(10);
    // a small box and a wide one, where each round has real work per clause
    for (size, budget) in [("box4", OracleBudget::new(5, 0, 4).unwrap()), ("box12", OracleBudget::new(8, 0, 12).unwrap())] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(size, name), &exec, |b, &e| b.iter(|| bounded_lm_with(e, &p, budget).unwrap()));
        }
    }
    g.finish();
}

fn pairing(c: &mut Criterion) {
    let p = parse_program(include_str!("../corpus/ackermann.chc")).unwrap();
    let goal = p.goals().next().unwrap().id;
    let mut g = c.benchmark_group("pair_goal");
    g.sample_size(20);
    for (name, exec) in MODES {
        let cfg = PairingConfig { exec, ..PairingConfig::default() };
        g.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| b.iter(|| pair_goal(&p, goal, cfg).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, model_check, oracle, pairing);
criterion_main!(benches);
