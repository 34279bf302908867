//! Parallel against sequential exploration on corpus programs.

use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use piccolo::explore::{default_bounds, reachable_finals_sra, ExploreOptions};
use piccolo::lang::{parse_program, LitmusSpec};
use piccolo::par::Mode;
use piccolo::sra::SraModel;

fn corpus(name: &str) -> LitmusSpec {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    parse_program(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn explore(c: &mut Criterion) {
    let mut g = c.benchmark_group("sra-explore");
    g.sample_size(10);
    for (file, unroll) in [("corr2.lit", 2), ("sb-fence.lit", 2), ("peterson.lit", 1)] {
        let spec = corpus(file);
        let model = SraModel::new(default_bounds(&spec, unroll));
        let mut modes = vec![Mode::Sequential];
        if Mode::parallel_available() {
            modes.push(Mode::Parallel);
        }
        for mode in modes {
            let opts = ExploreOptions { unroll, mode, ..ExploreOptions::default() };
            g.bench_with_input(BenchmarkId::new(format!("{mode:?}"), file), &opts, |b, opts| {
                b.iter(|| reachable_finals_sra(&spec, &model, opts))
            });
        }
    }
    g.finish();
}

criterion_group!(benches, explore);
criterion_main!(benches);
