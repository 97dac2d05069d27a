use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use silab_core::estimator::Direction;
use silab_core::exec::Execution;
use silab_core::lower_bound::gram_matrix;
use silab_core::noise_field::{DiscretizedField, GridSpec};
use silab_core::risk::{pointwise_risk, Procedure};
use silab_core::selector::SelectorConfig;
use silab_core::signals::{hypothesis_family, make_hoelder, single_index_field, HoelderSpec};
use silab_core::ProductKernel;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn adaptive_replicates(c: &mut Criterion) {
    let link = make_hoelder(&HoelderSpec::cusp(1.0, 4.0)).unwrap();
    let field = single_index_field(&link, Direction::from_degrees(30.0));
    let grid = GridSpec::with_n(128).unwrap();
    let disc = DiscretizedField::new(&field, grid);
    let eps = 2f64.powi(-6);
    let sel = SelectorConfig::new(ProductKernel::default(), eps)
        .with_directions(16)
        .with_scale(0.006)
        .with_min_bandwidth(Some(grid.resolution_floor()));
    let proc = Procedure::Adaptive(sel);
    let mut group = c.benchmark_group("adaptive_risk_16_replicates");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| pointwise_risk(&proc, &disc, 0.0, eps, [0.0, 0.0], 2.0, 16, 3, exec).unwrap())
        });
    }
    group.finish();
}

fn lower_bound_gram(c: &mut Criterion) {
    let fam = hypothesis_family(1.0, 1.0, 2f64.powi(-6), 0.5, &[0.0, 0.0], 2).unwrap();
    let mut group = c.benchmark_group("gram_matrix_512");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| gram_matrix(&fam, 512, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, adaptive_replicates, lower_bound_gram);
criterion_main!(benches);
