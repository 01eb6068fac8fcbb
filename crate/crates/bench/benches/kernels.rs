//! Hot-path benchmarks: the phase-estimation circuit itself, dictionary
//! assembly, the weight-recovery solver, and the transport-distance scorer.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use dosqpe_core::recon::solve;
use dosqpe_core::{
    build_dictionary, build_fermi_hubbard, run, wasserstein1, DosQpeConfig, EvolutionMode,
    EvolutionSpec, Hamiltonian, Probe, QubitLayout, ReconstructionConfig, RescaleParams,
    TopMargin, TransportGeometry, TrotterOrder,
};

fn hubbard_config(mode: EvolutionMode) -> DosQpeConfig {
    let hamiltonian = Hamiltonian::Pauli(build_fermi_hubbard(2, 1.0, 4.0, false).unwrap());
    DosQpeConfig {
        layout: QubitLayout::new(5, 4, true).unwrap(),
        probe: Probe::MaximallyMixed,
        evolution: EvolutionSpec {
            hamiltonian,
            mode,
            time_scale: std::f64::consts::TAU,
        },
        rescale: Some(RescaleParams {
            lambda_min: -2.0,
            lambda_max: 8.0,
            top_margin: TopMargin::Fixed(0.0625),
            shift_delta: 0.0,
        }),
        shots: 0,
        seed: 1,
    }
}

fn bench_simulation(c: &mut Criterion) {
    let mut group = c.benchmark_group("sim");
    let exact = hubbard_config(EvolutionMode::Exact);
    group.bench_function("run_hubbard2_m5_exact", |b| {
        b.iter(|| run(black_box(&exact)).unwrap())
    });
    let trotter = hubbard_config(EvolutionMode::Trotter {
        order: TrotterOrder::Fourth,
        steps: 2,
    });
    group.bench_function("run_hubbard2_m5_trotter4", |b| {
        b.iter(|| run(black_box(&trotter)).unwrap())
    });
    group.finish();
}

fn bench_reconstruction(c: &mut Criterion) {
    let mut group = c.benchmark_group("recon");
    group.bench_function("build_dictionary_64x256", |b| {
        b.iter(|| build_dictionary(black_box(6), black_box(4)).unwrap())
    });

    // Synthetic target from a known sparse weight vector, so the solve is
    // the same problem every iteration.
    let dictionary = build_dictionary(6, 4).unwrap();
    let mut weights = vec![0.0; dictionary.grid_len()];
    weights[25] = 3.0;
    weights[97] = 2.0;
    weights[181] = 6.0;
    weights[230] = 5.0;
    let target = dictionary.apply(&weights);
    let mut config = ReconstructionConfig::new(16);
    config.grid_factor = 4;
    config.lambda = Some(1e-3);
    group.bench_function("solve_64x256", |b| {
        b.iter(|| solve(black_box(&dictionary), black_box(&target), &config).unwrap())
    });
    group.finish();
}

fn bench_scoring(c: &mut Criterion) {
    let n = 1000;
    let left: Vec<(f64, f64)> = (0..n).map(|i| (i as f64 / n as f64, 1.0)).collect();
    let right: Vec<(f64, f64)> = (0..n)
        .map(|i| ((i as f64 + 0.37) / n as f64, 1.0))
        .collect();
    c.bench_function("wasserstein_1000_atoms", |b| {
        b.iter(|| {
            wasserstein1(
                black_box(&left),
                black_box(&right),
                TransportGeometry::Line,
            )
            .unwrap()
        })
    });
}

fn bench_spectrum(c: &mut Criterion) {
    let dense = Hamiltonian::Pauli(build_fermi_hubbard(3, 1.0, 4.0, false).unwrap())
        .to_dense()
        .unwrap();
    c.bench_function("exact_spectrum_dim64", |b| {
        b.iter(|| {
            black_box(&dense)
                .exact_spectrum(dosqpe_core::ham::DEGENERACY_TOL)
                .unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_simulation,
    bench_reconstruction,
    bench_scoring,
    bench_spectrum
);
criterion_main!(benches);
