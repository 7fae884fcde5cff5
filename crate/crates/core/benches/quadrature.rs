use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qdim_core::em::{rotate_em_field, EmMeans};
use qdim_core::kspace::{coherent_field, PhotonProfile, ScalarProfile};
use qdim_core::polarization::rotation_z;
use qdim_core::scalar::{FieldMeans, SpacetimePoint};
use qdim_core::{KGrid, PhysicalConstants, Vec3, C64};

fn gaussian_scalar(grid: Arc<KGrid>) -> qdim_core::kspace::ScalarField {
    let p = ScalarProfile::from_fn(grid, |k| C64::new(0.8, 0.1 * k.x) * (-k.norm_squared() / 2.0).exp()).unwrap();
    coherent_field(&p, 16, PhysicalConstants::natural()).unwrap()
}

fn gaussian_photon(grid: Arc<KGrid>) -> qdim_core::kspace::EmStateField {
    let p = PhotonProfile::from_fn(grid, |k| {
        let s = (-k.norm_squared() / 2.0).exp();
        [C64::new(0.7 * s, 0.0), C64::new(0.0, 0.4 * s)]
    })
    .unwrap();
    coherent_field(&p, 8, PhysicalConstants::natural()).unwrap()
}

/// Runs `f` on the global pool ("pool") and on a one-thread pool ("serial").
fn both<F: Fn() + Sync>(c: &mut Criterion, group: &str, size: usize, f: F) {
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    g.bench_with_input(BenchmarkId::new("pool", size), &size, |b, _| b.iter(&f));
    g.bench_with_input(BenchmarkId::new("serial", size), &size, |b, _| b.iter(|| serial.install(&f)));
    g.finish();
}

fn energy_density(c: &mut Criterion) {
    for (r, a) in [(8, 14), (16, 26)] {
        let field = gaussian_scalar(Arc::new(KGrid::spherical(r, a, 1.0).unwrap()));
        let means = FieldMeans::new(&field);
        let x = SpacetimePoint::new(0.3, Vec3::new(0.1, -0.2, 0.4));
        both(c, "energy_density", r * a, || {
            std::hint::black_box(means.energy_density(&x));
        });
    }
}

fn two_point(c: &mut Criterion) {
    let field = gaussian_scalar(Arc::new(KGrid::spherical(16, 26, 1.0).unwrap()));
    let means = FieldMeans::new(&field);
    let x = SpacetimePoint::new(0.3, Vec3::new(0.1, -0.2, 0.4));
    let y = SpacetimePoint::new(-0.1, Vec3::new(0.5, 0.0, 0.2));
    both(c, "two_point", field.len(), || {
        std::hint::black_box(means.two_point(&x, &y));
    });
}

fn em_rotation(c: &mut Criterion) {
    let field = gaussian_photon(Arc::new(KGrid::spherical(8, 26, 1.0).unwrap()));
    let r = rotation_z(0.4);
    both(c, "rotate_em_field", field.len(), || {
        std::hint::black_box(rotate_em_field(&field, &r).unwrap());
    });
}

fn em_means(c: &mut Criterion) {
    let field = gaussian_photon(Arc::new(KGrid::spherical(24, 26, 1.0).unwrap()));
    both(c, "em_means", field.len(), || {
        std::hint::black_box(EmMeans::new(&field).unwrap());
    });
}

criterion_group!(benches, energy_density, two_point, em_rotation, em_means);
criterion_main!(benches);
