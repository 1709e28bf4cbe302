use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kadets_core::extend2d::extend_partition;
use kadets_core::fixtures;
use kadets_core::noneuclid::hyperbolic_inradius;
use kadets_core::verify::{gen_instance, kadets_sum, verify_instance};
use kadets_core::{relative_inradius, HyperbolicRegion, InstanceKind, SphericalConvexSet};

fn inradius(c: &mut Criterion) {
    let mut g = c.benchmark_group("relative_inradius");
    for d in [2usize, 3, 5] {
        let inst = gen_instance(InstanceKind::Voronoi, 3, 6, d).unwrap();
        let cell = inst.cells.cells()[0].clone();
        g.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, _| {
            b.iter(|| relative_inradius(&inst.body, black_box(&cell)).unwrap())
        });
    }
    g.finish();
}

fn kadets(c: &mut Criterion) {
    let inst = gen_instance(InstanceKind::Affine, 11, 8, 3).unwrap();
    c.bench_function("kadets_sum/affine_k8_d3", |b| {
        b.iter(|| kadets_sum(&inst.body, black_box(&inst.cells)).unwrap())
    });
}

fn extend(c: &mut Criterion) {
    let (b, cells) = fixtures::pinwheel();
    c.bench_function("extend_partition/pinwheel", |bch| {
        bch.iter(|| extend_partition(&b, black_box(&cells)).unwrap())
    });
    let inst = gen_instance(InstanceKind::Extended2d, 4, 6, 2).unwrap();
    c.bench_function("verify_instance/extended2d_k6", |bch| {
        bch.iter(|| verify_instance(black_box(&inst), 2_000).unwrap())
    });
}

fn noneuclid(c: &mut Criterion) {
    let tri =
        SphericalConvexSet::triangle([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
    c.bench_function("spherical_inradius/octant", |b| {
        b.iter(|| kadets_core::spherical_inradius(black_box(&tri)).unwrap())
    });
    let ideal = HyperbolicRegion::ideal_triangle([0.0, 2.0, 4.0]).unwrap();
    c.bench_function("hyperbolic_inradius/ideal_triangle", |b| {
        b.iter(|| hyperbolic_inradius(black_box(&ideal)).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = inradius, kadets, extend, noneuclid
}
criterion_main!(benches);
