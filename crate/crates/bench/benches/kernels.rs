use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use paracone::cone::Representation;
use paracone::derivative::{directional_derivative, frechet_test, gateaux_test, sample_directions, EstimatorOptions, FrechetOptions, GateauxOptions};
use paracone::paraconvex::{check_inequality, falsify, FalsifyOptions, Form, TripleSet};
use paracone::{NormKind, Point, PolyCone};
use paracone_bench::{family, neg_square, points};
use std::hint::black_box;

fn membership(c: &mut Criterion) {
    let mut g = c.benchmark_group("membership");
    for dim in [3, 4] {
        let cone = PolyCone::random_pointed(dim, 1).unwrap().0.completed().unwrap();
        let pts = points(dim, 256, 2);
        for (label, repr) in [("dual", Representation::Dual), ("generators", Representation::Generators)] {
            g.bench_with_input(BenchmarkId::new(label, dim), &pts, |b, pts| {
                b.iter(|| pts.iter().filter(|v| cone.contains_with(repr, v, 1e-9).unwrap()).count())
            });
        }
    }
    g.finish();
}

fn inequality(c: &mut Criterion) {
    let (f, spec) = family(1);
    let triples = TripleSet::uniform(f.domain(), 1000, 3);
    c.bench_function("check_inequality/quadratic/1000", |b| {
        b.iter(|| check_inequality(&f, &spec, Form::Lambda, black_box(&triples), 1e-9).unwrap())
    });
    let (f, spec) = neg_square(0.99);
    c.bench_function("falsify/neg-square/1000", |b| {
        b.iter(|| falsify(&f, &spec, Form::Lambda, FalsifyOptions::new(1000, 4).with_refine(true)).unwrap())
    });
}

fn derivatives(c: &mut Criterion) {
    let (f, spec) = family(4);
    let x0 = Point::new(vec![0.3]).unwrap();
    let h = Point::new(vec![1.0]).unwrap();
    c.bench_function("directional_derivative/example1", |b| {
        b.iter(|| directional_derivative(&f, &spec, black_box(&x0), &h, EstimatorOptions::default()).unwrap())
    });
    let dirs = sample_directions(1, 2, NormKind::Two, 5);
    c.bench_function("gateaux_test/example1", |b| {
        b.iter(|| gateaux_test(&f, &spec, &x0, &dirs, GateauxOptions::new(1e-6, 6)).unwrap())
    });
    let (f, spec) = family(1);
    let x0 = Point::new(vec![0.2, -0.1]).unwrap();
    let spec = spec.with_constants(1.0, 1.0).unwrap();
    let mut opts = FrechetOptions::new(7);
    opts.epsilons = vec![1e-2, 1e-3];
    c.bench_function("frechet_test/quadratic", |b| b.iter(|| frechet_test(&f, &spec, &x0, &opts).unwrap()));
}

criterion_group!(benches, membership, inequality, derivatives);
criterion_main!(benches);
