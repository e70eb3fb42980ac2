//! Fixtures shared by the benchmarks under `benches/`.

use std::sync::Arc;

use paracone::mapping::testbed;
use paracone::{sampling, DomainBox, Modulus, NormKind, ParaSpec, Point, PolyCone, VectorMapping};

/// A testbed mapping with its claimed spec.
pub fn family(index: usize) -> (VectorMapping, ParaSpec) {
    let f = testbed().swap_remove(index);
    let spec = f.claimed().expect("testbed mappings carry a claim").clone();
    (f, spec)
}

/// `-x^2` on `(-1, 1)` with the orthant order and the given constant.
pub fn neg_square(c: f64) -> (VectorMapping, ParaSpec) {
    let f = VectorMapping::from_fn("neg-square", DomainBox::symmetric(1, 1.0).expect("box"), 1, |x| vec![-x[0] * x[0]])
        .expect("mapping");
    let cone = Arc::new(PolyCone::orthant(1, NormKind::Sup).expect("orthant"));
    let spec = ParaSpec::new(Modulus::square(1.0), c, c, Point::filled(1, 1.0), cone).expect("spec");
    (f, spec)
}

/// Seeded standard normal points of `R^dim`.
pub fn points(dim: usize, n: usize, seed: u64) -> Vec<Point> {
    let mut rng = sampling::rng(seed);
    (0..n)
        .map(|_| Point::new((0..dim).map(|_| sampling::standard_normal(&mut rng)).collect()).expect("finite"))
        .collect()
}
