//! Seeded sampling helpers shared by the checkers.
//!
//! Every stochastic routine takes an explicit `u64` seed and draws from a
//! ChaCha8 stream. Sub-streams for parallel or per-item work are derived from
//! `(seed, index)` so results never depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cone::NormKind;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for item `index` under a global `seed` (splitmix64
/// finalizer over the pair).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw from the open interval (lo, hi).
pub fn open_uniform(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    loop {
        let v = lo + (hi - lo) * rng.gen::<f64>();
        if v > lo && v < hi {
            return v;
        }
    }
}

pub fn exponential(rng: &mut SeededRng) -> f64 {
    let u: f64 = 1.0 - rng.gen::<f64>();
    -u.ln()
}

pub fn standard_normal(rng: &mut SeededRng) -> f64 {
    // Box-Muller; one value per call keeps the stream layout simple.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Uniformly distributed direction, rescaled to unit length in `norm`.
pub fn unit_direction(rng: &mut SeededRng, dim: usize, norm: NormKind) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
        let n = norm.apply(&v);
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Point of the open `norm`-ball of the given radius around `center`.
pub fn in_ball(rng: &mut SeededRng, center: &[f64], radius: f64, norm: NormKind) -> Vec<f64> {
    let d = center.len();
    let offset: Vec<f64> = match norm {
        NormKind::Sup => (0..d).map(|_| open_uniform(rng, -radius, radius)).collect(),
        NormKind::Two => {
            let dir = unit_direction(rng, d, NormKind::Two);
            let r = radius * rng.gen::<f64>().powf(1.0 / d as f64) * (1.0 - 1e-15);
            dir.into_iter().map(|x| x * r).collect()
        }
        NormKind::One => {
            let e: Vec<f64> = (0..=d).map(|_| exponential(rng)).collect();
            let total: f64 = e.iter().sum();
            (0..d)
                .map(|i| {
                    let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                    sign * radius * e[i] / total
                })
                .collect()
        }
    };
    center.iter().zip(offset).map(|(c, o)| c + o).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(7, 0);
        let b = derive_seed(7, 1);
        let c = derive_seed(8, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(7, 0));
    }

    #[test]
    fn ball_samples_stay_inside() {
        let mut r = rng(3);
        for norm in [NormKind::Sup, NormKind::One, NormKind::Two] {
            for _ in 0..500 {
                let p = in_ball(&mut r, &[0.5, -0.5, 0.0], 0.25, norm);
                let off: Vec<f64> = p.iter().zip([0.5, -0.5, 0.0]).map(|(a, b)| a - b).collect();
                assert!(norm.apply(&off) < 0.25);
            }
        }
    }

    #[test]
    fn unit_directions_have_unit_norm() {
        let mut r = rng(11);
        for norm in [NormKind::Sup, NormKind::One, NormKind::Two] {
            let v = unit_direction(&mut r, 4, norm);
            assert!((norm.apply(&v) - 1.0).abs() < 1e-12);
        }
    }
}
