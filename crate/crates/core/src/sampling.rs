//! Seeded sampling of parameter values and evaluation points.
//!
//! Every stream is `ChaCha20` keyed by the run seed, with a distinct stream
//! id per consumer so that results do not depend on evaluation order.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::freefield::DeformationParams;
use crate::numeric::{real, BigComplex, Precision};

pub const DEFAULT_SEED: u64 = 20_240_917;

/// Stream ids, kept apart so consumers never share random numbers.
pub mod stream {
    pub const PARAMS: u64 = 1;
    pub const EXCHANGE: u64 = 100;
    pub const THETA: u64 = 200;
    pub const LIMITS: u64 = 300;
}

pub fn rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn rational_in(rng: &mut ChaCha20Rng, lo: f64, hi: f64) -> BigRational {
    let d: i64 = rng.gen_range(11..=61);
    let lo_n = (lo * d as f64).ceil() as i64;
    let hi_n = (hi * d as f64).floor() as i64;
    let n = rng.gen_range(lo_n..=hi_n.max(lo_n));
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `count` exact samples with `q ∈ (0.3, 0.8)` and `p = t²`, `t ∈ (0.55, 0.95)`.
pub fn param_samples(seed: u64, count: usize, level: i64) -> Vec<DeformationParams> {
    let mut r = rng(seed, stream::PARAMS);
    (0..count)
        .map(|_| {
            let q = rational_in(&mut r, 0.3, 0.8);
            let t = rational_in(&mut r, 0.55, 0.95);
            DeformationParams::from_sqrt_p(q, t, level).expect("sample inside (0,1)")
        })
        .collect()
}

/// A point with `lo ≤ |x| ≤ hi`, uniform in radius and angle.
pub fn annulus_point(rng: &mut ChaCha20Rng, lo: f64, hi: f64, prec: Precision) -> BigComplex {
    let r: f64 = rng.gen_range(lo..=hi);
    let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    BigComplex::from_f64(0.0, th, prec).exp().scale(&real::from_f64(r, prec))
}
