//! Seeded random instances for property sweeps.
//!
//! The seed comes from `VIPROPLAB_SEED` when set, so a failing sweep can be
//! replayed exactly.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exact::{rat, Rational};
use crate::pwcalc::PiecewiseLinearFn;

pub const SEED_ENV: &str = "VIPROPLAB_SEED";
pub const DEFAULT_SEED: u64 = 0x5eed_2019;

pub fn seed_from_env() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random rational `p/q` with `|p| <= max_num`, `1 <= q <= max_den`.
pub fn random_rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    rat(rng.gen_range(-max_num..=max_num), rng.gen_range(1..=max_den))
}

/// A random valid piecewise-linear function with up to `max_interior`
/// interior breakpoints drawn from `(0, 1)` with denominators up to 97.
pub fn random_pl<R: Rng>(rng: &mut R, max_interior: usize) -> PiecewiseLinearFn {
    let count = rng.gen_range(0..=max_interior);
    let mut interior: Vec<Rational> = (0..count)
        .map(|_| {
            let den = rng.gen_range(2..=97i64);
            rat(rng.gen_range(1..den), den)
        })
        .collect();
    interior.sort();
    interior.dedup();
    let mut breakpoints = vec![Rational::zero()];
    breakpoints.extend(interior);
    breakpoints.push(rat(1, 1));
    let n = breakpoints.len();
    let values = (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                Rational::zero()
            } else {
                random_rational(rng, 20, 12)
            }
        })
        .collect();
    PiecewiseLinearFn::new(breakpoints, values).expect("constructed valid")
}
