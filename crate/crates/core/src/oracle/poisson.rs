//! Poisson variates for means up to `1e8` and beyond.
//!
//! Small means use multiplication of uniforms; larger ones use Hörmann's
//! transformed rejection with squeeze (PTRS). No normal approximation is
//! involved at any mean.

use rand::Rng;
use std::f64::consts::PI;

const SMALL_MEAN: f64 = 10.0;

/// `ln k!` for a non-negative integer `k`: direct product below 10,
/// Stirling series for `Γ(k + 1)` above.
fn ln_factorial(k: f64) -> f64 {
    if k < 10.0 {
        let mut acc = 1.0;
        let mut j = 2.0;
        while j <= k {
            acc *= j;
            j += 1.0;
        }
        return acc.ln();
    }
    let x = k + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

/// Draws one Poisson variate with mean `lambda` (non-negative, finite).
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    debug_assert!(lambda >= 0.0 && lambda.is_finite());
    if lambda <= 0.0 {
        return 0;
    }
    if lambda < SMALL_MEAN {
        let limit = (-lambda).exp();
        let mut k = 0;
        let mut prod: f64 = rng.random();
        while prod > limit {
            k += 1;
            prod *= rng.random::<f64>();
        }
        return k;
    }

    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        if lhs <= -lambda + k * loglam - ln_factorial(k) {
            return k as u64;
        }
    }
}
