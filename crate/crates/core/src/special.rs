//! Special functions: modified Bessel functions of the second kind of
//! integer order and Hermite polynomials.
//!
//! `K_0` and `K_1` come from the ascending series for `z <= 2` and from
//! Steed's continued fraction (Temme's CF2) above; higher orders follow by
//! upward recurrence, which is stable for `K_v`.

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Crossover between the ascending series and the continued fraction.
const SERIES_LIMIT: f64 = 2.0;

const CF_MAX_ITER: usize = 10_000;

/// Value of `K_v(z)` together with an underflow marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselK {
    pub value: f64,
    /// Set when `K_v(z)` is below the smallest normal `f64`; `value` is then 0.
    pub underflow: bool,
}

/// `K_v(z)` for integer order `v >= 0` and `z > 0`.
///
/// Returns 0 for arguments where the result underflows; use
/// [`bessel_k_checked`] to observe that condition.
pub fn bessel_k(order: u32, z: f64) -> Result<f64> {
    bessel_k_checked(order, z).map(|k| k.value)
}

pub fn bessel_k_checked(order: u32, z: f64) -> Result<BesselK> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::param("z", format!("K_v(z) needs finite z > 0, got {z}")));
    }
    let scaled = bessel_k_scaled(order, z);
    let value = scaled * (-z).exp();
    if value < f64::MIN_POSITIVE && scaled.is_finite() {
        Ok(BesselK {
            value: 0.0,
            underflow: true,
        })
    } else {
        Ok(BesselK {
            value,
            underflow: false,
        })
    }
}

/// Exponentially scaled `e^z K_v(z)`. No domain check: `z` must be positive.
pub fn bessel_k_scaled(order: u32, z: f64) -> f64 {
    let (k0, k1) = k01_scaled(z);
    match order {
        0 => k0,
        1 => k1,
        _ => {
            let (mut km, mut k) = (k0, k1);
            for v in 1..order {
                let kp = km + 2.0 * f64::from(v) / z * k;
                km = k;
                k = kp;
            }
            k
        }
    }
}

/// `(e^z K_0(z), e^z K_1(z))`.
pub fn k01_scaled(z: f64) -> (f64, f64) {
    if z <= SERIES_LIMIT {
        let (k0, k1) = k01_series(z);
        let e = z.exp();
        (k0 * e, k1 * e)
    } else {
        k01_continued_fraction(z)
    }
}

fn k01_series(z: f64) -> (f64, f64) {
    let t = 0.25 * z * z;
    let log_half = (0.5 * z).ln();

    // I0 and the harmonic-weighted series for K0.
    let mut term0 = 1.0; // t^k / (k!)^2
    let mut i0 = 1.0;
    let mut harmonic_sum = 0.0;
    // I1 / (z/2) and the digamma-weighted series for K1.
    let mut term1 = 1.0; // t^k / (k! (k+1)!)
    let mut i1_reduced = 1.0;
    let mut psi_sum = -2.0 * EULER_GAMMA + 1.0; // psi(1) + psi(2)
    let mut harmonic = 0.0; // H_k

    for k in 1..200 {
        let kf = k as f64;
        harmonic += 1.0 / kf;
        term0 *= t / (kf * kf);
        term1 *= t / (kf * (kf + 1.0));
        i0 += term0;
        harmonic_sum += term0 * harmonic;
        i1_reduced += term1;
        // psi(k+1) + psi(k+2) = 2 H_k + 1/(k+1) - 2 gamma
        psi_sum += term1 * (2.0 * harmonic + 1.0 / (kf + 1.0) - 2.0 * EULER_GAMMA);
        if term0 < 1e-18 * i0 && term1 < 1e-18 * i1_reduced {
            break;
        }
    }

    let k0 = -(log_half + EULER_GAMMA) * i0 + harmonic_sum;
    let i1 = 0.5 * z * i1_reduced;
    let k1 = 1.0 / z + log_half * i1 - 0.25 * z * psi_sum;
    (k0, k1)
}

/// Steed's method for CF2 at order zero; returns the scaled pair.
fn k01_continued_fraction(z: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + z);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..CF_MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < f64::EPSILON {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * z)).sqrt() / s;
    let k1 = k0 * (z + 0.5 - h) / z;
    (k0, k1)
}

/// Physicists' Hermite polynomial `H_k(x)`, by the three-term recurrence.
pub fn hermite(k: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for n in 1..k {
        let next = 2.0 * x * cur - 2.0 * f64::from(n) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `i^k H_k(i y)`, which is a real polynomial in `y`.
///
/// Satisfies `G_{k+1} = -2y G_k + 2k G_{k-1}` with `G_0 = 1`, `G_1 = -2y`.
pub fn hermite_imaginary(k: u32, y: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = -2.0 * y;
    for n in 1..k {
        let next = -2.0 * y * cur + 2.0 * f64::from(n) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `n!` as `f64`.
pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * f64::from(k))
}

/// Binomial coefficient as `f64`.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}
