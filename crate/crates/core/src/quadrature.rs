//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Integrable endpoint singularities (the logarithmic one of `K_0` at the
//! origin) are handled by repeated bisection of the worst interval; infinite
//! ranges are mapped onto `[0, 1)` with `x = a + L t / (1 - t)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            ..Default::default()
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    pub intervals: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error)
}

/// `∫_a^b f(x) dx` on a finite interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::param("interval", "finite bounds required"));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }

    let (value, error) = kronrod15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total = value;
    let mut total_err = error;

    loop {
        if !total.is_finite() {
            return Err(Error::NonConvergence {
                estimate: total,
                error: total_err,
                detail: "non-finite integrand".into(),
            });
        }
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= target {
            return Ok(Quadrature {
                value: total,
                error: total_err,
                intervals: heap.len(),
            });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::NonConvergence {
                estimate: total,
                error: total_err,
                detail: format!("interval budget {} exhausted", opts.max_intervals),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // Cannot split further; accept what we have if it is roundoff-level.
            heap.push(worst);
            let relative = total_err / total.abs().max(f64::MIN_POSITIVE);
            if relative < 1e3 * f64::EPSILON {
                return Ok(Quadrature {
                    value: total,
                    error: total_err,
                    intervals: heap.len(),
                });
            }
            return Err(Error::NonConvergence {
                estimate: total,
                error: total_err,
                detail: "interval too small to bisect".into(),
            });
        }
        let (lv, le) = kronrod15(&f, worst.a, mid);
        let (rv, re) = kronrod15(&f, mid, worst.b);
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
        // Re-sum periodically so the running totals do not drift.
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
}

/// `∫_a^∞ f(x) dx`, mapping `x = a + scale · t / (1 - t)`.
///
/// `scale` should be of the order of the decay length of `f`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    scale: f64,
    opts: QuadOptions,
) -> Result<Quadrature> {
    if !(scale > 0.0) {
        return Err(Error::param("scale", "must be positive"));
    }
    let g = |t: f64| {
        let one_minus = 1.0 - t;
        let x = a + scale * t / one_minus;
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v * scale / (one_minus * one_minus)
        }
    };
    integrate(g, 0.0, 1.0, opts)
}

/// `∫_{-∞}^{∞} f(x) dx`, split at `split` (typically a singular point).
pub fn integrate_real_line<F: Fn(f64) -> f64>(
    f: F,
    split: f64,
    scale: f64,
    opts: QuadOptions,
) -> Result<Quadrature> {
    let right = integrate_to_infinity(&f, split, scale, opts)?;
    let left = integrate_to_infinity(|x| f(2.0 * split - x), split, scale, opts)?;
    Ok(Quadrature {
        value: left.value + right.value,
        error: left.error + right.error,
        intervals: left.intervals + right.intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| x.powi(5) - 3.0 * x, -1.0, 2.0, QuadOptions::default()).unwrap();
        assert_relative_eq!(q.value, 64.0 / 6.0 - 1.0 / 6.0 - 4.5, max_relative = 1e-14);
    }

    #[test]
    fn log_endpoint_singularity() {
        // ∫_0^1 ln x dx = -1
        let q = integrate(|x: f64| x.ln(), 0.0, 1.0, QuadOptions::rel(1e-12)).unwrap();
        assert_relative_eq!(q.value, -1.0, max_relative = 1e-11);
    }

    #[test]
    fn semi_infinite_exponential() {
        let q = integrate_to_infinity(|x: f64| (-x).exp(), 0.0, 1.0, QuadOptions::rel(1e-12)).unwrap();
        assert_relative_eq!(q.value, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn real_line_gaussian() {
        let q = integrate_real_line(|x: f64| (-x * x / 2.0).exp(), 0.3, 1.0, QuadOptions::rel(1e-12))
            .unwrap();
        assert_relative_eq!(q.value, (2.0 * PI).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let opts = QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-15,
            max_intervals: 3,
        };
        let err = integrate(|x: f64| x.abs().sqrt().recip(), 0.0, 1.0, opts).unwrap_err();
        match err {
            Error::NonConvergence { estimate, error, .. } => {
                assert!(estimate > 1.0 && error > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
