//! Moments of `M`, the normal-ordered signal moments behind the mean
//! correlation, and the two nonclassicality indicators `D(φ)` and `r`.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lon::{DetectionContext, Detector, LocalOscillator};
use crate::special::{binomial, factorial, hermite_imaginary};
use crate::state::SignalState;
use crate::statistics::gaussian_joint_params;

pub use crate::special::hermite;

/// Default verdict tolerance, relative to the natural scale of each test.
pub const DEFAULT_VERDICT_TOL: f64 = 1e-9;

/// Below this `|⟨â⟩|` the large-amplitude moment formulas are flagged.
pub const LARGE_MEAN_WARNING: f64 = 10.0;

/// `⟨:(Δn̂)²:⟩`, `⟨:Δx̂_φ Δn̂:⟩` and `⟨:(Δx̂_φ)²:⟩` at quadrature angle `phase`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalOrderedMoments {
    pub var_n: f64,
    pub cross: f64,
    pub var_x: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mean_m: f64,
    pub var_m: f64,
    pub r: f64,
    pub d_phi: Option<f64>,
    pub nonclassical_by_r: bool,
    pub anomalous_by_d: bool,
}

/// `𝔼(M^k | γ) = (-σ₁σ₂/2)^k H_k(iμ₁/√2σ₁) H_k(iμ₂/√2σ₂)`, evaluated with
/// the real polynomials `i^k H_k(iy)`.
pub fn conditional_moment(k: u32, gamma: Complex64, ctx: &DetectionContext) -> Result<f64> {
    if k == 0 {
        return Err(Error::param("k", "moment order must be >= 1"));
    }
    let [mu1, mu2] = ctx.mu(gamma);
    let s1 = ctx.sigma(Detector::One);
    let s2 = ctx.sigma(Detector::Two);
    let y1 = mu1 / (SQRT_2 * s1);
    let y2 = mu2 / (SQRT_2 * s2);
    // (-1)^k i^{-2k} = 1, so the prefactor is (σ₁σ₂/2)^k.
    let prefactor = (0.5 * s1 * s2).powi(k as i32);
    Ok(prefactor * hermite_imaginary(k, y1) * hermite_imaginary(k, y2))
}

/// Complex polynomial in `γ`, `γ*`; key `(i, j)` is `γ^i γ*^j`.
#[derive(Debug, Clone, Default, PartialEq)]
struct GammaPoly(BTreeMap<(u32, u32), Complex64>);

impl GammaPoly {
    fn constant(c: f64) -> Self {
        let mut p = GammaPoly::default();
        p.0.insert((0, 0), Complex64::new(c, 0.0));
        p
    }

    /// `μ = h* γ + h γ*`.
    fn mu(h: Complex64) -> Self {
        let mut p = GammaPoly::default();
        p.0.insert((1, 0), h.conj());
        p.0.insert((0, 1), h);
        p
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, &c) in &other.0 {
            *out.0.entry(k).or_default() += c;
        }
        out
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = GammaPoly::default();
        for (&(i, j), &c) in &self.0 {
            for (&(k, l), &d) in &other.0 {
                *out.0.entry((i + k, j + l)).or_default() += c * d;
            }
        }
        out
    }

    /// `∫ P_n(γ) p(γ) d²γ` for the Fock P function
    /// `Σ_q C(n,q)/q! ∂^q ∂*^q δ(γ)`. Integration by parts leaves
    /// `Σ_q C(n,q) q! [γ^q γ*^q]`.
    fn fock_expectation(&self, n: u32) -> f64 {
        (0..=n)
            .map(|q| {
                let c = self.0.get(&(q, q)).copied().unwrap_or_default();
                binomial(n, q) * factorial(q) * c.re
            })
            .sum()
    }
}

fn fock_mean_var(n: u32, ctx: &DetectionContext) -> (f64, f64) {
    let mu1 = GammaPoly::mu(ctx.h(Detector::One));
    let mu2 = GammaPoly::mu(ctx.h(Detector::Two));
    let first = mu1.mul(&mu2);
    let second = mu1
        .mul(&mu1)
        .add(&GammaPoly::constant(ctx.sigma_sq(Detector::One)))
        .mul(&mu2.mul(&mu2).add(&GammaPoly::constant(ctx.sigma_sq(Detector::Two))));
    let mean = first.fock_expectation(n);
    let m2 = second.fock_expectation(n);
    (mean, m2 - mean * mean)
}

/// Unconditional `(𝔼(M), var(M))`.
///
/// The context is re-derived for the state's `⟨â⟩`.
pub fn mean_var_m(state: &SignalState, device: &DetectionContext) -> Result<(f64, f64)> {
    let ctx = device.with_mean_signal(state.mean_amplitude())?;
    match *state {
        SignalState::Coherent { .. } => Ok((0.0, ctx.sigma_sq(Detector::One) * ctx.sigma_sq(Detector::Two))),
        SignalState::Gaussian { .. } => {
            let p = gaussian_joint_params(state, &ctx)?;
            Ok((p.mean(), p.variance()))
        }
        SignalState::Fock { n } => Ok(fock_mean_var(n, &ctx)),
    }
}

/// Large-amplitude normal-ordered moments of a Gaussian state at quadrature
/// angle `phi`.
pub fn gaussian_normal_ordered_moments(state: &SignalState, phi: f64) -> Result<NormalOrderedMoments> {
    let SignalState::Gaussian {
        v_x,
        v_p,
        phi_xi,
        mean,
    } = *state
    else {
        return Err(Error::UnsupportedState(format!(
            "normal-ordered moment formulas need a Gaussian state, got {}",
            state.kind()
        )));
    };
    let amp = mean.norm();
    if amp < LARGE_MEAN_WARNING {
        log::warn!("|<a>| = {amp:.3} below {LARGE_MEAN_WARNING}; large-amplitude moment formulas are approximate");
    }
    let arg = mean.arg();
    let half_diff = 0.5 * (v_p - v_x);
    let half_excess = 0.5 * (v_x + v_p - 2.0);
    Ok(NormalOrderedMoments {
        var_n: amp * amp * (half_diff * (2.0 * arg - phi_xi).cos() + half_excess),
        cross: amp * (half_diff * (phi - arg + phi_xi).cos() + half_excess * (phi + arg).cos()),
        var_x: half_diff * (2.0 * phi + phi_xi).cos() + half_excess,
        phase: phi,
    })
}

/// Mean correlation of the cross-correlation scheme decomposed by powers of
/// the LO amplitude.
pub fn mean_decomposition_cc(
    m: &NormalOrderedMoments,
    t: Complex64,
    r: Complex64,
    lo: &LocalOscillator,
    eta1: f64,
    eta2: f64,
) -> f64 {
    let (t2, r2) = (t.norm_sqr(), r.norm_sqr());
    let (ta, ra) = (t.norm(), r.norm());
    let a = lo.magnitude;
    eta1 * eta2 * (t2 * r2 * m.var_n + a * ta * ra * (r2 - t2) * m.cross - a * a * t2 * r2 * m.var_x)
}

/// `D(φ) = ⟨:(Δn̂)²:⟩⟨:(Δx̂_φ)²:⟩ - ⟨:Δx̂_φ Δn̂:⟩²`; negative values are
/// anomalous correlations.
pub fn cauchy_schwarz_d(m: &NormalOrderedMoments) -> f64 {
    m.var_n * m.var_x - m.cross * m.cross
}

/// Scale against which `D` is compared.
pub fn d_scale(m: &NormalOrderedMoments) -> f64 {
    (m.var_n * m.var_x).abs().max(m.cross * m.cross).max(f64::MIN_POSITIVE)
}

pub fn anomalous_by_d(m: &NormalOrderedMoments, rel_tol: f64) -> bool {
    cauchy_schwarz_d(m) < -rel_tol * d_scale(m)
}

/// `r = var(M)/(σ₁²σ₂²) - 1` with `σ_j` from a coherent reference whose
/// amplitude equals the probed state's `⟨â⟩`.
pub fn nonclassicality_r(var_m: f64, reference: &DetectionContext) -> f64 {
    var_m / (reference.sigma_sq(Detector::One) * reference.sigma_sq(Detector::Two)) - 1.0
}

/// Full report at the device's LO setting.
///
/// `D` is evaluated for Gaussian states at the device's optical phase.
pub fn moment_report(state: &SignalState, device: &DetectionContext, rel_tol: f64) -> Result<MomentReport> {
    let reference = device.with_mean_signal(state.mean_amplitude())?;
    let (mean_m, var_m) = mean_var_m(state, &reference)?;
    let r = nonclassicality_r(var_m, &reference);
    let moments = match state {
        SignalState::Gaussian { .. } => Some(gaussian_normal_ordered_moments(state, reference.optical_phase())?),
        _ => None,
    };
    let d_phi = moments.as_ref().map(cauchy_schwarz_d);
    Ok(MomentReport {
        mean_m,
        var_m,
        r,
        d_phi,
        nonclassical_by_r: r < -rel_tol,
        anomalous_by_d: moments.as_ref().is_some_and(|m| anomalous_by_d(m, rel_tol)),
    })
}
