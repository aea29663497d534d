//! Probability density `w(M)` of the product `M = c₁c₂` of the two
//! photocurrent fluctuations.
//!
//! Coherent and Gaussian signals have closed forms in terms of `K_0`; Fock
//! signals use the terminating series over the `𝒲_{a,b}` functions with the
//! `𝒢`-derivative tables of [`fock`].

pub mod fock;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lon::{DetectionContext, Detector};
use crate::quadrature::{integrate_to_infinity, QuadOptions, Quadrature};
use crate::special::{bessel_k_scaled, binomial, factorial};
use crate::state::{SignalState, StateKind};

pub use fock::{fock_g_derivatives, pdf_fock, DerivativeTable, FockKernel, GExpansion};

/// Tolerance on `⟨â⟩` agreement between a state and its context.
const MEAN_MATCH_TOL: f64 = 1e-9;

/// Density value; the origin is an integrable logarithmic singularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityValue {
    Finite(f64),
    IntegrableSingularity,
}

impl DensityValue {
    /// Plain number, `+∞` at the singularity.
    pub fn value(self) -> f64 {
        match self {
            DensityValue::Finite(v) => v,
            DensityValue::IntegrableSingularity => f64::INFINITY,
        }
    }

    pub fn is_singular(self) -> bool {
        matches!(self, DensityValue::IntegrableSingularity)
    }
}

/// `𝒲_{a,b}(z) = (1/π) (1/(2a)!) C(2a,b) z^{2a-b} |z|^{b-a} K_{b-a}(|z|)`.
pub fn weight_w(a: u32, b: u32, z: f64) -> Result<f64> {
    if b > 2 * a {
        return Err(Error::param("b", format!("need b <= 2a, got a = {a}, b = {b}")));
    }
    if z == 0.0 || !z.is_finite() {
        return Err(Error::param("z", format!("need finite z != 0, got {z}")));
    }
    Ok(weight_w_unchecked(a, b, z))
}

pub(crate) fn weight_w_unchecked(a: u32, b: u32, z: f64) -> f64 {
    let x = z.abs();
    let order = b.abs_diff(a);
    // z^{2a-b} |z|^{b-a} = sign(z)^{2a-b} |z|^a
    let sign = if z < 0.0 && (2 * a - b) % 2 == 1 { -1.0 } else { 1.0 };
    let prefactor = binomial(2 * a, b) / (factorial(2 * a) * PI);
    sign * prefactor * x.powi(a as i32) * bessel_k_scaled(order, x) * (-x).exp()
}

/// `𝒢_{a,b}(γ, γ*) = (μ₁/σ₁)^a (μ₂/σ₂)^b exp(-μ₁²/2σ₁² - μ₂²/2σ₂²)`.
pub fn g_function(a: u32, b: u32, gamma: Complex64, ctx: &DetectionContext) -> f64 {
    let [mu1, mu2] = ctx.mu(gamma);
    let x1 = mu1 / ctx.sigma(Detector::One);
    let x2 = mu2 / ctx.sigma(Detector::Two);
    x1.powi(a as i32) * x2.powi(b as i32) * (-0.5 * (x1 * x1 + x2 * x2)).exp()
}

/// `w(M) = K_0(|M|/σ₁σ₂) / (π σ₁σ₂)` for a coherent signal.
pub fn pdf_coherent(m: f64, ctx: &DetectionContext) -> DensityValue {
    product_of_normals(m, ctx.sigma_product())
}

fn product_of_normals(m: f64, scale: f64) -> DensityValue {
    if m == 0.0 {
        return DensityValue::IntegrableSingularity;
    }
    let x = m.abs() / scale;
    DensityValue::Finite(bessel_k_scaled(0, x) * (-x).exp() / (PI * scale))
}

/// Standard deviations and correlation coefficient of the zero-mean
/// bivariate normal `(c₁, c₂)` produced by a Gaussian signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianJointParams {
    pub s1: f64,
    pub s2: f64,
    pub corr: f64,
}

impl GaussianJointParams {
    pub fn new(s1: f64, s2: f64, corr: f64) -> Result<Self> {
        if !(s1 > 0.0 && s2 > 0.0) || !s1.is_finite() || !s2.is_finite() {
            return Err(Error::Validity(format!(
                "joint standard deviations must be positive, got {s1}, {s2}"
            )));
        }
        if !(corr.abs() < 1.0) {
            return Err(Error::Validity(format!(
                "correlation coefficient |C| = {} is not below 1",
                corr.abs()
            )));
        }
        Ok(GaussianJointParams { s1, s2, corr })
    }

    /// `𝔼(M) = C s₁ s₂`.
    pub fn mean(&self) -> f64 {
        self.corr * self.s1 * self.s2
    }

    /// `var(M) = (1 + C²) s₁² s₂²`.
    pub fn variance(&self) -> f64 {
        let s = self.s1 * self.s2;
        (1.0 + self.corr * self.corr) * s * s
    }

    pub fn swapped(&self) -> Self {
        GaussianJointParams {
            s1: self.s2,
            s2: self.s1,
            corr: self.corr,
        }
    }
}

/// The `J_{u,ℓ}` matrix of the Gaussian reduction.
pub fn gaussian_j_matrix(state: &SignalState, ctx: &DetectionContext) -> Result<[[f64; 2]; 2]> {
    let SignalState::Gaussian {
        v_x,
        v_p,
        phi_xi,
        mean,
    } = *state
    else {
        return Err(Error::UnsupportedState(format!(
            "J matrix needs a Gaussian state, got {}",
            state.kind()
        )));
    };
    check_mean(mean, ctx)?;
    let h = [ctx.h(Detector::One), ctx.h(Detector::Two)];
    let sigma = [ctx.sigma(Detector::One), ctx.sigma(Detector::Two)];
    let rot = Complex64::from_polar(1.0, -phi_xi);
    let mut j = [[0.0; 2]; 2];
    for u in 0..2 {
        for l in 0..2 {
            let diag = if u == l { sigma[u] * sigma[l] } else { 0.0 };
            let sign = if (u + l) % 2 == 0 { 1.0 } else { -1.0 };
            let brace = (v_p + v_x - 2.0) * (h[u] * h[l].conj()).re
                + (v_p - v_x) * (h[u] * h[l] * rot).re;
            j[u][l] = diag + 0.5 * sign * brace;
        }
    }
    Ok(j)
}

/// `s_j = √J_jj`, `C = -J₁₂/√(J₁₁J₂₂)`.
pub fn gaussian_joint_params(state: &SignalState, ctx: &DetectionContext) -> Result<GaussianJointParams> {
    let j = gaussian_j_matrix(state, ctx)?;
    if !(j[0][0] > 0.0 && j[1][1] > 0.0) {
        return Err(Error::Validity(format!(
            "Gaussian reduction has nonpositive variance (J11 = {}, J22 = {})",
            j[0][0], j[1][1]
        )));
    }
    let corr = -j[0][1] / (j[0][0] * j[1][1]).sqrt();
    GaussianJointParams::new(j[0][0].sqrt(), j[1][1].sqrt(), corr)
}

/// Closed-form density of the product of two correlated zero-mean normals.
pub fn pdf_gaussian(m: f64, params: &GaussianJointParams) -> DensityValue {
    if m == 0.0 {
        return DensityValue::IntegrableSingularity;
    }
    let GaussianJointParams { s1, s2, corr } = *params;
    let one_minus = 1.0 - corr * corr;
    let z = m / (s1 * s2 * one_minus);
    let x = z.abs();
    let norm = PI * s1 * s2 * one_minus.sqrt();
    DensityValue::Finite((corr * z - x).exp() * bessel_k_scaled(0, x) / norm)
}

fn check_mean(mean: Complex64, ctx: &DetectionContext) -> Result<()> {
    let diff = (mean - ctx.mean_signal()).norm();
    if diff > MEAN_MATCH_TOL * (1.0 + mean.norm()) {
        return Err(Error::param(
            "mean_signal",
            format!(
                "context built for <a> = {} but state has <a> = {mean}",
                ctx.mean_signal()
            ),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone)]
enum Model {
    Coherent { scale: f64 },
    Gaussian(GaussianJointParams),
    Fock(FockKernel),
}

/// Evaluable density `w(M)` for a state measured by a given device.
#[derive(Debug, Clone)]
pub struct CorrelationPdf {
    kind: StateKind,
    context: DetectionContext,
    model: Model,
}

impl CorrelationPdf {
    /// Builds the density; the context is re-derived for the state's `⟨â⟩`.
    pub fn new(state: &SignalState, device: &DetectionContext) -> Result<Self> {
        let context = device.with_mean_signal(state.mean_amplitude())?;
        let model = match *state {
            SignalState::Coherent { .. } => Model::Coherent {
                scale: context.sigma_product(),
            },
            SignalState::Gaussian { .. } => Model::Gaussian(gaussian_joint_params(state, &context)?),
            SignalState::Fock { n } => Model::Fock(FockKernel::new(n, &context)?),
        };
        Ok(CorrelationPdf {
            kind: state.kind(),
            context,
            model,
        })
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn context(&self) -> &DetectionContext {
        &self.context
    }

    pub fn gaussian_params(&self) -> Option<&GaussianJointParams> {
        match &self.model {
            Model::Gaussian(p) => Some(p),
            _ => None,
        }
    }

    /// Natural width of the distribution (`σ₁σ₂` or `s₁s₂`).
    pub fn scale(&self) -> f64 {
        match &self.model {
            Model::Coherent { scale } => *scale,
            Model::Gaussian(p) => p.s1 * p.s2,
            Model::Fock(k) => k.sigma_product(),
        }
    }

    pub fn density(&self, m: f64) -> DensityValue {
        match &self.model {
            Model::Coherent { scale } => product_of_normals(m, *scale),
            Model::Gaussian(p) => pdf_gaussian(m, p),
            Model::Fock(k) => k.density(m),
        }
    }

    pub fn value(&self, m: f64) -> f64 {
        self.density(m).value()
    }

    /// Density on a grid, evaluated in parallel.
    pub fn evaluate(&self, grid: &[f64]) -> Vec<f64> {
        grid.par_iter().map(|&m| self.value(m)).collect()
    }

    /// `∫ M^k w(M) dM`, splitting the real line at the singular origin.
    pub fn moment(&self, k: u32, opts: QuadOptions) -> Result<Quadrature> {
        let scale = self.scale();
        let f_pos = |m: f64| {
            if m == 0.0 {
                return 0.0;
            }
            m.powi(k as i32) * self.value(m)
        };
        let right = integrate_to_infinity(f_pos, 0.0, scale, opts)?;
        let left = integrate_to_infinity(|m: f64| f_pos(-m), 0.0, scale, opts)?;
        Ok(Quadrature {
            value: right.value + left.value,
            error: right.error + left.error,
            intervals: right.intervals + left.intervals,
        })
    }

    pub fn normalization(&self, opts: QuadOptions) -> Result<Quadrature> {
        self.moment(0, opts)
    }

    /// Mean and variance by quadrature.
    pub fn numeric_mean_variance(&self, opts: QuadOptions) -> Result<(f64, f64)> {
        let norm = self.moment(0, opts)?.value;
        let m1 = self.moment(1, opts)?.value / norm;
        let m2 = self.moment(2, opts)?.value / norm;
        Ok((m1, m2 - m1 * m1))
    }
}
