use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lon::DetectionContext;
use crate::quadrature::{integrate, QuadOptions, Quadrature};
use crate::state::SignalState;
use crate::statistics::{gaussian_joint_params, FockKernel, GaussianJointParams};

pub const DEFAULT_PRODUCT_TOL: f64 = 1e-8;

/// Largest Fock number for which the joint density is offered.
const FOCK_JOINT_MAX: u32 = 5;

/// Evaluable joint density of the two count fluctuations.
pub trait JointDensity: Sync {
    fn density(&self, c1: f64, c2: f64) -> f64;

    /// Typical widths of `c₁` and `c₂`.
    fn scales(&self) -> [f64; 2];
}

/// Zero-mean bivariate normal with standard deviations `s1`, `s2` and
/// correlation `corr`.
impl JointDensity for GaussianJointParams {
    fn density(&self, c1: f64, c2: f64) -> f64 {
        let (x1, x2) = (c1 / self.s1, c2 / self.s2);
        let one_minus = 1.0 - self.corr * self.corr;
        let q = (x1 * x1 - 2.0 * self.corr * x1 * x2 + x2 * x2) / (2.0 * one_minus);
        (-q).exp() / (2.0 * PI * self.s1 * self.s2 * one_minus.sqrt())
    }

    fn scales(&self) -> [f64; 2] {
        [self.s1, self.s2]
    }
}

impl JointDensity for FockKernel {
    fn density(&self, c1: f64, c2: f64) -> f64 {
        self.joint_density(c1, c2)
    }

    fn scales(&self) -> [f64; 2] {
        self.sigma()
    }
}

#[derive(Debug, Clone)]
pub enum JointPdf {
    Normal(GaussianJointParams),
    Fock(FockKernel),
}

impl JointDensity for JointPdf {
    fn density(&self, c1: f64, c2: f64) -> f64 {
        match self {
            JointPdf::Normal(p) => p.density(c1, c2),
            JointPdf::Fock(k) => k.joint_density(c1, c2),
        }
    }

    fn scales(&self) -> [f64; 2] {
        match self {
            JointPdf::Normal(p) => p.scales(),
            JointPdf::Fock(k) => JointDensity::scales(k),
        }
    }
}

/// Joint density of `(c₁, c₂)` for the state on the device.
pub fn joint_pdf_numeric(state: &SignalState, device: &DetectionContext) -> Result<JointPdf> {
    let ctx = device.with_mean_signal(state.mean_amplitude())?;
    match *state {
        SignalState::Coherent { .. } => Ok(JointPdf::Normal(GaussianJointParams::new(
            ctx.sigma(crate::lon::Detector::One),
            ctx.sigma(crate::lon::Detector::Two),
            0.0,
        )?)),
        SignalState::Gaussian { .. } => Ok(JointPdf::Normal(gaussian_joint_params(state, &ctx)?)),
        SignalState::Fock { n } if n <= FOCK_JOINT_MAX => Ok(JointPdf::Fock(FockKernel::with_limit(n, FOCK_JOINT_MAX, &ctx)?)),
        SignalState::Fock { n } => Err(Error::UnsupportedState(format!(
            "joint density offered for Fock n <= {FOCK_JOINT_MAX}, got {n}"
        ))),
    }
}

/// `w(M) = ∫ dy/|y| p(y, M/y)`.
///
/// With `y = ±e^t` the measure becomes `dt`; the `t`-range grows until the
/// integrand at both ends is negligible against the result.
pub fn pdf_via_product_integral<J: JointDensity + ?Sized>(joint: &J, m: f64, tol: f64) -> Result<Quadrature> {
    if m == 0.0 || !m.is_finite() {
        return Err(Error::param("M", "product integral needs finite M != 0"));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let [s1, s2] = joint.scales();
    let g = |t: f64| {
        let y = t.exp();
        let x = m / y;
        joint.density(y, x) + joint.density(-y, -x)
    };

    const REACH: f64 = 12.0;
    let center = 0.5 * (m.abs() * s1 / s2).ln();
    let mut lo = (m.abs() / (REACH * s2)).ln().min(center - 2.0);
    let mut hi = (REACH * s1).ln().max(center + 2.0);
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 0.05 * tol,
        max_intervals: 20_000,
    };
    for _ in 0..60 {
        let q = integrate(g, lo, hi, opts)?;
        let edge = tol * 1e-3 * q.value.abs();
        let (glo, ghi) = (g(lo).abs(), g(hi).abs());
        if glo <= edge && ghi <= edge {
            return Ok(q);
        }
        if glo > edge {
            lo -= 1.0;
        }
        if ghi > edge {
            hi += 1.0;
        }
    }
    Err(Error::NonConvergence {
        estimate: integrate(g, lo, hi, opts)?.value,
        error: f64::NAN,
        detail: format!("product-integral range did not close around M = {m:e}"),
    })
}
