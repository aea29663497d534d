use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest Fock number accepted by default.
pub const DEFAULT_FOCK_MAX: u32 = 20;

/// Single-mode signal states with a closed-form correlation density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SignalState {
    Coherent {
        alpha: Complex64,
    },
    /// Gaussian state with maximal/minimal quadrature variances `v_x >= v_p`
    /// (coherent level 1), orientation `phi_xi` and mean amplitude `mean`.
    Gaussian {
        v_x: f64,
        v_p: f64,
        phi_xi: f64,
        mean: Complex64,
    },
    Fock {
        n: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Coherent,
    Gaussian,
    Fock,
}

impl std::fmt::Display for StateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StateKind::Coherent => "coherent",
            StateKind::Gaussian => "gaussian",
            StateKind::Fock => "fock",
        })
    }
}

impl SignalState {
    pub fn coherent(alpha: Complex64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::param("alpha", "must be finite"));
        }
        Ok(SignalState::Coherent { alpha })
    }

    pub fn gaussian(v_x: f64, v_p: f64, phi_xi: f64, mean: Complex64) -> Result<Self> {
        if !(v_p > 0.0) || !v_x.is_finite() {
            return Err(Error::param("v_p", format!("need finite 0 < v_p, got {v_p}")));
        }
        if v_x < v_p {
            return Err(Error::param("v_x", format!("need v_x >= v_p, got {v_x} < {v_p}")));
        }
        if v_x * v_p < 1.0 - 1e-12 {
            return Err(Error::param(
                "v_x*v_p",
                format!("uncertainty bound v_x v_p >= 1 violated ({})", v_x * v_p),
            ));
        }
        if !phi_xi.is_finite() || !mean.is_finite() {
            return Err(Error::param("gaussian", "phase and mean must be finite"));
        }
        Ok(SignalState::Gaussian {
            v_x,
            v_p,
            phi_xi,
            mean,
        })
    }

    /// Thermal state with mean photon number `n_bar`.
    pub fn thermal(n_bar: f64) -> Result<Self> {
        let v = 1.0 + 2.0 * n_bar;
        SignalState::gaussian(v, v, 0.0, Complex64::new(0.0, 0.0))
    }

    pub fn fock(n: u32) -> Result<Self> {
        Self::fock_bounded(n, DEFAULT_FOCK_MAX)
    }

    pub fn fock_bounded(n: u32, n_max: u32) -> Result<Self> {
        if n > n_max {
            return Err(Error::param("n", format!("Fock number {n} above limit {n_max}")));
        }
        Ok(SignalState::Fock { n })
    }

    pub fn kind(&self) -> StateKind {
        match self {
            SignalState::Coherent { .. } => StateKind::Coherent,
            SignalState::Gaussian { .. } => StateKind::Gaussian,
            SignalState::Fock { .. } => StateKind::Fock,
        }
    }

    /// `⟨â⟩`; zero for Fock states.
    pub fn mean_amplitude(&self) -> Complex64 {
        match *self {
            SignalState::Coherent { alpha } => alpha,
            SignalState::Gaussian { mean, .. } => mean,
            SignalState::Fock { .. } => Complex64::new(0.0, 0.0),
        }
    }

    /// Whether the P function is a probability density (point mass included).
    pub fn is_classical(&self) -> bool {
        match *self {
            SignalState::Coherent { .. } => true,
            SignalState::Gaussian { v_p, .. } => v_p >= 1.0,
            SignalState::Fock { n } => n == 0,
        }
    }
}
