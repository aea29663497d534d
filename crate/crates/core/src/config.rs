//! JSON description of a device and a signal state.
//!
//! ```json
//! {
//!   "lon": { "preset": "cross", "T2": 0.14, "R2": 0.86 },
//!   "det": { "eta1": 1.0, "eta2": 1.0, "nu1": 0.0, "nu2": 0.0 },
//!   "lo": { "mag2": 1e6, "phase": 0.0 },
//!   "signal": { "kind": "gaussian", "v_x": 4.0, "v_p": 0.5, "phi_xi": 0.0, "mean": [1000.0, 0.0] }
//! }
//! ```
//!
//! Complex numbers are `[re, im]` pairs. Errors carry the path of the
//! offending field.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lon::{ContextOptions, DetectionContext, DetectorConfig, LocalOscillator, LonMatrix, DEFAULT_INTENSITY_FLOOR};
use crate::state::{SignalState, DEFAULT_FOCK_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LonPreset {
    /// `[[T, R, 0], [R, T, 0]]` with `T = |T|`, `R = i|R|`; needs `T2`, `R2`.
    Cross,
    /// Two splitters; needs complex `t1`, `r1`, `t2`, `r2`.
    Intensity,
    /// Explicit 2x3 matrix `q`.
    Custom,
}

/// Flat so that parse errors keep their field path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LonConfig {
    pub preset: LonPreset,
    #[serde(rename = "T2", default, skip_serializing_if = "Option::is_none")]
    pub t2_ratio: Option<f64>,
    #[serde(rename = "R2", default, skip_serializing_if = "Option::is_none")]
    pub r2_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2: Option<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2: Option<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<[[Complex64; 3]; 2]>,
}

impl LonConfig {
    pub fn cross(t2: f64, r2: f64) -> Self {
        LonConfig {
            preset: LonPreset::Cross,
            t2_ratio: Some(t2),
            r2_ratio: Some(r2),
            t1: None,
            r1: None,
            t2: None,
            r2: None,
            q: None,
        }
    }

    pub fn matrix(&self) -> Result<LonMatrix> {
        fn need<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
            v.ok_or_else(|| Error::Config(format!("lon.{key}: required by this preset")))
        }
        match self.preset {
            LonPreset::Cross => {
                LonMatrix::cross_correlation_from_ratios(need(self.t2_ratio, "T2")?, need(self.r2_ratio, "R2")?)
            }
            LonPreset::Intensity => LonMatrix::intensity_correlation(
                need(self.t1, "t1")?,
                need(self.r1, "r1")?,
                need(self.t2, "t2")?,
                need(self.r2, "r2")?,
            ),
            LonPreset::Custom => LonMatrix::new(need(self.q, "q")?),
        }
        .map_err(|e| match e {
            Error::Config(_) => e,
            other => at("lon", other),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetConfig {
    #[serde(default = "one")]
    pub eta1: f64,
    #[serde(default = "one")]
    pub eta2: f64,
    #[serde(default)]
    pub nu1: f64,
    #[serde(default)]
    pub nu2: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for DetConfig {
    fn default() -> Self {
        DetConfig {
            eta1: 1.0,
            eta2: 1.0,
            nu1: 0.0,
            nu2: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoConfig {
    /// `|α_L|²`.
    pub mag2: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    /// Needs `alpha`.
    Coherent,
    /// Needs `v_x`, `v_p`; optional `phi_xi`, `mean`.
    Gaussian,
    /// Needs `n_bar`.
    Thermal,
    /// Needs `n`; optional `n_max`.
    Fock,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    pub kind: Option<SignalKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_xi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_bar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
}

impl SignalConfig {
    pub fn to_state(&self) -> Result<SignalState> {
        fn need<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
            v.ok_or_else(|| Error::Config(format!("signal.{key}: required for this kind")))
        }
        let state = match need(self.kind, "kind")? {
            SignalKind::Coherent => SignalState::coherent(need(self.alpha, "alpha")?),
            SignalKind::Gaussian => SignalState::gaussian(
                need(self.v_x, "v_x")?,
                need(self.v_p, "v_p")?,
                self.phi_xi.unwrap_or(0.0),
                self.mean.unwrap_or_default(),
            ),
            SignalKind::Thermal => {
                let n_bar = need(self.n_bar, "n_bar")?;
                if !(n_bar >= 0.0) {
                    return Err(Error::Config(format!("signal.n_bar: must be >= 0, got {n_bar}")));
                }
                SignalState::thermal(n_bar)
            }
            SignalKind::Fock => SignalState::fock_bounded(need(self.n, "n")?, self.n_max.unwrap_or(DEFAULT_FOCK_MAX)),
        };
        state.map_err(|e| at("signal", e))
    }

    pub fn from_state(state: &SignalState) -> Self {
        match *state {
            SignalState::Coherent { alpha } => SignalConfig {
                kind: Some(SignalKind::Coherent),
                alpha: Some(alpha),
                ..Default::default()
            },
            SignalState::Gaussian { v_x, v_p, phi_xi, mean } => SignalConfig {
                kind: Some(SignalKind::Gaussian),
                v_x: Some(v_x),
                v_p: Some(v_p),
                phi_xi: Some(phi_xi),
                mean: Some(mean),
                ..Default::default()
            },
            SignalState::Fock { n } => SignalConfig {
                kind: Some(SignalKind::Fock),
                n: Some(n),
                ..Default::default()
            },
        }
    }
}

/// Device, LO and signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lon: LonConfig,
    #[serde(default)]
    pub det: DetConfig,
    pub lo: LoConfig,
    pub signal: SignalConfig,
    /// Explicit coherent-probe amplitude for the `r` reference; defaults to
    /// the signal's `⟨â⟩`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity_floor: Option<f64>,
}

fn at(path: &str, e: Error) -> Error {
    Error::Config(format!("{path}: {e}"))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("{path}: {}", e.into_inner()))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn lon_matrix(&self) -> Result<LonMatrix> {
        self.lon.matrix()
    }

    pub fn detectors(&self) -> Result<[DetectorConfig; 2]> {
        let d1 = DetectorConfig::new(self.det.eta1, self.det.nu1).map_err(|e| at("det.eta1/nu1", e))?;
        let d2 = DetectorConfig::new(self.det.eta2, self.det.nu2).map_err(|e| at("det.eta2/nu2", e))?;
        Ok([d1, d2])
    }

    pub fn local_oscillator(&self) -> Result<LocalOscillator> {
        LocalOscillator::from_intensity(self.lo.mag2, self.lo.phase).map_err(|e| at("lo", e))
    }

    pub fn state(&self) -> Result<SignalState> {
        self.signal.to_state()
    }

    /// Context built around the signal's `⟨â⟩`.
    pub fn context(&self) -> Result<DetectionContext> {
        let state = self.state()?;
        self.context_with_mean(state.mean_amplitude())
    }

    pub fn context_with_mean(&self, mean: Complex64) -> Result<DetectionContext> {
        let [d1, d2] = self.detectors()?;
        let options = ContextOptions {
            intensity_floor: self.intensity_floor.unwrap_or(DEFAULT_INTENSITY_FLOOR),
        };
        DetectionContext::with_options(self.lon_matrix()?, d1, d2, self.local_oscillator()?, mean, options)
    }

    /// Coherent-probe context used as the classical reference for `r`.
    pub fn reference_context(&self) -> Result<DetectionContext> {
        let mean = match self.reference {
            Some(a) => a,
            None => self.state()?.mean_amplitude(),
        };
        self.context_with_mean(mean)
    }
}
