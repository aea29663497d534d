//! Linear optical network, detectors and local oscillator.
//!
//! A [`DetectionContext`] bundles the device with the mean signal amplitude
//! and caches the per-detector variance `σ_j²` and coupling `h_j` from which
//! every density and moment is computed.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on physical bounds (norms, eigenvalues).
const BOUND_SLACK: f64 = 1e-12;

/// Default lower bound on `η_j |α_j|²` for the high-intensity limit.
pub const DEFAULT_INTENSITY_FLOOR: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Detector {
    One,
    Two,
}

impl Detector {
    pub const BOTH: [Detector; 2] = [Detector::One, Detector::Two];

    pub fn index(self) -> usize {
        match self {
            Detector::One => 0,
            Detector::Two => 1,
        }
    }
}

/// The 2×3 input–output matrix of the network.
///
/// Rows are the detected outputs, columns the signal, reference and vacuum
/// inputs. Constant loss shows up only as a row-norm deficit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LonMatrix {
    q: [[Complex64; 3]; 2],
}

impl LonMatrix {
    /// Validates that `q q†` has eigenvalues in `[0, 1]`, i.e. that the rows
    /// extend to a unitary.
    pub fn new(q: [[Complex64; 3]; 2]) -> Result<Self> {
        if q.iter().flatten().any(|z| !z.is_finite()) {
            return Err(Error::InvalidNetwork("non-finite matrix entry".into()));
        }
        let lon = LonMatrix { q };
        for (j, row) in q.iter().enumerate() {
            let norm: f64 = row.iter().map(|z| z.norm_sqr()).sum();
            if norm > 1.0 + BOUND_SLACK {
                return Err(Error::InvalidNetwork(format!(
                    "row {} has squared norm {norm} > 1",
                    j + 1
                )));
            }
        }
        let [_, hi] = lon.gram_eigenvalues();
        if hi > 1.0 + BOUND_SLACK {
            return Err(Error::InvalidNetwork(format!(
                "rows do not extend to a unitary: Gram eigenvalue {hi} > 1"
            )));
        }
        Ok(lon)
    }

    /// Homodyne cross-correlation network `[[t, r, 0], [r, t, 0]]`.
    pub fn cross_correlation(t: Complex64, r: Complex64) -> Result<Self> {
        let norm = t.norm_sqr() + r.norm_sqr();
        if norm > 1.0 + BOUND_SLACK {
            return Err(Error::InvalidNetwork(format!(
                "|t|^2 + |r|^2 = {norm} exceeds 1"
            )));
        }
        let phase = (t.conj() * r + r.conj() * t).re;
        if (norm - 1.0).abs() <= BOUND_SLACK && phase.abs() > 1e-10 {
            return Err(Error::InvalidNetwork(format!(
                "lossless splitter needs t*r + r*t = 0, got {phase}"
            )));
        }
        let zero = Complex64::new(0.0, 0.0);
        LonMatrix::new([[t, r, zero], [r, t, zero]])
    }

    /// Cross-correlation network from intensity ratios `|T|²`, `|R|²` with the
    /// phase convention `T = |T|`, `R = i|R|`.
    pub fn cross_correlation_from_ratios(t2: f64, r2: f64) -> Result<Self> {
        if !(t2 >= 0.0 && r2 >= 0.0) {
            return Err(Error::InvalidNetwork(format!(
                "intensity ratios must be nonnegative, got {t2}, {r2}"
            )));
        }
        LonMatrix::cross_correlation(
            Complex64::new(t2.sqrt(), 0.0),
            Complex64::new(0.0, r2.sqrt()),
        )
    }

    /// Homodyne intensity-correlation network built from two splitters.
    pub fn intensity_correlation(
        t1: Complex64,
        r1: Complex64,
        t2: Complex64,
        r2: Complex64,
    ) -> Result<Self> {
        for (k, (t, r)) in [(t1, r1), (t2, r2)].into_iter().enumerate() {
            let norm = t.norm_sqr() + r.norm_sqr();
            if norm > 1.0 + BOUND_SLACK {
                return Err(Error::InvalidNetwork(format!(
                    "splitter {}: |t|^2 + |r|^2 = {norm} exceeds 1",
                    k + 1
                )));
            }
        }
        LonMatrix::new([[t2 * t1, t2 * r1, r2], [r2 * t1, r2 * r1, t2]])
    }

    pub fn entries(&self) -> &[[Complex64; 3]; 2] {
        &self.q
    }

    pub fn entry(&self, detector: Detector, column: usize) -> Complex64 {
        self.q[detector.index()][column]
    }

    /// `q q†`.
    pub fn gram(&self) -> [[Complex64; 2]; 2] {
        let mut g = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, gi) in g.iter_mut().enumerate() {
            for (j, gij) in gi.iter_mut().enumerate() {
                *gij = (0..3).map(|u| self.q[i][u] * self.q[j][u].conj()).sum();
            }
        }
        g
    }

    /// Eigenvalues of the Gram matrix, ascending.
    pub fn gram_eigenvalues(&self) -> [f64; 2] {
        let g = self.gram();
        let (a, d) = (g[0][0].re, g[1][1].re);
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + g[0][1].norm_sqr()).sqrt();
        [mid - rad, mid + rad]
    }

    /// Coherent amplitude at output `j` for signal `alpha` and LO `lo`:
    /// `q_{j1} α + q_{j2} α_L`.
    pub fn output_amplitude(&self, detector: Detector, alpha: Complex64, lo: &LocalOscillator) -> Complex64 {
        let row = &self.q[detector.index()];
        row[0] * alpha + row[1] * lo.amplitude()
    }
}

/// Quantum efficiency and dark-count rate of one photodetector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub eta: f64,
    pub nu: f64,
}

impl DetectorConfig {
    pub fn new(eta: f64, nu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::param("eta", format!("must lie in [0, 1], got {eta}")));
        }
        if !(nu >= 0.0) || !nu.is_finite() {
            return Err(Error::param("nu", format!("must be finite and >= 0, got {nu}")));
        }
        Ok(DetectorConfig { eta, nu })
    }

    pub fn ideal() -> Self {
        DetectorConfig { eta: 1.0, nu: 0.0 }
    }
}

/// Coherent reference beam `α_L = |α_L| e^{iφ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalOscillator {
    pub magnitude: f64,
    pub phase: f64,
}

impl LocalOscillator {
    pub fn new(magnitude: f64, phase: f64) -> Result<Self> {
        if !(magnitude >= 0.0) || !magnitude.is_finite() {
            return Err(Error::param(
                "lo.magnitude",
                format!("must be finite and >= 0, got {magnitude}"),
            ));
        }
        if !phase.is_finite() {
            return Err(Error::param("lo.phase", "must be finite"));
        }
        Ok(LocalOscillator { magnitude, phase })
    }

    /// From the intensity `|α_L|²`.
    pub fn from_intensity(intensity: f64, phase: f64) -> Result<Self> {
        if !(intensity >= 0.0) {
            return Err(Error::param("lo.mag2", format!("must be >= 0, got {intensity}")));
        }
        LocalOscillator::new(intensity.sqrt(), phase)
    }

    pub fn amplitude(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.phase)
    }

    pub fn intensity(&self) -> f64 {
        self.magnitude * self.magnitude
    }

    /// Phase folded into `[0, 2π)`, for display.
    pub fn reported_phase(&self) -> f64 {
        self.phase.rem_euclid(TAU)
    }

    pub fn with_phase(&self, phase: f64) -> Self {
        LocalOscillator { phase, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContextOptions {
    pub intensity_floor: f64,
}

impl Default for ContextOptions {
    fn default() -> Self {
        ContextOptions {
            intensity_floor: DEFAULT_INTENSITY_FLOOR,
        }
    }
}

/// Device plus mean signal amplitude, with the derived `σ_j²` and `h_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionContext {
    lon: LonMatrix,
    detectors: [DetectorConfig; 2],
    lo: LocalOscillator,
    mean_signal: Complex64,
    sigma_sq: [f64; 2],
    h: [Complex64; 2],
    high_intensity: bool,
    options: ContextOptions,
}

impl DetectionContext {
    pub fn new(
        lon: LonMatrix,
        det1: DetectorConfig,
        det2: DetectorConfig,
        lo: LocalOscillator,
        mean_signal: Complex64,
    ) -> Result<Self> {
        Self::with_options(lon, det1, det2, lo, mean_signal, ContextOptions::default())
    }

    pub fn with_options(
        lon: LonMatrix,
        det1: DetectorConfig,
        det2: DetectorConfig,
        lo: LocalOscillator,
        mean_signal: Complex64,
        options: ContextOptions,
    ) -> Result<Self> {
        if !mean_signal.is_finite() {
            return Err(Error::param("mean_signal", "must be finite"));
        }
        let detectors = [det1, det2];
        let mut sigma_sq = [0.0; 2];
        let mut h = [Complex64::new(0.0, 0.0); 2];
        let mut high_intensity = true;
        for d in Detector::BOTH {
            let i = d.index();
            let det = detectors[i];
            let alpha_j = lon.output_amplitude(d, mean_signal, &lo);
            let mean_counts = det.eta * alpha_j.norm_sqr();
            sigma_sq[i] = mean_counts + det.nu;
            h[i] = det.eta * lon.entry(d, 0).conj() * alpha_j;
            if !(sigma_sq[i] > 0.0) {
                return Err(Error::Validity(format!(
                    "detector {} sees no light and no dark counts (sigma^2 = 0)",
                    i + 1
                )));
            }
            if mean_counts < options.intensity_floor {
                high_intensity = false;
                log::warn!(
                    "detector {}: eta|alpha|^2 = {mean_counts:.3e} below {:.0}; not in the high-intensity regime",
                    i + 1,
                    options.intensity_floor
                );
            }
        }
        Ok(DetectionContext {
            lon,
            detectors,
            lo,
            mean_signal,
            sigma_sq,
            h,
            high_intensity,
            options,
        })
    }

    /// Same device, different mean signal amplitude.
    pub fn with_mean_signal(&self, mean_signal: Complex64) -> Result<Self> {
        Self::with_options(
            self.lon,
            self.detectors[0],
            self.detectors[1],
            self.lo,
            mean_signal,
            self.options,
        )
    }

    /// Same device and signal, different LO phase.
    pub fn with_lo_phase(&self, phase: f64) -> Result<Self> {
        Self::with_options(
            self.lon,
            self.detectors[0],
            self.detectors[1],
            self.lo.with_phase(phase),
            self.mean_signal,
            self.options,
        )
    }

    pub fn lon(&self) -> &LonMatrix {
        &self.lon
    }

    pub fn detector(&self, d: Detector) -> DetectorConfig {
        self.detectors[d.index()]
    }

    pub fn lo(&self) -> &LocalOscillator {
        &self.lo
    }

    pub fn mean_signal(&self) -> Complex64 {
        self.mean_signal
    }

    pub fn sigma_sq(&self, d: Detector) -> f64 {
        self.sigma_sq[d.index()]
    }

    pub fn sigma(&self, d: Detector) -> f64 {
        self.sigma_sq[d.index()].sqrt()
    }

    /// `σ₁σ₂`, the natural scale of `M`.
    pub fn sigma_product(&self) -> f64 {
        (self.sigma_sq[0] * self.sigma_sq[1]).sqrt()
    }

    pub fn h(&self, d: Detector) -> Complex64 {
        self.h[d.index()]
    }

    /// `h_j / σ_j`.
    pub fn coupling(&self, d: Detector) -> Complex64 {
        self.h[d.index()] / self.sigma(d)
    }

    /// Whether both detectors pass the intensity floor.
    pub fn is_high_intensity(&self) -> bool {
        self.high_intensity
    }

    /// Conditional means `μ_j(γ) = h_j* γ + h_j γ*` (real).
    pub fn mu(&self, gamma: Complex64) -> [f64; 2] {
        [
            2.0 * (self.h[0].conj() * gamma).re,
            2.0 * (self.h[1].conj() * gamma).re,
        ]
    }

    /// Quadrature angle probed by detector 1 in the strong-LO limit,
    /// `-(φ + arg q₁₂ - arg q₁₁)`.
    ///
    /// For the cross-correlation network with `T = |T|`, `R = i|R|` this is
    /// `-φ - π/2`, and the strong-LO mean correlation is proportional to
    /// minus the normal-ordered quadrature variance at this angle.
    pub fn optical_phase(&self) -> f64 {
        optical_phase(&self.lon, &self.lo)
    }
}

pub fn optical_phase(lon: &LonMatrix, lo: &LocalOscillator) -> f64 {
    let q = lon.entries();
    -(lo.phase + q[0][1].arg() - q[0][0].arg())
}
