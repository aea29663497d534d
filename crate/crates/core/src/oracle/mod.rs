//! Independent validation paths: a photon-counting Monte-Carlo driven by the
//! classical P function, and direct quadrature of the product integral.

mod poisson;
mod product;

pub use poisson::sample_poisson;
pub use product::{joint_pdf_numeric, pdf_via_product_integral, JointDensity, JointPdf, DEFAULT_PRODUCT_TOL};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lon::{DetectionContext, Detector};
use crate::quadrature::{integrate, QuadOptions};
use crate::state::SignalState;

/// Number of independent RNG streams; fixed so the output does not depend
/// on the thread pool.
pub const SHARDS: u64 = 64;

/// Draws the fluctuation `γ` from a nonnegative P function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalPSampler {
    state: SignalState,
    /// `e^{iφ_ξ/2}`, standard deviations of the two rotated components.
    rotation: Complex64,
    sd: [f64; 2],
}

impl ClassicalPSampler {
    pub fn new(state: &SignalState) -> Result<Self> {
        let (rotation, sd) = match *state {
            SignalState::Coherent { .. } | SignalState::Fock { n: 0 } => (Complex64::new(1.0, 0.0), [0.0, 0.0]),
            SignalState::Gaussian { v_x, v_p, phi_xi, .. } => {
                if v_p < 1.0 {
                    return Err(Error::UnsupportedState(format!(
                        "P function of a squeezed state (v_p = {v_p} < 1) is not a probability density"
                    )));
                }
                // ⟨γ²⟩ = (V_p - V_x)/4 · e^{iφ_ξ} fixes which component carries V_x.
                (
                    Complex64::from_polar(1.0, 0.5 * phi_xi),
                    [(0.25 * (v_p - 1.0)).sqrt(), (0.25 * (v_x - 1.0)).sqrt()],
                )
            }
            SignalState::Fock { n } => {
                return Err(Error::UnsupportedState(format!(
                    "Fock state |{n}> has no nonnegative P function"
                )))
            }
        };
        Ok(ClassicalPSampler {
            state: *state,
            rotation,
            sd,
        })
    }

    pub fn state(&self) -> &SignalState {
        &self.state
    }

    /// Centered fluctuation `γ = α - ⟨â⟩`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        if self.sd == [0.0, 0.0] {
            return Complex64::new(0.0, 0.0);
        }
        let u = self.sd[0] * rng.sample::<f64, _>(StandardNormal);
        let v = self.sd[1] * rng.sample::<f64, _>(StandardNormal);
        self.rotation * Complex64::new(u, v)
    }
}

/// Raw counts of one Monte-Carlo run together with the derived products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRun {
    pub seed: u64,
    pub n_samples: usize,
    pub samples: Vec<(u64, u64)>,
    /// Empirical means of the two counts.
    pub means: [f64; 2],
    /// `σ₁σ₂` of the simulated context, the unit of `M`.
    pub sigma_product: f64,
}

/// Sample mean and variance of `M` with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMoments {
    pub mean: f64,
    pub mean_se: f64,
    pub var: f64,
    pub var_se: f64,
}

impl SimulationRun {
    pub fn products(&self) -> impl Iterator<Item = f64> + '_ {
        let [x1, x2] = self.means;
        self.samples.iter().map(move |&(m1, m2)| (m1 as f64 - x1) * (m2 as f64 - x2))
    }

    pub fn moments(&self) -> EmpiricalMoments {
        let n = self.n_samples as f64;
        let mean = self.products().sum::<f64>() / n;
        let (mut m2, mut m4) = (0.0, 0.0);
        for x in self.products() {
            let d = (x - mean) * (x - mean);
            m2 += d;
            m4 += d * d;
        }
        let var = m2 / (n - 1.0);
        let m4 = m4 / n;
        EmpiricalMoments {
            mean,
            mean_se: (var / n).sqrt(),
            var,
            var_se: ((m4 - var * var).max(0.0) / n).sqrt(),
        }
    }
}

/// Poisson-mixture photodetection: per sample draw `γ`, set
/// `α = ⟨â⟩ + γ`, then independent counts `m_j ~ Poisson(η_j|α_j|² + ν_j)`.
pub fn simulate_counts(
    sampler: &ClassicalPSampler,
    device: &DetectionContext,
    seed: u64,
    n: usize,
) -> Result<SimulationRun> {
    if n < 2 {
        return Err(Error::param("n", "need at least two samples"));
    }
    let mean_signal = sampler.state().mean_amplitude();
    let ctx = device.with_mean_signal(mean_signal)?;
    let lo = *ctx.lo();
    let shards: Vec<Vec<(u64, u64)>> = (0..SHARDS)
        .into_par_iter()
        .map(|shard| {
            let start = n as u64 * shard / SHARDS;
            let end = n as u64 * (shard + 1) / SHARDS;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            (start..end)
                .map(|_| {
                    let alpha = mean_signal + sampler.draw(&mut rng);
                    let mut counts = [0u64; 2];
                    for d in Detector::BOTH {
                        let det = ctx.detector(d);
                        let lambda = det.eta * ctx.lon().output_amplitude(d, alpha, &lo).norm_sqr() + det.nu;
                        counts[d.index()] = sample_poisson(&mut rng, lambda);
                    }
                    (counts[0], counts[1])
                })
                .collect()
        })
        .collect();
    let samples: Vec<(u64, u64)> = shards.into_iter().flatten().collect();
    let mut sums = [0.0f64; 2];
    for &(m1, m2) in &samples {
        sums[0] += m1 as f64;
        sums[1] += m2 as f64;
    }
    Ok(SimulationRun {
        seed,
        n_samples: n,
        means: [sums[0] / n as f64, sums[1] / n as f64],
        samples,
        sigma_product: ctx.sigma_product(),
    })
}

/// Equal-width histogram of `M/(σ₁σ₂)`, normalized as a density over all
/// samples (so the bin integral is the fraction of samples inside the range).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub width: f64,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn edges(&self, i: usize) -> (f64, f64) {
        (self.lo + i as f64 * self.width, self.lo + (i + 1) as f64 * self.width)
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.bins()).map(|i| self.lo + (i as f64 + 0.5) * self.width).collect()
    }

    pub fn densities(&self) -> Vec<f64> {
        let norm = self.total as f64 * self.width;
        self.counts.iter().map(|&c| c as f64 / norm).collect()
    }

    pub fn integral(&self) -> f64 {
        self.counts.iter().sum::<u64>() as f64 / self.total as f64
    }
}

/// Histogram over the full sample range; its bin integral is exactly 1.
pub fn empirical_product_histogram(run: &SimulationRun, bins: usize) -> Histogram {
    let scale = run.sigma_product;
    let (lo, hi) = run
        .products()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x / scale), hi.max(x / scale)));
    let hi = if hi > lo { hi } else { lo + 1.0 };
    histogram_in_range(run, bins, lo, hi)
}

/// Histogram on `[lo, hi]` in units of `σ₁σ₂`; samples outside are dropped
/// from the bins but kept in the normalization.
pub fn histogram_in_range(run: &SimulationRun, bins: usize, lo: f64, hi: f64) -> Histogram {
    let bins = bins.max(1);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for x in run.products() {
        let x = x / run.sigma_product;
        if x < lo || x > hi {
            continue;
        }
        let i = (((x - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    Histogram {
        lo,
        width,
        counts,
        total: run.n_samples as u64,
    }
}

/// Bin averages of a density `w(M)` given in physical units, expressed in
/// units of `scale` to compare against a histogram.
pub fn binned_density<F>(w: F, scale: f64, hist: &Histogram) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64 + Sync,
{
    let opts = QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-10,
        max_intervals: 4000,
    };
    let f = |x: f64| scale * w(x * scale);
    (0..hist.bins())
        .into_par_iter()
        .map(|i| {
            let (a, b) = hist.edges(i);
            let mass = if a < 0.0 && b > 0.0 {
                integrate(f, a, 0.0, opts)?.value + integrate(f, 0.0, b, opts)?.value
            } else {
                integrate(f, a, b, opts)?.value
            };
            Ok(mass / hist.width)
        })
        .collect()
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Draws `n` fluctuations from `sampler` with the same stream layout as
/// [`simulate_counts`]; used to average conditional quantities over `P`.
pub fn sample_fluctuations(sampler: &ClassicalPSampler, seed: u64, n: usize) -> Vec<Complex64> {
    (0..SHARDS)
        .into_par_iter()
        .map(|shard| {
            let start = n as u64 * shard / SHARDS;
            let end = n as u64 * (shard + 1) / SHARDS;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            (start..end).map(|_| sampler.draw(&mut rng)).collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}
