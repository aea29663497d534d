//! Fock-state densities.
//!
//! The P function of `|n⟩` is a finite sum of derivatives of `δ(γ)`, so after
//! integrating by parts only the values `[∂_γ^q ∂_{γ*}^q 𝒢_{a,b}]_{γ=0}` with
//! `a + b <= 2q` are needed. They are obtained by recursion in the
//! `𝒢`-basis, using
//!
//! ```text
//! ∂_{γ*} 𝒢_{a,b} = -k₁ 𝒢_{a+1,b} - k₂ 𝒢_{a,b+1} + a k₁ 𝒢_{a-1,b} + b k₂ 𝒢_{a,b-1}
//! ∂_γ    𝒢_{a,b} = (∂_{γ*} 𝒢_{a,b})*
//! 𝒢_{a,b}(0, 0) = δ_{a0} δ_{b0}
//! ```
//!
//! with `k_j = h_j / σ_j`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::{weight_w_unchecked, DensityValue};
use crate::error::{Error, Result};
use crate::lon::{DetectionContext, Detector};
use crate::special::{binomial, factorial};
use crate::state::DEFAULT_FOCK_MAX;

/// Mean amplitude below which a context counts as centered.
const CENTERED_TOL: f64 = 1e-12;

/// Finite linear combination `Σ c_{a,b} 𝒢_{a,b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GExpansion {
    terms: BTreeMap<(u32, u32), Complex64>,
    coupling: [Complex64; 2],
}

impl GExpansion {
    /// A single basis function `𝒢_{a,b}` for the given context.
    pub fn basis(a: u32, b: u32, ctx: &DetectionContext) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((a, b), Complex64::new(1.0, 0.0));
        GExpansion {
            terms,
            coupling: [ctx.coupling(Detector::One), ctx.coupling(Detector::Two)],
        }
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), Complex64> {
        &self.terms
    }

    fn differentiate(&self, k: [Complex64; 2]) -> Self {
        let mut out: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for (&(a, b), &c) in &self.terms {
            *out.entry((a + 1, b)).or_default() -= c * k[0];
            *out.entry((a, b + 1)).or_default() -= c * k[1];
            if a > 0 {
                *out.entry((a - 1, b)).or_default() += c * k[0] * f64::from(a);
            }
            if b > 0 {
                *out.entry((a, b - 1)).or_default() += c * k[1] * f64::from(b);
            }
        }
        out.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        GExpansion {
            terms: out,
            coupling: self.coupling,
        }
    }

    /// `∂_{γ*}` of the expansion.
    pub fn d_gamma_conj(&self) -> Self {
        self.differentiate(self.coupling)
    }

    /// `∂_γ` of the expansion.
    pub fn d_gamma(&self) -> Self {
        self.differentiate([self.coupling[0].conj(), self.coupling[1].conj()])
    }

    /// Value at `γ = 0`: the coefficient of `𝒢_{0,0}`.
    pub fn eval_at_origin(&self) -> Complex64 {
        self.terms.get(&(0, 0)).copied().unwrap_or_default()
    }
}

/// Dense table `T(a, b) = [∂_γ^q ∂_{γ*}^q 𝒢_{a,b}]_{γ=0}` for `a + b <= 2q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeTable {
    order: u32,
    dim: usize,
    values: Vec<f64>,
}

impl DerivativeTable {
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Zero outside the support `a + b <= 2q`.
    pub fn get(&self, a: u32, b: u32) -> f64 {
        let (a, b) = (a as usize, b as usize);
        if a < self.dim && b < self.dim {
            self.values[a * self.dim + b]
        } else {
            0.0
        }
    }

    /// Nonzero entries, keyed by `(a, b)`.
    pub fn nonzero(&self) -> BTreeMap<(u32, u32), f64> {
        let mut out = BTreeMap::new();
        for a in 0..self.dim {
            for b in 0..self.dim {
                let v = self.values[a * self.dim + b];
                if v != 0.0 {
                    out.insert((a as u32, b as u32), v);
                }
            }
        }
        out
    }
}

/// Pulls the evaluation functional back through one derivative:
/// `f'(a,b) = -k₁ f(a+1,b) - k₂ f(a,b+1) + a k₁ f(a-1,b) + b k₂ f(a,b-1)`.
fn pull_back(f: &[Complex64], dim: usize, k: [Complex64; 2]) -> Vec<Complex64> {
    let at = |a: usize, b: usize| -> Complex64 {
        if a < dim && b < dim {
            f[a * dim + b]
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
    for a in 0..dim {
        for b in 0..dim {
            let mut v = -k[0] * at(a + 1, b) - k[1] * at(a, b + 1);
            if a > 0 {
                v += k[0] * (a as f64) * at(a - 1, b);
            }
            if b > 0 {
                v += k[1] * (b as f64) * at(a, b - 1);
            }
            out[a * dim + b] = v;
        }
    }
    out
}

/// Derivative table of order `q`, computed as the transpose of the
/// `𝒢`-basis recursion so that all `(a, b)` come out of one pass.
pub fn fock_g_derivatives(q: u32, ctx: &DetectionContext) -> Result<DerivativeTable> {
    if q > DEFAULT_FOCK_MAX {
        return Err(Error::param(
            "q",
            format!("derivative order {q} above limit {DEFAULT_FOCK_MAX}"),
        ));
    }
    Ok(derivative_table(q, ctx))
}

fn derivative_table(q: u32, ctx: &DetectionContext) -> DerivativeTable {
    let k = [ctx.coupling(Detector::One), ctx.coupling(Detector::Two)];
    let k_conj = [k[0].conj(), k[1].conj()];
    let dim = 2 * q as usize + 1;
    let mut f = vec![Complex64::new(0.0, 0.0); dim * dim];
    f[0] = Complex64::new(1.0, 0.0);
    // ev₀ ∘ ∂^q ∘ ∂*^q: pull back through ∂ first, then through ∂*.
    for _ in 0..q {
        f = pull_back(&f, dim, k_conj);
    }
    for _ in 0..q {
        f = pull_back(&f, dim, k);
    }
    let values = f
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let (a, b) = (i / dim, i % dim);
            if a + b <= 2 * q as usize {
                v.re
            } else {
                0.0
            }
        })
        .collect();
    DerivativeTable {
        order: q,
        dim,
        values,
    }
}

/// Precomputed Fock-state density: the `𝒢`-derivative tables weighted by
/// the P-function coefficients `C(n,q)/q!`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockKernel {
    n: u32,
    dim: usize,
    /// `F(a,b) = Σ_q C(n,q)/q! T_q(a,b)`.
    weights: Vec<f64>,
    sigma: [f64; 2],
}

impl FockKernel {
    pub fn new(n: u32, ctx: &DetectionContext) -> Result<Self> {
        Self::with_limit(n, DEFAULT_FOCK_MAX, ctx)
    }

    pub fn with_limit(n: u32, n_max: u32, ctx: &DetectionContext) -> Result<Self> {
        if n > n_max {
            return Err(Error::param("n", format!("Fock number {n} above limit {n_max}")));
        }
        if ctx.mean_signal().norm() > CENTERED_TOL {
            return Err(Error::param(
                "mean_signal",
                "Fock states are centered; the context must have <a> = 0",
            ));
        }
        let dim = 2 * n as usize + 1;
        let mut weights = vec![0.0; dim * dim];
        for q in 0..=n {
            let table = derivative_table(q, ctx);
            let c = binomial(n, q) / factorial(q);
            for a in 0..table.dim {
                for b in 0..table.dim {
                    weights[a * dim + b] += c * table.values[a * table.dim + b];
                }
            }
        }
        Ok(FockKernel {
            n,
            dim,
            weights,
            sigma: [ctx.sigma(Detector::One), ctx.sigma(Detector::Two)],
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn sigma(&self) -> [f64; 2] {
        self.sigma
    }

    pub fn sigma_product(&self) -> f64 {
        self.sigma[0] * self.sigma[1]
    }

    /// Aggregated weight `F(a, b)`.
    pub fn weight(&self, a: u32, b: u32) -> f64 {
        let (a, b) = (a as usize, b as usize);
        if a < self.dim && b < self.dim {
            self.weights[a * self.dim + b]
        } else {
            0.0
        }
    }

    /// `w(M) = (1/σ₁σ₂) Σ_u Σ_ℓ 𝒲_{u,ℓ}(M/σ₁σ₂) F(ℓ, 2u-ℓ)`.
    pub fn density(&self, m: f64) -> DensityValue {
        if m == 0.0 {
            return DensityValue::IntegrableSingularity;
        }
        let scale = self.sigma_product();
        let z = m / scale;
        let mut acc = 0.0;
        for u in 0..=self.n {
            for l in 0..=2 * u {
                let f = self.weight(l, 2 * u - l);
                if f != 0.0 {
                    acc += weight_w_unchecked(u, l, z) * f;
                }
            }
        }
        DensityValue::Finite(acc / scale)
    }

    /// Joint density `p(c₁, c₂)` of the two current fluctuations.
    ///
    /// Expanding `exp(x·m - m²/2)` turns the Gaussian kernel into
    /// `Σ x₁^a x₂^b/(a! b!) 𝒢_{a,b}`, so the same weights apply.
    pub fn joint_density(&self, c1: f64, c2: f64) -> f64 {
        let x1 = c1 / self.sigma[0];
        let x2 = c2 / self.sigma[1];
        let mut acc = 0.0;
        let mut p1 = 1.0; // x1^a / a!
        for a in 0..self.dim {
            let mut p2 = 1.0; // x2^b / b!
            for b in 0..self.dim - a {
                let f = self.weights[a * self.dim + b];
                if f != 0.0 {
                    acc += f * p1 * p2;
                }
                p2 *= x2 / (b + 1) as f64;
            }
            p1 *= x1 / (a + 1) as f64;
        }
        acc * (-0.5 * (x1 * x1 + x2 * x2)).exp() / (2.0 * PI * self.sigma_product())
    }
}

/// `w(M)` for the Fock state `|n⟩`; the context must be centered.
pub fn pdf_fock(m: f64, n: u32, ctx: &DetectionContext) -> Result<DensityValue> {
    Ok(FockKernel::new(n, ctx)?.density(m))
}
