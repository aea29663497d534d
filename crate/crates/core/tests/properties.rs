use std::f64::consts::{PI, TAU};

use approx::assert_relative_eq;
use hcm::lon::{DetectorConfig, LocalOscillator, LonMatrix};
use hcm::moments::{cauchy_schwarz_d, d_scale, gaussian_normal_ordered_moments, mean_var_m, nonclassicality_r};
use hcm::oracle::pdf_via_product_integral;
use hcm::quadrature::QuadOptions;
use hcm::statistics::{pdf_coherent, pdf_gaussian, GaussianJointParams};
use hcm::{Complex64, CorrelationPdf, DetectionContext, Detector, SignalState};
use proptest::prelude::*;

fn device(t2: f64, eta: f64, nu: f64, mag2: f64, phase: f64) -> DetectionContext {
    DetectionContext::new(
        LonMatrix::cross_correlation_from_ratios(t2, 1.0 - t2).unwrap(),
        DetectorConfig::new(eta, nu).unwrap(),
        DetectorConfig::new(eta, 0.0).unwrap(),
        LocalOscillator::from_intensity(mag2, phase).unwrap(),
        Complex64::new(0.0, 0.0),
    )
    .unwrap()
}

fn amplitude() -> impl Strategy<Value = Complex64> {
    (0.0..2000.0f64, 0.0..TAU).prop_map(|(r, th)| Complex64::from_polar(r, th))
}

/// Classical Gaussian: the smaller variance stays at or above vacuum.
fn classical_gaussian() -> impl Strategy<Value = SignalState> {
    (1.0..4.0f64, 0.0..5.0f64, 0.0..TAU, amplitude())
        .prop_map(|(vp, extra, phi, mean)| SignalState::gaussian(vp + extra, vp, phi, mean).unwrap())
}

fn any_gaussian() -> impl Strategy<Value = SignalState> {
    (0.2..6.0f64, 0.2..6.0f64, 0.0..TAU, amplitude()).prop_filter_map("valid state", |(vx, vp, phi, mean)| {
        SignalState::gaussian(vx, vp, phi, mean).ok()
    })
}

fn any_device() -> impl Strategy<Value = DetectionContext> {
    (0.05..0.95f64, 0.3..1.0f64, 0.0..50.0f64, 1e3..1e7f64, 0.0..TAU)
        .prop_map(|(t2, eta, nu, mag2, phase)| device(t2, eta, nu, mag2, phase))
}

proptest! {
    #[test]
    fn lossless_splitter_pairs_are_accepted(a in 0.0..1.0f64, b in 0.0..1.0f64, loss in 0.0..0.5f64) {
        let split = |x: f64| (Complex64::new((x * (1.0 - loss)).sqrt(), 0.0), Complex64::new(0.0, ((1.0 - x) * (1.0 - loss)).sqrt()));
        let ((t1, r1), (t2, r2)) = (split(a), split(b));
        let [lo, hi] = LonMatrix::intensity_correlation(t1, r1, t2, r2).unwrap().gram_eigenvalues();
        prop_assert!(lo >= -1e-12 && hi <= 1.0 + 1e-12, "{lo} {hi}");
    }

    #[test]
    fn accepted_networks_have_contractive_gram(
        re in proptest::array::uniform6(-0.8..0.8f64), im in proptest::array::uniform6(-0.8..0.8f64)
    ) {
        let e = |k: usize| Complex64::new(re[k], im[k]);
        let q = [[e(0), e(1), e(2)], [e(3), e(4), e(5)]];
        match LonMatrix::new(q) {
            Ok(m) => {
                let [lo, hi] = m.gram_eigenvalues();
                prop_assert!(lo >= -1e-12 && hi <= 1.0 + 1e-9, "{lo} {hi}");
            }
            Err(_) => {
                // Rejected: the Gram matrix of the raw rows must exceed one.
                let g = |i: usize, j: usize| -> Complex64 { (0..3).map(|u| q[i][u] * q[j][u].conj()).sum() };
                let (a, d) = (g(0, 0).re, g(1, 1).re);
                let top = 0.5 * (a + d) + (0.25 * (a - d) * (a - d) + g(0, 1).norm_sqr()).sqrt();
                prop_assert!(top > 1.0 - 1e-9, "rejected with top eigenvalue {top}");
            }
        }
    }

    #[test]
    fn output_amplitude_is_affine_in_signal(a in amplitude(), b in amplitude(), k in -3.0..3.0f64) {
        let q = LonMatrix::cross_correlation_from_ratios(0.3, 0.7).unwrap();
        let lo = LocalOscillator::from_intensity(1e4, 0.4).unwrap();
        for d in [Detector::One, Detector::Two] {
            let zero = q.output_amplitude(d, Complex64::new(0.0, 0.0), &lo);
            let lhs = q.output_amplitude(d, a + b * k, &lo) - zero;
            let rhs = (q.output_amplitude(d, a, &lo) - zero) + (q.output_amplitude(d, b, &lo) - zero) * k;
            prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn coherent_density_is_even(alpha in amplitude(), ctx in any_device(), x in 0.01..8.0f64) {
        let ctx = ctx.with_mean_signal(alpha).unwrap();
        let m = x * ctx.sigma_product();
        let (p, n) = (pdf_coherent(m, &ctx).value(), pdf_coherent(-m, &ctx).value());
        prop_assert!((p - n).abs() <= 1e-14 * p.max(n));
    }

    #[test]
    fn gaussian_closed_form_matches_product_integral(
        s1 in 0.1..10.0f64, s2 in 0.1..10.0f64, corr in -0.9..0.9f64, x in 0.05..6.0f64, neg in any::<bool>()
    ) {
        let p = GaussianJointParams::new(s1, s2, corr).unwrap();
        let m = if neg { -x } else { x } * s1 * s2;
        let q = pdf_via_product_integral(&p, m, 1e-9).unwrap();
        prop_assert!((q.value / pdf_gaussian(m, &p).value() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn classical_states_pass_both_tests(state in classical_gaussian(), ctx in any_device(), phi in 0.0..TAU) {
        let (_, var) = mean_var_m(&state, &ctx).unwrap();
        let reference = ctx.with_mean_signal(state.mean_amplitude()).unwrap();
        prop_assert!(nonclassicality_r(var, &reference) >= -1e-9);
        let m = gaussian_normal_ordered_moments(&state, phi).unwrap();
        prop_assert!(cauchy_schwarz_d(&m) >= -1e-9 * d_scale(&m));
    }

    #[test]
    fn moments_are_two_pi_periodic_in_lo_phase(state in any_gaussian(), ctx in any_device()) {
        let phase = ctx.lo().reported_phase();
        let shifted = ctx.with_lo_phase(phase + TAU).unwrap();
        let (m0, v0) = mean_var_m(&state, &ctx).unwrap();
        let (m1, v1) = mean_var_m(&state, &shifted).unwrap();
        prop_assert!((m0 - m1).abs() <= 1e-9 * v0.sqrt());
        prop_assert!((v0 / v1 - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn dark_counts_widen_without_shifting(state in any_gaussian(), nu in 0.1..100.0f64, phase in 0.0..TAU) {
        let quiet = device(0.14, 0.9, 0.0, 1e6, phase);
        let noisy = device(0.14, 0.9, nu, 1e6, phase);
        let (m0, v0) = mean_var_m(&state, &quiet).unwrap();
        let (m1, v1) = mean_var_m(&state, &noisy).unwrap();
        prop_assert!((m0 - m1).abs() <= 1e-9 * v0.sqrt());
        prop_assert!(v1 > v0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gaussian_density_normalized_with_closed_form_moments(state in any_gaussian(), ctx in any_device()) {
        let pdf = CorrelationPdf::new(&state, &ctx).unwrap();
        let opts = QuadOptions::rel(1e-10);
        prop_assert!((pdf.normalization(opts).unwrap().value - 1.0).abs() < 1e-7);
        let (mean, var) = pdf.numeric_mean_variance(opts).unwrap();
        let (m, v) = mean_var_m(&state, &ctx).unwrap();
        prop_assert!((mean - m).abs() <= 1e-6 * v.sqrt());
        prop_assert!((var / v - 1.0).abs() <= 1e-6);
    }
}

#[test]
fn phase_squeezed_reference_values() {
    let s = SignalState::gaussian(4.0, 0.5, PI, Complex64::new(1000.0, 0.0)).unwrap();
    let m = gaussian_normal_ordered_moments(&s, PI / 2.0).unwrap();
    assert_relative_eq!(cauchy_schwarz_d(&m), -1.5e6, max_relative = 1e-12);
}
