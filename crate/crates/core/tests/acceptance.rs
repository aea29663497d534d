//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::time::{Duration, Instant};

use hcm::lon::{DetectorConfig, LocalOscillator, LonMatrix};
use hcm::moments::{
    cauchy_schwarz_d, d_scale, gaussian_normal_ordered_moments, mean_var_m, nonclassicality_r,
    DEFAULT_VERDICT_TOL,
};
use hcm::oracle::{
    binned_density, histogram_in_range, pdf_via_product_integral, simulate_counts, sup_distance,
    ClassicalPSampler,
};
use hcm::quadrature::{integrate_to_infinity, QuadOptions};
use hcm::special::bessel_k;
use hcm::statistics::{gaussian_joint_params, pdf_coherent, pdf_fock, pdf_gaussian, GaussianJointParams};
use hcm::{Complex64, CorrelationPdf, DetectionContext, Detector, SignalState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn device(t2: f64, eta: [f64; 2], nu: [f64; 2], mag2: f64, phase: f64, mean: Complex64) -> DetectionContext {
    DetectionContext::new(
        LonMatrix::cross_correlation_from_ratios(t2, 1.0 - t2).unwrap(),
        DetectorConfig::new(eta[0], nu[0]).unwrap(),
        DetectorConfig::new(eta[1], nu[1]).unwrap(),
        LocalOscillator::from_intensity(mag2, phase).unwrap(),
        mean,
    )
    .unwrap()
}

fn ideal(t2: f64, mag2: f64, phase: f64, mean: Complex64) -> DetectionContext {
    device(t2, [1.0, 1.0], [0.0, 0.0], mag2, phase, mean)
}

fn squeezed(phi_xi: f64) -> SignalState {
    SignalState::gaussian(4.0, 0.5, phi_xi, c(1000.0, 0.0)).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, start: Instant, detail: String) -> Outcome {
    let took = start.elapsed();
    check(took < limit, format!("{detail}; {:.2} s (limit {} s)", took.as_secs_f64(), limit.as_secs()))
}

fn normalization() -> Outcome {
    let start = Instant::now();
    let opts = QuadOptions::rel(1e-10);
    let mut cases: Vec<(String, SignalState, DetectionContext)> = vec![(
        "coherent".into(),
        SignalState::coherent(c(300.0, -100.0)).unwrap(),
        ideal(0.14, 1e6, 0.3, c(0.0, 0.0)),
    )];
    let gaussians = [
        ("amplitude squeezed", squeezed(0.0), ideal(0.14, 1e6, 0.0, c(0.0, 0.0))),
        ("phase squeezed", squeezed(PI), ideal(0.14, 1e6, 0.0, c(0.0, 0.0))),
        ("thermal", SignalState::thermal(1.0).unwrap(), ideal(0.5, 1e6, 0.0, c(0.0, 0.0))),
        (
            "squeezed vacuum, lossy",
            SignalState::gaussian(2.0, 0.5, 0.4, c(0.0, 0.0)).unwrap(),
            device(0.3, [0.8, 0.9], [10.0, 5.0], 1e5, 1.1, c(0.0, 0.0)),
        ),
        (
            "displaced classical",
            SignalState::gaussian(3.0, 1.5, 1.0, c(30.0, 40.0)).unwrap(),
            ideal(0.6, 1e4, 0.7, c(0.0, 0.0)),
        ),
        (
            "weakly squeezed mixed",
            SignalState::gaussian(1.2, 0.9, 2.0, c(-50.0, 10.0)).unwrap(),
            device(0.14, [0.7, 0.7], [0.0, 0.0], 1e6, 2.5, c(0.0, 0.0)),
        ),
    ];
    for (name, s, d) in gaussians {
        cases.push((name.into(), s, d));
    }
    for n in 0..=4 {
        cases.push((format!("fock {n}"), SignalState::fock(n).unwrap(), ideal(0.5, 1e6, 0.0, c(0.0, 0.0))));
    }
    let mut worst: (f64, String) = (0.0, String::new());
    for (name, s, d) in &cases {
        let pdf = CorrelationPdf::new(s, d).map_err(|e| format!("{name}: {e}"))?;
        let q = pdf.normalization(opts).map_err(|e| format!("{name}: {e}"))?;
        let err = (q.value - 1.0).abs();
        if err >= worst.0 {
            worst = (err, name.clone());
        }
    }
    within(
        Duration::from_secs(10),
        start,
        format!("{} densities, worst |int w - 1| = {:.2e} ({})", cases.len(), worst.0, worst.1),
    )
    .and_then(|d| check(worst.0 < 1e-6, d))
}

fn coherent_closed_form() -> Outcome {
    // K_0(1) = ∫_0^∞ exp(-cosh t) dt, independent of the series/CF code.
    let k0_integral = integrate_to_infinity(|t: f64| (-t.cosh()).exp(), 0.0, 1.0, QuadOptions::rel(1e-14))
        .map_err(|e| e.to_string())?
        .value;
    let k0 = bessel_k(0, 1.0).map_err(|e| e.to_string())?;
    let ctx = ideal(0.14, 1e6, 0.0, c(1000.0, 0.0));
    let s = ctx.sigma_product();
    let at_unit = pdf_coherent(s, &ctx).value();
    let expected = k0_integral / (PI * s);
    let mut asym: f64 = 0.0;
    for i in 0..1000 {
        let m = (0.01 + 0.008 * i as f64) * s;
        asym = asym.max(s * (pdf_coherent(m, &ctx).value() - pdf_coherent(-m, &ctx).value()).abs());
    }
    check(
        rel(at_unit, expected) < 1e-12 && (k0 - 0.421024).abs() < 5e-7 && rel(k0, k0_integral) < 1e-13 && asym < 1e-12,
        format!(
            "K0(1) = {k0:.12} (integral {k0_integral:.12}); rel err at M = s1 s2: {:.1e}; max |w(M) - w(-M)| s1 s2 = {asym:.1e}",
            rel(at_unit, expected)
        ),
    )
}

fn gaussian_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for corr in [-0.6, 0.0, 0.6] {
        let p = GaussianJointParams::new(1.7, 0.6, corr).map_err(|e| e.to_string())?;
        let scale = p.s1 * p.s2;
        for i in 0..=240 {
            let x = -6.0 + 0.05 * i as f64;
            if x.abs() < 0.05 - 1e-12 {
                continue;
            }
            let m = x * scale;
            let q = pdf_via_product_integral(&p, m, 1e-9).map_err(|e| e.to_string())?;
            worst = worst.max(rel(q.value, pdf_gaussian(m, &p).value()));
            n += 1;
        }
    }
    within(
        Duration::from_secs(60),
        start,
        format!("{n} points for C in {{-0.6, 0, 0.6}}, max relative error {worst:.2e}"),
    )
    .and_then(|d| check(worst <= 1e-6, d))
}

fn single_photon_closed_form(m: f64, ctx: &DetectionContext) -> f64 {
    let s = ctx.sigma_product();
    let k1 = ctx.h(Detector::One) / ctx.sigma(Detector::One);
    let k2 = ctx.h(Detector::Two) / ctx.sigma(Detector::Two);
    let a = k1.norm_sqr() + k2.norm_sqr();
    let b = 2.0 * (k1 * k2.conj()).re;
    let z = m / s;
    let k0 = bessel_k(0, z.abs()).unwrap();
    let k1z = bessel_k(1, z.abs()).unwrap();
    ((1.0 - a) * k0 + a * z.abs() * k1z + b * z * k0) / (PI * s)
}

fn reductions() -> Outcome {
    let mut worst = [0.0f64; 3];
    for (t2, phase, eta) in [(0.14, 0.0, 1.0), (0.5, 0.9, 0.8), (0.3, 2.2, 0.6)] {
        let mean = c(400.0, 250.0);
        let ctx = device(t2, [eta, eta], [3.0, 0.0], 1e6, phase, mean);
        let vac = ctx.with_mean_signal(c(0.0, 0.0)).unwrap();
        let gauss = CorrelationPdf::new(&SignalState::gaussian(1.0, 1.0, 0.3, mean).unwrap(), &ctx).unwrap();
        let fock0 = CorrelationPdf::new(&SignalState::fock(0).unwrap(), &vac).unwrap();
        for i in 1..=200 {
            let x = -5.0 + 0.05 * i as f64 - 0.025;
            let m = x * ctx.sigma_product();
            let coh = pdf_coherent(m, &ctx).value();
            worst[0] = worst[0].max(rel(gauss.value(m), coh));
            let mv = x * vac.sigma_product();
            worst[1] = worst[1].max(rel(fock0.value(mv), pdf_coherent(mv, &vac).value()));
            let one = pdf_fock(mv, 1, &vac).unwrap().value();
            worst[2] = worst[2].max(rel(one, single_photon_closed_form(mv, &vac)));
        }
    }
    check(
        worst.iter().all(|&w| w < 1e-12),
        format!(
            "max relative deviation: Gaussian(1,1) {:.1e}, Fock(0) {:.1e}, Fock(1) vs closed form {:.1e}",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn fock_mean() -> Outcome {
    let mag2 = 1e6;
    let ctx = ideal(0.5, mag2, 0.0, c(0.0, 0.0));
    let mut worst: f64 = 0.0;
    let mut values = Vec::new();
    for n in 1..=4 {
        let pdf = CorrelationPdf::new(&SignalState::fock(n).unwrap(), &ctx).unwrap();
        let m1 = pdf.moment(1, QuadOptions::rel(1e-10)).map_err(|e| e.to_string())?.value;
        let expected = -0.5 * n as f64 * mag2;
        worst = worst.max(rel(m1, expected));
        values.push(format!("{:.6}", m1 / mag2));
    }
    check(
        worst < 1e-4,
        format!("int M w dM / |alpha_L|^2 for n = 1..4: [{}], max relative error {worst:.1e}", values.join(", ")),
    )
}

fn gaussian_moments() -> Outcome {
    let opts = QuadOptions::rel(1e-11);
    let (mut worst_mean, mut worst_var): (f64, f64) = (0.0, 0.0);
    for phi_xi in [PI, 0.0] {
        for k in 0..8 {
            let phi = k as f64 * TAU / 8.0;
            let ctx = ideal(0.14, 1e6, phi, c(1000.0, 0.0));
            let state = squeezed(phi_xi);
            let p = gaussian_joint_params(&state, &ctx).map_err(|e| e.to_string())?;
            let pdf = CorrelationPdf::new(&state, &ctx).unwrap();
            let m1 = pdf.moment(1, opts).map_err(|e| e.to_string())?.value;
            let m2 = pdf.moment(2, opts).map_err(|e| e.to_string())?.value;
            let mean = p.corr * p.s1 * p.s2;
            let var = (1.0 + p.corr * p.corr) * (p.s1 * p.s2).powi(2);
            worst_mean = worst_mean.max(rel(m1, mean));
            worst_var = worst_var.max(rel(m2 - m1 * m1, var));
        }
    }
    check(
        worst_mean < 1e-5 && worst_var < 1e-5,
        format!("16 LO settings: max relative error mean {worst_mean:.1e}, variance {worst_var:.1e}"),
    )
}

fn random_classical(rng: &mut ChaCha8Rng) -> SignalState {
    let v_p = rng.random_range(1.0..4.0);
    let v_x = v_p + rng.random_range(0.0..5.0);
    let mean = Complex64::from_polar(rng.random_range(10.0..2000.0), rng.random_range(0.0..TAU));
    SignalState::gaussian(v_x, v_p, rng.random_range(0.0..TAU), mean).unwrap()
}

fn nonclassicality_d() -> Outcome {
    let a = 1000.0;
    let s = SignalState::gaussian(4.0, 0.5, PI, c(a, 0.0)).unwrap();
    let m0 = gaussian_normal_ordered_moments(&s, 0.0).unwrap();
    let mpi = gaussian_normal_ordered_moments(&s, PI).unwrap();
    let mhalf = gaussian_normal_ordered_moments(&s, FRAC_PI_2).unwrap();
    let zero_ok = cauchy_schwarz_d(&m0).abs() <= 1e-9 * d_scale(&m0) && cauchy_schwarz_d(&mpi).abs() <= 1e-9 * d_scale(&mpi);
    let half = cauchy_schwarz_d(&mhalf) / (a * a);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut min_ratio = f64::INFINITY;
    for _ in 0..20 {
        let st = random_classical(&mut rng);
        for k in 0..64 {
            let m = gaussian_normal_ordered_moments(&st, k as f64 * TAU / 64.0).unwrap();
            min_ratio = min_ratio.min(cauchy_schwarz_d(&m) / d_scale(&m));
        }
    }
    check(
        zero_ok && (half + 1.5).abs() <= 1.5e-9 && min_ratio >= -1e-9,
        format!(
            "D(0), D(pi) within 1e-9 scale: {zero_ok}; D(pi/2)/|<a>|^2 = {half:.12}; min D/scale over 20 classical states x 64 phases = {min_ratio:.2e}"
        ),
    )
}

fn nonclassicality_r_criterion() -> Outcome {
    let ctx = ideal(0.14, 1e6, 0.4, c(0.0, 0.0));
    let coh = SignalState::coherent(c(700.0, 200.0)).unwrap();
    let reference = ctx.with_mean_signal(coh.mean_amplitude()).unwrap();
    let (_, v) = mean_var_m(&coh, &ctx).unwrap();
    let r_coh = nonclassicality_r(v, &reference);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut r_min = f64::INFINITY;
    for _ in 0..20 {
        let st = random_classical(&mut rng);
        let d = device(
            rng.random_range(0.05..0.95),
            [rng.random_range(0.5..1.0), rng.random_range(0.5..1.0)],
            [rng.random_range(0.0..50.0), 0.0],
            rng.random_range(1e3..1e7),
            rng.random_range(0.0..TAU),
            c(0.0, 0.0),
        );
        let (_, v) = mean_var_m(&st, &d).unwrap();
        r_min = r_min.min(nonclassicality_r(v, &d.with_mean_signal(st.mean_amplitude()).unwrap()));
    }

    let state = squeezed(0.0);
    let (mut n_r, mut n_sq, mut contained) = (0, 0, true);
    for k in 0..720 {
        let ctx = ideal(0.14, 1e6, k as f64 * TAU / 720.0, c(1000.0, 0.0));
        let (_, v) = mean_var_m(&state, &ctx).unwrap();
        let negative = nonclassicality_r(v, &ctx) < -DEFAULT_VERDICT_TOL;
        let var_x = gaussian_normal_ordered_moments(&state, ctx.optical_phase()).unwrap().var_x;
        let sq = var_x < 0.0;
        n_r += negative as usize;
        n_sq += sq as usize;
        contained &= !sq || negative;
    }
    check(
        r_coh.abs() <= 1e-12 && r_min >= -1e-9 && contained && n_r > n_sq,
        format!(
            "coherent r = {r_coh:.1e}; min r over 20 classical = {r_min:.3e}; 720-point grid: {{r < 0}} has {n_r} points, {{var_x < 0}} has {n_sq}, contained: {contained}"
        ),
    )
}

fn monte_carlo() -> Outcome {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    let cases = [
        ("coherent", SignalState::coherent(c(300.0, 0.0)).unwrap(), 0.14, 21u64),
        ("thermal", SignalState::thermal(1.0).unwrap(), 0.5, 22),
    ];
    for (name, state, t2, seed) in cases {
        let ctx = ideal(t2, 1e6, 0.0, state.mean_amplitude());
        let run = simulate_counts(&ClassicalPSampler::new(&state).unwrap(), &ctx, seed, 1_000_000)
            .map_err(|e| e.to_string())?;
        let emp = run.moments();
        let (mean, var) = mean_var_m(&state, &ctx).unwrap();
        let z_mean = (emp.mean - mean) / emp.mean_se;
        let z_var = (emp.var - var) / emp.var_se;
        let hist = histogram_in_range(&run, 60, -6.0, 6.0);
        let pdf = CorrelationPdf::new(&state, &ctx).unwrap();
        let reference = binned_density(|m| pdf.value(m), run.sigma_product, &hist).map_err(|e| e.to_string())?;
        let sup = sup_distance(&hist.densities(), &reference);
        ok &= z_mean.abs() <= 3.0 && z_var.abs() <= 3.0 && sup <= 0.01;
        details.push(format!("{name}: mean {z_mean:+.2} SE, var {z_var:+.2} SE, sup {sup:.4}"));
    }
    within(Duration::from_secs(120), start, details.join("; ")).and_then(|d| check(ok, d))
}

fn dark_noise() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    let states = [
        ("phase squeezed", squeezed(PI), 0.14, 0.6),
        ("amplitude squeezed", squeezed(0.0), 0.14, 2.0),
        ("thermal", SignalState::thermal(2.0).unwrap(), 0.5, 0.0),
    ];
    for (name, state, t2, phase) in states {
        let mut prev: Option<(f64, f64)> = None;
        let mut line = Vec::new();
        for nu in [0.0, 10.0, 100.0] {
            let ctx = device(t2, [0.9, 0.9], [nu, nu], 1e6, phase, c(0.0, 0.0));
            let (m, v) = mean_var_m(&state, &ctx).unwrap();
            if let Some((m0, v0)) = prev {
                ok &= rel(m, m0) < 1e-12 && v > v0;
            }
            prev = Some((m, v));
            line.push(format!("nu={nu}: E={m:.6e} var={v:.6e}"));
        }
        details.push(format!("{name} [{}]", line.join(", ")));
    }
    check(ok, details.join("; "))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("normalization", normalization),
        ("coherent closed form and symmetry", coherent_closed_form),
        ("Gaussian closed form vs product integral", gaussian_oracle),
        ("reductions and single-photon closed form", reductions),
        ("Fock mean", fock_mean),
        ("Gaussian moments by quadrature", gaussian_moments),
        ("nonclassicality D", nonclassicality_d),
        ("nonclassicality r", nonclassicality_r_criterion),
        ("Monte-Carlo closure", monte_carlo),
        ("dark-noise sensitivity", dark_noise),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
