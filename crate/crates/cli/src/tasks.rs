use std::fmt::Write as _;

use hcm::moments::{
    anomalous_by_d, cauchy_schwarz_d, gaussian_normal_ordered_moments, mean_var_m, nonclassicality_r,
    DEFAULT_VERDICT_TOL,
};
use hcm::oracle::{binned_density, histogram_in_range, simulate_counts, sup_distance, ClassicalPSampler};
use hcm::{CorrelationPdf, DetectionContext, Error, Result, SignalState};
use rayon::prelude::*;

use crate::scenario::{default_phi_grid, normalization_constant, Case, PhaseAxis, Scenario, Task};

/// CSV text with leading `#` comment lines.
pub struct Table {
    comments: Vec<String>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    trailer: Vec<String>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table {
            comments: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            trailer: Vec::new(),
        }
    }

    fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        for c in &self.trailer {
            let _ = writeln!(out, "# {c}");
        }
        out
    }
}

fn num(x: f64) -> String {
    format!("{x:.10e}")
}

fn describe(case: &Case) -> String {
    let e = &case.experiment;
    let lon = serde_json::to_string(&e.lon).unwrap_or_default();
    let sig = serde_json::to_string(&e.signal).unwrap_or_default();
    format!(
        "case {}: lon={lon} det=(eta1={}, eta2={}, nu1={}, nu2={}) lo=(mag2={}, phase={}) signal={sig}",
        case.label, e.det.eta1, e.det.eta2, e.det.nu1, e.det.nu2, e.lo.mag2, e.lo.phase
    )
}

fn header(table: &mut Table, scenario: &Scenario, cases: &[Case]) {
    if !scenario.name.is_empty() {
        table.comment(format!("scenario: {}", scenario.name));
    }
    for c in cases {
        table.comment(describe(c));
    }
}

pub fn run(scenario: &Scenario) -> Result<String> {
    scenario.validate()?;
    match scenario.task {
        Task::Pdf if scenario.phi_grid.is_some() => run_pdf_map(scenario),
        Task::Pdf => run_pdf(scenario),
        Task::Moments | Task::Nonclassicality => run_moments(scenario),
        Task::ScanPhase => run_phase_scan(scenario),
        Task::Simulate => run_simulate(scenario),
    }
}

fn with_labels(cases: &[Case]) -> bool {
    cases.len() > 1
}

/// `M_norm, w` per case; `w` is the density of `M_norm = M/N`.
pub fn run_pdf(scenario: &Scenario) -> Result<String> {
    let cases = scenario.cases();
    let labelled = with_labels(&cases);
    let mut table = Table::new(if labelled { &["label", "M_norm", "w"] } else { &["M_norm", "w"] });
    header(&mut table, scenario, &cases);
    let grid = scenario.m_grid.values_without_zero();
    for case in &cases {
        let (norm, what) = normalization_constant(scenario.normalization, &case.experiment)?;
        let state = case.experiment.state()?;
        let ctx = case.experiment.context()?;
        let pdf = CorrelationPdf::new(&state, &ctx)?;
        let (mean, var) = mean_var_m(&state, &ctx)?;
        table.comment(format!(
            "{}: normalization N = {what} = {}; E(M)/N = {}; sd(M)/N = {}",
            case.label,
            num(norm),
            num(mean / norm),
            num(var.sqrt() / norm)
        ));
        let values: Vec<f64> = grid.par_iter().map(|&x| norm * pdf.value(x * norm)).collect();
        for (&x, &w) in grid.iter().zip(&values) {
            let mut cells = vec![num(x), num(w)];
            if labelled {
                cells.insert(0, case.label.clone());
            }
            table.row(cells);
        }
    }
    Ok(table.render())
}

/// Density over the LO phase with the mean and one-sigma band.
pub fn run_pdf_map(scenario: &Scenario) -> Result<String> {
    let cases = scenario.cases();
    let mut table = Table::new(&["label", "phi", "M_norm", "w", "E_M_norm", "sd_M_norm"]);
    header(&mut table, scenario, &cases);
    let phis = scenario.phi_grid.unwrap_or_else(default_phi_grid).values();
    let grid = scenario.m_grid.values_without_zero();
    for case in &cases {
        let (norm, what) = normalization_constant(scenario.normalization, &case.experiment)?;
        table.comment(format!("{}: normalization N = {what} = {}", case.label, num(norm)));
        let state = case.experiment.state()?;
        let base = case.experiment.context()?;
        let rows: Vec<Vec<Vec<String>>> = phis
            .par_iter()
            .map(|&phi| {
                let ctx = base.with_lo_phase(phi)?;
                let pdf = CorrelationPdf::new(&state, &ctx)?;
                let (mean, var) = mean_var_m(&state, &ctx)?;
                let (e, sd) = (num(mean / norm), num(var.sqrt() / norm));
                Ok(grid
                    .iter()
                    .map(|&x| {
                        vec![
                            case.label.clone(),
                            num(phi),
                            num(x),
                            num(norm * pdf.value(x * norm)),
                            e.clone(),
                            sd.clone(),
                        ]
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        for r in rows.into_iter().flatten() {
            table.row(r);
        }
    }
    Ok(table.render())
}

struct PhasePoint {
    phi_lo: f64,
    theta: f64,
    mean: f64,
    var: f64,
    r: f64,
    d: f64,
    d_norm: f64,
    var_x: f64,
    var_n: f64,
    cross: f64,
    by_r: bool,
    by_d: bool,
}

fn phase_point(
    state: &SignalState,
    device: &DetectionContext,
    reference: &DetectionContext,
    phi_lo: f64,
) -> Result<PhasePoint> {
    let ctx = device.with_lo_phase(phi_lo)?;
    let reference = reference.with_lo_phase(phi_lo)?;
    let (mean, var) = mean_var_m(state, &ctx)?;
    let r = nonclassicality_r(var, &reference);
    let theta = ctx.optical_phase();
    let m = gaussian_normal_ordered_moments(state, theta)?;
    let amp2 = state.mean_amplitude().norm_sqr();
    let d = cauchy_schwarz_d(&m);
    Ok(PhasePoint {
        phi_lo,
        theta,
        mean,
        var,
        r,
        d,
        d_norm: if amp2 > 0.0 { d / amp2 } else { f64::NAN },
        var_x: m.var_x,
        var_n: m.var_n,
        cross: m.cross,
        by_r: r < -DEFAULT_VERDICT_TOL,
        by_d: anomalous_by_d(&m, DEFAULT_VERDICT_TOL),
    })
}

/// Moments and indicators against the LO phase.
///
/// `phi_lo` is the LO phase, `theta` the quadrature angle it probes; the
/// normal-ordered columns and `D` are evaluated at `theta`.
pub fn run_phase_scan(scenario: &Scenario) -> Result<String> {
    let cases = scenario.cases();
    let labelled = with_labels(&cases);
    let mut cols = vec![
        "phi_lo",
        "theta",
        "E_M",
        "sd_M",
        "var_M",
        "r",
        "D",
        "D_norm",
        "var_x",
        "var_n",
        "cross",
        "nonclassical_by_r",
        "anomalous_by_d",
        "squeezed",
    ];
    if labelled {
        cols.insert(0, "label");
    }
    let mut table = Table::new(&cols);
    header(&mut table, scenario, &cases);
    table.comment("theta = optical phase probed at LO phase phi_lo; var_x, var_n, cross, D at theta; D_norm = D/|<a>|^2");
    let grid = scenario.phi_grid.unwrap_or_else(default_phi_grid).values();
    for case in &cases {
        let state = case.experiment.state()?;
        if !matches!(state, SignalState::Gaussian { .. }) {
            return Err(Error::UnsupportedState(format!(
                "phase scan needs a Gaussian state, case `{}` is {}",
                case.label,
                state.kind()
            )));
        }
        let device = case.experiment.context()?;
        let reference = case.experiment.reference_context()?;
        // Offset so that the optical axis maps onto theta = grid value.
        let offset = device.with_lo_phase(0.0)?.optical_phase();
        let points: Vec<PhasePoint> = grid
            .par_iter()
            .map(|&p| {
                let phi_lo = match scenario.phase_axis {
                    PhaseAxis::Lo => p,
                    PhaseAxis::Optical => offset - p,
                };
                let mut pt = phase_point(&state, &device, &reference, phi_lo)?;
                if scenario.phase_axis == PhaseAxis::Optical {
                    pt.theta = p;
                }
                Ok(pt)
            })
            .collect::<Result<_>>()?;
        let (mut n_r, mut n_sq, mut contained) = (0usize, 0usize, true);
        for p in &points {
            let squeezed = p.var_x < 0.0;
            n_r += p.by_r as usize;
            n_sq += squeezed as usize;
            contained &= !squeezed || p.by_r;
            let mut cells = vec![
                num(p.phi_lo),
                num(p.theta),
                num(p.mean),
                num(p.var.sqrt()),
                num(p.var),
                num(p.r),
                num(p.d),
                num(p.d_norm),
                num(p.var_x),
                num(p.var_n),
                num(p.cross),
                p.by_r.to_string(),
                p.by_d.to_string(),
                squeezed.to_string(),
            ];
            if labelled {
                cells.insert(0, case.label.clone());
            }
            table.row(cells);
        }
        table.trailer.push(format!(
            "{}: points with r < 0: {n_r}; squeezed points: {n_sq}; squeezed set inside r < 0 set: {contained}; strictly larger: {}",
            case.label,
            contained && n_r > n_sq
        ));
    }
    Ok(table.render())
}

pub fn run_moments(scenario: &Scenario) -> Result<String> {
    let cases = scenario.cases();
    let mut table = Table::new(&[
        "label",
        "E_M",
        "var_M",
        "r",
        "D",
        "var_x",
        "var_n",
        "cross",
        "nonclassical_by_r",
        "anomalous_by_d",
    ]);
    header(&mut table, scenario, &cases);
    table.comment("r uses a coherent reference with the probed <a> (or the configured reference); D at the probed optical phase");
    for case in &cases {
        let state = case.experiment.state()?;
        let ctx = case.experiment.context()?;
        let reference = case.experiment.reference_context()?;
        let (mean, var) = mean_var_m(&state, &ctx)?;
        let r = nonclassicality_r(var, &reference);
        let nom = match state {
            SignalState::Gaussian { .. } => Some(gaussian_normal_ordered_moments(&state, ctx.optical_phase())?),
            _ => None,
        };
        let opt = |v: Option<f64>| v.map(num).unwrap_or_else(|| "nan".into());
        table.row(vec![
            case.label.clone(),
            num(mean),
            num(var),
            num(r),
            opt(nom.as_ref().map(cauchy_schwarz_d)),
            opt(nom.map(|m| m.var_x)),
            opt(nom.map(|m| m.var_n)),
            opt(nom.map(|m| m.cross)),
            (r < -DEFAULT_VERDICT_TOL).to_string(),
            nom.as_ref().is_some_and(|m| anomalous_by_d(m, DEFAULT_VERDICT_TOL)).to_string(),
        ]);
    }
    Ok(table.render())
}

/// Histogram of `M/(σ₁σ₂)` from the photon-counting oracle next to the
/// bin-averaged closed form.
pub fn run_simulate(scenario: &Scenario) -> Result<String> {
    let cases = scenario.cases();
    let [case] = cases.as_slice() else {
        return Err(Error::Config("simulate runs a single case; remove variants".into()));
    };
    let spec = scenario.simulation;
    let state = case.experiment.state()?;
    let ctx = case.experiment.context()?;
    let sampler = ClassicalPSampler::new(&state)?;
    let run = simulate_counts(&sampler, &ctx, spec.seed, spec.samples)?;
    let hist = histogram_in_range(&run, spec.bins, -spec.range, spec.range);
    let pdf = CorrelationPdf::new(&state, &ctx)?;
    let reference = binned_density(|m| pdf.value(m), run.sigma_product, &hist)?;
    let density = hist.densities();
    let emp = run.moments();
    let (mean, var) = mean_var_m(&state, &ctx)?;
    let ref_ctx = case.experiment.reference_context()?;
    let sig4 = ref_ctx.sigma_sq(hcm::Detector::One) * ref_ctx.sigma_sq(hcm::Detector::Two);

    let mut table = Table::new(&["bin_center", "density", "count", "closed_form"]);
    header(&mut table, scenario, &cases);
    table.comment(format!(
        "seed = {}; samples = {}; bins = {}; M in units of sigma1*sigma2 = {}",
        spec.seed,
        spec.samples,
        spec.bins,
        num(run.sigma_product)
    ));
    table.comment(format!(
        "E(M): empirical {} +- {} vs closed form {}",
        num(emp.mean),
        num(emp.mean_se),
        num(mean)
    ));
    table.comment(format!(
        "var(M): empirical {} +- {} vs closed form {}",
        num(emp.var),
        num(emp.var_se),
        num(var)
    ));
    table.comment(format!(
        "r: empirical {} +- {}",
        num(emp.var / sig4 - 1.0),
        num(emp.var_se / sig4)
    ));
    for (i, x) in hist.centers().into_iter().enumerate() {
        table.row(vec![num(x), num(density[i]), hist.counts[i].to_string(), num(reference[i])]);
    }
    table
        .trailer
        .push(format!("sup_distance = {}", num(sup_distance(&density, &reference))));
    Ok(table.render())
}
