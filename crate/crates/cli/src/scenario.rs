use std::path::PathBuf;

use hcm::config::{DetConfig, ExperimentConfig, LoConfig, SignalConfig};
use hcm::{Complex64, Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Pdf,
    Moments,
    ScanPhase,
    Nonclassicality,
    Simulate,
}

/// Unit of the `M` axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `σ₁σ₂` of the context.
    #[default]
    SigmaProduct,
    /// `|α_L|² + |⟨â⟩|²`.
    TotalIntensity,
    /// `|α_L|²`.
    LoIntensity,
}

/// Which phase the `phi` grid runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseAxis {
    #[default]
    Lo,
    /// Quadrature angle probed in the strong-LO limit.
    Optical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Grid {
    pub fn validate(&self, name: &str) -> Result<()> {
        if self.points < 2 {
            return Err(Error::Config(format!("{name}.points: need at least 2, got {}", self.points)));
        }
        if !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::Config(format!("{name}: need finite min < max")));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.min + i as f64 * step).collect()
    }

    /// Same points with an exact zero removed; `w` is singular there.
    pub fn values_without_zero(&self) -> Vec<f64> {
        self.values().into_iter().filter(|&x| x != 0.0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub samples: usize,
    pub bins: usize,
    /// Histogram covers `[-range, range]` in units of `σ₁σ₂`.
    pub range: f64,
    pub seed: u64,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        SimulationSpec {
            samples: 1_000_000,
            bins: 60,
            range: 6.0,
            seed: 1,
        }
    }
}

/// Partial override of the base experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<SignalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub det: Option<DetConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<LoConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub task: Task,
    #[serde(default)]
    pub normalization: Normalization,
    pub experiment: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variants: Vec<Variant>,
    #[serde(default = "default_m_grid")]
    pub m_grid: Grid,
    /// Phase scans and, for `pdf`, a density map over the LO phase.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_grid: Option<Grid>,
    #[serde(default)]
    pub phase_axis: PhaseAxis,
    #[serde(default)]
    pub simulation: SimulationSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_m_grid() -> Grid {
    Grid {
        min: -4.0,
        max: 4.0,
        points: 400,
    }
}

pub fn default_phi_grid() -> Grid {
    Grid {
        min: 0.0,
        max: std::f64::consts::TAU,
        points: 361,
    }
}

/// One labelled experiment after applying a variant.
#[derive(Debug, Clone)]
pub struct Case {
    pub label: String,
    pub experiment: ExperimentConfig,
}

impl Scenario {
    /// Accepts a full scenario, or a bare experiment config (which then
    /// runs `task` with default grids).
    pub fn from_json(text: &str, task: Task) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
        if value.get("experiment").is_some() {
            let de = &mut serde_json::Deserializer::from_str(text);
            let mut s: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
                let path = e.path().to_string();
                Error::Config(format!("{path}: {}", e.into_inner()))
            })?;
            s.task = task;
            Ok(s)
        } else {
            Ok(Scenario::bare(ExperimentConfig::from_json(text)?, task))
        }
    }

    pub fn bare(experiment: ExperimentConfig, task: Task) -> Self {
        Scenario {
            name: String::new(),
            task,
            normalization: Normalization::default(),
            experiment,
            variants: Vec::new(),
            m_grid: default_m_grid(),
            phi_grid: None,
            phase_axis: PhaseAxis::default(),
            simulation: SimulationSpec::default(),
            output: None,
        }
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.m_grid.validate("m_grid")?;
        if let Some(g) = &self.phi_grid {
            g.validate("phi_grid")?;
        }
        if self.simulation.samples < 2 {
            return Err(Error::Config("simulation.samples: need at least 2".into()));
        }
        if self.simulation.bins == 0 || !(self.simulation.range > 0.0) {
            return Err(Error::Config("simulation: need bins >= 1 and range > 0".into()));
        }
        for case in self.cases() {
            case.experiment.state().map_err(|e| label_error(&case.label, e))?;
            case.experiment.context().map_err(|e| label_error(&case.label, e))?;
        }
        Ok(())
    }

    pub fn cases(&self) -> Vec<Case> {
        if self.variants.is_empty() {
            return vec![Case {
                label: "base".into(),
                experiment: self.experiment.clone(),
            }];
        }
        self.variants
            .iter()
            .map(|v| {
                let mut experiment = self.experiment.clone();
                if let Some(s) = v.signal {
                    experiment.signal = s;
                }
                if let Some(d) = v.det {
                    experiment.det = d;
                }
                if let Some(lo) = v.lo {
                    experiment.lo = lo;
                }
                Case {
                    label: v.label.clone(),
                    experiment,
                }
            })
            .collect()
    }

    pub fn apply_overrides(&mut self, grid_points: Option<usize>, seed: Option<u64>, samples: Option<usize>, bins: Option<usize>) {
        if let Some(n) = grid_points {
            match (self.task, self.phi_grid.as_mut()) {
                (Task::ScanPhase, Some(g)) => g.points = n,
                _ => self.m_grid.points = n,
            }
        }
        if let Some(s) = seed {
            self.simulation.seed = s;
        }
        if let Some(n) = samples {
            self.simulation.samples = n;
        }
        if let Some(b) = bins {
            self.simulation.bins = b;
        }
    }
}

fn label_error(label: &str, e: Error) -> Error {
    match e {
        Error::Config(msg) => Error::Config(format!("variant `{label}`: {msg}")),
        other => other,
    }
}

/// Normalization constant `N` for a case, with a description for headers.
pub fn normalization_constant(norm: Normalization, experiment: &ExperimentConfig) -> Result<(f64, &'static str)> {
    Ok(match norm {
        Normalization::SigmaProduct => (experiment.context()?.sigma_product(), "sigma1*sigma2"),
        Normalization::TotalIntensity => {
            let mean: Complex64 = experiment.state()?.mean_amplitude();
            (experiment.lo.mag2 + mean.norm_sqr(), "|alpha_L|^2 + |<a>|^2")
        }
        Normalization::LoIntensity => (experiment.lo.mag2, "|alpha_L|^2"),
    })
}

pub const FIGURES: [(u8, &str); 6] = [
    (2, include_str!("../../../scenarios/figure2.json")),
    (3, include_str!("../../../scenarios/figure3.json")),
    (4, include_str!("../../../scenarios/figure4.json")),
    (5, include_str!("../../../scenarios/figure5.json")),
    (6, include_str!("../../../scenarios/figure6.json")),
    (7, include_str!("../../../scenarios/figure7.json")),
];

pub fn figure(number: u8) -> Result<Scenario> {
    let text = FIGURES
        .iter()
        .find(|(n, _)| *n == number)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Config(format!("no figure {number}; available 2-7")))?;
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Config(format!("figure {number}: {}: {}", e.path(), e.inner())))
}
