//! Run configuration: TOML with dotted sections, unknown keys rejected.

use serde::{Deserialize, Serialize};

use schwinger_core::lattice::{CouplingSet, GaugeRep, GaussConvention, LatticeSpec};
use schwinger_core::models::{LinkNormalization, ZeroMode};
use schwinger_core::{Error, Filling, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Wilson,
    CoulombGas,
    Spin,
    SchwingerBoson,
    Penalty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Spectrum,
    Gap,
    Condensate,
    PenaltyScan,
    QlmScan,
    StrongCoupling,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Gap => "gap",
            Task::Condensate => "condensate",
            Task::PenaltyScan => "penalty-scan",
            Task::QlmScan => "qlm-scan",
            Task::StrongCoupling => "strong-coupling",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    Staggered,
    UniformHalf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepKind {
    Integrated,
    Truncated,
    QuantumLink,
    SchwingerBoson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Casimir,
    Bare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroModeKind {
    Classical,
    Quantized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    /// Must match the subcommand when present.
    pub task: Option<Task>,
    pub lattice: LatticeSection,
    #[serde(default)]
    pub gauge: GaugeSection,
    #[serde(default)]
    pub couplings: CouplingSection,
    #[serde(default)]
    pub sector: SectorSection,
    #[serde(default)]
    pub solver: SolverSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub n_sites: usize,
    #[serde(default = "one_usize")]
    pub flavors: usize,
    #[serde(default = "one_f64")]
    pub spacing: f64,
    #[serde(default = "staggered")]
    pub convention: Convention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaugeSection {
    pub rep: Option<RepKind>,
    pub theta: f64,
    pub cutoff: u32,
    pub spin: f64,
    pub normalization: Normalization,
    pub zero_mode: ZeroModeKind,
    pub zero_mode_cutoff: u32,
    /// Boson-model hopping per unit link-model `t`; the quantum-link match when absent.
    pub boson_rescale: Option<f64>,
}

impl Default for GaugeSection {
    fn default() -> Self {
        GaugeSection {
            rep: None,
            theta: 0.0,
            cutoff: 2,
            spin: 0.5,
            normalization: Normalization::Casimir,
            zero_mode: ZeroModeKind::Classical,
            zero_mode_cutoff: 8,
            boson_rescale: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingSection {
    pub e: f64,
    pub t: f64,
    pub m: f64,
    pub t_f: f64,
    pub t_b: f64,
    pub u: f64,
    pub gamma: f64,
    pub g: f64,
}

impl Default for CouplingSection {
    fn default() -> Self {
        let c = CouplingSet::default();
        CouplingSection {
            e: c.e,
            t: c.t,
            m: c.m,
            t_f: c.t_f,
            t_b: c.t_b,
            u: c.u,
            gamma: c.gamma,
            g: c.g,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectorSection {
    /// Particles per flavor; half filling when absent.
    pub particles: Option<Vec<u32>>,
    /// Total particle number over flavors.
    pub total: Option<u32>,
    #[serde(default)]
    pub unrestricted: bool,
    /// Restrict link models to the Gauss-law sector (penalty models never are).
    pub gauge_projected: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub k: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        SolverSection {
            k: s.k,
            tol: s.tol,
            max_iter: s.max_iter,
            seed: s.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub gammas: Vec<f64>,
    pub spins: Vec<f64>,
    pub reference_cutoff: u32,
}

impl Default for ScanSection {
    fn default() -> Self {
        ScanSection {
            gammas: vec![10.0, 20.0, 40.0, 80.0, 160.0],
            spins: vec![0.5, 1.0, 1.5, 2.0],
            reference_cutoff: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: ".".into() }
    }
}

fn one_usize() -> usize {
    1
}
fn one_f64() -> f64 {
    1.0
}
fn staggered() -> Convention {
    Convention::Staggered
}

pub const SWEEP_PARAMETERS: [&str; 11] = [
    "e", "t", "m", "t_f", "t_b", "u", "gamma", "g", "theta", "n_sites", "spacing",
];

fn bad(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Config {
        field,
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self, task: Task) -> Result<(), Error> {
        if let Some(t) = self.task {
            if t != task {
                return Err(bad(
                    "task",
                    format!("config names {} but the command is {}", t.name(), task.name()),
                ));
            }
        }
        if let Some(s) = &self.sweep {
            if !SWEEP_PARAMETERS.contains(&s.parameter.as_str()) {
                return Err(bad("sweep.parameter", format!("unknown parameter '{}'", s.parameter)));
            }
            if s.values.is_empty() {
                return Err(bad("sweep.values", "empty"));
            }
            if s.values.iter().any(|v| !v.is_finite()) {
                return Err(bad("sweep.values", "values must be finite"));
            }
            for (i, v) in s.values.iter().enumerate() {
                if s.values[..i].contains(v) {
                    return Err(bad("sweep.values", format!("repeated value {v}")));
                }
            }
        }
        let exclusive = [
            self.sector.particles.is_some(),
            self.sector.total.is_some(),
            self.sector.unrestricted,
        ];
        if exclusive.iter().filter(|b| **b).count() > 1 {
            return Err(bad(
                "sector",
                "particles, total and unrestricted are mutually exclusive",
            ));
        }
        if self.solver.k == 0 {
            return Err(bad("solver.k", "must be at least 1"));
        }
        // Every sweep point must build.
        for point in self.points()? {
            point.spec()?;
            point.couplings()?.validate(point.lattice.n_sites)?;
            point.rep()?;
        }
        Ok(())
    }

    /// The configuration at every sweep point, in sweep order.
    pub fn points(&self) -> Result<Vec<ExperimentConfig>, Error> {
        let Some(s) = &self.sweep else {
            return Ok(vec![self.clone()]);
        };
        s.values.iter().map(|&v| self.with_parameter(&s.parameter, v)).collect()
    }

    pub fn sweep_value(&self) -> Option<(String, f64)> {
        let s = self.sweep.as_ref()?;
        let v = match s.parameter.as_str() {
            "e" => self.couplings.e,
            "t" => self.couplings.t,
            "m" => self.couplings.m,
            "t_f" => self.couplings.t_f,
            "t_b" => self.couplings.t_b,
            "u" => self.couplings.u,
            "gamma" => self.couplings.gamma,
            "g" => self.couplings.g,
            "theta" => self.gauge.theta,
            "n_sites" => self.lattice.n_sites as f64,
            "spacing" => self.lattice.spacing,
            _ => return None,
        };
        Some((s.parameter.clone(), v))
    }

    fn with_parameter(&self, name: &str, v: f64) -> Result<ExperimentConfig, Error> {
        let mut c = self.clone();
        match name {
            "e" => c.couplings.e = v,
            "t" => c.couplings.t = v,
            "m" => c.couplings.m = v,
            "t_f" => c.couplings.t_f = v,
            "t_b" => c.couplings.t_b = v,
            "u" => c.couplings.u = v,
            "gamma" => c.couplings.gamma = v,
            "g" => c.couplings.g = v,
            "theta" => c.gauge.theta = v,
            "spacing" => c.lattice.spacing = v,
            "n_sites" => {
                if v.fract() != 0.0 || v < 1.0 {
                    return Err(bad(
                        "sweep.values",
                        format!("n_sites value {v} is not a positive integer"),
                    ));
                }
                c.lattice.n_sites = v as usize;
            }
            _ => return Err(bad("sweep.parameter", format!("unknown parameter '{name}'"))),
        }
        Ok(c)
    }

    pub fn spec(&self) -> Result<LatticeSpec, Error> {
        let convention = match self.lattice.convention {
            Convention::Staggered => GaussConvention::Staggered,
            Convention::UniformHalf => GaussConvention::UniformHalf,
        };
        LatticeSpec::new(self.lattice.n_sites, self.lattice.flavors)?
            .with_convention(convention)
            .with_spacing(self.lattice.spacing)
    }

    pub fn couplings(&self) -> Result<CouplingSet, Error> {
        let c = &self.couplings;
        Ok(CouplingSet {
            e: c.e,
            t: c.t,
            m: c.m,
            t_f: c.t_f,
            t_b: c.t_b,
            u: c.u,
            gamma: c.gamma,
            g: c.g,
            ..CouplingSet::default()
        })
    }

    /// The representation, defaulting to the one the model needs.
    pub fn rep(&self) -> Result<GaugeRep, Error> {
        let kind = self.gauge.rep.unwrap_or(match self.model {
            ModelKind::Wilson => RepKind::Truncated,
            ModelKind::CoulombGas | ModelKind::Spin => RepKind::Integrated,
            ModelKind::SchwingerBoson | ModelKind::Penalty => RepKind::SchwingerBoson,
        });
        let allowed = match self.model {
            ModelKind::Wilson => matches!(kind, RepKind::Truncated | RepKind::QuantumLink),
            ModelKind::CoulombGas | ModelKind::Spin => kind == RepKind::Integrated,
            ModelKind::SchwingerBoson | ModelKind::Penalty => kind == RepKind::SchwingerBoson,
        };
        if !allowed {
            return Err(bad(
                "gauge.rep",
                format!("{kind:?} does not fit model {:?}", self.model),
            ));
        }
        match kind {
            RepKind::Integrated => GaugeRep::integrated(self.gauge.theta),
            RepKind::Truncated => GaugeRep::truncated(self.gauge.cutoff),
            RepKind::QuantumLink => GaugeRep::quantum_link(self.gauge.spin),
            RepKind::SchwingerBoson => GaugeRep::schwinger_boson(self.gauge.spin),
        }
    }

    pub fn normalization(&self) -> LinkNormalization {
        match self.gauge.normalization {
            Normalization::Casimir => LinkNormalization::Casimir,
            Normalization::Bare => LinkNormalization::Bare,
        }
    }

    pub fn zero_mode(&self) -> ZeroMode {
        match self.gauge.zero_mode {
            ZeroModeKind::Classical => ZeroMode::Classical,
            ZeroModeKind::Quantized => ZeroMode::Quantized {
                cutoff: self.gauge.zero_mode_cutoff,
            },
        }
    }

    pub fn filling(&self, spec: &LatticeSpec) -> Filling {
        if let Some(p) = &self.sector.particles {
            Filling::PerFlavor(p.clone())
        } else if let Some(t) = self.sector.total {
            Filling::Total(t)
        } else if self.sector.unrestricted {
            Filling::Unrestricted
        } else {
            Filling::half(spec)
        }
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            k: self.solver.k,
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            seed: self.solver.seed,
            ..SolverConfig::default()
        }
    }
}
