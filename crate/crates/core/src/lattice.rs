//! Lattice geometry, link representations and coupling constants.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Largest ring supported by the bit-packed basis keys.
pub const MAX_SITES: usize = 32;

/// How the static background charge enters Gauss's law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GaussConvention {
    /// Offset `F/2` on every site.
    UniformHalf,
    /// Offset `F` on odd sites, `0` on even sites.
    #[default]
    Staggered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub n_sites: usize,
    pub spacing: f64,
    pub flavors: usize,
    pub convention: GaussConvention,
}

impl LatticeSpec {
    /// Periodic ring with `a = 1` and the staggered Gauss convention.
    pub fn new(n_sites: usize, flavors: usize) -> Result<Self> {
        let spec = LatticeSpec {
            n_sites,
            spacing: 1.0,
            flavors,
            convention: GaussConvention::Staggered,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_convention(mut self, convention: GaussConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_spacing(mut self, spacing: f64) -> Result<Self> {
        self.spacing = spacing;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 || !self.n_sites.is_multiple_of(2) {
            return Err(Error::config(
                "n_sites",
                format!("{} is not a positive even integer", self.n_sites),
            ));
        }
        if self.n_sites > MAX_SITES {
            return Err(Error::config(
                "n_sites",
                format!("{} exceeds the supported maximum {MAX_SITES}", self.n_sites),
            ));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(Error::config("spacing", "must be finite and positive"));
        }
        if !(1..=2).contains(&self.flavors) {
            return Err(Error::config("flavors", "must be 1 or 2"));
        }
        Ok(())
    }

    /// `(-1)^x` with site 0 even.
    pub fn stagger(x: usize) -> f64 {
        if x.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// Static charge subtracted from the fermion number at site `x`.
    pub fn charge_offset(&self, x: usize) -> f64 {
        let f = self.flavors as f64;
        match self.convention {
            GaussConvention::UniformHalf => 0.5 * f,
            GaussConvention::Staggered => f * (x % 2) as f64,
        }
    }

    /// `n - offset` for a site occupied by `n` fermions.
    pub fn charge(&self, x: usize, occupation: u32) -> f64 {
        occupation as f64 - self.charge_offset(x)
    }

    /// Shift `(-1)^x / 4` added to every electric-field eigenvalue when the
    /// uniform offset is half-odd; without it integer-spaced links admit no
    /// Gauss-law solution.
    pub fn field_background(&self, x: usize) -> f64 {
        match self.convention {
            GaussConvention::UniformHalf if self.flavors % 2 == 1 => 0.25 * Self::stagger(x),
            _ => 0.0,
        }
    }
}

/// Representation of the gauge links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaugeRep {
    /// Links integrated out; `theta` is the constant background Wilson-line phase.
    IntegratedCoulomb { theta: f64 },
    /// Integer electric field clipped to `-cutoff..=cutoff`.
    TruncatedInteger { cutoff: u32 },
    /// Spin-`two_s/2` quantum link.
    QuantumLink { two_s: u32 },
    /// Two boson modes per link holding `two_s` bosons in total.
    SchwingerBoson { two_s: u32 },
}

impl GaugeRep {
    pub fn integrated(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::config("theta", "must be finite"));
        }
        Ok(GaugeRep::IntegratedCoulomb {
            theta: theta.rem_euclid(TAU),
        })
    }

    pub fn truncated(cutoff: u32) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::config("cutoff", "must be a positive integer"));
        }
        Ok(GaugeRep::TruncatedInteger { cutoff })
    }

    pub fn quantum_link(spin: f64) -> Result<Self> {
        Ok(GaugeRep::QuantumLink {
            two_s: two_s_from(spin)?,
        })
    }

    pub fn schwinger_boson(spin: f64) -> Result<Self> {
        Ok(GaugeRep::SchwingerBoson {
            two_s: two_s_from(spin)?,
        })
    }

    pub fn has_links(&self) -> bool {
        !matches!(self, GaugeRep::IntegratedCoulomb { .. })
    }

    /// Local link dimension, `None` for the integrated representation.
    pub fn link_dim(&self) -> Option<usize> {
        match *self {
            GaugeRep::IntegratedCoulomb { .. } => None,
            GaugeRep::TruncatedInteger { cutoff } => Some(2 * cutoff as usize + 1),
            GaugeRep::QuantumLink { two_s } | GaugeRep::SchwingerBoson { two_s } => Some(two_s as usize + 1),
        }
    }

    /// Link index whose electric field is zero before any background shift.
    pub fn center(&self) -> f64 {
        match *self {
            GaugeRep::IntegratedCoulomb { .. } => 0.0,
            GaugeRep::TruncatedInteger { cutoff } => cutoff as f64,
            GaugeRep::QuantumLink { two_s } | GaugeRep::SchwingerBoson { two_s } => 0.5 * two_s as f64,
        }
    }

    /// Sign with which the charge enters `G_x = E_x - E_{x-1} ± ρ_x`.
    /// Link models hop `c†_{x+1} U_x c_x`; the boson model hops
    /// `c†_x U_x c_{x+1}`, so the charge enters with the opposite sign.
    pub fn charge_sign(&self) -> f64 {
        match self {
            GaugeRep::SchwingerBoson { .. } => -1.0,
            _ => 1.0,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            GaugeRep::IntegratedCoulomb { theta } => format!("integrated(theta={theta})"),
            GaugeRep::TruncatedInteger { cutoff } => format!("truncated(cutoff={cutoff})"),
            GaugeRep::QuantumLink { two_s } => format!("quantum-link(S={})", two_s as f64 / 2.0),
            GaugeRep::SchwingerBoson { two_s } => {
                format!("schwinger-boson(S={})", two_s as f64 / 2.0)
            }
        }
    }
}

fn two_s_from(spin: f64) -> Result<u32> {
    let two_s = 2.0 * spin;
    if !(two_s.is_finite() && two_s >= 1.0 && (two_s - two_s.round()).abs() < 1e-12) {
        return Err(Error::config("spin", format!("{spin} is not a positive half-integer")));
    }
    Ok(two_s.round() as u32)
}

/// Electric-field value of each link index on a given lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkField {
    pub center: f64,
    pub background: Vec<f64>,
}

impl LinkField {
    pub fn new(spec: &LatticeSpec, rep: &GaugeRep) -> Result<Self> {
        if !rep.has_links() {
            return Err(Error::Unsupported(
                "integrated representation carries no link field".into(),
            ));
        }
        // Boson occupations are physical; no background shift is possible.
        let background = match rep {
            GaugeRep::SchwingerBoson { .. } => vec![0.0; spec.n_sites],
            _ => (0..spec.n_sites).map(|x| spec.field_background(x)).collect(),
        };
        Ok(LinkField {
            center: rep.center(),
            background,
        })
    }

    pub fn value(&self, link: usize, index: u32) -> f64 {
        index as f64 - self.center + self.background[link]
    }
}

/// Coupling constants in units where energies are measured in `t/a`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSet {
    /// Gauge coupling `e_L`.
    pub e: f64,
    /// Hopping `t`.
    pub t: f64,
    /// Staggered mass.
    pub m: f64,
    pub t_f: f64,
    pub t_b: f64,
    pub u: f64,
    pub gamma: f64,
    /// Boson-model gauge coupling.
    pub g: f64,
    /// Fermion site potential; `None` selects `m (-1)^x`.
    pub v_f: Option<Vec<f64>>,
    /// Site potentials for boson species 1 and 2; `None` selects zero.
    pub v_b: [Option<Vec<f64>>; 2],
}

impl Default for CouplingSet {
    fn default() -> Self {
        CouplingSet {
            e: 1.0,
            t: 1.0,
            m: 0.0,
            t_f: 1.0,
            t_b: 1.0,
            u: 0.0,
            gamma: 0.0,
            g: 1.0,
            v_f: None,
            v_b: [None, None],
        }
    }
}

impl CouplingSet {
    pub fn new(e: f64, t: f64) -> Self {
        CouplingSet {
            e,
            t,
            ..Default::default()
        }
    }

    pub fn with_mass(mut self, m: f64) -> Self {
        self.m = m;
        self
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        let finite = [self.e, self.t, self.m, self.t_f, self.t_b, self.u, self.gamma, self.g];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("couplings", "all couplings must be finite"));
        }
        if self.e < 0.0 {
            return Err(Error::config("e", "must be non-negative"));
        }
        if self.t < 0.0 {
            return Err(Error::config("t", "must be non-negative"));
        }
        if self.gamma < 0.0 {
            return Err(Error::config("gamma", "must be non-negative"));
        }
        let arrays = [("v_f", &self.v_f), ("v_b1", &self.v_b[0]), ("v_b2", &self.v_b[1])];
        for (field, v) in arrays {
            if let Some(v) = v {
                if v.len() != n_sites {
                    return Err(Error::config(
                        field,
                        format!("length {} differs from n_sites {n_sites}", v.len()),
                    ));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::config(field, "entries must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn fermion_potential(&self, x: usize) -> f64 {
        match &self.v_f {
            Some(v) => v[x],
            None => self.m * LatticeSpec::stagger(x),
        }
    }

    pub fn boson_potential(&self, species: usize, x: usize) -> f64 {
        self.v_b[species].as_ref().map_or(0.0, |v| v[x])
    }

    /// Largest energy scale of the microscopic penalty Hamiltonian.
    pub fn bare_scale(&self, n_sites: usize) -> f64 {
        let mut scale = self.t_f.abs().max(self.t_b.abs()).max(4.0 * self.u.abs());
        for x in 0..n_sites {
            scale = scale.max(self.fermion_potential(x).abs());
            for s in 0..2 {
                scale = scale.max(self.boson_potential(s, x).abs());
            }
        }
        scale
    }

    /// Non-fatal diagnostics; a penalty must dominate the bare scales.
    pub fn warnings(&self, n_sites: usize) -> Vec<String> {
        let mut out = Vec::new();
        let scale = self.bare_scale(n_sites);
        if self.gamma > 0.0 && self.gamma < 10.0 * scale {
            out.push(format!(
                "penalty gamma={} is below ten times the bare scale {scale}",
                self.gamma
            ));
        }
        out
    }

    /// Boson-model couplings reproducing the spin-`two_s/2` quantum-link
    /// Hamiltonian with these `e`, `t`, `m`.
    pub fn matched_boson(&self, spec: &LatticeSpec, two_s: u32) -> CouplingSet {
        CouplingSet {
            t: self.t * boson_hopping_scale(spec.spacing, two_s),
            g: self.e * spec.spacing.sqrt(),
            ..self.clone()
        }
    }
}

/// Factor converting the link-model hopping `t` into the boson-model hopping:
/// `1 / (2a sqrt(S(S+1)))`, matching the Casimir-normalized quantum link.
pub fn boson_hopping_scale(spacing: f64, two_s: u32) -> f64 {
    let s = 0.5 * two_s as f64;
    1.0 / (2.0 * spacing * (s * (s + 1.0)).sqrt())
}
