//! Gauge-integrated Hamiltonian: fermions with a long-range Coulomb interaction.

use num_complex::Complex64 as C64;

use super::{bond_hops, mass_energy, Model};
use crate::basis::{Basis, Filling, LinkSpace, Statistics};
use crate::coulomb::CoulombKernel;
use crate::error::{Error, Result};
use crate::lattice::{CouplingSet, GaugeRep, LatticeSpec};
use crate::operator::{hermitian_gather, LinearOperator, MatrixElements};

/// Treatment of the constant mode of the electric field on the ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroMode {
    /// Dropped; `theta` enters as a classical hopping phase.
    #[default]
    Classical,
    /// Kept as an integer winding `w` in `-cutoff..=cutoff`, the value of the
    /// last link. Boundary hops shift `w`; requires `theta = 0`.
    Quantized { cutoff: u32 },
}

impl ZeroMode {
    pub fn link_space(&self) -> LinkSpace {
        match *self {
            ZeroMode::Classical => LinkSpace::NONE,
            ZeroMode::Quantized { cutoff } => LinkSpace {
                count: 1,
                dim: 2 * cutoff as usize + 1,
            },
        }
    }
}

/// `H = (e²a/2) Σ ρ_x V(x-y) ρ_y - (it/2a) Σ_f Σ_x (e^{iθ} c†_{f,x+1} c_{f,x} - h.c.) + m Σ (-1)^x n`,
/// plus `(e²a/2) K²/N` with `K = Σ_x E_x` when the zero mode is quantized.
#[derive(Debug, Clone)]
pub struct CoulombGasModel {
    spec: LatticeSpec,
    couplings: CouplingSet,
    theta: f64,
    zero_mode: ZeroMode,
    kernel: CoulombKernel,
    basis: Basis,
}

pub fn build_gauge_integrated(
    spec: &LatticeSpec,
    couplings: &CouplingSet,
    rep: &GaugeRep,
    zero_mode: ZeroMode,
    basis: Basis,
) -> Result<CoulombGasModel> {
    CoulombGasModel::new(spec, couplings, rep, zero_mode, basis)
}

impl CoulombGasModel {
    pub fn new(
        spec: &LatticeSpec,
        couplings: &CouplingSet,
        rep: &GaugeRep,
        zero_mode: ZeroMode,
        basis: Basis,
    ) -> Result<Self> {
        spec.validate()?;
        couplings.validate(spec.n_sites)?;
        let GaugeRep::IntegratedCoulomb { theta } = *rep else {
            return Err(Error::config("rep", format!("{} is not integrated", rep.label())));
        };
        if matches!(zero_mode, ZeroMode::Quantized { .. }) && theta != 0.0 {
            return Err(Error::config(
                "theta",
                "a quantized zero mode replaces the classical phase; theta must be 0",
            ));
        }
        if basis.n_sites() != spec.n_sites
            || basis.flavors() != spec.flavors
            || basis.statistics() != Statistics::Fermions
            || basis.links() != zero_mode.link_space()
        {
            return Err(Error::config("basis", "basis does not match the integrated model"));
        }
        Ok(CoulombGasModel {
            spec: spec.clone(),
            couplings: couplings.clone(),
            theta,
            zero_mode,
            kernel: CoulombKernel::new(spec.n_sites),
            basis,
        })
    }

    /// Basis matching `zero_mode` for the given filling.
    pub fn basis_for(spec: &LatticeSpec, zero_mode: ZeroMode, filling: Filling) -> Result<Basis> {
        Basis::build(
            spec.n_sites,
            spec.flavors,
            Statistics::Fermions,
            zero_mode.link_space(),
            filling,
        )
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn charges(&self, key: u128) -> Vec<f64> {
        (0..self.spec.n_sites)
            .map(|x| self.spec.charge(x, self.basis.site_occupation(key, x)))
            .collect()
    }

    /// Coulomb energy including the quantized zero mode when present.
    pub fn coulomb_energy(&self, key: u128) -> f64 {
        let n = self.spec.n_sites;
        let rho = self.charges(key);
        let mut energy = self.kernel.energy(&rho);
        if let ZeroMode::Quantized { cutoff } = self.zero_mode {
            let w = self.basis.key_link(key, 0) as f64 - cutoff as f64;
            let last = w + self.spec.field_background(n - 1);
            let k_total = n as f64 * last - rho.iter().enumerate().map(|(y, r)| (n - y) as f64 * r).sum::<f64>();
            energy += k_total * k_total / n as f64;
        }
        0.5 * self.couplings.e * self.couplings.e * self.spec.spacing * energy
    }
}

impl MatrixElements for CoulombGasModel {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn column(&self, i: usize, out: &mut Vec<(usize, C64)>) {
        let b = &self.basis;
        let key = b.key(i);
        let diag = self.coulomb_energy(key) + mass_energy(b, key, self.couplings.m);
        if diag != 0.0 {
            out.push((i, C64::new(diag, 0.0)));
        }
        let hop = self.couplings.t / (2.0 * self.spec.spacing);
        if hop == 0.0 {
            return;
        }
        let n = self.spec.n_sites;
        let forward_amp = C64::new(0.0, -hop) * C64::from_polar(1.0, self.theta);
        for f in 0..self.spec.flavors {
            let mask = b.key_occupation(key, f);
            bond_hops(mask, n, |x, _y, forward, new_mask, sign| {
                let mut new_key = b.with_occupation(key, f, new_mask);
                if let ZeroMode::Quantized { cutoff } = self.zero_mode {
                    if x == n - 1 {
                        let w = b.key_link(key, 0);
                        let new_w = if forward {
                            if w >= 2 * cutoff {
                                return;
                            }
                            w + 1
                        } else {
                            if w == 0 {
                                return;
                            }
                            w - 1
                        };
                        new_key = b.with_link(new_key, 0, new_w);
                    }
                }
                let amp = if forward { forward_amp } else { forward_amp.conj() };
                if let Some(j) = b.index_of(new_key) {
                    out.push((j, amp * sign));
                }
            });
        }
    }
}

impl LinearOperator for CoulombGasModel {
    fn dim(&self) -> usize {
        self.basis.dim()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        hermitian_gather(self, x, y)
    }
}

impl Model for CoulombGasModel {
    fn basis(&self) -> &Basis {
        &self.basis
    }

    fn descriptor(&self) -> String {
        let zm = match self.zero_mode {
            ZeroMode::Classical => "classical".to_string(),
            ZeroMode::Quantized { cutoff } => format!("quantized({cutoff})"),
        };
        format!(
            "model=coulomb-gas;zero_mode={zm};theta={};N={};F={};conv={:?};e={};t={};m={};a={}",
            self.theta,
            self.spec.n_sites,
            self.spec.flavors,
            self.spec.convention,
            self.couplings.e,
            self.couplings.t,
            self.couplings.m,
            self.spec.spacing
        )
    }
}
