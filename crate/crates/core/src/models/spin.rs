//! Spin-1/2 chain obtained from the Coulomb gas by the Jordan-Wigner map.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;

use super::{mass_energy, Model};
use crate::basis::{Basis, Statistics};
use crate::coulomb::CoulombKernel;
use crate::error::{Error, Result};
use crate::lattice::{CouplingSet, LatticeSpec};
use crate::operator::{hermitian_gather, LinearOperator, MatrixElements};

/// `H = (t/2a) Σ [e^{iθ} S⁺_{x+1} S⁻_x + h.c.] + (e²a/2) Σ q_x V(x-y) q_y + m Σ (-1)^x (S³_x + 1/2)`
/// with `q_x = S³_x + 1/2 - offset_x`, which is `S³_x` itself in the uniform convention.
#[derive(Debug, Clone)]
pub struct SpinModel {
    spec: LatticeSpec,
    couplings: CouplingSet,
    theta: f64,
    kernel: CoulombKernel,
    basis: Basis,
}

/// Spin-chain phase `θ_s` that reproduces the fermion chain at phase `θ_f`
/// with `particles` fermions: `θ_s = θ_f + π(N/2 + particles - 1)/N`.
/// The spectrum depends only on the total flux `N θ_s mod 2π`.
pub fn jw_twist(n_sites: usize, particles: u32) -> f64 {
    let n = n_sites as f64;
    (PI * (0.5 * n + particles as f64 - 1.0) / n).rem_euclid(TAU)
}

pub fn build_spin_hamiltonian(
    spec: &LatticeSpec,
    couplings: &CouplingSet,
    theta: f64,
    basis: Basis,
) -> Result<SpinModel> {
    SpinModel::new(spec, couplings, theta, basis)
}

impl SpinModel {
    pub fn new(spec: &LatticeSpec, couplings: &CouplingSet, theta: f64, basis: Basis) -> Result<Self> {
        spec.validate()?;
        couplings.validate(spec.n_sites)?;
        if spec.flavors != 1 {
            return Err(Error::Unsupported("the spin chain describes one flavor only".into()));
        }
        if !theta.is_finite() {
            return Err(Error::config("theta", "must be finite"));
        }
        if basis.statistics() != Statistics::Spins || basis.n_sites() != spec.n_sites {
            return Err(Error::config("basis", "spin-chain basis of matching length required"));
        }
        Ok(SpinModel {
            spec: spec.clone(),
            couplings: couplings.clone(),
            theta,
            kernel: CoulombKernel::new(spec.n_sites),
            basis,
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    fn diagonal(&self, key: u128) -> f64 {
        let up = self.basis.key_occupation(key, 0);
        let q: Vec<f64> = (0..self.spec.n_sites)
            .map(|x| self.spec.charge(x, (up >> x) & 1))
            .collect();
        0.5 * self.couplings.e * self.couplings.e * self.spec.spacing * self.kernel.energy(&q)
            + mass_energy(&self.basis, key, self.couplings.m)
    }
}

impl MatrixElements for SpinModel {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn column(&self, i: usize, out: &mut Vec<(usize, C64)>) {
        let b = &self.basis;
        let key = b.key(i);
        let diag = self.diagonal(key);
        if diag != 0.0 {
            out.push((i, C64::new(diag, 0.0)));
        }
        let hop = self.couplings.t / (2.0 * self.spec.spacing);
        if hop == 0.0 {
            return;
        }
        let forward = C64::from_polar(hop, self.theta);
        let up = b.key_occupation(key, 0);
        let n = self.spec.n_sites;
        for x in 0..n {
            let y = (x + 1) % n;
            let (bx, by) = ((up >> x) & 1, (up >> y) & 1);
            if bx == by {
                continue;
            }
            let new_key = b.with_occupation(key, 0, up ^ (1 << x) ^ (1 << y));
            // S⁺_{x+1} S⁻_x carries e^{iθ}; its conjugate moves the up spin back.
            let amp = if bx == 1 { forward } else { forward.conj() };
            if let Some(j) = b.index_of(new_key) {
                out.push((j, amp));
            }
        }
    }
}

impl LinearOperator for SpinModel {
    fn dim(&self) -> usize {
        self.basis.dim()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        hermitian_gather(self, x, y)
    }
}

impl Model for SpinModel {
    fn basis(&self) -> &Basis {
        &self.basis
    }

    fn descriptor(&self) -> String {
        format!(
            "model=spin;theta={};N={};conv={:?};e={};t={};m={};a={}",
            self.theta,
            self.spec.n_sites,
            self.spec.convention,
            self.couplings.e,
            self.couplings.t,
            self.couplings.m,
            self.spec.spacing
        )
    }
}
