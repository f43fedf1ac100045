//! Full gauge Hamiltonian with truncated-integer or quantum-link gauge fields.

use num_complex::Complex64 as C64;

use super::links::{check_basis, raise_amplitude, LinkNormalization};
use super::{bond_hops, mass_energy, Model};
use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::lattice::{CouplingSet, GaugeRep, LatticeSpec, LinkField};
use crate::operator::{hermitian_gather, LinearOperator, MatrixElements};

/// `H = (e²a/2) Σ E_x² - (it/2a) Σ (ψ†_{x+1} U_x ψ_x - h.c.) + m Σ (-1)^x ψ†ψ`.
#[derive(Debug, Clone)]
pub struct WilsonModel {
    spec: LatticeSpec,
    rep: GaugeRep,
    couplings: CouplingSet,
    normalization: LinkNormalization,
    basis: Basis,
    field: LinkField,
    raise: Vec<f64>,
}

pub fn build_full_gauge_hamiltonian(
    spec: &LatticeSpec,
    couplings: &CouplingSet,
    rep: &GaugeRep,
    basis: Basis,
) -> Result<WilsonModel> {
    WilsonModel::new(spec, couplings, rep, basis, LinkNormalization::default())
}

impl WilsonModel {
    pub fn new(
        spec: &LatticeSpec,
        couplings: &CouplingSet,
        rep: &GaugeRep,
        basis: Basis,
        normalization: LinkNormalization,
    ) -> Result<Self> {
        spec.validate()?;
        couplings.validate(spec.n_sites)?;
        if !matches!(rep, GaugeRep::TruncatedInteger { .. } | GaugeRep::QuantumLink { .. }) {
            return Err(Error::config(
                "rep",
                format!("{} is not a truncated-integer or quantum-link field", rep.label()),
            ));
        }
        check_basis(spec, rep, &basis)?;
        let dim = rep.link_dim().expect("link representation");
        let raise = (0..dim as u32)
            .map(|k| raise_amplitude(rep, k, normalization))
            .collect();
        Ok(WilsonModel {
            spec: spec.clone(),
            rep: *rep,
            couplings: couplings.clone(),
            normalization,
            field: LinkField::new(spec, rep)?,
            basis,
            raise,
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn rep(&self) -> &GaugeRep {
        &self.rep
    }

    fn diagonal(&self, key: u128) -> f64 {
        let a = self.spec.spacing;
        let electric: f64 = (0..self.spec.n_sites)
            .map(|l| {
                let e = self.field.value(l, self.basis.key_link(key, l));
                e * e
            })
            .sum();
        0.5 * self.couplings.e * self.couplings.e * a * electric + mass_energy(&self.basis, key, self.couplings.m)
    }
}

impl MatrixElements for WilsonModel {
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
        for f in 0..self.spec.flavors {
            let mask = b.key_occupation(key, f);
            bond_hops(mask, self.spec.n_sites, |x, _y, forward, new_mask, sign| {
                let k = b.key_link(key, x);
                // forward: ψ†_{x+1} U_x ψ_x raises link x; backward is its conjugate.
                let (new_k, amp, coeff) = if forward {
                    (
                        k + 1,
                        self.raise.get(k as usize).copied().unwrap_or(0.0),
                        C64::new(0.0, -hop),
                    )
                } else if k > 0 {
                    (k - 1, self.raise[k as usize - 1], C64::new(0.0, hop))
                } else {
                    return;
                };
                if amp == 0.0 {
                    return;
                }
                let new_key = b.with_link(b.with_occupation(key, f, new_mask), x, new_k);
                if let Some(j) = b.index_of(new_key) {
                    out.push((j, coeff * sign * amp));
                }
            });
        }
    }
}

impl LinearOperator for WilsonModel {
    fn dim(&self) -> usize {
        self.basis.dim()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        hermitian_gather(self, x, y)
    }
}

impl Model for WilsonModel {
    fn basis(&self) -> &Basis {
        &self.basis
    }

    fn descriptor(&self) -> String {
        format!(
            "model=wilson;rep={};norm={:?};N={};F={};conv={:?};e={};t={};m={};a={}",
            self.rep.label(),
            self.normalization,
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Filling;
    use crate::eigen::dense_diag;
    use crate::models::links::gauss_generators;
    use crate::operator::{commutator_defect, hermiticity_defect, linearity_defect};

    #[test]
    fn commutes_with_gauss_generators() {
        let spec = LatticeSpec::new(2, 1).unwrap();
        let rep = GaugeRep::truncated(1).unwrap();
        let basis = Basis::enumerate(&spec, &rep, Filling::PerFlavor(vec![1])).unwrap();
        let h = build_full_gauge_hamiltonian(&spec, &CouplingSet::new(1.3, 0.7).with_mass(0.2), &rep, basis.clone())
            .unwrap();
        for g in gauss_generators(&spec, &rep, &basis).unwrap() {
            assert!(commutator_defect(&h, &g, 20, 11) < 1e-12);
        }
        assert!(hermiticity_defect(&h, 20, 5) < 1e-12);
        assert!(linearity_defect(&h, 20, 6) < 1e-12);
    }

    #[test]
    fn zero_hopping_spectrum_is_electric_energy() {
        let spec = LatticeSpec::new(2, 1).unwrap();
        let rep = GaugeRep::truncated(1).unwrap();
        let basis = Basis::gauge_sector(&spec, &rep, Filling::PerFlavor(vec![1])).unwrap();
        let e = 1.5;
        let mut expected: Vec<f64> = (0..basis.dim())
            .map(|i| {
                basis
                    .state(i)
                    .links
                    .iter()
                    .map(|&k| (k as f64 - 1.0).powi(2))
                    .sum::<f64>()
                    * 0.5
                    * e
                    * e
            })
            .collect();
        expected.sort_by(f64::total_cmp);
        let h = build_full_gauge_hamiltonian(&spec, &CouplingSet::new(e, 0.0), &rep, basis).unwrap();
        let spec_vals = dense_diag(&h).unwrap().eigenvalues;
        for (a, b) in spec_vals.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_mismatched_basis_and_rep() {
        let spec = LatticeSpec::new(2, 1).unwrap();
        let rep = GaugeRep::truncated(1).unwrap();
        let other = GaugeRep::quantum_link(0.5).unwrap();
        let basis = Basis::enumerate(&spec, &other, Filling::PerFlavor(vec![1])).unwrap();
        assert!(build_full_gauge_hamiltonian(&spec, &CouplingSet::default(), &rep, basis.clone()).is_err());
        let integ = GaugeRep::integrated(0.0).unwrap();
        assert!(build_full_gauge_hamiltonian(&spec, &CouplingSet::default(), &integ, basis).is_err());
    }
}
