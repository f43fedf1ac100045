//! Schwinger-boson links: the gauge-invariant target model and the
//! microscopic model protected by an energy penalty.
//!
//! Link index `k` stores `n⁽²⁾ = k`, `n⁽¹⁾ = 2S - k`, so `E = k - S`.

use num_complex::Complex64 as C64;

use super::links::{check_basis, gauss_generators, gauss_penalty, spin_raise};
use super::{bond_hops, mass_energy, Model};
use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::lattice::{CouplingSet, GaugeRep, LatticeSpec};
use crate::operator::{hermitian_gather, DiagonalOperator, LinearOperator, MatrixElements};

fn two_s_of(rep: &GaugeRep) -> Result<u32> {
    match *rep {
        GaugeRep::SchwingerBoson { two_s } => Ok(two_s),
        _ => Err(Error::config(
            "rep",
            format!("{} is not a Schwinger-boson link", rep.label()),
        )),
    }
}

/// `H = -t Σ (c†_x b⁽²⁾†_x b⁽¹⁾_x c_{x+1} + h.c.) + m Σ (-1)^x c†c + (g²/8) Σ (n⁽²⁾ - n⁽¹⁾)²`,
/// summed over flavors for the hopping and mass.
#[derive(Debug, Clone)]
pub struct BosonModel {
    spec: LatticeSpec,
    couplings: CouplingSet,
    two_s: u32,
    basis: Basis,
}

pub fn build_schwinger_boson_model(
    spec: &LatticeSpec,
    couplings: &CouplingSet,
    rep: &GaugeRep,
    basis: Basis,
) -> Result<BosonModel> {
    spec.validate()?;
    couplings.validate(spec.n_sites)?;
    let two_s = two_s_of(rep)?;
    check_basis(spec, rep, &basis)?;
    Ok(BosonModel {
        spec: spec.clone(),
        couplings: couplings.clone(),
        two_s,
        basis,
    })
}

impl BosonModel {
    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }
}

fn imbalance(two_s: u32, k: u32) -> f64 {
    2.0 * k as f64 - two_s as f64
}

impl MatrixElements for BosonModel {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn column(&self, i: usize, out: &mut Vec<(usize, C64)>) {
        let b = &self.basis;
        let key = b.key(i);
        let g2 = self.couplings.g * self.couplings.g;
        let electric: f64 = (0..self.spec.n_sites)
            .map(|l| imbalance(self.two_s, b.key_link(key, l)).powi(2))
            .sum();
        let diag = g2 / 8.0 * electric + mass_energy(b, key, self.couplings.m);
        if diag != 0.0 {
            out.push((i, C64::new(diag, 0.0)));
        }
        let t = self.couplings.t;
        if t == 0.0 {
            return;
        }
        for f in 0..self.spec.flavors {
            let mask = b.key_occupation(key, f);
            bond_hops(mask, self.spec.n_sites, |x, _y, forward, new_mask, sign| {
                let k = b.key_link(key, x);
                // c†_x b⁽²⁾† b⁽¹⁾ c_{x+1} moves the fermion from x+1 to x and raises k.
                let (new_k, amp) = if !forward {
                    (k + 1, spin_raise(self.two_s, k))
                } else if k > 0 {
                    (k - 1, spin_raise(self.two_s, k - 1))
                } else {
                    return;
                };
                if amp == 0.0 {
                    return;
                }
                let new_key = b.with_link(b.with_occupation(key, f, new_mask), x, new_k);
                if let Some(j) = b.index_of(new_key) {
                    out.push((j, C64::new(-t * sign * amp, 0.0)));
                }
            });
        }
    }
}

impl LinearOperator for BosonModel {
    fn dim(&self) -> usize {
        self.basis.dim()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        hermitian_gather(self, x, y)
    }
}

impl Model for BosonModel {
    fn basis(&self) -> &Basis {
        &self.basis
    }

    fn descriptor(&self) -> String {
        format!(
            "model=schwinger-boson;S={};N={};F={};conv={:?};t={};g={};m={}",
            self.two_s as f64 / 2.0,
            self.spec.n_sites,
            self.spec.flavors,
            self.spec.convention,
            self.couplings.t,
            self.couplings.g,
            self.couplings.m
        )
    }
}

/// `H = H₀ + Γ Σ_x G_x²` with
/// `H₀ = -Σ [t_F (c†_x c_{x+1} + h.c.) - t_B (b⁽²⁾†_x b⁽¹⁾_x + h.c.)] + Σ v_F n + Σ v_Bσ n⁽σ⁾ + U Σ (n⁽²⁾ - n⁽¹⁾)²`.
#[derive(Debug, Clone)]
pub struct PenaltyModel {
    spec: LatticeSpec,
    rep: GaugeRep,
    couplings: CouplingSet,
    two_s: u32,
    basis: Basis,
    penalty: DiagonalOperator,
    bare_diagonal: Vec<f64>,
}

pub fn build_penalty_model(
    spec: &LatticeSpec,
    couplings: &CouplingSet,
    rep: &GaugeRep,
    basis: Basis,
) -> Result<PenaltyModel> {
    spec.validate()?;
    couplings.validate(spec.n_sites)?;
    let two_s = two_s_of(rep)?;
    check_basis(spec, rep, &basis)?;
    for w in couplings.warnings(spec.n_sites) {
        log::warn!("{w}");
    }
    let penalty = gauss_penalty(&gauss_generators(spec, rep, &basis)?);
    let bare_diagonal = (0..basis.dim())
        .map(|i| {
            let key = basis.key(i);
            let mut d = 0.0;
            for x in 0..spec.n_sites {
                let n = basis.site_occupation(key, x) as f64;
                let k = basis.key_link(key, x);
                let n2 = k as f64;
                let n1 = (two_s - k) as f64;
                d += couplings.fermion_potential(x) * n
                    + couplings.boson_potential(0, x) * n1
                    + couplings.boson_potential(1, x) * n2
                    + couplings.u * (n2 - n1) * (n2 - n1);
            }
            d
        })
        .collect();
    Ok(PenaltyModel {
        spec: spec.clone(),
        rep: *rep,
        couplings: couplings.clone(),
        two_s,
        basis,
        penalty,
        bare_diagonal,
    })
}

impl PenaltyModel {
    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn rep(&self) -> &GaugeRep {
        &self.rep
    }

    pub fn gamma(&self) -> f64 {
        self.couplings.gamma
    }

    /// Same microscopic model at another penalty strength.
    pub fn with_gamma(&self, gamma: f64) -> Result<PenaltyModel> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::config("gamma", "must be finite and non-negative"));
        }
        let mut out = self.clone();
        out.couplings.gamma = gamma;
        Ok(out)
    }

    /// The bare Hamiltonian `H₀`.
    pub fn bare(&self) -> PenaltyModel {
        let mut out = self.clone();
        out.couplings.gamma = 0.0;
        out
    }

    /// `Σ_x G_x²`.
    pub fn penalty(&self) -> &DiagonalOperator {
        &self.penalty
    }

    pub fn generators(&self) -> Result<Vec<DiagonalOperator>> {
        gauss_generators(&self.spec, &self.rep, &self.basis)
    }
}

impl MatrixElements for PenaltyModel {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn column(&self, i: usize, out: &mut Vec<(usize, C64)>) {
        let b = &self.basis;
        let key = b.key(i);
        let diag = self.bare_diagonal[i] + self.couplings.gamma * self.penalty.values[i];
        if diag != 0.0 {
            out.push((i, C64::new(diag, 0.0)));
        }
        let t_f = self.couplings.t_f;
        if t_f != 0.0 {
            for f in 0..self.spec.flavors {
                let mask = b.key_occupation(key, f);
                bond_hops(mask, self.spec.n_sites, |_x, _y, _forward, new_mask, sign| {
                    if let Some(j) = b.index_of(b.with_occupation(key, f, new_mask)) {
                        out.push((j, C64::new(-t_f * sign, 0.0)));
                    }
                });
            }
        }
        let t_b = self.couplings.t_b;
        if t_b != 0.0 {
            for l in 0..self.spec.n_sites {
                let k = b.key_link(key, l);
                if k < self.two_s {
                    if let Some(j) = b.index_of(b.with_link(key, l, k + 1)) {
                        out.push((j, C64::new(t_b * spin_raise(self.two_s, k), 0.0)));
                    }
                }
                if k > 0 {
                    if let Some(j) = b.index_of(b.with_link(key, l, k - 1)) {
                        out.push((j, C64::new(t_b * spin_raise(self.two_s, k - 1), 0.0)));
                    }
                }
            }
        }
    }
}

impl LinearOperator for PenaltyModel {
    fn dim(&self) -> usize {
        self.basis.dim()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        hermitian_gather(self, x, y)
    }
}

impl Model for PenaltyModel {
    fn basis(&self) -> &Basis {
        &self.basis
    }

    fn descriptor(&self) -> String {
        format!(
            "model=penalty;S={};N={};F={};conv={:?};t_f={};t_b={};u={};m={};gamma={}",
            self.two_s as f64 / 2.0,
            self.spec.n_sites,
            self.spec.flavors,
            self.spec.convention,
            self.couplings.t_f,
            self.couplings.t_b,
            self.couplings.u,
            self.couplings.m,
            self.couplings.gamma
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Filling;
    use crate::eigen::dense_diag;
    use crate::models::{build_full_gauge_hamiltonian, gauss_generators};
    use crate::operator::{commutator_defect, hermiticity_defect, to_dense, SparseMatrix};

    fn spec2() -> LatticeSpec {
        LatticeSpec::new(2, 1).unwrap()
    }

    #[test]
    fn matches_quantum_link_model_after_matching() {
        for (n, two_s) in [(2usize, 1u32), (2, 2), (4, 1), (4, 2)] {
            let spec = LatticeSpec::new(n, 1).unwrap();
            let c = CouplingSet::new(1.1, 1.0).with_mass(0.35);
            let qlm = GaugeRep::QuantumLink { two_s };
            let bos = GaugeRep::SchwingerBoson { two_s };
            let fill = Filling::half(&spec);
            let h_q =
                build_full_gauge_hamiltonian(&spec, &c, &qlm, Basis::gauge_sector(&spec, &qlm, fill.clone()).unwrap())
                    .unwrap();
            let h_b = build_schwinger_boson_model(
                &spec,
                &c.matched_boson(&spec, two_s),
                &bos,
                Basis::gauge_sector(&spec, &bos, fill).unwrap(),
            )
            .unwrap();
            let a = dense_diag(&h_q).unwrap().eigenvalues;
            let b = dense_diag(&h_b).unwrap().eigenvalues;
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-10, "N={n} 2S={two_s}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn conserves_link_totals_and_is_hermitian() {
        let spec = spec2();
        let rep = GaugeRep::schwinger_boson(0.5).unwrap();
        let mut c = CouplingSet::new(0.0, 1.0);
        c.g = 0.0;
        let basis = Basis::enumerate(&spec, &rep, Filling::PerFlavor(vec![1])).unwrap();
        let h = build_schwinger_boson_model(&spec, &c, &rep, basis.clone()).unwrap();
        let dense = to_dense(&h).unwrap();
        assert_eq!((&dense - dense.adjoint()).camax(), 0.0);
        assert!(hermiticity_defect(&h, 20, 3) < 1e-12);
        for g in gauss_generators(&spec, &rep, &basis).unwrap() {
            assert!(commutator_defect(&h, &g, 20, 8) < 1e-12);
        }
    }

    #[test]
    fn electric_field_spectrum() {
        for two_s in 1..=4u32 {
            let e: Vec<f64> = (0..=two_s).map(|k| imbalance(two_s, k) / 2.0).collect();
            let s = two_s as f64 / 2.0;
            assert_eq!(e.first(), Some(&-s));
            assert_eq!(e.last(), Some(&s));
            assert!(e.windows(2).all(|w| w[1] - w[0] == 1.0));
        }
    }

    fn penalty(gamma: f64) -> PenaltyModel {
        let spec = spec2();
        let rep = GaugeRep::schwinger_boson(0.5).unwrap();
        let mut c = CouplingSet::default();
        c.m = 2.0;
        c.gamma = gamma;
        let basis = Basis::enumerate(&spec, &rep, Filling::PerFlavor(vec![1])).unwrap();
        build_penalty_model(&spec, &c, &rep, basis).unwrap()
    }

    #[test]
    fn zero_penalty_is_bare_hamiltonian() {
        let a = SparseMatrix::from_elements(&penalty(0.0));
        let b = SparseMatrix::from_elements(&penalty(40.0).bare());
        assert_eq!(a, b);
    }

    #[test]
    fn penalty_is_positive_semidefinite_with_zero_floor() {
        let p = penalty(10.0);
        let ev = dense_diag(p.penalty()).unwrap().eigenvalues;
        assert_eq!(ev[0], 0.0);
        assert!(ev.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn ground_energy_approaches_gauge_sector() {
        let p = penalty(0.0);
        let sector = p.basis().project(&p.generators().unwrap()).unwrap();
        let bos = GaugeRep::schwinger_boson(0.5).unwrap();
        let mut c = CouplingSet::default();
        c.m = 2.0;
        let inside = build_penalty_model(&spec2(), &c, &bos, sector).unwrap();
        let e_sector = dense_diag(&inside).unwrap().eigenvalues[0];
        let mut prev = f64::INFINITY;
        for gamma in [10.0, 20.0, 40.0, 80.0] {
            let full = dense_diag(&penalty(gamma)).unwrap().eigenvalues;
            let err = (full[0] - e_sector).abs();
            assert!(full[0] <= e_sector + 1e-12);
            assert!(err < prev);
            prev = err;
            // gauge-violating states sit at least Γ above the bare scale
            let violating = full.iter().filter(|&&e| e > gamma / 2.0).count();
            assert!(violating > 0);
        }
        assert!(prev < 0.05);
    }

    #[test]
    fn rejects_negative_penalty() {
        assert!(penalty(1.0).with_gamma(-1.0).is_err());
        let spec = spec2();
        let rep = GaugeRep::schwinger_boson(0.5).unwrap();
        let mut c = CouplingSet::default();
        c.gamma = -2.0;
        let basis = Basis::enumerate(&spec, &rep, Filling::PerFlavor(vec![1])).unwrap();
        assert!(build_penalty_model(&spec, &c, &rep, basis).is_err());
    }
}
