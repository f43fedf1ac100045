//! Discrete symmetries as phase-weighted basis permutations.
//!
//! A transformation is given by the image of every creation operator,
//! `U c†_μ U† = phase · c†_target` or `phase · c_target` (particle-hole), and
//! by where each link goes. `U|0⟩` is taken as the state filling every
//! particle-hole target, and `U|n⟩` follows by applying the images of the
//! occupied creation operators in Jordan-Wigner order.

use crate::basis::{mode_sign, Basis, Statistics};
use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::operator::{LinearOperator, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryKind {
    /// `c_x -> c_{x+1}`, link `x -> x+1`.
    Translation,
    /// `c_x -> (-1)^x c_{-x}`, `E_x -> -E_{-x-1}`.
    Parity,
    /// `c_x -> c†_{x+1}`, `E_x -> -E_{x+1}`.
    ChargeConjugation,
    /// `ψ1_x -> ψ2†_{x+1}`, `ψ2_x -> -ψ1†_{x+1}`, `E_x -> -E_{x+1}`.
    GParity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeImage {
    pub target: usize,
    pub phase: C64,
    pub particle_hole: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkImage {
    pub target: usize,
    pub negate: bool,
}

/// Images of fermion modes (indexed `flavor * N + x`) and of links.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteTransform {
    pub n_sites: usize,
    pub flavors: usize,
    pub modes: Vec<ModeImage>,
    pub links: Vec<LinkImage>,
}

pub fn site_transform(kind: SymmetryKind, spec: &LatticeSpec) -> Result<SiteTransform> {
    let n = spec.n_sites;
    let nf = spec.flavors;
    let one = C64::new(1.0, 0.0);
    let mode = |f: usize, x: usize| f * n + (x % n);
    let mut modes = Vec::with_capacity(n * nf);
    let links: Vec<LinkImage>;
    match kind {
        SymmetryKind::Translation => {
            for f in 0..nf {
                for x in 0..n {
                    modes.push(ModeImage {
                        target: mode(f, x + 1),
                        phase: one,
                        particle_hole: false,
                    });
                }
            }
            links = (0..n)
                .map(|x| LinkImage {
                    target: (x + 1) % n,
                    negate: false,
                })
                .collect();
        }
        SymmetryKind::Parity => {
            for f in 0..nf {
                for x in 0..n {
                    modes.push(ModeImage {
                        target: mode(f, n - x),
                        phase: one * LatticeSpec::stagger(x),
                        particle_hole: false,
                    });
                }
            }
            links = (0..n)
                .map(|x| LinkImage {
                    target: (2 * n - x - 1) % n,
                    negate: true,
                })
                .collect();
        }
        SymmetryKind::ChargeConjugation => {
            for f in 0..nf {
                for x in 0..n {
                    modes.push(ModeImage {
                        target: mode(f, x + 1),
                        phase: one,
                        particle_hole: true,
                    });
                }
            }
            links = (0..n)
                .map(|x| LinkImage {
                    target: (x + 1) % n,
                    negate: true,
                })
                .collect();
        }
        SymmetryKind::GParity => {
            if nf != 2 {
                return Err(Error::config("flavors", "G-parity needs two flavors"));
            }
            for x in 0..n {
                modes.push(ModeImage {
                    target: mode(1, x + 1),
                    phase: one,
                    particle_hole: true,
                });
            }
            for x in 0..n {
                modes.push(ModeImage {
                    target: mode(0, x + 1),
                    phase: -one,
                    particle_hole: true,
                });
            }
            links = (0..n)
                .map(|x| LinkImage {
                    target: (x + 1) % n,
                    negate: true,
                })
                .collect();
        }
    }
    Ok(SiteTransform {
        n_sites: n,
        flavors: nf,
        modes,
        links,
    })
}

impl SiteTransform {
    /// Image of one basis key, or `None` when the image vanishes.
    pub fn apply_key(&self, basis: &Basis, key: u128) -> Option<(u128, C64)> {
        let n = self.n_sites;
        let fermions = basis.statistics() == Statistics::Fermions;
        let mut out = vec![0u32; self.flavors];
        for img in &self.modes {
            if img.particle_hole {
                out[img.target / n] |= 1 << (img.target % n);
            }
        }
        let mut coeff = C64::new(1.0, 0.0);
        for mu in (0..n * self.flavors).rev() {
            let occ = basis.key_occupation(key, mu / n);
            if (occ >> (mu % n)) & 1 == 0 {
                continue;
            }
            let img = self.modes[mu];
            let (tf, tx) = (img.target / n, img.target % n);
            let present = (out[tf] >> tx) & 1 == 1;
            if present != img.particle_hole {
                return None;
            }
            let sign = if fermions { mode_sign(&out, tf, tx) } else { 1.0 };
            out[tf] ^= 1 << tx;
            coeff *= img.phase * sign;
        }
        let mut new_key = 0u128;
        for (f, &m) in out.iter().enumerate() {
            new_key = basis.with_occupation(new_key, f, m);
        }
        let links = basis.links();
        if links.count > 0 {
            for (l, img) in self.links.iter().enumerate() {
                let k = basis.key_link(key, l);
                let v = if img.negate { links.dim as u32 - 1 - k } else { k };
                new_key = basis.with_link(new_key, img.target, v);
            }
        }
        Some((new_key, coeff))
    }
}

/// Unitary map between two bases as target index and phase per column.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryOperator {
    from_dim: usize,
    to_dim: usize,
    targets: Vec<(usize, C64)>,
}

impl SymmetryOperator {
    pub fn build(transform: &SiteTransform, from: &Basis, to: &Basis) -> Result<Self> {
        if !from.same_layout(to) {
            return Err(Error::config("basis", "symmetry source and target layouts differ"));
        }
        if from.n_sites() != transform.n_sites || from.flavors() != transform.flavors {
            return Err(Error::config("basis", "transform built for another lattice"));
        }
        let links = from.links();
        if links.count != 0 && links.count != transform.n_sites {
            return Err(Error::Unsupported("symmetry action on a global zero mode".into()));
        }
        let mut targets = Vec::with_capacity(from.dim());
        for i in 0..from.dim() {
            let (key, c) = transform
                .apply_key(from, from.key(i))
                .ok_or_else(|| Error::Unsupported("transform annihilates a basis state".into()))?;
            let j = to
                .index_of(key)
                .ok_or_else(|| Error::Unsupported(format!("state {i} maps outside the target basis")))?;
            targets.push((j, c));
        }
        Ok(SymmetryOperator {
            from_dim: from.dim(),
            to_dim: to.dim(),
            targets,
        })
    }

    /// `a ∘ b`: apply `b` first.
    pub fn compose(a: &SymmetryOperator, b: &SymmetryOperator) -> Result<Self> {
        if b.to_dim != a.from_dim {
            return Err(Error::Dimension {
                expected: a.from_dim,
                got: b.to_dim,
            });
        }
        Ok(SymmetryOperator {
            from_dim: b.from_dim,
            to_dim: a.to_dim,
            targets: b
                .targets
                .iter()
                .map(|&(j, c1)| {
                    let (k, c2) = a.targets[j];
                    (k, c1 * c2)
                })
                .collect(),
        })
    }

    pub fn targets(&self) -> &[(usize, C64)] {
        &self.targets
    }

    pub fn map_vector(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.from_dim);
        let mut out = vec![C64::new(0.0, 0.0); self.to_dim];
        for (i, &(j, c)) in self.targets.iter().enumerate() {
            out[j] += c * v[i];
        }
        out
    }

    /// Distinct targets with unit-modulus phases.
    pub fn is_unitary(&self) -> bool {
        if self.from_dim != self.to_dim {
            return false;
        }
        let mut seen = vec![false; self.to_dim];
        for &(j, c) in &self.targets {
            if seen[j] || (c.norm() - 1.0).abs() > 1e-14 {
                return false;
            }
            seen[j] = true;
        }
        true
    }

    pub fn is_identity(&self) -> bool {
        self.targets
            .iter()
            .enumerate()
            .all(|(i, &(j, c))| i == j && (c - C64::new(1.0, 0.0)).norm() < 1e-14)
    }

    /// `<v| U |v>` for `v` in a basis mapped to itself.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let uv = self.map_vector(v);
        crate::operator::inner(v, &uv)
    }
}

impl LinearOperator for SymmetryOperator {
    fn dim(&self) -> usize {
        self.from_dim
    }
    fn is_hermitian(&self) -> bool {
        false
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(self.from_dim, self.to_dim, "symmetry operator between distinct bases");
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (i, &(j, c)) in self.targets.iter().enumerate() {
            y[j] += c * x[i];
        }
    }
}

pub fn translation(spec: &LatticeSpec, from: &Basis, to: &Basis) -> Result<SymmetryOperator> {
    SymmetryOperator::build(&site_transform(SymmetryKind::Translation, spec)?, from, to)
}

pub fn discrete_symmetry(kind: SymmetryKind, spec: &LatticeSpec, from: &Basis, to: &Basis) -> Result<SymmetryOperator> {
    SymmetryOperator::build(&site_transform(kind, spec)?, from, to)
}

/// Translates a single state vector by one site within a basis closed under translation.
pub fn translate_one_site(spec: &LatticeSpec, basis: &Basis, v: &[C64]) -> Result<Vec<C64>> {
    Ok(translation(spec, basis, basis)?.map_vector(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{BasisState, Filling};
    use crate::eigen::{dense_diag, lanczos_lowest, SolverConfig};
    use crate::lattice::{CouplingSet, GaugeRep};
    use crate::models::Model;
    use crate::models::{build_full_gauge_hamiltonian, build_gauge_integrated, CoulombGasModel, ZeroMode};
    use crate::operator::{commutator_defect, to_dense};

    fn hopping(n: usize, particles: u32, m: f64) -> CoulombGasModel {
        let spec = LatticeSpec::new(n, 1).unwrap();
        let basis =
            CoulombGasModel::basis_for(&spec, ZeroMode::Classical, Filling::PerFlavor(vec![particles])).unwrap();
        build_gauge_integrated(
            &spec,
            &CouplingSet::new(0.0, 1.0).with_mass(m),
            &GaugeRep::integrated(0.0).unwrap(),
            ZeroMode::Classical,
            basis,
        )
        .unwrap()
    }

    #[test]
    fn translation_has_order_n() {
        let spec = LatticeSpec::new(4, 2).unwrap();
        let rep = GaugeRep::truncated(1).unwrap();
        let b = Basis::enumerate(&spec, &rep, Filling::PerFlavor(vec![2, 1])).unwrap();
        let t = translation(&spec, &b, &b).unwrap();
        assert!(t.is_unitary());
        let mut power = t.clone();
        for _ in 1..4 {
            assert!(!power.is_identity());
            power = SymmetryOperator::compose(&t, &power).unwrap();
        }
        assert!(power.is_identity());
    }

    #[test]
    fn staggered_vacuum_translates_to_even_sites() {
        let spec = LatticeSpec::new(6, 1).unwrap();
        let b = Basis::build(
            6,
            1,
            Statistics::Fermions,
            crate::basis::LinkSpace::NONE,
            Filling::PerFlavor(vec![3]),
        )
        .unwrap();
        let odd = b
            .index_of_state(&BasisState {
                occupations: vec![0b101010],
                links: vec![],
            })
            .unwrap();
        let even = b
            .index_of_state(&BasisState {
                occupations: vec![0b010101],
                links: vec![],
            })
            .unwrap();
        let t = translation(&spec, &b, &b).unwrap();
        assert_eq!(t.targets()[odd].0, even);
        assert!((t.targets()[odd].1.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hopping_commutes_with_translation() {
        for particles in 1..=3 {
            let h = hopping(4, particles, 0.0);
            let t = translation(h.spec(), h.basis(), h.basis()).unwrap();
            assert!(commutator_defect(&h, &t, 20, 7) < 1e-12);
        }
    }

    #[test]
    fn symmetries_commute_with_the_link_hamiltonian() {
        for flavors in 1..=2 {
            let spec = LatticeSpec::new(4, flavors).unwrap();
            let rep = GaugeRep::truncated(1).unwrap();
            let basis = Basis::gauge_sector(&spec, &rep, Filling::half(&spec)).unwrap();
            let h =
                build_full_gauge_hamiltonian(&spec, &CouplingSet::new(1.2, 1.0).with_mass(0.4), &rep, basis.clone())
                    .unwrap();
            let mut kinds = vec![SymmetryKind::Parity, SymmetryKind::ChargeConjugation];
            if flavors == 2 {
                kinds.push(SymmetryKind::GParity);
            }
            for kind in kinds {
                let u = discrete_symmetry(kind, &spec, &basis, &basis).unwrap();
                assert!(u.is_unitary(), "{kind:?}");
                assert!(commutator_defect(&h, &u, 10, 3) < 1e-12, "{kind:?} F={flavors}");
            }
        }
    }

    #[test]
    fn charge_conjugation_flips_charge_sector() {
        let spec = LatticeSpec::new(4, 1).unwrap();
        let from = Basis::build(
            4,
            1,
            Statistics::Fermions,
            crate::basis::LinkSpace::NONE,
            Filling::PerFlavor(vec![1]),
        )
        .unwrap();
        let to = Basis::build(
            4,
            1,
            Statistics::Fermions,
            crate::basis::LinkSpace::NONE,
            Filling::PerFlavor(vec![3]),
        )
        .unwrap();
        let c = discrete_symmetry(SymmetryKind::ChargeConjugation, &spec, &from, &to).unwrap();
        assert!(c.is_unitary());
        // total charge N_f - N/2 goes from -1 to +1
        for &(j, _) in c.targets() {
            assert_eq!(to.particles(j, 0), 3);
        }
    }

    #[test]
    fn g_parity_squares_to_a_sign() {
        let spec = LatticeSpec::new(2, 2).unwrap();
        let b = Basis::build(
            2,
            2,
            Statistics::Fermions,
            crate::basis::LinkSpace::NONE,
            Filling::Unrestricted,
        )
        .unwrap();
        let g = discrete_symmetry(SymmetryKind::GParity, &spec, &b, &b).unwrap();
        let g2 = SymmetryOperator::compose(&g, &g).unwrap();
        for (i, &(j, c)) in g2.targets().iter().enumerate() {
            assert_eq!(i, j);
            assert!((c.re.abs() - 1.0).abs() < 1e-15 && c.im == 0.0);
        }
        assert!(site_transform(SymmetryKind::GParity, &LatticeSpec::new(2, 1).unwrap()).is_err());
    }

    #[test]
    fn columns_are_orthonormal() {
        let spec = LatticeSpec::new(4, 1).unwrap();
        let rep = GaugeRep::quantum_link(1.0).unwrap();
        let b = Basis::enumerate(&spec, &rep, Filling::half(&spec)).unwrap();
        for kind in [
            SymmetryKind::Translation,
            SymmetryKind::Parity,
            SymmetryKind::ChargeConjugation,
        ] {
            let u = discrete_symmetry(kind, &spec, &b, &b).unwrap();
            let d = to_dense(&u).unwrap();
            let gram = d.adjoint() * &d;
            assert!((gram - nalgebra::DMatrix::<C64>::identity(b.dim(), b.dim())).camax() < 1e-14);
        }
    }

    #[test]
    fn massive_half_filled_ground_state_is_c_even_or_odd() {
        let h = hopping(4, 2, 0.2);
        let gs = lanczos_lowest(&h, &SolverConfig::default().with_k(1)).unwrap();
        let c = discrete_symmetry(SymmetryKind::ChargeConjugation, h.spec(), h.basis(), h.basis()).unwrap();
        let value = c.expectation(gs.ground_state().unwrap());
        assert!(
            (value.re.abs() - 1.0).abs() < 1e-10 && value.im.abs() < 1e-10,
            "{value}"
        );
        let ev = dense_diag(&h).unwrap().eigenvalues;
        assert!(ev[1] - ev[0] > 1e-3);
    }
}
