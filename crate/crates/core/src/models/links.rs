//! Single-link algebra and Gauss-law generators.

use nalgebra::DMatrix;

use crate::basis::{Basis, LinkSpace, Statistics};
use crate::error::{Error, Result};
use crate::lattice::{GaugeRep, LatticeSpec, LinkField};
use crate::operator::DiagonalOperator;

/// How `U` is normalized inside quantum-link Hamiltonians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinkNormalization {
    /// `U = S⁺ / sqrt(S(S+1))`, so central matrix elements tend to 1 as `S` grows.
    #[default]
    Casimir,
    /// `U = S⁺`.
    Bare,
}

/// Spin-`S` link matrices indexed by `k = m + S`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkOperators {
    pub u: DMatrix<f64>,
    pub u_dagger: DMatrix<f64>,
    pub e: DMatrix<f64>,
}

/// `U = S⁺`, `U† = S⁻`, `E = S^z` for spin `two_s / 2`.
pub fn build_link_operators(two_s: u32) -> LinkOperators {
    let d = two_s as usize + 1;
    let s = 0.5 * two_s as f64;
    let mut u = DMatrix::<f64>::zeros(d, d);
    let mut e = DMatrix::<f64>::zeros(d, d);
    for k in 0..d {
        e[(k, k)] = k as f64 - s;
        if k + 1 < d {
            u[(k + 1, k)] = spin_raise(two_s, k as u32);
        }
    }
    LinkOperators {
        u_dagger: u.transpose(),
        u,
        e,
    }
}

/// `<k+1| S⁺ |k> = sqrt((2S - k)(k + 1))`.
pub fn spin_raise(two_s: u32, k: u32) -> f64 {
    if k >= two_s {
        return 0.0;
    }
    (((two_s - k) * (k + 1)) as f64).sqrt()
}

/// `<k+1| U |k>` as it enters a Hamiltonian; zero when the step leaves the link space.
pub fn raise_amplitude(rep: &GaugeRep, k: u32, norm: LinkNormalization) -> f64 {
    match *rep {
        GaugeRep::IntegratedCoulomb { .. } => 0.0,
        GaugeRep::TruncatedInteger { cutoff } => {
            if k < 2 * cutoff {
                1.0
            } else {
                0.0
            }
        }
        GaugeRep::QuantumLink { two_s } => {
            let s = 0.5 * two_s as f64;
            match norm {
                LinkNormalization::Casimir => spin_raise(two_s, k) / (s * (s + 1.0)).sqrt(),
                LinkNormalization::Bare => spin_raise(two_s, k),
            }
        }
        GaugeRep::SchwingerBoson { two_s } => spin_raise(two_s, k),
    }
}

/// Checks that a basis was enumerated for this lattice and representation.
pub fn check_basis(spec: &LatticeSpec, rep: &GaugeRep, basis: &Basis) -> Result<()> {
    if basis.n_sites() != spec.n_sites || basis.flavors() != spec.flavors {
        return Err(Error::config(
            "basis",
            format!(
                "basis has N={} F={}, lattice has N={} F={}",
                basis.n_sites(),
                basis.flavors(),
                spec.n_sites,
                spec.flavors
            ),
        ));
    }
    if basis.statistics() != Statistics::Fermions {
        return Err(Error::config("basis", "fermion basis required"));
    }
    if basis.links() != LinkSpace::for_rep(spec, rep) {
        return Err(Error::config(
            "basis",
            format!("link space {:?} does not match {}", basis.links(), rep.label()),
        ));
    }
    Ok(())
}

/// Electric field `E_l` on every basis state.
pub fn electric_field(spec: &LatticeSpec, rep: &GaugeRep, basis: &Basis, link: usize) -> Result<DiagonalOperator> {
    let field = LinkField::new(spec, rep)?;
    check_basis(spec, rep, basis)?;
    Ok(DiagonalOperator::new(
        (0..basis.dim())
            .map(|i| field.value(link, basis.link(i, link)))
            .collect(),
    ))
}

/// `G_x = E_x - E_{x-1} ± (Σ_f n_{f,x} - offset_x)`; the charge sign is
/// [`GaugeRep::charge_sign`].
pub fn gauss_generator(spec: &LatticeSpec, rep: &GaugeRep, basis: &Basis, x: usize) -> Result<DiagonalOperator> {
    if !rep.has_links() {
        return Err(Error::Unsupported(
            "Gauss generators need link degrees of freedom".into(),
        ));
    }
    check_basis(spec, rep, basis)?;
    let field = LinkField::new(spec, rep)?;
    let n = spec.n_sites;
    let prev = (x + n - 1) % n;
    let sign = rep.charge_sign();
    Ok(DiagonalOperator::new(
        (0..basis.dim())
            .map(|i| {
                let key = basis.key(i);
                field.value(x, basis.key_link(key, x)) - field.value(prev, basis.key_link(key, prev))
                    + sign * spec.charge(x, basis.site_occupation(key, x))
            })
            .collect(),
    ))
}

pub fn gauss_generators(spec: &LatticeSpec, rep: &GaugeRep, basis: &Basis) -> Result<Vec<DiagonalOperator>> {
    (0..spec.n_sites)
        .map(|x| gauss_generator(spec, rep, basis, x))
        .collect()
}

/// `Σ_x G_x²`.
pub fn gauss_penalty(generators: &[DiagonalOperator]) -> DiagonalOperator {
    let dim = generators.first().map_or(0, |g| g.values.len());
    let mut out = vec![0.0; dim];
    for g in generators {
        for (o, v) in out.iter_mut().zip(&g.values) {
            *o += v * v;
        }
    }
    DiagonalOperator::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Filling;
    use crate::lattice::GaussConvention;
    use crate::operator::{commutator_defect, LinearOperator};

    fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        a * b - b * a
    }

    #[test]
    fn spin_half_link() {
        let ops = build_link_operators(1);
        assert_eq!(ops.u[(1, 0)], 1.0);
        assert_eq!((&ops.u * &ops.u).norm(), 0.0);
        assert_eq!(ops.e[(0, 0)], -0.5);
        assert_eq!(ops.e[(1, 1)], 0.5);
    }

    #[test]
    fn link_algebra() {
        for two_s in 1..=4u32 {
            let ops = build_link_operators(two_s);
            let uu = commutator(&ops.u, &ops.u_dagger);
            assert!((uu - 2.0 * &ops.e).amax() < 1e-14, "2S={two_s}");
            let eu = commutator(&ops.e, &ops.u);
            assert!((eu - &ops.u).amax() < 1e-14);
            let mut power = DMatrix::<f64>::identity(two_s as usize + 1, two_s as usize + 1);
            for _ in 0..=two_s {
                power = &power * &ops.u;
            }
            assert_eq!(power.amax(), 0.0);
            let s = 0.5 * two_s as f64;
            for k in 0..=two_s as usize {
                assert_eq!(ops.e[(k, k)], k as f64 - s);
            }
        }
    }

    #[test]
    fn truncated_raise_is_clipped() {
        let rep = GaugeRep::truncated(2).unwrap();
        assert_eq!(raise_amplitude(&rep, 3, LinkNormalization::Casimir), 1.0);
        assert_eq!(raise_amplitude(&rep, 4, LinkNormalization::Casimir), 0.0);
    }

    #[test]
    fn staggered_vacuum_satisfies_gauss_law() {
        let spec = LatticeSpec::new(4, 1).unwrap();
        let rep = GaugeRep::truncated(2).unwrap();
        let basis = Basis::enumerate(&spec, &rep, Filling::half(&spec)).unwrap();
        let vacuum = crate::basis::BasisState {
            occupations: vec![0b1010],
            links: vec![2; 4],
        };
        let i = basis.index_of_state(&vacuum).unwrap();
        for g in gauss_generators(&spec, &rep, &basis).unwrap() {
            assert_eq!(g.values[i], 0.0);
        }
    }

    #[test]
    fn displaced_fermion_with_compensating_link() {
        // Brute force over all Λ=2 link assignments with the fermion moved from site 1 to site 0.
        let spec = LatticeSpec::new(4, 1).unwrap();
        let rep = GaugeRep::truncated(2).unwrap();
        let basis = Basis::enumerate(&spec, &rep, Filling::half(&spec)).unwrap();
        let gens = gauss_generators(&spec, &rep, &basis).unwrap();
        let solutions: Vec<Vec<i64>> = (0..basis.dim())
            .filter(|&i| basis.occupation(i, 0) == 0b1001 && gens.iter().all(|g| g.values[i] == 0.0))
            .map(|i| basis.state(i).links.iter().map(|&k| k as i64 - 2).collect())
            .collect();
        assert!(solutions.contains(&vec![-1, 0, 0, 0]));
        // a uniform shift of all links also solves Gauss's law
        assert!(solutions
            .iter()
            .all(|e| e[0] == e[1] - 1 && e[1] == e[2] && e[2] == e[3]));
    }

    #[test]
    fn generators_commute_and_reject_integrated() {
        let spec = LatticeSpec::new(4, 2).unwrap();
        let rep = GaugeRep::quantum_link(1.0).unwrap();
        let basis = Basis::enumerate(&spec, &rep, Filling::Total(4)).unwrap();
        let gens = gauss_generators(&spec, &rep, &basis).unwrap();
        for a in &gens {
            for b in &gens {
                assert_eq!(commutator_defect(a, b, 3, 9), 0.0);
            }
        }
        let integ = GaugeRep::integrated(0.0).unwrap();
        let b2 = Basis::enumerate(&spec, &integ, Filling::Total(4)).unwrap();
        assert!(matches!(
            gauss_generator(&spec, &integ, &b2, 0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn two_site_spin_half_projection_by_exhaustion() {
        let spec = LatticeSpec::new(2, 1).unwrap();
        let rep = GaugeRep::quantum_link(0.5).unwrap();
        let basis = Basis::enumerate(&spec, &rep, Filling::PerFlavor(vec![1])).unwrap();
        assert_eq!(basis.dim(), 8);
        let mut expected = 0;
        for i in 0..8 {
            let s = basis.state(i);
            let e: Vec<f64> = s.links.iter().map(|&k| k as f64 - 0.5).collect();
            let n: Vec<f64> = (0..2).map(|x| ((s.occupations[0] >> x) & 1) as f64).collect();
            let ok = (0..2).all(|x| {
                let prev = (x + 1) % 2;
                e[x] - e[prev] + n[x] - (x % 2) as f64 == 0.0
            });
            expected += ok as usize;
        }
        let gens = gauss_generators(&spec, &rep, &basis).unwrap();
        let projected = basis.project(&gens).unwrap();
        assert_eq!(projected.dim(), expected);
        assert_eq!(
            projected
                .project(&gauss_generators(&spec, &rep, &projected).unwrap())
                .unwrap()
                .keys(),
            projected.keys()
        );
        for g in gauss_generators(&spec, &rep, &projected).unwrap() {
            assert!(g.is_zero(1e-12));
        }
        assert_eq!(projected.dim(), 3);
    }

    #[test]
    fn uniform_convention_needs_the_background() {
        let spec = LatticeSpec::new(4, 1)
            .unwrap()
            .with_convention(GaussConvention::UniformHalf);
        let rep = GaugeRep::truncated(2).unwrap();
        let sector = Basis::gauge_sector(&spec, &rep, Filling::half(&spec)).unwrap();
        assert!(sector.dim() > 0);
        let field = electric_field(&spec, &rep, &sector, 1).unwrap();
        assert!(field.values.iter().all(|v| (v.rem_euclid(0.5) - 0.25).abs() < 1e-12));
        assert_eq!(field.dim(), sector.dim());
    }
}
