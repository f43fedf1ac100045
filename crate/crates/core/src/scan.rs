//! Cost of the finite link Hilbert space: quantum links of growing spin
//! against a truncated-integer reference.

use rayon::prelude::*;

use crate::basis::{Basis, Filling};
use crate::eigen::{solve_lowest, SolverConfig};
use crate::error::{Error, Result};
use crate::lattice::{CouplingSet, GaugeRep, LatticeSpec};
use crate::models::{LinkNormalization, Model, WilsonModel};

#[derive(Debug, Clone, PartialEq)]
pub struct QlmScanRow {
    pub two_s: u32,
    pub eigenvalues: Vec<f64>,
    /// `|E_i(S) - E_i(reference)|` per level.
    pub deviations: Vec<f64>,
    pub descriptor: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QlmScanReport {
    pub reference_cutoff: u32,
    pub reference: Vec<f64>,
    pub reference_descriptor: String,
    /// Ascending in `two_s`.
    pub rows: Vec<QlmScanRow>,
}

impl QlmScanReport {
    /// Ground-energy deviation per row.
    pub fn ground_deviations(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.deviations[0]).collect()
    }

    pub fn is_monotone_decreasing(&self) -> bool {
        self.ground_deviations().windows(2).all(|w| w[1] < w[0])
    }
}

fn sector_model(
    spec: &LatticeSpec,
    couplings: &CouplingSet,
    rep: &GaugeRep,
    norm: LinkNormalization,
) -> Result<WilsonModel> {
    let basis = Basis::gauge_sector(spec, rep, Filling::half(spec))?;
    WilsonModel::new(spec, couplings, rep, basis, norm)
}

/// Lowest `k` levels of the Gauss-projected half-filled quantum-link model for every
/// spin `two_s / 2`, next to the truncated-integer model with `|E| ≤ reference_cutoff`.
pub fn qlm_scan(
    spec: &LatticeSpec,
    couplings: &CouplingSet,
    two_s_list: &[u32],
    reference_cutoff: u32,
    k: usize,
    normalization: LinkNormalization,
    solver: &SolverConfig,
) -> Result<QlmScanReport> {
    if two_s_list.is_empty() || two_s_list.contains(&0) || two_s_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("spins", "spins must be positive and strictly ascending"));
    }
    let max_two_s = *two_s_list.last().expect("non-empty");
    if 2 * reference_cutoff < max_two_s {
        return Err(Error::config("reference_cutoff", "must be at least the largest spin"));
    }
    let rep = GaugeRep::truncated(reference_cutoff)?;
    let reference_model = sector_model(spec, couplings, &rep, normalization)?;
    let reference = solve_lowest(&reference_model, k, solver)?.eigenvalues;
    let rows = two_s_list
        .par_iter()
        .map(|&two_s| -> Result<QlmScanRow> {
            let rep = GaugeRep::quantum_link(two_s as f64 / 2.0)?;
            let model = sector_model(spec, couplings, &rep, normalization)?;
            let eigenvalues = solve_lowest(&model, k, solver)?.eigenvalues;
            let deviations = eigenvalues.iter().zip(&reference).map(|(a, b)| (a - b).abs()).collect();
            Ok(QlmScanRow {
                two_s,
                eigenvalues,
                deviations,
                descriptor: model.descriptor(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QlmScanReport {
        reference_cutoff,
        reference,
        reference_descriptor: reference_model.descriptor(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::GaussConvention;

    #[test]
    fn large_spin_with_inactive_truncation_matches() {
        // At t = 0 the ground state is the bare vacuum with E = 0 everywhere,
        // which every integer-spin link reaches exactly.
        let spec = LatticeSpec::new(4, 1).unwrap();
        let c = CouplingSet::new(1.0, 0.0).with_mass(0.5);
        let r = qlm_scan(
            &spec,
            &c,
            &[2, 4],
            2,
            3,
            LinkNormalization::Casimir,
            &SolverConfig::default(),
        )
        .unwrap();
        for row in &r.rows {
            assert!(row.deviations.iter().all(|d| *d < 1e-12), "{:?}", row.deviations);
        }
    }

    #[test]
    fn reruns_are_bit_identical() {
        let spec = LatticeSpec::new(2, 1).unwrap();
        let c = CouplingSet::new(1.0, 1.0);
        let run = || {
            qlm_scan(
                &spec,
                &c,
                &[1, 2, 3, 4],
                4,
                3,
                LinkNormalization::Casimir,
                &SolverConfig::default(),
            )
            .unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(
            a.reference.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.reference.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(a, b);
    }

    #[test]
    fn two_site_scan_reports_every_spin() {
        let spec = LatticeSpec::new(2, 1).unwrap();
        let r = qlm_scan(
            &spec,
            &CouplingSet::new(1.0, 1.0),
            &[1, 2, 3, 4],
            4,
            2,
            LinkNormalization::Casimir,
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(r.rows.iter().map(|r| r.two_s).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
        assert!(r.rows.iter().all(|row| row.deviations.iter().all(|d| d.is_finite())));
        // Integer spins converge towards the reference.
        let integer: Vec<f64> = r
            .rows
            .iter()
            .filter(|row| row.two_s % 2 == 0)
            .map(|row| row.deviations[0])
            .collect();
        assert!(integer[1] < integer[0]);
    }

    #[test]
    fn rejects_bad_spin_lists() {
        let spec = LatticeSpec::new(2, 1)
            .unwrap()
            .with_convention(GaussConvention::Staggered);
        let c = CouplingSet::default();
        let cfg = SolverConfig::default();
        assert!(qlm_scan(&spec, &c, &[2, 1], 4, 1, LinkNormalization::Casimir, &cfg).is_err());
        assert!(qlm_scan(&spec, &c, &[1, 9], 4, 1, LinkNormalization::Casimir, &cfg).is_err());
        assert!(qlm_scan(&spec, &c, &[], 4, 1, LinkNormalization::Casimir, &cfg).is_err());
    }
}
