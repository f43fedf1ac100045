//! Gauge-sector projectors, the first-order penalty effective Hamiltonian,
//! penalty scans and degenerate second-order perturbation theory.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::basis::{Basis, Filling, Statistics, GAUSS_TOL};
use crate::eigen::{solve_lowest, SolverConfig};
use crate::error::{Error, Result};
use crate::fit::{extrapolate, FitModel, FitResult};
use crate::lattice::{CouplingSet, GaugeRep, LatticeSpec};
use crate::models::links::gauss_penalty;
use crate::models::{build_gauge_integrated, build_penalty_model, CoulombGasModel, Model, ZeroMode};
use crate::observables::{gauss_violation, HeisenbergModel};
use crate::operator::{DenseOperator, DiagonalOperator, LinearOperator, MatrixElements, C64};

/// `G` projects onto the common kernel of all generators, `P = 1 - G`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorProjectors {
    pub gauge: DiagonalOperator,
    pub complement: DiagonalOperator,
    sector: Vec<usize>,
}

impl SectorProjectors {
    /// Basis indices spanning the range of `G`, ascending.
    pub fn sector(&self) -> &[usize] {
        &self.sector
    }

    pub fn rank_gauge(&self) -> usize {
        self.sector.len()
    }

    pub fn rank_complement(&self) -> usize {
        self.gauge.values.len() - self.sector.len()
    }
}

pub fn sector_projectors(basis: &Basis, generators: &[DiagonalOperator]) -> Result<SectorProjectors> {
    for g in generators {
        if g.values.len() != basis.dim() {
            return Err(Error::Dimension {
                expected: basis.dim(),
                got: g.values.len(),
            });
        }
    }
    let inside: Vec<bool> = (0..basis.dim())
        .map(|i| generators.iter().all(|g| g.values[i].abs() < GAUSS_TOL))
        .collect();
    let sector: Vec<usize> = (0..basis.dim()).filter(|&i| inside[i]).collect();
    if sector.is_empty() {
        return Err(Error::EmptySector("no state satisfies every Gauss law".into()));
    }
    Ok(SectorProjectors {
        gauge: DiagonalOperator::new(inside.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()),
        complement: DiagonalOperator::new(inside.iter().map(|&b| if b { 0.0 } else { 1.0 }).collect()),
        sector,
    })
}

/// `H_eff = G H₀ G - (1/Γ) G H₀ P (Σ G_x²)⁻¹ P H₀ G` acting on the gauge sector,
/// with `(Σ G_x²)⁻¹` taken on the range of `P` only.
pub struct EffectiveHamiltonian<'a> {
    h0: &'a dyn LinearOperator,
    sector: Vec<usize>,
    inverse_penalty: Vec<f64>,
    inverse_gamma: f64,
}

/// `gamma = None` is the `Γ = ∞` limit `G H₀ G`.
pub fn effective_first_order<'a>(
    h0: &'a dyn LinearOperator,
    projectors: &SectorProjectors,
    penalty: &DiagonalOperator,
    gamma: Option<f64>,
) -> Result<EffectiveHamiltonian<'a>> {
    let dim = h0.dim();
    if projectors.gauge.values.len() != dim || penalty.values.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: penalty.values.len(),
        });
    }
    if !h0.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    let inverse_gamma = match gamma {
        None => 0.0,
        Some(g) if g.is_finite() && g > 0.0 => 1.0 / g,
        Some(_) => return Err(Error::config("gamma", "must be positive")),
    };
    let mut inverse_penalty = vec![0.0; dim];
    for i in 0..dim {
        if projectors.complement.values[i] != 0.0 {
            let p = penalty.values[i];
            if p <= 0.0 {
                return Err(Error::Degeneracy { state: i, gap: p });
            }
            inverse_penalty[i] = 1.0 / p;
        }
    }
    Ok(EffectiveHamiltonian {
        h0,
        sector: projectors.sector.clone(),
        inverse_penalty,
        inverse_gamma,
    })
}

impl EffectiveHamiltonian<'_> {
    pub fn sector(&self) -> &[usize] {
        &self.sector
    }

    /// Embeds a sector vector into the full space.
    pub fn lift(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.h0.dim()];
        for (&i, &c) in self.sector.iter().zip(v) {
            out[i] = c;
        }
        out
    }
}

impl LinearOperator for EffectiveHamiltonian<'_> {
    fn dim(&self) -> usize {
        self.sector.len()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let full = self.lift(x);
        let h_x = self.h0.apply_vec(&full);
        for (o, &i) in y.iter_mut().zip(&self.sector) {
            *o = h_x[i];
        }
        if self.inverse_gamma == 0.0 {
            return;
        }
        let resolved: Vec<C64> = h_x.iter().zip(&self.inverse_penalty).map(|(v, p)| v * *p).collect();
        let second = self.h0.apply_vec(&resolved);
        for (o, &i) in y.iter_mut().zip(&self.sector) {
            *o -= second[i] * self.inverse_gamma;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyScanRow {
    pub gamma: f64,
    /// Lowest eigenvalues of `H₀ + Γ Σ G_x²`.
    pub full: Vec<f64>,
    /// Lowest eigenvalues of `G H₀ G`.
    pub projected: Vec<f64>,
    /// Lowest eigenvalues of the first-order effective Hamiltonian.
    pub effective: Vec<f64>,
    /// `Σ_x ⟨G_x²⟩` in the ground state of the full model.
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyScanReport {
    /// Ascending in `gamma`.
    pub rows: Vec<PenaltyScanRow>,
    /// Power law of `|E₀(full) - E₀(G H₀ G)|` in `Γ`; absent when the error vanishes.
    pub energy_exponent: Option<FitResult>,
    /// Power law of the ground-state violation in `Γ`; absent when it vanishes.
    pub violation_exponent: Option<FitResult>,
    pub descriptor: String,
}

impl PenaltyScanReport {
    /// `|E₀(full) - E₀(H_eff)|` per row.
    pub fn effective_errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| (r.full[0] - r.effective[0]).abs()).collect()
    }

    pub fn projected_errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| (r.full[0] - r.projected[0]).abs()).collect()
    }
}

/// Values below this are treated as exact zeros when fitting exponents.
const SCAN_FLOOR: f64 = 1e-12;

fn power_law(gammas: &[f64], values: &[f64]) -> Result<Option<FitResult>> {
    if values.iter().any(|v| *v <= SCAN_FLOOR) {
        return Ok(None);
    }
    let pts: Vec<(f64, f64)> = gammas.iter().copied().zip(values.iter().copied()).collect();
    extrapolate(&pts, FitModel::PowerLaw).map(Some)
}

/// Penalty model at half filling for every `Γ`, with its projected and first-order references.
pub fn penalty_scan(
    spec: &LatticeSpec,
    couplings: &CouplingSet,
    rep: &GaugeRep,
    gammas: &[f64],
    k: usize,
    solver: &SolverConfig,
) -> Result<PenaltyScanReport> {
    if gammas.len() < 3 {
        return Err(Error::config("gamma", "a scan needs at least 3 values"));
    }
    if gammas.iter().any(|g| !(g.is_finite() && *g > 0.0)) || gammas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("gamma", "values must be positive and strictly ascending"));
    }
    let mut bare = couplings.clone();
    bare.gamma = 0.0;
    let basis = Basis::enumerate(spec, rep, Filling::half(spec))?;
    let model = build_penalty_model(spec, &bare, rep, basis.clone())?;
    let generators = model.generators()?;
    let projectors = sector_projectors(&basis, &generators)?;
    let penalty = gauss_penalty(&generators);
    let projected = solve_lowest(&effective_first_order(&model, &projectors, &penalty, None)?, k, solver)?.eigenvalues;

    let rows = gammas
        .par_iter()
        .map(|&gamma| -> Result<PenaltyScanRow> {
            let full_model = model.with_gamma(gamma)?;
            let full = solve_lowest(&full_model, k, solver)?;
            let violation = gauss_violation(full.ground_state().expect("solver returns vectors"), &generators);
            let effective = solve_lowest(
                &effective_first_order(&model, &projectors, &penalty, Some(gamma))?,
                k,
                solver,
            )?;
            Ok(PenaltyScanRow {
                gamma,
                full: full.eigenvalues,
                projected: projected.clone(),
                effective: effective.eigenvalues,
                violation,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = PenaltyScanReport {
        rows,
        energy_exponent: None,
        violation_exponent: None,
        descriptor: model.descriptor(),
    };
    report.energy_exponent = power_law(gammas, &report.projected_errors())?;
    let violations: Vec<f64> = report.rows.iter().map(|r| r.violation).collect();
    report.violation_exponent = power_law(gammas, &violations)?;
    Ok(report)
}

/// `M = Q V Q + Q V Q' (E₀ - H_u)⁻¹ Q' V Q` on the manifold `Q`, in the given index order.
/// `H_u` must be constant on the manifold and differ from that value everywhere else.
pub fn degenerate_pt2(h_u: &DiagonalOperator, v: &dyn LinearOperator, manifold: &[usize]) -> Result<DenseOperator> {
    let dim = v.dim();
    if h_u.values.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: h_u.values.len(),
        });
    }
    if !v.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    let Some(&first) = manifold.first() else {
        return Err(Error::EmptySector("empty perturbation manifold".into()));
    };
    let e0 = h_u.values[first];
    let mut in_manifold = vec![false; dim];
    for &i in manifold {
        if (h_u.values[i] - e0).abs() > 1e-12 * e0.abs().max(1.0) {
            return Err(Error::config(
                "manifold",
                "not an eigenspace of the unperturbed operator",
            ));
        }
        in_manifold[i] = true;
    }
    let mut resolvent = vec![0.0; dim];
    for i in 0..dim {
        if in_manifold[i] {
            continue;
        }
        let gap = e0 - h_u.values[i];
        if gap.abs() < 1e-10 * e0.abs().max(1.0) {
            return Err(Error::Degeneracy { state: i, gap });
        }
        resolvent[i] = 1.0 / gap;
    }
    let columns: Vec<Vec<C64>> = manifold
        .par_iter()
        .map(|&a| {
            let mut e = vec![C64::new(0.0, 0.0); dim];
            e[a] = C64::new(1.0, 0.0);
            v.apply_vec(&e)
        })
        .collect();
    let m = manifold.len();
    let out = DMatrix::from_fn(m, m, |b, a| {
        let (wa, wb) = (&columns[a], &columns[b]);
        let second: C64 = (0..dim)
            .filter(|&j| resolvent[j] != 0.0)
            .map(|j| wb[j].conj() * wa[j] * resolvent[j])
            .sum();
        wa[manifold[b]] + second
    });
    let defect = (&out - out.adjoint()).iter().fold(0.0f64, |acc, c| acc.max(c.norm()));
    if defect > 1e-12 * out.iter().fold(1.0f64, |acc, c| acc.max(c.norm())) {
        return Err(Error::NotHermitian);
    }
    Ok(DenseOperator::new(out, true))
}

/// Two-flavor states with exactly one fermion per site, read as spins
/// (flavor 1 = up) with the phase `(-1)^{Σ_x x n_{2,x}}` that makes the
/// exchange amplitudes those of `S·S`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinManifold {
    pub indices: Vec<usize>,
    pub spins: Vec<u32>,
    pub signs: Vec<f64>,
}

pub fn singly_occupied_manifold(basis: &Basis) -> Result<SpinManifold> {
    if basis.flavors() != 2 || basis.statistics() != Statistics::Fermions {
        return Err(Error::Unsupported(
            "spin manifold needs a two-flavor fermion basis".into(),
        ));
    }
    let full = (1u32 << basis.n_sites()) - 1;
    let mut out = SpinManifold {
        indices: vec![],
        spins: vec![],
        signs: vec![],
    };
    for i in 0..basis.dim() {
        let (up, down) = (basis.occupation(i, 0), basis.occupation(i, 1));
        if up & down == 0 && up | down == full {
            let phase: u32 = (0..basis.n_sites())
                .filter(|x| (down >> x) & 1 == 1)
                .map(|x| x as u32)
                .sum();
            out.indices.push(i);
            out.spins.push(up);
            out.signs.push(if phase.is_multiple_of(2) { 1.0 } else { -1.0 });
        }
    }
    if out.indices.is_empty() {
        return Err(Error::EmptySector("no singly occupied states in the basis".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergMatch {
    pub j: f64,
    pub constant: f64,
    /// `max |M - (J H_S·S + c)| / max |M|` after the manifold phases.
    pub max_relative_deviation: f64,
    pub manifold_dim: usize,
    pub unperturbed_gap: f64,
}

/// Matches a manifold operator to `J Σ S·S + c`, fixing `J` by one exchange element.
pub fn match_heisenberg(m_eff: &DMatrix<C64>, manifold: &SpinManifold, n_sites: usize) -> Result<HeisenbergMatch> {
    let d = manifold.indices.len();
    if m_eff.nrows() != d || m_eff.ncols() != d {
        return Err(Error::Dimension {
            expected: d,
            got: m_eff.nrows(),
        });
    }
    let heis = HeisenbergModel::new(n_sites, 1.0, None)?;
    let target = DMatrix::from_fn(d, d, |b, a| heis.element(manifold.spins[b], manifold.spins[a]));
    let m = DMatrix::from_fn(d, d, |b, a| m_eff[(b, a)] * manifold.signs[a] * manifold.signs[b]);
    let (b, a) = (0..d)
        .flat_map(|b| (0..d).map(move |a| (b, a)))
        .find(|&(b, a)| a != b && target[(b, a)] != 0.0)
        .ok_or_else(|| Error::Fit("manifold carries no exchange element".into()))?;
    let j = m[(b, a)].re / target[(b, a)];
    let constant = m[(0, 0)].re - j * target[(0, 0)];
    let scale = m.iter().fold(0.0f64, |acc, c| acc.max(c.norm()));
    let mut worst = 0.0f64;
    for b in 0..d {
        for a in 0..d {
            let model = j * target[(b, a)] + if a == b { constant } else { 0.0 };
            worst = worst.max((m[(b, a)] - model).norm());
        }
    }
    Ok(HeisenbergMatch {
        j,
        constant,
        max_relative_deviation: worst / scale,
        manifold_dim: d,
        unperturbed_gap: 0.0,
    })
}

/// Second-order strong-coupling expansion of the two-flavor gauge-integrated model:
/// `H_u` is the Coulomb and mass part, `V` the hopping, the manifold the singly occupied states.
pub fn strong_coupling_heisenberg(
    spec: &LatticeSpec,
    couplings: &CouplingSet,
) -> Result<(HeisenbergMatch, DMatrix<C64>)> {
    if spec.flavors != 2 {
        return Err(Error::config("flavors", "the Heisenberg limit needs two flavors"));
    }
    let rep = GaugeRep::integrated(0.0)?;
    let basis = CoulombGasModel::basis_for(spec, ZeroMode::Classical, Filling::Total(spec.n_sites as u32))?;
    let mut static_part = couplings.clone();
    static_part.t = 0.0;
    let h_u_model = build_gauge_integrated(spec, &static_part, &rep, ZeroMode::Classical, basis.clone())?;
    let mut buf = Vec::new();
    let h_u = DiagonalOperator::new(
        (0..basis.dim())
            .map(|i| {
                buf.clear();
                h_u_model.column(i, &mut buf);
                buf.iter().filter(|(j, _)| *j == i).map(|(_, v)| v.re).sum()
            })
            .collect(),
    );
    let hopping = CouplingSet::new(0.0, couplings.t);
    let v = build_gauge_integrated(spec, &hopping, &rep, ZeroMode::Classical, basis.clone())?;
    let manifold = singly_occupied_manifold(&basis)?;
    let m_eff = degenerate_pt2(&h_u, &v, &manifold.indices)?;
    let e0 = h_u.values[manifold.indices[0]];
    let gap = (0..basis.dim())
        .filter(|i| !manifold.indices.contains(i))
        .map(|i| h_u.values[i] - e0)
        .fold(f64::INFINITY, f64::min);
    let mut matched = match_heisenberg(&m_eff.matrix, &manifold, spec.n_sites)?;
    matched.unperturbed_gap = gap;
    Ok((matched, m_eff.matrix))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::dense_diag;
    use crate::lattice::GaussConvention;
    use crate::models::{build_full_gauge_hamiltonian, gauss_generators, PenaltyModel};
    use crate::operator::{hermiticity_defect, to_dense};

    fn penalty_setup() -> (PenaltyModel, SectorProjectors, DiagonalOperator) {
        let spec = LatticeSpec::new(2, 1).unwrap();
        let rep = GaugeRep::schwinger_boson(0.5).unwrap();
        let basis = Basis::enumerate(&spec, &rep, Filling::half(&spec)).unwrap();
        let c = CouplingSet {
            m: 2.0,
            ..CouplingSet::default()
        };
        let model = build_penalty_model(&spec, &c, &rep, basis.clone()).unwrap();
        let gens = model.generators().unwrap();
        (model, sector_projectors(&basis, &gens).unwrap(), gauss_penalty(&gens))
    }

    #[test]
    fn projectors_are_complementary() {
        let (model, pr, _) = penalty_setup();
        let dim = model.basis().dim();
        for i in 0..dim {
            let (g, p) = (pr.gauge.values[i], pr.complement.values[i]);
            assert_eq!(g * g, g);
            assert_eq!(p * p, p);
            assert_eq!(g * p, 0.0);
        }
        assert_eq!(pr.rank_gauge() + pr.rank_complement(), dim);
        let sector = Basis::gauge_sector(model.spec(), model.rep(), Filling::half(model.spec())).unwrap();
        assert_eq!(pr.rank_gauge(), sector.dim());
    }

    #[test]
    fn infinite_gamma_is_the_projected_block() {
        let (model, pr, penalty) = penalty_setup();
        let heff = effective_first_order(&model, &pr, &penalty, None).unwrap();
        let dense = to_dense(&heff).unwrap();
        let full = to_dense(&model).unwrap();
        for (b, &i) in pr.sector().iter().enumerate() {
            for (a, &j) in pr.sector().iter().enumerate() {
                assert!((dense[(b, a)] - full[(i, j)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn gauge_invariant_h0_has_no_correction() {
        let spec = LatticeSpec::new(4, 1).unwrap();
        let rep = GaugeRep::truncated(1).unwrap();
        let basis = Basis::enumerate(&spec, &rep, Filling::half(&spec)).unwrap();
        let h = build_full_gauge_hamiltonian(&spec, &CouplingSet::new(1.0, 1.0), &rep, basis.clone()).unwrap();
        let gens = gauss_generators(&spec, &rep, &basis).unwrap();
        let pr = sector_projectors(&basis, &gens).unwrap();
        let penalty = gauss_penalty(&gens);
        let a = to_dense(&effective_first_order(&h, &pr, &penalty, None).unwrap()).unwrap();
        let b = to_dense(&effective_first_order(&h, &pr, &penalty, Some(3.0)).unwrap()).unwrap();
        assert!((a - b).camax() < 1e-14);
    }

    #[test]
    fn effective_hamiltonian_is_hermitian_and_bounded_by_the_full_model() {
        let (model, pr, penalty) = penalty_setup();
        let proj = dense_diag(&effective_first_order(&model, &pr, &penalty, None).unwrap()).unwrap();
        for gamma in [5.0, 20.0, 80.0] {
            let heff = effective_first_order(&model, &pr, &penalty, Some(gamma)).unwrap();
            assert!(hermiticity_defect(&heff, 10, 1) < 1e-12);
            let full = dense_diag(&model.with_gamma(gamma).unwrap()).unwrap();
            assert!(full.eigenvalues[0] <= proj.eigenvalues[0] + 1e-12);
        }
    }

    #[test]
    fn effective_residual_shrinks_quadratically() {
        let (model, pr, penalty) = penalty_setup();
        let err = |gamma: f64| {
            let full = dense_diag(&model.with_gamma(gamma).unwrap()).unwrap().eigenvalues[0];
            let eff = dense_diag(&effective_first_order(&model, &pr, &penalty, Some(gamma)).unwrap())
                .unwrap()
                .eigenvalues[0];
            (full - eff).abs()
        };
        let e: Vec<f64> = [20.0, 40.0, 80.0].iter().map(|&g| err(g)).collect();
        for w in e.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..=4.5).contains(&ratio), "{ratio}");
        }
    }

    #[test]
    fn scan_exponents_and_monotone_violation() {
        let spec = LatticeSpec::new(2, 1).unwrap();
        let rep = GaugeRep::schwinger_boson(0.5).unwrap();
        let c = CouplingSet {
            m: 2.0,
            ..CouplingSet::default()
        };
        let report = penalty_scan(
            &spec,
            &c,
            &rep,
            &[10.0, 20.0, 40.0, 80.0, 160.0],
            3,
            &SolverConfig::default(),
        )
        .unwrap();
        assert!((report.energy_exponent.as_ref().unwrap().slope + 1.0).abs() < 0.2);
        assert!((report.violation_exponent.as_ref().unwrap().slope + 2.0).abs() < 0.3);
        for w in report.rows.windows(2) {
            assert!(w[0].gamma < w[1].gamma);
            assert!(w[1].violation <= w[0].violation);
        }
        assert!(report.rows.iter().all(|r| r.violation >= 0.0));
    }

    #[test]
    fn scan_of_gauge_invariant_model_is_exact() {
        // Without boson hopping and at U = 0 the bare model still mixes sectors through
        // fermion hopping; with t_F = 0 as well it is diagonal and commutes with every G_x.
        let spec = LatticeSpec::new(2, 1).unwrap();
        let rep = GaugeRep::schwinger_boson(0.5).unwrap();
        let c = CouplingSet {
            t_f: 0.0,
            t_b: 0.0,
            m: 1.0,
            ..CouplingSet::default()
        };
        let report = penalty_scan(&spec, &c, &rep, &[1.0, 2.0, 4.0], 2, &SolverConfig::default()).unwrap();
        for row in &report.rows {
            assert_eq!(row.violation, 0.0);
            assert!((row.full[0] - row.projected[0]).abs() < 1e-14);
        }
        assert!(report.energy_exponent.is_none() && report.violation_exponent.is_none());
    }

    #[test]
    fn scan_rejects_bad_gamma_lists() {
        let spec = LatticeSpec::new(2, 1).unwrap();
        let rep = GaugeRep::schwinger_boson(0.5).unwrap();
        let cfg = SolverConfig::default();
        let c = CouplingSet::default();
        assert!(penalty_scan(&spec, &c, &rep, &[1.0, 2.0], 1, &cfg).is_err());
        assert!(penalty_scan(&spec, &c, &rep, &[1.0, 3.0, 2.0], 1, &cfg).is_err());
        assert!(penalty_scan(&spec, &c, &rep, &[-1.0, 2.0, 3.0], 1, &cfg).is_err());
    }

    #[test]
    fn two_level_second_order_shift() {
        let (delta, v) = (2.0, 0.3);
        let h_u = DiagonalOperator::new(vec![0.0, delta]);
        let pert = DenseOperator::new(
            DMatrix::from_row_slice(
                2,
                2,
                &[
                    C64::new(0.0, 0.0),
                    C64::new(v, 0.0),
                    C64::new(v, 0.0),
                    C64::new(0.0, 0.0),
                ],
            ),
            true,
        );
        let m = degenerate_pt2(&h_u, &pert, &[0]).unwrap();
        assert!((m.matrix[(0, 0)].re + v * v / delta).abs() < 1e-15);
    }

    #[test]
    fn diagonal_perturbation_is_first_order_only() {
        let h_u = DiagonalOperator::new(vec![0.0, 0.0, 1.0]);
        let pert = DenseOperator::new(
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                C64::new(0.5, 0.0),
                C64::new(-0.2, 0.0),
                C64::new(3.0, 0.0),
            ])),
            true,
        );
        let m = degenerate_pt2(&h_u, &pert, &[0, 1]).unwrap();
        assert!((m.matrix[(0, 0)].re - 0.5).abs() < 1e-15 && (m.matrix[(1, 1)].re + 0.2).abs() < 1e-15);
        assert_eq!(m.matrix[(0, 1)], C64::new(0.0, 0.0));
        assert!(matches!(
            degenerate_pt2(&h_u, &pert, &[0]),
            Err(Error::Degeneracy { .. })
        ));
    }

    #[test]
    fn two_flavor_strong_coupling_is_heisenberg() {
        let spec = LatticeSpec::new(4, 2)
            .unwrap()
            .with_convention(GaussConvention::UniformHalf);
        let (e, t) = (1.0, 0.3);
        let (m, _) = strong_coupling_heisenberg(&spec, &CouplingSet::new(e, t)).unwrap();
        assert_eq!(m.manifold_dim, 16);
        assert!(m.max_relative_deviation < 1e-8, "{}", m.max_relative_deviation);
        // Exchange through one nearest-neighbour pair: dipole energy e²a(N-1)/2N.
        let delta = e * e * 3.0 / 8.0;
        assert!(m.j > 0.0);
        assert!((m.j - t * t / delta).abs() < 1e-12, "{}", m.j);
        assert!((m.unperturbed_gap - delta).abs() < 1e-12);
    }
}
