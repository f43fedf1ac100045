//! Measurements on eigenvectors: condensate, gap, Gauss-law violation,
//! charge and field profiles, and the Heisenberg reference chain.

use crate::basis::Basis;
use crate::eigen::{cluster_values, dense_diag, Spectrum};
use crate::error::{Error, Result};
use crate::lattice::{GaugeRep, LatticeSpec, LinkField};
use crate::operator::{hermitian_gather, DiagonalOperator, LinearOperator, MatrixElements, C64};
use crate::symmetry::SymmetryOperator;

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableEntry {
    pub name: String,
    pub value: f64,
    /// Non-negative when present.
    pub uncertainty: Option<f64>,
    pub descriptor: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservableReport {
    pub entries: Vec<ObservableEntry>,
}

impl ObservableReport {
    pub fn push(&mut self, name: impl Into<String>, value: f64, uncertainty: Option<f64>, descriptor: &str) {
        debug_assert!(uncertainty.is_none_or(|u| u >= 0.0));
        self.entries.push(ObservableEntry {
            name: name.into(),
            value,
            uncertainty,
            descriptor: descriptor.to_string(),
        });
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.value)
    }
}

fn weights(state: &[C64]) -> Vec<f64> {
    let norm2: f64 = state.iter().map(|c| c.norm_sqr()).sum();
    state.iter().map(|c| c.norm_sqr() / norm2).collect()
}

fn check_state(state: &[C64], dim: usize) -> Result<()> {
    if state.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: state.len(),
        });
    }
    Ok(())
}

/// `χ = (1/N) Σ_x (-1)^x ⟨n_x - 1/2⟩`, in units of `1/a`.
pub fn chiral_condensate(state: &[C64], basis: &Basis, spec: &LatticeSpec) -> Result<f64> {
    if basis.flavors() != 1 {
        return Err(Error::Unsupported("the condensate is defined for one flavor".into()));
    }
    check_state(state, basis.dim())?;
    let n = spec.n_sites;
    let mut total = 0.0;
    for (i, w) in weights(state).into_iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let occ = basis.occupation(i, 0);
        let stag: f64 = (0..n)
            .map(|x| LatticeSpec::stagger(x) * (((occ >> x) & 1) as f64 - 0.5))
            .sum();
        total += w * stag;
    }
    Ok(total / (n as f64 * spec.spacing))
}

/// Distance between the two lowest eigenvalue clusters of width `tol`.
pub fn mass_gap(spectrum: &Spectrum, tol: f64) -> Result<f64> {
    let clusters = cluster_values(&spectrum.eigenvalues, tol);
    if clusters.len() < 2 {
        return Err(Error::UndefinedGap);
    }
    Ok(clusters[1].value - clusters[0].value)
}

/// `Σ_x ⟨G_x²⟩` for a normalized copy of `state`.
pub fn gauss_violation(state: &[C64], generators: &[DiagonalOperator]) -> f64 {
    let w = weights(state);
    generators
        .iter()
        .map(|g| g.values.iter().zip(&w).map(|(v, p)| v * v * p).sum::<f64>())
        .sum()
}

/// `⟨ρ_x⟩` for every site, `⟨E_x⟩` for every link when the rep has links, and the total charge.
pub fn charge_and_field_profile(
    state: &[C64],
    basis: &Basis,
    spec: &LatticeSpec,
    rep: &GaugeRep,
    descriptor: &str,
) -> Result<ObservableReport> {
    check_state(state, basis.dim())?;
    let n = spec.n_sites;
    let w = weights(state);
    let mut rho = vec![0.0; n];
    let mut field = vec![0.0; n];
    let link_field = if rep.has_links() && basis.links().count == n {
        Some(LinkField::new(spec, rep)?)
    } else {
        None
    };
    for (i, &p) in w.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let key = basis.key(i);
        for x in 0..n {
            rho[x] += p * spec.charge(x, basis.site_occupation(key, x));
            if let Some(f) = &link_field {
                field[x] += p * f.value(x, basis.key_link(key, x));
            }
        }
    }
    let mut report = ObservableReport::default();
    for (x, r) in rho.iter().enumerate() {
        report.push(format!("rho_{x}"), *r, None, descriptor);
    }
    if link_field.is_some() {
        for (x, e) in field.iter().enumerate() {
            report.push(format!("E_{x}"), *e, None, descriptor);
        }
    }
    report.push("total_charge", rho.iter().sum(), None, descriptor);
    Ok(report)
}

/// `⟨v| U |v⟩ / ⟨v|v⟩`.
pub fn symmetry_expectation(op: &SymmetryOperator, state: &[C64]) -> C64 {
    let norm2: f64 = state.iter().map(|c| c.norm_sqr()).sum();
    op.expectation(state) / norm2
}

/// `H = J Σ_x S_x · S_{x+1}` on a periodic spin-1/2 ring; two sites share a single bond.
#[derive(Debug, Clone)]
pub struct HeisenbergModel {
    j: f64,
    bonds: Vec<(usize, usize)>,
    basis: Basis,
}

impl HeisenbergModel {
    pub fn new(n_sites: usize, j: f64, up: Option<u32>) -> Result<Self> {
        if n_sites < 2 || !n_sites.is_multiple_of(2) {
            return Err(Error::config(
                "n_sites",
                "Heisenberg ring needs an even length of at least 2",
            ));
        }
        if !j.is_finite() {
            return Err(Error::config("J", "must be finite"));
        }
        let bonds = if n_sites == 2 {
            vec![(0, 1)]
        } else {
            (0..n_sites).map(|x| (x, (x + 1) % n_sites)).collect()
        };
        Ok(HeisenbergModel {
            j,
            bonds,
            basis: Basis::spins(n_sites, up)?,
        })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// Matrix element `⟨b| H |a⟩` between two spin configurations (bit set = up).
    pub fn element(&self, b: u32, a: u32) -> f64 {
        let mut v = 0.0;
        for &(x, y) in &self.bonds {
            let (sx, sy) = ((a >> x) & 1, (a >> y) & 1);
            if b == a {
                v += if sx == sy { 0.25 } else { -0.25 };
            } else if sx != sy && b == a ^ (1 << x) ^ (1 << y) {
                v += 0.5;
            }
        }
        self.j * v
    }
}

impl MatrixElements for HeisenbergModel {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn column(&self, i: usize, out: &mut Vec<(usize, C64)>) {
        let a = self.basis.occupation(i, 0);
        out.push((i, C64::new(self.element(a, a), 0.0)));
        for &(x, y) in &self.bonds {
            if (a >> x) & 1 != (a >> y) & 1 {
                let b = a ^ (1 << x) ^ (1 << y);
                if let Some(j) = self.basis.index_of(self.basis.with_occupation(0, 0, b)) {
                    out.push((j, C64::new(0.5 * self.j, 0.0)));
                }
            }
        }
    }
}

impl LinearOperator for HeisenbergModel {
    fn dim(&self) -> usize {
        self.basis.dim()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        hermitian_gather(self, x, y)
    }
}

/// Full spectrum of the Heisenberg ring.
pub fn heisenberg_reference(n_sites: usize, j: f64) -> Result<Spectrum> {
    dense_diag(&HeisenbergModel::new(n_sites, j, None)?)
}
