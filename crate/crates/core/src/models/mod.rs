//! Hamiltonians of every formulation, each a matrix-free Hermitian operator over a [`Basis`].

pub mod boson;
pub mod coulomb_gas;
pub mod links;
pub mod spin;
pub mod wilson;

use crate::basis::Basis;
use crate::operator::{LinearOperator, MatrixElements};

pub use boson::{build_penalty_model, build_schwinger_boson_model, BosonModel, PenaltyModel};
pub use coulomb_gas::{build_gauge_integrated, CoulombGasModel, ZeroMode};
pub use links::{build_link_operators, gauss_generator, gauss_generators, LinkNormalization, LinkOperators};
pub use spin::{build_spin_hamiltonian, jw_twist, SpinModel};
pub use wilson::{build_full_gauge_hamiltonian, WilsonModel};

pub trait Model: LinearOperator + MatrixElements {
    fn basis(&self) -> &Basis;

    /// Compact `key=value` description of the model and its couplings.
    fn descriptor(&self) -> String;
}

/// Staggered mass `m Σ_{f,x} (-1)^x n_{f,x}` on one key.
pub(crate) fn mass_energy(basis: &Basis, key: u128, m: f64) -> f64 {
    if m == 0.0 {
        return 0.0;
    }
    const EVEN: u32 = 0x5555_5555;
    let mut total = 0i64;
    for f in 0..basis.flavors() {
        let occ = basis.key_occupation(key, f);
        total += (occ & EVEN).count_ones() as i64 - (occ & !EVEN).count_ones() as i64;
    }
    m * total as f64
}

/// Hops of one flavor across bond `(x, x+1)`: calls `visit(x, y, forward, new_mask, sign)`
/// where `forward` means the particle moves from `x` to `y = x+1 mod N`.
pub(crate) fn bond_hops(mask: u32, n_sites: usize, mut visit: impl FnMut(usize, usize, bool, u32, f64)) {
    for x in 0..n_sites {
        let y = (x + 1) % n_sites;
        let bx = (mask >> x) & 1;
        let by = (mask >> y) & 1;
        if bx == by {
            continue;
        }
        let new_mask = mask ^ (1 << x) ^ (1 << y);
        let sign = crate::basis::hop_sign(mask, x, y);
        visit(x, y, bx == 1, new_mask, sign);
    }
}
