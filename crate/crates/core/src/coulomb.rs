//! Lattice Coulomb kernel: the periodic inverse Laplacian with the zero mode removed.

use std::f64::consts::PI;

/// `V(d) = (1/N) Σ_{n=1}^{N-1} cos(2πnd/N) / (4 sin²(πn/N))`.
pub fn coulomb_potential(n: usize, d: usize) -> f64 {
    assert!(n >= 2 && d < n, "coulomb_potential needs N >= 2 and 0 <= d < N");
    let nf = n as f64;
    let sum: f64 = (1..n)
        .map(|k| {
            let s = (PI * k as f64 / nf).sin();
            (2.0 * PI * (k * d) as f64 / nf).cos() / (4.0 * s * s)
        })
        .sum();
    sum / nf
}

/// Dense `N x N` matrix `V(|x - y| mod N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoulombKernel {
    n: usize,
    values: Vec<f64>,
}

impl CoulombKernel {
    pub fn new(n: usize) -> Self {
        let profile: Vec<f64> = (0..n).map(|d| coulomb_potential(n, d)).collect();
        let mut values = vec![0.0; n * n];
        for x in 0..n {
            for y in 0..n {
                values[x * n + y] = profile[(x + n - y) % n];
            }
        }
        CoulombKernel { n, values }
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.n + y]
    }

    /// `Σ_{x,y} ρ_x V(x-y) ρ_y`.
    pub fn energy(&self, rho: &[f64]) -> f64 {
        debug_assert_eq!(rho.len(), self.n);
        let mut total = 0.0;
        for (x, &rx) in rho.iter().enumerate() {
            if rx == 0.0 {
                continue;
            }
            let row = &self.values[x * self.n..(x + 1) * self.n];
            total += rx * row.iter().zip(rho).map(|(v, r)| v * r).sum::<f64>();
        }
        total
    }
}
