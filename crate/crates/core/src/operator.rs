//! Linear operators on basis-indexed complex vectors.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest dimension that may be materialized densely.
pub const DENSE_LIMIT: usize = 4096;

pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    fn is_hermitian(&self) -> bool {
        true
    }

    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[C64], y: &mut [C64]);

    fn apply_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply(x, &mut y);
        y
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn is_hermitian(&self) -> bool {
        (**self).is_hermitian()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        (**self).apply(x, y)
    }
}

/// Column-wise matrix-element generator of a Hermitian matrix.
pub trait MatrixElements: Sync {
    fn dim(&self) -> usize;

    /// Appends `(j, H[j][i])` for the nonzero entries of column `i`;
    /// repeated `j` are summed.
    fn column(&self, i: usize, out: &mut Vec<(usize, C64)>);
}

/// Matrix-free Hermitian product: `y_i = Σ_j conj(H[j][i]) x_j` over the
/// entries of column `i`. Each row is summed sequentially in column order,
/// so the result is bitwise independent of the thread count.
pub fn hermitian_gather<M: MatrixElements + ?Sized>(m: &M, x: &[C64], y: &mut [C64]) {
    assert_eq!(x.len(), m.dim());
    assert_eq!(y.len(), m.dim());
    y.par_iter_mut()
        .enumerate()
        .with_min_len(64)
        .for_each_init(Vec::new, |buf, (i, yi)| {
            buf.clear();
            m.column(i, buf);
            let mut acc = C64::new(0.0, 0.0);
            for &(j, h) in buf.iter() {
                acc += h.conj() * x[j];
            }
            *yi = acc;
        });
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    pub values: Vec<f64>,
}

impl DiagonalOperator {
    pub fn new(values: Vec<f64>) -> Self {
        DiagonalOperator { values }
    }

    pub fn squared(&self) -> DiagonalOperator {
        DiagonalOperator::new(self.values.iter().map(|v| v * v).collect())
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.abs() < tol)
    }
}

impl LinearOperator for DiagonalOperator {
    fn dim(&self) -> usize {
        self.values.len()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.values) {
            *yi = xi * d;
        }
    }
}

impl MatrixElements for DiagonalOperator {
    fn dim(&self) -> usize {
        self.values.len()
    }
    fn column(&self, i: usize, out: &mut Vec<(usize, C64)>) {
        if self.values[i] != 0.0 {
            out.push((i, C64::new(self.values[i], 0.0)));
        }
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub matrix: DMatrix<C64>,
    pub hermitian: bool,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<C64>, hermitian: bool) -> Self {
        assert!(matrix.is_square());
        DenseOperator { matrix, hermitian }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn is_hermitian(&self) -> bool {
        self.hermitian
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let n = self.dim();
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                acc += self.matrix[(i, j)] * x[j];
            }
            y[i] = acc;
        }
    }
}

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    hermitian: bool,
}

impl SparseMatrix {
    /// Materializes a Hermitian generator; duplicates are merged and exact
    /// zeros dropped.
    pub fn from_elements<M: MatrixElements + ?Sized>(m: &M) -> Self {
        let n = m.dim();
        let rows: Vec<Vec<(usize, C64)>> = (0..n)
            .into_par_iter()
            .map_init(Vec::new, |buf, i| {
                buf.clear();
                m.column(i, buf);
                let mut row: Vec<(usize, C64)> = buf.iter().map(|&(j, h)| (j, h.conj())).collect();
                merge_sorted(&mut row);
                row
            })
            .collect();
        Self::from_rows(n, rows, true)
    }

    /// Materializes any operator by applying it to unit vectors.
    pub fn from_operator(op: &dyn LinearOperator) -> Self {
        let n = op.dim();
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
        let mut e = vec![C64::new(0.0, 0.0); n];
        let mut col = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = C64::new(1.0, 0.0);
            op.apply(&e, &mut col);
            e[j] = C64::new(0.0, 0.0);
            for (i, v) in col.iter().enumerate() {
                if *v != C64::new(0.0, 0.0) {
                    rows[i].push((j, *v));
                }
            }
        }
        Self::from_rows(n, rows, op.is_hermitian())
    }

    fn from_rows(n: usize, rows: Vec<Vec<(usize, C64)>>, hermitian: bool) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for row in rows {
            for (j, v) in row {
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        SparseMatrix {
            dim: n,
            row_ptr,
            cols,
            vals,
            hermitian,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.dim
    }
    fn is_hermitian(&self) -> bool {
        self.hermitian
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.par_iter_mut().enumerate().with_min_len(256).for_each(|(i, yi)| {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        });
    }
}

fn merge_sorted(row: &mut Vec<(usize, C64)>) {
    row.sort_by_key(|&(j, _)| j);
    let mut out: Vec<(usize, C64)> = Vec::with_capacity(row.len());
    for &(j, v) in row.iter() {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += v,
            _ => out.push((j, v)),
        }
    }
    out.retain(|&(_, v)| v != C64::new(0.0, 0.0));
    *row = out;
}

/// Dense matrix of any operator with dimension at most [`DENSE_LIMIT`].
pub fn to_dense(op: &dyn LinearOperator) -> Result<DMatrix<C64>> {
    let n = op.dim();
    if n > DENSE_LIMIT {
        return Err(Error::Capacity {
            what: "dense materialization",
            required: n as u128,
            limit: DENSE_LIMIT as u128,
        });
    }
    let mut m = DMatrix::<C64>::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    let mut col = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        op.apply(&e, &mut col);
        e[j] = C64::new(0.0, 0.0);
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    Ok(m)
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Unit vector with independent uniform real and imaginary parts.
pub fn random_unit_vector(dim: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x /= n);
    v
}

/// Largest `|<u, A v> - <A u, v>|` over random unit vectors.
pub fn hermiticity_defect(op: &dyn LinearOperator, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let u = random_unit_vector(op.dim(), &mut rng);
        let v = random_unit_vector(op.dim(), &mut rng);
        let av = op.apply_vec(&v);
        let au = op.apply_vec(&u);
        worst = worst.max((inner(&u, &av) - inner(&au, &v)).norm());
    }
    worst
}

/// Largest `‖A(αu + βv) - αAu - βAv‖` over random unit vectors.
pub fn linearity_defect(op: &dyn LinearOperator, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let u = random_unit_vector(op.dim(), &mut rng);
        let v = random_unit_vector(op.dim(), &mut rng);
        let alpha = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let beta = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let w: Vec<C64> = u.iter().zip(&v).map(|(a, b)| alpha * a + beta * b).collect();
        let aw = op.apply_vec(&w);
        let au = op.apply_vec(&u);
        let av = op.apply_vec(&v);
        let diff: Vec<C64> = (0..op.dim()).map(|i| aw[i] - alpha * au[i] - beta * av[i]).collect();
        worst = worst.max(norm(&diff));
    }
    worst
}

/// Largest `‖(A B - B A) v‖ / ‖v‖` over random vectors.
pub fn commutator_defect(a: &dyn LinearOperator, b: &dyn LinearOperator, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let v = random_unit_vector(a.dim(), &mut rng);
        let abv = a.apply_vec(&b.apply_vec(&v));
        let bav = b.apply_vec(&a.apply_vec(&v));
        let diff: Vec<C64> = abv.iter().zip(&bav).map(|(x, y)| x - y).collect();
        worst = worst.max(norm(&diff));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Ring(usize);

    impl MatrixElements for Ring {
        fn dim(&self) -> usize {
            self.0
        }
        fn column(&self, i: usize, out: &mut Vec<(usize, C64)>) {
            let n = self.0;
            out.push(((i + 1) % n, C64::new(0.0, -0.5)));
            out.push(((i + n - 1) % n, C64::new(0.0, 0.5)));
            out.push((i, C64::new(i as f64, 0.0)));
        }
    }

    impl LinearOperator for Ring {
        fn dim(&self) -> usize {
            self.0
        }
        fn apply(&self, x: &[C64], y: &mut [C64]) {
            hermitian_gather(self, x, y)
        }
    }

    #[test]
    fn gather_matches_materialized_matrix() {
        let op = Ring(7);
        let dense = to_dense(&op).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                assert!((dense[(i, j)] - dense[(j, i)].conj()).norm() < 1e-15);
            }
        }
        let sparse = SparseMatrix::from_elements(&op);
        // the zero diagonal entry of row 0 is dropped
        assert_eq!(sparse.nnz(), 20);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random_unit_vector(7, &mut rng);
        let a = op.apply_vec(&v);
        let b = sparse.apply_vec(&v);
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).norm() < 1e-15));
        assert!((sparse.get(1, 0) - C64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((sparse.get(1, 0) - dense[(1, 0)]).norm() < 1e-15);
    }

    #[test]
    fn two_site_ring_duplicates_are_summed() {
        let op = Ring(2);
        let sparse = SparseMatrix::from_elements(&op);
        // both neighbours of site 0 are site 1 and their amplitudes cancel
        assert_eq!(sparse.get(0, 1), C64::new(0.0, 0.0));
    }

    #[test]
    fn checks_on_hermitian_operator() {
        let op = Ring(9);
        assert!(hermiticity_defect(&op, 20, 1) < 1e-12);
        assert!(linearity_defect(&op, 20, 2) < 1e-12);
        let d = DiagonalOperator::new(vec![1.0; 9]);
        assert!(commutator_defect(&op, &d, 5, 3) < 1e-12);
    }

    #[test]
    fn dense_cap_is_enforced() {
        let d = DiagonalOperator::new(vec![0.0; DENSE_LIMIT + 1]);
        assert!(matches!(to_dense(&d), Err(Error::Capacity { .. })));
    }
}
