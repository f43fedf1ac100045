//! Low-lying spectra: restarted Lanczos with locking, and a dense oracle.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operator::{inner, norm, random_unit_vector, to_dense, LinearOperator, C64, DENSE_LIMIT};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub k: usize,
    pub tol: f64,
    /// Cap on operator applications.
    pub max_iter: usize,
    pub seed: u64,
    pub reorthogonalize: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            k: 5,
            tol: 1e-10,
            max_iter: 20_000,
            seed: 20_240_601,
            reorthogonalize: true,
        }
    }
}

impl SolverConfig {
    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("k", "must be at least 1"));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::config("tol", "must be finite and positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::config("max_iter", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<C64>>>,
    pub residual_norms: Vec<f64>,
}

/// Run of eigenvalues whose consecutive spacings are within a tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
    pub first: usize,
}

impl Spectrum {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn ground_state(&self) -> Option<&[C64]> {
        self.eigenvectors.as_ref().map(|v| v[0].as_slice())
    }

    pub fn clusters(&self, tol: f64) -> Vec<Cluster> {
        cluster_values(&self.eigenvalues, tol)
    }
}

/// Groups sorted values; a cluster's value is its mean.
pub fn cluster_values(values: &[f64], tol: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            if i > start {
                let slice = &values[start..i];
                out.push(Cluster {
                    value: slice.iter().sum::<f64>() / slice.len() as f64,
                    multiplicity: slice.len(),
                    first: start,
                });
            }
            start = i;
        }
    }
    out
}

/// Lowest `k` eigenpairs: dense below [`DENSE_LIMIT`], Lanczos above.
pub fn solve_lowest(op: &dyn LinearOperator, k: usize, solver: &SolverConfig) -> Result<Spectrum> {
    let k = k.min(op.dim());
    let mut s = if op.dim() <= DENSE_LIMIT {
        dense_diag(op)?
    } else {
        lanczos_lowest(op, &solver.clone().with_k(k))?
    };
    s.eigenvalues.truncate(k);
    s.residual_norms.truncate(k);
    if let Some(v) = s.eigenvectors.as_mut() {
        v.truncate(k);
    }
    Ok(s)
}

pub fn lanczos_lowest(op: &dyn LinearOperator, cfg: &SolverConfig) -> Result<Spectrum> {
    lanczos_lowest_traced(op, cfg).map(|(s, _)| s)
}

/// Also returns the lowest Ritz value after every step of the first Krylov run.
pub fn lanczos_lowest_traced(op: &dyn LinearOperator, cfg: &SolverConfig) -> Result<(Spectrum, Vec<f64>)> {
    cfg.validate()?;
    if !op.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    let n = op.dim();
    if n < cfg.k {
        return Err(Error::config("k", format!("{} exceeds the dimension {n}", cfg.k)));
    }
    let mut solver = Lanczos {
        op,
        cfg,
        n,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        locked: Vec::new(),
        matvecs: 0,
        best_residuals: Vec::new(),
    };
    let mut trace = Vec::new();
    let mut restart: Option<Vec<C64>> = None;
    let mut first = true;
    loop {
        if solver.locked.len() == n {
            break;
        }
        let verifying = solver.locked.len() >= cfg.k;
        let need = cfg.k.saturating_sub(solver.locked.len()).max(1);
        let start = solver.start_vector(restart.take());
        let outcome = solver.krylov_run(start, need, if first { Some(&mut trace) } else { None })?;
        first = false;
        if verifying {
            let kth = solver.kth_locked(cfg.k);
            match outcome.accepted.first() {
                Some(pair) if pair.0 < kth - cfg.tol => {}
                Some(_) => break,
                None if outcome.invariant => break,
                None => {
                    // Unconverged but its lowest Ritz value already bounds the complement.
                    if outcome.lowest_ritz >= kth - cfg.tol {
                        break;
                    }
                }
            }
        }
        let accepted_any = !outcome.accepted.is_empty();
        for pair in outcome.accepted {
            solver.lock(pair);
        }
        if !accepted_any && !outcome.invariant {
            restart = outcome.restart;
        }
        if solver.matvecs > cfg.max_iter {
            let mut residuals = solver.best_residuals.clone();
            residuals.truncate(cfg.k);
            return Err(Error::NoConvergence {
                iterations: solver.matvecs,
                residuals,
            });
        }
    }
    let mut pairs = std::mem::take(&mut solver.locked);
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.truncate(cfg.k);
    let spectrum = Spectrum {
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        residual_norms: pairs.iter().map(|p| p.2).collect(),
        eigenvectors: Some(pairs.into_iter().map(|p| p.1).collect()),
    };
    Ok((spectrum, trace))
}

type Pair = (f64, Vec<C64>, f64);

struct RunOutcome {
    accepted: Vec<Pair>,
    invariant: bool,
    lowest_ritz: f64,
    restart: Option<Vec<C64>>,
}

struct Lanczos<'a> {
    op: &'a dyn LinearOperator,
    cfg: &'a SolverConfig,
    n: usize,
    rng: ChaCha8Rng,
    locked: Vec<Pair>,
    matvecs: usize,
    best_residuals: Vec<f64>,
}

impl Lanczos<'_> {
    fn kth_locked(&self, k: usize) -> f64 {
        let mut vals: Vec<f64> = self.locked.iter().map(|p| p.0).collect();
        vals.sort_by(f64::total_cmp);
        vals[k - 1]
    }

    fn apply(&mut self, x: &[C64]) -> Vec<C64> {
        self.matvecs += 1;
        self.op.apply_vec(x)
    }

    fn deflate(&self, w: &mut [C64]) {
        for _ in 0..2 {
            for (_, u, _) in &self.locked {
                let c = inner(u, w);
                w.iter_mut().zip(u).for_each(|(wi, ui)| *wi -= c * ui);
            }
        }
    }

    fn start_vector(&mut self, hint: Option<Vec<C64>>) -> Vec<C64> {
        let mut v = hint.unwrap_or_else(|| random_unit_vector(self.n, &mut self.rng));
        loop {
            self.deflate(&mut v);
            let nv = norm(&v);
            if nv > 1e-8 {
                v.iter_mut().for_each(|x| *x /= nv);
                return v;
            }
            v = random_unit_vector(self.n, &mut self.rng);
        }
    }

    fn lock(&mut self, (_, mut v, _): Pair) {
        self.deflate(&mut v);
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        let av = self.apply(&v);
        let theta = inner(&v, &av).re;
        let r: Vec<C64> = av.iter().zip(&v).map(|(a, b)| a - b * theta).collect();
        let residual = norm(&r);
        self.locked.push((theta, v, residual));
    }

    fn krylov_run(&mut self, v0: Vec<C64>, need: usize, mut trace: Option<&mut Vec<f64>>) -> Result<RunOutcome> {
        let complement = self.n - self.locked.len();
        let max_dim = complement.min((3 * need + 60).max(120));
        let mut basis: Vec<Vec<C64>> = vec![v0];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut scale: f64 = 0.0;
        let mut invariant = false;
        let target = 0.25 * self.cfg.tol;
        loop {
            let j = basis.len() - 1;
            let mut w = self.apply(&basis[j]);
            let a = inner(&basis[j], &w).re;
            alpha.push(a);
            w.iter_mut().zip(&basis[j]).for_each(|(wi, vi)| *wi -= vi * a);
            if j > 0 {
                let b = beta[j - 1];
                w.iter_mut().zip(&basis[j - 1]).for_each(|(wi, vi)| *wi -= vi * b);
            }
            if self.cfg.reorthogonalize {
                for _ in 0..2 {
                    for v in &basis {
                        let c = inner(v, &w);
                        w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
                    }
                }
            }
            self.deflate(&mut w);
            let b = norm(&w);
            scale = scale.max(a.abs()).max(b);
            let m = alpha.len();
            if let Some(t) = trace.as_deref_mut() {
                let (vals, _) = tridiagonal_eigen(&alpha, &beta);
                t.push(vals[0]);
            }
            if b <= 1e-13 * scale.max(1e-300) {
                invariant = true;
            }
            let exhausted = m >= max_dim;
            let check = invariant || exhausted || m.is_multiple_of(5);
            if check && (invariant || m >= need.min(complement)) {
                let (vals, vecs) = tridiagonal_eigen(&alpha, &beta);
                let want = need.min(m);
                let estimates: Vec<f64> = (0..want).map(|i| (b * vecs[(m - 1, i)]).abs()).collect();
                let converged = invariant || estimates.iter().all(|&r| r <= target);
                if converged || exhausted {
                    return Ok(self.finish(&basis, &vals, &vecs, want, invariant, estimates));
                }
            }
            if invariant {
                unreachable!("invariant runs always finish");
            }
            beta.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            basis.push(w);
            if self.matvecs > self.cfg.max_iter {
                let (vals, vecs) = tridiagonal_eigen(&alpha, &beta[..alpha.len() - 1]);
                let want = need.min(alpha.len());
                let est = vec![f64::INFINITY; want];
                let outcome = self.finish(&basis[..alpha.len()], &vals, &vecs, want, false, est);
                return Ok(outcome);
            }
        }
    }

    fn finish(
        &mut self,
        basis: &[Vec<C64>],
        vals: &[f64],
        vecs: &DMatrix<f64>,
        want: usize,
        invariant: bool,
        estimates: Vec<f64>,
    ) -> RunOutcome {
        let m = vals.len();
        let candidates = if invariant { m } else { want };
        let mut accepted = Vec::new();
        let mut residuals = Vec::new();
        let mut restart = vec![C64::new(0.0, 0.0); self.n];
        for i in 0..candidates {
            let mut x = vec![C64::new(0.0, 0.0); self.n];
            for (jdx, v) in basis.iter().enumerate().take(m) {
                let c = vecs[(jdx, i)];
                x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += vi * c);
            }
            let nx = norm(&x);
            x.iter_mut().for_each(|xi| *xi /= nx);
            let ok = invariant || estimates.get(i).is_some_and(|&e| e <= self.cfg.tol);
            if !ok {
                restart.iter_mut().zip(&x).for_each(|(r, xi)| *r += xi);
                residuals.push(estimates.get(i).copied().unwrap_or(f64::INFINITY));
                continue;
            }
            let ax = self.apply(&x);
            let r: Vec<C64> = ax.iter().zip(&x).map(|(a, b)| a - b * vals[i]).collect();
            let res = norm(&r);
            residuals.push(res);
            if res <= self.cfg.tol {
                accepted.push((vals[i], x, res));
            } else {
                restart.iter_mut().zip(&x).for_each(|(r, xi)| *r += xi);
            }
        }
        if self.best_residuals.is_empty() || residuals.iter().sum::<f64>() < self.best_residuals.iter().sum::<f64>() {
            self.best_residuals = residuals;
        }
        let restart = (norm(&restart) > 0.0).then_some(restart);
        RunOutcome {
            accepted,
            invariant,
            lowest_ritz: vals[0],
            restart,
        }
    }
}

/// Eigenpairs of the symmetric tridiagonal matrix, ascending.
fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Full spectrum of the materialized matrix; dimension at most 4096.
pub fn dense_diag(op: &dyn LinearOperator) -> Result<Spectrum> {
    if !op.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    let a = to_dense(op)?;
    let n = a.nrows();
    let real = a.iter().all(|z| z.im == 0.0);
    let (values, vectors): (Vec<f64>, DMatrix<C64>) = if real {
        let eig = SymmetricEigen::new(a.map(|z| z.re));
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|x| C64::new(x, 0.0)),
        )
    } else {
        let eig = SymmetricEigen::new(a);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| values[x].total_cmp(&values[y]));
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    let mut residual_norms = Vec::with_capacity(n);
    for &i in &order {
        let v: Vec<C64> = vectors.column(i).iter().copied().collect();
        let av = op.apply_vec(&v);
        let r: Vec<C64> = av.iter().zip(&v).map(|(x, y)| x - y * values[i]).collect();
        residual_norms.push(norm(&r));
        eigenvalues.push(values[i]);
        eigenvectors.push(v);
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: Some(eigenvectors),
        residual_norms,
    })
}
