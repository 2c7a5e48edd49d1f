//! Compressed-row matrices and the linear solvers used by the time stepper.
//!
//! * [`DirectSolver`]: sparse LU with fill-reducing ordering (faer).
//! * [`gmres`]: restarted GMRES, right-preconditioned with [`Ilu0`].

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::{Error, Result};
use crate::exec::Exec;

/// Square matrix in compressed sparse row form with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists. Duplicate columns are
    /// summed and exact zeros are dropped.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        debug_assert_eq!(rows.len(), n);
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    debug_assert!(c < n);
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn max_row_nnz(&self) -> usize {
        (0..self.n).map(|i| self.row_ptr[i + 1] - self.row_ptr[i]).max().unwrap_or(0)
    }

    /// `a·I + b·self`.
    pub fn shifted(&self, a: f64, b: f64) -> Self {
        let rows = (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                let mut r: Vec<(usize, f64)> = cols.iter().zip(vals).map(|(&c, &v)| (c, b * v)).collect();
                r.push((i, a));
                r
            })
            .collect();
        Self::from_rows(self.n, rows)
    }

    pub fn matvec(&self, x: &[f64], exec: Exec) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y, exec);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64], exec: Exec) {
        debug_assert_eq!(x.len(), self.n);
        if self.n == 0 {
            return;
        }
        const ROWS: usize = 512;
        exec.for_each_chunk(y, ROWS, |k, out| {
            for (r, o) in out.iter_mut().enumerate() {
                let (cols, vals) = self.row(k * ROWS + r);
                *o = cols.iter().zip(vals).map(|(&c, v)| v * x[c]).sum();
            }
        });
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c] = v;
            }
        }
        d
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let triplets: Vec<Triplet<usize, usize, f64>> = (0..self.n)
            .flat_map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(move |(&c, &v)| Triplet::new(i, c, v))
            })
            .collect();
        SparseColMat::try_new_from_triplets(self.n, self.n, &triplets)
            .map_err(|e| Error::Factorization(format!("{e:?}")))
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Relative residual `‖b − A x‖ / ‖b‖` (absolute when `b = 0`).
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64], exec: Exec) -> f64 {
    let ax = a.matvec(x, exec);
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (q - p) * (q - p)).sum::<f64>().sqrt();
    let nb = norm2(b);
    if nb > 0.0 {
        r / nb
    } else {
        r
    }
}

/// Sparse LU factorization of a fixed matrix.
pub struct DirectSolver {
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    n: usize,
}

impl std::fmt::Debug for DirectSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirectSolver").field("n", &self.n).finish()
    }
}

impl DirectSolver {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let m = a.to_faer()?;
        let lu = m.sp_lu().map_err(|e| Error::Factorization(format!("{e:?}")))?;
        Ok(Self { lu, n: a.n })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place(rhs.as_mut());
        (0..self.n).map(|i| rhs[(i, 0)]).collect()
    }

    /// Solves and refines until `‖b − A x‖ / ‖b‖ ≤ tol`, at most three extra passes.
    pub fn solve_refined(&self, a: &CsrMatrix, b: &[f64], tol: f64, exec: Exec) -> Result<Vec<f64>> {
        let mut x = self.solve(b);
        let mut history = vec![relative_residual(a, &x, b, exec)];
        for _ in 0..3 {
            if *history.last().unwrap() <= tol {
                return Ok(x);
            }
            let ax = a.matvec(&x, exec);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
            let dx = self.solve(&r);
            for (xi, d) in x.iter_mut().zip(dx) {
                *xi += d;
            }
            history.push(relative_residual(a, &x, b, exec));
        }
        if *history.last().unwrap() <= tol {
            Ok(x)
        } else {
            Err(Error::NoConvergence { history })
        }
    }
}

/// Incomplete LU with zero fill on the pattern of `a`.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let mut lu = a.clone();
        let n = lu.n;
        let mut diag = vec![usize::MAX; n];
        for (i, d) in diag.iter_mut().enumerate() {
            let (cols, _) = lu.row(i);
            if let Ok(k) = cols.binary_search(&i) {
                *d = lu.row_ptr[i] + k;
            } else {
                return Err(Error::Factorization(format!("ILU(0): missing diagonal in row {i}")));
            }
        }
        for i in 1..n {
            let (start, end) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for kk in start..end {
                let k = lu.col_idx[kk];
                if k >= i {
                    break;
                }
                let pivot = lu.values[diag[k]];
                if pivot == 0.0 {
                    return Err(Error::Factorization(format!("ILU(0): zero pivot in row {k}")));
                }
                let lik = lu.values[kk] / pivot;
                lu.values[kk] = lik;
                // row_i[j] -= l_ik * row_k[j] for j > k on the pattern of row i
                let (ks, ke) = (diag[k] + 1, lu.row_ptr[k + 1]);
                let mut p = kk + 1;
                for q in ks..ke {
                    let j = lu.col_idx[q];
                    while p < end && lu.col_idx[p] < j {
                        p += 1;
                    }
                    if p < end && lu.col_idx[p] == j {
                        lu.values[p] -= lik * lu.values[q];
                    }
                }
            }
        }
        Ok(Self { lu, diag })
    }

    /// Solves `L U z = r` in place.
    pub fn apply(&self, z: &mut [f64]) {
        let lu = &self.lu;
        for i in 0..lu.n {
            let mut s = z[i];
            for kk in lu.row_ptr[i]..self.diag[i] {
                s -= lu.values[kk] * z[lu.col_idx[kk]];
            }
            z[i] = s;
        }
        for i in (0..lu.n).rev() {
            let mut s = z[i];
            for kk in self.diag[i] + 1..lu.row_ptr[i + 1] {
                s -= lu.values[kk] * z[lu.col_idx[kk]];
            }
            z[i] = s / lu.values[self.diag[i]];
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            restart: 50,
            max_iter: 500,
        }
    }
}

/// Restarted GMRES with right preconditioning. Returns the solution and the
/// relative residual history (one entry per restart cycle, true residuals).
pub fn gmres(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    precond: Option<&Ilu0>,
    opts: GmresOptions,
    exec: Exec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = a.n;
    let bnorm = norm2(b);
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], vec![0.0]));
    }
    let m = opts.restart.max(1);
    let mut history = Vec::new();
    let mut iters = 0;
    loop {
        let ax = a.matvec(&x, exec);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = norm2(&r);
        history.push(beta / bnorm);
        if beta / bnorm <= opts.tol {
            return Ok((x, history));
        }
        if iters >= opts.max_iter {
            return Err(Error::NoConvergence { history });
        }

        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|t| t / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::new();
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let mut zk = v[k].clone();
            if let Some(p) = precond {
                p.apply(&mut zk);
            }
            let mut w = a.matvec(&zk, exec);
            z.push(zk);
            for (i, vi) in v.iter().enumerate() {
                let hik: f64 = w.iter().zip(vi).map(|(p, q)| p * q).sum();
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(vi) {
                    *wj -= hik * vj;
                }
            }
            let hn = norm2(&w);
            h[k + 1][k] = hn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = h[k][k].hypot(h[k + 1][k]);
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            iters += 1;
            if hn == 0.0 || g[k + 1].abs() / bnorm <= opts.tol * 0.1 || iters >= opts.max_iter {
                break;
            }
            v.push(w.iter().map(|t| t / hn).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (yi, zi) in y.iter().zip(&z) {
            for (xj, zj) in x.iter_mut().zip(zi) {
                *xj += yi * zj;
            }
        }
    }
}
