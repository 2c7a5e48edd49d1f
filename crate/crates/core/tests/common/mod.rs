//! Dense reference implementations shared by the integration tests.

#![allow(dead_code)]

use induction_sbp::{Grid2D, SbpOperator1D, VectorField2, VelocityField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn random_field(rng: &mut ChaCha8Rng, grid: &Grid2D) -> VectorField2 {
    let n = grid.len();
    let stacked = random_vec(rng, 2 * n);
    VectorField2::from_stacked(grid.nx(), grid.ny(), &stacked).unwrap()
}

/// `P⁻¹Q` from the dense `Q` and the norm weights.
pub fn dense_d(op: &SbpOperator1D) -> Dense {
    let p = op.p_diag();
    op.q_dense()
        .into_iter()
        .enumerate()
        .map(|(i, row)| row.into_iter().map(|q| q / p[i]).collect())
        .collect()
}

pub fn zeros(n: usize, m: usize) -> Dense {
    vec![vec![0.0; m]; n]
}

/// `Dₓ ⊗ I`.
pub fn kron_dx(grid: &Grid2D) -> Dense {
    let (nx, ny) = grid.shape();
    let d = dense_d(grid.op_x());
    let mut out = zeros(nx * ny, nx * ny);
    for i in 0..nx {
        for k in 0..nx {
            for j in 0..ny {
                out[i * ny + j][k * ny + j] = d[i][k];
            }
        }
    }
    out
}

/// `I ⊗ D_y`.
pub fn kron_dy(grid: &Grid2D) -> Dense {
    let (nx, ny) = grid.shape();
    let d = dense_d(grid.op_y());
    let mut out = zeros(nx * ny, nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            for l in 0..ny {
                out[i * ny + j][i * ny + l] = d[j][l];
            }
        }
    }
    out
}

pub fn matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

fn sample(grid: &Grid2D, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(grid.len());
    for i in 0..grid.nx() {
        for j in 0..grid.ny() {
            v.push(f(grid.x(i), grid.y(j)));
        }
    }
    v
}

/// Diagonal of the penalty operator built directly from the face velocities.
pub fn dense_sat_diag(grid: &Grid2D, vel: &VelocityField, t: f64) -> Vec<f64> {
    let (nx, ny) = grid.shape();
    let d = grid.domain();
    let px = grid.op_x().p_diag();
    let py = grid.op_y().p_diag();
    let mut diag = vec![0.0; nx * ny];
    for j in 0..ny {
        let y = grid.y(j);
        diag[j] += -vel.u1(d.ax, y, t).max(0.0) / 2.0 / px[0];
        diag[(nx - 1) * ny + j] += vel.u1(d.bx, y, t).min(0.0) / 2.0 / px[nx - 1];
    }
    for i in 0..nx {
        let x = grid.x(i);
        diag[i * ny] += -vel.u2(x, d.ay, t).max(0.0) / 2.0 / py[0];
        diag[i * ny + ny - 1] += vel.u2(x, d.by, t).min(0.0) / 2.0 / py[ny - 1];
    }
    diag
}

/// Terms of the spatial operator on the stacked unknown, each `2N × 2N`.
pub struct DenseTerms {
    pub transport: Dense,
    pub c: Dense,
    pub b: Dense,
}

impl DenseTerms {
    pub fn new(grid: &Grid2D, vel: &VelocityField, t: f64) -> Self {
        let n = grid.len();
        let dx = kron_dx(grid);
        let dy = kron_dy(grid);
        let u1 = sample(grid, |x, y| vel.u1(x, y, t));
        let u2 = sample(grid, |x, y| vel.u2(x, y, t));
        let (dxu1, dyu1) = (matvec(&dx, &u1), matvec(&dy, &u1));
        let (dxu2, dyu2) = (matvec(&dx, &u2), matvec(&dy, &u2));
        let sat = dense_sat_diag(grid, vel, t);
        let mut transport = zeros(2 * n, 2 * n);
        let mut c = zeros(2 * n, 2 * n);
        let mut b = zeros(2 * n, 2 * n);
        for comp in 0..2 {
            let o = comp * n;
            for r in 0..n {
                for k in 0..n {
                    transport[o + r][o + k] = u1[r] * dx[r][k] + u2[r] * dy[r][k];
                }
                b[o + r][o + r] = sat[r];
            }
        }
        for r in 0..n {
            c[r][r] = -dyu2[r];
            c[r][n + r] = dyu1[r];
            c[n + r][r] = dxu2[r];
            c[n + r][n + r] = -dxu1[r];
        }
        Self { transport, c, b }
    }

    /// `transport − C − 𝓑`.
    pub fn operator(&self) -> Dense {
        let m = self.transport.len();
        let mut a = zeros(m, m);
        for r in 0..m {
            for k in 0..m {
                a[r][k] = self.transport[r][k] - self.c[r][k] - self.b[r][k];
            }
        }
        a
    }
}

/// Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Dense, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[r][k] -= f * a[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
