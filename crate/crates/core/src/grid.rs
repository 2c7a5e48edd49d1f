//! Tensor-product grids and grid functions.
//!
//! A scalar grid function on an `nx × ny` grid is stored with the y-index
//! fastest: flat index `i * ny + j` holds the value at `(x_i, y_j)`. The 2D
//! derivative `ddx` is `D_x ⊗ I` and `ddy` is `I ⊗ D_y`, both applied
//! line by line without assembling a matrix.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::sbp::{Order, SbpOperator1D};

/// Axis-aligned rectangle `[ax, bx] × [ay, by]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub ax: f64,
    pub bx: f64,
    pub ay: f64,
    pub by: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect {
        ax: 0.0,
        bx: 1.0,
        ay: 0.0,
        by: 1.0,
    };

    pub fn new(ax: f64, bx: f64, ay: f64, by: f64) -> Result<Self> {
        let ok = [ax, bx, ay, by].iter().all(|v| v.is_finite()) && bx > ax && by > ay;
        if !ok {
            return Err(Error::BadDomain(format!("[{ax}, {bx}] x [{ay}, {by}]")));
        }
        Ok(Self { ax, bx, ay, by })
    }

    /// The square `[-a, a]²`.
    pub fn centered_square(a: f64) -> Self {
        Self {
            ax: -a,
            bx: a,
            ay: -a,
            by: a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    Left,
    Right,
    Bottom,
    Top,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::Left, Face::Right, Face::Bottom, Face::Top];
}

/// Flat indices of one boundary face.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceSelector {
    pub face: Face,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    domain: Rect,
    op_x: SbpOperator1D,
    op_y: SbpOperator1D,
    exec: Exec,
}

impl Grid2D {
    pub fn new(order: Order, nx: usize, ny: usize, domain: Rect) -> Result<Self> {
        let domain = Rect::new(domain.ax, domain.bx, domain.ay, domain.by)?;
        if nx < 2 || ny < 2 {
            return Err(Error::TooFewPoints {
                order: order.name(),
                min: order.min_points(),
                n: nx.min(ny),
            });
        }
        let dx = (domain.bx - domain.ax) / (nx - 1) as f64;
        let dy = (domain.by - domain.ay) / (ny - 1) as f64;
        Ok(Self {
            nx,
            ny,
            domain,
            op_x: SbpOperator1D::new(order, nx, dx)?,
            op_y: SbpOperator1D::new(order, ny, dy)?,
            exec: Exec::default(),
        })
    }

    /// Returns a copy that runs its kernels with `exec`.
    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn order(&self) -> Order {
        self.op_x.order()
    }

    pub fn dx(&self) -> f64 {
        self.op_x.dx()
    }

    pub fn dy(&self) -> f64 {
        self.op_y.dx()
    }

    pub fn op_x(&self) -> &SbpOperator1D {
        &self.op_x
    }

    pub fn op_y(&self) -> &SbpOperator1D {
        &self.op_y
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.nx - 1 {
            self.domain.bx
        } else {
            self.domain.ax + i as f64 * self.dx()
        }
    }

    pub fn y(&self, j: usize) -> f64 {
        if j == self.ny - 1 {
            self.domain.by
        } else {
            self.domain.ay + j as f64 * self.dy()
        }
    }

    pub fn zeros(&self) -> ScalarField {
        ScalarField::zeros(self.nx, self.ny)
    }

    /// Samples `f(x, y)` at every node.
    pub fn sample(&self, mut f: impl FnMut(f64, f64) -> f64) -> ScalarField {
        let mut values = Vec::with_capacity(self.len());
        for i in 0..self.nx {
            let x = self.x(i);
            for j in 0..self.ny {
                values.push(f(x, self.y(j)));
            }
        }
        ScalarField {
            nx: self.nx,
            ny: self.ny,
            values,
        }
    }

    /// Samples a vector-valued `f(x, y) -> (b1, b2)`.
    pub fn sample_vector(&self, mut f: impl FnMut(f64, f64) -> (f64, f64)) -> VectorField2 {
        let mut b1 = self.zeros();
        let mut b2 = self.zeros();
        for i in 0..self.nx {
            let x = self.x(i);
            for j in 0..self.ny {
                let (a, b) = f(x, self.y(j));
                let k = self.index(i, j);
                b1.values[k] = a;
                b2.values[k] = b;
            }
        }
        VectorField2 { b1, b2 }
    }

    pub fn check(&self, f: &ScalarField) -> Result<()> {
        if f.shape() != self.shape() || f.values.len() != self.len() {
            return Err(Error::GridMismatch {
                expected: self.shape(),
                got: f.shape(),
            });
        }
        Ok(())
    }

    pub fn check_vector(&self, v: &VectorField2) -> Result<()> {
        self.check(&v.b1)?;
        self.check(&v.b2)
    }

    /// `(D_x ⊗ I) f`.
    pub fn ddx(&self, f: &ScalarField) -> Result<ScalarField> {
        self.check(f)?;
        let mut out = self.zeros();
        self.ddx_into(&f.values, &mut out.values);
        Ok(out)
    }

    /// `(I ⊗ D_y) f`.
    pub fn ddy(&self, f: &ScalarField) -> Result<ScalarField> {
        self.check(f)?;
        let mut out = self.zeros();
        self.ddy_into(&f.values, &mut out.values);
        Ok(out)
    }

    pub(crate) fn ddx_into(&self, f: &[f64], out: &mut [f64]) {
        let ny = self.ny;
        let op = &self.op_x;
        // Row i of the result is a combination of whole rows of f.
        self.exec.for_each_chunk(out, ny, |i, row| {
            let (start, coefs) = op.d_row(i);
            row.fill(0.0);
            for (k, &d) in coefs.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let src = &f[(start + k) * ny..(start + k + 1) * ny];
                for (o, s) in row.iter_mut().zip(src) {
                    *o += d * s;
                }
            }
        });
    }

    pub(crate) fn ddy_into(&self, f: &[f64], out: &mut [f64]) {
        let ny = self.ny;
        let op = &self.op_y;
        self.exec.for_each_chunk(out, ny, |i, row| {
            op.apply_strided(&f[i * ny..(i + 1) * ny], 1, row, 1);
        });
    }

    /// `Σ (p_x)_i (p_y)_j v_ij w_ij`.
    pub fn p_inner(&self, v: &ScalarField, w: &ScalarField) -> Result<f64> {
        self.check(v)?;
        self.check(w)?;
        Ok(self.p_inner_raw(&v.values, &w.values))
    }

    pub(crate) fn p_inner_raw(&self, v: &[f64], w: &[f64]) -> f64 {
        let ny = self.ny;
        let py = self.op_y.p_diag();
        let rows = self.exec.map_range(self.nx, |i| {
            let a = &v[i * ny..(i + 1) * ny];
            let b = &w[i * ny..(i + 1) * ny];
            let s: f64 = py.iter().zip(a.iter().zip(b)).map(|(p, (x, y))| p * x * y).sum();
            s
        });
        rows.iter()
            .zip(self.op_x.p_diag())
            .map(|(s, px)| px * s)
            .sum()
    }

    pub fn p_inner_vector(&self, v: &VectorField2, w: &VectorField2) -> Result<f64> {
        Ok(self.p_inner(&v.b1, &w.b1)? + self.p_inner(&v.b2, &w.b2)?)
    }

    pub fn p_norm(&self, v: &ScalarField) -> Result<f64> {
        Ok(self.p_inner(v, v)?.sqrt())
    }

    pub fn p_norm_vector(&self, v: &VectorField2) -> Result<f64> {
        Ok(self.p_inner_vector(v, v)?.sqrt())
    }

    pub fn face(&self, face: Face) -> FaceSelector {
        let (nx, ny) = self.shape();
        let indices = match face {
            Face::Left => (0..ny).collect(),
            Face::Right => ((nx - 1) * ny..nx * ny).collect(),
            Face::Bottom => (0..nx).map(|i| i * ny).collect(),
            Face::Top => (0..nx).map(|i| i * ny + ny - 1).collect(),
        };
        FaceSelector { face, indices }
    }

    /// Writes `x,y,b1,b2` rows in storage order with 17 significant digits.
    pub fn write_csv<W: Write>(&self, v: &VectorField2, mut out: W) -> io::Result<()> {
        writeln!(out, "x,y,b1,b2")?;
        for i in 0..self.nx {
            let x = self.x(i);
            for j in 0..self.ny {
                let k = self.index(i, j);
                writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{:.16e}",
                    x,
                    self.y(j),
                    v.b1.values[k],
                    v.b2.values[k]
                )?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    nx: usize,
    ny: usize,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            values: vec![0.0; nx * ny],
        }
    }

    pub fn from_values(nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != nx * ny {
            return Err(Error::LengthMismatch {
                expected: nx * ny,
                got: values.len(),
            });
        }
        Ok(Self { nx, ny, values })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny + j]
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            nx: self.nx,
            ny: self.ny,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise product `u ∘ self`.
    pub fn hadamard(&self, u: &ScalarField) -> Self {
        Self {
            nx: self.nx,
            ny: self.ny,
            values: self.values.iter().zip(&u.values).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.shape(), other.shape());
        Self {
            nx: self.nx,
            ny: self.ny,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Two-component grid function `(B¹, B²)` on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2 {
    pub b1: ScalarField,
    pub b2: ScalarField,
}

impl VectorField2 {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self {
            b1: ScalarField::zeros(nx, ny),
            b2: ScalarField::zeros(nx, ny),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.b1.shape()
    }

    /// Component-major stacking: all of B¹, then all of B².
    pub fn to_stacked(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.b1.values.len());
        v.extend_from_slice(&self.b1.values);
        v.extend_from_slice(&self.b2.values);
        v
    }

    pub fn from_stacked(nx: usize, ny: usize, v: &[f64]) -> Result<Self> {
        let n = nx * ny;
        if v.len() != 2 * n {
            return Err(Error::LengthMismatch {
                expected: 2 * n,
                got: v.len(),
            });
        }
        Ok(Self {
            b1: ScalarField::from_values(nx, ny, v[..n].to_vec())?,
            b2: ScalarField::from_values(nx, ny, v[n..].to_vec())?,
        })
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            b1: self.b1.scaled(a),
            b2: self.b2.scaled(a),
        }
    }

    pub fn add(&self, o: &VectorField2) -> Self {
        Self {
            b1: self.b1.add(&o.b1),
            b2: self.b2.add(&o.b2),
        }
    }

    pub fn sub(&self, o: &VectorField2) -> Self {
        Self {
            b1: self.b1.sub(&o.b1),
            b2: self.b2.sub(&o.b2),
        }
    }

    pub fn hadamard(&self, u: &ScalarField) -> Self {
        Self {
            b1: self.b1.hadamard(u),
            b2: self.b2.hadamard(u),
        }
    }

    /// Pointwise magnitude `(B¹² + B²²)^½`.
    pub fn magnitude(&self) -> ScalarField {
        self.b1.zip_with(&self.b2, f64::hypot)
    }

    pub fn max_abs(&self) -> f64 {
        self.b1.max_abs().max(self.b2.max_abs())
    }
}
