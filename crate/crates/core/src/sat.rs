//! Weak (SAT) imposition of inflow Dirichlet data.
//!
//! The penalty operator is
//!
//! ```text
//! 𝓑 = (P_x⁻¹ ⊗ I)(Σ_L 𝓛 + Σ_R 𝓡) + (I ⊗ P_y⁻¹)(Σ_D 𝓓 + Σ_U 𝓤)
//! ```
//!
//! with face-diagonal coefficients chosen at the energy-stability limit
//! `σ_L = −u¹⁺/2`, `σ_R = u¹⁻/2`, `σ_D = −u²⁺/2`, `σ_U = u²⁻/2`. Every
//! coefficient is non-positive and vanishes where the flow leaves the domain.

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField, VectorField2};
use crate::model::VelocityField;

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySet {
    /// Left face `x = ax`, indexed by `j`.
    pub sigma_l: Vec<f64>,
    /// Right face `x = bx`, indexed by `j`.
    pub sigma_r: Vec<f64>,
    /// Bottom face `y = ay`, indexed by `i`.
    pub sigma_d: Vec<f64>,
    /// Top face `y = by`, indexed by `i`.
    pub sigma_u: Vec<f64>,
    pub valid_at: f64,
}

/// Velocity normal components sampled on the four faces.
#[derive(Debug, Clone)]
pub struct FaceVelocity {
    /// `u¹(ax, y_j)`.
    pub left: Vec<f64>,
    /// `u¹(bx, y_j)`.
    pub right: Vec<f64>,
    /// `u²(x_i, ay)`.
    pub bottom: Vec<f64>,
    /// `u²(x_i, by)`.
    pub top: Vec<f64>,
    pub t: f64,
}

impl FaceVelocity {
    pub fn sample(velocity: &VelocityField, grid: &Grid2D, t: f64) -> Self {
        let d = grid.domain();
        Self {
            left: (0..grid.ny()).map(|j| velocity.u1(d.ax, grid.y(j), t)).collect(),
            right: (0..grid.ny()).map(|j| velocity.u1(d.bx, grid.y(j), t)).collect(),
            bottom: (0..grid.nx()).map(|i| velocity.u2(grid.x(i), d.ay, t)).collect(),
            top: (0..grid.nx()).map(|i| velocity.u2(grid.x(i), d.by, t)).collect(),
            t,
        }
    }
}

fn pos(u: f64) -> f64 {
    u.max(0.0)
}

fn neg(u: f64) -> f64 {
    u.min(0.0)
}

impl PenaltySet {
    /// Sharp coefficients: equality in the stability constraints.
    pub fn choose(faces: &FaceVelocity) -> Self {
        // `+ 0.0` turns -0.0 into 0.0
        Self {
            sigma_l: faces.left.iter().map(|&u| -pos(u) / 2.0 + 0.0).collect(),
            sigma_r: faces.right.iter().map(|&u| neg(u) / 2.0 + 0.0).collect(),
            sigma_d: faces.bottom.iter().map(|&u| -pos(u) / 2.0 + 0.0).collect(),
            sigma_u: faces.top.iter().map(|&u| neg(u) / 2.0 + 0.0).collect(),
            valid_at: faces.t,
        }
    }

    pub fn for_velocity(velocity: &VelocityField, grid: &Grid2D, t: f64) -> Self {
        Self::choose(&FaceVelocity::sample(velocity, grid, t))
    }

    /// Checks the stability constraints against face velocities.
    pub fn satisfies_constraints(&self, faces: &FaceVelocity) -> bool {
        let le = |s: &[f64], u: &[f64], bound: fn(f64) -> f64| {
            s.iter().zip(u).all(|(&s, &u)| s <= bound(u) && s <= 0.0)
        };
        le(&self.sigma_l, &faces.left, |u| -pos(u) / 2.0)
            && le(&self.sigma_r, &faces.right, |u| neg(u) / 2.0)
            && le(&self.sigma_d, &faces.bottom, |u| -pos(u) / 2.0)
            && le(&self.sigma_u, &faces.top, |u| neg(u) / 2.0)
    }

    fn check(&self, grid: &Grid2D) -> Result<()> {
        let (nx, ny) = grid.shape();
        let ok = self.sigma_l.len() == ny
            && self.sigma_r.len() == ny
            && self.sigma_d.len() == nx
            && self.sigma_u.len() == nx;
        if !ok {
            return Err(Error::GridMismatch {
                expected: (nx, ny),
                got: (self.sigma_d.len(), self.sigma_l.len()),
            });
        }
        Ok(())
    }

    /// Diagonal of 𝓑 (the same for both components), one entry per node.
    pub fn diagonal(&self, grid: &Grid2D) -> Result<ScalarField> {
        self.check(grid)?;
        let (nx, ny) = grid.shape();
        let px = grid.op_x().p_diag();
        let py = grid.op_y().p_diag();
        let mut diag = grid.zeros();
        for j in 0..ny {
            diag.values[grid.index(0, j)] += self.sigma_l[j] / px[0];
            diag.values[grid.index(nx - 1, j)] += self.sigma_r[j] / px[nx - 1];
        }
        for i in 0..nx {
            diag.values[grid.index(i, 0)] += self.sigma_d[i] / py[0];
            diag.values[grid.index(i, ny - 1)] += self.sigma_u[i] / py[ny - 1];
        }
        Ok(diag)
    }

    /// `𝓑 (V − g)`, componentwise.
    pub fn apply(&self, grid: &Grid2D, v: &VectorField2, g: &VectorField2) -> Result<VectorField2> {
        grid.check_vector(v)?;
        grid.check_vector(g)?;
        let diag = self.diagonal(grid)?;
        Ok(v.sub(g).hadamard(&diag))
    }
}

/// Free-function form of [`PenaltySet::apply`].
pub fn apply_sat(pen: &PenaltySet, grid: &Grid2D, v: &VectorField2, g: &VectorField2) -> Result<VectorField2> {
    pen.apply(grid, v, g)
}
