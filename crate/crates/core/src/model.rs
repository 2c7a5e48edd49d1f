//! Prescribed velocity fields, initial data and exact solutions for
//!
//! ```text
//! B_t + u¹ B_x + u² B_y − C B = 0,   C = [[−∂y u², ∂y u¹], [∂x u², −∂x u¹]]
//! ```

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Grid2D, Rect, ScalarField, VectorField2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityField {
    /// Solid-body rotation `u = (−y, x)`.
    Rotation,
    /// Uniform `u = (a, b)`.
    Constant { a: f64, b: f64 },
    /// Shear flow `u = (y, 0)`.
    Shear,
    /// `u = (a, b)·cos(ω t)`, uniform in space.
    Oscillating { a: f64, b: f64, omega: f64 },
}

impl VelocityField {
    pub fn u1(&self, x: f64, y: f64, t: f64) -> f64 {
        let _ = x;
        match *self {
            VelocityField::Rotation => -y,
            VelocityField::Constant { a, .. } => a,
            VelocityField::Shear => y,
            VelocityField::Oscillating { a, omega, .. } => a * (omega * t).cos(),
        }
    }

    pub fn u2(&self, x: f64, y: f64, t: f64) -> f64 {
        let _ = y;
        match *self {
            VelocityField::Rotation => x,
            VelocityField::Constant { b, .. } => b,
            VelocityField::Shear => 0.0,
            VelocityField::Oscillating { b, omega, .. } => b * (omega * t).cos(),
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self, VelocityField::Oscillating { omega, .. } if *omega != 0.0)
    }

    /// Samples `(u¹, u²)` at every grid node at time `t`.
    pub fn sample(&self, grid: &Grid2D, t: f64) -> (ScalarField, ScalarField) {
        (
            grid.sample(|x, y| self.u1(x, y, t)),
            grid.sample(|x, y| self.u2(x, y, t)),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialData {
    /// `B₀ = 4 (−y, x − ½) exp(−20((x − ½)² + y²))`.
    GaussianHump,
    Zero,
}

impl InitialData {
    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        match self {
            InitialData::GaussianHump => gaussian_hump_at(x, y),
            InitialData::Zero => (0.0, 0.0),
        }
    }

    pub fn sample(&self, grid: &Grid2D) -> VectorField2 {
        grid.sample_vector(|x, y| self.eval(x, y))
    }
}

pub fn gaussian_hump_at(x: f64, y: f64) -> (f64, f64) {
    let xs = x - 0.5;
    let e = 4.0 * (-20.0 * (xs * xs + y * y)).exp();
    (-y * e, xs * e)
}

pub fn gaussian_hump(grid: &Grid2D) -> VectorField2 {
    InitialData::GaussianHump.sample(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// `g = 0` on inflow faces.
    ZeroG,
    /// `g` equal to the exact solution (rotation only).
    ExactG,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub velocity: VelocityField,
    pub initial: InitialData,
    pub boundary: BoundaryMode,
    pub domain: Rect,
    pub final_time: f64,
}

impl ProblemSpec {
    /// The rotating hump on `[−1, 1]²` with zero boundary data, run for one turn.
    pub fn rotating_hump() -> Self {
        Self {
            velocity: VelocityField::Rotation,
            initial: InitialData::GaussianHump,
            boundary: BoundaryMode::ZeroG,
            domain: Rect::centered_square(1.0),
            final_time: 2.0 * PI,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.final_time >= 0.0 && self.final_time.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "final_time must be non-negative, got {}",
                self.final_time
            )));
        }
        if self.boundary == BoundaryMode::ExactG && self.velocity != VelocityField::Rotation {
            return Err(Error::NotRotation);
        }
        Rect::new(self.domain.ax, self.domain.bx, self.domain.ay, self.domain.by)?;
        Ok(())
    }
}

/// Exact solution of the rotation problem, `R(t) B₀(R(−t) x)`.
pub fn exact_rotation_at(initial: InitialData, x: f64, y: f64, t: f64) -> (f64, f64) {
    let (s, c) = t.sin_cos();
    // R(−t) x
    let xr = c * x + s * y;
    let yr = -s * x + c * y;
    let (b1, b2) = initial.eval(xr, yr);
    (c * b1 - s * b2, s * b1 + c * b2)
}

pub fn exact_rotation(
    velocity: &VelocityField,
    initial: InitialData,
    grid: &Grid2D,
    t: f64,
) -> Result<VectorField2> {
    if *velocity != VelocityField::Rotation {
        return Err(Error::NotRotation);
    }
    Ok(grid.sample_vector(|x, y| exact_rotation_at(initial, x, y, t)))
}

/// Boundary data `g(·, t)` sampled on the whole grid; only face values are used.
pub fn boundary_g(spec: &ProblemSpec, grid: &Grid2D, t: f64) -> Result<VectorField2> {
    match spec.boundary {
        BoundaryMode::ZeroG => Ok(VectorField2::zeros(grid.nx(), grid.ny())),
        BoundaryMode::ExactG => exact_rotation(&spec.velocity, spec.initial, grid, t),
    }
}
