//! Error norms, convergence tables, divergence and energy monitoring.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField, VectorField2};

/// `100 · ‖|V| − |ref|‖_P / ‖|ref|‖_P` with `|·|` the pointwise magnitude.
pub fn rel_l2_percent(grid: &Grid2D, v: &VectorField2, reference: &VectorField2) -> Result<f64> {
    grid.check_vector(v)?;
    grid.check_vector(reference)?;
    let mr = reference.magnitude();
    let denom = grid.p_norm(&mr)?;
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    let diff = v.magnitude().sub(&mr);
    Ok(100.0 * grid.p_norm(&diff)? / denom)
}

/// `𝔡ₓ B¹ + 𝔡_y B²`.
pub fn discrete_divergence(grid: &Grid2D, v: &VectorField2) -> Result<ScalarField> {
    Ok(grid.ddx(&v.b1)?.add(&grid.ddy(&v.b2)?))
}

/// `‖V‖²_P`.
pub fn energy(grid: &Grid2D, v: &VectorField2) -> Result<f64> {
    grid.p_inner_vector(v, v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub nx: usize,
    pub ny: usize,
    pub error_percent: f64,
    /// `log₂(e_prev / e)`; absent on the first row.
    pub rate: Option<f64>,
}

impl ConvergenceRow {
    pub fn label(&self) -> String {
        format!("{}x{}", self.nx, self.ny)
    }
}

/// Observed rates on a sequence of grids whose point counts double row to row.
pub fn fit_rates(rows: &[((usize, usize), f64)]) -> Result<Vec<ConvergenceRow>> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no rows to fit".into()));
    }
    for (k, &(_, e)) in rows.iter().enumerate() {
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::DegenerateError(k));
        }
    }
    for w in rows.windows(2) {
        let ((a, b), (c, d)) = (w[0].0, w[1].0);
        if c != 2 * a || d != 2 * b {
            return Err(Error::NotDoubling(format!("{a}x{b} -> {c}x{d}")));
        }
    }
    Ok(rows
        .iter()
        .enumerate()
        .map(|(k, &((nx, ny), e))| ConvergenceRow {
            nx,
            ny,
            error_percent: e,
            rate: (k > 0).then(|| (rows[k - 1].1 / e).log2()),
        })
        .collect())
}

/// `grid,error_percent,rate` with 17 significant digits; empty rate on the first row.
pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], mut out: W) -> io::Result<()> {
    writeln!(out, "grid,error_percent,rate")?;
    for r in rows {
        let rate = r.rate.map(|v| format!("{v:.16e}")).unwrap_or_default();
        writeln!(out, "{},{:.16e},{}", r.label(), r.error_percent, rate)?;
    }
    Ok(())
}

/// Aligned plain-text table, one row per grid.
pub fn convergence_table(title: &str, rows: &[ConvergenceRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<12} {:>14} {:>6}", "Grid size", title, "rate");
    let _ = writeln!(s, "{}", "-".repeat(34));
    for r in rows {
        let rate = r.rate.map(|v| format!("{v:.1}")).unwrap_or_default();
        let _ = writeln!(s, "{:<12} {:>14.2e} {:>6}", r.label(), r.error_percent, rate);
    }
    s
}

/// One line of the per-step diagnostics file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub n: usize,
    pub t: f64,
    pub energy: f64,
    pub growth: f64,
    pub div_norm: f64,
}

pub fn write_step_csv<W: Write>(records: &[StepRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "n,t,energy,growth,div_norm")?;
    for r in records {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.n, r.t, r.energy, r.growth, r.div_norm
        )?;
    }
    Ok(())
}

/// Smallest `K ≥ 0` with `growth ≤ 1 + K Δt` for every `(growth, Δt)` pair.
pub fn fit_growth_constant(samples: &[(f64, f64)]) -> f64 {
    samples
        .iter()
        .map(|&(g, dt)| (g - 1.0) / dt)
        .fold(0.0, f64::max)
}
