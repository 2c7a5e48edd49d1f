//! Many backward-Euler steps of a steady, homogeneous problem at once.
//!
//! With a time-independent velocity and `g = 0`, `N` steps of size `Δt` give
//! `V_N = (I + Δt A)^{-N} V_0`. Stepping costs `N` sparse solves, which is
//! out of reach when `Δt` is tied to a high power of the grid spacing. Here
//! the same vector is evaluated with a shift-and-invert Arnoldi process:
//!
//! ```text
//! W = (I + γA)⁻¹,   W Q_m = Q_{m+1} H̄_m,   A ≈ Q_m (H_m⁻¹ − I)/γ Q_mᵀ
//! (I + Δt A)^{-k} v ≈ ‖v‖ Q_m G^k e₁,   G = γ H_m ((γ − Δt) H_m + Δt I)⁻¹
//! ```
//!
//! The interval is split into chunks of `k` steps, each with a fresh Arnoldi
//! basis built from the current vector, so one factorization of `I + γA`
//! serves the whole run. A chunk is accepted once successive Arnoldi
//! approximations agree to `tol`; chunks that do not converge within
//! `max_dim` vectors are halved. The result is the backward-Euler solution,
//! not an approximation of the PDE solution with a different time scheme.

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::error::{Error, Result};
use crate::grid::{Grid2D, VectorField2};
use crate::model::{BoundaryMode, ProblemSpec};
use crate::sparse::{CsrMatrix, DirectSolver};
use crate::stepper::{assemble, DtRule, Stepper, StepperState, TimeGrid, SOLVE_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateOptions {
    /// Target duration of one Arnoldi chunk.
    pub chunk_time: f64,
    /// Shift `γ` as a fraction of the chunk duration.
    pub shift_fraction: f64,
    /// Relative agreement required between successive approximations.
    pub tol: f64,
    pub max_dim: usize,
    /// Runs with at most this many steps are stepped directly.
    pub direct_steps: usize,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self {
            chunk_time: 0.5,
            shift_fraction: 0.02,
            tol: 1e-12,
            max_dim: 80,
            direct_steps: 64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub v: VectorField2,
    /// Backward-Euler steps represented.
    pub steps: usize,
    /// Sparse triangular solve pairs performed.
    pub solves: usize,
    pub chunks: usize,
    /// Largest Arnoldi dimension used by any chunk.
    pub max_dim_used: usize,
}

/// `V_N` for the steps of `times`, starting from `v0` at `t = 0`.
pub fn propagate(
    grid: &Grid2D,
    spec: &ProblemSpec,
    times: &TimeGrid,
    v0: &VectorField2,
    opts: PropagateOptions,
) -> Result<Propagation> {
    spec.validate()?;
    grid.check_vector(v0)?;
    if spec.velocity.is_time_dependent() || spec.boundary != BoundaryMode::ZeroG {
        return Err(Error::InvalidArgument(
            "propagation needs a steady velocity and zero boundary data".into(),
        ));
    }
    if times.steps <= opts.direct_steps {
        let mut stepper = Stepper::new(grid, *spec)?;
        let mut state = StepperState {
            v: v0.clone(),
            t: 0.0,
            n: 0,
        };
        for n in 1..=times.steps {
            state = stepper.backward_euler_step(&state, times.step_size(n))?;
        }
        return Ok(Propagation {
            v: state.v,
            steps: times.steps,
            solves: times.steps,
            chunks: 0,
            max_dim_used: 0,
        });
    }

    let exec = grid.exec();
    let a = assemble(grid, &spec.velocity, 0.0)?.matrix;
    let dt = times.dt;
    let uniform = if times.last_dt == dt { times.steps } else { times.steps - 1 };
    let chunk_steps = ((opts.chunk_time / dt).round() as usize).clamp(1, uniform.max(1));
    let gamma = opts.shift_fraction * chunk_steps as f64 * dt;
    let shifted = a.shifted(1.0, gamma);
    let inv = DirectSolver::factor(&shifted)?;

    let mut engine = Arnoldi {
        system: &shifted,
        solver: &inv,
        gamma,
        dt,
        opts,
        solves: 0,
        max_dim_used: 0,
        exec,
    };
    let mut v = v0.to_stacked();
    let mut remaining = uniform;
    let mut chunks = 0;
    while remaining > 0 {
        let k = chunk_steps.min(remaining);
        v = engine.power(&v, k)?;
        remaining -= k;
        chunks += 1;
    }
    let mut solves = engine.solves;
    let max_dim_used = engine.max_dim_used;
    if uniform < times.steps {
        let last = a.shifted(1.0, times.last_dt);
        v = DirectSolver::factor(&last)?.solve_refined(&last, &v, SOLVE_TOL, exec)?;
        solves += 1;
    }
    Ok(Propagation {
        v: VectorField2::from_stacked(grid.nx(), grid.ny(), &v)?,
        steps: times.steps,
        solves,
        chunks,
        max_dim_used,
    })
}

/// State at `spec.final_time`, propagated when possible and stepped otherwise.
pub fn final_state(spec: &ProblemSpec, grid: &Grid2D, dt_rule: DtRule) -> Result<VectorField2> {
    let times = dt_rule.partition(grid, spec.final_time)?;
    let steady = !spec.velocity.is_time_dependent() && spec.boundary == BoundaryMode::ZeroG;
    if steady {
        spec.validate()?;
        let v0 = spec.initial.sample(grid);
        return Ok(propagate(grid, spec, &times, &v0, PropagateOptions::default())?.v);
    }
    let mut stepper = Stepper::new(grid, *spec)?;
    let state = stepper.initial_state();
    Ok(stepper.advance(state, &times, &[])?.final_state.v)
}

struct Arnoldi<'a> {
    system: &'a CsrMatrix,
    solver: &'a DirectSolver,
    gamma: f64,
    dt: f64,
    opts: PropagateOptions,
    solves: usize,
    max_dim_used: usize,
    exec: crate::exec::Exec,
}

impl Arnoldi<'_> {
    /// `(I + Δt A)^{-k} v`, splitting `k` when the basis does not converge.
    fn power(&mut self, v: &[f64], k: usize) -> Result<Vec<f64>> {
        match self.try_power(v, k)? {
            Some(x) => Ok(x),
            None if k > 1 => {
                let half = k / 2;
                let x = self.power(v, half)?;
                self.power(&x, k - half)
            }
            None => Err(Error::NoConvergence { history: vec![] }),
        }
    }

    fn try_power(&mut self, v: &[f64], k: usize) -> Result<Option<Vec<f64>>> {
        let beta = norm(v);
        if beta == 0.0 {
            return Ok(Some(v.to_vec()));
        }
        let m_max = self.opts.max_dim;
        let mut basis: Vec<Vec<f64>> = vec![v.iter().map(|x| x / beta).collect()];
        let mut h = Mat::<f64>::zeros(m_max + 1, m_max);
        let mut prev: Option<Vec<f64>> = None;
        for j in 0..m_max {
            let mut w = self
                .solver
                .solve_refined(self.system, &basis[j], SOLVE_TOL, self.exec)?;
            self.solves += 1;
            // modified Gram-Schmidt, applied twice
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c = dot(&w, q);
                    h[(i, j)] += c;
                    axpy(-c, q, &mut w);
                }
            }
            let hn = norm(&w);
            h[(j + 1, j)] = hn;
            let m = j + 1;
            let breakdown = hn <= 1e-14 * frobenius(&h, m);
            if breakdown || m % 4 == 0 || m == m_max {
                let y = self.small_power(&h, m, k)?;
                let converged = breakdown
                    || prev.as_ref().is_some_and(|p| {
                        let diff: f64 = y
                            .iter()
                            .enumerate()
                            .map(|(i, yi)| (yi - p.get(i).copied().unwrap_or(0.0)).powi(2))
                            .sum::<f64>()
                            .sqrt();
                        diff <= self.opts.tol * norm(&y)
                    });
                if converged {
                    self.max_dim_used = self.max_dim_used.max(m);
                    let mut out = vec![0.0; v.len()];
                    for (yi, q) in y.iter().zip(&basis) {
                        axpy(beta * yi, q, &mut out);
                    }
                    return Ok(Some(out));
                }
                prev = Some(y);
            }
            if breakdown {
                break;
            }
            basis.push(w.iter().map(|x| x / hn).collect());
        }
        Ok(None)
    }

    /// `G^k e₁` for the leading `m × m` block of `h`.
    fn small_power(&self, h: &Mat<f64>, m: usize, k: usize) -> Result<Vec<f64>> {
        let (gamma, dt) = (self.gamma, self.dt);
        let hm = Mat::<f64>::from_fn(m, m, |i, j| h[(i, j)]);
        let shifted = Mat::<f64>::from_fn(m, m, |i, j| (gamma - dt) * hm[(i, j)] + if i == j { dt } else { 0.0 });
        let rhs = Mat::<f64>::from_fn(m, m, |i, j| gamma * hm[(i, j)]);
        let g = shifted.partial_piv_lu().solve(&rhs);
        if g.col_iter().flat_map(|c| c.iter().copied().collect::<Vec<_>>()).any(|x| !x.is_finite()) {
            return Err(Error::Factorization("projected step matrix is singular".into()));
        }
        let mut acc = Mat::<f64>::from_fn(m, 1, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let mut base = g;
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = &base * &acc;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok((0..m).map(|i| acc[(i, 0)]).collect())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn frobenius(h: &Mat<f64>, m: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..m {
        for i in 0..=m {
            s += h[(i, j)] * h[(i, j)];
        }
    }
    s.sqrt()
}
