//! Backward-Euler time stepping of the semi-discrete system.
//!
//! The unknown is stacked component-major: all of B¹ in grid order, then all
//! of B². The spatial operator is
//!
//! ```text
//! A(t) V = u¹∘𝔡ₓV + u²∘𝔡_yV − C V − 𝓑 V,   C = [[−𝔡_y u², 𝔡_y u¹], [𝔡ₓ u², −𝔡ₓ u¹]]
//! ```
//!
//! and one step solves `(I + Δt A(tⁿ⁺¹)) Vⁿ⁺¹ = Vⁿ − Δt 𝓑 gⁿ⁺¹`.

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField, VectorField2};
use crate::model::{boundary_g, BoundaryMode, ProblemSpec, VelocityField};
use crate::sat::PenaltySet;
use crate::sbp::Order;
use crate::sparse::{gmres, CsrMatrix, DirectSolver, GmresOptions, Ilu0};

/// Relative residual required of every linear solve.
pub const SOLVE_TOL: f64 = 1e-10;

/// Velocity samples and their SBP derivatives at one time level.
#[derive(Debug, Clone)]
pub struct VelocityTerms {
    pub u1: ScalarField,
    pub u2: ScalarField,
    pub dx_u1: ScalarField,
    pub dx_u2: ScalarField,
    pub dy_u1: ScalarField,
    pub dy_u2: ScalarField,
}

impl VelocityTerms {
    pub fn new(grid: &Grid2D, velocity: &VelocityField, t: f64) -> Result<Self> {
        let (u1, u2) = velocity.sample(grid, t);
        Ok(Self {
            dx_u1: grid.ddx(&u1)?,
            dx_u2: grid.ddx(&u2)?,
            dy_u1: grid.ddy(&u1)?,
            dy_u2: grid.ddy(&u2)?,
            u1,
            u2,
        })
    }

    /// `C V`, pointwise.
    pub fn apply_c(&self, v: &VectorField2) -> VectorField2 {
        let n = v.b1.values.len();
        let mut out = v.clone();
        for k in 0..n {
            let (b1, b2) = (v.b1.values[k], v.b2.values[k]);
            out.b1.values[k] = -self.dy_u2.values[k] * b1 + self.dy_u1.values[k] * b2;
            out.b2.values[k] = self.dx_u2.values[k] * b1 - self.dx_u1.values[k] * b2;
        }
        out
    }
}

/// Assembled `A(t)` acting on the stacked `2·nx·ny` vector.
#[derive(Debug, Clone)]
pub struct SpatialOperator {
    pub matrix: CsrMatrix,
    pub time: f64,
    shape: (usize, usize),
}

impl SpatialOperator {
    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn apply(&self, grid: &Grid2D, v: &VectorField2) -> Result<VectorField2> {
        grid.check_vector(v)?;
        let y = self.matrix.matvec(&v.to_stacked(), grid.exec());
        VectorField2::from_stacked(grid.nx(), grid.ny(), &y)
    }
}

pub fn assemble(grid: &Grid2D, velocity: &VelocityField, t: f64) -> Result<SpatialOperator> {
    let terms = VelocityTerms::new(grid, velocity, t)?;
    let pen = PenaltySet::for_velocity(velocity, grid, t);
    let bdiag = pen.diagonal(grid)?;
    let (nx, ny) = grid.shape();
    let nn = nx * ny;
    let (opx, opy) = (grid.op_x(), grid.op_y());

    // one block of rows per (component, i)
    let blocks = grid.exec().map_range(2 * nx, |b| {
        let (c, i) = (b / nx, b % nx);
        let base = c * nn;
        let (xs, xc) = opx.d_row(i);
        (0..ny)
            .map(|j| {
                let k = grid.index(i, j);
                let mut row = Vec::with_capacity(xc.len() + 8);
                let u1 = terms.u1.values[k];
                let u2 = terms.u2.values[k];
                if u1 != 0.0 {
                    for (m, &d) in xc.iter().enumerate() {
                        row.push((base + grid.index(xs + m, j), u1 * d));
                    }
                }
                if u2 != 0.0 {
                    let (ys, yc) = opy.d_row(j);
                    for (m, &d) in yc.iter().enumerate() {
                        row.push((base + grid.index(i, ys + m), u2 * d));
                    }
                }
                // −C
                if c == 0 {
                    row.push((k, terms.dy_u2.values[k]));
                    row.push((nn + k, -terms.dy_u1.values[k]));
                } else {
                    row.push((k, -terms.dx_u2.values[k]));
                    row.push((nn + k, terms.dx_u1.values[k]));
                }
                // −𝓑
                row.push((base + k, -bdiag.values[k]));
                row
            })
            .collect::<Vec<_>>()
    });
    let rows: Vec<Vec<(usize, f64)>> = blocks.into_iter().flatten().collect();
    Ok(SpatialOperator {
        matrix: CsrMatrix::from_rows(2 * nn, rows),
        time: t,
        shape: (nx, ny),
    })
}

/// `A(t) V` evaluated term by term with the stencil kernels, never forming a matrix.
pub fn apply_matrix_free(grid: &Grid2D, velocity: &VelocityField, t: f64, v: &VectorField2) -> Result<VectorField2> {
    grid.check_vector(v)?;
    let terms = VelocityTerms::new(grid, velocity, t)?;
    let pen = PenaltySet::for_velocity(velocity, grid, t);
    let zero = VectorField2::zeros(grid.nx(), grid.ny());
    let adv = |f: &ScalarField| -> Result<ScalarField> {
        Ok(grid.ddx(f)?.hadamard(&terms.u1).add(&grid.ddy(f)?.hadamard(&terms.u2)))
    };
    let transport = VectorField2 {
        b1: adv(&v.b1)?,
        b2: adv(&v.b2)?,
    };
    Ok(transport.sub(&terms.apply_c(v)).sub(&pen.apply(grid, v, &zero)?))
}

/// Rule for the time step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtRule {
    Fixed(f64),
    /// `Δt = constant · Δxᵖᵒʷᵉʳ`, with `Δx` the larger grid spacing.
    Scaled { power: f64, constant: f64 },
}

impl DtRule {
    /// `Δx²` for SBP2 and `Δx³` for SBP4, so time error stays below the spatial one.
    pub fn convergence(order: Order) -> Self {
        let power = match order {
            Order::Sbp2 => 2.0,
            Order::Sbp4 => 3.0,
        };
        DtRule::Scaled { power, constant: 1.0 }
    }

    pub fn dt(&self, grid: &Grid2D) -> Result<f64> {
        let dt = match *self {
            DtRule::Fixed(dt) => dt,
            DtRule::Scaled { power, constant } => constant * grid.dx().max(grid.dy()).powf(power),
        };
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        Ok(dt)
    }

    /// Steps covering `[0, t_final]` exactly; the last one may be shorter.
    pub fn partition(&self, grid: &Grid2D, t_final: f64) -> Result<TimeGrid> {
        TimeGrid::new(self.dt(grid)?, t_final)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
    pub last_dt: f64,
    pub t_final: f64,
}

impl TimeGrid {
    pub fn new(dt: f64, t_final: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidArgument(format!("final time must be non-negative, got {t_final}")));
        }
        if t_final == 0.0 {
            return Ok(Self {
                dt,
                steps: 0,
                last_dt: 0.0,
                t_final,
            });
        }
        let ratio = t_final / dt;
        // a ratio within rounding of an integer is that integer
        let steps = ((ratio - 1e-9 * ratio.max(1.0)).ceil() as usize).max(1);
        let last_dt = t_final - (steps - 1) as f64 * dt;
        Ok(Self {
            dt,
            steps,
            last_dt,
            t_final,
        })
    }

    /// Time at the end of step `n` (1-based); exact `t_final` for the last.
    pub fn time(&self, n: usize) -> f64 {
        if n >= self.steps {
            self.t_final
        } else {
            n as f64 * self.dt
        }
    }

    pub fn step_size(&self, n: usize) -> f64 {
        if n == self.steps {
            self.last_dt
        } else {
            self.dt
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearSolver {
    /// Direct for time-independent velocity, GMRES otherwise.
    #[default]
    Auto,
    Direct,
    Gmres,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepperState {
    pub v: VectorField2,
    pub t: f64,
    pub n: usize,
}

/// What observers see after every step.
#[derive(Debug)]
pub struct StepInfo<'a> {
    pub n: usize,
    pub t: f64,
    pub dt: f64,
    /// `‖Vⁿ‖²_P`.
    pub energy: f64,
    /// `‖Vⁿ‖_P / ‖Vⁿ⁻¹‖_P`.
    pub growth: f64,
    pub v: &'a VectorField2,
    pub grid: &'a Grid2D,
}

pub trait StepObserver {
    fn on_step(&mut self, info: &StepInfo<'_>);
}

impl<F: FnMut(&StepInfo<'_>)> StepObserver for F {
    fn on_step(&mut self, info: &StepInfo<'_>) {
        self(info)
    }
}

struct Factored {
    dt: f64,
    system: CsrMatrix,
    solver: DirectSolver,
}

pub struct Stepper<'g> {
    grid: &'g Grid2D,
    spec: ProblemSpec,
    solver: LinearSolver,
    gmres: GmresOptions,
    operator: Option<SpatialOperator>,
    factored: Option<Factored>,
    observers: Vec<Box<dyn StepObserver + 'g>>,
}

impl<'g> Stepper<'g> {
    pub fn new(grid: &'g Grid2D, spec: ProblemSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            grid,
            spec,
            solver: LinearSolver::Auto,
            gmres: GmresOptions::default(),
            operator: None,
            factored: None,
            observers: Vec::new(),
        })
    }

    pub fn with_solver(mut self, solver: LinearSolver) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_gmres_options(mut self, opts: GmresOptions) -> Self {
        self.gmres = opts;
        self
    }

    pub fn add_observer(&mut self, obs: impl StepObserver + 'g) {
        self.observers.push(Box::new(obs));
    }

    pub fn grid(&self) -> &Grid2D {
        self.grid
    }

    fn time_independent(&self) -> bool {
        !self.spec.velocity.is_time_dependent()
    }

    fn use_direct(&self) -> bool {
        match self.solver {
            LinearSolver::Auto => self.time_independent(),
            LinearSolver::Direct => true,
            LinearSolver::Gmres => false,
        }
    }

    /// `A(t)`, reusing the assembled operator when the velocity is steady.
    pub fn operator_at(&mut self, t: f64) -> Result<&SpatialOperator> {
        let reuse = self.time_independent() && self.operator.is_some();
        if !reuse {
            self.operator = Some(assemble(self.grid, &self.spec.velocity, t)?);
        }
        Ok(self.operator.as_ref().unwrap())
    }

    pub fn initial_state(&self) -> StepperState {
        StepperState {
            v: self.spec.initial.sample(self.grid),
            t: 0.0,
            n: 0,
        }
    }

    /// Right-hand side `Vⁿ − Δt 𝓑 g(t₁)`.
    fn rhs(&self, v: &VectorField2, t1: f64, dt: f64) -> Result<Vec<f64>> {
        let mut rhs = v.to_stacked();
        if self.spec.boundary == BoundaryMode::ZeroG {
            return Ok(rhs);
        }
        let g = boundary_g(&self.spec, self.grid, t1)?;
        let zero = VectorField2::zeros(self.grid.nx(), self.grid.ny());
        let pen = PenaltySet::for_velocity(&self.spec.velocity, self.grid, t1);
        // 𝓑(0 − g) = −𝓑 g
        let bg = pen.apply(self.grid, &zero, &g)?.to_stacked();
        for (r, b) in rhs.iter_mut().zip(bg) {
            *r += dt * b;
        }
        Ok(rhs)
    }

    /// Solves `(I + Δt A(t₁)) x = rhs`.
    fn solve(&mut self, t1: f64, dt: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        let exec = self.grid.exec();
        if self.use_direct() {
            let steady = self.time_independent();
            let stale = match &self.factored {
                Some(f) => !steady || f.dt != dt,
                None => true,
            };
            if stale {
                let system = self.operator_at(t1)?.matrix.shifted(1.0, dt);
                let solver = DirectSolver::factor(&system)?;
                self.factored = Some(Factored { dt, system, solver });
            }
            let f = self.factored.as_ref().unwrap();
            f.solver.solve_refined(&f.system, rhs, SOLVE_TOL, exec)
        } else {
            let system = self.operator_at(t1)?.matrix.shifted(1.0, dt);
            let ilu = Ilu0::new(&system)?;
            let (x, _) = gmres(&system, rhs, Some(rhs), Some(&ilu), self.gmres, exec)?;
            Ok(x)
        }
    }

    pub fn backward_euler_step(&mut self, state: &StepperState, dt: f64) -> Result<StepperState> {
        self.step_to(state, state.t + dt, dt)
    }

    fn step_to(&mut self, state: &StepperState, t1: f64, dt: f64) -> Result<StepperState> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        self.grid.check_vector(&state.v)?;
        let rhs = self.rhs(&state.v, t1, dt)?;
        let x = self.solve(t1, dt, &rhs)?;
        let v = VectorField2::from_stacked(self.grid.nx(), self.grid.ny(), &x)?;
        let next = StepperState {
            v,
            t: t1,
            n: state.n + 1,
        };
        if !self.observers.is_empty() {
            let e0 = self.grid.p_inner_vector(&state.v, &state.v)?;
            let e1 = self.grid.p_inner_vector(&next.v, &next.v)?;
            let info = StepInfo {
                n: next.n,
                t: t1,
                dt,
                energy: e1,
                growth: growth_factor(e0, e1),
                v: &next.v,
                grid: self.grid,
            };
            for obs in &mut self.observers {
                obs.on_step(&info);
            }
        }
        Ok(next)
    }

    /// Advances `state` through every step of `times`, recording snapshots
    /// at the steps nearest to `snapshot_times`.
    pub fn advance(&mut self, mut state: StepperState, times: &TimeGrid, snapshot_times: &[f64]) -> Result<Trajectory> {
        let initial = state.v.clone();
        let targets: Vec<usize> = snapshot_times.iter().map(|&s| nearest_step(times, s)).collect();
        let mut snapshots = Vec::new();
        let take = |n: usize, st: &StepperState, snaps: &mut Vec<Snapshot>| {
            for (k, &target) in targets.iter().enumerate() {
                if target == n {
                    snaps.push(Snapshot {
                        requested: snapshot_times[k],
                        t: st.t,
                        n,
                        v: st.v.clone(),
                    });
                }
            }
        };
        take(0, &state, &mut snapshots);
        for n in 1..=times.steps {
            state = self.step_to(&state, times.time(n), times.step_size(n))?;
            take(n, &state, &mut snapshots);
        }
        Ok(Trajectory {
            initial,
            snapshots,
            final_state: state,
            times: *times,
        })
    }
}

pub fn growth_factor(e0: f64, e1: f64) -> f64 {
    if e0 > 0.0 {
        (e1 / e0).sqrt()
    } else if e1 == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Step index whose end time is closest to `t` (ties go to the earlier step).
pub fn nearest_step(times: &TimeGrid, t: f64) -> usize {
    let mut best = 0;
    let mut dist = t.abs();
    for n in 1..=times.steps {
        let d = (times.time(n) - t).abs();
        if d < dist {
            best = n;
            dist = d;
        }
        if times.time(n) > t {
            break;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub requested: f64,
    pub t: f64,
    pub n: usize,
    pub v: VectorField2,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub initial: VectorField2,
    pub snapshots: Vec<Snapshot>,
    pub final_state: StepperState,
    pub times: TimeGrid,
}

/// Samples the initial data and steps to `spec.final_time`.
pub fn run(
    spec: &ProblemSpec,
    grid: &Grid2D,
    dt_rule: DtRule,
    snapshot_times: &[f64],
    observers: Vec<Box<dyn StepObserver + '_>>,
) -> Result<Trajectory> {
    let times = dt_rule.partition(grid, spec.final_time)?;
    let mut stepper = Stepper::new(grid, *spec)?;
    for o in observers {
        stepper.observers.push(o);
    }
    let state = stepper.initial_state();
    stepper.advance(state, &times, snapshot_times)
}
