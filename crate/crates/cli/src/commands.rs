use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use induction_sbp::diagnostics::{
    convergence_table, discrete_divergence, energy, fit_growth_constant, fit_rates, rel_l2_percent,
    write_convergence_csv, write_step_csv, StepRecord,
};
use induction_sbp::model::exact_rotation;
use induction_sbp::propagate::final_state;
use induction_sbp::stepper::{self, StepInfo};
use induction_sbp::{BoundaryMode, DtRule, Grid2D, VectorField2, VelocityField};

use crate::config::{Experiment, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct Options {
    pub output_dir: Option<PathBuf>,
    pub quiet: bool,
}

impl Options {
    fn dir(&self, cfg: &RunConfig) -> Result<PathBuf, CliError> {
        let dir = self
            .output_dir
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        fs::create_dir_all(&dir)?;
        Ok(dir)
    }

    fn say(&self, text: &str) {
        if !self.quiet {
            print!("{text}");
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_field(grid: &Grid2D, v: &VectorField2, dir: &Path, name: &str) -> Result<(), CliError> {
    let mut w = create(dir, name)?;
    grid.write_csv(v, &mut w)?;
    w.flush()?;
    Ok(())
}

fn div_norm(grid: &Grid2D, v: &VectorField2) -> f64 {
    discrete_divergence(grid, v)
        .and_then(|d| grid.p_norm(&d))
        .unwrap_or(f64::NAN)
}

/// Largest growth factor; NaN if any is NaN, 1 for an empty run.
pub fn max_growth(growths: impl IntoIterator<Item = f64>) -> f64 {
    let mut it = growths.into_iter().peekable();
    if it.peek().is_none() {
        return 1.0;
    }
    it.fold(f64::NEG_INFINITY, |m, g| if m.is_nan() || g.is_nan() { f64::NAN } else { m.max(g) })
}

/// File name for the snapshot requested at `t`.
pub fn snapshot_name(t: f64) -> String {
    format!("snapshot_t{t:.6}.csv")
}

fn check_dt(cfg: &RunConfig, grid: &Grid2D) -> Result<(), CliError> {
    cfg.dt_rule()
        .dt(grid)
        .map(|_| ())
        .map_err(|e| CliError::Config(format!("dt: {e} on the {}x{} grid", grid.nx(), grid.ny())))
}

/// Fields, per-step diagnostics and snapshots for one configuration.
pub fn run(cfg: &RunConfig, opts: &Options) -> Result<(), CliError> {
    cfg.expect(Experiment::Run)?;
    let grid = cfg.grid()?;
    check_dt(cfg, &grid)?;
    let spec = cfg.problem();
    let dir = opts.dir(cfg)?;
    let v0 = spec.initial.sample(&grid);
    let mut records = vec![StepRecord {
        n: 0,
        t: 0.0,
        energy: energy(&grid, &v0)?,
        growth: 1.0,
        div_norm: div_norm(&grid, &v0),
    }];
    let observer = |info: &StepInfo<'_>| {
        records.push(StepRecord {
            n: info.n,
            t: info.t,
            energy: info.energy,
            growth: info.growth,
            div_norm: div_norm(info.grid, info.v),
        })
    };
    let traj = stepper::run(&spec, &grid, cfg.dt_rule(), &cfg.snapshots, vec![Box::new(observer)])?;

    write_field(&grid, &traj.initial, &dir, "initial.csv")?;
    write_field(&grid, &traj.final_state.v, &dir, "final.csv")?;
    for s in &traj.snapshots {
        write_field(&grid, &s.v, &dir, &snapshot_name(s.requested))?;
    }
    let mut w = create(&dir, "diagnostics.csv")?;
    write_step_csv(&records, &mut w)?;
    w.flush()?;

    let last = records.last().expect("initial record");
    let max_growth = max_growth(records[1..].iter().map(|r| r.growth));
    let mut s = String::new();
    let _ = writeln!(s, "{} {}x{} on {:?}", cfg.order(), grid.nx(), grid.ny(), grid.domain());
    let _ = writeln!(
        s,
        "steps {} dt {:.6e} t_final {}",
        traj.times.steps, traj.times.dt, traj.times.t_final
    );
    let _ = writeln!(s, "energy {:.6e} -> {:.6e}", records[0].energy, last.energy);
    let _ = writeln!(s, "max growth factor {max_growth:.17}");
    let _ = writeln!(s, "divergence norm {:.6e}", last.div_norm);
    if spec.velocity == VelocityField::Rotation {
        let exact = exact_rotation(&spec.velocity, spec.initial, &grid, traj.final_state.t)?;
        if let Ok(e) = rel_l2_percent(&grid, &traj.final_state.v, &exact) {
            let _ = writeln!(s, "error vs exact rotation {e:.6e} %");
        }
    }
    for snap in &traj.snapshots {
        let _ = writeln!(
            s,
            "snapshot t={} (step {}, t={}) -> {}",
            snap.requested,
            snap.n,
            snap.t,
            snapshot_name(snap.requested)
        );
    }
    let _ = writeln!(s, "outputs in {}", dir.display());
    opts.say(&s);
    Ok(())
}

/// Error table against the exact rotation solution on a doubling sequence of grids.
pub fn converge(cfg: &RunConfig, opts: &Options) -> Result<(), CliError> {
    cfg.expect(Experiment::Converge)?;
    let spec = cfg.problem();
    if spec.velocity != VelocityField::Rotation {
        return Err(CliError::Config(
            "velocity: converge needs the rotation velocity for its exact solution".into(),
        ));
    }
    let grids = match &cfg.converge {
        Some(c) => c.grids.clone(),
        None => vec![[cfg.grid.nx, cfg.grid.ny]],
    };
    let dir = opts.dir(cfg)?;
    let mut errors = Vec::new();
    for [nx, ny] in grids {
        let grid = cfg.grid_of(nx, ny)?;
        check_dt(cfg, &grid)?;
        let v = final_state(&spec, &grid, cfg.dt_rule())?;
        let exact = exact_rotation(&spec.velocity, spec.initial, &grid, spec.final_time)?;
        let e = rel_l2_percent(&grid, &v, &exact)?;
        opts.say(&format!("{nx}x{ny}: {e:.6e} %\n"));
        errors.push(((nx, ny), e));
    }
    let rows = fit_rates(&errors)?;
    let mut w = create(&dir, "convergence.csv")?;
    write_convergence_csv(&rows, &mut w)?;
    w.flush()?;
    let table = convergence_table(&cfg.order().to_string(), &rows);
    let mut w = create(&dir, "convergence.txt")?;
    w.write_all(table.as_bytes())?;
    w.flush()?;
    opts.say(&table);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityRun {
    pub dt: f64,
    pub steps: usize,
    pub max_growth: f64,
    pub final_energy: f64,
}

/// Largest per-step growth factor for each configured step size.
pub fn stability(cfg: &RunConfig, opts: &Options) -> Result<(), CliError> {
    cfg.expect(Experiment::Stability)?;
    let spec = cfg.problem();
    if spec.boundary != BoundaryMode::ZeroG {
        return Err(CliError::Config("boundary: stability needs zero boundary data".into()));
    }
    let section = cfg
        .stability
        .as_ref()
        .ok_or_else(|| CliError::Config("stability: section missing".into()))?;
    let grid = cfg.grid()?;
    let h = grid.dx().max(grid.dy());
    let dts: Vec<f64> = section
        .dt
        .iter()
        .copied()
        .chain(section.dx_multiples.iter().map(|m| m * h))
        .collect();
    let dir = opts.dir(cfg)?;

    let mut runs = Vec::new();
    for dt in dts {
        let mut growths = Vec::new();
        let mut final_energy = energy(&grid, &spec.initial.sample(&grid))?;
        let observer = |info: &StepInfo<'_>| {
            growths.push(info.growth);
            final_energy = info.energy;
        };
        let traj = stepper::run(&spec, &grid, DtRule::Fixed(dt), &[], vec![Box::new(observer)])?;
        runs.push(StabilityRun {
            dt,
            steps: traj.times.steps,
            max_growth: max_growth(growths),
            final_energy,
        });
    }

    let k = fit_growth_constant(&runs.iter().map(|r| (r.max_growth, r.dt)).collect::<Vec<_>>());
    let mut csv = create(&dir, "stability.csv")?;
    writeln!(csv, "dt,steps,max_growth,k,final_energy")?;
    let mut table = String::new();
    let _ = writeln!(table, "{:<14} {:>8} {:>22} {:>12}", "dt", "steps", "max growth", "K");
    let _ = writeln!(table, "{}", "-".repeat(59));
    let mut violations = Vec::new();
    for r in &runs {
        let kr = fit_growth_constant(&[(r.max_growth, r.dt)]);
        writeln!(
            csv,
            "{:.16e},{},{:.16e},{:.16e},{:.16e}",
            r.dt, r.steps, r.max_growth, kr, r.final_energy
        )?;
        let _ = writeln!(table, "{:<14.6e} {:>8} {:>22.17} {:>12.4e}", r.dt, r.steps, r.max_growth, kr);
        let ok = r.max_growth <= 1.0 + section.max_k * r.dt && r.final_energy.is_finite();
        if !ok {
            violations.push(format!("dt {:e}: growth {}", r.dt, r.max_growth));
        }
    }
    csv.flush()?;
    let _ = writeln!(table, "fitted K {k:.6e} (bound {})", section.max_k);
    let mut w = create(&dir, "stability.txt")?;
    w.write_all(table.as_bytes())?;
    w.flush()?;
    opts.say(&table);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Bound(violations.join("; ")))
    }
}
