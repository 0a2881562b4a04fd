//! Refinement studies against a closed-form solution.

use std::fmt::Write as _;
use std::str::FromStr;

use tecsim_core::coefficients::Model;
use tecsim_core::fem::l2_error;
use tecsim_core::mesh::{build_rect_mesh, Mesh};
use tecsim_core::stepper::{run, RotheConfig, StepState};

use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};
use crate::output::num;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    /// Halve the mesh size at a fixed step count.
    Space,
    /// Double the step count on a fixed mesh.
    Time,
    /// Halve the mesh size and quadruple the step count together.
    Joint,
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "space" => Ok(Sweep::Space),
            "time" => Ok(Sweep::Time),
            "joint" => Ok(Sweep::Joint),
            other => Err(format!("unknown sweep `{other}` (space, time, joint)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub nx: usize,
    pub ny: usize,
    pub steps: usize,
    pub h: f64,
    pub tau: f64,
    pub error: f64,
    pub spatial_order: Option<f64>,
    pub temporal_order: Option<f64>,
}

/// Root of the summed squared L2 errors at the final time over all unknowns
/// with a closed-form solution.
pub fn terminal_error(model: &Model, mesh: &Mesh, last: &StepState) -> Result<f64> {
    let exact = model.exact.as_ref().ok_or(CliError::NoExactSolution)?;
    let t = last.time;
    let sq: f64 = exact
        .iter()
        .zip(&last.fields)
        .filter_map(|(e, f)| e.as_ref().map(|e| l2_error(mesh, f.values(), |p| e.eval(p, t)).powi(2)))
        .sum();
    Ok(sq.sqrt())
}

/// Runs `levels` refinements starting from `(nx, ny, steps)`.
pub fn study(
    model: &Model,
    (nx, ny, steps): (usize, usize, usize),
    final_time: f64,
    levels: usize,
    sweep: Sweep,
) -> Result<Vec<Level>> {
    if model.exact.as_ref().is_none_or(|e| e.iter().all(Option::is_none)) {
        return Err(CliError::NoExactSolution);
    }
    let mut out: Vec<Level> = Vec::with_capacity(levels);
    for k in 0..levels {
        let (space, time) = match sweep {
            Sweep::Space => (1 << k, 1),
            Sweep::Time => (1, 1 << k),
            Sweep::Joint => (1 << k, 1 << (2 * k)),
        };
        let (nx, ny, steps) = (nx * space, ny * space, steps * time);
        let mesh = build_rect_mesh(&model.domain, nx, ny)?;
        let cfg = RotheConfig::new(final_time, steps)?;
        let traj = run(&model.coeffs, &model.ledger, &mesh, cfg)?;
        let error = terminal_error(model, &mesh, traj.last())?;
        let (h, tau) = (mesh.max_edge_length(), cfg.tau());
        let order = |prev: f64, cur: f64, pe: f64| {
            ((prev / cur - 1.0).abs() > 1e-12).then(|| (pe / error).ln() / (prev / cur).ln())
        };
        let (spatial_order, temporal_order) = match out.last() {
            Some(p) => (order(p.h, h, p.error), order(p.tau, tau, p.error)),
            None => (None, None),
        };
        out.push(Level {
            nx,
            ny,
            steps,
            h,
            tau,
            error,
            spatial_order,
            temporal_order,
        });
    }
    Ok(out)
}

pub fn study_config(cfg: &ScenarioConfig, levels: usize, sweep: Sweep) -> Result<Vec<Level>> {
    study(
        &cfg.model,
        (cfg.nx, cfg.ny, cfg.rothe.steps),
        cfg.rothe.final_time,
        levels,
        sweep,
    )
}

pub fn render(levels: &[Level]) -> String {
    let mut s = String::from("nx,ny,steps,h,tau,error,spatial_order,temporal_order\n");
    let opt = |v: Option<f64>| v.map_or_else(String::new, num);
    for l in levels {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            l.nx,
            l.ny,
            l.steps,
            num(l.h),
            num(l.tau),
            num(l.error),
            opt(l.spatial_order),
            opt(l.temporal_order)
        );
    }
    s
}
