use std::path::Path;

use tecsim_core::coefficients::ConstantsReport;
use tecsim_core::estimates::{
    compute_r, constants_report, translate_estimate, verify_cotaul, AprioriBound, CotaulVerdict, DataNorms,
    EnergyLedger, EnergyRow,
};
use tecsim_core::mesh::{build_rect_mesh, Mesh};
use tecsim_core::stepper::{RotheConfig, RotheSolver, Trajectory};
use tecsim_core::Error;

use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};
use crate::output::{render_report, vtk_name, write_vtk, RunSummary, StepsCsv};

pub fn build_mesh(cfg: &ScenarioConfig) -> Result<Mesh> {
    Ok(build_rect_mesh(&cfg.model.domain, cfg.nx, cfg.ny)?)
}

fn rothe(cfg: &ScenarioConfig, force: bool) -> RotheConfig {
    RotheConfig {
        enforce_smallness: !force,
        ..cfg.rothe
    }
}

/// Constants, verdicts and the bound for a scenario.
pub fn check(cfg: &ScenarioConfig, mesh: &Mesh) -> Result<ConstantsReport> {
    let m = &cfg.model;
    Ok(constants_report(mesh, &m.coeffs, &m.ledger, &cfg.rothe, cfg.overrides)?)
}

/// The error a failed verdict turns into.
pub fn smallness_error(report: &ConstantsReport) -> Option<CliError> {
    report.first_failure().map(|v| {
        CliError::Core(Error::SmallnessViolated {
            condition: v.condition.clone(),
            margin: v.margin,
        })
    })
}

fn bound(cfg: &ScenarioConfig, mesh: &Mesh, report: &ConstantsReport) -> Result<Option<AprioriBound>> {
    if !report.all_pass() {
        return Ok(None);
    }
    let m = &cfg.model;
    let data = DataNorms::compute(mesh, &m.coeffs, &m.ledger, &cfg.rothe)?;
    Ok(Some(compute_r(
        &data,
        &m.ledger,
        report.k2.value(),
        report.p2.value(),
        &cfg.rothe,
    )?))
}

pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub rows: Vec<EnergyRow>,
    pub bound: Option<AprioriBound>,
    pub verdict: Option<CotaulVerdict>,
}

/// Steps the scenario, streaming the CSV series and snapshots into
/// `out_dir` and finishing with the report. With `force` a failed
/// smallness check does not stop the run, and no bound is evaluated.
pub fn run(cfg: &ScenarioConfig, out_dir: &Path, force: bool) -> Result<RunOutcome> {
    let mesh = build_mesh(cfg)?;
    let report = check(cfg, &mesh)?;
    if !force {
        if let Some(e) = smallness_error(&report) {
            return Err(e);
        }
    }
    let bound = bound(cfg, &mesh, &report)?;
    let rhs = bound.as_ref().map(|b| b.rhs);
    let m = &cfg.model;
    let species = m.coeffs.species;
    let solver = RotheSolver::new(&mesh, &m.coeffs, &m.ledger, rothe(cfg, force))?;
    let initial = solver.initial_state()?;
    let mut ledger = EnergyLedger::new(&mesh, &m.coeffs, &m.ledger, &cfg.rothe, &initial);
    let csv_path = out_dir.join(&cfg.output.csv);
    let mut csv = StepsCsv::create(&csv_path, species)?;
    let stride = cfg.output.vtk_stride;
    if stride > 0 {
        write_vtk(&out_dir.join(vtk_name(0)), &mesh, &initial, species)?;
    }
    let mut picard = Vec::new();
    let mut failure: Option<CliError> = None;
    let result = solver.run_with(|prev, cur| {
        picard.push(cur.picard_iters);
        let row = ledger.push(prev, cur)?.clone();
        let written = csv.push(&mesh, cur, &row, rhs).and_then(|()| {
            if stride > 0 && cur.m % stride == 0 {
                write_vtk(&out_dir.join(vtk_name(cur.m)), &mesh, cur, species)
            } else {
                Ok(())
            }
        });
        written.map_err(|e| {
            let msg = e.to_string();
            failure = Some(e);
            Error::InvalidInput(msg)
        })
    });
    let rows = ledger.rows().to_vec();
    let verdict = bound.as_ref().map(|b| verify_cotaul(&rows, b));
    let (trajectory, error) = match result {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(failure.take().unwrap_or(CliError::Core(e)))),
    };
    let message = error.as_ref().map(ToString::to_string);
    let summary = RunSummary {
        name: &cfg.name,
        mesh: &mesh,
        final_time: cfg.rothe.final_time,
        steps: cfg.rothe.steps,
        bound: bound.as_ref(),
        rows: &rows,
        verdict: verdict.as_ref(),
        picard: &picard,
        failure: message.as_deref(),
    };
    let report_path = out_dir.join(&cfg.output.report);
    std::fs::write(&report_path, render_report(&report, &summary)).map_err(|e| CliError::io(&report_path, e))?;
    match (trajectory, error) {
        (Some(trajectory), None) => Ok(RunOutcome {
            trajectory,
            rows,
            bound,
            verdict,
        }),
        (_, e) => Err(e.expect("a failed run carries its error")),
    }
}

/// Default translations: one, two, four and eight steps.
pub fn default_shifts(cfg: &ScenarioConfig) -> Vec<f64> {
    let tau = cfg.rothe.tau();
    [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|k| k * tau)
        .filter(|&z| z < cfg.rothe.final_time)
        .collect()
}

/// Time-translate values for each shift.
pub fn translate(cfg: &ScenarioConfig, shifts: &[f64], force: bool) -> Result<Vec<(f64, f64)>> {
    let mesh = build_mesh(cfg)?;
    let m = &cfg.model;
    let solver = RotheSolver::new(&mesh, &m.coeffs, &m.ledger, rothe(cfg, force))?;
    let traj = solver.run()?;
    shifts
        .iter()
        .map(|&z| Ok((z, translate_estimate(&traj, &mesh, solver.kirchhoff(), z)?)))
        .collect()
}
