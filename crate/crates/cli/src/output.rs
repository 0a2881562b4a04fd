//! Result files: the per-step CSV series, legacy VTK snapshots and the
//! text reports.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use tecsim_core::coefficients::ConstantsReport;
use tecsim_core::estimates::{AprioriBound, CotaulVerdict, EnergyRow};
use tecsim_core::fem::l2_norm;
use tecsim_core::mesh::Mesh;
use tecsim_core::stepper::StepState;

use crate::error::{CliError, Result};

pub const CSV_SCHEMA: &str = "# tecsim steps v1";

/// Shortest decimal that parses back to the same value.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Names of the unknowns in block order.
pub fn field_names(species: usize) -> Vec<String> {
    (1..=species)
        .map(|i| format!("u{i}"))
        .chain(["theta".to_string(), "phi".to_string()])
        .collect()
}

pub struct StepsCsv {
    path: PathBuf,
    out: csv::Writer<BufWriter<File>>,
}

impl StepsCsv {
    pub fn create(path: &Path, species: usize) -> Result<Self> {
        let mut file = BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?);
        writeln!(file, "{CSV_SCHEMA}").map_err(|e| CliError::io(path, e))?;
        let mut out = csv::Writer::from_writer(file);
        let mut header: Vec<String> = ["m", "t", "picard_iters", "increment"].map(String::from).to_vec();
        header.extend(field_names(species).iter().map(|n| format!("l2_{n}")));
        header.extend(["s1", "s2", "s3", "s4", "s5", "rhs", "margin"].map(String::from));
        out.write_record(&header).map_err(|e| csv_error(path, e))?;
        Ok(StepsCsv {
            path: path.to_path_buf(),
            out,
        })
    }

    pub fn push(&mut self, mesh: &Mesh, state: &StepState, row: &EnergyRow, rhs: Option<f64>) -> Result<()> {
        let rhs = rhs.unwrap_or(f64::NAN);
        let mut rec = vec![
            state.m.to_string(),
            num(state.time),
            state.picard_iters.to_string(),
            num(state.increment_history.last().copied().unwrap_or(0.0)),
        ];
        rec.extend(state.fields.iter().map(|f| num(l2_norm(mesh, f.values()))));
        rec.extend([row.s1, row.s2, row.s3, row.s4, row.s5, rhs, rhs - row.lhs()].map(num));
        self.out.write_record(&rec).map_err(|e| csv_error(&self.path, e))?;
        // Rows reach the disk in step order even if a later step fails.
        self.out.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path, io::Error::other(e))
}

/// Legacy ASCII VTK file with one point-data scalar per unknown.
pub fn write_vtk(path: &Path, mesh: &Mesh, state: &StepState, species: usize) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "tecsim step {} t={}", state.m, num(state.time));
    let _ = writeln!(s, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.num_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{} {} 0", num(p[0]), num(p[1]));
    }
    let nt = mesh.num_triangles();
    let _ = writeln!(s, "CELLS {nt} {}", 4 * nt);
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {}", mesh.num_vertices());
    for (name, field) in field_names(species).iter().zip(&state.fields) {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in field.values() {
            let _ = writeln!(s, "{}", num(*v));
        }
    }
    std::fs::write(path, s).map_err(|e| CliError::io(path, e))
}

pub fn vtk_name(m: usize) -> String {
    format!("fields_{m:04}.vtk")
}

/// Human-readable constants and verdicts.
pub fn render_constants(r: &ConstantsReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "coercivity constants:");
    for (j, l) in r.l_sharp.iter().enumerate() {
        let _ = writeln!(s, "  L{} = {}", j + 1, num(*l));
    }
    let _ = writeln!(s, "smallness conditions:");
    for v in &r.verdicts {
        let _ = writeln!(
            s,
            "  {:<6} {} margin {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.condition,
            num(v.margin)
        );
    }
    let constant = |s: &mut String, name: &str, c: &tecsim_core::coefficients::ConstantEstimate| {
        let user = c.user.map_or_else(|| "none".to_string(), num);
        let _ = writeln!(
            s,
            "{name} = {} (mesh estimate {}, user value {user})",
            num(c.value()),
            num(c.mesh)
        );
    };
    constant(&mut s, "K2", &r.k2);
    constant(&mut s, "P2", &r.p2);
    let opt = |v: Option<f64>| v.map_or_else(|| "undefined (smallness fails)".to_string(), num);
    let _ = writeln!(s, "R = {}", opt(r.r_bound));
    if let Some(m) = r.r_bound_mesh {
        let _ = writeln!(s, "R with mesh-estimated constants = {}", num(m));
    }
    let _ = writeln!(s, "multiplier = {}", opt(r.multiplier));
    let _ = writeln!(s, "energy bound = {}", opt(r.cotaul_rhs));
    if !r.notes.is_empty() {
        let _ = writeln!(s, "notes:");
        for n in &r.notes {
            let _ = writeln!(s, "  - {n}");
        }
    }
    s
}

/// Everything the run report needs besides the constants.
pub struct RunSummary<'a> {
    pub name: &'a str,
    pub mesh: &'a Mesh,
    pub final_time: f64,
    pub steps: usize,
    pub bound: Option<&'a AprioriBound>,
    pub rows: &'a [EnergyRow],
    pub verdict: Option<&'a CotaulVerdict>,
    pub picard: &'a [usize],
    pub failure: Option<&'a str>,
}

pub fn render_report(constants: &ConstantsReport, run: &RunSummary) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "tecsim report v1");
    let _ = writeln!(s, "scenario: {}", run.name);
    let _ = writeln!(
        s,
        "mesh: {} vertices, {} triangles, h = {}",
        run.mesh.num_vertices(),
        run.mesh.num_triangles(),
        num(run.mesh.max_edge_length())
    );
    let _ = writeln!(
        s,
        "time: T = {}, M = {}, tau = {}",
        num(run.final_time),
        run.steps,
        num(run.final_time / run.steps as f64)
    );
    s.push_str(&render_constants(constants));
    if let Some(b) = run.bound {
        let _ = writeln!(s, "bound terms:");
        for (name, v) in &b.terms {
            let _ = writeln!(s, "  {name} = {}", num(*v));
        }
    }
    if !run.picard.is_empty() {
        let max = run.picard.iter().max().copied().unwrap_or(0);
        let mean = run.picard.iter().sum::<usize>() as f64 / run.picard.len() as f64;
        let _ = writeln!(s, "fixed-point iterations: max {max}, mean {}", num(mean));
    }
    match (run.verdict, run.failure) {
        (_, Some(f)) => {
            let _ = writeln!(s, "run failed: {f}");
        }
        (Some(v), None) if v.pass => {
            let min = v.margins.iter().copied().fold(f64::INFINITY, f64::min);
            let _ = writeln!(s, "energy bound: PASS at every step, smallest margin {}", num(min));
        }
        (Some(v), None) => {
            let _ = writeln!(
                s,
                "energy bound: FAIL, first violation at step {}",
                v.first_violation.unwrap_or(0)
            );
        }
        (None, None) => {
            let _ = writeln!(s, "energy bound: not evaluated");
        }
    }
    let _ = writeln!(s, "\n# energy ledger");
    let _ = writeln!(s, "m,t,s1,s2,s3,s4,s5,lhs,balance_margin");
    for r in run.rows {
        let vals = [r.time, r.s1, r.s2, r.s3, r.s4, r.s5, r.lhs(), r.balance_margin].map(num);
        let _ = writeln!(s, "{},{}", r.m, vals.join(","));
    }
    s
}
