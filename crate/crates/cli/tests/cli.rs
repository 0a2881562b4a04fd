use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tecsim::commands;
use tecsim::convergence::{study, terminal_error, Sweep};
use tecsim::output::CSV_SCHEMA;
use tecsim::{load_config, parse_config, CliError};
use tecsim_core::coefficients::preset;
use tecsim_core::mesh::build_rect_mesh;
use tecsim_core::stepper::{run, RotheConfig};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn tecsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tecsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const SMALL: &str = "preset = \"decoupled-heat\"\n[mesh]\nnx = 4\nny = 4\n[time]\nfinal_time = 0.5\nsteps = 4\n";

#[test]
fn minimal_preset_fills_defaults() {
    let cfg = parse_config("preset = \"decoupled-heat\"\n").unwrap();
    let d = preset("decoupled-heat").unwrap().defaults;
    assert_eq!((cfg.nx, cfg.ny, cfg.rothe.steps), (d.nx, d.ny, d.steps));
    assert_eq!(cfg.rothe.final_time, d.final_time);
    assert_eq!(cfg.output.csv, PathBuf::from("steps.csv"));
    assert_eq!(cfg.output.vtk_stride, 0);
    assert_eq!(cfg.overrides.k2, None);
}

#[test]
fn unknown_key_is_named_with_its_line() {
    let err = parse_config("preset = \"decoupled-heat\"\n\n[mesh]\nnx = 4\nfoo = 1\n").unwrap_err();
    match &err {
        CliError::Schema { line, message } => {
            assert_eq!(*line, Some(5));
            assert!(message.contains("foo"), "{message}");
        }
        other => panic!("{other}"),
    }
    assert_eq!(err.exit_code(), 4);
    let top = parse_config("preset = \"decoupled-heat\"\nfoo = 1\n").unwrap_err();
    assert!(
        top.to_string().contains("foo") && top.to_string().starts_with("line 2"),
        "{top}"
    );
}

#[test]
fn step_count_not_above_final_time_is_refused_at_parse_time() {
    let err = parse_config("preset = \"decoupled-heat\"\n[time]\nfinal_time = 3.0\nsteps = 3\n").unwrap_err();
    assert!(
        matches!(
            err,
            CliError::StepCountTooSmall {
                line: Some(4),
                steps: 3,
                ..
            }
        ),
        "{err}"
    );
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn bad_expressions_report_their_line() {
    let text = std::fs::read_to_string(scenario("inline-heat.toml")).unwrap();
    let line = text.lines().position(|l| l.starts_with("initial")).unwrap() + 1;
    for (from, to) in [
        ("cos(pi*x)\"]", "cos(pi*z)\"]"),
        ("cos(pi*x)\"]", "cos(pi*x))\"]"),
        ("cos(pi*x)\"]", "sqrt(x)\"]"),
    ] {
        let err = parse_config(&text.replacen(from, to, 1)).unwrap_err();
        match err {
            CliError::ExpressionParse { line: l, .. } => assert_eq!(l, Some(line)),
            other => panic!("{other}"),
        }
    }
}

#[test]
fn inline_model_needs_bounds_and_rejects_a_preset_alongside() {
    let text = std::fs::read_to_string(scenario("inline-heat.toml")).unwrap();
    let cut = text.find("[bounds]").unwrap();
    assert!(matches!(parse_config(&text[..cut]), Err(CliError::Schema { .. })));
    assert!(matches!(
        parse_config(&format!("preset = \"robin-heat\"\n{text}")),
        Err(CliError::Schema { .. })
    ));
    let err = parse_config("preset = \"nope\"\n").unwrap_err();
    assert!(err.to_string().contains("nope"), "{err}");
}

#[test]
fn domain_segments_and_whole_sides() {
    let text = "preset = \"decoupled-heat\"\n[domain]\nwidth = 2.0\nheight = 1.0\nright = \"cathode\"\ntop = \"outer\"\nleft = \"anode\"\n\
                [[domain.segment]]\nside = \"bottom\"\nfrom = 0.0\nto = 1.0\nregion = \"wall\"\n\
                [[domain.segment]]\nside = \"bottom\"\nfrom = 1.0\nto = 2.0\nregion = \"outer\"\n";
    let cfg = parse_config(text).unwrap();
    let mesh = build_rect_mesh(&cfg.model.domain, 8, 4).unwrap();
    assert!((mesh.boundary_measure(tecsim_core::Region::Wall) - 1.0).abs() < 1e-12);
    assert!((mesh.boundary_measure(tecsim_core::Region::Outer) - 3.0).abs() < 1e-12);
    let gap = text.replace("from = 1.0", "from = 1.5");
    assert!(matches!(parse_config(&gap), Err(CliError::Schema { .. })));
}

#[test]
fn inline_expressions_reproduce_the_preset() {
    let inline = load_config(&scenario("inline-heat.toml")).unwrap();
    let model = preset("decoupled-heat").unwrap();
    let mesh = build_rect_mesh(&model.domain, 6, 6).unwrap();
    let cfg = RotheConfig::new(0.5, 8).unwrap();
    let a = run(&inline.model.coeffs, &inline.model.ledger, &mesh, cfg).unwrap();
    let b = run(&model.coeffs, &model.ledger, &mesh, cfg).unwrap();
    for (x, y) in a.states.iter().zip(&b.states) {
        for (f, g) in x.fields.iter().zip(&y.fields) {
            for (u, v) in f.values().iter().zip(g.values()) {
                assert!((u - v).abs() <= 1e-12 * (1.0 + v.abs()), "{u} vs {v}");
            }
        }
    }
    let ea = terminal_error(&inline.model, &mesh, a.last()).unwrap();
    let eb = terminal_error(&model, &mesh, b.last()).unwrap();
    assert!((ea - eb).abs() <= 1e-12 * eb);
}

#[test]
fn run_writes_one_row_per_step_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", &format!("{SMALL}[output]\nvtk_stride = 2\n"));
    let outs: Vec<PathBuf> = (0..2).map(|k| dir.path().join(format!("out{k}"))).collect();
    for out in &outs {
        let o = tecsim(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv = std::fs::read_to_string(outs[0].join("steps.csv")).unwrap();
    assert_eq!(csv, std::fs::read_to_string(outs[1].join("steps.csv")).unwrap());
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_SCHEMA);
    assert_eq!(lines.len(), 1 + 1 + 4);
    let header: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(header[..3], ["m", "t", "picard_iters"]);
    assert_eq!(header.last(), Some(&"margin"));
    for (k, row) in lines[2..].iter().enumerate() {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), header.len());
        assert_eq!(cells[0], (k + 1).to_string());
        for (_j, c) in cells.iter().enumerate().skip(1).filter(|(j, _)| *j != 2) {
            // Shortest round-trip formatting.
            assert_eq!(format!("{:?}", c.parse::<f64>().unwrap()), *c);
        }
        assert!(cells.last().unwrap().parse::<f64>().unwrap() > 0.0);
    }
    for m in [0, 2, 4] {
        let vtk = std::fs::read_to_string(outs[0].join(format!("fields_{m:04}.vtk"))).unwrap();
        assert!(vtk.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(vtk.contains("POINTS 25 double") && vtk.contains("CELLS 32 128") && vtk.contains("SCALARS theta"));
    }
    assert!(!outs[0].join("fields_0001.vtk").exists());
    let report = std::fs::read_to_string(outs[0].join("report.txt")).unwrap();
    assert!(report.contains("energy bound: PASS") && report.contains("# energy ledger"));
    assert!(report.contains("species energy term read as squared L2 norms"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let strong = scenario("strong-coupling.toml");
    let o = tecsim(&["check", strong.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL   L1"));
    assert_eq!(
        tecsim(&["run", strong.to_str().unwrap(), "--out", out]).status.code(),
        Some(2)
    );

    let bad = write(dir.path(), "bad.toml", "preset = \"decoupled-heat\"\nfoo = 1\n");
    let o = tecsim(&["check", bad.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    // One fixed-point iteration cannot settle a nonlinear step.
    let starved = write(
        dir.path(),
        "starved.toml",
        "preset = \"robin-heat\"\n[mesh]\nnx = 4\nny = 4\n[time]\nsteps = 4\n[picard]\nmax_iter = 1\n",
    );
    let o = tecsim(&["run", starved.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step 1"));

    let ok = write(dir.path(), "ok.toml", SMALL);
    assert_eq!(
        tecsim(&["check", ok.to_str().unwrap(), "--out", out]).status.code(),
        Some(0)
    );
    let o = tecsim(&[
        "convergence",
        scenario("robin-heat.toml").to_str().unwrap(),
        "--levels",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exact solution"));
}

#[test]
fn check_prints_overrides_side_by_side() {
    let cfg = parse_config(&format!("{SMALL}[constants]\nk2 = 3.0\np2 = 0.5\n")).unwrap();
    let mesh = commands::build_mesh(&cfg).unwrap();
    let report = commands::check(&cfg, &mesh).unwrap();
    assert_eq!(report.k2.value(), 3.0);
    assert!(report.r_bound_mesh.is_some() && report.r_bound != report.r_bound_mesh);
    let text = tecsim::output::render_constants(&report);
    assert!(text.contains("user value 3.0") && text.contains("R with mesh-estimated constants"));
}

#[test]
fn translate_defaults_to_doubling_shifts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = load_config(&write(dir.path(), "s.toml", SMALL)).unwrap();
    let shifts = commands::default_shifts(&cfg);
    assert_eq!(shifts, vec![0.125, 0.25]);
    let values = commands::translate(&cfg, &shifts, false).unwrap();
    assert!(values.iter().all(|(_, v)| *v > 0.0));
    let o = tecsim(&["translate", dir.path().join("s.toml").to_str().unwrap(), "--z", "0.2"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout)
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("0.2,"));
}

#[test]
fn convergence_table_orders() {
    let model = preset("decoupled-heat").unwrap();
    let levels = study(&model, (16, 16, 8), 0.5, 3, Sweep::Time).unwrap();
    assert!(levels[0].temporal_order.is_none() && levels[1].spatial_order.is_none());
    for l in &levels[1..] {
        let p = l.temporal_order.unwrap();
        assert!((0.7..=1.3).contains(&p), "{p}");
    }
    let robin = preset("robin-heat").unwrap();
    assert!(matches!(
        study(&robin, (4, 4, 4), 1.0, 2, Sweep::Space),
        Err(CliError::NoExactSolution)
    ));
}

#[test]
fn one_step_from_the_exact_state_stays_close() {
    // Starting from the interpolated exact solution, a single short step
    // stays below the error of the coarsest full run.
    let model = preset("decoupled-heat").unwrap();
    let mesh = build_rect_mesh(&model.domain, 16, 16).unwrap();
    let coarse = run(&model.coeffs, &model.ledger, &mesh, RotheConfig::new(0.5, 8).unwrap()).unwrap();
    let level0 = terminal_error(&model, &mesh, coarse.last()).unwrap();
    let step = run(&model.coeffs, &model.ledger, &mesh, RotheConfig::new(1e-3, 1).unwrap()).unwrap();
    let one = terminal_error(&model, &mesh, step.last()).unwrap();
    assert!(one < level0, "{one} vs {level0}");
}
