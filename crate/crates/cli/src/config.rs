//! Scenario files.
//!
//! A scenario either names a built-in preset or declares its coefficients
//! inline as constants and expression strings. Unknown keys are rejected and
//! every diagnostic carries the line it refers to when one is known.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use tecsim_core::coefficients::{
    preset, BoundsLedger, CoefficientSet, GammaBounds, Model, ModelDefaults, ScalarCoef, SpaceCoef, StateCoef,
};
use tecsim_core::estimates::ConstantOverrides;
use tecsim_core::mesh::{DomainSpec, Region, Side, SideSegment};
use tecsim_core::stepper::{PicardConfig, RotheConfig};
use toml::Spanned;

use crate::error::{CliError, Result};
use crate::expr::Expr;

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub csv: PathBuf,
    pub report: PathBuf,
    /// Write a field snapshot every this many steps; 0 disables snapshots.
    pub vtk_stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            csv: "steps.csv".into(),
            report: "report.txt".into(),
            vtk_stride: 0,
        }
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub model: Model,
    pub nx: usize,
    pub ny: usize,
    pub rothe: RotheConfig,
    pub overrides: ConstantOverrides,
    pub output: OutputConfig,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Src {
    Int(i64),
    Num(f64),
    Text(String),
}

type Item = Spanned<Src>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    name: Option<String>,
    preset: Option<Spanned<String>>,
    domain: Option<RawDomain>,
    mesh: Option<RawMesh>,
    time: Option<RawTime>,
    picard: Option<RawPicard>,
    model: Option<Spanned<RawModel>>,
    bounds: Option<RawBounds>,
    constants: Option<RawConstants>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    width: f64,
    height: f64,
    bottom: Option<Spanned<String>>,
    right: Option<Spanned<String>>,
    top: Option<Spanned<String>>,
    left: Option<Spanned<String>>,
    #[serde(default)]
    segment: Vec<RawSegment>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    side: Spanned<String>,
    from: f64,
    to: f64,
    region: Spanned<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    nx: Option<usize>,
    ny: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    final_time: Option<Spanned<f64>>,
    steps: Option<Spanned<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPicard {
    tol: Option<f64>,
    max_iter: Option<usize>,
    damping: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    species: Option<usize>,
    ell: Option<f64>,
    diffusion: Option<Vec<Vec<Item>>>,
    potential_coupling: Option<Vec<Item>>,
    current_coupling: Option<Vec<Item>>,
    conductivity: Option<Item>,
    heat_weight: Option<Item>,
    gamma_electrode: Option<Item>,
    gamma_wall: Option<Item>,
    current_anode: Option<Item>,
    current_cathode: Option<Item>,
    initial: Option<Vec<Item>>,
    exact: Option<Vec<Item>>,
    flux: Option<RawFlux>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFlux {
    anode: Option<Vec<Item>>,
    cathode: Option<Vec<Item>>,
    wall: Option<Vec<Item>>,
    outer: Option<Vec<Item>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBounds {
    diffusion_sharp: Vec<Vec<f64>>,
    diffusion_lower: Vec<f64>,
    potential_coupling_sharp: Vec<f64>,
    current_coupling_sharp: Vec<f64>,
    conductivity: (f64, f64),
    heat_weight: (f64, f64),
    gamma_electrode: RawGamma,
    gamma_wall: RawGamma,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGamma {
    lower: f64,
    upper: f64,
    #[serde(default)]
    offset: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstants {
    k2: Option<f64>,
    p2: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    csv: Option<PathBuf>,
    report: Option<PathBuf>,
    vtk_stride: Option<usize>,
}

/// Maps byte offsets to 1-based line numbers.
struct Lines<'a>(&'a str);

impl Lines<'_> {
    fn of(&self, offset: usize) -> usize {
        self.0[..offset.min(self.0.len())]
            .bytes()
            .filter(|&b| b == b'\n')
            .count()
            + 1
    }

    fn at<T>(&self, s: &Spanned<T>) -> Option<usize> {
        Some(self.of(s.span().start))
    }

    fn schema<T>(&self, s: &Spanned<T>, message: impl Into<String>) -> CliError {
        CliError::Schema {
            line: self.at(s),
            message: message.into(),
        }
    }
}

fn schema(message: impl Into<String>) -> CliError {
    CliError::Schema {
        line: None,
        message: message.into(),
    }
}

const SPACE: &[&str] = &["x", "y"];
const SPACE_TIME: &[&str] = &["x", "y", "t"];
const SCALAR: &[&str] = &["x", "y", "e"];

/// `x`, `y` and the state components `e1 .. eN`.
fn state_names(n: usize) -> Vec<String> {
    ["x".to_string(), "y".to_string()]
        .into_iter()
        .chain((1..=n).map(|i| format!("e{i}")))
        .collect()
}

struct Builder<'a> {
    lines: Lines<'a>,
    state: Vec<String>,
}

impl Builder<'_> {
    fn expr(&self, item: &Item, names: &[&str]) -> Result<Result<f64, Expr>> {
        match item.get_ref() {
            Src::Int(v) => Ok(Ok(*v as f64)),
            Src::Num(v) => Ok(Ok(*v)),
            Src::Text(s) => {
                let e = Expr::parse(s, names).map_err(|message| CliError::ExpressionParse {
                    line: self.lines.at(item),
                    expr: s.clone(),
                    message,
                })?;
                Ok(if e.is_constant() {
                    Ok(e.eval(&vec![0.0; names.len()]))
                } else {
                    Err(e)
                })
            }
        }
    }

    fn space(&self, item: &Item) -> Result<SpaceCoef> {
        Ok(match self.expr(item, SPACE)? {
            Ok(c) => SpaceCoef::Const(c),
            Err(e) => SpaceCoef::func(move |p| e.eval(&p)),
        })
    }

    fn scalar(&self, item: &Item, names: &[&str]) -> Result<ScalarCoef> {
        Ok(match self.expr(item, names)? {
            Ok(c) => ScalarCoef::Const(c),
            Err(e) => ScalarCoef::func(move |p, s| e.eval(&[p[0], p[1], s])),
        })
    }

    fn state(&self, item: &Item) -> Result<StateCoef> {
        let names: Vec<&str> = self.state.iter().map(String::as_str).collect();
        Ok(match self.expr(item, &names)? {
            Ok(c) => StateCoef::Const(c),
            Err(e) => StateCoef::func(move |p, s| {
                let mut v = Vec::with_capacity(2 + s.len());
                v.extend_from_slice(&p);
                v.extend_from_slice(s);
                e.eval(&v)
            }),
        })
    }

    fn list<T>(
        &self,
        items: &[Item],
        len: usize,
        what: &str,
        mut f: impl FnMut(&Self, &Item) -> Result<T>,
    ) -> Result<Vec<T>> {
        if items.len() != len {
            let line = items.first().and_then(|i| self.lines.at(i));
            return Err(CliError::Schema {
                line,
                message: format!("`{what}` needs {len} entries, got {}", items.len()),
            });
        }
        items.iter().map(|i| f(self, i)).collect()
    }
}

fn region(lines: &Lines, name: &Spanned<String>) -> Result<Region> {
    Region::from_name(name.get_ref()).ok_or_else(|| {
        lines.schema(
            name,
            format!("unknown region `{}` (anode, cathode, wall, outer)", name.get_ref()),
        )
    })
}

fn domain(lines: &Lines, raw: &RawDomain) -> Result<DomainSpec> {
    let mut layout = Vec::new();
    let sides = [
        (Side::Bottom, &raw.bottom),
        (Side::Right, &raw.right),
        (Side::Top, &raw.top),
        (Side::Left, &raw.left),
    ];
    for (side, name) in sides {
        if let Some(name) = name {
            let to = if matches!(side, Side::Bottom | Side::Top) {
                raw.width
            } else {
                raw.height
            };
            layout.push(SideSegment {
                side,
                from: 0.0,
                to,
                region: region(lines, name)?,
            });
        }
    }
    for seg in &raw.segment {
        let side = Side::from_name(seg.side.get_ref()).ok_or_else(|| {
            lines.schema(
                &seg.side,
                format!("unknown side `{}` (bottom, right, top, left)", seg.side.get_ref()),
            )
        })?;
        if sides.iter().any(|(s, n)| *s == side && n.is_some()) {
            return Err(lines.schema(
                &seg.side,
                format!("{} side is given both whole and by segments", side.name()),
            ));
        }
        layout.push(SideSegment {
            side,
            from: seg.from,
            to: seg.to,
            region: region(lines, &seg.region)?,
        });
    }
    DomainSpec::new(raw.width, raw.height, layout).map_err(|e| schema(format!("[domain]: {e}")))
}

fn ledger(raw: &RawBounds, ell: f64) -> BoundsLedger {
    let gamma = |g: &RawGamma| GammaBounds {
        lower: g.lower,
        upper: g.upper,
        offset: g.offset,
    };
    BoundsLedger {
        a_sharp: raw.diffusion_sharp.clone(),
        a_lower: raw.diffusion_lower.clone(),
        f_sharp: raw.potential_coupling_sharp.clone(),
        g_sharp: raw.current_coupling_sharp.clone(),
        sigma: raw.conductivity,
        b: raw.heat_weight,
        gamma_electrode: gamma(&raw.gamma_electrode),
        gamma_wall: gamma(&raw.gamma_wall),
        ell,
    }
}

fn inline_model(b: &Builder, raw: &RawModel) -> Result<(CoefficientSet, Option<Vec<Option<ScalarCoef>>>)> {
    let species = raw.species.unwrap_or(1);
    if species == 0 {
        return Err(schema("[model]: `species` must be at least 1"));
    }
    let n = species + 1;
    let mut c = CoefficientSet::decoupled(species);
    if let Some(ell) = raw.ell {
        c.ell = ell;
    }
    if let Some(rows) = &raw.diffusion {
        if rows.len() != n {
            return Err(schema(format!(
                "[model]: `diffusion` needs {n} rows, got {}",
                rows.len()
            )));
        }
        c.a = rows
            .iter()
            .map(|r| b.list(r, n, "diffusion", Builder::state))
            .collect::<Result<_>>()?;
    }
    if let Some(v) = &raw.potential_coupling {
        c.f = b.list(v, n, "potential_coupling", Builder::state)?;
    }
    if let Some(v) = &raw.current_coupling {
        c.g = b.list(v, n, "current_coupling", Builder::state)?;
    }
    if let Some(v) = &raw.conductivity {
        c.sigma = b.state(v)?;
    }
    if let Some(v) = &raw.heat_weight {
        c.b = b.scalar(v, SCALAR)?;
    }
    if let Some(v) = &raw.gamma_electrode {
        c.gamma_electrode = b.scalar(v, SCALAR)?;
    }
    if let Some(v) = &raw.gamma_wall {
        c.gamma_wall = b.scalar(v, SCALAR)?;
    }
    if let Some(v) = &raw.current_anode {
        c.current_anode = b.space(v)?;
    }
    if let Some(v) = &raw.current_cathode {
        c.current_cathode = b.space(v)?;
    }
    if let Some(v) = &raw.initial {
        c.initial = b.list(v, n, "initial", Builder::space)?;
    }
    if let Some(flux) = &raw.flux {
        let parts = [
            (Region::Anode, &flux.anode),
            (Region::Cathode, &flux.cathode),
            (Region::Wall, &flux.wall),
            (Region::Outer, &flux.outer),
        ];
        for (r, data) in parts {
            if let Some(items) = data {
                let coefs = b.list(items, n, r.name(), |b, i| b.scalar(i, SPACE_TIME))?;
                for (h, coef) in c.h.iter_mut().zip(coefs) {
                    h.set(r, Some(coef));
                }
            }
        }
    }
    let exact = match &raw.exact {
        None => None,
        Some(items) => Some(b.list(items, n + 1, "exact", |b, i| match i.get_ref() {
            Src::Text(s) if s.trim().is_empty() => Ok(None),
            _ => b.scalar(i, SPACE_TIME).map(Some),
        })?),
    };
    Ok((c, exact))
}

/// Parses and validates a scenario.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let lines = Lines(text);
    let raw: Raw = toml::from_str(text).map_err(|e| CliError::Schema {
        line: e.span().map(|s| lines.of(s.start)),
        message: e.message().trim().to_string(),
    })?;

    let mut model = match (&raw.preset, &raw.model) {
        (Some(_), Some(m)) => return Err(lines.schema(m, "`preset` and [model] cannot both be given")),
        (Some(name), None) => preset(name.get_ref()).map_err(|e| lines.schema(name, e.to_string()))?,
        (None, Some(m)) => {
            let builder = Builder {
                lines: Lines(text),
                state: state_names(m.get_ref().species.unwrap_or(1) + 1),
            };
            let (coeffs, exact) = inline_model(&builder, m.get_ref())?;
            let bounds = raw
                .bounds
                .as_ref()
                .ok_or_else(|| schema("an inline [model] needs a [bounds] section"))?;
            Model {
                name: raw.name.clone().unwrap_or_else(|| "inline".into()),
                domain: DomainSpec::from_sides(1.0, 1.0, Region::Wall, Region::Cathode, Region::Wall, Region::Anode),
                ledger: ledger(bounds, coeffs.ell),
                coeffs,
                state_box: Vec::new(),
                exact,
                defaults: ModelDefaults {
                    nx: 16,
                    ny: 16,
                    final_time: 1.0,
                    steps: 32,
                },
            }
        }
        (None, None) => return Err(schema("give either `preset` or an inline [model]")),
    };
    if raw.preset.is_some() {
        if let Some(bounds) = &raw.bounds {
            model.ledger = ledger(bounds, model.coeffs.ell);
        }
    }
    if let Some(name) = &raw.name {
        model.name = name.clone();
    }
    if let Some(d) = &raw.domain {
        model.domain = domain(&lines, d)?;
    }
    model.coeffs.validate().map_err(|e| schema(format!("[model]: {e}")))?;
    model.ledger.validate().map_err(|e| schema(format!("[bounds]: {e}")))?;

    let d = model.defaults;
    let mesh = raw.mesh.as_ref();
    let (nx, ny) = (
        mesh.and_then(|m| m.nx).unwrap_or(d.nx),
        mesh.and_then(|m| m.ny).unwrap_or(d.ny),
    );
    if nx == 0 || ny == 0 {
        return Err(schema("[mesh]: nx and ny must be at least 1"));
    }

    let time = raw.time.as_ref();
    let final_time = time.and_then(|t| t.final_time.as_ref());
    let steps = time.and_then(|t| t.steps.as_ref());
    let t = final_time.map_or(d.final_time, |s| *s.get_ref());
    let m = steps.map_or(d.steps, |s| *s.get_ref());
    if !(t > 0.0 && t.is_finite()) {
        let line = final_time.and_then(|s| lines.at(s));
        return Err(CliError::Schema {
            line,
            message: format!("final_time must be positive, got {t}"),
        });
    }
    if m as f64 <= t {
        let line = steps
            .and_then(|s| lines.at(s))
            .or_else(|| final_time.and_then(|s| lines.at(s)));
        return Err(CliError::StepCountTooSmall {
            line,
            steps: m,
            final_time: t,
        });
    }
    let mut picard = PicardConfig::default();
    if let Some(p) = &raw.picard {
        picard.tol = p.tol.unwrap_or(picard.tol);
        picard.max_iter = p.max_iter.unwrap_or(picard.max_iter);
        picard.damping = p.damping.unwrap_or(picard.damping);
    }
    let rothe = RotheConfig {
        final_time: t,
        steps: m,
        picard,
        enforce_smallness: true,
    };
    rothe.validate().map_err(|e| schema(format!("[picard]: {e}")))?;

    let overrides = raw
        .constants
        .as_ref()
        .map_or(ConstantOverrides::default(), |c| ConstantOverrides {
            k2: c.k2,
            p2: c.p2,
        });
    for (name, v) in [("k2", overrides.k2), ("p2", overrides.p2)] {
        if v.is_some_and(|v| !(v > 0.0 && v.is_finite())) {
            return Err(schema(format!("[constants]: {name} must be positive")));
        }
    }
    let mut output = OutputConfig::default();
    if let Some(o) = &raw.output {
        output.csv = o.csv.clone().unwrap_or(output.csv);
        output.report = o.report.clone().unwrap_or(output.report);
        output.vtk_stride = o.vtk_stride.unwrap_or(0);
    }

    Ok(ScenarioConfig {
        name: model.name.clone(),
        model,
        nx,
        ny,
        rothe,
        overrides,
        output,
    })
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}
