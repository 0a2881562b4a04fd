//! Abstract coefficient model, its bounds ledger, coercivity constants and
//! smallness checks, and the thermoelectrochemical instantiation.

mod presets;
mod tec;
mod validate;

use std::fmt;
use std::sync::Arc;

pub use presets::{preset, preset_names, Model, ModelDefaults};
pub use tec::{
    tec_smallness, tec_to_abstract, TecBounds, TecParams, TecSpecies, TecSpeciesBounds, FARADAY, GAS_CONSTANT,
    STEFAN_BOLTZMANN,
};
pub use validate::{validate_bounds, BoundsReport, Violation};

use crate::mesh::{Point, Region};
use crate::{Error, Result};

pub type StateFn = dyn Fn(Point, &[f64]) -> f64 + Send + Sync;
pub type PointScalarFn = dyn Fn(Point, f64) -> f64 + Send + Sync;
pub type SpaceFn = dyn Fn(Point) -> f64 + Send + Sync;

/// Coefficient depending on position and the vector of all non-potential
/// unknowns.
#[derive(Clone)]
pub enum StateCoef {
    Const(f64),
    Func(Arc<StateFn>),
}

/// Coefficient depending on position and one scalar (a state value or time).
#[derive(Clone)]
pub enum ScalarCoef {
    Const(f64),
    Func(Arc<PointScalarFn>),
}

/// Function of position only.
#[derive(Clone)]
pub enum SpaceCoef {
    Const(f64),
    Func(Arc<SpaceFn>),
}

impl StateCoef {
    pub fn func(f: impl Fn(Point, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        StateCoef::Func(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, p: Point, e: &[f64]) -> f64 {
        match self {
            StateCoef::Const(c) => *c,
            StateCoef::Func(f) => f(p, e),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, StateCoef::Const(c) if *c == 0.0)
    }
}

impl ScalarCoef {
    pub fn func(f: impl Fn(Point, f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarCoef::Func(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, p: Point, s: f64) -> f64 {
        match self {
            ScalarCoef::Const(c) => *c,
            ScalarCoef::Func(f) => f(p, s),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarCoef::Const(c) if *c == 0.0)
    }
}

impl SpaceCoef {
    pub fn func(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        SpaceCoef::Func(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, p: Point) -> f64 {
        match self {
            SpaceCoef::Const(c) => *c,
            SpaceCoef::Func(f) => f(p),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SpaceCoef::Const(c) if *c == 0.0)
    }
}

macro_rules! debug_coef {
    ($t:ty) => {
        impl fmt::Debug for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                match self {
                    Self::Const(c) => write!(f, "Const({c})"),
                    Self::Func(_) => f.write_str("Func(..)"),
                }
            }
        }
    };
}
debug_coef!(StateCoef);
debug_coef!(ScalarCoef);
debug_coef!(SpaceCoef);

/// Boundary data of (point, time), one optional function per region.
/// Regions without data contribute zero.
#[derive(Clone, Debug, Default)]
pub struct BoundaryData {
    by_region: [Option<ScalarCoef>; 4],
}

impl BoundaryData {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn on(mut self, region: Region, data: ScalarCoef) -> Self {
        self.by_region[region.index()] = Some(data);
        self
    }

    pub fn set(&mut self, region: Region, data: Option<ScalarCoef>) {
        self.by_region[region.index()] = data;
    }

    pub fn get(&self, region: Region) -> Option<&ScalarCoef> {
        self.by_region[region.index()].as_ref()
    }

    #[inline]
    pub fn eval(&self, region: Region, p: Point, t: f64) -> f64 {
        self.get(region).map_or(0.0, |d| d.eval(p, t))
    }

    /// True when no region carries data, or all data are the constant zero.
    pub fn is_zero(&self) -> bool {
        self.by_region
            .iter()
            .all(|d| d.as_ref().is_none_or(ScalarCoef::is_zero))
    }

    pub fn is_zero_on(&self, region: Region) -> bool {
        self.get(region).is_none_or(ScalarCoef::is_zero)
    }
}

/// The coefficient functions of the abstract system. Index `I` (the last
/// of the `I + 1` state unknowns) is the temperature-like unknown.
#[derive(Clone, Debug)]
pub struct CoefficientSet {
    pub species: usize,
    /// `(I+1) x (I+1)` diffusion matrix; row `i` multiplies `∇v_i`.
    pub a: Vec<Vec<StateCoef>>,
    /// Coefficients of `∇φ` in the fluxes of the state unknowns.
    pub f: Vec<StateCoef>,
    /// Coefficients of `∇u_j` in the current.
    pub g: Vec<StateCoef>,
    pub sigma: StateCoef,
    /// Kirchhoff weight of (point, temperature).
    pub b: ScalarCoef,
    /// Boundary coefficient on the electrodes (exponent 2).
    pub gamma_electrode: ScalarCoef,
    /// Boundary coefficient on the wall (exponent `ell`).
    pub gamma_wall: ScalarCoef,
    pub ell: f64,
    /// Boundary flux data for each state unknown.
    pub h: Vec<BoundaryData>,
    pub current_anode: SpaceCoef,
    pub current_cathode: SpaceCoef,
    pub initial: Vec<SpaceCoef>,
}

impl CoefficientSet {
    /// Zero cross couplings, unit diagonal and conductivity, `b = 1`,
    /// unit Robin coefficients, zero data.
    pub fn decoupled(species: usize) -> Self {
        let n = species + 1;
        CoefficientSet {
            species,
            a: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| StateCoef::Const(if i == j { 1.0 } else { 0.0 }))
                        .collect()
                })
                .collect(),
            f: vec![StateCoef::Const(0.0); n],
            g: vec![StateCoef::Const(0.0); n],
            sigma: StateCoef::Const(1.0),
            b: ScalarCoef::Const(1.0),
            gamma_electrode: ScalarCoef::Const(1.0),
            gamma_wall: ScalarCoef::Const(1.0),
            ell: 2.0,
            h: vec![BoundaryData::zero(); n],
            current_anode: SpaceCoef::Const(0.0),
            current_cathode: SpaceCoef::Const(0.0),
            initial: vec![SpaceCoef::Const(0.0); n],
        }
    }

    /// Number of state unknowns `I + 1` (the potential excluded).
    pub fn num_state(&self) -> usize {
        self.species + 1
    }

    pub fn temperature(&self) -> usize {
        self.species
    }

    /// Boundary coefficient and exponent for a region; the outer region
    /// carries no boundary term.
    pub fn gamma(&self, region: Region) -> Option<(&ScalarCoef, f64)> {
        match region {
            Region::Anode | Region::Cathode => Some((&self.gamma_electrode, 2.0)),
            Region::Wall => Some((&self.gamma_wall, self.ell)),
            Region::Outer => None,
        }
    }

    pub fn current(&self, region: Region, p: Point) -> f64 {
        match region {
            Region::Anode => self.current_anode.eval(p),
            Region::Cathode => self.current_cathode.eval(p),
            _ => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_state();
        let bad = |what: &str| Err(Error::InvalidInput(format!("{what} must have {n} entries")));
        if self.a.len() != n || self.a.iter().any(|row| row.len() != n) {
            return bad("diffusion matrix rows and columns");
        }
        if self.f.len() != n {
            return bad("potential coupling list");
        }
        if self.g.len() != n {
            return bad("current coupling list");
        }
        if self.h.len() != n {
            return bad("boundary data list");
        }
        if self.initial.len() != n {
            return bad("initial data list");
        }
        if !(self.ell >= 2.0 && self.ell.is_finite()) {
            return Err(Error::InvalidInput(format!("exponent must be >= 2, got {}", self.ell)));
        }
        Ok(())
    }
}

/// Lower bound, upper bound and offset for a boundary coefficient:
/// `lower |e|^(l-2) <= gamma <= upper |e|^(l-2) + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaBounds {
    pub lower: f64,
    pub upper: f64,
    pub offset: f64,
}

/// Declared bounds of the coefficient functions.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsLedger {
    /// Upper bounds of `|a_ij|`.
    pub a_sharp: Vec<Vec<f64>>,
    /// Lower bounds of the diagonal entries `a_ii`.
    pub a_lower: Vec<f64>,
    pub f_sharp: Vec<f64>,
    pub g_sharp: Vec<f64>,
    pub sigma: (f64, f64),
    pub b: (f64, f64),
    pub gamma_electrode: GammaBounds,
    pub gamma_wall: GammaBounds,
    pub ell: f64,
}

impl BoundsLedger {
    pub fn num_state(&self) -> usize {
        self.a_lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_state();
        let fail = |msg: String| Err(Error::InvalidInput(format!("bounds: {msg}")));
        if n == 0 {
            return fail("at least one state unknown is required".into());
        }
        if self.a_sharp.len() != n || self.a_sharp.iter().any(|r| r.len() != n) {
            return fail(format!("a_sharp must be {n} x {n}"));
        }
        if self.f_sharp.len() != n || self.g_sharp.len() != n {
            return fail(format!("f_sharp and g_sharp need {n} entries"));
        }
        let all = self
            .a_sharp
            .iter()
            .flatten()
            .chain(&self.a_lower)
            .chain(&self.f_sharp)
            .chain(&self.g_sharp)
            .chain([&self.sigma.0, &self.sigma.1, &self.b.0, &self.b.1, &self.ell]);
        for v in all {
            if !v.is_finite() || *v < 0.0 {
                return fail(format!("bounds must be finite and nonnegative, found {v}"));
            }
        }
        if let Some(i) = self.a_lower.iter().position(|&v| v <= 0.0) {
            return fail(format!("diagonal lower bound {} must be positive", i + 1));
        }
        if self.sigma.0 <= 0.0 || self.sigma.1 < self.sigma.0 {
            return fail(format!(
                "conductivity bounds {:?} must satisfy 0 < lower <= upper",
                self.sigma
            ));
        }
        if self.b.0 <= 0.0 || self.b.1 < self.b.0 {
            return fail(format!("b bounds {:?} must satisfy 0 < lower <= upper", self.b));
        }
        for (name, g) in [("electrode", self.gamma_electrode), ("wall", self.gamma_wall)] {
            if !(g.lower > 0.0 && g.upper >= g.lower && g.offset >= 0.0 && g.upper.is_finite() && g.offset.is_finite())
            {
                return fail(format!(
                    "{name} boundary bounds {g:?} must satisfy 0 < lower <= upper, offset >= 0"
                ));
            }
        }
        if self.ell < 2.0 {
            return fail(format!("exponent {} must be >= 2", self.ell));
        }
        Ok(())
    }

    /// Lower bound and exponent of the boundary coefficient on a region.
    pub fn gamma_lower(&self, region: Region) -> Option<(f64, f64)> {
        match region {
            Region::Anode | Region::Cathode => Some((self.gamma_electrode.lower, 2.0)),
            Region::Wall => Some((self.gamma_wall.lower, self.ell)),
            Region::Outer => None,
        }
    }
}

/// Coercivity constants: for a state unknown `j`,
/// `L_j = (a_j)_# - (Σ_{l≠j} (a_lj^# + a_jl^#) + F_j^# + G_j^#) / 2`,
/// and for the potential `L = σ_# - Σ_j (F_j^# + G_j^#) / 2`.
pub fn compute_l_sharp(ledger: &BoundsLedger) -> Vec<f64> {
    let n = ledger.num_state();
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..n {
        let cross: f64 = (0..n)
            .filter(|&l| l != j)
            .map(|l| ledger.a_sharp[l][j] + ledger.a_sharp[j][l])
            .sum();
        out.push(ledger.a_lower[j] - 0.5 * (cross + ledger.f_sharp[j] + ledger.g_sharp[j]));
    }
    let coupling: f64 = (0..n).map(|j| ledger.f_sharp[j] + ledger.g_sharp[j]).sum();
    out.push(ledger.sigma.0 - 0.5 * coupling);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub condition: String,
    pub margin: f64,
    pub pass: bool,
}

impl Verdict {
    pub fn new(condition: impl Into<String>, margin: f64) -> Self {
        Verdict {
            condition: condition.into(),
            margin,
            pass: margin > 0.0,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<28} margin {:>14.6e}  {}",
            self.condition,
            self.margin,
            if self.pass { "pass" } else { "FAIL" }
        )
    }
}

/// Names of the coercivity conditions in unknown order.
pub fn condition_names(species: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=species).map(|i| format!("L{i} (species {i})")).collect();
    names.push(format!("L{} (temperature)", species + 1));
    names.push(format!("L{} (potential)", species + 2));
    names
}

/// One verdict per coercivity constant; a condition passes iff its
/// constant is strictly positive.
pub fn check_smallness(ledger: &BoundsLedger) -> Vec<Verdict> {
    let l = compute_l_sharp(ledger);
    condition_names(ledger.num_state() - 1)
        .into_iter()
        .zip(l)
        .map(|(name, m)| Verdict::new(name, m))
        .collect()
}

/// A constant estimated on the mesh, optionally overridden by the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantEstimate {
    pub mesh: f64,
    pub user: Option<f64>,
}

impl ConstantEstimate {
    pub fn value(&self) -> f64 {
        self.user.unwrap_or(self.mesh)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsReport {
    pub l_sharp: Vec<f64>,
    pub verdicts: Vec<Verdict>,
    pub k2: ConstantEstimate,
    pub p2: ConstantEstimate,
    /// `R` with the constants in effect, when all conditions pass.
    pub r_bound: Option<f64>,
    /// `R` evaluated with the mesh constants when an override is active.
    pub r_bound_mesh: Option<f64>,
    pub multiplier: Option<f64>,
    pub cotaul_rhs: Option<f64>,
    pub notes: Vec<String>,
}

impl ConstantsReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn first_failure(&self) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| !v.pass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn ledger_1(a_lower: f64, cross: f64, f: [f64; 2], g: [f64; 2], sigma: f64) -> BoundsLedger {
        BoundsLedger {
            a_sharp: vec![vec![1.0, cross], vec![cross, 1.0]],
            a_lower: vec![a_lower, 1.0],
            f_sharp: f.to_vec(),
            g_sharp: g.to_vec(),
            sigma: (sigma, sigma),
            b: (1.0, 1.0),
            gamma_electrode: GammaBounds {
                lower: 1.0,
                upper: 1.0,
                offset: 0.0,
            },
            gamma_wall: GammaBounds {
                lower: 1.0,
                upper: 1.0,
                offset: 0.0,
            },
            ell: 2.0,
        }
    }

    #[test]
    fn coercivity_constants_by_hand() {
        let l = compute_l_sharp(&ledger_1(1.0, 0.1, [0.1, 0.0], [0.1, 0.0], 1.0));
        assert!((l[0] - 0.8).abs() < 1e-15);
        let l = compute_l_sharp(&ledger_1(1.0, 0.0, [0.3, 0.3], [0.2, 0.2], 1.0));
        assert!((l[2] - 0.5).abs() < 1e-15);
        let l = compute_l_sharp(&ledger_1(0.7, 0.0, [0.0; 2], [0.0; 2], 2.5));
        assert_eq!(l, vec![0.7, 1.0, 2.5]);
    }

    #[test]
    fn strict_inequality() {
        let v = check_smallness(&ledger_1(1.0, 0.1, [0.1, 0.0], [0.1, 0.0], 1.0));
        assert!(v[0].pass && (v[0].margin - 0.8).abs() < 1e-15);
        let v = check_smallness(&ledger_1(0.2, 0.1, [0.1, 0.0], [0.1, 0.0], 1.0));
        assert!(!v[0].pass);
        assert!(v[0].margin.abs() < 1e-15);
    }
}
