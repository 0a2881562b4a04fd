//! Kirchhoff transform `B(v) = ∫_0^v b(x, z) dz`, the potential
//! `Ψ(s) = B(s) s - ∫_0^s B(r) dr`, their monotonicity inequalities and the
//! discrete Gronwall bound.

use crate::coefficients::ScalarCoef;
use crate::fem::quadrature::composite_gauss8;
use crate::mesh::Point;
use crate::{Error, Result};

/// Evaluates `B` and `Ψ` by composite eight-point Gauss quadrature with one
/// panel per unit of integration length.
#[derive(Debug, Clone)]
pub struct KirchhoffEvaluator {
    b: ScalarCoef,
    lower: f64,
    upper: f64,
}

impl KirchhoffEvaluator {
    /// `lower` and `upper` are the declared bounds of `b`.
    pub fn new(b: ScalarCoef, lower: f64, upper: f64) -> Self {
        KirchhoffEvaluator { b, lower, upper }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn weight(&self, p: Point, z: f64) -> f64 {
        self.b.eval(p, z)
    }

    /// True when `b` does not depend on the state, so `B(v) = b v`.
    fn constant(&self) -> Option<f64> {
        match self.b {
            ScalarCoef::Const(c) => Some(c),
            ScalarCoef::Func(_) => None,
        }
    }

    pub fn b_transform(&self, p: Point, v: f64) -> f64 {
        self.increment(p, 0.0, v)
    }

    /// `B(to) - B(from)`.
    pub fn increment(&self, p: Point, from: f64, to: f64) -> f64 {
        if let Some(c) = self.constant() {
            return c * (to - from);
        }
        composite_gauss8(from, to, |z| self.b.eval(p, z))
    }

    /// `Ψ(s)`, evaluated through the equivalent form `∫_0^s z b(z) dz`.
    pub fn psi(&self, p: Point, s: f64) -> f64 {
        self.psi_increment(p, 0.0, s)
    }

    /// `Ψ(to) - Ψ(from) = ∫_from^to z b(z) dz`.
    pub fn psi_increment(&self, p: Point, from: f64, to: f64) -> f64 {
        if let Some(c) = self.constant() {
            return 0.5 * c * (to * to - from * from);
        }
        composite_gauss8(from, to, |z| z * self.b.eval(p, z))
    }

    /// `Ψ(s)` straight from its definition, with nested quadrature for
    /// `∫_0^s B`. Slower than [`Self::psi`]; kept for cross-checks.
    pub fn psi_by_definition(&self, p: Point, s: f64) -> f64 {
        let integral_of_b = composite_gauss8(0.0, s, |r| self.b_transform(p, r));
        self.b_transform(p, s) * s - integral_of_b
    }
}

pub fn kirchhoff(eval: &KirchhoffEvaluator, p: Point, v: f64) -> f64 {
    eval.b_transform(p, v)
}

pub fn psi(eval: &KirchhoffEvaluator, p: Point, s: f64) -> f64 {
    eval.psi(p, s)
}

/// `(B(u) - B(v)) u - (Ψ(u) - Ψ(v))`, nonnegative for positive `b`.
pub fn check_bpsi(eval: &KirchhoffEvaluator, p: Point, u: f64, v: f64) -> f64 {
    (eval.b_transform(p, u) - eval.b_transform(p, v)) * u - (eval.psi(p, u) - eval.psi(p, v))
}

/// `(B(u) - B(v))(u - v) - b_# (u - v)^2`, nonnegative when `b >= b_#`.
pub fn check_bb(eval: &KirchhoffEvaluator, p: Point, u: f64, v: f64) -> f64 {
    let d = u - v;
    (eval.b_transform(p, u) - eval.b_transform(p, v)) * d - eval.lower * d * d
}

/// The bound `A_m / (1 - τL) · exp((m - 1) τ)` for nonnegative sequences
/// with `a_m <= A_m + τ L Σ_{j<=m} a_j`. `a` holds `A_1, A_2, ...` and must
/// be nondecreasing; `m` is 1-based.
pub fn discrete_gronwall(a: &[f64], l: f64, tau: f64, m: usize) -> Result<f64> {
    let tau_l = tau * l;
    if !(tau_l < 1.0) {
        return Err(Error::StepTooLarge { tau_l });
    }
    if !(tau > 0.0 && l >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need tau > 0 and L >= 0, got tau = {tau}, L = {l}"
        )));
    }
    if m == 0 || m > a.len() {
        return Err(Error::InvalidInput(format!("index {m} outside 1..={}", a.len())));
    }
    if a[..m].windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("sequence A must be nondecreasing".into()));
    }
    Ok(a[m - 1] / (1.0 - tau_l) * ((m - 1) as f64 * tau).exp())
}

/// Bound from the same hypothesis with the exponent `(m - 1) τL / (1 - τL)`,
/// which dominates the exact solution `A / (1 - τL)^m` of the extremal
/// recursion for every `τL < 1`.
pub fn discrete_gronwall_sharp(a: &[f64], l: f64, tau: f64, m: usize) -> Result<f64> {
    let tau_l = tau * l;
    let base = discrete_gronwall(a, l, tau, m)?;
    Ok(base * ((m - 1) as f64 * (tau_l / (1.0 - tau_l) - tau)).exp())
}
