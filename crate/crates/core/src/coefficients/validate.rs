use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BoundsLedger, CoefficientSet, GammaBounds, ScalarCoef};
use crate::mesh::{Mesh, Point, Region};
use crate::{Error, Result};

const REL_TOL: f64 = 1e-12;
const MAX_RECORDED: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub quantity: String,
    pub point: Point,
    pub state: Vec<f64>,
    pub value: f64,
    pub bound: f64,
    pub below: bool,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} = {} {} bound {} at x = ({}, {}), state = {:?}",
            self.quantity,
            self.value,
            if self.below { "below lower" } else { "above upper" },
            self.bound,
            self.point[0],
            self.point[1],
            self.state
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub samples: usize,
    /// Total number of violated checks.
    pub count: usize,
    /// The first violations found, with witnesses.
    pub violations: Vec<Violation>,
}

impl BoundsReport {
    pub fn is_clean(&self) -> bool {
        self.count == 0
    }
}

struct Recorder {
    count: usize,
    violations: Vec<Violation>,
}

impl Recorder {
    fn check(
        &mut self,
        quantity: impl Fn() -> String,
        p: Point,
        state: &[f64],
        value: f64,
        lower: Option<f64>,
        upper: Option<f64>,
    ) {
        let mut record = |bound: f64, below: bool| {
            self.count += 1;
            if self.violations.len() < MAX_RECORDED {
                self.violations.push(Violation {
                    quantity: quantity(),
                    point: p,
                    state: state.to_vec(),
                    value,
                    bound,
                    below,
                });
            }
        };
        if !value.is_finite() {
            record(f64::NAN, false);
            return;
        }
        if let Some(lo) = lower {
            if value < lo - REL_TOL * lo.abs().max(value.abs()) {
                record(lo, true);
                return;
            }
        }
        if let Some(hi) = upper {
            if value > hi + REL_TOL * hi.abs().max(value.abs()) {
                record(hi, false);
            }
        }
    }
}

fn boundary_point(mesh: &Mesh, regions: &[Region], rng: &mut ChaCha8Rng) -> Option<Point> {
    let edges: Vec<_> = mesh
        .boundary_edges()
        .iter()
        .filter(|e| regions.contains(&e.region))
        .collect();
    if edges.is_empty() {
        return None;
    }
    let e = edges[rng.random_range(0..edges.len())];
    let (a, b) = (mesh.vertices()[e.vertices[0]], mesh.vertices()[e.vertices[1]]);
    let s: f64 = rng.random();
    Some([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])])
}

fn check_gamma(rec: &mut Recorder, name: &str, gamma: &ScalarCoef, bounds: GammaBounds, ell: f64, p: Point, e: f64) {
    let power = e.abs().powf(ell - 2.0);
    let value = gamma.eval(p, e);
    rec.check(
        || format!("{name} boundary coefficient"),
        p,
        &[e],
        value,
        Some(bounds.lower * power),
        Some(bounds.upper * power + bounds.offset),
    );
}

/// Samples every coefficient at `samples` pseudo-random (point, state)
/// pairs with states drawn uniformly from `state_box` (one interval per
/// state unknown) and records each violated bound. The sampling sequence is
/// fixed by `seed`.
pub fn validate_bounds(
    coeffs: &CoefficientSet,
    ledger: &BoundsLedger,
    mesh: &Mesh,
    state_box: &[(f64, f64)],
    samples: usize,
    seed: u64,
) -> Result<BoundsReport> {
    let n = coeffs.num_state();
    if samples == 0 {
        return Err(Error::InvalidInput("at least one sample is required".into()));
    }
    if state_box.len() != n || ledger.num_state() != n {
        return Err(Error::InvalidInput(format!("state box and ledger need {n} entries")));
    }
    if state_box
        .iter()
        .any(|(lo, hi)| !(lo <= hi && lo.is_finite() && hi.is_finite()))
    {
        return Err(Error::InvalidInput(
            "state box intervals must be finite with lower <= upper".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder {
        count: 0,
        violations: Vec::new(),
    };
    let mut e = vec![0.0; n];
    let temp = coeffs.temperature();
    for _ in 0..samples {
        let p = [rng.random::<f64>() * mesh.width(), rng.random::<f64>() * mesh.height()];
        for (v, &(lo, hi)) in e.iter_mut().zip(state_box) {
            *v = lo + rng.random::<f64>() * (hi - lo);
        }
        for i in 0..n {
            for j in 0..n {
                let v = coeffs.a[i][j].eval(p, &e);
                let lower = (i == j).then_some(ledger.a_lower[i]);
                rec.check(|| format!("a[{}][{}]", i + 1, j + 1), p, &e, v, lower, None);
                rec.check(
                    || format!("|a[{}][{}]|", i + 1, j + 1),
                    p,
                    &e,
                    v.abs(),
                    None,
                    Some(ledger.a_sharp[i][j]),
                );
            }
            let f = coeffs.f[i].eval(p, &e).abs();
            rec.check(|| format!("|F[{}]|", i + 1), p, &e, f, None, Some(ledger.f_sharp[i]));
            let g = coeffs.g[i].eval(p, &e).abs();
            rec.check(|| format!("|G[{}]|", i + 1), p, &e, g, None, Some(ledger.g_sharp[i]));
        }
        let s = coeffs.sigma.eval(p, &e);
        rec.check(|| "sigma".into(), p, &e, s, Some(ledger.sigma.0), Some(ledger.sigma.1));
        let b = coeffs.b.eval(p, e[temp]);
        rec.check(|| "b".into(), p, &e[temp..=temp], b, Some(ledger.b.0), Some(ledger.b.1));

        let (lo, hi) = state_box[temp];
        if let Some(q) = boundary_point(mesh, &Region::ELECTRODES, &mut rng) {
            let et = lo + rng.random::<f64>() * (hi - lo);
            check_gamma(
                &mut rec,
                "electrode",
                &coeffs.gamma_electrode,
                ledger.gamma_electrode,
                2.0,
                q,
                et,
            );
        }
        if let Some(q) = boundary_point(mesh, &[Region::Wall], &mut rng) {
            let et = lo + rng.random::<f64>() * (hi - lo);
            check_gamma(
                &mut rec,
                "wall",
                &coeffs.gamma_wall,
                ledger.gamma_wall,
                ledger.ell,
                q,
                et,
            );
        }
    }
    Ok(BoundsReport {
        samples,
        count: rec.count,
        violations: rec.violations,
    })
}
