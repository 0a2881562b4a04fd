//! The explicit a priori energy bound, the running energy ledger it is
//! checked against, a per-step discrete energy balance and the
//! time-translate diagnostic.

use std::collections::HashMap;

use crate::coefficients::{
    check_smallness, compute_l_sharp, BoundsLedger, CoefficientSet, ConstantEstimate, ConstantsReport,
};
use crate::fem::quadrature::{GAUSS2, GAUSS4};
use crate::fem::{
    assemble_consistent_mass, assemble_lumped_mass, boundary_lp_norm, boundary_lp_norm_of, estimate_k2, estimate_p2,
    h1_seminorm, l2_norm, Field, SparseMatrix,
};
use crate::mesh::{Mesh, Point, Region};
use crate::scalar_tools::KirchhoffEvaluator;
use crate::stepper::{time_average_data, RotheConfig, StepState, Trajectory};
use crate::{Error, Result};

/// Boundary part carrying the boundary coefficient with one exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPart {
    pub name: &'static str,
    pub regions: Vec<Region>,
    pub ell: f64,
    pub gamma_lower: f64,
}

impl BoundaryPart {
    pub fn ell_conjugate(&self) -> f64 {
        self.ell / (self.ell - 1.0)
    }
}

/// Parts of the boundary with a boundary coefficient: the electrodes with
/// exponent 2 and the wall with the model exponent. Parts of zero length
/// are left out.
pub fn boundary_parts(mesh: &Mesh, ledger: &BoundsLedger) -> Vec<BoundaryPart> {
    let parts = [
        BoundaryPart {
            name: "electrodes",
            regions: Region::ELECTRODES.to_vec(),
            ell: 2.0,
            gamma_lower: ledger.gamma_electrode.lower,
        },
        BoundaryPart {
            name: "wall",
            regions: vec![Region::Wall],
            ell: ledger.ell,
            gamma_lower: ledger.gamma_wall.lower,
        },
    ];
    parts
        .into_iter()
        .filter(|p| mesh.regions_measure(&p.regions) > 0.0)
        .collect()
}

/// Heat data on one boundary part: `∫_0^T ∫ |h|^{ℓ'} ds dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatDataNorm {
    pub part: BoundaryPart,
    pub integral: f64,
}

/// The data norms entering the bound.
#[derive(Debug, Clone, PartialEq)]
pub struct DataNorms {
    /// `‖u_i⁰‖²` per species.
    pub species_initial_sq: Vec<f64>,
    /// `‖u⁰‖²` of the temperature.
    pub temperature_initial_sq: f64,
    /// `‖g‖` over the electrodes.
    pub current_norm: f64,
    /// `‖h_i‖²` over the whole boundary and `(0, T)`.
    pub species_flux_sq: Vec<f64>,
    pub heat: Vec<HeatDataNorm>,
    /// `‖h‖²` of the heat data over the outer boundary and `(0, T)`, which
    /// no term of the bound accounts for.
    pub heat_outer_sq: f64,
}

/// `∫_0^T F(t) dt` by four-point Gauss on each step interval.
fn time_integral(cfg: &RotheConfig, f: impl Fn(f64) -> f64) -> f64 {
    let tau = cfg.tau();
    let mut total = 0.0;
    for m in 0..cfg.steps {
        let start = m as f64 * tau;
        total += tau * GAUSS4.iter().map(|&(s, w)| w * f(start + s * tau)).sum::<f64>();
    }
    total
}

impl DataNorms {
    pub fn compute(mesh: &Mesh, coeffs: &CoefficientSet, ledger: &BoundsLedger, cfg: &RotheConfig) -> Result<Self> {
        coeffs.validate()?;
        let initial: Vec<Field> = coeffs
            .initial
            .iter()
            .map(|f| Field::interpolate(mesh, |p| f.eval(p)))
            .collect();
        let sq = |f: &Field| l2_norm(mesh, f.values()).powi(2);
        let ni = coeffs.species;
        let species_initial_sq = initial[..ni].iter().map(sq).collect();
        let temperature_initial_sq = sq(&initial[ni]);
        let current_norm = boundary_lp_norm_of(mesh, &Region::ELECTRODES, |x, r| coeffs.current(r, x), 2.0);

        let lp_integral = |h: &crate::coefficients::BoundaryData, regions: &[Region], p: f64| {
            time_integral(cfg, |t| {
                boundary_lp_norm_of(mesh, regions, |x, r| h.eval(r, x, t), p).powf(p)
            })
        };
        let species_flux_sq = coeffs.h[..ni]
            .iter()
            .map(|h| {
                if h.is_zero() {
                    0.0
                } else {
                    lp_integral(h, &Region::ALL, 2.0)
                }
            })
            .collect();
        let heat_data = &coeffs.h[ni];
        let heat = boundary_parts(mesh, ledger)
            .into_iter()
            .map(|part| {
                let integral = if part.regions.iter().all(|&r| heat_data.is_zero_on(r)) {
                    0.0
                } else {
                    lp_integral(heat_data, &part.regions, part.ell_conjugate())
                };
                HeatDataNorm { part, integral }
            })
            .collect();
        let heat_outer_sq = if heat_data.is_zero_on(Region::Outer) {
            0.0
        } else {
            lp_integral(heat_data, &[Region::Outer], 2.0)
        };
        Ok(DataNorms {
            species_initial_sq,
            temperature_initial_sq,
            current_norm,
            species_flux_sq,
            heat,
            heat_outer_sq,
        })
    }
}

/// `1 + M/(M - T) e^T`.
pub fn bound_multiplier(final_time: f64, steps: usize) -> Result<f64> {
    let m = steps as f64;
    if steps == 0 || m <= final_time {
        return Err(Error::StepCountTooSmall { steps, final_time });
    }
    Ok(1.0 + m / (m - final_time) * final_time.exp())
}

/// The bound `R`, its terms and the right-hand side `multiplier · R`.
#[derive(Debug, Clone, PartialEq)]
pub struct AprioriBound {
    pub terms: Vec<(String, f64)>,
    pub r: f64,
    pub multiplier: f64,
    pub rhs: f64,
}

/// Evaluates `R` from the data norms, the bounds and the constants.
pub fn compute_r(data: &DataNorms, ledger: &BoundsLedger, k2: f64, p2: f64, cfg: &RotheConfig) -> Result<AprioriBound> {
    for v in check_smallness(ledger) {
        if !v.pass {
            return Err(Error::SmallnessViolated {
                condition: v.condition,
                margin: v.margin,
            });
        }
    }
    let multiplier = bound_multiplier(cfg.final_time, cfg.steps)?;
    let l = compute_l_sharp(ledger);
    let ni = data.species_initial_sq.len();
    let mut terms = vec![
        (
            "initial species".to_string(),
            data.species_initial_sq.iter().sum::<f64>(),
        ),
        (
            "initial temperature".to_string(),
            2.0 * ledger.b.1 * data.temperature_initial_sq,
        ),
        (
            "boundary current".to_string(),
            cfg.final_time * (k2 * (p2 + 1.0)).powi(2) / l[ni + 1] * data.current_norm.powi(2),
        ),
        (
            "species flux".to_string(),
            k2 * k2
                * (0..ni)
                    .map(|i| (1.0 + 1.0 / l[i]) * data.species_flux_sq[i])
                    .sum::<f64>(),
        ),
    ];
    for h in &data.heat {
        let p = &h.part;
        let coef = 1.0 / (p.ell_conjugate() * p.gamma_lower.powf(1.0 / (p.ell - 1.0)));
        terms.push((format!("heat flux ({})", p.name), coef * h.integral));
    }
    let r: f64 = terms.iter().map(|t| t.1).sum();
    Ok(AprioriBound {
        terms,
        r,
        multiplier,
        rhs: multiplier * r,
    })
}

/// User overrides of the mesh-estimated constants.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConstantOverrides {
    pub k2: Option<f64>,
    pub p2: Option<f64>,
}

/// Coercivity constants, verdicts, trace and Poincaré constants and the
/// bound with its right-hand side.
pub fn constants_report(
    mesh: &Mesh,
    coeffs: &CoefficientSet,
    ledger: &BoundsLedger,
    cfg: &RotheConfig,
    overrides: ConstantOverrides,
) -> Result<ConstantsReport> {
    ledger.validate()?;
    let l_sharp = compute_l_sharp(ledger);
    let verdicts = check_smallness(ledger);
    let k2 = ConstantEstimate {
        mesh: estimate_k2(mesh, &Region::ALL)?,
        user: overrides.k2,
    };
    let p2 = ConstantEstimate {
        mesh: estimate_p2(mesh)?,
        user: overrides.p2,
    };
    let data = DataNorms::compute(mesh, coeffs, ledger, cfg)?;
    let mut notes = vec![
        "boundary current norm taken over the electrodes (anode and cathode)".to_string(),
        "the outer boundary carries no boundary coefficient and is excluded from its lower-bound check".to_string(),
        "boundary energy term summed over electrodes and wall, each with its own exponent and lower bound".to_string(),
        "species energy term read as squared L2 norms".to_string(),
    ];
    if overrides.k2.is_none() || overrides.p2.is_none() {
        notes.push("mesh-estimated constants can understate the continuum constants on coarse meshes".to_string());
    }
    if data.heat_outer_sq > 0.0 {
        notes.push(format!(
            "heat data on the outer boundary (squared norm {:e}) is not covered by the bound",
            data.heat_outer_sq
        ));
    }
    let all_pass = verdicts.iter().all(|v| v.pass);
    let (mut r_bound, mut r_bound_mesh, mut multiplier, mut cotaul_rhs) = (None, None, None, None);
    if all_pass {
        let b = compute_r(&data, ledger, k2.value(), p2.value(), cfg)?;
        r_bound = Some(b.r);
        multiplier = Some(b.multiplier);
        cotaul_rhs = Some(b.rhs);
        if overrides.k2.is_some() || overrides.p2.is_some() {
            r_bound_mesh = Some(compute_r(&data, ledger, k2.mesh, p2.mesh, cfg)?.r);
        }
    }
    Ok(ConstantsReport {
        l_sharp,
        verdicts,
        k2,
        p2,
        r_bound,
        r_bound_mesh,
        multiplier,
        cotaul_rhs,
        notes,
    })
}

/// Running left-hand side terms after step `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyRow {
    pub m: usize,
    pub time: f64,
    /// Running maximum of the species energy plus twice the integral of `Ψ`.
    pub s1: f64,
    /// Cumulative species gradient term.
    pub s2: f64,
    /// Cumulative temperature gradient term.
    pub s3: f64,
    /// Cumulative potential gradient term.
    pub s4: f64,
    /// Cumulative boundary term.
    pub s5: f64,
    /// Right side minus left side of the discrete energy balance of the
    /// step, relative to the larger side.
    pub balance_margin: f64,
}

impl EnergyRow {
    pub fn lhs(&self) -> f64 {
        self.s1 + self.s2 + self.s3 + self.s4 + self.s5
    }
}

/// Two-point Gauss sum over the edges of `regions`, matching the boundary
/// assembly rule. `f` receives the point, the region and the barycentric
/// weights of the two edge vertices.
fn gauss2_sum(mesh: &Mesh, regions: &[Region], mut f: impl FnMut(Point, Region, [usize; 2], f64) -> f64) -> f64 {
    let mut sum = 0.0;
    for edge in mesh.boundary_edges().iter().filter(|e| regions.contains(&e.region)) {
        let [a, b] = edge.vertices;
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let len = mesh.edge_length(edge);
        for &(s, w) in &GAUSS2 {
            let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            sum += w * len * f(x, edge.region, [a, b], s);
        }
    }
    sum
}

fn trace(u: &[f64], v: [usize; 2], s: f64) -> f64 {
    (1.0 - s) * u[v[0]] + s * u[v[1]]
}

/// Accumulates the left-hand side of the energy bound step by step. The
/// integral of `Ψ` uses the lumped mass and is updated by increments.
pub struct EnergyLedger<'a> {
    mesh: &'a Mesh,
    coeffs: &'a CoefficientSet,
    l_sharp: Vec<f64>,
    parts: Vec<BoundaryPart>,
    tau: f64,
    kirchhoff: KirchhoffEvaluator,
    mass: SparseMatrix,
    lumped: Vec<f64>,
    psi: Vec<f64>,
    s1_max: f64,
    sums: [f64; 4],
    rows: Vec<EnergyRow>,
}

impl<'a> EnergyLedger<'a> {
    pub fn new(
        mesh: &'a Mesh,
        coeffs: &'a CoefficientSet,
        ledger: &BoundsLedger,
        cfg: &RotheConfig,
        initial: &StepState,
    ) -> Self {
        let kirchhoff = KirchhoffEvaluator::new(coeffs.b.clone(), ledger.b.0, ledger.b.1);
        let temp = initial.temperature().values();
        let psi = mesh
            .vertices()
            .iter()
            .zip(temp)
            .map(|(p, &u)| kirchhoff.psi(*p, u))
            .collect();
        EnergyLedger {
            mesh,
            coeffs,
            l_sharp: compute_l_sharp(ledger),
            parts: boundary_parts(mesh, ledger),
            tau: cfg.tau(),
            kirchhoff,
            mass: assemble_consistent_mass(mesh),
            lumped: assemble_lumped_mass(mesh),
            psi,
            s1_max: f64::NEG_INFINITY,
            sums: [0.0; 4],
            rows: Vec::new(),
        }
    }

    pub fn rows(&self) -> &[EnergyRow] {
        &self.rows
    }

    /// Species energy plus twice the lumped integral of `Ψ` at the current
    /// level.
    pub fn current_energy(&self, state: &StepState) -> f64 {
        let species: f64 = (0..self.coeffs.species)
            .map(|i| l2_norm(self.mesh, state.species(i).values()).powi(2))
            .sum();
        species + 2.0 * self.lumped.iter().zip(&self.psi).map(|(w, p)| w * p).sum::<f64>()
    }

    /// Adds step `cur` (following `prev`) and returns its row.
    pub fn push(&mut self, prev: &StepState, cur: &StepState) -> Result<&EnergyRow> {
        if cur.m != prev.m + 1 || cur.m != self.rows.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "energy ledger expected step {}, got {}",
                self.rows.len() + 1,
                cur.m
            )));
        }
        let ni = self.coeffs.species;
        let (u_old, u) = (prev.temperature().values(), cur.temperature().values());
        for (v, p) in self.mesh.vertices().iter().enumerate() {
            self.psi[v] += self.kirchhoff.psi_increment(*p, u_old[v], u[v]);
        }
        let energy = self.current_energy(cur);
        self.s1_max = self.s1_max.max(energy);

        let grad_sq: Vec<f64> = cur
            .fields
            .iter()
            .map(|f| h1_seminorm(self.mesh, f.values()).powi(2))
            .collect();
        let species_grad: f64 = (0..ni).map(|i| self.l_sharp[i] * grad_sq[i]).sum();
        let boundary: f64 = self
            .parts
            .iter()
            .map(|p| {
                2.0 * p.gamma_lower / p.ell_conjugate() * boundary_lp_norm(self.mesh, &p.regions, u, p.ell).powf(p.ell)
            })
            .sum();
        self.sums[0] += self.tau * species_grad;
        self.sums[1] += self.tau * self.l_sharp[ni] * grad_sq[ni];
        self.sums[2] += self.tau * self.l_sharp[ni + 1] * grad_sq[ni + 1];
        self.sums[3] += self.tau * boundary;

        let balance_margin = self.balance(prev, cur, &grad_sq);
        self.rows.push(EnergyRow {
            m: cur.m,
            time: cur.time,
            s1: self.s1_max,
            s2: self.sums[0],
            s3: self.sums[1],
            s4: self.sums[2],
            s5: self.sums[3],
            balance_margin,
        });
        Ok(self.rows.last().expect("just pushed"))
    }

    /// Tests the discrete equations of the step with the solution itself
    /// and bounds the result from both sides; returns the relative margin.
    fn balance(&self, prev: &StepState, cur: &StepState, grad_sq: &[f64]) -> f64 {
        let ni = self.coeffs.species;
        let mesh = self.mesh;
        let tau = self.tau;
        let mut lhs = 0.0;
        for i in 0..ni {
            let (a, b) = (prev.species(i).values(), cur.species(i).values());
            let diff: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
            lhs += self.mass.bilinear(&diff, b) / tau;
        }
        let (u_old, u) = (prev.temperature().values(), cur.temperature().values());
        for (v, p) in mesh.vertices().iter().enumerate() {
            lhs += self.lumped[v] * self.kirchhoff.increment(*p, u_old[v], u[v]) * u[v] / tau;
        }
        lhs += (0..=ni + 1).map(|j| self.l_sharp[j] * grad_sq[j]).sum::<f64>();
        for p in &self.parts {
            lhs += p.gamma_lower * gauss2_sum(mesh, &p.regions, |_, _, v, s| trace(u, v, s).abs().powf(p.ell));
        }

        let m = cur.m;
        let mut rhs = 0.0;
        let norm = |regions: &[Region], f: &dyn Fn(Point, Region, [usize; 2], f64) -> f64, q: f64| {
            gauss2_sum(mesh, regions, |x, r, v, s| f(x, r, v, s).abs().powf(q)).powf(1.0 / q)
        };
        for i in 0..ni {
            let h = &self.coeffs.h[i];
            if h.is_zero() {
                continue;
            }
            let ui = cur.species(i).values();
            let hbar =
                |x: Point, r: Region, _: [usize; 2], _: f64| time_average_data(|p, t| h.eval(r, p, t), m, tau)(x);
            rhs += norm(&Region::ALL, &hbar, 2.0) * norm(&Region::ALL, &|_, _, v, s| trace(ui, v, s), 2.0);
        }
        let heat = &self.coeffs.h[ni];
        let hbar = |x: Point, r: Region, _: [usize; 2], _: f64| time_average_data(|p, t| heat.eval(r, p, t), m, tau)(x);
        for p in &self.parts {
            rhs += norm(&p.regions, &hbar, p.ell_conjugate()) * norm(&p.regions, &|_, _, v, s| trace(u, v, s), p.ell);
        }
        if !heat.is_zero_on(Region::Outer) {
            rhs += norm(&[Region::Outer], &hbar, 2.0) * norm(&[Region::Outer], &|_, _, v, s| trace(u, v, s), 2.0);
        }
        let phi = cur.potential().values();
        let g = |x: Point, r: Region, _: [usize; 2], _: f64| self.coeffs.current(r, x);
        rhs += norm(&Region::ELECTRODES, &g, 2.0) * norm(&Region::ELECTRODES, &|_, _, v, s| trace(phi, v, s), 2.0);
        // Gauge multipliers times the conserved species integrals.
        for i in 0..ni.min(cur.multipliers.len()) {
            let integral: f64 = self
                .lumped
                .iter()
                .zip(cur.species(i).values())
                .map(|(w, x)| w * x)
                .sum();
            rhs += (cur.multipliers[i] * integral).abs();
        }
        let scale = lhs.abs().max(rhs.abs());
        if scale > 0.0 {
            (rhs - lhs) / scale
        } else {
            0.0
        }
    }
}

/// Outcome of comparing the energy ledger with the bound.
#[derive(Debug, Clone, PartialEq)]
pub struct CotaulVerdict {
    pub pass: bool,
    /// First step whose left side exceeds the right side.
    pub first_violation: Option<usize>,
    /// `rhs - lhs` per step.
    pub margins: Vec<f64>,
}

pub fn verify_cotaul(rows: &[EnergyRow], bound: &AprioriBound) -> CotaulVerdict {
    let margins: Vec<f64> = rows.iter().map(|r| bound.rhs - r.lhs()).collect();
    let first_violation = rows.iter().zip(&margins).find(|(_, m)| !(**m >= 0.0)).map(|(r, _)| r.m);
    CotaulVerdict {
        pass: first_violation.is_none(),
        first_violation,
        margins,
    }
}

/// `∫_0^{T-z} ∫ (B(u(t+z)) - B(u(t))) (u(t+z) - u(t)) dx dt` for the
/// piecewise-constant temperature, with the lumped mass in space. The time
/// integral is exact: the integrand is constant between the breakpoints
/// `kτ` and `kτ - z`.
pub fn translate_estimate(traj: &Trajectory, mesh: &Mesh, kirchhoff: &KirchhoffEvaluator, z: f64) -> Result<f64> {
    let steps = traj.steps();
    let (tau, t_end) = (traj.tau, traj.final_time);
    if steps == 0 {
        return Err(Error::InvalidInput("trajectory has no steps".into()));
    }
    if !(z > 0.0 && z < t_end) {
        return Err(Error::InvalidInput(format!("translation {z} must lie in (0, {t_end})")));
    }
    let limit = t_end - z;
    let eps = 1e-12 * t_end;
    let mut cuts: Vec<f64> = vec![0.0, limit];
    for k in 1..=steps {
        for c in [k as f64 * tau, k as f64 * tau - z] {
            if c > eps && c < limit - eps {
                cuts.push(c);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= eps);

    let lumped = assemble_lumped_mass(mesh);
    let level = |t: f64| ((t / tau).floor() as usize + 1).clamp(1, steps);
    let mut cache: HashMap<(usize, usize), f64> = HashMap::new();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        let key = (level(mid), level(mid + z));
        let pair = *cache.entry(key).or_insert_with(|| {
            let a = traj.states[key.0].temperature().values();
            let b = traj.states[key.1].temperature().values();
            mesh.vertices()
                .iter()
                .enumerate()
                .map(|(v, p)| lumped[v] * kirchhoff.increment(*p, a[v], b[v]) * (b[v] - a[v]))
                .sum()
        });
        total += len * pair;
    }
    Ok(total)
}
