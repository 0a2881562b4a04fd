//! Rothe time stepping. Each step solves the coupled elliptic system for
//! the new state by damped fixed-point iteration: coefficients are frozen
//! at the current iterate, the Kirchhoff term is linearized around it and
//! the (I+2)-block linear system with its gauges is solved.

use crate::coefficients::{check_smallness, BoundsLedger, CoefficientSet, StateCoef};
use crate::fem::quadrature::GAUSS4;
use crate::fem::{
    assemble_boundary_form, assemble_boundary_load, assemble_consistent_mass, assemble_lumped_mass, assemble_stiffness,
    boundary_weights, l2_norm, solve_block, BlockSystem, Field, Gauge, SparseMatrix,
};
use crate::mesh::{Mesh, Point, Region};
use crate::scalar_tools::KirchhoffEvaluator;
use crate::{Error, Result};

/// Smallest damping factor tried before giving up on a step.
pub const MIN_DAMPING: f64 = 1.0 / 16.0;

/// Relative increments above this are treated as divergence.
const BLOWUP: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    /// Threshold on the largest relative L2 increment over all fields.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial damping factor in (0, 1].
    pub damping: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            tol: 1e-9,
            max_iter: 100,
            damping: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotheConfig {
    pub final_time: f64,
    pub steps: usize,
    pub picard: PicardConfig,
    /// Refuse to step when a coercivity constant is not positive.
    pub enforce_smallness: bool,
}

impl RotheConfig {
    pub fn new(final_time: f64, steps: usize) -> Result<Self> {
        let cfg = RotheConfig {
            final_time,
            steps,
            picard: PicardConfig::default(),
            enforce_smallness: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "final time must be positive, got {}",
                self.final_time
            )));
        }
        if self.steps == 0 || self.steps as f64 <= self.final_time {
            return Err(Error::StepCountTooSmall {
                steps: self.steps,
                final_time: self.final_time,
            });
        }
        let p = &self.picard;
        if !(p.tol > 0.0) || p.max_iter == 0 || !(p.damping > 0.0 && p.damping <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "fixed-point settings need tol > 0, max_iter >= 1 and damping in (0, 1], got {p:?}"
            )));
        }
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        self.final_time / self.steps as f64
    }

    pub fn time(&self, m: usize) -> f64 {
        m as f64 * self.final_time / self.steps as f64
    }
}

/// Discrete solution at one time level. `fields` holds the species, the
/// temperature and the potential, in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct StepState {
    pub m: usize,
    pub time: f64,
    pub fields: Vec<Field>,
    pub picard_iters: usize,
    pub increment_history: Vec<f64>,
    /// Damping factor of the attempt that converged.
    pub damping: f64,
    /// Relative residual of the nonlinear equations at the returned state.
    pub residual: f64,
    pub multipliers: Vec<f64>,
}

impl StepState {
    pub fn species(&self, i: usize) -> &Field {
        &self.fields[i]
    }

    pub fn temperature(&self) -> &Field {
        &self.fields[self.fields.len() - 2]
    }

    pub fn potential(&self) -> &Field {
        &self.fields[self.fields.len() - 1]
    }

    /// Species and temperature.
    pub fn state_fields(&self) -> &[Field] {
        &self.fields[..self.fields.len() - 1]
    }
}

/// The Rothe sequence, initial state included. Step `m` represents the
/// solution on `]t_{m-1}, t_m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<StepState>,
    pub tau: f64,
    pub final_time: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn last(&self) -> &StepState {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// `(1/τ) ∫_{(m-1)τ}^{mτ} h(x, s) ds` by four-point Gauss in time.
pub fn time_average_data<'a>(h: impl Fn(Point, f64) -> f64 + 'a, m: usize, tau: f64) -> impl Fn(Point) -> f64 + 'a {
    let start = (m as f64 - 1.0) * tau;
    move |x| GAUSS4.iter().map(|&(s, w)| w * h(x, start + s * tau)).sum()
}

enum Attempt {
    Converged(StepState),
    Diverged { iterations: usize, increment: f64 },
}

/// Stepper bound to one mesh and coefficient set. Matrices that do not
/// depend on the state are assembled once.
pub struct RotheSolver<'a> {
    mesh: &'a Mesh,
    coeffs: &'a CoefficientSet,
    cfg: RotheConfig,
    kirchhoff: KirchhoffEvaluator,
    mass: SparseMatrix,
    lumped: Vec<f64>,
    laplace: SparseMatrix,
    boundary_gauge: Vec<f64>,
    current_load: Vec<f64>,
}

impl<'a> RotheSolver<'a> {
    pub fn new(mesh: &'a Mesh, coeffs: &'a CoefficientSet, ledger: &BoundsLedger, cfg: RotheConfig) -> Result<Self> {
        cfg.validate()?;
        coeffs.validate()?;
        ledger.validate()?;
        if ledger.num_state() != coeffs.num_state() {
            return Err(Error::InvalidInput(format!(
                "bounds describe {} state unknowns, coefficients {}",
                ledger.num_state(),
                coeffs.num_state()
            )));
        }
        if cfg.enforce_smallness {
            if let Some(v) = check_smallness(ledger).into_iter().find(|v| !v.pass) {
                return Err(Error::SmallnessViolated {
                    condition: v.condition,
                    margin: v.margin,
                });
            }
        }
        let current_load = assemble_boundary_load(mesh, &Region::ELECTRODES, |x, r| coeffs.current(r, x)).into_values();
        Ok(RotheSolver {
            mesh,
            coeffs,
            cfg,
            kirchhoff: KirchhoffEvaluator::new(coeffs.b.clone(), ledger.b.0, ledger.b.1),
            mass: assemble_consistent_mass(mesh),
            lumped: assemble_lumped_mass(mesh),
            laplace: assemble_stiffness(mesh, |_, _| 1.0, &[])?,
            boundary_gauge: boundary_weights(mesh, &Region::ALL),
            current_load,
        })
    }

    pub fn config(&self) -> &RotheConfig {
        &self.cfg
    }

    pub fn kirchhoff(&self) -> &KirchhoffEvaluator {
        &self.kirchhoff
    }

    fn stiffness(&self, coef: &StateCoef, state: &[&[f64]]) -> Result<Option<SparseMatrix>> {
        Ok(match coef {
            StateCoef::Const(c) if *c == 0.0 => None,
            StateCoef::Const(c) => Some(self.laplace.scaled(*c)),
            StateCoef::Func(f) => Some(assemble_stiffness(self.mesh, |p, e| f(p, e), state)?),
        })
    }

    /// Potential block row: conductivity, current couplings, current load
    /// and the boundary-mean gauge.
    fn add_potential_row(&self, sys: &mut BlockSystem, state: &[&[f64]]) -> Result<()> {
        let ni = self.coeffs.species;
        let row = ni + 1;
        if let Some(k) = self.stiffness(&self.coeffs.sigma, state)? {
            sys.add_block(row, row, &k, 1.0);
        }
        for (j, g) in self.coeffs.g.iter().enumerate() {
            if let Some(k) = self.stiffness(g, state)? {
                sys.add_block(row, j, &k, 1.0);
            }
        }
        sys.add_rhs(row, &self.current_load, 1.0);
        sys.add_gauge(Gauge {
            block: row,
            weights: self.boundary_gauge.clone(),
            target: 0.0,
        });
        Ok(())
    }

    /// Initial state: interpolated data and the potential solving the
    /// stationary equation at the initial state.
    pub fn initial_state(&self) -> Result<StepState> {
        let n = self.mesh.num_vertices();
        let ni = self.coeffs.species;
        let mut fields: Vec<Field> = self
            .coeffs
            .initial
            .iter()
            .map(|f| Field::interpolate(self.mesh, |p| f.eval(p)))
            .collect();
        if let Some(bad) = fields.iter().position(|f| !f.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "initial data of unknown {} is not finite",
                bad + 1
            )));
        }
        let state: Vec<&[f64]> = fields.iter().map(Field::values).collect();
        let mut sys = BlockSystem::new(ni + 2, n);
        self.add_potential_row(&mut sys, &state)?;
        // The other rows only pin the state to its initial values.
        let identity = SparseMatrix::identity(n);
        for (j, f) in fields.iter().enumerate() {
            sys.add_block(j, j, &identity, 1.0);
            sys.add_rhs(j, f.values(), 1.0);
        }
        let sol = solve_block(&sys)?;
        fields.push(Field::new(sol.fields[ni + 1].clone()));
        Ok(StepState {
            m: 0,
            time: 0.0,
            fields,
            picard_iters: 0,
            increment_history: Vec::new(),
            damping: 1.0,
            residual: sol.residual,
            multipliers: sol.multipliers,
        })
    }

    /// Time-averaged boundary loads of the state equations for step `m`.
    fn data_loads(&self, m: usize) -> Vec<Vec<f64>> {
        let tau = self.cfg.tau();
        self.coeffs
            .h
            .iter()
            .map(|h| {
                if h.is_zero() {
                    return vec![0.0; self.mesh.num_vertices()];
                }
                let regions: Vec<Region> = Region::ALL.into_iter().filter(|&r| !h.is_zero_on(r)).collect();
                assemble_boundary_load(self.mesh, &regions, |x, r| {
                    time_average_data(|p, t| h.eval(r, p, t), m, tau)(x)
                })
                .into_values()
            })
            .collect()
    }

    /// Linear system of one fixed-point iteration around `iterate`.
    fn assemble(&self, prev: &StepState, iterate: &[Vec<f64>], loads: &[Vec<f64>]) -> Result<BlockSystem> {
        let n = self.mesh.num_vertices();
        let ni = self.coeffs.species;
        let temp = ni;
        let tau = self.cfg.tau();
        let state: Vec<&[f64]> = iterate[..=ni].iter().map(Vec::as_slice).collect();
        let mut sys = BlockSystem::new(ni + 2, n);

        for i in 0..=ni {
            for j in 0..=ni {
                if let Some(k) = self.stiffness(&self.coeffs.a[i][j], &state)? {
                    sys.add_block(i, j, &k, 1.0);
                }
            }
            if let Some(k) = self.stiffness(&self.coeffs.f[i], &state)? {
                sys.add_block(i, ni + 1, &k, 1.0);
            }
            sys.add_rhs(i, &loads[i], 1.0);
        }

        for i in 0..ni {
            sys.add_block(i, i, &self.mass, 1.0 / tau);
            sys.add_rhs(i, &self.mass.matvec(prev.fields[i].values()), 1.0 / tau);
            sys.add_gauge(Gauge {
                block: i,
                weights: self.lumped.clone(),
                target: dot(&self.lumped, prev.fields[i].values()),
            });
        }

        // Lumped Kirchhoff term: b(u^k) u^{k+1} on the diagonal and
        // b(u^k) u^k - (B(u^k) - B(u^{m-1})) on the right.
        let u = &iterate[temp];
        let u_prev = prev.fields[temp].values();
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for (v, p) in self.mesh.vertices().iter().enumerate() {
            let b = self.kirchhoff.weight(*p, u[v]);
            let db = self.kirchhoff.increment(*p, u_prev[v], u[v]);
            if !(b.is_finite() && db.is_finite()) {
                return Err(Error::NonFiniteCoefficient {
                    what: "heat capacity".into(),
                    x: p[0],
                    y: p[1],
                });
            }
            diag[v] = self.lumped[v] * b / tau;
            rhs[v] = self.lumped[v] * (b * u[v] - db) / tau;
        }
        sys.add_block(temp, temp, &SparseMatrix::diagonal(&diag), 1.0);
        sys.add_rhs(temp, &rhs, 1.0);

        for region in Region::ALL {
            if let Some((gamma, _)) = self.coeffs.gamma(region) {
                if gamma.is_zero() || self.mesh.boundary_measure(region) == 0.0 {
                    continue;
                }
                let form = assemble_boundary_form(self.mesh, &[region], |p, e| gamma.eval(p, e), Some(u))?;
                sys.add_block(temp, temp, &form, 1.0);
            }
        }

        self.add_potential_row(&mut sys, &state)?;
        Ok(sys)
    }

    fn relative_increment(&self, new: &[f64], old: &[f64]) -> f64 {
        let diff: Vec<f64> = new.iter().zip(old).map(|(a, b)| a - b).collect();
        let d = l2_norm(self.mesh, &diff);
        let s = l2_norm(self.mesh, new);
        if s > 0.0 {
            d / s
        } else {
            d
        }
    }

    fn attempt(&self, prev: &StepState, loads: &[Vec<f64>], damping: f64) -> Result<Attempt> {
        let m = prev.m + 1;
        let picard = &self.cfg.picard;
        let mut iterate: Vec<Vec<f64>> = prev.fields.iter().map(|f| f.values().to_vec()).collect();
        let mut history = Vec::new();
        for k in 1..=picard.max_iter {
            let sys = self.assemble(prev, &iterate, loads)?;
            let sol = solve_block(&sys)?;
            let mut increment = 0.0f64;
            for (x, new) in iterate.iter_mut().zip(&sol.fields) {
                let damped: Vec<f64> = new
                    .iter()
                    .zip(x.iter())
                    .map(|(a, b)| damping * a + (1.0 - damping) * b)
                    .collect();
                increment = increment.max(self.relative_increment(&damped, x) / damping);
                *x = damped;
            }
            let multipliers = sol.multipliers;
            history.push(increment);
            if !increment.is_finite() || increment > BLOWUP {
                return Ok(Attempt::Diverged {
                    iterations: k,
                    increment,
                });
            }
            if increment <= picard.tol {
                let residual = self.residual(prev, &iterate, &multipliers, loads)?;
                return Ok(Attempt::Converged(StepState {
                    m,
                    time: self.cfg.time(m),
                    fields: iterate.into_iter().map(Field::new).collect(),
                    picard_iters: k,
                    increment_history: history,
                    damping,
                    residual,
                    multipliers,
                }));
            }
        }
        let last = history.last().copied().unwrap_or(f64::NAN);
        Ok(Attempt::Diverged {
            iterations: picard.max_iter,
            increment: last,
        })
    }

    /// Relative residual of the nonlinear equations: the system assembled
    /// at `iterate` applied to `iterate` itself.
    fn residual(&self, prev: &StepState, iterate: &[Vec<f64>], multipliers: &[f64], loads: &[Vec<f64>]) -> Result<f64> {
        let sys = self.assemble(prev, iterate, loads)?;
        let a = sys.augmented_matrix();
        let b = sys.augmented_rhs();
        let mut x: Vec<f64> = iterate.iter().flatten().copied().collect();
        x.extend_from_slice(multipliers);
        let ax = a.matvec(&x);
        let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let r: Vec<f64> = ax.iter().zip(&b).map(|(p, q)| p - q).collect();
        let scale = a.norm_inf() * inf(&x) + inf(&b);
        Ok(if scale > 0.0 { inf(&r) / scale } else { inf(&r) })
    }

    /// One Rothe step from `prev`. On divergence the damping is halved and
    /// the step restarted, down to [`MIN_DAMPING`].
    pub fn step(&self, prev: &StepState) -> Result<StepState> {
        let m = prev.m + 1;
        if m > self.cfg.steps {
            return Err(Error::InvalidInput(format!(
                "step {m} beyond the configured {} steps",
                self.cfg.steps
            )));
        }
        let loads = self.data_loads(m);
        let mut damping = self.cfg.picard.damping;
        loop {
            match self.attempt(prev, &loads, damping) {
                Ok(Attempt::Converged(state)) => return Ok(state),
                Ok(Attempt::Diverged { iterations, increment }) => {
                    if damping / 2.0 < MIN_DAMPING {
                        return Err(Error::PicardDiverged {
                            step: m,
                            iterations,
                            increment,
                        });
                    }
                    damping /= 2.0;
                }
                Err(e) => {
                    return Err(Error::AtStep {
                        step: m,
                        source: Box::new(e),
                    })
                }
            }
        }
    }

    /// All steps from the initial state. `observer` sees each new state
    /// together with its predecessor, in order.
    pub fn run_with<F>(&self, mut observer: F) -> Result<Trajectory>
    where
        F: FnMut(&StepState, &StepState) -> Result<()>,
    {
        let mut states = vec![self.initial_state()?];
        for _ in 0..self.cfg.steps {
            let next = self.step(states.last().expect("nonempty"))?;
            observer(states.last().expect("nonempty"), &next)?;
            states.push(next);
        }
        Ok(Trajectory {
            states,
            tau: self.cfg.tau(),
            final_time: self.cfg.final_time,
        })
    }

    pub fn run(&self) -> Result<Trajectory> {
        self.run_with(|_, _| Ok(()))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A single step from `prev`.
pub fn rothe_step(
    prev: &StepState,
    coeffs: &CoefficientSet,
    ledger: &BoundsLedger,
    mesh: &Mesh,
    cfg: RotheConfig,
) -> Result<StepState> {
    RotheSolver::new(mesh, coeffs, ledger, cfg)?.step(prev)
}

pub fn run(coeffs: &CoefficientSet, ledger: &BoundsLedger, mesh: &Mesh, cfg: RotheConfig) -> Result<Trajectory> {
    RotheSolver::new(mesh, coeffs, ledger, cfg)?.run()
}

/// Discrete time derivatives for `m = 1..=M`: difference quotients of the
/// species and of `B` applied to the temperature.
pub fn discrete_derivative(traj: &Trajectory, mesh: &Mesh, kirchhoff: &KirchhoffEvaluator) -> Vec<Vec<Field>> {
    let tau = traj.tau;
    traj.states
        .windows(2)
        .map(|w| {
            let (old, new) = (&w[0], &w[1]);
            let nstate = new.fields.len() - 1;
            (0..nstate)
                .map(|j| {
                    let (a, b) = (old.fields[j].values(), new.fields[j].values());
                    let values = if j + 1 < nstate {
                        a.iter().zip(b).map(|(x, y)| (y - x) / tau).collect()
                    } else {
                        mesh.vertices()
                            .iter()
                            .enumerate()
                            .map(|(v, p)| kirchhoff.increment(*p, a[v], b[v]) / tau)
                            .collect()
                    };
                    Field::new(values)
                })
                .collect()
        })
        .collect()
}
