//! Built-in scenarios.

use std::f64::consts::PI;

use super::tec::{tec_to_abstract, TecBounds, TecParams, TecSpecies, TecSpeciesBounds, GAS_CONSTANT, STEFAN_BOLTZMANN};
use super::{BoundaryData, BoundsLedger, CoefficientSet, GammaBounds, ScalarCoef, SpaceCoef, StateCoef};
use crate::mesh::{DomainSpec, Region};
use crate::{Error, Result};

/// Resolution and time grid a preset is meant to run with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelDefaults {
    pub nx: usize,
    pub ny: usize,
    pub final_time: f64,
    pub steps: usize,
}

/// A complete scenario: geometry, coefficients, declared bounds and the
/// state box the bounds are meant to hold on.
#[derive(Debug, Clone)]
pub struct Model {
    pub name: String,
    pub domain: DomainSpec,
    pub coeffs: CoefficientSet,
    pub ledger: BoundsLedger,
    pub state_box: Vec<(f64, f64)>,
    /// Exact solution of (point, time) per unknown: species, temperature,
    /// potential. `None` entries are not compared.
    pub exact: Option<Vec<Option<ScalarCoef>>>,
    pub defaults: ModelDefaults,
}

const NAMES: [&str; 4] = [
    "decoupled-heat",
    "robin-heat",
    "tec-electrolysis-demo",
    "strong-coupling",
];

pub fn preset_names() -> &'static [&'static str] {
    &NAMES
}

pub fn preset(name: &str) -> Result<Model> {
    match name {
        "decoupled-heat" => Ok(decoupled_heat()),
        "robin-heat" => Ok(robin_heat(false)),
        "strong-coupling" => Ok(robin_heat(true)),
        "tec-electrolysis-demo" => tec_demo(),
        other => Err(Error::InvalidInput(format!(
            "unknown preset '{other}' (known: {})",
            NAMES.join(", ")
        ))),
    }
}

fn unit_square() -> DomainSpec {
    DomainSpec::from_sides(1.0, 1.0, Region::Wall, Region::Cathode, Region::Wall, Region::Anode)
}

fn unit_gamma() -> GammaBounds {
    GammaBounds {
        lower: 1.0,
        upper: 1.0,
        offset: 0.0,
    }
}

/// Heat equation with unit Robin coefficient on the whole boundary, one
/// diffusing species with zero flux and a uniform current. Every unknown
/// has a closed-form solution.
fn decoupled_heat() -> Model {
    let mut c = CoefficientSet::decoupled(1);
    let species = |x: [f64; 2], t: f64| 1.0 + (-2.0 * PI * PI * t).exp() * (PI * x[0]).cos() * (PI * x[1]).cos();
    let theta = |x: [f64; 2], t: f64| (-PI * PI * t).exp() * (PI * x[0]).cos();
    // ∂u/∂n + u on each side; the normal derivative of cos(πx) vanishes on
    // all four sides of the unit square.
    let robin = ScalarCoef::func(move |x, t| theta(x, t));
    c.h[1] = BoundaryData::zero()
        .on(Region::Anode, robin.clone())
        .on(Region::Cathode, robin.clone())
        .on(Region::Wall, robin);
    c.current_anode = SpaceCoef::Const(1.0);
    c.current_cathode = SpaceCoef::Const(-1.0);
    c.initial = vec![
        SpaceCoef::func(move |x| species(x, 0.0)),
        SpaceCoef::func(move |x| theta(x, 0.0)),
    ];
    let ledger = BoundsLedger {
        a_sharp: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        a_lower: vec![1.0, 1.0],
        f_sharp: vec![0.0, 0.0],
        g_sharp: vec![0.0, 0.0],
        sigma: (1.0, 1.0),
        b: (1.0, 1.0),
        gamma_electrode: unit_gamma(),
        gamma_wall: unit_gamma(),
        ell: 2.0,
    };
    Model {
        name: "decoupled-heat".into(),
        domain: unit_square(),
        coeffs: c,
        ledger,
        state_box: vec![(-5.0, 5.0), (-5.0, 5.0)],
        exact: Some(vec![
            Some(ScalarCoef::func(species)),
            Some(ScalarCoef::func(theta)),
            Some(ScalarCoef::func(|x, _| 0.5 - x[0])),
        ]),
        defaults: ModelDefaults {
            nx: 16,
            ny: 16,
            final_time: 0.5,
            steps: 16,
        },
    }
}

/// One species coupled to a temperature with state-dependent heat
/// capacity, Robin exchange on electrodes and wall, and time-dependent
/// boundary data. With `strong` the species diffusion is too weak for its
/// cross couplings, so the first coercivity constant is negative.
fn robin_heat(strong: bool) -> Model {
    let mut c = CoefficientSet::decoupled(1);
    let d1 = if strong { 0.15 } else { 1.0 };
    c.a[0][0] = StateCoef::Const(d1);
    c.a[0][1] = StateCoef::func(|_, e| 0.1 * e[0] / (1.0 + e[0] * e[0]) * 2.0);
    c.a[1][0] = StateCoef::func(|x, e| 0.1 * (PI * x[0]).cos() * e[1] * e[1] / (1.0 + e[1] * e[1]));
    c.a[1][1] = StateCoef::func(|_, e| 1.0 + 0.5 * e[1] * e[1] / (1.0 + e[1] * e[1]));
    c.f[0] = StateCoef::func(|_, e| 0.1 / (1.0 + e[0] * e[0]));
    c.f[1] = StateCoef::Const(0.05);
    c.g[0] = StateCoef::func(|_, e| 0.1 * (1.0 + e[1] * e[1]).recip());
    c.g[1] = StateCoef::Const(-0.05);
    c.sigma = StateCoef::func(|_, e| 1.0 + 0.5 * e[0] * e[0] / (1.0 + e[0] * e[0]));
    c.b = ScalarCoef::func(|x, z| 1.0 + 0.5 * z * z / (1.0 + z * z) + 0.1 * x[1]);
    c.gamma_electrode = ScalarCoef::Const(2.0);
    c.gamma_wall = ScalarCoef::Const(1.0);
    c.h[0] = BoundaryData::zero()
        .on(Region::Anode, ScalarCoef::func(|_, t| 0.2 * (1.0 - (-4.0 * t).exp())))
        .on(
            Region::Cathode,
            ScalarCoef::func(|_, t| -0.2 * (1.0 - (-4.0 * t).exp())),
        );
    c.h[1] = BoundaryData::zero()
        .on(
            Region::Anode,
            ScalarCoef::func(|x, t| 2.0 * (1.0 + 0.5 * (PI * t).sin()) * (1.0 + 0.2 * x[1])),
        )
        .on(Region::Cathode, ScalarCoef::Const(0.4))
        .on(Region::Wall, ScalarCoef::func(|x, _| 0.3 * x[0]));
    c.current_anode = SpaceCoef::func(|x| 0.5 + 0.25 * (PI * x[1]).sin());
    c.current_cathode = SpaceCoef::Const(-0.5);
    c.initial = vec![
        SpaceCoef::func(|x| 1.0 + 0.5 * (PI * x[0]).cos()),
        SpaceCoef::func(|x| 0.5 + 0.3 * (PI * x[0]).sin() * (PI * x[1]).cos()),
    ];
    let ledger = BoundsLedger {
        a_sharp: vec![vec![d1, 0.1], vec![0.1, 1.5]],
        a_lower: vec![d1, 1.0],
        f_sharp: vec![0.1, 0.05],
        g_sharp: vec![0.1, 0.05],
        sigma: (1.0, 1.5),
        b: (1.0, 1.6),
        gamma_electrode: GammaBounds {
            lower: 2.0,
            upper: 2.0,
            offset: 0.0,
        },
        gamma_wall: unit_gamma(),
        ell: 2.0,
    };
    let name = if strong { "strong-coupling" } else { "robin-heat" };
    Model {
        name: name.into(),
        domain: unit_square(),
        coeffs: c,
        ledger,
        state_box: vec![(-10.0, 10.0), (-10.0, 10.0)],
        exact: None,
        defaults: ModelDefaults {
            nx: 16,
            ny: 16,
            final_time: 1.0,
            steps: 32,
        },
    }
}

/// Parameters of the two-species cell demo: anode on the left, cathode on
/// the right, radiating wall at the bottom and an insulated top.
pub(crate) fn tec_demo_params() -> TecParams {
    // Valences are scaled so that F |z| is of order one in model units.
    let valence = 1.0e-5;
    let fz = super::tec::FARADAY * valence;
    let emissivity = 0.9;
    let ambient: f64 = 295.0;
    let species = |sign: f64, flux: f64| TecSpecies {
        valence: sign * valence,
        transference: SpaceCoef::Const(0.3),
        diffusion: StateCoef::func(|_, e| 0.48 + 0.02 * e[1] * e[1] / (e[1] * e[1] + 300.0 * 300.0)),
        soret: StateCoef::func(|_, e| 0.01 / (1.0 + e[0] * e[0])),
        dufour: StateCoef::func(|_, e| 1.0e-3 / (GAS_CONSTANT * (e[1] * e[1] + 1.0))),
        flux_anode: ScalarCoef::func(move |_, t| flux * (1.0 - (-10.0 * t).exp())),
        flux_cathode: ScalarCoef::func(move |_, t| -flux * (1.0 - (-10.0 * t).exp())),
        initial: SpaceCoef::Const(1.0),
    };
    let theta_ratio = |z: f64| z * z / (z * z + 300.0 * 300.0);
    TecParams {
        species: vec![species(1.0, 0.05), species(-1.0, -0.05)],
        conductivity: StateCoef::func(move |_, e| 0.95 + 0.05 * theta_ratio(e[2])),
        thermal_conductivity: ScalarCoef::func(move |_, z| 0.6 + 0.1 * theta_ratio(z)),
        peltier: ScalarCoef::func(|_, z| 0.02 * z / (z.abs() + 300.0)),
        seebeck: ScalarCoef::func(|_, z| 0.02 * z.abs() / (z.abs() + 300.0)),
        heat_capacity: ScalarCoef::func(move |x, z| 1.0 + 0.05 * theta_ratio(z) + 0.05 * x[1]),
        convection: SpaceCoef::Const(10.0),
        radiation: ScalarCoef::Const(STEFAN_BOLTZMANN * emissivity),
        theta_anode: ScalarCoef::Const(330.0),
        theta_cathode: ScalarCoef::func(|_, t| 310.0 - 5.0 * (-t).exp()),
        wall_source: ScalarCoef::Const(STEFAN_BOLTZMANN * emissivity * ambient.powi(4)),
        current_anode: SpaceCoef::Const(1.0),
        current_cathode: SpaceCoef::Const(-1.0),
        theta0: SpaceCoef::func(|x| 300.0 + 10.0 * x[0]),
        ell: 5.0,
        bounds: TecBounds {
            species: vec![
                TecSpeciesBounds {
                    diffusion_lower: Some(0.48),
                    diffusion_sharp: Some(fz * 0.5),
                    transference_sharp: Some(0.3 / fz),
                    soret_sharp: Some(0.005),
                    dufour_sharp: Some(1.0e-3),
                };
                2
            ],
            thermal_conductivity: Some((0.6, 0.7)),
            conductivity: Some((0.95, 1.0)),
            peltier_sharp: Some(0.02),
            seebeck_sharp: Some(0.02),
            heat_capacity: Some((1.0, 1.1)),
            convection: Some((10.0, 10.0)),
            radiation: Some((STEFAN_BOLTZMANN * emissivity, STEFAN_BOLTZMANN * emissivity)),
        },
    }
}

fn tec_demo() -> Result<Model> {
    let (coeffs, ledger) = tec_to_abstract(&tec_demo_params())?;
    Ok(Model {
        name: "tec-electrolysis-demo".into(),
        domain: DomainSpec::from_sides(1.0, 1.0, Region::Wall, Region::Cathode, Region::Outer, Region::Anode),
        coeffs,
        ledger,
        state_box: vec![(-20.0, 20.0), (-20.0, 20.0), (250.0, 400.0)],
        exact: None,
        defaults: ModelDefaults {
            nx: 16,
            ny: 16,
            final_time: 0.5,
            steps: 64,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{check_smallness, tec_smallness, validate_bounds};
    use crate::mesh::build_rect_mesh;

    #[test]
    fn presets_hold_their_bounds() {
        for name in preset_names() {
            let m = preset(name).unwrap();
            m.coeffs.validate().unwrap();
            m.ledger.validate().unwrap();
            let mesh = build_rect_mesh(&m.domain, 4, 4).unwrap();
            let r = validate_bounds(&m.coeffs, &m.ledger, &mesh, &m.state_box, 2000, 3).unwrap();
            assert!(r.is_clean(), "{name}: {}", r.violations[0]);
        }
    }

    #[test]
    fn smallness_of_presets() {
        for (name, pass) in [
            ("decoupled-heat", true),
            ("robin-heat", true),
            ("tec-electrolysis-demo", true),
            ("strong-coupling", false),
        ] {
            let v = check_smallness(&preset(name).unwrap().ledger);
            assert_eq!(v.iter().all(|v| v.pass), pass, "{name}: {v:?}");
        }
        let strong = check_smallness(&preset("strong-coupling").unwrap().ledger);
        assert!(!strong[0].pass && strong[1].pass && strong[2].pass);
    }

    #[test]
    fn cell_margins_agree_with_abstract_margins() {
        let p = tec_demo_params();
        let direct = tec_smallness(&p.bounds).unwrap();
        let (_, ledger) = tec_to_abstract(&p).unwrap();
        let mapped = check_smallness(&ledger);
        for (d, m) in direct.iter().zip(&mapped) {
            assert!((d.margin - m.margin).abs() < 1e-12, "{d} vs {m}");
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(preset("nope").is_err());
    }
}
