//! Thermoelectrochemical cell model and its mapping onto the abstract
//! coefficient set.

use std::sync::Arc;

use super::{BoundaryData, BoundsLedger, CoefficientSet, GammaBounds, ScalarCoef, SpaceCoef, StateCoef, Verdict};
use crate::mesh::Region;
use crate::{Error, Result};

/// Faraday constant, C/mol.
pub const FARADAY: f64 = 9.6485e4;
/// Universal gas constant, J/(mol K).
pub const GAS_CONSTANT: f64 = 8.314;
/// Stefan-Boltzmann constant, W/(m² K⁴).
pub const STEFAN_BOLTZMANN: f64 = 5.67e-8;

/// One ionic species. Coefficients of kind [`StateCoef`] receive the pair
/// `[c_i, θ]`.
#[derive(Clone, Debug)]
pub struct TecSpecies {
    pub valence: f64,
    pub transference: SpaceCoef,
    pub diffusion: StateCoef,
    pub soret: StateCoef,
    pub dufour: StateCoef,
    pub flux_anode: ScalarCoef,
    pub flux_cathode: ScalarCoef,
    pub initial: SpaceCoef,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TecSpeciesBounds {
    /// Lower bound of `D_i`.
    pub diffusion_lower: Option<f64>,
    /// Upper bound of `F |z_i| D_i`.
    pub diffusion_sharp: Option<f64>,
    /// Upper bound of `t_i / (F |z_i|)`.
    pub transference_sharp: Option<f64>,
    /// Upper bound of `|c S_i(c, θ)|`.
    pub soret_sharp: Option<f64>,
    /// Upper bound of `R θ² |D'_i(c, θ)|`.
    pub dufour_sharp: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TecBounds {
    pub species: Vec<TecSpeciesBounds>,
    pub thermal_conductivity: Option<(f64, f64)>,
    pub conductivity: Option<(f64, f64)>,
    pub peltier_sharp: Option<f64>,
    pub seebeck_sharp: Option<f64>,
    pub heat_capacity: Option<(f64, f64)>,
    pub convection: Option<(f64, f64)>,
    pub radiation: Option<(f64, f64)>,
}

/// Cell parameters. Conductivity receives `[c_1, .., c_I, θ]`; scalar
/// coefficients receive (point, θ) and boundary sources (point, time).
#[derive(Clone, Debug)]
pub struct TecParams {
    pub species: Vec<TecSpecies>,
    pub conductivity: StateCoef,
    pub thermal_conductivity: ScalarCoef,
    pub peltier: ScalarCoef,
    pub seebeck: ScalarCoef,
    pub heat_capacity: ScalarCoef,
    pub convection: SpaceCoef,
    pub radiation: ScalarCoef,
    pub theta_anode: ScalarCoef,
    pub theta_cathode: ScalarCoef,
    pub wall_source: ScalarCoef,
    pub current_anode: SpaceCoef,
    pub current_cathode: SpaceCoef,
    pub theta0: SpaceCoef,
    pub ell: f64,
    pub bounds: TecBounds,
}

fn need<T: Copy>(value: Option<T>, name: impl Into<String>) -> Result<T> {
    value.ok_or_else(|| Error::MissingBound(name.into()))
}

struct Resolved {
    d_lower: Vec<f64>,
    d_sharp: Vec<f64>,
    t_sharp: Vec<f64>,
    s_sharp: Vec<f64>,
    dufour_sharp: Vec<f64>,
    k: (f64, f64),
    sigma: (f64, f64),
    peltier: f64,
    seebeck: f64,
    b: (f64, f64),
    convection: (f64, f64),
    radiation: (f64, f64),
}

fn resolve(bounds: &TecBounds, species: usize) -> Result<Resolved> {
    if bounds.species.len() != species {
        return Err(Error::MissingBound(format!(
            "bounds declared for {} species, model has {species}",
            bounds.species.len()
        )));
    }
    let mut r = Resolved {
        d_lower: Vec::new(),
        d_sharp: Vec::new(),
        t_sharp: Vec::new(),
        s_sharp: Vec::new(),
        dufour_sharp: Vec::new(),
        k: need(bounds.thermal_conductivity, "thermal conductivity bounds")?,
        sigma: need(bounds.conductivity, "electrical conductivity bounds")?,
        peltier: need(bounds.peltier_sharp, "Peltier bound")?,
        seebeck: need(bounds.seebeck_sharp, "Seebeck bound")?,
        b: need(bounds.heat_capacity, "heat capacity bounds")?,
        convection: need(bounds.convection, "convective transfer bounds")?,
        radiation: need(bounds.radiation, "radiative transfer bounds")?,
    };
    for (i, s) in bounds.species.iter().enumerate() {
        let n = i + 1;
        r.d_lower.push(need(
            s.diffusion_lower,
            format!("diffusion lower bound of species {n}"),
        )?);
        r.d_sharp.push(need(
            s.diffusion_sharp,
            format!("diffusion upper bound of species {n}"),
        )?);
        r.t_sharp.push(need(
            s.transference_sharp,
            format!("transference bound of species {n}"),
        )?);
        r.s_sharp
            .push(need(s.soret_sharp, format!("Soret bound of species {n}"))?);
        r.dufour_sharp
            .push(need(s.dufour_sharp, format!("Dufour bound of species {n}"))?);
    }
    Ok(r)
}

/// Abstract coefficients and bounds of the cell model.
pub fn tec_to_abstract(params: &TecParams) -> Result<(CoefficientSet, BoundsLedger)> {
    let ni = params.species.len();
    let n = ni + 1;
    let b = resolve(&params.bounds, ni)?;
    for (i, s) in params.species.iter().enumerate() {
        if s.valence == 0.0 || !s.valence.is_finite() {
            return Err(Error::InvalidInput(format!(
                "species {} needs a nonzero valence",
                i + 1
            )));
        }
    }

    let mut a = vec![vec![StateCoef::Const(0.0); n]; n];
    for (i, s) in params.species.iter().enumerate() {
        let d = s.diffusion.clone();
        a[i][i] = StateCoef::func(move |x, e| d.eval(x, &[e[i], e[ni]]));
        let soret = s.soret.clone();
        a[i][ni] = if soret.is_zero() {
            StateCoef::Const(0.0)
        } else {
            StateCoef::func(move |x, e| e[i] * soret.eval(x, &[e[i], e[ni]]))
        };
        let dufour = s.dufour.clone();
        a[ni][i] = if dufour.is_zero() {
            StateCoef::Const(0.0)
        } else {
            StateCoef::func(move |x, e| GAS_CONSTANT * e[ni] * e[ni] * dufour.eval(x, &[e[i], e[ni]]))
        };
    }
    let k = params.thermal_conductivity.clone();
    a[ni][ni] = StateCoef::func(move |x, e| k.eval(x, e[ni]));

    let sigma = params.conductivity.clone();
    let mut f = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    for (i, s) in params.species.iter().enumerate() {
        let scale = 1.0 / (FARADAY * s.valence);
        let (t, sg) = (s.transference.clone(), sigma.clone());
        f.push(if t.is_zero() {
            StateCoef::Const(0.0)
        } else {
            StateCoef::func(move |x, e| t.eval(x) * scale * sg.eval(x, e))
        });
        let (d, fz) = (s.diffusion.clone(), FARADAY * s.valence);
        g.push(StateCoef::func(move |x, e| fz * d.eval(x, &[e[i], e[ni]])));
    }
    let (pi, sg) = (params.peltier.clone(), sigma.clone());
    f.push(if pi.is_zero() {
        StateCoef::Const(0.0)
    } else {
        StateCoef::func(move |x, e| pi.eval(x, e[ni]) * sg.eval(x, e))
    });
    let (alpha, sg) = (params.seebeck.clone(), sigma.clone());
    g.push(if alpha.is_zero() {
        StateCoef::Const(0.0)
    } else {
        StateCoef::func(move |x, e| alpha.eval(x, e[ni]) * sg.eval(x, e))
    });

    let conv = params.convection.clone();
    let gamma_electrode = match conv {
        SpaceCoef::Const(c) => ScalarCoef::Const(c),
        SpaceCoef::Func(h) => ScalarCoef::Func(Arc::new(move |x, _| h(x))),
    };
    let (rad, ell) = (params.radiation.clone(), params.ell);
    let gamma_wall = ScalarCoef::func(move |x, e| rad.eval(x, e) * e.abs().powf(ell - 2.0));

    let mut h = Vec::with_capacity(n);
    for s in &params.species {
        h.push(
            BoundaryData::zero()
                .on(Region::Anode, s.flux_anode.clone())
                .on(Region::Cathode, s.flux_cathode.clone()),
        );
    }
    let electrode_heat = |theta: &ScalarCoef| {
        let (hc, th) = (params.convection.clone(), theta.clone());
        ScalarCoef::func(move |x, t| hc.eval(x) * th.eval(x, t))
    };
    h.push(
        BoundaryData::zero()
            .on(Region::Anode, electrode_heat(&params.theta_anode))
            .on(Region::Cathode, electrode_heat(&params.theta_cathode))
            .on(Region::Wall, params.wall_source.clone()),
    );

    let mut initial: Vec<SpaceCoef> = params.species.iter().map(|s| s.initial.clone()).collect();
    initial.push(params.theta0.clone());

    let coeffs = CoefficientSet {
        species: ni,
        a,
        f,
        g,
        sigma,
        b: params.heat_capacity.clone(),
        gamma_electrode,
        gamma_wall,
        ell: params.ell,
        h,
        current_anode: params.current_anode.clone(),
        current_cathode: params.current_cathode.clone(),
        initial,
    };
    coeffs.validate()?;

    let mut a_sharp = vec![vec![0.0; n]; n];
    for i in 0..ni {
        a_sharp[i][i] = b.d_sharp[i] / (FARADAY * params.species[i].valence.abs());
        a_sharp[i][ni] = b.s_sharp[i];
        a_sharp[ni][i] = b.dufour_sharp[i];
    }
    a_sharp[ni][ni] = b.k.1;
    let mut a_lower = b.d_lower.clone();
    a_lower.push(b.k.0);
    let mut f_sharp: Vec<f64> = b.t_sharp.iter().map(|t| t * b.sigma.1).collect();
    f_sharp.push(b.peltier * b.sigma.1);
    let mut g_sharp = b.d_sharp.clone();
    g_sharp.push(b.seebeck * b.sigma.1);
    let ledger = BoundsLedger {
        a_sharp,
        a_lower,
        f_sharp,
        g_sharp,
        sigma: b.sigma,
        b: b.b,
        gamma_electrode: GammaBounds {
            lower: b.convection.0,
            upper: b.convection.1,
            offset: 0.0,
        },
        gamma_wall: GammaBounds {
            lower: b.radiation.0,
            upper: b.radiation.1,
            offset: 0.0,
        },
        ell: params.ell,
    };
    Ok((coeffs, ledger))
}

/// The smallness conditions written directly in the cell parameters.
pub fn tec_smallness(bounds: &TecBounds) -> Result<Vec<Verdict>> {
    let ni = bounds.species.len();
    let r = resolve(bounds, ni)?;
    let sigma_hi = r.sigma.1;
    let mut out = Vec::with_capacity(ni + 2);
    for i in 0..ni {
        let rhs = 0.5 * (r.s_sharp[i] + r.dufour_sharp[i] + r.t_sharp[i] * sigma_hi + r.d_sharp[i]);
        out.push(Verdict::new(format!("species {} diffusion", i + 1), r.d_lower[i] - rhs));
    }
    let cross: f64 = (0..ni).map(|j| r.s_sharp[j] + r.dufour_sharp[j]).sum();
    let rhs = 0.5 * (cross + r.peltier * sigma_hi + r.seebeck * sigma_hi);
    out.push(Verdict::new("thermal conductivity", r.k.0 - rhs));
    let species_terms: f64 = (0..ni).map(|j| r.t_sharp[j] * sigma_hi + r.d_sharp[j]).sum();
    let rhs = 0.5 * (species_terms + (r.peltier + r.seebeck) * sigma_hi);
    out.push(Verdict::new("electrical conductivity", r.sigma.0 - rhs));
    Ok(out)
}
