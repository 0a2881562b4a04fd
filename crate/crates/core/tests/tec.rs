use proptest::prelude::*;
use tecsim_core::coefficients::{
    check_smallness, preset, tec_smallness, tec_to_abstract, validate_bounds, BoundsLedger, GammaBounds, ScalarCoef,
    SpaceCoef, StateCoef, TecBounds, TecParams, TecSpecies, TecSpeciesBounds, FARADAY, GAS_CONSTANT, STEFAN_BOLTZMANN,
};
use tecsim_core::mesh::build_rect_mesh;

fn species(valence: f64, transference: f64, diffusion: f64) -> TecSpecies {
    TecSpecies {
        valence,
        transference: SpaceCoef::Const(transference),
        diffusion: StateCoef::Const(diffusion),
        soret: StateCoef::Const(0.0),
        dufour: StateCoef::Const(0.0),
        flux_anode: ScalarCoef::Const(0.0),
        flux_cathode: ScalarCoef::Const(0.0),
        initial: SpaceCoef::Const(1.0),
    }
}

fn params(sp: Vec<TecSpecies>, bounds: TecBounds) -> TecParams {
    TecParams {
        species: sp,
        conductivity: StateCoef::Const(1.0),
        thermal_conductivity: ScalarCoef::Const(0.6),
        peltier: ScalarCoef::Const(0.0),
        seebeck: ScalarCoef::Const(0.0),
        heat_capacity: ScalarCoef::Const(1.0),
        convection: SpaceCoef::Const(10.0),
        radiation: ScalarCoef::Const(STEFAN_BOLTZMANN),
        theta_anode: ScalarCoef::Const(300.0),
        theta_cathode: ScalarCoef::Const(300.0),
        wall_source: ScalarCoef::Const(0.0),
        current_anode: SpaceCoef::Const(0.0),
        current_cathode: SpaceCoef::Const(0.0),
        theta0: SpaceCoef::Const(300.0),
        ell: 5.0,
        bounds,
    }
}

fn bounds_strategy() -> impl Strategy<Value = TecBounds> {
    let sp = (0.1f64..2.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..0.5, 0.0f64..0.5).prop_map(|(dl, ds, ts, s, d)| {
        TecSpeciesBounds {
            diffusion_lower: Some(dl),
            diffusion_sharp: Some(ds),
            transference_sharp: Some(ts),
            soret_sharp: Some(s),
            dufour_sharp: Some(d),
        }
    });
    (
        prop::collection::vec(sp, 1..4),
        0.1f64..3.0,
        0.0f64..1.0,
        0.1f64..3.0,
        0.0f64..1.0,
        0.0f64..0.5,
        0.0f64..0.5,
    )
        .prop_map(|(species, k_lo, k_spread, s_lo, s_spread, pi, alpha)| TecBounds {
            species,
            thermal_conductivity: Some((k_lo, k_lo + k_spread)),
            conductivity: Some((s_lo, s_lo + s_spread)),
            peltier_sharp: Some(pi),
            seebeck_sharp: Some(alpha),
            heat_capacity: Some((1.0, 2.0)),
            convection: Some((1.0, 1.0)),
            radiation: Some((1.0, 1.0)),
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn cell_and_abstract_verdicts_agree(bounds in bounds_strategy()) {
        let sp = (0..bounds.species.len()).map(|i| species(if i % 2 == 0 { 1.0 } else { -2.0 }, 0.1, 1e-5)).collect();
        let (_, ledger) = tec_to_abstract(&params(sp, bounds.clone())).unwrap();
        let cell = tec_smallness(&bounds).unwrap();
        let abs = check_smallness(&ledger);
        prop_assert_eq!(cell.len(), abs.len());
        for (c, a) in cell.iter().zip(&abs) {
            prop_assert_eq!(c.pass, a.pass);
            prop_assert!((c.margin - a.margin).abs() <= 1e-12 * (1.0 + c.margin.abs()));
        }
    }
}

#[test]
fn nernst_einstein_consistency() {
    // With σ_i = t_i σ = F z_i u_i c_i and u_i = z_i D_i F / (R θ), the
    // potential coupling of species i equals u_i c_i.
    let (z, d, c, theta, sigma) = (2.0, 1.3e-5, 0.7, 310.0, 1.0);
    let mobility = z * d * FARADAY / (GAS_CONSTANT * theta);
    let t = FARADAY * z * mobility * c / sigma;
    let bounds = TecBounds {
        species: vec![TecSpeciesBounds {
            diffusion_lower: Some(d),
            diffusion_sharp: Some(FARADAY * z * d),
            transference_sharp: Some(t / (FARADAY * z)),
            soret_sharp: Some(0.0),
            dufour_sharp: Some(0.0),
        }],
        thermal_conductivity: Some((0.6, 0.6)),
        conductivity: Some((sigma, sigma)),
        peltier_sharp: Some(0.0),
        seebeck_sharp: Some(0.0),
        heat_capacity: Some((1.0, 1.0)),
        convection: Some((10.0, 10.0)),
        radiation: Some((STEFAN_BOLTZMANN, STEFAN_BOLTZMANN)),
    };
    let (coeffs, _) = tec_to_abstract(&params(vec![species(z, t, d)], bounds)).unwrap();
    let got = coeffs.f[0].eval([0.2, 0.4], &[c, theta]);
    assert!(
        (got - mobility * c).abs() <= 1e-12 * (mobility * c),
        "{got} vs {}",
        mobility * c
    );
}

#[test]
fn demo_cell_respects_its_bounds_on_its_state_box() {
    let model = preset("tec-electrolysis-demo").unwrap();
    let mesh = build_rect_mesh(&model.domain, 8, 8).unwrap();
    let report = validate_bounds(&model.coeffs, &model.ledger, &mesh, &model.state_box, 20_000, 42).unwrap();
    assert!(report.is_clean(), "{}", report.violations[0]);
}

#[test]
fn inflated_transference_fails_the_named_condition() {
    let ledger = BoundsLedger {
        a_sharp: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        a_lower: vec![1.0, 1.0],
        f_sharp: vec![3.0, 0.0],
        g_sharp: vec![0.0, 0.0],
        sigma: (3.0, 3.0),
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
    };
    let verdicts = check_smallness(&ledger);
    let failed: Vec<_> = verdicts.iter().filter(|v| !v.pass).collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].margin <= 0.0);
    assert_eq!(failed[0].condition, verdicts[0].condition);
}
