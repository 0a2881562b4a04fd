mod common;

use proptest::prelude::*;
use tecsim_core::coefficients::{compute_l_sharp, BoundsLedger, GammaBounds, ScalarCoef};
use tecsim_core::fem::{assemble_stiffness, boundary_weights};
use tecsim_core::mesh::{build_rect_mesh, refine_uniform, DomainSpec, Region};
use tecsim_core::scalar_tools::{check_bb, check_bpsi, discrete_gronwall_sharp, KirchhoffEvaluator};

fn layout() -> impl Strategy<Value = [Region; 4]> {
    let region = prop_oneof![
        Just(Region::Anode),
        Just(Region::Cathode),
        Just(Region::Wall),
        Just(Region::Outer)
    ];
    [region.clone(), region.clone(), region.clone(), region]
}

fn weight(lo: f64, hi: f64, k: f64) -> KirchhoffEvaluator {
    KirchhoffEvaluator::new(
        ScalarCoef::func(move |p, z| lo + (hi - lo) * 0.5 * (1.0 + (k * z + p[0]).sin())),
        lo,
        hi,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn meshes_tile_their_rectangle(
        nx in 1usize..10, ny in 1usize..10, w in 0.2f64..3.0, h in 0.2f64..3.0, sides in layout()
    ) {
        let spec = DomainSpec::from_sides(w, h, sides[0], sides[1], sides[2], sides[3]);
        let mesh = build_rect_mesh(&spec, nx, ny).unwrap();
        prop_assert!((mesh.area() - w * h).abs() <= 1e-12 * w * h);
        prop_assert!((mesh.perimeter() - 2.0 * (w + h)).abs() <= 1e-12 * (w + h));
        let incidence = mesh.edge_incidence();
        let boundary = incidence.values().filter(|&&c| c == 1).count();
        prop_assert!(incidence.values().all(|&c| c == 1 || c == 2));
        prop_assert_eq!(boundary, mesh.boundary_edges().len());

        let fine = refine_uniform(&mesh);
        prop_assert_eq!(fine.num_triangles(), 4 * mesh.num_triangles());
        prop_assert!((fine.area() - mesh.area()).abs() <= 1e-12 * mesh.area());
        for r in Region::ALL {
            let (a, b) = (mesh.boundary_measure(r), fine.boundary_measure(r));
            prop_assert!((a - b).abs() <= 1e-12 * (w + h));
            let weights: f64 = boundary_weights(&mesh, &[r]).iter().sum();
            prop_assert!((weights - a).abs() <= 1e-12 * (w + h));
        }
    }

    #[test]
    fn constants_lie_in_every_stiffness_kernel(n in 1usize..8, c0 in 0.1f64..10.0, c1 in -1.0f64..1.0) {
        let mesh = common::unit_square(n);
        let state: Vec<f64> = mesh.vertices().iter().map(|p| (3.0 * p[0]).sin() + p[1]).collect();
        let k = assemble_stiffness(&mesh, |p, e| c0 + c1 * (e[0] * p[1]).cos(), &[&state]).unwrap();
        let ones = vec![1.0; mesh.num_vertices()];
        let scale = k.norm_inf();
        prop_assert!(k.matvec(&ones).iter().all(|v| v.abs() <= 1e-12 * scale));
    }

    #[test]
    fn kirchhoff_inequalities(
        lo in 0.1f64..2.0, spread in 0.0f64..3.0, k in 0.0f64..5.0, u in -20.0f64..20.0, v in -20.0f64..20.0
    ) {
        let hi = lo + spread;
        let b = weight(lo, hi, k);
        let p = [0.3, 0.6];
        let scale = 1e-12 * u.abs().max(v.abs()).max(1.0).powi(2) * hi;
        prop_assert!(check_bpsi(&b, p, u, v) >= -scale);
        prop_assert!(check_bb(&b, p, u, v) >= -scale);
        let (psi, bs) = (b.psi(p, u), b.b_transform(p, u) * u);
        prop_assert!(psi >= -scale && psi <= bs + scale && bs <= hi * u * u + scale);
    }

    #[test]
    fn kirchhoff_slope_stays_in_its_bounds(lo in 0.1f64..2.0, spread in 0.0f64..3.0, u in -20.0f64..20.0) {
        let hi = lo + spread;
        let b = weight(lo, hi, 1.7);
        let d = 1e-3;
        let slope = (b.b_transform([0.0, 0.0], u + d) - b.b_transform([0.0, 0.0], u)) / d;
        prop_assert!(slope >= lo * (1.0 - 1e-9) && slope <= hi * (1.0 + 1e-9));
    }

    #[test]
    fn coercivity_constants_fall_as_cross_bounds_grow(
        cross in prop::collection::vec(0.0f64..0.5, 8), bump in 1e-3f64..1.0, which in 0usize..4
    ) {
        let ledger = BoundsLedger {
            a_sharp: vec![vec![2.0, cross[0]], vec![cross[1], 2.0]],
            a_lower: vec![2.0, 2.0],
            f_sharp: vec![cross[2], cross[3]],
            g_sharp: vec![cross[4], cross[5]],
            sigma: (2.0, 3.0),
            b: (1.0, 1.0),
            gamma_electrode: GammaBounds { lower: 1.0, upper: 1.0, offset: 0.0 },
            gamma_wall: GammaBounds { lower: 1.0, upper: 1.0, offset: 0.0 },
            ell: 2.0,
        };
        let before = compute_l_sharp(&ledger);
        let mut bumped = ledger.clone();
        let touched: Vec<usize> = match which {
            0 => { bumped.a_sharp[0][1] += bump; vec![0, 1] }
            1 => { bumped.f_sharp[1] += bump; vec![1, 2] }
            2 => { bumped.g_sharp[0] += bump; vec![0, 2] }
            _ => { bumped.a_sharp[1][0] += bump; vec![0, 1] }
        };
        let after = compute_l_sharp(&bumped);
        for j in 0..3 {
            if touched.contains(&j) {
                prop_assert!(after[j] < before[j]);
            } else {
                prop_assert_eq!(after[j], before[j]);
            }
        }
    }

    #[test]
    fn sharp_gronwall_dominates_the_recursion(tau_l in 0.001f64..0.9, a0 in 0.0f64..10.0, m in 1usize..100) {
        // Extremal sequence a_m = A + τL Σ_{j<=m} a_j with constant A.
        let tau = 0.01;
        let l = tau_l / tau;
        let a = vec![a0; m];
        let mut sum = 0.0;
        let mut am = 0.0;
        for _ in 0..m {
            am = (a0 + tau_l * sum) / (1.0 - tau_l);
            sum += am;
        }
        let bound = discrete_gronwall_sharp(&a, l, tau, m).unwrap();
        prop_assert!(am <= bound * (1.0 + 1e-12) + 1e-300);
    }
}
