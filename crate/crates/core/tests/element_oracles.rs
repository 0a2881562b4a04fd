mod common;

use common::{barycentric_integral, reference_triangle, unit_square};
use tecsim_core::fem::{
    assemble_boundary_form, assemble_boundary_load, assemble_consistent_mass, assemble_mass, assemble_stiffness,
    SparseMatrix,
};
use tecsim_core::mesh::{BoundaryEdge, Mesh, Region};

const TOL: f64 = 1e-14;

fn assert_matrix(m: &SparseMatrix, expected: &[Vec<f64>]) {
    let d = m.to_dense();
    for (i, row) in expected.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            assert!((d[i][j] - e).abs() <= TOL, "entry ({i},{j}): {} vs {e}", d[i][j]);
        }
    }
}

#[test]
fn reference_mass_matches_barycentric_integrals() {
    let mesh = reference_triangle();
    let expected: Vec<Vec<f64>> = (0..3)
        .map(|i| {
            (0..3)
                .map(|j| {
                    let mut e = [0; 3];
                    e[i] += 1;
                    e[j] += 1;
                    barycentric_integral(e, 0.5)
                })
                .collect()
        })
        .collect();
    assert_matrix(&assemble_consistent_mass(&mesh), &expected);
    assert_matrix(&assemble_mass(&mesh, |_, _| 1.0, None).unwrap(), &expected);
    let fixture = [[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]
        .map(|r| r.map(|v| v / 24.0).to_vec())
        .to_vec();
    assert_matrix(&assemble_consistent_mass(&mesh), &fixture);
}

#[test]
fn linear_weight_mass_row_sums_are_exact() {
    // On the reference triangle x is the second barycentric coordinate, so
    // the row sums are ∫ (1 + 3 λ1) λ_i.
    let mesh = reference_triangle();
    let m = assemble_mass(&mesh, |p, _| 1.0 + 3.0 * p[0], None).unwrap();
    let sums = m.row_sums();
    for (i, s) in sums.iter().enumerate() {
        let mut e = [0; 3];
        e[i] += 1;
        let plain = barycentric_integral(e, 0.5);
        e[1] += 1;
        let want = plain + 3.0 * barycentric_integral(e, 0.5);
        assert!((s - want).abs() <= TOL, "row {i}: {s} vs {want}");
    }
    let doubled = assemble_mass(&mesh, |_, _| 2.0, None).unwrap().to_dense();
    let single = assemble_mass(&mesh, |_, _| 1.0, None).unwrap().to_dense();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(doubled[i][j], 2.0 * single[i][j]);
        }
    }
}

#[test]
fn reference_stiffness_by_hand_gradients() {
    let mesh = reference_triangle();
    let expected = vec![vec![1.0, -0.5, -0.5], vec![-0.5, 0.5, 0.0], vec![-0.5, 0.0, 0.5]];
    assert_matrix(&assemble_stiffness(&mesh, |_, _| 1.0, &[]).unwrap(), &expected);
}

#[test]
fn general_triangle_stiffness() {
    let (x, y) = ([0.2, 1.3, 0.5], [0.1, 0.4, 1.7]);
    let mesh = Mesh::from_parts(
        (0..3).map(|i| [x[i], y[i]]).collect(),
        vec![[0, 1, 2]],
        vec![
            BoundaryEdge {
                vertices: [0, 1],
                region: Region::Wall,
            },
            BoundaryEdge {
                vertices: [1, 2],
                region: Region::Wall,
            },
            BoundaryEdge {
                vertices: [2, 0],
                region: Region::Wall,
            },
        ],
        2.0,
        2.0,
    )
    .unwrap();
    let area = 0.5 * ((x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]));
    let b = [y[1] - y[2], y[2] - y[0], y[0] - y[1]];
    let c = [x[2] - x[1], x[0] - x[2], x[1] - x[0]];
    let expected: Vec<Vec<f64>> = (0..3)
        .map(|i| (0..3).map(|j| (b[i] * b[j] + c[i] * c[j]) / (4.0 * area)).collect())
        .collect();
    assert_matrix(&assemble_stiffness(&mesh, |_, _| 1.0, &[]).unwrap(), &expected);
}

#[test]
fn stiffness_coefficient_is_frozen_at_the_centroid() {
    let mesh = reference_triangle();
    let state = [0.0, 3.0, 6.0];
    let k = assemble_stiffness(&mesh, |_, e| 1.0 + e[0], &[&state]).unwrap();
    let base = assemble_stiffness(&mesh, |_, _| 1.0, &[]).unwrap();
    let expected: Vec<Vec<f64>> = base
        .to_dense()
        .iter()
        .map(|r| r.iter().map(|v| 4.0 * v).collect())
        .collect();
    assert_matrix(&k, &expected);

    // A coefficient depending on position sees the centroid too.
    let k = assemble_stiffness(&mesh, |p, _| p[0] + p[1], &[]).unwrap();
    let expected: Vec<Vec<f64>> = base
        .to_dense()
        .iter()
        .map(|r| r.iter().map(|v| v * 2.0 / 3.0).collect())
        .collect();
    assert_matrix(&k, &expected);
}

#[test]
fn edge_mass_fixture() {
    let mesh = reference_triangle();
    let h = 2f64.sqrt();
    let m = assemble_boundary_form(&mesh, &[Region::Anode], |_, _| 1.0, None).unwrap();
    let expected = vec![vec![0.0; 3], vec![0.0, h / 3.0, h / 6.0], vec![0.0, h / 6.0, h / 3.0]];
    assert_matrix(&m, &expected);

    let state = [1.0; 3];
    let cubic = assemble_boundary_form(&mesh, &[Region::Anode], |_, e| e.abs().powi(3), Some(&state)).unwrap();
    assert_matrix(&cubic, &expected);

    let empty = assemble_boundary_form(&mesh, &[], |_, _| 1.0, None).unwrap();
    assert_matrix(&empty, &[vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]]);
}

#[test]
fn boundary_load_integrals() {
    let mesh = unit_square(4);
    let total = |f: &tecsim_core::fem::Field| f.values().iter().sum::<f64>();
    let ones = assemble_boundary_load(&mesh, &Region::ALL, |_, _| 1.0);
    assert!((total(&ones) - 4.0).abs() < 1e-13);
    let zero = assemble_boundary_load(&mesh, &Region::ALL, |_, _| 0.0);
    assert!(zero.values().iter().all(|&v| v == 0.0));
    // The bottom side is the only part of the wall with y = 0.
    let bottom = assemble_boundary_load(&mesh, &[Region::Wall], |p, _| if p[1] == 0.0 { p[0] } else { 0.0 });
    assert!((total(&bottom) - 0.5).abs() < 1e-14);
}
