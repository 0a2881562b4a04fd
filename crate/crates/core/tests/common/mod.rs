#![allow(dead_code)]

use tecsim_core::mesh::{build_rect_mesh, BoundaryEdge, DomainSpec, Mesh, Region};

pub fn unit_square(nx: usize) -> Mesh {
    let spec = DomainSpec::from_sides(1.0, 1.0, Region::Wall, Region::Cathode, Region::Wall, Region::Anode);
    build_rect_mesh(&spec, nx, nx).unwrap()
}

/// Triangle (0,0), (1,0), (0,1) with bottom Wall, hypotenuse Anode and
/// left Cathode.
pub fn reference_triangle() -> Mesh {
    Mesh::from_parts(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        vec![[0, 1, 2]],
        vec![
            BoundaryEdge {
                vertices: [0, 1],
                region: Region::Wall,
            },
            BoundaryEdge {
                vertices: [1, 2],
                region: Region::Anode,
            },
            BoundaryEdge {
                vertices: [2, 0],
                region: Region::Cathode,
            },
        ],
        1.0,
        1.0,
    )
    .unwrap()
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `∫_T λ0^a λ1^b λ2^c = 2 |T| a! b! c! / (a + b + c + 2)!`.
pub fn barycentric_integral(exps: [u32; 3], area: f64) -> f64 {
    2.0 * area * exps.iter().map(|&e| factorial(e)).product::<f64>() / factorial(exps.iter().sum::<u32>() + 2)
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

/// Dense P1 matrices built from vertex coordinates alone: consistent mass,
/// lumped mass, Laplace stiffness and boundary edge mass over `regions`.
pub struct DenseP1 {
    pub mass: Vec<Vec<f64>>,
    pub lumped: Vec<f64>,
    pub stiffness: Vec<Vec<f64>>,
    pub edge_mass: Vec<Vec<f64>>,
}

impl DenseP1 {
    pub fn new(mesh: &Mesh, regions: &[Region]) -> Self {
        let n = mesh.num_vertices();
        let mut mass = vec![vec![0.0; n]; n];
        let mut stiffness = vec![vec![0.0; n]; n];
        let mut lumped = vec![0.0; n];
        let v = mesh.vertices();
        for t in mesh.triangles() {
            let (x, y): (Vec<f64>, Vec<f64>) = t.iter().map(|&i| (v[i][0], v[i][1])).unzip();
            let area = 0.5 * ((x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]));
            let bc: Vec<(f64, f64)> = (0..3)
                .map(|i| (y[(i + 1) % 3] - y[(i + 2) % 3], x[(i + 2) % 3] - x[(i + 1) % 3]))
                .collect();
            for i in 0..3 {
                lumped[t[i]] += area / 3.0;
                for j in 0..3 {
                    mass[t[i]][t[j]] += if i == j { area / 6.0 } else { area / 12.0 };
                    stiffness[t[i]][t[j]] += (bc[i].0 * bc[j].0 + bc[i].1 * bc[j].1) / (4.0 * area);
                }
            }
        }
        let mut edge_mass = vec![vec![0.0; n]; n];
        for e in mesh.boundary_edges().iter().filter(|e| regions.contains(&e.region)) {
            let [a, b] = e.vertices;
            let h = ((v[a][0] - v[b][0]).powi(2) + (v[a][1] - v[b][1]).powi(2)).sqrt();
            edge_mass[a][a] += h / 3.0;
            edge_mass[b][b] += h / 3.0;
            edge_mass[a][b] += h / 6.0;
            edge_mass[b][a] += h / 6.0;
        }
        DenseP1 {
            mass,
            lumped,
            stiffness,
            edge_mass,
        }
    }
}

pub fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}
