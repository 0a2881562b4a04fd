use super::element_gradients;
use super::quadrature::{GAUSS4, TRI7};
use crate::mesh::{Mesh, Point, Region};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub h1_semi: f64,
}

impl Norms {
    pub fn of(mesh: &Mesh, u: &[f64]) -> Self {
        Norms {
            l2: l2_norm(mesh, u),
            h1_semi: h1_seminorm(mesh, u),
        }
    }
}

/// Exact L2 norm of a P1 field.
pub fn l2_norm(mesh: &Mesh, u: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (k, t) in mesh.triangles().iter().enumerate() {
        let v = [u[t[0]], u[t[1]], u[t[2]]];
        let s = v[0] + v[1] + v[2];
        let sq = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        sum += mesh.signed_area(k) / 12.0 * (sq + s * s);
    }
    sum.sqrt()
}

/// Exact L2 norm of the gradient of a P1 field.
pub fn h1_seminorm(mesh: &Mesh, u: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (k, t) in mesh.triangles().iter().enumerate() {
        let (area, g) = element_gradients(&mesh.triangle_points(k));
        let gx = u[t[0]] * g[0][0] + u[t[1]] * g[1][0] + u[t[2]] * g[2][0];
        let gy = u[t[0]] * g[0][1] + u[t[1]] * g[1][1] + u[t[2]] * g[2][1];
        sum += area * (gx * gx + gy * gy);
    }
    sum.sqrt()
}

/// `(∫ |f|^p ds)^(1/p)` over the edges of `regions`, four-point Gauss per edge.
pub fn boundary_lp_norm_of(mesh: &Mesh, regions: &[Region], f: impl Fn(Point, Region) -> f64, p: f64) -> f64 {
    let mut sum = 0.0;
    for edge in mesh.boundary_edges().iter().filter(|e| regions.contains(&e.region)) {
        let [a, b] = edge.vertices;
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let len = mesh.edge_length(edge);
        for &(s, w) in &GAUSS4 {
            let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            sum += w * len * f(x, edge.region).abs().powf(p);
        }
    }
    sum.powf(1.0 / p)
}

/// Boundary Lp norm of the trace of a P1 field.
pub fn boundary_lp_norm(mesh: &Mesh, regions: &[Region], u: &[f64], p: f64) -> f64 {
    let mut sum = 0.0;
    for edge in mesh.boundary_edges().iter().filter(|e| regions.contains(&e.region)) {
        let [a, b] = edge.vertices;
        let len = mesh.edge_length(edge);
        for &(s, w) in &GAUSS4 {
            sum += w * len * ((1.0 - s) * u[a] + s * u[b]).abs().powf(p);
        }
    }
    sum.powf(1.0 / p)
}

/// L2 distance between a P1 field and a function, seven-point rule per triangle.
pub fn l2_error(mesh: &Mesh, u: &[f64], exact: impl Fn(Point) -> f64) -> f64 {
    let mut sum = 0.0;
    for (k, t) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_points(k);
        let area = mesh.signed_area(k);
        for (l, w) in &TRI7 {
            let x = [
                l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
                l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
            ];
            let uh = l[0] * u[t[0]] + l[1] * u[t[1]] + l[2] * u[t[2]];
            let e = uh - exact(x);
            sum += w * area * e * e;
        }
    }
    sum.sqrt()
}
