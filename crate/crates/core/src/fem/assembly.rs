use rayon::prelude::*;

use super::quadrature::GAUSS2;
use super::sparse::SparseMatrix;
use super::Field;
use crate::mesh::{Mesh, Point, Region};
use crate::{Error, Result};

/// Elements per parallel work unit. Chunks are concatenated in index order,
/// so assembled matrices are identical for every thread count.
pub const ASSEMBLY_CHUNK: usize = 2048;

type Triplets = Vec<(usize, usize, f64)>;

fn chunked<T, F>(n: usize, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(std::ops::Range<usize>, &mut Vec<T>) -> Result<()> + Sync,
{
    let parts: Vec<Result<Vec<T>>> = (0..n.div_ceil(ASSEMBLY_CHUNK))
        .into_par_iter()
        .map(|c| {
            let range = c * ASSEMBLY_CHUNK..((c + 1) * ASSEMBLY_CHUNK).min(n);
            let mut out = Vec::new();
            work(range, &mut out)?;
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for part in parts {
        all.extend(part?);
    }
    Ok(all)
}

fn finite(value: f64, what: &str, p: Point) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteCoefficient {
            what: what.to_string(),
            x: p[0],
            y: p[1],
        })
    }
}

/// Area and the constant gradients of the three barycentric basis functions.
pub fn element_gradients(p: &[Point; 3]) -> (f64, [[f64; 2]; 3]) {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let inv = 1.0 / det;
    let grads = [
        [(p[1][1] - p[2][1]) * inv, (p[2][0] - p[1][0]) * inv],
        [(p[2][1] - p[0][1]) * inv, (p[0][0] - p[2][0]) * inv],
        [(p[0][1] - p[1][1]) * inv, (p[1][0] - p[0][0]) * inv],
    ];
    (0.5 * det, grads)
}

fn centroid(p: &[Point; 3]) -> Point {
    [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0]
}

/// Consistent mass matrix `∫ φ_a φ_b` from the closed-form element matrix
/// `area/12 · [[2,1,1],[1,2,1],[1,1,2]]`.
pub fn assemble_consistent_mass(mesh: &Mesh) -> SparseMatrix {
    let n = mesh.num_vertices();
    let triplets = chunked(mesh.num_triangles(), |range, out: &mut Triplets| {
        for k in range {
            let t = mesh.triangles()[k];
            let a = mesh.signed_area(k) / 12.0;
            for i in 0..3 {
                for j in 0..3 {
                    out.push((t[i], t[j], if i == j { 2.0 * a } else { a }));
                }
            }
        }
        Ok(())
    })
    .expect("closed-form mass cannot fail");
    SparseMatrix::from_triplets(n, n, &triplets, true)
}

/// Weighted mass matrix `∫ w(x, u) φ_a φ_b` with the three-point
/// edge-midpoint rule: exact for constant weights, and its row sums are
/// exact for weights linear on each triangle.
pub fn assemble_mass<W>(mesh: &Mesh, weight: W, state: Option<&[f64]>) -> Result<SparseMatrix>
where
    W: Fn(Point, f64) -> f64 + Sync,
{
    let n = mesh.num_vertices();
    if let Some(s) = state {
        check_len(s, n)?;
    }
    // Basis values at the midpoints of edges (0,1), (1,2), (2,0).
    const PHI: [[f64; 3]; 3] = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];
    let triplets = chunked(mesh.num_triangles(), |range, out: &mut Triplets| {
        for k in range {
            let t = mesh.triangles()[k];
            let p = mesh.triangle_points(k);
            let area = mesh.signed_area(k);
            let mut w = [0.0; 3];
            for (q, wq) in w.iter_mut().enumerate() {
                let (a, b) = (q, (q + 1) % 3);
                let x = [0.5 * (p[a][0] + p[b][0]), 0.5 * (p[a][1] + p[b][1])];
                let u = state.map_or(0.0, |s| 0.5 * (s[t[a]] + s[t[b]]));
                *wq = finite(weight(x, u), "mass weight", x)? * area / 3.0;
            }
            for i in 0..3 {
                for j in 0..3 {
                    let v: f64 = (0..3).map(|q| w[q] * PHI[q][i] * PHI[q][j]).sum();
                    out.push((t[i], t[j], v));
                }
            }
        }
        Ok(())
    })?;
    Ok(SparseMatrix::from_triplets(n, n, &triplets, true))
}

/// Row sums of the consistent mass matrix: `area/3` per incident triangle.
pub fn assemble_lumped_mass(mesh: &Mesh) -> Vec<f64> {
    let mut lumped = vec![0.0; mesh.num_vertices()];
    for (k, t) in mesh.triangles().iter().enumerate() {
        let a = mesh.signed_area(k) / 3.0;
        for &v in t {
            lumped[v] += a;
        }
    }
    lumped
}

/// Stiffness matrix `∫ c(x, u(x)) ∇φ_b · ∇φ_a` with the coefficient frozen
/// at the triangle centroid. `state` holds the nodal values of every field
/// the coefficient depends on; the coefficient receives their centroid
/// values in the same order.
pub fn assemble_stiffness<C>(mesh: &Mesh, coeff: C, state: &[&[f64]]) -> Result<SparseMatrix>
where
    C: Fn(Point, &[f64]) -> f64 + Sync,
{
    let n = mesh.num_vertices();
    for s in state {
        check_len(s, n)?;
    }
    let triplets = chunked(mesh.num_triangles(), |range, out: &mut Triplets| {
        let mut local = vec![0.0; state.len()];
        for k in range {
            let t = mesh.triangles()[k];
            let p = mesh.triangle_points(k);
            for (l, s) in local.iter_mut().zip(state) {
                *l = (s[t[0]] + s[t[1]] + s[t[2]]) / 3.0;
            }
            let c = centroid(&p);
            let value = finite(coeff(c, &local), "stiffness coefficient", c)?;
            let (area, g) = element_gradients(&p);
            let scale = value * area;
            for i in 0..3 {
                for j in 0..3 {
                    out.push((t[i], t[j], scale * (g[i][0] * g[j][0] + g[i][1] * g[j][1])));
                }
            }
        }
        Ok(())
    })?;
    Ok(SparseMatrix::from_triplets(n, n, &triplets, true))
}

fn edges_in<'a>(mesh: &'a Mesh, regions: &'a [Region]) -> impl Iterator<Item = &'a crate::mesh::BoundaryEdge> + 'a {
    mesh.boundary_edges()
        .iter()
        .filter(move |e| regions.contains(&e.region))
}

/// Boundary mass `∫ w(x, u) ψ_a ψ_b ds` over the edges of `regions`, with
/// two-point Gauss per edge.
pub fn assemble_boundary_form<W>(
    mesh: &Mesh,
    regions: &[Region],
    weight: W,
    state: Option<&[f64]>,
) -> Result<SparseMatrix>
where
    W: Fn(Point, f64) -> f64,
{
    let n = mesh.num_vertices();
    if let Some(s) = state {
        check_len(s, n)?;
    }
    let mut triplets = Vec::new();
    for edge in edges_in(mesh, regions) {
        let [a, b] = edge.vertices;
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let len = mesh.edge_length(edge);
        let mut m = [[0.0; 2]; 2];
        for &(s, w) in &GAUSS2 {
            let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            let u = state.map_or(0.0, |st| (1.0 - s) * st[a] + s * st[b]);
            let wq = finite(weight(x, u), "boundary weight", x)? * w * len;
            let psi = [1.0 - s, s];
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] += wq * psi[i] * psi[j];
                }
            }
        }
        let idx = [a, b];
        for i in 0..2 {
            for j in 0..2 {
                triplets.push((idx[i], idx[j], m[i][j]));
            }
        }
    }
    Ok(SparseMatrix::from_triplets(n, n, &triplets, true))
}

/// Load vector `∫ data ψ_a ds` over the edges of `regions`, two-point Gauss
/// per edge. The data function also receives the region of the edge.
pub fn assemble_boundary_load<D>(mesh: &Mesh, regions: &[Region], data: D) -> Field
where
    D: Fn(Point, Region) -> f64,
{
    let mut load = vec![0.0; mesh.num_vertices()];
    for edge in edges_in(mesh, regions) {
        let [a, b] = edge.vertices;
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let len = mesh.edge_length(edge);
        for &(s, w) in &GAUSS2 {
            let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            let f = data(x, edge.region) * w * len;
            load[a] += f * (1.0 - s);
            load[b] += f * s;
        }
    }
    Field::new(load)
}

/// `∫ ψ_a ds` over the edges of `regions`.
pub fn boundary_weights(mesh: &Mesh, regions: &[Region]) -> Vec<f64> {
    let mut w = vec![0.0; mesh.num_vertices()];
    for edge in edges_in(mesh, regions) {
        let half = 0.5 * mesh.edge_length(edge);
        w[edge.vertices[0]] += half;
        w[edge.vertices[1]] += half;
    }
    w
}

fn check_len(values: &[f64], n: usize) -> Result<()> {
    if values.len() != n {
        return Err(Error::InvalidInput(format!(
            "field has {} values, mesh has {n} vertices",
            values.len()
        )));
    }
    Ok(())
}
