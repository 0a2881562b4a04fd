use super::assembly::{assemble_boundary_form, assemble_consistent_mass, assemble_stiffness};
use super::sparse::{SparseLu, SparseMatrix};
use crate::mesh::{Mesh, Region};
use crate::{Error, Result};

/// Relative change of the Rayleigh quotient that stops the iterations.
pub const EIGEN_TOL: f64 = 1e-8;
pub const EIGEN_MAX_ITER: usize = 5000;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64], gram: &SparseMatrix) {
    let s = gram.quad_form(v).sqrt();
    v.iter_mut().for_each(|x| *x /= s);
}

/// Mesh estimate of the Poincaré constant for mean-zero fields: `1/√λ₁`
/// with `λ₁` the smallest nonzero eigenvalue of the Neumann pencil
/// `K v = λ M v`, found by inverse iteration on the mean-zero subspace.
pub fn estimate_p2(mesh: &Mesh) -> Result<f64> {
    let n = mesh.num_vertices();
    if n < 2 {
        return Err(Error::InvalidInput(
            "Poincaré estimate needs at least two vertices".into(),
        ));
    }
    let stiffness = assemble_stiffness(mesh, |_, _| 1.0, &[])?;
    let mass = assemble_consistent_mass(mesh);
    let moments = mass.row_sums();
    let area: f64 = moments.iter().sum();

    let mut triplets: Vec<(usize, usize, f64)> = stiffness.iter().collect();
    for (i, &w) in moments.iter().enumerate() {
        triplets.push((i, n, w));
        triplets.push((n, i, w));
    }
    let lu = SparseLu::factor(&SparseMatrix::from_triplets(n + 1, n + 1, &triplets, true))?;

    let deflate = |v: &mut [f64]| {
        let mean = dot(&moments, v) / area;
        v.iter_mut().for_each(|x| *x -= mean);
    };
    let (w, h) = (mesh.width(), mesh.height());
    let mut v: Vec<f64> = mesh
        .vertices()
        .iter()
        .map(|p| p[0] / w + 0.37 * p[1] / h + 0.11 * (p[0] / w) * (p[1] / h))
        .collect();
    deflate(&mut v);
    normalize(&mut v, &mass);
    let mut rho_old = stiffness.quad_form(&v);
    for _ in 0..EIGEN_MAX_ITER {
        let mut rhs = mass.matvec(&v);
        rhs.push(0.0);
        let y = lu.solve(&rhs);
        v.copy_from_slice(&y[..n]);
        deflate(&mut v);
        normalize(&mut v, &mass);
        let rho = stiffness.quad_form(&v);
        if !rho.is_finite() {
            break;
        }
        if (rho - rho_old).abs() <= EIGEN_TOL * rho {
            return Ok(1.0 / rho.sqrt());
        }
        rho_old = rho;
    }
    Err(Error::EigenNoConvergence {
        what: "Poincaré constant",
        iterations: EIGEN_MAX_ITER,
    })
}

/// Mesh estimate of the trace constant: `√μ_max` for the pencil
/// `B v = μ (M + K) v` with `B` the boundary mass over `trace_regions`,
/// found by power iteration.
pub fn estimate_k2(mesh: &Mesh, trace_regions: &[Region]) -> Result<f64> {
    if mesh.regions_measure(trace_regions) <= 0.0 {
        return Err(Error::InvalidInput(
            "trace estimate needs a nonempty boundary region".into(),
        ));
    }
    let gram = assemble_consistent_mass(mesh).add_scaled(&assemble_stiffness(mesh, |_, _| 1.0, &[])?, 1.0);
    let trace = assemble_boundary_form(mesh, trace_regions, |_, _| 1.0, None)?;
    let lu = SparseLu::factor(&gram)?;

    let mut v = vec![1.0; mesh.num_vertices()];
    normalize(&mut v, &gram);
    let mut mu_old = trace.quad_form(&v);
    for _ in 0..EIGEN_MAX_ITER {
        let mut y = lu.solve(&trace.matvec(&v));
        normalize(&mut y, &gram);
        v = y;
        let mu = trace.quad_form(&v);
        if !mu.is_finite() {
            break;
        }
        if (mu - mu_old).abs() <= EIGEN_TOL * mu {
            return Ok(mu.sqrt());
        }
        mu_old = mu;
    }
    Err(Error::EigenNoConvergence {
        what: "trace constant",
        iterations: EIGEN_MAX_ITER,
    })
}
