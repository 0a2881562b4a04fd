//! P1 finite elements: assembly, norms, block solves and mesh estimates of
//! the trace and Poincaré constants.

mod assembly;
mod block;
mod constants;
mod norms;
pub mod quadrature;
mod sparse;

pub use assembly::{
    assemble_boundary_form, assemble_boundary_load, assemble_consistent_mass, assemble_lumped_mass, assemble_mass,
    assemble_stiffness, boundary_weights, element_gradients, ASSEMBLY_CHUNK,
};
pub use block::{solve_block, BlockSolution, BlockSystem, Gauge, SOLVE_TOL};
pub use constants::{estimate_k2, estimate_p2, EIGEN_MAX_ITER, EIGEN_TOL};
pub use norms::{boundary_lp_norm, boundary_lp_norm_of, h1_seminorm, l2_error, l2_norm, Norms};
pub use sparse::{SparseLu, SparseMatrix};

use crate::mesh::{Mesh, Point};

/// Nodal P1 coefficients, one per mesh vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
}

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Field { values }
    }

    pub fn zeros(n: usize) -> Self {
        Field { values: vec![0.0; n] }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Field { values: vec![c; n] }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Self {
        Field {
            values: mesh.vertices().iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl From<Vec<f64>> for Field {
    fn from(values: Vec<f64>) -> Self {
        Field { values }
    }
}

impl std::ops::Index<usize> for Field {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}
