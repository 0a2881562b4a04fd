use super::sparse::{SparseLu, SparseMatrix};
use crate::{Error, Result};

/// Linear mean-value constraint `weightsᵀ x_block = target`, enforced by a
/// Lagrange multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct Gauge {
    pub block: usize,
    pub weights: Vec<f64>,
    pub target: f64,
}

/// Square grid of sparse blocks over fields that share one mesh, plus
/// gauge rows. Blocks that are never added are zero.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    n_blocks: usize,
    block_dim: usize,
    blocks: Vec<Option<SparseMatrix>>,
    rhs: Vec<Vec<f64>>,
    gauges: Vec<Gauge>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSolution {
    pub fields: Vec<Vec<f64>>,
    pub multipliers: Vec<f64>,
    /// Normwise relative residual of the augmented system.
    pub residual: f64,
}

/// Largest accepted normwise relative residual of a block solve.
pub const SOLVE_TOL: f64 = 1e-10;

impl BlockSystem {
    pub fn new(n_blocks: usize, block_dim: usize) -> Self {
        BlockSystem {
            n_blocks,
            block_dim,
            blocks: vec![None; n_blocks * n_blocks],
            rhs: vec![vec![0.0; block_dim]; n_blocks],
            gauges: Vec::new(),
        }
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    /// Adds `scale * m` to block `(row, col)`.
    pub fn add_block(&mut self, row: usize, col: usize, m: &SparseMatrix, scale: f64) {
        assert_eq!(
            (m.nrows(), m.ncols()),
            (self.block_dim, self.block_dim),
            "block dimension mismatch"
        );
        let slot = &mut self.blocks[row * self.n_blocks + col];
        *slot = Some(match slot.take() {
            Some(existing) => existing.add_scaled(m, scale),
            None => m.scaled(scale),
        });
    }

    pub fn block(&self, row: usize, col: usize) -> Option<&SparseMatrix> {
        self.blocks[row * self.n_blocks + col].as_ref()
    }

    pub fn add_rhs(&mut self, row: usize, values: &[f64], scale: f64) {
        assert_eq!(values.len(), self.block_dim);
        for (r, v) in self.rhs[row].iter_mut().zip(values) {
            *r += scale * v;
        }
    }

    pub fn rhs(&self, row: usize) -> &[f64] {
        &self.rhs[row]
    }

    pub fn add_gauge(&mut self, gauge: Gauge) {
        assert!(gauge.block < self.n_blocks);
        assert_eq!(gauge.weights.len(), self.block_dim);
        self.gauges.push(gauge);
    }

    pub fn gauges(&self) -> &[Gauge] {
        &self.gauges
    }

    pub fn dim(&self) -> usize {
        self.n_blocks * self.block_dim + self.gauges.len()
    }

    /// The augmented matrix `[[L, Cᵀ], [C, 0]]` with gauge rows `C`.
    pub fn augmented_matrix(&self) -> SparseMatrix {
        let n = self.block_dim;
        let base = self.n_blocks * n;
        let mut triplets = Vec::new();
        for r in 0..self.n_blocks {
            for c in 0..self.n_blocks {
                if let Some(b) = self.block(r, c) {
                    triplets.extend(b.iter().map(|(i, j, v)| (r * n + i, c * n + j, v)));
                }
            }
        }
        for (k, g) in self.gauges.iter().enumerate() {
            for (i, &w) in g.weights.iter().enumerate() {
                if w != 0.0 {
                    triplets.push((base + k, g.block * n + i, w));
                    triplets.push((g.block * n + i, base + k, w));
                }
            }
        }
        SparseMatrix::from_triplets(self.dim(), self.dim(), &triplets, false)
    }

    pub fn augmented_rhs(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.rhs.iter().flatten().copied().collect();
        b.extend(self.gauges.iter().map(|g| g.target));
        b
    }
}

fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> (Vec<f64>, f64) {
    let ax = a.matvec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = a.norm_inf() * inf(x) + inf(b);
    let rel = if scale > 0.0 { inf(&r) / scale } else { inf(&r) };
    (r, rel)
}

/// Solves the augmented system by sparse LU with up to three rounds of
/// iterative refinement. Non-finite output or a residual above
/// [`SOLVE_TOL`] is reported as a singular system.
pub fn solve_block(system: &BlockSystem) -> Result<BlockSolution> {
    let a = system.augmented_matrix();
    let b = system.augmented_rhs();
    let lu = SparseLu::factor(&a)?;
    let mut x = lu.solve(&b);
    let mut refinements = 0;
    let residual = loop {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem("factorization produced non-finite values".into()));
        }
        let (r, rel) = relative_residual(&a, &x, &b);
        if rel <= 1e-14 || refinements == 3 {
            break rel;
        }
        let dx = lu.solve(&r);
        x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
        refinements += 1;
    };
    if residual > SOLVE_TOL {
        return Err(Error::SingularSystem(format!(
            "relative residual {residual:e} after refinement"
        )));
    }
    let n = system.block_dim;
    let fields = (0..system.n_blocks).map(|k| x[k * n..(k + 1) * n].to_vec()).collect();
    let multipliers = x[system.n_blocks * n..].to_vec();
    Ok(BlockSolution {
        fields,
        multipliers,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_blocks_return_the_rhs() {
        let mut sys = BlockSystem::new(2, 3);
        let id = SparseMatrix::identity(3);
        sys.add_block(0, 0, &id, 1.0);
        sys.add_block(1, 1, &id, 1.0);
        sys.add_rhs(0, &[1.0, 2.0, 3.0], 1.0);
        sys.add_rhs(1, &[-1.0, 0.5, 0.0], 1.0);
        let sol = solve_block(&sys).unwrap();
        assert_eq!(sol.fields[0], vec![1.0, 2.0, 3.0]);
        assert_eq!(sol.fields[1], vec![-1.0, 0.5, 0.0]);
    }

    #[test]
    fn singular_system_is_detected() {
        let mut sys = BlockSystem::new(1, 2);
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)], true);
        sys.add_block(0, 0, &m, 1.0);
        sys.add_rhs(0, &[1.0, 2.0], 1.0);
        assert!(matches!(solve_block(&sys), Err(Error::SingularSystem(_))));
    }
}
