//! Reduction of raw assembled operators to free unknowns.
//!
//! Dirichlet rows are dropped and their columns lifted into the right-hand
//! side, periodic slave rows and columns are summed into their masters, and
//! an optional zero-mean row and column close pure-Neumann pressure
//! problems. Scatter plans are built once per layout and reused, so a Newton
//! iteration only pays for copying values.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::dofmap::{ConstrainedSpace, DofTarget};
use super::sparse::{Pattern, SparseMatrix};

const NONE: usize = usize::MAX;

/// One raw block placed into the reduced system.
#[derive(Clone, Copy)]
pub struct Block<'a> {
    pub pattern: &'a Pattern,
    pub rows: &'a ConstrainedSpace,
    pub row_offset: usize,
    pub cols: &'a ConstrainedSpace,
    pub col_offset: usize,
    /// Place the transpose of the raw block.
    pub transpose: bool,
}

/// A reusable map from raw block entries to a reduced sparse pattern.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pattern: Arc<Pattern>,
    maps: Vec<Vec<usize>>,
    fixed_entries: Vec<(usize, f64)>,
}

impl ReducedSystem {
    /// `extra` lists constant entries `(row, col, value)` of the reduced
    /// matrix, such as multiplier couplings.
    pub fn new(n: usize, blocks: &[Block<'_>], extra: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut placed = Vec::with_capacity(blocks.len());
        for b in blocks {
            let mut dest = Vec::with_capacity(b.pattern.nnz());
            for i in 0..b.pattern.nrows() {
                for k in b.pattern.row_ptr()[i]..b.pattern.row_ptr()[i + 1] {
                    let j = b.pattern.col_idx()[k];
                    let (ri, cj) = if b.transpose { (j, i) } else { (i, j) };
                    let r = b.rows.free_index(ri);
                    let c = b.cols.free_index(cj);
                    match (r, c) {
                        (Some(r), Some(c)) => {
                            let (r, c) = (r + b.row_offset, c + b.col_offset);
                            rows[r].push(c);
                            dest.push((r, c));
                        }
                        _ => dest.push((NONE, NONE)),
                    }
                }
            }
            placed.push(dest);
        }
        for &(r, c, _) in extra {
            rows[r].push(c);
        }
        let pattern = Arc::new(Pattern::from_rows(n, rows));
        let maps = placed
            .into_iter()
            .map(|d| {
                d.into_iter()
                    .map(|(r, c)| {
                        if r == NONE {
                            NONE
                        } else {
                            pattern.position(r, c).unwrap()
                        }
                    })
                    .collect()
            })
            .collect();
        let fixed_entries = extra
            .iter()
            .map(|&(r, c, v)| (pattern.position(r, c).unwrap(), v))
            .collect();
        Self {
            pattern,
            maps,
            fixed_entries,
        }
    }

    pub fn size(&self) -> usize {
        self.pattern.nrows()
    }

    pub fn pattern(&self) -> &Arc<Pattern> {
        &self.pattern
    }

    /// Reduced matrix from `scale * raw` contributions, one per block index.
    /// Raw matrices must use the pattern their block was built with.
    pub fn assemble(&self, terms: &[(usize, f64, &SparseMatrix)]) -> SparseMatrix {
        let mut out = SparseMatrix::zeros(self.pattern.clone());
        let vals = out.values_mut();
        for &(block, s, m) in terms {
            let map = &self.maps[block];
            assert_eq!(map.len(), m.nnz(), "raw matrix does not match block pattern");
            for (&dst, &v) in map.iter().zip(m.values()) {
                if dst != NONE {
                    vals[dst] += s * v;
                }
            }
        }
        for &(pos, v) in &self.fixed_entries {
            vals[pos] += v;
        }
        out
    }
}

/// A square system reduced to free unknowns, plus an optional multiplier.
#[derive(Debug, Clone)]
pub struct ReducedLinearSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    pub n_free: usize,
    pub multiplier: bool,
}

impl ReducedLinearSystem {
    /// Raw solution from a solution of the reduced system.
    pub fn expand(&self, space: &ConstrainedSpace, x: &[f64]) -> Vec<f64> {
        space.expand(&x[..self.n_free])
    }
}

/// Eliminate the constraints of `space` from `matrix x = rhs`.
///
/// With `zero_mean = Some(m)` one multiplier row and column are appended
/// enforcing `m . x = 0` on the raw coefficients.
pub fn apply_constraints(
    matrix: &SparseMatrix,
    rhs: &[f64],
    space: &ConstrainedSpace,
    zero_mean: Option<&[f64]>,
) -> ReducedLinearSystem {
    assert_eq!(matrix.shape(), (space.n_raw(), space.n_raw()));
    assert_eq!(rhs.len(), space.n_raw());
    let nf = space.n_free();
    let mut extra = Vec::new();
    if let Some(m) = zero_mean {
        let mf = space.restrict(m);
        for (k, &w) in mf.iter().enumerate() {
            if w != 0.0 {
                extra.push((k, nf, w));
                extra.push((nf, k, w));
            }
        }
    }
    let n = nf + usize::from(zero_mean.is_some());
    let sys = ReducedSystem::new(
        n,
        &[Block {
            pattern: matrix.pattern(),
            rows: space,
            row_offset: 0,
            cols: space,
            col_offset: 0,
            transpose: false,
        }],
        &extra,
    );
    let reduced = sys.assemble(&[(0, 1.0, matrix)]);
    let mut lifted = rhs.to_vec();
    for (i, j, v) in matrix.entries() {
        if let DofTarget::Fixed(g) = space.target(j) {
            lifted[i] -= v * g;
        }
    }
    let mut r = space.restrict(&lifted);
    if zero_mean.is_some() {
        r.push(0.0);
    }
    ReducedLinearSystem {
        matrix: reduced,
        rhs: r,
        n_free: nf,
        multiplier: zero_mean.is_some(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;

    #[test]
    fn dirichlet_values_are_lifted() {
        // 1D Laplacian on 4 nodes with u0 = 1, u3 = 2 fixed
        let a = SparseMatrix::from_dense(&[
            vec![2.0, -1.0, 0.0, 0.0],
            vec![-1.0, 2.0, -1.0, 0.0],
            vec![0.0, -1.0, 2.0, -1.0],
            vec![0.0, 0.0, -1.0, 2.0],
        ]);
        let fixed = BTreeMap::from([(0, 1.0), (3, 2.0)]);
        let s = ConstrainedSpace::new((0..4).collect(), &fixed);
        let r = apply_constraints(&a, &[0.0; 4], &s, None);
        assert_eq!(r.matrix.shape(), (2, 2));
        assert_eq!(r.rhs, vec![1.0, 2.0]);
        assert!(r.matrix.is_symmetric(0.0));
    }

    #[test]
    fn periodic_slave_is_folded() {
        let a = SparseMatrix::from_dense(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 5.0],
            vec![3.0, 5.0, 6.0],
        ]);
        let s = ConstrainedSpace::new(vec![0, 1, 0], &BTreeMap::new());
        let r = apply_constraints(&a, &[1.0, 1.0, 1.0], &s, None);
        // P^T A P with P = [[1,0],[0,1],[1,0]]
        assert_eq!(r.matrix.to_dense(), vec![vec![13.0, 7.0], vec![7.0, 4.0]]);
        assert_eq!(r.rhs, vec![2.0, 1.0]);
    }
}
