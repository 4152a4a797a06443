//! Sparse direct solves and Newton's method.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, MatMut};
use thiserror::Error;

use crate::fem::{Pattern, SparseMatrix};
use crate::math::{norm2, norm_inf};

/// Relative residual accepted from a direct solve.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("right-hand side has length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is numerically singular near pivot {pivot}")]
    Singular { pivot: usize },
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("Newton did not converge in {iterations} iterations, last residual {residual:e}")]
    NewtonDiverged {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
    #[error("invalid Newton configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Sparse LU with a cached symbolic analysis. Matrices sharing one pattern
/// reuse the ordering and elimination structure.
#[derive(Default)]
pub struct SparseLu {
    symbolic: Option<(Arc<Pattern>, SymbolicLu<usize>)>,
}

impl core::fmt::Debug for SparseLu {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SparseLu")
            .field("cached", &self.symbolic.is_some())
            .finish()
    }
}

impl SparseLu {
    pub fn new() -> Self {
        Self::default()
    }

    /// Solve `a x = b`.
    pub fn solve(&mut self, a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>, SolveError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(SolveError::NotSquare {
                rows: n,
                cols: a.ncols(),
            });
        }
        if b.len() != n {
            return Err(SolveError::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        // CSR of `a` read as CSC is `a^T`; factor that and solve transposed.
        let sym = SymbolicSparseColMatRef::new_checked(n, n, a.row_ptr(), None, a.col_idx());
        let reuse = matches!(&self.symbolic, Some((p, _)) if Arc::ptr_eq(p, a.pattern()) || **p == **a.pattern());
        if !reuse {
            let s = SymbolicLu::try_new(sym).map_err(|e| SolveError::Factorization(format_err(e)))?;
            self.symbolic = Some((a.pattern().clone(), s));
        }
        let symbolic = self.symbolic.as_ref().unwrap().1.clone();
        let lu = Lu::try_new_with_symbolic(symbolic, SparseColMatRef::new(sym, a.values()))
            .map_err(|e| match e {
                faer::sparse::linalg::LuError::SymbolicSingular { index } => {
                    SolveError::Singular { pivot: index }
                }
                other => SolveError::Factorization(format_err(other)),
            })?;
        let solve = |rhs: &[f64]| {
            let mut x = rhs.to_vec();
            lu.solve_transpose_in_place_with_conj(
                Conj::No,
                MatMut::from_column_major_slice_mut(&mut x, n, 1),
            );
            x
        };
        let mut x = solve(b);
        if let Some(p) = x.iter().position(|v| !v.is_finite()) {
            return Err(SolveError::Singular { pivot: p });
        }
        let a_norm = a.norm_inf();
        let b_norm = norm_inf(b);
        let mut r = residual(a, &x, b);
        if !accepted(&r, a_norm, &x, b_norm) {
            let dx = solve(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
            r = residual(a, &x, b);
            if x.iter().any(|v| !v.is_finite()) || !accepted(&r, a_norm, &x, b_norm) {
                let worst = r
                    .iter()
                    .enumerate()
                    .fold((0, -1.0), |acc, (i, v)| {
                        if !(v.abs() <= acc.1) {
                            (i, v.abs())
                        } else {
                            acc
                        }
                    })
                    .0;
                return Err(SolveError::Singular { pivot: worst });
            }
        }
        Ok(x)
    }
}

fn format_err(e: impl core::fmt::Debug) -> String {
    alloc::format!("{e:?}")
}

/// `b - a x`
fn residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let ax = a.mul_vec(x);
    b.iter().zip(&ax).map(|(b, ax)| b - ax).collect()
}

fn accepted(r: &[f64], a_norm: f64, x: &[f64], b_norm: f64) -> bool {
    let r_norm = norm_inf(r);
    r_norm.is_finite() && r_norm <= SOLVE_TOLERANCE * (a_norm * norm_inf(x) + b_norm)
}

/// One-shot sparse direct solve.
pub fn sparse_solve(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>, SolveError> {
    SparseLu::new().solve(a, b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
    pub damping: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_iter: 20,
            damping: 1.0,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(SolveError::InvalidConfig("tolerances must be positive"));
        }
        if self.max_iter == 0 {
            return Err(SolveError::InvalidConfig("max_iter must be at least 1"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(SolveError::InvalidConfig("damping must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonResult {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// Residual norm at every iterate, starting with `x0`.
    pub history: Vec<f64>,
}

/// Newton's method on `F(x) = 0`. The callback returns `(F(x), F'(x))`.
pub fn newton_solve(
    f: impl FnMut(&[f64]) -> (Vec<f64>, SparseMatrix),
    x0: Vec<f64>,
    cfg: &NewtonConfig,
) -> Result<NewtonResult, SolveError> {
    newton_solve_with(&mut SparseLu::new(), f, x0, cfg)
}

/// [`newton_solve`] reusing a factorization cache across calls.
pub fn newton_solve_with(
    lu: &mut SparseLu,
    mut f: impl FnMut(&[f64]) -> (Vec<f64>, SparseMatrix),
    x0: Vec<f64>,
    cfg: &NewtonConfig,
) -> Result<NewtonResult, SolveError> {
    cfg.validate()?;
    let mut x = x0;
    let mut history = Vec::new();
    let mut tol = cfg.abs_tol;
    for k in 0..=cfg.max_iter {
        let (r, j) = f(&x);
        let rn = norm2(&r);
        history.push(rn);
        if k == 0 {
            tol = tol.max(cfg.rel_tol * rn);
        }
        if rn <= tol {
            return Ok(NewtonResult {
                solution: x,
                iterations: k,
                history,
            });
        }
        if k == cfg.max_iter || !rn.is_finite() {
            break;
        }
        let dx = lu.solve(&j, &r)?;
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi -= cfg.damping * di;
        }
    }
    Err(SolveError::NewtonDiverged {
        iterations: history.len() - 1,
        residual: *history.last().unwrap(),
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn identity_returns_rhs() {
        let b = vec![1.0, -2.0, 3.5];
        assert_eq!(sparse_solve(&SparseMatrix::identity(3), &b).unwrap(), b);
    }

    #[test]
    fn duplicated_row_is_singular() {
        let a = SparseMatrix::from_dense(&[
            vec![1.0, 2.0, 0.0],
            vec![1.0, 2.0, 0.0],
            vec![0.0, 1.0, 3.0],
        ]);
        let e = sparse_solve(&a, &[1.0, 1.0, 1.0]).unwrap_err();
        assert!(matches!(e, SolveError::Singular { .. }), "{e:?}");
    }

    #[test]
    fn bad_config_is_rejected() {
        let cfg = NewtonConfig {
            damping: 0.0,
            ..Default::default()
        };
        let e = newton_solve(|x| (x.to_vec(), SparseMatrix::identity(1)), vec![1.0], &cfg);
        assert!(matches!(e, Err(SolveError::InvalidConfig(_))));
    }
}
