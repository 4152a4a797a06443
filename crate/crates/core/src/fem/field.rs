//! Discrete fields tagged with their space.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use super::dofmap::DofMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    /// Vector P2, `2 (V + E)` raw coefficients.
    Velocity,
    /// Scalar P1, `V` raw coefficients.
    Pressure,
    /// Scalar P2, `V + E` raw coefficients.
    Scalar,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("expected a {expected:?} field, got {found:?}")]
    WrongSpace { expected: SpaceKind, found: SpaceKind },
    #[error("field has {found} coefficients, space needs {expected}")]
    WrongLength { expected: usize, found: usize },
}

/// Raw coefficient vector of a finite element function.
#[derive(Debug, Clone, PartialEq)]
pub struct FeField {
    space: SpaceKind,
    coefficients: Vec<f64>,
}

impl FeField {
    pub fn new(space: SpaceKind, coefficients: Vec<f64>) -> Self {
        Self {
            space,
            coefficients,
        }
    }

    pub fn zeros(space: SpaceKind, dofmap: &DofMap) -> Self {
        Self::new(space, vec![0.0; raw_len(space, dofmap)])
    }

    /// Nodal interpolant of a vector field.
    pub fn interpolate_velocity(dofmap: &DofMap, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let mut c = Vec::with_capacity(dofmap.n_velocity());
        for &x in &dofmap.nodes().coords {
            c.extend_from_slice(&f(x));
        }
        Self::new(SpaceKind::Velocity, c)
    }

    /// Nodal interpolant of a scalar field into the P1 pressure space.
    pub fn interpolate_pressure(dofmap: &DofMap, f: impl Fn([f64; 2]) -> f64) -> Self {
        let nodes = dofmap.nodes();
        let c = nodes.coords[..nodes.n_vertices].iter().map(|&x| f(x)).collect();
        Self::new(SpaceKind::Pressure, c)
    }

    /// Nodal interpolant of a scalar field into the P2 scalar space.
    pub fn interpolate_scalar(dofmap: &DofMap, f: impl Fn([f64; 2]) -> f64) -> Self {
        let c = dofmap.nodes().coords.iter().map(|&x| f(x)).collect();
        Self::new(SpaceKind::Scalar, c)
    }

    pub fn space(&self) -> SpaceKind {
        self.space
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coefficients
    }

    pub fn expect(&self, space: SpaceKind, dofmap: &DofMap) -> Result<(), FieldError> {
        if self.space != space {
            return Err(FieldError::WrongSpace {
                expected: space,
                found: self.space,
            });
        }
        let n = raw_len(space, dofmap);
        if self.len() != n {
            return Err(FieldError::WrongLength {
                expected: n,
                found: self.len(),
            });
        }
        Ok(())
    }

    /// Twelve local velocity coefficients of cell `t`, node-major.
    pub fn cell_velocity(&self, dofmap: &DofMap, t: usize) -> [f64; 12] {
        let n = &dofmap.nodes().cell_nodes[t];
        let mut out = [0.0; 12];
        for a in 0..6 {
            out[2 * a] = self.coefficients[2 * n[a]];
            out[2 * a + 1] = self.coefficients[2 * n[a] + 1];
        }
        out
    }

    /// Local coefficients of a scalar P2 field on cell `t`.
    pub fn cell_scalar(&self, dofmap: &DofMap, t: usize) -> [f64; 6] {
        let n = &dofmap.nodes().cell_nodes[t];
        core::array::from_fn(|a| self.coefficients[n[a]])
    }

    /// Local coefficients of a pressure field on cell `t`.
    pub fn cell_pressure(&self, dofmap: &DofMap, t: usize) -> [f64; 3] {
        let n = &dofmap.nodes().cell_nodes[t];
        [
            self.coefficients[n[0]],
            self.coefficients[n[1]],
            self.coefficients[n[2]],
        ]
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &FeField) {
        assert_eq!(self.space, other.space);
        for (a, b) in self.coefficients.iter_mut().zip(&other.coefficients) {
            *a += s * b;
        }
    }
}

fn raw_len(space: SpaceKind, dofmap: &DofMap) -> usize {
    match space {
        SpaceKind::Velocity => dofmap.n_velocity(),
        SpaceKind::Pressure => dofmap.n_pressure(),
        SpaceKind::Scalar => dofmap.n_nodes(),
    }
}
