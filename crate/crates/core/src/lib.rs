//! Taylor-Hood finite elements for the 2D incompressible Navier-Stokes
//! equations with energy, momentum and angular momentum conserving (EMAC)
//! and skew-symmetric convection, integrated by a coupled Crank-Nicolson
//! scheme, a backward-Euler pressure-correction projection and a rotational
//! projection scheme.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the
//! command line live in the companion `emacfem-bench` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod fem;
pub mod linsolve;
pub mod mesh;
pub mod problems;
pub mod schemes;

pub(crate) mod math;

pub use diagnostics::{DiagnosticsRecord, Invariants, StepNorms};
pub use fem::{ConvectionForm, DofMap, FeField, QuadratureRule, SpaceKind, SparseMatrix};
pub use linsolve::{NewtonConfig, SolveError};
pub use mesh::{BoundaryTag, DiagonalPattern, DomainBox, Mesh, PeriodicMap};
pub use problems::{ProblemKind, ProblemSpec};
pub use schemes::{SchemeConfig, SchemeError, SchemeKind, TimeState};
