//! Conserved quantities, error norms and the per-step energy balance.

use alloc::vec::Vec;

use thiserror::Error;

use crate::fem::element::VectorPoint;
use crate::fem::{for_each_quad_point, DofMap, FeField, QuadratureRule, Trace};
use crate::math::sqrt;
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Invariants {
    /// `1/2 |u|^2`
    pub energy: f64,
    pub momentum: [f64; 2],
    /// `int (x1 u2 - x2 u1)` about the given center.
    pub angular_momentum: f64,
    /// `|div u|` in L2.
    pub div_norm: f64,
}

/// Squared norms gathered during one time step for the energy balance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepNorms {
    /// `|u~^n|^2` for projection schemes, `|u^n|^2` otherwise.
    pub prev_sq: f64,
    /// `|u~^{n+1}|^2`, or `|u^{n+1}|^2` for coupled schemes.
    pub new_sq: f64,
    /// `|u~^{n+1} - u^n|^2`; zero for coupled schemes.
    pub incr_sq: f64,
    /// `nu |grad v|^2 + gamma |div v|^2` of the field carrying the viscous
    /// and grad-div terms.
    pub dissipation: f64,
    /// `(f, v)` for the same field.
    pub forcing_work: f64,
}

impl StepNorms {
    /// Left minus right side of the discrete energy balance; nonpositive
    /// for dissipative steps.
    pub fn slack(&self, dt: f64) -> f64 {
        0.5 * (self.new_sq - self.prev_sq + self.incr_sq) + dt * self.dissipation
            - dt * self.forcing_work
    }
}

/// One row of the diagnostics time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub t: f64,
    pub invariants: Invariants,
    pub l2_error: Option<f64>,
    pub h1_error: Option<f64>,
    pub slack: Option<f64>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagnosticsError {
    #[error("step {0} carries no intermediate-field norms")]
    MissingNorms(usize),
}

/// Energy, momentum, angular momentum and divergence norm of `u`.
pub fn compute_invariants(
    u: &FeField,
    dofmap: &DofMap,
    mesh: &Mesh,
    quad: &QuadratureRule,
    center: [f64; 2],
) -> Invariants {
    let mut inv = Invariants::default();
    let mut div_sq = 0.0;
    for_each_quad_point(mesh, quad, |_, qp| {
        let p = VectorPoint::evaluate(&u.cell_velocity(dofmap, qp.cell), &qp.phi, &qp.dphi);
        let [u1, u2] = p.value;
        let (x1, x2) = (qp.x[0] - center[0], qp.x[1] - center[1]);
        inv.energy += qp.weight * 0.5 * (u1 * u1 + u2 * u2);
        inv.momentum[0] += qp.weight * u1;
        inv.momentum[1] += qp.weight * u2;
        inv.angular_momentum += qp.weight * (x1 * u2 - x2 * u1);
        div_sq += qp.weight * p.divergence() * p.divergence();
    });
    inv.div_norm = sqrt(div_sq);
    inv
}

/// Squared L2 norm and squared gradient norm of a velocity field.
pub fn velocity_norms_sq(u: &FeField, dofmap: &DofMap, mesh: &Mesh, quad: &QuadratureRule) -> (f64, f64) {
    let (mut l2, mut h1) = (0.0, 0.0);
    for_each_quad_point(mesh, quad, |_, qp| {
        let p = VectorPoint::evaluate(&u.cell_velocity(dofmap, qp.cell), &qp.phi, &qp.dphi);
        l2 += qp.weight * (p.value[0] * p.value[0] + p.value[1] * p.value[1]);
        h1 += qp.weight * p.grad.iter().flatten().map(|g| g * g).sum::<f64>();
    });
    (l2, h1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    /// Present when the exact gradient is known.
    pub h1: Option<f64>,
}

/// `|u - exact|` and `|grad (u - exact)|` by element quadrature. Pass a rule
/// of degree 8 or more for trigonometric fields.
pub fn compute_errors(
    u: &FeField,
    dofmap: &DofMap,
    mesh: &Mesh,
    quad: &QuadratureRule,
    exact: &dyn Fn([f64; 2]) -> [f64; 2],
    exact_gradient: Option<&dyn Fn([f64; 2]) -> [[f64; 2]; 2]>,
) -> ErrorNorms {
    let (mut l2, mut h1) = (0.0, 0.0);
    for_each_quad_point(mesh, quad, |_, qp| {
        let p = VectorPoint::evaluate(&u.cell_velocity(dofmap, qp.cell), &qp.phi, &qp.dphi);
        let e = exact(qp.x);
        let (d0, d1) = (p.value[0] - e[0], p.value[1] - e[1]);
        l2 += qp.weight * (d0 * d0 + d1 * d1);
        if let Some(g) = exact_gradient {
            let ge = g(qp.x);
            for i in 0..2 {
                for j in 0..2 {
                    let d = p.grad[i][j] - ge[i][j];
                    h1 += qp.weight * d * d;
                }
            }
        }
    });
    ErrorNorms {
        l2: sqrt(l2),
        h1: exact_gradient.map(|_| sqrt(h1)),
    }
}

/// Per-step energy slack for a stream of step norms; `None` entries mark
/// steps that did not record the intermediate field.
pub fn check_energy_inequality(
    norms: &[Option<StepNorms>],
    dt: f64,
) -> Result<Vec<f64>, DiagnosticsError> {
    norms
        .iter()
        .enumerate()
        .map(|(k, n)| {
            n.map(|n| n.slack(dt))
                .ok_or(DiagnosticsError::MissingNorms(k))
        })
        .collect()
}

/// Global stability bound for unforced runs:
/// `|u~^M|^2 + sum |u~ - u^n|^2 + dt sum nu |grad u~|^2 - |u^0|^2`,
/// nonpositive when the bound holds.
pub fn stability_excess(u0_sq: f64, norms: &[StepNorms], dt: f64) -> f64 {
    let Some(last) = norms.last() else { return 0.0 };
    let incr: f64 = norms.iter().map(|n| n.incr_sq).sum();
    let diss: f64 = norms.iter().map(|n| n.dissipation).sum();
    last.new_sq + incr + dt * diss - u0_sq
}

/// Nodal interpolant of `f` with every wall-constrained node set to zero.
/// The field equals `f` away from the walls and decays to zero across
/// the single layer of boundary elements.
pub fn strip_interpolant(dofmap: &DofMap, f: impl Fn([f64; 2]) -> [f64; 2]) -> FeField {
    let mut v = FeField::interpolate_velocity(dofmap, f);
    let space = dofmap.velocity(Trace::Full);
    for (i, c) in v.coefficients_mut().iter_mut().enumerate() {
        if space.is_fixed(i) {
            *c = 0.0;
        }
    }
    v
}

/// Test function for linear momentum component `i`.
pub fn momentum_test_function(dofmap: &DofMap, i: usize) -> FeField {
    strip_interpolant(dofmap, |_| if i == 0 { [1.0, 0.0] } else { [0.0, 1.0] })
}

/// Test function for angular momentum about `center`.
pub fn angular_test_function(dofmap: &DofMap, center: [f64; 2]) -> FeField {
    strip_interpolant(dofmap, |x| [-(x[1] - center[1]), x[0] - center[0]])
}

/// `((div u) u, w)`
pub fn divergence_moment(u: &FeField, w: &FeField, dofmap: &DofMap, mesh: &Mesh, quad: &QuadratureRule) -> f64 {
    let mut total = 0.0;
    for_each_quad_point(mesh, quad, |_, qp| {
        let up = VectorPoint::evaluate(&u.cell_velocity(dofmap, qp.cell), &qp.phi, &qp.dphi);
        let wp = VectorPoint::evaluate(&w.cell_velocity(dofmap, qp.cell), &qp.phi, &qp.dphi);
        total += qp.weight
            * up.divergence()
            * (up.value[0] * wp.value[0] + up.value[1] * wp.value[1]);
    });
    total
}

/// `(u, w)` in L2.
pub fn l2_inner(u: &FeField, w: &FeField, dofmap: &DofMap, mesh: &Mesh, quad: &QuadratureRule) -> f64 {
    let mut total = 0.0;
    for_each_quad_point(mesh, quad, |_, qp| {
        let up = VectorPoint::evaluate(&u.cell_velocity(dofmap, qp.cell), &qp.phi, &qp.dphi);
        let wp = VectorPoint::evaluate(&w.cell_velocity(dofmap, qp.cell), &qp.phi, &qp.dphi);
        total += qp.weight * (up.value[0] * wp.value[0] + up.value[1] * wp.value[1]);
    });
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{build_taylor_hood, BoundaryConditions};
    use crate::mesh::{build_rect_mesh, DiagonalPattern, DomainBox, PeriodicMap};

    fn unit(n: usize) -> (Mesh, DofMap) {
        let m = build_rect_mesh(n, n, DomainBox::unit_square(), DiagonalPattern::Right).unwrap();
        let d = build_taylor_hood(&m, &BoundaryConditions::no_slip(), &PeriodicMap::default())
            .unwrap();
        (m, d)
    }

    #[test]
    fn constant_field_invariants() {
        let (m, d) = unit(3);
        let u = FeField::interpolate_velocity(&d, |_| [1.0, 0.0]);
        let inv = compute_invariants(&u, &d, &m, &QuadratureRule::default(), [0.0, 0.0]);
        assert!((inv.energy - 0.5).abs() < 1e-14);
        assert!((inv.momentum[0] - 1.0).abs() < 1e-14 && inv.momentum[1].abs() < 1e-14);
        assert!((inv.angular_momentum + 0.5).abs() < 1e-14);
        assert!(inv.div_norm < 1e-13);
    }

    #[test]
    fn zero_stream_has_zero_slack() {
        let s = check_energy_inequality(&[Some(StepNorms::default())], 0.1).unwrap();
        assert_eq!(s, alloc::vec![0.0]);
        assert_eq!(
            check_energy_inequality(&[None], 0.1),
            Err(DiagnosticsError::MissingNorms(0))
        );
    }

    #[test]
    fn strip_functions_vanish_on_walls() {
        let (_, d) = unit(4);
        let psi = momentum_test_function(&d, 0);
        let space = d.velocity(Trace::Full);
        assert!(psi
            .coefficients()
            .iter()
            .enumerate()
            .all(|(i, &c)| if space.is_fixed(i) { c == 0.0 } else { c == if i % 2 == 0 { 1.0 } else { 0.0 } }));
    }
}
