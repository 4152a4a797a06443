//! Passive scalar advection-diffusion with BDF2 in time.

use alloc::vec;
use alloc::vec::Vec;

use super::SchemeError;
use crate::fem::{
    assemble_scalar, for_each_quad_point, Block, DofMap, FeField, QuadratureRule, ReducedSystem,
    ScalarForm, ScalarSpace, SpaceKind, SparseMatrix,
};
use crate::linsolve::SparseLu;
use crate::math::dot;
use crate::mesh::{BoundaryTag, Mesh, PeriodicMap};

/// Stepper for `c_t + u . grad c - eps lap c = 0` on the quadratic scalar
/// space, with zero Dirichlet data on the given tags and natural
/// conditions elsewhere.
#[derive(Debug)]
pub struct Transport {
    space: ScalarSpace,
    mass: SparseMatrix,
    stiffness: SparseMatrix,
    /// Row sums of the mass matrix: `int phi_i`.
    weights: Vec<f64>,
    system: ReducedSystem,
    lu: SparseLu,
    pub eps: f64,
    pub dt: f64,
}

impl Transport {
    pub fn new(
        mesh: &Mesh,
        dofmap: &DofMap,
        periodic: &PeriodicMap,
        dirichlet_tags: &[BoundaryTag],
        eps: f64,
        dt: f64,
    ) -> Result<Self, SchemeError> {
        if !(dt > 0.0) || !(eps >= 0.0) {
            return Err(SchemeError::Config("transport needs dt > 0 and eps >= 0"));
        }
        let space = ScalarSpace::new(mesh, dirichlet_tags, periodic);
        let quad = QuadratureRule::default();
        let mass = assemble_scalar(ScalarForm::Mass, &space, dofmap, mesh, &quad)?;
        let stiffness = assemble_scalar(ScalarForm::Stiffness, &space, dofmap, mesh, &quad)?;
        let weights = mass.mul_vec(&vec![1.0; space.len()]);
        let system = ReducedSystem::new(
            space.space().n_free(),
            &[Block {
                pattern: space.pattern(),
                rows: space.space(),
                row_offset: 0,
                cols: space.space(),
                col_offset: 0,
                transpose: false,
            }],
            &[],
        );
        Ok(Self {
            space,
            mass,
            stiffness,
            weights,
            system,
            lu: SparseLu::new(),
            eps,
            dt,
        })
    }

    pub fn space(&self) -> &ScalarSpace {
        &self.space
    }

    /// `int c`
    pub fn total_mass(&self, c: &FeField) -> f64 {
        dot(&self.weights, c.coefficients())
    }

    /// `|c|^2` in L2.
    pub fn norm_sq(&self, c: &FeField) -> f64 {
        dot(c.coefficients(), &self.mass.mul_vec(c.coefficients()))
    }

    /// L2 projection of `c0` onto the constrained scalar space.
    pub fn project_initial(
        &mut self,
        mesh: &Mesh,
        c0: &dyn Fn([f64; 2]) -> f64,
    ) -> Result<FeField, SchemeError> {
        let fine = QuadratureRule::collapsed_gauss(10);
        let mut load = vec![0.0; self.space.len()];
        let nodes = &self.space.nodes().cell_nodes;
        for_each_quad_point(mesh, &fine, |_, qp| {
            let v = c0(qp.x);
            for (a, &n) in nodes[qp.cell].iter().enumerate() {
                load[n] += qp.weight * v * qp.phi[a];
            }
        });
        let s = self.space.space();
        let m = self.system.assemble(&[(0, 1.0, &self.mass)]);
        let x = self.lu.solve(&m, &s.restrict(&load))?;
        Ok(FeField::new(SpaceKind::Scalar, s.expand(&x)))
    }

    /// One step from `c` (time level n) and `c_prev` (level n-1), advected
    /// by `u`. Without `c_prev` the step is backward Euler.
    pub fn step(
        &mut self,
        c: &FeField,
        c_prev: Option<&FeField>,
        u: &FeField,
        mesh: &Mesh,
        dofmap: &DofMap,
    ) -> Result<FeField, SchemeError> {
        for f in core::iter::once(c).chain(c_prev) {
            f.expect(SpaceKind::Scalar, dofmap)?;
        }
        let quad = QuadratureRule::default();
        let adv = assemble_scalar(ScalarForm::Advection(u), &self.space, dofmap, mesh, &quad)?;
        let dt = self.dt;
        let (alpha, hist): (f64, Vec<f64>) = match c_prev {
            Some(p) => (
                1.5,
                c.coefficients()
                    .iter()
                    .zip(p.coefficients())
                    .map(|(a, b)| 2.0 * a - 0.5 * b)
                    .collect(),
            ),
            None => (1.0, c.coefficients().to_vec()),
        };
        let a = SparseMatrix::combination(&[
            (alpha / dt, &self.mass),
            (1.0, &adv),
            (self.eps, &self.stiffness),
        ]);
        let mut rhs = self.mass.mul_vec(&hist);
        rhs.iter_mut().for_each(|v| *v /= dt);
        let s = self.space.space();
        // homogeneous data: the lift is zero, so the raw rhs restricts directly
        let m = self.system.assemble(&[(0, 1.0, &a)]);
        let x = self.lu.solve(&m, &s.restrict(&rhs))?;
        Ok(FeField::new(SpaceKind::Scalar, s.expand(&x)))
    }
}
