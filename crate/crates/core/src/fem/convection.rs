//! Trilinear convection forms and their linearizations.
//!
//! For a form `n(u, v, w)` the operator `N(u)` satisfies
//! `w . N(u) v = n(u, v, w)` and the slot derivative `J(u)` satisfies
//! `w . J(u) v = n(v, u, w)`, so `N(u) + J(u)` is the Jacobian of
//! `u -> N(u) u`.

use core::fmt;
use core::str::FromStr;

use super::assembly::{for_each_quad_point, scatter, AssemblyError};
use super::dofmap::DofMap;
use super::element::{p2_gradients, p2_values, ElementGeometry, VectorPoint};
use super::field::{FeField, SpaceKind};
use super::quadrature::QuadratureRule;
use super::sparse::SparseMatrix;
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConvectionForm {
    /// `(2 D(u) v, w) + ((div u) v, w)`
    Emac,
    /// `(u . grad v, w) + 1/2 ((div u) v, w)`
    Skew,
    /// `(u . grad v, w)`
    Conv,
}

impl ConvectionForm {
    pub const ALL: [ConvectionForm; 3] = [Self::Emac, Self::Skew, Self::Conv];

    pub fn name(self) -> &'static str {
        match self {
            Self::Emac => "emac",
            Self::Skew => "skew",
            Self::Conv => "conv",
        }
    }
}

impl fmt::Display for ConvectionForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownForm;

impl fmt::Display for UnknownForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expected one of {emac, skew, conv}")
    }
}

impl FromStr for ConvectionForm {
    type Err = UnknownForm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or(UnknownForm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvectionMode {
    Operator,
    JacobianPair,
}

#[derive(Debug, Clone)]
pub struct ConvectionMatrices {
    pub operator: SparseMatrix,
    /// Present in [`ConvectionMode::JacobianPair`].
    pub slot_derivative: Option<SparseMatrix>,
}

impl ConvectionMatrices {
    /// `N(u) + J(u)`, or `N(u)` alone when no derivative was assembled.
    pub fn jacobian(&self) -> SparseMatrix {
        let mut j = self.operator.clone();
        if let Some(d) = &self.slot_derivative {
            j.add_scaled(1.0, d);
        }
        j
    }
}

pub fn assemble_convection(
    form: ConvectionForm,
    u: &FeField,
    mode: ConvectionMode,
    dofmap: &DofMap,
    mesh: &Mesh,
    quad: &QuadratureRule,
) -> Result<ConvectionMatrices, AssemblyError> {
    dofmap.check_mesh(mesh)?;
    u.expect(SpaceKind::Velocity, dofmap)?;
    let pair = mode == ConvectionMode::JacobianPair;
    let mut n = SparseMatrix::zeros(dofmap.velocity_pattern().clone());
    let mut j = pair.then(|| n.clone());
    let mut ln = [[0.0; 12]; 12];
    let mut lj = [[0.0; 12]; 12];
    for t in 0..mesh.n_triangles() {
        let g = ElementGeometry::new(mesh.triangle_coords(t));
        let uc = u.cell_velocity(dofmap, t);
        ln.iter_mut().for_each(|r| *r = [0.0; 12]);
        lj.iter_mut().for_each(|r| *r = [0.0; 12]);
        for (l, w) in quad.iter() {
            let w = w * g.jacobian();
            let phi = p2_values(l);
            let dphi = p2_gradients(&g, l);
            let up = VectorPoint::evaluate(&uc, &phi, &dphi);
            let (uv, gu) = (up.value, up.grad);
            let div = up.divergence();
            for b in 0..6 {
                let adv = uv[0] * dphi[b][0] + uv[1] * dphi[b][1];
                // operator and slot-derivative blocks for trial node b,
                // indexed [alpha][beta], before multiplying by phi_a
                let mut nb = [[0.0; 2]; 2];
                let mut jb = [[0.0; 2]; 2];
                for al in 0..2 {
                    for be in 0..2 {
                        let d = if al == be { 1.0 } else { 0.0 };
                        nb[al][be] = match form {
                            ConvectionForm::Emac => {
                                (gu[al][be] + gu[be][al]) * phi[b] + d * div * phi[b]
                            }
                            ConvectionForm::Skew => d * (adv + 0.5 * div * phi[b]),
                            ConvectionForm::Conv => d * adv,
                        };
                        if pair {
                            jb[al][be] = match form {
                                ConvectionForm::Emac => {
                                    d * adv + uv[be] * dphi[b][al] + uv[al] * dphi[b][be]
                                }
                                ConvectionForm::Skew => {
                                    phi[b] * gu[al][be] + 0.5 * dphi[b][be] * uv[al]
                                }
                                ConvectionForm::Conv => phi[b] * gu[al][be],
                            };
                        }
                    }
                }
                for a in 0..6 {
                    let wa = w * phi[a];
                    for al in 0..2 {
                        for be in 0..2 {
                            ln[2 * a + al][2 * b + be] += wa * nb[al][be];
                            lj[2 * a + al][2 * b + be] += wa * jb[al][be];
                        }
                    }
                }
            }
        }
        let dofs = dofmap.cell_velocity_dofs(t);
        scatter(&mut n, &dofs, &dofs, &ln);
        if let Some(j) = j.as_mut() {
            scatter(j, &dofs, &dofs, &lj);
        }
    }
    Ok(ConvectionMatrices {
        operator: n,
        slot_derivative: j,
    })
}

/// Pointwise evaluation of `n(u, v, w)` by quadrature, independent of the
/// assembled matrices.
pub fn evaluate_trilinear(
    form: ConvectionForm,
    u: &FeField,
    v: &FeField,
    w: &FeField,
    dofmap: &DofMap,
    mesh: &Mesh,
    quad: &QuadratureRule,
) -> Result<f64, AssemblyError> {
    dofmap.check_mesh(mesh)?;
    for f in [u, v, w] {
        f.expect(SpaceKind::Velocity, dofmap)?;
    }
    let mut total = 0.0;
    for_each_quad_point(mesh, quad, |_, qp| {
        let e = |f: &FeField| VectorPoint::evaluate(&f.cell_velocity(dofmap, qp.cell), &qp.phi, &qp.dphi);
        let (up, vp, wp) = (e(u), e(v), e(w));
        let div = up.divergence();
        let mut val = 0.0;
        for i in 0..2 {
            let conv_i = up.value[0] * vp.grad[i][0] + up.value[1] * vp.grad[i][1];
            let term = match form {
                ConvectionForm::Emac => {
                    let sym: f64 = (0..2)
                        .map(|j| (up.grad[i][j] + up.grad[j][i]) * vp.value[j])
                        .sum();
                    sym + div * vp.value[i]
                }
                ConvectionForm::Skew => conv_i + 0.5 * div * vp.value[i],
                ConvectionForm::Conv => conv_i,
            };
            val += term * wp.value[i];
        }
        total += qp.weight * val;
    });
    Ok(total)
}
