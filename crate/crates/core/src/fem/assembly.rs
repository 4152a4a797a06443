//! Element loops for bilinear forms and load vectors.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use super::dofmap::{DofError, DofMap, ScalarSpace};
use super::element::{p2_gradients, p2_values, ElementGeometry, VectorPoint};
use super::field::{FeField, FieldError, SpaceKind};
use super::quadrature::QuadratureRule;
use super::sparse::SparseMatrix;
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BilinearForm {
    Mass,
    Stiffness,
    /// Pressure-by-velocity block `B[q, v] = (div v, q)`.
    Divergence,
    GradDiv,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error(transparent)]
    Mesh(#[from] DofError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("{form:?} is not defined on the {space:?} space")]
    Unsupported { form: BilinearForm, space: SpaceKind },
    #[error("quadrature of degree {0} cannot integrate products of quadratics")]
    QuadratureTooLow(usize),
}

/// Data at one quadrature point of one cell.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub cell: usize,
    pub x: [f64; 2],
    /// Physical weight.
    pub weight: f64,
    pub lambda: [f64; 3],
    pub phi: [f64; 6],
    pub dphi: [[f64; 2]; 6],
}

/// Visit every quadrature point of every cell in cell order.
pub fn for_each_quad_point(
    mesh: &Mesh,
    quad: &QuadratureRule,
    mut f: impl FnMut(&ElementGeometry, &QuadPoint),
) {
    for t in 0..mesh.n_triangles() {
        let g = ElementGeometry::new(mesh.triangle_coords(t));
        let jac = g.jacobian();
        for (l, w) in quad.iter() {
            let qp = QuadPoint {
                cell: t,
                x: g.map(l),
                weight: w * jac,
                lambda: l,
                phi: p2_values(l),
                dphi: p2_gradients(&g, l),
            };
            f(&g, &qp);
        }
    }
}

fn check_quad(quad: &QuadratureRule) -> Result<(), AssemblyError> {
    if quad.degree() < 4 {
        return Err(AssemblyError::QuadratureTooLow(quad.degree()));
    }
    Ok(())
}

#[inline]
pub(crate) fn scatter<const R: usize, const C: usize>(
    m: &mut SparseMatrix,
    rows: &[usize; R],
    cols: &[usize; C],
    local: &[[f64; C]; R],
) {
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            m.add(r, c, local[i][j]);
        }
    }
}

/// Assemble `form` on `space` over the raw (unconstrained) dofs.
pub fn assemble_bilinear(
    form: BilinearForm,
    space: SpaceKind,
    dofmap: &DofMap,
    mesh: &Mesh,
    quad: &QuadratureRule,
) -> Result<SparseMatrix, AssemblyError> {
    dofmap.check_mesh(mesh)?;
    check_quad(quad)?;
    match (space, form) {
        (SpaceKind::Velocity, BilinearForm::Divergence) => Ok(divergence(dofmap, mesh, quad)),
        (SpaceKind::Velocity, _) => Ok(velocity_form(form, dofmap, mesh, quad)),
        (SpaceKind::Pressure, BilinearForm::Mass | BilinearForm::Stiffness) => {
            Ok(pressure_form(form, dofmap, mesh))
        }
        _ => Err(AssemblyError::Unsupported { form, space }),
    }
}

fn velocity_form(
    form: BilinearForm,
    dofmap: &DofMap,
    mesh: &Mesh,
    quad: &QuadratureRule,
) -> SparseMatrix {
    let mut m = SparseMatrix::zeros(dofmap.velocity_pattern().clone());
    let mut local = [[0.0; 12]; 12];
    for t in 0..mesh.n_triangles() {
        let g = ElementGeometry::new(mesh.triangle_coords(t));
        local.iter_mut().for_each(|r| *r = [0.0; 12]);
        for (l, w) in quad.iter() {
            let w = w * g.jacobian();
            let phi = p2_values(l);
            let dphi = p2_gradients(&g, l);
            for a in 0..6 {
                for b in 0..6 {
                    match form {
                        BilinearForm::Mass => {
                            let v = w * phi[a] * phi[b];
                            local[2 * a][2 * b] += v;
                            local[2 * a + 1][2 * b + 1] += v;
                        }
                        BilinearForm::Stiffness => {
                            let v = w * (dphi[a][0] * dphi[b][0] + dphi[a][1] * dphi[b][1]);
                            local[2 * a][2 * b] += v;
                            local[2 * a + 1][2 * b + 1] += v;
                        }
                        BilinearForm::GradDiv => {
                            for al in 0..2 {
                                for be in 0..2 {
                                    local[2 * a + al][2 * b + be] += w * dphi[b][be] * dphi[a][al];
                                }
                            }
                        }
                        BilinearForm::Divergence => unreachable!(),
                    }
                }
            }
        }
        let dofs = dofmap.cell_velocity_dofs(t);
        scatter(&mut m, &dofs, &dofs, &local);
    }
    m
}

fn divergence(dofmap: &DofMap, mesh: &Mesh, quad: &QuadratureRule) -> SparseMatrix {
    let mut m = SparseMatrix::zeros(dofmap.divergence_pattern().clone());
    let mut local = [[0.0; 12]; 3];
    for t in 0..mesh.n_triangles() {
        let g = ElementGeometry::new(mesh.triangle_coords(t));
        local.iter_mut().for_each(|r| *r = [0.0; 12]);
        for (l, w) in quad.iter() {
            let w = w * g.jacobian();
            let dphi = p2_gradients(&g, l);
            for q in 0..3 {
                for b in 0..6 {
                    local[q][2 * b] += w * dphi[b][0] * l[q];
                    local[q][2 * b + 1] += w * dphi[b][1] * l[q];
                }
            }
        }
        scatter(
            &mut m,
            &dofmap.cell_pressure_dofs(t),
            &dofmap.cell_velocity_dofs(t),
            &local,
        );
    }
    m
}

fn pressure_form(form: BilinearForm, dofmap: &DofMap, mesh: &Mesh) -> SparseMatrix {
    let mut m = SparseMatrix::zeros(dofmap.pressure_pattern().clone());
    for t in 0..mesh.n_triangles() {
        let g = ElementGeometry::new(mesh.triangle_coords(t));
        let mut local = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                local[i][j] = match form {
                    BilinearForm::Mass => g.area * if i == j { 2.0 } else { 1.0 } / 12.0,
                    _ => {
                        let (a, b) = (g.grad_lambda[i], g.grad_lambda[j]);
                        g.area * (a[0] * b[0] + a[1] * b[1])
                    }
                };
            }
        }
        let dofs = dofmap.cell_pressure_dofs(t);
        scatter(&mut m, &dofs, &dofs, &local);
    }
    m
}

/// `(f, phi)` for every raw velocity basis function.
pub fn velocity_load(
    dofmap: &DofMap,
    mesh: &Mesh,
    quad: &QuadratureRule,
    f: impl Fn([f64; 2]) -> [f64; 2],
) -> Vec<f64> {
    let mut out = vec![0.0; dofmap.n_velocity()];
    for_each_quad_point(mesh, quad, |_, qp| {
        let fx = f(qp.x);
        let dofs = dofmap.cell_velocity_dofs(qp.cell);
        for a in 0..6 {
            out[dofs[2 * a]] += qp.weight * fx[0] * qp.phi[a];
            out[dofs[2 * a + 1]] += qp.weight * fx[1] * qp.phi[a];
        }
    });
    out
}

/// `(g, q)` for every raw pressure basis function, where `g` may depend on
/// the local value of a velocity field.
pub fn pressure_load(
    dofmap: &DofMap,
    mesh: &Mesh,
    quad: &QuadratureRule,
    velocity: Option<&FeField>,
    g: impl Fn([f64; 2], [f64; 2]) -> f64,
) -> Result<Vec<f64>, AssemblyError> {
    if let Some(u) = velocity {
        u.expect(SpaceKind::Velocity, dofmap)?;
    }
    let mut out = vec![0.0; dofmap.n_pressure()];
    for_each_quad_point(mesh, quad, |_, qp| {
        let uv = velocity.map_or([0.0; 2], |u| {
            VectorPoint::evaluate(&u.cell_velocity(dofmap, qp.cell), &qp.phi, &qp.dphi).value
        });
        let gx = g(qp.x, uv);
        for (k, &q) in dofmap.cell_pressure_dofs(qp.cell).iter().enumerate() {
            out[q] += qp.weight * gx * qp.lambda[k];
        }
    });
    Ok(out)
}

/// Bilinear forms on the scalar P2 space used for transport.
#[derive(Debug, Clone, Copy)]
pub enum ScalarForm<'a> {
    Mass,
    Stiffness,
    /// `(u . grad c, d)` with a velocity field `u`.
    Advection(&'a FeField),
}

pub fn assemble_scalar(
    form: ScalarForm<'_>,
    space: &ScalarSpace,
    dofmap: &DofMap,
    mesh: &Mesh,
    quad: &QuadratureRule,
) -> Result<SparseMatrix, AssemblyError> {
    dofmap.check_mesh(mesh)?;
    check_quad(quad)?;
    if let ScalarForm::Advection(u) = form {
        u.expect(SpaceKind::Velocity, dofmap)?;
    }
    let mut m = SparseMatrix::zeros(space.pattern().clone());
    let mut local = [[0.0; 6]; 6];
    for t in 0..mesh.n_triangles() {
        let g = ElementGeometry::new(mesh.triangle_coords(t));
        let uc = match form {
            ScalarForm::Advection(u) => u.cell_velocity(dofmap, t),
            _ => [0.0; 12],
        };
        local.iter_mut().for_each(|r| *r = [0.0; 6]);
        for (l, w) in quad.iter() {
            let w = w * g.jacobian();
            let phi = p2_values(l);
            let dphi = p2_gradients(&g, l);
            let uv = VectorPoint::evaluate(&uc, &phi, &dphi).value;
            for a in 0..6 {
                for b in 0..6 {
                    local[a][b] += w * match form {
                        ScalarForm::Mass => phi[a] * phi[b],
                        ScalarForm::Stiffness => {
                            dphi[a][0] * dphi[b][0] + dphi[a][1] * dphi[b][1]
                        }
                        ScalarForm::Advection(_) => {
                            (uv[0] * dphi[b][0] + uv[1] * dphi[b][1]) * phi[a]
                        }
                    };
                }
            }
        }
        let dofs = &space.nodes().cell_nodes[t];
        scatter(&mut m, dofs, dofs, &local);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::dofmap::{build_taylor_hood, BoundaryConditions};
    use crate::mesh::{build_rect_mesh, DiagonalPattern, DomainBox, PeriodicMap};

    fn setup(n: usize) -> (Mesh, DofMap) {
        let m = build_rect_mesh(n, n, DomainBox::unit_square(), DiagonalPattern::Right).unwrap();
        let d = build_taylor_hood(&m, &BoundaryConditions::no_slip(), &PeriodicMap::default())
            .unwrap();
        (m, d)
    }

    #[test]
    fn low_degree_quadrature_is_rejected() {
        let (m, d) = setup(1);
        let q = QuadratureRule::collapsed_gauss(2);
        let e = assemble_bilinear(BilinearForm::Mass, SpaceKind::Velocity, &d, &m, &q);
        assert_eq!(e.unwrap_err(), AssemblyError::QuadratureTooLow(2));
    }

    #[test]
    fn mismatched_mesh_is_rejected() {
        let (_, d) = setup(2);
        let (m3, _) = setup(3);
        let q = QuadratureRule::default();
        let e = assemble_bilinear(BilinearForm::Mass, SpaceKind::Velocity, &d, &m3, &q);
        assert!(matches!(e, Err(AssemblyError::Mesh(_))));
    }

    #[test]
    fn velocity_mass_integrates_area() {
        let (m, d) = setup(3);
        let q = QuadratureRule::default();
        let mass = assemble_bilinear(BilinearForm::Mass, SpaceKind::Velocity, &d, &m, &q).unwrap();
        let one = FeField::interpolate_velocity(&d, |_| [1.0, 0.0]);
        let total: f64 = crate::math::dot(one.coefficients(), &mass.mul_vec(one.coefficients()));
        assert!((total - 1.0).abs() < 1e-14);
    }
}
