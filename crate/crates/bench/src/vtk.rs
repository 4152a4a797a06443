//! Legacy ASCII VTK unstructured grids of quadratic triangles.

use std::io::{self, Write};

use emacfem::fem::SpaceKind;
use emacfem::{DofMap, FeField};

/// VTK cell type of the six-node triangle. Its node order (vertices, then
/// midpoints of edges 01, 12, 20) is the local P2 order used by the solver.
const VTK_QUADRATIC_TRIANGLE: u8 = 22;

/// Write one snapshot with `velocity` vectors, `pressure` scalars and an
/// optional transported `scalar` as point data on the P2 nodes.
pub fn write_snapshot(
    w: &mut impl Write,
    title: &str,
    dofmap: &DofMap,
    velocity: &FeField,
    pressure: &FeField,
    scalar: Option<&FeField>,
) -> io::Result<()> {
    let bad = |what: &str| io::Error::new(io::ErrorKind::InvalidInput, format!("{what} does not match the dof map"));
    velocity.expect(SpaceKind::Velocity, dofmap).map_err(|_| bad("velocity"))?;
    pressure.expect(SpaceKind::Pressure, dofmap).map_err(|_| bad("pressure"))?;
    if let Some(c) = scalar {
        c.expect(SpaceKind::Scalar, dofmap).map_err(|_| bad("scalar"))?;
    }
    let nodes = dofmap.nodes();
    let n = nodes.coords.len();
    let cells = &nodes.cell_nodes;

    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", title.lines().next().unwrap_or(""))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {n} double")?;
    for x in &nodes.coords {
        writeln!(w, "{} {} 0", x[0], x[1])?;
    }
    writeln!(w, "CELLS {} {}", cells.len(), cells.len() * 7)?;
    for c in cells {
        writeln!(w, "6 {} {} {} {} {} {}", c[0], c[1], c[2], c[3], c[4], c[5])?;
    }
    writeln!(w, "CELL_TYPES {}", cells.len())?;
    for _ in cells {
        writeln!(w, "{VTK_QUADRATIC_TRIANGLE}")?;
    }

    // P1 pressure at the midpoints is the mean of the edge's endpoints.
    let p = pressure.coefficients();
    let mut nodal_p = vec![f64::NAN; n];
    for c in cells {
        for (k, &v) in c[..3].iter().enumerate() {
            nodal_p[v] = p[v];
            let (a, b) = (c[k], c[(k + 1) % 3]);
            nodal_p[c[3 + k]] = 0.5 * (p[a] + p[b]);
        }
    }

    writeln!(w, "POINT_DATA {n}")?;
    writeln!(w, "VECTORS velocity double")?;
    for uv in velocity.coefficients().chunks_exact(2) {
        writeln!(w, "{} {} 0", uv[0], uv[1])?;
    }
    writeln!(w, "SCALARS pressure double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for v in &nodal_p {
        writeln!(w, "{v}")?;
    }
    if let Some(c) = scalar {
        writeln!(w, "SCALARS concentration double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in c.coefficients() {
            writeln!(w, "{v}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use emacfem::fem::{build_taylor_hood, BoundaryConditions};
    use emacfem::mesh::build_rect_mesh;
    use emacfem::{DiagonalPattern, DomainBox, PeriodicMap};

    #[test]
    fn single_cell_layout() {
        let m = build_rect_mesh(1, 1, DomainBox::unit_square(), DiagonalPattern::Right).unwrap();
        let d = build_taylor_hood(&m, &BoundaryConditions::no_slip(), &PeriodicMap::default()).unwrap();
        let u = FeField::interpolate_velocity(&d, |x| [x[0], -x[1]]);
        let p = FeField::interpolate_pressure(&d, |x| x[0] + 2.0 * x[1]);
        let mut buf = Vec::new();
        write_snapshot(&mut buf, "t = 0", &d, &u, &p, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert_eq!(lines[4], "POINTS 9 double");
        assert!(text.contains("CELLS 2 14\n"));
        assert!(text.contains("CELL_TYPES 2\n22\n22\n"));
        // linear pressure is reproduced exactly at every node
        let start = lines.iter().position(|l| *l == "LOOKUP_TABLE default").unwrap() + 1;
        for (k, x) in d.nodes().coords.iter().enumerate() {
            let v: f64 = lines[start + k].parse().unwrap();
            assert!((v - (x[0] + 2.0 * x[1])).abs() < 1e-15);
        }
    }

    #[test]
    fn wrong_field_is_rejected() {
        let m = build_rect_mesh(1, 1, DomainBox::unit_square(), DiagonalPattern::Right).unwrap();
        let d = build_taylor_hood(&m, &BoundaryConditions::no_slip(), &PeriodicMap::default()).unwrap();
        let p = FeField::zeros(SpaceKind::Pressure, &d);
        let e = write_snapshot(&mut Vec::new(), "", &d, &p, &p, None).unwrap_err();
        assert_eq!(e.kind(), io::ErrorKind::InvalidInput);
    }
}
