//! Uniform triangulations of rectangles with boundary tags and periodic
//! vertex/edge identification.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math::{hypot, sqrt};

/// Relative tolerance used when matching coordinates on opposite faces.
pub const PERIODIC_MATCH_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("invalid domain box: [{xmin}, {xmax}] x [{ymin}, {ymax}] is not well ordered")]
    InvalidBox {
        xmin: f64,
        xmax: f64,
        ymin: f64,
        ymax: f64,
    },
    #[error("mesh needs at least one cell per direction (got {nx} x {ny})")]
    EmptyGrid { nx: usize, ny: usize },
    #[error("triangle {triangle} references vertex {vertex}, but the mesh has {n_vertices} vertices")]
    VertexOutOfRange {
        triangle: usize,
        vertex: usize,
        n_vertices: usize,
    },
    #[error("periodic face mismatch along {axis:?}: vertex {vertex} at ({x}, {y}) has no partner")]
    UnmatchedPeriodicVertex {
        axis: Axis,
        vertex: usize,
        x: f64,
        y: f64,
    },
    #[error("periodic face mismatch along {axis:?}: boundary edge {edge} has no partner")]
    UnmatchedPeriodicEdge { axis: Axis, edge: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBox {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl DomainBox {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self, MeshError> {
        // also rejects NaN bounds
        if !(xmin < xmax && ymin < ymax) {
            return Err(MeshError::InvalidBox {
                xmin,
                xmax,
                ymin,
                ymax,
            });
        }
        Ok(Self {
            xmin,
            xmax,
            ymin,
            ymax,
        })
    }

    pub fn unit_square() -> Self {
        Self {
            xmin: 0.0,
            xmax: 1.0,
            ymin: 0.0,
            ymax: 1.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> [f64; 2] {
        [
            0.5 * (self.xmin + self.xmax),
            0.5 * (self.ymin + self.ymax),
        ]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.xmin && p[0] <= self.xmax && p[1] >= self.ymin && p[1] <= self.ymax
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X,
    Y,
}

/// Which diagonal splits each grid cell into two triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagonalPattern {
    /// Bottom-left to top-right.
    #[default]
    Right,
    /// Bottom-right to top-left.
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryTag {
    Wall,
    PeriodicX,
    PeriodicY,
    Inflow,
    Outflow,
}

/// Side of the bounding box a boundary edge lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    pub fn outward_normal(self) -> [f64; 2] {
        match self {
            Side::Left => [-1.0, 0.0],
            Side::Right => [1.0, 0.0],
            Side::Bottom => [0.0, -1.0],
            Side::Top => [0.0, 1.0],
        }
    }

    /// Velocity component normal to this side.
    pub fn normal_component(self) -> usize {
        match self {
            Side::Left | Side::Right => 0,
            Side::Bottom | Side::Top => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// First adjacent triangle and, for interior edges, the second one.
    pub triangles: (usize, Option<usize>),
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.triangles.1.is_none()
    }
}

/// A conforming triangulation of a rectangle.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    /// Global edge id of local edge `k` (vertices `k`, `k+1 mod 3`).
    triangle_edges: Vec<[usize; 3]>,
    boundary_tags: BTreeMap<usize, BoundaryTag>,
    domain: DomainBox,
}

impl Mesh {
    /// Assemble a mesh from raw vertex and triangle lists. Every boundary
    /// edge is tagged [`BoundaryTag::Wall`]. No invariant is checked beyond
    /// index ranges; see [`validate_mesh`].
    pub fn from_parts(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        domain: DomainBox,
    ) -> Result<Self, MeshError> {
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(MeshError::VertexOutOfRange {
                        triangle: t,
                        vertex: v,
                        n_vertices: vertices.len(),
                    });
                }
            }
        }
        let mut lookup: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let id = *lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: [key.0, key.1],
                        triangles: (t, None),
                    });
                    edges.len() - 1
                });
                let e = &mut edges[id];
                if e.triangles.0 != t && e.triangles.1.is_none() {
                    e.triangles.1 = Some(t);
                }
                local[k] = id;
            }
            triangle_edges.push(local);
        }
        let boundary_tags = edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_boundary())
            .map(|(i, _)| (i, BoundaryTag::Wall))
            .collect();
        Ok(Self {
            vertices,
            triangles,
            edges,
            triangle_edges,
            boundary_tags,
            domain,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn triangle_edges(&self) -> &[[usize; 3]] {
        &self.triangle_edges
    }

    pub fn boundary_tags(&self) -> &BTreeMap<usize, BoundaryTag> {
        &self.boundary_tags
    }

    pub fn domain(&self) -> DomainBox {
        self.domain
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Signed area; positive for counter-clockwise triangles.
    pub fn signed_area(&self, t: usize) -> f64 {
        let [p0, p1, p2] = self.triangle_coords(t);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    pub fn edge_midpoint(&self, e: usize) -> [f64; 2] {
        let [a, b] = self.edges[e].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        hypot(pb[0] - pa[0], pb[1] - pa[1])
    }

    /// Mesh width: the longest edge.
    pub fn h(&self) -> f64 {
        (0..self.edges.len()).fold(0.0, |m, e| m.max(self.edge_length(e)))
    }

    /// Side of the bounding box that boundary edge `e` lies on, if any.
    pub fn boundary_side(&self, e: usize) -> Option<Side> {
        if !self.edges[e].is_boundary() {
            return None;
        }
        let [a, b] = self.edges[e].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let d = self.domain;
        let tol_x = PERIODIC_MATCH_TOL * d.width();
        let tol_y = PERIODIC_MATCH_TOL * d.height();
        let on = |p: [f64; 2], side: Side| match side {
            Side::Left => (p[0] - d.xmin).abs() <= tol_x,
            Side::Right => (p[0] - d.xmax).abs() <= tol_x,
            Side::Bottom => (p[1] - d.ymin).abs() <= tol_y,
            Side::Top => (p[1] - d.ymax).abs() <= tol_y,
        };
        Side::ALL.into_iter().find(|&s| on(pa, s) && on(pb, s))
    }

    /// Retag every boundary edge lying on `side`.
    pub fn tag_side(&mut self, side: Side, tag: BoundaryTag) {
        let ids: Vec<usize> = self
            .boundary_tags
            .keys()
            .copied()
            .filter(|&e| self.boundary_side(e) == Some(side))
            .collect();
        for e in ids {
            self.boundary_tags.insert(e, tag);
        }
    }

    /// Tag opposite faces as periodic along the requested axes.
    pub fn tag_periodic(&mut self, axes: PeriodicAxes) {
        if axes.x {
            self.tag_side(Side::Left, BoundaryTag::PeriodicX);
            self.tag_side(Side::Right, BoundaryTag::PeriodicX);
        }
        if axes.y {
            self.tag_side(Side::Bottom, BoundaryTag::PeriodicY);
            self.tag_side(Side::Top, BoundaryTag::PeriodicY);
        }
    }

    /// Boundary edges with their tags and sides.
    pub fn boundary_edges(&self) -> impl Iterator<Item = (usize, BoundaryTag, Option<Side>)> + '_ {
        self.boundary_tags
            .iter()
            .map(|(&e, &tag)| (e, tag, self.boundary_side(e)))
    }

    pub fn has_tag(&self, tag: BoundaryTag) -> bool {
        self.boundary_tags.values().any(|&t| t == tag)
    }
}

/// Uniform `nx` by `ny` grid of `box`, each cell split into two triangles.
pub fn build_rect_mesh(
    nx: usize,
    ny: usize,
    domain: DomainBox,
    pattern: DiagonalPattern,
) -> Result<Mesh, MeshError> {
    let domain = DomainBox::new(domain.xmin, domain.xmax, domain.ymin, domain.ymax)?;
    if nx == 0 || ny == 0 {
        return Err(MeshError::EmptyGrid { nx, ny });
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        // exact endpoints, so opposite faces match bit for bit
        let y = if j == ny {
            domain.ymax
        } else {
            domain.ymin + domain.height() * (j as f64) / (ny as f64)
        };
        for i in 0..=nx {
            let x = if i == nx {
                domain.xmax
            } else {
                domain.xmin + domain.width() * (i as f64) / (nx as f64)
            };
            vertices.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            match pattern {
                DiagonalPattern::Right => {
                    triangles.push([a, b, c]);
                    triangles.push([a, c, d]);
                }
                DiagonalPattern::Left => {
                    triangles.push([a, b, d]);
                    triangles.push([b, c, d]);
                }
            }
        }
    }
    Mesh::from_parts(vertices, triangles, domain)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PeriodicAxes {
    pub x: bool,
    pub y: bool,
}

impl PeriodicAxes {
    pub const NONE: Self = Self { x: false, y: false };
    pub const BOTH: Self = Self { x: true, y: true };
    pub const X: Self = Self { x: true, y: false };
    pub const Y: Self = Self { x: false, y: true };

    pub fn is_empty(&self) -> bool {
        !self.x && !self.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicPair {
    pub master: usize,
    pub slave: usize,
    pub axis: Axis,
}

/// Vertex and edge identifications between opposite faces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PeriodicMap {
    pub vertex_pairs: Vec<PeriodicPair>,
    pub edge_pairs: Vec<PeriodicPair>,
}

impl PeriodicMap {
    pub fn is_empty(&self) -> bool {
        self.vertex_pairs.is_empty() && self.edge_pairs.is_empty()
    }

    /// Representative (smallest index) of each vertex's identification class.
    pub fn vertex_classes(&self, n_vertices: usize) -> Vec<usize> {
        classes(n_vertices, &self.vertex_pairs)
    }

    pub fn edge_classes(&self, n_edges: usize) -> Vec<usize> {
        classes(n_edges, &self.edge_pairs)
    }
}

fn classes(n: usize, pairs: &[PeriodicPair]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for p in pairs {
        let (a, b) = (find(&mut parent, p.master), find(&mut parent, p.slave));
        if a != b {
            let (lo, hi) = (a.min(b), a.max(b));
            parent[hi] = lo;
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

/// Pair vertices and boundary edges on opposite faces of the bounding box.
/// The left (bottom) face holds the masters.
pub fn build_periodic_map(mesh: &Mesh, axes: PeriodicAxes) -> Result<PeriodicMap, MeshError> {
    let mut map = PeriodicMap::default();
    let d = mesh.domain();
    for (axis, enabled) in [(Axis::X, axes.x), (Axis::Y, axes.y)] {
        if !enabled {
            continue;
        }
        let (k, lo, hi, period) = match axis {
            Axis::X => (0, d.xmin, d.xmax, d.width()),
            Axis::Y => (1, d.ymin, d.ymax, d.height()),
        };
        let other = 1 - k;
        let tol = PERIODIC_MATCH_TOL * period;
        let span_tol = PERIODIC_MATCH_TOL * if k == 0 { d.height() } else { d.width() };
        let masters: Vec<usize> = (0..mesh.n_vertices())
            .filter(|&v| (mesh.vertices[v][k] - lo).abs() <= tol)
            .collect();
        let slaves: Vec<usize> = (0..mesh.n_vertices())
            .filter(|&v| (mesh.vertices[v][k] - hi).abs() <= tol)
            .collect();
        let mut vertex_partner = BTreeMap::new();
        for &s in &slaves {
            let ps = mesh.vertices[s];
            let m = masters
                .iter()
                .copied()
                .find(|&m| (mesh.vertices[m][other] - ps[other]).abs() <= span_tol)
                .ok_or(MeshError::UnmatchedPeriodicVertex {
                    axis,
                    vertex: s,
                    x: ps[0],
                    y: ps[1],
                })?;
            vertex_partner.insert(s, m);
            map.vertex_pairs.push(PeriodicPair {
                master: m,
                slave: s,
                axis,
            });
        }
        if masters.len() != slaves.len() {
            let unmatched = masters
                .iter()
                .copied()
                .find(|m| !vertex_partner.values().any(|v| v == m))
                .unwrap_or(0);
            let p = mesh.vertices[unmatched];
            return Err(MeshError::UnmatchedPeriodicVertex {
                axis,
                vertex: unmatched,
                x: p[0],
                y: p[1],
            });
        }
        let on_face = |e: usize, c: f64| {
            let [a, b] = mesh.edges[e].vertices;
            mesh.edges[e].is_boundary()
                && (mesh.vertices[a][k] - c).abs() <= tol
                && (mesh.vertices[b][k] - c).abs() <= tol
        };
        let master_edges: BTreeMap<(usize, usize), usize> = (0..mesh.n_edges())
            .filter(|&e| on_face(e, lo))
            .map(|e| {
                let [a, b] = mesh.edges[e].vertices;
                ((a.min(b), a.max(b)), e)
            })
            .collect();
        for e in (0..mesh.n_edges()).filter(|&e| on_face(e, hi)) {
            let [a, b] = mesh.edges[e].vertices;
            let (ma, mb) = (vertex_partner[&a], vertex_partner[&b]);
            let m = *master_edges
                .get(&(ma.min(mb), ma.max(mb)))
                .ok_or(MeshError::UnmatchedPeriodicEdge { axis, edge: e })?;
            map.edge_pairs.push(PeriodicPair {
                master: m,
                slave: e,
                axis,
            });
        }
    }
    Ok(map)
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshViolation {
    NonPositiveArea { triangle: usize, area: f64 },
    /// An edge shared by more than two triangles.
    OverSharedEdge { vertices: [usize; 2], count: usize },
    EulerRelation {
        vertices: usize,
        edges: usize,
        triangles: usize,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeshReport {
    pub violations: Vec<MeshViolation>,
}

impl MeshReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check orientation, conformity and the Euler relation `V - E + T = 1`.
/// Incidences are recounted from the triangle list, independently of the
/// mesh's derived edge table.
pub fn validate_mesh(mesh: &Mesh) -> MeshReport {
    let mut report = MeshReport::default();
    for t in 0..mesh.n_triangles() {
        let area = mesh.signed_area(t);
        if !(area > 0.0) {
            report
                .violations
                .push(MeshViolation::NonPositiveArea { triangle: t, area });
        }
    }
    let mut incidence: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for tri in mesh.triangles() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            *incidence.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    for (&(a, b), &count) in &incidence {
        if count > 2 {
            report.violations.push(MeshViolation::OverSharedEdge {
                vertices: [a, b],
                count,
            });
        }
    }
    let (v, e, t) = (mesh.n_vertices(), incidence.len(), mesh.n_triangles());
    if v as i64 - e as i64 + t as i64 != 1 {
        report.violations.push(MeshViolation::EulerRelation {
            vertices: v,
            edges: e,
            triangles: t,
        });
    }
    report
}

/// Number of boundary vertices on each face, counted from coordinates.
pub fn face_vertex_count(mesh: &Mesh, side: Side) -> usize {
    let d = mesh.domain();
    let tol = PERIODIC_MATCH_TOL * sqrt(d.area());
    mesh.vertices()
        .iter()
        .filter(|p| match side {
            Side::Left => (p[0] - d.xmin).abs() <= tol,
            Side::Right => (p[0] - d.xmax).abs() <= tol,
            Side::Bottom => (p[1] - d.ymin).abs() <= tol,
            Side::Top => (p[1] - d.ymax).abs() <= tol,
        })
        .count()
}
