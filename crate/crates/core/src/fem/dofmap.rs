//! Taylor-Hood degree-of-freedom layout and constraint sets.
//!
//! Raw numbering: P2 node `n` is vertex `n` for `n < V` and edge `n - V`
//! otherwise; velocity dof `2 n + c` holds component `c` of node `n`;
//! pressure dof `v` sits on vertex `v`. Periodic identification happens on
//! nodes before free unknowns are numbered, so slaves always share their
//! master's unknown.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use super::sparse::Pattern;
use crate::mesh::{BoundaryTag, Mesh, PeriodicMap, Side};

/// Vector-valued function of position.
pub type VectorFn = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DofError {
    #[error("conflicting constraints on dof {dof}: {first} vs {second}")]
    Conflict { dof: usize, first: f64, second: f64 },
    #[error("boundary tag {0:?} present in the mesh has no boundary condition")]
    MissingCondition(BoundaryTag),
    #[error("boundary tag {0:?} is periodic but the periodic map has no pairs for it")]
    MissingPeriodicPairs(BoundaryTag),
    #[error("dof map was built for a mesh with {expected} triangles, got {found}")]
    MeshMismatch { expected: usize, found: usize },
}

#[derive(Clone)]
pub enum VelocityBc {
    /// Homogeneous Dirichlet on both components.
    NoSlip,
    /// Prescribed velocity.
    Dirichlet(VectorFn),
    /// Do-nothing (natural) condition.
    Natural,
}

impl core::fmt::Debug for VelocityBc {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            VelocityBc::NoSlip => write!(f, "NoSlip"),
            VelocityBc::Dirichlet(_) => write!(f, "Dirichlet(..)"),
            VelocityBc::Natural => write!(f, "Natural"),
        }
    }
}

/// Solid disk whose velocity nodes are held at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Disk {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let (dx, dy) = (p[0] - self.center[0], p[1] - self.center[1]);
        dx * dx + dy * dy <= self.radius * self.radius * (1.0 + 1e-12)
    }
}

/// Velocity conditions per boundary tag. Periodic tags need no entry.
#[derive(Debug, Clone, Default)]
pub struct BoundaryConditions {
    conditions: BTreeMap<BoundaryTag, VelocityBc>,
    obstacles: Vec<Disk>,
}

impl BoundaryConditions {
    /// No-slip walls and do-nothing outflow.
    pub fn no_slip() -> Self {
        let mut bc = Self::default();
        bc.conditions.insert(BoundaryTag::Wall, VelocityBc::NoSlip);
        bc.conditions.insert(BoundaryTag::Outflow, VelocityBc::Natural);
        bc
    }

    /// Every boundary natural; no velocity constraints at all.
    pub fn natural() -> Self {
        let mut bc = Self::default();
        for tag in [
            BoundaryTag::Wall,
            BoundaryTag::Inflow,
            BoundaryTag::Outflow,
        ] {
            bc.conditions.insert(tag, VelocityBc::Natural);
        }
        bc
    }

    pub fn with(mut self, tag: BoundaryTag, bc: VelocityBc) -> Self {
        self.conditions.insert(tag, bc);
        self
    }

    pub fn with_obstacle(mut self, disk: Disk) -> Self {
        self.obstacles.push(disk);
        self
    }

    pub fn get(&self, tag: BoundaryTag) -> Option<&VelocityBc> {
        self.conditions.get(&tag)
    }

    pub fn obstacles(&self) -> &[Disk] {
        &self.obstacles
    }
}

/// Where a raw dof's value comes from after constraints are applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DofTarget {
    Free(usize),
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    Dirichlet { dof: usize, value: f64 },
    Periodic { master: usize, slave: usize },
}

/// Raw dofs of one space together with their constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedSpace {
    targets: Vec<DofTarget>,
    roots: Vec<usize>,
    n_free: usize,
}

impl ConstrainedSpace {
    /// `roots[i]` is the master of raw dof `i` (itself when unconstrained);
    /// `fixed` maps master dofs to Dirichlet values.
    pub fn new(roots: Vec<usize>, fixed: &BTreeMap<usize, f64>) -> Self {
        let mut targets = vec![DofTarget::Free(usize::MAX); roots.len()];
        let mut n_free = 0;
        for i in 0..roots.len() {
            if roots[i] == i {
                targets[i] = match fixed.get(&i) {
                    Some(&v) => DofTarget::Fixed(v),
                    None => {
                        n_free += 1;
                        DofTarget::Free(n_free - 1)
                    }
                };
            }
        }
        for i in 0..roots.len() {
            if roots[i] != i {
                targets[i] = targets[roots[i]];
            }
        }
        Self {
            targets,
            roots,
            n_free,
        }
    }

    pub fn unconstrained(n: usize) -> Self {
        Self::new((0..n).collect(), &BTreeMap::new())
    }

    pub fn n_raw(&self) -> usize {
        self.targets.len()
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    pub fn target(&self, raw: usize) -> DofTarget {
        self.targets[raw]
    }

    pub fn targets(&self) -> &[DofTarget] {
        &self.targets
    }

    pub fn master(&self, raw: usize) -> usize {
        self.roots[raw]
    }

    pub fn is_slave(&self, raw: usize) -> bool {
        self.roots[raw] != raw
    }

    pub fn free_index(&self, raw: usize) -> Option<usize> {
        match self.targets[raw] {
            DofTarget::Free(k) => Some(k),
            DofTarget::Fixed(_) => None,
        }
    }

    pub fn is_fixed(&self, raw: usize) -> bool {
        matches!(self.targets[raw], DofTarget::Fixed(_))
    }

    /// Constraint list: Dirichlet on masters, one periodic entry per slave.
    pub fn constraints(&self) -> Vec<Constraint> {
        let mut out = Vec::new();
        for i in 0..self.n_raw() {
            if self.is_slave(i) {
                out.push(Constraint::Periodic {
                    master: self.roots[i],
                    slave: i,
                });
            } else if let DofTarget::Fixed(value) = self.targets[i] {
                out.push(Constraint::Dirichlet { dof: i, value });
            }
        }
        out
    }

    /// Raw coefficients from free unknowns plus Dirichlet values.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        assert_eq!(free.len(), self.n_free);
        self.targets
            .iter()
            .map(|t| match *t {
                DofTarget::Free(k) => free[k],
                DofTarget::Fixed(v) => v,
            })
            .collect()
    }

    /// Free unknowns read from master entries of a raw vector.
    pub fn extract(&self, raw: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_free];
        for (i, t) in self.targets.iter().enumerate() {
            if let DofTarget::Free(k) = *t {
                if !self.is_slave(i) {
                    out[k] = raw[i];
                }
            }
        }
        out
    }

    /// Transpose of [`Self::expand`]'s linear part: sums raw residual rows
    /// into their free unknowns and drops fixed rows.
    pub fn restrict(&self, raw: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_free];
        for (i, t) in self.targets.iter().enumerate() {
            if let DofTarget::Free(k) = *t {
                out[k] += raw[i];
            }
        }
        out
    }

    /// Overwrite slave and fixed entries of a raw vector from its masters.
    pub fn enforce(&self, raw: &mut [f64]) {
        for i in 0..raw.len() {
            match self.targets[i] {
                DofTarget::Fixed(v) => raw[i] = v,
                DofTarget::Free(_) => raw[i] = raw[self.roots[i]],
            }
        }
    }
}

/// Geometry of the P2 nodes: vertices followed by edge midpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct P2Nodes {
    pub coords: Vec<[f64; 2]>,
    pub cell_nodes: Vec<[usize; 6]>,
    pub n_vertices: usize,
}

impl P2Nodes {
    pub fn new(mesh: &Mesh) -> Self {
        let nv = mesh.n_vertices();
        let mut coords = mesh.vertices().to_vec();
        coords.extend((0..mesh.n_edges()).map(|e| mesh.edge_midpoint(e)));
        let cell_nodes = mesh
            .triangles()
            .iter()
            .zip(mesh.triangle_edges())
            .map(|(t, e)| [t[0], t[1], t[2], nv + e[0], nv + e[1], nv + e[2]])
            .collect();
        Self {
            coords,
            cell_nodes,
            n_vertices: nv,
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Node classes under periodic identification.
    pub fn classes(&self, periodic: &PeriodicMap) -> Vec<usize> {
        let nv = self.n_vertices;
        let vcls = periodic.vertex_classes(nv);
        let ecls = periodic.edge_classes(self.len() - nv);
        vcls.into_iter()
            .chain(ecls.into_iter().map(|c| c + nv))
            .collect()
    }

    /// The three nodes carried by boundary edge `e`.
    pub fn edge_nodes(&self, mesh: &Mesh, e: usize) -> [usize; 3] {
        let [a, b] = mesh.edges()[e].vertices;
        [a, b, self.n_vertices + e]
    }
}

/// Whether a velocity space constrains full boundary values (`X_h`) or
/// only the normal trace on Dirichlet boundaries (`Y_h`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trace {
    Full,
    Normal,
}

/// Taylor-Hood P2/P1 degrees of freedom with constraints.
#[derive(Debug, Clone)]
pub struct DofMap {
    nodes: P2Nodes,
    n_edges: usize,
    n_triangles: usize,
    velocity_full: ConstrainedSpace,
    velocity_normal: ConstrainedSpace,
    pressure: ConstrainedSpace,
    zero_mean: bool,
    pressure_weights: Vec<f64>,
    velocity_pattern: Arc<Pattern>,
    divergence_pattern: Arc<Pattern>,
    pressure_pattern: Arc<Pattern>,
}

impl DofMap {
    pub fn nodes(&self) -> &P2Nodes {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.nodes.n_vertices
    }

    pub fn n_triangles(&self) -> usize {
        self.n_triangles
    }

    pub fn n_velocity(&self) -> usize {
        2 * self.nodes.len()
    }

    pub fn n_pressure(&self) -> usize {
        self.nodes.n_vertices
    }

    pub fn velocity(&self, trace: Trace) -> &ConstrainedSpace {
        match trace {
            Trace::Full => &self.velocity_full,
            Trace::Normal => &self.velocity_normal,
        }
    }

    pub fn pressure(&self) -> &ConstrainedSpace {
        &self.pressure
    }

    /// Whether pressure is only determined up to a constant, in which case
    /// a zero-mean multiplier closes the system.
    pub fn zero_mean(&self) -> bool {
        self.zero_mean
    }

    /// Pressure degrees of freedom left after periodic folding and the
    /// zero-mean condition.
    pub fn effective_pressure_dofs(&self) -> usize {
        self.pressure.n_free() - usize::from(self.zero_mean)
    }

    /// `integral of q_i` for each raw pressure basis function.
    pub fn pressure_weights(&self) -> &[f64] {
        &self.pressure_weights
    }

    pub fn velocity_pattern(&self) -> &Arc<Pattern> {
        &self.velocity_pattern
    }

    pub fn divergence_pattern(&self) -> &Arc<Pattern> {
        &self.divergence_pattern
    }

    pub fn pressure_pattern(&self) -> &Arc<Pattern> {
        &self.pressure_pattern
    }

    /// Local velocity dofs of a cell, node-major.
    pub fn cell_velocity_dofs(&self, t: usize) -> [usize; 12] {
        let n = &self.nodes.cell_nodes[t];
        let mut out = [0; 12];
        for a in 0..6 {
            out[2 * a] = 2 * n[a];
            out[2 * a + 1] = 2 * n[a] + 1;
        }
        out
    }

    pub fn cell_pressure_dofs(&self, t: usize) -> [usize; 3] {
        let n = &self.nodes.cell_nodes[t];
        [n[0], n[1], n[2]]
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<(), DofError> {
        if mesh.n_triangles() != self.n_triangles
            || mesh.n_vertices() != self.nodes.n_vertices
            || mesh.n_edges() != self.n_edges
        {
            return Err(DofError::MeshMismatch {
                expected: self.n_triangles,
                found: mesh.n_triangles(),
            });
        }
        Ok(())
    }
}

fn insert_fixed(fixed: &mut BTreeMap<usize, f64>, dof: usize, value: f64) -> Result<(), DofError> {
    if let Some(&old) = fixed.get(&dof) {
        if (old - value).abs() > 1e-12 * (1.0 + old.abs().max(value.abs())) {
            return Err(DofError::Conflict {
                dof,
                first: old,
                second: value,
            });
        }
    } else {
        fixed.insert(dof, value);
    }
    Ok(())
}

fn check_conditions(
    mesh: &Mesh,
    bc: &BoundaryConditions,
    periodic: &PeriodicMap,
) -> Result<(), DofError> {
    for (_, tag, _) in mesh.boundary_edges() {
        match tag {
            BoundaryTag::PeriodicX | BoundaryTag::PeriodicY => {
                let axis = if tag == BoundaryTag::PeriodicX {
                    crate::mesh::Axis::X
                } else {
                    crate::mesh::Axis::Y
                };
                if !periodic.edge_pairs.iter().any(|p| p.axis == axis) {
                    return Err(DofError::MissingPeriodicPairs(tag));
                }
            }
            _ => {
                if bc.get(tag).is_none() {
                    return Err(DofError::MissingCondition(tag));
                }
            }
        }
    }
    Ok(())
}

fn velocity_fixed(
    mesh: &Mesh,
    nodes: &P2Nodes,
    classes: &[usize],
    bc: &BoundaryConditions,
    trace: Trace,
) -> Result<BTreeMap<usize, f64>, DofError> {
    let mut fixed = BTreeMap::new();
    for (e, tag, side) in mesh.boundary_edges() {
        let g: Option<VectorFn> = match bc.get(tag) {
            Some(VelocityBc::NoSlip) => Some(Arc::new(|_| [0.0, 0.0])),
            Some(VelocityBc::Dirichlet(f)) => Some(f.clone()),
            _ => None,
        };
        let Some(g) = g else { continue };
        let comps: &[usize] = match (trace, side) {
            (Trace::Normal, Some(Side::Left | Side::Right)) => &[0],
            (Trace::Normal, Some(Side::Bottom | Side::Top)) => &[1],
            _ => &[0, 1],
        };
        for n in nodes.edge_nodes(mesh, e) {
            let value = g(nodes.coords[n]);
            for &c in comps {
                insert_fixed(&mut fixed, 2 * classes[n] + c, value[c])?;
            }
        }
    }
    for disk in bc.obstacles() {
        for (n, &p) in nodes.coords.iter().enumerate() {
            if disk.contains(p) {
                insert_fixed(&mut fixed, 2 * classes[n], 0.0)?;
                insert_fixed(&mut fixed, 2 * classes[n] + 1, 0.0)?;
            }
        }
    }
    Ok(fixed)
}

/// Build the Taylor-Hood layout for `mesh` with the given velocity
/// conditions and periodic identification.
pub fn build_taylor_hood(
    mesh: &Mesh,
    bc: &BoundaryConditions,
    periodic: &PeriodicMap,
) -> Result<DofMap, DofError> {
    check_conditions(mesh, bc, periodic)?;
    let nodes = P2Nodes::new(mesh);
    let classes = nodes.classes(periodic);
    let vroots: Vec<usize> = (0..2 * nodes.len())
        .map(|d| 2 * classes[d / 2] + d % 2)
        .collect();
    let velocity_full = ConstrainedSpace::new(
        vroots.clone(),
        &velocity_fixed(mesh, &nodes, &classes, bc, Trace::Full)?,
    );
    let velocity_normal = ConstrainedSpace::new(
        vroots,
        &velocity_fixed(mesh, &nodes, &classes, bc, Trace::Normal)?,
    );
    // A pressure vertex whose cells carry no free velocity (inside an
    // obstacle) has an empty divergence row; pin it to zero.
    let mut coupled = vec![false; nodes.n_vertices];
    for cn in &nodes.cell_nodes {
        let free = cn
            .iter()
            .any(|&n| !velocity_normal.is_fixed(2 * n) || !velocity_normal.is_fixed(2 * n + 1));
        if free {
            for &v in &cn[..3] {
                coupled[classes[v]] = true;
            }
        }
    }
    let pinned: BTreeMap<usize, f64> = (0..nodes.n_vertices)
        .filter(|&v| classes[v] == v && !coupled[v])
        .map(|v| (v, 0.0))
        .collect();
    let proots = classes[..nodes.n_vertices].to_vec();
    let pressure = ConstrainedSpace::new(proots, &pinned);
    let zero_mean = !mesh
        .boundary_edges()
        .any(|(_, tag, _)| matches!(bc.get(tag), Some(VelocityBc::Natural)));

    let mut pressure_weights = vec![0.0; nodes.n_vertices];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let a = mesh.signed_area(t);
        for &v in tri {
            pressure_weights[v] += a / 3.0;
        }
    }

    let nv_dofs = 2 * nodes.len();
    let mut vrows = vec![Vec::new(); nv_dofs];
    let mut brows = vec![Vec::new(); nodes.n_vertices];
    let mut prows = vec![Vec::new(); nodes.n_vertices];
    for cn in &nodes.cell_nodes {
        let vd: Vec<usize> = cn.iter().flat_map(|&n| [2 * n, 2 * n + 1]).collect();
        for &r in &vd {
            vrows[r].extend_from_slice(&vd);
        }
        for &q in &cn[..3] {
            brows[q].extend_from_slice(&vd);
            prows[q].extend_from_slice(&cn[..3]);
        }
    }
    Ok(DofMap {
        n_edges: mesh.n_edges(),
        n_triangles: mesh.n_triangles(),
        velocity_full,
        velocity_normal,
        pressure,
        zero_mean,
        pressure_weights,
        velocity_pattern: Arc::new(Pattern::from_rows(nv_dofs, vrows)),
        divergence_pattern: Arc::new(Pattern::from_rows(nv_dofs, brows)),
        pressure_pattern: Arc::new(Pattern::from_rows(nodes.n_vertices, prows)),
        nodes,
    })
}

/// Scalar quadratic space on the P2 nodes, used for passive transport.
#[derive(Debug, Clone)]
pub struct ScalarSpace {
    nodes: P2Nodes,
    space: ConstrainedSpace,
    pattern: Arc<Pattern>,
}

impl ScalarSpace {
    /// Homogeneous Dirichlet on edges tagged with any of `dirichlet_tags`,
    /// natural elsewhere.
    pub fn new(mesh: &Mesh, dirichlet_tags: &[BoundaryTag], periodic: &PeriodicMap) -> Self {
        let nodes = P2Nodes::new(mesh);
        let classes = nodes.classes(periodic);
        let mut fixed = BTreeMap::new();
        for (e, tag, _) in mesh.boundary_edges() {
            if dirichlet_tags.contains(&tag) {
                for n in nodes.edge_nodes(mesh, e) {
                    fixed.insert(classes[n], 0.0);
                }
            }
        }
        let mut rows = vec![Vec::new(); nodes.len()];
        for cn in &nodes.cell_nodes {
            for &r in cn {
                rows[r].extend_from_slice(cn);
            }
        }
        Self {
            space: ConstrainedSpace::new(classes, &fixed),
            pattern: Arc::new(Pattern::from_rows(nodes.len(), rows)),
            nodes,
        }
    }

    pub fn nodes(&self) -> &P2Nodes {
        &self.nodes
    }

    pub fn space(&self) -> &ConstrainedSpace {
        &self.space
    }

    pub fn pattern(&self) -> &Arc<Pattern> {
        &self.pattern
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
