//! Benchmark problem definitions.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use crate::fem::{BoundaryConditions, Disk, VectorFn, VelocityBc};
use crate::math::{cos, exp, ln, sin, sqrt};
use crate::mesh::{
    build_periodic_map, build_rect_mesh, BoundaryTag, DiagonalPattern, DomainBox, Mesh, MeshError,
    PeriodicAxes, PeriodicMap, Side,
};

/// Vector field of `(nu, t, x)`.
pub type TimeField = Arc<dyn Fn(f64, f64, [f64; 2]) -> [f64; 2] + Send + Sync>;
/// Velocity gradient `g[i][j] = d u_i / d x_j` as a function of `(nu, t, x)`.
pub type TimeGradient = Arc<dyn Fn(f64, f64, [f64; 2]) -> [[f64; 2]; 2] + Send + Sync>;
/// Scalar field of `(nu, t, x)`.
pub type TimeScalar = Arc<dyn Fn(f64, f64, [f64; 2]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    PlanarLattice,
    Gresho,
    ChannelTransport,
    Manufactured,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [
        Self::PlanarLattice,
        Self::Gresho,
        Self::ChannelTransport,
        Self::Manufactured,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::PlanarLattice => "planar_lattice",
            Self::Gresho => "gresho",
            Self::ChannelTransport => "channel_transport",
            Self::Manufactured => "manufactured",
        }
    }

    pub fn spec(self) -> ProblemSpec {
        match self {
            Self::PlanarLattice => problem_planar_lattice(),
            Self::Gresho => problem_gresho(),
            Self::ChannelTransport => problem_channel_transport(),
            Self::Manufactured => problem_manufactured(),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownProblem;

impl fmt::Display for UnknownProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expected one of {planar_lattice, gresho, channel_transport, manufactured}")
    }
}

impl FromStr for ProblemKind {
    type Err = UnknownProblem;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or(UnknownProblem)
    }
}

/// Mesh and time-step defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub t_end: f64,
}

/// How the discrete initial velocity is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialVelocity {
    /// L2 projection of the given field onto discretely divergence-free
    /// fields.
    Projection,
    /// Steady Stokes flow driven by the boundary data.
    Stokes,
}

#[derive(Clone)]
pub struct ExactSolution {
    pub velocity: TimeField,
    pub gradient: TimeGradient,
    /// Physical pressure, zero mean over the domain.
    pub pressure: TimeScalar,
}

/// Passive scalar carried by the flow.
#[derive(Clone)]
pub struct ScalarTransport {
    pub initial: Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>,
    pub diffusivity: f64,
    /// Tags with homogeneous Dirichlet data; natural elsewhere.
    pub dirichlet_tags: Vec<BoundaryTag>,
    /// Exact initial mass.
    pub initial_mass: f64,
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub domain: DomainBox,
    pub pattern: DiagonalPattern,
    pub periodic: PeriodicAxes,
    pub side_tags: Vec<(Side, BoundaryTag)>,
    pub bc: BoundaryConditions,
    pub nu: f64,
    pub grad_div: f64,
    pub initial_velocity: VectorFn,
    pub initial_kind: InitialVelocity,
    pub exact: Option<ExactSolution>,
    pub forcing: Option<TimeField>,
    pub transport: Option<ScalarTransport>,
    pub reference: Preset,
    pub desk: Preset,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("kind", &self.kind)
            .field("domain", &self.domain)
            .field("nu", &self.nu)
            .field("reference", &self.reference)
            .field("desk", &self.desk)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    /// Uniform mesh with this problem's tags and periodic pairing.
    pub fn build_mesh(&self, nx: usize, ny: usize) -> Result<(Mesh, PeriodicMap), MeshError> {
        let mut mesh = build_rect_mesh(nx, ny, self.domain, self.pattern)?;
        for &(side, tag) in &self.side_tags {
            mesh.tag_side(side, tag);
        }
        mesh.tag_periodic(self.periodic);
        let map = build_periodic_map(&mesh, self.periodic)?;
        Ok((mesh, map))
    }

    /// Origin for angular momentum.
    pub fn center(&self) -> [f64; 2] {
        self.domain.center()
    }
}

fn lattice_u0(x: [f64; 2]) -> [f64; 2] {
    let (a, b) = (2.0 * PI * x[0], 2.0 * PI * x[1]);
    [sin(a) * sin(b), cos(a) * cos(b)]
}

fn lattice_grad0(x: [f64; 2]) -> [[f64; 2]; 2] {
    let (a, b) = (2.0 * PI * x[0], 2.0 * PI * x[1]);
    let k = 2.0 * PI;
    [
        [k * cos(a) * sin(b), k * sin(a) * cos(b)],
        [-k * sin(a) * cos(b), -k * cos(a) * sin(b)],
    ]
}

fn lattice_p0(x: [f64; 2]) -> f64 {
    0.25 * (cos(4.0 * PI * x[0]) - cos(4.0 * PI * x[1]))
}

/// Four counter-rotating periodic vortices decaying as `exp(-8 pi^2 nu t)`.
pub fn problem_planar_lattice() -> ProblemSpec {
    let decay = |nu: f64, t: f64| exp(-8.0 * PI * PI * nu * t);
    ProblemSpec {
        kind: ProblemKind::PlanarLattice,
        domain: DomainBox::unit_square(),
        pattern: DiagonalPattern::default(),
        periodic: PeriodicAxes::BOTH,
        side_tags: Vec::new(),
        bc: BoundaryConditions::no_slip(),
        nu: 4e-6,
        grad_div: 0.0,
        initial_velocity: Arc::new(lattice_u0),
        initial_kind: InitialVelocity::Projection,
        exact: Some(ExactSolution {
            velocity: Arc::new(move |nu, t, x| {
                let [a, b] = lattice_u0(x);
                let g = decay(nu, t);
                [g * a, g * b]
            }),
            gradient: Arc::new(move |nu, t, x| {
                let g = decay(nu, t);
                lattice_grad0(x).map(|r| r.map(|v| g * v))
            }),
            pressure: Arc::new(move |nu, t, x| {
                let g = decay(nu, t);
                g * g * lattice_p0(x)
            }),
        }),
        forcing: None,
        transport: None,
        reference: Preset {
            nx: 48,
            ny: 48,
            dt: 1e-3,
            t_end: 5.0,
        },
        desk: Preset {
            nx: 24,
            ny: 24,
            dt: 2e-3,
            t_end: 5.0,
        },
    }
}

/// Pressure constants making the Gresho pressure continuous and zero
/// outside the ring.
pub fn gresho_constants() -> (f64, f64) {
    let c2 = -12.5 * 0.16 + 20.0 * 0.4 - 4.0 * ln(0.4);
    let c1 = c2 - 20.0 * 0.2 + 4.0 * ln(0.2);
    (c1, c2)
}

/// Azimuthal Gresho velocity.
pub fn gresho_speed(r: f64) -> f64 {
    if r < 0.2 {
        5.0 * r
    } else if r < 0.4 {
        2.0 - 5.0 * r
    } else {
        0.0
    }
}

/// Gresho pressure before the zero-mean shift.
pub fn gresho_pressure_raw(r: f64) -> f64 {
    let (c1, c2) = gresho_constants();
    if r < 0.2 {
        12.5 * r * r + c1
    } else if r < 0.4 {
        12.5 * r * r - 20.0 * r + 4.0 * ln(r) + c2
    } else {
        0.0
    }
}

/// Domain integral of [`gresho_pressure_raw`] over `(-1/2, 1/2)^2`.
fn gresho_pressure_integral() -> f64 {
    let (c1, c2) = gresho_constants();
    let inner = 2.0 * PI * (12.5 * libm::pow(0.2, 4.0) / 4.0 + c1 * 0.04 / 2.0);
    // int r (12.5 r^2 - 20 r + 4 ln r + c2) dr over [0.2, 0.4]
    let anti = |r: f64| {
        12.5 * r * r * r * r / 4.0 - 20.0 * r * r * r / 3.0
            + 4.0 * (r * r / 2.0 * ln(r) - r * r / 4.0)
            + c2 * r * r / 2.0
    };
    inner + 2.0 * PI * (anti(0.4) - anti(0.2))
}

fn gresho_velocity(x: [f64; 2]) -> [f64; 2] {
    let r = sqrt(x[0] * x[0] + x[1] * x[1]);
    if r == 0.0 {
        return [0.0, 0.0];
    }
    let s = gresho_speed(r) / r;
    [-x[1] * s, x[0] * s]
}

fn gresho_gradient(x: [f64; 2]) -> [[f64; 2]; 2] {
    let r = sqrt(x[0] * x[0] + x[1] * x[1]);
    if r < 0.2 {
        [[0.0, -5.0], [5.0, 0.0]]
    } else if r < 0.4 {
        let g = 2.0 / r - 5.0;
        let r3 = r * r * r;
        let (xx, xy, yy) = (x[0] * x[0], x[0] * x[1], x[1] * x[1]);
        [
            [2.0 * xy / r3, -g + 2.0 * yy / r3],
            [g - 2.0 * xx / r3, -2.0 * xy / r3],
        ]
    } else {
        [[0.0; 2]; 2]
    }
}

/// Steady inviscid standing vortex on `(-1/2, 1/2)^2` with no-slip walls.
pub fn problem_gresho() -> ProblemSpec {
    let mean = gresho_pressure_integral();
    ProblemSpec {
        kind: ProblemKind::Gresho,
        domain: DomainBox::new(-0.5, 0.5, -0.5, 0.5).unwrap(),
        pattern: DiagonalPattern::default(),
        periodic: PeriodicAxes::NONE,
        side_tags: Vec::new(),
        bc: BoundaryConditions::no_slip(),
        nu: 0.0,
        grad_div: 0.0,
        initial_velocity: Arc::new(gresho_velocity),
        initial_kind: InitialVelocity::Projection,
        exact: Some(ExactSolution {
            velocity: Arc::new(|_, _, x| gresho_velocity(x)),
            gradient: Arc::new(|_, _, x| gresho_gradient(x)),
            pressure: Arc::new(move |_, _, x| {
                gresho_pressure_raw(sqrt(x[0] * x[0] + x[1] * x[1])) - mean
            }),
        }),
        forcing: None,
        transport: None,
        reference: Preset {
            nx: 48,
            ny: 48,
            dt: 0.01,
            t_end: 4.0,
        },
        desk: Preset {
            nx: 24,
            ny: 24,
            dt: 0.01,
            t_end: 2.0,
        },
    }
}

/// Channel length, height, obstacle and contaminant blobs.
pub const CHANNEL_LENGTH: f64 = 2.0;
pub const CHANNEL_HEIGHT: f64 = 0.5;
pub const CHANNEL_OBSTACLE: Disk = Disk {
    center: [0.4, 0.25],
    radius: 0.08,
};
pub const CHANNEL_BLOBS: [Disk; 2] = [
    Disk {
        center: [0.2, 0.12],
        radius: 0.06,
    },
    Disk {
        center: [0.2, 0.38],
        radius: 0.06,
    },
];

/// Parabolic inflow of unit peak speed.
pub fn channel_inflow(x: [f64; 2]) -> [f64; 2] {
    let y = x[1];
    [4.0 * y * (CHANNEL_HEIGHT - y) / (CHANNEL_HEIGHT * CHANNEL_HEIGHT), 0.0]
}

/// Rectangular channel past a solid disk carrying two contaminant blobs.
pub fn problem_channel_transport() -> ProblemSpec {
    let bc = BoundaryConditions::no_slip()
        .with(BoundaryTag::Inflow, VelocityBc::Dirichlet(Arc::new(channel_inflow)))
        .with_obstacle(CHANNEL_OBSTACLE);
    let mass = CHANNEL_BLOBS
        .iter()
        .map(|d| PI * d.radius * d.radius)
        .sum();
    ProblemSpec {
        kind: ProblemKind::ChannelTransport,
        domain: DomainBox::new(0.0, CHANNEL_LENGTH, 0.0, CHANNEL_HEIGHT).unwrap(),
        pattern: DiagonalPattern::default(),
        periodic: PeriodicAxes::NONE,
        side_tags: vec![
            (Side::Left, BoundaryTag::Inflow),
            (Side::Right, BoundaryTag::Outflow),
        ],
        bc,
        nu: 0.01,
        grad_div: 1.0,
        initial_velocity: Arc::new(|_| [0.0, 0.0]),
        initial_kind: InitialVelocity::Stokes,
        exact: None,
        forcing: None,
        transport: Some(ScalarTransport {
            initial: Arc::new(|x| {
                if CHANNEL_BLOBS.iter().any(|d| d.contains(x)) {
                    1.0
                } else {
                    0.0
                }
            }),
            diffusivity: 1e-3,
            dirichlet_tags: vec![BoundaryTag::Inflow],
            initial_mass: mass,
        }),
        reference: Preset {
            nx: 80,
            ny: 20,
            dt: 0.01,
            t_end: 1.0,
        },
        desk: Preset {
            nx: 80,
            ny: 20,
            dt: 0.01,
            t_end: 1.0,
        },
    }
}

/// Temporal profile `g(t) = cos(2 pi t) / 2` of the manufactured solution
/// and its derivative.
pub fn manufactured_amplitude(t: f64) -> (f64, f64) {
    let w = 2.0 * PI;
    (0.5 * cos(w * t), -0.5 * w * sin(w * t))
}

/// Lattice-shaped periodic flow `g(t) u0` with pressure `g(t)^2 p0`,
/// driven by the forcing that makes it exact.
pub fn problem_manufactured() -> ProblemSpec {
    let mut spec = problem_planar_lattice();
    spec.kind = ProblemKind::Manufactured;
    spec.nu = 0.01;
    spec.initial_velocity = Arc::new(|x| {
        let g = manufactured_amplitude(0.0).0;
        lattice_u0(x).map(|v| g * v)
    });
    spec.exact = Some(ExactSolution {
        velocity: Arc::new(|_, t, x| {
            let g = manufactured_amplitude(t).0;
            lattice_u0(x).map(|v| g * v)
        }),
        gradient: Arc::new(|_, t, x| {
            let g = manufactured_amplitude(t).0;
            lattice_grad0(x).map(|r| r.map(|v| g * v))
        }),
        pressure: Arc::new(|_, t, x| {
            let g = manufactured_amplitude(t).0;
            g * g * lattice_p0(x)
        }),
    });
    spec.forcing = Some(Arc::new(|nu, t, x| {
        let (g, dg) = manufactured_amplitude(t);
        let s = dg + 8.0 * PI * PI * nu * g;
        lattice_u0(x).map(|v| s * v)
    }));
    let preset = Preset {
        nx: 32,
        ny: 32,
        dt: 0.05,
        t_end: 1.0,
    };
    spec.reference = preset;
    spec.desk = preset;
    spec
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in ProblemKind::ALL {
            assert_eq!(p.name().parse::<ProblemKind>(), Ok(p));
            assert_eq!(p.spec().kind, p);
        }
    }

    #[test]
    fn gresho_is_continuous() {
        let eps = 1e-13;
        for r in [0.2, 0.4] {
            assert!((gresho_speed(r - eps) - gresho_speed(r + eps)).abs() < 1e-11);
            assert!((gresho_pressure_raw(r - eps) - gresho_pressure_raw(r + eps)).abs() < 1e-11);
        }
        assert_eq!(gresho_speed(0.45), 0.0);
        assert_eq!(gresho_pressure_raw(0.45), 0.0);
    }
}
