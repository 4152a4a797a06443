//! Time steppers for the Navier-Stokes equations and passive transport.

mod simulation;
mod stepper;
mod transport;

use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::fem::{AssemblyError, ConvectionForm, DofError, FeField, FieldError};
use crate::linsolve::{NewtonConfig, SolveError};
use crate::mesh::MeshError;

pub use simulation::{run_simulation, Probes, Resolution, SimulationOutput, Snapshot, StepReport};
pub use stepper::{Discretization, Solver, StepOutput};
pub use transport::Transport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Fully coupled Crank-Nicolson with midpoint nonlinearity.
    CoupledCn,
    /// Backward-Euler momentum step followed by an L2 projection.
    BeProj,
    /// Second-order rotational pressure-correction projection.
    RotProjB,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [Self::CoupledCn, Self::BeProj, Self::RotProjB];

    pub fn name(self) -> &'static str {
        match self {
            Self::CoupledCn => "coupled_cn",
            Self::BeProj => "be_proj",
            Self::RotProjB => "rot_proj_b",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownScheme;

impl fmt::Display for UnknownScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expected one of {coupled_cn, be_proj, rot_proj_b}")
    }
}

impl FromStr for SchemeKind {
    type Err = UnknownScheme;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or(UnknownScheme)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub scheme: SchemeKind,
    pub form: ConvectionForm,
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub grad_div_gamma: f64,
    pub newton: NewtonConfig,
}

impl SchemeConfig {
    pub fn new(scheme: SchemeKind, form: ConvectionForm, nu: f64, dt: f64, t_end: f64) -> Self {
        Self {
            scheme,
            form,
            nu,
            dt,
            t_end,
            grad_div_gamma: 0.0,
            newton: NewtonConfig::default(),
        }
    }

    /// A final time of zero is accepted and means no steps.
    pub fn validate(&self) -> Result<(), SchemeError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SchemeError::Config("dt must be positive"));
        }
        if !(self.t_end == 0.0 || self.t_end >= self.dt * (1.0 - 1e-12)) {
            return Err(SchemeError::Config("t_end must be zero or at least dt"));
        }
        if !(self.nu >= 0.0) {
            return Err(SchemeError::Config("nu must be nonnegative"));
        }
        if !(self.grad_div_gamma >= 0.0) {
            return Err(SchemeError::Config("grad-div parameter must be nonnegative"));
        }
        self.newton.validate()?;
        Ok(())
    }

    /// Number of steps to reach `t_end`.
    pub fn n_steps(&self) -> usize {
        libm::round(self.t_end / self.dt) as usize
    }
}

/// Solution at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeState {
    pub t: f64,
    /// End-of-step velocity.
    pub u: FeField,
    /// Intermediate velocity of projection schemes.
    pub u_tilde: Option<FeField>,
    /// Pressure unknown of the scheme: the Bernoulli pressure for EMAC,
    /// the physical pressure otherwise.
    pub p: FeField,
    pub step_index: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Dof(#[from] DofError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("step {step} failed: {source}")]
    Step { step: usize, source: SolveError },
}
