//! Time loop tying a problem, a scheme and the diagnostics together.

use alloc::vec::Vec;

use super::{Discretization, SchemeConfig, SchemeError, Solver, StepOutput, TimeState, Transport};
use crate::diagnostics::{compute_errors, compute_invariants, DiagnosticsRecord, StepNorms};
use crate::fem::{ConvectionForm, FeField, QuadratureRule, SpaceKind};
use crate::problems::{InitialVelocity, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub nx: usize,
    pub ny: usize,
}

impl Resolution {
    pub fn square(n: usize) -> Self {
        Self { nx: n, ny: n }
    }
}

/// When to record diagnostics and snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct Probes {
    /// Record every this many steps; the last step is always recorded.
    pub diagnostics_every: usize,
    /// Keep a snapshot every this many steps.
    pub snapshot_every: Option<usize>,
    /// Rule for invariants and error norms.
    pub quad: QuadratureRule,
}

impl Default for Probes {
    fn default() -> Self {
        Self {
            diagnostics_every: 1,
            snapshot_every: None,
            quad: QuadratureRule::collapsed_gauss(9),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub velocity: FeField,
    /// Physical pressure.
    pub pressure: FeField,
    pub scalar: Option<FeField>,
}

/// Per-step solver data beyond the recorded diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub t: f64,
    pub norms: Option<StepNorms>,
    pub projected_sq: Option<f64>,
    pub div_residual: Option<f64>,
    pub newton_iterations: usize,
}

impl StepReport {
    fn new(out: &StepOutput) -> Self {
        Self {
            step: out.state.step_index,
            t: out.state.t,
            norms: out.norms,
            projected_sq: out.projected_sq,
            div_residual: out.div_residual,
            newton_iterations: out.newton_iterations,
        }
    }
}

#[derive(Debug)]
pub struct SimulationOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<Snapshot>,
    pub steps: Vec<StepReport>,
    /// `(t, int c)` at each recorded step of a transport problem.
    pub scalar_mass: Vec<(f64, f64)>,
    /// `|u^0|^2`
    pub initial_sq: f64,
    pub final_state: TimeState,
    pub final_scalar: Option<FeField>,
    pub disc: Discretization,
    /// The step error that ended the run early, if any.
    pub error: Option<SchemeError>,
}

/// Build the discretization and initial state for `problem` and march to
/// `cfg.t_end`. A failing step stops the run and is reported in
/// [`SimulationOutput::error`] alongside everything recorded so far.
pub fn run_simulation(
    problem: &ProblemSpec,
    resolution: Resolution,
    cfg: SchemeConfig,
    probes: &Probes,
) -> Result<SimulationOutput, SchemeError> {
    cfg.validate()?;
    if probes.diagnostics_every == 0 || probes.snapshot_every == Some(0) {
        return Err(SchemeError::Config("probe strides must be positive"));
    }
    let (mesh, periodic) = problem.build_mesh(resolution.nx, resolution.ny)?;
    let disc = Discretization::new(mesh, &periodic, &problem.bc)?;
    let mut solver = Solver::new(disc, cfg)?;
    let nu = cfg.nu;

    let (u0, p0) = match problem.initial_kind {
        InitialVelocity::Projection => {
            let f = &problem.initial_velocity;
            let u = solver.initial_projection(&|x| f(x))?;
            let p = match &problem.exact {
                Some(ex) => {
                    let (pf, uf) = (&ex.pressure, &ex.velocity);
                    let bernoulli = cfg.form == ConvectionForm::Emac;
                    solver.pressure_from(None, &|x, _| {
                        let v = uf(nu, 0.0, x);
                        let kinetic = if bernoulli { 0.5 * (v[0] * v[0] + v[1] * v[1]) } else { 0.0 };
                        pf(nu, 0.0, x) - kinetic
                    })?
                }
                None => FeField::zeros(SpaceKind::Pressure, &solver.disc.dofmap),
            };
            (u, p)
        }
        InitialVelocity::Stokes => solver.stokes()?,
    };

    let mut transport = match &problem.transport {
        Some(tr) => {
            let d = &solver.disc;
            let mut t = Transport::new(&d.mesh, &d.dofmap, &periodic, &tr.dirichlet_tags, tr.diffusivity, cfg.dt)?;
            let init = &tr.initial;
            let c0 = t.project_initial(&d.mesh, &|x| init(x))?;
            Some((t, c0, None::<FeField>))
        }
        None => None,
    };

    let center = problem.center();
    let record = |solver: &Solver, state: &TimeState, slack: Option<f64>| {
        let d = &solver.disc;
        let invariants = compute_invariants(&state.u, &d.dofmap, &d.mesh, &probes.quad, center);
        let errors = problem.exact.as_ref().map(|ex| {
            let t = state.t;
            let (v, g) = (&ex.velocity, &ex.gradient);
            compute_errors(
                &state.u,
                &d.dofmap,
                &d.mesh,
                &probes.quad,
                &|x| v(nu, t, x),
                Some(&|x| g(nu, t, x)),
            )
        });
        DiagnosticsRecord {
            step: state.step_index,
            t: state.t,
            invariants,
            l2_error: errors.map(|e| e.l2),
            h1_error: errors.and_then(|e| e.h1),
            slack,
        }
    };

    let mut state = TimeState {
        t: 0.0,
        u: u0,
        u_tilde: None,
        p: p0,
        step_index: 0,
    };
    let initial_sq = solver.disc.norm_sq(state.u.coefficients());
    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    let mut steps = Vec::new();
    let mut scalar_mass = Vec::new();
    records.push(record(&solver, &state, None));
    if let Some((t, c, _)) = &transport {
        scalar_mass.push((0.0, t.total_mass(c)));
    }
    if probes.snapshot_every.is_some() {
        snapshots.push(snapshot(&mut solver, &state, transport.as_ref().map(|t| &t.1))?);
    }

    let n_steps = cfg.n_steps();
    let mut error = None;
    for n in 1..=n_steps {
        let tf = solver.forcing_time(state.t);
        let out = match &problem.forcing {
            Some(f) => solver.step(&state, Some(&|x| f(nu, tf, x))),
            None => solver.step(&state, None),
        };
        let out = match out {
            Ok(o) => o,
            Err(e) => {
                error = Some(e);
                break;
            }
        };
        steps.push(StepReport::new(&out));
        let slack = out.norms.map(|s| s.slack(cfg.dt));
        state = out.state;
        if let Some((tr, c, c_prev)) = &mut transport {
            let d = &solver.disc;
            match tr.step(c, c_prev.as_ref(), &state.u, &d.mesh, &d.dofmap) {
                Ok(next) => *c_prev = Some(core::mem::replace(c, next)),
                Err(e) => {
                    error = Some(e);
                    break;
                }
            }
        }
        if n % probes.diagnostics_every == 0 || n == n_steps {
            records.push(record(&solver, &state, slack));
            if let Some((t, c, _)) = &transport {
                scalar_mass.push((state.t, t.total_mass(c)));
            }
        }
        if probes.snapshot_every.is_some_and(|k| n % k == 0 || n == n_steps) {
            match snapshot(&mut solver, &state, transport.as_ref().map(|t| &t.1)) {
                Ok(s) => snapshots.push(s),
                Err(e) => {
                    error = Some(e);
                    break;
                }
            }
        }
    }

    Ok(SimulationOutput {
        records,
        snapshots,
        steps,
        scalar_mass,
        initial_sq,
        final_state: state,
        final_scalar: transport.map(|t| t.1),
        disc: solver.disc,
        error,
    })
}

fn snapshot(solver: &mut Solver, state: &TimeState, scalar: Option<&FeField>) -> Result<Snapshot, SchemeError> {
    let pressure = if solver.cfg.form == ConvectionForm::Emac {
        solver.physical_pressure(&state.p, &state.u)?
    } else {
        state.p.clone()
    };
    Ok(Snapshot {
        step: state.step_index,
        t: state.t,
        velocity: state.u.clone(),
        pressure,
        scalar: scalar.cloned(),
    })
}
