//! Navier-Stokes time steps on a fixed Taylor-Hood discretization.

use alloc::vec;
use alloc::vec::Vec;

use super::{SchemeConfig, SchemeError, SchemeKind, TimeState};
use crate::diagnostics::StepNorms;
use crate::fem::{
    assemble_bilinear, assemble_convection, build_taylor_hood, pressure_load, velocity_load,
    BilinearForm, Block, BoundaryConditions, ConstrainedSpace, ConvectionMode,
    DofMap, FeField, QuadratureRule, ReducedSystem, SpaceKind, SparseMatrix, Trace,
};
use crate::linsolve::{newton_solve_with, SparseLu};
use crate::math::{dot, norm_inf};
use crate::mesh::{Mesh, PeriodicMap};

/// Layout `[velocity | pressure | multiplier]` of a reduced saddle system.
#[derive(Debug, Clone)]
struct Saddle {
    trace: Trace,
    nu: usize,
    np: usize,
    multiplier: bool,
    system: ReducedSystem,
}

impl Saddle {
    fn new(dofmap: &DofMap, trace: Trace) -> Self {
        let vs = dofmap.velocity(trace);
        let ps = dofmap.pressure();
        let (nu, np) = (vs.n_free(), ps.n_free());
        let multiplier = dofmap.zero_mean();
        let mut extra = Vec::new();
        if multiplier {
            for (k, &w) in ps.restrict(dofmap.pressure_weights()).iter().enumerate() {
                extra.push((nu + k, nu + np, w));
                extra.push((nu + np, nu + k, w));
            }
        }
        let vp = dofmap.velocity_pattern();
        let bp = dofmap.divergence_pattern();
        let system = ReducedSystem::new(
            nu + np + usize::from(multiplier),
            &[
                Block {
                    pattern: vp,
                    rows: vs,
                    row_offset: 0,
                    cols: vs,
                    col_offset: 0,
                    transpose: false,
                },
                Block {
                    pattern: bp,
                    rows: ps,
                    row_offset: nu,
                    cols: vs,
                    col_offset: 0,
                    transpose: false,
                },
                Block {
                    pattern: bp,
                    rows: vs,
                    row_offset: 0,
                    cols: ps,
                    col_offset: nu,
                    transpose: true,
                },
            ],
            &extra,
        );
        Self {
            trace,
            nu,
            np,
            multiplier,
            system,
        }
    }

    fn unpack(&self, dofmap: &DofMap, x: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let u = dofmap.velocity(self.trace).expand(&x[..self.nu]);
        let p = dofmap.pressure().expand(&x[self.nu..self.nu + self.np]);
        let lam = if self.multiplier { x[self.nu + self.np] } else { 0.0 };
        (u, p, lam)
    }

    fn pack(&self, dofmap: &DofMap, u: &[f64], p: &[f64]) -> Vec<f64> {
        let mut x = dofmap.velocity(self.trace).extract(u);
        x.extend(dofmap.pressure().extract(p));
        if self.multiplier {
            x.push(0.0);
        }
        x
    }

    /// Reduced residual from raw momentum and continuity residuals.
    fn restrict(&self, dofmap: &DofMap, ru: &[f64], rp: &[f64], p: &[f64]) -> Vec<f64> {
        let mut r = dofmap.velocity(self.trace).restrict(ru);
        r.extend(dofmap.pressure().restrict(rp));
        if self.multiplier {
            r.push(dot(dofmap.pressure_weights(), p));
        }
        r
    }

    /// `[a, -B^T; -s B, 0]` plus multiplier couplings.
    fn matrix(&self, a: &SparseMatrix, b: &SparseMatrix, s: f64) -> SparseMatrix {
        self.system.assemble(&[(0, 1.0, a), (1, -s, b), (2, -1.0, b)])
    }
}

/// Mesh, spaces and the constant operators of one discretization.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub dofmap: DofMap,
    pub quad: QuadratureRule,
    /// Velocity mass, stiffness and grad-div matrices.
    pub mass: SparseMatrix,
    pub stiffness: SparseMatrix,
    pub grad_div: SparseMatrix,
    /// `B[q, v] = (div v, q)`
    pub divergence: SparseMatrix,
    pub pressure_mass: SparseMatrix,
    coupled: Saddle,
    projection: Saddle,
    momentum: ReducedSystem,
    pressure_projection: ReducedSystem,
}

impl Discretization {
    pub fn new(mesh: Mesh, periodic: &PeriodicMap, bc: &BoundaryConditions) -> Result<Self, SchemeError> {
        let dofmap = build_taylor_hood(&mesh, bc, periodic)?;
        let quad = QuadratureRule::symmetric_degree6();
        let asm = |form, space| assemble_bilinear(form, space, &dofmap, &mesh, &quad);
        let mass = asm(BilinearForm::Mass, SpaceKind::Velocity)?;
        let stiffness = asm(BilinearForm::Stiffness, SpaceKind::Velocity)?;
        let grad_div = asm(BilinearForm::GradDiv, SpaceKind::Velocity)?;
        let divergence = asm(BilinearForm::Divergence, SpaceKind::Velocity)?;
        let pressure_mass = asm(BilinearForm::Mass, SpaceKind::Pressure)?;
        let vs = dofmap.velocity(Trace::Full);
        let momentum = ReducedSystem::new(
            vs.n_free(),
            &[Block {
                pattern: dofmap.velocity_pattern(),
                rows: vs,
                row_offset: 0,
                cols: vs,
                col_offset: 0,
                transpose: false,
            }],
            &[],
        );
        let ps = dofmap.pressure();
        let pressure_projection = ReducedSystem::new(
            ps.n_free(),
            &[Block {
                pattern: dofmap.pressure_pattern(),
                rows: ps,
                row_offset: 0,
                cols: ps,
                col_offset: 0,
                transpose: false,
            }],
            &[],
        );
        Ok(Self {
            coupled: Saddle::new(&dofmap, Trace::Full),
            projection: Saddle::new(&dofmap, Trace::Normal),
            momentum,
            pressure_projection,
            mesh,
            dofmap,
            quad,
            mass,
            stiffness,
            grad_div,
            divergence,
            pressure_mass,
        })
    }

    /// `v^T M w`
    pub fn inner(&self, v: &[f64], w: &[f64]) -> f64 {
        dot(v, &self.mass.mul_vec(w))
    }

    pub fn norm_sq(&self, v: &[f64]) -> f64 {
        self.inner(v, v)
    }

    pub fn grad_norm_sq(&self, v: &[f64]) -> f64 {
        dot(v, &self.stiffness.mul_vec(v))
    }

    pub fn div_norm_sq(&self, v: &[f64]) -> f64 {
        dot(v, &self.grad_div.mul_vec(v))
    }

    /// `max_q |(div u, q)|` over the pressure basis.
    pub fn divergence_residual(&self, u: &[f64]) -> f64 {
        norm_inf(&self.dofmap.pressure().restrict(&self.divergence.mul_vec(u)))
    }

    /// Raw load vector `(f, phi)`, or zeros.
    pub fn load(&self, f: Option<&dyn Fn([f64; 2]) -> [f64; 2]>) -> Vec<f64> {
        match f {
            Some(f) => velocity_load(&self.dofmap, &self.mesh, &self.quad, f),
            None => vec![0.0; self.dofmap.n_velocity()],
        }
    }

    /// Mean of a pressure field over the domain.
    pub fn pressure_mean(&self, p: &[f64]) -> f64 {
        let area: f64 = self.dofmap.pressure_weights().iter().sum();
        dot(self.dofmap.pressure_weights(), p) / area
    }
}

/// Solution of one step plus the quantities the diagnostics need.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub state: TimeState,
    /// Energy balance terms; `None` for schemes without one.
    pub norms: Option<StepNorms>,
    /// `|u^{n+1}|^2` after projection.
    pub projected_sq: Option<f64>,
    /// `max_q |(div u^{n+1}, q)|` after projection.
    pub div_residual: Option<f64>,
    pub newton_iterations: usize,
}

/// Stepper owning a discretization and reusable factorizations.
#[derive(Debug)]
pub struct Solver {
    pub disc: Discretization,
    pub cfg: SchemeConfig,
    lu_coupled: SparseLu,
    lu_momentum: SparseLu,
    lu_projection: SparseLu,
    lu_pressure: SparseLu,
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn mid(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

impl Solver {
    pub fn new(disc: Discretization, cfg: SchemeConfig) -> Result<Self, SchemeError> {
        cfg.validate()?;
        let h = disc.mesh.h();
        if cfg.dt >= h * h * h {
            log::warn!(
                "dt = {} is not below h^3 = {:.3e}; uniqueness of the nonlinear solve is not guaranteed",
                cfg.dt,
                h * h * h
            );
        }
        Ok(Self {
            disc,
            cfg,
            lu_coupled: SparseLu::new(),
            lu_momentum: SparseLu::new(),
            lu_projection: SparseLu::new(),
            lu_pressure: SparseLu::new(),
        })
    }

    fn velocity(&self, raw: Vec<f64>) -> FeField {
        FeField::new(SpaceKind::Velocity, raw)
    }

    fn pressure(&self, raw: Vec<f64>) -> FeField {
        FeField::new(SpaceKind::Pressure, raw)
    }

    fn check_state(&self, state: &TimeState) -> Result<(), SchemeError> {
        state.u.expect(SpaceKind::Velocity, &self.disc.dofmap)?;
        state.p.expect(SpaceKind::Pressure, &self.disc.dofmap)?;
        Ok(())
    }

    /// `N(w) w` and `N(w) + J(w)` for the configured form.
    fn convection(&self, w: &[f64]) -> Result<(Vec<f64>, SparseMatrix), SchemeError> {
        let d = &self.disc;
        let wf = FeField::new(SpaceKind::Velocity, w.to_vec());
        let mats = assemble_convection(
            self.cfg.form,
            &wf,
            ConvectionMode::JacobianPair,
            &d.dofmap,
            &d.mesh,
            &d.quad,
        )?;
        Ok((mats.operator.mul_vec(w), mats.jacobian()))
    }

    /// Mixed L2 projection of `target` onto discretely divergence-free
    /// fields of the given trace space. Returns the velocity and the
    /// pressure-like multiplier scaled by `1/scale`.
    fn project(&mut self, target: &[f64], trace: Trace, scale: f64) -> Result<(Vec<f64>, Vec<f64>), SchemeError> {
        let d = &self.disc;
        let saddle = match trace {
            Trace::Full => &d.coupled,
            Trace::Normal => &d.projection,
        };
        let lu = match trace {
            Trace::Full => &mut self.lu_coupled,
            Trace::Normal => &mut self.lu_projection,
        };
        let mut a = d.mass.clone();
        a.scale(scale);
        let jac = saddle.matrix(&a, &d.divergence, 1.0);
        let x0 = vec![0.0; saddle.system.size()];
        let (u, p, lam) = saddle.unpack(&d.dofmap, &x0);
        let r = residual_projection(d, saddle, &a, target, scale, &u, &p, lam);
        let dx = lu.solve(&jac, &r)?;
        let x: Vec<f64> = x0.iter().zip(&dx).map(|(a, b)| a - b).collect();
        let (u, p, _) = saddle.unpack(&d.dofmap, &x);
        Ok((u, p))
    }

    /// L2 projection onto the pressure space.
    pub fn project_pressure(&mut self, load: &[f64]) -> Result<Vec<f64>, SchemeError> {
        let d = &self.disc;
        let ps = d.dofmap.pressure();
        let m = d.pressure_projection.assemble(&[(0, 1.0, &d.pressure_mass)]);
        let x = self.lu_pressure.solve(&m, &ps.restrict(load))?;
        Ok(ps.expand(&x))
    }

    fn zero_mean_shift(&self, p: &mut [f64]) {
        if self.disc.dofmap.zero_mean() {
            let m = self.disc.pressure_mean(p);
            p.iter_mut().for_each(|v| *v -= m);
        }
    }

    /// Discretely divergence-free L2 projection of `u0` in the no-slip space.
    pub fn initial_projection(&mut self, u0: &dyn Fn([f64; 2]) -> [f64; 2]) -> Result<FeField, SchemeError> {
        let d = &self.disc;
        let fine = QuadratureRule::collapsed_gauss(10);
        let load = velocity_load(&d.dofmap, &d.mesh, &fine, u0);
        let (u, _) = self.project(&load, Trace::Full, 1.0)?;
        Ok(self.velocity(u))
    }

    /// Steady Stokes flow (with grad-div) matching the boundary data.
    pub fn stokes(&mut self) -> Result<(FeField, FeField), SchemeError> {
        let d = &self.disc;
        let nu = self.cfg.nu.max(f64::MIN_POSITIVE);
        let a = SparseMatrix::combination(&[(nu, &d.stiffness), (self.cfg.grad_div_gamma, &d.grad_div)]);
        let saddle = &d.coupled;
        let jac = saddle.matrix(&a, &d.divergence, 1.0);
        let x0 = vec![0.0; saddle.system.size()];
        let (u, p, lam) = saddle.unpack(&d.dofmap, &x0);
        let ru = sub(&a.mul_vec(&u), &d.divergence.mul_vec_transpose(&p));
        let rp = continuity(d, &u, 1.0, lam);
        let r = saddle.restrict(&d.dofmap, &ru, &rp, &p);
        let dx = self.lu_coupled.solve(&jac, &r)?;
        let x: Vec<f64> = x0.iter().zip(&dx).map(|(a, b)| a - b).collect();
        let (u, p, _) = saddle.unpack(&d.dofmap, &x);
        Ok((self.velocity(u), self.pressure(p)))
    }

    /// L2 projection of a pressure given pointwise, optionally together
    /// with the local discrete velocity, shifted to zero mean when the
    /// pressure is only defined up to a constant.
    pub fn pressure_from(
        &mut self,
        velocity: Option<&FeField>,
        g: &dyn Fn([f64; 2], [f64; 2]) -> f64,
    ) -> Result<FeField, SchemeError> {
        let fine = QuadratureRule::collapsed_gauss(10);
        let load = pressure_load(&self.disc.dofmap, &self.disc.mesh, &fine, velocity, g)?;
        let mut p = self.project_pressure(&load)?;
        self.zero_mean_shift(&mut p);
        Ok(self.pressure(p))
    }

    /// Physical pressure `P + |u|^2 / 2` from the Bernoulli pressure of an
    /// EMAC run.
    pub fn physical_pressure(&mut self, bernoulli: &FeField, u: &FeField) -> Result<FeField, SchemeError> {
        let kinetic = self.pressure_from(Some(u), &|_, v| 0.5 * (v[0] * v[0] + v[1] * v[1]))?;
        let mut p: Vec<f64> = bernoulli
            .coefficients()
            .iter()
            .zip(kinetic.coefficients())
            .map(|(a, b)| a + b)
            .collect();
        self.zero_mean_shift(&mut p);
        Ok(self.pressure(p))
    }

    /// Advance one step with the configured scheme. `f` is the forcing at
    /// the time level the scheme evaluates it.
    pub fn step(&mut self, state: &TimeState, f: Option<&dyn Fn([f64; 2]) -> [f64; 2]>) -> Result<StepOutput, SchemeError> {
        match self.cfg.scheme {
            SchemeKind::CoupledCn => self.step_coupled_cn(state, f),
            SchemeKind::BeProj => self.step_be_proj(state, f),
            SchemeKind::RotProjB => self.step_rot_proj_b(state, f),
        }
    }

    /// Time level at which [`Self::step`] samples the forcing.
    pub fn forcing_time(&self, t: f64) -> f64 {
        match self.cfg.scheme {
            SchemeKind::BeProj => t + self.cfg.dt,
            _ => t + 0.5 * self.cfg.dt,
        }
    }

    /// Coupled Crank-Nicolson step for `(u^{n+1}, p^{n+1/2})`; `f` at
    /// `t^{n+1/2}`.
    pub fn step_coupled_cn(&mut self, state: &TimeState, f: Option<&dyn Fn([f64; 2]) -> [f64; 2]>) -> Result<StepOutput, SchemeError> {
        self.check_state(state)?;
        let cfg = self.cfg;
        let (dt, nu, gamma) = (cfg.dt, cfg.nu, cfg.grad_div_gamma);
        let load = self.disc.load(f);
        let un = state.u.coefficients().to_vec();
        let x0 = self.disc.coupled.pack(&self.disc.dofmap, &un, state.p.coefficients());
        let mut failure = None;
        let mut lu = core::mem::take(&mut self.lu_coupled);
        let result = {
            let this = &*self;
            let d = &this.disc;
            let saddle = &d.coupled;
            let residual = |x: &[f64]| {
                let (u, p, lam) = saddle.unpack(&d.dofmap, x);
                let w = mid(&u, &un);
                let (nw, nj) = match this.convection(&w) {
                    Ok(v) => v,
                    Err(e) => {
                        failure = Some(e);
                        (vec![f64::NAN; w.len()], d.mass.clone())
                    }
                };
                let mut ru = d.mass.mul_vec(&sub(&u, &un));
                ru.iter_mut().for_each(|v| *v /= dt);
                let aw = d.stiffness.mul_vec(&w);
                let gw = d.grad_div.mul_vec(&w);
                let bp = d.divergence.mul_vec_transpose(&p);
                for i in 0..ru.len() {
                    ru[i] += nw[i] + nu * aw[i] + gamma * gw[i] - bp[i] - load[i];
                }
                let rp = continuity(d, &w, 1.0, lam);
                let r = saddle.restrict(&d.dofmap, &ru, &rp, &p);
                let a = SparseMatrix::combination(&[
                    (1.0 / dt, &d.mass),
                    (0.5, &nj),
                    (0.5 * nu, &d.stiffness),
                    (0.5 * gamma, &d.grad_div),
                ]);
                (r, saddle.matrix(&a, &d.divergence, 0.5))
            };
            newton_solve_with(&mut lu, residual, x0, &cfg.newton)
        };
        self.lu_coupled = lu;
        if let Some(e) = failure {
            return Err(e);
        }
        let res = result.map_err(|e| SchemeError::Step {
            step: state.step_index + 1,
            source: e,
        })?;
        let d = &self.disc;
        let (u, p, _) = d.coupled.unpack(&d.dofmap, &res.solution);
        let w = mid(&u, &un);
        let norms = StepNorms {
            prev_sq: d.norm_sq(&un),
            new_sq: d.norm_sq(&u),
            incr_sq: 0.0,
            dissipation: nu * d.grad_norm_sq(&w) + gamma * d.div_norm_sq(&w),
            forcing_work: dot(&load, &w),
        };
        Ok(StepOutput {
            state: TimeState {
                t: state.t + dt,
                u: self.velocity(u),
                u_tilde: None,
                p: self.pressure(p),
                step_index: state.step_index + 1,
            },
            norms: Some(norms),
            projected_sq: None,
            div_residual: None,
            newton_iterations: res.iterations,
        })
    }

    /// Momentum step in the no-slip space. With `midpoint` the nonlinear,
    /// viscous and grad-div terms act on `(u~ + u^n) / 2` and `p_lag`
    /// enters explicitly; otherwise the step is fully implicit.
    fn momentum_step(
        &mut self,
        un: &[f64],
        p_lag: Option<&[f64]>,
        load: &[f64],
        midpoint: bool,
        step: usize,
    ) -> Result<(Vec<f64>, usize), SchemeError> {
        let cfg = self.cfg;
        let (dt, nu, gamma) = (cfg.dt, cfg.nu, cfg.grad_div_gamma);
        let theta = if midpoint { 0.5 } else { 1.0 };
        let vs: &ConstrainedSpace = self.disc.dofmap.velocity(Trace::Full);
        let x0 = vs.extract(un);
        let bp = p_lag.map(|p| self.disc.divergence.mul_vec_transpose(p));
        let mut failure = None;
        let mut lu = core::mem::take(&mut self.lu_momentum);
        let result = {
            let this = &*self;
            let d = &this.disc;
            let residual = |x: &[f64]| {
                let u = vs.expand(x);
                let w: Vec<f64> = if midpoint { mid(&u, un) } else { u.clone() };
                let (nw, nj) = match this.convection(&w) {
                    Ok(v) => v,
                    Err(e) => {
                        failure = Some(e);
                        (vec![f64::NAN; w.len()], d.mass.clone())
                    }
                };
                let mut ru = d.mass.mul_vec(&sub(&u, un));
                ru.iter_mut().for_each(|v| *v /= dt);
                let aw = d.stiffness.mul_vec(&w);
                let gw = d.grad_div.mul_vec(&w);
                for i in 0..ru.len() {
                    ru[i] += nw[i] + nu * aw[i] + gamma * gw[i] - load[i];
                    if let Some(bp) = &bp {
                        ru[i] -= bp[i];
                    }
                }
                let a = SparseMatrix::combination(&[
                    (1.0 / dt, &d.mass),
                    (theta, &nj),
                    (theta * nu, &d.stiffness),
                    (theta * gamma, &d.grad_div),
                ]);
                (vs.restrict(&ru), d.momentum.assemble(&[(0, 1.0, &a)]))
            };
            newton_solve_with(&mut lu, residual, x0, &cfg.newton)
        };
        self.lu_momentum = lu;
        if let Some(e) = failure {
            return Err(e);
        }
        let res = result.map_err(|e| SchemeError::Step { step, source: e })?;
        Ok((vs.expand(&res.solution), res.iterations))
    }

    /// Backward-Euler projection step; `f` at `t^{n+1}`.
    pub fn step_be_proj(&mut self, state: &TimeState, f: Option<&dyn Fn([f64; 2]) -> [f64; 2]>) -> Result<StepOutput, SchemeError> {
        self.check_state(state)?;
        let (dt, nu, gamma) = (self.cfg.dt, self.cfg.nu, self.cfg.grad_div_gamma);
        let load = self.disc.load(f);
        let un = state.u.coefficients();
        let (ut, iterations) = self.momentum_step(un, None, &load, false, state.step_index + 1)?;
        let target = self.disc.mass.mul_vec(&ut);
        let (u, p) = self.project(&target, Trace::Normal, 1.0 / dt)?;
        let d = &self.disc;
        let prev = state.u_tilde.as_ref().unwrap_or(&state.u).coefficients();
        let norms = StepNorms {
            prev_sq: d.norm_sq(prev),
            new_sq: d.norm_sq(&ut),
            incr_sq: d.norm_sq(&sub(&ut, un)),
            dissipation: nu * d.grad_norm_sq(&ut) + gamma * d.div_norm_sq(&ut),
            forcing_work: dot(&load, &ut),
        };
        Ok(StepOutput {
            projected_sq: Some(d.norm_sq(&u)),
            div_residual: Some(d.divergence_residual(&u)),
            state: TimeState {
                t: state.t + dt,
                u: self.velocity(u),
                u_tilde: Some(self.velocity(ut)),
                p: self.pressure(p),
                step_index: state.step_index + 1,
            },
            norms: Some(norms),
            newton_iterations: iterations,
        })
    }

    /// Rotational projection step; `f` at `t^{n+1/2}`.
    pub fn step_rot_proj_b(&mut self, state: &TimeState, f: Option<&dyn Fn([f64; 2]) -> [f64; 2]>) -> Result<StepOutput, SchemeError> {
        self.check_state(state)?;
        let (dt, nu) = (self.cfg.dt, self.cfg.nu);
        let load = self.disc.load(f);
        let un = state.u.coefficients();
        let pn = state.p.coefficients();
        let (ut, iterations) =
            self.momentum_step(un, Some(pn), &load, true, state.step_index + 1)?;
        let target = self.disc.mass.mul_vec(&ut);
        let (u, phi) = self.project(&target, Trace::Normal, 1.0 / dt)?;
        // pressure-space representative of div u~
        let div = self.project_pressure(&self.disc.divergence.mul_vec(&ut))?;
        let mut p: Vec<f64> = (0..pn.len())
            .map(|i| pn[i] + 2.0 * phi[i] - nu * div[i])
            .collect();
        self.zero_mean_shift(&mut p);
        let d = &self.disc;
        Ok(StepOutput {
            projected_sq: Some(d.norm_sq(&u)),
            div_residual: Some(d.divergence_residual(&u)),
            state: TimeState {
                t: state.t + dt,
                u: self.velocity(u),
                u_tilde: Some(self.velocity(ut)),
                p: self.pressure(p),
                step_index: state.step_index + 1,
            },
            norms: None,
            newton_iterations: iterations,
        })
    }
}

/// Raw continuity residual `-s B u + lam m`.
fn continuity(d: &Discretization, u: &[f64], s: f64, lam: f64) -> Vec<f64> {
    let bu = d.divergence.mul_vec(u);
    bu.iter()
        .zip(d.dofmap.pressure_weights())
        .map(|(b, m)| -s * b + lam * m)
        .collect()
}

/// Residual of `scale (M u - target) - B^T p = 0`, `-B u = 0`.
#[allow(clippy::too_many_arguments)]
fn residual_projection(
    d: &Discretization,
    saddle: &Saddle,
    a: &SparseMatrix,
    target: &[f64],
    scale: f64,
    u: &[f64],
    p: &[f64],
    lam: f64,
) -> Vec<f64> {
    let au = a.mul_vec(u);
    let bp = d.divergence.mul_vec_transpose(p);
    let ru: Vec<f64> = (0..au.len()).map(|i| au[i] - scale * target[i] - bp[i]).collect();
    let rp = continuity(d, u, 1.0, lam);
    saddle.restrict(&d.dofmap, &ru, &rp, p)
}
