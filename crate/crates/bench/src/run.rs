//! One simulation from a [`RunConfig`] to files on disk.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use emacfem::schemes::{run_simulation, Probes, Resolution, SimulationOutput};
use emacfem::{SchemeConfig, SchemeError};
use thiserror::Error;

use crate::config::RunConfig;
use crate::{csv, vtk};

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const CONFIG_ECHO_FILE: &str = "config.txt";
pub const SCALAR_FILE: &str = "scalar.csv";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("setup failed: {0}")]
    Setup(#[from] SchemeError),
    /// The run stopped early; files hold everything up to the failure.
    #[error("{source} (partial results in {})", out.display())]
    Step { out: PathBuf, source: SchemeError },
}

#[derive(Debug)]
pub struct RunSummary {
    pub steps: usize,
    pub rows: usize,
    pub snapshots: usize,
    pub out: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), RunError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

pub fn scheme_config(cfg: &RunConfig) -> SchemeConfig {
    let mut s = SchemeConfig::new(cfg.scheme, cfg.form, cfg.nu, cfg.dt, cfg.t_end);
    s.grad_div_gamma = cfg.grad_div;
    s
}

/// Run the simulation and write the config echo, diagnostics, scalar mass
/// series and snapshots into `cfg.out`.
pub fn execute(cfg: &RunConfig) -> Result<RunSummary, RunError> {
    let out_dir = &cfg.out;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let echo = out_dir.join(CONFIG_ECHO_FILE);
    write_file(&echo, |w| w.write_all(cfg.echo().as_bytes()))?;

    let problem = cfg.problem.spec();
    let probes = Probes {
        snapshot_every: cfg.vtk_stride,
        ..Probes::default()
    };
    log::info!(
        "{} / {} / {} on {}x{}, dt = {}, t_end = {}",
        cfg.problem,
        cfg.scheme,
        cfg.form,
        cfg.nx,
        cfg.ny,
        cfg.dt,
        cfg.t_end
    );
    let res = Resolution {
        nx: cfg.nx,
        ny: cfg.ny,
    };
    let sim = run_simulation(&problem, res, scheme_config(cfg), &probes)?;
    write_outputs(cfg, &sim)?;
    let summary = RunSummary {
        steps: sim.steps.len(),
        rows: sim.records.len(),
        snapshots: sim.snapshots.len(),
        out: out_dir.clone(),
    };
    match sim.error {
        Some(source) => Err(RunError::Step {
            out: out_dir.clone(),
            source,
        }),
        None => Ok(summary),
    }
}

fn write_outputs(cfg: &RunConfig, sim: &SimulationOutput) -> Result<(), RunError> {
    let dir = &cfg.out;
    write_file(&dir.join(DIAGNOSTICS_FILE), |w| csv::write_diagnostics(w, &sim.records))?;
    if !sim.scalar_mass.is_empty() {
        write_file(&dir.join(SCALAR_FILE), |w| csv::write_scalar_mass(w, &sim.scalar_mass))?;
    }
    for s in &sim.snapshots {
        let path = dir.join(format!("snapshot_{:05}.vtk", s.step));
        let title = format!("{} {} {} t = {}", cfg.problem, cfg.scheme, cfg.form, s.t);
        write_file(&path, |w| {
            vtk::write_snapshot(w, &title, &sim.disc.dofmap, &s.velocity, &s.pressure, s.scalar.as_ref())
        })?;
    }
    Ok(())
}
