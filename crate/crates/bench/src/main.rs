use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use emacfem::{ConvectionForm, SchemeKind};
use emacfem_bench::{execute, parse_pairs, ConfigError, RunConfig, RunError};

#[derive(Parser)]
#[command(name = "emacfem", version, about = "2D incompressible flow with EMAC and SKEW Taylor-Hood schemes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation.
    Run(RunArgs),
    /// Run every scheme/form pair in parallel, one directory each.
    Sweep {
        #[command(flatten)]
        common: RunArgs,
        /// Comma-separated schemes, default all.
        #[arg(long)]
        schemes: Option<String>,
        /// Comma-separated forms, default emac,skew.
        #[arg(long)]
        forms: Option<String>,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    form: Option<String>,
    #[arg(long)]
    nx: Option<String>,
    #[arg(long)]
    ny: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    #[arg(long)]
    grad_div: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    vtk_stride: Option<String>,
    /// Record that the run must be reproducible bit for bit.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(RunError),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl RunArgs {
    fn pairs(&self) -> Result<BTreeMap<String, String>, Failure> {
        let mut map = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                parse_pairs(&text)?
            }
            None => BTreeMap::new(),
        };
        let flags = [
            ("problem", &self.problem),
            ("scheme", &self.scheme),
            ("form", &self.form),
            ("nx", &self.nx),
            ("ny", &self.ny),
            ("dt", &self.dt),
            ("t_end", &self.t_end),
            ("nu", &self.nu),
            ("grad_div", &self.grad_div),
            ("out", &self.out),
            ("vtk_stride", &self.vtk_stride),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        }
        if self.deterministic {
            map.insert("deterministic".into(), "true".into());
        }
        Ok(map)
    }
}

fn parse_list<T: std::str::FromStr>(key: &'static str, text: &str) -> Result<Vec<T>, Failure>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|e: T::Err| Failure::Usage(format!("invalid {key} {s:?}: {e}")))
        })
        .collect()
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let cfg = RunConfig::from_pairs(&args.pairs()?)?;
    let s = execute(&cfg).map_err(Failure::Run)?;
    log::info!("{} steps, {} rows, {} snapshots in {}", s.steps, s.rows, s.snapshots, s.out.display());
    Ok(())
}

fn sweep(args: &RunArgs, schemes: Option<&str>, forms: Option<&str>) -> Result<(), Failure> {
    let schemes: Vec<SchemeKind> = match schemes {
        Some(s) => parse_list("scheme", s)?,
        None => SchemeKind::ALL.to_vec(),
    };
    let forms: Vec<ConvectionForm> = match forms {
        Some(s) => parse_list("form", s)?,
        None => vec![ConvectionForm::Emac, ConvectionForm::Skew],
    };
    let mut base = args.pairs()?;
    let root = PathBuf::from(base.remove("out").unwrap_or_else(|| "out".into()));
    let mut configs = Vec::new();
    for &scheme in &schemes {
        for &form in &forms {
            let mut m = base.clone();
            m.insert("scheme".into(), scheme.to_string());
            m.insert("form".into(), form.to_string());
            let dir = root.join(format!("{scheme}_{form}"));
            m.insert("out".into(), dir.display().to_string());
            configs.push(RunConfig::from_pairs(&m)?);
        }
    }
    let results: Vec<Result<_, RunError>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || execute(c))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let mut first_err = None;
    for (c, r) in configs.iter().zip(results) {
        match r {
            Ok(s) => log::info!("{}: {} steps", s.out.display(), s.steps),
            Err(e) => {
                log::error!("{}: {e}", c.out.display());
                first_err.get_or_insert(Failure::Run(e));
            }
        }
    }
    first_err.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Sweep { common, schemes, forms } => sweep(common, schemes.as_deref(), forms.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
