use clap::{Args, Parser, Subcommand};
use hsdft::commands::{self, Outcome, UNITS};
use hsdft::config::{BranchChoice, RunConfig};
use hsdft::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hsdft", version, about = "Hard-sphere fluid with attractive self-potential in a ball")]
struct Cli {
    /// Print the table converting dimensionless variables to physical units and exit.
    #[arg(long)]
    units: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads for parameter sweeps.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Coupling constant; replaces the configured alpha grid.
    #[arg(long)]
    alpha: Option<f64>,
    /// Chemical potential ratio; replaces the configured gamma grid.
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// Container radius.
    #[arg(long)]
    radius: Option<f64>,
    /// Quadrature nodes (multiple of 8).
    #[arg(long)]
    nodes: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Pressure and chemical potential against volume fraction.
    EosTable(Common),
    /// Minimal and/or maximal container solutions over the parameter grid.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        branch: Option<BranchChoice>,
    },
    /// Triplicity boundaries, coexistence and droplet criterion over the alpha grid.
    PhaseDiagram {
        #[command(flatten)]
        common: Common,
        /// Also locate the container transitions for every alpha.
        #[arg(long)]
        container: bool,
    },
    /// Grand- and petit-canonical transitions at the first alpha.
    Transition(Common),
    /// Spectral radius of the convolution operator.
    Spectral(Common),
    /// Predicate and invariant suite.
    Check(Common),
}

fn load(c: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &c.out {
        cfg.out = o.clone();
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(a) = c.alpha {
        cfg.alpha_grid = vec![a];
    }
    if let Some(g) = c.gamma {
        cfg.gamma_grid = vec![g];
    }
    if let Some(r) = c.radius {
        cfg.domain.radius = r;
    }
    if let Some(n) = c.nodes {
        cfg.domain.nodes = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

type Runner = Box<dyn Fn(&mut RunConfig) -> Result<Outcome, Error> + Send + Sync>;

fn run(cli: Cli) -> Result<Outcome, Error> {
    let Some(command) = cli.command else {
        return Err(Error::Config("no subcommand given (see --help)".into()));
    };
    let (common, f): (Common, Runner) = match command {
        Command::EosTable(c) => (c, Box::new(|cfg| commands::cmd_eos_table(cfg))),
        Command::Solve { common, branch } => (
            common,
            Box::new(move |cfg| {
                if let Some(b) = branch {
                    cfg.branch = b;
                }
                commands::cmd_solve(cfg)
            }),
        ),
        Command::PhaseDiagram { common, container } => (
            common,
            Box::new(move |cfg| {
                cfg.container |= container;
                commands::cmd_phase_diagram(cfg)
            }),
        ),
        Command::Transition(c) => (c, Box::new(|cfg| commands::cmd_transition(cfg))),
        Command::Spectral(c) => (c, Box::new(|cfg| commands::cmd_spectral(cfg))),
        Command::Check(c) => (c, Box::new(|cfg| commands::cmd_check(cfg))),
    };
    let mut cfg = load(&common)?;
    let jobs = common.jobs.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| f(&mut cfg))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.units {
        print!("{UNITS}");
        return ExitCode::SUCCESS;
    }
    match run(cli) {
        Ok(out) => {
            for line in &out.summary {
                println!("{line}");
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
