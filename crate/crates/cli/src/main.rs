mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Parser, Subcommand};
use log::{error, Level, Log, Metadata, Record};
use maxwell_qr::par::Exec;

use commands::Context;
use config::Config;
use error::CliError;
use report::OutDir;

#[derive(Parser)]
#[command(name = "maxwell-qr", version, about = "Maxwell data completion by quasi-reversibility")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file; defaults are used when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration value, e.g. `--set method.delta=1e-5`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Seed for every random draw (noise, test vectors).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, short, global = true)]
    jobs: Option<usize>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    /// Treat logged warnings as numerical failures.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Generate the mesh and boundary partition.
    Mesh,
    /// Generate Cauchy data.
    Synth,
    /// Solve once at `method.delta`.
    Solve,
    /// Sweep delta over the configured grid.
    Sweep,
    /// Sweep delta and locate the L-curve corner.
    Lcurve,
    /// Compare plain ring solves with extension/restriction through the disc.
    Extend,
    /// Run the invariant suite on small meshes.
    Check,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Mesh => "mesh",
            Self::Synth => "synth",
            Self::Solve => "solve",
            Self::Sweep => "sweep",
            Self::Lcurve => "lcurve",
            Self::Extend => "extend",
            Self::Check => "check",
        }
    }
}

/// Forwards to `env_logger` and counts warnings and errors.
struct CountingLogger {
    inner: env_logger::Logger,
    warnings: AtomicUsize,
}

impl Log for CountingLogger {
    fn enabled(&self, metadata: &Metadata) -> bool {
        metadata.level() <= Level::Warn || self.inner.enabled(metadata)
    }

    fn log(&self, record: &Record) {
        if record.level() <= Level::Warn {
            self.warnings.fetch_add(1, Ordering::Relaxed);
        }
        if self.inner.matches(record) {
            self.inner.log(record);
        }
    }

    fn flush(&self) {
        self.inner.flush();
    }
}

fn init_logger() -> &'static CountingLogger {
    let inner = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).build();
    let max = inner.filter().max(log::LevelFilter::Warn);
    let logger: &'static CountingLogger = Box::leak(Box::new(CountingLogger { inner, warnings: AtomicUsize::new(0) }));
    log::set_logger(logger).expect("logger installed once");
    log::set_max_level(max);
    logger
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut config = Config::load_with(cli.config.as_deref(), &cli.overrides)?;
    if let Some(dir) = &cli.out {
        config.output.dir = dir.clone();
    }
    let exp = config.validate()?;
    let exec = match cli.jobs {
        Some(0) => return Err(CliError::Config("--jobs must be at least 1".into())),
        Some(1) => Exec::Sequential,
        _ => Exec::Parallel,
    };
    let out = OutDir::create(&exp.out_dir)?;
    let mut ctx = Context { exp, seed: cli.seed, exec, out, command: cli.command.name() };
    let body = |ctx: &mut Context| match cli.command {
        Command::Mesh => commands::mesh(ctx),
        Command::Synth => commands::synth(ctx),
        Command::Solve => commands::solve(ctx),
        Command::Sweep => commands::sweep_cmd(ctx),
        Command::Lcurve => commands::lcurve(ctx),
        Command::Extend => commands::extend(ctx),
        Command::Check => commands::check(ctx),
    };
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.jobs.filter(|&n| n > 1) {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?;
        return pool.install(|| body(&mut ctx));
    }
    body(&mut ctx)?;
    for path in &ctx.out.written {
        log::debug!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let logger = init_logger();
    let result = run(&cli).and_then(|()| {
        let n = logger.warnings.load(Ordering::Relaxed);
        if cli.strict && n > 0 {
            Err(CliError::Numerical(format!("{n} warning(s) under --strict")))
        } else {
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
