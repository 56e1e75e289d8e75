//! Command-line front end for `colombeau-kit`.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a
//! computation errors, 2 on usage errors.

pub mod config;
pub mod report;
pub mod suite;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use colombeau_kit::mollifier::MAX_ORDER;
use colombeau_kit::upsilon::AssociationCase;

use config::{parse_unit_mode, Format, RunConfig};
use report::Report;

pub const THREADS_ENV: &str = "COLOMBEAU_KIT_THREADS";

#[derive(Parser, Debug)]
#[command(name = "colombeau-kit", version, about = "Regularized point-electron calculus: checks and reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Plain `key = value` configuration file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Mollifier order (even, 2..=16).
    #[arg(long, global = true, value_parser = parse_order)]
    pub q: Option<i64>,
    /// gaussian or natural.
    #[arg(long, global = true, value_parser = parse_unit_mode_arg)]
    pub unit_mode: Option<String>,
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    #[arg(long, global = true)]
    pub csv: bool,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub moment_tol: Option<f64>,
    #[arg(long, global = true)]
    pub assoc_tol: Option<f64>,
    #[arg(long, global = true)]
    pub fit_tol: Option<f64>,
    #[arg(long, global = true)]
    pub ratio_max: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    All,
    CoulombField,
    ChargeDensity,
    DeltaSquared,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Mollifier normalization and vanishing moments.
    Mollifier {
        #[command(flatten)]
        common: Common,
    },
    /// Moment table `M[m,n]`, closed form against quadrature.
    Moments {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        m_max: u32,
        #[arg(long, default_value_t = 4)]
        n_max: u32,
    },
    /// Association checks over the test-function bank.
    Associate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = CaseArg::All)]
        case: CaseArg,
    },
    /// Every closed form against quadrature at one regularization point.
    Reproduce {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
    },
    /// Solve for `(a, ε)` from mass and spin, then round-trip.
    Renorm {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 2.0)]
        g: f64,
        /// Rest energy `mc²` in natural units.
        #[arg(long, default_value_t = 1.0)]
        m: f64,
    },
    /// Closed forms against quadrature over an `ε × a` grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Geometric `start:stop:count`.
        #[arg(long)]
        eps_grid: Option<String>,
        #[arg(long)]
        a_grid: Option<String>,
    },
}

fn parse_order(s: &str) -> Result<i64, String> {
    let q: i64 = s.parse().map_err(|_| format!("{s:?} is not an integer"))?;
    if q < 2 || q % 2 != 0 || q > MAX_ORDER {
        return Err(format!("mollifier order must be even with 2 <= q <= {MAX_ORDER}, got {q}"));
    }
    Ok(q)
}

fn parse_unit_mode_arg(s: &str) -> Result<String, String> {
    parse_unit_mode(s).map(|_| s.to_string()).map_err(|e| e.to_string())
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Mollifier { common }
            | Command::Moments { common, .. }
            | Command::Associate { common, .. }
            | Command::Reproduce { common, .. }
            | Command::Renorm { common, .. }
            | Command::Sweep { common, .. } => common,
        }
    }
}

/// Usage problems map to exit code 2, everything else to 1.
enum Failure {
    Usage(anyhow::Error),
    Run(anyhow::Error),
}

fn resolve(cmd: &Command) -> Result<RunConfig, Failure> {
    let c = cmd.common();
    let mut cfg = RunConfig::default();
    let usage = Failure::Usage;
    if let Some(path) = &c.config {
        cfg.load_file(path).map_err(usage)?;
    }
    let mut set = |k: &str, v: String| cfg.set(k, &v).map_err(Failure::Usage);
    if let Some(q) = c.q {
        set("q", q.to_string())?;
    }
    if let Some(u) = &c.unit_mode {
        set("unit_mode", u.clone())?;
    }
    for (k, v) in
        [("moment_tol", c.moment_tol), ("assoc_tol", c.assoc_tol), ("fit_tol", c.fit_tol), ("ratio_max", c.ratio_max)]
    {
        if let Some(v) = v {
            set(k, v.to_string())?;
        }
    }
    if let Command::Reproduce { eps, a, .. } = cmd {
        if let Some(e) = eps {
            set("eps", e.to_string())?;
        }
        if let Some(a) = a {
            set("a", a.to_string())?;
        }
    }
    if let Command::Sweep { eps_grid, a_grid, .. } = cmd {
        if let Some(g) = eps_grid {
            set("eps_grid", g.clone())?;
        }
        if let Some(g) = a_grid {
            set("a_grid", g.clone())?;
        }
    }
    if c.json {
        cfg.format = Format::Json;
    } else if c.csv {
        cfg.format = Format::Csv;
    }
    if let Some(o) = &c.output {
        cfg.output = Some(o.clone());
    }
    parse_order(&cfg.q.to_string()).map_err(|e| Failure::Usage(anyhow::anyhow!(e)))?;
    if matches!(cmd, Command::Sweep { .. }) {
        cfg.validate().map_err(Failure::Usage)?;
    }
    Ok(cfg)
}

fn execute(cmd: &Command, cfg: &RunConfig) -> anyhow::Result<Report> {
    match cmd {
        Command::Mollifier { .. } => suite::mollifier_report(cfg),
        Command::Moments { m_max, n_max, .. } => suite::moments_report(cfg, *m_max, *n_max),
        Command::Associate { case, .. } => {
            let cases: Vec<AssociationCase> = match case {
                CaseArg::All => AssociationCase::ALL.to_vec(),
                CaseArg::CoulombField => vec![AssociationCase::CoulombField],
                CaseArg::ChargeDensity => vec![AssociationCase::ChargeDensity],
                CaseArg::DeltaSquared => vec![AssociationCase::DeltaSquared],
            };
            suite::associate_report(cfg, &cases)
        }
        Command::Reproduce { .. } => suite::reproduce_report(cfg),
        Command::Renorm { s, g, m, .. } => suite::renorm_report(cfg, *s, *g, *m),
        Command::Sweep { .. } => suite::sweep_report(cfg),
    }
}

/// Worker count from `COLOMBEAU_KIT_THREADS`, if set and positive.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Parses `argv`, runs the subcommand and writes its report.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = resolve(&cli.command).and_then(|cfg| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = thread_cap() {
            builder = builder.num_threads(n);
        }
        let pool = builder.build().map_err(|e| Failure::Run(e.into()))?;
        let report = pool.install(|| execute(&cli.command, &cfg)).map_err(Failure::Run)?;
        Ok((cfg, report))
    });
    match outcome {
        Ok((cfg, report)) => {
            if let Some(sol) = &report.solution {
                if sol.warn {
                    eprintln!("WARN: eps/a = {:.4e} exceeds 0.1", sol.ratio);
                }
            }
            let bytes = report.emit(cfg.format);
            let written = match &cfg.output {
                Some(path) => std::fs::write(path, &bytes).map_err(anyhow::Error::from),
                None => std::io::stdout().write_all(&bytes).map_err(anyhow::Error::from),
            };
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return 1;
            }
            if report.passed() {
                0
            } else {
                1
            }
        }
        Err(Failure::Usage(e)) => {
            eprintln!("usage error: {e:#}");
            eprintln!("usage: colombeau-kit <mollifier|moments|associate|reproduce|renorm|sweep> [options]");
            2
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
