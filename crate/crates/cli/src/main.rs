//! `specgap`: convergence-rate bounds and truncation estimates for band
//! Markov chains.
//!
//! Exit codes: 0 success, 1 `validate` found violations, 2 bad input,
//! 3 a numerical procedure failed.

mod model;
mod report;
mod spec;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use specgap_core::truncation::{estimate_rho2, parameter_sweep};
use specgap_core::{EstimateOptions, SparseRow};

use model::{ModelConfig, Target};
use report::{Format, SweepRow};
use spec::{parse_number, Analysis, SpecError};
use tables::TableName;

#[derive(Parser)]
#[command(name = "specgap", version, about = "Geometric l2 convergence rates of band Markov chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Include the rho_k trajectory
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Upper bound alpha0 for the essential spectral radius
    Alpha0(ModelArgs),
    /// Tail ratio tau of the invariant law
    Tau(ModelArgs),
    /// Truncation estimate of the l2 convergence rate
    Rho2 {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        est: EstimateArgs,
    },
    /// Run rho2 over a grid of one parameter
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        est: EstimateArgs,
        /// Parameter to vary (a, b, p, q, r0, r, tau, lambda)
        #[arg(long)]
        param: String,
        /// Comma-separated grid values
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Recompute a published table and print deltas
    Reproduce {
        #[arg(value_enum)]
        table: TableName,
        #[command(flatten)]
        est: EstimateArgs,
    },
    /// Check rows of a chain for stochasticity and band structure
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        /// Rows 0..=window are checked
        #[arg(long)]
        window: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelTag {
    /// Bounded-increment walk (--g, --d, --coeffs, --boundary)
    Rw,
    /// Two steps down, one up (--a, --b; or --a a_-2,..,a_1 with optional --boundary)
    RwG2d1,
    /// Birth-death chain with constant rates (--p, --q, --r, --r0)
    Bdmc,
    /// M-H, Poisson target (--q, --r, --lambda)
    MhPoisson,
    /// M-H, target (i+1) tau^i (--q, --r, --tau)
    MhLinearGeometric,
    /// M-H, target tau^i (--q, --r, --tau)
    MhGeometric,
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    /// Chain-spec document (JSON)
    #[arg(long, conflicts_with = "model")]
    spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelTag>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long)]
    g: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// a_-g..a_d, comma-separated
    #[arg(long)]
    coeffs: Option<String>,
    /// Boundary rows as `col:prob,...;col:prob,...`
    #[arg(long)]
    boundary: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    r0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
}

#[derive(Args, Debug, Default)]
struct EstimateArgs {
    /// Stabilization tolerance on |rho_k - rho_(k-1)|
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    k_start: Option<usize>,
}

#[derive(Debug)]
enum AppError {
    Input(String),
    Spec(SpecError),
    Core(specgap_core::Error),
}

impl From<SpecError> for AppError {
    fn from(e: SpecError) -> Self {
        AppError::Spec(e)
    }
}

impl From<specgap_core::Error> for AppError {
    fn from(e: specgap_core::Error) -> Self {
        AppError::Core(e)
    }
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Input(m) => write!(f, "{m}"),
            AppError::Spec(e) => write!(f, "{e}"),
            AppError::Core(e) => write!(f, "{e}"),
        }
    }
}

fn input(msg: impl Into<String>) -> AppError {
    AppError::Input(msg.into())
}

fn number(name: &str, v: &Option<String>) -> Result<Option<f64>, AppError> {
    v.as_deref()
        .map(|s| parse_number(s).map_err(|e| input(format!("--{name}: {e}"))))
        .transpose()
}

fn required(name: &str, v: &Option<String>) -> Result<f64, AppError> {
    number(name, v)?.ok_or_else(|| input(format!("--{name} is required for this model")))
}

fn parse_boundary(text: &str) -> Result<Vec<SparseRow>, AppError> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .filter(|e| !e.trim().is_empty())
                .map(|entry| {
                    let (col, p) = entry
                        .split_once(':')
                        .ok_or_else(|| input(format!("--boundary entry {entry:?} is not col:prob")))?;
                    let col = col
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| input(format!("--boundary column {col:?} is not an index")))?;
                    Ok((col, parse_number(p)?))
                })
                .collect()
        })
        .collect()
}

impl ModelArgs {
    /// The model and the analysis defaults carried by a spec document.
    fn resolve(&self) -> Result<(ModelConfig, Analysis), AppError> {
        if let Some(path) = &self.spec {
            let doc = spec::load(path)?;
            return Ok((doc.model, doc.analysis));
        }
        let tag = self
            .model
            .ok_or_else(|| input("either --spec or --model is required"))?;
        let mh = |target| -> Result<ModelConfig, AppError> {
            Ok(ModelConfig::MetropolisHastings {
                target,
                q: required("q", &self.q)?,
                r: number("r", &self.r)?.unwrap_or(0.5),
            })
        };
        let model = match tag {
            ModelTag::Rw => {
                let a = self
                    .coeffs
                    .as_deref()
                    .ok_or_else(|| input("--coeffs is required for --model rw"))?
                    .split(',')
                    .map(parse_number)
                    .collect::<Result<Vec<_>, _>>()?;
                ModelConfig::Walk {
                    g: self.g.ok_or_else(|| input("--g is required for --model rw"))?,
                    d: self.d.ok_or_else(|| input("--d is required for --model rw"))?,
                    a,
                    boundary: parse_boundary(
                        self.boundary
                            .as_deref()
                            .ok_or_else(|| input("--boundary is required for --model rw"))?,
                    )?,
                }
            }
            ModelTag::RwG2d1 if self.a.as_deref().is_some_and(|a| a.contains(',')) => {
                // --a given as the increment law a_-2..a_1
                let a = self
                    .a
                    .as_deref()
                    .unwrap_or_default()
                    .split(',')
                    .map(parse_number)
                    .collect::<Result<Vec<_>, _>>()?;
                if a.len() != 4 {
                    return Err(input(format!(
                        "--a for rw-g2d1 takes one boundary value or 4 coefficients, got {}",
                        a.len()
                    )));
                }
                let boundary = match self.boundary.as_deref() {
                    Some(text) => parse_boundary(text)?,
                    None => vec![vec![(0, 0.5), (1, 0.5)], vec![(0, 0.5), (2, 0.5)]],
                };
                ModelConfig::Walk {
                    g: 2,
                    d: 1,
                    a,
                    boundary,
                }
            }
            ModelTag::RwG2d1 => {
                let a = required("a", &self.a)?;
                ModelConfig::TwoDownOneUp {
                    a,
                    b: number("b", &self.b)?.unwrap_or(a),
                }
            }
            ModelTag::Bdmc => {
                let p = required("p", &self.p)?;
                let q = required("q", &self.q)?;
                ModelConfig::Bdmc {
                    p,
                    q,
                    r: number("r", &self.r)?.unwrap_or(1.0 - p - q),
                    r0: required("r0", &self.r0)?,
                }
            }
            ModelTag::MhPoisson => mh(Target::Poisson {
                lambda: number("lambda", &self.lambda)?.unwrap_or(1.0),
            })?,
            ModelTag::MhLinearGeometric => mh(Target::LinearGeometric {
                tau: required("tau", &self.tau)?,
            })?,
            ModelTag::MhGeometric => mh(Target::Geometric {
                tau: required("tau", &self.tau)?,
            })?,
        };
        Ok((model, Analysis::default()))
    }
}

impl EstimateArgs {
    fn options(&self, analysis: &Analysis) -> Result<EstimateOptions, AppError> {
        let mut opts = EstimateOptions::default();
        if let Some(eps) = number("eps", &self.eps)?.or(analysis.eps.map(|n| n.0)) {
            opts.eps = eps;
        }
        if let Some(k) = self.k_max.or(analysis.k_max) {
            opts.k_max = k;
        }
        if let Some(k) = self.k_start.or(analysis.k_start) {
            opts.k_start = k;
        }
        Ok(opts)
    }
}

fn run(cli: Cli) -> Result<(String, u8), AppError> {
    let format = cli.format;
    match cli.command {
        Command::Alpha0(m) => {
            let (model, _) = m.resolve()?;
            Ok((report::alpha0(&model.alpha0()?, format), 0))
        }
        Command::Tau(m) => {
            let (model, _) = m.resolve()?;
            Ok((report::tau(model.tau()?, format), 0))
        }
        Command::Rho2 { model, est } => {
            let (model, analysis) = model.resolve()?;
            let opts = est.options(&analysis)?;
            let alpha0 = model.alpha0()?.value;
            let result = estimate_rho2(&model.chain()?, alpha0, &opts)?;
            Ok((report::estimate(&result, format, cli.verbose), 0))
        }
        Command::Sweep {
            model,
            est,
            param,
            values,
        } => {
            let (base, analysis) = model.resolve()?;
            let opts = est.options(&analysis)?;
            let grid = values
                .iter()
                .map(|v| parse_number(v))
                .collect::<Result<Vec<_>, _>>()?;
            // reject an unknown parameter once, up front
            base.clone().set(&param, grid[0]).map_err(input)?;
            let with = |v: f64| {
                let mut m = base.clone();
                m.set(&param, v).expect("parameter checked above");
                m
            };
            let points = parameter_sweep(
                |&v: &f64| {
                    let m = with(v);
                    Ok((m.chain()?, m.alpha0()?.value))
                },
                &grid,
                &opts,
            );
            let rows: Vec<SweepRow<'_>> = points
                .iter()
                .map(|point| SweepRow {
                    point,
                    alpha0: with(point.parameter).alpha0().ok().map(|a| a.value),
                })
                .collect();
            for row in &rows {
                if let Err(e) = &row.point.outcome {
                    eprintln!("warning: {param} = {}: {e}", row.point.parameter);
                }
            }
            Ok((report::sweep(&rows, format), 0))
        }
        Command::Reproduce { table, est } => {
            let opts = est.options(&Analysis::default())?;
            let rows = tables::reproduce(table, &opts);
            Ok((report::table(&rows, format), 0))
        }
        Command::Validate { model, window } => {
            let (model, analysis) = model.resolve()?;
            let window = window.or(analysis.window).unwrap_or(200);
            let chain = model.chain()?;
            let rep = chain.validate(window);
            let code = if rep.is_valid() { 0 } else { 1 };
            Ok((report::validation(&rep, format), code))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
