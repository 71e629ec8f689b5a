//! `sheafcd`: single detections, parameter sweeps and cohomology queries.
//!
//! Exit status 0 on success, 1 on usage errors (bad flags, invalid parameter
//! values, unreadable graph files), 2 when the computation itself fails or
//! every run aborts.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sheaf_communities::experiments::csv_string;
use sheaf_communities::{
    cohomology_dims, detect_constant, detect_deterministic, detect_nonconstant, karate_club, load_edge_list,
    run_sweep, BumpFunction, CellularSheaf, ConstantSheafParams, DetectionResult, Error, FlowParams, Graph, Grid,
    Status, SweepConfig,
};

pub const USAGE_ERROR: i32 = 1;
pub const RUNTIME_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sheafcd", version, about = "Community detection with sheaf opinion dynamics")]
struct Cli {
    /// Edge-list file, or `karate` for the built-in karate club network.
    #[arg(long, global = true, default_value = "karate")]
    graph: String,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also write the output to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Opinion flow on the constant sheaf.
    Constant(ConstantArgs),
    /// Random edge retention.
    Nonconstant {
        #[arg(long)]
        p: f64,
    },
    /// Degree and common-neighbor edge retention.
    Deterministic {
        #[arg(long)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
    },
    /// Monte Carlo sweep over a parameter grid, written as CSV.
    Sweep(SweepArgs),
    /// Dimensions of H⁰ and H¹.
    Cohomology {
        /// `constant:<n>` or `edgeproj`.
        #[arg(long, default_value = "constant:1")]
        sheaf: String,
    },
}

#[derive(Debug, Args)]
struct FlowArgs {
    #[arg(long, default_value = "1", value_parser = parse_phi)]
    phi: BumpFunction,
    #[arg(long, default_value_t = 0.0033)]
    eps: f64,
    #[arg(long, default_value_t = 1000.0)]
    tmax: f64,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
}

impl FlowArgs {
    fn params(&self) -> FlowParams {
        FlowParams { phi: self.phi, eps: self.eps, t_max: self.tmax, dt: self.dt }
    }
}

#[derive(Debug, Args)]
struct ConstantArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long)]
    d: f64,
    #[command(flatten)]
    flow: FlowArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Algo {
    Constant,
    Nonconstant,
    Deterministic,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    /// Comma-separated widths.
    #[arg(long, value_delimiter = ',')]
    d_grid: Option<Vec<f64>>,
    /// Comma-separated bump indices.
    #[arg(long, value_delimiter = ',', value_parser = parse_phi)]
    phi_grid: Option<Vec<BumpFunction>>,
    /// Comma-separated stalk dimensions.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    /// Comma-separated retention probabilities.
    #[arg(long, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,
    /// `a-list/b-list`, both comma-separated; every pair is visited.
    #[arg(long, value_parser = parse_ab_grid, allow_hyphen_values = true)]
    ab_grid: Option<(Vec<f64>, Vec<f64>)>,
    #[arg(long, default_value_t = 0.0033)]
    eps: f64,
    #[arg(long, default_value_t = 1000.0)]
    tmax: f64,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
}

fn parse_phi(s: &str) -> Result<BumpFunction, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    let values = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if values.iter().any(|x| !x.is_finite()) {
        return Err(format!("non-finite value in {s:?}"));
    }
    Ok(values)
}

fn parse_ab_grid(s: &str) -> Result<(Vec<f64>, Vec<f64>), String> {
    let (a, b) = s.split_once('/').ok_or_else(|| format!("expected `a-list/b-list`, got {s:?}"))?;
    Ok((parse_list(a)?, parse_list(b)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SheafKind {
    Constant(usize),
    EdgeProjection,
}

fn parse_sheaf(s: &str) -> Result<SheafKind, String> {
    if s == "edgeproj" {
        return Ok(SheafKind::EdgeProjection);
    }
    s.strip_prefix("constant:")
        .and_then(|n| n.parse().ok())
        .filter(|&n| n > 0)
        .map(SheafKind::Constant)
        .ok_or_else(|| format!("expected `constant:<n>` with n ≥ 1 or `edgeproj`, got {s:?}"))
}

/// A failure and the exit status it maps to.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: USAGE_ERROR, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NumericalFailure { .. } | Error::Io(_) => RUNTIME_ERROR,
            _ => USAGE_ERROR,
        };
        Failure { code, message: e.to_string() }
    }
}

fn load_graph(source: &str) -> Result<Graph, Failure> {
    if source == "karate" {
        return Ok(karate_club());
    }
    let text =
        std::fs::read_to_string(source).map_err(|e| Failure::usage(format!("cannot read graph file {source}: {e}")))?;
    load_edge_list(&text).map_err(|e| Failure::usage(format!("{source}: {e}")))
}

/// Parses `argv` (program name first), runs the command and returns the exit status.
pub fn run_cli<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                USAGE_ERROR
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    match execute(&cli) {
        Ok((text, code)) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &text) {
                    let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                    return RUNTIME_ERROR;
                }
            }
            if stdout.write_all(text.as_bytes()).is_err() {
                return RUNTIME_ERROR;
            }
            code
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

/// Produces the complete output text before anything is written.
fn execute(cli: &Cli) -> Result<(String, i32), Failure> {
    if let Command::Cohomology { sheaf } = &cli.command {
        let kind = parse_sheaf(sheaf).map_err(Failure::usage)?;
        let g = load_graph(&cli.graph)?;
        let s = match kind {
            SheafKind::Constant(n) => CellularSheaf::constant(&g, n)?,
            SheafKind::EdgeProjection => CellularSheaf::edge_projection(&g),
        };
        let h = cohomology_dims(&s);
        return Ok((format!("h0 = {}, h1 = {}\n", h.h0, h.h1), 0));
    }

    let g = load_graph(&cli.graph)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let result = match &cli.command {
        Command::Constant(args) => {
            let params = ConstantSheafParams { n: args.n, d: args.d, flow: args.flow.params() };
            detect_constant(&g, &params, &mut rng)?
        }
        Command::Nonconstant { p } => detect_nonconstant(&g, *p, &mut rng)?,
        Command::Deterministic { a, b } => detect_deterministic(&g, *a, *b)?,
        Command::Sweep(args) => return sweep(&g, args, cli.seed),
        Command::Cohomology { .. } => unreachable!("handled above"),
    };
    Ok(render_detection(&result))
}

fn render_detection(result: &DetectionResult) -> (String, i32) {
    let mut text = String::new();
    if let (Some(partition), Some(q)) = (&result.partition, result.modularity) {
        for (id, members) in partition.clusters().iter().enumerate() {
            let members: Vec<String> = members.iter().map(usize::to_string).collect();
            let _ = writeln!(text, "cluster {id}: {}", members.join(" "));
        }
        let _ = writeln!(text, "Q = {q:.6}");
    }
    let _ = writeln!(text, "status: {}", result.status);
    let code = if result.status == Status::Aborted { RUNTIME_ERROR } else { 0 };
    (text, code)
}

fn sweep(g: &Graph, args: &SweepArgs, seed: u64) -> Result<(String, i32), Failure> {
    let flow = FlowParams { eps: args.eps, t_max: args.tmax, dt: args.dt, ..Default::default() };
    let grid = match args.algo {
        Algo::Constant => {
            let Grid::Constant { d, phi, n, .. } = Grid::default_constant() else { unreachable!() };
            Grid::Constant {
                d: args.d_grid.clone().unwrap_or(d),
                phi: args.phi_grid.clone().unwrap_or(phi),
                n: args.n_grid.clone().unwrap_or(n),
                flow,
            }
        }
        Algo::Nonconstant => args.p_grid.clone().map_or_else(Grid::default_nonconstant, |p| Grid::Nonconstant { p }),
        Algo::Deterministic => {
            args.ab_grid.clone().map_or_else(Grid::default_deterministic, |(a, b)| Grid::Deterministic { a, b })
        }
    };
    let cfg = SweepConfig { grid, runs: args.runs, master_seed: seed };
    let result = run_sweep(g, &cfg)?;
    let code = if !result.points.is_empty() && result.points.iter().all(|p| p.stats.is_none()) {
        RUNTIME_ERROR
    } else {
        0
    };
    Ok((csv_string(&result), code))
}
