//! Batch command line front end. Every command reads its inputs from files,
//! writes one document to `--out` (stdout by default) and reports failures on
//! stderr with a nonzero exit code: 2 when the mathematical preconditions of
//! the request do not hold, 1 for everything else.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::covers::{
    greedy_net_cover, interval_cover, tree_annuli_cover, Cover, CoverError, CoverStats,
};
use crate::dimension::{bound_curve, dim_exact_tiny, dim_upper, scale_family, DimQuery, DimensionError};
use crate::io::{
    cover_from_json, cover_to_json, dim_to_json, parse_edge_list, space_from_json, space_to_json,
    stats_to_json, witness_to_json, write_bound_csv, FormatError,
};
use crate::spaces::{FiniteMetricSpace, SpaceError};
use crate::witness::{Mode, WitnessContext, WitnessError, WitnessParams};

#[derive(Debug, Parser)]
#[command(name = "propa", version, about = "Finite-scale Property A witnesses for graph metrics")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Space document to read.
    #[arg(long, global = true, value_name = "FILE")]
    pub space: Option<PathBuf>,
    /// Cover document to read.
    #[arg(long, global = true, value_name = "FILE")]
    pub cover: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a space document.
    GenSpace(GenSpaceArgs),
    /// Build a cover of the space given by --space.
    GenCover(GenCoverArgs),
    /// Multiplicity, mesh and Lebesgue data of a cover.
    Stats,
    /// Construct the averaged witness and audit its variation bound.
    Witness(WitnessArgs),
    /// Bound curve over several scales, as CSV.
    Sweep(SweepArgs),
    /// Upper bound on the asymptotic dimension at one scale.
    Dim(DimArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct GenSpaceArgs {
    /// Grid with the given side lengths, e.g. `12` or `6,6`.
    #[arg(long, value_delimiter = ',', value_name = "D1[,D2...]")]
    pub grid: Option<Vec<u32>>,
    /// Rooted tree as `arity,depth`.
    #[arg(long, value_delimiter = ',', num_args = 1, value_name = "ARITY,DEPTH")]
    pub tree: Option<Vec<u32>>,
    /// Edge-list file: vertex count on the first line, then `u v` per edge.
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct GenCoverArgs {
    /// Interval cover of a grid.
    #[arg(long, value_name = "L", value_parser = clap::value_parser!(u32).range(1..))]
    pub interval: Option<u32>,
    /// Annulus cover of a tree.
    #[arg(long, value_name = "L", value_parser = clap::value_parser!(u32).range(1..))]
    pub tree_annuli: Option<u32>,
    /// Balls of radius 2r around a greedy r-net.
    #[arg(long, value_name = "R", value_parser = clap::value_parser!(u32).range(1..))]
    pub net: Option<u32>,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    /// Averaging scale.
    #[arg(long = "n", value_parser = clap::value_parser!(u32).range(1..))]
    pub n: u32,
    /// Displacement bound.
    #[arg(long = "R", default_value_t = 1)]
    pub r: u32,
    /// Only construct the witness and measure distances.
    #[arg(long)]
    pub no_bound: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated scales.
    #[arg(long = "n", value_delimiter = ',', required = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub n: Vec<u32>,
    /// Displacement bound.
    #[arg(long = "R", default_value_t = 1)]
    pub r: u32,
    /// The cover at scale n uses parameter COEFF * n.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    pub ell_rule: u32,
}

#[derive(Debug, Args)]
pub struct DimArgs {
    /// Required Lebesgue number.
    #[arg(long)]
    pub lambda: u32,
    /// Largest admissible element diameter.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub mesh_cap: u32,
    /// Also compute the exact value (at most 10 points).
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("missing --{0}")]
    MissingInput(&'static str),
    #[error("--tree expects `arity,depth`")]
    TreeShape,
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: FormatError },
    #[error("writing output: {0}")]
    Write(#[from] std::io::Error),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error("inequality audit failed for pair ({x}, {y})")]
    AuditFailed { x: u32, y: u32 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        let precondition = match self {
            CliError::Witness(e) | CliError::Dimension(DimensionError::Witness(e)) => {
                !matches!(e, WitnessError::Space(_))
            }
            CliError::Dimension(e) => {
                matches!(e, DimensionError::MeshBelowLambda { .. } | DimensionError::TooLarge { .. })
            }
            _ => false,
        };
        if precondition {
            2
        } else {
            1
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })
}

fn load_space(config: &RunConfig) -> Result<FiniteMetricSpace, CliError> {
    let path = config.space.as_deref().ok_or(CliError::MissingInput("space"))?;
    space_from_json(&read(path)?).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

fn load_cover(config: &RunConfig, space: &FiniteMetricSpace) -> Result<Cover, CliError> {
    let path = config.cover.as_deref().ok_or(CliError::MissingInput("cover"))?;
    cover_from_json(space, &read(path)?).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

fn execute(config: &RunConfig) -> Result<Vec<u8>, CliError> {
    Ok(match &config.command {
        Command::GenSpace(args) => {
            let space = if let Some(dims) = &args.grid {
                FiniteMetricSpace::grid_space(dims)?
            } else if let Some(tree) = &args.tree {
                let [arity, depth] = tree.as_slice() else {
                    return Err(CliError::TreeShape);
                };
                FiniteMetricSpace::tree_space(*arity, *depth)?
            } else {
                let path = args.graph.as_deref().expect("clap enforces one source");
                parse_edge_list(&read(path)?).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })?
            };
            space_to_json(&space).into_bytes()
        }
        Command::GenCover(args) => {
            let space = load_space(config)?;
            let cover = if let Some(ell) = args.interval {
                interval_cover(&space, ell)?
            } else if let Some(ell) = args.tree_annuli {
                tree_annuli_cover(&space, ell)?
            } else {
                greedy_net_cover(&space, args.net.expect("clap enforces one generator"))?
            };
            cover_to_json(&cover).into_bytes()
        }
        Command::Stats => {
            let space = load_space(config)?;
            let cover = load_cover(config, &space)?;
            stats_to_json(&CoverStats::measure(&space, &cover)).into_bytes()
        }
        Command::Witness(args) => {
            let space = load_space(config)?;
            let cover = load_cover(config, &space)?;
            let mode = if args.no_bound { Mode::ConstructionOnly } else { Mode::Bound };
            let report = WitnessContext::new(&space, &cover).report(WitnessParams::new(args.n, args.r), mode)?;
            if !report.all_pairs_ok {
                return Err(CliError::AuditFailed { x: report.worst_pair.x.0, y: report.worst_pair.y.0 });
            }
            witness_to_json(&report).into_bytes()
        }
        Command::Sweep(args) => {
            let space = load_space(config)?;
            let family = scale_family(&space, args.ell_rule, &args.n)?;
            let rows = bound_curve(&space, &family, args.r, &args.n)?;
            if let Some(row) = rows.iter().find(|row| !row.audit_ok) {
                return Err(CliError::AuditFailed { x: row.sup_pair.0 .0, y: row.sup_pair.1 .0 });
            }
            let mut buffer = Vec::new();
            write_bound_csv(&rows, &mut buffer)?;
            buffer
        }
        Command::Dim(args) => {
            let space = load_space(config)?;
            let query = DimQuery::new(args.lambda, args.mesh_cap);
            let mut estimate = dim_upper(&space, query)?;
            if args.exact {
                estimate.exact = Some(dim_exact_tiny(&space, query)?);
            }
            dim_to_json(&estimate).into_bytes()
        }
    })
}

/// Parses `args` (including the program name) and runs one command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(config) => config,
        Err(err) => {
            let informational = matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let rendered = err.render().to_string();
            let _ = if informational { stdout.write_all(rendered.as_bytes()) } else { stderr.write_all(rendered.as_bytes()) };
            return if informational { 0 } else { 1 };
        }
    };
    let outcome = execute(&config).and_then(|bytes| match &config.out {
        Some(path) => Ok(fs::write(path, bytes)?),
        None => Ok(stdout.write_all(&bytes)?),
    });
    match outcome {
        Ok(()) => 0,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            err.exit_code()
        }
    }
}
