//! `finsler`: residual checks, classification, fiber solutions, parallel
//! transport and Randers/ellipsoid facts from JSON inputs.
//!
//! Exit codes: 0 pass, 1 a requested check failed, 2 input error, 3 numeric error.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "finsler", version, about = "Douglas and generalized Berwald checks for Finsler metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Number of sample directions / angles
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// Tolerance override, repeatable (e.g. --tol pde5=1e-7)
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
    /// Directory for report files; reports go to stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Max residuals of the Douglas, generalized Berwald and PDE systems over a direction grid
    Check {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        conn_gb: Option<PathBuf>,
        #[arg(long)]
        conn_d: Option<PathBuf>,
        /// Base point "x1,x2,..." (default: the connection's "at", else the origin)
        #[arg(long)]
        at: Option<String>,
        /// Comma-separated subset of douglas,gb,pde5,pde6,convexity
        #[arg(long, default_value = "douglas,gb,pde5")]
        checks: String,
        #[command(flatten)]
        common: Common,
    },
    /// Classify a 2D connection pair (or K coefficients given directly)
    Classify {
        #[arg(long)]
        conn_gb: Option<PathBuf>,
        #[arg(long)]
        conn_d: Option<PathBuf>,
        #[arg(long)]
        at: Option<String>,
        /// "K3,K2,K1,K0" in normalized torsion form, instead of connections
        #[arg(long, allow_hyphen_values = true)]
        k: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Periodic solutions of the central equation for given K
    SolveFiber {
        #[arg(long, allow_hyphen_values = true)]
        k: Option<String>,
        #[arg(long)]
        conn_gb: Option<PathBuf>,
        #[arg(long)]
        conn_d: Option<PathBuf>,
        #[arg(long)]
        at: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Parallel transport along a curve and the drift of F
    Transport {
        /// Connection whose transport is integrated
        #[arg(long)]
        conn_gb: PathBuf,
        #[arg(long)]
        metric: PathBuf,
        /// Curve JSON: circle, segment or polyline
        #[arg(long)]
        curve: PathBuf,
        /// Initial vector "X1,X2,..."
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[command(flatten)]
        common: Common,
    },
    /// Linear equivalence of two shifted ellipsoids
    Ellipsoid {
        #[arg(long)]
        e1: PathBuf,
        #[arg(long)]
        e2: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Randers criteria on a region, or the navigation invariant chain
    Randers {
        /// Randers metric JSON
        #[arg(long)]
        metric: Option<PathBuf>,
        /// Navigation JSON {h, W}
        #[arg(long)]
        navigation: Option<PathBuf>,
        /// Square region "half_width,steps"
        #[arg(long, default_value = "1,5")]
        region: String,
        /// Second point for the isometry test "x1,x2"
        #[arg(long, allow_hyphen_values = true)]
        compare: Option<String>,
        #[arg(long)]
        at: Option<String>,
        /// Comma-separated subset of closed,constant that must pass
        #[arg(long, default_value = "")]
        checks: String,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { metric, conn_gb, conn_d, at, checks, common } => {
            commands::check(&metric, conn_gb.as_deref(), conn_d.as_deref(), at.as_deref(), &checks, &common)
        }
        Command::Classify { conn_gb, conn_d, at, k, common } => {
            commands::classify(conn_gb.as_deref(), conn_d.as_deref(), at.as_deref(), k.as_deref(), &common)
        }
        Command::SolveFiber { k, conn_gb, conn_d, at, common } => {
            commands::solve_fiber(conn_gb.as_deref(), conn_d.as_deref(), at.as_deref(), k.as_deref(), &common)
        }
        Command::Transport { conn_gb, metric, curve, x0, common } => {
            commands::transport(&conn_gb, &metric, &curve, &x0, &common)
        }
        Command::Ellipsoid { e1, e2, common } => commands::ellipsoid(&e1, &e2, &common),
        Command::Randers { metric, navigation, region, compare, at, checks, common } => commands::randers(
            metric.as_deref(),
            navigation.as_deref(),
            &region,
            compare.as_deref(),
            at.as_deref(),
            &checks,
            &common,
        ),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
