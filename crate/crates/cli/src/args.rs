use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "biharmonic",
    version,
    about = "Radial solutions, energies and branches for Δ²u = |u|^{p-1}u"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical exponents, stability constants and predicates.
    Exponents(ExponentsArgs),
    /// Shoot the entire radial solution with u(0) = a.
    Shoot(ShootArgs),
    /// Monotonicity energy of a field file.
    Energy(EnergyArgs),
    /// Homogeneity defect of rescalings of a field file.
    Blowdown(BlowdownArgs),
    /// Pohozaev balance of a field file on balls.
    Pohozaev(PohozaevArgs),
    /// Trace the minimal branch of the Navier problem on the unit ball.
    Branch(BranchArgs),
    /// Run the verification suite and print a pass/fail table.
    VerifyAll(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output format.
    #[arg(long, value_enum, conflicts_with_all = ["json", "csv"])]
    pub format: Option<Format>,
    /// Shorthand for --format json.
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    /// Shorthand for --format csv.
    #[arg(long)]
    pub csv: bool,
    /// Write to this file instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

impl Output {
    pub fn format_or(&self, default: Format) -> Format {
        match (self.format, self.json, self.csv) {
            (Some(f), _, _) => f,
            (None, true, _) => Format::Json,
            (None, _, true) => Format::Csv,
            _ => default,
        }
    }
}

#[derive(Debug, Args)]
pub struct Problem {
    /// Dimension.
    #[arg(long)]
    pub n: u32,
    /// Exponent of the nonlinearity.
    #[arg(long)]
    pub p: f64,
}

#[derive(Debug, Args)]
pub struct ExponentsArgs {
    #[command(flatten)]
    pub problem: Problem,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct ShootArgs {
    #[command(flatten)]
    pub problem: Problem,
    /// u(0).
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    /// Integrate with this Δu(0) instead of shooting for it.
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Solve Δ²u = -u^{-p} instead (requires --b).
    #[arg(long, requires = "b")]
    pub negative_exponent: bool,
    #[arg(long, default_value_t = 100.0)]
    pub r_max: f64,
    /// Relative tolerance of the integrator.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct FieldInput {
    /// Field CSV with columns r,u,du,v,dv.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub problem: Problem,
    /// The field is singular at the origin.
    #[arg(long)]
    pub singular: bool,
    /// Accuracy of the field data.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub field: FieldInput,
    /// Log-spaced radii `r1:r2:count`.
    #[arg(long)]
    pub radii: String,
    /// Interpret the field as a solution of Δ²u = -u^{-p}.
    #[arg(long)]
    pub negative_exponent: bool,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct BlowdownArgs {
    #[command(flatten)]
    pub field: FieldInput,
    /// Comma-separated scale factors.
    #[arg(long, value_delimiter = ',', required = true)]
    pub lambdas: Vec<f64>,
    /// Annulus `r1:r2` for the homogeneity defect.
    #[arg(long, default_value = "1:2")]
    pub window: String,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct PohozaevArgs {
    #[command(flatten)]
    pub field: FieldInput,
    /// Comma-separated ball radii.
    #[arg(long = "R", value_delimiter = ',', required = true)]
    pub radii: Vec<f64>,
    /// Interpret the field as a solution of Δ²u = λ(1+u)^p.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct BranchArgs {
    #[command(flatten)]
    pub problem: Problem,
    /// Number of grid cells.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    /// Stop after this scaled arclength.
    #[arg(long, default_value_t = 50.0)]
    pub max_arclength: f64,
    /// Write the refined field of every branch point into this directory.
    #[arg(long)]
    pub fields_dir: Option<PathBuf>,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub problem: Problem,
    /// Coarse grid of the Navier branch check (the fine grid doubles it).
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    /// Print the table as JSON.
    #[arg(long)]
    pub json: bool,
}
