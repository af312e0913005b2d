//! `dilatation-lab`: runs the verification suites of `dilatation-core` and
//! emits a versioned JSON envelope, CSV tables or a short text summary.

mod commands;
mod envelope;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use envelope::Envelope;

#[derive(Parser, Debug)]
#[command(name = "dilatation-lab", version, about = "Numerical laboratory for mappings of finite dilatation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format written to stdout.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Also write `<subcommand>.json` and `<subcommand>.csv` into this directory.
    #[arg(long, env = "DILATATION_LAB_OUT", global = true)]
    out_dir: Option<PathBuf>,
    /// Record wall-clock duration in the envelope (makes output non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct BumpArgs {
    /// Space dimension.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Bump radius, 0 < a < e^-e.
    #[arg(long, default_value_t = 0.01)]
    pub a: f64,
}

#[derive(Args, Debug, Clone)]
pub struct CutoffArgs {
    /// Cutoff centre as comma-separated coordinates (default: origin).
    #[arg(long)]
    pub center: Option<String>,
    /// Radius where the cutoff starts to decay.
    #[arg(long)]
    pub r0: Option<f64>,
    /// Radius of the cutoff support.
    #[arg(long)]
    pub r1: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum HeadPolicy {
    /// Head value ln(1/a) + ln2 + 1/2.
    ClosedForm,
    /// Head value from the certified downward search.
    Search,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldKind {
    Bump,
    Linear,
    Constant,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sampled property suite of the bump profile.
    VerifyBump {
        #[command(flatten)]
        bump: BumpArgs,
        #[arg(long, value_enum, default_value_t = HeadPolicy::ClosedForm)]
        head: HeadPolicy,
        /// Sampled radii per piece.
        #[arg(long, default_value_t = 4000)]
        samples: usize,
        /// Sampled directions for the symmetry check.
        #[arg(long, default_value_t = 16)]
        directions: usize,
    },
    /// Solve the matching system, search the head value and certify the sign.
    ConstructBump {
        #[command(flatten)]
        bump: BumpArgs,
        /// Highest head offset tried, as a rational (default ln2 + 1/2).
        #[arg(long)]
        cap: Option<String>,
        /// Lowest head offset tried, as a rational.
        #[arg(long, default_value = "0")]
        floor: String,
        /// Scan step, as a rational.
        #[arg(long, default_value = "1/64")]
        step: String,
        #[arg(long, default_value_t = 24)]
        bisection_steps: usize,
    },
    /// CSV of r, Phi, Phi' and the radial n-Laplacian.
    NlaplacianProfile {
        #[command(flatten)]
        bump: BumpArgs,
        /// Largest radius (default 3a).
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Weak-form residual sweep of the adjugate divergence identity.
    CheckIdentity {
        #[arg(long, default_value = "identity")]
        mapping: String,
        #[arg(long, value_enum, default_value_t = FieldKind::Bump)]
        field: FieldKind,
        /// Row-major matrix entries of a linear field.
        #[arg(long)]
        matrix: Option<String>,
        /// Components of a constant field.
        #[arg(long)]
        vector: Option<String>,
        /// Bump radius of the bump field.
        #[arg(long, default_value_t = 0.01)]
        a: f64,
        /// Half-width of the grid box.
        #[arg(long = "box", default_value_t = 0.06)]
        half_width: f64,
        #[arg(long, default_value = "65,129,257")]
        resolutions: String,
        #[command(flatten)]
        cutoff: CutoffArgs,
    },
    /// Both sides of the Caccioppoli-type estimate for log(Phi_a o F).
    Caccioppoli {
        #[arg(long, default_value = "identity")]
        mapping: String,
        #[arg(long, default_value_t = 0.01)]
        a: f64,
        #[arg(long = "box", default_value_t = 0.04)]
        half_width: f64,
        #[arg(long, default_value_t = 129)]
        resolution: usize,
        #[command(flatten)]
        cutoff: CutoffArgs,
        /// Constant C in LHS <= C RHS (default (n/(n-1))^n).
        #[arg(long)]
        constant: Option<f64>,
    },
    /// Excision sweep of the weighted log-log energy.
    LoglogEnergy {
        #[arg(long, default_value = "identity")]
        mapping: String,
        /// Exponent offset: the integrand power is n - 1 + eps.
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long = "box", default_value_t = 0.06)]
        half_width: f64,
        #[arg(long, default_value_t = 257)]
        resolution: usize,
        #[command(flatten)]
        cutoff: CutoffArgs,
        /// Excision radii, decreasing (default 4h,2h,h).
        #[arg(long)]
        deltas: Option<String>,
    },
    /// Differential, dilatation, energy and zero-set summary of a mapping.
    AnalyzeMap {
        #[arg(long)]
        mapping: String,
        /// Grid points per axis over the mapping domain.
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long, default_value_t = 8.0)]
        alpha: f64,
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        /// Integrability exponent of K for the dilatation integral and the dimension bound.
        #[arg(long)]
        p: Option<f64>,
        /// Zero-set tolerance on |F|.
        #[arg(long, default_value_t = 1e-9)]
        zero_tol: f64,
        /// Points per axis of the differential sample lattice.
        #[arg(long, default_value_t = 21)]
        probe_resolution: usize,
    },
    /// Admissible eps and Hausdorff bound over a range of p.
    Exponents {
        #[arg(long)]
        n: usize,
        /// Single exponent, as a rational.
        #[arg(long, conflicts_with_all = ["p_min", "p_max"])]
        p: Option<String>,
        #[arg(long, requires = "p_max")]
        p_min: Option<String>,
        #[arg(long, requires = "p_min")]
        p_max: Option<String>,
        #[arg(long, default_value_t = 5)]
        steps: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::VerifyBump { .. } => "verify-bump",
            Command::ConstructBump { .. } => "construct-bump",
            Command::NlaplacianProfile { .. } => "nlaplacian-profile",
            Command::CheckIdentity { .. } => "check-identity",
            Command::Caccioppoli { .. } => "caccioppoli",
            Command::LoglogEnergy { .. } => "loglog-energy",
            Command::AnalyzeMap { .. } => "analyze-map",
            Command::Exponents { .. } => "exponents",
        }
    }
}

/// How a run ended short of success.
pub enum Failure {
    /// Rejected input: exit 2, no computation.
    Invalid(String),
    /// Computation error after validation: exit 1 with a partial envelope.
    Compute(String),
}

/// Side outputs a command produces besides the envelope.
#[derive(Default)]
pub struct Extras {
    pub csv: String,
    pub text: Vec<String>,
    /// Additional `(file name, contents)` written only into the output directory.
    pub files: Vec<(String, String)>,
}

fn dispatch(cmd: &Command, env: &mut Envelope, extras: &mut Extras) -> Result<(), Failure> {
    use commands::*;
    match cmd {
        Command::VerifyBump { bump, head, samples, directions } => {
            verify_bump(bump, *head, *samples, *directions, env, extras)
        }
        Command::ConstructBump { bump, cap, floor, step, bisection_steps } => {
            construct_bump(bump, cap.as_deref(), floor, step, *bisection_steps, env, extras)
        }
        Command::NlaplacianProfile { bump, r_max, samples } => {
            nlaplacian_profile(bump, *r_max, *samples, env, extras)
        }
        Command::CheckIdentity { mapping, field, matrix, vector, a, half_width, resolutions, cutoff } => {
            let field = FieldSpec { kind: *field, matrix: matrix.as_deref(), vector: vector.as_deref(), a: *a };
            check_identity(mapping, &field, *half_width, resolutions, cutoff, env, extras)
        }
        Command::Caccioppoli { mapping, a, half_width, resolution, cutoff, constant } => {
            caccioppoli(mapping, *a, *half_width, *resolution, cutoff, *constant, env, extras)
        }
        Command::LoglogEnergy { mapping, eps, half_width, resolution, cutoff, deltas } => {
            loglog_energy(mapping, *eps, *half_width, *resolution, cutoff, deltas.as_deref(), env, extras)
        }
        Command::AnalyzeMap { mapping, resolution, alpha, beta, p, zero_tol, probe_resolution } => {
            let opts = AnalyzeOptions {
                resolution: *resolution,
                alpha: *alpha,
                beta: *beta,
                p: *p,
                zero_tol: *zero_tol,
                probe_resolution: *probe_resolution,
            };
            analyze_map(mapping, &opts, env, extras)
        }
        Command::Exponents { n, p, p_min, p_max, steps } => {
            exponents(*n, p.as_deref(), p_min.as_deref(), p_max.as_deref(), *steps, env, extras)
        }
    }
}

fn write_outputs(dir: &Path, name: &str, json: &str, extras: &Extras) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{name}.json")), json)?;
    std::fs::write(dir.join(format!("{name}.csv")), &extras.csv)?;
    for (file, contents) in &extras.files {
        std::fs::write(dir.join(file), contents)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let name = cli.command.name();
    let mut env = Envelope::new(name, std::env::args().skip(1).collect());
    let mut extras = Extras::default();
    match dispatch(&cli.command, &mut env, &mut extras) {
        Ok(()) => {}
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: invalid input: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: computation failed: {msg}");
            env.error = Some(msg);
        }
    }
    env.finish();
    if cli.timing {
        env.duration_seconds = Some(start.elapsed().as_secs_f64());
    }
    let json = match env.to_json() {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: serializing envelope: {e}");
            return ExitCode::from(1);
        }
    };
    match cli.format {
        Format::Json => print!("{json}"),
        Format::Csv => print!("{}", extras.csv),
        Format::Text => {
            for line in &extras.text {
                println!("{line}");
            }
            println!("overall: {}", if env.pass { "PASS" } else { "FAIL" });
        }
    }
    if let Some(dir) = &cli.out_dir {
        if let Err(e) = write_outputs(dir, name, &json, &extras) {
            eprintln!("error: writing outputs to {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    if env.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
