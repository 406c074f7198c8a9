mod commands;
mod inputs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::inputs::CliError;

#[derive(Parser, Debug)]
#[command(name = "entropydiff", version, about = "Entropy differential of minimal surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample λ², K, q, ρ, |T| and |T̂| on a grid.
    Analyze(AnalyzeArgs),
    /// Solve Hill's equation and rebuild Weierstrass data and the immersion.
    Reconstruct(ReconstructArgs),
    /// Run identity checks and print their reports.
    Verify(VerifyArgs),
    /// Weighted L^{1/2} norm of the entropy form.
    Norm(NormArgs),
    /// Export a sampled mesh as OBJ with a JSON sidecar.
    Mesh(MeshArgs),
}

/// Either a catalog surface or explicit Weierstrass data.
#[derive(Args, Debug, Clone, Default)]
pub struct SurfaceArgs {
    /// enneper, catenoid, helicoid, deformed-catenoid or deformed-helicoid.
    #[arg(long)]
    pub surface: Option<String>,
    /// Deformation parameter of the deformed families.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Scale of the Enneper family.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Gauss map expression in z.
    #[arg(long = "G", allow_hyphen_values = true)]
    pub gauss: Option<String>,
    /// Height function expression in z.
    #[arg(long = "h", allow_hyphen_values = true)]
    pub height: Option<String>,
    /// Parameter domain x0,x1,y0,y1.
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Grid resolution in cells, NXxNY.
    #[arg(long, default_value = "64x64")]
    pub grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ReconstructArgs {
    /// Potential ρ of w'' + (ρ/4) w = 0.
    #[arg(long, allow_hyphen_values = true)]
    pub rho: String,
    /// Enneper initial pair (μ, ν + z/(2μ)); requires ρ = 0.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<String>,
    /// Normal-form pair for ρ = -α².
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true, default_value = "-1,1,-1,1")]
    pub domain: String,
    #[arg(long, default_value = "32x32")]
    pub grid: String,
    #[arg(long)]
    pub obj: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Comma-separated checks: ricci, ecritical, soliton, family, closed-form, period, pole.
    #[arg(long, default_value = "ricci,ecritical")]
    pub checks: String,
    /// Grid spacing of the stencil checks.
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    /// Grid resolution in cells; overrides --delta.
    #[arg(long)]
    pub grid: Option<String>,
    /// Probe center for the pole check.
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    /// Expected c₋₂ for the pole check.
    #[arg(long, allow_hyphen_values = true)]
    pub expected: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct NormArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Integrate over |x| ≤ X and one period in y (strip models; default 20).
    #[arg(long = "x-cut")]
    pub x_cut: Option<f64>,
    /// Absolute tolerance of the inner integral.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct MeshArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[arg(long, default_value = "64x64")]
    pub grid: String,
    #[arg(long)]
    pub obj: PathBuf,
    /// Sidecar with the per-vertex K, |T| and |T̂|.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("ENTROPYDIFF_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::input("InvalidParameter", format!("ENTROPYDIFF_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::numeric("ThreadPool", e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (report, out) = match cli.command {
        Command::Analyze(a) => (commands::analyze(&a)?, a.out),
        Command::Reconstruct(a) => (commands::reconstruct(&a)?, a.out),
        Command::Verify(a) => (commands::verify(&a)?, a.out),
        Command::Norm(a) => (commands::norm(&a)?, a.out),
        Command::Mesh(a) => (commands::mesh(&a)?, a.out),
    };
    let bytes = output::to_bytes(&report)?;
    match out {
        Some(path) => std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = json!({
                "schema": output::SCHEMA,
                "error": { "code": e.code, "message": e.message },
            });
            if let Ok(bytes) = output::to_bytes(&record) {
                use std::io::Write;
                let _ = std::io::stdout().write_all(&bytes);
            }
            eprintln!("error: {}", e.message);
            ExitCode::from(e.exit)
        }
    }
}
