use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use maf::config::{load_config_or_bundled, parse_grid_spec, SystemConfig};
use maf::runner::{emit, run_sections, Format, Section};
use maf::spectral::{kernel, strip_eigenfunction, LaguerreScale, SpectralBasis};
use maf::{CheckReport, MafError, C64};

#[derive(Parser)]
#[command(name = "maf", version, about = "Verify mixed automorphic function identities on U(1)⋉ℂ")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equivariance, homomorphism, quantization and cocycle checks.
    CheckEquivariance(Common),
    /// Constancy of the magnetic field.
    Field(Common),
    /// Path independence and reality of the gauge.
    Gauge(Common),
    /// Invariance and intertwining of the mixed Laplacian.
    Invariance(Common),
    /// Lifting to classical automorphic functions.
    Lift(Common),
    /// Landau levels of the strip eigenfunctions.
    Spectrum(Common),
    /// Projector kernels; with --z and --w also prints K_k(z, w).
    Kernel {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, value_parser = parse_complex)]
        z: Option<C64>,
        #[arg(long, value_parser = parse_complex)]
        w: Option<C64>,
    },
    /// Evaluates a strip eigenfunction ψ_{m,n}(z).
    Eigenfunction {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        n: i64,
        #[arg(long, value_parser = parse_complex)]
        z: C64,
    },
    /// Constant-field criteria on ℂⁿ.
    Highdim(Common),
    /// Every check.
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file, or the name of a bundled system.
    #[arg(long)]
    config: String,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance for every check that is expected to pass.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// `N` or `R:N` (N×N points on [−R, R]²), or `xmin,xmax,nx,ymin,ymax,ny`.
    #[arg(long)]
    grid: Option<String>,
    /// Largest kernel level.
    #[arg(long)]
    kmax: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad complex number {s:?}: expected RE,IM"));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(format!("bad complex number {s:?}: expected RE,IM")),
    }
}

impl Common {
    fn load(&self) -> Result<SystemConfig, MafError> {
        let mut cfg = load_config_or_bundled(&self.config)?;
        if let Some(t) = self.tol {
            cfg.tol = Some(t);
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(g) = &self.grid {
            cfg.grid = parse_grid_spec(g)?;
        }
        if let Some(k) = self.kmax {
            cfg.spectral.kmax = k;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn format(&self) -> Format {
        match self.format {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
        }
    }
}

fn run(common: &Common, sections: &[Section], extra: Vec<CheckReport>) -> Result<i32, MafError> {
    let cfg = common.load()?;
    let mut outcome = run_sections(&cfg, sections)?;
    outcome.reports.extend(extra);
    emit(&outcome.reports, common.format(), common.out.as_deref())?;
    Ok(outcome.exit_code)
}

fn dispatch(cmd: &Command) -> Result<i32, MafError> {
    match cmd {
        Command::CheckEquivariance(c) => run(c, &[Section::Equivariance], vec![]),
        Command::Field(c) => run(c, &[Section::Field], vec![]),
        Command::Gauge(c) => run(c, &[Section::Gauge], vec![]),
        Command::Invariance(c) => run(c, &[Section::Invariance], vec![]),
        Command::Lift(c) => run(c, &[Section::Lift], vec![]),
        Command::Spectrum(c) => run(c, &[Section::Spectrum], vec![]),
        Command::Highdim(c) => run(c, &[Section::Highdim], vec![]),
        Command::Report(c) => run(c, &Section::ALL, vec![]),
        Command::Kernel { common, k, z, w } => {
            let extra = match (z, w) {
                (Some(z), Some(w)) => {
                    let sys = common.load()?.system()?;
                    let v = kernel(&sys, *k, *z, *w, LaguerreScale::One)?;
                    vec![CheckReport::scalar("kernel_value", 0.0, 0.0)
                        .with_meta("k", *k)
                        .with_meta("z", serde_json::json!([z.re, z.im]))
                        .with_meta("w", serde_json::json!([w.re, w.im]))
                        .with_meta("value", serde_json::json!([v.re, v.im]))]
                }
                (None, None) => vec![],
                _ => return Err(MafError::Config("--z and --w must be given together".into())),
            };
            run(common, &[Section::Kernel], extra)
        }
        Command::Eigenfunction { common, m, n, z } => {
            let cfg = common.load()?;
            let sys = cfg.system()?;
            let basis = SpectralBasis::for_system(&sys, *m, n.unsigned_abs() as usize)?;
            let v = strip_eigenfunction(&basis, &sys, *m, *n, *z)?;
            let rep = CheckReport::scalar("eigenfunction_value", 0.0, 0.0)
                .with_meta("m", *m)
                .with_meta("n", *n)
                .with_meta("alpha", basis.alpha)
                .with_meta("z", serde_json::json!([z.re, z.im]))
                .with_meta("value", serde_json::json!([v.re, v.im]))
                .with_meta("system", cfg.name.clone());
            emit(&[rep], common.format(), common.out.as_deref())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("maf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
