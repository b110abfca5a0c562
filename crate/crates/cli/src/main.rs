use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sphgse::functionals::duality_gap;
use sphgse::solver::{
    self, finite_beta_minimize, moderate_deviation_report, solve, sweep_pair, MdReport, MethodChoice,
    Polynomial, SolveOptions,
};
use sphgse::{
    classify, natural_bc_check, obstacle_check, obstacle_tolerance, solve_master, BcReport, Error,
    GridFunction, MixedModel, OrderParamAnsatz, SignProfile,
};

#[derive(Parser)]
#[command(name = "sphgse", version, about = "Ground-state energies of spherical mixed p-spin glasses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize P and certify the minimizer.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
    },
    /// One-step RSB classification at zero field.
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Sweep `mu t^low + (1 - mu) t^p` over a grid of mu.
    #[command(name = "sweep-2p")]
    Sweep2p {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 2)]
        low: u32,
        /// Comma-separated mu values (default 0, 0.05, ..., 0.95).
        #[arg(long, value_delimiter = ',')]
        mu: Vec<f64>,
    },
    /// Minimize the Crisanti-Sommers functional at inverse temperature beta.
    #[command(name = "finite-beta")]
    FiniteBeta {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        beta: f64,
    },
    /// Compare finite-beta minimizers with the ground state.
    #[command(name = "gamma-check")]
    GammaCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "8,32,128")]
        betas: Vec<f64>,
        /// Cells of the finite-beta grid.
        #[arg(long, default_value_t = 8192)]
        beta_grid: usize,
        /// Coefficients `a_0,a_1,...` of the test polynomial.
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        poly: Vec<f64>,
    },
    /// Certify a user-supplied order parameter.
    #[command(name = "duality-check")]
    DualityCheck {
        #[command(flatten)]
        common: Common,
        /// Ansatz JSON or `t,phi` CSV.
        #[arg(long)]
        phi: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    h: f64,
    #[arg(long, default_value_t = sphgse::order_param::DEFAULT_GRID)]
    grid: usize,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    Grid,
    Ansatz,
}

/// Failure to write an artifact (exit code 1).
#[derive(Debug)]
struct WriteFailed(PathBuf, std::io::Error);

impl fmt::Display for WriteFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot write {}: {}", self.0.display(), self.1)
    }
}

impl std::error::Error for WriteFailed {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidArgument(msg.into()).into()
}

impl Common {
    fn check(&self) -> anyhow::Result<()> {
        if !(self.h >= 0.0 && self.h.is_finite()) {
            return Err(invalid(format!("--h {} must be a finite number >= 0", self.h)));
        }
        if self.grid < solver::MIN_GRID {
            return Err(invalid(format!("--grid {} must be >= {}", self.grid, solver::MIN_GRID)));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(invalid(format!("--tol {} must lie in (0, 1)", self.tol)));
        }
        Ok(())
    }

    fn model(&self) -> anyhow::Result<MixedModel> {
        let path = self.model.as_ref().ok_or_else(|| invalid("--model is required"))?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read model {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| invalid(format!("model {}: {e}", path.display())))
    }

    fn emit<T: Serialize>(&self, value: &T, csv: impl FnOnce() -> String) -> anyhow::Result<()> {
        let text = match self.format {
            Format::Json => serde_json::to_string_pretty(value)? + "\n",
            Format::Csv => csv(),
        };
        self.emit_text(self.out.as_deref(), &text)
    }

    fn emit_text(&self, path: Option<&Path>, text: &str) -> anyhow::Result<()> {
        match path {
            Some(p) => write_atomic(p, text),
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

fn write_atomic(path: &Path, text: &str) -> anyhow::Result<()> {
    let fail = |e: std::io::Error| anyhow::Error::new(WriteFailed(path.to_path_buf(), e));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(text.as_bytes()).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

#[derive(Serialize)]
struct SolveOut<'a> {
    model: &'a MixedModel,
    #[serde(flatten)]
    solved: &'a solver::Solved,
}

#[derive(Serialize)]
struct ClassifyOut<'a> {
    model: &'a MixedModel,
    #[serde(flatten)]
    classification: &'a sphgse::Classification,
    /// Duality gap of the one-step candidate.
    gap: f64,
    certified: bool,
    sign_profile: &'a SignProfile,
}

#[derive(Serialize)]
struct FiniteBetaOut<'a> {
    model: &'a MixedModel,
    cells: usize,
    #[serde(flatten)]
    result: &'a solver::FiniteBetaResult,
}

#[derive(Serialize)]
struct GroundState {
    method: solver::Method,
    #[serde(rename = "GSE")]
    gse: f64,
    gap: f64,
    obstacle_margin: f64,
    certified: bool,
}

#[derive(Serialize)]
struct GammaOut<'a> {
    model: &'a MixedModel,
    field: f64,
    poly: &'a [f64],
    ground_state: GroundState,
    rows: Vec<MdReport>,
}

#[derive(Serialize)]
struct CertificateOut<'a> {
    model: &'a MixedModel,
    field: f64,
    #[serde(rename = "P")]
    p_value: f64,
    #[serde(rename = "D")]
    d_value: f64,
    #[serde(rename = "GSE")]
    gse: f64,
    gap: f64,
    obstacle_margin: f64,
    argmin: f64,
    certified: bool,
    bc_residuals: BcReport,
    /// Raw differences `eta - xi` and `eta' - xi'` at the ends.
    boundary_values: sphgse::functionals::BoundaryResiduals,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve { common, method } => {
            common.check()?;
            let model = common.model()?;
            let opts = SolveOptions {
                method: match method {
                    Method::Auto => MethodChoice::Auto,
                    Method::Grid => MethodChoice::Grid,
                    Method::Ansatz => MethodChoice::Ansatz,
                },
                cells: common.grid,
                tol: common.tol,
                seed: common.seed,
                check_cells: (common.grid / 4).max(solver::MIN_GRID),
            };
            let solved = solve(&model, common.h, opts)?;
            common.emit(&SolveOut { model: &model, solved: &solved }, || {
                solved.result.certificate.plot_csv(&model)
            })
        }
        Command::Classify { common } => {
            common.check()?;
            if common.h != 0.0 {
                return Err(invalid("classify requires --h 0"));
            }
            let model = common.model()?;
            let cls = classify(&model)?;
            let profile = model.sign_intervals(1e-4, 1e-12)?;
            let gap = duality_gap(&solve_master(&model)?.ansatz(), &model, 0.0)?;
            let out = ClassifyOut {
                model: &model,
                classification: &cls,
                gap: gap.gap,
                certified: cls.obstacle_margin >= -obstacle_tolerance(&model),
                sign_profile: &profile,
            };
            common.emit(&out, || gap.cert.plot_csv(&model))
        }
        Command::Sweep2p { common, p, low, mu } => {
            common.check()?;
            if common.h != 0.0 {
                return Err(invalid("sweep-2p requires --h 0"));
            }
            if p < 3 {
                return Err(invalid(format!("--p {p} must be >= 3")));
            }
            let grid = if mu.is_empty() {
                (0..20).map(|k| k as f64 * 0.05).collect()
            } else {
                mu
            };
            let table = sweep_pair(low, p, &grid, common.grid)?;
            if common.format == Format::Csv {
                let mut b = String::from("kind,mu_lo,mu_hi,mu\n");
                for x in &table.boundaries {
                    b.push_str(&format!("{},{},{},{}\n", x.kind, x.mu_lo, x.mu_hi, x.mu));
                }
                match &common.out {
                    Some(path) => {
                        write_atomic(path, &table.to_csv())?;
                        write_atomic(&boundaries_path(path), &b)?;
                    }
                    None => common.emit_text(None, &format!("{}\n{}", table.to_csv(), b))?,
                }
                return Ok(());
            }
            common.emit(&table, String::new)
        }
        Command::FiniteBeta { common, beta } => {
            common.check()?;
            let model = common.model()?;
            let r = finite_beta_minimize(&model, beta, common.h, common.grid)?;
            let out = FiniteBetaOut {
                model: &model,
                cells: common.grid,
                result: &r,
            };
            common.emit(&out, || {
                let mut s = String::from("t,cdf,beta_cdf\n");
                for ((t, f), b) in r.mu.t.iter().zip(&r.mu.cdf).zip(&r.rescaled_density) {
                    s.push_str(&format!("{t},{f},{b}\n"));
                }
                s
            })
        }
        Command::GammaCheck {
            common,
            betas,
            beta_grid,
            poly,
        } => {
            common.check()?;
            if beta_grid < solver::MIN_GRID {
                return Err(invalid(format!("--beta-grid {beta_grid} must be >= {}", solver::MIN_GRID)));
            }
            if poly.is_empty() {
                return Err(invalid("--poly needs at least one coefficient"));
            }
            let model = common.model()?;
            let opts = SolveOptions {
                cells: common.grid,
                tol: common.tol,
                seed: common.seed,
                check_cells: 0,
                ..SolveOptions::default()
            };
            let gs = solve(&model, common.h, opts)?.result;
            let f = Polynomial(poly.clone());
            let rows = betas
                .iter()
                .map(|&b| Ok(moderate_deviation_report(&finite_beta_minimize(&model, b, common.h, beta_grid)?, &gs, &f)))
                .collect::<sphgse::Result<Vec<_>>>()?;
            let out = GammaOut {
                model: &model,
                field: common.h,
                poly: &poly,
                ground_state: GroundState {
                    method: gs.method,
                    gse: gs.gse,
                    gap: gs.gap,
                    obstacle_margin: gs.obstacle_margin,
                    certified: gs.certified,
                },
                rows,
            };
            common.emit(&out, || {
                let mut s = String::from(
                    "beta,lhs,rhs,sup_distance,beta_one_minus_q_star,atom_estimate,c,beta_mass_at_zero,density_mass,atom_converged,atom_estimate_converged\n",
                );
                for r in &out.rows {
                    s.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},{},{}\n",
                        r.beta,
                        r.lhs,
                        r.rhs,
                        r.sup_distance,
                        r.beta_one_minus_q_star,
                        r.atom_estimate,
                        r.c,
                        r.beta_mass_at_zero,
                        r.density_mass,
                        r.atom_converged,
                        r.atom_estimate_converged
                    ));
                }
                s
            })
        }
        Command::DualityCheck { common, phi } => {
            common.check()?;
            let model = common.model()?;
            let text = std::fs::read_to_string(&phi)
                .map_err(|e| invalid(format!("cannot read {}: {e}", phi.display())))?;
            let is_csv = phi.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
            let r = if is_csv {
                let g = GridFunction::from_csv(&text)?;
                duality_gap(&g, &model, common.h)?
            } else {
                let a: OrderParamAnsatz =
                    serde_json::from_str(&text).map_err(|e| invalid(format!("ansatz {}: {e}", phi.display())))?;
                a.validate(&model)?;
                duality_gap(&a, &model, common.h)?
            };
            let (margin, argmin) = obstacle_check(&r.cert, &model, true);
            let out = CertificateOut {
                model: &model,
                field: common.h,
                p_value: r.p_value,
                d_value: r.d_value,
                gse: 0.5 * r.p_value,
                gap: r.gap,
                obstacle_margin: margin,
                argmin,
                certified: margin >= -obstacle_tolerance(&model),
                bc_residuals: natural_bc_check(&r.cert),
                boundary_values: r.cert.residuals,
            };
            common.emit(&out, || r.cert.plot_csv(&model))
        }
    }
}

fn boundaries_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.boundaries.csv"))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<WriteFailed>().is_some() {
        return 1;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::NonConvergence { .. }) => 3,
        Some(Error::Inconclusive { .. }) => 4,
        _ => 2,
    }
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("SPHGSE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| invalid(format!("SPHGSE_THREADS={v} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| anyhow!(e))
        .context("thread pool")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
