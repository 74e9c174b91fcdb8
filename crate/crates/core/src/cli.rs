//! Command-line front end.
//!
//! Exit status is 0 on success, 2 for invalid input (bad flags, missing or
//! malformed files, invalid parameters) and 3 for numerical failures. Every
//! successful command writes its outputs atomically and leaves a
//! `manifest.json` with the arguments, seed and version next to them.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::envelopes::{envelope_pipeline, NullModel, PipelineConfig, TestFunction};
use crate::error::{Error, Result};
use crate::estimation::{
    cl2_fit, simulation_study, two_step_fit, Cl2Config, Cl2Objective, ContrastTarget, FitResult,
    MinContrastConfig, SearchStrategy, SimulationDesign, WeightKind,
};
use crate::io;
use crate::network::{LinearNetwork, PointPattern};
use crate::rng::derive_seed;
use crate::sim::{simulate_cox, simulate_poisson, CoxMode, CoxModel, IntensityModel};
use crate::summaries::{
    default_rgrid, fgj_hat, g_hat, k_hat, kernel_intensity, parse_rgrid, plug_in_intensity,
    FgjConfig, IntensitySource, Kernel, SummaryCurve,
};
use crate::templates::{make_network, DendriteSpec, Template};

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "linnetcox",
    version,
    about = "Point processes on tree-shaped linear networks"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "LINNETCOX_THREADS")]
    threads: Option<usize>,
    /// Log filter, e.g. warn, info, debug.
    #[arg(
        long,
        global = true,
        default_value = "warn",
        env = "LINNETCOX_LOG_LEVEL"
    )]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
enum Command {
    /// Build a synthetic labelled tree.
    MakeNetwork(MakeNetworkArgs),
    /// Simulate an inhomogeneous Poisson process.
    SimulatePoisson(SimulatePoissonArgs),
    /// Simulate the thinned Cox process.
    SimulateCox(SimulateCoxArgs),
    /// Fit a model to a pattern.
    Fit(FitArgs),
    /// Empirical summary functions.
    Summaries(SummariesArgs),
    /// Global rank envelope test.
    Envelope(EnvelopeArgs),
    /// Replicated simulate-and-refit experiment.
    Simstudy(SimstudyArgs),
    /// Heat-kernel intensity estimate.
    KernelIntensity(KernelIntensityArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum TemplateKind {
    Dendrite,
    Path,
    Star,
    RandomTree,
}

#[derive(Debug, Args, Serialize)]
struct MakeNetworkArgs {
    #[arg(long, value_enum)]
    template: TemplateKind,
    #[arg(long, default_value_t = 0, env = "LINNETCOX_SEED")]
    seed: u64,
    /// Path length.
    #[arg(long, default_value_t = 100.0)]
    length: f64,
    #[arg(long, default_value_t = 3)]
    arms: usize,
    #[arg(long, default_value_t = 50.0)]
    arm_length: f64,
    #[arg(long, default_value_t = 50)]
    edges: usize,
    #[arg(long, default_value_t = 2.0)]
    min_length: f64,
    #[arg(long, default_value_t = 8.0)]
    max_length: f64,
    #[arg(long)]
    main_length: Option<f64>,
    #[arg(long)]
    side_length: Option<f64>,
    #[arg(long)]
    side_branches: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SimulatePoissonArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    rho_m: f64,
    #[arg(long)]
    rho_s: f64,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value_t = 0, env = "LINNETCOX_SEED")]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum ModeArg {
    Exact,
    Grid,
}

#[derive(Debug, Args, Serialize)]
struct SimulateCoxArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    rho_ym: f64,
    #[arg(long)]
    rho_ys: f64,
    #[arg(long)]
    sigma2: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    /// Lattice spacing in grid mode.
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value_t = 0, env = "LINNETCOX_SEED")]
    seed: u64,
    /// Also write the retention field (grid mode).
    #[arg(long)]
    write_pi: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum, Serialize)]
enum Method {
    MceG,
    MceK,
    Cl2,
    Poisson,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum WeightArg {
    Indicator,
    Smooth,
    Fixed,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum ObjectiveArg {
    Score,
    Likelihood,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum SearchArg {
    DerivativeFree,
    Grid,
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected two comma-separated numbers, got {s:?}"))?;
    let a = a.trim().parse().map_err(|_| format!("bad number {a:?}"))?;
    let b = b.trim().parse().map_err(|_| format!("bad number {b:?}"))?;
    Ok((a, b))
}

#[derive(Debug, Args, Serialize)]
struct FitArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    pattern: PathBuf,
    #[arg(long, value_enum, default_value = "mce-g")]
    method: Method,
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long, default_value_t = 0.0)]
    rl: f64,
    /// Upper contrast limit; 0.1·|L| when unset.
    #[arg(long)]
    ru: Option<f64>,
    /// Contrast exponent; 1 for mce-g and 0.25 for mce-k when unset.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_parser = parse_pair, default_value = "0.5,0.5")]
    start: (f64, f64),
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long, value_enum, default_value = "indicator")]
    weight: WeightArg,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long, default_value_t = 10.0)]
    r0: f64,
    /// Monte Carlo samples per segment pair.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, value_enum, default_value = "derivative-free")]
    search: SearchArg,
    /// Score length (minimised) or composite likelihood (maximised).
    #[arg(long, value_enum, default_value = "score")]
    objective: ObjectiveArg,
    #[arg(long, default_value_t = 100)]
    grid_n: usize,
    #[arg(long, value_parser = parse_pair, default_value = "0.1,15")]
    sigma2_range: (f64, f64),
    #[arg(long, value_parser = parse_pair, default_value = "0.01,2")]
    beta_range: (f64, f64),
    #[arg(long, default_value_t = 0, env = "LINNETCOX_SEED")]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SummariesArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    pattern: PathBuf,
    /// Comma-separated subset of K,g,F,G,J.
    #[arg(long, default_value = "K,g,F,G,J")]
    which: String,
    /// `lo:hi:n`; 512 points up to 0.2·|L| when unset.
    #[arg(long)]
    rgrid: Option<String>,
    /// Fit file whose intensity is used; per-branch plug-in when unset.
    #[arg(long)]
    intensity: Option<PathBuf>,
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    lattice_spacing: f64,
    #[arg(long, default_value_t = 0.0)]
    rmin: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum TestArg {
    #[value(name = "K")]
    K,
    #[value(name = "FGJ")]
    Fgj,
}

#[derive(Debug, Args, Serialize)]
struct EnvelopeArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    pattern: PathBuf,
    /// Fit file; the fitted Poisson model when unset.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "K")]
    test: TestArg,
    #[arg(long, default_value_t = 2499)]
    sims: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    rmin: f64,
    #[arg(long)]
    rgrid: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    lattice_spacing: f64,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    #[arg(long, default_value_t = 0, env = "LINNETCOX_SEED")]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SimstudyArgs {
    #[arg(long)]
    net: PathBuf,
    /// TOML design with one `[[run]]` table per run.
    #[arg(long)]
    design: PathBuf,
    #[arg(long, default_value_t = 500)]
    reps: usize,
    #[arg(long, default_value_t = 0, env = "LINNETCOX_SEED")]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct KernelIntensityArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    pattern: PathBuf,
    #[arg(long)]
    bandwidth: f64,
    /// Grid spacing; bandwidth/10 when unset.
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    args: Vec<String>,
    config: &'a Command,
    outputs: Vec<String>,
}

/// Collects written files for the manifest.
struct Outputs {
    paths: Vec<PathBuf>,
}

impl Outputs {
    fn write(&mut self, path: PathBuf, contents: &str) -> Result<()> {
        io::write_atomic(&path, contents.as_bytes())?;
        self.paths.push(path);
        Ok(())
    }
}

fn load(net: &Path) -> Result<Arc<LinearNetwork>> {
    Ok(Arc::new(io::load_network(net)?))
}

fn load_with_pattern(net: &Path, pattern: &Path) -> Result<PointPattern> {
    io::load_pattern(load(net)?, pattern)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn rgrid(spec: &Option<String>, net: &LinearNetwork) -> Result<Vec<f64>> {
    match spec {
        Some(s) => parse_rgrid(s),
        None => Ok(default_rgrid(net.total_length())),
    }
}

fn mode(m: ModeArg, spacing: f64) -> CoxMode {
    match m {
        ModeArg::Exact => CoxMode::Exact,
        ModeArg::Grid => CoxMode::Grid { spacing },
    }
}

/// Null model described by a fit file.
fn null_model(fit: &FitResult, cox_mode: CoxMode) -> Result<NullModel> {
    if fit.method == "poisson" || fit.sigma2 == 0.0 {
        return Ok(NullModel::Poisson(fit.rho));
    }
    Ok(NullModel::Cox {
        model: CoxModel::new(fit.rho_y, fit.sigma2, fit.beta, fit.k)?,
        mode: cox_mode,
    })
}

fn sidecar(out: &Path, ext: &str) -> PathBuf {
    out.with_extension(ext)
}

fn execute(cmd: &Command, out: &mut Outputs) -> Result<()> {
    match cmd {
        Command::MakeNetwork(a) => {
            let template = match a.template {
                TemplateKind::Path => Template::Path { length: a.length },
                TemplateKind::Star => Template::Star {
                    arms: a.arms,
                    arm_length: a.arm_length,
                },
                TemplateKind::RandomTree => Template::RandomTree {
                    edges: a.edges,
                    min_length: a.min_length,
                    max_length: a.max_length,
                },
                TemplateKind::Dendrite => Template::Dendrite(DendriteSpec {
                    main_length: a.main_length,
                    side_length: a.side_length,
                    side_branches: a.side_branches,
                }),
            };
            let net = make_network(&template, a.seed)?;
            out.write(a.out.clone(), &io::network_to_json(&net))
        }
        Command::SimulatePoisson(a) => {
            let net = load(&a.net)?;
            let rho = IntensityModel::new(a.rho_m, a.rho_s)?;
            ensure_dir(&a.out)?;
            for i in 0..a.reps {
                let x = simulate_poisson(&net, &rho, derive_seed(a.seed, i as u64));
                out.write(
                    a.out.join(format!("pattern_{i:04}.csv")),
                    &io::pattern_to_csv(&x)?,
                )?;
            }
            Ok(())
        }
        Command::SimulateCox(a) => {
            let net = load(&a.net)?;
            let model = CoxModel::new(
                IntensityModel::new(a.rho_ym, a.rho_ys)?,
                a.sigma2,
                a.beta,
                a.k,
            )?;
            let m = mode(a.mode, a.spacing);
            ensure_dir(&a.out)?;
            for i in 0..a.reps {
                let sim = simulate_cox(&net, &model, m, derive_seed(a.seed, i as u64))?;
                out.write(
                    a.out.join(format!("pattern_{i:04}.csv")),
                    &io::pattern_to_csv(&sim.pattern)?,
                )?;
                if let (true, Some((sites, pi))) = (a.write_pi, &sim.pi_grid) {
                    out.write(
                        a.out.join(format!("pi_{i:04}.csv")),
                        &io::pi_grid_to_csv(&net, sites, pi)?,
                    )?;
                }
            }
            Ok(())
        }
        Command::Fit(a) => {
            let x = load_with_pattern(&a.net, &a.pattern)?;
            let fit = match a.method {
                Method::Poisson => {
                    let rho = crate::summaries::fit_intensity_mle(&x)?;
                    FitResult {
                        method: "poisson".into(),
                        rho,
                        sigma2: 0.0,
                        beta: 0.0,
                        k: a.k,
                        rho_y: rho,
                        objective: 0.0,
                        converged: true,
                        iterations: 0,
                        on_boundary: false,
                    }
                }
                Method::MceG | Method::MceK => {
                    let target = if a.method == Method::MceG {
                        ContrastTarget::G0
                    } else {
                        ContrastTarget::K
                    };
                    let p = a.p.unwrap_or(if target == ContrastTarget::G0 {
                        1.0
                    } else {
                        0.25
                    });
                    let cfg = MinContrastConfig {
                        target,
                        r_l: a.rl,
                        r_u: a.ru,
                        p,
                        start: a.start,
                        bandwidth: a.bandwidth,
                        ..Default::default()
                    };
                    two_step_fit(&x, a.k, &cfg)?
                }
                Method::Cl2 => {
                    let weight = match a.weight {
                        WeightArg::Indicator => WeightKind::AdaptiveIndicator { eps: a.eps },
                        WeightArg::Smooth => WeightKind::AdaptiveSmooth { eps: a.eps },
                        WeightArg::Fixed => WeightKind::Fixed { r0: a.r0 },
                    };
                    let search = match a.search {
                        SearchArg::DerivativeFree => {
                            SearchStrategy::DerivativeFree { start: a.start }
                        }
                        SearchArg::Grid => SearchStrategy::Grid {
                            n: a.grid_n,
                            sigma2: a.sigma2_range,
                            beta: a.beta_range,
                        },
                    };
                    let cfg = Cl2Config {
                        weight,
                        samples: a.samples,
                        seed: a.seed,
                        search,
                        objective: match a.objective {
                            ObjectiveArg::Score => Cl2Objective::ScoreNorm,
                            ObjectiveArg::Likelihood => Cl2Objective::Likelihood,
                        },
                        ..Default::default()
                    };
                    let fit = cl2_fit(&x, a.k, &cfg)?;
                    if fit.on_boundary {
                        log::warn!("score minimum lies on the grid boundary; widen the grid");
                    }
                    fit.into_result(plug_in_intensity(&x), a.k)
                }
            };
            if !fit.converged {
                log::warn!("optimizer stopped before meeting its tolerance");
            }
            out.write(a.out.clone(), &io::to_json(&fit))
        }
        Command::Summaries(a) => {
            let x = load_with_pattern(&a.net, &a.pattern)?;
            let r = rgrid(&a.rgrid, x.network())?;
            let rho = match &a.intensity {
                Some(p) => io::from_json::<FitResult>(&std::fs::read_to_string(p)?)?.rho,
                None => plug_in_intensity(&x),
            };
            let mut curves: Vec<SummaryCurve> = Vec::new();
            let mut fgj = None;
            for kind in a.which.split(',').map(str::trim) {
                match kind {
                    "K" => curves.push(k_hat(&x, &rho, &r)?),
                    "g" => curves.push(g_hat(&x, &rho, &r, a.bandwidth, Kernel::Epanechnikov)?),
                    "F" | "G" | "J" => {
                        if fgj.is_none() {
                            let cfg = FgjConfig {
                                intensity: IntensitySource::Known(rho),
                                lattice_spacing: a.lattice_spacing,
                                r_min: a.rmin,
                            };
                            fgj = Some(fgj_hat(&x, &cfg, &r)?);
                        }
                        let c = fgj.as_ref().unwrap();
                        curves.push(match kind {
                            "F" => c.f.clone(),
                            "G" => c.g.clone(),
                            _ => c.j.clone(),
                        });
                    }
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "unknown summary {other:?}"
                        )))
                    }
                }
            }
            let refs: Vec<&SummaryCurve> = curves.iter().collect();
            out.write(a.out.clone(), &io::curves_to_csv(&refs)?)?;
            let meta: Vec<_> = curves.iter().map(|c| (c.kind.label(), &c.meta)).collect();
            out.write(sidecar(&a.out, "meta.json"), &io::to_json(&meta))
        }
        Command::Envelope(a) => {
            let x = load_with_pattern(&a.net, &a.pattern)?;
            let cox_mode = mode(a.mode, a.spacing);
            let model = match &a.model {
                Some(p) => null_model(&io::from_json(&std::fs::read_to_string(p)?)?, cox_mode)?,
                None => NullModel::Poisson(plug_in_intensity(&x)),
            };
            let cfg = PipelineConfig {
                test: match a.test {
                    TestArg::K => TestFunction::K,
                    TestArg::Fgj => TestFunction::Fgj,
                },
                sims: a.sims,
                alpha: a.alpha,
                r_min: a.rmin,
                rgrid: Some(rgrid(&a.rgrid, x.network())?),
                lattice_spacing: a.lattice_spacing,
                seed: a.seed,
            };
            let res = envelope_pipeline(&x, &model, &cfg)?;
            out.write(
                a.out.clone(),
                &io::envelope_to_csv(&res.curves, &res.result)?,
            )?;
            out.write(
                sidecar(&a.out, "json"),
                &io::to_json(&io::EnvelopeSidecar::new(&res.result)),
            )
        }
        Command::Simstudy(a) => {
            let net = load(&a.net)?;
            let design = SimulationDesign::from_toml(&std::fs::read_to_string(&a.design)?)?;
            let table = simulation_study(&net, &design, a.reps, a.seed)?;
            out.write(a.out.clone(), &io::study_to_csv(&table)?)?;
            out.write(
                sidecar(&a.out, "summary.json"),
                &io::to_json(&table.summaries),
            )
        }
        Command::KernelIntensity(a) => {
            let x = load_with_pattern(&a.net, &a.pattern)?;
            let est = kernel_intensity(&x, a.bandwidth, a.spacing)?;
            out.write(
                a.out.clone(),
                &io::kernel_intensity_to_csv(x.network(), &est)?,
            )
        }
    }
}

fn manifest_dir(cmd: &Command) -> PathBuf {
    let out = match cmd {
        Command::MakeNetwork(a) => &a.out,
        Command::SimulatePoisson(a) => return a.out.clone(),
        Command::SimulateCox(a) => return a.out.clone(),
        Command::Fit(a) => &a.out,
        Command::Summaries(a) => &a.out,
        Command::Envelope(a) => &a.out,
        Command::Simstudy(a) => &a.out,
        Command::KernelIntensity(a) => &a.out,
    };
    match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let _ = env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .try_init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            log::debug!("thread pool already configured: {e}");
        }
    }
    let mut outputs = Outputs { paths: Vec::new() };
    let result = execute(&cli.command, &mut outputs).and_then(|()| {
        let manifest = Manifest {
            tool: "linnetcox",
            version: env!("CARGO_PKG_VERSION"),
            args: args
                .iter()
                .skip(1)
                .map(|a| a.to_string_lossy().into_owned())
                .collect(),
            config: &cli.command,
            outputs: outputs
                .paths
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
        };
        io::write_atomic(
            &manifest_dir(&cli.command).join("manifest.json"),
            io::to_json(&manifest).as_bytes(),
        )
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                3
            }
        }
    }
}
