//! `geosep synth | separate | eval | transform`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use geosep_core::eval::{measure_table, MeasureRow};
use geosep_core::separation::{separate_image, SolverConfig};
use geosep_core::shearlets::{
    build_filter_bank, compute_dual_bank, shearlet_forward, shearlet_inverse, Cone, FilterIndex,
};
use geosep_core::subband::Weights;
use geosep_core::synth::{add_noise, default_curves, default_points, gen_phantom, CurveSceneSpec, PointSceneSpec};
use geosep_core::wavelets::{uwt_forward, uwt_inverse};
use geosep_core::RasterImage;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, Schedule};
use crate::error::{CliError, Result};
use crate::io::{load_image, save_image};
use crate::plot::{line_plot, Series, BLUE, RED};
use crate::report::{write_measures, write_trace};

#[derive(Debug, Parser)]
#[command(name = "geosep", version, about = "Separate images into point-like and curve-like parts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a point/curve phantom: I.png, P.png, C.png and spec.json.
    Synth(SynthArgs),
    /// Separate an image into points.png, curves.png and residual.png.
    Separate(SeparateArgs),
    /// Compare estimates against ground truth over the threshold grid.
    Eval(EvalArgs),
    /// Roundtrip an image through the transforms and report the errors.
    Transform(TransformArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Shared {
    /// Output directory, created if missing.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat TOML config; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Upper bound on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub shared: Shared,
    /// Side length of the square phantom.
    #[arg(long)]
    pub size: Option<usize>,
    /// Noise standard deviation, relative to peak 1.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Scene JSON (the `points` and `curves` of a spec.json) instead of the default scene.
    #[arg(long)]
    pub scene: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SeparateArgs {
    #[command(flatten)]
    pub shared: Shared,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Band weights w0,w1,...,wL.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub weights: Option<Vec<f64>>,
    /// Shearlet scales.
    #[arg(long)]
    pub scales: Option<usize>,
    /// Subband levels L.
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub lambda_min: Option<f64>,
    #[arg(long, value_enum)]
    pub schedule: Option<Schedule>,
    /// Same as weights of all ones.
    #[arg(long)]
    pub no_preprocess: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub shared: Shared,
    #[arg(long)]
    pub truth_points: Option<PathBuf>,
    #[arg(long)]
    pub truth_curves: Option<PathBuf>,
    #[arg(long)]
    pub est_points: Option<PathBuf>,
    #[arg(long)]
    pub est_curves: Option<PathBuf>,
    /// Gaussian smoothing width in pixels.
    #[arg(long)]
    pub sigma_g: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dictionary {
    Wavelet,
    Shearlet,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    #[command(flatten)]
    pub shared: Shared,
    /// Input image; defaults to seeded white noise of `--size`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long, value_enum, default_value = "both")]
    pub dictionary: Dictionary,
    #[arg(long)]
    pub scales: Option<usize>,
    /// Write one spectrum-magnitude PNG per directional filter to filters/.
    #[arg(long)]
    pub dump_filters: bool,
}

/// Scene part of spec.json.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub points: PointSceneSpec,
    pub curves: CurveSceneSpec,
}

/// spec.json written by `synth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthRecord {
    pub size: usize,
    pub sigma: f64,
    pub seed: u64,
    #[serde(flatten)]
    pub scene: Scene,
}

/// Summary written by `transform` as report.json.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformReport {
    pub height: usize,
    pub width: usize,
    pub wavelet_roundtrip_error: Option<f64>,
    pub shearlet_roundtrip_error: Option<f64>,
    pub directional_filters: Option<usize>,
    pub frame_bounds: Option<(f64, f64)>,
    pub frame_ratio: Option<f64>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("geosep: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let shared = match &cli.command {
        Command::Synth(a) => &a.shared,
        Command::Separate(a) => &a.shared,
        Command::Eval(a) => &a.shared,
        Command::Transform(a) => &a.shared,
    };
    with_threads(shared.threads, || match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Separate(a) => cmd_separate(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Transform(a) => cmd_transform(a),
    })
}

#[cfg(feature = "parallel")]
fn with_threads(threads: Option<usize>, f: impl FnOnce() -> Result<()> + Send) -> Result<()> {
    match threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads(threads: Option<usize>, f: impl FnOnce() -> Result<()>) -> Result<()> {
    // single-threaded build: nothing to cap
    if threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    f()
}

fn base_config(shared: &Shared) -> Result<RunConfig> {
    let mut cfg = match &shared.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &shared.out {
        cfg.out = Some(out.clone());
    }
    if let Some(seed) = shared.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn prepare_out(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn echo_config(dir: &Path, cfg: &RunConfig) -> Result<()> {
    write_text(&dir.join("config.toml"), &cfg.to_toml())
}

fn required(value: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    value
        .clone()
        .ok_or_else(|| CliError::Config(format!("--{flag} is required (flag or config key)")))
}

fn load_scene(path: &Path) -> Result<Scene> {
    serde_json::from_reader(crate::io::open(path)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let mut cfg = base_config(&args.shared)?;
    if let Some(size) = args.size {
        cfg.size = size;
    }
    if let Some(sigma) = args.sigma {
        cfg.sigma = sigma;
    }
    let n = cfg.size;
    if n == 0 {
        return Err(CliError::Config("size must be positive".into()));
    }
    let scene = match &args.scene {
        Some(path) => load_scene(path)?,
        None => Scene {
            points: default_points(n, n),
            curves: default_curves(n, n),
        },
    };
    let phantom = gen_phantom(n, n, &scene.points, &scene.curves, cfg.sigma, cfg.seed)?;
    let dir = prepare_out(&cfg)?;
    save_image(&phantom.image, &dir.join("I.png"))?;
    save_image(&phantom.points, &dir.join("P.png"))?;
    save_image(&phantom.curves, &dir.join("C.png"))?;
    let record = SynthRecord {
        size: n,
        sigma: cfg.sigma,
        seed: cfg.seed,
        scene,
    };
    let json = serde_json::to_string_pretty(&record).expect("spec serializes");
    write_text(&dir.join("spec.json"), &(json + "\n"))
}

pub fn separate_config(args: &SeparateArgs) -> Result<RunConfig> {
    let mut cfg = base_config(&args.shared)?;
    if let Some(input) = &args.input {
        cfg.input = Some(input.clone());
    }
    if let Some(v) = args.iterations {
        cfg.iterations = v;
    }
    if let Some(v) = args.scales {
        cfg.scales = v;
    }
    if let Some(v) = args.levels {
        cfg.levels = v;
    }
    if let Some(v) = &args.weights {
        cfg.weights = v.clone();
    }
    if let Some(v) = args.lambda_min {
        cfg.lambda_min = Some(v);
    }
    if let Some(v) = args.schedule {
        cfg.schedule = v;
    }
    if args.no_preprocess {
        cfg.weights = Weights::ones(cfg.levels).values().to_vec();
    }
    Ok(cfg)
}

pub fn cmd_separate(args: &SeparateArgs) -> Result<()> {
    let cfg = separate_config(args)?;
    let solver: SolverConfig = cfg.solver()?;
    let input = required(&cfg.input, "input")?;
    let image = load_image(&input)?;
    let result = separate_image(&image, &solver)?;
    let dir = prepare_out(&cfg)?;
    save_image(&result.points, &dir.join("points.png"))?;
    save_image(&result.curves, &dir.join("curves.png"))?;
    save_image(&result.residual, &dir.join("residual.png"))?;
    write_trace(&dir.join("trace.csv"), &result.trace)?;
    echo_config(&dir, &cfg)?;
    println!(
        "lambda_max {:.6e} lambda_min {:.6e} rho {:.6e} residual {:.6e}",
        result.lambda_max,
        result.lambda_min,
        result.rho,
        result.residual.norm_l2()
    );
    Ok(())
}

/// Smallest measure and its threshold.
fn best(rows: &[MeasureRow], pick: impl Fn(&MeasureRow) -> f64) -> (f64, f64) {
    rows.iter()
        .map(|r| (r.t, pick(r)))
        .fold((f64::NAN, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let mut cfg = base_config(&args.shared)?;
    for (flag, slot) in [
        (&args.truth_points, &mut cfg.truth_points),
        (&args.truth_curves, &mut cfg.truth_curves),
        (&args.est_points, &mut cfg.est_points),
        (&args.est_curves, &mut cfg.est_curves),
    ] {
        if let Some(p) = flag {
            *slot = Some(p.clone());
        }
    }
    if let Some(s) = args.sigma_g {
        cfg.sigma_g = s;
    }
    let measure = cfg.measure()?;
    let tp = load_image(&required(&cfg.truth_points, "truth-points")?)?;
    let tc = load_image(&required(&cfg.truth_curves, "truth-curves")?)?;
    let ep = load_image(&required(&cfg.est_points, "est-points")?)?;
    let ec = load_image(&required(&cfg.est_curves, "est-curves")?)?;
    let rows = measure_table(&tp, &tc, &ep, &ec, &measure)?;
    let dir = prepare_out(&cfg)?;
    write_measures(&dir.join("measures.csv"), &rows)?;
    let mp: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.m_p)).collect();
    let mc: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.m_c)).collect();
    line_plot(
        &[
            Series { points: &mp, color: RED },
            Series { points: &mc, color: BLUE },
        ],
        640,
        400,
    )
    .save(&dir.join("measures.png"))?;
    let (tp_best, mp_best) = best(&rows, |r| r.m_p);
    let (tc_best, mc_best) = best(&rows, |r| r.m_c);
    println!("min M_p {mp_best:.6} at T = {tp_best:.2}; min M_c {mc_best:.6} at T = {tc_best:.2}");
    Ok(())
}

fn relative_error(a: &RasterImage, b: &RasterImage) -> Result<f64> {
    let norm = a.norm_l2();
    let diff = a.sub(b)?.norm_l2();
    Ok(if norm > 0.0 { diff / norm } else { diff })
}

fn filter_name(index: FilterIndex) -> Option<String> {
    match index {
        FilterIndex::Lowpass => None,
        FilterIndex::Directional { scale, shear, cone } => {
            let cone = match cone {
                Cone::Horizontal => "h",
                Cone::Vertical => "v",
            };
            Some(format!("j{scale}_{cone}_k{:+}_c{}.png", shear.k, shear.refinement))
        }
    }
}

/// `|ψ̂|` with the zero frequency moved to the center, scaled to peak 1.
fn spectrum_picture(spec: &geosep_core::SpectralImage) -> RasterImage {
    let (h, w) = spec.dims();
    let peak = spec.data().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let scale = if peak > 0.0 { 1.0 / peak } else { 0.0 };
    RasterImage::from_fn(h, w, |r, c| spec.get((r + h - h / 2) % h, (c + w - w / 2) % w).norm() * scale)
        .expect("spectrum dims")
}

pub fn cmd_transform(args: &TransformArgs) -> Result<()> {
    let mut cfg = base_config(&args.shared)?;
    if let Some(v) = args.size {
        cfg.size = v;
    }
    if let Some(v) = args.scales {
        cfg.scales = v;
    }
    if let Some(v) = &args.input {
        cfg.input = Some(v.clone());
    }
    let solver = cfg.solver()?;
    let image = match &cfg.input {
        Some(path) => load_image(path)?,
        None => add_noise(&RasterImage::zeros(cfg.size, cfg.size)?, 1.0, cfg.seed)?,
    };
    let (height, width) = image.dims();
    let mut report = TransformReport {
        height,
        width,
        wavelet_roundtrip_error: None,
        shearlet_roundtrip_error: None,
        directional_filters: None,
        frame_bounds: None,
        frame_ratio: None,
    };
    let dir = prepare_out(&cfg)?;
    if args.dictionary != Dictionary::Shearlet {
        let back = uwt_inverse(&uwt_forward(&image, &solver.wavelet)?, &solver.wavelet)?;
        report.wavelet_roundtrip_error = Some(relative_error(&image, &back)?);
    }
    if args.dictionary != Dictionary::Wavelet {
        let bank = build_filter_bank(height, width, &solver.shearlet)?;
        let dual = compute_dual_bank(&bank)?;
        let back = shearlet_inverse(&shearlet_forward(&image, &bank)?, &dual)?;
        report.shearlet_roundtrip_error = Some(relative_error(&image, &back)?);
        let (lo, hi) = bank.frame_bounds();
        report.directional_filters = Some(bank.directional_count());
        report.frame_bounds = Some((lo, hi));
        report.frame_ratio = Some(hi / lo);
        if args.dump_filters {
            let filters = dir.join("filters");
            std::fs::create_dir_all(&filters).map_err(|e| CliError::io(&filters, e))?;
            for (i, &index) in bank.indices().iter().enumerate() {
                if let Some(name) = filter_name(index) {
                    save_image(&spectrum_picture(bank.spectrum(i)), &filters.join(name))?;
                }
            }
        }
    }
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_text(&dir.join("report.json"), &(json.clone() + "\n"))?;
    echo_config(&dir, &cfg)?;
    println!("{json}");
    Ok(())
}
