use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pitchmarks::baselines::{uniform_thresholds, EdgeMethod, DEFAULT_LOG_SIGMA};
use pitchmarks::config::{RunConfig, Seeding, CONFIG_ENV};
use pitchmarks::eval::{edge_sweep, hough_csv, hough_sweep, load_dataset, run_experiment, sweep_csv, write_dataset, Dataset};
use pitchmarks::imaging::io;
use pitchmarks::pipeline::{detect, overlay};
use pitchmarks::synth::{render, standard_suite, ten_line_scene, three_line_scene};
use pitchmarks::{Error, Result};

/// Soccer pitch line-mark detection and evaluation.
#[derive(Parser)]
#[command(name = "pitchmarks", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment and classify the line marks of one image.
    Detect(DetectArgs),
    /// Run the full pipeline over a dataset and write report.csv / report.json.
    Eval(EvalArgs),
    /// Threshold sweep of an edge detector, or Hough line-count sweep, as CSV.
    Baseline(BaselineArgs),
    /// Render a synthetic dataset.
    Synth(SynthArgs),
}

/// Tunables; each flag overrides the config file, which overrides the defaults.
#[derive(Args, Clone, Debug, Default)]
struct Tunables {
    /// TOML config file.
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Top-Hat disk diameter (px, odd).
    #[arg(long)]
    se_diameter: Option<usize>,
    /// Number of watershed experiments.
    #[arg(long)]
    experiments: Option<usize>,
    #[arg(long, value_enum)]
    seeding: Option<SeedingArg>,
    /// Seeding lattice cell size (px).
    #[arg(long)]
    cell_size: Option<usize>,
    /// Line probability threshold.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    rmse_line: Option<f64>,
    #[arg(long)]
    rmse_merge: Option<f64>,
    /// Minimum region / primitive size (px).
    #[arg(long)]
    min_region: Option<usize>,
    /// Evaluation matching tolerance (px).
    #[arg(long)]
    tol_px: Option<f64>,
    /// Master random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads over dataset items (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SeedingArg {
    Windowed,
    Uniform,
}

impl Tunables {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = RunConfig::resolve(self.config.as_deref())?;
        macro_rules! set {
            ($($field:ident).+ <- $flag:ident) => {
                if let Some(v) = self.$flag {
                    c.$($field).+ = v;
                }
            };
        }
        set!(se_diameter <- se_diameter);
        set!(experiments <- experiments);
        set!(cell_size <- cell_size);
        set!(threshold <- threshold);
        set!(classify.rmse_line <- rmse_line);
        set!(classify.rmse_merge <- rmse_merge);
        set!(classify.min_region <- min_region);
        set!(tol_px <- tol_px);
        set!(seed <- seed);
        set!(jobs <- jobs);
        if let Some(s) = self.seeding {
            c.seeding = match s {
                SeedingArg::Windowed => Seeding::Windowed,
                SeedingArg::Uniform => Seeding::Uniform,
            };
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct DetectArgs {
    /// Input frame (PNG or PNM).
    #[arg(long)]
    image: PathBuf,
    /// Playing-field mask; nonzero pixels are grass.
    #[arg(long)]
    field: PathBuf,
    /// Output directory for mask.png, probability.png, primitives.json and overlay.png.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    tunables: Tunables,
}

#[derive(Args)]
struct EvalArgs {
    /// Dataset root: `<root>/<match>/<image>.png` plus annotations.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    tunables: Tunables,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Sobel,
    Log,
    Tophat,
    Hough,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Output CSV file.
    #[arg(long)]
    out: PathBuf,
    /// Number of evenly spaced thresholds in [0, 1).
    #[arg(long, default_value_t = 50)]
    steps: usize,
    /// LoG scale (px).
    #[arg(long, default_value_t = DEFAULT_LOG_SIGMA)]
    sigma: f64,
    /// Hough sweep covers 1..=max_lines lines.
    #[arg(long, default_value_t = 14)]
    max_lines: usize,
    #[command(flatten)]
    tunables: Tunables,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SceneSet {
    /// The 20-scene evaluation suite.
    Standard,
    /// Views with three and with ten visible straight markings.
    LineCounts,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = SceneSet::Standard)]
    scenes: SceneSet,
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })
}

/// Loads a dataset, printing per-item load errors. Returns whether all items loaded.
fn load(root: &Path) -> Result<(Dataset, bool)> {
    if !root.is_dir() {
        return Err(Error::InvalidInput(format!("{}: not a dataset directory", root.display())));
    }
    let ds = load_dataset(root)?;
    for e in &ds.errors {
        eprintln!("error: {}: {}", e.item, e.message);
    }
    let clean = ds.errors.is_empty();
    Ok((ds, clean))
}

fn cmd_detect(a: &DetectArgs) -> Result<bool> {
    let cfg = a.tunables.resolve()?;
    let image = io::load_rgb(&a.image)?;
    let field = io::load_mask(&a.field)?;
    if field.dims() != image.dims() {
        return Err(Error::Format {
            path: a.field.clone(),
            message: format!("size {:?} differs from image {:?}", field.dims(), image.dims()),
        });
    }
    let det = detect(&image, &field, &cfg)?;
    create_dir(&a.out)?;
    io::save_mask(&det.mask, a.out.join("mask.png"))?;
    det.probability.save_png(a.out.join("probability.png"))?;
    det.classification.save_json(a.out.join("primitives.json"))?;
    io::save_image(&overlay(&image, &det.classification)?, a.out.join("overlay.png"))?;
    println!(
        "{} line pixels, {} lines, {} ellipses -> {}",
        det.mask.count(),
        det.classification.lines.len(),
        det.classification.ellipses.len(),
        a.out.display()
    );
    Ok(true)
}

fn cmd_eval(a: &EvalArgs) -> Result<bool> {
    let cfg = a.tunables.resolve()?;
    let (ds, clean) = load(&a.dataset)?;
    let report = run_experiment(&ds.items, &cfg)?;
    report.write(&a.out)?;
    for f in &report.failures {
        eprintln!("error: {}: {}", f.item, f.message);
    }
    let o = &report.overall;
    let obj = o.classification_obj.total();
    println!(
        "{} images (tol {} px): segmentation F {:.4}, classification px F {:.4}, object F {:.4}",
        o.images, report.tol_px, o.segmentation.f, o.classification_px.f, obj.f()
    );
    Ok(clean && report.failures.is_empty())
}

fn cmd_baseline(a: &BaselineArgs) -> Result<bool> {
    let cfg = a.tunables.resolve()?;
    let (ds, clean) = load(&a.dataset)?;
    let csv = match a.method {
        MethodArg::Hough => {
            if a.max_lines == 0 {
                return Err(Error::Config("max-lines must be >= 1".into()));
            }
            let counts: Vec<usize> = (1..=a.max_lines).collect();
            hough_csv(&hough_sweep(&ds.items, &counts, &cfg)?)?
        }
        m => {
            if a.steps == 0 {
                return Err(Error::Config("steps must be >= 1".into()));
            }
            let method = match m {
                MethodArg::Sobel => EdgeMethod::Sobel,
                MethodArg::Log => EdgeMethod::Log,
                _ => EdgeMethod::TopHat,
            };
            let rows = edge_sweep(&ds.items, method, &uniform_thresholds(a.steps), a.sigma, &cfg)?;
            if let Some(best) = rows.iter().max_by(|x, y| x.metrics.f.total_cmp(&y.metrics.f)) {
                println!("{}: best F {:.4} at threshold {:.3}", best.method, best.metrics.f, best.threshold);
            }
            sweep_csv(&rows)?
        }
    };
    write(&a.out, &csv)?;
    Ok(clean)
}

fn cmd_synth(a: &SynthArgs) -> Result<bool> {
    let scenes = match a.scenes {
        SceneSet::Standard => standard_suite(a.seed)?,
        SceneSet::LineCounts => vec![three_line_scene(a.seed)?, ten_line_scene(a.seed)?],
    };
    let items = scenes.iter().map(render).collect::<Result<Vec<_>>>()?;
    write_dataset(&a.out, &items)?;
    println!("{} items -> {}", items.len(), a.out.display());
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Detect(a) => cmd_detect(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Baseline(a) => cmd_baseline(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
