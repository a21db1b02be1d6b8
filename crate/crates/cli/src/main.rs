use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use salsi_core::evaluation::roc_csv;
use salsi_core::volume::{load_volume_stem, write_pgm};
use salsi_core::{
    compute_saliency, generate, roc_sweep, segment, Axis, BinaryVolume, Dims, DomeSpec, Error, MorphologyMode,
    PipelineConfig, SaliencyVolume, Summary, Volume3D,
};

mod output;

use output::Staged;

#[derive(Parser)]
#[command(name = "salsi", version, about = "Saliency attribute for seismic volumes")]
struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Saliency volume of an amplitude volume.
    Compute {
        /// Input volume: `stem`, `stem.json` or `stem.raw`.
        #[arg(long)]
        input: PathBuf,
        /// Output stem; writes `<out>.json` and `<out>.raw`.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Otsu threshold plus morphological closing of a saliency volume.
    Threshold {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the unclosed mask to this stem.
        #[arg(long)]
        raw_mask: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// ROC curve and AUC of a saliency volume against a ground-truth mask.
    Evaluate {
        #[arg(long)]
        saliency: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Directory receiving `roc.csv` and `summary.json`.
        #[arg(long)]
        out_dir: PathBuf,
        /// Score only this section index instead of the whole volume.
        #[arg(long)]
        slice: Option<usize>,
        #[arg(long, default_value = "inline", requires = "slice")]
        slice_axis: Axis,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Synthetic dome volume with its boundary mask.
    Synth {
        /// Dome description (JSON); omitted fields take their defaults.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Writes `<prefix>.{json,raw}` and `<prefix>_gt.{json,raw}`.
        #[arg(long)]
        out_prefix: PathBuf,
        /// Overrides the seed in the spec.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// One section of a volume as an 8-bit PGM image.
    ExportSlice {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "inline")]
        axis: Axis,
        #[arg(long)]
        index: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct PipelineArgs {
    /// JSON file with pipeline settings; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    temporal_axis: Option<Axis>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    se_radius: Option<usize>,
    #[arg(long)]
    n_thresholds: Option<usize>,
    #[arg(long)]
    morphology: Option<MorphologyMode>,
}

impl PipelineArgs {
    fn resolve(&self) -> Result<PipelineConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Failure::input(Error::Io {
                    path: path.clone(),
                    source: e,
                }))?;
                PipelineConfig::from_json(&text)
                    .map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))?
            }
            None => PipelineConfig::default(),
        };
        if let Some(v) = self.window {
            cfg.window = v;
        }
        if let Some(v) = self.temporal_axis {
            cfg.temporal_axis = v;
        }
        if let Some(v) = self.levels {
            cfg.levels = v;
        }
        if let Some(v) = self.se_radius {
            cfg.se_radius = v;
        }
        if let Some(v) = self.n_thresholds {
            cfg.n_thresholds = v;
        }
        if let Some(v) = self.morphology {
            cfg.morphology_mode = v;
        }
        cfg.validate().map_err(Failure::input)?;
        Ok(cfg)
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: String) -> Self {
        Failure { code, message }
    }

    /// Errors met while reading inputs or settings.
    fn input(e: Error) -> Self {
        let code = match e {
            Error::Degenerate(_) => 3,
            Error::ShapeMismatch { .. } => 4,
            _ => 2,
        };
        Failure::new(code, e.to_string())
    }

    /// Errors from the processing and writing stages.
    fn run(e: Error) -> Self {
        let code = match e {
            Error::Degenerate(_) => 3,
            Error::ShapeMismatch { .. } => 4,
            _ => 1,
        };
        Failure::new(code, e.to_string())
    }
}

fn load(path: &Path) -> Result<Volume3D, Failure> {
    load_volume_stem(path).map_err(Failure::input)
}

fn load_saliency(path: &Path) -> Result<SaliencyVolume, Failure> {
    SaliencyVolume::from_volume(load(path)?).map_err(Failure::input)
}

/// One section as a volume one sample thick along `axis`.
fn section_volume(v: &Volume3D, axis: Axis, index: usize) -> salsi_core::Result<Volume3D> {
    let mut dims = v.dims().as_array();
    dims[axis.position()] = 1;
    let section = v.section(axis, index)?;
    Volume3D::new(Dims::new(dims[0], dims[1], dims[2]), section.values)
}

fn echo(cfg: &PipelineConfig) {
    for line in cfg.echo() {
        println!("{line}");
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    let start = Instant::now();
    match cmd {
        Command::Compute { input, out, pipeline } => {
            let cfg = pipeline.resolve()?;
            let volume = load(&input)?;
            echo(&cfg);
            println!("dims={}", volume.dims());
            let s = compute_saliency(&volume, &cfg).map_err(Failure::run)?;
            let out_volume = s.into_volume().with_provenance(format!("saliency of {}", input.display()));
            let mut staged = Staged::default();
            staged.add_volume(&out_volume, &out).map_err(Failure::run)?;
            staged.commit().map_err(Failure::run)?;
        }
        Command::Threshold { input, out, raw_mask, pipeline } => {
            let cfg = pipeline.resolve()?;
            let s = load_saliency(&input)?;
            echo(&cfg);
            let seg = segment(&s, &cfg).map_err(Failure::run)?;
            let summary = seg.summary();
            println!("threshold={}", summary.threshold);
            println!("binary_count={}", summary.binary_count);
            println!("closed_count={}", summary.closed_count);
            let mut staged = Staged::default();
            staged.add_volume(&seg.closed.to_volume(), &out).map_err(Failure::run)?;
            if let Some(stem) = raw_mask {
                staged.add_volume(&seg.binary.to_volume(), &stem).map_err(Failure::run)?;
            }
            staged.commit().map_err(Failure::run)?;
        }
        Command::Evaluate { saliency, gt, out_dir, slice, slice_axis, pipeline } => {
            let cfg = pipeline.resolve()?;
            let mut s = load(&saliency)?;
            let mut truth = load(&gt)?;
            if s.dims() != truth.dims() {
                return Err(Failure::input(Error::ShapeMismatch { left: s.dims(), right: truth.dims() }));
            }
            if let Some(index) = slice {
                s = section_volume(&s, slice_axis, index).map_err(Failure::input)?;
                truth = section_volume(&truth, slice_axis, index).map_err(Failure::input)?;
                println!("slice={slice_axis}:{index}");
            }
            let s = SaliencyVolume::from_volume(s).map_err(Failure::input)?;
            let truth = BinaryVolume::from_volume(&truth);
            echo(&cfg);
            let curve = roc_sweep(&s, &truth, cfg.n_thresholds, cfg.levels).map_err(Failure::run)?;
            let summary = Summary::from_curve(&curve);
            println!("auc={}", summary.auc);
            println!("optimal_threshold={}", summary.optimal_threshold);
            println!("tpr_at_opt={}", summary.tpr_at_opt);
            println!("fpr_at_opt={}", summary.fpr_at_opt);
            std::fs::create_dir_all(&out_dir)
                .map_err(|e| Failure::run(Error::Io { path: out_dir.clone(), source: e }))?;
            let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
            let mut staged = Staged::default();
            staged.add(out_dir.join("roc.csv"), roc_csv(&curve).as_bytes()).map_err(Failure::run)?;
            staged.add(out_dir.join("summary.json"), format!("{json}\n").as_bytes()).map_err(Failure::run)?;
            staged.commit().map_err(Failure::run)?;
        }
        Command::Synth { spec, out_prefix, seed } => {
            let mut dome = match &spec {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| Failure::input(Error::Io { path: path.clone(), source: e }))?;
                    serde_json::from_str::<DomeSpec>(&text)
                        .map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))?
                }
                None => DomeSpec::default(),
            };
            if let Some(seed) = seed {
                dome.seed = seed;
            }
            let case = generate(&dome).map_err(Failure::input)?;
            println!("dims={}", case.volume.dims());
            println!("seed={}", dome.seed);
            println!("gt_boundary_count={}", case.gt_boundary.count());
            let mut gt_stem = out_prefix.clone().into_os_string();
            gt_stem.push("_gt");
            let mut staged = Staged::default();
            staged.add_volume(&case.volume, &out_prefix).map_err(Failure::run)?;
            staged.add_volume(&case.gt_boundary.to_volume(), Path::new(&gt_stem)).map_err(Failure::run)?;
            staged.commit().map_err(Failure::run)?;
        }
        Command::ExportSlice { input, axis, index, out } => {
            let volume = load(&input)?;
            let section = volume.section(axis, index).map_err(Failure::input)?;
            let mut bytes = Vec::new();
            write_pgm(&mut bytes, section.width, section.height, &section.to_gray()).expect("in-memory write");
            println!("width={}", section.width);
            println!("height={}", section.height);
            let mut staged = Staged::default();
            staged.add(&out, &bytes).map_err(Failure::run)?;
            staged.commit().map_err(Failure::run)?;
        }
    }
    println!("elapsed_ms={:.3}", start.elapsed().as_secs_f64() * 1e3);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(0) => Err(Failure::new(2, "--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => {
                println!("threads={n}");
                pool.install(|| run(cli.command))
            }
            Err(e) => Err(Failure::new(1, format!("thread pool: {e}"))),
        },
        None => run(cli.command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("salsi: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
