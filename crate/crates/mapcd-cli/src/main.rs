//! Command-line interface for map change-detection evaluation.
//!
//! Subcommands: `validate`, `encode`, `perturb`, `simulate`, `render`,
//! `evaluate`. Exit codes: 0 success, 1 data errors, 2 usage errors. All
//! randomness is seeded through `--seed`; identical invocations produce
//! byte-identical outputs.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mapcd::dataset::{load_dataset, save_dataset, DatasetError};
use mapcd::encoding::{encode_prior, EncoderConfig};
use mapcd::map::{load_map, load_map_with_warnings, save_map, MapError};
use mapcd::metrics::{evaluate_all, EvalConfig};
use mapcd::perturb::{
    make_deletion_examples, make_insertion_examples, make_mixed_examples, ChangeKind,
    PerturbationConfig,
};
use mapcd::render::{render_ground_truth, render_prediction, RenderStyle};
use mapcd::sim::{
    build_synthetic_dataset, reference_dataset, NoiseConfig, SyntheticConfig, WorldConfig,
};

#[derive(Parser)]
#[command(
    name = "mapcd",
    version,
    about = "Element-based change detection evaluation for vectorized HD maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a map file against every invariant and print violations.
    Validate {
        /// Map JSON file.
        #[arg(long)]
        map: PathBuf,
    },
    /// Encode a stale map into its numeric token matrix.
    Encode {
        /// Map JSON file.
        #[arg(long)]
        map: PathBuf,
        /// Output file (CSV or binary).
        #[arg(long)]
        out: PathBuf,
        /// Positional embedding dimension per coordinate pair (multiple of 4).
        #[arg(long, default_value_t = 16)]
        dim: usize,
        /// Base of the sine/cosine frequency ladder.
        #[arg(long, default_value_t = 1000.0)]
        frequency_base: f64,
        #[arg(long, value_enum, default_value_t = EncodeFormat::Csv)]
        format: EncodeFormat,
    },
    /// Generate a (stale prior, labeled ground truth) pair from a world map.
    Perturb {
        /// Up-to-date world map JSON file.
        #[arg(long)]
        world: PathBuf,
        #[arg(long, value_enum)]
        mode: PerturbMode,
        /// RNG seed (mandatory; there is no ambient randomness).
        #[arg(long)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Optional perturbation config JSON; the seed always comes from
        /// --seed.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Build a full synthetic dataset (stale/gt/pred frames + manifest).
    Simulate {
        #[arg(long, value_enum, default_value_t = Preset::Reference)]
        preset: Preset,
        /// Optional noise config JSON; defaults to the zero-noise identity
        /// detector.
        #[arg(long)]
        noise: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        /// Output dataset directory.
        #[arg(long)]
        out: PathBuf,
        /// Sequence count (custom preset).
        #[arg(long)]
        sequences: Option<usize>,
        /// Frames per sequence (custom preset).
        #[arg(long)]
        frames: Option<usize>,
        /// Optional perturbation config JSON (custom preset).
        #[arg(long)]
        perturb_config: Option<PathBuf>,
    },
    /// Render a ground-truth or prediction frame as an SVG change map.
    Render {
        /// Frame JSON file (gt or pred; detected by schema).
        #[arg(long)]
        frame: PathBuf,
        /// Output SVG file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run all evaluation strategies over a dataset directory.
    Evaluate {
        /// Dataset directory (as written by `simulate`).
        #[arg(long)]
        dataset: PathBuf,
        /// Optional evaluation config JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output report JSON file.
        #[arg(long)]
        out: PathBuf,
        /// Optional Markdown summary file.
        #[arg(long)]
        markdown: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodeFormat {
    Csv,
    Bin,
}

#[derive(Clone, Copy, ValueEnum)]
enum PerturbMode {
    Insertions,
    Deletions,
    Mixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// 33 change + 4 no-change sequences, 46 deletions, 20 insertions,
    /// ~3800 frames.
    Reference,
    /// Custom shape from --sequences / --frames.
    Custom,
}

enum CliError {
    Usage(String),
    Data(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<MapError> for CliError {
    fn from(e: MapError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate { map } => validate(&map),
        Command::Encode { map, out, dim, frequency_base, format } => {
            encode(&map, &out, dim, frequency_base, format)
        }
        Command::Perturb { world, mode, seed, out, config } => {
            perturb(&world, mode, seed, &out, config.as_deref())
        }
        Command::Simulate { preset, noise, seed, out, sequences, frames, perturb_config } => {
            simulate(
                preset,
                noise.as_deref(),
                seed,
                &out,
                sequences,
                frames,
                perturb_config.as_deref(),
            )
        }
        Command::Render { frame, out } => render(&frame, &out),
        Command::Evaluate { dataset, config, out, markdown } => {
            evaluate(&dataset, config.as_deref(), &out, markdown.as_deref())
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Data(format!("{}: {e}", parent.display())))?;
        }
    }
    fs::write(path, bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_slice(&read(path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn validate(map_path: &Path) -> Result<(), CliError> {
    let (map, warnings) = load_map_with_warnings(&read(map_path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", map_path.display())))?;
    for w in &warnings {
        println!("warning: {w}");
    }
    let violations = map.validate();
    if violations.is_empty() {
        println!("{}: ok ({} elements)", map_path.display(), map.elements.len());
        Ok(())
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
        Err(CliError::Data(format!(
            "{}: {} violation(s)",
            map_path.display(),
            violations.len()
        )))
    }
}

fn encode(
    map_path: &Path,
    out: &Path,
    dim: usize,
    frequency_base: f64,
    format: EncodeFormat,
) -> Result<(), CliError> {
    if dim < 4 || !dim.is_multiple_of(4) {
        return Err(CliError::Usage(format!(
            "--dim must be a positive multiple of 4, got {dim}"
        )));
    }
    if !(frequency_base.is_finite() && frequency_base > 0.0) {
        return Err(CliError::Usage("--frequency-base must be positive".into()));
    }
    let map = load_map(&read(map_path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", map_path.display())))?;
    let cfg = EncoderConfig { dim, frequency_base };
    let encoding = encode_prior(&map, &cfg).map_err(|e| CliError::Data(e.to_string()))?;
    match format {
        EncodeFormat::Csv => write(out, encoding.to_csv().as_bytes())?,
        EncodeFormat::Bin => write(out, &encoding.to_binary())?,
    }
    println!("encoded {} x {} -> {}", encoding.rows(), encoding.cols(), out.display());
    Ok(())
}

#[derive(Serialize)]
struct PerturbManifest {
    schema_version: u32,
    frames: Vec<PerturbManifestRow>,
}

#[derive(Serialize)]
struct PerturbManifestRow {
    frame_id: String,
    insertions: usize,
    deletions: usize,
    stale_elements: usize,
    world_elements: usize,
}

fn perturb(
    world_path: &Path,
    mode: PerturbMode,
    seed: u64,
    out: &Path,
    config: Option<&Path>,
) -> Result<(), CliError> {
    let world = load_map(&read(world_path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", world_path.display())))?;
    let mut cfg: PerturbationConfig = match config {
        Some(path) => parse_json(path)?,
        None => PerturbationConfig::default(),
    };
    cfg.rng_seed = seed;
    cfg.validate().map_err(|e| CliError::Data(e.to_string()))?;

    let (stale, gt) = match mode {
        PerturbMode::Insertions => Ok(make_insertion_examples(&world, &cfg)),
        PerturbMode::Deletions => make_deletion_examples(&world, &cfg),
        PerturbMode::Mixed => make_mixed_examples(&world, &cfg),
    }
    .map_err(|e| CliError::Data(e.to_string()))?;

    let manifest = PerturbManifest {
        schema_version: 1,
        frames: vec![PerturbManifestRow {
            frame_id: gt.frame_id.clone(),
            insertions: gt.changed(Some(ChangeKind::Insertion)).count(),
            deletions: gt.changed(Some(ChangeKind::Deletion)).count(),
            stale_elements: stale.elements.len(),
            world_elements: world.elements.len(),
        }],
    };
    write(&out.join("stale.json"), &save_map(&stale))?;
    write(&out.join("gt.json"), &mapcd::dataset::save_gt_frame(&gt))?;
    let mut manifest_bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    manifest_bytes.push(b'\n');
    write(&out.join("manifest.json"), &manifest_bytes)?;
    println!(
        "perturbed '{}': {} insertions, {} deletions -> {}",
        gt.frame_id,
        manifest.frames[0].insertions,
        manifest.frames[0].deletions,
        out.display()
    );
    Ok(())
}

fn simulate(
    preset: Preset,
    noise_path: Option<&Path>,
    seed: u64,
    out: &Path,
    sequences: Option<usize>,
    frames: Option<usize>,
    perturb_config: Option<&Path>,
) -> Result<(), CliError> {
    let noise: NoiseConfig = match noise_path {
        Some(path) => parse_json(path)?,
        None => NoiseConfig::zero(0),
    };
    let ds = match preset {
        Preset::Reference => reference_dataset(&noise, seed),
        Preset::Custom => {
            let sequences = sequences.ok_or_else(|| {
                CliError::Usage("--sequences is required for --preset custom".into())
            })?;
            let frames = frames.ok_or_else(|| {
                CliError::Usage("--frames is required for --preset custom".into())
            })?;
            if sequences == 0 || frames == 0 {
                return Err(CliError::Usage("--sequences and --frames must be >= 1".into()));
            }
            let perturbation: PerturbationConfig = match perturb_config {
                Some(path) => parse_json(path)?,
                None => PerturbationConfig::default(),
            };
            let cfg = SyntheticConfig {
                sequences,
                frames_per_sequence: frames,
                world: WorldConfig::default(),
                perturbation,
                noise,
                seed,
            };
            build_synthetic_dataset(&cfg).map_err(|e| CliError::Data(e.to_string()))?
        }
    };
    let manifest = save_dataset(&ds, out)?;
    println!(
        "wrote {} sequences / {} frames ({} insertions, {} deletions) -> {}",
        manifest.totals.sequences,
        manifest.totals.frames,
        manifest.totals.insertions,
        manifest.totals.deletions,
        out.display()
    );
    Ok(())
}

fn render(frame_path: &Path, out: &Path) -> Result<(), CliError> {
    let bytes = read(frame_path)?;
    let style = RenderStyle::default();
    // A frame file is either ground truth (elements carry `change`) or a
    // prediction (elements carry `score`); try gt first.
    let (svg, warnings) = match mapcd::dataset::load_gt_frame(&bytes) {
        Ok(gt) => render_ground_truth(&gt, &style),
        Err(gt_err) => match mapcd::dataset::load_pred_frame(&bytes) {
            Ok(pred) => render_prediction(&pred, &style),
            Err(_) => {
                return Err(CliError::Data(format!("{}: {gt_err}", frame_path.display())));
            }
        },
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    write(out, svg.as_bytes())?;
    println!("rendered {} -> {}", frame_path.display(), out.display());
    Ok(())
}

fn evaluate(
    dataset_dir: &Path,
    config: Option<&Path>,
    out: &Path,
    markdown: Option<&Path>,
) -> Result<(), CliError> {
    let cfg: EvalConfig = match config {
        Some(path) => parse_json(path)?,
        None => EvalConfig::default(),
    };
    let ds = load_dataset(dataset_dir)?;
    let report = evaluate_all(&ds, &cfg).map_err(|e| CliError::Data(e.to_string()))?;
    write(out, &report.to_json())?;
    if let Some(md_path) = markdown {
        write(md_path, report.to_markdown().as_bytes())?;
    }
    println!(
        "evaluated {} sequences / {} frames -> {}",
        ds.sequences.len(),
        ds.frame_count(),
        out.display()
    );
    Ok(())
}
