use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use mlmap_core::io::{self, MapLayer};
use mlmap_core::pipeline::{export_csv, MAPPING_REPORT, TRAVERSABILITY_MAP};
use mlmap_core::synth::{self, SynthConfig};
use mlmap_core::{load_dataset, run_eval, run_labeling, run_mapping, Dataset, Error, Result, RunConfig};

#[derive(Parser)]
#[command(name = "mlmap", version, about = "Multi-layer probabilistic traversability mapping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Run configuration (TOML with dotted keys).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Sequence directory; overrides `dataset.root` from the config.
    #[arg(short, long)]
    dataset: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate traversability label rasters from depth and clouds.
    Label {
        #[command(flatten)]
        input: Input,
        /// Output directory for the label rasters [default: <dataset>/labels].
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Build the map layers from a sequence.
    Map {
        #[command(flatten)]
        input: Input,
        /// Output directory for the map files and the run report.
        #[arg(short, long)]
        out: PathBuf,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Disable pseudo-measurements from the semantic layer.
        #[arg(long)]
        no_pseudo: bool,
    },
    /// Score a traversability map against ground-truth rasters.
    Eval {
        #[command(flatten)]
        input: Input,
        /// Traversability map file, or a directory written by `map`.
        #[arg(short, long)]
        map: PathBuf,
        /// Also write per-class results as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Dump a map file as CSV rows `x,y,z,value,variance`.
    Export {
        /// Map file written by `map`.
        map: PathBuf,
        /// Run configuration; needed for friction-layer priors.
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Output file [default: stdout].
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic corridor sequence with a matching config.
    Synth {
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        frames: usize,
    },
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn load_input(input: &Input) -> Result<(RunConfig, Dataset)> {
    let cfg = load_config(input.config.as_deref())?;
    let root = input
        .dataset
        .clone()
        .or_else(|| cfg.dataset.root.clone())
        .ok_or_else(|| Error::InvalidParameter("no dataset given: pass --dataset or set dataset.root".into()))?;
    let ds = load_dataset(&root)?;
    info!("loaded {} frames from {}", ds.records.len(), root.display());
    Ok((cfg, ds))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Label { input, out } => {
            let (cfg, ds) = load_input(&input)?;
            let intr = ds.require_intrinsics()?;
            let labels = run_labeling(&ds.records, &cfg, intr)?;
            let out = out.unwrap_or_else(|| ds.root.join(mlmap_core::dataset::LABELS));
            std::fs::create_dir_all(&out).map_err(|source| Error::Io {
                path: out.clone(),
                source,
            })?;
            let mut written = 0;
            for (rec, raster) in ds.records.iter().zip(&labels) {
                if let Some(r) = raster {
                    let name = format!("{}.pgm", mlmap_core::dataset::frame_name(rec.id));
                    io::write_pgm(&out.join(name), r)?;
                    written += 1;
                }
            }
            println!("wrote {written} label rasters to {}", out.display());
        }
        Command::Map {
            input,
            out,
            seed,
            no_pseudo,
        } => {
            let (mut cfg, ds) = load_input(&input)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if no_pseudo {
                cfg.traversability.pseudo_measurements = false;
                cfg.friction.fuse = false;
            }
            cfg.validate()?;
            let result = run_mapping(&ds.records, &cfg, ds.intrinsics.as_ref())?;
            result.write(&out)?;
            info!("total mapping time {:.3} s", result.report.total_time().as_secs_f64());
            println!(
                "mapped {} frames: {} semantic cells, {} traversability cells; see {}",
                ds.records.len(),
                result.semantic.len(),
                result.traversability.len(),
                out.join(MAPPING_REPORT).display()
            );
        }
        Command::Eval { input, map, csv } => {
            let (cfg, ds) = load_input(&input)?;
            let intr = ds.require_intrinsics()?;
            let path = if map.is_dir() { map.join(TRAVERSABILITY_MAP) } else { map };
            let grid = match io::read_map(&path)? {
                MapLayer::Traversability(g) => g,
                _ => {
                    return Err(Error::Format {
                        file: path,
                        msg: "not a traversability map".into(),
                    })
                }
            };
            let report = run_eval(&ds.records, &grid, &cfg, intr)?;
            print!("{}", report.to_text());
            if let Some(p) = csv {
                write_file(&p, &report.to_csv())?;
            }
        }
        Command::Export { map, config, out } => {
            let cfg = load_config(config.as_deref())?;
            let layer = io::read_map(&map)?;
            let text = export_csv(&layer, &cfg.friction_config()?);
            match out {
                Some(p) => write_file(&p, &text)?,
                None => print!("{text}"),
            }
        }
        Command::Synth { out, seed, frames } => {
            let sc = SynthConfig {
                seed,
                frames,
                ..SynthConfig::default()
            };
            let scene = synth::generate(&sc)?;
            synth::write_scene(&out, &scene, &synth::run_config(seed))?;
            println!("wrote {frames} synthetic frames to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
