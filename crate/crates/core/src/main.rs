use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use inkstroke::eval::{self, token_stats};
use inkstroke::ink::{parse_ink_file, write_ink_file, InkSample};
use inkstroke::mlp::TrainConfig;
use inkstroke::pipeline::PipelineConfig;
use inkstroke::preprocess::PreprocessConfig;
use inkstroke::recognizer::{analyze_all, Recognizer};
use inkstroke::service::{Service, ServiceState, DEFAULT_PORT};
use inkstroke::synthgen::{default_templates, generate, MAX_NOISE};
use inkstroke::{stages, Error, Result};

/// Online handwriting recognition: smoothing, critical-point tokenization,
/// token features and per-cluster perceptrons.
#[derive(Parser)]
#[command(name = "inkstroke", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic ink dataset from the built-in templates.
    GenSynthetic {
        /// Number of template classes to use (the first N of 12).
        #[arg(long, default_value_t = 12)]
        classes: usize,
        #[arg(long, default_value_t = 50)]
        per_class: usize,
        /// Jitter std as a fraction of the template diagonal, at most 0.1.
        #[arg(long, default_value_t = 0.02)]
        noise: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Smooth every stroke of an ink file.
    Preprocess {
        input: PathBuf,
        /// Smoothing sweeps.
        #[arg(long, default_value_t = 1)]
        passes: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Detect critical points and tokens; writes segment JSON.
    Segment {
        input: PathBuf,
        /// One-sided extremum window as a fraction of the stroke's point count.
        #[arg(long, default_value_t = 0.05)]
        window_fraction: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Compute token features from segment JSON; writes CSV.
    Featurize {
        input: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Train one model per stroke-count cluster; writes cluster_N.json and manifest.json.
    Train {
        input: PathBuf,
        /// Output directory for model files.
        #[arg(long)]
        models: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Evaluate on a labeled dataset.
    Eval {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ProtocolArg::Kfold)]
        protocol: ProtocolArg,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        /// Print the report as JSON instead of text.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Monte Carlo evaluation: repeated stratified 70/30 splits.
    Montecarlo {
        input: PathBuf,
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Per-class minimum, mode and maximum token counts.
    TokenStats {
        input: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        window_fraction: f64,
        #[arg(long, default_value_t = 1)]
        passes: u32,
        #[arg(long)]
        json: bool,
    },
    /// Recognize one sample with trained models; prints JSON.
    Recognize {
        #[arg(long)]
        models: PathBuf,
        /// Ink file holding exactly one sample.
        #[arg(long)]
        input: PathBuf,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Model directory; without it every model route answers 503.
        #[arg(long)]
        models: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        workers: usize,
    },
}

#[derive(Args)]
struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Split,
    Kfold,
    Montecarlo,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long, default_value_t = 0.05)]
    window_fraction: f64,
    /// Smoothing sweeps.
    #[arg(long, default_value_t = 1)]
    passes: u32,
    /// Token slots in the encoded input vector (15 bits each).
    #[arg(long, default_value_t = 8)]
    max_tokens: usize,
    #[arg(long, default_value_t = 64)]
    hidden: usize,
    /// Sigmoid slope.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,
    #[arg(long, default_value_t = 0.05)]
    momentum: f64,
    /// Subtracted from every hidden pre-activation.
    #[arg(long, default_value_t = 0.0)]
    internal_threshold: f64,
    #[arg(long, default_value_t = 200)]
    max_epochs: usize,
    /// Stop once the mean epoch loss is at most this.
    #[arg(long, default_value_t = 1e-3)]
    target_error: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl PipelineArgs {
    fn config(&self) -> Result<PipelineConfig> {
        let c = PipelineConfig {
            window_fraction: self.window_fraction,
            smoothing_passes: self.passes,
            max_tokens: self.max_tokens,
            hidden: self.hidden,
            lambda: self.lambda,
            train: TrainConfig {
                learning_rate: self.learning_rate,
                momentum: self.momentum,
                internal_threshold: self.internal_threshold,
                max_epochs: self.max_epochs,
                target_error: self.target_error,
                seed: self.seed,
            },
        };
        c.validate().map_err(Error::Config)?;
        Ok(c)
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    let io_err = |source| Error::Io {
        context: format!("reading {}", path.display()),
        source,
    };
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).map_err(io_err)?;
        Ok(buf)
    } else {
        fs::read(path).map_err(io_err)
    }
}

fn emit(out: &Output, bytes: &[u8]) -> Result<()> {
    match &out.out {
        Some(path) => fs::write(path, bytes).map_err(|source| Error::Io {
            context: format!("writing {}", path.display()),
            source,
        }),
        None => io::stdout().write_all(bytes).map_err(|source| Error::Io {
            context: "writing standard output".into(),
            source,
        }),
    }
}

fn read_samples(path: &Path) -> Result<Vec<InkSample>> {
    let parsed = parse_ink_file(&read(path)?)?;
    warn_duplicates(parsed.duplicates_dropped);
    Ok(parsed.samples)
}

fn warn_duplicates(n: usize) {
    if n > 0 {
        eprintln!("warning: dropped {n} consecutive duplicate point(s)");
    }
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenSynthetic {
            classes,
            per_class,
            noise,
            seed,
            out,
        } => {
            let templates = default_templates();
            if classes == 0 || classes > templates.len() {
                return Err(Error::Config(format!(
                    "classes must be in 1..={}, got {classes}",
                    templates.len()
                )));
            }
            if !(0.0..=MAX_NOISE).contains(&noise) || per_class == 0 {
                return Err(Error::Config(format!(
                    "noise must be in [0, {MAX_NOISE}] and per-class positive"
                )));
            }
            emit(&out, &write_ink_file(&generate(&templates[..classes], per_class, noise, seed)))
        }
        Command::Preprocess { input, passes, out } => {
            if passes == 0 {
                return Err(Error::Config("passes must be at least 1".into()));
            }
            let r = stages::preprocess(&read(&input)?, &PreprocessConfig { passes })?;
            warn_duplicates(r.duplicates_dropped);
            emit(&out, &r.bytes)
        }
        Command::Segment {
            input,
            window_fraction,
            out,
        } => {
            let r = stages::segment(&read(&input)?, window_fraction)?;
            warn_duplicates(r.duplicates_dropped);
            emit(&out, &r.bytes)
        }
        Command::Featurize { input, out } => emit(&out, stages::featurize(&read(&input)?)?.as_bytes()),
        Command::Train {
            input,
            models,
            pipeline,
        } => {
            let config = pipeline.config()?;
            let analyses = analyze_all(&read_samples(&input)?, &config)?;
            let truncated = analyses.iter().filter(|a| a.encoded.truncated > 0).count();
            if truncated > 0 {
                eprintln!(
                    "warning: {truncated} sample(s) have more than {} tokens; extra tokens are not encoded",
                    config.max_tokens
                );
            }
            let recognizer = Recognizer::train(&analyses, &config)?;
            recognizer.save_dir(&models)?;
            let trained = recognizer.clusters.iter().flatten().count();
            eprintln!("wrote {trained} cluster model(s) to {}", models.display());
            Ok(())
        }
        Command::Eval {
            input,
            protocol,
            k,
            iterations,
            json,
            pipeline,
        } => {
            let config = pipeline.config()?;
            let samples = read_samples(&input)?;
            let seed = config.train.seed;
            let text = match protocol {
                ProtocolArg::Split => {
                    let r = eval::holdout(&samples, seed, &config)?;
                    if json { json_line(&r) } else { r.to_text() }
                }
                ProtocolArg::Kfold => {
                    let r = eval::kfold(&samples, k, seed, &config)?;
                    if json { json_line(&r) } else { r.to_text() }
                }
                ProtocolArg::Montecarlo => {
                    let r = eval::monte_carlo(&samples, iterations, seed, &config)?;
                    if json { json_line(&r) } else { r.to_text() }
                }
            };
            print!("{text}");
            Ok(())
        }
        Command::Montecarlo {
            input,
            iterations,
            json,
            pipeline,
        } => {
            let config = pipeline.config()?;
            let r = eval::monte_carlo(&read_samples(&input)?, iterations, config.train.seed, &config)?;
            print!("{}", if json { json_line(&r) } else { r.to_text() });
            Ok(())
        }
        Command::TokenStats {
            input,
            window_fraction,
            passes,
            json,
        } => {
            let config = PipelineConfig {
                window_fraction,
                smoothing_passes: passes,
                ..PipelineConfig::default()
            };
            config.validate().map_err(Error::Config)?;
            let stats = token_stats(&analyze_all(&read_samples(&input)?, &config)?);
            if json {
                print!("{}", json_line(&stats));
            } else {
                println!("{:<8} {:>7} {:>5} {:>5} {:>5}", "class", "samples", "min", "mode", "max");
                for c in &stats.per_class {
                    println!(
                        "{:<8} {:>7} {:>5} {:>5} {:>5}",
                        c.label, c.samples, c.min_tokens, c.mode_tokens, c.max_tokens
                    );
                }
                println!(
                    "at min {:.4}  at mode {:.4}  at max {:.4}",
                    stats.at_min, stats.at_mode, stats.at_max
                );
            }
            Ok(())
        }
        Command::Recognize { models, input } => {
            let recognizer = Recognizer::load_dir(&models)?;
            let samples = read_samples(&input)?;
            let [sample] = samples.as_slice() else {
                return Err(Error::Config(format!(
                    "recognize expects exactly one sample, {} has {}",
                    input.display(),
                    samples.len()
                )));
            };
            let r = recognizer.recognize(sample)?;
            println!("{}", serde_json::to_string(&r).expect("recognition serializes"));
            Ok(())
        }
        Command::Serve {
            port,
            host,
            models,
            workers,
        } => {
            let state = match &models {
                Some(dir) => ServiceState::load(dir)?,
                None => ServiceState::empty(),
            };
            let service = Service::bind(state, &format!("{host}:{port}"))?;
            eprintln!("listening on http://{}", service.local_addr());
            service.run(workers);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
