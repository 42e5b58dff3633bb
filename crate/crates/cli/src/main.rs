use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use scriptrace::cluster::{ClusterMethod, Style};
use scriptrace::features::Family;
use scriptrace::identify::{Backend, Strategy};
use scriptrace::patches::SampleMode;
use scriptrace::verify::DistanceMeasure;

mod commands;
mod config;

use config::{Config, VerifyMode};

/// Writer identification across writing styles.
#[derive(Debug, Parser)]
#[command(name = "scriptrace", version)]
struct Cli {
    /// TOML or JSON file with defaults for every flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every randomized stage (SCRIPTRACE_SEED takes precedence).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

/// Patch sampling and feature flags shared by several commands.
#[derive(Debug, Clone, Args)]
struct PipelineArgs {
    #[arg(long, value_parser = parse::<Family>)]
    family: Option<Family>,
    /// Patches per sample.
    #[arg(long)]
    patches: Option<usize>,
    #[arg(long, value_parser = parse::<SampleMode>)]
    patch_mode: Option<SampleMode>,
    /// Character patch side in pixels.
    #[arg(long)]
    patch_size: Option<usize>,
}

#[derive(Debug, Clone, Args)]
struct ModelArgs {
    /// nearest-centroid (nc), knn or linear.
    #[arg(long, value_parser = parse::<Backend>)]
    backend: Option<Backend>,
    #[arg(long, value_parser = parse::<Strategy>)]
    strategy: Option<Strategy>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic three-style corpus of page images.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        writers: Option<usize>,
        #[arg(long)]
        pages_per_style: Option<usize>,
        /// Style shift strength in [0, 1].
        #[arg(long)]
        severity: Option<f64>,
    },
    /// Binarize, thin and measure every image of a manifest.
    Preprocess {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Medium band half-width in standard deviations of speed.
        #[arg(long)]
        alpha_s: Option<f64>,
    },
    /// Compute a handcrafted feature family and write a feature file.
    Features {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Write one vector per patch instead of one per image.
        #[arg(long)]
        per_patch: bool,
    },
    /// Split pages into halves, add DropStroke variants and write samples.
    Augment {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fraction of character count used as the stroke drop budget.
        #[arg(long)]
        alpha_d: Option<f64>,
    },
    /// Train on some style sets and identify writers of a test set.
    Identify {
        #[arg(long)]
        manifest: PathBuf,
        /// Precomputed feature file; features are computed when absent.
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Training style (repeatable).
        #[arg(long = "train-style", value_parser = parse::<Style>)]
        train: Vec<Style>,
        #[arg(long = "test-style", value_parser = parse::<Style>)]
        test: Option<Style>,
        #[arg(long)]
        top_n: Option<usize>,
        /// Rescale ingested vectors to unit norm.
        #[arg(long)]
        unit_norm: bool,
    },
    /// Same-writer versus different-writer verification on page vectors.
    Verify {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = parse::<DistanceMeasure>)]
        measure: Option<DistanceMeasure>,
        #[arg(long, value_enum)]
        mode: Option<VerifyMode>,
    },
    /// Cluster page vectors; reports agreement with style when labels exist.
    Cluster {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = parse::<ClusterMethod>)]
        method: Option<ClusterMethod>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Cross-style evaluation: the nine-tuple and Borda ranking of models.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        nine_tuple: bool,
        /// Rank several models; implies the nine-tuple.
        #[arg(long)]
        borda: bool,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Extra corpus merged in before evaluation.
        #[arg(long)]
        pretrain_corpus: Option<PathBuf>,
    },
    /// Merge two manifests, prefixing colliding ids of the second.
    Merge {
        #[arg(num_args = 2, required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse<T: std::str::FromStr<Err = scriptrace::Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: scriptrace::Error| e.to_string())
}

impl PipelineArgs {
    fn apply(&self, cfg: &mut Config) {
        let p = &mut cfg.pipeline;
        if let Some(f) = self.family {
            p.family = f;
        }
        if let Some(n) = self.patches {
            p.patches_per_sample = n;
        }
        if let Some(m) = self.patch_mode {
            p.patch_mode = m;
        }
        if let Some(s) = self.patch_size {
            p.patch_size = s;
        }
    }
}

impl ModelArgs {
    fn apply(&self, cfg: &mut Config) {
        if let Some(b) = self.backend {
            cfg.pipeline.backend = b;
        }
        if let Some(s) = self.strategy {
            cfg.pipeline.strategy = s;
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Synth {
            out,
            writers,
            pages_per_style,
            severity,
        } => {
            cfg.synth.writers = writers.unwrap_or(cfg.synth.writers);
            cfg.synth.pages_per_style = pages_per_style.unwrap_or(cfg.synth.pages_per_style);
            cfg.synth.severity = severity.unwrap_or(cfg.synth.severity);
            cfg.resolve_seeds(cli.seed)?;
            commands::synth(&cfg, &out)
        }
        Command::Preprocess { manifest, out, alpha_s } => {
            cfg.preprocess.alpha_s = alpha_s.unwrap_or(cfg.preprocess.alpha_s);
            commands::preprocess(&cfg, &manifest, &out)
        }
        Command::Features {
            manifest,
            out,
            pipeline,
            per_patch,
        } => {
            pipeline.apply(&mut cfg);
            cfg.features.per_patch |= per_patch;
            cfg.resolve_seeds(cli.seed)?;
            commands::features(&cfg, &manifest, &out)
        }
        Command::Augment { manifest, out, alpha_d } => {
            cfg.augment.alpha_d = alpha_d.unwrap_or(cfg.augment.alpha_d);
            cfg.resolve_seeds(cli.seed)?;
            commands::augment(&cfg, &manifest, &out)
        }
        Command::Identify {
            manifest,
            features,
            out,
            pipeline,
            model,
            train,
            test,
            top_n,
            unit_norm,
        } => {
            pipeline.apply(&mut cfg);
            model.apply(&mut cfg);
            if !train.is_empty() {
                cfg.identify.train = train;
            }
            cfg.identify.test = test.unwrap_or(cfg.identify.test);
            cfg.identify.top_n = top_n.unwrap_or(cfg.identify.top_n);
            cfg.identify.unit_norm |= unit_norm;
            cfg.resolve_seeds(cli.seed)?;
            commands::identify(&cfg, &manifest, features.as_deref(), &out)
        }
        Command::Verify {
            features,
            manifest,
            out,
            measure,
            mode,
        } => {
            cfg.verify.measure = measure.unwrap_or(cfg.verify.measure);
            cfg.verify.mode = mode.unwrap_or(cfg.verify.mode);
            commands::verify(&cfg, &features, &manifest, &out)
        }
        Command::Cluster {
            features,
            manifest,
            out,
            method,
            k,
        } => {
            cfg.cluster.method = method.unwrap_or(cfg.cluster.method);
            cfg.cluster.k = k.unwrap_or(cfg.cluster.k);
            cfg.resolve_seeds(cli.seed)?;
            commands::cluster(&cfg, &features, manifest.as_deref(), &out)
        }
        Command::Eval {
            manifest,
            out,
            nine_tuple,
            borda,
            pipeline,
            model,
            pretrain_corpus,
        } => {
            pipeline.apply(&mut cfg);
            model.apply(&mut cfg);
            cfg.eval.nine_tuple |= nine_tuple;
            cfg.eval.borda |= borda;
            if pretrain_corpus.is_some() {
                cfg.eval.pretrain_corpus = pretrain_corpus;
            }
            cfg.resolve_seeds(cli.seed)?;
            commands::eval(&cfg, &manifest, &out)
        }
        Command::Merge { inputs, out } => commands::merge(&inputs[0], &inputs[1], &out),
    }
}
