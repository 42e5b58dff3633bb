//! Run configuration. Every command-line flag has a field here; flags given
//! on the command line win over the file, and `SCRIPTRACE_SEED` wins over
//! both for every seed.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use scriptrace::augment::AugmentConfig;
use scriptrace::cluster::{ClusterMethod, Style};
use scriptrace::eval::PipelineConfig;
use scriptrace::io::SynthConfig;
use scriptrace::segmentation::SegmentConfig;
use scriptrace::verify::DistanceMeasure;

pub const SEED_ENV: &str = "SCRIPTRACE_SEED";

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Applied to every seeded stage when set.
    pub seed: Option<u64>,
    pub synth: SynthConfig,
    pub segment: SegmentConfig,
    pub augment: AugmentConfig,
    pub pipeline: PipelineConfig,
    pub preprocess: PreprocessSection,
    pub features: FeaturesSection,
    pub identify: IdentifySection,
    pub verify: VerifySection,
    pub cluster: ClusterSection,
    pub eval: EvalSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    /// Width of the medium band in standard deviations.
    pub alpha_s: f64,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        Self { alpha_s: 1.0 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturesSection {
    /// One vector per patch instead of one per page.
    pub per_patch: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentifySection {
    /// Training style sets; the test style alone when empty.
    pub train: Vec<Style>,
    pub test: Style,
    pub top_n: usize,
    pub unit_norm: bool,
}

impl Default for IdentifySection {
    fn default() -> Self {
        Self {
            train: Vec::new(),
            test: Style::Medium,
            top_n: 5,
            unit_norm: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    Eer,
    Sweep,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub measure: DistanceMeasure,
    pub mode: VerifyMode,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            measure: DistanceMeasure::ChiSquare,
            mode: VerifyMode::Eer,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSection {
    pub method: ClusterMethod,
    pub k: usize,
    pub seed: u64,
}

impl Default for ClusterSection {
    fn default() -> Self {
        Self {
            method: ClusterMethod::Kmeans,
            k: 3,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    #[serde(default)]
    pub pipeline: PipelineConfig,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub nine_tuple: bool,
    pub borda: bool,
    /// Explicit model list; when empty the models come from the pipeline
    /// section (three backends under `borda`, one otherwise).
    pub models: Vec<ModelSpec>,
    /// A second manifest merged into the corpus before evaluation.
    pub pretrain_corpus: Option<PathBuf>,
}

impl Config {
    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        } else {
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        };
        Ok(cfg)
    }

    /// Sets every seed from, in order of precedence, the environment, the
    /// `--seed` flag and the file's top-level `seed`.
    pub fn resolve_seeds(&mut self, flag: Option<u64>) -> Result<()> {
        let env = match std::env::var(SEED_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<u64>()
                    .with_context(|| format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))?,
            ),
            Err(std::env::VarError::NotPresent) => None,
            Err(e) => bail!("{SEED_ENV}: {e}"),
        };
        if let Some(seed) = env.or(flag).or(self.seed) {
            self.seed = Some(seed);
            self.synth.seed = seed;
            self.augment.seed = seed;
            self.pipeline.seed = seed;
            self.cluster.seed = seed;
            for m in &mut self.eval.models {
                m.pipeline.seed = seed;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_sections_fill_defaults() {
        let cfg: Config = toml::from_str(
            "seed = 3\n[synth]\nwriters = 5\n[pipeline]\nfamily = \"fdc\"\n[verify]\nmeasure = \"minkowski2\"\n",
        )
        .unwrap();
        assert_eq!(cfg.synth.writers, 5);
        assert_eq!(cfg.synth.lines, SynthConfig::default().lines);
        assert_eq!(cfg.verify.measure, DistanceMeasure::Minkowski(2));
        assert_eq!(cfg.identify.top_n, 5);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Config>("[cluster]\nkk = 2\n").is_err());
    }
}
