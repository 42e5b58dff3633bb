//! On-disk formats and the synthetic corpus generator.

pub mod feature_file;
pub mod manifest;
pub mod raster;
pub mod synth;

pub use feature_file::{export_features, ingest_features, FeatureFileRecord, IngestOptions};
pub use manifest::{
    merge_manifests, read_jsonl, read_manifest, write_jsonl, write_manifest, ManifestRecord, SplitName,
};
pub use raster::{load_gray, patch_grid, save_binary, save_gray};
pub use synth::{render_corpus, synth_corpus, SynthConfig, SynthPage};
