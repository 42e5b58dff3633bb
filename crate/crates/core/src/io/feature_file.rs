//! JSON-lines feature files: the exchange format for handcrafted and
//! externally computed per-patch or per-page vectors.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::manifest::{read_jsonl, write_jsonl};
use crate::error::{Error, Result};
use crate::features::{Family, FeatureVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FeatureFileRecord {
    pub sample_id: String,
    pub patch_id: String,
    pub family: Family,
    pub dim: usize,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<(f64, f64)>,
}

impl From<&FeatureVector> for FeatureFileRecord {
    fn from(v: &FeatureVector) -> Self {
        Self {
            sample_id: v.sample_id.clone(),
            patch_id: v.patch_id.clone(),
            family: v.family,
            dim: v.values.len(),
            values: v.values.clone(),
            center: v.center,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions<'a> {
    /// Rescale every vector to unit Euclidean norm.
    pub unit_norm: bool,
    /// Known sample ids; records outside it are rejected.
    pub known_samples: Option<&'a BTreeSet<String>>,
}

pub fn export_features(path: &Path, vectors: &[FeatureVector]) -> Result<()> {
    let records: Vec<FeatureFileRecord> = vectors.iter().map(Into::into).collect();
    write_jsonl(path, &records)
}

pub fn ingest_features(path: &Path, opts: &IngestOptions<'_>) -> Result<Vec<FeatureVector>> {
    let records: Vec<FeatureFileRecord> = read_jsonl(path)?;
    let text = std::fs::read_to_string(path)?;
    // Record index to 1-based file line, skipping blanks as read_jsonl does.
    let lines: Vec<usize> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, _)| i + 1)
        .collect();
    let bad = |i: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line: lines[i],
        message,
    };
    let mut out = Vec::with_capacity(records.len());
    let mut shape: Option<(Family, usize)> = None;
    for (i, r) in records.into_iter().enumerate() {
        if r.values.len() != r.dim {
            return Err(bad(
                i,
                format!(
                    "record {}/{} declares dim {} but has {} values",
                    r.sample_id,
                    r.patch_id,
                    r.dim,
                    r.values.len()
                ),
            ));
        }
        match shape {
            None => shape = Some((r.family, r.dim)),
            Some((f, d)) if f != r.family || d != r.dim => {
                return Err(bad(
                    i,
                    format!(
                        "record {}/{} is {} dim {}, file started with {f} dim {d}",
                        r.sample_id, r.patch_id, r.family, r.dim
                    ),
                ))
            }
            Some(_) => {}
        }
        if let Some(known) = opts.known_samples {
            if !known.contains(&r.sample_id) {
                return Err(Error::UnknownSample(r.sample_id));
            }
        }
        let mut values = r.values;
        if opts.unit_norm {
            let n = values.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 0.0 {
                values.iter_mut().for_each(|v| *v /= n);
            }
        }
        out.push(FeatureVector {
            sample_id: r.sample_id,
            patch_id: r.patch_id,
            family: r.family,
            values,
            center: r.center,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, body: &str) -> std::path::PathBuf {
        let p = dir.join("f.jsonl");
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn dim_mismatch_names_line_and_record() {
        let dir = tempfile::tempdir().unwrap();
        let body = "{\"sampleId\":\"a\",\"patchId\":\"0\",\"family\":\"ingested\",\"dim\":2,\"values\":[1,2]}\n\n\
                    {\"sampleId\":\"b\",\"patchId\":\"3\",\"family\":\"ingested\",\"dim\":5,\"values\":[1,2,3,4]}\n";
        let p = write(dir.path(), body);
        let err = ingest_features(&p, &IngestOptions::default()).unwrap_err();
        match &err {
            Error::Parse { line, message, .. } => {
                assert_eq!(*line, 3);
                assert!(message.contains("b/3"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_sample_and_unit_norm() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "{\"sampleId\":\"a\",\"patchId\":\"page\",\"family\":\"ingested\",\"dim\":2,\"values\":[3,4]}\n",
        );
        let known: BTreeSet<String> = ["b".to_string()].into();
        let opts = IngestOptions {
            unit_norm: false,
            known_samples: Some(&known),
        };
        assert!(matches!(ingest_features(&p, &opts), Err(Error::UnknownSample(s)) if s == "a"));
        let opts = IngestOptions {
            unit_norm: true,
            known_samples: None,
        };
        assert_eq!(ingest_features(&p, &opts).unwrap()[0].values, vec![0.6, 0.8]);
    }
}
