//! JSON-lines corpus manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::augment::{split211, Half, SampleTag};
use crate::cluster::Style;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Val,
    Test,
}

impl std::fmt::Display for SplitName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SplitName::Train => "train",
            SplitName::Val => "val",
            SplitName::Test => "test",
        })
    }
}

/// One page or sample. Page records (as written by the generator) carry
/// `half = full` and no split; sample records carry both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ManifestRecord {
    pub sample_id: String,
    pub writer_id: String,
    pub style: Style,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitName>,
    pub parent_page_id: String,
    pub half: Half,
    pub variant_index: u32,
    /// Relative to the manifest's directory unless absolute.
    pub image_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

impl ManifestRecord {
    pub fn resolve_image(&self, manifest: &Path) -> PathBuf {
        let p = Path::new(&self.image_path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            manifest.parent().unwrap_or(Path::new(".")).join(p)
        }
    }
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads JSON lines, skipping blank lines. Errors carry the 1-based line.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn write_manifest(path: &Path, records: &[ManifestRecord]) -> Result<()> {
    write_jsonl(path, records)
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>> {
    let records: Vec<ManifestRecord> = read_jsonl(path)?;
    validate(&records)?;
    Ok(records)
}

/// Checks unique sample ids and, for sample records, that the split agrees
/// with the 2:1:1 division of each writer's pages.
pub fn validate(records: &[ManifestRecord]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for r in records {
        if !seen.insert(r.sample_id.as_str()) {
            return Err(Error::InvalidArgument(format!("duplicate sample id {}", r.sample_id)));
        }
    }
    let mut groups: BTreeMap<(&str, Style), BTreeMap<&str, Vec<&ManifestRecord>>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.split.is_some()) {
        groups
            .entry((r.writer_id.as_str(), r.style))
            .or_default()
            .entry(r.parent_page_id.as_str())
            .or_default()
            .push(r);
    }
    for ((writer, style), pages) in groups {
        let tags: Vec<Vec<SampleTag>> = pages
            .values()
            .map(|recs| {
                recs.iter()
                    .map(|r| SampleTag {
                        sample_id: r.sample_id.clone(),
                        half: r.half,
                        variant_index: r.variant_index,
                    })
                    .collect()
            })
            .collect();
        let split = split211(&format!("{writer}/{style}"), &tags)?;
        let expected: BTreeMap<&str, SplitName> = split
            .train
            .iter()
            .map(|s| (s.as_str(), SplitName::Train))
            .chain(split.validation.iter().map(|s| (s.as_str(), SplitName::Val)))
            .chain(split.test.iter().map(|s| (s.as_str(), SplitName::Test)))
            .collect();
        for r in pages.values().flatten() {
            if Some(expected[r.sample_id.as_str()]) != r.split {
                return Err(Error::InvalidArgument(format!(
                    "sample {} is marked {:?} but the split assigns {}",
                    r.sample_id,
                    r.split,
                    expected[r.sample_id.as_str()]
                )));
            }
        }
    }
    Ok(())
}

/// Empty when the id spaces of `b` and `a` are disjoint, otherwise the
/// first prefix `c2-`, `c3-`, ... that makes them so.
pub fn collision_prefix<'a>(
    a_writers: impl Iterator<Item = &'a str>,
    a_ids: impl Iterator<Item = &'a str>,
    b_writers: impl Iterator<Item = &'a str> + Clone,
    b_ids: impl Iterator<Item = &'a str> + Clone,
) -> String {
    let writers: BTreeSet<&str> = a_writers.collect();
    let ids: BTreeSet<&str> = a_ids.collect();
    let collides = |prefix: &str| {
        b_writers.clone().any(|w| writers.contains(format!("{prefix}{w}").as_str()))
            || b_ids.clone().any(|s| ids.contains(format!("{prefix}{s}").as_str()))
    };
    let mut prefix = String::new();
    let mut n = 1;
    while collides(&prefix) {
        n += 1;
        prefix = format!("c{n}-");
    }
    prefix
}

/// Concatenates two manifests, prefixing the writer, sample and page ids of
/// `b` when they collide with `a`. Image paths are kept as given.
pub fn merge_manifests(a: &[ManifestRecord], b: &[ManifestRecord]) -> Result<Vec<ManifestRecord>> {
    let prefix = collision_prefix(
        a.iter().map(|r| r.writer_id.as_str()),
        a.iter().map(|r| r.sample_id.as_str()),
        b.iter().map(|r| r.writer_id.as_str()),
        b.iter().map(|r| r.sample_id.as_str()),
    );
    let mut out = a.to_vec();
    out.extend(b.iter().map(|r| ManifestRecord {
        sample_id: format!("{prefix}{}", r.sample_id),
        writer_id: format!("{prefix}{}", r.writer_id),
        parent_page_id: format!("{prefix}{}", r.parent_page_id),
        ..r.clone()
    }));
    validate(&out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str) -> ManifestRecord {
        ManifestRecord {
            sample_id: id.into(),
            writer_id: "w1".into(),
            style: Style::Fast,
            split: None,
            parent_page_id: id.into(),
            half: Half::Full,
            variant_index: 0,
            image_path: format!("pages/{id}.png"),
            elapsed_seconds: Some(12.5),
        }
    }

    #[test]
    fn round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        let mut recs = vec![rec("a"), rec("b")];
        recs[1].elapsed_seconds = None;
        write_manifest(&path, &recs).unwrap();
        assert_eq!(read_manifest(&path).unwrap(), recs);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"sampleId\":\"a\""));
        assert!(text.contains("\"elapsedSeconds\":12.5"));
    }

    #[test]
    fn merging_with_itself_doubles_the_roster() {
        let a = vec![rec("a"), rec("b")];
        let m = merge_manifests(&a, &a).unwrap();
        let writers: BTreeSet<&str> = m.iter().map(|r| r.writer_id.as_str()).collect();
        assert_eq!(writers.len(), 2);
        assert_eq!(m[2].sample_id, "c2-a");
    }

    #[test]
    fn duplicates_are_rejected() {
        assert!(validate(&[rec("a"), rec("a")]).is_err());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        std::fs::write(&path, format!("{}\n{{oops\n", serde_json::to_string(&rec("a")).unwrap())).unwrap();
        match read_manifest(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
