//! Synthetic handwriting corpus.
//!
//! Every writer owns an alphabet of pseudo-glyphs built from cubic Bézier
//! strokes, plus a hand: slant, curvature gain, glyph size, aspect, pen
//! radius and letter spacing. A page's text and per-glyph jitter come from a
//! stream keyed on (writer, page index) only; the style set (slow, medium,
//! fast) adds a systematic distortion of the hand whose amplitude is
//! `severity` times a per-style level, and every page adds a smaller drift
//! of its own (the session it was written in). With severity 0 the three
//! style sets are therefore pixel-identical page by page.
//!
//! Each page also gets a simulated writing time, so that stroke length over
//! time reproduces a per-writer speed that is lower for slow pages and
//! higher for fast ones.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::manifest::{write_manifest, ManifestRecord};
use super::raster::save_gray;
use crate::augment::Half;
use crate::cluster::Style;
use crate::error::{Error, Result};
use crate::imaging::{binarize, thin, GrayImage};
use crate::seed;

const GLYPHS_PER_WRITER: usize = 6;
/// Amplitude of the per-page session drift, relative to severity.
const SESSION_LEVEL: f64 = 0.25;
/// Upper bound on strokes per glyph; jitter draws are sized for it so the
/// content stream is consumed identically whatever the style.
const MAX_STROKES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub writers: usize,
    pub pages_per_style: usize,
    pub severity: f64,
    pub seed: u64,
    pub width: usize,
    pub lines: usize,
    pub line_pitch: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            writers: 25,
            pages_per_style: 2,
            severity: 0.7,
            seed: 7,
            width: 480,
            lines: 4,
            line_pitch: 60,
        }
    }
}

impl SynthConfig {
    pub fn height(&self) -> usize {
        self.lines * self.line_pitch + 16
    }

    fn check(&self) -> Result<()> {
        if self.writers < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 writers, got {}",
                self.writers
            )));
        }
        if self.pages_per_style == 0 || self.lines == 0 {
            return Err(Error::InvalidArgument("pages and lines must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.severity) {
            return Err(Error::InvalidArgument(format!(
                "severity must be in [0, 1], got {}",
                self.severity
            )));
        }
        Ok(())
    }
}

fn style_level(s: Style) -> f64 {
    match s {
        Style::Slow => 0.0,
        Style::Medium => 0.3,
        Style::Fast => 0.5,
    }
}

fn speed_factor(s: Style) -> f64 {
    match s {
        Style::Slow => 0.6,
        Style::Medium => 1.0,
        Style::Fast => 1.6,
    }
}

type Pt = (f64, f64);
type Bezier = [Pt; 4];

fn bezier(b: &Bezier, t: f64) -> Pt {
    let u = 1.0 - t;
    let (w0, w1, w2, w3) = (u * u * u, 3.0 * u * u * t, 3.0 * u * t * t, t * t * t);
    (
        w0 * b[0].0 + w1 * b[1].0 + w2 * b[2].0 + w3 * b[3].0,
        w0 * b[0].1 + w1 * b[1].1 + w2 * b[2].1 + w3 * b[3].1,
    )
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Glyph strokes in a unit box, `x` right and `y` down.
#[derive(Debug, Clone)]
struct Glyph {
    strokes: Vec<Bezier>,
}

fn random_glyph(rng: &mut ChaCha8Rng) -> Glyph {
    let pt = |rng: &mut ChaCha8Rng| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
    let n = rng.gen_range(1..=MAX_STROKES);
    let mut strokes: Vec<Bezier> = Vec::with_capacity(n);
    for i in 0..n {
        let start = if i == 0 {
            pt(rng)
        } else {
            // Later strokes start on an earlier one so the glyph stays whole.
            let prev = &strokes[rng.gen_range(0..i)];
            bezier(prev, rng.gen_range(0.2..0.8))
        };
        let closed = i == 0 && rng.gen_bool(0.3);
        let end = if closed { start } else { pt(rng) };
        strokes.push([start, pt(rng), pt(rng), end]);
    }
    Glyph { strokes }
}

#[derive(Debug, Clone)]
struct Hand {
    alphabet: Vec<Glyph>,
    slant: f64,
    curvature: f64,
    size: f64,
    aspect: f64,
    radius: f64,
    spacing: f64,
    speed: f64,
}

fn writer_hand(base: u64, writer: usize) -> Hand {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(base, &format!("hand/{writer}")));
    Hand {
        alphabet: (0..GLYPHS_PER_WRITER).map(|_| random_glyph(&mut rng)).collect(),
        slant: rng.gen_range(-0.9..0.9),
        curvature: rng.gen_range(0.6..1.4),
        size: rng.gen_range(22.0..30.0),
        aspect: rng.gen_range(0.6..1.0),
        radius: rng.gen_range(0.8..2.5),
        spacing: rng.gen_range(2.0..6.0),
        speed: rng.gen_range(40.0..80.0),
    }
}

/// Systematic distortion of a hand for one style set.
#[derive(Debug, Clone)]
struct StyleShift {
    slant: f64,
    curvature: f64,
    aspect: f64,
    spacing: f64,
    jitter: f64,
    /// Control point offsets per glyph and stroke.
    offsets: Vec<Vec<[Pt; 4]>>,
}

fn draw_shift(rng: &mut ChaCha8Rng, a: f64, hand: &Hand) -> StyleShift {
    let slant = a * 0.3 * normal(rng);
    let curvature = (1.0 + a * 0.3 * normal(rng)).max(0.3);
    let aspect = (1.0 + a * 0.2 * normal(rng)).clamp(0.6, 1.4);
    let spacing = (1.0 + a * 0.3 * normal(rng)).max(0.3);
    let offsets = hand
        .alphabet
        .iter()
        .map(|gl| {
            gl.strokes
                .iter()
                .map(|_| {
                    let mut o = [(0.0, 0.0); 4];
                    for p in o.iter_mut() {
                        *p = (a * 0.12 * normal(rng), a * 0.12 * normal(rng));
                    }
                    o
                })
                .collect()
        })
        .collect();
    StyleShift {
        slant,
        curvature,
        aspect,
        spacing,
        jitter: a * 0.04,
        offsets,
    }
}

impl StyleShift {
    /// Applies `other` on top of `self`; jitter is kept from `self`.
    fn then(mut self, other: &StyleShift) -> Self {
        self.slant += other.slant;
        self.curvature *= other.curvature;
        self.aspect *= other.aspect;
        self.spacing *= other.spacing;
        for (a, b) in self.offsets.iter_mut().flatten().zip(other.offsets.iter().flatten()) {
            for (p, q) in a.iter_mut().zip(b) {
                p.0 += q.0;
                p.1 += q.1;
            }
        }
        self
    }
}

fn style_shift(base: u64, writer: usize, style: Style, hand: &Hand, severity: f64) -> StyleShift {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(base, &format!("style/{writer}/{style}")));
    draw_shift(&mut rng, severity * style_level(style), hand)
}

fn session_shift(base: u64, writer: usize, style: Style, page: usize, hand: &Hand, severity: f64) -> StyleShift {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(base, &format!("session/{writer}/{style}/{page}")));
    draw_shift(&mut rng, severity * SESSION_LEVEL, hand)
}

#[derive(Debug, Clone)]
struct GlyphInstance {
    glyph: usize,
    jitter: [[Pt; 4]; MAX_STROKES],
}

/// Page text: lines of words of glyph instances.
type PageText = Vec<Vec<Vec<GlyphInstance>>>;

fn page_text(base: u64, writer: usize, page: usize, lines: usize) -> PageText {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(base, &format!("text/{writer}/{page}")));
    (0..lines)
        .map(|_| {
            (0..8)
                .map(|_| {
                    let len = rng.gen_range(2..=5);
                    (0..len)
                        .map(|_| {
                            let glyph = rng.gen_range(0..GLYPHS_PER_WRITER);
                            let mut jitter = [[(0.0, 0.0); 4]; MAX_STROKES];
                            for s in jitter.iter_mut() {
                                for p in s.iter_mut() {
                                    *p = (normal(&mut rng), normal(&mut rng));
                                }
                            }
                            GlyphInstance { glyph, jitter }
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

struct Canvas {
    img: GrayImage,
}

impl Canvas {
    fn stamp(&mut self, (x, y): Pt, r: f64) {
        let (w, h) = (self.img.width() as f64, self.img.height() as f64);
        let (r0, r1) = ((y - r).floor().max(0.0), (y + r).ceil().min(h - 1.0));
        let (c0, c1) = ((x - r).floor().max(0.0), (x + r).ceil().min(w - 1.0));
        if r0 > r1 || c0 > c1 {
            return;
        }
        for row in r0 as usize..=r1 as usize {
            for col in c0 as usize..=c1 as usize {
                let (dy, dx) = (row as f64 - y, col as f64 - x);
                if dx * dx + dy * dy <= r * r + 0.25 {
                    self.img.set(row, col, 0);
                }
            }
        }
    }

    fn stroke(&mut self, b: &Bezier, r: f64) {
        let len: f64 = b
            .windows(2)
            .map(|w| ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt())
            .sum();
        let steps = (len / 0.3).ceil().max(1.0) as usize;
        for i in 0..=steps {
            self.stamp(bezier(b, i as f64 / steps as f64), r);
        }
    }
}

fn render_page(cfg: &SynthConfig, hand: &Hand, shift: &StyleShift, text: &PageText) -> GrayImage {
    let mut canvas = Canvas {
        img: GrayImage::filled(cfg.width, cfg.height(), 255),
    };
    let size = hand.size;
    let gw = size * hand.aspect * shift.aspect;
    let slant = hand.slant + shift.slant;
    let gap = hand.spacing * shift.spacing;
    let margin = 12.0;
    for (li, line) in text.iter().enumerate() {
        // Glyph bottoms sit on the baseline; the band is centered in the pitch.
        let baseline = 8.0 + li as f64 * cfg.line_pitch as f64 + (cfg.line_pitch as f64 + size) / 2.0;
        let mut x = margin + 2.0 * size * slant.abs();
        'words: for word in line {
            let word_w = word.len() as f64 * (gw + gap);
            if x + word_w + size * slant.abs() > cfg.width as f64 - margin {
                break 'words;
            }
            for inst in word {
                let glyph = &hand.alphabet[inst.glyph];
                for (si, stroke) in glyph.strokes.iter().enumerate() {
                    let chord = |t: f64| {
                        (
                            stroke[0].0 + t * (stroke[3].0 - stroke[0].0),
                            stroke[0].1 + t * (stroke[3].1 - stroke[0].1),
                        )
                    };
                    let mut b = *stroke;
                    for (k, t) in [(1usize, 1.0 / 3.0), (2, 2.0 / 3.0)] {
                        let c = chord(t);
                        let gain = hand.curvature * shift.curvature;
                        b[k] = (c.0 + gain * (b[k].0 - c.0), c.1 + gain * (b[k].1 - c.1));
                    }
                    let off = &shift.offsets[inst.glyph][si];
                    let jit = &inst.jitter[si];
                    let mut pts = [(0.0, 0.0); 4];
                    for k in 0..4 {
                        let u = (b[k].0 + off[k].0 + shift.jitter * jit[k].0).clamp(-0.1, 1.1);
                        let v = (b[k].1 + off[k].1 + shift.jitter * jit[k].1).clamp(-0.1, 1.1);
                        // Unit box to page: slant shears by height above baseline.
                        let y = baseline - (1.0 - v) * size;
                        pts[k] = (x + u * gw + slant * (baseline - y), y);
                    }
                    canvas.stroke(&pts, hand.radius);
                }
                x += gw + gap;
            }
            x += 0.5 * size + 2.0 * gap;
        }
    }
    canvas.img
}

/// One rendered page with its ground truth.
#[derive(Debug, Clone)]
pub struct SynthPage {
    pub page_id: String,
    pub writer_id: String,
    pub style: Style,
    pub page_index: usize,
    pub image: GrayImage,
    pub line_count: usize,
    pub stroke_length: usize,
    pub elapsed_seconds: f64,
}

pub fn writer_id(w: usize) -> String {
    format!("w{w:03}")
}

pub fn page_id(writer: usize, style: Style, page: usize) -> String {
    format!("{}-{}{}", writer_id(writer), style.letter(), page + 1)
}

/// Renders the whole corpus in memory, pages ordered by writer, style and
/// page index.
pub fn render_corpus(cfg: &SynthConfig) -> Result<Vec<SynthPage>> {
    cfg.check()?;
    let jobs: Vec<(usize, Style, usize)> = (0..cfg.writers)
        .flat_map(|w| Style::ALL.into_iter().flat_map(move |s| (0..cfg.pages_per_style).map(move |p| (w, s, p))))
        .collect();
    let hands: Vec<Hand> = (0..cfg.writers).map(|w| writer_hand(cfg.seed, w)).collect();
    Ok(jobs
        .par_iter()
        .map(|&(w, style, p)| {
            let hand = &hands[w];
            let shift = style_shift(cfg.seed, w, style, hand, cfg.severity)
                .then(&session_shift(cfg.seed, w, style, p, hand, cfg.severity));
            let text = page_text(cfg.seed, w, p, cfg.lines);
            let image = render_page(cfg, hand, &shift, &text);
            let stroke_length = thin(&binarize(&image).0).stroke_length_px;
            let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(cfg.seed, &format!("time/{w}/{style}/{p}")));
            let speed = hand.speed * speed_factor(style) * (1.0 + 0.02 * normal(&mut rng));
            SynthPage {
                page_id: page_id(w, style, p),
                writer_id: writer_id(w),
                style,
                page_index: p,
                line_count: text.len(),
                elapsed_seconds: stroke_length as f64 / speed,
                stroke_length,
                image,
            }
        })
        .collect())
}

/// Writes `pages/<id>.png` and `manifest.jsonl` under `dir` and returns the
/// page records.
pub fn synth_corpus(dir: &Path, cfg: &SynthConfig) -> Result<Vec<ManifestRecord>> {
    let pages = render_corpus(cfg)?;
    std::fs::create_dir_all(dir.join("pages"))?;
    pages
        .par_iter()
        .try_for_each(|p| save_gray(&dir.join("pages").join(format!("{}.png", p.page_id)), &p.image))?;
    let records: Vec<ManifestRecord> = pages
        .iter()
        .map(|p| ManifestRecord {
            sample_id: p.page_id.clone(),
            writer_id: p.writer_id.clone(),
            style: p.style,
            split: None,
            parent_page_id: p.page_id.clone(),
            half: Half::Full,
            variant_index: 0,
            image_path: format!("pages/{}.png", p.page_id),
            elapsed_seconds: Some(p.elapsed_seconds),
        })
        .collect();
    write_manifest(&dir.join("manifest.jsonl"), &records)?;
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig {
            writers: 3,
            pages_per_style: 1,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn severity_zero_gives_identical_style_sets() {
        let cfg = SynthConfig {
            severity: 0.0,
            ..small()
        };
        let pages = render_corpus(&cfg).unwrap();
        for w in pages.chunks(3) {
            assert_eq!(w[0].image, w[1].image);
            assert_eq!(w[1].image, w[2].image);
        }
    }

    #[test]
    fn styles_differ_with_severity() {
        let pages = render_corpus(&small()).unwrap();
        assert_ne!(pages[0].image, pages[2].image);
        assert!(pages[0].elapsed_seconds > pages[2].elapsed_seconds * 1.5);
    }

    #[test]
    fn rejects_single_writer() {
        let cfg = SynthConfig {
            writers: 1,
            ..small()
        };
        assert!(render_corpus(&cfg).is_err());
    }
}
