//! Handcrafted feature families and the shared feature-vector record.
//!
//! * `fdh`: contour direction (12 bins of 15 degrees) and contour hinge
//!   (300 unordered leg-angle pairs), 312 values.
//! * `fdc`: keypoint writing direction and curvature, four 200-bin
//!   histograms over `[-1, 1]`, 800 values.
//! * `fmm`: 16 macro page ratios followed by a 512-bin per-character
//!   gradient/structural/concavity bit histogram, 528 values.
//!
//! Angles use `x` = column and `y` pointing up the page.

mod direction;
mod keypoint;
mod macro_micro;

pub use direction::{contour_direction_hist, contour_hinge_hist, extract_fdh, hinge_bin};
pub use keypoint::{
    curvature_triples, direction_pairs, extract_fdc, value_bin, CurvatureTriple, DirectionPair,
};
pub use macro_micro::{extract_fmm, macro_features, micro_histogram, GSC_BITS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::StrokeStats;
use crate::page::PageAnalysis;

pub const DH_BINS: usize = 12;
pub const HINGE_DIM: usize = DH_BINS * (2 * DH_BINS + 1);
pub const FDH_DIM: usize = DH_BINS + HINGE_DIM;
pub const DC_BINS: usize = 200;
pub const FDC_DIM: usize = 4 * DC_BINS;
pub const MACRO_DIM: usize = 16;
pub const FMM_DIM: usize = MACRO_DIM + GSC_BITS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Fmm,
    Fdh,
    Fdc,
    Ingested,
}

impl Family {
    /// Fixed dimension of a handcrafted family.
    pub fn dim(self) -> Option<usize> {
        match self {
            Family::Fmm => Some(FMM_DIM),
            Family::Fdh => Some(FDH_DIM),
            Family::Fdc => Some(FDC_DIM),
            Family::Ingested => None,
        }
    }

    /// Sizes of the normalized histogram blocks, in order. The macro block of
    /// F_MM and its micro histogram are ratios, not distributions.
    pub fn histogram_blocks(self) -> &'static [usize] {
        match self {
            Family::Fdh => &[DH_BINS, HINGE_DIM],
            Family::Fdc => &[DC_BINS; 4],
            Family::Fmm | Family::Ingested => &[],
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fmm" => Ok(Family::Fmm),
            "fdh" => Ok(Family::Fdh),
            "fdc" => Ok(Family::Fdc),
            "ingested" => Ok(Family::Ingested),
            other => Err(Error::InvalidArgument(format!("unknown feature family {other:?}"))),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Fmm => "fmm",
            Family::Fdh => "fdh",
            Family::Fdc => "fdc",
            Family::Ingested => "ingested",
        })
    }
}

/// Patch id used for whole-sample vectors.
pub const PAGE_PATCH: &str = "page";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub sample_id: String,
    /// `"page"` for whole-sample vectors.
    pub patch_id: String,
    pub family: Family,
    pub values: Vec<f64>,
    /// Patch center `(row, col)` when the vector describes a patch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<(f64, f64)>,
}

impl FeatureVector {
    pub fn page(sample_id: impl Into<String>, family: Family, values: Vec<f64>) -> Self {
        Self {
            sample_id: sample_id.into(),
            patch_id: PAGE_PATCH.to_string(),
            family,
            values,
            center: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionConfig {
    pub epsilon: usize,
    pub bins_dh: usize,
    pub bins_dc: usize,
}

impl DirectionConfig {
    pub fn new(epsilon: usize) -> Result<Self> {
        if epsilon < 2 {
            return Err(Error::InvalidArgument(format!("epsilon must be >= 2, got {epsilon}")));
        }
        Ok(Self {
            epsilon,
            bins_dh: DH_BINS,
            bins_dc: DC_BINS,
        })
    }
}

/// Contour leg length `max(2, floor(mu_sw - sigma_sw))`.
pub fn compute_epsilon(stats: &StrokeStats) -> usize {
    let e = (stats.mean_width - stats.std_width).floor();
    if e < 2.0 {
        2
    } else {
        e as usize
    }
}

/// Scales `block` to sum 1; leaves an all-zero block alone.
pub(crate) fn normalize(block: &mut [f64]) {
    let s: f64 = block.iter().sum();
    if s > 0.0 {
        block.iter_mut().for_each(|v| *v /= s);
    }
}

/// Computes one handcrafted family on an analyzed page.
pub fn extract(family: Family, page: &PageAnalysis) -> Result<Vec<f64>> {
    let eps = page.stats.as_ref().map(compute_epsilon).unwrap_or(2);
    match family {
        Family::Fdh => Ok(extract_fdh(&page.contours, eps)),
        Family::Fdc => Ok(extract_fdc(&page.graph)),
        Family::Fmm => Ok(extract_fmm(page)),
        Family::Ingested => Err(Error::InvalidArgument(
            "ingested features are read from a feature file, not extracted".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_formula() {
        let s = |m, d| StrokeStats {
            mean_width: m,
            std_width: d,
        };
        assert_eq!(compute_epsilon(&s(7.8, 2.1)), 5);
        assert_eq!(compute_epsilon(&s(2.0, 3.0)), 2);
        assert_eq!(compute_epsilon(&s(5.0, 0.0)), 5);
    }

    #[test]
    fn dimension_contracts() {
        assert_eq!(HINGE_DIM, 300);
        assert_eq!(FDH_DIM, 312);
        assert_eq!(FDC_DIM, 800);
        assert_eq!(FMM_DIM, 528);
    }

    #[test]
    fn family_round_trips_through_text() {
        for f in [Family::Fmm, Family::Fdh, Family::Fdc, Family::Ingested] {
            assert_eq!(f.to_string().parse::<Family>().unwrap(), f);
        }
        assert!("sift".parse::<Family>().is_err());
    }
}
