//! One-call preprocessing of a page into every artifact the feature
//! extractors and augmentation need.

use crate::imaging::{
    binarize, build_stroke_graph, detect_keypoints, prune_spurs, stroke_width_stats, thin,
    trace_contours, BinaryImage, Contour, GrayImage, Keypoint, Skeleton, StrokeGraph,
    StrokeStats,
};
use crate::segmentation::{segment_page, SegmentConfig, Segmentation};

#[derive(Debug, Clone)]
pub struct PageAnalysis {
    pub gray: GrayImage,
    pub binary: BinaryImage,
    pub threshold: u8,
    /// `None` on a blank page.
    pub stats: Option<StrokeStats>,
    /// Pruned skeleton.
    pub skeleton: Skeleton,
    pub contours: Vec<Contour>,
    pub keypoints: Vec<Keypoint>,
    pub graph: StrokeGraph,
    pub segmentation: Segmentation,
}

impl PageAnalysis {
    pub fn analyze(gray: &GrayImage, seg: &SegmentConfig) -> Self {
        let (binary, threshold) = binarize(gray);
        Self::from_parts(gray.clone(), binary, threshold, seg)
    }

    /// Analysis of an already binarized raster (patches, augmented pages).
    pub fn analyze_binary(binary: &BinaryImage, seg: &SegmentConfig) -> Self {
        Self::from_parts(binary.to_gray(), binary.clone(), 128, seg)
    }

    fn from_parts(gray: GrayImage, binary: BinaryImage, threshold: u8, seg: &SegmentConfig) -> Self {
        let raw = thin(&binary);
        let stats = stroke_width_stats(&binary, &raw).ok();
        let skeleton = match &stats {
            Some(s) => prune_spurs(&raw, s),
            None => raw,
        };
        let keypoints = detect_keypoints(&skeleton);
        let graph = build_stroke_graph(&skeleton, &keypoints);
        let contours = trace_contours(&binary);
        let segmentation = segment_page(&binary, seg);
        Self {
            gray,
            binary,
            threshold,
            stats,
            skeleton,
            contours,
            keypoints,
            graph,
            segmentation,
        }
    }
}
