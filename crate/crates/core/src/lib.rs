//! Offline writer identification and verification from handwriting scans.
//!
//! The pipeline runs from page rasters through preprocessing ([`imaging`],
//! [`segmentation`]), handcrafted features ([`features`]) and patch
//! extraction ([`patches`]) to page-level identification ([`identify`]),
//! pairwise verification ([`verify`]), style clustering ([`cluster`]) and the
//! cross-style evaluation grid ([`eval`]). [`io`] holds the on-disk formats
//! and the synthetic corpus generator.

pub mod augment;
pub mod cluster;
pub mod error;
pub mod eval;
pub mod features;
pub mod identify;
pub mod imaging;
pub mod io;
pub mod page;
pub mod patches;
pub mod seed;
pub mod segmentation;
pub mod verify;

pub use error::{Error, Result};
