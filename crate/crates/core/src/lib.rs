//! Integral histograms of 8-bit grayscale images.
//!
//! An integral histogram stores, for every pixel `(r, c)` and bin `b`, how many
//! pixels in the rectangle `[0, r] x [0, c]` fall into bin `b`. Once built, the
//! histogram of any rectangle costs four reads per bin.
//!
//! The tensor can be built four ways (see [`strategy`]) that all yield the
//! same counts: a sequential propagation, cross-weave row/column scans,
//! scan-transpose-scan, and a wavefront over tiles. [`tiler`] builds it under
//! a memory budget by streaming strips. [`tracking`] turns region queries into
//! sliding-window likelihood maps, and [`bench`] times everything.
//!
//! ```
//! use inthist::{compute, region_histogram, BinSpec, GrayImage, Region, Strategy};
//!
//! let img = GrayImage::new(3, 2, vec![0, 10, 200, 250, 90, 130])?;
//! let spec = BinSpec::uniform(2)?;
//! let ih = compute(&img, &spec, Strategy::CrossWeave)?;
//! let h = region_histogram(&ih, &Region::new(0, 1, 1, 2)?)?;
//! assert_eq!(h.counts(), &[2, 2]);
//! # Ok::<(), inthist::Error>(())
//! ```

pub mod bench;
pub mod error;
pub mod histogram;
pub mod io;
pub mod parallel;
pub mod scan;
pub mod strategy;
pub mod tiler;
pub mod tracking;

pub use error::{Error, FormatError, Result};
pub use histogram::{
    bhattacharyya, intersection, map_intensity, normalize, region_histogram, Bhattacharyya, BinMode, BinSpec,
    GrayImage, Histogram, IntegralHistogram, NormalizedHistogram, Region,
};
pub use parallel::{max_workers, with_workers};
pub use strategy::{
    compute, compute_crossweave, compute_sequential, compute_sts, compute_wavefront, Strategy,
};
pub use tiler::{compute_streamed, plan_tiles, TilePlan};
pub use tracking::{best_match, likelihood_map, LikelihoodMap, Metric};
