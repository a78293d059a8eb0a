//! Integral histogram computation strategies.
//!
//! | Strategy | Passes | Parallel work items |
//! |----------|--------|---------------------|
//! | [`Strategy::Sequential`] | one fused pass, four-term recursion | none |
//! | [`Strategy::CrossWeave`] | row scans, barrier, column scans | bin x row, then bin x column band |
//! | [`Strategy::ScanTransposeScan`] | row scans, transpose, row scans, transpose | bin x row, transpose bands |
//! | [`Strategy::WavefrontTiled`] | one fused pass per tile | tiles on one anti-diagonal |
//!
//! Every strategy produces the same tensor bit for bit; the sequential one is
//! the reference the others are tested against.

mod crossweave;
mod sequential;
mod sts;
mod wavefront;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::histogram::{BinSpec, GrayImage, IntegralHistogram};

pub use crossweave::compute_crossweave;
pub use sequential::compute_sequential;
pub use sts::compute_sts;
pub use wavefront::{compute_wavefront, compute_wavefront_traced, TileEvent, TileEventKind};

pub const DEFAULT_TILE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Sequential,
    CrossWeave,
    ScanTransposeScan,
    WavefrontTiled { tile: usize },
}

impl Strategy {
    pub fn wavefront(tile: usize) -> Result<Self> {
        if tile == 0 {
            return Err(Error::Parameter("wavefront tile must be at least 1 pixel".into()));
        }
        Ok(Strategy::WavefrontTiled { tile })
    }

    /// Short name used on the command line and in benchmark output.
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Sequential => "sequential",
            Strategy::CrossWeave => "crossweave",
            Strategy::ScanTransposeScan => "sts",
            Strategy::WavefrontTiled { .. } => "wavefront",
        }
    }

    /// Tile side for the wavefront strategy, 0 otherwise.
    pub fn tile(&self) -> usize {
        match self {
            Strategy::WavefrontTiled { tile } => *tile,
            _ => 0,
        }
    }

    pub fn all(tile: usize) -> Result<[Strategy; 4]> {
        Ok([
            Strategy::Sequential,
            Strategy::CrossWeave,
            Strategy::ScanTransposeScan,
            Strategy::wavefront(tile)?,
        ])
    }
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::CrossWeave
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::WavefrontTiled { tile } => write!(f, "wavefront:{tile}"),
            other => f.write_str(other.name()),
        }
    }
}

/// Parses `sequential`, `crossweave`, `sts` (or `scan-transpose-scan`),
/// `wavefront` and `wavefront:<tile>`.
impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, tile) = match s.split_once(':') {
            Some((head, tile)) => {
                let tile = tile
                    .parse::<usize>()
                    .map_err(|_| Error::Parameter(format!("bad wavefront tile {tile:?}")))?;
                (head, Some(tile))
            }
            None => (s, None),
        };
        match (head.to_ascii_lowercase().as_str(), tile) {
            ("sequential" | "seq", None) => Ok(Strategy::Sequential),
            ("crossweave" | "cross-weave", None) => Ok(Strategy::CrossWeave),
            ("sts" | "scan-transpose-scan", None) => Ok(Strategy::ScanTransposeScan),
            ("wavefront", tile) => Strategy::wavefront(tile.unwrap_or(DEFAULT_TILE)),
            _ => Err(Error::Parameter(format!("unknown strategy {s:?}"))),
        }
    }
}

/// Computes the integral histogram of `img` with the chosen strategy.
pub fn compute(img: &GrayImage, spec: &BinSpec, strategy: Strategy) -> Result<IntegralHistogram> {
    match strategy {
        Strategy::Sequential => compute_sequential(img, spec),
        Strategy::CrossWeave => compute_crossweave(img, spec),
        Strategy::ScanTransposeScan => compute_sts(img, spec),
        Strategy::WavefrontTiled { tile } => compute_wavefront(img, spec, tile),
    }
}

/// Phase one shared by the scan-based strategies: every (bin, row) pair
/// becomes the running count of that bin's indicator along the row. The
/// indicator planes are never materialised.
pub(crate) fn binned_row_scans(img: &GrayImage, spec: &BinSpec) -> IntegralHistogram {
    use rayon::prelude::*;

    let (w, h) = (img.width(), img.height());
    let mut ih = IntegralHistogram::zeroed(w, h, spec.bins());
    let lut = spec.lut();
    ih.counts_mut()
        .par_chunks_mut(w)
        .enumerate()
        .for_each(|(item, out)| {
            let (b, r) = (item / h, item % h);
            let b = b as u8;
            let mut acc = 0u32;
            for (x, &p) in out.iter_mut().zip(img.row(r)) {
                acc += (lut[p as usize] == b) as u32;
                *x = acc;
            }
        });
    ih
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        assert_eq!("sequential".parse::<Strategy>().unwrap(), Strategy::Sequential);
        assert_eq!("crossweave".parse::<Strategy>().unwrap(), Strategy::CrossWeave);
        assert_eq!("sts".parse::<Strategy>().unwrap(), Strategy::ScanTransposeScan);
        assert_eq!(
            "wavefront".parse::<Strategy>().unwrap(),
            Strategy::WavefrontTiled { tile: DEFAULT_TILE }
        );
        assert_eq!(
            "wavefront:7".parse::<Strategy>().unwrap(),
            Strategy::WavefrontTiled { tile: 7 }
        );
        assert!("wavefront:0".parse::<Strategy>().is_err());
        assert!("sts:3".parse::<Strategy>().is_err());
        assert!("naive".parse::<Strategy>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in Strategy::all(9).unwrap() {
            assert_eq!(s.to_string().parse::<Strategy>().unwrap(), s);
        }
    }
}
