use rayon::prelude::*;

use super::binned_row_scans;
use crate::error::Result;
use crate::histogram::{BinSpec, GrayImage, IntegralHistogram};
use crate::scan::scan_cols_in_place;

/// Horizontal cumulative sums over every (bin, row), a full barrier, then
/// vertical cumulative sums over every (bin, column band).
pub fn compute_crossweave(img: &GrayImage, spec: &BinSpec) -> Result<IntegralHistogram> {
    img.check_capacity()?;
    let (w, h) = (img.width(), img.height());
    let mut ih = binned_row_scans(img, spec);
    ih.counts_mut()
        .par_chunks_mut(w * h)
        .for_each(|plane| scan_cols_in_place(plane, h, w));
    Ok(ih)
}
