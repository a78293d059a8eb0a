use rayon::prelude::*;

use super::binned_row_scans;
use crate::error::Result;
use crate::histogram::{BinSpec, GrayImage, IntegralHistogram};
use crate::scan::{scan_rows_in_place, transpose_into, DEFAULT_TRANSPOSE_TILE};

/// Row scans, transpose, row scans, transpose back. Both scan passes walk
/// memory row-contiguously; the column direction is handled by the transposes.
pub fn compute_sts(img: &GrayImage, spec: &BinSpec) -> Result<IntegralHistogram> {
    img.check_capacity()?;
    let (w, h) = (img.width(), img.height());
    let mut ih = binned_row_scans(img, spec);
    ih.counts_mut().par_chunks_mut(w * h).for_each_init(
        || vec![0u32; w * h],
        |scratch, plane| {
            transpose_into(plane, h, w, scratch, DEFAULT_TRANSPOSE_TILE);
            scan_rows_in_place(scratch, h);
            transpose_into(scratch, w, h, plane, DEFAULT_TRANSPOSE_TILE);
        },
    );
    Ok(ih)
}
