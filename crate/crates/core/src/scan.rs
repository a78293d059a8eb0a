//! Prefix sums over `u32` sequences and planes.
//!
//! Every strategy is assembled from these pieces: flat and blocked 1D scans,
//! independent row scans, column scans and a cache-blocked transpose. All
//! arithmetic is exact integer addition, so the grouping chosen by the
//! parallel paths never changes a result.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::parallel::SharedSlice;

pub const DEFAULT_BLOCK: usize = 256;
pub const DEFAULT_TRANSPOSE_TILE: usize = 64;

/// Columns handled by one work item of the parallel column scan.
const COL_BAND: usize = 256;

/// A row-major `rows x cols` grid of counts: one bin slice of the tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl Plane {
    pub fn new(rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        let expected = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Capacity(format!("plane {rows}x{cols} overflows")))?;
        if data.len() != expected {
            return Err(Error::Parameter(format!(
                "plane data has {} entries, expected {expected}",
                data.len()
            )));
        }
        Ok(Plane { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: u32) -> Self {
        Plane {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u32> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }
}

/// `out[i] = in[0] + ... + in[i]`.
pub fn inclusive_scan(seq: &[u32]) -> Result<Vec<u32>> {
    let mut out = Vec::with_capacity(seq.len());
    let mut acc = 0u32;
    for &x in seq {
        acc = acc.checked_add(x).ok_or(Error::Overflow)?;
        out.push(acc);
    }
    Ok(out)
}

/// `out[i] = in[0] + ... + in[i - 1]`, with `out[0] = 0`.
pub fn exclusive_scan(seq: &[u32]) -> Result<Vec<u32>> {
    let mut out = Vec::with_capacity(seq.len());
    let mut acc = 0u32;
    for &x in seq {
        out.push(acc);
        acc = acc.checked_add(x).ok_or(Error::Overflow)?;
    }
    Ok(out)
}

/// Inclusive scan organised as three phases: scan each block independently,
/// exclusive-scan the block totals, then add each block's offset to its
/// elements. Output is identical to [`inclusive_scan`].
pub fn blocked_scan(seq: &[u32], block: usize) -> Result<Vec<u32>> {
    if block == 0 {
        return Err(Error::Parameter("scan block length must be at least 1".into()));
    }
    let mut out = seq.to_vec();

    let totals = out
        .par_chunks_mut(block)
        .map(|chunk| {
            let mut acc = 0u32;
            for x in chunk.iter_mut() {
                acc = acc.checked_add(*x).ok_or(Error::Overflow)?;
                *x = acc;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<u32>>>()?;

    let offsets = exclusive_scan(&totals)?;
    // The last offset plus the last block total is the grand total; checking
    // it here catches the only overflow the uniform add could hit.
    if let (Some(&o), Some(&t)) = (offsets.last(), totals.last()) {
        o.checked_add(t).ok_or(Error::Overflow)?;
    }

    out.par_chunks_mut(block)
        .zip(offsets.par_iter())
        .for_each(|(chunk, &offset)| {
            if offset != 0 {
                for x in chunk.iter_mut() {
                    *x += offset;
                }
            }
        });
    Ok(out)
}

/// Replaces every row with its inclusive scan.
pub fn scan_rows(p: &Plane) -> Plane {
    let mut data = p.data.clone();
    scan_rows_in_place(&mut data, p.cols);
    Plane {
        rows: p.rows,
        cols: p.cols,
        data,
    }
}

/// Replaces every column with its inclusive scan.
pub fn scan_cols(p: &Plane) -> Plane {
    let mut data = p.data.clone();
    scan_cols_in_place(&mut data, p.rows, p.cols);
    Plane {
        rows: p.rows,
        cols: p.cols,
        data,
    }
}

pub fn transpose(p: &Plane) -> Plane {
    let mut data = vec![0u32; p.data.len()];
    transpose_into(&p.data, p.rows, p.cols, &mut data, DEFAULT_TRANSPOSE_TILE);
    Plane {
        rows: p.cols,
        cols: p.rows,
        data,
    }
}

/// In-place inclusive scan. Callers guarantee the total fits in `u32`.
#[inline]
pub(crate) fn scan_in_place(row: &mut [u32]) {
    let mut acc = 0u32;
    for x in row.iter_mut() {
        acc += *x;
        *x = acc;
    }
}

pub(crate) fn scan_rows_in_place(data: &mut [u32], cols: usize) {
    if cols == 0 {
        return;
    }
    data.par_chunks_mut(cols).for_each(scan_in_place);
}

/// Column scan done as a running row-to-row add, parallel over bands of
/// columns so each work item walks contiguous memory.
pub(crate) fn scan_cols_in_place(data: &mut [u32], rows: usize, cols: usize) {
    if rows <= 1 || cols == 0 {
        return;
    }
    let shared = SharedSlice::new(data);
    let bands = cols.div_ceil(COL_BAND);
    (0..bands).into_par_iter().for_each(|band| {
        let c0 = band * COL_BAND;
        let width = COL_BAND.min(cols - c0);
        for r in 1..rows {
            // SAFETY: this task owns columns [c0, c0 + width) in every row;
            // rows r - 1 and r are distinct ranges.
            let (prev, cur) = unsafe {
                (
                    shared.slice((r - 1) * cols + c0, width),
                    shared.slice_mut(r * cols + c0, width),
                )
            };
            for (x, &above) in cur.iter_mut().zip(prev) {
                *x += above;
            }
        }
    });
}

/// Writes the transpose of the `rows x cols` grid `src` into `dst`, walking
/// `tile x tile` blocks. Parallel over bands of destination rows.
pub(crate) fn transpose_into(src: &[u32], rows: usize, cols: usize, dst: &mut [u32], tile: usize) {
    debug_assert_eq!(src.len(), rows * cols);
    debug_assert_eq!(dst.len(), rows * cols);
    if rows == 0 || cols == 0 {
        return;
    }
    let tile = tile.max(1);
    // dst is cols x rows; a band is `tile` consecutive dst rows (src columns).
    dst.par_chunks_mut(tile * rows)
        .enumerate()
        .for_each(|(band, out)| {
            let j0 = band * tile;
            let band_rows = out.len() / rows;
            for i0 in (0..rows).step_by(tile) {
                let i1 = (i0 + tile).min(rows);
                for dj in 0..band_rows {
                    let j = j0 + dj;
                    let out_row = &mut out[dj * rows..(dj + 1) * rows];
                    for i in i0..i1 {
                        out_row[i] = src[i * cols + j];
                    }
                }
            }
        });
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(seq: &[u32]) -> Vec<u32> {
        let mut out = vec![0; seq.len()];
        for i in 0..seq.len() {
            out[i] = seq[..=i].iter().sum();
        }
        out
    }

    fn plane(rows: usize, cols: usize, v: &[u32]) -> Plane {
        Plane::new(rows, cols, v.to_vec()).unwrap()
    }

    #[test]
    fn inclusive_examples() {
        assert_eq!(inclusive_scan(&[]).unwrap(), Vec::<u32>::new());
        assert_eq!(inclusive_scan(&[1, 1, 1, 1]).unwrap(), vec![1, 2, 3, 4]);
        let x = [3, 1, 7, 0, 4, 1, 6, 3];
        assert_eq!(inclusive_scan(&x).unwrap(), naive(&x));
        assert_eq!(inclusive_scan(&x).unwrap(), vec![3, 4, 11, 11, 15, 16, 22, 25]);
    }

    #[test]
    fn exclusive_examples() {
        assert_eq!(exclusive_scan(&[]).unwrap(), Vec::<u32>::new());
        assert_eq!(exclusive_scan(&[3, 1, 7, 0]).unwrap(), vec![0, 3, 4, 11]);
    }

    #[test]
    fn overflow_is_reported() {
        let x = [u32::MAX, 1];
        assert!(matches!(inclusive_scan(&x), Err(Error::Overflow)));
        assert!(matches!(exclusive_scan(&[u32::MAX, 1, 0]), Err(Error::Overflow)));
        for block in [1, 2, 3] {
            assert!(matches!(blocked_scan(&x, block), Err(Error::Overflow)));
        }
        assert_eq!(blocked_scan(&[u32::MAX, 0], 1).unwrap(), vec![u32::MAX; 2]);
    }

    #[test]
    fn blocked_examples() {
        let x = [3, 1, 7, 0, 4, 1, 6, 3];
        assert_eq!(blocked_scan(&x, 3).unwrap(), vec![3, 4, 11, 11, 15, 16, 22, 25]);
        assert_eq!(blocked_scan(&x, 1).unwrap(), inclusive_scan(&x).unwrap());
        assert_eq!(blocked_scan(&x, 100).unwrap(), inclusive_scan(&x).unwrap());
        assert!(matches!(blocked_scan(&x, 0), Err(Error::Parameter(_))));
        assert!(blocked_scan(&[], 4).unwrap().is_empty());
    }

    #[test]
    fn row_and_column_examples() {
        let ones = Plane::filled(2, 3, 1);
        assert_eq!(scan_rows(&ones).data(), &[1, 2, 3, 1, 2, 3]);
        let col = plane(3, 1, &[4, 5, 6]);
        assert_eq!(scan_rows(&col), col);

        let ones = Plane::filled(3, 2, 1);
        assert_eq!(scan_cols(&ones).data(), &[1, 1, 2, 2, 3, 3]);
        let row = plane(1, 3, &[4, 5, 6]);
        assert_eq!(scan_cols(&row), row);
    }

    #[test]
    fn transpose_examples() {
        let p = plane(2, 3, &[1, 2, 3, 4, 5, 6]);
        let t = transpose(&p);
        assert_eq!((t.rows(), t.cols()), (3, 2));
        assert_eq!(t.data(), &[1, 4, 2, 5, 3, 6]);
        let row = plane(1, 4, &[1, 2, 3, 4]);
        let col = transpose(&row);
        assert_eq!((col.rows(), col.cols()), (4, 1));
    }

    #[test]
    fn random_plane_scans_match_naive() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let data: Vec<u32> = (0..35).map(|_| rng.gen_range(0..100)).collect();
        let p = plane(5, 7, &data);
        let rows = scan_rows(&p);
        for r in 0..5 {
            assert_eq!(&rows.data()[r * 7..(r + 1) * 7], &naive(&data[r * 7..(r + 1) * 7])[..]);
        }
        assert_eq!(scan_cols(&p), transpose(&scan_rows(&transpose(&p))));
    }

    #[test]
    fn column_scan_crosses_band_boundary() {
        let cols = COL_BAND + 37;
        let p = Plane::filled(4, cols, 2);
        let s = scan_cols(&p);
        for r in 0..4 {
            assert!(s.data()[r * cols..(r + 1) * cols].iter().all(|&x| x == 2 * (r as u32 + 1)));
        }
    }

    fn arb_plane() -> impl Strategy<Value = Plane> {
        (1usize..90, 1usize..90).prop_flat_map(|(r, c)| {
            prop::collection::vec(0u32..1000, r * c)
                .prop_map(move |d| Plane::new(r, c, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn blocked_equals_flat(x in prop::collection::vec(0u32..1_000_000, 0..600),
                               block in prop::sample::select(vec![1usize, 2, 3, 5, 8, 64, 256])) {
            prop_assert_eq!(blocked_scan(&x, block).unwrap(), inclusive_scan(&x).unwrap());
        }

        #[test]
        fn inclusive_is_exclusive_plus_input(x in prop::collection::vec(0u32..1_000_000, 0..300)) {
            let inc = inclusive_scan(&x).unwrap();
            let exc = exclusive_scan(&x).unwrap();
            for i in 0..x.len() {
                prop_assert_eq!(inc[i], exc[i] + x[i]);
            }
        }

        #[test]
        fn scan_is_linear(pairs in prop::collection::vec((0u32..1_000_000, 0u32..1_000_000), 0..300)) {
            let a: Vec<u32> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<u32> = pairs.iter().map(|p| p.1).collect();
            let sum: Vec<u32> = pairs.iter().map(|p| p.0 + p.1).collect();
            let lhs = inclusive_scan(&sum).unwrap();
            let rhs: Vec<u32> = inclusive_scan(&a).unwrap().iter()
                .zip(inclusive_scan(&b).unwrap()).map(|(x, y)| x + y).collect();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn transpose_involution_and_column_identity(p in arb_plane()) {
            prop_assert_eq!(&transpose(&transpose(&p)), &p);
            prop_assert_eq!(scan_cols(&p), transpose(&scan_rows(&transpose(&p))));
        }
    }
}
