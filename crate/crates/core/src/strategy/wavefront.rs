//! Wavefront tiled computation.
//!
//! The image is cut into `tile x tile` blocks. Block `(i, j)` needs the last
//! cumulative row of block `(i-1, j)`, the last cumulative column of block
//! `(i, j-1)` and the bottom-right entry of block `(i-1, j-1)`; given those
//! carries it finishes in one fused pass. Blocks on the same anti-diagonal
//! `i + j = d` are mutually independent and run concurrently; diagonals run
//! in increasing order.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::histogram::{BinSpec, GrayImage, IntegralHistogram};
use crate::parallel::SharedSlice;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TileEventKind {
    Start,
    Finish,
}

/// One scheduler event. `seq` is a global logical clock, strictly increasing
/// across all events of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileEvent {
    pub row: usize,
    pub col: usize,
    pub kind: TileEventKind,
    pub seq: u64,
}

struct Trace {
    clock: AtomicU64,
    events: Mutex<Vec<TileEvent>>,
}

impl Trace {
    fn record(&self, row: usize, col: usize, kind: TileEventKind) {
        // Taking the lock before reading the clock keeps `seq` order equal to
        // push order.
        let mut events = self.events.lock().unwrap_or_else(|e| e.into_inner());
        let seq = self.clock.fetch_add(1, Ordering::SeqCst);
        events.push(TileEvent { row, col, kind, seq });
    }
}

/// Carries published by a finished tile, bin-major.
struct Carries {
    /// Cumulative values along the tile's last row, `bins x tile_width`.
    bottom: Vec<u32>,
    /// Cumulative values along the tile's last column, `bins x tile_height`.
    right: Vec<u32>,
}

pub fn compute_wavefront(img: &GrayImage, spec: &BinSpec, tile: usize) -> Result<IntegralHistogram> {
    run(img, spec, tile, None)
}

/// Same as [`compute_wavefront`], also returning the start/finish order of
/// every tile.
pub fn compute_wavefront_traced(
    img: &GrayImage,
    spec: &BinSpec,
    tile: usize,
) -> Result<(IntegralHistogram, Vec<TileEvent>)> {
    let trace = Trace {
        clock: AtomicU64::new(0),
        events: Mutex::new(Vec::new()),
    };
    let ih = run(img, spec, tile, Some(&trace))?;
    let events = trace.events.into_inner().unwrap_or_else(|e| e.into_inner());
    Ok((ih, events))
}

fn run(img: &GrayImage, spec: &BinSpec, tile: usize, trace: Option<&Trace>) -> Result<IntegralHistogram> {
    if tile == 0 {
        return Err(Error::Parameter("wavefront tile must be at least 1 pixel".into()));
    }
    img.check_capacity()?;
    let (w, h) = (img.width(), img.height());
    let tile_rows = h.div_ceil(tile);
    let tile_cols = w.div_ceil(tile);

    let mut ih = IntegralHistogram::zeroed(w, h, spec.bins());
    let carries: Vec<OnceLock<Carries>> = (0..tile_rows * tile_cols).map(|_| OnceLock::new()).collect();
    {
        let grid = Grid {
            img,
            spec,
            tile,
            tile_cols,
            out: SharedSlice::new(ih.counts_mut()),
            carries: &carries,
        };
        for diag in 0..tile_rows + tile_cols - 1 {
            let first = diag.saturating_sub(tile_cols - 1);
            let last = diag.min(tile_rows - 1);
            (first..=last).into_par_iter().for_each(|i| {
                let j = diag - i;
                if let Some(t) = trace {
                    t.record(i, j, TileEventKind::Start);
                }
                grid.process(i, j);
                if let Some(t) = trace {
                    t.record(i, j, TileEventKind::Finish);
                }
            });
        }
    }
    Ok(ih)
}

struct Grid<'a> {
    img: &'a GrayImage,
    spec: &'a BinSpec,
    tile: usize,
    tile_cols: usize,
    out: SharedSlice<'a, u32>,
    carries: &'a [OnceLock<Carries>],
}

impl Grid<'_> {
    fn carries_of(&self, i: usize, j: usize) -> &Carries {
        self.carries[i * self.tile_cols + j]
            .get()
            .expect("wavefront dependency not finished")
    }

    fn process(&self, i: usize, j: usize) {
        let (w, h) = (self.img.width(), self.img.height());
        let bins = self.spec.bins();
        let lut = self.spec.lut();
        let r0 = i * self.tile;
        let c0 = j * self.tile;
        let th = self.tile.min(h - r0);
        let tw = self.tile.min(w - c0);

        let above = (i > 0).then(|| self.carries_of(i - 1, j));
        let left = (j > 0).then(|| self.carries_of(i, j - 1));
        let diag = (i > 0 && j > 0).then(|| self.carries_of(i - 1, j - 1));
        let diag_tw = if j > 0 { self.tile } else { 0 };

        let mut bottom = vec![0u32; bins * tw];
        let mut right = vec![0u32; bins * th];

        for b in 0..bins {
            let bin = b as u8;
            // Running previous row, seeded with the row carry from above.
            let prev = &mut bottom[b * tw..(b + 1) * tw];
            if let Some(a) = above {
                prev.copy_from_slice(&a.bottom[b * tw..(b + 1) * tw]);
            }
            let left_col = left.map(|l| &l.right[b * th..(b + 1) * th]);
            // H(r0 - 1, c0 - 1, b): the shared corner.
            let mut left_prev = diag.map_or(0, |d| d.bottom[b * diag_tw + diag_tw - 1]);
            for dr in 0..th {
                let r = r0 + dr;
                let left_here = left_col.map_or(0, |l| l[dr]);
                // Pixels of bin b in row r left of the tile.
                let mut run = left_here - left_prev;
                left_prev = left_here;
                let pixels = &self.img.row(r)[c0..c0 + tw];
                // SAFETY: rows [r0, r0 + th) x columns [c0, c0 + tw) of every
                // plane belong to this tile alone.
                let out = unsafe { self.out.slice_mut((b * h + r) * w + c0, tw) };
                for ((x, p), &pixel) in out.iter_mut().zip(prev.iter_mut()).zip(pixels) {
                    run += (lut[pixel as usize] == bin) as u32;
                    *p += run;
                    *x = *p;
                }
                right[b * th + dr] = out[tw - 1];
            }
        }

        let slot = &self.carries[i * self.tile_cols + j];
        if slot.set(Carries { bottom, right }).is_err() {
            unreachable!("tile ({i}, {j}) processed twice");
        }
    }
}
