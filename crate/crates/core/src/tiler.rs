//! Integral histogram computation under a byte budget.
//!
//! Bins are split into contiguous chunks and the image into full-width
//! horizontal strips. For one chunk the strips are processed top to bottom;
//! each strip is seeded with the last cumulative row of the strip above (the
//! row carry), so only `strip tensor + carry` bytes are ever resident. The
//! image itself is read in place and is not part of the budget.
//!
//! Finished strips are handed to a [`TensorSink`] as
//! `(bin range, row range, counts)` records.

use std::io::{Seek, SeekFrom, Write};
use std::ops::Range;

use crate::error::{Error, Result};
use crate::histogram::{BinSpec, GrayImage, IntegralHistogram};
use crate::io::{tensor_header, TENSOR_HEADER_LEN};

const COUNT_BYTES: u64 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilePlan {
    width: usize,
    height: usize,
    bins: usize,
    bin_chunks: Vec<Range<usize>>,
    strip_height: usize,
    budget: u64,
}

impl TilePlan {
    /// Builds a plan with an explicit layout: bins in chunks of `chunk_bins`
    /// (the last may be shorter) and strips of `strip_height` rows.
    pub fn with_layout(
        width: usize,
        height: usize,
        bins: usize,
        chunk_bins: usize,
        strip_height: usize,
        budget: u64,
    ) -> Result<Self> {
        if width == 0 || height == 0 || bins == 0 {
            return Err(Error::Parameter(format!(
                "plan extents must be positive, got {width}x{height}x{bins}"
            )));
        }
        if chunk_bins == 0 || strip_height == 0 {
            return Err(Error::Parameter(
                "bin chunk and strip height must be at least 1".into(),
            ));
        }
        let chunk_bins = chunk_bins.min(bins);
        let strip_height = strip_height.min(height);
        let peak = working_set(width, height, strip_height, chunk_bins);
        if peak > budget {
            return Err(Error::Capacity(format!(
                "{chunk_bins} bins x {strip_height} rows needs {peak} bytes, budget is {budget}"
            )));
        }
        let bin_chunks = (0..bins)
            .step_by(chunk_bins)
            .map(|b| b..(b + chunk_bins).min(bins))
            .collect();
        Ok(TilePlan {
            width,
            height,
            bins,
            bin_chunks,
            strip_height,
            budget,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn bin_chunks(&self) -> &[Range<usize>] {
        &self.bin_chunks
    }

    pub fn strip_height(&self) -> usize {
        self.strip_height
    }

    pub fn strips(&self) -> usize {
        self.height.div_ceil(self.strip_height)
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    fn max_chunk(&self) -> usize {
        self.bin_chunks.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    /// Bytes of the per-chunk row carry, zero when a single strip covers the image.
    pub fn carry_bytes(&self) -> u64 {
        carry_bytes(self.width, self.height, self.strip_height, self.max_chunk())
    }

    /// Largest number of bytes the plan keeps resident at once.
    pub fn peak_bytes(&self) -> u64 {
        working_set(self.width, self.height, self.strip_height, self.max_chunk())
    }
}

fn carry_bytes(width: usize, height: usize, strip_height: usize, chunk: usize) -> u64 {
    if strip_height >= height {
        0
    } else {
        width as u64 * chunk as u64 * COUNT_BYTES
    }
}

fn working_set(width: usize, height: usize, strip_height: usize, chunk: usize) -> u64 {
    let strip = width as u64 * strip_height as u64 * chunk as u64 * COUNT_BYTES;
    strip + carry_bytes(width, height, strip_height, chunk)
}

/// Picks the tallest strip that fits with a single-bin chunk, then the widest
/// bin chunk that fits with that strip.
pub fn plan_tiles(width: usize, height: usize, bins: usize, budget: u64) -> Result<TilePlan> {
    if width == 0 || height == 0 || bins == 0 {
        return Err(Error::Parameter(format!(
            "plan extents must be positive, got {width}x{height}x{bins}"
        )));
    }
    if budget == 0 {
        return Err(Error::Parameter("budget must be positive".into()));
    }
    let row_bytes = width as u64 * COUNT_BYTES;
    let strip_height = if working_set(width, height, height, 1) <= budget {
        height
    } else {
        // strip rows plus one carry row must fit
        let rows = budget / row_bytes;
        if rows < 2 {
            return Err(Error::Capacity(format!(
                "budget of {budget} bytes cannot hold one {width}-pixel row and its carry"
            )));
        }
        ((rows - 1) as usize).min(height - 1)
    };
    let per_bin = working_set(width, height, strip_height, 1);
    let chunk = ((budget / per_bin) as usize).clamp(1, bins);
    TilePlan::with_layout(width, height, bins, chunk, strip_height, budget)
}

/// Receives finished strips. `counts` holds, for each bin of `bins` in order,
/// the rows of `rows` at full image width, row-major.
pub trait TensorSink {
    fn write_block(&mut self, bins: Range<usize>, rows: Range<usize>, counts: &[u32]) -> std::io::Result<()>;
}

/// Reassembles streamed blocks into an in-memory tensor.
#[derive(Debug)]
pub struct MemorySink {
    width: usize,
    height: usize,
    bins: usize,
    counts: Vec<u32>,
}

impl MemorySink {
    pub fn new(width: usize, height: usize, bins: usize) -> Self {
        MemorySink {
            width,
            height,
            bins,
            counts: vec![0; width * height * bins],
        }
    }

    pub fn into_histogram(self) -> Result<IntegralHistogram> {
        IntegralHistogram::from_counts(self.width, self.height, self.bins, self.counts)
    }
}

impl TensorSink for MemorySink {
    fn write_block(&mut self, bins: Range<usize>, rows: Range<usize>, counts: &[u32]) -> std::io::Result<()> {
        let span = rows.len() * self.width;
        for (k, b) in bins.enumerate() {
            let dst = (b * self.height + rows.start) * self.width;
            self.counts[dst..dst + span].copy_from_slice(&counts[k * span..(k + 1) * span]);
        }
        Ok(())
    }
}

/// Writes blocks straight into the tensor file layout by seeking.
pub struct TensorFileSink<W: Write + Seek> {
    inner: W,
    width: usize,
    height: usize,
    buf: Vec<u8>,
}

impl<W: Write + Seek> TensorFileSink<W> {
    /// Writes the file header; blocks then fill in the planes.
    pub fn new(mut inner: W, width: usize, height: usize, bins: usize) -> Result<Self> {
        inner.seek(SeekFrom::Start(0))?;
        inner.write_all(&tensor_header(width, height, bins)?)?;
        Ok(TensorFileSink {
            inner,
            width,
            height,
            buf: Vec::new(),
        })
    }

    pub fn into_inner(mut self) -> std::io::Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

impl<W: Write + Seek> TensorSink for TensorFileSink<W> {
    fn write_block(&mut self, bins: Range<usize>, rows: Range<usize>, counts: &[u32]) -> std::io::Result<()> {
        let span = rows.len() * self.width;
        for (k, b) in bins.enumerate() {
            let offset = TENSOR_HEADER_LEN as u64
                + COUNT_BYTES * ((b * self.height + rows.start) * self.width) as u64;
            self.buf.clear();
            self.buf
                .extend(counts[k * span..(k + 1) * span].iter().flat_map(|v| v.to_le_bytes()));
            self.inner.seek(SeekFrom::Start(offset))?;
            self.inner.write_all(&self.buf)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamSummary {
    pub chunks: usize,
    pub strips: usize,
    pub blocks_written: usize,
    /// Largest number of tracked bytes resident at any time.
    pub peak_bytes: u64,
}

/// Explicit accounting of the buffers the streamer holds.
#[derive(Debug)]
struct Meter {
    budget: u64,
    current: u64,
    peak: u64,
}

impl Meter {
    fn alloc(&mut self, bytes: u64) -> Result<()> {
        self.current += bytes;
        if self.current > self.budget {
            return Err(Error::Capacity(format!(
                "streaming working set {} exceeds budget {}",
                self.current, self.budget
            )));
        }
        self.peak = self.peak.max(self.current);
        Ok(())
    }

    fn free(&mut self, bytes: u64) {
        self.current -= bytes;
    }
}

pub fn compute_streamed(
    img: &GrayImage,
    spec: &BinSpec,
    plan: &TilePlan,
    sink: &mut dyn TensorSink,
) -> Result<StreamSummary> {
    img.check_capacity()?;
    let (w, h) = (img.width(), img.height());
    if (plan.width, plan.height, plan.bins) != (w, h, spec.bins()) {
        return Err(Error::Parameter(format!(
            "plan is for {}x{}x{}, input is {w}x{h}x{}",
            plan.width,
            plan.height,
            plan.bins,
            spec.bins()
        )));
    }
    let lut = spec.lut();
    let strip_height = plan.strip_height;
    let mut meter = Meter {
        budget: plan.budget,
        current: 0,
        peak: 0,
    };
    let mut blocks_written = 0;

    for chunk in &plan.bin_chunks {
        let k = chunk.len();
        let strip_len = k * strip_height * w;
        let carry_len = if plan.strips() > 1 { k * w } else { 0 };
        meter.alloc(COUNT_BYTES * (strip_len + carry_len) as u64)?;
        let mut strip = vec![0u32; strip_len];
        let mut carry = vec![0u32; carry_len];

        for r0 in (0..h).step_by(strip_height) {
            let rows = r0..(r0 + strip_height).min(h);
            let span = rows.len() * w;
            for (kb, b) in chunk.clone().enumerate() {
                let bin = b as u8;
                let out = &mut strip[kb * span..(kb + 1) * span];
                for (dr, r) in rows.clone().enumerate() {
                    let (done, rest) = out.split_at_mut(dr * w);
                    let above: &[u32] = if dr > 0 {
                        &done[(dr - 1) * w..]
                    } else if r0 > 0 {
                        &carry[kb * w..(kb + 1) * w]
                    } else {
                        &[]
                    };
                    let row = &mut rest[..w];
                    let mut run = 0u32;
                    for (c, &pixel) in img.row(r).iter().enumerate() {
                        run += (lut[pixel as usize] == bin) as u32;
                        row[c] = run + above.get(c).copied().unwrap_or(0);
                    }
                }
                if !carry.is_empty() {
                    carry[kb * w..(kb + 1) * w].copy_from_slice(&out[span - w..]);
                }
            }
            sink.write_block(chunk.clone(), rows, &strip[..k * span])?;
            blocks_written += 1;
        }

        drop(strip);
        drop(carry);
        meter.free(COUNT_BYTES * (strip_len + carry_len) as u64);
    }

    Ok(StreamSummary {
        chunks: plan.bin_chunks.len(),
        strips: plan.strips(),
        blocks_written,
        peak_bytes: meter.peak,
    })
}

/// Streams into a [`MemorySink`] and returns the reassembled tensor.
pub fn compute_streamed_in_memory(
    img: &GrayImage,
    spec: &BinSpec,
    plan: &TilePlan,
) -> Result<(IntegralHistogram, StreamSummary)> {
    let mut sink = MemorySink::new(img.width(), img.height(), spec.bins());
    let summary = compute_streamed(img, spec, plan, &mut sink)?;
    Ok((sink.into_histogram()?, summary))
}
