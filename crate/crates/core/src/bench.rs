//! Benchmark sweeps over strategy, image size, bin count, tile and worker count.
//!
//! Each instance is a uniform-random image derived from the sweep seed and its
//! extents, so every strategy sees the same pixels. Every timed result is
//! checksummed and compared against the sequential strategy's checksum for
//! the same instance, so a sweep doubles as a correctness check.
//!
//! CSV columns, in order:
//! `strategy,width,height,bins,tile,workers,reps,median_ms,min_ms,fps,checksum`.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::histogram::{region_histogram, BinSpec, GrayImage, IntegralHistogram, Region, MAX_PIXELS};
use crate::parallel::with_workers;
use crate::strategy::{compute, Strategy};
use crate::tracking::{likelihood_map, Metric};

pub const CSV_HEADER: &str = "strategy,width,height,bins,tile,workers,reps,median_ms,min_ms,fps,checksum";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub strategy: String,
    pub width: usize,
    pub height: usize,
    pub bins: usize,
    pub tile: usize,
    pub workers: usize,
    pub reps: usize,
    pub median_ms: f64,
    pub min_ms: f64,
    pub throughput_fps: f64,
    pub checksum: u64,
}

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{:016x}",
            self.strategy,
            self.width,
            self.height,
            self.bins,
            self.tile,
            self.workers,
            self.reps,
            self.median_ms,
            self.min_ms,
            self.throughput_fps,
            self.checksum
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BenchEntry {
    Measured(BenchRecord),
    /// A configuration that could not run, with the reason.
    Skipped { label: String, reason: String },
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// `(width, height)` pairs.
    pub sizes: Vec<(usize, usize)>,
    pub bins: Vec<usize>,
    pub strategies: Vec<Strategy>,
    /// Worker caps; 0 means the default pool.
    pub workers: Vec<usize>,
    /// Untimed runs before the timed ones.
    pub warmup: usize,
    pub reps: usize,
    pub seed: u64,
}

/// Window-size sweep of the likelihood map at a fixed map size.
#[derive(Debug, Clone)]
pub struct LikelihoodBenchConfig {
    pub map_side: usize,
    pub windows: Vec<usize>,
    pub bins: usize,
    pub metric: Metric,
    pub workers: usize,
    pub warmup: usize,
    pub reps: usize,
    pub seed: u64,
}

/// Uniform-random image for a `(seed, width, height)` instance.
pub fn synthetic_image(seed: u64, width: usize, height: usize) -> Result<GrayImage> {
    let instance = seed ^ (width as u64).rotate_left(32) ^ (height as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut rng = ChaCha8Rng::seed_from_u64(instance);
    let mut data = vec![0u8; width * height];
    rng.fill(&mut data[..]);
    GrayImage::new(width, height, data)
}

/// FNV-1a over the little-endian bytes of the counts.
pub fn checksum_counts(counts: &[u32]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for v in counts {
        for byte in v.to_le_bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    hash
}

pub fn checksum(ih: &IntegralHistogram) -> u64 {
    checksum_counts(ih.counts())
}

/// Median of the samples (mean of the middle two for an even count).
pub fn median(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

fn timed<T>(warmup: usize, reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<(Vec<f64>, T)> {
    for _ in 0..warmup {
        f()?;
    }
    let mut samples = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps {
        let start = Instant::now();
        let out = f()?;
        samples.push(start.elapsed().as_secs_f64() * 1e3);
        // drop the previous result outside the timed region
        last = Some(out);
    }
    Ok((samples, last.expect("reps >= 1")))
}

#[allow(clippy::too_many_arguments)]
fn record(
    strategy: &str,
    width: usize,
    height: usize,
    bins: usize,
    tile: usize,
    workers: usize,
    samples: &[f64],
    checksum: u64,
) -> BenchRecord {
    let median_ms = median(samples);
    BenchRecord {
        strategy: strategy.to_string(),
        width,
        height,
        bins,
        tile,
        workers,
        reps: samples.len(),
        median_ms,
        min_ms: samples.iter().copied().fold(f64::INFINITY, f64::min),
        throughput_fps: 1000.0 / median_ms,
        checksum,
    }
}

fn feasibility(width: usize, height: usize, bins: usize) -> std::result::Result<(), String> {
    if width == 0 || height == 0 {
        return Err(format!("{width}x{height} has an empty extent"));
    }
    if width as u64 * height as u64 > MAX_PIXELS {
        return Err(format!("{width}x{height} exceeds the u32 count range"));
    }
    if !(1..=256).contains(&bins) {
        return Err(format!("bin count {bins} outside 1..=256"));
    }
    Ok(())
}

/// Runs one timed configuration at a time. Fails only when a strategy's
/// checksum disagrees with the sequential baseline.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchEntry>> {
    if config.reps == 0 {
        return Err(Error::Parameter("reps must be at least 1".into()));
    }
    let mut entries = Vec::new();
    for &(width, height) in &config.sizes {
        for &bins in &config.bins {
            if let Err(reason) = feasibility(width, height, bins) {
                for s in &config.strategies {
                    entries.push(BenchEntry::Skipped {
                        label: format!("{s} {width}x{height} bins={bins}"),
                        reason: reason.clone(),
                    });
                }
                continue;
            }
            let img = synthetic_image(config.seed, width, height)?;
            let spec = BinSpec::uniform(bins)?;
            let baseline = checksum(&compute(&img, &spec, Strategy::Sequential)?);

            for &strategy in &config.strategies {
                for &workers in &config.workers {
                    let (samples, ih) = with_workers(workers, || {
                        timed(config.warmup, config.reps, || compute(&img, &spec, strategy))
                    })??;
                    let sum = checksum(&ih);
                    drop(ih);
                    if sum != baseline {
                        return Err(Error::Mismatch(format!(
                            "{strategy} on {width}x{height} bins={bins} workers={workers}: \
                             {sum:016x} != sequential {baseline:016x}"
                        )));
                    }
                    entries.push(BenchEntry::Measured(record(
                        strategy.name(),
                        width,
                        height,
                        bins,
                        strategy.tile(),
                        workers,
                        &samples,
                        sum,
                    )));
                }
            }
        }
    }
    Ok(entries)
}

/// Times [`likelihood_map`] for each window side on an image sized so the map
/// is always `map_side x map_side`. Records use strategy `likelihood` and the
/// window side in the `tile` column; the checksum covers the map's bits.
pub fn run_likelihood_bench(config: &LikelihoodBenchConfig) -> Result<Vec<BenchEntry>> {
    if config.reps == 0 {
        return Err(Error::Parameter("reps must be at least 1".into()));
    }
    if config.map_side == 0 {
        return Err(Error::Parameter("map side must be at least 1".into()));
    }
    let spec = BinSpec::uniform(config.bins)?;
    let mut entries = Vec::new();
    for &side in &config.windows {
        if side == 0 {
            entries.push(BenchEntry::Skipped {
                label: "likelihood window=0".into(),
                reason: "window side must be at least 1".into(),
            });
            continue;
        }
        let extent = config.map_side + side - 1;
        if let Err(reason) = feasibility(extent, extent, config.bins) {
            entries.push(BenchEntry::Skipped {
                label: format!("likelihood window={side}"),
                reason,
            });
            continue;
        }
        let img = synthetic_image(config.seed, extent, extent)?;
        let ih = compute(&img, &spec, Strategy::default())?;
        let template = region_histogram(&ih, &Region::window(0, 0, side, side)?)?.normalize()?;
        let (samples, map) = with_workers(config.workers, || {
            timed(config.warmup, config.reps, || likelihood_map(&ih, &template, side, side, config.metric))
        })??;
        let bits: Vec<u32> = map
            .values()
            .iter()
            .flat_map(|v| {
                let b = v.to_bits();
                [b as u32, (b >> 32) as u32]
            })
            .collect();
        entries.push(BenchEntry::Measured(record(
            "likelihood",
            extent,
            extent,
            config.bins,
            side,
            config.workers,
            &samples,
            checksum_counts(&bits),
        )));
    }
    Ok(entries)
}

pub fn write_csv<'a, W: Write>(
    out: &mut W,
    records: impl IntoIterator<Item = &'a BenchRecord>,
) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Measured records of a sweep, skipping diagnostics.
pub fn measured(entries: &[BenchEntry]) -> impl Iterator<Item = &BenchRecord> {
    entries.iter().filter_map(|e| match e {
        BenchEntry::Measured(r) => Some(r),
        BenchEntry::Skipped { .. } => None,
    })
}
