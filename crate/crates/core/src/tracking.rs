//! Sliding-window histogram matching.
//!
//! Every `h x w` window placement is scored against a template histogram.
//! Window histograms come from four corner reads per bin on the integral
//! histogram, so the cost per placement is `O(bins)` whatever the window size.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::histogram::{bhattacharyya_raw, intersection_raw, IntegralHistogram, NormalizedHistogram, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    Intersection,
    #[default]
    Bhattacharyya,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Intersection => "intersection",
            Metric::Bhattacharyya => "bhattacharyya",
        }
    }

    /// Similarity of two unit-mass histograms of equal length.
    pub fn score(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            Metric::Intersection => intersection_raw(p, q),
            Metric::Bhattacharyya => bhattacharyya_raw(p, q),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "intersection" => Ok(Metric::Intersection),
            "bhattacharyya" => Ok(Metric::Bhattacharyya),
            other => Err(Error::Parameter(format!("unknown metric {other:?}"))),
        }
    }
}

/// Scores indexed by window top-left corner.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodMap {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl LikelihoodMap {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(Error::Parameter(format!(
                "{} values do not fill a {rows}x{cols} map",
                values.len()
            )));
        }
        Ok(LikelihoodMap { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }
}

/// Tensor reads performed while building a map.
#[derive(Debug, Default)]
pub struct QueryStats {
    pub placements: AtomicU64,
    pub corner_reads: AtomicU64,
}

pub fn likelihood_map(
    ih: &IntegralHistogram,
    template: &NormalizedHistogram,
    h: usize,
    w: usize,
    metric: Metric,
) -> Result<LikelihoodMap> {
    build(ih, template, h, w, metric, None)
}

/// [`likelihood_map`] that also tallies placements and corner reads into `stats`.
pub fn likelihood_map_counted(
    ih: &IntegralHistogram,
    template: &NormalizedHistogram,
    h: usize,
    w: usize,
    metric: Metric,
    stats: &QueryStats,
) -> Result<LikelihoodMap> {
    build(ih, template, h, w, metric, Some(stats))
}

fn build(
    ih: &IntegralHistogram,
    template: &NormalizedHistogram,
    h: usize,
    w: usize,
    metric: Metric,
    stats: Option<&QueryStats>,
) -> Result<LikelihoodMap> {
    if template.bins() != ih.bins() {
        return Err(Error::Shape {
            expected: ih.bins(),
            actual: template.bins(),
        });
    }
    if h == 0 || w == 0 {
        return Err(Error::Parameter(format!("window extents must be positive, got {h}x{w}")));
    }
    if h > ih.height() || w > ih.width() {
        return Err(Error::Bounds(format!(
            "{h}x{w} window does not fit a {}x{} image",
            ih.height(),
            ih.width()
        )));
    }
    let rows = ih.height() - h + 1;
    let cols = ih.width() - w + 1;
    let area = (h * w) as f64;
    let bins = ih.bins();
    let q = template.fractions();

    let mut values = vec![0.0f64; rows * cols];
    values
        .par_chunks_mut(cols)
        .enumerate()
        .for_each_init(
            || (vec![0u64; bins], vec![0f64; bins]),
            |(counts, fractions), (r, out)| {
                for (c, v) in out.iter_mut().enumerate() {
                    let window = Region {
                        r0: r,
                        c0: c,
                        r1: r + h - 1,
                        c1: c + w - 1,
                    };
                    ih.region_counts_into(&window, counts);
                    for (f, &n) in fractions.iter_mut().zip(counts.iter()) {
                        *f = n as f64 / area;
                    }
                    *v = metric.score(q, fractions);
                }
                if let Some(s) = stats {
                    s.placements.fetch_add(cols as u64, Ordering::Relaxed);
                    s.corner_reads.fetch_add((cols * 4 * bins) as u64, Ordering::Relaxed);
                }
            },
        );
    LikelihoodMap::new(rows, cols, values)
}

/// Highest-scoring placement; ties go to the smallest row, then column.
pub fn best_match(map: &LikelihoodMap) -> (usize, usize, f64) {
    let mut best = (0, 0, map.values[0]);
    for (i, &v) in map.values.iter().enumerate() {
        if v > best.2 {
            best = (i / map.cols, i % map.cols, v);
        }
    }
    best
}
