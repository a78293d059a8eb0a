//! Domain types: images, binning, the integral histogram tensor, regions and
//! region histograms, plus the similarity metrics used for matching.
//!
//! The tensor uses an inclusive-corner convention: entry `(r, c, b)` counts the
//! pixels `(r', c')` with `r' <= r`, `c' <= c` whose intensity falls in bin `b`.
//! A rectangle's histogram is then recovered from four reads per bin,
//!
//! ```text
//! h(b) = H(r1, c1, b) - H(r0-1, c1, b) - H(r1, c0-1, b) + H(r0-1, c0-1, b)
//! ```
//!
//! where corner terms with a negative coordinate read as zero.

use crate::error::{Error, Result};

/// Largest pixel count representable by the `u32` count type.
pub const MAX_PIXELS: u64 = u32::MAX as u64;

/// An 8-bit grayscale raster stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Parameter(format!(
                "image extents must be positive, got {width}x{height}"
            )));
        }
        let expected = width.checked_mul(height).ok_or_else(|| {
            Error::Capacity(format!("image extents {width}x{height} overflow"))
        })?;
        if data.len() != expected {
            return Err(Error::Parameter(format!(
                "pixel buffer has {} bytes, expected {expected}",
                data.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    /// Image with every pixel set to `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        let len = width
            .checked_mul(height)
            .ok_or_else(|| Error::Capacity(format!("image extents {width}x{height} overflow")))?;
        Self::new(width, height, vec![value; len])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.width..(r + 1) * self.width]
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.width + c]
    }

    /// Fails when the pixel count does not fit the `u32` count type.
    pub fn check_capacity(&self) -> Result<()> {
        let pixels = self.width as u64 * self.height as u64;
        if pixels > MAX_PIXELS {
            return Err(Error::Capacity(format!(
                "{}x{} image has {pixels} pixels, more than the {MAX_PIXELS} a u32 count can hold",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinMode {
    Uniform,
    Table,
}

/// Maps an 8-bit intensity to one of `bins` bin indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinSpec {
    bins: usize,
    mode: BinMode,
    lut: [u8; 256],
}

impl BinSpec {
    /// Even partition of `[0, 256)`: intensity `v` goes to `floor(v * bins / 256)`.
    pub fn uniform(bins: usize) -> Result<Self> {
        check_bin_count(bins)?;
        let mut lut = [0u8; 256];
        for (v, slot) in lut.iter_mut().enumerate() {
            *slot = (v * bins / 256) as u8;
        }
        Ok(BinSpec {
            bins,
            mode: BinMode::Uniform,
            lut,
        })
    }

    /// Explicit lookup table; every entry must be below `bins`.
    pub fn from_table(bins: usize, table: [u8; 256]) -> Result<Self> {
        check_bin_count(bins)?;
        if let Some((v, &b)) = table.iter().enumerate().find(|(_, &b)| b as usize >= bins) {
            return Err(Error::Parameter(format!(
                "lookup entry for intensity {v} is {b}, not below {bins}"
            )));
        }
        Ok(BinSpec {
            bins,
            mode: BinMode::Table,
            lut: table,
        })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn mode(&self) -> BinMode {
        self.mode
    }

    pub fn lut(&self) -> &[u8; 256] {
        &self.lut
    }

    #[inline]
    pub fn map(&self, v: u8) -> usize {
        self.lut[v as usize] as usize
    }
}

fn check_bin_count(bins: usize) -> Result<()> {
    if !(1..=256).contains(&bins) {
        return Err(Error::Parameter(format!(
            "bin count must be in 1..=256, got {bins}"
        )));
    }
    Ok(())
}

/// Bin index of intensity `v` under `spec`.
pub fn map_intensity(v: u8, spec: &BinSpec) -> usize {
    spec.map(v)
}

/// Cumulative bin counts, stored as `bins` row-major `height x width` planes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralHistogram {
    width: usize,
    height: usize,
    bins: usize,
    counts: Vec<u32>,
}

impl IntegralHistogram {
    pub fn from_counts(width: usize, height: usize, bins: usize, counts: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Parameter(format!(
                "tensor extents must be positive, got {width}x{height}"
            )));
        }
        check_bin_count(bins)?;
        if width as u64 * height as u64 > MAX_PIXELS {
            return Err(Error::Capacity(format!(
                "{width}x{height} tensor exceeds the u32 count range"
            )));
        }
        let expected = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(bins))
            .ok_or_else(|| Error::Capacity("tensor size overflows usize".into()))?;
        if counts.len() != expected {
            return Err(Error::Parameter(format!(
                "count buffer has {} entries, expected {expected}",
                counts.len()
            )));
        }
        Ok(IntegralHistogram {
            width,
            height,
            bins,
            counts,
        })
    }

    pub(crate) fn zeroed(width: usize, height: usize, bins: usize) -> Self {
        IntegralHistogram {
            width,
            height,
            bins,
            counts: vec![0; width * height * bins],
        }
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

    pub fn plane_len(&self) -> usize {
        self.width * self.height
    }

    /// All counts, bin 0's plane first.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub(crate) fn counts_mut(&mut self) -> &mut [u32] {
        &mut self.counts
    }

    pub fn into_counts(self) -> Vec<u32> {
        self.counts
    }

    pub fn plane(&self, b: usize) -> &[u32] {
        let n = self.plane_len();
        &self.counts[b * n..(b + 1) * n]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize, b: usize) -> u32 {
        self.counts[(b * self.height + r) * self.width + c]
    }

    /// Entry at `(r - 1, c - 1, b)` in one-based-shifted coordinates: zero when
    /// either coordinate is 0, otherwise the inclusive entry at `(r - 1, c - 1)`.
    #[inline]
    fn get_shifted(&self, r: usize, c: usize, b: usize) -> u32 {
        if r == 0 || c == 0 {
            0
        } else {
            self.get(r - 1, c - 1, b)
        }
    }

    pub fn check_region(&self, reg: &Region) -> Result<()> {
        if reg.r1 >= self.height || reg.c1 >= self.width {
            return Err(Error::Bounds(format!(
                "region ({},{})-({},{}) exceeds {}x{} tensor",
                reg.r0, reg.c0, reg.r1, reg.c1, self.width, self.height
            )));
        }
        Ok(())
    }

    /// Writes the region's per-bin counts into `out` using four corner reads per bin.
    /// The region must already be bounds-checked.
    pub(crate) fn region_counts_into(&self, reg: &Region, out: &mut [u64]) {
        debug_assert_eq!(out.len(), self.bins);
        let (r0, c0, r1, c1) = (reg.r0, reg.c0, reg.r1 + 1, reg.c1 + 1);
        for (b, slot) in out.iter_mut().enumerate() {
            let total = self.get_shifted(r1, c1, b) as i64 - self.get_shifted(r0, c1, b) as i64
                - self.get_shifted(r1, c0, b) as i64
                + self.get_shifted(r0, c0, b) as i64;
            debug_assert!(total >= 0);
            *slot = total as u64;
        }
    }
}

/// Inclusive pixel rectangle `[r0, r1] x [c0, c1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Region {
    pub r0: usize,
    pub c0: usize,
    pub r1: usize,
    pub c1: usize,
}

impl Region {
    pub fn new(r0: usize, c0: usize, r1: usize, c1: usize) -> Result<Self> {
        if r0 > r1 || c0 > c1 {
            return Err(Error::Parameter(format!(
                "region corners ({r0},{c0})-({r1},{c1}) are not ordered"
            )));
        }
        Ok(Region { r0, c0, r1, c1 })
    }

    pub fn pixel(r: usize, c: usize) -> Self {
        Region {
            r0: r,
            c0: c,
            r1: r,
            c1: c,
        }
    }

    /// Window of `h x w` pixels with top-left corner at `(r, c)`.
    pub fn window(r: usize, c: usize, h: usize, w: usize) -> Result<Self> {
        if h == 0 || w == 0 {
            return Err(Error::Parameter(format!(
                "window extents must be positive, got {h}x{w}"
            )));
        }
        Ok(Region {
            r0: r,
            c0: c,
            r1: r + h - 1,
            c1: c + w - 1,
        })
    }

    pub fn whole(width: usize, height: usize) -> Self {
        Region {
            r0: 0,
            c0: 0,
            r1: height - 1,
            c1: width - 1,
        }
    }

    pub fn height(&self) -> usize {
        self.r1 - self.r0 + 1
    }

    pub fn width(&self) -> usize {
        self.c1 - self.c0 + 1
    }

    pub fn area(&self) -> u64 {
        self.height() as u64 * self.width() as u64
    }
}

/// Raw per-bin pixel counts of a region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<u64>,
}

impl Histogram {
    pub fn new(counts: Vec<u64>) -> Self {
        Histogram { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn normalize(&self) -> Result<NormalizedHistogram> {
        normalize(self)
    }
}

/// Histogram scaled to unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedHistogram {
    fractions: Vec<f64>,
}

impl NormalizedHistogram {
    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn bins(&self) -> usize {
        self.fractions.len()
    }
}

/// Per-bin counts of the pixels inside `reg`.
pub fn region_histogram(ih: &IntegralHistogram, reg: &Region) -> Result<Histogram> {
    ih.check_region(reg)?;
    let mut counts = vec![0u64; ih.bins()];
    ih.region_counts_into(reg, &mut counts);
    Ok(Histogram { counts })
}

pub fn normalize(h: &Histogram) -> Result<NormalizedHistogram> {
    let total = h.total();
    if total == 0 {
        return Err(Error::ZeroTotal);
    }
    Ok(NormalizedHistogram {
        fractions: scale_counts(&h.counts, total),
    })
}

pub(crate) fn scale_counts(counts: &[u64], total: u64) -> Vec<f64> {
    let total = total as f64;
    counts.iter().map(|&c| c as f64 / total).collect()
}

fn check_same_bins(p: &NormalizedHistogram, q: &NormalizedHistogram) -> Result<()> {
    if p.bins() != q.bins() {
        return Err(Error::Shape {
            expected: p.bins(),
            actual: q.bins(),
        });
    }
    Ok(())
}

/// Histogram intersection `sum_b min(p_b, q_b)`.
pub fn intersection(p: &NormalizedHistogram, q: &NormalizedHistogram) -> Result<f64> {
    check_same_bins(p, q)?;
    Ok(intersection_raw(&p.fractions, &q.fractions))
}

pub(crate) fn intersection_raw(p: &[f64], q: &[f64]) -> f64 {
    let s: f64 = p.iter().zip(q).map(|(a, b)| a.min(*b)).sum();
    s.clamp(0.0, 1.0)
}

/// Bhattacharyya coefficient and the distance `sqrt(1 - coefficient)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bhattacharyya {
    pub coefficient: f64,
    pub distance: f64,
}

pub fn bhattacharyya(p: &NormalizedHistogram, q: &NormalizedHistogram) -> Result<Bhattacharyya> {
    check_same_bins(p, q)?;
    let coefficient = bhattacharyya_raw(&p.fractions, &q.fractions);
    Ok(Bhattacharyya {
        coefficient,
        distance: (1.0 - coefficient).max(0.0).sqrt(),
    })
}

pub(crate) fn bhattacharyya_raw(p: &[f64], q: &[f64]) -> f64 {
    let s: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
    s.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nh(v: &[u64]) -> NormalizedHistogram {
        Histogram::new(v.to_vec()).normalize().unwrap()
    }

    #[test]
    fn uniform_binning_examples() {
        assert_eq!(map_intensity(0, &BinSpec::uniform(16).unwrap()), 0);
        assert_eq!(map_intensity(255, &BinSpec::uniform(256).unwrap()), 255);
        assert_eq!(map_intensity(128, &BinSpec::uniform(2).unwrap()), 1);
        assert_eq!(map_intensity(127, &BinSpec::uniform(2).unwrap()), 0);
        let spec = BinSpec::uniform(3).unwrap();
        for v in 0..=255u8 {
            assert_eq!(spec.map(v), v as usize * 3 / 256);
        }
    }

    #[test]
    fn bin_spec_rejects_bad_input() {
        assert!(BinSpec::uniform(0).is_err());
        assert!(BinSpec::uniform(257).is_err());
        let mut table = [0u8; 256];
        table[200] = 4;
        assert!(BinSpec::from_table(4, table).is_err());
        table[200] = 3;
        let spec = BinSpec::from_table(4, table).unwrap();
        assert_eq!(spec.map(200), 3);
        assert_eq!(spec.mode(), BinMode::Table);
    }

    #[test]
    fn image_validation() {
        assert!(GrayImage::new(0, 3, vec![]).is_err());
        assert!(GrayImage::new(2, 2, vec![0; 3]).is_err());
        let img = GrayImage::new(3, 2, vec![1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(img.get(1, 2), 6);
        assert_eq!(img.row(1), &[4, 5, 6]);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(nh(&[4, 4]).fractions(), &[0.5, 0.5]);
        assert_eq!(nh(&[0, 7, 0]).fractions(), &[0.0, 1.0, 0.0]);
        assert_eq!(nh(&[1, 3]).fractions(), &[0.25, 0.75]);
        assert!(matches!(
            Histogram::new(vec![0, 0]).normalize(),
            Err(Error::ZeroTotal)
        ));
    }

    #[test]
    fn intersection_examples() {
        let p = nh(&[1, 1]);
        let q = nh(&[1, 3]);
        assert_eq!(intersection(&p, &p).unwrap(), 1.0);
        assert_eq!(intersection(&nh(&[1, 0]), &nh(&[0, 1])).unwrap(), 0.0);
        assert!((intersection(&p, &q).unwrap() - 0.75).abs() < 1e-15);
        assert!(matches!(
            intersection(&p, &nh(&[1, 1, 1])),
            Err(Error::Shape { expected: 2, actual: 3 })
        ));
    }

    #[test]
    fn bhattacharyya_examples() {
        let p = nh(&[1, 1]);
        let q = nh(&[1, 3]);
        let same = bhattacharyya(&p, &p).unwrap();
        assert!((same.coefficient - 1.0).abs() < 1e-12);
        assert!(same.distance.abs() < 1e-6);
        let disjoint = bhattacharyya(&nh(&[1, 0]), &nh(&[0, 1])).unwrap();
        assert_eq!(disjoint.coefficient, 0.0);
        assert_eq!(disjoint.distance, 1.0);
        // sqrt(0.125) + sqrt(0.375), evaluated independently
        let rho = 0.125f64.sqrt() + 0.375f64.sqrt();
        let got = bhattacharyya(&p, &q).unwrap();
        assert!((got.coefficient - 0.965_925_826).abs() < 1e-9);
        assert!((got.coefficient - rho).abs() < 1e-15);
        assert!((got.distance - 0.184_591_911).abs() < 1e-9);
        assert!(bhattacharyya(&p, &nh(&[1])).is_err());
    }

    #[test]
    fn region_constructors() {
        assert!(Region::new(2, 0, 1, 0).is_err());
        let w = Region::window(3, 4, 2, 5).unwrap();
        assert_eq!((w.r1, w.c1, w.area()), (4, 8, 10));
        assert!(Region::window(0, 0, 0, 1).is_err());
    }

    #[test]
    fn region_query_bounds_error() {
        let ih = IntegralHistogram::zeroed(4, 3, 2);
        assert!(matches!(
            region_histogram(&ih, &Region::new(0, 0, 3, 0).unwrap()),
            Err(Error::Bounds(_))
        ));
        assert!(matches!(
            region_histogram(&ih, &Region::new(0, 0, 0, 4).unwrap()),
            Err(Error::Bounds(_))
        ));
    }
}
