//! Binary PGM images and the `IHST` tensor file.
//!
//! Tensor file layout, all little-endian:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "IHST"
//!      4     2  version (1)
//!      6     2  bins (1..=256)
//!      8     4  width
//!     12     4  height
//!     16   ...  bins planes of height x width u32 counts, bin 0 first
//! ```
//!
//! so a file is exactly `16 + 4 * width * height * bins` bytes long.

use crate::error::{Error, FormatError, Result};
use crate::histogram::{GrayImage, IntegralHistogram};

pub const TENSOR_MAGIC: [u8; 4] = *b"IHST";
pub const TENSOR_VERSION: u16 = 1;
pub const TENSOR_HEADER_LEN: usize = 16;

/// Parses a binary (`P5`) PGM with maxval 255. Bytes after the declared
/// pixel data are ignored.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(FormatError::PgmMagic.into());
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(FormatError::PgmMaxval(maxval).into());
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(FormatError::PgmHeader("missing whitespace after maxval").into()),
    }
    if width == 0 || height == 0 {
        return Err(FormatError::PgmHeader("zero image extent").into());
    }
    let expected = usize::try_from(width)
        .ok()
        .zip(usize::try_from(height).ok())
        .and_then(|(w, h)| w.checked_mul(h))
        .ok_or_else(|| Error::Capacity(format!("PGM extents {width}x{height} too large")))?;
    let raster = &bytes[cur.pos..];
    if raster.len() < expected {
        return Err(FormatError::PgmTruncated {
            expected,
            actual: raster.len(),
        }
        .into());
    }
    GrayImage::new(width as usize, height as usize, raster[..expected].to_vec())
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&b) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if b == b'\n' || b == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, field: &'static str) -> Result<u64> {
        let at_token_start = self.pos;
        self.skip_separators();
        if self.pos == at_token_start {
            return Err(FormatError::PgmHeader(match field {
                "width" => "expected whitespace before width",
                "height" => "expected whitespace before height",
                _ => "expected whitespace before maxval",
            })
            .into());
        }
        let start = self.pos;
        let mut value: u64 = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((b - b'0') as u64))
                .ok_or(FormatError::PgmHeader("header number too large"))?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(FormatError::PgmHeader(match field {
                "width" => "missing width",
                "height" => "missing height",
                _ => "missing maxval",
            })
            .into());
        }
        Ok(value)
    }
}

pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

/// Renders a `rows x cols` grid of values in `[0, 1]` as a PGM, mapping `v`
/// to `round(v * 255)` with halves rounded up.
pub fn write_map_pgm(rows: usize, cols: usize, values: &[f64]) -> Result<Vec<u8>> {
    if rows == 0 || cols == 0 || values.len() != rows * cols {
        return Err(Error::Parameter(format!(
            "map of {} values does not fill {rows}x{cols}",
            values.len()
        )));
    }
    let pixels = values
        .iter()
        .map(|&v| {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Range(v));
            }
            Ok((v * 255.0 + 0.5).floor() as u8)
        })
        .collect::<Result<Vec<u8>>>()?;
    Ok(write_pgm(&GrayImage::new(cols, rows, pixels)?))
}

pub(crate) fn tensor_header(width: usize, height: usize, bins: usize) -> Result<[u8; TENSOR_HEADER_LEN]> {
    let extent = |v: usize, name: &str| {
        u32::try_from(v).map_err(|_| Error::Capacity(format!("{name} {v} does not fit the tensor header")))
    };
    let (w, h) = (extent(width, "width")?, extent(height, "height")?);
    if !(1..=256).contains(&bins) {
        return Err(Error::Parameter(format!("bin count {bins} outside 1..=256")));
    }
    let mut head = [0u8; TENSOR_HEADER_LEN];
    head[0..4].copy_from_slice(&TENSOR_MAGIC);
    head[4..6].copy_from_slice(&TENSOR_VERSION.to_le_bytes());
    head[6..8].copy_from_slice(&(bins as u16).to_le_bytes());
    head[8..12].copy_from_slice(&w.to_le_bytes());
    head[12..16].copy_from_slice(&h.to_le_bytes());
    Ok(head)
}

pub fn serialize_ih(ih: &IntegralHistogram) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(TENSOR_HEADER_LEN + 4 * ih.counts().len());
    out.extend_from_slice(&tensor_header(ih.width(), ih.height(), ih.bins())?);
    for v in ih.counts() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn deserialize_ih(bytes: &[u8]) -> Result<IntegralHistogram> {
    if bytes.len() < 4 || bytes[..4] != TENSOR_MAGIC {
        return Err(FormatError::TensorMagic.into());
    }
    if bytes.len() < TENSOR_HEADER_LEN {
        return Err(FormatError::TensorLength {
            expected: TENSOR_HEADER_LEN as u64,
            actual: bytes.len() as u64,
        }
        .into());
    }
    let u16_at = |o: usize| u16::from_le_bytes([bytes[o], bytes[o + 1]]);
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let version = u16_at(4);
    if version != TENSOR_VERSION {
        return Err(FormatError::TensorVersion(version).into());
    }
    let bins = u16_at(6) as u64;
    let (width, height) = (u32_at(8) as u64, u32_at(12) as u64);
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(bins))
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(TENSOR_HEADER_LEN as u64))
        .unwrap_or(u64::MAX);
    if expected != bytes.len() as u64 {
        return Err(FormatError::TensorLength {
            expected,
            actual: bytes.len() as u64,
        }
        .into());
    }
    let counts = bytes[TENSOR_HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    IntegralHistogram::from_counts(width as usize, height as usize, bins as usize, counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn format_err(r: Result<impl std::fmt::Debug>) -> FormatError {
        match r {
            Err(Error::Format(f)) => f,
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_pgm() {
        let mut bytes = b"P5 1 1 255 ".to_vec();
        bytes.push(0);
        let img = read_pgm(&bytes).unwrap();
        assert_eq!((img.width(), img.height(), img.data()), (1, 1, &[0u8][..]));
    }

    #[test]
    fn pgm_comments_and_trailing_bytes() {
        let mut bytes = b"P5\n# made by hand\n2 # width\n1\n255\n".to_vec();
        bytes.extend_from_slice(&[7, 9, 42, 42]);
        let img = read_pgm(&bytes).unwrap();
        assert_eq!(img.data(), &[7, 9]);
    }

    #[test]
    fn pgm_errors_are_distinct() {
        assert_eq!(format_err(read_pgm(b"P6 1 1 255 \0")), FormatError::PgmMagic);
        assert_eq!(format_err(read_pgm(b"")), FormatError::PgmMagic);
        assert_eq!(format_err(read_pgm(b"P5 1 1 65535 \0\0")), FormatError::PgmMaxval(65535));
        let mut short = b"P5 4 4 255\n".to_vec();
        short.extend_from_slice(&[1; 15]);
        assert_eq!(
            format_err(read_pgm(&short)),
            FormatError::PgmTruncated { expected: 16, actual: 15 }
        );
        assert!(matches!(format_err(read_pgm(b"P5 x 1 255 \0")), FormatError::PgmHeader(_)));
        assert!(matches!(format_err(read_pgm(b"P5 1 1 255")), FormatError::PgmHeader(_)));
        assert!(matches!(format_err(read_pgm(b"P5 0 1 255 ")), FormatError::PgmHeader(_)));
    }

    #[test]
    fn map_rendering() {
        let zeros = write_map_pgm(2, 3, &[0.0; 6]).unwrap();
        assert!(zeros.ends_with(&[0; 6]));
        let ones = write_map_pgm(2, 3, &[1.0; 6]).unwrap();
        assert!(ones.ends_with(&[255; 6]));
        let half = write_map_pgm(1, 1, &[0.5]).unwrap();
        assert_eq!(*half.last().unwrap(), 128);
        assert!(matches!(write_map_pgm(1, 1, &[1.5]), Err(Error::Range(_))));
        assert!(matches!(write_map_pgm(1, 1, &[-0.1]), Err(Error::Range(_))));
        assert!(matches!(write_map_pgm(1, 1, &[f64::NAN]), Err(Error::Range(_))));
        let img = read_pgm(&write_map_pgm(2, 3, &[0.0, 0.2, 0.4, 0.6, 0.8, 1.0]).unwrap()).unwrap();
        assert_eq!((img.width(), img.height()), (3, 2));
        assert_eq!(img.data(), &[0, 51, 102, 153, 204, 255]);
    }

    #[test]
    fn tiny_tensor_is_twenty_bytes() {
        let ih = IntegralHistogram::from_counts(1, 1, 1, vec![1]).unwrap();
        let bytes = serialize_ih(&ih).unwrap();
        assert_eq!(bytes.len(), 20);
        assert_eq!(&bytes[..4], b"IHST");
        assert_eq!(&bytes[16..], &[1, 0, 0, 0]);
        assert_eq!(deserialize_ih(&bytes).unwrap(), ih);
    }

    #[test]
    fn tensor_errors_are_distinct() {
        let ih = IntegralHistogram::from_counts(2, 1, 2, vec![1, 2, 0, 0]).unwrap();
        let good = serialize_ih(&ih).unwrap();

        let mut bad = good.clone();
        bad[0] ^= 0xff;
        assert_eq!(format_err(deserialize_ih(&bad)), FormatError::TensorMagic);

        let mut bad = good.clone();
        bad[4] = 2;
        assert_eq!(format_err(deserialize_ih(&bad)), FormatError::TensorVersion(2));

        assert!(matches!(
            format_err(deserialize_ih(&good[..good.len() - 1])),
            FormatError::TensorLength { .. }
        ));
        let mut long = good.clone();
        long.push(0);
        assert!(matches!(format_err(deserialize_ih(&long)), FormatError::TensorLength { .. }));
        assert!(matches!(format_err(deserialize_ih(&good[..10])), FormatError::TensorLength { .. }));
    }

    proptest! {
        #[test]
        fn pgm_round_trip(w in 1usize..40, h in 1usize..40, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let img = GrayImage::new(w, h, (0..w * h).map(|_| rng.gen()).collect()).unwrap();
            let bytes = write_pgm(&img);
            prop_assert_eq!(&read_pgm(&bytes).unwrap(), &img);
            prop_assert_eq!(write_pgm(&read_pgm(&bytes).unwrap()), bytes);
        }

        #[test]
        fn tensor_round_trip(w in 1usize..12, h in 1usize..12, b in 1usize..6, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let counts = (0..w * h * b).map(|_| rng.gen()).collect();
            let ih = IntegralHistogram::from_counts(w, h, b, counts).unwrap();
            let bytes = serialize_ih(&ih).unwrap();
            prop_assert_eq!(bytes.len(), 16 + 4 * w * h * b);
            prop_assert_eq!(&deserialize_ih(&bytes).unwrap(), &ih);
        }
    }
}
