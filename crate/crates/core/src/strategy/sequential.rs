use crate::error::Result;
use crate::histogram::{BinSpec, GrayImage, IntegralHistogram};

/// Single-threaded propagation
/// `H(r,c,b) = H(r-1,c,b) + H(r,c-1,b) - H(r-1,c-1,b) + [Q(I(r,c)) = b]`,
/// with out-of-range terms read as zero.
pub fn compute_sequential(img: &GrayImage, spec: &BinSpec) -> Result<IntegralHistogram> {
    img.check_capacity()?;
    let (w, h) = (img.width(), img.height());
    let mut ih = IntegralHistogram::zeroed(w, h, spec.bins());
    let lut = spec.lut();

    for (b, plane) in ih.counts_mut().chunks_mut(w * h).enumerate() {
        let b = b as u8;
        for r in 0..h {
            let pixels = img.row(r);
            for c in 0..w {
                let up = if r > 0 { plane[(r - 1) * w + c] } else { 0 };
                let left = if c > 0 { plane[r * w + c - 1] } else { 0 };
                let diag = if r > 0 && c > 0 { plane[(r - 1) * w + c - 1] } else { 0 };
                let hit = (lut[pixels[c] as usize] == b) as u32;
                // up + left can exceed u32 on near-capacity images; the true
                // value always fits, so modular arithmetic is exact.
                plane[r * w + c] = up.wrapping_add(left).wrapping_sub(diag).wrapping_add(hit);
            }
        }
    }
    Ok(ih)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bin_is_multiplication_table() {
        let img = GrayImage::new(5, 3, (0..15).map(|v| v * 17).collect()).unwrap();
        let ih = compute_sequential(&img, &BinSpec::uniform(1).unwrap()).unwrap();
        for r in 0..3 {
            for c in 0..5 {
                assert_eq!(ih.get(r, c, 0), ((r + 1) * (c + 1)) as u32);
            }
        }
    }

    #[test]
    fn constant_image_fills_one_plane() {
        let spec = BinSpec::uniform(8).unwrap();
        let img = GrayImage::filled(4, 6, 77).unwrap();
        let ih = compute_sequential(&img, &spec).unwrap();
        let hit = spec.map(77);
        for b in 0..8 {
            for r in 0..6 {
                for c in 0..4 {
                    let want = if b == hit { ((r + 1) * (c + 1)) as u32 } else { 0 };
                    assert_eq!(ih.get(r, c, b), want);
                }
            }
        }
    }

    #[test]
    fn two_by_two_corner_counts() {
        let img = GrayImage::new(2, 2, vec![0, 255, 128, 0]).unwrap();
        let ih = compute_sequential(&img, &BinSpec::uniform(2).unwrap()).unwrap();
        assert_eq!(ih.get(1, 1, 0), 2);
        assert_eq!(ih.get(1, 1, 1), 2);
        assert_eq!(ih.plane(0), &[1, 1, 1, 2]);
        assert_eq!(ih.plane(1), &[0, 1, 1, 2]);
    }
}
