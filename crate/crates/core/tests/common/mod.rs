//! Brute-force oracles shared by the integration and acceptance tests. None
//! of these go through the library's scan or query code.

#![allow(dead_code)]

use inthist::{BinSpec, GrayImage, IntegralHistogram, Region};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut ChaCha8Rng, width: usize, height: usize) -> GrayImage {
    let data = (0..width * height).map(|_| rng.gen()).collect();
    GrayImage::new(width, height, data).unwrap()
}

pub fn uniform_bin(v: u8, bins: usize) -> usize {
    v as usize * bins / 256
}

/// Counts pixels of each bin inside the inclusive rectangle, pixel by pixel.
pub fn count_region(img: &GrayImage, spec: &BinSpec, r0: usize, c0: usize, r1: usize, c1: usize) -> Vec<u64> {
    let mut counts = vec![0u64; spec.bins()];
    for r in r0..=r1 {
        for c in c0..=c1 {
            counts[spec.map(img.get(r, c))] += 1;
        }
    }
    counts
}

/// Integral histogram by direct counting of every up-left rectangle.
pub fn brute_force_tensor(img: &GrayImage, spec: &BinSpec) -> Vec<u32> {
    let (w, h, bins) = (img.width(), img.height(), spec.bins());
    let mut out = vec![0u32; w * h * bins];
    for r in 0..h {
        for c in 0..w {
            let counts = count_region(img, spec, 0, 0, r, c);
            for b in 0..bins {
                out[(b * h + r) * w + c] = counts[b] as u32;
            }
        }
    }
    out
}

pub fn random_region(rng: &mut ChaCha8Rng, width: usize, height: usize) -> Region {
    let (a, b) = (rng.gen_range(0..height), rng.gen_range(0..height));
    let (c, d) = (rng.gen_range(0..width), rng.gen_range(0..width));
    Region::new(a.min(b), c.min(d), a.max(b), c.max(d)).unwrap()
}

pub fn oracle_intersection(p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..p.len() {
        s += if p[i] < q[i] { p[i] } else { q[i] };
    }
    s
}

pub fn oracle_bhattacharyya(p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..p.len() {
        s += (p[i] * q[i]).sqrt();
    }
    s
}

/// Sliding-window map computed by recounting every window's pixels.
pub fn brute_force_map(
    img: &GrayImage,
    spec: &BinSpec,
    template: &[f64],
    h: usize,
    w: usize,
    bhattacharyya: bool,
) -> Vec<f64> {
    let mut out = Vec::new();
    for r in 0..=img.height() - h {
        for c in 0..=img.width() - w {
            let counts = count_region(img, spec, r, c, r + h - 1, c + w - 1);
            let total: u64 = counts.iter().sum();
            let p: Vec<f64> = counts.iter().map(|&n| n as f64 / total as f64).collect();
            out.push(if bhattacharyya {
                oracle_bhattacharyya(template, &p)
            } else {
                oracle_intersection(template, &p)
            });
        }
    }
    out
}

/// Σ_b H(r,c,b) = (r+1)(c+1) everywhere and every plane is monotone along
/// rows and columns.
pub fn check_invariants(ih: &IntegralHistogram) -> Result<(), String> {
    let (w, h, bins) = (ih.width(), ih.height(), ih.bins());
    for r in 0..h {
        for c in 0..w {
            let total: u64 = (0..bins).map(|b| ih.get(r, c, b) as u64).sum();
            if total != ((r + 1) * (c + 1)) as u64 {
                return Err(format!("sum at ({r},{c}) is {total}"));
            }
            for b in 0..bins {
                let v = ih.get(r, c, b);
                if c > 0 && ih.get(r, c - 1, b) > v {
                    return Err(format!("row decrease at ({r},{c},{b})"));
                }
                if r > 0 && ih.get(r - 1, c, b) > v {
                    return Err(format!("column decrease at ({r},{c},{b})"));
                }
            }
        }
    }
    Ok(())
}
