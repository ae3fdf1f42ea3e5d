use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::Grid;
use crate::image::Image;
use crate::spectral::{dft2, idft2};

/// Seeded band-limited random field: white noise low-passed in the
/// frequency domain, then affinely mapped to [lo, hi] jointly over all
/// channels. `cutoff` is the lowpass width as a fraction of the Nyquist
/// band; smaller values give smoother fields.
pub fn bandlimited_field(
    h: usize,
    w: usize,
    channels: usize,
    cutoff: f64,
    lo: f64,
    hi: f64,
    seed: u64,
) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planes = Vec::with_capacity(channels);
    for _ in 0..channels {
        let noise: Vec<f64> = (0..h * w).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut spec = dft2(&Grid::new(h, w, noise).expect("noise plane"));
        let sw = spec.width();
        for u in 0..spec.height() {
            // Signed frequencies normalized to [-0.5, 0.5).
            let fy = if u < h.div_ceil(2) {
                u as f64
            } else {
                u as f64 - h as f64
            } / h as f64;
            for v in 0..sw {
                let fx = if v < w.div_ceil(2) {
                    v as f64
                } else {
                    v as f64 - w as f64
                } / w as f64;
                let r2 = (fy * fy + fx * fx) / (cutoff * cutoff);
                spec.data_mut()[u * sw + v] *= (-r2).exp();
            }
        }
        planes.push(idft2(&spec));
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for p in &planes {
        for v in p.data() {
            min = min.min(*v);
            max = max.max(*v);
        }
    }
    let span = if max > min { max - min } else { 1.0 };
    let mut data = vec![0.0; h * w * channels];
    for (ch, p) in planes.iter().enumerate() {
        for (i, v) in p.data().iter().enumerate() {
            data[i * channels + ch] = lo + (hi - lo) * (v - min) / span;
        }
    }
    Image::new(h, w, channels, data).expect("field shape")
}

/// Snaps every sample to the nearest of `levels` evenly spaced values
/// between the image's own min and max, turning a smooth field into
/// flat-shaded regions with crisp boundaries.
fn posterize(img: &Image, levels: usize) -> Image {
    debug_assert!(levels >= 2);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in img.data() {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    let span = if hi > lo { hi - lo } else { 1.0 };
    let steps = (levels - 1) as f64;
    let data = img
        .data()
        .iter()
        .map(|v| lo + span * (((v - lo) / span * steps).round() / steps))
        .collect();
    Image::new(img.height(), img.width(), img.channels(), data).expect("posterize shape")
}

/// One (sharp, blurred) training pair. The sharp image is a two-level
/// posterized band-limited field — flat-shaded blobs with crisp
/// boundaries — replicated across all three channels, and the blur is a
/// spatially varying gaussian: the image is split into 2x2 quadrants and
/// each quadrant gets its own sigma drawn uniformly from [`sigma_lo`,
/// `sigma_hi`]. The blur is computed on a padded field so the crop has
/// full kernel support everywhere.
pub fn varying_blur_pair(
    h: usize,
    w: usize,
    sigma_lo: f64,
    sigma_hi: f64,
    seed: u64,
) -> (Image, Image) {
    let margin = (3.0 * sigma_hi).ceil() as usize;
    let (ph, pw) = (h + 2 * margin, w + 2 * margin);
    let field = {
        let mono = posterize(&bandlimited_field(ph, pw, 1, 0.15, 0.1, 0.9, seed), 2);
        let mut data = Vec::with_capacity(ph * pw * 3);
        for v in mono.data() {
            data.extend_from_slice(&[*v, *v, *v]);
        }
        Image::new(ph, pw, 3, data).expect("field shape")
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let region_sigma: [[f64; 2]; 2] = [
        [
            rng.gen_range(sigma_lo..sigma_hi),
            rng.gen_range(sigma_lo..sigma_hi),
        ],
        [
            rng.gen_range(sigma_lo..sigma_hi),
            rng.gen_range(sigma_lo..sigma_hi),
        ],
    ];

    let mut sharp = vec![0.0; h * w * 3];
    let mut blurred = vec![0.0; h * w * 3];
    for y in 0..h {
        for x in 0..w {
            let sigma = region_sigma[(2 * y / h).min(1)][(2 * x / w).min(1)];
            let radius = (3.0 * sigma).ceil() as isize;
            let inv = 1.0 / (2.0 * sigma * sigma);
            let (py, px) = (y + margin, x + margin);
            let mut wsum = 0.0;
            let mut acc = [0.0f64; 3];
            for dy in -radius..=radius {
                for dx in -radius..=radius {
                    let wgt = (-((dy * dy + dx * dx) as f64) * inv).exp();
                    wsum += wgt;
                    let sy = (py as isize + dy) as usize;
                    let sx = (px as isize + dx) as usize;
                    for (ch, a) in acc.iter_mut().enumerate() {
                        *a += wgt * field.at(sy, sx, ch);
                    }
                }
            }
            for ch in 0..3 {
                let i = (y * w + x) * 3 + ch;
                sharp[i] = field.at(py, px, ch);
                blurred[i] = acc[ch] / wsum;
            }
        }
    }
    (
        Image::new(h, w, 3, sharp).expect("sharp shape"),
        Image::new(h, w, 3, blurred).expect("blurred shape"),
    )
}
