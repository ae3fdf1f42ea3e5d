use std::fmt;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::Kernel;
use crate::spectral::{dft2, idft2, Spectrum};

/// Upsampling factor s >= 1 kept as a reduced rational so target sizes are
/// exact. The per-axis ratio actually realized is round(s*N)/N, which can
/// differ from num/den after rounding; [`ScaleFactor::effective_ratio`]
/// reports it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleFactor {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl ScaleFactor {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num == 0 {
            return Err(Error::BadScale(format!("{num}/{den}")));
        }
        if num < den {
            return Err(Error::BadScale(format!(
                "{num}/{den} is a downscale; scale factors must be >= 1"
            )));
        }
        let g = gcd(num, den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub fn of_int(s: u64) -> Result<Self> {
        Self::new(s, 1)
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn as_integer(&self) -> Option<u64> {
        (self.den == 1).then_some(self.num)
    }

    /// Target length for an axis of length n: round(s * n), half up.
    pub fn scaled_len(&self, n: usize) -> usize {
        let num = self.num as u128 * n as u128;
        let den = self.den as u128;
        ((2 * num + den) / (2 * den)) as usize
    }

    /// Ratio actually realized on an axis of length n after rounding.
    pub fn effective_ratio(&self, n: usize) -> f64 {
        self.scaled_len(n) as f64 / n as f64
    }
}

impl fmt::Display for ScaleFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Parses a decimal scale such as "3", "3.5", or "7/2" into an exact
/// rational.
pub fn parse_scale(s: &str) -> Result<ScaleFactor> {
    let bad = || Error::BadScale(format!("cannot parse scale {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let num: u64 = n.trim().parse().map_err(|_| bad())?;
        let den: u64 = d.trim().parse().map_err(|_| bad())?;
        return ScaleFactor::new(num, den);
    }
    match s.split_once('.') {
        None => ScaleFactor::of_int(s.trim().parse().map_err(|_| bad())?),
        Some((int, frac)) => {
            if frac.is_empty() || frac.len() > 9 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let int: u64 = if int.is_empty() {
                0
            } else {
                int.trim().parse().map_err(|_| bad())?
            };
            let den = 10u64.pow(frac.len() as u32);
            let frac: u64 = frac.parse().map_err(|_| bad())?;
            let num = int
                .checked_mul(den)
                .and_then(|v| v.checked_add(frac))
                .ok_or_else(bad)?;
            ScaleFactor::new(num, den)
        }
    }
}

/// Per-axis copy plan from a source bin to destination bins. Non-Nyquist
/// bins map 1:1 by signed frequency; the Nyquist bin of an even source
/// axis splits half and half between +N/2 and -N/2 on the destination.
fn axis_map(n_src: usize, n_dst: usize) -> Vec<(usize, usize, f64)> {
    debug_assert!(n_dst >= n_src);
    let mut map = Vec::with_capacity(n_src + 1);
    for u in 0..n_src {
        if n_src % 2 == 0 && u == n_src / 2 {
            map.push((u, n_src / 2, 0.5));
            map.push((u, n_dst - n_src / 2, 0.5));
        } else {
            let signed = if u < n_src.div_ceil(2) {
                u as isize
            } else {
                u as isize - n_src as isize
            };
            let dst = signed.rem_euclid(n_dst as isize) as usize;
            map.push((u, dst, 1.0));
        }
    }
    map
}

/// Copies a spectrum into the centered band of a larger spectrum, zeros
/// elsewhere. The DC bin is preserved exactly. When source and target
/// sizes match this is the identity (the Nyquist halves recombine).
pub(crate) fn band_embed(spec: &Spectrum, out_h: usize, out_w: usize) -> Spectrum {
    let (h, w) = (spec.height(), spec.width());
    assert!(out_h >= h && out_w >= w, "band_embed cannot shrink");
    let ymap = axis_map(h, out_h);
    let xmap = axis_map(w, out_w);
    let src = spec.data();
    let mut out = Spectrum::zeros(out_h, out_w);
    let dst = out.data_mut();
    for (u, du, wy) in &ymap {
        for (v, dv, wx) in &xmap {
            dst[du * out_w + dv] += src[u * w + v] * (wy * wx);
        }
    }
    out
}

/// Frequency-domain zero-pad upsampling: the spectrum keeps its centered
/// band and gains zeros outside, growing each axis to round(s * N).
pub fn zero_pad_upsample(spec: &Spectrum, s: ScaleFactor) -> Spectrum {
    band_embed(spec, s.scaled_len(spec.height()), s.scaled_len(spec.width()))
}

/// Scales an inverse kernel up by s on its own grid. Zero-padding the
/// spectrum leaves bin values unchanged while the grid grows by the
/// effective ratio per axis, which is exactly the 1/s^2 normalization the
/// scaled inverse kernel carries; no explicit factor appears. The total
/// sum (DC bin) is preserved bit for bit.
pub fn upsample_inverse_kernel(kdag: &Grid, s: ScaleFactor) -> Grid {
    idft2(&zero_pad_upsample(&dft2(kdag), s))
}

/// Zero-pad upsampling with the target grid named directly (per-axis
/// ratios out_h/H and out_w/W). The total sum is preserved, so this
/// carries an inverse kernel between grids without any explicit factor
/// and leaves a unit-mass blur kernel unit-mass.
pub fn upsample_grid_to(g: &Grid, out_h: usize, out_w: usize) -> Result<Grid> {
    if out_h < g.height() || out_w < g.width() {
        return Err(Error::BadScale(format!(
            "target {out_h}x{out_w} smaller than source {}x{}",
            g.height(),
            g.width()
        )));
    }
    Ok(idft2(&band_embed(&dft2(g), out_h, out_w)))
}

/// Amplitude-preserving sinc interpolation of a plane: the result samples
/// the band-limited interpolant, so values match the source at stride-s
/// positions and the total intensity grows by the product of the per-axis
/// ratios (s^2 for square grids).
pub fn sinc_upsample_grid(g: &Grid, s: ScaleFactor) -> Grid {
    let gain = s.effective_ratio(g.height()) * s.effective_ratio(g.width());
    upsample_inverse_kernel(g, s).scaled(gain)
}

/// Spreads a wrapped full-grid kernel by an integer rate: the sample at
/// wrapped offset (y, x) moves to (rate*y, rate*x) on a grid rate times
/// larger. The spectrum of the result replicates the source spectrum.
pub fn dilate_grid(g: &Grid, rate: usize) -> Result<Grid> {
    if rate == 0 {
        return Err(Error::NonPositiveParam(0.0));
    }
    let (h, w) = (g.height(), g.width());
    let (oh, ow) = (h * rate, w * rate);
    let mut out = vec![0.0; oh * ow];
    for y in 0..h {
        for x in 0..w {
            out[(rate * y) * ow + rate * x] = g.at(y, x);
        }
    }
    Grid::new(oh, ow, out)
}

fn lanczos_window(t: f64, a: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    if t.abs() >= a {
        return 0.0;
    }
    let pt = std::f64::consts::PI * t;
    a * (pt.sin() * (pt / a).sin()) / (pt * pt)
}

/// Windowed-sinc resampling of a centered kernel to size round(s * K),
/// forced odd so the center stays on a tap. Output tap (dy, dx) samples
/// the interpolant at (dy/s, dx/s). The result is not renormalized.
pub fn lanczos_resample(k: &Kernel, s: f64, window: usize) -> Result<Kernel> {
    if !s.is_finite() || s < 1.0 {
        return Err(Error::BadScale(format!("lanczos scale {s}")));
    }
    if window == 0 {
        return Err(Error::NonPositiveParam(0.0));
    }
    let a = window as f64;
    let in_size = k.size();
    let mut out_size = (s * in_size as f64).round() as usize;
    if out_size % 2 == 0 {
        out_size += 1;
    }
    let r_in = k.radius();
    let r_out = (out_size as isize - 1) / 2;
    // Per-axis weights: rows indexed by output offset, columns by input
    // offset, both shifted to be nonnegative.
    let mut weights = vec![0.0; out_size * in_size];
    for o in -r_out..=r_out {
        let t = o as f64 / s;
        for i in -r_in..=r_in {
            weights[(o + r_out) as usize * in_size + (i + r_in) as usize] =
                lanczos_window(t - i as f64, a);
        }
    }
    let mut taps = vec![0.0; out_size * out_size];
    for oy in 0..out_size {
        for ox in 0..out_size {
            let mut acc = 0.0;
            for iy in 0..in_size {
                let wy = weights[oy * in_size + iy];
                if wy == 0.0 {
                    continue;
                }
                for ix in 0..in_size {
                    acc += wy * weights[ox * in_size + ix] * k.taps()[iy * in_size + ix];
                }
            }
            taps[oy * out_size + ox] = acc;
        }
    }
    Kernel::new(out_size, taps)
}
