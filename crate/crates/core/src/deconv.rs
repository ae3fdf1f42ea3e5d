use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::image::Image;
use crate::kernel::Kernel;
use crate::nnls::{nnls_gram, NnlsSolution};
use crate::scale::{dilate_grid, upsample_grid_to, ScaleFactor};
use crate::spectral::{dft2, embed_kernel, idft2, wiener_inverse_kernel, Spectrum};

/// Circular convolution of each channel with a full-grid kernel, via the
/// frequency domain.
pub fn convolve_circular(x: &Image, kgrid: &Grid) -> Result<Image> {
    if x.height() != kgrid.height() || x.width() != kgrid.width() {
        return Err(Error::ShapeMismatch {
            expected: (x.height(), x.width(), x.channels()),
            got: (kgrid.height(), kgrid.width(), x.channels()),
        });
    }
    let kspec = dft2(kgrid);
    let mut planes = Vec::with_capacity(x.channels());
    for ch in 0..x.channels() {
        let mut spec = dft2(&x.channel(ch));
        multiply_into(&mut spec, &kspec);
        planes.push(idft2(&spec));
    }
    Image::from_channels(&planes)
}

fn multiply_into(a: &mut Spectrum, b: &Spectrum) {
    for (x, y) in a.data_mut().iter_mut().zip(b.data()) {
        *x *= *y;
    }
}

/// Circular convolution with a centered kernel.
pub fn convolve_kernel(x: &Image, k: &Kernel) -> Result<Image> {
    convolve_circular(x, &embed_kernel(k, x.height(), x.width())?)
}

/// Applies an inverse kernel: deconvolution is convolution with the
/// (full-grid) pseudo-inverse.
pub fn deconvolve(y: &Image, kdag: &Grid) -> Result<Image> {
    convolve_circular(y, kdag)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleMode {
    Upsample,
    Dilate,
}

/// Scales paired with blending weights for multi-scale deconvolution.
#[derive(Debug, Clone)]
pub struct BlendWeights {
    pub scales: Vec<ScaleFactor>,
    pub weights: Vec<f64>,
}

impl BlendWeights {
    pub fn new(scales: Vec<ScaleFactor>, weights: Vec<f64>) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::BadBlend("no scales".into()));
        }
        if scales.len() != weights.len() {
            return Err(Error::BadBlend(format!(
                "{} scales but {} weights",
                scales.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::BadBlend("non-finite weight".into()));
        }
        Ok(Self { scales, weights })
    }

    /// Uniform weights of one half per scale.
    pub fn uniform_half(scales: Vec<ScaleFactor>) -> Result<Self> {
        let weights = vec![0.5; scales.len()];
        Self::new(scales, weights)
    }
}

/// Realizes the inverse kernel of `k` at scale `s` on the target grid.
///
/// The scaled inverse kernel is periodic with period s * h0, so it can
/// only live on a grid it divides evenly: the source grid is taken as
/// round(target / s) per axis and the inverse kernel computed there, then
/// carried up. Upsample mode band-embeds the spectrum (the exact
/// realization, per-axis ratios H/h0 and W/w0); dilate mode spreads the
/// taps by an integer rate, which requires the rate to divide the target
/// extents.
pub fn realize_inverse_at_scale(
    k: &Kernel,
    eps: f64,
    s: ScaleFactor,
    out_h: usize,
    out_w: usize,
    mode: ScaleMode,
) -> Result<Grid> {
    match mode {
        ScaleMode::Upsample => {
            let h0 = source_len(out_h, s);
            let w0 = source_len(out_w, s);
            let kdag = wiener_inverse_kernel(k, eps, h0, w0)?;
            upsample_grid_to(&kdag, out_h, out_w)
        }
        ScaleMode::Dilate => {
            let rate = s
                .as_integer()
                .ok_or(Error::NonIntegerRate(s.value()))? as usize;
            if out_h % rate != 0 {
                return Err(Error::GridNotDivisible {
                    len: out_h,
                    rate,
                });
            }
            if out_w % rate != 0 {
                return Err(Error::GridNotDivisible {
                    len: out_w,
                    rate,
                });
            }
            let kdag = wiener_inverse_kernel(k, eps, out_h / rate, out_w / rate)?;
            dilate_grid(&kdag, rate)
        }
    }
}

/// Source-axis length whose s-fold upsample rounds back to `target`:
/// round(target / s).
pub(crate) fn source_len(target: usize, s: ScaleFactor) -> usize {
    (target as f64 / s.value()).round() as usize
}

/// Deconvolves `y` once per scale, in scale order.
pub fn per_scale_deconvolutions(
    y: &Image,
    k: &Kernel,
    eps: f64,
    scales: &[ScaleFactor],
    mode: ScaleMode,
) -> Result<Vec<Image>> {
    scales
        .iter()
        .map(|s| {
            let kdag = realize_inverse_at_scale(k, eps, *s, y.height(), y.width(), mode)?;
            deconvolve(y, &kdag)
        })
        .collect()
}

/// Weighted sum of per-scale deconvolutions of `y` by the inverse kernels
/// of `k` realized at each scale in `blend`. Accumulation follows blend
/// order, so results are reproducible bit for bit.
pub fn multiscale_deconvolve(
    y: &Image,
    k: &Kernel,
    eps: f64,
    blend: &BlendWeights,
    mode: ScaleMode,
) -> Result<Image> {
    let results = per_scale_deconvolutions(y, k, eps, &blend.scales, mode)?;
    let mut acc = Image::zeros(y.height(), y.width(), y.channels());
    for (r, wgt) in results.iter().zip(&blend.weights) {
        for (a, v) in acc.data_mut().iter_mut().zip(r.data()) {
            *a += wgt * v;
        }
    }
    Ok(acc)
}

/// Agreement score 1 - mean |1 - xhat/xs| over pixels where |xs| >= 1e-3;
/// pixels below the guard are excluded from the mean.
pub fn approx_accuracy(xhat: &Image, xs: &Image) -> Result<f64> {
    if !xhat.same_shape(xs) {
        return Err(Error::ShapeMismatch {
            expected: (xs.height(), xs.width(), xs.channels()),
            got: (xhat.height(), xhat.width(), xhat.channels()),
        });
    }
    let mut acc = 0.0;
    let mut count = 0usize;
    for (a, b) in xhat.data().iter().zip(xs.data()) {
        if b.abs() < 1e-3 {
            continue;
        }
        acc += (1.0 - a / b).abs();
        count += 1;
    }
    if count == 0 {
        return Err(Error::NoComparablePixels);
    }
    Ok(1.0 - acc / count as f64)
}

/// Fits nonnegative blending weights so the weighted sum of per-scale
/// results matches `target` in least squares.
pub fn fit_blend_weights(per_scale: &[Image], target: &Image) -> Result<NnlsSolution> {
    if per_scale.is_empty() {
        return Err(Error::BadBlend("no per-scale results".into()));
    }
    for r in per_scale {
        if !r.same_shape(target) {
            return Err(Error::ShapeMismatch {
                expected: (target.height(), target.width(), target.channels()),
                got: (r.height(), r.width(), r.channels()),
            });
        }
    }
    let n = per_scale.len();
    let mut gram = vec![0.0; n * n];
    let mut proj = vec![0.0; n];
    for i in 0..n {
        for j in i..n {
            let dot: f64 = per_scale[i]
                .data()
                .iter()
                .zip(per_scale[j].data())
                .map(|(a, b)| a * b)
                .sum();
            gram[i * n + j] = dot;
            gram[j * n + i] = dot;
        }
        proj[i] = per_scale[i]
            .data()
            .iter()
            .zip(target.data())
            .map(|(a, b)| a * b)
            .sum();
    }
    nnls_gram(&gram, n, &proj)
}
