use crate::deconv::{
    approx_accuracy, convolve_circular, deconvolve, fit_blend_weights, per_scale_deconvolutions,
    realize_inverse_at_scale, source_len, ScaleMode,
};
use crate::error::Result;
use crate::grid::Grid;
use crate::image::{psnr_db, Image};
use crate::kernel::{make_kernel, min_kernel_size, Kernel, KernelKind};
use crate::scale::{lanczos_resample, upsample_grid_to, ScaleFactor};
use crate::spectral::{embed_kernel, wiener_inverse_grid, wiener_inverse_kernel};
use crate::synth::bandlimited_field;

/// How the blur kernel for a validation run is carried to the image grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resample {
    /// Windowed-sinc (Lanczos a=3) tap resampling. Leaves genuine
    /// out-of-band leakage, so the two deconvolution paths differ by a
    /// finite, paper-like amount.
    Lanczos,
    /// Zero-pad (ideal sinc) resampling on the source grid. The scale
    /// commutativity identity is exact for this construction, so the two
    /// paths agree to machine precision.
    Sinc,
}

#[derive(Debug, Clone)]
pub struct ValidationConfig {
    pub kind: KernelKind,
    pub param: f64,
    /// Kernel tap-grid size; None picks the minimum for the kind/param.
    pub size: Option<usize>,
    pub s: ScaleFactor,
    /// Image grid the blurred scene lives on. The inverse kernel's source
    /// grid is round(grid / s) per axis; the dilation experiment needs an
    /// integer rate that divides both extents.
    pub grid: (usize, usize),
    pub eps: f64,
    pub seed: u64,
    pub resample: Resample,
}

impl ValidationConfig {
    fn kernel(&self) -> Result<Kernel> {
        let size = self.size.unwrap_or(min_kernel_size(self.kind, self.param));
        make_kernel(self.kind, self.param, size)
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub image_h: usize,
    pub image_w: usize,
    pub psnr_db: f64,
}

/// Builds the blurred test image and the full-grid blur kernel shared by
/// both validation experiments. The blur is the tap kernel carried to
/// scale s on the image grid.
fn blurred_scene(cfg: &ValidationConfig) -> Result<(Kernel, Grid, Image)> {
    let k = cfg.kernel()?;
    let (h, w) = cfg.grid;
    let blur = match cfg.resample {
        Resample::Lanczos => {
            let up = lanczos_resample(&k, cfg.s.value(), 3)?.normalized()?;
            embed_kernel(&up, h, w)?
        }
        Resample::Sinc => {
            let h0 = source_len(h, cfg.s);
            let w0 = source_len(w, cfg.s);
            let up = upsample_grid_to(&embed_kernel(&k, h0, w0)?, h, w)?;
            up.normalized()?
        }
    };
    let x = bandlimited_field(h, w, 1, 0.15, 0.15, 0.95, cfg.seed);
    let y = convolve_circular(&x, &blur)?;
    Ok((k, blur, y))
}

/// Scale commutativity: deconvolving with the inverse of the upsampled
/// blur kernel versus the upsampled inverse of the source kernel.
pub fn commutativity_check(cfg: &ValidationConfig) -> Result<ValidationReport> {
    let (k, blur, y) = blurred_scene(cfg)?;
    let (h, w) = cfg.grid;
    let direct = wiener_inverse_grid(&blur, cfg.eps)?;
    let ya = deconvolve(&y, &direct)?;
    let lifted = realize_inverse_at_scale(&k, cfg.eps, cfg.s, h, w, ScaleMode::Upsample)?;
    let yb = deconvolve(&y, &lifted)?;
    Ok(ValidationReport {
        image_h: h,
        image_w: w,
        psnr_db: psnr_db(&ya, &yb)?,
    })
}

/// Dilation equivalence: deconvolving with the dilated inverse kernel
/// versus the upsampled inverse kernel. Requires an integer scale whose
/// rate divides both image extents.
pub fn dilation_check(cfg: &ValidationConfig) -> Result<ValidationReport> {
    let (k, _, y) = blurred_scene(cfg)?;
    let (h, w) = cfg.grid;
    let up = realize_inverse_at_scale(&k, cfg.eps, cfg.s, h, w, ScaleMode::Upsample)?;
    let di = realize_inverse_at_scale(&k, cfg.eps, cfg.s, h, w, ScaleMode::Dilate)?;
    let yu = deconvolve(&y, &up)?;
    let yd = deconvolve(&y, &di)?;
    Ok(ValidationReport {
        image_h: h,
        image_w: w,
        psnr_db: psnr_db(&yu, &yd)?,
    })
}

#[derive(Debug, Clone)]
pub struct BracketConfig {
    pub kind: KernelKind,
    pub param: f64,
    pub size: Option<usize>,
    /// The scale the image was actually blurred at.
    pub target: ScaleFactor,
    /// Scales whose inverse-kernel deconvolutions are blended.
    pub brackets: Vec<ScaleFactor>,
    /// Image grid (the blur lives directly on it).
    pub grid: (usize, usize),
    pub eps: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct BracketReport {
    pub uniform_accuracy: f64,
    pub fitted_accuracy: f64,
    pub fitted_weights: Vec<f64>,
    pub nnls_kkt: f64,
}

/// Multi-scale approximation: an image blurred at a target scale is
/// deconvolved with inverse kernels at bracketing scales; the blended
/// results are scored against the target-scale deconvolution.
pub fn bracket_check(cfg: &BracketConfig) -> Result<BracketReport> {
    let size = cfg.size.unwrap_or(min_kernel_size(cfg.kind, cfg.param));
    let k = make_kernel(cfg.kind, cfg.param, size)?;
    let (h, w) = cfg.grid;
    let up = lanczos_resample(&k, cfg.target.value(), 3)?.normalized()?;
    let blur = embed_kernel(&up, h, w)?;
    let x = bandlimited_field(h, w, 1, 0.15, 0.15, 0.95, cfg.seed);
    let y = convolve_circular(&x, &blur)?;

    let target_kdag =
        realize_inverse_at_scale(&k, cfg.eps, cfg.target, h, w, ScaleMode::Upsample)?;
    let xs = deconvolve(&y, &target_kdag)?;

    let results = per_scale_deconvolutions(&y, &k, cfg.eps, &cfg.brackets, ScaleMode::Upsample)?;
    let mut uniform = Image::zeros(h, w, 1);
    for r in &results {
        for (a, v) in uniform.data_mut().iter_mut().zip(r.data()) {
            *a += 0.5 * v;
        }
    }
    let fit = fit_blend_weights(&results, &xs)?;
    let mut fitted = Image::zeros(h, w, 1);
    for (r, wgt) in results.iter().zip(&fit.weights) {
        for (a, v) in fitted.data_mut().iter_mut().zip(r.data()) {
            *a += wgt * v;
        }
    }
    Ok(BracketReport {
        uniform_accuracy: approx_accuracy(&uniform, &xs)?,
        fitted_accuracy: approx_accuracy(&fitted, &xs)?,
        fitted_weights: fit.weights,
        nnls_kkt: fit.kkt,
    })
}

/// Single-kernel blur/deblur round trip used by smoke tests: returns
/// (psnr blurred vs sharp, psnr deblurred vs sharp).
pub fn roundtrip_gain(
    kind: KernelKind,
    param: f64,
    grid: (usize, usize),
    eps: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    let k = make_kernel(kind, param, min_kernel_size(kind, param))?;
    let (h, w) = grid;
    let x = bandlimited_field(h, w, 1, 0.15, 0.15, 0.95, seed);
    let y = convolve_circular(&x, &embed_kernel(&k, h, w)?)?;
    let kdag = wiener_inverse_kernel(&k, eps, h, w)?;
    let xhat = deconvolve(&y, &kdag)?;
    Ok((psnr_db(&y, &x)?, psnr_db(&xhat, &x)?))
}
