use std::sync::{Mutex, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::Kernel;
use crate::parallel::for_each_chunk_mut;

/// 2-D discrete spectrum, row-major, DC bin at (0, 0). Forward transform
/// is unnormalized; the inverse carries the 1/(H*W) factor.
#[derive(Debug, Clone)]
pub struct Spectrum {
    height: usize,
    width: usize,
    data: Vec<Complex<f64>>,
}

impl Spectrum {
    pub fn new(height: usize, width: usize, data: Vec<Complex<f64>>) -> Result<Self> {
        if height == 0 || width == 0 || data.len() != height * width {
            return Err(Error::BadImageShape {
                height,
                width,
                channels: 1,
                len: data.len(),
            });
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            data: vec![Complex::new(0.0, 0.0); height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[Complex<f64>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<f64>] {
        &mut self.data
    }

    pub fn at(&self, u: usize, v: usize) -> Complex<f64> {
        self.data[u * self.width + v]
    }

    pub fn min_magnitude(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min)
    }
}

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn transpose(data: &[Complex<f64>], h: usize, w: usize) -> Vec<Complex<f64>> {
    let mut out = vec![Complex::new(0.0, 0.0); data.len()];
    for_each_chunk_mut(&mut out, h, |x, col| {
        for (y, v) in col.iter_mut().enumerate() {
            *v = data[y * w + x];
        }
    });
    out
}

fn fft_2d(mut buf: Vec<Complex<f64>>, h: usize, w: usize, forward: bool) -> Vec<Complex<f64>> {
    let (row_fft, col_fft) = {
        let mut p = planner().lock().expect("fft planner lock");
        if forward {
            (p.plan_fft_forward(w), p.plan_fft_forward(h))
        } else {
            (p.plan_fft_inverse(w), p.plan_fft_inverse(h))
        }
    };
    for_each_chunk_mut(&mut buf, w, |_, row| row_fft.process(row));
    let mut t = transpose(&buf, h, w);
    for_each_chunk_mut(&mut t, h, |_, col| col_fft.process(col));
    transpose(&t, w, h)
}

/// Forward 2-D DFT of a real plane.
pub fn dft2(grid: &Grid) -> Spectrum {
    let (h, w) = (grid.height(), grid.width());
    let buf: Vec<Complex<f64>> = grid.data().iter().map(|v| Complex::new(*v, 0.0)).collect();
    Spectrum {
        height: h,
        width: w,
        data: fft_2d(buf, h, w, true),
    }
}

/// Inverse 2-D DFT. Callers pass spectra of real signals (conjugate
/// symmetric), so the imaginary residue is rounding noise; it is checked
/// and discarded.
pub fn idft2(spec: &Spectrum) -> Grid {
    let (h, w) = (spec.height, spec.width);
    let data = fft_2d(spec.data.clone(), h, w, false);
    let scale = 1.0 / (h * w) as f64;
    let mut max_imag = 0.0f64;
    let mut out = Vec::with_capacity(data.len());
    for c in &data {
        max_imag = max_imag.max((c.im * scale).abs());
        out.push(c.re * scale);
    }
    assert!(
        max_imag < 1e-8,
        "idft2 imaginary residue {max_imag:.3e} exceeds 1e-8; spectrum was not conjugate symmetric"
    );
    Grid::new(h, w, out).expect("idft2 output shape")
}

/// Places a centered kernel on an H x W grid with its center tap at (0, 0)
/// and the remaining taps wrapped circularly.
pub fn embed_kernel(k: &Kernel, h: usize, w: usize) -> Result<Grid> {
    if k.size() > h || k.size() > w {
        return Err(Error::KernelExceedsGrid {
            size: k.size(),
            height: h,
            width: w,
        });
    }
    let r = k.radius();
    let mut out = vec![0.0; h * w];
    for dy in -r..=r {
        for dx in -r..=r {
            let y = dy.rem_euclid(h as isize) as usize;
            let x = dx.rem_euclid(w as isize) as usize;
            out[y * w + x] = k.at(dy, dx);
        }
    }
    Grid::new(h, w, out)
}

/// Wiener pseudo-inverse spectrum conj(S) / (|S|^2 + eps). With eps = 0
/// this is the direct reciprocal, allowed only when no bin is near zero.
pub fn wiener_spectrum(kspec: &Spectrum, eps: f64) -> Result<Spectrum> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::NonPositiveParam(eps));
    }
    if eps == 0.0 {
        let min_mag = kspec.min_magnitude();
        if min_mag <= 1e-12 {
            return Err(Error::SingularSpectrum { min_mag });
        }
    }
    let data = kspec
        .data
        .iter()
        .map(|s| s.conj() / (s.norm_sqr() + eps))
        .collect();
    Spectrum::new(kspec.height, kspec.width, data)
}

/// Spatial Wiener inverse of a full-grid kernel.
pub fn wiener_inverse_grid(kgrid: &Grid, eps: f64) -> Result<Grid> {
    Ok(idft2(&wiener_spectrum(&dft2(kgrid), eps)?))
}

/// Spatial Wiener inverse of a centered kernel on an H x W grid.
pub fn wiener_inverse_kernel(k: &Kernel, eps: f64, h: usize, w: usize) -> Result<Grid> {
    wiener_inverse_grid(&embed_kernel(k, h, w)?, eps)
}
