use std::str::FromStr;

use crate::error::{Error, Result};

/// Centered odd-sized K x K blur kernel. Tap (dy, dx) addresses signed
/// offsets from the center, each in [-(K-1)/2, (K-1)/2].
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    taps: Vec<f64>,
}

impl Kernel {
    pub fn new(size: usize, taps: Vec<f64>) -> Result<Self> {
        if size % 2 == 0 || size == 0 {
            return Err(Error::EvenKernelSize(size));
        }
        if taps.len() != size * size {
            return Err(Error::BadKernelData {
                size,
                len: taps.len(),
            });
        }
        if taps.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("kernel taps"));
        }
        Ok(Self { size, taps })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Half-width (K-1)/2.
    pub fn radius(&self) -> isize {
        (self.size as isize - 1) / 2
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn at(&self, dy: isize, dx: isize) -> f64 {
        let r = self.radius();
        debug_assert!(dy.abs() <= r && dx.abs() <= r);
        let row = (dy + r) as usize;
        let col = (dx + r) as usize;
        self.taps[row * self.size + col]
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Rescales so the taps sum to exactly one.
    pub fn normalized(&self) -> Result<Kernel> {
        let s = self.sum();
        if s.abs() < 1e-300 {
            return Err(Error::ZeroSumKernel);
        }
        let taps = self.taps.iter().map(|v| v / s).collect();
        Ok(Kernel {
            size: self.size,
            taps,
        })
    }

    /// Unit impulse: single center tap of one.
    pub fn delta(size: usize) -> Result<Kernel> {
        let mut taps = vec![0.0; size * size];
        let k = Kernel::new(size, taps.clone())?;
        let r = k.radius() as usize;
        taps[r * size + r] = 1.0;
        Kernel::new(size, taps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Disc,
    Gaussian,
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disc" => Ok(KernelKind::Disc),
            "gaussian" => Ok(KernelKind::Gaussian),
            other => Err(Error::BadScale(format!("unknown kernel kind {other:?}"))),
        }
    }
}

/// Smallest odd size that holds the kernel: the full disc for `Disc`
/// (radius `param`), six standard deviations for `Gaussian`.
pub fn min_kernel_size(kind: KernelKind, param: f64) -> usize {
    let span = match kind {
        KernelKind::Disc => 2.0 * param.ceil() + 1.0,
        KernelKind::Gaussian => (6.0 * param).ceil(),
    };
    let span = span.max(1.0) as usize;
    if span % 2 == 0 {
        span + 1
    } else {
        span
    }
}

/// Builds a normalized disc (param = radius, taps are subpixel-sampled
/// area fractions on a 16x16 grid per cell) or gaussian (param = sigma)
/// kernel of odd size `size`.
pub fn make_kernel(kind: KernelKind, param: f64, size: usize) -> Result<Kernel> {
    if !param.is_finite() || param <= 0.0 {
        return Err(Error::NonPositiveParam(param));
    }
    if size % 2 == 0 || size == 0 {
        return Err(Error::EvenKernelSize(size));
    }
    let min = min_kernel_size(kind, param);
    if size < min {
        return Err(Error::KernelTooSmall { size, min });
    }
    let r = (size as isize - 1) / 2;
    let mut taps = vec![0.0; size * size];
    match kind {
        KernelKind::Disc => {
            let r2 = param * param;
            const SUB: usize = 16;
            for dy in -r..=r {
                for dx in -r..=r {
                    let mut inside = 0usize;
                    for sy in 0..SUB {
                        let y = dy as f64 - 0.5 + (sy as f64 + 0.5) / SUB as f64;
                        for sx in 0..SUB {
                            let x = dx as f64 - 0.5 + (sx as f64 + 0.5) / SUB as f64;
                            if y * y + x * x <= r2 {
                                inside += 1;
                            }
                        }
                    }
                    let row = (dy + r) as usize;
                    let col = (dx + r) as usize;
                    taps[row * size + col] = inside as f64 / (SUB * SUB) as f64;
                }
            }
        }
        KernelKind::Gaussian => {
            let inv = 1.0 / (2.0 * param * param);
            for dy in -r..=r {
                for dx in -r..=r {
                    let d2 = (dy * dy + dx * dx) as f64;
                    let row = (dy + r) as usize;
                    let col = (dx + r) as usize;
                    taps[row * size + col] = (-d2 * inv).exp();
                }
            }
        }
    }
    Kernel::new(size, taps)?.normalized()
}

/// Spreads taps by an integer rate: tap (dy, dx) moves to (rate*dy, rate*dx)
/// on a (rate*(K-1)+1)-sized grid, zeros elsewhere. Tap count and sum are
/// unchanged; rate 1 is a copy.
pub fn dilate_kernel(k: &Kernel, rate: usize) -> Result<Kernel> {
    if rate == 0 {
        return Err(Error::NonPositiveParam(0.0));
    }
    let out_size = rate * (k.size() - 1) + 1;
    let r_in = k.radius();
    let r_out = (out_size as isize - 1) / 2;
    let mut taps = vec![0.0; out_size * out_size];
    for dy in -r_in..=r_in {
        for dx in -r_in..=r_in {
            let row = (rate as isize * dy + r_out) as usize;
            let col = (rate as isize * dx + r_out) as usize;
            taps[row * out_size + col] = k.at(dy, dx);
        }
    }
    Kernel::new(out_size, taps)
}
