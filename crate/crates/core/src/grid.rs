use crate::error::{Error, Result};

/// A real-valued H x W plane, row-major. Used for full-grid kernels
/// (blur kernels embedded with their center at the origin, inverse
/// kernels) and single image channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
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
            data: vec![0.0; height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn at(&self, y: usize, x: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Divides by the current sum so the grid sums to one.
    pub fn normalized(&self) -> Result<Grid> {
        let s = self.sum();
        if s.abs() < 1e-300 {
            return Err(Error::ZeroSumKernel);
        }
        let data = self.data.iter().map(|v| v / s).collect();
        Ok(Grid {
            height: self.height,
            width: self.width,
            data,
        })
    }

    pub fn scaled(&self, factor: f64) -> Grid {
        Grid {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }
}
