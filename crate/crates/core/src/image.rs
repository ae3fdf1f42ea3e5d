use crate::error::{Error, Result};
use crate::grid::Grid;

/// H x W x C raster, row-major with interleaved channels, values nominally
/// in [0, 1]. Intermediate results may leave the range; clamping happens
/// only when quantizing for file output.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::BadChannelCount(channels));
        }
        if height == 0 || width == 0 || data.len() != height * width * channels {
            return Err(Error::BadImageShape {
                height,
                width,
                channels,
                len: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("image data"));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        Self {
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn at(&self, y: usize, x: usize, ch: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + ch]
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.height == other.height
            && self.width == other.width
            && self.channels == other.channels
    }

    /// Extracts one channel as a plane.
    pub fn channel(&self, ch: usize) -> Grid {
        let mut out = vec![0.0; self.height * self.width];
        for (i, v) in out.iter_mut().enumerate() {
            *v = self.data[i * self.channels + ch];
        }
        Grid::new(self.height, self.width, out).expect("channel plane shape")
    }

    /// Rebuilds an image from per-channel planes of equal size.
    pub fn from_channels(planes: &[Grid]) -> Result<Image> {
        let channels = planes.len();
        if channels != 1 && channels != 3 {
            return Err(Error::BadChannelCount(channels));
        }
        let (h, w) = (planes[0].height(), planes[0].width());
        for p in planes {
            if p.height() != h || p.width() != w {
                return Err(Error::ShapeMismatch {
                    expected: (h, w, channels),
                    got: (p.height(), p.width(), channels),
                });
            }
        }
        let mut data = vec![0.0; h * w * channels];
        for (ch, p) in planes.iter().enumerate() {
            for (i, v) in p.data().iter().enumerate() {
                data[i * channels + ch] = *v;
            }
        }
        Image::new(h, w, channels, data)
    }

    /// Replicates a single-channel image to three channels; three-channel
    /// input is returned unchanged.
    pub fn to_rgb(&self) -> Image {
        if self.channels == 3 {
            return self.clone();
        }
        let mut data = Vec::with_capacity(self.data.len() * 3);
        for v in &self.data {
            data.extend_from_slice(&[*v, *v, *v]);
        }
        Image {
            height: self.height,
            width: self.width,
            channels: 3,
            data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricName {
    PsnrDb,
    Mae,
    ApproxAccuracy,
}

impl MetricName {
    pub fn key(&self) -> &'static str {
        match self {
            MetricName::PsnrDb => "psnr_db",
            MetricName::Mae => "mae",
            MetricName::ApproxAccuracy => "approx_accuracy",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Metric {
    pub name: MetricName,
    pub value: f64,
}

fn check_shapes(a: &Image, b: &Image) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch {
            expected: (a.height, a.width, a.channels),
            got: (b.height, b.width, b.channels),
        });
    }
    Ok(())
}

/// Peak signal-to-noise ratio in dB against a unit peak, over all samples
/// jointly. Identical inputs return +inf.
pub fn psnr_db(a: &Image, b: &Image) -> Result<f64> {
    check_shapes(a, b)?;
    let mut acc = 0.0;
    for (x, y) in a.data.iter().zip(&b.data) {
        let d = x - y;
        acc += d * d;
    }
    let mse = acc / a.data.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-10.0 * mse.log10())
}

/// Mean absolute error over all samples jointly.
pub fn mae(a: &Image, b: &Image) -> Result<f64> {
    check_shapes(a, b)?;
    let acc: f64 = a.data.iter().zip(&b.data).map(|(x, y)| (x - y).abs()).sum();
    Ok(acc / a.data.len() as f64)
}
