use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image data length {len} does not match {height}x{width}x{channels}")]
    BadImageShape {
        height: usize,
        width: usize,
        channels: usize,
        len: usize,
    },
    #[error("channel count {0} not supported (expected 1 or 3)")]
    BadChannelCount(usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("kernel size {0} must be odd")]
    EvenKernelSize(usize),
    #[error("kernel size {size} too small for this kernel (minimum {min})")]
    KernelTooSmall { size: usize, min: usize },
    #[error("kernel parameter {0} must be positive")]
    NonPositiveParam(f64),
    #[error("kernel data length {len} does not match size {size}")]
    BadKernelData { size: usize, len: usize },
    #[error("kernel sums to zero, cannot normalize")]
    ZeroSumKernel,
    #[error("kernel of size {size} does not fit a {height}x{width} grid")]
    KernelExceedsGrid {
        size: usize,
        height: usize,
        width: usize,
    },
    #[error("kernel spectrum has near-zero magnitude {min_mag:.3e}; eps = 0 not allowed")]
    SingularSpectrum { min_mag: f64 },
    #[error("bad scale factor: {0}")]
    BadScale(String),
    #[error("dilation requires an integer rate, got {0}")]
    NonIntegerRate(f64),
    #[error("dilation rate {rate} does not divide grid extent {len}")]
    GridNotDivisible { len: usize, rate: usize },
    #[error("bad blend: {0}")]
    BadBlend(String),
    #[error("no pixels left to compare after exclusion guard")]
    NoComparablePixels,
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },
    #[error("malformed netpbm header: {0}")]
    MalformedHeader(String),
    #[error("unsupported netpbm magic {0:?} (only P5 and P6)")]
    UnsupportedMagic(String),
    #[error("unsupported netpbm maxval {0} (only 255 and 65535)")]
    UnsupportedMaxval(u32),
    #[error("netpbm payload truncated: expected {expected} bytes, got {got}")]
    TruncatedPayload { expected: usize, got: usize },
    #[error("weight file has bad magic")]
    WeightsBadMagic,
    #[error("weight file header: {0}")]
    WeightsHeader(String),
    #[error("weight file payload truncated: expected {expected} bytes, got {got}")]
    WeightsTruncated { expected: usize, got: usize },
    #[error("weight shapes do not match the declared architecture: {0}")]
    WeightsShapeMismatch(String),
    #[error("spatial dims {height}x{width} must be positive and divisible by {divisor}")]
    BadSpatialDims {
        height: usize,
        width: usize,
        divisor: usize,
    },
    #[error("bad network config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
