use crate::error::{Error, Result};
use crate::image::Image;
use crate::parallel::for_each_chunk_mut;

/// Dense NHWC tensor of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub n: usize,
    pub h: usize,
    pub w: usize,
    pub c: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(n: usize, h: usize, w: usize, c: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || h == 0 || w == 0 || c == 0 || data.len() != n * h * w * c {
            return Err(Error::BadImageShape {
                height: h,
                width: w,
                channels: c,
                len: data.len(),
            });
        }
        Ok(Self { n, h, w, c, data })
    }

    pub fn zeros(n: usize, h: usize, w: usize, c: usize) -> Self {
        Self {
            n,
            h,
            w,
            c,
            data: vec![0.0; n * h * w * c],
        }
    }

    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.n, self.h, self.w, self.c)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn idx(&self, n: usize, y: usize, x: usize, c: usize) -> usize {
        ((n * self.h + y) * self.w + x) * self.c + c
    }

    pub fn at(&self, n: usize, y: usize, x: usize, c: usize) -> f64 {
        self.data[self.idx(n, y, x, c)]
    }

    /// Single-sample tensor from an image (N = 1).
    pub fn from_image(img: &Image) -> Tensor {
        Tensor {
            n: 1,
            h: img.height(),
            w: img.width(),
            c: img.channels(),
            data: img.data().to_vec(),
        }
    }

    /// Batch tensor from equally shaped images.
    pub fn from_images(imgs: &[Image]) -> Result<Tensor> {
        let first = imgs.first().ok_or(Error::BadChannelCount(0))?;
        let mut data = Vec::with_capacity(imgs.len() * first.data().len());
        for img in imgs {
            if !img.same_shape(first) {
                return Err(Error::ShapeMismatch {
                    expected: (first.height(), first.width(), first.channels()),
                    got: (img.height(), img.width(), img.channels()),
                });
            }
            data.extend_from_slice(img.data());
        }
        Tensor::new(imgs.len(), first.height(), first.width(), first.channels(), data)
    }

    /// Converts sample `n` back to an image.
    pub fn sample_to_image(&self, n: usize) -> Result<Image> {
        let per = self.h * self.w * self.c;
        Image::new(
            self.h,
            self.w,
            self.c,
            self.data[n * per..(n + 1) * per].to_vec(),
        )
    }
}

/// C = A (m x k) * B (k x n), rows of C computed independently with a
/// sequential reduction over k, so the result is identical at any thread
/// count.
pub(crate) fn matmul(a: &[f64], m: usize, k: usize, b: &[f64], n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    let mut out = vec![0.0; m * n];
    for_each_chunk_mut(&mut out, n, |i, row| {
        let arow = &a[i * k..(i + 1) * k];
        for (kk, aik) in arow.iter().enumerate() {
            if *aik == 0.0 {
                continue;
            }
            let brow = &b[kk * n..(kk + 1) * n];
            for (r, bv) in row.iter_mut().zip(brow) {
                *r += aik * bv;
            }
        }
    });
    out
}

/// C = A (m x n) * B^T where B is (k x n): C is m x k. Both operands are
/// read along contiguous rows.
pub(crate) fn matmul_bt(a: &[f64], m: usize, n: usize, b: &[f64], k: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), m * n);
    debug_assert_eq!(b.len(), k * n);
    let mut out = vec![0.0; m * k];
    for_each_chunk_mut(&mut out, k, |i, row| {
        let arow = &a[i * n..(i + 1) * n];
        for (kk, r) in row.iter_mut().enumerate() {
            let brow = &b[kk * n..(kk + 1) * n];
            let mut acc = 0.0;
            for (av, bv) in arow.iter().zip(brow) {
                acc += av * bv;
            }
            *r = acc;
        }
    });
    out
}

/// C += A^T * B for A (m x k), B (m x n): C is k x n. Rows of C are
/// independent; the reduction over m runs sequentially.
pub(crate) fn matmul_at_b_into(out: &mut [f64], a: &[f64], m: usize, k: usize, b: &[f64], n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), m * n);
    debug_assert_eq!(out.len(), k * n);
    for_each_chunk_mut(out, n, |kk, row| {
        for mm in 0..m {
            let av = a[mm * k + kk];
            if av == 0.0 {
                continue;
            }
            let brow = &b[mm * n..(mm + 1) * n];
            for (r, bv) in row.iter_mut().zip(brow) {
                *r += av * bv;
            }
        }
    });
}
