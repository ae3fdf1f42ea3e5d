//! Layer primitives and their gradients. Convolutions run as im2col plus
//! a small GEMM, one sample at a time; all gradient reductions accumulate
//! per sample in fixed index order.

use crate::error::{Error, Result};
use crate::parallel::for_each_chunk_mut;
use crate::tensor::{matmul, matmul_at_b_into, matmul_bt, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    /// Zero-fill so the output is ceil(input / stride) per axis, split
    /// symmetrically with the extra pixel on the trailing side.
    Same,
    /// No padding; the window must fit.
    Valid,
}

#[derive(Debug, Clone, Copy)]
pub struct ConvGeom {
    pub kh: usize,
    pub kw: usize,
    pub stride: usize,
    pub dilation: usize,
    pub padding: Padding,
}

impl ConvGeom {
    /// Output spatial size and leading pad for one axis.
    fn axis(&self, len: usize, k: usize) -> Result<(usize, usize)> {
        let span = (k - 1) * self.dilation + 1;
        match self.padding {
            Padding::Same => {
                let out = len.div_ceil(self.stride);
                let total = ((out - 1) * self.stride + span).saturating_sub(len);
                Ok((out, total / 2))
            }
            Padding::Valid => {
                if len < span {
                    return Err(Error::BadConfig(format!(
                        "valid conv window extent {span} exceeds input extent {len}"
                    )));
                }
                Ok(((len - span) / self.stride + 1, 0))
            }
        }
    }

    pub fn out_dims(&self, h: usize, w: usize) -> Result<(usize, usize, usize, usize)> {
        let (oh, pad_top) = self.axis(h, self.kh)?;
        let (ow, pad_left) = self.axis(w, self.kw)?;
        Ok((oh, ow, pad_top, pad_left))
    }
}

/// Gathers conv patches of sample `s` into a (oh*ow) x (kh*kw*c) matrix,
/// zero-filled where the window leaves the input.
fn im2col(
    x: &Tensor,
    s: usize,
    geom: &ConvGeom,
    oh: usize,
    ow: usize,
    pad_top: usize,
    pad_left: usize,
) -> Vec<f64> {
    let (h, w, c) = (x.h, x.w, x.c);
    let klen = geom.kh * geom.kw * c;
    let mut cols = vec![0.0; oh * ow * klen];
    let base = s * h * w * c;
    for_each_chunk_mut(&mut cols, klen, |r, patch| {
        let oy = r / ow;
        let ox = r % ow;
        for ky in 0..geom.kh {
            let y = (oy * geom.stride + ky * geom.dilation) as isize - pad_top as isize;
            if y < 0 || y >= h as isize {
                continue;
            }
            for kx in 0..geom.kw {
                let xx = (ox * geom.stride + kx * geom.dilation) as isize - pad_left as isize;
                if xx < 0 || xx >= w as isize {
                    continue;
                }
                let src = base + (y as usize * w + xx as usize) * c;
                let dst = (ky * geom.kw + kx) * c;
                patch[dst..dst + c].copy_from_slice(&x.data[src..src + c]);
            }
        }
    });
    cols
}

/// Scatters patch-gradient columns back onto the input gradient of
/// sample `s` (the transpose of im2col).
fn col2im_accumulate(
    dx: &mut Tensor,
    s: usize,
    dcols: &[f64],
    geom: &ConvGeom,
    ow: usize,
    pad_top: usize,
    pad_left: usize,
) {
    let (h, w, c) = (dx.h, dx.w, dx.c);
    let klen = geom.kh * geom.kw * c;
    let base = s * h * w * c;
    for (r, patch) in dcols.chunks_exact(klen).enumerate() {
        let oy = r / ow;
        let ox = r % ow;
        for ky in 0..geom.kh {
            let y = (oy * geom.stride + ky * geom.dilation) as isize - pad_top as isize;
            if y < 0 || y >= h as isize {
                continue;
            }
            for kx in 0..geom.kw {
                let xx = (ox * geom.stride + kx * geom.dilation) as isize - pad_left as isize;
                if xx < 0 || xx >= w as isize {
                    continue;
                }
                let dst = base + (y as usize * w + xx as usize) * c;
                let src = (ky * geom.kw + kx) * c;
                for i in 0..c {
                    dx.data[dst + i] += patch[src + i];
                }
            }
        }
    }
}

/// Convolution with taps laid out (kh, kw, in_c, out_c) and one bias per
/// output channel.
pub fn conv2d(
    x: &Tensor,
    taps: &[f64],
    bias: &[f64],
    out_c: usize,
    geom: &ConvGeom,
) -> Result<Tensor> {
    let klen = geom.kh * geom.kw * x.c;
    if taps.len() != klen * out_c || bias.len() != out_c {
        return Err(Error::BadConfig(format!(
            "conv tap/bias lengths {}/{} do not match {}x{}x{}->{}",
            taps.len(),
            bias.len(),
            geom.kh,
            geom.kw,
            x.c,
            out_c
        )));
    }
    let (oh, ow, pad_top, pad_left) = geom.out_dims(x.h, x.w)?;
    let mut out = Tensor::zeros(x.n, oh, ow, out_c);
    let per = oh * ow * out_c;
    for s in 0..x.n {
        let cols = im2col(x, s, geom, oh, ow, pad_top, pad_left);
        let prod = matmul(&cols, oh * ow, klen, taps, out_c);
        let dst = &mut out.data[s * per..(s + 1) * per];
        for (row, pr) in dst.chunks_exact_mut(out_c).zip(prod.chunks_exact(out_c)) {
            for ((r, p), b) in row.iter_mut().zip(pr).zip(bias) {
                *r = p + b;
            }
        }
    }
    Ok(out)
}

/// Gradient of [`conv2d`] with respect to its input.
pub fn conv2d_backward_input(
    dy: &Tensor,
    taps: &[f64],
    in_dims: (usize, usize, usize),
    geom: &ConvGeom,
) -> Result<Tensor> {
    let (h, w, in_c) = in_dims;
    let klen = geom.kh * geom.kw * in_c;
    let out_c = dy.c;
    debug_assert_eq!(taps.len(), klen * out_c);
    let (oh, ow, pad_top, pad_left) = geom.out_dims(h, w)?;
    debug_assert_eq!((oh, ow), (dy.h, dy.w));
    let mut dx = Tensor::zeros(dy.n, h, w, in_c);
    let per = oh * ow * out_c;
    for s in 0..dy.n {
        let dyslice = &dy.data[s * per..(s + 1) * per];
        let dcols = matmul_bt(dyslice, oh * ow, out_c, taps, klen);
        col2im_accumulate(&mut dx, s, &dcols, geom, ow, pad_top, pad_left);
    }
    Ok(dx)
}

/// Gradients of [`conv2d`] with respect to taps and bias, accumulated
/// sample by sample in batch order.
pub fn conv2d_backward_params(
    x: &Tensor,
    dy: &Tensor,
    out_c: usize,
    geom: &ConvGeom,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let klen = geom.kh * geom.kw * x.c;
    let (oh, ow, pad_top, pad_left) = geom.out_dims(x.h, x.w)?;
    let mut dtaps = vec![0.0; klen * out_c];
    let mut dbias = vec![0.0; out_c];
    let per = oh * ow * out_c;
    for s in 0..x.n {
        let cols = im2col(x, s, geom, oh, ow, pad_top, pad_left);
        let dyslice = &dy.data[s * per..(s + 1) * per];
        matmul_at_b_into(&mut dtaps, &cols, oh * ow, klen, dyslice, out_c);
        for row in dyslice.chunks_exact(out_c) {
            for (b, v) in dbias.iter_mut().zip(row) {
                *b += v;
            }
        }
    }
    Ok((dtaps, dbias))
}

/// Transposed convolution: exactly the input-gradient of a stride-s
/// same-padded conv2d, plus a bias. Taps are stored in the associated
/// down-convolution's layout (kh, kw, out_c, in_c); output spatial size
/// is stride times the input's.
pub fn conv_transpose2d(
    u: &Tensor,
    taps: &[f64],
    bias: &[f64],
    out_c: usize,
    kh: usize,
    kw: usize,
    stride: usize,
) -> Result<Tensor> {
    if bias.len() != out_c || taps.len() != kh * kw * out_c * u.c {
        return Err(Error::BadConfig(format!(
            "tconv tap/bias lengths {}/{} do not match {}x{}x{}->{}",
            taps.len(),
            bias.len(),
            kh,
            kw,
            u.c,
            out_c
        )));
    }
    let geom = ConvGeom {
        kh,
        kw,
        stride,
        dilation: 1,
        padding: Padding::Same,
    };
    let mut v = conv2d_backward_input(u, taps, (u.h * stride, u.w * stride, out_c), &geom)?;
    for row in v.data.chunks_exact_mut(out_c) {
        for (r, b) in row.iter_mut().zip(bias) {
            *r += b;
        }
    }
    Ok(v)
}

/// Input gradient of [`conv_transpose2d`]: the forward pass of the
/// associated down-convolution.
pub fn conv_transpose2d_backward_input(
    dv: &Tensor,
    taps: &[f64],
    in_c: usize,
    kh: usize,
    kw: usize,
    stride: usize,
) -> Result<Tensor> {
    let geom = ConvGeom {
        kh,
        kw,
        stride,
        dilation: 1,
        padding: Padding::Same,
    };
    conv2d(dv, taps, &vec![0.0; in_c], in_c, &geom)
}

/// Tap and bias gradients of [`conv_transpose2d`] (the down-conv's tap
/// gradient with input and output-grad roles swapped).
pub fn conv_transpose2d_backward_params(
    u: &Tensor,
    dv: &Tensor,
    kh: usize,
    kw: usize,
    stride: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let geom = ConvGeom {
        kh,
        kw,
        stride,
        dilation: 1,
        padding: Padding::Same,
    };
    let (dtaps, _) = conv2d_backward_params(dv, u, u.c, &geom)?;
    let out_c = dv.c;
    let mut dbias = vec![0.0; out_c];
    for row in dv.data.chunks_exact(out_c) {
        for (b, v) in dbias.iter_mut().zip(row) {
            *b += v;
        }
    }
    Ok((dtaps, dbias))
}

pub fn leaky_relu(x: &Tensor, slope: f64) -> Tensor {
    let mut out = x.clone();
    for v in &mut out.data {
        if *v <= 0.0 {
            *v *= slope;
        }
    }
    out
}

pub fn leaky_relu_backward(x: &Tensor, dy: &Tensor, slope: f64) -> Tensor {
    let mut dx = dy.clone();
    for (d, v) in dx.data.iter_mut().zip(&x.data) {
        if *v <= 0.0 {
            *d *= slope;
        }
    }
    dx
}

pub fn sigmoid(x: &Tensor) -> Tensor {
    let mut out = x.clone();
    for v in &mut out.data {
        *v = 1.0 / (1.0 + (-*v).exp());
    }
    out
}

/// Sigmoid gradient expressed from the forward output y: dy * y * (1-y).
pub fn sigmoid_backward(y: &Tensor, dy: &Tensor) -> Tensor {
    let mut dx = dy.clone();
    for (d, v) in dx.data.iter_mut().zip(&y.data) {
        *d *= v * (1.0 - v);
    }
    dx
}

/// Mean over H and W per sample and channel: (N,H,W,C) -> (N,1,1,C).
pub fn global_avg_pool(x: &Tensor) -> Tensor {
    let mut out = Tensor::zeros(x.n, 1, 1, x.c);
    let inv = 1.0 / (x.h * x.w) as f64;
    for s in 0..x.n {
        let dst = &mut out.data[s * x.c..(s + 1) * x.c];
        let src = &x.data[s * x.h * x.w * x.c..(s + 1) * x.h * x.w * x.c];
        for row in src.chunks_exact(x.c) {
            for (d, v) in dst.iter_mut().zip(row) {
                *d += v;
            }
        }
        for d in dst.iter_mut() {
            *d *= inv;
        }
    }
    out
}

pub fn global_avg_pool_backward(dy: &Tensor, h: usize, w: usize) -> Tensor {
    let mut dx = Tensor::zeros(dy.n, h, w, dy.c);
    let inv = 1.0 / (h * w) as f64;
    for s in 0..dy.n {
        let src = &dy.data[s * dy.c..(s + 1) * dy.c];
        let dst = &mut dx.data[s * h * w * dy.c..(s + 1) * h * w * dy.c];
        for row in dst.chunks_exact_mut(dy.c) {
            for (d, v) in row.iter_mut().zip(src) {
                *d = v * inv;
            }
        }
    }
    dx
}

/// Concatenation along channels.
pub fn concat_channels(xs: &[&Tensor]) -> Result<Tensor> {
    let first = xs.first().ok_or(Error::BadChannelCount(0))?;
    let total_c: usize = xs.iter().map(|t| t.c).sum();
    let mut out = Tensor::zeros(first.n, first.h, first.w, total_c);
    for t in xs {
        if (t.n, t.h, t.w) != (first.n, first.h, first.w) {
            return Err(Error::ShapeMismatch {
                expected: (first.h, first.w, first.c),
                got: (t.h, t.w, t.c),
            });
        }
    }
    let rows = first.n * first.h * first.w;
    for r in 0..rows {
        let dst = &mut out.data[r * total_c..(r + 1) * total_c];
        let mut off = 0;
        for t in xs {
            dst[off..off + t.c].copy_from_slice(&t.data[r * t.c..(r + 1) * t.c]);
            off += t.c;
        }
    }
    Ok(out)
}

/// Splits a channel-concatenated gradient back into parts of the given
/// channel widths.
pub fn split_channels(dy: &Tensor, widths: &[usize]) -> Vec<Tensor> {
    let rows = dy.n * dy.h * dy.w;
    let mut parts: Vec<Tensor> = widths
        .iter()
        .map(|&c| Tensor::zeros(dy.n, dy.h, dy.w, c))
        .collect();
    for r in 0..rows {
        let src = &dy.data[r * dy.c..(r + 1) * dy.c];
        let mut off = 0;
        for p in parts.iter_mut() {
            let c = p.c;
            p.data[r * c..(r + 1) * c].copy_from_slice(&src[off..off + c]);
            off += c;
        }
    }
    parts
}

/// Channel slice [from, from+len).
pub fn slice_channels(x: &Tensor, from: usize, len: usize) -> Tensor {
    let rows = x.n * x.h * x.w;
    let mut out = Tensor::zeros(x.n, x.h, x.w, len);
    for r in 0..rows {
        out.data[r * len..(r + 1) * len]
            .copy_from_slice(&x.data[r * x.c + from..r * x.c + from + len]);
    }
    out
}

pub fn slice_channels_backward(dy: &Tensor, total_c: usize, from: usize) -> Tensor {
    let rows = dy.n * dy.h * dy.w;
    let mut dx = Tensor::zeros(dy.n, dy.h, dy.w, total_c);
    for r in 0..rows {
        dx.data[r * total_c + from..r * total_c + from + dy.c]
            .copy_from_slice(&dy.data[r * dy.c..(r + 1) * dy.c]);
    }
    dx
}

fn broadcast_compatible(a: &Tensor, b: &Tensor) -> bool {
    b.n == a.n && (b.h == a.h || b.h == 1) && (b.w == a.w || b.w == 1) && (b.c == a.c || b.c == 1)
}

#[inline]
fn broadcast_idx(b: &Tensor, n: usize, y: usize, x: usize, c: usize) -> usize {
    let y = if b.h == 1 { 0 } else { y };
    let x = if b.w == 1 { 0 } else { x };
    let c = if b.c == 1 { 0 } else { c };
    b.idx(n, y, x, c)
}

/// Elementwise a * b where b's H, W, or C axes may be 1 and broadcast.
pub fn mul_broadcast(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if !broadcast_compatible(a, b) {
        return Err(Error::ShapeMismatch {
            expected: (a.h, a.w, a.c),
            got: (b.h, b.w, b.c),
        });
    }
    let mut out = a.clone();
    for n in 0..a.n {
        for y in 0..a.h {
            for x in 0..a.w {
                for c in 0..a.c {
                    out.data[a.idx(n, y, x, c)] *= b.data[broadcast_idx(b, n, y, x, c)];
                }
            }
        }
    }
    Ok(out)
}

/// Gradients of [`mul_broadcast`]: da = dy * b; db sums dy * a over the
/// broadcast axes.
pub fn mul_broadcast_backward(a: &Tensor, b: &Tensor, dy: &Tensor) -> (Tensor, Tensor) {
    let mut da = Tensor::zeros(a.n, a.h, a.w, a.c);
    let mut db = Tensor::zeros(b.n, b.h, b.w, b.c);
    for n in 0..a.n {
        for y in 0..a.h {
            for x in 0..a.w {
                for c in 0..a.c {
                    let ia = a.idx(n, y, x, c);
                    let ib = broadcast_idx(b, n, y, x, c);
                    da.data[ia] = dy.data[ia] * b.data[ib];
                    db.data[ib] += dy.data[ia] * a.data[ia];
                }
            }
        }
    }
    (da, db)
}

pub fn add(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.dims() != b.dims() {
        return Err(Error::ShapeMismatch {
            expected: (a.h, a.w, a.c),
            got: (b.h, b.w, b.c),
        });
    }
    let mut out = a.clone();
    for (o, v) in out.data.iter_mut().zip(&b.data) {
        *o += v;
    }
    Ok(out)
}
