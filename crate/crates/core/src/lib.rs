//! Defocus deblurring via pseudo-inverse blur kernels, and a deblurring
//! network built on kernel-sharing parallel atrous convolutions.
//!
//! The library has two halves. The numerical half models blur as circular
//! convolution, inverts it with Wiener pseudo-inverse kernels, and
//! exploits two structural facts: scaling a blur kernel commutes with
//! inversion (so one inverse kernel serves a family of blur sizes via
//! frequency-domain zero-padding), and on smooth signals the scaled
//! inverse is well approximated by a dilated one (same taps, spread
//! stride). Multi-scale deconvolutions are blended with nonnegative
//! least-squares weights. The learned half mirrors that structure: a
//! small encoder/decoder network whose core blocks run several atrous
//! convolutions that share one physical tap set across dilation rates,
//! modulated by per-pixel scale attention and per-sample shape attention,
//! trained with reverse-mode autodiff and Adam, entirely self-contained.

pub mod deconv;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod image;
pub mod kernel;
pub mod net;
pub mod netpbm;
pub mod nnls;
mod parallel;
pub mod scale;
pub mod spectral;
pub mod synth;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
