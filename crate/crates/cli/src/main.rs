//! Command-line front end: blur synthesis, inverse-kernel visualization,
//! single- and multi-scale deconvolution, the equivalence experiments, and
//! the deblurring network (accounting, inference, toy training).
//!
//! Every successful run ends with one machine-readable line on stdout:
//! `RESULT key=value( key=value)*`. Exit codes: 0 success, 1 runtime
//! failure, 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kpac_core::deconv::{
    convolve_kernel, deconvolve, multiscale_deconvolve, realize_inverse_at_scale, BlendWeights,
    ScaleMode,
};
use kpac_core::experiments::{
    bracket_check, commutativity_check, dilation_check, BracketConfig, Resample, ValidationConfig,
};
use kpac_core::image::{mae, psnr_db, Image};
use kpac_core::kernel::{make_kernel, min_kernel_size, Kernel, KernelKind};
use kpac_core::net::{load_network, param_count, save_network, flops_estimate, Network, NetworkConfig};
use kpac_core::netpbm::{load_netpbm, save_netpbm, Depth};
use kpac_core::scale::{parse_scale, ScaleFactor};
use kpac_core::train::{train_toy, ToyConfig};

#[derive(Parser)]
#[command(name = "kpac", version, about = "Defocus deblurring via inverse kernels and a kernel-sharing atrous network")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Blur an image with a synthesized kernel.
    Blur(BlurArgs),
    /// Compute an inverse kernel and write a rescaled visualization.
    Invert(InvertArgs),
    /// Deblur an image with inverse kernels at one or more scales.
    Deblur(DeblurArgs),
    /// Score uniform and fitted blends of bracketing-scale deconvolutions.
    Approx(ApproxArgs),
    /// Check that inverting an upsampled blur matches upsampling the inverse.
    ValidateEq4(ValidateArgs),
    /// Check that dilated inverse kernels match upsampled ones.
    ValidateDilate(ValidateArgs),
    /// Print parameter and FLOP counts for a network configuration.
    KpacInfo(InfoArgs),
    /// Run a trained network on an image.
    KpacInfer(InferArgs),
    /// Train a network on synthetic spatially varying blur and save weights.
    KpacTrain(TrainArgs),
    /// PSNR and mean absolute error between two images.
    Metrics(MetricsArgs),
}

fn parse_kind(s: &str) -> Result<KernelKind, String> {
    s.parse::<KernelKind>().map_err(|e| e.to_string())
}

fn parse_scale_arg(s: &str) -> Result<ScaleFactor, String> {
    parse_scale(s).map_err(|e| e.to_string())
}

/// "H,W" pair of positive extents.
fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (h, w) = s.split_once(',').ok_or("expected H,W")?;
    let h: usize = h.trim().parse().map_err(|_| format!("bad height {h:?}"))?;
    let w: usize = w.trim().parse().map_err(|_| format!("bad width {w:?}"))?;
    if h == 0 || w == 0 {
        return Err("extents must be positive".into());
    }
    Ok((h, w))
}

/// "WxH" resolution, width first as in common video notation.
fn parse_res(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once('x').ok_or("expected WxH")?;
    let w: usize = w.trim().parse().map_err(|_| format!("bad width {w:?}"))?;
    let h: usize = h.trim().parse().map_err(|_| format!("bad height {h:?}"))?;
    if h == 0 || w == 0 {
        return Err("extents must be positive".into());
    }
    Ok((w, h))
}

fn parse_mode(s: &str) -> Result<ScaleMode, String> {
    match s {
        "upsample" => Ok(ScaleMode::Upsample),
        "dilate" => Ok(ScaleMode::Dilate),
        other => Err(format!("unknown mode {other:?} (expected upsample or dilate)")),
    }
}

fn parse_resample(s: &str) -> Result<Resample, String> {
    match s {
        "lanczos" => Ok(Resample::Lanczos),
        "sinc" => Ok(Resample::Sinc),
        other => Err(format!("unknown resampling {other:?} (expected lanczos or sinc)")),
    }
}

fn parse_levels(s: &str) -> Result<usize, String> {
    match s {
        "2" => Ok(2),
        "3" => Ok(3),
        other => Err(format!("levels must be 2 or 3, got {other:?}")),
    }
}

fn parse_positive(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|_| format!("bad count {s:?}"))?;
    if v == 0 {
        return Err("must be positive".into());
    }
    Ok(v)
}

fn parse_odd(s: &str) -> Result<usize, String> {
    let v = parse_positive(s)?;
    if v % 2 == 0 {
        return Err(format!("kernel size must be odd, got {v}"));
    }
    Ok(v)
}

fn parse_even_channels(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|_| format!("bad channel count {s:?}"))?;
    if v < 2 || v % 2 != 0 {
        return Err(format!("channels must be even and at least 2, got {v}"));
    }
    Ok(v)
}

#[derive(Args)]
struct BlurArgs {
    /// Input image (binary PGM or PPM).
    #[arg(long = "in")]
    input: PathBuf,
    /// Output image path.
    #[arg(long)]
    out: PathBuf,
    /// Kernel family: disc or gaussian.
    #[arg(long, value_parser = parse_kind)]
    kind: KernelKind,
    /// Disc radius or gaussian sigma in pixels.
    #[arg(long)]
    param: f64,
    /// Kernel tap-grid size (odd); defaults to the smallest that fits.
    #[arg(long, value_parser = parse_odd)]
    size: Option<usize>,
}

#[derive(Args)]
struct InvertArgs {
    /// Kernel family: disc or gaussian.
    #[arg(long, value_parser = parse_kind)]
    kind: KernelKind,
    /// Disc radius or gaussian sigma in pixels.
    #[arg(long)]
    param: f64,
    /// Kernel tap-grid size (odd); defaults to the smallest that fits.
    #[arg(long, value_parser = parse_odd)]
    size: Option<usize>,
    /// Wiener regularization strength.
    #[arg(long, default_value_t = 1e-2)]
    eps: f64,
    /// Grid the inverse kernel is computed on, as H,W.
    #[arg(long, value_parser = parse_grid)]
    grid: (usize, usize),
    /// Where to write the min-max rescaled inverse-kernel image (PGM).
    #[arg(long = "out-vis")]
    out_vis: PathBuf,
}

#[derive(Args)]
struct DeblurArgs {
    /// Input image (binary PGM or PPM).
    #[arg(long = "in")]
    input: PathBuf,
    /// Output image path.
    #[arg(long)]
    out: PathBuf,
    /// Kernel family: disc or gaussian.
    #[arg(long, value_parser = parse_kind)]
    kind: KernelKind,
    /// Disc radius or gaussian sigma in pixels.
    #[arg(long)]
    param: f64,
    /// Wiener regularization strength.
    #[arg(long, default_value_t = 1e-2)]
    eps: f64,
    /// Kernel tap-grid size (odd); defaults to the smallest that fits.
    #[arg(long, value_parser = parse_odd)]
    size: Option<usize>,
    /// Scales whose deconvolutions are blended, e.g. 3,3.5,7/2.
    /// Without this the inverse is applied at scale 1.
    #[arg(long, value_parser = parse_scale_arg, value_delimiter = ',')]
    scales: Vec<ScaleFactor>,
    /// Blend weights matching --scales; default is uniform 1/n.
    #[arg(long, value_delimiter = ',', requires = "scales")]
    weights: Vec<f64>,
    /// How inverse kernels are carried to each scale.
    #[arg(long, value_parser = parse_mode, default_value = "upsample")]
    mode: ScaleMode,
}

#[derive(Args)]
struct ApproxArgs {
    /// Kernel family: disc or gaussian.
    #[arg(long, value_parser = parse_kind, default_value = "disc")]
    kind: KernelKind,
    /// Disc radius or gaussian sigma in pixels.
    #[arg(long, default_value_t = 2.0)]
    param: f64,
    /// Kernel tap-grid size (odd); defaults to the smallest that fits.
    #[arg(long, value_parser = parse_odd)]
    size: Option<usize>,
    /// Scale the synthetic scene is blurred at.
    #[arg(long, value_parser = parse_scale_arg, default_value = "3.5")]
    target: ScaleFactor,
    /// Bracketing scales whose deconvolutions are blended.
    #[arg(long, value_parser = parse_scale_arg, value_delimiter = ',', default_value = "3,4")]
    brackets: Vec<ScaleFactor>,
    /// Synthetic image extents as H,W.
    #[arg(long, value_parser = parse_grid, default_value = "127,127")]
    grid: (usize, usize),
    /// Wiener regularization strength.
    #[arg(long, default_value_t = 1e-2)]
    eps: f64,
    /// Seed for the synthetic scene.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct ValidateArgs {
    /// Kernel family: disc or gaussian.
    #[arg(long, value_parser = parse_kind)]
    kind: KernelKind,
    /// Disc radius or gaussian sigma in pixels.
    #[arg(long)]
    param: f64,
    /// Kernel tap-grid size (odd); defaults to the smallest that fits.
    #[arg(long, value_parser = parse_odd)]
    size: Option<usize>,
    /// Upsampling factor, e.g. 5 or 7/2.
    #[arg(long, value_parser = parse_scale_arg)]
    s: ScaleFactor,
    /// Synthetic image extents as H,W.
    #[arg(long, value_parser = parse_grid, default_value = "127,127")]
    grid: (usize, usize),
    /// Wiener regularization strength.
    #[arg(long, default_value_t = 1e-2)]
    eps: f64,
    /// Seed for the synthetic scene.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// How the blur kernel is carried to the image grid: lanczos or sinc.
    #[arg(long, value_parser = parse_resample, default_value = "lanczos")]
    resample: Resample,
}

#[derive(Args)]
struct InfoArgs {
    /// Encoder depth: 2 or 3 downsampling levels.
    #[arg(long, value_parser = parse_levels, default_value = "3")]
    levels: usize,
    /// Number of kernel-sharing atrous blocks.
    #[arg(long, value_parser = parse_positive, default_value = "2")]
    blocks: usize,
    /// Atrous kernel size (odd).
    #[arg(long, value_parser = parse_odd, default_value = "5")]
    k: usize,
    /// Parallel atrous branches per block.
    #[arg(long, value_parser = parse_positive, default_value = "5")]
    n: usize,
    /// Bottleneck channel count (even).
    #[arg(long, value_parser = parse_even_channels, default_value = "96")]
    c: usize,
    /// Give each branch its own taps instead of sharing one set.
    #[arg(long)]
    unshared: bool,
    /// Resolution the FLOP estimate is taken at, as WxH.
    #[arg(long, value_parser = parse_res, default_value = "1280x720")]
    res: (usize, usize),
}

#[derive(Args)]
struct InferArgs {
    /// Weight file to load.
    #[arg(long)]
    weights: PathBuf,
    /// Input image (binary PGM or PPM).
    #[arg(long = "in")]
    input: PathBuf,
    /// Output image path (always PPM).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Number of optimizer steps.
    #[arg(long, value_parser = parse_positive)]
    steps: usize,
    /// Seed for weights, data stream, and held-out pairs.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Where to write the trained weights.
    #[arg(long = "out-weights")]
    out_weights: PathBuf,
    /// Encoder depth: 2 or 3 downsampling levels.
    #[arg(long, value_parser = parse_levels, default_value = "3")]
    levels: usize,
    /// Number of kernel-sharing atrous blocks.
    #[arg(long, value_parser = parse_positive, default_value = "2")]
    blocks: usize,
    /// Atrous kernel size (odd).
    #[arg(long, value_parser = parse_odd, default_value = "5")]
    k: usize,
    /// Parallel atrous branches per block.
    #[arg(long, value_parser = parse_positive, default_value = "5")]
    n: usize,
    /// Bottleneck channel count (even).
    #[arg(long, value_parser = parse_even_channels, default_value = "32")]
    c: usize,
    /// Patches per optimizer step.
    #[arg(long, value_parser = parse_positive, default_value = "4")]
    batch: usize,
    /// Square training patch edge; must be divisible by the network stride.
    #[arg(long, value_parser = parse_positive, default_value = "32")]
    patch: usize,
    /// Held-out pairs scored before and after training.
    #[arg(long, value_parser = parse_positive, default_value = "8")]
    holdout: usize,
    /// Smallest per-region blur sigma.
    #[arg(long, default_value_t = 1.0)]
    sigma_lo: f64,
    /// Largest per-region blur sigma.
    #[arg(long, default_value_t = 3.0)]
    sigma_hi: f64,
}

#[derive(Args)]
struct MetricsArgs {
    /// First image.
    #[arg(long)]
    a: PathBuf,
    /// Second image.
    #[arg(long)]
    b: PathBuf,
}

fn resolved_kernel(kind: KernelKind, param: f64, size: Option<usize>) -> kpac_core::Result<Kernel> {
    let size = size.unwrap_or_else(|| min_kernel_size(kind, param));
    make_kernel(kind, param, size)
}

/// Clamp-to-edge pad up to the next multiple of `d` on both axes.
fn pad_to_multiple(img: &Image, d: usize) -> Image {
    let (h, w, c) = (img.height(), img.width(), img.channels());
    let ph = h.div_ceil(d) * d;
    let pw = w.div_ceil(d) * d;
    if ph == h && pw == w {
        return img.clone();
    }
    let mut data = Vec::with_capacity(ph * pw * c);
    for y in 0..ph {
        let sy = y.min(h - 1);
        for x in 0..pw {
            let sx = x.min(w - 1);
            for ch in 0..c {
                data.push(img.at(sy, sx, ch));
            }
        }
    }
    Image::new(ph, pw, c, data).expect("padded shape")
}

fn crop(img: &Image, h: usize, w: usize) -> Image {
    let c = img.channels();
    let mut data = Vec::with_capacity(h * w * c);
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                data.push(img.at(y, x, ch));
            }
        }
    }
    Image::new(h, w, c, data).expect("cropped shape")
}

fn run(cmd: Cmd) -> kpac_core::Result<()> {
    match cmd {
        Cmd::Blur(a) => {
            let k = resolved_kernel(a.kind, a.param, a.size)?;
            let x = load_netpbm(&a.input)?;
            let y = convolve_kernel(&x, &k)?;
            save_netpbm(&a.out, &y, Depth::Eight)?;
            println!(
                "RESULT h={} w={} c={} kernel={}",
                y.height(),
                y.width(),
                y.channels(),
                k.size()
            );
        }
        Cmd::Invert(a) => {
            let k = resolved_kernel(a.kind, a.param, a.size)?;
            let (h, w) = a.grid;
            let kdag = kpac_core::spectral::wiener_inverse_kernel(&k, a.eps, h, w)?;
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for v in kdag.data() {
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
            let span = if hi > lo { hi - lo } else { 1.0 };
            let vis: Vec<f64> = kdag.data().iter().map(|v| (v - lo) / span).collect();
            let vis = Image::new(h, w, 1, vis)?;
            save_netpbm(&a.out_vis, &vis, Depth::Eight)?;
            println!("RESULT min={lo} max={hi}");
        }
        Cmd::Deblur(a) => {
            let k = resolved_kernel(a.kind, a.param, a.size)?;
            let y = load_netpbm(&a.input)?;
            let (h, w) = (y.height(), y.width());
            let x = if a.scales.is_empty() {
                let one = ScaleFactor::of_int(1)?;
                let kdag = realize_inverse_at_scale(&k, a.eps, one, h, w, a.mode)?;
                deconvolve(&y, &kdag)?
            } else {
                let weights = if a.weights.is_empty() {
                    vec![1.0 / a.scales.len() as f64; a.scales.len()]
                } else {
                    a.weights
                };
                let blend = BlendWeights::new(a.scales.clone(), weights)?;
                multiscale_deconvolve(&y, &k, a.eps, &blend, a.mode)?
            };
            save_netpbm(&a.out, &x, Depth::Eight)?;
            println!(
                "RESULT h={h} w={w} c={} scales={}",
                x.channels(),
                a.scales.len().max(1)
            );
        }
        Cmd::Approx(a) => {
            let rep = bracket_check(&BracketConfig {
                kind: a.kind,
                param: a.param,
                size: a.size,
                target: a.target,
                brackets: a.brackets,
                grid: a.grid,
                eps: a.eps,
                seed: a.seed,
            })?;
            println!(
                "RESULT uniform={} nnls={} kkt={}",
                rep.uniform_accuracy, rep.fitted_accuracy, rep.nnls_kkt
            );
        }
        Cmd::ValidateEq4(a) => {
            let rep = commutativity_check(&validation_config(&a))?;
            println!("RESULT psnr={}", rep.psnr_db);
        }
        Cmd::ValidateDilate(a) => {
            let rep = dilation_check(&validation_config(&a))?;
            println!("RESULT psnr={}", rep.psnr_db);
        }
        Cmd::KpacInfo(a) => {
            let cfg = NetworkConfig {
                levels: a.levels,
                blocks: a.blocks,
                kernel_size: a.k,
                branches: a.n,
                channels: a.c,
                weight_sharing: !a.unshared,
            };
            let net = Network::build(cfg.clone(), 0)?;
            let (rw, rh) = a.res;
            let flops = flops_estimate(&cfg, rh, rw)?;
            println!(
                "RESULT params={} flops={flops} res={rw}x{rh}",
                param_count(&net.weights)
            );
        }
        Cmd::KpacInfer(a) => {
            let net = load_network(&a.weights)?;
            let img = load_netpbm(&a.input)?;
            let (h, w) = (img.height(), img.width());
            let padded = pad_to_multiple(&img, net.config.divisor());
            let out = net.infer_image(&padded)?;
            let out = crop(&out, h, w);
            save_netpbm(&a.out, &out, Depth::Eight)?;
            println!("RESULT h={h} w={w} c={}", out.channels());
        }
        Cmd::KpacTrain(a) => {
            let cfg = ToyConfig {
                net: NetworkConfig {
                    levels: a.levels,
                    blocks: a.blocks,
                    kernel_size: a.k,
                    branches: a.n,
                    channels: a.c,
                    ..NetworkConfig::default()
                },
                steps: a.steps,
                batch: a.batch,
                patch: a.patch,
                holdout_pairs: a.holdout,
                sigma_lo: a.sigma_lo,
                sigma_hi: a.sigma_hi,
                seed: a.seed,
                ..ToyConfig::default()
            };
            let (net, report) = train_toy(&cfg)?;
            save_network(&a.out_weights, &net)?;
            println!(
                "RESULT steps={} baseline={} trained={} improvement={}",
                a.steps, report.baseline_mae, report.trained_mae, report.improvement
            );
        }
        Cmd::Metrics(a) => {
            let x = load_netpbm(&a.a)?;
            let y = load_netpbm(&a.b)?;
            println!("RESULT psnr={} mae={}", psnr_db(&x, &y)?, mae(&x, &y)?);
        }
    }
    Ok(())
}

fn validation_config(a: &ValidateArgs) -> ValidationConfig {
    ValidationConfig {
        kind: a.kind,
        param: a.param,
        size: a.size,
        s: a.s,
        grid: a.grid,
        eps: a.eps,
        seed: a.seed,
        resample: a.resample,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Cmd::Deblur(a) = &cli.cmd {
        if !a.weights.is_empty() && a.weights.len() != a.scales.len() {
            // Cross-flag arity is a usage problem, so it exits like one.
            eprintln!(
                "error: --weights lists {} values but --scales lists {}",
                a.weights.len(),
                a.scales.len()
            );
            return ExitCode::from(2);
        }
    }
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
