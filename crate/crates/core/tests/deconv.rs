//! Circular convolution against a brute-force oracle, exact and
//! regularized deconvolution, and multi-scale blending.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kpac_core::deconv::{
    convolve_kernel, deconvolve, fit_blend_weights, multiscale_deconvolve, approx_accuracy,
    BlendWeights, ScaleMode,
};
use kpac_core::experiments::{dilation_check, Resample, ValidationConfig};
use kpac_core::image::{mae, psnr_db, Image};
use kpac_core::kernel::{make_kernel, Kernel, KernelKind};
use kpac_core::scale::ScaleFactor;
use kpac_core::spectral::wiener_inverse_kernel;
use kpac_core::Error;

fn random_image(h: usize, w: usize, channels: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..h * w * channels)
        .map(|_| rng.gen_range(0.0..1.0))
        .collect();
    Image::new(h, w, channels, data).expect("random image shape")
}

/// Brute-force circular convolution: y[p] = sum_d k[d] * x[(p - d) mod N].
fn convolve_slow(x: &Image, k: &Kernel) -> Image {
    let (h, w, c) = (x.height(), x.width(), x.channels());
    let r = k.radius();
    let mut out = vec![0.0; h * w * c];
    for y in 0..h as isize {
        for xx in 0..w as isize {
            for dy in -r..=r {
                for dx in -r..=r {
                    let tap = k.at(dy, dx);
                    let sy = (y - dy).rem_euclid(h as isize) as usize;
                    let sx = (xx - dx).rem_euclid(w as isize) as usize;
                    for ch in 0..c {
                        out[((y as usize) * w + xx as usize) * c + ch] +=
                            tap * x.at(sy, sx, ch);
                    }
                }
            }
        }
    }
    Image::new(h, w, c, out).expect("oracle shape")
}

#[test]
fn fft_convolution_matches_the_nested_loop() {
    let cases = [
        (8usize, 8usize, 1usize, KernelKind::Gaussian, 1.0, 7usize),
        (16, 16, 1, KernelKind::Gaussian, 1.2, 9),
        (16, 16, 3, KernelKind::Disc, 2.0, 7),
        (12, 10, 3, KernelKind::Disc, 1.5, 5),
        (9, 13, 1, KernelKind::Gaussian, 0.7, 7),
    ];
    for (i, (h, w, c, kind, param, size)) in cases.into_iter().enumerate() {
        let x = random_image(h, w, c, 900 + i as u64);
        let k = make_kernel(kind, param, size).unwrap();
        let fast = convolve_kernel(&x, &k).unwrap();
        let slow = convolve_slow(&x, &k);
        for (j, (a, b)) in fast.data().iter().zip(slow.data()).enumerate() {
            assert!(
                (a - b).abs() < 1e-10,
                "case {i}: sample {j} differs from the oracle: {a} vs {b}"
            );
        }
    }
}

#[test]
fn convolving_with_a_delta_is_the_identity() {
    let x = random_image(10, 11, 3, 5);
    let y = convolve_kernel(&x, &Kernel::delta(5).unwrap()).unwrap();
    for (a, b) in y.data().iter().zip(x.data()) {
        assert!((a - b).abs() < 1e-12, "delta blur moved a pixel: {a} vs {b}");
    }
}

#[test]
fn blurring_a_constant_image_changes_nothing() {
    let x = Image::new(8, 8, 1, vec![0.37; 64]).unwrap();
    let k = make_kernel(KernelKind::Disc, 2.0, 7).unwrap();
    let y = convolve_kernel(&x, &k).unwrap();
    for v in y.data() {
        assert!(
            (v - 0.37).abs() < 1e-12,
            "unit-sum kernel must preserve constants, got {v}"
        );
    }
}

#[test]
fn convolution_is_linear() {
    let a = random_image(9, 9, 1, 31);
    let b = random_image(9, 9, 1, 32);
    let k = make_kernel(KernelKind::Gaussian, 1.1, 7).unwrap();
    let mixed_data: Vec<f64> = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| 2.0 * x - 0.5 * y)
        .collect();
    let mixed = Image::new(9, 9, 1, mixed_data).unwrap();
    let lhs = convolve_kernel(&mixed, &k).unwrap();
    let ya = convolve_kernel(&a, &k).unwrap();
    let yb = convolve_kernel(&b, &k).unwrap();
    for ((l, x), y) in lhs.data().iter().zip(ya.data()).zip(yb.data()) {
        assert!(
            (l - (2.0 * x - 0.5 * y)).abs() < 1e-10,
            "convolution must commute with pixelwise affine mixing"
        );
    }
}

#[test]
fn unregularized_inverse_restores_the_image_exactly() {
    let x = random_image(16, 16, 1, 77);
    let k = make_kernel(KernelKind::Gaussian, 0.9, 7).unwrap();
    let y = convolve_kernel(&x, &k).unwrap();
    let kdag = wiener_inverse_kernel(&k, 0.0, 16, 16).unwrap();
    let xhat = deconvolve(&y, &kdag).unwrap();
    for (i, (a, b)) in xhat.data().iter().zip(x.data()).enumerate() {
        assert!(
            (a - b).abs() < 1e-8,
            "pixel {i} not restored by the exact inverse: {a} vs {b}"
        );
    }
}

#[test]
fn regularized_deconvolution_still_improves_psnr() {
    for seed in [3u64, 14, 159] {
        let x = random_image(32, 32, 1, seed);
        let k = make_kernel(KernelKind::Gaussian, 1.2, 9).unwrap();
        let y = convolve_kernel(&x, &k).unwrap();
        let kdag = wiener_inverse_kernel(&k, 1e-2, 32, 32).unwrap();
        let xhat = deconvolve(&y, &kdag).unwrap();
        let before = psnr_db(&y, &x).unwrap();
        let after = psnr_db(&xhat, &x).unwrap();
        assert!(
            after > before,
            "seed {seed}: deconvolution should raise psnr, got {before:.2} -> {after:.2}"
        );
    }
}

#[test]
fn single_scale_blend_with_unit_weight_is_plain_deconvolution() {
    let x = random_image(16, 16, 1, 8);
    let k = make_kernel(KernelKind::Gaussian, 1.0, 7).unwrap();
    let y = convolve_kernel(&x, &k).unwrap();
    let blend = BlendWeights::new(vec![ScaleFactor::of_int(1).unwrap()], vec![1.0]).unwrap();
    let blended = multiscale_deconvolve(&y, &k, 1e-2, &blend, ScaleMode::Upsample).unwrap();
    let kdag = wiener_inverse_kernel(&k, 1e-2, 16, 16).unwrap();
    let plain = deconvolve(&y, &kdag).unwrap();
    for (a, b) in blended.data().iter().zip(plain.data()) {
        assert!(
            (a - b).abs() < 1e-12,
            "unit blend at scale 1 must reduce to plain deconvolution"
        );
    }
}

#[test]
fn zero_weights_blend_to_a_zero_image() {
    let y = random_image(16, 16, 1, 9);
    let k = make_kernel(KernelKind::Gaussian, 1.0, 7).unwrap();
    let scales = vec![ScaleFactor::of_int(1).unwrap(), ScaleFactor::of_int(2).unwrap()];
    let blend = BlendWeights::new(scales, vec![0.0, 0.0]).unwrap();
    let out = multiscale_deconvolve(&y, &k, 1e-2, &blend, ScaleMode::Upsample).unwrap();
    assert!(
        out.data().iter().all(|v| *v == 0.0),
        "all-zero weights must produce the zero image"
    );
}

#[test]
fn blend_weights_validate_their_shape() {
    let s1 = ScaleFactor::of_int(1).unwrap();
    assert!(
        matches!(BlendWeights::new(vec![], vec![]), Err(Error::BadBlend(_))),
        "empty scale list must be refused"
    );
    assert!(
        matches!(
            BlendWeights::new(vec![s1], vec![0.5, 0.5]),
            Err(Error::BadBlend(_))
        ),
        "length mismatch must be refused"
    );
    assert!(
        matches!(
            BlendWeights::new(vec![s1], vec![f64::NAN]),
            Err(Error::BadBlend(_))
        ),
        "non-finite weight must be refused"
    );
    let u = BlendWeights::uniform_half(vec![s1, ScaleFactor::of_int(2).unwrap()]).unwrap();
    assert_eq!(u.weights, vec![0.5, 0.5]);
}

#[test]
fn agreement_score_is_one_only_for_identical_images() {
    let xs = random_image(8, 8, 1, 40);
    assert!(
        (approx_accuracy(&xs, &xs).unwrap() - 1.0).abs() < 1e-15,
        "identical images must score exactly 1"
    );
    let doubled_data: Vec<f64> = xs.data().iter().map(|v| 2.0 * v).collect();
    let doubled = Image::new(8, 8, 1, doubled_data).unwrap();
    assert!(
        (approx_accuracy(&doubled, &xs).unwrap() - 0.0).abs() < 1e-12,
        "a doubled image has unit relative error, score 0"
    );
    let tripled_data: Vec<f64> = xs.data().iter().map(|v| 3.0 * v).collect();
    let tripled = Image::new(8, 8, 1, tripled_data).unwrap();
    assert!(
        (approx_accuracy(&tripled, &xs).unwrap() - (-1.0)).abs() < 1e-12,
        "the score is not clamped below zero"
    );
}

#[test]
fn agreement_score_ignores_near_zero_reference_pixels() {
    // Reference: one comparable pixel and one below the guard. Only the
    // comparable pixel may contribute.
    let xs = Image::new(1, 2, 1, vec![1.0, 1e-4]).unwrap();
    let xhat = Image::new(1, 2, 1, vec![1.5, 500.0]).unwrap();
    let score = approx_accuracy(&xhat, &xs).unwrap();
    assert!(
        (score - 0.5).abs() < 1e-12,
        "guarded pixel leaked into the mean: {score}"
    );
    let tiny = Image::new(1, 2, 1, vec![1e-4, -1e-4]).unwrap();
    assert!(
        matches!(approx_accuracy(&xhat, &tiny), Err(Error::NoComparablePixels)),
        "a reference with no pixels above the guard cannot be scored"
    );
    let wrong = random_image(2, 2, 1, 1);
    assert!(
        matches!(approx_accuracy(&wrong, &xs), Err(Error::ShapeMismatch { .. })),
        "shape mismatch must be refused"
    );
}

#[test]
fn fitting_a_single_matching_result_gives_unit_weight() {
    let target = random_image(8, 8, 1, 50);
    let fit = fit_blend_weights(std::slice::from_ref(&target), &target).unwrap();
    assert_eq!(fit.weights.len(), 1);
    assert!(
        (fit.weights[0] - 1.0).abs() < 1e-6,
        "self-fit weight should be 1, got {}",
        fit.weights[0]
    );
    assert!(fit.converged, "one-variable fit must converge");
}

#[test]
fn fitting_recovers_a_known_nonnegative_mixture() {
    let a = random_image(10, 10, 1, 60);
    let b = random_image(10, 10, 1, 61);
    let mixed: Vec<f64> = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| 0.3 * x + 0.7 * y)
        .collect();
    let target = Image::new(10, 10, 1, mixed).unwrap();
    let fit = fit_blend_weights(&[a, b], &target).unwrap();
    assert!(
        (fit.weights[0] - 0.3).abs() < 1e-6 && (fit.weights[1] - 0.7).abs() < 1e-6,
        "expected weights (0.3, 0.7), got {:?}",
        fit.weights
    );
}

#[test]
fn fitted_blend_never_scores_below_the_uniform_blend() {
    // The uniform half-half blend is a feasible point of the fit, so the
    // fitted residual can only be smaller.
    let x = random_image(24, 24, 1, 70);
    let k = make_kernel(KernelKind::Disc, 2.0, 7).unwrap();
    let y = convolve_kernel(&x, &k).unwrap();
    let scales = vec![ScaleFactor::of_int(1).unwrap(), ScaleFactor::of_int(2).unwrap()];
    let per: Vec<Image> = scales
        .iter()
        .map(|s| {
            let blend = BlendWeights::new(vec![*s], vec![1.0]).unwrap();
            multiscale_deconvolve(&y, &k, 1e-2, &blend, ScaleMode::Upsample).unwrap()
        })
        .collect();
    let fit = fit_blend_weights(&per, &x).unwrap();
    let mut fitted = Image::zeros(24, 24, 1);
    let mut uniform = Image::zeros(24, 24, 1);
    for (img, wgt) in per.iter().zip(&fit.weights) {
        for ((f, u), v) in fitted
            .data_mut()
            .iter_mut()
            .zip(uniform.data_mut())
            .zip(img.data())
        {
            *f += wgt * v;
            *u += 0.5 * v;
        }
    }
    let err_fit = mae(&fitted, &x).unwrap();
    let err_uni = mae(&uniform, &x).unwrap();
    assert!(
        err_fit <= err_uni + 1e-12,
        "fitted blend mae {err_fit} exceeds uniform mae {err_uni}"
    );
    assert!(
        matches!(fit_blend_weights(&[], &x), Err(Error::BadBlend(_))),
        "an empty result list cannot be fitted"
    );
}

#[test]
fn dilate_mode_needs_an_integer_rate_that_divides_the_grid() {
    let y = random_image(16, 16, 1, 80);
    let k = make_kernel(KernelKind::Gaussian, 1.0, 7).unwrap();
    let frac = BlendWeights::new(vec![ScaleFactor::new(3, 2).unwrap()], vec![1.0]).unwrap();
    assert!(
        matches!(
            multiscale_deconvolve(&y, &k, 1e-2, &frac, ScaleMode::Dilate),
            Err(Error::NonIntegerRate(_))
        ),
        "fractional dilation rate must be refused"
    );
    let y15 = random_image(15, 15, 1, 81);
    let two = BlendWeights::new(vec![ScaleFactor::of_int(2).unwrap()], vec![1.0]).unwrap();
    assert!(
        matches!(
            multiscale_deconvolve(&y15, &k, 1e-2, &two, ScaleMode::Dilate),
            Err(Error::GridNotDivisible { len: 15, rate: 2 })
        ),
        "rate must divide the grid extents"
    );
}

#[test]
fn dilated_and_upsampled_inverses_deconvolve_alike() {
    // When the blur itself was carried to scale 2, the image excites
    // little of the band where tap dilation (spectrum replication) and
    // spectral upsampling (zero padding) differ, so the two deconvolution
    // paths agree closely on a grid the rate divides.
    let cfg = ValidationConfig {
        kind: KernelKind::Gaussian,
        param: 1.0,
        size: None,
        s: ScaleFactor::of_int(2).unwrap(),
        grid: (32, 32),
        eps: 1e-2,
        seed: 90,
        resample: Resample::Lanczos,
    };
    let report = dilation_check(&cfg).unwrap();
    assert!(
        report.psnr_db > 35.0,
        "upsample and dilate paths disagree: {:.1} dB",
        report.psnr_db
    );
}
