//! Kernel synthesis and image metrics, checked against closed forms and
//! brute-force reimplementations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kpac_core::image::{mae, psnr_db, Image};
use kpac_core::kernel::{dilate_kernel, make_kernel, min_kernel_size, Kernel, KernelKind};
use kpac_core::Error;

fn random_image(h: usize, w: usize, c: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..h * w * c).map(|_| rng.gen_range(0.0..1.0)).collect();
    Image::new(h, w, c, data).expect("random image shape")
}

#[test]
fn gaussian_taps_follow_the_exponential() {
    let k = make_kernel(KernelKind::Gaussian, 1.0, 7).unwrap();
    let ratio = k.at(0, 0) / k.at(0, 1);
    assert!(
        (ratio - 0.5f64.exp()).abs() < 1e-12,
        "center/offset-1 ratio {ratio}, want e^0.5 = {}",
        0.5f64.exp()
    );
    let diag = k.at(0, 0) / k.at(1, 1);
    assert!(
        (diag - 1.0f64.exp()).abs() < 1e-12,
        "center/diagonal ratio {diag}, want e^1"
    );
}

#[test]
fn tiny_sigma_gaussian_collapses_to_delta() {
    let k = make_kernel(KernelKind::Gaussian, 0.01, 3).unwrap();
    assert!(
        (k.at(0, 0) - 1.0).abs() < 1e-12,
        "center tap {} should carry all the mass",
        k.at(0, 0)
    );
    assert!(k.at(0, 1) < 1e-12, "off-center tap {} should vanish", k.at(0, 1));
}

#[test]
fn small_disc_is_center_dominated_and_normalized() {
    let k = make_kernel(KernelKind::Disc, 0.5, 3).unwrap();
    assert!(
        (k.sum() - 1.0).abs() < 1e-12,
        "disc kernel sums to {}, want 1",
        k.sum()
    );
    for dy in -1..=1isize {
        for dx in -1..=1isize {
            if (dy, dx) != (0, 0) {
                assert!(
                    k.at(0, 0) > k.at(dy, dx),
                    "center tap should dominate ({dy},{dx})"
                );
            }
        }
    }
}

#[test]
fn disc_corners_outside_radius_are_zero() {
    // radius 2 disc on a 7x7 grid: the (3,3) corner cell starts 2.5
    // pixels out on each axis, entirely outside the disc.
    let k = make_kernel(KernelKind::Disc, 2.0, 7).unwrap();
    assert_eq!(k.at(3, 3), 0.0, "far corner tap should be exactly zero");
    assert!(k.at(0, 0) > 0.0, "center tap should be positive");
}

#[test]
fn kernels_normalize_to_unit_sum() {
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kind = if seed % 2 == 0 {
            KernelKind::Disc
        } else {
            KernelKind::Gaussian
        };
        let param = rng.gen_range(0.3..3.0);
        let size = min_kernel_size(kind, param);
        let k = make_kernel(kind, param, size).unwrap();
        assert!(
            (k.sum() - 1.0).abs() < 1e-12,
            "{kind:?} param {param}: sum {} not 1",
            k.sum()
        );
    }
}

#[test]
fn normalize_is_idempotent() {
    let k = make_kernel(KernelKind::Gaussian, 1.3, 9).unwrap();
    let again = k.normalized().unwrap();
    for (a, b) in k.taps().iter().zip(again.taps()) {
        assert!(
            (a - b).abs() < 1e-15,
            "renormalizing a normalized kernel moved a tap: {a} vs {b}"
        );
    }
}

#[test]
fn all_ones_normalizes_to_uniform() {
    let k = Kernel::new(3, vec![1.0; 9]).unwrap().normalized().unwrap();
    for t in k.taps() {
        assert!((t - 1.0 / 9.0).abs() < 1e-15, "tap {t}, want 1/9");
    }
}

#[test]
fn make_kernel_rejects_bad_arguments() {
    assert!(matches!(
        make_kernel(KernelKind::Gaussian, 0.0, 7),
        Err(Error::NonPositiveParam(_))
    ));
    assert!(matches!(
        make_kernel(KernelKind::Gaussian, 1.0, 6),
        Err(Error::EvenKernelSize(6))
    ));
    assert!(matches!(
        make_kernel(KernelKind::Disc, 3.0, 5),
        Err(Error::KernelTooSmall { size: 5, min: 7 })
    ));
}

#[test]
fn min_sizes_hold_the_support() {
    assert_eq!(min_kernel_size(KernelKind::Disc, 2.0), 5);
    assert_eq!(min_kernel_size(KernelKind::Disc, 2.2), 7);
    assert_eq!(min_kernel_size(KernelKind::Gaussian, 1.0), 7);
    assert_eq!(min_kernel_size(KernelKind::Gaussian, 0.01), 1);
}

#[test]
fn dilation_spreads_taps_without_renormalizing() {
    let k = Kernel::new(3, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]).unwrap();
    let d = dilate_kernel(&k, 2).unwrap();
    assert_eq!(d.size(), 5, "rate-2 dilation of 3x3 gives 5x5");
    for dy in -1..=1isize {
        for dx in -1..=1isize {
            assert_eq!(
                d.at(2 * dy, 2 * dx),
                k.at(dy, dx),
                "tap ({dy},{dx}) should land at twice the offset"
            );
        }
    }
    assert_eq!(d.at(1, 0), 0.0, "odd offsets must stay empty");
    assert!(
        (d.sum() - k.sum()).abs() < 1e-15,
        "dilation must preserve the tap sum"
    );
}

#[test]
fn dilation_rate_one_is_identity() {
    let k = make_kernel(KernelKind::Gaussian, 0.8, 5).unwrap();
    let d = dilate_kernel(&k, 1).unwrap();
    assert_eq!(d.size(), k.size());
    assert_eq!(d.taps(), k.taps(), "rate 1 must copy the kernel");
}

#[test]
fn dilated_delta_is_a_larger_delta() {
    let k = Kernel::delta(3).unwrap();
    let d = dilate_kernel(&k, 5).unwrap();
    assert_eq!(d.size(), 11);
    for dy in -5..=5isize {
        for dx in -5..=5isize {
            let expected = if (dy, dx) == (0, 0) { 1.0 } else { 0.0 };
            assert_eq!(d.at(dy, dx), expected, "({dy},{dx})");
        }
    }
}

#[test]
fn psnr_of_identical_images_is_infinite() {
    let img = random_image(6, 5, 3, 9);
    let v = psnr_db(&img, &img).unwrap();
    assert!(v.is_infinite() && v > 0.0, "identical images give {v}, want +inf");
}

#[test]
fn psnr_of_constant_offset_is_twenty_db() {
    let a = Image::new(4, 4, 1, vec![0.0; 16]).unwrap();
    let b = Image::new(4, 4, 1, vec![0.1; 16]).unwrap();
    let v = psnr_db(&a, &b).unwrap();
    assert!((v - 20.0).abs() < 1e-12, "MSE 0.01 should read as 20 dB, got {v}");
}

#[test]
fn psnr_matches_an_independent_mse_pass() {
    for seed in 0..10u64 {
        let a = random_image(7, 9, 3, 30 + seed);
        let b = random_image(7, 9, 3, 60 + seed);
        let mse: f64 = a
            .data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            / a.data().len() as f64;
        let want = 10.0 * (1.0 / mse).log10();
        let got = psnr_db(&a, &b).unwrap();
        assert!(
            (got - want).abs() < 1e-9,
            "seed {seed}: psnr {got} vs direct {want}"
        );
    }
}

#[test]
fn psnr_is_symmetric() {
    let a = random_image(5, 5, 1, 71);
    let b = random_image(5, 5, 1, 72);
    assert_eq!(
        psnr_db(&a, &b).unwrap(),
        psnr_db(&b, &a).unwrap(),
        "psnr must not depend on argument order"
    );
}

#[test]
fn mae_matches_brute_force_and_is_a_metric() {
    let a = random_image(6, 6, 3, 81);
    let b = random_image(6, 6, 3, 82);
    let want: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        / a.data().len() as f64;
    let got = mae(&a, &b).unwrap();
    assert!((got - want).abs() < 1e-12, "mae {got} vs loop {want}");
    assert_eq!(mae(&a, &b).unwrap(), mae(&b, &a).unwrap(), "mae is symmetric");
    assert_eq!(mae(&a, &a).unwrap(), 0.0, "mae of an image with itself");
    assert!(got > 0.0, "distinct images have positive mae");
}

#[test]
fn mae_of_opposite_constants_is_one() {
    let a = Image::new(2, 2, 1, vec![0.0; 4]).unwrap();
    let b = Image::new(2, 2, 1, vec![1.0; 4]).unwrap();
    assert_eq!(mae(&a, &b).unwrap(), 1.0);
}

#[test]
fn metrics_reject_shape_mismatch() {
    let a = random_image(4, 4, 1, 90);
    let b = random_image(4, 5, 1, 91);
    assert!(matches!(psnr_db(&a, &b), Err(Error::ShapeMismatch { .. })));
    assert!(matches!(mae(&a, &b), Err(Error::ShapeMismatch { .. })));
}

#[test]
fn image_constructor_enforces_invariants() {
    assert!(matches!(
        Image::new(2, 2, 2, vec![0.0; 8]),
        Err(Error::BadChannelCount(2))
    ));
    assert!(matches!(
        Image::new(2, 2, 1, vec![0.0; 5]),
        Err(Error::BadImageShape { .. })
    ));
    assert!(matches!(
        Image::new(2, 2, 1, vec![0.0, 0.0, f64::NAN, 0.0]),
        Err(Error::NonFinite(_))
    ));
}
