//! Transform-level oracles: the FFT path is checked against a direct
//! O(N^4) DFT loop, round trips, Parseval's identity, and hand-computed
//! spectra; the Wiener inverse is checked against its defining equations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;

use kpac_core::grid::Grid;
use kpac_core::kernel::Kernel;
use kpac_core::spectral::{
    dft2, embed_kernel, idft2, wiener_inverse_kernel, wiener_spectrum, Spectrum,
};
use kpac_core::Error;

fn random_grid(h: usize, w: usize, seed: u64) -> Grid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..h * w).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Grid::new(h, w, data).expect("random grid shape")
}

/// Textbook DFT, quartic in the grid edge: the independent reference the
/// FFT path must reproduce.
fn dft2_slow(grid: &Grid) -> Vec<Complex<f64>> {
    let (h, w) = (grid.height(), grid.width());
    let mut out = vec![Complex::new(0.0, 0.0); h * w];
    for u in 0..h {
        for v in 0..w {
            let mut acc = Complex::new(0.0, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let phase = -std::f64::consts::TAU
                        * (u as f64 * y as f64 / h as f64 + v as f64 * x as f64 / w as f64);
                    acc += Complex::from_polar(grid.at(y, x), phase);
                }
            }
            out[u * w + v] = acc;
        }
    }
    out
}

#[test]
fn dft2_matches_direct_quartic_loop() {
    for (h, w, seed) in [(4, 4, 1), (5, 7, 2), (8, 3, 3), (6, 6, 4), (1, 9, 5)] {
        let g = random_grid(h, w, seed);
        let fast = dft2(&g);
        let slow = dft2_slow(&g);
        for (i, (a, b)) in fast.data().iter().zip(&slow).enumerate() {
            assert!(
                (a - b).norm() <= 1e-10 * (h * w) as f64,
                "{h}x{w} seed {seed}: bin {i} fft {a} vs direct {b}"
            );
        }
    }
}

#[test]
fn delta_has_flat_spectrum() {
    let mut g = Grid::zeros(4, 4);
    g.data_mut()[0] = 1.0;
    let spec = dft2(&g);
    for (i, c) in spec.data().iter().enumerate() {
        assert!(
            (c - Complex::new(1.0, 0.0)).norm() < 1e-12,
            "bin {i} of a delta spectrum is {c}, want 1"
        );
    }
}

#[test]
fn constant_grid_concentrates_at_dc() {
    let g = Grid::new(4, 4, vec![1.0; 16]).unwrap();
    let spec = dft2(&g);
    assert!(
        (spec.at(0, 0) - Complex::new(16.0, 0.0)).norm() < 1e-12,
        "DC bin is {}, want 16",
        spec.at(0, 0)
    );
    for u in 0..4 {
        for v in 0..4 {
            if (u, v) != (0, 0) {
                assert!(
                    spec.at(u, v).norm() < 1e-12,
                    "non-DC bin ({u},{v}) = {} should vanish",
                    spec.at(u, v)
                );
            }
        }
    }
}

#[test]
fn round_trip_recovers_input() {
    for seed in 0..50u64 {
        let h = 2 + (seed as usize * 7) % 14;
        let w = 2 + (seed as usize * 11) % 14;
        let g = random_grid(h, w, 100 + seed);
        let back = idft2(&dft2(&g));
        let scale = g.data().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (i, (a, b)) in back.data().iter().zip(g.data()).enumerate() {
            assert!(
                (a - b).abs() <= 1e-10 * scale,
                "round trip {h}x{w} seed {seed}: sample {i} drifted {a} vs {b}"
            );
        }
    }
}

#[test]
fn parseval_energy_identity() {
    for seed in 0..50u64 {
        let h = 2 + (seed as usize * 5) % 12;
        let w = 2 + (seed as usize * 3) % 12;
        let g = random_grid(h, w, 200 + seed);
        let spatial: f64 = g.data().iter().map(|v| v * v).sum();
        let spec = dft2(&g);
        let freq: f64 =
            spec.data().iter().map(|c| c.norm_sqr()).sum::<f64>() / (h * w) as f64;
        assert!(
            (spatial - freq).abs() <= 1e-9 * spatial.max(1e-30),
            "{h}x{w} seed {seed}: spatial energy {spatial} vs spectral {freq}"
        );
    }
}

#[test]
fn embed_places_center_at_origin_and_wraps_negatives() {
    let k = Kernel::new(3, vec![1.0; 9]).unwrap();
    let g = embed_kernel(&k, 8, 8).unwrap();
    let hot = [7usize, 0, 1];
    for y in 0..8 {
        for x in 0..8 {
            let expected = if hot.contains(&y) && hot.contains(&x) {
                1.0
            } else {
                0.0
            };
            assert_eq!(
                g.at(y, x),
                expected,
                "embedded 3x3 ones kernel has wrong value at ({y},{x})"
            );
        }
    }
}

#[test]
fn embed_of_delta_is_delta() {
    let k = Kernel::delta(5).unwrap();
    let g = embed_kernel(&k, 9, 7).unwrap();
    for y in 0..9 {
        for x in 0..7 {
            let expected = if (y, x) == (0, 0) { 1.0 } else { 0.0 };
            assert_eq!(g.at(y, x), expected, "delta embed wrong at ({y},{x})");
        }
    }
}

#[test]
fn embed_rejects_kernel_larger_than_grid() {
    let k = Kernel::new(5, vec![1.0; 25]).unwrap();
    match embed_kernel(&k, 4, 8) {
        Err(Error::KernelExceedsGrid { size, height, width }) => {
            assert_eq!((size, height, width), (5, 4, 8));
        }
        other => panic!("expected KernelExceedsGrid, got {other:?}"),
    }
}

#[test]
fn wiener_of_delta_with_zero_eps_is_delta() {
    let k = Kernel::delta(3).unwrap();
    let inv = wiener_inverse_kernel(&k, 0.0, 8, 8).unwrap();
    for y in 0..8 {
        for x in 0..8 {
            let expected = if (y, x) == (0, 0) { 1.0 } else { 0.0 };
            assert!(
                (inv.at(y, x) - expected).abs() < 1e-12,
                "delta inverse should be delta; ({y},{x}) = {}",
                inv.at(y, x)
            );
        }
    }
}

#[test]
fn wiener_of_delta_attenuates_uniformly() {
    let eps = 0.25;
    let k = Kernel::delta(3).unwrap();
    let inv = wiener_inverse_kernel(&k, eps, 6, 6).unwrap();
    let spec = dft2(&inv);
    let want = 1.0 / (1.0 + eps);
    for (i, c) in spec.data().iter().enumerate() {
        assert!(
            (c - Complex::new(want, 0.0)).norm() < 1e-12,
            "bin {i}: {c}, want uniform {want}"
        );
    }
}

#[test]
fn zero_eps_inverse_cancels_spectrum_exactly() {
    // A sampled gaussian keeps every spectral bin well away from zero, so
    // the unregularized inverse exists and multiplies back to one.
    let k = kpac_core::kernel::make_kernel(kpac_core::kernel::KernelKind::Gaussian, 0.9, 7)
        .unwrap();
    let kspec = dft2(&embed_kernel(&k, 16, 16).unwrap());
    let inv = wiener_spectrum(&kspec, 0.0).unwrap();
    for (i, (a, b)) in kspec.data().iter().zip(inv.data()).enumerate() {
        let prod = a * b;
        assert!(
            (prod - Complex::new(1.0, 0.0)).norm() < 1e-9,
            "bin {i}: F(k) F(k^-1) = {prod}, want 1"
        );
    }
}

#[test]
fn zero_eps_refused_on_singular_spectrum() {
    // A uniform 3x3 box periodized onto a grid whose edge is divisible by
    // three has exact spectral zeros at one third of the sampling rate.
    let k = Kernel::new(3, vec![1.0 / 9.0; 9]).unwrap();
    let kspec = dft2(&embed_kernel(&k, 9, 9).unwrap());
    match wiener_spectrum(&kspec, 0.0) {
        Err(Error::SingularSpectrum { min_mag }) => {
            assert!(
                min_mag <= 1e-12,
                "reported min magnitude {min_mag} should be tiny"
            );
        }
        other => panic!("expected SingularSpectrum, got {other:?}"),
    }
}

#[test]
fn wiener_rejects_negative_eps() {
    let k = Kernel::delta(3).unwrap();
    assert!(
        wiener_inverse_kernel(&k, -0.5, 8, 8).is_err(),
        "negative eps must be rejected"
    );
}

#[test]
fn min_magnitude_scans_all_bins() {
    let data = vec![
        Complex::new(3.0, 4.0),
        Complex::new(0.5, 0.0),
        Complex::new(0.0, 2.0),
        Complex::new(1.0, 1.0),
    ];
    let spec = Spectrum::new(2, 2, data).unwrap();
    assert_eq!(spec.min_magnitude(), 0.5, "smallest bin magnitude");
}
