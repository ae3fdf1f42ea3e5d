// Scratch measurement harness used while pinning test tolerances.
use std::time::Instant;

use kpac_core::experiments::{
    bracket_check, commutativity_check, dilation_check, roundtrip_gain, BracketConfig, Resample,
    ValidationConfig,
};
use kpac_core::kernel::KernelKind;
use kpac_core::net::{flops_estimate, param_count, Network, NetworkConfig};
use kpac_core::scale::ScaleFactor;
use kpac_core::tensor::Tensor;
use kpac_core::train::{synthetic_pairs, train_on_pairs, AdamConfig};

fn main() {
    // ---- parameter counts ----
    let c3 = NetworkConfig::default();
    let n3 = Network::build(c3, 1).unwrap();
    println!("params 3-level: {}", param_count(&n3.weights));
    let c2 = NetworkConfig { levels: 2, ..c3 };
    let n2 = Network::build(c2, 1).unwrap();
    println!("params 2-level: {}", param_count(&n2.weights));
    let c2u = NetworkConfig { levels: 2, weight_sharing: false, ..c3 };
    let n2u = Network::build(c2u, 1).unwrap();
    println!("params 2-level unshared: {}", param_count(&n2u.weights));
    println!(
        "flops 3-level @1280x720: {:.3e}",
        flops_estimate(&c3, 720, 1280).unwrap() as f64
    );

    // ---- toy net timing ----
    let toy = NetworkConfig { channels: 32, ..NetworkConfig::default() };
    let mut net = Network::build(toy, 7).unwrap();
    let pairs = synthetic_pairs(4, 32, 32, 1.0, 3.0, 99);
    let t0 = Instant::now();
    let curve = train_on_pairs(&mut net, &pairs, 5, 4, &AdamConfig::default(), 3, 1).unwrap();
    println!(
        "toy c=32 batch=4: {:.2} s/step, first losses {:?}",
        t0.elapsed().as_secs_f64() / 5.0,
        curve
    );

    // forward-only timing at paper scale would be huge; check a 64x64 c=96 forward
    let t0 = Instant::now();
    let x = Tensor::zeros(1, 64, 64, 3);
    let y = n3.forward(&x).unwrap();
    println!("c=96 64x64 forward: {:.2} s, out {:?}", t0.elapsed().as_secs_f64(), y.dims());

    // ---- tiny gradcheck ----
    let tiny_cfg = NetworkConfig {
        levels: 3,
        blocks: 1,
        kernel_size: 3,
        branches: 3,
        channels: 8,
        weight_sharing: true,
    };
    let tiny = Network::build(tiny_cfg, 11).unwrap();
    let x = {
        let img = kpac_core::synth::bandlimited_field(8, 8, 3, 0.3, 0.2, 0.8, 5);
        Tensor::from_image(&img)
    };
    let target = Tensor::zeros(1, 8, 8, 3);
    let loss_of = |net: &Network| -> f64 {
        let y = net.forward(&x).unwrap();
        let mut l = 0.0;
        for (a, b) in y.data.iter().zip(&target.data) {
            l += 0.5 * (a - b) * (a - b);
        }
        l / y.data.len() as f64
    };
    let trace = tiny.forward_trace(&x).unwrap();
    let yout = &trace.values[tiny.graph.output];
    let mut dout = Tensor::zeros(yout.n, yout.h, yout.w, yout.c);
    for i in 0..yout.data.len() {
        dout.data[i] = (yout.data[i] - target.data[i]) / yout.data.len() as f64;
    }
    let grads = tiny.graph.backward(&tiny.weights, &trace, dout).unwrap();
    let mut worst = (0.0f64, String::new());
    let step = 1e-5;
    let mut checked = 0usize;
    for (pi, def) in tiny.weights.defs.iter().enumerate() {
        let plen = tiny.weights.params[pi].len();
        // probe a deterministic subset of each buffer to keep runtime sane
        let stride = (plen / 25).max(1);
        for ei in (0..plen).step_by(stride) {
            let mut plus = tiny.clone();
            plus.weights.params[pi][ei] += step;
            let mut minus = tiny.clone();
            minus.weights.params[pi][ei] -= step;
            let fd = (loss_of(&plus) - loss_of(&minus)) / (2.0 * step);
            let an = grads[pi][ei];
            let rel = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-3);
            checked += 1;
            if rel > worst.0 {
                worst = (rel, format!("{}[{}] fd={:.6e} an={:.6e}", def.name, ei, fd, an));
            }
        }
    }
    println!("gradcheck: {} probes, worst rel {:.3e} at {}", checked, worst.0, worst.1);

    // ---- validation dB margins at the acceptance geometry ----
    let kernels = [
        (KernelKind::Gaussian, 0.8),
        (KernelKind::Gaussian, 1.2),
        (KernelKind::Disc, 2.0),
    ];
    let t0 = Instant::now();
    for (kind, param) in kernels {
        for s in [2u64, 3, 5] {
            let s = ScaleFactor::of_int(s).unwrap();
            let cfg = ValidationConfig {
                kind,
                param,
                size: None,
                s,
                grid: (127, 127),
                eps: 1e-2,
                seed: 42,
                resample: Resample::Lanczos,
            };
            match commutativity_check(&cfg) {
                Ok(r) => println!("eq4 {kind:?} p={param} s={}: {:.1} dB", s, r.psnr_db),
                Err(e) => println!("eq4 {kind:?} p={param} s={}: ERR {e}", s),
            }
        }
    }
    println!("eq4 9 runs: {:.1} s", t0.elapsed().as_secs_f64());
    // rational-scale spot check through the same interface
    let cfg = ValidationConfig {
        kind: KernelKind::Gaussian,
        param: 1.2,
        size: None,
        s: kpac_core::scale::parse_scale("3.5").unwrap(),
        grid: (127, 127),
        eps: 1e-2,
        seed: 42,
        resample: Resample::Lanczos,
    };
    println!(
        "eq4 rational s=3.5: {:.1} dB",
        commutativity_check(&cfg).unwrap().psnr_db
    );

    let t0 = Instant::now();
    for (kind, param) in kernels {
        for s in [2u64, 3, 5] {
            // nearest image size to 127 that the rate divides
            let edge = ((127 + s / 2) / s * s) as usize;
            let s = ScaleFactor::of_int(s).unwrap();
            let cfg = ValidationConfig {
                kind,
                param,
                size: None,
                s,
                grid: (edge, edge),
                eps: 1e-2,
                seed: 42,
                resample: Resample::Lanczos,
            };
            match dilation_check(&cfg) {
                Ok(r) => println!(
                    "dilate {kind:?} p={param} s={} ({}x{}): {:.1} dB",
                    s, edge, edge, r.psnr_db
                ),
                Err(e) => println!("dilate {kind:?} p={param} s={}: ERR {e}", s),
            }
        }
    }
    println!("dilate 9 runs: {:.1} s", t0.elapsed().as_secs_f64());

    // ---- bracket accuracy ----
    let t0 = Instant::now();
    for seed in [42u64, 7, 11, 23] {
        let cfg = BracketConfig {
            kind: KernelKind::Gaussian,
            param: 1.2,
            size: None,
            target: ScaleFactor::new(7, 2).unwrap(),
            brackets: vec![ScaleFactor::of_int(3).unwrap(), ScaleFactor::of_int(4).unwrap()],
            grid: (127, 127),
            eps: 1e-2,
            seed,
        };
        match bracket_check(&cfg) {
            Ok(r) => println!(
                "bracket seed={seed}: uniform {:.6} fitted {:.6} (diff {:+.2e}) weights {:?} kkt {:.2e}",
                r.uniform_accuracy,
                r.fitted_accuracy,
                r.fitted_accuracy - r.uniform_accuracy,
                r.fitted_weights,
                r.nnls_kkt
            ),
            Err(e) => println!("bracket seed={seed}: ERR {e}"),
        }
    }
    println!("bracket 4 runs: {:.1} s", t0.elapsed().as_secs_f64());

    // ---- roundtrip ----
    for eps in [1e-2, 1e-3] {
        let (before, after) =
            roundtrip_gain(KernelKind::Gaussian, 1.2, (64, 64), eps, 12).unwrap();
        println!("roundtrip eps={eps}: blurred {before:.2} dB -> deblurred {after:.2} dB");
    }
}
