// Scratch: find a bracket scene where the fitted blend beats uniform by a
// visible margin.
use kpac_core::experiments::{bracket_check, BracketConfig};
use kpac_core::kernel::KernelKind;
use kpac_core::scale::ScaleFactor;

fn main() {
    let cases = [
        (KernelKind::Disc, 2.0, 1e-2),
        (KernelKind::Disc, 2.0, 3e-2),
        (KernelKind::Disc, 1.5, 1e-2),
        (KernelKind::Disc, 3.0, 1e-2),
        (KernelKind::Gaussian, 1.2, 1e-2),
        (KernelKind::Gaussian, 2.0, 1e-2),
        (KernelKind::Gaussian, 0.8, 1e-2),
    ];
    for (kind, param, eps) in cases {
        for seed in [42u64, 7, 11, 23, 5] {
            let cfg = BracketConfig {
                kind,
                param,
                size: None,
                target: ScaleFactor::new(7, 2).unwrap(),
                brackets: vec![
                    ScaleFactor::of_int(3).unwrap(),
                    ScaleFactor::of_int(4).unwrap(),
                ],
                grid: (127, 127),
                eps,
                seed,
            };
            match bracket_check(&cfg) {
                Ok(r) => println!(
                    "{kind:?} p={param} eps={eps} seed={seed}: uni {:.5} fit {:.5} diff {:+.2e} w {:?}",
                    r.uniform_accuracy,
                    r.fitted_accuracy,
                    r.fitted_accuracy - r.uniform_accuracy,
                    r.fitted_weights
                        .iter()
                        .map(|w| (w * 1e4).round() / 1e4)
                        .collect::<Vec<_>>(),
                ),
                Err(e) => println!("{kind:?} p={param} eps={eps} seed={seed}: ERR {e}"),
            }
        }
    }
}
