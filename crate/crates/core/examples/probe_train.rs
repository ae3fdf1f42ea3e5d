// Scratch: full toy training run to size the learning acceptance check.
// Args: [levels] [channels] [steps] [blocks] [seed]
use std::time::Instant;

use kpac_core::train::{train_toy, ToyConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mut cfg = ToyConfig::default();
    if let Some(v) = args.get(1) {
        cfg.net.levels = v.parse().unwrap();
    }
    if let Some(v) = args.get(2) {
        cfg.net.channels = v.parse().unwrap();
    }
    if let Some(v) = args.get(3) {
        cfg.steps = v.parse().unwrap();
    }
    if let Some(v) = args.get(4) {
        cfg.net.blocks = v.parse().unwrap();
    }
    if let Some(v) = args.get(5) {
        cfg.seed = v.parse().unwrap();
    }
    println!(
        "levels {} channels {} steps {} blocks {} seed {}",
        cfg.net.levels, cfg.net.channels, cfg.steps, cfg.net.blocks, cfg.seed
    );
    let t0 = Instant::now();
    let (_, report) = train_toy(&cfg).unwrap();
    println!("elapsed: {:.1} s", t0.elapsed().as_secs_f64());
    println!(
        "baseline {:.5} trained {:.5} improvement {:.3}",
        report.baseline_mae, report.trained_mae, report.improvement
    );
    let tail: Vec<_> = report.losses.iter().rev().take(5).collect();
    println!("loss head {:?}", &report.losses[..3.min(report.losses.len())]);
    println!("loss tail {:?}", tail);
}
