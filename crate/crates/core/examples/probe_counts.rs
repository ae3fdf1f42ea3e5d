// Scratch: print exact parameter counts and FLOPs for regression pins.
use kpac_core::net::build::{Network, NetworkConfig};
use kpac_core::net::count::{flops_estimate, param_count};

fn main() {
    let full = NetworkConfig::default();
    let two = NetworkConfig {
        levels: 2,
        ..NetworkConfig::default()
    };
    let unshared = NetworkConfig {
        levels: 2,
        weight_sharing: false,
        ..NetworkConfig::default()
    };
    for (name, cfg) in [("full", full), ("two-level", two), ("unshared", unshared)] {
        let net = Network::build(cfg, 1).unwrap();
        println!("{name}: params {}", param_count(&net.weights));
    }
    println!("flops 1280x720: {}", flops_estimate(&full, 720, 1280).unwrap());
    let tiny = NetworkConfig {
        levels: 2,
        blocks: 1,
        kernel_size: 3,
        branches: 3,
        channels: 8,
        weight_sharing: true,
    };
    let net = Network::build(tiny, 1).unwrap();
    println!("tiny: params {}", param_count(&net.weights));
}
