//! Optimization: Adam plus a synthetic end-to-end training harness.

pub mod adam;
pub mod toy;

pub use adam::{AdamConfig, AdamState};
pub use toy::{
    evaluate_mae, mae_loss, synthetic_pairs, train_on_pairs, train_toy, PairSet, ToyConfig,
    TrainReport,
};
