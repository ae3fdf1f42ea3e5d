//! A small from-scratch deblurring network: NHWC tensors, reverse-mode
//! gradients over a static graph, and a U-shaped model whose bottleneck
//! stacks parallel atrous convolutions that all read one shared tap set,
//! modulated by per-pixel and per-channel attention.

pub mod build;
pub mod count;
pub mod graph;
pub mod io;
pub mod ops;
pub mod weights;

pub use build::{BlockHandles, Network, NetworkConfig, LEAKY_SLOPE};
pub use count::{flops_estimate, param_count};
pub use graph::{Graph, Node, Op, Trace};
pub use io::{
    decode_weights, encode_weights, load_network, load_weights, save_network, save_weights,
};
pub use ops::{ConvGeom, Padding};
pub use weights::{NetworkWeights, ParamDef, ParamShape};
