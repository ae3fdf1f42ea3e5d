//! Analytic accounting: exact parameter totals and a FLOP estimate from
//! shape propagation. FLOPs are counted as 2 multiply-accumulates per tap
//! visit for convolutions and transposed convolutions (fully connected
//! layers are 1x1 convolutions here, so they are included); activations,
//! pooling, and elementwise scaling are excluded.

use crate::error::{Error, Result};
use crate::net::build::{Network, NetworkConfig};
use crate::net::graph::{Graph, Op};
use crate::net::weights::NetworkWeights;

/// Exact element count over every tap and bias buffer.
pub fn param_count(weights: &NetworkWeights) -> usize {
    weights.total_len()
}

/// Per-node output shapes (h, w, c) for a single-sample input.
fn output_shapes(graph: &Graph, h: usize, w: usize, c: usize) -> Result<Vec<(usize, usize, usize)>> {
    let mut shapes: Vec<(usize, usize, usize)> = Vec::with_capacity(graph.nodes.len());
    for node in &graph.nodes {
        let shape = match &node.op {
            Op::Input => (h, w, c),
            Op::Conv { out_c, geom, .. } => {
                let (ih, iw, _) = shapes[node.inputs[0]];
                let (oh, ow, _, _) = geom.out_dims(ih, iw)?;
                (oh, ow, *out_c)
            }
            Op::ConvT { out_c, stride, .. } => {
                let (ih, iw, _) = shapes[node.inputs[0]];
                (ih * stride, iw * stride, *out_c)
            }
            Op::LeakyRelu { .. } | Op::Sigmoid | Op::Mul | Op::Add => shapes[node.inputs[0]],
            Op::Gap => {
                let (_, _, ic) = shapes[node.inputs[0]];
                (1, 1, ic)
            }
            Op::Concat => {
                let (ih, iw, _) = shapes[node.inputs[0]];
                let total = node.inputs.iter().map(|&i| shapes[i].2).sum();
                (ih, iw, total)
            }
            Op::SliceC { len, .. } => {
                let (ih, iw, _) = shapes[node.inputs[0]];
                (ih, iw, *len)
            }
        };
        shapes.push(shape);
    }
    Ok(shapes)
}

/// FLOPs for one forward pass of a single RGB image of the given size.
pub fn flops_estimate(config: &NetworkConfig, h: usize, w: usize) -> Result<u128> {
    let d = config.divisor();
    if h == 0 || w == 0 || h % d != 0 || w % d != 0 {
        return Err(Error::BadSpatialDims {
            height: h,
            width: w,
            divisor: d,
        });
    }
    let net = Network::skeleton(*config)?;
    let shapes = output_shapes(&net.graph, h, w, 3)?;
    let mut total: u128 = 0;
    for node in &net.graph.nodes {
        match &node.op {
            Op::Conv { out_c, geom, .. } => {
                let (ih, iw, ic) = shapes[node.inputs[0]];
                let (oh, ow, _, _) = geom.out_dims(ih, iw)?;
                total += 2
                    * (oh as u128)
                    * (ow as u128)
                    * (geom.kh * geom.kw) as u128
                    * (ic as u128)
                    * (*out_c as u128);
            }
            Op::ConvT { out_c, kh, kw, .. } => {
                let (ih, iw, ic) = shapes[node.inputs[0]];
                total +=
                    2 * (ih as u128) * (iw as u128) * (kh * kw) as u128 * (ic as u128) * (*out_c as u128);
            }
            _ => {}
        }
    }
    Ok(total)
}
