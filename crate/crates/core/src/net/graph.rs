//! A small reverse-mode tape over whole tensors. Networks are built as a
//! topologically ordered node list; parameters live outside the graph and
//! are referenced by index, so several nodes can share one parameter and
//! their gradients accumulate into the same slot.

use crate::error::{Error, Result};
use crate::net::ops::{
    add, concat_channels, conv2d, conv2d_backward_input, conv2d_backward_params, conv_transpose2d,
    conv_transpose2d_backward_input, conv_transpose2d_backward_params, global_avg_pool,
    global_avg_pool_backward, leaky_relu, leaky_relu_backward, mul_broadcast,
    mul_broadcast_backward, sigmoid, sigmoid_backward, slice_channels, slice_channels_backward,
    split_channels, ConvGeom,
};
use crate::net::weights::NetworkWeights;
use crate::tensor::Tensor;

#[derive(Debug, Clone)]
pub enum Op {
    /// The graph's single external input.
    Input,
    Conv {
        taps: usize,
        bias: usize,
        out_c: usize,
        geom: ConvGeom,
    },
    ConvT {
        taps: usize,
        bias: usize,
        out_c: usize,
        kh: usize,
        kw: usize,
        stride: usize,
    },
    LeakyRelu {
        slope: f64,
    },
    Sigmoid,
    /// Global average pool over H and W.
    Gap,
    /// Channel concatenation of all inputs.
    Concat,
    /// Channel slice [from, from+len) of the single input.
    SliceC {
        from: usize,
        len: usize,
    },
    /// Broadcast multiply: inputs[0] * inputs[1].
    Mul,
    /// Elementwise sum of the two inputs.
    Add,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub op: Op,
    pub inputs: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Graph {
    pub nodes: Vec<Node>,
    pub input: usize,
    pub output: usize,
}

/// All intermediate activations from one forward pass, indexed by node.
pub struct Trace {
    pub values: Vec<Tensor>,
}

impl Graph {
    pub fn forward(&self, weights: &NetworkWeights, x: &Tensor) -> Result<Trace> {
        let mut values: Vec<Tensor> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let out = match &node.op {
                Op::Input => x.clone(),
                Op::Conv {
                    taps,
                    bias,
                    out_c,
                    geom,
                } => conv2d(
                    &values[node.inputs[0]],
                    &weights.params[*taps],
                    &weights.params[*bias],
                    *out_c,
                    geom,
                )?,
                Op::ConvT {
                    taps,
                    bias,
                    out_c,
                    kh,
                    kw,
                    stride,
                } => conv_transpose2d(
                    &values[node.inputs[0]],
                    &weights.params[*taps],
                    &weights.params[*bias],
                    *out_c,
                    *kh,
                    *kw,
                    *stride,
                )?,
                Op::LeakyRelu { slope } => leaky_relu(&values[node.inputs[0]], *slope),
                Op::Sigmoid => sigmoid(&values[node.inputs[0]]),
                Op::Gap => global_avg_pool(&values[node.inputs[0]]),
                Op::Concat => {
                    let parts: Vec<&Tensor> = node.inputs.iter().map(|&i| &values[i]).collect();
                    concat_channels(&parts)?
                }
                Op::SliceC { from, len } => slice_channels(&values[node.inputs[0]], *from, *len),
                Op::Mul => mul_broadcast(&values[node.inputs[0]], &values[node.inputs[1]])?,
                Op::Add => add(&values[node.inputs[0]], &values[node.inputs[1]])?,
            };
            values.push(out);
        }
        Ok(Trace { values })
    }

    /// Walks the tape in reverse from `dout` (the loss gradient at the
    /// output node) and returns one gradient buffer per parameter.
    /// Shared parameters receive the sum of every use's contribution.
    pub fn backward(
        &self,
        weights: &NetworkWeights,
        trace: &Trace,
        dout: Tensor,
    ) -> Result<Vec<Vec<f64>>> {
        let mut grads: Vec<Vec<f64>> = weights.params.iter().map(|p| vec![0.0; p.len()]).collect();
        let mut dvalues: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        dvalues[self.output] = Some(dout);

        let accumulate = |slot: &mut Option<Tensor>, g: Tensor| {
            match slot {
                Some(acc) => {
                    for (a, v) in acc.data.iter_mut().zip(&g.data) {
                        *a += v;
                    }
                }
                None => *slot = Some(g),
            }
        };

        for id in (0..self.nodes.len()).rev() {
            let Some(dy) = dvalues[id].take() else {
                continue;
            };
            let node = &self.nodes[id];
            match &node.op {
                Op::Input => {}
                Op::Conv {
                    taps,
                    bias,
                    out_c,
                    geom,
                } => {
                    let x = &trace.values[node.inputs[0]];
                    let (dtaps, dbias) = conv2d_backward_params(x, &dy, *out_c, geom)?;
                    for (g, v) in grads[*taps].iter_mut().zip(&dtaps) {
                        *g += v;
                    }
                    for (g, v) in grads[*bias].iter_mut().zip(&dbias) {
                        *g += v;
                    }
                    let dx =
                        conv2d_backward_input(&dy, &weights.params[*taps], (x.h, x.w, x.c), geom)?;
                    accumulate(&mut dvalues[node.inputs[0]], dx);
                }
                Op::ConvT {
                    taps,
                    bias: bias_idx,
                    kh,
                    kw,
                    stride,
                    ..
                } => {
                    let u = &trace.values[node.inputs[0]];
                    let (dtaps, dbias) =
                        conv_transpose2d_backward_params(u, &dy, *kh, *kw, *stride)?;
                    for (g, v) in grads[*taps].iter_mut().zip(&dtaps) {
                        *g += v;
                    }
                    for (g, v) in grads[*bias_idx].iter_mut().zip(&dbias) {
                        *g += v;
                    }
                    let dx = conv_transpose2d_backward_input(
                        &dy,
                        &weights.params[*taps],
                        u.c,
                        *kh,
                        *kw,
                        *stride,
                    )?;
                    accumulate(&mut dvalues[node.inputs[0]], dx);
                }
                Op::LeakyRelu { slope } => {
                    let dx = leaky_relu_backward(&trace.values[node.inputs[0]], &dy, *slope);
                    accumulate(&mut dvalues[node.inputs[0]], dx);
                }
                Op::Sigmoid => {
                    let dx = sigmoid_backward(&trace.values[id], &dy);
                    accumulate(&mut dvalues[node.inputs[0]], dx);
                }
                Op::Gap => {
                    let x = &trace.values[node.inputs[0]];
                    let dx = global_avg_pool_backward(&dy, x.h, x.w);
                    accumulate(&mut dvalues[node.inputs[0]], dx);
                }
                Op::Concat => {
                    let widths: Vec<usize> =
                        node.inputs.iter().map(|&i| trace.values[i].c).collect();
                    let parts = split_channels(&dy, &widths);
                    for (&inp, part) in node.inputs.iter().zip(parts) {
                        accumulate(&mut dvalues[inp], part);
                    }
                }
                Op::SliceC { from, .. } => {
                    let total_c = trace.values[node.inputs[0]].c;
                    let dx = slice_channels_backward(&dy, total_c, *from);
                    accumulate(&mut dvalues[node.inputs[0]], dx);
                }
                Op::Mul => {
                    let a = &trace.values[node.inputs[0]];
                    let b = &trace.values[node.inputs[1]];
                    let (da, db) = mul_broadcast_backward(a, b, &dy);
                    accumulate(&mut dvalues[node.inputs[0]], da);
                    accumulate(&mut dvalues[node.inputs[1]], db);
                }
                Op::Add => {
                    accumulate(&mut dvalues[node.inputs[0]], dy.clone());
                    accumulate(&mut dvalues[node.inputs[1]], dy);
                }
            }
        }
        Ok(grads)
    }

    /// Convenience forward that returns only the output tensor.
    pub fn infer(&self, weights: &NetworkWeights, x: &Tensor) -> Result<Tensor> {
        let trace = self.forward(weights, x)?;
        trace
            .values
            .into_iter()
            .nth(self.output)
            .ok_or_else(|| Error::BadConfig("graph has no output node".into()))
    }
}
