//! Network assembly: a U-shaped encoder/decoder with a stack of
//! kernel-sharing parallel atrous blocks at the bottleneck and a global
//! residual connection. Layer widths derive from one base channel count
//! so the same builder produces the full-size model and small test rigs.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::net::graph::{Graph, Node, Op};
use crate::net::ops::{ConvGeom, Padding};
use crate::net::weights::{NetworkWeights, ParamShape};
use crate::tensor::Tensor;

/// Negative slope shared by every leaky-relu in the network.
pub const LEAKY_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkConfig {
    /// Encoder depth: 2 or 3 stride-2 stages.
    pub levels: usize,
    /// Number of atrous blocks at the bottleneck.
    pub blocks: usize,
    /// Spatial size of the shared atrous taps.
    pub kernel_size: usize,
    /// Number of parallel dilation branches per block (rates 1..=n).
    pub branches: usize,
    /// Base channel width c; the encoder runs at c/2 and c.
    pub channels: usize,
    /// One tap set per block shared across branches (true) or an
    /// independent tap set per branch (false).
    pub weight_sharing: bool,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            levels: 3,
            blocks: 2,
            kernel_size: 5,
            branches: 5,
            channels: 96,
            weight_sharing: true,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels != 2 && self.levels != 3 {
            return Err(Error::BadConfig(format!(
                "levels must be 2 or 3, got {}",
                self.levels
            )));
        }
        if self.blocks == 0 {
            return Err(Error::BadConfig("blocks must be at least 1".into()));
        }
        if self.kernel_size == 0 || self.kernel_size % 2 == 0 {
            return Err(Error::BadConfig(format!(
                "kernel size must be odd, got {}",
                self.kernel_size
            )));
        }
        if self.branches == 0 {
            return Err(Error::BadConfig("need at least one dilation branch".into()));
        }
        if self.channels < 2 || self.channels % 2 != 0 {
            return Err(Error::BadConfig(format!(
                "channel width must be even and at least 2, got {}",
                self.channels
            )));
        }
        Ok(())
    }

    /// Input H and W must be divisible by this (one factor of two per
    /// stride-2 stage).
    pub fn divisor(&self) -> usize {
        1 << self.levels
    }

    /// Branch width c/2.
    pub fn half(&self) -> usize {
        self.channels / 2
    }

    fn attn_wide(&self) -> usize {
        (self.channels / 3).max(1)
    }

    fn attn_narrow(&self) -> usize {
        (self.channels / 6).max(1)
    }

    fn shape_hidden(&self) -> usize {
        (self.channels / 6).max(1)
    }
}

/// Node ids of one block's interesting interior values, for inspection
/// and tests (attention surgery, branch isolation).
#[derive(Debug, Clone)]
pub struct BlockHandles {
    /// Block output (after fusion and activation).
    pub output: usize,
    /// Per-branch activations, post leaky-relu, dilation rate i+1.
    pub branches: Vec<usize>,
    /// Per-pixel attention stack output, n channels in (0,1).
    pub alpha: usize,
    /// Per-channel attention vector, c/2 sigmoids.
    pub beta: usize,
}

struct NetBuilder {
    nodes: Vec<Node>,
    weights: NetworkWeights,
}

impl NetBuilder {
    fn push(&mut self, op: Op, inputs: Vec<usize>) -> usize {
        self.nodes.push(Node { op, inputs });
        self.nodes.len() - 1
    }

    fn lrelu(&mut self, input: usize) -> usize {
        self.push(Op::LeakyRelu { slope: LEAKY_SLOPE }, vec![input])
    }

    fn conv_with(
        &mut self,
        input: usize,
        taps: usize,
        bias: usize,
        out_c: usize,
        k: usize,
        stride: usize,
        dilation: usize,
    ) -> usize {
        let geom = ConvGeom {
            kh: k,
            kw: k,
            stride,
            dilation,
            padding: Padding::Same,
        };
        self.push(
            Op::Conv {
                taps,
                bias,
                out_c,
                geom,
            },
            vec![input],
        )
    }

    fn conv(
        &mut self,
        name: &str,
        input: usize,
        in_c: usize,
        out_c: usize,
        k: usize,
        stride: usize,
        dilation: usize,
    ) -> usize {
        let taps = self.weights.push(
            format!("{name}.taps"),
            ParamShape::Conv {
                kh: k,
                kw: k,
                in_c,
                out_c,
            },
        );
        let bias = self
            .weights
            .push(format!("{name}.bias"), ParamShape::Vector { len: out_c });
        self.conv_with(input, taps, bias, out_c, k, stride, dilation)
    }

    fn conv_lrelu(
        &mut self,
        name: &str,
        input: usize,
        in_c: usize,
        out_c: usize,
        k: usize,
        stride: usize,
    ) -> usize {
        let conv = self.conv(name, input, in_c, out_c, k, stride, 1);
        self.lrelu(conv)
    }

    /// 4x4 stride-2 transposed conv plus leaky-relu: one upsampling stage.
    fn tconv_lrelu(&mut self, name: &str, input: usize, in_c: usize, out_c: usize) -> usize {
        let taps = self.weights.push(
            format!("{name}.taps"),
            ParamShape::TConv {
                kh: 4,
                kw: 4,
                out_c,
                in_c,
            },
        );
        let bias = self
            .weights
            .push(format!("{name}.bias"), ParamShape::Vector { len: out_c });
        let t = self.push(
            Op::ConvT {
                taps,
                bias,
                out_c,
                kh: 4,
                kw: 4,
                stride: 2,
            },
            vec![input],
        );
        self.lrelu(t)
    }

    /// One parallel-atrous block: n dilated branches off a single tap set,
    /// scaled per pixel by the alpha stack and per channel by the beta
    /// vector, concatenated, and fused back to c channels.
    fn kpac_block(&mut self, cfg: &NetworkConfig, b: usize, input: usize) -> BlockHandles {
        let c = cfg.channels;
        let half = cfg.half();
        let n = cfg.branches;
        let k = cfg.kernel_size;

        let shared = if cfg.weight_sharing {
            let taps = self.weights.push(
                format!("block{b}.atrous.taps"),
                ParamShape::Conv {
                    kh: k,
                    kw: k,
                    in_c: c,
                    out_c: half,
                },
            );
            let bias = self
                .weights
                .push(format!("block{b}.atrous.bias"), ParamShape::Vector { len: half });
            Some((taps, bias))
        } else {
            None
        };

        let mut branches = Vec::with_capacity(n);
        for i in 1..=n {
            let (taps, bias) = match shared {
                Some(pair) => pair,
                None => {
                    let taps = self.weights.push(
                        format!("block{b}.atrous{i}.taps"),
                        ParamShape::Conv {
                            kh: k,
                            kw: k,
                            in_c: c,
                            out_c: half,
                        },
                    );
                    let bias = self.weights.push(
                        format!("block{b}.atrous{i}.bias"),
                        ParamShape::Vector { len: half },
                    );
                    (taps, bias)
                }
            };
            let conv = self.conv_with(input, taps, bias, half, k, 1, i);
            branches.push(self.lrelu(conv));
        }

        let wide = cfg.attn_wide();
        let narrow = cfg.attn_narrow();
        let s1 = self.conv(&format!("block{b}.scale_attn1"), input, c, wide, 5, 1, 2);
        let s1 = self.lrelu(s1);
        let s2 = self.conv(&format!("block{b}.scale_attn2"), s1, wide, wide, 5, 1, 2);
        let s2 = self.lrelu(s2);
        let s3 = self.conv(&format!("block{b}.scale_attn3"), s2, wide, narrow, 5, 1, 2);
        let s3 = self.lrelu(s3);
        let s4 = self.conv(&format!("block{b}.scale_attn4"), s3, narrow, narrow, 5, 1, 2);
        let s4 = self.lrelu(s4);
        let alpha_conv = self.conv(&format!("block{b}.scale_attn_alpha"), s4, narrow, n, 5, 1, 1);
        let alpha = self.push(Op::Sigmoid, vec![alpha_conv]);

        let hidden = cfg.shape_hidden();
        let pooled = self.push(Op::Gap, vec![input]);
        let f1 = self.conv(&format!("block{b}.shape_fc1"), pooled, c, hidden, 1, 1, 1);
        let f1 = self.lrelu(f1);
        let f2 = self.conv(&format!("block{b}.shape_fc2"), f1, hidden, half, 1, 1, 1);
        let beta = self.push(Op::Sigmoid, vec![f2]);

        let mut scaled = Vec::with_capacity(n);
        for (i, &branch) in branches.iter().enumerate() {
            let by_beta = self.push(Op::Mul, vec![branch, beta]);
            let alpha_i = self.push(Op::SliceC { from: i, len: 1 }, vec![alpha]);
            scaled.push(self.push(Op::Mul, vec![by_beta, alpha_i]));
        }
        let cat = self.push(Op::Concat, scaled);
        let fused = self.conv(&format!("block{b}.fusion"), cat, n * half, c, 3, 1, 1);
        let output = self.lrelu(fused);

        BlockHandles {
            output,
            branches,
            alpha,
            beta,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Network {
    pub config: NetworkConfig,
    pub graph: Graph,
    pub weights: NetworkWeights,
    pub blocks: Vec<BlockHandles>,
}

impl Network {
    /// Builds the graph and zero-filled parameter slots without
    /// initializing weights.
    pub(crate) fn skeleton(config: NetworkConfig) -> Result<Network> {
        config.validate()?;
        let c = config.channels;
        let half = config.half();
        let mut nb = NetBuilder {
            nodes: Vec::new(),
            weights: NetworkWeights::empty(),
        };

        let input = nb.push(Op::Input, vec![]);
        let c1_1 = nb.conv_lrelu("conv1_1", input, 3, half, 5, 1);
        let c1_2 = nb.conv_lrelu("conv1_2", c1_1, half, half, 3, 1);
        let c2_1 = nb.conv_lrelu("conv2_1", c1_2, half, half, 3, 2);
        let c2_2 = nb.conv_lrelu("conv2_2", c2_1, half, half, 3, 1);
        let c3_1 = nb.conv_lrelu("conv3_1", c2_2, half, c, 3, 2);
        let c3_2 = nb.conv_lrelu("conv3_2", c3_1, c, c, 3, 1);
        let feat = if config.levels == 3 {
            let c4_1 = nb.conv_lrelu("conv4_1", c3_2, c, c, 3, 2);
            nb.conv_lrelu("conv4_2", c4_1, c, c, 3, 1)
        } else {
            c3_2
        };

        let mut blocks = Vec::with_capacity(config.blocks);
        let mut cat_inputs = vec![feat];
        let mut cur = feat;
        for b in 1..=config.blocks {
            let handles = nb.kpac_block(&config, b, cur);
            cur = handles.output;
            cat_inputs.push(handles.output);
            blocks.push(handles);
        }
        let skip = nb.push(Op::Concat, cat_inputs);

        let c5_1 = nb.conv_lrelu("conv5_1", skip, (config.blocks + 1) * c, c, 3, 1);
        let c5_2 = nb.conv_lrelu("conv5_2", c5_1, c, c, 3, 1);
        let mut cur = c5_2;
        if config.levels == 3 {
            let d1 = nb.tconv_lrelu("deconv1", cur, c, c);
            let cat = nb.push(Op::Concat, vec![d1, c3_2]);
            cur = nb.conv_lrelu("conv6", cat, 2 * c, c, 3, 1);
        }
        let d2 = nb.tconv_lrelu("deconv2", cur, c, half);
        let cat2 = nb.push(Op::Concat, vec![d2, c2_2]);
        let c7 = nb.conv_lrelu("conv7", cat2, 2 * half, half, 3, 1);
        let d3 = nb.tconv_lrelu("deconv3", c7, half, half);
        let cat3 = nb.push(Op::Concat, vec![d3, c1_2]);
        // The final projection carries no activation so the residual add
        // can express the identity exactly.
        let c8 = nb.conv("conv8", cat3, 2 * half, 3, 5, 1, 1);
        let output = nb.push(Op::Add, vec![c8, input]);

        Ok(Network {
            config,
            graph: Graph {
                nodes: nb.nodes,
                input,
                output,
            },
            weights: nb.weights,
            blocks,
        })
    }

    /// Builds the network with fan-in-scaled uniform taps and zero biases
    /// drawn deterministically from `seed`.
    pub fn build(config: NetworkConfig, seed: u64) -> Result<Network> {
        let mut net = Self::skeleton(config)?;
        net.weights.init(seed);
        Ok(net)
    }

    /// Rebuilds the graph for `config` and adopts `weights` after checking
    /// every parameter's name and shape against the freshly built layout.
    pub fn from_weights(config: NetworkConfig, weights: NetworkWeights) -> Result<Network> {
        let mut net = Self::skeleton(config)?;
        if net.weights.defs.len() != weights.defs.len() {
            return Err(Error::WeightsShapeMismatch(format!(
                "expected {} parameters, got {}",
                net.weights.defs.len(),
                weights.defs.len()
            )));
        }
        for (want, got) in net.weights.defs.iter().zip(&weights.defs) {
            if want.name != got.name || want.shape != got.shape {
                return Err(Error::WeightsShapeMismatch(format!(
                    "expected {} {:?}, got {} {:?}",
                    want.name, want.shape, got.name, got.shape
                )));
            }
        }
        net.weights = weights;
        Ok(net)
    }

    /// Validates that `x` is an RGB batch whose spatial dims survive the
    /// network's stride-2 stages.
    pub fn check_input(&self, x: &Tensor) -> Result<()> {
        if x.c != 3 {
            return Err(Error::BadChannelCount(x.c));
        }
        let d = self.config.divisor();
        if x.h == 0 || x.w == 0 || x.h % d != 0 || x.w % d != 0 {
            return Err(Error::BadSpatialDims {
                height: x.h,
                width: x.w,
                divisor: d,
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        self.check_input(x)?;
        self.graph.infer(&self.weights, x)
    }

    /// Forward pass keeping every node value, for backward or inspection.
    pub fn forward_trace(&self, x: &Tensor) -> Result<crate::net::graph::Trace> {
        self.check_input(x)?;
        self.graph.forward(&self.weights, x)
    }

    /// Runs the network on a single image. Grayscale input is replicated
    /// to RGB first; the output is always RGB.
    pub fn infer_image(&self, img: &Image) -> Result<Image> {
        let rgb = if img.channels() == 1 { img.to_rgb() } else { img.clone() };
        let x = Tensor::from_image(&rgb);
        let y = self.forward(&x)?;
        y.sample_to_image(0)
    }
}
