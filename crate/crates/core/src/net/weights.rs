//! Parameter storage. Weights live in a flat list of named buffers so the
//! graph can reference them by index, share them across nodes, and the
//! optimizer can walk them in a stable order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamShape {
    /// Convolution taps laid out (kh, kw, in_c, out_c).
    Conv {
        kh: usize,
        kw: usize,
        in_c: usize,
        out_c: usize,
    },
    /// Transposed-convolution taps stored in the associated
    /// down-convolution's layout (kh, kw, out_c, in_c).
    TConv {
        kh: usize,
        kw: usize,
        out_c: usize,
        in_c: usize,
    },
    /// A flat vector, e.g. a bias.
    Vector { len: usize },
}

impl ParamShape {
    pub fn len(&self) -> usize {
        match *self {
            ParamShape::Conv { kh, kw, in_c, out_c } => kh * kw * in_c * out_c,
            ParamShape::TConv { kh, kw, out_c, in_c } => kh * kw * out_c * in_c,
            ParamShape::Vector { len } => len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Inputs feeding one output unit, used to scale the init range.
    /// Biases have none and start at zero.
    fn fan_in(&self) -> Option<usize> {
        match *self {
            ParamShape::Conv { kh, kw, in_c, .. } => Some(kh * kw * in_c),
            ParamShape::TConv { kh, kw, in_c, .. } => Some(kh * kw * in_c),
            ParamShape::Vector { .. } => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParamDef {
    pub name: String,
    pub shape: ParamShape,
}

#[derive(Debug, Clone)]
pub struct NetworkWeights {
    pub defs: Vec<ParamDef>,
    pub params: Vec<Vec<f64>>,
}

impl NetworkWeights {
    pub fn empty() -> Self {
        NetworkWeights {
            defs: Vec::new(),
            params: Vec::new(),
        }
    }

    /// Registers a zero-filled parameter and returns its index.
    pub fn push(&mut self, name: impl Into<String>, shape: ParamShape) -> usize {
        self.defs.push(ParamDef {
            name: name.into(),
            shape,
        });
        self.params.push(vec![0.0; shape.len()]);
        self.params.len() - 1
    }

    pub fn total_len(&self) -> usize {
        self.params.iter().map(|p| p.len()).sum()
    }

    /// Fills every tap buffer with U(-sqrt(6/fan_in), sqrt(6/fan_in)) in
    /// creation order; bias vectors stay zero. The draw order is fixed,
    /// so one seed always yields the same network.
    pub fn init(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (def, buf) in self.defs.iter().zip(self.params.iter_mut()) {
            match def.shape.fan_in() {
                Some(fan_in) => {
                    let bound = (6.0 / fan_in as f64).sqrt();
                    for v in buf.iter_mut() {
                        *v = rng.gen_range(-bound..bound);
                    }
                }
                None => buf.iter_mut().for_each(|v| *v = 0.0),
            }
        }
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.defs.iter().position(|d| d.name == name)
    }
}
