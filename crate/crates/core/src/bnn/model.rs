use serde::Serialize;

use super::bits::PackedBits;
use super::layer::BinaryLinearLayer;
use crate::error::{Error, Result};

/// First-layer input rule: a normalized pixel above `threshold` becomes +1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputBinarizer {
    pub threshold: f32,
}

impl Default for InputBinarizer {
    fn default() -> Self {
        Self { threshold: 0.5 }
    }
}

impl InputBinarizer {
    pub fn binarize(&self, input: &[f32]) -> PackedBits {
        let bits: Vec<bool> = input.iter().map(|&v| v > self.threshold).collect();
        PackedBits::from_bools(&bits)
    }
}

/// Canonical byte rule for 8-bit images: `byte >= 128` is +1. Agrees with
/// `byte / 255 > 0.5`.
pub fn binarize_bytes(pixels: &[u8]) -> PackedBits {
    let bits: Vec<bool> = pixels.iter().map(|&p| p >= 128).collect();
    PackedBits::from_bools(&bits)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Inference {
    pub class: usize,
    pub scores: Vec<i32>,
}

/// Stack of binary layers. Hidden layers threshold their popcounts; the last
/// layer emits integer scores and the class is their argmax (lowest index
/// wins ties).
#[derive(Debug, Clone, PartialEq)]
pub struct BnnModel {
    layers: Vec<BinaryLinearLayer>,
    pub binarizer: InputBinarizer,
}

impl BnnModel {
    pub fn new(layers: Vec<BinaryLinearLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Domain("model needs at least one layer".into()));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].n_neurons() != pair[1].n_inputs() {
                return Err(Error::Dimension {
                    expected: format!("layer {} inputs = {}", k + 1, pair[0].n_neurons()),
                    got: format!("{}", pair[1].n_inputs()),
                });
            }
        }
        Ok(Self {
            layers,
            binarizer: InputBinarizer::default(),
        })
    }

    pub fn layers(&self) -> &[BinaryLinearLayer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [BinaryLinearLayer] {
        &mut self.layers
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].n_inputs()
    }

    pub fn n_classes(&self) -> usize {
        self.layers[self.layers.len() - 1].n_neurons()
    }

    /// Total number of stored weight bits.
    pub fn weight_bits(&self) -> usize {
        self.layers.iter().map(|l| l.n_inputs() * l.n_neurons()).sum()
    }

    pub fn forward(&self, input: &[f32]) -> Result<Inference> {
        if input.len() != self.n_inputs() {
            return Err(Error::Dimension {
                expected: format!("{} inputs", self.n_inputs()),
                got: format!("{}", input.len()),
            });
        }
        self.forward_bits(&self.binarizer.binarize(input))
    }

    pub fn forward_bits(&self, x: &PackedBits) -> Result<Inference> {
        let (hidden, last) = self.layers.split_at(self.layers.len() - 1);
        let mut act: Option<PackedBits> = None;
        for layer in hidden {
            act = Some(layer.activate(act.as_ref().unwrap_or(x))?);
        }
        let scores = last[0].scores(act.as_ref().unwrap_or(x))?;
        Ok(Inference {
            class: argmax(&scores),
            scores,
        })
    }

    /// Binary outputs of every hidden layer, in order.
    pub fn hidden_activations(&self, x: &PackedBits) -> Result<Vec<PackedBits>> {
        let mut out: Vec<PackedBits> = Vec::with_capacity(self.layers.len() - 1);
        for layer in &self.layers[..self.layers.len() - 1] {
            let next = layer.activate(out.last().unwrap_or(x))?;
            out.push(next);
        }
        Ok(out)
    }

    /// Fraction of `inputs` classified as `labels`.
    pub fn accuracy(&self, inputs: &[PackedBits], labels: &[u8]) -> Result<f64> {
        if inputs.len() != labels.len() || inputs.is_empty() {
            return Err(Error::Dimension {
                expected: format!("{} labels", inputs.len()),
                got: format!("{}", labels.len()),
            });
        }
        let mut correct = 0usize;
        for (x, &y) in inputs.iter().zip(labels) {
            correct += (self.forward_bits(x)?.class == y as usize) as usize;
        }
        Ok(correct as f64 / inputs.len() as f64)
    }
}

/// Index of the largest score; the lowest index wins ties.
pub fn argmax(scores: &[i32]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

pub fn forward(model: &BnnModel, input: &[f32]) -> Result<Inference> {
    model.forward(input)
}
