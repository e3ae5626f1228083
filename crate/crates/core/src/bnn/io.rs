//! `BNN1` weight files. All integers little-endian:
//!
//! ```text
//! "BNN1"                    4 bytes
//! layer count               u32
//! per layer:
//!   n_inputs                u32
//!   n_neurons               u32
//!   thresholds              n_neurons × i32
//!   weights                 n_neurons × ceil(n_inputs/64) × u64, neuron-major,
//!                           bit i of a row in word i/64 at position i%64
//! ```

use std::io::{Read, Write};
use std::path::Path;

use super::layer::BinaryLinearLayer;
use super::model::BnnModel;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"BNN1";

pub fn write_model<W: Write>(model: &BnnModel, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(model.layers().len() as u32).to_le_bytes())?;
    for layer in model.layers() {
        out.write_all(&(layer.n_inputs() as u32).to_le_bytes())?;
        out.write_all(&(layer.n_neurons() as u32).to_le_bytes())?;
        for &t in layer.thresholds() {
            out.write_all(&t.to_le_bytes())?;
        }
        for &w in layer.weight_words() {
            out.write_all(&w.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn to_bytes(model: &BnnModel) -> Vec<u8> {
    let mut buf = Vec::new();
    write_model(model, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self
            .data
            .get(self.pos..end)
            .ok_or_else(|| Error::WeightFormat(format!("truncated while reading {what} at byte {}", self.pos)))?;
        self.pos = end;
        Ok(bytes.try_into().expect("slice has length N"))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(what)?))
    }
}

pub fn from_bytes(data: &[u8]) -> Result<BnnModel> {
    let mut c = Cursor { data, pos: 0 };
    if &c.take::<4>("magic")? != MAGIC {
        return Err(Error::WeightFormat("missing BNN1 magic".into()));
    }
    let n_layers = c.u32("layer count")? as usize;
    let mut layers = Vec::with_capacity(n_layers.min(64));
    for k in 0..n_layers {
        let n_inputs = c.u32("n_inputs")? as usize;
        let n_neurons = c.u32("n_neurons")? as usize;
        let mut thresholds = Vec::with_capacity(n_neurons.min(1 << 16));
        for _ in 0..n_neurons {
            thresholds.push(i32::from_le_bytes(c.take("threshold")?) as i64);
        }
        let n_words = n_neurons * n_inputs.div_ceil(64);
        let mut words = Vec::with_capacity(n_words.min(1 << 20));
        for _ in 0..n_words {
            words.push(u64::from_le_bytes(c.take("weights")?));
        }
        let layer = BinaryLinearLayer::from_words(n_inputs, n_neurons, words, &thresholds)
            .map_err(|e| Error::WeightFormat(format!("layer {k}: {e}")))?;
        layers.push(layer);
    }
    if c.pos != data.len() {
        return Err(Error::WeightFormat(format!("{} trailing bytes", data.len() - c.pos)));
    }
    BnnModel::new(layers)
}

pub fn read_model<R: Read>(mut input: R) -> Result<BnnModel> {
    let mut buf = Vec::new();
    input.read_to_end(&mut buf)?;
    from_bytes(&buf)
}

pub fn save(model: &BnnModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_bytes(model))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<BnnModel> {
    from_bytes(&std::fs::read(path)?)
}
