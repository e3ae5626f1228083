//! In-memory execution of a [`BnnModel`] on simulated 2T2R arrays.
//!
//! Each layer is tiled over arrays of `rows × cols` bits. Array rows index
//! layer inputs and array columns index neurons, so neuron `j`'s weights run
//! down a column. A neuron's popcount is the sum of XNOR-PCSA reads down its
//! column across all row tiles; thresholding happens at the column foot in
//! ordinary digital logic.

use rand::Rng;

use super::bits::PackedBits;
use super::layer::BinaryLinearLayer;
use super::model::{argmax, BnnModel, Inference};
use crate::array::{read_bit_pcsa, read_xnor_pcsa, Array2T2R, DEFAULT_COLS, DEFAULT_ROWS};
use crate::device::{Calibration, ProgrammingCondition};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayGeometry {
    pub rows: usize,
    pub cols: usize,
    /// Number of physical arrays available to hold the model.
    pub max_arrays: usize,
}

impl Default for ArrayGeometry {
    fn default() -> Self {
        Self {
            rows: DEFAULT_ROWS,
            cols: DEFAULT_COLS,
            max_arrays: 4096,
        }
    }
}

impl ArrayGeometry {
    pub fn bits_per_array(&self) -> usize {
        self.rows * self.cols
    }

    /// Arrays needed for a `n_inputs × n_neurons` layer.
    pub fn arrays_for(&self, n_inputs: usize, n_neurons: usize) -> usize {
        n_inputs.div_ceil(self.rows) * n_neurons.div_ceil(self.cols)
    }

    pub fn arrays_for_model(&self, model: &BnnModel) -> usize {
        model.layers().iter().map(|l| self.arrays_for(l.n_inputs(), l.n_neurons())).sum()
    }
}

#[derive(Debug, Clone)]
struct LayerTiles {
    n_inputs: usize,
    n_neurons: usize,
    row_tiles: usize,
    col_tiles: usize,
    /// Row-tile-major: `arrays[ti * col_tiles + tj]`.
    arrays: Vec<Array2T2R>,
    thresholds: Vec<i32>,
}

/// A model programmed into 2T2R arrays. Resistances are frozen at
/// programming time; every read below is deterministic.
#[derive(Debug, Clone)]
pub struct ArrayBank {
    geometry: ArrayGeometry,
    layers: Vec<LayerTiles>,
    template: BnnModel,
}

impl ArrayBank {
    /// Programs every weight of `model` at condition `cond`. Tiles are
    /// written layer by layer, row tile by row tile, column tile by column
    /// tile, then array row by array row. Unused pad columns store 0; rows
    /// past the layer's input count stay unprogrammed.
    pub fn program<R: Rng + ?Sized>(
        model: &BnnModel,
        cond: &ProgrammingCondition,
        calib: &Calibration,
        geometry: ArrayGeometry,
        rng: &mut R,
    ) -> Result<Self> {
        if geometry.rows == 0 || geometry.cols == 0 {
            return Err(Error::Domain("array geometry must be nonzero".into()));
        }
        let needed = geometry.arrays_for_model(model);
        if needed > geometry.max_arrays {
            return Err(Error::Capacity {
                required: needed * geometry.bits_per_array(),
                available: geometry.max_arrays * geometry.bits_per_array(),
            });
        }
        cond.validate()?;
        let mut layers = Vec::with_capacity(model.layers().len());
        let mut word = vec![false; geometry.cols];
        for layer in model.layers() {
            let row_tiles = layer.n_inputs().div_ceil(geometry.rows);
            let col_tiles = layer.n_neurons().div_ceil(geometry.cols);
            let mut arrays = Vec::with_capacity(row_tiles * col_tiles);
            for ti in 0..row_tiles {
                for tj in 0..col_tiles {
                    let mut a = Array2T2R::new(geometry.rows, geometry.cols)?;
                    for r in 0..geometry.rows {
                        let i = ti * geometry.rows + r;
                        if i >= layer.n_inputs() {
                            break;
                        }
                        for (c, bit) in word.iter_mut().enumerate() {
                            let j = tj * geometry.cols + c;
                            *bit = j < layer.n_neurons() && layer.weight(j, i);
                        }
                        a.program_word(r, &word, cond, calib, rng)?;
                    }
                    arrays.push(a);
                }
            }
            layers.push(LayerTiles {
                n_inputs: layer.n_inputs(),
                n_neurons: layer.n_neurons(),
                row_tiles,
                col_tiles,
                arrays,
                thresholds: layer.thresholds().to_vec(),
            });
        }
        Ok(Self {
            geometry,
            layers,
            template: model.clone(),
        })
    }

    pub fn geometry(&self) -> ArrayGeometry {
        self.geometry
    }

    pub fn array_count(&self) -> usize {
        self.layers.iter().map(|l| l.arrays.len()).sum()
    }

    pub fn program_energy_j(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| &l.arrays)
            .map(|a| a.cumulative_program_energy_j())
            .sum()
    }

    /// Popcounts of one layer computed by XNOR-PCSA reads summed down columns.
    fn column_popcounts(&self, tiles: &LayerTiles, x: &PackedBits) -> Result<Vec<u32>> {
        if x.len() != tiles.n_inputs {
            return Err(Error::Length {
                expected: tiles.n_inputs,
                got: x.len(),
            });
        }
        let g = self.geometry;
        let mut counts = vec![0u32; tiles.n_neurons];
        for ti in 0..tiles.row_tiles {
            let rows = g.rows.min(tiles.n_inputs - ti * g.rows);
            for tj in 0..tiles.col_tiles {
                let array = &tiles.arrays[ti * tiles.col_tiles + tj];
                let cols = g.cols.min(tiles.n_neurons - tj * g.cols);
                for r in 0..rows {
                    let input = x.get(ti * g.rows + r);
                    for (c, count) in counts[tj * g.cols..tj * g.cols + cols].iter_mut().enumerate() {
                        *count += read_xnor_pcsa(array.cell(r, c)?, input) as u32;
                    }
                }
            }
        }
        Ok(counts)
    }

    /// In-memory inference on a binarized input.
    pub fn infer_bits(&self, x: &PackedBits) -> Result<Inference> {
        let (hidden, last) = self.layers.split_at(self.layers.len() - 1);
        let mut act: Option<PackedBits> = None;
        for tiles in hidden {
            let counts = self.column_popcounts(tiles, act.as_ref().unwrap_or(x))?;
            let fired: Vec<bool> = counts.iter().zip(&tiles.thresholds).map(|(&p, &t)| p as i32 >= t).collect();
            act = Some(PackedBits::from_bools(&fired));
        }
        let last = &last[0];
        let counts = self.column_popcounts(last, act.as_ref().unwrap_or(x))?;
        let n = last.n_inputs as i32;
        let scores: Vec<i32> = counts.iter().map(|&p| 2 * p as i32 - n).collect();
        Ok(Inference {
            class: argmax(&scores),
            scores,
        })
    }

    pub fn infer(&self, input: &[f32]) -> Result<Inference> {
        if input.len() != self.template.n_inputs() {
            return Err(Error::Dimension {
                expected: format!("{} inputs", self.template.n_inputs()),
                got: format!("{}", input.len()),
            });
        }
        self.infer_bits(&self.template.binarizer.binarize(input))
    }

    /// The weights as a plain PCSA read sees them: the programmed model with
    /// every resistance-induced flip applied.
    pub fn read_back_model(&self) -> Result<BnnModel> {
        let g = self.geometry;
        let mut layers = Vec::with_capacity(self.layers.len());
        for tiles in &self.layers {
            let mut rows = vec![PackedBits::zeros(tiles.n_inputs); tiles.n_neurons];
            for (j, row) in rows.iter_mut().enumerate() {
                let (tj, c) = (j / g.cols, j % g.cols);
                for i in 0..tiles.n_inputs {
                    let (ti, r) = (i / g.rows, i % g.rows);
                    let cell = tiles.arrays[ti * tiles.col_tiles + tj].cell(r, c)?;
                    row.set(i, read_bit_pcsa(cell));
                }
            }
            let thresholds: Vec<i64> = tiles.thresholds.iter().map(|&t| t as i64).collect();
            layers.push(BinaryLinearLayer::new(tiles.n_inputs, &rows, &thresholds)?);
        }
        let mut model = BnnModel::new(layers)?;
        model.binarizer = self.template.binarizer;
        Ok(model)
    }
}

/// Programs `model` into fresh arrays at `cond` and classifies `input` with
/// XNOR-PCSA reads.
pub fn run_on_arrays<R: Rng + ?Sized>(
    model: &BnnModel,
    cond: &ProgrammingCondition,
    calib: &Calibration,
    geometry: ArrayGeometry,
    input: &[f32],
    rng: &mut R,
) -> Result<Inference> {
    ArrayBank::program(model, cond, calib, geometry, rng)?.infer(input)
}
