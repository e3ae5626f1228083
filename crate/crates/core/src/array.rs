//! Behavioral kilobit arrays: differential 2T2R cells read by a precharge
//! sense amplifier (PCSA), and single-ended 1T1R cells read against a
//! reference resistance.
//!
//! Logical 1 is stored as BL in LRS and BLb in HRS. Resistances are frozen
//! at programming time, so reads are deterministic unless the optional
//! read-noise hook is enabled.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::device::{sample_resistance, Calibration, DeviceState, ProgrammingCondition};
use crate::error::{Error, Result};

/// Resistance of a never-programmed device, ohms.
pub const PRISTINE_OHMS: f64 = 1e6;

/// Default array geometry: 32 × 32 bits, 2,048 devices in 2T2R.
pub const DEFAULT_ROWS: usize = 32;
pub const DEFAULT_COLS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell2T2R {
    pub r_bl_ohms: f64,
    pub r_blb_ohms: f64,
}

impl Default for Cell2T2R {
    fn default() -> Self {
        Self {
            r_bl_ohms: PRISTINE_OHMS,
            r_blb_ohms: PRISTINE_OHMS,
        }
    }
}

/// PCSA read: the branch with lower resistance discharges first. BL winning
/// reads as 1; an exact tie also reads as 1.
pub fn read_bit_pcsa(cell: &Cell2T2R) -> bool {
    cell.r_bl_ohms <= cell.r_blb_ohms
}

/// XNOR-augmented PCSA. The input bit selects which device sits on which
/// branch of the race: with input 1 the cell is read as stored, with input 0
/// the devices are swapped.
pub fn read_xnor_pcsa(cell: &Cell2T2R, input: bool) -> bool {
    let (left, right) = if input {
        (cell.r_bl_ohms, cell.r_blb_ohms)
    } else {
        (cell.r_blb_ohms, cell.r_bl_ohms)
    };
    if left == right {
        // ties resolve the same way as the plain read, then go through XNOR
        return input;
    }
    left < right
}

/// PCSA read with additive Gaussian noise on each device's log-resistance.
pub fn read_bit_pcsa_noisy<R: Rng + ?Sized>(cell: &Cell2T2R, sigma_ln: f64, rng: &mut R) -> bool {
    if sigma_ln <= 0.0 {
        return read_bit_pcsa(cell);
    }
    let n_bl: f64 = rng.sample(StandardNormal);
    let n_blb: f64 = rng.sample(StandardNormal);
    cell.r_bl_ohms.ln() + sigma_ln * n_bl <= cell.r_blb_ohms.ln() + sigma_ln * n_blb
}

/// Row-major matrix of bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl BitMatrix {
    pub fn new(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != rows * cols {
            return Err(Error::Length {
                expected: rows * cols,
                got: bits.len(),
            });
        }
        Ok(Self { rows, cols, bits })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let bits = (0..rows * cols).map(|i| f(i / cols, i % cols)).collect();
        Self { rows, cols, bits }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[bool] {
        &self.bits[row * self.cols..(row + 1) * self.cols]
    }

    pub fn complement(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }
}

/// Anything that can be read back bit by bit.
pub trait BitArray {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn read(&self, row: usize, col: usize) -> Result<bool>;
}

/// Hamming distance between the read-back contents and `expected`.
pub fn count_errors<A: BitArray + ?Sized>(array: &A, expected: &BitMatrix) -> Result<usize> {
    if (array.rows(), array.cols()) != (expected.rows(), expected.cols()) {
        return Err(Error::Dimension {
            expected: format!("{}x{}", array.rows(), array.cols()),
            got: format!("{}x{}", expected.rows(), expected.cols()),
        });
    }
    let mut errors = 0;
    for r in 0..array.rows() {
        for c in 0..array.cols() {
            errors += (array.read(r, c)? != expected.get(r, c)) as usize;
        }
    }
    Ok(errors)
}

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::Domain(format!("array dimensions must be positive, got {rows}x{cols}")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Array2T2R {
    rows: usize,
    cols: usize,
    cells: Vec<Cell2T2R>,
    energy_j: f64,
    last_condition: Option<ProgrammingCondition>,
    read_noise_sigma_ln: f64,
}

impl Array2T2R {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        check_dims(rows, cols)?;
        Ok(Self {
            rows,
            cols,
            cells: vec![Cell2T2R::default(); rows * cols],
            energy_j: 0.0,
            last_condition: None,
            read_noise_sigma_ln: 0.0,
        })
    }

    pub fn kilobit() -> Self {
        Self::new(DEFAULT_ROWS, DEFAULT_COLS).expect("nonzero dims")
    }

    pub fn bits(&self) -> usize {
        self.rows * self.cols
    }

    pub fn devices(&self) -> usize {
        2 * self.bits()
    }

    /// Total programming energy charged so far, joules.
    pub fn cumulative_program_energy_j(&self) -> f64 {
        self.energy_j
    }

    pub fn last_condition(&self) -> Option<ProgrammingCondition> {
        self.last_condition
    }

    /// Enables per-read log-resistance noise for [`read_noisy`](Self::read_noisy).
    pub fn set_read_noise(&mut self, sigma_ln: f64) {
        self.read_noise_sigma_ln = sigma_ln.max(0.0);
    }

    pub fn cell(&self, row: usize, col: usize) -> Result<&Cell2T2R> {
        self.check_index(row, col)?;
        Ok(&self.cells[row * self.cols + col])
    }

    fn check_index(&self, row: usize, col: usize) -> Result<()> {
        if row >= self.rows {
            return Err(Error::Bounds {
                what: "array rows",
                index: row,
                size: self.rows,
            });
        }
        if col >= self.cols {
            return Err(Error::Bounds {
                what: "array cols",
                index: col,
                size: self.cols,
            });
        }
        Ok(())
    }

    /// Writes one word differentially. Each bit samples BL then BLb, so the
    /// random stream consumption is fixed by (row width, bit order).
    pub fn program_word<R: Rng + ?Sized>(
        &mut self,
        row: usize,
        bits: &[bool],
        cond: &ProgrammingCondition,
        calib: &Calibration,
        rng: &mut R,
    ) -> Result<()> {
        if row >= self.rows {
            return Err(Error::Bounds {
                what: "array rows",
                index: row,
                size: self.rows,
            });
        }
        if bits.len() != self.cols {
            return Err(Error::Length {
                expected: self.cols,
                got: bits.len(),
            });
        }
        let dist = calib.condition_to_distribution(cond)?;
        let energy = calib.programming_energy(cond).mean_energy_per_bit_j;
        let base = row * self.cols;
        for (cell, &bit) in self.cells[base..base + self.cols].iter_mut().zip(bits) {
            let (bl, blb) = if bit {
                (DeviceState::Lrs, DeviceState::Hrs)
            } else {
                (DeviceState::Hrs, DeviceState::Lrs)
            };
            cell.r_bl_ohms = sample_resistance(&dist, bl, rng);
            cell.r_blb_ohms = sample_resistance(&dist, blb, rng);
        }
        self.energy_j += bits.len() as f64 * 2.0 * energy;
        self.last_condition = Some(*cond);
        Ok(())
    }

    /// Programs every row from `data`.
    pub fn program_matrix<R: Rng + ?Sized>(
        &mut self,
        data: &BitMatrix,
        cond: &ProgrammingCondition,
        calib: &Calibration,
        rng: &mut R,
    ) -> Result<()> {
        if (data.rows(), data.cols()) != (self.rows, self.cols) {
            return Err(Error::Dimension {
                expected: format!("{}x{}", self.rows, self.cols),
                got: format!("{}x{}", data.rows(), data.cols()),
            });
        }
        for r in 0..self.rows {
            self.program_word(r, data.row(r), cond, calib, rng)?;
        }
        Ok(())
    }

    pub fn read_xnor(&self, row: usize, col: usize, input: bool) -> Result<bool> {
        Ok(read_xnor_pcsa(self.cell(row, col)?, input))
    }

    pub fn read_noisy<R: Rng + ?Sized>(&self, row: usize, col: usize, rng: &mut R) -> Result<bool> {
        Ok(read_bit_pcsa_noisy(self.cell(row, col)?, self.read_noise_sigma_ln, rng))
    }

    /// Debug dump: a `#` header line, then `row,col,r_bl,r_blb`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let cond = self.last_condition.map(|c| c.to_string()).unwrap_or_else(|| "unprogrammed".into());
        writeln!(out, "# rows={} cols={} condition={}", self.rows, self.cols, cond)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "col", "r_bl", "r_blb"])?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let cell = &self.cells[r * self.cols + c];
                w.write_record([
                    r.to_string(),
                    c.to_string(),
                    format!("{:e}", cell.r_bl_ohms),
                    format!("{:e}", cell.r_blb_ohms),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

impl BitArray for Array2T2R {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn read(&self, row: usize, col: usize) -> Result<bool> {
        Ok(read_bit_pcsa(self.cell(row, col)?))
    }
}

#[derive(Debug, Clone)]
pub struct Array1T1R {
    rows: usize,
    cols: usize,
    resistances: Vec<f64>,
    r_ref_ohms: f64,
    energy_j: f64,
}

impl Array1T1R {
    pub fn new(rows: usize, cols: usize, r_ref_ohms: f64) -> Result<Self> {
        check_dims(rows, cols)?;
        if !(r_ref_ohms > 0.0 && r_ref_ohms.is_finite()) {
            return Err(Error::Domain(format!("reference resistance must be positive, got {r_ref_ohms}")));
        }
        Ok(Self {
            rows,
            cols,
            resistances: vec![PRISTINE_OHMS; rows * cols],
            r_ref_ohms,
            energy_j: 0.0,
        })
    }

    pub fn r_ref_ohms(&self) -> f64 {
        self.r_ref_ohms
    }

    pub fn cumulative_program_energy_j(&self) -> f64 {
        self.energy_j
    }

    pub fn resistance(&self, row: usize, col: usize) -> Result<f64> {
        if row >= self.rows || col >= self.cols {
            return Err(Error::Bounds {
                what: "1T1R array",
                index: row * self.cols + col,
                size: self.rows * self.cols,
            });
        }
        Ok(self.resistances[row * self.cols + col])
    }

    pub fn set_resistance(&mut self, row: usize, col: usize, ohms: f64) -> Result<()> {
        self.resistance(row, col)?;
        self.resistances[row * self.cols + col] = ohms;
        Ok(())
    }

    /// One device per bit; 1 is stored as LRS.
    pub fn program_word<R: Rng + ?Sized>(
        &mut self,
        row: usize,
        bits: &[bool],
        cond: &ProgrammingCondition,
        calib: &Calibration,
        rng: &mut R,
    ) -> Result<()> {
        if row >= self.rows {
            return Err(Error::Bounds {
                what: "array rows",
                index: row,
                size: self.rows,
            });
        }
        if bits.len() != self.cols {
            return Err(Error::Length {
                expected: self.cols,
                got: bits.len(),
            });
        }
        let dist = calib.condition_to_distribution(cond)?;
        let energy = calib.programming_energy(cond).mean_energy_per_bit_j;
        let base = row * self.cols;
        for (r, &bit) in self.resistances[base..base + self.cols].iter_mut().zip(bits) {
            let state = if bit { DeviceState::Lrs } else { DeviceState::Hrs };
            *r = sample_resistance(&dist, state, rng);
        }
        self.energy_j += bits.len() as f64 * energy;
        Ok(())
    }

    pub fn program_matrix<R: Rng + ?Sized>(
        &mut self,
        data: &BitMatrix,
        cond: &ProgrammingCondition,
        calib: &Calibration,
        rng: &mut R,
    ) -> Result<()> {
        if (data.rows(), data.cols()) != (self.rows, self.cols) {
            return Err(Error::Dimension {
                expected: format!("{}x{}", self.rows, self.cols),
                got: format!("{}x{}", data.rows(), data.cols()),
            });
        }
        for r in 0..self.rows {
            self.program_word(r, data.row(r), cond, calib, rng)?;
        }
        Ok(())
    }
}

/// Single-ended read: 1 iff the device is below the reference.
pub fn read_bit_1t1r(array: &Array1T1R, row: usize, col: usize) -> Result<bool> {
    Ok(array.resistance(row, col)? < array.r_ref_ohms)
}

impl BitArray for Array1T1R {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn read(&self, row: usize, col: usize) -> Result<bool> {
        read_bit_1t1r(self, row, col)
    }
}
