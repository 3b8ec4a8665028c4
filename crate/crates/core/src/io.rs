//! JSON frame files.
//!
//! ```json
//! { "field": "real" | "complex", "d": 3, "ranks": [1, 1, 2],
//!   "blocks": [ [[..d numbers..]], ... ] }
//! ```
//!
//! Block `i` is a list of `k_i` rows of `d` entries. Real entries are JSON
//! numbers; complex entries are `[re, im]` pairs. Floats are written in
//! shortest round-trip form and parsed with correct rounding, so a
//! write/read cycle is bit-exact.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::frame::{random_fusion_frame, FrameConfig, OperatorFrame};
use crate::scalar::{Field, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Serialize, Deserialize)]
struct FrameFile {
    field: Field,
    d: usize,
    ranks: Vec<usize>,
    blocks: Vec<Vec<Vec<Entry>>>,
}

fn entry_of<T: Scalar>(z: T) -> Entry {
    let c = z.to_complex();
    match T::FIELD {
        Field::Real => Entry::Real(c.re),
        Field::Complex => Entry::Complex([c.re, c.im]),
    }
}

fn rows_of<T: Scalar>(m: &DMatrix<T>) -> Vec<Vec<Entry>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| entry_of(m[(r, c)])).collect())
        .collect()
}

/// A matrix as a JSON array of rows in the frame-file entry format.
pub fn matrix_to_json<T: Scalar>(m: &DMatrix<T>) -> Value {
    serde_json::to_value(rows_of(m)).expect("entries are finite numbers")
}

fn matrix_from_rows<T: Scalar>(rows: &[Vec<Entry>], what: &str) -> Result<DMatrix<T>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Format(format!("{what}: ragged rows")));
    }
    let mut m = DMatrix::<T>::zeros(nrows, ncols);
    for (r, row) in rows.iter().enumerate() {
        for (c, &e) in row.iter().enumerate() {
            m[(r, c)] = match (T::FIELD, e) {
                (Field::Real, Entry::Real(x)) => T::from_real(x),
                (Field::Complex, Entry::Complex([re, im])) => {
                    T::from_complex(Complex64::new(re, im)).expect("complex field")
                }
                (Field::Real, Entry::Complex(_)) => {
                    return Err(Error::Format(format!(
                        "{what}: complex entry [{r}][{c}] in a real frame"
                    )))
                }
                (Field::Complex, Entry::Real(_)) => {
                    return Err(Error::Format(format!(
                        "{what}: real entry [{r}][{c}] in a complex frame; use [re, im]"
                    )))
                }
            };
        }
    }
    Ok(m)
}

/// Parses a matrix written by [`matrix_to_json`].
pub fn matrix_from_json<T: Scalar>(value: &Value) -> Result<DMatrix<T>> {
    let rows: Vec<Vec<Entry>> = serde_json::from_value(value.clone())?;
    matrix_from_rows(&rows, "matrix")
}

/// A frame of either field, as read from a file.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyFrame {
    Real(OperatorFrame<f64>),
    Complex(OperatorFrame<Complex64>),
}

impl From<OperatorFrame<f64>> for AnyFrame {
    fn from(f: OperatorFrame<f64>) -> Self {
        AnyFrame::Real(f)
    }
}

impl From<OperatorFrame<Complex64>> for AnyFrame {
    fn from(f: OperatorFrame<Complex64>) -> Self {
        AnyFrame::Complex(f)
    }
}

fn to_file<T: Scalar>(frame: &OperatorFrame<T>) -> Result<FrameFile> {
    let nonfinite = frame.blocks().iter().flat_map(|b| b.iter()).any(|z| {
        let c = z.to_complex();
        !c.re.is_finite() || !c.im.is_finite()
    });
    if nonfinite {
        return Err(Error::Format("non-finite entries cannot be written".into()));
    }
    Ok(FrameFile {
        field: T::FIELD,
        d: frame.d(),
        ranks: frame.ranks(),
        blocks: frame.blocks().iter().map(rows_of).collect(),
    })
}

fn from_file<T: Scalar>(file: &FrameFile) -> Result<OperatorFrame<T>> {
    if file.ranks.len() != file.blocks.len() {
        return Err(Error::Format(format!(
            "{} ranks listed for {} blocks",
            file.ranks.len(),
            file.blocks.len()
        )));
    }
    let mut blocks = Vec::with_capacity(file.blocks.len());
    for (i, (rows, &k)) in file.blocks.iter().zip(&file.ranks).enumerate() {
        let what = format!("block {}", i + 1);
        let m = matrix_from_rows::<T>(rows, &what)?;
        if m.nrows() != k || m.ncols() != file.d {
            return Err(Error::Format(format!(
                "{what} is {}x{}, expected {k}x{}",
                m.nrows(),
                m.ncols(),
                file.d
            )));
        }
        blocks.push(m);
    }
    OperatorFrame::new(file.d, blocks)
}

impl AnyFrame {
    pub fn field(&self) -> Field {
        match self {
            AnyFrame::Real(_) => Field::Real,
            AnyFrame::Complex(_) => Field::Complex,
        }
    }

    pub fn config(&self) -> FrameConfig {
        match self {
            AnyFrame::Real(f) => f.config(),
            AnyFrame::Complex(f) => f.config(),
        }
    }

    /// Random fusion frame over the field named by `config`.
    pub fn random(config: &FrameConfig, seed: u64) -> Result<Self> {
        Ok(match config.field() {
            Field::Real => AnyFrame::Real(random_fusion_frame(config, seed)?),
            Field::Complex => AnyFrame::Complex(random_fusion_frame(config, seed)?),
        })
    }

    pub fn to_json_string(&self) -> Result<String> {
        let file = match self {
            AnyFrame::Real(f) => to_file(f)?,
            AnyFrame::Complex(f) => to_file(f)?,
        };
        let mut s = serde_json::to_string_pretty(&file)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: FrameFile = serde_json::from_str(s)?;
        Ok(match file.field {
            Field::Real => AnyFrame::Real(from_file(&file)?),
            Field::Complex => AnyFrame::Complex(from_file(&file)?),
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }
}
