use std::fmt;

use nalgebra::ComplexField;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// The base field 𝕂 of a frame space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Real => f.write_str("real"),
            Field::Complex => f.write_str("complex"),
        }
    }
}

impl std::str::FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(format!(
                "unknown field '{other}' (expected real or complex)"
            )),
        }
    }
}

/// Double-precision scalars of either field.
///
/// Arithmetic comes from nalgebra's [`ComplexField`]; this trait adds the
/// field tag, Gaussian sampling and lossless conversion to `Complex64`.
pub trait Scalar: ComplexField<RealField = f64> + Copy + Send + Sync + 'static {
    const FIELD: Field;

    /// Standard Gaussian sample: N(0, 1) for reals, circularly symmetric with
    /// unit variance for complex numbers.
    fn sample_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn to_complex(self) -> Complex64;

    /// Returns `None` when a real scalar is requested from a value with a
    /// nonzero imaginary part.
    fn from_complex(z: Complex64) -> Option<Self>;
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    fn sample_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }

    fn from_complex(z: Complex64) -> Option<Self> {
        (z.im == 0.0).then_some(z.re)
    }
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::Complex;

    fn sample_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    fn to_complex(self) -> Complex64 {
        self
    }

    fn from_complex(z: Complex64) -> Option<Self> {
        Some(z)
    }
}
