//! Number formatting and JSON forms of couplings and dual witnesses.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::gaussian::{ConfigurationFile, OrthonormalBasis};
use crate::quantum::{Coupling, DualWitness};
use crate::{CMatrix, Error, Result, C64};

/// Significant digits in every number written as text.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` with 12 significant digits in the style of C's `%.12g`, independent
/// of locale.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Row-major complex matrix stored as `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&CMatrix> for ComplexMatrixJson {
    fn from(m: &CMatrix) -> Self {
        let data = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
            .collect();
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

impl TryFrom<&ComplexMatrixJson> for CMatrix {
    type Error = Error;

    fn try_from(m: &ComplexMatrixJson) -> Result<Self> {
        if m.data.len() != m.rows * m.cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                m.data.len(),
                m.rows,
                m.cols
            )));
        }
        if m.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("matrix entry"));
        }
        Ok(CMatrix::from_fn(m.rows, m.cols, |i, j| {
            let [re, im] = m.data[i * m.cols + j];
            C64::new(re, im)
        }))
    }
}

/// Enough to rebuild the orthonormal basis a matrix is written in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisJson {
    pub hbar: f64,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Descending; the basis vectors follow this order.
    pub gram_eigenvalues: Vec<f64>,
    /// Coherent-state coefficients of each basis vector (columns).
    pub change_of_frame: ComplexMatrixJson,
}

impl From<&OrthonormalBasis> for BasisJson {
    fn from(b: &OrthonormalBasis) -> Self {
        let file = ConfigurationFile::from_parts(b.context(), b.source());
        Self {
            hbar: file.hbar,
            points: file.points,
            weights: file.weights,
            gram_eigenvalues: b.gram_eigenvalues().to_vec(),
            change_of_frame: b.change_of_frame().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingJson {
    pub basis_x: BasisJson,
    pub basis_y: BasisJson,
    /// Index `(k, l)` of the product basis is `k · dim_y + l`.
    pub matrix: ComplexMatrixJson,
    pub value: f64,
}

impl From<&Coupling> for CouplingJson {
    fn from(c: &Coupling) -> Self {
        Self {
            basis_x: c.basis_x().into(),
            basis_y: c.basis_y().into(),
            matrix: c.matrix().into(),
            value: c.value(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub basis_x: BasisJson,
    pub basis_y: BasisJson,
    pub a: ComplexMatrixJson,
    pub b: ComplexMatrixJson,
    pub bound: f64,
    pub min_slack: f64,
    pub valid: bool,
}

impl From<&DualWitness> for WitnessJson {
    fn from(w: &DualWitness) -> Self {
        Self {
            basis_x: w.basis_x().into(),
            basis_y: w.basis_y().into(),
            a: w.a().into(),
            b: w.b().into(),
            bound: w.bound(),
            min_slack: w.min_slack(),
            valid: w.is_valid(),
        }
    }
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(file, value)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    Ok(serde_json::from_reader(file)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::PhaseSpaceContext;
    use crate::quantum::{build_named_coupling, equal_mass_dual_witness, CouplingKind, Scenario};

    #[test]
    fn complex_matrix_round_trip() {
        let m = CMatrix::from_fn(2, 3, |i, j| C64::new(i as f64, j as f64 - 0.5));
        let json = ComplexMatrixJson::from(&m);
        assert_eq!(json.data[1], [0.0, 0.5]);
        assert_eq!(CMatrix::try_from(&json).unwrap(), m);
        let bad = ComplexMatrixJson {
            rows: 2,
            cols: 2,
            data: vec![[0.0, 0.0]],
        };
        assert!(CMatrix::try_from(&bad).is_err());
    }

    #[test]
    fn coupling_and_witness_serialize() {
        let ctx = PhaseSpaceContext::new(1.0).unwrap();
        let s = Scenario::EqualMass { a: 1.0, b: 2.0 };
        let built = build_named_coupling(&ctx, &s, CouplingKind::EqualMassOptimal).unwrap();
        let json = CouplingJson::from(built.coupling().unwrap());
        let text = serde_json::to_string(&json).unwrap();
        let back: CouplingJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back, json);
        assert_eq!(back.matrix.rows, 4);
        assert_eq!(back.basis_x.points, vec![[-1.0, 0.0], [1.0, 0.0]]);

        let w = equal_mass_dual_witness(&ctx, 1.0, 2.0).unwrap();
        let wj = WitnessJson::from(&w);
        assert!(wj.valid);
        assert!(serde_json::to_string(&wj).unwrap().contains("\"bound\""));
    }
}
