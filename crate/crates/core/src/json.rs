//! JSON file formats shared by the library and the command-line tool.
//!
//! Matrices are `{"rows", "cols", "data": [[re, im], ...]}` in row-major
//! order; systems, spectral data and Jacobi realizations embed them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opcore::{c, check_finite, ComplexMatrix};
use crate::realize::JacobiRealization;
use crate::sysmodel::PartitionedContraction;
use crate::transfer::{Atom, SqsFunctionData};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        Self { rows: m.nrows(), cols: m.ncols(), data }
    }
}

impl TryFrom<&MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: &MatrixJson) -> Result<Self> {
        if j.data.len() != j.rows * j.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix with {} entries",
                j.rows,
                j.cols,
                j.data.len()
            )));
        }
        let m = ComplexMatrix::from_fn(j.rows, j.cols, |r, k| {
            let [re, im] = j.data[r * j.cols + k];
            c(re, im)
        });
        check_finite(&m)?;
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    pub in_dim: usize,
    pub out_dim: usize,
    pub state_dim: usize,
    #[serde(rename = "T")]
    pub t: MatrixJson,
}

impl From<&PartitionedContraction> for SystemJson {
    fn from(s: &PartitionedContraction) -> Self {
        Self {
            in_dim: s.in_dim(),
            out_dim: s.out_dim(),
            state_dim: s.state_dim(),
            t: s.t().into(),
        }
    }
}

impl TryFrom<&SystemJson> for PartitionedContraction {
    type Error = Error;

    fn try_from(j: &SystemJson) -> Result<Self> {
        PartitionedContraction::new((&j.t).try_into()?, j.in_dim, j.out_dim, j.state_dim)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomJson {
    pub t: f64,
    pub sigma: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqsDataJson {
    pub theta0: MatrixJson,
    pub atoms: Vec<AtomJson>,
}

impl From<&SqsFunctionData> for SqsDataJson {
    fn from(f: &SqsFunctionData) -> Self {
        Self {
            theta0: (&f.theta0).into(),
            atoms: f
                .atoms
                .iter()
                .map(|a| AtomJson { t: a.t, sigma: (&a.sigma).into() })
                .collect(),
        }
    }
}

impl TryFrom<&SqsDataJson> for SqsFunctionData {
    type Error = Error;

    fn try_from(j: &SqsDataJson) -> Result<Self> {
        let atoms = j
            .atoms
            .iter()
            .map(|a| {
                if !a.t.is_finite() {
                    return Err(Error::InvalidMeasure("non-finite atom location".into()));
                }
                Ok(Atom { t: a.t, sigma: (&a.sigma).try_into()? })
            })
            .collect::<Result<_>>()?;
        Ok(SqsFunctionData { theta0: (&j.theta0).try_into()?, atoms })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiJson {
    pub d: [f64; 2],
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub truncated: bool,
}

impl From<&JacobiRealization> for JacobiJson {
    fn from(j: &JacobiRealization) -> Self {
        Self { d: [j.d.re, j.d.im], a: j.a.clone(), b: j.b.clone(), truncated: j.truncated }
    }
}

impl TryFrom<&JacobiJson> for JacobiRealization {
    type Error = Error;

    fn try_from(j: &JacobiJson) -> Result<Self> {
        let out = JacobiRealization { d: c(j.d[0], j.d[1]), a: j.a.clone(), b: j.b.clone(), truncated: j.truncated };
        out.validate()?;
        Ok(out)
    }
}

pub fn matrix_from_str(s: &str) -> Result<ComplexMatrix> {
    (&serde_json::from_str::<MatrixJson>(s)?).try_into()
}

pub fn system_from_str(s: &str) -> Result<PartitionedContraction> {
    (&serde_json::from_str::<SystemJson>(s)?).try_into()
}

pub fn data_from_str(s: &str) -> Result<SqsFunctionData> {
    (&serde_json::from_str::<SqsDataJson>(s)?).try_into()
}

pub fn jacobi_from_str(s: &str) -> Result<JacobiRealization> {
    (&serde_json::from_str::<JacobiJson>(s)?).try_into()
}

pub fn matrix_to_string(m: &ComplexMatrix) -> String {
    to_pretty(&MatrixJson::from(m))
}

pub fn system_to_string(s: &PartitionedContraction) -> String {
    to_pretty(&SystemJson::from(s))
}

pub fn data_to_string(f: &SqsFunctionData) -> String {
    to_pretty(&SqsDataJson::from(f))
}

pub fn jacobi_to_string(j: &JacobiRealization) -> String {
    to_pretty(&JacobiJson::from(j))
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}
