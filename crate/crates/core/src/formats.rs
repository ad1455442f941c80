//! JSON encodings shared by the CLI and the C API. See `docs/formats.md`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dilation::UnitaryGate;
use crate::error::{Error, Result};
use crate::extops::ExtendedSuperoperator;
use crate::infomeasures::InfoReport;
use crate::qmat::ComplexMatrix;
use crate::superop::EntanglementMatrix;

/// `{"rows", "cols", "entries": [[re, im], ...]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        let data = m.entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        ComplexMatrix::new(m.rows, m.cols, data)
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string_pretty(&MatrixJson::from(m)).expect("matrix serializes")
}

pub fn matrix_from_json(s: &str) -> Result<ComplexMatrix> {
    serde_json::from_str::<MatrixJson>(s)?.try_into()
}

/// Matrix JSON plus the subsystem layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateJson {
    #[serde(flatten)]
    pub matrix: MatrixJson,
    pub dims: Vec<usize>,
}

impl From<&UnitaryGate> for GateJson {
    fn from(g: &UnitaryGate) -> Self {
        Self {
            matrix: g.matrix().into(),
            dims: g.dims().to_vec(),
        }
    }
}

impl TryFrom<GateJson> for UnitaryGate {
    type Error = Error;

    fn try_from(g: GateJson) -> Result<Self> {
        UnitaryGate::new(g.dims, g.matrix.try_into()?)
    }
}

pub fn gate_to_json(g: &UnitaryGate) -> String {
    serde_json::to_string_pretty(&GateJson::from(g)).expect("gate serializes")
}

pub fn gate_from_json(s: &str) -> Result<UnitaryGate> {
    serde_json::from_str::<GateJson>(s)?.try_into()
}

/// `{"d", "r"}` or, for two levels, `{"q": [re, im]}` meaning `[[1, q], [q*, 1]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntanglementMatrixJson {
    Full { d: usize, r: MatrixJson },
    Qubit { q: [f64; 2] },
}

impl From<&EntanglementMatrix> for EntanglementMatrixJson {
    fn from(r: &EntanglementMatrix) -> Self {
        Self::Full {
            d: r.d(),
            r: r.matrix().into(),
        }
    }
}

impl TryFrom<EntanglementMatrixJson> for EntanglementMatrix {
    type Error = Error;

    fn try_from(j: EntanglementMatrixJson) -> Result<Self> {
        match j {
            EntanglementMatrixJson::Full { d, r } => {
                let m: ComplexMatrix = r.try_into()?;
                if m.rows() != d {
                    return Err(Error::DimensionMismatch(format!("declared d = {d}, matrix is {}x{}", m.rows(), m.cols())));
                }
                EntanglementMatrix::new(m)
            }
            EntanglementMatrixJson::Qubit { q: [re, im] } => EntanglementMatrix::qubit(Complex64::new(re, im)),
        }
    }
}

pub fn entanglement_matrix_from_json(s: &str) -> Result<EntanglementMatrix> {
    serde_json::from_str::<EntanglementMatrixJson>(s)?.try_into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageJson {
    pub k: usize,
    pub l: usize,
    pub op: MatrixJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtendedJson {
    pub d_a: usize,
    pub dims_out: Vec<usize>,
    pub images: Vec<ImageJson>,
}

impl From<&ExtendedSuperoperator> for ExtendedJson {
    fn from(e: &ExtendedSuperoperator) -> Self {
        let mut images = Vec::with_capacity(e.d_a() * e.d_a());
        for k in 0..e.d_a() {
            for l in 0..e.d_a() {
                images.push(ImageJson {
                    k,
                    l,
                    op: e.image(k, l).into(),
                });
            }
        }
        Self {
            d_a: e.d_a(),
            dims_out: e.dims_out().to_vec(),
            images,
        }
    }
}

impl TryFrom<ExtendedJson> for ExtendedSuperoperator {
    type Error = Error;

    fn try_from(j: ExtendedJson) -> Result<Self> {
        let n = j.d_a * j.d_a;
        let mut slots: Vec<Option<ComplexMatrix>> = vec![None; n];
        for img in j.images {
            if img.k >= j.d_a || img.l >= j.d_a {
                return Err(Error::DimensionMismatch(format!("image index ({}, {}) out of range", img.k, img.l)));
            }
            slots[img.k * j.d_a + img.l] = Some(img.op.try_into()?);
        }
        let images = slots
            .into_iter()
            .enumerate()
            .map(|(i, m)| m.ok_or_else(|| Error::DimensionMismatch(format!("missing image ({}, {})", i / j.d_a, i % j.d_a))))
            .collect::<Result<Vec<_>>>()?;
        ExtendedSuperoperator::new(j.d_a, j.dims_out, images)
    }
}

/// An [`InfoReport`] together with the entanglement matrix it was computed for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoReportJson {
    #[serde(flatten)]
    pub report: InfoReport,
    pub r: MatrixJson,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q: Option<[f64; 2]>,
}
