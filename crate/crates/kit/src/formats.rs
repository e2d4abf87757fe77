//! JSON file formats.
//!
//! Cone: `{"type": "orthant"|"lorentz"|"generators"|"halfspaces", "dim": n,
//! "matrix": [[...], ...]}`. The matrix is a list of rows. For
//! `halfspaces` each row is an inward normal `aᵢ` (cone `{x : A x ≥ 0}`);
//! for `generators` each column is a generator, so the matrix is `n × k`.
//! `matrix` is omitted for the orthant and the Lorentz cone, whose last
//! coordinate is the axis `t` in `‖x‖₂ ≤ t`.
//!
//! Norm: `{"type": "euclidean"|"l1"|"linf"|"weighted", "weights": [...]}`.
//!
//! Space: `{"labels": [...], "cone": {...}, "norm": {...}, "D": [[[..]]]}`
//! with `D` an `n × n` array of vectors.
//!
//! Map: `{"type": "tabulated", "images": [...]}` (indices or labels) or
//! `{"type": "affine", "M": [[...]], "b": [...]}`.
//!
//! φ: `{"type": "linear", "matrix": [[...]]}`, or `{"type": "scalar" |
//! "radial", "function": "saturating"|"scale"|"clamp", "parameter": p}`.

use std::path::Path;

use cone_metric_core::equiv::ScalarFn;
use cone_metric_core::linalg::Matrix;
use cone_metric_core::{Cone, ConeKind, FiniteConeMetricSpace, Norm, PhiSpec, SelfMap, Vector};
use serde::{Deserialize, Serialize};

use crate::error::KitError;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConeJson {
    #[serde(rename = "type")]
    pub kind: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NormJson {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpaceJson {
    /// Set when the file was written by `cmk gen`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub labels: Vec<String>,
    pub cone: ConeJson,
    pub norm: NormJson,
    #[serde(rename = "D")]
    pub d: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum PointRef {
    Index(usize),
    Label(String),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum MapJson {
    Tabulated {
        images: Vec<PointRef>,
    },
    Affine {
        #[serde(rename = "M")]
        m: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PhiJson {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<f64>,
}

fn invalid(msg: impl Into<String>) -> KitError {
    KitError::Invalid(msg.into())
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Matrix, KitError> {
    Matrix::from_rows(rows).ok_or_else(|| invalid("matrix rows must be nonempty and of equal length"))
}

impl ConeJson {
    pub fn to_cone(&self) -> Result<Cone, KitError> {
        let needs_matrix = || {
            self.matrix
                .as_deref()
                .ok_or_else(|| invalid(format!("cone type `{}` needs a matrix", self.kind)))
        };
        let cone = match self.kind.as_str() {
            "orthant" => Cone::orthant(self.dim)?,
            "lorentz" => Cone::lorentz(self.dim)?,
            "generators" => Cone::generators(matrix_from_rows(needs_matrix()?)?)?,
            "halfspaces" => Cone::halfspaces(matrix_from_rows(needs_matrix()?)?)?,
            other => return Err(invalid(format!("unknown cone type `{other}`"))),
        };
        if cone.dim() != self.dim {
            return Err(invalid(format!("cone matrix has dimension {}, `dim` says {}", cone.dim(), self.dim)));
        }
        Ok(cone)
    }

    pub fn from_cone(cone: &Cone) -> Self {
        let kind = match cone.kind() {
            ConeKind::Orthant => "orthant",
            ConeKind::Lorentz => "lorentz",
            ConeKind::Generators => "generators",
            ConeKind::Halfspaces => "halfspaces",
        };
        Self {
            kind: kind.into(),
            dim: cone.dim(),
            matrix: cone.matrix().map(Matrix::to_rows),
        }
    }
}

impl NormJson {
    pub fn to_norm(&self) -> Result<Norm, KitError> {
        if self.kind != "weighted" && self.weights.is_some() {
            return Err(invalid(format!("norm type `{}` takes no weights", self.kind)));
        }
        Ok(match self.kind.as_str() {
            "euclidean" => Norm::Euclidean,
            "l1" => Norm::L1,
            "linf" => Norm::LInf,
            "weighted" => Norm::weighted(self.weights.clone().ok_or_else(|| invalid("weighted norm needs `weights`"))?)?,
            other => return Err(invalid(format!("unknown norm type `{other}`"))),
        })
    }

    pub fn from_norm(norm: &Norm) -> Self {
        let (kind, weights) = match norm {
            Norm::Euclidean => ("euclidean", None),
            Norm::L1 => ("l1", None),
            Norm::LInf => ("linf", None),
            Norm::Weighted(w) => ("weighted", Some(w.as_slice().to_vec())),
        };
        Self {
            kind: kind.into(),
            weights,
        }
    }
}

impl SpaceJson {
    pub fn to_space(&self) -> Result<FiniteConeMetricSpace, KitError> {
        let cone = self.cone.to_cone()?;
        let norm = self.norm.to_norm()?;
        let table = self
            .d
            .iter()
            .map(|row| row.iter().map(|v| Vector::new(v.clone())).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FiniteConeMetricSpace::new(self.labels.clone(), cone, norm, table)?)
    }

    pub fn from_space(space: &FiniteConeMetricSpace) -> Self {
        Self {
            schema: None,
            labels: space.labels().to_vec(),
            cone: ConeJson::from_cone(space.cone()),
            norm: NormJson::from_norm(space.norm()),
            d: space
                .table()
                .into_iter()
                .map(|row| row.into_iter().map(Vector::into_inner).collect())
                .collect(),
        }
    }
}

impl MapJson {
    /// Resolves label references against `labels` when a space is known.
    pub fn to_map(&self, labels: Option<&[String]>) -> Result<SelfMap, KitError> {
        match self {
            MapJson::Tabulated { images } => {
                let resolved = images
                    .iter()
                    .map(|p| match (p, labels) {
                        (PointRef::Index(i), _) => Ok(*i),
                        (PointRef::Label(l), Some(labels)) => labels
                            .iter()
                            .position(|x| x == l)
                            .ok_or_else(|| invalid(format!("map refers to unknown label `{l}`"))),
                        (PointRef::Label(l), None) => Err(invalid(format!("label `{l}` needs a space to resolve"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if let Some(labels) = labels {
                    SelfMap::tabulated(resolved.clone()).images_for(labels.len())?;
                }
                Ok(SelfMap::tabulated(resolved))
            }
            MapJson::Affine { m, b } => Ok(SelfMap::affine(matrix_from_rows(m)?, b.clone())?),
        }
    }

    pub fn from_map(map: &SelfMap) -> Self {
        match map {
            SelfMap::Tabulated(images) => MapJson::Tabulated {
                images: images.iter().map(|&i| PointRef::Index(i)).collect(),
            },
            SelfMap::Affine { matrix, offset } => MapJson::Affine {
                m: matrix.to_rows(),
                b: offset.clone(),
            },
        }
    }
}

impl PhiJson {
    fn scalar(&self) -> Result<ScalarFn, KitError> {
        let name = self.function.as_deref().ok_or_else(|| invalid("φ needs a `function`"))?;
        let param = || self.parameter.ok_or_else(|| invalid(format!("function `{name}` needs a `parameter`")));
        Ok(match name {
            "saturating" => ScalarFn::Saturating,
            "scale" => ScalarFn::Scale(param()?),
            "clamp" => ScalarFn::Clamp(param()?),
            other => return Err(invalid(format!("unknown function `{other}`"))),
        })
    }

    pub fn to_phi(&self) -> Result<PhiSpec, KitError> {
        Ok(match self.kind.as_str() {
            "linear" => PhiSpec::Linear(matrix_from_rows(
                self.matrix.as_deref().ok_or_else(|| invalid("linear φ needs a `matrix`"))?,
            )?),
            "scalar" => PhiSpec::Scalar1D(self.scalar()?),
            "radial" => PhiSpec::Radial(self.scalar()?),
            other => return Err(invalid(format!("unknown φ type `{other}`"))),
        })
    }
}

/// Reads and deserializes a JSON file, reporting the line and column of
/// syntax and shape errors.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, KitError> {
    let text = std::fs::read_to_string(path).map_err(|source| KitError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| KitError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Loads a file and converts it; conversion errors are tagged with the path.
pub fn load<T, U>(path: &Path, convert: impl FnOnce(&T) -> Result<U, KitError>) -> Result<U, KitError>
where
    T: for<'de> Deserialize<'de>,
{
    let raw: T = read_json(path)?;
    convert(&raw).map_err(|e| match e {
        KitError::Invalid(msg) | KitError::Core(cone_metric_core::Error::InvalidArgument(msg)) => KitError::InvalidFile {
            path: path.to_path_buf(),
            message: msg,
        },
        KitError::Core(core) => KitError::InvalidFile {
            path: path.to_path_buf(),
            message: core.to_string(),
        },
        other => other,
    })
}

pub fn load_space(path: &Path) -> Result<FiniteConeMetricSpace, KitError> {
    load(path, SpaceJson::to_space)
}

pub fn load_map(path: &Path, labels: Option<&[String]>) -> Result<SelfMap, KitError> {
    load(path, |m: &MapJson| m.to_map(labels))
}

pub fn load_cone(path: &Path) -> Result<Cone, KitError> {
    load(path, ConeJson::to_cone)
}

pub fn load_norm(path: &Path) -> Result<Norm, KitError> {
    load(path, NormJson::to_norm)
}

pub fn load_phi(path: &Path) -> Result<PhiSpec, KitError> {
    load(path, PhiJson::to_phi)
}
