//! JSON model documents: complex numbers as `[re, im]`, matrices row-major.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ClassicalMarkovModel;
use crate::propagation::{LindbladModel, NonHermitianModel};
use crate::state::{DensityOperator, StateVector};
use crate::{c64, ComplexMatrix, ComplexVector};

pub type JsonComplex = [f64; 2];
pub type JsonMatrix = Vec<Vec<JsonComplex>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Nonhermitian,
    Lindblad,
    Classical,
}

/// Initial state as stored in a document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "data", rename_all = "lowercase")]
pub enum InitialSpec {
    Pure(Vec<JsonComplex>),
    Mixed(JsonMatrix),
    /// Probability vector of a classical chain.
    Distribution(Vec<f64>),
}

/// Serialized form of a model and an optional initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub kind: ModelKind,
    pub dim: usize,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<JsonMatrix>,
    #[serde(rename = "Gamma", default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<JsonMatrix>,
    #[serde(rename = "H_S", default, skip_serializing_if = "Option::is_none")]
    pub h_s: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jumps: Option<Vec<JsonMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSpec>,
}

/// A model of any supported kind.
#[derive(Debug, Clone)]
pub enum Model {
    NonHermitian(NonHermitianModel),
    Lindblad(LindbladModel),
    Classical(ClassicalMarkovModel),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::NonHermitian(_) => ModelKind::Nonhermitian,
            Model::Lindblad(_) => ModelKind::Lindblad,
            Model::Classical(_) => ModelKind::Classical,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::NonHermitian(m) => m.dim(),
            Model::Lindblad(m) => m.dim(),
            Model::Classical(m) => m.n_states(),
        }
    }
}

/// A decoded initial state.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Pure(StateVector),
    Mixed(DensityOperator),
    Distribution(Vec<f64>),
}

fn matrix_to_json(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

fn matrix_from_json(name: &str, m: &JsonMatrix, dim: usize) -> Result<ComplexMatrix> {
    if m.len() != dim || m.iter().any(|row| row.len() != dim) {
        return Err(Error::Serialization(format!("{name} must be a {dim}x{dim} matrix")));
    }
    Ok(ComplexMatrix::from_fn(dim, dim, |r, c| c64(m[r][c][0], m[r][c][1])))
}

fn vector_from_json(v: &[JsonComplex], dim: usize) -> Result<ComplexVector> {
    if v.len() != dim {
        return Err(Error::Serialization(format!("pure state has {} amplitudes, expected {dim}", v.len())));
    }
    Ok(ComplexVector::from_iterator(dim, v.iter().map(|z| c64(z[0], z[1]))))
}

fn required<'a, T>(name: &str, field: &'a Option<T>) -> Result<&'a T> {
    field.as_ref().ok_or_else(|| Error::Serialization(format!("missing field {name}")))
}

impl ModelDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Encodes a model; time-dependent generators have no document form.
    pub fn from_model(model: &Model, initial: Option<&InitialState>) -> Result<Self> {
        let mut doc = ModelDocument {
            kind: model.kind(),
            dim: model.dim(),
            h: None,
            gamma: None,
            h_s: None,
            jumps: None,
            rates: None,
            initial: initial.map(InitialSpec::from),
        };
        match model {
            Model::NonHermitian(m) => {
                if m.is_time_dependent() {
                    return Err(Error::Serialization("time-dependent generators cannot be serialized".into()));
                }
                doc.h = Some(matrix_to_json(m.h()));
                doc.gamma = Some(matrix_to_json(m.gamma()));
            }
            Model::Lindblad(m) => {
                doc.h_s = Some(matrix_to_json(m.h_s()));
                doc.jumps = Some(m.jumps().iter().map(matrix_to_json).collect());
            }
            Model::Classical(m) => {
                doc.rates = Some(m.rates().to_vec());
                if doc.initial.is_none() {
                    doc.initial = Some(InitialSpec::Distribution(m.initial().to_vec()));
                }
            }
        }
        Ok(doc)
    }

    /// Decodes the model and its initial state, validating shapes and physics.
    pub fn to_model(&self) -> Result<(Model, Option<InitialState>)> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::Serialization("dim must be positive".into()));
        }
        let initial = self.initial.as_ref().map(|s| s.decode(d)).transpose()?;
        let model = match self.kind {
            ModelKind::Nonhermitian => Model::NonHermitian(NonHermitianModel::new(
                matrix_from_json("H", required("H", &self.h)?, d)?,
                matrix_from_json("Gamma", required("Gamma", &self.gamma)?, d)?,
            )?),
            ModelKind::Lindblad => {
                let jumps = self
                    .jumps
                    .as_deref()
                    .unwrap_or_default()
                    .iter()
                    .enumerate()
                    .map(|(k, l)| matrix_from_json(&format!("jumps[{k}]"), l, d))
                    .collect::<Result<Vec<_>>>()?;
                Model::Lindblad(LindbladModel::new(matrix_from_json("H_S", required("H_S", &self.h_s)?, d)?, jumps)?)
            }
            ModelKind::Classical => {
                let p = match &initial {
                    Some(InitialState::Distribution(p)) => p.clone(),
                    Some(InitialState::Mixed(rho)) => rho.diagonal_probabilities(),
                    Some(InitialState::Pure(_)) => {
                        return Err(Error::Serialization("classical models need a distribution".into()))
                    }
                    None => return Err(Error::Serialization("classical models need an initial distribution".into())),
                };
                Model::Classical(ClassicalMarkovModel::new(required("rates", &self.rates)?.clone(), p)?)
            }
        };
        if model.dim() != d {
            return Err(Error::Serialization(format!("rates describe {} states, dim is {d}", model.dim())));
        }
        Ok((model, initial))
    }
}

impl InitialSpec {
    fn decode(&self, dim: usize) -> Result<InitialState> {
        match self {
            InitialSpec::Pure(v) => Ok(InitialState::Pure(StateVector::new(vector_from_json(v, dim)?)?)),
            InitialSpec::Mixed(m) => {
                Ok(InitialState::Mixed(DensityOperator::new(matrix_from_json("initial", m, dim)?)?))
            }
            InitialSpec::Distribution(p) => {
                if p.len() != dim {
                    return Err(Error::Serialization(format!("distribution has {} entries, expected {dim}", p.len())));
                }
                crate::metrics::validate_distribution(p)?;
                Ok(InitialState::Distribution(p.clone()))
            }
        }
    }
}

impl From<&InitialState> for InitialSpec {
    fn from(s: &InitialState) -> Self {
        match s {
            InitialState::Pure(psi) => InitialSpec::Pure(psi.amplitudes().iter().map(|z| [z.re, z.im]).collect()),
            InitialState::Mixed(rho) => InitialSpec::Mixed(matrix_to_json(rho.matrix())),
            InitialState::Distribution(p) => InitialSpec::Distribution(p.clone()),
        }
    }
}
