//! Parsers for model, state and observable descriptors.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use nhqsl::models::{
    make_dephasing, make_refrigerator, random_classical, random_commuting, random_density, random_diagonal_lindblad,
    random_hermitian, random_pure_state, seeded_rng,
};
use nhqsl::schema::{InitialState, Model, ModelDocument};
use nhqsl::{c64, ClassicalMarkovModel, ComplexMatrix, ComplexVector, DensityOperator, NonHermitianModel, StateVector};

/// Builtin model names accepted by `builtin:<name>?k=v&...` and `models <name>`.
pub const BUILTINS: [&str; 8] = [
    "dephasing",
    "refrigerator",
    "classical",
    "random-commuting",
    "random-lindblad",
    "random-classical",
    "two-level",
    "rabi",
];

/// `k=v` parameters with defaults and unknown-key detection.
#[derive(Debug, Default)]
pub struct Params(BTreeMap<String, String>);

impl Params {
    pub fn parse<'a>(items: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for item in items.into_iter().filter(|s| !s.is_empty()) {
            let (k, v) =
                item.split_once('=').ok_or_else(|| anyhow!("parameter `{item}` is not of the form key=value"))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self(map))
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.0.remove(key) {
            Some(v) => v.parse().with_context(|| format!("parameter {key}={v} is not a number")),
            None => Ok(default),
        }
    }

    fn u64(&mut self, key: &str, default: u64) -> Result<u64> {
        match self.0.remove(key) {
            Some(v) => v.parse().with_context(|| format!("parameter {key}={v} is not an integer")),
            None => Ok(default),
        }
    }

    fn finish(self, name: &str) -> Result<()> {
        ensure!(self.0.is_empty(), "unknown parameters for {name}: {:?}", self.0.keys().collect::<Vec<_>>());
        Ok(())
    }
}

fn diag(v: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(v.len(), v.iter().map(|&x| c64(x, 0.0))))
}

fn pauli(axis: char) -> Result<ComplexMatrix> {
    let (o, i) = (c64(0.0, 0.0), c64(1.0, 0.0));
    Ok(match axis {
        'x' => ComplexMatrix::from_row_slice(2, 2, &[o, i, i, o]),
        'y' => ComplexMatrix::from_row_slice(2, 2, &[o, c64(0.0, -1.0), c64(0.0, 1.0), o]),
        'z' => diag(&[1.0, -1.0]),
        _ => bail!("unknown Pauli axis `{axis}`"),
    })
}

/// A model with its default initial state.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: Model,
    pub initial: Option<InitialState>,
}

/// Builds a builtin model from its name and parameters.
pub fn builtin(name: &str, mut p: Params) -> Result<LoadedModel> {
    let plus = || StateVector::uniform(2).map(InitialState::Pure);
    let loaded = match name {
        "dephasing" => {
            LoadedModel { model: Model::Lindblad(make_dephasing(p.f64("gamma", 1.0)?)?), initial: Some(plus()?) }
        }
        "refrigerator" => {
            let model = make_refrigerator(
                p.f64("gamma", 1.0)?,
                p.f64("omega1", 1.0)?,
                p.f64("omega2", 0.5)?,
                p.f64("beta1", 1.0)?,
                p.f64("beta2", 2.0)?,
                p.f64("beta3", 0.5)?,
            )?;
            LoadedModel { model: Model::Lindblad(model), initial: Some(InitialState::Pure(StateVector::uniform(3)?)) }
        }
        "classical" => {
            let n = p.u64("n", 2)? as usize;
            ensure!(n >= 2, "classical chain needs n >= 2");
            let w = p.f64("rate", 1.0)?;
            let rates = (0..n).map(|_| vec![w; n]).collect();
            let mut initial = vec![0.0; n];
            initial[0] = 1.0;
            let chain = ClassicalMarkovModel::new(rates, initial.clone())?;
            LoadedModel { model: Model::Classical(chain), initial: Some(InitialState::Distribution(initial)) }
        }
        "random-commuting" => {
            let dim = p.u64("dim", 3)? as usize;
            let model = random_commuting(dim, p.u64("seed", 0)?, p.f64("gamma_scale", 1.0)?)?;
            LoadedModel {
                model: Model::NonHermitian(model),
                initial: Some(InitialState::Pure(StateVector::uniform(dim)?)),
            }
        }
        "random-lindblad" => {
            let dim = p.u64("dim", 3)? as usize;
            let model = random_diagonal_lindblad(dim, p.u64("seed", 0)?, p.f64("rate_scale", 1.0)?)?;
            LoadedModel { model: Model::Lindblad(model), initial: Some(InitialState::Pure(StateVector::uniform(dim)?)) }
        }
        "random-classical" => {
            let chain = random_classical(p.u64("n", 3)? as usize, p.u64("seed", 0)?, p.f64("rate_scale", 1.0)?)?;
            let initial = InitialState::Distribution(chain.initial().to_vec());
            LoadedModel { model: Model::Classical(chain), initial: Some(initial) }
        }
        "two-level" => {
            let model = NonHermitianModel::new(diag(&[0.0, p.f64("omega", 1.0)?]), diag(&[0.0, p.f64("gamma", 0.5)?]))?;
            LoadedModel { model: Model::NonHermitian(model), initial: Some(plus()?) }
        }
        "rabi" => {
            let model = NonHermitianModel::hermitian(pauli('x')? * c64(p.f64("omega", 1.0)?, 0.0))?;
            LoadedModel {
                model: Model::NonHermitian(model),
                initial: Some(InitialState::Pure(StateVector::basis(2, 0)?)),
            }
        }
        other => bail!("unknown builtin model `{other}` (known: {})", BUILTINS.join(", ")),
    };
    p.finish(name)?;
    Ok(loaded)
}

/// `builtin:name?k=v&...` or a path to a model JSON document.
pub fn load_model(spec: &str) -> Result<LoadedModel> {
    if let Some(rest) = spec.strip_prefix("builtin:") {
        let (name, query) = rest.split_once('?').unwrap_or((rest, ""));
        return builtin(name, Params::parse(query.split('&'))?);
    }
    let text = std::fs::read_to_string(Path::new(spec)).with_context(|| format!("reading model file {spec}"))?;
    let doc = ModelDocument::from_json(&text).with_context(|| format!("parsing model file {spec}"))?;
    let (model, initial) = doc.to_model().with_context(|| format!("decoding model file {spec}"))?;
    Ok(LoadedModel { model, initial })
}

fn numbers(list: &str) -> Result<Vec<f64>> {
    list.split(',').map(|x| x.trim().parse::<f64>().with_context(|| format!("`{x}` is not a number"))).collect()
}

fn seed_of(arg: Option<&str>) -> Result<u64> {
    arg.map(|s| s.parse::<u64>().with_context(|| format!("seed `{s}` is not an integer")))
        .transpose()
        .map(|s| s.unwrap_or(0))
}

/// Parses a state spec for a system of dimension `dim`.
///
/// `model` (default initial state), `plus`, `uniform`, `basis:k`,
/// `ground`, `maximally-mixed`, `diag:p1,p2,..`, `amplitudes:a1,a2,..`,
/// `random-pure[:seed]`, `random-mixed[:seed]`.
pub fn parse_state(spec: &str, dim: usize, default: Option<&InitialState>, model: &Model) -> Result<InitialState> {
    let (head, arg) = spec.split_once(':').map_or((spec, None), |(h, a)| (h, Some(a)));
    Ok(match head {
        "model" => default.cloned().ok_or_else(|| anyhow!("the model provides no initial state"))?,
        "plus" | "uniform" => InitialState::Pure(StateVector::uniform(dim)?),
        "basis" => {
            let k: usize = arg.ok_or_else(|| anyhow!("basis needs an index"))?.parse().context("basis index")?;
            InitialState::Pure(StateVector::basis(dim, k)?)
        }
        "ground" => {
            let h = match model {
                Model::NonHermitian(m) => m.h().clone(),
                Model::Lindblad(m) => m.h_s().clone(),
                Model::Classical(_) => bail!("classical models have no Hamiltonian"),
            };
            let eig = nhqsl::linalg::herm_eig(&h)?;
            InitialState::Pure(StateVector::new(eig.vectors.column(0).into_owned())?)
        }
        "maximally-mixed" => InitialState::Mixed(DensityOperator::maximally_mixed(dim)?),
        "diag" => {
            let p = numbers(arg.ok_or_else(|| anyhow!("diag needs probabilities"))?)?;
            ensure!(p.len() == dim, "diag has {} entries for dimension {dim}", p.len());
            match model {
                Model::Classical(_) => {
                    nhqsl::metrics::validate_distribution(&p)?;
                    InitialState::Distribution(p)
                }
                _ => InitialState::Mixed(DensityOperator::diagonal(&p)?),
            }
        }
        "amplitudes" => {
            let a = numbers(arg.ok_or_else(|| anyhow!("amplitudes needs values"))?)?;
            ensure!(a.len() == dim, "amplitudes has {} entries for dimension {dim}", a.len());
            let v = ComplexVector::from_iterator(dim, a.iter().map(|&x| c64(x, 0.0)));
            InitialState::Pure(StateVector::new(v)?.normalize()?.0)
        }
        "random-pure" => InitialState::Pure(random_pure_state(dim, &mut seeded_rng(seed_of(arg)?))?),
        "random-mixed" => InitialState::Mixed(random_density(dim, &mut seeded_rng(seed_of(arg)?))?),
        other => bail!("unknown state spec `{other}`"),
    })
}

/// Observable choice for uncertainty relations.
#[derive(Debug, Clone)]
pub enum ObservableSpec {
    Matrix(ComplexMatrix),
    /// Values of a state function of a classical chain.
    Values(Vec<f64>),
    JumpCount,
    JumpCountSampled,
}

/// `identity`, `projector:k`, `diag:c1,c2,..`, `pauli:x|y|z`,
/// `random[:seed]`, `jump-count`, `jump-count-mc`.
pub fn parse_observable(spec: &str, dim: usize) -> Result<ObservableSpec> {
    let (head, arg) = spec.split_once(':').map_or((spec, None), |(h, a)| (h, Some(a)));
    Ok(match head {
        "identity" => ObservableSpec::Matrix(ComplexMatrix::identity(dim, dim)),
        "projector" => {
            let k: usize =
                arg.ok_or_else(|| anyhow!("projector needs an index"))?.parse().context("projector index")?;
            ensure!(k < dim, "projector index {k} out of range for dimension {dim}");
            let mut v = vec![0.0; dim];
            v[k] = 1.0;
            ObservableSpec::Values(v)
        }
        "diag" => {
            let v = numbers(arg.ok_or_else(|| anyhow!("diag needs values"))?)?;
            ensure!(v.len() == dim, "diag has {} entries for dimension {dim}", v.len());
            ObservableSpec::Values(v)
        }
        "pauli" => {
            ensure!(dim == 2, "Pauli observables need a two-level system");
            let axis = arg.and_then(|a| a.chars().next()).ok_or_else(|| anyhow!("pauli needs an axis"))?;
            ObservableSpec::Matrix(pauli(axis)?)
        }
        "random" => ObservableSpec::Matrix(random_hermitian(dim, &mut seeded_rng(seed_of(arg)?))),
        "jump-count" => ObservableSpec::JumpCount,
        "jump-count-mc" => ObservableSpec::JumpCountSampled,
        other => bail!("unknown observable spec `{other}`"),
    })
}

impl ObservableSpec {
    /// Matrix form for quantum bounds; diagonal values become a diagonal matrix.
    pub fn matrix(&self) -> Option<ComplexMatrix> {
        match self {
            ObservableSpec::Matrix(m) => Some(m.clone()),
            ObservableSpec::Values(v) => Some(diag(v)),
            _ => None,
        }
    }

    /// Diagonal values for classical bounds.
    pub fn values(&self) -> Option<Vec<f64>> {
        match self {
            ObservableSpec::Values(v) => Some(v.clone()),
            _ => None,
        }
    }
}

/// Pretty JSON document for a loaded model.
pub fn emit_document(loaded: &LoadedModel) -> Result<String> {
    Ok(ModelDocument::from_model(&loaded.model, loaded.initial.as_ref())?.to_json()?)
}
