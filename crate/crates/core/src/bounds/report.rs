use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg;
use crate::ComplexMatrix;

/// Slack below `-SLACK_TOL` on an applicable bound counts as a violation.
pub const SLACK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `1 - Lambda_ML >= 2 sin^2(L_D / 2)`.
    QslMl,
    /// `tau (<H> - E_g + <Gamma>) >= 2 sin^2(L_D / 2)`.
    QslMlSimplified,
    /// `|psi(tau)|^2 / num^2 - 1 >= ratio^2`.
    TurMl,
    /// `1 / num^2 - 1 >= ratio^2`.
    TurMlLoose,
    /// `int Delta H dt >= L_D`.
    QslMt,
    /// `tan^2(int Delta H dt) >= ratio^2`.
    TurMt,
    /// `Delta C Delta H >= |d<C>/dt| / 2`.
    EnergyTime,
    QslMlOpen,
    TurMlOpen,
    /// `e^{a tau} - 1 >= ratio^2` for `H_S = 0`.
    TurMlOpenClassical,
    QslMtOpen,
    TurMtOpen,
    /// `a tau >= D_{1/2}(P(0) || P(tau))`.
    ClassicalSpeedLimit,
    /// `e^{a tau} - 1 >= ratio^2` on the bare Markov chain.
    ClassicalTur,
}

impl BoundKind {
    pub const ALL: [BoundKind; 14] = [
        BoundKind::QslMl,
        BoundKind::QslMlSimplified,
        BoundKind::TurMl,
        BoundKind::TurMlLoose,
        BoundKind::QslMt,
        BoundKind::TurMt,
        BoundKind::EnergyTime,
        BoundKind::QslMlOpen,
        BoundKind::TurMlOpen,
        BoundKind::TurMlOpenClassical,
        BoundKind::QslMtOpen,
        BoundKind::TurMtOpen,
        BoundKind::ClassicalSpeedLimit,
        BoundKind::ClassicalTur,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::QslMl => "qsl_ml",
            BoundKind::QslMlSimplified => "qsl_ml_simplified",
            BoundKind::TurMl => "tur_ml",
            BoundKind::TurMlLoose => "tur_ml_loose",
            BoundKind::QslMt => "qsl_mt",
            BoundKind::TurMt => "tur_mt",
            BoundKind::EnergyTime => "energy_time",
            BoundKind::QslMlOpen => "qsl_ml_open",
            BoundKind::TurMlOpen => "tur_ml_open",
            BoundKind::TurMlOpenClassical => "tur_ml_open_classical",
            BoundKind::QslMtOpen => "qsl_mt_open",
            BoundKind::TurMtOpen => "tur_mt_open",
            BoundKind::ClassicalSpeedLimit => "classical_speed_limit",
            BoundKind::ClassicalTur => "classical_tur",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A named precondition and whether it held.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<f64>,
}

/// One evaluated inequality `lhs >= rhs`; `lhs` is always the cost side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub applicable: bool,
    pub conditions: Vec<Condition>,
    pub params: BTreeMap<String, f64>,
    /// Quadrature error estimate carried by `lhs`, if any.
    pub quad_err: Option<f64>,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn new(kind: BoundKind, lhs: f64, rhs: f64) -> Self {
        Self {
            kind,
            lhs,
            rhs,
            slack: lhs - rhs,
            applicable: true,
            conditions: Vec::new(),
            params: BTreeMap::new(),
            quad_err: None,
            notes: Vec::new(),
        }
    }

    /// Records a precondition; a failed one makes the report inapplicable.
    pub fn condition(mut self, name: &str, passed: bool) -> Self {
        self.applicable &= passed;
        self.conditions.push(Condition { name: name.into(), passed, value: None });
        self
    }

    pub fn condition_with(mut self, name: &str, passed: bool, value: f64) -> Self {
        self = self.condition(name, passed);
        self.conditions.last_mut().expect("just pushed").value = Some(value);
        self
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.into(), value);
        self
    }

    pub fn quad_err(mut self, err: f64) -> Self {
        self.quad_err = Some(err);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// `true` unless the bound is applicable and violated beyond `tol`.
    pub fn holds(&self, tol: f64) -> bool {
        !self.violated(tol)
    }

    /// Applicable and violated by more than `tol`.
    pub fn violated(&self, tol: f64) -> bool {
        self.applicable && !(self.slack >= -tol)
    }

    pub fn failed_conditions(&self) -> Vec<&str> {
        self.conditions.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

/// Ground energy `E_g`, the smallest eigenvalue of a Hermitian Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundEnergy(pub f64);

impl GroundEnergy {
    pub fn of(h: &ComplexMatrix) -> Result<Self> {
        Ok(Self(linalg::herm_eig(h)?.min()))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}
