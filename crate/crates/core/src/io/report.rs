//! Versioned JSON reports.

use serde::Serialize;
use serde_json::Value;

use crate::archzeta2::QuadratureConfig;
use crate::arrangement::Arrangement;
use crate::resolution::ResolutionChoice;

pub const SCHEMA_ID: &str = "arrzeta-report/1";

/// The published JSON schema for [`Report`].
pub const SCHEMA_JSON: &str = include_str!("../../schema/report.schema.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Hypotheses {
    pub central: bool,
    pub essential: bool,
    pub indecomposable: bool,
}

impl Hypotheses {
    pub fn of(a: &Arrangement) -> Self {
        let c = a.classify();
        Self { central: c.central, essential: c.essential, indecomposable: !c.decomposable }
    }

    pub fn all(&self) -> bool {
        self.central && self.essential && self.indecomposable
    }

    /// `name=false` for each failing predicate.
    pub fn failing(&self) -> Vec<String> {
        [("central", self.central), ("essential", self.essential), ("indecomposable", self.indecomposable)]
            .into_iter()
            .filter(|(_, ok)| !ok)
            .map(|(name, _)| format!("{name}=false"))
            .collect()
    }
}

/// A numerical value with its absolute error estimate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Measured {
    pub value: f64,
    pub error: f64,
}

impl Measured {
    pub fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExitStatus {
    Success,
    Error,
    HypothesesNotMet,
    Inconclusive,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            Self::Success => 0,
            Self::Error => 1,
            Self::HypothesesNotMet => 2,
            Self::Inconclusive => 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub tool_version: &'static str,
    pub inputs: Value,
    pub hypotheses: Hypotheses,
    pub resolution: ResolutionChoice,
    pub quadrature: Option<QuadratureConfig>,
    pub assumptions: Vec<String>,
    pub results: Value,
    pub verdict: Option<String>,
    pub status: ExitStatus,
    pub exit_code: i32,
    pub timing_ms: f64,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}
