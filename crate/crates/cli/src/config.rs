//! Job description files.
//!
//! A job is one flat JSON object selected by its `mode` field. See the
//! README for the field reference of every mode.

use serde::Deserialize;

use gronwall_core::{Grid, Signal};

use crate::expr::parse_signal_expression;
use crate::CliError;

/// A signal given as a number, an expression of `t`, or samples spread
/// uniformly over the job's `[t0, t1]`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SignalSpec {
    Number(f64),
    Expression(String),
    Samples(Vec<f64>),
}

impl Default for SignalSpec {
    fn default() -> Self {
        SignalSpec::Number(0.0)
    }
}

impl SignalSpec {
    pub fn build(&self, field: &str, t0: f64, t1: f64) -> Result<Signal, CliError> {
        match self {
            SignalSpec::Number(x) => Ok(Signal::constant(*x)),
            SignalSpec::Expression(text) => {
                parse_signal_expression(text).map_err(|source| CliError::Expression {
                    field: field.to_string(),
                    source,
                })
            }
            SignalSpec::Samples(values) => {
                let grid = Grid::new(t0, t1, values.len()).map_err(|e| {
                    CliError::Config(format!(
                        "`{field}`: sample array needs at least 2 values ({e})"
                    ))
                })?;
                Signal::sampled(grid, values.clone())
                    .map_err(|e| CliError::Config(format!("`{field}`: {e}")))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SquaredDifferenceSpec {
    #[default]
    AsPrinted,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundJob {
    pub t0: f64,
    pub t1: f64,
    pub n: usize,
    pub c: f64,
    pub v: SignalSpec,
    #[serde(default)]
    pub f: SignalSpec,
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeJob {
    pub t0: f64,
    pub t1: f64,
    pub n: usize,
    pub u0: f64,
    pub v: SignalSpec,
    #[serde(default)]
    pub f: SignalSpec,
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinsysJob {
    pub t0: f64,
    pub t1: f64,
    pub n: usize,
    /// Matrix rows.
    pub a: Vec<Vec<SignalSpec>>,
    /// Forcing vector; zero when absent.
    pub g: Option<Vec<SignalSpec>>,
    pub y0: Vec<f64>,
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiccatiJob {
    pub t0: f64,
    pub t1: f64,
    pub n: usize,
    pub c: f64,
    pub v: SignalSpec,
    #[serde(default)]
    pub f: SignalSpec,
    /// Function satisfying the integral inequality; the equality-case
    /// trajectory when absent.
    pub u: Option<SignalSpec>,
    #[serde(default)]
    pub squared_difference: SquaredDifferenceSpec,
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteJob {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_count")]
    pub count: usize,
    pub output: Option<String>,
}

fn default_seed() -> u64 {
    42
}

fn default_count() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum JobConfig {
    Bound(BoundJob),
    Envelope(EnvelopeJob),
    Linsys(LinsysJob),
    RiccatiCompare(RiccatiJob),
    VerifySuite(SuiteJob),
}

impl JobConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn output(&self) -> Option<&str> {
        match self {
            JobConfig::Bound(j) => j.output.as_deref(),
            JobConfig::Envelope(j) => j.output.as_deref(),
            JobConfig::Linsys(j) => j.output.as_deref(),
            JobConfig::RiccatiCompare(j) => j.output.as_deref(),
            JobConfig::VerifySuite(j) => j.output.as_deref(),
        }
    }

    /// Replaces the node count of the job grid.
    pub fn set_grid_n(&mut self, n: usize) {
        match self {
            JobConfig::Bound(j) => j.n = n,
            JobConfig::Envelope(j) => j.n = n,
            JobConfig::Linsys(j) => j.n = n,
            JobConfig::RiccatiCompare(j) => j.n = n,
            JobConfig::VerifySuite(_) => {}
        }
    }
}
