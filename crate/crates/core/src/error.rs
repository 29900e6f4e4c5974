use std::fmt;

use thiserror::Error;

/// Integration zone that produced a diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Zone {
    Inner,
    Middle,
    Tail,
    Angular,
    MonteCarlo,
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Zone::Inner => "inner",
            Zone::Middle => "middle",
            Zone::Tail => "tail",
            Zone::Angular => "angular",
            Zone::MonteCarlo => "monte-carlo",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence in the {zone} zone (last error estimate {last_err:e})")]
    ConvergenceFailure { zone: Zone, last_err: f64 },

    #[error("diagonal singularity |x-y|^-{exponent} is not integrable in dimension {dim}")]
    Singularity { exponent: f64, dim: usize },

    #[error("tail envelope is not integrable: {0}")]
    Divergence(String),

    #[error("Hölder fit failed: {0}")]
    Fit(String),

    #[error("rejection sampler acceptance rate {rate:e} is below 1e-4")]
    SamplerFailure { rate: f64 },

    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
