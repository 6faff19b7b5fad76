//! Scenario configuration: a JSON document with a top-level version field.
//! Parsing is strict — unknown keys are rejected — and the parsed form
//! serializes back to an equivalent document (round-trip identity).

use nalgebra::DMatrix;
use quadflow::coherent::GaussianState;
use quadflow::siegel::SiegelPoint;
use quadflow::symcore::{PhasePoint, QuadraticHamiltonian};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported config version {got} (expected {CONFIG_VERSION})")]
    Version { got: u32 },
    #[error("field {field}: expected a {rows}x{cols} matrix, got {got_rows}x{got_cols}")]
    MatrixShape { field: &'static str, rows: usize, cols: usize, got_rows: usize, got_cols: usize },
    #[error("field {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("unknown preset {0:?} (expected harmonic, free, or inverted)")]
    UnknownPreset(String),
    #[error("unknown output {0:?} (expected flow, state-path, wigner, symbol, index, matrix-elements, verify)")]
    UnknownOutput(String),
    #[error("time window must satisfy start < stop (got {start} >= {stop})")]
    TimeWindow { start: f64, stop: f64 },
}

/// Row-major nested-array matrix as it appears in the JSON.
pub type JsonMatrix = Vec<Vec<f64>>;

pub fn to_matrix(
    m: &JsonMatrix,
    rows: usize,
    cols: usize,
    field: &'static str,
) -> Result<DMatrix<f64>, ConfigError> {
    let got_rows = m.len();
    let got_cols = m.first().map_or(0, |r| r.len());
    if got_rows != rows || m.iter().any(|r| r.len() != cols) {
        return Err(ConfigError::MatrixShape { field, rows, cols, got_rows, got_cols });
    }
    Ok(DMatrix::from_fn(rows, cols, |i, j| m[i][j]))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    pub n: usize,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    pub hamiltonian: HamiltonianSpec,
    pub time: TimeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
    #[serde(default)]
    pub outputs: Vec<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wigner: Option<WignerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

fn default_hbar() -> f64 {
    1.0
}

fn default_seed() -> u64 {
    quadflow::verify::DEFAULT_SEED
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub start: f64,
    pub stop: f64,
    #[serde(default = "default_min_nodes")]
    pub min_nodes: usize,
}

fn default_min_nodes() -> usize {
    800
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HamiltonianSpec {
    /// Named presets: "harmonic" (G = K = I), "free" (K = I), "inverted"
    /// (G = -I, K = I).
    Preset { name: String },
    Constant { g: JsonMatrix, l: JsonMatrix, k: JsonMatrix },
    Piecewise { breaks: Vec<f64>, pieces: Vec<PieceSpec> },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub g: JsonMatrix,
    pub l: JsonMatrix,
    pub k: JsonMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub center_q: Vec<f64>,
    pub center_p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_re: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_im: Option<JsonMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WignerSpec {
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_half_width() -> f64 {
    3.0
}

fn default_points() -> usize {
    41
}

pub const KNOWN_OUTPUTS: [&str; 7] =
    ["flow", "state-path", "wigner", "symbol", "index", "matrix-elements", "verify"];

impl Config {
    /// Parse and fully validate before any computation.
    pub fn from_str(s: &str) -> Result<Config, ConfigError> {
        let cfg: Config = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(ConfigError::Version { got: self.version });
        }
        if self.n == 0 {
            return Err(ConfigError::Invalid {
                field: "n",
                reason: "must be at least 1".into(),
            });
        }
        // rejects NaN as well as non-positive values
        if self.hbar.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(ConfigError::Invalid {
                field: "hbar",
                reason: "must be positive".into(),
            });
        }
        if self.time.start >= self.time.stop {
            return Err(ConfigError::TimeWindow {
                start: self.time.start,
                stop: self.time.stop,
            });
        }
        for o in &self.outputs {
            if !KNOWN_OUTPUTS.contains(&o.as_str()) {
                return Err(ConfigError::UnknownOutput(o.clone()));
            }
        }
        // Construct everything once up front so shape errors surface here.
        self.hamiltonian_impl()?;
        self.initial_state()?;
        Ok(())
    }

    fn hamiltonian_impl(&self) -> Result<QuadraticHamiltonian, ConfigError> {
        let n = self.n;
        let bad = |e: quadflow::symcore::SymError| ConfigError::Invalid {
            field: "hamiltonian",
            reason: e.to_string(),
        };
        match &self.hamiltonian {
            HamiltonianSpec::Preset { name } => match name.as_str() {
                "harmonic" => Ok(QuadraticHamiltonian::harmonic(n, self.hbar)),
                "free" => Ok(QuadraticHamiltonian::free(n, self.hbar)),
                "inverted" => Ok(QuadraticHamiltonian::inverted(n, self.hbar)),
                other => Err(ConfigError::UnknownPreset(other.to_string())),
            },
            HamiltonianSpec::Constant { g, l, k } => QuadraticHamiltonian::constant(
                n,
                self.hbar,
                to_matrix(g, n, n, "hamiltonian.g")?,
                to_matrix(l, n, n, "hamiltonian.l")?,
                to_matrix(k, n, n, "hamiltonian.k")?,
            )
            .map_err(bad),
            HamiltonianSpec::Piecewise { breaks, pieces } => {
                let mut blocks = Vec::with_capacity(pieces.len());
                for p in pieces {
                    blocks.push((
                        to_matrix(&p.g, n, n, "hamiltonian.pieces.g")?,
                        to_matrix(&p.l, n, n, "hamiltonian.pieces.l")?,
                        to_matrix(&p.k, n, n, "hamiltonian.pieces.k")?,
                    ));
                }
                QuadraticHamiltonian::piecewise(n, self.hbar, breaks.clone(), blocks)
                    .map_err(bad)
            }
        }
    }

    pub fn hamiltonian(&self) -> Result<QuadraticHamiltonian, ConfigError> {
        self.hamiltonian_impl()
    }

    pub fn initial_state(&self) -> Result<GaussianState, ConfigError> {
        let n = self.n;
        match &self.state {
            None => Ok(GaussianState::ground(n, self.hbar)),
            Some(s) => {
                if s.center_q.len() != n || s.center_p.len() != n {
                    return Err(ConfigError::Invalid {
                        field: "state",
                        reason: format!("center must have {n} q and {n} p entries"),
                    });
                }
                let z = PhasePoint::from_qp(&s.center_q, &s.center_p).map_err(|e| {
                    ConfigError::Invalid { field: "state", reason: e.to_string() }
                })?;
                match (&s.gamma_re, &s.gamma_im) {
                    (None, None) => Ok(GaussianState::coherent(z, self.hbar)),
                    (re, im) => {
                        let re = match re {
                            Some(m) => to_matrix(m, n, n, "state.gamma_re")?,
                            None => DMatrix::zeros(n, n),
                        };
                        let im = match im {
                            Some(m) => to_matrix(m, n, n, "state.gamma_im")?,
                            None => DMatrix::identity(n, n),
                        };
                        let gamma = re.map(|x| num_complex::Complex64::new(x, 0.0))
                            + im.map(|x| num_complex::Complex64::new(0.0, x));
                        let gp = SiegelPoint::new(gamma).map_err(|e| {
                            ConfigError::Invalid { field: "state.gamma", reason: e.to_string() }
                        })?;
                        GaussianState::squeezed(z, gp, self.hbar).map_err(|e| {
                            ConfigError::Invalid { field: "state", reason: e.to_string() }
                        })
                    }
                }
            }
        }
    }
}
