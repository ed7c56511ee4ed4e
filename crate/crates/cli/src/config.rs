//! Experiment configuration files (TOML).

use std::path::Path;

use landau_core::capacity::CompactSet;
use landau_core::profile::RadialProfile;
use landau_core::symbol::{AngularMode, Frame, SeparableTerm, Sign, Symbol2D, Symbol4D};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// A whole experiment file. Each subcommand reads its own table.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub quadrature: Option<QuadratureConfig>,
    pub radial_eigs: Option<RadialEigsConfig>,
    pub spectrum: Option<SpectrumConfig>,
    pub toeplitz: Option<ToeplitzConfig>,
    pub capacity: Option<CapacityConfig>,
    pub asymptotics: Option<AsymptoticsConfig>,
    pub np51: Option<Np51Config>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub order: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialEigsConfig {
    pub profile: RadialProfile,
    pub count: usize,
    /// Overrides the closed-form Fourier transform of `profile`.
    pub fourier_profile: Option<RadialProfile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub b: f64,
    pub levels: usize,
    pub radial: usize,
    #[serde(default = "plus")]
    pub sign: Sign,
    pub symbol: Symbol4DSpec,
}

fn plus() -> Sign {
    Sign::Plus
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToeplitzConfig {
    pub zeta: RadialProfile,
    #[serde(default)]
    pub q: usize,
    pub b: f64,
    pub count: usize,
    /// Inclusive; defaults to `[2, count - 1]`.
    pub k_range: Option<(usize, usize)>,
    /// Capacity of the support for compactly supported weights; defaults to the disk radius.
    pub capacity: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityConfig {
    pub set: CompactSet,
    #[serde(default = "default_j_max")]
    pub j_max: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

fn default_j_max() -> usize {
    40
}

fn default_restarts() -> usize {
    8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AsymptoticsConfig {
    /// Weight `e^{-γ|x|^{2β}}` at field strength `b`.
    ExpWeight {
        gamma: f64,
        beta: f64,
        b: f64,
        ks: Vec<usize>,
    },
    Compact {
        b: f64,
        capacity: f64,
        ks: Vec<usize>,
    },
    Counting {
        symbol: Symbol2DSpec,
        #[serde(default = "plus")]
        sign: Sign,
        lambdas: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Np51Config {
    pub b: f64,
    pub m: Vec<usize>,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub levels: usize,
    pub radial: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub m: u32,
    pub cos: Option<RadialProfile>,
    pub sin: Option<RadialProfile>,
}

/// Symbols on R².
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Symbol2DSpec {
    Radial { profile: RadialProfile },
    AngularFourier { modes: Vec<ModeSpec> },
    Combination { parts: Vec<(f64, Symbol2DSpec)> },
}

impl Symbol2DSpec {
    pub fn build(&self) -> Symbol2D {
        match self {
            Symbol2DSpec::Radial { profile } => Symbol2D::radial(profile.clone()),
            Symbol2DSpec::AngularFourier { modes } => Symbol2D::AngularFourier(
                modes
                    .iter()
                    .map(|m| AngularMode {
                        m: m.m,
                        cos: m.cos.clone(),
                        sin: m.sin.clone(),
                    })
                    .collect(),
            ),
            Symbol2DSpec::Combination { parts } => {
                Symbol2D::Combination(parts.iter().map(|(c, s)| (*c, s.build())).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    #[serde(default = "one")]
    pub coeff: f64,
    pub first: Symbol2DSpec,
    pub second: Symbol2DSpec,
}

fn one() -> f64 {
    1.0
}

/// Symbols on R⁴, in the coordinates where the Landau Hamiltonian is `ℋ₀ ⊗ 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Symbol4DSpec {
    Zero,
    /// `1 ⊗ ℛ(|·|²)`: constant in the first pair, radial in the second.
    RadialPullback { profile: RadialProfile },
    Separable {
        terms: Vec<TermSpec>,
        #[serde(default = "lab")]
        frame: Frame,
    },
    Np51 { m: Vec<usize>, c1: Vec<f64>, c2: Vec<f64> },
}

fn lab() -> Frame {
    Frame::Lab
}

impl Symbol4DSpec {
    pub fn build(&self, b: f64) -> Result<Symbol4D, CliError> {
        Ok(match self {
            Symbol4DSpec::Zero => Symbol4D::zero(b),
            Symbol4DSpec::RadialPullback { profile } => Symbol4D::separable(
                b,
                vec![SeparableTerm {
                    coeff: 1.0,
                    first: Symbol2D::radial(RadialProfile::constant(1.0)),
                    second: Symbol2D::radial(profile.clone()),
                }],
                Frame::Lab,
            ),
            Symbol4DSpec::Separable { terms, frame } => Symbol4D::separable(
                b,
                terms
                    .iter()
                    .map(|t| SeparableTerm {
                        coeff: t.coeff,
                        first: t.first.build(),
                        second: t.second.build(),
                    })
                    .collect(),
                *frame,
            ),
            Symbol4DSpec::Np51 { m, c1, c2 } => {
                landau_core::operator::construct_np51(b, m, c1, c2)
                    .map_err(|e| CliError::Config(e.to_string()))?
                    .symbol
            }
        })
    }
}

/// A parsed configuration together with the hash of its source text.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub sha256: String,
}

pub fn parse(text: &str) -> Result<LoadedConfig, CliError> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    let digest = Sha256::digest(text.as_bytes());
    let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok(LoadedConfig { config, sha256 })
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

/// The table a subcommand needs, or a config error naming it.
pub fn section<'a, T>(value: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    value
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("missing [{name}] table")))
}
