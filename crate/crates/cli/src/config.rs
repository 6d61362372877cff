//! Run configuration: JSON file, schema-validated, unknown keys rejected.

use serde::{Deserialize, Deserializer, Serialize};

use esrsim::chain::ChainLayout;
use esrsim::ensemble::Mode;
use esrsim::thermal::ThermalSpec;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[derive(Default)]
pub struct RunConfig {
    #[serde(default)]
    pub layout: LayoutConfig,
    #[serde(default)]
    pub thermal: ThermalConfig,
    #[serde(default)]
    pub mode: ModeConfig,
    #[serde(default)]
    pub thresholds: Thresholds,
}


#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutConfig {
    pub spins: usize,
    #[serde(default)]
    pub base_freq: BaseFreq,
    /// Alternating bond shifts, starting with the first on bond (1, 2).
    #[serde(default = "default_couplings")]
    pub couplings: (f64, f64),
    #[serde(default = "default_linewidth")]
    pub linewidth: f64,
}

impl Default for LayoutConfig {
    fn default() -> LayoutConfig {
        LayoutConfig {
            spins: 5,
            base_freq: BaseFreq::default(),
            couplings: default_couplings(),
            linewidth: default_linewidth(),
        }
    }
}

fn default_couplings() -> (f64, f64) {
    (1.0, 3.0)
}

fn default_linewidth() -> f64 {
    0.1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseFreq {
    Rule { offset: f64, step: f64 },
    Explicit(Vec<f64>),
}

impl Default for BaseFreq {
    fn default() -> BaseFreq {
        BaseFreq::Rule {
            offset: 100.0,
            step: 10.0,
        }
    }
}

impl LayoutConfig {
    pub fn build(&self) -> Result<ChainLayout, String> {
        let layout = match &self.base_freq {
            BaseFreq::Rule { offset, step } => ChainLayout::with_rule(
                self.spins,
                *offset,
                *step,
                self.couplings,
                self.linewidth,
            ),
            BaseFreq::Explicit(freqs) => {
                if freqs.len() != self.spins {
                    return Err(format!(
                        "base_freq lists {} values for {} spins",
                        freqs.len(),
                        self.spins
                    ));
                }
                let bonds = (1..self.spins)
                    .map(|n| {
                        if n % 2 == 1 {
                            self.couplings.0
                        } else {
                            self.couplings.1
                        }
                    })
                    .collect();
                ChainLayout::new(freqs.clone(), bonds, self.linewidth)
            }
        };
        layout.map_err(|e| e.to_string())
    }

    /// Same frequency rule and couplings on a different chain length.
    pub fn resized(&self, spins: usize) -> LayoutConfig {
        let base_freq = match &self.base_freq {
            BaseFreq::Rule { offset, step } => BaseFreq::Rule {
                offset: *offset,
                step: *step,
            },
            BaseFreq::Explicit(_) => BaseFreq::default(),
        };
        LayoutConfig {
            spins,
            base_freq,
            couplings: self.couplings,
            linewidth: self.linewidth,
        }
    }
}

/// One scalar `x` scales per spin with the layout frequencies; `per_spin`
/// pins each cost explicitly. `"inf"` is accepted for the scalar.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    #[serde(default = "default_x", deserialize_with = "de_extended_f64")]
    pub x: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_spin: Option<Vec<f64>>,
}

impl Default for ThermalConfig {
    fn default() -> ThermalConfig {
        ThermalConfig {
            x: default_x(),
            per_spin: None,
        }
    }
}

fn default_x() -> f64 {
    10f64.ln()
}

fn de_extended_f64<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(v) => Ok(v),
        Raw::Text(s) if s == "inf" => Ok(f64::INFINITY),
        Raw::Text(s) => Err(serde::de::Error::custom(format!(
            "thermal x must be a number or \"inf\", got `{s}`"
        ))),
    }
}

impl ThermalConfig {
    pub fn build(&self, layout: &ChainLayout) -> Result<ThermalSpec, String> {
        match &self.per_spin {
            Some(xs) => {
                if xs.len() != layout.total_spins() {
                    return Err(format!(
                        "per_spin lists {} costs for {} spins",
                        xs.len(),
                        layout.total_spins()
                    ));
                }
                if xs.iter().any(|&v| v < 0.0) {
                    return Err("per_spin costs must be nonnegative".into());
                }
                Ok(ThermalSpec::per_spin(xs.clone()))
            }
            None => {
                if self.x < 0.0 {
                    return Err("thermal x must be nonnegative".into());
                }
                Ok(ThermalSpec::scaled(self.x, layout))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum ModeConfig {
    #[default]
    Exact,
    Sampled { grid: usize, seed: u64 },
}


impl ModeConfig {
    pub fn build(&self) -> Mode {
        match self {
            ModeConfig::Exact => Mode::Exact,
            ModeConfig::Sampled { grid, seed } => Mode::Sampled {
                grid: *grid,
                seed: *seed,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Smallest line magnitude (relative to the reference) treated as signal.
    #[serde(default = "default_detect")]
    pub detect: f64,
    /// Squared-weight dominance needed by the answer readout.
    #[serde(default = "default_dominance")]
    pub dominance: f64,
    /// Squared-weight cutoff for the smallest-element search; when absent the
    /// shor command uses half the per-element weight of the built state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element_weight: Option<f64>,
}

impl Default for Thresholds {
    fn default() -> Thresholds {
        Thresholds {
            detect: default_detect(),
            dominance: default_dominance(),
            element_weight: None,
        }
    }
}

fn default_detect() -> f64 {
    1e-5
}

fn default_dominance() -> f64 {
    0.6
}

pub fn load_config(path: Option<&std::path::Path>) -> Result<RunConfig, String> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("config {}: {e}", p.display()))
        }
    }
}
