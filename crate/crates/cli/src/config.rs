use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use nshard::algorithms::AlgorithmSpec;
use nshard::hard1d::{schedule_params, LogBase, ScheduleMode, ScheduleParams};
use nshard::{Quad, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// ρ = exp(−256T²/γ²), k and N derived from it.
    Theory,
    /// k and ρ given directly.
    Desk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Single,
    Double,
    Extended,
}

impl Precision {
    pub fn depth_cap(self) -> usize {
        match self {
            Precision::Single => f32::depth_cap(),
            Precision::Double => f64::depth_cap(),
            Precision::Extended => Quad::depth_cap(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    Two,
    Natural,
}

/// Everything a command needs. Loaded from TOML, overridden by flags, and
/// saved next to the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(rename = "T")]
    pub t: usize,
    pub d: usize,
    pub gamma: f64,
    pub k: usize,
    pub rho: f64,
    pub log_base: Base,
    pub algo: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    pub runs: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub precision: Precision,
    pub mutate: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Desk,
            t: 30,
            d: 10,
            gamma: 1.0,
            k: 6,
            rho: 1e-8,
            log_base: Base::Two,
            algo: "pgd".into(),
            eta: None,
            noise: None,
            runs: 200,
            seed: 0,
            out: PathBuf::from("."),
            precision: Precision::Double,
            mutate: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn schedule(&self) -> Result<ScheduleParams> {
        let mode = match self.mode {
            Mode::Theory => ScheduleMode::Theory {
                gamma: self.gamma,
                base: match self.log_base {
                    Base::Two => LogBase::Two,
                    Base::Natural => LogBase::Natural,
                },
            },
            Mode::Desk => ScheduleMode::Desk { k: self.k, rho: self.rho },
        };
        Ok(schedule_params(self.t, mode)?)
    }

    pub fn algorithm(&self) -> Result<AlgorithmSpec> {
        Ok(AlgorithmSpec::from_id(&self.algo, self.eta, self.noise)?)
    }

    /// Checks every precondition that does not need an instance.
    pub fn validate(&self) -> Result<ScheduleParams> {
        if self.d < 2 {
            bail!("d must be at least 2, got {}", self.d);
        }
        let params = self.schedule()?;
        self.algorithm()?;
        let cap = self.precision.depth_cap();
        if params.n > cap {
            bail!(
                "depth N = {} exceeds the {:?} precision cap of {cap}; pass --precision extended",
                params.n,
                self.precision
            );
        }
        Ok(params)
    }

    /// The output directory, which must already exist.
    pub fn out_dir(&self) -> Result<&Path> {
        if !self.out.is_dir() {
            bail!("output directory {} does not exist", self.out.display());
        }
        Ok(&self.out)
    }
}
