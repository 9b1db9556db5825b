//! Experiment configuration: one declarative file (TOML or JSON), flat keys,
//! unknown keys rejected.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use arblab::funding::FundingMode;
use arblab::paths::{ModelSpec, TimeGrid};
use arblab::pricers::Payoff;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum Method {
    Ip,
    Sa,
    Na1,
    Master,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub n_steps: usize,
}

impl GridConfig {
    pub fn build(&self) -> anyhow::Result<TimeGrid> {
        Ok(TimeGrid::new(self.t_start, self.t_end, self.n_steps)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum StrategyKind {
    BarrierDelta,
    Localtime,
    Skew,
    BesselNa,
    IncreasingProfit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HedgeConfig {
    pub strategy: StrategyKind,
    /// Multiplier on the strategy's paper initial fortune.
    #[serde(default = "one")]
    pub fortune_scale: f64,
    /// Absolute shortfall tolerance for the violation count.
    pub shortfall_tol: f64,
    /// Contact bandwidth for correction terms (0 = exact contact).
    #[serde(default)]
    pub bandwidth: f64,
    /// Write the first path's (t, S, h, V) trace as CSV here.
    #[serde(default)]
    pub paths_csv: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum ScheduleKind {
    Kappa,
    FutureInf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum ScaleFamilyConfig {
    Bm,
    Gbm { mu: f64, sigma: f64 },
    Besq { delta: f64 },
    InverseSquare,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FundConfig {
    pub n0: f64,
    #[serde(default)]
    pub q_lower: f64,
    #[serde(default)]
    pub q_upper: f64,
    pub schedule: ScheduleKind,
    #[serde(default)]
    pub scale_family: Option<ScaleFamilyConfig>,
    #[serde(default = "one")]
    pub y0: f64,
    #[serde(default)]
    pub mode: Option<FundingMode>,
    #[serde(default)]
    pub c_extra: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "family")]
pub enum ClassifyConfig {
    Besq { delta: f64 },
    Gbm { mu: f64, sigma: f64 },
    PowerLaw { sigma0: f64, p: f64, mu0: f64, q: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

fn one() -> f64 {
    1.0
}

fn default_format() -> OutputFormat {
    OutputFormat::Json
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { path: None, format: OutputFormat::Json }
    }
}

/// The experiment manifest: model, payoff, grid, batch size, seed, method,
/// and per-command sections.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub method: Option<Method>,
    pub n_paths: usize,
    pub master_seed: u64,
    /// 0 uses the default thread pool.
    #[serde(default)]
    pub threads: usize,
    pub model: ModelSpec,
    #[serde(default)]
    pub payoff: Option<Payoff>,
    pub grid: GridConfig,
    /// Restart points for the strong-arbitrage ladder (decreasing).
    #[serde(default)]
    pub sa_eps: Option<Vec<f64>>,
    #[serde(default)]
    pub hedge: Option<HedgeConfig>,
    #[serde(default)]
    pub fund: Option<FundConfig>,
    #[serde(default)]
    pub classify: Option<ClassifyConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).context("parsing JSON config")?,
            _ => toml::from_str(&text).context("parsing TOML config")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.n_paths == 0 {
            bail!("n_paths must be positive");
        }
        self.model.validate()?;
        self.grid.build()?;
        if let Some(g) = &self.payoff {
            g.validate()?;
        }
        if let Some(eps) = &self.sa_eps {
            if eps.is_empty() || eps.windows(2).any(|w| w[1] >= w[0]) {
                bail!("sa_eps must be a decreasing sequence");
            }
        }
        Ok(())
    }

    /// Canonical serialization hash over everything that determines results.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex_string(&hasher.finalize())
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }
}

fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
method = "ip"
n_paths = 1000
master_seed = 42

[model]
kind = "reflected_gbm"
s0 = 100.0
b = 80.0
mu = 0.05
sigma = 0.2

[payoff]
kind = "call"
strike = 100.0
maturity = 1.0

[grid]
t_start = 0.0
t_end = 1.0
n_steps = 100
"#;

    #[test]
    fn parses_sample_and_round_trips() {
        let cfg: ExperimentConfig = toml::from_str(SAMPLE).unwrap();
        cfg.validate().unwrap();
        let dumped = cfg.to_toml().unwrap();
        let reparsed: ExperimentConfig = toml::from_str(&dumped).unwrap();
        assert_eq!(cfg.hash(), reparsed.hash());
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = format!("{SAMPLE}\nbogus_key = 1\n");
        assert!(toml::from_str::<ExperimentConfig>(&bad).is_err());
    }

    #[test]
    fn zero_paths_rejected() {
        let cfg: ExperimentConfig =
            toml::from_str(&SAMPLE.replace("n_paths = 1000", "n_paths = 0")).unwrap();
        assert!(cfg.validate().is_err());
    }
}
