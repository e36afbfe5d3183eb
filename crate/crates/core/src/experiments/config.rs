use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dist::{DistSpec, VoterDistribution};
use crate::error::{Error, Result};
use crate::tabulate::{Rule, TieRule};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::InvalidParameter(format!("unknown format `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub rules: Vec<Rule>,
    /// `uniform`, `beta:<alpha>` or `table:<path>`.
    pub dist: String,
    pub ks: Vec<usize>,
    pub alphas: Vec<f64>,
    pub trials: u64,
    pub master_seed: u64,
    pub tie_rule: TieRule,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            rules: vec![Rule::Plurality, Rule::Irv],
            dist: "uniform".into(),
            ks: vec![3],
            alphas: vec![0.3, 0.5, 0.8, 1.0, 2.0, 5.0],
            trials: 1000,
            master_seed: 0,
            tie_rule: TieRule::default(),
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(Error::InvalidParameter("k values must be at least 1".into()));
        }
        if self.rules.is_empty() {
            return Err(Error::InvalidParameter("no rules selected".into()));
        }
        if self.alphas.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::InvalidParameter("alphas must be positive".into()));
        }
        self.dist.parse::<DistSpec>()?;
        Ok(())
    }

    pub fn distribution(&self) -> Result<VoterDistribution> {
        self.dist.parse::<DistSpec>()?.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let ok = ExperimentConfig::default();
        assert!(ok.validate().is_ok());
        let bad = |f: fn(&mut ExperimentConfig)| {
            let mut c = ExperimentConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.trials = 0));
        assert!(bad(|c| c.ks = vec![]));
        assert!(bad(|c| c.ks = vec![0]));
        assert!(bad(|c| c.rules.clear()));
        assert!(bad(|c| c.alphas = vec![-1.0]));
        assert!(bad(|c| c.dist = "gauss".into()));
    }

    #[test]
    fn config_round_trips() {
        let c = ExperimentConfig {
            ks: vec![3, 100],
            ..Default::default()
        };
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&s).unwrap(), c);
        let partial: ExperimentConfig = serde_json::from_str(r#"{"trials": 5}"#).unwrap();
        assert_eq!(partial.trials, 5);
        assert_eq!(partial.dist, "uniform");
    }
}
