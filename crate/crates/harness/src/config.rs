//! Experiment configuration: a flat `key = value` file, overridable from the
//! command line, rendered canonically for the config copy and its hash.

use std::fmt::Write as _;
use std::path::PathBuf;

use gafzeros_core::{EnsembleSpec, Model, Region, TrialConfig};
use sha2::{Digest, Sha256};

use crate::error::{usage, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: Model,
    /// Degree for the sphere and the torus.
    pub n: usize,
    /// Disk radius for the entire function.
    pub radius: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub thresholds: Vec<f64>,
    pub k_max: usize,
    pub regions: Vec<Region>,
    pub workers: usize,
    pub out_dir: Option<PathBuf>,
    /// Equal-measure bins for the location test.
    pub bins: usize,
    /// Run the zero-set diagnostics on every trial.
    pub verify: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: Model::Su2,
            n: 512,
            radius: 12.0,
            trials: 1000,
            master_seed: 0,
            thresholds: vec![1.0],
            k_max: 3,
            regions: vec![Region::Whole],
            workers: 1,
            out_dir: None,
            bins: 8,
            verify: false,
        }
    }
}

pub const KEYS: [&str; 12] =
    ["model", "n", "radius", "trials", "seed", "a", "kmax", "region", "workers", "out_dir", "bins", "verify"];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| usage(format!("invalid value for `{key}`: `{value}`")))
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl ExperimentConfig {
    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "model" => self.model = Model::from_name(value).ok_or_else(|| usage(format!("unknown model `{value}`")))?,
            "n" => self.n = parse(key, value)?,
            "radius" => self.radius = parse(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "seed" => self.master_seed = parse(key, value)?,
            "a" => self.thresholds = list(value).map(|v| parse(key, v)).collect::<Result<_>>()?,
            "kmax" => self.k_max = parse(key, value)?,
            "region" => {
                self.regions = list(value)
                    .map(|v| Region::from_name(v).ok_or_else(|| usage(format!("unknown region `{v}`"))))
                    .collect::<Result<_>>()?
            }
            "workers" => self.workers = parse(key, value)?,
            "out_dir" => self.out_dir = (!value.is_empty()).then(|| PathBuf::from(value)),
            "bins" => self.bins = parse(key, value)?,
            "verify" => self.verify = parse(key, value)?,
            other => return Err(usage(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Parse a config file on top of the defaults. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| usage(format!("line {}: expected `key = value`", lineno + 1)))?;
            config.set(key, value)?;
        }
        Ok(config)
    }

    /// Canonical rendering, one key per line in [`KEYS`] order.
    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(", ");
        let mut s = String::new();
        let _ = writeln!(s, "model = {}", self.model.as_str());
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "radius = {}", self.radius);
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "seed = {}", self.master_seed);
        let _ = writeln!(s, "a = {}", join(self.thresholds.iter().map(|a| a.to_string()).collect()));
        let _ = writeln!(s, "kmax = {}", self.k_max);
        let _ = writeln!(s, "region = {}", join(self.regions.iter().map(|r| r.name().to_string()).collect()));
        let _ = writeln!(s, "workers = {}", self.workers);
        let _ = writeln!(s, "out_dir = {}", self.out_dir.as_ref().map(|p| p.display().to_string()).unwrap_or_default());
        let _ = writeln!(s, "bins = {}", self.bins);
        let _ = writeln!(s, "verify = {}", self.verify);
        s
    }

    /// SHA-256 of [`to_text`](Self::to_text), hex encoded.
    pub fn hash(&self) -> String {
        hash_text(&self.to_text())
    }

    pub fn spec(&self) -> Result<EnsembleSpec> {
        let spec = match self.model {
            Model::Su2 => EnsembleSpec::su2(self.n),
            Model::TorusTheta => EnsembleSpec::torus(self.n),
            Model::Gef => EnsembleSpec::gef(self.radius),
        };
        spec.map_err(|e| usage(format!("invalid ensemble: {e}")))
    }

    pub fn trial_config(&self) -> TrialConfig {
        TrialConfig { thresholds: self.thresholds.clone(), regions: self.regions.clone(), k_max: self.k_max }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec()?;
        if self.trials == 0 {
            return Err(usage("trials must be at least 1"));
        }
        if self.workers == 0 {
            return Err(usage("workers must be at least 1"));
        }
        if self.bins < 2 {
            return Err(usage("bins must be at least 2"));
        }
        if let Some(r) = self.regions.iter().find(|r| !r.applies_to(self.model)) {
            return Err(usage(format!("region `{}` does not apply to model `{}`", r.name(), self.model.as_str())));
        }
        self.trial_config().validate().map_err(|e| usage(format!("invalid trial settings: {e}")))
    }
}

pub fn hash_text(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}
