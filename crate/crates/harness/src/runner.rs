//! Seeded trials, run in parallel and returned in trial order.

use std::time::Instant;

use gafzeros_core::ensembles::{sample_section, SeedRecord};
use gafzeros_core::extremes::collect_trial;
use gafzeros_core::rootfind::{verify_zeroset, zeros};
use gafzeros_core::stats::GofReport;
use gafzeros_core::{trial_stream, EnsembleSpec, TrialConfig, TrialRecord};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{usage, HarnessError, Result};
use crate::output;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub record: TrialRecord,
    /// Zero-set diagnostics verdict, when requested.
    pub verified: Option<bool>,
}

/// One trial: sample, locate the zeros, extract the near-pair record.
///
/// Everything is drawn from `trial_stream(master_seed, index)`, so the trial
/// can be replayed in isolation.
pub fn run_trial(
    spec: &EnsembleSpec,
    config: &TrialConfig,
    master_seed: u64,
    index: u64,
    verify: bool,
) -> std::result::Result<TrialOutcome, HarnessError> {
    let seed = SeedRecord { master_seed, trial_index: index };
    let fail = |source| HarnessError::Trial { seed, source };
    let mut rng = trial_stream(master_seed, index);
    let section = sample_section(spec, &mut rng).with_seed(seed);
    let zs = zeros(&section).map_err(fail)?;
    let verified = verify.then(|| verify_zeroset(&section, &zs).pass);
    let mut record = collect_trial(&zs, config, &mut rng).map_err(fail)?;
    record.seed = Some(seed);
    Ok(TrialOutcome { record, verified })
}

/// All trials of `config` on `config.workers` threads. The result is in trial
/// order and does not depend on the worker count; on failure the error of
/// the lowest failing trial index is returned.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<TrialOutcome>> {
    config.validate()?;
    let spec = config.spec()?;
    let tc = config.trial_config();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| usage(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<TrialOutcome>> = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|i| run_trial(&spec, &tc, config.master_seed, i, config.verify))
            .collect()
    });
    results.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub version: &'static str,
    pub config_hash: String,
    pub wall_time_seconds: f64,
    pub trials: u64,
    pub workers: usize,
}

#[derive(Debug, Clone)]
pub struct AggregateOutput {
    pub config: ExperimentConfig,
    pub outcomes: Vec<TrialOutcome>,
    pub report: GofReport,
    pub metadata: RunMetadata,
}

impl AggregateOutput {
    pub fn records(&self) -> impl Iterator<Item = &TrialRecord> {
        self.outcomes.iter().map(|o| &o.record)
    }
}

/// Run, aggregate, and write the config copy, `trials.csv` and
/// `summary.json` when `config.out_dir` is set.
pub fn run_extremes(config: &ExperimentConfig) -> Result<AggregateOutput> {
    let start = Instant::now();
    let outcomes = run_trials(config)?;
    let records: Vec<TrialRecord> = outcomes.iter().map(|o| o.record.clone()).collect();
    let report = GofReport::new(&config.spec()?, &config.trial_config(), &records, config.bins)?;
    let metadata = RunMetadata {
        version: env!("CARGO_PKG_VERSION"),
        config_hash: config.hash(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        trials: config.trials,
        workers: config.workers,
    };
    let out = AggregateOutput { config: config.clone(), outcomes, report, metadata };
    if let Some(dir) = &config.out_dir {
        output::write_all(dir, &out)?;
    }
    Ok(out)
}
