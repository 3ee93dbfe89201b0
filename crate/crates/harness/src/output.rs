//! On-disk outputs: config copy, per-trial CSV and JSON summary.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use gafzeros_core::kacrice::limit_cdf;
use gafzeros_core::stats::GofReport;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::runner::{AggregateOutput, TrialOutcome};

pub const CSV_SCHEMA: &str = "# schema: gafzeros-trials v1";
pub const CONFIG_FILE: &str = "config.txt";
pub const TRIALS_FILE: &str = "trials.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Histogram of `σ̃_k` on `[0, HISTOGRAM_MAX)`.
pub const HISTOGRAM_BINS: usize = 30;
pub const HISTOGRAM_MAX: f64 = 3.0;

pub fn write_all(dir: &Path, out: &AggregateOutput) -> Result<()> {
    fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
    let path = dir.join(CONFIG_FILE);
    fs::write(&path, out.config.to_text()).map_err(HarnessError::io(&path))?;
    let path = dir.join(TRIALS_FILE);
    let file = fs::File::create(&path).map_err(HarnessError::io(&path))?;
    write_trials_csv(io::BufWriter::new(file), &out.config, &out.outcomes)?;
    let path = dir.join(SUMMARY_FILE);
    let file = fs::File::create(&path).map_err(HarnessError::io(&path))?;
    write_json(io::BufWriter::new(file), &Summary::new(out)).map_err(HarnessError::io(&path))?;
    Ok(())
}

/// Per-threshold count columns: `N(a, U)` for every region, then the
/// isolated count.
pub fn count_columns(config: &ExperimentConfig) -> Vec<String> {
    let mut cols = Vec::new();
    for a in &config.thresholds {
        for r in &config.regions {
            cols.push(format!("count_a{a}_{}", r.name()));
        }
        cols.push(format!("isolated_a{a}"));
    }
    cols
}

/// One row per recorded `σ̃_k`, after a schema comment line.
pub fn write_trials_csv<W: Write>(mut w: W, config: &ExperimentConfig, outcomes: &[TrialOutcome]) -> Result<()> {
    writeln!(w, "{CSV_SCHEMA}").map_err(HarnessError::io("trials.csv"))?;
    let mut csv = csv::Writer::from_writer(w);
    let mut header: Vec<String> =
        ["trial", "model", "k", "sigma_rescaled", "mark_chart", "mark_re", "mark_im"].map(String::from).to_vec();
    header.extend(count_columns(config));
    csv.write_record(&header)?;
    for (index, o) in outcomes.iter().enumerate() {
        let r = &o.record;
        let trial = r.seed.map_or(index as u64, |s| s.trial_index);
        let mut counts = Vec::new();
        for t in 0..config.thresholds.len() {
            for reg in 0..config.regions.len() {
                counts.push(r.count(t, reg).to_string());
            }
            counts.push(r.isolated[t].to_string());
        }
        for (k, (sigma, mark)) in r.sigma.iter().zip(&r.marks).enumerate() {
            let mut row = vec![
                trial.to_string(),
                config.model.as_str().to_string(),
                (k + 1).to_string(),
                format!("{sigma:.16e}"),
                mark.chart.as_str().to_string(),
                format!("{:.16e}", mark.coord.re),
                format!("{:.16e}", mark.coord.im),
            ];
            row.extend(counts.iter().cloned());
            csv.write_record(&row)?;
        }
    }
    csv.flush().map_err(HarnessError::io("trials.csv"))?;
    Ok(())
}

/// Pretty JSON with every float rendered to 17 significant digits.
pub fn write_json<W: Write, T: Serialize>(w: W, value: &T) -> io::Result<()> {
    let mut ser = Serializer::with_formatter(w, Fixed17(PrettyFormatter::with_indent(b"  ")));
    value.serialize(&mut ser).map_err(io::Error::other)?;
    let mut w = ser.into_inner();
    writeln!(w)?;
    w.flush()
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    write_json(&mut buf, value).expect("writing to memory");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

struct Fixed17<'a>(PrettyFormatter<'a>);

impl Formatter for Fixed17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub version: &'static str,
    pub config_hash: String,
    pub config: String,
    pub wall_time_seconds: f64,
    pub trials: u64,
    pub report: ReportJson,
    pub histograms: Vec<Histogram>,
}

impl Summary {
    pub fn new(out: &AggregateOutput) -> Self {
        let m = &out.metadata;
        Self {
            version: m.version,
            config_hash: m.config_hash.clone(),
            config: out.config.to_text(),
            wall_time_seconds: m.wall_time_seconds,
            trials: m.trials,
            report: ReportJson::from(&out.report),
            histograms: (1..=out.config.k_max).map(|k| Histogram::of(out, k)).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct KsJson {
    pub k: usize,
    pub model: &'static str,
    pub samples: usize,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct DispersionJson {
    pub a: f64,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct ChiSquareJson {
    pub statistic: f64,
    pub dof: usize,
    pub quantile: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct MeanCountJson {
    pub a: f64,
    pub region: &'static str,
    pub mean: f64,
    pub stderr: f64,
    pub predicted: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub trials: usize,
    pub pass: bool,
    pub ks: Vec<KsJson>,
    pub dispersion: Vec<DispersionJson>,
    pub bins: usize,
    pub chi_square: Option<ChiSquareJson>,
    /// Location test below and above the median of `σ̃_1`.
    pub independence: Option<[ChiSquareJson; 2]>,
    pub mean_counts: Vec<MeanCountJson>,
}

impl From<&GofReport> for ReportJson {
    fn from(r: &GofReport) -> Self {
        let chi = |c: &gafzeros_core::stats::ChiSquare| ChiSquareJson {
            statistic: c.statistic,
            dof: c.dof,
            quantile: c.quantile,
            pass: c.pass,
        };
        Self {
            trials: r.trials,
            pass: r.pass(),
            ks: r
                .ks
                .iter()
                .map(|e| KsJson {
                    k: e.k,
                    model: e.model.as_str(),
                    samples: e.samples,
                    statistic: e.statistic,
                    threshold: e.threshold,
                    pass: e.pass,
                })
                .collect(),
            dispersion: r
                .dispersion
                .iter()
                .map(|e| DispersionJson { a: e.a, value: e.value, tolerance: e.tolerance, pass: e.pass })
                .collect(),
            bins: r.bins,
            chi_square: r.chi_square.as_ref().map(chi),
            independence: r.independence.as_ref().map(|[a, b]| [chi(a), chi(b)]),
            mean_counts: r
                .mean_counts
                .iter()
                .map(|e| MeanCountJson {
                    a: e.a,
                    region: e.region.name(),
                    mean: e.mean,
                    stderr: e.stderr,
                    predicted: e.predicted,
                    pass: e.pass,
                })
                .collect(),
        }
    }
}

/// Observed and limit-law expected counts of `σ̃_k` per bin.
#[derive(Debug, Serialize)]
pub struct Histogram {
    pub k: usize,
    pub edges: Vec<f64>,
    pub observed: Vec<u64>,
    pub expected: Vec<f64>,
    /// Samples at or beyond the last edge.
    pub overflow: u64,
}

impl Histogram {
    pub fn of(out: &AggregateOutput, k: usize) -> Self {
        let width = HISTOGRAM_MAX / HISTOGRAM_BINS as f64;
        let edges: Vec<f64> = (0..=HISTOGRAM_BINS).map(|i| i as f64 * width).collect();
        let mut observed = vec![0u64; HISTOGRAM_BINS];
        let mut overflow = 0;
        let mut m = 0u64;
        for r in out.records() {
            if let Some(&s) = r.sigma.get(k - 1) {
                m += 1;
                match ((s / width) as usize).min(HISTOGRAM_BINS) {
                    HISTOGRAM_BINS => overflow += 1,
                    b => observed[b] += 1,
                }
            }
        }
        let expected =
            edges.windows(2).map(|e| m as f64 * (limit_cdf(k, e[1]) - limit_cdf(k, e[0]))).collect();
        Self { k, edges, observed, expected, overflow }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Probe {
        x: f64,
        y: Vec<f64>,
        z: Option<f64>,
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_json_string(&Probe { x: 0.1, y: vec![1.0, -2.5e-300], z: None });
        assert!(s.contains("\"x\": 1.0000000000000001e-1"), "{s}");
        assert!(s.contains("1.0000000000000000e0"));
        assert!(s.contains("-2.5000000000000000e-300"));
        assert!(s.contains("\"z\": null"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }
}
