//! JSON experiment configurations run over a grid of shapes.
//!
//! ```json
//! {
//!   "command": "moment",
//!   "words": ["G(2,M/2),G(M/2,2)"],
//!   "shapes": [[8, 8], [16, 16]],
//!   "mode": "both",
//!   "samples": 2000,
//!   "seed": 7,
//!   "format": "csv"
//! }
//! ```
//!
//! Rows come out ordered by shape index, then word index, whatever the
//! number of worker threads.

use std::path::{Path, PathBuf};

use ptlab_core::montecarlo::{mc_covariance, mc_mixed_cumulant, mc_mixed_moments, SamplerConfig};
use ptlab_core::perms::MatrixShape;
use ptlab_core::wick::{exact_mixed_cumulant, exact_mixed_moment, exact_trace_covariance, Limits};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::commands::{count_json, value_report, word_at, COUNT_HEADER, VALUE_HEADER};
use crate::output::{Format, Report};
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepCommand {
    Count,
    Moment,
    Cumulant,
    Covariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Mc,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: SweepCommand,
    /// Word literals or templates in `M`. For `count`, two letters `a,b`.
    pub words: Vec<String>,
    /// Second words for `covariance`, paired index by index with `words`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub words2: Vec<String>,
    /// `(M, P)` grid points.
    pub shapes: Vec<(usize, usize)>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

const DEFAULT_SAMPLES: usize = 10_000;

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Core(ptlab_core::Error::Io(format!("{}: {e}", path.display()))))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Fills defaults and checks every literal against every shape.
    pub fn normalize(mut self) -> CliResult<Self> {
        if self.words.is_empty() || self.shapes.is_empty() {
            return Err(CliError::Usage("a sweep needs at least one word and one shape".into()));
        }
        let mc = self.mode != Mode::Exact;
        if mc {
            if self.command == SweepCommand::Count {
                return Err(CliError::Usage("count sweeps are exact only".into()));
            }
            if self.seed.is_none() {
                return Err(CliError::Usage("Monte Carlo sweeps need a seed".into()));
            }
            self.samples.get_or_insert(DEFAULT_SAMPLES);
        } else {
            self.samples = None;
            self.seed = None;
        }
        if self.command == SweepCommand::Covariance && self.words2.len() != self.words.len() {
            return Err(CliError::Usage("covariance sweeps need words2 of the same length as words".into()));
        }
        if self.command != SweepCommand::Covariance && !self.words2.is_empty() {
            return Err(CliError::Usage("words2 is only used by covariance sweeps".into()));
        }
        self.format.get_or_insert(Format::Csv);
        for &(m, p) in &self.shapes {
            let shape = MatrixShape::new(m, p)?;
            for w in self.words.iter().chain(&self.words2) {
                let word = word_at(w, shape, Limits::default())?;
                if self.command == SweepCommand::Count && word.len() != 2 {
                    return Err(CliError::Usage(format!("count expects two letters, got {w:?}")));
                }
            }
        }
        Ok(self)
    }

    fn limits(&self) -> Limits {
        let mut l = Limits::default();
        if let Some(b) = self.budget {
            l.enumeration = u128::from(b);
        }
        l
    }
}

fn point(cfg: &ExperimentConfig, index: usize, shape: MatrixShape, k: usize) -> CliResult<(Value, Vec<String>)> {
    let exact_on = cfg.mode != Mode::Mc;
    let sampler = match (cfg.mode, cfg.samples, cfg.seed) {
        (Mode::Exact, ..) => None,
        (_, Some(n), Some(seed)) => Some(SamplerConfig::new(shape, n, seed)?),
        _ => unreachable!("normalised config carries samples and seed"),
    };
    let lim = cfg.limits();
    let (mut doc, mut row) = match cfg.command {
        SweepCommand::Count => {
            let letters = word_at(&cfg.words[k], shape, lim)?;
            let (a, b) = (letters.perms()[0].label(), letters.perms()[1].label());
            let (mut doc, row) = count_json(shape.m, &a, &b, true)?;
            doc["P"] = json!(shape.p);
            let mut full = vec![shape.p.to_string()];
            full.extend(row);
            (doc, full)
        }
        SweepCommand::Moment | SweepCommand::Cumulant => {
            let w = word_at(&cfg.words[k], shape, lim)?;
            let moment = cfg.command == SweepCommand::Moment;
            let ex = match (exact_on, moment) {
                (false, _) => None,
                (true, true) => Some(exact_mixed_moment(&w)?.total),
                (true, false) => Some(exact_mixed_cumulant(&w)?),
            };
            let est = match (sampler, moment) {
                (None, _) => None,
                (Some(c), true) => Some(mc_mixed_moments(std::slice::from_ref(&w), &c)?[0]),
                (Some(c), false) => Some(mc_mixed_cumulant(&w, &c)?),
            };
            let r = value_report(w.label(), shape, ex, est, None);
            (r.json, r.rows.into_iter().next().unwrap_or_default())
        }
        SweepCommand::Covariance => {
            let w1 = word_at(&cfg.words[k], shape, lim)?;
            let w2 = word_at(&cfg.words2[k], shape, lim)?;
            let ex = if exact_on { Some(exact_trace_covariance(&w1, &w2)?) } else { None };
            let est = match sampler {
                Some(c) => Some(mc_covariance(&w1, &w2, &c)?),
                None => None,
            };
            let r = value_report(format!("{};{}", w1.label(), w2.label()), shape, ex, est, None);
            (r.json, r.rows.into_iter().next().unwrap_or_default())
        }
    };
    doc["index"] = json!(index);
    row.insert(0, index.to_string());
    Ok((doc, row))
}

pub fn execute(cfg: &ExperimentConfig) -> CliResult<Report> {
    let jobs: Vec<(usize, MatrixShape, usize)> = cfg
        .shapes
        .iter()
        .flat_map(|&(m, p)| (0..cfg.words.len()).map(move |k| (m, p, k)))
        .enumerate()
        .map(|(i, (m, p, k))| Ok((i, MatrixShape::new(m, p)?, k)))
        .collect::<CliResult<_>>()?;
    let results: Vec<(Value, Vec<String>)> =
        jobs.par_iter().map(|&(i, shape, k)| point(cfg, i, shape, k)).collect::<CliResult<_>>()?;
    let mut header = vec!["index"];
    match cfg.command {
        SweepCommand::Count => {
            header.push("P");
            header.extend(COUNT_HEADER);
        }
        _ => header.extend(VALUE_HEADER),
    }
    let (docs, rows): (Vec<Value>, Vec<Vec<String>>) = results.into_iter().unzip();
    let config = serde_json::to_value(cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Report { json: json!({ "config": config, "points": docs }), header, rows })
}

/// Returns the report plus the format and output path the config asks for.
pub fn run(path: &Path, emit_config: bool) -> CliResult<(Report, Option<Format>, Option<PathBuf>)> {
    let cfg = ExperimentConfig::load(path)?.normalize()?;
    if emit_config {
        let json = serde_json::to_value(&cfg).map_err(|e| CliError::Usage(e.to_string()))?;
        return Ok((Report { json, header: Vec::new(), rows: Vec::new() }, Some(Format::Json), None));
    }
    Ok((execute(&cfg)?, cfg.format, cfg.out.clone()))
}
