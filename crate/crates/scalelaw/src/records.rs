//! Experiment records, architecture registry, and compute accounting.
//!
//! An [`ExperimentRecord`] is one trained model evaluated on one task; the
//! registry maps architecture names to their per-sample forward cost in
//! GMACs (giga multiply-accumulates). Total pre-training compute is
//! `gmacs_per_sample * samples_seen`, the x-axis of every scaling fit.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::KahanSum;

/// Architecture description plus its per-sample forward compute constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchSpec {
    pub name: String,
    pub image_width: u32,
    pub text_width: u32,
    pub embed_dim: u32,
    pub image_depth: u32,
    pub text_depth: u32,
    pub params_millions: f64,
    pub gmacs_per_sample: f64,
}

impl ArchSpec {
    fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Range("architecture name must be non-empty".into()));
        }
        let ints = [
            ("image_width", self.image_width),
            ("text_width", self.text_width),
            ("embed_dim", self.embed_dim),
            ("image_depth", self.image_depth),
            ("text_depth", self.text_depth),
        ];
        for (field, v) in ints {
            if v == 0 {
                return Err(Error::Range(format!(
                    "{field} must be positive for `{}`",
                    self.name
                )));
            }
        }
        if self.params_millions <= 0.0
            || self.gmacs_per_sample <= 0.0
            || self.params_millions.is_nan()
            || self.gmacs_per_sample.is_nan()
        {
            return Err(Error::Range(format!(
                "params_millions and gmacs_per_sample must be positive for `{}`",
                self.name
            )));
        }
        Ok(())
    }
}

/// Name-unique set of [`ArchSpec`]s.
#[derive(Debug, Clone, Default)]
pub struct ArchRegistry {
    specs: Vec<ArchSpec>,
    by_name: HashMap<String, usize>,
}

impl ArchRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry pre-populated with the six ViT image/text tower configurations
    /// used throughout the bundled fixtures (ViT-B/32 through ViT-G/14).
    pub fn builtin() -> Self {
        Self::from_csv(include_str!("../fixtures/architectures.csv").as_bytes())
            .expect("bundled architecture table is valid")
    }

    pub fn insert(&mut self, spec: ArchSpec) -> Result<()> {
        spec.validate()?;
        if self.by_name.contains_key(&spec.name) {
            return Err(Error::DuplicateArch(spec.name));
        }
        self.by_name.insert(spec.name.clone(), self.specs.len());
        self.specs.push(spec);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&ArchSpec> {
        self.by_name.get(name).map(|&i| &self.specs[i])
    }

    pub fn lookup(&self, name: &str) -> Result<&ArchSpec> {
        self.get(name).ok_or_else(|| Error::UnknownArch(name.into()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &ArchSpec> {
        self.specs.iter()
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    /// Reads `name,image_width,text_width,embed_dim,image_depth,text_depth,params_millions,gmacs_per_sample`.
    /// Lines starting with `#` are comments.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut registry = Self::new();
        for row in csv.deserialize::<ArchSpec>() {
            registry.insert(row?)?;
        }
        Ok(registry)
    }
}

/// Pre-training data family a model belongs to. Fits are run per family,
/// one trend line each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "openclip-laion")]
    OpenClipLaion,
    #[serde(rename = "clip-wit")]
    ClipWit,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::OpenClipLaion => "openclip-laion",
            Family::ClipWit => "clip-wit",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "openclip-laion" => Ok(Family::OpenClipLaion),
            "clip-wit" => Ok(Family::ClipWit),
            other => Err(Error::InvalidInput(format!(
                "unknown family `{other}` (expected `openclip-laion` or `clip-wit`)"
            ))),
        }
    }
}

/// One trained model evaluated on one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub arch: String,
    pub family: Family,
    pub pretrain_dataset: String,
    pub samples_seen: u64,
    pub task: String,
    pub metric_percent: f64,
}

impl ExperimentRecord {
    /// Uniqueness key: (arch, pretrain_dataset, samples_seen, task).
    pub fn key(&self) -> String {
        format!(
            "{}/{}/{}/{}",
            self.arch, self.pretrain_dataset, self.samples_seen, self.task
        )
    }

    fn validate(&self, line: usize) -> Result<()> {
        if self.samples_seen == 0 {
            return Err(Error::Parse {
                line,
                field: "samples_seen".into(),
                message: "must be positive".into(),
            });
        }
        if !(0.0..=100.0).contains(&self.metric_percent) {
            return Err(Error::Parse {
                line,
                field: "metric_percent".into(),
                message: format!("{} outside [0, 100]", self.metric_percent),
            });
        }
        Ok(())
    }
}

/// Input formats accepted by [`parse_records`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFormat {
    Csv,
    Json,
}

const RECORD_FIELDS: [&str; 6] = [
    "arch",
    "family",
    "pretrain_dataset",
    "samples_seen",
    "task",
    "metric_percent",
];

/// Parses experiment records from CSV (header required, `#` comments allowed)
/// or a JSON array of objects with the same keys. Row order is preserved.
pub fn parse_records<R: Read>(reader: R, format: RecordFormat) -> Result<Vec<ExperimentRecord>> {
    let records = match format {
        RecordFormat::Csv => parse_records_csv(reader)?,
        RecordFormat::Json => parse_records_json(reader)?,
    };
    check_unique(&records)?;
    Ok(records)
}

fn parse_records_csv<R: Read>(reader: R) -> Result<Vec<ExperimentRecord>> {
    let mut csv = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv.headers()?.clone();
    for required in RECORD_FIELDS {
        if !headers.iter().any(|h| h == required) {
            return Err(Error::Parse {
                line: 1,
                field: required.into(),
                message: "missing column in header".into(),
            });
        }
    }
    let mut records = Vec::new();
    for row in csv.records() {
        let row = row?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |name: &str| -> Result<&str> {
            headers
                .iter()
                .position(|h| h == name)
                .and_then(|i| row.get(i))
                .ok_or_else(|| Error::Parse {
                    line,
                    field: name.into(),
                    message: "missing value".into(),
                })
        };
        let parse_num = |name: &str, raw: &str| -> Result<f64> {
            raw.parse::<f64>().map_err(|e| Error::Parse {
                line,
                field: name.into(),
                message: format!("`{raw}`: {e}"),
            })
        };
        let samples_raw = field("samples_seen")?;
        let samples_seen = samples_raw.parse::<u64>().map_err(|e| Error::Parse {
            line,
            field: "samples_seen".into(),
            message: format!("`{samples_raw}`: {e}"),
        })?;
        let record = ExperimentRecord {
            arch: field("arch")?.to_string(),
            family: field("family")?.parse().map_err(|e| Error::Parse {
                line,
                field: "family".into(),
                message: format!("{e}"),
            })?,
            pretrain_dataset: field("pretrain_dataset")?.to_string(),
            samples_seen,
            task: field("task")?.to_string(),
            metric_percent: parse_num("metric_percent", field("metric_percent")?)?,
        };
        record.validate(line)?;
        records.push(record);
    }
    Ok(records)
}

fn parse_records_json<R: Read>(reader: R) -> Result<Vec<ExperimentRecord>> {
    let records: Vec<ExperimentRecord> =
        serde_json::from_reader(reader).map_err(|e| Error::Parse {
            line: e.line(),
            field: "json".into(),
            message: e.to_string(),
        })?;
    for (i, r) in records.iter().enumerate() {
        r.validate(i + 1)?;
    }
    Ok(records)
}

fn check_unique(records: &[ExperimentRecord]) -> Result<()> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        if let Some(&first) = seen.get(&r.key()) {
            return Err(Error::DuplicateRecord {
                key: r.key(),
                first: first + 1,
                second: i + 1,
            });
        }
        seen.insert(r.key(), i);
    }
    Ok(())
}

/// Writes records back out as CSV. The header is written even for an empty
/// list, so every output parses back.
pub fn write_records_csv<W: Write>(writer: W, records: &[ExperimentRecord]) -> Result<()> {
    let mut csv = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    csv.write_record(RECORD_FIELDS)?;
    for r in records {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}

/// Writes records as a JSON array.
pub fn write_records_json<W: Write>(writer: W, records: &[ExperimentRecord]) -> Result<()> {
    serde_json::to_writer_pretty(writer, records)?;
    Ok(())
}

/// Total pre-training compute for one record, in GMACs:
/// per-sample forward GMACs times samples seen. No backward-pass factor is
/// applied; a constant factor only rescales the fitted coefficient, not the
/// exponent.
pub fn total_compute(record: &ExperimentRecord, registry: &ArchRegistry) -> Result<f64> {
    let spec = registry.lookup(&record.arch)?;
    Ok(spec.gmacs_per_sample * record.samples_seen as f64)
}

/// Unweighted mean of `metric_percent` over a task set.
///
/// Every task in `tasks` must appear exactly once in `records` (the caller
/// filters to a fixed model beforehand). Summation runs in task-set order,
/// so the result does not depend on record order.
pub fn aggregate_mean(records: &[ExperimentRecord], tasks: &[&str]) -> Result<f64> {
    if tasks.is_empty() {
        return Err(Error::TaskAggregation {
            task: "<none>".into(),
            problem: "empty task set".into(),
        });
    }
    let mut sum = KahanSum::new();
    for task in tasks {
        let mut found = None;
        for r in records.iter().filter(|r| r.task == *task) {
            if found.is_some() {
                return Err(Error::TaskAggregation {
                    task: (*task).into(),
                    problem: "appears more than once".into(),
                });
            }
            found = Some(r.metric_percent);
        }
        match found {
            Some(v) => sum.add(v),
            None => {
                return Err(Error::TaskAggregation {
                    task: (*task).into(),
                    problem: "missing".into(),
                })
            }
        }
    }
    Ok(sum.value() / tasks.len() as f64)
}

/// How a metric is turned into the error value a power law is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorConvention {
    /// error = 100 - metric; the single monotone convention used for both
    /// accuracy and Recall@K tasks.
    #[default]
    HundredMinusMetric,
    /// The metric column already stores an error percentage.
    MetricIsError,
}

impl ErrorConvention {
    pub fn error_percent(&self, metric_percent: f64) -> f64 {
        match self {
            ErrorConvention::HundredMinusMetric => 100.0 - metric_percent,
            ErrorConvention::MetricIsError => metric_percent,
        }
    }
}

/// (total compute, error) pair derived from a record; the unit of fitting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComputePoint {
    /// Total compute C in GMACs.
    pub compute_gmac: f64,
    /// Error E in percent.
    pub error_percent: f64,
    /// Index of the originating record in the slice passed to [`to_points`].
    pub source: usize,
}

/// Maps records for one (task, family) selection to compute/error points,
/// preserving input order. An empty selection yields an empty list.
pub fn to_points(
    records: &[ExperimentRecord],
    task: &str,
    family: Family,
    registry: &ArchRegistry,
    convention: ErrorConvention,
) -> Result<Vec<ComputePoint>> {
    let mut points = Vec::new();
    for (i, r) in records.iter().enumerate() {
        if r.task != task || r.family != family {
            continue;
        }
        points.push(ComputePoint {
            compute_gmac: total_compute(r, registry)?,
            error_percent: convention.error_percent(r.metric_percent),
            source: i,
        });
    }
    Ok(points)
}
