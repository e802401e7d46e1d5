use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use super::schema::{self, Race, HISTORY_STEPS, SCHEMA_VERSION, STEP_FEATURES, TOTAL_FEATURES};

/// One recorded charge event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Booking {
    pub age: u32,
    /// Severity class, 1 most severe .. 3 least severe.
    pub level: u8,
    /// Index into [`schema::NCIC_CATEGORIES`].
    pub ncic: usize,
    /// Years since the start of the observation period; strictly increasing
    /// within one suspect's history.
    pub time_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspectRecord {
    pub person_id: String,
    pub race: Race,
    pub bookings: Vec<Booking>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Level1,
    Level2,
    Level3,
    Any,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::Level1, Task::Level2, Task::Level3, Task::Any];

    /// The crime level this task tests for, if level-specific.
    pub fn level(&self) -> Option<u8> {
        match self {
            Task::Level1 => Some(1),
            Task::Level2 => Some(2),
            Task::Level3 => Some(3),
            Task::Any => None,
        }
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Task> {
        match s {
            "level1" => Ok(Task::Level1),
            "level2" => Ok(Task::Level2),
            "level3" => Ok(Task::Level3),
            "any" => Ok(Task::Any),
            other => Err(Error::Config(format!(
                "unknown task `{other}` (expected level1|level2|level3|any)"
            ))),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Level1 => "level1",
            Task::Level2 => "level2",
            Task::Level3 => "level3",
            Task::Any => "any",
        })
    }
}

/// One training sample: a fixed 12-step featurised history, suspect-level
/// statics, and the binary label derived from the final booking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSample {
    pub person_id: String,
    /// `HISTORY_STEPS x STEP_FEATURES`, zero-padded with the padding flag set.
    pub steps: Vec<Vec<f64>>,
    pub static_features: Vec<f64>,
    pub label: u8,
    pub task: Task,
    /// Crime level of the final (label) booking.
    pub final_level: u8,
    /// Whether the final booking fell inside the label window after the
    /// history; the binary label is derived from this.
    pub final_in_window: bool,
    /// Time offset of the final booking, used for the temporal split.
    pub final_time: f64,
}

impl SequenceSample {
    /// Steps then statics, in schema order, raw units.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(TOTAL_FEATURES);
        for step in &self.steps {
            out.extend_from_slice(step);
        }
        out.extend_from_slice(&self.static_features);
        out
    }

    /// Flattened and divided by the schema scales; the form models consume.
    pub fn flatten_scaled(&self) -> Vec<f64> {
        let scales = schema::feature_scales();
        self.flatten()
            .into_iter()
            .zip(scales)
            .map(|(v, s)| v / s)
            .collect()
    }

    /// Levels of the real (unpadded) history steps.
    pub fn history_levels(&self) -> Vec<u8> {
        self.steps
            .iter()
            .filter(|s| s[schema::STEP_PADDING] == 0.0)
            .map(|s| s[schema::STEP_LEVEL] as u8)
            .collect()
    }

    /// Age at the most recent real history step.
    pub fn last_history_age(&self) -> u32 {
        self.steps
            .iter()
            .filter(|s| s[schema::STEP_PADDING] == 0.0)
            .next_back()
            .map(|s| s[schema::STEP_AGE] as u32)
            .unwrap_or(0)
    }

    pub fn history_len(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| s[schema::STEP_PADDING] == 0.0)
            .count()
    }

    fn validate(&self) -> Result<()> {
        if self.steps.len() != HISTORY_STEPS
            || self.steps.iter().any(|s| s.len() != STEP_FEATURES)
            || self.static_features.len() != schema::STATIC_FEATURES
        {
            return Err(Error::Invalid(format!(
                "sample {} does not match the feature schema",
                self.person_id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

/// An immutable collection of samples sharing one task and schema version.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    pub schema_version: u32,
    pub task: Task,
    pub split: Split,
    pub samples: Vec<SequenceSample>,
}

impl Dataset {
    pub fn new(task: Task, split: Split, samples: Vec<SequenceSample>) -> Dataset {
        Dataset {
            schema_version: SCHEMA_VERSION,
            task,
            split,
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label as usize).collect()
    }

    pub fn positive_rate(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().filter(|s| s.label == 1).count() as f64 / self.samples.len() as f64
    }

    /// One JSON object per line, sample order preserved.
    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let header = serde_json::json!({
            "schema_version": self.schema_version,
            "task": self.task,
            "split": self.split,
        });
        writeln!(out, "{header}").map_err(|e| Error::io(path, e))?;
        for sample in &self.samples {
            writeln!(out, "{}", serde_json::to_string(sample)?).map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }

    pub fn read_jsonl(path: &Path) -> Result<Dataset> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let header: serde_json::Value = match lines.next() {
            Some(line) => serde_json::from_str(&line.map_err(|e| Error::io(path, e))?)?,
            None => return Err(Error::EmptyDataset),
        };
        let schema_version = header["schema_version"].as_u64().unwrap_or(0) as u32;
        if schema_version != SCHEMA_VERSION {
            return Err(Error::Invalid(format!(
                "dataset schema version {schema_version}, expected {SCHEMA_VERSION}"
            )));
        }
        let task: Task = serde_json::from_value(header["task"].clone())?;
        let split: Split = serde_json::from_value(header["split"].clone())?;
        let mut samples = Vec::new();
        for line in lines {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let sample: SequenceSample = serde_json::from_str(&line)?;
            sample.validate()?;
            samples.push(sample);
        }
        Ok(Dataset {
            schema_version,
            task,
            split,
            samples,
        })
    }
}
