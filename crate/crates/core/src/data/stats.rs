use serde::Serialize;

use crate::error::{Error, Result};

use super::schema::Race;
use super::types::Dataset;

pub const AGE_BUCKETS: [(&str, u32, u32); 4] = [
    ("<=20", 0, 20),
    ("21-30", 21, 30),
    ("31-50", 31, 50),
    (">50", 51, u32::MAX),
];

#[derive(Debug, Clone, Serialize)]
pub struct StatsRow {
    pub group: String,
    pub n: usize,
    /// Percentage of positive labels; `None` when the group is empty.
    pub yes_pct: Option<f64>,
    pub no_pct: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsTable {
    pub task: super::types::Task,
    pub rows: Vec<StatsRow>,
}

fn row(group: &str, total: usize, positive: usize) -> StatsRow {
    if total == 0 {
        return StatsRow {
            group: group.into(),
            n: 0,
            yes_pct: None,
            no_pct: None,
        };
    }
    let yes = 100.0 * positive as f64 / total as f64;
    StatsRow {
        group: group.into(),
        n: total,
        yes_pct: Some(yes),
        no_pct: Some(100.0 - yes),
    }
}

/// Positive/negative percentages overall and broken down by age bucket (age
/// at the most recent history booking) and race.
pub fn class_stats(ds: &Dataset) -> Result<StatsTable> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rows = Vec::new();
    let positives = ds.samples.iter().filter(|s| s.label == 1).count();
    rows.push(row("All", ds.len(), positives));

    for (name, lo, hi) in AGE_BUCKETS {
        let in_bucket = ds
            .samples
            .iter()
            .filter(|s| {
                let age = s.last_history_age();
                age >= lo && age <= hi
            })
            .collect::<Vec<_>>();
        let pos = in_bucket.iter().filter(|s| s.label == 1).count();
        rows.push(row(name, in_bucket.len(), pos));
    }

    for race in Race::ALL {
        let idx = super::schema::STATIC_RACE + race.index();
        let in_group = ds
            .samples
            .iter()
            .filter(|s| s.static_features[idx] == 1.0)
            .collect::<Vec<_>>();
        let pos = in_group.iter().filter(|s| s.label == 1).count();
        rows.push(row(race.as_str(), in_group.len(), pos));
    }

    Ok(StatsTable { task: ds.task, rows })
}
