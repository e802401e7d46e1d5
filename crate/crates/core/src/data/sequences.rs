use crate::error::{Error, Result};

use super::schema::{
    self, HISTORY_STEPS, STATIC_AGE_AVG, STATIC_COUNT_LEVEL, STATIC_FEATURES, STATIC_GAP_VARIANCE,
    STATIC_NUM_BOOKINGS, STATIC_RACE, STATIC_TIME_SINCE_LAST, STEP_AGE, STEP_CUM_LEVEL, STEP_GAP,
    STEP_LEVEL, STEP_NCIC, STEP_PADDING,
};
use super::types::{Dataset, SequenceSample, Split, SuspectRecord, Task};

/// Years after the end of a history within which a final booking counts as
/// a recurrence.
pub const LABEL_WINDOW_YEARS: f64 = 2.0;

pub const DEFAULT_SPLIT_YEAR: f64 = 18.0;

/// Build one sample per suspect with at least two bookings: the last booking
/// is the label event, everything before it is the history (most recent 12
/// kept, zero-padded with the padding flag when shorter). A sample lands in
/// the test set when its final booking falls after `split_year`.
///
/// Labels: the final booking qualifies when it occurs within
/// [`LABEL_WINDOW_YEARS`] of the last history booking; task `any` labels a
/// qualifying final booking 1, task `levelN` additionally requires the final
/// booking's crime level to be N.
pub fn build_sequences(
    records: &[SuspectRecord],
    task: Task,
    split_year: f64,
) -> Result<(Dataset, Dataset)> {
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut sorted: Vec<&SuspectRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.person_id.cmp(&b.person_id));

    for record in sorted {
        let Some(sample) = build_sample(record, task)? else {
            continue;
        };
        if sample.final_time > split_year {
            test.push(sample);
        } else {
            train.push(sample);
        }
    }
    Ok((
        Dataset::new(task, Split::Train, train),
        Dataset::new(task, Split::Test, test),
    ))
}

fn build_sample(record: &SuspectRecord, task: Task) -> Result<Option<SequenceSample>> {
    let n = record.bookings.len();
    if n < 2 {
        return Ok(None);
    }
    for pair in record.bookings.windows(2) {
        if pair[0].time_offset >= pair[1].time_offset {
            return Err(Error::Invalid(format!(
                "person {} has non-increasing booking times",
                record.person_id
            )));
        }
    }
    let history = &record.bookings[..n - 1];
    let final_booking = &record.bookings[n - 1];

    // most recent HISTORY_STEPS bookings, oldest first
    let kept_start = history.len().saturating_sub(HISTORY_STEPS);
    let kept = &history[kept_start..];

    let mut steps = Vec::with_capacity(HISTORY_STEPS);
    let mut cum = [0usize; 3];
    // cumulative counts run over the whole life history, including any
    // truncated prefix
    for b in &history[..kept_start] {
        cum[(b.level - 1) as usize] += 1;
    }
    for (j, b) in kept.iter().enumerate() {
        let mut step = vec![0.0; schema::STEP_FEATURES];
        cum[(b.level - 1) as usize] += 1;
        step[STEP_AGE] = b.age as f64;
        step[STEP_LEVEL] = b.level as f64;
        step[STEP_NCIC + b.ncic] = 1.0;
        let global_index = kept_start + j;
        step[STEP_GAP] = if global_index == 0 {
            0.0
        } else {
            b.time_offset - history[global_index - 1].time_offset
        };
        for l in 0..3 {
            step[STEP_CUM_LEVEL + l] = cum[l] as f64;
        }
        steps.push(step);
    }
    while steps.len() < HISTORY_STEPS {
        let mut pad = vec![0.0; schema::STEP_FEATURES];
        pad[STEP_PADDING] = 1.0;
        steps.push(pad);
    }

    let mut statics = vec![0.0; STATIC_FEATURES];
    statics[STATIC_RACE + record.race.index()] = 1.0;
    statics[STATIC_NUM_BOOKINGS] = history.len() as f64;
    statics[STATIC_AGE_AVG] =
        history.iter().map(|b| b.age as f64).sum::<f64>() / history.len() as f64;
    let mut counts = [0usize; 3];
    for b in history {
        counts[(b.level - 1) as usize] += 1;
    }
    for l in 0..3 {
        statics[STATIC_COUNT_LEVEL + l] = counts[l] as f64;
    }
    let gaps: Vec<f64> = history
        .windows(2)
        .map(|p| p[1].time_offset - p[0].time_offset)
        .collect();
    statics[STATIC_TIME_SINCE_LAST] = gaps.last().copied().unwrap_or(0.0);
    statics[STATIC_GAP_VARIANCE] = variance(&gaps);

    let final_gap = final_booking.time_offset - history.last().unwrap().time_offset;
    let final_in_window = final_gap <= LABEL_WINDOW_YEARS;
    let label = match task.level() {
        None => final_in_window,
        Some(level) => final_in_window && final_booking.level == level,
    };

    Ok(Some(SequenceSample {
        person_id: record.person_id.clone(),
        steps,
        static_features: statics,
        label: label as u8,
        task,
        final_level: final_booking.level,
        final_in_window,
        final_time: final_booking.time_offset,
    }))
}

fn variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64
}

/// Split a training dataset into fit/validation parts, validation being the
/// samples whose final booking falls in the last `fraction` of the observed
/// training time span. Falls back to a count-based tail split (by time) when
/// the time window would leave either side empty.
pub fn temporal_validation_split(ds: &Dataset, fraction: f64) -> (Dataset, Dataset) {
    assert!((0.0..1.0).contains(&fraction) && fraction > 0.0);
    let max_t = ds
        .samples
        .iter()
        .map(|s| s.final_time)
        .fold(f64::NEG_INFINITY, f64::max);
    let min_t = ds
        .samples
        .iter()
        .map(|s| s.final_time)
        .fold(f64::INFINITY, f64::min);
    let cut = max_t - (max_t - min_t) * fraction;
    let (mut fit, mut valid): (Vec<_>, Vec<_>) =
        ds.samples.iter().cloned().partition(|s| s.final_time <= cut);
    if fit.is_empty() || valid.is_empty() {
        let mut all = ds.samples.clone();
        all.sort_by(|a, b| a.final_time.total_cmp(&b.final_time).then(a.person_id.cmp(&b.person_id)));
        let take = ((all.len() as f64 * (1.0 - fraction)).round() as usize)
            .clamp(1, all.len().saturating_sub(1).max(1));
        valid = all.split_off(take);
        fit = all;
    }
    (
        Dataset::new(ds.task, ds.split, fit),
        Dataset::new(ds.task, ds.split, valid),
    )
}

/// Re-derive a record's final-gap label directly from bookings; used by
/// calibration checks.
pub fn record_recurs(record: &SuspectRecord) -> Option<(bool, u8)> {
    let n = record.bookings.len();
    if n < 2 {
        return None;
    }
    let gap = record.bookings[n - 1].time_offset - record.bookings[n - 2].time_offset;
    Some((gap <= LABEL_WINDOW_YEARS, record.bookings[n - 1].level))
}
