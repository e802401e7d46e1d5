//! Fixed feature schema: layout, names, and model-input scaling.
//!
//! A sample is 12 booking steps of [`STEP_FEATURES`] values each, followed by
//! [`STATIC_FEATURES`] suspect-level values. Flattening in that order yields
//! [`TOTAL_FEATURES`] values whose positions are stable across the crate;
//! the importance reports rely on this ordering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const HISTORY_STEPS: usize = 12;

/// Per-step layout:
/// `[age, level, ncic one-hot x10, gap, cum_level1, cum_level2, cum_level3, padding]`
pub const STEP_FEATURES: usize = 17;

/// Static layout:
/// `[race one-hot x5, num_bookings, age_avg, count_level1, count_level2,
///   count_level3, time_since_last, gap_variance]`
pub const STATIC_FEATURES: usize = 12;

pub const TOTAL_FEATURES: usize = HISTORY_STEPS * STEP_FEATURES + STATIC_FEATURES;

pub const NCIC_CATEGORIES: [&str; 10] =
    ["ASSL", "TO", "DAD", "LARC", "FO", "PP", "BURG", "SV", "DP", "OP"];

// step-feature offsets
pub const STEP_AGE: usize = 0;
pub const STEP_LEVEL: usize = 1;
pub const STEP_NCIC: usize = 2; // ..12
pub const STEP_GAP: usize = 12;
pub const STEP_CUM_LEVEL: usize = 13; // ..16, one slot per level
pub const STEP_PADDING: usize = 16;

// static-feature offsets (relative to the static block)
pub const STATIC_RACE: usize = 0; // ..5
pub const STATIC_NUM_BOOKINGS: usize = 5;
pub const STATIC_AGE_AVG: usize = 6;
pub const STATIC_COUNT_LEVEL: usize = 7; // ..10
pub const STATIC_TIME_SINCE_LAST: usize = 10;
pub const STATIC_GAP_VARIANCE: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Race {
    W,
    A,
    U,
    B,
    I,
}

impl Race {
    pub const ALL: [Race; 5] = [Race::W, Race::A, Race::U, Race::B, Race::I];

    pub fn as_str(&self) -> &'static str {
        match self {
            Race::W => "W",
            Race::A => "A",
            Race::U => "U",
            Race::B => "B",
            Race::I => "I",
        }
    }

    pub fn index(&self) -> usize {
        Race::ALL.iter().position(|r| r == self).unwrap()
    }
}

impl std::str::FromStr for Race {
    type Err = Error;

    fn from_str(s: &str) -> Result<Race> {
        Race::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown race code `{s}`")))
    }
}

impl std::fmt::Display for Race {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn ncic_index(code: &str) -> Result<usize> {
    NCIC_CATEGORIES
        .iter()
        .position(|c| *c == code)
        .ok_or_else(|| Error::Invalid(format!("unknown ncic category `{code}`")))
}

/// Flat feature names in flatten order.
pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(TOTAL_FEATURES);
    for step in 1..=HISTORY_STEPS {
        names.push(format!("step{step:02}.age"));
        names.push(format!("step{step:02}.level"));
        for code in NCIC_CATEGORIES {
            names.push(format!("step{step:02}.ncic_{code}"));
        }
        names.push(format!("step{step:02}.gap"));
        for level in 1..=3 {
            names.push(format!("step{step:02}.cum_level{level}"));
        }
        names.push(format!("step{step:02}.padding"));
    }
    for race in Race::ALL {
        names.push(format!("static.race_{race}"));
    }
    names.push("static.num_bookings".into());
    names.push("static.age_avg".into());
    for level in 1..=3 {
        names.push(format!("static.count_level{level}"));
    }
    names.push("static.time_since_last".into());
    names.push("static.gap_variance".into());
    names
}

/// Fixed per-feature divisors applied to model inputs. Raw samples keep the
/// natural units; models divide by these so ages and counts land near the
/// unit scale the parameter initialisation expects. Data-independent, so no
/// state leaks into checkpoints.
pub fn feature_scales() -> Vec<f64> {
    let mut scales = Vec::with_capacity(TOTAL_FEATURES);
    for _ in 0..HISTORY_STEPS {
        let mut step = vec![1.0; STEP_FEATURES];
        step[STEP_AGE] = 50.0;
        step[STEP_LEVEL] = 3.0;
        step[STEP_GAP] = 5.0;
        for l in 0..3 {
            step[STEP_CUM_LEVEL + l] = 6.0;
        }
        scales.extend(step);
    }
    let mut stat = vec![1.0; STATIC_FEATURES];
    stat[STATIC_NUM_BOOKINGS] = 6.0;
    stat[STATIC_AGE_AVG] = 50.0;
    for l in 0..3 {
        stat[STATIC_COUNT_LEVEL + l] = 6.0;
    }
    stat[STATIC_TIME_SINCE_LAST] = 5.0;
    stat[STATIC_GAP_VARIANCE] = 10.0;
    scales.extend(stat);
    scales
}

/// Flat indices of the race and age identifier features (used by the
/// interpretability analyses).
pub fn identifier_feature_indices() -> (Vec<usize>, Vec<usize>) {
    let mut race = Vec::new();
    let mut age = Vec::new();
    for step in 0..HISTORY_STEPS {
        age.push(step * STEP_FEATURES + STEP_AGE);
    }
    let static_base = HISTORY_STEPS * STEP_FEATURES;
    for r in 0..5 {
        race.push(static_base + STATIC_RACE + r);
    }
    age.push(static_base + STATIC_AGE_AVG);
    (race, age)
}

/// Flat indices of the level-related features grouped by level 1..3:
/// per-step cumulative counts plus the static counts.
pub fn level_feature_indices() -> [Vec<usize>; 3] {
    let mut by_level: [Vec<usize>; 3] = Default::default();
    for step in 0..HISTORY_STEPS {
        for l in 0..3 {
            by_level[l].push(step * STEP_FEATURES + STEP_CUM_LEVEL + l);
        }
    }
    let static_base = HISTORY_STEPS * STEP_FEATURES;
    for l in 0..3 {
        by_level[l].push(static_base + STATIC_COUNT_LEVEL + l);
    }
    by_level
}
