//! Booking CSV schema: one row per booking, header
//! `person_id,race,age,level,ncic,time_offset`. Rows of one person may be
//! interleaved; ingestion groups by id and sorts by time.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

use super::schema::{ncic_index, Race, NCIC_CATEGORIES};
use super::types::{Booking, SuspectRecord};

pub const CSV_HEADER: [&str; 6] = ["person_id", "race", "age", "level", "ncic", "time_offset"];

pub fn save_csv(records: &[SuspectRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(Error::Csv)?;
    w.write_record(CSV_HEADER)?;
    for r in records {
        for b in &r.bookings {
            w.write_record([
                r.person_id.as_str(),
                r.race.as_str(),
                &b.age.to_string(),
                &b.level.to_string(),
                NCIC_CATEGORIES[b.ncic],
                &b.time_offset.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn row_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::CsvRow {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Parse and validate a booking CSV. Records come back sorted by person id
/// with bookings sorted by time offset; ties in time within one person are
/// rejected (histories must be strictly ordered).
pub fn load_csv(path: &Path) -> Result<Vec<SuspectRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(Error::Csv)?;
    {
        let headers = reader.headers()?;
        if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(row_err(
                path,
                1,
                format!("unexpected header `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            ));
        }
    }

    let mut grouped: BTreeMap<String, (Race, Vec<Booking>)> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or_default();
        if record.len() != CSV_HEADER.len() {
            return Err(row_err(path, line, format!("{} fields, expected 6", record.len())));
        }
        let person_id = record[0].to_string();
        if person_id.is_empty() {
            return Err(row_err(path, line, "empty person_id"));
        }
        let race: Race = record[1]
            .parse()
            .map_err(|e: Error| row_err(path, line, e.to_string()))?;
        let age: u32 = record[2]
            .parse()
            .map_err(|_| row_err(path, line, format!("bad age `{}`", &record[2])))?;
        if age < 10 {
            return Err(row_err(path, line, format!("age {age} below 10")));
        }
        let level: u8 = record[3]
            .parse()
            .map_err(|_| row_err(path, line, format!("bad level `{}`", &record[3])))?;
        if !(1..=3).contains(&level) {
            return Err(row_err(path, line, format!("level {level} outside 1..=3")));
        }
        let ncic = ncic_index(&record[4]).map_err(|e| row_err(path, line, e.to_string()))?;
        let time_offset: f64 = record[5]
            .parse()
            .map_err(|_| row_err(path, line, format!("bad time_offset `{}`", &record[5])))?;
        if !time_offset.is_finite() || time_offset < 0.0 {
            return Err(row_err(path, line, format!("time_offset {time_offset} invalid")));
        }

        let entry = grouped.entry(person_id.clone()).or_insert((race, Vec::new()));
        if entry.0 != race {
            return Err(row_err(
                path,
                line,
                format!("person {person_id} has conflicting race codes"),
            ));
        }
        entry.1.push(Booking {
            age,
            level,
            ncic,
            time_offset,
        });
    }

    let mut records = Vec::with_capacity(grouped.len());
    for (person_id, (race, mut bookings)) in grouped {
        bookings.sort_by(|a, b| a.time_offset.total_cmp(&b.time_offset));
        for pair in bookings.windows(2) {
            if pair[0].time_offset >= pair[1].time_offset {
                return Err(Error::Invalid(format!(
                    "person {person_id} has non-increasing booking times at {}",
                    pair[1].time_offset
                )));
            }
        }
        records.push(SuspectRecord {
            person_id,
            race,
            bookings,
        });
    }
    Ok(records)
}
