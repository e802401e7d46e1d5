use std::io::Write;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::schema::{self, Race};
use super::*;
use crate::error::Error;

fn booking(age: u32, level: u8, ncic: usize, t: f64) -> Booking {
    Booking {
        age,
        level,
        ncic,
        time_offset: t,
    }
}

fn fixture_suspect() -> SuspectRecord {
    SuspectRecord {
        person_id: "P000042".into(),
        race: Race::B,
        bookings: vec![
            booking(20, 2, 0, 1.0),
            booking(21, 1, 3, 2.5),
            booking(22, 2, 5, 3.0),
            booking(24, 3, 9, 5.0),
            booking(25, 1, 1, 6.5),
        ],
    }
}

// ---- sequence construction ----------------------------------------------

#[test]
fn suspects_with_one_booking_contribute_no_sample() {
    let records = vec![SuspectRecord {
        person_id: "P1".into(),
        race: Race::W,
        bookings: vec![booking(30, 1, 0, 4.0)],
    }];
    let (train, test) = build_sequences(&records, Task::Any, 18.0).unwrap();
    assert_eq!(train.len() + test.len(), 0);
}

#[test]
fn thirteen_bookings_fill_all_steps_without_padding() {
    let bookings: Vec<Booking> = (0..13)
        .map(|i| booking(20 + i as u32, 1 + (i % 3) as u8, i % 10, i as f64 * 1.2))
        .collect();
    let records = vec![SuspectRecord {
        person_id: "P1".into(),
        race: Race::A,
        bookings,
    }];
    let (train, test) = build_sequences(&records, Task::Any, 18.0).unwrap();
    let sample = train.samples.iter().chain(&test.samples).next().unwrap();
    assert_eq!(sample.history_len(), 12);
    assert!(sample
        .steps
        .iter()
        .all(|s| s[schema::STEP_PADDING] == 0.0));
    // label booking is the 13th
    assert_eq!(sample.final_level, 1 + (12 % 3) as u8);
}

#[test]
fn five_booking_fixture_matches_hand_constructed_features() {
    let (train, test) = build_sequences(&[fixture_suspect()], Task::Any, 18.0).unwrap();
    assert_eq!(test.len(), 0);
    assert_eq!(train.len(), 1);
    let s = &train.samples[0];

    // 4 history steps, 8 padded
    assert_eq!(s.history_len(), 4);
    for (i, step) in s.steps.iter().enumerate() {
        let expect_pad = if i < 4 { 0.0 } else { 1.0 };
        assert_eq!(step[schema::STEP_PADDING], expect_pad, "step {i}");
        if i >= 4 {
            assert!(step[..schema::STEP_PADDING].iter().all(|v| *v == 0.0));
        }
    }

    // step 0: first booking, no predecessor
    assert_eq!(s.steps[0][schema::STEP_AGE], 20.0);
    assert_eq!(s.steps[0][schema::STEP_LEVEL], 2.0);
    assert_eq!(s.steps[0][schema::STEP_NCIC], 1.0);
    assert_eq!(s.steps[0][schema::STEP_GAP], 0.0);
    assert_eq!(
        &s.steps[0][schema::STEP_CUM_LEVEL..schema::STEP_CUM_LEVEL + 3],
        &[0.0, 1.0, 0.0]
    );
    // step 1: gap 1.5, cumulative counts include it
    assert_eq!(s.steps[1][schema::STEP_GAP], 1.5);
    assert_eq!(
        &s.steps[1][schema::STEP_CUM_LEVEL..schema::STEP_CUM_LEVEL + 3],
        &[1.0, 1.0, 0.0]
    );
    // step 3: levels so far [2,1,2,3]
    assert_eq!(
        &s.steps[3][schema::STEP_CUM_LEVEL..schema::STEP_CUM_LEVEL + 3],
        &[1.0, 2.0, 1.0]
    );

    // statics
    let st = &s.static_features;
    assert_eq!(st[schema::STATIC_RACE + Race::B.index()], 1.0);
    assert_eq!(st[schema::STATIC_NUM_BOOKINGS], 4.0);
    assert!((st[schema::STATIC_AGE_AVG] - (20.0 + 21.0 + 22.0 + 24.0) / 4.0).abs() < 1e-12);
    assert_eq!(
        &st[schema::STATIC_COUNT_LEVEL..schema::STATIC_COUNT_LEVEL + 3],
        &[1.0, 2.0, 1.0]
    );
    assert!((st[schema::STATIC_TIME_SINCE_LAST] - 2.0).abs() < 1e-12);
    let gaps = [1.5, 0.5, 2.0];
    let mean: f64 = gaps.iter().sum::<f64>() / 3.0;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / 3.0;
    assert!((st[schema::STATIC_GAP_VARIANCE] - var).abs() < 1e-12);

    // final booking at 6.5, gap 1.5 <= 2 years, level 1
    assert_eq!(s.label, 1);
    assert!(s.final_in_window);
    assert_eq!(s.final_level, 1);
    assert_eq!(s.final_time, 6.5);
}

#[test]
fn level_task_labels_require_matching_final_level() {
    let records = vec![fixture_suspect()];
    let (l1, _) = build_sequences(&records, Task::Level1, 18.0).unwrap();
    let (l2, _) = build_sequences(&records, Task::Level2, 18.0).unwrap();
    assert_eq!(l1.samples[0].label, 1); // final level is 1, in window
    assert_eq!(l2.samples[0].label, 0);
}

#[test]
fn out_of_window_final_booking_is_negative_even_for_matching_level() {
    let mut rec = fixture_suspect();
    rec.bookings.last_mut().unwrap().time_offset = 9.5; // gap 4.5 > 2
    let (any, _) = build_sequences(&[rec.clone()], Task::Any, 18.0).unwrap();
    assert_eq!(any.samples[0].label, 0);
    assert!(!any.samples[0].final_in_window);
    let (l1, _) = build_sequences(&[rec], Task::Level1, 18.0).unwrap();
    assert_eq!(l1.samples[0].label, 0);
}

#[test]
fn empty_input_is_an_error() {
    assert!(matches!(
        build_sequences(&[], Task::Any, 18.0),
        Err(Error::EmptyDataset)
    ));
}

#[test]
fn split_assigns_late_final_bookings_to_test() {
    let mut late = fixture_suspect();
    late.person_id = "P000043".into();
    for b in &mut late.bookings {
        b.time_offset += 13.0; // final at 19.5
    }
    let (train, test) = build_sequences(&[fixture_suspect(), late], Task::Any, 18.0).unwrap();
    assert_eq!(train.len(), 1);
    assert_eq!(test.len(), 1);
    assert_eq!(test.samples[0].person_id, "P000043");
}

#[test]
fn build_is_order_independent_and_splits_are_disjoint() {
    let cfg = GeneratorConfig {
        suspects: 300,
        ..GeneratorConfig::default()
    };
    let records = generate_synthetic(&cfg, 99).unwrap();
    let mut reversed = records.clone();
    reversed.reverse();
    let (a_train, a_test) = build_sequences(&records, Task::Any, 18.0).unwrap();
    let (b_train, b_test) = build_sequences(&reversed, Task::Any, 18.0).unwrap();
    assert_eq!(a_train.samples, b_train.samples);
    assert_eq!(a_test.samples, b_test.samples);

    let train_ids: std::collections::HashSet<_> =
        a_train.samples.iter().map(|s| s.person_id.clone()).collect();
    assert!(a_test.samples.iter().all(|s| !train_ids.contains(&s.person_id)));

    // fixed flat feature count across all samples
    for s in a_train.samples.iter().chain(&a_test.samples) {
        assert_eq!(s.flatten().len(), TOTAL_FEATURES);
        assert_eq!(s.flatten_scaled().len(), TOTAL_FEATURES);
    }
}

// ---- generator -----------------------------------------------------------

#[test]
fn generation_is_deterministic_for_a_seed() {
    let cfg = GeneratorConfig {
        suspects: 200,
        ..GeneratorConfig::default()
    };
    let a = generate_synthetic(&cfg, 7).unwrap();
    let b = generate_synthetic(&cfg, 7).unwrap();
    assert_eq!(a, b);
    let c = generate_synthetic(&cfg, 8).unwrap();
    assert_ne!(a, c);
}

#[test]
fn generated_histories_are_well_formed() {
    let cfg = GeneratorConfig {
        suspects: 500,
        ..GeneratorConfig::default()
    };
    let records = generate_synthetic(&cfg, 3).unwrap();
    assert_eq!(records.len(), 500);
    let mut singletons = 0;
    for r in &records {
        assert!(!r.bookings.is_empty());
        assert!(r.bookings.len() <= cfg.max_bookings);
        if r.bookings.len() == 1 {
            singletons += 1;
        }
        for b in &r.bookings {
            assert!(b.age >= 10);
            assert!((1..=3).contains(&b.level));
            assert!(b.ncic < 10);
            assert!(b.time_offset >= 0.0 && b.time_offset <= cfg.years);
        }
        for pair in r.bookings.windows(2) {
            assert!(pair[0].time_offset < pair[1].time_offset);
        }
    }
    assert!(singletons > 20 && singletons < 90, "singletons {singletons}");
}

#[test]
fn rates_land_near_targets_at_moderate_scale() {
    let cfg = GeneratorConfig {
        suspects: 6000,
        ..GeneratorConfig::default()
    };
    let records = generate_synthetic(&cfg, 42).unwrap();
    let mut n = 0usize;
    let mut pos = [0usize; 3];
    for r in &records {
        if let Some((recurs, level)) = record_recurs(r) {
            n += 1;
            if recurs {
                pos[(level - 1) as usize] += 1;
            }
        }
    }
    for (i, target) in cfg.target_level_rates.iter().enumerate() {
        let rate = pos[i] as f64 / n as f64;
        assert!(
            (rate - target).abs() < 0.025,
            "level {} rate {rate:.4} vs target {target}",
            i + 1
        );
    }
}

#[test]
fn infeasible_rates_are_rejected() {
    let mut cfg = GeneratorConfig::default();
    cfg.target_level_rates = [0.5, 0.3, 0.2];
    assert!(matches!(
        generate_synthetic(&cfg, 1),
        Err(Error::InfeasibleRates(_))
    ));
    let mut cfg = GeneratorConfig::default();
    cfg.target_level_rates = [0.0, 0.1, 0.1];
    assert!(generate_synthetic(&cfg, 1).is_err());
}

#[test]
fn race_and_label_are_independent_by_construction() {
    let cfg = GeneratorConfig {
        suspects: 10_000,
        ..GeneratorConfig::default()
    };
    let records = generate_synthetic(&cfg, 13).unwrap();
    // 5x2 contingency of race vs any-recurrence over multi-booking suspects
    let mut table = [[0.0f64; 2]; 5];
    for r in &records {
        if let Some((recurs, _)) = record_recurs(r) {
            table[r.race.index()][recurs as usize] += 1.0;
        }
    }
    let total: f64 = table.iter().flatten().sum();
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<f64> = (0..2).map(|c| table.iter().map(|r| r[c]).sum()).collect();
    let mut chi2 = 0.0;
    for i in 0..5 {
        for j in 0..2 {
            let expected = row_sums[i] * col_sums[j] / total;
            chi2 += (table[i][j] - expected).powi(2) / expected;
        }
    }
    let dof = (5 - 1) * (2 - 1);
    let p = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(chi2);
    assert!(p > 0.01, "chi2 {chi2:.2}, p {p:.4}");
}

// ---- csv ------------------------------------------------------------------

fn write_temp(name: &str, contents: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("chargeseq_test_{}_{name}", std::process::id()));
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    path
}

#[test]
fn csv_round_trip_preserves_records() {
    let cfg = GeneratorConfig {
        suspects: 120,
        ..GeneratorConfig::default()
    };
    let records = generate_synthetic(&cfg, 21).unwrap();
    let path = std::env::temp_dir().join(format!("chargeseq_roundtrip_{}.csv", std::process::id()));
    save_csv(&records, &path).unwrap();
    let loaded = load_csv(&path).unwrap();
    std::fs::remove_file(&path).ok();
    // loader sorts by person id; generator already emits sorted ids
    assert_eq!(records, loaded);
}

#[test]
fn two_row_file_builds_one_record() {
    let path = write_temp(
        "tworow.csv",
        "person_id,race,age,level,ncic,time_offset\nP1,W,30,1,ASSL,2.0\nP1,W,31,2,TO,3.5\n",
    );
    let records = load_csv(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].bookings.len(), 2);
    assert_eq!(records[0].bookings[1].level, 2);
}

#[test]
fn header_only_file_is_empty() {
    let path = write_temp("empty.csv", "person_id,race,age,level,ncic,time_offset\n");
    let records = load_csv(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(records.is_empty());
}

#[test]
fn unknown_race_is_rejected_with_line_number() {
    let path = write_temp(
        "badrace.csv",
        "person_id,race,age,level,ncic,time_offset\nP1,W,30,1,ASSL,2.0\nP2,X,30,1,ASSL,2.0\n",
    );
    let err = load_csv(&path).unwrap_err();
    std::fs::remove_file(&path).ok();
    let msg = err.to_string();
    assert!(msg.contains(":3:"), "line number missing in `{msg}`");
    assert!(msg.contains("race"), "{msg}");
}

#[test]
fn tied_booking_times_are_rejected() {
    let path = write_temp(
        "tied.csv",
        "person_id,race,age,level,ncic,time_offset\nP1,W,30,1,ASSL,2.0\nP1,W,31,2,TO,2.0\n",
    );
    let err = load_csv(&path).unwrap_err();
    std::fs::remove_file(&path).ok();
    assert!(err.to_string().contains("non-increasing"));
}

#[test]
fn unknown_ncic_is_rejected() {
    let path = write_temp(
        "badncic.csv",
        "person_id,race,age,level,ncic,time_offset\nP1,W,30,1,WAT,2.0\n",
    );
    assert!(load_csv(&path).is_err());
    std::fs::remove_file(&path).ok();
}

// ---- stats -----------------------------------------------------------------

#[test]
fn class_stats_all_row_matches_hand_counts() {
    let mut samples = Vec::new();
    for i in 0..10 {
        let mut rec = fixture_suspect();
        rec.person_id = format!("P{i:03}");
        if i >= 3 {
            rec.bookings.last_mut().unwrap().time_offset = 9.5; // negative
        }
        samples.push(rec);
    }
    let (train, _) = build_sequences(&samples, Task::Any, 18.0).unwrap();
    let table = class_stats(&train).unwrap();
    let all = &table.rows[0];
    assert_eq!(all.group, "All");
    assert_eq!(all.n, 10);
    assert!((all.yes_pct.unwrap() - 30.0).abs() < 1e-9);
    assert!((all.no_pct.unwrap() - 70.0).abs() < 1e-9);
}

#[test]
fn class_stats_rows_sum_to_one_hundred() {
    let cfg = GeneratorConfig {
        suspects: 2000,
        ..GeneratorConfig::default()
    };
    let records = generate_synthetic(&cfg, 5).unwrap();
    let (train, _) = build_sequences(&records, Task::Level3, 18.0).unwrap();
    let table = class_stats(&train).unwrap();
    for row in &table.rows {
        if let (Some(yes), Some(no)) = (row.yes_pct, row.no_pct) {
            assert!((yes + no - 100.0).abs() < 0.01, "{}: {yes} + {no}", row.group);
        }
    }
    // age buckets plus races plus the All row
    assert_eq!(table.rows.len(), 1 + 4 + 5);
}

// ---- jsonl ----------------------------------------------------------------

#[test]
fn dataset_jsonl_round_trip() {
    let cfg = GeneratorConfig {
        suspects: 50,
        ..GeneratorConfig::default()
    };
    let records = generate_synthetic(&cfg, 31).unwrap();
    let (train, _) = build_sequences(&records, Task::Any, 18.0).unwrap();
    let path = std::env::temp_dir().join(format!("chargeseq_ds_{}.jsonl", std::process::id()));
    train.write_jsonl(&path).unwrap();
    let loaded = Dataset::read_jsonl(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(loaded.task, train.task);
    assert_eq!(loaded.samples, train.samples);
}

#[test]
fn temporal_validation_split_respects_time_order() {
    let cfg = GeneratorConfig {
        suspects: 500,
        ..GeneratorConfig::default()
    };
    let records = generate_synthetic(&cfg, 77).unwrap();
    let (train, _) = build_sequences(&records, Task::Any, 18.0).unwrap();
    let (fit, valid) = temporal_validation_split(&train, 0.1);
    assert_eq!(fit.len() + valid.len(), train.len());
    assert!(!fit.is_empty() && !valid.is_empty());
    let fit_max = fit.samples.iter().map(|s| s.final_time).fold(f64::MIN, f64::max);
    let valid_min = valid.samples.iter().map(|s| s.final_time).fold(f64::MAX, f64::min);
    assert!(fit_max <= valid_min + 1e-9);
}
