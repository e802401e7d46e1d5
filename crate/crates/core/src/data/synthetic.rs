use rand::prelude::*;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{Error, Result};
use crate::rng::{seeded, sub_seed};

use super::schema::{Race, NCIC_CATEGORIES};
use super::types::{Booking, SuspectRecord};

/// Hard ceiling on the combined level rates; beyond this the recurrence
/// mechanism cannot realise the targets.
pub const ANY_RATE_CAP: f64 = 0.95;

/// Synthetic booking-history generator.
///
/// Each suspect gets a latent recurrence period `tau` from one of two
/// behaviour groups (frequent or infrequent); inter-booking gaps are
/// `tau * exp(sigma * Z)`, so a history is quasi-periodic and the period is
/// recoverable from the observed gaps. A suspect's label events emerge from
/// the data itself: the final gap falls inside the label window roughly
/// whenever the suspect is frequent-type. Crime levels follow a
/// persistence-biased Markov chain (Metropolis over a distance-decaying
/// proposal), so a suspect tends to stay at or near their current level.
/// Race and age are sampled independently of everything label-relevant.
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub suspects: usize,
    /// Target positive rates for the level1/level2/level3 tasks.
    pub target_level_rates: [f64; 3],
    /// Length of the observation period in years.
    pub years: f64,
    /// Label horizon: a final booking within this many years of the end of
    /// the history counts as a recurrence.
    pub label_window: f64,
    pub max_bookings: usize,
    /// Fraction of suspects with a single booking (dropped at sequence
    /// construction, kept here so ingestion paths see them).
    pub singleton_rate: f64,
    pub frequent_tau: (f64, f64),
    pub infrequent_tau: (f64, f64),
    /// Lognormal sigma of the gap jitter around tau.
    pub gap_jitter_sigma: f64,
    /// P(final gap <= label_window) per behaviour group, precomputed by
    /// quadrature from (tau range, sigma, window). These defaults belong to
    /// the default ranges above; adjust them together.
    pub frequent_hit_rate: f64,
    pub infrequent_hit_rate: f64,
    /// Race sampling weights for W/A/U/B/I.
    pub race_weights: [f64; 5],
}

impl Default for GeneratorConfig {
    fn default() -> GeneratorConfig {
        GeneratorConfig {
            suspects: 17_335,
            target_level_rates: [0.067, 0.035, 0.087],
            years: 20.0,
            label_window: 2.0,
            max_bookings: 13,
            singleton_rate: 0.10,
            frequent_tau: (0.5, 1.6),
            infrequent_tau: (3.0, 7.0),
            gap_jitter_sigma: 0.30,
            frequent_hit_rate: 0.9497,
            infrequent_hit_rate: 0.0104,
            race_weights: [0.33, 0.06, 0.17, 0.38, 0.06],
        }
    }
}

pub(crate) struct Calibration {
    pub p_frequent: f64,
    /// Stationary level distribution (targets normalised by the any-rate).
    pub level_dist: [f64; 3],
    pub transitions: [[f64; 3]; 3],
}

impl GeneratorConfig {
    pub fn any_rate(&self) -> f64 {
        self.target_level_rates.iter().sum()
    }

    pub(crate) fn calibrate(&self) -> Result<Calibration> {
        if self.suspects == 0 {
            return Err(Error::Config("suspect count must be at least 1".into()));
        }
        for r in self.target_level_rates {
            if !(0.0..1.0).contains(&r) || r == 0.0 {
                return Err(Error::InfeasibleRates(format!(
                    "level rate {r} outside (0, 1)"
                )));
            }
        }
        let any = self.any_rate();
        if any >= ANY_RATE_CAP {
            return Err(Error::InfeasibleRates(format!(
                "combined level rates {any:.3} exceed the {ANY_RATE_CAP} cap"
            )));
        }
        let p_frequent = (any - self.infrequent_hit_rate)
            / (self.frequent_hit_rate - self.infrequent_hit_rate);
        if !(0.0..=1.0).contains(&p_frequent) {
            return Err(Error::InfeasibleRates(format!(
                "any-rate {any:.3} is outside what the behaviour groups can produce \
                 (p_frequent = {p_frequent:.3})"
            )));
        }
        let level_dist = [
            self.target_level_rates[0] / any,
            self.target_level_rates[1] / any,
            self.target_level_rates[2] / any,
        ];
        let transitions = level_transitions(level_dist)?;
        Ok(Calibration {
            p_frequent,
            level_dist,
            transitions,
        })
    }
}

/// Metropolis chain over levels with a distance-decaying proposal
/// (q=0.28 one step, q=0.12 two steps): stationary distribution is exactly
/// `pi`, and each row keeps stay > one-step > two-step.
fn level_transitions(pi: [f64; 3]) -> Result<[[f64; 3]; 3]> {
    const Q1: f64 = 0.28;
    const Q2: f64 = 0.12;
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        let mut stay = 1.0;
        for j in 0..3 {
            if i == j {
                continue;
            }
            let q = if i.abs_diff(j) == 1 { Q1 } else { Q2 };
            let p = q * (pi[j] / pi[i]).min(1.0);
            m[i][j] = p;
            stay -= p;
        }
        m[i][i] = stay;
    }
    for i in 0..3 {
        for j in 0..3 {
            if i != j && m[i][i] <= m[i][j] {
                return Err(Error::InfeasibleRates(format!(
                    "level rates too skewed for a persistence-biased chain \
                     (row {i}: stay {:.3} <= move {:.3})",
                    m[i][i], m[i][j]
                )));
            }
            if i != j && i.abs_diff(j) == 2 {
                let near = m[i][3 - i - j]; // the remaining (distance-1) column
                if near <= m[i][j] {
                    return Err(Error::InfeasibleRates(
                        "level rates break the one-step > two-step ordering".into(),
                    ));
                }
            }
        }
    }
    Ok(m)
}

fn sample_index(weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut draw = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        draw -= w;
        if draw <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// Deterministic for a fixed (config, seed): each suspect derives its own
/// sub-seeded stream, so generation order is immaterial.
pub fn generate_synthetic(cfg: &GeneratorConfig, seed: u64) -> Result<Vec<SuspectRecord>> {
    let cal = cfg.calibrate()?;
    let mut records = Vec::with_capacity(cfg.suspects);
    for idx in 0..cfg.suspects {
        records.push(generate_suspect(cfg, &cal, idx, sub_seed(seed, idx as u64)));
    }
    Ok(records)
}

fn generate_suspect(
    cfg: &GeneratorConfig,
    cal: &Calibration,
    index: usize,
    seed: u64,
) -> SuspectRecord {
    let mut rng = seeded(seed);
    let person_id = format!("P{:06}", index + 1);

    // identifiers: independent of everything label-relevant by construction
    let race = Race::ALL[sample_index(&cfg.race_weights, &mut rng)];
    let age_first: u32 = rng.random_range(14..=55);

    let singleton = rng.random::<f64>() < cfg.singleton_rate;
    let frequent = rng.random::<f64>() < cal.p_frequent;
    let (lo, hi) = if frequent {
        cfg.frequent_tau
    } else {
        cfg.infrequent_tau
    };
    let tau = rng.random_range(lo..hi);

    let count = if singleton {
        1
    } else {
        // overlap the group count ranges so booking volume alone is a weak
        // signal; the span cap is physical (long periods cannot fit many
        // bookings in the observation window)
        let extra = Poisson::new(1.6).unwrap().sample(&mut rng) as usize;
        let mean_gap = tau * (cfg.gap_jitter_sigma * cfg.gap_jitter_sigma / 2.0).exp();
        let span_cap = 1 + ((cfg.years - 1.0) / mean_gap) as usize;
        (2 + extra).min(cfg.max_bookings).min(span_cap.max(2))
    };

    let jitter = Normal::new(0.0, cfg.gap_jitter_sigma).unwrap();
    let budget = cfg.years - 0.4;
    let mut gaps: Vec<f64> = Vec::new();
    for attempt in 0..8 {
        gaps = (1..count)
            .map(|_| (tau * (jitter.sample(&mut rng)).exp()).max(0.02))
            .collect();
        let span: f64 = gaps.iter().sum();
        if span <= budget || attempt == 7 {
            if span > budget {
                let scale = budget / span;
                for g in &mut gaps {
                    *g *= scale;
                }
            }
            break;
        }
    }
    let span: f64 = gaps.iter().sum();
    let first_time = rng.random_range(0.0..(cfg.years - span).max(1e-9));

    let mut level = sample_index(&cal.level_dist, &mut rng);
    let mut bookings = Vec::with_capacity(count);
    let mut t = first_time;
    for k in 0..count {
        if k > 0 {
            t += gaps[k - 1];
            level = sample_index(&cal.transitions[level], &mut rng);
        }
        bookings.push(Booking {
            age: age_first + (t - first_time).round() as u32,
            level: (level + 1) as u8,
            ncic: rng.random_range(0..NCIC_CATEGORIES.len()),
            time_offset: t,
        });
    }

    SuspectRecord {
        person_id,
        race,
        bookings,
    }
}
