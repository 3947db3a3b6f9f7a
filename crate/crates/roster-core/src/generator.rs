//! Synthetic instance generator.
//!
//! Demand is derived from a planted schedule (one random feasible pattern
//! per nurse) scaled by a tightness factor, so every generated instance is
//! guaranteed to admit at least one feasible solution.

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ensure_valid, pattern_feasible, Instance, Nurse, ShiftPattern, SLOTS};
use crate::schedule::{coverage, Schedule};

/// Generation policy and knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub nurses: u32,
    pub grades: u32,
    /// Day-shift counts to enumerate patterns for (choose D of 7 days).
    pub day_lengths: Vec<u32>,
    /// Night-shift counts to enumerate patterns for (choose N of 7 nights).
    pub night_lengths: Vec<u32>,
    /// Fraction of night-contract nurses.
    pub night_fraction: f64,
    /// Fraction of combined-contract nurses.
    pub combined_fraction: f64,
    /// Demand as a fraction of the planted schedule's coverage, in (0, 1].
    pub tightness: f64,
    /// Preference costs are drawn uniformly from this integer range.
    pub cost_min: u32,
    pub cost_max: u32,
    pub seed: u64,
    /// Instance name; derived from the parameters when absent.
    pub name: Option<String>,
}

impl GenSpec {
    pub fn new(nurses: u32, grades: u32, seed: u64) -> Self {
        GenSpec {
            nurses,
            grades,
            day_lengths: vec![4, 5],
            night_lengths: vec![3, 4],
            night_fraction: 0.3,
            combined_fraction: 0.1,
            tightness: 0.9,
            cost_min: 0,
            cost_max: 100,
            seed,
            name: None,
        }
    }

    /// Full ward-scale policy: every day and night pattern length, giving
    /// a catalog in the several-hundreds.
    pub fn ward_scale(seed: u64) -> Self {
        GenSpec {
            day_lengths: (1..=7).collect(),
            night_lengths: (1..=7).collect(),
            ..GenSpec::new(30, 3, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nurses < 1 {
            return Err(Error::invalid_argument("nurse count must be at least 1"));
        }
        if self.grades < 1 {
            return Err(Error::invalid_argument("grade count must be at least 1"));
        }
        if !self.tightness.is_finite() || self.tightness <= 0.0 || self.tightness > 1.0 {
            return Err(Error::invalid_argument(format!(
                "tightness {} must be in (0, 1]",
                self.tightness
            )));
        }
        for f in [self.night_fraction, self.combined_fraction] {
            if !f.is_finite() || f < 0.0 {
                return Err(Error::invalid_argument("contract fractions must be >= 0"));
            }
        }
        if self.night_fraction + self.combined_fraction > 1.0 {
            return Err(Error::invalid_argument("contract fractions must sum to at most 1"));
        }
        if self.cost_min > self.cost_max || self.cost_max > 100 {
            return Err(Error::invalid_argument(format!(
                "cost bounds {}..={} must lie within 0..=100",
                self.cost_min, self.cost_max
            )));
        }
        if self.day_lengths.iter().chain(&self.night_lengths).any(|&l| !(1..=7).contains(&l)) {
            return Err(Error::invalid_argument("pattern lengths must be in 1..=7"));
        }
        if self.day_lengths.is_empty() && self.night_lengths.is_empty() {
            return Err(Error::invalid_argument("pattern policy enumerates no patterns"));
        }
        Ok(())
    }

    fn derived_name(&self) -> String {
        match &self.name {
            Some(name) => name.clone(),
            None => format!(
                "synth-n{}-p{}-t{}-s{}",
                self.nurses, self.grades, self.tightness, self.seed
            ),
        }
    }
}

/// A generated instance together with its hidden feasible schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub instance: Instance,
    /// The planted schedule; feasible by construction, not serialized.
    pub planted: Schedule,
}

/// Enumerate the pattern catalog of a policy: all C(7, D) day patterns for
/// each configured day length, then all C(7, N) night patterns, duplicates
/// removed, ids assigned in generation order.
pub fn pattern_catalog(spec: &GenSpec) -> Vec<ShiftPattern> {
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut patterns = Vec::new();
    let mut emit = |cover: Vec<u8>, patterns: &mut Vec<ShiftPattern>| {
        if seen.insert(cover.clone()) {
            patterns.push(ShiftPattern {
                id: patterns.len() as u32 + 1,
                cover,
            });
        }
    };

    for &length in &spec.day_lengths {
        for mask in 0u32..(1 << 7) {
            if mask.count_ones() == length {
                emit(cover_from_mask(mask, 0), &mut patterns);
            }
        }
    }
    for &length in &spec.night_lengths {
        for mask in 0u32..(1 << 7) {
            if mask.count_ones() == length {
                emit(cover_from_mask(mask, 7), &mut patterns);
            }
        }
    }
    patterns
}

/// Generate an instance. Deterministic given the spec (including its seed).
pub fn generate(spec: &GenSpec) -> Result<Generated> {
    spec.validate()?;
    let patterns = pattern_catalog(spec);
    if patterns.is_empty() {
        return Err(Error::Generation("pattern policy enumerates no patterns".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let m = patterns.len();

    let mut nurses = Vec::with_capacity(spec.nurses as usize);
    for id in 1..=spec.nurses {
        let grade = draw_grade(spec.grades, &mut rng);
        let roll: f64 = rng.gen();
        let (days, nights, both) = if roll < spec.night_fraction {
            if spec.night_lengths.is_empty() {
                return Err(Error::Generation(format!(
                    "nurse {id} drew a night contract but the policy has no night patterns"
                )));
            }
            (0, pick(&spec.night_lengths, &mut rng), 0)
        } else if roll < spec.night_fraction + spec.combined_fraction {
            let lengths = combined_pool(spec);
            (0, 0, pick(&lengths, &mut rng))
        } else {
            if spec.day_lengths.is_empty() {
                return Err(Error::Generation(format!(
                    "nurse {id} drew a day contract but the policy has no day patterns"
                )));
            }
            (pick(&spec.day_lengths, &mut rng), 0, 0)
        };
        let pref_cost = (0..m)
            .map(|_| rng.gen_range(spec.cost_min..=spec.cost_max) as f64)
            .collect();
        nurses.push(Nurse {
            id,
            grade,
            days,
            nights,
            both,
            pref_cost,
        });
    }

    // Plant one feasible pattern per nurse.
    let mut planted = Vec::with_capacity(nurses.len());
    for nurse in &nurses {
        let candidates: Vec<u32> = patterns
            .iter()
            .filter(|pat| pattern_feasible(nurse, pat))
            .map(|pat| pat.id)
            .collect();
        if candidates.is_empty() {
            return Err(Error::Generation(format!(
                "nurse {} has no feasible pattern under the policy",
                nurse.id
            )));
        }
        planted.push(candidates[rng.gen_range(0..candidates.len())]);
    }
    let planted = Schedule::new(planted);

    let mut instance = Instance {
        name: spec.derived_name(),
        grades: spec.grades,
        patterns,
        nurses,
        demand: vec![vec![0; spec.grades as usize]; SLOTS],
    };

    // Demand: the planted coverage scaled down by the tightness and
    // rounded down, so a fractional tightness yields real slack even at
    // small per-cell counts. Scaling a band-monotone tally keeps the
    // demand band-monotone, and demand never exceeds planted coverage,
    // so the planted schedule stays feasible.
    let tally = coverage(&instance, &planted)?;
    for slot in 0..SLOTS {
        for band in 1..=spec.grades {
            instance.demand[slot][(band - 1) as usize] =
                (spec.tightness * tally.get(slot, band) as f64).floor() as u32;
        }
    }

    ensure_valid(&instance)?;
    Ok(Generated { instance, planted })
}

fn cover_from_mask(mask: u32, offset: usize) -> Vec<u8> {
    let mut cover = vec![0u8; SLOTS];
    for bit in 0..7 {
        if mask & (1 << bit) != 0 {
            cover[offset + bit] = 1;
        }
    }
    cover
}

fn draw_grade(grades: u32, rng: &mut ChaCha8Rng) -> u32 {
    if grades == 3 {
        // Hospital-pyramid default: 20% / 30% / 50%.
        let roll: f64 = rng.gen();
        if roll < 0.2 {
            1
        } else if roll < 0.5 {
            2
        } else {
            3
        }
    } else {
        rng.gen_range(1..=grades)
    }
}

fn pick(values: &[u32], rng: &mut ChaCha8Rng) -> u32 {
    values[rng.gen_range(0..values.len())]
}

/// Lengths a combined contract can take: any total that exists in the
/// catalog, i.e. the union of configured day and night lengths.
fn combined_pool(spec: &GenSpec) -> Vec<u32> {
    let mut pool: Vec<u32> = spec
        .day_lengths
        .iter()
        .chain(&spec.night_lengths)
        .copied()
        .collect();
    pool.sort_unstable();
    pool.dedup();
    pool
}
