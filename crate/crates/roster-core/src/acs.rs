//! Single-solution classifier-style search.
//!
//! Every (nurse, rule) node keeps a strength. Rule strings are drawn row
//! by row with roulette selection over strengths; after decoding, the
//! solution-level reward (positive if the solution beat the previous one,
//! negative otherwise) is shared equally across the n nodes that built it.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::rules::{DecodeParams, Decoder, RuleId, RuleString, RULE_COUNT};
use crate::schedule::{fitness, Schedule};
use crate::solver::{evaluate_seeded, IterationStats, SolverResult};

/// n×r positive strengths with a hard floor.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthMatrix {
    rows: Vec<[f64; RULE_COUNT]>,
    floor: f64,
}

impl StrengthMatrix {
    pub fn new(nurse_count: usize, initial: f64, floor: f64) -> Result<Self> {
        if !floor.is_finite() || floor <= 0.0 {
            return Err(Error::invalid_argument(format!("floor {floor} must be positive")));
        }
        if !initial.is_finite() || initial < floor {
            return Err(Error::invalid_argument(format!(
                "initial strength {initial} must be at least the floor {floor}"
            )));
        }
        Ok(StrengthMatrix {
            rows: vec![[initial; RULE_COUNT]; nurse_count],
            floor,
        })
    }

    pub fn nurse_count(&self) -> usize {
        self.rows.len()
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn get(&self, nurse_idx: usize, rule: RuleId) -> f64 {
        self.rows[nurse_idx][rule.index()]
    }

    pub fn rows(&self) -> &[[f64; RULE_COUNT]] {
        &self.rows
    }

    pub fn total(&self) -> f64 {
        self.rows.iter().flatten().sum()
    }

    /// Roulette-select one rule per nurse, each row independently.
    pub fn select_rules(&self, rng: &mut impl Rng) -> RuleString {
        RuleString::new(
            self.rows
                .iter()
                .map(|row| {
                    let dist = WeightedIndex::new(row).expect("strengths are positive");
                    RuleId::from_index(dist.sample(rng))
                })
                .collect(),
        )
    }

    /// Share `reward / n` across the string's nodes, adding on improvement
    /// and subtracting otherwise; entries clamp at the floor.
    pub fn update(&mut self, rs: &RuleString, improved: bool, reward: f64) -> Result<()> {
        if rs.len() != self.rows.len() {
            return Err(Error::invalid_argument(format!(
                "rule string of length {} for {} nurses",
                rs.len(),
                self.rows.len()
            )));
        }
        if !reward.is_finite() || reward <= 0.0 {
            return Err(Error::invalid_argument(format!("reward {reward} must be positive")));
        }
        if self.rows.is_empty() {
            return Ok(());
        }
        let share = reward / self.rows.len() as f64;
        let delta = if improved { share } else { -share };
        for (row, rule) in self.rows.iter_mut().zip(rs.iter()) {
            let cell = &mut row[rule.index()];
            *cell = (*cell + delta).max(self.floor);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcsParams {
    pub initial_strength: f64,
    pub reward: f64,
    /// Minimum strength; keeps every rule reachable.
    pub floor: f64,
    pub max_iterations: u32,
    pub seed: u64,
    pub decode: DecodeParams,
}

impl AcsParams {
    pub fn defaults(grades: u32) -> Self {
        AcsParams {
            initial_strength: 10.0,
            reward: 3.0,
            floor: 1.0,
            max_iterations: 5_000,
            seed: 0,
            decode: DecodeParams::for_grades(grades),
        }
    }

    pub fn validate(&self, grades: u32) -> Result<()> {
        if !self.floor.is_finite() || self.floor <= 0.0 {
            return Err(Error::invalid_argument("floor must be positive"));
        }
        if !self.initial_strength.is_finite() || self.initial_strength < self.floor {
            return Err(Error::invalid_argument("initial strength must be at least the floor"));
        }
        if !self.reward.is_finite() || self.reward <= 0.0 {
            return Err(Error::invalid_argument("reward must be positive"));
        }
        self.decode.validate(grades)
    }
}

/// Single-solution loop: decode a random initial string (rewarded as an
/// improvement), then repeatedly select rules by strength, decode, compare
/// against the previous iteration's fitness and share the reward. The best
/// solution seen is kept separately. Deterministic given the seed.
pub fn run_acs(inst: &Instance, params: &AcsParams) -> Result<SolverResult> {
    params.validate(inst.grades)?;
    let n = inst.nurse_count();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    if n == 0 {
        let sched = Schedule::new(vec![]);
        let fit = fitness(inst, &sched, params.decode.w_demand)?;
        return Ok(SolverResult {
            best_fitness: fit,
            best_schedule: sched,
            best_rules: RuleString::new(vec![]),
            history: vec![IterationStats { iteration: 0, best: fit, mean: fit }],
            evaluations: 1,
        });
    }

    let decoder = Decoder::new(inst)?;
    let mut strengths = StrengthMatrix::new(n, params.initial_strength, params.floor)?;
    let mut evals: u64 = 0;

    let rs = RuleString::uniform(n, &mut rng);
    let (sched, fit) = evaluate_seeded(&decoder, &params.decode, &rs)?;
    evals += 1;
    strengths.update(&rs, true, params.reward)?;

    let mut previous = fit;
    let mut best = (fit, sched, rs);
    let mut history = vec![IterationStats { iteration: 0, best: fit, mean: fit }];

    for t in 1..=params.max_iterations {
        let rs = strengths.select_rules(&mut rng);
        let (sched, fit) = evaluate_seeded(&decoder, &params.decode, &rs)?;
        evals += 1;

        // Strictly better than the previous iteration; ties do not count.
        let improved = fit < previous;
        strengths.update(&rs, improved, params.reward)?;

        if fit < best.0 {
            best = (fit, sched, rs);
        }
        previous = fit;
        history.push(IterationStats { iteration: t, best: best.0, mean: fit });
    }

    let (best_fitness, best_schedule, best_rules) = best;
    Ok(SolverResult {
        best_fitness,
        best_schedule,
        best_rules,
        history,
        evaluations: evals,
    })
}
