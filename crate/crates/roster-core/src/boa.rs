//! Chain-structured estimation-of-distribution solver.
//!
//! The solution structure is a chain: the rule choice at each nurse
//! position depends on the rule chosen at the previous position. Learning
//! reduces to counting rule frequencies in a selected set of promising
//! strings; sampling walks the chain with roulette draws.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::rules::{DecodeParams, Decoder, RuleId, RuleString, RULE_COUNT};
use crate::schedule::{fitness, Schedule};
use crate::solver::{evaluate_seeded, IterationStats, SolverResult};

/// Offset added to every roulette weight so even the worst member keeps a
/// nonzero selection probability.
const SELECTION_DELTA: f64 = 1.0;

/// Root distribution plus per-position conditional probability tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainBayesNet {
    /// P(rule at position 0).
    pub root: [f64; RULE_COUNT],
    /// `cond[i][j][j']` = P(rule j' at position i+1 | rule j at position i).
    pub cond: Vec<[[f64; RULE_COUNT]; RULE_COUNT]>,
}

impl ChainBayesNet {
    pub fn positions(&self) -> usize {
        self.cond.len() + 1
    }

    /// Verify the distribution invariants: entries non-negative, every
    /// row summing to 1 within 1e-9.
    pub fn check(&self) -> Result<()> {
        check_row(&self.root, "root")?;
        for (i, table) in self.cond.iter().enumerate() {
            for (j, row) in table.iter().enumerate() {
                check_row(row, &format!("cond[{i}][{j}]"))?;
            }
        }
        Ok(())
    }

    /// Probability of a full rule string under the factored joint.
    pub fn probability(&self, rs: &RuleString) -> f64 {
        assert_eq!(rs.len(), self.positions(), "rule string length mismatch");
        let mut prob = self.root[rs.get(0).index()];
        for i in 0..self.cond.len() {
            prob *= self.cond[i][rs.get(i).index()][rs.get(i + 1).index()];
        }
        prob
    }

    /// Roulette-sample one rule string; deterministic given the stream.
    pub fn sample(&self, rng: &mut impl Rng) -> RuleString {
        let mut rules = Vec::with_capacity(self.positions());
        let first = WeightedIndex::new(self.root)
            .expect("valid root distribution")
            .sample(rng);
        rules.push(RuleId::from_index(first));
        let mut prev = first;
        for table in &self.cond {
            let next = WeightedIndex::new(table[prev])
                .expect("valid conditional row")
                .sample(rng);
            rules.push(RuleId::from_index(next));
            prev = next;
        }
        RuleString::new(rules)
    }
}

fn check_row(row: &[f64; RULE_COUNT], what: &str) -> Result<()> {
    if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::invalid_argument(format!("{what}: negative or non-finite entry")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid_argument(format!("{what}: row sums to {sum}, not 1")));
    }
    Ok(())
}

/// Learn a chain net from a selected set of equal-length rule strings.
///
/// Counts are Laplace-smoothed by `smoothing`; with zero smoothing an
/// unvisited parent row falls back to the uniform distribution so the
/// sampler never divides by zero.
pub fn estimate(selected: &[RuleString], smoothing: f64) -> Result<ChainBayesNet> {
    if selected.is_empty() {
        return Err(Error::invalid_argument("cannot estimate from an empty selection"));
    }
    if !smoothing.is_finite() || smoothing < 0.0 {
        return Err(Error::invalid_argument(format!("smoothing {smoothing} must be >= 0")));
    }
    let n = selected[0].len();
    if n == 0 {
        return Err(Error::invalid_argument("rule strings must be non-empty"));
    }
    if selected.iter().any(|s| s.len() != n) {
        return Err(Error::invalid_argument("selected rule strings differ in length"));
    }

    let t = selected.len() as f64;
    let r = RULE_COUNT as f64;

    let mut root = [0.0f64; RULE_COUNT];
    for s in selected {
        root[s.get(0).index()] += 1.0;
    }
    for entry in &mut root {
        *entry = (*entry + smoothing) / (t + r * smoothing);
    }

    let mut cond = vec![[[0.0f64; RULE_COUNT]; RULE_COUNT]; n - 1];
    for s in selected {
        for i in 0..n - 1 {
            cond[i][s.get(i).index()][s.get(i + 1).index()] += 1.0;
        }
    }
    for table in &mut cond {
        for row in table.iter_mut() {
            let parent_count: f64 = row.iter().sum();
            if parent_count == 0.0 && smoothing == 0.0 {
                *row = [1.0 / r; RULE_COUNT];
            } else {
                for entry in row.iter_mut() {
                    *entry = (*entry + smoothing) / (parent_count + r * smoothing);
                }
            }
        }
    }

    Ok(ChainBayesNet { root, cond })
}

/// Roulette selection for minimization: `count` draws with replacement,
/// weight of member i being (worst fitness − fitness_i) + delta.
pub fn select(
    population: &[(RuleString, f64)],
    count: usize,
    rng: &mut impl Rng,
) -> Result<Vec<RuleString>> {
    if population.is_empty() {
        return Err(Error::invalid_argument("cannot select from an empty population"));
    }
    if count == 0 {
        return Err(Error::invalid_argument("selection count must be at least 1"));
    }
    if population.iter().any(|(_, f)| !f.is_finite()) {
        return Err(Error::invalid_argument("population contains non-finite fitness"));
    }
    let worst = population
        .iter()
        .map(|(_, f)| *f)
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = population
        .iter()
        .map(|(_, f)| (worst - f) + SELECTION_DELTA)
        .collect();
    let dist = WeightedIndex::new(&weights).expect("positive weights");
    Ok((0..count)
        .map(|_| population[dist.sample(rng)].0.clone())
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoaParams {
    pub pop_size: usize,
    /// Promising strings selected per iteration (T in the counting).
    pub select_count: usize,
    /// New strings sampled per iteration; they replace the worst members.
    pub offspring_count: usize,
    /// Laplace smoothing of all counts.
    pub smoothing: f64,
    pub max_iterations: u32,
    /// Hard cap on fitness evaluations (the initial population is always
    /// evaluated; the budget gates the loop).
    pub eval_budget: u64,
    pub seed: u64,
    pub decode: DecodeParams,
}

impl BoaParams {
    pub fn defaults(grades: u32) -> Self {
        BoaParams {
            pop_size: 140,
            select_count: 70,
            offspring_count: 70,
            smoothing: 1.0,
            max_iterations: 200,
            eval_budget: 1_000_000,
            seed: 0,
            decode: DecodeParams::for_grades(grades),
        }
    }

    pub fn validate(&self, grades: u32) -> Result<()> {
        if self.pop_size < 2 {
            return Err(Error::invalid_argument("pop_size must be at least 2"));
        }
        if self.select_count < 1 || self.select_count > self.pop_size {
            return Err(Error::invalid_argument("select_count must be in 1..=pop_size"));
        }
        if self.offspring_count < 1 || self.offspring_count > self.pop_size {
            return Err(Error::invalid_argument("offspring_count must be in 1..=pop_size"));
        }
        if !self.smoothing.is_finite() || self.smoothing < 0.0 {
            return Err(Error::invalid_argument("smoothing must be >= 0"));
        }
        self.decode.validate(grades)
    }
}

fn snapshot(iteration: u32, best: f64, population: &[(RuleString, f64)]) -> IterationStats {
    let mean = population.iter().map(|(_, f)| *f).sum::<f64>() / population.len() as f64;
    IterationStats {
        iteration,
        best,
        mean,
    }
}

/// Replace the `offspring.len()` worst members (ties towards lower index).
fn replace_worst(population: &mut [(RuleString, f64)], offspring: Vec<(RuleString, f64)>) {
    if offspring.is_empty() {
        return;
    }
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| {
        population[b]
            .1
            .total_cmp(&population[a].1)
            .then(a.cmp(&b))
    });
    for (slot, child) in order.into_iter().zip(offspring) {
        population[slot] = child;
    }
}

/// Population loop: random initial strings, roulette selection, chain-net
/// estimation, sampling, decode-and-evaluate, replace-worst. Stops after
/// `max_iterations` or once the evaluation budget is exhausted.
/// Deterministic given the seed.
pub fn run_boa(inst: &Instance, params: &BoaParams) -> Result<SolverResult> {
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
    let mut evals: u64 = 0;
    let mut population: Vec<(RuleString, f64)> = Vec::with_capacity(params.pop_size);
    let mut best: Option<(f64, Schedule, RuleString)> = None;

    for _ in 0..params.pop_size {
        let rs = RuleString::uniform(n, &mut rng);
        let (sched, fit) = evaluate_seeded(&decoder, &params.decode, &rs)?;
        evals += 1;
        if best.as_ref().is_none_or(|(b, ..)| fit < *b) {
            best = Some((fit, sched, rs.clone()));
        }
        population.push((rs, fit));
    }

    let best_of = |best: &Option<(f64, Schedule, RuleString)>| best.as_ref().expect("non-empty").0;
    let mut history = vec![snapshot(0, best_of(&best), &population)];

    for t in 1..=params.max_iterations {
        if evals >= params.eval_budget {
            break;
        }
        let parents = select(&population, params.select_count, &mut rng)?;
        let net = estimate(&parents, params.smoothing)?;
        let sampled: Vec<RuleString> = (0..params.offspring_count)
            .map(|_| net.sample(&mut rng))
            .collect();

        let mut offspring = Vec::with_capacity(sampled.len());
        for rs in sampled {
            if evals >= params.eval_budget {
                break;
            }
            let (sched, fit) = evaluate_seeded(&decoder, &params.decode, &rs)?;
            evals += 1;
            if best.as_ref().is_none_or(|(b, ..)| fit < *b) {
                best = Some((fit, sched, rs.clone()));
            }
            offspring.push((rs, fit));
        }

        replace_worst(&mut population, offspring);
        debug_assert_eq!(population.len(), params.pop_size);
        history.push(snapshot(t, best_of(&best), &population));
    }

    let (best_fitness, best_schedule, best_rules) = best.expect("population evaluated");
    Ok(SolverResult {
        best_fitness,
        best_schedule,
        best_rules,
        history,
        evaluations: evals,
    })
}
