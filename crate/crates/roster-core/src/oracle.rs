//! Brute-force ground truth at desk scale: the exact fitness optimum over
//! all assignments, and the best rule string over all r^n decodes. Both
//! solvers are verified against these on small instances.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{feasible_sets, Instance};
use crate::rules::{DecodeParams, Decoder, RuleId, RuleString};
use crate::schedule::{total_undercover, CoverageTally, Schedule};

/// Cap on the enumerated state count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_search_space: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_search_space: 10_000_000,
        }
    }
}

struct AssignmentSearch<'a> {
    inst: &'a Instance,
    sets: &'a [Vec<u32>],
    w_demand: f64,
    assignment: Vec<u32>,
    tally: CoverageTally,
    best: Vec<u32>,
    best_fitness: f64,
}

impl AssignmentSearch<'_> {
    fn dfs(&mut self, depth: usize, cost_so_far: f64) {
        if depth == self.sets.len() {
            let fit = cost_so_far
                + self.w_demand * total_undercover(self.inst, &self.tally) as f64;
            if fit < self.best_fitness {
                self.best_fitness = fit;
                self.best = self.assignment.clone();
            }
            return;
        }
        let nurse = &self.inst.nurses[depth];
        for &pattern_id in &self.sets[depth] {
            let cost = cost_so_far + nurse.cost_of(pattern_id);
            // The penalty term is non-negative, so preference cost alone
            // already bounds any completion from below.
            if cost >= self.best_fitness {
                continue;
            }
            let pattern = self.inst.pattern(pattern_id).expect("feasible id exists");
            self.tally.add(nurse, pattern);
            self.assignment.push(pattern_id);
            self.dfs(depth + 1, cost);
            self.assignment.pop();
            self.tally.remove(nurse, pattern);
        }
    }
}

/// Global minimizer of the penalty fitness by depth-first enumeration over
/// the per-nurse feasible sets. Ties resolve to the lexicographically
/// smallest assignment. Never fails on unsatisfiable demand: the minimizer
/// then simply carries a positive penalty.
pub fn exact_optimum(
    inst: &Instance,
    w_demand: f64,
    limits: &OracleLimits,
) -> Result<(Schedule, f64)> {
    if !w_demand.is_finite() || w_demand <= 0.0 {
        return Err(Error::invalid_argument(format!(
            "demand weight must be positive and finite, got {w_demand}"
        )));
    }
    let sets = feasible_sets(inst)?;
    let space: u128 = sets.iter().map(|s| s.len() as u128).product();
    if space > limits.max_search_space as u128 {
        return Err(Error::Capacity {
            space,
            limit: limits.max_search_space,
        });
    }

    let mut search = AssignmentSearch {
        inst,
        sets: &sets,
        w_demand,
        assignment: Vec::with_capacity(sets.len()),
        tally: CoverageTally::new(inst.grades),
        best: Vec::new(),
        best_fitness: f64::INFINITY,
    };
    search.dfs(0, 0.0);
    Ok((Schedule::new(search.best), search.best_fitness))
}

/// Best rule string over every string in `rules`^n, each decoded with a
/// fresh stream seeded from `params.seed`. Ties resolve to the
/// lexicographically smallest string (in the given rule order). This is
/// the decoder-reachable optimum bounding what the solvers can achieve.
pub fn exhaustive_rule_strings(
    inst: &Instance,
    params: &DecodeParams,
    limits: &OracleLimits,
) -> Result<(RuleString, f64)> {
    exhaustive_rule_strings_over(inst, params, limits, &RuleId::ALL)
}

/// As [`exhaustive_rule_strings`] but restricted to a rule subset, e.g.
/// only the rng-free rules.
pub fn exhaustive_rule_strings_over(
    inst: &Instance,
    params: &DecodeParams,
    limits: &OracleLimits,
    rules: &[RuleId],
) -> Result<(RuleString, f64)> {
    if rules.is_empty() {
        return Err(Error::invalid_argument("rule subset must not be empty"));
    }
    params.validate(inst.grades)?;
    let n = inst.nurse_count();
    let space = (rules.len() as u128)
        .checked_pow(n as u32)
        .unwrap_or(u128::MAX);
    if space > limits.max_search_space as u128 {
        return Err(Error::Capacity {
            space,
            limit: limits.max_search_space,
        });
    }

    let decoder = Decoder::new(inst)?;
    let mut digits = vec![0usize; n];
    let mut best: Option<(RuleString, f64)> = None;
    loop {
        let rs = RuleString::new(digits.iter().map(|&d| rules[d]).collect());
        let mut stream = ChaCha8Rng::seed_from_u64(params.seed);
        let (_, fit) = decoder.decode_scored(&rs, params, &mut stream)?;
        if best.as_ref().is_none_or(|(_, b)| fit < *b) {
            best = Some((rs, fit));
        }

        // Rightmost digit runs fastest: lexicographic enumeration.
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(best.expect("at least one string evaluated"));
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < rules.len() {
                break;
            }
            digits[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{fitness, preference_cost};
    use crate::testutil::{tiny, zero_demand_single_nurse};

    #[test]
    fn tiny_optimum_is_the_zero_cost_roster() {
        let (sched, fit) = exact_optimum(&tiny(), 200.0, &OracleLimits::default()).unwrap();
        assert_eq!(fit, 0.0);
        assert_eq!(sched.assignment, vec![1, 2, 3]);
    }

    #[test]
    fn single_nurse_zero_demand_gets_her_cheapest_pattern() {
        let inst = zero_demand_single_nurse();
        let (sched, fit) = exact_optimum(&inst, 200.0, &OracleLimits::default()).unwrap();
        assert_eq!(sched.assignment, vec![2], "pattern 2 costs 5, the minimum");
        assert_eq!(fit, 5.0);
    }

    #[test]
    fn unsatisfiable_demand_still_yields_a_minimizer() {
        let mut inst = tiny();
        // Day 6 requires three nurses of each band; no pattern covers it.
        inst.demand[5] = vec![3, 3];
        let (sched, fit) = exact_optimum(&inst, 200.0, &OracleLimits::default()).unwrap();
        assert_eq!(sched.assignment, vec![1, 2, 3]);
        assert_eq!(fit, 200.0 * 6.0, "constant six-shift shortfall");
    }

    #[test]
    fn capacity_error_reports_the_state_count() {
        let limits = OracleLimits {
            max_search_space: 10,
        };
        match exact_optimum(&tiny(), 200.0, &limits) {
            Err(Error::Capacity { space, limit }) => {
                assert_eq!(space, 27);
                assert_eq!(limit, 10);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn exhaustive_rule_strings_reach_the_tiny_optimum() {
        let inst = tiny();
        let params = DecodeParams::for_grades(2);
        let (rs, fit) = exhaustive_rule_strings(&inst, &params, &OracleLimits::default()).unwrap();
        assert_eq!(rs.len(), 3);
        assert_eq!(fit, 0.0, "the all-cover string alone already decodes to cost 0");

        let (_, exact) = exact_optimum(&inst, 200.0, &OracleLimits::default()).unwrap();
        assert!(fit >= exact);
    }

    #[test]
    fn single_nurse_rule_strings() {
        let inst = zero_demand_single_nurse();
        let params = DecodeParams::for_grades(1);
        let (_, fit) = exhaustive_rule_strings(&inst, &params, &OracleLimits::default()).unwrap();
        assert_eq!(fit, 5.0, "the cover fallback picks the cheapest pattern");
    }

    #[test]
    fn rng_free_rule_subsets_are_seed_independent() {
        let inst = tiny();
        let limits = OracleLimits::default();
        let deterministic = [RuleId::Cover, RuleId::Contribution];
        let mut params = DecodeParams::for_grades(2);
        params.seed = 1;
        let a = exhaustive_rule_strings_over(&inst, &params, &limits, &deterministic).unwrap();
        params.seed = 999;
        let b = exhaustive_rule_strings_over(&inst, &params, &limits, &deterministic).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rule_string_capacity_is_checked() {
        let mut inst = tiny();
        // 4^30 strings is far past any sensible limit.
        let nurse = inst.nurses[0].clone();
        while inst.nurses.len() < 30 {
            let mut extra = nurse.clone();
            extra.id = inst.nurses.len() as u32 + 1;
            inst.nurses.push(extra);
        }
        let params = DecodeParams::for_grades(2);
        match exhaustive_rule_strings(&inst, &params, &OracleLimits::default()) {
            Err(Error::Capacity { space, .. }) => {
                assert_eq!(space, (4u128).pow(30));
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    /// Independent full enumeration without pruning, for cross-checking.
    fn unpruned_optimum(inst: &Instance, w_demand: f64) -> (Vec<u32>, f64) {
        let sets = feasible_sets(inst).unwrap();
        let mut digits = vec![0usize; sets.len()];
        let mut best: Option<(Vec<u32>, f64)> = None;
        loop {
            let assignment: Vec<u32> = digits.iter().zip(&sets).map(|(&d, s)| s[d]).collect();
            let sched = Schedule::new(assignment.clone());
            let fit = fitness(inst, &sched, w_demand).unwrap();
            if best.as_ref().map_or(true, |(_, b)| fit < *b) {
                best = Some((assignment, fit));
            }
            let mut pos = digits.len();
            loop {
                if pos == 0 {
                    return best.unwrap();
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < sets[pos].len() {
                    break;
                }
                digits[pos] = 0;
            }
        }
    }

    #[test]
    fn pruned_search_matches_unpruned_search() {
        let inst = tiny();
        let (sched, fit) = exact_optimum(&inst, 200.0, &OracleLimits::default()).unwrap();
        let (expected_assignment, expected_fit) = unpruned_optimum(&inst, 200.0);
        assert_eq!(fit, expected_fit);
        assert_eq!(sched.assignment, expected_assignment);

        // Also on a variant with ties and unsatisfiable cells.
        let mut skewed = tiny();
        skewed.nurses[0].pref_cost = vec![7.0, 7.0, 7.0];
        skewed.demand[4] = vec![1, 1];
        let (sched, fit) = exact_optimum(&skewed, 50.0, &OracleLimits::default()).unwrap();
        let (expected_assignment, expected_fit) = unpruned_optimum(&skewed, 50.0);
        assert_eq!(fit, expected_fit);
        assert_eq!(sched.assignment, expected_assignment);
    }
}
