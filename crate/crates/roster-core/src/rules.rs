//! The four schedule-construction rules and the sequential decoder that
//! maps a rule string (one rule per nurse) to a schedule, maintaining a
//! running coverage tally as nurses are assigned in roster order.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{feasible_sets, Instance, MAX_PREF_COST, SLOTS};
use crate::schedule::{total_undercover, CoverageTally, Schedule};

/// Construction rule identifiers; codes match the node numbering 1..4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum RuleId {
    /// Uniform draw over the nurse's feasible set.
    Random = 1,
    /// Uniform draw over the k cheapest feasible patterns.
    KCheapest = 2,
    /// Chase the largest shortfall of the most urgent qualifying band.
    Cover = 3,
    /// Weighted blend of preference quality and covering contribution.
    Contribution = 4,
}

/// Number of construction rules.
pub const RULE_COUNT: usize = 4;

impl RuleId {
    pub const ALL: [RuleId; RULE_COUNT] = [
        RuleId::Random,
        RuleId::KCheapest,
        RuleId::Cover,
        RuleId::Contribution,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<RuleId> {
        match code {
            1 => Some(RuleId::Random),
            2 => Some(RuleId::KCheapest),
            3 => Some(RuleId::Cover),
            4 => Some(RuleId::Contribution),
            _ => None,
        }
    }

    /// 0-based position in [`RuleId::ALL`].
    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn from_index(index: usize) -> RuleId {
        Self::ALL[index]
    }
}

/// One rule per nurse: the genotype both solvers operate on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuleString(Vec<RuleId>);

impl RuleString {
    pub fn new(rules: Vec<RuleId>) -> Self {
        RuleString(rules)
    }

    pub fn from_codes(codes: &[u8]) -> Result<Self> {
        codes
            .iter()
            .map(|&c| {
                RuleId::from_code(c)
                    .ok_or_else(|| Error::invalid_argument(format!("unknown rule code {c}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(RuleString)
    }

    pub fn codes(&self) -> Vec<u8> {
        self.0.iter().map(|r| r.code()).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> RuleId {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[RuleId] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = RuleId> + '_ {
        self.0.iter().copied()
    }

    /// Uniform random string of length `n`.
    pub fn uniform(n: usize, rng: &mut impl Rng) -> Self {
        RuleString(
            (0..n)
                .map(|_| RuleId::from_index(rng.gen_range(0..RULE_COUNT)))
                .collect(),
        )
    }
}

impl fmt::Display for RuleString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let codes: Vec<String> = self.0.iter().map(|r| r.code().to_string()).collect();
        write!(f, "{}", codes.join(" "))
    }
}

/// Decoder weights and knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeParams {
    /// List length of the k-cheapest rule.
    pub k_cheapest_len: usize,
    /// Weight of the (100 - p_ij) quality term in the contribution score.
    pub w_p: f64,
    /// Per-band weights of covering an open shift, index 0 = band 1.
    pub w_s: Vec<f64>,
    /// Penalty weight per uncovered shift in the fitness.
    pub w_demand: f64,
    /// Seed for the decode rng stream.
    pub seed: u64,
}

impl DecodeParams {
    /// Defaults for an instance with `grades` bands: k = 5, w_p = 1,
    /// band weights 4, 2, 1, ... halving per band, w_demand = 200.
    pub fn for_grades(grades: u32) -> Self {
        DecodeParams {
            k_cheapest_len: 5,
            w_p: 1.0,
            w_s: (0..grades).map(|s| 4.0 * 0.5f64.powi(s as i32)).collect(),
            w_demand: 200.0,
            seed: 0,
        }
    }

    pub fn validate(&self, grades: u32) -> Result<()> {
        if self.k_cheapest_len < 1 {
            return Err(Error::invalid_argument("k_cheapest_len must be at least 1"));
        }
        if !self.w_p.is_finite() || self.w_p < 0.0 {
            return Err(Error::invalid_argument(format!("w_p {} must be >= 0", self.w_p)));
        }
        if self.w_s.len() != grades as usize {
            return Err(Error::invalid_argument(format!(
                "w_s has {} weights, expected {grades}",
                self.w_s.len()
            )));
        }
        if self.w_s.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid_argument("w_s weights must be >= 0"));
        }
        if !self.w_demand.is_finite() || self.w_demand <= 0.0 {
            return Err(Error::invalid_argument(format!(
                "w_demand {} must be positive",
                self.w_demand
            )));
        }
        Ok(())
    }
}

/// Reusable decode context: per-nurse feasible sets, precomputed once.
/// Solvers construct one per run and decode thousands of strings with it.
pub struct Decoder<'a> {
    inst: &'a Instance,
    feasible: Vec<Vec<u32>>,
    cheapest: Vec<Vec<u32>>,
    /// Bit k of entry j-1 set iff pattern j covers slot k.
    slot_masks: Vec<u16>,
}

impl<'a> Decoder<'a> {
    /// Fails fast on any nurse with an empty feasible set.
    pub fn new(inst: &'a Instance) -> Result<Self> {
        let feasible = feasible_sets(inst)?;
        let cheapest = feasible
            .iter()
            .zip(&inst.nurses)
            .map(|(set, nurse)| {
                let mut by_cost = set.clone();
                by_cost.sort_by(|&a, &b| {
                    nurse.cost_of(a).total_cmp(&nurse.cost_of(b)).then(a.cmp(&b))
                });
                by_cost
            })
            .collect();
        let slot_masks = inst
            .patterns
            .iter()
            .map(|pat| {
                (0..SLOTS).fold(0u16, |mask, slot| {
                    if pat.covers(slot) {
                        mask | (1 << slot)
                    } else {
                        mask
                    }
                })
            })
            .collect();
        Ok(Decoder {
            inst,
            feasible,
            cheapest,
            slot_masks,
        })
    }

    fn slot_mask(&self, pattern_id: u32) -> u16 {
        self.slot_masks[(pattern_id - 1) as usize]
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    /// Feasible pattern ids of a nurse, ascending by id.
    pub fn feasible(&self, nurse_idx: usize) -> &[u32] {
        &self.feasible[nurse_idx]
    }

    /// Feasible pattern ids of a nurse, ascending by (cost, id).
    pub fn cheapest_first(&self, nurse_idx: usize) -> &[u32] {
        &self.cheapest[nurse_idx]
    }

    /// Decode a rule string into a schedule, nurse by nurse in roster
    /// order. Deterministic given (rule string, params, rng stream).
    pub fn decode(
        &self,
        rs: &RuleString,
        params: &DecodeParams,
        rng: &mut impl Rng,
    ) -> Result<Schedule> {
        self.decode_scored(rs, params, rng).map(|(sched, _)| sched)
    }

    /// Decode and return the penalty fitness along with the schedule,
    /// computed from the running tally.
    pub fn decode_scored(
        &self,
        rs: &RuleString,
        params: &DecodeParams,
        rng: &mut impl Rng,
    ) -> Result<(Schedule, f64)> {
        if rs.len() != self.inst.nurse_count() {
            return Err(Error::invalid_argument(format!(
                "rule string of length {} for {} nurses",
                rs.len(),
                self.inst.nurse_count()
            )));
        }
        params.validate(self.inst.grades)?;
        let mut state = BuildState::new(self);
        let mut cost = 0.0;
        for i in 0..rs.len() {
            let pattern_id = match rs.get(i) {
                RuleId::Random => apply_random(&state, i, rng)?,
                RuleId::KCheapest => apply_k_cheapest(&state, i, params.k_cheapest_len, rng)?,
                RuleId::Cover => apply_cover(&state, i)?,
                RuleId::Contribution => apply_contribution(&state, i, params)?,
            };
            cost += self.inst.nurses[i].cost_of(pattern_id);
            state.assign_next(pattern_id)?;
        }
        let penalty = params.w_demand * total_undercover(self.inst, state.tally()) as f64;
        Ok((Schedule::new(state.into_assignment()), cost + penalty))
    }
}

/// Incremental decoder state: the prefix of assigned nurses plus a running
/// coverage tally that always equals the coverage of that prefix.
pub struct BuildState<'d, 'a> {
    decoder: &'d Decoder<'a>,
    assigned: Vec<u32>,
    tally: CoverageTally,
    /// Per band, bit k set iff slot k still has undercover.
    open: Vec<u16>,
}

impl<'d, 'a> BuildState<'d, 'a> {
    pub fn new(decoder: &'d Decoder<'a>) -> Self {
        let inst = decoder.inst;
        let open = (1..=inst.grades)
            .map(|band| {
                (0..SLOTS).fold(0u16, |mask, slot| {
                    if inst.demand_at(slot, band) > 0 {
                        mask | (1 << slot)
                    } else {
                        mask
                    }
                })
            })
            .collect();
        BuildState {
            decoder,
            assigned: Vec::with_capacity(inst.nurse_count()),
            tally: CoverageTally::new(inst.grades),
            open,
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.decoder.inst
    }

    /// Index of the next nurse to assign.
    pub fn next_nurse(&self) -> usize {
        self.assigned.len()
    }

    pub fn assigned(&self) -> &[u32] {
        &self.assigned
    }

    pub fn tally(&self) -> &CoverageTally {
        &self.tally
    }

    /// Feasible pattern ids of a nurse, ascending by id.
    pub fn feasible(&self, nurse_idx: usize) -> &[u32] {
        self.decoder.feasible(nurse_idx)
    }

    /// Feasible pattern ids of a nurse, ascending by (cost, id).
    pub fn cheapest_first(&self, nurse_idx: usize) -> &[u32] {
        self.decoder.cheapest_first(nurse_idx)
    }

    /// Remaining shortfall at (slot, band) against the current prefix.
    pub fn undercover(&self, slot: usize, band: u32) -> u32 {
        self.decoder
            .inst
            .demand_at(slot, band)
            .saturating_sub(self.tally.get(slot, band))
    }

    /// Total remaining shortfall of one band.
    pub fn band_shortfall(&self, band: u32) -> u64 {
        (0..SLOTS).map(|slot| self.undercover(slot, band) as u64).sum()
    }

    /// Assign `pattern_id` to the next nurse and update the tally.
    pub fn assign_next(&mut self, pattern_id: u32) -> Result<()> {
        let idx = self.assigned.len();
        let inst = self.decoder.inst;
        let nurse = inst.nurses.get(idx).ok_or_else(|| {
            Error::invalid_argument("all nurses are already assigned".to_string())
        })?;
        if self.decoder.feasible(idx).binary_search(&pattern_id).is_err() {
            return Err(Error::ContractViolation {
                nurse: nurse.id,
                pattern: pattern_id,
            });
        }
        let pattern = inst.pattern(pattern_id).expect("feasible id exists");
        self.tally.add(nurse, pattern);
        self.assigned.push(pattern_id);
        for band in nurse.grade..=inst.grades {
            let mut mask = self.open[(band - 1) as usize];
            for slot in 0..SLOTS {
                if pattern.covers(slot) && self.undercover(slot, band) == 0 {
                    mask &= !(1 << slot);
                }
            }
            self.open[(band - 1) as usize] = mask;
        }
        Ok(())
    }

    pub fn into_assignment(self) -> Vec<u32> {
        self.assigned
    }
}

fn nonempty<'s>(state: &'s BuildState, nurse_idx: usize) -> Result<&'s [u32]> {
    let set = state.feasible(nurse_idx);
    if set.is_empty() {
        return Err(Error::InfeasibleNurse {
            nurse: state.instance().nurses[nurse_idx].id,
        });
    }
    Ok(set)
}

/// Random rule: uniform draw over the feasible set.
pub fn apply_random(state: &BuildState, nurse_idx: usize, rng: &mut impl Rng) -> Result<u32> {
    let set = nonempty(state, nurse_idx)?;
    Ok(set[rng.gen_range(0..set.len())])
}

/// k-Cheapest rule: uniform draw over the min(k, |F|) cheapest patterns
/// (cost ties broken towards lower ids when truncating).
pub fn apply_k_cheapest(
    state: &BuildState,
    nurse_idx: usize,
    k: usize,
    rng: &mut impl Rng,
) -> Result<u32> {
    if k < 1 {
        return Err(Error::invalid_argument("k must be at least 1"));
    }
    nonempty(state, nurse_idx)?;
    let list = state.cheapest_first(nurse_idx);
    let take = k.min(list.len());
    Ok(list[rng.gen_range(0..take)])
}

/// Cover rule: walk bands from the nurse's own grade towards lower
/// qualifications; on the first band with remaining shortfall, pick the
/// pattern covering the most still-open slots (ties: cheaper, then lower
/// id). With nothing left uncovered, pick the cheapest feasible pattern.
pub fn apply_cover(state: &BuildState, nurse_idx: usize) -> Result<u32> {
    let inst = state.instance();
    let nurse = &inst.nurses[nurse_idx];
    let set = nonempty(state, nurse_idx)?;

    let active = (nurse.grade..=inst.grades).find(|&band| state.band_shortfall(band) > 0);
    let Some(band) = active else {
        return Ok(state.cheapest_first(nurse_idx)[0]);
    };

    let mut best_id = set[0];
    let mut best_score = -1i64;
    let mut best_cost = f64::INFINITY;
    for &id in set {
        let score = open_slots_covered(state, id, band) as i64;
        let cost = nurse.cost_of(id);
        if score > best_score || (score == best_score && cost < best_cost) {
            best_id = id;
            best_score = score;
            best_cost = cost;
        }
    }
    Ok(best_id)
}

fn open_slots_covered(state: &BuildState, pattern_id: u32, band: u32) -> usize {
    let pattern_mask = state.decoder.slot_mask(pattern_id);
    let open_mask = state.open[(band - 1) as usize];
    (pattern_mask & open_mask).count_ones() as usize
}

/// Contribution rule: argmax of
/// `w_p (100 - p_ij) + sum_s w_s q_is (open slots of band s covered by j)`,
/// ties towards lower pattern ids.
pub fn apply_contribution(
    state: &BuildState,
    nurse_idx: usize,
    params: &DecodeParams,
) -> Result<u32> {
    let scores = contribution_scores(state, nurse_idx, params)?;
    let mut best = scores[0];
    for &entry in &scores[1..] {
        if entry.1 > best.1 {
            best = entry;
        }
    }
    Ok(best.0)
}

/// The contribution score of every feasible pattern, ascending by id.
pub fn contribution_scores(
    state: &BuildState,
    nurse_idx: usize,
    params: &DecodeParams,
) -> Result<Vec<(u32, f64)>> {
    let inst = state.instance();
    let nurse = &inst.nurses[nurse_idx];
    let set = nonempty(state, nurse_idx)?;

    let mut scores = Vec::with_capacity(set.len());
    for &id in set {
        let mut score = params.w_p * (MAX_PREF_COST - nurse.cost_of(id));
        for band in nurse.grade..=inst.grades {
            score += params.w_s[(band - 1) as usize]
                * open_slots_covered(state, id, band) as f64;
        }
        scores.push((id, score));
    }
    Ok(scores)
}

/// One-shot decode; builds a throwaway [`Decoder`]. Solvers should hold a
/// `Decoder` instead.
pub fn decode(
    inst: &Instance,
    rs: &RuleString,
    params: &DecodeParams,
    rng: &mut impl Rng,
) -> Result<Schedule> {
    Decoder::new(inst)?.decode(rs, params, rng)
}

/// Decode with a fresh ChaCha stream seeded from `params.seed`.
pub fn decode_seeded(inst: &Instance, rs: &RuleString, params: &DecodeParams) -> Result<Schedule> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    decode(inst, rs, params, &mut rng)
}
