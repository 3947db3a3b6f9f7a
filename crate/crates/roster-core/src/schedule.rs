//! Phenotype side of the problem: schedules, coverage tallies, the
//! preference-cost objective and the penalty fitness.

use crate::error::{Error, Result};
use crate::model::{pattern_feasible, Instance, Nurse, ShiftPattern, SLOTS};

/// One pattern id per nurse, in roster order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub assignment: Vec<u32>,
}

impl Schedule {
    pub fn new(assignment: Vec<u32>) -> Self {
        Schedule { assignment }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }
}

/// Qualified-cover counts per (slot, band): entry (k, s) is the number of
/// assigned nurses of grade ≤ s whose pattern covers slot k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageTally {
    cover: Vec<Vec<u32>>,
}

impl CoverageTally {
    pub fn new(grades: u32) -> Self {
        CoverageTally {
            cover: vec![vec![0; grades as usize]; SLOTS],
        }
    }

    /// Cover at `slot` for 1-based `band`.
    pub fn get(&self, slot: usize, band: u32) -> u32 {
        self.cover[slot][(band - 1) as usize]
    }

    pub fn grades(&self) -> u32 {
        self.cover[0].len() as u32
    }

    /// Count `nurse` working `pattern` towards every band she qualifies for.
    pub fn add(&mut self, nurse: &Nurse, pattern: &ShiftPattern) {
        let bands = self.cover[0].len();
        for slot in 0..SLOTS {
            if pattern.covers(slot) {
                for band_idx in (nurse.grade as usize - 1)..bands {
                    self.cover[slot][band_idx] += 1;
                }
            }
        }
    }

    /// Exact inverse of [`CoverageTally::add`], for backtracking search.
    pub fn remove(&mut self, nurse: &Nurse, pattern: &ShiftPattern) {
        let bands = self.cover[0].len();
        for slot in 0..SLOTS {
            if pattern.covers(slot) {
                for band_idx in (nurse.grade as usize - 1)..bands {
                    self.cover[slot][band_idx] -= 1;
                }
            }
        }
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.cover
    }
}

fn checked_pattern<'a>(inst: &'a Instance, nurse: &Nurse, pattern_id: u32) -> Result<&'a ShiftPattern> {
    let pattern = inst
        .pattern(pattern_id)
        .ok_or(Error::ContractViolation {
            nurse: nurse.id,
            pattern: pattern_id,
        })?;
    if !pattern_feasible(nurse, pattern) {
        return Err(Error::ContractViolation {
            nurse: nurse.id,
            pattern: pattern_id,
        });
    }
    Ok(pattern)
}

/// Tally of a partial assignment covering the first `assigned.len()` nurses.
pub fn partial_coverage(inst: &Instance, assigned: &[u32]) -> Result<CoverageTally> {
    if assigned.len() > inst.nurse_count() {
        return Err(Error::invalid_argument(format!(
            "assignment of {} entries for {} nurses",
            assigned.len(),
            inst.nurse_count()
        )));
    }
    let mut tally = CoverageTally::new(inst.grades);
    for (nurse, &pattern_id) in inst.nurses.iter().zip(assigned) {
        let pattern = checked_pattern(inst, nurse, pattern_id)?;
        tally.add(nurse, pattern);
    }
    Ok(tally)
}

/// Full coverage tally of a schedule.
pub fn coverage(inst: &Instance, sched: &Schedule) -> Result<CoverageTally> {
    if sched.len() != inst.nurse_count() {
        return Err(Error::invalid_argument(format!(
            "schedule of {} entries for {} nurses",
            sched.len(),
            inst.nurse_count()
        )));
    }
    partial_coverage(inst, &sched.assignment)
}

/// Total preference cost of a schedule.
pub fn preference_cost(inst: &Instance, sched: &Schedule) -> Result<f64> {
    if sched.len() != inst.nurse_count() {
        return Err(Error::invalid_argument(format!(
            "schedule of {} entries for {} nurses",
            sched.len(),
            inst.nurse_count()
        )));
    }
    let mut total = 0.0;
    for (nurse, &pattern_id) in inst.nurses.iter().zip(&sched.assignment) {
        checked_pattern(inst, nurse, pattern_id)?;
        total += nurse.cost_of(pattern_id);
    }
    Ok(total)
}

/// Per-(slot, band) shortfall: max(demand − cover, 0).
pub fn undercover(inst: &Instance, tally: &CoverageTally) -> Vec<Vec<u32>> {
    (0..SLOTS)
        .map(|slot| {
            (1..=inst.grades)
                .map(|band| inst.demand_at(slot, band).saturating_sub(tally.get(slot, band)))
                .collect()
        })
        .collect()
}

/// Sum of all undercover cells.
pub fn total_undercover(inst: &Instance, tally: &CoverageTally) -> u64 {
    let mut total = 0u64;
    for slot in 0..SLOTS {
        for band in 1..=inst.grades {
            total += inst.demand_at(slot, band).saturating_sub(tally.get(slot, band)) as u64;
        }
    }
    total
}

/// Penalty fitness: preference cost plus `w_demand` per uncovered shift.
/// Lower is better.
pub fn fitness(inst: &Instance, sched: &Schedule, w_demand: f64) -> Result<f64> {
    if !w_demand.is_finite() || w_demand <= 0.0 {
        return Err(Error::invalid_argument(format!(
            "demand weight must be positive and finite, got {w_demand}"
        )));
    }
    let cost = preference_cost(inst, sched)?;
    let tally = coverage(inst, sched)?;
    Ok(cost + w_demand * total_undercover(inst, &tally) as f64)
}

/// True iff the schedule meets demand at every (slot, band).
pub fn is_feasible(inst: &Instance, sched: &Schedule) -> Result<bool> {
    let tally = coverage(inst, sched)?;
    Ok(total_undercover(inst, &tally) == 0)
}
