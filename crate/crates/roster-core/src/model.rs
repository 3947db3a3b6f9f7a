//! Problem data model: nurses, weekly shift patterns, grade bands, demand,
//! feasibility and instance I/O.
//!
//! A week is 14 slots: slots 0..7 are days, 7..14 are nights. Grades are
//! numbered from 1 (highest qualification) to `grades`; demand is cumulative
//! per band, i.e. `demand[k][s-1]` counts nurses of grade `s` *or better*
//! required in slot `k`.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Day/night slots per week: 7 days followed by 7 nights.
pub const SLOTS: usize = 14;
/// Day slot indices.
pub const DAY_SLOTS: std::ops::Range<usize> = 0..7;
/// Night slot indices.
pub const NIGHT_SLOTS: std::ops::Range<usize> = 7..14;

/// Upper bound on any preference cost.
pub const MAX_PREF_COST: f64 = 100.0;

/// A weekly shift pattern: which of the 14 slots it covers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftPattern {
    /// 1-based pattern id; ids run contiguously 1..=m in catalog order.
    pub id: u32,
    /// 14 entries, each 0 or 1.
    pub cover: Vec<u8>,
}

impl ShiftPattern {
    pub fn covers(&self, slot: usize) -> bool {
        self.cover.get(slot).copied().unwrap_or(0) != 0
    }

    pub fn day_total(&self) -> u32 {
        self.cover[DAY_SLOTS].iter().map(|&c| c as u32).sum()
    }

    pub fn night_total(&self) -> u32 {
        self.cover[NIGHT_SLOTS].iter().map(|&c| c as u32).sum()
    }

    pub fn total(&self) -> u32 {
        self.cover.iter().map(|&c| c as u32).sum()
    }
}

/// Weekly working contract of a nurse; exactly one mode is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Contract {
    /// Works `d` day shifts, no nights.
    Day(u32),
    /// Works `n` night shifts, no days.
    Night(u32),
    /// Works `b` shifts counted over all 14 slots.
    Combined(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nurse {
    /// 1-based nurse id; ids run contiguously 1..=n in roster order.
    pub id: u32,
    /// 1 is the highest qualification.
    pub grade: u32,
    pub days: u32,
    pub nights: u32,
    pub both: u32,
    /// Preference cost per pattern, one entry per catalog pattern, in [0, 100].
    pub pref_cost: Vec<f64>,
}

impl Nurse {
    /// The active contract mode, or `None` if the day/night/both counts
    /// do not single one out.
    pub fn contract(&self) -> Option<Contract> {
        match (self.days > 0, self.nights > 0, self.both > 0) {
            (true, false, false) => Some(Contract::Day(self.days)),
            (false, true, false) => Some(Contract::Night(self.nights)),
            (false, false, true) => Some(Contract::Combined(self.both)),
            _ => None,
        }
    }

    /// Preference cost of working `pattern_id`.
    pub fn cost_of(&self, pattern_id: u32) -> f64 {
        self.pref_cost[(pattern_id - 1) as usize]
    }
}

/// A rostering problem instance.
///
/// Field order is the canonical serialization order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub name: String,
    /// Number of grade bands.
    #[serde(rename = "p")]
    pub grades: u32,
    pub patterns: Vec<ShiftPattern>,
    pub nurses: Vec<Nurse>,
    /// `SLOTS` rows of `grades` cumulative requirements.
    pub demand: Vec<Vec<u32>>,
}

impl Instance {
    pub fn nurse_count(&self) -> usize {
        self.nurses.len()
    }

    pub fn pattern_count(&self) -> usize {
        self.patterns.len()
    }

    pub fn grade_count(&self) -> usize {
        self.grades as usize
    }

    /// Look up a pattern by its 1-based id.
    pub fn pattern(&self, id: u32) -> Option<&ShiftPattern> {
        let idx = (id as usize).checked_sub(1)?;
        self.patterns.get(idx).filter(|pat| pat.id == id)
    }

    /// Cumulative demand in `slot` for band `band` (1-based).
    pub fn demand_at(&self, slot: usize, band: u32) -> u32 {
        self.demand[slot][(band - 1) as usize]
    }
}

/// True iff `nurse` counts towards cumulative band `band` (q_is = 1).
///
/// Errors if `band` is outside 1..=grades.
pub fn qualifies(inst: &Instance, nurse: &Nurse, band: u32) -> Result<bool> {
    if band < 1 || band > inst.grades {
        return Err(Error::invalid_argument(format!(
            "band {band} out of range 1..={}",
            inst.grades
        )));
    }
    Ok(nurse.grade <= band)
}

/// True iff `pattern` matches `nurse`'s contract.
pub fn pattern_feasible(nurse: &Nurse, pattern: &ShiftPattern) -> bool {
    match nurse.contract() {
        Some(Contract::Day(d)) => pattern.night_total() == 0 && pattern.day_total() == d,
        Some(Contract::Night(n)) => pattern.day_total() == 0 && pattern.night_total() == n,
        Some(Contract::Combined(b)) => pattern.total() == b,
        None => false,
    }
}

/// The feasible set F(i): pattern ids matching the nurse's contract,
/// ascending by id. Errors if the set is empty.
pub fn feasible_set(inst: &Instance, nurse: &Nurse) -> Result<Vec<u32>> {
    let set: Vec<u32> = inst
        .patterns
        .iter()
        .filter(|pat| pattern_feasible(nurse, pat))
        .map(|pat| pat.id)
        .collect();
    if set.is_empty() {
        return Err(Error::InfeasibleNurse { nurse: nurse.id });
    }
    Ok(set)
}

/// Feasible sets for every nurse, in roster order.
pub fn feasible_sets(inst: &Instance) -> Result<Vec<Vec<u32>>> {
    inst.nurses.iter().map(|n| feasible_set(inst, n)).collect()
}

/// Outcome of [`validate`]; empty means the instance is well-formed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[String] {
        &self.violations
    }

    fn push(&mut self, msg: String) {
        self.violations.push(msg);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "valid")
        } else {
            write!(f, "{}", self.violations.join("\n"))
        }
    }
}

/// Check every structural and semantic invariant of an instance.
pub fn validate(inst: &Instance) -> ValidationReport {
    let mut report = ValidationReport::default();
    let m = inst.pattern_count();
    let p = inst.grades;

    if p < 1 {
        report.push("grade count p must be at least 1".into());
    }

    for (idx, pat) in inst.patterns.iter().enumerate() {
        let expect = idx as u32 + 1;
        if pat.id != expect {
            report.push(format!(
                "patterns[{idx}]: id {} out of sequence, expected {expect}",
                pat.id
            ));
        }
        if pat.cover.len() != SLOTS {
            report.push(format!(
                "pattern {}: cover has {} entries, expected {SLOTS}",
                pat.id,
                pat.cover.len()
            ));
            continue;
        }
        if pat.cover.iter().any(|&c| c > 1) {
            report.push(format!("pattern {}: cover entries must be 0 or 1", pat.id));
        }
        if pat.total() == 0 {
            report.push(format!("pattern {}: covers no slots", pat.id));
        }
    }

    for (idx, nurse) in inst.nurses.iter().enumerate() {
        let expect = idx as u32 + 1;
        if nurse.id != expect {
            report.push(format!(
                "nurses[{idx}]: id {} out of sequence, expected {expect}",
                nurse.id
            ));
        }
        if nurse.grade < 1 || nurse.grade > p {
            report.push(format!(
                "nurse {}: grade {} out of range 1..={p}",
                nurse.id, nurse.grade
            ));
        }
        if nurse.contract().is_none() {
            report.push(format!(
                "nurse {}: exactly one of days/nights/both must be positive (got {}/{}/{})",
                nurse.id, nurse.days, nurse.nights, nurse.both
            ));
        }
        if nurse.pref_cost.len() != m {
            report.push(format!(
                "nurse {}: pref_cost has {} entries, expected {m}",
                nurse.id,
                nurse.pref_cost.len()
            ));
        } else {
            for (j, &c) in nurse.pref_cost.iter().enumerate() {
                if !c.is_finite() || !(0.0..=MAX_PREF_COST).contains(&c) {
                    report.push(format!(
                        "nurse {}, pattern {}: pref cost {c} outside [0, {MAX_PREF_COST}]",
                        nurse.id,
                        j + 1
                    ));
                }
            }
        }
    }

    if inst.demand.len() != SLOTS {
        report.push(format!(
            "demand: has {} rows, expected {SLOTS}",
            inst.demand.len()
        ));
    } else {
        for (k, row) in inst.demand.iter().enumerate() {
            if row.len() != p as usize {
                report.push(format!("demand[{k}]: has {} bands, expected {p}", row.len()));
                continue;
            }
            for s in 0..row.len().saturating_sub(1) {
                if row[s] > row[s + 1] {
                    report.push(format!(
                        "demand slot {}: band {} requirement {} exceeds band {} requirement {} \
                         (cumulative demand must be band-monotone)",
                        k + 1,
                        s + 1,
                        row[s],
                        s + 2,
                        row[s + 1]
                    ));
                }
            }
        }
    }

    // Feasible sets only make sense once the catalog itself is well-formed.
    if report.is_valid() {
        for nurse in &inst.nurses {
            if feasible_set(inst, nurse).is_err() {
                report.push(format!("nurse {}: empty feasible set", nurse.id));
            }
        }
    }

    report
}

/// Validate and convert violations into an error.
pub fn ensure_valid(inst: &Instance) -> Result<()> {
    let report = validate(inst);
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidInstance {
            report: report.to_string(),
        })
    }
}

/// Parse an instance from its JSON representation.
///
/// Enforces document structure (dimensions, unknown fields); semantic
/// invariants are left to [`validate`].
pub fn load_instance<R: Read>(mut reader: R) -> Result<Instance> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    load_instance_str(&text)
}

pub fn load_instance_str(text: &str) -> Result<Instance> {
    let inst: Instance = serde_json::from_str(text).map_err(|e| Error::parse("document", e))?;
    check_dimensions(&inst)?;
    Ok(inst)
}

fn check_dimensions(inst: &Instance) -> Result<()> {
    let m = inst.pattern_count();
    for (idx, pat) in inst.patterns.iter().enumerate() {
        if pat.cover.len() != SLOTS {
            return Err(Error::parse(
                format!("patterns[{idx}].cover"),
                format!("expected {SLOTS} entries, found {}", pat.cover.len()),
            ));
        }
    }
    for (idx, nurse) in inst.nurses.iter().enumerate() {
        if nurse.pref_cost.len() != m {
            return Err(Error::parse(
                format!("nurses[{idx}].pref_cost"),
                format!("expected {m} entries, found {}", nurse.pref_cost.len()),
            ));
        }
    }
    if inst.demand.len() != SLOTS {
        return Err(Error::parse(
            "demand",
            format!("expected {SLOTS} rows, found {}", inst.demand.len()),
        ));
    }
    for (k, row) in inst.demand.iter().enumerate() {
        if row.len() != inst.grades as usize {
            return Err(Error::parse(
                format!("demand[{k}]"),
                format!("expected {} bands, found {}", inst.grades, row.len()),
            ));
        }
    }
    Ok(())
}

/// Serialize an instance in canonical form (stable field order, pretty,
/// trailing newline). Byte-identical for structurally equal instances.
pub fn save_instance<W: Write>(inst: &Instance, mut writer: W) -> Result<()> {
    writer.write_all(canonical_json(inst).as_bytes())?;
    Ok(())
}

pub fn canonical_json(inst: &Instance) -> String {
    let mut text = serde_json::to_string_pretty(inst).expect("instance serializes");
    text.push('\n');
    text
}
