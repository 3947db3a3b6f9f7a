//! Run records, their CSV form, and the aggregated category table.
//!
//! CSV columns: instance, algo, seed, fitness, feasible, optimum,
//! category, ms, evals. The optimum and ms fields may be empty; `solve`
//! leaves ms empty so its CSV output is a pure function of the command
//! line (wall time goes to stderr instead).

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;

use crate::error::{Error, Result};

/// Result quality relative to a known optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Optimal,
    /// Within three units above the optimum (boundary inclusive).
    WithinThree,
    FeasibleNonOptimal,
    Infeasible,
    /// Feasible, but no optimum was available to compare against.
    Feasible,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Optimal => "optimal",
            Category::WithinThree => "within-3",
            Category::FeasibleNonOptimal => "feasible-non-optimal",
            Category::Infeasible => "infeasible",
            Category::Feasible => "feasible",
        }
    }

    pub fn parse(text: &str) -> Option<Category> {
        match text {
            "optimal" => Some(Category::Optimal),
            "within-3" => Some(Category::WithinThree),
            "feasible-non-optimal" => Some(Category::FeasibleNonOptimal),
            "infeasible" => Some(Category::Infeasible),
            "feasible" => Some(Category::Feasible),
            _ => None,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Pure categorization of a run outcome.
pub fn categorize(fitness: f64, feasible: bool, optimum: Option<f64>) -> Category {
    if !feasible {
        return Category::Infeasible;
    }
    match optimum {
        None => Category::Feasible,
        Some(opt) => {
            let diff = fitness - opt;
            if diff <= 0.0 {
                Category::Optimal
            } else if diff <= 3.0 {
                Category::WithinThree
            } else {
                Category::FeasibleNonOptimal
            }
        }
    }
}

/// One solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub algo: String,
    pub seed: u64,
    pub fitness: f64,
    pub feasible: bool,
    pub optimum: Option<f64>,
    pub category: Category,
    /// Wall time when supplied by an external source; never filled by
    /// `solve`, which keeps its CSV reproducible and reports time on
    /// stderr.
    pub wall_ms: Option<u64>,
    pub evals: u64,
}

impl RunRecord {
    /// Build a record, deriving the category.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        instance: impl Into<String>,
        algo: impl Into<String>,
        seed: u64,
        fitness: f64,
        feasible: bool,
        optimum: Option<f64>,
        wall_ms: Option<u64>,
        evals: u64,
    ) -> Self {
        RunRecord {
            instance: instance.into(),
            algo: algo.into(),
            seed,
            fitness,
            feasible,
            optimum,
            category: categorize(fitness, feasible, optimum),
            wall_ms,
            evals,
        }
    }
}

pub const CSV_HEADER: [&str; 9] = [
    "instance", "algo", "seed", "fitness", "feasible", "optimum", "category", "ms", "evals",
];

fn float_field(value: f64) -> String {
    format!("{value}")
}

fn record_fields(record: &RunRecord) -> [String; 9] {
    [
        record.instance.clone(),
        record.algo.clone(),
        record.seed.to_string(),
        float_field(record.fitness),
        record.feasible.to_string(),
        record.optimum.map(float_field).unwrap_or_default(),
        record.category.to_string(),
        record.wall_ms.map(|ms| ms.to_string()).unwrap_or_default(),
        record.evals.to_string(),
    ]
}

/// CSV text with a header row.
pub fn to_csv(records: &[RunRecord]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER).expect("in-memory write");
    write_rows(&mut writer, records);
    String::from_utf8(writer.into_inner().expect("flushed")).expect("utf-8")
}

/// CSV rows only, for appending to an existing file.
pub fn to_csv_rows(records: &[RunRecord]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    write_rows(&mut writer, records);
    String::from_utf8(writer.into_inner().expect("flushed")).expect("utf-8")
}

fn write_rows(writer: &mut csv::Writer<Vec<u8>>, records: &[RunRecord]) {
    for record in records {
        writer.write_record(record_fields(record)).expect("in-memory write");
    }
    writer.flush().expect("in-memory flush");
}

/// Parse run records, checking per row that the stored category is the
/// one implied by (fitness, feasible, optimum). `source` labels errors,
/// which carry 1-based line numbers (the header is line 1).
pub fn parse_csv<R: Read>(reader: R, source: &str) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    {
        let headers = rdr
            .headers()
            .map_err(|e| Error::parse(source, e))?;
        let expected: Vec<&str> = CSV_HEADER.to_vec();
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::parse(
                format!("{source}:1"),
                format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>()),
            ));
        }
    }

    let mut records = Vec::new();
    for (idx, row) in rdr.records().enumerate() {
        let line = idx + 2;
        let at = || format!("{source}:{line}");
        let row = row.map_err(|e| Error::parse(at(), e))?;
        if row.len() != CSV_HEADER.len() {
            return Err(Error::parse(
                at(),
                format!("expected {} fields, found {}", CSV_HEADER.len(), row.len()),
            ));
        }
        let field = |i: usize| row.get(i).unwrap_or("").trim();

        let seed: u64 = field(2)
            .parse()
            .map_err(|e| Error::parse(at(), format!("seed: {e}")))?;
        let fitness: f64 = field(3)
            .parse()
            .map_err(|e| Error::parse(at(), format!("fitness: {e}")))?;
        let feasible: bool = field(4)
            .parse()
            .map_err(|e| Error::parse(at(), format!("feasible: {e}")))?;
        let optimum: Option<f64> = if field(5).is_empty() {
            None
        } else {
            Some(
                field(5)
                    .parse()
                    .map_err(|e| Error::parse(at(), format!("optimum: {e}")))?,
            )
        };
        let category = Category::parse(field(6))
            .ok_or_else(|| Error::parse(at(), format!("unknown category {:?}", field(6))))?;
        let expected = categorize(fitness, feasible, optimum);
        if category != expected {
            return Err(Error::parse(
                at(),
                format!(
                    "category {category} inconsistent with fitness/feasible/optimum (expected {expected})"
                ),
            ));
        }
        let wall_ms: Option<u64> = if field(7).is_empty() {
            None
        } else {
            Some(
                field(7)
                    .parse()
                    .map_err(|e| Error::parse(at(), format!("ms: {e}")))?,
            )
        };
        let evals: u64 = field(8)
            .parse()
            .map_err(|e| Error::parse(at(), format!("evals: {e}")))?;

        records.push(RunRecord {
            instance: field(0).to_string(),
            algo: field(1).to_string(),
            seed,
            fitness,
            feasible,
            optimum,
            category,
            wall_ms,
            evals,
        });
    }
    Ok(records)
}

/// Aggregated counts for one (instance, algorithm) group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub instance: String,
    pub algo: String,
    pub runs: usize,
    pub optimal: usize,
    pub within_three: usize,
    pub feasible_non_optimal: usize,
    pub infeasible: usize,
    /// Feasible rows that had no optimum to compare against.
    pub feasible_unknown_optimum: usize,
    pub best: f64,
    pub mean: f64,
}

/// Group records by (instance, algo), sorted for stable output.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, String), Vec<&RunRecord>> = BTreeMap::new();
    for record in records {
        groups
            .entry((record.instance.clone(), record.algo.clone()))
            .or_default()
            .push(record);
    }
    groups
        .into_iter()
        .map(|((instance, algo), group)| {
            let mut row = SummaryRow {
                instance,
                algo,
                runs: group.len(),
                optimal: 0,
                within_three: 0,
                feasible_non_optimal: 0,
                infeasible: 0,
                feasible_unknown_optimum: 0,
                best: f64::INFINITY,
                mean: 0.0,
            };
            for record in &group {
                match record.category {
                    Category::Optimal => row.optimal += 1,
                    Category::WithinThree => row.within_three += 1,
                    Category::FeasibleNonOptimal => row.feasible_non_optimal += 1,
                    Category::Infeasible => row.infeasible += 1,
                    Category::Feasible => row.feasible_unknown_optimum += 1,
                }
                row.best = row.best.min(record.fitness);
                row.mean += record.fitness;
            }
            row.mean /= group.len() as f64;
            row
        })
        .collect()
}

/// Plain-text table of the summary, one line per (instance, algo) group.
pub fn render_table(rows: &[SummaryRow]) -> String {
    let header = [
        "instance", "algo", "runs", "optimal", "within-3", "feas-non-opt", "infeasible",
        "feasible", "best", "mean",
    ];
    let mut cells: Vec<[String; 10]> = vec![header.map(str::to_string)];
    for row in rows {
        cells.push([
            row.instance.clone(),
            row.algo.clone(),
            row.runs.to_string(),
            row.optimal.to_string(),
            row.within_three.to_string(),
            row.feasible_non_optimal.to_string(),
            row.infeasible.to_string(),
            row.feasible_unknown_optimum.to_string(),
            format!("{:.2}", row.best),
            format!("{:.2}", row.mean),
        ]);
    }

    let mut widths = [0usize; 10];
    for row in &cells {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }

    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .zip(widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    let degraded: usize = rows.iter().map(|r| r.feasible_unknown_optimum).sum();
    if degraded > 0 {
        out.push_str(&format!(
            "note: {degraded} record(s) carry no optimum; their categories degrade to feasible/infeasible\n"
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categorize_respects_the_three_unit_boundary() {
        assert_eq!(categorize(10.0, true, Some(10.0)), Category::Optimal);
        assert_eq!(categorize(13.0, true, Some(10.0)), Category::WithinThree);
        assert_eq!(categorize(14.0, true, Some(10.0)), Category::FeasibleNonOptimal);
        assert_eq!(categorize(10.5, true, Some(10.0)), Category::WithinThree);
        assert_eq!(categorize(400.0, false, Some(10.0)), Category::Infeasible);
        assert_eq!(categorize(400.0, false, None), Category::Infeasible);
        assert_eq!(categorize(10.0, true, None), Category::Feasible);
    }

    fn sample_records() -> Vec<RunRecord> {
        vec![
            RunRecord::new("tiny", "boa", 1, 0.0, true, Some(0.0), None, 400),
            RunRecord::new("tiny", "boa", 2, 3.0, true, Some(0.0), Some(12), 400),
            RunRecord::new("tiny", "acs", 1, 4.0, true, Some(0.0), None, 501),
            RunRecord::new("tiny", "acs", 2, 430.0, false, Some(0.0), None, 501),
            RunRecord::new("ward", "boa", 1, 55.0, true, None, None, 9000),
        ]
    }

    #[test]
    fn csv_round_trip_preserves_records() {
        let records = sample_records();
        let text = to_csv(&records);
        let parsed = parse_csv(text.as_bytes(), "mem").unwrap();
        assert_eq!(parsed, records);
    }

    #[test]
    fn csv_rows_have_no_header() {
        let records = sample_records();
        let rows = to_csv_rows(&records);
        assert!(!rows.contains("instance,algo"));
        let full = to_csv(&records);
        assert!(full.ends_with(&rows));
    }

    #[test]
    fn parse_names_the_offending_row() {
        let text = "instance,algo,seed,fitness,feasible,optimum,category,ms,evals\n\
                    tiny,boa,1,not-a-number,true,,feasible,,10\n";
        match parse_csv(text.as_bytes(), "runs.csv") {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "runs.csv:2"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_inconsistent_categories() {
        let text = "instance,algo,seed,fitness,feasible,optimum,category,ms,evals\n\
                    tiny,boa,1,5,true,0,optimal,,10\n";
        match parse_csv(text.as_bytes(), "runs.csv") {
            Err(Error::Parse { path, detail }) => {
                assert_eq!(path, "runs.csv:2");
                assert!(detail.contains("inconsistent"), "{detail}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_header_mismatch() {
        let text = "a,b\n1,2\n";
        assert!(parse_csv(text.as_bytes(), "runs.csv").is_err());
    }

    #[test]
    fn summary_counts_categories_per_group() {
        let rows = summarize(&sample_records());
        assert_eq!(rows.len(), 3, "groups sorted by (instance, algo)");

        let acs = &rows[0];
        assert_eq!((acs.instance.as_str(), acs.algo.as_str()), ("tiny", "acs"));
        assert_eq!(acs.runs, 2);
        assert_eq!(acs.feasible_non_optimal, 1);
        assert_eq!(acs.infeasible, 1);
        assert_eq!(acs.best, 4.0);
        assert_eq!(acs.mean, 217.0);

        let boa = &rows[1];
        assert_eq!((boa.instance.as_str(), boa.algo.as_str()), ("tiny", "boa"));
        assert_eq!(boa.optimal, 1);
        assert_eq!(boa.within_three, 1);

        let ward = &rows[2];
        assert_eq!(ward.feasible_unknown_optimum, 1);
    }

    #[test]
    fn twenty_optimal_runs_summarize_cleanly() {
        let records: Vec<RunRecord> = (0..20)
            .map(|seed| RunRecord::new("tiny", "boa", seed, 0.0, true, Some(0.0), None, 100))
            .collect();
        let rows = summarize(&records);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].optimal, 20);
        assert_eq!(rows[0].within_three, 0);
        assert_eq!(rows[0].feasible_non_optimal, 0);
        assert_eq!(rows[0].infeasible, 0);
    }

    #[test]
    fn report_is_stable_under_a_csv_round_trip() {
        let records = sample_records();
        let reparsed = parse_csv(to_csv(&records).as_bytes(), "mem").unwrap();
        assert_eq!(summarize(&reparsed), summarize(&records));
    }

    #[test]
    fn table_notes_degraded_records() {
        let table = render_table(&summarize(&sample_records()));
        assert!(table.contains("note: 1 record(s)"), "{table}");
        let no_degraded = summarize(&sample_records()[..4]);
        assert!(!render_table(&no_degraded).contains("note:"));
    }
}
