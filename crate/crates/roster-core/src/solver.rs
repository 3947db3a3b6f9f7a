//! Result types and evaluation glue shared by both solvers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::rules::{DecodeParams, Decoder, RuleString};
use crate::schedule::Schedule;

/// Per-iteration progress snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationStats {
    pub iteration: u32,
    /// Best-ever fitness after this iteration (non-increasing).
    pub best: f64,
    /// Mean fitness of the population (BOA) or the iteration's solution
    /// fitness (ACS).
    pub mean: f64,
}

/// Outcome of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub best_fitness: f64,
    pub best_schedule: Schedule,
    pub best_rules: RuleString,
    pub history: Vec<IterationStats>,
    /// Fitness evaluations consumed.
    pub evaluations: u64,
}

/// Decode and score one rule string. Every decode within a run uses the
/// same fixed stream seed (`decode_params.seed`), so the genotype-to-
/// phenotype map is a pure function of (instance, rule string, params).
/// The exhaustive rule-string oracle run with the same seed therefore
/// bounds every solver run from below, and evaluation results cannot
/// depend on evaluation order.
pub(crate) fn evaluate_seeded(
    decoder: &Decoder,
    decode_params: &DecodeParams,
    rs: &RuleString,
) -> Result<(Schedule, f64)> {
    let mut stream = ChaCha8Rng::seed_from_u64(decode_params.seed);
    decoder.decode_scored(rs, decode_params, &mut stream)
}
