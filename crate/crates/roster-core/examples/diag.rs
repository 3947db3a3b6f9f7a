// scratch diagnostic
use roster_core::boa::{run_boa, BoaParams};
use roster_core::generator::{generate, GenSpec};
use roster_core::rules::{DecodeParams, Decoder, RuleId, RuleString};
use roster_core::schedule::{coverage, preference_cost, total_undercover};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() {
    for inst_seed in 0..3u64 {
        let gen = generate(&GenSpec::new(30, 3, inst_seed)).unwrap();
        let inst = &gen.instance;
        let decoder = Decoder::new(inst).unwrap();
        let params = DecodeParams::for_grades(3);
        let n = inst.nurse_count();

        let planted_tally = coverage(inst, &gen.planted).unwrap();
        println!("== instance seed {inst_seed}: m={} planted_uc={}", inst.pattern_count(), total_undercover(inst, &planted_tally));

        for (label, rule) in [("all-cover", RuleId::Cover), ("all-contrib", RuleId::Contribution)] {
            let rs = RuleString::new(vec![rule; n]);
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let (sched, fit) = decoder.decode_scored(&rs, &params, &mut rng).unwrap();
            let tally = coverage(inst, &sched).unwrap();
            let uc = total_undercover(inst, &tally);
            let cost = preference_cost(inst, &sched).unwrap();
            println!("  {label}: fitness={fit:.0} cost={cost:.0} undercover={uc}");
        }

        let started = Instant::now();
        let mut bp = BoaParams::defaults(3);
        bp.eval_budget = 10_000;
        bp.seed = 0;
        bp.decode.seed = 0;
        let result = run_boa(inst, &bp).unwrap();
        let tally = coverage(inst, &result.best_schedule).unwrap();
        let uc = total_undercover(inst, &tally);
        let cost = preference_cost(inst, &result.best_schedule).unwrap();
        println!("  BOA 10k evals: best={:.0} cost={cost:.0} undercover={uc} evals={} in {:?}", result.best_fitness, result.evaluations, started.elapsed());
    }
}
