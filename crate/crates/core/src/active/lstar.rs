//! L* for Mealy machines with suffix-closed counterexample handling.

use crate::machine::{MealyMachine, Transducer};
use crate::records::Status;

use super::oracle::{
    find_counterexample_counted, Budget, EqOracleConfig, Exhausted, QueryStats, Sul,
};
use super::table::ObservationTable;

#[derive(Debug, Clone)]
pub struct LStarOutcome {
    /// Final hypothesis; on failure the last complete one, if any.
    pub hypothesis: Option<MealyMachine>,
    pub stats: QueryStats,
    pub status: Status,
    /// State count of every hypothesis submitted to the equivalence oracle.
    pub hypothesis_sizes: Vec<usize>,
    /// Membership answers for replay checks.
    pub answers: Vec<(Vec<usize>, Vec<crate::alphabet::Valuation>)>,
}

pub fn lstar_learn<M: Transducer + ?Sized>(sul: &M, cfg: &EqOracleConfig) -> LStarOutcome {
    lstar_learn_with_budget(sul, cfg, Budget::default())
}

/// Equivalence round `r` uses seed `cfg.seed + r`.
pub fn lstar_learn_with_budget<M: Transducer + ?Sized>(
    sul: &M,
    cfg: &EqOracleConfig,
    budget: Budget,
) -> LStarOutcome {
    let mut oracle = Sul::new(sul, budget);
    let mut table = ObservationTable::new(sul.num_letters());
    let mut sizes = Vec::new();
    let mut last = None;
    let status = match run(&mut oracle, &mut table, cfg, &mut sizes, &mut last) {
        Ok(()) => Status::Success,
        Err(Exhausted) => Status::Failed,
    };
    let mut answers: Vec<_> = oracle
        .answers()
        .map(|(w, o)| (w.clone(), o.clone()))
        .collect();
    answers.sort();
    LStarOutcome {
        hypothesis: last,
        stats: oracle.stats(),
        status,
        hypothesis_sizes: sizes,
        answers,
    }
}

fn run<M: Transducer + ?Sized>(
    oracle: &mut Sul<'_, M>,
    table: &mut ObservationTable,
    cfg: &EqOracleConfig,
    sizes: &mut Vec<usize>,
    last: &mut Option<MealyMachine>,
) -> Result<(), Exhausted> {
    let alphabet = oracle.machine().alphabet().clone();
    for round in 0u64.. {
        loop {
            table.fill(oracle)?;
            if let Some(w) = table.find_unclosed() {
                table.add_prefix(w);
                continue;
            }
            if let Some(e) = table.find_inconsistency() {
                table.add_suffix(e);
                continue;
            }
            break;
        }
        let hyp = table
            .hypothesis(&alphabet)
            .expect("closed table yields a valid machine");
        sizes.push(hyp.num_states());
        oracle.check_budget()?;
        let eq = EqOracleConfig {
            seed: cfg.seed.wrapping_add(round),
            ..*cfg
        };
        let (ce, walks) = find_counterexample_counted(oracle.machine(), &hyp, &eq);
        let stats = oracle.stats_mut();
        stats.equivalence_queries += 1;
        stats.equivalence_walks += walks;
        *last = Some(hyp);
        match ce {
            None => return Ok(()),
            Some(ce) => {
                table.add_counterexample(&ce);
            }
        }
    }
    unreachable!("round counter is unbounded")
}
