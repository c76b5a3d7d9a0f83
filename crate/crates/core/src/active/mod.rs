//! Active learning of Mealy machines with L*.

pub mod lstar;
pub mod oracle;
pub mod table;

pub use lstar::{lstar_learn, lstar_learn_with_budget, LStarOutcome};
pub use oracle::{find_counterexample, Budget, EqOracleConfig, QueryStats, Sul};
pub use table::ObservationTable;
