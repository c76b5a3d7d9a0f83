pub mod active;
pub mod alphabet;
pub mod analysis;
pub mod fixtures;
pub mod machine;
pub mod passive;
pub mod records;
pub mod ssm;
pub mod trace_gen;
pub mod train;

pub use alphabet::{AlphabetError, AlphabetSpec, Side, Valuation};
pub use machine::{MachineError, MealyMachine, MooreMachine, Trace, Transducer};
pub use records::Status;
