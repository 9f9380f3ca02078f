//! Self-checking: seeded instance generators, an exhaustive distance oracle,
//! and named suites that replay each construction and recompute its claims.

pub mod generate;
pub mod oracle;
pub mod suites;

pub use generate::{gen_isometry, gen_space, gen_subspace, gen_vector, InstanceSeed};
pub use oracle::{brute_force_distance, OracleConfig, OracleOutcome};
pub use suites::{run_all, run_suite, CaseFailure, SuiteReport, SUITES};
