//! Certificates about orthogonal projections of finite unions of balls.

mod chain;
mod components;
mod lambda;
mod verify;

pub use chain::extract_chain;
pub use components::{components_of_ball_union, ComponentPartition, DisjointSet};
pub use lambda::{
    dyadic_grid_step, lambda_at_subspace, lambda_bruteforce, lambda_certified, lambda_certified_with,
    LambdaBracket, LambdaEstimate, Stop, DEFAULT_CELL_BUDGET,
};
pub use verify::{
    verify_component_bound, verify_zk, ComponentReport, ConditionCheck, SampleRecord, SubspaceWitness,
    VerifyMode, VerifyOptions, ZkCertificate, ZkReport,
};
