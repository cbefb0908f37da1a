//! A meromorphic function of logarithmic order `lambda in (1, 2)` with no
//! Julia directions: disk geometry, a log-space product evaluator, the
//! Nevanlinna characteristic and a sampled direction scanner.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristic;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod logspace;
pub mod product;
mod quadrature;
pub mod scanner;

pub use characteristic::{
    characteristic, characteristic_grid, counting_integrated, log_convergence_exponent,
    log_order_fit, proximity, CharacteristicSample, Counted, OrderFit,
};
pub use error::{Error, Result};
pub use geometry::{
    compute_n0, disjointness_holds, disjointness_margin, level_schedule, moebius,
    DisjointnessCertificate, LevelDisk,
};
pub use logspace::LogComplex;
pub use product::{evaluate, ConstructionSpec, EvalResult};
pub use scanner::{
    full_scan, in_exceptional, omitted_floor, scan_direction, DirectionReport, Regime,
};
