//! Policy values, surplus decomposition and Monte Carlo verification for the
//! alive/dead Markov model of a single life insurance contract.
//!
//! Everything is deterministic given its inputs; curves are evaluated on a
//! uniform mesh, Thiele's equation is integrated with classical RK4 and
//! integrals use Simpson's rule on the same mesh.

pub mod bonus;
pub mod cli;
pub mod curves;
pub mod error;
pub mod grid;
pub mod paidup;
pub mod simulate;
pub mod surplus;
pub mod thiele;

pub use curves::{cumulative, eval_rate, factors, Factors, RateCurve, TechnicalBasis, DEFAULT_STEP};
pub use error::{Error, Result};
pub use thiele::{
    activum, activum_curve, equivalence_premium, passivum, passivum_curve, solve_backward, solve_forward,
    ActuarialBasis, CashflowSpec, Curve,
};
pub use surplus::{
    initial_surplus, loading_split, modeled_surplus, systematic_rate, total_surplus_epv, SurplusReport,
    SystematicMode, SystematicRate,
};
pub use simulate::{monte_carlo, path_surplus, sample_lifetime, MCReport, PathResult, Scenario};
pub use paidup::{
    paidup_factor, paidup_premium_decomposition, paidup_value, second_order_paidup_premium, PaidUpOrder,
    PaidUpState,
};
pub use bonus::{
    bonus_accum, bonus_modeled_surplus, bonus_passivum, bonus_policy_value, bonus_systematic, declared_accumulation,
    BonusPair, BonusRate,
    BonusSurplusReport,
};
