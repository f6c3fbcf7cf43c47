//! Numerical checks of the excursion and tree identities.

pub mod closed_form;
pub mod mc;
pub mod stats;
pub mod structure;

pub use closed_form::{closed_form, riemann_zeta, FormulaId, Params};
pub use mc::{
    mc_estimate, mc_samples, path_functional, richardson, EstimateReport, RichardsonReport,
    Verdict, Z_THRESHOLD,
};
pub use structure::{
    distribution_test, exchangeability_test, DistributionReport, ExchangeabilityReport,
    MIN_QUALIFYING,
};
