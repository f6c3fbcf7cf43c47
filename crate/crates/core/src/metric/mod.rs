//! Distances between finite metric measure spaces.

mod gh;
mod ghwt;
mod prohorov;
mod space;

pub use gh::{
    gh, gh_lower_bound, is_eps_isometry, isometry_from_correspondence, GhReport, GH_EXACT_MAX,
};
pub use ghwt::{d_ghwt_bounds, delta_ghwt, DeltaReport};
pub use prohorov::prohorov;
pub use space::{
    distortion, map_distortion, AtomicMeasure, Correspondence, FiniteMetricSpace, WeightedSpace,
    METRIC_TOL,
};

use crate::error::Result;

/// `(d_P(f_*μ, f_*ν), d_P(μ, ν) + dis f)` for a map `f: X → Y`.
pub fn pushforward_prohorov_check(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    f: &[usize],
    mu: &AtomicMeasure,
    nu: &AtomicMeasure,
) -> Result<(f64, f64)> {
    let lhs = prohorov(y, &mu.pushforward(f, y.len()), &nu.pushforward(f, y.len()))?;
    let rhs = prohorov(x, mu, nu)? + map_distortion(x, y, f);
    Ok((lhs, rhs))
}
