use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::closed_form::excursion_max_tail;
use super::stats::{chi_square_independence, effective_size, ks_pvalue, ks_statistic, sign_test};
use crate::error::{domain, Error, Result};
use crate::excursion::Excursion;
use crate::rtree::{tree_from_excursion, ContourTree, PointRef};
use crate::sampler::{
    decompose, gamma_point_from_start, replica_rng, sample_excursion, sample_symmetric_pair,
    SamplerConfig,
};

/// Fewest qualifying draws the decomposition test accepts.
pub const MIN_QUALIFYING: usize = 500;
/// Stream offset for the controls' extra randomness.
const CONTROL_STREAM: u64 = 1 << 62;
const BATCH: usize = 256;

/// One draw of the decomposition conditioned on `ρ ≥ p0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionDraw {
    pub rho: f64,
    pub u: f64,
    pub hat_max: f64,
    /// Length of the qualifying part of the tree.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub p0: f64,
    pub n_qualifying: usize,
    pub n_effective: f64,
    pub replicas: usize,
    pub sampler: SamplerConfig,
    /// KS of ρ against the truncated density.
    pub ks_rho: f64,
    /// KS of `u` against Uniform[0, 1].
    pub ks_u: f64,
    /// Chi-square independence of binned ρ and `max ê_unit`.
    pub chi_rho_max: f64,
    /// KS of `max ê_unit` against the excursion maximum law.
    pub ks_hat_max: f64,
    /// Independence test on ρ against a shuffled copy of `max ê_unit`.
    pub control_shuffled: f64,
    /// Independence test on ρ against ρ plus small noise; must reject.
    pub control_dependent: f64,
}

/// Qualifying interval `[0, o*]` of offsets on each edge, where the
/// subtree beyond the point carries at least `p0` of the time.
///
/// Along one edge both ends of the straddling excursion move linearly, so
/// ρ is affine in the offset and two interior evaluations determine it.
fn qualifying_lengths(ct: &ContourTree, p0: f64) -> Result<Vec<f64>> {
    let tree = ct.weighted_tree().tree();
    let e = ct.excursion();
    let mut out = Vec::with_capacity(tree.edges().len());
    for (i, edge) in tree.edges().iter().enumerate() {
        let rho_at = |o: f64| -> Result<f64> {
            let (s_lo, a) = ct.first_up_crossing(PointRef::Edge { edge: i, offset: o })?;
            let gp = e.straddle(s_lo, a)?;
            Ok(gp.s_hi - gp.s_lo)
        };
        let (o1, o2) = (0.25 * edge.len, 0.75 * edge.len);
        let (r1, r2) = (rho_at(o1)?, rho_at(o2)?);
        let slope = (r2 - r1) / (o2 - o1);
        let r0 = r1 - slope * o1;
        let keep = if r0 < p0 {
            0.0
        } else if slope >= 0.0 {
            edge.len
        } else {
            ((p0 - r0) / slope).min(edge.len)
        };
        out.push(keep.max(0.0));
    }
    Ok(out)
}

/// Draws `(e, (s, a))` under the excursion law times length measure,
/// restricted to `ρ ≥ p0`, as a weighted sample.
pub fn decomposition_draw<R: Rng + ?Sized>(
    cfg: &SamplerConfig,
    p0: f64,
    rng: &mut R,
) -> Result<Option<DecompositionDraw>> {
    let e = sample_excursion(cfg, rng)?;
    let ct = ContourTree::new(&e, 1)?;
    let keep = qualifying_lengths(&ct, p0)?;
    let total: f64 = keep.iter().sum();
    if !(total > 0.0) {
        return Ok(None);
    }
    let mut target = rng.random::<f64>() * total;
    let mut pick = (keep.len() - 1, 0.0);
    for (i, k) in keep.iter().enumerate() {
        if target < *k {
            pick = (i, target);
            break;
        }
        target -= k;
    }
    let edge = ct.weighted_tree().tree().edges()[pick.0];
    let offset = pick.1.clamp(1e-9 * edge.len, edge.len * (1.0 - 1e-9));
    let (s_lo, a) = ct.first_up_crossing(PointRef::Edge {
        edge: pick.0,
        offset,
    })?;
    let gp = gamma_point_from_start(&e, s_lo, a, rng)?;
    let d = decompose(&e, &gp)?;
    Ok(Some(DecompositionDraw {
        rho: d.rho,
        u: d.u,
        hat_max: d.e_hat_unit.max(),
        weight: total,
    }))
}

/// Collects `target` qualifying draws, replica `i` using stream `i`;
/// batches keep the result independent of the thread count.
pub fn collect_draws(
    cfg: &SamplerConfig,
    p0: f64,
    target: usize,
) -> Result<(Vec<DecompositionDraw>, usize)> {
    let mut draws = Vec::with_capacity(target);
    let mut next = 0u64;
    let limit = 50 * target as u64 + 10_000;
    while draws.len() < target {
        if next >= limit {
            return Err(Error::TooFewSamples {
                got: draws.len(),
                need: target,
            });
        }
        let batch: Vec<Option<DecompositionDraw>> = (next..next + BATCH as u64)
            .into_par_iter()
            .map(|i| decomposition_draw(cfg, p0, &mut replica_rng(cfg.seed, i)))
            .collect::<Result<_>>()?;
        for (k, d) in batch.into_iter().enumerate() {
            if let Some(d) = d {
                if draws.len() < target {
                    draws.push(d);
                    if draws.len() == target {
                        next += k as u64 + 1;
                        return Ok((draws, next as usize));
                    }
                }
            }
        }
        next += BATCH as u64;
    }
    Ok((draws, next as usize))
}

/// CDF of ρ under the density `∝ 1/√((1−ρ)ρ³)` on `[p0, 1]`.
pub fn truncated_rho_cdf(p0: f64, r: f64) -> f64 {
    if r <= p0 {
        return 0.0;
    }
    if r >= 1.0 {
        return 1.0;
    }
    1.0 - ((1.0 - r) / r).sqrt() / ((1.0 - p0) / p0).sqrt()
}

/// Tests of the decomposition: law of ρ, uniformity of `u`, independence
/// of ρ and the rescaled excursion, and the law of its maximum.
pub fn distribution_test(
    cfg: &SamplerConfig,
    p0: f64,
    target: usize,
) -> Result<DistributionReport> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(domain("p0", p0, "(0, 1)"));
    }
    if target < MIN_QUALIFYING {
        return Err(Error::TooFewSamples {
            got: target,
            need: MIN_QUALIFYING,
        });
    }
    let (draws, replicas) = collect_draws(cfg, p0, target)?;
    let rho: Vec<f64> = draws.iter().map(|d| d.rho).collect();
    let u: Vec<f64> = draws.iter().map(|d| d.u).collect();
    let mx: Vec<f64> = draws.iter().map(|d| d.hat_max).collect();
    let w: Vec<f64> = draws.iter().map(|d| d.weight).collect();
    let n_eff = effective_size(&w);

    let ks_rho = ks_pvalue(ks_statistic(&rho, &w, |r| truncated_rho_cdf(p0, r)), n_eff);
    let ks_u = ks_pvalue(ks_statistic(&u, &w, |x| x.clamp(0.0, 1.0)), n_eff);
    let ks_hat_max = ks_pvalue(
        ks_statistic(&mx, &w, |x| {
            if x <= 0.0 {
                0.0
            } else {
                1.0 - excursion_max_tail(x)
            }
        }),
        n_eff,
    );
    let bins = 5;
    let chi_rho_max = chi_square_independence(&rho, &mx, &w, bins);

    let mut rng = replica_rng(cfg.seed, CONTROL_STREAM);
    let mut shuffled = mx.clone();
    shuffled.shuffle(&mut rng);
    let control_shuffled = chi_square_independence(&rho, &shuffled, &w, bins);
    let noisy: Vec<f64> = rho.iter().map(|r| r + 0.01 * rng.random::<f64>()).collect();
    let control_dependent = chi_square_independence(&rho, &noisy, &w, bins);

    Ok(DistributionReport {
        p0,
        n_qualifying: draws.len(),
        n_effective: n_eff,
        replicas,
        sampler: *cfg,
        ks_rho,
        ks_u,
        chi_rho_max,
        ks_hat_max,
        control_shuffled,
        control_dependent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeabilityReport {
    pub pairs: usize,
    pub rho_min: f64,
    pub sampler: SamplerConfig,
    pub force_equal_times: bool,
    pub p_max: f64,
    pub p_mean_dist: f64,
    pub p_longest_high: f64,
}

/// Length of the longest excursion above `max e / 2`.
pub fn longest_high_excursion(e: &Excursion) -> Result<f64> {
    let level = 0.5 * e.max();
    let mut best = 0.0f64;
    for s in e.level_starts(level) {
        let gp = e.straddle(s, level)?;
        best = best.max(gp.s_hi - gp.s_lo);
    }
    Ok(best)
}

/// Sign tests on `g(first) − g(second)` for pairs from the symmetric
/// measure, with `g` the maximum, the mean distance of the tree and the
/// longest high excursion. `force_equal_times` sets `v = u`.
pub fn exchangeability_test(
    cfg: &SamplerConfig,
    pairs: usize,
    rho_min: f64,
    force_equal_times: bool,
) -> Result<ExchangeabilityReport> {
    let diffs: Vec<[f64; 3]> = (0..pairs as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(cfg.seed, i);
            let mut pair = sample_symmetric_pair(cfg, rho_min, &mut rng)?;
            if force_equal_times {
                pair.second = pair.first.clone();
            }
            let g = |e: &Excursion| -> Result<[f64; 3]> {
                let t = tree_from_excursion(&e.scale_heights(2.0)?, cfg.weight_grid)?;
                Ok([e.max(), t.mean_dist(), longest_high_excursion(e)?])
            };
            let (a, b) = (g(&pair.first)?, g(&pair.second)?);
            Ok([a[0] - b[0], a[1] - b[1], a[2] - b[2]])
        })
        .collect::<Result<_>>()?;
    let col = |k: usize| diffs.iter().map(|d| d[k]).collect::<Vec<f64>>();
    Ok(ExchangeabilityReport {
        pairs,
        rho_min,
        sampler: *cfg,
        force_equal_times,
        p_max: sign_test(&col(0)),
        p_mean_dist: sign_test(&col(1)),
        p_longest_high: sign_test(&col(2)),
    })
}
