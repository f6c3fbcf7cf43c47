use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::closed_form::{closed_form, param, FormulaId, Params};
use super::stats::mean_and_se;
use crate::error::{Error, Result};
use crate::excursion::Excursion;
use crate::rtree::tree_from_excursion;
use crate::sampler::{replica_rng, sample_excursion, SamplerConfig};

/// Default acceptance threshold on `|z|`.
pub const Z_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(&self) -> bool {
        *self == Verdict::Pass
    }
}

/// A Monte Carlo estimate against its closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub id: FormulaId,
    pub params: Params,
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub sampler: SamplerConfig,
    pub theory: f64,
    pub z_score: f64,
    pub z_threshold: f64,
    pub verdict: Verdict,
    /// Wall-clock seconds; only filled in on request so reports stay
    /// reproducible.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runtime_secs: Option<f64>,
}

/// The exact per-path value whose mean under the excursion law is the
/// closed form.
pub fn path_functional(id: FormulaId, v: f64, e: &Excursion, weight_grid: usize) -> Result<f64> {
    let above =
        move |x: f64| move |_m: f64, h: f64, len: f64| (len - (x - h).max(0.0)).clamp(0.0, len);
    let mass_over = move |p: f64| move |m: f64, _h: f64, len: f64| if m > p { len } else { 0.0 };
    Ok(match id {
        FormulaId::ExcursionMaxTail => f64::from(u8::from(e.max() > v)),
        FormulaId::StraddleHeightTail => {
            tree_from_excursion(e, 1)?.rooted_campbell_integral(above(v))?
        }
        FormulaId::StraddleLengthTail | FormulaId::RhoDensityNorm => {
            tree_from_excursion(e, weight_grid)?.rooted_campbell_integral(mass_over(v))?
        }
        FormulaId::TrimLengthMean => crt(e, weight_grid)?.campbell_integral(above(v)),
        FormulaId::MassTailMean => crt(e, weight_grid)?.campbell_integral(mass_over(v)),
        FormulaId::MassBetaMean => {
            crt(e, weight_grid)?.campbell_integral(|m, _h, len| len * m.powf(v))
        }
        FormulaId::HeightAlphaMean => crt(e, weight_grid)?.campbell_integral(|_m, h, len| {
            ((h + len).powf(v + 1.0) - h.powf(v + 1.0)) / (v + 1.0)
        }),
    })
}

fn crt(e: &Excursion, m: usize) -> Result<crate::rtree::WeightedTree> {
    tree_from_excursion(&e.scale_heights(2.0)?, m)
}

/// Per-replica values of a functional; replica `i` draws from stream `i`.
pub fn mc_samples(
    id: FormulaId,
    params: &Params,
    cfg: &SamplerConfig,
    samples: usize,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let v = param(id, params)?;
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(cfg.seed, i);
            let e = sample_excursion(cfg, &mut rng)?;
            path_functional(id, v, &e, cfg.weight_grid)
        })
        .collect()
}

/// Monte Carlo estimate over `samples` sampled paths, with the inner
/// integral over the tree done exactly.
pub fn mc_estimate(
    id: FormulaId,
    params: &Params,
    cfg: &SamplerConfig,
    samples: usize,
) -> Result<EstimateReport> {
    if samples < 2 {
        return Err(Error::TooFewSamples {
            got: samples,
            need: 2,
        });
    }
    let theory = closed_form(id, params)?;
    let xs = mc_samples(id, params, cfg, samples)?;
    Ok(report(id, *params, cfg, &xs, theory))
}

fn report(
    id: FormulaId,
    params: Params,
    cfg: &SamplerConfig,
    xs: &[f64],
    theory: f64,
) -> EstimateReport {
    let (estimate, std_error) = mean_and_se(xs);
    let z_score = if std_error > 0.0 {
        (estimate - theory) / std_error
    } else if estimate == theory {
        0.0
    } else {
        f64::INFINITY
    };
    EstimateReport {
        id,
        params,
        estimate,
        std_error,
        n_samples: xs.len(),
        sampler: *cfg,
        theory,
        z_score,
        z_threshold: Z_THRESHOLD,
        verdict: Verdict::from_bool(z_score.abs() <= Z_THRESHOLD),
        runtime_secs: None,
    }
}

/// Two resolutions of the same estimate combined under a power-law bias
/// model `b(n) ∝ n^{−rate}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RichardsonReport {
    pub coarse: f64,
    pub fine: f64,
    pub rate: f64,
    /// Bias of the fine estimate implied by the model.
    pub bias_allowance: f64,
    pub extrapolated: f64,
    pub theory: f64,
    /// Whether the fine estimate is closer to theory than the coarse one.
    pub moves_toward_theory: bool,
}

/// Richardson comparison of runs at `n` and `2n` steps.
pub fn richardson(coarse: &EstimateReport, fine: &EstimateReport, rate: f64) -> RichardsonReport {
    let factor = 2f64.powf(rate) - 1.0;
    let bias = (coarse.estimate - fine.estimate) / factor;
    RichardsonReport {
        coarse: coarse.estimate,
        fine: fine.estimate,
        rate,
        bias_allowance: bias.abs(),
        extrapolated: fine.estimate - bias,
        theory: fine.theory,
        moves_toward_theory: (fine.estimate - fine.theory).abs()
            <= (coarse.estimate - coarse.theory).abs(),
    }
}
