//! Random excursions, CRT-like trees and the path decomposition.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::excursion::{insert, Excursion, GammaPoint};
use crate::rtree::{tree_from_excursion, ContourTree, WeightedTree};

/// Default number of weight atoms per tree.
pub const DEFAULT_WEIGHT_GRID: usize = 512;
/// Default lower truncation of the ρ density in symmetric pairs.
pub const DEFAULT_RHO_MIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Uniform Dyck path via the cycle lemma.
    Dyck,
    /// Gaussian random-walk bridge turned into an excursion by rotation at
    /// its minimum.
    BridgeVervaat,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dyck" => Ok(Method::Dyck),
            "bridge-vervaat" => Ok(Method::BridgeVervaat),
            other => Err(Error::UnknownId(other.to_string())),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Dyck => "dyck",
            Method::BridgeVervaat => "bridge-vervaat",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Half the number of lattice steps.
    pub steps: usize,
    pub weight_grid: usize,
    pub seed: u64,
    pub method: Method,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            steps: 1000,
            weight_grid: DEFAULT_WEIGHT_GRID,
            seed: 0,
            method: Method::Dyck,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(domain("steps", self.steps as f64, "[1, ∞)"));
        }
        if self.weight_grid < 1 {
            return Err(domain("weight_grid", self.weight_grid as f64, "[1, ∞)"));
        }
        Ok(())
    }
}

/// Generator for replica `index` under master seed `seed`: ChaCha8 keyed by
/// the seed, with the replica index as stream number.
pub fn replica_rng(seed: u64, index: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A unit-length excursion approximating the standard Brownian excursion.
pub fn sample_excursion<R: Rng + ?Sized>(cfg: &SamplerConfig, rng: &mut R) -> Result<Excursion> {
    cfg.validate()?;
    let n = cfg.steps;
    let len = 2 * n;
    let values = match cfg.method {
        Method::Dyck => dyck_heights(n, rng),
        Method::BridgeVervaat => vervaat_heights(len, rng),
    };
    let times = (0..=len).map(|i| i as f64 / len as f64).collect();
    Excursion::new(times, values)
}

fn dyck_heights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    // n up-steps and n + 1 down-steps; exactly one rotation makes every
    // proper prefix sum nonnegative, namely the one starting just after the
    // first minimum.
    let mut steps: Vec<i8> = std::iter::repeat_n(1, n)
        .chain(std::iter::repeat_n(-1, n + 1))
        .collect();
    steps.shuffle(rng);
    let mut sum = 0i64;
    let (mut min, mut arg) = (0i64, 0usize);
    for (i, s) in steps.iter().enumerate() {
        sum += *s as i64;
        if sum < min {
            min = sum;
            arg = i + 1;
        }
    }
    let scale = 1.0 / ((2 * n) as f64).sqrt();
    let mut out = Vec::with_capacity(2 * n + 1);
    let mut h = 0i64;
    out.push(0.0);
    for k in 0..2 * n {
        h += steps[(arg + k) % (2 * n + 1)] as i64;
        out.push(h as f64 * scale);
    }
    debug_assert_eq!(h, 0);
    out
}

fn vervaat_heights<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    let sd = 1.0 / (len as f64).sqrt();
    let mut walk = Vec::with_capacity(len + 1);
    walk.push(0.0f64);
    for _ in 0..len {
        let z: f64 = rng.sample(StandardNormal);
        walk.push(walk.last().unwrap() + sd * z);
    }
    let end = walk[len];
    let bridge: Vec<f64> = (0..len)
        .map(|i| walk[i] - end * i as f64 / len as f64)
        .collect();
    let mut arg = 0;
    for i in 1..len {
        if bridge[i] < bridge[arg] {
            arg = i;
        }
    }
    let base = bridge[arg];
    let mut out: Vec<f64> = (0..len).map(|k| bridge[(arg + k) % len] - base).collect();
    out.push(0.0);
    out
}

/// `T_{2e}` for `e` from [`sample_excursion`], with `weight_grid` atoms.
pub fn sample_crt<R: Rng + ?Sized>(cfg: &SamplerConfig, rng: &mut R) -> Result<WeightedTree> {
    let e = sample_excursion(cfg, rng)?;
    tree_from_excursion(&e.scale_heights(2.0)?, cfg.weight_grid)
}

/// A point of `Γ_e` under `ds ⊗ da / (s̄ − s̲)`, normalized by the total
/// length of `T_e`.
pub fn sample_gamma_point<R: Rng + ?Sized>(e: &Excursion, rng: &mut R) -> Result<GammaPoint> {
    let ct = ContourTree::new(e, 1)?;
    sample_gamma_point_in(&ct, rng)
}

/// As [`sample_gamma_point`] on a prebuilt contour tree.
pub fn sample_gamma_point_in<R: Rng + ?Sized>(ct: &ContourTree, rng: &mut R) -> Result<GammaPoint> {
    let p = ct.weighted_tree().tree().sample_length_point(rng)?;
    let (s_lo, a) = ct.first_up_crossing(p)?;
    gamma_point_from_start(ct.excursion(), s_lo, a, rng)
}

/// Given the start `s_lo` of an excursion above `a`, draws `s` uniformly
/// inside it.
pub(crate) fn gamma_point_from_start<R: Rng + ?Sized>(
    e: &Excursion,
    s_lo: f64,
    a: f64,
    rng: &mut R,
) -> Result<GammaPoint> {
    let span = e.straddle(s_lo, a)?;
    let s_hi = span.s_hi;
    let s = s_lo + rng.random::<f64>() * (s_hi - s_lo);
    let s = if s > s_lo { s } else { 0.5 * (s_lo + s_hi) };
    Ok(GammaPoint { s, a, s_lo, s_hi })
}

/// The pieces of the decomposition at a point of `Γ_e`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// `ζ(ê)` as a fraction of `ζ(e)`.
    pub rho: f64,
    pub e_hat_unit: Excursion,
    pub e_check_unit: Excursion,
    /// `s̲ / ζ(ě)`.
    pub u: f64,
}

/// Splits a unit-length `e` at `gp` into `ρ`, the two unit-length
/// rescalings and the relative insertion time.
pub fn decompose(e: &Excursion, gp: &GammaPoint) -> Result<Decomposition> {
    let (hat, check) = e.excise(gp)?;
    let zeta = e.zeta();
    let rho = hat.zeta() / zeta;
    let u = (gp.s_lo / check.zeta()).clamp(0.0, 1.0);
    Ok(Decomposition {
        rho,
        e_hat_unit: hat.normalize(),
        e_check_unit: check.normalize(),
        u,
    })
}

/// Draws `ρ` from the density `∝ 1/√((1−ρ)ρ³)` restricted to `[p0, 1]`.
///
/// With `q(ρ) = √((1−ρ)/ρ)` the CDF is `1 − q(ρ)/q(p0)`, which inverts in
/// closed form.
pub fn sample_rho<R: Rng + ?Sized>(p0: f64, rng: &mut R) -> Result<f64> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(domain("p0", p0, "(0, 1)"));
    }
    let q0 = ((1.0 - p0) / p0).sqrt();
    let u: f64 = rng.random();
    let q = (1.0 - u) * q0;
    Ok((1.0 / (1.0 + q * q)).clamp(p0, 1.0 - f64::EPSILON))
}

/// Output of [`sample_symmetric_pair`], with the shared randomness.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPair {
    pub first: Excursion,
    pub second: Excursion,
    pub u: f64,
    pub v: f64,
    pub rho: f64,
    pub rho_min: f64,
}

/// `(e°(e′, e″, u, ρ), e°(e′, e″, v, ρ))` with independent `e′, e″`,
/// uniform `u, v` and `ρ` from the truncated density.
pub fn sample_symmetric_pair<R: Rng + ?Sized>(
    cfg: &SamplerConfig,
    rho_min: f64,
    rng: &mut R,
) -> Result<SymmetricPair> {
    let e1 = sample_excursion(cfg, rng)?;
    let e2 = sample_excursion(cfg, rng)?;
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    let rho = sample_rho(rho_min, rng)?;
    Ok(SymmetricPair {
        first: insert(&e1, &e2, u, rho)?,
        second: insert(&e1, &e2, v, rho)?,
        u,
        v,
        rho,
        rho_min,
    })
}
