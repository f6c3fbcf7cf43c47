use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{domain, Error, Result};

/// Relative size at which series terms stop being added.
const SERIES_REL: f64 = 1e-14;
const SERIES_MAX_TERMS: usize = 1_000_000;

/// Formulas with a closed form and a Monte Carlo counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    ExcursionMaxTail,
    StraddleHeightTail,
    StraddleLengthTail,
    TrimLengthMean,
    HeightAlphaMean,
    MassTailMean,
    MassBetaMean,
    RhoDensityNorm,
}

impl FormulaId {
    pub const ALL: [FormulaId; 8] = [
        FormulaId::ExcursionMaxTail,
        FormulaId::StraddleHeightTail,
        FormulaId::StraddleLengthTail,
        FormulaId::TrimLengthMean,
        FormulaId::HeightAlphaMean,
        FormulaId::MassTailMean,
        FormulaId::MassBetaMean,
        FormulaId::RhoDensityNorm,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FormulaId::ExcursionMaxTail => "excursion_max_tail",
            FormulaId::StraddleHeightTail => "straddle_height_tail",
            FormulaId::StraddleLengthTail => "straddle_length_tail",
            FormulaId::TrimLengthMean => "trim_length_mean",
            FormulaId::HeightAlphaMean => "height_alpha_mean",
            FormulaId::MassTailMean => "mass_tail_mean",
            FormulaId::MassBetaMean => "mass_beta_mean",
            FormulaId::RhoDensityNorm => "rho_density_norm",
        }
    }
}

impl std::str::FromStr for FormulaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FormulaId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownId(s.to_string()))
    }
}

impl std::fmt::Display for FormulaId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Formula parameters; each formula reads the one it needs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p0: Option<f64>,
}

impl Params {
    pub fn x(x: f64) -> Self {
        Params {
            x: Some(x),
            ..Default::default()
        }
    }

    pub fn p(p: f64) -> Self {
        Params {
            p: Some(p),
            ..Default::default()
        }
    }

    pub fn alpha(alpha: f64) -> Self {
        Params {
            alpha: Some(alpha),
            ..Default::default()
        }
    }

    pub fn beta(beta: f64) -> Self {
        Params {
            beta: Some(beta),
            ..Default::default()
        }
    }

    pub fn p0(p0: f64) -> Self {
        Params {
            p0: Some(p0),
            ..Default::default()
        }
    }
}

fn need(v: Option<f64>, name: &'static str) -> Result<f64> {
    v.ok_or_else(|| Error::Parse(format!("missing parameter `{name}`")))
}

/// The checked parameter a formula uses.
pub(crate) fn param(id: FormulaId, params: &Params) -> Result<f64> {
    let check = |v: f64, name: &'static str, ok: bool, dom: &str| {
        if ok && v.is_finite() {
            Ok(v)
        } else {
            Err(domain(name, v, dom))
        }
    };
    match id {
        FormulaId::ExcursionMaxTail | FormulaId::StraddleHeightTail | FormulaId::TrimLengthMean => {
            let x = need(params.x, "x")?;
            check(x, "x", x > 0.0, "(0, ∞)")
        }
        FormulaId::StraddleLengthTail | FormulaId::MassTailMean => {
            let p = need(params.p, "p")?;
            check(p, "p", p > 0.0 && p <= 1.0, "(0, 1]")
        }
        FormulaId::RhoDensityNorm => {
            let p = need(params.p0, "p0")?;
            check(p, "p0", p > 0.0 && p <= 1.0, "(0, 1]")
        }
        FormulaId::HeightAlphaMean => {
            let a = need(params.alpha, "alpha")?;
            check(a, "alpha", a > 1.0, "(1, ∞)")
        }
        FormulaId::MassBetaMean => {
            let b = need(params.beta, "beta")?;
            check(b, "beta", b > 0.5, "(1/2, ∞)")
        }
    }
}

/// Sums `term(n)` for `n = 1, 2, …` until a term past `start` is negligible.
fn series(start: usize, term: impl Fn(f64) -> f64) -> f64 {
    let mut sum = 0.0;
    for n in 1..=SERIES_MAX_TERMS {
        let t = term(n as f64);
        sum += t;
        if n >= start && t.abs() <= SERIES_REL * sum.abs() {
            break;
        }
    }
    sum
}

/// Terms decrease once `n x ≥ 1`.
fn monotone_from(x: f64) -> usize {
    (1.0 / x).ceil().min(SERIES_MAX_TERMS as f64) as usize
}

pub fn excursion_max_tail(x: f64) -> f64 {
    2.0 * series(monotone_from(x), |n| {
        (4.0 * n * n * x * x - 1.0) * (-2.0 * n * n * x * x).exp()
    })
}

pub fn straddle_height_tail(x: f64) -> f64 {
    2.0 * series(monotone_from(x), |n| n * x * (-2.0 * n * n * x * x).exp())
}

pub fn straddle_length_tail(p: f64) -> f64 {
    ((1.0 - p) / (2.0 * std::f64::consts::PI * p)).sqrt()
}

pub fn trim_length_mean(x: f64) -> f64 {
    2.0 * series(monotone_from(x / 2.0), |n| {
        n * x * (-n * n * x * x / 2.0).exp()
    })
}

pub fn height_alpha_mean(alpha: f64) -> f64 {
    2f64.powf((alpha + 1.0) / 2.0) * alpha * gamma((alpha + 1.0) / 2.0) * riemann_zeta(alpha)
}

pub fn mass_tail_mean(p: f64) -> f64 {
    (2.0 * (1.0 - p) / (std::f64::consts::PI * p)).sqrt()
}

pub fn mass_beta_mean(beta: f64) -> f64 {
    std::f64::consts::FRAC_1_SQRT_2 * (ln_gamma(beta - 0.5) - ln_gamma(beta)).exp()
}

/// `(2√(2π))⁻¹ ∫_{p0}^1 dρ / √((1−ρ)ρ³)`, integrated in closed form.
pub fn rho_density_norm(p0: f64) -> f64 {
    ((1.0 - p0) / p0).sqrt() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Riemann zeta for real `s > 1` by Euler–Maclaurin summation.
pub fn riemann_zeta(s: f64) -> f64 {
    // B_2k / (2k)!
    const B: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
        1.0 / 74724249600.0,
        -3617.0 / 10670622842880000.0,
    ];
    let n = 12.0f64;
    let mut sum: f64 = (1..12).map(|k| (k as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // Rising product s (s+1) … (s+2k−2) times N^{−s−2k+1}.
    let mut rising = s;
    let mut power = n.powf(-s - 1.0);
    for (k, b) in B.iter().enumerate() {
        sum += b * rising * power;
        let j = 2.0 * k as f64;
        rising *= (s + j + 1.0) * (s + j + 2.0);
        power /= n * n;
    }
    sum
}

/// Evaluates a formula by id.
pub fn closed_form(id: FormulaId, params: &Params) -> Result<f64> {
    let v = param(id, params)?;
    Ok(match id {
        FormulaId::ExcursionMaxTail => excursion_max_tail(v),
        FormulaId::StraddleHeightTail => straddle_height_tail(v),
        FormulaId::StraddleLengthTail => straddle_length_tail(v),
        FormulaId::TrimLengthMean => trim_length_mean(v),
        FormulaId::HeightAlphaMean => height_alpha_mean(v),
        FormulaId::MassTailMean => mass_tail_mean(v),
        FormulaId::MassBetaMean => mass_beta_mean(v),
        FormulaId::RhoDensityNorm => rho_density_norm(v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn tabulated_values() {
        assert!((excursion_max_tail(1.0) - 0.822076644).abs() < 1e-9);
        assert!((trim_length_mean(1.0) - 1.8237775822366).abs() < 1e-11);
        assert!((mass_beta_mean(1.0) - (PI / 2.0).sqrt()).abs() < 1e-14);
        assert!((height_alpha_mean(2.0) - 8.24647648373105).abs() < 1e-12);
        assert!((mass_tail_mean(0.5) - 0.7978846).abs() < 5e-8);
        assert_eq!(straddle_length_tail(1.0), 0.0);
    }

    #[test]
    fn special_functions() {
        assert!((riemann_zeta(2.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((riemann_zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-14);
        assert!((riemann_zeta(1.5) - 2.612375348685488).abs() < 1e-13);
        assert!((riemann_zeta(1.01) - 100.57794333849685).abs() < 1e-10);
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn consistency_identities() {
        for k in 1..=50 {
            let p = k as f64 / 50.0;
            assert!((mass_tail_mean(p) - 2.0 * straddle_length_tail(p)).abs() < 1e-12);
            assert!((rho_density_norm(p) - straddle_length_tail(p)).abs() < 1e-12);
            let x = 0.05 * k as f64;
            assert!((trim_length_mean(x) - 2.0 * straddle_height_tail(x / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn rho_norm_matches_quadrature() {
        // Midpoint rule after ρ = p0 + (1 − p0) sin²θ, which removes the
        // endpoint singularity at ρ = 1.
        let p0: f64 = 0.2;
        let k = 200_000;
        let mut sum = 0.0;
        for i in 0..k {
            let th = (i as f64 + 0.5) * (PI / 2.0) / k as f64;
            let rho = p0 + (1.0 - p0) * th.sin().powi(2);
            let jac = 2.0 * (1.0 - p0) * th.sin() * th.cos();
            sum += jac / ((1.0 - rho) * rho.powi(3)).sqrt();
        }
        let integral = sum * (PI / 2.0) / k as f64 / (2.0 * (2.0 * PI).sqrt());
        assert!((integral - rho_density_norm(p0)).abs() < 1e-8);
    }

    #[test]
    fn truncation_is_converged() {
        for &x in &[0.1, 0.5, 1.0, 2.0] {
            let deeper = 2.0
                * (1..=20_000)
                    .map(|n| {
                        let n = n as f64;
                        (4.0 * n * n * x * x - 1.0) * (-2.0 * n * n * x * x).exp()
                    })
                    .sum::<f64>();
            assert!((excursion_max_tail(x) - deeper).abs() < 1e-12);
        }
    }

    #[test]
    fn domains() {
        assert!(closed_form(FormulaId::HeightAlphaMean, &Params::alpha(1.0)).is_err());
        assert!(closed_form(FormulaId::MassBetaMean, &Params::beta(0.5)).is_err());
        assert!(closed_form(FormulaId::MassTailMean, &Params::p(1.5)).is_err());
        assert!(closed_form(FormulaId::TrimLengthMean, &Params::default()).is_err());
        assert_eq!(
            "mass_beta_mean".parse::<FormulaId>().unwrap(),
            FormulaId::MassBetaMean
        );
    }
}
