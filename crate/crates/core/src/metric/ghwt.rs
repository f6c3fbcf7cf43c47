use serde::Serialize;

use super::gh::gh_lower_bound;
use super::prohorov::prohorov;
use super::space::{map_distortion, WeightedSpace};
use crate::error::Result;

/// Bracket on `Δ_GHwt` with the best maps found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaReport {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    /// `(f: X → Y, g: Y → X)` attaining `upper`.
    pub witness: (Vec<usize>, Vec<usize>),
}

/// Smallest `ε` for which `f` is an ε-isometry with `d_P(f_*ν_X, ν_Y) ≤ ε`.
/// Returns `None` without computing the Prohorov term when the geometric
/// part already reaches `cutoff`.
fn map_eps(x: &WeightedSpace, y: &WeightedSpace, f: &[usize], cutoff: f64) -> Option<f64> {
    let geo = map_distortion(&x.space, &y.space, f).max(y.space.net_radius(f));
    if geo >= cutoff {
        return None;
    }
    let pushed = x.measure.pushforward(f, y.len());
    let dp = prohorov(&y.space, &pushed, &y.measure).expect("measures on the same space");
    Some(geo.max(dp))
}

/// `min_f ε_f` over maps `X → Y`, exhaustively.
fn best_map_exhaustive(x: &WeightedSpace, y: &WeightedSpace) -> (f64, Vec<usize>) {
    let (nx, ny) = (x.len(), y.len());
    let mut f = vec![0usize; nx];
    let mut best = (f64::INFINITY, f.clone());
    loop {
        if let Some(e) = map_eps(x, y, &f, best.0) {
            if e < best.0 {
                best = (e, f.clone());
            }
        }
        // Odometer increment.
        let mut k = 0;
        loop {
            if k == nx {
                return best;
            }
            f[k] += 1;
            if f[k] < ny {
                break;
            }
            f[k] = 0;
            k += 1;
        }
    }
}

/// Local search on maps `X → Y` from a few deterministic seeds.
fn best_map_search(x: &WeightedSpace, y: &WeightedSpace) -> (f64, Vec<usize>) {
    let (nx, ny) = (x.len(), y.len());
    let mut seeds: Vec<Vec<usize>> = Vec::new();
    if nx == ny {
        seeds.push((0..nx).collect());
    }
    // Match by distance from an anchor point on each side.
    for x0 in (0..nx).step_by(nx.div_ceil(4).max(1)) {
        for y0 in (0..ny).step_by(ny.div_ceil(4).max(1)) {
            seeds.push(
                (0..nx)
                    .map(|i| {
                        (0..ny)
                            .min_by(|&j, &k| {
                                let dj = (x.space.d(x0, i) - y.space.d(y0, j)).abs();
                                let dk = (x.space.d(x0, i) - y.space.d(y0, k)).abs();
                                dj.total_cmp(&dk)
                            })
                            .unwrap()
                    })
                    .collect(),
            );
        }
    }
    let mut best = (f64::INFINITY, vec![0; nx]);
    for mut f in seeds {
        if best.0 == 0.0 {
            break;
        }
        let mut cur = map_eps(x, y, &f, f64::INFINITY).unwrap();
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..nx {
                for j in 0..ny {
                    if f[i] == j {
                        continue;
                    }
                    let old = f[i];
                    f[i] = j;
                    match map_eps(x, y, &f, cur) {
                        Some(e) if e < cur => {
                            cur = e;
                            improved = true;
                        }
                        _ => f[i] = old,
                    }
                }
            }
        }
        if cur < best.0 {
            best = (cur, f);
        }
    }
    best
}

/// `Δ_GHwt(X, Y)`: the least `ε` admitting ε-isometries both ways whose
/// push-forwards are within `ε` of the target weights in Prohorov distance.
///
/// The two directions decouple, so `Δ = max(min_f ε_f, min_g ε_g)`. Maps are
/// enumerated when `|Y|^|X| + |X|^|Y| ≤ exact_limit`.
pub fn delta_ghwt(x: &WeightedSpace, y: &WeightedSpace, exact_limit: usize) -> Result<DeltaReport> {
    let count = |a: usize, b: usize| (b as f64).powi(a as i32);
    let exact = count(x.len(), y.len()) + count(y.len(), x.len()) <= exact_limit as f64;
    let ((ef, f), (eg, g)) = if exact {
        (best_map_exhaustive(x, y), best_map_exhaustive(y, x))
    } else {
        (best_map_search(x, y), best_map_search(y, x))
    };
    let upper = ef.max(eg);
    let lower = if exact {
        upper
    } else {
        // An ε-isometry f gives the correspondence {(x, y) : d(y, f(x)) ≤ ε}
        // of distortion at most 3ε, so d_GH ≤ 3Δ/2.
        (2.0 * gh_lower_bound(&x.space, &y.space) / 3.0).min(upper)
    };
    Ok(DeltaReport {
        lower,
        upper,
        exact,
        witness: (f, g),
    })
}

/// `(½ Δ^{1/4}, Δ^{1/4})` applied to the ends of a `Δ` bracket.
pub fn d_ghwt_bounds(delta: &DeltaReport) -> (f64, f64) {
    (0.5 * delta.lower.powf(0.25), delta.upper.powf(0.25))
}

#[cfg(test)]
mod tests {
    use super::super::space::{AtomicMeasure, FiniteMetricSpace};
    use super::*;

    fn seg(len: f64, at: usize) -> WeightedSpace {
        WeightedSpace::new(
            FiniteMetricSpace::from_line(&[0.0, len]).unwrap(),
            AtomicMeasure::dirac(2, at),
        )
        .unwrap()
    }

    fn point() -> WeightedSpace {
        WeightedSpace::new(FiniteMetricSpace::point(), AtomicMeasure::dirac(1, 0)).unwrap()
    }

    #[test]
    fn point_vs_segment() {
        let r = delta_ghwt(&point(), &seg(1.0, 0), 1000).unwrap();
        assert!(r.exact);
        assert_eq!((r.lower, r.upper), (1.0, 1.0));
        assert_eq!(d_ghwt_bounds(&r), (0.5, 1.0));
    }

    #[test]
    fn reflection_is_free() {
        let r = delta_ghwt(&seg(1.0, 0), &seg(1.0, 1), 1000).unwrap();
        assert_eq!(r.upper, 0.0);
        let r = delta_ghwt(&seg(0.7, 1), &seg(0.7, 1), 1000).unwrap();
        assert_eq!((r.lower, r.upper), (0.0, 0.0));
    }

    #[test]
    fn bracket_arithmetic() {
        let r = DeltaReport {
            lower: 16.0,
            upper: 16.0,
            exact: true,
            witness: (vec![], vec![]),
        };
        assert_eq!(d_ghwt_bounds(&r), (1.0, 2.0));
    }

    #[test]
    fn search_mode_brackets_exact() {
        let x = WeightedSpace::new(
            FiniteMetricSpace::from_line(&[0.0, 0.3, 1.0, 1.2]).unwrap(),
            AtomicMeasure::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
        )
        .unwrap();
        let y = WeightedSpace::new(
            FiniteMetricSpace::from_line(&[0.0, 0.5, 1.1]).unwrap(),
            AtomicMeasure::new(vec![0.5, 0.25, 0.25]).unwrap(),
        )
        .unwrap();
        let ex = delta_ghwt(&x, &y, usize::MAX).unwrap();
        let ap = delta_ghwt(&x, &y, 0).unwrap();
        assert!(ex.exact && !ap.exact);
        assert!(ap.lower <= ex.upper + 1e-15 && ex.upper <= ap.upper + 1e-15);
    }
}
