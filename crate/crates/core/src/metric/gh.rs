use serde::Serialize;

use super::space::{distortion, map_distortion, Correspondence, FiniteMetricSpace};
use crate::error::{Error, Result};

/// Largest `|X|·|Y|` the exact search accepts; pairs are held in a `u128`.
pub const GH_EXACT_MAX: usize = 128;

/// Above this many inner steps the lower bound falls back to the diameter
/// gap alone.
pub const ROW_RELAXATION_BUDGET: f64 = 1e9;

/// Two-sided bound on a distance, with an optimal or best-found witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhReport {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    pub witness: Correspondence,
}

/// Gromov–Hausdorff distance `½ inf_R dis(R)`.
///
/// Exact when `|X|·|Y| ≤ exact_limit` (capped at [`GH_EXACT_MAX`]); otherwise
/// a local-search upper bound and a relaxation lower bound.
pub fn gh(x: &FiniteMetricSpace, y: &FiniteMetricSpace, exact_limit: usize) -> Result<GhReport> {
    if x.len() * y.len() <= exact_limit.min(GH_EXACT_MAX) {
        let (dis, r) = exact_min_distortion(x, y);
        return Ok(GhReport {
            lower: dis / 2.0,
            upper: dis / 2.0,
            exact: true,
            witness: r,
        });
    }
    let (dis, r) = local_search(x, y);
    Ok(GhReport {
        lower: gh_lower_bound(x, y).min(dis / 2.0),
        upper: dis / 2.0,
        exact: false,
        witness: r,
    })
}

/// A lower bound on the GH distance: half the largest of the diameter gap
/// and the nested min/max row relaxation in both directions.
pub fn gh_lower_bound(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> f64 {
    let rows = |a: &FiniteMetricSpace, b: &FiniteMetricSpace| {
        let mut best = 0.0f64;
        for i in 0..a.len() {
            let mut m = f64::INFINITY;
            for j in 0..b.len() {
                let mut w = 0.0f64;
                for i2 in 0..a.len() {
                    let gap = (0..b.len())
                        .map(|j2| (a.d(i, i2) - b.d(j, j2)).abs())
                        .fold(f64::INFINITY, f64::min);
                    w = w.max(gap);
                }
                m = m.min(w);
            }
            best = best.max(m);
        }
        best
    };
    let diam = (x.diameter() - y.diameter()).abs();
    let work = (x.len() * y.len()) as f64;
    if work * work > ROW_RELAXATION_BUDGET {
        return 0.5 * diam;
    }
    0.5 * diam.max(rows(x, y)).max(rows(y, x))
}

fn exact_min_distortion(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> (f64, Correspondence) {
    let (nx, ny) = (x.len(), y.len());
    let np = nx * ny;
    let gap = |p: usize, q: usize| (x.d(p / ny, q / ny) - y.d(p % ny, q % ny)).abs();
    let mut cands: Vec<f64> = Vec::with_capacity(np * np / 2 + 1);
    cands.push(0.0);
    for p in 0..np {
        for q in p + 1..np {
            cands.push(gap(p, q));
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let feasible = |tau: f64| -> Option<u128> {
        let compat: Vec<u128> = (0..np)
            .map(|p| {
                (0..np)
                    .filter(|&q| gap(p, q) <= tau)
                    .fold(0u128, |m, q| m | 1 << q)
            })
            .collect();
        let mut cover_sets = Vec::with_capacity(nx + ny);
        for i in 0..nx {
            cover_sets.push((0..ny).fold(0u128, |m, j| m | 1 << (i * ny + j)));
        }
        for j in 0..ny {
            cover_sets.push((0..nx).fold(0u128, |m, i| m | 1 << (i * ny + j)));
        }
        let all = if np == 128 {
            u128::MAX
        } else {
            (1u128 << np) - 1
        };
        clique_cover(&compat, &cover_sets, 0, all, 0)
    };
    // Full correspondence is feasible at the largest gap.
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    let mut best = feasible(cands[hi]).expect("full relation is feasible");
    if let Some(r) = feasible(cands[0]) {
        hi = 0;
        best = r;
    }
    while hi > lo + 1 {
        let mid = (lo + hi) / 2;
        match feasible(cands[mid]) {
            Some(r) => {
                hi = mid;
                best = r;
            }
            None => lo = mid,
        }
    }
    let pairs: Vec<(usize, usize)> = (0..np)
        .filter(|p| best >> p & 1 == 1)
        .map(|p| (p / ny, p % ny))
        .collect();
    let r = Correspondence::from_pairs(pairs);
    let dis = distortion(x, y, &r).unwrap_or(cands[hi]);
    (dis, r)
}

/// Finds a set of mutually compatible pairs meeting every cover set.
/// `avail` holds the pairs compatible with everything chosen so far.
fn clique_cover(
    compat: &[u128],
    cover: &[u128],
    chosen: u128,
    avail: u128,
    depth: usize,
) -> Option<u128> {
    // Most constrained uncovered element first.
    let mut pick: Option<(u32, u128)> = None;
    for &c in cover {
        if c & chosen != 0 {
            continue;
        }
        let opts = c & avail;
        let k = opts.count_ones();
        if k == 0 {
            return None;
        }
        if pick.is_none_or(|(best, _)| k < best) {
            pick = Some((k, opts));
        }
    }
    let Some((_, mut opts)) = pick else {
        return Some(chosen);
    };
    while opts != 0 {
        let p = opts.trailing_zeros() as usize;
        opts &= opts - 1;
        if let Some(r) = clique_cover(compat, cover, chosen | 1 << p, avail & compat[p], depth + 1)
        {
            return Some(r);
        }
    }
    None
}

/// Hill climbing over pairs of maps `f: X → Y`, `g: Y → X`, seeded from
/// every anchor pair, scored by the distortion of `graph f ∪ graph gᵀ`.
fn local_search(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> (f64, Correspondence) {
    let (nx, ny) = (x.len(), y.len());
    let nearest =
        |a: &FiniteMetricSpace, b: &FiniteMetricSpace, a0: usize, b0: usize| -> Vec<usize> {
            (0..a.len())
                .map(|i| {
                    (0..b.len())
                        .min_by(|&j, &k| {
                            (a.d(a0, i) - b.d(b0, j))
                                .abs()
                                .total_cmp(&(a.d(a0, i) - b.d(b0, k)).abs())
                        })
                        .unwrap()
                })
                .collect()
        };
    let score =
        |f: &[usize], g: &[usize]| distortion(x, y, &Correspondence::from_maps(f, g)).unwrap();
    let mut seeds: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    if nx == ny {
        seeds.push(((0..nx).collect(), (0..ny).collect()));
    }
    for x0 in (0..nx).step_by(nx.div_ceil(8).max(1)) {
        for y0 in (0..ny).step_by(ny.div_ceil(8).max(1)) {
            seeds.push((nearest(x, y, x0, y0), nearest(y, x, y0, x0)));
        }
    }
    let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
    for (mut f, mut g) in seeds {
        if best.as_ref().is_some_and(|b| b.0 == 0.0) {
            break;
        }
        {
            let mut cur = score(&f, &g);
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
                        let s = score(&f, &g);
                        if s < cur {
                            cur = s;
                            improved = true;
                        } else {
                            f[i] = old;
                        }
                    }
                }
                for j in 0..ny {
                    for i in 0..nx {
                        if g[j] == i {
                            continue;
                        }
                        let old = g[j];
                        g[j] = i;
                        let s = score(&f, &g);
                        if s < cur {
                            cur = s;
                            improved = true;
                        } else {
                            g[j] = old;
                        }
                    }
                }
            }
            if best.as_ref().is_none_or(|b| cur < b.0) {
                best = Some((cur, f, g));
            }
        }
    }
    let (dis, f, g) = best.expect("at least one anchor");
    (dis, Correspondence::from_maps(&f, &g))
}

/// Map built from a correspondence: greedy `eps`-net of `X` (first point wins,
/// open balls), each net point sent to its first partner in `R`, every
/// point sent where its first covering net point goes.
pub fn isometry_from_correspondence(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    r: &Correspondence,
    eps: f64,
) -> Result<Vec<usize>> {
    let dis = distortion(x, y, r)?;
    if !(dis < 2.0 * eps) {
        return Err(Error::InvalidMetric(format!(
            "distortion {dis} is not below 2ε = {}",
            2.0 * eps
        )));
    }
    let mut net: Vec<usize> = Vec::new();
    for i in 0..x.len() {
        if net.iter().all(|&c| x.d(c, i) >= eps) {
            net.push(i);
        }
    }
    let partner = |c: usize| {
        r.pairs()
            .iter()
            .find(|&&(a, _)| a == c)
            .map(|&(_, b)| b)
            .expect("correspondence covers X")
    };
    let images: Vec<usize> = net.iter().map(|&c| partner(c)).collect();
    Ok((0..x.len())
        .map(|i| {
            let k = net
                .iter()
                .position(|&c| x.d(c, i) < eps)
                .expect("net covers X");
            images[k]
        })
        .collect())
}

/// Whether `f` is an `eps`-isometry: distortion and net radius at most `eps`.
pub fn is_eps_isometry(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    f: &[usize],
    eps: f64,
) -> bool {
    map_distortion(x, y, f) <= eps && y.net_radius(f) <= eps
}
