use super::space::{AtomicMeasure, FiniteMetricSpace};
use crate::error::{Error, Result};

/// Flows below this are treated as zero.
const FLOW_TOL: f64 = 1e-15;

/// Dinic's algorithm on a small dense network with real capacities.
struct FlowNet {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
}

impl FlowNet {
    fn new(n: usize) -> Self {
        FlowNet {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add(&mut self, a: usize, b: usize, c: f64) {
        self.head[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c);
        self.head[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(0.0);
    }

    fn levels(&self, s: usize) -> Vec<usize> {
        let mut lvl = vec![usize::MAX; self.head.len()];
        lvl[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &e in &self.head[x] {
                let y = self.to[e];
                if self.cap[e] > FLOW_TOL && lvl[y] == usize::MAX {
                    lvl[y] = lvl[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        lvl
    }

    fn push(&mut self, x: usize, t: usize, f: f64, lvl: &[usize], it: &mut [usize]) -> f64 {
        if x == t {
            return f;
        }
        while it[x] < self.head[x].len() {
            let e = self.head[x][it[x]];
            let y = self.to[e];
            if self.cap[e] > FLOW_TOL && lvl[y] == lvl[x] + 1 {
                let got = self.push(y, t, f.min(self.cap[e]), lvl, it);
                if got > FLOW_TOL {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            it[x] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        loop {
            let lvl = self.levels(s);
            if lvl[t] == usize::MAX {
                return total;
            }
            let mut it = vec![0; self.head.len()];
            loop {
                let f = self.push(s, t, f64::INFINITY, &lvl, &mut it);
                if f <= FLOW_TOL {
                    break;
                }
                total += f;
            }
        }
    }
}

/// Mass that cannot be transported within distance `delta`: one minus the
/// largest coupling mass supported on `{d ≤ delta}`.
fn unmatched(x: &FiniteMetricSpace, mu: &[f64], nu: &[f64], delta: f64) -> f64 {
    let n = x.len();
    let (s, t) = (2 * n, 2 * n + 1);
    let mut net = FlowNet::new(2 * n + 2);
    for i in 0..n {
        if mu[i] > 0.0 {
            net.add(s, i, mu[i]);
        }
        if nu[i] > 0.0 {
            net.add(n + i, t, nu[i]);
        }
    }
    for i in 0..n {
        if mu[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if nu[j] > 0.0 && x.d(i, j) <= delta {
                net.add(i, n + j, f64::INFINITY);
            }
        }
    }
    let left = 1.0 - net.max_flow(s, t);
    if left < 1e-14 {
        0.0
    } else {
        left
    }
}

fn lex_le(a: &[f64], b: &[f64]) -> bool {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .is_none_or(|o| o.is_lt())
}

/// Prohorov distance between two measures on the same finite space.
///
/// Uses the coupling form: `d_P ≤ ε` iff some coupling puts at most `ε` of
/// its mass on pairs further apart than `ε`. The unmatched mass is a step
/// function of the threshold that only changes at pairwise distances, so
/// the infimum is attained at `max(δ_k, g(δ_k))` for one of them.
pub fn prohorov(x: &FiniteMetricSpace, mu: &AtomicMeasure, nu: &AtomicMeasure) -> Result<f64> {
    if mu.len() != x.len() || nu.len() != x.len() {
        return Err(Error::InvalidMetric(
            "measure size does not match space".into(),
        ));
    }
    for m in [mu, nu] {
        let total: f64 = m.masses().iter().sum();
        if (total - 1.0).abs() > super::space::METRIC_TOL {
            return Err(Error::InvalidMetric(format!(
                "measure has total mass {total}"
            )));
        }
    }
    // Canonical argument order makes the result exactly symmetric.
    let (mu, nu) = (mu.masses(), nu.masses());
    let (mu, nu) = if lex_le(mu, nu) { (mu, nu) } else { (nu, mu) };
    let mut deltas: Vec<f64> = Vec::with_capacity(x.len() * x.len() + 1);
    deltas.push(0.0);
    for i in 0..x.len() {
        if mu[i] == 0.0 {
            continue;
        }
        for j in 0..x.len() {
            if nu[j] > 0.0 {
                deltas.push(x.d(i, j));
            }
        }
    }
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    // g is nonincreasing and the thresholds increase: find the first k with
    // g(δ_k) ≤ δ_k by bisection; the answer is min(δ_k, g(δ_{k−1})).
    let g = |k: usize| unmatched(x, mu, nu, deltas[k]);
    let (mut lo, mut hi) = (0usize, deltas.len() - 1);
    let g_hi = g(hi);
    debug_assert!(g_hi == 0.0);
    if g(0) <= deltas[0] {
        return Ok(0.0);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if g(mid) <= deltas[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(deltas[hi].min(g(lo)))
}
