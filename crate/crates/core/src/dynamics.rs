//! SPR Markov dynamics: the jump chain on finite weighted trees and the
//! uniform SPR chain on leaf-labelled binary trees.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rtree::{PointRef, WeightedTree};

/// One jump of the chain: holding time `Exp(time_scale · μ(T))`, then an
/// SPR at `u ~ μ`, `v ~ ν`.
pub fn spr_jump_step<R: Rng + ?Sized>(
    t: &WeightedTree,
    time_scale: f64,
    rng: &mut R,
) -> Result<(f64, WeightedTree)> {
    let (h, next, _) = jump(t, time_scale, None, rng)?;
    Ok((h, next))
}

fn jump<R: Rng + ?Sized>(
    t: &WeightedTree,
    time_scale: f64,
    marker: Option<PointRef>,
    rng: &mut R,
) -> Result<(f64, WeightedTree, Option<PointRef>)> {
    if !(time_scale > 0.0 && time_scale.is_finite()) {
        return Err(domain("time_scale", time_scale, "(0, inf)"));
    }
    let rate = time_scale * t.total_length();
    if !(rate > 0.0) {
        return Err(Error::DegenerateTree);
    }
    let hold = Exp::new(rate)
        .map_err(|_| domain("rate", rate, "(0, inf)"))?
        .sample(rng);
    let u = t.sample_length_point(rng)?;
    let v = t.sample_weight_point(rng);
    let track: Vec<PointRef> = marker.into_iter().collect();
    let (next, moved) = t.spr_tracking(u, v, &track)?;
    Ok((hold, next, moved.first().copied()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    MeanDist,
    Height,
    Diameter,
}

impl std::str::FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean-dist" => Ok(Observable::MeanDist),
            "height" => Ok(Observable::Height),
            "diameter" => Ok(Observable::Diameter),
            _ => Err(Error::Parse(format!("unknown observable `{s}`"))),
        }
    }
}

/// Observables of one state. Unrequested ones are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub mean_dist: Option<f64>,
    /// Height seen from the image of the initial root.
    pub height: Option<f64>,
    pub diameter: Option<f64>,
    pub total_length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrajectory {
    /// State at time zero.
    pub initial: Record,
    /// Jump times, strictly increasing.
    pub times: Vec<f64>,
    /// State after each jump.
    pub records: Vec<Record>,
    /// Trees after the requested jump indices (1-based; 0 is the start).
    pub snapshots: Vec<(usize, WeightedTree)>,
}

fn observe(t: &WeightedTree, marker: PointRef, obs: &BTreeSet<Observable>) -> Result<Record> {
    Ok(Record {
        mean_dist: obs.contains(&Observable::MeanDist).then(|| t.mean_dist()),
        height: match obs.contains(&Observable::Height) {
            true => Some(t.height(marker)?),
            false => None,
        },
        diameter: obs.contains(&Observable::Diameter).then(|| t.diameter()),
        total_length: t.total_length(),
    })
}

/// Runs the jump chain until the first jump after `horizon`, which is not
/// recorded.
pub fn run_chain<R: Rng + ?Sized>(
    t0: &WeightedTree,
    horizon: f64,
    time_scale: f64,
    observables: &BTreeSet<Observable>,
    snapshots: &[usize],
    rng: &mut R,
) -> Result<ChainTrajectory> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(domain("horizon", horizon, "(0, inf)"));
    }
    let wanted: BTreeSet<usize> = snapshots.iter().copied().collect();
    let mut marker = PointRef::Vertex(t0.tree().root().unwrap_or(0));
    let mut traj = ChainTrajectory {
        initial: observe(t0, marker, observables)?,
        times: Vec::new(),
        records: Vec::new(),
        snapshots: Vec::new(),
    };
    if wanted.contains(&0) {
        traj.snapshots.push((0, t0.clone()));
    }
    let mut t = t0.clone();
    let mut now = 0.0;
    loop {
        let (hold, next, m) = jump(&t, time_scale, Some(marker), rng)?;
        now += hold;
        if now > horizon {
            return Ok(traj);
        }
        t = next;
        marker = m.expect("tracked marker");
        traj.times.push(now);
        traj.records.push(observe(&t, marker, observables)?);
        if wanted.contains(&traj.times.len()) {
            traj.snapshots.push((traj.times.len(), t.clone()));
        }
    }
}

/// Largest leaf count [`transition_matrix`] enumerates.
pub const MAX_ENUM_LEAVES: usize = 6;

/// Unrooted binary tree with leaves `0..n` (labelled `1..=n`) and internal
/// vertices `n..2n-2`.
#[derive(Debug, Clone)]
pub struct Cladogram {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl PartialEq for Cladogram {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.splits() == other.splits()
    }
}

impl Eq for Cladogram {}

impl Cladogram {
    /// The caterpillar `((1,2),3,…,n)`.
    pub fn caterpillar(n: usize) -> Result<Self> {
        check_leaves(n)?;
        let mut c = Cladogram {
            n,
            edges: vec![(0, n), (1, n), (2, n)],
        };
        for leaf in 3..n {
            let last = c.edges.len() - 1;
            c = c.attach_leaf(leaf, last);
        }
        Ok(c)
    }

    /// Builds from an edge list, checking that it is a binary tree with
    /// leaves `0..n`.
    pub fn from_edges(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        check_leaves(n)?;
        let nv = 2 * n - 2;
        if edges.len() != 2 * n - 3 {
            return Err(Error::InvalidTree(format!(
                "{} edges for {n} leaves",
                edges.len()
            )));
        }
        let mut deg = vec![0usize; nv];
        for &(a, b) in &edges {
            if a >= nv || b >= nv || a == b {
                return Err(Error::InvalidTree(format!("bad edge ({a}, {b})")));
            }
            deg[a] += 1;
            deg[b] += 1;
        }
        for (v, d) in deg.iter().enumerate() {
            let want = if v < n { 1 } else { 3 };
            if *d != want {
                return Err(Error::InvalidTree(format!("vertex {v} has degree {d}")));
            }
        }
        let c = Cladogram { n, edges };
        let seen = c.component(0, usize::MAX);
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidTree("disconnected".into()));
        }
        Ok(c)
    }

    pub fn leaves(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn attach_leaf(&self, leaf: usize, edge: usize) -> Cladogram {
        // New internal vertex id after the current ones.
        let mid = self.n + (self.edges.len() - 1) / 2;
        let (a, b) = self.edges[edge];
        let mut edges = self.edges.clone();
        edges[edge] = (a, mid);
        edges.push((mid, b));
        edges.push((leaf, mid));
        Cladogram { n: self.n, edges }
    }

    /// Vertices reachable from `start` without using edge `cut`.
    fn component(&self, start: usize, cut: usize) -> Vec<bool> {
        let nv = 2 * self.n - 2;
        let mut adj = vec![Vec::new(); nv];
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            if i != cut {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        let mut seen = vec![false; nv];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    }

    /// Nontrivial splits as leaf bitmasks, each normalized to exclude leaf 1.
    pub fn splits(&self) -> Vec<u64> {
        let mut out = Vec::new();
        for (i, &(a, _)) in self.edges.iter().enumerate() {
            let side = self.component(a, i);
            let mut mask = 0u64;
            for leaf in 0..self.n {
                if side[leaf] {
                    mask |= 1 << leaf;
                }
            }
            let full = (1u64 << self.n) - 1;
            if mask & 1 == 1 {
                mask = full & !mask;
            }
            let k = mask.count_ones() as usize;
            if k >= 2 && k <= self.n - 2 {
                out.push(mask);
            }
        }
        out.sort_unstable();
        out
    }

    /// Result of cutting edge `cut`, pruning the side holding `pruned_end`
    /// of it, and regrafting into `graft`, an edge of the other side.
    fn prune_regraft(&self, cut: usize, pruned_end: usize, graft: usize) -> Cladogram {
        let (a, b) = self.edges[cut];
        let (x, y) = if pruned_end == a { (a, b) } else { (b, a) };
        let (p, q) = self.edges[graft];
        if p == y || q == y {
            return self.clone();
        }
        let others: Vec<usize> = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, &(s, t))| i != cut && (s == y || t == y))
            .map(|(i, _)| i)
            .collect();
        let far = |i: usize| {
            let (s, t) = self.edges[i];
            if s == y {
                t
            } else {
                s
            }
        };
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != cut && i != graft && !others.contains(&i))
            .map(|(_, e)| *e)
            .collect();
        edges.push((far(others[0]), far(others[1])));
        edges.push((p, y));
        edges.push((y, q));
        edges.push((x, y));
        Cladogram { n: self.n, edges }
    }

    /// All `(pruned end, regraft edge)` options after cutting `cut`,
    /// grouped by pruned side.
    fn options(&self, cut: usize) -> [(usize, Vec<usize>); 2] {
        let (a, b) = self.edges[cut];
        let side_a = self.component(a, cut);
        let in_side = |side: &[bool], keep: bool| -> Vec<usize> {
            self.edges
                .iter()
                .enumerate()
                .filter(|&(i, &(s, t))| i != cut && side[s] == keep && side[t] == keep)
                .map(|(i, _)| i)
                .collect()
        };
        // Pruning a's side regrafts into b's side and vice versa.
        [(a, in_side(&side_a, false)), (b, in_side(&side_a, true))]
    }
}

fn check_leaves(n: usize) -> Result<()> {
    if !(3..=63).contains(&n) {
        return Err(domain("leaves", n as f64, "[3, 63]"));
    }
    Ok(())
}

/// One step of the uniform SPR chain: a uniform edge is cut, a fair coin
/// picks the pruned side, and it is regrafted into a uniform edge of the
/// other side. Choices that reproduce the current tree are kept as
/// self-loops.
pub fn cladogram_spr_step<R: Rng + ?Sized>(c: &Cladogram, rng: &mut R) -> Cladogram {
    let cut = rng.random_range(0..c.edges.len());
    let opts = c.options(cut);
    let (pruned_end, grafts) = &opts[usize::from(rng.random_bool(0.5))];
    if grafts.is_empty() {
        return c.clone();
    }
    let graft = grafts[rng.random_range(0..grafts.len())];
    c.prune_regraft(cut, *pruned_end, graft)
}

/// Every topology on `n` leaves, in split order.
pub fn all_cladograms(n: usize) -> Result<Vec<Cladogram>> {
    if n > MAX_ENUM_LEAVES {
        return Err(domain(
            "leaves",
            n as f64,
            format!("[3, {MAX_ENUM_LEAVES}]"),
        ));
    }
    check_leaves(n)?;
    let mut level = vec![Cladogram {
        n,
        edges: vec![(0, n), (1, n), (2, n)],
    }];
    for leaf in 3..n {
        level = level
            .iter()
            .flat_map(|c| (0..c.edges.len()).map(move |e| c.attach_leaf(leaf, e)))
            .collect();
    }
    level.sort_by_key(|c| c.splits());
    Ok(level)
}

/// Transition probabilities as integers over a common denominator, so row
/// sums and symmetry can be checked exactly.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    pub topologies: Vec<Cladogram>,
    pub numer: Vec<Vec<u64>>,
    pub denom: u64,
}

impl TransitionMatrix {
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.numer[i][j] as f64 / self.denom as f64
    }

    pub fn len(&self) -> usize {
        self.topologies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topologies.is_empty()
    }

    pub fn index_of(&self, c: &Cladogram) -> Option<usize> {
        let key = c.splits();
        self.topologies.iter().position(|t| t.splits() == key)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.len()).all(|i| (0..i).all(|j| self.numer[i][j] == self.numer[j][i]))
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Exact kernel of [`cladogram_spr_step`] by enumerating every cut edge,
/// side and regraft edge.
pub fn transition_matrix(n: usize) -> Result<TransitionMatrix> {
    let topologies = all_cladograms(n)?;
    let index: BTreeMap<Vec<u64>, usize> = topologies
        .iter()
        .enumerate()
        .map(|(i, c)| (c.splits(), i))
        .collect();
    let m = 2 * n - 3;
    let per_graft = (1..=m as u64).fold(1, lcm);
    let denom = 2 * m as u64 * per_graft;
    let mut numer = vec![vec![0u64; topologies.len()]; topologies.len()];
    for (i, c) in topologies.iter().enumerate() {
        for cut in 0..m {
            for (pruned_end, grafts) in c.options(cut) {
                if grafts.is_empty() {
                    numer[i][i] += per_graft;
                    continue;
                }
                let w = per_graft / grafts.len() as u64;
                for g in grafts {
                    let j = index[&c.prune_regraft(cut, pruned_end, g).splits()];
                    numer[i][j] += w;
                }
            }
        }
    }
    Ok(TransitionMatrix {
        topologies,
        numer,
        denom,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rtree::{Atom, Edge, Tree};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn y_weighted() -> WeightedTree {
        let t = Tree::new(
            4,
            vec![
                Edge {
                    a: 0,
                    b: 1,
                    len: 0.5,
                },
                Edge {
                    a: 1,
                    b: 2,
                    len: 0.5,
                },
                Edge {
                    a: 1,
                    b: 3,
                    len: 0.5,
                },
            ],
            Some(0),
        )
        .unwrap();
        let atoms = [0, 2, 3]
            .iter()
            .map(|&v| Atom {
                at: PointRef::Vertex(v),
                mass: 1.0 / 3.0,
            })
            .collect();
        WeightedTree::new(t, atoms).unwrap()
    }

    #[test]
    fn topology_counts() {
        // (2n − 5)!! unrooted binary trees.
        for (n, k) in [(3, 1), (4, 3), (5, 15), (6, 105)] {
            let all = all_cladograms(n).unwrap();
            assert_eq!(all.len(), k);
            let keys: BTreeSet<Vec<u64>> = all.iter().map(|c| c.splits()).collect();
            assert_eq!(keys.len(), k);
        }
        assert!(all_cladograms(7).is_err());
    }

    #[test]
    fn rows_sum_exactly_and_kernel_is_symmetric() {
        for n in 3..=6 {
            let tm = transition_matrix(n).unwrap();
            for row in &tm.numer {
                assert_eq!(row.iter().sum::<u64>(), tm.denom);
            }
            assert!(tm.is_symmetric(), "n = {n}");
        }
        let tm = transition_matrix(4).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(tm.numer[i][j] > 0);
                }
            }
        }
    }

    #[test]
    fn steps_stay_binary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut c = Cladogram::caterpillar(8).unwrap();
        for _ in 0..200 {
            c = cladogram_spr_step(&c, &mut rng);
            Cladogram::from_edges(8, c.edges.clone()).unwrap();
        }
    }

    #[test]
    fn step_frequencies_match_the_matrix() {
        let tm = transition_matrix(5).unwrap();
        let start = tm.topologies[0].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut counts = vec![0u64; tm.len()];
        let draws = 40_000;
        for _ in 0..draws {
            counts[tm.index_of(&cladogram_spr_step(&start, &mut rng)).unwrap()] += 1;
        }
        for (j, &c) in counts.iter().enumerate() {
            let p = tm.prob(0, j);
            let sd = (p * (1.0 - p) / draws as f64).sqrt();
            assert!(
                (c as f64 / draws as f64 - p).abs() <= 4.0 * sd + 1e-12,
                "{j}"
            );
        }
    }

    #[test]
    fn jump_preserves_length_and_atoms() {
        let t = y_weighted();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut cur = t.clone();
        for _ in 0..200 {
            let (h, next) = spr_jump_step(&cur, 1.0, &mut rng).unwrap();
            assert!(h > 0.0);
            assert!((next.total_length() - 1.5).abs() < 1e-12);
            assert_eq!(next.atoms().len(), 3);
            assert!((next.total_mass() - 1.0).abs() < 1e-12);
            cur = next;
        }
    }

    #[test]
    fn holding_time_mean() {
        let t = y_weighted();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 10_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| spr_jump_step(&t, 1.0, &mut rng).unwrap().0)
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        // Exp(1.5) has sd 2/3.
        let sd = (2.0 / 3.0) / (n as f64).sqrt();
        assert!((mean - 2.0 / 3.0).abs() < 3.0 * sd);
    }

    #[test]
    fn short_horizon_has_no_jumps() {
        let t = y_weighted();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let obs: BTreeSet<Observable> = [Observable::MeanDist].into();
        let tr = run_chain(&t, 1e-12, 1.0, &obs, &[0], &mut rng).unwrap();
        assert!(tr.times.is_empty());
        assert_eq!(tr.snapshots.len(), 1);
        assert!(tr.initial.mean_dist.is_some() && tr.initial.height.is_none());
    }

    #[test]
    fn single_atom_regrafts_onto_it() {
        let t = y_weighted();
        let one = WeightedTree::new(
            t.tree().clone(),
            vec![Atom {
                at: PointRef::Vertex(2),
                mass: 1.0,
            }],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let (_, next) = spr_jump_step(&one, 1.0, &mut rng).unwrap();
            assert!((next.total_length() - 1.5).abs() < 1e-12);
        }
    }
}
