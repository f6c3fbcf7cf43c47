//! Length-measure computations: trimming, nets, mean distance, sampling,
//! and exact integrals over `μ ⊗ ν` of subtree functionals.

use rand::Rng;

use super::{pairwise_sum, Edge, PointRef, Tree, WeightedTree, POINT_TOL};
use crate::error::{domain, Error, Result};

/// The subtree `S^{T,u,v}` cut off at `u` on the far side from `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubtreeInfo {
    /// Closure of the subtree, rooted at vertex 0 (the image of `u`).
    pub skeleton: Tree,
    /// Weight carried strictly inside the subtree.
    pub mass: f64,
    /// `sup_{w ∈ S} d(u, w)`.
    pub height: f64,
}

/// Heights computed on a tree hung from a vertex.
struct Heights {
    order: Vec<usize>,
    parent: Vec<Option<(usize, usize)>>,
    /// Longest path going down from each vertex.
    down: Vec<f64>,
    /// For each non-root vertex `c` with parent `p`: longest path from `p`
    /// that avoids the edge to `c`.
    up_excl: Vec<f64>,
}

impl Tree {
    fn heights(&self, r: usize) -> Heights {
        let rooted = self.rooted_at(r);
        let n = self.n;
        let mut down = vec![0.0f64; n];
        for &x in rooted.order.iter().rev() {
            if let Some((p, e)) = rooted.parent[x] {
                down[p] = down[p].max(down[x] + self.edges[e].len);
            }
        }
        // Best two downward branches per vertex.
        let mut best = vec![(0.0f64, usize::MAX, 0.0f64); n];
        for &x in &rooted.order {
            if let Some((p, e)) = rooted.parent[x] {
                let via = down[x] + self.edges[e].len;
                let b = &mut best[p];
                if via > b.0 {
                    *b = (via, x, b.0);
                } else if via > b.2 {
                    b.2 = via;
                }
            }
        }
        let mut up = vec![0.0f64; n];
        let mut up_excl = vec![0.0f64; n];
        for &x in &rooted.order {
            if let Some((p, e)) = rooted.parent[x] {
                let sib = if best[p].1 == x { best[p].2 } else { best[p].0 };
                up_excl[x] = up[p].max(sib);
                up[x] = up_excl[x] + self.edges[e].len;
            }
        }
        Heights {
            order: rooted.order,
            parent: rooted.parent,
            down,
            up_excl,
        }
    }

    /// Points `x` with some `y` beyond `x` as seen from `root` and
    /// `d(x, y) ≥ eps`, together with `root` itself.
    pub fn trim_rooted(&self, root: PointRef, eps: f64) -> Result<Tree> {
        if !(eps > 0.0) {
            return Err(domain("eps", eps, "(0, ∞)"));
        }
        let root = self.check_point(root)?;
        let sub = self.subdivide(&[root]);
        let t = &sub.tree;
        let r = sub.vertices[0];
        let h = t.heights(r);
        let mut new_id = vec![usize::MAX; t.n];
        new_id[r] = 0;
        let mut n = 1;
        let mut edges = Vec::new();
        for &c in &h.order {
            let Some((p, e)) = h.parent[c] else { continue };
            if new_id[p] == usize::MAX || (p != r && h.down[p] < eps) {
                continue;
            }
            let len = t.edges[e].len;
            let keep = (len + h.down[c] - eps).min(len);
            if keep <= 0.0 {
                continue;
            }
            let w = n;
            n += 1;
            if h.down[c] >= eps {
                new_id[c] = w;
            }
            edges.push(Edge {
                a: new_id[p],
                b: w,
                len: keep,
            });
        }
        Ok(Tree::from_parts(n, edges, Some(0)))
    }

    /// The unrooted ε-trimming: points lying in the interior of an arc
    /// reaching at least `eps` on both sides. A tree of diameter at most
    /// `eps`, or one whose trimming is empty, trims to a single point.
    pub fn trim(&self, eps: f64) -> Result<Tree> {
        if !(eps > 0.0) {
            return Err(domain("eps", eps, "(0, ∞)"));
        }
        if self.diameter() <= eps {
            return Ok(Tree::singleton());
        }
        let h = self.heights(0);
        // Reach of each direction at each vertex; a vertex survives when
        // two directions reach eps.
        let mut reach_count = vec![0usize; self.n];
        for &c in &h.order {
            if let Some((p, e)) = h.parent[c] {
                if h.down[c] + self.edges[e].len >= eps {
                    reach_count[p] += 1;
                }
                if h.up_excl[c] + self.edges[e].len >= eps {
                    reach_count[c] += 1;
                }
            }
        }
        let mut new_id = vec![usize::MAX; self.n];
        let mut n = 0;
        for v in 0..self.n {
            if reach_count[v] >= 2 {
                new_id[v] = n;
                n += 1;
            }
        }
        let mut edges = Vec::new();
        for &c in &h.order {
            let Some((p, e)) = h.parent[c] else { continue };
            let len = self.edges[e].len;
            let lo = (eps - h.up_excl[c]).max(0.0);
            let hi = (len + h.down[c] - eps).min(len);
            if !(hi > lo) {
                continue;
            }
            let a = if lo == 0.0 {
                new_id[p]
            } else {
                n += 1;
                n - 1
            };
            let b = if hi == len {
                new_id[c]
            } else {
                n += 1;
                n - 1
            };
            debug_assert!(a != usize::MAX && b != usize::MAX);
            edges.push(Edge { a, b, len: hi - lo });
        }
        if edges.is_empty() {
            return Ok(Tree::singleton());
        }
        Ok(Tree::from_parts(n, edges, None))
    }

    /// An ε-net obtained by walking the contour of the tree and dropping a
    /// point every `eps` of arc length.
    pub fn eps_net(&self, eps: f64) -> Result<Vec<PointRef>> {
        if !(eps > 0.0) {
            return Err(domain("eps", eps, "(0, ∞)"));
        }
        let start = self.root.unwrap_or(0);
        let mut net = vec![PointRef::Vertex(start)];
        let mut pos = 0.0f64;
        let mut next = eps;
        // Iterative depth-first contour: (vertex, incoming edge, child cursor).
        let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(start, None, 0)];
        let mut seen = vec![false; self.n];
        seen[start] = true;
        let emit = |edge: usize,
                    from: usize,
                    len: f64,
                    pos: &mut f64,
                    next: &mut f64,
                    net: &mut Vec<PointRef>| {
            let e = self.edges[edge];
            while *next <= *pos + len + POINT_TOL {
                let along = (*next - *pos).min(len);
                let off = if e.a == from { along } else { len - along };
                net.push(self.snap(edge, off));
                *next += eps;
            }
            *pos += len;
        };
        while let Some(top) = stack.last_mut() {
            let (x, inc, cursor) = *top;
            if cursor < self.adj[x].len() {
                top.2 += 1;
                let (y, e) = self.adj[x][cursor];
                if seen[y] {
                    continue;
                }
                seen[y] = true;
                emit(e, x, self.edges[e].len, &mut pos, &mut next, &mut net);
                stack.push((y, Some(e), 0));
            } else {
                stack.pop();
                if let (Some(e), false) = (inc, stack.is_empty()) {
                    emit(e, x, self.edges[e].len, &mut pos, &mut next, &mut net);
                }
            }
        }
        net.dedup();
        let mut uniq: Vec<PointRef> = Vec::with_capacity(net.len());
        for p in net {
            if !uniq.iter().any(|q| same_point(*q, p)) {
                uniq.push(p);
            }
        }
        Ok(uniq)
    }

    /// Cardinality bound for an ε-net in terms of total length.
    pub fn net_size_bound(&self, eps: f64) -> f64 {
        let k = (2.0 * self.total_length() / eps).ceil();
        k * (2.0 * self.total_length() / eps + 1.0).ceil()
    }

    /// A point drawn from normalized length measure.
    pub fn sample_length_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PointRef> {
        let total = self.total_length();
        if !(total > 0.0) {
            return Err(Error::DegenerateTree);
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        for (i, e) in self.edges.iter().enumerate() {
            if target < acc + e.len {
                return Ok(self.snap(i, (target - acc).clamp(0.0, e.len)));
            }
            acc += e.len;
        }
        let last = self.edges.len() - 1;
        Ok(PointRef::Vertex(self.edges[last].b))
    }
}

fn same_point(p: PointRef, q: PointRef) -> bool {
    match (p, q) {
        (PointRef::Vertex(a), PointRef::Vertex(b)) => a == b,
        (
            PointRef::Edge {
                edge: e1,
                offset: o1,
            },
            PointRef::Edge {
                edge: e2,
                offset: o2,
            },
        ) => e1 == e2 && (o1 - o2).abs() <= POINT_TOL,
        _ => false,
    }
}

impl WeightedTree {
    /// `∫∫ ν(dx) ν(dy) d(x, y)`.
    pub fn mean_dist(&self) -> f64 {
        let (t, mass) = self.atoms_at_vertices();
        let total: f64 = pairwise_sum(mass.iter().copied());
        let rooted = t.rooted_at(0);
        let mut below = mass.clone();
        let mut terms = Vec::with_capacity(t.n);
        for &x in rooted.order.iter().rev() {
            if let Some((p, e)) = rooted.parent[x] {
                terms.push(2.0 * t.edges[e].len * below[x] * (total - below[x]));
                below[p] += below[x];
            }
        }
        pairwise_sum(terms)
    }

    /// An atom drawn with probability proportional to its mass.
    pub fn sample_weight_point<R: Rng + ?Sized>(&self, rng: &mut R) -> PointRef {
        let target = rng.random::<f64>() * self.total_mass();
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.mass;
            if target < acc {
                return a.at;
            }
        }
        self.atoms.last().unwrap().at
    }

    pub fn sample_length_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PointRef> {
        self.tree.sample_length_point(rng)
    }

    /// Exact value of `∫ ν(dv) ∫ μ(du) F(ν(S^{T,u,v}), height(S^{T,u,v}))`.
    ///
    /// `edge_integral(m, h, len)` must return `∫_0^len F(m, h + y) dy`: along
    /// an edge the subtree weight is constant and its height grows with
    /// unit slope from the height `h` of what lies beyond the edge.
    pub fn campbell_integral<F>(&self, edge_integral: F) -> f64
    where
        F: Fn(f64, f64, f64) -> f64,
    {
        let (t, mass) = self.atoms_at_vertices();
        let total: f64 = pairwise_sum(mass.iter().copied());
        let h = t.heights(0);
        let below = subtree_mass(&t, &h, &mass);
        let terms = h.order.iter().filter_map(|&c| {
            let (_, e) = h.parent[c]?;
            let len = t.edges[e].len;
            let m = below[c];
            Some(
                (total - m) * edge_integral(m, h.down[c], len)
                    + m * edge_integral(total - m, h.up_excl[c], len),
            )
        });
        pairwise_sum(terms)
    }

    /// Same as [`WeightedTree::campbell_integral`] with `v` fixed at the
    /// root vertex instead of integrated against `ν`.
    pub fn rooted_campbell_integral<F>(&self, edge_integral: F) -> Result<f64>
    where
        F: Fn(f64, f64, f64) -> f64,
    {
        let r = self
            .tree
            .root
            .ok_or_else(|| Error::InvalidTree("tree has no root".into()))?;
        let (t, mass) = self.atoms_at_vertices();
        let h = t.heights(r);
        let below = subtree_mass(&t, &h, &mass);
        let terms = h.order.iter().filter_map(|&c| {
            let (_, e) = h.parent[c]?;
            Some(edge_integral(below[c], h.down[c], t.edges[e].len))
        });
        Ok(pairwise_sum(terms))
    }
}

fn subtree_mass(t: &Tree, h: &Heights, mass: &[f64]) -> Vec<f64> {
    let mut below = mass.to_vec();
    for &x in h.order.iter().rev() {
        if let Some((p, _)) = h.parent[x] {
            below[p] += below[x];
        }
    }
    debug_assert_eq!(below.len(), t.n);
    below
}

/// `(d̄(T) − d̄(Θ(T, u, v)))²` against `4 ν(S)² ν(T∖S)² d(u, v)²`.
pub fn spr_meandist_bound(t: &WeightedTree, u: PointRef, v: PointRef) -> Result<(f64, f64)> {
    let d = t.distance(u, v)?;
    if d == 0.0 {
        return Ok((0.0, 0.0));
    }
    let moved = t.spr(u, v)?;
    let diff = t.mean_dist() - moved.mean_dist();
    let s = t.subtree(u, v)?.mass;
    let rest = t.total_mass() - s;
    Ok((diff * diff, 4.0 * s * s * rest * rest * d * d))
}
