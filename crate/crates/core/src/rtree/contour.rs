//! The quotient tree of a piecewise-linear excursion.

use super::{Atom, Edge, PointRef, Tree, WeightedTree};
use crate::error::{domain, Result};
use crate::excursion::{Excursion, LEVEL_TOL};

/// `T_e` together with the bookkeeping that links tree points back to
/// times of the excursion.
#[derive(Debug, Clone)]
pub struct ContourTree {
    tree: WeightedTree,
    excursion: Excursion,
    breakpoint_vertex: Vec<usize>,
    edge_segment: Vec<usize>,
    parent: Vec<Option<(usize, usize)>>,
    height: Vec<f64>,
}

/// Builds `T_e` with the push-forward of Lebesgue measure discretized onto
/// `m` atoms at times `(i - ½) ζ / m`.
pub fn tree_from_excursion(e: &Excursion, m: usize) -> Result<WeightedTree> {
    Ok(ContourTree::new(e, m)?.tree)
}

impl ContourTree {
    pub fn new(e: &Excursion, m: usize) -> Result<Self> {
        if m < 1 {
            return Err(domain("m", m as f64, "[1, ∞)"));
        }
        let t = e.times();
        let v = e.values();
        let mut height = vec![0.0];
        let mut parent: Vec<Option<(usize, usize)>> = vec![None];
        let mut edges: Vec<Edge> = Vec::new();
        let mut edge_segment = Vec::new();
        let mut breakpoint_vertex = vec![0usize];
        let mut stack = vec![0usize];
        for i in 0..t.len() - 1 {
            let h = v[i + 1];
            if h > v[i] {
                let top = *stack.last().unwrap();
                let w = height.len();
                height.push(h);
                parent.push(Some((top, edges.len())));
                edge_segment.push(i);
                edges.push(Edge {
                    a: top,
                    b: w,
                    len: (h - height[top]).max(f64::MIN_POSITIVE),
                });
                stack.push(w);
            } else {
                while stack.len() > 1 && height[stack[stack.len() - 2]] >= h - LEVEL_TOL {
                    stack.pop();
                }
                let top = *stack.last().unwrap();
                if height[top] > h + LEVEL_TOL {
                    // The valley lies inside the edge below `top`: split it.
                    let (below, e_low) = parent[top].expect("non-root vertex");
                    let x = height.len();
                    height.push(h);
                    parent.push(Some((below, e_low)));
                    edges[e_low] = Edge {
                        a: below,
                        b: x,
                        len: h - height[below],
                    };
                    parent[top] = Some((x, edges.len()));
                    edge_segment.push(edge_segment[e_low]);
                    edges.push(Edge {
                        a: x,
                        b: top,
                        len: height[top] - h,
                    });
                    *stack.last_mut().unwrap() = x;
                }
            }
            breakpoint_vertex.push(*stack.last().unwrap());
        }
        let n = height.len();
        let bare = Tree::from_parts(n, edges, Some(0));
        let mut ct = ContourTree {
            tree: WeightedTree::from_parts(bare, Vec::new()),
            excursion: e.clone(),
            breakpoint_vertex,
            edge_segment,
            parent,
            height,
        };
        let zeta = e.zeta();
        let mass = 1.0 / m as f64;
        let atoms = (0..m)
            .map(|i| Atom {
                at: ct.locate((i as f64 + 0.5) * zeta / m as f64),
                mass,
            })
            .collect();
        ct.tree.atoms = atoms;
        Ok(ct)
    }

    pub fn weighted_tree(&self) -> &WeightedTree {
        &self.tree
    }

    pub fn into_weighted_tree(self) -> WeightedTree {
        self.tree
    }

    pub fn excursion(&self) -> &Excursion {
        &self.excursion
    }

    /// Height of a vertex above the root.
    pub fn vertex_height(&self, v: usize) -> f64 {
        self.height[v]
    }

    /// The vertex that breakpoint `i` of the excursion maps to.
    pub fn breakpoint_vertex(&self, i: usize) -> usize {
        self.breakpoint_vertex[i]
    }

    /// The tree image of time `t ∈ [0, ζ]`.
    pub fn locate(&self, t: f64) -> PointRef {
        let times = self.excursion.times();
        let values = self.excursion.values();
        let t = t.clamp(0.0, self.excursion.zeta());
        let j = times.partition_point(|&x| x <= t);
        if j == 0 {
            return PointRef::Vertex(self.breakpoint_vertex[0]);
        }
        let i = j - 1;
        if j == times.len() || times[i] == t {
            return PointRef::Vertex(self.breakpoint_vertex[i]);
        }
        let y = self.excursion.eval_unchecked(t);
        let high = if values[j] > values[i] { j } else { i };
        self.walk_up(self.breakpoint_vertex[high], y)
    }

    fn walk_up(&self, from: usize, y: f64) -> PointRef {
        let mut cur = from;
        loop {
            if self.height[cur] <= y + LEVEL_TOL {
                return PointRef::Vertex(cur);
            }
            let (p, e) = self.parent[cur].expect("walk stays above the root");
            if self.height[p] < y - LEVEL_TOL {
                return PointRef::Edge {
                    edge: e,
                    offset: y - self.height[p],
                };
            }
            cur = p;
        }
    }

    /// Height of a tree point above the root.
    pub fn point_height(&self, p: PointRef) -> Result<f64> {
        Ok(match self.tree.tree.check_point(p)? {
            PointRef::Vertex(v) => self.height[v],
            PointRef::Edge { edge, offset } => self.height[self.tree.tree.edges[edge].a] + offset,
        })
    }

    /// The first time the excursion visits a tree point, with the point's
    /// height. This is the left end `s_lo` of the excursion interval above
    /// that height which codes the subtree beyond the point.
    pub fn first_up_crossing(&self, p: PointRef) -> Result<(f64, f64)> {
        let p = self.tree.tree.check_point(p)?;
        let (edge, level) = match p {
            PointRef::Vertex(v) => match self.parent[v] {
                None => return Ok((0.0, 0.0)),
                Some((_, e)) => (e, self.height[v]),
            },
            PointRef::Edge { edge, offset } => {
                (edge, self.height[self.tree.tree.edges[edge].a] + offset)
            }
        };
        let seg = self.edge_segment[edge];
        let times = self.excursion.times();
        let values = self.excursion.values();
        let (t0, t1) = (times[seg], times[seg + 1]);
        let (v0, v1) = (values[seg], values[seg + 1]);
        let s = if level >= v1 {
            t1
        } else {
            t0 + (level - v0) * (t1 - t0) / (v1 - v0)
        };
        Ok((s.clamp(t0, t1), level))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w_path() -> Excursion {
        Excursion::new(
            vec![0.0, 0.25, 0.5, 0.75, 1.0],
            vec![0.0, 1.0, 0.5, 1.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn tent_gives_segment() {
        let t = tree_from_excursion(&Excursion::tent(1.0, 0.5).unwrap(), 8).unwrap();
        assert_eq!(t.tree().num_vertices(), 2);
        assert_eq!(t.total_length(), 0.5);
        assert_eq!(t.atoms().len(), 8);
    }

    #[test]
    fn w_path_gives_y() {
        let ct = ContourTree::new(&w_path(), 4).unwrap();
        let t = ct.weighted_tree();
        assert_eq!(t.tree().num_vertices(), 4);
        assert_eq!(t.total_length(), 1.5);
        let l1 = ct.locate(0.25);
        let l2 = ct.locate(0.75);
        assert_eq!(t.distance(l1, l2).unwrap(), 1.0);
        assert_eq!(t.distance(PointRef::Vertex(0), l1).unwrap(), 1.0);
        assert_eq!(ct.locate(1.0), PointRef::Vertex(0));
        assert_eq!(ct.locate(0.5), ct.locate(0.125));
    }

    #[test]
    fn distances_match_quotient_formula() {
        let e = Excursion::new(
            vec![0.0, 0.1, 0.2, 0.35, 0.5, 0.6, 0.8, 1.0],
            vec![0.0, 0.7, 0.3, 0.9, 0.2, 0.6, 0.1, 0.0],
        )
        .unwrap();
        let ct = ContourTree::new(&e, 1).unwrap();
        let t = ct.weighted_tree();
        let grid: Vec<f64> = (0..=40).map(|k| k as f64 / 40.0).collect();
        for &s in &grid {
            for &u in &grid {
                let d = t.distance(ct.locate(s), ct.locate(u)).unwrap();
                assert!((d - e.tree_distance(s, u)).abs() < 1e-12, "{s} {u}");
            }
        }
    }

    #[test]
    fn interior_zero_branches_at_root() {
        let e =
            Excursion::new(vec![0.0, 0.5, 1.0, 1.5, 2.0], vec![0.0, 0.5, 0.0, 0.5, 0.0]).unwrap();
        let ct = ContourTree::new(&e, 2).unwrap();
        assert_eq!(ct.weighted_tree().tree().degree(0), 2);
        assert_eq!(ct.weighted_tree().diameter(), 1.0);
    }

    #[test]
    fn first_up_crossing_inverts_locate() {
        let e = w_path();
        let ct = ContourTree::new(&e, 1).unwrap();
        for &(t, s) in &[(0.1, 0.1), (0.4, 0.175), (0.6, 0.6), (0.95, 0.05)] {
            let (s_lo, a) = ct.first_up_crossing(ct.locate(t)).unwrap();
            assert!((s_lo - s).abs() < 1e-12, "t={t}: {s_lo}");
            assert!((a - e.eval(t).unwrap()).abs() < 1e-12);
        }
        assert_eq!(
            ct.first_up_crossing(PointRef::Vertex(0)).unwrap(),
            (0.0, 0.0)
        );
    }

    #[test]
    fn rejects_zero_grid() {
        assert!(tree_from_excursion(&w_path(), 0).is_err());
    }
}
