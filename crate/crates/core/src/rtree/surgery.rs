//! Edge subdivision, degree-2 suppression and the prune/regraft map.

use super::{measure::SubtreeInfo, Atom, Edge, PointRef, Rooted, Tree, WeightedTree, POINT_TOL};
use crate::error::{Error, Result};

/// A tree refined so that a list of points became vertices, with enough
/// bookkeeping to carry other points of the old tree across.
#[derive(Debug, Clone)]
pub struct Subdivision {
    pub tree: Tree,
    /// Vertex of the refined tree for each requested point.
    pub vertices: Vec<usize>,
    /// Per old edge: split offsets (ascending, measured from `a`) and the
    /// vertex created at each.
    splits: Vec<Vec<(f64, usize)>>,
    /// Per old edge: the refined edges it was cut into, `a` end first.
    pieces: Vec<Vec<usize>>,
}

impl Subdivision {
    /// Image of a point of the old tree.
    pub fn map(&self, p: PointRef) -> PointRef {
        match p {
            PointRef::Vertex(_) => p,
            PointRef::Edge { edge, offset } => {
                let sp = &self.splits[edge];
                if sp.is_empty() {
                    return p;
                }
                let k = sp.partition_point(|&(o, _)| o < offset - POINT_TOL);
                if k < sp.len() && (sp[k].0 - offset).abs() <= POINT_TOL {
                    return PointRef::Vertex(sp[k].1);
                }
                let start = if k == 0 { 0.0 } else { sp[k - 1].0 };
                let piece = self.pieces[edge][k];
                self.tree.snap(piece, offset - start)
            }
        }
    }
}

impl Tree {
    /// Makes every given point a vertex by cutting the edges it lies on.
    pub fn subdivide(&self, points: &[PointRef]) -> Subdivision {
        let mut splits: Vec<Vec<(f64, usize)>> = vec![Vec::new(); self.edges.len()];
        for p in points {
            if let PointRef::Edge { edge, offset } = *p {
                splits[edge].push((offset, usize::MAX));
            }
        }
        let mut n = self.n;
        let mut edges = self.edges.clone();
        let mut pieces: Vec<Vec<usize>> = (0..self.edges.len()).map(|i| vec![i]).collect();
        for (ei, sp) in splits.iter_mut().enumerate() {
            if sp.is_empty() {
                continue;
            }
            sp.sort_by(|x, y| x.0.total_cmp(&y.0));
            sp.dedup_by(|x, y| (x.0 - y.0).abs() <= POINT_TOL);
            let orig = self.edges[ei];
            let mut prev_v = orig.a;
            let mut prev_o = 0.0;
            let mut chain = Vec::with_capacity(sp.len() + 1);
            for (k, s) in sp.iter_mut().enumerate() {
                let w = n;
                n += 1;
                s.1 = w;
                let piece = Edge {
                    a: prev_v,
                    b: w,
                    len: s.0 - prev_o,
                };
                if k == 0 {
                    edges[ei] = piece;
                    chain.push(ei);
                } else {
                    chain.push(edges.len());
                    edges.push(piece);
                }
                prev_v = w;
                prev_o = s.0;
            }
            chain.push(edges.len());
            edges.push(Edge {
                a: prev_v,
                b: orig.b,
                len: orig.len - prev_o,
            });
            pieces[ei] = chain;
        }
        let mut sub = Subdivision {
            tree: Tree::from_parts(n, edges, self.root),
            vertices: Vec::new(),
            splits,
            pieces,
        };
        sub.vertices = points
            .iter()
            .map(|p| match sub.map(*p) {
                PointRef::Vertex(v) => v,
                PointRef::Edge { .. } => unreachable!("split point maps to a vertex"),
            })
            .collect();
        sub
    }

    /// Removes vertices of degree 2 (other than the root and those marked
    /// in `keep`), merging their two edges. Returns the new tree and the
    /// image of every old vertex and old edge start.
    pub(crate) fn suppress_degree2(&self, keep: &[bool]) -> (Tree, Suppression) {
        let kept: Vec<bool> = (0..self.n)
            .map(|v| self.degree(v) != 2 || keep[v] || self.root == Some(v))
            .collect();
        let mut new_id = vec![usize::MAX; self.n];
        let mut next = 0;
        for v in 0..self.n {
            if kept[v] {
                new_id[v] = next;
                next += 1;
            }
        }
        let mut edges = Vec::new();
        let mut edge_img = vec![(usize::MAX, 0.0, true); self.edges.len()];
        let mut vertex_img = vec![PointRef::Vertex(usize::MAX); self.n];
        for v in 0..self.n {
            if kept[v] {
                vertex_img[v] = PointRef::Vertex(new_id[v]);
            }
        }
        for start in 0..self.n {
            if !kept[start] {
                continue;
            }
            for &(first, e0) in &self.adj[start] {
                if edge_img[e0].0 != usize::MAX {
                    continue;
                }
                let id = edges.len();
                let mut pos = 0.0;
                let mut from = start;
                let mut cur = first;
                let mut e = e0;
                loop {
                    let ed = self.edges[e];
                    edge_img[e] = (id, pos, ed.a == from);
                    pos += ed.len;
                    if kept[cur] {
                        break;
                    }
                    vertex_img[cur] = PointRef::Edge {
                        edge: id,
                        offset: pos,
                    };
                    let &(nxt, ne) = self.adj[cur]
                        .iter()
                        .find(|&&(_, x)| x != e)
                        .expect("degree-2 vertex has a second edge");
                    from = cur;
                    cur = nxt;
                    e = ne;
                }
                edges.push(Edge {
                    a: new_id[start],
                    b: new_id[cur],
                    len: pos,
                });
            }
        }
        let root = self.root.map(|r| new_id[r]);
        let tree = Tree::from_parts(next, edges, root);
        (
            tree,
            Suppression {
                vertex_img,
                edge_img,
                old_edges: self.edges.clone(),
            },
        )
    }
}

pub(crate) struct Suppression {
    vertex_img: Vec<PointRef>,
    edge_img: Vec<(usize, f64, bool)>,
    old_edges: Vec<Edge>,
}

impl Suppression {
    pub(crate) fn map(&self, p: PointRef) -> PointRef {
        match p {
            PointRef::Vertex(v) => self.vertex_img[v],
            PointRef::Edge { edge, offset } => {
                let (id, start, forward) = self.edge_img[edge];
                let off = if forward {
                    offset
                } else {
                    self.old_edges[edge].len - offset
                };
                PointRef::Edge {
                    edge: id,
                    offset: start + off,
                }
            }
        }
    }
}

/// Vertices of the component of `T \ {u}` that does not contain `v`, as a
/// membership mask, plus the neighbour of `u` towards `v`.
fn far_side(tree: &Tree, u: usize, v: usize) -> (Vec<bool>, Option<usize>) {
    let from_v: Rooted = tree.rooted_at(v);
    let mut in_s = vec![false; tree.n];
    for &x in &from_v.order {
        if let Some((p, _)) = from_v.parent[x] {
            if p == u || in_s[p] {
                in_s[x] = true;
            }
        }
    }
    let toward_v = from_v.parent[u].map(|(p, _)| p);
    (in_s, toward_v)
}

fn atom_in_side(tree: &Tree, in_s: &[bool], p: PointRef) -> bool {
    match p {
        PointRef::Vertex(x) => in_s[x],
        PointRef::Edge { edge, .. } => {
            let e = tree.edges[edge];
            in_s[e.a] || in_s[e.b]
        }
    }
}

impl WeightedTree {
    /// Prunes the subtree on the far side of `u` from `v` and regrafts it at
    /// `v`. Atoms in the subtree travel with it.
    pub fn spr(&self, u: PointRef, v: PointRef) -> Result<WeightedTree> {
        Ok(self.spr_tracking(u, v, &[])?.0)
    }

    /// [`WeightedTree::spr`] that also reports where the listed points of the
    /// old tree end up.
    pub fn spr_tracking(
        &self,
        u: PointRef,
        v: PointRef,
        track: &[PointRef],
    ) -> Result<(WeightedTree, Vec<PointRef>)> {
        let t = &self.tree;
        let u = t.check_point(u)?;
        let v = t.check_point(v)?;
        let track: Vec<PointRef> = track
            .iter()
            .map(|p| t.check_point(*p))
            .collect::<Result<_>>()?;
        if t.distance(u, v)? == 0.0 {
            return Ok((self.clone(), track));
        }
        let sub = t.subdivide(&[u, v]);
        let (uv, vv) = (sub.vertices[0], sub.vertices[1]);
        let (in_s, _) = far_side(&sub.tree, uv, vv);

        let mut edges = sub.tree.edges.clone();
        for e in edges.iter_mut() {
            if e.a == uv && in_s[e.b] {
                e.a = vv;
            } else if e.b == uv && in_s[e.a] {
                e.b = vv;
            }
        }
        let st = Tree::from_parts(sub.tree.n, edges, sub.tree.root);

        let mut keep = vec![false; st.n];
        keep[uv] = true;
        let (out, sup) = st.suppress_degree2(&keep);
        let carry = |p: PointRef| out.snap_ref(sup.map(sub.map(p)));
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                at: carry(a.at),
                mass: a.mass,
            })
            .collect();
        let tracked = track.iter().map(|p| carry(*p)).collect();
        Ok((WeightedTree::from_parts(out, atoms), tracked))
    }

    /// The subtree on the far side of `u` from `v`, its weight and its
    /// height above `u`.
    pub fn subtree(&self, u: PointRef, v: PointRef) -> Result<SubtreeInfo> {
        let t = &self.tree;
        let u = t.check_point(u)?;
        let v = t.check_point(v)?;
        if t.distance(u, v)? == 0.0 {
            return Err(Error::InvalidPoint("subtree needs u != v".into()));
        }
        let sub = t.subdivide(&[u, v]);
        let (uv, vv) = (sub.vertices[0], sub.vertices[1]);
        let st = &sub.tree;
        let (in_s, _) = far_side(st, uv, vv);

        let mass = crate::rtree::pairwise_sum(self.atoms.iter().filter_map(|a| {
            let p = sub.map(a.at);
            atom_in_side(st, &in_s, p).then_some(a.mass)
        }));

        let mut new_id = vec![usize::MAX; st.n];
        new_id[uv] = 0;
        let mut next = 1;
        for x in 0..st.n {
            if in_s[x] {
                new_id[x] = next;
                next += 1;
            }
        }
        let edges: Vec<Edge> = st
            .edges
            .iter()
            .filter(|e| in_s[e.a] || in_s[e.b])
            .map(|e| Edge {
                a: new_id[e.a],
                b: new_id[e.b],
                len: e.len,
            })
            .collect();
        let skeleton = Tree::from_parts(next, edges, Some(0));
        let height = skeleton.rooted_at(0).depth.into_iter().fold(0.0, f64::max);
        Ok(SubtreeInfo {
            skeleton,
            mass,
            height,
        })
    }
}

impl Tree {
    pub(crate) fn snap_ref(&self, p: PointRef) -> PointRef {
        match p {
            PointRef::Vertex(_) => p,
            PointRef::Edge { edge, offset } => self.snap(edge, offset),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    fn uniform_leaves(t: Tree) -> WeightedTree {
        WeightedTree::new(
            t,
            vec![
                Atom {
                    at: PointRef::Vertex(2),
                    mass: 0.5,
                },
                Atom {
                    at: PointRef::Vertex(3),
                    mass: 0.5,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn subdivide_maps_points() {
        let t = y_tree();
        let sub = t.subdivide(&[
            PointRef::Edge {
                edge: 1,
                offset: 0.2,
            },
            PointRef::Edge {
                edge: 1,
                offset: 0.4,
            },
            PointRef::Vertex(3),
        ]);
        assert_eq!(sub.tree.num_vertices(), 6);
        assert_eq!(sub.vertices[2], 3);
        assert!((sub.tree.total_length() - 1.5).abs() < 1e-15);
        let p = sub.map(PointRef::Edge {
            edge: 1,
            offset: 0.3,
        });
        let d = sub.tree.distance(p, PointRef::Vertex(0)).unwrap();
        assert!((d - 0.8).abs() < 1e-15);
        let q = sub.map(PointRef::Edge {
            edge: 1,
            offset: 0.45,
        });
        assert!((sub.tree.distance(q, PointRef::Vertex(2)).unwrap() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn suppression_merges_chains() {
        let t = y_tree();
        let sub = t.subdivide(&[PointRef::Edge {
            edge: 0,
            offset: 0.1,
        }]);
        let (back, sup) = sub
            .tree
            .suppress_degree2(&vec![false; sub.tree.num_vertices()]);
        assert_eq!(back.num_vertices(), 4);
        assert!((back.total_length() - 1.5).abs() < 1e-15);
        let img = sup.map(PointRef::Vertex(sub.vertices[0]));
        assert!((back.distance(img, PointRef::Vertex(0)).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn spr_y_tree_example() {
        let wt = uniform_leaves(y_tree());
        // u is the point 0.75 from the root on the arm to leaf 2.
        let u = PointRef::Edge {
            edge: 1,
            offset: 0.25,
        };
        let (out, tr) = wt
            .spr_tracking(
                u,
                PointRef::Vertex(0),
                &[
                    PointRef::Vertex(0),
                    PointRef::Vertex(2),
                    PointRef::Vertex(3),
                    u,
                ],
            )
            .unwrap();
        let d = |i: usize, j: usize| out.distance(tr[i], tr[j]).unwrap();
        assert!((d(1, 0) - 0.25).abs() < 1e-15);
        assert!((d(1, 2) - 1.25).abs() < 1e-15);
        assert!((d(3, 0) - 0.75).abs() < 1e-15);
        assert!((out.total_length() - 1.5).abs() < 1e-15);
        assert!((out.total_mass() - 1.0).abs() < 1e-15);
        // u stays behind as a leaf.
        if let PointRef::Vertex(x) = tr[3] {
            assert_eq!(out.tree().degree(x), 1);
        } else {
            panic!("u should be a vertex");
        }
    }

    #[test]
    fn spr_identity_when_u_equals_v() {
        let wt = uniform_leaves(y_tree());
        let p = PointRef::Edge {
            edge: 2,
            offset: 0.1,
        };
        assert_eq!(wt.spr(p, p).unwrap(), wt);
    }

    #[test]
    fn subtree_y_tree_example() {
        let wt = uniform_leaves(y_tree());
        let u = PointRef::Edge {
            edge: 1,
            offset: 0.25,
        };
        let s = wt.subtree(u, PointRef::Vertex(0)).unwrap();
        assert!((s.height - 0.25).abs() < 1e-15);
        assert_eq!(s.mass, 0.5);
        assert!((s.skeleton.total_length() - 0.25).abs() < 1e-15);
        // From the other side the far part is everything else.
        let s2 = wt.subtree(u, PointRef::Vertex(2)).unwrap();
        assert_eq!(s2.mass, 0.5);
        assert!((s2.height - 0.75).abs() < 1e-15);
        assert!(wt.subtree(u, u).is_err());
    }

    #[test]
    fn atom_at_u_stays_outside() {
        let t = y_tree();
        let wt = WeightedTree::new(
            t,
            vec![
                Atom {
                    at: PointRef::Vertex(1),
                    mass: 0.5,
                },
                Atom {
                    at: PointRef::Vertex(2),
                    mass: 0.5,
                },
            ],
        )
        .unwrap();
        let s = wt
            .subtree(PointRef::Vertex(1), PointRef::Vertex(0))
            .unwrap();
        assert_eq!(s.mass, 0.5);
    }
}
