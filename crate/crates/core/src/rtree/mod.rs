//! Finite real trees with positive edge lengths and atomic weights.

mod contour;
mod measure;
mod surgery;

pub use contour::{tree_from_excursion, ContourTree};
pub use measure::{spr_meandist_bound, SubtreeInfo};
pub use surgery::Subdivision;

use crate::error::{Error, Result};

/// Offsets within this distance of an edge end are treated as the endpoint.
pub const POINT_TOL: f64 = 1e-12;

/// A location on a tree: a vertex, or a point inside an edge given by its
/// distance from the edge's `a` end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointRef {
    Vertex(usize),
    Edge { edge: usize, offset: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub len: f64,
}

impl Edge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// A finite metric tree. Vertices are `0..num_vertices()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    n: usize,
    edges: Vec<Edge>,
    root: Option<usize>,
    adj: Vec<Vec<(usize, usize)>>,
}

/// A point mass on a tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub at: PointRef,
    pub mass: f64,
}

/// A finite tree carrying an atomic probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTree {
    tree: Tree,
    atoms: Vec<Atom>,
}

/// Parent structure of a tree hung from one vertex, with vertices in
/// preorder.
#[derive(Debug, Clone)]
pub(crate) struct Rooted {
    pub order: Vec<usize>,
    pub parent: Vec<Option<(usize, usize)>>,
    pub depth: Vec<f64>,
}

impl Tree {
    pub fn new(n: usize, edges: Vec<Edge>, root: Option<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTree("no vertices".into()));
        }
        if edges.len() + 1 != n {
            return Err(Error::InvalidTree(format!(
                "{} vertices need {} edges, got {}",
                n,
                n - 1,
                edges.len()
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            if e.a >= n || e.b >= n || e.a == e.b {
                return Err(Error::InvalidTree(format!("bad endpoints on edge {i}")));
            }
            if !(e.len > 0.0 && e.len.is_finite()) {
                return Err(Error::InvalidTree(format!(
                    "edge {i} has non-positive length {}",
                    e.len
                )));
            }
            adj[e.a].push((e.b, i));
            adj[e.b].push((e.a, i));
        }
        if let Some(r) = root {
            if r >= n {
                return Err(Error::InvalidTree(format!("root {r} out of range")));
            }
        }
        let t = Tree {
            n,
            edges,
            root,
            adj,
        };
        // n - 1 edges and connected means acyclic.
        let reached = t.rooted_at(0).order.len();
        if reached != n {
            return Err(Error::InvalidTree("graph is not connected".into()));
        }
        Ok(t)
    }

    pub(crate) fn from_parts(n: usize, edges: Vec<Edge>, root: Option<usize>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            adj[e.a].push((e.b, i));
            adj[e.b].push((e.a, i));
        }
        Tree {
            n,
            edges,
            root,
            adj,
        }
    }

    pub fn singleton() -> Self {
        Tree::from_parts(1, Vec::new(), Some(0))
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    /// `(neighbour, edge index)` pairs at `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn total_length(&self) -> f64 {
        pairwise_sum(self.edges.iter().map(|e| e.len))
    }

    /// Checks a point reference and snaps offsets at edge ends to vertices.
    pub fn check_point(&self, p: PointRef) -> Result<PointRef> {
        match p {
            PointRef::Vertex(v) if v < self.n => Ok(p),
            PointRef::Vertex(v) => Err(Error::InvalidPoint(format!("vertex {v} out of range"))),
            PointRef::Edge { edge, offset } => {
                let e = self
                    .edges
                    .get(edge)
                    .ok_or_else(|| Error::InvalidPoint(format!("edge {edge} out of range")))?;
                if !(offset.is_finite() && offset >= -POINT_TOL && offset <= e.len + POINT_TOL) {
                    return Err(Error::InvalidPoint(format!(
                        "offset {offset} outside edge {edge} of length {}",
                        e.len
                    )));
                }
                Ok(self.snap(edge, offset))
            }
        }
    }

    pub(crate) fn snap(&self, edge: usize, offset: f64) -> PointRef {
        let e = &self.edges[edge];
        if offset <= POINT_TOL {
            PointRef::Vertex(e.a)
        } else if offset >= e.len - POINT_TOL {
            PointRef::Vertex(e.b)
        } else {
            PointRef::Edge { edge, offset }
        }
    }

    pub(crate) fn rooted_at(&self, r: usize) -> Rooted {
        let mut order = Vec::with_capacity(self.n);
        let mut parent = vec![None; self.n];
        let mut depth = vec![0.0; self.n];
        let mut seen = vec![false; self.n];
        let mut stack = vec![r];
        seen[r] = true;
        while let Some(x) = stack.pop() {
            order.push(x);
            for &(y, e) in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some((x, e));
                    depth[y] = depth[x] + self.edges[e].len;
                    stack.push(y);
                }
            }
        }
        Rooted {
            order,
            parent,
            depth,
        }
    }

    /// Distances from `p` to every vertex.
    pub fn distances_from(&self, p: PointRef) -> Result<Vec<f64>> {
        let p = self.check_point(p)?;
        Ok(match p {
            PointRef::Vertex(v) => self.rooted_at(v).depth,
            PointRef::Edge { edge, offset } => {
                let e = self.edges[edge];
                let da = self.rooted_at(e.a).depth;
                let db = self.rooted_at(e.b).depth;
                da.iter()
                    .zip(&db)
                    .map(|(x, y)| (x + offset).min(y + e.len - offset))
                    .collect()
            }
        })
    }

    /// Distance from a point to `q`, given the vertex distances of that point.
    pub(crate) fn dist_via(&self, from_vertices: &[f64], q: PointRef) -> f64 {
        match q {
            PointRef::Vertex(v) => from_vertices[v],
            PointRef::Edge { edge, offset } => {
                let e = self.edges[edge];
                (from_vertices[e.a] + offset).min(from_vertices[e.b] + e.len - offset)
            }
        }
    }

    /// Distance from `p` to `q`, given the vertex distances of `p`.
    pub(crate) fn dist_pair(&self, p: PointRef, from_p: &[f64], q: PointRef) -> f64 {
        if let (
            PointRef::Edge {
                edge: e1,
                offset: o1,
            },
            PointRef::Edge {
                edge: e2,
                offset: o2,
            },
        ) = (p, q)
        {
            if e1 == e2 {
                return (o1 - o2).abs();
            }
        }
        self.dist_via(from_p, q)
    }

    pub fn distance(&self, p: PointRef, q: PointRef) -> Result<f64> {
        let p = self.check_point(p)?;
        let q = self.check_point(q)?;
        if let (
            PointRef::Edge {
                edge: e1,
                offset: o1,
            },
            PointRef::Edge {
                edge: e2,
                offset: o2,
            },
        ) = (p, q)
        {
            if e1 == e2 {
                return Ok((o1 - o2).abs());
            }
        }
        let dp = self.distances_from(p)?;
        Ok(self.dist_via(&dp, q))
    }

    /// Full vertex-to-vertex distance matrix, row major.
    pub fn vertex_distance_matrix(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * self.n);
        for v in 0..self.n {
            out.extend(self.rooted_at(v).depth);
        }
        // Rows sum along different paths; mirror one triangle so the
        // matrix is exactly symmetric.
        for i in 0..self.n {
            for j in 0..i {
                out[j * self.n + i] = out[i * self.n + j];
            }
        }
        out
    }

    /// Largest distance from `p` to a point of the tree.
    pub fn height(&self, p: PointRef) -> Result<f64> {
        Ok(self.distances_from(p)?.into_iter().fold(0.0, f64::max))
    }

    pub fn diameter(&self) -> f64 {
        let d0 = self.rooted_at(0).depth;
        let far = argmax(&d0);
        self.rooted_at(far).depth.into_iter().fold(0.0, f64::max)
    }

    /// Distance from `p` to the root vertex, if one is set.
    pub fn root_distance(&self, p: PointRef) -> Result<f64> {
        let r = self
            .root
            .ok_or_else(|| Error::InvalidTree("tree has no root".into()))?;
        self.distance(PointRef::Vertex(r), p)
    }

    /// Newick string of the topology with edge lengths, hung from the root
    /// (or vertex 0). Vertices are labelled `v<id>`; weights are not encoded.
    pub fn to_newick(&self) -> String {
        let r = self.root.unwrap_or(0);
        let rooted = self.rooted_at(r);
        let mut children: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        for &x in &rooted.order {
            if let Some((p, e)) = rooted.parent[x] {
                children[p].push((x, self.edges[e].len));
            }
        }
        for c in &mut children {
            c.sort_by_key(|&(x, _)| x);
        }
        let mut rendered: Vec<String> = vec![String::new(); self.n];
        for &x in rooted.order.iter().rev() {
            let mut s = String::new();
            if !children[x].is_empty() {
                s.push('(');
                let parts: Vec<String> = children[x]
                    .iter()
                    .map(|&(c, len)| format!("{}:{}", std::mem::take(&mut rendered[c]), len))
                    .collect();
                s.push_str(&parts.join(","));
                s.push(')');
            }
            s.push_str(&format!("v{x}"));
            rendered[x] = s;
        }
        format!("{};", rendered[r])
    }
}

impl WeightedTree {
    pub fn new(tree: Tree, atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidTree("weight has no atoms".into()));
        }
        let mut checked = Vec::with_capacity(atoms.len());
        for a in atoms {
            if !(a.mass >= 0.0 && a.mass.is_finite()) {
                return Err(Error::InvalidTree(format!("bad atom mass {}", a.mass)));
            }
            checked.push(Atom {
                at: tree.check_point(a.at)?,
                mass: a.mass,
            });
        }
        let total: f64 = pairwise_sum(checked.iter().map(|a| a.mass));
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidTree(format!("weights sum to {total}, not 1")));
        }
        Ok(WeightedTree {
            tree,
            atoms: checked,
        })
    }

    pub(crate) fn from_parts(tree: Tree, atoms: Vec<Atom>) -> Self {
        WeightedTree { tree, atoms }
    }

    /// A single point with a unit atom.
    pub fn point() -> Self {
        WeightedTree::from_parts(
            Tree::singleton(),
            vec![Atom {
                at: PointRef::Vertex(0),
                mass: 1.0,
            }],
        )
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_length(&self) -> f64 {
        self.tree.total_length()
    }

    pub fn distance(&self, p: PointRef, q: PointRef) -> Result<f64> {
        self.tree.distance(p, q)
    }

    pub fn diameter(&self) -> f64 {
        self.tree.diameter()
    }

    pub fn height(&self, p: PointRef) -> Result<f64> {
        self.tree.height(p)
    }

    pub fn total_mass(&self) -> f64 {
        pairwise_sum(self.atoms.iter().map(|a| a.mass))
    }

    /// Refines the tree so that every atom sits on a vertex; returns the
    /// refined tree and the mass carried by each of its vertices.
    pub fn atoms_at_vertices(&self) -> (Tree, Vec<f64>) {
        let pts: Vec<PointRef> = self.atoms.iter().map(|a| a.at).collect();
        let sub = self.tree.subdivide(&pts);
        let mut mass = vec![0.0; sub.tree.num_vertices()];
        for (a, &v) in self.atoms.iter().zip(&sub.vertices) {
            mass[v] += a.mass;
        }
        (sub.tree, mass)
    }
}

pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

/// Order-stable pairwise summation.
pub(crate) fn pairwise_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let v: Vec<f64> = it.into_iter().collect();
    fn rec(x: &[f64]) -> f64 {
        if x.len() <= 16 {
            x.iter().sum()
        } else {
            let (l, r) = x.split_at(x.len() / 2);
            rec(l) + rec(r)
        }
    }
    rec(&v)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Root 0, branch 1 at distance 1/2, leaves 2 and 3 at distance 1.
    pub fn y_tree() -> Tree {
        Tree::new(
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
        .unwrap()
    }

    pub fn segment(len: f64) -> Tree {
        Tree::new(2, vec![Edge { a: 0, b: 1, len }], Some(0)).unwrap()
    }
}
