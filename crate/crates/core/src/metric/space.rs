use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rtree::{PointRef, WeightedTree};

/// Tolerance for symmetry, triangle and normalization checks.
pub const METRIC_TOL: f64 = 1e-12;

/// A finite metric space given by its distance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    n: usize,
    d: Vec<f64>,
}

/// A probability measure on the points of a finite space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    mass: Vec<f64>,
}

/// A relation between two finite spaces covering both of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correspondence {
    pairs: Vec<(usize, usize)>,
}

/// A finite metric space with a probability measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSpace {
    pub space: FiniteMetricSpace,
    pub measure: AtomicMeasure,
}

impl FiniteMetricSpace {
    pub fn new(n: usize, d: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMetric("empty space".into()));
        }
        if d.len() != n * n {
            return Err(Error::InvalidMetric(format!(
                "expected {} entries, got {}",
                n * n,
                d.len()
            )));
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(Error::InvalidMetric(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let x = d[i * n + j];
                if !(x >= 0.0 && x.is_finite()) {
                    return Err(Error::InvalidMetric(format!(
                        "bad distance {x} at ({i}, {j})"
                    )));
                }
                if x != d[j * n + i] {
                    return Err(Error::InvalidMetric(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if d[i * n + k] > d[i * n + j] + d[j * n + k] + METRIC_TOL {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails on ({i}, {j}, {k})"
                        )));
                    }
                }
            }
        }
        Ok(FiniteMetricSpace { n, d })
    }

    /// Points on a line at the given coordinates.
    pub fn from_line(xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        let d = (0..n * n).map(|k| (xs[k / n] - xs[k % n]).abs()).collect();
        FiniteMetricSpace::new(n, d)
    }

    pub fn point() -> Self {
        FiniteMetricSpace { n: 1, d: vec![0.0] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.d
    }

    pub fn diameter(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// Largest positive excess in the four-point condition over all
    /// quadruples; zero for tree metrics.
    pub fn four_point_violation(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a..n {
                for c in 0..n {
                    for e in c..n {
                        let s1 = self.d(a, b) + self.d(c, e);
                        let s2 = self.d(a, c) + self.d(b, e);
                        let s3 = self.d(a, e) + self.d(b, c);
                        worst = worst.max(s1 - s2.max(s3));
                    }
                }
            }
        }
        worst
    }

    /// `sup_y min_{x ∈ image} d(y, x)`.
    pub fn net_radius(&self, image: &[usize]) -> f64 {
        (0..self.n)
            .map(|y| {
                image
                    .iter()
                    .map(|&x| self.d(y, x))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
}

impl AtomicMeasure {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            return Err(Error::InvalidMetric("negative or non-finite mass".into()));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > METRIC_TOL {
            return Err(Error::InvalidMetric(format!(
                "masses sum to {total}, not 1"
            )));
        }
        Ok(AtomicMeasure { mass })
    }

    pub fn dirac(n: usize, at: usize) -> Self {
        let mut mass = vec![0.0; n];
        mass[at] = 1.0;
        AtomicMeasure { mass }
    }

    pub fn uniform(n: usize) -> Self {
        AtomicMeasure {
            mass: vec![1.0 / n as f64; n],
        }
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Image measure under `f` on a space of `n` points.
    pub fn pushforward(&self, f: &[usize], n: usize) -> AtomicMeasure {
        let mut mass = vec![0.0; n];
        for (i, m) in self.mass.iter().enumerate() {
            mass[f[i]] += m;
        }
        AtomicMeasure { mass }
    }
}

impl Correspondence {
    /// Validates that both projections are onto.
    pub fn new(pairs: Vec<(usize, usize)>, nx: usize, ny: usize) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidMetric("empty correspondence".into()));
        }
        let mut cx = vec![false; nx];
        let mut cy = vec![false; ny];
        for &(x, y) in &pairs {
            if x >= nx || y >= ny {
                return Err(Error::InvalidMetric(format!(
                    "pair ({x}, {y}) out of range"
                )));
            }
            cx[x] = true;
            cy[y] = true;
        }
        if cx.contains(&false) || cy.contains(&false) {
            return Err(Error::InvalidMetric(
                "relation is not onto both spaces".into(),
            ));
        }
        Ok(Correspondence { pairs })
    }

    pub(crate) fn from_pairs(pairs: Vec<(usize, usize)>) -> Self {
        Correspondence { pairs }
    }

    /// Every pair `(x, y)`.
    pub fn full(nx: usize, ny: usize) -> Self {
        let pairs = (0..nx).flat_map(|x| (0..ny).map(move |y| (x, y))).collect();
        Correspondence { pairs }
    }

    /// `graph(f) ∪ graph(g)ᵀ`.
    pub fn from_maps(f: &[usize], g: &[usize]) -> Self {
        let mut pairs: Vec<(usize, usize)> = f.iter().enumerate().map(|(x, &y)| (x, y)).collect();
        pairs.extend(g.iter().enumerate().map(|(y, &x)| (x, y)));
        pairs.sort_unstable();
        pairs.dedup();
        Correspondence { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn transpose(&self) -> Correspondence {
        Correspondence {
            pairs: self.pairs.iter().map(|&(x, y)| (y, x)).collect(),
        }
    }
}

/// `dis(R) = sup |d_X(x₁, x₂) − d_Y(y₁, y₂)|` over pairs in `R`.
pub fn distortion(x: &FiniteMetricSpace, y: &FiniteMetricSpace, r: &Correspondence) -> Result<f64> {
    if r.pairs.is_empty() {
        return Err(Error::InvalidMetric("empty correspondence".into()));
    }
    if r.pairs.iter().any(|&(a, b)| a >= x.len() || b >= y.len()) {
        return Err(Error::InvalidMetric("pair out of range".into()));
    }
    let mut worst = 0.0f64;
    for &(x1, y1) in &r.pairs {
        for &(x2, y2) in &r.pairs {
            worst = worst.max((x.d(x1, x2) - y.d(y1, y2)).abs());
        }
    }
    Ok(worst)
}

/// Distortion of a map `f: X → Y`.
pub fn map_distortion(x: &FiniteMetricSpace, y: &FiniteMetricSpace, f: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            worst = worst.max((x.d(i, j) - y.d(f[i], f[j])).abs());
        }
    }
    worst
}

impl WeightedSpace {
    pub fn new(space: FiniteMetricSpace, measure: AtomicMeasure) -> Result<Self> {
        if space.len() != measure.len() {
            return Err(Error::InvalidMetric(format!(
                "{} points but {} masses",
                space.len(),
                measure.len()
            )));
        }
        Ok(WeightedSpace { space, measure })
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    /// Finite approximation of a weighted tree: its vertices, the points
    /// carrying atoms and an `eps/2`-net, with the atoms' masses.
    pub fn from_tree(t: &WeightedTree, eps: f64) -> Result<Self> {
        let tree = t.tree();
        let mut pts: Vec<PointRef> = (0..tree.num_vertices()).map(PointRef::Vertex).collect();
        let push = |p: PointRef, pts: &mut Vec<PointRef>| -> usize {
            if let Some(i) = pts.iter().position(|q| *q == p) {
                i
            } else {
                pts.push(p);
                pts.len() - 1
            }
        };
        let atom_idx: Vec<usize> = t.atoms().iter().map(|a| push(a.at, &mut pts)).collect();
        if tree.total_length() > 0.0 {
            for p in tree.eps_net(eps / 2.0)? {
                push(p, &mut pts);
            }
        }
        let n = pts.len();
        let mut d = vec![0.0; n * n];
        for (i, p) in pts.iter().enumerate() {
            let from = tree.distances_from(*p)?;
            for (j, q) in pts.iter().enumerate() {
                d[i * n + j] = if i == j {
                    0.0
                } else {
                    tree.dist_pair(*p, &from, *q)
                };
            }
        }
        for i in 0..n {
            for j in 0..i {
                let m = 0.5 * (d[i * n + j] + d[j * n + i]);
                d[i * n + j] = m;
                d[j * n + i] = m;
            }
        }
        let mut mass = vec![0.0; n];
        for (a, &i) in t.atoms().iter().zip(&atom_idx) {
            mass[i] += a.mass;
        }
        Ok(WeightedSpace {
            space: FiniteMetricSpace::new(n, d)?,
            measure: AtomicMeasure { mass },
        })
    }

    /// Coarse approximation of a weighted tree by an `eps`-net alone, each
    /// atom moved to its nearest net point. The result is within `eps` of
    /// the tree in both the Hausdorff and the Prohorov sense.
    pub fn from_tree_net(t: &WeightedTree, eps: f64) -> Result<Self> {
        let tree = t.tree();
        let pts = if tree.total_length() > 0.0 {
            tree.eps_net(eps)?
        } else {
            vec![PointRef::Vertex(0)]
        };
        let n = pts.len();
        let from: Vec<Vec<f64>> = pts
            .iter()
            .map(|p| tree.distances_from(*p))
            .collect::<Result<_>>()?;
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let m = 0.5
                    * (tree.dist_pair(pts[i], &from[i], pts[j])
                        + tree.dist_pair(pts[j], &from[j], pts[i]));
                d[i * n + j] = m;
                d[j * n + i] = m;
            }
        }
        let mut mass = vec![0.0; n];
        for a in t.atoms() {
            let near = (0..n)
                .min_by(|&i, &j| {
                    tree.dist_pair(pts[i], &from[i], a.at)
                        .total_cmp(&tree.dist_pair(pts[j], &from[j], a.at))
                })
                .expect("nonempty net");
            mass[near] += a.mass;
        }
        Ok(WeightedSpace {
            space: FiniteMetricSpace::new(n, d)?,
            measure: AtomicMeasure { mass },
        })
    }
}
