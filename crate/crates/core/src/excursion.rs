//! Piecewise-linear excursion paths and path surgery.
//!
//! An [`Excursion`] is a nonnegative continuous path on `[0, ζ]`, zero at
//! both ends, stored as its breakpoints. All crossing times are solved
//! exactly on the linear pieces; nothing here samples a grid.

use crate::error::{domain, Error, Result};

/// Absolute tolerance used when comparing heights against a level and when
/// deciding collinearity during canonicalization.
pub const LEVEL_TOL: f64 = 1e-12;

/// Breakpoint times closer than this (relative to ζ) are merged.
const TIME_MERGE_REL: f64 = 1e-14;

/// A piecewise-linear excursion in canonical form.
///
/// Canonical form: strictly increasing times starting at 0, zero values at
/// both ends, nonnegative interior values, no flat segments and no three
/// consecutive collinear breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Excursion {
    times: Vec<f64>,
    values: Vec<f64>,
}

/// A point `(s, a)` under the graph of an excursion together with the
/// excursion interval `[s_lo, s_hi]` above level `a` that straddles `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPoint {
    pub s: f64,
    pub a: f64,
    pub s_lo: f64,
    pub s_hi: f64,
}

impl GammaPoint {
    pub fn width(&self) -> f64 {
        self.s_hi - self.s_lo
    }
}

impl Excursion {
    /// Builds an excursion from breakpoints, canonicalizing on the way.
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidExcursion(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::InvalidExcursion(
                "need at least two breakpoints".into(),
            ));
        }
        if times.iter().chain(values.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidExcursion("non-finite breakpoint".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidExcursion(format!(
                "path must start at time 0, got {}",
                times[0]
            )));
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidExcursion(format!(
                    "breakpoint times not strictly increasing at {}",
                    w[1]
                )));
            }
        }
        if values[0] != 0.0 || *values.last().unwrap() != 0.0 {
            return Err(Error::InvalidExcursion(
                "path must be zero at both endpoints".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidExcursion(format!("negative height {v}")));
        }
        canonicalize(times, values)
    }

    /// The path `t ↦ 0` on `[0, ζ]` is not an excursion; this builds the
    /// symmetric tent of length `zeta` and peak `peak`.
    pub fn tent(zeta: f64, peak: f64) -> Result<Self> {
        Self::new(vec![0.0, zeta / 2.0, zeta], vec![0.0, peak, 0.0])
    }

    pub(crate) fn from_canonical(times: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert!(times.len() >= 2 && times.len() == values.len());
        Excursion { times, values }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn num_breakpoints(&self) -> usize {
        self.times.len()
    }

    /// Length ζ of the excursion.
    pub fn zeta(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Breakpoint-wise comparison with absolute tolerance.
    pub fn approx_eq(&self, other: &Excursion, tol: f64) -> bool {
        self.times.len() == other.times.len()
            && self
                .times
                .iter()
                .zip(&other.times)
                .chain(self.values.iter().zip(&other.values))
                .all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Height at time `t` by linear interpolation.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let z = self.zeta();
        if !(0.0..=z).contains(&t) {
            return Err(domain("t", t, format!("[0, {z}]")));
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        let j = self.times.partition_point(|&x| x <= t);
        if j == 0 {
            return self.values[0];
        }
        let i = j - 1;
        if self.times[i] == t || j == self.times.len() {
            return self.values[i];
        }
        let (t0, t1) = (self.times[i], self.times[j]);
        let (v0, v1) = (self.values[i], self.values[j]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Minimum of the path over `[s, t]`.
    pub fn min_on(&self, s: f64, t: f64) -> f64 {
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        let mut m = self.eval_unchecked(s).min(self.eval_unchecked(t));
        let lo = self.times.partition_point(|&x| x <= s);
        let hi = self.times.partition_point(|&x| x < t);
        for v in &self.values[lo..hi.max(lo)] {
            m = m.min(*v);
        }
        m
    }

    /// Quotient pseudo-distance between the tree images of times `s` and `t`.
    pub fn tree_distance(&self, s: f64, t: f64) -> f64 {
        let d = self.eval_unchecked(s) + self.eval_unchecked(t) - 2.0 * self.min_on(s, t);
        d.max(0.0)
    }

    /// Finds the excursion interval above level `a` that straddles time `s`.
    ///
    /// When `e(s) = a` the interval starting at `s` is preferred, then the
    /// one ending at `s`; at a strict local maximum the result is `(s, s)`.
    pub fn straddle(&self, s: f64, a: f64) -> Result<GammaPoint> {
        let z = self.zeta();
        if !(s > 0.0 && s < z) {
            return Err(domain("s", s, format!("(0, {z})")));
        }
        let es = self.eval_unchecked(s);
        let tol = LEVEL_TOL * (1.0 + es.abs());
        if !(a >= 0.0) || a > es + tol {
            return Err(domain("a", a, format!("[0, e(s) = {es}]")));
        }
        // Last breakpoint strictly before s and first strictly after.
        let before = self.times.partition_point(|&x| x < s) - 1;
        let after = self.times.partition_point(|&x| x <= s);
        let (s_lo, s_hi) = if es - a > tol {
            (self.scan_left(before, a), self.scan_right(after, a))
        } else if self.values[after] > a {
            (s, self.scan_right(after + 1, a))
        } else if self.values[before] > a {
            (self.scan_left(before.saturating_sub(1), a), s)
        } else {
            (s, s)
        };
        Ok(GammaPoint {
            s,
            a,
            s_lo: s_lo.min(s),
            s_hi: s_hi.max(s),
        })
    }

    fn crossing(&self, i: usize, j: usize, a: f64) -> f64 {
        let (vi, vj) = (self.values[i], self.values[j]);
        if vi == a {
            return self.times[i];
        }
        if vj == a {
            return self.times[j];
        }
        let (ti, tj) = (self.times[i], self.times[j]);
        (ti + (a - vi) * (tj - ti) / (vj - vi)).clamp(ti.min(tj), ti.max(tj))
    }

    // Requires e > a on (t_{start+1}, s).
    fn scan_left(&self, start: usize, a: f64) -> f64 {
        for i in (0..=start).rev() {
            if self.values[i] <= a {
                return self.crossing(i, i + 1, a);
            }
        }
        0.0
    }

    // Requires e > a on (s, t_{start-1}].
    fn scan_right(&self, start: usize, a: f64) -> f64 {
        for j in start..self.times.len() {
            if self.values[j] <= a {
                return self.crossing(j - 1, j, a);
            }
        }
        self.zeta()
    }

    /// Splits the path at a straddle into the part above `(s, a)`, shifted
    /// down to level zero, and the remainder with the gap closed.
    pub fn excise(&self, gp: &GammaPoint) -> Result<(Excursion, Excursion)> {
        if !(gp.s_hi > gp.s_lo) {
            return Err(Error::EmptyExcision { s: gp.s, a: gp.a });
        }
        let z = self.zeta();
        if gp.s_lo <= 0.0 && gp.s_hi >= z {
            return Err(Error::FullExcision { a: gp.a });
        }
        let width = gp.s_hi - gp.s_lo;

        let mut ht = vec![0.0];
        let mut hv = vec![0.0];
        for (&t, &v) in self.times.iter().zip(&self.values) {
            if t > gp.s_lo && t < gp.s_hi {
                ht.push(t - gp.s_lo);
                hv.push((v - gp.a).max(0.0));
            }
        }
        ht.push(width);
        hv.push(0.0);

        let mut ct = Vec::new();
        let mut cv = Vec::new();
        for (&t, &v) in self.times.iter().zip(&self.values) {
            if t < gp.s_lo {
                ct.push(t);
                cv.push(v);
            }
        }
        ct.push(gp.s_lo);
        cv.push(gp.a);
        for (&t, &v) in self.times.iter().zip(&self.values) {
            if t > gp.s_hi {
                ct.push(t - width);
                cv.push(v);
            }
        }
        let n = ct.len();
        ct[n - 1] = z - width;
        cv[n - 1] = 0.0;
        cv[0] = 0.0;

        Ok((canonicalize(ht, hv)?, canonicalize(ct, cv)?))
    }

    /// Brownian rescaling `S_c e = √c · e(·/c)`.
    pub fn rescale(&self, c: f64) -> Result<Excursion> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(domain("c", c, "(0, ∞)"));
        }
        let sc = c.sqrt();
        Ok(Excursion::from_canonical(
            self.times.iter().map(|t| t * c).collect(),
            self.values.iter().map(|v| v * sc).collect(),
        ))
    }

    /// Rescales to unit length.
    pub fn normalize(&self) -> Excursion {
        self.rescale(1.0 / self.zeta())
            .expect("zeta is positive for a valid excursion")
    }

    /// Multiplies heights by `k > 0`, leaving times alone.
    pub fn scale_heights(&self, k: f64) -> Result<Excursion> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(domain("k", k, "(0, ∞)"));
        }
        Ok(Excursion::from_canonical(
            self.times.clone(),
            self.values.iter().map(|v| v * k).collect(),
        ))
    }

    /// Starting times of the excursions of the path above level `a`, sorted.
    pub fn level_starts(&self, a: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if a < 0.0 {
            return out;
        }
        for i in 0..self.times.len() - 1 {
            let (v0, v1) = (self.values[i], self.values[i + 1]);
            if v0 <= a && v1 > a {
                out.push(self.crossing(i, i + 1, a));
            }
        }
        out
    }

    /// Subtree prune and regraft on the path: excise the straddle `gp`, then
    /// splice the excised piece, unrescaled, into the remainder at time `v`
    /// riding at the remainder's height there.
    pub fn path_spr(&self, gp: &GammaPoint, v: f64) -> Result<Excursion> {
        let (hat, check) = self.excise(gp)?;
        let zc = check.zeta();
        if !(0.0..=zc).contains(&v) {
            return Err(domain("v", v, format!("[0, {zc}]")));
        }
        let h = check.eval_unchecked(v);
        splice(&check, &hat, v, h, self.zeta())
    }
}

/// Inserts the rescaled `e_prime` into the rescaled `e_dprime` at the
/// fraction `u` of the latter, with `e_prime` taking a share `rho` of the
/// unit time interval.
pub fn insert(e_prime: &Excursion, e_dprime: &Excursion, u: f64, rho: f64) -> Result<Excursion> {
    for (what, e) in [("zeta(e')", e_prime), ("zeta(e'')", e_dprime)] {
        if (e.zeta() - 1.0).abs() > LEVEL_TOL {
            return Err(domain(what, e.zeta(), "{1}"));
        }
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(domain("rho", rho, "(0, 1)"));
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(domain("u", u, "[0, 1]"));
    }
    let outer = e_dprime.rescale(1.0 - rho)?;
    let inner = e_prime.rescale(rho)?;
    let tau = (1.0 - rho) * u;
    let h = outer.eval_unchecked(tau);
    splice(&outer, &inner, tau, h, 1.0)
}

fn splice(outer: &Excursion, inner: &Excursion, at: f64, h: f64, total: f64) -> Result<Excursion> {
    let zi = inner.zeta();
    let cap = outer.times.len() + inner.times.len() + 1;
    let mut t = Vec::with_capacity(cap);
    let mut v = Vec::with_capacity(cap);
    for (&ot, &ov) in outer.times.iter().zip(&outer.values) {
        if ot < at {
            t.push(ot);
            v.push(ov);
        }
    }
    for (&it, &iv) in inner.times.iter().zip(&inner.values) {
        t.push(at + it);
        v.push(iv + h);
    }
    for (&ot, &ov) in outer.times.iter().zip(&outer.values) {
        if ot > at {
            t.push(ot + zi);
            v.push(ov);
        }
    }
    let n = t.len();
    t[0] = 0.0;
    t[n - 1] = total;
    v[0] = 0.0;
    v[n - 1] = 0.0;
    canonicalize(t, v)
}

/// Drops near-duplicate times and collinear interior breakpoints.
fn canonicalize(times: Vec<f64>, values: Vec<f64>) -> Result<Excursion> {
    let n = times.len();
    let z = times[n - 1];
    let tmin = TIME_MERGE_REL * z.max(1.0);

    let mut t: Vec<f64> = Vec::with_capacity(n);
    let mut v: Vec<f64> = Vec::with_capacity(n);
    for i in 0..n {
        let (ti, vi) = (times[i], values[i]);
        if let Some(&last) = t.last() {
            if ti - last <= tmin {
                if i == n - 1 {
                    // Keep the exact endpoint.
                    if t.len() == 1 {
                        return Err(Error::InvalidExcursion("zero length".into()));
                    }
                    t.pop();
                    v.pop();
                } else {
                    continue;
                }
            }
        }
        // Drop the previous point if it lies on the chord from its
        // predecessor to this point.
        while t.len() >= 2 {
            let k = t.len();
            let (t0, v0, t1, v1) = (t[k - 2], v[k - 2], t[k - 1], v[k - 1]);
            let interp = v0 + (vi - v0) * (t1 - t0) / (ti - t0);
            if (v1 - interp).abs() <= LEVEL_TOL * (1.0 + v1.abs()) {
                t.pop();
                v.pop();
            } else {
                break;
            }
        }
        t.push(ti);
        v.push(vi);
    }
    if t.len() < 2 || !(z > 0.0) {
        return Err(Error::InvalidExcursion("zero length".into()));
    }
    for w in v.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidExcursion(format!(
                "flat segment at height {}",
                w[0]
            )));
        }
    }
    if t.len() == 2 {
        // Only the endpoints survived, which means the path was identically 0.
        return Err(Error::InvalidExcursion("path is identically zero".into()));
    }
    Ok(Excursion::from_canonical(t, v))
}
