//! Exact dispersion, k-dispersion and torus dispersion of a finite point set.
//!
//! # Why finite enumeration is exact
//!
//! Take any box whose volume is maximal among boxes holding at most `k`
//! points. If one of its faces could move outward without picking up a new
//! point, the volume would strictly grow, so every face is blocked: a left
//! face sits at 0 or just above a point coordinate (an open face), a right
//! face sits at 1 or at a point coordinate (right faces are exclusive). The
//! blocking point lies inside the ranges of all other axes. On the torus the
//! same argument makes every constrained axis an open arc between two point
//! coordinates, or the circle with one point coordinate removed.
//!
//! The enumerator walks the axes one at a time, restricting face candidates
//! to coordinates of points that still lie in the ranges chosen so far, and
//! solves the last axis as a one-dimensional sweep. Branches whose partial
//! volume cannot reach the incumbent are cut. The incumbent is shared across
//! workers, but only strictly worse branches are ever cut, so the result is
//! the same for every worker count.
//!
//! Among boxes of equal volume the witness with the lexicographically
//! smallest `(anchor, sides, openness)` is reported.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use crate::error::{Error, Result};
use crate::geometry::{lex_cmp, volume_of, wrap01, ArcKind, AxisBox, PeriodicBox, PointSet, Region};
use crate::par;

/// Relative slack on the pruning bound so rounding never cuts a tie.
const PRUNE_SLACK: f64 = 1e-9;

/// Largest instance accepted by [`brute_force_oracle`].
pub const BRUTE_FORCE_MAX_POINTS: usize = 12;
pub const BRUTE_FORCE_MAX_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Cube(AxisBox),
    Torus(PeriodicBox),
}

impl Witness {
    pub fn volume(&self) -> f64 {
        match self {
            Witness::Cube(b) => b.volume(),
            Witness::Torus(b) => b.volume(),
        }
    }

    pub fn count_in(&self, points: &PointSet) -> usize {
        match self {
            Witness::Cube(b) => b.count_in(points),
            Witness::Torus(b) => b.count_in(points),
        }
    }

    pub fn anchor(&self) -> &[f64] {
        match self {
            Witness::Cube(b) => b.anchor(),
            Witness::Torus(b) => b.anchor(),
        }
    }

    pub fn sides(&self) -> &[f64] {
        match self {
            Witness::Cube(b) => b.sides(),
            Witness::Torus(b) => b.sides(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionResult {
    /// Supremum of the volumes of admissible boxes.
    pub value: f64,
    pub witness: Witness,
    /// False when the supremum is only approached by admissible boxes.
    pub attained: bool,
    /// Search nodes visited; varies with scheduling and is not part of the
    /// deterministic output.
    pub boxes_examined: u64,
}

/// Largest empty axis-parallel box.
pub fn dispersion_exact(points: &PointSet) -> DispersionResult {
    k_dispersion_exact(points, 0)
}

/// Largest axis-parallel box holding at most `k` points.
pub fn k_dispersion_exact(points: &PointSet, k: usize) -> DispersionResult {
    let geom = CubeGeometry::new(points);
    let (best, examined) = search(&geom, k);
    finish_cube(points, k, best, examined)
}

/// Largest empty periodic box on the torus.
pub fn torus_dispersion_exact(points: &PointSet) -> DispersionResult {
    torus_k_dispersion_exact(points, 0)
}

/// Largest periodic box holding at most `k` points.
pub fn torus_k_dispersion_exact(points: &PointSet, k: usize) -> DispersionResult {
    let geom = TorusGeometry::new(points);
    let (best, examined) = search(&geom, k);
    finish_torus(best, examined)
}

/// Dispatches on `periodic`.
pub fn exact(points: &PointSet, k: usize, periodic: bool) -> DispersionResult {
    if periodic {
        torus_k_dispersion_exact(points, k)
    } else {
        k_dispersion_exact(points, k)
    }
}

/// Rough count of face combinations an unpruned search would visit; the CLI
/// uses it to refuse instances far beyond desk scale.
pub fn enumeration_estimate(points: &PointSet, periodic: bool) -> f64 {
    let m = points.len() as f64 + 1.0;
    let per_axis = if periodic { m * m } else { m * m / 2.0 };
    per_axis.powi(points.dim() as i32 - 1) * m
}

// ---------------------------------------------------------------------------
// Per-axis choices
// ---------------------------------------------------------------------------

trait Face: Copy + Send + Sync {
    fn anchor(&self) -> f64;
    fn side(&self) -> f64;
    fn flag(&self) -> u8;
}

/// `[lo, hi)`, or `(lo, hi)` when `open`.
#[derive(Debug, Clone, Copy)]
struct Interval {
    lo: f64,
    hi: f64,
    open: bool,
}

impl Face for Interval {
    fn anchor(&self) -> f64 {
        self.lo
    }
    fn side(&self) -> f64 {
        self.hi - self.lo
    }
    fn flag(&self) -> u8 {
        self.open as u8
    }
}

impl Interval {
    const FULL: Interval = Interval {
        lo: 0.0,
        hi: 1.0,
        open: false,
    };

    fn inside(&self, x: f64) -> bool {
        (if self.open { x > self.lo } else { x >= self.lo }) && x < self.hi
    }
}

#[derive(Debug, Clone, Copy)]
struct Arc {
    start: f64,
    len: f64,
    kind: ArcKind,
}

impl Face for Arc {
    fn anchor(&self) -> f64 {
        self.start
    }
    fn side(&self) -> f64 {
        self.len
    }
    fn flag(&self) -> u8 {
        match self.kind {
            ArcKind::HalfOpen => 0,
            ArcKind::Open => 1,
        }
    }
}

impl Arc {
    const FULL: Arc = Arc {
        start: 0.0,
        len: 1.0,
        kind: ArcKind::HalfOpen,
    };

    fn between(a: f64, b: f64) -> Arc {
        let len = if a == b { 1.0 } else { wrap01(b - a) };
        Arc {
            start: a,
            len,
            kind: ArcKind::Open,
        }
    }

    fn inside(&self, x: f64) -> bool {
        let t = wrap01(x - self.start);
        match self.kind {
            ArcKind::HalfOpen => t < self.len,
            ArcKind::Open => t > 0.0 && t < self.len,
        }
    }
}

/// Strict "a is a better witness than b".
fn better<F: Face>(a_vol: f64, a: &[F], b_vol: f64, b: &[F]) -> bool {
    compare_candidates(a_vol, a, b_vol, b) == Ordering::Less
}

fn compare_candidates<F: Face>(a_vol: f64, a: &[F], b_vol: f64, b: &[F]) -> Ordering {
    b_vol
        .total_cmp(&a_vol)
        .then_with(|| {
            let aa: Vec<f64> = a.iter().map(Face::anchor).collect();
            let ba: Vec<f64> = b.iter().map(Face::anchor).collect();
            lex_cmp(&aa, &ba)
        })
        .then_with(|| {
            let as_: Vec<f64> = a.iter().map(Face::side).collect();
            let bs: Vec<f64> = b.iter().map(Face::side).collect();
            lex_cmp(&as_, &bs)
        })
        .then_with(|| {
            a.iter()
                .map(Face::flag)
                .cmp(b.iter().map(Face::flag))
        })
}

fn canonical_volume<F: Face>(faces: &[F]) -> f64 {
    let sides: Vec<f64> = faces.iter().map(Face::side).collect();
    volume_of(&sides)
}

trait Geometry: Sync {
    type F: Face;

    fn dim(&self) -> usize;
    fn n(&self) -> usize;
    fn coord(&self, point: u32, axis: usize) -> f64;
    fn full(&self) -> Self::F;
    fn inside(&self, face: &Self::F, x: f64) -> bool;

    /// Candidate faces for a non-final axis, grouped by anchor with sides
    /// non-increasing inside each group.
    fn axis_choices(&self, axis: usize, active: &[u32]) -> Vec<Vec<Self::F>>;

    /// The maximal face per anchor on the final axis, keeping at most `k`
    /// active points inside. Requires `active.len() > k`.
    fn last_axis(&self, axis: usize, active: &[u32], k: usize) -> Vec<Self::F>;

    /// Spread of the coordinates along `axis`, used to order the axes.
    fn spread(&self, axis: usize) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in 0..self.n() as u32 {
            let x = self.coord(p, axis);
            lo = lo.min(x);
            hi = hi.max(x);
        }
        if self.n() == 0 {
            0.0
        } else {
            hi - lo
        }
    }
}

fn distinct_sorted(mut vals: Vec<f64>) -> Vec<f64> {
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    vals
}

struct CubeGeometry<'a> {
    points: &'a PointSet,
}

impl<'a> CubeGeometry<'a> {
    fn new(points: &'a PointSet) -> Self {
        CubeGeometry { points }
    }
}

impl Geometry for CubeGeometry<'_> {
    type F = Interval;

    fn dim(&self) -> usize {
        self.points.dim()
    }
    fn n(&self) -> usize {
        self.points.len()
    }
    fn coord(&self, point: u32, axis: usize) -> f64 {
        self.points.coords()[point as usize * self.points.dim() + axis]
    }
    fn full(&self) -> Interval {
        Interval::FULL
    }
    fn inside(&self, face: &Interval, x: f64) -> bool {
        face.inside(x)
    }

    fn axis_choices(&self, axis: usize, active: &[u32]) -> Vec<Vec<Interval>> {
        let vals = distinct_sorted(active.iter().map(|&p| self.coord(p, axis)).collect());
        let mut rights = vals.clone();
        if rights.last() != Some(&1.0) {
            rights.push(1.0);
        }
        let lefts = std::iter::once((0.0, false)).chain(vals.iter().map(|&c| (c, true)));
        lefts
            .map(|(lo, open)| {
                rights
                    .iter()
                    .rev()
                    .take_while(|&&hi| hi > lo)
                    .map(|&hi| Interval { lo, hi, open })
                    .collect()
            })
            .collect()
    }

    fn last_axis(&self, axis: usize, active: &[u32], k: usize) -> Vec<Interval> {
        let mut xs: Vec<f64> = active.iter().map(|&p| self.coord(p, axis)).collect();
        xs.sort_by(f64::total_cmp);
        let m = xs.len();
        let mut out = Vec::with_capacity(m + 1);
        // closed at 0: keeps the k smallest coordinates
        let hi = if m > k { xs[k] } else { 1.0 };
        if hi > 0.0 {
            out.push(Interval {
                lo: 0.0,
                hi,
                open: false,
            });
        }
        let mut idx = 0;
        while idx < m {
            let c = xs[idx];
            let first_above = idx + xs[idx..].partition_point(|&x| x <= c);
            let hi = if first_above + k < m {
                xs[first_above + k]
            } else {
                1.0
            };
            if hi > c {
                out.push(Interval {
                    lo: c,
                    hi,
                    open: true,
                });
            }
            idx = first_above;
        }
        out
    }
}

struct TorusGeometry {
    dim: usize,
    coords: Vec<f64>,
}

impl TorusGeometry {
    fn new(points: &PointSet) -> Self {
        TorusGeometry {
            dim: points.dim(),
            coords: points.coords().iter().map(|&x| wrap01(x)).collect(),
        }
    }
}

impl Geometry for TorusGeometry {
    type F = Arc;

    fn dim(&self) -> usize {
        self.dim
    }
    fn n(&self) -> usize {
        self.coords.len() / self.dim
    }
    fn coord(&self, point: u32, axis: usize) -> f64 {
        self.coords[point as usize * self.dim + axis]
    }
    fn full(&self) -> Arc {
        Arc::FULL
    }
    fn inside(&self, face: &Arc, x: f64) -> bool {
        face.inside(x)
    }

    fn axis_choices(&self, axis: usize, active: &[u32]) -> Vec<Vec<Arc>> {
        let vals = distinct_sorted(active.iter().map(|&p| self.coord(p, axis)).collect());
        let mut groups = vec![vec![Arc::FULL]];
        for &a in &vals {
            let mut g: Vec<Arc> = vals.iter().map(|&b| Arc::between(a, b)).collect();
            g.sort_by(|x, y| y.len.total_cmp(&x.len));
            groups.push(g);
        }
        groups
    }

    fn last_axis(&self, axis: usize, active: &[u32], k: usize) -> Vec<Arc> {
        let xs: Vec<f64> = active.iter().map(|&p| self.coord(p, axis)).collect();
        let starts = distinct_sorted(xs.clone());
        starts
            .iter()
            .map(|&a| {
                let mut ts: Vec<f64> = xs
                    .iter()
                    .map(|&x| wrap01(x - a))
                    .filter(|&t| t > 0.0)
                    .collect();
                ts.sort_by(f64::total_cmp);
                let len = if ts.len() <= k { 1.0 } else { ts[k] };
                Arc {
                    start: a,
                    len,
                    kind: ArcKind::Open,
                }
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

struct Best<F> {
    volume: f64,
    faces: Vec<F>,
}

struct Searcher<'g, G: Geometry> {
    geom: &'g G,
    k: usize,
    order: Vec<usize>,
    incumbent: &'g AtomicU64,
    best: Option<Best<G::F>>,
    faces: Vec<G::F>,
    examined: u64,
}

impl<G: Geometry> Searcher<'_, G> {
    fn threshold(&self) -> f64 {
        f64::from_bits(self.incumbent.load(AtomicOrdering::Relaxed)) / (1.0 + PRUNE_SLACK)
    }

    fn offer(&mut self) {
        self.examined += 1;
        let vol = canonical_volume(&self.faces);
        let wins = match &self.best {
            None => true,
            Some(b) => better(vol, &self.faces, b.volume, &b.faces),
        };
        if wins {
            self.best = Some(Best {
                volume: vol,
                faces: self.faces.clone(),
            });
            // volumes are non-negative, so their bit patterns order like the values
            self.incumbent.fetch_max(vol.to_bits(), AtomicOrdering::Relaxed);
        }
    }

    fn complete_with_full(&mut self, depth: usize) {
        let full = self.geom.full();
        for &axis in &self.order[depth..] {
            self.faces[axis] = full;
        }
        self.offer();
    }

    fn descend(&mut self, depth: usize, partial: f64, active: &[u32]) {
        self.examined += 1;
        if active.len() <= self.k {
            self.complete_with_full(depth);
            return;
        }
        let d = self.order.len();
        let axis = self.order[depth];
        if depth + 1 == d {
            for face in self.geom.last_axis(axis, active, self.k) {
                if partial * face.side() < self.threshold() {
                    continue;
                }
                self.faces[axis] = face;
                self.offer();
            }
            return;
        }
        for group in self.geom.axis_choices(axis, active) {
            for face in group {
                let bound = partial * face.side();
                if bound < self.threshold() {
                    break;
                }
                let next: Vec<u32> = active
                    .iter()
                    .copied()
                    .filter(|&p| self.geom.inside(&face, self.geom.coord(p, axis)))
                    .collect();
                self.faces[axis] = face;
                self.descend(depth + 1, bound, &next);
            }
        }
    }
}

fn search<G: Geometry>(geom: &G, k: usize) -> (Best<G::F>, u64) {
    let d = geom.dim();
    let n = geom.n();
    let all: Vec<u32> = (0..n as u32).collect();
    let full = geom.full();

    let mut order: Vec<usize> = (0..d).collect();
    let spreads: Vec<f64> = (0..d).map(|a| geom.spread(a)).collect();
    order.sort_by(|&a, &b| spreads[b].total_cmp(&spreads[a]).then(a.cmp(&b)));

    let incumbent = AtomicU64::new(0f64.to_bits());
    let mut root = Searcher {
        geom,
        k,
        order: order.clone(),
        incumbent: &incumbent,
        best: None,
        faces: vec![full; d],
        examined: 0,
    };

    if n <= k {
        root.complete_with_full(0);
        return (root.best.expect("offered"), root.examined);
    }

    // incumbent: best box constrained along a single axis
    for axis in 0..d {
        for face in geom.last_axis(axis, &all, k) {
            root.faces.iter_mut().for_each(|f| *f = full);
            root.faces[axis] = face;
            root.offer();
        }
    }
    if d == 1 {
        return (root.best.expect("offered"), root.examined);
    }

    let first = order[0];
    let choices: Vec<G::F> = geom.axis_choices(first, &all).into_iter().flatten().collect();
    let partials = par::map_slice(&choices, |&face| {
        let mut s = Searcher {
            geom,
            k,
            order: order.clone(),
            incumbent: &incumbent,
            best: None,
            faces: vec![full; d],
            examined: 0,
        };
        if face.side() >= s.threshold() {
            let active: Vec<u32> = all
                .iter()
                .copied()
                .filter(|&p| geom.inside(&face, geom.coord(p, first)))
                .collect();
            s.faces[first] = face;
            s.descend(1, face.side(), &active);
        }
        (s.best, s.examined)
    });

    let mut best = root.best.expect("offered");
    let mut examined = root.examined;
    for (cand, ex) in partials {
        examined += ex;
        if let Some(c) = cand {
            if better(c.volume, &c.faces, best.volume, &best.faces) {
                best = c;
            }
        }
    }
    (best, examined)
}

fn finish_cube(points: &PointSet, k: usize, best: Best<Interval>, examined: u64) -> DispersionResult {
    let lo = best.faces.iter().map(|f| f.lo).collect();
    let hi = best.faces.iter().map(|f| f.hi).collect();
    let open = best.faces.iter().map(|f| f.open).collect();
    let witness = AxisBox::from_bounds(lo, hi, open).expect("faces come from the unit cube");
    let (witness, attained) = close_faces(points, k, witness);
    DispersionResult {
        value: best.volume,
        witness: Witness::Cube(witness),
        attained,
        boxes_examined: examined,
    }
}

/// Closes open left faces, in axis order, whenever the closed box still holds
/// at most `k` points. The supremum is attained iff no open face remains.
fn close_faces(points: &PointSet, k: usize, mut b: AxisBox) -> (AxisBox, bool) {
    for axis in 0..b.anchor().len() {
        if b.open_left()[axis] {
            b.set_open_left(axis, false);
            if b.count_in(points) > k {
                b.set_open_left(axis, true);
            }
        }
    }
    let attained = !b.open_left().iter().any(|&o| o);
    (b, attained)
}

fn finish_torus(best: Best<Arc>, examined: u64) -> DispersionResult {
    let witness = PeriodicBox::new(
        best.faces.iter().map(|f| f.start).collect(),
        best.faces.iter().map(|f| f.len).collect(),
        best.faces.iter().map(|f| f.kind).collect(),
    )
    .expect("arcs come from wrapped coordinates");
    let attained = !witness.is_limit();
    DispersionResult {
        value: best.volume,
        witness: Witness::Torus(witness),
        attained,
        boxes_examined: examined,
    }
}

// ---------------------------------------------------------------------------
// Reference implementation
// ---------------------------------------------------------------------------

/// Unpruned enumeration of every face combination drawn from all point
/// coordinates. Only for small instances; serves as the reference the
/// pruned search is tested against.
pub fn brute_force_oracle(points: &PointSet, k: usize, periodic: bool) -> Result<DispersionResult> {
    let d = points.dim();
    let n = points.len();
    if n > BRUTE_FORCE_MAX_POINTS || d > BRUTE_FORCE_MAX_DIM {
        return Err(Error::InstanceTooLarge {
            reason: format!(
                "brute force handles n <= {BRUTE_FORCE_MAX_POINTS}, d <= {BRUTE_FORCE_MAX_DIM}; got n = {n}, d = {d}"
            ),
        });
    }
    if periodic {
        let coords: Vec<f64> = points.coords().iter().map(|&x| wrap01(x)).collect();
        let per_axis: Vec<Vec<Arc>> = (0..d)
            .map(|axis| {
                let vals = distinct_sorted((0..n).map(|p| coords[p * d + axis]).collect());
                let mut arcs = vec![Arc::FULL];
                for &a in &vals {
                    for &b in &vals {
                        arcs.push(Arc::between(a, b));
                    }
                }
                arcs
            })
            .collect();
        let count = |faces: &[Arc]| {
            (0..n)
                .filter(|&p| {
                    faces.iter().enumerate().all(|(axis, f)| {
                        let t = wrap01(coords[p * d + axis] - f.start);
                        match f.kind {
                            ArcKind::HalfOpen => t < f.len,
                            ArcKind::Open => 0.0 < t && t < f.len,
                        }
                    })
                })
                .count()
        };
        let (volume, faces, examined) = odometer(&per_axis, |f| count(f) <= k);
        Ok(finish_torus(Best { volume, faces }, examined))
    } else {
        let per_axis: Vec<Vec<Interval>> = (0..d)
            .map(|axis| {
                let vals = distinct_sorted(points.iter().map(|p| p[axis]).collect());
                let mut lefts = vec![(0.0, false)];
                lefts.extend(vals.iter().map(|&c| (c, true)));
                let mut rights = vals.clone();
                rights.push(1.0);
                let rights = distinct_sorted(rights);
                let mut out = Vec::new();
                for &(lo, open) in &lefts {
                    for &hi in &rights {
                        if lo < hi {
                            out.push(Interval { lo, hi, open });
                        }
                    }
                }
                out
            })
            .collect();
        let count = |faces: &[Interval]| {
            points
                .iter()
                .filter(|p| {
                    faces.iter().zip(p.iter()).all(|(f, &x)| {
                        let left_ok = if f.open { x > f.lo } else { x >= f.lo };
                        left_ok && x < f.hi
                    })
                })
                .count()
        };
        let (volume, faces, examined) = odometer(&per_axis, |f| count(f) <= k);
        Ok(finish_cube(points, k, Best { volume, faces }, examined))
    }
}

fn odometer<F: Face>(per_axis: &[Vec<F>], admissible: impl Fn(&[F]) -> bool) -> (f64, Vec<F>, u64) {
    let d = per_axis.len();
    let mut idx = vec![0usize; d];
    let mut best: Option<(f64, Vec<F>)> = None;
    let mut examined = 0u64;
    loop {
        let faces: Vec<F> = idx.iter().enumerate().map(|(a, &i)| per_axis[a][i]).collect();
        examined += 1;
        if admissible(&faces) {
            let vol = canonical_volume(&faces);
            let wins = match &best {
                None => true,
                Some((bv, bf)) => better(vol, &faces, *bv, bf),
            };
            if wins {
                best = Some((vol, faces));
            }
        }
        let mut axis = 0;
        loop {
            if axis == d {
                let (v, f) = best.expect("the full box or a slab is always admissible");
                return (v, f, examined);
            }
            idx[axis] += 1;
            if idx[axis] < per_axis[axis].len() {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}
