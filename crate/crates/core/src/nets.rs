//! Delta-approximation families of boxes.
//!
//! A family `N` is a delta-approximation for the boxes of volume at least
//! `eps` when each such box contains a member of `N` of volume at least
//! `delta`. If every member of `N` holds a point of `P`, no box of volume
//! `eps` can be empty, so `disp(P) < eps`.
//!
//! Construction:
//!
//! 1. Anchored boxes `prod [0, b_i)` of volume `eps` correspond, through
//!    `t -> ln(1/t) / ln(1/eps)`, to points of the simplex `{x >= 0, sum x = 1}`.
//!    A point `y` dominating `x` coordinatewise gives a box inside the
//!    original one. [`SimplexCover`] rounds `x` up to the grid of step
//!    `gamma / d`, which dominates `x` and keeps `sum y <= 1 + gamma`, so the
//!    anchored member has volume at least `eps^(1 + gamma)`.
//! 2. A general box `x + A` is handled by shrinking the anchored member `B`
//!    by `c_d = 1 - 1/d` and snapping `x` up to the lattice of step `b_i / d`.
//! 3. On the torus the lattice runs over the whole circle.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{arc_contains_arc, volume_of, wrap01, AxisBox, PeriodicBox, PointSet, GEOM_TOL};
use crate::par;
use crate::rng::{Purpose, Stream};

/// Parameters of a net: dimension, target volume, exponent slack and the
/// derived volumes `delta0 = eps^(1+gamma)`, `delta = delta0 / 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetParams {
    pub d: usize,
    pub eps: f64,
    pub gamma: f64,
    pub delta0: f64,
    pub delta: f64,
    pub c_d: f64,
}

/// `gamma = 1 / ln(1/eps)`, for which `eps^(1+gamma) = eps / e`.
pub fn default_gamma(eps: f64) -> f64 {
    1.0 / (1.0 / eps).ln()
}

impl NetParams {
    pub fn new(d: usize, eps: f64, gamma: Option<f64>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension { got: d, min: 2 });
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::param("eps", format!("{eps} is not in (0, 1)")));
        }
        let gamma = gamma.unwrap_or_else(|| default_gamma(eps));
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::param("gamma", format!("{gamma} is not positive")));
        }
        let delta0 = eps.powf(1.0 + gamma);
        Ok(NetParams {
            d,
            eps,
            gamma,
            delta0,
            delta: delta0 / 4.0,
            c_d: 1.0 - 1.0 / d as f64,
        })
    }
}

// ---------------------------------------------------------------------------
// Simplex cover
// ---------------------------------------------------------------------------

/// Grid points `y = step * k`, `k` a non-negative integer vector with
/// `step * sum(k) <= 1 + gamma`, `step = gamma / d`.
#[derive(Debug, Clone)]
pub struct SimplexCover {
    pub d: usize,
    pub gamma: f64,
    pub step: f64,
    /// Largest admissible `sum(k)`.
    pub max_sum: u32,
    pub points: Vec<Vec<u32>>,
}

pub fn build_simplex_cover(d: usize, gamma: f64) -> Result<SimplexCover> {
    if d < 2 {
        return Err(Error::InvalidDimension { got: d, min: 2 });
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::param("gamma", format!("{gamma} is not positive")));
    }
    let step = gamma / d as f64;
    let ceiling = (d as f64 * (1.0 + gamma) / gamma).ceil();
    if ceiling > 4096.0 {
        return Err(Error::InstanceTooLarge {
            reason: format!("simplex grid with sum bound {ceiling} (gamma = {gamma})"),
        });
    }
    let mut max_sum = ceiling as u32;
    while max_sum > 0 && step * max_sum as f64 > 1.0 + gamma + GEOM_TOL {
        max_sum -= 1;
    }
    let mut points = Vec::new();
    let mut k = vec![0u32; d];
    compositions(&mut k, 0, max_sum, &mut points);
    Ok(SimplexCover {
        d,
        gamma,
        step,
        max_sum,
        points,
    })
}

fn compositions(k: &mut Vec<u32>, axis: usize, budget: u32, out: &mut Vec<Vec<u32>>) {
    if axis == k.len() {
        out.push(k.clone());
        return;
    }
    for v in 0..=budget {
        k[axis] = v;
        compositions(k, axis + 1, budget - v, out);
    }
    k[axis] = 0;
}

impl SimplexCover {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn coords(&self, k: &[u32]) -> Vec<f64> {
        k.iter().map(|&v| self.step * v as f64).collect()
    }

    /// Pointwise ceiling onto the grid.
    pub fn round_up(&self, x: &[f64]) -> Vec<u32> {
        x.iter()
            .map(|&v| (v.max(0.0) / self.step).ceil() as u32)
            .collect()
    }

    /// Smallest `sum(k)` with `step * sum(k) >= 1`: grid points reachable by
    /// rounding a simplex point.
    pub fn min_sum(&self) -> u32 {
        (1.0 / self.step - 1e-9).ceil().max(0.0) as u32
    }
}

// ---------------------------------------------------------------------------
// Nets
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NetKind {
    Anchored,
    General,
    Torus,
}

impl NetKind {
    pub fn name(self) -> &'static str {
        match self {
            NetKind::Anchored => "anchored",
            NetKind::General => "general",
            NetKind::Torus => "torus",
        }
    }

    pub fn parse(s: &str) -> Option<NetKind> {
        match s {
            "anchored" => Some(NetKind::Anchored),
            "general" => Some(NetKind::General),
            "torus" => Some(NetKind::Torus),
            _ => None,
        }
    }

    pub fn is_periodic(self) -> bool {
        self == NetKind::Torus
    }
}

/// A finite family of boxes, stored column-wise.
///
/// Each element records its source anchored box and an integer vector: the
/// simplex grid vector for anchored nets, the lattice index for general and
/// torus nets.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationNet {
    pub params: NetParams,
    pub kind: NetKind,
    anchors: Vec<f64>,
    sides: Vec<f64>,
    sources: Vec<u32>,
    index: Vec<u32>,
}

/// Borrowed view of one net element.
#[derive(Debug, Clone, Copy)]
pub struct Element<'a> {
    pub anchor: &'a [f64],
    pub sides: &'a [f64],
    pub source: u32,
    pub index: &'a [u32],
}

impl Element<'_> {
    pub fn volume(&self) -> f64 {
        volume_of(self.sides)
    }
}

impl ApproximationNet {
    /// Assembles a net from raw columns (used when reading net files).
    pub fn from_parts(
        params: NetParams,
        kind: NetKind,
        anchors: Vec<f64>,
        sides: Vec<f64>,
        sources: Vec<u32>,
        index: Vec<u32>,
    ) -> Result<Self> {
        let d = params.d;
        let n = sources.len();
        if anchors.len() != n * d || sides.len() != n * d || index.len() != n * d {
            return Err(Error::param("net", "column lengths disagree with the element count"));
        }
        Ok(ApproximationNet {
            params,
            kind,
            anchors,
            sides,
            sources,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.params.d
    }

    pub fn element(&self, i: usize) -> Element<'_> {
        let d = self.params.d;
        Element {
            anchor: &self.anchors[i * d..(i + 1) * d],
            sides: &self.sides[i * d..(i + 1) * d],
            source: self.sources[i],
            index: &self.index[i * d..(i + 1) * d],
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Element<'_>> + '_ {
        (0..self.len()).map(move |i| self.element(i))
    }

    pub fn axis_box(&self, i: usize) -> Result<AxisBox> {
        let e = self.element(i);
        AxisBox::new(e.anchor.to_vec(), e.sides.to_vec())
    }

    pub fn periodic_box(&self, i: usize) -> Result<PeriodicBox> {
        let e = self.element(i);
        PeriodicBox::half_open(e.anchor.to_vec(), e.sides.to_vec())
    }

    /// Minimum volume every element is required to have.
    pub fn volume_floor(&self) -> f64 {
        match self.kind {
            NetKind::Anchored => self.params.delta0,
            _ => self.params.delta,
        }
    }

    /// Membership of a point in element `i` (half-open, wrapping for torus nets).
    pub fn element_contains(&self, i: usize, p: &[f64]) -> bool {
        let e = self.element(i);
        if self.kind.is_periodic() {
            (0..p.len()).all(|a| wrap01(wrap01(p[a]) - e.anchor[a]) < e.sides[a])
        } else {
            (0..p.len()).all(|a| p[a] >= e.anchor[a] && p[a] < e.anchor[a] + e.sides[a])
        }
    }

    /// Removes element `i` (for mutation tests).
    pub fn without(&self, i: usize) -> ApproximationNet {
        let d = self.params.d;
        let mut out = self.clone();
        out.anchors.drain(i * d..(i + 1) * d);
        out.sides.drain(i * d..(i + 1) * d);
        out.index.drain(i * d..(i + 1) * d);
        out.sources.remove(i);
        out
    }

    pub fn columns(&self) -> (&[f64], &[f64], &[u32], &[u32]) {
        (&self.anchors, &self.sides, &self.sources, &self.index)
    }
}

fn anchored_sides(params: &NetParams, cover: &SimplexCover, k: &[u32]) -> Vec<f64> {
    let ln_eps = params.eps.ln();
    k.iter()
        .map(|&v| (cover.step * v as f64 * ln_eps).exp())
        .collect()
}

/// Anchored boxes `prod [0, eps^(y_i))` over the simplex grid points `y`
/// with `1 <= sum y <= 1 + gamma`.
pub fn build_anchored_net(params: &NetParams) -> Result<ApproximationNet> {
    let cover = build_simplex_cover(params.d, params.gamma)?;
    let min_sum = cover.min_sum();
    let d = params.d;
    let mut net = ApproximationNet {
        params: *params,
        kind: NetKind::Anchored,
        anchors: Vec::new(),
        sides: Vec::new(),
        sources: Vec::new(),
        index: Vec::new(),
    };
    for k in cover.points.iter().filter(|k| k.iter().sum::<u32>() >= min_sum) {
        let id = net.sources.len() as u32;
        net.anchors.extend(std::iter::repeat_n(0.0, d));
        net.sides.extend(anchored_sides(params, &cover, k));
        net.sources.push(id);
        net.index.extend_from_slice(k);
    }
    Ok(net)
}

/// Upper end of the lattice index per axis: `floor(1 - d + d/b_i)` on the
/// cube, `floor(1 + d/b_i)` on the torus.
pub fn lattice_extent(b: &[f64], periodic: bool) -> Result<Vec<u32>> {
    let d = b.len() as f64;
    b.iter()
        .map(|&bi| {
            if !(bi > 0.0 && bi <= 1.0 + GEOM_TOL) {
                return Err(Error::param("b", format!("side {bi} is not in (0, 1]")));
            }
            let raw = if periodic {
                1.0 + d / bi
            } else {
                1.0 - d + d / bi
            };
            let top = (raw + GEOM_TOL).floor();
            if top > u32::MAX as f64 {
                return Err(Error::InstanceTooLarge {
                    reason: format!("lattice extent {top} along a side of {bi}"),
                });
            }
            Ok(top.max(0.0) as u32)
        })
        .collect()
}

/// All shift vectors `z_i = k_i b_i / d` for the anchored box with sides `b`.
pub fn shift_lattice(b: &[f64], periodic: bool) -> Result<Vec<Vec<f64>>> {
    let extent = lattice_extent(b, periodic)?;
    let d = b.len() as f64;
    let mut out = Vec::new();
    for_each_index(&extent, |k| {
        out.push(k.iter().zip(b).map(|(&ki, &bi)| ki as f64 * bi / d).collect());
    });
    Ok(out)
}

/// Number of lattice vectors, `prod extent_i`, as a float to avoid overflow.
pub fn lattice_size(b: &[f64], periodic: bool) -> Result<f64> {
    Ok(lattice_extent(b, periodic)?
        .iter()
        .map(|&e| e as f64)
        .product())
}

/// Visits `k` in `[1, extent_0] x ... x [1, extent_{d-1}]`, last axis fastest.
fn for_each_index(extent: &[u32], mut f: impl FnMut(&[u32])) {
    if extent.contains(&0) {
        return;
    }
    let d = extent.len();
    let mut k = vec![1u32; d];
    loop {
        f(&k);
        let mut axis = d;
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            if k[axis] < extent[axis] {
                k[axis] += 1;
                break;
            }
            k[axis] = 1;
        }
    }
}

/// Element count of the shifted net, computed without building it.
pub fn shifted_net_size(params: &NetParams, periodic: bool) -> Result<f64> {
    let anchored = build_anchored_net(params)?;
    anchored
        .elements()
        .map(|e| lattice_size(e.sides, periodic))
        .sum()
}

/// Bytes an element of a `d`-dimensional net occupies, plus lookup index.
pub fn bytes_per_element(d: usize) -> u128 {
    (d * (8 + 8 + 4) + 4 + 48) as u128
}

/// Memory estimate for building a net of `kind`.
pub fn estimate_net_bytes(params: &NetParams, kind: NetKind) -> Result<u128> {
    let count = match kind {
        NetKind::Anchored => build_anchored_net(params)?.len() as f64,
        NetKind::General => shifted_net_size(params, false)?,
        NetKind::Torus => shifted_net_size(params, true)?,
    };
    Ok((count * bytes_per_element(params.d) as f64).min(u128::MAX as f64 / 2.0) as u128)
}

/// General nets: `z + c_d B` over anchored members `B` and lattice shifts `z`.
pub fn build_general_net(params: &NetParams) -> Result<ApproximationNet> {
    build_shifted(params, false)
}

/// Torus nets: half-open periodic boxes with anchors `z mod 1`.
pub fn build_torus_net(params: &NetParams) -> Result<ApproximationNet> {
    build_shifted(params, true)
}

pub fn build_net(params: &NetParams, kind: NetKind) -> Result<ApproximationNet> {
    match kind {
        NetKind::Anchored => build_anchored_net(params),
        NetKind::General => build_general_net(params),
        NetKind::Torus => build_torus_net(params),
    }
}

/// Like [`build_net`], refusing before allocation when the estimate exceeds
/// `budget_bytes`.
pub fn build_net_within(params: &NetParams, kind: NetKind, budget_bytes: u128) -> Result<ApproximationNet> {
    let estimate = estimate_net_bytes(params, kind)?;
    if estimate > budget_bytes {
        return Err(Error::BudgetExceeded {
            what: "net size",
            estimate_bytes: estimate,
            budget_bytes,
        });
    }
    build_net(params, kind)
}

fn build_shifted(params: &NetParams, periodic: bool) -> Result<ApproximationNet> {
    let anchored = build_anchored_net(params)?;
    let d = params.d;
    let df = d as f64;
    let c = params.c_d;
    let parts = par::map_range(anchored.len(), |j| -> Result<_> {
        let b = anchored.element(j).sides;
        let extent = lattice_extent(b, periodic)?;
        let mut anchors = Vec::new();
        let mut sides = Vec::new();
        let mut index = Vec::new();
        let shrunk: Vec<f64> = b.iter().map(|&bi| c * bi).collect();
        for_each_index(&extent, |k| {
            for a in 0..d {
                let z = k[a] as f64 * b[a] / df;
                anchors.push(if periodic { wrap01(z) } else { z });
            }
            sides.extend_from_slice(&shrunk);
            index.extend_from_slice(k);
        });
        Ok((j as u32, anchors, sides, index))
    });
    let mut net = ApproximationNet {
        params: *params,
        kind: if periodic { NetKind::Torus } else { NetKind::General },
        anchors: Vec::new(),
        sides: Vec::new(),
        sources: Vec::new(),
        index: Vec::new(),
    };
    for part in parts {
        let (j, anchors, sides, index) = part?;
        let count = index.len() / d;
        net.anchors.extend(anchors);
        net.sides.extend(sides);
        net.index.extend(index);
        net.sources.extend(std::iter::repeat_n(j, count));
    }
    Ok(net)
}

// ---------------------------------------------------------------------------
// Cardinality bounds
// ---------------------------------------------------------------------------

/// `7 d ln d ((1+gamma)/gamma)^(d-1)`: the covering-number bound for anchored nets.
pub fn anchored_cardinality_bound(d: usize, gamma: f64) -> f64 {
    let df = d as f64;
    7.0 * df * df.ln() * ((1.0 + gamma) / gamma).powi(d as i32 - 1)
}

/// Published cardinality bound for a net of the given kind.
pub fn cardinality_bound(params: &NetParams, kind: NetKind) -> f64 {
    let d = params.d as f64;
    let g = params.gamma;
    let lead = 7.0 * d * d.ln() * (1.0 + 1.0 / g).powi(params.d as i32) / params.delta0;
    match kind {
        NetKind::Anchored => anchored_cardinality_bound(params.d, g),
        NetKind::General => lead * (std::f64::consts::E / params.delta0).ln().powi(params.d as i32),
        NetKind::Torus => lead * (2.0 * d).powi(params.d as i32),
    }
}

/// `(ln(e/delta0))^d / delta0` (cube) or `(2d)^d / delta0` (torus).
pub fn lattice_cardinality_bound(params: &NetParams, periodic: bool) -> f64 {
    let d = params.d as f64;
    let num = if periodic {
        (2.0 * d).powi(params.d as i32)
    } else {
        (std::f64::consts::E / params.delta0).ln().powi(params.d as i32)
    };
    num / params.delta0
}

// ---------------------------------------------------------------------------
// Lookup
// ---------------------------------------------------------------------------

/// A query box `prod [x_i, x_i + l_i)`, wrapping on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryBox {
    pub anchor: Vec<f64>,
    pub sides: Vec<f64>,
}

impl QueryBox {
    pub fn volume(&self) -> f64 {
        volume_of(&self.sides)
    }
}

/// Draws the query box of trial `trial`: sides `eps^(y_i)` with `y` uniform on
/// the simplex (volume exactly `eps`), anchor uniform among feasible positions.
pub fn sample_query_box(params: &NetParams, kind: NetKind, seed: u64, trial: u64) -> QueryBox {
    let mut s = Stream::new(seed, Purpose::QueryBoxes, trial);
    let ln_eps = params.eps.ln();
    loop {
        let y = s.simplex(params.d);
        let sides: Vec<f64> = y.iter().map(|&v| (v * ln_eps).exp()).collect();
        if sides.iter().any(|&l| l > 1.0) {
            continue;
        }
        let anchor = sides
            .iter()
            .map(|&l| match kind {
                NetKind::Anchored => 0.0,
                NetKind::General => s.unit() * (1.0 - l),
                NetKind::Torus => s.unit(),
            })
            .collect();
        return QueryBox { anchor, sides };
    }
}

/// Lookup structure over the elements actually present in a net.
pub struct NetIndex<'a> {
    net: &'a ApproximationNet,
    /// Sides of each anchored source, recovered from its elements.
    source_sides: HashMap<u32, Vec<f64>>,
    by_key: HashMap<(u32, u128), u32>,
    bits: u32,
}

fn pack(k: &[u32], bits: u32) -> u128 {
    k.iter().fold(0u128, |acc, &v| (acc << bits) | v as u128)
}

impl<'a> NetIndex<'a> {
    pub fn new(net: &'a ApproximationNet) -> Result<Self> {
        let d = net.dim();
        let bits = (128 / d as u32).min(32);
        let limit = if bits >= 32 { u32::MAX } else { (1u32 << bits) - 1 };
        let mut source_sides = HashMap::new();
        let mut by_key = HashMap::with_capacity(net.len());
        for (i, e) in net.elements().enumerate() {
            if e.index.iter().any(|&v| v > limit) {
                return Err(Error::InstanceTooLarge {
                    reason: format!("lattice index too wide to pack in dimension {d}"),
                });
            }
            by_key.insert((e.source, pack(e.index, bits)), i as u32);
            source_sides.entry(e.source).or_insert_with(|| match net.kind {
                NetKind::Anchored => e.sides.to_vec(),
                _ => e.sides.iter().map(|&s| s / net.params.c_d).collect(),
            });
        }
        Ok(NetIndex {
            net,
            source_sides,
            by_key,
            bits,
        })
    }

    fn lookup(&self, source: u32, k: &[u32]) -> Option<usize> {
        self.by_key.get(&(source, pack(k, self.bits))).map(|&i| i as usize)
    }

    /// Whether element `i` lies in `q` and meets the volume floor.
    pub fn certifies(&self, i: usize, q: &QueryBox) -> bool {
        let net = self.net;
        let e = net.element(i);
        if e.volume() < net.volume_floor() * (1.0 - GEOM_TOL) {
            return false;
        }
        if net.kind.is_periodic() {
            (0..e.anchor.len()).all(|a| arc_contains_arc(q.anchor[a], q.sides[a], e.anchor[a], e.sides[a], GEOM_TOL))
        } else {
            (0..e.anchor.len()).all(|a| {
                e.anchor[a] >= q.anchor[a] - GEOM_TOL
                    && e.anchor[a] + e.sides[a] <= q.anchor[a] + q.sides[a] + GEOM_TOL
            })
        }
    }

    /// Candidate lattice indices per axis for source sides `b` inside `q`.
    fn lattice_candidates(&self, b: &[f64], q: &QueryBox) -> Option<Vec<Vec<u32>>> {
        let net = self.net;
        let d = b.len();
        let df = d as f64;
        let c = net.params.c_d;
        let periodic = net.kind.is_periodic();
        let extent = lattice_extent(b, periodic).ok()?;
        let mut per_axis = Vec::with_capacity(d);
        for a in 0..d {
            if c * b[a] > q.sides[a] + GEOM_TOL {
                return None;
            }
            let step = b[a] / df;
            let shifts: &[f64] = if periodic { &[-1.0, 0.0, 1.0] } else { &[0.0] };
            let mut ks = Vec::new();
            for &m in shifts {
                let lo = ((q.anchor[a] + m - GEOM_TOL) / step).ceil() - 1.0;
                let hi = ((q.anchor[a] + m + q.sides[a] - c * b[a] + GEOM_TOL) / step).floor() + 1.0;
                let lo = lo.max(1.0);
                let hi = hi.min(extent[a] as f64);
                let mut k = lo;
                while k <= hi {
                    ks.push(k as u32);
                    k += 1.0;
                }
            }
            ks.sort_unstable();
            ks.dedup();
            if ks.is_empty() {
                return None;
            }
            per_axis.push(ks);
        }
        Some(per_axis)
    }

    /// Every element of the net certifying `q`.
    pub fn certificates(&self, q: &QueryBox) -> Vec<usize> {
        let mut out = Vec::new();
        self.scan(q, |i| {
            out.push(i);
            false
        });
        out.sort_unstable();
        out
    }

    /// Some element certifying `q`, searching the whole net.
    pub fn find_certificate(&self, q: &QueryBox) -> Option<usize> {
        let mut found = None;
        self.scan(q, |i| {
            found = Some(i);
            true
        });
        found
    }

    /// Calls `visit` on certifying elements until it returns true.
    fn scan(&self, q: &QueryBox, mut visit: impl FnMut(usize) -> bool) {
        let net = self.net;
        if net.kind == NetKind::Anchored {
            for i in 0..net.len() {
                if self.certifies(i, q) && visit(i) {
                    return;
                }
            }
            return;
        }
        let mut sources: Vec<&u32> = self.source_sides.keys().collect();
        sources.sort_unstable();
        for &src in sources {
            let b = &self.source_sides[&src];
            let Some(per_axis) = self.lattice_candidates(b, q) else {
                continue;
            };
            let extent: Vec<u32> = per_axis.iter().map(|v| v.len() as u32).collect();
            let mut stop = false;
            let mut k = vec![0u32; per_axis.len()];
            for_each_index(&extent, |pos| {
                if stop {
                    return;
                }
                for (a, &p) in pos.iter().enumerate() {
                    k[a] = per_axis[a][p as usize - 1];
                }
                if let Some(i) = self.lookup(src, &k) {
                    if self.certifies(i, q) && visit(i) {
                        stop = true;
                    }
                }
            });
            if stop {
                return;
            }
        }
    }

    /// The element singled out by the constructive rounding rule: shrink `q`
    /// to volume `eps`, map its sides to the simplex, round up onto the grid,
    /// then snap the anchor up onto the lattice of the chosen anchored box.
    pub fn rounding_certificate(&self, q: &QueryBox) -> Option<usize> {
        let net = self.net;
        let p = &net.params;
        let d = p.d;
        let vol = q.volume();
        if vol < p.eps * (1.0 - GEOM_TOL) {
            return None;
        }
        let scale = (p.eps / vol).powf(1.0 / d as f64).min(1.0);
        let ln_inv_eps = (1.0 / p.eps).ln();
        let step = p.gamma / d as f64;
        let grid: Vec<u32> = q
            .sides
            .iter()
            .map(|&l| {
                let x = ((1.0 / (l * scale)).ln() / ln_inv_eps).max(0.0);
                (x / step).ceil() as u32
            })
            .collect();
        let anchored_id = self.anchored_id_of(&grid)?;
        if net.kind == NetKind::Anchored {
            return Some(anchored_id as usize);
        }
        let b = self.source_sides.get(&anchored_id)?;
        let k: Vec<u32> = (0..d)
            .map(|a| ((q.anchor[a] * d as f64 / b[a]).floor() + 1.0) as u32)
            .collect();
        self.lookup(anchored_id, &k)
    }

    fn anchored_id_of(&self, grid: &[u32]) -> Option<u32> {
        let net = self.net;
        match net.kind {
            NetKind::Anchored => net
                .elements()
                .position(|e| e.index == grid)
                .map(|i| net.element(i).source),
            _ => {
                // sides of the anchored box with this grid vector
                let ln_eps = net.params.eps.ln();
                let step = net.params.gamma / net.params.d as f64;
                let b: Vec<f64> = grid.iter().map(|&v| (step * v as f64 * ln_eps).exp()).collect();
                self.source_sides
                    .iter()
                    .filter(|(_, s)| s.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-9 * y))
                    .map(|(&id, _)| id)
                    .min()
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Verification and certification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub trials: u64,
    pub passes: u64,
    pub failures: u64,
    pub first_failure: Option<(u64, QueryBox)>,
}

/// Samples `trials` boxes of volume `eps` and checks that each contains a net
/// element of volume at least the net's floor. Deterministic in `seed`.
pub fn verify_approximation(net: &ApproximationNet, trials: u64, seed: u64) -> Result<VerificationReport> {
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let index = NetIndex::new(net)?;
    let outcomes = par::map_range(trials as usize, |t| {
        let q = sample_query_box(&net.params, net.kind, seed, t as u64);
        index.find_certificate(&q).is_some()
    });
    let failures = outcomes.iter().filter(|&&ok| !ok).count() as u64;
    let first_failure = outcomes
        .iter()
        .position(|&ok| !ok)
        .map(|t| (t as u64, sample_query_box(&net.params, net.kind, seed, t as u64)));
    Ok(VerificationReport {
        trials,
        passes: trials - failures,
        failures,
        first_failure,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificationReport {
    pub k: usize,
    /// Every element holds at least `k + 1` points.
    pub certified: bool,
    /// Elements holding at most `k` points, in net order.
    pub deficient: Vec<usize>,
}

/// Checks whether every net element contains at least `k + 1` points of `P`.
/// If so, every box of volume `eps` holds more than `k` points.
pub fn net_certifies(net: &ApproximationNet, points: &PointSet, k: usize) -> Result<CertificationReport> {
    if points.dim() != net.dim() {
        return Err(Error::DimensionMismatch {
            expected: net.dim(),
            got: points.dim(),
        });
    }
    let need = k + 1;
    let full = par::map_range(net.len(), |i| {
        let mut hits = 0;
        for p in points.iter() {
            if net.element_contains(i, p) {
                hits += 1;
                if hits >= need {
                    return true;
                }
            }
        }
        false
    });
    let deficient: Vec<usize> = full
        .iter()
        .enumerate()
        .filter(|(_, &ok)| !ok)
        .map(|(i, _)| i)
        .collect();
    Ok(CertificationReport {
        k,
        certified: deficient.is_empty() && !net.is_empty(),
        deficient,
    })
}
