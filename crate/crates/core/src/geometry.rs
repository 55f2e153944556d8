//! Points, axis-parallel boxes and periodic (torus) boxes in the unit cube.
//!
//! Boxes follow the half-open convention `[lo, hi)` per axis. A face may be
//! flagged open on the left, which stands for the limit of boxes whose left
//! face approaches a point coordinate from above: the point is excluded and
//! the volume is the limit value. This is what makes the supremum in the
//! definition of dispersion computable by finite enumeration.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Slack used only where derived arithmetic (powers of eps, lattice steps)
/// meets geometry. Faces built from point coordinates are compared exactly.
pub const GEOM_TOL: f64 = 1e-12;

/// Product of side lengths, always accumulated in axis order.
pub fn volume_of(sides: &[f64]) -> f64 {
    sides.iter().fold(1.0, |acc, &s| acc * s)
}

/// Maps `x` onto the circle `[0, 1)`; `1.0` and tiny negative values land on `0.0`.
pub fn wrap01(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    a.len().cmp(&b.len())
}

/// A finite point set in `[0, 1]^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    /// Builds a point set from row-major coordinates.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension { got: 0, min: 1 });
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::param(
                "coords",
                format!("length {} is not a multiple of d = {dim}", coords.len()),
            ));
        }
        for (idx, &v) in coords.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::CoordinateOutOfRange {
                    point: idx / dim,
                    axis: idx % dim,
                    value: v,
                });
            }
        }
        Ok(PointSet { dim, coords })
    }

    pub fn from_points<P: AsRef<[f64]>>(dim: usize, points: &[P]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        PointSet::new(dim, coords)
    }

    pub fn empty(dim: usize) -> Result<Self> {
        PointSet::new(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// The first `n` points (used for nested sampling).
    pub fn prefix(&self, n: usize) -> PointSet {
        PointSet {
            dim: self.dim,
            coords: self.coords[..n.min(self.len()) * self.dim].to_vec(),
        }
    }

    /// Applies a permutation of axes: new axis `j` is old axis `perm[j]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<PointSet> {
        check_perm(perm, self.dim)?;
        let coords = self
            .iter()
            .flat_map(|p| perm.iter().map(move |&a| p[a]))
            .collect();
        Ok(PointSet {
            dim: self.dim,
            coords,
        })
    }

    pub fn with_point(&self, p: &[f64]) -> Result<PointSet> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.len(),
            });
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(p);
        PointSet::new(self.dim, coords)
    }
}

fn check_perm(perm: &[usize], dim: usize) -> Result<()> {
    let mut seen = vec![false; dim];
    if perm.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: perm.len(),
        });
    }
    for &a in perm {
        if a >= dim || seen[a] {
            return Err(Error::param("perm", "not a permutation of the axes"));
        }
        seen[a] = true;
    }
    Ok(())
}

/// Common interface of cube boxes and torus boxes.
pub trait Region {
    fn dim(&self) -> usize;

    /// Lebesgue measure, `prod(sides)`.
    fn volume(&self) -> f64;

    /// Membership test without the dimension check.
    fn contains_unchecked(&self, p: &[f64]) -> bool;

    fn contains(&self, p: &[f64]) -> Result<bool> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        Ok(self.contains_unchecked(p))
    }

    fn count_in(&self, points: &PointSet) -> usize {
        points.iter().filter(|p| self.contains_unchecked(p)).count()
    }
}

/// An axis-parallel box `prod [lo_i, hi_i)` inside the unit cube.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
    sides: Vec<f64>,
    open_left: Vec<bool>,
}

impl AxisBox {
    /// Box from an anchor (lower corner) and side lengths; `hi = anchor + side`.
    pub fn new(anchor: Vec<f64>, sides: Vec<f64>) -> Result<Self> {
        let open = vec![false; anchor.len()];
        AxisBox::with_open_left(anchor, sides, open)
    }

    pub fn with_open_left(anchor: Vec<f64>, sides: Vec<f64>, open_left: Vec<bool>) -> Result<Self> {
        let d = anchor.len();
        if d == 0 {
            return Err(Error::InvalidDimension { got: 0, min: 1 });
        }
        if sides.len() != d || open_left.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: sides.len().min(open_left.len()),
            });
        }
        for i in 0..d {
            let (a, s) = (anchor[i], sides[i]);
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&s) || a + s > 1.0 + GEOM_TOL {
                return Err(Error::param(
                    "box",
                    format!("axis {i}: anchor {a} with side {s} leaves the unit cube"),
                ));
            }
        }
        let hi = anchor.iter().zip(&sides).map(|(a, s)| a + s).collect();
        Ok(AxisBox {
            lo: anchor,
            hi,
            sides,
            open_left,
        })
    }

    /// Box from exact face coordinates; sides are `hi - lo`.
    pub fn from_bounds(lo: Vec<f64>, hi: Vec<f64>, open_left: Vec<bool>) -> Result<Self> {
        let d = lo.len();
        if d == 0 {
            return Err(Error::InvalidDimension { got: 0, min: 1 });
        }
        if hi.len() != d || open_left.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: hi.len().min(open_left.len()),
            });
        }
        for i in 0..d {
            if !(0.0 <= lo[i] && lo[i] <= hi[i] && hi[i] <= 1.0) {
                return Err(Error::param(
                    "box",
                    format!("axis {i}: faces [{}, {}) are not ordered inside [0, 1]", lo[i], hi[i]),
                ));
            }
        }
        let sides = lo.iter().zip(&hi).map(|(l, h)| h - l).collect();
        Ok(AxisBox {
            lo,
            hi,
            sides,
            open_left,
        })
    }

    /// The whole cube `[0, 1)^d`.
    pub fn unit(dim: usize) -> Self {
        AxisBox {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
            sides: vec![1.0; dim],
            open_left: vec![false; dim],
        }
    }

    pub fn anchor(&self) -> &[f64] {
        &self.lo
    }

    pub fn upper(&self) -> &[f64] {
        &self.hi
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    pub fn open_left(&self) -> &[bool] {
        &self.open_left
    }

    pub(crate) fn set_open_left(&mut self, axis: usize, open: bool) {
        self.open_left[axis] = open;
    }

    /// Whether `other` lies inside `self`, allowing `tol` of slack on every face.
    pub fn contains_box(&self, other: &AxisBox, tol: f64) -> bool {
        (0..self.lo.len()).all(|i| other.lo[i] >= self.lo[i] - tol && other.hi[i] <= self.hi[i] + tol)
    }
}

impl Region for AxisBox {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn volume(&self) -> f64 {
        volume_of(&self.sides)
    }

    fn contains_unchecked(&self, p: &[f64]) -> bool {
        p.iter().enumerate().all(|(i, &x)| {
            let above = if self.open_left[i] {
                x > self.lo[i]
            } else {
                x >= self.lo[i]
            };
            above && x < self.hi[i]
        })
    }
}

/// Boundary convention of one coordinate of a periodic box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArcKind {
    /// `[s, s + l)` on the circle; with `l = 1` the whole circle.
    HalfOpen,
    /// `(s, s + l)` on the circle; with `l = 1` the circle minus the point `s`.
    Open,
}

/// A product of circular arcs on the torus `[0, 1)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicBox {
    anchor: Vec<f64>,
    sides: Vec<f64>,
    kinds: Vec<ArcKind>,
}

impl PeriodicBox {
    pub fn new(anchor: Vec<f64>, sides: Vec<f64>, kinds: Vec<ArcKind>) -> Result<Self> {
        let d = anchor.len();
        if d == 0 {
            return Err(Error::InvalidDimension { got: 0, min: 1 });
        }
        if sides.len() != d || kinds.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: sides.len().min(kinds.len()),
            });
        }
        for i in 0..d {
            if !(0.0..1.0).contains(&anchor[i]) || !(0.0..=1.0).contains(&sides[i]) {
                return Err(Error::param(
                    "periodic box",
                    format!("axis {i}: anchor {} / side {} out of range", anchor[i], sides[i]),
                ));
            }
        }
        Ok(PeriodicBox {
            anchor,
            sides,
            kinds,
        })
    }

    /// Half-open box on every axis.
    pub fn half_open(anchor: Vec<f64>, sides: Vec<f64>) -> Result<Self> {
        let kinds = vec![ArcKind::HalfOpen; anchor.len()];
        PeriodicBox::new(anchor, sides, kinds)
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    pub fn kinds(&self) -> &[ArcKind] {
        &self.kinds
    }

    /// True when some axis is a circle with a single point removed, a shape
    /// that is only reached as a limit of genuine periodic boxes.
    pub fn is_limit(&self) -> bool {
        self.kinds
            .iter()
            .zip(&self.sides)
            .any(|(&k, &s)| k == ArcKind::Open && s >= 1.0)
    }

    /// Whether `inner` lies inside `self`, with `tol` of slack.
    pub fn contains_box(&self, inner: &PeriodicBox, tol: f64) -> bool {
        (0..self.anchor.len()).all(|i| {
            arc_contains_arc(
                self.anchor[i],
                self.sides[i],
                inner.anchor[i],
                inner.sides[i],
                tol,
            )
        })
    }
}

/// Containment of the arc `[b, b + m)` in `[a, a + l)`, up to `tol`.
pub(crate) fn arc_contains_arc(a: f64, l: f64, b: f64, m: f64, tol: f64) -> bool {
    if l >= 1.0 - tol {
        return true;
    }
    let mut off = wrap01(b - a);
    if off > 1.0 - tol {
        off -= 1.0;
    }
    off >= -tol && off + m <= l + tol
}

impl Region for PeriodicBox {
    fn dim(&self) -> usize {
        self.anchor.len()
    }

    fn volume(&self) -> f64 {
        volume_of(&self.sides)
    }

    fn contains_unchecked(&self, p: &[f64]) -> bool {
        (0..self.anchor.len()).all(|i| {
            let t = wrap01(wrap01(p[i]) - self.anchor[i]);
            match self.kinds[i] {
                ArcKind::HalfOpen => t < self.sides[i],
                ArcKind::Open => t > 0.0 && t < self.sides[i],
            }
        })
    }
}
