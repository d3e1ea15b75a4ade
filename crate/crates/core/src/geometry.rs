//! Planar triangles, their sides and the per-side coordinate frame.
//!
//! Sides are labelled by the index of the opposite vertex. After
//! construction the vertices are stored counterclockwise, so side `i`
//! runs from vertex `i + 1` to vertex `i + 2` (indices mod 3) with the
//! domain on its left.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A point or vector in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Rotation by +90 degrees.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn lerp(self, other: Vec2, s: f64) -> Vec2 {
        self + (other - self) * s
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Side of a triangle, identified by the index of the opposite vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SideLabel(u8);

impl SideLabel {
    pub const ALL: [SideLabel; 3] = [SideLabel(0), SideLabel(1), SideLabel(2)];

    /// Side opposite vertex `vertex`; `None` unless `vertex < 3`.
    pub fn opposite(vertex: usize) -> Option<SideLabel> {
        (vertex < 3).then_some(SideLabel(vertex as u8))
    }

    pub fn opposite_vertex(self) -> usize {
        self.0 as usize
    }

    /// Endpoint vertex indices, in counterclockwise traversal order.
    pub fn endpoints(self) -> (usize, usize) {
        let i = self.0 as usize;
        ((i + 1) % 3, (i + 2) % 3)
    }

    /// The other two sides in cyclic order: `(B, C)` when `self` is `A`.
    pub fn others(self) -> (SideLabel, SideLabel) {
        let i = self.0;
        (SideLabel((i + 1) % 3), SideLabel((i + 2) % 3))
    }
}

impl fmt::Display for SideLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Acute / right / obtuse, either for a whole triangle (largest angle) or
/// for the frame of a single side (sign of the foot offsets).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Acute,
    Right,
    Obtuse,
}

const COLLINEAR_TOL: f64 = 1e-12;
const RIGHT_ANGLE_TOL: f64 = 1e-12;

/// A non-degenerate triangle with counterclockwise vertices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triangle {
    vertices: [Vec2; 3],
}

impl Triangle {
    /// Builds a triangle, swapping `p1` and `p2` if the input is clockwise.
    pub fn from_vertices(p0: Vec2, p1: Vec2, p2: Vec2) -> Result<Self> {
        let twice_area = (p1 - p0).cross(p2 - p0);
        let diam = p0.distance(p1).max(p1.distance(p2)).max(p2.distance(p0));
        if !twice_area.is_finite() || twice_area.abs() < COLLINEAR_TOL * diam * diam {
            return Err(Error::CollinearVertices { twice_area });
        }
        let vertices = if twice_area > 0.0 {
            [p0, p1, p2]
        } else {
            [p0, p2, p1]
        };
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Vec2; 3] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Vec2 {
        self.vertices[i]
    }

    pub fn area(&self) -> f64 {
        let [a, b, c] = self.vertices;
        0.5 * (b - a).cross(c - a)
    }

    pub fn side_endpoints(&self, side: SideLabel) -> (Vec2, Vec2) {
        let (i, j) = side.endpoints();
        (self.vertices[i], self.vertices[j])
    }

    pub fn side_length(&self, side: SideLabel) -> f64 {
        let (a, b) = self.side_endpoints(side);
        a.distance(b)
    }

    /// Distance from the line through `side` to the opposite vertex.
    pub fn altitude(&self, side: SideLabel) -> f64 {
        2.0 * self.area() / self.side_length(side)
    }

    pub fn longest_side(&self) -> f64 {
        SideLabel::ALL
            .iter()
            .map(|&s| self.side_length(s))
            .fold(0.0, f64::max)
    }

    /// Unit outward normal of `side`.
    pub fn outward_normal(&self, side: SideLabel) -> Vec2 {
        let (a, b) = self.side_endpoints(side);
        let t = b - a;
        Vec2::new(t.y, -t.x) * (1.0 / t.norm())
    }

    pub fn centroid(&self) -> Vec2 {
        let [a, b, c] = self.vertices;
        (a + b + c) * (1.0 / 3.0)
    }

    /// Classification from the cosine of the largest angle.
    pub fn classification(&self) -> Classification {
        let mut min_cos = f64::INFINITY;
        for i in 0..3 {
            let o = self.vertices[i];
            let e1 = self.vertices[(i + 1) % 3] - o;
            let e2 = self.vertices[(i + 2) % 3] - o;
            min_cos = min_cos.min(e1.dot(e2) / (e1.norm() * e2.norm()));
        }
        if min_cos.abs() <= RIGHT_ANGLE_TOL {
            Classification::Right
        } else if min_cos < 0.0 {
            Classification::Obtuse
        } else {
            Classification::Acute
        }
    }

    /// True if `p` lies in the closed triangle, up to `tol` (length units).
    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        SideLabel::ALL.iter().all(|&s| {
            let (a, _) = self.side_endpoints(s);
            (p - a).dot(self.outward_normal(s)) <= tol
        })
    }

    pub fn frame(&self, side: SideLabel) -> SideFrame {
        side_frame(self, side)
    }
}

/// Rigid motion putting the vertex opposite `side` at the origin and
/// `side` on the vertical line `x = ell`.
///
/// The framed side covers `y in [-a1, a2]`; for an obtuse corner adjacent
/// to the side one of the offsets is negative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SideFrame {
    pub side: SideLabel,
    /// Opposite vertex, in world coordinates.
    pub origin: Vec2,
    /// Frame x-axis in world coordinates (outward normal of the side).
    pub x_axis: Vec2,
    pub ell: f64,
    pub a1: f64,
    pub a2: f64,
    pub classification: Classification,
}

impl SideFrame {
    pub fn y_axis(&self) -> Vec2 {
        self.x_axis.perp()
    }

    /// World point to frame coordinates.
    pub fn to_frame(&self, p: Vec2) -> Vec2 {
        let d = p - self.origin;
        Vec2::new(d.dot(self.x_axis), d.dot(self.y_axis()))
    }

    /// World vector (e.g. a gradient) to frame components.
    pub fn vector_to_frame(&self, v: Vec2) -> Vec2 {
        Vec2::new(v.dot(self.x_axis), v.dot(self.y_axis()))
    }

    pub fn from_frame(&self, q: Vec2) -> Vec2 {
        self.origin + self.x_axis * q.x + self.y_axis() * q.y
    }
}

/// Frame of `side`; see [`SideFrame`].
pub fn side_frame(tri: &Triangle, side: SideLabel) -> SideFrame {
    let origin = tri.vertex(side.opposite_vertex());
    let x_axis = tri.outward_normal(side);
    let y_axis = x_axis.perp();
    let (lo, hi) = tri.side_endpoints(side);
    let ell = tri.altitude(side);
    let clean = |v: f64| if v == 0.0 { 0.0 } else { v };
    let a1 = clean(-(lo - origin).dot(y_axis));
    let a2 = clean((hi - origin).dot(y_axis));
    let tol = RIGHT_ANGLE_TOL * tri.longest_side();
    let classification = if a1.abs() <= tol || a2.abs() <= tol {
        Classification::Right
    } else if a1 < 0.0 || a2 < 0.0 {
        Classification::Obtuse
    } else {
        Classification::Acute
    };
    SideFrame {
        side,
        origin,
        x_axis,
        ell,
        a1,
        a2,
        classification,
    }
}

/// Affine map from the right isosceles reference triangle
/// `(0,0), (pi,0), (pi,pi)` onto a target triangle, vertex to vertex.
#[derive(Clone, Copy, Debug)]
pub struct ReferenceMap {
    origin: Vec2,
    // columns of the linear part
    col_x: Vec2,
    col_y: Vec2,
    inv_det: f64,
}

impl ReferenceMap {
    pub fn onto(tri: &Triangle) -> Self {
        use std::f64::consts::PI;
        let [v0, v1, v2] = *tri.vertices();
        // (pi,0) -> v1, (pi,pi) -> v2
        let col_x = (v1 - v0) * (1.0 / PI);
        let col_y = (v2 - v1) * (1.0 / PI);
        let det = col_x.cross(col_y);
        Self {
            origin: v0,
            col_x,
            col_y,
            inv_det: 1.0 / det,
        }
    }

    pub fn forward(&self, q: Vec2) -> Vec2 {
        self.origin + self.col_x * q.x + self.col_y * q.y
    }

    pub fn inverse(&self, p: Vec2) -> Vec2 {
        let d = p - self.origin;
        Vec2::new(
            d.cross(self.col_y) * self.inv_det,
            self.col_x.cross(d) * self.inv_det,
        )
    }
}
