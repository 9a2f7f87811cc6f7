//! Convex planar domains and the geometric functionals entering the
//! spectral-gap bounds: diameter, inradius and boundary curvature.

mod simplex;

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub use simplex::{maximize, LpSolution};

/// A point in the plane. Serialized as `[x, y]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// A bounded convex domain, centered at the origin for the parametric kinds.
///
/// JSON form: `{"kind": "polygon", "vertices": [[x, y], ...]}`,
/// `{"kind": "ellipse", "a": .., "b": ..}`, `{"kind": "rectangle", "a": .., "b": ..}`
/// or `{"kind": "stadium", "length": .., "radius": ..}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConvexDomain {
    /// Strictly convex, counter-clockwise vertex list.
    Polygon { vertices: Vec<Point> },
    /// Semi-axes `a ≥ b` along `x` and `y`.
    Ellipse { a: f64, b: f64 },
    /// `[-a, a] × [-b, b]`.
    Rectangle { a: f64, b: f64 },
    /// Points within `radius` of the segment from `(-length/2, 0)` to `(length/2, 0)`.
    Stadium { length: f64, radius: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(LabError::Geometry(format!("{name} must be positive, got {v}")))
    }
}

impl ConvexDomain {
    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        let d = ConvexDomain::Polygon { vertices };
        d.validate()?;
        Ok(d)
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        let d = ConvexDomain::Ellipse { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Self::ellipse(radius, radius)
    }

    pub fn rectangle(a: f64, b: f64) -> Result<Self> {
        let d = ConvexDomain::Rectangle { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn stadium(length: f64, radius: f64) -> Result<Self> {
        let d = ConvexDomain::Stadium { length, radius };
        d.validate()?;
        Ok(d)
    }

    /// Parses and validates the JSON description.
    pub fn from_json(text: &str) -> Result<Self> {
        let d: ConvexDomain = serde_json::from_str(text)?;
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return Err(LabError::Geometry(format!("polygon needs ≥ 3 vertices, got {n}")));
                }
                if vertices.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
                    return Err(LabError::Geometry("non-finite vertex".into()));
                }
                for i in 0..n {
                    let e0 = vertices[(i + 1) % n] - vertices[i];
                    let e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
                    if e0.cross(e1) <= 0.0 {
                        return Err(LabError::Geometry(format!(
                            "vertex {} breaks strict counter-clockwise convexity",
                            (i + 1) % n
                        )));
                    }
                }
                // a CCW star with winding > 1 also has positive turns everywhere
                let turning: f64 = (0..n)
                    .map(|i| {
                        let e0 = vertices[(i + 1) % n] - vertices[i];
                        let e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
                        e0.cross(e1).atan2(e0.dot(e1))
                    })
                    .sum();
                if (turning - 2.0 * std::f64::consts::PI).abs() > 1e-6 {
                    return Err(LabError::Geometry("polygon is self-intersecting".into()));
                }
                Ok(())
            }
            ConvexDomain::Ellipse { a, b } => {
                positive("a", *a)?;
                positive("b", *b)?;
                if a < b {
                    return Err(LabError::Geometry(format!("ellipse needs a ≥ b, got a={a}, b={b}")));
                }
                Ok(())
            }
            ConvexDomain::Rectangle { a, b } => {
                positive("a", *a)?;
                positive("b", *b)
            }
            ConvexDomain::Stadium { length, radius } => {
                positive("length", *length)?;
                positive("radius", *radius)
            }
        }
    }

    /// The domain scaled by `lambda` about the origin.
    pub fn scaled(&self, lambda: f64) -> Self {
        match self {
            ConvexDomain::Polygon { vertices } => ConvexDomain::Polygon {
                vertices: vertices.iter().map(|&p| p * lambda).collect(),
            },
            ConvexDomain::Ellipse { a, b } => ConvexDomain::Ellipse {
                a: a * lambda,
                b: b * lambda,
            },
            ConvexDomain::Rectangle { a, b } => ConvexDomain::Rectangle {
                a: a * lambda,
                b: b * lambda,
            },
            ConvexDomain::Stadium { length, radius } => ConvexDomain::Stadium {
                length: length * lambda,
                radius: radius * lambda,
            },
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Point, Point) {
        match self {
            ConvexDomain::Polygon { vertices } => {
                let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for p in vertices {
                    lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
                    hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
                }
                (lo, hi)
            }
            ConvexDomain::Ellipse { a, b } | ConvexDomain::Rectangle { a, b } => {
                (Point::new(-a, -b), Point::new(*a, *b))
            }
            ConvexDomain::Stadium { length, radius } => {
                let hx = 0.5 * length + radius;
                (Point::new(-hx, -radius), Point::new(hx, *radius))
            }
        }
    }

    /// Inside/outside flag and signed distance to the boundary (positive inside).
    pub fn contains(&self, p: Point) -> Containment {
        let distance = self.signed_distance(p);
        Containment {
            inside: distance > 0.0,
            on_boundary: distance == 0.0,
            distance,
        }
    }

    pub fn signed_distance(&self, p: Point) -> f64 {
        match self {
            ConvexDomain::Polygon { vertices } => polygon_signed_distance(vertices, p),
            ConvexDomain::Rectangle { a, b } => {
                let (dx, dy) = (p.x.abs() - a, p.y.abs() - b);
                if dx <= 0.0 && dy <= 0.0 {
                    -dx.max(dy)
                } else {
                    -dx.max(0.0).hypot(dy.max(0.0))
                }
            }
            ConvexDomain::Ellipse { a, b } => {
                let d = ellipse_distance(*a, *b, p.x.abs(), p.y.abs());
                if (p.x / a).powi(2) + (p.y / b).powi(2) < 1.0 {
                    d
                } else {
                    -d
                }
            }
            ConvexDomain::Stadium { length, radius } => {
                let hx = 0.5 * length;
                let cx = p.x.clamp(-hx, hx);
                radius - Point::new(p.x - cx, p.y).norm()
            }
        }
    }

    /// A function with the sign of the signed distance that is cheap and
    /// smooth across the boundary; used to locate grid-line crossings.
    pub fn level(&self, p: Point) -> f64 {
        match self {
            ConvexDomain::Ellipse { a, b } => b * (1.0 - (p.x / a).powi(2) - (p.y / b).powi(2)),
            ConvexDomain::Polygon { vertices } => polygon_line_level(vertices, p),
            _ => self.signed_distance(p),
        }
    }

    /// Fraction `t ∈ (0, 1]` with `inside + t·(outside - inside)` on the boundary.
    pub fn crossing(&self, inside: Point, outside: Point) -> f64 {
        let f = |t: f64| self.level(inside + (outside - inside) * t);
        if f(1.0) >= 0.0 {
            return 1.0;
        }
        if let ConvexDomain::Ellipse { a, b } = self {
            // (p + t d) on the ellipse is a quadratic in t
            let d = outside - inside;
            let (ia, ib) = (1.0 / (a * a), 1.0 / (b * b));
            let qa = d.x * d.x * ia + d.y * d.y * ib;
            let qb = 2.0 * (inside.x * d.x * ia + inside.y * d.y * ib);
            let qc = inside.x * inside.x * ia + inside.y * inside.y * ib - 1.0;
            let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
            // stable root of the positive branch (qc < 0 inside)
            let t = if qb >= 0.0 {
                -2.0 * qc / (qb + disc)
            } else {
                (-qb + disc) / (2.0 * qa)
            };
            return t.clamp(0.0, 1.0);
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Containment {
    pub inside: bool,
    pub on_boundary: bool,
    /// Distance to the boundary, positive inside.
    pub distance: f64,
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

fn polygon_line_level(vertices: &[Point], p: Point) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            (b - a).cross(p - a) / a.dist(b)
        })
        .fold(f64::INFINITY, f64::min)
}

fn polygon_signed_distance(vertices: &[Point], p: Point) -> f64 {
    let n = vertices.len();
    let inside = polygon_line_level(vertices, p) >= 0.0;
    let d = (0..n)
        .map(|i| segment_distance(p, vertices[i], vertices[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min);
    if inside {
        d
    } else {
        -d
    }
}

/// Unsigned distance from `(y0, y1)` in the first quadrant to the ellipse
/// with semi-axes `e0 ≥ e1`, by bisection on the Lagrange parameter.
fn ellipse_distance(e0: f64, e1: f64, y0: f64, y1: f64) -> f64 {
    if y1 > 0.0 {
        if y0 > 0.0 {
            let (z0, z1) = (y0 / e0, y1 / e1);
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g == 0.0 {
                return 0.0;
            }
            let r0 = (e0 / e1).powi(2);
            let s = ellipse_root(r0, z0, z1, g);
            let x0 = r0 * y0 / (s + r0);
            let x1 = y1 / (s + 1.0);
            (x0 - y0).hypot(x1 - y1)
        } else {
            (y1 - e1).abs()
        }
    } else {
        let numer = e0 * y0;
        let denom = e0 * e0 - e1 * e1;
        if numer < denom {
            let xde = numer / denom;
            let x0 = e0 * xde;
            let x1 = e1 * (1.0 - xde * xde).max(0.0).sqrt();
            (x0 - y0).hypot(x1)
        } else {
            (y0 - e0).abs()
        }
    }
}

fn ellipse_root(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
    let mut s = 0.0;
    for _ in 0..1100 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 || s1 - s0 <= 1e-17 * (1.0 + s.abs()) {
            break;
        }
        let (a, b) = (n0 / (s + r0), z1 / (s + 1.0));
        let gs = a * a + b * b - 1.0;
        if gs > 0.0 {
            s0 = s;
        } else if gs < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

/// Maximum pairwise distance.
pub fn diameter(d: &ConvexDomain) -> f64 {
    match d {
        ConvexDomain::Polygon { vertices } => rotating_calipers_diameter(vertices),
        ConvexDomain::Ellipse { a, .. } => 2.0 * a,
        ConvexDomain::Rectangle { a, b } => 2.0 * a.hypot(*b),
        ConvexDomain::Stadium { length, radius } => length + 2.0 * radius,
    }
}

/// Diameter of a convex CCW polygon over antipodal vertex pairs.
pub fn rotating_calipers_diameter(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return vertices[0].dist(vertices[1]);
    }
    let area = |a: Point, b: Point, c: Point| (b - a).cross(c - a).abs();
    let mut best = 0.0f64;
    let mut j = 1;
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        // advance j while it gets farther from edge (a, b)
        while area(a, b, vertices[(j + 1) % n]) > area(a, b, vertices[j]) {
            j = (j + 1) % n;
        }
        best = best.max(a.dist(vertices[j])).max(b.dist(vertices[j]));
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inradius {
    pub radius: f64,
    pub center: Point,
    /// `false` when the largest inscribed disk can slide.
    pub unique: bool,
}

/// Radius and center of the largest inscribed disk.
pub fn inradius(d: &ConvexDomain) -> Result<Inradius> {
    match d {
        ConvexDomain::Polygon { vertices } => chebyshev_center(vertices),
        ConvexDomain::Ellipse { b, .. } => Ok(Inradius {
            radius: *b,
            center: Point::ORIGIN,
            unique: true,
        }),
        ConvexDomain::Rectangle { a, b } => Ok(Inradius {
            radius: a.min(*b),
            center: Point::ORIGIN,
            unique: a == b,
        }),
        ConvexDomain::Stadium { radius, .. } => Ok(Inradius {
            radius: *radius,
            center: Point::ORIGIN,
            unique: false,
        }),
    }
}

/// Chebyshev center: maximize `r` subject to `n_i · c + r ≤ d_i` for every edge.
///
/// The center is written as `g + p - q` with `p, q ≥ 0` around the vertex
/// centroid `g`, which makes the origin a feasible starting basis.
pub fn chebyshev_center(vertices: &[Point]) -> Result<Inradius> {
    let n = vertices.len();
    let g = vertices.iter().fold(Point::ORIGIN, |acc, &p| acc + p) * (1.0 / n as f64);
    let edges: Vec<(Point, f64)> = (0..n)
        .map(|i| {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            let e = b - a;
            let normal = Point::new(e.y, -e.x) * (1.0 / e.norm());
            (normal, normal.dot(a))
        })
        .collect();
    let rows: Vec<Vec<f64>> = edges
        .iter()
        .map(|(nrm, _)| vec![nrm.x, nrm.y, -nrm.x, -nrm.y, 1.0])
        .collect();
    let rhs: Vec<f64> = edges.iter().map(|(nrm, d)| (d - nrm.dot(g)).max(0.0)).collect();
    let sol = maximize(&[0.0, 0.0, 0.0, 0.0, 1.0], &rows, &rhs)?;
    let radius = sol.objective;
    let center = g + Point::new(sol.x[0] - sol.x[2], sol.x[1] - sol.x[3]);

    // How far can the center slide while keeping radius r*?
    let scale = rotating_calipers_diameter(vertices);
    let slack = 1e-12 * scale;
    let rows2: Vec<Vec<f64>> = edges
        .iter()
        .map(|(nrm, _)| vec![nrm.x, nrm.y, -nrm.x, -nrm.y])
        .collect();
    let rhs2: Vec<f64> = edges
        .iter()
        .map(|(nrm, d)| (d - nrm.dot(center) - radius).max(0.0) + slack)
        .collect();
    let mut extremes = Vec::with_capacity(4);
    for dir in [Point::new(1.0, 0.0), Point::new(-1.0, 0.0), Point::new(0.0, 1.0), Point::new(0.0, -1.0)] {
        let s = maximize(&[dir.x, dir.y, -dir.x, -dir.y], &rows2, &rhs2)?;
        extremes.push(center + Point::new(s.x[0] - s.x[2], s.x[1] - s.x[3]));
    }
    let spread_x = extremes[0].dist(extremes[1]);
    let spread_y = extremes[2].dist(extremes[3]);
    let unique = spread_x.max(spread_y) <= 1e-7 * scale;
    let center = if unique {
        center
    } else if spread_x >= spread_y {
        (extremes[0] + extremes[1]) * 0.5
    } else {
        (extremes[2] + extremes[3]) * 0.5
    };
    Ok(Inradius {
        radius,
        center,
        unique,
    })
}

/// `(κ_min, κ_max)` of the boundary curvature for smooth kinds.
pub fn curvature_extremes(d: &ConvexDomain) -> Result<(f64, f64)> {
    match d {
        ConvexDomain::Ellipse { a, b } => Ok((b / (a * a), a / (b * b))),
        ConvexDomain::Stadium { radius, .. } => Ok((0.0, 1.0 / radius)),
        ConvexDomain::Polygon { .. } => Err(LabError::UnsupportedKind("curvature of a polygon")),
        ConvexDomain::Rectangle { .. } => Err(LabError::UnsupportedKind("curvature of a rectangle")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub diameter: f64,
    pub inradius: f64,
    /// `diameter / inradius`
    pub aspect: f64,
    pub curvature_min: Option<f64>,
    pub curvature_max: Option<f64>,
}

pub fn report(d: &ConvexDomain) -> Result<GeometryReport> {
    let diam = diameter(d);
    let inrad = inradius(d)?.radius;
    let curv = curvature_extremes(d).ok();
    Ok(GeometryReport {
        diameter: diam,
        inradius: inrad,
        aspect: diam / inrad,
        curvature_min: curv.map(|c| c.0),
        curvature_max: curv.map(|c| c.1),
    })
}
