use std::f64::consts::PI;

use super::Point;
use crate::{Error, Result};

/// Side of the arc on which the unit normal points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Tangent rotated clockwise by a right angle.
    #[default]
    Right,
    /// Tangent rotated counter-clockwise.
    Left,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Right => 1.0,
            Orientation::Left => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Right => Orientation::Left,
            Orientation::Left => Orientation::Right,
        }
    }
}

/// Smooth open arc, parametrized by `tau` in `[-1, 1]` at constant speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Arc {
    Segment {
        start: Point,
        end: Point,
        orientation: Orientation,
    },
    /// Counter-clockwise from `start_angle` to `end_angle`, span in `(0, 2 pi)`.
    Circular {
        center: Point,
        radius: f64,
        start_angle: f64,
        end_angle: f64,
        orientation: Orientation,
    },
}

/// Quadrature node on an arc; `weight` includes the arc-length element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadNode {
    pub tau: f64,
    pub point: Point,
    pub normal: Point,
    pub weight: f64,
}

impl Arc {
    pub fn segment(start: Point, end: Point) -> Self {
        Arc::Segment { start, end, orientation: Orientation::Right }
    }

    pub fn circular(center: Point, radius: f64, start_angle: f64, end_angle: f64) -> Self {
        Arc::Circular { center, radius, start_angle, end_angle, orientation: Orientation::Right }
    }

    pub fn with_orientation(mut self, o: Orientation) -> Self {
        match &mut self {
            Arc::Segment { orientation, .. } | Arc::Circular { orientation, .. } => *orientation = o,
        }
        self
    }

    pub fn orientation(&self) -> Orientation {
        match self {
            Arc::Segment { orientation, .. } | Arc::Circular { orientation, .. } => *orientation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Arc::Segment { start, end, .. } => {
                if !(start.iter().chain(end.iter()).all(|v| v.is_finite())) {
                    return Err(Error::Config("segment endpoints must be finite".into()));
                }
                if (end - start).norm() <= 0.0 {
                    return Err(Error::Config("segment has zero length".into()));
                }
            }
            Arc::Circular { center, radius, start_angle, end_angle, .. } => {
                let finite = center.iter().all(|v| v.is_finite())
                    && radius.is_finite()
                    && start_angle.is_finite()
                    && end_angle.is_finite();
                if !finite || radius <= 0.0 {
                    return Err(Error::Config(format!("invalid circular arc radius {radius}")));
                }
                let span = end_angle - start_angle;
                if !(span > 0.0 && span < 2.0 * PI) {
                    return Err(Error::Config(format!("circular arc span must lie in (0, 2pi), got {span}")));
                }
            }
        }
        Ok(())
    }

    fn angle_at(start_angle: f64, end_angle: f64, tau: f64) -> f64 {
        0.5 * (start_angle + end_angle) + 0.5 * tau * (end_angle - start_angle)
    }

    pub fn point(&self, tau: f64) -> Point {
        match *self {
            Arc::Segment { start, end, .. } => 0.5 * (start + end) + 0.5 * tau * (end - start),
            Arc::Circular { center, radius, start_angle, end_angle, .. } => {
                let (s, c) = Self::angle_at(start_angle, end_angle, tau).sin_cos();
                center + radius * Point::new(c, s)
            }
        }
    }

    /// `dx/dtau`.
    pub fn derivative(&self, tau: f64) -> Point {
        match *self {
            Arc::Segment { start, end, .. } => 0.5 * (end - start),
            Arc::Circular { radius, start_angle, end_angle, .. } => {
                let (s, c) = Self::angle_at(start_angle, end_angle, tau).sin_cos();
                0.5 * (end_angle - start_angle) * radius * Point::new(-s, c)
            }
        }
    }

    /// `|dx/dtau|`, constant along the arc.
    pub fn speed(&self) -> f64 {
        0.5 * self.length()
    }

    pub fn length(&self) -> f64 {
        match *self {
            Arc::Segment { start, end, .. } => (end - start).norm(),
            Arc::Circular { radius, start_angle, end_angle, .. } => radius * (end_angle - start_angle),
        }
    }

    pub fn tangent(&self, tau: f64) -> Point {
        self.derivative(tau).normalize()
    }

    pub fn normal(&self, tau: f64) -> Point {
        let t = self.tangent(tau);
        self.orientation().sign() * Point::new(t.y, -t.x)
    }

    pub fn endpoints(&self) -> (Point, Point) {
        (self.point(-1.0), self.point(1.0))
    }

    pub fn reflected_x(&self) -> Self {
        match *self {
            Arc::Segment { start, end, orientation } => Arc::Segment {
                start: Point::new(start.x, -start.y),
                end: Point::new(end.x, -end.y),
                orientation: orientation.flipped(),
            },
            Arc::Circular { center, radius, start_angle, end_angle, orientation } => Arc::Circular {
                center: Point::new(center.x, -center.y),
                radius,
                start_angle: -end_angle,
                end_angle: -start_angle,
                orientation,
            },
        }
    }

    pub fn translated(&self, shift: Point) -> Self {
        match *self {
            Arc::Segment { start, end, orientation } => {
                Arc::Segment { start: start + shift, end: end + shift, orientation }
            }
            Arc::Circular { center, radius, start_angle, end_angle, orientation } => {
                Arc::Circular { center: center + shift, radius, start_angle, end_angle, orientation }
            }
        }
    }

    fn in_span(start_angle: f64, end_angle: f64, theta: f64) -> bool {
        (theta - start_angle).rem_euclid(2.0 * PI) <= end_angle - start_angle
    }

    pub fn distance_to_point(&self, p: &Point) -> f64 {
        match *self {
            Arc::Segment { start, end, .. } => segment_point_distance(&start, &end, p),
            Arc::Circular { center, radius, start_angle, end_angle, .. } => {
                let d = p - center;
                let r = d.norm();
                if r > 0.0 && Self::in_span(start_angle, end_angle, d.y.atan2(d.x)) {
                    (r - radius).abs()
                } else {
                    let (a, b) = self.endpoints();
                    (p - a).norm().min((p - b).norm())
                }
            }
        }
    }

    /// Whether the two arcs share a point.
    fn intersects(&self, other: &Arc) -> bool {
        match (*self, *other) {
            (Arc::Segment { start: a, end: b, .. }, Arc::Segment { start: c, end: d, .. }) => {
                segments_intersect(&a, &b, &c, &d)
            }
            (Arc::Segment { start, end, .. }, circ @ Arc::Circular { .. })
            | (circ @ Arc::Circular { .. }, Arc::Segment { start, end, .. }) => {
                segment_circle_hits(&start, &end, &circ)
            }
            (a @ Arc::Circular { .. }, b @ Arc::Circular { .. }) => circle_circle_hits(&a, &b),
        }
    }

    /// Euclidean distance between two arcs, zero when they meet.
    pub fn distance_to(&self, other: &Arc) -> f64 {
        if self.intersects(other) {
            return 0.0;
        }
        if let (Arc::Segment { start: a, end: b, .. }, Arc::Segment { start: c, end: d, .. }) = (*self, *other) {
            return segment_point_distance(&c, &d, &a)
                .min(segment_point_distance(&c, &d, &b))
                .min(segment_point_distance(&a, &b, &c))
                .min(segment_point_distance(&a, &b, &d));
        }
        one_sided_distance(self, other).min(one_sided_distance(other, self))
    }
}

fn segment_point_distance(a: &Point, b: &Point, p: &Point) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (p - (a + t * ab)).norm()
}

fn cross(a: &Point, b: &Point) -> f64 {
    a.x * b.y - a.y * b.x
}

fn segments_intersect(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let d1 = cross(&(b - a), &(c - a));
    let d2 = cross(&(b - a), &(d - a));
    let d3 = cross(&(d - c), &(a - c));
    let d4 = cross(&(d - c), &(b - c));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    // Touching or collinear overlap.
    (d1 == 0.0 && segment_point_distance(a, b, c) == 0.0)
        || (d2 == 0.0 && segment_point_distance(a, b, d) == 0.0)
        || (d3 == 0.0 && segment_point_distance(c, d, a) == 0.0)
        || (d4 == 0.0 && segment_point_distance(c, d, b) == 0.0)
}

fn segment_circle_hits(a: &Point, b: &Point, circ: &Arc) -> bool {
    let Arc::Circular { center, radius, start_angle, end_angle, .. } = *circ else {
        return false;
    };
    let d = b - a;
    let f = a - center;
    let qa = d.norm_squared();
    let qb = 2.0 * f.dot(&d);
    let qc = f.norm_squared() - radius * radius;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return false;
    }
    let sq = disc.sqrt();
    [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)].iter().any(|&t| {
        if !(0.0..=1.0).contains(&t) {
            return false;
        }
        let p = a + t * d - center;
        Arc::in_span(start_angle, end_angle, p.y.atan2(p.x))
    })
}

fn circle_circle_hits(a: &Arc, b: &Arc) -> bool {
    let (
        Arc::Circular { center: c0, radius: r0, start_angle: s0, end_angle: e0, .. },
        Arc::Circular { center: c1, radius: r1, start_angle: s1, end_angle: e1, .. },
    ) = (*a, *b)
    else {
        return false;
    };
    let dv = c1 - c0;
    let d = dv.norm();
    if d == 0.0 {
        if r0 != r1 {
            return false;
        }
        // Same circle: overlap of angular spans.
        let starts_inside = Arc::in_span(s0, e0, s1) || Arc::in_span(s1, e1, s0);
        return starts_inside;
    }
    if d > r0 + r1 || d < (r0 - r1).abs() {
        return false;
    }
    let along = (r0 * r0 - r1 * r1 + d * d) / (2.0 * d);
    let h = (r0 * r0 - along * along).max(0.0).sqrt();
    let base = c0 + along * dv / d;
    let perp = Point::new(-dv.y, dv.x) / d;
    [base + h * perp, base - h * perp].iter().any(|p| {
        let p0 = p - c0;
        let p1 = p - c1;
        Arc::in_span(s0, e0, p0.y.atan2(p0.x)) && Arc::in_span(s1, e1, p1.y.atan2(p1.x))
    })
}

/// Minimum over `a` of the exact point-to-arc distance to `b`.
fn one_sided_distance(a: &Arc, b: &Arc) -> f64 {
    const SAMPLES: usize = 256;
    let f = |tau: f64| b.distance_to_point(&a.point(tau));
    let taus: Vec<f64> = (0..=SAMPLES).map(|i| -1.0 + 2.0 * i as f64 / SAMPLES as f64).collect();
    let (best, _) =
        taus.iter()
            .enumerate()
            .map(|(i, &t)| (i, f(t)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let mut lo = taus[best.saturating_sub(1)];
    let mut hi = taus[(best + 1).min(SAMPLES)];
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.min(f2).min(f(taus[best]))
}

/// Fejér second-rule nodes `tau_j = cos(j pi / order)`, `j = 1..order`, on the arc.
///
/// The weights include the arc-length element, so they sum to the arc length
/// for segments and circular arcs.
pub fn arc_quadrature(arc: &Arc, order: usize) -> Vec<QuadNode> {
    let n = order.max(2);
    let speed = arc.speed();
    (1..n)
        .map(|j| {
            let theta = j as f64 * PI / n as f64;
            let tau = theta.cos();
            let sum: f64 = (1..=n / 2)
                .map(|l| {
                    let m = (2 * l - 1) as f64;
                    (m * theta).sin() / m
                })
                .sum();
            let w = 4.0 * theta.sin() / n as f64 * sum;
            QuadNode { tau, point: arc.point(tau), normal: arc.normal(tau), weight: w * speed }
        })
        .collect()
}
