//! Crack networks, direction grids, artificial disks and run scenarios.

mod arc;
mod scenario;

pub use arc::{arc_quadrature, Arc, Orientation, QuadNode};
pub use scenario::{load_scenario, parse_scenario, Band, FmTest, NoiseLevel, Scenario, Sweep};

use nalgebra::Vector2;
use std::f64::consts::PI;

use crate::{Error, Result};

pub type Point = Vector2<f64>;

/// Equispaced directions `theta_l = 2 pi l / N`, `l = 0..N`.
///
/// `N` is even so that `-theta` is on the grid for every grid direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DirectionGrid {
    count: usize,
}

impl DirectionGrid {
    pub const DEFAULT_COUNT: usize = 64;

    pub fn new(count: usize) -> Result<Self> {
        if count < 4 || !count.is_multiple_of(2) {
            return Err(Error::Config(format!("direction count must be even and >= 4, got {count}")));
        }
        Ok(Self { count })
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn angle(&self, l: usize) -> f64 {
        2.0 * PI * l as f64 / self.count as f64
    }

    pub fn direction(&self, l: usize) -> Point {
        let (s, c) = self.angle(l).sin_cos();
        Point::new(c, s)
    }

    pub fn directions(&self) -> Vec<Point> {
        (0..self.count).map(|l| self.direction(l)).collect()
    }

    /// Quadrature weight `2 pi / N` of the uniform rule on the circle.
    pub fn weight(&self) -> f64 {
        2.0 * PI / self.count as f64
    }

    /// Index of `-theta_l`.
    pub fn antipode(&self, l: usize) -> usize {
        (l + self.count / 2) % self.count
    }

    /// Index of the direction mirrored through the x-axis.
    pub fn reflect_x(&self, l: usize) -> usize {
        (self.count - l) % self.count
    }
}

/// Sound-hard crack network: a list of pairwise disjoint arcs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CrackNetwork {
    arcs: Vec<Arc>,
}

impl CrackNetwork {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates every arc and pairwise disjointness.
    pub fn new(arcs: Vec<Arc>) -> Result<Self> {
        for a in &arcs {
            a.validate()?;
        }
        for i in 0..arcs.len() {
            for j in i + 1..arcs.len() {
                let d = arcs[i].distance_to(&arcs[j]);
                if d <= 0.0 {
                    return Err(Error::IntersectingArcs { first: i, second: j, distance: d });
                }
            }
        }
        Ok(Self { arcs })
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Smallest distance between two distinct arcs, `None` for fewer than two arcs.
    pub fn min_gap(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.arcs.len() {
            for j in i + 1..self.arcs.len() {
                let d = self.arcs[i].distance_to(&self.arcs[j]);
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
        }
        best
    }

    /// First `count` arcs as a new network.
    pub fn prefix(&self, count: usize) -> Self {
        Self { arcs: self.arcs[..count.min(self.arcs.len())].to_vec() }
    }

    pub fn reflected_x(&self) -> Self {
        Self { arcs: self.arcs.iter().map(Arc::reflected_x).collect() }
    }

    pub fn translated(&self, shift: Point) -> Self {
        Self { arcs: self.arcs.iter().map(|a| a.translated(shift)).collect() }
    }

    /// Distance from `p` to the nearest arc (infinite for an empty network).
    pub fn distance_to_point(&self, p: &Point) -> f64 {
        self.arcs.iter().map(|a| a.distance_to_point(p)).fold(f64::INFINITY, f64::min)
    }

    /// Whether some arc meets the closed disk.
    pub fn meets_disk(&self, disk: &ArtificialDisk) -> bool {
        self.distance_to_point(&disk.center) <= disk.radius
    }
}

/// Observer-chosen sound-soft disk `B(center, radius)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArtificialDisk {
    pub center: Point,
    pub radius: f64,
}

impl ArtificialDisk {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Config(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, p: &Point) -> bool {
        (p - self.center).norm() < self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_odd_and_small() {
        assert!(DirectionGrid::new(3).is_err());
        assert!(DirectionGrid::new(2).is_err());
        assert!(DirectionGrid::new(7).is_err());
        assert!(DirectionGrid::new(4).is_ok());
    }

    #[test]
    fn grid_antipodes_and_reflection() {
        let g = DirectionGrid::new(16).unwrap();
        for l in 0..16 {
            let a = g.direction(l);
            let b = g.direction(g.antipode(l));
            assert!((a + b).norm() < 1e-14);
            let r = g.direction(g.reflect_x(l));
            assert!((r.x - a.x).abs() < 1e-14 && (r.y + a.y).abs() < 1e-14);
        }
        for l in 1..16 {
            assert!(g.angle(l) > g.angle(l - 1));
        }
    }

    #[test]
    fn overlapping_segments_rejected_with_indices() {
        let a = Arc::segment(Point::new(0.0, -0.2), Point::new(0.0, 0.2));
        let b = Arc::segment(Point::new(0.5, 0.0), Point::new(0.6, 0.0));
        let c = Arc::segment(Point::new(-0.1, 0.0), Point::new(0.1, 0.0));
        match CrackNetwork::new(vec![a, b, c]) {
            Err(Error::IntersectingArcs { first, second, .. }) => {
                assert_eq!((first, second), (0, 2));
            }
            other => panic!("expected intersection error, got {other:?}"),
        }
    }

    #[test]
    fn empty_network_is_fine() {
        let n = CrackNetwork::new(vec![]).unwrap();
        assert!(n.is_empty());
        assert_eq!(n.min_gap(), None);
    }

    #[test]
    fn min_gap_of_parallel_segments() {
        let a = Arc::segment(Point::new(0.0, 0.0), Point::new(0.0, 1.0));
        let b = Arc::segment(Point::new(0.3, 0.2), Point::new(0.3, 0.8));
        let n = CrackNetwork::new(vec![a, b]).unwrap();
        assert!((n.min_gap().unwrap() - 0.3).abs() < 1e-14);
    }

    #[test]
    fn reflection_preserves_lengths() {
        let n = CrackNetwork::new(vec![
            Arc::segment(Point::new(0.1, 0.2), Point::new(0.4, -0.1)),
            Arc::circular(Point::new(-0.3, 0.1), 0.2, 0.3, 2.0),
        ])
        .unwrap();
        let r = n.reflected_x();
        for (a, b) in n.arcs().iter().zip(r.arcs()) {
            assert!((a.length() - b.length()).abs() < 1e-14);
            for t in [-1.0, -0.2, 0.3, 1.0] {
                let p = a.point(t);
                assert!(b.distance_to_point(&Point::new(p.x, -p.y)) < 1e-14);
            }
        }
    }
}
