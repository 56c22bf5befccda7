//! Scenario files (TOML).
//!
//! ```toml
//! seed = 7
//! directions = 64          # optional, even, >= 4
//! disk_radius = 0.3
//! averaging_radius = 0.0   # optional
//!
//! [cracks]                 # optional; segments come first, then circular arcs
//! segments = [{ from = [0.0, -0.25], to = [0.0, 0.25] }]
//! arcs = [{ center = [0.0, 0.0], radius = 0.3, start = 0.0, end = 3.0, orientation = "left" }]
//!
//! [band]
//! k_min = 7.0
//! k_max = 9.0
//! samples = 101
//!
//! [sweep]
//! x = [-0.5, 0.5]
//! y = [-0.5, 0.5]
//! step = 0.05
//!
//! [noise]                  # optional; at most one of the two keys
//! delta = 1e-3             # absolute bound on the weighted operator norm
//! # relative = 0.01        # fraction of the weighted norm of F
//!
//! [imaging]                # optional
//! fixed_k = 15.0           # single-frequency indicators; defaults to k_min
//! dlsm_radii = [0.3, 0.1]  # defaults to [disk_radius]
//! peak_prominence = 0.5
//! fm_test = "monopole"     # or "dipole"
//! fm_orientations = 8
//!
//! [solver]                 # optional
//! base_order = 12
//! order_per_klength = 1.5
//!
//! [compare]                # optional; crack counts of the progressive series
//! levels = [1, 3]
//! ```

use std::path::Path;

use serde::Deserialize;

use super::{Arc, ArtificialDisk, CrackNetwork, DirectionGrid, Orientation, Point};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub k_min: f64,
    pub k_max: f64,
    pub samples: usize,
}

impl Band {
    pub fn new(k_min: f64, k_max: f64, samples: usize) -> Result<Self> {
        if !(k_min > 0.0) || !k_max.is_finite() || k_min > k_max {
            return Err(Error::Config(format!("invalid band [{k_min}, {k_max}]")));
        }
        if samples == 0 {
            return Err(Error::Config("band needs at least one sample".into()));
        }
        if samples == 1 && k_min != k_max {
            return Err(Error::Config("a single-sample band needs k_min = k_max".into()));
        }
        if samples > 1 && k_min == k_max {
            return Err(Error::Config("a degenerate band needs samples = 1".into()));
        }
        Ok(Self { k_min, k_max, samples })
    }

    pub fn single(k: f64) -> Result<Self> {
        Self::new(k, k, 1)
    }

    pub fn step(&self) -> f64 {
        if self.samples > 1 {
            (self.k_max - self.k_min) / (self.samples - 1) as f64
        } else {
            0.0
        }
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.samples).map(|i| self.k_min + i as f64 * self.step()).collect()
    }
}

/// Rectangular sampling set: all `(x0 + i h, y0 + j h)` inside the box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub step: f64,
}

impl Sweep {
    pub fn new(x: [f64; 2], y: [f64; 2], step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Config(format!("sweep step must be positive, got {step}")));
        }
        if !(x[0] <= x[1]) || !(y[0] <= y[1]) {
            return Err(Error::Config("sweep bounding box is empty".into()));
        }
        Ok(Self { x, y, step })
    }

    fn count(lo: f64, hi: f64, step: f64) -> usize {
        ((hi - lo) / step + 1e-9).floor() as usize + 1
    }

    pub fn shape(&self) -> (usize, usize) {
        (Self::count(self.x[0], self.x[1], self.step), Self::count(self.y[0], self.y[1], self.step))
    }

    /// Row-major points, `x` fastest, `y` ascending.
    pub fn points(&self) -> Vec<Point> {
        let (nx, ny) = self.shape();
        let mut out = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                out.push(Point::new(self.x[0] + i as f64 * self.step, self.y[0] + j as f64 * self.step));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLevel {
    /// Bound on the weighted operator norm of `F^delta - F`.
    Absolute(f64),
    /// Fraction of the weighted operator norm of `F`.
    Relative(f64),
}

impl NoiseLevel {
    pub fn value(&self) -> f64 {
        match *self {
            NoiseLevel::Absolute(v) | NoiseLevel::Relative(v) => v,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.value() == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FmTest {
    Monopole,
    Dipole,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub network: CrackNetwork,
    pub grid: DirectionGrid,
    pub band: Band,
    pub sweep: Sweep,
    pub disk_radius: f64,
    pub averaging_radius: f64,
    pub noise: NoiseLevel,
    pub seed: u64,
    pub fixed_k: f64,
    pub dlsm_radii: Vec<f64>,
    pub peak_prominence: f64,
    pub fm_test: FmTest,
    pub fm_orientations: usize,
    pub base_order: usize,
    pub order_per_klength: f64,
    pub compare_levels: Vec<usize>,
    /// Smallest distance between two arcs, if there are at least two.
    pub min_gap: Option<f64>,
}

impl Scenario {
    pub fn disk(&self, center: Point) -> Result<ArtificialDisk> {
        ArtificialDisk::new(center, self.disk_radius)
    }

    pub fn reflected_x(&self) -> Self {
        let mut out = self.clone();
        out.network = self.network.reflected_x();
        out.sweep.y = [-self.sweep.y[1], -self.sweep.y[0]];
        out
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    seed: u64,
    #[serde(default = "default_directions")]
    directions: usize,
    disk_radius: f64,
    #[serde(default)]
    averaging_radius: f64,
    #[serde(default)]
    cracks: RawCracks,
    band: RawBand,
    sweep: RawSweep,
    #[serde(default)]
    noise: RawNoise,
    #[serde(default)]
    imaging: RawImaging,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    compare: RawCompare,
}

fn default_directions() -> usize {
    DirectionGrid::DEFAULT_COUNT
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawCracks {
    #[serde(default)]
    segments: Vec<RawSegment>,
    #[serde(default)]
    arcs: Vec<RawCircular>,
}

#[derive(Deserialize, Clone, Copy, Default)]
#[serde(rename_all = "lowercase")]
enum RawOrientation {
    #[default]
    Right,
    Left,
}

impl From<RawOrientation> for Orientation {
    fn from(o: RawOrientation) -> Self {
        match o {
            RawOrientation::Right => Orientation::Right,
            RawOrientation::Left => Orientation::Left,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    from: [f64; 2],
    to: [f64; 2],
    #[serde(default)]
    orientation: RawOrientation,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircular {
    center: [f64; 2],
    radius: f64,
    start: f64,
    end: f64,
    #[serde(default)]
    orientation: RawOrientation,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBand {
    k_min: f64,
    k_max: f64,
    samples: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    x: [f64; 2],
    y: [f64; 2],
    step: f64,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    delta: Option<f64>,
    relative: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawImaging {
    fixed_k: Option<f64>,
    dlsm_radii: Option<Vec<f64>>,
    peak_prominence: Option<f64>,
    fm_test: Option<FmTest>,
    fm_orientations: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    base_order: Option<usize>,
    order_per_klength: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawCompare {
    levels: Option<Vec<usize>>,
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_scenario(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse { path: path.to_path_buf(), message },
        other => other,
    })
}

/// Parses and validates scenario text.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let raw: RawScenario =
        toml::from_str(text).map_err(|e| Error::Parse { path: "<scenario>".into(), message: e.to_string() })?;

    let arcs: Vec<Arc> = raw
        .cracks
        .segments
        .iter()
        .map(|s| Arc::segment(Point::from(s.from), Point::from(s.to)).with_orientation(s.orientation.into()))
        .chain(raw.cracks.arcs.iter().map(|c| {
            Arc::circular(Point::from(c.center), c.radius, c.start, c.end).with_orientation(c.orientation.into())
        }))
        .collect();
    let network = CrackNetwork::new(arcs)?;
    let min_gap = network.min_gap();
    if let Some(gap) = min_gap {
        log::info!("minimum gap between arcs: {gap:.6e}");
    }

    let grid = DirectionGrid::new(raw.directions)?;
    let band = Band::new(raw.band.k_min, raw.band.k_max, raw.band.samples)?;
    let sweep = Sweep::new(raw.sweep.x, raw.sweep.y, raw.sweep.step)?;
    if !(raw.disk_radius > 0.0) || !raw.disk_radius.is_finite() {
        return Err(Error::Config(format!("disk_radius must be positive, got {}", raw.disk_radius)));
    }
    if !(raw.averaging_radius >= 0.0) {
        return Err(Error::Config("averaging_radius must be nonnegative".into()));
    }
    let noise = match (raw.noise.delta, raw.noise.relative) {
        (Some(_), Some(_)) => return Err(Error::Config("give either noise.delta or noise.relative, not both".into())),
        (Some(d), None) => NoiseLevel::Absolute(d),
        (None, Some(r)) => NoiseLevel::Relative(r),
        (None, None) => NoiseLevel::Absolute(0.0),
    };
    if !(noise.value() >= 0.0) || !noise.value().is_finite() {
        return Err(Error::Config(format!("noise level must be nonnegative, got {}", noise.value())));
    }

    let img = raw.imaging;
    let fixed_k = img.fixed_k.unwrap_or(band.k_min);
    if !(fixed_k > 0.0) {
        return Err(Error::Config(format!("fixed_k must be positive, got {fixed_k}")));
    }
    let dlsm_radii = img.dlsm_radii.unwrap_or_else(|| vec![raw.disk_radius]);
    if dlsm_radii.is_empty() || dlsm_radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Config("dlsm_radii must be a nonempty list of positive radii".into()));
    }
    let peak_prominence = img.peak_prominence.unwrap_or(0.5);
    if !(peak_prominence >= 0.0) {
        return Err(Error::Config("peak_prominence must be nonnegative".into()));
    }
    let fm_orientations = img.fm_orientations.unwrap_or(8);
    if fm_orientations == 0 {
        return Err(Error::Config("fm_orientations must be positive".into()));
    }

    let base_order = raw.solver.base_order.unwrap_or(12);
    let order_per_klength = raw.solver.order_per_klength.unwrap_or(1.5);
    if base_order < 4 || !(order_per_klength >= 0.0) {
        return Err(Error::Config("solver needs base_order >= 4 and order_per_klength >= 0".into()));
    }

    let compare_levels = raw.compare.levels.unwrap_or_else(|| vec![network.len()]);
    if let Some(bad) = compare_levels.iter().find(|&&l| l > network.len()) {
        return Err(Error::Config(format!("compare level {bad} exceeds the {} arcs of the network", network.len())));
    }

    Ok(Scenario {
        network,
        grid,
        band,
        sweep,
        disk_radius: raw.disk_radius,
        averaging_radius: raw.averaging_radius,
        noise,
        seed: raw.seed,
        fixed_k,
        dlsm_radii,
        peak_prominence,
        fm_test: img.fm_test.unwrap_or(FmTest::Monopole),
        fm_orientations,
        base_order,
        order_per_klength,
        compare_levels,
        min_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
seed = 3
disk_radius = 0.3

[band]
k_min = 7.0
k_max = 9.0
samples = 11

[sweep]
x = [-0.5, 0.5]
y = [-0.5, 0.5]
step = 0.25
"#;

    #[test]
    fn single_segment() {
        let text = format!("{BASE}\n[cracks]\nsegments = [{{ from = [0.0, -0.25], to = [0.0, 0.25] }}]\n");
        let s = parse_scenario(&text).unwrap();
        assert_eq!(s.network.len(), 1);
        assert!((s.network.arcs()[0].length() - 0.5).abs() < 1e-15);
        assert_eq!(s.grid.len(), 64);
        assert_eq!(s.sweep.points().len(), 25);
        assert_eq!(s.band.wavenumbers().len(), 11);
        assert_eq!(s.noise, NoiseLevel::Absolute(0.0));
    }

    #[test]
    fn empty_network_accepted() {
        let s = parse_scenario(BASE).unwrap();
        assert!(s.network.is_empty());
    }

    #[test]
    fn overlapping_segments_name_both_arcs() {
        let text = format!(
            "{BASE}\n[cracks]\nsegments = [{{ from = [0.0, -0.25], to = [0.0, 0.25] }}, \
             {{ from = [-0.1, 0.0], to = [0.1, 0.0] }}]\n"
        );
        match parse_scenario(&text) {
            Err(Error::IntersectingArcs { first: 0, second: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected_with_line() {
        let text = format!("{BASE}\n[noise]\nsigma = 0.1\n");
        match parse_scenario(&text) {
            Err(Error::Parse { message, .. }) => {
                assert!(message.contains("sigma"), "{message}");
                assert!(message.contains("line"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn band_and_noise_validation() {
        let bad = BASE.replace("k_min = 7.0", "k_min = 10.0");
        assert!(parse_scenario(&bad).unwrap_err().is_config());
        let both = format!("{BASE}\n[noise]\ndelta = 0.1\nrelative = 0.1\n");
        assert!(parse_scenario(&both).is_err());
        let neg = format!("{BASE}\n[noise]\ndelta = -0.1\n");
        assert!(parse_scenario(&neg).is_err());
        let odd = BASE.replace("seed = 3", "seed = 3\ndirections = 33");
        assert!(parse_scenario(&odd).is_err());
    }

    #[test]
    fn reflected_scenario_mirrors_arcs() {
        let text =
            format!("{BASE}\n[cracks]\narcs = [{{ center = [0.1, 0.2], radius = 0.2, start = 0.5, end = 2.0 }}]\n");
        let s = parse_scenario(&text).unwrap();
        let r = s.reflected_x();
        let (a, b) = (&s.network.arcs()[0], &r.network.arcs()[0]);
        assert!((a.length() - b.length()).abs() < 1e-15);
        let p = a.point(-0.4);
        assert!(r.network.distance_to_point(&Point::new(p.x, -p.y)) < 1e-12);
    }
}
