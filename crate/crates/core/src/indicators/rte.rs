//! Eigen-curves, peak detection and the spectrum-distance indicator.

use crate::diskbg::{dirichlet_spectrum, disk_far_field, relative_operator, translation_phases, SpectrumEstimate};
use crate::forward::FarFieldMatrix;
use crate::geometry::{ArtificialDisk, Point};
use crate::glsm::{sharp_operator, GlsmProblem, SharpOperator, SharpSource};
use crate::linalg::CMatrix;
use crate::{Error, Result};

use super::{ordered_mean, IndicatorGrid, IndicatorKind, ZRule};

/// `E(k)` samples for one disk center.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCurve {
    pub t: Point,
    pub samples: Vec<(f64, f64)>,
}

impl EigenCurve {
    pub fn new(t: Point, samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Config("eigen-curve wavenumbers must increase strictly".into()));
        }
        if let Some(s) = samples.iter().find(|s| !(s.1 >= 0.0 && s.1.is_finite())) {
            return Err(Error::Numerical(format!("eigen-curve value {} at k = {}", s.1, s.0)));
        }
        Ok(Self { t, samples })
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }
}

/// Per-wavenumber data shared by every disk center of one radius.
#[derive(Debug, Clone)]
pub struct BandEntry {
    pub f: FarFieldMatrix,
    pub f_sharp: SharpOperator,
    /// Disk far field and its `F#` for the disk centered at the origin.
    pub fb0: FarFieldMatrix,
    pub fb0_sharp: SharpOperator,
    pub delta: f64,
}

impl BandEntry {
    pub fn new(f: FarFieldMatrix, rho: f64, delta: f64) -> Result<Self> {
        let disk = ArtificialDisk::new(Point::zeros(), rho)?;
        let fb0 = disk_far_field(&disk, f.k(), f.grid())?;
        Ok(Self {
            f_sharp: sharp_operator(&f, SharpSource::Measured)?,
            fb0_sharp: sharp_operator(&fb0, SharpSource::Background)?,
            fb0,
            f,
            delta,
        })
    }

    pub fn k(&self) -> f64 {
        self.f.k()
    }

    /// GLSM problem for the disk centered at `t`.
    pub fn problem(&self, t: Point) -> Result<GlsmProblem> {
        let grid = self.f.grid();
        let ph = translation_phases(self.k(), t, &grid);
        let n = grid.len();
        let e = self.fb0.entries();
        let fbt = FarFieldMatrix::new(self.k(), grid, CMatrix::from_fn(n, n, |q, p| ph[q] * e[(q, p)] * ph[p].conj()))?;
        let frel = relative_operator(&self.f, &fbt)?;
        GlsmProblem::new(&frel, &self.f_sharp, &self.fb0_sharp.conjugated(&ph), self.delta)
    }
}

/// Multi-frequency data prepared for disks of radius `rho`.
#[derive(Debug, Clone)]
pub struct BandData {
    pub rho: f64,
    pub z_rule: ZRule,
    pub entries: Vec<BandEntry>,
}

impl BandData {
    pub fn from_entries(rho: f64, z_rule: ZRule, entries: Vec<BandEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Config("empty band".into()));
        }
        if entries.windows(2).any(|w| !(w[1].k() > w[0].k())) {
            return Err(Error::Config("band wavenumbers must increase strictly".into()));
        }
        Ok(Self { rho, z_rule, entries })
    }

    /// `deltas` holds one noise level per matrix.
    pub fn new(dataset: &[FarFieldMatrix], deltas: &[f64], rho: f64, z_rule: ZRule) -> Result<Self> {
        if dataset.len() != deltas.len() {
            return Err(Error::Dimension("one noise level per far-field matrix expected".into()));
        }
        let entries =
            dataset.iter().zip(deltas).map(|(f, &d)| BandEntry::new(f.clone(), rho, d)).collect::<Result<Vec<_>>>()?;
        Self::from_entries(rho, z_rule, entries)
    }

    pub fn band(&self) -> (f64, f64) {
        (self.entries[0].k(), self.entries.last().map(|e| e.k()).unwrap_or(0.0))
    }

    /// `sigma_empty` for this radius over the band.
    pub fn reference_spectrum(&self) -> Result<SpectrumEstimate> {
        dirichlet_spectrum(&ArtificialDisk::new(Point::zeros(), self.rho)?, self.band())
    }

    /// `E(k)`: mean of `P(g_z)` over the interior samples, per wavenumber.
    pub fn eigen_curve(&self, t: Point) -> Result<EigenCurve> {
        let disk = ArtificialDisk::new(t, self.rho)?;
        let zs = self.z_rule.points(&disk);
        let mut samples = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            let prob = e.problem(t)?;
            let p: Vec<f64> = zs.iter().map(|&z| prob.solve_point(z).penalization_value.max(0.0)).collect();
            samples.push((e.k(), ordered_mean(&p)));
        }
        EigenCurve::new(t, samples)
    }
}

/// Eigen-curve of the disk `B(t, rho)`; `deltas` gives the noise level per matrix.
pub fn eigen_curve(
    t: Point,
    rho: f64,
    dataset: &[FarFieldMatrix],
    deltas: &[f64],
    z_rule: ZRule,
) -> Result<EigenCurve> {
    let band = BandData::new(dataset, deltas, rho, z_rule)?;
    if band.reference_spectrum()?.is_empty() {
        log::warn!(
            "band [{}, {}] holds no Dirichlet eigenvalue of a disk of radius {rho}",
            band.band().0,
            band.band().1
        );
    }
    band.eigen_curve(t)
}

/// Local maxima with prominence at least `prominence * median(E)`, refined by
/// a parabola through three samples and returned as `k^2`.
pub fn detect_peaks(curve: &EigenCurve, prominence: f64) -> Result<SpectrumEstimate> {
    let n = curve.samples.len();
    if n < 5 {
        return Err(Error::Config(format!("peak detection needs at least 5 samples, got {n}")));
    }
    let ks = curve.wavenumbers();
    let ys = curve.values();
    let mut sorted = ys.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    let threshold = prominence * median;
    let band = (ks[0] * ks[0], ks[n - 1] * ks[n - 1]);

    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if !(ys[i] > ys[i - 1]) {
            i += 1;
            continue;
        }
        // Extend over a flat top.
        let mut j = i;
        while j + 1 < n && ys[j + 1] == ys[i] {
            j += 1;
        }
        if j + 1 >= n || !(ys[j + 1] < ys[i]) {
            i = j + 1;
            continue;
        }
        let peak = ys[i];
        let mut left_min = peak;
        for l in (0..i).rev() {
            if ys[l] > peak {
                break;
            }
            left_min = left_min.min(ys[l]);
        }
        let mut right_min = peak;
        for &y in &ys[j + 1..] {
            if y > peak {
                break;
            }
            right_min = right_min.min(y);
        }
        let prom = peak - left_min.max(right_min);
        if prom >= threshold && prom > 0.0 {
            let c = (i + j) / 2;
            let (y0, y1, y2) = (ys[c - 1], ys[c], ys[c + 1]);
            let denom = y0 - 2.0 * y1 + y2;
            let shift = if i == j && denom < 0.0 { (0.5 * (y0 - y2) / denom).clamp(-0.5, 0.5) } else { 0.0 };
            let h = if shift >= 0.0 { ks[c + 1] - ks[c] } else { ks[c] - ks[c - 1] };
            let kp = ks[c] + shift * h;
            out.push((kp * kp).clamp(band.0, band.1));
        }
        i = j + 1;
    }
    SpectrumEstimate::new(out, band)
}

/// Hausdorff-type distance between recovered and reference spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumDistance {
    pub value: f64,
    /// One side was empty and the band-edge convention was used.
    pub flagged: bool,
}

fn edge_distance(values: &[f64], band: (f64, f64)) -> f64 {
    values.iter().map(|&b| (b - band.0).min(band.1 - b).max(0.0)).fold(0.0, f64::max)
}

fn one_sided(a: &[f64], b: &[f64]) -> f64 {
    a.iter().map(|x| b.iter().map(|y| (x - y).abs()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
}

/// `max_a min_b |a - b| + max_b min_a |a - b|`. An empty side is replaced by
/// the largest distance from the other side to the band edges (flagged).
pub fn spectrum_distance(sig_gamma: &SpectrumEstimate, sig_empty: &SpectrumEstimate) -> Result<SpectrumDistance> {
    match (sig_gamma.is_empty(), sig_empty.is_empty()) {
        (true, true) => Err(Error::Numerical("both spectra are empty".into())),
        (true, false) => {
            Ok(SpectrumDistance { value: edge_distance(sig_empty.values(), sig_empty.band()), flagged: true })
        }
        (false, true) => {
            Ok(SpectrumDistance { value: edge_distance(sig_gamma.values(), sig_gamma.band()), flagged: true })
        }
        (false, false) => {
            let (a, b) = (sig_gamma.values(), sig_empty.values());
            Ok(SpectrumDistance { value: one_sided(a, b) + one_sided(b, a), flagged: false })
        }
    }
}

/// Everything computed for one disk of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskDistance {
    pub curve: EigenCurve,
    pub sigma_gamma: SpectrumEstimate,
    pub distance: SpectrumDistance,
}

pub fn disk_distance(
    band: &BandData,
    t: Point,
    sigma_empty: &SpectrumEstimate,
    prominence: f64,
) -> Result<DiskDistance> {
    let curve = band.eigen_curve(t)?;
    let sigma_gamma = detect_peaks(&curve, prominence)?;
    let distance = spectrum_distance(&sigma_gamma, sigma_empty)?;
    Ok(DiskDistance { curve, sigma_gamma, distance })
}

/// Mean of `values` over the points within `eta` of each point. Neighbors are
/// summed in `(x, y)` order, so the result does not depend on the order of `points`.
pub fn average_neighbors(points: &[Point], values: &[f64], eta: f64) -> Vec<f64> {
    let reach = eta * (1.0 + 1e-12);
    points
        .iter()
        .map(|t| {
            let mut near: Vec<(f64, f64, f64)> = points
                .iter()
                .zip(values)
                .filter(|(s, _)| (*s - t).norm() <= reach)
                .map(|(s, &v)| (s.x, s.y, v))
                .collect();
            near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            let vals: Vec<f64> = near.iter().map(|n| n.2).collect();
            ordered_mean(&vals)
        })
        .collect()
}

/// `I(t)`: spectrum distances averaged over disks within `eta_avg`.
pub fn rte_indicator(
    points: &[Point],
    band: &BandData,
    eta_avg: f64,
    prominence: f64,
) -> Result<(IndicatorGrid, Vec<DiskDistance>)> {
    let sigma_empty = band.reference_spectrum()?;
    let per_disk =
        points.iter().map(|&t| disk_distance(band, t, &sigma_empty, prominence)).collect::<Result<Vec<_>>>()?;
    grid_from_distances(points, &per_disk, eta_avg).map(|g| (g, per_disk))
}

/// Assembles the averaged indicator from per-disk results.
pub fn grid_from_distances(points: &[Point], per_disk: &[DiskDistance], eta_avg: f64) -> Result<IndicatorGrid> {
    let raw: Vec<f64> = per_disk.iter().map(|d| d.distance.value).collect();
    let flagged = per_disk.iter().any(|d| d.distance.flagged);
    IndicatorGrid::new(IndicatorKind::Rte, points.to_vec(), average_neighbors(points, &raw, eta_avg), flagged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(v: &[f64], band: (f64, f64)) -> SpectrumEstimate {
        SpectrumEstimate::new(v.to_vec(), band).unwrap()
    }

    fn curve(f: impl Fn(f64) -> f64, n: usize) -> EigenCurve {
        let s = (0..n).map(|i| {
            let k = 1.0 + i as f64 * 0.01;
            (k, f(k))
        });
        EigenCurve::new(Point::zeros(), s.collect()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let b = (0.0, 10.0);
        assert_eq!(spectrum_distance(&spec(&[1.0, 3.0], b), &spec(&[1.0, 3.0], b)).unwrap().value, 0.0);
        assert_eq!(spectrum_distance(&spec(&[1.0], b), &spec(&[4.0], b)).unwrap().value, 6.0);
        assert_eq!(spectrum_distance(&spec(&[1.0, 2.0], b), &spec(&[1.0], b)).unwrap().value, 1.0);
        let d = spectrum_distance(&spec(&[], b), &spec(&[4.0], b)).unwrap();
        assert!(d.flagged && d.value == 4.0);
        assert!(spectrum_distance(&spec(&[], b), &spec(&[], b)).is_err());
    }

    #[test]
    fn monotone_curve_has_no_peaks() {
        let c = curve(|k| k * k, 50);
        assert!(detect_peaks(&c, 0.5).unwrap().is_empty());
    }

    #[test]
    fn triangular_bump_apex() {
        // apex at k = 1.2 exactly on the grid, symmetric: parabola keeps it.
        let c = curve(|k| 1.0 + (0.1 - (k - 1.2).abs()).max(0.0) * 100.0, 41);
        let s = detect_peaks(&c, 0.5).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.values()[0].sqrt() - 1.2).abs() < 1e-12);
    }

    #[test]
    fn two_lorentzians() {
        let (c1, c2) = (1.173, 1.4612);
        let c = curve(|k| 1.0 / (1.0 + ((k - c1) / 0.02).powi(2)) + 0.6 / (1.0 + ((k - c2) / 0.03).powi(2)), 61);
        let s = detect_peaks(&c, 0.5).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.values()[0].sqrt() - c1).abs() < 0.005);
        assert!((s.values()[1].sqrt() - c2).abs() < 0.005);
    }

    #[test]
    fn short_curve_rejected() {
        assert!(detect_peaks(&curve(|k| k, 4), 0.5).is_err());
    }

    #[test]
    fn neighbor_average_is_order_free() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(0.1, 0.0), Point::new(0.0, 0.1), Point::new(0.3, 0.3)];
        let vals = vec![0.1, 0.7, 1e-17, 3.0];
        let a = average_neighbors(&pts, &vals, 0.1);
        let perm = [3, 1, 0, 2];
        let pp: Vec<Point> = perm.iter().map(|&i| pts[i]).collect();
        let pv: Vec<f64> = perm.iter().map(|&i| vals[i]).collect();
        let b = average_neighbors(&pp, &pv, 0.1);
        for (j, &i) in perm.iter().enumerate() {
            assert_eq!(a[i].to_bits(), b[j].to_bits());
        }
        assert_eq!(average_neighbors(&pts, &vals, 0.0), vals);
    }
}
