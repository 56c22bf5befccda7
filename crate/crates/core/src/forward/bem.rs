//! Spectral collocation for the hypersingular equation of a sound-hard crack network.
//!
//! On each arc `x(tau)`, `tau = cos(sigma)`, the jump `psi` is represented by
//! its values at `sigma_j = j pi / n`, `j = 1..n`, through the sine series
//! `phi(sigma) = psi(cos sigma) = sum_{m<n} b_m sin(m sigma)`, which vanishes
//! like the square root of the distance to either tip. The operator is used in
//! Maue's form
//!
//! `T psi = d/ds S(dpsi/ds) + k^2 nu . S(nu psi) = -d_nu u_i`,
//!
//! with logarithmic parts of the self blocks integrated by trigonometric
//! product quadrature and the tangential derivative taken spectrally. The
//! scattered field is the double layer of `psi`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::bessel::{bessel_jy01, EULER_GAMMA};
use crate::geometry::{Arc, CrackNetwork, DirectionGrid, Point};
use crate::linalg::{lu_solve, CMatrix};
use crate::{Error, Result, C64};

/// Discretization order control: `n = base_order + ceil(order_per_klength * k * L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub base_order: usize,
    pub order_per_klength: f64,
    /// Multiplies the final order; used for refinement studies.
    pub refinement: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { base_order: 12, order_per_klength: 1.5, refinement: 1.0 }
    }
}

impl SolverOptions {
    pub fn order(&self, arc: &Arc, k: f64) -> usize {
        let raw = self.base_order as f64 + (self.order_per_klength * k * arc.length()).ceil();
        ((raw * self.refinement).round() as usize).max(4)
    }

    pub fn refined(&self, factor: f64) -> Self {
        Self { refinement: self.refinement * factor, ..*self }
    }
}

/// Values of `[u]` at the interior cosine nodes of each arc.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpDensity {
    pub arcs: Vec<ArcDensity>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArcDensity {
    /// Parameters `tau_j = cos(j pi / n)`.
    pub tau: Vec<f64>,
    pub values: Vec<C64>,
    /// `|dx/dtau|`.
    pub speed: f64,
}

impl ArcDensity {
    /// `L^2(ds)` norm via the Fejér-type rule in `sigma`.
    pub fn l2_norm(&self) -> f64 {
        let n = self.tau.len() + 1;
        let h = PI / n as f64;
        self.values
            .iter()
            .zip(&self.tau)
            .map(|(v, t)| v.norm_sqr() * (1.0 - t * t).max(0.0).sqrt() * self.speed * h)
            .sum::<f64>()
            .sqrt()
    }
}

impl JumpDensity {
    pub fn l2_norm(&self) -> f64 {
        self.arcs.iter().map(|a| a.l2_norm().powi(2)).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone)]
struct Panel {
    n: usize,
    speed: f64,
    /// Orientation sign: normals are this times the parametric tangent rotated clockwise.
    sign: f64,
    /// Points, unit normals and unit tangents at `sigma_l`, `l = 0..=n`.
    pts: Vec<Point>,
    normals: Vec<Point>,
    tangents: Vec<Point>,
    /// `dphi/dsigma` at `sigma_l`, `l = 0..=n`, from the interior values.
    dmap: DMatrix<f64>,
}

impl Panel {
    fn new(arc: &Arc, n: usize) -> Self {
        let taus: Vec<f64> = (0..=n).map(|l| (l as f64 * PI / n as f64).cos()).collect();
        let mut dmap = DMatrix::zeros(n + 1, n - 1);
        for l in 0..=n {
            let sl = l as f64 * PI / n as f64;
            for j in 1..n {
                let sj = j as f64 * PI / n as f64;
                let mut acc = 0.0;
                for m in 1..n {
                    let mf = m as f64;
                    acc += mf * (mf * sj).sin() * (mf * sl).cos();
                }
                dmap[(l, j - 1)] = acc * 2.0 / n as f64;
            }
        }
        Self {
            n,
            speed: arc.speed(),
            sign: arc.orientation().sign(),
            pts: taus.iter().map(|&t| arc.point(t)).collect(),
            normals: taus.iter().map(|&t| arc.normal(t)).collect(),
            tangents: taus.iter().map(|&t| arc.tangent(t)).collect(),
            dmap,
        }
    }

    fn unknowns(&self) -> usize {
        self.n - 1
    }

    fn sin_sigma(&self, j: usize) -> f64 {
        (j as f64 * PI / self.n as f64).sin()
    }
}

#[cfg(test)]
fn phi(k: f64, r: f64) -> C64 {
    let (j0, _, y0, _) = bessel_jy01(k * r);
    C64::new(-0.25 * y0, 0.25 * j0)
}

/// `Phi(r)` and `dPhi/dr`.
fn phi_and_derivative(k: f64, r: f64) -> (C64, C64) {
    let (j0, j1, y0, y1) = bessel_jy01(k * r);
    (C64::new(-0.25 * y0, 0.25 * j0), C64::new(0.25 * k * y1, -0.25 * k * j1))
}

/// Kress weights `R_d` for node offsets `d = i - l` (mod 2n).
fn kress_weights(n: usize) -> Vec<f64> {
    (0..2 * n)
        .map(|d| {
            let t = d as f64 * PI / n as f64;
            let s: f64 = (1..n).map(|m| (m as f64 * t).cos() / m as f64).sum();
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            -2.0 * PI / n as f64 * s - PI / (n * n) as f64 * sign
        })
        .collect()
}

/// Self-interaction block of one arc, `(n-1) x (n-1)`.
fn self_block(p: &Panel, k: f64) -> CMatrix {
    let n = p.n;
    let h = PI / n as f64;
    let rw = kress_weights(n);
    let limit = C64::new(-EULER_GAMMA / (2.0 * PI) - (0.5 * k).ln() / (2.0 * PI), 0.25)
        + (2f64.ln() - p.speed.ln()) / (2.0 * PI);
    let cosv: Vec<f64> = (0..=n).map(|l| (l as f64 * h).cos()).collect();

    // Q(i, l) = R_{i-l} A + h B for i, l in 0..=n with the folded source node.
    let fold = |l: usize| if l > n { 2 * n - l } else { l };
    let mut a_fac = vec![vec![0.0; n + 1]; n + 1];
    let mut b_fac = vec![vec![C64::new(0.0, 0.0); n + 1]; n + 1];
    for i in 0..=n {
        for l in 0..=n {
            if i == l {
                a_fac[i][l] = -1.0 / (2.0 * PI);
                b_fac[i][l] = limit;
                continue;
            }
            let r = (p.pts[i] - p.pts[l]).norm();
            let (j0, _, y0, _) = bessel_jy01(k * r);
            let ph = C64::new(-0.25 * y0, 0.25 * j0);
            let a = -j0 / (2.0 * PI);
            a_fac[i][l] = a;
            b_fac[i][l] = ph - a * ((cosv[i] - cosv[l]).abs().ln() + 2f64.ln());
        }
    }
    let q = |i: usize, l: usize| -> C64 {
        let d = (i + 2 * n - l) % (2 * n);
        let lf = fold(l);
        b_fac[i][lf] * h + a_fac[i][lf] * rw[d]
    };

    // V(s_i) = -1/2 sum_l Q(i, l) phi'(sigma_l), i = 0..=n.
    let mut vmap = CMatrix::zeros(n + 1, n - 1);
    for i in 0..=n {
        for l in 0..2 * n {
            let w = q(i, l) * -0.5;
            let row = fold(l);
            for j in 0..n - 1 {
                vmap[(i, j)] += w * p.dmap[(row, j)];
            }
        }
    }

    // d/ds on the cosine interpolant of V, evaluated at interior nodes.
    let mut ediff = DMatrix::<f64>::zeros(n - 1, n + 1);
    for i in 1..n {
        let si = i as f64 * h;
        for ip in 0..=n {
            let sp = ip as f64 * h;
            let w = if ip == 0 || ip == n { 0.5 } else { 1.0 };
            let acc: f64 = (1..n).map(|m| m as f64 * (m as f64 * sp).cos() * (m as f64 * si).sin()).sum();
            ediff[(i - 1, ip)] = acc * w * 2.0 / n as f64 / (si.sin() * p.speed);
        }
    }
    let ediff_c = ediff.map(|v| C64::new(v, 0.0));
    let mut block = &ediff_c * &vmap;

    // k^2 nu.nu S term with phi sin(sigma) folded onto the interior nodes.
    let k2 = k * k;
    for i in 1..n {
        for j in 1..n {
            let nn = p.normals[i].dot(&p.normals[j]);
            let w = (q(i, j) + q(i, 2 * n - j)) * (0.5 * k2 * p.speed * p.sin_sigma(j) * nn);
            block[(i - 1, j - 1)] += w;
        }
    }
    block
}

/// Coupling block: collocation on `a`, density on `b`.
fn cross_block(a: &Panel, b: &Panel, k: f64) -> CMatrix {
    let nb = b.n;
    let hb = PI / nb as f64;
    let mut block = CMatrix::zeros(a.unknowns(), b.unknowns());
    let k2 = k * k;
    // Tangents and derivatives follow the parametrization; the normal term
    // carries both orientation signs, so the derivative term must as well.
    let orient = a.sign * b.sign;
    for i in 1..a.n {
        let x = a.pts[i];
        for l in 0..=nb {
            let d = x - b.pts[l];
            let r = d.norm();
            let (ph, dph) = phi_and_derivative(k, r);
            // tangential derivative of Phi with respect to x
            let dt = dph * (a.tangents[i].dot(&d) / r);
            let mult = if l == 0 || l == nb { 1.0 } else { 2.0 };
            let w1 = dt * (-0.5 * hb * mult * orient);
            for j in 0..b.unknowns() {
                block[(i - 1, j)] += w1 * b.dmap[(l, j)];
            }
            if l > 0 && l < nb {
                let nn = a.normals[i].dot(&b.normals[l]);
                block[(i - 1, l - 1)] += ph * (k2 * hb * b.speed * b.sin_sigma(l) * nn);
            }
        }
    }
    block
}

/// Assembled and factored system for one network and wavenumber.
#[derive(Debug, Clone)]
pub struct CrackSystem {
    k: f64,
    panels: Vec<Panel>,
    offsets: Vec<usize>,
    matrix: CMatrix,
    pub condition: f64,
}

impl CrackSystem {
    pub fn assemble(network: &CrackNetwork, k: f64, opts: &SolverOptions) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Config(format!("wavenumber must be positive, got {k}")));
        }
        if network.is_empty() {
            return Err(Error::Config("crack network is empty".into()));
        }
        let panels: Vec<Panel> = network.arcs().iter().map(|a| Panel::new(a, opts.order(a, k))).collect();
        let mut offsets = vec![0];
        for p in &panels {
            offsets.push(offsets.last().unwrap() + p.unknowns());
        }
        let total = *offsets.last().unwrap();
        let mut matrix = CMatrix::zeros(total, total);
        for (ia, pa) in panels.iter().enumerate() {
            for (ib, pb) in panels.iter().enumerate() {
                let blk = if ia == ib { self_block(pa, k) } else { cross_block(pa, pb, k) };
                matrix.view_mut((offsets[ia], offsets[ib]), (pa.unknowns(), pb.unknowns())).copy_from(&blk);
            }
        }
        Ok(Self { k, panels, offsets, matrix, condition: f64::NAN })
    }

    pub fn unknowns(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// `-d_nu u_i` at the collocation nodes for plane waves `exp(i k d . x)`.
    fn plane_wave_rhs(&self, dirs: &[Point]) -> CMatrix {
        let mut rhs = CMatrix::zeros(self.unknowns(), dirs.len());
        for (pi, p) in self.panels.iter().enumerate() {
            for i in 1..p.n {
                let x = p.pts[i];
                for (c, d) in dirs.iter().enumerate() {
                    let e = C64::new(0.0, self.k * d.dot(&x)).exp();
                    rhs[(self.offsets[pi] + i - 1, c)] = -C64::new(0.0, self.k * d.dot(&p.normals[i])) * e;
                }
            }
        }
        rhs
    }

    /// Far-field evaluation matrix: rows are observation directions.
    fn far_field_operator(&self, dirs: &[Point]) -> CMatrix {
        let mut m = CMatrix::zeros(dirs.len(), self.unknowns());
        for (pi, p) in self.panels.iter().enumerate() {
            let h = PI / p.n as f64;
            for j in 1..p.n {
                let y = p.pts[j];
                let w = h * p.speed * p.sin_sigma(j);
                for (r, d) in dirs.iter().enumerate() {
                    let e = C64::new(0.0, -self.k * d.dot(&y)).exp();
                    m[(r, self.offsets[pi] + j - 1)] = C64::new(0.0, -self.k * d.dot(&p.normals[j])) * e * w;
                }
            }
        }
        m
    }

    /// Solves for all columns of `rhs`; checks the relative residual.
    fn solve(&mut self, rhs: &CMatrix) -> Result<CMatrix> {
        let (x, cond) = lu_solve(&self.matrix, rhs)?;
        self.condition = cond;
        log::debug!("crack system: {} unknowns, condition {:.3e}", self.unknowns(), cond);
        let res = (&self.matrix * &x - rhs).norm();
        let scale = rhs.norm().max(f64::MIN_POSITIVE);
        if res > 1e-10 * scale {
            return Err(Error::Numerical(format!(
                "crack solve residual {:.3e} exceeds tolerance (condition {:.3e})",
                res / scale,
                cond
            )));
        }
        Ok(x)
    }

    fn density_from(&self, col: &[C64]) -> JumpDensity {
        JumpDensity {
            arcs: self
                .panels
                .iter()
                .enumerate()
                .map(|(pi, p)| ArcDensity {
                    tau: (1..p.n).map(|j| (j as f64 * PI / p.n as f64).cos()).collect(),
                    values: col[self.offsets[pi]..self.offsets[pi + 1]].to_vec(),
                    speed: p.speed,
                })
                .collect(),
        }
    }

    pub fn solve_plane_wave(&mut self, incident: Point) -> Result<JumpDensity> {
        let rhs = self.plane_wave_rhs(&[incident]);
        let x = self.solve(&rhs)?;
        Ok(self.density_from(x.column(0).as_slice()))
    }

    /// `u_inf(theta_q, theta_p)` for all grid pairs.
    pub fn far_field(&mut self, grid: &DirectionGrid) -> Result<CMatrix> {
        let dirs = grid.directions();
        let rhs = self.plane_wave_rhs(&dirs);
        let x = self.solve(&rhs)?;
        Ok(self.far_field_operator(&dirs) * x)
    }

    /// Far field of a given density in direction `theta`.
    pub fn far_field_of(&self, density: &JumpDensity, theta: Point) -> C64 {
        let col: Vec<C64> = density.arcs.iter().flat_map(|a| a.values.iter().cloned()).collect();
        let m = self.far_field_operator(&[theta]);
        (0..col.len()).map(|j| m[(0, j)] * col[j]).sum()
    }
}
