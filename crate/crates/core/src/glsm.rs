//! `F#` operators, the penalization term and the regularized sampling minimization.
//!
//! Matrices here are operators, i.e. far-field samples multiplied by the grid
//! weight `W`. Inner products and norms of densities carry `W` as well, so
//! `||g||^2 = W sum |g_p|^2`. The normal equations do not depend on `W`.

use crate::diskbg::point_source_far_field;
use crate::forward::FarFieldMatrix;
use crate::geometry::{DirectionGrid, Point};
use crate::linalg::{hermitian_eigen, hermitian_part, solve_hermitian, CMatrix, CVector};
use crate::{Error, Result, C64};

/// Lower end of the Morozov bracket, relative to `||A||^2`.
pub const ALPHA_MIN: f64 = 1e-16;
/// Upper end of the Morozov bracket, relative to `||A||^2`.
pub const ALPHA_MAX: f64 = 1e4;
/// Noise floor used when `delta = 0`, relative to `||F^r||`.
pub const DELTA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SharpSource {
    Measured,
    Background,
}

/// `F# = |Re F| + Im F` as a Hermitian positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SharpOperator {
    matrix: CMatrix,
    weight: f64,
    norm: f64,
    pub source: SharpSource,
}

/// `|(F + F*)/2| + (F - F*)/(2i)`, symmetrized.
pub fn sharp_matrix(f: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(f);
    let abs = CMatrix::from_diagonal(&CVector::from_iterator(vals.len(), vals.iter().map(|v| C64::new(v.abs(), 0.0))));
    let re_abs = &vecs * abs * vecs.adjoint();
    let im = (f - f.adjoint()) * C64::new(0.0, -0.5);
    hermitian_part(&(re_abs + im))
}

impl SharpOperator {
    /// Wraps an operator-level Hermitian matrix.
    pub fn from_matrix(matrix: CMatrix, weight: f64, source: SharpSource) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimension(format!(
                "sharp operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let matrix = hermitian_part(&matrix);
        let (vals, _) = hermitian_eigen(&matrix);
        let norm = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self { matrix, weight, norm, source })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Spectral norm.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// `(F# g, g)` in the weighted inner product.
    pub fn quadratic_form(&self, g: &CVector) -> f64 {
        (g.dotc(&(&self.matrix * g)) * self.weight).re
    }

    /// `D F# D*` for a diagonal unitary `D`: the operator of a translated background.
    pub fn conjugated(&self, phases: &CVector) -> Self {
        let n = self.matrix.nrows();
        let matrix = CMatrix::from_fn(n, n, |q, p| phases[q] * self.matrix[(q, p)] * phases[p].conj());
        Self { matrix, ..self.clone() }
    }
}

/// `F#` of a far-field matrix, at operator level.
pub fn sharp_operator(f: &FarFieldMatrix, source: SharpSource) -> Result<SharpOperator> {
    SharpOperator::from_matrix(sharp_matrix(&f.operator()), f.grid().weight(), source)
}

/// `P(g) = (F# g, g) + (F^b# g, g) + delta ||g||^2`.
pub fn penalization(f_sharp: &SharpOperator, fb_sharp: &SharpOperator, g: &CVector, delta: f64) -> Result<f64> {
    let n = g.len();
    if f_sharp.matrix.nrows() != n || fb_sharp.matrix.nrows() != n {
        return Err(Error::Dimension(format!(
            "density of length {n} with operators of size {} and {}",
            f_sharp.matrix.nrows(),
            fb_sharp.matrix.nrows()
        )));
    }
    if !(delta >= 0.0) {
        return Err(Error::Config(format!("delta must be nonnegative, got {delta}")));
    }
    Ok(f_sharp.quadratic_form(g) + fb_sharp.quadratic_form(g) + delta * f_sharp.weight * g.norm_squared())
}

/// Morozov-fitted Tikhonov parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorozovAlpha {
    pub alpha: f64,
    /// No root inside the bracket; `alpha` is the nearest endpoint.
    pub at_bracket: bool,
}

/// Singular data of `A` reused across right-hand sides.
#[derive(Debug, Clone)]
struct Svd {
    u_adj: CMatrix,
    sigma: Vec<f64>,
    norm: f64,
}

impl Svd {
    fn new(a: &CMatrix) -> Self {
        let svd = a.clone().svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let sigma: Vec<f64> = svd.singular_values.iter().cloned().collect();
        let norm = sigma.iter().cloned().fold(0.0, f64::max);
        Self { u_adj: u.adjoint(), sigma, norm }
    }

    /// `||A g_a - rhs|| - delta ||g_a||` (unweighted) for the Tikhonov solution `g_a`.
    fn discrepancy(&self, beta: &[f64], perp2: f64, alpha: f64, delta: f64) -> f64 {
        let mut res2 = perp2;
        let mut g2 = 0.0;
        for (s, b2) in self.sigma.iter().zip(beta) {
            let d = s * s + alpha;
            res2 += (alpha / d).powi(2) * b2;
            g2 += s * s / (d * d) * b2;
        }
        res2.sqrt() - delta * g2.sqrt()
    }

    fn morozov(&self, rhs: &CVector, delta: f64) -> MorozovAlpha {
        let scale = if self.norm > 0.0 { self.norm * self.norm } else { 1.0 };
        let (lo, hi) = (ALPHA_MIN * scale, ALPHA_MAX * scale);
        let proj = &self.u_adj * rhs;
        let beta: Vec<f64> = proj.iter().map(|z| z.norm_sqr()).collect();
        let perp2 = (rhs.norm_squared() - beta.iter().sum::<f64>()).max(0.0);
        if rhs.norm() == 0.0 {
            return MorozovAlpha { alpha: hi, at_bracket: true };
        }
        let f = |a: f64| self.discrepancy(&beta, perp2, a, delta);
        if f(hi) <= 0.0 {
            return MorozovAlpha { alpha: hi, at_bracket: true };
        }
        if f(lo) >= 0.0 {
            return MorozovAlpha { alpha: lo, at_bracket: true };
        }
        let (mut a, mut b) = (lo.ln(), hi.ln());
        for _ in 0..200 {
            let c = 0.5 * (a + b);
            if f(c.exp()) > 0.0 {
                b = c;
            } else {
                a = c;
            }
            if b - a < 1e-13 {
                break;
            }
        }
        MorozovAlpha { alpha: (0.5 * (a + b)).exp(), at_bracket: false }
    }
}

/// Morozov parameter for `A g = rhs` with operator `A` and noise level `delta > 0`:
/// `||A g_a - rhs|| = delta ||g_a||` for `g_a = (A*A + a I)^{-1} A* rhs`.
pub fn morozov_alpha(a: &CMatrix, rhs: &CVector, delta: f64) -> Result<MorozovAlpha> {
    if !(delta > 0.0) {
        return Err(Error::Config(format!("Morozov principle needs delta > 0, got {delta}")));
    }
    if a.nrows() != rhs.len() {
        return Err(Error::Dimension(format!(
            "operator with {} rows, right-hand side of length {}",
            a.nrows(),
            rhs.len()
        )));
    }
    Ok(Svd::new(a).morozov(rhs, delta))
}

/// Minimizer of the regularized functional and its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct GlsmResult {
    pub g: CVector,
    /// `P(g)` including `delta ||g||^2`.
    pub penalization_value: f64,
    /// `||A g - Phi_z||`.
    pub residual: f64,
    /// `alpha_n` in the functional.
    pub alpha_used: f64,
    /// Morozov parameter before the `F#` normalization.
    pub alpha_lsm: f64,
    pub z: Option<Point>,
    /// Morozov fell back to a bracket endpoint or the solve fell back to least squares.
    pub flagged: bool,
}

impl GlsmResult {
    /// `alpha_n P(g) + ||A g - Phi_z||^2`.
    pub fn objective(&self) -> f64 {
        self.alpha_used * self.penalization_value + self.residual * self.residual
    }
}

/// Minimizes `alpha (B g, g) + alpha delta ||g||^2 + ||A g - rhs||^2` through
/// `(A*A + alpha (B + delta I)) g = A* rhs`. `b` is the sum of the `F#` operators.
pub fn minimize_with_alpha(a: &CMatrix, b: &CMatrix, rhs: &CVector, alpha: f64, delta: f64, weight: f64) -> GlsmResult {
    let n = a.ncols();
    let ata = a.adjoint() * a;
    let normal = &ata + (b + CMatrix::identity(n, n) * C64::new(delta, 0.0)) * C64::new(alpha, 0.0);
    finish(a, b, &normal, rhs, alpha, delta, weight)
}

fn finish(
    a: &CMatrix,
    b: &CMatrix,
    normal: &CMatrix,
    rhs: &CVector,
    alpha: f64,
    delta: f64,
    weight: f64,
) -> GlsmResult {
    let sol = solve_hermitian(normal, &(a.adjoint() * rhs));
    let g = sol.x;
    let pen = ((g.dotc(&(b * &g))).re + delta * g.norm_squared()) * weight;
    let residual = ((a * &g - rhs).norm_squared() * weight).sqrt();
    GlsmResult {
        g,
        penalization_value: pen,
        residual,
        alpha_used: alpha,
        alpha_lsm: f64::NAN,
        z: None,
        flagged: sol.fallback,
    }
}

/// Everything that depends on `(t, k)` only; solves for many sampling points.
#[derive(Debug, Clone)]
pub struct GlsmProblem {
    k: f64,
    grid: DirectionGrid,
    a: CMatrix,
    ata: CMatrix,
    b: CMatrix,
    svd: Svd,
    delta: f64,
    denominator: f64,
}

impl GlsmProblem {
    pub fn new(f_rel: &FarFieldMatrix, f_sharp: &SharpOperator, fb_sharp: &SharpOperator, delta: f64) -> Result<Self> {
        let n = f_rel.grid().len();
        if f_sharp.matrix.nrows() != n || fb_sharp.matrix.nrows() != n {
            return Err(Error::Dimension("F# operators do not match the relative operator".into()));
        }
        if !(delta >= 0.0) {
            return Err(Error::Config(format!("delta must be nonnegative, got {delta}")));
        }
        let a = f_rel.operator();
        let svd = Svd::new(&a);
        let delta = if delta == 0.0 { (DELTA_FLOOR * svd.norm).max(f64::MIN_POSITIVE) } else { delta };
        let denominator = f_sharp.norm + fb_sharp.norm + delta;
        Ok(Self {
            k: f_rel.k(),
            grid: f_rel.grid(),
            ata: a.adjoint() * &a,
            a,
            b: &f_sharp.matrix + &fb_sharp.matrix,
            svd,
            delta,
            denominator,
        })
    }

    /// Effective noise level (the floor when the input was zero).
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn solve_rhs(&self, rhs: &CVector) -> GlsmResult {
        let m = self.svd.morozov(rhs, self.delta);
        let alpha = m.alpha / self.denominator;
        let n = self.grid.len();
        let normal = &self.ata + (&self.b + CMatrix::identity(n, n) * C64::new(self.delta, 0.0)) * C64::new(alpha, 0.0);
        let mut r = finish(&self.a, &self.b, &normal, rhs, alpha, self.delta, self.grid.weight());
        r.alpha_lsm = m.alpha;
        r.flagged |= m.at_bracket;
        r
    }

    pub fn solve_point(&self, z: Point) -> GlsmResult {
        let mut r = self.solve_rhs(&point_source_far_field(z, self.k, &self.grid));
        r.z = Some(z);
        r
    }
}

/// Exact minimizer of `alpha_n P^delta(g) + ||F^r g - Phi^inf_z||^2` with
/// `alpha_n = alpha_LSM / (||F#|| + ||F^b#|| + delta)`.
pub fn glsm_minimize(
    f_rel: &FarFieldMatrix,
    f_sharp: &SharpOperator,
    fb_sharp: &SharpOperator,
    z: Point,
    delta: f64,
) -> Result<GlsmResult> {
    Ok(GlsmProblem::new(f_rel, f_sharp, fb_sharp, delta)?.solve_point(z))
}
