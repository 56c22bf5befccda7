//! Integer-order Bessel functions of real argument.
//!
//! `J_n` comes from Miller's backward recurrence normalized with
//! `J_0 + 2 sum J_2k = 1`; `Y_0`, `Y_1` from the Neumann series built on the
//! same sequence, and higher `Y_n` from the (stable) forward recurrence.
//! Above [`ASYMPTOTIC_THRESHOLD`] the orders 0 and 1 switch to Hankel's
//! asymptotic expansion.

use num_complex::Complex64;
use std::f64::consts::{FRAC_2_PI, PI};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Arguments at or above this use the Hankel expansion for orders 0 and 1.
pub const ASYMPTOTIC_THRESHOLD: f64 = 25.0;

const RESCALE_LIMIT: f64 = 1e250;

/// `J_0(x), ..., J_nmax(x)` for `x >= 0`.
pub fn bessel_j_seq(nmax: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "bessel_j_seq: invalid argument {x}");
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let top = (nmax as f64).max(x);
    let mut start = (top + 30.0 + 8.0 * x.cbrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut next = 0.0_f64; // J_{m+1}
    let mut cur = 1e-300_f64; // J_m
    let mut norm = 0.0_f64;
    for m in (1..=start).rev() {
        // J_{m-1} = (2m/x) J_m - J_{m+1}
        let prev = (2.0 * m as f64 / x) * cur - next;
        next = cur;
        cur = prev;
        let idx = m - 1;
        if idx <= nmax {
            out[idx] = cur;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > RESCALE_LIMIT {
            cur /= RESCALE_LIMIT;
            next /= RESCALE_LIMIT;
            norm /= RESCALE_LIMIT;
            for v in out.iter_mut() {
                *v /= RESCALE_LIMIT;
            }
        }
    }
    norm += cur; // J_0
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Coefficients of Hankel's expansion, returning `(P, Q)` for order `nu`.
fn hankel_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        term *= (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        let mag = term.abs();
        if mag > last {
            break;
        }
        last = mag;
        // a_k / x^k alternates between Q (odd k) and P (even k) with sign (-1)^floor(k/2)
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += sign * term;
        } else {
            p += sign * term;
        }
        if mag < 1e-17 {
            break;
        }
    }
    (p, q)
}

fn asymptotic_jy(nu: f64, x: f64) -> (f64, f64) {
    let (p, q) = hankel_pq(nu, x);
    let chi = x - (0.5 * nu + 0.25) * PI;
    let amp = (FRAC_2_PI / x).sqrt();
    let (s, c) = chi.sin_cos();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}

/// `(J_0, J_1, Y_0, Y_1)` at `x > 0`.
pub fn bessel_jy01(x: f64) -> (f64, f64, f64, f64) {
    assert!(x > 0.0 && x.is_finite(), "bessel_jy01: invalid argument {x}");
    if x >= ASYMPTOTIC_THRESHOLD {
        let (j0, y0) = asymptotic_jy(0.0, x);
        let (j1, y1) = asymptotic_jy(1.0, x);
        return (j0, j1, y0, y1);
    }
    let nmax = ((x + 30.0 + 8.0 * x.cbrt()) as usize) | 1;
    let j = bessel_j_seq(nmax + 1, x);
    let (y0, y1) = neumann_y01(&j, x);
    (j[0], j[1], y0, y1)
}

fn neumann_y01(j: &[f64], x: f64) -> (f64, f64) {
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        s0 += sign * j[2 * k] / kf;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / kf;
        k += 1;
    }
    let y0 = FRAC_2_PI * lg * j[0] - 2.0 * FRAC_2_PI * s0;
    let y1 = -FRAC_2_PI * j[0] / x + FRAC_2_PI * lg * j[1] + FRAC_2_PI * s1;
    (y0, y1)
}

/// `J_n` and `Y_n` for `n = 0..=nmax` at `x > 0`.
pub fn bessel_jy_seq(nmax: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(x > 0.0 && x.is_finite(), "bessel_jy_seq: invalid argument {x}");
    let extra = ((x + 30.0 + 8.0 * x.cbrt()) as usize).max(nmax) + 2;
    let jfull = bessel_j_seq(extra, x);
    let (y0, y1) = if x >= ASYMPTOTIC_THRESHOLD {
        let (_, y0) = asymptotic_jy(0.0, x);
        let (_, y1) = asymptotic_jy(1.0, x);
        (y0, y1)
    } else {
        neumann_y01(&jfull, x)
    };
    let mut y = Vec::with_capacity(nmax + 1);
    y.push(y0);
    if nmax >= 1 {
        y.push(y1);
    }
    for n in 1..nmax {
        let next = (2.0 * n as f64 / x) * y[n] - y[n - 1];
        y.push(next);
    }
    (jfull[..=nmax].to_vec(), y)
}

/// `J_n(x)` for any integer order, via `J_{-n} = (-1)^n J_n`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let m = n.unsigned_abs() as usize;
    let v = bessel_j_seq(m, x)[m];
    if n < 0 && m % 2 == 1 {
        -v
    } else {
        v
    }
}

/// `H^(1)_0(x)` and `H^(1)_1(x)`.
pub fn hankel01(x: f64) -> (Complex64, Complex64) {
    let (j0, j1, y0, y1) = bessel_jy01(x);
    (Complex64::new(j0, y0), Complex64::new(j1, y1))
}

/// Per-order values needed by the disk series: `J_m`, `J'_m`, `H_m`, `H'_m`
/// for `m = 0..=mmax` (first-kind Hankel).
#[derive(Debug, Clone)]
pub struct CylinderFunctions {
    pub j: Vec<f64>,
    pub jp: Vec<f64>,
    pub h: Vec<Complex64>,
    pub hp: Vec<Complex64>,
}

impl CylinderFunctions {
    pub fn new(mmax: usize, x: f64) -> Self {
        let (j, y) = bessel_jy_seq(mmax + 1, x);
        let mut jp = Vec::with_capacity(mmax + 1);
        let mut hp = Vec::with_capacity(mmax + 1);
        let h: Vec<Complex64> = (0..=mmax).map(|m| Complex64::new(j[m], y[m])).collect();
        for m in 0..=mmax {
            // C'_m = C_{m-1} - (m/x) C_m, with C_{-1} = -C_1
            let (jm1, ym1) = if m == 0 { (-j[1], -y[1]) } else { (j[m - 1], y[m - 1]) };
            let r = m as f64 / x;
            jp.push(jm1 - r * j[m]);
            hp.push(Complex64::new(jm1 - r * j[m], ym1 - r * y[m]));
        }
        Self { j: j[..=mmax].to_vec(), jp, h, hp }
    }

    /// `J_m` for signed `m`.
    pub fn j_signed(&self, m: i64) -> f64 {
        let v = self.j[m.unsigned_abs() as usize];
        if m < 0 && m % 2 != 0 {
            -v
        } else {
            v
        }
    }

    /// `H_m` for signed `m`.
    pub fn h_signed(&self, m: i64) -> Complex64 {
        let v = self.h[m.unsigned_abs() as usize];
        if m < 0 && m % 2 != 0 {
            -v
        } else {
            v
        }
    }

    pub fn jp_signed(&self, m: i64) -> f64 {
        let v = self.jp[m.unsigned_abs() as usize];
        if m < 0 && m % 2 != 0 {
            -v
        } else {
            v
        }
    }

    pub fn hp_signed(&self, m: i64) -> Complex64 {
        let v = self.hp[m.unsigned_abs() as usize];
        if m < 0 && m % 2 != 0 {
            -v
        } else {
            v
        }
    }
}
