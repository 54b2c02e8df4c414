//! Order-2 real spherical harmonics and the clamped-cosine irradiance
//! convolution.
//!
//! Irradiance is normalized by 1/π, so a constant radiance map `c` yields
//! `E(n) = c` for every normal.

use std::f64::consts::PI;

use super::{Direction, EnvironmentMap};

/// Nine SH coefficients per RGB channel, ordered
/// `(0,0) (1,-1) (1,0) (1,1) (2,-2) (2,-1) (2,0) (2,1) (2,2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sh9 {
    pub coeffs: [[f64; 3]; 9],
}

/// Clamped-cosine convolution weights per band, divided by π.
const BAND_WEIGHTS: [f64; 9] = [
    1.0,
    2.0 / 3.0,
    2.0 / 3.0,
    2.0 / 3.0,
    0.25,
    0.25,
    0.25,
    0.25,
    0.25,
];

/// Real SH basis values at `d`.
pub fn sh9_basis(d: Direction) -> [f64; 9] {
    let (x, y, z) = (d.x(), d.y(), d.z());
    [
        0.282_094_791_773_878_14,
        0.488_602_511_902_919_9 * y,
        0.488_602_511_902_919_9 * z,
        0.488_602_511_902_919_9 * x,
        1.092_548_430_592_079_2 * x * y,
        1.092_548_430_592_079_2 * y * z,
        0.315_391_565_252_520_05 * (3.0 * z * z - 1.0),
        1.092_548_430_592_079_2 * x * z,
        0.546_274_215_296_039_6 * (x * x - y * y),
    ]
}

/// `Σ_texels L_texel · ∫_texel Y(ω) dω`.
///
/// The basis is integrated analytically over each texel's (θ, φ) cell, so the
/// projection of a piecewise-constant map is exact up to rounding.
pub fn project_sh9(env: &EnvironmentMap) -> Sh9 {
    let (w, h) = (env.width(), env.height());
    let cols: Vec<ColumnIntegrals> = (0..w).map(|x| ColumnIntegrals::new(w, x)).collect();
    let mut coeffs = [[0.0f64; 3]; 9];
    for y in 0..h {
        let row = RowIntegrals::new(h, y);
        for (x, col) in cols.iter().enumerate() {
            let weights = texel_basis_integrals(&row, col);
            let l = env.texel(x, y);
            for (c, wk) in coeffs.iter_mut().zip(weights) {
                for k in 0..3 {
                    c[k] += l[k] * wk;
                }
            }
        }
    }
    Sh9 { coeffs }
}

/// Integrals over `t = cos θ ∈ [t_lo, t_hi]` of the polynomial factors.
struct RowIntegrals {
    one: f64,
    t: f64,
    t2: f64,
    s: f64,
    ts: f64,
}

impl RowIntegrals {
    fn new(h: usize, y: usize) -> Self {
        let t_hi = (y as f64 * PI / h as f64).cos();
        let t_lo = ((y + 1) as f64 * PI / h as f64).cos();
        let sq = |t: f64| (1.0 - t * t).max(0.0).sqrt();
        let anti_s = |t: f64| 0.5 * (t * sq(t) + t.clamp(-1.0, 1.0).asin());
        let anti_ts = |t: f64| -(1.0 - t * t).max(0.0).powf(1.5) / 3.0;
        Self {
            one: t_hi - t_lo,
            t: (t_hi * t_hi - t_lo * t_lo) / 2.0,
            t2: (t_hi.powi(3) - t_lo.powi(3)) / 3.0,
            s: anti_s(t_hi) - anti_s(t_lo),
            ts: anti_ts(t_hi) - anti_ts(t_lo),
        }
    }
}

/// Integrals over `φ ∈ [φ₀, φ₁]` of the trigonometric factors.
struct ColumnIntegrals {
    one: f64,
    c: f64,
    s: f64,
    cc: f64,
    ss: f64,
    sc: f64,
}

impl ColumnIntegrals {
    fn new(w: usize, x: usize) -> Self {
        let step = std::f64::consts::TAU / w as f64;
        let (p0, p1) = (x as f64 * step, (x + 1) as f64 * step);
        let half_sin2 = (2.0 * p1).sin() - (2.0 * p0).sin();
        Self {
            one: step,
            c: p1.sin() - p0.sin(),
            s: p0.cos() - p1.cos(),
            cc: step / 2.0 + half_sin2 / 4.0,
            ss: step / 2.0 - half_sin2 / 4.0,
            sc: (p1.sin().powi(2) - p0.sin().powi(2)) / 2.0,
        }
    }
}

/// `∫_texel Y_k dω` with `x = sinθ cosφ`, `y = cosθ`, `z = sinθ sinφ`.
fn texel_basis_integrals(r: &RowIntegrals, c: &ColumnIntegrals) -> [f64; 9] {
    const C0: f64 = 0.282_094_791_773_878_14;
    const C1: f64 = 0.488_602_511_902_919_9;
    const C2: f64 = 1.092_548_430_592_079_2;
    const C6: f64 = 0.315_391_565_252_520_05;
    const C8: f64 = 0.546_274_215_296_039_6;
    let area = r.one * c.one;
    let sin2 = r.one - r.t2;
    [
        C0 * area,
        C1 * r.t * c.one,
        C1 * r.s * c.s,
        C1 * r.s * c.c,
        C2 * r.ts * c.c,
        C2 * r.ts * c.s,
        C6 * (3.0 * sin2 * c.ss - area),
        C2 * sin2 * c.sc,
        C8 * (sin2 * c.cc - r.t2 * c.one),
    ]
}

/// `E(n) = (1/π) ∫ L(ω) max(⟨ω, n⟩, 0) dω`, truncated to order 2.
pub fn eval_irradiance_sh(sh: &Sh9, normal: Direction) -> [f64; 3] {
    let y = sh9_basis(normal);
    let mut e = [0.0; 3];
    for i in 0..9 {
        let w = BAND_WEIGHTS[i] * y[i];
        for k in 0..3 {
            e[k] += w * sh.coeffs[i][k];
        }
    }
    e
}

impl Sh9 {
    pub fn zero() -> Self {
        Self {
            coeffs: [[0.0; 3]; 9],
        }
    }

    /// Reconstructed radiance `Σ c·Y(d)` (not convolved).
    pub fn eval_radiance(&self, d: Direction) -> [f64; 3] {
        let y = sh9_basis(d);
        let mut out = [0.0; 3];
        for i in 0..9 {
            for k in 0..3 {
                out[k] += self.coeffs[i][k] * y[i];
            }
        }
        out
    }
}

impl std::ops::Add for Sh9 {
    type Output = Sh9;
    fn add(mut self, rhs: Sh9) -> Sh9 {
        for i in 0..9 {
            for k in 0..3 {
                self.coeffs[i][k] += rhs.coeffs[i][k];
            }
        }
        self
    }
}
