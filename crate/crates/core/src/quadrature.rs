//! Adaptive Gauss-Kronrod (7/15) integration and Chebyshev tabulation of
//! smooth one-dimensional functions.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for the odd Kronrod nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 40;
const ROUNDING: f64 = 50.0 * f64::EPSILON;

/// One 15-point panel: `(kronrod estimate, |kronrod - gauss|)`.
pub fn gk15(f: &(impl Fn(f64) -> f64 + ?Sized), a: f64, b: f64) -> (f64, f64) {
    let p = panel(f, a, b);
    (p.value, p.err)
}

struct Panel {
    value: f64,
    err: f64,
    /// Kronrod estimate of `int |f|`; sets the rounding floor.
    abs: f64,
}

fn panel(f: &(impl Fn(f64) -> f64 + ?Sized), a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for i in 0..7 {
        let dx = half * XGK[i];
        let (lo, hi) = (f(center - dx), f(center + dx));
        kronrod += WGK[i] * (lo + hi);
        abs += WGK[i] * (lo.abs() + hi.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (lo + hi);
        }
    }
    Panel {
        value: kronrod * half,
        err: ((kronrod - gauss) * half).abs(),
        abs: abs * half.abs(),
    }
}

/// `(value, error estimate)` of `int_a^b f`, bisecting panels until each
/// meets its share of `tol`. Panels whose error estimate is at rounding level
/// relative to `int |f|` count as converged.
pub fn integrate(f: &(impl Fn(f64) -> f64 + ?Sized), a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let (value, err, floor) = refine(f, a, b, tol, 0);
    if err > tol.max(floor) {
        return Err(Error::QuadratureNonconvergent { estimate: err, tol });
    }
    Ok((value, err))
}

/// `(value, error, rounding floor)` summed over accepted panels.
fn refine(f: &(impl Fn(f64) -> f64 + ?Sized), a: f64, b: f64, tol: f64, depth: u32) -> (f64, f64, f64) {
    let p = panel(f, a, b);
    let floor = ROUNDING * p.abs;
    if p.err <= tol.max(floor) || depth >= MAX_DEPTH {
        return (p.value, p.err, floor);
    }
    let mid = 0.5 * (a + b);
    let (l, le, lf) = refine(f, a, mid, 0.5 * tol, depth + 1);
    let (r, re, rf) = refine(f, mid, b, 0.5 * tol, depth + 1);
    (l + r, le + re, lf + rf)
}

/// Chebyshev interpolant on `[a, b]`.
#[derive(Debug, Clone)]
pub struct Chebyshev {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

const MAX_CHEB_POINTS: usize = 256;

impl Chebyshev {
    /// Doubles the number of nodes until the three trailing coefficients are
    /// below `tol` relative to the largest.
    pub fn fit(f: impl Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<Self> {
        let mut n = 16;
        loop {
            let theta: Vec<f64> = (0..n).map(|k| PI * (k as f64 + 0.5) / n as f64).collect();
            let values = theta
                .iter()
                .map(|&th| f(0.5 * (a + b) + 0.5 * (b - a) * th.cos()))
                .collect::<Result<Vec<f64>>>()?;
            let mut coeffs: Vec<f64> = (0..n)
                .map(|j| {
                    let sum: f64 = values
                        .iter()
                        .zip(&theta)
                        .map(|(v, th)| v * (j as f64 * th).cos())
                        .sum();
                    2.0 * sum / n as f64
                })
                .collect();
            coeffs[0] *= 0.5;
            let scale = coeffs.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
            let tail = coeffs[n - 3..].iter().fold(0.0_f64, |m, c| m.max(c.abs()));
            if tail <= tol.max(ROUNDING) * scale {
                return Ok(Chebyshev { a, b, coeffs });
            }
            if n >= MAX_CHEB_POINTS {
                return Err(Error::QuadratureNonconvergent { estimate: tail, tol });
            }
            n *= 2;
        }
    }

    /// Clenshaw evaluation; `x` is clamped to `[a, b]`.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(self.a.min(self.b), self.a.max(self.b));
        let y = if self.a == self.b {
            0.0
        } else {
            (2.0 * x - self.a - self.b) / (self.b - self.a)
        };
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs[1..].iter().rev() {
            let b0 = 2.0 * y * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        y * b1 - b2 + self.coeffs[0]
    }
}
