//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper limit on the number of subintervals.
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_intervals: 2000,
        }
    }
}

impl QuadConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadConfig {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Piece {
        a,
        b,
        value: kron * h,
        error: ((kron - gauss) * h).abs(),
    }
}

/// Integrate `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    let mut heap = BinaryHeap::new();
    let first = gk15(&f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    loop {
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Quadrature { a, b, err: error });
        }
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
            return Ok(QuadResult {
                value,
                error,
                intervals: heap.len(),
            });
        }
        if heap.len() >= cfg.max_intervals {
            return Err(Error::Quadrature { a, b, err: error });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

/// Integrate `f` over `[a, inf)` through `x = a + u / (1 - u)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    let g = |u: f64| {
        let w = 1.0 - u;
        if w <= 0.0 {
            return 0.0;
        }
        let x = a + u / w;
        if !x.is_finite() {
            return 0.0;
        }
        let y = f(x);
        if y == 0.0 {
            0.0
        } else {
            y / (w * w)
        }
    };
    integrate(g, 0.0, 1.0, cfg)
}

/// Integrate over a sequence of breakpoints, summing the pieces.
pub fn integrate_pieces<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    let mut total = QuadResult {
        value: 0.0,
        error: 0.0,
        intervals: 0,
    };
    for w in breaks.windows(2) {
        let r = integrate(&f, w[0], w[1], cfg)?;
        total.value += r.value;
        total.error += r.error;
        total.intervals += r.intervals;
    }
    Ok(total)
}
