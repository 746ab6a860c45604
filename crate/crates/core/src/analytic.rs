//! Re-derivation of the constants in the lower bound for the Liouville sum:
//! two residues and five contour-segment integrals of
//!
//! ```text
//! F(s) = (2π)^{-s} Γ(s) / (s-1)² · ζ(4s-2) / ζ(2s-1)
//! ```
//!
//! around the rectangle with corners `1/2 ± 7i`, `1 ± 7i` and the lines
//! `Re s = 1`, `|t| >= 7`. Quadrature confidence, not proof grade.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_pieces, QuadConfig};
use crate::special::{gamma, ln_gamma_complex};

/// `|Γ(σ + it)|`.
pub fn complex_gamma_abs(sigma: f64, t: f64) -> Result<f64> {
    Ok(ln_gamma_complex(Complex64::new(sigma, t))?.re.exp())
}

/// `e^z - 1` without cancellation for small `z`.
fn expm1_complex(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * c - 2.0 * half * half, z.re.exp() * s)
}

/// `ln sin z` on some branch, stable for large `|Im z|`.
fn ln_sin(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return ln_sin(z.conj()).conj();
    }
    // sin z = e^{-iz} (e^{2iz} - 1) / (2i)
    let i = Complex64::i();
    -i * z + expm1_complex(2.0 * i * z).ln() - Complex64::new(LN_2, PI / 2.0)
}

/// Borwein's accelerated alternating series, valid for `σ >= 1/2`.
fn zeta_borwein(s: Complex64) -> Complex64 {
    let t = s.im.abs();
    // 1 - 2^{1-s}
    let denom = -expm1_complex((1.0 - s) * LN_2);
    let target = 0.5 * PI * t + (3.0 * (1.0 + 2.0 * t)).ln() + 40.0 - denom.norm().min(1.0).ln();
    let n = ((target / (3.0 + 8f64.sqrt()).ln()).ceil() as usize).max(8);

    // log of term_i = (n+i-1)! 4^i / ((n-i)! (2i)!), via term ratios
    let mut log_terms = Vec::with_capacity(n + 1);
    let mut lt = -(n as f64).ln();
    log_terms.push(lt);
    for i in 1..=n {
        let fi = i as f64;
        let nf = n as f64;
        lt += (4.0 * (nf + fi - 1.0) * (nf - fi + 1.0) / (2.0 * fi * (2.0 * fi - 1.0))).ln();
        log_terms.push(lt);
    }
    let max = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = log_terms.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = scaled.iter().sum();

    // weight_k = (d_n - d_k) / d_n = Σ_{i>k} term_i / Σ term_i
    let mut suffix = 0.0;
    let mut eta = Complex64::new(0.0, 0.0);
    for k in (0..n).rev() {
        suffix += scaled[k + 1];
        let w = suffix / total;
        let term = w * (-s * ((k + 1) as f64).ln()).exp();
        if k % 2 == 0 {
            eta += term;
        } else {
            eta -= term;
        }
    }
    eta / denom
}

/// `ζ(s)` for any `s != 1`, via the functional equation left of `σ = 1/2`.
pub(crate) fn zeta_continued(s: Complex64) -> Result<Complex64> {
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole("ζ"));
    }
    if s.re >= 0.5 {
        return Ok(zeta_borwein(s));
    }
    if s == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(-0.5, 0.0));
    }
    if s.im == 0.0 && s.re < 0.0 && s.re % 2.0 == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let one_minus = 1.0 - s;
    let log_factor =
        s * LN_2 + (s - 1.0) * PI.ln() + ln_sin(0.5 * PI * s) + ln_gamma_complex(one_minus)?;
    Ok(log_factor.exp() * zeta_borwein(one_minus))
}

/// `ζ(σ + it)` for `σ > 0`.
pub fn zeta_complex(sigma: f64, t: f64) -> Result<Complex64> {
    if sigma.is_nan() || sigma <= 0.0 || !sigma.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!("ζ needs σ > 0, got σ = {sigma}")));
    }
    zeta_continued(Complex64::new(sigma, t))
}

/// `(π/6, 2^{5/4} Γ(3/4) / (π^{3/4} ζ(1/2)))`.
pub fn residue_constants() -> Result<(f64, f64)> {
    let zeta_half = zeta_complex(0.5, 0.0)?.re;
    let res34 = 2f64.powf(1.25) * gamma(0.75)? / (PI.powf(0.75) * zeta_half);
    Ok((PI / 6.0, res34))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Segment {
    C1,
    C2,
    C3,
    C4,
    C5,
}

impl Segment {
    pub const ALL: [Segment; 5] = [
        Segment::C1,
        Segment::C2,
        Segment::C3,
        Segment::C4,
        Segment::C5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Segment::C1 => "C1",
            Segment::C2 => "C2",
            Segment::C3 => "C3",
            Segment::C4 => "C4",
            Segment::C5 => "C5",
        }
    }

    pub fn claimed_coefficient(self) -> f64 {
        match self {
            Segment::C1 | Segment::C5 => 5e-7,
            Segment::C2 | Segment::C4 => 2e-6,
            Segment::C3 => 2.48218,
        }
    }

    pub fn scaling(self) -> Scaling {
        match self {
            Segment::C3 => Scaling::SqrtX,
            _ => Scaling::LinearX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    LinearX,
    SqrtX,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSegmentBound {
    pub segment: Segment,
    /// `∫ |F(s)| |ds|` over the segment.
    pub computed_bound: f64,
    pub claimed_coefficient: f64,
    pub scaling: Scaling,
    pub quad_error: f64,
    /// Envelope for the part of `C1`/`C5` beyond `|t| = 200`.
    pub tail_envelope: f64,
}

impl ContourSegmentBound {
    /// Within one percent of the claimed coefficient.
    pub fn within_slack(&self) -> bool {
        self.computed_bound + self.tail_envelope <= self.claimed_coefficient * 1.01
    }
}

/// Height of the rectangle; below the first zeta zero at `14.13/2`.
pub const CONTOUR_HEIGHT: f64 = 7.0;
/// Where the vertical rays are cut off.
pub const RAY_CUTOFF: f64 = 200.0;

/// `|F(s)|`; at `s = 1/2` the zeta ratio takes its limit `ζ(0)/ζ(0) = 1`.
fn integrand_abs(s: Complex64) -> Result<f64> {
    let ratio = if s == Complex64::new(0.5, 0.0) {
        1.0
    } else {
        zeta_continued(4.0 * s - 2.0)?.norm() / zeta_continued(2.0 * s - 1.0)?.norm()
    };
    let gamma_abs = complex_gamma_abs(s.re, s.im)?;
    Ok((2.0 * PI).powf(-s.re) * gamma_abs / (s - 1.0).norm_sqr() * ratio)
}

/// Wraps a fallible integrand; the first failure is reported after quadrature.
fn integrate_fallible(
    f: impl Fn(f64) -> Result<f64> + Sync,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<(f64, f64)> {
    let failure = std::sync::Mutex::new(None);
    let r = integrate_pieces(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                f64::NAN
            }
        },
        breaks,
        cfg,
    );
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let r = r?;
    Ok((r.value, r.error))
}

/// Loose envelope for `∫_{200}^∞` on `Re s = 1`: `|Γ(1+it)| <= √(2πt) e^{-πt/2}`
/// for `t >= 1`, `|ζ(2+4it)| <= ζ(2)`, and `1/|ζ(1+2it)| <= 10 ln t` assumed.
fn ray_tail_envelope() -> f64 {
    let t = RAY_CUTOFF;
    let zeta2 = PI * PI / 6.0;
    // ∫_T^∞ √(2πt) e^{-πt/2} 10 ln t / t² dt <= that integrand at T times 2/π·(1 + small)
    let at = (2.0 * PI * t).sqrt() * (-PI * t / 2.0).exp() * 10.0 * t.ln() / (t * t);
    zeta2 / (2.0 * PI) * at * 2.0 / PI * 1.1
}

pub fn contour_segment_bound(segment: Segment) -> Result<ContourSegmentBound> {
    contour_segment_bound_with(segment, &QuadConfig::with_rel_tol(1e-9))
}

pub fn contour_segment_bound_with(
    segment: Segment,
    cfg: &QuadConfig,
) -> Result<ContourSegmentBound> {
    let h = CONTOUR_HEIGHT;
    let ray: [f64; 6] = [h, 10.0, 20.0, 40.0, 80.0, RAY_CUTOFF];
    let (value, error, tail) = match segment {
        Segment::C1 => {
            let breaks: Vec<f64> = ray.iter().rev().map(|t| -t).collect();
            let (v, e) =
                integrate_fallible(|t| integrand_abs(Complex64::new(1.0, t)), &breaks, cfg)?;
            (v, e, ray_tail_envelope())
        }
        Segment::C5 => {
            let (v, e) = integrate_fallible(|t| integrand_abs(Complex64::new(1.0, t)), &ray, cfg)?;
            (v, e, ray_tail_envelope())
        }
        Segment::C2 | Segment::C4 => {
            let t = if segment == Segment::C2 { -h } else { h };
            let (v, e) = integrate_fallible(
                |s| integrand_abs(Complex64::new(s, t)),
                &[0.5, 0.75, 1.0],
                cfg,
            )?;
            (v, e, 0.0)
        }
        Segment::C3 => {
            let (v, e) = integrate_fallible(
                |t| integrand_abs(Complex64::new(0.5, t)),
                &[-h, -3.0, -1.0, 0.0, 1.0, 3.0, h],
                cfg,
            )?;
            (v, e, 0.0)
        }
    };
    Ok(ContourSegmentBound {
        segment,
        computed_bound: value,
        claimed_coefficient: segment.claimed_coefficient(),
        scaling: segment.scaling(),
        quad_error: error,
        tail_envelope: tail,
    })
}

/// All five segments, evaluated in parallel.
pub fn all_contour_bounds(cfg: &QuadConfig) -> Result<Vec<ContourSegmentBound>> {
    Segment::ALL
        .par_iter()
        .map(|&s| contour_segment_bound_with(s, cfg))
        .collect()
}

/// Lower bound for the Liouville sum reconstructed from residues and segment
/// bounds: `res1·x + res34·x^{3/4} - (Σ linear·x + C3·√x)/(2π)`.
pub fn reconstructed_lower_bound(
    x: f64,
    residues: (f64, f64),
    segments: &[ContourSegmentBound],
) -> f64 {
    let (lin, sqrt) = segments
        .iter()
        .fold((0.0, 0.0), |(l, r), b| match b.scaling {
            Scaling::LinearX => (l + b.computed_bound + b.tail_envelope, r),
            Scaling::SqrtX => (l, r + b.computed_bound),
        });
    residues.0 * x + residues.1 * x.powf(0.75) - (lin * x + sqrt * x.sqrt()) / (2.0 * PI)
}
