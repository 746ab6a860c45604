//! Numeric kernels: the incomplete gamma value `Γ(0,x)`, the inverse-Mellin
//! kernel `f(x) = Γ(0,x)/x`, and the Lanczos gamma function (real and complex).
//!
//! `Γ(0,x)` is evaluated by its convergent power series for `x <= 1` and by
//! the Laguerre continued fraction (modified Lentz) above. Every kernel value
//! carries an absolute error bound that folds in the truncation of the series
//! or fraction and the floating-point rounding of the evaluation.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{integrate_to_infinity, QuadConfig};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Switch point between the series and continued-fraction branches.
pub const GAMMA0_SWITCH: f64 = 1.0;

/// Above this argument `e^{-x}` underflows the f64 range.
pub const UNDERFLOW_ARG: f64 = 745.0;

const EPS: f64 = f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub abs_error: f64,
    /// Set when the true value is below the smallest representable f64.
    pub underflow: bool,
}

impl KernelValue {
    fn new(value: f64, abs_error: f64) -> Self {
        KernelValue {
            value,
            abs_error,
            underflow: false,
        }
    }
}

/// `Γ(0,x) = ∫_x^∞ e^{-t} dt/t`.
pub fn gamma0(x: f64) -> Result<KernelValue> {
    check_positive(x)?;
    if x <= GAMMA0_SWITCH {
        Ok(gamma0_series(x))
    } else if x >= UNDERFLOW_ARG {
        Ok(KernelValue {
            value: 0.0,
            abs_error: f64::from_bits(1),
            underflow: true,
        })
    } else {
        let s = gamma0_scaled_cf(x);
        let w = (-x).exp();
        Ok(KernelValue::new(
            s.value * w,
            s.abs_error * w + EPS * s.value * w,
        ))
    }
}

/// `e^x Γ(0,x)`, which stays representable for every `x > 0`.
pub fn gamma0_scaled(x: f64) -> Result<KernelValue> {
    check_positive(x)?;
    if x <= GAMMA0_SWITCH {
        let g = gamma0_series(x);
        let w = x.exp();
        Ok(KernelValue::new(
            g.value * w,
            g.abs_error * w + EPS * g.value * w,
        ))
    } else {
        Ok(gamma0_scaled_cf(x))
    }
}

/// The inverse-Mellin kernel `f(x) = Γ(0,x)/x`.
pub fn f_eval(x: f64) -> Result<KernelValue> {
    let g = gamma0(x)?;
    let value = g.value / x;
    Ok(KernelValue {
        value,
        abs_error: g.abs_error / x + EPS * value,
        underflow: g.underflow,
    })
}

/// `e^x f(x)`.
pub fn f_scaled(x: f64) -> Result<KernelValue> {
    let g = gamma0_scaled(x)?;
    let value = g.value / x;
    Ok(KernelValue::new(value, g.abs_error / x + EPS * value))
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("Γ(0,x) needs finite x > 0, got {x}")))
    }
}

/// `-γ - ln x - Σ_{k≥1} (-x)^k / (k·k!)`; alternating with decreasing terms for `x <= 1`.
pub(crate) fn gamma0_series(x: f64) -> KernelValue {
    let mut term = 1.0; // (-x)^k / k!
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut k = 1.0;
    loop {
        term *= -x / k;
        let t = term / k;
        sum += t;
        abs_sum += t.abs();
        let next = (term * x / (k + 1.0)).abs() / (k + 1.0);
        if next <= 1e-18 * (sum.abs() + 1.0) || k > 60.0 {
            let lnx = x.ln();
            let value = -EULER_GAMMA - lnx - sum;
            let rounding =
                4.0 * EPS * (EULER_GAMMA + lnx.abs() + abs_sum) + 2.0 * EPS * value.abs();
            return KernelValue::new(value, next + rounding);
        }
        k += 1.0;
    }
}

/// `e^x Γ(0,x) = 1/(x+1- 1/(x+3- 4/(x+5- ...)))` by modified Lentz.
pub(crate) fn gamma0_scaled_cf(x: f64) -> KernelValue {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    let mut last = 1.0;
    let mut iters = 0;
    for i in 1..10_000 {
        iters = i;
        let an = -((i * i) as f64);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        h *= delta;
        last = (delta - 1.0).abs();
        if last <= EPS {
            break;
        }
    }
    // a few ulps per Lentz step, plus the size of the last correction
    KernelValue::new(h, h * (last + 4.0 * iters as f64 * EPS))
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(z)` on the principal branch (imaginary part not reduced mod 2π).
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Pole("Γ"));
    }
    if z.im < 0.0 {
        return Ok(ln_gamma_complex(z.conj())?.conj());
    }
    if z.re < 0.5 {
        // Γ(z) = π / (sin(πz) Γ(1-z)); ln sin(πz) = -iπz + ln(e^{2iπz} - 1) - ln(2i), stable for Im z >= 0
        let i = Complex64::i();
        let ipz = i * PI * z;
        let ln_sin = -ipz + ((2.0 * ipz).exp() - 1.0).ln() - Complex64::new(2.0f64.ln(), PI / 2.0);
        return Ok(Complex64::new(PI.ln(), 0.0) - ln_sin - ln_gamma_complex(1.0 - z)?);
    }
    let z = z - 1.0;
    let mut a = Complex64::new(LANCZOS[0], 0.0);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + a.ln())
}

pub fn gamma_complex(z: Complex64) -> Result<Complex64> {
    Ok(ln_gamma_complex(z)?.exp())
}

/// Real gamma function.
pub fn gamma(x: f64) -> Result<f64> {
    let g = gamma_complex(Complex64::new(x, 0.0))?;
    Ok(if x > 0.0 {
        g.re
    } else {
        g.re.signum() * g.norm()
    })
}

/// Residual `|∫_0^∞ f(x) x^{s-1} dx - Γ(s)/(s-1)²|` for real `1 < s < 4`.
pub fn mellin_identity_check(s: f64) -> Result<f64> {
    mellin_identity_check_with(s, &QuadConfig::with_rel_tol(1e-12))
}

pub fn mellin_identity_check_with(s: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(s > 1.0 && s < 4.0) {
        return Err(Error::Domain(format!(
            "Mellin check needs 1 < s < 4, got {s}"
        )));
    }
    // (0,1]: with x = e^{-y} the integrand is Γ(0, e^{-y}) e^{-(s-1)y}; for
    // y > 40 the series collapses to y - γ to well below f64 resolution.
    let near = integrate_to_infinity(
        |y| {
            let g = if y > 40.0 {
                y - EULER_GAMMA
            } else {
                gamma0((-y).exp()).map(|k| k.value).unwrap_or(f64::NAN)
            };
            g * (-(s - 1.0) * y).exp()
        },
        0.0,
        cfg,
    )?;
    let far = integrate_to_infinity(
        |x| f_eval(x).map(|k| k.value).unwrap_or(0.0) * x.powf(s - 1.0),
        1.0,
        cfg,
    )?;
    let target = gamma(s)? / ((s - 1.0) * (s - 1.0));
    Ok((near.value + far.value - target).abs())
}
