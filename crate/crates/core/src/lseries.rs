//! Rapidly convergent series for the central derivative of the principal-class
//! partial L-function:
//!
//! ```text
//! ½ Λ'(1, χ, c1) = Σ ε(n)·n·f(2πn²/B)  +  Σ a_n·f(2πn/B)
//!                  \______ R ______/     \_____ C _____/
//! ```
//!
//! Every partial sum carries a rigorous bound on the discarded tail (from
//! `f(x) < e^{-x}/x²`) and a separate bound on evaluation error.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::arith::liouville;
use crate::characters::TwistedCharacter;
use crate::error::{Error, Result};
use crate::special::{f_eval, KernelValue};
use crate::sum::CompensatedSum;

/// Default tolerance on the truncation error of each series.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Source of kernel values `f(x)`; swappable so tests can perturb it.
pub trait Kernel: Sync {
    fn eval(&self, x: f64) -> Result<KernelValue>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StandardKernel;

impl Kernel for StandardKernel {
    fn eval(&self, x: f64) -> Result<KernelValue> {
        f_eval(x)
    }
}

/// Where to stop a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Sum terms `n <= N` exactly.
    Terms(u64),
    /// Smallest `N` whose tail bound is below the tolerance.
    Tolerance(f64),
}

impl Truncation {
    fn validate(self) -> Result<Self> {
        match self {
            Truncation::Terms(0) => Err(Error::Domain("n_max must be positive".into())),
            Truncation::Tolerance(t) if !(t > 0.0 && t.is_finite()) => Err(Error::Domain(format!(
                "tolerance must be positive, got {t}"
            ))),
            ok => Ok(ok),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub value: f64,
    /// Bound on the absolute value of the discarded tail.
    pub trunc_error: f64,
    /// Bound on kernel and rounding error in the summed terms.
    pub eval_error: f64,
    pub terms_used: u64,
}

impl SeriesResult {
    pub fn total_error(&self) -> f64 {
        self.trunc_error + self.eval_error
    }
}

/// Tail bound for `Σ_{n>N} |m(n)|·n·f(2πn²/x)` with `|m| <= 1`.
///
/// Uses `f(y) < e^{-y}/y²` and `(N+1+k)² >= (N+1)² + 2k(N+1)`.
pub fn theta_tail_bound(n_max: u64, x: f64) -> f64 {
    let n1 = (n_max + 1) as f64;
    let scale = x / (2.0 * PI);
    scale * scale / (n1 * n1 * n1) * (-2.0 * PI * n1 * n1 / x).exp()
        / (1.0 - (-4.0 * PI * n1 / x).exp())
}

/// Tail bound for `Σ_{n>N} |a_n| f(2πn/B)` given `|a_n| <= κ n`.
pub fn linear_tail_bound(n_max: u64, b: f64, kappa: f64) -> f64 {
    let n1 = (n_max + 1) as f64;
    let scale = b / (2.0 * PI);
    kappa * scale * scale / n1 * (-2.0 * PI * n1 / b).exp() / (1.0 - (-2.0 * PI / b).exp())
}

/// Smallest `N >= lo` with `bound(N) < tol`, for a bound decreasing in `N`.
fn smallest_n(lo: u64, tol: f64, bound: impl Fn(u64) -> f64) -> u64 {
    let mut hi = lo.max(1);
    while bound(hi) >= tol {
        hi = hi.saturating_mul(2);
        if hi == u64::MAX {
            return hi;
        }
    }
    let mut lo = lo.max(1);
    if bound(lo) < tol {
        return lo;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound(mid) < tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

struct Accumulator {
    sum: CompensatedSum,
    kernel_err: f64,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator {
            sum: CompensatedSum::new(),
            kernel_err: 0.0,
        }
    }

    fn add(&mut self, coef: f64, k: KernelValue) {
        self.sum.add(coef * k.value);
        self.kernel_err += coef.abs() * k.abs_error;
    }

    fn finish(self, trunc_error: f64, terms_used: u64) -> SeriesResult {
        SeriesResult {
            value: self.sum.value(),
            trunc_error,
            eval_error: self.kernel_err + self.sum.rounding_bound(),
            terms_used,
        }
    }
}

/// `Σ_{n<=N} m(n)·n·f(2πn²/x)` for a weight `m` with values in `{-1, 0, 1}`.
pub fn theta_sum_with(
    weight: impl Fn(u64) -> i8,
    x: f64,
    trunc: Truncation,
    kernel: &dyn Kernel,
) -> Result<SeriesResult> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("theta sum needs x > 0, got {x}")));
    }
    let n_max = match trunc.validate()? {
        Truncation::Terms(n) => n,
        Truncation::Tolerance(tol) => smallest_n(1, tol, |n| theta_tail_bound(n, x)),
    };
    let mut acc = Accumulator::new();
    for n in 1..=n_max {
        let m = weight(n);
        if m == 0 {
            continue;
        }
        let nf = n as f64;
        let arg = 2.0 * PI * nf * nf / x;
        let k = kernel.eval(arg)?;
        if k.underflow {
            // every later term underflows too
            acc.kernel_err += nf * k.abs_error;
            break;
        }
        acc.add(m as f64 * nf, k);
    }
    Ok(acc.finish(theta_tail_bound(n_max, x), n_max))
}

/// Number of `(u, v)` lattice points bounds `|a_n| <= κ n`.
fn coefficient_growth(tw: &TwistedCharacter) -> f64 {
    if tw.base.is_even() {
        2f64.sqrt()
    } else {
        4.0 / (tw.disc() as f64).sqrt()
    }
}

/// `a_n`: the sum of `χ(a)` over principal complex ideals of norm `n`.
pub fn coefficient_a_n(tw: &TwistedCharacter, n: u64) -> i64 {
    let tf = tw.twist_factor(n) as i64;
    if tf == 0 || n == 0 {
        return 0;
    }
    let chi = &tw.base;
    let n = n as i64;
    let mut total = 0i64;
    if chi.is_even() {
        // u² + 2v² = n, trace 2u
        let mut v = 1i64;
        while 2 * v * v < n {
            let r = n - 2 * v * v;
            let u = isqrt(r);
            if u * u == r {
                let e = chi
                    .epsilon(crate::characters::HalfIntegerElement::new(u, v))
                    .expect("D=8 chart");
                total += e as i64 * 2 * u;
            }
            v += 1;
        }
    } else {
        let d = chi.disc() as i64;
        let mut v = 1i64;
        while d * v * v < 4 * n {
            let r = 4 * n - d * v * v;
            let u = isqrt(r);
            if u * u == r && (u - v) % 2 == 0 {
                let e = chi
                    .epsilon(crate::characters::HalfIntegerElement::new(u, v))
                    .expect("parity checked");
                total += e as i64 * u;
            }
            v += 1;
        }
    }
    tf * total
}

fn isqrt(n: i64) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// The real-ideal series `R`.
pub fn r_term(tw: &TwistedCharacter, trunc: Truncation) -> Result<SeriesResult> {
    r_term_with(tw, trunc, &StandardKernel)
}

pub fn r_term_with(
    tw: &TwistedCharacter,
    trunc: Truncation,
    kernel: &dyn Kernel,
) -> Result<SeriesResult> {
    theta_sum_with(|n| tw.rational_epsilon(n), tw.b as f64, trunc, kernel)
}

/// The complex-ideal series `C`, summed over the lattice of `(u, v)` with `u, v > 0`.
pub fn c_term(tw: &TwistedCharacter, trunc: Truncation) -> Result<SeriesResult> {
    c_term_with(tw, trunc, &StandardKernel)
}

pub fn c_term_with(
    tw: &TwistedCharacter,
    trunc: Truncation,
    kernel: &dyn Kernel,
) -> Result<SeriesResult> {
    let b = tw.b as f64;
    let kappa = coefficient_growth(tw);
    let chi = &tw.base;
    let disc = chi.disc();
    let first = if chi.is_even() { 3 } else { disc.div_ceil(4) };
    let n_max = match trunc.validate()? {
        Truncation::Terms(n) => n,
        Truncation::Tolerance(tol) => smallest_n(first, tol, |n| linear_tail_bound(n, b, kappa)),
    };
    let mut acc = Accumulator::new();
    // Points are visited by v, then u; each point is one conjugate pair of ideals.
    let limit = n_max as i64;
    let mut v = 1i64;
    if chi.is_even() {
        while 2 * v * v < limit {
            let mut u = 1i64;
            while u * u + 2 * v * v <= limit {
                let n = (u * u + 2 * v * v) as u64;
                let e = chi.epsilon(crate::characters::HalfIntegerElement::new(u, v))?;
                let coef = (e * tw.twist_factor(n)) as f64 * 2.0 * u as f64;
                if coef != 0.0 {
                    acc.add(coef, kernel.eval(2.0 * PI * n as f64 / b)?);
                }
                u += 2;
            }
            v += 1;
        }
    } else {
        let d = disc as i64;
        while d * v * v < 4 * limit {
            let mut u = if v % 2 == 0 { 2 } else { 1 };
            while u * u + d * v * v <= 4 * limit {
                let n = ((u * u + d * v * v) / 4) as u64;
                let e = chi.epsilon(crate::characters::HalfIntegerElement::new(u, v))?;
                let coef = (e * tw.twist_factor(n)) as f64 * u as f64;
                if coef != 0.0 {
                    acc.add(coef, kernel.eval(2.0 * PI * n as f64 / b)?);
                }
                u += 2;
            }
            v += 1;
        }
    }
    Ok(acc.finish(linear_tail_bound(n_max, b, kappa), n_max))
}

/// `Λ'(1, χ, c1)` and `L'(1, χ, c1)` with their ingredients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    #[serde(rename = "D")]
    pub disc: u64,
    pub d: i64,
    #[serde(rename = "B")]
    pub b: u64,
    #[serde(rename = "W")]
    pub root_number: i8,
    #[serde(rename = "R")]
    pub r: SeriesResult,
    #[serde(rename = "C")]
    pub c: SeriesResult,
    pub lambda_prime: f64,
    pub l_prime: f64,
}

impl EvaluationRecord {
    /// Bound on `|Λ' - lambda_prime|`.
    pub fn lambda_prime_error(&self) -> f64 {
        2.0 * (self.r.total_error() + self.c.total_error())
    }
}

pub fn central_derivative(tw: &TwistedCharacter, tolerance: f64) -> Result<EvaluationRecord> {
    central_derivative_with(
        tw,
        Truncation::Tolerance(tolerance),
        Truncation::Tolerance(tolerance),
        &StandardKernel,
    )
}

pub fn central_derivative_with(
    tw: &TwistedCharacter,
    r_trunc: Truncation,
    c_trunc: Truncation,
    kernel: &dyn Kernel,
) -> Result<EvaluationRecord> {
    if tw.root_number != -1 {
        return Err(Error::RootNumberPlusOne {
            field: tw.disc(),
            d: tw.d,
        });
    }
    let r = r_term_with(tw, r_trunc, kernel)?;
    let c = c_term_with(tw, c_trunc, kernel)?;
    let half = r.value + c.value;
    Ok(EvaluationRecord {
        disc: tw.disc(),
        d: tw.d,
        b: tw.b,
        root_number: tw.root_number,
        r,
        c,
        lambda_prime: 2.0 * half,
        l_prime: 4.0 * PI / tw.b as f64 * half,
    })
}

/// `Σ λ(n)·n·f(2πn²/x)`, the extremal comparison sum for `R`.
pub fn liouville_comparison_sum(x: f64, tolerance: f64) -> Result<SeriesResult> {
    theta_sum_with(
        |n| liouville(n).expect("n >= 1"),
        x,
        Truncation::Tolerance(tolerance),
        &StandardKernel,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::build_canonical;

    fn tw(disc: u64, family: i8, d: i64) -> TwistedCharacter {
        build_canonical(disc, family).unwrap().twist(d).unwrap()
    }

    #[test]
    fn a_n_small_cases() {
        let t = tw(11, -1, 1);
        assert_eq!(coefficient_a_n(&t, 1), 0);
        assert_eq!(coefficient_a_n(&t, 2), 0);
        assert_eq!(coefficient_a_n(&t, 3), -1);
        assert_eq!(coefficient_a_n(&t, 5), -3);
        // D=103: nothing below D/4
        let t = tw(103, -1, 1);
        assert!((1..=25).all(|n| coefficient_a_n(&t, n) == 0));
    }

    #[test]
    fn a_n_matches_per_point_brute_force() {
        // all (u, v) in a box, no sqrt shortcut
        let t = tw(11, -1, 1);
        for n in 1..300u64 {
            let mut s = 0i64;
            for u in 1..=40i64 {
                for v in 1..=40i64 {
                    if u * u + 11 * v * v == 4 * n as i64 && (u - v) % 2 == 0 {
                        s += crate::arith::kronecker(2 * u, 11) as i64 * u;
                    }
                }
            }
            assert_eq!(coefficient_a_n(&t, n), s, "n={n}");
        }
    }

    #[test]
    fn c_term_lattice_matches_per_n_sum() {
        for (disc, fam, d) in [
            (11u64, -1i8, 1i64),
            (8, -1, 1),
            (19, -1, 5),
            (7, 1, -4),
            (8, 1, -3),
        ] {
            let t = tw(disc, fam, d);
            let c = c_term(&t, Truncation::Terms(400)).unwrap();
            let per_n: f64 = (1..=400u64)
                .map(|n| {
                    coefficient_a_n(&t, n) as f64
                        * f_eval(2.0 * PI * n as f64 / t.b as f64).unwrap().value
                })
                .sum();
            assert!((c.value - per_n).abs() < 1e-12, "D={disc} d={d}");
        }
    }

    #[test]
    fn table_cells() {
        let t8 = tw(8, -1, 1);
        let t11 = tw(11, -1, 1);
        let r8 = r_term(&t8, Truncation::Terms(7)).unwrap().value;
        let c8 = c_term(&t8, Truncation::Terms(50)).unwrap().value;
        let r11 = r_term(&t11, Truncation::Terms(7)).unwrap().value;
        let c11 = c_term(&t11, Truncation::Terms(50)).unwrap().value;
        assert!((r8 - 1.825_823_578_751_47).abs() < 1e-12);
        assert!((c8 + 0.285_965_308_727_40).abs() < 1e-12);
        assert!((r11 - 0.814_977_052_524_87).abs() < 1e-12);
        assert!((c11 + 0.060_097_576_604_036_8).abs() < 1e-12);
    }

    #[test]
    fn partial_sums_step_by_one_term() {
        let t = tw(19, -1, 1);
        for n in 1..12u64 {
            let a = r_term(&t, Truncation::Terms(n)).unwrap().value;
            let b = r_term(&t, Truncation::Terms(n + 1)).unwrap().value;
            let m = (n + 1) as f64;
            let term = t.rational_epsilon(n + 1) as f64
                * m
                * f_eval(2.0 * PI * m * m / 19.0).unwrap().value;
            assert!((b - a - term).abs() < 1e-15);
        }
    }

    #[test]
    fn truncation_errors_decrease() {
        let t = tw(43, -1, 1);
        let mut prev_r = f64::INFINITY;
        let mut prev_c = f64::INFINITY;
        for n in (11..200).step_by(7) {
            let r = r_term(&t, Truncation::Terms(n)).unwrap().trunc_error;
            let c = c_term(&t, Truncation::Terms(n)).unwrap().trunc_error;
            assert!(r <= prev_r && c <= prev_c);
            prev_r = r;
            prev_c = c;
        }
    }

    #[test]
    fn tolerance_mode_meets_tolerance_and_tail_is_honest() {
        let t = tw(59, -1, 1);
        for tol in [1e-4, 1e-8, 1e-12] {
            let r = r_term(&t, Truncation::Tolerance(tol)).unwrap();
            let c = c_term(&t, Truncation::Tolerance(tol)).unwrap();
            assert!(r.trunc_error < tol && c.trunc_error < tol);
            let r_far = r_term(&t, Truncation::Terms(r.terms_used + 50)).unwrap();
            let c_far = c_term(&t, Truncation::Terms(c.terms_used * 3)).unwrap();
            assert!((r_far.value - r.value).abs() <= r.trunc_error + 1e-15);
            assert!((c_far.value - c.value).abs() <= c.trunc_error + 1e-15);
        }
    }

    #[test]
    fn rejects_bad_truncation_and_root_number() {
        let t = tw(11, -1, 1);
        assert!(r_term(&t, Truncation::Terms(0)).is_err());
        assert!(c_term(&t, Truncation::Tolerance(0.0)).is_err());
        let plus = tw(7, 1, 1);
        assert_eq!(
            central_derivative(&plus, 1e-12).unwrap_err(),
            Error::RootNumberPlusOne { field: 7, d: 1 }
        );
    }

    #[test]
    fn derivative_normalisations() {
        let rec = central_derivative(&tw(11, -1, 1), 1e-12).unwrap();
        assert!((rec.l_prime - 0.862_372_296_690_396).abs() < 1e-12);
        let direct = 2.0 * PI / rec.b as f64 * rec.lambda_prime;
        assert!((rec.l_prime - direct).abs() < 1e-15);
        assert!((rec.lambda_prime - 2.0 * (rec.r.value + rec.c.value)).abs() == 0.0);
    }

    #[test]
    fn liouville_sum_examples() {
        // mpmath: 2.52784614668366897
        let s = liouville_comparison_sum(20.0, 1e-14).unwrap();
        assert!((s.value - 2.527_846_146_683_669).abs() < 1e-12);
        assert!(s.value > 0.704);
        // mpmath: 4.14472235707500e-5
        let s = liouville_comparison_sum(1.0, 1e-16).unwrap();
        assert!((s.value - 4.144_722_357_075e-5).abs() < 1e-15);
        let r = r_term(&tw(11, -1, 1), Truncation::Tolerance(1e-14)).unwrap();
        let l = liouville_comparison_sum(11.0, 1e-14).unwrap();
        assert!(r.value >= l.value);
        assert!(liouville_comparison_sum(-1.0, 1e-12).is_err());
    }
}
