//! Explicit non-vanishing bounds and verdicts.
//!
//! For `d = 1` the central derivative is non-zero as soon as the lower bound
//! on `R` beats the trivial bound on `|C|`. That holds for odd `D >= 19` and
//! even `D >= 24`; the two remaining fields are certified by direct
//! evaluation with an interval test, as are all twists.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::arith::{kronecker, shared_sieve, FieldData, ParityClass};
use crate::characters::build_canonical;
use crate::error::{Error, Result};
use crate::lseries::{
    central_derivative, theta_sum_with, EvaluationRecord, StandardKernel, Truncation,
};
use crate::sum::CompensatedSum;

/// Smallest odd `D` covered by the bound chain.
pub const CHAIN_MIN_ODD: u64 = 19;
/// Smallest even `D` covered by the bound chain.
pub const CHAIN_MIN_EVEN: u64 = 24;
/// Direct verdicts need `|Λ'|` to exceed its error bound by this factor.
pub const CERTIFY_FACTOR: f64 = 10.0;

/// `.5235 B - .8458 B^{3/4} - .3951 B^{1/2}`, a lower bound for `R` when `B > 1`.
/// The leading coefficient is `π/6` rounded down on purpose.
#[allow(clippy::approx_constant)]
pub fn r_lower_bound(b: f64) -> Result<f64> {
    if !(b > 1.0 && b.is_finite()) {
        return Err(Error::Domain(format!("lower bound needs B > 1, got {b}")));
    }
    Ok(0.5235 * b - 0.8458 * b.powf(0.75) - 0.3951 * b.sqrt())
}

/// Trivial upper bound on `|C|` for the canonical character (`d = 1`).
pub fn c_trivial_bound(disc: u64, parity: ParityClass) -> Result<f64> {
    if disc < 7 {
        return Err(Error::Domain(format!(
            "trivial bound needs D >= 7, got {disc}"
        )));
    }
    let coeff = if parity.is_even() { 0.2369 } else { 0.0269 };
    Ok(coeff * disc as f64)
}

/// Ingredients of the trivial bound, recomputed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrivialBoundConstants {
    /// `Σ_{v odd} v^-4 e^{-πv²/2}`.
    pub inner_odd: f64,
    /// `Σ_{v>=1} v^-4 e^{-πv²/4}`.
    pub inner_even: f64,
    /// `4·inner_odd/π³`, rounded up to `.0269`.
    pub coeff_odd: f64,
    /// `16·inner_even/π³`, rounded up to `.2369`.
    pub coeff_even: f64,
}

pub fn trivial_bound_constants() -> TrivialBoundConstants {
    let inner = |step: usize, scale: f64| -> f64 {
        (1..200)
            .step_by(step)
            .map(|v| {
                let v = v as f64;
                (-PI * v * v / scale).exp() / v.powi(4)
            })
            .collect::<CompensatedSum>()
            .value()
    };
    let inner_odd = inner(2, 2.0);
    let inner_even = inner(1, 4.0);
    let pi3 = PI * PI * PI;
    TrivialBoundConstants {
        inner_odd,
        inner_even,
        coeff_odd: 4.0 * inner_odd / pi3,
        coeff_even: 16.0 * inner_even / pi3,
    }
}

/// `(Σ n e^{-n²/a}, a/2)`; the first is strictly below the second for `a >= 1`.
pub fn poisson_gaussian_sum_check(a: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("Gaussian sum needs a > 0, got {a}")));
    }
    // terms below e^-745 vanish in f64
    let n_max = (745.0 * a).sqrt().ceil() as u64 + 1;
    let lhs = (1..=n_max)
        .map(|n| {
            let n = n as f64;
            n * (-n * n / a).exp()
        })
        .collect::<CompensatedSum>()
        .value();
    Ok((lhs, a / 2.0))
}

/// A completely multiplicative function given by its values on primes.
/// Primes without an entry take Liouville's value `-1`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignAssignment {
    signs: BTreeMap<u64, i8>,
}

impl SignAssignment {
    /// Liouville's function.
    pub fn liouville() -> Self {
        Self::default()
    }

    pub fn from_primes(signs: impl IntoIterator<Item = (u64, i8)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (p, s) in signs {
            if !(-1..=1).contains(&s) {
                return Err(Error::Domain(format!(
                    "sign at {p} must be in {{-1, 0, 1}}, got {s}"
                )));
            }
            if shared_sieve().factor(p) != [(p, 1)] {
                return Err(Error::Domain(format!("{p} is not prime")));
            }
            map.insert(p, s);
        }
        Ok(SignAssignment { signs: map })
    }

    pub fn at_prime(&self, p: u64) -> i8 {
        self.signs.get(&p).copied().unwrap_or(-1)
    }

    pub fn value(&self, n: u64) -> i8 {
        shared_sieve()
            .factor(n)
            .into_iter()
            .map(|(p, e)| match self.at_prime(p) {
                -1 if e % 2 == 1 => -1,
                0 => 0,
                _ => 1,
            })
            .product()
    }

    /// First prime where `self(p) < other(p)`, if any.
    fn ordering_violation(&self, other: &SignAssignment) -> Option<u64> {
        self.signs
            .keys()
            .chain(other.signs.keys())
            .copied()
            .find(|&p| self.at_prime(p) < other.at_prime(p))
    }
}

/// Whether `Σ m1(n) n f(2πn²/x) >= Σ m2(n) n f(2πn²/x)` up to certified error.
pub fn multiplicative_monotonicity_check(
    m1: &SignAssignment,
    m2: &SignAssignment,
    x: f64,
) -> Result<bool> {
    if let Some(p) = m1.ordering_violation(m2) {
        return Err(Error::Ordering(p));
    }
    let trunc = Truncation::Tolerance(1e-14);
    let s1 = theta_sum_with(|n| m1.value(n), x, trunc, &StandardKernel)?;
    let s2 = theta_sum_with(|n| m2.value(n), x, trunc, &StandardKernel)?;
    Ok(s1.value - s2.value >= -(s1.total_error() + s2.total_error()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BoundChain,
    DirectTable,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::BoundChain => "bound_chain",
            Method::DirectTable => "direct_table",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictOptions {
    pub tolerance: f64,
    /// Also evaluate `R` and `C` on bound-chain rows where a character is available.
    pub evaluate_chain_rows: bool,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        VerdictOptions {
            tolerance: crate::lseries::DEFAULT_TOLERANCE,
            evaluate_chain_rows: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    #[serde(rename = "D")]
    pub disc: u64,
    pub d: i64,
    pub family: i8,
    #[serde(rename = "B")]
    pub b: u64,
    #[serde(rename = "W")]
    pub root_number: i8,
    pub h: u64,
    pub r_lower: Option<f64>,
    pub c_upper: Option<f64>,
    pub method: Method,
    pub nonvanishing: bool,
    pub rank_prediction: Option<u64>,
    pub computed: Option<EvaluationRecord>,
}

/// Root number of the `d = 1` character in the given family.
pub fn canonical_root_number(disc: u64, family: i8) -> Result<(FieldData, i8)> {
    let field = FieldData::new(disc)?;
    let w = if field.parity.is_even() {
        if family != 1 && family != -1 {
            return Err(Error::Domain(format!(
                "family sign must be ±1, got {family}"
            )));
        }
        family
    } else {
        kronecker(2, disc as i64)
    };
    Ok((field, w))
}

fn certified(rec: &EvaluationRecord) -> bool {
    rec.lambda_prime.abs() > CERTIFY_FACTOR * rec.lambda_prime_error()
}

/// Non-vanishing verdict for `Λ'(1, χ_{D,d})`.
pub fn verdict(disc: u64, d: i64, family: i8, options: &VerdictOptions) -> Result<VerdictReport> {
    let (field, w_can) = canonical_root_number(disc, family)?;
    let family = if field.parity.is_even() {
        family
    } else {
        w_can
    };
    if d != 1 {
        let tw = build_canonical(disc, family)?.twist(d)?;
        let rec = central_derivative(&tw, options.tolerance)?;
        return Ok(VerdictReport {
            disc,
            d,
            family,
            b: tw.b,
            root_number: tw.root_number,
            h: field.class_number,
            r_lower: None,
            c_upper: None,
            method: Method::DirectTable,
            nonvanishing: certified(&rec),
            rank_prediction: None,
            computed: Some(rec),
        });
    }
    if w_can != -1 {
        return Err(Error::RootNumberPlusOne { field: disc, d });
    }
    let even = field.parity.is_even();
    let b = if even { 2 * disc } else { disc };
    let r_lower = r_lower_bound(b as f64)?;
    let c_upper = c_trivial_bound(disc, field.parity)?;
    let in_chain = if even {
        disc >= CHAIN_MIN_EVEN
    } else {
        disc >= CHAIN_MIN_ODD
    };
    let has_character = !even || disc == 8;

    let (method, nonvanishing, computed) = if in_chain && r_lower > c_upper {
        let rec = if options.evaluate_chain_rows && has_character {
            Some(central_derivative(
                &build_canonical(disc, family)?.twist(1)?,
                options.tolerance,
            )?)
        } else {
            None
        };
        (Method::BoundChain, true, rec)
    } else {
        let rec = central_derivative(&build_canonical(disc, family)?.twist(1)?, options.tolerance)?;
        (Method::DirectTable, certified(&rec), Some(rec))
    };
    Ok(VerdictReport {
        disc,
        d,
        family,
        b,
        root_number: w_can,
        h: field.class_number,
        r_lower: Some(r_lower),
        c_upper: Some(c_upper),
        method,
        nonvanishing,
        rank_prediction: nonvanishing.then_some(field.class_number),
        computed,
    })
}
