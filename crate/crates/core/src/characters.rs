//! Canonical Hecke characters `χ(αO) = ε(α)·α` and their quadratic twists.
//!
//! For odd `D` the finite-order part is `ε((u + v√-D)/2) = (2u / D)`, the
//! quadratic character modulo `√-D` that restricts to `(-D / ·)` on rational
//! integers. For `D = 8` the conductor is `8Z + √-32 Z`, and `ε` is read off
//! a chart indexed by `(v mod 4, u mod 8)`; the two root-number families
//! differ by the character `(-1)^v`, which is `-1` exactly on the coset of
//! `1 + √-2`.

use serde::{Deserialize, Serialize};

use crate::arith::{is_fundamental_discriminant, is_valid_discriminant, kronecker, FieldData};
use crate::error::{Error, Result};

/// An element `(u + v√-D)/2` (odd `D`) or `u + v√-2` (`D = 8`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HalfIntegerElement {
    pub u: i64,
    pub v: i64,
}

impl HalfIntegerElement {
    pub const fn new(u: i64, v: i64) -> Self {
        HalfIntegerElement { u, v }
    }

    pub fn conj(self) -> Self {
        HalfIntegerElement::new(self.u, -self.v)
    }

    pub fn negated(self) -> Self {
        HalfIntegerElement::new(-self.u, -self.v)
    }
}

/// ε on `(O/f)^*` for `D = 8`, root-number `-1` family. Rows `v mod 4`, columns `u mod 8`.
pub const D8_CHART: [[i8; 8]; 4] = [
    [0, 1, 0, 1, 0, -1, 0, -1],
    [0, -1, 0, -1, 0, 1, 0, 1],
    [0, -1, 0, -1, 0, 1, 0, 1],
    [0, -1, 0, -1, 0, 1, 0, 1],
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
enum EpsilonRule {
    /// `(2u / D)`.
    Odd,
    Chart([[i8; 8]; 4]),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalCharacter {
    field: FieldData,
    /// Root number of the family this character belongs to.
    family_sign: i8,
    rule: EpsilonRule,
}

impl CanonicalCharacter {
    /// Build the canonical character of `Q(√-D)`. `family_sign` picks the
    /// root-number family when `8 | D` and is ignored for odd `D`.
    pub fn new(disc: u64, family_sign: i8) -> Result<Self> {
        let parity = is_valid_discriminant(disc).ok_or(Error::InvalidDiscriminant(disc))?;
        if parity.is_even() {
            if disc != 8 {
                return Err(Error::UnsupportedEven(disc));
            }
            if family_sign != 1 && family_sign != -1 {
                return Err(Error::Domain(format!(
                    "family sign must be ±1, got {family_sign}"
                )));
            }
            let mut chart = D8_CHART;
            if family_sign == 1 {
                for row in chart.iter_mut().skip(1).step_by(2) {
                    for e in row.iter_mut() {
                        *e = -*e;
                    }
                }
            }
            return Ok(CanonicalCharacter {
                field: FieldData::new(disc)?,
                family_sign,
                rule: EpsilonRule::Chart(chart),
            });
        }
        Ok(CanonicalCharacter {
            field: FieldData::new(disc)?,
            family_sign: kronecker(2, disc as i64),
            rule: EpsilonRule::Odd,
        })
    }

    pub fn disc(&self) -> u64 {
        self.field.disc
    }

    pub fn field(&self) -> &FieldData {
        &self.field
    }

    pub fn is_even(&self) -> bool {
        matches!(self.rule, EpsilonRule::Chart(_))
    }

    /// Root number of the untwisted character.
    pub fn root_number(&self) -> i8 {
        self.family_sign
    }

    /// The `(v mod 4, u mod 8)` chart, when `D = 8`.
    pub fn chart(&self) -> Option<&[[i8; 8]; 4]> {
        match &self.rule {
            EpsilonRule::Chart(c) => Some(c),
            EpsilonRule::Odd => None,
        }
    }

    pub fn epsilon(&self, elem: HalfIntegerElement) -> Result<i8> {
        match &self.rule {
            EpsilonRule::Odd => {
                if (elem.u - elem.v).rem_euclid(2) != 0 {
                    return Err(Error::Parity {
                        u: elem.u,
                        v: elem.v,
                    });
                }
                Ok(kronecker(2 * elem.u, self.disc() as i64))
            }
            EpsilonRule::Chart(c) => {
                Ok(c[elem.v.rem_euclid(4) as usize][elem.u.rem_euclid(8) as usize])
            }
        }
    }

    /// The rational integer `n` as a ring element.
    pub fn rational(&self, n: i64) -> HalfIntegerElement {
        if self.is_even() {
            HalfIntegerElement::new(n, 0)
        } else {
            HalfIntegerElement::new(2 * n, 0)
        }
    }

    pub fn norm(&self, elem: HalfIntegerElement) -> i64 {
        let (u, v) = (elem.u, elem.v);
        if self.is_even() {
            u * u + 2 * v * v
        } else {
            (u * u + self.disc() as i64 * v * v) / 4
        }
    }

    pub fn multiply(&self, a: HalfIntegerElement, b: HalfIntegerElement) -> HalfIntegerElement {
        if self.is_even() {
            HalfIntegerElement::new(a.u * b.u - 2 * a.v * b.v, a.u * b.v + a.v * b.u)
        } else {
            let d = self.disc() as i64;
            HalfIntegerElement::new((a.u * b.u - d * a.v * b.v) / 2, (a.u * b.v + a.v * b.u) / 2)
        }
    }

    pub fn twist(&self, d: i64) -> Result<TwistedCharacter> {
        TwistedCharacter::new(self.clone(), d)
    }
}

/// Free-function form of [`CanonicalCharacter::new`].
pub fn build_canonical(disc: u64, family_sign: i8) -> Result<CanonicalCharacter> {
    CanonicalCharacter::new(disc, family_sign)
}

/// `ε(elem)`; zero when `elem` is not prime to the conductor.
pub fn epsilon_eval(chi: &CanonicalCharacter, elem: HalfIntegerElement) -> Result<i8> {
    chi.epsilon(elem)
}

/// `χ_{D,d} = χ_can · (ε_d ∘ N)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistedCharacter {
    pub base: CanonicalCharacter,
    pub d: i64,
    /// `D|d|` for odd `D`, `2D|d|` when `8 | D`.
    pub b: u64,
    pub root_number: i8,
}

impl TwistedCharacter {
    pub fn new(base: CanonicalCharacter, d: i64) -> Result<Self> {
        if d != 1 && !is_fundamental_discriminant(d) {
            return Err(Error::InvalidTwist(d));
        }
        let disc = base.disc();
        if gcd(d.unsigned_abs(), disc) != 1 {
            return Err(Error::TwistNotCoprime { field: disc, d });
        }
        let scale = if base.is_even() { 2 } else { 1 };
        let b = scale * disc * d.unsigned_abs();
        let root_number = base.root_number() * if d < 0 { -1 } else { 1 };
        Ok(TwistedCharacter {
            base,
            d,
            b,
            root_number,
        })
    }

    pub fn disc(&self) -> u64 {
        self.base.disc()
    }

    /// Coefficient of `n^{1-2s}` in the real-ideal part of `L(s, χ, c1)`.
    ///
    /// The ideal `nO` has norm `n²`, so the twist contributes `(d/n)² ∈ {0, 1}`.
    pub fn rational_epsilon(&self, n: u64) -> i8 {
        let n = n as i64;
        let k = kronecker(self.d, n);
        kronecker(-(self.disc() as i64), n) * k * k
    }

    /// `ε_d(N α)` factor carried by complex ideals of norm `n`.
    pub fn twist_factor(&self, n: u64) -> i8 {
        kronecker(self.d, n as i64)
    }
}

pub fn twist(chi: &CanonicalCharacter, d: i64) -> Result<TwistedCharacter> {
    chi.twist(d)
}

pub fn rational_epsilon(tw: &TwistedCharacter, n: u64) -> i8 {
    tw.rational_epsilon(n)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
