//! Exact integer arithmetic: Kronecker symbols, Liouville's function,
//! fundamental discriminants and class numbers of imaginary quadratic fields.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Residue class of a valid `D` that decides the root-number family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityClass {
    Odd3Mod8,
    Odd7Mod8,
    EightDivides,
}

impl ParityClass {
    pub fn is_even(self) -> bool {
        self == ParityClass::EightDivides
    }
}

/// Kronecker symbol `(a/n)` for arbitrary integers.
pub fn kronecker(a: i64, n: i64) -> i8 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut sign: i8 = 1;
    if n < 0 && a < 0 {
        sign = -sign;
    }
    let mut n = n.unsigned_abs();
    let twos = n.trailing_zeros();
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        n >>= twos;
        if twos % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            sign = -sign;
        }
    }
    if n == 1 {
        return sign;
    }
    let a = (a as i128).rem_euclid(n as i128) as u64;
    sign * jacobi(a, n)
}

/// Jacobi symbol for odd positive `n` and `0 <= a < n`.
fn jacobi(mut a: u64, mut n: u64) -> i8 {
    debug_assert!(n % 2 == 1);
    let mut t: i8 = 1;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && matches!(n % 8, 3 | 5) {
            t = -t;
        }
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Primes below a fixed limit, built once.
#[derive(Debug, Clone)]
pub struct PrimeSieve {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeSieve {
    pub fn new(limit: u64) -> Self {
        let limit = limit.max(2);
        let mut composite = vec![false; limit as usize + 1];
        let mut primes = Vec::new();
        for i in 2..=limit as usize {
            if !composite[i] {
                primes.push(i as u64);
                let mut j = i * i;
                while j <= limit as usize {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        PrimeSieve { limit, primes }
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Prime factorisation as `(p, exponent)` pairs, ascending.
    pub fn factor(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut push = |n: &mut u64, p: u64| {
            let mut e = 0;
            while (*n).is_multiple_of(p) {
                *n /= p;
                e += 1;
            }
            if e > 0 {
                out.push((p, e));
            }
        };
        for &p in &self.primes {
            if p.saturating_mul(p) > n {
                break;
            }
            push(&mut n, p);
        }
        // past the sieve: plain odd trial division
        let mut p = self.limit + 1 + (self.limit % 2);
        while p.saturating_mul(p) <= n {
            push(&mut n, p);
            p += 2;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    /// Omega(n): number of prime factors counted with multiplicity.
    pub fn big_omega(&self, n: u64) -> u32 {
        self.factor(n).iter().map(|&(_, e)| e).sum()
    }
}

pub(crate) fn shared_sieve() -> &'static PrimeSieve {
    static SIEVE: OnceLock<PrimeSieve> = OnceLock::new();
    SIEVE.get_or_init(|| PrimeSieve::new(1 << 16))
}

/// Liouville's function `(-1)^Omega(n)`.
pub fn liouville(n: u64) -> Result<i8> {
    if n == 0 {
        return Err(Error::Domain("liouville(0) is undefined".into()));
    }
    Ok(if shared_sieve().big_omega(n).is_multiple_of(2) {
        1
    } else {
        -1
    })
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && shared_sieve().factor(n).iter().all(|&(_, e)| e == 1)
}

/// True when `d` is the discriminant of a quadratic field. `d = 1` is not.
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// Whether `Q(sqrt(-D))` carries canonical characters, and in which class.
pub fn is_valid_discriminant(d: u64) -> Option<ParityClass> {
    if d <= 4 || d > i64::MAX as u64 || !is_fundamental_discriminant(-(d as i64)) {
        return None;
    }
    match d % 8 {
        3 => Some(ParityClass::Odd3Mod8),
        7 => Some(ParityClass::Odd7Mod8),
        0 => Some(ParityClass::EightDivides),
        _ => None,
    }
}

/// Class number of discriminant `-D`, by counting reduced forms.
pub fn class_number(d: u64) -> Result<u64> {
    if d < 3 || d > i64::MAX as u64 / 4 || !is_fundamental_discriminant(-(d as i64)) {
        return Err(Error::NotFundamental(d));
    }
    let d = d as i64;
    let mut h = 0;
    let mut a: i64 = 1;
    while 3 * a * a <= d {
        for b in -a + 1..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b + d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            h += 1;
        }
        a += 1;
    }
    Ok(h)
}

/// Basic invariants of `Q(sqrt(-D))` for a valid `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldData {
    pub disc: u64,
    pub class_number: u64,
    pub parity: ParityClass,
}

impl FieldData {
    pub fn new(d: u64) -> Result<Self> {
        let parity = is_valid_discriminant(d).ok_or(Error::InvalidDiscriminant(d))?;
        Ok(FieldData {
            disc: d,
            class_number: class_number(d)?,
            parity,
        })
    }
}
