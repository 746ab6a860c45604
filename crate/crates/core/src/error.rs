use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("-{0} is not a fundamental discriminant")]
    NotFundamental(u64),

    #[error(
        "D = {0} admits no canonical character (need D = 3 mod 4 or 8 | D, -D fundamental, D > 4)"
    )]
    InvalidDiscriminant(u64),

    #[error("even discriminant D = {0} is unsupported (conductor data only known for D = 8)")]
    UnsupportedEven(u64),

    #[error("twist d = {0} is not a fundamental discriminant")]
    InvalidTwist(i64),

    #[error("twist d = {d} shares a factor with D = {field}")]
    TwistNotCoprime { field: u64, d: i64 },

    #[error("element ({u}, {v}) violates u = v (mod 2) for odd D")]
    Parity { u: i64, v: i64 },

    #[error("root number +1: identity requires odd functional equation (D = {field}, d = {d})")]
    RootNumberPlusOne { field: u64, d: i64 },

    #[error("quadrature did not converge on [{a}, {b}] (estimated error {err:e})")]
    Quadrature { a: f64, b: f64, err: f64 },

    #[error("pole of {0}")]
    Pole(&'static str),

    #[error("sign assignment violates m1(p) >= m2(p) at p = {0}")]
    Ordering(u64),
}

pub type Result<T> = std::result::Result<T, Error>;
