//! Classical number theory used by the period-finding pipelines: Euclidean
//! and extended Euclidean algorithms, modular exponentiation by repeated
//! squaring, continued-fraction convergents, Euler's totient, and lcm.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumTheoryError {
    /// gcd and egcd are undefined when both arguments are zero.
    BothZero,
    /// Modular exponentiation needs a modulus of at least 2.
    ModulusTooSmall,
    /// Convergents of y/q need q >= 1.
    ZeroDenominator,
    /// Totient and lcm need strictly positive arguments.
    ZeroArgument,
    /// An intermediate product left the supported integer range.
    Overflow,
}

impl fmt::Display for NumTheoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumTheoryError::BothZero => write!(f, "gcd(0, 0) is undefined"),
            NumTheoryError::ModulusTooSmall => write!(f, "modulus must be at least 2"),
            NumTheoryError::ZeroDenominator => write!(f, "denominator must be nonzero"),
            NumTheoryError::ZeroArgument => write!(f, "argument must be nonzero"),
            NumTheoryError::Overflow => write!(f, "integer overflow in intermediate product"),
        }
    }
}

/// One continued-fraction convergent d/r, always in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Convergent {
    pub num: u64,
    pub den: u64,
}

impl fmt::Display for Convergent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Greatest common divisor; gcd(a, 0) = a. Errors on (0, 0).
pub fn gcd(a: u64, b: u64) -> Result<u64, NumTheoryError> {
    if a == 0 && b == 0 {
        return Err(NumTheoryError::BothZero);
    }
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    Ok(a)
}

/// Extended Euclidean algorithm: returns (g, u, v) with u*a + v*b = g = gcd(a, b).
pub fn egcd(a: u64, b: u64) -> Result<(u64, i128, i128), NumTheoryError> {
    if a == 0 && b == 0 {
        return Err(NumTheoryError::BothZero);
    }
    let (mut r0, mut r1) = (a as i128, b as i128);
    let (mut u0, mut u1) = (1i128, 0i128);
    let (mut v0, mut v1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (u0, u1) = (u1, u0 - q * u1);
        (v0, v1) = (v1, v0 - q * v1);
    }
    Ok((r0 as u64, u0, v0))
}

/// a^e mod m by repeated squaring. Products are taken in 128 bits, so any
/// m < 2^64 is safe.
pub fn modpow(a: u64, e: u64, m: u64) -> Result<u64, NumTheoryError> {
    if m < 2 {
        return Err(NumTheoryError::ModulusTooSmall);
    }
    let m128 = m as u128;
    let mut base = (a as u128) % m128;
    let mut acc: u128 = 1;
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m128;
        }
        base = base * base % m128;
        e >>= 1;
    }
    Ok(acc as u64)
}

/// The full convergent sequence of y/q from the continued-fraction
/// recursion. The last entry is exactly y/q in lowest terms; y = 0 yields
/// the single convergent 0/1. y > q is fine (the integer part leads).
pub fn convergents(y: u64, q: u64) -> Result<Vec<Convergent>, NumTheoryError> {
    if q == 0 {
        return Err(NumTheoryError::ZeroDenominator);
    }
    if y == 0 {
        return Ok(vec![Convergent { num: 0, den: 1 }]);
    }
    let mut out = Vec::new();
    // h/k track the convergent recursion h_i = a_i h_{i-1} + h_{i-2},
    // seeded with h_{-1}=1, h_{-2}=0, k_{-1}=0, k_{-2}=1.
    let (mut h_prev, mut h) = (0u64, 1u64);
    let (mut k_prev, mut k) = (1u64, 0u64);
    let (mut num, mut den) = (y, q);
    loop {
        let a = num / den;
        let rem = num % den;
        let h_next = a * h + h_prev;
        let k_next = a * k + k_prev;
        (h_prev, h) = (h, h_next);
        (k_prev, k) = (k, k_next);
        out.push(Convergent { num: h, den: k });
        if rem == 0 {
            break;
        }
        (num, den) = (den, rem);
    }
    Ok(out)
}

/// Euler's totient by trial division. Desk scale only: inputs up to
/// 2^63 - 1 are accepted but runtime is O(sqrt n).
pub fn euler_phi(n: u64) -> Result<u64, NumTheoryError> {
    if n == 0 {
        return Err(NumTheoryError::ZeroArgument);
    }
    let mut phi = n;
    let mut rest = n;
    let mut p = 2u64;
    while p * p <= rest {
        if rest % p == 0 {
            phi = phi / p * (p - 1);
            while rest % p == 0 {
                rest /= p;
            }
        }
        p += 1;
    }
    if rest > 1 {
        phi = phi / rest * (rest - 1);
    }
    Ok(phi)
}

/// Least common multiple a*b/gcd(a,b); errors on zero input or overflow.
pub fn lcm(a: u64, b: u64) -> Result<u64, NumTheoryError> {
    if a == 0 || b == 0 {
        return Err(NumTheoryError::ZeroArgument);
    }
    let g = gcd(a, b)?;
    let wide = (a / g) as u128 * b as u128;
    u64::try_from(wide).map_err(|_| NumTheoryError::Overflow)
}
