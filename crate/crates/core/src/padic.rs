//! Exact truncated arithmetic over the p-adic rationals.
//!
//! Every element is stored in the canonical form `p^v * u` with `u` a unit
//! known modulo `p^prec`. Exact zero is distinguished from "indistinguishable
//! from zero at the working precision"; membership decisions (`in_p`,
//! `is_integral`, ...) report a precision error instead of guessing when the
//! stored digits cannot decide them.

use num::{BigInt, BigRational, One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PadicError {
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid field parameter: {0}")]
    BadField(String),
}

pub type PResult<T> = Result<T, PadicError>;

/// Raises `p` to the `k`-th power, erroring out instead of overflowing u128.
fn p_pow(p: u64, k: u32) -> PResult<u128> {
    let mut acc: u128 = 1;
    for _ in 0..k {
        acc = acc
            .checked_mul(p as u128)
            .ok_or_else(|| PadicError::BadField(format!("p^{k} exceeds u128 for p={p}")))?;
        if acc >= (1u128 << 126) {
            return Err(PadicError::BadField(format!("p^{k} too large for p={p}")));
        }
    }
    Ok(acc)
}

/// `a * b mod m` for moduli up to 2^126.
fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return (a % m) * (b % m) % m;
    }
    // 128x128 -> 256 bit product via 64-bit limbs, reduced mod m.
    let (a, b) = (a % m, b % m);
    let (a_hi, a_lo) = (a >> 64, a & u64::MAX as u128);
    let mut acc = mulmod_shift(a_hi, b, 64, m);
    acc = (acc + mulmod_small(a_lo, b, m)) % m;
    acc
}

/// `a * b * 2^shift mod m` with `a < 2^64`.
fn mulmod_shift(a: u128, b: u128, shift: u32, m: u128) -> u128 {
    let mut acc = mulmod_small(a, b, m);
    for _ in 0..shift {
        acc = (acc << 1) % m;
    }
    acc
}

/// `a * b mod m` with `a < 2^64`.
fn mulmod_small(a: u128, b: u128, m: u128) -> u128 {
    let (b_hi, b_lo) = (b >> 64, b & u64::MAX as u128);
    // a * b_lo fits in 192 bits; split again.
    let lo = a.wrapping_mul(b_lo);
    if a.checked_mul(b_lo).is_some() {
        let mut acc = lo % m;
        if b_hi != 0 {
            acc = (acc + mulmod_shift(a.wrapping_mul(b_hi) % m, 1, 64, m)) % m;
        }
        return acc;
    }
    // Fall back to halving recursion (rare: only for very deep moduli).
    let half = mulmod_small(a >> 1, b, m);
    let mut acc = (half << 1) % m;
    if a & 1 == 1 {
        acc = (acc + b % m) % m;
    }
    acc
}

fn inv_mod(a: u128, m: u128) -> u128 {
    // Extended Euclid over i128 is unsafe for m near 2^126; use the
    // p-adic Newton lift instead: works because gcd(a, m) = 1 and m = p^k.
    // Start from inverse mod p via Fermat, lift by x -> x(2 - ax).
    let x: u128;
    // Invert mod 2^? -- m is a prime power p^k; find inverse mod p first.
    // Use extended Euclid on u128 with iterative remainders (all < m).
    let (mut r0, mut r1) = (m, a % m);
    let (mut s0, mut s1): (i128, i128) = (0, 1);
    while r1 != 0 {
        let qt = r0 / r1;
        let r2 = r0 % r1;
        let s2 = s0 - (qt as i128).wrapping_mul(s1);
        r0 = r1;
        r1 = r2;
        s0 = s1;
        s1 = s2;
    }
    debug_assert_eq!(r0, 1, "inv_mod of non-unit");
    if s0 < 0 {
        x = (m as i128 + s0) as u128;
    } else {
        x = s0 as u128;
    }
    x % m
}

fn val_of_u128(mut t: u128, p: u64) -> u32 {
    let mut v = 0;
    while t % p as u128 == 0 {
        t /= p as u128;
        v += 1;
    }
    v
}

/// The working field: Q_p truncated at `digits` p-adic digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadicField {
    p: u64,
    digits: u32,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl PadicField {
    pub fn new(p: u64, digits: u32) -> PResult<Self> {
        if !is_prime(p) {
            return Err(PadicError::BadField(format!("{p} is not prime")));
        }
        if digits < 2 {
            return Err(PadicError::BadField("need at least 2 digits".into()));
        }
        p_pow(p, digits)?;
        Ok(PadicField { p, digits })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn zero(&self) -> PAdic {
        PAdic { p: self.p, repr: Repr::Zero }
    }

    pub fn one(&self) -> PAdic {
        self.int(1)
    }

    /// The uniformizer `p`, or any power of it.
    pub fn pi(&self, k: i32) -> PAdic {
        PAdic { p: self.p, repr: Repr::Unit { v: k, u: 1, prec: self.digits } }
    }

    pub fn int(&self, n: i64) -> PAdic {
        self.ratio(n, 1)
    }

    /// Exact rational input n/d, truncated at the field precision.
    pub fn ratio(&self, n: i64, d: i64) -> PAdic {
        assert!(d != 0, "zero denominator");
        if n == 0 {
            return self.zero();
        }
        let p = self.p;
        let (mut nn, mut vn) = (n.unsigned_abs() as u128, 0i32);
        while nn % p as u128 == 0 {
            nn /= p as u128;
            vn += 1;
        }
        let (mut dd, mut vd) = (d.unsigned_abs() as u128, 0i32);
        while dd % p as u128 == 0 {
            dd /= p as u128;
            vd += 1;
        }
        let m = p_pow(p, self.digits).expect("validated");
        let mut u = mulmod(nn % m, inv_mod(dd % m, m), m);
        if (n < 0) != (d < 0) {
            u = (m - u) % m;
        }
        PAdic { p, repr: Repr::Unit { v: vn - vd, u, prec: self.digits } }
    }

    /// `p^v * u` with `u` coprime to p, known to full field precision.
    pub fn unit(&self, v: i32, u: u128) -> PAdic {
        assert!(u % self.p as u128 != 0, "unit part divisible by p");
        let m = p_pow(self.p, self.digits).expect("validated");
        PAdic { p: self.p, repr: Repr::Unit { v, u: u % m, prec: self.digits } }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Repr {
    /// Exact zero.
    Zero,
    /// All stored digits cancelled; the value lies in p^min_v * Z_p.
    NearZero { min_v: i32 },
    /// p^v * u with u a unit known modulo p^prec.
    Unit { v: i32, u: u128, prec: u32 },
}

/// One element of Q_p in canonical truncated form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PAdic {
    p: u64,
    repr: Repr,
}

/// Result of a valuation query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Finite(i32),
    /// Indistinguishable from zero: the valuation is at least this.
    AtLeast(i32),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i32> {
        match self {
            Valuation::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl PAdic {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    /// v(p) = 1, v(ab) = v(a) + v(b), v(a+b) >= min(v(a), v(b)).
    pub fn valuation(&self) -> Valuation {
        match self.repr {
            Repr::Zero => Valuation::Infinite,
            Repr::NearZero { min_v } => Valuation::AtLeast(min_v),
            Repr::Unit { v, .. } => Valuation::Finite(v),
        }
    }

    /// |x| = q^{-v(x)} as an exact element of Q(sqrt q); |0| = 0.
    pub fn abs(&self) -> SqrtRat {
        match self.repr {
            Repr::Zero => SqrtRat::zero(self.p),
            Repr::NearZero { .. } => panic!("abs of value known only near zero"),
            Repr::Unit { v, .. } => SqrtRat::q_half_pow(self.p, -2 * v),
        }
    }

    fn prec_of(&self) -> u32 {
        match self.repr {
            Repr::Unit { prec, .. } => prec,
            _ => 0,
        }
    }

    /// Unit part modulo p^k (canonical representative), k <= prec.
    pub fn unit_mod(&self, k: u32) -> PResult<u128> {
        match self.repr {
            Repr::Unit { u, prec, .. } => {
                if k > prec {
                    return Err(PadicError::Precision(format!(
                        "unit digits mod p^{k} requested, only {prec} known"
                    )));
                }
                Ok(u % p_pow(self.p, k)?)
            }
            _ => Err(PadicError::Precision("unit part of (near-)zero".into())),
        }
    }

    /// Canonical representative of the value modulo p^k, in [0, p^k).
    /// Requires v(x) >= something decidable and absolute precision >= k.
    pub fn rep_mod(&self, k: i32) -> PResult<u128> {
        match self.repr {
            Repr::Zero => Ok(0),
            Repr::NearZero { min_v } => {
                if min_v >= k {
                    Ok(0)
                } else {
                    Err(PadicError::Precision(format!(
                        "value known only in p^{min_v} ball, rep mod p^{k} requested"
                    )))
                }
            }
            Repr::Unit { v, u, prec } => {
                if v >= k {
                    return Ok(0);
                }
                if v + (prec as i32) < k {
                    return Err(PadicError::Precision(format!(
                        "absolute precision {} < {k}",
                        v + prec as i32
                    )));
                }
                if v < 0 {
                    return Err(PadicError::Precision(format!(
                        "rep mod p^{k} of element with valuation {v} < 0"
                    )));
                }
                let pk = p_pow(self.p, k as u32)?;
                Ok(mulmod(p_pow(self.p, v as u32)?, u, pk))
            }
        }
    }

    /// Fractional-part data for additive characters: writes x = integer part
    /// plus c/p^m with 0 <= c < p^m, m = max(0, -v(x)); returns (c, m).
    pub fn frac_part(&self) -> PResult<(u128, u32)> {
        match self.repr {
            Repr::Zero => Ok((0, 0)),
            Repr::NearZero { min_v } => {
                if min_v >= 0 {
                    Ok((0, 0))
                } else {
                    Err(PadicError::Precision("fractional part undecidable".into()))
                }
            }
            Repr::Unit { v, u, prec } => {
                if v >= 0 {
                    return Ok((0, 0));
                }
                let m = (-v) as u32;
                if prec < m {
                    return Err(PadicError::Precision(format!(
                        "need {m} digits of unit part for fractional part, have {prec}"
                    )));
                }
                let pm = p_pow(self.p, m)?;
                Ok((u % pm, m))
            }
        }
    }

    pub fn is_integral(&self) -> PResult<bool> {
        self.in_p(0)
    }

    /// Is v(x) >= k?
    pub fn in_p(&self, k: i32) -> PResult<bool> {
        match self.repr {
            Repr::Zero => Ok(true),
            Repr::NearZero { min_v } => {
                if min_v >= k {
                    Ok(true)
                } else {
                    Err(PadicError::Precision(format!(
                        "cannot decide membership in p^{k}: value only known in p^{min_v} ball"
                    )))
                }
            }
            Repr::Unit { v, .. } => Ok(v >= k),
        }
    }

    /// Is x in 1 + p^k (k >= 1)?
    pub fn in_one_plus_p(&self, k: i32) -> PResult<bool> {
        let f = PadicField { p: self.p, digits: self.prec_of().max(2) };
        let shifted = self.sub(&f.one());
        shifted.in_p(k)
    }

    pub fn neg(&self) -> PAdic {
        match self.repr {
            Repr::Zero | Repr::NearZero { .. } => *self,
            Repr::Unit { v, u, prec } => {
                let m = p_pow(self.p, prec).expect("validated");
                PAdic { p: self.p, repr: Repr::Unit { v, u: (m - u % m) % m, prec } }
            }
        }
    }

    pub fn mul(&self, rhs: &PAdic) -> PAdic {
        let p = self.p;
        debug_assert_eq!(p, rhs.p);
        match (self.repr, rhs.repr) {
            (Repr::Zero, _) | (_, Repr::Zero) => PAdic { p, repr: Repr::Zero },
            (Repr::NearZero { min_v }, Repr::NearZero { min_v: w }) => {
                PAdic { p, repr: Repr::NearZero { min_v: min_v + w } }
            }
            (Repr::NearZero { min_v }, Repr::Unit { v, .. })
            | (Repr::Unit { v, .. }, Repr::NearZero { min_v }) => {
                PAdic { p, repr: Repr::NearZero { min_v: min_v + v } }
            }
            (Repr::Unit { v: v1, u: u1, prec: p1 }, Repr::Unit { v: v2, u: u2, prec: p2 }) => {
                let prec = p1.min(p2);
                let m = p_pow(p, prec).expect("validated");
                PAdic { p, repr: Repr::Unit { v: v1 + v2, u: mulmod(u1, u2, m), prec } }
            }
        }
    }

    pub fn inv(&self) -> PResult<PAdic> {
        match self.repr {
            Repr::Zero => Err(PadicError::DivisionByZero),
            Repr::NearZero { .. } => {
                Err(PadicError::Precision("inverse of value known only near zero".into()))
            }
            Repr::Unit { v, u, prec } => {
                let m = p_pow(self.p, prec)?;
                Ok(PAdic { p: self.p, repr: Repr::Unit { v: -v, u: inv_mod(u, m), prec } })
            }
        }
    }

    pub fn div(&self, rhs: &PAdic) -> PResult<PAdic> {
        Ok(self.mul(&rhs.inv()?))
    }

    pub fn add(&self, rhs: &PAdic) -> PAdic {
        let p = self.p;
        debug_assert_eq!(p, rhs.p);
        match (self.repr, rhs.repr) {
            (Repr::Zero, _) => *rhs,
            (_, Repr::Zero) => *self,
            (Repr::NearZero { min_v }, Repr::NearZero { min_v: w }) => {
                PAdic { p, repr: Repr::NearZero { min_v: min_v.min(w) } }
            }
            (Repr::NearZero { min_v }, Repr::Unit { v, u, prec })
            | (Repr::Unit { v, u, prec }, Repr::NearZero { min_v }) => {
                if v < min_v {
                    // Valuation is decided by the unit summand.
                    let abs = (v + prec as i32).min(min_v);
                    let new_prec = (abs - v) as u32;
                    let m = p_pow(p, new_prec).expect("validated");
                    PAdic { p, repr: Repr::Unit { v, u: u % m, prec: new_prec } }
                } else {
                    PAdic { p, repr: Repr::NearZero { min_v } }
                }
            }
            (Repr::Unit { v: v1, u: u1, prec: p1 }, Repr::Unit { v: v2, u: u2, prec: p2 }) => {
                let (v1, u1, p1, v2, u2, p2) = if v1 <= v2 {
                    (v1, u1, p1, v2, u2, p2)
                } else {
                    (v2, u2, p2, v1, u1, p1)
                };
                let abs = (v1 + p1 as i32).min(v2 + p2 as i32);
                let width = (abs - v1) as u32;
                if width == 0 {
                    return PAdic { p, repr: Repr::NearZero { min_v: abs } };
                }
                let m = p_pow(p, width).expect("validated");
                let shift = (v2 - v1) as u32;
                let t = if shift >= width {
                    u1 % m
                } else {
                    (u1 % m + mulmod(p_pow(p, shift).expect("validated"), u2, m)) % m
                };
                if t == 0 {
                    return PAdic { p, repr: Repr::NearZero { min_v: abs } };
                }
                let dv = val_of_u128(t, p);
                let v = v1 + dv as i32;
                let prec = width - dv;
                PAdic {
                    p,
                    repr: Repr::Unit { v, u: t / p_pow(p, dv).expect("validated"), prec },
                }
            }
        }
    }

    pub fn sub(&self, rhs: &PAdic) -> PAdic {
        self.add(&rhs.neg())
    }

    /// Equality of the overlapping known digits.
    pub fn eq_known(&self, rhs: &PAdic) -> PResult<bool> {
        let d = self.sub(rhs);
        match d.repr {
            Repr::Zero | Repr::NearZero { .. } => Ok(true),
            Repr::Unit { .. } => Ok(false),
        }
    }
}

impl fmt::Display for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.repr {
            Repr::Zero => write!(f, "0"),
            Repr::NearZero { min_v } => write!(f, "O({}^{})", self.p, min_v),
            Repr::Unit { v, u, prec } => write!(f, "{}^{}*{} (mod {}^{})", self.p, v, u, self.p, prec),
        }
    }
}

/// Legendre symbol of a mod p, p an odd prime. Returns 1, -1 or 0.
pub fn legendre(a: u128, p: u64) -> i8 {
    let a = (a % p as u128) as u64;
    if a == 0 {
        return 0;
    }
    // Euler's criterion by fast exponentiation.
    let mut base = a as u128;
    let mut e = (p - 1) / 2;
    let mut acc: u128 = 1;
    let m = p as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

/// Square class of a nonzero element of Q_p^* / (Q_p^*)^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SquareClass {
    /// p odd: classes 1, u, pi, u*pi with u a non-residue.
    Odd { v_odd: bool, nonresidue: bool },
    /// p = 2: eight classes indexed by v mod 2 and the unit part mod 8.
    Two { v_odd: bool, u_mod8: u8 },
}

impl SquareClass {
    pub fn is_square(&self) -> bool {
        match *self {
            SquareClass::Odd { v_odd, nonresidue } => !v_odd && !nonresidue,
            SquareClass::Two { v_odd, u_mod8 } => !v_odd && u_mod8 == 1,
        }
    }

    pub fn mul(&self, rhs: &SquareClass) -> SquareClass {
        match (*self, *rhs) {
            (
                SquareClass::Odd { v_odd: a, nonresidue: b },
                SquareClass::Odd { v_odd: c, nonresidue: d },
            ) => SquareClass::Odd { v_odd: a ^ c, nonresidue: b ^ d },
            (
                SquareClass::Two { v_odd: a, u_mod8: x },
                SquareClass::Two { v_odd: c, u_mod8: y },
            ) => SquareClass::Two { v_odd: a ^ c, u_mod8: ((x as u16 * y as u16) % 8) as u8 },
            _ => panic!("square classes over different primes"),
        }
    }
}

/// Square class of x in F^*/(F^*)^2.
pub fn square_class(x: &PAdic) -> PResult<SquareClass> {
    let p = x.p();
    let v = match x.valuation() {
        Valuation::Finite(v) => v,
        _ => return Err(PadicError::Precision("square class of (near-)zero".into())),
    };
    if p == 2 {
        let u = x.unit_mod(3)?;
        Ok(SquareClass::Two { v_odd: v.rem_euclid(2) == 1, u_mod8: (u % 8) as u8 })
    } else {
        let u = x.unit_mod(1)?;
        Ok(SquareClass::Odd {
            v_odd: v.rem_euclid(2) == 1,
            nonresidue: legendre(u, p) == -1,
        })
    }
}

/// The smallest positive quadratic non-residue mod p (p odd).
pub fn nonresidue(p: u64) -> u64 {
    (2..p).find(|&a| legendre(a as u128, p) == -1).expect("odd prime has a non-residue")
}

/// Exact element of Q(sqrt q) at q = p: a + b*sqrt(p) with rational a, b.
///
/// Houses Haar volumes (vol(o) = q^{1/2}) and every exact integral value.
#[derive(Debug, Clone, PartialEq)]
pub struct SqrtRat {
    pub p: u64,
    pub a: BigRational,
    pub b: BigRational,
}

impl SqrtRat {
    pub fn zero(p: u64) -> Self {
        SqrtRat { p, a: BigRational::zero(), b: BigRational::zero() }
    }

    pub fn one(p: u64) -> Self {
        SqrtRat { p, a: BigRational::one(), b: BigRational::zero() }
    }

    pub fn from_rational(p: u64, a: BigRational) -> Self {
        SqrtRat { p, a, b: BigRational::zero() }
    }

    pub fn from_int(p: u64, n: i64) -> Self {
        Self::from_rational(p, BigRational::from_integer(BigInt::from(n)))
    }

    /// q^{k/2} exactly.
    pub fn q_half_pow(p: u64, k: i32) -> Self {
        let half = k.rem_euclid(2) == 1;
        let int_part = (k - if half { 1 } else { 0 }) / 2;
        let q = BigRational::from_integer(BigInt::from(p));
        let scale = if int_part >= 0 {
            num::pow::pow(q, int_part as usize)
        } else {
            num::pow::pow(q, (-int_part) as usize).recip()
        };
        if half {
            SqrtRat { p, a: BigRational::zero(), b: scale }
        } else {
            SqrtRat { p, a: scale, b: BigRational::zero() }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn add(&self, rhs: &SqrtRat) -> SqrtRat {
        debug_assert_eq!(self.p, rhs.p);
        SqrtRat { p: self.p, a: &self.a + &rhs.a, b: &self.b + &rhs.b }
    }

    pub fn sub(&self, rhs: &SqrtRat) -> SqrtRat {
        debug_assert_eq!(self.p, rhs.p);
        SqrtRat { p: self.p, a: &self.a - &rhs.a, b: &self.b - &rhs.b }
    }

    pub fn neg(&self) -> SqrtRat {
        SqrtRat { p: self.p, a: -self.a.clone(), b: -self.b.clone() }
    }

    pub fn mul(&self, rhs: &SqrtRat) -> SqrtRat {
        debug_assert_eq!(self.p, rhs.p);
        let q = BigRational::from_integer(BigInt::from(self.p));
        SqrtRat {
            p: self.p,
            a: &self.a * &rhs.a + &self.b * &rhs.b * &q,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }

    pub fn scale(&self, c: &BigRational) -> SqrtRat {
        SqrtRat { p: self.p, a: &self.a * c, b: &self.b * c }
    }

    pub fn inv(&self) -> SqrtRat {
        // (a + b sqrt q)^-1 = (a - b sqrt q) / (a^2 - q b^2)
        let q = BigRational::from_integer(BigInt::from(self.p));
        let norm = &self.a * &self.a - &self.b * &self.b * &q;
        assert!(!norm.is_zero(), "inverse of zero in Q(sqrt q)");
        SqrtRat { p: self.p, a: &self.a / &norm, b: -(&self.b / &norm) }
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.a) + rational_to_f64(&self.b) * (self.p as f64).sqrt()
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    let num = r.numer();
    let den = r.denom();
    // Scale down in tandem to avoid overflowing f64 conversion of huge ints.
    let nf = bigint_to_f64(num);
    let df = bigint_to_f64(den);
    nf / df
}

fn bigint_to_f64(n: &BigInt) -> f64 {
    let s = n.to_string();
    s.parse::<f64>().unwrap_or(if n.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// Additive Haar volume: vol(p^v) = q^{1/2 - v}.
pub fn measure_ball(p: u64, v: i32) -> SqrtRat {
    SqrtRat::q_half_pow(p, 1 - 2 * v)
}

/// Multiplicative volume of 1 + p^d (d >= 1): q^{1-d} / (q - 1).
pub fn measure_times_one_plus_p(p: u64, d: u32) -> SqrtRat {
    let q = BigRational::from_integer(BigInt::from(p));
    let denom = &q - BigRational::one();
    SqrtRat::q_half_pow(p, 2 - 2 * d as i32).scale(&denom.recip())
}

/// Multiplicative volume of the unit group: 1 by normalization.
pub fn measure_times_units(p: u64) -> SqrtRat {
    SqrtRat::one(p)
}

/// Multiplicative volume of a coset u(1 + p^d) of the units, d >= 1.
pub fn measure_times_unit_coset(p: u64, d: u32) -> SqrtRat {
    measure_times_one_plus_p(p, d)
}

/// Additive volume of a depth-d coset c + p^{k+d} inside the shell v = k.
pub fn measure_shell_coset(p: u64, k: i32, d: u32) -> SqrtRat {
    measure_ball(p, k + d as i32)
}

/// A formal sum of q-half-powers with rational coefficients, used where
/// measures of different scales accumulate (kept exact for comparisons).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QHalfSum {
    /// exponent (in units of 1/2) -> coefficient
    pub terms: BTreeMap<i32, BigRational>,
}

impl QHalfSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, half_exp: i32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(half_exp).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&half_exp);
        }
    }

    pub fn eval_f64(&self, q: f64) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| rational_to_f64(c) * q.powf(*k as f64 / 2.0))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> PadicField {
        PadicField::new(3, 12).unwrap()
    }

    #[test]
    fn valuation_basics() {
        let f = f3();
        assert_eq!(f.int(3).valuation(), Valuation::Finite(1));
        assert_eq!(f.ratio(1, 3).valuation(), Valuation::Finite(-1));
        assert_eq!(f.zero().valuation(), Valuation::Infinite);
        assert_eq!(f.int(18).valuation(), Valuation::Finite(2));
    }

    #[test]
    fn valuation_mul_additive() {
        let f = f3();
        for (a, b) in [(6, 9), (2, 27), (12, 5), (-9, 15)] {
            let (x, y) = (f.int(a), f.int(b));
            let vx = x.valuation().finite().unwrap();
            let vy = y.valuation().finite().unwrap();
            assert_eq!(x.mul(&y).valuation(), Valuation::Finite(vx + vy));
        }
    }

    #[test]
    fn abs_of_uniformizer() {
        let f = f3();
        // |pi| = q^{-1}
        assert_eq!(f.pi(1).abs(), SqrtRat::q_half_pow(3, -2));
        // units have absolute value 1
        assert_eq!(f.int(2).abs(), SqrtRat::one(3));
    }

    #[test]
    fn add_cancellation_tracks_precision() {
        let f = f3();
        let x = f.int(1).add(&f.int(8)); // 9 = 3^2
        assert_eq!(x.valuation(), Valuation::Finite(2));
        let z = f.int(5).sub(&f.int(5));
        assert!(matches!(z.valuation(), Valuation::AtLeast(_)));
    }

    #[test]
    fn exact_zero_vs_near_zero() {
        let f = f3();
        assert!(f.zero().is_zero());
        let z = f.int(7).sub(&f.int(7));
        assert!(!z.is_zero()); // only zero at working precision
        assert!(z.in_p(3).unwrap());
    }

    #[test]
    fn ultrametric_inequality() {
        let f = f3();
        for a in [-10i64, -4, 2, 5, 9, 27] {
            for b in [-6i64, 1, 3, 12, 81] {
                let (x, y) = (f.int(a), f.int(b));
                let s = x.add(&y);
                if let (Valuation::Finite(vs), Valuation::Finite(vx), Valuation::Finite(vy)) =
                    (s.valuation(), x.valuation(), y.valuation())
                {
                    assert!(vs >= vx.min(vy));
                    if vx != vy {
                        assert_eq!(vs, vx.min(vy));
                    }
                }
            }
        }
    }

    #[test]
    fn inv_round_trip() {
        let f = f3();
        let x = f.ratio(7, 9);
        let y = x.inv().unwrap();
        assert!(x.mul(&y).sub(&f.one()).in_p(10).unwrap());
    }

    #[test]
    fn measure_ball_values() {
        // vol(o) = q^{1/2}, vol(p) = q^{-1/2}, ratio q per step
        assert_eq!(measure_ball(3, 0), SqrtRat::q_half_pow(3, 1));
        assert_eq!(measure_ball(3, 1), SqrtRat::q_half_pow(3, -1));
        for v in -3..4 {
            let lhs = measure_ball(5, v);
            let rhs = measure_ball(5, v + 1).scale(&BigRational::from_integer(5.into()));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn measure_times_one_plus_p_value() {
        // vol_x(1+p) = 1/(q-1)
        let m = measure_times_one_plus_p(3, 1);
        assert_eq!(m, SqrtRat::from_rational(3, BigRational::new(1.into(), 2.into())));
    }

    #[test]
    fn square_class_examples() {
        let f = f3();
        assert!(square_class(&f.int(1)).unwrap().is_square());
        // 2 is a non-residue mod 3
        assert_eq!(
            square_class(&f.int(2)).unwrap(),
            SquareClass::Odd { v_odd: false, nonresidue: true }
        );
        assert_eq!(
            square_class(&f.pi(1)).unwrap(),
            SquareClass::Odd { v_odd: true, nonresidue: false }
        );
    }

    #[test]
    fn square_class_homomorphism() {
        let f = PadicField::new(5, 10).unwrap();
        let elems: Vec<PAdic> = (1..30)
            .filter(|n| n % 5 != 0 || n / 5 % 5 != 0)
            .map(|n| f.int(n))
            .collect();
        for x in &elems {
            for y in &elems {
                let lhs = square_class(&x.mul(y)).unwrap();
                let rhs = square_class(x).unwrap().mul(&square_class(y).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn square_class_two_adic() {
        let f = PadicField::new(2, 12).unwrap();
        // -1, 2, 5 generate Q_2^*/(Q_2^*)^2 together with squares
        assert!(square_class(&f.int(1)).unwrap().is_square());
        assert!(!square_class(&f.int(-1)).unwrap().is_square());
        assert!(!square_class(&f.int(2)).unwrap().is_square());
        assert!(!square_class(&f.int(5)).unwrap().is_square());
        assert!(square_class(&f.int(9)).unwrap().is_square());
        assert!(square_class(&f.int(17)).unwrap().is_square());
    }

    #[test]
    fn mulmod_deep_modulus() {
        // modulus beyond u64
        let m = p_pow(5, 40).unwrap();
        let a = m - 3;
        let b = m - 7;
        // (m-3)(m-7) = 21 mod m
        assert_eq!(mulmod(a, b, m), 21);
        assert_eq!(mulmod(inv_mod(a, m), a, m), 1);
    }
}
