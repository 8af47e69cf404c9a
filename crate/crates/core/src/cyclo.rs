//! Exact roots of unity and finite formal sums of them over Q(sqrt q).
//!
//! Character values (additive and multiplicative) are angles, i.e. reduced
//! fractions k/n standing for e^{2 pi i k/n}. Integral accumulators collect
//! angle -> coefficient maps; `reduce` rewrites them into the canonical
//! Z-basis of the relevant cyclotomic ring so that exact identities such as
//! |Gauss sum|^2 = q can be asserted structurally.

use crate::padic::SqrtRat;
use num::complex::Complex64;
use num::{BigRational, Zero};
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::TAU;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A root of unity e^{2 pi i num/den}, stored as a reduced fraction mod 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Angle {
    num: u64,
    den: u64,
}

impl Angle {
    pub fn new(num: i64, den: u64) -> Angle {
        assert!(den > 0);
        let n = num.rem_euclid(den as i64) as u64;
        let g = gcd(n, den);
        if n == 0 {
            Angle { num: 0, den: 1 }
        } else {
            Angle { num: n / g, den: den / g }
        }
    }

    pub fn zero() -> Angle {
        Angle { num: 0, den: 1 }
    }

    pub fn half() -> Angle {
        Angle { num: 1, den: 2 }
    }

    pub fn is_one(&self) -> bool {
        self.num == 0
    }

    pub fn is_real_sign(&self) -> bool {
        self.den <= 2
    }

    /// Sign for angles 0 and 1/2.
    pub fn real_sign(&self) -> Option<i8> {
        match (self.num, self.den) {
            (0, 1) => Some(1),
            (1, 2) => Some(-1),
            _ => None,
        }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn add(&self, rhs: &Angle) -> Angle {
        let den = self.den / gcd(self.den, rhs.den) * rhs.den;
        let num = (self.num as u128 * (den / self.den) as u128
            + rhs.num as u128 * (den / rhs.den) as u128)
            % den as u128;
        Angle::new(num as i64, den)
    }

    pub fn neg(&self) -> Angle {
        if self.num == 0 {
            *self
        } else {
            Angle { num: self.den - self.num, den: self.den }
        }
    }

    pub fn pow(&self, k: i64) -> Angle {
        let r = (self.num as i128 * k as i128).rem_euclid(self.den as i128);
        Angle::new(r as i64, self.den)
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(1.0, TAU * self.num as f64 / self.den as f64)
    }
}

/// Cyclotomic polynomial Phi_n as integer coefficients (low degree first).
pub fn cyclotomic_poly(n: u64, cache: &mut HashMap<u64, Vec<i64>>) -> Vec<i64> {
    if let Some(c) = cache.get(&n) {
        return c.clone();
    }
    // x^n - 1 divided by Phi_d for all proper divisors d of n.
    let mut poly = vec![0i64; n as usize + 1];
    poly[0] = -1;
    poly[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            let phi_d = cyclotomic_poly(d, cache);
            poly = poly_div_exact(&poly, &phi_d);
        }
    }
    cache.insert(n, poly.clone());
    poly
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem: Vec<i64> = num.to_vec();
    let dd = den.len() - 1;
    let lead = den[dd];
    assert_eq!(lead, 1);
    let mut quot = vec![0i64; rem.len() - dd];
    for i in (dd..rem.len()).rev() {
        let c = rem[i];
        if c == 0 {
            continue;
        }
        let qi = i - dd;
        quot[qi] = c;
        for (j, dj) in den.iter().enumerate() {
            rem[qi + j] -= c * dj;
        }
    }
    assert!(rem.iter().all(|&c| c == 0), "non-exact cyclotomic division");
    quot
}

/// A finite formal sum  sum_theta c_theta e^{2 pi i theta}  with c in Q(sqrt q).
#[derive(Debug, Clone, PartialEq)]
pub struct CycSum {
    pub p: u64,
    pub terms: BTreeMap<Angle, SqrtRat>,
}

impl CycSum {
    pub fn zero(p: u64) -> Self {
        CycSum { p, terms: BTreeMap::new() }
    }

    pub fn one(p: u64) -> Self {
        Self::root(p, Angle::zero())
    }

    pub fn root(p: u64, a: Angle) -> Self {
        let mut t = BTreeMap::new();
        t.insert(a, SqrtRat::one(p));
        CycSum { p, terms: t }
    }

    pub fn scalar(c: SqrtRat) -> Self {
        let p = c.p;
        let mut t = BTreeMap::new();
        if !c.is_zero() {
            t.insert(Angle::zero(), c);
        }
        CycSum { p, terms: t }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, a: Angle, c: SqrtRat) {
        if c.is_zero() {
            return;
        }
        // Conductor normalization: e^{2 pi i k/(2M)} = -e^{2 pi i ((k+M)/2)/M}
        // for odd M, so denominators 2 mod 4 never appear in stored terms
        // (otherwise equal values would have distinct representations).
        if a.den() % 4 == 2 {
            let m = a.den() / 2;
            let k = (a.num() + m) / 2 % m;
            return self.add_term(Angle::new(k as i64, m), c.neg());
        }
        match self.terms.entry(a) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, rhs: &CycSum) -> CycSum {
        let mut out = self.clone();
        for (a, c) in &rhs.terms {
            out.add_term(*a, c.clone());
        }
        out
    }

    pub fn neg(&self) -> CycSum {
        let mut out = CycSum::zero(self.p);
        for (a, c) in &self.terms {
            out.add_term(*a, c.neg());
        }
        out
    }

    pub fn sub(&self, rhs: &CycSum) -> CycSum {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &CycSum) -> CycSum {
        let mut out = CycSum::zero(self.p);
        for (a, c) in &self.terms {
            for (b, d) in &rhs.terms {
                out.add_term(a.add(b), c.mul(d));
            }
        }
        out
    }

    pub fn scale(&self, c: &SqrtRat) -> CycSum {
        let mut out = CycSum::zero(self.p);
        for (a, k) in &self.terms {
            out.add_term(*a, k.mul(c));
        }
        out
    }

    /// Complex conjugate (angles negate; sqrt q coefficients are real).
    pub fn conj(&self) -> CycSum {
        let mut out = CycSum::zero(self.p);
        for (a, c) in &self.terms {
            out.add_term(a.neg(), c.clone());
        }
        out
    }

    /// Rewrites the sum in the canonical power basis of Q(zeta_N),
    /// N = lcm of the denominators, by reducing modulo Phi_N. Only applied
    /// when N is small enough for a dense reduction; deeper sums are left
    /// as-is (they never need relation rewriting in this crate).
    pub fn reduce(&self) -> CycSum {
        let mut n: u64 = 1;
        for a in self.terms.keys() {
            n = n / gcd(n, a.den()) * a.den();
            if n > 20_000 {
                return self.clone();
            }
        }
        if n == 1 {
            return self.clone();
        }
        // Dense coefficient vector over Z[zeta_n].
        let mut vec_a: Vec<BigRational> = vec![BigRational::zero(); n as usize];
        let mut vec_b: Vec<BigRational> = vec![BigRational::zero(); n as usize];
        for (a, c) in &self.terms {
            let idx = (a.num() * (n / a.den())) as usize;
            vec_a[idx] += c.a.clone();
            vec_b[idx] += c.b.clone();
        }
        let mut cache = HashMap::new();
        let phi = cyclotomic_poly(n, &mut cache);
        reduce_mod_phi(&mut vec_a, &phi);
        reduce_mod_phi(&mut vec_b, &phi);
        let mut out = CycSum::zero(self.p);
        for (k, (ca, cb)) in vec_a.into_iter().zip(vec_b.into_iter()).enumerate() {
            let coef = SqrtRat { p: self.p, a: ca, b: cb };
            if !coef.is_zero() {
                out.add_term(Angle::new(k as i64, n), coef);
            }
        }
        out
    }

    /// After reduction: Some(value) if the sum is an element of Q(sqrt q)
    /// (only the trivial angle remains, possibly with a sign at 1/2).
    pub fn as_sqrt_rat(&self) -> Option<SqrtRat> {
        let r = self.reduce();
        let mut acc = SqrtRat::zero(self.p);
        for (a, c) in &r.terms {
            match a.real_sign() {
                Some(1) => acc = acc.add(c),
                Some(-1) => acc = acc.sub(c),
                _ => return None,
            }
        }
        Some(acc)
    }

    /// Exact Gaussian-rational recognition: value = x + i y with x, y of the
    /// form a + b sqrt q. Works for sums supported on quarter angles.
    pub fn as_gaussian(&self) -> Option<(SqrtRat, SqrtRat)> {
        let r = self.reduce();
        let mut re = SqrtRat::zero(self.p);
        let mut im = SqrtRat::zero(self.p);
        for (a, c) in &r.terms {
            match (a.num(), a.den()) {
                (0, 1) => re = re.add(c),
                (1, 2) => re = re.sub(c),
                (1, 4) => im = im.add(c),
                (3, 4) => im = im.sub(c),
                _ => return None,
            }
        }
        Some((re, im))
    }

    pub fn to_complex(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, c) in &self.terms {
            acc += a.to_complex() * c.to_f64();
        }
        acc
    }
}

fn reduce_mod_phi(vec: &mut Vec<BigRational>, phi: &[i64]) {
    let deg = phi.len() - 1;
    for i in (deg..vec.len()).rev() {
        if vec[i].is_zero() {
            continue;
        }
        let c = std::mem::replace(&mut vec[i], BigRational::zero());
        for (j, pj) in phi.iter().enumerate().take(deg) {
            if *pj != 0 {
                let delta = &c * BigRational::from_integer((*pj).into());
                vec[i - deg + j] -= delta;
            }
        }
    }
    vec.truncate(deg.max(1));
    while vec.len() < deg.max(1) {
        vec.push(BigRational::zero());
    }
}

/// e^{2 pi i /n} summed over all primitive n-th roots is mu(n); quick sanity
/// helper for tests.
pub fn angle_sum_all(p: u64, n: u64) -> CycSum {
    let mut s = CycSum::zero(p);
    for k in 0..n {
        s.add_term(Angle::new(k as i64, n), SqrtRat::one(p));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;

    #[test]
    fn angle_arithmetic() {
        let a = Angle::new(1, 3);
        let b = Angle::new(1, 3);
        assert_eq!(a.add(&b), Angle::new(2, 3));
        assert_eq!(a.add(&b).add(&a), Angle::zero());
        assert_eq!(a.neg(), Angle::new(2, 3));
        assert_eq!(Angle::new(5, 10), Angle::half());
    }

    #[test]
    fn cyclotomic_polys() {
        let mut cache = HashMap::new();
        assert_eq!(cyclotomic_poly(1, &mut cache), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(2, &mut cache), vec![1, 1]);
        assert_eq!(cyclotomic_poly(3, &mut cache), vec![1, 1, 1]);
        assert_eq!(cyclotomic_poly(4, &mut cache), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(12, &mut cache), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn full_root_sum_vanishes() {
        // 1 + zeta_5 + ... + zeta_5^4 = 0
        let s = angle_sum_all(5, 5).reduce();
        assert!(s.is_zero());
    }

    #[test]
    fn real_recognition() {
        // zeta_3 + zeta_3^2 = -1
        let mut s = CycSum::zero(3);
        s.add_term(Angle::new(1, 3), SqrtRat::one(3));
        s.add_term(Angle::new(2, 3), SqrtRat::one(3));
        let v = s.as_sqrt_rat().unwrap();
        assert_eq!(v, SqrtRat::from_rational(3, BigRational::from_integer(BigInt::from(-1))));
    }

    #[test]
    fn gauss_sum_norm_squared() {
        // g = zeta_3 - zeta_3^2; g * conj(g) = 3
        let mut g = CycSum::zero(3);
        g.add_term(Angle::new(1, 3), SqrtRat::one(3));
        g.add_term(Angle::new(2, 3), SqrtRat::one(3).neg());
        let norm = g.mul(&g.conj()).as_sqrt_rat().unwrap();
        assert_eq!(norm, SqrtRat::from_int(3, 3));
    }
}
