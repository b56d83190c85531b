//! Finite fields GF(p^k) in Zech-logarithm form.
//!
//! Elements are discrete logarithms with respect to a fixed generator `g`
//! whose minimal polynomial is the lex-least primitive polynomial of degree k.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Field element. Code 0 is zero, code `l + 1` is `g^l`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Fe(u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Discrete logarithm, `None` for zero.
    pub fn log(self) -> Option<u64> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0 as u64 - 1)
        }
    }

    /// Raw ordering key: zero first, then by discrete log.
    pub fn code(self) -> u32 {
        self.0
    }
}

pub struct Gf {
    p: u64,
    k: u32,
    size: u64,
    modulus: Vec<u64>,
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
}

impl fmt::Debug for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p, self.k)
    }
}

impl PartialEq for Gf {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k
    }
}

const MAX_FIELD_SIZE: u64 = 1 << 22;

fn cache() -> &'static Mutex<HashMap<(u64, u32), Arc<Gf>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Arc<Gf>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `q = p^k` with p prime.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q && q % p != 0 {
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let mut k = 0;
    let mut r = q;
    while r % p == 0 {
        r /= p;
        k += 1;
    }
    if r == 1 && is_prime(p) {
        Some((p, k))
    } else {
        None
    }
}

impl Gf {
    /// Shared field of order `p^k`.
    pub fn new(p: u64, k: u32) -> Result<Arc<Gf>> {
        if !is_prime(p) || k == 0 {
            return Err(Error::Schema(format!("GF({p}^{k}) is not a field")));
        }
        let size = p
            .checked_pow(k)
            .filter(|s| *s <= MAX_FIELD_SIZE)
            .ok_or_else(|| Error::BudgetExceeded(format!("field GF({p}^{k}) too large")))?;
        let mut guard = cache().lock().expect("field cache poisoned");
        if let Some(f) = guard.get(&(p, k)) {
            return Ok(f.clone());
        }
        let f = Arc::new(Self::build(p, k, size));
        guard.insert((p, k), f.clone());
        Ok(f)
    }

    /// Field with `q` elements.
    pub fn with_order(q: u64) -> Result<Arc<Gf>> {
        let (p, k) = prime_power(q).ok_or_else(|| Error::Schema(format!("{q} is not a prime power")))?;
        Self::new(p, k)
    }

    fn build(p: u64, k: u32, size: u64) -> Gf {
        let n = (size - 1) as usize;
        let mut cand = vec![0u64; k as usize];
        loop {
            if cand[0] != 0 {
                if let Some(exp) = Self::powers_if_primitive(p, &cand, n) {
                    let mut log = vec![0u32; size as usize];
                    for (l, &c) in exp.iter().enumerate() {
                        log[c as usize] = l as u32;
                    }
                    let mut zech = vec![0u32; n];
                    for (l, z) in zech.iter_mut().enumerate() {
                        let c = exp[l] as u64;
                        let d0 = c % p;
                        let c1 = if d0 + 1 == p { c - d0 } else { c + 1 };
                        *z = if c1 == 0 { 0 } else { log[c1 as usize] + 1 };
                    }
                    let mut modulus = cand.clone();
                    modulus.push(1);
                    return Gf { p, k, size, modulus, exp, log, zech };
                }
            }
            // next candidate, most significant digit is the highest coefficient
            let mut i = 0;
            loop {
                cand[i] += 1;
                if cand[i] < p {
                    break;
                }
                cand[i] = 0;
                i += 1;
                assert!(i < cand.len(), "no primitive polynomial found");
            }
        }
    }

    /// Codes of `x^0, x^1, ...` modulo `x^k + c_{k-1}x^{k-1} + ... + c_0`, if x has order `n`.
    fn powers_if_primitive(p: u64, c: &[u64], n: usize) -> Option<Vec<u32>> {
        let k = c.len();
        let mut digits = vec![0u64; k];
        digits[0] = 1;
        let mut out = Vec::with_capacity(n);
        for step in 0..n {
            let code = digits.iter().rev().fold(0u64, |acc, &d| acc * p + d);
            if step > 0 && code == 1 {
                return None;
            }
            out.push(code as u32);
            let top = digits[k - 1];
            for i in (1..k).rev() {
                digits[i] = digits[i - 1];
            }
            digits[0] = 0;
            for i in 0..k {
                digits[i] = (digits[i] + (p - c[i]) * top) % p;
            }
        }
        let code = digits.iter().rev().fold(0u64, |acc, &d| acc * p + d);
        (code == 1).then_some(out)
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u64 {
        self.size
    }

    /// Order of the multiplicative group.
    pub fn units(&self) -> u64 {
        self.size - 1
    }

    /// Minimal polynomial of the generator over GF(p), low degree first.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn from_log(&self, l: i64) -> Fe {
        let n = self.units() as i64;
        Fe((l.rem_euclid(n) + 1) as u32)
    }

    pub fn generator(&self) -> Fe {
        self.from_log(1)
    }

    /// Element from its packed base-p coefficient code.
    pub fn from_int(&self, code: u64) -> Fe {
        let code = code % self.size;
        if code == 0 {
            Fe::ZERO
        } else {
            Fe(self.log[code as usize] + 1)
        }
    }

    /// Integer `n` mapped through the prime field.
    pub fn from_i64(&self, n: i64) -> Fe {
        self.from_int(n.rem_euclid(self.p as i64) as u64)
    }

    pub fn to_int(&self, a: Fe) -> u64 {
        match a.log() {
            None => 0,
            Some(l) => self.exp[l as usize] as u64,
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.size as u32).map(Fe)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = Fe> {
        (1..self.size as u32).map(Fe)
    }

    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        match (a.log(), b.log()) {
            (Some(x), Some(y)) => Fe(((x + y) % self.units()) as u32 + 1),
            _ => Fe::ZERO,
        }
    }

    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let (x, y) = match (a.log(), b.log()) {
            (None, _) => return b,
            (_, None) => return a,
            (Some(x), Some(y)) => (x, y),
        };
        let n = self.units();
        let z = self.zech[((y + n - x) % n) as usize];
        if z == 0 {
            Fe::ZERO
        } else {
            Fe(((x + z as u64 - 1) % n) as u32 + 1)
        }
    }

    pub fn neg(&self, a: Fe) -> Fe {
        if self.p == 2 {
            a
        } else {
            self.mul(a, self.from_log((self.units() / 2) as i64))
        }
    }

    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        let l = a.log().ok_or(Error::DivisionByZero)?;
        Ok(self.from_log(-(l as i64)))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fe, e: i64) -> Fe {
        match a.log() {
            None if e == 0 => Fe::ONE,
            None => Fe::ZERO,
            Some(l) => {
                let n = self.units() as i128;
                self.from_log(((l as i128 * e as i128).rem_euclid(n)) as i64)
            }
        }
    }

    /// `a^(p^j)`, j taken modulo k.
    pub fn frob(&self, a: Fe, j: i64) -> Fe {
        let j = j.rem_euclid(self.k as i64) as u32;
        match a.log() {
            None => Fe::ZERO,
            Some(l) => {
                let n = self.units() as u128;
                let pj = (self.p as u128).pow(j) % n;
                Fe(((l as u128 * pj) % n) as u32 + 1)
            }
        }
    }

    /// `a^(p^(d j))`: the j-th power of the `p^d`-Frobenius.
    pub fn frob_q(&self, a: Fe, d: u32, j: i64) -> Fe {
        self.frob(a, d as i64 * j)
    }

    /// Whether `a` lies in the subfield GF(p^d); requires d | k.
    pub fn in_subfield(&self, a: Fe, d: u32) -> bool {
        self.frob(a, d as i64) == a
    }

    /// Elements of the subfield GF(p^d), zero first.
    pub fn subfield(&self, d: u32) -> Vec<Fe> {
        assert!(self.k % d == 0, "GF(p^{d}) is not a subfield of GF(p^{})", self.k);
        let sub = self.p.pow(d) - 1;
        let step = self.units() / sub;
        std::iter::once(Fe::ZERO)
            .chain((0..sub).map(|i| self.from_log((i * step) as i64)))
            .collect()
    }

    /// Norm to the subfield GF(p^d).
    pub fn norm_to(&self, a: Fe, d: u32) -> Fe {
        let sub = self.p.pow(d) - 1;
        self.pow(a, (self.units() / sub) as i64)
    }

    /// Trace to the subfield GF(p^d).
    pub fn trace_to(&self, a: Fe, d: u32) -> Fe {
        let mut acc = Fe::ZERO;
        for j in 0..(self.k / d) {
            acc = self.add(acc, self.frob(a, (d * j) as i64));
        }
        acc
    }

    /// Exponent c such that `small`'s generator maps to g^c under an embedding GF(p^a) ⊆ GF(p^k).
    pub fn embedding_exponent(&self, small: &Gf) -> Result<u64> {
        if small.p != self.p || self.k % small.k != 0 {
            return Err(Error::Schema(format!("GF({}^{}) does not embed in GF({}^{})", small.p, small.k, self.p, self.k)));
        }
        let step = self.units() / small.units();
        for j in 1..=small.units() {
            if num_integer::gcd(j, small.units()) != 1 {
                continue;
            }
            let x = self.from_log((step * j) as i64);
            let val = small.modulus.iter().rev().fold(Fe::ZERO, |acc, &m| self.add(self.mul(acc, x), self.from_i64(m as i64)));
            if val.is_zero() {
                return Ok(step * j);
            }
        }
        unreachable!("the generator's minimal polynomial splits in every extension")
    }

    /// Image of `a` under the embedding with exponent `c`.
    pub fn embed(&self, c: u64, a: Fe) -> Fe {
        match a.log() {
            None => Fe::ZERO,
            Some(l) => self.from_log(((l as u128 * c as u128) % self.units() as u128) as i64),
        }
    }

    /// Multiplicative order of a nonzero element.
    pub fn mult_order(&self, a: Fe) -> u64 {
        let l = a.log().expect("order of zero");
        self.units() / num_integer::gcd(l, self.units())
    }

    /// Sum of `terms`.
    pub fn sum<I: IntoIterator<Item = Fe>>(&self, terms: I) -> Fe {
        terms.into_iter().fold(Fe::ZERO, |acc, x| self.add(acc, x))
    }

    /// Product of `terms`.
    pub fn product<I: IntoIterator<Item = Fe>>(&self, terms: I) -> Fe {
        terms.into_iter().fold(Fe::ONE, |acc, x| self.mul(acc, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_power_detection() {
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(13), Some((13, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn gf9_arithmetic_matches_packed_codes() {
        let f = Gf::new(3, 2).unwrap();
        // packed polynomial arithmetic over GF(3)[x]/(modulus) as oracle
        let m = f.modulus().to_vec();
        let mulcode = |a: u64, b: u64| -> u64 {
            let (a0, a1, b0, b1) = (a % 3, a / 3, b % 3, b / 3);
            let (c0, c1, c2) = (a0 * b0, a0 * b1 + a1 * b0, a1 * b1);
            let r0 = (c0 + 9 * 3 - c2 * m[0]) % 3;
            let r1 = (c1 + 9 * 3 - c2 * m[1]) % 3;
            r0 + 3 * r1
        };
        for a in 0..9u64 {
            for b in 0..9u64 {
                let fa = f.from_int(a);
                let fb = f.from_int(b);
                assert_eq!(f.to_int(f.mul(fa, fb)), mulcode(a, b));
                let s = (a % 3 + b % 3) % 3 + 3 * ((a / 3 + b / 3) % 3);
                assert_eq!(f.to_int(f.add(fa, fb)), s);
            }
        }
    }

    #[test]
    fn generator_is_primitive_and_frobenius_is_additive() {
        for (p, k) in [(2, 3), (2, 4), (3, 3), (5, 2), (7, 1), (13, 1)] {
            let f = Gf::new(p, k).unwrap();
            assert_eq!(f.mult_order(f.generator()), f.units());
            for a in f.elements() {
                for b in f.elements().step_by(3) {
                    assert_eq!(f.frob(f.add(a, b), 1), f.add(f.frob(a, 1), f.frob(b, 1)));
                }
            }
        }
    }

    #[test]
    fn subfield_norm_lands_in_subfield() {
        let f = Gf::new(3, 4).unwrap();
        for a in f.nonzero() {
            assert!(f.in_subfield(f.norm_to(a, 1), 1));
            assert!(f.in_subfield(f.norm_to(a, 2), 2));
        }
        assert_eq!(f.subfield(2).len(), 9);
    }

    #[test]
    fn negation_and_inverse() {
        let f = Gf::new(5, 1).unwrap();
        for a in 0..5 {
            let x = f.from_int(a);
            assert_eq!(f.to_int(f.neg(x)), (5 - a) % 5);
            if a != 0 {
                assert_eq!(f.mul(x, f.inv(x).unwrap()), Fe::ONE);
            }
        }
        assert!(f.inv(Fe::ZERO).is_err());
    }

    #[test]
    fn embeddings_are_ring_maps() {
        for (p, a, b) in [(2u64, 2u32, 6u32), (3, 1, 2), (5, 2, 4), (7, 1, 3)] {
            let small = Gf::new(p, a).unwrap();
            let big = Gf::new(p, b).unwrap();
            let c = big.embedding_exponent(&small).unwrap();
            for x in small.elements() {
                for y in small.elements() {
                    assert_eq!(big.embed(c, small.add(x, y)), big.add(big.embed(c, x), big.embed(c, y)));
                    assert_eq!(big.embed(c, small.mul(x, y)), big.mul(big.embed(c, x), big.embed(c, y)));
                }
            }
        }
        assert!(Gf::new(2, 3).unwrap().embedding_exponent(&Gf::new(2, 2).unwrap()).is_err());
    }
}
