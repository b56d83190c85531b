//! Dense univariate polynomials over a finite field, with factorization over a subfield.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::Rng;

use crate::error::{Error, Result};
use crate::ff::{Fe, Gf};

/// Coefficients little-endian; no trailing zeros, so the zero polynomial is empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly(Vec<Fe>);

impl Poly {
    pub fn new(mut c: Vec<Fe>) -> Poly {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly(c)
    }

    pub fn zero() -> Poly {
        Poly(vec![])
    }

    pub fn one() -> Poly {
        Poly(vec![Fe::ONE])
    }

    pub fn constant(c: Fe) -> Poly {
        Poly::new(vec![c])
    }

    pub fn monomial(c: Fe, k: usize) -> Poly {
        let mut v = vec![Fe::ZERO; k + 1];
        v[k] = c;
        Poly::new(v)
    }

    pub fn x() -> Poly {
        Poly::monomial(Fe::ONE, 1)
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.0
    }

    pub fn coeff(&self, i: usize) -> Fe {
        self.0.get(i).copied().unwrap_or(Fe::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> Fe {
        self.0.last().copied().unwrap_or(Fe::ZERO)
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == Fe::ONE
    }

    pub fn add(&self, f: &Gf, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new((0..n).map(|i| f.add(self.coeff(i), o.coeff(i))).collect())
    }

    pub fn sub(&self, f: &Gf, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new((0..n).map(|i| f.sub(self.coeff(i), o.coeff(i))).collect())
    }

    pub fn neg(&self, f: &Gf) -> Poly {
        Poly(self.0.iter().map(|&c| f.neg(c)).collect())
    }

    pub fn scale(&self, f: &Gf, c: Fe) -> Poly {
        Poly::new(self.0.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn mul(&self, f: &Gf, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Fe::ZERO; self.0.len() + o.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in o.0.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Poly::new(out)
    }

    pub fn divrem(&self, f: &Gf, d: &Poly) -> Result<(Poly, Poly)> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let inv = f.inv(d.lead())?;
        let mut r = self.0.clone();
        if r.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut q = vec![Fe::ZERO; r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = f.mul(r[i + dd], inv);
            if c.is_zero() {
                continue;
            }
            q[i] = c;
            for (j, &dj) in d.0.iter().enumerate() {
                r[i + j] = f.sub(r[i + j], f.mul(c, dj));
            }
        }
        Ok((Poly::new(q), Poly::new(r)))
    }

    pub fn rem(&self, f: &Gf, d: &Poly) -> Result<Poly> {
        Ok(self.divrem(f, d)?.1)
    }

    pub fn monic(&self, f: &Gf) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(f, f.inv(self.lead()).expect("nonzero lead"))
    }

    /// Monic gcd; gcd(0, 0) = 0.
    pub fn gcd(&self, f: &Gf, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(f, &b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic(f)
    }

    /// Bezout coefficients (s, t, g) with s·a + t·b = g monic.
    pub fn xgcd(&self, f: &Gf, o: &Poly) -> (Poly, Poly, Poly) {
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (Poly::one(), Poly::zero());
        let (mut t0, mut t1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() {
            let (q, r) = r0.divrem(f, &r1).expect("nonzero divisor");
            let s2 = s0.sub(f, &q.mul(f, &s1));
            let t2 = t0.sub(f, &q.mul(f, &t1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
            t0 = std::mem::replace(&mut t1, t2);
        }
        if r0.is_zero() {
            return (s0, t0, r0);
        }
        let c = f.inv(r0.lead()).expect("nonzero lead");
        (s0.scale(f, c), t0.scale(f, c), r0.scale(f, c))
    }

    pub fn eval(&self, f: &Gf, x: Fe) -> Fe {
        self.0.iter().rev().fold(Fe::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn derivative(&self, f: &Gf) -> Poly {
        Poly::new(self.0.iter().enumerate().skip(1).map(|(i, &c)| f.mul(f.from_i64(i as i64), c)).collect())
    }

    /// `self^e mod m`.
    pub fn powmod(&self, f: &Gf, mut e: u128, m: &Poly) -> Poly {
        let mut base = self.rem(f, m).expect("nonzero modulus");
        let mut acc = Poly::one().rem(f, m).expect("nonzero modulus");
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(f, &base).rem(f, m).expect("nonzero modulus");
            }
            base = base.mul(f, &base).rem(f, m).expect("nonzero modulus");
            e >>= 1;
        }
        acc
    }

    /// Apply a field map to every coefficient.
    pub fn map(&self, g: impl Fn(Fe) -> Fe) -> Poly {
        Poly::new(self.0.iter().map(|&c| g(c)).collect())
    }

    /// Whether every coefficient lies in GF(p^d).
    pub fn over_subfield(&self, f: &Gf, d: u32) -> bool {
        self.0.iter().all(|&c| f.in_subfield(c, d))
    }
}

/// All monic polynomials of degree `deg` with coefficients from `elems`, in lex order
/// with the highest non-leading coefficient most significant.
pub fn monic_polys(elems: &[Fe], deg: usize) -> impl Iterator<Item = Poly> + '_ {
    let base = elems.len();
    let total = base.checked_pow(deg as u32).expect("enumeration too large");
    (0..total).map(move |mut idx| {
        let mut c = vec![Fe::ZERO; deg + 1];
        c[deg] = Fe::ONE;
        for slot in c.iter_mut().take(deg) {
            *slot = elems[idx % base];
            idx /= base;
        }
        Poly::new(c)
    })
}

/// Polynomials over GF(p^d) inside a larger field `f`.
pub struct SubfieldPolys<'a> {
    f: &'a Gf,
    d: u32,
}

impl<'a> SubfieldPolys<'a> {
    pub fn new(f: &'a Gf, d: u32) -> Self {
        assert!(f.degree() % d == 0, "not a subfield");
        SubfieldPolys { f, d }
    }

    fn q(&self) -> u128 {
        (self.f.characteristic() as u128).pow(self.d)
    }

    /// Monic irreducible factors with multiplicity, sorted.
    pub fn factor(&self, g: &Poly, seed: u64) -> Vec<(Poly, usize)> {
        assert!(g.over_subfield(self.f, self.d), "coefficients outside the subfield");
        let mut out = Vec::new();
        if g.degree().unwrap_or(0) == 0 {
            return out;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (sq, mult) in self.squarefree(&g.monic(self.f)) {
            for (part, deg) in self.distinct_degree(&sq) {
                for irr in self.equal_degree(&part, deg, &mut rng) {
                    out.push((irr, mult));
                }
            }
        }
        out.sort();
        let mut merged: Vec<(Poly, usize)> = Vec::new();
        for (p, m) in out {
            match merged.last_mut() {
                Some((lp, lm)) if *lp == p => *lm += m,
                _ => merged.push((p, m)),
            }
        }
        merged
    }

    pub fn is_irreducible(&self, g: &Poly) -> bool {
        let f = self.factor(g, 0);
        f.len() == 1 && f[0].1 == 1
    }

    fn pth_root(&self, g: &Poly) -> Poly {
        let p = self.f.characteristic() as usize;
        let c: Vec<Fe> = g.coeffs().iter().step_by(p).map(|&a| self.f.frob(a, -1)).collect();
        Poly::new(c)
    }

    /// Squarefree parts `(s, i)` with g = Π s^i.
    fn squarefree(&self, g: &Poly) -> Vec<(Poly, usize)> {
        let f = self.f;
        let p = f.characteristic() as usize;
        let mut out = Vec::new();
        let dg = g.derivative(f);
        if dg.is_zero() {
            for (s, i) in self.squarefree(&self.pth_root(g)) {
                out.push((s, i * p));
            }
            return out;
        }
        let mut c = g.gcd(f, &dg);
        let mut w = g.divrem(f, &c).expect("gcd divides").0;
        let mut i = 1;
        while w.degree().unwrap_or(0) > 0 {
            let y = w.gcd(f, &c);
            let fac = w.divrem(f, &y).expect("gcd divides").0;
            if fac.degree().unwrap_or(0) > 0 {
                out.push((fac, i));
            }
            w = y;
            c = c.divrem(f, &w).expect("gcd divides").0;
            i += 1;
        }
        if c.degree().unwrap_or(0) > 0 {
            for (s, j) in self.squarefree(&self.pth_root(&c)) {
                out.push((s, j * p));
            }
        }
        out
    }

    fn distinct_degree(&self, g: &Poly) -> Vec<(Poly, usize)> {
        let f = self.f;
        let mut out = Vec::new();
        let mut rest = g.clone();
        let mut xq = Poly::x();
        let mut d = 1;
        while rest.degree().unwrap_or(0) >= 2 * d {
            xq = xq.powmod(f, self.q(), &rest);
            let h = xq.sub(f, &Poly::x()).gcd(f, &rest);
            if h.degree().unwrap_or(0) > 0 {
                rest = rest.divrem(f, &h).expect("gcd divides").0;
                xq = xq.rem(f, &rest).expect("nonzero");
                out.push((h, d));
            }
            d += 1;
        }
        if let Some(dr) = rest.degree().filter(|&n| n > 0) {
            out.push((rest, dr));
        }
        out
    }

    fn random_poly(&self, deg: usize, rng: &mut ChaCha8Rng) -> Poly {
        let sub = self.q() as u64 - 1;
        let step = self.f.units() / sub;
        Poly::new(
            (0..deg)
                .map(|_| {
                    let i = rng.gen_range(0..=sub);
                    if i == sub { Fe::ZERO } else { self.f.from_log((i * step) as i64) }
                })
                .collect(),
        )
    }

    /// Cantor–Zassenhaus splitting of a product of distinct degree-`d` irreducibles.
    fn equal_degree(&self, g: &Poly, d: usize, rng: &mut ChaCha8Rng) -> Vec<Poly> {
        let f = self.f;
        let n = g.degree().expect("nonzero");
        if n == d {
            return vec![g.clone()];
        }
        loop {
            let r = self.random_poly(n, rng);
            let s = if f.characteristic() == 2 {
                // trace to GF(2) of GF(q^d)
                let mut acc = Poly::zero();
                let mut t = r.rem(f, g).expect("nonzero");
                for _ in 0..(self.d as usize * d) {
                    acc = acc.add(f, &t);
                    t = t.mul(f, &t).rem(f, g).expect("nonzero");
                }
                acc
            } else {
                let e = (self.q().pow(d as u32) - 1) / 2;
                r.powmod(f, e, g).sub(f, &Poly::one())
            };
            let h = s.gcd(f, g);
            let hd = h.degree().unwrap_or(0);
            if hd > 0 && hd < n {
                let mut out = self.equal_degree(&h, d, rng);
                out.extend(self.equal_degree(&g.divrem(f, &h).expect("gcd divides").0, d, rng));
                return out;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    /// Number of monic irreducibles of degree n over GF(q).
    fn necklace(q: u64, n: u32) -> u64 {
        let mu = |k: u32| -> i64 {
            let (mut k, mut res, mut p) = (k, 1i64, 2);
            while p * p <= k {
                if k % p == 0 {
                    k /= p;
                    if k % p == 0 {
                        return 0;
                    }
                    res = -res;
                }
                p += 1;
            }
            if k > 1 { -res } else { res }
        };
        let s: i64 = (1..=n).filter(|d| n % d == 0).map(|d| mu(n / d) * (q as i64).pow(d)).sum();
        (s / n as i64) as u64
    }

    /// Irreducible iff no monic factor of degree ≤ n/2 divides.
    fn brute_irreducible(f: &Gf, elems: &[Fe], g: &Poly) -> bool {
        let n = g.degree().unwrap();
        (1..=n / 2).all(|d| monic_polys(elems, d).all(|h| !g.rem(f, &h).unwrap().is_zero()))
    }

    #[test]
    fn division_identity() {
        let f = Gf::new(3, 2).unwrap();
        let a = Poly::new(vec![f.from_log(1), f.from_log(5), Fe::ZERO, Fe::ONE]);
        let b = Poly::new(vec![f.from_log(3), Fe::ONE]);
        let (q, r) = a.divrem(&f, &b).unwrap();
        assert_eq!(q.mul(&f, &b).add(&f, &r), a);
        assert!(r.degree().unwrap_or(0) < 1);
        assert_eq!(a.divrem(&f, &Poly::zero()), Err(Error::DivisionByZero));
    }

    #[test]
    fn irreducible_counts_match_necklace_formula() {
        for (p, k, d) in [(2u64, 1u32, 1u32), (2, 2, 1), (3, 2, 1), (3, 2, 2), (2, 4, 2)] {
            let f = Gf::new(p, k).unwrap();
            let sp = SubfieldPolys::new(&f, d);
            let elems = f.subfield(d);
            let q = p.pow(d);
            for n in 1..=4usize {
                let count = monic_polys(&elems, n).filter(|g| sp.is_irreducible(g)).count() as u64;
                assert_eq!(count, necklace(q, n as u32), "q={q} n={n}");
            }
        }
    }

    #[test]
    fn irreducibility_agrees_with_trial_division() {
        let f = Gf::new(5, 1).unwrap();
        let sp = SubfieldPolys::new(&f, 1);
        let elems = f.subfield(1);
        for g in monic_polys(&elems, 4) {
            assert_eq!(sp.is_irreducible(&g), brute_irreducible(&f, &elems, &g), "{g:?}");
        }
    }

    #[test]
    fn xgcd_bezout() {
        let f = Gf::new(7, 1).unwrap();
        let a = Poly::new(vec![f.from_i64(1), f.from_i64(3), f.from_i64(1)]);
        let b = Poly::new(vec![f.from_i64(2), f.from_i64(1)]);
        let (s, t, g) = a.xgcd(&f, &b);
        assert_eq!(s.mul(&f, &a).add(&f, &t.mul(&f, &b)), g);
        assert_eq!(g, a.gcd(&f, &b));
    }

    fn arb_factor_input() -> impl Strategy<Value = (u64, u32, u32, Vec<Vec<u32>>)> {
        prop::sample::select(vec![(2u64, 2u32, 1u32), (3, 2, 1), (3, 2, 2), (2, 3, 3), (5, 1, 1), (7, 2, 1), (2, 4, 2)])
            .prop_flat_map(|(p, k, d)| {
                let q = p.pow(d) as u32;
                (Just(p), Just(k), Just(d), prop::collection::vec(prop::collection::vec(0..q, 1..4), 1..4))
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]
        #[test]
        fn factorization_reassembles((p, k, d, parts) in arb_factor_input()) {
            let f = Gf::new(p, k).unwrap();
            let elems = f.subfield(d);
            let sp = SubfieldPolys::new(&f, d);
            let mut g = Poly::one();
            for c in &parts {
                let mut v: Vec<Fe> = c.iter().map(|&i| elems[i as usize]).collect();
                v.push(Fe::ONE);
                g = g.mul(&f, &Poly::new(v));
            }
            let fac = sp.factor(&g, 7);
            let mut back = Poly::one();
            let mut seen = BTreeMap::new();
            for (h, m) in &fac {
                prop_assert!(h.is_monic() && h.over_subfield(&f, d));
                prop_assert!(brute_irreducible(&f, &elems, h));
                prop_assert!(seen.insert(h.clone(), *m).is_none());
                for _ in 0..*m {
                    back = back.mul(&f, h);
                }
            }
            prop_assert_eq!(back, g);
        }
    }
}
