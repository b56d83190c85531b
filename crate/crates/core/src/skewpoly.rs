//! Twisted polynomial rings T = D[x;σ] with D = GF(q^m) and σ = Frob_q^s.
//!
//! The centre is R = K[y] with K the fixed field of σ and y = x^ℓ, ℓ the order of σ.
//! Simple left T-modules correspond one-to-one with monic irreducible π ∈ K[y] via
//! annihilators, so divisor classes are keyed by π and labelled by the lex-least monic
//! irreducible in the class.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::abgroup::{IntMatrix, Lattice};
use crate::error::{Error, Result};
use crate::ff::{Fe, Gf};
use crate::linalg::FMat;
use crate::poly::{monic_polys, Poly, SubfieldPolys};

/// Candidates tried before a label search gives up.
const LABEL_BUDGET: usize = 1 << 22;

/// Element of D[x;σ], coefficients on the left, little-endian.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SkewPoly(Poly);

impl SkewPoly {
    pub fn new(c: Vec<Fe>) -> Self {
        SkewPoly(Poly::new(c))
    }

    pub fn zero() -> Self {
        SkewPoly(Poly::zero())
    }

    pub fn one() -> Self {
        SkewPoly(Poly::one())
    }

    pub fn constant(c: Fe) -> Self {
        SkewPoly(Poly::constant(c))
    }

    /// c·x^k
    pub fn monomial(c: Fe, k: usize) -> Self {
        SkewPoly(Poly::monomial(c, k))
    }

    pub fn x() -> Self {
        SkewPoly(Poly::x())
    }

    pub fn coeffs(&self) -> &[Fe] {
        self.0.coeffs()
    }

    pub fn coeff(&self, i: usize) -> Fe {
        self.0.coeff(i)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.degree()
    }

    pub fn lead(&self) -> Fe {
        self.0.lead()
    }

    pub fn is_monic(&self) -> bool {
        self.0.is_monic()
    }

    fn deg0(&self) -> usize {
        self.degree().unwrap_or(0)
    }
}

/// `{"q", "m", "s"}`: D = GF(q^m), σ = Frob_q^s.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkewRingSpec {
    pub q: u64,
    pub m: u32,
    pub s: u32,
}

pub struct SkewPolyRing {
    spec: SkewRingSpec,
    field: Arc<Gf>,
    qdeg: u32,
    ell: u32,
    /// Prime-field degree of K.
    kdeg: u32,
    /// Inverse Gram matrix of the trace form on the K-basis 1, g, …, g^{ℓ-1}.
    gram_inv: FMat,
    labels: Mutex<HashMap<Poly, SkewPoly>>,
}

impl fmt::Debug for SkewPolyRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})[x; Frob^{}]", self.spec.q, self.spec.m, self.spec.s)
    }
}

/// f = unit · factors[0] ⋯ factors[k-1], each factor monic irreducible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub unit: Fe,
    pub factors: Vec<SkewPoly>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisorTerm {
    pub label: SkewPoly,
    pub multiplicity: i64,
}

/// Element of Div(T), keyed by the central annihilator π of each simple class.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Divisor {
    terms: BTreeMap<Poly, DivisorTerm>,
}

impl Divisor {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &BTreeMap<Poly, DivisorTerm> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn multiplicity(&self, key: &Poly) -> i64 {
        self.terms.get(key).map_or(0, |t| t.multiplicity)
    }

    fn add_term(&mut self, key: Poly, label: SkewPoly, k: i64) {
        let e = self.terms.entry(key.clone()).or_insert(DivisorTerm { label, multiplicity: 0 });
        e.multiplicity += k;
        if e.multiplicity == 0 {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, o: &Divisor) -> Divisor {
        let mut out = self.clone();
        for (k, t) in &o.terms {
            out.add_term(k.clone(), t.label.clone(), t.multiplicity);
        }
        out
    }

    pub fn scale(&self, n: i64) -> Divisor {
        let mut out = Divisor::zero();
        for (k, t) in &self.terms {
            out.add_term(k.clone(), t.label.clone(), n * t.multiplicity);
        }
        out
    }

    pub fn sub(&self, o: &Divisor) -> Divisor {
        self.add(&o.scale(-1))
    }

    /// Total D-dimension Σ m·deg.
    pub fn degree(&self) -> i64 {
        self.terms.values().map(|t| t.multiplicity * t.label.deg0() as i64).sum()
    }
}

/// Element of Div(K[y]): monic irreducible π ↦ multiplicity.
pub type CentralDivisor = BTreeMap<Poly, i64>;

fn central_add(d: &mut CentralDivisor, pi: Poly, k: i64) {
    let e = d.entry(pi.clone()).or_insert(0);
    *e += k;
    if *e == 0 {
        d.remove(&pi);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DivisorEntry {
    pub class_label: String,
    pub multiplicity: i64,
}

/// One move h = (p·f1)(g1·q·g2)^{-1} ≡ (f1·t)(g1·g2·s)^{-1} modulo commutators, where ps = tq.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionStep {
    pub numerator: SkewPoly,
    pub denominator: SkewPoly,
    pub p: SkewPoly,
    pub f1: SkewPoly,
    pub g1: SkewPoly,
    pub q: SkewPoly,
    pub g2: SkewPoly,
    pub s: SkewPoly,
    pub t: SkewPoly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelReduction {
    /// f·g^{-1} ≡ d modulo the commutator subgroup.
    pub d: Fe,
    pub certificate: Vec<ReductionStep>,
    pub final_numerator: Fe,
    pub final_denominator: Fe,
}

impl SkewPolyRing {
    pub fn new(q: u64, m: u32, s: u32) -> Result<Self> {
        let (p, qdeg) = crate::ff::prime_power(q).ok_or_else(|| Error::Schema(format!("q = {q} is not a prime power")))?;
        if m == 0 {
            return Err(Error::Schema("m must be positive".into()));
        }
        let field = Gf::new(p, qdeg * m)?;
        let g = m.gcd(&(s % m));
        let ell = m / g;
        let kdeg = qdeg * g;
        let gram = FMat::from_rows(
            &(0..ell)
                .map(|b| (0..ell).map(|a| field.trace_to(field.from_log((a + b) as i64), kdeg)).collect())
                .collect::<Vec<_>>(),
        );
        let cols: Vec<Vec<Fe>> = (0..ell as usize)
            .map(|j| {
                let mut e = vec![Fe::ZERO; ell as usize];
                e[j] = Fe::ONE;
                gram.solve(&field, &e).expect("trace form is nondegenerate")
            })
            .collect();
        let gram_inv = FMat::from_cols(ell as usize, &cols);
        let ring = SkewPolyRing {
            spec: SkewRingSpec { q, m, s },
            field,
            qdeg,
            ell,
            kdeg,
            gram_inv,
            labels: Mutex::new(HashMap::new()),
        };
        ring.check_center()?;
        Ok(ring)
    }

    pub fn from_spec(s: &SkewRingSpec) -> Result<Self> {
        Self::new(s.q, s.m, s.s)
    }

    /// y = x^ℓ commutes with x and D; x^j for 0 < j < ℓ does not; K is fixed by σ.
    fn check_center(&self) -> Result<()> {
        let f = &self.field;
        let y = SkewPoly::monomial(Fe::ONE, self.ell as usize);
        let gen = SkewPoly::constant(f.generator());
        if self.mul(&y, &gen) != self.mul(&gen, &y) || self.mul(&y, &SkewPoly::x()) != self.mul(&SkewPoly::x(), &y) {
            return Err(Error::InvalidRing("x^ℓ is not central".into()));
        }
        for j in 1..self.ell as usize {
            let xj = SkewPoly::monomial(Fe::ONE, j);
            if self.mul(&xj, &gen) == self.mul(&gen, &xj) {
                return Err(Error::InvalidRing(format!("σ has order below {}", self.ell)));
            }
        }
        if f.subfield(self.kdeg).iter().any(|&c| self.sigma(c, 1) != c) {
            return Err(Error::InvalidRing("K is not fixed by σ".into()));
        }
        Ok(())
    }

    pub fn spec(&self) -> &SkewRingSpec {
        &self.spec
    }

    pub fn field(&self) -> &Arc<Gf> {
        &self.field
    }

    /// Order of σ, which is also ind(Q) for the quotient division ring Q.
    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// Prime-field degree of the fixed field K.
    pub fn center_degree(&self) -> u32 {
        self.kdeg
    }

    /// σ^i(c).
    pub fn sigma(&self, c: Fe, i: i64) -> Fe {
        self.field.frob(c, self.qdeg as i64 * self.spec.s as i64 * i)
    }

    pub fn add(&self, a: &SkewPoly, b: &SkewPoly) -> SkewPoly {
        SkewPoly(a.0.add(&self.field, &b.0))
    }

    pub fn sub(&self, a: &SkewPoly, b: &SkewPoly) -> SkewPoly {
        SkewPoly(a.0.sub(&self.field, &b.0))
    }

    pub fn neg(&self, a: &SkewPoly) -> SkewPoly {
        SkewPoly(a.0.neg(&self.field))
    }

    /// c·a
    pub fn scale_left(&self, c: Fe, a: &SkewPoly) -> SkewPoly {
        SkewPoly(a.0.scale(&self.field, c))
    }

    pub fn mul(&self, a: &SkewPoly, b: &SkewPoly) -> SkewPoly {
        if a.is_zero() || b.is_zero() {
            return SkewPoly::zero();
        }
        let f = &self.field;
        let mut out = vec![Fe::ZERO; a.deg0() + b.deg0() + 1];
        for (i, &ai) in a.coeffs().iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, &bj) in b.coeffs().iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(ai, self.sigma(bj, i as i64)));
            }
        }
        SkewPoly::new(out)
    }

    pub fn product<'a, I: IntoIterator<Item = &'a SkewPoly>>(&self, it: I) -> SkewPoly {
        it.into_iter().fold(SkewPoly::one(), |acc, p| self.mul(&acc, p))
    }

    /// lead(a)^{-1}·a
    pub fn monic(&self, a: &SkewPoly) -> Result<SkewPoly> {
        if a.is_zero() {
            return Err(Error::ZeroElement);
        }
        Ok(self.scale_left(self.field.inv(a.lead())?, a))
    }

    /// f = quot·g + rem with deg rem < deg g.
    pub fn right_divide(&self, f: &SkewPoly, g: &SkewPoly) -> Result<(SkewPoly, SkewPoly)> {
        if g.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let fld = &self.field;
        let dg = g.deg0();
        let mut r = f.coeffs().to_vec();
        if r.len() <= dg {
            return Ok((SkewPoly::zero(), f.clone()));
        }
        let mut quot = vec![Fe::ZERO; r.len() - dg];
        for top in (dg..r.len()).rev() {
            if r[top].is_zero() {
                continue;
            }
            let d = top - dg;
            let c = fld.div(r[top], self.sigma(g.lead(), d as i64))?;
            quot[d] = c;
            for (j, &gj) in g.coeffs().iter().enumerate() {
                r[d + j] = fld.sub(r[d + j], fld.mul(c, self.sigma(gj, d as i64)));
            }
        }
        Ok((SkewPoly::new(quot), SkewPoly::new(r)))
    }

    /// f = g·quot + rem with deg rem < deg g.
    pub fn left_divide(&self, f: &SkewPoly, g: &SkewPoly) -> Result<(SkewPoly, SkewPoly)> {
        if g.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let fld = &self.field;
        let dg = g.deg0();
        let mut r = f.coeffs().to_vec();
        if r.len() <= dg {
            return Ok((SkewPoly::zero(), f.clone()));
        }
        let mut quot = vec![Fe::ZERO; r.len() - dg];
        for top in (dg..r.len()).rev() {
            if r[top].is_zero() {
                continue;
            }
            let d = top - dg;
            let c = self.sigma(fld.div(r[top], g.lead())?, -(dg as i64));
            quot[d] = c;
            for (j, &gj) in g.coeffs().iter().enumerate() {
                r[d + j] = fld.sub(r[d + j], fld.mul(gj, self.sigma(c, j as i64)));
            }
        }
        Ok((SkewPoly::new(quot), SkewPoly::new(r)))
    }

    fn rem(&self, f: &SkewPoly, g: &SkewPoly) -> SkewPoly {
        self.right_divide(f, g).expect("nonzero modulus").1
    }

    /// π(x^ℓ) for π ∈ K[y].
    pub fn central(&self, pi: &Poly) -> SkewPoly {
        let mut c = vec![Fe::ZERO; pi.degree().map_or(0, |d| d * self.ell as usize + 1)];
        for (i, &a) in pi.coeffs().iter().enumerate() {
            c[i * self.ell as usize] = a;
        }
        SkewPoly::new(c)
    }

    /// Matrix of left multiplication by y on T/Tf in the D-basis 1, x, …, x^{deg f - 1}.
    pub fn y_matrix(&self, f: &SkewPoly) -> FMat {
        let d = f.deg0();
        let cols: Vec<Vec<Fe>> = (0..d)
            .map(|j| {
                let r = self.rem(&SkewPoly::monomial(Fe::ONE, j + self.ell as usize), f);
                (0..d).map(|i| r.coeff(i)).collect()
            })
            .collect();
        FMat::from_cols(d, &cols)
    }

    /// N_{D(y)/K(y)} of a polynomial in y over D.
    fn norm_to_center(&self, chi: &Poly) -> Poly {
        let f = &self.field;
        let out = (0..self.ell as i64).fold(Poly::one(), |acc, i| acc.mul(f, &chi.map(|c| self.sigma(c, i))));
        debug_assert!(out.over_subfield(f, self.kdeg));
        out
    }

    fn center_polys(&self) -> SubfieldPolys<'_> {
        SubfieldPolys::new(&self.field, self.kdeg)
    }

    /// Monic irreducible π ∈ K[y] whose simple class occurs in T/Tf.
    pub fn primes(&self, f: &SkewPoly) -> Vec<Poly> {
        if f.deg0() == 0 {
            return Vec::new();
        }
        let chi = self.y_matrix(f).charpoly(&self.field);
        self.center_polys().factor(&self.norm_to_center(&chi), 0).into_iter().map(|(p, _)| p).collect()
    }

    /// Central annihilator π of T/Tp for irreducible p.
    pub fn class_key(&self, p: &SkewPoly) -> Result<Poly> {
        let ps = self.primes(p);
        match ps.as_slice() {
            [pi] if pi.degree() == p.degree() => Ok(pi.clone()),
            _ => Err(Error::InvalidRing(format!("{} is not irreducible", self.format(p)))),
        }
    }

    /// Lex-least monic g of degree deg π right-dividing π(x^ℓ); every such g is irreducible with T/Tg ≅ S_π.
    pub fn label(&self, pi: &Poly) -> Result<SkewPoly> {
        if let Some(l) = self.labels.lock().expect("label cache poisoned").get(pi) {
            return Ok(l.clone());
        }
        let d = pi.degree().filter(|&d| d > 0).ok_or_else(|| Error::InvalidRing("class key must have positive degree".into()))?;
        let big = self.central(pi);
        let elems: Vec<Fe> = self.field.elements().collect();
        let found = monic_polys(&elems, d)
            .take(LABEL_BUDGET)
            .map(SkewPoly)
            .find(|g| self.rem(&big, g).is_zero())
            .ok_or_else(|| Error::BudgetExceeded(format!("label search for a class of degree {d}")))?;
        self.labels.lock().expect("label cache poisoned").insert(pi.clone(), found.clone());
        Ok(found)
    }

    /// Coordinates of d ∈ D in the K-basis 1, g, …, g^{ℓ-1}.
    pub fn kcoords(&self, d: Fe) -> Vec<Fe> {
        let f = &self.field;
        let tr: Vec<Fe> = (0..self.ell).map(|b| f.trace_to(f.mul(d, f.from_log(b as i64)), self.kdeg)).collect();
        self.gram_inv.apply(f, &tr)
    }

    fn kvec(&self, v: &SkewPoly, len: usize) -> Vec<Fe> {
        (0..len).flat_map(|j| self.kcoords(v.coeff(j))).collect()
    }

    /// K-basis element g^a·x^j of the module T/Tp, indexed j·ℓ + a.
    fn kbasis(&self, len: usize) -> Vec<SkewPoly> {
        (0..len)
            .flat_map(|j| (0..self.ell).map(move |a| (j, a)))
            .map(|(j, a)| SkewPoly::monomial(self.field.from_log(a as i64), j))
            .collect()
    }

    fn from_kvec(&self, v: &[Fe]) -> SkewPoly {
        let f = &self.field;
        let l = self.ell as usize;
        SkewPoly::new(
            v.chunks(l).map(|ch| f.sum(ch.iter().enumerate().map(|(a, &k)| f.mul(k, f.from_log(a as i64))))).collect(),
        )
    }

    /// K-basis of Hom_T(T/Tf, T/Tg), as images u of 1 with deg u < deg g and fu ∈ Tg.
    pub fn hom_space(&self, f: &SkewPoly, g: &SkewPoly) -> Vec<SkewPoly> {
        let dg = g.deg0();
        if dg == 0 {
            return Vec::new();
        }
        let len = self.ell as usize * dg;
        let cols: Vec<Vec<Fe>> =
            self.kbasis(dg).iter().map(|u| self.kvec(&self.rem(&self.mul(f, u), g), dg)).collect();
        FMat::from_cols(len, &cols).nullspace(&self.field).iter().map(|v| self.from_kvec(v)).collect()
    }

    /// Monic generator of {t : t·u ∈ Tp}.
    fn annihilator(&self, u: &SkewPoly, p: &SkewPoly) -> SkewPoly {
        let dp = p.deg0();
        let mut ws: Vec<Vec<Fe>> = Vec::new();
        for i in 0..=dp {
            let w = self.rem(&self.mul(&SkewPoly::monomial(Fe::ONE, i), u), p);
            let w: Vec<Fe> = (0..dp).map(|k| w.coeff(k)).collect();
            if i > 0 {
                let neg: Vec<Fe> = w.iter().map(|&c| self.field.neg(c)).collect();
                if let Some(c) = FMat::from_cols(dp, &ws).solve(&self.field, &neg) {
                    let mut g = c;
                    g.push(Fe::ONE);
                    return SkewPoly::new(g);
                }
            } else if w.iter().all(|c| c.is_zero()) {
                return SkewPoly::one();
            }
            ws.push(w);
        }
        unreachable!("T/Tp has D-dimension deg p")
    }

    fn irreducible_right_factor(&self, f: &SkewPoly) -> Result<SkewPoly> {
        for pi in self.primes(f) {
            let p = self.label(&pi)?;
            if let Some(u) = self.hom_space(f, &p).first() {
                return Ok(self.annihilator(u, &p));
            }
        }
        unreachable!("a nonzero module of finite length has a simple quotient")
    }

    pub fn factor(&self, f: &SkewPoly) -> Result<Factorization> {
        if f.is_zero() {
            return Err(Error::ZeroElement);
        }
        let unit = f.lead();
        let mut rest = self.monic(f)?;
        let mut rev = Vec::new();
        while rest.deg0() > 0 {
            let g = self.irreducible_right_factor(&rest)?;
            let (quot, r) = self.right_divide(&rest, &g)?;
            debug_assert!(r.is_zero());
            rev.push(g);
            rest = quot;
        }
        rev.reverse();
        Ok(Factorization { unit, factors: rev })
    }

    /// Exhaustive search for a monic left or right divisor of degree 1..=deg/2.
    pub fn is_irreducible_by_search(&self, f: &SkewPoly) -> bool {
        let n = f.deg0();
        if n == 0 {
            return false;
        }
        let elems: Vec<Fe> = self.field.elements().collect();
        for d in 1..=n / 2 {
            for g in monic_polys(&elems, d).map(SkewPoly) {
                let right = self.right_divide(f, &g).expect("monic").1.is_zero();
                if right || self.left_divide(f, &g).expect("monic").1.is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// δ(f) = jh(T/Tf).
    pub fn divisor(&self, f: &SkewPoly) -> Result<Divisor> {
        let mut out = Divisor::zero();
        for p in self.factor(f)?.factors {
            let key = self.class_key(&p)?;
            let label = self.label(&key)?;
            out.add_term(key, label, 1);
        }
        Ok(out)
    }

    /// δ(f·g^{-1}) = δ(f) − δ(g).
    pub fn divisor_of_quotient(&self, f: &SkewPoly, g: &SkewPoly) -> Result<Divisor> {
        Ok(self.divisor(f)?.sub(&self.divisor(g)?))
    }

    /// Witness (s, t) with fs = tg and deg s = deg t < deg f when T/Tf ≅ T/Tg, for irreducible f, g.
    pub fn similar(&self, f: &SkewPoly, g: &SkewPoly) -> Result<Option<(SkewPoly, SkewPoly)>> {
        if f.is_zero() || g.is_zero() {
            return Err(Error::ZeroElement);
        }
        if f.degree() != g.degree() {
            return Ok(None);
        }
        if f == g {
            return Ok(Some((SkewPoly::one(), SkewPoly::one())));
        }
        let Some(s) = self.hom_space(f, g).into_iter().next() else { return Ok(None) };
        let (t, r) = self.right_divide(&self.mul(f, &s), g)?;
        debug_assert!(r.is_zero());
        Ok(Some((s, t)))
    }

    /// Rewrites f·g^{-1} with δ(f) = δ(g) into D* modulo commutators by repeated swap moves.
    pub fn reduce_kernel_element(&self, f: &SkewPoly, g: &SkewPoly) -> Result<KernelReduction> {
        if f.is_zero() || g.is_zero() {
            return Err(Error::ZeroElement);
        }
        if self.divisor(f)? != self.divisor(g)? {
            return Err(Error::DivisorMismatch);
        }
        if f == g {
            return Ok(KernelReduction { d: Fe::ONE, certificate: Vec::new(), final_numerator: Fe::ONE, final_denominator: Fe::ONE });
        }
        let mut certificate = Vec::new();
        let (mut num, mut den) = (f.clone(), g.clone());
        {
            while num.deg0() > 0 {
                let nf = self.factor(&num)?;
                let df = self.factor(&den)?;
                let p = self.scale_left(nf.unit, &nf.factors[0]);
                let f1 = self.product(&nf.factors[1..]);
                let key = self.class_key(&nf.factors[0])?;
                let mut j = None;
                for (i, qi) in df.factors.iter().enumerate() {
                    if self.class_key(qi)? == key {
                        j = Some(i);
                        break;
                    }
                }
                let j = j.ok_or(Error::DivisorMismatch)?;
                let g1 = self.scale_left(df.unit, &self.product(&df.factors[..j]));
                let q = df.factors[j].clone();
                let g2 = self.product(&df.factors[j + 1..]);
                let (s, t) = self.similar(&p, &q)?.ok_or(Error::DivisorMismatch)?;
                let next_num = self.mul(&f1, &t);
                let next_den = self.mul(&self.mul(&g1, &g2), &s);
                certificate.push(ReductionStep { numerator: num, denominator: den, p, f1, g1, q, g2, s, t });
                num = next_num;
                den = next_den;
            }
        }
        let (a, b) = (num.coeff(0), den.coeff(0));
        Ok(KernelReduction { d: self.field.div(a, b)?, certificate, final_numerator: a, final_denominator: b })
    }

    /// Replays a certificate from f·g^{-1}; every step must be an exact polynomial identity.
    pub fn verify_reduction(&self, f: &SkewPoly, g: &SkewPoly, red: &KernelReduction) -> Result<()> {
        let fail = |i: usize, what: &str| Err(Error::InvalidRing(format!("certificate step {i}: {what}")));
        if f == g && red.certificate.is_empty() {
            return if red.d == Fe::ONE { Ok(()) } else { Err(Error::InvalidRing("f = g must reduce to 1".into())) };
        }
        let (mut num, mut den) = (f.clone(), g.clone());
        for (i, st) in red.certificate.iter().enumerate() {
            if st.numerator != num || st.denominator != den {
                return fail(i, "does not continue from the previous step");
            }
            if self.mul(&st.p, &st.f1) != num {
                return fail(i, "numerator ≠ p·f1");
            }
            if self.product([&st.g1, &st.q, &st.g2]) != den {
                return fail(i, "denominator ≠ g1·q·g2");
            }
            if self.mul(&st.p, &st.s) != self.mul(&st.t, &st.q) {
                return fail(i, "ps ≠ tq");
            }
            if st.s.degree() != st.t.degree() || st.s.deg0() >= st.p.deg0() {
                return fail(i, "deg s = deg t < deg p fails");
            }
            let next = self.mul(&st.f1, &st.t);
            if next.deg0() >= num.deg0() {
                return fail(i, "numerator degree did not drop");
            }
            num = next;
            den = self.mul(&self.mul(&st.g1, &st.g2), &st.s);
        }
        if num.deg0() != 0 || den.deg0() != 0 {
            return Err(Error::InvalidRing("certificate ends above degree 0".into()));
        }
        if num.coeff(0) != red.final_numerator
            || den.coeff(0) != red.final_denominator
            || self.field.div(num.coeff(0), den.coeff(0))? != red.d
        {
            return Err(Error::InvalidRing("final scalar does not match".into()));
        }
        Ok(())
    }

    /// Nrd_Q(f) ∈ K[y]: determinant of right multiplication by f on the free D[y]-module with basis 1, x, …, x^{ℓ-1}.
    pub fn nrd(&self, f: &SkewPoly) -> Poly {
        let fld = &self.field;
        let l = self.ell as usize;
        let mut m = vec![vec![Poly::zero(); l]; l];
        for (i, row) in m.iter_mut().enumerate() {
            for (k, &fk) in f.coeffs().iter().enumerate() {
                let e = i + k;
                let term = Poly::monomial(self.sigma(fk, i as i64), e / l);
                row[e % l] = row[e % l].add(fld, &term);
            }
        }
        let out = bareiss_det(fld, m);
        debug_assert!(out.over_subfield(fld, self.kdeg));
        out
    }

    /// Nrd([S]) = n_S·[R/P] with n_S = dim_{R/P}(T/M)/(n·k) from explicit dimension counts.
    pub fn nrd_class(&self, p: &SkewPoly) -> Result<(Poly, i64)> {
        let pi = self.class_key(p)?;
        let big = self.central(&pi);
        if !self.rem(&big, p).is_zero() {
            return Err(Error::InvalidRing("π(y) does not annihilate the class".into()));
        }
        let l = self.ell as usize;
        let dp = p.deg0();
        let s_basis = self.kbasis(dp);
        // image of T/Tπ(x^ℓ) in End_K(S) is T/M
        let rows: Vec<Vec<Fe>> = self
            .kbasis(big.deg0())
            .iter()
            .map(|t| s_basis.iter().flat_map(|v| self.kvec(&self.rem(&self.mul(t, v), p), dp)).collect())
            .collect();
        let dim_tm = FMat::from_rows(&rows).rank(&self.field);
        let dim_s = l * dp;
        let dpi = pi.degree().expect("positive degree");
        if dim_tm % dim_s != 0 || dim_tm % dpi != 0 {
            return Err(Error::InvalidRing("dimension count is not integral".into()));
        }
        let k = dim_tm / dim_s;
        let over_rp = dim_tm / dpi;
        if over_rp % (l * k) != 0 {
            return Err(Error::InvalidRing("n_S is not integral".into()));
        }
        Ok((pi, (over_rp / (l * k)) as i64))
    }

    pub fn nrd_divisor(&self, d: &Divisor) -> Result<CentralDivisor> {
        let mut out = CentralDivisor::new();
        for t in d.terms.values() {
            let (pi, n_s) = self.nrd_class(&t.label)?;
            central_add(&mut out, pi, n_s * t.multiplicity);
        }
        Ok(out)
    }

    /// ρ: Div(R) → Div(T), [R/P] ↦ jh(T ⊗ R/P) = δ(π(x^ℓ)).
    pub fn rho(&self, d: &CentralDivisor) -> Result<Divisor> {
        let mut out = Divisor::zero();
        for (pi, &k) in d {
            out = out.add(&self.divisor(&self.central(pi))?.scale(k));
        }
        Ok(out)
    }

    /// N: Div(T) → Div(R), restriction of scalars: jh of S as a K[y]-module from the K-characteristic polynomial of y.
    pub fn restrict(&self, d: &Divisor) -> Result<CentralDivisor> {
        let mut out = CentralDivisor::new();
        for t in d.terms.values() {
            let dp = t.label.deg0();
            let y = SkewPoly::monomial(Fe::ONE, self.ell as usize);
            let cols: Vec<Vec<Fe>> =
                self.kbasis(dp).iter().map(|v| self.kvec(&self.rem(&self.mul(&y, v), &t.label), dp)).collect();
            let chi = FMat::from_cols(self.ell as usize * dp, &cols).charpoly(&self.field);
            for (pi, e) in self.center_polys().factor(&chi, 0) {
                central_add(&mut out, pi, e as i64 * t.multiplicity);
            }
        }
        Ok(out)
    }

    /// Monic irreducible elements of K[y] of degree ≤ max_deg, one per simple class.
    pub fn simple_classes(&self, max_deg: usize) -> Vec<Poly> {
        let kel = self.field.subfield(self.kdeg);
        let cp = self.center_polys();
        (1..=max_deg).flat_map(|d| monic_polys(&kel, d).filter(|p| cp.is_irreducible(p)).collect::<Vec<_>>()).collect()
    }

    /// Divisor [S_π].
    pub fn class_divisor(&self, pi: &Poly) -> Result<Divisor> {
        let mut d = Divisor::zero();
        d.add_term(pi.clone(), self.label(pi)?, 1);
        Ok(d)
    }

    /// (rank over ℤ of the Nrd images, number of classes) for classes of degree ≤ max_deg.
    pub fn nrd_injectivity_rank(&self, max_deg: usize) -> Result<(usize, usize)> {
        let classes = self.simple_classes(max_deg);
        let images: Vec<CentralDivisor> =
            classes.iter().map(|pi| self.nrd_divisor(&self.class_divisor(pi)?)).collect::<Result<_>>()?;
        let primes: Vec<&Poly> = {
            let mut v: Vec<&Poly> = images.iter().flat_map(|d| d.keys()).collect();
            v.sort();
            v.dedup();
            v
        };
        let rows: Vec<Vec<i64>> = images.iter().map(|d| primes.iter().map(|p| *d.get(*p).unwrap_or(&0)).collect()).collect();
        let m = IntMatrix::from_rows(primes.len(), &rows)?;
        Ok((Lattice::new(primes.len(), &m).rank(), classes.len()))
    }

    /// `c_k*x^k + ... + c_0` with coefficients as discrete logs.
    pub fn format(&self, f: &SkewPoly) -> String {
        format_with(f.coeffs(), "x")
    }

    pub fn format_central(&self, pi: &Poly) -> String {
        format_with(pi.coeffs(), "y")
    }

    pub fn parse(&self, s: &str) -> Result<SkewPoly> {
        Ok(SkewPoly::new(parse_with(&self.field, s, "x")?))
    }

    pub fn divisor_entries(&self, d: &Divisor) -> Vec<DivisorEntry> {
        d.terms
            .values()
            .map(|t| DivisorEntry { class_label: self.format(&t.label), multiplicity: t.multiplicity })
            .collect()
    }

    pub fn central_entries(&self, d: &CentralDivisor) -> Vec<DivisorEntry> {
        d.iter().map(|(p, &k)| DivisorEntry { class_label: self.format_central(p), multiplicity: k }).collect()
    }

    /// Random polynomial of exact degree `deg`.
    pub fn random<R: rand::Rng>(&self, rng: &mut R, deg: usize) -> SkewPoly {
        let n = self.field.order();
        let mut c: Vec<Fe> = (0..deg).map(|_| self.field.from_int(rng.gen_range(0..n))).collect();
        c.push(self.field.from_int(rng.gen_range(1..n)));
        SkewPoly::new(c)
    }
}

fn format_with(c: &[Fe], var: &str) -> String {
    let terms: Vec<String> = c
        .iter()
        .enumerate()
        .rev()
        .filter_map(|(k, a)| {
            let l = a.log()?;
            Some(match k {
                0 => format!("{l}"),
                1 => format!("{l}*{var}"),
                _ => format!("{l}*{var}^{k}"),
            })
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

fn parse_with(f: &Gf, s: &str, var: &str) -> Result<Vec<Fe>> {
    let bad = |t: &str| Error::Schema(format!("cannot parse term '{t}'"));
    let mut out: Vec<Fe> = Vec::new();
    let s = s.trim();
    if s == "0" {
        return Ok(out);
    }
    for term in s.split('+').map(str::trim) {
        let (coef, pow) = match term.split_once('*') {
            Some((c, v)) => (c.trim().parse::<i64>().map_err(|_| bad(term))?, v.trim()),
            None if term.starts_with(var) => (0, term),
            None => (term.parse::<i64>().map_err(|_| bad(term))?, ""),
        };
        let k = if pow.is_empty() {
            0
        } else if pow == var {
            1
        } else {
            pow.strip_prefix(var)
                .and_then(|r| r.strip_prefix('^'))
                .and_then(|e| e.trim().parse::<usize>().ok())
                .ok_or_else(|| bad(term))?
        };
        if out.len() <= k {
            out.resize(k + 1, Fe::ZERO);
        }
        out[k] = f.add(out[k], f.from_log(coef));
    }
    Ok(out)
}

/// Fraction-free determinant over a polynomial ring.
fn bareiss_det(f: &Gf, mut m: Vec<Vec<Poly>>) -> Poly {
    let n = m.len();
    let mut neg = false;
    let mut prev = Poly::one();
    for k in 0..n {
        let Some(piv) = (k..n).find(|&i| !m[i][k].is_zero()) else { return Poly::zero() };
        if piv != k {
            m.swap(piv, k);
            neg = !neg;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[i][j].mul(f, &m[k][k]).sub(f, &m[i][k].mul(f, &m[k][j]));
                m[i][j] = num.divrem(f, &prev).expect("nonzero pivot").0;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if neg {
        d.neg(f)
    } else {
        d
    }
}
