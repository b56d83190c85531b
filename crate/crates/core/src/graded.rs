//! Monomial graded division rings E = M[z_1^{±1}, …, z_n^{±1}] over M = GF(q^m).
//!
//! Relations: z_i c = σ_i(c) z_i with σ_i = Frob_q^{s_i}, z_i z_j = u_ij z_j z_i, and
//! x_i = b_i^{-1} z_i^{r_i} central. Elements are left M-combinations of normal-form
//! monomials z^α = z_1^{α_1} ⋯ z_n^{α_n}, α ∈ ℤ^n.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::ToPrimitive;
use rand::Rng;
use serde::ser::{Serialize, SerializeMap, SerializeSeq, Serializer};
use serde::Deserialize;

use crate::abgroup::{left_kernel, FiniteAbelianGroup, IntMatrix, Lattice};
use crate::error::{Error, Result};
use crate::ff::{Fe, Gf};
use crate::poly::Poly;

pub type Degree = Vec<i64>;

/// Finite sum of monomials c·z^α; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct GradedElement {
    terms: BTreeMap<Degree, Fe>,
}

impl GradedElement {
    pub fn zero() -> Self {
        GradedElement::default()
    }

    pub fn monomial(c: Fe, deg: Degree) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(deg, c);
        }
        GradedElement { terms }
    }

    pub fn scalar(c: Fe, n: usize) -> Self {
        GradedElement::monomial(c, vec![0; n])
    }

    pub fn one(n: usize) -> Self {
        GradedElement::scalar(Fe::ONE, n)
    }

    pub fn terms(&self) -> &BTreeMap<Degree, Fe> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.terms.len() <= 1
    }

    /// (coefficient, degree) of a nonzero homogeneous element.
    pub fn as_monomial(&self) -> Option<(Fe, &Degree)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(d, &c)| (c, d))
        } else {
            None
        }
    }

    pub fn degree(&self) -> Option<&Degree> {
        self.as_monomial().map(|(_, d)| d)
    }

    pub fn coeff(&self, deg: &[i64]) -> Fe {
        self.terms.get(deg).copied().unwrap_or(Fe::ZERO)
    }

    fn add_term(&mut self, f: &Gf, deg: Degree, c: Fe) {
        let e = self.terms.entry(deg).or_insert(Fe::ZERO);
        *e = f.add(*e, c);
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }
}

impl Serialize for GradedElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (d, c) in &self.terms {
            seq.serialize_element(&MonomialJson { degree: d, log: c.log().expect("nonzero coefficient") })?;
        }
        seq.end()
    }
}

struct MonomialJson<'a> {
    degree: &'a Degree,
    log: u64,
}

impl Serialize for MonomialJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("degree", self.degree)?;
        m.serialize_entry("log", &self.log)?;
        m.end()
    }
}

/// Homogeneous element as read from JSON: {"degree": [...], "log": l}.
#[derive(Clone, Debug, Deserialize)]
pub struct MonomialSpec {
    pub degree: Degree,
    pub log: i64,
}

/// JSON form of a monomial graded ring; field elements are discrete logs.
#[derive(Clone, Debug, Deserialize, serde::Serialize)]
pub struct MonomialRingSpec {
    pub q: u64,
    pub m: u32,
    pub n: usize,
    pub sigma: Vec<i64>,
    pub r: Vec<u64>,
    pub b: Vec<i64>,
    pub u: Vec<Vec<i64>>,
    /// Minimal polynomial of the generator over GF(p), constant term first.
    #[serde(default)]
    pub modulus: Option<Vec<u64>>,
}

/// Solution set {x ≡ r mod m} of a system of linear congruences a·x ≡ b (mod n).
pub(crate) fn solve_congruences(eqs: &[(i128, i128)], n: i128) -> Option<(i128, i128)> {
    let mut acc = (0i128, 1i128);
    for &(a, b) in eqs {
        let (a, b) = (a.rem_euclid(n), b.rem_euclid(n));
        let g = a.gcd(&n);
        if b % g != 0 {
            return None;
        }
        let nn = n / g;
        let inv = (a / g).extended_gcd(&nn).x.rem_euclid(nn.max(1));
        let r = ((b / g) % nn.max(1) * inv).rem_euclid(nn.max(1));
        acc = crt(acc, (r, nn.max(1)))?;
    }
    Some(acc)
}

fn crt((r1, m1): (i128, i128), (r2, m2): (i128, i128)) -> Option<(i128, i128)> {
    let eg = m1.extended_gcd(&m2);
    let g = eg.gcd;
    if (r2 - r1) % g != 0 {
        return None;
    }
    let l = m1 / g * m2;
    let t = ((r2 - r1) / g % (m2 / g)) * eg.x % (m2 / g);
    Some(((r1 + m1 * t).rem_euclid(l), l))
}

#[derive(Clone, Debug)]
pub struct MonomialGradedRing {
    q: u64,
    m: u32,
    n: usize,
    sigma: Vec<i64>,
    r: Vec<u64>,
    b: Vec<Fe>,
    u: Vec<Vec<Fe>>,
    field: Arc<Gf>,
    /// q = p^qdeg
    qdeg: u32,
    /// T₀ = GF(q^t0)
    t0: u32,
    gamma_t: IntMatrix,
    gamma_lattice: Lattice,
    quotient: FiniteAbelianGroup,
    index: u64,
}

/// Limit on Π r_i for the box enumeration of Γ_T.
const BOX_LIMIT: u64 = 1 << 14;

impl MonomialGradedRing {
    pub fn from_spec(s: &MonomialRingSpec) -> Result<Self> {
        let (p, qdeg) =
            crate::ff::prime_power(s.q).ok_or_else(|| Error::Schema(format!("q = {} is not a prime power", s.q)))?;
        if s.m == 0 {
            return Err(Error::Schema("m must be positive".into()));
        }
        let field = Gf::new(p, qdeg * s.m)?;
        if let Some(md) = &s.modulus {
            if md.as_slice() != field.modulus() {
                return Err(Error::Schema(format!(
                    "generator minimal polynomial {md:?} differs from the fixed one {:?}",
                    field.modulus()
                )));
            }
        }
        let n = s.n;
        if s.sigma.len() != n || s.r.len() != n || s.b.len() != n || s.u.len() != n || s.u.iter().any(|r| r.len() != n) {
            return Err(Error::Schema(format!("sigma, r, b, u must have length {n}")));
        }
        let b = s.b.iter().map(|&l| field.from_log(l)).collect();
        let u = s.u.iter().map(|row| row.iter().map(|&l| field.from_log(l)).collect()).collect();
        Self::new(s.q, s.m, s.sigma.clone(), s.r.clone(), b, u)
    }

    pub fn new(q: u64, m: u32, sigma: Vec<i64>, r: Vec<u64>, b: Vec<Fe>, u: Vec<Vec<Fe>>) -> Result<Self> {
        let (p, qdeg) = crate::ff::prime_power(q).ok_or_else(|| Error::Schema(format!("q = {q} is not a prime power")))?;
        let field = Gf::new(p, qdeg * m)?;
        let n = sigma.len();
        if r.len() != n || b.len() != n || u.len() != n || u.iter().any(|row| row.len() != n) {
            return Err(Error::Schema(format!("sigma, r, b, u must have length {n}")));
        }
        if r.contains(&0) {
            return Err(Error::InvalidRing("r_i must be positive".into()));
        }
        if b.iter().chain(u.iter().flatten()).any(|c| c.is_zero()) {
            return Err(Error::InvalidRing("b_i and u_ij must be nonzero".into()));
        }
        let sigma: Vec<i64> = sigma.iter().map(|s| s.rem_euclid(m as i64)).collect();
        let t0 = sigma.iter().fold(m as i64, |g, &s| g.gcd(&s)) as u32;
        let mut ring = MonomialGradedRing {
            q,
            m,
            n,
            sigma,
            r,
            b,
            u,
            field,
            qdeg,
            t0,
            gamma_t: IntMatrix::zeros(0, n),
            gamma_lattice: Lattice::new(n, &IntMatrix::zeros(0, n)),
            quotient: FiniteAbelianGroup::trivial(),
            index: 1,
        };
        ring.validate()?;
        ring.compute_center()?;
        Ok(ring)
    }

    fn validate(&self) -> Result<()> {
        let f = &*self.field;
        for i in 0..self.n {
            if self.u[i][i] != Fe::ONE {
                return Err(Error::InvalidRing(format!("u[{i}][{i}] must be 1")));
            }
            for j in 0..self.n {
                if f.mul(self.u[i][j], self.u[j][i]) != Fe::ONE {
                    return Err(Error::InvalidRing(format!("u[{i}][{j}] u[{j}][{i}] must be 1")));
                }
            }
            if (self.sigma[i] * self.r[i] as i64) % self.m as i64 != 0 {
                return Err(Error::InvalidRing(format!("sigma_{i}^r_{i} is not the identity on M")));
            }
        }
        // associativity on generator triples
        let mut gens = vec![GradedElement::scalar(f.generator(), self.n)];
        for i in 0..self.n {
            let mut e = vec![0; self.n];
            e[i] = 1;
            gens.push(GradedElement::monomial(Fe::ONE, e.clone()));
            e[i] = -1;
            gens.push(GradedElement::monomial(Fe::ONE, e));
        }
        for x in &gens {
            for y in &gens {
                let xy = self.mul(x, y);
                for z in &gens {
                    if self.mul(&xy, z) != self.mul(x, &self.mul(y, z)) {
                        return Err(Error::InvalidRing("presentation is not associative on generators".into()));
                    }
                }
            }
        }
        for i in 0..self.n {
            let mut d = vec![0; self.n];
            d[i] = self.r[i] as i64;
            let xi = GradedElement::monomial(f.inv(self.b[i])?, d);
            if !self.is_central(&xi) {
                return Err(Error::InvalidRing(format!("b_{i}^-1 z_{i}^r_{i} is not central")));
            }
        }
        Ok(())
    }

    fn compute_center(&mut self) -> Result<()> {
        let n = self.n;
        let box_size = self.r.iter().try_fold(1u64, |acc, &r| acc.checked_mul(r)).filter(|&s| s <= BOX_LIMIT);
        if box_size.is_none() {
            return Err(Error::BudgetExceeded(format!("grade box of size prod r_i exceeds {BOX_LIMIT}")));
        }
        let mut gens = IntMatrix::zeros(0, n);
        for i in 0..n {
            let mut d = vec![BigInt::from(0); n];
            d[i] = BigInt::from(self.r[i]);
            gens.push_row(&d);
        }
        for alpha in self.box_degrees() {
            if self.central_coefficient(&alpha).is_some() {
                gens.push_row(&alpha.iter().map(|&a| BigInt::from(a)).collect::<Vec<_>>());
            }
        }
        self.gamma_lattice = Lattice::new(n, &gens);
        self.quotient = FiniteAbelianGroup::cokernel(n, &gens);
        self.gamma_t = gens;
        let gamma_index = self.quotient.order().and_then(|o| o.to_u64()).expect("finite index");
        let dim = gamma_index * (self.m / self.t0) as u64;
        let ind = dim.sqrt();
        if ind * ind != dim {
            return Err(Error::InvalidRing(format!("[E:T] = {dim} is not a square")));
        }
        self.index = ind;
        Ok(())
    }

    /// Degrees in the box Π [0, r_i), lexicographic.
    pub fn box_degrees(&self) -> Vec<Degree> {
        let mut out = vec![vec![]];
        for &r in &self.r {
            out = out
                .into_iter()
                .flat_map(|d| {
                    (0..r as i64).map(move |x| {
                        let mut d2 = d.clone();
                        d2.push(x);
                        d2
                    })
                })
                .collect();
        }
        out
    }

    pub fn field(&self) -> &Arc<Gf> {
        &self.field
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> &[i64] {
        &self.sigma
    }

    pub fn r(&self) -> &[u64] {
        &self.r
    }

    pub fn b(&self) -> &[Fe] {
        &self.b
    }

    pub fn u(&self) -> &[Vec<Fe>] {
        &self.u
    }

    /// Degree of T₀ over GF(q).
    pub fn t0_degree(&self) -> u32 {
        self.t0
    }

    /// |T₀|.
    pub fn t0_order(&self) -> u64 {
        self.q.pow(self.t0)
    }

    /// [M:T₀].
    pub fn residue_degree(&self) -> u32 {
        self.m / self.t0
    }

    /// T₀ as a subfield of M, in prime-field degree.
    pub fn t0_prime_degree(&self) -> u32 {
        self.qdeg * self.t0
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn gamma_t(&self) -> &IntMatrix {
        &self.gamma_t
    }

    /// Basis of Γ_T.
    pub fn gamma_basis(&self) -> Vec<Degree> {
        let b = self.gamma_lattice.basis();
        (0..b.rows()).map(|i| b.row(i).iter().map(|x| x.to_i64().expect("small")).collect()).collect()
    }

    /// Coordinates of γ ∈ Γ_T in `gamma_basis`.
    pub fn gamma_coords(&self, d: &[i64]) -> Option<Vec<i64>> {
        let c = self.gamma_lattice.coords(&d.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>())?;
        Some(c.iter().map(|x| x.to_i64().expect("small")).collect())
    }

    pub fn in_gamma_t(&self, d: &[i64]) -> bool {
        self.gamma_lattice.contains(&d.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>())
    }

    /// Γ_E/Γ_T.
    pub fn grade_quotient(&self) -> &FiniteAbelianGroup {
        &self.quotient
    }

    /// |Γ_E : Γ_T|.
    pub fn gamma_index(&self) -> u64 {
        self.quotient.order().and_then(|o| o.to_u64()).expect("finite index")
    }

    /// Representatives of Γ_E/Γ_T inside the box, first in lex order.
    pub fn coset_representatives(&self) -> Vec<Degree> {
        let mut reps: Vec<Degree> = Vec::new();
        for d in self.box_degrees() {
            let fresh = reps.iter().all(|r| {
                let diff: Vec<i64> = d.iter().zip(r).map(|(a, b)| a - b).collect();
                !self.in_gamma_t(&diff)
            });
            if fresh {
                reps.push(d);
            }
        }
        reps
    }

    /// Order of α in Γ_E/Γ_T.
    pub fn degree_order(&self, alpha: &[i64]) -> u64 {
        let mut e = 1u64;
        loop {
            let d: Vec<i64> = alpha.iter().map(|&a| a * e as i64).collect();
            if self.in_gamma_t(&d) {
                return e;
            }
            e += 1;
        }
    }

    /// Basis of ker θ: degrees whose Frobenius σ^γ is trivial on M.
    pub fn theta_kernel(&self) -> IntMatrix {
        let mut col = IntMatrix::zeros(0, 1);
        for &s in &self.sigma {
            col.push_row(&[BigInt::from(s)]);
        }
        col.push_row(&[BigInt::from(self.m)]);
        let k = left_kernel(&col);
        let mut out = IntMatrix::zeros(0, self.n);
        for i in 0..k.rows() {
            out.push_row(&k.row(i)[..self.n]);
        }
        out
    }

    /// Frob_q^e.
    pub fn frob(&self, c: Fe, e: i64) -> Fe {
        let e = e.rem_euclid(self.m as i64);
        self.field.frob(c, self.qdeg as i64 * e)
    }

    /// Exponent of σ^α as a power of Frob_q, reduced mod m.
    pub fn sigma_exponent(&self, alpha: &[i64]) -> i64 {
        alpha.iter().zip(&self.sigma).map(|(&a, &s)| (a % self.m as i64) * s).sum::<i64>().rem_euclid(self.m as i64)
    }

    pub fn sigma_alpha(&self, c: Fe, alpha: &[i64]) -> Fe {
        self.frob(c, self.sigma_exponent(alpha))
    }

    /// N_j^{(b)}(c) = c σ_j(c) ⋯ σ_j^{b-1}(c) for b ≥ 0, and (σ_j^{b}(c) ⋯ σ_j^{-1}(c))^{-1} for b < 0.
    fn twisted_norm(&self, j: usize, c: Fe, b: i64) -> Fe {
        let f = &*self.field;
        let l = c.log().expect("nonzero") as i128;
        let units = f.units() as i128;
        let ell = (self.m as i64 / (self.m as i64).gcd(&self.sigma[j])).max(1);
        let (lo, hi, sign) = if b >= 0 { (0, b, 1i128) } else { (b, 0, -1i128) };
        let mut total: i128 = 0;
        for tau in 0..ell {
            // count of t in [lo, hi) with t ≡ tau mod ell
            let count = (hi - tau).div_euclid(ell) - (lo - tau).div_euclid(ell);
            if count == 0 {
                continue;
            }
            let w = self.pow_q_mod(self.sigma[j] * tau, units);
            total = (total + (count as i128 % units) * w) % units;
        }
        f.from_log(((sign * l % units * total) % units) as i64)
    }

    /// q^e mod n as an exponent multiplier on logs.
    fn pow_q_mod(&self, e: i64, n: i128) -> i128 {
        let e = e.rem_euclid(self.m as i64) as u32;
        let mut acc = 1i128;
        for _ in 0..e {
            acc = acc * self.q as i128 % n;
        }
        acc
    }

    /// z^α z^β = κ(α, β) z^{α+β}.
    pub fn kappa(&self, alpha: &[i64], beta: &[i64]) -> Fe {
        let f = &*self.field;
        let mut gamma = alpha.to_vec();
        let mut acc = Fe::ONE;
        for j in 0..self.n {
            let b = beta[j];
            if b == 0 {
                continue;
            }
            for k in j + 1..self.n {
                if gamma[k] == 0 {
                    continue;
                }
                // z_k^a z_j^b = N_j^{(b)}(N_k^{(a)}(u_kj)) z_j^b z_k^a
                let c = self.twisted_norm(j, self.twisted_norm(k, self.u[k][j], gamma[k]), b);
                acc = f.mul(acc, self.sigma_alpha(c, &gamma[..k]));
            }
            gamma[j] += b;
        }
        acc
    }

    pub fn mul_monomials(&self, (c, alpha): (Fe, &[i64]), (d, beta): (Fe, &[i64])) -> (Fe, Degree) {
        let f = &*self.field;
        let coeff = f.mul(f.mul(c, self.sigma_alpha(d, alpha)), self.kappa(alpha, beta));
        (coeff, alpha.iter().zip(beta).map(|(a, b)| a + b).collect())
    }

    pub fn mul(&self, a: &GradedElement, b: &GradedElement) -> GradedElement {
        let mut out = GradedElement::zero();
        for (da, &ca) in &a.terms {
            for (db, &cb) in &b.terms {
                let (c, d) = self.mul_monomials((ca, da), (cb, db));
                out.add_term(&self.field, d, c);
            }
        }
        out
    }

    pub fn add(&self, a: &GradedElement, b: &GradedElement) -> GradedElement {
        let mut out = a.clone();
        for (d, &c) in &b.terms {
            out.add_term(&self.field, d.clone(), c);
        }
        out
    }

    pub fn neg(&self, a: &GradedElement) -> GradedElement {
        GradedElement { terms: a.terms.iter().map(|(d, &c)| (d.clone(), self.field.neg(c))).collect() }
    }

    pub fn sub(&self, a: &GradedElement, b: &GradedElement) -> GradedElement {
        self.add(a, &self.neg(b))
    }

    /// Left multiplication by a scalar of M.
    pub fn scale(&self, c: Fe, a: &GradedElement) -> GradedElement {
        self.mul(&GradedElement::scalar(c, self.n), a)
    }

    pub fn one(&self) -> GradedElement {
        GradedElement::one(self.n)
    }

    pub fn element(&self, c: Fe, deg: Degree) -> GradedElement {
        GradedElement::monomial(c, deg)
    }

    pub fn element_from_spec(&self, s: &MonomialSpec) -> Result<GradedElement> {
        if s.degree.len() != self.n {
            return Err(Error::Schema(format!("degree must have {} entries", self.n)));
        }
        Ok(GradedElement::monomial(self.field.from_log(s.log), s.degree.clone()))
    }

    /// Inverse of a nonzero homogeneous element.
    pub fn inverse(&self, a: &GradedElement) -> Result<GradedElement> {
        let (c, alpha) = homogeneous_parts(a)?;
        let f = &*self.field;
        let neg: Degree = alpha.iter().map(|x| -x).collect();
        let fk = self.kappa(alpha, &neg);
        let d = self.sigma_alpha(f.inv(f.mul(c, fk))?, &neg);
        Ok(GradedElement::monomial(d, neg))
    }

    pub fn pow(&self, a: &GradedElement, e: i64) -> Result<GradedElement> {
        let base = if e < 0 { self.inverse(a)? } else { a.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = self.one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        Ok(acc)
    }

    /// u a u^{-1}.
    pub fn conjugate(&self, u: &GradedElement, a: &GradedElement) -> Result<GradedElement> {
        Ok(self.mul(&self.mul(u, a), &self.inverse(u)?))
    }

    /// a b a^{-1} b^{-1} for homogeneous a, b.
    pub fn commutator(&self, a: &GradedElement, b: &GradedElement) -> Result<GradedElement> {
        Ok(self.mul(&self.mul(&self.mul(a, b), &self.inverse(a)?), &self.inverse(b)?))
    }

    pub fn is_central(&self, a: &GradedElement) -> bool {
        let f = &*self.field;
        let mut gens = vec![GradedElement::scalar(f.generator(), self.n)];
        for i in 0..self.n {
            let mut e = vec![0; self.n];
            e[i] = 1;
            gens.push(GradedElement::monomial(Fe::ONE, e));
        }
        gens.iter().all(|g| self.mul(g, a) == self.mul(a, g))
    }

    /// Coefficient c with least discrete log such that c z^γ is central, if γ ∈ Γ_T.
    pub fn central_coefficient(&self, gamma: &[i64]) -> Option<Fe> {
        if self.sigma_exponent(gamma) != 0 {
            return None;
        }
        let units = self.field.units() as i128;
        let mut eqs = Vec::new();
        for j in 0..self.n {
            let mut e = vec![0; self.n];
            e[j] = 1;
            // σ_j(c) κ(ε_j, γ) = c κ(γ, ε_j)
            let lhs = self.kappa(&e, gamma).log().expect("nonzero") as i128;
            let rhs = self.kappa(gamma, &e).log().expect("nonzero") as i128;
            let a = self.pow_q_mod(self.sigma[j], units) - 1;
            eqs.push((a, rhs - lhs));
        }
        let (x, _) = solve_congruences(&eqs, units)?;
        Some(self.field.from_log(x as i64))
    }

    /// Canonical central monomial τ_γ.
    pub fn central_monomial(&self, gamma: &[i64]) -> Option<GradedElement> {
        self.central_coefficient(gamma).map(|c| GradedElement::monomial(c, gamma.to_vec()))
    }

    /// λ: the lex-minimal homogeneous component.
    pub fn leading_term(&self, s: &GradedElement) -> Result<GradedElement> {
        let (d, &c) = s.terms.iter().next().ok_or(Error::ZeroElement)?;
        Ok(GradedElement::monomial(c, d.clone()))
    }

    /// v = deg ∘ λ.
    pub fn valuation(&self, s: &GradedElement) -> Result<Degree> {
        s.terms.keys().next().cloned().ok_or(Error::ZeroElement)
    }

    /// Minimal polynomial over T of a nonzero homogeneous element, coefficients listed from x^0.
    pub fn minimal_polynomial(&self, a: &GradedElement) -> Result<Vec<GradedElement>> {
        let (_, alpha) = homogeneous_parts(a)?;
        let e = self.degree_order(alpha);
        let ealpha: Degree = alpha.iter().map(|x| x * e as i64).collect();
        let tau = self.central_monomial(&ealpha).expect("eα lies in Γ_T");
        let ae = self.pow(a, e as i64)?;
        let beta = self.mul(&ae, &self.inverse(&tau)?);
        let (bc, bd) = homogeneous_parts(&beta)?;
        debug_assert!(bd.iter().all(|&x| x == 0));
        let mu = self.t0_minimal_polynomial(bc);
        let d = mu.degree().expect("nonzero");
        let mut out = vec![GradedElement::zero(); e as usize * d + 1];
        for (j, &mj) in mu.coeffs().iter().enumerate() {
            if mj.is_zero() {
                continue;
            }
            let t = self.pow(&tau, (d - j) as i64)?;
            out[e as usize * j] = self.scale(mj, &t);
        }
        Ok(out)
    }

    /// Minimal polynomial of c ∈ M over T₀.
    pub fn t0_minimal_polynomial(&self, c: Fe) -> Poly {
        let f = &*self.field;
        let step = self.t0_prime_degree() as i64;
        let mut orbit = vec![c];
        loop {
            let next = f.frob(*orbit.last().expect("nonempty"), step);
            if next == c {
                break;
            }
            orbit.push(next);
        }
        orbit.iter().fold(Poly::one(), |acc, &r| acc.mul(f, &Poly::new(vec![f.neg(r), Fe::ONE])))
    }

    /// h(b) = Σ h_i b^i.
    pub fn evaluate(&self, h: &[GradedElement], b: &GradedElement) -> GradedElement {
        let mut acc = GradedElement::zero();
        for c in h.iter().rev() {
            acc = self.add(&self.mul(&acc, b), c);
        }
        acc
    }

    /// Nrd(a) = [(−1)^d h_a(0)]^{ind/d}, d = deg h_a.
    pub fn reduced_norm(&self, a: &GradedElement) -> Result<GradedElement> {
        let h = self.minimal_polynomial(a)?;
        let d = (h.len() - 1) as u64;
        if self.index % d != 0 {
            return Err(Error::InvalidRing(format!("minimal polynomial degree {d} does not divide the index")));
        }
        let mut h0 = h[0].clone();
        if d % 2 == 1 {
            h0 = self.neg(&h0);
        }
        self.pow(&h0, (self.index / d) as i64)
    }

    /// Nrd on E₀ = M: N_{M/T₀}(c)^{ind/[M:T₀]}.
    pub fn residue_reduced_norm(&self, c: Fe) -> Fe {
        let f = &*self.field;
        let n = f.norm_to(c, self.t0_prime_degree());
        f.pow(n, (self.index / self.residue_degree() as u64) as i64)
    }

    /// Random nonzero homogeneous element with degree entries in [-span, span].
    pub fn random_homogeneous<R: Rng>(&self, rng: &mut R, span: i64) -> GradedElement {
        let c = self.field.from_log(rng.gen_range(0..self.field.units()) as i64);
        let d = (0..self.n).map(|_| rng.gen_range(-span..=span)).collect();
        GradedElement::monomial(c, d)
    }

    pub fn descriptor(&self) -> crate::descriptor::GradedDivAlgDesc {
        crate::descriptor::GradedDivAlgDesc {
            gamma_rank: self.n,
            gamma_t: self.gamma_t.row_vecs().iter().map(|r| r.iter().map(|x| x.to_i64().expect("small")).collect()).collect(),
            residue: crate::descriptor::Residue::FiniteField { q: self.t0_order(), m: self.residue_degree() },
            index: self.index,
            theta_kernel: Some(
                self.theta_kernel().row_vecs().iter().map(|r| r.iter().map(|x| x.to_i64().expect("small")).collect()).collect(),
            ),
        }
    }
}

pub(crate) fn homogeneous_parts(a: &GradedElement) -> Result<(Fe, &Degree)> {
    if a.is_zero() {
        return Err(Error::ZeroElement);
    }
    a.as_monomial().ok_or_else(|| Error::Schema("element is not homogeneous".into()))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// GF(9)[z^{±1}; Frob], z² = x central.
    pub fn gf9_frob() -> MonomialGradedRing {
        MonomialGradedRing::new(9 / 3, 2, vec![1], vec![2], vec![Fe::ONE], vec![vec![Fe::ONE]]).unwrap()
    }

    /// Symbol algebra over GF(q): z1 z2 = ω z2 z1, z_i^k central, ω of order k.
    pub fn symbol(q: u64, k: u64) -> MonomialGradedRing {
        let f = Gf::with_order(q).unwrap();
        let w = f.from_log(((q - 1) / k) as i64);
        let wi = f.inv(w).unwrap();
        MonomialGradedRing::new(q, 1, vec![0, 0], vec![k, k], vec![Fe::ONE; 2], vec![vec![Fe::ONE, w], vec![wi, Fe::ONE]])
            .unwrap()
    }

    fn z(n: usize, i: usize, e: i64) -> GradedElement {
        let mut d = vec![0; n];
        d[i] = e;
        GradedElement::monomial(Fe::ONE, d)
    }

    #[test]
    fn congruence_solver() {
        assert_eq!(solve_congruences(&[(2, 4)], 8), Some((2, 4)));
        assert_eq!(solve_congruences(&[(2, 3)], 8), None);
        assert_eq!(solve_congruences(&[(2, 4), (3, 6)], 8), Some((2, 8)));
        assert_eq!(solve_congruences(&[(2, 4), (3, 0)], 8), None);
        assert_eq!(solve_congruences(&[], 8), Some((0, 1)));
        // brute force agreement
        for n in 2..20i128 {
            for a in 0..n {
                for b in 0..n {
                    let sols: Vec<i128> = (0..n).filter(|x| (a * x - b).rem_euclid(n) == 0).collect();
                    match solve_congruences(&[(a, b)], n) {
                        None => assert!(sols.is_empty()),
                        Some((r, m)) => assert_eq!(sols, (0..n).filter(|x| x % m == r).collect::<Vec<_>>()),
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_commutation() {
        let e = gf9_frob();
        let f = e.field().clone();
        for c in f.nonzero() {
            let lhs = e.mul(&z(1, 0, 1), &GradedElement::scalar(c, 1));
            assert_eq!(lhs, GradedElement::monomial(f.pow(c, 3), vec![1]));
        }
        let a = e.element(f.from_log(5), vec![3]);
        assert_eq!(e.mul(&a, &e.one()), a);
    }

    #[test]
    fn symbol_commutation() {
        let e = symbol(5, 2);
        let f = e.field().clone();
        let z1z2 = e.mul(&z(2, 0, 1), &z(2, 1, 1));
        let z2z1 = e.mul(&z(2, 1, 1), &z(2, 0, 1));
        assert_eq!(z1z2, e.scale(e.u()[0][1], &z2z1));
        assert_eq!(e.u()[0][1], f.from_i64(-1));
        assert_eq!(e.index(), 2);
        assert_eq!(e.t0_order(), 5);
        assert_eq!(e.grade_quotient().factors_u64(), vec![2, 2]);
    }

    #[test]
    fn gf9_invariants() {
        let e = gf9_frob();
        assert_eq!(e.index(), 2);
        assert_eq!(e.t0_order(), 3);
        assert_eq!(e.gamma_index(), 2);
        assert_eq!(e.central_monomial(&[2]), Some(z(1, 0, 2)));
        assert_eq!(e.central_coefficient(&[1]), None);
    }

    #[test]
    fn minimal_polynomial_examples() {
        let e = gf9_frob();
        let f = e.field().clone();
        let hz = e.minimal_polynomial(&z(1, 0, 1)).unwrap();
        assert_eq!(hz, vec![e.neg(&z(1, 0, 2)), GradedElement::zero(), e.one()]);
        assert_eq!(e.reduced_norm(&z(1, 0, 1)).unwrap(), e.neg(&z(1, 0, 2)));
        // Nrd(z)^2 = Nrd(z^2) = (z^2)^2
        let n1 = e.reduced_norm(&z(1, 0, 1)).unwrap();
        assert_eq!(e.mul(&n1, &n1), e.reduced_norm(&z(1, 0, 2)).unwrap());
        assert_eq!(e.reduced_norm(&z(1, 0, 2)).unwrap(), z(1, 0, 4));
        let c = f.generator();
        let hc = e.minimal_polynomial(&GradedElement::scalar(c, 1)).unwrap();
        // (x - c)(x - c^3)
        let poly = Poly::new(vec![f.mul(c, f.pow(c, 3)), f.neg(f.add(c, f.pow(c, 3))), Fe::ONE]);
        for (i, coeff) in hc.iter().enumerate() {
            assert_eq!(coeff.coeff(&[0]), poly.coeff(i));
        }
        for a in f.nonzero() {
            let nrd = e.reduced_norm(&GradedElement::scalar(a, 1)).unwrap();
            assert_eq!(nrd, GradedElement::scalar(f.pow(a, 4), 1));
            assert_eq!(f.pow(a, 4), e.residue_reduced_norm(a));
        }
        // central element: x - a
        let t = z(1, 0, 2);
        assert_eq!(e.minimal_polynomial(&t).unwrap(), vec![e.neg(&t), e.one()]);
        assert_eq!(e.reduced_norm(&t).unwrap(), e.mul(&t, &t));
    }

    #[test]
    fn leading_term_examples() {
        let e = gf9_frob();
        let s = e.add(&e.one(), &z(1, 0, 1));
        assert_eq!(e.leading_term(&s).unwrap(), e.one());
        assert_eq!(e.leading_term(&z(1, 0, 3)).unwrap(), z(1, 0, 3));
        assert_eq!(e.leading_term(&GradedElement::zero()), Err(Error::ZeroElement));
        assert_eq!(e.valuation(&s).unwrap(), vec![0]);
    }

    #[test]
    fn rejects_bad_presentations() {
        let f = Gf::new(5, 1).unwrap();
        // u12 u21 != 1
        let r = MonomialGradedRing::new(5, 1, vec![0, 0], vec![2, 2], vec![Fe::ONE; 2], vec![vec![Fe::ONE, f.from_i64(2)], vec![f.from_i64(2), Fe::ONE]]);
        assert!(matches!(r, Err(Error::InvalidRing(_))));
        // z^2 not central when u has order 4 and r = 2
        let w = f.from_i64(2);
        let r = MonomialGradedRing::new(5, 1, vec![0, 0], vec![2, 2], vec![Fe::ONE; 2], vec![vec![Fe::ONE, w], vec![f.inv(w).unwrap(), Fe::ONE]]);
        assert!(matches!(r, Err(Error::InvalidRing(_))));
        // σ^r ≠ id
        let r = MonomialGradedRing::new(3, 2, vec![1], vec![3], vec![Fe::ONE], vec![vec![Fe::ONE]]);
        assert!(matches!(r, Err(Error::InvalidRing(_))));
    }

    #[test]
    fn commutators_lie_in_degree_zero() {
        let e = symbol(13, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a = e.random_homogeneous(&mut rng, 3);
            let b = e.random_homogeneous(&mut rng, 3);
            let c = e.commutator(&a, &b).unwrap();
            assert_eq!(c.degree(), Some(&vec![0, 0]));
        }
    }

    fn ring_pool() -> Vec<MonomialGradedRing> {
        let f27 = Gf::new(3, 3).unwrap();
        vec![
            gf9_frob(),
            symbol(5, 2),
            symbol(7, 3),
            symbol(13, 4),
            MonomialGradedRing::new(3, 3, vec![1], vec![3], vec![f27.from_log(13)], vec![vec![Fe::ONE]]).unwrap(),
            // GF(16)[z; Frob_2], cyclic of degree 4
            MonomialGradedRing::new(2, 4, vec![1], vec![4], vec![Fe::ONE], vec![vec![Fe::ONE]]).unwrap(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn ring_axioms(which in 0usize..6, seed in any::<u64>()) {
            let e = &ring_pool()[which];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = e.random_homogeneous(&mut rng, 4);
            let b = e.random_homogeneous(&mut rng, 4);
            let c = e.random_homogeneous(&mut rng, 4);
            // associativity on random monomials
            prop_assert_eq!(e.mul(&e.mul(&a, &b), &c), e.mul(&a, &e.mul(&b, &c)));
            // inverses
            prop_assert_eq!(e.mul(&a, &e.inverse(&a).unwrap()), e.one());
            prop_assert_eq!(e.mul(&e.inverse(&a).unwrap(), &a), e.one());
            // λ multiplicative on sums
            let s = e.add(&a, &b);
            let t = e.add(&c, &e.one());
            if !s.is_zero() && !t.is_zero() {
                prop_assert_eq!(e.leading_term(&e.mul(&s, &t)).unwrap(), e.mul(&e.leading_term(&s).unwrap(), &e.leading_term(&t).unwrap()));
            }
            // h_a(a) = 0, degree law, multiplicativity
            let h = e.minimal_polynomial(&a).unwrap();
            prop_assert!(e.evaluate(&h, &a).is_zero());
            prop_assert!(h.iter().all(|x| x.is_zero() || e.is_central(x)));
            let na = e.reduced_norm(&a).unwrap();
            let nb = e.reduced_norm(&b).unwrap();
            let expect: Degree = a.degree().unwrap().iter().map(|x| x * e.index() as i64).collect();
            prop_assert_eq!(na.degree(), Some(&expect));
            prop_assert!(e.is_central(&na));
            prop_assert_eq!(e.reduced_norm(&e.mul(&a, &b)).unwrap(), e.mul(&na, &nb));
        }
    }
}
