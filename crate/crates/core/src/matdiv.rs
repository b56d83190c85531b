//! Matrices over truncated twisted Laurent series GF(q^m)((x; σ)): the weighted ring R, its ideal J,
//! row reduction inside 1+J and Dieudonné-determinant invariants.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ff::{Fe, Gf};
use crate::series::{Series, EXACT};

/// GF(q^m)((x; σ)) with σ = Frob_p^twist and w(x) = weight.
#[derive(Clone, Debug)]
pub struct TwRing {
    field: Arc<Gf>,
    /// σ as a power of the absolute Frobenius.
    twist: u32,
    weight: i64,
    /// Order of σ on the coefficient field.
    order: u32,
}

impl TwRing {
    /// σ = Frob_q^s on GF(q^m).
    pub fn new(q: u64, m: u32, s: u32) -> Result<TwRing> {
        let base = Gf::with_order(q)?;
        let field = Gf::new(base.characteristic(), base.degree() * m)?;
        Ok(TwRing::from_parts(field, base.degree() * s, 1))
    }

    fn from_parts(field: Arc<Gf>, twist: u32, weight: i64) -> TwRing {
        let k = field.degree();
        let t = twist % k;
        let order = k / (k as u64).gcd(&(t as u64)) as u32;
        TwRing { field, twist: t, weight, order }
    }

    /// The centralizer subring GF(q^m)((x^ℓ; σ^ℓ)), with the valuation normalized as in this ring.
    pub fn subring(&self, ell: u32) -> TwRing {
        TwRing::from_parts(self.field.clone(), self.twist * ell, self.weight * ell as i64)
    }

    pub fn field(&self) -> &Arc<Gf> {
        &self.field
    }

    pub fn weight(&self) -> i64 {
        self.weight
    }

    /// Index of the ring over its center.
    pub fn index(&self) -> u32 {
        self.order
    }

    pub fn sigma(&self, c: Fe, i: i64) -> Fe {
        self.field.frob(c, self.twist as i64 * i)
    }
}

/// Σ c_j x^j known modulo x^prec; the first stored coefficient is nonzero.
#[derive(Clone)]
pub struct TwSeries {
    ring: Arc<TwRing>,
    val: i64,
    coeffs: Vec<Fe>,
    prec: i64,
}

impl fmt::Debug for TwSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for TwSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, &c)| format!("{}*x^{}", self.ring.field.to_int(c), self.val + k as i64))
            .collect();
        write!(f, "{}", if terms.is_empty() { "0".to_string() } else { terms.join(" + ") })?;
        if self.prec != EXACT {
            write!(f, " [prec={}]", self.prec)?;
        }
        Ok(())
    }
}

impl Serialize for TwSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl TwSeries {
    pub fn new(ring: &Arc<TwRing>, val: i64, coeffs: Vec<Fe>, prec: i64) -> TwSeries {
        let mut s = TwSeries { ring: ring.clone(), val, coeffs, prec };
        if prec != EXACT {
            s.coeffs.truncate((prec - val).clamp(0, s.coeffs.len() as i64) as usize);
        }
        match s.coeffs.iter().position(|c| !c.is_zero()) {
            None => {
                s.coeffs.clear();
                s.val = if prec == EXACT { 0 } else { prec };
            }
            Some(k) => {
                s.coeffs.drain(..k);
                s.val += k as i64;
                while s.coeffs.last().is_some_and(|c| c.is_zero()) {
                    s.coeffs.pop();
                }
            }
        }
        s
    }

    pub fn zero(ring: &Arc<TwRing>) -> TwSeries {
        TwSeries::new(ring, 0, vec![], EXACT)
    }

    pub fn one(ring: &Arc<TwRing>) -> TwSeries {
        TwSeries::monomial(ring, Fe::ONE, 0)
    }

    pub fn monomial(ring: &Arc<TwRing>, c: Fe, k: i64) -> TwSeries {
        TwSeries::new(ring, k, vec![c], EXACT)
    }

    pub fn ring(&self) -> &Arc<TwRing> {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// x-adic order; the precision for a series that is zero to its precision.
    pub fn valuation(&self) -> i64 {
        if self.coeffs.is_empty() {
            self.prec
        } else {
            self.val
        }
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn coeff(&self, k: i64) -> Fe {
        if k < self.val {
            return Fe::ZERO;
        }
        self.coeffs.get((k - self.val) as usize).copied().unwrap_or(Fe::ZERO)
    }

    /// Certified lower bound for w; `None` for exact zero.
    pub fn w_lower(&self) -> Option<i64> {
        (!(self.is_zero() && self.prec == EXACT)).then(|| self.ring.weight * self.valuation())
    }

    /// w(a) when it is known exactly.
    pub fn w(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.ring.weight * self.val)
    }

    pub fn truncate(&self, prec: i64) -> TwSeries {
        TwSeries::new(&self.ring, self.val, self.coeffs.clone(), self.prec.min(prec))
    }

    fn combine(&self, o: &TwSeries, neg: bool) -> TwSeries {
        let f = &self.ring.field;
        let prec = self.prec.min(o.prec);
        if self.is_zero() && o.is_zero() {
            return TwSeries::new(&self.ring, 0, vec![], prec);
        }
        let lo = self.valuation().min(o.valuation());
        let mut hi = (self.val + self.coeffs.len() as i64).max(o.val + o.coeffs.len() as i64);
        if prec != EXACT {
            hi = hi.min(prec);
        }
        let c = (lo..hi.max(lo))
            .map(|k| {
                let b = o.coeff(k);
                f.add(self.coeff(k), if neg { f.neg(b) } else { b })
            })
            .collect();
        TwSeries::new(&self.ring, lo, c, prec)
    }

    pub fn add(&self, o: &TwSeries) -> TwSeries {
        self.combine(o, false)
    }

    pub fn sub(&self, o: &TwSeries) -> TwSeries {
        self.combine(o, true)
    }

    pub fn neg(&self) -> TwSeries {
        let f = &self.ring.field;
        TwSeries::new(&self.ring, self.val, self.coeffs.iter().map(|&c| f.neg(c)).collect(), self.prec)
    }

    /// (c x^i)(d x^j) = c σ^i(d) x^{i+j}
    pub fn mul(&self, o: &TwSeries) -> TwSeries {
        let f = &self.ring.field;
        let (va, vb) = (self.valuation(), o.valuation());
        let prec = match (self.prec, o.prec) {
            (EXACT, EXACT) => EXACT,
            (EXACT, pb) => if self.is_zero() { EXACT } else { pb + va },
            (pa, EXACT) => if o.is_zero() { EXACT } else { pa + vb },
            (pa, pb) => (pa + vb).min(pb + va),
        };
        if self.is_zero() || o.is_zero() {
            return TwSeries::new(&self.ring, 0, vec![], prec);
        }
        let mut len = self.coeffs.len() + o.coeffs.len() - 1;
        if prec != EXACT {
            len = len.min((prec - va - vb).max(0) as usize);
        }
        let mut out = vec![Fe::ZERO; len];
        for (i, &a) in self.coeffs.iter().enumerate().take(len) {
            let e = va + i as i64;
            for (j, &b) in o.coeffs.iter().enumerate().take(len - i) {
                out[i + j] = f.add(out[i + j], f.mul(a, self.ring.sigma(b, e)));
            }
        }
        TwSeries::new(&self.ring, va + vb, out, prec)
    }

    /// Two-sided inverse; exact inputs are inverted to absolute precision `cap`.
    pub fn inv(&self, cap: i64) -> Result<TwSeries> {
        let f = &self.ring.field;
        if self.is_zero() {
            return Err(if self.prec == EXACT {
                Error::DivisionByZero
            } else {
                Error::PrecisionExhausted("inverting an entry that is zero to its precision".into())
            });
        }
        let v = self.val;
        let prec = if self.prec == EXACT { cap } else { (self.prec - 2 * v).min(cap) };
        let n = (prec + v).max(0) as usize;
        // (a b)_k = Σ_i a_{v+i} σ^{v+i}(b_{k−v−i}); solve for b_{−v}, b_{−v+1}, …
        let a0inv = f.inv(self.coeffs[0])?;
        let mut b: Vec<Fe> = Vec::with_capacity(n);
        for k in 0..n {
            let s = f.sum((1..=k.min(self.coeffs.len() - 1)).map(|i| f.mul(self.coeffs[i], self.ring.sigma(b[k - i], v + i as i64))));
            let rhs = if k == 0 { Fe::ONE } else { f.neg(s) };
            b.push(self.ring.sigma(f.mul(a0inv, rhs), -v));
        }
        Ok(TwSeries::new(&self.ring, -v, b, prec))
    }

    pub fn random<R: Rng>(ring: &Arc<TwRing>, rng: &mut R, val: i64, len: usize, prec: i64) -> TwSeries {
        let f = &ring.field;
        let mut c: Vec<Fe> = (0..len).map(|_| f.from_int(rng.gen_range(0..f.order()))).collect();
        if let Some(c0) = c.first_mut() {
            *c0 = f.from_log(rng.gen_range(0..f.units()) as i64);
        }
        TwSeries::new(ring, val, c, prec)
    }
}

/// Reduced norm to the center GF(q^m)^σ((x^d)), as a series in z = x^d.
pub fn nrd_center(a: &TwSeries, cap: i64) -> Result<Series> {
    let r = &a.ring;
    let d = r.order as i64;
    let f = &r.field;
    // right multiplication by a on the left K((z))-basis 1, x, …, x^{d−1}
    let mut m: Vec<Vec<Series>> = Vec::new();
    for i in 0..d {
        let mut row: Vec<Vec<Fe>> = vec![Vec::new(); d as usize];
        let mut lo = vec![i64::MAX; d as usize];
        for k in a.val..a.val + a.coeffs.len() as i64 {
            let rr = (i + k).rem_euclid(d) as usize;
            lo[rr] = lo[rr].min((i + k).div_euclid(d));
        }
        for (kk, &c) in a.coeffs.iter().enumerate() {
            let k = a.val + kk as i64;
            let rr = (i + k).rem_euclid(d) as usize;
            let u = (i + k).div_euclid(d);
            let idx = (u - lo[rr]) as usize;
            if row[rr].len() <= idx {
                row[rr].resize(idx + 1, Fe::ZERO);
            }
            row[rr][idx] = f.add(row[rr][idx], r.sigma(c, i));
        }
        m.push(
            (0..d as usize)
                .map(|rr| {
                    let prec = if a.prec == EXACT { EXACT } else { Integer::div_ceil(&(i + a.prec - rr as i64), &d) };
                    let v = if lo[rr] == i64::MAX { 0 } else { lo[rr] };
                    Series::new(f, v, std::mem::take(&mut row[rr]), prec)
                })
                .collect(),
        );
    }
    series_det(m, cap)
}

/// Determinant over K((z)) by elimination with minimal-valuation pivots.
pub fn series_det(mut m: Vec<Vec<Series>>, cap: i64) -> Result<Series> {
    let n = m.len();
    let f = m[0][0].field().clone();
    let mut d = Series::one(&f);
    for col in 0..n {
        let Some(p) = (col..n).filter(|&r| !m[r][col].is_zero()).min_by_key(|&r| m[r][col].valuation()) else {
            return Ok(Series::zero(&f, m.iter().flatten().map(Series::precision).min().unwrap_or(EXACT)));
        };
        if p != col {
            m.swap(p, col);
            d = d.neg();
        }
        let inv = m[col][col].inv(cap)?;
        d = d.mul(&m[col][col]).truncate(cap);
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let fac = m[r][col].mul(&inv);
            for k in col..n {
                m[r][k] = m[r][k].sub(&fac.mul(&m[col][k])).truncate(cap);
            }
        }
    }
    Ok(d)
}

// ---- weighted matrices ----

pub type Mat = Vec<Vec<TwSeries>>;

pub fn identity(ring: &Arc<TwRing>, n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| if i == j { TwSeries::one(ring) } else { TwSeries::zero(ring) }).collect()).collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let ring = a[0][0].ring.clone();
    (0..n)
        .map(|i| {
            (0..b[0].len())
                .map(|j| (0..b.len()).fold(TwSeries::zero(&ring), |acc, k| acc.add(&a[i][k].mul(&b[k][j]))))
                .collect()
        })
        .collect()
}

pub fn mat_sub(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.sub(y)).collect()).collect()
}

/// Inverse by Gauss–Jordan with left row operations.
pub fn mat_inv(a: &Mat, cap: i64) -> Result<Mat> {
    let n = a.len();
    let ring = a[0][0].ring.clone();
    let mut m = a.clone();
    let mut inv = identity(&ring, n);
    for col in 0..n {
        let p = (col..n)
            .filter(|&r| !m[r][col].is_zero())
            .min_by_key(|&r| m[r][col].valuation())
            .ok_or(Error::DivisionByZero)?;
        m.swap(p, col);
        inv.swap(p, col);
        let pinv = m[col][col].inv(cap)?;
        for k in 0..n {
            m[col][k] = pinv.mul(&m[col][k]);
            inv[col][k] = pinv.mul(&inv[col][k]);
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let fac = m[r][col].clone();
            for k in 0..n {
                m[r][k] = m[r][k].sub(&fac.mul(&m[col][k]));
                inv[r][k] = inv[r][k].sub(&fac.mul(&inv[col][k]));
            }
        }
    }
    Ok(inv)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Membership {
    InOnePlusJ,
    InJ,
    InR,
    Outside,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Cmp {
    Strict,
    Equal,
    Below,
}

/// Compare w(a) with the bound, certified by the known precision.
fn compare(a: &TwSeries, bound: i64) -> Result<Cmp> {
    match a.w_lower() {
        None => Ok(Cmp::Strict),
        Some(w) if a.is_zero() => {
            if w > bound {
                Ok(Cmp::Strict)
            } else {
                Err(Error::PrecisionExhausted(format!("entry known to w ≥ {w} cannot certify w > {bound}")))
            }
        }
        Some(w) => Ok(match w.cmp(&bound) {
            std::cmp::Ordering::Greater => Cmp::Strict,
            std::cmp::Ordering::Equal => Cmp::Equal,
            std::cmp::Ordering::Less => Cmp::Below,
        }),
    }
}

/// Classify against R (w(a_ij) ≥ γ_i − γ_j) and J (strict); unverifiable comparisons are errors.
pub fn membership(m: &Mat, gamma: &[i64]) -> Result<Membership> {
    let n = m.len();
    let ring = m[0][0].ring.clone();
    let mut in_j = true;
    let mut in_r = true;
    let mut shifted_j = true;
    for i in 0..n {
        for j in 0..n {
            let b = gamma[i] - gamma[j];
            match compare(&m[i][j], b) {
                Ok(Cmp::Strict) => {}
                Ok(Cmp::Equal) => in_j = false,
                Ok(Cmp::Below) => {
                    in_j = false;
                    in_r = false;
                }
                Err(e) => {
                    if i != j {
                        return Err(e);
                    }
                    in_j = false;
                }
            }
            let e = if i == j { m[i][j].sub(&TwSeries::one(&ring)) } else { m[i][j].clone() };
            if compare(&e, b)? != Cmp::Strict {
                shifted_j = false;
            }
        }
    }
    Ok(if shifted_j {
        Membership::InOnePlusJ
    } else if in_j {
        Membership::InJ
    } else if in_r {
        Membership::InR
    } else {
        Membership::Outside
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Reduction {
    pub upper: Mat,
    /// The Y_k actually applied (columns already cleared are skipped): unipotent lower triangular.
    pub transcript: Vec<Mat>,
    /// Membership of every Y_k and every intermediate product.
    pub memberships: Vec<Membership>,
}

/// Bring t ∈ 1+J to upper triangular form by Y_k with entries y_ik = −t_ik t_kk⁻¹, staying in 1+J.
pub fn reduce_one_plus_j(t: &Mat, gamma: &[i64], cap: i64) -> Result<Reduction> {
    let n = t.len();
    if membership(t, gamma)? != Membership::InOnePlusJ {
        return Err(Error::InvalidRing("matrix is not in 1+J".into()));
    }
    let ring = t[0][0].ring.clone();
    let mut cur = t.clone();
    let mut transcript = Vec::new();
    let mut memberships = Vec::new();
    for k in 0..n.saturating_sub(1) {
        if cur.iter().skip(k + 1).all(|row| row[k].is_zero() && row[k].precision() == EXACT) {
            continue;
        }
        let inv = cur[k][k].inv(cap)?;
        let mut y = identity(&ring, n);
        for (i, row) in y.iter_mut().enumerate().skip(k + 1) {
            row[k] = cur[i][k].mul(&inv).neg();
        }
        let ym = membership(&y, gamma)?;
        cur = mat_mul(&y, &cur);
        for row in cur.iter_mut().skip(k + 1) {
            // the eliminated entries are zero up to their precision
            row[k] = TwSeries::new(&ring, 0, vec![], row[k].precision());
        }
        let cm = membership(&cur, gamma)?;
        if ym != Membership::InOnePlusJ || cm != Membership::InOnePlusJ {
            return Err(Error::InvalidRing(format!("left 1+J at column {k}")));
        }
        memberships.push(ym);
        memberships.push(cm);
        transcript.push(y);
    }
    for k in 0..n {
        if compare(&cur[k][k].sub(&TwSeries::one(&ring)), 0)? != Cmp::Strict {
            return Err(Error::InvalidRing(format!("diagonal entry {k} is not in 1+M")));
        }
    }
    Ok(Reduction { upper: cur, transcript, memberships })
}

/// Valuation and central reduced norm of the Dieudonné determinant, the invariants that survive C*/C′.
#[derive(Clone, Debug, Serialize)]
pub struct DdetInvariants {
    pub valuation: i64,
    pub nrd: Series,
}

impl DdetInvariants {
    pub fn agrees(&self, o: &DdetInvariants, prec: i64) -> bool {
        self.valuation == o.valuation && self.nrd.agrees_to(&o.nrd, prec)
    }
}

/// Row-reduce with minimal-valuation pivots; ddet is (sign)·Π d_k modulo commutators.
pub fn ddet(m: &Mat, cap: i64) -> Result<DdetInvariants> {
    let n = m.len();
    let ring = m[0][0].ring.clone();
    let f = ring.field.clone();
    let mut m = m.clone();
    let mut sign = false;
    let mut val = 0;
    let mut nrd = Series::one(&f);
    for col in 0..n {
        let p = (col..n)
            .filter(|&r| !m[r][col].is_zero())
            .min_by_key(|&r| m[r][col].valuation())
            .ok_or(Error::DivisionByZero)?;
        if p != col {
            m.swap(p, col);
            sign = !sign;
        }
        let piv = m[col][col].clone();
        let inv = piv.inv(cap)?;
        val += piv.w().ok_or(Error::DivisionByZero)?;
        nrd = nrd.mul(&nrd_center(&piv, cap)?).truncate(cap);
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let fac = m[r][col].mul(&inv);
            for k in col..n {
                m[r][k] = m[r][k].sub(&fac.mul(&m[col][k]));
            }
        }
    }
    if sign && ring.order % 2 == 1 {
        nrd = nrd.neg();
    }
    Ok(DdetInvariants { valuation: val, nrd })
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagonalCheck {
    pub ell: usize,
    pub ddet: DdetInvariants,
    pub power: DdetInvariants,
    /// The same invariants after mixing diag(a, …, a) with elementary row and column operations.
    pub mixed: DdetInvariants,
    pub consistent: bool,
}

/// ddet of diag(a, …, a) against a^ℓ.
pub fn ddet_diagonal_consistency<R: Rng>(a: &TwSeries, ell: usize, cap: i64, rng: &mut R) -> Result<DiagonalCheck> {
    let ring = a.ring.clone();
    let mut d = identity(&ring, ell);
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = a.clone();
    }
    let direct = ddet(&d, cap)?;
    let pow = (0..ell).fold(TwSeries::one(&ring), |acc, _| acc.mul(a));
    let power = DdetInvariants { valuation: pow.w().ok_or(Error::ZeroElement)?, nrd: nrd_center(&pow, cap)? };
    let mut lower = identity(&ring, ell);
    let mut upper = identity(&ring, ell);
    for i in 0..ell {
        for j in 0..i {
            let (vl, vu) = (rng.gen_range(-2..3), rng.gen_range(-2..3));
            lower[i][j] = TwSeries::random(&ring, rng, vl, 3, EXACT);
            upper[j][i] = TwSeries::random(&ring, rng, vu, 3, EXACT);
        }
    }
    let mixed = ddet(&mat_mul(&mat_mul(&lower, &d), &upper), cap)?;
    let prec = cap / (2 * ring.order as i64) - 2;
    let consistent = direct.agrees(&power, prec) && mixed.agrees(&power, prec);
    Ok(DiagonalCheck { ell, ddet: direct, power, mixed, consistent })
}

#[derive(Clone, Debug, Serialize)]
pub struct CongruenceRecord {
    pub gamma: Vec<i64>,
    pub matrix: Mat,
    pub s_in_j: bool,
    pub reduction: Reduction,
    pub diagonal_product: TwSeries,
    pub in_one_plus_m: bool,
}

/// Coordinates of d ∈ D in the left C-basis 1, x, …, x^{ℓ−1}.
fn coords(c_ring: &Arc<TwRing>, d: &TwSeries, ell: i64) -> Vec<TwSeries> {
    (0..ell)
        .map(|r| {
            let mut c = Vec::new();
            let mut lo = None;
            for (kk, &a) in d.coeffs.iter().enumerate() {
                let k = d.val + kk as i64;
                if (k - r).rem_euclid(ell) != 0 {
                    continue;
                }
                let u = (k - r).div_euclid(ell);
                let base = *lo.get_or_insert(u);
                let idx = (u - base) as usize;
                c.resize(idx + 1, Fe::ZERO);
                c[idx] = a;
            }
            let prec = if d.prec == EXACT { EXACT } else { Integer::div_ceil(&(d.prec - r), &ell) };
            TwSeries::new(c_ring, lo.unwrap_or(0), c, prec)
        })
        .collect()
}

/// Matrix of right multiplication by a ∈ 1+M_D over C = C_D(L) in a splitting base, reduced inside 1+J.
pub fn congruence_witness(a: &TwSeries, ell: u32, base: Option<&[TwSeries]>, cap: i64) -> Result<CongruenceRecord> {
    let d_ring = a.ring.clone();
    if d_ring.order % ell != 0 {
        return Err(Error::InvalidRing(format!("step ℓ = {ell} does not divide the index {}", d_ring.order)));
    }
    let one = TwSeries::one(&d_ring);
    if compare(&a.sub(&one), 0)? != Cmp::Strict {
        return Err(Error::InvalidRing("a is not in 1+M_D".into()));
    }
    let c_ring = Arc::new(d_ring.subring(ell));
    let l = ell as i64;
    let default: Vec<TwSeries> = (0..l).map(|r| TwSeries::monomial(&d_ring, Fe::ONE, r)).collect();
    let base = base.unwrap_or(&default);
    if base.len() != ell as usize || base.iter().any(TwSeries::is_zero) {
        return Err(Error::SplittingBase(format!("need {ell} nonzero base elements")));
    }
    // the min-formula holds iff the leading values are distinct modulo the value group of C
    for i in 0..base.len() {
        for j in 0..i {
            if (base[i].valuation() - base[j].valuation()).rem_euclid(l) == 0 {
                let ratio = base[i].coeff(base[i].valuation());
                return Err(Error::SplittingBase(format!(
                    "b_{j} and b_{i} have values congruent modulo {l}; a combination c_j b_j + c_i b_i with leading coefficient ratio {} cancels",
                    d_ring.field.to_int(ratio)
                )));
            }
        }
    }
    let gamma: Vec<i64> = base.iter().map(|b| d_ring.weight * b.valuation()).collect();
    let bmat: Mat = base.iter().map(|b| coords(&c_ring, b, l)).collect();
    let image: Mat = base.iter().map(|b| coords(&c_ring, &b.mul(a), l)).collect();
    let matrix = mat_mul(&image, &mat_inv(&bmat, cap)?);
    let s = mat_sub(&matrix, &identity(&c_ring, ell as usize));
    let s_in_j = membership(&s, &gamma)? == Membership::InJ;
    let reduction = reduce_one_plus_j(&matrix, &gamma, cap)?;
    let diagonal_product = (0..ell as usize).fold(TwSeries::one(&c_ring), |acc, k| acc.mul(&reduction.upper[k][k]));
    let in_one_plus_m = compare(&diagonal_product.sub(&TwSeries::one(&c_ring)), 0)? == Cmp::Strict;
    Ok(CongruenceRecord { gamma, matrix, s_in_j, reduction, diagonal_product, in_one_plus_m })
}

/// Random member of J for the weights γ, entries of relative precision `prec`.
pub fn random_j<R: Rng>(ring: &Arc<TwRing>, gamma: &[i64], prec: i64, rng: &mut R) -> Mat {
    let n = gamma.len();
    let w = ring.weight;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if rng.gen_bool(0.15) {
                        return TwSeries::zero(ring);
                    }
                    // least v with w·v > γ_i − γ_j
                    let v = Integer::div_floor(&(gamma[i] - gamma[j]), &w) + 1 + rng.gen_range(0..2);
                    TwSeries::random(ring, rng, v, prec as usize, v + prec)
                })
                .collect()
        })
        .collect()
}

pub fn one_plus(m: &Mat) -> Mat {
    let ring = m[0][0].ring.clone();
    let mut out = m.clone();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = row[i].add(&TwSeries::one(&ring));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf9x() -> Arc<TwRing> {
        Arc::new(TwRing::new(3, 2, 1).unwrap())
    }

    fn close(a: &TwSeries, b: &TwSeries, prec: i64) -> bool {
        a.sub(b).valuation() >= prec
    }

    #[test]
    fn twisted_arithmetic() {
        let r = gf9x();
        let f = r.field().clone();
        let g = f.generator();
        let x = TwSeries::monomial(&r, Fe::ONE, 1);
        let c = TwSeries::monomial(&r, g, 0);
        // x c = σ(c) x
        assert!(close(&x.mul(&c), &TwSeries::monomial(&r, f.pow(g, 3), 1), 50));
        let a = TwSeries::new(&r, -1, vec![g, Fe::ONE, f.from_int(2)], EXACT);
        let ai = a.inv(30).unwrap();
        assert!(close(&a.mul(&ai), &TwSeries::one(&r), 30 - 2));
        assert!(close(&ai.mul(&a), &TwSeries::one(&r), 30 - 2));
        // Nrd(x) = −z over the center GF(3)((x²))
        let n = nrd_center(&x, 20).unwrap();
        assert!(n.agrees_to(&Series::monomial(&f, f.neg(Fe::ONE), 1), 20));
        let nc = nrd_center(&c, 20).unwrap();
        assert!(nc.agrees_to(&Series::constant(&f, f.norm_to(g, 1)), 20));
    }

    #[test]
    fn membership_examples() {
        let r = gf9x();
        let gamma = [0, 2];
        let id = identity(&r, 2);
        assert_eq!(membership(&id, &gamma).unwrap(), Membership::InOnePlusJ);
        let zero: Mat = vec![vec![TwSeries::zero(&r); 2]; 2];
        assert_eq!(membership(&zero, &gamma).unwrap(), Membership::InJ);
        let mut m = zero.clone();
        m[0][1] = TwSeries::monomial(&r, Fe::ONE, -2);
        assert_eq!(membership(&m, &gamma).unwrap(), Membership::InR);
        m[0][1] = TwSeries::monomial(&r, Fe::ONE, -3);
        assert_eq!(membership(&m, &gamma).unwrap(), Membership::Outside);
        m[0][1] = TwSeries::new(&r, 0, vec![], -2);
        assert!(matches!(membership(&m, &gamma), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn reduction_examples() {
        let r = gf9x();
        let id = identity(&r, 3);
        let red = reduce_one_plus_j(&id, &[0, 1, 2], 40).unwrap();
        assert!(red.transcript.is_empty());
        for k in 0..3 {
            assert!(close(&red.upper[k][k], &TwSeries::one(&r), 40));
        }
        let single = one_plus(&vec![vec![TwSeries::monomial(&r, Fe::ONE, 1)]]);
        let red = reduce_one_plus_j(&single, &[5], 40).unwrap();
        assert!(red.transcript.is_empty());
        assert!(close(&red.upper[0][0], &single[0][0], 40));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn r_is_a_ring_and_j_an_ideal(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = gf9x();
            let n = rng.gen_range(1..4);
            let gamma: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..4)).collect();
            let j1 = random_j(&r, &gamma, 24, &mut rng);
            let j2 = random_j(&r, &gamma, 24, &mut rng);
            // an element of R: shift J entries down by one value step
            let rm: Mat = j1.iter().enumerate().map(|(i, row)| row.iter().enumerate().map(|(j, e)| {
                if e.is_zero() { e.clone() } else {
                    let v = gamma[i] - gamma[j];
                    TwSeries::new(&r, v, e.coeffs.clone(), v + 24)
                }
            }).collect()).collect();
            prop_assert!(matches!(membership(&rm, &gamma).unwrap(), Membership::InR | Membership::InJ | Membership::InOnePlusJ));
            prop_assert!(matches!(membership(&mat_mul(&rm, &rm), &gamma).unwrap(), Membership::InR | Membership::InJ | Membership::InOnePlusJ));
            prop_assert_eq!(membership(&mat_mul(&rm, &j2), &gamma).unwrap(), Membership::InJ);
            prop_assert_eq!(membership(&mat_mul(&j2, &rm), &gamma).unwrap(), Membership::InJ);
            let t1 = one_plus(&j1);
            let t2 = one_plus(&j2);
            prop_assert_eq!(membership(&mat_mul(&t1, &t2), &gamma).unwrap(), Membership::InOnePlusJ);
        }

        #[test]
        fn reduction_stays_in_one_plus_j(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = gf9x();
            let n = rng.gen_range(1..5);
            let gamma: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..4)).collect();
            let t = one_plus(&random_j(&r, &gamma, 24, &mut rng));
            let red = reduce_one_plus_j(&t, &gamma, 60).unwrap();
            prop_assert!(red.memberships.iter().all(|&m| m == Membership::InOnePlusJ));
            let replay = red.transcript.iter().fold(t.clone(), |acc, y| mat_mul(y, &acc));
            for i in 0..n {
                for j in 0..n {
                    let d = replay[i][j].sub(&red.upper[i][j]);
                    prop_assert!(d.is_zero(), "{} at ({}, {})", d, i, j);
                    if i > j {
                        prop_assert!(red.upper[i][j].is_zero());
                    }
                }
            }
        }

        #[test]
        fn diagonal_ddet_matches_power(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = gf9x();
            let v = rng.gen_range(-3..4);
            let a = TwSeries::random(&r, &mut rng, v, 6, EXACT);
            let ell = rng.gen_range(1..4);
            let chk = ddet_diagonal_consistency(&a, ell, 48, &mut rng).unwrap();
            prop_assert!(chk.consistent, "{:?}", chk);
            prop_assert_eq!(chk.ddet.valuation, ell as i64 * v);
        }
    }

    #[test]
    fn diagonal_examples() {
        let r = gf9x();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let chk = ddet_diagonal_consistency(&TwSeries::one(&r), 2, 40, &mut rng).unwrap();
        assert!(chk.consistent && chk.ddet.valuation == 0);
        let chk = ddet_diagonal_consistency(&TwSeries::monomial(&r, Fe::ONE, 1), 2, 40, &mut rng).unwrap();
        assert!(chk.consistent && chk.ddet.valuation == 2);
    }

    #[test]
    fn congruence_examples() {
        let d = gf9x();
        let one = TwSeries::one(&d);
        let rec = congruence_witness(&one, 2, None, 40).unwrap();
        assert!(rec.in_one_plus_m && rec.s_in_j);
        let a = TwSeries::new(&d, 0, vec![Fe::ONE, Fe::ONE], EXACT);
        let rec = congruence_witness(&a, 2, None, 40).unwrap();
        assert!(rec.s_in_j && rec.in_one_plus_m);
        // t′ = [[1, 1], [0, 1 − y]]
        let c = rec.diagonal_product.ring().clone();
        let f = c.field().clone();
        assert!(close(&rec.diagonal_product, &TwSeries::new(&c, 0, vec![Fe::ONE, f.neg(Fe::ONE)], EXACT), 15));
        let bad = [TwSeries::one(&d), TwSeries::new(&d, 0, vec![Fe::ONE, Fe::ONE], EXACT)];
        assert!(matches!(congruence_witness(&a, 2, Some(&bad), 40), Err(Error::SplittingBase(_))));
        let other = [TwSeries::new(&d, 0, vec![f.generator(), Fe::ONE], EXACT), TwSeries::monomial(&d, Fe::ONE, 3)];
        let rec = congruence_witness(&a, 2, Some(&other), 40).unwrap();
        assert!(rec.s_in_j && rec.in_one_plus_m);
        assert!(matches!(congruence_witness(&TwSeries::monomial(&d, Fe::ONE, 1), 2, None, 40), Err(Error::InvalidRing(_))));
    }

    #[test]
    fn random_congruence_witnesses() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (q, m) in [(3, 2), (2, 4), (5, 2), (2, 3)] {
            let d = Arc::new(TwRing::new(q, m, 1).unwrap());
            for ell in (1..=d.index()).filter(|l| d.index() % l == 0) {
                let mut a = TwSeries::random(&d, &mut rng, 1, 5, EXACT);
                a = a.add(&TwSeries::one(&d));
                let rec = congruence_witness(&a, ell, None, 40).unwrap();
                assert!(rec.s_in_j && rec.in_one_plus_m);
            }
        }
    }
}
