//! Truncated Laurent series over GF(q), λ-polynomials and their homogenization.

use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use num_integer::Integer;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ff::{Fe, Gf};
use crate::poly::Poly;

/// Precision marker for exactly known series.
pub const EXACT: i64 = i64::MAX;

/// Σ c_k t^k known modulo t^prec. Coefficients start at `val`; the first is nonzero unless
/// the series is zero to the known precision, in which case `coeffs` is empty.
#[derive(Clone)]
pub struct Series {
    field: Arc<Gf>,
    val: i64,
    coeffs: Vec<Fe>,
    prec: i64,
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl PartialEq for Series {
    /// Same known precision and same coefficients.
    fn eq(&self, o: &Series) -> bool {
        self.prec == o.prec && self.coeffs == o.coeffs && (self.coeffs.is_empty() || self.val == o.val)
    }
}

impl Series {
    pub fn new(field: &Arc<Gf>, val: i64, coeffs: Vec<Fe>, prec: i64) -> Series {
        let mut s = Series { field: field.clone(), val, coeffs, prec };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        if self.prec != EXACT {
            let keep = (self.prec - self.val).clamp(0, self.coeffs.len() as i64) as usize;
            self.coeffs.truncate(keep);
        }
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => {
                self.coeffs.clear();
                self.val = if self.prec == EXACT { 0 } else { self.prec };
            }
            Some(k) => {
                self.coeffs.drain(..k);
                self.val += k as i64;
                while self.coeffs.last().is_some_and(|c| c.is_zero()) {
                    self.coeffs.pop();
                }
            }
        }
    }

    pub fn zero(field: &Arc<Gf>, prec: i64) -> Series {
        Series::new(field, prec.min(0), Vec::new(), prec)
    }

    pub fn exact_zero(field: &Arc<Gf>) -> Series {
        Series::zero(field, EXACT)
    }

    pub fn constant(field: &Arc<Gf>, c: Fe) -> Series {
        Series::new(field, 0, vec![c], EXACT)
    }

    pub fn one(field: &Arc<Gf>) -> Series {
        Series::constant(field, Fe::ONE)
    }

    /// c·t^k
    pub fn monomial(field: &Arc<Gf>, c: Fe, k: i64) -> Series {
        Series::new(field, k, vec![c], EXACT)
    }

    pub fn field(&self) -> &Arc<Gf> {
        &self.field
    }

    /// Valuation; for a series that is zero to its precision this is the precision.
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

    /// Precision relative to the valuation.
    pub fn relative_precision(&self) -> i64 {
        if self.prec == EXACT {
            EXACT
        } else {
            self.prec - self.valuation()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.prec == EXACT
    }

    /// Coefficient of t^k; zero outside the stored range.
    pub fn coeff(&self, k: i64) -> Fe {
        if k < self.val {
            return Fe::ZERO;
        }
        self.coeffs.get((k - self.val) as usize).copied().unwrap_or(Fe::ZERO)
    }

    /// Leading coefficient (zero for the zero series).
    pub fn lead(&self) -> Fe {
        self.coeffs.first().copied().unwrap_or(Fe::ZERO)
    }

    pub fn truncate(&self, prec: i64) -> Series {
        Series::new(&self.field, self.val, self.coeffs.clone(), self.prec.min(prec))
    }

    /// The exact series formed by the terms below t^prec.
    pub fn cut(&self, prec: i64) -> Series {
        let keep = (prec - self.val).clamp(0, self.coeffs.len() as i64) as usize;
        Series::new(&self.field, self.val, self.coeffs[..keep].to_vec(), EXACT)
    }

    /// Equality of the known coefficients below `prec`.
    pub fn agrees_to(&self, o: &Series, prec: i64) -> bool {
        self.sub(o).valuation() >= prec
    }

    fn combine(&self, o: &Series, neg: bool) -> Series {
        let f = &self.field;
        let prec = self.prec.min(o.prec);
        let lo = self.valuation().min(o.valuation()).min(if prec == EXACT { i64::MAX } else { prec });
        if self.is_zero() && o.is_zero() {
            return Series::zero(f, prec);
        }
        let hi_a = self.val + self.coeffs.len() as i64;
        let hi_b = o.val + o.coeffs.len() as i64;
        let mut hi = hi_a.max(hi_b);
        if prec != EXACT {
            hi = hi.min(prec);
        }
        let coeffs: Vec<Fe> = (lo..hi.max(lo))
            .map(|k| {
                let b = o.coeff(k);
                f.add(self.coeff(k), if neg { f.neg(b) } else { b })
            })
            .collect();
        Series::new(f, lo, coeffs, prec)
    }

    pub fn add(&self, o: &Series) -> Series {
        self.combine(o, false)
    }

    pub fn sub(&self, o: &Series) -> Series {
        self.combine(o, true)
    }

    pub fn neg(&self) -> Series {
        let f = &self.field;
        Series::new(f, self.val, self.coeffs.iter().map(|&c| f.neg(c)).collect(), self.prec)
    }

    pub fn scale(&self, c: Fe) -> Series {
        let f = &self.field;
        if c.is_zero() {
            return Series::zero(f, self.relative_precision().saturating_add(self.valuation()).max(self.prec));
        }
        Series::new(f, self.val, self.coeffs.iter().map(|&a| f.mul(a, c)).collect(), self.prec)
    }

    /// Multiply by t^k.
    pub fn shift(&self, k: i64) -> Series {
        let prec = if self.prec == EXACT { EXACT } else { self.prec + k };
        Series::new(&self.field, self.val + k, self.coeffs.clone(), prec)
    }

    pub fn mul(&self, o: &Series) -> Series {
        let f = &self.field;
        let (va, vb) = (self.valuation(), o.valuation());
        let prec = match (self.prec, o.prec) {
            (EXACT, EXACT) => EXACT,
            (EXACT, pb) => if self.is_zero() { EXACT } else { pb + va },
            (pa, EXACT) => if o.is_zero() { EXACT } else { pa + vb },
            (pa, pb) => (pa + vb).min(pb + va),
        };
        if self.is_zero() || o.is_zero() {
            return Series::zero(f, prec);
        }
        let val = va + vb;
        let mut len = self.coeffs.len() + o.coeffs.len() - 1;
        if prec != EXACT {
            len = len.min((prec - val).max(0) as usize);
        }
        let mut out = vec![Fe::ZERO; len];
        for (i, &a) in self.coeffs.iter().enumerate().take(len) {
            for (j, &b) in o.coeffs.iter().enumerate().take(len - i) {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Series::new(f, val, out, prec)
    }

    /// Inverse, with absolute precision capped at `cap` when the input is exact.
    pub fn inv(&self, cap: i64) -> Result<Series> {
        let f = &self.field;
        if self.is_zero() {
            return Err(if self.is_exact() {
                Error::DivisionByZero
            } else {
                Error::PrecisionExhausted("inverting a series that is zero to its precision".into())
            });
        }
        let v = self.val;
        let prec = if self.prec == EXACT { cap } else { (self.prec - 2 * v).min(cap) };
        if self.prec == EXACT && self.coeffs.len() == 1 {
            return Ok(Series::monomial(f, f.inv(self.coeffs[0])?, -v));
        }
        let n = (prec + v).max(0) as usize;
        let a0inv = f.inv(self.coeffs[0])?;
        let mut b: Vec<Fe> = Vec::with_capacity(n);
        for k in 0..n {
            if k == 0 {
                b.push(a0inv);
                continue;
            }
            let s = f.sum((1..=k.min(self.coeffs.len() - 1)).map(|i| f.mul(self.coeffs[i], b[k - i])));
            b.push(f.neg(f.mul(s, a0inv)));
        }
        Ok(Series::new(f, -v, b, prec))
    }

    pub fn div(&self, o: &Series, cap: i64) -> Result<Series> {
        Ok(self.mul(&o.inv(cap)?))
    }

    pub fn pow(&self, e: u32) -> Series {
        (0..e).fold(Series::one(&self.field), |acc, _| acc.mul(self))
    }

    /// Substitute t ↦ t^b.
    pub fn inflate(&self, b: i64) -> Series {
        let mut c = vec![Fe::ZERO; ((self.coeffs.len().max(1) - 1) as i64 * b + 1) as usize];
        for (i, &a) in self.coeffs.iter().enumerate() {
            c[i * b as usize] = a;
        }
        let prec = if self.prec == EXACT { EXACT } else { self.prec * b };
        Series::new(&self.field, self.val * b, c, prec)
    }

    /// Inverse of `inflate`; `None` if some exponent is not a multiple of b.
    pub fn deflate(&self, b: i64) -> Option<Series> {
        let mut c = Vec::new();
        for (i, &a) in self.coeffs.iter().enumerate() {
            let k = self.val + i as i64;
            if k.rem_euclid(b) == 0 {
                c.push(a);
            } else if !a.is_zero() {
                return None;
            }
        }
        if self.val.rem_euclid(b) != 0 && !self.coeffs.is_empty() {
            return None;
        }
        let prec = if self.prec == EXACT { EXACT } else { Integer::div_floor(&self.prec, &b) };
        Some(Series::new(&self.field, self.val.div_euclid(b), c, prec))
    }

    /// Parse `t^v * (c0 + c1*t + ...) [prec=N]`; coefficients are packed base-p codes.
    pub fn parse(field: &Arc<Gf>, s: &str) -> Result<Series> {
        let bad = || Error::Schema(format!("cannot parse series literal '{s}'"));
        let s = s.trim();
        let (body, prec) = match s.rfind("[prec=") {
            Some(i) => {
                let p = s[i + 6..].trim_end().strip_suffix(']').ok_or_else(bad)?;
                (s[..i].trim(), p.trim().parse::<i64>().map_err(|_| bad())?)
            }
            None => (s, EXACT),
        };
        let (v, inner) = match body.split_once('*') {
            Some((head, rest)) if head.trim().starts_with("t^") && rest.trim().starts_with('(') => {
                let v = head.trim()[2..].trim().trim_matches(|c| c == '(' || c == ')').parse::<i64>().map_err(|_| bad())?;
                (v, rest.trim().strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?)
            }
            _ => (0, body.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(body)),
        };
        let mut coeffs: Vec<Fe> = Vec::new();
        let inner = inner.trim();
        if inner != "0" && !inner.is_empty() {
            for term in inner.split('+').map(str::trim) {
                let (c, k) = match term.split_once('*') {
                    Some((c, tk)) => {
                        let k = match tk.trim() {
                            "t" => 1,
                            other => other.strip_prefix("t^").and_then(|e| e.parse::<usize>().ok()).ok_or_else(bad)?,
                        };
                        (c.trim().parse::<u64>().map_err(|_| bad())?, k)
                    }
                    None if term == "t" => (1, 1),
                    None if term.starts_with("t^") => (1, term[2..].parse::<usize>().map_err(|_| bad())?),
                    None => (term.parse::<u64>().map_err(|_| bad())?, 0),
                };
                if coeffs.len() <= k {
                    coeffs.resize(k + 1, Fe::ZERO);
                }
                coeffs[k] = field.add(coeffs[k], field.from_int(c));
            }
        }
        Ok(Series::new(field, v, coeffs, prec))
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, &c)| {
                let c = self.field.to_int(c);
                match k {
                    0 => format!("{c}"),
                    1 => format!("{c}*t"),
                    _ => format!("{c}*t^{k}"),
                }
            })
            .collect();
        let body = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        let v = if self.coeffs.is_empty() { 0 } else { self.val };
        write!(f, "t^{v} * ({body})")?;
        if self.prec != EXACT {
            write!(f, " [prec={}]", self.prec)?;
        }
        Ok(())
    }
}

impl Serialize for Series {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Homogeneous polynomial Σ α_i t^{(n−i)λ + v_n} x^i over gr(F) = GF(q)[t, t^{-1}].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedPoly {
    pub lambda: Ratio<i64>,
    /// Degree of the leading coefficient, v(a_n).
    pub lead_degree: i64,
    /// α_i; forced zero where (n−i)λ is not an integer.
    pub coeffs: Poly,
}

impl GradedPoly {
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.degree()
    }

    /// Total homogeneous degree nλ + v_n.
    pub fn homogeneous_degree(&self) -> Ratio<i64> {
        self.lambda * self.coeffs.degree().unwrap_or(0) as i64 + self.lead_degree
    }

    /// Degree of the coefficient of x^i.
    pub fn coeff_degree(&self, i: usize) -> Ratio<i64> {
        self.lambda * (self.coeffs.degree().unwrap_or(0) as i64 - i as i64) + self.lead_degree
    }

    pub fn mul(&self, f: &Gf, o: &GradedPoly) -> Result<GradedPoly> {
        if self.lambda != o.lambda {
            return Err(Error::NotLambdaPoly);
        }
        Ok(GradedPoly { lambda: self.lambda, lead_degree: self.lead_degree + o.lead_degree, coeffs: self.coeffs.mul(f, &o.coeffs) })
    }

    /// Graded polynomials with the same grading are coprime iff their coefficient polynomials are.
    pub fn coprime(&self, f: &Gf, o: &GradedPoly) -> bool {
        self.coeffs.gcd(f, &o.coeffs).degree() == Some(0)
    }
}

fn lambda_bound(n: usize, i: usize, lambda: Ratio<i64>, vn: i64) -> Ratio<i64> {
    lambda * (n as i64 - i as i64) + vn
}

/// v(a_i) ≥ (n−i)λ + v(a_n) for all i, with equality at i = 0.
pub fn is_lambda_polynomial(f: &[Series], lambda: Ratio<i64>) -> bool {
    let n = f.len().saturating_sub(1);
    if n == 0 || f[0].is_zero() || f[n].is_zero() {
        return false;
    }
    let vn = f[n].valuation();
    f.iter().enumerate().all(|(i, a)| a.is_zero() || Ratio::from_integer(a.valuation()) >= lambda_bound(n, i, lambda, vn))
        && Ratio::from_integer(f[0].valuation()) == lambda_bound(n, 0, lambda, vn)
}

/// The λ forced on an irreducible polynomial: (v(a_0) − v(a_n))/n.
pub fn forced_lambda(f: &[Series]) -> Result<Ratio<i64>> {
    let n = f.len().saturating_sub(1);
    if n == 0 || f[0].is_zero() || f[n].is_zero() {
        return Err(Error::NotLambdaPoly);
    }
    Ok(Ratio::new(f[0].valuation() - f[n].valuation(), n as i64))
}

/// f^{(λ)}: keep the image of a_i in degree (n−i)λ + v(a_n), zero when v(a_i) is larger.
pub fn homogenize(f: &[Series], lambda: Ratio<i64>) -> Result<GradedPoly> {
    if !is_lambda_polynomial(f, lambda) {
        return Err(Error::NotLambdaPoly);
    }
    let n = f.len() - 1;
    let vn = f[n].valuation();
    let mut c = Vec::with_capacity(n + 1);
    for (i, a) in f.iter().enumerate() {
        let d = lambda_bound(n, i, lambda, vn);
        if !d.is_integer() {
            c.push(Fe::ZERO);
            continue;
        }
        let d = d.to_integer();
        if a.precision() <= d {
            return Err(Error::PrecisionExhausted(format!("coefficient {i} is unknown at t^{d}")));
        }
        c.push(a.coeff(d));
    }
    Ok(GradedPoly { lambda, lead_degree: vn, coeffs: Poly::new(c) })
}

/// Polynomials with series coefficients, little-endian.
pub mod spoly {
    use super::*;

    pub fn trim(mut p: Vec<Series>) -> Vec<Series> {
        while p.len() > 1 && p.last().is_some_and(|c| c.is_zero() && c.is_exact()) {
            p.pop();
        }
        p
    }

    pub fn add(f: &Arc<Gf>, a: &[Series], b: &[Series]) -> Vec<Series> {
        let n = a.len().max(b.len());
        let z = Series::exact_zero(f);
        trim((0..n).map(|i| a.get(i).unwrap_or(&z).add(b.get(i).unwrap_or(&z))).collect())
    }

    pub fn sub(f: &Arc<Gf>, a: &[Series], b: &[Series]) -> Vec<Series> {
        let nb: Vec<Series> = b.iter().map(Series::neg).collect();
        add(f, a, &nb)
    }

    pub fn mul(f: &Arc<Gf>, a: &[Series], b: &[Series]) -> Vec<Series> {
        if a.is_empty() || b.is_empty() {
            return vec![Series::exact_zero(f)];
        }
        let mut out = vec![Series::exact_zero(f); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = out[i + j].add(&x.mul(y));
            }
        }
        trim(out)
    }

    /// Division with remainder by a polynomial with leading coefficient 1.
    pub fn divrem_monic(f: &Arc<Gf>, a: &[Series], m: &[Series]) -> (Vec<Series>, Vec<Series>) {
        let dm = m.len() - 1;
        let mut r = a.to_vec();
        if r.len() <= dm {
            return (vec![Series::exact_zero(f)], r);
        }
        let mut q = vec![Series::exact_zero(f); r.len() - dm];
        for top in (dm..r.len()).rev() {
            let c = r[top].clone();
            q[top - dm] = c.clone();
            for (j, mj) in m.iter().enumerate() {
                r[top - dm + j] = r[top - dm + j].sub(&c.mul(mj));
            }
        }
        r.truncate(dm.max(1));
        (trim(q), trim(r))
    }

    /// p(x) evaluated by Horner.
    pub fn eval(f: &Arc<Gf>, p: &[Series], x: &Series) -> Series {
        p.iter().rev().fold(Series::exact_zero(f), |acc, c| acc.mul(x).add(c))
    }

    pub fn derivative(p: &[Series]) -> Vec<Series> {
        let f = p[0].field().clone();
        if p.len() == 1 {
            return vec![Series::exact_zero(&f)];
        }
        trim(p.iter().enumerate().skip(1).map(|(i, c)| c.scale(f.from_i64(i as i64))).collect())
    }

    pub fn truncate(p: &[Series], prec: i64) -> Vec<Series> {
        p.iter().map(|c| c.truncate(prec)).collect()
    }

    pub fn min_valuation(p: &[Series]) -> i64 {
        p.iter().map(Series::valuation).min().unwrap_or(EXACT)
    }

    pub fn from_poly(f: &Arc<Gf>, p: &Poly) -> Vec<Series> {
        if p.is_zero() {
            return vec![Series::exact_zero(f)];
        }
        p.coeffs().iter().map(|&c| Series::constant(f, c)).collect()
    }
}

/// Simple root a of f with ã = b·t^λ, by Newton iteration; v(f(a)) ≥ `precision`.
pub fn hensel_lift_root(f: &[Series], lambda: Ratio<i64>, b: Fe, precision: i64) -> Result<Series> {
    let fld = f.first().ok_or(Error::NotLambdaPoly)?.field().clone();
    let g = homogenize(f, lambda)?;
    if !lambda.is_integer() {
        return Err(Error::UnsupportedCase("a root of value λ ∉ ℤ lives in a ramified extension; use a tower".into()));
    }
    if b.is_zero() || !g.coeffs.eval(&fld, b).is_zero() {
        return Err(Error::NotSimpleRoot);
    }
    if g.coeffs.derivative(&fld).eval(&fld, b).is_zero() {
        return Err(Error::NotSimpleRoot);
    }
    let l = lambda.to_integer();
    let df = spoly::derivative(f);
    let work = 2 * precision + 8 + 2 * spoly::min_valuation(f).abs();
    let mut a = Series::monomial(&fld, b, l);
    for _ in 0..64 {
        let fa = spoly::eval(&fld, f, &a);
        if fa.valuation() >= precision && fa.precision() >= precision {
            // coefficients of negative value amplify the truncation error, so keep as many terms as that needs
            let mut keep = precision.max(l + 1);
            loop {
                let out = a.truncate(keep);
                let r = spoly::eval(&fld, f, &out);
                if (r.valuation() >= precision && r.precision() >= precision) || keep >= work {
                    return Ok(out);
                }
                keep += 1;
            }
        }
        let step = fa.div(&spoly::eval(&fld, &df, &a), work)?;
        a = a.sub(&step).truncate(work);
    }
    Err(Error::PrecisionExhausted(format!("Newton iteration did not reach precision {precision}")))
}

/// f = g·h with g^{(λ)} = g′ and h^{(λ)} = h′, lifted quadratically over GF(q)[[u]] with u^den = t.
pub fn hensel_lift_factorization(
    f: &[Series],
    lambda: Ratio<i64>,
    gp: &GradedPoly,
    hp: &GradedPoly,
    precision: i64,
) -> Result<(Vec<Series>, Vec<Series>)> {
    let fld = f.first().ok_or(Error::NotLambdaPoly)?.field().clone();
    let fh = homogenize(f, lambda)?;
    if gp.mul(&fld, hp)? != fh {
        return Err(Error::NotLambdaPoly);
    }
    if !gp.coprime(&fld, hp) {
        return Err(Error::NotCoprime);
    }
    let n = f.len() - 1;
    let (dg, dh) = (gp.degree().unwrap_or(0), hp.degree().unwrap_or(0));
    let (num, den) = (*lambda.numer(), *lambda.denom());
    let an = &f[n];
    // slack for the shifts between t- and u-coordinates and for negative valuations
    let pad = n as i64 * num.abs() + an.valuation().abs() + spoly::min_valuation(f).min(0).abs() + 4;
    let work = precision + 3 * pad;
    // F(y) = f(u^num y) / (u^{num n} a_n), monic and integral in u
    let an_inv = an.inflate(den).inv(work * den)?;
    let big: Vec<Series> =
        f.iter().enumerate().map(|(i, a)| a.inflate(den).mul(&an_inv).shift(num * i as i64 - num * n as i64)).collect();
    let gbar = gp.coeffs.monic(&fld);
    let hbar = hp.coeffs.monic(&fld);
    let (s0, t0, one) = gbar.xgcd(&fld, &hbar);
    debug_assert_eq!(one, Poly::one());
    let mut g = spoly::from_poly(&fld, &gbar);
    let mut h = spoly::from_poly(&fld, &hbar);
    let mut s = spoly::from_poly(&fld, &s0);
    let mut t = spoly::from_poly(&fld, &t0);
    let target = (precision + 2 * pad) * den;
    let mut m = 1i64;
    let goal_check = |g: &[Series], h: &[Series]| spoly::min_valuation(&spoly::sub(&fld, &big, &spoly::mul(&fld, g, h)));
    while goal_check(&g, &h) < target {
        if m > 4 * target + 64 {
            return Err(Error::PrecisionExhausted("factor lifting stalled".into()));
        }
        m = (2 * m).min(target + 1);
        let tr = |p: Vec<Series>| spoly::trim(p.iter().map(|c| c.cut(m)).collect());
        let e = tr(spoly::sub(&fld, &big, &spoly::mul(&fld, &g, &h)));
        let (q, r) = spoly::divrem_monic(&fld, &tr(spoly::mul(&fld, &s, &e)), &h);
        let g2 = tr(spoly::add(&fld, &spoly::add(&fld, &g, &spoly::mul(&fld, &t, &e)), &spoly::mul(&fld, &q, &g)));
        let h2 = tr(spoly::add(&fld, &h, &r));
        let b = tr(spoly::sub(
            &fld,
            &spoly::add(&fld, &spoly::mul(&fld, &s, &g2), &spoly::mul(&fld, &t, &h2)),
            &[Series::one(&fld)],
        ));
        let (c, d) = spoly::divrem_monic(&fld, &tr(spoly::mul(&fld, &s, &b)), &h2);
        s = tr(spoly::sub(&fld, &s, &d));
        t = tr(spoly::sub(&fld, &spoly::sub(&fld, &t, &spoly::mul(&fld, &t, &b)), &spoly::mul(&fld, &c, &g2)));
        g = spoly::trim(g2);
        h = spoly::trim(h2);
        if m > target {
            break;
        }
    }
    // back to x: g(x) = u^{num·deg g} G(x / u^num), then u^den = t
    let undo = |p: &[Series], d: usize| -> Result<Vec<Series>> {
        (0..=d)
            .map(|i| {
                let c = p.get(i).cloned().unwrap_or_else(|| Series::exact_zero(&fld)).shift(num * (d as i64 - i as i64));
                c.deflate(den).ok_or_else(|| Error::PrecisionExhausted("lifted factor is not defined over F".into()))
            })
            .collect()
    };
    let gm = undo(&g, dg)?;
    let hm = undo(&h, dh)?;
    let lead_g = Series::monomial(&fld, gp.coeffs.lead(), gp.lead_degree);
    let lead_h = an.div(&lead_g, work + an.valuation().abs() + 4)?;
    let out = precision + pad;
    let gf: Vec<Series> = gm.iter().map(|c| c.mul(&lead_g).truncate(out)).collect();
    let hf: Vec<Series> = hm.iter().map(|c| c.mul(&lead_h).truncate(out)).collect();
    Ok((gf, hf))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn gf(p: u64) -> Arc<Gf> {
        Gf::new(p, 1).unwrap()
    }

    fn s(f: &Arc<Gf>, lit: &str) -> Series {
        Series::parse(f, lit).unwrap()
    }

    #[test]
    fn literal_roundtrip_and_arithmetic() {
        let f = gf(5);
        let a = s(&f, "t^-1 * (2 + 3*t + 1*t^4) [prec=10]");
        assert_eq!((a.valuation(), a.precision(), a.coeff(3)), (-1, 10, f.from_int(1)));
        assert_eq!(s(&f, &a.to_string()), a);
        let one_plus_t = s(&f, "1 + t");
        let inv = one_plus_t.inv(8).unwrap();
        // (1+t)^{-1} = Σ (−1)^k t^k
        for k in 0..8 {
            assert_eq!(inv.coeff(k), f.from_i64(if k % 2 == 0 { 1 } else { -1 }));
        }
        assert_eq!(inv.precision(), 8);
        assert!(inv.mul(&one_plus_t).agrees_to(&Series::one(&f), 8));
        assert_eq!(Series::exact_zero(&f).inv(5), Err(Error::DivisionByZero));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn valuation_axioms(seed in any::<u64>()) {
            let f = gf(7);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rand_series = |rng: &mut ChaCha8Rng| {
                let v = rng.gen_range(-3..4);
                let c: Vec<Fe> = (0..6).map(|i| if i == 0 { f.from_int(rng.gen_range(1..7)) } else { f.from_int(rng.gen_range(0..7)) }).collect();
                Series::new(&f, v, c, v + rng.gen_range(4..12))
            };
            let a = rand_series(&mut rng);
            let b = rand_series(&mut rng);
            prop_assert_eq!(a.mul(&b).valuation(), a.valuation() + b.valuation());
            let sum = a.add(&b);
            prop_assert!(sum.valuation() >= a.valuation().min(b.valuation()));
            if a.valuation() != b.valuation() {
                prop_assert_eq!(sum.valuation(), a.valuation().min(b.valuation()));
            }
            let q = a.div(&b, 40).unwrap();
            prop_assert!(q.mul(&b).agrees_to(&a, a.precision().min(q.mul(&b).precision())));
        }
    }

    #[test]
    fn lambda_examples() {
        let f = gf(5);
        let x2_minus = |c: &str| vec![s(&f, c).neg(), Series::exact_zero(&f), Series::one(&f)];
        let half = Ratio::new(1, 2);
        assert!(is_lambda_polynomial(&x2_minus("1 + t"), Ratio::from_integer(0)));
        assert!(!is_lambda_polynomial(&x2_minus("t"), Ratio::from_integer(0)));
        assert!(is_lambda_polynomial(&x2_minus("t"), half));
        assert_eq!(forced_lambda(&x2_minus("t")).unwrap(), half);
        let h = homogenize(&x2_minus("1 + t"), Ratio::from_integer(0)).unwrap();
        assert_eq!(h.coeffs, Poly::new(vec![f.neg(Fe::ONE), Fe::ZERO, Fe::ONE]));
        let h = homogenize(&x2_minus("t"), half).unwrap();
        assert_eq!(h.coeffs, Poly::new(vec![f.neg(Fe::ONE), Fe::ZERO, Fe::ONE]));
        assert_eq!(h.homogeneous_degree(), Ratio::from_integer(1));
        assert_eq!(h.coeff_degree(1), half);
        assert_eq!(homogenize(&x2_minus("t"), Ratio::from_integer(0)), Err(Error::NotLambdaPoly));
    }

    #[test]
    fn sqrt_one_plus_t() {
        let f = gf(5);
        let poly = vec![s(&f, "1 + t").neg(), Series::exact_zero(&f), Series::one(&f)];
        let a = hensel_lift_root(&poly, Ratio::from_integer(0), Fe::ONE, 32).unwrap();
        // binomial series: 1 + t/2 − t²/8 + t³/16 over GF(5) is 1 + 3t + 3t² + 1t³
        let expect = [1, 3, 3, 1];
        for (k, &c) in expect.iter().enumerate() {
            assert_eq!(a.coeff(k as i64), f.from_int(c));
        }
        assert!(a.mul(&a).agrees_to(&s(&f, "1 + t"), 32));
        let lin = vec![s(&f, "2 + t").neg(), Series::one(&f)];
        assert!(hensel_lift_root(&lin, Ratio::from_integer(0), f.from_int(2), 32).unwrap().agrees_to(&s(&f, "2 + t"), 32));
        let x2_plus_t2 = vec![s(&f, "t^2"), Series::exact_zero(&f), Series::one(&f)];
        let i = hensel_lift_root(&x2_plus_t2, Ratio::from_integer(1), f.from_int(2), 32).unwrap();
        assert!(i.mul(&i).agrees_to(&s(&f, "t^2").neg(), 32));
        assert_eq!(hensel_lift_root(&x2_plus_t2, Ratio::from_integer(1), Fe::ONE, 32), Err(Error::NotSimpleRoot));
        let dbl0 = vec![s(&f, "1 + t"), s(&f, "2"), Series::one(&f)];
        // x² + 2x + 1 + t has the double residual root −1
        assert_eq!(hensel_lift_root(&dbl0, Ratio::from_integer(0), f.from_i64(-1), 32), Err(Error::NotSimpleRoot));
    }

    #[test]
    fn root_residual_survives_truncation() {
        // t^-3 (x² − (1+t)): the returned root must still give v(f(a)) ≥ 32
        let f = gf(5);
        let poly: Vec<Series> =
            [s(&f, "1 + t").neg(), Series::exact_zero(&f), Series::one(&f)].iter().map(|c| c.shift(-3)).collect();
        let a = hensel_lift_root(&poly, Ratio::from_integer(0), Fe::ONE, 32).unwrap();
        assert!(spoly::eval(&f, &poly, &a).valuation() >= 32);
    }

    #[test]
    fn factor_lift_examples() {
        let f = gf(5);
        let poly = vec![s(&f, "1 + t").neg(), Series::exact_zero(&f), Series::one(&f)];
        let z = Ratio::from_integer(0);
        let lin = |c: i64| GradedPoly { lambda: z, lead_degree: 0, coeffs: Poly::new(vec![f.from_i64(c), Fe::ONE]) };
        let (g, h) = hensel_lift_factorization(&poly, z, &lin(-1), &lin(1), 32).unwrap();
        let root = hensel_lift_root(&poly, z, Fe::ONE, 32).unwrap();
        assert!(g[0].neg().agrees_to(&root, 32));
        assert!(h[0].agrees_to(&root, 32));
        let full = homogenize(&poly, z).unwrap();
        let unit = GradedPoly { lambda: z, lead_degree: 0, coeffs: Poly::one() };
        let (g, h) = hensel_lift_factorization(&poly, z, &full, &unit, 32).unwrap();
        assert!(g.iter().zip(&poly).all(|(a, b)| a.agrees_to(b, 32)));
        assert!(h.len() == 1 && h[0].agrees_to(&Series::one(&f), 32));
        let sq = vec![s(&f, "1 + t"), s(&f, "2"), Series::one(&f)];
        assert_eq!(hensel_lift_factorization(&sq, z, &lin(1), &lin(1), 32), Err(Error::NotCoprime));
    }

    /// Random λ-polynomial of degree n (a multiple of the denominator of λ).
    pub(crate) fn random_lambda_poly(f: &Arc<Gf>, rng: &mut ChaCha8Rng, lambda: Ratio<i64>, n: usize) -> Vec<Series> {
        let p = f.order();
        let vn = rng.gen_range(-2..3);
        (0..=n)
            .map(|i| {
                let bound = lambda * (n - i) as i64 + vn;
                let v = bound.ceil().to_integer();
                let tail: Vec<Fe> = (0..5).map(|_| f.from_int(rng.gen_range(0..p))).collect();
                let mut c = tail;
                if i == 0 || i == n {
                    c[0] = f.from_int(rng.gen_range(1..p));
                    Series::new(f, v, c, EXACT)
                } else {
                    let shift = rng.gen_range(0..2);
                    Series::new(f, v + shift, c, EXACT)
                }
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn homogenization_is_multiplicative(seed in any::<u64>(), num in -3i64..4, den in 1i64..4) {
            let f = gf(if seed % 2 == 0 { 5 } else { 7 });
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lambda = Ratio::new(num, den);
            let d = *lambda.denom() as usize;
            let (ng, nh) = (d * rng.gen_range(1..3), d * rng.gen_range(1..3));
            let g = random_lambda_poly(&f, &mut rng, lambda, ng);
            let h = random_lambda_poly(&f, &mut rng, lambda, nh);
            let gh = spoly::mul(&f, &g, &h);
            prop_assert!(is_lambda_polynomial(&gh, lambda));
            let lhs = homogenize(&gh, lambda).unwrap();
            let rhs = homogenize(&g, lambda).unwrap().mul(&f, &homogenize(&h, lambda).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn lifted_factors_match(seed in any::<u64>(), num in -2i64..3, den in 1i64..3) {
            let f = gf(7);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lambda = Ratio::new(num, den);
            let d = *lambda.denom() as usize;
            let g = random_lambda_poly(&f, &mut rng, lambda, d);
            let h = random_lambda_poly(&f, &mut rng, lambda, d);
            let (gp, hp) = (homogenize(&g, lambda).unwrap(), homogenize(&h, lambda).unwrap());
            prop_assume!(gp.coprime(&f, &hp));
            let prod = spoly::mul(&f, &g, &h);
            let (g2, h2) = hensel_lift_factorization(&prod, lambda, &gp, &hp, 32).unwrap();
            prop_assert_eq!(homogenize(&g2, lambda).unwrap(), gp);
            prop_assert_eq!(homogenize(&h2, lambda).unwrap(), hp);
            let back = spoly::mul(&f, &g2, &h2);
            for (a, b) in back.iter().zip(&prod) {
                prop_assert!(a.agrees_to(b, 32), "{} vs {}", a, b);
            }
        }
    }
}
