//! Towers of simple tame extensions of GF(q)((t)), graded norms and norm preimages of 1-units.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::ff::{Fe, Gf};
use crate::poly::{Poly, SubfieldPolys};
use crate::series::{Series, EXACT};

/// Stand-in value for exact zero, large enough to dominate every real valuation.
const INF: i64 = 1 << 40;

type Q = Ratio<i64>;

/// Element of a tower level: a base series, or coefficients on 1, x, …, x^{n−1} over the level below.
#[derive(Clone, Debug, PartialEq)]
pub enum Elem {
    Base(Series),
    Ext(Vec<Elem>),
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Base(s) => write!(f, "{s}"),
            Elem::Ext(c) => {
                write!(f, "[")?;
                for (i, e) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "]")
            }
        }
    }
}

impl Elem {
    pub fn to_json(&self) -> Value {
        match self {
            Elem::Base(s) => Value::String(s.to_string()),
            Elem::Ext(c) => Value::Array(c.iter().map(Elem::to_json).collect()),
        }
    }

    fn base(&self) -> &Series {
        match self {
            Elem::Base(s) => s,
            Elem::Ext(_) => panic!("expected a base element"),
        }
    }

    fn coeffs(&self) -> &[Elem] {
        match self {
            Elem::Ext(c) => c,
            Elem::Base(_) => panic!("expected an extension element"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StepKind {
    Unramified,
    TotallyRamified,
}

#[derive(Clone, Debug)]
pub struct Level {
    /// Monic minimal polynomial over the level below, little-endian.
    pub minpoly: Vec<Elem>,
    pub degree: usize,
    pub kind: StepKind,
    /// v(x) with v(t) = 1.
    pub lambda: Q,
    /// Ramification index over the base.
    pub ramification: i64,
    pub residue: Arc<Gf>,
    embed_exp: u64,
    /// Residue of x (unramified steps).
    root: Fe,
    pub uniformizer: Elem,
}

#[derive(Clone, Debug)]
pub struct Tower {
    base: Arc<Gf>,
    precision: i64,
    work: i64,
    levels: Vec<Level>,
}

fn gcd_ext(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.signum() * a, a.signum(), 0)
    } else {
        let (g, x, y) = gcd_ext(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

impl Tower {
    /// The trivial tower over GF(q)((t)) with target precision N.
    pub fn new(base: &Arc<Gf>, precision: i64) -> Tower {
        Tower { base: base.clone(), precision, work: 3 * precision + 24, levels: Vec::new() }
    }

    pub fn base_field(&self) -> &Arc<Gf> {
        &self.base
    }

    pub fn precision(&self) -> i64 {
        self.precision
    }

    pub fn top(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, lvl: usize) -> &Level {
        &self.levels[lvl - 1]
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// [L_lvl : F].
    pub fn degree(&self, lvl: usize) -> usize {
        self.levels[..lvl].iter().map(|l| l.degree).product()
    }

    pub fn ramification(&self, lvl: usize) -> i64 {
        if lvl == 0 {
            1
        } else {
            self.level(lvl).ramification
        }
    }

    pub fn residue_field(&self, lvl: usize) -> &Arc<Gf> {
        if lvl == 0 {
            &self.base
        } else {
            &self.level(lvl).residue
        }
    }

    pub fn uniformizer(&self, lvl: usize) -> Elem {
        if lvl == 0 {
            Elem::Base(Series::monomial(&self.base, Fe::ONE, 1))
        } else {
            self.level(lvl).uniformizer.clone()
        }
    }

    // ---- arithmetic ----

    pub fn zero(&self, lvl: usize) -> Elem {
        if lvl == 0 {
            Elem::Base(Series::exact_zero(&self.base))
        } else {
            Elem::Ext(vec![self.zero(lvl - 1); self.level(lvl).degree])
        }
    }

    pub fn one(&self, lvl: usize) -> Elem {
        self.lift(0, lvl, &Elem::Base(Series::one(&self.base)))
    }

    /// Generator x of level lvl.
    pub fn gen(&self, lvl: usize) -> Elem {
        let mut c = vec![self.zero(lvl - 1); self.level(lvl).degree];
        c[1] = self.one(lvl - 1);
        Elem::Ext(c)
    }

    /// Embed an element of level `from` into level `to`.
    pub fn lift(&self, from: usize, to: usize, a: &Elem) -> Elem {
        let mut a = a.clone();
        for lvl in from + 1..=to {
            let mut c = vec![self.zero(lvl - 1); self.level(lvl).degree];
            c[0] = a;
            a = Elem::Ext(c);
        }
        a
    }

    pub fn from_series(&self, lvl: usize, s: Series) -> Elem {
        self.lift(0, lvl, &Elem::Base(s))
    }

    pub fn is_zero(&self, a: &Elem) -> bool {
        match a {
            Elem::Base(s) => s.is_zero(),
            Elem::Ext(c) => c.iter().all(|e| self.is_zero(e)),
        }
    }

    fn zip(&self, a: &Elem, b: &Elem, op: &dyn Fn(&Series, &Series) -> Series) -> Elem {
        match (a, b) {
            (Elem::Base(x), Elem::Base(y)) => Elem::Base(op(x, y)),
            (Elem::Ext(x), Elem::Ext(y)) => Elem::Ext(x.iter().zip(y).map(|(p, q)| self.zip(p, q, op)).collect()),
            _ => panic!("level mismatch"),
        }
    }

    fn map(&self, a: &Elem, op: &dyn Fn(&Series) -> Series) -> Elem {
        match a {
            Elem::Base(x) => Elem::Base(op(x)),
            Elem::Ext(x) => Elem::Ext(x.iter().map(|p| self.map(p, op)).collect()),
        }
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        self.zip(a, b, &|x, y| x.add(y))
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        self.zip(a, b, &|x, y| x.sub(y))
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        self.map(a, &Series::neg)
    }

    pub fn scale_int(&self, a: &Elem, k: i64) -> Elem {
        let c = self.base.from_i64(k);
        self.map(a, &|x| x.scale(c))
    }

    pub fn mul(&self, lvl: usize, a: &Elem, b: &Elem) -> Elem {
        if lvl == 0 {
            return Elem::Base(a.base().mul(b.base()).truncate(self.work));
        }
        let (x, y) = (a.coeffs(), b.coeffs());
        let lv = self.level(lvl);
        let n = lv.degree;
        let mut r = vec![self.zero(lvl - 1); 2 * n - 1];
        for (i, p) in x.iter().enumerate() {
            if self.is_zero(p) {
                continue;
            }
            for (j, q) in y.iter().enumerate() {
                if self.is_zero(q) {
                    continue;
                }
                r[i + j] = self.add(&r[i + j], &self.mul(lvl - 1, p, q));
            }
        }
        for top in (n..2 * n - 1).rev() {
            let c = std::mem::replace(&mut r[top], self.zero(lvl - 1));
            if self.is_zero(&c) {
                continue;
            }
            for (j, m) in lv.minpoly.iter().enumerate().take(n) {
                r[top - n + j] = self.sub(&r[top - n + j], &self.mul(lvl - 1, &c, m));
            }
        }
        r.truncate(n);
        Elem::Ext(r)
    }

    /// Multiply a level-lvl element by an element of level lvl − 1.
    pub fn scale_lower(&self, lvl: usize, a: &Elem, c: &Elem) -> Elem {
        Elem::Ext(a.coeffs().iter().map(|e| self.mul(lvl - 1, e, c)).collect())
    }

    pub fn pow(&self, lvl: usize, a: &Elem, e: u32) -> Elem {
        (0..e).fold(self.one(lvl), |acc, _| self.mul(lvl, &acc, a))
    }

    /// Valuation with v(t) = 1; elements that are zero to their precision report that precision.
    pub fn val(&self, lvl: usize, a: &Elem) -> Q {
        match a {
            Elem::Base(s) => {
                if s.is_zero() && s.is_exact() {
                    Q::from_integer(INF)
                } else {
                    Q::from_integer(s.valuation().min(INF))
                }
            }
            Elem::Ext(c) => {
                let l = self.level(lvl).lambda;
                c.iter().enumerate().map(|(j, e)| self.val(lvl - 1, e) + l * j as i64).min().unwrap()
            }
        }
    }

    /// Absolute precision.
    pub fn prec(&self, lvl: usize, a: &Elem) -> Q {
        match a {
            Elem::Base(s) => Q::from_integer(if s.precision() == EXACT { INF } else { s.precision() }),
            Elem::Ext(c) => {
                let l = self.level(lvl).lambda;
                c.iter().enumerate().map(|(j, e)| self.prec(lvl - 1, e) + l * j as i64).min().unwrap()
            }
        }
    }

    /// Columns are the coordinates of a·x^j over level lvl − 1.
    pub fn mult_matrix(&self, lvl: usize, a: &Elem) -> Vec<Vec<Elem>> {
        let n = self.level(lvl).degree;
        let x = self.gen(lvl);
        let mut cols = Vec::with_capacity(n);
        let mut cur = a.clone();
        for _ in 0..n {
            cols.push(cur.coeffs().to_vec());
            cur = self.mul(lvl, &cur, &x);
        }
        (0..n).map(|k| (0..n).map(|j| cols[j][k].clone()).collect()).collect()
    }

    fn pivot(&self, lvl: usize, m: &[Vec<Elem>], col: usize) -> Option<usize> {
        (col..m.len()).filter(|&r| !self.is_zero(&m[r][col])).min_by_key(|&r| self.val(lvl, &m[r][col]))
    }

    /// Determinant over level lvl by elimination with minimal-valuation pivots.
    pub fn det(&self, lvl: usize, mut m: Vec<Vec<Elem>>) -> Result<Elem> {
        let n = m.len();
        let mut d = self.one(lvl);
        for col in 0..n {
            let Some(r) = self.pivot(lvl, &m, col) else {
                return Ok(self.zero(lvl));
            };
            if r != col {
                m.swap(r, col);
                d = self.neg(&d);
            }
            let inv = self.inv(lvl, &m[col][col])?;
            d = self.mul(lvl, &d, &m[col][col]);
            for r in col + 1..n {
                if self.is_zero(&m[r][col]) {
                    continue;
                }
                let f = self.mul(lvl, &m[r][col], &inv);
                for k in col..n {
                    let sub = self.mul(lvl, &f, &m[col][k]);
                    m[r][k] = self.sub(&m[r][k], &sub);
                }
            }
        }
        Ok(d)
    }

    fn solve(&self, lvl: usize, mut m: Vec<Vec<Elem>>, mut rhs: Vec<Elem>) -> Result<Vec<Elem>> {
        let n = m.len();
        for col in 0..n {
            let r = self.pivot(lvl, &m, col).ok_or(Error::DivisionByZero)?;
            m.swap(r, col);
            rhs.swap(r, col);
            let inv = self.inv(lvl, &m[col][col])?;
            for r in 0..n {
                if r == col || self.is_zero(&m[r][col]) {
                    continue;
                }
                let f = self.mul(lvl, &m[r][col], &inv);
                for k in col..n {
                    let sub = self.mul(lvl, &f, &m[col][k]);
                    m[r][k] = self.sub(&m[r][k], &sub);
                }
                let sub = self.mul(lvl, &f, &rhs[col]);
                rhs[r] = self.sub(&rhs[r], &sub);
            }
        }
        (0..n).map(|i| Ok(self.mul(lvl, &rhs[i], &self.inv(lvl, &m[i][i])?))).collect()
    }

    pub fn inv(&self, lvl: usize, a: &Elem) -> Result<Elem> {
        if lvl == 0 {
            return Ok(Elem::Base(a.base().inv(self.work)?));
        }
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        let n = self.level(lvl).degree;
        let mut e0 = vec![self.zero(lvl - 1); n];
        e0[0] = self.one(lvl - 1);
        Ok(Elem::Ext(self.solve(lvl - 1, self.mult_matrix(lvl, a), e0)?))
    }

    /// N_{L_lvl / L_{lvl−1}}.
    pub fn norm_down(&self, lvl: usize, a: &Elem) -> Result<Elem> {
        self.det(lvl - 1, self.mult_matrix(lvl, a))
    }

    /// N_{L_lvl / L_lower}.
    pub fn norm_to(&self, lvl: usize, lower: usize, a: &Elem) -> Result<Elem> {
        let mut a = a.clone();
        for l in (lower + 1..=lvl).rev() {
            a = self.norm_down(l, &a)?;
        }
        Ok(a)
    }

    pub fn norm_to_base(&self, lvl: usize, a: &Elem) -> Result<Series> {
        Ok(self.norm_to(lvl, 0, a)?.base().clone())
    }

    /// p(a) for p with coefficients at level lvl − 1.
    pub fn eval(&self, lvl: usize, p: &[Elem], a: &Elem) -> Elem {
        p.iter().rev().fold(self.zero(lvl), |acc, c| self.add(&self.mul(lvl, &acc, a), &self.lift(lvl - 1, lvl, c)))
    }

    // ---- graded structure ----

    /// Residue of an element of nonnegative value.
    pub fn residue(&self, lvl: usize, a: &Elem) -> Result<Fe> {
        match a {
            Elem::Base(s) => {
                if s.valuation() < 0 {
                    return Err(Error::InvalidRing("residue of an element of negative value".into()));
                }
                Ok(s.coeff(0))
            }
            Elem::Ext(c) => {
                let lv = self.level(lvl);
                match lv.kind {
                    StepKind::TotallyRamified => self.residue(lvl - 1, &c[0]),
                    StepKind::Unramified => {
                        let f = &lv.residue;
                        let mut acc = Fe::ZERO;
                        for e in c.iter().rev() {
                            let r = f.embed(lv.embed_exp, self.residue(lvl - 1, e)?);
                            acc = f.add(f.mul(acc, lv.root), r);
                        }
                        Ok(acc)
                    }
                }
            }
        }
    }

    /// Canonical representative of the image of a in L_{≥γ}/L_{>γ}.
    pub fn hcomp(&self, lvl: usize, a: &Elem, gamma: Q) -> Result<Elem> {
        match a {
            Elem::Base(s) => {
                if !gamma.is_integer() {
                    return Ok(Elem::Base(Series::exact_zero(&self.base)));
                }
                let g = gamma.to_integer();
                if s.precision() <= g {
                    return Err(Error::PrecisionExhausted(format!("coefficient of t^{g} is unknown")));
                }
                Ok(Elem::Base(Series::monomial(&self.base, s.coeff(g), g)))
            }
            Elem::Ext(c) => {
                let l = self.level(lvl).lambda;
                Ok(Elem::Ext(
                    c.iter().enumerate().map(|(j, e)| self.hcomp(lvl - 1, e, gamma - l * j as i64)).collect::<Result<_>>()?,
                ))
            }
        }
    }

    /// The leading term ã.
    pub fn leading(&self, lvl: usize, a: &Elem) -> Result<Elem> {
        if self.is_zero(a) {
            return Err(Error::ZeroElement);
        }
        self.hcomp(lvl, a, self.val(lvl, a))
    }

    // ---- construction ----

    /// Adjoin a root of the monic polynomial `minpoly` over the current top level.
    pub fn push_step(&mut self, minpoly: Vec<Elem>) -> Result<()> {
        let lvl = self.top();
        let n = minpoly.len().saturating_sub(1);
        if n < 2 {
            return Err(Error::InvalidRing("an extension step needs degree at least 2".into()));
        }
        if minpoly[n] != self.one(lvl) {
            return Err(Error::InvalidRing("minimal polynomial must be monic".into()));
        }
        if self.is_zero(&minpoly[0]) {
            return Err(Error::InvalidRing("minimal polynomial has zero constant term".into()));
        }
        let v0 = self.val(lvl, &minpoly[0]);
        let lambda = v0 / n as i64;
        for (i, c) in minpoly.iter().enumerate() {
            if self.val(lvl, c) < lambda * (n - i) as i64 {
                return Err(Error::InvalidRing(format!("not a λ-polynomial: coefficient {i} has value below the Newton line")));
            }
        }
        let p = self.base.characteristic();
        let e_prev = self.ramification(lvl);
        let res_prev = self.residue_field(lvl).clone();
        let level = if v0 == Q::from_integer(0) {
            let rp = Poly::new(minpoly.iter().map(|c| self.residue(lvl, c)).collect::<Result<_>>()?);
            if !SubfieldPolys::new(&res_prev, res_prev.degree()).is_irreducible(&rp) {
                return Err(Error::UnsupportedCase(
                    "residue polynomial is reducible; only unramified or totally ramified steps are modeled".into(),
                ));
            }
            let residue = Gf::new(p, res_prev.degree() * n as u32)?;
            let embed_exp = residue.embedding_exponent(&res_prev)?;
            let up = rp.map(|c| residue.embed(embed_exp, c));
            let root = residue.elements().find(|&r| up.eval(&residue, r).is_zero()).ok_or_else(|| {
                Error::InvalidRing("residue polynomial has no root in the expected residue field".into())
            })?;
            Level {
                minpoly,
                degree: n,
                kind: StepKind::Unramified,
                lambda,
                ramification: e_prev,
                residue,
                embed_exp,
                root,
                uniformizer: Elem::Base(Series::exact_zero(&self.base)),
            }
        } else {
            let k = v0 * e_prev;
            if !k.is_integer() || k.to_integer().gcd(&(n as i64)) != 1 {
                return Err(Error::UnsupportedCase(
                    "step is neither unramified nor totally ramified (mixed steps are not modeled)".into(),
                ));
            }
            if n as u64 % p == 0 {
                return Err(Error::NotTame(format!("ramification index {n} is divisible by the characteristic {p}")));
            }
            Level {
                minpoly,
                degree: n,
                kind: StepKind::TotallyRamified,
                lambda,
                ramification: e_prev * n as i64,
                residue: res_prev,
                embed_exp: 1,
                root: Fe::ZERO,
                uniformizer: Elem::Base(Series::exact_zero(&self.base)),
            }
        };
        let kind = level.kind;
        let k = (v0 * e_prev).to_integer();
        self.levels.push(level);
        let new = lvl + 1;
        let pi_prev = self.lift(lvl, new, &self.uniformizer(lvl));
        let unif = match kind {
            StepKind::Unramified => pi_prev,
            StepKind::TotallyRamified => {
                // x^a Π^b with a·k + b·n = 1
                let (_, a, b) = gcd_ext(k, n as i64);
                let xa = self.int_pow(new, &self.gen(new), a)?;
                let pb = self.int_pow(new, &pi_prev, b)?;
                self.mul(new, &xa, &pb)
            }
        };
        self.levels[lvl].uniformizer = unif;
        Ok(())
    }

    pub fn int_pow(&self, lvl: usize, a: &Elem, e: i64) -> Result<Elem> {
        let b = if e < 0 { self.inv(lvl, a)? } else { a.clone() };
        Ok(self.pow(lvl, &b, e.unsigned_abs() as u32))
    }

    // ---- serialization ----

    pub fn parse_elem(&self, lvl: usize, v: &Value) -> Result<Elem> {
        if lvl == 0 {
            return match v {
                Value::String(s) => Ok(Elem::Base(Series::parse(&self.base, s)?)),
                Value::Number(n) => Ok(Elem::Base(Series::constant(
                    &self.base,
                    self.base.from_i64(n.as_i64().ok_or_else(|| Error::Schema("bad integer".into()))?),
                ))),
                _ => Err(Error::Schema("base element must be a series literal".into())),
            };
        }
        let n = self.level(lvl).degree;
        match v {
            Value::Array(a) if a.len() <= n => {
                let mut c: Vec<Elem> = a.iter().map(|e| self.parse_elem(lvl - 1, e)).collect::<Result<_>>()?;
                c.resize(n, self.zero(lvl - 1));
                Ok(Elem::Ext(c))
            }
            _ => self.parse_elem(lvl - 1, v).map(|e| self.lift(lvl - 1, lvl, &e)),
        }
    }

    /// `{"q": 5, "precision": 32, "steps": [[c0, c1, ..., 1], ...]}`
    pub fn from_json(v: &Value) -> Result<Tower> {
        let q = v.get("q").and_then(Value::as_u64).ok_or_else(|| Error::Schema("tower needs an integer q".into()))?;
        let precision = v.get("precision").and_then(Value::as_i64).unwrap_or(32);
        let mut tw = Tower::new(&Gf::with_order(q)?, precision);
        let steps = v.get("steps").and_then(Value::as_array).ok_or_else(|| Error::Schema("tower needs a steps array".into()))?;
        for s in steps {
            let coeffs = s.as_array().ok_or_else(|| Error::Schema("a step is a coefficient list".into()))?;
            let lvl = tw.top();
            let mp = coeffs.iter().map(|c| tw.parse_elem(lvl, c)).collect::<Result<_>>()?;
            tw.push_step(mp)?;
        }
        Ok(tw)
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "q": self.base.order(),
            "precision": self.precision,
            "steps": self.levels.iter().map(|l| l.minpoly.iter().map(Elem::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// Leading term of N_{L/L'}(a) against the graded norm of ã for the step L = L_lvl over L' = L_{lvl−1}.
pub fn graded_norm_check(tw: &Tower, lvl: usize, a: &Elem) -> Result<bool> {
    if tw.is_zero(a) {
        return Err(Error::ZeroElement);
    }
    let lv = tw.level(lvl);
    let n = lv.degree;
    let va = tw.val(lvl, a);
    let m = tw.mult_matrix(lvl, a);
    // ã·x̃^j = Σ_k g_kj x̃^k, with g_kj homogeneous of degree v(a) + (j − k)λ
    let g: Vec<Vec<Elem>> = (0..n)
        .map(|k| (0..n).map(|j| tw.hcomp(lvl - 1, &m[k][j], va + lv.lambda * (j as i64 - k as i64))).collect())
        .collect::<Result<_>>()?;
    let target = va * n as i64;
    let lhs = tw.hcomp(lvl - 1, &tw.det(lvl - 1, m)?, target)?;
    let rhs = tw.hcomp(lvl - 1, &tw.det(lvl - 1, g)?, target)?;
    Ok(lhs == rhs && !tw.is_zero(&lhs))
}

#[derive(Clone, Debug, Serialize)]
pub struct StepReport {
    pub level: usize,
    pub kind: StepKind,
    pub newton_iterations: usize,
    /// v(h(d)) reached at this step.
    pub residual_value: String,
}

#[derive(Clone, Debug)]
pub struct NormPreimage {
    pub s: Elem,
    pub steps: Vec<StepReport>,
    /// v(N(s) − t).
    pub attained: i64,
}

/// s in the top level with N(s) ≡ t, for a 1-unit t of the base.
pub fn norm_one_unit_preimage(tw: &Tower, t: &Series) -> Result<NormPreimage> {
    let one = Series::one(tw.base_field());
    if t.sub(&one).valuation() < 1 {
        return Err(Error::InvalidRing("target is not a 1-unit".into()));
    }
    let mut s = Elem::Base(t.clone());
    let mut steps = Vec::new();
    let goal = Q::from_integer(tw.precision + 8);
    for lvl in 1..=tw.top() {
        let lv = tw.level(lvl);
        // h = f with constant term c₀ replaced by s·c₀
        let mut h = lv.minpoly.clone();
        h[0] = tw.mul(lvl - 1, &s, &h[0]);
        let dh: Vec<Elem> = h.iter().enumerate().skip(1).map(|(i, c)| tw.scale_int(c, i as i64)).collect();
        let x = tw.gen(lvl);
        let mut d = x.clone();
        let mut iters = 0;
        let mut last = Q::from_integer(-INF);
        let residual = loop {
            let hd = tw.eval(lvl, &h, &d);
            let v = tw.val(lvl, &hd);
            if v >= goal + lv.lambda * n_of(lv) {
                break v;
            }
            if v <= last || iters > 64 {
                return Err(Error::PrecisionExhausted(format!("Newton iteration stalled at level {lvl} with v(h(d)) = {v}")));
            }
            last = v;
            let step = tw.mul(lvl, &hd, &tw.inv(lvl, &tw.eval(lvl, &dh, &d))?);
            d = tw.sub(&d, &step);
            iters += 1;
        };
        s = tw.mul(lvl, &d, &tw.inv(lvl, &x)?);
        steps.push(StepReport { level: lvl, kind: lv.kind, newton_iterations: iters, residual_value: residual.to_string() });
    }
    let n = tw.norm_to_base(tw.top(), &s)?;
    let attained = n.sub(t).valuation();
    if attained < tw.precision {
        return Err(Error::PrecisionExhausted(format!("N(s) agrees with t only to t^{attained}")));
    }
    Ok(NormPreimage { s, steps, attained })
}

fn n_of(lv: &Level) -> i64 {
    lv.degree as i64
}

// ---- random tame towers ----

fn random_base(tw: &Tower, rng: &mut ChaCha8Rng, min_val: i64, unit: bool) -> Series {
    let f = tw.base_field();
    let q = f.order();
    let mut c: Vec<Fe> = (0..3).map(|_| f.from_int(rng.gen_range(0..q))).collect();
    if unit {
        c[0] = f.from_int(rng.gen_range(1..q));
    }
    Series::new(f, min_val, c, EXACT)
}

/// Random element of value ≥ 0 (a unit when `unit`).
pub fn random_integral(tw: &Tower, lvl: usize, rng: &mut ChaCha8Rng, unit: bool) -> Elem {
    if lvl == 0 {
        return Elem::Base(random_base(tw, rng, 0, unit));
    }
    loop {
        let n = tw.level(lvl).degree;
        let c: Vec<Elem> = (0..n).map(|_| random_integral(tw, lvl - 1, rng, false)).collect();
        let a = Elem::Ext(c);
        if !unit || tw.residue(lvl, &a).is_ok_and(|r| !r.is_zero()) {
            return a;
        }
    }
}

/// Random nonzero element with coefficient values in [-2, 2].
pub fn random_elem(tw: &Tower, lvl: usize, rng: &mut ChaCha8Rng) -> Elem {
    loop {
        let a = random_elem_any(tw, lvl, rng);
        if !tw.is_zero(&a) {
            return a;
        }
    }
}

fn random_elem_any(tw: &Tower, lvl: usize, rng: &mut ChaCha8Rng) -> Elem {
    if lvl == 0 {
        let v = rng.gen_range(-2..3);
        return Elem::Base(if rng.gen_bool(0.2) { Series::exact_zero(tw.base_field()) } else { random_base(tw, rng, v, true) });
    }
    Elem::Ext((0..tw.level(lvl).degree).map(|_| random_elem_any(tw, lvl - 1, rng)).collect())
}

/// Append a random unramified (`ramified = false`) or totally ramified step of degree n.
pub fn push_random_step(tw: &mut Tower, rng: &mut ChaCha8Rng, n: usize, ramified: bool) -> Result<()> {
    let lvl = tw.top();
    if ramified {
        // x^n + Π·(integral)·x^j + ... − Π·unit: Eisenstein over level lvl
        let pi = tw.uniformizer(lvl);
        let mut mp: Vec<Elem> = (0..n).map(|_| tw.mul(lvl, &pi, &random_integral(tw, lvl, rng, false))).collect();
        mp[0] = tw.neg(&tw.mul(lvl, &pi, &random_integral(tw, lvl, rng, true)));
        mp.push(tw.one(lvl));
        return tw.push_step(mp);
    }
    for _ in 0..500 {
        let mut mp: Vec<Elem> = (0..n).map(|_| random_integral(tw, lvl, rng, false)).collect();
        mp.push(tw.one(lvl));
        match tw.push_step(mp) {
            Ok(()) => return Ok(()),
            Err(Error::UnsupportedCase(_)) | Err(Error::InvalidRing(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::BudgetExceeded("no irreducible residue polynomial found".into()))
}

/// Random tame tower over GF(q)((t)) of total degree at most `max_degree`.
pub fn random_tame_tower(q: u64, max_degree: usize, precision: i64, rng: &mut ChaCha8Rng) -> Result<Tower> {
    let f = Gf::with_order(q)?;
    let p = f.characteristic() as usize;
    let mut tw = Tower::new(&f, precision);
    let mut total = 1;
    loop {
        let room = max_degree / total;
        if room < 2 || (tw.top() > 0 && rng.gen_bool(0.4)) {
            break;
        }
        let n = rng.gen_range(2..=room.min(4));
        let ramified = n % p != 0 && rng.gen_bool(0.5);
        push_random_step(&mut tw, rng, n, ramified)?;
        total *= n;
    }
    Ok(tw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn s(f: &Arc<Gf>, lit: &str) -> Series {
        Series::parse(f, lit).unwrap()
    }

    fn quad(q: u64, c0: &str) -> Tower {
        let v = serde_json::json!({"q": q, "precision": 32, "steps": [[c0, "0", "1"]]});
        Tower::from_json(&v).unwrap()
    }

    #[test]
    fn step_classification() {
        let f = Gf::new(5, 1).unwrap();
        let tw = quad(5, "t^0 * (3)");
        assert_eq!(tw.level(1).kind, StepKind::Unramified);
        assert_eq!(tw.residue_field(1).order(), 25);
        let tw = quad(5, "t^1 * (4)");
        assert_eq!((tw.level(1).kind, tw.level(1).lambda), (StepKind::TotallyRamified, Q::new(1, 2)));
        assert_eq!(tw.val(1, &tw.uniformizer(1)), Q::new(1, 2));
        // √(1+t) already lies in GF(5)((t))
        let v = serde_json::json!({"q": 5, "steps": [["t^0 * (4 + 4*t)", "0", "1"]]});
        assert!(matches!(Tower::from_json(&v), Err(Error::UnsupportedCase(_))));
        let v = serde_json::json!({"q": 5, "steps": [["t^2 * (1)", "0", "1"]]});
        assert!(matches!(Tower::from_json(&v), Err(Error::UnsupportedCase(_))));
        let v = serde_json::json!({"q": 5, "steps": [["t^1 * (1)", "0", "0", "0", "0", "1"]]});
        assert!(matches!(Tower::from_json(&v), Err(Error::NotTame(_))));
        let x = tw.gen(1);
        let close = |a: &Elem, b: &Elem| tw.val(1, &tw.sub(a, b)) >= Q::from_integer(50);
        assert!(close(&tw.mul(1, &x, &x), &tw.from_series(1, s(&f, "t"))));
        let xi = tw.inv(1, &x).unwrap();
        assert!(close(&tw.mul(1, &x, &xi), &tw.one(1)));
        assert_eq!(tw.to_json()["steps"][0][0], "t^1 * (4)");
    }

    #[test]
    fn norm_examples() {
        let f = Gf::new(5, 1).unwrap();
        // x² − 2 is unramified; N(a + bx) = a² − 2b²
        let tw = quad(5, "t^0 * (3)");
        let a = Elem::Ext(vec![Elem::Base(s(&f, "1 + t")), Elem::Base(s(&f, "t"))]);
        let n = tw.norm_to_base(1, &a).unwrap();
        assert!(n.agrees_to(&s(&f, "1 + 2*t + 4*t^2"), 40));
        // x² − t: N(x) = −t
        let tw = quad(5, "t^1 * (4)");
        assert!(tw.norm_to_base(1, &tw.gen(1)).unwrap().agrees_to(&s(&f, "4*t"), 40));
        let c = tw.from_series(1, s(&f, "2 + t"));
        assert!(tw.norm_to_base(1, &c).unwrap().agrees_to(&s(&f, "2 + t").pow(2), 40));
    }

    #[test]
    fn preimage_examples() {
        let f = Gf::new(5, 1).unwrap();
        let trivial = Tower::new(&f, 32);
        let t = s(&f, "1 + t");
        assert_eq!(norm_one_unit_preimage(&trivial, &t).unwrap().s, Elem::Base(t.clone()));
        let unr = quad(5, "t^0 * (3)");
        let r = norm_one_unit_preimage(&unr, &t).unwrap();
        assert!(r.attained >= 32);
        let ram = quad(5, "t^1 * (4)");
        let t3 = s(&f, "1 + t^3");
        let r = norm_one_unit_preimage(&ram, &t3).unwrap();
        assert!(tw_norm(&ram, &r.s).agrees_to(&t3, 32));
        assert!(matches!(norm_one_unit_preimage(&ram, &s(&f, "2 + t")), Err(Error::InvalidRing(_))));
    }

    fn tw_norm(tw: &Tower, a: &Elem) -> Series {
        tw.norm_to_base(tw.top(), a).unwrap()
    }

    #[test]
    fn graded_norm_examples() {
        let f = Gf::new(5, 1).unwrap();
        for c0 in ["t^0 * (3)", "t^1 * (4)"] {
            let tw = quad(5, c0);
            let a = tw.from_series(1, s(&f, "t^-1 * (2 + t)"));
            assert!(graded_norm_check(&tw, 1, &a).unwrap());
            assert!(graded_norm_check(&tw, 1, &tw.gen(1)).unwrap());
        }
        // N(√(1+t)·x) = −t(1 + t)
        let tw = quad(5, "t^1 * (4)");
        let sq = crate::series::hensel_lift_root(
            &[s(&f, "1 + t").neg(), Series::exact_zero(&f), Series::one(&f)],
            Q::from_integer(0),
            Fe::ONE,
            40,
        )
        .unwrap();
        let a = Elem::Ext(vec![Elem::Base(Series::exact_zero(&f)), Elem::Base(sq)]);
        assert!(tw_norm(&tw, &a).agrees_to(&s(&f, "4*t + 4*t^2"), 32));
        assert!(graded_norm_check(&tw, 1, &a).unwrap());
    }

    #[test]
    fn random_towers_have_preimages_and_graded_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..6 {
            let q = if i % 2 == 0 { 5 } else { 7 };
            let tw = random_tame_tower(q, 6, 32, &mut rng).unwrap();
            assert!(tw.degree(tw.top()) <= 6);
            let t = Series::new(tw.base_field(), 0, vec![Fe::ONE, tw.base_field().from_int(rng.gen_range(0..q)), Fe::ONE], EXACT);
            let r = norm_one_unit_preimage(&tw, &t).unwrap();
            assert!(tw_norm(&tw, &r.s).agrees_to(&t, 32));
            for lvl in 1..=tw.top() {
                let a = random_elem(&tw, lvl, &mut rng);
                assert!(graded_norm_check(&tw, lvl, &a).unwrap(), "level {lvl} of {:?}", tw.to_json());
            }
        }
    }
}
