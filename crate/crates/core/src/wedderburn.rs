//! Wedderburn factorization of minimal polynomials of homogeneous elements, and Dickson conjugacy.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ff::Fe;
use crate::graded::{homogeneous_parts, Degree, GradedElement, MonomialGradedRing};

/// Default cap on the number of conjugating units tried.
pub const DEFAULT_ORBIT_BUDGET: usize = 1 << 20;

/// Polynomials in a central variable with coefficients in E, little-endian.
pub type EPoly = Vec<GradedElement>;

pub fn poly_mul(ring: &MonomialGradedRing, f: &[GradedElement], g: &[GradedElement]) -> EPoly {
    let mut out = vec![GradedElement::zero(); f.len() + g.len() - 1];
    for (i, a) in f.iter().enumerate() {
        for (j, b) in g.iter().enumerate() {
            out[i + j] = ring.add(&out[i + j], &ring.mul(a, b));
        }
    }
    out
}

/// x − r
pub fn linear(ring: &MonomialGradedRing, r: &GradedElement) -> EPoly {
    vec![ring.neg(r), ring.one()]
}

/// q with f = q·k for monic k; errors if the remainder is nonzero.
pub fn right_divide(ring: &MonomialGradedRing, f: &[GradedElement], k: &[GradedElement]) -> Result<EPoly> {
    let dk = k.len() - 1;
    let mut rem = f.to_vec();
    if rem.len() <= dk {
        return Err(Error::InvalidRing("divisor degree exceeds dividend degree".into()));
    }
    let mut q = vec![GradedElement::zero(); rem.len() - dk];
    for top in (dk..rem.len()).rev() {
        let c = rem[top].clone();
        for (j, kj) in k.iter().enumerate() {
            rem[top - dk + j] = ring.sub(&rem[top - dk + j], &ring.mul(&c, kj));
        }
        q[top - dk] = c;
    }
    if rem.iter().any(|c| !c.is_zero()) {
        return Err(Error::InvalidRing("polynomial is not a right multiple".into()));
    }
    Ok(q)
}

/// (x − a_n) ⋯ (x − a_1) for roots listed a_1, …, a_n.
pub fn expand_factors(ring: &MonomialGradedRing, roots: &[GradedElement]) -> EPoly {
    roots.iter().fold(vec![ring.one()], |acc, r| poly_mul(ring, &linear(ring, r), &acc))
}

fn log_of(c: Fe) -> u64 {
    c.log().expect("nonzero coefficient")
}

/// Conjugating units c·z^α with |α_i| ≤ r_i, ordered by (|α|₁, α with positive entries first, log c).
pub fn conjugators(ring: &MonomialGradedRing, budget: usize) -> Result<Vec<GradedElement>> {
    let units = ring.field().units() as usize;
    let window: usize = ring.r().iter().map(|&r| 2 * r as usize + 1).product();
    if window.saturating_mul(units) > budget {
        return Err(Error::OrbitBudget(format!("{} conjugating units exceed the budget {budget}", window * units)));
    }
    let mut alphas: Vec<Degree> = vec![vec![]];
    for &r in ring.r() {
        let r = r as i64;
        alphas = alphas.into_iter().flat_map(|a| (-r..=r).map(move |x| [a.clone(), vec![x]].concat())).collect();
    }
    alphas.sort_by_key(|a| (a.iter().map(|x| x.abs()).sum::<i64>(), a.iter().map(|&x| (x.abs(), x < 0)).collect::<Vec<_>>()));
    let f = ring.field();
    Ok(alphas
        .into_iter()
        .flat_map(|a| (0..f.units()).map(move |l| GradedElement::monomial(f.from_log(l as i64), a.clone())))
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassMember {
    pub element: GradedElement,
    /// u with u·a·u⁻¹ = element.
    pub witness: GradedElement,
}

/// The conjugacy class of a homogeneous element, each member with its first witness in conjugator order.
#[derive(Clone, Debug)]
pub struct ConjugacyClass {
    pub base: GradedElement,
    /// Keyed by (degree, log of coefficient).
    pub members: BTreeMap<(Degree, u64), ClassMember>,
}

pub fn conjugacy_class(ring: &MonomialGradedRing, a: &GradedElement, budget: usize) -> Result<ConjugacyClass> {
    homogeneous_parts(a)?;
    let mut members = BTreeMap::new();
    for u in conjugators(ring, budget)? {
        let b = ring.conjugate(&u, a)?;
        let (c, d) = homogeneous_parts(&b)?;
        members.entry((d.clone(), log_of(c))).or_insert(ClassMember { element: b, witness: u });
    }
    Ok(ConjugacyClass { base: a.clone(), members })
}

#[derive(Clone, Debug, Serialize)]
pub struct WedderburnReport {
    pub h_a: EPoly,
    /// a_1, …, a_n with h_a = (x − a_n) ⋯ (x − a_1).
    pub factors: Vec<ClassMember>,
    pub orbit_size: usize,
    /// Nrd(a) = (a_n ⋯ a_1)^{ind/n}.
    pub nrd_consistent: bool,
}

/// Grow a right factor k = (x − a_r) ⋯ (x − a_1) of h_a until it is all of h_a.
pub fn wedderburn_factor(ring: &MonomialGradedRing, a: &GradedElement, budget: usize) -> Result<WedderburnReport> {
    let h = ring.minimal_polynomial(a)?;
    let n = h.len() - 1;
    let class = conjugacy_class(ring, a, budget)?;
    let mut factors = vec![ClassMember { element: a.clone(), witness: ring.one() }];
    let mut k = linear(ring, a);
    while k.len() - 1 < n {
        // a member b with k(b) ≠ 0; then h(b) = g(b′)k(b) forces g(b′) = 0 for b′ = k(b) b k(b)⁻¹
        let (b, kb) = class
            .members
            .values()
            .find_map(|m| {
                let kb = ring.evaluate(&k, &m.element);
                (!kb.is_zero()).then(|| (m.clone(), kb))
            })
            .ok_or_else(|| Error::InvalidRing("a proper factor of h_a vanishes on the whole class".into()))?;
        let root = ring.conjugate(&kb, &b.element)?;
        let g = right_divide(ring, &h, &k)?;
        if !ring.evaluate(&g, &root).is_zero() {
            return Err(Error::InvalidRing("conjugated element is not a root of the cofactor".into()));
        }
        let witness = ring.mul(&kb, &b.witness);
        k = poly_mul(ring, &linear(ring, &root), &k);
        factors.push(ClassMember { element: root, witness });
    }
    if k != h {
        return Err(Error::InvalidRing("expanded factors differ from h_a".into()));
    }
    let prod = factors.iter().rev().fold(ring.one(), |acc, m| ring.mul(&acc, &m.element));
    let nrd_consistent = ring.pow(&prod, (ring.index() / n as u64) as i64)? == ring.reduced_norm(a)?;
    Ok(WedderburnReport { h_a: h, factors, orbit_size: class.members.len(), nrd_consistent })
}

/// Every factor root is the recorded conjugate of a, and the factors multiply back to h_a.
pub fn verify_report(ring: &MonomialGradedRing, a: &GradedElement, rep: &WedderburnReport) -> Result<bool> {
    for m in &rep.factors {
        if ring.conjugate(&m.witness, a)? != m.element {
            return Ok(false);
        }
    }
    let roots: Vec<GradedElement> = rep.factors.iter().map(|m| m.element.clone()).collect();
    Ok(expand_factors(ring, &roots) == ring.minimal_polynomial(a)? && rep.nrd_consistent)
}

/// A unit u with u·a·u⁻¹ = b, first in conjugator order; none when the minimal polynomials differ.
pub fn dickson_conjugate(
    ring: &MonomialGradedRing,
    a: &GradedElement,
    b: &GradedElement,
    budget: usize,
) -> Result<Option<GradedElement>> {
    if ring.minimal_polynomial(a)? != ring.minimal_polynomial(b)? {
        return Ok(None);
    }
    for u in conjugators(ring, budget)? {
        if &ring.conjugate(&u, a)? == b {
            return Ok(Some(u));
        }
    }
    Ok(None)
}

/// No monic polynomial of degree < deg h_a vanishes on the class of a; exhaustive over homogeneous coefficients.
pub fn no_lower_degree_annihilator(ring: &MonomialGradedRing, a: &GradedElement, budget: usize) -> Result<bool> {
    let (_, alpha) = homogeneous_parts(a)?;
    let n = ring.minimal_polynomial(a)?.len() - 1;
    let class: Vec<GradedElement> = conjugacy_class(ring, a, budget)?.members.into_values().map(|m| m.element).collect();
    let f = ring.field();
    let elems: Vec<Fe> = f.elements().collect();
    for d in 1..n {
        let count = (elems.len() as u128).pow(d as u32);
        if count > budget as u128 {
            return Err(Error::OrbitBudget(format!("{count} candidate polynomials of degree {d}")));
        }
        let mut idx = vec![0usize; d];
        loop {
            let mut poly: EPoly = (0..d)
                .map(|i| GradedElement::monomial(elems[idx[i]], alpha.iter().map(|x| x * (d - i) as i64).collect()))
                .collect();
            poly.push(ring.one());
            if class.iter().all(|b| ring.evaluate(&poly, b).is_zero()) {
                return Ok(false);
            }
            let mut pos = 0;
            while pos < d {
                idx[pos] += 1;
                if idx[pos] < elems.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == d {
                break;
            }
        }
    }
    Ok(true)
}

/// Nonzero homogeneous c·z^α with α in the box Π [0, r_i), one per (α, c).
pub fn box_elements(ring: &MonomialGradedRing) -> Vec<GradedElement> {
    let f = ring.field();
    ring.box_degrees()
        .into_iter()
        .flat_map(|d| f.nonzero().map(move |c| GradedElement::monomial(c, d.clone())).collect::<Vec<_>>())
        .collect()
}
