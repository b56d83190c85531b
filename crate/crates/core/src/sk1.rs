//! SK₁, CK₁ and SH₁ of graded division algebras: case formulas behind a strategy registry,
//! and brute-force enumeration on monomial rings.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use crate::abgroup::{left_kernel, FiniteAbelianGroup, IntMatrix};
use crate::descriptor::{Classification, GradedDivAlgDesc, Residue};
use crate::error::{Error, Result};
use crate::ff::Fe;
use crate::gmodule::{tate_h_minus1, wedge_map, GModule, WedgeCocycle};
use crate::graded::{GradedElement, MonomialGradedRing};

pub use crate::gmodule::nondegenerate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    UnramifiedTransfer,
    TotallyRamifiedMu,
    SemiramifiedSequence,
    NicelySemiramified,
    BruteForce,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::UnramifiedTransfer => "UnramifiedTransfer",
            Method::TotallyRamifiedMu => "TotallyRamifiedMu",
            Method::SemiramifiedSequence => "SemiramifiedSequence",
            Method::NicelySemiramified => "NicelySemiramified",
            Method::BruteForce => "BruteForce",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Sk1Report {
    /// `None` when the answer is SK(E₀) of a residue algebra we cannot compute.
    pub group: Option<FiniteAbelianGroup>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbolic: Option<String>,
    pub method: Method,
    pub classification: Option<Classification>,
    pub index: u64,
    pub witnesses: BTreeMap<String, Value>,
    pub checks: BTreeMap<String, bool>,
}

impl Sk1Report {
    fn new(method: Method, group: FiniteAbelianGroup, index: u64) -> Self {
        Sk1Report {
            group: Some(group),
            symbolic: None,
            method,
            classification: None,
            index,
            witnesses: BTreeMap::new(),
            checks: BTreeMap::new(),
        }
    }

    /// Every element order divides ind(E).
    pub fn n_torsion(&self) -> bool {
        self.group.as_ref().is_none_or(|g| g.is_torsion_of(self.index))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Budget {
    /// Cap on |M*| for enumeration.
    pub units: u64,
    /// Cap on |Γ_E:Γ_T|.
    pub grade_index: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { units: 1_000_000, grade_index: 64 }
    }
}

pub struct Sk1Input<'a> {
    pub desc: GradedDivAlgDesc,
    pub ring: Option<&'a MonomialGradedRing>,
    pub budget: Budget,
}

impl<'a> Sk1Input<'a> {
    pub fn from_descriptor(desc: GradedDivAlgDesc) -> Self {
        Sk1Input { desc, ring: None, budget: Budget::default() }
    }

    pub fn from_ring(ring: &'a MonomialGradedRing) -> Self {
        Sk1Input { desc: ring.descriptor(), ring: Some(ring), budget: Budget::default() }
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    fn class(&self) -> Result<Classification> {
        self.desc.classify()
    }
}

pub trait Sk1Strategy: Send + Sync {
    fn method(&self) -> Method;
    fn applies(&self, input: &Sk1Input<'_>) -> Result<bool>;
    fn compute(&self, input: &Sk1Input<'_>) -> Result<Sk1Report>;

    fn name(&self) -> &'static str {
        self.method().name()
    }
}

/// Strategies by name; selection takes the first applicable one in registration order.
#[derive(Default)]
pub struct Sk1Registry {
    order: Vec<Arc<dyn Sk1Strategy>>,
    by_name: HashMap<String, Arc<dyn Sk1Strategy>>,
}

impl Sk1Registry {
    pub fn new() -> Self {
        Sk1Registry::default()
    }

    pub fn standard() -> Self {
        let mut r = Sk1Registry::new();
        r.register(Arc::new(UnramifiedTransfer));
        r.register(Arc::new(TotallyRamifiedMu));
        r.register(Arc::new(NicelySemiramified));
        r.register(Arc::new(SemiramifiedSequence));
        r.register(Arc::new(BruteForce));
        r
    }

    pub fn register(&mut self, s: Arc<dyn Sk1Strategy>) {
        self.by_name.insert(s.name().to_string(), s.clone());
        self.order.push(s);
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn Sk1Strategy>> {
        self.by_name.get(name).cloned()
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.order.iter().map(|s| s.name()).collect()
    }

    pub fn select(&self, input: &Sk1Input<'_>) -> Result<Arc<dyn Sk1Strategy>> {
        for s in &self.order {
            if s.applies(input)? {
                return Ok(s.clone());
            }
        }
        Err(Error::UnsupportedCase(format!("no SK1 strategy applies to a {:?} algebra", input.class()?)))
    }

    /// Runs the named strategy, or the selected one when `method` is `None`.
    pub fn run(&self, input: &Sk1Input<'_>, method: Option<&str>) -> Result<Sk1Report> {
        let s = match method {
            Some(name) => {
                let s = self.get(name).ok_or_else(|| Error::Schema(format!("unknown method {name}")))?;
                if !s.applies(input)? {
                    return Err(Error::UnsupportedCase(format!("method {name} does not apply")));
                }
                s
            }
            None => self.select(input)?,
        };
        let mut report = s.compute(input)?;
        report.classification = Some(input.class()?);
        let nt = report.n_torsion();
        report.checks.insert("n_torsion".into(), nt);
        Ok(report)
    }
}

pub fn sk1(desc: &GradedDivAlgDesc) -> Result<Sk1Report> {
    Sk1Registry::standard().run(&Sk1Input::from_descriptor(desc.clone()), None)
}

/// μ_n(GF(q))/μ_e(GF(q)), cyclic of order gcd(n, q−1)/gcd(e, q−1).
pub fn mu_quotient(q: u64, n: u64, e: u64) -> Result<FiniteAbelianGroup> {
    let a = n.gcd(&(q - 1));
    let b = e.gcd(&(q - 1));
    if a % b != 0 {
        return Err(Error::InvalidRing(format!("μ_{e} is not inside μ_{n} over GF({q})")));
    }
    Ok(FiniteAbelianGroup::cyclic(a / b))
}

pub struct UnramifiedTransfer;

impl Sk1Strategy for UnramifiedTransfer {
    fn method(&self) -> Method {
        Method::UnramifiedTransfer
    }

    fn applies(&self, input: &Sk1Input<'_>) -> Result<bool> {
        Ok(input.class()? == Classification::Unramified)
    }

    fn compute(&self, input: &Sk1Input<'_>) -> Result<Sk1Report> {
        let index = input.desc.index;
        match &input.desc.residue {
            Residue::FiniteField { .. } => Ok(Sk1Report::new(self.method(), FiniteAbelianGroup::trivial(), index)),
            Residue::Abstract { commutative: true, .. } => {
                Ok(Sk1Report::new(self.method(), FiniteAbelianGroup::trivial(), index))
            }
            Residue::Abstract { sk: Some(f), .. } => {
                let big: Vec<BigInt> = f.iter().map(|&x| BigInt::from(x)).collect();
                Ok(Sk1Report::new(self.method(), FiniteAbelianGroup::from_cyclic_orders(&big), index))
            }
            Residue::Abstract { .. } => {
                let mut r = Sk1Report::new(self.method(), FiniteAbelianGroup::trivial(), index);
                r.group = None;
                r.symbolic = Some("SK(E0)".into());
                Ok(r)
            }
        }
    }
}

pub struct TotallyRamifiedMu;

impl Sk1Strategy for TotallyRamifiedMu {
    fn method(&self) -> Method {
        Method::TotallyRamifiedMu
    }

    fn applies(&self, input: &Sk1Input<'_>) -> Result<bool> {
        Ok(input.class()? == Classification::TotallyRamified && input.desc.t0_order().is_some())
    }

    fn compute(&self, input: &Sk1Input<'_>) -> Result<Sk1Report> {
        let q = input.desc.t0_order().expect("checked in applies");
        let n = input.desc.index;
        let e = input.desc.exponent()?;
        let mut r = Sk1Report::new(self.method(), mu_quotient(q, n, e)?, n);
        r.witnesses.insert("e".into(), json!(e));
        r.witnesses.insert("mu_n_order".into(), json!(n.gcd(&(q - 1))));
        r.witnesses.insert("mu_e_order".into(), json!(e.gcd(&(q - 1))));
        Ok(r)
    }
}

/// E₀* as a module over G = Γ_E/Γ_T, with the u-data if present.
fn residue_module(desc: &GradedDivAlgDesc) -> Result<(GModule, Option<WedgeCocycle>)> {
    match &desc.residue {
        Residue::FiniteField { q, m } => {
            let quotient = desc.grade_quotient()?;
            if quotient.factors_u64() != vec![*m as u64] {
                return Err(Error::InvalidRing(format!(
                    "a finite residue field forces Γ_E/Γ_T cyclic of order {m}, got {quotient}"
                )));
            }
            Ok((GModule::cyclic_unit_group(*q, *m)?, None))
        }
        Residue::Abstract { module: Some(spec), .. } => {
            let (module, u) = spec.build()?;
            let gi = desc.gamma_index()?;
            if module.group().order() != gi {
                return Err(Error::Schema(format!(
                    "module group has order {} but |Γ_E:Γ_T| = {gi}",
                    module.group().order()
                )));
            }
            Ok((module, u))
        }
        Residue::Abstract { module: None, .. } => {
            Err(Error::UnsupportedCase("semiramified descriptor without residue module data".into()))
        }
    }
}

pub struct NicelySemiramified;

impl Sk1Strategy for NicelySemiramified {
    fn method(&self) -> Method {
        Method::NicelySemiramified
    }

    fn applies(&self, input: &Sk1Input<'_>) -> Result<bool> {
        Ok(input.class()? == Classification::Semiramified
            && matches!(input.desc.residue, Residue::Abstract { nicely: true, module: Some(_), .. }))
    }

    fn compute(&self, input: &Sk1Input<'_>) -> Result<Sk1Report> {
        let (module, _) = residue_module(&input.desc)?;
        let h = tate_h_minus1(&module);
        let mut r = Sk1Report::new(self.method(), h.clone(), input.desc.index);
        r.witnesses.insert("h_minus1".into(), json!(h));
        Ok(r)
    }
}

pub struct SemiramifiedSequence;

impl Sk1Strategy for SemiramifiedSequence {
    fn method(&self) -> Method {
        Method::SemiramifiedSequence
    }

    fn applies(&self, input: &Sk1Input<'_>) -> Result<bool> {
        Ok(input.class()? == Classification::Semiramified)
    }

    fn compute(&self, input: &Sk1Input<'_>) -> Result<Sk1Report> {
        let (module, u) = residue_module(&input.desc)?;
        let g = module.group().clone();
        let wedge_trivial = crate::gmodule::wedge_square(&g).group.is_trivial();
        let u = match u {
            Some(u) => u,
            None if wedge_trivial => WedgeCocycle::new(),
            None => return Err(Error::UnsupportedCase("non-cyclic G needs the u_ij data".into())),
        };
        let res = wedge_map(&g, &module, &u)?;
        let mut r = Sk1Report::new(self.method(), res.cokernel.clone(), input.desc.index);
        let exact = match (res.h_minus1.order(), res.image.order(), res.cokernel.order()) {
            (Some(h), Some(i), Some(c)) => h == i * c,
            _ => false,
        };
        r.checks.insert("sequence_exact".into(), exact);
        r.witnesses.insert("h_minus1".into(), json!(res.h_minus1));
        r.witnesses.insert("wedge_image".into(), json!(res.image));
        r.witnesses.insert("wedge".into(), json!(res.wedge.group));
        Ok(r)
    }
}

pub struct BruteForce;

impl Sk1Strategy for BruteForce {
    fn method(&self) -> Method {
        Method::BruteForce
    }

    fn applies(&self, input: &Sk1Input<'_>) -> Result<bool> {
        Ok(input.ring.is_some())
    }

    fn compute(&self, input: &Sk1Input<'_>) -> Result<Sk1Report> {
        sk1_bruteforce_with(input.ring.expect("checked in applies"), input.budget)
    }
}

fn check_budget(e: &MonomialGradedRing, budget: Budget) -> Result<()> {
    let units = e.field().units();
    if units > budget.units {
        return Err(Error::BudgetExceeded(format!("|M*| = {units} exceeds {}", budget.units)));
    }
    if e.gamma_index() > budget.grade_index {
        return Err(Error::BudgetExceeded(format!(
            "|Γ_E:Γ_T| = {} exceeds {}",
            e.gamma_index(),
            budget.grade_index
        )));
    }
    Ok(())
}

/// Subgroups of the cyclic group M* by enumeration.
struct ResidueSubgroups {
    /// |E^(1)|
    norm_one: u64,
    /// |E′|
    commutators: u64,
    commutators_have_norm_one: bool,
    norm_formula_agrees: bool,
}

fn residue_subgroups(e: &MonomialGradedRing) -> Result<ResidueSubgroups> {
    let f = e.field().clone();
    let units = f.units();
    let n = e.rank();
    let mut norm_one = 0u64;
    let mut norm_gcd = units;
    for l in 0..units {
        if e.residue_reduced_norm(f.from_log(l as i64)) == Fe::ONE {
            norm_one += 1;
            norm_gcd = norm_gcd.gcd(&l);
        }
    }
    // a subgroup of a cyclic group is determined by its order
    if norm_one != units / norm_gcd {
        return Err(Error::InvalidRing("norm-one set is not a subgroup".into()));
    }
    let g = GradedElement::scalar(f.generator(), n);
    let mut gens = vec![g.clone()];
    for i in 0..n {
        let mut d = vec![0; n];
        d[i] = 1;
        gens.push(GradedElement::monomial(Fe::ONE, d));
    }
    let mut pairs: Vec<(GradedElement, GradedElement)> = Vec::new();
    for a in &gens {
        for b in &gens {
            pairs.push((a.clone(), b.clone()));
        }
    }
    let reps = e.coset_representatives();
    for c in [Fe::ONE, f.generator()] {
        for d in [Fe::ONE, f.generator()] {
            for alpha in &reps {
                for beta in &reps {
                    pairs.push((GradedElement::monomial(c, alpha.clone()), GradedElement::monomial(d, beta.clone())));
                }
            }
        }
    }
    let mut comm_gcd = units;
    let mut comm_norm_one = true;
    for (a, b) in &pairs {
        let k = e.commutator(a, b)?;
        let (c, deg) = k.as_monomial().expect("commutator is a unit");
        debug_assert!(deg.iter().all(|&x| x == 0));
        comm_gcd = comm_gcd.gcd(&c.log().expect("nonzero"));
        comm_norm_one &= e.residue_reduced_norm(c) == Fe::ONE;
    }
    let mut agrees = true;
    for l in [0u64, 1, units / 2, units.saturating_sub(1)] {
        let c = f.from_log(l as i64);
        let graded = e.reduced_norm(&GradedElement::scalar(c, n))?;
        agrees &= graded == GradedElement::scalar(e.residue_reduced_norm(c), n);
    }
    Ok(ResidueSubgroups {
        norm_one,
        commutators: units / comm_gcd,
        commutators_have_norm_one: comm_norm_one,
        norm_formula_agrees: agrees,
    })
}

pub fn sk1_bruteforce(e: &MonomialGradedRing) -> Result<Sk1Report> {
    sk1_bruteforce_with(e, Budget::default())
}

pub fn sk1_bruteforce_with(e: &MonomialGradedRing, budget: Budget) -> Result<Sk1Report> {
    check_budget(e, budget)?;
    let s = residue_subgroups(e)?;
    if !s.commutators_have_norm_one || s.norm_one % s.commutators != 0 {
        return Err(Error::InvalidRing("commutator subgroup escapes the norm-one group".into()));
    }
    let mut r = Sk1Report::new(Method::BruteForce, FiniteAbelianGroup::cyclic(s.norm_one / s.commutators), e.index());
    r.witnesses.insert("norm_one_order".into(), json!(s.norm_one));
    r.witnesses.insert("commutator_order".into(), json!(s.commutators));
    r.checks.insert("commutators_in_norm_one".into(), s.commutators_have_norm_one);
    r.checks.insert("residue_norm_formula".into(), s.norm_formula_agrees);
    r.classification = e.descriptor().classify().ok();
    let nt = r.n_torsion();
    r.checks.insert("n_torsion".into(), nt);
    Ok(r)
}

#[derive(Clone, Debug, Serialize)]
pub struct Ck1Report {
    pub group: FiniteAbelianGroup,
    /// E₀*/T₀*E′ when known.
    pub residue_part: Option<FiniteAbelianGroup>,
    /// Γ_E/Γ_T.
    pub grade_part: FiniteAbelianGroup,
}

/// CK(E) = E*/(T*E′) from a descriptor.
pub fn ck1(desc: &GradedDivAlgDesc) -> Result<Ck1Report> {
    let grade_part = desc.grade_quotient()?;
    match desc.classify()? {
        Classification::Unramified => match &desc.residue {
            Residue::FiniteField { q, m } => {
                let o = (q.pow(*m) - 1) / (q - 1);
                let g = FiniteAbelianGroup::cyclic(o);
                Ok(Ck1Report { group: g.clone(), residue_part: Some(g), grade_part })
            }
            _ => Err(Error::UnsupportedCase("CK(E0) of an abstract residue algebra".into())),
        },
        Classification::TotallyRamified => {
            Ok(Ck1Report { group: grade_part.clone(), residue_part: Some(FiniteAbelianGroup::trivial()), grade_part })
        }
        c => Err(Error::UnsupportedCase(format!("CK1 of a {c:?} descriptor needs a concrete ring"))),
    }
}

/// Log of a T₀* element relative to the generator g^{(Q−1)/(q0−1)}.
fn t0_log(e: &MonomialGradedRing, c: Fe) -> Result<u64> {
    let units = e.field().units();
    let step = units / (e.t0_order() - 1);
    let l = c.log().ok_or(Error::ZeroElement)?;
    if l % step != 0 {
        return Err(Error::InvalidRing("element is not in T0".into()));
    }
    Ok(l / step)
}

/// CK(E) for a monomial ring: ℤ^{1+n} in (log, degree) coordinates modulo M*-order, E′, T₀*, and T*.
pub fn ck1_ring(e: &MonomialGradedRing) -> Result<Ck1Report> {
    check_budget(e, Budget::default())?;
    let s = residue_subgroups(e)?;
    let units = e.field().units();
    let n = e.rank();
    let mut rel = IntMatrix::zeros(0, 1 + n);
    let axis = |v: u64| {
        let mut row = vec![BigInt::from(0); 1 + n];
        row[0] = BigInt::from(v);
        row
    };
    rel.push_row(&axis(units));
    rel.push_row(&axis(units / s.commutators));
    rel.push_row(&axis(units / (e.t0_order() - 1)));
    let residue_part = FiniteAbelianGroup::cyclic(units.gcd(&(units / s.commutators)).gcd(&(units / (e.t0_order() - 1))));
    for gamma in e.gamma_basis() {
        let c = e.central_coefficient(&gamma).expect("basis degree is central");
        let mut row = vec![BigInt::from(c.log().expect("nonzero"))];
        row.extend(gamma.iter().map(|&x| BigInt::from(x)));
        rel.push_row(&row);
    }
    Ok(Ck1Report {
        group: FiniteAbelianGroup::cokernel(1 + n, &rel),
        residue_part: Some(residue_part),
        grade_part: e.grade_quotient().clone(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Sh1Report {
    pub group: FiniteAbelianGroup,
    /// T₀*/(T₀* ∩ Nrd(E*)).
    pub t0_component: FiniteAbelianGroup,
    /// Coordinates (T₀-log, Γ_T-coordinates) of Nrd of g, z_1, …, z_n.
    pub norm_coordinates: Vec<Vec<i64>>,
}

/// Coordinates of a central monomial in T* ≅ T₀* × Γ_T.
fn central_coords(e: &MonomialGradedRing, t: &GradedElement) -> Result<Vec<i64>> {
    let (_, deg) = t.as_monomial().ok_or(Error::ZeroElement)?;
    let k = e.gamma_coords(deg).ok_or_else(|| Error::InvalidRing("degree outside Γ_T".into()))?;
    let mut lift = e.one();
    for (b, &kb) in e.gamma_basis().iter().zip(&k) {
        let tau = e.central_monomial(b).expect("basis degree is central");
        lift = e.mul(&lift, &e.pow(&tau, kb)?);
    }
    let t0 = e.mul(t, &e.inverse(&lift)?);
    let (c, _) = t0.as_monomial().expect("unit");
    let mut out = vec![t0_log(e, c)? as i64];
    out.extend(k);
    Ok(out)
}

/// SH(E) = T*/Nrd(E*).
pub fn sh1(e: &MonomialGradedRing) -> Result<Sh1Report> {
    check_budget(e, Budget::default())?;
    let f = e.field().clone();
    let n = e.rank();
    let q0 = e.t0_order();
    let mut gens = vec![GradedElement::scalar(f.generator(), n)];
    for i in 0..n {
        let mut d = vec![0; n];
        d[i] = 1;
        gens.push(GradedElement::monomial(Fe::ONE, d));
    }
    let width = 1 + e.gamma_basis().len();
    let mut rel = IntMatrix::zeros(0, width);
    let mut first = vec![BigInt::from(0); width];
    first[0] = BigInt::from(q0 - 1);
    rel.push_row(&first);
    let mut coords = Vec::new();
    for g in &gens {
        let c = central_coords(e, &e.reduced_norm(g)?)?;
        rel.push_row(&c.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>());
        coords.push(c);
    }
    // T₀* ∩ Nrd(E*): combinations with vanishing Γ_T part
    let mut grade_cols = IntMatrix::zeros(0, width - 1);
    for i in 0..rel.rows() {
        grade_cols.push_row(&rel.row(i)[1..]);
    }
    let k = left_kernel(&grade_cols);
    let mut t0_gcd = BigInt::from(q0 - 1);
    for i in 0..k.rows() {
        let v: BigInt = (0..rel.rows()).map(|j| &k.row(i)[j] * &rel.row(j)[0]).sum();
        t0_gcd = t0_gcd.gcd(&v);
    }
    let t0_component = FiniteAbelianGroup::cyclic(t0_gcd.to_u64().expect("small"));
    Ok(Sh1Report { group: FiniteAbelianGroup::cokernel(width, &rel), t0_component, norm_coordinates: coords })
}
