//! Schema helpers: pulling typed values out of the JSON inputs.

use std::sync::Arc;

use num_rational::Ratio;
use serde::de::DeserializeOwned;
use serde_json::Value;

use gradsk::descriptor::GradedDivAlgDesc;
use gradsk::ff::{Fe, Gf};
use gradsk::graded::{MonomialGradedRing, MonomialRingSpec};
use gradsk::matdiv::{TwRing, TwSeries};
use gradsk::series::{Series, EXACT};
use gradsk::skewpoly::{SkewPoly, SkewPolyRing};
use gradsk::{Error, Result};

pub fn typed<T: DeserializeOwned>(v: &Value) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Schema(e.to_string()))
}

pub fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Schema(format!("missing field '{key}'")))
}

pub fn uint(v: &Value, key: &str) -> Result<u64> {
    field(v, key)?.as_u64().ok_or_else(|| Error::Schema(format!("'{key}' must be a non-negative integer")))
}

pub fn int(v: &Value) -> Result<i64> {
    v.as_i64().ok_or_else(|| Error::Schema(format!("expected an integer, got {v}")))
}

/// Either a descriptor or a concrete monomial ring (which also yields its descriptor).
pub struct Algebra {
    pub desc: GradedDivAlgDesc,
    pub ring: Option<MonomialGradedRing>,
}

pub fn algebra(v: &Value) -> Result<Algebra> {
    if v.get("gamma_t").is_some() {
        return Ok(Algebra { desc: typed(v)?, ring: None });
    }
    if v.get("sigma").is_some() {
        let ring = monomial_ring(v)?;
        return Ok(Algebra { desc: ring.descriptor(), ring: Some(ring) });
    }
    Err(Error::Schema("expected a graded algebra descriptor (gamma_t) or a monomial ring (sigma)".into()))
}

pub fn monomial_ring(v: &Value) -> Result<MonomialGradedRing> {
    MonomialGradedRing::from_spec(&typed::<MonomialRingSpec>(v)?)
}

pub fn skew_ring(v: &Value) -> Result<SkewPolyRing> {
    SkewPolyRing::from_spec(&typed(field(v, "ring")?)?)
}

/// A polynomial literal, or a list of literals to be multiplied left to right.
pub fn skew_poly(ring: &SkewPolyRing, v: &Value) -> Result<SkewPoly> {
    match v {
        Value::String(s) => ring.parse(s),
        Value::Array(parts) => {
            let ps: Vec<SkewPoly> = parts.iter().map(|p| skew_poly(ring, p)).collect::<Result<_>>()?;
            Ok(ring.product(&ps))
        }
        _ => Err(Error::Schema("a skew polynomial is a string or a list of strings".into())),
    }
}

/// `"a/b"`, `"a"` or an integer.
pub fn ratio(v: &Value) -> Result<Ratio<i64>> {
    let bad = || Error::Schema(format!("cannot read {v} as a rational"));
    match v {
        Value::Number(n) => Ok(Ratio::from_integer(n.as_i64().ok_or_else(bad)?)),
        Value::String(s) => match s.split_once('/') {
            Some((a, b)) => {
                let (a, b) = (a.trim().parse::<i64>().map_err(|_| bad())?, b.trim().parse::<i64>().map_err(|_| bad())?);
                if b == 0 {
                    return Err(bad());
                }
                Ok(Ratio::new(a, b))
            }
            None => Ok(Ratio::from_integer(s.trim().parse::<i64>().map_err(|_| bad())?)),
        },
        _ => Err(bad()),
    }
}

pub fn base_field(v: &Value) -> Result<Arc<Gf>> {
    Gf::with_order(uint(v, "q")?)
}

/// Packed base-p code of a field element.
pub fn code(f: &Gf, v: &Value) -> Result<Fe> {
    let c = v.as_u64().ok_or_else(|| Error::Schema(format!("field element {v} must be a non-negative integer code")))?;
    if c >= f.order() {
        return Err(Error::Schema(format!("code {c} is outside GF({})", f.order())));
    }
    Ok(f.from_int(c))
}

pub fn codes(f: &Gf, v: &Value) -> Result<Vec<Fe>> {
    v.as_array().ok_or_else(|| Error::Schema("expected a list of field codes".into()))?.iter().map(|c| code(f, c)).collect()
}

/// Series literal or a constant code.
pub fn series(f: &Arc<Gf>, v: &Value) -> Result<Series> {
    match v {
        Value::String(s) => Series::parse(f, s),
        Value::Number(_) => Ok(Series::constant(f, code(f, v)?)),
        _ => Err(Error::Schema(format!("{v} is not a series literal"))),
    }
}

pub fn series_list(f: &Arc<Gf>, v: &Value) -> Result<Vec<Series>> {
    v.as_array().ok_or_else(|| Error::Schema("expected a coefficient list".into()))?.iter().map(|c| series(f, c)).collect()
}

/// `{"val": v, "coeffs": [codes]}`, exact.
pub fn tw_series(ring: &Arc<TwRing>, v: &Value) -> Result<TwSeries> {
    let val = int(field(v, "val")?)?;
    let c = codes(ring.field(), field(v, "coeffs")?)?;
    Ok(TwSeries::new(ring, val, c, EXACT))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rationals() {
        assert_eq!(ratio(&json!("3/6")).unwrap(), Ratio::new(1, 2));
        assert_eq!(ratio(&json!(-2)).unwrap(), Ratio::from_integer(-2));
        assert_eq!(ratio(&json!(" 4 ")).unwrap(), Ratio::from_integer(4));
        assert!(ratio(&json!("1/0")).is_err());
        assert!(ratio(&json!([1])).is_err());
    }

    #[test]
    fn algebra_kind_is_detected() {
        let d = json!({"gamma_rank":1,"gamma_t":[[1]],"index":2,"residue":{"type":"finite_field","q":3,"m":4}});
        assert!(algebra(&d).unwrap().ring.is_none());
        let r = json!({"q":3,"m":2,"n":1,"sigma":[1],"r":[2],"b":[0],"u":[[0]]});
        let a = algebra(&r).unwrap();
        assert_eq!(a.ring.unwrap().index(), 2);
        assert!(matches!(algebra(&json!({"q": 3})), Err(Error::Schema(_))));
    }

    #[test]
    fn codes_are_range_checked() {
        let f = Gf::with_order(9).unwrap();
        assert_eq!(f.to_int(code(&f, &json!(8)).unwrap()), 8);
        assert!(code(&f, &json!(9)).is_err());
        assert!(code(&f, &json!(-1)).is_err());
    }
}
