//! Descriptor-level graded division algebras: grade groups, residue data, classification.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::abgroup::{FiniteAbelianGroup, IntMatrix};
use crate::error::{Error, Result};
use crate::gmodule::GModuleSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Residue {
    /// E₀ = GF(q^m), T₀ = GF(q).
    FiniteField { q: u64, m: u32 },
    /// E₀ given by its degree [E₀:T₀], its centre degree, and E₀* as a G-module.
    Abstract {
        degree: u64,
        #[serde(default = "one")]
        center_degree: u64,
        commutative: bool,
        #[serde(default)]
        t0_order: Option<u64>,
        #[serde(default)]
        module: Option<GModuleSpec>,
        /// A totally ramified maximal graded subfield exists.
        #[serde(default)]
        nicely: bool,
        /// Invariant factors of SK(E₀), when known.
        #[serde(default)]
        sk: Option<Vec<u64>>,
    },
}

fn one() -> u64 {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    Unramified,
    TotallyRamified,
    Semiramified,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradedDivAlgDesc {
    pub gamma_rank: usize,
    /// Basis rows of Γ_T ⊆ ℤ^n.
    pub gamma_t: Vec<Vec<i64>>,
    pub residue: Residue,
    pub index: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_kernel: Option<Vec<Vec<i64>>>,
}

impl GradedDivAlgDesc {
    fn gamma_matrix(&self) -> Result<IntMatrix> {
        IntMatrix::from_rows(self.gamma_rank, &self.gamma_t)
    }

    /// Γ_E/Γ_T.
    pub fn grade_quotient(&self) -> Result<FiniteAbelianGroup> {
        let g = FiniteAbelianGroup::cokernel(self.gamma_rank, &self.gamma_matrix()?);
        if !g.is_finite() {
            return Err(Error::InvalidRing("Γ_T has infinite index in Γ_E".into()));
        }
        Ok(g)
    }

    pub fn gamma_index(&self) -> Result<u64> {
        self.grade_quotient()?
            .order()
            .and_then(|o| o.to_u64())
            .ok_or_else(|| Error::InvalidRing("grade index too large".into()))
    }

    /// Exponent e of Γ_E/Γ_T.
    pub fn exponent(&self) -> Result<u64> {
        self.grade_quotient()?.exponent().to_u64().ok_or_else(|| Error::InvalidRing("exponent too large".into()))
    }

    /// [E₀:T₀].
    pub fn residue_degree(&self) -> u64 {
        match &self.residue {
            Residue::FiniteField { m, .. } => *m as u64,
            Residue::Abstract { degree, .. } => *degree,
        }
    }

    pub fn residue_commutative(&self) -> bool {
        match &self.residue {
            Residue::FiniteField { .. } => true,
            Residue::Abstract { commutative, .. } => *commutative,
        }
    }

    /// |T₀| when finite.
    pub fn t0_order(&self) -> Option<u64> {
        match &self.residue {
            Residue::FiniteField { q, .. } => Some(*q),
            Residue::Abstract { t0_order, .. } => *t0_order,
        }
    }

    /// Checks shapes and the Fundamental Equality [E:T] = [E₀:T₀]·|Γ_E:Γ_T| = ind².
    pub fn validate(&self) -> Result<()> {
        if self.index == 0 {
            return Err(Error::Schema("index must be positive".into()));
        }
        if let Residue::FiniteField { q, m } = &self.residue {
            if crate::ff::prime_power(*q).is_none() || *m == 0 {
                return Err(Error::Schema(format!("GF({q}^{m}) is not a field")));
            }
        }
        if let Residue::Abstract { degree, center_degree, .. } = &self.residue {
            if *degree == 0 || *center_degree == 0 || degree % center_degree != 0 {
                return Err(Error::Schema("abstract residue degrees must be positive with center_degree | degree".into()));
            }
        }
        let gi = self.gamma_index()?;
        let lhs = BigInt::from(self.residue_degree()) * BigInt::from(gi);
        if lhs != BigInt::from(self.index) * BigInt::from(self.index) {
            return Err(Error::InvalidRing(format!(
                "fundamental equality fails: [E0:T0]·|Γ_E:Γ_T| = {lhs} but ind² = {}",
                self.index * self.index
            )));
        }
        if let Some(k) = &self.theta_kernel {
            IntMatrix::from_rows(self.gamma_rank, k)?;
        }
        Ok(())
    }

    pub fn classify(&self) -> Result<Classification> {
        self.validate()?;
        let gi = self.gamma_index()?;
        let deg = self.residue_degree();
        Ok(if gi == 1 {
            Classification::Unramified
        } else if deg == 1 {
            Classification::TotallyRamified
        } else if self.residue_commutative() && deg == gi && gi == self.index {
            Classification::Semiramified
        } else {
            Classification::Other
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desc(n: usize, gt: Vec<Vec<i64>>, residue: Residue, index: u64) -> GradedDivAlgDesc {
        GradedDivAlgDesc { gamma_rank: n, gamma_t: gt, residue, index, theta_kernel: None }
    }

    #[test]
    fn classification_examples() {
        let unram = desc(1, vec![vec![1]], Residue::FiniteField { q: 3, m: 4 }, 2);
        assert_eq!(unram.classify(), Ok(Classification::Unramified));
        let tot = desc(2, vec![vec![2, 0], vec![0, 2]], Residue::FiniteField { q: 5, m: 1 }, 2);
        assert_eq!(tot.classify(), Ok(Classification::TotallyRamified));
        let semi = desc(1, vec![vec![2]], Residue::FiniteField { q: 3, m: 2 }, 2);
        assert_eq!(semi.classify(), Ok(Classification::Semiramified));
        let other = desc(
            2,
            vec![vec![2, 0], vec![0, 2]],
            Residue::Abstract { degree: 4, center_degree: 1, commutative: false, t0_order: None, module: None, nicely: false, sk: None },
            4,
        );
        assert_eq!(other.classify(), Ok(Classification::Other));
    }

    #[test]
    fn fundamental_equality_enforced() {
        let bad = desc(1, vec![vec![2]], Residue::FiniteField { q: 3, m: 2 }, 3);
        assert!(matches!(bad.classify(), Err(Error::InvalidRing(_))));
        let infinite = desc(2, vec![vec![2, 0]], Residue::FiniteField { q: 3, m: 1 }, 1);
        assert!(matches!(infinite.classify(), Err(Error::InvalidRing(_))));
    }

    #[test]
    fn json_roundtrip() {
        let js = r#"{"gamma_rank":2,"gamma_t":[[2,0],[0,2]],"index":2,"residue":{"type":"finite_field","q":5,"m":1}}"#;
        let d: GradedDivAlgDesc = serde_json::from_str(js).unwrap();
        assert_eq!(d.exponent(), Ok(2));
        let back: GradedDivAlgDesc = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn ring_descriptor_satisfies_fundamental_equality() {
        let e = crate::graded::tests::gf9_frob();
        let d = e.descriptor();
        assert_eq!(d.classify(), Ok(Classification::Semiramified));
        assert_eq!(d.theta_kernel.as_ref().map(|k| k.len()), Some(1));
    }
}
