//! Exact integer linear algebra: Smith normal form, lattices, subquotients.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds from rows; every row must have `cols` entries.
    pub fn from_rows<T: Into<BigInt> + Clone>(cols: usize, rows: &[Vec<T>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::Schema(format!("row of length {} in a matrix with {cols} columns", r.len())));
            }
            data.extend(r.iter().cloned().map(Into::into));
        }
        Ok(IntMatrix { rows: rows.len(), cols, data })
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_rows(cols, rows).expect("ragged matrix literal")
    }

    pub fn diagonal(entries: &[BigInt]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = e.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn push_row(&mut self, row: &[BigInt]) {
        assert_eq!(row.len(), self.cols);
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn stack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        IntMatrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        IntMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        IntMatrix { rows: self.rows, cols: self.cols, data }
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![BigInt::zero(); self.cols];
        for (i, a) in v.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o += a * self.get(i, j);
            }
        }
        out
    }

    /// Matrix times column vector.
    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn pow(&self, e: u64) -> IntMatrix {
        assert_eq!(self.rows, self.cols);
        let mut acc = Self::identity(self.rows);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Determinant by fraction-free elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> = self.row_vecs();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * a[n - 1][n - 1].clone()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += c * row[src]
    fn add_row(&mut self, dst: usize, src: usize, c: &BigInt) {
        for j in 0..self.cols {
            let v = self.get(src, j) * c;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += c * col[src]
    fn add_col(&mut self, dst: usize, src: usize, c: &BigInt) {
        for i in 0..self.rows {
            let v = self.get(i, src) * c;
            self.data[i * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.get(i, j);
            self.set(i, j, v);
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Smith normal form `u * m * v = s`.
///
/// Pivots on the entry of smallest absolute value; the diagonal of `s`
/// is nonnegative and forms a divisibility chain.
pub fn smith_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let (r, c) = (m.rows, m.cols);
    let mut s = m.clone();
    let mut u = IntMatrix::identity(r);
    let mut v = IntMatrix::identity(c);
    for t in 0..r.min(c) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..c {
                    let x = s.get(i, j);
                    if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < s.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return (u, s, v);
            };
            s.swap_rows(t, pi);
            u.swap_rows(t, pi);
            s.swap_cols(t, pj);
            v.swap_cols(t, pj);
            let mut clean = true;
            for i in t + 1..r {
                if !s.get(i, t).is_zero() {
                    let q = -s.get(i, t).div_floor(s.get(t, t));
                    s.add_row(i, t, &q);
                    u.add_row(i, t, &q);
                    clean &= s.get(i, t).is_zero();
                }
            }
            for j in t + 1..c {
                if !s.get(t, j).is_zero() {
                    let q = -s.get(t, j).div_floor(s.get(t, t));
                    s.add_col(j, t, &q);
                    v.add_col(j, t, &q);
                    clean &= s.get(t, j).is_zero();
                }
            }
            if !clean {
                continue;
            }
            let piv = s.get(t, t).clone();
            let bad = (t + 1..r).find(|&i| (t + 1..c).any(|j| !s.get(i, j).is_multiple_of(&piv)));
            match bad {
                Some(i) => {
                    s.add_row(t, i, &BigInt::one());
                    u.add_row(t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if s.get(t, t).is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
    }
    (u, s, v)
}

/// Nonzero diagonal entries of a Smith form.
fn smith_diagonal(s: &IntMatrix) -> Vec<BigInt> {
    (0..s.rows.min(s.cols)).map(|i| s.get(i, i).clone()).take_while(|x| !x.is_zero()).collect()
}

/// Row lattice of an integer matrix with membership and coordinates.
#[derive(Clone, Debug)]
pub struct Lattice {
    ambient: usize,
    diag: Vec<BigInt>,
    v: IntMatrix,
    basis: IntMatrix,
}

impl Lattice {
    pub fn new(ambient: usize, gens: &IntMatrix) -> Self {
        assert_eq!(gens.cols, ambient, "generator width");
        let (u, s, v) = smith_normal_form(gens);
        let diag = smith_diagonal(&s);
        // rows of u·gens = s·V^-1
        let ug = u.mul(gens);
        let mut basis = IntMatrix::zeros(0, ambient);
        for i in 0..diag.len() {
            basis.push_row(ug.row(i));
        }
        Lattice { ambient, diag, v, basis }
    }

    /// Basis matching the coordinates returned by `coords`.
    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.diag.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Coordinates with respect to the lattice basis `diag_i * row_i(V^-1)`.
    pub fn coords(&self, x: &[BigInt]) -> Option<Vec<BigInt>> {
        let y = self.v.vec_mul(x);
        let mut out = Vec::with_capacity(self.rank());
        for (i, yi) in y.iter().enumerate() {
            if i < self.diag.len() {
                let (q, r) = yi.div_rem(&self.diag[i]);
                if !r.is_zero() {
                    return None;
                }
                out.push(q);
            } else if !yi.is_zero() {
                return None;
            }
        }
        Some(out)
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        self.coords(x).is_some()
    }
}

/// Finite abelian group by invariant factors; 0 stands for a copy of ℤ.
#[derive(Clone, PartialEq, Eq, Debug, Default, Hash)]
pub struct FiniteAbelianGroup {
    invariant_factors: Vec<BigInt>,
}

impl FiniteAbelianGroup {
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn cyclic(n: u64) -> Self {
        Self::from_cyclic_orders(&[BigInt::from(n)])
    }

    /// Normalizes a direct sum of cyclic groups (0 meaning infinite cyclic).
    pub fn from_cyclic_orders(orders: &[BigInt]) -> Self {
        let (_, s, _) = smith_normal_form(&IntMatrix::diagonal(orders));
        let finite = smith_diagonal(&s);
        let free = orders.len() - finite.len();
        Self::from_smith(finite, free)
    }

    fn from_smith(diag: Vec<BigInt>, free: usize) -> Self {
        let mut f: Vec<BigInt> = diag.into_iter().map(|d| d.abs()).filter(|d| !d.is_one()).collect();
        f.extend(std::iter::repeat_n(BigInt::zero(), free));
        FiniteAbelianGroup { invariant_factors: f }
    }

    /// ℤ^n modulo the row lattice of `rel`.
    pub fn cokernel(n: usize, rel: &IntMatrix) -> Self {
        assert_eq!(rel.cols, n);
        let (_, s, _) = smith_normal_form(rel);
        let d = smith_diagonal(&s);
        let free = n - d.len();
        Self::from_smith(d, free)
    }

    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.invariant_factors
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.invariant_factors.iter().all(|d| !d.is_zero())
    }

    /// Group order, `None` when infinite.
    pub fn order(&self) -> Option<BigInt> {
        self.is_finite().then(|| self.invariant_factors.iter().product())
    }

    /// Exponent (largest invariant factor), 0 when infinite, 1 when trivial.
    pub fn exponent(&self) -> BigInt {
        self.invariant_factors.last().cloned().unwrap_or_else(BigInt::one)
    }

    /// True when every element has order dividing `n`.
    pub fn is_torsion_of(&self, n: u64) -> bool {
        let e = self.exponent();
        !e.is_zero() && BigInt::from(n).is_multiple_of(&e)
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut all = self.invariant_factors.clone();
        all.extend(other.invariant_factors.iter().cloned());
        Self::from_cyclic_orders(&all)
    }

    pub fn factors_u64(&self) -> Vec<u64> {
        self.invariant_factors.iter().map(|d| d.to_u64().expect("invariant factor exceeds u64")).collect()
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .invariant_factors
            .iter()
            .map(|d| if d.is_zero() { "Z".to_string() } else { format!("Z/{d}") })
            .collect();
        write!(f, "{}", parts.join(" x "))
    }
}

impl Serialize for FiniteAbelianGroup {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(self.invariant_factors.len()))?;
        for d in &self.invariant_factors {
            match d.to_u64() {
                Some(x) => seq.serialize_element(&x)?,
                None => seq.serialize_element(&d.to_string())?,
            }
        }
        seq.end()
    }
}

/// Quotient of the row lattice of `numerator_gens` by that of `denominator_gens` in ℤ^n.
pub fn subquotient(
    ambient_rank: usize,
    numerator_gens: &IntMatrix,
    denominator_gens: &IntMatrix,
) -> Result<FiniteAbelianGroup> {
    let num = Lattice::new(ambient_rank, numerator_gens);
    let mut coords = IntMatrix::zeros(0, num.rank());
    for i in 0..denominator_gens.rows {
        let c = num.coords(denominator_gens.row(i)).ok_or(Error::Containment)?;
        coords.push_row(&c);
    }
    Ok(FiniteAbelianGroup::cokernel(num.rank(), &coords))
}

/// Left integer kernel: a basis of `{x : x * m = 0}`.
pub fn left_kernel(m: &IntMatrix) -> IntMatrix {
    let (u, s, _) = smith_normal_form(m);
    let rank = smith_diagonal(&s).len();
    let mut k = IntMatrix::zeros(0, m.rows);
    for i in rank..m.rows {
        k.push_row(u.row(i));
    }
    k
}

pub fn big_vec(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}
