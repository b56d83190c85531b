//! Dense matrices over a finite field.

use crate::ff::{Fe, Gf};
use crate::poly::Poly;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FMat {
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

impl FMat {
    pub fn zeros(rows: usize, cols: usize) -> FMat {
        FMat { rows, cols, data: vec![Fe::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> FMat {
        let mut m = FMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Fe::ONE);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Fe>]) -> FMat {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        FMat { rows: rows.len(), cols, data: rows.concat() }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(n: usize, cols: &[Vec<Fe>]) -> FMat {
        let mut m = FMat::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Fe {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Fe) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Fe] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Fe> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn mul(&self, f: &Gf, o: &FMat) -> FMat {
        assert_eq!(self.cols, o.rows, "shape mismatch");
        let mut out = FMat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let v = f.add(out.get(i, j), f.mul(a, o.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn apply(&self, f: &Gf, v: &[Fe]) -> Vec<Fe> {
        (0..self.rows).map(|i| f.sum(self.row(i).iter().zip(v).map(|(&a, &b)| f.mul(a, b)))).collect()
    }

    pub fn add(&self, f: &Gf, o: &FMat) -> FMat {
        FMat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(&a, &b)| f.add(a, b)).collect() }
    }

    pub fn scale(&self, f: &Gf, c: Fe) -> FMat {
        FMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| f.mul(a, c)).collect() }
    }

    pub fn pow(&self, f: &Gf, mut e: u64) -> FMat {
        let mut acc = FMat::identity(self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(f, &base);
            }
            base = base.mul(f, &base);
            e >>= 1;
        }
        acc
    }

    /// `p(self)` by Horner.
    pub fn eval_poly(&self, f: &Gf, p: &Poly) -> FMat {
        let mut acc = FMat::zeros(self.rows, self.cols);
        for &c in p.coeffs().iter().rev() {
            acc = acc.mul(f, self).add(f, &FMat::identity(self.rows).scale(f, c));
        }
        acc
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self, f: &Gf) -> (FMat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else { continue };
            for j in 0..m.cols {
                m.data.swap(p * m.cols + j, r * m.cols + j);
            }
            let inv = f.inv(m.get(r, c)).expect("nonzero pivot");
            for j in 0..m.cols {
                m.set(r, j, f.mul(m.get(r, j), inv));
            }
            for i in 0..m.rows {
                let a = m.get(i, c);
                if i != r && !a.is_zero() {
                    for j in 0..m.cols {
                        let v = f.sub(m.get(i, j), f.mul(a, m.get(r, j)));
                        m.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == m.rows {
                break;
            }
        }
        (m, pivots)
    }

    pub fn rank(&self, f: &Gf) -> usize {
        self.rref(f).1.len()
    }

    /// Basis of `{v : self·v = 0}`.
    pub fn nullspace(&self, f: &Gf) -> Vec<Vec<Fe>> {
        let (r, pivots) = self.rref(f);
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![Fe::ZERO; self.cols];
            v[free] = Fe::ONE;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(r.get(row, free));
            }
            out.push(v);
        }
        out
    }

    /// Some solution of `self·x = b`.
    pub fn solve(&self, f: &Gf, b: &[Fe]) -> Option<Vec<Fe>> {
        let mut aug = FMat::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, b[i]);
        }
        let (r, pivots) = aug.rref(f);
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Fe::ZERO; self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(row, self.cols);
        }
        Some(x)
    }

    pub fn det(&self, f: &Gf) -> Fe {
        assert_eq!(self.rows, self.cols, "square matrix required");
        let mut m = self.clone();
        let n = self.rows;
        let mut det = Fe::ONE;
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m.get(i, c).is_zero()) else { return Fe::ZERO };
            if p != c {
                for j in 0..n {
                    m.data.swap(p * n + j, c * n + j);
                }
                det = f.neg(det);
            }
            let piv = m.get(c, c);
            det = f.mul(det, piv);
            let inv = f.inv(piv).expect("nonzero pivot");
            for i in c + 1..n {
                let a = f.mul(m.get(i, c), inv);
                if !a.is_zero() {
                    for j in c..n {
                        let v = f.sub(m.get(i, j), f.mul(a, m.get(c, j)));
                        m.set(i, j, v);
                    }
                }
            }
        }
        det
    }

    /// Characteristic polynomial det(xI − A) via Hessenberg reduction.
    pub fn charpoly(&self, f: &Gf) -> Poly {
        assert_eq!(self.rows, self.cols, "square matrix required");
        let n = self.rows;
        let mut h = self.clone();
        for c in 0..n.saturating_sub(2) {
            let Some(p) = (c + 1..n).find(|&i| !h.get(i, c).is_zero()) else { continue };
            if p != c + 1 {
                for j in 0..n {
                    h.data.swap(p * n + j, (c + 1) * n + j);
                }
                for i in 0..n {
                    h.data.swap(i * n + p, i * n + c + 1);
                }
            }
            let inv = f.inv(h.get(c + 1, c)).expect("nonzero pivot");
            for i in c + 2..n {
                let a = f.mul(h.get(i, c), inv);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = f.sub(h.get(i, j), f.mul(a, h.get(c + 1, j)));
                    h.set(i, j, v);
                }
                for r in 0..n {
                    let v = f.add(h.get(r, c + 1), f.mul(a, h.get(r, i)));
                    h.set(r, c + 1, v);
                }
            }
        }
        // p_k = (x - h_kk) p_{k-1} - Σ_i h_ik (Π_{j=i+1..k} h_{j,j-1}) p_{i-1}
        let mut ps: Vec<Poly> = vec![Poly::one()];
        for k in 0..n {
            let mut pk = Poly::new(vec![f.neg(h.get(k, k)), Fe::ONE]).mul(f, &ps[k]);
            let mut prod = Fe::ONE;
            for i in (0..k).rev() {
                prod = f.mul(prod, h.get(i + 1, i));
                let c = f.mul(prod, h.get(i, k));
                pk = pk.sub(f, &ps[i].scale(f, c));
            }
            ps.push(pk);
        }
        ps.pop().expect("nonempty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rand_mat(f: &Gf, n: usize, codes: &[u32]) -> FMat {
        let rows: Vec<Vec<Fe>> =
            (0..n).map(|i| (0..n).map(|j| f.from_int(codes[i * n + j] as u64 % f.order())).collect()).collect();
        FMat::from_rows(&rows)
    }

    /// Leibniz expansion over all permutations.
    fn brute_det(f: &Gf, m: &FMat) -> Fe {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for pos in 0..n {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    out.push(q);
                }
            }
            out
        }
        let n = m.rows();
        let mut acc = Fe::ZERO;
        for p in perms(n) {
            let inv = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            let mut t = f.product((0..n).map(|i| m.get(i, p[i])));
            if inv % 2 == 1 {
                t = f.neg(t);
            }
            acc = f.add(acc, t);
        }
        acc
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn det_and_charpoly(n in 1usize..5, codes in prop::collection::vec(0u32..1000, 16)) {
            let f = Gf::new(3, 2).unwrap();
            let m = rand_mat(&f, n, &codes);
            prop_assert_eq!(m.det(&f), brute_det(&f, &m));
            let cp = m.charpoly(&f);
            prop_assert_eq!(cp.degree(), Some(n));
            // Cayley–Hamilton and constant term
            prop_assert_eq!(m.eval_poly(&f, &cp), FMat::zeros(n, n));
            let c0 = if n % 2 == 0 { m.det(&f) } else { f.neg(m.det(&f)) };
            prop_assert_eq!(cp.coeff(0), c0);
        }

        #[test]
        fn nullspace_and_solve(r in 1usize..4, c in 1usize..5, codes in prop::collection::vec(0u32..1000, 20)) {
            let f = Gf::new(2, 3).unwrap();
            let rows: Vec<Vec<Fe>> = (0..r).map(|i| (0..c).map(|j| f.from_int(codes[i * c + j] as u64 % 8)).collect()).collect();
            let m = FMat::from_rows(&rows);
            let ns = m.nullspace(&f);
            prop_assert_eq!(ns.len() + m.rank(&f), c);
            for v in &ns {
                prop_assert!(m.apply(&f, v).iter().all(|x| x.is_zero()));
            }
            let x: Vec<Fe> = (0..c).map(|j| f.from_int(codes[j + 12] as u64 % 8)).collect();
            let b = m.apply(&f, &x);
            let y = m.solve(&f, &b).unwrap();
            prop_assert_eq!(m.apply(&f, &y), b);
        }
    }
}
