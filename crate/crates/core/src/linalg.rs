//! Dense linear algebra over the chain ring `Z/p^N`.
//!
//! `Z/p^N` is local with principal maximal ideal `(p)`, so every entry is
//! `p^v * unit`. Elimination always pivots on an entry of minimal valuation;
//! such a pivot divides every other entry of its column, which keeps all row
//! operations unimodular and the determinant exact modulo `p^N`.

use crate::error::{Error, Result};
use crate::padic::{PadicContext, PadicInt};

/// Row-major matrix of residues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    ctx: PadicContext,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Matrix {
    pub fn zeros(ctx: PadicContext, rows: usize, cols: usize) -> Self {
        Matrix {
            ctx,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(ctx: PadicContext, n: usize) -> Self {
        let mut m = Matrix::zeros(ctx, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % ctx.modulus();
        }
        m
    }

    pub fn from_fn(
        ctx: PadicContext,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> i128,
    ) -> Self {
        let mut m = Matrix::zeros(ctx, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = ctx.reduce(f(i, j)).value();
            }
        }
        m
    }

    pub fn ctx(&self) -> PadicContext {
        self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> PadicInt {
        PadicInt::from_raw(self.ctx, self.data[i * self.cols + j])
    }

    pub fn set(&mut self, i: usize, j: usize, x: PadicInt) {
        assert_eq!(x.ctx(), self.ctx);
        self.data[i * self.cols + j] = x.value();
    }

    pub(crate) fn raw(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub(crate) fn set_raw(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row_sums(&self) -> Vec<PadicInt> {
        (0..self.rows)
            .map(|i| {
                let s = self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .fold(0, |acc, &x| self.ctx.add_raw(acc, x));
                PadicInt::from_raw(self.ctx, s)
            })
            .collect()
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let k = self.ctx;
        let mut out = Matrix::zeros(k, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.raw(i, l);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = k.add_raw(out.raw(i, j), k.mul_raw(a, other.raw(l, j)));
                    out.set_raw(i, j, v);
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// `row[target] -= factor * row[source]`, from column `from` on.
    fn sub_row_multiple(&mut self, target: usize, source: usize, factor: u64, from: usize) {
        let k = self.ctx;
        for j in from..self.cols {
            let s = self.raw(source, j);
            if s != 0 {
                let v = k.sub_raw(self.raw(target, j), k.mul_raw(factor, s));
                self.set_raw(target, j, v);
            }
        }
    }

    /// Row in `start..rows` holding the minimal-valuation entry of column `col`.
    fn min_valuation_pivot(&self, col: usize, start: usize) -> Option<(usize, u32)> {
        let k = self.ctx;
        let mut best: Option<(usize, u32)> = None;
        for i in start..self.rows {
            let x = self.raw(i, col);
            if x == 0 {
                continue;
            }
            let v = k.valuation_raw(x);
            if best.is_none_or(|(_, bv)| v < bv) {
                best = Some((i, v));
                if v == 0 {
                    break;
                }
            }
        }
        best
    }

    /// Determinant modulo `p^N` by minimal-valuation pivoting.
    ///
    /// Fails with `PrecisionExhausted` when some column has no entry that is
    /// nonzero mod `p^N` below the current pivot row; at that point the
    /// determinant is `0 mod p^N` and its true valuation is unknown.
    pub fn det(&self) -> Result<PadicInt> {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let k = self.ctx;
        let n = self.rows;
        let mut m = self.clone();
        let mut det = 1 % k.modulus();
        for c in 0..n {
            let (r, v) = m
                .min_valuation_pivot(c, c)
                .ok_or(Error::PrecisionExhausted { column: c })?;
            if r != c {
                m.swap_rows(r, c);
                det = k.neg_raw(det);
            }
            let piv = m.raw(c, c);
            let (_, unit) = k.split_raw(piv);
            let unit_inv = k.inv_raw(unit).expect("unit part is prime to p");
            for i in c + 1..n {
                let x = m.raw(i, c);
                if x == 0 {
                    continue;
                }
                let (vx, ux) = k.split_raw(x);
                let factor = k.mul_raw(k.mul_raw(k.p_pow(vx - v).value(), ux), unit_inv);
                m.sub_row_multiple(i, c, factor, c);
            }
            det = k.mul_raw(det, piv);
        }
        Ok(PadicInt::from_raw(k, det))
    }

    /// True iff the determinant is a unit, i.e. the matrix is invertible
    /// over `Z/p^N`. Never runs out of precision: a column without a unit
    /// pivot already certifies a non-unit determinant.
    pub fn has_unit_det(&self) -> bool {
        assert_eq!(self.rows, self.cols);
        let k = self.ctx;
        let n = self.rows;
        let mut m = self.clone();
        for c in 0..n {
            match m.min_valuation_pivot(c, c) {
                Some((r, 0)) => {
                    m.swap_rows(r, c);
                    let inv = k.inv_raw(m.raw(c, c)).unwrap();
                    for i in c + 1..n {
                        let x = m.raw(i, c);
                        if x != 0 {
                            m.sub_row_multiple(i, c, k.mul_raw(x, inv), c);
                        }
                    }
                }
                _ => return false,
            }
        }
        true
    }

    /// Solves `self * x = rhs` for an invertible square matrix.
    pub fn solve(&self, rhs: &[PadicInt]) -> Result<Vec<PadicInt>> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(rhs.len(), self.rows);
        let k = self.ctx;
        let n = self.rows;
        let mut aug = Matrix::zeros(k, n, n + 1);
        for i in 0..n {
            for j in 0..n {
                aug.set_raw(i, j, self.raw(i, j));
            }
            aug.set_raw(i, n, rhs[i].value());
        }
        for c in 0..n {
            let r = match aug.min_valuation_pivot(c, c) {
                Some((r, 0)) => r,
                _ => return Err(Error::NotAUnit),
            };
            aug.swap_rows(r, c);
            let inv = k.inv_raw(aug.raw(c, c)).unwrap();
            for j in c..=n {
                let v = k.mul_raw(aug.raw(c, j), inv);
                aug.set_raw(c, j, v);
            }
            for i in 0..n {
                if i == c {
                    continue;
                }
                let x = aug.raw(i, c);
                if x != 0 {
                    aug.sub_row_multiple(i, c, x, c);
                }
            }
        }
        Ok((0..n).map(|i| aug.get(i, n)).collect())
    }
}

/// Canonical basis of a `Z/p^N`-submodule of `(Z/p^N)^n`.
///
/// This is the Howell form: an echelon basis whose pivots are pure powers
/// `p^k` (stored as `k`), with every entry above a pivot reduced into
/// `[0, p^k)`, and closed under the annihilator multiples `p^(N-k) * row`.
/// Two generating sets span the same submodule iff their Howell forms agree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HowellForm {
    ctx: PadicContext,
    dim: usize,
    // pivots[c] = (valuation, row) for the row whose leading column is c
    pivots: Vec<Option<(u32, Vec<u64>)>>,
    reduced: bool,
}

impl HowellForm {
    pub fn new(ctx: PadicContext, dim: usize) -> Self {
        HowellForm {
            ctx,
            dim,
            pivots: vec![None; dim],
            reduced: true,
        }
    }

    pub fn ctx(&self) -> PadicContext {
        self.ctx
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds a generator to the spanned submodule.
    pub fn insert(&mut self, v: &[u64]) {
        assert_eq!(v.len(), self.dim);
        let mut work = vec![v.to_vec()];
        while let Some(row) = work.pop() {
            self.insert_one(row, &mut work);
        }
    }

    fn insert_one(&mut self, mut v: Vec<u64>, work: &mut Vec<Vec<u64>>) {
        let k = self.ctx;
        let mut c = 0;
        while c < self.dim {
            if v[c] == 0 {
                c += 1;
                continue;
            }
            let (vv, uv) = k.split_raw(v[c]);
            match &mut self.pivots[c] {
                None => {
                    normalize(k, &mut v, c, uv);
                    if vv > 0 {
                        work.push(scale_pow(k, &v, k.prec() - vv));
                    }
                    self.pivots[c] = Some((vv, v));
                    self.reduced = false;
                    return;
                }
                Some((pk, prow)) => {
                    if vv >= *pk {
                        // v[c] = p^vv * uv, pivot = p^pk
                        let factor = k.mul_raw(k.p_pow(vv - *pk).value(), uv);
                        sub_multiple(k, &mut v, prow, factor, c);
                        debug_assert_eq!(v[c], 0);
                    } else {
                        normalize(k, &mut v, c, uv);
                        let old = std::mem::replace(prow, v);
                        let old_k = std::mem::replace(pk, vv);
                        if vv > 0 {
                            work.push(scale_pow(k, prow, k.prec() - vv));
                        }
                        self.reduced = false;
                        // carry the displaced row on; it now reduces at c
                        let factor = k.p_pow(old_k - vv).value();
                        v = old;
                        let prow = &self.pivots[c].as_ref().unwrap().1;
                        sub_multiple(k, &mut v, prow, factor, c);
                        debug_assert_eq!(v[c], 0);
                    }
                }
            }
            c += 1;
        }
    }

    /// Reduces `v` against the basis; returns the remainder.
    fn remainder(&self, v: &[u64]) -> Vec<u64> {
        let k = self.ctx;
        let mut v = v.to_vec();
        for c in 0..self.dim {
            if v[c] == 0 {
                continue;
            }
            if let Some((pk, prow)) = &self.pivots[c] {
                let (vv, uv) = k.split_raw(v[c]);
                if vv >= *pk {
                    let factor = k.mul_raw(k.p_pow(vv - *pk).value(), uv);
                    sub_multiple(k, &mut v, prow, factor, c);
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.remainder(v).iter().all(|&x| x == 0)
    }

    /// Brings the basis to its unique reduced shape.
    pub fn canonicalize(&mut self) {
        if self.reduced {
            return;
        }
        let k = self.ctx;
        // Saturate: every p^(N-k) * row must reduce to zero.
        loop {
            let mut extra = Vec::new();
            for (pk, prow) in self.pivots.iter().flatten() {
                if *pk > 0 {
                    let w = scale_pow(k, prow, k.prec() - pk);
                    if !self.contains(&w) {
                        extra.push(w);
                    }
                }
            }
            if extra.is_empty() {
                break;
            }
            for w in extra {
                self.insert(&w);
            }
        }
        // Reduce entries above each pivot into [0, p^k).
        let pivot_cols: Vec<usize> = (0..self.dim).filter(|&c| self.pivots[c].is_some()).collect();
        for (i, &r) in pivot_cols.iter().enumerate() {
            for &c in &pivot_cols[i + 1..] {
                let (pk, prow) = self.pivots[c].clone().unwrap();
                let row = &mut self.pivots[r].as_mut().unwrap().1;
                let bound = k.p_pow(pk).value().max(1);
                let q = if pk == 0 { row[c] } else { row[c] / bound };
                if q != 0 {
                    sub_multiple(k, row, &prow, q, c);
                }
            }
        }
        self.reduced = true;
    }

    /// Canonical rows in pivot order. Call [`HowellForm::canonicalize`] first.
    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.pivots.iter().flatten().map(|(_, r)| r.clone()).collect()
    }

    pub fn rank_profile(&self) -> Vec<(usize, u32)> {
        self.pivots
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.as_ref().map(|(k, _)| (c, *k)))
            .collect()
    }
}

fn normalize(k: PadicContext, v: &mut [u64], from: usize, unit: u64) {
    let inv = k.inv_raw(unit).expect("unit");
    for x in v[from..].iter_mut() {
        *x = k.mul_raw(*x, inv);
    }
}

fn scale_pow(k: PadicContext, v: &[u64], e: u32) -> Vec<u64> {
    let s = k.p_pow(e).value();
    v.iter().map(|&x| k.mul_raw(x, s)).collect()
}

fn sub_multiple(k: PadicContext, v: &mut [u64], row: &[u64], factor: u64, from: usize) {
    for j in from..v.len() {
        if row[j] != 0 {
            v[j] = k.sub_raw(v[j], k.mul_raw(factor, row[j]));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx() -> PadicContext {
        PadicContext::new(5, 4).unwrap()
    }

    /// Fraction-free integer determinant; independent of the p-adic route.
    fn bareiss(mut a: Vec<Vec<i128>>) -> i128 {
        let n = a.len();
        let mut sign = 1;
        let mut prev = 1i128;
        for k in 0..n {
            if a[k][k] == 0 {
                match (k + 1..n).find(|&i| a[i][k] != 0) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
                }
            }
            prev = a[k][k];
        }
        sign * a[n - 1][n - 1]
    }

    #[test]
    fn det_matches_integer_oracle() {
        let k = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..6 {
            for _ in 0..40 {
                let a: Vec<Vec<i128>> = (0..n)
                    .map(|_| (0..n).map(|_| rng.gen_range(-12..=12)).collect())
                    .collect();
                let m = Matrix::from_fn(k, n, n, |i, j| a[i][j]);
                let expect = k.reduce(bareiss(a.clone()));
                match m.det() {
                    Ok(d) => assert_eq!(d, expect),
                    Err(Error::PrecisionExhausted { .. }) => assert!(expect.is_zero()),
                    Err(e) => panic!("{e}"),
                }
                assert_eq!(m.has_unit_det(), expect.is_unit());
            }
        }
    }

    #[test]
    fn singular_column_exhausts_precision() {
        let m = Matrix::from_fn(ctx(), 2, 2, |i, _| i as i128 * 625);
        assert_eq!(m.det(), Err(Error::PrecisionExhausted { column: 0 }));
    }

    #[test]
    fn solve_inverts() {
        let k = ctx();
        let m = Matrix::from_fn(k, 3, 3, |i, j| if i == j { 2 } else { (i + 2 * j) as i128 * 5 });
        let rhs = vec![k.reduce(1), k.reduce(-4), k.reduce(9)];
        let x = m.solve(&rhs).unwrap();
        for i in 0..3 {
            let s = (0..3).fold(k.zero(), |acc, j| acc + m.get(i, j) * x[j]);
            assert_eq!(s, rhs[i]);
        }
        let sing = Matrix::from_fn(k, 2, 2, |_, _| 5);
        assert_eq!(sing.solve(&[k.one(), k.one()]), Err(Error::NotAUnit));
    }

    fn howell(gens: &[Vec<u64>], dim: usize) -> HowellForm {
        let mut h = HowellForm::new(ctx(), dim);
        for g in gens {
            h.insert(g);
        }
        h.canonicalize();
        h
    }

    #[test]
    fn howell_of_p_times_unit_vector() {
        // (5, 0) and (0, 1) vs (5, 1) and its multiples
        let a = howell(&[vec![5, 0], vec![0, 1]], 2);
        let b = howell(&[vec![5, 1], vec![0, 7]], 2);
        assert_eq!(a, b);
        assert_eq!(a.rank_profile(), vec![(0, 1), (1, 0)]);
        // annihilator closure: (25, 5) * 25 = (0, 125) must be spanned
        let c = howell(&[vec![25, 5]], 2);
        assert!(c.contains(&[0, 125]));
        assert!(!c.contains(&[0, 25]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn howell_is_order_independent(seed in any::<u64>()) {
            let k = ctx();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dim = rng.gen_range(1..6);
            let count = rng.gen_range(1..6);
            let gens: Vec<Vec<u64>> = (0..count)
                .map(|_| (0..dim).map(|_| {
                    let v: u64 = rng.gen_range(0..k.modulus());
                    v * 5u64.pow(rng.gen_range(0..3)) % k.modulus()
                }).collect())
                .collect();
            let a = howell(&gens, dim);
            let mut shuffled = gens.clone();
            shuffled.reverse();
            // add a redundant combination and unit rescalings
            let combo: Vec<u64> = (0..dim).map(|j| (gens.iter().map(|g| g[j]).sum::<u64>() * 3) % k.modulus()).collect();
            shuffled.push(combo);
            for g in shuffled.iter_mut() {
                for x in g.iter_mut() { *x = *x * 7 % k.modulus(); }
            }
            let b = howell(&shuffled, dim);
            prop_assert_eq!(a.rows(), b.rows());
            for g in &gens {
                prop_assert!(a.contains(g));
            }
        }
    }
}
