//! Finite abelian groups given as explicit products of cyclic groups.
//!
//! Elements are exponent vectors `(e_1, ..., e_k)` with `0 <= e_i < d_i`,
//! enumerated lexicographically (last coordinate fastest). The position of an
//! element in that enumeration is its *index*, which is what group-ring
//! coefficient vectors are keyed by.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// `Z/d_1 x ... x Z/d_k`. Factors of order 1 are allowed and keep tower
/// levels coordinate-aligned.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    factors: Vec<u64>,
    strides: Vec<usize>,
    order: usize,
}

impl FiniteAbelianGroup {
    pub fn new(factors: Vec<u64>) -> Result<Self> {
        if factors.contains(&0) {
            return Err(Error::BadGroup("cyclic factors must have order >= 1".into()));
        }
        let mut order: usize = 1;
        for &d in &factors {
            order = order
                .checked_mul(d as usize)
                .filter(|&o| o <= 1 << 24)
                .ok_or_else(|| Error::BadGroup(format!("group {factors:?} is too large")))?;
        }
        let mut strides = vec![1; factors.len()];
        for i in (0..factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * factors[i + 1] as usize;
        }
        Ok(FiniteAbelianGroup {
            factors,
            strides,
            order,
        })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup::new(Vec::new()).unwrap()
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        FiniteAbelianGroup::new(vec![n])
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    /// Index of an exponent vector; exponents are reduced first.
    pub fn index_of(&self, exps: &[u64]) -> usize {
        assert_eq!(exps.len(), self.factors.len(), "exponent vector has wrong length");
        exps.iter()
            .zip(&self.factors)
            .zip(&self.strides)
            .map(|((&e, &d), &s)| (e % d) as usize * s)
            .sum()
    }

    /// Same as [`Self::index_of`] for signed exponents.
    pub fn index_of_signed(&self, exps: &[i64]) -> usize {
        assert_eq!(exps.len(), self.factors.len());
        exps.iter()
            .zip(&self.factors)
            .zip(&self.strides)
            .map(|((&e, &d), &s)| e.rem_euclid(d as i64) as usize * s)
            .sum()
    }

    pub fn exps(&self, mut index: usize) -> Vec<u64> {
        let mut out = vec![0; self.factors.len()];
        for (i, &s) in self.strides.iter().enumerate() {
            out[i] = (index / s) as u64;
            index %= s;
        }
        out
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let mut out = 0;
        let (mut a, mut b) = (a, b);
        for (&d, &s) in self.factors.iter().zip(&self.strides) {
            let (ea, eb) = (a / s, b / s);
            a %= s;
            b %= s;
            out += (ea + eb) % d as usize * s;
        }
        out
    }

    pub fn neg(&self, a: usize) -> usize {
        let mut out = 0;
        let mut a = a;
        for (&d, &s) in self.factors.iter().zip(&self.strides) {
            let e = a / s;
            a %= s;
            out += (d as usize - e) % d as usize * s;
        }
        out
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// `k * a`.
    pub fn scale(&self, a: usize, k: u64) -> usize {
        let e: Vec<u64> = self
            .exps(a)
            .iter()
            .zip(&self.factors)
            .map(|(&x, &d)| ((x as u128 * k as u128) % d as u128) as u64)
            .collect();
        self.index_of(&e)
    }

    pub fn element_order(&self, a: usize) -> u64 {
        self.exps(a)
            .iter()
            .zip(&self.factors)
            .map(|(&e, &d)| d / gcd(e, d))
            .fold(1, lcm)
    }

    /// Fills `out[j] = shift + j` for every index `j`, walking the group once.
    pub(crate) fn translation(&self, shift: usize, out: &mut Vec<usize>) {
        out.clear();
        out.reserve(self.order);
        let k = self.factors.len();
        if k == 0 {
            out.push(0);
            return;
        }
        let sh = self.exps(shift);
        let mut digits = vec![0u64; k];
        let mut cur: Vec<usize> = (0..k)
            .map(|i| (sh[i] % self.factors[i]) as usize * self.strides[i])
            .collect();
        let mut total: usize = cur.iter().sum();
        for _ in 0..self.order {
            out.push(total);
            // odometer step on the last coordinate with carry
            let mut i = k - 1;
            loop {
                digits[i] += 1;
                let d = self.factors[i];
                if digits[i] == d {
                    digits[i] = 0;
                }
                total -= cur[i];
                cur[i] = ((sh[i] + digits[i]) % d) as usize * self.strides[i];
                total += cur[i];
                if digits[i] != 0 || i == 0 {
                    break;
                }
                i -= 1;
            }
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.order
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.factors.iter().map(|d| format!("Z/{d}")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// A homomorphism given by the images of the standard generators.
#[derive(Clone, Debug)]
pub struct GroupHom {
    source: Arc<FiniteAbelianGroup>,
    target: Arc<FiniteAbelianGroup>,
    images: Vec<Vec<u64>>,
    table: Vec<usize>,
    image_size: usize,
}

impl GroupHom {
    /// `images[i]` is the exponent vector of the image of the `i`-th
    /// standard generator of `source`.
    pub fn new(
        source: Arc<FiniteAbelianGroup>,
        target: Arc<FiniteAbelianGroup>,
        images: Vec<Vec<u64>>,
    ) -> Result<Self> {
        if images.len() != source.rank() {
            return Err(Error::BadHom(format!(
                "expected {} generator images, got {}",
                source.rank(),
                images.len()
            )));
        }
        let image_idx: Vec<usize> = images
            .iter()
            .map(|e| {
                if e.len() != target.rank() {
                    Err(Error::BadHom("image has wrong length".into()))
                } else {
                    Ok(target.index_of(e))
                }
            })
            .collect::<Result<_>>()?;
        for (i, &d) in source.factors().iter().enumerate() {
            if target.scale(image_idx[i], d) != 0 {
                return Err(Error::BadHom(format!(
                    "generator {i} has order {d} but its image does not"
                )));
            }
        }
        let mut table = vec![0; source.order()];
        for (s, slot) in table.iter_mut().enumerate() {
            let e = source.exps(s);
            let mut t = 0;
            for (i, &k) in e.iter().enumerate() {
                if k != 0 {
                    t = target.add(t, target.scale(image_idx[i], k));
                }
            }
            *slot = t;
        }
        let image_size = table.iter().collect::<HashSet<_>>().len();
        Ok(GroupHom {
            source,
            target,
            images,
            table,
            image_size,
        })
    }

    /// Coordinatewise reduction `Z/d_i -> Z/d'_i`; needs `d'_i | d_i`.
    pub fn reduction(source: Arc<FiniteAbelianGroup>, target: Arc<FiniteAbelianGroup>) -> Result<Self> {
        if source.rank() != target.rank() {
            return Err(Error::BadHom("reduction needs equal ranks".into()));
        }
        for (d, t) in source.factors().iter().zip(target.factors()) {
            if d % t != 0 {
                return Err(Error::BadHom(format!("Z/{d} does not reduce onto Z/{t}")));
            }
        }
        let images = (0..source.rank())
            .map(|i| {
                let mut e = vec![0; target.rank()];
                e[i] = 1;
                e
            })
            .collect();
        GroupHom::new(source, target, images)
    }

    pub fn identity(g: Arc<FiniteAbelianGroup>) -> Self {
        GroupHom::reduction(g.clone(), g).expect("identity is a reduction")
    }

    pub fn source(&self) -> &Arc<FiniteAbelianGroup> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteAbelianGroup> {
        &self.target
    }

    pub fn images(&self) -> &[Vec<u64>] {
        &self.images
    }

    pub fn apply(&self, s: usize) -> usize {
        self.table[s]
    }

    pub fn is_surjective(&self) -> bool {
        self.image_size == self.target.order()
    }

    pub fn kernel_order(&self) -> usize {
        self.source.order() / self.image_size
    }

    /// Kernel elements, as source indices.
    pub fn kernel(&self) -> Vec<usize> {
        (0..self.source.order()).filter(|&s| self.table[s] == 0).collect()
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &GroupHom) -> Result<GroupHom> {
        if *self.target != *next.source {
            return Err(Error::GroupMismatch);
        }
        let images = self
            .images
            .iter()
            .map(|e| {
                let t = next.apply(self.target.index_of(e));
                next.target.exps(t)
            })
            .collect();
        GroupHom::new(self.source.clone(), next.target.clone(), images)
    }

    /// Whether both maps agree on every element.
    pub fn same_map(&self, other: &GroupHom) -> bool {
        *self.source == *other.source && *self.target == *other.target && self.table == other.table
    }
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_lexicographic() {
        let g = FiniteAbelianGroup::new(vec![3, 2]).unwrap();
        let all: Vec<Vec<u64>> = g.elements().map(|i| g.exps(i)).collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1], vec![2, 0], vec![2, 1]]);
        for i in g.elements() {
            assert_eq!(g.index_of(&g.exps(i)), i);
        }
    }

    #[test]
    fn arithmetic() {
        let g = FiniteAbelianGroup::new(vec![5, 4, 1]).unwrap();
        let a = g.index_of(&[3, 1, 0]);
        let b = g.index_of(&[4, 3, 0]);
        assert_eq!(g.exps(g.add(a, b)), vec![2, 0, 0]);
        assert_eq!(g.add(a, g.neg(a)), 0);
        assert_eq!(g.element_order(a), 20);
        assert_eq!(g.exps(g.scale(a, 7)), vec![1, 3, 0]);
    }

    #[test]
    fn translation_matches_add() {
        let g = FiniteAbelianGroup::new(vec![4, 1, 3, 5]).unwrap();
        let mut buf = Vec::new();
        for s in g.elements() {
            g.translation(s, &mut buf);
            for j in g.elements() {
                assert_eq!(buf[j], g.add(s, j));
            }
        }
        let t = FiniteAbelianGroup::trivial();
        t.translation(0, &mut buf);
        assert_eq!(buf, vec![0]);
    }

    #[test]
    fn reductions_and_kernels() {
        let big = Arc::new(FiniteAbelianGroup::new(vec![25, 4]).unwrap());
        let small = Arc::new(FiniteAbelianGroup::new(vec![5, 4]).unwrap());
        let r = GroupHom::reduction(big.clone(), small.clone()).unwrap();
        assert!(r.is_surjective());
        assert_eq!(r.kernel_order(), 5);
        assert!(GroupHom::reduction(small, big.clone()).is_err());

        // not well defined: generator of Z/4 sent to an element of order 5
        let z5 = Arc::new(FiniteAbelianGroup::cyclic(5).unwrap());
        assert!(GroupHom::new(big, z5, vec![vec![1], vec![1]]).is_err());
    }

    #[test]
    fn composition_is_path_independent() {
        let g = |f: Vec<u64>| Arc::new(FiniteAbelianGroup::new(f).unwrap());
        let top = g(vec![25, 25]);
        let left = g(vec![5, 25]);
        let right = g(vec![25, 5]);
        let bottom = g(vec![5, 5]);
        let a = GroupHom::reduction(top.clone(), left.clone())
            .unwrap()
            .then(&GroupHom::reduction(left, bottom.clone()).unwrap())
            .unwrap();
        let b = GroupHom::reduction(top, right.clone())
            .unwrap()
            .then(&GroupHom::reduction(right, bottom).unwrap())
            .unwrap();
        assert!(a.same_map(&b));
    }
}
