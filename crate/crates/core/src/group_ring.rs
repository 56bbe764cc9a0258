//! Group rings `Z/p^N[G]` over explicit finite abelian groups.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{gcd, FiniteAbelianGroup, GroupHom};
use crate::linalg::Matrix;
use crate::padic::{primitive_root, teichmuller, PadicContext, PadicInt};

/// A dense element `sum_g c_g [g]` of `Z/p^N[G]`, coefficients indexed by
/// group index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupRingElement {
    group: Arc<FiniteAbelianGroup>,
    ctx: PadicContext,
    coeffs: Vec<u64>,
}

impl GroupRingElement {
    pub fn zero(group: Arc<FiniteAbelianGroup>, ctx: PadicContext) -> Self {
        let n = group.order();
        GroupRingElement {
            group,
            ctx,
            coeffs: vec![0; n],
        }
    }

    pub fn one(group: Arc<FiniteAbelianGroup>, ctx: PadicContext) -> Self {
        Self::scalar(group, ctx.one())
    }

    pub fn scalar(group: Arc<FiniteAbelianGroup>, c: PadicInt) -> Self {
        let mut x = Self::zero(group, c.ctx());
        x.coeffs[0] = c.value();
        x
    }

    /// The basis element `[g]`.
    pub fn delta(group: Arc<FiniteAbelianGroup>, ctx: PadicContext, g: usize) -> Self {
        let mut x = Self::zero(group, ctx);
        x.coeffs[g] = 1 % ctx.modulus();
        x
    }

    pub fn delta_exps(group: Arc<FiniteAbelianGroup>, ctx: PadicContext, exps: &[u64]) -> Self {
        let g = group.index_of(exps);
        Self::delta(group, ctx, g)
    }

    pub fn from_fn(
        group: Arc<FiniteAbelianGroup>,
        ctx: PadicContext,
        mut f: impl FnMut(usize) -> i128,
    ) -> Self {
        let coeffs = (0..group.order()).map(|g| ctx.reduce(f(g)).value()).collect();
        GroupRingElement { group, ctx, coeffs }
    }

    pub(crate) fn from_raw(group: Arc<FiniteAbelianGroup>, ctx: PadicContext, coeffs: Vec<u64>) -> Self {
        debug_assert_eq!(coeffs.len(), group.order());
        GroupRingElement { group, ctx, coeffs }
    }

    pub fn group(&self) -> &Arc<FiniteAbelianGroup> {
        &self.group
    }

    pub fn ctx(&self) -> PadicContext {
        self.ctx
    }

    pub fn coeff(&self, g: usize) -> PadicInt {
        PadicInt::from_raw(self.ctx, self.coeffs[g])
    }

    pub fn set_coeff(&mut self, g: usize, c: PadicInt) {
        assert_eq!(c.ctx(), self.ctx, "coefficient context mismatch");
        self.coeffs[g] = c.value();
    }

    pub(crate) fn raw(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Nonzero terms as `(index, coefficient)` in index order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, PadicInt)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(g, &c)| (g, PadicInt::from_raw(self.ctx, c)))
    }

    pub fn support_size(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0).count()
    }

    pub fn augmentation(&self) -> PadicInt {
        let k = self.ctx;
        PadicInt::from_raw(k, self.coeffs.iter().fold(0, |acc, &c| k.add_raw(acc, c)))
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        if *self.group != *other.group {
            return Err(Error::GroupMismatch);
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let k = self.ctx;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| k.add_raw(a, b))
            .collect();
        Ok(Self::from_raw(self.group.clone(), k, coeffs))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let k = self.ctx;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| k.sub_raw(a, b))
            .collect();
        Ok(Self::from_raw(self.group.clone(), k, coeffs))
    }

    /// Convolution. Loops over the sparser operand's support.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let (sparse, dense) = if self.support_size() <= other.support_size() {
            (self, other)
        } else {
            (other, self)
        };
        let k = self.ctx;
        let g = &self.group;
        let mut out = vec![0u64; g.order()];
        let mut shift = Vec::new();
        for (s, c) in sparse.coeffs.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            g.translation(s, &mut shift);
            for (j, &d) in dense.coeffs.iter().enumerate() {
                if d != 0 {
                    let t = shift[j];
                    out[t] = k.add_raw(out[t], k.mul_raw(*c, d));
                }
            }
        }
        Ok(Self::from_raw(g.clone(), k, out))
    }

    pub fn scale(&self, c: &PadicInt) -> Self {
        assert_eq!(c.ctx(), self.ctx, "scalar context mismatch");
        let k = self.ctx;
        let coeffs = self.coeffs.iter().map(|&a| k.mul_raw(a, c.value())).collect();
        Self::from_raw(self.group.clone(), k, coeffs)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.group.clone(), self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `[g] -> [-g]`.
    pub fn involution(&self) -> Self {
        let g = &self.group;
        let mut out = vec![0; g.order()];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[g.neg(i)] = c;
        }
        Self::from_raw(g.clone(), self.ctx, out)
    }

    /// Reduces every coefficient into a coarser precision.
    pub fn truncate(&self, ctx: PadicContext) -> Result<Self> {
        if ctx.p() != self.ctx.p() || ctx.prec() > self.ctx.prec() {
            return Err(Error::ContextMismatch);
        }
        let m = ctx.modulus();
        let coeffs = self.coeffs.iter().map(|&c| c % m).collect();
        Ok(Self::from_raw(self.group.clone(), ctx, coeffs))
    }

    /// Moves coefficients to the element of `target` with the same exponent
    /// vector (reduced into `target`). A set-theoretic section when the
    /// factors of `target` are multiples of those of `self`.
    pub fn lift_exponents(&self, target: &Arc<FiniteAbelianGroup>) -> Result<Self> {
        if target.rank() != self.group.rank() {
            return Err(Error::GroupMismatch);
        }
        let k = self.ctx;
        let mut out = vec![0; target.order()];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                let t = target.index_of(&self.group.exps(i));
                out[t] = k.add_raw(out[t], c);
            }
        }
        Ok(Self::from_raw(target.clone(), k, out))
    }

    /// Matrix of `y -> self * y` in the basis of group elements:
    /// entry `(i, j)` is the coefficient of `i - j`.
    pub fn regular_matrix(&self) -> Matrix {
        let g = &self.group;
        let n = g.order();
        let mut m = Matrix::zeros(self.ctx, n, n);
        let mut shift = Vec::new();
        for j in 0..n {
            g.translation(j, &mut shift);
            for (h, &c) in self.coeffs.iter().enumerate() {
                if c != 0 {
                    m.set_raw(shift[h], j, c);
                }
            }
        }
        m
    }

    pub fn det_multiplication(&self) -> Result<PadicInt> {
        self.regular_matrix().det()
    }

    /// Whether `self` is invertible.
    ///
    /// Decided by the regular-representation determinant of the image in
    /// the group ring of the prime-to-p quotient: the kernel of
    /// `F_p[G] -> F_p[G_p']` is nilpotent, so units are detected there.
    pub fn is_unit(&self) -> bool {
        let q = prime_to_p_quotient(&self.group, self.ctx.p());
        let image = norm_push(&q, self).expect("quotient map matches group");
        image.regular_matrix().has_unit_det()
    }

    /// Two-sided inverse modulo `p^N`.
    ///
    /// Small groups solve the regular system directly. Larger ones invert
    /// modulo `p` through `x^(p^k)`, which lives on the prime-to-p part,
    /// then lift by Newton iteration.
    pub fn invert_element(&self) -> Result<Self> {
        let g = self.group.clone();
        let k = self.ctx;
        if self.coeffs[1..].iter().all(|&c| c == 0) {
            return Ok(Self::scalar(g, self.coeff(0).invert()?));
        }
        if g.order() <= 256 {
            let m = self.regular_matrix();
            let mut rhs = vec![k.zero(); g.order()];
            rhs[0] = k.one();
            let y = m.solve(&rhs)?;
            let coeffs = y.iter().map(|c| c.value()).collect();
            return Ok(Self::from_raw(g, k, coeffs));
        }
        let k1 = PadicContext::new(k.p(), 1)?;
        let x1 = self.truncate(k1)?;
        let e = p_exponent(&g, k.p());
        let z = x1.pow(e);
        let zinv = invert_on_prime_to_p(&z)?;
        let y1 = &x1.pow(e - 1) * &zinv;
        let mut y = Self::from_raw(g.clone(), k, y1.coeffs);
        let two = Self::scalar(g, k.reduce(2));
        let mut prec = 1;
        while prec < k.prec() {
            y = &y * &(&two - &(self * &y));
            prec *= 2;
        }
        if !(self * &y).is_one() {
            return Err(Error::NotAUnit);
        }
        Ok(y)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 % self.ctx.modulus() && self.coeffs[1..].iter().all(|&c| c == 0)
    }
}

/// Largest p-power order among the cyclic factors; `x^e` for that `e`
/// kills the p-part in characteristic `p`.
fn p_exponent(g: &FiniteAbelianGroup, p: u64) -> u64 {
    g.factors()
        .iter()
        .map(|&d| {
            let mut e = 1;
            let mut d = d;
            while d % p == 0 {
                d /= p;
                e *= p;
            }
            e
        })
        .max()
        .unwrap_or(1)
}

/// Inverts an element supported on the prime-to-p subgroup.
fn invert_on_prime_to_p(z: &GroupRingElement) -> Result<GroupRingElement> {
    let g = z.group();
    let p = z.ctx().p();
    let sub: Vec<usize> = g.elements().filter(|&h| !g.element_order(h).is_multiple_of(p)).collect();
    let pos = |h: usize| sub.binary_search(&h).ok();
    let n = sub.len();
    let k = z.ctx();
    let mut m = Matrix::zeros(k, n, n);
    for (j, &hj) in sub.iter().enumerate() {
        for (i, &hi) in sub.iter().enumerate() {
            m.set_raw(i, j, z.coeffs[g.sub(hi, hj)]);
        }
    }
    debug_assert!(z.terms().all(|(h, _)| pos(h).is_some()));
    let mut rhs = vec![k.zero(); n];
    rhs[0] = k.one();
    let y = m.solve(&rhs)?;
    let mut out = vec![0; g.order()];
    for (i, &h) in sub.iter().enumerate() {
        out[h] = y[i].value();
    }
    Ok(GroupRingElement::from_raw(g.clone(), k, out))
}

/// Reduction of each cyclic factor onto its prime-to-p part.
pub fn prime_to_p_quotient(g: &Arc<FiniteAbelianGroup>, p: u64) -> GroupHom {
    let factors = g
        .factors()
        .iter()
        .map(|&d| {
            let mut d = d;
            while d % p == 0 {
                d /= p;
            }
            d
        })
        .collect();
    let q = Arc::new(FiniteAbelianGroup::new(factors).expect("quotient of a valid group"));
    GroupHom::reduction(g.clone(), q).expect("prime-to-p parts divide")
}

/// Pushes `x` forward along `phi`, summing coefficients over fibres.
pub fn norm_push(phi: &GroupHom, x: &GroupRingElement) -> Result<GroupRingElement> {
    if **phi.source() != *x.group {
        return Err(Error::GroupMismatch);
    }
    let k = x.ctx;
    let mut out = vec![0; phi.target().order()];
    for (s, &c) in x.coeffs.iter().enumerate() {
        if c != 0 {
            let t = phi.apply(s);
            out[t] = k.add_raw(out[t], c);
        }
    }
    Ok(GroupRingElement::from_raw(phi.target().clone(), k, out))
}

/// Pulls `x` back along a surjection: every preimage of `t` gets the
/// coefficient of `t`.
pub fn trace_lift(phi: &GroupHom, x: &GroupRingElement) -> Result<GroupRingElement> {
    if **phi.target() != *x.group {
        return Err(Error::GroupMismatch);
    }
    if !phi.is_surjective() {
        return Err(Error::NotSurjective);
    }
    let coeffs = (0..phi.source().order())
        .map(|s| x.coeffs[phi.apply(s)])
        .collect();
    Ok(GroupRingElement::from_raw(phi.source().clone(), x.ctx, coeffs))
}

/// A character of a finite abelian group with values in `Z_p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Character {
    Trivial,
    /// The `i`-th generator of `Z/d_i` goes to `exp(2 pi i c_i / d_i)`.
    Exponents(Vec<u64>),
}

impl Character {
    /// Order of the character and, per generator, the exponent of a fixed
    /// primitive root of unity of that order.
    fn normalized(&self, g: &FiniteAbelianGroup) -> Result<(u64, Vec<u64>)> {
        let cs = match self {
            Character::Trivial => vec![0; g.rank()],
            Character::Exponents(cs) => {
                if cs.len() != g.rank() {
                    return Err(Error::Invalid("character has wrong number of exponents".into()));
                }
                cs.clone()
            }
        };
        let mut order = 1;
        for (&c, &d) in cs.iter().zip(g.factors()) {
            let o = d / gcd(c % d, d);
            order = order / gcd(order, o) * o;
        }
        let scaled = cs
            .iter()
            .zip(g.factors())
            .map(|(&c, &d)| {
                let c = c % d;
                let h = gcd(c, d);
                (c / h) * (order / (d / h))
            })
            .collect();
        Ok((order, scaled))
    }

    /// `eta(g)` as a root of unity in `Z/p^N`.
    pub fn value(&self, g: &FiniteAbelianGroup, ctx: PadicContext, h: usize) -> Result<PadicInt> {
        let (order, scaled) = self.normalized(g)?;
        let p = ctx.p();
        if !(p - 1).is_multiple_of(order) {
            return Err(Error::CharacterValueNotInBaseField(format!(
                "character of order {order} needs roots of unity outside Z_{p}"
            )));
        }
        let zeta = teichmuller(ctx, primitive_root(p)).pow((p - 1) / order);
        let e: u64 = g
            .exps(h)
            .iter()
            .zip(&scaled)
            .map(|(&x, &s)| x * s % order)
            .sum::<u64>()
            % order;
        Ok(zeta.pow(e))
    }
}

/// `e_eta = |G|^{-1} sum_g eta(g)^{-1} [g]`.
pub fn idempotent(
    group: &Arc<FiniteAbelianGroup>,
    eta: &Character,
    ctx: PadicContext,
) -> Result<GroupRingElement> {
    let n = group.order() as u64;
    if n.is_multiple_of(ctx.p()) {
        return Err(Error::OrderNotCoprime { order: n, p: ctx.p() });
    }
    let inv_n = ctx.reduce(n as i128).invert()?;
    let mut out = GroupRingElement::zero(group.clone(), ctx);
    for h in group.elements() {
        let v = eta.value(group, ctx, h)?.invert()? * inv_n;
        out.set_coeff(h, v);
    }
    Ok(out)
}

/// `[p^n gamma] - 1`.
pub fn omega(group: &Arc<FiniteAbelianGroup>, ctx: PadicContext, n: u32, gamma: usize) -> GroupRingElement {
    let t = group.scale(gamma, ctx.p().pow(n));
    let mut x = GroupRingElement::delta(group.clone(), ctx, t);
    x.coeffs[0] = ctx.sub_raw(x.coeffs[0], 1 % ctx.modulus());
    x
}

/// `sum_{k<p} [k p^(n-1) gamma]` for `n >= 1`, and `[gamma]` for `n = 0`.
pub fn phi(group: &Arc<FiniteAbelianGroup>, ctx: PadicContext, n: u32, gamma: usize) -> GroupRingElement {
    if n == 0 {
        return GroupRingElement::delta(group.clone(), ctx, gamma);
    }
    let p = ctx.p();
    let step = group.scale(gamma, p.pow(n - 1));
    let mut x = GroupRingElement::zero(group.clone(), ctx);
    let mut g = 0;
    for _ in 0..p {
        x.coeffs[g] = ctx.add_raw(x.coeffs[g], 1 % ctx.modulus());
        g = group.add(g, step);
    }
    x
}

macro_rules! binop {
    ($tr:ident, $f:ident, $try:ident) => {
        impl $tr<&GroupRingElement> for &GroupRingElement {
            type Output = GroupRingElement;
            fn $f(self, rhs: &GroupRingElement) -> GroupRingElement {
                self.$try(rhs).expect("group ring operands must match")
            }
        }
        impl $tr for GroupRingElement {
            type Output = GroupRingElement;
            fn $f(self, rhs: GroupRingElement) -> GroupRingElement {
                (&self).$try(&rhs).expect("group ring operands must match")
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Neg for &GroupRingElement {
    type Output = GroupRingElement;
    fn neg(self) -> GroupRingElement {
        let k = self.ctx;
        let coeffs = self.coeffs.iter().map(|&c| k.neg_raw(c)).collect();
        GroupRingElement::from_raw(self.group.clone(), k, coeffs)
    }
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .terms()
            .map(|(g, c)| format!("{}*{:?}", c.value(), self.group.exps(g)))
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct WireTerm {
    exp: Vec<u64>,
    val: String,
}

#[derive(Serialize, Deserialize)]
struct WireElement {
    group: Vec<u64>,
    p: u64,
    #[serde(rename = "N")]
    n: u32,
    coeffs: Vec<WireTerm>,
}

impl Serialize for GroupRingElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WireElement {
            group: self.group.factors().to_vec(),
            p: self.ctx.p(),
            n: self.ctx.prec(),
            coeffs: self
                .terms()
                .map(|(g, c)| WireTerm {
                    exp: self.group.exps(g),
                    val: c.value().to_string(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupRingElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = WireElement::deserialize(d)?;
        let ctx = PadicContext::new(w.p, w.n).map_err(D::Error::custom)?;
        let group = Arc::new(FiniteAbelianGroup::new(w.group).map_err(D::Error::custom)?);
        let mut x = GroupRingElement::zero(group.clone(), ctx);
        for t in w.coeffs {
            if t.exp.len() != group.rank() || t.exp.iter().zip(group.factors()).any(|(e, d)| e >= d) {
                return Err(D::Error::custom(format!("exponent {:?} is not in the group", t.exp)));
            }
            let v: i128 = t.val.trim().parse().map_err(D::Error::custom)?;
            let g = group.index_of(&t.exp);
            x.coeffs[g] = ctx.add_raw(x.coeffs[g], ctx.reduce(v).value());
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grp(f: &[u64]) -> Arc<FiniteAbelianGroup> {
        Arc::new(FiniteAbelianGroup::new(f.to_vec()).unwrap())
    }

    fn ctx(n: u32) -> PadicContext {
        PadicContext::new(5, n).unwrap()
    }

    fn random(g: &Arc<FiniteAbelianGroup>, k: PadicContext, rng: &mut ChaCha8Rng) -> GroupRingElement {
        let m = k.modulus();
        GroupRingElement::from_fn(g.clone(), k, |_| rng.gen_range(0..m) as i128)
    }

    #[test]
    fn ring_examples() {
        let g = grp(&[5, 2]);
        let k = ctx(3);
        let a = g.index_of(&[2, 1]);
        let b = g.index_of(&[4, 1]);
        let da = GroupRingElement::delta(g.clone(), k, a);
        let db = GroupRingElement::delta(g.clone(), k, b);
        assert_eq!(&da * &db, GroupRingElement::delta(g.clone(), k, g.add(a, b)));
        let one = GroupRingElement::one(g.clone(), k);
        assert_eq!(&da * &one, da);
        let lhs = &(&da + &db) * &da;
        let rhs = &GroupRingElement::delta(g.clone(), k, g.add(a, a)) + &GroupRingElement::delta(g.clone(), k, g.add(a, b));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn mismatches_are_errors() {
        let x = GroupRingElement::one(grp(&[5]), ctx(2));
        let y = GroupRingElement::one(grp(&[25]), ctx(2));
        let z = GroupRingElement::one(grp(&[5]), ctx(3));
        assert_eq!(x.try_mul(&y), Err(Error::GroupMismatch));
        assert_eq!(x.try_add(&z), Err(Error::ContextMismatch));
    }

    #[test]
    fn norm_and_trace_examples() {
        let k = ctx(4);
        let big = grp(&[25]);
        let small = grp(&[5]);
        let r = GroupHom::reduction(big.clone(), small.clone()).unwrap();
        let x = GroupRingElement::delta(big.clone(), k, 7);
        assert_eq!(norm_push(&r, &x).unwrap(), GroupRingElement::delta(small.clone(), k, 2));

        let kernel_sum = GroupRingElement::from_fn(big.clone(), k, |g| (g % 5 == 0) as i128);
        assert_eq!(
            norm_push(&r, &kernel_sum).unwrap(),
            GroupRingElement::scalar(small.clone(), k.reduce(5))
        );

        let triv = grp(&[]);
        let z5 = grp(&[5]);
        let t = GroupHom::reduction(z5.clone(), grp(&[1])).unwrap();
        let one = GroupRingElement::one(t.target().clone(), k);
        assert_eq!(trace_lift(&t, &one).unwrap(), GroupRingElement::from_fn(z5, k, |_| 1));
        assert_eq!(triv.order(), 1);

        let zero = GroupRingElement::zero(small.clone(), k);
        assert!(trace_lift(&r, &zero).unwrap().is_zero());

        let z5b = grp(&[5]);
        let inj = GroupHom::new(grp(&[1]), z5b, vec![vec![0]]).unwrap();
        let y = GroupRingElement::one(grp(&[5]), k);
        assert_eq!(trace_lift(&inj, &y), Err(Error::NotSurjective));
    }

    #[test]
    fn degree_law_and_phi_trace_on_cyclic_steps() {
        let k = ctx(5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=3u32 {
            let big = grp(&[5u64.pow(n), 2]);
            let small = grp(&[5u64.pow(n - 1), 2]);
            let r = GroupHom::reduction(big.clone(), small.clone()).unwrap();
            for _ in 0..10 {
                let y = random(&small, k, &mut rng);
                let back = norm_push(&r, &trace_lift(&r, &y).unwrap()).unwrap();
                assert_eq!(back, y.scale(&k.reduce(r.kernel_order() as i128)));
                let gamma = big.index_of(&[1, 0]);
                let lifted = y.lift_exponents(&big).unwrap();
                assert_eq!(trace_lift(&r, &y).unwrap(), &phi(&big, k, n, gamma) * &lifted);
            }
        }
    }

    #[test]
    fn involution_examples() {
        let g = grp(&[25, 4]);
        let k = ctx(3);
        let a = g.index_of(&[3, 1]);
        let x = GroupRingElement::delta(g.clone(), k, a);
        assert_eq!(x.involution(), GroupRingElement::delta(g.clone(), k, g.neg(a)));
        let one = GroupRingElement::one(g, k);
        assert_eq!(one.involution(), one);
    }

    #[test]
    fn idempotent_examples() {
        let k = ctx(2);
        let d = grp(&[2]);
        let e = idempotent(&d, &Character::Trivial, k).unwrap();
        assert_eq!(e.coeff(0).value(), 13);
        assert_eq!(e.coeff(1).value(), 13);
        assert_eq!(&e * &e, e);
        let s = GroupRingElement::delta(d.clone(), k, 1);
        assert_eq!(&s * &e, e);

        let k = ctx(6);
        for f in [vec![4], vec![2, 2], vec![4, 2]] {
            let d = grp(&f);
            for c in [Character::Trivial, Character::Exponents(vec![1; f.len()])] {
                let e = idempotent(&d, &c, k).unwrap();
                assert_eq!(&e * &e, e, "{f:?} {c:?}");
                for h in d.elements() {
                    let dh = GroupRingElement::delta(d.clone(), k, h);
                    let v = c.value(&d, k, h).unwrap();
                    assert_eq!(&dh * &e, e.scale(&v));
                }
            }
        }
    }

    #[test]
    fn idempotent_errors() {
        let k = ctx(2);
        assert_eq!(
            idempotent(&grp(&[5]), &Character::Trivial, k),
            Err(Error::OrderNotCoprime { order: 5, p: 5 })
        );
        assert!(matches!(
            idempotent(&grp(&[3]), &Character::Exponents(vec![1]), k),
            Err(Error::CharacterValueNotInBaseField(_))
        ));
    }

    #[test]
    fn omega_and_phi() {
        let k = ctx(4);
        let g = grp(&[125]);
        let gamma = 1;
        let mut x = GroupRingElement::delta(g.clone(), k, gamma);
        x = &x - &GroupRingElement::one(g.clone(), k);
        assert_eq!(omega(&g, k, 0, gamma), x);
        let z5 = grp(&[5]);
        assert!(omega(&z5, k, 1, 1).is_zero());
        for n in 1..=3 {
            assert_eq!(omega(&g, k, n, gamma), &omega(&g, k, n - 1, gamma) * &phi(&g, k, n, gamma));
            assert_eq!(phi(&g, k, n, gamma).augmentation().value(), 5);
        }
        assert_eq!(phi(&g, k, 0, gamma), GroupRingElement::delta(g.clone(), k, gamma));
        let p1 = phi(&z5, k, 1, 1);
        assert_eq!(p1, GroupRingElement::from_fn(z5, k, |_| 1));
    }

    #[test]
    fn regular_matrix_shape() {
        let g = grp(&[5, 3]);
        let k = ctx(3);
        let one = GroupRingElement::one(g.clone(), k);
        assert_eq!(one.regular_matrix(), Matrix::identity(k, 15));
        let a = g.index_of(&[1, 2]);
        let m = GroupRingElement::delta(g.clone(), k, a).regular_matrix();
        for j in g.elements() {
            for i in g.elements() {
                assert_eq!(m.get(i, j).value(), (i == g.add(a, j)) as u64);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random(&g, k, &mut rng);
        assert!(x.regular_matrix().row_sums().iter().all(|s| *s == x.augmentation()));
    }

    #[test]
    fn det_examples() {
        let k = ctx(6);
        let alpha = k.reduce(3);
        let ainv = alpha.invert().unwrap();
        for order in 1..=6u64 {
            let g = grp(&[order]);
            let x = &GroupRingElement::one(g.clone(), k) - &GroupRingElement::delta(g.clone(), k, (1 % order) as usize).scale(&ainv);
            // resultant of X^k - 1 and 1 - a^{-1} X
            let expect = k.one() - ainv.pow(order);
            assert_eq!(x.det_multiplication().unwrap(), expect, "order {order}");
        }
        let g = grp(&[4, 2]);
        let d = GroupRingElement::delta(g.clone(), k, 3).det_multiplication().unwrap();
        assert!(d == k.one() || d == -k.one());
        let z5 = grp(&[5]);
        let x = omega(&z5, k, 0, 1);
        match x.det_multiplication() {
            Ok(d) => assert!(d.valuation() >= 1),
            Err(e) => assert!(matches!(e, Error::PrecisionExhausted { .. })),
        }
    }

    #[test]
    fn unit_examples() {
        let k = ctx(4);
        let t = grp(&[]);
        let alpha = k.reduce(2);
        let x = &GroupRingElement::one(t.clone(), k) - &GroupRingElement::one(t.clone(), k).scale(&alpha.invert().unwrap());
        assert!(x.is_unit());
        let z5 = grp(&[5]);
        assert!(!omega(&z5, k, 0, 1).is_unit());
    }

    #[test]
    fn unit_test_agrees_with_full_determinant() {
        let k = ctx(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for f in [vec![5, 2], vec![25], vec![3, 5], vec![4]] {
            let g = grp(&f);
            for _ in 0..40 {
                // sparse elements hit non-units often
                let x = GroupRingElement::from_fn(g.clone(), k, |_| {
                    if rng.gen_bool(0.3) {
                        rng.gen_range(0..5)
                    } else {
                        0
                    }
                });
                let full = x.regular_matrix().has_unit_det();
                assert_eq!(x.is_unit(), full, "{f:?} {x}");
            }
        }
    }

    #[test]
    fn inversion() {
        let k = ctx(5);
        let g = grp(&[5, 4]);
        assert!(GroupRingElement::one(g.clone(), k).invert_element().unwrap().is_one());
        let a = g.index_of(&[2, 3]);
        assert_eq!(
            GroupRingElement::delta(g.clone(), k, a).invert_element().unwrap(),
            GroupRingElement::delta(g.clone(), k, g.neg(a))
        );
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut found = 0;
        while found < 100 {
            let x = random(&g, k, &mut rng);
            if !x.is_unit() {
                assert_eq!(x.invert_element(), Err(Error::NotAUnit));
                continue;
            }
            found += 1;
            assert!((&x * &x.invert_element().unwrap()).is_one());
        }
    }

    #[test]
    fn newton_route_matches_solve() {
        let k = ctx(6);
        let g = grp(&[25, 4, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let x = random(&g, k, &mut rng);
            if x.is_unit() {
                let y = x.invert_element().unwrap();
                assert!((&x * &y).is_one());
            } else {
                assert_eq!(x.invert_element(), Err(Error::NotAUnit));
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let k = ctx(3);
        let g = grp(&[5, 2]);
        let mut x = GroupRingElement::zero(g.clone(), k);
        x.set_coeff(g.index_of(&[1, 1]), k.reduce(-1));
        x.set_coeff(0, k.reduce(3));
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(
            s,
            r#"{"group":[5,2],"p":5,"N":3,"coeffs":[{"exp":[0,0],"val":"3"},{"exp":[1,1],"val":"124"}]}"#
        );
        let back: GroupRingElement = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        assert!(serde_json::from_str::<GroupRingElement>(
            r#"{"group":[5],"p":5,"N":3,"coeffs":[{"exp":[7],"val":"1"}]}"#
        )
        .is_err());
    }

    fn arb_elem(g: Arc<FiniteAbelianGroup>, k: PadicContext) -> impl Strategy<Value = GroupRingElement> {
        let n = g.order();
        prop::collection::vec(0..k.modulus(), n)
            .prop_map(move |c| GroupRingElement::from_raw(g.clone(), k, c))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn convolution_is_associative_and_commutative(
            (x, y, z) in (arb_elem(grp(&[5, 2]), ctx(3)), arb_elem(grp(&[5, 2]), ctx(3)), arb_elem(grp(&[5, 2]), ctx(3)))
        ) {
            prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
            prop_assert_eq!(&x * &y, &y * &x);
            prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn det_is_multiplicative(
            (x, y) in (arb_elem(grp(&[3, 2]), ctx(4)), arb_elem(grp(&[3, 2]), ctx(4)))
        ) {
            // exhausted precision means the product determinant vanishes too
            match (x.det_multiplication(), y.det_multiplication(), (&x * &y).det_multiplication()) {
                (Ok(a), Ok(b), Ok(c)) => prop_assert_eq!(a * b, c),
                (_, _, Ok(c)) => prop_assert!(c.is_zero() || c.valuation() > 0),
                _ => {}
            }
        }

        #[test]
        fn involution_is_an_automorphism(
            (x, y) in (arb_elem(grp(&[25, 2]), ctx(3)), arb_elem(grp(&[25, 2]), ctx(3)))
        ) {
            prop_assert_eq!((&x * &y).involution(), &x.involution() * &y.involution());
            prop_assert_eq!(x.involution().involution(), x);
        }

        #[test]
        fn degree_law(y in arb_elem(grp(&[5, 1, 4]), ctx(3))) {
            let big = grp(&[25, 5, 4]);
            let r = GroupHom::reduction(big, y.group().clone()).unwrap();
            let back = norm_push(&r, &trace_lift(&r, &y).unwrap()).unwrap();
            prop_assert_eq!(back, y.scale(&ctx(3).reduce(25)));
        }

        #[test]
        fn trivial_idempotent_absorbs_translations(h in 0usize..8) {
            let d = grp(&[4, 2]);
            let k = ctx(4);
            let e = idempotent(&d, &Character::Trivial, k).unwrap();
            prop_assert_eq!(&GroupRingElement::delta(d, k, h) * &e, e);
        }
    }
}
