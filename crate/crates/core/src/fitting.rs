//! Finitely presented modules over `Z/p^N[G]`, their zeroth Fitting ideals
//! and ideals as canonical coefficient lattices.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{gcd, FiniteAbelianGroup, GroupHom};
use crate::group_ring::{norm_push, GroupRingElement};
use crate::linalg::HowellForm;
use crate::padic::PadicContext;

/// The coefficient ring `Z/p^N[G]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ring {
    pub group: Arc<FiniteAbelianGroup>,
    pub ctx: PadicContext,
}

impl Ring {
    pub fn new(group: Arc<FiniteAbelianGroup>, ctx: PadicContext) -> Self {
        Ring { group, ctx }
    }

    pub fn of(x: &GroupRingElement) -> Self {
        Ring::new(x.group().clone(), x.ctx())
    }

    pub fn zero(&self) -> GroupRingElement {
        GroupRingElement::zero(self.group.clone(), self.ctx)
    }

    pub fn one(&self) -> GroupRingElement {
        GroupRingElement::one(self.group.clone(), self.ctx)
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.ctx, self.group)
    }
}

/// `R^s -> R^r -> M -> 0`: `rows = s` relations among `cols = r`
/// generators.
#[derive(Clone, Debug, PartialEq)]
pub struct PresentedModule {
    ring: Ring,
    rows: usize,
    cols: usize,
    entries: Vec<GroupRingElement>,
}

impl PresentedModule {
    pub fn new(ring: Ring, rows: usize, cols: usize, entries: Vec<GroupRingElement>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Invalid(format!(
                "{rows}x{cols} presentation needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        for e in &entries {
            if e.ctx() != ring.ctx {
                return Err(Error::ContextMismatch);
            }
            if e.group() != &ring.group {
                return Err(Error::GroupMismatch);
            }
        }
        Ok(PresentedModule {
            ring,
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(ring: Ring, cols: usize, rows: Vec<Vec<GroupRingElement>>) -> Result<Self> {
        let s = rows.len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Invalid("ragged relation matrix".into()));
        }
        PresentedModule::new(ring, s, cols, rows.into_iter().flatten().collect())
    }

    /// `R/(a)`.
    pub fn cyclic(a: GroupRingElement) -> Self {
        PresentedModule::new(Ring::of(&a), 1, 1, vec![a]).expect("1x1 presentation")
    }

    pub fn diagonal(diag: Vec<GroupRingElement>) -> Result<Self> {
        let ring = diag
            .first()
            .map(Ring::of)
            .ok_or_else(|| Error::Invalid("empty diagonal".into()))?;
        let n = diag.len();
        let mut entries = vec![ring.zero(); n * n];
        for (i, d) in diag.into_iter().enumerate() {
            entries[i * n + i] = d;
        }
        PresentedModule::new(ring, n, n, entries)
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> &GroupRingElement {
        &self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[GroupRingElement] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// Block-diagonal presentation of `self ⊕ other`.
    pub fn direct_sum(&self, other: &PresentedModule) -> Result<Self> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        let (s, r) = (self.rows + other.rows, self.cols + other.cols);
        let mut entries = vec![self.ring.zero(); s * r];
        for i in 0..self.rows {
            for j in 0..self.cols {
                entries[i * r + j] = self.entry(i, j).clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                entries[(self.rows + i) * r + self.cols + j] = other.entry(i, j).clone();
            }
        }
        PresentedModule::new(self.ring.clone(), s, r, entries)
    }

    /// Appends relation rows.
    pub fn with_rows(&self, extra: Vec<Vec<GroupRingElement>>) -> Result<Self> {
        let mut rows: Vec<Vec<GroupRingElement>> = (0..self.rows).map(|i| self.row(i).to_vec()).collect();
        rows.extend(extra);
        PresentedModule::from_rows(self.ring.clone(), self.cols, rows)
    }

    /// Applies a ring map to every entry.
    pub fn map(&self, rho: &RingMap) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|e| rho.apply(e))
            .collect::<Result<Vec<_>>>()?;
        let ring = rho.target_ring(&self.ring)?;
        PresentedModule::new(ring, self.rows, self.cols, entries)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Serialize, Deserialize)]
struct WireModule {
    group: Vec<u64>,
    p: u64,
    #[serde(rename = "N")]
    n: u32,
    rows: usize,
    cols: usize,
    matrix: Vec<Vec<GroupRingElement>>,
}

impl Serialize for PresentedModule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WireModule {
            group: self.ring.group.factors().to_vec(),
            p: self.ring.ctx.p(),
            n: self.ring.ctx.prec(),
            rows: self.rows,
            cols: self.cols,
            matrix: (0..self.rows).map(|i| self.row(i).to_vec()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PresentedModule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = WireModule::deserialize(d)?;
        let ctx = PadicContext::new(w.p, w.n).map_err(D::Error::custom)?;
        let group = Arc::new(FiniteAbelianGroup::new(w.group).map_err(D::Error::custom)?);
        if w.matrix.len() != w.rows {
            return Err(D::Error::custom("row count does not match matrix"));
        }
        PresentedModule::from_rows(Ring::new(group, ctx), w.cols, w.matrix).map_err(D::Error::custom)
    }
}

/// Determinant of a square matrix over the group ring, summing over
/// permutations with a subset dynamic program (exact, no division).
pub fn group_ring_det(ring: &Ring, m: &[&[GroupRingElement]]) -> GroupRingElement {
    let k = m.len();
    if k == 0 {
        return ring.one();
    }
    let full = (1usize << k) - 1;
    let mut dp: Vec<Option<GroupRingElement>> = vec![None; 1 << k];
    dp[0] = Some(ring.one());
    for mask in 0..full {
        let t = mask.count_ones() as usize;
        let Some(cur) = dp[mask].take() else { continue };
        if cur.is_zero() {
            continue;
        }
        for j in 0..k {
            if mask & (1 << j) != 0 || m[t][j].is_zero() {
                continue;
            }
            let mut term = &cur * &m[t][j];
            if (mask >> (j + 1)).count_ones() % 2 == 1 {
                term = -&term;
            }
            let slot = &mut dp[mask | (1 << j)];
            *slot = Some(match slot.take() {
                Some(acc) => &acc + &term,
                None => term,
            });
        }
    }
    dp[full].take().unwrap_or_else(|| ring.zero())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// All maximal (`r x r`) minors of the relation matrix.
pub fn maximal_minors(m: &PresentedModule) -> Vec<GroupRingElement> {
    let r = m.cols;
    if r == 0 {
        return vec![m.ring.one()];
    }
    subsets(m.rows, r)
        .into_iter()
        .map(|rows| {
            let sub: Vec<&[GroupRingElement]> = rows.iter().map(|&i| m.row(i)).collect();
            group_ring_det(&m.ring, &sub)
        })
        .collect()
}

/// Zeroth Fitting ideal: generated by the maximal minors; the unit ideal
/// for `r = 0` and the zero ideal when `s < r`.
pub fn fitting_ideal(m: &PresentedModule) -> IdealLattice {
    IdealLattice::from_generators(m.ring.clone(), maximal_minors(m))
}

/// An ideal of `Z/p^N[G]`, kept as generators plus the Howell form of all
/// their translates `g·f`, built on first use.
#[derive(Clone, Debug)]
pub struct IdealLattice {
    ring: Ring,
    generators: Vec<GroupRingElement>,
    form: OnceLock<HowellForm>,
}

impl IdealLattice {
    pub fn from_generators(ring: Ring, generators: Vec<GroupRingElement>) -> Self {
        let generators = generators.into_iter().filter(|g| !g.is_zero()).collect();
        IdealLattice {
            ring,
            generators,
            form: OnceLock::new(),
        }
    }

    pub fn principal(x: GroupRingElement) -> Self {
        IdealLattice::from_generators(Ring::of(&x), vec![x])
    }

    pub fn zero(ring: Ring) -> Self {
        IdealLattice::from_generators(ring, Vec::new())
    }

    pub fn unit(ring: Ring) -> Self {
        let one = ring.one();
        IdealLattice::from_generators(ring, vec![one])
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn generators(&self) -> &[GroupRingElement] {
        &self.generators
    }

    pub fn canonical(&self) -> &HowellForm {
        self.form.get_or_init(|| {
            let g = &self.ring.group;
            let mut h = HowellForm::new(self.ring.ctx, g.order());
            for f in &self.generators {
                for s in g.elements() {
                    let t = &GroupRingElement::delta(g.clone(), self.ring.ctx, s) * f;
                    h.insert(t.raw());
                }
            }
            h.canonicalize();
            h
        })
    }

    /// Canonical basis rows, for reports.
    pub fn basis(&self) -> Vec<Vec<u64>> {
        self.canonical().rows()
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn is_unit_ideal(&self) -> bool {
        self.contains(&self.ring.one()).unwrap_or(false)
    }

    pub fn contains(&self, x: &GroupRingElement) -> Result<bool> {
        if Ring::of(x) != self.ring {
            return Err(Error::RingMismatch);
        }
        Ok(self.canonical().contains(x.raw()))
    }

    pub fn contains_ideal(&self, other: &IdealLattice) -> Result<bool> {
        if other.ring != self.ring {
            return Err(Error::RingMismatch);
        }
        for g in &other.generators {
            if !self.contains(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn equal(&self, other: &IdealLattice) -> Result<bool> {
        if other.ring != self.ring {
            return Err(Error::RingMismatch);
        }
        Ok(self.canonical() == other.canonical())
    }

    pub fn product(&self, other: &IdealLattice) -> Result<IdealLattice> {
        if other.ring != self.ring {
            return Err(Error::RingMismatch);
        }
        let gens = self
            .generators
            .iter()
            .flat_map(|a| other.generators.iter().map(move |b| a * b))
            .collect();
        Ok(IdealLattice::from_generators(self.ring.clone(), gens))
    }

    pub fn sum(&self, other: &IdealLattice) -> Result<IdealLattice> {
        if other.ring != self.ring {
            return Err(Error::RingMismatch);
        }
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        Ok(IdealLattice::from_generators(self.ring.clone(), gens))
    }

    /// `p^k I` for the current precision.
    pub fn scale_p(&self, k: u32) -> IdealLattice {
        let c = self.ring.ctx.p_pow(k);
        IdealLattice::from_generators(
            self.ring.clone(),
            self.generators.iter().map(|g| g.scale(&c)).collect(),
        )
    }

    /// Least `k < N` with `p^k I ⊆ J` and `p^k J ⊆ I`, i.e. the power of `p`
    /// after which the two ideals agree rationally as far as `Z/p^N` can
    /// tell. `Some(0)` is plain equality.
    pub fn saturation_index(&self, other: &IdealLattice) -> Result<Option<u32>> {
        if other.ring != self.ring {
            return Err(Error::RingMismatch);
        }
        for k in 0..self.ring.ctx.prec() {
            if self.contains_ideal(&other.scale_p(k))? && other.contains_ideal(&self.scale_p(k))? {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }
}

/// A ring map out of `Z/p^N[G]`.
#[derive(Clone, Debug)]
pub enum RingMap {
    Identity,
    /// `[g] -> [g^{-1}]`.
    Involution,
    /// Induced by a group homomorphism, optionally lowering the precision.
    Hom {
        hom: GroupHom,
        ctx: Option<PadicContext>,
    },
}

impl RingMap {
    pub fn hom(hom: GroupHom) -> Self {
        RingMap::Hom { hom, ctx: None }
    }

    pub fn apply(&self, x: &GroupRingElement) -> Result<GroupRingElement> {
        match self {
            RingMap::Identity => Ok(x.clone()),
            RingMap::Involution => Ok(x.involution()),
            RingMap::Hom { hom, ctx } => {
                let y = norm_push(hom, x)?;
                match ctx {
                    Some(c) => y.truncate(*c),
                    None => Ok(y),
                }
            }
        }
    }

    pub fn target_ring(&self, source: &Ring) -> Result<Ring> {
        match self {
            RingMap::Identity | RingMap::Involution => Ok(source.clone()),
            RingMap::Hom { hom, ctx } => {
                if **hom.source() != *source.group {
                    return Err(Error::GroupMismatch);
                }
                Ok(Ring::new(hom.target().clone(), ctx.unwrap_or(source.ctx)))
            }
        }
    }
}

/// The ideal generated by the images of the generators of `i`.
pub fn project_ideal(i: &IdealLattice, rho: &RingMap) -> Result<IdealLattice> {
    let ring = rho.target_ring(i.ring())?;
    let gens = i
        .generators
        .iter()
        .map(|g| rho.apply(g))
        .collect::<Result<Vec<_>>>()?;
    Ok(IdealLattice::from_generators(ring, gens))
}

/// `Fitt_{R'}(M ⊗ R')`, computed from the pushed presentation.
pub fn base_change_fitting(m: &PresentedModule, rho: &RingMap) -> Result<IdealLattice> {
    Ok(fitting_ideal(&m.map(rho)?))
}

/// Reads an ideal generator of the form `[h] - 1` with `h` supported on a
/// single coordinate; returns `(coordinate, exponent)`.
fn omega_type(x: &GroupRingElement) -> Option<(usize, u64)> {
    let g = x.group();
    let k = x.ctx();
    let terms: Vec<_> = x.terms().collect();
    let minus_one = k.reduce(-1);
    let [(a, ca), (b, cb)] = terms.as_slice() else {
        return None;
    };
    let h = match (*a, *b) {
        (0, h) if *ca == minus_one && cb.value() == 1 % k.modulus() => h,
        _ => return None,
    };
    let e = g.exps(h);
    let nz: Vec<usize> = (0..e.len()).filter(|&i| e[i] != 0).collect();
    match nz.as_slice() {
        [i] => Some((*i, e[*i])),
        _ => None,
    }
}

/// `M/IM` over `R/I` for `I` generated by elements `[h] - 1` with each `h`
/// on a single coordinate, so that `R/I = Z/p^N[G/H]`.
///
/// Returns the quotient presentation and the quotient map. The presentation
/// carries, besides the images of the original relations, one appended row
/// per module generator and ideal generator; these vanish in `R/I`.
pub fn quotient_base_change(
    m: &PresentedModule,
    ideal: &[GroupRingElement],
) -> Result<(PresentedModule, GroupHom)> {
    let g = m.ring.group.clone();
    let mut factors = g.factors().to_vec();
    for x in ideal {
        if Ring::of(x) != m.ring {
            return Err(Error::RingMismatch);
        }
        if x.is_zero() {
            continue;
        }
        let (i, e) = omega_type(x).ok_or_else(|| {
            Error::UnsupportedQuotient(format!("generator {x} is not of the form [h] - 1 on one coordinate"))
        })?;
        factors[i] = gcd(factors[i], gcd(e, g.factors()[i]));
    }
    let q = Arc::new(FiniteAbelianGroup::new(factors)?);
    let hom = GroupHom::reduction(g, q)?;
    let mut extra = Vec::new();
    for x in ideal {
        for j in 0..m.cols {
            let mut row = vec![m.ring.zero(); m.cols];
            row[j] = x.clone();
            extra.push(row);
        }
    }
    let quotient = m.with_rows(extra)?.map(&RingMap::hom(hom.clone()))?;
    Ok((quotient, hom))
}
