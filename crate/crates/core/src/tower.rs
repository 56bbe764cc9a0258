//! The two-prime modulus lattice `f = P^a Q^b`, its ray-class group models
//! and distributions satisfying the norm relations up the tower.
//!
//! `G(a,b)` has coordinates `[p-part of P, p-part of Q, tame P, tame Q, Delta...]`
//! with orders `p^max(a-1,0)`, `p^max(b-1,0)`, `t(a)`, `t(b)` and the fixed
//! `Delta`, where `t(0) = 1` and `t(a) = p - 1` otherwise. This is the shape
//! of `(O/P^a)^x x (O/Q^b)^x` for split `p`, extended by `Delta`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, GroupHom};
use crate::group_ring::{norm_push, trace_lift, GroupRingElement};
use crate::padic::{PadicContext, PadicInt};

/// One of the two primes above `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Prime {
    P,
    Q,
}

impl Prime {
    pub fn other(self) -> Prime {
        match self {
            Prime::P => Prime::Q,
            Prime::Q => Prime::P,
        }
    }

    fn slot(self) -> usize {
        match self {
            Prime::P => 0,
            Prime::Q => 1,
        }
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Prime::P => "p",
            Prime::Q => "q",
        })
    }
}

/// Exponents `(a, b)` of the modulus `P^a Q^b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModulusIndex {
    pub a: u32,
    pub b: u32,
}

impl ModulusIndex {
    pub fn new(a: u32, b: u32) -> Self {
        ModulusIndex { a, b }
    }

    pub fn exponent(self, v: Prime) -> u32 {
        match v {
            Prime::P => self.a,
            Prime::Q => self.b,
        }
    }

    pub fn up(self, v: Prime) -> Self {
        match v {
            Prime::P => ModulusIndex::new(self.a + 1, self.b),
            Prime::Q => ModulusIndex::new(self.a, self.b + 1),
        }
    }

    pub fn down(self, v: Prime) -> Option<Self> {
        match v {
            Prime::P if self.a > 0 => Some(ModulusIndex::new(self.a - 1, self.b)),
            Prime::Q if self.b > 0 => Some(ModulusIndex::new(self.a, self.b - 1)),
            _ => None,
        }
    }

    pub fn total(self) -> u32 {
        self.a + self.b
    }

    pub fn divides(self, other: Self) -> bool {
        self.a <= other.a && self.b <= other.b
    }
}

impl fmt::Display for ModulusIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.a, self.b)
    }
}

impl FromStr for ModulusIndex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("modulus index {s:?} is not of the form \"a,b\""));
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        Ok(ModulusIndex::new(
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ))
    }
}

/// Image of the Frobenius class at one prime inside the groups where that
/// prime is unramified: a component in the other prime's p-part and tame
/// part, and a component in `Delta`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobeniusClass {
    pub other_p: u64,
    pub other_tame: u64,
    pub delta: Vec<u64>,
}

impl FrobeniusClass {
    pub fn standard(delta_rank: usize) -> Self {
        FrobeniusClass {
            other_p: 1,
            other_tame: 0,
            delta: vec![0; delta_rank],
        }
    }
}

/// Serializable description of a tower.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerSpec {
    pub p: u64,
    #[serde(rename = "N")]
    pub prec: u32,
    pub caps: (u32, u32),
    pub delta: Vec<u64>,
    pub sigma_p: FrobeniusClass,
    pub sigma_q: FrobeniusClass,
}

impl TowerSpec {
    pub fn new(p: u64, prec: u32, caps: (u32, u32), delta: Vec<u64>) -> Self {
        let r = delta.len();
        TowerSpec {
            p,
            prec,
            caps,
            delta,
            sigma_p: FrobeniusClass::standard(r),
            sigma_q: FrobeniusClass::standard(r),
        }
    }
}

/// The materialized lattice of groups `G(a,b)` for `a <= A`, `b <= B`.
#[derive(Clone, Debug)]
pub struct TowerModel {
    spec: TowerSpec,
    ctx: PadicContext,
    delta: Arc<FiniteAbelianGroup>,
    groups: Vec<Arc<FiniteAbelianGroup>>,
}

impl PartialEq for TowerModel {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl TowerModel {
    pub fn build(spec: TowerSpec) -> Result<Self> {
        let ctx = PadicContext::new(spec.p, spec.prec)?;
        let (ca, cb) = spec.caps;
        if ca < 1 || cb < 1 {
            return Err(Error::Invalid("tower caps must be at least 1".into()));
        }
        let delta = Arc::new(FiniteAbelianGroup::new(spec.delta.clone())?);
        let d = delta.order() as u64;
        if d.is_multiple_of(spec.p) {
            return Err(Error::BadDelta { order: d, p: spec.p });
        }
        for s in [&spec.sigma_p, &spec.sigma_q] {
            if s.delta.len() != delta.rank() {
                return Err(Error::Invalid("Frobenius class has wrong Delta rank".into()));
            }
        }
        let mut groups = Vec::with_capacity(((ca + 1) * (cb + 1)) as usize);
        for a in 0..=ca {
            for b in 0..=cb {
                let mut f = vec![
                    p_order(spec.p, a),
                    p_order(spec.p, b),
                    tame_order(spec.p, a),
                    tame_order(spec.p, b),
                ];
                f.extend_from_slice(&spec.delta);
                groups.push(Arc::new(FiniteAbelianGroup::new(f)?));
            }
        }
        Ok(TowerModel {
            spec,
            ctx,
            delta,
            groups,
        })
    }

    pub fn spec(&self) -> &TowerSpec {
        &self.spec
    }

    pub fn ctx(&self) -> PadicContext {
        self.ctx
    }

    pub fn p(&self) -> u64 {
        self.ctx.p()
    }

    pub fn caps(&self) -> (u32, u32) {
        self.spec.caps
    }

    pub fn delta(&self) -> &Arc<FiniteAbelianGroup> {
        &self.delta
    }

    pub fn contains(&self, idx: ModulusIndex) -> bool {
        idx.a <= self.spec.caps.0 && idx.b <= self.spec.caps.1
    }

    /// All indices ordered by `a + b`, then lexicographically.
    pub fn indices(&self) -> Vec<ModulusIndex> {
        let (ca, cb) = self.spec.caps;
        let mut v: Vec<ModulusIndex> = (0..=ca)
            .flat_map(|a| (0..=cb).map(move |b| ModulusIndex::new(a, b)))
            .collect();
        v.sort_by_key(|i| (i.total(), i.a, i.b));
        v
    }

    pub fn group(&self, idx: ModulusIndex) -> &Arc<FiniteAbelianGroup> {
        assert!(self.contains(idx), "index {idx} outside the tower");
        &self.groups[(idx.a * (self.spec.caps.1 + 1) + idx.b) as usize]
    }

    /// Quotient map `G(upper) -> G(lower)` for `lower | upper`.
    pub fn quotient(&self, upper: ModulusIndex, lower: ModulusIndex) -> Result<GroupHom> {
        if !lower.divides(upper) || !self.contains(upper) {
            return Err(Error::Invalid(format!("no quotient map G({upper}) -> G({lower})")));
        }
        GroupHom::reduction(self.group(upper).clone(), self.group(lower).clone())
    }

    /// The one-step quotient `G(idx·v) -> G(idx)`.
    pub fn step(&self, idx: ModulusIndex, v: Prime) -> Result<GroupHom> {
        self.quotient(idx.up(v), idx)
    }

    /// Frobenius class at `v` in `G(idx)`; meaningful when `v` does not
    /// divide the modulus.
    pub fn sigma(&self, idx: ModulusIndex, v: Prime) -> usize {
        let g = self.group(idx);
        let s = match v {
            Prime::P => &self.spec.sigma_p,
            Prime::Q => &self.spec.sigma_q,
        };
        let o = v.other().slot();
        let mut e = vec![0u64; g.rank()];
        e[o] = s.other_p;
        e[2 + o] = s.other_tame;
        e[4..].copy_from_slice(&s.delta);
        g.index_of(&e)
    }

    /// `G'(n,m) = Z/p^n x Z/p^m`, the p-part of `G(n+1,m+1)`.
    pub fn p_part_group(&self, n: u32, m: u32) -> Arc<FiniteAbelianGroup> {
        let p = self.p();
        Arc::new(FiniteAbelianGroup::new(vec![p.pow(n), p.pow(m)]).expect("small p-group"))
    }

    /// Projection `G(n+1,m+1) -> G'(n,m)` killing the tame part and `Delta`.
    pub fn p_part_projection(&self, n: u32, m: u32) -> Result<GroupHom> {
        let src = self.group(ModulusIndex::new(n + 1, m + 1)).clone();
        let mut images = vec![vec![1, 0], vec![0, 1]];
        images.extend(std::iter::repeat_n(vec![0, 0], src.rank() - 2));
        GroupHom::new(src, self.p_part_group(n, m), images)
    }
}

fn p_order(p: u64, a: u32) -> u64 {
    p.pow(a.saturating_sub(1))
}

fn tame_order(p: u64, a: u32) -> u64 {
    if a == 0 {
        1
    } else {
        p - 1
    }
}

/// Hecke eigenvalue at `p` and the unit roots used for both primes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeckeData {
    pub a_p: PadicInt,
    pub alpha_p: PadicInt,
    pub alpha_q: PadicInt,
}

impl HeckeData {
    /// Hensel-lifts the unit root of `X^2 - a_p X + p`; needs `a_p` prime
    /// to `p`.
    pub fn from_ap(ctx: PadicContext, a_p: i128) -> Result<Self> {
        let a = ctx.reduce(a_p);
        if !a.is_unit() {
            return Err(Error::BadHecke(format!(
                "a_p = {a_p} is divisible by {}; no unit root",
                ctx.p()
            )));
        }
        let alpha = unit_root(a);
        Ok(HeckeData {
            a_p: a,
            alpha_p: alpha,
            alpha_q: alpha,
        })
    }

    pub fn ctx(&self) -> PadicContext {
        self.a_p.ctx()
    }

    pub fn alpha(&self, v: Prime) -> PadicInt {
        match v {
            Prime::P => self.alpha_p,
            Prime::Q => self.alpha_q,
        }
    }

    pub fn is_ordinary(&self) -> bool {
        self.a_p.is_unit()
    }

    pub fn ap_not_one(&self) -> bool {
        (self.a_p.value() % self.ctx().p()) != 1
    }

    /// `alpha^2 - a_p alpha + p == 0` for both roots.
    pub fn check(&self) -> bool {
        let p = self.ctx().reduce(self.ctx().p() as i128);
        [self.alpha_p, self.alpha_q]
            .iter()
            .all(|&x| x.is_unit() && (x * x - self.a_p * x + p).is_zero())
    }
}

fn unit_root(a: PadicInt) -> PadicInt {
    let k = a.ctx();
    let p = k.reduce(k.p() as i128);
    let two = k.reduce(2);
    let mut x = a;
    for _ in 0..=k.prec() {
        let f = x * x - a * x + p;
        let df = two * x - a;
        x -= f * df.invert().expect("derivative is a unit at the unit root");
    }
    x
}

/// A family `Theta(a,b)` on `G(a,b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RayClassDistribution {
    pub tower: Arc<TowerModel>,
    pub entries: BTreeMap<ModulusIndex, GroupRingElement>,
}

impl RayClassDistribution {
    pub fn new(tower: Arc<TowerModel>) -> Self {
        RayClassDistribution {
            tower,
            entries: BTreeMap::new(),
        }
    }

    pub fn zero(tower: Arc<TowerModel>) -> Self {
        let mut d = RayClassDistribution::new(tower.clone());
        for idx in tower.indices() {
            d.entries
                .insert(idx, GroupRingElement::zero(tower.group(idx).clone(), tower.ctx()));
        }
        d
    }

    pub fn get(&self, idx: ModulusIndex) -> Result<&GroupRingElement> {
        self.entries.get(&idx).ok_or(Error::MissingEntry { a: idx.a, b: idx.b })
    }

    pub fn insert(&mut self, idx: ModulusIndex, x: GroupRingElement) -> Result<()> {
        if !self.tower.contains(idx) {
            return Err(Error::Invalid(format!("index {idx} outside the tower")));
        }
        if x.group() != self.tower.group(idx) {
            return Err(Error::GroupMismatch);
        }
        if x.ctx() != self.tower.ctx() {
            return Err(Error::ContextMismatch);
        }
        self.entries.insert(idx, x);
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl Serialize for RayClassDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        struct Entries<'a>(&'a BTreeMap<ModulusIndex, GroupRingElement>);
        impl Serialize for Entries<'_> {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (k, v) in self.0 {
                    m.serialize_entry(&k.to_string(), v)?;
                }
                m.end()
            }
        }
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("tower", self.tower.spec())?;
        m.serialize_entry("entries", &Entries(&self.entries))?;
        m.end()
    }
}

impl<'de> Deserialize<'de> for RayClassDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        struct Wire {
            tower: TowerSpec,
            entries: BTreeMap<String, GroupRingElement>,
        }
        let w = Wire::deserialize(d)?;
        let tower = Arc::new(TowerModel::build(w.tower).map_err(D::Error::custom)?);
        let mut dist = RayClassDistribution::new(tower);
        for (k, v) in w.entries {
            let idx: ModulusIndex = k.parse().map_err(D::Error::custom)?;
            dist.insert(idx, v)
                .map_err(|e| D::Error::custom(format!("entry {idx}: {e}")))?;
        }
        Ok(dist)
    }
}

/// `a_v - [s] - [-s]` in the group of `x`.
pub(crate) fn euler_trinomial(a: PadicInt, g: &Arc<FiniteAbelianGroup>, s: usize) -> GroupRingElement {
    let k = a.ctx();
    let mut e = GroupRingElement::scalar(g.clone(), a);
    for t in [s, g.neg(s)] {
        let c = e.coeff(t) - k.one();
        e.set_coeff(t, c);
    }
    e
}

/// Right-hand side of the norm relation from `idx` up to `idx·v`:
/// `(a_v - s_v - s_v^{-1}) Theta(idx)` when `v` does not divide the
/// modulus, else `a_v Theta(idx) - Tr Theta(idx/v)`.
pub fn haran_rhs(
    dist: &RayClassDistribution,
    h: &HeckeData,
    idx: ModulusIndex,
    v: Prime,
) -> Result<GroupRingElement> {
    let t = &dist.tower;
    let theta = dist.get(idx)?;
    match idx.down(v) {
        None => {
            let e = euler_trinomial(h.a_p, t.group(idx), t.sigma(idx, v));
            Ok(&e * theta)
        }
        Some(low) => {
            let tr = trace_lift(&t.step(low, v)?, dist.get(low)?)?;
            Ok(&theta.scale(&h.a_p) - &tr)
        }
    }
}

/// Outcome of one norm relation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationCheck {
    pub index: String,
    pub prime: Prime,
    pub pass: bool,
    /// Number of group elements where the two sides differ.
    pub discrepancy_support: usize,
    /// Minimal valuation of the difference (`N` when it vanishes).
    pub discrepancy_valuation: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationReport {
    pub checks: Vec<RelationCheck>,
}

impl RelationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }
}

pub(crate) fn discrepancy(x: &GroupRingElement) -> (usize, u32) {
    let v = x
        .terms()
        .map(|(_, c)| c.valuation())
        .min()
        .unwrap_or(x.ctx().prec());
    (x.support_size(), v)
}

/// Checks every norm relation `N Theta(idx·v) = rhs` inside the caps.
pub fn verify_haran_relations(dist: &RayClassDistribution, h: &HeckeData) -> Result<RelationReport> {
    let t = &dist.tower;
    let mut checks = Vec::new();
    for idx in t.indices() {
        dist.get(idx)?;
        for v in [Prime::P, Prime::Q] {
            let up = idx.up(v);
            if !t.contains(up) {
                continue;
            }
            let lhs = norm_push(&t.step(idx, v)?, dist.get(up)?)?;
            let diff = &lhs - &haran_rhs(dist, h, idx, v)?;
            let (support, val) = discrepancy(&diff);
            checks.push(RelationCheck {
                index: idx.to_string(),
                prime: v,
                pass: support == 0,
                discrepancy_support: support,
                discrepancy_valuation: val,
            });
        }
    }
    Ok(RelationReport { checks })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorOptions {
    /// Add a random norm-zero element at every step above the base.
    pub kernel_noise: bool,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        GeneratorOptions { kernel_noise: true }
    }
}

fn random_element(g: &Arc<FiniteAbelianGroup>, k: PadicContext, rng: &mut ChaCha8Rng) -> GroupRingElement {
    let m = k.modulus();
    GroupRingElement::from_fn(g.clone(), k, |_| rng.gen_range(0..m) as i128)
}

/// Builds a seeded family satisfying all norm relations.
///
/// The base entry is random. Going up, each new entry is the canonical
/// exponent-vector lift of the required norm plus, optionally, a random
/// element of the norm kernel. Entries with both `a, b >= 1` must satisfy
/// two relations at once; they are solved jointly after checking that the
/// two required norms agree on `G(a-1,b-1)`.
pub fn generate_distribution(
    tower: Arc<TowerModel>,
    h: &HeckeData,
    seed: u64,
    opts: GeneratorOptions,
) -> Result<RayClassDistribution> {
    let k = tower.ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dist = RayClassDistribution::new(tower.clone());
    for idx in tower.indices() {
        let g = tower.group(idx).clone();
        let pd = idx.down(Prime::P);
        let qd = idx.down(Prime::Q);
        let x = match (pd, qd) {
            (None, None) => random_element(&g, k, &mut rng),
            (Some(low), None) | (None, Some(low)) => {
                let v = if pd.is_some() { Prime::P } else { Prime::Q };
                let r = haran_rhs(&dist, h, low, v)?;
                let mut x = r.lift_exponents(&g)?;
                if opts.kernel_noise {
                    let n = random_element(&g, k, &mut rng);
                    let step = tower.step(low, v)?;
                    x = &(&x + &n) - &norm_push(&step, &n)?.lift_exponents(&g)?;
                }
                x
            }
            (Some(lp), Some(lq)) => {
                let rp = haran_rhs(&dist, h, lp, Prime::P)?;
                let rq = haran_rhs(&dist, h, lq, Prime::Q)?;
                let corner = ModulusIndex::new(idx.a - 1, idx.b - 1);
                let nq_rp = norm_push(&tower.step(corner, Prime::Q)?, &rp)?;
                let np_rq = norm_push(&tower.step(corner, Prime::P)?, &rq)?;
                if nq_rp != np_rq {
                    return Err(Error::InfeasibleConstraints { a: idx.a, b: idx.b });
                }
                let mut x = &(&rp.lift_exponents(&g)? + &rq.lift_exponents(&g)?)
                    - &nq_rp.lift_exponents(&g)?;
                if opts.kernel_noise {
                    let n = random_element(&g, k, &mut rng);
                    let np = norm_push(&tower.step(lp, Prime::P)?, &n)?;
                    let nq = norm_push(&tower.step(lq, Prime::Q)?, &n)?;
                    let npq = norm_push(&tower.quotient(idx, corner)?, &n)?;
                    let kernel = &(&(&n - &np.lift_exponents(&g)?) - &nq.lift_exponents(&g)?)
                        + &npq.lift_exponents(&g)?;
                    x = &x + &kernel;
                }
                x
            }
        };
        dist.insert(idx, x)?;
    }
    Ok(dist)
}
