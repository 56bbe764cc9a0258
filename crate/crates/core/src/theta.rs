//! One-variable elements built from tables of scaled modular symbols.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, GroupHom};
use crate::group_ring::{norm_push, GroupRingElement};
use crate::padic::{primitive_root, PadicContext, PadicInt};

/// Values `[a/p^{n+1}]^+` keyed by integers prime to `p`; `a` and `-a`
/// name the same class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolTable {
    pub p: u64,
    #[serde(rename = "N")]
    pub prec: u32,
    pub level: u32,
    pub values: BTreeMap<u64, String>,
}

/// `theta'_{n+1}` on `(Z/p^{n+1})^x / ±1` and its image `theta_n` on the
/// quotient of order `p^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneVariableTheta {
    pub full: GroupRingElement,
    pub projected: GroupRingElement,
    /// Generator of the unit group used to index `full`.
    pub generator: u64,
}

/// Primitive root modulo `p^k` for odd `p`.
fn primitive_root_prime_power(p: u64) -> u64 {
    let g = primitive_root(p);
    let p2 = p * p;
    let mut acc = 1u64;
    for _ in 0..p - 1 {
        acc = acc * g % p2;
    }
    if acc == 1 {
        g + p
    } else {
        g
    }
}

/// Discrete logs of the classes mod `±1`: `log[rep] = k` with
/// `g^k ≡ ±rep`, where `rep` is the representative in `[1, M/2]`.
fn class_logs(p: u64, level: u32) -> (u64, BTreeMap<u64, u64>) {
    let m = p.pow(level + 1);
    let g = primitive_root_prime_power(p);
    let order = (p - 1) * p.pow(level) / 2;
    let mut logs = BTreeMap::new();
    let mut a = 1u64;
    for k in 0..order {
        logs.insert(a.min(m - a), k);
        a = a * g % m;
    }
    (g, logs)
}

pub fn theta_from_symbol_table(
    table: &BTreeMap<u64, PadicInt>,
    level: u32,
    ctx: PadicContext,
) -> Result<OneVariableTheta> {
    let p = ctx.p();
    let m = p.pow(level + 1);
    let (g, logs) = class_logs(p, level);
    let order = (p - 1) * p.pow(level) / 2;
    let group = Arc::new(FiniteAbelianGroup::cyclic(order)?);
    let mut coeffs: Vec<Option<PadicInt>> = vec![None; order as usize];
    for (&a, &v) in table {
        if v.ctx() != ctx {
            return Err(Error::ContextMismatch);
        }
        let r = a % m;
        if r.is_multiple_of(p) {
            return Err(Error::Invalid(format!("{a} is not prime to {p}")));
        }
        let k = logs[&r.min(m - r)] as usize;
        match coeffs[k] {
            Some(old) if old != v => {
                return Err(Error::Invalid(format!("class of {a} has two different values")));
            }
            _ => coeffs[k] = Some(v),
        }
    }
    let mut full = GroupRingElement::zero(group.clone(), ctx);
    for (&rep, &k) in &logs {
        let v = coeffs[k as usize].ok_or(Error::IncompleteTable(rep))?;
        full.set_coeff(k as usize, v);
    }
    let quotient = Arc::new(FiniteAbelianGroup::cyclic(p.pow(level))?);
    let projected = norm_push(&GroupHom::reduction(group, quotient)?, &full)?;
    Ok(OneVariableTheta {
        full,
        projected,
        generator: g,
    })
}

impl SymbolTable {
    pub fn build(&self) -> Result<OneVariableTheta> {
        let ctx = PadicContext::new(self.p, self.prec)?;
        let values = self
            .values
            .iter()
            .map(|(&a, v)| {
                v.trim()
                    .parse::<i128>()
                    .map(|x| (a, ctx.reduce(x)))
                    .map_err(|_| Error::Invalid(format!("value {v:?} for {a} is not an integer")))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        theta_from_symbol_table(&values, self.level, ctx)
    }
}
