//! Seeded random elements shared by the suites.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::group::FiniteAbelianGroup;
use crate::group_ring::GroupRingElement;
use crate::padic::{PadicContext, PadicInt};

/// An element with at most `terms` nonzero coefficients.
pub fn sparse_element(
    g: &Arc<FiniteAbelianGroup>,
    k: PadicContext,
    rng: &mut ChaCha8Rng,
    terms: usize,
) -> GroupRingElement {
    let mut x = GroupRingElement::zero(g.clone(), k);
    for _ in 0..terms {
        let i = rng.gen_range(0..g.order());
        x.set_coeff(i, k.reduce(rng.gen_range(0..k.modulus()) as i128));
    }
    x
}

/// A unit of `Z/p^N[G]`: a sparse element shifted so that its image in the
/// prime-to-`p` quotient is invertible.
pub fn random_unit(g: &Arc<FiniteAbelianGroup>, k: PadicContext, rng: &mut ChaCha8Rng) -> GroupRingElement {
    loop {
        let mut x = sparse_element(g, k, rng, 3).scale(&k.reduce(k.p() as i128));
        x.set_coeff(0, random_unit_scalar(k, rng));
        if x.is_unit() {
            return x;
        }
    }
}

pub fn random_unit_scalar(k: PadicContext, rng: &mut ChaCha8Rng) -> PadicInt {
    loop {
        let c = k.reduce(rng.gen_range(1..k.modulus()) as i128);
        if c.is_unit() {
            return c;
        }
    }
}
