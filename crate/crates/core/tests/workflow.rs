use std::sync::Arc;

use mtfitt::fitting::{fitting_ideal, IdealLattice, PresentedModule, Ring};
use mtfitt::group_ring::{omega, GroupRingElement};
use mtfitt::pipeline::{conjecture_check, theorem71_instance, LChoice, RunConfig};
use mtfitt::refinement::{project_theta, s_refine, unrefine, MultiplierTable};
use mtfitt::tower::{generate_distribution, GeneratorOptions, HeckeData, RayClassDistribution, TowerModel, TowerSpec};
use mtfitt::{FiniteAbelianGroup, PadicContext};
use proptest::prelude::*;

fn tower(caps: (u32, u32), delta: Vec<u64>) -> (Arc<TowerModel>, HeckeData) {
    let t = Arc::new(TowerModel::build(TowerSpec::new(5, 5, caps, delta)).unwrap());
    let h = HeckeData::from_ap(t.ctx(), 3).unwrap();
    (t, h)
}

#[test]
fn distribution_json_survives_refinement() {
    let (t, h) = tower((2, 1), vec![2]);
    let d = generate_distribution(t, &h, 11, GeneratorOptions::default()).unwrap();
    let fam = s_refine(&d, &h).unwrap();
    let text = fam.family.to_json().unwrap();
    let back = RayClassDistribution::from_json(&text).unwrap();
    assert_eq!(back, fam.family);
    let again = unrefine(&mtfitt::refinement::RefinedFamily { family: back, hecke: h }).unwrap();
    assert_eq!(again, d);
}

#[test]
fn module_json_round_trip() {
    let k = PadicContext::new(5, 3).unwrap();
    let r = Ring::new(Arc::new(FiniteAbelianGroup::new(vec![5, 5]).unwrap()), k);
    let x = omega(&r.group, k, 0, 1);
    let m = PresentedModule::from_rows(r.clone(), 2, vec![vec![x.clone(), r.one()], vec![r.zero(), x]]).unwrap();
    let back = PresentedModule::from_json(&m.to_json().unwrap()).unwrap();
    assert!(fitting_ideal(&back).equal(&fitting_ideal(&m)).unwrap());
    assert_eq!(back.rows(), 2);
}

#[test]
fn projected_theta_matches_multiplier() {
    let (t, h) = tower((3, 2), vec![]);
    let table = MultiplierTable::build(t.clone(), &h).unwrap();
    let d = generate_distribution(t, &h, 5, GeneratorOptions::default()).unwrap();
    let fam = s_refine(&d, &h).unwrap();
    for (n, m) in [(1, 1), (2, 1), (2, 0)] {
        let theta = project_theta(&d, n, m).unwrap().value;
        let theta_s = project_theta(&fam.family, n, m).unwrap().value;
        assert_eq!(theta, &table.b(n, m).unwrap().element * &theta_s);
    }
}

#[test]
fn chain_on_a_trivial_tame_group() {
    let (t, h) = tower((2, 3), vec![]);
    for choice in [LChoice::One, LChoice::Random] {
        let rep = theorem71_instance(&t, &h, 9, choice, None);
        assert!(rep.passed(), "{}", rep.to_text());
    }
}

#[test]
fn default_config_file_round_trips() {
    let c = RunConfig::default();
    assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn principal_ideal_of_a_unit_multiple(c in 1i128..125, e0 in 0u64..5, e1 in 0u64..5) {
        prop_assume!(c % 5 != 0);
        let k = PadicContext::new(5, 3).unwrap();
        let g = Arc::new(FiniteAbelianGroup::new(vec![5, 5]).unwrap());
        let x = &omega(&g, k, 0, 1) * &GroupRingElement::delta_exps(g.clone(), k, &[e0, e1]);
        let a = IdealLattice::principal(x.clone());
        let b = IdealLattice::principal(x.scale(&k.reduce(c)));
        prop_assert!(a.equal(&b).unwrap());
        let m = PresentedModule::cyclic(x.clone());
        let chk = conjecture_check(&x.scale(&k.reduce(c)), &m).unwrap();
        prop_assert!(chk.membership && chk.generates);
    }
}
