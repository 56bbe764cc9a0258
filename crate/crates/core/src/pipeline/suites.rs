//! The verification suites behind `mtfitt suites`.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::fitting::{fitting_ideal, project_ideal, quotient_base_change, PresentedModule, Ring, RingMap};
use crate::group::FiniteAbelianGroup;
use crate::group_ring::{omega, GroupRingElement};
use crate::padic::{PadicContext, PadicInt};
use crate::pipeline::config::RunConfig;
use crate::pipeline::harness::{compare_scalars, harness_levels, theorem71_instance, LChoice, Proportionality};
use crate::pipeline::report::{CheckRecord, Status, VerificationReport};
use crate::pipeline::sampling::{random_unit_scalar, sparse_element};
use crate::refinement::{
    check_theta_ideal_equality, euler_factor, s_refine, trinomial, unrefine, verify_refined_compat,
    MultiplierTable, RefinedFamily,
};
use crate::tower::{
    generate_distribution, verify_haran_relations, GeneratorOptions, HeckeData, ModulusIndex, Prime,
    RayClassDistribution, TowerModel,
};

/// Shared state for one run.
struct Run {
    config: RunConfig,
    tower: Arc<TowerModel>,
    hecke: HeckeData,
}

impl Run {
    fn dist(&self, seed: u64) -> Result<RayClassDistribution> {
        generate_distribution(self.tower.clone(), &self.hecke, seed, GeneratorOptions::default())
    }
}

fn error_record(id: String, anchor: &str, e: &Error) -> CheckRecord {
    CheckRecord::new(id, anchor, Status::Fail).witness(json!({ "error": e.to_string() }))
}

/// Runs the suites named in the configuration, in canonical order.
///
/// Configuration problems are returned as errors; mathematical failures
/// become failing records.
pub fn run_suites(config: &RunConfig) -> Result<VerificationReport> {
    config.validate()?;
    let run = Run {
        config: config.clone(),
        tower: Arc::new(config.tower()?),
        hecke: config.hecke_data()?,
    };
    let mut report = VerificationReport::new();
    for &name in crate::pipeline::config::SUITES {
        if !config.suites.iter().any(|s| s == name) {
            continue;
        }
        let start = Instant::now();
        let mut part = match name {
            "units" => units(&run),
            "haran" => haran(&run),
            "refine" => refine(&run),
            "multipliers" => multipliers(&run),
            "theta-ideal" => theta_ideal(&run),
            "fitting" => fitting(&run),
            "theorem71" => theorem71(&run),
            "scalars" => scalars(&run),
            _ => unreachable!("validated suite name"),
        };
        let ms = start.elapsed().as_millis();
        for r in &mut part.records {
            r.runtime_ms = Some(ms);
        }
        report.extend(part);
    }
    Ok(report)
}

fn sample_alphas(k: PadicContext, rng: &mut ChaCha8Rng, n: usize, avoid_one: bool) -> Vec<PadicInt> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let a = random_unit_scalar(k, rng);
        if avoid_one && a.value() % k.p() == 1 {
            continue;
        }
        out.push(a);
    }
    out
}

fn pow_mod(b: u64, e: u64, m: u64) -> u64 {
    (0..e).fold(1 % m, |acc, _| acc * b % m)
}

/// Residues `r` of `alpha` modulo `p` for which `1 - alpha^{-1}[s]` fails to
/// be a unit on a cyclic group of order `k`: exactly those with `r^k = 1`.
fn cyclic_obstructions(p: u64, k: u64) -> BTreeSet<u64> {
    (2..p).filter(|&r| pow_mod(r, k, p) == 1).collect()
}

/// Residues `r` for which `1 - r^{-1}(z + z^{-1})` vanishes for some `d`-th
/// root of unity `z` in `F_p` (`d` divides `p - 1`).
fn trinomial_obstructions(p: u64, d: u64) -> BTreeSet<u64> {
    (1..p)
        .filter(|&z| pow_mod(z, d, p) == 1)
        .map(|z| (z + pow_mod(z, p - 2, p)) % p)
        .filter(|&r| r != 0)
        .collect()
}

fn unit_family_record(
    id: String,
    alphas: &[PadicInt],
    predicted: &BTreeSet<u64>,
    build: impl Fn(PadicInt) -> Result<(GroupRingElement, Option<PadicInt>)>,
) -> CheckRecord {
    let p = alphas.first().map_or(2, |a| a.ctx().p());
    let mut failing = BTreeSet::new();
    let mut det_mismatches = 0usize;
    let mut non_units = 0usize;
    let mut sampled = BTreeSet::new();
    for &a in alphas {
        let r = a.value() % p;
        sampled.insert(r);
        let (x, oracle) = match build(a) {
            Ok(v) => v,
            Err(e) => return error_record(id, "unit-euler-factor", &e),
        };
        if !x.is_unit() {
            non_units += 1;
            failing.insert(r);
        }
        if let Some(o) = oracle {
            let det = match x.det_multiplication() {
                Ok(d) => d,
                Err(Error::PrecisionExhausted { .. }) => a.ctx().zero(),
                Err(e) => return error_record(id, "unit-euler-factor", &e),
            };
            if det != o {
                det_mismatches += 1;
            }
        }
    }
    let expected: BTreeSet<u64> = predicted.intersection(&sampled).copied().collect();
    CheckRecord::new(id, "unit-euler-factor", Status::from_bool(non_units == 0 && det_mismatches == 0))
        .param("samples", alphas.len())
        .witness(json!({
            "non_units": non_units,
            "det_mismatches": det_mismatches,
            "failing_residues": failing,
            "predicted_residues": expected,
            "explained": failing == expected && det_mismatches == 0,
        }))
}

fn units(run: &Run) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let c = &run.config;
    let k = run.tower.ctx();
    let p = k.p();
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let alphas = sample_alphas(k, &mut rng, c.samples, true);

    // cyclic models of the first layer, sigma a generator
    for order in [1u64, 2, 3, 4] {
        if order % p == 0 {
            continue;
        }
        let g = Arc::new(FiniteAbelianGroup::cyclic(order).expect("small cyclic group"));
        let s = g.index_of(&[1 % order]);
        let record = unit_family_record(
            format!("units/cyclic={order}/linear"),
            &alphas,
            &cyclic_obstructions(p, order),
            |a| {
                let ainv = a.invert()?;
                let x = &GroupRingElement::one(g.clone(), k) - &GroupRingElement::delta(g.clone(), k, s).scale(&ainv);
                Ok((x, Some(k.one() - ainv.pow(order))))
            },
        );
        rep.push(record.param("order", order));
        let record = unit_family_record(
            format!("units/cyclic={order}/euler"),
            &alphas,
            &cyclic_obstructions(p, order),
            |a| {
                let ainv = a.invert()?;
                Ok((euler_factor(&g, a, s)?, Some((k.one() - ainv.pow(order)).pow(2))))
            },
        );
        rep.push(record.param("order", order));
    }

    // trinomials on Z/p^n x Z/d with sigma = (1, 1)
    let all = sample_alphas(k, &mut rng, c.samples, false);
    for n in 0..=2u32 {
        for d in [1u64, 2, 4] {
            if !(p - 1).is_multiple_of(d) {
                continue;
            }
            let mut f = vec![p.pow(n)];
            f.push(d);
            let g = Arc::new(FiniteAbelianGroup::new(f).expect("small group"));
            let s = g.index_of(&[1 % p.pow(n), 1 % d]);
            let record = unit_family_record(
                format!("units/trinomial/n={n}/delta={d}"),
                &all,
                &trinomial_obstructions(p, d),
                |a| Ok((trinomial(&g, a, s)?, None)),
            );
            rep.push(record.param("n", n).param("delta", d));
        }
    }

    // the factors used with the configured Hecke data
    let h = &run.hecke;
    let mut bad = Vec::new();
    for idx in run.tower.indices() {
        for v in [Prime::P, Prime::Q] {
            if idx.exponent(v) > 0 {
                continue;
            }
            let g = run.tower.group(idx);
            let s = run.tower.sigma(idx, v);
            let ok = euler_factor(g, h.alpha(v), s).map(|e| e.is_unit()).unwrap_or(false);
            if !ok {
                bad.push(format!("{idx}/{v:?}"));
            }
        }
    }
    let tri = trinomial(run.tower.group(ModulusIndex::new(0, 0)), h.alpha_p, run.tower.sigma(ModulusIndex::new(0, 0), Prime::P))
        .map(|x| x.is_unit())
        .unwrap_or(false);
    rep.push(
        CheckRecord::new("units/configured", "unit-euler-factor", Status::from_bool(bad.is_empty()))
            .param("a_p", c.resolved_ap().unwrap_or(c.a_p))
            .witness(json!({
                "non_unit_euler_factors": bad,
                "alpha_mod_p": h.alpha_p.value() % p,
                "base_trinomial_unit": tri,
            })),
    );
    rep
}

fn perturb(dist: &RayClassDistribution, rng: &mut ChaCha8Rng) -> Result<RayClassDistribution> {
    let t = &dist.tower;
    let indices = t.indices();
    let choices: Vec<ModulusIndex> = if indices.len() > 1 { indices[1..].to_vec() } else { indices };
    let idx = choices[rng.gen_range(0..choices.len())];
    let mut x = dist.get(idx)?.clone();
    let k = t.ctx();
    let i = rng.gen_range(0..x.group().order());
    let bump = k.reduce(rng.gen_range(1..k.modulus()) as i128);
    x.set_coeff(i, x.coeff(i) + bump);
    let mut out = dist.clone();
    out.insert(idx, x)?;
    Ok(out)
}

fn haran(run: &Run) -> VerificationReport {
    let mut rep = VerificationReport::new();
    for seed in run.config.seed_list() {
        let id = format!("haran/seed={seed}");
        let res = (|| -> Result<Vec<CheckRecord>> {
            let d = run.dist(seed)?;
            let r = verify_haran_relations(&d, &run.hecke)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let bad = verify_haran_relations(&perturb(&d, &mut rng)?, &run.hecke)?;
            Ok(vec![
                CheckRecord::new(id.clone(), "haran-norm-relations", Status::from_bool(r.all_pass()))
                    .param("seed", seed)
                    .param("relations", r.checks.len())
                    .witness(json!({ "failures": r.failures() })),
                CheckRecord::new(format!("{id}/perturbed"), "haran-norm-relations", Status::from_bool(!bad.all_pass()))
                    .param("seed", seed)
                    .witness(json!({ "detected_failures": bad.failures() })),
            ])
        })();
        match res {
            Ok(rs) => rs.into_iter().for_each(|r| rep.push(r)),
            Err(e) => rep.push(error_record(id, "haran-norm-relations", &e)),
        }
    }
    rep
}

fn refine(run: &Run) -> VerificationReport {
    let mut rep = VerificationReport::new();
    for seed in run.config.seed_list() {
        let id = format!("refine/seed={seed}");
        let res = (|| -> Result<CheckRecord> {
            let d = run.dist(seed)?;
            let fam = s_refine(&d, &run.hecke)?;
            let compat = verify_refined_compat(&fam)?;
            let back = unrefine(&fam)? == d;
            Ok(CheckRecord::new(id.clone(), "refined-norm-compat", Status::from_bool(compat.all_pass() && back))
                .param("seed", seed)
                .witness(json!({ "failures": compat.failures(), "round_trip": back })))
        })();
        rep.push(res.unwrap_or_else(|e| error_record(id, "refined-norm-compat", &e)));
    }
    rep
}

fn multipliers(run: &Run) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let table = match MultiplierTable::build(run.tower.clone(), &run.hecke) {
        Ok(t) => t,
        Err(e) => {
            rep.push(error_record("multipliers/table".into(), "refinement-multiplier", &e));
            return rep;
        }
    };
    for seed in run.config.seed_list() {
        let id = format!("multipliers/seed={seed}");
        let res = (|| -> Result<CheckRecord> {
            let d = run.dist(seed)?;
            let fam = s_refine(&d, &run.hecke)?;
            let mut bad = Vec::new();
            for idx in run.tower.indices() {
                if *d.get(idx)? != table.c(idx)? * fam.get(idx)? {
                    bad.push(idx.to_string());
                }
            }
            Ok(CheckRecord::new(id.clone(), "refinement-multiplier", Status::from_bool(bad.is_empty()))
                .param("seed", seed)
                .witness(json!({ "mismatched_indices": bad })))
        })();
        rep.push(res.unwrap_or_else(|e| error_record(id, "refinement-multiplier", &e)));
    }

    let h = &run.hecke;
    let p = run.tower.p();
    let (ca, cb) = run.tower.caps();
    for (n, m) in harness_levels(&run.tower) {
        let id = format!("multipliers/B({n},{m})");
        let excluded = (n, m) == (1, 0) || (n, m) == (0, 1);
        match table.b(n, m) {
            Ok(b) => {
                let status = if excluded { Status::Info } else { Status::from_bool(b.unit && b.unit_by_det) };
                rep.push(
                    CheckRecord::new(id, "refinement-multiplier", status)
                        .param("n", n)
                        .param("m", m)
                        .witness(json!({
                            "constant_term": b.constant_term,
                            "unit": b.unit,
                            "unit_by_det": b.unit_by_det,
                        })),
                );
            }
            Err(e) => rep.push(error_record(id, "refinement-multiplier", &e)),
        }
    }
    for n in 1..ca {
        for m in 1..cb {
            let id = format!("multipliers/constant-term({n},{m})");
            let res = (|| -> Result<CheckRecord> {
                let actual = table.b(n, m)?.constant_term;
                let predicted = table.predicted_constant_term(n, m)?;
                let literal = h.alpha_p.pow(n as u64 - 1) * h.alpha_q.pow(m as u64 - 1);
                Ok(CheckRecord::new(id.clone(), "refinement-multiplier", Status::from_bool(actual == predicted))
                    .param("n", n)
                    .param("m", m)
                    .witness(json!({
                        "actual": actual,
                        "predicted": predicted,
                        "mod_p": actual.value() % p,
                        "leading_alpha_power_mod_p": (h.alpha_p.pow(n as u64 + 1) * h.alpha_q.pow(m as u64 + 1)).value() % p,
                        "shifted_leading_term_mod_p": literal.value() % p,
                    })))
            })();
            rep.push(res.unwrap_or_else(|e| error_record(id, "refinement-multiplier", &e)));
        }
    }
    for (v, cap) in [(Prime::P, ca), (Prime::Q, cb)] {
        for a in 2..=cap {
            let id = format!("multipliers/edge-augmentation/{v:?}/{a}");
            let res = (|| -> Result<CheckRecord> {
                let idx = match v {
                    Prime::P => ModulusIndex::new(a, 0),
                    Prime::Q => ModulusIndex::new(0, a),
                };
                let actual = table.c(idx)?.augmentation();
                let predicted = table.predicted_edge_augmentation(v, a)?;
                Ok(CheckRecord::new(id.clone(), "refinement-multiplier", Status::from_bool(actual == predicted))
                    .param("a", a)
                    .witness(json!({ "actual": actual, "predicted": predicted })))
            })();
            rep.push(res.unwrap_or_else(|e| error_record(id, "refinement-multiplier", &e)));
        }
    }
    rep
}

fn theta_ideal(run: &Run) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let table = match MultiplierTable::build(run.tower.clone(), &run.hecke) {
        Ok(t) => t,
        Err(e) => {
            rep.push(error_record("theta-ideal/table".into(), "stabilized-ideal-equality", &e));
            return rep;
        }
    };
    let levels = harness_levels(&run.tower);
    let k = run.tower.ctx();
    for seed in run.config.seed_list() {
        let id = format!("theta-ideal/seed={seed}");
        let res = (|| -> Result<Vec<CheckRecord>> {
            let d = run.dist(seed)?;
            let fam = s_refine(&d, &run.hecke)?;
            let mut out = Vec::new();
            for &(n, m) in &levels {
                let r = check_theta_ideal_equality(&d, &fam, &table, n, m)?;
                let ok = r.ideal_equal && r.b_relation;
                out.push(
                    CheckRecord::new(format!("{id}/level=({n},{m})"), "stabilized-ideal-equality", Status::from_bool(ok))
                        .param("seed", seed)
                        .param("n", n)
                        .param("m", m)
                        .witness(r),
                );
            }
            // scaling the refined family by p must break the equality
            if let Some(&(n, m)) = levels.last() {
                let mut scaled = RayClassDistribution::new(run.tower.clone());
                let pk = k.reduce(k.p() as i128);
                for idx in run.tower.indices() {
                    scaled.insert(idx, fam.get(idx)?.scale(&pk))?;
                }
                let control = RefinedFamily { family: scaled, hecke: fam.hecke };
                let r = check_theta_ideal_equality(&d, &control, &table, n, m)?;
                out.push(
                    CheckRecord::new(format!("{id}/control"), "stabilized-ideal-equality", Status::from_bool(!r.ideal_equal))
                        .param("seed", seed)
                        .param("n", n)
                        .param("m", m)
                        .witness(json!({ "control_detected": !r.ideal_equal })),
                );
            }
            Ok(out)
        })();
        match res {
            Ok(rs) => rs.into_iter().for_each(|r| rep.push(r)),
            Err(e) => rep.push(error_record(id, "stabilized-ideal-equality", &e)),
        }
    }
    rep
}

fn random_module(r: &Ring, rng: &mut ChaCha8Rng, max_cols: usize) -> PresentedModule {
    let cols = rng.gen_range(1..=max_cols);
    let rows = rng.gen_range(1..=max_cols);
    let entries = (0..rows * cols)
        .map(|_| {
            let terms = rng.gen_range(0..=3);
            sparse_element(&r.group, r.ctx, rng, terms)
        })
        .collect();
    PresentedModule::new(r.clone(), rows, cols, entries).expect("shapes agree")
}

/// The three quotient ideals used for base change on `Z/p^2 x Z/p^2`.
fn quotient_ideals(r: &Ring) -> Vec<(&'static str, Vec<GroupRingElement>)> {
    let g = &r.group;
    let (gp, gq) = (g.index_of(&[1, 0]), g.index_of(&[0, 1]));
    vec![
        ("omega1(P)", vec![omega(g, r.ctx, 1, gp)]),
        ("omega1(Q)", vec![omega(g, r.ctx, 1, gq)]),
        ("omega1(P),omega1(Q)", vec![omega(g, r.ctx, 1, gp), omega(g, r.ctx, 1, gq)]),
    ]
}

fn fitting(run: &Run) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let c = &run.config;
    let k = run.tower.ctx();
    let p = k.p();
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);

    let big = Ring::new(Arc::new(FiniteAbelianGroup::new(vec![p * p, p * p]).expect("valid")), k);
    let ideals = quotient_ideals(&big);
    for (t, (name, ideal)) in ideals.iter().enumerate() {
        let count = (c.samples + ideals.len() - 1 - t) / ideals.len();
        let mut failures = Vec::new();
        let mut errors = Vec::new();
        for i in 0..count {
            let m = random_module(&big, &mut rng, 4);
            let res = (|| -> Result<bool> {
                let (q, hom) = quotient_base_change(&m, ideal)?;
                project_ideal(&fitting_ideal(&m), &RingMap::hom(hom))?.equal(&fitting_ideal(&q))
            })();
            match res {
                Ok(true) => {}
                Ok(false) => failures.push(i),
                Err(e) => errors.push(e.to_string()),
            }
        }
        rep.push(
            CheckRecord::new(format!("fitting/quotient/{name}"), "fitting-quotient", Status::from_bool(failures.is_empty() && errors.is_empty()))
                .param("ideal", *name)
                .param("samples", count)
                .witness(json!({ "failing_samples": failures, "errors": errors })),
        );
    }

    let small = Ring::new(Arc::new(FiniteAbelianGroup::new(vec![p, p]).expect("valid")), k);
    let mut indep = 0usize;
    let mut sums = 0usize;
    let n = c.samples;
    for _ in 0..n {
        let m = random_module(&small, &mut rng, 2);
        // adding a combination of existing relations keeps the module
        let coeffs: Vec<GroupRingElement> = (0..m.rows()).map(|_| sparse_element(&small.group, k, &mut rng, 2)).collect();
        let extra: Vec<GroupRingElement> = (0..m.cols())
            .map(|j| (0..m.rows()).fold(small.zero(), |acc, i| &acc + &(&coeffs[i] * m.entry(i, j))))
            .collect();
        let ok = m
            .with_rows(vec![extra])
            .and_then(|m2| fitting_ideal(&m2).equal(&fitting_ideal(&m)))
            .unwrap_or(false);
        indep += usize::from(!ok);
        let m2 = random_module(&small, &mut rng, 2);
        let ok = m
            .direct_sum(&m2)
            .and_then(|s| fitting_ideal(&m).product(&fitting_ideal(&m2))?.equal(&fitting_ideal(&s)))
            .unwrap_or(false);
        sums += usize::from(!ok);
    }
    rep.push(
        CheckRecord::new("fitting/presentation-independence", "fitting-invariance", Status::from_bool(indep == 0))
            .param("samples", n)
            .witness(json!({ "failures": indep })),
    );
    rep.push(
        CheckRecord::new("fitting/direct-sum", "fitting-invariance", Status::from_bool(sums == 0))
            .param("samples", n)
            .witness(json!({ "failures": sums })),
    );
    rep
}

fn theorem71(run: &Run) -> VerificationReport {
    let mut rep = VerificationReport::new();
    for seed in run.config.seed_list() {
        rep.extend(theorem71_instance(&run.tower, &run.hecke, seed, LChoice::Random, None));
    }
    rep
}

fn scalars(run: &Run) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let k = run.tower.ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(run.config.seed);
    let g = run.tower.p_part_group(run.tower.caps().0.saturating_sub(1), run.tower.caps().1.saturating_sub(1));
    let x = sparse_element(&g, k, &mut rng, 4);
    let u = random_unit_scalar(k, &mut rng);
    let pk = k.reduce(k.p() as i128);
    let zero = GroupRingElement::zero(g.clone(), k);
    let cases: Vec<(&str, GroupRingElement, GroupRingElement, &str)> = vec![
        ("unit-multiple", x.scale(&u), x.clone(), "unit"),
        ("p-multiple", x.scale(&pk), x.clone(), "nonunit"),
        ("unrelated", x.clone(), &x + &GroupRingElement::delta(g.clone(), k, 0), "none"),
        ("both-zero", zero.clone(), zero, "indeterminate"),
    ];
    for (name, a, b, expect) in cases {
        let r = compare_scalars(&a, &b);
        let got = match &r {
            Ok(Proportionality::Ratio { unit: true, .. }) => "unit",
            Ok(Proportionality::Ratio { unit: false, .. }) => "nonunit",
            Ok(Proportionality::NotProportional) => "none",
            Err(Error::IndeterminateWhenBothZero) => "indeterminate",
            Err(_) => "error",
        };
        let witness = match r {
            Ok(v) => serde_json::to_value(v).expect("serializes"),
            Err(e) => json!(e.to_string()),
        };
        rep.push(
            CheckRecord::new(format!("scalars/{name}"), "scalar-comparison", Status::from_bool(got == expect))
                .param("expected", expect)
                .witness(witness),
        );
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(suites: &[&str]) -> RunConfig {
        RunConfig {
            prec: 6,
            seeds: 2,
            samples: 12,
            suites: suites.iter().map(|s| s.to_string()).collect(),
            ..RunConfig::default()
        }
    }

    #[test]
    fn obstruction_sets() {
        assert_eq!(cyclic_obstructions(5, 1), BTreeSet::new());
        assert_eq!(cyclic_obstructions(5, 2), BTreeSet::from([4]));
        assert_eq!(cyclic_obstructions(5, 4), BTreeSet::from([2, 3, 4]));
        assert_eq!(trinomial_obstructions(5, 1), BTreeSet::from([2]));
        assert_eq!(trinomial_obstructions(5, 2), BTreeSet::from([2, 3]));
        assert_eq!(trinomial_obstructions(5, 4), BTreeSet::from([2, 3]));
    }

    #[test]
    fn default_suites_pass_except_units() {
        let rep = run_suites(&config(&["haran", "refine", "multipliers", "theta-ideal", "theorem71", "scalars"])).unwrap();
        assert!(rep.passed(), "{}", rep.to_text());
    }

    #[test]
    fn fitting_suite_passes() {
        let rep = run_suites(&config(&["fitting"])).unwrap();
        assert!(rep.passed(), "{}", rep.to_text());
    }

    #[test]
    fn unit_failures_are_explained() {
        let rep = run_suites(&config(&["units"])).unwrap();
        for r in &rep.records {
            if r.id != "units/configured" {
                assert_eq!(r.witness["explained"], true, "{}", r.id);
            } else {
                assert_eq!(r.status, Status::Pass);
            }
        }
    }

    #[test]
    fn empty_selection() {
        let rep = run_suites(&config(&[])).unwrap();
        assert!(rep.records.is_empty() && rep.passed());
    }

    #[test]
    fn deterministic_json() {
        let c = config(&["haran", "scalars"]);
        assert_eq!(run_suites(&c).unwrap().to_json(), run_suites(&c).unwrap().to_json());
    }

    #[test]
    fn alpha_two_breaks_edge_units() {
        let c = RunConfig { a_p: 2, ..config(&["units"]) };
        let rep = run_suites(&c).unwrap();
        let r = rep.records.iter().find(|r| r.id == "units/configured").unwrap();
        assert_eq!(r.witness["base_trinomial_unit"], false);
    }
}
