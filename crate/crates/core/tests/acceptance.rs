//! Acceptance run: one line per criterion, exact arithmetic mod p^N.
//!
//! The Euler-factor unit criterion is known to fail for residues of alpha
//! with alpha^k = 1 (or alpha = z + 1/z for the trinomial); that line is
//! printed as FAIL and the run only requires every failure to match the
//! predicted obstruction set.

use std::process::ExitCode;

use mtfitt::pipeline::{run_suites, RunConfig, Status, VerificationReport};

const TOLERANCE: &str = "exact mod p^N";

fn run(c: RunConfig) -> VerificationReport {
    run_suites(&c).unwrap_or_else(|e| panic!("config rejected: {e}"))
}

fn cfg(suites: &[&str]) -> RunConfig {
    RunConfig {
        suites: suites.iter().map(|s| s.to_string()).collect(),
        ..RunConfig::default()
    }
}

fn deltas() -> [Vec<u64>; 3] {
    [vec![], vec![2], vec![4]]
}

/// 50 seeds split over the three tame groups at caps (2,2).
fn spread(suite: &str) -> VerificationReport {
    let mut rep = VerificationReport::new();
    for (i, (delta, seeds)) in deltas().into_iter().zip([17u64, 17, 16]).enumerate() {
        rep.extend(run(RunConfig {
            delta,
            seed: 1000 * i as u64,
            seeds,
            ..cfg(&[suite])
        }));
    }
    rep
}

fn count(rep: &VerificationReport, s: Status) -> usize {
    rep.records.iter().filter(|r| r.status == s).count()
}

struct Line {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report_line(name: &'static str, rep: &VerificationReport) -> Line {
    Line {
        name,
        pass: rep.passed() && !rep.records.is_empty(),
        detail: format!(
            "{} checks, {} failed, {} info",
            rep.records.len(),
            count(rep, Status::Fail),
            count(rep, Status::Info)
        ),
    }
}

fn main() -> ExitCode {
    let mut lines = Vec::new();
    let mut explained_only = Vec::new();

    // Euler-factor units
    let units = run(RunConfig { samples: 100, ..cfg(&["units"]) });
    let explained = units
        .failures()
        .all(|r| r.witness["explained"] == true && r.witness["det_mismatches"] == 0);
    let dets_ok = units
        .records
        .iter()
        .all(|r| r.witness.get("det_mismatches").is_none_or(|v| *v == 0));
    let mut l = report_line("euler-factor units and determinant oracle", &units);
    l.detail.push_str(&format!("; determinants match oracle: {dets_ok}; failures match predicted residues: {explained}"));
    if !l.pass {
        explained_only.push((l.name, explained && dets_ok));
    }
    lines.push(l);

    // norm relations of generated families, with perturbation controls
    let haran = spread("haran");
    let controls = haran.records.iter().filter(|r| r.id.ends_with("/perturbed")).count();
    let mut l = report_line("norm relations on 50 generated families", &haran);
    l.detail.push_str(&format!("; perturbation controls: {controls}"));
    l.pass &= controls == 50;
    lines.push(l);

    lines.push(report_line("refined families are norm compatible", &spread("refine")));

    // multipliers across several cap shapes
    let mut mult = VerificationReport::new();
    for caps in [(3, 3), (4, 1), (1, 4), (2, 2)] {
        for delta in deltas() {
            mult.extend(run(RunConfig { caps, delta, seeds: 3, ..cfg(&["multipliers"]) }));
        }
    }
    let excluded_info = mult
        .records
        .iter()
        .filter(|r| r.id.ends_with("B(1,0)") || r.id.ends_with("B(0,1)"))
        .all(|r| r.status == Status::Info);
    let mut l = report_line("refinement multipliers, units and constant terms", &mult);
    l.pass &= excluded_info;
    lines.push(l);

    let mut ideal = spread("theta-ideal");
    ideal.extend(run(RunConfig { caps: (3, 3), seeds: 3, ..cfg(&["theta-ideal"]) }));
    let controls = ideal.records.iter().filter(|r| r.id.ends_with("/control")).count();
    let mut l = report_line("projected and refined elements generate the same ideal", &ideal);
    l.detail.push_str(&format!("; negative controls: {controls}"));
    lines.push(l);

    let fitting = run(RunConfig { samples: 100, ..cfg(&["fitting"]) });
    lines.push(report_line("Fitting ideals under quotients, presentations and sums", &fitting));

    let chain = run(RunConfig { caps: (3, 3), delta: vec![2], seeds: 20, ..cfg(&["theorem71"]) });
    let levels = chain.records.iter().filter(|r| r.id.contains("/level=")).count();
    let mut l = report_line("finite-level chain over 20 seeds", &chain);
    l.detail.push_str(&format!("; level checks: {levels}"));
    l.pass &= levels == 20 * 7;
    lines.push(l);

    let all = RunConfig::default();
    let a = run(all.clone()).to_json();
    let b = run(all).to_json();
    lines.push(Line {
        name: "reports are byte-identical across runs",
        pass: a == b,
        detail: format!("{} bytes", a.len()),
    });

    let mut ok = true;
    for l in &lines {
        println!(
            "{} {}: {} [tolerance: {TOLERANCE}]",
            if l.pass { "PASS" } else { "FAIL" },
            l.name,
            l.detail
        );
        if !l.pass {
            let known = explained_only.iter().any(|(n, e)| *n == l.name && *e);
            if known {
                println!("     known failure: every non-unit matches the predicted residues of alpha");
            } else {
                ok = false;
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
