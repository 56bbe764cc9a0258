use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use mtfitt::fitting::{fitting_ideal, quotient_base_change, IdealLattice, PresentedModule};
use mtfitt::group_ring::{omega, GroupRingElement};
use mtfitt::pipeline::{
    compare_scalars, conjecture_check, run_suites, theorem71_instance, CheckRecord, LChoice, Proportionality,
    RunConfig, Status, VerificationReport,
};
use mtfitt::refinement::{s_refine, unrefine, RefinedFamily};
use mtfitt::theta::SymbolTable;
use mtfitt::tower::{generate_distribution, verify_haran_relations, GeneratorOptions, RayClassDistribution};
use mtfitt::Error;

#[derive(Parser, Debug)]
#[command(name = "mtfitt", version, about = "Finite-level group rings, refined distributions and Fitting ideals")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Residue characteristic.
    #[arg(long = "p", global = true)]
    p: Option<u64>,
    /// p-adic precision N.
    #[arg(long, global = true)]
    prec: Option<u32>,
    /// Tower caps as "A,B".
    #[arg(long, global = true, value_parser = parse_caps)]
    caps: Option<(u32, u32)>,
    /// Orders of the cyclic factors of the tame group, e.g. "2" or "2,2"; "1" for trivial.
    #[arg(long, global = true, value_parser = parse_delta)]
    delta: Option<Delta>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Hecke eigenvalue a_p.
    #[arg(long, global = true, allow_hyphen_values = true)]
    ap: Option<i64>,
    /// Input file; repeat for commands taking two inputs.
    #[arg(long = "in", global = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Debug)]
struct Delta(Vec<u64>);

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Choice {
    Random,
    One,
    Omega,
}

impl From<Choice> for LChoice {
    fn from(c: Choice) -> Self {
        match c {
            Choice::Random => LChoice::Random,
            Choice::One => LChoice::One,
            Choice::Omega => LChoice::Omega,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the verification suites.
    Suites {
        /// Comma-separated suite names; defaults to the configuration.
        #[arg(long, value_delimiter = ',')]
        suite: Option<Vec<String>>,
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run the top-to-finite-level Fitting ideal chain.
    Theorem71 {
        #[arg(long)]
        seeds: Option<u64>,
        /// How to pick the top-level element when no distribution is given.
        #[arg(long = "l", value_enum, default_value_t = Choice::Random)]
        l_choice: Choice,
    },
    /// Refine a distribution (or undo a refinement with --inverse).
    Refine {
        #[arg(long)]
        inverse: bool,
    },
    /// Check the norm relations of a distribution.
    VerifyDist,
    /// Write a seeded distribution satisfying the norm relations.
    GenerateDist {
        /// Skip the random norm-zero noise added at each step.
        #[arg(long)]
        no_noise: bool,
    },
    /// Fitting ideal of a presented module, optionally after a quotient.
    Fitting {
        /// Base change to the level "n,m" (ideal generated by omega_n, omega_m on the first two factors).
        #[arg(long, value_parser = parse_caps)]
        quotient: Option<(u32, u32)>,
        /// Group-ring element to test against the Fitting ideal.
        #[arg(long)]
        theta: Option<PathBuf>,
    },
    /// Build the one-variable element from a symbol table.
    Theta1,
    /// Compare two elements up to a scalar.
    #[command(name = "compare-L")]
    CompareL,
}

fn parse_caps(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected \"A,B\", got {s:?}"))?;
    let a = a.trim().parse().map_err(|_| format!("bad value {a:?}"))?;
    let b = b.trim().parse().map_err(|_| format!("bad value {b:?}"))?;
    Ok((a, b))
}

fn parse_delta(s: &str) -> Result<Delta, String> {
    let s = s.trim();
    if s.is_empty() || s == "trivial" {
        return Ok(Delta(Vec::new()));
    }
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<u64>().map_err(|_| format!("bad order {x:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Delta(v.into_iter().filter(|&d| d != 1).collect()))
}

/// A failure that is not a mathematical check: bad input, IO, config.
struct Usage(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.into())
    }
}

type CliResult<T> = std::result::Result<T, Usage>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_config(g: &Global) -> CliResult<RunConfig> {
    let mut c = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(p) = g.p {
        c.p = p;
    }
    if let Some(n) = g.prec {
        c.prec = n;
    }
    if let Some(caps) = g.caps {
        c.caps = caps;
    }
    if let Some(d) = &g.delta {
        c.delta = d.0.clone();
    }
    if let Some(s) = g.seed {
        c.seed = s;
    }
    if let Some(a) = g.ap {
        c.a_p = a;
        c.hecke = None;
    }
    Ok(c)
}

fn input(g: &Global, i: usize) -> CliResult<&Path> {
    g.inputs
        .get(i)
        .map(PathBuf::as_path)
        .ok_or_else(|| Usage(anyhow!("missing --in (expected {} input file(s))", i + 1)))
}

fn read(path: &Path) -> CliResult<String> {
    Ok(std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)
}

fn emit(g: &Global, body: &str) -> CliResult<()> {
    match &g.out {
        Some(p) => std::fs::write(p, body).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{body}"),
    }
    Ok(())
}

fn emit_report(g: &Global, cfg: Option<&RunConfig>, rep: &VerificationReport) -> CliResult<bool> {
    let body = match g.format {
        Format::Json => rep.to_json(),
        Format::Text => rep.to_text(),
    };
    emit(g, &body)?;
    if let Some(c) = cfg {
        if let Some(p) = &c.output.json {
            std::fs::write(p, rep.to_json()).with_context(|| format!("writing {}", p.display()))?;
        }
        if let Some(p) = &c.output.text {
            std::fs::write(p, rep.to_text()).with_context(|| format!("writing {}", p.display()))?;
        }
    }
    if g.out.is_some() {
        let s = rep.summary();
        eprintln!("{} checks: {} passed, {} failed, {} info", s.total, s.passed, s.failed, s.info);
    }
    Ok(rep.passed())
}

fn emit_value(g: &Global, v: &serde_json::Value, text: impl FnOnce() -> String) -> CliResult<()> {
    let body = match g.format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(v)?),
        Format::Text => text(),
    };
    emit(g, &body)
}

fn read_distribution(g: &Global) -> CliResult<RayClassDistribution> {
    let path = input(g, 0)?;
    RayClassDistribution::from_json(&read(path)?)
        .map_err(|e| Usage(anyhow!("{}: {e}", path.display())))
}

fn hecke_for(dist: &RayClassDistribution, c: &RunConfig) -> CliResult<mtfitt::tower::HeckeData> {
    let ap = c.resolved_ap()?;
    Ok(mtfitt::tower::HeckeData::from_ap(dist.tower.ctx(), ap as i128)?)
}

fn run(cli: Cli) -> CliResult<bool> {
    let g = &cli.global;
    match cli.command {
        Command::Suites { suite, seeds, samples } => {
            let mut c = load_config(g)?;
            if let Some(s) = suite {
                c.suites = s.into_iter().filter(|s| !s.is_empty()).collect();
            }
            if let Some(n) = seeds {
                c.seeds = n;
            }
            if let Some(n) = samples {
                c.samples = n;
            }
            let rep = run_suites(&c)?;
            emit_report(g, Some(&c), &rep)
        }
        Command::Theorem71 { seeds, l_choice } => {
            let mut c = load_config(g)?;
            if let Some(n) = seeds {
                c.seeds = n;
            }
            let supplied = if g.inputs.is_empty() { None } else { Some(read_distribution(g)?) };
            let (tower, h) = match &supplied {
                Some(d) => (d.tower.clone(), hecke_for(d, &c)?),
                None => {
                    c.validate()?;
                    (Arc::new(c.tower()?), c.hecke_data()?)
                }
            };
            let mut rep = VerificationReport::new();
            for seed in c.seed_list() {
                rep.extend(theorem71_instance(&tower, &h, seed, l_choice.into(), supplied.as_ref()));
            }
            emit_report(g, Some(&c), &rep)
        }
        Command::Refine { inverse } => {
            let c = load_config(g)?;
            let d = read_distribution(g)?;
            let h = hecke_for(&d, &c)?;
            let out = if inverse {
                unrefine(&RefinedFamily { family: d, hecke: h })?
            } else {
                s_refine(&d, &h)?.family
            };
            emit(g, &format!("{}\n", out.to_json()?))?;
            Ok(true)
        }
        Command::VerifyDist => {
            let c = load_config(g)?;
            let d = read_distribution(g)?;
            let h = hecke_for(&d, &c)?;
            let r = verify_haran_relations(&d, &h)?;
            let mut rep = VerificationReport::new();
            for check in &r.checks {
                rep.push(
                    CheckRecord::new(
                        format!("relation/{}/{:?}", check.index, check.prime),
                        "haran-norm-relations",
                        Status::from_bool(check.pass),
                    )
                    .param("index", &check.index)
                    .param("prime", check.prime)
                    .witness(json!({
                        "discrepancy_support": check.discrepancy_support,
                        "discrepancy_valuation": check.discrepancy_valuation,
                    })),
                );
            }
            emit_report(g, None, &rep)
        }
        Command::GenerateDist { no_noise } => {
            let c = load_config(g)?;
            c.validate()?;
            let opts = GeneratorOptions { kernel_noise: !no_noise };
            let d = generate_distribution(Arc::new(c.tower()?), &c.hecke_data()?, c.seed, opts)?;
            emit(g, &format!("{}\n", d.to_json()?))?;
            Ok(true)
        }
        Command::Fitting { quotient, theta } => {
            let path = input(g, 0)?;
            let m = PresentedModule::from_json(&read(path)?).map_err(|e| Usage(anyhow!("{}: {e}", path.display())))?;
            let m = match quotient {
                None => m,
                Some((n, k)) => {
                    let grp = m.ring().group.clone();
                    if grp.rank() < 2 {
                        return Err(Usage(anyhow!("--quotient needs a group with at least two factors")));
                    }
                    let ctx = m.ring().ctx;
                    let ideal = [
                        omega(&grp, ctx, n, grp.index_of(&unit_vector(grp.rank(), 0))),
                        omega(&grp, ctx, k, grp.index_of(&unit_vector(grp.rank(), 1))),
                    ];
                    quotient_base_change(&m, &ideal)?.0
                }
            };
            match theta {
                None => {
                    let f = fitting_ideal(&m);
                    let v = ideal_json(&f);
                    emit_value(g, &v, || {
                        format!(
                            "Fitting ideal over Z/{}^{}[{}]: {} generator(s), zero: {}, unit ideal: {}\n",
                            f.ring().ctx.p(),
                            f.ring().ctx.prec(),
                            f.ring().group,
                            f.generators().len(),
                            f.is_zero(),
                            f.is_unit_ideal()
                        )
                    })?;
                    Ok(true)
                }
                Some(tp) => {
                    let th: GroupRingElement = serde_json::from_str(&read(&tp)?)
                        .with_context(|| format!("parsing {}", tp.display()))?;
                    let r = conjecture_check(&th, &m)?;
                    let mut rep = VerificationReport::new();
                    rep.push(CheckRecord::new("conjecture/membership", "conjecture-check", Status::from_bool(r.membership)));
                    rep.push(CheckRecord::new("conjecture/generates", "conjecture-check", Status::from_bool(r.generates)));
                    emit_report(g, None, &rep)
                }
            }
        }
        Command::Theta1 => {
            let path = input(g, 0)?;
            let t: SymbolTable = serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
            let th = t.build()?;
            let v = json!({ "generator": th.generator, "full": th.full, "projected": th.projected });
            emit_value(g, &v, || {
                format!(
                    "generator {} ; full element on {} ; projected element on {} with augmentation {}\n",
                    th.generator,
                    th.full.group(),
                    th.projected.group(),
                    th.projected.augmentation().value()
                )
            })?;
            Ok(true)
        }
        Command::CompareL => {
            let parse = |i| -> CliResult<GroupRingElement> {
                let path = input(g, i)?;
                Ok(serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?)
            };
            let (a, b) = (parse(0)?, parse(1)?);
            let record = match compare_scalars(&a, &b) {
                Ok(p) => {
                    let ok = matches!(p, Proportionality::Ratio { unit: true, .. });
                    CheckRecord::new("compare-L", "scalar-comparison", Status::from_bool(ok)).witness(p)
                }
                Err(e @ Error::IndeterminateWhenBothZero) => {
                    CheckRecord::new("compare-L", "scalar-comparison", Status::Fail).witness(e.to_string())
                }
                Err(e) => return Err(e.into()),
            };
            let mut rep = VerificationReport::new();
            rep.push(record);
            emit_report(g, None, &rep)
        }
    }
}

fn unit_vector(rank: usize, i: usize) -> Vec<u64> {
    let mut v = vec![0; rank];
    v[i] = 1;
    v
}

fn ideal_json(f: &IdealLattice) -> serde_json::Value {
    json!({
        "generators": f.generators(),
        "zero": f.is_zero(),
        "unit_ideal": f.is_unit_ideal(),
        "lattice_rank": f.basis().len(),
    })
}
