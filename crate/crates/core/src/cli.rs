//! Command-line front end; every number is emitted as a decimal string.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cl::{self, Battery, CombineMode, FlatSet, SpreadFamily};
use crate::error::Error;
use crate::exact::rank_i64;
use crate::field::gauss_binomial;
use crate::flats::{enumerate_flats, flats_through, gram_identity_holds, Space};
use crate::geometry::{enumerate_isotropic, point_graph, srg_closed_form, srg_parameters, Case, SpaceConfig};
use crate::scheme::{
    column_uniqueness, relation_indices, valuation_coincidences, valuation_mismatches, verify_scheme,
    expected_coincidences, BuiltScheme, Exception, RelationIndex, SchemeTables,
};
use crate::spreads::{enumerate_spreads, type_i_span_check, type_i_spreads, type_ii_span_check, type_ii_spreads, Scope};

/// The standard configuration grid.
pub const STANDARD_GRID: [(Case, u32, usize); 10] = [
    (Case::Symplectic, 2, 1),
    (Case::Symplectic, 3, 1),
    (Case::Symplectic, 2, 2),
    (Case::Symplectic, 3, 2),
    (Case::Symplectic, 2, 3),
    (Case::Unitary, 4, 1),
    (Case::Unitary, 4, 2),
    (Case::Orthogonal, 3, 1),
    (Case::Orthogonal, 5, 1),
    (Case::Orthogonal, 3, 2),
];

#[derive(Parser, Debug)]
#[command(name = "acgcl", version, about = "Maximal flats, their association scheme and Cameron-Liebler sets")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// symplectic, unitary or orthogonal
    #[arg(long, global = true)]
    case: Option<Case>,
    #[arg(long, global = true)]
    q: Option<u32>,
    #[arg(long, global = true)]
    nu: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write JSON here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Space parameters and counts
    Space {
        #[command(subcommand)]
        cmd: SpaceCmd,
    },
    /// List flats or totally isotropic subspaces
    Enumerate(EnumerateArgs),
    /// Eigen tables and scheme checks
    Scheme {
        #[command(subcommand)]
        cmd: SchemeCmd,
    },
    /// Spread enumeration
    Spreads {
        #[command(subcommand)]
        cmd: SpreadsCmd,
    },
    /// Cameron-Liebler set tools
    Cl {
        #[command(subcommand)]
        cmd: ClCmd,
    },
    /// Run a verification suite
    Verify(VerifyArgs),
}

#[derive(Subcommand, Debug)]
enum SpaceCmd {
    Info,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EnumKind {
    Flats,
    Subspaces,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    /// Dimension; defaults to nu
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_enum, default_value = "flats")]
    kind: EnumKind,
    /// Emit at most this many items
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum SchemeCmd {
    /// P, Q, valencies and multiplicities
    Eigenmatrix {
        /// Also emit the relation table
        #[arg(long)]
        emit_matrices: bool,
    },
    /// Axioms and idempotent identities on the built scheme
    Verify,
    /// Direct against closed-form valuations for nu' up to the bound
    Valuations {
        #[arg(long, default_value_t = 8)]
        nu_max: usize,
    },
    /// Whether p_(i,xi)(0,1) occurs only in column (0,1)
    Uniqueness,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SpreadType {
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    Ii,
    All,
}

#[derive(Subcommand, Debug)]
enum SpreadsCmd {
    Enumerate {
        #[arg(long = "type", value_enum, default_value = "all")]
        kind: SpreadType,
        /// full, or flat:<id> indexing the (nu+1,2) containers
        #[arg(long, default_value = "full")]
        scope: String,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Auto,
    Image,
    Kernel,
    Spectrum,
    Counts,
    Spreads,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SearchStrategy {
    Exhaustive,
    #[value(name = "pencil_closure", alias = "pencil-closure")]
    PencilClosure,
    #[value(name = "seeded_random", alias = "seeded-random")]
    SeededRandom,
}

#[derive(Subcommand, Debug)]
enum ClCmd {
    /// Test sets read from a JSON file or `-`
    Test {
        #[arg(long = "in")]
        input: String,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
    },
    /// Build a pencil, or combine input sets
    Construct {
        /// Point index or comma-separated coordinates
        #[arg(long)]
        pencil: Option<String>,
        #[arg(long)]
        complement: bool,
        #[arg(long)]
        union: bool,
        #[arg(long)]
        difference: bool,
        #[arg(long = "in")]
        input: Option<String>,
    },
    /// Container parameter histogram around a member
    Profile {
        #[arg(long)]
        set: String,
        #[arg(long)]
        i: usize,
        /// Member flat; defaults to the smallest id
        #[arg(long)]
        s: Option<usize>,
    },
    /// Sets passing every test with the given parameter
    Search {
        #[arg(long)]
        x: i64,
        #[arg(long, value_enum, default_value = "pencil_closure")]
        strategy: SearchStrategy,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// All Cameron-Liebler sets when nu = 1
    Classify,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteName {
    #[value(alias = "paper")]
    Full,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "full")]
    suite: SuiteName,
    /// Record wall time per check
    #[arg(long)]
    timings: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Lib(Error::Inconsistent(_) | Error::NonIntegral(_)) => 1,
            Failure::Lib(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// One verification check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<String>,
}

/// Result of a verification suite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub suite: String,
    pub seed: String,
    pub configs: Vec<Value>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

struct Recorder {
    prefix: String,
    timings: bool,
    checks: Vec<Check>,
}

impl Recorder {
    fn check(&mut self, name: &str, f: impl FnOnce() -> crate::Result<(String, String)>) {
        let t = Instant::now();
        let (expected, actual) = match f() {
            Ok(v) => v,
            Err(e) => ("ok".into(), format!("error: {e}")),
        };
        self.checks.push(Check {
            name: format!("{}{}", self.prefix, name),
            pass: expected == actual,
            expected,
            actual,
            wall_ms: self.timings.then(|| t.elapsed().as_millis().to_string()),
        });
    }
}

fn s<T: ToString>(x: T) -> String {
    x.to_string()
}

fn config_echo(c: &SpaceConfig) -> Value {
    json!({ "case": c.case(), "q": s(c.q()), "nu": s(c.nu()) })
}

fn label(c: &SpaceConfig) -> String {
    format!("{}(q={},nu={})", c.case(), c.q(), c.nu())
}

/// Number of Cameron-Liebler sets when `ν = 1`: `Σ_x C(q,x)^{q^e+1}`.
fn nu1_cl_count(c: &SpaceConfig) -> crate::Result<(BigInt, BigInt)> {
    let dirs = c.half_powers().int(c.e2() as i64)? + 1;
    let d = u32::try_from(&dirs).map_err(|_| Error::Inconsistent("direction count".into()))?;
    let q = c.q() as u64;
    let mut total = BigInt::from(0);
    let mut binom = BigInt::from(1);
    let mut at_one = BigInt::from(0);
    for x in 0..=q {
        let term = num_traits::pow(binom.clone(), d as usize);
        if x == 1 {
            at_one = term.clone();
        }
        total += term;
        binom = binom * (q - x) / (x + 1);
    }
    Ok((total, at_one))
}

/// The checks run for one configuration.
pub fn config_checks(c: &SpaceConfig, seed: u64, timings: bool) -> crate::Result<Vec<Check>> {
    let mut r = Recorder {
        prefix: format!("{}/", label(c)),
        timings,
        checks: Vec::new(),
    };
    let nu = c.nu();
    let space = Space::new(c.clone())?;
    let n = space.len();
    for m in 0..=nu {
        r.check(&format!("flat_count_{m}"), || {
            Ok((s(c.flat_count(m)), s(enumerate_flats(c, m)?.len())))
        });
    }
    r.check("pencil_size", || {
        let pt = enumerate_flats(c, 0)?.remove(0);
        Ok((s(c.through_count(0, nu)), s(flats_through(c, &pt, nu)?.len())))
    });
    r.check("incidence_rank", || {
        let m: Vec<Vec<i64>> = space
            .incidence_matrix()
            .dense()
            .into_iter()
            .map(|row| row.into_iter().map(i64::from).collect())
            .collect();
        Ok((s(c.incidence_rank()), s(rank_i64(&m))))
    });
    if n <= 500 {
        r.check("gram_identity", || Ok((s(true), s(gram_identity_holds(&space)?))));
    }
    r.check("point_graph", || {
        let g = point_graph(c)?;
        let got = srg_parameters(&g);
        let np = c.num_points();
        Ok(match c.case() {
            Case::Symplectic => (s(np - 1), s(got.map_or(0, |p| p.1))),
            _ => {
                let (a, b, l, m) = srg_closed_form(c);
                (
                    format!("({a},{b},{l},{m})"),
                    got.map_or("none".into(), |(a, b, l, m)| format!("({a},{b},{l},{m})")),
                )
            }
        })
    });
    let tables = SchemeTables::for_config(c)?;
    r.check("eigenmatrix_orthogonality", || Ok((s(true), s(tables.orthogonality_holds()))));
    r.check("eigenvalue_row_sums", || Ok((s(true), s(tables.row_sums_hold()))));
    r.check("multiplicities_sum", || Ok((s(n), s(tables.multiplicities.iter().sum::<BigInt>()))));
    let built = BuiltScheme::new(&space)?;
    r.check("valencies", || {
        let counts = built.relations.relation_counts(&{
            let mut e = vec![0i64; n];
            e[0] = 1;
            e
        });
        let got: Vec<String> = counts.iter().map(|row| s(row.iter().sum::<i64>())).collect();
        let want: Vec<String> = tables.valencies.iter().map(s).collect();
        Ok((want.join(","), got.join(",")))
    });
    r.check("scheme_axioms", || {
        let rep = verify_scheme(&space, &built.relations, seed)?;
        Ok(("0".into(), s(rep.failures.len())))
    });
    r.check("idempotents", || {
        let rep = built.verify_idempotents(seed)?;
        Ok(("0".into(), s(rep.failures.len())))
    });
    r.check("valuations_closed_form", || {
        let bad: usize = (2..=nu)
            .map(|v| valuation_mismatches(c.case(), c.q(), v).map(|m| m.len()))
            .sum::<crate::Result<usize>>()?;
        Ok(("0".into(), s(bad)))
    });
    r.check("valuation_coincidences", || {
        let mut want = Vec::new();
        let mut got = Vec::new();
        for v in 2..=nu {
            want.extend(expected_coincidences(c.case(), v).into_iter().map(|p| (v, p)));
            got.extend(valuation_coincidences(c.case(), c.q(), v)?.into_iter().map(|p| (v, p)));
        }
        Ok((format!("{want:?}"), format!("{got:?}")))
    });
    r.check("column_uniqueness", || {
        let mut bad = 0;
        for rr in relation_indices(nu).into_iter().skip(1) {
            let u = column_uniqueness(&tables, rr)?;
            let forced = matches!(u.exception, Some(Exception::A | Exception::B));
            if (!u.unique && u.exception.is_none()) || (forced && u.unique) {
                bad += 1;
            }
        }
        Ok(("0".into(), s(bad)))
    });
    if n > 500 {
        r.check("type_i_span", || {
            let rep = type_i_span_check(&space, &built)?;
            Ok((rep.expected_rank.clone(), s(rep.rank)))
        });
        return Ok(r.checks);
    }
    let battery = Battery::new(space)?;
    let space = battery.space();
    r.check("type_i_span", || {
        let rep = type_i_span_check(space, battery.scheme())?;
        Ok((format!("{} 0", rep.expected_rank), format!("{} {}", rep.rank, rep.failures.len())))
    });
    if nu >= 2 {
        r.check("type_ii_span", || {
            let rep = type_ii_span_check(space, battery.scheme())?;
            Ok((format!("{} 0", rep.expected_rank), format!("{} {}", rep.rank, rep.failures.len())))
        });
    }
    let pencil = cl::construct_pencil(space, 0)?;
    let comp = cl::combine(space, &pencil, None, CombineMode::Complement)?;
    for (name, set) in [("pencil", &pencil), ("complement", &comp)] {
        r.check(&format!("{name}_is_cl"), || {
            let v = battery.verdict(set)?;
            Ok(("true true true true".into(), format!("{} {} {} {}", v.image, v.kernel, v.spectrum, v.counts)))
        });
        r.check(&format!("{name}_relation_counts"), || {
            let mut ok = true;
            for rr in relation_indices(nu) {
                ok &= battery.relation_counts_hold(set, rr)?;
            }
            Ok((s(true), s(ok)))
        });
    }
    r.check("random_subsets_agree", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bad = 0;
        for _ in 0..100 {
            if !battery.verdict(&cl::random_subset(space, &mut rng))?.agree() {
                bad += 1;
            }
        }
        Ok(("0".into(), s(bad)))
    });
    if nu == 1 && n <= cl::MAX_EXHAUSTIVE_FLATS {
        r.check("nu1_classification", || {
            let cls = cl::classify_nu1(&battery)?;
            let (total, one) = nu1_cl_count(c)?;
            let at_one = cls.by_x.get(&BigRational::from_integer(1.into())).copied().unwrap_or(0);
            Ok((
                format!("{total} {one} true"),
                format!("{} {at_one} {}", cls.sets.len(), cls.descriptions_agree),
            ))
        });
    }
    if battery.has_exhaustive_spreads() {
        r.check("spread_tests_match_image", || {
            let (fam, _) = battery.family(SpreadFamily::Exhaustive)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut bad = 0;
            for l in [pencil.clone(), comp.clone()]
                .into_iter()
                .chain((0..100).map(|_| cl::random_subset(space, &mut rng)))
            {
                if battery.test_spreads(&l, &fam, true)?.passed() != battery.test_image(&l)? {
                    bad += 1;
                }
            }
            Ok(("0".into(), s(bad)))
        });
    }
    if nu >= 2 {
        r.check("restriction_and_degree", || {
            let mut bad = 0;
            let q = c.q();
            for set in [&pencil, &comp] {
                for &sid in set.ids() {
                    if !battery.degree_identity(set, sid, 1)? {
                        bad += 1;
                    }
                    if !battery.pencil_distribution(set, sid, 1)?.identities_hold() {
                        bad += 1;
                    }
                }
                for t in space.all_containers(1)? {
                    let res = battery.restrict_cl(set, &t)?;
                    if !res.in_image || !res.integral() || !res.within(set.x(), q) {
                        bad += 1;
                    }
                }
            }
            Ok(("0".into(), s(bad)))
        });
        r.check("profile_case_analysis", || {
            let mut bad = 0;
            for set in [&pencil, &comp] {
                for &sid in set.ids() {
                    if !battery.pencil_distribution(set, sid, 1)?.passed() {
                        bad += 1;
                    }
                }
            }
            Ok(("0".into(), s(bad)))
        });
        r.check("full_set_profile", || {
            let full = FlatSet::full(space);
            let prof = battery.pencil_distribution(&full, 0, 1)?;
            let qi = BigInt::from(c.q());
            let total = gauss_binomial(nu as i64, nu as i64 - 1, c.q() as u64);
            let want = BTreeMap::from([(qi, total.to_string())]);
            let got: BTreeMap<BigInt, String> = prof.histogram.iter().map(|(k, v)| (k.clone(), s(v))).collect();
            Ok((format!("{want:?}"), format!("{got:?}")))
        });
    }
    Ok(r.checks)
}

/// The full suite over the given configurations.
pub fn run_suite(configs: &[SpaceConfig], seed: u64, timings: bool) -> crate::Result<RunReport> {
    let mut checks = Vec::new();
    for c in configs {
        checks.extend(config_checks(c, seed, timings)?);
    }
    Ok(RunReport {
        suite: "full".into(),
        seed: s(seed),
        configs: configs.iter().map(config_echo).collect(),
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

fn config(g: &Global) -> CliResult<SpaceConfig> {
    match (g.case, g.q, g.nu) {
        (Some(case), Some(q), Some(nu)) => Ok(SpaceConfig::new(case, q, nu)?),
        _ => Err(Failure::Usage("--case, --q and --nu are required".into())),
    }
}

fn read_input(path: &str, stdin: &mut dyn Read) -> CliResult<Value> {
    let mut text = String::new();
    if path == "-" {
        stdin
            .read_to_string(&mut text)
            .map_err(|e| Failure::Usage(format!("reading stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("reading {path}: {e}")))?;
    }
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("invalid JSON: {e}")))
}

fn parse_id(v: &Value) -> CliResult<usize> {
    match v {
        Value::Number(n) => n.as_u64().map(|x| x as usize),
        Value::String(t) => t.parse().ok(),
        _ => None,
    }
    .ok_or_else(|| Failure::Usage(format!("not a flat id: {v}")))
}

fn parse_ids(v: &Value) -> CliResult<Vec<usize>> {
    v.as_array()
        .ok_or_else(|| Failure::Usage("ids must be an array".into()))?
        .iter()
        .map(parse_id)
        .collect()
}

/// Accepts `{"ids": [...]}`, a list of those, or a bare id list.
fn parse_sets(space: &Space, v: &Value) -> CliResult<Vec<FlatSet>> {
    let raw: Vec<Vec<usize>> = match v {
        Value::Object(o) => vec![parse_ids(o.get("ids").ok_or_else(|| Failure::Usage("missing ids".into()))?)?],
        Value::Array(items) if items.iter().all(|x| x.is_object()) && !items.is_empty() => items
            .iter()
            .map(|x| parse_ids(&x["ids"]))
            .collect::<CliResult<_>>()?,
        Value::Array(_) => vec![parse_ids(v)?],
        _ => return Err(Failure::Usage("unrecognised set input".into())),
    };
    raw.into_iter()
        .map(|ids| FlatSet::new(space, ids).map_err(Failure::from))
        .collect()
}

fn parse_point(c: &SpaceConfig, t: &str) -> CliResult<usize> {
    if let Ok(i) = t.parse::<usize>() {
        if i >= c.num_points() {
            return Err(Failure::Usage(format!("point {i} out of range")));
        }
        return Ok(i);
    }
    let v: Vec<u8> = t
        .split(',')
        .map(|x| x.trim().parse::<u8>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("bad point {t}")))?;
    c.check_vector(&v)?;
    Ok(c.point_index(&v))
}

fn space_info(c: &SpaceConfig) -> CliResult<Value> {
    let space = Space::new(c.clone())?;
    let e2 = c.e2();
    let rank = if space.len() <= 20_000 {
        let m: Vec<Vec<i64>> = space
            .incidence_matrix()
            .dense()
            .into_iter()
            .map(|row| row.into_iter().map(i64::from).collect())
            .collect();
        json!(s(rank_i64(&m)))
    } else {
        json!("skipped")
    };
    Ok(json!({
        "config": config_echo(c),
        "e": if e2.is_multiple_of(2) { s(e2 / 2) } else { format!("{e2}/2") },
        "dim": s(c.dim()),
        "points": s(c.num_points()),
        "flats": s(space.len()),
        "flat_counts": (0..=c.nu()).map(|m| s(c.flat_count(m))).collect::<Vec<_>>(),
        "pencil_size": s(c.pencil_product(1, c.nu() as i64)),
        "incidence_rank": rank,
        "incidence_rank_closed_form": s(c.incidence_rank()),
        "form": c.form().iter().map(|r| r.iter().map(|x| s(*x)).collect::<Vec<_>>()).collect::<Vec<_>>(),
    }))
}

fn scope_of(space: &Space, t: &str) -> CliResult<Scope> {
    if t == "full" {
        return Ok(Scope::Full);
    }
    let id: usize = t
        .strip_prefix("flat:")
        .and_then(|x| x.parse().ok())
        .ok_or_else(|| Failure::Usage(format!("bad scope {t}")))?;
    let all = space.all_containers(1)?;
    all.get(id)
        .cloned()
        .map(Scope::Container)
        .ok_or_else(|| Failure::Usage(format!("container {id} out of range ({} containers)", all.len())))
}

fn dispatch(cli: Cli, stdin: &mut dyn Read) -> CliResult<(Value, bool)> {
    let g = &cli.global;
    match cli.command {
        Command::Space { cmd: SpaceCmd::Info } => Ok((space_info(&config(g)?)?, true)),
        Command::Enumerate(a) => {
            let c = config(g)?;
            let m = a.m.unwrap_or(c.nu());
            let limit = a.limit.unwrap_or(usize::MAX);
            let (count, items): (usize, Vec<Value>) = match a.kind {
                EnumKind::Flats => {
                    let v = enumerate_flats(&c, m)?;
                    (v.len(), v.iter().take(limit).map(|f| json!(f.to_json())).collect())
                }
                EnumKind::Subspaces => {
                    let v = enumerate_isotropic(&c, m)?;
                    (
                        v.len(),
                        v.iter()
                            .take(limit)
                            .map(|p| json!(p.basis().iter().map(|r| r.iter().map(|x| s(*x)).collect::<Vec<_>>()).collect::<Vec<_>>()))
                            .collect(),
                    )
                }
            };
            Ok((json!({ "config": config_echo(&c), "m": s(m), "count": s(count), "items": items }), true))
        }
        Command::Scheme { cmd } => {
            let c = config(g)?;
            match cmd {
                SchemeCmd::Eigenmatrix { emit_matrices } => {
                    let t = SchemeTables::for_config(&c)?;
                    let mut v = t.to_json(true);
                    if emit_matrices {
                        let space = Space::new(c.clone())?;
                        let rel = crate::scheme::RelationTable::build(&space)?;
                        v["relations"] = json!((0..rel.size())
                            .map(|a| rel.row(a).iter().map(|&k| RelationIndex::from_position(k as usize).to_string()).collect::<Vec<_>>())
                            .collect::<Vec<_>>());
                    }
                    Ok((v, true))
                }
                SchemeCmd::Verify => {
                    let space = Space::new(c.clone())?;
                    let built = BuiltScheme::new(&space)?;
                    let axioms = verify_scheme(&space, &built.relations, g.seed)?;
                    let idem = built.verify_idempotents(g.seed)?;
                    let ok = axioms.passed() && idem.passed() && built.tables.orthogonality_holds();
                    Ok((
                        json!({
                            "config": config_echo(&c),
                            "axioms": axioms,
                            "idempotents": idem,
                            "orthogonality": built.tables.orthogonality_holds(),
                            "pass": ok,
                        }),
                        ok,
                    ))
                }
                SchemeCmd::Valuations { nu_max } => {
                    let mut all = Vec::new();
                    for v in 2..=nu_max {
                        all.extend(valuation_mismatches(c.case(), c.q(), v)?);
                    }
                    let mut extra = Vec::new();
                    for v in 2..=nu_max {
                        let want = expected_coincidences(c.case(), v);
                        for p in valuation_coincidences(c.case(), c.q(), v)? {
                            if !want.contains(&p) {
                                extra.push(json!({ "nu": s(v), "i": s(p.0), "j": s(p.1) }));
                            }
                        }
                    }
                    let ok = all.is_empty() && extra.is_empty();
                    Ok((
                        json!({
                            "case": c.case(), "q": s(c.q()), "nu_max": s(nu_max),
                            "mismatches": all,
                            "unexpected_coincidences": extra,
                            "pass": ok,
                        }),
                        ok,
                    ))
                }
                SchemeCmd::Uniqueness => {
                    let t = SchemeTables::for_config(&c)?;
                    let rows = relation_indices(c.nu())
                        .into_iter()
                        .skip(1)
                        .map(|r| column_uniqueness(&t, r))
                        .collect::<crate::Result<Vec<_>>>()?;
                    let ok = rows.iter().all(|u| u.unique || u.exception.is_some());
                    Ok((json!({ "config": config_echo(&c), "rows": rows, "pass": ok }), ok))
                }
            }
        }
        Command::Spreads { cmd: SpreadsCmd::Enumerate { kind, scope } } => {
            let c = config(g)?;
            let space = Space::new(c.clone())?;
            let scope = scope_of(&space, &scope)?;
            let (spreads, exhaustive) = match (kind, &scope) {
                (SpreadType::I, Scope::Full) => (type_i_spreads(&space), false),
                (SpreadType::Ii, Scope::Full) => (type_ii_spreads(&space)?, false),
                (SpreadType::I, Scope::Container(f)) => (crate::spreads::container_type_i_spreads(&space, f)?, false),
                (SpreadType::Ii, Scope::Container(_)) => {
                    return Err(Failure::Usage("type II spreads are taken over the full space".into()))
                }
                (SpreadType::All, _) => {
                    let e = enumerate_spreads(&space, &scope)?;
                    (e.spreads, e.exhaustive)
                }
            };
            Ok((
                json!({
                    "config": config_echo(&c),
                    "scope": scope.to_json(),
                    "exhaustive": exhaustive,
                    "count": s(spreads.len()),
                    "spreads": spreads.iter().map(|x| x.to_json()).collect::<Vec<_>>(),
                }),
                true,
            ))
        }
        Command::Cl { cmd } => {
            let c = config(g)?;
            match cmd {
                ClCmd::Test { input, method } => {
                    let battery = Battery::for_config(c.clone())?;
                    let sets = parse_sets(battery.space(), &read_input(&input, stdin)?)?;
                    let mut out = Vec::new();
                    for l in &sets {
                        let (verdict, detail) = match method {
                            Method::Auto | Method::Kernel => (battery.test_kernel(l)?, Value::Null),
                            Method::Image => (battery.test_image(l)?, Value::Null),
                            Method::Spectrum => (battery.test_spectrum(l)?, Value::Null),
                            Method::Counts => (battery.test_counts(l)?, Value::Null),
                            Method::Spreads => {
                                let which = if battery.has_exhaustive_spreads() {
                                    SpreadFamily::Exhaustive
                                } else {
                                    SpreadFamily::Constructed
                                };
                                let (fam, conclusive) = battery.family(which)?;
                                let t = battery.test_spreads(l, &fam, conclusive)?;
                                (t.passed(), json!({
                                    "conclusive": t.conclusive,
                                    "spreads": s(t.spreads),
                                    "switching_pairs": s(t.switching_pairs),
                                    "intersections": t.intersections.iter().map(|(k, v)| (s(k), s(v))).collect::<BTreeMap<_, _>>(),
                                }))
                            }
                        };
                        let mut rec = json!({ "set": l.to_json(), "cameron_liebler": verdict, "integral_x": l.x().is_integer() });
                        if !detail.is_null() {
                            rec["spreads"] = detail;
                        }
                        out.push(rec);
                    }
                    Ok((json!({ "config": config_echo(&c), "method": format!("{method:?}").to_lowercase(), "results": out }), true))
                }
                ClCmd::Construct { pencil, complement, union, difference, input } => {
                    let battery = Battery::for_config(c.clone())?;
                    let space = battery.space();
                    let chosen = [pencil.is_some(), complement, union, difference].iter().filter(|&&b| b).count();
                    if chosen != 1 {
                        return Err(Failure::Usage("choose exactly one of --pencil, --complement, --union, --difference".into()));
                    }
                    let set = if let Some(p) = pencil {
                        cl::construct_pencil(space, parse_point(&c, &p)?)?
                    } else {
                        let path = input.ok_or_else(|| Failure::Usage("--in is required".into()))?;
                        let sets = parse_sets(space, &read_input(&path, stdin)?)?;
                        let mode = if complement {
                            CombineMode::Complement
                        } else if union {
                            CombineMode::DisjointUnion
                        } else {
                            CombineMode::Difference
                        };
                        let need = if complement { 1 } else { 2 };
                        if sets.len() != need {
                            return Err(Failure::Usage(format!("expected {need} input sets, got {}", sets.len())));
                        }
                        cl::combine(space, &sets[0], sets.get(1), mode)?
                    };
                    let v = battery.verdict(&set)?;
                    Ok((json!({ "config": config_echo(&c), "set": set.to_json(), "verdict": v }), true))
                }
                ClCmd::Profile { set, i, s: member } => {
                    let battery = Battery::for_config(c.clone())?;
                    let sets = parse_sets(battery.space(), &read_input(&set, stdin)?)?;
                    let l = sets.first().ok_or_else(|| Failure::Usage("no set given".into()))?;
                    let sid = match member {
                        Some(x) => x,
                        None => *l.ids().first().ok_or_else(|| Failure::Usage("empty set".into()))?,
                    };
                    let prof = battery.pencil_distribution(l, sid, i)?;
                    let degree = battery.degree_identity(l, sid, i)?;
                    let ok = prof.passed() && degree;
                    Ok((json!({ "config": config_echo(&c), "profile": prof.to_json(), "degree_identity": degree }), ok))
                }
                ClCmd::Search { x, strategy, trials } => {
                    let battery = Battery::for_config(c.clone())?;
                    let st = match strategy {
                        SearchStrategy::Exhaustive => cl::Strategy::Exhaustive,
                        SearchStrategy::PencilClosure => cl::Strategy::PencilClosure,
                        SearchStrategy::SeededRandom => cl::Strategy::SeededRandom,
                    };
                    let found = cl::search_cl(&battery, &BigRational::from_integer(x.into()), st, g.seed, trials)?;
                    Ok((
                        json!({
                            "config": config_echo(&c),
                            "x": s(x),
                            "strategy": st,
                            "seed": s(g.seed),
                            "count": s(found.len()),
                            "sets": found.iter().map(|l| l.to_json()).collect::<Vec<_>>(),
                        }),
                        true,
                    ))
                }
                ClCmd::Classify => {
                    let battery = Battery::for_config(c.clone())?;
                    let cls = cl::classify_nu1(&battery)?;
                    Ok((
                        json!({
                            "config": config_echo(&c),
                            "total": s(cls.sets.len()),
                            "by_x": cls.by_x.iter().map(|(k, v)| (k.to_string(), s(v))).collect::<BTreeMap<_, _>>(),
                            "descriptions_agree": cls.descriptions_agree,
                            "sets": cls.sets.iter().map(|l| l.to_json()).collect::<Vec<_>>(),
                        }),
                        cls.descriptions_agree,
                    ))
                }
            }
        }
        Command::Verify(a) => {
            let SuiteName::Full = a.suite;
            let configs = match (g.case, g.q, g.nu) {
                (None, None, None) => STANDARD_GRID
                    .iter()
                    .map(|&(case, q, nu)| SpaceConfig::new(case, q, nu))
                    .collect::<crate::Result<Vec<_>>>()?,
                _ => vec![config(g)?],
            };
            let rep = run_suite(&configs, g.seed, a.timings)?;
            let ok = rep.pass;
            Ok((serde_json::to_value(rep).expect("serializable"), ok))
        }
    }
}

/// Parses `argv`, writes JSON, and returns the exit code.
pub fn run<I, T>(argv: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(stdout, "{e}") } else { write!(stderr, "{e}") };
            return code;
        }
    };
    let out_path = cli.global.out.clone();
    match dispatch(cli, stdin) {
        Ok((v, ok)) => {
            let text = serde_json::to_string_pretty(&v).expect("serializable") + "\n";
            let written = match out_path {
                Some(p) => std::fs::write(&p, text).map_err(|e| e.to_string()),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return 2;
            }
            if ok {
                0
            } else {
                1
            }
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}
