//! Command-line entry point: input parsing, subcommand dispatch and
//! line-oriented `key=value` reports.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::actions::{axis_by_median_criterion, check_non_nesting, classify, Automorphism, Classification, LineMap, NestingVerdict, VertexPerm};
use crate::conjugacy::{
    bfs_xpath, chevalley_commutator, PathShape, class_diameter, factor_transvection, is_x_path, make_transvection,
    transvection_xpath, BfsResult, ConjugacyError, FiniteGroupTable, GroupKind, Mat, Repr, Step, TableClass,
    Transvection, TransvectionClass,
};
use crate::ends::{dense_or_cyclic, word_sample, Density, End};
use crate::f2_lab::{self, F2Map, F2Point};
use crate::flows::{check_flow_axioms, e_classes, flow_cut, flow_from_arc, ArcPromise, Cut, DirectedArcSample};
use crate::metrize::{discrete_to_simplicial, DiscreteMedianClosure, PartialPerm};
use crate::pretree_core::{Axiom, FinitePretree};
use crate::rational::{fmt_q, parse_q, Q};
use crate::tree_model::{bridge_in, median_closure_in, project_onto, F2Tree, MetricTree, Pt, RationalLine, TreeSpace, Word};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("{0}")]
    Input(String),
    #[error("usage: {0}")]
    Usage(String),
}

fn input(e: impl ToString) -> CliError {
    CliError::Input(e.to_string())
}

/// One report line; `ok = false` marks a failed check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub line: String,
    pub ok: bool,
}

impl Finding {
    pub fn info(line: impl Into<String>) -> Self {
        Finding { line: line.into(), ok: true }
    }

    /// A check line, suffixed `status=pass|fail`.
    pub fn check(line: impl Into<String>, ok: bool) -> Self {
        let status = if ok { "pass" } else { "fail" };
        Finding { line: format!("{} status={status}", line.into()), ok }
    }
}

/// Sorted finding lines, then `verdict=pass|fail count=<failures>`.
pub fn emit_report(findings: &[Finding]) -> String {
    let mut lines: Vec<&str> = findings.iter().map(|f| f.line.as_str()).collect();
    lines.sort_unstable();
    let failures = findings.iter().filter(|f| !f.ok).count();
    let mut out = String::new();
    for l in lines {
        out.push_str(l);
        out.push('\n');
    }
    let verdict = if failures == 0 { "pass" } else { "fail" };
    out.push_str(&format!("verdict={verdict} count={failures}\n"));
    out
}

/// Makes free text safe as a single `value` token.
fn tok(s: impl ToString) -> String {
    let s = s.to_string();
    if s.is_empty() {
        return "none".into();
    }
    s.chars().map(|c| if c.is_whitespace() || c == '=' { '_' } else { c }).collect()
}

macro_rules! with_ctx {
    ($ctx:expr, $s:ident, $g:ident => $body:expr) => {
        match $ctx {
            Ctx::Tree(tree, gens) => {
                let $s = &tree;
                let $g = gens;
                $body
            }
            Ctx::Line(gens) => {
                let $s = &RationalLine;
                let $g = gens;
                $body
            }
            Ctx::F2(gens) => {
                let $s = &F2Tree::default();
                let $g = gens;
                $body
            }
        }
    };
}


#[derive(Debug, Parser)]
#[command(name = "treelab", version, about = "Exact checks for group actions on median pretrees and real trees")]
pub struct Cli {
    /// Seed for every randomized draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Window size; each subcommand documents its own default.
    #[arg(long, global = true)]
    pub window: Option<usize>,
    /// Word-length bound for generated samples.
    #[arg(long = "word-bound", global = true)]
    pub word_bound: Option<usize>,
    /// Largest finite group to enumerate.
    #[arg(long, global = true, default_value_t = 200_000)]
    pub cap: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum SpaceKind {
    /// The rational line; points are rationals.
    Line,
    /// The Cayley tree of the free group on a, b; points are words or `u-v:q`.
    F2,
}

#[derive(Debug, Clone, Args)]
pub struct SpaceArgs {
    /// Finite metric tree file (`tree`, `v <id>`, `e <id> <id> <len>`).
    #[arg(long, conflicts_with = "space")]
    pub tree: Option<PathBuf>,
    /// Built-in space; inferred from the generator rules when omitted.
    #[arg(long)]
    pub space: Option<SpaceKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum F2Check {
    Phi2,
    Identities,
    OrbitClosure,
    OrbitLabels,
    EvenDistance,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exhaustive pretree axiom check of a `pretree <n>` / `b y x z` file.
    CheckAxioms { file: PathBuf },
    /// Median of three points.
    Median {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(num_args = 3, required = true, allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// Bridge between two finite point sets (comma lists).
    Bridge {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// Median closure of a point set.
    Closure {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(required = true, allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// Elliptic/loxodromic classification of each generator on the window
    /// (default 4: line points k/2 with |k| ≤ 2W, F2 ball of radius W; trees use
    /// their barycentric subdivision).
    Classify {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        gens: PathBuf,
    },
    /// Searches window segments mapped properly into themselves.
    NonNesting {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        gens: PathBuf,
    },
    /// Flow induced by a sampled directed arc on a probe set, and its cut on a line.
    Flow {
        #[command(flatten)]
        space: SpaceArgs,
        /// Arc points in increasing order.
        #[arg(long, allow_hyphen_values = true)]
        arc: String,
        /// `ray`, `unknown`, or `limit:<point>`.
        #[arg(long, default_value = "ray", allow_hyphen_values = true)]
        promise: String,
        #[arg(long, allow_hyphen_values = true)]
        probes: String,
        /// Ordered line sample for the cut.
        #[arg(long, allow_hyphen_values = true)]
        line: Option<String>,
    },
    /// End of the axis of one generator: stabilizer sample, ν image, order and
    /// density (defaults: window 10, word bound 3).
    Ends {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        gens: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        a0: String,
        /// Generator name or 0-based index.
        #[arg(long = "axis-of", default_value = "0")]
        axis_of: String,
        /// Gaps below this count as dense; defaults to 1/window.
        #[arg(long)]
        resolution: Option<String>,
    },
    /// X-paths inside a conjugacy class of a finite group.
    Xpath {
        /// `sl:<n>:<p>` or `sym:<m>`.
        #[arg(long)]
        group: String,
        /// `transvections`, or a comma key of any class member.
        #[arg(long, default_value = "transvections")]
        class: String,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
        /// All-pairs shortest X-path lengths.
        #[arg(long = "all-pairs")]
        all_pairs: bool,
    },
    /// Random commutator-formula draws and constructive X-paths over p ∈ {2,3,5}, n ∈ {3,4}.
    SlDemo {
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        #[arg(long, default_value_t = 200)]
        pairs: usize,
    },
    /// Bounded checks for the F2 action generated by a², b² and φ (word bound defaults: 8,
    /// even-distance 6; window default 6).
    F2Demo {
        #[arg(long, default_value_t = 4)]
        radius: usize,
        /// Word or edge point; even-distance uses it only when it is a vertex.
        #[arg(long, default_value = "1-a:1/2")]
        v: String,
        #[arg(long, value_enum, default_value_t = F2Check::All)]
        check: F2Check,
    },
    /// Unit-length tree realizing a finite median pretree, with an isometry
    /// check per generator.
    Isometrize {
        #[arg(long)]
        pretree: PathBuf,
        #[arg(long)]
        gens: PathBuf,
    },
}

/// Parses `argv`, runs the subcommand and writes its report. Returns the exit
/// code: 0 pass, 1 check failure, 2 usage or input error.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = write!(err, "{}", e.render());
            return 2;
        }
    };
    match execute(&cli) {
        Ok((prefix, findings)) => {
            let _ = out.write_all(prefix.as_bytes());
            let _ = out.write_all(emit_report(&findings).as_bytes());
            if findings.iter().all(|f| f.ok) {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

/// Raw text before the report (only `isometrize` emits any) and the findings.
type Output = (String, Vec<Finding>);

fn execute(cli: &Cli) -> Result<Output, CliError> {
    let none = |f: Vec<Finding>| Ok((String::new(), f));
    match &cli.command {
        Command::CheckAxioms { file } => none(check_axioms_cmd(&read(file)?)?),
        Command::Median { space, points } => {
            let ctx = load_ctx(space, None)?;
            none(with_ctx!(ctx, s, _g => median_cmd(s, points)?))
        }
        Command::Bridge { space, a, b } => {
            let ctx = load_ctx(space, None)?;
            none(with_ctx!(ctx, s, _g => bridge_cmd(s, a, b)?))
        }
        Command::Closure { space, points } => {
            let ctx = load_ctx(space, None)?;
            none(with_ctx!(ctx, s, _g => closure_cmd(s, points)?))
        }
        Command::Classify { space, gens } => {
            let ctx = load_ctx(space, Some(gens))?;
            let w = cli.window.unwrap_or(4);
            none(with_ctx!(ctx, s, g => classify_cmd(s, &g, w)))
        }
        Command::NonNesting { space, gens } => {
            let ctx = load_ctx(space, Some(gens))?;
            let w = cli.window.unwrap_or(4);
            none(with_ctx!(ctx, s, g => non_nesting_cmd(s, &g, w)))
        }
        Command::Flow { space, arc, promise, probes, line } => {
            let ctx = load_ctx(space, None)?;
            none(with_ctx!(ctx, s, _g => flow_cmd(s, arc, promise, probes, line.as_deref())?))
        }
        Command::Ends { space, gens, a0, axis_of, resolution } => {
            let ctx = load_ctx(space, Some(gens))?;
            let window = cli.window.unwrap_or(10);
            let res = match resolution {
                Some(r) => parse_q(r).ok_or_else(|| input(format!("bad resolution {r}")))?,
                None => Q::new(1.into(), window.max(1).into()),
            };
            let opts = EndsOpts {
                window,
                bound: cli.word_bound.unwrap_or(3),
                resolution: res,
            };
            none(with_ctx!(ctx, s, g => ends_cmd(s, &g, a0, axis_of, &opts)?))
        }
        Command::Xpath { group, class, from, to, all_pairs } => {
            none(xpath_cmd(group, class, from.as_deref(), to.as_deref(), *all_pairs, cli.cap)?)
        }
        Command::SlDemo { draws, pairs } => none(sl_demo(*draws, *pairs, cli.seed)),
        Command::F2Demo { radius, v, check } => none(f2_demo(*radius, v, *check, cli.word_bound, cli.window)?),
        Command::Isometrize { pretree, gens } => isometrize_cmd(&read(pretree)?, &read(gens)?),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

// ---------------------------------------------------------------------------
// Spaces and generators

/// A [`TreeSpace`] with a textual point syntax and a default finite window.
pub trait CliSpace: TreeSpace {
    fn parse_pt(&self, s: &str) -> Result<Self::P, CliError>;
    fn window(&self, w: usize) -> Vec<Self::P>;
}

impl CliSpace for RationalLine {
    fn parse_pt(&self, s: &str) -> Result<Q, CliError> {
        let s = s.strip_prefix('@').unwrap_or(s);
        parse_q(s).ok_or_else(|| input(format!("bad rational {s}")))
    }

    fn window(&self, w: usize) -> Vec<Q> {
        let w = 2 * w as i64;
        (-w..=w).map(|k| Q::new(k.into(), 2.into())).collect()
    }
}

impl CliSpace for MetricTree {
    fn parse_pt(&self, s: &str) -> Result<Pt<usize>, CliError> {
        let owned;
        let s = if s.starts_with('@') {
            s
        } else {
            owned = format!("@{s}");
            &owned
        };
        self.parse_point(s).map_err(input)
    }

    fn window(&self, _w: usize) -> Vec<Pt<usize>> {
        self.subdivision_points()
    }
}

impl CliSpace for F2Tree {
    fn parse_pt(&self, s: &str) -> Result<F2Point, CliError> {
        f2_lab::parse_point(s).ok_or_else(|| input(format!("bad free-group point {s}")))
    }

    fn window(&self, w: usize) -> Vec<F2Point> {
        f2_lab::ball_vertices(w).into_iter().map(Pt::V).collect()
    }
}

/// A generator block from an automorphism file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AutSpec {
    /// `perm [name]` followed by `m <id> <id>` lines; unlisted points are fixed.
    Perm { name: String, pairs: Vec<(String, String)> },
    /// `rule <kind> <params...>`.
    Rule { name: String, kind: String, params: Vec<String> },
}

impl AutSpec {
    pub fn name(&self) -> &str {
        match self {
            AutSpec::Perm { name, .. } | AutSpec::Rule { name, .. } => name,
        }
    }
}

/// Parses an automorphism file; generators without a name become `g<index>`.
pub fn parse_automorphisms(text: &str) -> Result<Vec<AutSpec>, CliError> {
    let mut out: Vec<AutSpec> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        let auto = format!("g{}", out.len());
        match tok.as_slice() {
            ["perm"] => out.push(AutSpec::Perm { name: auto, pairs: Vec::new() }),
            ["perm", name] => out.push(AutSpec::Perm { name: name.to_string(), pairs: Vec::new() }),
            ["m", x, y] => match out.last_mut() {
                Some(AutSpec::Perm { pairs, .. }) => pairs.push((x.to_string(), y.to_string())),
                _ => return Err(input(format!("line {}: `m` outside a perm block", ln + 1))),
            },
            ["rule", kind, params @ ..] => out.push(AutSpec::Rule {
                name: auto,
                kind: kind.to_string(),
                params: params.iter().map(|s| s.to_string()).collect(),
            }),
            _ => return Err(input(format!("line {}: unrecognized `{line}`", ln + 1))),
        }
    }
    if out.is_empty() {
        return Err(input("no generators"));
    }
    Ok(out)
}

enum Ctx {
    Tree(MetricTree, Vec<(String, VertexPerm)>),
    Line(Vec<(String, LineMap)>),
    F2(Vec<(String, F2Map)>),
}


fn rule_space(kind: &str) -> Option<SpaceKind> {
    match kind {
        "translate" | "reflect" | "affine" => Some(SpaceKind::Line),
        k if k.starts_with("f2-") => Some(SpaceKind::F2),
        _ => None,
    }
}

fn load_ctx(args: &SpaceArgs, gens: Option<&PathBuf>) -> Result<Ctx, CliError> {
    let specs = match gens {
        Some(p) => parse_automorphisms(&read(p)?)?,
        None => Vec::new(),
    };
    if let Some(path) = &args.tree {
        let tree = MetricTree::parse(&read(path)?).map_err(input)?;
        let maps = specs.iter().map(|s| tree_perm(&tree, s)).collect::<Result<_, _>>()?;
        return Ok(Ctx::Tree(tree, maps));
    }
    let kind = match args.space {
        Some(k) => k,
        None => {
            let kinds: BTreeSet<Option<SpaceKind>> = specs
                .iter()
                .map(|s| match s {
                    AutSpec::Rule { kind, .. } => rule_space(kind),
                    AutSpec::Perm { .. } => None,
                })
                .collect();
            match kinds.into_iter().collect::<Vec<_>>().as_slice() {
                [Some(k)] => *k,
                [] => return Err(CliError::Usage("give --tree <file> or --space line|f2".into())),
                _ => return Err(input("generators do not determine a single space; pass --tree or --space")),
            }
        }
    };
    match kind {
        SpaceKind::Line => Ok(Ctx::Line(specs.iter().map(line_rule).collect::<Result<_, _>>()?)),
        SpaceKind::F2 => Ok(Ctx::F2(specs.iter().map(f2_rule).collect::<Result<_, _>>()?)),
    }
}

fn tree_perm(tree: &MetricTree, spec: &AutSpec) -> Result<(String, VertexPerm), CliError> {
    let AutSpec::Perm { name, pairs } = spec else {
        return Err(input(format!("{}: only `perm` blocks act on a tree file", spec.name())));
    };
    let mut map: Vec<usize> = (0..tree.len()).collect();
    let find = |l: &str| tree.vertex_by_label(l).ok_or_else(|| input(format!("{name}: unknown vertex {l}")));
    for (x, y) in pairs {
        map[find(x)?] = find(y)?;
    }
    Ok((name.clone(), VertexPerm::new(tree, map, name).map_err(input)?))
}

fn rule_q(spec_name: &str, params: &[String], i: usize) -> Result<Q, CliError> {
    params
        .get(i)
        .and_then(|s| parse_q(s))
        .ok_or_else(|| input(format!("{spec_name}: parameter {} must be a rational", i + 1)))
}

fn line_rule(spec: &AutSpec) -> Result<(String, LineMap), CliError> {
    let AutSpec::Rule { name, kind, params } = spec else {
        return Err(input(format!("{}: `perm` needs --tree", spec.name())));
    };
    let m = match kind.as_str() {
        "translate" => LineMap::translate(rule_q(name, params, 0)?),
        "reflect" => LineMap::reflect(rule_q(name, params, 0)?),
        "affine" => LineMap::new(rule_q(name, params, 0)?, rule_q(name, params, 1)?).map_err(input)?,
        k => return Err(input(format!("{name}: `{k}` is not a line rule"))),
    };
    Ok((name.clone(), m))
}

fn f2_rule(spec: &AutSpec) -> Result<(String, F2Map), CliError> {
    let AutSpec::Rule { name, kind, params } = spec else {
        return Err(input(format!("{}: `perm` needs --tree", spec.name())));
    };
    let m = match (kind.as_str(), params.as_slice()) {
        ("f2-leftmul", [w]) => F2Map::left_mul(&Word::parse(w).ok_or_else(|| input(format!("{name}: bad word {w}")))?),
        ("f2-phi", []) => F2Map::phi(),
        ("f2-phi-inv", []) => F2Map::phi().inverse(),
        ("f2-theta", []) => F2Map::theta(),
        (k, _) => return Err(input(format!("{name}: bad free-group rule `{k}` with {} parameters", params.len()))),
    };
    Ok((name.clone(), m))
}

fn parse_list<S: CliSpace>(s: &S, list: &str) -> Result<Vec<S::P>, CliError> {
    list.split(',').map(str::trim).filter(|t| !t.is_empty()).map(|t| s.parse_pt(t)).collect()
}

// ---------------------------------------------------------------------------
// Pretree and geometry subcommands

fn check_axioms_cmd(text: &str) -> Result<Vec<Finding>, CliError> {
    let t = FinitePretree::parse(text).map_err(input)?;
    let rep = t.check_axioms();
    let mut f = vec![Finding::info(format!("points={} triples={}", t.len(), t.triples().len()))];
    for ax in [Axiom::A1, Axiom::A2, Axiom::A3, Axiom::A4] {
        let bad: Vec<_> = rep.violations.iter().filter(|v| v.axiom == ax).collect();
        let witness = bad.first().map_or("none".to_string(), |v| tok(format!("{:?}", v.witness).replace(' ', "")));
        f.push(Finding::check(format!("axiom={ax} violations={} witness={witness}", bad.len()), bad.is_empty()));
    }
    if rep.passed() {
        f.push(Finding::info(format!("median={}", t.is_median())));
    }
    Ok(f)
}

fn median_cmd<S: CliSpace>(s: &S, points: &[String]) -> Result<Vec<Finding>, CliError> {
    let p: Vec<S::P> = points.iter().map(|x| s.parse_pt(x)).collect::<Result<_, _>>()?;
    let m = s.median(&p[0], &p[1], &p[2]);
    let on_all = s.in_segment(&m, &p[0], &p[1]) && s.in_segment(&m, &p[1], &p[2]) && s.in_segment(&m, &p[0], &p[2]);
    Ok(vec![
        Finding::info(format!("median={}", tok(s.label(&m)))),
        Finding::check("median_on_all_geodesics", on_all),
    ])
}

fn bridge_cmd<S: CliSpace>(s: &S, a: &str, b: &str) -> Result<Vec<Finding>, CliError> {
    let (a, b) = (parse_list(s, a)?, parse_list(s, b)?);
    let (t, q) = bridge_in(s, &a, &b).ok_or_else(|| input("both sets must be nonempty"))?;
    let gates = project_onto(s, &q, &a) == Some(t.clone()) && project_onto(s, &t, &b) == Some(q.clone());
    Ok(vec![
        Finding::info(format!("bridge={},{} length={}", tok(s.label(&t)), tok(s.label(&q)), fmt_q(&s.dist(&t, &q)))),
        Finding::check("bridge_endpoints_are_mutual_gates", gates),
    ])
}

fn closure_cmd<S: CliSpace>(s: &S, points: &[String]) -> Result<Vec<Finding>, CliError> {
    let seed: Vec<S::P> = points.iter().map(|x| s.parse_pt(x)).collect::<Result<_, _>>()?;
    let c = median_closure_in(s, &seed);
    let set: BTreeSet<&S::P> = c.iter().collect();
    let mut closed = true;
    'outer: for (i, x) in c.iter().enumerate() {
        for (j, y) in c.iter().enumerate().skip(i + 1) {
            for z in &c[j + 1..] {
                if !set.contains(&s.median(x, y, z)) {
                    closed = false;
                    break 'outer;
                }
            }
        }
    }
    let mut f = vec![Finding::info(format!("closure_size={} seed_size={}", c.len(), seed.len()))];
    f.extend(c.iter().map(|p| Finding::info(format!("point={}", tok(s.label(p))))));
    f.push(Finding::check("closure_closed", closed));
    Ok(f)
}

fn classify_cmd<S, G>(s: &S, gens: &[(String, G)], w: usize) -> Vec<Finding>
where
    S: CliSpace,
    G: Automorphism<P = S::P>,
{
    let window = s.window(w);
    let mut f = vec![Finding::info(format!("window_points={}", window.len()))];
    for (name, g) in gens {
        match classify(s, g, &window) {
            Ok(Classification::Elliptic { fixed }) => {
                f.push(Finding::info(format!("gen={name} type=elliptic fixed_points={}", fixed.len())));
            }
            Ok(Classification::Loxodromic { axis, translation_length }) => {
                f.push(Finding::info(format!(
                    "gen={name} type=loxodromic translation_length={} axis_points={}",
                    fmt_q(&translation_length),
                    axis.len()
                )));
                let crit = axis_by_median_criterion(s, g, &window);
                let same = crit.as_ref().is_ok_and(|c| {
                    c.iter().collect::<BTreeSet<_>>() == axis.iter().collect::<BTreeSet<_>>()
                });
                f.push(Finding::check(format!("gen={name} axis_equals_median_criterion"), same));
            }
            Err(e) => f.push(Finding::check(format!("gen={name} error={}", tok(e)), false)),
        }
    }
    f
}

fn non_nesting_cmd<S, G>(s: &S, gens: &[(String, G)], w: usize) -> Vec<Finding>
where
    S: CliSpace,
    G: Automorphism<P = S::P>,
{
    let window = s.window(w);
    let inside: BTreeSet<&S::P> = window.iter().collect();
    let mut f = Vec::new();
    for (name, g) in gens {
        let (mut conclusive, mut inconclusive) = (0usize, 0usize);
        let mut witness = None;
        for (i, x) in window.iter().enumerate() {
            for y in &window[i + 1..] {
                match check_non_nesting(s, g, &[(x.clone(), y.clone())], |p| inside.contains(p)) {
                    NestingVerdict::Pass => conclusive += 1,
                    NestingVerdict::Inconclusive { .. } => inconclusive += 1,
                    NestingVerdict::Witness { segment, image } => {
                        conclusive += 1;
                        witness.get_or_insert((segment, image));
                    }
                }
            }
        }
        let w = witness.as_ref().map_or("none".to_string(), |((x, y), (gx, gy))| {
            format!("{}..{}->{}..{}", tok(s.label(x)), tok(s.label(y)), tok(s.label(gx)), tok(s.label(gy)))
        });
        f.push(Finding::check(
            format!("gen={name} conclusive_segments={conclusive} inconclusive_segments={inconclusive} nesting_witness={w}"),
            witness.is_none() && conclusive > 0,
        ));
    }
    f
}

fn flow_cmd<S: CliSpace>(
    s: &S,
    arc: &str,
    promise: &str,
    probes: &str,
    line: Option<&str>,
) -> Result<Vec<Finding>, CliError> {
    let pts = parse_list(s, arc)?;
    let promise = match promise {
        "ray" => ArcPromise::GeodesicRay,
        "unknown" => ArcPromise::Unknown,
        p => match p.strip_prefix("limit:") {
            Some(l) => ArcPromise::ConvergesTo(s.parse_pt(l)?),
            None => return Err(input(format!("bad promise {p}"))),
        },
    };
    let arc = DirectedArcSample::new(s, pts, promise).map_err(input)?;
    let probes = parse_list(s, probes)?;
    let flow = flow_from_arc(s, &arc, &probes);
    // Axioms are only meaningful once every probe pair is decided.
    let rep = check_flow_axioms(&flow.relation);
    let (axiom, witness) = match rep.first() {
        _ if !flow.inconclusive.is_empty() => ("undecided".into(), "none".into()),
        Some(v) => (v.axiom.to_string(), tok(format!("{:?}", v.witness).replace(' ', ""))),
        None => ("none".into(), "none".into()),
    };
    let decided_pass = rep.passed() && flow.inconclusive.is_empty();
    let mut f = vec![
        Finding::info(format!("probes={} related_pairs={}", probes.len(), flow.relation.r.len())),
        Finding::check(format!("flow axiom={axiom} witness={witness}"), decided_pass),
        Finding::check(format!("inconclusive_pairs={}", flow.inconclusive.len()), flow.inconclusive.is_empty()),
    ];
    if let Some(line) = line {
        let line = parse_list(s, line)?;
        match flow_cut(s, &arc, &line) {
            Ok((cut, lf)) => {
                let cut = match cut {
                    Cut::AtPoint(p) => format!("point:{}", tok(s.label(&p))),
                    Cut::Gap { lower_max, upper_min } => {
                        format!("gap:{}|{}", tok(s.label(&lower_max)), tok(s.label(&upper_min)))
                    }
                    Cut::PlusInfinity => "plus_infinity".into(),
                    Cut::MinusInfinity => "minus_infinity".into(),
                };
                let k = e_classes(&lf.relation).len();
                f.push(Finding::info(format!("cut={cut}")));
                f.push(Finding::check(format!("e_classes={k}"), k <= 2));
            }
            Err(e) => f.push(Finding::check(format!("cut_error={}", tok(e)), false)),
        }
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Ends

struct EndsOpts {
    window: usize,
    bound: usize,
    resolution: Q,
}

/// Pairs compared against the ν order are taken among this many stabilizers.
const ORDER_SAMPLE: usize = 120;

fn ends_cmd<S, G>(s: &S, gens: &[(String, G)], a0: &str, axis_of: &str, o: &EndsOpts) -> Result<Vec<Finding>, CliError>
where
    S: CliSpace,
    G: Automorphism<P = S::P>,
{
    let idx = match gens.iter().position(|(n, _)| n == axis_of) {
        Some(i) => i,
        None => axis_of
            .parse::<usize>()
            .ok()
            .filter(|&i| i < gens.len())
            .ok_or_else(|| input(format!("no generator {axis_of}")))?,
    };
    let a0 = s.parse_pt(a0)?;
    let end = End::new(s, gens[idx].1.clone(), a0, o.window).map_err(input)?;
    let maps: Vec<G> = gens.iter().map(|(_, g)| g.clone()).collect();
    let sample = word_sample(&maps, o.bound);
    let mut stab: Vec<(&str, &G, Q)> = Vec::new();
    let mut nu_errors = Vec::new();
    for (name, h) in &sample {
        if !end.stabilizes(h) {
            continue;
        }
        match end.nu(h) {
            Ok(p) => stab.push((name, h, end.coord(&p))),
            Err(e) => nu_errors.push(format!("{name}:{e}")),
        }
    }
    let mut f = vec![
        Finding::info(format!(
            "axis_of={} sample={} stabilizers={} window={} word_bound={}",
            gens[idx].0,
            sample.len(),
            stab.len() + nu_errors.len(),
            o.window,
            o.bound
        )),
        Finding::check(
            format!("nu_defined={} errors={} first_error={}", stab.len(), nu_errors.len(), tok(nu_errors.first().cloned().unwrap_or_default())),
            nu_errors.is_empty(),
        ),
    ];
    let (mut pairs, mut mismatches, mut inconsistent) = (0usize, 0usize, 0usize);
    let head = &stab[..stab.len().min(ORDER_SAMPLE)];
    for (i, (_, h1, c1)) in head.iter().enumerate() {
        for (_, h2, c2) in &head[i + 1..] {
            pairs += 1;
            match end.compare_stabilizers(h1, h2) {
                Ok(d) if d.verdict == c1.cmp(c2) => {}
                Ok(_) => mismatches += 1,
                Err(_) => inconsistent += 1,
            }
        }
    }
    f.push(Finding::check(
        format!("nu_order pairs={pairs} mismatches={mismatches} inconsistent={inconsistent}"),
        mismatches == 0 && inconsistent == 0,
    ));
    let image: BTreeSet<Q> = stab.iter().map(|(_, _, c)| c.clone()).collect();
    if let (Some(lo), Some(hi)) = (image.first(), image.last()) {
        f.push(Finding::info(format!("nu_image size={} min={} max={}", image.len(), fmt_q(lo), fmt_q(hi))));
    }
    let coords: Vec<Q> = image.into_iter().collect();
    match dense_or_cyclic(&coords, &o.resolution) {
        Ok(Density::Dense { min_gap, resolution }) => {
            f.push(Finding::info(format!("density=dense min_gap={} resolution={}", fmt_q(&min_gap), fmt_q(&resolution))))
        }
        Ok(Density::CyclicWithGenerator { step, all_multiples }) => {
            f.push(Finding::info(format!("density=cyclic step={} all_multiples={all_multiples}", fmt_q(&step))))
        }
        Err(e) => f.push(Finding::info(format!("density=undetermined reason={}", tok(e)))),
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Finite groups

fn parse_key(table: &FiniteGroupTable, s: &str) -> Result<Vec<u32>, CliError> {
    match table.repr() {
        Repr::Matrix { n, p } => Ok(Mat::parse(s, *n, *p).map_err(input)?.entries().to_vec()),
        Repr::Perm { .. } => s.split(',').map(|t| t.trim().parse::<u32>().map_err(input)).collect(),
    }
}

fn step_token(s: &Step) -> String {
    format!("eps={} tau={}", s.eps, s.tau)
}

fn xpath_cmd(
    group: &str,
    class: &str,
    from: Option<&str>,
    to: Option<&str>,
    all_pairs: bool,
    cap: usize,
) -> Result<Vec<Finding>, CliError> {
    let kind = GroupKind::parse(group).map_err(input)?;
    let table = match FiniteGroupTable::build(&kind, cap) {
        Ok(t) => t,
        Err(ConjugacyError::CapExceeded(c)) => return Err(input(format!("group order exceeds --cap {c}"))),
        Err(e) => return Err(input(e)),
    };
    let cls = if class == "transvections" {
        table.transvection_class().ok_or_else(|| input("no transvection class in this group"))?
    } else {
        table.class_containing(&parse_key(&table, class)?).ok_or_else(|| input("class element not in group"))?
    };
    let ctx = TableClass { table: &table, class: cls };
    let size = table.classes()[cls].len();
    let mut f = vec![Finding::info(format!("group={group} order={} class_size={size}", table.len()))];
    if all_pairs {
        let pairs = size * size.saturating_sub(1) / 2;
        match class_diameter(&ctx) {
            Some(d) => f.push(Finding::check(format!("all_pairs pairs={pairs} connected=true max_path_length={d}"), true)),
            None => f.push(Finding::check(format!("all_pairs pairs={pairs} connected=false"), false)),
        }
        return Ok(f);
    }
    let (Some(from), Some(to)) = (from, to) else {
        return Err(CliError::Usage("xpath needs --all-pairs or both --from and --to".into()));
    };
    let lookup = |s: &str| -> Result<usize, CliError> {
        table.lookup(&parse_key(&table, s)?).ok_or_else(|| input(format!("{s} is not in the group")))
    };
    let (g, g2) = (lookup(from)?, lookup(to)?);
    match bfs_xpath(&ctx, g, g2).map_err(input)? {
        BfsResult::Path(path) => {
            f.push(Finding::check(format!("connected=true shortest_length={}", path.len()), true));
            for (i, e) in path.elements.iter().enumerate() {
                f.push(Finding::info(format!("path_element={i:03} value={}", table.format(*e))));
            }
            for (i, st) in path.steps.iter().enumerate() {
                f.push(Finding::info(format!("path_step={i:03} {}", step_token(st))));
            }
        }
        BfsResult::Disconnected { reachable } => {
            f.push(Finding::check(format!("connected=false reachable={reachable}"), false));
        }
    }
    if let Repr::Matrix { n, p } = table.repr() {
        let as_mat = |i: usize| Mat::new(*n, *p, &table.key(i).iter().map(|&x| x as i64).collect::<Vec<_>>());
        let (a, b) = (as_mat(g).map_err(input)?, as_mat(g2).map_err(input)?);
        if let (Some(t1), Some(t2)) = (factor_transvection(&a), factor_transvection(&b)) {
            f.push(constructive_finding(&t1, &t2));
        }
    }
    Ok(f)
}

fn constructive_finding(t1: &Transvection, t2: &Transvection) -> Finding {
    match transvection_xpath(t1, t2) {
        Ok((path, shape)) => {
            let ends_ok = path.elements.first() == Some(&t1.matrix()) && path.elements.last() == Some(&t2.matrix());
            let certified = is_x_path(&TransvectionClass, &path.elements).as_ref() == Some(&path.steps);
            let steps: Vec<String> = path.steps.iter().map(|s| format!("{}{}", s.eps, s.tau)).collect();
            Finding::check(
                format!("constructive shape={} length={} steps={}", shape_label(&shape), path.len(), tok(steps.join(","))),
                ends_ok && certified && path.len() <= 5,
            )
        }
        Err(e) => Finding::check(format!("constructive error={}", tok(e)), false),
    }
}

fn shape_label(s: &PathShape) -> String {
    match s {
        PathShape::Generic => "generic".into(),
        PathShape::GenericReversed => "generic_reversed".into(),
        PathShape::Short(k) => k.replace('-', "_"),
    }
}

fn random_vec<R: Rng>(rng: &mut R, n: usize, p: u32) -> Vec<i64> {
    loop {
        let v: Vec<i64> = (0..n).map(|_| rng.gen_range(0..p as i64)).collect();
        if v.iter().any(|&x| x != 0) {
            return v;
        }
    }
}

fn random_transvection<R: Rng>(rng: &mut R, n: usize, p: u32) -> Transvection {
    loop {
        let (u, v) = (random_vec(rng, n, p), random_vec(rng, n, p));
        let xi = rng.gen_range(1..p as i64);
        if let Ok(t) = make_transvection(&u, &v, xi, p) {
            return t;
        }
    }
}

const PRIMES: [u32; 3] = [2, 3, 5];
const DIMS: [usize; 2] = [3, 4];

fn sl_demo(draws: usize, pairs: usize, seed: u64) -> Vec<Finding> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut holds = 0usize;
    let mut nontrivial = 0usize;
    for _ in 0..draws {
        let (p, n) = (PRIMES[rng.gen_range(0..3)], DIMS[rng.gen_range(0..2)]);
        let t1 = random_transvection(&mut rng, n, p);
        let check = loop {
            let t2 = random_transvection(&mut rng, n, p);
            if let Ok(c) = chevalley_commutator(&t1, &t2) {
                break c;
            }
        };
        holds += usize::from(check.holds);
        nontrivial += usize::from(check.predicted.is_some());
    }
    let mut shapes: BTreeMap<String, usize> = BTreeMap::new();
    let (mut certified, mut longest) = (0usize, 0usize);
    for _ in 0..pairs {
        let (p, n) = (PRIMES[rng.gen_range(0..3)], DIMS[rng.gen_range(0..2)]);
        let (t1, t2) = (random_transvection(&mut rng, n, p), random_transvection(&mut rng, n, p));
        let fnd = constructive_finding(&t1, &t2);
        if fnd.ok {
            certified += 1;
        }
        if let Ok((path, shape)) = transvection_xpath(&t1, &t2) {
            longest = longest.max(path.len());
            *shapes.entry(shape_label(&shape)).or_default() += 1;
        }
    }
    let mut f = vec![
        Finding::check(format!("chevalley draws={draws} holds={holds} nontrivial={nontrivial} seed={seed}"), holds == draws),
        Finding::check(format!("xpath pairs={pairs} certified={certified} max_length={longest}"), certified == pairs),
    ];
    f.extend(shapes.into_iter().map(|(k, v)| Finding::info(format!("xpath_shape={k} count={v}"))));
    f
}

// ---------------------------------------------------------------------------
// Free-group example and metrization

fn f2_demo(
    radius: usize,
    v: &str,
    check: F2Check,
    bound: Option<usize>,
    window: Option<usize>,
) -> Result<Vec<Finding>, CliError> {
    let v = f2_lab::parse_point(v).ok_or_else(|| input(format!("bad point {v}")))?;
    let vertex = match &v {
        Pt::V(w) => w.clone(),
        Pt::E { .. } => Word::identity(),
    };
    let want = |c: F2Check| check == F2Check::All || check == c;
    let mut results = Vec::new();
    if want(F2Check::Phi2) {
        results.push(f2_lab::check_phi_squared(bound.unwrap_or(8)));
    }
    if want(F2Check::Identities) {
        results.push(f2_lab::verify_generator_identities(bound.unwrap_or(8)));
    }
    if want(F2Check::OrbitClosure) {
        results.push(f2_lab::check_orbit_closure(radius, bound.unwrap_or(8)));
    }
    if want(F2Check::OrbitLabels) {
        results.push(f2_lab::check_orbit_labels(&v, radius, bound.unwrap_or(8)));
    }
    if want(F2Check::EvenDistance) {
        results.push(f2_lab::check_even_axis_distances(&vertex, bound.unwrap_or(6), window.unwrap_or(6)));
    }
    Ok(results
        .into_iter()
        .map(|c| {
            let detail: Vec<String> = c.detail.iter().map(|(k, v)| format!("{k}={}", tok(v))).collect();
            Finding::check(format!("check={} {}", c.name, detail.join(" ")), c.passed)
        })
        .collect())
}

fn isometrize_cmd(pretree: &str, gens: &str) -> Result<Output, CliError> {
    let t = FinitePretree::parse(pretree).map_err(input)?;
    let n = t.len();
    let mut perms = Vec::new();
    for spec in parse_automorphisms(gens)? {
        let AutSpec::Perm { name, pairs } = spec else {
            return Err(input(format!("{}: isometrize takes `perm` blocks over point indices", spec.name())));
        };
        let mut images: Vec<usize> = (0..n).collect();
        for (x, y) in &pairs {
            let idx = |s: &str| s.parse::<usize>().ok().filter(|&i| i < n).ok_or_else(|| input(format!("{name}: bad point {s}")));
            images[idx(x)?] = idx(y)?;
        }
        if images.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(input(format!("{name}: not a bijection")));
        }
        perms.push(PartialPerm::total(&name, images));
    }
    let d = DiscreteMedianClosure { pretree: t, gens: perms };
    match discrete_to_simplicial(&d) {
        Ok(m) => {
            let f = m
                .certificates
                .iter()
                .map(|c| {
                    Finding::check(
                        format!("isometry gen={} pairs={} edges={} failures={}", c.name, c.pairs_checked, c.edges_checked, c.failures.len()),
                        c.ok(),
                    )
                })
                .collect();
            Ok((m.tree.to_text(), f))
        }
        Err(e) => Ok((String::new(), vec![Finding::check(format!("realization error={}", tok(e)), false)])),
    }
}
