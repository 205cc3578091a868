use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;

use degenspread::bounds::{
    self, ineq2_cell, ineq2_check, lemma31_check, lemma31_sweep, lemma32_check, lemma32_sweep, BoundCheck, Lemma31Reading,
    SweepSummary,
};
use degenspread::degeneracy::{
    alpha_star, certify_degenerate, density_mi, expectation_threshold, locally_sparse_audit, DegeneracyParams, PeMode,
    PE_DEFAULT_BUDGET,
};
use degenspread::hypercore::{isomorphism_classes, parse_hypergraph, write_hypergraph};
use degenspread::rational;
use degenspread::spread::{
    edge_spread_audit, gamma_spread_audit, level_schedule, multilevel_spread_audit, pushforward_copies,
    uniform_embedding_distribution, vertex_spread_audit, AuditConfig, LevelSchedule, ModeRequest, SpreadAuditReport,
};
use degenspread::structgen::{GenSpec, TargetSpec};
use degenspread::threshold::{run_experiment, ExperimentConfig, ExperimentResult, Strategy, DEFAULT_CONTAINMENT_BUDGET, DEFAULT_TIMEOUT_GATE};
use degenspread::{Budget, Error, Hypergraph, Rational};

use crate::manifest::{FileDigest, RunManifest};
use crate::{Command, Global, EXIT_BUDGET, EXIT_USAGE, EXIT_VERDICT};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    Io(PathBuf, std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_budget() => EXIT_BUDGET,
            _ => EXIT_USAGE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn opt_rational<S: serde::Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&rational::render(r)),
        None => s.serialize_none(),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<T>().map_err(|_| format!("bad list entry {t:?}")))
        .collect()
}

/// Comma-separated list flag.
#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct List<T>(pub Vec<T>);

fn parse_usize_list(s: &str) -> std::result::Result<List<usize>, String> {
    parse_list(s).map(List)
}

fn parse_f64_list(s: &str) -> std::result::Result<List<f64>, String> {
    parse_list(s).map(List)
}

struct Ctx<'a> {
    global: &'a Global,
    manifest: RunManifest,
    report: String,
}

impl Ctx<'_> {
    fn budget(&self) -> Budget {
        self.global.budget.map(Budget::nodes).unwrap_or_default()
    }

    fn read_graph(&mut self, path: &Path) -> CliResult<Hypergraph> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        self.manifest.inputs.push(FileDigest::of_bytes(&path.display().to_string(), &bytes));
        let text = String::from_utf8(bytes).map_err(|_| usage(format!("{}: not UTF-8 text", path.display())))?;
        parse_hypergraph(&text).map_err(|e| match e {
            Error::Parse { line, message } => usage(format!("{}: line {line}: {message}", path.display())),
            other => CliError::Core(other),
        })
    }

    fn write_file(&mut self, path: &Path, bytes: &[u8]) -> CliResult<()> {
        std::fs::write(path, bytes).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        self.manifest.outputs.push(FileDigest::of_bytes(&path.display().to_string(), bytes));
        Ok(())
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.report.push_str(s.as_ref());
        self.report.push('\n');
    }

    fn json_line<T: Serialize>(&mut self, v: &T) {
        let s = serde_json::to_string(v).expect("report serializes");
        self.line(s);
    }

    fn json_pretty<T: Serialize>(&mut self, v: &T) {
        let s = serde_json::to_string_pretty(v).expect("report serializes");
        self.line(s);
    }

    fn finish(mut self) -> CliResult<()> {
        let report = std::mem::take(&mut self.report);
        match self.global.out.clone() {
            Some(path) => self.write_file(&path, report.as_bytes())?,
            None => {
                print!("{report}");
                self.manifest.outputs.push(FileDigest::of_bytes("<stdout>", report.as_bytes()));
            }
        }
        if let Some(path) = &self.global.manifest {
            self.manifest.write(path).map_err(|e| CliError::Io(path.clone(), e))?;
        }
        Ok(())
    }
}

pub fn run(name: &str, command: &Command, global: &Global) -> CliResult<u8> {
    let params = serde_json::to_value(command).expect("arguments serialize");
    let params = params.as_object().and_then(|o| o.values().next().cloned()).unwrap_or(params);
    let mut ctx = Ctx { global, manifest: RunManifest::new(name, params), report: String::new() };
    let code = match command {
        Command::Gen(a) => gen(&mut ctx, a)?,
        Command::Density(a) => density(&mut ctx, a)?,
        Command::Pe(a) => pe(&mut ctx, a)?,
        Command::AuditDegeneracy(a) => audit_degeneracy(&mut ctx, a)?,
        Command::SpreadAudit(a) => spread_audit(&mut ctx, a)?,
        Command::Schedule(a) => schedule(&mut ctx, a)?,
        Command::VerifyBounds(a) => verify_bounds(&mut ctx, a)?,
        Command::ThresholdScan(a) => threshold_scan(&mut ctx, a)?,
    };
    ctx.finish()?;
    Ok(code)
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    /// cycle_power | tight_cycle_power | d_degenerate_random | locally_sparse_regular | binomial_random
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn need<T: Copy>(v: Option<T>, family: &str, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| usage(format!("family {family} needs --{flag}")))
}

fn gen(ctx: &mut Ctx<'_>, a: &GenArgs) -> CliResult<u8> {
    let f = a.family.as_str();
    let spec = match f {
        "cycle_power" => GenSpec::CyclePower { n: a.n, r: need(a.r, f, "r")? },
        "tight_cycle_power" => GenSpec::TightCyclePower { n: a.n, k: need(a.k, f, "k")?, r: need(a.r, f, "r")? },
        "d_degenerate_random" => GenSpec::DDegenerateRandom { n: a.n, d: need(a.d, f, "d")?, seed: a.seed },
        "locally_sparse_regular" => GenSpec::LocallySparseRegular { n: a.n, d: need(a.d, f, "d")? },
        "binomial_random" => GenSpec::BinomialRandom { n: a.n, k: a.k.unwrap_or(2), p: need(a.p, f, "p")?, seed: a.seed },
        other => return Err(usage(format!("unknown family {other:?}"))),
    };
    if spec.is_randomized() {
        ctx.manifest.seeds.push(a.seed);
    }
    let h = spec.generate()?;
    ctx.line(format!("# {}", serde_json::to_string(&spec).expect("spec serializes")));
    ctx.report.push_str(&write_hypergraph(&h));
    Ok(0)
}

#[derive(Debug, Args, Serialize)]
pub struct DensityArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub i: usize,
}

fn one_based(vs: &[usize]) -> String {
    let parts: Vec<String> = vs.iter().map(|v| (v + 1).to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn density(ctx: &mut Ctx<'_>, a: &DensityArgs) -> CliResult<u8> {
    let h = ctx.read_graph(&a.file)?;
    let rep = density_mi(&h, a.i, ctx.budget())?;
    if ctx.global.json {
        ctx.json_pretty(&rep);
    } else {
        ctx.line(rational::render(&rep.value));
    }
    Ok(0)
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PeModeArg {
    Standard,
    Literal,
}

#[derive(Debug, Args, Serialize)]
pub struct PeArgs {
    pub file: PathBuf,
    #[arg(long, value_enum, default_value_t = PeModeArg::Standard)]
    pub mode: PeModeArg,
}

fn pe(ctx: &mut Ctx<'_>, a: &PeArgs) -> CliResult<u8> {
    let h = ctx.read_graph(&a.file)?;
    let mode = match a.mode {
        PeModeArg::Standard => PeMode::Standard,
        PeModeArg::Literal => PeMode::Literal,
    };
    let budget = ctx.global.budget.map(Budget::nodes).unwrap_or(Budget::nodes(PE_DEFAULT_BUDGET));
    let rep = expectation_threshold(&h, mode, budget)?;
    if ctx.global.json {
        ctx.json_pretty(&rep);
    } else {
        ctx.line(format!("{}", rep.value));
    }
    Ok(0)
}

#[derive(Debug, Args, Serialize)]
pub struct AuditDegeneracyArgs {
    pub file: PathBuf,
    #[arg(long, value_parser = parse_rational)]
    #[serde(with = "rational::serde_rational")]
    pub d: Rational,
    /// Certify `(d, alpha)`-degeneracy; without it only alpha* is reported.
    #[arg(long, value_parser = parse_rational)]
    #[serde(serialize_with = "opt_rational")]
    pub alpha: Option<Rational>,
    #[arg(long, value_parser = parse_rational, default_value = "1")]
    #[serde(with = "rational::serde_rational")]
    pub eps: Rational,
    #[arg(long, default_value_t = 2)]
    pub u_min: usize,
    /// Also audit the minimum edge boundary over d ≤ |U| ≤ eps·n (graphs, integer d).
    #[arg(long)]
    pub locally_sparse: bool,
}

fn audit_degeneracy(ctx: &mut Ctx<'_>, a: &AuditDegeneracyArgs) -> CliResult<u8> {
    let h = ctx.read_graph(&a.file)?;
    let budget = ctx.budget();
    let report = match a.alpha {
        Some(alpha) => certify_degenerate(&h, &DegeneracyParams { d: a.d, alpha, eps: a.eps, u_min: a.u_min }, budget)?,
        None => alpha_star(&h, a.d, a.eps, a.u_min, budget)?,
    };
    let mut ok = report.certificate.as_ref().map_or(true, |c| c.verdict.passed());
    let local = if a.locally_sparse {
        if !a.d.is_integer() || *a.d.numer() < 1 {
            return Err(usage("--locally-sparse needs a positive integer --d"));
        }
        let rep = locally_sparse_audit(&h, *a.d.numer() as usize, a.eps, budget)?;
        ok &= rep.verdict.passed();
        Some(rep)
    } else {
        None
    };
    ctx.json_pretty(&json!({ "degeneracy": report, "local_sparsity": local }));
    if !ok {
        let w = report
            .certificate
            .as_ref()
            .and_then(|c| c.falsified_by.as_ref())
            .map(|u| one_based(u.as_slice()))
            .unwrap_or_default();
        eprintln!("verdict: fail {w}");
    }
    Ok(if ok { 0 } else { EXIT_VERDICT })
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NotionArg {
    Vertex,
    Edge,
    Multilevel,
    Gamma,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Debug, Args, Serialize)]
pub struct SpreadAuditArgs {
    #[arg(long, value_enum)]
    pub notion: NotionArg,
    #[arg(long)]
    pub pattern: PathBuf,
    #[arg(long)]
    pub host: PathBuf,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub r_prime: Option<usize>,
    /// Comma-separated levels, e.g. `512,64,6,1`.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Largest event size (s or t) for the vertex and edge notions.
    #[arg(long)]
    pub max_size: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

const Q_SLACK: f64 = 1e-12;

fn spread_audit(ctx: &mut Ctx<'_>, a: &SpreadAuditArgs) -> CliResult<u8> {
    let pattern = ctx.read_graph(&a.pattern)?;
    let host = ctx.read_graph(&a.host)?;
    let budget = ctx.budget();
    let mut cfg = AuditConfig {
        mode: match a.mode {
            ModeArg::Auto => ModeRequest::Auto,
            ModeArg::Exhaustive => ModeRequest::Exhaustive,
            ModeArg::Sampled => ModeRequest::Sampled,
        },
        samples: a.samples,
        seed: a.seed,
        ..AuditConfig::default()
    };
    if let Some(b) = ctx.global.budget {
        cfg.max_events = b;
    }
    if matches!(a.mode, ModeArg::Sampled | ModeArg::Auto) {
        ctx.manifest.seeds.push(a.seed);
    }
    let dist = uniform_embedding_distribution(&pattern, &host, budget)?;
    let with_q = |mut rep: SpreadAuditReport, q: Option<f64>| {
        if let Some(q) = q {
            rep.q = Some(q);
            rep.verdict = Some(degenspread::degeneracy::Verdict::from_bool(rep.achieved_q <= q * (1.0 + Q_SLACK)));
        }
        rep
    };
    let report = match a.notion {
        NotionArg::Vertex => with_q(vertex_spread_audit(&dist, a.max_size.unwrap_or(pattern.n()), &cfg)?, a.q),
        NotionArg::Edge => {
            let copies = pushforward_copies(&dist)?;
            with_q(edge_spread_audit(&copies, a.max_size.unwrap_or(pattern.edge_count()), &cfg)?, a.q)
        }
        NotionArg::Multilevel => {
            let q = a.q.ok_or_else(|| usage("multilevel audit needs --q"))?;
            let text = a.schedule.as_deref().ok_or_else(|| usage("multilevel audit needs --schedule"))?;
            let schedule: LevelSchedule = text.parse()?;
            multilevel_spread_audit(&pushforward_copies(&dist)?, q, &schedule, &cfg)?
        }
        NotionArg::Gamma => {
            let q = a.q.ok_or_else(|| usage("gamma audit needs --q"))?;
            let gamma = a.gamma.ok_or_else(|| usage("gamma audit needs --gamma"))?;
            let r = a.r.ok_or_else(|| usage("gamma audit needs --r"))?;
            let r_prime = a.r_prime.ok_or_else(|| usage("gamma audit needs --r-prime"))?;
            gamma_spread_audit(&pushforward_copies(&dist)?, q, gamma, r, r_prime, &cfg)?
        }
    };
    ctx.json_pretty(&report);
    Ok(if report.verdict.is_some_and(|v| !v.passed()) { EXIT_VERDICT } else { 0 })
}

#[derive(Debug, Args, Serialize)]
pub struct ScheduleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = parse_rational)]
    #[serde(with = "rational::serde_rational")]
    pub d: Rational,
    #[arg(long, value_parser = parse_rational)]
    #[serde(with = "rational::serde_rational")]
    pub alpha: Rational,
    #[arg(long, value_parser = parse_rational)]
    #[serde(with = "rational::serde_rational")]
    pub eps: Rational,
    #[arg(long)]
    pub k: usize,
}

fn schedule(ctx: &mut Ctx<'_>, a: &ScheduleArgs) -> CliResult<u8> {
    let s = level_schedule(a.n, a.d, a.alpha, a.eps, a.k)?;
    if ctx.global.json {
        ctx.json_line(&s);
    } else {
        ctx.line(s.to_string());
    }
    Ok(0)
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Lemma31,
    Lemma32,
    Ineq2,
    Sweep,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReadingArg {
    Literal,
    Covering,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyBoundsArgs {
    #[arg(long, value_enum)]
    pub which: Which,
    /// The graph G (lemma31, lemma32).
    #[arg(long)]
    pub g: Option<PathBuf>,
    /// The host H (lemma31).
    #[arg(long)]
    pub h: Option<PathBuf>,
    /// Edge ids of F in H; every nonempty F when absent.
    #[arg(long, value_parser = parse_usize_list)]
    pub f: Option<List<usize>>,
    #[arg(long, value_enum, default_value_t = ReadingArg::Literal)]
    pub reading: ReadingArg,
    /// Edge ids of S in G; every (S, t, c) when absent.
    #[arg(long, value_parser = parse_usize_list)]
    pub s: Option<List<usize>>,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub c: Option<usize>,
    /// |S| for ineq2.
    #[arg(long)]
    pub size_s: Option<usize>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_parser = parse_rational)]
    #[serde(serialize_with = "opt_rational")]
    pub d: Option<Rational>,
    #[arg(long, value_parser = parse_rational)]
    #[serde(serialize_with = "opt_rational")]
    pub alpha: Option<Rational>,
    #[arg(long, value_parser = parse_rational, default_value = "1/2")]
    #[serde(with = "rational::serde_rational")]
    pub eps: Rational,
    /// Largest vertex count of the graph classes in `sweep`.
    #[arg(long, default_value_t = 5)]
    pub max_n: usize,
    /// Sampled points per `ineq2` cell in `sweep`.
    #[arg(long, default_value_t = 10_000)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

const ENUMERATION_EDGE_LIMIT: usize = 16;

fn verify_bounds(ctx: &mut Ctx<'_>, a: &VerifyBoundsArgs) -> CliResult<u8> {
    let budget = ctx.budget();
    let reading = match a.reading {
        ReadingArg::Literal => Lemma31Reading::Literal,
        ReadingArg::Covering => Lemma31Reading::Covering,
    };
    let mut checks: Vec<BoundCheck> = Vec::new();
    let mut sweeps: Vec<(String, SweepSummary)> = Vec::new();
    match a.which {
        Which::Lemma31 => {
            let g = ctx.read_graph(a.g.as_deref().ok_or_else(|| usage("lemma31 needs --g"))?)?;
            let h = ctx.read_graph(a.h.as_deref().ok_or_else(|| usage("lemma31 needs --h"))?)?;
            match &a.f {
                Some(f) => checks.push(lemma31_check(&g, &h, &f.0, reading, budget)?),
                None => {
                    let m = h.edge_count();
                    if m > ENUMERATION_EDGE_LIMIT {
                        return Err(usage(format!("enumerating every F needs at most {ENUMERATION_EDGE_LIMIT} host edges; pass --f")));
                    }
                    for fm in 1u64..1 << m {
                        let f: Vec<usize> = (0..m).filter(|&e| fm >> e & 1 == 1).collect();
                        checks.push(lemma31_check(&g, &h, &f, reading, budget)?);
                    }
                }
            }
        }
        Which::Lemma32 => {
            let g = ctx.read_graph(a.g.as_deref().ok_or_else(|| usage("lemma32 needs --g"))?)?;
            match (&a.s, a.t, a.c) {
                (Some(s), Some(t), Some(c)) => checks.push(lemma32_check(&g, &s.0, t, c, budget)?),
                (None, None, None) => {
                    let m = g.edge_count();
                    if m > ENUMERATION_EDGE_LIMIT {
                        return Err(usage(format!("enumerating every S needs at most {ENUMERATION_EDGE_LIMIT} edges; pass --s --t --c")));
                    }
                    for size in 1..=m {
                        for s in degenspread::hypercore::k_subsets(m, size) {
                            for t in 1..=size {
                                for c in 1..=t {
                                    checks.push(lemma32_check(&g, &s, t, c, budget)?);
                                }
                            }
                        }
                    }
                }
                _ => return Err(usage("lemma32 needs all of --s --t --c, or none")),
            }
        }
        Which::Ineq2 => {
            let get = |v: Option<usize>, flag: &str| v.ok_or_else(|| usage(format!("ineq2 needs --{flag}")));
            let n = a.n.ok_or_else(|| usage("ineq2 needs --n"))?;
            let d = a.d.ok_or_else(|| usage("ineq2 needs --d"))?;
            let alpha = a.alpha.ok_or_else(|| usage("ineq2 needs --alpha"))?;
            checks.push(ineq2_check(get(a.size_s, "size-s")?, get(a.t, "t")?, get(a.c, "c")?, n, get(a.k, "k")?, d, alpha, a.eps)?);
        }
        Which::Sweep => {
            ctx.manifest.seeds.push(a.seed);
            let mut l32 = SweepSummary::new(bounds::BoundName::Lemma32);
            let mut l31 = SweepSummary::new(bounds::BoundName::Lemma31);
            for n in 1..=a.max_n {
                for g in isomorphism_classes(2, n)? {
                    l32.merge(lemma32_sweep(&g, g.edge_count())?);
                    if n <= 5 && g.edge_count() > 0 {
                        let host = Hypergraph::complete(2, n)?;
                        l31.merge(lemma31_sweep(&g, &host, reading, budget)?);
                    }
                }
            }
            sweeps.push(("lemma32 graphs".into(), l32));
            sweeps.push((format!("lemma31 complete hosts ({reading})"), l31));
            let half = Rational::new(1, 2);
            for n in [1_000u64, 10_000] {
                for k in [2usize, 3] {
                    for d in [2i64, 3] {
                        for alpha in [half, Rational::from_integer(1)] {
                            let cell = ineq2_cell(n, k, Rational::from_integer(d), alpha, half, a.points, a.seed)?;
                            let label = format!("ineq2 n={n} k={k} d={d} alpha={}", rational::render(&alpha));
                            sweeps.push((format!("{label} small"), cell.small_regime));
                            sweeps.push((format!("{label} large"), cell.large_regime));
                        }
                    }
                }
            }
        }
    }
    let mut ok = true;
    for c in &checks {
        ok &= c.passed();
        ctx.json_line(c);
    }
    for (label, s) in &sweeps {
        ok &= s.passed();
        ctx.json_line(&json!({ "sweep": label, "summary": s }));
    }
    Ok(if ok { 0 } else { EXIT_VERDICT })
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyArg {
    Auto,
    Generic,
    Matching,
    ExactCover,
}

#[derive(Debug, Args, Serialize)]
pub struct ThresholdScanArgs {
    /// Pattern family, e.g. `cycle_power:r=2` or `perfect_matching`.
    #[arg(long, required_unless_present = "replay")]
    pub target: Option<String>,
    #[arg(long, value_parser = parse_usize_list, required_unless_present = "replay")]
    pub n_list: Option<List<usize>>,
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fixed p values; bisection for p_half when absent.
    #[arg(long, value_parser = parse_f64_list)]
    pub p_grid: Option<List<f64>>,
    #[arg(long, default_value_t = DEFAULT_TIMEOUT_GATE)]
    pub timeout_gate: f64,
    #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
    pub strategy: StrategyArg,
    /// JSON-lines trial records.
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Re-run the experiment recorded in this manifest and compare record digests.
    #[arg(long)]
    pub replay: Option<PathBuf>,
}

const RECORDS_KEY: &str = "<records>";

fn records_bytes(result: &ExperimentResult) -> Vec<u8> {
    let mut out = Vec::new();
    for r in &result.records {
        serde_json::to_writer(&mut out, r).expect("record serializes");
        out.push(b'\n');
    }
    out
}

fn grid_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("n,p,estimate,ci_lo,ci_hi,timeouts\n");
    for e in &result.grid {
        let _ = writeln!(out, "{},{},{},{},{},{}", e.n, e.p, e.estimate, e.ci_lo, e.ci_hi, e.timeouts);
    }
    out
}

fn threshold_scan(ctx: &mut Ctx<'_>, a: &ThresholdScanArgs) -> CliResult<u8> {
    let (config, expected) = match &a.replay {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.clone(), e))?;
            ctx.manifest.inputs.push(FileDigest::of_bytes(&path.display().to_string(), text.as_bytes()));
            let m: RunManifest = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            if m.subcommand != "threshold-scan" {
                return Err(usage(format!("{}: manifest is for {:?}, not threshold-scan", path.display(), m.subcommand)));
            }
            let config: ExperimentConfig = serde_json::from_value(m.params["config"].clone())
                .map_err(|e| usage(format!("{}: bad config: {e}", path.display())))?;
            let digest = m.output(RECORDS_KEY).map(|d| d.sha256.clone());
            (config, digest)
        }
        None => {
            let target: TargetSpec = a.target.as_deref().unwrap_or_default().parse()?;
            let config = ExperimentConfig {
                target,
                n_list: a.n_list.clone().map(|l| l.0).unwrap_or_default(),
                p_grid: a.p_grid.clone().map(|l| l.0),
                trials: a.trials,
                seed: a.seed,
                budget_nodes: ctx.global.budget.unwrap_or(DEFAULT_CONTAINMENT_BUDGET),
                timeout_gate: a.timeout_gate,
                strategy: match a.strategy {
                    StrategyArg::Auto => Strategy::Auto,
                    StrategyArg::Generic => Strategy::Generic,
                    StrategyArg::Matching => Strategy::Matching,
                    StrategyArg::ExactCover => Strategy::ExactCover,
                },
            };
            (config, None)
        }
    };
    config.validate()?;
    ctx.manifest.params = json!({ "args": ctx.manifest.params, "config": config, "config_hash": config.hash() });
    ctx.manifest.seeds.push(config.seed);
    let result = run_experiment(&config, ctx.global.timing)?;
    let records = records_bytes(&result);
    ctx.manifest.outputs.push(FileDigest::of_bytes(RECORDS_KEY, &records));
    if let Some(path) = &a.records {
        ctx.write_file(path, &records)?;
    }
    if ctx.global.json {
        ctx.json_pretty(&json!({ "config_hash": result.config_hash, "estimates": result.estimates, "grid": result.grid }));
    } else if config.p_grid.is_some() {
        ctx.report.push_str(&grid_csv(&result));
    } else {
        ctx.report.push_str(&result.csv_summary());
    }
    if a.replay.is_some() {
        let got = FileDigest::of_bytes(RECORDS_KEY, &records).sha256;
        let same = expected.as_deref() == Some(got.as_str());
        eprintln!("replay: records {} (sha256 {got})", if same { "identical" } else { "DIFFER" });
        if !same {
            return Ok(EXIT_VERDICT);
        }
    }
    Ok(if result.reliable() { 0 } else { EXIT_BUDGET })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_flags() {
        assert_eq!(parse_usize_list("6, 8,10").unwrap().0, vec![6, 8, 10]);
        assert_eq!(parse_f64_list("0.25,1").unwrap().0, vec![0.25, 1.0]);
        assert!(parse_usize_list("6,x").is_err());
    }

    #[test]
    fn budget_errors_map_to_exit_two() {
        let e = CliError::Core(Error::BudgetExceeded { operation: "x", budget: 1, best: None });
        assert_eq!(e.exit_code(), EXIT_BUDGET);
        assert_eq!(usage("bad").exit_code(), EXIT_USAGE);
    }
}
