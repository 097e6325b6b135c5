//! The `prc` command line.
//!
//! Every artifact carries a manifest whose `argv` is the fully expanded
//! command line (defaults included), so `prc replay <artifact>` regenerates
//! it byte for byte. JSON output renders every number as a decimal string.
//! Timing goes to stderr only.
//!
//! Exit codes: 0 success, 1 a check failed, 2 refusal or truncation,
//! 64 usage error, 65 composite seed, 66 unreadable or malformed input file.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::chain::{
    approximants_nested, build_chain, theta_window_report, verify_chain, ChainConfig, PrimeChain, Selection,
    DEFAULT_RESCAN_CAP, DEFAULT_WINDOW_BITS,
};
use crate::error::Error;
use crate::exec::Execution;
use crate::explorer::{branching_stats, check_forest, explore_tree, gap_intervals, ExploreConfig};
use crate::exps::ExponentSequence;
use crate::policy::GapPolicy;
use crate::primality::{
    certainty_for, Certainty, PrimalityConfig, SearchConfig, DEFAULT_BUDGET, DEFAULT_ENUMERATION_CAP, DEFAULT_ROUNDS,
};
use crate::radix::{prc_digits, rational_approx_scan, verify_floor_recovery, FloorVerdict, RadixConfig, DEFAULT_RADICAND_BITS};

pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILED_CHECK: i32 = 1;
    pub const REFUSED: i32 = 2;
    pub const USAGE: i32 = 64;
    pub const COMPOSITE_SEED: i32 = 65;
    pub const BAD_INPUT: i32 = 66;
}

const MANIFEST_PREFIX: &str = "# manifest: ";

#[derive(Debug, Parser)]
#[command(name = "prc", version, about = "Prime chains, certified digits and cylinder trees for Mills-type constants")]
pub struct Cli {
    /// Pin outputs in DIR: the first run writes them, later runs must match.
    #[arg(long, global = true, value_name = "DIR")]
    pub fixture_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a min or max prime chain.
    Chain(ChainArgs),
    /// Certified decimal digits of every constant extending a chain.
    Digits(DigitsArgs),
    /// Re-check a chain file written by `chain`.
    Verify(VerifyArgs),
    /// Enumerate the cylinder tree below a range of seeds.
    Explore(ExploreArgs),
    /// Certified distances from a constant to fractions with small denominators.
    Approx(ApproxArgs),
    /// Re-run the command recorded in an artifact's manifest.
    Replay {
        /// Artifact written by an earlier run.
        file: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Min,
    Max,
}

impl From<Mode> for Selection {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Min => Selection::Min,
            Mode::Max => Selection::Max,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Candidates examined per window before giving up.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Random-base Miller-Rabin rounds above the deterministic range.
    #[arg(long, default_value_t = DEFAULT_ROUNDS)]
    pub rounds: u32,
    /// Ceiling on the size of (p+1)^c, in bits.
    #[arg(long, default_value_t = DEFAULT_WINDOW_BITS)]
    pub window_bits: u64,
    /// Ceiling on radicand size for roots, in bits.
    #[arg(long, env = "PRC_BIT_CEILING", default_value_t = DEFAULT_RADICAND_BITS)]
    pub bit_ceiling: u64,
    /// Run on one thread. Output is identical either way.
    #[arg(long)]
    pub sequential: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct ChainSpec {
    /// Exponent sequence: const:<c>, factorial, powfact:<b> or list:<c1>,<c2>,...
    #[arg(long, value_parser = parse_exps)]
    pub exps: ExponentSequence,
    /// First prime of the chain.
    #[arg(long, value_parser = parse_big)]
    pub seed: BigUint,
    /// Number of primes.
    #[arg(long)]
    pub depth: usize,
    #[arg(long, value_enum, default_value_t = Mode::Min)]
    pub mode: Mode,
    /// mattner, cully-hugill, rh-cms or empirical.
    #[arg(long, value_parser = parse_policy, default_value = "empirical")]
    pub gap_policy: GapPolicy,
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    #[command(flatten)]
    pub spec: ChainSpec,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DigitsArgs {
    #[command(flatten)]
    pub spec: ChainSpec,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Largest number of decimal places to try.
    #[arg(long, default_value_t = 2000)]
    pub max_digits: u64,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Chain JSON as written by `prc chain`.
    #[arg(long)]
    pub chain_file: PathBuf,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Candidates rescanned per step when re-checking extremality.
    #[arg(long, default_value_t = DEFAULT_RESCAN_CAP)]
    pub rescan_cap: u64,
    /// Precision cap for the floor-recovery check.
    #[arg(long, default_value_t = 2000)]
    pub max_digits: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ExploreArgs {
    #[arg(long, value_parser = parse_exps)]
    pub exps: ExponentSequence,
    /// Inclusive seed range `lo..hi`.
    #[arg(long, value_parser = parse_range)]
    pub seeds: SeedRange,
    /// Length of the chain prefixes at the leaves.
    #[arg(long)]
    pub depth: usize,
    /// Widest window listed in full; wider ones are truncated.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub enumeration_cap: u64,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub spec: ChainSpec,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Largest denominator scanned.
    #[arg(long)]
    pub max_den: u64,
    #[arg(long, default_value_t = 2000)]
    pub max_digits: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedRange {
    pub lo: BigUint,
    pub hi: BigUint,
}

fn parse_exps(s: &str) -> Result<ExponentSequence, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_big(s: &str) -> Result<BigUint, String> {
    s.trim().parse().map_err(|_| format!("`{s}` is not a non-negative integer"))
}

fn parse_policy(s: &str) -> Result<GapPolicy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_range(s: &str) -> Result<SeedRange, String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected lo..hi, got `{s}`"))?;
    let range = SeedRange {
        lo: parse_big(lo)?,
        hi: parse_big(hi.trim_start_matches('='))?,
    };
    if range.lo > range.hi {
        return Err(format!("empty seed range `{s}`"));
    }
    Ok(range)
}

/// A finished artifact and the exit code that goes with it.
struct Artifact {
    name: &'static str,
    format: Format,
    body: String,
    code: i32,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CompositeSeed(_) => exit::COMPOSITE_SEED,
            Error::BitCeiling { .. }
            | Error::PrecisionCeiling { .. }
            | Error::EnumerationCap { .. }
            | Error::TruncatedForest(_) => exit::REFUSED,
            Error::Schema(_) => exit::BAD_INPUT,
            Error::MalformedSpec { .. } | Error::InvalidTerm { .. } | Error::DepthOutOfRange { .. } | Error::ZeroDepth => {
                exit::USAGE
            }
        };
        Failure::new(code, e.to_string())
    }
}

/// Parses `args` (program name first), runs the command and writes the
/// artifact to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    exit::OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    exit::USAGE
                }
            };
        }
    };
    let started = Instant::now();
    let result = match &cli.command {
        Command::Replay { file } => replay(file),
        command => execute(command),
    };
    let artifact = match result {
        Ok(a) => a,
        Err(f) => {
            let _ = writeln!(err, "prc: {}", f.message);
            return f.code;
        }
    };
    let _ = writeln!(err, "prc: {} finished in {:.3}s", artifact.name, started.elapsed().as_secs_f64());
    let mut code = artifact.code;
    if let Some(dir) = &cli.fixture_dir {
        match check_fixture(dir, &artifact) {
            Ok(None) => {}
            Ok(Some(note)) => {
                let _ = writeln!(err, "prc: {note}");
                code = code.max(exit::FAILED_CHECK);
            }
            Err(f) => {
                let _ = writeln!(err, "prc: {}", f.message);
                return f.code;
            }
        }
    }
    if out.write_all(artifact.body.as_bytes()).and_then(|_| out.flush()).is_err() {
        return exit::BAD_INPUT;
    }
    code
}

fn execute(command: &Command) -> Result<Artifact, Failure> {
    match command {
        Command::Chain(a) => cmd_chain(a),
        Command::Digits(a) => cmd_digits(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Explore(a) => cmd_explore(a),
        Command::Approx(a) => cmd_approx(a),
        Command::Replay { file } => replay(file),
    }
}

fn replay(file: &Path) -> Result<Artifact, Failure> {
    let text = read_input(file)?;
    let manifest = if let Some(line) = text.lines().next().and_then(|l| l.strip_prefix(MANIFEST_PREFIX)) {
        serde_json::from_str::<Value>(line).ok()
    } else {
        serde_json::from_str::<Value>(&text).ok().and_then(|v| v.get("manifest").cloned())
    };
    let argv: Vec<String> = manifest
        .and_then(|m| m.get("argv").cloned())
        .and_then(|a| serde_json::from_value(a).ok())
        .ok_or_else(|| Failure::new(exit::BAD_INPUT, format!("{}: no manifest argv", file.display())))?;
    let cli = Cli::try_parse_from(std::iter::once("prc".to_string()).chain(argv))
        .map_err(|e| Failure::new(exit::BAD_INPUT, format!("{}: manifest argv rejected: {e}", file.display())))?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err(Failure::new(exit::BAD_INPUT, "manifest refers to another replay"));
    }
    execute(&cli.command)
}

/// Flag/value pairs that reproduce a run, in a fixed order.
struct Argv {
    command: &'static str,
    pairs: Vec<(&'static str, String)>,
}

impl Argv {
    fn new(command: &'static str) -> Self {
        Argv {
            command,
            pairs: Vec::new(),
        }
    }

    fn push(&mut self, flag: &'static str, value: impl ToString) -> &mut Self {
        self.pairs.push((flag, value.to_string()));
        self
    }

    fn spec(&mut self, s: &ChainSpec) -> &mut Self {
        let mode = match s.mode {
            Mode::Min => "min",
            Mode::Max => "max",
        };
        self.push("exps", &s.exps)
            .push("seed", &s.seed)
            .push("depth", s.depth)
            .push("mode", mode)
            .push("gap-policy", s.gap_policy)
    }

    fn search(&mut self, s: &SearchArgs) -> &mut Self {
        let format = match s.format {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "text",
        };
        self.push("budget", s.budget)
            .push("rounds", s.rounds)
            .push("window-bits", s.window_bits)
            .push("bit-ceiling", s.bit_ceiling)
            .push("format", format)
    }

    fn argv(&self) -> Vec<String> {
        let mut v = vec![self.command.to_string()];
        for (flag, value) in &self.pairs {
            v.push(format!("--{flag}"));
            v.push(value.clone());
        }
        v
    }

    fn manifest(&self, chain: Option<&PrimeChain>) -> Value {
        let config: BTreeMap<&str, &str> = self.pairs.iter().map(|(k, v)| (*k, v.as_str())).collect();
        let mut m = json!({
            "tool": "prc",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "argv": self.argv(),
            "config": config,
        });
        if let Some(c) = chain {
            m["certainty"] = json!(c.certainty());
            m["conditional"] = json!(c.conditional());
        }
        m
    }
}

fn execution(s: &SearchArgs) -> Execution {
    if s.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn search_config(s: &SearchArgs) -> SearchConfig {
    SearchConfig {
        primality: PrimalityConfig { rounds: s.rounds },
        budget: s.budget,
        enumeration_cap: DEFAULT_ENUMERATION_CAP,
        execution: execution(s),
    }
}

fn chain_config(s: &SearchArgs) -> ChainConfig {
    ChainConfig {
        search: search_config(s),
        window_bits: s.window_bits,
        rescan_cap: DEFAULT_RESCAN_CAP,
    }
}

fn radix_config(s: &SearchArgs) -> RadixConfig {
    RadixConfig {
        bit_ceiling: s.bit_ceiling,
        execution: execution(s),
    }
}

fn build(spec: &ChainSpec, search: &SearchArgs) -> Result<PrimeChain, Failure> {
    Ok(build_chain(
        &spec.exps,
        &spec.seed,
        spec.depth,
        spec.mode.into(),
        spec.gap_policy,
        &chain_config(search),
    )?)
}

fn truncation_code(chain: &PrimeChain) -> i32 {
    if chain.truncated().is_some() {
        exit::REFUSED
    } else {
        exit::OK
    }
}

fn cmd_chain(a: &ChainArgs) -> Result<Artifact, Failure> {
    let chain = build(&a.spec, &a.search)?;
    let mut argv = Argv::new("chain");
    argv.spec(&a.spec).search(&a.search);
    let manifest = argv.manifest(Some(&chain));
    let body = match a.search.format {
        Format::Json => {
            let mut doc = to_value(&chain);
            doc["manifest"] = manifest;
            render_json(doc)
        }
        Format::Csv => {
            let rows = chain
                .primes()
                .iter()
                .zip(chain.certainty())
                .enumerate()
                .map(|(i, (p, c))| vec![(i + 1).to_string(), p.to_string(), c.to_string()]);
            render_csv(&manifest, &["k", "prime", "certainty"], rows)?
        }
        Format::Text => {
            let lines: Vec<String> = chain.primes().iter().map(|p| p.to_string()).collect();
            render_text(&manifest, &lines)
        }
    };
    Ok(Artifact {
        name: "chain",
        format: a.search.format,
        body,
        code: truncation_code(&chain),
    })
}

fn cmd_digits(a: &DigitsArgs) -> Result<Artifact, Failure> {
    let chain = build(&a.spec, &a.search)?;
    let result = prc_digits(&chain, a.max_digits, &radix_config(&a.search))?;
    let mut argv = Argv::new("digits");
    argv.spec(&a.spec).search(&a.search).push("max-digits", a.max_digits);
    let manifest = argv.manifest(Some(&chain));
    let body = match a.search.format {
        Format::Json => {
            let mut doc = to_value(&result);
            doc["manifest"] = manifest;
            doc["lo"] = json!(result.enclosure.lo_decimal());
            doc["hi"] = json!(result.enclosure.hi_decimal());
            doc["primes"] = to_value(&chain)["primes"].take();
            if let Some(t) = chain.truncated() {
                doc["truncated"] = to_value(t);
            }
            render_json(doc)
        }
        Format::Csv => render_csv(
            &manifest,
            &["digits", "agreed_places", "lo_mantissa", "hi_mantissa", "digits_after_point"],
            std::iter::once(vec![
                result.digits.clone(),
                result.agreed_places.to_string(),
                result.enclosure.lo_mantissa().to_string(),
                result.enclosure.hi_mantissa().to_string(),
                result.enclosure.digits_after_point().to_string(),
            ]),
        )?,
        Format::Text => render_text(
            &manifest,
            &[result.digits.clone(), format!("agreed_places {}", result.agreed_places)],
        ),
    };
    Ok(Artifact {
        name: "digits",
        format: a.search.format,
        body,
        code: truncation_code(&chain),
    })
}

#[derive(Deserialize)]
struct ChainDoc {
    exps: ExponentSequence,
    primes: Vec<String>,
    mode: Selection,
    gap_policy: GapPolicy,
    certainty: Option<Vec<Certainty>>,
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(exit::BAD_INPUT, format!("{}: {e}", path.display())))
}

fn load_chain(path: &Path, config: &ChainConfig) -> Result<PrimeChain, Failure> {
    let text = read_input(path)?;
    let schema = |msg: String| Failure::new(exit::BAD_INPUT, format!("{}: {msg}", path.display()));
    let doc: ChainDoc = serde_json::from_str(&text).map_err(|e| schema(e.to_string()))?;
    let primes = doc
        .primes
        .iter()
        .map(|p| p.parse::<BigUint>().map_err(|_| schema(format!("`{p}` is not an integer"))))
        .collect::<Result<Vec<_>, _>>()?;
    let certainty = doc
        .certainty
        .unwrap_or_else(|| primes.iter().map(|p| certainty_for(p, &config.search.primality)).collect());
    PrimeChain::from_parts(doc.exps, primes, doc.mode, doc.gap_policy, certainty, None)
        .map_err(|e| schema(e.to_string()))
}

fn cmd_verify(a: &VerifyArgs) -> Result<Artifact, Failure> {
    let config = ChainConfig {
        rescan_cap: a.rescan_cap,
        ..chain_config(&a.search)
    };
    let chain = load_chain(&a.chain_file, &config)?;
    let radix = radix_config(&a.search);
    let report = verify_chain(&chain, &config);
    let nested = approximants_nested(&chain, config.window_bits).unwrap_or(false);
    let theta = theta_window_report(&chain, a.search.bit_ceiling);

    // every earlier prime must be recovered from the last cylinder
    let mut floors = Vec::new();
    let mut floor_mismatch = false;
    match prc_digits(&chain, a.max_digits, &radix) {
        Ok(d) => {
            for (i, p) in chain.primes().iter().enumerate() {
                let k = i + 1;
                let verdict = chain
                    .exps()
                    .partial_product(k)
                    .and_then(|c| verify_floor_recovery(&d.enclosure, &c, p, &radix));
                let label = match verdict {
                    Ok(FloorVerdict::Recovered) => "recovered",
                    Ok(FloorVerdict::Mismatch) => {
                        floor_mismatch = true;
                        "mismatch"
                    }
                    Ok(FloorVerdict::Indeterminate) => "indeterminate",
                    Err(_) => "skipped",
                };
                floors.push(json!({ "k": k, "verdict": label }));
            }
        }
        Err(e) => floors.push(json!({ "skipped": e.to_string() })),
    }

    let passed = report.all_passed && nested && !floor_mismatch;
    let mut argv = Argv::new("verify");
    argv.push("chain-file", a.chain_file.display())
        .search(&a.search)
        .push("rescan-cap", a.rescan_cap)
        .push("max-digits", a.max_digits);
    let manifest = argv.manifest(Some(&chain));
    let body = match a.search.format {
        Format::Json => render_json(json!({
            "manifest": manifest,
            "exps": chain.exps(),
            "primes": to_value(&chain)["primes"].take(),
            "steps": report.steps,
            "all_passed": passed,
            "approximants_nested": nested,
            "floor_recovery": floors,
            "theta": theta,
        })),
        Format::Csv | Format::Text => {
            let rows = report.steps.iter().map(|s| {
                vec![
                    s.k.to_string(),
                    s.prime.to_string(),
                    s.prime_ok.to_string(),
                    s.certainty.to_string(),
                    s.in_window.map_or("-".to_string(), |b| b.to_string()),
                    extremality_label(&s.extremality),
                ]
            });
            render_csv(
                &manifest,
                &["k", "prime", "prime_ok", "certainty", "in_window", "extremality"],
                rows,
            )?
        }
    };
    Ok(Artifact {
        name: "verify",
        format: a.search.format,
        body,
        code: if passed { exit::OK } else { exit::FAILED_CHECK },
    })
}

fn extremality_label(e: &crate::chain::Extremality) -> String {
    use crate::chain::Extremality::*;
    match e {
        NotApplicable => "n/a".into(),
        Verified => "verified".into(),
        Violated { witness } => format!("violated:{witness}"),
        Unverified { cap } => format!("unverified:{cap}"),
    }
}

fn cmd_explore(a: &ExploreArgs) -> Result<Artifact, Failure> {
    let config = ExploreConfig {
        search: SearchConfig {
            enumeration_cap: a.enumeration_cap,
            ..search_config(&a.search)
        },
        radix: radix_config(&a.search),
        window_bits: a.search.window_bits,
    };
    let forest = explore_tree(&a.exps, &a.seeds.lo, &a.seeds.hi, a.depth, &config)?;
    let stats = branching_stats(&forest);
    let check = check_forest(&forest, &config)?;
    let truncated = stats.truncated_nodes > 0;
    let mut gaps = Vec::new();
    if !truncated {
        for level in 0..a.depth {
            for g in gap_intervals(&forest, level, &config.radix)? {
                let mut v = to_value(&g);
                v["level"] = json!(level);
                gaps.push(v);
            }
        }
    }
    let mut argv = Argv::new("explore");
    argv.push("exps", &a.exps)
        .push("seeds", format!("{}..{}", a.seeds.lo, a.seeds.hi))
        .push("depth", a.depth)
        .push("enumeration-cap", a.enumeration_cap)
        .search(&a.search);
    let manifest = argv.manifest(None);
    let body = match a.search.format {
        Format::Json => render_json(json!({
            "manifest": manifest,
            "exps": forest.exps,
            "depth": forest.depth,
            "roots": forest.roots,
            "stats": stats,
            "check": check,
            "gaps": if truncated { Value::Null } else { Value::Array(gaps) },
        })),
        Format::Csv => {
            let mut buf = Vec::new();
            forest
                .write_csv(&mut buf)
                .map_err(|e| Failure::new(exit::REFUSED, e.to_string()))?;
            format!("{MANIFEST_PREFIX}{}\n{}", compact(manifest), String::from_utf8_lossy(&buf))
        }
        Format::Text => {
            let mut lines = Vec::new();
            for l in &stats.levels {
                lines.push(format!(
                    "level {} nodes {} children min {} max {} mean {}",
                    l.level, l.nodes, l.min_children, l.max_children, l.mean_children
                ));
            }
            lines.push(format!("leaves {}", stats.leaves));
            lines.push(format!("truncated {}", stats.truncated_nodes));
            render_text(&manifest, &lines)
        }
    };
    let all_ok = check.nested_exact
        && check.nested_certified
        && check.disjoint_exact
        && check.disjoint_certified
        && check.counts_consistent;
    let code = if truncated {
        exit::REFUSED
    } else if all_ok {
        exit::OK
    } else {
        exit::FAILED_CHECK
    };
    Ok(Artifact {
        name: "explore",
        format: a.search.format,
        body,
        code,
    })
}

fn cmd_approx(a: &ApproxArgs) -> Result<Artifact, Failure> {
    let chain = build(&a.spec, &a.search)?;
    let digits = prc_digits(&chain, a.max_digits, &radix_config(&a.search))?;
    let scan = rational_approx_scan(&digits.enclosure, a.max_den);
    let any_inside = scan.iter().any(|r| r.inside);
    let mut argv = Argv::new("approx");
    argv.spec(&a.spec)
        .search(&a.search)
        .push("max-den", a.max_den)
        .push("max-digits", a.max_digits);
    let manifest = argv.manifest(Some(&chain));
    let body = match a.search.format {
        Format::Json => render_json(json!({
            "manifest": manifest,
            "digits": digits.digits,
            "enclosure": digits.enclosure,
            "approximants": scan,
        })),
        Format::Csv | Format::Text => {
            let rows = scan.iter().map(|r| {
                let (num, den) = r
                    .distance_bound
                    .as_ref()
                    .map_or((String::new(), String::new()), |f| (f.numerator.to_string(), f.denominator.to_string()));
                vec![
                    r.denominator.to_string(),
                    r.numerator.to_string(),
                    r.inside.to_string(),
                    num,
                    den,
                    r.distance_decimal.clone().unwrap_or_default(),
                ]
            });
            render_csv(
                &manifest,
                &["n", "m", "inside", "distance_num", "distance_den", "distance"],
                rows,
            )?
        }
    };
    let code = if chain.truncated().is_some() {
        exit::REFUSED
    } else if any_inside {
        exit::FAILED_CHECK
    } else {
        exit::OK
    };
    Ok(Artifact {
        name: "approx",
        format: a.search.format,
        body,
        code,
    })
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// Numbers become decimal strings, recursively.
fn stringify_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) => Value::String(n.to_string()),
        Value::Array(a) => Value::Array(a.into_iter().map(stringify_numbers).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, stringify_numbers(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

fn render_json(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&stringify_numbers(v)).expect("serializable");
    s.push('\n');
    s
}

fn compact(v: Value) -> String {
    serde_json::to_string(&stringify_numbers(v)).expect("serializable")
}

fn render_text(manifest: &Value, lines: &[String]) -> String {
    let mut s = format!("{MANIFEST_PREFIX}{}\n", compact(manifest.clone()));
    for l in lines {
        s.push_str(l);
        s.push('\n');
    }
    s
}

fn render_csv<I>(manifest: &Value, header: &[&str], rows: I) -> Result<String, Failure>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let io = |e: csv::Error| Failure::new(exit::REFUSED, e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::new(exit::REFUSED, e.to_string()))?;
    Ok(format!("{MANIFEST_PREFIX}{}\n{}", compact(manifest.clone()), String::from_utf8_lossy(&bytes)))
}

/// FNV-1a over the artifact's manifest line, for stable fixture names.
fn fixture_key(body: &str) -> u64 {
    let argv_line = body
        .lines()
        .find(|l| l.contains("\"argv\""))
        .unwrap_or(body);
    argv_line
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3))
}

fn check_fixture(dir: &Path, artifact: &Artifact) -> Result<Option<String>, Failure> {
    let ext = match artifact.format {
        Format::Json => "json",
        Format::Csv => "csv",
        Format::Text => "txt",
    };
    let path = dir.join(format!("{}-{:016x}.{ext}", artifact.name, fixture_key(&artifact.body)));
    match fs::read_to_string(&path) {
        Ok(pinned) if pinned == artifact.body => Ok(None),
        Ok(_) => Ok(Some(format!("output differs from fixture {}", path.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            fs::create_dir_all(dir)
                .and_then(|_| fs::write(&path, &artifact.body))
                .map_err(|e| Failure::new(exit::BAD_INPUT, format!("{}: {e}", path.display())))?;
            Ok(None)
        }
        Err(e) => Err(Failure::new(exit::BAD_INPUT, format!("{}: {e}", path.display()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("prc").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn numbers_become_strings() {
        let v = stringify_numbers(json!({"a": 1, "b": [2, {"c": 3}], "d": true}));
        assert_eq!(v, json!({"a": "1", "b": ["2", {"c": "3"}], "d": true}));
    }

    #[test]
    fn seed_ranges() {
        assert_eq!(
            parse_range("100..150").unwrap(),
            SeedRange {
                lo: BigUint::from(100u8),
                hi: BigUint::from(150u8)
            }
        );
        assert_eq!(parse_range("2..=3").unwrap().hi, BigUint::from(3u8));
        assert!(parse_range("5..2").is_err());
        assert!(parse_range("5").is_err());
    }

    #[test]
    fn usage_errors_exit_64() {
        assert_eq!(run_args(&["chain", "--exps", "const:3"]).0, exit::USAGE);
        assert_eq!(run_args(&["chain", "--exps", "bogus:1", "--seed", "2", "--depth", "2"]).0, exit::USAGE);
        assert_eq!(run_args(&["frobnicate"]).0, exit::USAGE);
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, exit::OK);
        assert!(out.contains("Usage"));
    }

    #[test]
    fn composite_seed_exits_65() {
        let (code, out, err) = run_args(&["chain", "--exps", "const:3", "--seed", "4", "--depth", "3"]);
        assert_eq!(code, exit::COMPOSITE_SEED);
        assert!(out.is_empty());
        assert!(err.contains("not prime"));
    }

    #[test]
    fn text_chain_lists_primes() {
        let (code, out, _) = run_args(&["chain", "--exps", "const:3", "--seed", "2", "--depth", "4", "--format", "text"]);
        assert_eq!(code, exit::OK);
        let lines: Vec<&str> = out.lines().skip(1).collect();
        assert_eq!(lines, ["2", "11", "1361", "2521008887"]);
        assert!(out.starts_with(MANIFEST_PREFIX));
    }
}
