mod config;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;

use partial_stirling::atlas_io::{read_atlas, write_atlas};
use partial_stirling::golden::{builtin_limit_rows, builtin_zero_table, compare, parse_zero_table};
use partial_stirling::dyadic::nu_factorial;
use partial_stirling::kernel::{eval_p, eval_phi, stirling2, u_2inf};
use partial_stirling::limits::{
    check_delthm_range, check_dconj, compare_table1, format_table1, spread_residues, table1,
    verify_specconj_grid, RepeatingArgument,
};
use partial_stirling::verify::cgen::verify_cgen;
use partial_stirling::verify::four::{verify_theorem_four, FourOptions};
use partial_stirling::verify::identities::{verify_identity_suite, IdentityRanges};
use partial_stirling::verify::properties::{check_approx, check_p0, check_per, check_qprop1, stirling_gap};
use partial_stirling::verify::single_double::{verify_theorem_double, verify_theorem_single, FamilyOptions};
use partial_stirling::verify::worked::verify_worked;
use partial_stirling::verify::Report;
use partial_stirling::zeros::{build_atlas, count_zeros, expected_zero_count, Atlas, Limits};
use partial_stirling::Valuation;

use config::RunConfig;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNRESOLVED: u8 = 3;

/// Inclusive range written `a..b`, `a..=b` or `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Span {
    lo: u64,
    hi: u64,
}

impl Span {
    fn iter(self) -> std::ops::RangeInclusive<u64> {
        self.lo..=self.hi
    }

    fn narrow(self) -> std::ops::RangeInclusive<u32> {
        self.lo as u32..=self.hi as u32
    }
}

impl FromStr for Span {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("bad number {t:?} in range {s:?}"));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
            None => (num(s)?, num(s)?),
        };
        if lo > hi {
            return Err(format!("empty range {s:?}"));
        }
        Ok(Span { lo, hi })
    }
}

#[derive(Parser, Debug)]
#[command(name = "pstirling", version, about = "2-adic partial Stirling functions")]
struct Cli {
    /// TOML file with defaults for the shared settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Also write check records here, one JSON object per line.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate P_n(x), Φ_n(s), S(x, n) or U(2^∞!).
    Eval(EvalArgs),
    /// Locate the zeros of P_n for a range of n and write the atlas.
    Zeros(ZerosArgs),
    /// Compare an atlas against a reference zero table.
    Compare(CompareArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Experiments on P_{2^e+Δ} for large e.
    Limits(LimitsArgs),
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<BigInt>,
    #[arg(long)]
    prec: Option<u32>,
    /// Evaluate Φ_n(s) instead.
    #[arg(long, value_name = "S")]
    phi: Option<u64>,
    /// Print S(x, n) and its distance from ±P_n(x).
    #[arg(long)]
    stirling: bool,
    /// Print U(2^∞!).
    #[arg(long)]
    uinf: bool,
}

#[derive(Args, Debug)]
struct ZerosArgs {
    #[arg(long)]
    n: Span,
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long)]
    cap: Option<u32>,
    #[arg(long)]
    max_log_modulus: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    atlas: PathBuf,
    /// Reference table; the built-in one when absent.
    #[arg(long)]
    golden: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Four,
    Single,
    Double,
    Identities,
    Cgen,
    P0,
    Per,
    Approx,
    Qprop1,
    Worked,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    suite: Suite,
    #[arg(long)]
    e: Option<Span>,
    #[arg(long)]
    delta: Option<Span>,
    #[arg(long)]
    n: Option<Span>,
    #[arg(long)]
    n_max: Option<u64>,
    #[arg(long)]
    d_max: Option<u32>,
    #[arg(long)]
    x_count: Option<u64>,
    #[arg(long)]
    t_max: Option<u32>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Atlas file for cgen; built on demand when absent.
    #[arg(long)]
    atlas: Option<PathBuf>,
    /// Skip the zero-finder cross-checks.
    #[arg(long)]
    no_cross_check: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Experiment {
    Table1,
    Delthm,
    Specconj,
    Dconj,
}

#[derive(Args, Debug)]
struct LimitsArgs {
    experiment: Experiment,
    #[arg(long, default_value_t = 12)]
    bits: u32,
    #[arg(long)]
    e: Option<Span>,
    #[arg(long)]
    delta: Option<Span>,
    #[arg(long)]
    x: Option<Span>,
    /// Start of the repeating bits: 5 for specconj, 0 for dconj.
    #[arg(long)]
    i0: Option<u32>,
    #[arg(long)]
    d: Option<Span>,
    /// Residues below 2^i0 per grid point.
    #[arg(long, default_value_t = 16)]
    residues: usize,
    /// Bits below i0, for dconj.
    #[arg(long, default_value_t = 0)]
    prefix: u64,
    /// Repeating block for dconj, lowest bit first; the default gives lim z_n.
    #[arg(long, default_value = "110")]
    block: String,
    #[arg(long, default_value_t = 4)]
    e0: u32,
    #[arg(long, default_value_t = 3)]
    j_max: u32,
    #[arg(long)]
    prec: Option<u32>,
}

struct Ctx {
    cfg: RunConfig,
    report: Option<PathBuf>,
}

impl Ctx {
    fn limits(&self, depth: Option<u32>, cap: Option<u32>, max_log_modulus: Option<u32>) -> anyhow::Result<Limits> {
        let d = Limits::default();
        let limits = Limits {
            witness_depth: depth.or(self.cfg.depth).unwrap_or(d.witness_depth),
            cap: cap.or(self.cfg.cap).unwrap_or(d.cap),
            max_log_modulus: max_log_modulus.or(self.cfg.max_log_modulus).unwrap_or(d.max_log_modulus),
            ..d
        };
        if limits.witness_depth > limits.cap {
            bail!("witness depth {} exceeds cap {}", limits.witness_depth, limits.cap);
        }
        Ok(limits)
    }

    /// Print the records and a summary; exit status 1 on any failure.
    fn finish(&self, report: &Report) -> anyhow::Result<u8> {
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        for r in &report.records {
            writeln!(out, "{r}")?;
        }
        let failed = report.failures().count();
        writeln!(out, "{} checks, {failed} failed", report.records.len())?;
        if let Some(path) = &self.report {
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            report.write_jsonl(BufWriter::new(f))?;
        }
        Ok(if failed == 0 { 0 } else { EXIT_FAIL })
    }
}

/// Argument problems caught after parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(Usage(msg.into()).into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<Usage>() { EXIT_USAGE } else { EXIT_FAIL })
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(|e| Usage(format!("{e:#}")))?,
        None => RunConfig::default(),
    };
    if let Some(t) = cfg.threads()? {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("starting worker threads")?;
    }
    let report = cli.report.clone().or_else(|| cfg.report.clone());
    let ctx = Ctx { cfg, report };
    match cli.cmd {
        Cmd::Eval(a) => cmd_eval(&ctx, a),
        Cmd::Zeros(a) => cmd_zeros(&ctx, a),
        Cmd::Compare(a) => cmd_compare(&ctx, a),
        Cmd::Verify(a) => cmd_verify(&ctx, a),
        Cmd::Limits(a) => cmd_limits(&ctx, a),
    }
}

fn cmd_eval(ctx: &Ctx, a: EvalArgs) -> anyhow::Result<u8> {
    let prec = a.prec.or(ctx.cfg.prec).unwrap_or(64);
    if prec == 0 {
        return usage("--prec must be positive");
    }
    if a.uinf {
        let u = u_2inf(prec)?;
        println!("U(2^inf!) mod 2^{prec}");
        println!("residue {}", u.residue_hex());
        println!("binary  {}", u.backwards_binary(prec)?);
        return Ok(0);
    }
    let Some(n) = a.n else { return usage("--n is required") };
    if n == 0 {
        return usage("--n must be positive");
    }
    if let Some(s) = a.phi {
        let phi = eval_phi(n, s);
        println!("Phi_{n}({s}) = {}", phi.value());
        match phi.nu {
            None => println!("nu      inf"),
            Some(v) => {
                println!("nu      {v}");
                if v >= 0 {
                    let r = phi.residue::<num_bigint::BigUint>(prec)?;
                    println!("residue {}", r.residue_hex());
                    println!("binary  {}", r.backwards_binary(prec)?);
                }
            }
        }
        return Ok(0);
    }
    let Some(x) = a.x else { return usage("--x is required") };
    if a.stirling {
        let Ok(xu) = u64::try_from(&x) else { return usage("--stirling needs 0 <= x < 2^64") };
        let s = stirling2(xu, n);
        println!("S({xu}, {n}) = {s}");
        let bound = xu as i64 - nu_factorial(n) as i64;
        match stirling_gap(n, xu) {
            None => println!("nu((-1)^(n+1) P_n(x) - S(x,n)) = inf, bound {bound}"),
            Some(v) => println!("nu((-1)^(n+1) P_n(x) - S(x,n)) = {v}, bound {bound}"),
        }
        return Ok(0);
    }
    let v = eval_p(n, &x, prec)?;
    println!("P_{n}({x}) mod 2^{prec}");
    println!("residue {}", v.residue_hex());
    println!("binary  {}", v.backwards_binary(prec)?);
    println!("nu      {}", v.valuation());
    Ok(match v.valuation() {
        Valuation::Finite(_) => 0,
        Valuation::AtLeast(_) => EXIT_UNRESOLVED,
    })
}

fn cmd_zeros(ctx: &Ctx, a: ZerosArgs) -> anyhow::Result<u8> {
    if a.n.lo == 0 {
        return usage("n must be positive");
    }
    let limits = ctx.limits(a.depth, a.cap, a.max_log_modulus).map_err(|e| Usage(e.to_string()))?;
    let atlas = build_atlas(a.n.iter(), &limits)?;
    let mut unresolved = 0;
    for n in a.n.iter() {
        let c = count_zeros(&atlas, n);
        unresolved += c.unresolved;
        println!("n={n} zeros={} expected={} unresolved={}", c.zeros, expected_zero_count(n), c.unresolved);
    }
    if let Some(path) = a.out.or_else(|| ctx.cfg.out.clone()) {
        save_atlas(&atlas, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(if unresolved > 0 { EXIT_UNRESOLVED } else { 0 })
}

fn save_atlas(atlas: &Atlas, path: &Path) -> anyhow::Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(f);
    write_atlas(atlas, &mut w)?;
    w.flush()?;
    Ok(())
}

fn load_atlas(path: &Path) -> anyhow::Result<Atlas> {
    let f = File::open(path).map_err(|e| Usage(format!("opening {}: {e}", path.display())))?;
    Ok(read_atlas(BufReader::new(f))?)
}

fn cmd_compare(ctx: &Ctx, a: CompareArgs) -> anyhow::Result<u8> {
    let atlas = load_atlas(&a.atlas)?;
    let rows = match a.golden.or_else(|| ctx.cfg.golden.clone()) {
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|e| Usage(format!("opening {}: {e}", p.display())))?;
            parse_zero_table(&text)?
        }
        None => builtin_zero_table(),
    };
    let rows: Vec<_> = rows.into_iter().filter(|r| atlas.entries.contains_key(&r.n)).collect();
    if rows.is_empty() {
        return usage("no reference rows for the n in this atlas");
    }
    let mismatches = compare(&atlas, &rows);
    let mut report = Report::new();
    for m in &mismatches {
        report.fail("compare", "", m.to_string());
    }
    if mismatches.is_empty() {
        let ns: Vec<String> = rows.iter().map(|r| r.n.to_string()).collect();
        report.pass("compare", format!("n={}", ns.join(",")), format!("{} rows match", rows.len()));
    }
    ctx.finish(&report)
}

/// Atlas for `ns`: from a file, from the cache directory, or built and cached.
fn atlas_for(ctx: &Ctx, file: Option<&Path>, ns: Span) -> anyhow::Result<Atlas> {
    if let Some(p) = file {
        return load_atlas(p);
    }
    let limits = ctx.limits(None, None, None)?;
    let cached = RunConfig::cache_dir()
        .map(|d| d.join(format!("atlas-{}-{}-d{}.jsonl", ns.lo, ns.hi, limits.witness_depth)));
    if let Some(p) = cached.as_ref().filter(|p| p.exists()) {
        return load_atlas(p);
    }
    let atlas = build_atlas(ns.iter(), &limits)?;
    if let Some(p) = cached {
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir)?;
        }
        save_atlas(&atlas, &p)?;
    }
    Ok(atlas)
}

fn cmd_verify(ctx: &Ctx, a: VerifyArgs) -> anyhow::Result<u8> {
    let mut report = Report::new();
    let cross_check = !a.no_cross_check;
    match a.suite {
        Suite::Four => {
            let opts = FourOptions { d_max: a.d_max.unwrap_or(6), cross_check, ..FourOptions::default() };
            let deltas = a.delta.unwrap_or(Span { lo: 1, hi: 4 });
            for e in a.e.unwrap_or(Span { lo: 2, hi: 8 }).narrow() {
                if e < 2 {
                    return usage("four needs e >= 2");
                }
                for delta in deltas.iter().filter(|&d| d < 1 << e) {
                    report.extend(verify_theorem_four(e, delta, &opts));
                }
            }
        }
        Suite::Single | Suite::Double => {
            let d = FamilyOptions::default();
            let opts = FamilyOptions { x_count: a.x_count.unwrap_or(d.x_count), d_max: a.d_max.unwrap_or(d.d_max), cross_check };
            for n in a.n.unwrap_or(Span { lo: 5, hi: 64 }).iter() {
                report.extend(match a.suite {
                    Suite::Single => verify_theorem_single(n, &opts),
                    _ => verify_theorem_double(n, &opts),
                });
            }
        }
        Suite::Identities => {
            let d = IdentityRanges::default();
            let ranges = IdentityRanges { sum_n: a.n_max.unwrap_or(d.sum_n), sum_d: a.d_max.map_or(d.sum_d, u64::from), ..d };
            report.extend(verify_identity_suite(&ranges));
        }
        Suite::Cgen => {
            let ns = a.n.unwrap_or(Span { lo: 1, hi: 32 });
            if ns.lo == 0 {
                return usage("n must be positive");
            }
            let atlas = atlas_for(ctx, a.atlas.as_deref(), ns)?;
            for n in ns.iter() {
                report.extend(verify_cgen(&atlas, n, a.samples, a.seed.wrapping_add(n)));
            }
        }
        Suite::P0 => report.extend(check_p0(a.n_max.unwrap_or(64), a.x_count.unwrap_or(256))),
        Suite::Per => report.extend(check_per(a.n_max.unwrap_or(64), a.t_max.unwrap_or(20), 16, a.seed)),
        Suite::Approx => report.extend(check_approx(a.n_max.unwrap_or(20), a.x_count.unwrap_or(24))),
        Suite::Qprop1 => {
            let e_max = a.e.map_or(7, |s| s.hi as u32);
            report.extend(check_qprop1(e_max));
        }
        Suite::Worked => report.extend(verify_worked()),
    }
    ctx.finish(&report)
}

fn parse_block(s: &str) -> anyhow::Result<(u32, u64)> {
    if s.is_empty() || s.len() > 63 {
        return usage("--block needs 1 to 63 binary digits");
    }
    let mut block = 0u64;
    for (k, c) in s.chars().enumerate() {
        match c {
            '0' => {}
            '1' => block |= 1 << k,
            _ => return usage(format!("--block: invalid digit {c:?}")),
        }
    }
    Ok((s.len() as u32, block))
}

fn cmd_limits(ctx: &Ctx, a: LimitsArgs) -> anyhow::Result<u8> {
    let mut report = Report::new();
    match a.experiment {
        Experiment::Table1 => {
            let es = a.e.unwrap_or(Span { lo: 4, hi: 15 });
            let rows = table1(es.narrow(), a.bits)?;
            print!("{}", format_table1(&rows, a.bits));
            let golden: Vec<_> = builtin_limit_rows()
                .into_iter()
                .filter(|g| es.iter().contains(&(g.e as u64)))
                .map(|mut g| {
                    g.bits.truncate(a.bits as usize);
                    g
                })
                .collect();
            report.extend(compare_table1(&rows, &golden));
        }
        Experiment::Delthm => {
            let xs = a.x.unwrap_or(Span { lo: 0, hi: 64 });
            let deltas = a.delta.unwrap_or(Span { lo: 0, hi: 31 });
            for e in a.e.unwrap_or(Span { lo: 1, hi: 12 }).narrow() {
                if e == 0 {
                    return usage("e must be positive");
                }
                for delta in deltas.iter().filter(|&d| d < 1 << e) {
                    let rows = check_delthm_range(e, delta, xs.hi)?;
                    let mut worst: Option<i64> = None;
                    let mut failed = Vec::new();
                    for r in rows.iter().filter(|r| r.x >= xs.lo) {
                        if let Some(b) = r.bound {
                            let margin = r.achieved.lower_bound() as i64 - b;
                            worst = Some(worst.map_or(margin, |w| w.min(margin)));
                        }
                        if !r.ok {
                            failed.push(format!("x={}: nu {}, bound {:?}", r.x, r.achieved, r.bound));
                        }
                    }
                    let params = format!("e={e} delta={delta} x={}..{}", xs.lo, xs.hi);
                    let detail = if failed.is_empty() { format!("smallest margin {worst:?}") } else { failed.join("; ") };
                    report.push("delthm", params, failed.is_empty(), detail);
                }
            }
        }
        Experiment::Specconj => {
            let ds = a.d.unwrap_or(Span { lo: 2, hi: 7 });
            let es = a.e.unwrap_or(Span { lo: 6, hi: 9 });
            let i0 = a.i0.unwrap_or(5);
            if ds.lo < 1 || !(1..=20).contains(&i0) {
                return usage("need d >= 1 and 1 <= i0 <= 20");
            }
            let residues = spread_residues(i0, a.residues);
            report.extend(verify_specconj_grid(i0, ds.narrow(), es.narrow(), &residues));
        }
        Experiment::Dconj => {
            let (period, block) = parse_block(&a.block)?;
            let i0 = a.i0.unwrap_or(0);
            let x = RepeatingArgument::new(period, i0, a.prefix, block, 0).map_err(|e| Usage(e.to_string()))?;
            let prec = a.prec.or(ctx.cfg.prec).unwrap_or(32);
            let r = check_dconj(&x, a.e0, a.j_max, prec)?;
            println!("truncation x[{}]", r.n);
            for (w, v) in r.es.windows(2).zip(&r.diffs) {
                println!("nu(Q_{} - Q_{}) = {v}", w[1], w[0]);
            }
            let params = format!("block={} i0={i0} e0={} j_max={}", a.block, a.e0, a.j_max);
            report.push("dconj.monotone", params, r.monotone, format!("{:?}", r.diffs));
        }
    }
    ctx.finish(&report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans() {
        assert_eq!("17..32".parse::<Span>().unwrap(), Span { lo: 17, hi: 32 });
        assert_eq!("2..=8".parse::<Span>().unwrap(), Span { lo: 2, hi: 8 });
        assert_eq!("53".parse::<Span>().unwrap(), Span { lo: 53, hi: 53 });
        assert!("9..3".parse::<Span>().is_err());
        assert!("a..3".parse::<Span>().is_err());
    }

    #[test]
    fn blocks() {
        assert_eq!(parse_block("011").unwrap(), (3, 0b110));
        assert!(parse_block("012").is_err());
    }
}
