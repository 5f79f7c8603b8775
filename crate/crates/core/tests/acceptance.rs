//! Acceptance run: one line per criterion.
//!
//! A few criteria fail on data that disagrees with exact computation. Those
//! failures are pinned below; the run exits nonzero if any criterion's failing
//! records differ from the pinned set, or if a criterion overruns its budget.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use partial_stirling::golden::{builtin_limit_rows, builtin_zero_table, compare};
use partial_stirling::kernel::{u_2inf, u_factorial_pow2, u_factorial_pow2_direct};
use partial_stirling::limits::{compare_table1, spread_residues, table1, verify_delthm, verify_specconj_grid};
use partial_stirling::verify::cgen::verify_cgen;
use partial_stirling::verify::four::{verify_theorem_four, FourOptions};
use partial_stirling::verify::identities::{verify_identity_suite, IdentityRanges};
use partial_stirling::verify::properties::{check_approx, check_p0, check_per, check_qprop1};
use partial_stirling::verify::report::{CheckRecord, Report};
use partial_stirling::verify::single_double::{verify_theorem_double, verify_theorem_single, FamilyOptions};
use partial_stirling::verify::worked::verify_29;
use partial_stirling::zeros::{
    build_atlas, count_zeros, expected_zero_count, zero_count_formula, Atlas, CongruenceClass, Limits, Prober,
    DEFAULT_CAP,
};
use partial_stirling::Valuation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    run: fn() -> Report,
    /// Failing `(check, params)` pairs that are expected.
    known: &'static [(&'static str, &'static str)],
}

fn atlas() -> &'static Atlas {
    static ATLAS: OnceLock<Atlas> = OnceLock::new();
    ATLAS.get_or_init(|| build_atlas(1..=64, &Limits::default()).expect("atlas builds"))
}

fn c1() -> Report {
    let mut r = Report::new();
    let bits = u_2inf(13).and_then(|u| u.backwards_binary(13)).unwrap_or_default();
    r.push("u2inf.bits", "13 bits", bits == "1101000101101", format!("got {bits}"));
    for e in 1..=16u32 {
        let mask = (1u64 << e) - 1;
        let lo = u_factorial_pow2_direct::<u64>(e - 1, e) & mask;
        let hi = u_factorial_pow2_direct::<u64>(e, e) & mask;
        let fast = u_factorial_pow2(e, e).ok().map(|u| u.residue().clone());
        r.push("u.direct_vs_fast", format!("e={e}"), fast == Some(BigUint::from(hi)), format!("{fast:?} vs {hi}"));
        r.push("u.congruence", format!("e={e}"), lo == hi, format!("U(2^{}!) = {lo}, U(2^{e}!) = {hi} mod 2^{e}", e - 1));
    }
    r
}

fn c2() -> Report {
    match table1(4..=15, 12) {
        Ok(rows) => compare_table1(&rows, &builtin_limit_rows()),
        Err(e) => {
            let mut r = Report::new();
            r.fail("table1", "", e.to_string());
            r
        }
    }
}

fn sequence(r: &mut Report, n: u64, residue: u64, want: &[u64]) {
    let prober = Prober::new(n, DEFAULT_CAP).expect("valid n");
    let class = CongruenceClass::new(4, residue).expect("valid class");
    let got: Vec<Option<u64>> = prober.class_values(&class, want.len()).into_iter().map(Valuation::finite).collect();
    let want_opt: Vec<Option<u64>> = want.iter().map(|&v| Some(v)).collect();
    r.push(
        &format!("seq.{n}"),
        format!("16x+{residue} x<{}", want.len()),
        got == want_opt,
        format!("got {got:?}, expected {want:?}"),
    );
}

fn c3() -> Report {
    let mut r = Report::new();
    sequence(&mut r, 29, 2, &[2, 3, 2, 4, 2, 3, 2, 5, 2]);
    sequence(&mut r, 31, 2, &[7, 8, 7, 9, 7, 8, 7, 10]);
    sequence(&mut r, 23, 14, &[4, 4, 4, 4]);
    let prober = Prober::new(23, DEFAULT_CAP).expect("valid n");
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let bad: Vec<u64> = (0..64)
        .map(|_| rng.gen_range(0..1u64 << 40))
        .filter(|&x| prober.nu(&BigInt::from(16 * x + 14)) != Valuation::Finite(4))
        .collect();
    r.push("seq.23_random", "64 x < 2^40", bad.is_empty(), format!("off at {bad:?}"));
    r
}

fn c4() -> Report {
    let mut r = Report::new();
    let atlas = atlas();
    for n in 5..=64 {
        let c = count_zeros(atlas, n);
        let want = expected_zero_count(n);
        r.push(
            "zeros.count",
            format!("n={n}"),
            c.unresolved == 0 && c.zeros as u64 == want,
            format!("{} zeros, {} unresolved, expected {want}", c.zeros, c.unresolved),
        );
    }
    let below: Vec<u64> = (5..=64).filter(|&n| expected_zero_count(n) < zero_count_formula(n)).collect();
    r.push("zeros.exceptions", "5..=64", below == [21], format!("{below:?}"));
    let branch: Vec<u64> = (5..=64).filter(|&n| zero_count_formula(n) + 2 == 2 * ((n - 1) / 4)).collect();
    r.push("zeros.branch", "5..=64", branch == [13, 29, 45, 61], format!("{branch:?}"));
    r
}

fn c5() -> Report {
    let mut r = Report::new();
    let atlas = atlas();
    let diffs = compare(atlas, &builtin_zero_table());
    r.push("golden", "17..=64", diffs.is_empty(), format!("{} mismatches {:?}", diffs.len(), diffs.iter().take(4).collect::<Vec<_>>()));
    for (n, t) in [(41, 9), (45, 7), (53, 9), (57, 8)] {
        let deepest = atlas.zeros(n).iter().map(|z| z.class.log_modulus).max();
        r.push("golden.deepest", format!("n={n}"), deepest == Some(t), format!("{deepest:?}"));
    }
    let in4 = atlas.zeros(53).iter().filter(|z| z.class.log_modulus >= 4 && z.class.residue % 16 == 4).count();
    r.push("golden.53", "4 mod 16", in4 == 3, format!("{in4} zeros"));
    r
}

fn c6() -> Report {
    let mut r = Report::new();
    for e in 2..=8 {
        for delta in 1..=4 {
            r.extend(verify_theorem_four(e, delta, &FourOptions::default()));
        }
    }
    r
}

fn c7() -> Report {
    let mut r = Report::new();
    verify_29(&mut r, 8, 6);
    let opts = FamilyOptions::default();
    for n in 1..=64 {
        r.extend(verify_theorem_single(n, &opts));
        r.extend(verify_theorem_double(n, &opts));
    }
    r
}

fn c8() -> Report {
    verify_identity_suite(&IdentityRanges::default())
}

fn c9() -> Report {
    let mut r = check_p0(64, 256);
    r.extend(check_per(64, 20, 16, 9));
    r.extend(check_approx(20, 24));
    r.extend(check_qprop1(7));
    r.extend(verify_delthm(12, 32, 64));
    r
}

fn c10() -> Report {
    let mut r = Report::new();
    for n in 1..=32 {
        r.extend(verify_cgen(atlas(), n, 1000, n));
    }
    r
}

fn c11() -> Report {
    verify_specconj_grid(5, 2..=7, 6..=9, &spread_residues(5, 16))
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        title: "U(2^inf!) bits and U(2^(e-1)!) = U(2^e!) mod 2^e, e <= 16",
        budget: Duration::from_secs(1),
        run: c1,
        known: &[("u.congruence", "e=2")],
    },
    Criterion { id: 2, title: "z_n limit rows and differences", budget: Duration::from_secs(60), run: c2, known: &[("table1.diff", "e=14")] },
    Criterion {
        id: 3,
        title: "valuation sequences for n = 29, 31, 23",
        budget: Duration::from_secs(30),
        run: c3,
        known: &[("seq.29", "16x+2 x<9"), ("seq.31", "16x+2 x<8")],
    },
    Criterion { id: 4, title: "zero counts for 5 <= n <= 64", budget: Duration::from_secs(600), run: c4, known: &[] },
    Criterion { id: 5, title: "atlas structure against reference tables", budget: Duration::from_secs(900), run: c5, known: &[] },
    Criterion { id: 6, title: "four-term suite, 2 <= e <= 8, 1 <= delta <= 4", budget: Duration::from_secs(300), run: c6, known: &[("four.cl2", "e=3")] },
    Criterion { id: 7, title: "minimal-term sets, single and double families", budget: Duration::from_secs(300), run: c7, known: &[] },
    Criterion { id: 8, title: "identity suite", budget: Duration::from_secs(120), run: c8, known: &[] },
    Criterion { id: 9, title: "property suites and difference congruence", budget: Duration::from_secs(300), run: c9, known: &[] },
    Criterion {
        id: 10,
        title: "global valuation formula, n <= 32, 1000 samples",
        budget: Duration::from_secs(600),
        run: c10,
        known: &[("cgen.values", "n=13 samples=1000 seed=13")],
    },
    Criterion { id: 11, title: "periodic-argument conjecture grid", budget: Duration::from_secs(600), run: c11, known: &[] },
];

fn key(r: &CheckRecord) -> (String, String) {
    (r.check.clone(), r.params.clone())
}

fn main() -> ExitCode {
    // Honour --list so `cargo test -- --list` and similar probes do not run the suite.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let filter = std::env::var("ACCEPTANCE_ONLY").ok();
    let mut unexpected = Vec::new();
    for c in CRITERIA {
        if filter.as_deref().is_some_and(|f| f.split(',').all(|s| s.trim() != c.id.to_string())) {
            continue;
        }
        let start = Instant::now();
        let report = (c.run)();
        let took = start.elapsed();
        let failed: BTreeSet<(String, String)> = report.failures().map(key).collect();
        let known: BTreeSet<(String, String)> = c.known.iter().map(|&(a, b)| (a.to_string(), b.to_string())).collect();
        let over = took > c.budget;
        let pass = failed.is_empty() && !over;
        let tag = if pass { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] criterion {:>2}: {} ({} checks, {:.1} s of {} s)",
            c.id,
            c.title,
            report.records.len(),
            took.as_secs_f64(),
            c.budget.as_secs()
        );
        let failures: Vec<&CheckRecord> = report.failures().collect();
        for f in failures.iter().take(4) {
            let note = if known.contains(&key(f)) { "known" } else { "UNEXPECTED" };
            println!("         {note}: {f}");
        }
        if failures.len() > 4 {
            println!("         ... {} more failing records", failures.len() - 4);
        }
        if over {
            println!("         UNEXPECTED: over budget");
        }
        if failed != known || over {
            unexpected.push(c.id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: every criterion matches its expected outcome");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
