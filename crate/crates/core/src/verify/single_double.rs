//! The single-zero and split-class families: exact minimal term sets over a grid
//! of `(x, d)`, the parity lemma behind the split family, and agreement with the
//! zero finder.

use super::backing::{binomial_is_odd, double_cases, single_cases};
use super::report::{Report, Tally};
use super::terms::{TermKey, TermSum};
use crate::dyadic::lg;
use crate::zeros::{classify, CongruenceClass, Limits, Verdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyOptions {
    pub x_count: u64,
    pub d_max: u32,
    pub cross_check: bool,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        FamilyOptions { x_count: 8, d_max: 3, cross_check: true }
    }
}

fn keys(v: &[(u64, u64)]) -> Vec<TermKey> {
    let mut k: Vec<TermKey> = v.iter().map(|&(j, k)| TermKey::new(j, k)).collect();
    k.sort();
    k
}

fn check_min_set(t: &mut Tally<'_>, sum: TermSum, c: u64, want: &[TermKey], label: &str) {
    let r = sum.min_terms(c as i64);
    t.case(r.minimum == Some(c as i64) && r.argmin == want, || {
        format!("{label} x={} d={}: min {:?} at {:?}, expected {c} at {want:?}", sum.x, sum.d, r.minimum, r.argmin)
    });
}

fn check_zero(t: &mut Tally<'_>, n: u64, class: CongruenceClass, c: u64) {
    let limits = Limits { witness_depth: class.log_modulus + 24, ..Limits::default() };
    let r = classify(n, &class, &limits).expect("valid n");
    let ok = matches!(&r.verdict, Verdict::EmpiricalZero(z) if z.c == c);
    t.case(ok, || format!("{class}: {:?}", r.verdict));
}

pub fn verify_theorem_single(n: u64, opts: &FamilyOptions) -> Report {
    let mut report = Report::new();
    let cases = single_cases(n);
    let mut terms = Tally::new(&mut report, "single.terms", format!("n={n} cases={}", cases.len()));
    for s in &cases {
        let want = keys(&[s.min_term()]);
        let label = format!("p={} eps={} b={} q={}", s.p, s.eps, s.b, s.q);
        for x in 0..opts.x_count {
            for d in 0..=opts.d_max {
                check_min_set(&mut terms, TermSum::new(n, s.e - 1, s.q, x, d), s.c, &want, &label);
            }
        }
    }
    terms.finish();
    if opts.cross_check && !cases.is_empty() {
        let mut t = Tally::new(&mut report, "single.zero_finder", format!("n={n}"));
        for s in &cases {
            check_zero(&mut t, n, s.class(), s.c);
        }
        t.finish();
    }
    report
}

pub fn verify_theorem_double(n: u64, opts: &FamilyOptions) -> Report {
    let mut report = Report::new();
    let cases = double_cases(n);
    let mut terms = Tally::new(&mut report, "double.terms", format!("n={n} cases={}", cases.len()));
    for s in &cases {
        let want = keys(&s.min_terms());
        let class = s.class();
        let label = format!("p={} eps={} delta={}", s.p, s.eps, s.delta);
        for x in 0..opts.x_count {
            for d in 0..=opts.d_max {
                check_min_set(&mut terms, TermSum::new(n, s.e, class.residue, x, d), s.c, &want, &label);
            }
        }
    }
    terms.finish();
    if let Some(e) = lg(n) {
        let mut t = Tally::new(&mut report, "double.lemlem", format!("n={n}"));
        for (p, h, odd, claimed) in lemlem_cases(n, e) {
            t.case(odd == claimed, || format!("p={p} h={h}: odd={odd}"));
        }
        t.finish();
    }
    if opts.cross_check && !cases.is_empty() {
        let mut t = Tally::new(&mut report, "double.zero_finder", format!("n={n}"));
        for s in &cases {
            check_zero(&mut t, n, s.class(), s.c);
        }
        t.finish();
    }
    report
}

/// `(p, h, C(A, B) odd, h = lg(2^(e+1) − n + p))` for every `p` and `h` in the
/// lemma's range, with `A = n − 1 − p − 2^e + 2^h` and `B = p + 2^e − 2^h`.
pub fn lemlem_cases(n: u64, e: u32) -> Vec<(u64, u32, bool, bool)> {
    let mut out = Vec::new();
    if e < 1 || n <= 3 << (e - 1) || n >= 2 << e {
        return out;
    }
    let bound = (n - (3 << (e - 1))) / 2;
    for p in (0..bound).filter(|&p| binomial_is_odd(n - 1 - p, p)) {
        let ell = lg((2 << e) - n + p).expect("positive");
        for h in (0..e).filter(|&h| p < 1 << h) {
            let a = (n - 1 - p + (1 << h)).checked_sub(1 << e);
            let b = p + (1 << e) - (1 << h);
            let odd = a.is_some_and(|a| binomial_is_odd(a, b));
            out.push((p, h, odd, h == ell));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_families() {
        let opts = FamilyOptions { x_count: 4, d_max: 2, cross_check: true };
        for n in [13u64, 14, 15, 21, 29, 30] {
            let r = verify_theorem_single(n, &opts);
            assert!(r.passed(), "{:#?}", r.failures().collect::<Vec<_>>());
            let r = verify_theorem_double(n, &opts);
            assert!(r.passed(), "{:#?}", r.failures().collect::<Vec<_>>());
        }
    }

    #[test]
    fn lemlem_below_ell_is_zero() {
        // h < ℓ forces A < B.
        for n in 25..32u64 {
            for (p, h, odd, _) in lemlem_cases(n, 4) {
                let ell = lg(32 - n + p).unwrap();
                if h < ell {
                    assert!(!odd, "n={n} p={p} h={h}");
                }
            }
        }
        assert!(lemlem_cases(20, 4).is_empty());
    }
}
