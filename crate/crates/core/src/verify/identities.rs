//! Exact checks of the binomial and Stirling identities the proofs lean on.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::backing::binomial_is_odd;
use super::report::{Report, Tally};
use crate::dyadic::{alpha, lg};
use crate::kernel::{binomial, factorial, nu_rational, StirlingTable};
use crate::word::{inverse_odd, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityRanges {
    /// Binomial sum identity: `n ≤ sum_n`, `d ≤ sum_d`.
    pub sum_n: u64,
    pub sum_d: u64,
    /// Stirling congruences and expansion: `n ≤ stirling_n`, `k ≤ stirling_k`.
    pub stirling_n: u64,
    pub stirling_k: u64,
    pub refine_n: u64,
    /// Difference valuation: `b ≤ diff_b`, `d ≤ diff_d`.
    pub diff_b: u32,
    pub diff_d: u32,
    /// Factorial lemmas: `e ≤ lemma_e`.
    pub lemma_e: u32,
}

impl Default for IdentityRanges {
    fn default() -> Self {
        IdentityRanges {
            sum_n: 40,
            sum_d: 10,
            stirling_n: 32,
            stirling_k: 48,
            refine_n: 48,
            diff_b: 6,
            diff_d: 8,
            lemma_e: 12,
        }
    }
}

fn big(x: BigUint) -> BigInt {
    BigInt::from(x)
}

fn rat(x: BigUint) -> BigRational {
    BigRational::from_integer(big(x))
}

fn pow(base: u64, exp: u64) -> BigUint {
    num_traits::pow(BigUint::from(base), exp as usize)
}

/// `ν(a − b) ≥ bits`, treating equality as infinite valuation.
fn congruent(a: &BigRational, b: &BigRational, bits: i64) -> bool {
    nu_rational(&(a - b)).is_none_or(|v| v >= bits)
}

/// `Σ_i C(2n, 2i+1) C(i, n−d−1) = 2^(2d+1) C(n+d, 2d+1)`.
pub fn binomial_sum_holds(n: u64, d: u64) -> bool {
    let lhs: BigUint = match n.checked_sub(d + 1) {
        None => BigUint::zero(),
        Some(m) => (0..n).map(|i| binomial(2 * n, 2 * i + 1) * binomial(i, m)).sum(),
    };
    lhs == (BigUint::one() << (2 * d + 1)) * binomial(n + d, 2 * d + 1)
}

fn check_binomial_sum(report: &mut Report, r: &IdentityRanges) {
    let mut t = Tally::new(report, "identity.binomial_sum", format!("n<={} d<={}", r.sum_n, r.sum_d));
    for n in 1..=r.sum_n {
        for d in 0..=r.sum_d {
            t.case(binomial_sum_holds(n, d), || format!("n={n} d={d}"));
        }
    }
    t.finish();
}

/// `(1/n!) Σ_i C(2n+ε, 2i+b) i^k`.
fn stirling_lhs(n: u64, eps: u64, b: u64, k: u64) -> BigRational {
    let top = 2 * n + eps;
    let sum: BigUint = (0..=n).filter(|i| 2 * i + b <= top).map(|i| binomial(top, 2 * i + b) * pow(i, k)).sum();
    BigRational::new(big(sum), big(factorial(n)))
}

fn double_factorial_odd(d: u64) -> BigUint {
    (0..=d).map(|i| BigUint::from(2 * i + 1)).product()
}

fn check_stirling(report: &mut Report, r: &IdentityRanges) {
    let table = StirlingTable::new(r.stirling_k, r.stirling_n);
    let s = |k: u64, n: u64| -> BigRational { if n > k { BigRational::zero() } else { rat(table.get(k, n).clone()) } };
    let params = format!("n<={} k<={}", r.stirling_n, r.stirling_k);
    let mut t = Tally::new(report, "identity.stirling_mod4", params.clone());
    for n in 1..=r.stirling_n {
        let nn = BigRational::from_integer(BigInt::from(n));
        let two = BigRational::from_integer(BigInt::from(2));
        for k in 0..=r.stirling_k {
            let cases = [
                (0, 0, s(k, n) + &two * &nn * s(k, n - 1)),
                (1, 0, (&two * &nn + BigRational::one()) * s(k, n) + &two * (&nn + BigRational::one()) * s(k, n - 1)),
                (1, 1, s(k, n) + &two * (&nn + BigRational::one()) * s(k, n - 1)),
            ];
            for (eps, b, rhs) in cases {
                let lhs = stirling_lhs(n, eps, b, k);
                t.case(congruent(&lhs, &rhs, 2), || format!("n={n} k={k} eps={eps} b={b}"));
            }
        }
    }
    t.finish();
    let mut t = Tally::new(report, "identity.stirling_expansion", params);
    for n in 1..=r.stirling_n {
        for k in 0..=r.stirling_k {
            let lhs = stirling_lhs(n, 0, 1, k);
            let rhs: BigRational = (0..n)
                .map(|d| {
                    let c = (BigUint::one() << (d + 1)) * binomial(n + d, d);
                    rat(c) * s(k, n - 1 - d) / rat(double_factorial_odd(d))
                })
                .sum();
            t.case(lhs == rhs, || format!("n={n} k={k}"));
        }
    }
    t.finish();
}

fn check_refine(report: &mut Report, r: &IdentityRanges) {
    let mut bound = Tally::new(report, "identity.refine", format!("n<={}", r.refine_n));
    let mut mod4 = Vec::new();
    for n in 1..=r.refine_n {
        for k in 0..n {
            // Φ_n(k) = 2^k Σ C(n, 2i+1) i^k / n!.
            let sum: BigUint = (0..=n / 2).map(|i| binomial(n, 2 * i + 1) * pow(i, k)).sum();
            let phi = BigRational::new(big(sum.clone() << k), big(factorial(n)));
            let floor = alpha(n as u128) as i64 - 1 - alpha(k as u128) as i64;
            let v = nu_rational(&phi);
            let odd = binomial_is_odd(n - 1 - k, k);
            let ok = match v {
                None => !odd,
                Some(v) => v >= floor && (v == floor) == odd,
            };
            bound.case(ok, || format!("n={n} k={k}: nu {v:?}, floor {floor}, C odd {odd}"));
            // Σ C(n, 2i+1) i^k / (2^(n−1−2k) k!) ≡ C(n−1−k, k) + [2 C(n−1−k, k−2)] mod 4.
            let scale = n as i64 - 1 - 2 * k as i64;
            let mut lhs = BigRational::new(big(sum), big(factorial(k)));
            let shift = BigRational::from_integer(BigInt::one() << scale.unsigned_abs());
            lhs = if scale >= 0 { lhs / shift } else { lhs * shift };
            let mut rhs = binomial(n - 1 - k, k);
            if (n - 1) % 2 == 0 && k % 2 == 0 && k >= 2 {
                rhs += binomial(n - 1 - k, k - 2) << 1;
            }
            mod4.push((n, k, congruent(&lhs, &rat(rhs), 2)));
        }
    }
    bound.finish();
    let mut t = Tally::new(report, "identity.refine_mod4", format!("n<={}", r.refine_n));
    for (n, k, ok) in mod4 {
        t.case(ok, || format!("n={n} k={k}"));
    }
    t.finish();
}

/// `(valuation, odd part mod 2^64)` of `C(m, j)` for `j = 0..=limit`, `m ≥ limit`.
fn binomial_row(m: u64, limit: u64) -> Vec<(u32, u64)> {
    let mut out = Vec::with_capacity(limit as usize + 1);
    let (mut v, mut num, mut den) = (0u32, 1u64, 1u64);
    out.push((0, 1));
    for j in 1..=limit {
        let f = m - j + 1;
        v += f.trailing_zeros();
        v -= j.trailing_zeros();
        num = num.wrapping_mul(f >> f.trailing_zeros());
        den = den.wrapping_mul(j >> j.trailing_zeros());
        out.push((v, num.mul_mod(&inverse_odd(&den, 64), 64)));
    }
    out
}

/// `ν(2^(−d−1) C(2^(d+1+b), j) − 2^(−d) C(2^(d+b), j))` for `1 ≤ j ≤ 2^(d+b)`, index `j`.
pub fn difference_valuations(b: u32, d: u32) -> Vec<Option<i64>> {
    let top = 1u64 << (d + b);
    let wide = binomial_row(top << 1, top);
    let narrow = binomial_row(top, top);
    let value = |(v, u): (u32, u64)| if v >= 64 { 0 } else { u << v };
    (0..=top)
        .map(|j| {
            let x = value(wide[j as usize]).wrapping_sub(value(narrow[j as usize]) << 1);
            (x != 0).then(|| x.trailing_zeros() as i64 - d as i64 - 1)
        })
        .collect()
}

fn check_difference(report: &mut Report, r: &IdentityRanges) {
    let mut t = Tally::new(report, "identity.difference", format!("b<={} d<={} 2<=j<=2^(d+b)", r.diff_b, r.diff_d));
    for b in 0..=r.diff_b {
        for d in 0..=r.diff_d {
            for (j, got) in difference_valuations(b, d).into_iter().enumerate().skip(2) {
                let j = j as u64;
                let want = 2 * b as i64 + d as i64 - lg(j - 1).unwrap() as i64 - j.trailing_zeros() as i64;
                t.case(got == Some(want), || format!("b={b} d={d} j={j}: {got:?}, expected {want}"));
            }
        }
    }
    t.finish();
}

/// Odd parts of `m!` mod `2^64` for `m = 0..=limit`.
fn odd_factorials(limit: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    let mut acc = 1u64;
    for m in 1..=limit {
        acc = acc.wrapping_mul(m >> m.trailing_zeros());
        out.push(acc);
    }
    out
}

/// Both sides of the factorial lemma are units, so it says
/// `U(d!) U(2^e!) ≡ U((2^e + d)!) mod 2^(e − lg d)`.
pub fn factorial_lemma_holds(e: u32, d: u64, odd: &[u64]) -> bool {
    let big = 1u64 << e;
    let bits = e - lg(d).unwrap();
    let lhs = odd[d as usize].wrapping_mul(odd[big as usize]);
    (lhs ^ odd[(big + d) as usize]).trailing_zeros() >= bits
}

fn check_lemmas(report: &mut Report, r: &IdentityRanges) {
    let odd = odd_factorials(2 << r.lemma_e);
    let mut t = Tally::new(report, "identity.factorial_lemma", format!("e<={} 0<d<2^e", r.lemma_e));
    for e in 1..=r.lemma_e {
        for d in 1..1u64 << e {
            t.case(factorial_lemma_holds(e, d, &odd), || format!("e={e} d={d}"));
        }
    }
    t.finish();
    // ν(2^(2^e−r−1)/(2^e−r)!) = α(2^e − r) − 1 ≥ e − 1 − lg(D); the worst r for a
    // given D is the one minimizing α(2^e − r), so track the running minimum.
    let mut t = Tally::new(report, "identity.truncation_lemma", format!("e<={} 0<r<=D<=2^e", r.lemma_e));
    for e in 1..=r.lemma_e {
        let big = 1u64 << e;
        let mut worst = u32::MAX;
        for dd in 1..=big {
            worst = worst.min(alpha((big - dd) as u128));
            let lhs = worst as i64 - 1;
            let rhs = e as i64 - 1 - lg(dd).unwrap() as i64;
            t.case(lhs >= rhs, || format!("e={e} D={dd}: {lhs} < {rhs}"));
        }
    }
    t.finish();
}

pub fn verify_identity_suite(ranges: &IdentityRanges) -> Report {
    let mut report = Report::new();
    check_binomial_sum(&mut report, ranges);
    check_stirling(&mut report, ranges);
    check_refine(&mut report, ranges);
    check_difference(&mut report, ranges);
    check_lemmas(&mut report, ranges);
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_sum_edge() {
        // At n = d + 1 both sides are 2^(2d+1); below that both vanish.
        for d in 0..8 {
            assert!(binomial_sum_holds(d + 1, d));
        }
        assert!(binomial_sum_holds(3, 5));
    }

    #[test]
    fn difference_small() {
        // j = 2: 2b + d − 1.
        for b in 0..4 {
            for d in (0..4).filter(|d| b + d > 0) {
                assert_eq!(difference_valuations(b, d)[2], Some(2 * b as i64 + d as i64 - 1));
            }
        }
    }

    #[test]
    fn factorial_lemma_exact() {
        // Against exact rationals for small e.
        let odd = odd_factorials(64);
        for e in 1..=5u32 {
            let two_e = factorial(1 << e);
            for d in 1..1u64 << e {
                let num = BigInt::one() << ((1u64 << e) + d - 1 - alpha(d as u128) as u64);
                let a = BigRational::new(num.clone(), big(factorial(d) * &two_e));
                let b = BigRational::new(num, big(factorial((1 << e) + d)));
                let bits = (e - lg(d).unwrap()) as i64;
                assert_eq!(congruent(&a, &b, bits), factorial_lemma_holds(e, d, &odd), "e={e} d={d}");
                assert!(congruent(&a, &b, bits));
            }
        }
    }

    #[test]
    fn small_suite() {
        let r = IdentityRanges {
            sum_n: 12,
            sum_d: 4,
            stirling_n: 8,
            stirling_k: 12,
            refine_n: 16,
            diff_b: 2,
            diff_d: 3,
            lemma_e: 6,
        };
        let rep = verify_identity_suite(&r);
        assert!(rep.passed(), "{:#?}", rep.failures().collect::<Vec<_>>());
    }
}
