//! Three worked verifications: a class with three minimal terms (`n = 29`),
//! a class whose sum has larger valuation than its smallest terms (`n = 31`),
//! and a zero-free class (`n = 23`).

use num_bigint::{BigInt, BigUint};

use super::report::{Report, Tally};
use super::terms::{TermKey, TermSum};
use crate::dyadic::{binomial_mod, lg, nu_binomial_big};
use crate::kernel::{eval_p, eval_phi};

const PREC: u32 = 48;

fn p_at(n: u64, z: u64) -> crate::dyadic::TwoAdic {
    eval_p(n, &BigInt::from(z), PREC).expect("valid n")
}

/// `n = 29`, class `16x + 10`, threshold 2.
pub fn verify_29(report: &mut Report, x_count: u64, d_max: u32) {
    let want = [TermKey::new(4, 10), TermKey::new(8, 6), TermKey::new(12, 2)];
    let r = TermSum::new(29, 4, 10, 0, 0).min_terms(2);
    report.push(
        "worked.29_min_set",
        "n=29 16x+10",
        r.minimum == Some(2) && r.argmin == want && r.cutoff == 17,
        format!("min {:?} at {:?}, cutoff {}", r.minimum, r.argmin, r.cutoff),
    );
    let mut t = Tally::new(report, "worked.29_sum", format!("n=29 16x+10 x<{x_count} d<={d_max}"));
    for x in 0..x_count {
        for d in 0..=d_max {
            let s = TermSum::new(29, 4, 10, x, d);
            let odd = s.min_terms(2).argmin.len() % 2 == 1;
            let v = s.sum_nu(16);
            t.case(odd && v == Some(2), || format!("x={x} d={d}: sum nu {v:?}, odd count {odd}"));
        }
    }
    t.finish();
}

/// `n = 31`, class `16x + 2`: every term has `ν ≥ 4` below the cutoff and the sum has
/// `ν = 7`. Odd factors of `2^(−d) C(2^(4+d), j)` agree mod 16 once `d ≥ 4`, so `d ≤ 4`
/// covers all `d`; shifting `x` by 8 moves the sum by a multiple of `2^8`.
pub fn verify_31(report: &mut Report) {
    let cut = TermSum::new(31, 4, 2, 0, 0).cutoff(3);
    let mut t = Tally::new(report, "worked.31_terms", format!("n=31 16x+2 j+k<{cut} x<8 d<=4"));
    for x in 0..8 {
        for d in 0..=4 {
            let s = TermSum::new(31, 4, 2, x, d);
            let low: Vec<_> = s.terms(3).into_iter().filter(|(_, v)| matches!(v, Some(v) if *v < 4)).collect();
            t.case(low.is_empty(), || format!("x={x} d={d}: {low:?}"));
        }
    }
    t.finish();
    let mut t = Tally::new(report, "worked.31_sum", "n=31 16x+2 x<8 d<=4");
    for x in 0..8 {
        for d in 0..=4 {
            let v = TermSum::new(31, 4, 2, x, d).sum_nu(16);
            t.case(v == Some(7), || format!("x={x} d={d}: {v:?}"));
        }
    }
    t.finish();
    // Stabilization in d: lg(j − 1) ≤ 4 for j ≤ 2^4 + 1 below the cutoff.
    let j_max = cut;
    let bound = 4 + lg(j_max - 1).expect("j_max > 1");
    report.push("worked.31_d_stable", "n=31", bound <= 8, format!("odd factors agree mod 16 for d >= {}", bound - 4));
    let mut t = Tally::new(report, "worked.31_x_period", "n=31 16x+2 x<8 d<=4");
    for x in 0..8u64 {
        for d in 0..=4u32 {
            let sum = |x: u64| &p_at(31, 16 * (x + (1 << d)) + 2) - &p_at(31, 16 * x + 2);
            let shift = &sum(x + 8) - &sum(x);
            let v = shift.valuation();
            t.case(v.lower_bound() >= 8 + d as u64, || format!("x={x} d={d}: {v}"));
        }
    }
    t.finish();
}

/// `n = 23`, class `16x + 14`: `ν = 4` on `x ≤ 3`, every term `C(16x+14, k) Φ_23(k)` has
/// `ν ≥ 2`, terms with `k > 14` have `ν ≥ 5`, and the binomials move by
/// `2^(3 + ν(i))` relative to themselves under `x ↦ x + 4i`.
pub fn verify_23(report: &mut Report, x_count: u64, i_count: u64) {
    let mut t = Tally::new(report, "worked.23_values", "n=23 16x+14 x<=3");
    for x in 0..4 {
        let v = p_at(23, 16 * x + 14).valuation();
        t.case(v.finite() == Some(4), || format!("x={x}: {v}"));
    }
    t.finish();
    let mut t = Tally::new(report, "worked.23_terms", format!("n=23 16x+14 x<{x_count}"));
    // Φ_23(k) has ν ≥ k − 11, so k ≥ 16 is automatic.
    for x in 0..x_count {
        let z = BigUint::from(16 * x + 14);
        for k in 0..=16u64 {
            let Some(vphi) = eval_phi(23, k).nu else { continue };
            let Ok(vc) = nu_binomial_big(&z, k) else { continue };
            let v = vc as i64 + vphi;
            let need = if k > 14 { 5 } else { 2 };
            t.case(v >= need, || format!("x={x} k={k}: nu {v}, need {need}"));
        }
    }
    t.finish();
    let mut t = Tally::new(report, "worked.23_binomial", format!("n=23 x<{x_count} 1<=i<={i_count} k<=14"));
    for x in 0..x_count {
        let a = BigUint::from(16 * x + 14);
        for i in 1..=i_count {
            let b = BigUint::from(16 * x + 64 * i + 14);
            for k in 0..=14u64 {
                let bits = 40;
                let ca = binomial_mod(&a, k, bits).expect("bits > 0");
                let cb = binomial_mod(&b, k, bits).expect("bits > 0");
                let diff = (&cb.value - &ca.value).valuation().lower_bound();
                let need = 3 + i.trailing_zeros() as u64 + ca.nu.unwrap_or(bits as u64);
                t.case(diff >= need.min(bits as u64), || format!("x={x} i={i} k={k}: nu {diff}, need {need}"));
            }
        }
    }
    t.finish();
    let mut t = Tally::new(report, "worked.23_shift", format!("n=23 x<{x_count} 1<=i<={i_count}"));
    for x in 0..x_count {
        for i in 1..=i_count {
            let v = (&p_at(23, 16 * x + 64 * i + 14) - &p_at(23, 16 * x + 14)).valuation();
            t.case(v.lower_bound() >= 5, || format!("x={x} i={i}: {v}"));
        }
    }
    t.finish();
}

pub fn verify_worked() -> Report {
    let mut report = Report::new();
    verify_29(&mut report, 8, 4);
    verify_31(&mut report);
    verify_23(&mut report, 16, 16);
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_worked() {
        let r = verify_worked();
        assert!(r.passed(), "{:#?}", r.failures().collect::<Vec<_>>());
        assert!(r.records.len() >= 9);
    }
}
