//! Property suites over finite ranges: the parity criterion, periodicity, the
//! Stirling approximation and the valuation bounds for `Φ_n`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::backing::binomial_is_odd;
use super::report::{Report, Tally};
use crate::dyadic::{lg, nu_factorial};
use crate::by_width;
use crate::kernel::{eval_p, eval_p_exact, eval_phi, numerator_bits, nu_rational, stirling2, OddSum};

/// `C(a, k)` is odd for any integer `a`, as a polynomial in `a`:
/// `C(−m, k) = (−1)^k C(m + k − 1, k)`.
pub fn signed_binomial_odd(a: i64, k: u64) -> bool {
    if a >= 0 {
        binomial_is_odd(a as u64, k)
    } else {
        binomial_is_odd(a.unsigned_abs() + k - 1, k)
    }
}

/// `C(2x − n − 1, n − 1)` is odd.
pub fn parity_binomial_odd(n: u64, x: i64) -> bool {
    signed_binomial_odd(2 * x - n as i64 - 1, n - 1)
}

/// Parity criterion on `−x_count ≤ x < x_count`.
pub fn check_p0(n_max: u64, x_count: u64) -> Report {
    let mut report = Report::new();
    let mut t = Tally::new(&mut report, "p0", format!("n<={n_max} -{x_count}<=x<{x_count}"));
    let start = -(x_count as i64);
    for n in 1..=n_max {
        let units: Vec<bool> = by_width!(numerator_bits(n, 8), W => {
            let s = OddSum::<W>::new(n, 8).expect("n >= 1");
            let vals = s.eval_progression(&BigInt::from(start), &BigUint::from(1u8), 2 * x_count as usize);
            vals.iter().map(|v| v.valuation().finite() == Some(0)).collect()
        });
        for (i, &unit) in units.iter().enumerate() {
            let x = start + i as i64;
            let want = parity_binomial_odd(n, x);
            t.case(unit == want, || format!("n={n} x={x}: unit {unit}, binomial odd {want}"));
        }
    }
    t.finish();
    report
}

/// `ν(P_n(x + 2^t) − P_n(x)) ≥ t + 1 − lg(n)` for `lg(n) ≤ t ≤ t_max`, at small `x`
/// and `samples` random `x < 2^40`.
pub fn check_per(n_max: u64, t_max: u32, samples: usize, seed: u64) -> Report {
    let mut report = Report::new();
    let mut t = Tally::new(&mut report, "per", format!("n<={n_max} t<={t_max} samples={samples} seed={seed}"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prec = t_max + 8;
    for n in 1..=n_max {
        let l = lg(n).expect("n >= 1");
        let mut xs: Vec<i64> = (-4..8).collect();
        xs.extend((0..samples).map(|_| rng.gen_range(0..1i64 << 40)));
        for tt in l..=t_max {
            for &x in &xs {
                let a = eval_p(n, &BigInt::from(x), prec).expect("n >= 1");
                let b = eval_p(n, &(BigInt::from(x) + (BigInt::from(1) << tt)), prec).expect("n >= 1");
                let v = (&b - &a).valuation();
                let need = (tt + 1 - l) as u64;
                t.case(v.lower_bound() >= need, || format!("n={n} t={tt} x={x}: {v}, need {need}"));
            }
        }
    }
    t.finish();
    report
}

/// `ν((−1)^(n+1) P_n(x) − S(x, n))`, `None` when the two agree.
pub fn stirling_gap(n: u64, x: u64) -> Option<i64> {
    let p = eval_p_exact(n, x);
    let signed = if n % 2 == 1 { p } else { -p };
    nu_rational(&(signed - BigRational::from_integer(BigInt::from(stirling2(x, n)))))
}

/// `ν((−1)^(n+1) P_n(x) − S(x, n)) ≥ x − ν(n!)` for `n ≤ x ≤ n + extra`.
pub fn check_approx(n_max: u64, extra: u64) -> Report {
    let mut report = Report::new();
    let mut t = Tally::new(&mut report, "approx", format!("n<={n_max} n<=x<=n+{extra}"));
    for n in 1..=n_max {
        for x in n..=n + extra {
            let v = stirling_gap(n, x);
            let need = x as i64 - nu_factorial(n) as i64;
            t.case(v.is_none_or(|v| v >= need), || format!("n={n} x={x}: {v:?}, need {need}"));
        }
    }
    t.finish();
    report
}

/// For `n = 2^e + Δ`, `0 ≤ Δ < 2^e`, `k ≤ 2^(e+1)`: `ν(Φ_n(k)) ≥ 0`, with equality iff
/// `C(2^(e−1) − 1 − [Δ/2], k − Δ)` is odd.
pub fn check_qprop1(e_max: u32) -> Report {
    let mut report = Report::new();
    let mut t = Tally::new(&mut report, "qprop1", format!("1<=e<={e_max} k<=2^(e+1)"));
    for e in 1..=e_max {
        let top = |delta: u64| (1u64 << (e - 1)) - 1 - delta / 2;
        for delta in 0..1u64 << e {
            let n = (1u64 << e) + delta;
            for k in 0..=2u64 << e {
                let v = eval_phi(n, k).nu;
                let want = k.checked_sub(delta).is_some_and(|r| binomial_is_odd(top(delta), r));
                let ok = match v {
                    None => !want,
                    Some(v) => v >= 0 && (v == 0) == want,
                };
                t.case(ok, || format!("n={n} k={k}: nu {v:?}, binomial odd {want}"));
            }
        }
    }
    t.finish();
    report
}

/// `ν(Φ_n(s)) ≥ s − [n/2]`, the bound behind every term cutoff.
pub fn check_phi_floor(n_max: u64, s_max: u64) -> Report {
    let mut report = Report::new();
    let mut t = Tally::new(&mut report, "phi_floor", format!("n<={n_max} s<={s_max}"));
    for n in 1..=n_max {
        for s in 0..=s_max {
            let v = eval_phi(n, s).nu;
            let need = s as i64 - (n / 2) as i64;
            t.case(v.is_none_or(|v| v >= need), || format!("n={n} s={s}: {v:?}, need {need}"));
        }
    }
    t.finish();
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_edges() {
        // P_1 = 1 and P_2 = 1 everywhere; the tops 2x − 2 and 2x − 3 go negative.
        for x in -3..3 {
            assert!(parity_binomial_odd(1, x));
            assert!(parity_binomial_odd(2, x));
        }
        // P_3(2) = 2, with C(0, 2) = 0.
        assert!(!parity_binomial_odd(3, 2));
        assert!(signed_binomial_odd(-1, 5));
        assert!(!signed_binomial_odd(-2, 1));
    }

    #[test]
    fn small_ranges() {
        for r in [check_p0(16, 64), check_per(12, 10, 4, 1), check_approx(8, 10), check_qprop1(4), check_phi_floor(20, 30)] {
            assert!(r.passed(), "{:#?}", r.failures().collect::<Vec<_>>());
        }
    }
}
