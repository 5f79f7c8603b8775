//! The global valuation formula
//! `ν(P_n(z)) = Σ ν(z − z_i) − ν([(n−1)/2]!) + correction(n, z)`, summed over
//! every zero `z_i` of `P_n`, checked against direct probes.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::report::{Report, Tally};
use crate::dyadic::{nu, nu_factorial};
use crate::zeros::{Atlas, Prober, ZeroRecord};

/// `min(cap, 2ν(z − center))` for one exceptional `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpecialCorrection {
    pub n: u64,
    pub cap: u64,
    pub center: i64,
}

pub const SPECIAL_CORRECTIONS: &[SpecialCorrection] = &[
    SpecialCorrection { n: 21, cap: 15, center: 148 },
    SpecialCorrection { n: 29, cap: 9, center: 19 },
    SpecialCorrection { n: 45, cap: 8, center: 11 },
    SpecialCorrection { n: 61, cap: 10, center: 3 },
];

fn nu_int(x: &BigInt) -> Option<u64> {
    x.trailing_zeros()
}

/// The case term. The parity term applies when `n + z` is odd: `P_3(z) = (3 + 3^z)/6`
/// has `ν = 1` exactly at even `z`, and `P_3` has no zeros.
pub fn correction(n: u64, z: &BigInt) -> u64 {
    correction_with(SPECIAL_CORRECTIONS, n, z)
}

pub fn correction_with(table: &[SpecialCorrection], n: u64, z: &BigInt) -> u64 {
    if let Some(s) = table.iter().find(|s| s.n == n) {
        return nu_int(&(z - s.center)).map_or(s.cap, |v| s.cap.min(2 * v));
    }
    let z_odd = z.is_odd();
    if matches!(n % 4, 0 | 3) && (n % 2 == 1) != z_odd {
        return nu(n.div_ceil(2) as i128).expect("positive") as u64;
    }
    0
}

/// `ν(z − z_i)` from the known low bits of `z_i`, or `None` once it reaches
/// `limit`, beyond which the record cannot resolve it.
fn distance(z: &BigInt, zero: &ZeroRecord, limit: u32) -> Option<u64> {
    let modulus = BigInt::from(BigUint::one() << zero.witness_depth);
    let diff = (z - BigInt::from(zero.zero_bits.to_biguint())).mod_floor(&modulus);
    nu_int(&diff).filter(|&v| v <= limit as u64)
}

/// Right-hand side at `z`, or `None` when some `ν(z − z_i)` exceeds `depth − slack`.
pub fn cgen_rhs(n: u64, z: &BigInt, zeros: &[&ZeroRecord], slack: u32) -> Option<i64> {
    cgen_rhs_with(SPECIAL_CORRECTIONS, n, z, zeros, slack)
}

pub fn cgen_rhs_with(
    table: &[SpecialCorrection],
    n: u64,
    z: &BigInt,
    zeros: &[&ZeroRecord],
    slack: u32,
) -> Option<i64> {
    let mut sum = 0u64;
    for zero in zeros {
        sum += distance(z, zero, zero.witness_depth.saturating_sub(slack))?;
    }
    Some(sum as i64 - nu_factorial((n - 1) / 2) as i64 + correction_with(table, n, z) as i64)
}

/// Sample points: half uniform in `[−2^40, 2^40)`, half sharing a random number of
/// low bits with a random zero.
pub fn sample_points(zeros: &[&ZeroRecord], samples: usize, seed: u64) -> Vec<BigInt> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|i| {
            if i % 2 == 0 || zeros.is_empty() {
                return BigInt::from(rng.gen_range(-(1i64 << 40)..1i64 << 40));
            }
            let zero = zeros[rng.gen_range(0..zeros.len())];
            let r = rng.gen_range(0..=zero.witness_depth.saturating_sub(16));
            let low = zero.zero_bits.to_biguint() & ((BigUint::one() << r) - 1u8);
            let high = BigInt::from(rng.gen_range(-(1i64 << 24)..1i64 << 24)) << r;
            BigInt::from(low) + high
        })
        .collect()
}

/// Check the formula for `n` at `samples` points against the zeros in `atlas`.
/// Points where some `ν(z − z_i)` exceeds `witness_depth − 8` are skipped; a skip
/// rate of 1% or more fails the check.
pub fn verify_cgen(atlas: &Atlas, n: u64, samples: usize, seed: u64) -> Report {
    verify_cgen_with(SPECIAL_CORRECTIONS, atlas, n, samples, seed)
}

/// As [`verify_cgen`] with a different table of special corrections.
pub fn verify_cgen_with(table: &[SpecialCorrection], atlas: &Atlas, n: u64, samples: usize, seed: u64) -> Report {
    let mut report = Report::new();
    let params = format!("n={n} samples={samples} seed={seed}");
    if atlas.reports(n).is_none() {
        report.fail("cgen.atlas", params, "n not in atlas");
        return report;
    }
    let unresolved = atlas.unresolved(n);
    report.push("cgen.atlas", params.clone(), unresolved.is_empty(), format!("{} unresolved classes", unresolved.len()));
    let zeros = atlas.zeros(n);
    let prober = match Prober::new(n, atlas.limits.cap) {
        Ok(p) => p,
        Err(e) => {
            report.fail("cgen.values", params, e.to_string());
            return report;
        }
    };
    let mut skipped = 0usize;
    let mut t = Tally::new(&mut report, "cgen.values", params.clone());
    for z in sample_points(&zeros, samples, seed) {
        let Some(rhs) = cgen_rhs_with(table, n, &z, &zeros, 8) else {
            skipped += 1;
            continue;
        };
        let lhs = prober.nu(&z);
        let ok = lhs.finite().is_some_and(|v| v as i64 == rhs);
        t.case(ok, || format!("z={z}: nu {lhs}, formula {rhs}"));
    }
    t.finish();
    let rate = skipped as f64 / samples.max(1) as f64;
    report.push("cgen.skips", params, rate < 0.01, format!("{skipped} of {samples} skipped ({:.2}%)", 100.0 * rate));
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeros::{build_atlas, Limits};

    #[test]
    fn corrections() {
        assert_eq!(correction(29, &BigInt::from(19)), 9);
        assert_eq!(correction(29, &BigInt::from(23)), 4);
        assert_eq!(correction(21, &BigInt::from(149)), 0);
        assert_eq!(correction(3, &BigInt::from(4)), 1);
        assert_eq!(correction(3, &BigInt::from(5)), 0);
        assert_eq!(correction(8, &BigInt::from(5)), 2);
        assert_eq!(correction(8, &BigInt::from(-3)), 2);
        assert_eq!(correction(8, &BigInt::from(-2)), 0);
        assert_eq!(correction(12, &BigInt::from(1)), 1);
        assert_eq!(correction(5, &BigInt::from(2)), 0);
    }

    #[test]
    fn small_n() {
        let limits = Limits::default();
        let atlas = build_atlas(1..=12, &limits).unwrap();
        for n in 1..=12 {
            let r = verify_cgen(&atlas, n, 100, n);
            assert!(r.passed(), "n={n}: {:#?}", r.failures().collect::<Vec<_>>());
        }
    }

    #[test]
    fn thirteen_needs_its_own_correction() {
        let atlas = build_atlas([13], &Limits::default()).unwrap();
        assert!(!verify_cgen(&atlas, 13, 200, 1).passed());
        let mut table = SPECIAL_CORRECTIONS.to_vec();
        table.push(SpecialCorrection { n: 13, cap: 8, center: 11 });
        let r = verify_cgen_with(&table, &atlas, 13, 1000, 1);
        assert!(r.passed(), "{:#?}", r.failures().collect::<Vec<_>>());
    }
}
