//! The terms `T_{k,j} = C(2^m x + p, k) · 2^{-d} C(2^{m+d}, j) · Φ_n(j + k)` whose sum is
//! `(P_n(2^m(x + 2^d) + p) − P_n(2^m x + p)) / 2^d`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::dyadic::{binomial_mod, lg, nu_binomial_big, TwoAdic};
use crate::error::{Error, Result};
use crate::kernel::eval_phi;
use crate::word::Word;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    pub j: u64,
    pub k: u64,
}

impl TermKey {
    pub fn new(j: u64, k: u64) -> Self {
        TermKey { j, k }
    }
}

impl fmt::Display for TermKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.j, self.k)
    }
}

/// Parameters shared by every term of one sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TermSum {
    pub n: u64,
    /// Log modulus of the class.
    pub m: u32,
    pub p: u64,
    pub x: u64,
    pub d: u32,
}

impl TermSum {
    pub fn new(n: u64, m: u32, p: u64, x: u64, d: u32) -> Self {
        TermSum { n, m, p, x, d }
    }

    fn point(&self) -> BigUint {
        (BigUint::from(self.x) << self.m) + self.p
    }

    fn j_max(&self) -> u64 {
        1u64 << (self.m + self.d)
    }

    /// `ν(T_{k,j})`, `None` when the term vanishes. Uses
    /// `ν(2^{-d} C(2^{m+d}, j)) = m − ν(j)` for `1 ≤ j ≤ 2^{m+d}`.
    pub fn term_nu(&self, key: TermKey) -> Result<Option<i64>> {
        if key.j == 0 || key.j > self.j_max() {
            return Err(Error::InvalidArgument(format!("j = {} outside 1..=2^{}", key.j, self.m + self.d)));
        }
        let Ok(vc) = nu_binomial_big(&self.point(), key.k) else { return Ok(None) };
        let Some(vphi) = eval_phi(self.n, key.j + key.k).nu else { return Ok(None) };
        Ok(Some(vc as i64 + self.m as i64 - key.j.trailing_zeros() as i64 + vphi))
    }

    /// Smallest `s` such that every term with `j + k ≥ s` has `ν > threshold`,
    /// from `ν(Φ_n(s)) ≥ s − [n/2]` and `ν(j) ≤ lg(s)`.
    pub fn cutoff(&self, threshold: i64) -> u64 {
        let half = (self.n / 2) as i64;
        let mut s = 1u64;
        while self.m as i64 - lg(s).unwrap() as i64 + s as i64 - half <= threshold {
            s += 1;
        }
        s
    }

    /// Every term with `j + k` below the cutoff for `threshold`.
    pub fn terms(&self, threshold: i64) -> Vec<(TermKey, Option<i64>)> {
        let cut = self.cutoff(threshold);
        let mut out = Vec::new();
        for s in 1..cut {
            for j in 1..=s.min(self.j_max()) {
                let key = TermKey::new(j, s - j);
                out.push((key, self.term_nu(key).expect("j in range")));
            }
        }
        out
    }

    pub fn min_terms(&self, threshold: i64) -> MinTerms {
        let cutoff = self.cutoff(threshold);
        let terms = self.terms(threshold);
        let minimum = terms.iter().filter_map(|(_, v)| *v).min();
        let mut argmin: Vec<TermKey> =
            terms.iter().filter(|(_, v)| v.is_some() && *v == minimum).map(|(k, _)| *k).collect();
        argmin.sort();
        let at_threshold: Vec<TermKey> = terms.iter().filter(|(_, v)| *v == Some(threshold)).map(|(k, _)| *k).collect();
        MinTerms { threshold, cutoff, minimum, argmin, at_threshold }
    }

    /// `2^d T_{k,j} mod 2^bits`, zero when the term vanishes.
    pub fn scaled_residue(&self, key: TermKey, bits: u32) -> BigUint {
        let phi = eval_phi(self.n, key.j + key.k);
        if phi.nu.is_none() {
            return BigUint::zero();
        }
        let bk = binomial_mod(&self.point(), key.k, bits).expect("bits > 0");
        if bk.nu.is_none() {
            return BigUint::zero();
        }
        let top = BigUint::from(1u8) << (self.m + self.d);
        let bj = binomial_mod(&top, key.j, bits).expect("bits > 0");
        let ph: TwoAdic = phi.residue(bits).expect("Φ is integral");
        (&(&bk.value * &bj.value) * &ph).residue().clone()
    }

    /// `ν(Σ T_{k,j})`, computed from exact residues; `None` when the sum is
    /// `0 mod 2^guard`.
    pub fn sum_nu(&self, guard: u32) -> Option<i64> {
        // Work with 2^d Σ T, which has integral terms.
        let bits = guard + self.d;
        let half = (self.n / 2) as i64;
        let mut acc = BigUint::zero();
        let mut s = 1u64;
        // Terms of 2^d Σ T have ν ≥ m + d − lg(s) + s − [n/2].
        while (self.m + self.d) as i64 - lg(s).unwrap() as i64 + s as i64 - half < bits as i64 {
            for j in 1..=s.min(self.j_max()) {
                acc = acc.add_mod(&self.scaled_residue(TermKey::new(j, s - j), bits), bits);
            }
            s += 1;
        }
        acc.trailing_zeros().map(|v| v as i64 - self.d as i64)
    }
}

/// Result of enumerating all terms below the cutoff.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinTerms {
    pub threshold: i64,
    /// Terms with `j + k ≥ cutoff` all exceed the threshold.
    pub cutoff: u64,
    pub minimum: Option<i64>,
    pub argmin: Vec<TermKey>,
    pub at_threshold: Vec<TermKey>,
}

/// `ν(T_{k,j})` for the class `2^m x + p`.
pub fn term_nu(n: u64, m: u32, p: u64, x: u64, d: u32, key: TermKey) -> Result<Option<i64>> {
    TermSum::new(n, m, p, x, d).term_nu(key)
}

pub fn enumerate_min_terms(n: u64, m: u32, p: u64, x: u64, d: u32, threshold: i64) -> MinTerms {
    TermSum::new(n, m, p, x, d).min_terms(threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::eval_p;
    use num_bigint::BigInt;

    fn keys(v: &[(u64, u64)]) -> Vec<TermKey> {
        let mut k: Vec<TermKey> = v.iter().map(|&(j, k)| TermKey::new(j, k)).collect();
        k.sort();
        k
    }

    #[test]
    fn worked_minimal_set() {
        let r = enumerate_min_terms(29, 4, 10, 0, 0, 2);
        assert_eq!(r.cutoff, 17);
        assert_eq!(r.minimum, Some(2));
        assert_eq!(r.argmin, keys(&[(4, 10), (12, 2), (8, 6)]));
        assert_eq!(term_nu(29, 4, 10, 0, 0, TermKey::new(4, 10)).unwrap(), Some(2));
        assert!(term_nu(29, 4, 10, 0, 0, TermKey::new(17, 0)).is_err());
    }

    #[test]
    fn unique_minimum_families() {
        for e in 3..=7u32 {
            let r = enumerate_min_terms((1 << e) + 1, e - 1, 0, 0, 0, 0);
            assert_eq!(r.argmin, keys(&[(1 << (e - 1), 0)]), "e = {e}");
            let r = enumerate_min_terms(1 << (e + 1), e - 1, 0, 0, 0, 0);
            assert_eq!((r.minimum, r.argmin), (Some(0), keys(&[(1 << (e - 1), 0)])), "e = {e}");
        }
    }

    #[test]
    fn sums_match_differences() {
        for (n, m, p) in [(29u64, 4u32, 10u64), (31, 4, 2), (7, 1, 0), (23, 4, 14), (12, 2, 3)] {
            for x in 0..4u64 {
                for d in 0..4u32 {
                    let s = TermSum::new(n, m, p, x, d);
                    let a = BigInt::from(((x + (1 << d)) << m) + p);
                    let b = BigInt::from((x << m) + p);
                    let diff = &eval_p(n, &a, 40).unwrap() - &eval_p(n, &b, 40).unwrap();
                    let direct = diff.valuation().finite().map(|v| v as i64 - d as i64);
                    assert_eq!(s.sum_nu(30), direct, "n={n} m={m} p={p} x={x} d={d}");
                }
            }
        }
    }

    #[test]
    fn cutoff_is_sound() {
        let s = TermSum::new(29, 4, 10, 3, 2);
        let cut = s.cutoff(2);
        for sum in cut..cut + 20 {
            for j in 1..=sum.min(64) {
                if let Some(v) = s.term_nu(TermKey::new(j, sum - j)).unwrap() {
                    assert!(v > 2);
                }
            }
        }
    }
}
