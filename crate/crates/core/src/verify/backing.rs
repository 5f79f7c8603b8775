//! Which zeros fall under a proven family, and with what constant.

use crate::dyadic::{alpha, lg, nu};
use crate::zeros::{CongruenceClass, Theorem};

/// `C(a, b)` is odd, with `C(a, b) = 0` when `b > a`.
pub fn binomial_is_odd(a: u64, b: u64) -> bool {
    b <= a && b & (a - b) == 0
}

/// `(e, Δ)` with `n = 2^e + Δ`, `e = lg(n − 1)`.
pub fn split_index(n: u64) -> Option<(u32, u64)> {
    let e = lg(n.checked_sub(1)?)?;
    Some((e, n - (1 << e)))
}

/// Constant `c` of the zero in class `p mod 2^(e−1)` of `P_{2^e+Δ}`.
pub fn four_constant(e: u32, delta: u64, p: u64) -> u64 {
    match (delta, p % 2) {
        (3, 0) | (4, 1) if e == 2 => 2,
        (3, 0) | (4, 1) => 1,
        _ => 0,
    }
}

/// Predicted constant when `n = 2^e + Δ`, `1 ≤ Δ ≤ 4` and the class is mod `2^(e−1)`.
pub fn four_prediction(n: u64, class: &CongruenceClass) -> Option<u64> {
    let (e, delta) = split_index(n)?;
    (e >= 2 && (1..=4).contains(&delta) && class.log_modulus == e - 1)
        .then(|| four_constant(e, delta, class.residue))
}

/// One admissible `(p, ε, b)` of the single-term family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SingleCase {
    pub n: u64,
    pub e: u32,
    pub t: u32,
    pub p: u64,
    pub p0: u64,
    pub eps: u64,
    pub b: u64,
    pub q: u64,
    pub c: u64,
}

impl SingleCase {
    pub fn class(&self) -> CongruenceClass {
        CongruenceClass { log_modulus: self.e - 1, residue: self.q }
    }

    /// The unique minimizing `(j, k)`.
    pub fn min_term(&self) -> (u64, u64) {
        (1 << (self.e - 1), self.p0)
    }
}

/// `ε = 1` shifts by `2^(ν(n)−1)`, which is an integer only for even `n`.
fn eps_shifts(n: u64) -> Vec<(u64, u64)> {
    let mut v = vec![(0, 0)];
    if n.is_multiple_of(2) {
        v.push((1, 1 << (nu(n as i128).expect("n positive") - 1)));
    }
    v
}

pub fn single_cases(n: u64) -> Vec<SingleCase> {
    let Some((e, delta)) = split_index(n) else { return vec![] };
    if e < 2 || delta == 0 {
        return vec![];
    }
    let t = lg(delta).expect("delta positive");
    let half = 1u64 << (e - 1);
    let lo = n.saturating_sub(half * 3);
    let mut out = Vec::new();
    for p in lo..half {
        if !binomial_is_odd(n - 1 - p, p) {
            continue;
        }
        let p0 = p % (1 << t);
        let c = alpha(n as u128) as i64 - 2 - alpha(p0 as u128) as i64;
        if c < 0 {
            continue;
        }
        for (eps, shift) in eps_shifts(n) {
            let mut b = 0u64;
            loop {
                let q = p + shift + (b << (t + 1));
                if q >= half {
                    break;
                }
                out.push(SingleCase { n, e, t, p, p0, eps, b, q, c: c as u64 });
                b += 1;
            }
        }
    }
    out
}

/// One admissible `(p, ε, δ)` of the split family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DoubleCase {
    pub n: u64,
    pub e: u32,
    pub p: u64,
    pub eps: u64,
    pub q: u64,
    pub delta: u64,
    pub ell: u32,
    pub c: u64,
}

impl DoubleCase {
    pub fn class(&self) -> CongruenceClass {
        CongruenceClass { log_modulus: self.e, residue: (self.delta << (self.e - 1)) + self.q }
    }

    /// Every `(j, k)` attaining the minimum.
    pub fn min_terms(&self) -> Vec<(u64, u64)> {
        let (e, l, p) = (self.e, self.ell, self.p);
        let mut v = vec![((1 << e) - (1 << l), p)];
        if self.delta == 1 {
            v.push(((1 << (e - 1)) - (1 << l), (1 << (e - 1)) + p));
            v.push((1 << (e - 1), (1 << (e - 1)) + p - (1 << l)));
        }
        v.sort();
        v
    }
}

pub fn double_cases(n: u64) -> Vec<DoubleCase> {
    let Some(e) = lg(n) else { return vec![] };
    if e < 2 || n <= 3 << (e - 1) || n >= 2 << e {
        return vec![];
    }
    let mut out = Vec::new();
    for p in 0..=(n - (3 << (e - 1))) / 2 {
        if (n, p) == ((2 << e) - 1, 0) || !binomial_is_odd(n - 1 - p, p) {
            continue;
        }
        let ell = lg((2 << e) - (n - p)).expect("positive");
        let c = alpha(n as u128) as u64 - 1 - alpha(p as u128) as u64;
        for (eps, shift) in eps_shifts(n) {
            let q = p + shift;
            for delta in 0..2 {
                out.push(DoubleCase { n, e, p, eps, q, delta, ell, c });
            }
        }
    }
    out
}

/// The family, if any, that proves a zero with constant `c` in `class`.
pub fn theorem_for(n: u64, class: &CongruenceClass, c: u64) -> Option<Theorem> {
    if four_prediction(n, class) == Some(c) {
        return Some(Theorem::Four);
    }
    if single_cases(n).iter().any(|s| s.class() == *class && s.c == c) {
        return Some(Theorem::Single);
    }
    if double_cases(n).iter().any(|s| s.class() == *class && s.c == c) {
        return Some(Theorem::Double);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_binomials() {
        for a in 0..40u64 {
            for b in 0..45u64 {
                let exact = if b > a { 0u8.into() } else { crate::kernel::binomial(a, b) };
                assert_eq!(binomial_is_odd(a, b), exact.bit(0), "C({a},{b})");
            }
        }
    }

    #[test]
    fn four_constants() {
        assert_eq!(four_prediction(7, &CongruenceClass { log_modulus: 1, residue: 0 }), Some(2));
        assert_eq!(four_prediction(11, &CongruenceClass { log_modulus: 2, residue: 2 }), Some(1));
        assert_eq!(four_prediction(12, &CongruenceClass { log_modulus: 2, residue: 2 }), Some(0));
        assert_eq!(four_prediction(13, &CongruenceClass { log_modulus: 2, residue: 0 }), None);
    }

    #[test]
    fn families() {
        // n = 29: e = 4, t = 3.
        let s = single_cases(29);
        assert!(s.iter().all(|c| c.q < 8 && c.eps == 0));
        let d = double_cases(29);
        assert!(d.iter().all(|c| c.class().log_modulus == 4));
        assert!(double_cases(31).iter().all(|c| c.p != 0));
        assert!(double_cases(20).is_empty());
    }
}
