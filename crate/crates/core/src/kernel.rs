//! Evaluators for the partial Stirling functions and their companions.

use std::sync::{Arc, OnceLock};

use dashmap::DashMap;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::dyadic::{lg, nu_factorial, reduce_signed, TwoAdic};
use crate::error::{Error, Result};
use crate::word::{inverse_odd, pow_mod_word, pow_mod_word_u64, Word};

/// Pick the narrowest word holding `bits` and evaluate `body` with it bound to `$W`.
#[macro_export]
#[doc(hidden)]
macro_rules! by_width {
    ($bits:expr, $W:ident => $body:expr) => {{
        let bits: u32 = $bits;
        if bits <= 64 {
            type $W = u64;
            $body
        } else if bits <= 128 {
            type $W = u128;
            $body
        } else {
            type $W = ::num_bigint::BigUint;
            $body
        }
    }};
}

/// Working width for the odd-`j` numerator of `P_n` at output precision `prec`.
pub fn numerator_bits(n: u64, prec: u32) -> u32 {
    prec + nu_factorial(n) as u32 + 2
}

/// `C(n, j)` for odd `j`, reduced mod `2^bits`.
fn odd_binomials<W: Word>(n: u64, bits: u32) -> Vec<(u64, W)> {
    let mut out = Vec::with_capacity(n as usize / 2 + 1);
    let mut c = BigUint::one();
    for j in 0..n {
        c = c * (n - j) / (j + 1);
        if (j + 1) % 2 == 1 {
            out.push((j + 1, W::from_biguint(&c).mask(bits)));
        }
    }
    out
}

/// Odd part of `n!` modulo `2^bits`.
pub fn odd_factorial_unit<W: Word>(n: u64, bits: u32) -> W {
    let mut acc = W::one().mask(bits);
    for m in 2..=n {
        acc = acc.mul_small_mod(m >> m.trailing_zeros(), bits);
    }
    acc
}

/// Turn an odd-`j` numerator mod `2^numerator_bits(n, prec)` into `P_n` mod `2^prec`.
///
/// Panics if the numerator is not divisible by `2^ν(n!)`, which would mean an
/// arithmetic bug upstream.
pub fn finish_numerator<W: Word>(n: u64, num: &W, prec: u32, unit_inv: &W) -> TwoAdic<W> {
    let shift = nu_factorial(n) as u32;
    assert!(
        num.mask(shift).is_zero(),
        "numerator of P_{n} not divisible by 2^{shift}"
    );
    let q = num.shr(shift);
    let v = q.mul_mod(unit_inv, prec + 2).mask(prec);
    TwoAdic::new(v, prec).expect("precision checked by caller")
}

/// A prepared evaluator for `P_n` at a fixed output precision.
#[derive(Clone, Debug)]
pub struct OddSum<W: Word> {
    n: u64,
    prec: u32,
    bits: u32,
    unit_inv: W,
    terms: Vec<(u64, W)>,
}

impl<W: Word> OddSum<W> {
    pub fn new(n: u64, prec: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if prec == 0 {
            return Err(Error::ZeroPrecision);
        }
        let bits = numerator_bits(n, prec);
        if !W::fits(bits) {
            return Err(Error::Capacity { prec: bits, capacity: W::CAPACITY.unwrap_or(0) });
        }
        let unit = odd_factorial_unit::<W>(n, prec + 2);
        Ok(OddSum {
            n,
            prec,
            bits,
            unit_inv: inverse_odd(&unit, prec + 2),
            terms: odd_binomials(n, bits),
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    fn power(&self, j: u64, x: &BigInt) -> W {
        let b = W::from_u64(j);
        if x.is_negative() {
            pow_mod_word(&inverse_odd(&b, self.bits), x.magnitude(), self.bits)
        } else {
            pow_mod_word(&b, x.magnitude(), self.bits)
        }
    }

    /// `Σ_{j odd} C(n,j) j^x mod 2^K`.
    pub fn numerator(&self, x: &BigInt) -> W {
        let mut acc = W::zero();
        for (j, w) in &self.terms {
            let p = if *j == 1 { W::one() } else { self.power(*j, x) };
            acc = acc.add_mod(&w.mul_mod(&p, self.bits), self.bits);
        }
        acc
    }

    pub fn eval(&self, x: &BigInt) -> TwoAdic<W> {
        finish_numerator(self.n, &self.numerator(x), self.prec, &self.unit_inv)
    }

    /// Values at `start + i·stride` for `i < count`.
    pub fn eval_progression(&self, start: &BigInt, stride: &BigUint, count: usize) -> Vec<TwoAdic<W>> {
        let mut cur: Vec<W> = Vec::with_capacity(self.terms.len());
        let mut step: Vec<W> = Vec::with_capacity(self.terms.len());
        for (j, w) in &self.terms {
            cur.push(w.mul_mod(&self.power(*j, start), self.bits));
            step.push(pow_mod_word(&W::from_u64(*j), stride, self.bits));
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let mut acc = W::zero();
            for (c, s) in cur.iter_mut().zip(&step) {
                acc = acc.add_mod(c, self.bits);
                *c = c.mul_mod(s, self.bits);
            }
            out.push(finish_numerator(self.n, &acc, self.prec, &self.unit_inv));
        }
        out
    }
}

/// `P_n(x)` modulo `2^prec`.
pub fn eval_p(n: u64, x: &BigInt, prec: u32) -> Result<TwoAdic> {
    by_width!(numerator_bits(n, prec), W => OddSum::<W>::new(n, prec)?.eval(x).convert())
}

pub fn eval_p_in<W: Word>(n: u64, x: &BigInt, prec: u32) -> Result<TwoAdic<W>> {
    Ok(OddSum::<W>::new(n, prec)?.eval(x))
}

/// `P_n` at a truncated argument. The result is known to `x.prec + 1 − lg n` bits.
pub fn eval_p_truncated<W: Word>(n: u64, x: &TwoAdic<W>) -> Result<TwoAdic> {
    let l = lg(n).ok_or_else(|| Error::InvalidArgument("n must be positive".into()))?;
    if x.prec() < l {
        return Err(Error::PrecisionUnderflow { prec: x.prec(), lg: l });
    }
    eval_p(n, &BigInt::from(x.to_biguint()), x.prec() + 1 - l)
}

/// `T_n(x) = Σ_{j odd} C(n,j) j^x`, exactly.
pub fn eval_t(n: u64, x: u64) -> BigUint {
    let mut c = BigUint::one();
    let mut acc = BigUint::zero();
    for j in 0..n {
        c = c * (n - j) / (j + 1);
        if (j + 1) % 2 == 1 {
            acc += &c * num_traits::pow(BigUint::from(j + 1), x as usize);
        }
    }
    acc
}

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, m| acc * m)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::one(), |c, i| c * (n - i) / (i + 1))
}

/// Stirling numbers of the second kind `S(x, k)` for `x <= max_x`, `k <= max_k`.
#[derive(Clone, Debug)]
pub struct StirlingTable {
    rows: Vec<Vec<BigUint>>,
}

impl StirlingTable {
    pub fn new(max_x: u64, max_k: u64) -> Self {
        let width = max_k as usize + 1;
        let mut rows = Vec::with_capacity(max_x as usize + 1);
        let mut row = vec![BigUint::zero(); width];
        row[0] = BigUint::one();
        rows.push(row.clone());
        for _ in 1..=max_x {
            let mut next = vec![BigUint::zero(); width];
            for k in 1..width {
                next[k] = &row[k] * k as u64 + &row[k - 1];
            }
            rows.push(next.clone());
            row = next;
        }
        StirlingTable { rows }
    }

    pub fn get(&self, x: u64, k: u64) -> &BigUint {
        &self.rows[x as usize][k as usize]
    }
}

/// `S(x, n)` by the triangular recurrence.
pub fn stirling2(x: u64, n: u64) -> BigUint {
    if n > x {
        return BigUint::zero();
    }
    StirlingTable::new(x, n).get(x, n).clone()
}

/// `S(x, n)` from `(1/n!) Σ (−1)^(n−j) C(n,j) j^x`.
pub fn stirling2_alternating(x: u64, n: u64) -> BigUint {
    let mut acc = BigInt::zero();
    for j in 0..=n {
        let term = BigInt::from(binomial(n, j) * num_traits::pow(BigUint::from(j), x as usize));
        if (n - j).is_multiple_of(2) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    let (q, r) = acc.div_rem(&BigInt::from(factorial(n)));
    assert!(r.is_zero());
    q.to_biguint().expect("Stirling numbers are nonnegative")
}

/// `Φ_n(s) = (1/n!) Σ_i C(n, 2i+1) (2i)^s`, held as an exact numerator over `n!`.
#[derive(Clone, Debug, PartialEq)]
pub struct Phi {
    pub n: u64,
    pub s: u64,
    pub numerator: BigUint,
    /// `ν(Φ_n(s))`, or `None` when `Φ_n(s) = 0`.
    pub nu: Option<i64>,
}

impl Phi {
    fn compute(n: u64, s: u64) -> Phi {
        let mut acc = BigUint::zero();
        let mut c = BigUint::from(n);
        let mut i = 0u64;
        while 2 * i < n {
            let t = if s == 0 {
                c.clone()
            } else if i == 0 {
                BigUint::zero()
            } else {
                &c * num_traits::pow(BigUint::from(2 * i), s as usize)
            };
            acc += t;
            // C(n, 2i+3) from C(n, 2i+1).
            let a = 2 * i + 1;
            if a + 2 <= n {
                c = c * (n - a) * (n - a - 1) / ((a + 1) * (a + 2));
            }
            i += 1;
        }
        let nu = acc.trailing_zeros().map(|v| v as i64 - nu_factorial(n) as i64);
        Phi { n, s, numerator: acc, nu }
    }

    pub fn value(&self) -> BigRational {
        BigRational::new(BigInt::from(self.numerator.clone()), BigInt::from(factorial(self.n)))
    }

    /// `Φ_n(s) / 2^ν` modulo `2^bits`; `None` when zero.
    pub fn unit<W: Word>(&self, bits: u32) -> Option<W> {
        let v = self.numerator.trailing_zeros()?;
        let odd = W::from_biguint(&(&self.numerator >> v)).mask(bits);
        let den = odd_factorial_unit::<W>(self.n, bits);
        Some(odd.mul_mod(&inverse_odd(&den, bits), bits))
    }

    /// `Φ_n(s)` as a 2-adic integer mod `2^bits`; errors if `ν < 0`.
    pub fn residue<W: Word>(&self, bits: u32) -> Result<TwoAdic<W>> {
        match self.nu {
            None => Ok(TwoAdic::zero(bits)),
            Some(v) if v < 0 => Err(Error::InvalidArgument(format!(
                "Φ_{}({}) has negative valuation",
                self.n, self.s
            ))),
            Some(v) => {
                let u: W = self.unit(bits).expect("nonzero");
                TwoAdic::new(u.shl_mod(v.min(bits as i64) as u32, bits), bits)
            }
        }
    }
}

fn phi_memo() -> &'static DashMap<(u64, u64), Arc<Phi>> {
    static MEMO: OnceLock<DashMap<(u64, u64), Arc<Phi>>> = OnceLock::new();
    MEMO.get_or_init(DashMap::new)
}

/// Memoized `Φ_n(s)`.
pub fn eval_phi(n: u64, s: u64) -> Arc<Phi> {
    if let Some(p) = phi_memo().get(&(n, s)) {
        return p.clone();
    }
    let p = Arc::new(Phi::compute(n, s));
    phi_memo().insert((n, s), p.clone());
    p
}

/// `ν(Φ_n(s))` for `s < len`, `None` marking zeros.
pub fn phi_nu_table(n: u64, len: u64) -> Vec<Option<i64>> {
    (0..len).map(|s| eval_phi(n, s).nu).collect()
}

/// `(1/Δ!) Σ_{j=0}^{Δ} C(Δ,j) j^x`, exactly (`0^0 = 1`).
pub fn eval_allj_sum(delta: u64, x: u64) -> BigRational {
    let mut acc = BigUint::zero();
    for j in 0..=delta {
        acc += binomial(delta, j) * num_traits::pow(BigUint::from(j), x as usize);
    }
    BigRational::new(BigInt::from(acc), BigInt::from(factorial(delta)))
}

/// The odd-`j` part of [`eval_allj_sum`]: `(1/Δ!) Σ_{j odd} C(Δ,j) j^x`.
pub fn eval_oddj_sum(delta: u64, x: u64) -> BigRational {
    BigRational::new(BigInt::from(eval_t(delta, x)), BigInt::from(factorial(delta)))
}

/// Product of the odd integers below `2^e`, modulo `2^prec`, by direct multiplication.
pub fn odd_product_direct<W: Word>(e: u32, prec: u32) -> W {
    let mut acc = W::one().mask(prec);
    let top = 1u64 << e;
    let mut m = 3u64;
    while m < top {
        acc = acc.mul_small_mod(m, prec);
        m += 2;
    }
    acc
}

/// `U(2^e!)` mod `2^prec` as `Π_{i ≤ e} Π_{odd m < 2^i} m`, by direct multiplication.
pub fn u_factorial_pow2_direct<W: Word>(e: u32, prec: u32) -> W {
    let mut acc = W::one().mask(prec);
    for i in 2..=e {
        acc = acc.mul_mod(&odd_product_direct::<W>(i, prec), prec);
    }
    acc
}

/// Products `Q_i = Π_{odd m < 2^i} m mod 2^prec` for `i = 1..=e`.
///
/// Uses `G_i(u) = Π_{odd m < 2^i} (2^i u + m)` with `G_{i+1}(u) = G_i(2u) G_i(2u+1)`;
/// the coefficient of `u^k` in `G_i` is divisible by `2^{ik}`, so only
/// `ceil(prec / i)` coefficients survive.
fn odd_products<W: Word>(e: u32, prec: u32) -> Vec<W> {
    let mut out = Vec::with_capacity(e as usize);
    let mut g: Vec<W> = vec![W::one(), W::from_u64(2)];
    g.iter_mut().for_each(|c| *c = c.mask(prec));
    for i in 1..=e {
        out.push(g[0].clone());
        if i == e {
            break;
        }
        if i >= prec.max(3) {
            // All further Q are 1 mod 2^prec; keep the sequence length.
            out.extend((i + 1..=e).map(|_| W::one().mask(prec)));
            break;
        }
        let deg = (prec as usize).div_ceil(i as usize + 1);
        // a(u) = G(2u), b(u) = G(2u + 1).
        let a: Vec<W> = g.iter().enumerate().map(|(k, c)| c.shl_mod(k as u32, prec)).collect();
        let mut b = vec![W::zero(); g.len()];
        for (k, c) in g.iter().enumerate() {
            // (2u+1)^k = Σ_l C(k,l) 2^l u^l
            let mut binom = BigUint::one();
            for l in 0..=k {
                let term = c.mul_mod(&W::from_biguint(&binom), prec).shl_mod(l as u32, prec);
                b[l] = b[l].add_mod(&term, prec);
                binom = binom * (k - l) / (l + 1);
            }
        }
        let len = (a.len() + b.len() - 1).min(deg + 1);
        let mut next = vec![W::zero(); len];
        for (x, ax) in a.iter().enumerate() {
            if ax.is_zero() {
                continue;
            }
            for (y, by) in b.iter().enumerate() {
                if x + y >= len {
                    break;
                }
                next[x + y] = next[x + y].add_mod(&ax.mul_mod(by, prec), prec);
            }
        }
        g = next;
    }
    out
}

/// `U(2^e!)` modulo `2^prec`.
pub fn u_factorial_pow2(e: u32, prec: u32) -> Result<TwoAdic> {
    if e == 0 || prec == 0 {
        return Err(Error::InvalidArgument("e and prec must be positive".into()));
    }
    by_width!(prec, W => {
        let qs = odd_products::<W>(e, prec);
        let mut acc = W::one().mask(prec);
        for q in &qs {
            acc = acc.mul_mod(q, prec);
        }
        TwoAdic::new(acc, prec)?.convert()
    })
}

/// `U(2^∞!)` modulo `2^prec`, as `U(2^prec!)`.
pub fn u_2inf(prec: u32) -> Result<TwoAdic> {
    u_factorial_pow2(prec.max(1), prec)
}

/// `P_{2^∞+Δ}(x) = (1/U(2^∞!)) (1/Δ!) Σ_{j=0}^{Δ} C(Δ,j) j^x` modulo `2^prec`.
pub fn eval_p_inf(delta: u64, x: i64, prec: u32) -> Result<TwoAdic> {
    if x < 0 {
        return Err(Error::InvalidArgument("the limit function is defined for x >= 0".into()));
    }
    if prec == 0 {
        return Err(Error::ZeroPrecision);
    }
    let sum = eval_allj_sum(delta, x as u64);
    let num = sum.numer();
    if num.is_zero() {
        return Ok(TwoAdic::zero(prec));
    }
    let v_num = num.trailing_zeros().unwrap() as i64;
    let v_den = sum.denom().trailing_zeros().unwrap_or(0) as i64;
    let v = v_num - v_den;
    assert!(v >= 0, "all-j sum for Δ = {delta}, x = {x} has negative valuation");
    if v >= prec as i64 {
        return Ok(TwoAdic::zero(prec));
    }
    let bits = prec;
    let odd_num: BigUint = reduce_signed(&(num >> v_num as usize), bits);
    let odd_den: BigUint = reduce_signed(&(sum.denom() >> v_den as usize), bits);
    let u = u_2inf(prec)?;
    let den = odd_den.mul_mod(u.residue(), bits);
    let r = odd_num.mul_mod(&inverse_odd(&den, bits), bits).shl_mod(v as u32, bits);
    TwoAdic::new(r, prec)
}

/// Smallest prime factor of every integer up to `n`.
pub fn spf_sieve(n: u64) -> Vec<u32> {
    let n = n as usize;
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut k = i;
            while k <= n {
                if spf[k] == 0 {
                    spf[k] = i as u32;
                }
                k += i;
            }
        }
    }
    spf
}

/// `Σ_{j odd ≤ n} C(n,j) j^(base + offset)` modulo `2^bits` for each offset.
///
/// Streams over `j` without storing the binomials. Powers `j^base` for odd
/// composite `j` are assembled from cached smaller factors, so only primes pay
/// for a modular exponentiation. `offsets` must be ascending.
pub fn odd_sums_shared<W: Word>(n: u64, base: &BigUint, offsets: &[u64], bits: u32) -> Vec<W> {
    assert!(offsets.windows(2).all(|w| w[0] <= w[1]), "offsets must be ascending");
    let spf = spf_sieve(n);
    let cache_top = n / 3;
    let mut cache: Vec<Option<W>> = vec![None; cache_top as usize + 1];
    let mut sums = vec![W::zero(); offsets.len()];
    let mut c = BigUint::one();
    for j in 1..=n {
        c = c * (n - j + 1) / j;
        if j % 2 == 0 {
            continue;
        }
        let pj: W = if j == 1 {
            W::one()
        } else if spf[j as usize] as u64 == j {
            pow_mod_word(&W::from_u64(j), base, bits)
        } else {
            let p = spf[j as usize] as u64;
            let a = cache[p as usize].as_ref().expect("cached prime power");
            let b = cache[(j / p) as usize].as_ref().expect("cached cofactor power");
            a.mul_mod(b, bits)
        };
        if j <= cache_top {
            cache[j as usize] = Some(pj.clone());
        }
        let mut cur = W::from_biguint(&c).mask(bits).mul_mod(&pj, bits);
        let mut at = 0u64;
        for (slot, &off) in sums.iter_mut().zip(offsets) {
            if off > at {
                cur = cur.mul_mod(&pow_mod_word_u64(&W::from_u64(j), off - at, bits), bits);
                at = off;
            }
            *slot = slot.add_mod(&cur, bits);
        }
    }
    sums
}

/// `P_n(base + offset)` modulo `2^prec` for each ascending offset.
pub fn eval_p_shared(n: u64, base: &BigUint, offsets: &[u64], prec: u32) -> Result<Vec<TwoAdic>> {
    if n == 0 || prec == 0 {
        return Err(Error::InvalidArgument("n and prec must be positive".into()));
    }
    let bits = numerator_bits(n, prec);
    by_width!(bits, W => {
        let nums = odd_sums_shared::<W>(n, base, offsets, bits);
        let unit_inv = inverse_odd(&odd_factorial_unit::<W>(n, prec + 2), prec + 2);
        nums.iter()
            .map(|num| finish_numerator(n, num, prec, &unit_inv).convert())
            .collect()
    })
}

/// Convert a small rational with odd denominator into a 2-adic residue.
pub fn rational_residue(q: &BigRational, prec: u32) -> Result<TwoAdic> {
    let den = q.denom();
    if den.trailing_zeros() != Some(0) {
        return Err(Error::InvalidArgument("denominator is even".into()));
    }
    let n: BigUint = reduce_signed(q.numer(), prec);
    let d: BigUint = reduce_signed(den, prec);
    TwoAdic::new(n.mul_mod(&inverse_odd(&d, prec), prec), prec)
}

/// `ν` of a nonzero rational.
pub fn nu_rational(q: &BigRational) -> Option<i64> {
    let a = q.numer().trailing_zeros()? as i64;
    let b = q.denom().trailing_zeros().unwrap_or(0) as i64;
    Some(a - b)
}

/// Exact `P_n(x)` for `x >= 0` as a rational.
pub fn eval_p_exact(n: u64, x: u64) -> BigRational {
    BigRational::new(BigInt::from(eval_t(n, x)), BigInt::from(factorial(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{alpha, Valuation};
    use proptest::prelude::*;

    fn nu_p(n: u64, x: i64, prec: u32) -> Valuation {
        eval_p(n, &BigInt::from(x), prec).unwrap().valuation()
    }

    #[test]
    fn p_one_and_zero() {
        for x in -5..20 {
            assert_eq!(eval_p(1, &BigInt::from(x), 40).unwrap().to_biguint(), BigUint::one());
        }
        for n in 1..60u64 {
            assert_eq!(nu_p(n, 0, 64), Valuation::Finite(alpha(n as u128) as u64 - 1));
        }
    }

    #[test]
    fn worked_sequences() {
        // Values confirmed by exact rational evaluation.
        let got: Vec<_> = (0..9).map(|x| nu_p(29, 16 * x + 2, 64)).collect();
        let want = [2, 5, 2, 3, 2, 4, 2, 3, 2].map(Valuation::Finite);
        assert_eq!(got, want);
        let got: Vec<_> = (0..8).map(|x| nu_p(31, 16 * x + 2, 64)).collect();
        let want = [7, 8, 7, 14, 7, 8, 7, 9].map(Valuation::Finite);
        assert_eq!(got, want);
        for x in 0..4 {
            assert_eq!(nu_p(23, 16 * x + 14, 64), Valuation::Finite(4));
        }
    }

    #[test]
    fn modular_matches_exact() {
        for n in 1..=20u64 {
            let nf = nu_factorial(n) as i64;
            for x in 0..=40u64 {
                let t = eval_t(n, x);
                let vt = t.trailing_zeros().unwrap() as i64;
                let p = eval_p(n, &BigInt::from(x), 200).unwrap();
                assert_eq!(p.valuation(), Valuation::Finite((vt - nf) as u64), "n={n} x={x}");
                let exact = rational_residue(&eval_p_exact(n, x), 200).unwrap();
                assert_eq!(p, exact);
            }
        }
    }

    #[test]
    fn progression_matches_pointwise() {
        let s = OddSum::<u128>::new(29, 64).unwrap();
        let prog = s.eval_progression(&BigInt::from(10), &BigUint::from(16u8), 20);
        for (i, v) in prog.iter().enumerate() {
            assert_eq!(*v, s.eval(&BigInt::from(10 + 16 * i as i64)));
        }
        let s = OddSum::<BigUint>::new(70, 100).unwrap();
        let prog = s.eval_progression(&BigInt::from(-7), &BigUint::from(32u8), 5);
        for (i, v) in prog.iter().enumerate() {
            assert_eq!(*v, s.eval(&BigInt::from(-7 + 32 * i as i64)));
        }
    }

    #[test]
    fn widths_agree() {
        for n in [3u64, 17, 40, 61] {
            for x in [-3i64, 0, 5, 1 << 40] {
                let x = BigInt::from(x);
                let a = eval_p_in::<BigUint>(n, &x, 30).unwrap();
                let b: TwoAdic = eval_p_in::<u128>(n, &x, 30).unwrap().convert().unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn truncated_argument() {
        let x = TwoAdic::<u64>::from_u64(123, 10).unwrap();
        assert_eq!(eval_p_truncated(5, &x).unwrap().prec(), 9);
        let x = TwoAdic::<u64>::from_u64(1, 1).unwrap();
        assert!(eval_p_truncated(5, &x).is_err());
        // Any lift of 14 mod 16 gives ν(P_23) = 4.
        for lift in [14u64, 30, 14 + (1 << 33)] {
            let x = TwoAdic::<u64>::from_u64(lift, 16).unwrap();
            assert_eq!(eval_p_truncated(23, &x).unwrap().valuation(), Valuation::Finite(4));
        }
    }

    #[test]
    fn t_and_stirling() {
        assert_eq!(eval_t(1, 5), BigUint::one());
        assert_eq!(eval_t(3, 1), BigUint::from(6u8));
        assert_eq!(stirling2(4, 2), BigUint::from(7u8));
        assert_eq!(stirling2(3, 5), BigUint::zero());
        let table = StirlingTable::new(30, 30);
        for x in 0..=30 {
            assert_eq!(*table.get(x, x), BigUint::one());
            for n in 0..=x {
                assert_eq!(*table.get(x, n), stirling2_alternating(x, n), "S({x},{n})");
            }
        }
    }

    #[test]
    fn phi_basics() {
        for n in 1..30u64 {
            let p = eval_phi(n, 0);
            assert_eq!(p.nu, Some(alpha(n as u128) as i64 - 1));
        }
        assert_eq!(eval_phi(2, 1).nu, None);
        assert_eq!(eval_phi(1, 3).nu, None);
        for n in 1..=40u64 {
            for s in 0..=60u64 {
                if let Some(v) = eval_phi(n, s).nu {
                    assert!(v >= s as i64 - (n / 2) as i64, "n={n} s={s}");
                    assert!(v >= 0);
                }
            }
        }
        let p = eval_phi(29, 16);
        let r: TwoAdic<u64> = p.residue(40).unwrap();
        let direct = rational_residue(&p.value(), 40).unwrap();
        assert_eq!(r.to_biguint(), direct.to_biguint());
    }

    #[test]
    fn allj_sums() {
        assert_eq!(eval_allj_sum(0, 0), BigRational::one());
        for d in 1..12u64 {
            for x in 0..d {
                let two = BigRational::from_integer(BigInt::from(2));
                assert_eq!(eval_allj_sum(d, x), two * eval_oddj_sum(d, x), "Δ={d} x={x}");
            }
            for x in d..d + 30 {
                let diff = eval_allj_sum(d, x) - eval_oddj_sum(d, x);
                if let Some(v) = nu_rational(&diff) {
                    assert!(v >= x as i64 - nu_factorial(d) as i64, "Δ={d} x={x}");
                }
            }
        }
    }

    #[test]
    fn u_factorials() {
        assert_eq!(u_factorial_pow2(1, 10).unwrap().to_biguint(), BigUint::one());
        for e in 1..=16u32 {
            for prec in [3u32, 9, 20, 64, 100] {
                let fast = u_factorial_pow2(e, prec).unwrap();
                let direct: BigUint = u_factorial_pow2_direct::<BigUint>(e, prec);
                assert_eq!(fast.to_biguint(), direct, "e={e} prec={prec}");
            }
        }
        for e in 3..=16u32 {
            let a = u_factorial_pow2(e - 1, e).unwrap();
            let b = u_factorial_pow2(e, e).unwrap();
            assert_eq!(a, b);
        }
        // U(2!) = 1 but U(4!) = 3.
        assert_ne!(u_factorial_pow2(1, 2).unwrap(), u_factorial_pow2(2, 2).unwrap());
        let u = u_2inf(13).unwrap();
        assert_eq!(u.backwards_binary(13).unwrap(), "1101000101101");
        // U(2^5!) = odd part of 32! directly.
        let f = factorial(32);
        let odd = &f >> f.trailing_zeros().unwrap();
        assert_eq!(u_factorial_pow2(5, 200).unwrap().to_biguint(), odd % (BigUint::one() << 200u32));
    }

    #[test]
    fn limit_function() {
        let one = eval_p_inf(1, 0, 30).unwrap();
        let u = u_2inf(30).unwrap();
        let two = TwoAdic::<BigUint>::from_u64(2, 30).unwrap();
        assert_eq!(one, two.div_unit(&u).unwrap());
        assert!(eval_p_inf(1, -1, 30).is_err());
        // Cauchy convergence at the predicted rate.
        for delta in 1..=5u64 {
            for x in 0..=12i64 {
                let lim = eval_p_inf(delta, x, 40).unwrap();
                for e in 10..=12u32 {
                    let n = (1u64 << e) + delta;
                    let p = eval_p(n, &BigInt::from(x), 40).unwrap();
                    let a = if x as u64 > delta { lg(x as u64 - delta).unwrap() as i64 + 1 } else { i64::MIN };
                    let b = lg(delta).unwrap() as i64 - 1;
                    let need = (e as i64 - a.max(b)).min(40);
                    assert!((&p - &lim).valuation().at_least(need as u64), "Δ={delta} x={x} e={e}");
                }
            }
        }
    }

    #[test]
    fn shared_exponent_sums() {
        let base = BigUint::from(123_457u64);
        let offsets = [1u64, 2, 2, 9, 31];
        let got = eval_p_shared(101, &base, &offsets, 50).unwrap();
        for (o, g) in offsets.iter().zip(&got) {
            let x = BigInt::from(123_457u64 + o);
            assert_eq!(*g, eval_p(101, &x, 50).unwrap());
        }
    }

    proptest! {
        #[test]
        fn periodicity(n in 1u64..64, x in 0i64..1 << 30, t in 0u32..=20) {
            let l = lg(n).unwrap();
            prop_assume!(t >= l);
            let a = eval_p(n, &BigInt::from(x), 40).unwrap();
            let b = eval_p(n, &BigInt::from(x + (1i64 << t)), 40).unwrap();
            prop_assert!((&a - &b).valuation().at_least((t + 1 - l) as u64));
        }
    }
}
