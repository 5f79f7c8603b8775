//! Exact and truncated 2-adic arithmetic.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::word::{inverse_odd, pow_mod_word, Word};

/// 2-adic valuation of a nonzero integer.
pub fn nu(n: i128) -> Result<u32> {
    if n == 0 {
        Err(Error::ZeroInput)
    } else {
        Ok(n.trailing_zeros())
    }
}

pub fn nu_big(n: &BigInt) -> Result<u64> {
    n.trailing_zeros().ok_or(Error::ZeroInput)
}

/// Number of 1-bits.
pub fn alpha(n: u128) -> u32 {
    n.count_ones()
}

pub fn alpha_big(n: &BigUint) -> u64 {
    n.count_ones()
}

/// `ν(n!) = n − α(n)`.
pub fn nu_factorial(n: u64) -> u64 {
    n - n.count_ones() as u64
}

/// `ν C(m, k) = α(k) + α(m−k) − α(m)`.
pub fn nu_binomial(m: u128, k: u128) -> Result<u32> {
    if k > m {
        return Err(Error::BinomialRange { m: m.to_string(), k: k as u64 });
    }
    Ok(alpha(k) + alpha(m - k) - alpha(m))
}

pub fn nu_binomial_big(m: &BigUint, k: u64) -> Result<u64> {
    if *m < BigUint::from(k) {
        return Err(Error::BinomialRange { m: m.to_string(), k });
    }
    Ok(k.count_ones() as u64 + alpha_big(&(m - k)) - alpha_big(m))
}

/// `n / 2^ν(n)`, keeping the sign.
pub fn odd_part(n: i128) -> Result<i128> {
    Ok(n >> nu(n)?)
}

/// `[log2 n]`, or `None` for `n = 0`.
pub fn lg(n: u64) -> Option<u32> {
    (n != 0).then(|| 63 - n.leading_zeros())
}

pub fn lg_big(n: &BigUint) -> Option<u64> {
    (!n.is_zero()).then(|| n.bits() - 1)
}

/// Residue of a signed integer modulo `2^bits` (two's complement).
pub fn reduce_signed<W: Word>(x: &BigInt, bits: u32) -> W {
    let mag = W::from_biguint(&x.magnitude().clone()).mask(bits);
    if x.sign() == Sign::Minus {
        mag.neg_mod(bits)
    } else {
        mag
    }
}

/// `base^exp mod 2^prec`, with negative exponents through the inverse of an
/// odd base.
pub fn pow_mod(base: &BigInt, exp: &BigInt, prec: u32) -> Result<TwoAdic> {
    pow_mod_in::<BigUint>(base, exp, prec)
}

pub fn pow_mod_in<W: Word>(base: &BigInt, exp: &BigInt, prec: u32) -> Result<TwoAdic<W>> {
    check_capacity::<W>(prec)?;
    let b: W = reduce_signed(base, prec);
    let residue = if exp.is_negative() {
        if base.is_zero() || base.trailing_zeros() != Some(0) {
            return Err(Error::EvenBaseNegativeExponent(base.to_string()));
        }
        let inv = inverse_odd(&b, prec);
        pow_mod_word(&inv, exp.magnitude(), prec)
    } else {
        pow_mod_word(&b, exp.magnitude(), prec)
    };
    TwoAdic::new(residue, prec)
}

/// `C(m, k)` split into its exact valuation and the odd unit modulo `2^bits`.
///
/// Returns `None` when `k > m` (the binomial vanishes).
pub fn binomial_unit<W: Word>(m: &BigUint, k: u64, bits: u32) -> Option<(u64, W)> {
    if *m < BigUint::from(k) {
        return None;
    }
    let mut nu_total: i64 = 0;
    let mut num = W::one().mask(bits);
    let mut den = W::one().mask(bits);
    for i in 0..k {
        let factor = m - i;
        let tz = factor.trailing_zeros().unwrap_or(0);
        nu_total += tz as i64;
        let odd: W = W::from_biguint(&(factor >> tz));
        num = num.mul_mod(&odd, bits);
        let d = i + 1;
        let dz = d.trailing_zeros();
        nu_total -= dz as i64;
        den = den.mul_mod(&W::from_u64(d >> dz), bits);
    }
    let unit = num.mul_mod(&inverse_odd(&den, bits), bits);
    Some((nu_total as u64, unit))
}

/// Exact valuation and residue of `C(m, k)` modulo `2^prec`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinomialMod {
    pub value: TwoAdic,
    /// `None` when the binomial is zero.
    pub nu: Option<u64>,
}

pub fn binomial_mod(m: &BigUint, k: u64, prec: u32) -> Result<BinomialMod> {
    if prec == 0 {
        return Err(Error::ZeroPrecision);
    }
    match binomial_unit::<BigUint>(m, k, prec) {
        None => Ok(BinomialMod { value: TwoAdic::zero(prec), nu: None }),
        Some((v, unit)) => {
            let residue = unit.shl_mod(v.min(prec as u64) as u32, prec);
            Ok(BinomialMod { value: TwoAdic::new(residue, prec)?, nu: Some(v) })
        }
    }
}

fn check_capacity<W: Word>(prec: u32) -> Result<()> {
    if prec == 0 {
        return Err(Error::ZeroPrecision);
    }
    match W::CAPACITY {
        Some(c) if prec > c => Err(Error::Capacity { prec, capacity: c }),
        _ => Ok(()),
    }
}

/// 2-adic valuation of a truncated value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Finite(u64),
    /// Every known bit is zero; the true valuation is at least this.
    AtLeast(u64),
}

impl Valuation {
    pub fn finite(self) -> Option<u64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Valuation::Finite(_))
    }

    /// The guaranteed lower bound.
    pub fn lower_bound(self) -> u64 {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => v,
        }
    }

    /// True when the valuation is certainly `>= b`.
    pub fn at_least(self, b: u64) -> bool {
        self.lower_bound() >= b
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeast(b) => write!(f, ">={b}"),
        }
    }
}

/// A 2-adic integer known modulo `2^prec`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoAdic<W: Word = BigUint> {
    residue: W,
    prec: u32,
}

impl<W: Word> TwoAdic<W> {
    /// Reduces `residue` modulo `2^prec`.
    pub fn new(residue: W, prec: u32) -> Result<Self> {
        check_capacity::<W>(prec)?;
        Ok(TwoAdic { residue: residue.mask(prec), prec })
    }

    pub fn zero(prec: u32) -> Self {
        TwoAdic { residue: W::zero(), prec }
    }

    pub fn from_int(x: &BigInt, prec: u32) -> Result<Self> {
        check_capacity::<W>(prec)?;
        Ok(TwoAdic { residue: reduce_signed(x, prec), prec })
    }

    pub fn from_u64(x: u64, prec: u32) -> Result<Self> {
        Self::new(W::from_u64(x), prec)
    }

    pub fn residue(&self) -> &W {
        &self.residue
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn to_biguint(&self) -> BigUint {
        self.residue.to_biguint()
    }

    pub fn valuation(&self) -> Valuation {
        match self.residue.trailing_zeros() {
            Some(v) => Valuation::Finite(v as u64),
            None => Valuation::AtLeast(self.prec as u64),
        }
    }

    /// Drop to a lower precision.
    pub fn truncate(&self, prec: u32) -> Result<Self> {
        if prec > self.prec {
            return Err(Error::BitsExceedPrecision { bits: prec, prec: self.prec });
        }
        Self::new(self.residue.clone(), prec)
    }

    pub fn neg(&self) -> Self {
        TwoAdic { residue: self.residue.neg_mod(self.prec), prec: self.prec }
    }

    /// Multiply by the inverse of an odd value.
    pub fn div_unit(&self, unit: &Self) -> Result<Self> {
        if !unit.residue.bit(0) {
            return Err(Error::InvalidArgument("divisor is not a unit".into()));
        }
        let prec = self.prec.min(unit.prec);
        let inv = inverse_odd(&unit.residue, prec);
        Self::new(self.residue.mul_mod(&inv, prec), prec)
    }

    /// Exact division by `2^k`; the low `k` bits must vanish. Precision drops by `k`.
    pub fn div_pow2(&self, k: u32) -> Result<Self> {
        if k >= self.prec {
            return Err(Error::BitsExceedPrecision { bits: k + 1, prec: self.prec });
        }
        if !self.residue.mask(k).is_zero() {
            return Err(Error::InvalidArgument(format!("value not divisible by 2^{k}")));
        }
        Self::new(self.residue.shr(k), self.prec - k)
    }

    pub fn convert<V: Word>(&self) -> Result<TwoAdic<V>> {
        TwoAdic::new(V::from_biguint(&self.residue.to_biguint()), self.prec)
    }

    pub fn residue_hex(&self) -> String {
        self.to_biguint().to_str_radix(16)
    }

    /// Low-order bit first.
    pub fn backwards_binary(&self, bits: u32) -> Result<String> {
        if bits > self.prec {
            return Err(Error::BitsExceedPrecision { bits, prec: self.prec });
        }
        Ok((0..bits).map(|i| if self.residue.bit(i) { '1' } else { '0' }).collect())
    }

    /// Inverse of [`TwoAdic::backwards_binary`].
    pub fn parse_backwards_binary(s: &str) -> Result<Self> {
        let prec = s.chars().count() as u32;
        check_capacity::<W>(prec)?;
        let mut r = BigUint::zero();
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => r.set_bit(i as u64, true),
                other => return Err(Error::InvalidDigit(other)),
            }
        }
        Self::new(W::from_biguint(&r), prec)
    }
}

pub fn valuation_of<W: Word>(z: &TwoAdic<W>) -> Valuation {
    z.valuation()
}

pub fn backwards_binary<W: Word>(z: &TwoAdic<W>, bits: u32) -> Result<String> {
    z.backwards_binary(bits)
}

impl<W: Word> Add for &TwoAdic<W> {
    type Output = TwoAdic<W>;
    fn add(self, rhs: Self) -> TwoAdic<W> {
        let prec = self.prec.min(rhs.prec);
        TwoAdic { residue: self.residue.add_mod(&rhs.residue, prec), prec }
    }
}

impl<W: Word> Sub for &TwoAdic<W> {
    type Output = TwoAdic<W>;
    fn sub(self, rhs: Self) -> TwoAdic<W> {
        let prec = self.prec.min(rhs.prec);
        TwoAdic { residue: self.residue.sub_mod(&rhs.residue, prec), prec }
    }
}

impl<W: Word> Mul for &TwoAdic<W> {
    type Output = TwoAdic<W>;
    /// The product is known to `min(prec_a + ν(b), prec_b + ν(a))` bits, capped by
    /// the storage width; the conservative `min(prec_a, prec_b)` is used.
    fn mul(self, rhs: Self) -> TwoAdic<W> {
        let prec = self.prec.min(rhs.prec);
        TwoAdic { residue: self.residue.mul_mod(&rhs.residue, prec), prec }
    }
}

impl<W: Word> fmt::Display for TwoAdic<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{} (mod 2^{})", self.residue_hex(), self.prec)
    }
}

#[derive(Serialize, Deserialize)]
struct TwoAdicRepr {
    residue_hex: String,
    prec: u32,
}

impl<W: Word> Serialize for TwoAdic<W> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TwoAdicRepr { residue_hex: self.residue_hex(), prec: self.prec }.serialize(s)
    }
}

impl<'de, W: Word> Deserialize<'de> for TwoAdic<W> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = TwoAdicRepr::deserialize(d)?;
        let r = BigUint::parse_bytes(repr.residue_hex.as_bytes(), 16)
            .ok_or_else(|| serde::de::Error::custom("bad residue_hex"))?;
        TwoAdic::new(W::from_biguint(&r), repr.prec).map_err(serde::de::Error::custom)
    }
}

/// Parse a hexadecimal residue as written in atlas files.
pub fn parse_hex(s: &str) -> Result<BigUint> {
    BigUint::parse_bytes(s.as_bytes(), 16).ok_or_else(|| Error::Parse(format!("bad hex {s:?}")))
}

/// Exact big integer to `i128` when it fits, for small diagnostics.
pub fn small(x: &BigInt) -> Option<i128> {
    x.to_i128()
}

/// `2^k` as a big integer.
pub fn pow2(k: u64) -> BigUint {
    BigUint::one() << k
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;
    use proptest::prelude::*;

    fn exact_binomial(m: u64, k: u64) -> BigUint {
        let mut c = BigUint::one();
        for i in 0..k {
            c = c * (m - i) / (i + 1);
        }
        c
    }

    #[test]
    fn elementary() {
        assert_eq!(nu(12).unwrap(), 2);
        assert_eq!(nu(1).unwrap(), 0);
        assert_eq!(nu(1 << 30).unwrap(), 30);
        assert_eq!(nu(0), Err(Error::ZeroInput));
        assert_eq!(alpha(13), 3);
        assert_eq!(alpha(0), 0);
        assert_eq!(alpha(1 << 77), 1);
        assert_eq!(nu_factorial(8), 7);
        assert_eq!(nu_binomial(5, 2).unwrap(), 1);
        assert!(nu_binomial(2, 5).is_err());
        assert_eq!(odd_part(12).unwrap(), 3);
        assert_eq!(odd_part(7).unwrap(), 7);
        assert_eq!(odd_part(-8).unwrap(), -1);
        assert_eq!(lg(1), Some(0));
        assert_eq!(lg(31), Some(4));
        assert_eq!(lg(0), None);
    }

    #[test]
    fn nu_binomial_matches_exact() {
        for m in 0..=256u64 {
            let mut c = BigUint::one();
            for k in 0..=m {
                let v = c.trailing_zeros().unwrap();
                assert_eq!(nu_binomial(m as u128, k as u128).unwrap() as u64, v, "C({m},{k})");
                c = c * (m - k) / (k + 1);
            }
        }
    }

    #[test]
    fn pow_mod_examples() {
        let p = |b: i64, e: i64, prec| pow_mod(&BigInt::from(b), &BigInt::from(e), prec).unwrap();
        assert_eq!(p(3, 4, 8).to_biguint(), BigUint::from(81u8));
        assert_eq!(p(3, -1, 5).to_biguint(), BigUint::from(11u8));
        assert!(pow_mod(&BigInt::from(2), &BigInt::from(-1), 8).is_err());
        assert_eq!(p(-1, 3, 8).to_biguint(), BigUint::from(255u8));
        // Lifting the exponent: j^(2^t) = 1 mod 2^(t+2).
        for j in (1..64i64).step_by(2) {
            for t in 1..=10u32 {
                let r = p(j, 1 << t, t + 2);
                assert_eq!(r.to_biguint(), BigUint::one(), "j={j} t={t}");
            }
        }
    }

    #[test]
    fn binomial_mod_examples() {
        let b = binomial_mod(&BigUint::from(10u8), 3, 16).unwrap();
        assert_eq!(b.value.to_biguint(), BigUint::from(120u8));
        assert_eq!(b.nu, Some(3));
        let b = binomial_mod(&BigUint::from(12345u32), 0, 9).unwrap();
        assert_eq!(b.value.to_biguint(), BigUint::one());
        assert_eq!(b.nu, Some(0));
        let b = binomial_mod(&BigUint::from(3u8), 5, 9).unwrap();
        assert_eq!(b.nu, None);
    }

    #[test]
    fn valuation_and_binary() {
        let z = TwoAdic::<BigUint>::from_u64(40, 12).unwrap();
        assert_eq!(z.valuation(), Valuation::Finite(3));
        let z = TwoAdic::<BigUint>::from_u64(0, 12).unwrap();
        assert_eq!(z.valuation(), Valuation::AtLeast(12));
        assert!(z.backwards_binary(13).is_err());
        let z = TwoAdic::<u64>::from_u64(0b1011, 6).unwrap();
        assert_eq!(z.backwards_binary(6).unwrap(), "110100");
        assert!(TwoAdic::<u64>::parse_backwards_binary("10x").is_err());
        assert!(TwoAdic::<u64>::new(1, 65).is_err());
    }

    #[test]
    fn serde_roundtrip() {
        let z = TwoAdic::<BigUint>::from_u64(0xbeef, 20).unwrap();
        let s = serde_json::to_string(&z).unwrap();
        assert_eq!(s, r#"{"residue_hex":"beef","prec":20}"#);
        let back: TwoAdic = serde_json::from_str(&s).unwrap();
        assert_eq!(back, z);
    }

    proptest! {
        #[test]
        fn binomial_mod_matches_exact(m in 0u64..u64::MAX, k in 0u64..=40, prec in 1u32..200) {
            let k = k.min(m);
            let exact = exact_binomial(m, k);
            let got = binomial_mod(&BigUint::from(m), k, prec).unwrap();
            prop_assert_eq!(got.value.to_biguint(), &exact % pow2(prec as u64));
            prop_assert_eq!(got.nu, exact.trailing_zeros());
        }

        #[test]
        fn product_valuation(a in 1u64..1 << 40, b in 1u64..1 << 20) {
            let x = TwoAdic::<u128>::from_u64(a, 100).unwrap();
            let y = TwoAdic::<u128>::from_u64(b, 100).unwrap();
            let va = a.trailing_zeros() as u64;
            let vb = b.trailing_zeros() as u64;
            prop_assert_eq!((&x * &y).valuation(), Valuation::Finite(va + vb));
        }

        #[test]
        fn pow_mod_exponent_split(j in 0i64..1000, x in 0i64..10_000, t in 0u32..30, prec in 1u32..150) {
            let j = 2 * j + 1;
            let lhs = pow_mod(&BigInt::from(j), &BigInt::from(x + (1i64 << t)), prec).unwrap();
            let a = pow_mod(&BigInt::from(j), &BigInt::from(x), prec).unwrap();
            let b = pow_mod(&BigInt::from(j), &BigInt::from(1i64 << t), prec).unwrap();
            prop_assert_eq!(lhs, &a * &b);
        }

        #[test]
        fn negative_powers_invert(j in 0i64..10_000, x in 1i64..500, prec in 1u32..130) {
            let j = 2 * j + 1;
            let a = pow_mod(&BigInt::from(j), &BigInt::from(x), prec).unwrap();
            let b = pow_mod(&BigInt::from(j), &BigInt::from(-x), prec).unwrap();
            prop_assert_eq!((&a * &b).to_biguint(), BigUint::one() % pow2(prec as u64));
        }

        #[test]
        fn backwards_binary_roundtrip(r in any::<u64>(), bits in 1u32..=64) {
            let z = TwoAdic::<u64>::new(r, 64).unwrap();
            let s = z.backwards_binary(bits).unwrap();
            let back = TwoAdic::<u64>::parse_backwards_binary(&s).unwrap();
            prop_assert_eq!(*back.residue(), r.mask(bits));
        }

        #[test]
        fn signed_reduction(x in any::<i64>(), prec in 1u32..=64) {
            let z = TwoAdic::<u64>::from_int(&BigInt::from(x), prec).unwrap();
            let m = 1i128 << prec;
            prop_assert_eq!(*z.residue() as i128, (x as i128).mod_floor(&m));
        }
    }
}
