//! Machine words and big integers viewed as residues modulo `2^K`.
//!
//! Every routine in the crate that does modular arithmetic is generic over
//! [`Word`]. The fixed-width implementations (`u64`, `u128`) are used when the
//! working precision fits; [`BigUint`] handles everything else.

use std::fmt::Debug;

use num_bigint::BigUint;
use num_traits::{One, PrimInt, ToPrimitive, WrappingAdd, WrappingMul, WrappingSub, Zero};

/// A non-negative integer type that can hold residues modulo `2^K`.
///
/// All `*_mod` operations reduce their result modulo `2^bits`; `bits` must
/// not exceed [`Word::CAPACITY`] when that is `Some`.
pub trait Word: Clone + Debug + PartialEq + Zero + One + Send + Sync + 'static {
    /// Number of bits the type can hold, or `None` when unbounded.
    const CAPACITY: Option<u32>;

    fn from_u64(v: u64) -> Self;
    /// Residue of `v` modulo the capacity (no reduction for unbounded types).
    fn from_biguint(v: &BigUint) -> Self;
    fn to_biguint(&self) -> BigUint;

    /// Reduce `self` modulo `2^bits`.
    fn mask(&self, bits: u32) -> Self;
    fn add_mod(&self, rhs: &Self, bits: u32) -> Self;
    fn sub_mod(&self, rhs: &Self, bits: u32) -> Self;
    fn mul_mod(&self, rhs: &Self, bits: u32) -> Self;
    fn mul_small_mod(&self, k: u64, bits: u32) -> Self;
    fn shl_mod(&self, s: u32, bits: u32) -> Self;
    fn shr(&self, s: u32) -> Self;
    /// Index of the lowest set bit, `None` for zero.
    fn trailing_zeros(&self) -> Option<u32>;
    fn bit(&self, i: u32) -> bool;

    fn fits(bits: u32) -> bool {
        Self::CAPACITY.is_none_or(|c| bits <= c)
    }

    fn neg_mod(&self, bits: u32) -> Self {
        Self::zero().sub_mod(self, bits)
    }
}

/// Low `bits` bits set, for fixed-width primitive integers.
fn prim_mask<T: PrimInt>(bits: u32) -> T {
    let width = T::zero().count_zeros();
    if bits >= width {
        !T::zero()
    } else {
        (T::one() << bits as usize) - T::one()
    }
}

macro_rules! prim_word {
    ($t:ty) => {
        impl Word for $t {
            const CAPACITY: Option<u32> = Some(<$t>::BITS);

            fn from_u64(v: u64) -> Self {
                v as $t
            }

            fn from_biguint(v: &BigUint) -> Self {
                let digits = v.to_u64_digits();
                let mut out: $t = 0;
                for (i, d) in digits.iter().enumerate() {
                    let shift = 64 * i as u32;
                    if shift >= <$t>::BITS {
                        break;
                    }
                    out |= (*d as $t) << shift;
                }
                out
            }

            fn to_biguint(&self) -> BigUint {
                BigUint::from(*self)
            }

            fn mask(&self, bits: u32) -> Self {
                *self & prim_mask::<$t>(bits)
            }

            fn add_mod(&self, rhs: &Self, bits: u32) -> Self {
                WrappingAdd::wrapping_add(self, rhs) & prim_mask::<$t>(bits)
            }

            fn sub_mod(&self, rhs: &Self, bits: u32) -> Self {
                WrappingSub::wrapping_sub(self, rhs) & prim_mask::<$t>(bits)
            }

            fn mul_mod(&self, rhs: &Self, bits: u32) -> Self {
                WrappingMul::wrapping_mul(self, rhs) & prim_mask::<$t>(bits)
            }

            fn mul_small_mod(&self, k: u64, bits: u32) -> Self {
                WrappingMul::wrapping_mul(self, &(k as $t)) & prim_mask::<$t>(bits)
            }

            fn shl_mod(&self, s: u32, bits: u32) -> Self {
                if s >= <$t>::BITS {
                    0
                } else {
                    (*self << s) & prim_mask::<$t>(bits)
                }
            }

            fn shr(&self, s: u32) -> Self {
                if s >= <$t>::BITS {
                    0
                } else {
                    *self >> s
                }
            }

            fn trailing_zeros(&self) -> Option<u32> {
                if *self == 0 {
                    None
                } else {
                    Some(PrimInt::trailing_zeros(*self))
                }
            }

            fn bit(&self, i: u32) -> bool {
                i < <$t>::BITS && (*self >> i) & 1 == 1
            }
        }
    };
}

prim_word!(u64);
prim_word!(u128);

fn big_truncate(v: BigUint, bits: u32) -> BigUint {
    if v.bits() <= bits as u64 {
        return v;
    }
    let mut digits = v.to_u64_digits();
    let full = (bits / 64) as usize;
    let rem = bits % 64;
    if rem == 0 {
        digits.truncate(full);
    } else {
        digits.truncate(full + 1);
        digits[full] &= (1u64 << rem) - 1;
    }
    biguint_from_u64_digits(digits)
}

fn biguint_from_u64_digits(digits: Vec<u64>) -> BigUint {
    let mut u32s = Vec::with_capacity(digits.len() * 2);
    for d in digits {
        u32s.push(d as u32);
        u32s.push((d >> 32) as u32);
    }
    BigUint::new(u32s)
}

impl Word for BigUint {
    const CAPACITY: Option<u32> = None;

    fn from_u64(v: u64) -> Self {
        BigUint::from(v)
    }

    fn from_biguint(v: &BigUint) -> Self {
        v.clone()
    }

    fn to_biguint(&self) -> BigUint {
        self.clone()
    }

    fn mask(&self, bits: u32) -> Self {
        big_truncate(self.clone(), bits)
    }

    fn add_mod(&self, rhs: &Self, bits: u32) -> Self {
        big_truncate(self + rhs, bits)
    }

    fn sub_mod(&self, rhs: &Self, bits: u32) -> Self {
        if self >= rhs {
            big_truncate(self - rhs, bits)
        } else {
            let modulus = BigUint::one() << bits;
            let r = big_truncate(rhs - self, bits);
            if r.is_zero() {
                r
            } else {
                modulus - r
            }
        }
    }

    fn mul_mod(&self, rhs: &Self, bits: u32) -> Self {
        big_truncate(self * rhs, bits)
    }

    fn mul_small_mod(&self, k: u64, bits: u32) -> Self {
        big_truncate(self * k, bits)
    }

    fn shl_mod(&self, s: u32, bits: u32) -> Self {
        if s >= bits {
            return BigUint::zero();
        }
        big_truncate(self.mask(bits - s) << s, bits)
    }

    fn shr(&self, s: u32) -> Self {
        self >> s
    }

    fn trailing_zeros(&self) -> Option<u32> {
        BigUint::trailing_zeros(self).map(|t| t as u32)
    }

    fn bit(&self, i: u32) -> bool {
        BigUint::bit(self, i as u64)
    }
}

/// `base^exp mod 2^bits` by left-to-right square and multiply.
pub fn pow_mod_word<W: Word>(base: &W, exp: &BigUint, bits: u32) -> W {
    let base = base.mask(bits);
    let mut acc = W::one().mask(bits);
    for i in (0..exp.bits()).rev() {
        acc = acc.mul_mod(&acc, bits);
        if exp.bit(i) {
            acc = acc.mul_mod(&base, bits);
        }
    }
    acc
}

/// `base^exp mod 2^bits` for a machine-sized exponent.
pub fn pow_mod_word_u64<W: Word>(base: &W, exp: u64, bits: u32) -> W {
    let base = base.mask(bits);
    let mut acc = W::one().mask(bits);
    for i in (0..64 - exp.leading_zeros()).rev() {
        acc = acc.mul_mod(&acc, bits);
        if (exp >> i) & 1 == 1 {
            acc = acc.mul_mod(&base, bits);
        }
    }
    acc
}

/// Inverse of an odd residue modulo `2^bits` by Newton iteration.
///
/// Panics if `a` is even.
pub fn inverse_odd<W: Word>(a: &W, bits: u32) -> W {
    assert!(a.bit(0), "inverse_odd: even argument");
    let a = a.mask(bits);
    // x = a is correct to 3 bits for odd a.
    let mut x = a.clone();
    let mut good = 3u32;
    let two = W::from_u64(2);
    while good < bits {
        good = (2 * good).min(bits);
        let ax = a.mul_mod(&x, good);
        x = x.mul_mod(&two.sub_mod(&ax, good), good);
    }
    x.mask(bits)
}

/// Reduce a word to a `u64` when it fits, for diagnostics.
pub fn word_to_u64<W: Word>(w: &W) -> Option<u64> {
    w.to_biguint().to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_inverse<W: Word>(bits: u32) {
        for a in (1u64..200).step_by(2) {
            let w = W::from_u64(a);
            let inv = inverse_odd(&w, bits);
            assert_eq!(inv.mul_mod(&w, bits), W::one().mask(bits), "a={a} bits={bits}");
        }
    }

    #[test]
    fn inverses() {
        for bits in [1, 2, 3, 7, 63, 64] {
            check_inverse::<u64>(bits);
        }
        for bits in [65, 127, 128] {
            check_inverse::<u128>(bits);
        }
        for bits in [5, 200, 1000] {
            check_inverse::<BigUint>(bits);
        }
    }

    #[test]
    fn widths_agree() {
        let bits = 60;
        let a = 0x0123_4567_89ab_cdefu64;
        let b = 0x0fed_cba9_8765_4321u64;
        let x = a.mul_mod(&b, bits);
        let y = (a as u128).mul_mod(&(b as u128), bits);
        let z = BigUint::from(a).mul_mod(&BigUint::from(b), bits);
        assert_eq!(x as u128, y);
        assert_eq!(BigUint::from(x), z);
        assert_eq!(BigUint::from(3u8).sub_mod(&BigUint::from(5u8), 8), BigUint::from(254u8));
        assert_eq!(3u64.sub_mod(&5, 8), 254);
    }

    #[test]
    fn powers() {
        let e = BigUint::from(1_000_003u64);
        let p64 = pow_mod_word(&3u64, &e, 64);
        let pb = pow_mod_word(&BigUint::from(3u8), &e, 64);
        assert_eq!(BigUint::from(p64), pb);
        assert_eq!(pow_mod_word_u64(&3u64, 1_000_003, 64), p64);
        assert_eq!(BigUint::from_biguint(&(BigUint::one() << 70u32)), BigUint::one() << 70u32);
        assert_eq!(u64::from_biguint(&((BigUint::one() << 70u32) + 5u8)), 5);
    }
}
