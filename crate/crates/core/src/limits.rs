//! Behavior of `P_{2^e+Δ}` as `e → ∞`: the congruence with the all-`j` sum, the
//! `z_n` limit table, and the two conjectures on eventually periodic arguments.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::dyadic::{lg, lg_big, TwoAdic, Valuation};
use crate::error::{Error, Result};
use crate::golden::LimitRow;
use crate::kernel::{eval_allj_sum, eval_p_shared, nu_rational, rational_residue, u_factorial_pow2};
use crate::verify::report::{Report, Tally};

/// A 2-adic integer whose bits repeat with period `d` from bit `i0` on, truncated
/// to `len` bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepeatingArgument {
    pub period: u32,
    pub start: u32,
    /// Bits below `start`.
    pub prefix: u64,
    /// Bit `k` is `x_{start+k}`.
    pub block: u64,
    pub len: u32,
}

impl RepeatingArgument {
    pub fn new(period: u32, start: u32, prefix: u64, block: u64, len: u32) -> Result<Self> {
        if !(2..=63).contains(&period) {
            return Err(Error::InvalidArgument(format!("period {period} outside 2..=63")));
        }
        if start > 63 || prefix >> start != 0 {
            return Err(Error::InvalidArgument("prefix does not fit below the start bit".into()));
        }
        if block >> period != 0 {
            return Err(Error::InvalidArgument("block wider than the period".into()));
        }
        Ok(RepeatingArgument { period, start, prefix, block, len })
    }

    /// Shortest truncation of at least `min_len` bits whose top bit is set.
    pub fn with_min_len(period: u32, start: u32, prefix: u64, block: u64, min_len: u32) -> Result<Self> {
        let mut x = RepeatingArgument::new(period, start, prefix, block, min_len)?;
        if block == 0 {
            return Err(Error::InvalidArgument("block is all zeros".into()));
        }
        while !x.bit(x.len.saturating_sub(1)) {
            x.len += 1;
        }
        Ok(x)
    }

    /// `x_i` of the untruncated pattern.
    pub fn bit(&self, i: u32) -> bool {
        if i < self.start {
            self.prefix >> i & 1 == 1
        } else {
            self.block >> ((i - self.start) % self.period) & 1 == 1
        }
    }

    /// `x[n] = Σ_{i ≤ n} x_i 2^i`.
    pub fn truncation(&self, n: u32) -> BigUint {
        let mut v = BigUint::zero();
        for i in (0..=n).filter(|&i| self.bit(i)) {
            v.set_bit(i as u64, true);
        }
        v
    }

    pub fn value(&self) -> BigUint {
        match self.len {
            0 => BigUint::zero(),
            l => self.truncation(l - 1),
        }
    }

    /// `R(x) = lg(x) + 1 − (i0 + d)`.
    pub fn repeating_bits(&self) -> i64 {
        repeating_bits(&self.value(), self.start, self.period)
    }
}

/// `R(x) = lg(x) + 1 − (i0 + d)`, with `lg(0) = −1`.
pub fn repeating_bits(x: &BigUint, i0: u32, d: u32) -> i64 {
    lg_big(x).map_or(-1, |l| l as i64) + 1 - (i0 + d) as i64
}

/// `x_{i+d} = x_i` for every `i ≥ i0` with `2^(i+d) ≤ x`.
pub fn repeats(x: &BigUint, i0: u32, d: u32) -> bool {
    let Some(top) = lg_big(x) else { return true };
    (i0 as u64..).take_while(|&i| i + d as u64 <= top).all(|i| x.bit(i) == x.bit(i + d as u64))
}

/// `2^v q` for a rational of nonnegative valuation, modulo `2^prec`.
fn integral_residue(q: &BigRational, prec: u32) -> Result<TwoAdic> {
    let Some(v) = nu_rational(q) else { return Ok(TwoAdic::zero(prec)) };
    if v < 0 {
        return Err(Error::InvalidArgument(format!("valuation {v} is negative")));
    }
    let num = q.numer() >> v as usize;
    let den = q.denom() >> q.denom().trailing_zeros().unwrap_or(0) as usize;
    let unit = rational_residue(&BigRational::new(num, den), prec)?;
    Ok(&unit * &TwoAdic::new(BigUint::one() << v as u64, prec)?)
}

/// `e − max(lg(x−Δ)+1, lg(Δ)−1)`, each term dropped when its argument is not
/// positive; `None` when both are dropped and the congruence is an equality.
pub fn delthm_bound(e: u32, delta: u64, x: u64) -> Option<i64> {
    let a = x.checked_sub(delta).and_then(lg).map(|l| l as i64 + 1);
    let b = lg(delta).map(|l| l as i64 - 1);
    a.into_iter().chain(b).max().map(|m| e as i64 - m)
}

/// `(1/U(2^e!)) (1/Δ!) Σ_{j=0}^{Δ} C(Δ,j) j^x` modulo `2^prec`.
pub fn delthm_rhs(e: u32, delta: u64, x: u64, prec: u32) -> Result<TwoAdic> {
    let sum = integral_residue(&eval_allj_sum(delta, x), prec)?;
    let u = u_factorial_pow2(e, prec)?;
    sum.div_unit(&u)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelthmOutcome {
    pub e: u32,
    pub delta: u64,
    pub x: u64,
    /// `None` for exact equality.
    pub bound: Option<i64>,
    pub achieved: Valuation,
    pub ok: bool,
}

const DELTHM_SLACK: u32 = 24;

/// The congruence at `x = 0..=x_max` for one `(e, Δ)`.
pub fn check_delthm_range(e: u32, delta: u64, x_max: u64) -> Result<Vec<DelthmOutcome>> {
    if e == 0 || delta >= 1 << e {
        return Err(Error::InvalidArgument(format!("need e >= 1 and Δ < 2^e, got e={e} Δ={delta}")));
    }
    let prec = e + DELTHM_SLACK;
    let n = (1u64 << e) + delta;
    let offsets: Vec<u64> = (0..=x_max).collect();
    let lhs = eval_p_shared(n, &BigUint::zero(), &offsets, prec)?;
    let mut out = Vec::with_capacity(lhs.len());
    for (x, l) in (0..=x_max).zip(lhs) {
        let r = delthm_rhs(e, delta, x, prec)?;
        let achieved = (&l - &r).valuation();
        let bound = delthm_bound(e, delta, x);
        let ok = match bound {
            None => achieved.at_least(prec as u64),
            Some(b) => b <= 0 || achieved.at_least(b as u64),
        };
        out.push(DelthmOutcome { e, delta, x, bound, achieved, ok });
    }
    Ok(out)
}

pub fn check_delthm(e: u32, delta: u64, x: u64) -> Result<DelthmOutcome> {
    let mut v = check_delthm_range(e, delta, x)?;
    Ok(v.pop().expect("x_max + 1 outcomes"))
}

/// Every `1 ≤ e ≤ e_max`, `Δ < min(2^e, delta_cap)`, `x ≤ x_max`.
pub fn verify_delthm(e_max: u32, delta_cap: u64, x_max: u64) -> Report {
    let mut report = Report::new();
    let mut t = Tally::new(&mut report, "delthm", format!("e<={e_max} delta<min(2^e,{delta_cap}) x<={x_max}"));
    for e in 1..=e_max {
        for delta in 0..delta_cap.min(1 << e) {
            match check_delthm_range(e, delta, x_max) {
                Ok(rows) => {
                    for r in rows {
                        t.case(r.ok, || format!("e={e} delta={delta} x={}: nu {}, bound {:?}", r.x, r.achieved, r.bound));
                    }
                }
                Err(err) => t.case(false, || format!("e={e} delta={delta}: {err}")),
            }
        }
    }
    t.finish();
    report
}

/// `z_n = 3 Σ_{i ≤ n} 8^i`.
pub fn z_n(n: u32) -> BigUint {
    (0..=n).fold(BigUint::zero(), |acc, i| acc + (BigUint::from(3u8) << (3 * i)))
}

/// Smallest `n` with `P_{2^e+1}(z_m) ≡ P_{2^e+1}(z_n) mod 2^bits` for all `m ≥ n`:
/// consecutive `z` differ by `3·8^(n+1)`, which moves the value by at least
/// `2^(3(n+1)+1−e)`.
pub fn stable_n(e: u32, bits: u32) -> u32 {
    (0..).find(|&n| 3 * (n + 1) + 1 >= bits + e).expect("unbounded search")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table1Row {
    pub e: u32,
    /// The `n` the value was computed at.
    pub n: u32,
    pub value: TwoAdic,
    /// `ν(P_{2^e+1}(z_n) − P_{2^(e−3)+1}(z_n))` for `e ≥ 4`.
    pub diff: Option<Valuation>,
}

impl Table1Row {
    pub fn bits(&self, bits: u32) -> String {
        self.value.backwards_binary(bits).expect("bits within precision")
    }
}

const TABLE1_GUARD: u32 = 4;

fn p_at(n: u64, z: &BigUint, prec: u32) -> Result<TwoAdic> {
    Ok(eval_p_shared(n, z, &[0], prec)?.remove(0))
}

/// `P_{2^e+1}(z_n)` to `bits + 4` bits at an `n` past stabilization, with the
/// difference column.
pub fn table1(e_range: impl IntoIterator<Item = u32>, bits: u32) -> Result<Vec<Table1Row>> {
    let prec = bits + TABLE1_GUARD;
    e_range
        .into_iter()
        .map(|e| {
            let n = stable_n(e, prec);
            let z = z_n(n);
            let value = p_at((1 << e) + 1, &z, prec)?;
            let diff = match e {
                0..=3 => None,
                _ => Some((&value - &p_at((1 << (e - 3)) + 1, &z, prec)?).valuation()),
            };
            Ok(Table1Row { e, n, value, diff })
        })
        .collect()
}

/// Aligned text: `e`, backwards binary, `n`, difference valuation.
pub fn format_table1(rows: &[Table1Row], bits: u32) -> String {
    let mut s = String::new();
    writeln!(s, "{:>3}  {:<w$}  {:>3}  diff", "e", "P_{2^e+1}(z_n)", "n", w = bits as usize + 3).unwrap();
    for r in rows {
        let diff = r.diff.map_or("-".to_string(), |d| d.to_string());
        writeln!(s, "{:>3}  {:<w$}  {:>3}  {diff}", r.e, format!("{}...", r.bits(bits)), r.n, w = bits as usize + 3).unwrap();
    }
    s
}

/// Compare against reference rows: `table1.bits` per row and `table1.diff` where a
/// difference is listed. Rows whose listed `n0` falls below the stabilization
/// point note whether the value at `n0` already agrees.
pub fn compare_table1(rows: &[Table1Row], golden: &[LimitRow]) -> Report {
    let mut report = Report::new();
    for g in golden {
        let params = format!("e={}", g.e);
        let bits = g.bits.len() as u32;
        let Some(r) = rows.iter().find(|r| r.e == g.e) else {
            report.fail("table1.bits", params, "row not computed");
            continue;
        };
        let got = r.bits(bits);
        let mut detail = format!("{got} at n={}", r.n);
        if g.n0 < stable_n(g.e, bits) {
            let at_n0 = p_at((1 << g.e) + 1, &z_n(g.n0), bits).map(|v| v.backwards_binary(bits).expect("bits"));
            match at_n0 {
                Ok(b) if b == got => write!(detail, "; agrees from listed n0={}", g.n0).unwrap(),
                Ok(b) => write!(detail, "; at listed n0={} the value is {b}", g.n0).unwrap(),
                Err(e) => write!(detail, "; n0 evaluation failed: {e}").unwrap(),
            }
        }
        report.push("table1.bits", params.clone(), got == g.bits, detail);
        if let Some(want) = g.diff {
            let ok = r.diff.and_then(Valuation::finite) == Some(want);
            report.push("table1.diff", params, ok, format!("nu {:?}, expected {want}", r.diff));
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjStatus {
    Pass,
    Fail,
    PreconditionNotMet(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecconjOutcome {
    pub x: BigUint,
    pub bound: i64,
    pub achieved: Valuation,
    pub status: ConjStatus,
}

impl SpecconjOutcome {
    /// Achieved valuation minus the bound.
    pub fn margin(&self) -> i64 {
        self.achieved.lower_bound() as i64 - self.bound
    }
}

const SPECCONJ_SLACK: u32 = 8;

fn specconj_precondition(i0: u32, d: u32, e: u32, x: &BigUint) -> Option<String> {
    if d < 1 || i0 < 1 {
        return Some("i0 and d must be positive".into());
    }
    if x.bit(i0 as u64) {
        return Some(format!("bit {i0} is set"));
    }
    if !repeats(x, i0, d) {
        return Some(format!("bits do not repeat with period {d} from bit {i0}"));
    }
    let need = 2 * (e as i64 - i0 as i64) - 1;
    let r = repeating_bits(x, i0, d);
    (r < need).then(|| format!("R(x) = {r} < {need}"))
}

/// `ν(P_{2^(e+d)+1}(x+1) − P_{2^e+1}(x+1)) ≥ e − i0` at each `x`, all of which
/// must share the bits above `i0`. Both sides are computed to `e − i0 + 8` bits.
pub fn check_specconj_batch(i0: u32, d: u32, e: u32, xs: &[BigUint]) -> Result<Vec<SpecconjOutcome>> {
    let bound = e as i64 - i0 as i64;
    let prec = (bound.max(0) as u32) + SPECCONJ_SLACK;
    let low_mask = (BigUint::one() << i0) - 1u8;
    let mut outcomes: Vec<Option<SpecconjOutcome>> = vec![None; xs.len()];
    let mut live: Vec<(usize, u64)> = Vec::new();
    let mut high: Option<BigUint> = None;
    for (i, x) in xs.iter().enumerate() {
        if let Some(why) = specconj_precondition(i0, d, e, x) {
            let status = ConjStatus::PreconditionNotMet(why);
            outcomes[i] = Some(SpecconjOutcome { x: x.clone(), bound, achieved: Valuation::AtLeast(0), status });
            continue;
        }
        let h = x - (x & &low_mask);
        if high.get_or_insert_with(|| h.clone()) != &h {
            return Err(Error::InvalidArgument("batch arguments differ above bit i0".into()));
        }
        let low = (x & &low_mask).iter_u64_digits().next().unwrap_or(0);
        live.push((i, low));
    }
    if let Some(high) = high {
        live.sort_by_key(|&(_, low)| low);
        let offsets: Vec<u64> = live.iter().map(|&(_, low)| low).collect();
        let base = high + 1u8;
        let big = eval_p_shared((1 << (e + d)) + 1, &base, &offsets, prec)?;
        let small = eval_p_shared((1 << e) + 1, &base, &offsets, prec)?;
        for ((&(i, _), a), b) in live.iter().zip(&big).zip(&small) {
            let achieved = (a - b).valuation();
            let ok = bound <= 0 || achieved.at_least(bound as u64);
            let status = if ok { ConjStatus::Pass } else { ConjStatus::Fail };
            outcomes[i] = Some(SpecconjOutcome { x: xs[i].clone(), bound, achieved, status });
        }
    }
    Ok(outcomes.into_iter().map(|o| o.expect("every x classified")).collect())
}

pub fn check_specconj(i0: u32, d: u32, e: u32, x: &RepeatingArgument) -> Result<SpecconjOutcome> {
    Ok(check_specconj_batch(i0, d, e, &[x.value()])?.remove(0))
}

/// Block `0 1 1 … 1` of width `d`.
pub fn default_block(d: u32) -> u64 {
    ((1u64 << d) - 1) & !1
}

/// Arguments for one grid point: the given low residues under block `0 1…1`,
/// truncated at `2(e + d) − i0 + 8` bits or just past it.
pub fn specconj_arguments(i0: u32, d: u32, e: u32, residues: &[u64]) -> Result<Vec<RepeatingArgument>> {
    let min_len = (2 * (e + d) + SPECCONJ_SLACK).saturating_sub(i0);
    residues
        .iter()
        .map(|&r| RepeatingArgument::with_min_len(d, i0, r, default_block(d), min_len))
        .collect()
}

/// `count` residues below `2^i0` spread over both parities.
pub fn spread_residues(i0: u32, count: usize) -> Vec<u64> {
    let top = 1u64 << i0;
    let step = (top / count.max(1) as u64).max(1);
    (0..count as u64).map(|k| (k * step + k % 2) % top).collect::<std::collections::BTreeSet<_>>().into_iter().collect()
}

/// The grid over `d_range × e_range` at `residues` per point.
pub fn verify_specconj_grid(
    i0: u32,
    d_range: std::ops::RangeInclusive<u32>,
    e_range: std::ops::RangeInclusive<u32>,
    residues: &[u64],
) -> Report {
    let mut report = Report::new();
    let params = format!("i0={i0} d={d_range:?} e={e_range:?} residues={}", residues.len());
    let mut min_margin: Option<i64> = None;
    let mut t = Tally::new(&mut report, "specconj", params.clone());
    for d in d_range {
        for e in e_range.clone() {
            let outcomes = specconj_arguments(i0, d, e, residues)
                .and_then(|xs| check_specconj_batch(i0, d, e, &xs.iter().map(|x| x.value()).collect::<Vec<_>>()));
            match outcomes {
                Ok(outcomes) => {
                    for o in outcomes {
                        if o.status == ConjStatus::Pass {
                            min_margin = Some(min_margin.map_or(o.margin(), |m| m.min(o.margin())));
                        }
                        t.case(o.status == ConjStatus::Pass, || {
                            format!("d={d} e={e} x={}: {:?}, nu {}, bound {}", o.x, o.status, o.achieved, o.bound)
                        });
                    }
                }
                Err(err) => t.case(false, || format!("d={d} e={e}: {err}")),
            }
        }
    }
    t.finish();
    report.pass("specconj.margin", params, format!("smallest margin {min_margin:?}"));
    report
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DconjReport {
    /// Truncation index: the argument is `x[n]`.
    pub n: u32,
    pub es: Vec<u32>,
    /// `ν(Q_{e_(j+1)}(x) − Q_{e_j}(x))`.
    pub diffs: Vec<Valuation>,
    pub monotone: bool,
}

/// `Q_e = P_{2^e+1}` at `x[n]` for `e = e0 + d·j`, `j ≤ j_max`, where
/// `n = 2(e_max + d) − i0 + 8`, and the valuations of successive differences.
pub fn check_dconj(x: &RepeatingArgument, e0: u32, j_max: u32, prec: u32) -> Result<DconjReport> {
    let d = x.period;
    let es: Vec<u32> = (0..=j_max).map(|j| e0 + d * j).collect();
    let e_max = *es.last().expect("j_max + 1 exponents");
    let n = (2 * (e_max + d) + SPECCONJ_SLACK).saturating_sub(x.start);
    let arg = x.truncation(n);
    let values: Vec<TwoAdic> = es.iter().map(|&e| p_at((1 << e) + 1, &arg, prec)).collect::<Result<_>>()?;
    let diffs: Vec<Valuation> = values.windows(2).map(|w| (&w[1] - &w[0]).valuation()).collect();
    let monotone = diffs.windows(2).all(|w| w[0].lower_bound() <= w[1].lower_bound());
    Ok(DconjReport { n, es, diffs, monotone })
}
