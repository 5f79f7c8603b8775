//! Line-delimited atlas files: one object per class, split trees in preorder.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::dyadic::{parse_hex, TwoAdic};
use crate::error::{Error, Result};
use crate::zeros::{Atlas, ClassReport, CongruenceClass, Limits, Theorem, Verdict, ZeroRecord, ZeroStatus};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtlasRecord {
    pub n: u64,
    pub log_modulus: u32,
    pub residue: u64,
    /// `no_zero`, `zero`, `split` or `unresolved`.
    pub verdict: String,
    /// `v` for a certified class, `c` for a zero, 0 otherwise.
    pub v_or_c: i64,
    pub zero_bits_hex: Option<String>,
    pub witness_depth: Option<u32>,
    pub status: String,
}

fn push_records(n: u64, r: &ClassReport, out: &mut Vec<AtlasRecord>) {
    let mut rec = AtlasRecord {
        n,
        log_modulus: r.class.log_modulus,
        residue: r.class.residue,
        verdict: String::new(),
        v_or_c: 0,
        zero_bits_hex: None,
        witness_depth: None,
        status: String::new(),
    };
    match &r.verdict {
        Verdict::CertifiedNoZero { v, t_used } => {
            rec.verdict = "no_zero".into();
            rec.v_or_c = *v as i64;
            rec.status = format!("certified t={t_used}");
            out.push(rec);
        }
        Verdict::EmpiricalZero(z) => {
            rec.verdict = "zero".into();
            rec.v_or_c = z.c as i64;
            rec.zero_bits_hex = Some(z.zero_bits.residue_hex());
            rec.witness_depth = Some(z.witness_depth);
            rec.status = match z.status {
                ZeroStatus::Empirical => "empirical".into(),
                ZeroStatus::TheoremBacked(t) => format!("theorem:{}", t.tag()),
            };
            out.push(rec);
        }
        Verdict::Split(children) => {
            rec.verdict = "split".into();
            rec.status = "split".into();
            out.push(rec);
            for c in children {
                push_records(n, c, out);
            }
        }
        Verdict::Unresolved(reason) => {
            rec.verdict = "unresolved".into();
            rec.status = reason.clone();
            out.push(rec);
        }
    }
}

pub fn to_records(atlas: &Atlas) -> Vec<AtlasRecord> {
    let mut out = Vec::new();
    for (n, reports) in &atlas.entries {
        for r in reports {
            push_records(*n, r, &mut out);
        }
    }
    out
}

fn bad(rec: &AtlasRecord, what: &str) -> Error {
    Error::Parse(format!("n = {} class {} mod 2^{}: {what}", rec.n, rec.residue, rec.log_modulus))
}

fn take_report(recs: &[AtlasRecord], pos: &mut usize) -> Result<ClassReport> {
    let rec = recs.get(*pos).ok_or_else(|| Error::Parse("split record without children".into()))?;
    *pos += 1;
    let class = CongruenceClass::new(rec.log_modulus, rec.residue)?;
    let verdict = match rec.verdict.as_str() {
        "no_zero" => {
            let t_used = rec
                .status
                .strip_prefix("certified t=")
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad(rec, "status lacks certificate t"))?;
            Verdict::CertifiedNoZero { v: rec.v_or_c as u64, t_used }
        }
        "zero" => {
            let depth = rec.witness_depth.ok_or_else(|| bad(rec, "zero without witness_depth"))?;
            let hex = rec.zero_bits_hex.as_deref().ok_or_else(|| bad(rec, "zero without bits"))?;
            let status = match rec.status.strip_prefix("theorem:") {
                None => ZeroStatus::Empirical,
                Some(tag) => ZeroStatus::TheoremBacked(
                    Theorem::from_tag(tag).ok_or_else(|| bad(rec, "unknown theorem tag"))?,
                ),
            };
            Verdict::EmpiricalZero(ZeroRecord {
                n: rec.n,
                class,
                zero_bits: TwoAdic::new(parse_hex(hex)?, depth)?,
                c: rec.v_or_c as u64,
                witness_depth: depth,
                status,
            })
        }
        "split" => {
            let children = vec![take_report(recs, pos)?, take_report(recs, pos)?];
            for (child, want) in children.iter().zip(class.children()) {
                if child.class != want {
                    return Err(bad(rec, "children do not partition the class"));
                }
            }
            Verdict::Split(children)
        }
        "unresolved" => Verdict::Unresolved(rec.status.clone()),
        other => return Err(bad(rec, &format!("unknown verdict {other}"))),
    };
    Ok(ClassReport { class, verdict })
}

pub fn from_records(recs: &[AtlasRecord]) -> Result<Atlas> {
    let mut entries: BTreeMap<u64, Vec<ClassReport>> = BTreeMap::new();
    let mut limits = Limits::default();
    let mut pos = 0;
    while pos < recs.len() {
        let n = recs[pos].n;
        let report = take_report(recs, &mut pos)?;
        for z in report.zeros() {
            limits.witness_depth = z.witness_depth;
        }
        entries.entry(n).or_default().push(report);
    }
    Ok(Atlas { limits, entries })
}

pub fn write_atlas<W: Write>(atlas: &Atlas, mut w: W) -> Result<()> {
    for rec in to_records(atlas) {
        let line = serde_json::to_string(&rec).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_atlas<R: BufRead>(r: R) -> Result<Atlas> {
    let mut recs = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        recs.push(serde_json::from_str(&line).map_err(|e| Error::Parse(format!("{e}: {line}")))?);
    }
    from_records(&recs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeros::build_atlas;

    #[test]
    fn round_trip() {
        let atlas = build_atlas([1, 7, 29], &Limits::default()).unwrap();
        let mut buf = Vec::new();
        write_atlas(&atlas, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().all(|l| l.starts_with("{\"n\":")));
        assert!(text.contains("\"verdict\":\"split\""));
        let back = read_atlas(buf.as_slice()).unwrap();
        assert_eq!(back.entries, atlas.entries);
    }

    #[test]
    fn malformed() {
        let split = r#"{"n":5,"log_modulus":1,"residue":0,"verdict":"split","v_or_c":0,"zero_bits_hex":null,"witness_depth":null,"status":"split"}"#;
        assert!(read_atlas(split.as_bytes()).is_err());
        let odd = r#"{"n":5,"log_modulus":1,"residue":0,"verdict":"maybe","v_or_c":0,"zero_bits_hex":null,"witness_depth":null,"status":""}"#;
        assert!(read_atlas(odd.as_bytes()).is_err());
    }
}
