//! Diagram file format (UTF-8 JSON) and DOT export.
//!
//! The JSON schema is
//! `{ "h1": [1,1], "levels": [ { "matrix": [[1,1],[1,0]], "orders": ["12","1"] }, ... ] }`
//! with matrix entries written as JSON numbers up to 2^53 - 1 and as
//! decimal strings beyond, so round-trips are bit exact. Order words are
//! digit strings over "1".."9" when the rank is at most 9 and
//! comma-separated integers otherwise; closed-form words are written as an
//! object carrying their defining data.

use crate::diagram::{BalancedWord, DiagramError, IncidenceMatrix, Level, OrderWord, OrderedDiagram};
use crate::num::interval::{Interval, Rat};
use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed diagram file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

const SAFE_INT: u64 = (1u64 << 53) - 1;

fn nat_to_value(n: &BigUint) -> Value {
    match n.to_u64() {
        Some(v) if v <= SAFE_INT => json!(v),
        _ => json!(n.to_string()),
    }
}

fn value_to_nat(v: &Value) -> Result<BigUint, FormatError> {
    match v {
        Value::Number(n) => n
            .as_u64()
            .map(BigUint::from)
            .ok_or_else(|| FormatError::Malformed(format!("expected nonnegative integer, got {n}"))),
        Value::String(s) => BigUint::from_str(s)
            .map_err(|_| FormatError::Malformed(format!("bad integer string {s:?}"))),
        other => Err(FormatError::Malformed(format!("expected integer, got {other}"))),
    }
}

fn rat_to_value(r: &Rat) -> Value {
    json!(format!("{}/{}", r.numer(), r.denom()))
}

fn value_to_rat(v: &Value) -> Result<Rat, FormatError> {
    let s = v
        .as_str()
        .ok_or_else(|| FormatError::Malformed("expected rational string".into()))?;
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n = BigInt::from_str(num.trim())
        .map_err(|_| FormatError::Malformed(format!("bad rational {s:?}")))?;
    let d = BigInt::from_str(den.trim())
        .map_err(|_| FormatError::Malformed(format!("bad rational {s:?}")))?;
    Ok(Rat::new(n, d))
}

fn word_to_value(word: &OrderWord, rank: usize) -> Value {
    match word {
        OrderWord::Explicit(letters) => {
            if rank <= 9 {
                Value::String(letters.iter().map(|l| char::from(b'1' + *l as u8)).collect())
            } else {
                Value::String(
                    letters.iter().map(|l| (l + 1).to_string()).collect::<Vec<_>>().join(","),
                )
            }
        }
        OrderWord::Balanced(b) => {
            json!({
                "balanced": {
                    "w_lo": [rat_to_value(b.w[0].lo()), rat_to_value(b.w[1].lo())],
                    "w_hi": [rat_to_value(b.w[0].hi()), rat_to_value(b.w[1].hi())],
                    "counts": [nat_to_value(&b.counts[0]), nat_to_value(&b.counts[1])],
                    "k_run": nat_to_value(&b.k_run),
                }
            })
        }
    }
}

fn value_to_word(v: &Value, rank: usize) -> Result<OrderWord, FormatError> {
    match v {
        Value::String(s) => {
            let letters: Result<Vec<u32>, FormatError> = if rank <= 9 && !s.contains(',') {
                s.chars()
                    .map(|c| {
                        c.to_digit(10)
                            .filter(|d| *d >= 1)
                            .map(|d| d - 1)
                            .ok_or_else(|| FormatError::Malformed(format!("bad order word {s:?}")))
                    })
                    .collect()
            } else {
                s.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<u32>()
                            .ok()
                            .filter(|d| *d >= 1)
                            .map(|d| d - 1)
                            .ok_or_else(|| FormatError::Malformed(format!("bad order word {s:?}")))
                    })
                    .collect()
            };
            Ok(OrderWord::Explicit(letters?))
        }
        Value::Object(map) => {
            let b = map
                .get("balanced")
                .and_then(Value::as_object)
                .ok_or_else(|| FormatError::Malformed("unknown word object".into()))?;
            let arr = |key: &str| -> Result<Vec<Value>, FormatError> {
                b.get(key)
                    .and_then(Value::as_array)
                    .map(|a| a.to_vec())
                    .ok_or_else(|| FormatError::Malformed(format!("missing field {key}")))
            };
            let w_lo = arr("w_lo")?;
            let w_hi = arr("w_hi")?;
            let counts = arr("counts")?;
            if w_lo.len() != 2 || w_hi.len() != 2 || counts.len() != 2 {
                return Err(FormatError::Malformed("balanced word needs two letters".into()));
            }
            let w = [
                Interval::new(value_to_rat(&w_lo[0])?, value_to_rat(&w_hi[0])?),
                Interval::new(value_to_rat(&w_lo[1])?, value_to_rat(&w_hi[1])?),
            ];
            let counts = [value_to_nat(&counts[0])?, value_to_nat(&counts[1])?];
            let k_run = value_to_nat(
                b.get("k_run").ok_or_else(|| FormatError::Malformed("missing k_run".into()))?,
            )?;
            Ok(OrderWord::Balanced(BalancedWord { w, counts, k_run }))
        }
        other => Err(FormatError::Malformed(format!("expected order word, got {other}"))),
    }
}

pub fn diagram_to_json(diagram: &OrderedDiagram) -> Value {
    let levels: Vec<Value> = diagram
        .levels()
        .iter()
        .map(|level| {
            let m = &level.matrix;
            let matrix: Vec<Value> = (0..m.rows())
                .map(|r| Value::Array(m.row(r).iter().map(nat_to_value).collect()))
                .collect();
            let rank = m.cols().max(m.rows());
            let orders: Vec<Value> =
                level.orders.iter().map(|w| word_to_value(w, rank)).collect();
            let mut obj = Map::new();
            obj.insert("matrix".into(), Value::Array(matrix));
            obj.insert("orders".into(), Value::Array(orders));
            Value::Object(obj)
        })
        .collect();
    json!({
        "h1": diagram.h1().iter().map(nat_to_value).collect::<Vec<_>>(),
        "levels": levels,
    })
}

pub fn diagram_to_string(diagram: &OrderedDiagram) -> String {
    serde_json::to_string_pretty(&diagram_to_json(diagram)).expect("diagram serializes")
}

pub fn diagram_from_json(v: &Value) -> Result<OrderedDiagram, FormatError> {
    let obj = v.as_object().ok_or_else(|| FormatError::Malformed("expected object".into()))?;
    let h1 = obj
        .get("h1")
        .and_then(Value::as_array)
        .ok_or_else(|| FormatError::Malformed("missing h1".into()))?
        .iter()
        .map(value_to_nat)
        .collect::<Result<Vec<_>, _>>()?;
    let mut levels = Vec::new();
    for lv in obj
        .get("levels")
        .and_then(Value::as_array)
        .ok_or_else(|| FormatError::Malformed("missing levels".into()))?
    {
        let lobj = lv.as_object().ok_or_else(|| FormatError::Malformed("level not object".into()))?;
        let rows = lobj
            .get("matrix")
            .and_then(Value::as_array)
            .ok_or_else(|| FormatError::Malformed("missing matrix".into()))?;
        let nrows = rows.len();
        let mut data = Vec::new();
        let mut ncols = 0usize;
        for r in rows {
            let row = r
                .as_array()
                .ok_or_else(|| FormatError::Malformed("matrix row not array".into()))?;
            ncols = row.len();
            for e in row {
                data.push(value_to_nat(e)?);
            }
        }
        if nrows == 0 || ncols == 0 || data.len() != nrows * ncols {
            return Err(FormatError::Malformed("ragged matrix".into()));
        }
        let matrix = IncidenceMatrix::new(nrows, ncols, data);
        let rank = ncols.max(nrows);
        let orders = lobj
            .get("orders")
            .and_then(Value::as_array)
            .ok_or_else(|| FormatError::Malformed("missing orders".into()))?
            .iter()
            .map(|w| value_to_word(w, rank))
            .collect::<Result<Vec<_>, _>>()?;
        levels.push(Level { matrix, orders });
    }
    Ok(OrderedDiagram::new(h1, levels)?)
}

pub fn diagram_from_str(s: &str) -> Result<OrderedDiagram, FormatError> {
    let v: Value = serde_json::from_str(s)?;
    diagram_from_json(&v)
}

/// DOT rendering of the levels up to `max_level`; closed-form words are
/// summarized on the edge labels rather than expanded.
pub fn diagram_to_dot(diagram: &OrderedDiagram, max_level: usize) -> String {
    let top = max_level.min(diagram.depth());
    let mut out = String::from("digraph bratteli {\n  rankdir=TB;\n  node [shape=circle];\n");
    out.push_str("  root [shape=point];\n");
    for v in 0..diagram.vertex_count(1) {
        out.push_str(&format!("  v1_{v} [label=\"1.{}\"];\n", v + 1));
        out.push_str(&format!(
            "  root -> v1_{v} [label=\"x{}\"];\n",
            diagram.h1()[v]
        ));
    }
    for level in 2..=top {
        for v in 0..diagram.vertex_count(level) {
            out.push_str(&format!("  v{level}_{v} [label=\"{level}.{}\"];\n", v + 1));
            let word = diagram.word(level, v);
            match word.len_usize() {
                Some(len) if len <= 64 => {
                    for pos in 0..len {
                        if let Ok(src) = word.letter_at(&BigUint::from(pos)) {
                            out.push_str(&format!(
                                "  v{}_{src} -> v{level}_{v} [label=\"{}\"];\n",
                                level - 1,
                                pos + 1
                            ));
                        }
                    }
                }
                _ => {
                    for src in 0..diagram.vertex_count(level - 1) {
                        let count = diagram.matrix(level).get(v, src);
                        if !count.is_zero() {
                            out.push_str(&format!(
                                "  v{}_{src} -> v{level}_{v} [style=bold,label=\"x{count}\"];\n",
                                level - 1
                            ));
                        }
                    }
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

use num_traits::Zero;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::fibonacci_diagram;

    #[test]
    fn round_trip_fibonacci() {
        let d = fibonacci_diagram(4);
        let s = diagram_to_string(&d);
        let back = diagram_from_str(&s).unwrap();
        assert_eq!(back, d);
        assert!(s.contains("\"12\""));
    }

    #[test]
    fn big_entries_become_strings() {
        use crate::diagram::{IncidenceMatrix, Level, OrderWord};
        let big = BigUint::from(1u64 << 60);
        let d = OrderedDiagram::new(
            vec![BigUint::from(1u32)],
            vec![Level {
                matrix: IncidenceMatrix::new(1, 1, vec![big.clone()]),
                orders: vec![OrderWord::Explicit(vec![0; 0])],
            }],
        );
        // Word of length 2^60 cannot be explicit; use a fake short one to
        // exercise the serializer only.
        assert!(d.is_err());
        let v = nat_to_value(&big);
        assert!(v.is_string());
        assert_eq!(value_to_nat(&v).unwrap(), big);
    }

    #[test]
    fn balanced_words_round_trip() {
        use crate::diagram::{BalancedWord, IncidenceMatrix, Level, OrderWord};
        use crate::num::interval::rat_i64;
        let b = BalancedWord {
            w: [
                Interval::new(rat_i64(-11, 10), rat_i64(-1, 1)),
                Interval::new(rat_i64(2, 1), rat_i64(21, 10)),
            ],
            counts: [BigUint::from(1u32), BigUint::from(2u32)],
            k_run: BigUint::from(1u32),
        };
        let d = OrderedDiagram::new(
            OrderedDiagram::unit_hat(2),
            vec![Level {
                matrix: IncidenceMatrix::from_u64(&[&[1, 2], &[1, 1]]),
                orders: vec![
                    OrderWord::Balanced(b),
                    OrderWord::Explicit(vec![0, 1]),
                ],
            }],
        )
        .unwrap();
        let s = diagram_to_string(&d);
        let back = diagram_from_str(&s).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn dot_export_contains_edges() {
        let d = fibonacci_diagram(3);
        let dot = diagram_to_dot(&d, 3);
        assert!(dot.contains("digraph"));
        assert!(dot.contains("v1_0 -> v2_0"));
    }
}
