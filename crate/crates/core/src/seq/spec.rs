//! The one-line sequence-spec language.
//!
//! ```text
//! up <u> <v>
//! blocks poly <c0> <c1> ...
//! blocks exp <base> [scale]
//! blocks floordiv <d>
//! blocks table <t0> ... then <blocks-spec>
//! builtin thue-morse | builtin period-doubling
//! ```
//! Any spec may end in `shift <k>`. On a `blocks` spec the shift moves the argument of the
//! function; on the other forms it drops the first `k` bits.

use num_bigint::BigUint;

use super::blockfun::{BlockFun, BlockFunError};
use super::stream::{blocks_encode, shift_stream, Builtin, Stream};
use super::word::Word;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeqSpecError {
    #[error("empty sequence spec")]
    Empty,
    #[error("unknown sequence kind {0:?}")]
    UnknownKind(String),
    #[error("unknown builtin {0:?}")]
    UnknownBuiltin(String),
    #[error("bad number {0:?}")]
    BadNumber(String),
    #[error("bad word {0:?}")]
    BadWord(String),
    #[error("`up` needs a nonempty period")]
    EmptyPeriod,
    #[error("unexpected token {0:?}")]
    Unexpected(String),
    #[error("missing argument after {0:?}")]
    Missing(&'static str),
    #[error(transparent)]
    BlockFun(#[from] BlockFunError),
}

fn num(tok: Option<&str>, after: &'static str) -> Result<BigUint, SeqSpecError> {
    let t = tok.ok_or(SeqSpecError::Missing(after))?;
    t.parse().map_err(|_| SeqSpecError::BadNumber(t.to_string()))
}

fn small(tok: Option<&str>, after: &'static str) -> Result<u64, SeqSpecError> {
    let t = tok.ok_or(SeqSpecError::Missing(after))?;
    t.parse().map_err(|_| SeqSpecError::BadNumber(t.to_string()))
}

/// Parses a block function spec (the part after `blocks`), without the trailing shift.
fn parse_blockfun(toks: &[&str]) -> Result<BlockFun, SeqSpecError> {
    let (kind, rest) = toks.split_first().ok_or(SeqSpecError::Missing("blocks"))?;
    match *kind {
        "poly" => {
            if rest.is_empty() {
                return Err(SeqSpecError::Missing("poly"));
            }
            let c = rest
                .iter()
                .map(|t| num(Some(t), "poly"))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(BlockFun::polynomial(c))
        }
        "exp" => {
            let mut it = rest.iter().copied();
            let base = num(it.next(), "exp")?;
            let scale = match it.next() {
                Some(t) => num(Some(t), "exp")?,
                None => BigUint::from(1u32),
            };
            if let Some(t) = it.next() {
                return Err(SeqSpecError::Unexpected(t.to_string()));
            }
            Ok(BlockFun::exponential(base, scale)?)
        }
        "floordiv" => {
            let mut it = rest.iter().copied();
            let d = small(it.next(), "floordiv")?;
            if let Some(t) = it.next() {
                return Err(SeqSpecError::Unexpected(t.to_string()));
            }
            Ok(BlockFun::floor_div(d)?)
        }
        "table" => {
            let then = rest
                .iter()
                .position(|t| *t == "then")
                .ok_or(SeqSpecError::Missing("table"))?;
            let table = rest[..then]
                .iter()
                .map(|t| num(Some(t), "table"))
                .collect::<Result<Vec<_>, _>>()?;
            let tail = parse_blockfun_shifted(&rest[then + 1..])?;
            Ok(BlockFun::table_then_tail(table, tail))
        }
        other => Err(SeqSpecError::UnknownKind(other.to_string())),
    }
}

fn split_shift<'a>(toks: &'a [&'a str]) -> Result<(&'a [&'a str], u64), SeqSpecError> {
    match toks.iter().rposition(|t| *t == "shift") {
        Some(i) if i + 2 == toks.len() => Ok((&toks[..i], small(Some(toks[i + 1]), "shift")?)),
        Some(i) if i + 1 == toks.len() => Err(SeqSpecError::Missing("shift")),
        _ => Ok((toks, 0)),
    }
}

fn parse_blockfun_shifted(toks: &[&str]) -> Result<BlockFun, SeqSpecError> {
    let (body, k) = split_shift(toks)?;
    Ok(parse_blockfun(body)?.shifted(k))
}

/// Parses a block function from the text after `blocks` (accepts the same forms as
/// [`BlockFun`]'s `Display`).
pub fn parse_blockfun_spec(s: &str) -> Result<BlockFun, SeqSpecError> {
    let toks: Vec<&str> = s.split_whitespace().collect();
    parse_blockfun_shifted(&toks)
}

pub fn parse_seq_spec(s: &str) -> Result<Stream, SeqSpecError> {
    let toks: Vec<&str> = s.split_whitespace().collect();
    let (kind, rest) = toks.split_first().ok_or(SeqSpecError::Empty)?;
    match *kind {
        "blocks" => Ok(blocks_encode(&parse_blockfun_shifted(rest)?)),
        "up" => {
            let (body, k) = split_shift(rest)?;
            let [u, v] = body else {
                return match body.get(2) {
                    Some(t) => Err(SeqSpecError::Unexpected(t.to_string())),
                    None => Err(SeqSpecError::Missing("up")),
                };
            };
            let u = Word::parse_token(u).map_err(|_| SeqSpecError::BadWord(u.to_string()))?;
            let v = Word::parse_token(v).map_err(|_| SeqSpecError::BadWord(v.to_string()))?;
            let s = Stream::ultimately_periodic(u, v).ok_or(SeqSpecError::EmptyPeriod)?;
            Ok(shift_stream(&s, k))
        }
        "builtin" => {
            let (body, k) = split_shift(rest)?;
            let [name] = body else {
                return match body.get(1) {
                    Some(t) => Err(SeqSpecError::Unexpected(t.to_string())),
                    None => Err(SeqSpecError::Missing("builtin")),
                };
            };
            let b = Builtin::from_name(name).ok_or_else(|| SeqSpecError::UnknownBuiltin(name.to_string()))?;
            Ok(shift_stream(&Stream::builtin(b), k))
        }
        other => Err(SeqSpecError::UnknownKind(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::word::w;

    #[test]
    fn parses_all_forms() {
        let p = |s| parse_seq_spec(s).unwrap().prefix(10).unwrap();
        assert_eq!(p("blocks poly 0 1"), w("1101001000"));
        assert_eq!(p("blocks poly 0 0 1"), w("1101000010"));
        assert_eq!(p("blocks exp 2"), w("1010010000"));
        assert_eq!(p("blocks floordiv 2"), w("1110101001"));
        assert_eq!(p("up 1 01"), w("1010101010"));
        assert_eq!(p("builtin thue-morse"), w("0110100110"));
        assert_eq!(p("blocks poly 0 1 shift 1"), w("1010010001"));
        assert_eq!(p("up 11 0 shift 1"), w("1000000000"));
        assert_eq!(p("blocks table 5 then poly 0 1"), w("1000001101"));
    }

    #[test]
    fn display_round_trips() {
        for s in ["poly 0 0 1 shift 3", "exp 2 3", "floordiv 4", "table 1 2 then exp 3"] {
            assert_eq!(parse_blockfun_spec(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(parse_seq_spec(""), Err(SeqSpecError::Empty)));
        assert!(matches!(parse_seq_spec("up 1 -"), Err(SeqSpecError::EmptyPeriod)));
        assert!(matches!(
            parse_seq_spec("builtin fib"),
            Err(SeqSpecError::UnknownBuiltin(_))
        ));
        assert!(matches!(parse_seq_spec("blocks exp 1"), Err(SeqSpecError::BlockFun(_))));
        assert!(matches!(
            parse_seq_spec("blocks poly x"),
            Err(SeqSpecError::BadNumber(_))
        ));
        assert!(matches!(parse_seq_spec("wave 1"), Err(SeqSpecError::UnknownKind(_))));
    }
}
