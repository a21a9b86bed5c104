//! Line format:
//!
//! ```text
//! fst <name>
//! initial <state>
//! <state> <bit> -> <state> | <output or ->
//! ```

use super::{Fst, FstError, FstSpec, TransitionSpec};
use crate::seq::{Bit, Word};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FstTextError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Invalid(#[from] FstError),
}

fn syntax(line: usize, msg: impl Into<String>) -> FstTextError {
    FstTextError::Syntax { line, msg: msg.into() }
}

/// Non-empty, comment-stripped lines with their 1-based numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

pub(crate) fn header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    keyword: &str,
) -> Result<String, FstTextError> {
    let (n, l) = lines
        .next()
        .ok_or_else(|| syntax(1, format!("expected `{keyword} <value>`")))?;
    match l.split_whitespace().collect::<Vec<_>>()[..] {
        [k, v] if k == keyword => Ok(v.to_string()),
        _ => Err(syntax(n, format!("expected `{keyword} <value>`"))),
    }
}

pub fn parse_fst(text: &str) -> Result<Fst, FstTextError> {
    let mut lines = content_lines(text);
    let name = header(&mut lines, "fst")?;
    let initial = header(&mut lines, "initial")?;
    let mut states = vec![initial.clone()];
    let mut transitions = Vec::new();
    for (n, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        let [from, bit, "->", to, "|", out] = toks[..] else {
            return Err(syntax(n, "expected `<state> <bit> -> <state> | <output>`"));
        };
        let bit = match bit {
            "0" => Bit::Zero,
            "1" => Bit::One,
            _ => return Err(syntax(n, format!("bad input bit {bit:?}"))),
        };
        let out = Word::parse_token(out).map_err(|e| syntax(n, e.to_string()))?;
        for s in [from, to] {
            if !states.iter().any(|x| x == s) {
                states.push(s.to_string());
            }
        }
        transitions.push(TransitionSpec {
            from: from.to_string(),
            bit,
            to: to.to_string(),
            out,
        });
    }
    Ok(Fst::from_spec(&FstSpec {
        name,
        states,
        initial,
        transitions,
    })?)
}

pub fn write_fst(m: &Fst) -> String {
    let mut s = format!("fst {}\ninitial {}\n", sanitize(m.name()), m.label(m.initial_state()));
    for (q, row) in m.transitions().iter().enumerate() {
        for b in Bit::ALL {
            let (t, out) = &row[b.index()];
            s.push_str(&format!(
                "{} {} -> {} | {}\n",
                m.label(q),
                b,
                m.label(*t),
                out.to_token()
            ));
        }
    }
    s
}

fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_whitespace() || c == '#' { '_' } else { c })
        .collect();
    if s.is_empty() {
        "unnamed".into()
    } else {
        s
    }
}
