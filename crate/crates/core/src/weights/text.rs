//! `weights m=<m>` followed by one `(<a0> <a1> ... | <b>)` line per weight.

use num_bigint::BigInt;

use super::{Rational, Weight, WeightError, WeightTuple};
use crate::fst::text::content_lines;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WeightsTextError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("header declares m={declared} but {found} weights follow")]
    Count { declared: usize, found: usize },
    #[error(transparent)]
    Weight(#[from] WeightError),
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.parse().ok()?;
            if d == BigInt::from(0) {
                return None;
            }
            Some(Rational::new(n.parse().ok()?, d))
        }
        None => Some(Rational::from_integer(s.parse().ok()?)),
    }
}

pub fn parse_weight(s: &str) -> Result<Weight, String> {
    let body = s
        .trim()
        .strip_prefix('(')
        .and_then(|x| x.strip_suffix(')'))
        .ok_or("expected `(<a0> ... | <b>)`")?;
    let (a, b) = body.split_once('|').ok_or("missing `|` before the offset")?;
    let num = |t: &str| parse_rational(t).ok_or_else(|| format!("bad rational {t:?}"));
    let coeffs = a.split_whitespace().map(num).collect::<Result<Vec<_>, _>>()?;
    let offset = num(b.trim())?;
    Weight::new(coeffs, offset).map_err(|e| e.to_string())
}

pub fn parse_weights(text: &str) -> Result<WeightTuple, WeightsTextError> {
    let mut lines = content_lines(text);
    let (n, head) = lines.next().ok_or(WeightsTextError::Syntax {
        line: 1,
        msg: "expected `weights m=<m>`".into(),
    })?;
    let declared: usize = head
        .strip_prefix("weights")
        .map(str::trim)
        .and_then(|x| x.strip_prefix("m="))
        .and_then(|x| x.parse().ok())
        .ok_or(WeightsTextError::Syntax {
            line: n,
            msg: "expected `weights m=<m>`".into(),
        })?;
    let mut ws = Vec::new();
    for (n, l) in lines {
        ws.push(parse_weight(l).map_err(|msg| WeightsTextError::Syntax { line: n, msg })?);
    }
    if ws.len() != declared {
        return Err(WeightsTextError::Count {
            declared,
            found: ws.len(),
        });
    }
    Ok(WeightTuple::new(ws)?)
}

pub fn write_weights(a: &WeightTuple) -> String {
    let mut s = format!("weights m={}\n", a.m());
    for w in a.weights() {
        s.push_str(&format!("{w}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat_frac;

    #[test]
    fn round_trip() {
        let src = "weights m=2\n(1 2 3 | 4)\n(0 1/2 | -1/3)  # second\n";
        let a = parse_weights(src).unwrap();
        assert_eq!(a.get(1).coeffs()[1], rat_frac(1, 2));
        assert_eq!(parse_weights(&write_weights(&a)).unwrap(), a);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_weights("weights m=2\n(1 | 0)\n"),
            Err(WeightsTextError::Count { .. })
        ));
        assert!(matches!(
            parse_weights("weights m=1\n(1 0)\n"),
            Err(WeightsTextError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_weights("weights m=1\n(-1 | 0)\n"),
            Err(WeightsTextError::Syntax { .. })
        ));
        assert!(parse_weights("weights m=0\n").is_err());
    }
}
