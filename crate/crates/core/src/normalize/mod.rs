//! Double products `w · P(S^{n₀}f, α⃗, p⃗, c⃗)` and their normal forms.

mod canonical;
mod disambiguate;
mod extract;

pub use canonical::{dp_to_canonical, Canonical};
pub use disambiguate::{
    absorb_cycles, disambiguate, find_ambiguity, merge_words, Disambiguated, UltimatelyPeriodicVerdict,
};
pub use extract::{block_target, extract_transduct, TransductExtraction, EXTRACT_SCAN_LIMIT};

use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::fst::text::content_lines;
use crate::fst::PumpError;
use crate::poly::Rational;
use crate::seq::{parse_blockfun_spec, BlockFun, Chunk, Chunks, NotNatural, Source, Stream, StreamError, Word};
use crate::weights::{parse_weights, to_natural, wprod_by, write_weights, Weight, WeightTuple};

/// Longest word materialised while rewriting a representation.
pub const WORD_LIMIT: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NormalizeError {
    #[error("tuple lengths differ or are zero: {alphas} weights, {ps} prefixes, {cs} cycles")]
    Shape { alphas: usize, ps: usize, cs: usize },
    #[error(transparent)]
    Exponent(#[from] StreamError),
    #[error("word of length {0} is too large to materialise")]
    TooLarge(String),
    #[error("certificate has no period modulo {modulus}")]
    MissingPeriod { modulus: u64 },
    #[error("blocks stay below {states} within {horizon} blocks")]
    BlocksTooShort { states: usize, horizon: u64 },
    #[error("no state repetition within {horizon} blocks")]
    NoRepetition { horizon: u64 },
    #[error(transparent)]
    Pump(#[from] PumpError),
    #[error("u^ω ≠ v·w^ω")]
    MergePrecondition,
    #[error("representation is not disambiguated: {0}")]
    Conditions(String),
    #[error("no threshold beyond which exponents exceed {bound} within {steps} steps")]
    NoThreshold { bound: usize, steps: u64 },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

impl From<NotNatural> for NormalizeError {
    fn from(e: NotNatural) -> Self {
        NormalizeError::Exponent(e.into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleProduct {
    pub f: BlockFun,
    pub n0: u64,
    pub w: Word,
    pub alphas: WeightTuple,
    pub ps: Vec<Word>,
    pub cs: Vec<Word>,
}

impl DoubleProduct {
    pub fn new(
        f: BlockFun,
        n0: u64,
        w: Word,
        alphas: WeightTuple,
        ps: Vec<Word>,
        cs: Vec<Word>,
    ) -> Result<Self, NormalizeError> {
        if ps.len() != alphas.m() || cs.len() != alphas.m() {
            return Err(NormalizeError::Shape {
                alphas: alphas.m(),
                ps: ps.len(),
                cs: cs.len(),
            });
        }
        Ok(DoubleProduct {
            f,
            n0,
            w,
            alphas,
            ps,
            cs,
        })
    }

    /// `P(f, ⟨(1 | 0)⟩, ⟨1⟩, ⟨0⟩) = ⟨f⟩`.
    pub fn of_blocks(f: BlockFun) -> Self {
        DoubleProduct {
            f,
            n0: 0,
            w: Word::empty(),
            alphas: WeightTuple::single(Weight::ints(&[1, 0])),
            ps: vec![Word::block(0)],
            cs: vec![Word::zeros(1)],
        }
    }

    pub fn m(&self) -> usize {
        self.alphas.m()
    }

    /// `ψ(i, j) = (α⃗ ⊙ S^{n₀}f)(mi + j)`.
    pub fn psi(&self, i: u64, j: usize) -> Rational {
        let n = i * self.m() as u64 + j as u64;
        wprod_by::<std::convert::Infallible>(&self.alphas, n, |x| Ok(self.f.eval(self.n0 + x)))
            .unwrap_or_else(|e| match e {})
    }

    pub fn psi_natural(&self, i: u64, j: usize) -> Result<BigUint, StreamError> {
        let v = self.psi(i, j);
        to_natural(i, &v).map_err(|_| StreamError::NonNaturalExponent {
            i,
            j,
            value: v.to_string(),
        })
    }

    /// `p_j c_j^{ψ(i,j)}` as a literal word.
    pub fn factor(&self, i: u64, j: usize) -> Result<Word, NormalizeError> {
        let e = self.psi_natural(i, j)?;
        let len = BigUint::from(self.cs[j].len()) * &e + self.ps[j].len();
        match (len.to_usize(), e.to_usize()) {
            (Some(l), Some(e)) if l <= WORD_LIMIT => Ok(self.ps[j].concat(&self.cs[j].pow(e))),
            _ => Err(NormalizeError::TooLarge(len.to_string())),
        }
    }

    /// The rotation identity: moves `p₀ c₀^{ψ(0,0)}` into `w` and rotates the tuples.
    pub fn rotate(&self) -> Result<DoubleProduct, NormalizeError> {
        let head = self.factor(0, 0)?;
        let mut ps = self.ps.clone();
        let mut cs = self.cs.clone();
        ps.rotate_left(1);
        cs.rotate_left(1);
        Ok(DoubleProduct {
            f: self.f.clone(),
            n0: self.n0 + self.alphas.get(0).k() as u64,
            w: self.w.concat(&head),
            alphas: self.alphas.rotate(),
            ps,
            cs,
        })
    }

    /// Whether every factor after `w` is empty.
    fn is_silent(&self) -> bool {
        self.ps.iter().all(|p| p.is_empty())
            && (0..self.m()).all(|j| {
                let a = self.alphas.get(j);
                self.cs[j].is_empty() || (a.is_constant() && a.offset().is_zero())
            })
    }
}

/// `w · ∏ᵢ ∏ⱼ p_j c_j^{ψ(i,j)}`, lazily.
pub fn dp_emit(dp: &DoubleProduct) -> Stream {
    Stream::derived(DpSource(dp.clone()))
}

#[derive(Debug)]
struct DpSource(DoubleProduct);

impl Source for DpSource {
    fn open(&self) -> Chunks {
        let dp = self.0.clone();
        let silent = dp.is_silent();
        let mut head = (!dp.w.is_empty()).then(|| Chunk::once(dp.w.clone()));
        let (mut i, mut j, mut half) = (0u64, 0usize, 0u8);
        let mut failed = false;
        Box::new(std::iter::from_fn(move || {
            if let Some(c) = head.take() {
                return Some(Ok(c));
            }
            if silent || failed {
                return None;
            }
            loop {
                let out = if half == 0 {
                    half = 1;
                    (!dp.ps[j].is_empty()).then(|| Ok(Chunk::once(dp.ps[j].clone())))
                } else {
                    half = 0;
                    let r = if dp.cs[j].is_empty() {
                        None
                    } else {
                        match dp.psi_natural(i, j) {
                            Ok(e) if e.is_zero() => None,
                            Ok(e) => Some(Ok(Chunk::power(dp.cs[j].clone(), e))),
                            Err(e) => {
                                failed = true;
                                Some(Err(e))
                            }
                        }
                    };
                    j += 1;
                    if j == dp.m() {
                        j = 0;
                        i += 1;
                    }
                    r
                };
                if out.is_some() {
                    return out;
                }
            }
        }))
    }
}

impl fmt::Display for DoubleProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let toks = |ws: &[Word]| ws.iter().map(Word::to_token).collect::<Vec<_>>().join(" ");
        writeln!(f, "dp")?;
        writeln!(f, "f {}", self.f)?;
        writeln!(f, "n0 {}", self.n0)?;
        writeln!(f, "w {}", self.w.to_token())?;
        write!(f, "{}", write_weights(&self.alphas))?;
        writeln!(f, "p {}", toks(&self.ps))?;
        writeln!(f, "c {}", toks(&self.cs))
    }
}

pub fn write_dp(dp: &DoubleProduct) -> String {
    dp.to_string()
}

pub fn parse_dp(text: &str) -> Result<DoubleProduct, NormalizeError> {
    let lines: Vec<(usize, &str)> = content_lines(text).collect();
    let syntax = |line: usize, msg: &str| NormalizeError::Syntax {
        line,
        msg: msg.to_string(),
    };
    let field = |idx: usize, key: &str| -> Result<(usize, &str), NormalizeError> {
        let &(n, l) = lines
            .get(idx)
            .ok_or_else(|| syntax(0, &format!("missing `{key}` line")))?;
        let rest = l
            .strip_prefix(key)
            .filter(|r| r.is_empty() || r.starts_with(char::is_whitespace))
            .ok_or_else(|| syntax(n, &format!("expected `{key}`")))?;
        Ok((n, rest.trim()))
    };
    field(0, "dp")?;
    let (n, f) = field(1, "f")?;
    let f = parse_blockfun_spec(f).map_err(|e| syntax(n, &e.to_string()))?;
    let (n, n0) = field(2, "n0")?;
    let n0 = n0.parse().map_err(|_| syntax(n, "bad n0"))?;
    let (n, w) = field(3, "w")?;
    let w = Word::parse_token(w).map_err(|e| syntax(n, &e.to_string()))?;
    let p_at = lines
        .iter()
        .position(|(_, l)| l.starts_with("p ") || *l == "p")
        .ok_or_else(|| syntax(0, "missing `p` line"))?;
    let block: Vec<&str> = lines[4..p_at].iter().map(|(_, l)| *l).collect();
    let alphas = parse_weights(&block.join("\n")).map_err(|e| syntax(lines[4.min(p_at)].0, &e.to_string()))?;
    let words = |idx: usize, key: &str| -> Result<Vec<Word>, NormalizeError> {
        let (n, rest) = field(idx, key)?;
        rest.split_whitespace()
            .map(|t| Word::parse_token(t).map_err(|e| syntax(n, &e.to_string())))
            .collect()
    };
    let ps = words(p_at, "p")?;
    let cs = words(p_at + 1, "c")?;
    if let Some(&(n, _)) = lines.get(p_at + 2) {
        return Err(syntax(n, "unexpected line"));
    }
    DoubleProduct::new(f, n0, w, alphas, ps, cs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::{blocks_encode, w};

    pub(crate) fn ambiguous_dp() -> DoubleProduct {
        DoubleProduct::new(
            BlockFun::identity(),
            0,
            Word::empty(),
            WeightTuple::new(vec![Weight::ints(&[1, 0]), Weight::ints(&[1, 0])]).unwrap(),
            vec![w("1"), w("1")],
            vec![w("10"), w("01")],
        )
        .unwrap()
    }

    #[test]
    fn emit_examples() {
        let f = BlockFun::polynomial([0u32, 0, 1]);
        let dp = DoubleProduct::of_blocks(f.clone());
        assert_eq!(
            dp_emit(&dp).prefix(300).unwrap(),
            blocks_encode(&f).prefix(300).unwrap()
        );
        assert_eq!(dp_emit(&ambiguous_dp()).prefix(16).unwrap(), w("1101110101010101"));
        let mut d = DoubleProduct::of_blocks(BlockFun::identity());
        d.w = w("101");
        assert_eq!(dp_emit(&d).prefix(3).unwrap(), w("101"));
    }

    #[test]
    fn emit_non_natural() {
        let mut dp = DoubleProduct::of_blocks(BlockFun::identity());
        dp.alphas = WeightTuple::single(Weight::ints(&[1, -3]));
        assert!(matches!(
            dp_emit(&dp).prefix(4),
            Err(StreamError::NonNaturalExponent { i: 0, j: 0, .. })
        ));
    }

    #[test]
    fn silent_product_is_finite() {
        let mut dp = DoubleProduct::of_blocks(BlockFun::identity());
        dp.ps = vec![Word::empty()];
        dp.cs = vec![Word::empty()];
        dp.w = w("11");
        assert_eq!(dp_emit(&dp).prefix(3), Err(StreamError::Exhausted { available: 2 }));
    }

    #[test]
    fn rotation_identity() {
        let dp = ambiguous_dp();
        let r = dp.rotate().unwrap();
        assert_eq!(r.w, w("1"));
        assert_eq!(r.n0, 1);
        assert_eq!(dp_emit(&r).prefix(512).unwrap(), dp_emit(&dp).prefix(512).unwrap());
    }

    #[test]
    fn text_round_trip() {
        let mut dp = ambiguous_dp();
        dp.w = w("0110");
        dp.n0 = 4;
        let text = write_dp(&dp);
        assert_eq!(parse_dp(&text).unwrap(), dp);
        assert!(parse_dp("dp\nf poly 0 1\n").is_err());
    }
}
