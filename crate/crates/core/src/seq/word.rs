use std::fmt;
use std::ops::{Deref, Index};
use std::str::FromStr;

/// A binary symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Bit {
    Zero = 0,
    One = 1,
}

impl Bit {
    pub const ALL: [Bit; 2] = [Bit::Zero, Bit::One];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_char(c: char) -> Option<Bit> {
        match c {
            '0' => Some(Bit::Zero),
            '1' => Some(Bit::One),
            _ => None,
        }
    }

    #[inline]
    pub fn as_char(self) -> char {
        match self {
            Bit::Zero => '0',
            Bit::One => '1',
        }
    }
}

impl From<bool> for Bit {
    fn from(b: bool) -> Self {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A finite binary word. The empty word is written `-` in textual formats.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Bit>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid bit {found:?} in word {word:?}")]
pub struct WordParseError {
    pub word: String,
    pub found: char,
}

impl Word {
    pub const fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_bits(bits: Vec<Bit>) -> Self {
        Word(bits)
    }

    /// `1 0^n`.
    pub fn block(n: usize) -> Self {
        let mut w = Vec::with_capacity(n + 1);
        w.push(Bit::One);
        w.resize(n + 1, Bit::Zero);
        Word(w)
    }

    pub fn zeros(n: usize) -> Self {
        Word(vec![Bit::Zero; n])
    }

    pub fn bits(&self) -> &[Bit] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<Bit> {
        self.0
    }

    pub fn push(&mut self, b: Bit) {
        self.0.push(b);
    }

    pub fn extend_from(&mut self, other: &[Bit]) {
        self.0.extend_from_slice(other);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn pow(&self, n: usize) -> Word {
        Word(self.0.repeat(n))
    }

    pub fn clear(&mut self) {
        self.0.clear();
    }

    pub fn truncate(&mut self, n: usize) {
        self.0.truncate(n);
    }

    pub fn slice(&self, from: usize, to: usize) -> Word {
        Word(self.0[from..to].to_vec())
    }

    pub fn suffix(&self, len: usize) -> Word {
        Word(self.0[self.len() - len..].to_vec())
    }

    pub fn is_prefix_of(&self, other: &[Bit]) -> bool {
        other.starts_with(&self.0)
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == Bit::One).count()
    }

    pub fn is_all_zero(&self) -> bool {
        self.0.iter().all(|&b| b == Bit::Zero)
    }

    /// Textual form used by the file formats: `-` for the empty word.
    pub fn to_token(&self) -> String {
        if self.is_empty() {
            "-".to_string()
        } else {
            self.to_string()
        }
    }

    pub fn parse_token(s: &str) -> Result<Word, WordParseError> {
        if s == "-" {
            Ok(Word::empty())
        } else {
            s.parse()
        }
    }
}

impl Deref for Word {
    type Target = [Bit];
    fn deref(&self) -> &[Bit] {
        &self.0
    }
}

impl Index<usize> for Word {
    type Output = Bit;
    fn index(&self, i: usize) -> &Bit {
        &self.0[i]
    }
}

impl From<&[Bit]> for Word {
    fn from(bits: &[Bit]) -> Self {
        Word(bits.to_vec())
    }
}

impl FromIterator<Bit> for Word {
    fn from_iter<I: IntoIterator<Item = Bit>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl FromStr for Word {
    type Err = WordParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| {
                Bit::from_char(c).ok_or_else(|| WordParseError {
                    word: s.to_string(),
                    found: c,
                })
            })
            .collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{}", b.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "ε")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Shorthand for tests and literals: panics on a non-binary character.
pub fn w(s: &str) -> Word {
    Word::parse_token(s).expect("binary literal")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let x: Word = "0110".parse().unwrap();
        assert_eq!(x.len(), 4);
        assert_eq!(x.to_string(), "0110");
        assert_eq!(Word::parse_token("-").unwrap(), Word::empty());
        assert_eq!(Word::empty().to_token(), "-");
        assert!("012".parse::<Word>().is_err());
    }

    #[test]
    fn block_and_suffix() {
        assert_eq!(Word::block(3), w("1000"));
        assert_eq!(w("10110").suffix(2), w("10"));
        assert_eq!(w("01").pow(3), w("010101"));
    }
}
