//! Binary words, lazy infinite sequences and the block encoding `⟨f⟩`.

mod blockfun;
mod spec;
mod stream;
mod word;

pub use blockfun::{BlockFun, BlockFunError, Family, FnNat, NatFun, NotNatural};
pub use spec::{parse_blockfun_spec, parse_seq_spec, SeqSpecError};
pub use stream::{
    blocks_encode, shift_stream, BitIter, Builtin, Chunk, Chunks, Reps, Source, Stream, StreamError, StreamFamily,
};
pub use word::{w, Bit, Word, WordParseError};

use std::collections::VecDeque;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("malformed block prefix: stream does not start with 1")]
    Malformed,
    #[error("insufficient input: finite stream holds only {decoded} complete blocks")]
    InsufficientInput { decoded: usize },
    #[error(transparent)]
    Stream(#[from] StreamError),
}

/// Incremental decoder of `1 0^{f(0)} 1 0^{f(1)} …`; a value is produced only once the next
/// `1` has been read.
pub struct BlockDecoder {
    chunks: Chunks,
    started: bool,
    zeros: BigUint,
    queue: VecDeque<(Word, Reps)>,
    done: bool,
    decoded: usize,
}

impl BlockDecoder {
    pub fn new(s: &Stream) -> Self {
        BlockDecoder {
            chunks: s.chunks(),
            started: false,
            zeros: BigUint::zero(),
            queue: VecDeque::new(),
            done: false,
            decoded: 0,
        }
    }

    fn fail(&mut self, e: DecodeError) -> Option<Result<BigUint, DecodeError>> {
        self.done = true;
        Some(Err(e))
    }
}

impl Iterator for BlockDecoder {
    type Item = Result<BigUint, DecodeError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            let (word, reps) = match self.queue.pop_front() {
                Some(c) => c,
                None => match self.chunks.next() {
                    None => {
                        let decoded = self.decoded;
                        return self.fail(DecodeError::InsufficientInput { decoded });
                    }
                    Some(Err(e)) => return self.fail(e.into()),
                    Some(Ok(c)) => (c.word, c.reps),
                },
            };
            if word.is_all_zero() {
                if !self.started {
                    return self.fail(DecodeError::Malformed);
                }
                match reps {
                    Reps::Count(k) => self.zeros += k * BigUint::from(word.len()),
                    Reps::Forever => {
                        // the current block never terminates
                        let decoded = self.decoded;
                        return self.fail(DecodeError::InsufficientInput { decoded });
                    }
                }
                continue;
            }
            // expand one repetition, keep the rest for later
            let rest = match reps {
                Reps::Count(k) => {
                    let k = k - 1u32;
                    (!k.is_zero()).then_some(Reps::Count(k))
                }
                Reps::Forever => Some(Reps::Forever),
            };
            let mut found: Option<BigUint> = None;
            let mut split = word.len();
            let mut run = 0u64;
            for (i, &b) in word.iter().enumerate() {
                match b {
                    Bit::Zero => {
                        if !self.started {
                            return self.fail(DecodeError::Malformed);
                        }
                        run += 1;
                    }
                    Bit::One => {
                        if self.started {
                            let mut v = std::mem::take(&mut self.zeros);
                            v += run;
                            found = Some(v);
                            split = i;
                            break;
                        }
                        self.started = true;
                    }
                }
            }
            match found {
                Some(v) => {
                    // leave the bits from the terminating 1 onward for the next call
                    self.started = false;
                    if let Some(r) = rest {
                        self.queue.push_front((word.clone(), r));
                    }
                    self.queue.push_front((word.slice(split, word.len()), Reps::one()));
                    self.decoded += 1;
                    return Some(Ok(v));
                }
                None => {
                    self.zeros += run;
                    if let Some(r) = rest {
                        self.queue.push_front((word, r));
                    }
                }
            }
        }
    }
}

/// `[f(0), …, f(n−1)]` from a stream `⟨f⟩·…`.
pub fn blocks_decode(s: &Stream, n_blocks: usize) -> Result<Vec<BigUint>, DecodeError> {
    BlockDecoder::new(s).take(n_blocks).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("empty period in ultimately periodic word")]
pub struct EmptyPeriod;

fn up_bit(u: &Word, v: &Word, i: usize) -> Bit {
    if i < u.len() {
        u[i]
    } else {
        v[(i - u.len()) % v.len()]
    }
}

/// Decides `u1·v1^ω = u2·v2^ω`.
pub fn up_equal(u1: &Word, v1: &Word, u2: &Word, v2: &Word) -> Result<bool, EmptyPeriod> {
    if v1.is_empty() || v2.is_empty() {
        return Err(EmptyPeriod);
    }
    let n = u1.len().max(u2.len()) + v1.len().lcm(&v2.len());
    Ok((0..n).all(|i| up_bit(u1, v1, i) == up_bit(u2, v2, i)))
}

/// First index where `u1·v1^ω` and `u2·v2^ω` differ, if any.
pub fn up_disagreement(u1: &Word, v1: &Word, u2: &Word, v2: &Word) -> Result<Option<usize>, EmptyPeriod> {
    if v1.is_empty() || v2.is_empty() {
        return Err(EmptyPeriod);
    }
    let n = u1.len().max(u2.len()) + v1.len().lcm(&v2.len());
    Ok((0..n).find(|&i| up_bit(u1, v1, i) != up_bit(u2, v2, i)))
}

/// Smallest `(start, period)` such that the word is periodic from `start` on with that period,
/// with `period ≤ max_period` and at least `min_reps` repetitions visible.
pub fn find_eventual_period(bits: &[Bit], max_period: usize, min_reps: usize) -> Option<(usize, usize)> {
    let n = bits.len();
    // the tail of the prefix decides the period; then extend backwards
    (1..=max_period).find_map(|p| {
        if p * min_reps > n {
            return None;
        }
        let mut start = n - p;
        while start > 0 && bits[start - 1] == bits[start - 1 + p] {
            start -= 1;
        }
        (n - start >= p * min_reps).then_some((start, p))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn dec(s: &Stream, n: usize) -> Vec<u64> {
        blocks_decode(s, n)
            .unwrap()
            .iter()
            .map(|v| v.to_u64().unwrap())
            .collect()
    }

    #[test]
    fn decode_examples() {
        assert_eq!(dec(&blocks_encode(&BlockFun::identity()), 4), [0, 1, 2, 3]);
        let ones = Stream::ultimately_periodic(Word::empty(), w("1")).unwrap();
        assert_eq!(dec(&ones, 3), [0, 0, 0]);
        let sq = BlockFun::polynomial([0u32, 0, 1]);
        assert_eq!(dec(&blocks_encode(&sq), 4), [0, 1, 4, 9]);
    }

    #[test]
    fn decode_errors() {
        let z = Stream::ultimately_periodic(Word::empty(), w("0")).unwrap();
        assert_eq!(blocks_decode(&z, 1), Err(DecodeError::Malformed));
        let fin = Stream::finite(w("1101"));
        assert_eq!(
            blocks_decode(&fin, 3),
            Err(DecodeError::InsufficientInput { decoded: 2 })
        );
        let tail = Stream::ultimately_periodic(w("11"), w("0")).unwrap();
        assert_eq!(
            blocks_decode(&tail, 2),
            Err(DecodeError::InsufficientInput { decoded: 1 })
        );
    }

    #[test]
    fn decode_power_chunks_with_ones() {
        let s = Stream::ultimately_periodic(w("1"), w("100")).unwrap();
        assert_eq!(dec(&s, 5), [0, 2, 2, 2, 2]);
    }

    #[test]
    fn decode_huge_blocks() {
        let e = BlockFun::exponential(2u32, 1u32).unwrap();
        let v = blocks_decode(&blocks_encode(&e), 201).unwrap();
        assert_eq!(v[200], BigUint::from(1u32) << 200usize);
    }

    #[test]
    fn up_equal_examples() {
        assert!(up_equal(&Word::empty(), &w("01"), &w("0"), &w("10")).unwrap());
        assert!(!up_equal(&Word::empty(), &w("0"), &Word::empty(), &w("1")).unwrap());
        assert!(up_equal(&Word::empty(), &w("0101"), &Word::empty(), &w("01")).unwrap());
        assert_eq!(
            up_equal(&Word::empty(), &Word::empty(), &Word::empty(), &w("1")),
            Err(EmptyPeriod)
        );
    }

    #[test]
    fn eventual_period() {
        let s = Stream::ultimately_periodic(w("110"), w("011")).unwrap();
        let p = s.prefix(60).unwrap();
        assert_eq!(find_eventual_period(&p, 10, 4), Some((3, 3)));
        let t = Stream::builtin(Builtin::ThueMorse).prefix(512).unwrap();
        assert_eq!(find_eventual_period(&t, 64, 4), None);
    }
}
