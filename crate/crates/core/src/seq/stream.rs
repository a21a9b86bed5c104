//! Lazily evaluated binary sequences.
//!
//! A [`Stream`] is an immutable description; every call to [`Stream::chunks`] opens a fresh
//! cursor. Cursors produce [`Chunk`]s, i.e. powers `u^k` of finite words, so that blocks with
//! astronomically many zeros (`⟨2ⁿ⟩` deep into the sequence) never have to be materialized.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::blockfun::{BlockFun, NatFun, NotNatural};
use super::word::{Bit, Word};

/// Repetition count of a chunk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reps {
    Count(BigUint),
    Forever,
}

impl Reps {
    pub fn one() -> Self {
        Reps::Count(BigUint::one())
    }

    pub fn is_forever(&self) -> bool {
        matches!(self, Reps::Forever)
    }
}

/// `word^reps`; `word` is never empty and a finite `reps` is never zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chunk {
    pub word: Word,
    pub reps: Reps,
}

impl Chunk {
    pub fn once(word: Word) -> Self {
        debug_assert!(!word.is_empty());
        Chunk {
            word,
            reps: Reps::one(),
        }
    }

    pub fn power(word: Word, reps: BigUint) -> Self {
        debug_assert!(!word.is_empty() && !reps.is_zero());
        Chunk {
            word,
            reps: Reps::Count(reps),
        }
    }

    pub fn forever(word: Word) -> Self {
        debug_assert!(!word.is_empty());
        Chunk {
            word,
            reps: Reps::Forever,
        }
    }

    /// Number of bits, `None` if infinite.
    pub fn bit_len(&self) -> Option<BigUint> {
        match &self.reps {
            Reps::Count(k) => Some(k * BigUint::from(self.word.len())),
            Reps::Forever => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StreamError {
    #[error("stream is finite: only {available} bits available")]
    Exhausted { available: u64 },
    #[error("look-ahead transducer is stuck at input position {position}")]
    Stuck { position: u64 },
    #[error(transparent)]
    NotNatural(#[from] NotNatural),
    #[error("block {block} has length {length}, shorter than the required {required}")]
    BlockTooShort { block: u64, length: u64, required: u64 },
    #[error("no output after consuming {input_chunks} input chunks")]
    Stalled { input_chunks: u64 },
    #[error("non-natural exponent at block ({i}, {j}): {value}")]
    NonNaturalExponent { i: u64, j: usize, value: String },
}

pub type Chunks = Box<dyn Iterator<Item = Result<Chunk, StreamError>> + Send>;

/// A producer of chunk cursors.
pub trait Source: Send + Sync + fmt::Debug {
    fn open(&self) -> Chunks;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    ThueMorse,
    PeriodDoubling,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::ThueMorse => "thue-morse",
            Builtin::PeriodDoubling => "period-doubling",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "thue-morse" => Some(Builtin::ThueMorse),
            "period-doubling" => Some(Builtin::PeriodDoubling),
            _ => None,
        }
    }

    pub fn bit(self, n: u64) -> Bit {
        match self {
            Builtin::ThueMorse => Bit::from(n.count_ones() % 2 == 1),
            Builtin::PeriodDoubling => Bit::from((n + 1).trailing_zeros().is_multiple_of(2)),
        }
    }
}

/// What is known about how a stream was made.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StreamFamily {
    UltimatelyPeriodic { prefix: Word, period: Word },
    Blocks(BlockFun),
    Builtin(Builtin),
    Finite(Word),
    Derived,
}

#[derive(Clone)]
pub struct Stream {
    source: Arc<dyn Source>,
    family: StreamFamily,
}

impl fmt::Debug for Stream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Stream")
            .field("family", &self.family)
            .finish_non_exhaustive()
    }
}

impl Stream {
    pub fn from_source(source: Arc<dyn Source>, family: StreamFamily) -> Self {
        Stream { source, family }
    }

    pub fn derived(source: impl Source + 'static) -> Self {
        Self::from_source(Arc::new(source), StreamFamily::Derived)
    }

    /// `u · v^ω`. Returns `None` for an empty period.
    pub fn ultimately_periodic(prefix: Word, period: Word) -> Option<Self> {
        if period.is_empty() {
            return None;
        }
        Some(Self::from_source(
            Arc::new(UpSource {
                prefix: prefix.clone(),
                period: period.clone(),
            }),
            StreamFamily::UltimatelyPeriodic { prefix, period },
        ))
    }

    pub fn finite(word: Word) -> Self {
        Self::from_source(Arc::new(FiniteSource(word.clone())), StreamFamily::Finite(word))
    }

    pub fn builtin(b: Builtin) -> Self {
        Self::from_source(Arc::new(BuiltinSource(b)), StreamFamily::Builtin(b))
    }

    /// `∏ 1 0^{f(i)}` for a derived function; a non-natural value surfaces as a stream error.
    pub fn blocks_of(f: Arc<dyn NatFun>) -> Self {
        Self::derived(BlocksSource { f })
    }

    /// `w · s`.
    pub fn prepend(word: Word, s: &Stream) -> Self {
        if word.is_empty() {
            return s.clone();
        }
        let family = match &s.family {
            StreamFamily::UltimatelyPeriodic { prefix, period } => StreamFamily::UltimatelyPeriodic {
                prefix: word.concat(prefix),
                period: period.clone(),
            },
            StreamFamily::Finite(x) => StreamFamily::Finite(word.concat(x)),
            _ => StreamFamily::Derived,
        };
        Self::from_source(Arc::new(PrependSource { word, rest: s.clone() }), family)
    }

    pub fn family(&self) -> &StreamFamily {
        &self.family
    }

    pub fn is_known_finite(&self) -> bool {
        matches!(self.family, StreamFamily::Finite(_))
    }

    pub fn chunks(&self) -> Chunks {
        self.source.open()
    }

    pub fn bits(&self) -> BitIter {
        BitIter::new(self.chunks())
    }

    /// First `n` bits; fails if the stream ends earlier or errors.
    pub fn prefix(&self, n: usize) -> Result<Word, StreamError> {
        let mut out = Word::empty();
        let mut bits = self.bits();
        while out.len() < n {
            match bits.next() {
                Some(Ok(b)) => out.push(b),
                Some(Err(e)) => return Err(e),
                None => {
                    return Err(StreamError::Exhausted {
                        available: out.len() as u64,
                    })
                }
            }
        }
        Ok(out)
    }

    /// Up to `n` bits, stopping early at the end of a finite stream.
    pub fn prefix_upto(&self, n: usize) -> Result<Word, StreamError> {
        let mut out = Word::empty();
        for b in self.bits().take(n) {
            out.push(b?);
        }
        Ok(out)
    }

    pub fn bit(&self, n: usize) -> Result<Bit, StreamError> {
        self.prefix(n + 1).map(|w| w[n])
    }
}

/// `⟨f⟩ = 1 0^{f(0)} 1 0^{f(1)} …`.
pub fn blocks_encode(f: &BlockFun) -> Stream {
    Stream::from_source(
        Arc::new(BlocksSource { f: Arc::new(f.clone()) }),
        StreamFamily::Blocks(f.clone()),
    )
}

/// `result(n) = s(n + k)`.
pub fn shift_stream(s: &Stream, k: u64) -> Stream {
    if k == 0 {
        return s.clone();
    }
    let family = match &s.family {
        StreamFamily::UltimatelyPeriodic { prefix, period } => {
            let (p, v) = shift_up(prefix, period, k);
            StreamFamily::UltimatelyPeriodic { prefix: p, period: v }
        }
        StreamFamily::Finite(x) => {
            let k = (k as usize).min(x.len());
            StreamFamily::Finite(x.slice(k, x.len()))
        }
        _ => StreamFamily::Derived,
    };
    Stream::from_source(
        Arc::new(SkipSource {
            inner: s.clone(),
            skip: k,
        }),
        family,
    )
}

fn shift_up(prefix: &Word, period: &Word, k: u64) -> (Word, Word) {
    let k = k as usize;
    if k <= prefix.len() {
        (prefix.slice(k, prefix.len()), period.clone())
    } else {
        let r = (k - prefix.len()) % period.len();
        let rotated = period.slice(r, period.len()).concat(&period.slice(0, r));
        (Word::empty(), rotated)
    }
}

#[derive(Debug)]
struct UpSource {
    prefix: Word,
    period: Word,
}

impl Source for UpSource {
    fn open(&self) -> Chunks {
        let mut v = Vec::with_capacity(2);
        if !self.prefix.is_empty() {
            v.push(Ok(Chunk::once(self.prefix.clone())));
        }
        v.push(Ok(Chunk::forever(self.period.clone())));
        Box::new(v.into_iter())
    }
}

#[derive(Debug)]
struct FiniteSource(Word);

impl Source for FiniteSource {
    fn open(&self) -> Chunks {
        if self.0.is_empty() {
            Box::new(std::iter::empty())
        } else {
            Box::new(std::iter::once(Ok(Chunk::once(self.0.clone()))))
        }
    }
}

#[derive(Debug)]
struct BuiltinSource(Builtin);

impl Source for BuiltinSource {
    fn open(&self) -> Chunks {
        let b = self.0;
        Box::new((0u64..).map(move |k| {
            let base = k * 64;
            Ok(Chunk::once((base..base + 64).map(|n| b.bit(n)).collect()))
        }))
    }
}

/// Blocks up to this length are emitted as a single literal word.
const LITERAL_BLOCK: u64 = 64;

#[derive(Debug)]
struct BlocksSource {
    f: Arc<dyn NatFun>,
}

impl Source for BlocksSource {
    fn open(&self) -> Chunks {
        let f = self.f.clone();
        let mut n = 0u64;
        let mut pending: Option<Chunk> = None;
        let mut failed = false;
        Box::new(std::iter::from_fn(move || {
            if let Some(c) = pending.take() {
                return Some(Ok(c));
            }
            if failed {
                return None;
            }
            let v = match f.try_eval(n) {
                Ok(v) => v,
                Err(e) => {
                    failed = true;
                    return Some(Err(e.into()));
                }
            };
            n += 1;
            match v.to_u64() {
                Some(small) if small <= LITERAL_BLOCK => Some(Ok(Chunk::once(Word::block(small as usize)))),
                _ => {
                    pending = Some(Chunk::power(Word::zeros(1), v));
                    Some(Ok(Chunk::once(Word::block(0))))
                }
            }
        }))
    }
}

#[derive(Debug)]
struct PrependSource {
    word: Word,
    rest: Stream,
}

impl Source for PrependSource {
    fn open(&self) -> Chunks {
        Box::new(std::iter::once(Ok(Chunk::once(self.word.clone()))).chain(self.rest.chunks()))
    }
}

#[derive(Debug)]
struct SkipSource {
    inner: Stream,
    skip: u64,
}

impl Source for SkipSource {
    fn open(&self) -> Chunks {
        let mut inner = self.inner.chunks();
        let mut left = BigUint::from(self.skip);
        let mut done_skipping = false;
        let mut pending: Option<Chunk> = None;
        Box::new(std::iter::from_fn(move || {
            if let Some(c) = pending.take() {
                return Some(Ok(c));
            }
            if done_skipping {
                return inner.next();
            }
            loop {
                let chunk = match inner.next()? {
                    Ok(c) => c,
                    Err(e) => return Some(Err(e)),
                };
                let len = BigUint::from(chunk.word.len());
                let total = chunk.bit_len();
                if let Some(t) = &total {
                    if *t <= left {
                        left -= t;
                        if left.is_zero() {
                            done_skipping = true;
                            return inner.next();
                        }
                        continue;
                    }
                }
                // the remaining skip ends inside this chunk
                let (whole, part) = left.div_rem(&len);
                let part = part.to_usize().expect("offset below word length");
                done_skipping = true;
                let rest_reps = match &chunk.reps {
                    Reps::Count(k) => {
                        let r = k - &whole - BigUint::one();
                        (!r.is_zero()).then_some(Reps::Count(r))
                    }
                    Reps::Forever => Some(Reps::Forever),
                };
                let tail = chunk.word.slice(part, chunk.word.len());
                let remainder = rest_reps.map(|reps| Chunk {
                    word: chunk.word.clone(),
                    reps,
                });
                if tail.is_empty() {
                    return remainder.map(Ok).or_else(|| inner.next());
                }
                pending = remainder;
                return Some(Ok(Chunk::once(tail)));
            }
        }))
    }
}

/// Bit-level view of a chunk cursor.
pub struct BitIter {
    chunks: Chunks,
    word: Word,
    pos: usize,
    reps_left: Reps,
    finished: bool,
}

impl BitIter {
    pub fn new(chunks: Chunks) -> Self {
        BitIter {
            chunks,
            word: Word::empty(),
            pos: 0,
            reps_left: Reps::Count(BigUint::zero()),
            finished: false,
        }
    }
}

impl Iterator for BitIter {
    type Item = Result<Bit, StreamError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if self.finished {
                return None;
            }
            if self.pos < self.word.len() {
                let b = self.word[self.pos];
                self.pos += 1;
                return Some(Ok(b));
            }
            // word exhausted: next repetition or next chunk
            let more = match &mut self.reps_left {
                Reps::Forever => true,
                Reps::Count(k) => {
                    if k.is_zero() {
                        false
                    } else {
                        *k -= 1u32;
                        true
                    }
                }
            };
            if more && !self.word.is_empty() {
                self.pos = 0;
                continue;
            }
            match self.chunks.next() {
                None => {
                    self.finished = true;
                    return None;
                }
                Some(Err(e)) => {
                    self.finished = true;
                    return Some(Err(e));
                }
                Some(Ok(c)) => {
                    self.word = c.word;
                    self.pos = 0;
                    self.reps_left = match c.reps {
                        Reps::Count(k) => Reps::Count(k - 1u32),
                        Reps::Forever => Reps::Forever,
                    };
                }
            }
        }
    }
}
