//! Explicit machines: block operations, the block expander and weighted-product transducers.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::fst::{run_stream, Fst, StateId};
use crate::poly::{rat, rat_frac};
use crate::seq::{Bit, Chunk, Chunks, Reps, Source, Stream, StreamError, Word};
use crate::weights::{Weight, WeightTuple};

/// The block operations on `⟨f⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BasicOp {
    /// `⟨f⟩ → ⟨a·f⟩`
    ScaleUp(u64),
    /// `⟨a·f⟩ → ⟨f⟩`
    ScaleDown(u64),
    /// `⟨f⟩ → ⟨f(n + a)⟩`
    XShiftDrop(u64),
    /// `⟨f⟩ → ⟨l₀, …, l_{k−1}, f(0), f(1), …⟩`
    XShiftPrepend(Vec<u64>),
    /// `⟨f⟩ → ⟨f + a⟩`
    YShiftAdd(u64),
    /// `⟨f + a⟩ → ⟨f⟩`
    YShiftSub(u64),
    /// `⟨f⟩ → ⟨f(a·n)⟩`
    SubsampleBlocks(u64),
    /// `⟨f⟩ → ⟨a·f(2n) + b·f(2n + 1)⟩`
    MergePair(u64, u64),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstructError {
    #[error("{0} needs a positive parameter")]
    NonPositive(&'static str),
    #[error("weight {index} consumes no values and has non-natural value {value}")]
    NonNaturalConstant { index: usize, value: String },
    #[error("denominator {0} is too large for an explicit machine")]
    TooLarge(String),
    #[error("expander needs equally many prefixes and cycles, at least one (got {ps} and {cs})")]
    ExpanderShape { ps: usize, cs: usize },
    #[error("unknown operation {0:?}")]
    UnknownOp(String),
    #[error("bad parameter {0:?}")]
    BadParameter(String),
}

impl BasicOp {
    pub fn name(&self) -> &'static str {
        match self {
            BasicOp::ScaleUp(_) => "scale-up",
            BasicOp::ScaleDown(_) => "scale-down",
            BasicOp::XShiftDrop(_) => "x-drop",
            BasicOp::XShiftPrepend(_) => "x-prepend",
            BasicOp::YShiftAdd(_) => "y-add",
            BasicOp::YShiftSub(_) => "y-sub",
            BasicOp::SubsampleBlocks(_) => "subsample",
            BasicOp::MergePair(..) => "merge",
        }
    }

    /// The equivalent weight tuple, for the operations that are weighted products.
    pub fn weights(&self) -> Option<WeightTuple> {
        let w = match *self {
            BasicOp::ScaleUp(a) => Weight::ints(&[a as i64, 0]),
            BasicOp::ScaleDown(a) => Weight::new(vec![rat_frac(1, a as i64)], rat(0)).ok()?,
            BasicOp::YShiftAdd(a) => Weight::ints(&[1, a as i64]),
            BasicOp::YShiftSub(a) => Weight::ints(&[1, -(a as i64)]),
            BasicOp::SubsampleBlocks(a) => {
                let mut t = vec![0i64; a as usize + 1];
                t[0] = 1;
                Weight::ints(&t)
            }
            BasicOp::MergePair(a, b) => Weight::ints(&[a as i64, b as i64, 0]),
            BasicOp::XShiftDrop(_) | BasicOp::XShiftPrepend(_) => return None,
        };
        Some(WeightTuple::single(w))
    }
}

impl fmt::Display for BasicOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        match self {
            BasicOp::ScaleUp(a)
            | BasicOp::ScaleDown(a)
            | BasicOp::XShiftDrop(a)
            | BasicOp::YShiftAdd(a)
            | BasicOp::YShiftSub(a)
            | BasicOp::SubsampleBlocks(a) => write!(f, " {a}"),
            BasicOp::MergePair(a, b) => write!(f, " {a} {b}"),
            BasicOp::XShiftPrepend(ls) => ls.iter().try_for_each(|l| write!(f, " {l}")),
        }
    }
}

impl FromStr for BasicOp {
    type Err = ConstructError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        let (name, args) = toks
            .split_first()
            .ok_or_else(|| ConstructError::UnknownOp(String::new()))?;
        let nums = args
            .iter()
            .map(|t| {
                t.parse::<u64>()
                    .map_err(|_| ConstructError::BadParameter(t.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let one = || match nums[..] {
            [a] => Ok(a),
            _ => Err(ConstructError::BadParameter(args.join(" "))),
        };
        Ok(match *name {
            "scale-up" => BasicOp::ScaleUp(one()?),
            "scale-down" => BasicOp::ScaleDown(one()?),
            "x-drop" => BasicOp::XShiftDrop(one()?),
            "x-prepend" => BasicOp::XShiftPrepend(nums),
            "y-add" => BasicOp::YShiftAdd(one()?),
            "y-sub" => BasicOp::YShiftSub(one()?),
            "subsample" => BasicOp::SubsampleBlocks(one()?),
            "merge" => match nums[..] {
                [a, b] => BasicOp::MergePair(a, b),
                _ => return Err(ConstructError::BadParameter(args.join(" "))),
            },
            other => return Err(ConstructError::UnknownOp(other.to_string())),
        })
    }
}

fn one_state(name: &str, zero: Word, one: Word) -> Fst {
    Fst::from_table(name, vec!["q0".into()], 0, vec![[(0, zero), (0, one)]])
}

pub fn build_basic(op: &BasicOp) -> Result<Fst, ConstructError> {
    let name = op.to_string().replace(' ', "_");
    match op {
        BasicOp::ScaleUp(0) => Err(ConstructError::NonPositive("scale-up")),
        BasicOp::ScaleDown(0) => Err(ConstructError::NonPositive("scale-down")),
        BasicOp::SubsampleBlocks(0) => Err(ConstructError::NonPositive("subsample")),
        BasicOp::ScaleUp(a) => Ok(one_state(&name, Word::zeros(*a as usize), Word::block(0))),
        BasicOp::YShiftAdd(a) => Ok(one_state(&name, Word::zeros(1), Word::block(*a as usize))),
        BasicOp::XShiftDrop(a) => {
            let a = *a as usize;
            // states 0..=a count the ones seen, state a+1 copies
            let copy = a + 1;
            let mut trans = Vec::with_capacity(a + 2);
            for i in 0..=a {
                let one = if i < a {
                    (i + 1, Word::empty())
                } else {
                    (copy, Word::block(0))
                };
                trans.push([(i, Word::empty()), one]);
            }
            trans.push([(copy, Word::zeros(1)), (copy, Word::block(0))]);
            let mut labels: Vec<String> = (0..=a).map(|i| format!("skip{i}")).collect();
            labels.push("copy".into());
            Ok(Fst::from_table(name, labels, 0, trans))
        }
        BasicOp::XShiftPrepend(ls) => {
            let mut first = Word::empty();
            for &l in ls {
                first.extend_from(&Word::block(l as usize));
            }
            first.push(Bit::One);
            let trans = vec![
                [(0, Word::empty()), (1, first)],
                [(1, Word::zeros(1)), (1, Word::block(0))],
            ];
            Ok(Fst::from_table(name, vec!["start".into(), "copy".into()], 0, trans))
        }
        _ => {
            let w = op.weights().expect("weighted operation");
            Ok(build_wprod_fst(&w)?.with_name(name))
        }
    }
}

/// Runs a basic operation; `YShiftSub(a)` fails with [`StreamError::BlockTooShort`] on an input
/// block shorter than `a`.
pub fn run_basic(op: &BasicOp, s: &Stream) -> Result<Stream, ConstructError> {
    let m = build_basic(op)?;
    Ok(match op {
        BasicOp::YShiftSub(a) => run_stream(&m, &min_block_guard(s, *a)),
        _ => run_stream(&m, s),
    })
}

/// `s` unchanged, except that a block `1 0^k` with `k < a` raises an error once it is complete.
pub fn min_block_guard(s: &Stream, a: u64) -> Stream {
    Stream::derived(GuardSource {
        inner: s.clone(),
        min: a,
    })
}

#[derive(Debug)]
struct GuardSource {
    inner: Stream,
    min: u64,
}

struct Guard {
    min: BigUint,
    started: bool,
    zeros: BigUint,
    block: u64,
}

impl Guard {
    /// Scans one copy of `w`.
    fn scan(&mut self, w: &Word) -> Result<(), StreamError> {
        let mut run = 0u64;
        for &b in w.iter() {
            match b {
                Bit::Zero => run += 1,
                Bit::One => {
                    if self.started {
                        let len = &self.zeros + run;
                        if len < self.min {
                            return Err(StreamError::BlockTooShort {
                                block: self.block,
                                length: len.to_u64().unwrap_or(u64::MAX),
                                required: self.min.to_u64().unwrap_or(u64::MAX),
                            });
                        }
                        self.block += 1;
                    }
                    self.started = true;
                    self.zeros = BigUint::zero();
                    run = 0;
                }
            }
        }
        self.zeros += run;
        Ok(())
    }

    fn check(&mut self, c: &Chunk) -> Result<(), StreamError> {
        if c.word.is_all_zero() {
            if let Reps::Count(k) = &c.reps {
                self.zeros += k * BigUint::from(c.word.len());
            }
            return Ok(());
        }
        let reps = match &c.reps {
            Reps::Count(k) => k.to_u64().filter(|&k| k <= 64),
            Reps::Forever => None,
        };
        match reps {
            Some(k) => (0..k).try_for_each(|_| self.scan(&c.word)),
            None => {
                // every repetition after the second sees the same block lengths
                self.scan(&c.word)?;
                self.scan(&c.word)?;
                if let Reps::Count(k) = &c.reps {
                    let ones = c.word.count_ones() as u64;
                    let extra = (k - 2u32).to_u64().unwrap_or(u64::MAX);
                    self.block = self.block.saturating_add(ones.saturating_mul(extra));
                }
                Ok(())
            }
        }
    }
}

impl Source for GuardSource {
    fn open(&self) -> Chunks {
        let mut g = Guard {
            min: BigUint::from(self.min),
            started: false,
            zeros: BigUint::zero(),
            block: 0,
        };
        let mut inner = self.inner.chunks();
        let mut failed = false;
        Box::new(std::iter::from_fn(move || {
            if failed {
                return None;
            }
            let c = match inner.next()? {
                Ok(c) => c,
                Err(e) => {
                    failed = true;
                    return Some(Err(e));
                }
            };
            match g.check(&c) {
                Ok(()) => Some(Ok(c)),
                Err(e) => {
                    failed = true;
                    Some(Err(e))
                }
            }
        }))
    }
}

/// The cyclic machine with `q_j: 0 ↦ c_j` and `q_j: 1 ↦ p_{j+1}` (advancing), started in
/// `q_{m−1}`; it maps `∏∏ 1 0^{ψ(i,j)}` to `∏∏ p_j c_j^{ψ(i,j)}`.
pub fn build_block_expander(ps: &[Word], cs: &[Word]) -> Result<Fst, ConstructError> {
    let m = ps.len();
    if m == 0 || cs.len() != m {
        return Err(ConstructError::ExpanderShape { ps: m, cs: cs.len() });
    }
    let trans = (0..m)
        .map(|j| {
            let n = (j + 1) % m;
            [(j, cs[j].clone()), (n, ps[n].clone())]
        })
        .collect();
    let labels = (0..m).map(|j| format!("q{j}")).collect();
    Ok(Fst::from_table("expander", labels, m - 1, trans))
}

/// Integer form of weight `i`: `(a, b, d)` with small `d` and `b`.
struct IntWeight {
    a: Vec<BigUint>,
    b: i64,
    d: i64,
}

fn int_weight(w: &Weight) -> Result<IntWeight, ConstructError> {
    let (a, b, d) = w.integer_form();
    let d = d
        .to_i64()
        .filter(|&d| d <= 1 << 24)
        .ok_or_else(|| ConstructError::TooLarge(d.to_string()))?;
    let b = b
        .to_i64()
        .filter(|b| b.abs() <= 1 << 24)
        .ok_or_else(|| ConstructError::TooLarge(b.to_string()))?;
    Ok(IntWeight { a, b, d })
}

/// Machine for `⟨f⟩ ↦ ⟨α⃗ ⊙ f⟩` with states `q_{i,j}^h`, `min(0, bᵢ) ≤ h < dᵢ`. Weights that
/// consume no values are emitted as fixed blocks while entering the next weight.
pub fn build_wprod_fst(alphas: &WeightTuple) -> Result<Fst, ConstructError> {
    let m = alphas.m();
    let ws = alphas.weights().iter().map(int_weight).collect::<Result<Vec<_>, _>>()?;
    for (index, w) in ws.iter().enumerate() {
        if w.a.is_empty() && (w.b < 0 || w.b % w.d != 0) {
            return Err(ConstructError::NonNaturalConstant {
                index,
                value: alphas.get(index).offset().to_string(),
            });
        }
    }
    let active: Vec<usize> = (0..m).filter(|&i| !ws[i].a.is_empty()).collect();
    if active.is_empty() {
        // a fixed periodic output: emit one period per input 1
        let mut period = Word::empty();
        for w in &ws {
            period.extend_from(&Word::block((w.b / w.d) as usize));
        }
        return Ok(Fst::from_table(
            "wprod",
            vec!["q0".into()],
            0,
            vec![[(0, Word::empty()), (0, period)]],
        ));
    }
    // state numbering
    let mut base = vec![0usize; m];
    let mut total = 0usize;
    for &i in &active {
        base[i] = total;
        let hs = (ws[i].d - ws[i].b.min(0)) as usize;
        total += ws[i].a.len() * hs;
    }
    let id = |i: usize, j: usize, h: i64| -> StateId {
        let lo = ws[i].b.min(0);
        let hs = (ws[i].d - lo) as usize;
        base[i] + j * hs + (h - lo) as usize
    };
    // entering weight i: fixed blocks of constant weights, then `1 0^e` of the next active one
    let enter = |mut i: usize| -> (StateId, Word) {
        let mut out = Word::empty();
        loop {
            let w = &ws[i];
            if w.a.is_empty() {
                out.extend_from(&Word::block((w.b / w.d) as usize));
                i = (i + 1) % m;
                continue;
            }
            let e = w.b.max(0) / w.d;
            out.extend_from(&Word::block(e as usize));
            return (id(i, 0, w.b - e * w.d), out);
        }
    };
    let needs_start = ws[m - 1].a.is_empty();
    let mut trans: Vec<[(StateId, Word); 2]> = Vec::with_capacity(total + needs_start as usize);
    let mut labels = Vec::with_capacity(total + 1);
    for &i in &active {
        let w = &ws[i];
        let k = w.a.len();
        for j in 0..k {
            for h in w.b.min(0)..w.d {
                let sum = BigInt::from(h) + BigInt::from(w.a[j].clone());
                let (e, h2) = if sum.is_negative() {
                    (BigInt::zero(), sum.clone())
                } else {
                    let e = &sum / BigInt::from(w.d);
                    let h2 = &sum - &e * BigInt::from(w.d);
                    (e, h2)
                };
                let e = e.to_usize().expect("zero run fits in memory");
                let zero = (id(i, j, h2.to_i64().expect("small remainder")), Word::zeros(e));
                let one = if j + 1 < k {
                    (id(i, j + 1, h), Word::empty())
                } else {
                    enter((i + 1) % m)
                };
                trans.push([zero, one]);
                labels.push(format!("q{i}.{j}.{h}"));
            }
        }
    }
    let initial = if needs_start {
        let s = trans.len();
        trans.push([(s, Word::empty()), enter(0)]);
        labels.push("start".into());
        s
    } else {
        let last = m - 1;
        id(last, ws[last].a.len() - 1, 0)
    };
    Ok(Fst::from_table("wprod", labels, initial, trans))
}

/// Total state count of [`build_wprod_fst`] without building it.
pub fn wprod_fst_size(alphas: &WeightTuple) -> Option<u128> {
    let mut total: u128 = 0;
    for w in alphas.weights() {
        let (a, b, d) = w.integer_form();
        let lo = if b.is_negative() { b } else { BigInt::zero() };
        let hs = (BigInt::from(d) - lo).to_u128()?;
        total += a.len() as u128 * hs;
    }
    Some(total.max(1))
}
