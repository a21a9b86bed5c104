//! Reduction chains between block sequences: the squares chain, the exponential chain,
//! single-weight projection and the transduct-to-squares pipeline.

mod pipeline;

pub use pipeline::{atom_witness, looks_ultimately_periodic, AtomWitness, PERIOD_SCAN};

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::construct::{build_basic, min_block_guard, BasicOp, ConstructError};
use crate::fst::{compose_all, run_stream, Fst};
use crate::lookahead::LookaheadError;
use crate::normalize::NormalizeError;
use crate::poly::{rat, Polynomial};
use crate::seq::{blocks_decode, shift_stream, BlockFun, Family, FnNat, NatFun, Stream, Word};
use crate::weights::{wprod_unzip, SpiralError, Weight, WeightTuple};

/// Largest prefix a composed chain may drop with an explicit counter machine.
pub const DROP_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DegreeError {
    #[error("all weights are constant")]
    AllConstant,
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("value too large: {0}")]
    TooLarge(String),
    #[error("the transduct is ultimately periodic: {0}")]
    UltimatelyPeriodic(String),
    #[error("expected a polynomial of degree 2, got {0}")]
    NotQuadratic(String),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Spiral(#[from] SpiralError),
    #[error(transparent)]
    Lookahead(#[from] LookaheadError),
}

#[derive(Clone, Debug)]
pub enum StepKind {
    Machine(Fst),
    /// A machine whose input blocks must have length at least the bound.
    Guarded(Fst, u64),
    /// Drops a prefix of the given number of bits.
    DropBits(u64),
}

#[derive(Clone, Debug)]
pub struct ChainStep {
    pub desc: String,
    pub kind: StepKind,
    /// Block function the output should encode, when known.
    pub expect: Option<Arc<dyn NatFun>>,
}

impl ChainStep {
    pub fn machine(desc: impl Into<String>, fst: Fst) -> Self {
        ChainStep {
            desc: desc.into(),
            kind: StepKind::Machine(fst),
            expect: None,
        }
    }

    pub fn basic(op: &BasicOp) -> Result<Self, DegreeError> {
        let fst = build_basic(op)?;
        let kind = match op {
            BasicOp::YShiftSub(a) => StepKind::Guarded(fst, *a),
            _ => StepKind::Machine(fst),
        };
        Ok(ChainStep {
            desc: op.to_string(),
            kind,
            expect: None,
        })
    }

    pub fn expecting(mut self, f: Arc<dyn NatFun>) -> Self {
        self.expect = Some(f);
        self
    }

    pub fn states(&self) -> u64 {
        match &self.kind {
            StepKind::Machine(m) | StepKind::Guarded(m, _) => m.num_states() as u64,
            StepKind::DropBits(l) => l + 1,
        }
    }

    pub fn apply(&self, s: &Stream) -> Stream {
        match &self.kind {
            StepKind::Machine(m) => run_stream(m, s),
            StepKind::Guarded(m, a) => run_stream(m, &min_block_guard(s, *a)),
            StepKind::DropBits(l) => shift_stream(s, *l),
        }
    }

    /// The step as a plain machine (guards are dropped).
    pub fn to_fst(&self) -> Result<Fst, DegreeError> {
        match &self.kind {
            StepKind::Machine(m) | StepKind::Guarded(m, _) => Ok(m.clone()),
            StepKind::DropBits(l) if *l <= DROP_LIMIT => Ok(drop_machine(*l as usize)),
            StepKind::DropBits(l) => Err(DegreeError::TooLarge(format!("dropping {l} bits"))),
        }
    }
}

fn drop_machine(l: usize) -> Fst {
    let mut trans = Vec::with_capacity(l + 1);
    for i in 0..l {
        trans.push([(i + 1, Word::empty()), (i + 1, Word::empty())]);
    }
    trans.push([(l, Word::zeros(1)), (l, Word::block(0))]);
    let labels = (0..=l).map(|i| format!("d{i}")).collect();
    Fst::from_table(format!("drop{l}"), labels, 0, trans)
}

/// A chain of transductions from `source` to `⟨target⟩`.
#[derive(Clone, Debug)]
pub struct ReductionChain {
    pub steps: Vec<ChainStep>,
    pub source_spec: String,
    pub target_spec: String,
    pub source: Stream,
    pub target: Arc<dyn NatFun>,
}

impl ReductionChain {
    /// Runs the steps one after another.
    pub fn apply(&self, s: &Stream) -> Stream {
        self.steps.iter().fold(s.clone(), |s, step| step.apply(&s))
    }

    pub fn output(&self) -> Stream {
        self.apply(&self.source)
    }

    pub fn composed(&self) -> Result<Fst, DegreeError> {
        let ms = self
            .steps
            .iter()
            .map(ChainStep::to_fst)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(compose_all(&ms))
    }

    /// Decoded output of the composed machine on the source.
    pub fn run_composed(&self, blocks: usize) -> Result<Vec<BigUint>, DegreeError> {
        let m = self.composed()?;
        blocks_decode(&run_stream(&m, &self.source), blocks)
            .map_err(|e| DegreeError::BadParameter(format!("decoding the composed output: {e}")))
    }

    pub fn expected(&self, blocks: usize) -> Vec<BigUint> {
        (0..blocks as u64)
            .map(|n| self.target.try_eval(n).expect("target is natural"))
            .collect()
    }

    /// Staged check: every intermediate is decoded, compared with its expected function when
    /// known, and the final output is compared with the target.
    pub fn verify(&self, blocks: usize) -> ChainReport {
        let mut s = self.source.clone();
        let mut steps = Vec::with_capacity(self.steps.len());
        for (i, step) in self.steps.iter().enumerate() {
            s = step.apply(&s);
            let (decoded, ok) = match &step.expect {
                Some(f) => match blocks_decode(&s, blocks) {
                    Ok(v) => {
                        let ok = v
                            .iter()
                            .enumerate()
                            .all(|(n, x)| f.try_eval(n as u64).as_ref() == Ok(x));
                        (Some(v), ok)
                    }
                    Err(_) => (None, false),
                },
                None => (None, s.prefix(64).is_ok()),
            };
            steps.push(StepReport {
                index: i + 1,
                desc: step.desc.clone(),
                states: step.states(),
                blocks: decoded,
                ok,
            });
        }
        let expected = self.expected(blocks);
        let final_blocks = blocks_decode(&s, blocks).unwrap_or_default();
        let ok = final_blocks == expected && steps.iter().all(|r| r.ok);
        ChainReport {
            source: self.source_spec.clone(),
            target: self.target_spec.clone(),
            steps,
            final_blocks,
            expected,
            ok,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepReport {
    pub index: usize,
    pub desc: String,
    pub states: u64,
    pub blocks: Option<Vec<BigUint>>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainReport {
    pub source: String,
    pub target: String,
    pub steps: Vec<StepReport>,
    pub final_blocks: Vec<BigUint>,
    pub expected: Vec<BigUint>,
    pub ok: bool,
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn join(v: &[BigUint]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

impl fmt::Display for ChainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "source {}", self.source)?;
        writeln!(f, "target {}", self.target)?;
        for s in &self.steps {
            writeln!(f, "step {} {} states={} {}", s.index, s.desc, s.states, verdict(s.ok))?;
            if let Some(b) = &s.blocks {
                writeln!(f, "  blocks {}", join(b))?;
            }
        }
        write!(f, "final blocks: {} {}", join(&self.final_blocks), verdict(self.ok))
    }
}

fn poly(c: u64, b: u64, a: u64) -> Arc<dyn NatFun> {
    Arc::new(BlockFun::polynomial([c, b, a]))
}

fn checked(x: Option<u64>, what: &str) -> Result<u64, DegreeError> {
    x.ok_or_else(|| DegreeError::TooLarge(what.to_string()))
}

pub(crate) fn squares_steps(a: u64, b: u64, c: u64) -> Result<Vec<ChainStep>, DegreeError> {
    if a == 0 {
        return Err(DegreeError::BadParameter(
            "the leading coefficient must be positive".into(),
        ));
    }
    let (mut a, mut b) = (a, b);
    let mut steps = Vec::new();
    let mut push = |op: BasicOp, f: Arc<dyn NatFun>| -> Result<(), DegreeError> {
        steps.push(ChainStep::basic(&op)?.expecting(f));
        Ok(())
    };
    if c > 0 {
        push(BasicOp::YShiftSub(c), poly(0, b, a))?;
    }
    if 2 * a < b {
        let d = b.div_ceil(2 * a);
        a = checked(a.checked_mul(d * d), "a·d²")?;
        b *= d;
        push(BasicOp::SubsampleBlocks(d), poly(0, b, a))?;
    }
    let a_b = checked(a.checked_add(b), "a + b")?;
    let lin = checked(a_b.checked_add(a), "2a + b")?;
    push(BasicOp::XShiftDrop(1), poly(a_b, lin, a))?;
    push(BasicOp::YShiftSub(a_b), poly(0, lin, a))?;
    let a8 = checked(a.checked_mul(a).and_then(|x| x.checked_mul(8)), "8a²")?;
    let e = checked((2 * a - b).checked_mul(3 * a + b), "(2a − b)(3a + b)")?;
    push(BasicOp::MergePair(b, 2 * a - b), poly(e, 2 * a8, a8))?;
    if e > 0 {
        push(BasicOp::YShiftSub(e), poly(0, 2 * a8, a8))?;
    }
    push(BasicOp::YShiftAdd(a8), poly(a8, 2 * a8, a8))?;
    push(BasicOp::ScaleDown(a8), poly(1, 2, 1))?;
    push(BasicOp::XShiftPrepend(vec![0]), poly(0, 0, 1))?;
    Ok(steps)
}

/// `⟨an² + bn + c⟩ → ⟨n²⟩` by basic operations.
pub fn squares_chain(a: u64, b: u64, c: u64) -> Result<ReductionChain, DegreeError> {
    let f = BlockFun::polynomial([c, b, a]);
    Ok(ReductionChain {
        steps: squares_steps(a, b, c)?,
        source_spec: format!("blocks {f}"),
        target_spec: "blocks poly 0 0 1".into(),
        source: Stream::blocks_of(Arc::new(f)),
        target: poly(0, 0, 1),
    })
}

fn pow2(k: u64) -> Result<BigUint, DegreeError> {
    let k = u32::try_from(k).map_err(|_| DegreeError::TooLarge(format!("2^{k}")))?;
    Ok(BigUint::one() << k)
}

/// `⟨2^{nk}⟩ → ⟨2^{2nk}⟩`.
pub fn exp_chain(k: u64) -> Result<ReductionChain, DegreeError> {
    if k == 0 {
        return Err(DegreeError::BadParameter("k must be positive".into()));
    }
    let f = BlockFun::exponential(pow2(k)?, 1u32).expect("base ≥ 2");
    let g = BlockFun::exponential(pow2(2 * k)?, 1u32).expect("base ≥ 2");
    let step = ChainStep::basic(&BasicOp::SubsampleBlocks(2))?.expecting(Arc::new(g.clone()));
    Ok(ReductionChain {
        steps: vec![step],
        source_spec: format!("blocks {f}"),
        target_spec: format!("blocks {g}"),
        source: Stream::blocks_of(Arc::new(f)),
        target: Arc::new(g),
    })
}

/// `⟨s·2^{nk} + b⟩ → ⟨2^{nk}⟩`.
pub fn exp_scale_chain(k: u64, s: u64, b: u64) -> Result<ReductionChain, DegreeError> {
    if k == 0 || s == 0 {
        return Err(DegreeError::BadParameter("k and the scale must be positive".into()));
    }
    let base = pow2(k)?;
    let g = BlockFun::exponential(base.clone(), 1u32).expect("base ≥ 2");
    let src = {
        let base = base.clone();
        move |n: u64| BigUint::from(s) * base.pow(n as u32) + b
    };
    let mut steps = Vec::new();
    if b > 0 {
        let scaled = BlockFun::exponential(base.clone(), s).expect("base ≥ 2");
        steps.push(ChainStep::basic(&BasicOp::YShiftSub(b))?.expecting(Arc::new(scaled)));
    }
    if s > 1 {
        steps.push(ChainStep::basic(&BasicOp::ScaleDown(s))?.expecting(Arc::new(g.clone())));
    }
    Ok(ReductionChain {
        steps,
        source_spec: format!("blocks {s}·{base}^n + {b}"),
        target_spec: format!("blocks {g}"),
        source: Stream::blocks_of(Arc::new(FnNat(src))),
        target: Arc::new(g),
    })
}

/// A single weight `β` and the machine `⟨α⃗ ⊙ h⟩ → ⟨β ⊙ h⟩` keeping the blocks `i, i + m, …`.
#[derive(Clone, Debug)]
pub struct Projection {
    pub index: usize,
    pub beta: Weight,
    pub machine: Fst,
    pub n0: u64,
}

impl Projection {
    /// `⟨β⟩ ⊙ S^{n₀} f`.
    pub fn fun(&self, f: &BlockFun) -> crate::weights::WprodFun {
        crate::weights::WprodFun::of_blockfun(WeightTuple::single(self.beta.clone()), &f.shifted(self.n0))
    }
}

pub fn one_weight_project(alphas: &WeightTuple, n0: u64) -> Result<Projection, DegreeError> {
    let m = alphas.m();
    let i = (0..m)
        .find(|&i| !alphas.get(i).is_constant())
        .ok_or(DegreeError::AllConstant)?;
    let beta = wprod_unzip(alphas).swap_remove(i);
    let mut ms = Vec::new();
    if i > 0 {
        ms.push(build_basic(&BasicOp::XShiftDrop(i as u64))?);
    }
    if m > 1 {
        ms.push(build_basic(&BasicOp::SubsampleBlocks(m as u64))?);
    }
    Ok(Projection {
        index: i,
        beta,
        machine: compose_all(&ms),
        n0,
    })
}

/// `q(n) = b + Σⱼ aⱼ·p(n₀ + nk + j)` for `α = (a₀, …, a_{k−1} | b)`.
pub fn poly_transduct_normalize(p: &Polynomial, alpha: &Weight, n0: u64) -> Polynomial {
    let k = rat(alpha.k() as i64);
    let mut q = Polynomial::constant(alpha.offset().clone());
    for (j, a) in alpha.coeffs().iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let term = p.compose_affine(&k, &rat((n0 + j as u64) as i64)).scale(a);
        q = &q + &term;
    }
    assert_eq!(q.degree(), p.degree(), "degree is preserved");
    q
}

/// The polynomial of a polynomial block function, shift included.
pub fn blockfun_polynomial(f: &BlockFun) -> Option<Polynomial> {
    match &f.family {
        Family::Polynomial(c) => Some(Polynomial::from_naturals(c).compose_affine(&rat(1), &rat(f.shift as i64))),
        _ => None,
    }
}

/// `D·q` with `D` the least common denominator of the coefficients.
pub fn clear_denominators(q: &Polynomial) -> (BigUint, Polynomial) {
    let d = q
        .coeffs()
        .iter()
        .fold(num_bigint::BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let scaled = q.scale(&crate::poly::Rational::from_integer(d.clone()));
    (d.to_biguint().expect("positive"), scaled)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Growth {
    Zero,
    Poly(usize),
    Exp,
}

fn growth(f: &BlockFun) -> (Growth, BigUint) {
    match &f.family {
        Family::Polynomial(c) => match c.iter().rposition(|x| !x.is_zero()) {
            None => (Growth::Zero, BigUint::zero()),
            Some(d) => (Growth::Poly(d), BigUint::zero()),
        },
        Family::Exponential { base, .. } => (Growth::Exp, base.clone()),
        Family::FloorDiv(_) => (Growth::Poly(1), BigUint::zero()),
        Family::TableThenTail { tail, .. } => growth(tail),
    }
}

/// Whether `g ∈ o(f)`: for every `a`, eventually `f(n) ≥ a·g(n)`.
pub fn growth_dominates(f: &BlockFun, g: &BlockFun) -> bool {
    match (growth(f), growth(g)) {
        (_, (Growth::Zero, _)) => true,
        ((Growth::Zero, _), _) => false,
        ((Growth::Exp, _), (Growth::Poly(_), _)) => true,
        ((Growth::Poly(_), _), (Growth::Exp, _)) => false,
        ((Growth::Poly(d), _), (Growth::Poly(e), _)) => d > e,
        ((Growth::Exp, b), (Growth::Exp, c)) => b > c,
    }
}
