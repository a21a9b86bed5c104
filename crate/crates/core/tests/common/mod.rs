#![allow(dead_code)]

use std::sync::Arc;

use num_bigint::BigUint;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use fstdeg::fst::{run_stream, Fst};
use fstdeg::lookahead::{LookaheadFst, Rule};
use fstdeg::normalize::DoubleProduct;
use fstdeg::seq::{blocks_decode, Bit, BlockFun, NatFun, Stream, Word};
use fstdeg::weights::{Weight, WeightTuple};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn word(r: &mut StdRng, max: usize) -> Word {
    let n = r.gen_range(0..=max);
    Word::from_bits((0..n).map(|_| if r.gen() { Bit::One } else { Bit::Zero }).collect())
}

pub fn nonempty_word(r: &mut StdRng, max: usize) -> Word {
    loop {
        let w = word(r, max);
        if !w.is_empty() {
            return w;
        }
    }
}

/// A complete machine with `states` states and outputs of at most `max_out` bits.
pub fn fst(r: &mut StdRng, states: usize, max_out: usize) -> Fst {
    let trans = (0..states)
        .map(|_| [0, 1].map(|_| (r.gen_range(0..states), word(r, max_out))))
        .collect();
    let labels = (0..states).map(|i| format!("q{i}")).collect();
    Fst::from_table("rand", labels, 0, trans)
}

pub fn bits(r: &mut StdRng, n: usize) -> Word {
    Word::from_bits((0..n).map(|_| if r.gen() { Bit::One } else { Bit::Zero }).collect())
}

/// A random infinite input: ultimately periodic, a block sequence or a builtin.
pub fn stream(r: &mut StdRng) -> Stream {
    match r.gen_range(0..4) {
        0 => Stream::ultimately_periodic(word(r, 6), nonempty_word(r, 6)).unwrap(),
        1 => Stream::blocks_of(Arc::new(BlockFun::identity())),
        2 => Stream::builtin(fstdeg::seq::Builtin::ThueMorse),
        _ => Stream::blocks_of(Arc::new(BlockFun::polynomial([
            r.gen_range(0u32..3),
            r.gen_range(0..3),
            1,
        ]))),
    }
}

/// A validated look-ahead machine: per state, the rule words are the leaves of a random binary
/// trie of depth at most `depth`, so no word is a prefix of another.
pub fn lfst(r: &mut StdRng, states: usize, depth: usize) -> LookaheadFst {
    let mut rules = Vec::new();
    for q in 0..states {
        let mut leaves = Vec::new();
        let mut open = vec![Word::empty()];
        while let Some(u) = open.pop() {
            let split = u.is_empty() || (u.len() < depth && r.gen_bool(0.5));
            if split {
                for b in Bit::ALL {
                    let mut v = u.clone();
                    v.push(b);
                    open.push(v);
                }
            } else if r.gen_bool(0.85) {
                leaves.push(u);
            }
        }
        for u in leaves {
            let c = r.gen_range(1..=u.len());
            rules.push(Rule::new(
                &format!("s{q}"),
                u.slice(0, c),
                u.slice(c, u.len()),
                &format!("s{}", r.gen_range(0..states)),
                word(r, 3),
            ));
        }
    }
    let mut t = LookaheadFst::from_rules("rand", "s0", rules);
    for q in 0..states {
        let s = format!("s{q}");
        if !t.states.contains(&s) {
            t.states.push(s);
        }
    }
    t
}

pub fn family(r: &mut StdRng) -> BlockFun {
    match r.gen_range(0..5) {
        0 => BlockFun::identity(),
        1 => BlockFun::polynomial([r.gen_range(0u32..4), r.gen_range(0..4), r.gen_range(1..3)]),
        2 => BlockFun::exponential(r.gen_range(2u32..4), r.gen_range(1u32..3)).unwrap(),
        3 => BlockFun::floor_div(r.gen_range(1..4)).unwrap(),
        _ => BlockFun::polynomial([r.gen_range(0u32..5), r.gen_range(1..4)]),
    }
}

/// A weight with natural coefficients and offset; non-constant unless `k = 0`.
pub fn natural_weight(r: &mut StdRng, kmax: usize, cmax: i64) -> Weight {
    let k = r.gen_range(1..=kmax);
    let mut t: Vec<i64> = (0..k).map(|_| r.gen_range(0..=cmax)).collect();
    if t.iter().all(|&x| x == 0) {
        let i = r.gen_range(0..k);
        t[i] = 1;
    }
    t.push(r.gen_range(0..=cmax));
    Weight::ints(&t)
}

pub fn natural_tuple(r: &mut StdRng, mmax: usize, kmax: usize, cmax: i64) -> WeightTuple {
    let m = r.gen_range(1..=mmax);
    WeightTuple::new((0..m).map(|_| natural_weight(r, kmax, cmax)).collect()).unwrap()
}

pub fn const_weight(r: &mut StdRng, kmax: usize) -> Weight {
    let k = r.gen_range(0..=kmax);
    let mut t = vec![0i64; k];
    t.push(r.gen_range(0..5));
    Weight::ints(&t)
}

/// A double product with natural exponents, nonempty words and small values.
pub fn dp(r: &mut StdRng) -> DoubleProduct {
    let f = match r.gen_range(0..3) {
        0 => BlockFun::identity(),
        1 => BlockFun::polynomial([0u32, 0, 1]),
        _ => BlockFun::floor_div(2).unwrap(),
    };
    let alphas = natural_tuple(r, 3, 3, 2);
    let m = alphas.m();
    let ps = (0..m).map(|_| word(r, 4)).collect();
    let cs = (0..m).map(|_| word(r, 3)).collect();
    DoubleProduct::new(f, r.gen_range(0..4), word(r, 5), alphas, ps, cs).unwrap()
}

pub fn nats(v: &[u64]) -> Vec<BigUint> {
    v.iter().map(|&x| BigUint::from(x)).collect()
}

pub fn values(f: &dyn NatFun, n: u64) -> Vec<BigUint> {
    (0..n).map(|i| f.try_eval(i).unwrap()).collect()
}

pub fn decode(s: &Stream, n: usize) -> Vec<BigUint> {
    blocks_decode(s, n).unwrap()
}

pub fn decode_run(m: &Fst, s: &Stream, n: usize) -> Vec<BigUint> {
    decode(&run_stream(m, s), n)
}

pub fn bits_upto(r: &mut StdRng, max: usize) -> Word {
    let n = r.gen_range(0..=max);
    bits(r, n)
}

pub fn fst_upto(r: &mut StdRng, max_states: usize, max_out: usize) -> Fst {
    let n = r.gen_range(1..=max_states);
    fst(r, n, max_out)
}

/// The bits of `s` before the first error, at most `n` of them.
pub fn defined(s: &Stream, n: usize) -> Vec<Bit> {
    s.bits().take(n).map_while(Result::ok).collect()
}
