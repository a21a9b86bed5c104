mod common;

use std::sync::Arc;

use num_bigint::BigUint;
use proptest::prelude::*;
use rand::Rng;

use common::{decode, decode_run, natural_tuple, rng, values, word};
use fstdeg::construct::{build_basic, build_block_expander, build_wprod_fst, run_basic, BasicOp};
use fstdeg::fst::{compose, run_stream};
use fstdeg::normalize::{dp_emit, DoubleProduct};
use fstdeg::seq::{blocks_encode, BlockFun, FnNat, NatFun, Stream};
use fstdeg::weights::WprodFun;

const BLOCKS: usize = 20;

fn subjects() -> Vec<BlockFun> {
    vec![
        BlockFun::identity(),
        BlockFun::polynomial([0u32, 0, 1]),
        BlockFun::exponential(2u32, 1u32).unwrap(),
    ]
}

fn mapped(f: &BlockFun, g: impl Fn(BigUint) -> BigUint + Send + Sync + 'static) -> Stream {
    let f = f.clone();
    Stream::blocks_of(Arc::new(FnNat(move |n| g(f.eval(n)))))
}

fn both_ways(there: BasicOp, back: BasicOp, f: &BlockFun, image: &Stream) {
    let want = values(f, BLOCKS as u64);
    let fwd = build_basic(&there).unwrap();
    let bwd = build_basic(&back).unwrap();
    let s = blocks_encode(f);
    assert_eq!(
        decode_run(&compose(&bwd, &fwd), &s, BLOCKS),
        want,
        "{there} then {back} on {f}"
    );
    let staged = run_basic(&back, &run_basic(&there, &s).unwrap()).unwrap();
    assert_eq!(decode(&staged, BLOCKS), want);
    let image_back = run_basic(&back, image).unwrap();
    let round = decode(&run_stream(&fwd, &image_back), BLOCKS);
    assert_eq!(round, decode(image, BLOCKS), "{back} then {there} on {f}");
}

#[test]
fn basic_operations_invert() {
    for f in subjects() {
        for a in [1u64, 2, 3] {
            let k = a;
            both_ways(
                BasicOp::ScaleUp(a),
                BasicOp::ScaleDown(a),
                &f,
                &mapped(&f, move |v| v * k),
            );
            both_ways(
                BasicOp::YShiftAdd(a),
                BasicOp::YShiftSub(a),
                &f,
                &mapped(&f, move |v| v + k),
            );
        }
        for k in [1usize, 2, 3] {
            let head: Vec<u64> = (0..k as u64).map(|i| (i * 7 + 2) % 5).collect();
            let prepended = Stream::blocks_of(Arc::new({
                let (f, head) = (f.clone(), head.clone());
                FnNat(move |n| match head.get(n as usize) {
                    Some(&v) => BigUint::from(v),
                    None => f.eval(n - head.len() as u64),
                })
            }));
            both_ways(
                BasicOp::XShiftPrepend(head),
                BasicOp::XShiftDrop(k as u64),
                &f,
                &prepended,
            );
        }
    }
}

fn small_family(r: &mut rand::rngs::StdRng) -> BlockFun {
    match r.gen_range(0..3) {
        0 => BlockFun::identity(),
        1 => BlockFun::polynomial([r.gen_range(0u32..3), r.gen_range(0..3), r.gen_range(0..2)]),
        _ => BlockFun::floor_div(r.gen_range(1..4)).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn wprod_machine_matches_closed_form(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = natural_tuple(&mut r, 3, 3, 3);
        let f = small_family(&mut r);
        let m = build_wprod_fst(&a).unwrap();
        let want = values(&WprodFun::of_blockfun(a, &f), 32);
        prop_assert_eq!(decode_run(&m, &blocks_encode(&f), 32), want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn expander_after_wprod_emits_double_product(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = natural_tuple(&mut r, 3, 2, 2);
        let f = small_family(&mut r);
        let k = a.m();
        let ps: Vec<_> = (0..k).map(|_| word(&mut r, 3)).collect();
        let cs: Vec<_> = (0..k).map(|_| word(&mut r, 3)).collect();
        let dp = DoubleProduct::new(f.clone(), 0, fstdeg::seq::Word::empty(), a.clone(), ps.clone(), cs.clone()).unwrap();
        let g = WprodFun::of_blockfun(a.clone(), &f);
        let len: usize = (0..BLOCKS)
            .map(|n| {
                let e: usize = g.try_eval(n as u64).unwrap().try_into().unwrap();
                ps[n % k].len() + e * cs[n % k].len()
            })
            .sum();
        let machine = compose(&build_block_expander(&ps, &cs).unwrap(), &build_wprod_fst(&a).unwrap());
        let got = run_stream(&machine, &blocks_encode(&f)).prefix(len).unwrap();
        prop_assert_eq!(got, dp_emit(&dp).prefix(len).unwrap());
    }
}
