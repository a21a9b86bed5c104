mod common;

use std::sync::Arc;

use num_bigint::BigUint;
use proptest::prelude::*;
use rand::Rng;

use common::{const_weight, decode_run, fst, nats, natural_weight, rng, values};
use fstdeg::degrees::{
    atom_witness, exp_chain, looks_ultimately_periodic, one_weight_project, poly_transduct_normalize, squares_chain,
    DegreeError,
};
use fstdeg::fst::run_stream;
use fstdeg::poly::{rat, Polynomial};
use fstdeg::seq::{blocks_encode, BlockFun, NatFun, Stream};
use fstdeg::weights::{wprod, WeightTuple, WprodFun};

fn squares(n: u64) -> Vec<BigUint> {
    (0..n).map(|i| BigUint::from(i * i)).collect()
}

#[test]
fn squares_chains_compose() {
    for a in 1..=3 {
        for b in 0..=6 {
            for c in 0..=2 {
                let chain = squares_chain(a, b, c).unwrap();
                assert_eq!(chain.run_composed(12).unwrap(), squares(12), "({a}, {b}, {c})");
            }
        }
    }
}

#[test]
fn exponential_chains() {
    for k in 1..=4u32 {
        let chain = exp_chain(k as u64).unwrap();
        let want: Vec<BigUint> = (0..8u32).map(|n| BigUint::from(2u32).pow(2 * k * n)).collect();
        assert_eq!(chain.run_composed(8).unwrap(), want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn polynomial_normalization_keeps_degree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let deg = r.gen_range(1..=3);
        let mut c: Vec<i64> = (0..deg).map(|_| r.gen_range(0..5)).collect();
        c.push(r.gen_range(1..5));
        let p = Polynomial::from_ints(&c);
        let alpha = natural_weight(&mut r, 3, 3);
        let n0 = r.gen_range(0..5);
        let q = poly_transduct_normalize(&p, &alpha, n0);
        prop_assert_eq!(q.degree(), p.degree());
        let f = BlockFun::polynomial(c.iter().map(|&x| x as u32).collect::<Vec<_>>());
        let one = WeightTuple::single(alpha);
        for n in 0..8 {
            prop_assert_eq!(q.eval_int(n as i64), wprod(&one, &f.shifted(n0), n));
        }
    }

    #[test]
    fn projection_keeps_one_residue(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = r.gen_range(1..=3usize);
        let lead = r.gen_range(0..m);
        let ws = (0..m)
            .map(|i| if i == lead || r.gen_bool(0.5) { natural_weight(&mut r, 3, 2) } else { const_weight(&mut r, 2) })
            .collect();
        let a = WeightTuple::new(ws).unwrap();
        let f = match r.gen_range(0..3) {
            0 => BlockFun::identity(),
            1 => BlockFun::polynomial([0u32, 1, 1]),
            _ => BlockFun::floor_div(2).unwrap(),
        };
        let n0 = r.gen_range(0..4);
        let p = one_weight_project(&a, n0).unwrap();
        prop_assert!(!a.get(p.index).is_constant());
        prop_assert!((0..p.index).all(|i| a.get(i).is_constant()));
        let whole = WprodFun::of_blockfun(a, &f.shifted(n0));
        let got = decode_run(&p.machine, &Stream::blocks_of(Arc::new(whole.clone())), 16);
        prop_assert_eq!(&got, &values(&p.fun(&f), 16));
        let direct: Vec<_> = (0..16).map(|n| whole.try_eval(p.index as u64 + n * m as u64).unwrap()).collect();
        prop_assert_eq!(got, direct);
    }
}

#[test]
fn atom_witnesses_for_random_machines() {
    let f = BlockFun::polynomial([0u32, 0, 1]);
    let mut built = 0;
    let mut seed = 0;
    while built < 10 {
        seed += 1;
        assert!(seed < 2000, "only {built} witnesses");
        let t = fst(&mut rng(seed), 3, 3);
        if looks_ultimately_periodic(&run_stream(&t, &blocks_encode(&f)), 8192) {
            continue;
        }
        let w = match atom_witness(&t, &f) {
            Ok(w) => w,
            Err(DegreeError::UltimatelyPeriodic(_) | DegreeError::TooLarge(_)) => continue,
            Err(e) => panic!("seed {seed}: {e}"),
        };
        let widest = w.chain.steps.iter().map(|s| s.states()).max().unwrap_or(0);
        if w.dropped > 4096 || widest > 4096 {
            continue;
        }
        assert_eq!(w.q.degree(), Some(2));
        assert!(w.q.coeff(2) > rat(0));
        let report = w.chain.verify(10);
        assert!(report.ok, "seed {seed}\n{report}");
        assert_eq!(
            w.chain.run_composed(10).unwrap(),
            nats(&[0, 1, 4, 9, 16, 25, 36, 49, 64, 81])
        );
        built += 1;
    }
}
