mod common;

use num_integer::Integer;
use proptest::prelude::*;
use rand::Rng;

use common::{bits_upto, fst, fst_upto, rng};
use fstdeg::fst::{compose, pump, zero_loops};
use fstdeg::seq::Word;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn extended_maps_are_morphic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let states = r.gen_range(1..=5);
        let m = fst(&mut r, states, 3);
        let (u, v) = (bits_upto(&mut r, 32), bits_upto(&mut r, 32));
        let q = r.gen_range(0..states);
        let (qu, lu) = m.run_word(q, &u);
        let (quv, luv) = m.run_word(q, &u.concat(&v));
        let (q2, lv) = m.run_word(qu, &v);
        prop_assert_eq!(quv, q2);
        prop_assert_eq!(luv, lu.concat(&lv));
    }

    #[test]
    fn outputs_preserve_prefixes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = fst_upto(&mut r, 5, 3);
        let v = bits_upto(&mut r, 48);
        let u = v.slice(0, r.gen_range(0..=v.len()));
        let q0 = m.initial_state();
        prop_assert!(m.run_word(q0, &u).1.is_prefix_of(&m.run_word(q0, &v).1));
    }

    #[test]
    fn composition_is_associative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let [a, b, c] = [0; 3].map(|_| fst_upto(&mut r, 4, 3));
        let s = common::stream(&mut r);
        let input = s.prefix(512).unwrap();
        let left = compose(&a, &compose(&b, &c));
        let right = compose(&compose(&a, &b), &c);
        let run = |m: &fstdeg::fst::Fst| m.run_word(m.initial_state(), &input).1;
        let seq = a.run_word(0, &b.run_word(0, &c.run_word(0, &input).1).1).1;
        prop_assert_eq!(run(&left), seq.clone());
        prop_assert_eq!(run(&right), seq);
    }

    #[test]
    fn z_is_the_lcm_of_loop_lengths(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = fst_upto(&mut r, 8, 2);
        let rep = zero_loops(&m);
        prop_assert!(!rep.loops.is_empty());
        let l = rep.loops.iter().fold(1usize, |acc, x| acc.lcm(&x.len()));
        prop_assert_eq!(rep.z, l);
        for x in &rep.loops {
            prop_assert_eq!(rep.z % x.len(), 0);
        }
    }

    #[test]
    fn pumping_decomposition(seed in any::<u64>()) {
        let mut r = rng(seed);
        let states = r.gen_range(1..=6);
        let m = fst(&mut r, states, 3);
        let n = states;
        for q in 0..states {
            let d = pump(&m, q, n).unwrap();
            for i in 0..=8 {
                let (t, out) = m.run_word(q, &Word::block(n + i * d.z));
                prop_assert_eq!(t, d.target);
                prop_assert_eq!(out, d.p.concat(&d.c.pow(i)));
            }
        }
    }
}
