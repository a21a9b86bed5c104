mod common;

use num_integer::Integer;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::Rng;

use common::{family, nonempty_word, rng, word};
use fstdeg::seq::{blocks_decode, blocks_encode, shift_stream, up_equal, Bit, Stream, Word};

fn up_prefix(u: &Word, v: &Word, n: usize) -> Word {
    Stream::ultimately_periodic(u.clone(), v.clone())
        .unwrap()
        .prefix(n)
        .unwrap()
}

/// A second representation of `u v^ω`: part of the period moved into the prefix, then rotated
/// and repeated.
fn reshape(r: &mut rand::rngs::StdRng, u: &Word, v: &Word) -> (Word, Word) {
    let k = r.gen_range(0..v.len());
    let reps = r.gen_range(1..3);
    let u2 = u.concat(&v.pow(r.gen_range(0..2))).concat(&v.slice(0, k));
    let v2 = v.slice(k, v.len()).concat(&v.slice(0, k)).pow(reps);
    (u2, v2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blocks_round_trip(seed in any::<u64>(), n in 0usize..=64) {
        let f = family(&mut rng(seed));
        let want = f.values(n as u64);
        prop_assert_eq!(blocks_decode(&blocks_encode(&f), n).unwrap(), want);
    }

    #[test]
    fn prefix_splits_at_shift(seed in any::<u64>(), n in 0usize..200, m in 0usize..200) {
        let mut r = rng(seed);
        let s = common::stream(&mut r);
        let whole = s.prefix(n + m).unwrap();
        let split = s.prefix(n).unwrap().concat(&shift_stream(&s, n as u64).prefix(m).unwrap());
        prop_assert_eq!(whole, split);
    }

    #[test]
    fn blocks_have_ones_in_every_long_window(seed in any::<u64>()) {
        let f = family(&mut rng(seed));
        // the first 64 blocks, or fewer when exponential blocks get long
        let mut vals = Vec::new();
        let mut total = 0usize;
        for v in f.values(64) {
            let v = v.to_usize().unwrap_or(usize::MAX);
            if total.saturating_add(v) > 1 << 18 {
                break;
            }
            total += v + 1;
            vals.push(v);
        }
        let fmax = *vals.iter().max().unwrap();
        let p = blocks_encode(&f).prefix(total).unwrap();
        // every window of fmax + 1 bits holds a 1 iff no zero run is longer than fmax
        let mut run = 0;
        for &b in p.bits() {
            run = if b == Bit::One { 0 } else { run + 1 };
            prop_assert!(run <= fmax);
        }
    }
}

#[test]
fn up_equal_matches_long_prefixes() {
    let mut r = rng(7);
    let mut equal = 0;
    for _ in 0..200 {
        let (u1, v1) = (word(&mut r, 5), nonempty_word(&mut r, 4));
        let (u2, v2) = if r.gen_bool(0.5) {
            reshape(&mut r, &u1, &v1)
        } else {
            (word(&mut r, 5), nonempty_word(&mut r, 4))
        };
        let n = 10 * v1.len().lcm(&v2.len()) + u1.len().max(u2.len());
        let oracle = up_prefix(&u1, &v1, n) == up_prefix(&u2, &v2, n);
        assert_eq!(
            up_equal(&u1, &v1, &u2, &v2).unwrap(),
            oracle,
            "{u1:?} {v1:?} vs {u2:?} {v2:?}"
        );
        equal += oracle as usize;
    }
    assert!(equal >= 50);
}

#[test]
fn up_equal_is_an_equivalence() {
    let mut r = rng(11);
    for _ in 0..200 {
        let (u, v) = (word(&mut r, 5), nonempty_word(&mut r, 4));
        let (a, b) = reshape(&mut r, &u, &v);
        let (c, d) = reshape(&mut r, &a, &b);
        let (x, y) = (word(&mut r, 5), nonempty_word(&mut r, 4));
        assert!(up_equal(&u, &v, &u, &v).unwrap());
        assert!(up_equal(&u, &v, &a, &b).unwrap() && up_equal(&a, &b, &u, &v).unwrap());
        assert!(up_equal(&a, &b, &c, &d).unwrap() && up_equal(&u, &v, &c, &d).unwrap());
        assert_eq!(up_equal(&u, &v, &x, &y).unwrap(), up_equal(&x, &y, &u, &v).unwrap());
    }
}
