use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::{DoubleProduct, NormalizeError, WORD_LIMIT};
use crate::fst::{pump, zero_loops, Fst, StateId};
use crate::poly::rat_frac;
use crate::seq::{Bit, BlockFun, Word};
use crate::weights::{SpirallingCertificate, Weight, WeightTuple};

/// Bound on the blocks scanned for `f(n) ≥ |Q|` and for a state repetition.
pub const EXTRACT_SCAN_LIMIT: u64 = 100_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransductExtraction {
    pub dp: DoubleProduct,
    /// `q_n`, the state before block `n`, for `n ≤ n₀ + m`.
    pub state_trace: Vec<StateId>,
    pub z: u64,
    pub repetition: (u64, u64),
    /// `ℓ₀` (periodicity modulo `z`) and `ℓ₁` (blocks at least `|Q|`).
    pub thresholds: (u64, u64),
    pub a: Vec<u64>,
}

/// Zero-walk from a state: the visited states until the first repeat, and the loop start.
fn zero_walk(t: &Fst, q: StateId) -> (Vec<StateId>, usize) {
    let mut seen = vec![usize::MAX; t.num_states()];
    let mut walk = Vec::new();
    let mut s = q;
    while seen[s] == usize::MAX {
        seen[s] = walk.len();
        walk.push(s);
        s = t.next(s, Bit::Zero);
    }
    (walk, seen[s])
}

/// `δ(q, 1 0^N)` without reading the zeros one by one.
pub fn block_target(t: &Fst, q: StateId, n: &BigUint) -> StateId {
    let (walk, mu) = zero_walk(t, t.next(q, Bit::One));
    match n.to_usize() {
        Some(k) if k < walk.len() => walk[k],
        _ => {
            let len = walk.len() - mu;
            let off = ((n - BigUint::from(mu)) % BigUint::from(len))
                .to_usize()
                .expect("small");
            walk[mu + off]
        }
    }
}

fn threshold(f: &BlockFun, states: usize) -> Result<u64, NormalizeError> {
    let q = BigUint::from(states);
    let start = f.monotone_from().unwrap_or(0);
    let mut last_bad = None;
    for n in 0..EXTRACT_SCAN_LIMIT {
        if f.eval(n) < q {
            last_bad = Some(n);
        } else if n >= start {
            return Ok(last_bad.map_or(0, |b| b + 1));
        }
    }
    Err(NormalizeError::BlocksTooShort {
        states,
        horizon: EXTRACT_SCAN_LIMIT,
    })
}

/// Simulates `t` on `⟨f⟩` block by block and reads off a double product with
/// `αⱼ = ⟨1/z, −aⱼ/z⟩`, `aⱼ` the least value `≥ |Q|` congruent to `f(n₀ + j)` modulo `z`.
pub fn extract_transduct(
    t: &Fst,
    f: &BlockFun,
    cert: &SpirallingCertificate,
) -> Result<TransductExtraction, NormalizeError> {
    let states = t.num_states();
    let z = zero_loops(t).z as u64;
    let (l0, p) = cert.period_for(z).ok_or(NormalizeError::MissingPeriod { modulus: z })?;
    let l1 = threshold(f, states)?;
    let start = l0.max(l1) + 1;
    // q_n for n ≤ start + |Q|·p
    let mut trace = vec![t.initial_state()];
    let upto = start + states as u64 * p;
    if upto > EXTRACT_SCAN_LIMIT {
        return Err(NormalizeError::NoRepetition { horizon: upto });
    }
    for n in 0..upto {
        let q = *trace.last().expect("nonempty");
        trace.push(block_target(t, q, &f.eval(n)));
    }
    let mut first_at = vec![None; states];
    let mut rep = None;
    for k in 0..=states as u64 {
        let q = trace[(start + k * p) as usize];
        match first_at[q] {
            Some(k1) => {
                rep = Some((start + k1 * p, (k - k1) * p));
                break;
            }
            None => first_at[q] = Some(k),
        }
    }
    let (n0, m) = rep.ok_or(NormalizeError::NoRepetition { horizon: upto })?;
    trace.truncate((n0 + m + 1) as usize);

    let zb = BigUint::from(z);
    let mut a = Vec::with_capacity(m as usize);
    let mut ps = Vec::with_capacity(m as usize);
    let mut cs = Vec::with_capacity(m as usize);
    let mut alphas = Vec::with_capacity(m as usize);
    for j in 0..m {
        let r = ((f.eval(n0 + j) - states) % &zb).to_u64().expect("residue");
        let aj = states as u64 + r;
        let d = pump(t, trace[(n0 + j) as usize], aj as usize)?;
        a.push(aj);
        ps.push(d.p);
        cs.push(d.c);
        alphas.push(Weight::new(vec![rat_frac(1, z as i64)], rat_frac(-(aj as i64), z as i64)).expect("positive"));
    }

    let mut w = Word::empty();
    let mut q = t.initial_state();
    for n in 0..n0 {
        let len = f.eval(n);
        let len = len
            .to_usize()
            .filter(|&l| w.len() + l < WORD_LIMIT)
            .ok_or_else(|| NormalizeError::TooLarge(len.to_string()))?;
        let (q2, out) = t.run_word(q, &Word::block(len));
        w.extend_from(&out);
        q = q2;
    }
    debug_assert_eq!(q, trace[n0 as usize]);

    let dp = DoubleProduct::new(f.clone(), n0, w, WeightTuple::new(alphas).expect("m > 0"), ps, cs)?;
    Ok(TransductExtraction {
        dp,
        state_trace: trace,
        z,
        repetition: (n0, m),
        thresholds: (l0, l1),
        a,
    })
}

#[cfg(test)]
mod tests {
    use super::super::dp_emit;
    use super::*;
    use crate::fst::{run_stream, FstSpec};
    use crate::seq::{blocks_encode, w};
    use crate::weights::certify_spiralling;

    fn machine(rows: &[(&str, u8, &str, &str)]) -> Fst {
        Fst::from_spec(&FstSpec::from_rows("m", "q0", rows)).unwrap()
    }

    pub(crate) fn ambiguous() -> Fst {
        machine(&[
            ("q0", 0, "q0", "01"),
            ("q0", 1, "q1", "1"),
            ("q1", 0, "q1", "10"),
            ("q1", 1, "q0", "1"),
        ])
    }

    fn three_loops() -> Fst {
        machine(&[
            ("q0", 0, "q1", "00"),
            ("q0", 1, "q2", "1"),
            ("q1", 1, "q0", "1"),
            ("q1", 0, "q2", "01"),
            ("q2", 0, "q0", "10"),
            ("q2", 1, "q1", "1"),
        ])
    }

    fn check(t: &Fst, f: &BlockFun) -> TransductExtraction {
        let z = zero_loops(t).z as u64;
        let cert = certify_spiralling(f, &[z], 0).unwrap();
        let x = extract_transduct(t, f, &cert).unwrap();
        let direct = run_stream(t, &blocks_encode(f)).prefix(4096).unwrap();
        assert_eq!(dp_emit(&x.dp).prefix(4096).unwrap(), direct);
        x
    }

    #[test]
    fn ambiguous_extraction() {
        let x = check(&ambiguous(), &BlockFun::identity());
        assert_eq!(x.z, 1);
        assert_eq!(x.repetition.1, 2);
        let mut cs = x.dp.cs.clone();
        cs.sort();
        assert_eq!(cs, [w("01"), w("10")]);
    }

    #[test]
    fn identity_extraction() {
        let x = check(&Fst::identity(), &BlockFun::identity());
        assert_eq!(x.repetition.1, 1);
        assert_eq!(x.dp.cs, [w("0")]);
    }

    #[test]
    fn three_loops_extraction() {
        let x = check(&three_loops(), &BlockFun::floor_div(2).unwrap());
        assert_eq!(x.z, 3);
        assert_eq!(x.repetition.1, 6);
    }

    #[test]
    fn squares_and_exponentials() {
        check(&three_loops(), &BlockFun::polynomial([0u32, 0, 1]));
        check(&three_loops(), &BlockFun::exponential(2u32, 1u32).unwrap());
    }

    #[test]
    fn block_target_skips_zeros() {
        let t = three_loops();
        for n in 0..40u64 {
            let (q, _) = t.run_word(0, &Word::block(n as usize));
            assert_eq!(block_target(&t, 0, &BigUint::from(n)), q);
        }
        let big = BigUint::from(3u32).pow(90);
        assert_eq!(block_target(&t, 0, &big), block_target(&t, 0, &BigUint::from(3u32)));
    }
}
