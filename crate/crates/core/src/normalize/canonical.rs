use std::sync::Arc;

use super::{dp_emit, find_ambiguity, DoubleProduct, NormalizeError};
use crate::construct::build_block_expander;
use crate::fst::{run_stream, Fst};
use crate::lookahead::{la_compile_eager, LookaheadFst, Rule};
use crate::poly::rat;
use crate::seq::{blocks_decode, up_disagreement, Stream, Word};
use crate::weights::{WeightTuple, WprodFun};

/// Step bound for locating the threshold `n₂`.
pub const THRESHOLD_STEPS: u64 = 100_000;

/// `σ' ≡ ⟨g'⟩` with `g' = α⃗ ⊙ S^{shift} f`, witnessed by `back: ⟨g'⟩ → σ'` and `forth: σ' → ⟨g'⟩`,
/// where `σ'` is `dp` without `w` and without its first `n₂` rounds.
#[derive(Clone, Debug)]
pub struct Canonical {
    pub dp: DoubleProduct,
    pub alphas: WeightTuple,
    pub shift: u64,
    pub n2: u64,
    pub t: Vec<usize>,
    pub l: Vec<usize>,
    pub l_prime: Vec<usize>,
    pub back: Fst,
    pub forth: LookaheadFst,
}

impl Canonical {
    pub fn g_prime(&self) -> WprodFun {
        WprodFun::of_blockfun(self.alphas.clone(), &self.dp.f.shifted(self.shift))
    }

    /// `σ'` as a double product.
    pub fn tail(&self) -> DoubleProduct {
        DoubleProduct {
            n0: self.shift,
            w: Word::empty(),
            ..self.dp.clone()
        }
    }

    /// Checks `back(⟨g'⟩) = σ'` on `bits` bits and `forth(σ') = ⟨g'⟩` on `blocks` blocks.
    pub fn verify(&self, bits: usize, blocks: usize) -> Result<bool, NormalizeError> {
        let g = Stream::blocks_of(Arc::new(self.g_prime()));
        let sigma = dp_emit(&self.tail());
        if run_stream(&self.back, &g).prefix(bits)? != sigma.prefix(bits)? {
            return Ok(false);
        }
        let forth = la_compile_eager(&self.forth).map_err(|e| NormalizeError::Conditions(e.to_string()))?;
        let decode = |s: &Stream| blocks_decode(s, blocks).map_err(|e| NormalizeError::Conditions(e.to_string()));
        Ok(decode(&run_stream(&forth, &sigma))? == decode(&g)?)
    }
}

fn check_conditions(dp: &DoubleProduct) -> Result<(), NormalizeError> {
    if let Some(j) = dp.cs.iter().position(|c| c.is_empty()) {
        return Err(NormalizeError::Conditions(format!("cycle {j} is empty")));
    }
    if let Some(j) = (0..dp.m()).find(|&j| dp.alphas.get(j).is_constant()) {
        return Err(NormalizeError::Conditions(format!("weight {j} is constant")));
    }
    if let Some(j) = find_ambiguity(dp) {
        return Err(NormalizeError::Conditions(format!("transition ambiguity at {j}")));
    }
    Ok(())
}

/// Least `Q` such that `(α⃗ ⊙ S^{n₀}f)(qm + r) > bound` for all `q ≥ Q` and all `r`.
fn threshold(dp: &DoubleProduct, bound: usize) -> Result<u64, NormalizeError> {
    let no = NormalizeError::NoThreshold {
        bound,
        steps: THRESHOLD_STEPS,
    };
    let mono = dp.f.monotone_from().ok_or(no.clone())?.saturating_sub(dp.n0);
    let s_m = dp.alphas.s_m();
    let bound = rat(bound as i64);
    let mut n2 = 0;
    for r in 0..dp.m() {
        let a = dp.alphas.get(r);
        let s_r = dp.alphas.s(r);
        let mut last_bad = None;
        let mut done = false;
        for q in 0..THRESHOLD_STEPS {
            let pos = q * s_m + s_r;
            let v = a
                .apply_by::<std::convert::Infallible>(pos, |x| Ok(dp.f.eval(dp.n0 + x)))
                .unwrap_or_else(|e| match e {});
            if v <= bound {
                last_bad = Some(q);
            } else if pos >= mono {
                done = true;
                break;
            }
        }
        if !done {
            return Err(no);
        }
        n2 = n2.max(last_bad.map_or(0, |q| q + 1));
    }
    Ok(n2)
}

/// The normal form `⟨α⃗ ⊙ S^{shift} f⟩` of a disambiguated double product, with both machines.
/// An empty prefix `p_j` is first rewritten to `c_j` with the offset of `α_j` lowered by one.
pub fn dp_to_canonical(dp: &DoubleProduct) -> Result<Canonical, NormalizeError> {
    check_conditions(dp)?;
    let m = dp.m();
    let mut dp = dp.clone();
    let mut ws = dp.alphas.clone().into_weights();
    for j in 0..m {
        if dp.ps[j].is_empty() {
            dp.ps[j] = dp.cs[j].clone();
            ws[j] = ws[j].with_offset(ws[j].offset() - rat(1));
        }
    }
    dp.alphas = WeightTuple::new(ws).expect("m ≥ 1");

    let mut t = Vec::with_capacity(m);
    let mut l = Vec::with_capacity(m);
    let mut l_prime = Vec::with_capacity(m);
    for j in 0..m {
        let k = (j + 1) % m;
        let (c, p2, c2) = (&dp.cs[j], &dp.ps[k], &dp.cs[k]);
        let tj = up_disagreement(&Word::empty(), c, p2, c2)
            .expect("nonempty cycles")
            .ok_or_else(|| NormalizeError::Conditions(format!("transition ambiguity at {j}")))?;
        t.push(tj);
        l.push(tj / c.len());
        l_prime.push(if p2.len() > tj {
            0
        } else {
            (tj - p2.len()) / c2.len() + 1
        });
    }
    let n2 = threshold(&dp, *t.iter().max().expect("m ≥ 1"))?;
    let shift = dp.n0 + n2 * dp.alphas.s_m();

    let back = build_block_expander(&dp.ps, &dp.cs).expect("m ≥ 1 and equal lengths");
    let label = |j: usize| format!("q{j}");
    let mut rules = Vec::with_capacity(2 * m);
    for j in 0..m {
        let k = (j + 1) % m;
        rules.push(Rule::new(
            &label(j),
            dp.cs[j].clone(),
            dp.cs[j].pow(l[j]),
            &label(j),
            Word::zeros(1),
        ));
        rules.push(Rule::new(
            &label(j),
            dp.ps[k].clone(),
            dp.cs[k].pow(l_prime[j]),
            &label(k),
            Word::block(0),
        ));
    }
    let forth = LookaheadFst::from_rules("forth", &label(m - 1), rules);
    Ok(Canonical {
        alphas: dp.alphas.clone(),
        dp,
        shift,
        n2,
        t,
        l,
        l_prime,
        back,
        forth,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::ambiguous_dp;
    use super::super::{disambiguate, DoubleProduct};
    use super::*;
    use crate::seq::{w, BlockFun};
    use crate::weights::Weight;

    #[test]
    fn blocks_are_already_canonical() {
        let dp = DoubleProduct::of_blocks(BlockFun::identity());
        let c = dp_to_canonical(&dp).unwrap();
        assert_eq!(c.t, [0]);
        assert_eq!((c.l[0], c.l_prime[0]), (0, 0));
        assert_eq!(c.n2, 1);
        assert_eq!(c.shift, 1);
        let s = crate::seq::blocks_encode(&BlockFun::identity());
        assert_eq!(run_stream(&c.back, &s).prefix(200).unwrap(), s.prefix(200).unwrap());
        let forth = la_compile_eager(&c.forth).unwrap();
        assert_eq!(run_stream(&forth, &s).prefix(200).unwrap(), s.prefix(200).unwrap());
        assert!(c.verify(1024, 30).unwrap());
    }

    #[test]
    fn ambiguous_round_trip() {
        let r = disambiguate(&ambiguous_dp()).unwrap().form().unwrap();
        let c = dp_to_canonical(&r).unwrap();
        assert!(c.verify(2048, 30).unwrap());
        // g'(n) = 4n + const is affine
        let g = c.g_prime();
        let v: Vec<_> = (0..4).map(|n| g.value(n).unwrap()).collect();
        assert_eq!(&v[1] - &v[0], &v[3] - &v[2]);
    }

    #[test]
    fn empty_prefix_is_rewritten() {
        let dp = DoubleProduct::new(
            BlockFun::polynomial([1u32, 1]),
            0,
            Word::empty(),
            WeightTuple::new(vec![Weight::ints(&[1, 0]), Weight::ints(&[1, 0])]).unwrap(),
            vec![w("-"), w("1")],
            vec![w("01"), w("0")],
        )
        .unwrap();
        let c = dp_to_canonical(&dp).unwrap();
        assert_eq!(c.dp.ps[0], w("01"));
        assert!(c.verify(2048, 30).unwrap());
    }

    #[test]
    fn rejects_ambiguous_input() {
        assert!(matches!(
            dp_to_canonical(&ambiguous_dp()),
            Err(NormalizeError::Conditions(_))
        ));
    }
}
