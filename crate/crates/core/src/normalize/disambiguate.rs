use num_integer::Integer;
use num_traits::ToPrimitive;

use super::{DoubleProduct, NormalizeError, WORD_LIMIT};
use crate::poly::{rat, Rational};
use crate::seq::{up_equal, Word};
use crate::weights::{Weight, WeightTuple};

/// `(x, a, b)` with `u^m v w^n = v x^{am+bn}` for all `m, n`, given `u^ω = v·w^ω`.
pub fn merge_words(u: &Word, v: &Word, w: &Word) -> Result<(Word, u64, u64), NormalizeError> {
    if u.is_empty() || w.is_empty() || !up_equal(&Word::empty(), u, v, w).expect("nonempty periods") {
        return Err(NormalizeError::MergePrecondition);
    }
    let d = u.len().gcd(&w.len());
    Ok((w.suffix(d), (u.len() / d) as u64, (w.len() / d) as u64))
}

/// Smallest `j` with `c_j^ω = p_{j+1} c_{j+1}^ω` (indices modulo `m`), skipping empty cycles.
pub fn find_ambiguity(dp: &DoubleProduct) -> Option<usize> {
    let m = dp.m();
    (0..m).find(|&j| {
        let k = (j + 1) % m;
        !dp.cs[j].is_empty()
            && !dp.cs[k].is_empty()
            && up_equal(&Word::empty(), &dp.cs[j], &dp.ps[k], &dp.cs[k]).expect("nonempty periods")
    })
}

/// The input was found to denote an ultimately periodic sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UltimatelyPeriodicVerdict {
    pub reason: String,
    /// The single-factor representation that witnesses it.
    pub dp: DoubleProduct,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Disambiguated {
    Form(DoubleProduct),
    UltimatelyPeriodic(UltimatelyPeriodicVerdict),
}

impl Disambiguated {
    pub fn form(self) -> Option<DoubleProduct> {
        match self {
            Disambiguated::Form(dp) => Some(dp),
            Disambiguated::UltimatelyPeriodic(_) => None,
        }
    }
}

fn zero_weight(k: usize) -> Weight {
    Weight::new(vec![Rational::from_integer(0.into()); k], rat(0)).expect("zero coefficients")
}

/// Replaces factors `h` and `h + 1` by a single factor.
fn replace_pair(dp: &mut DoubleProduct, h: usize, p: Word, c: Word, beta: Weight) {
    let mut ws = dp.alphas.clone().into_weights();
    ws[h] = beta;
    ws.remove(h + 1);
    dp.alphas = WeightTuple::new(ws).expect("m ≥ 1");
    dp.ps[h] = p;
    dp.cs[h] = c;
    dp.ps.remove(h + 1);
    dp.cs.remove(h + 1);
}

/// Moves a violation at `m − 1` to `m − 2` by the rotation identity.
fn interior(dp: &mut DoubleProduct, h: usize) -> Result<usize, NormalizeError> {
    if h + 1 < dp.m() {
        return Ok(h);
    }
    *dp = dp.rotate()?;
    Ok(h - 1)
}

/// Folds a constant weight at `h` into the prefix of the next factor.
fn fold_constant(dp: &mut DoubleProduct, h: usize) -> Result<(), NormalizeError> {
    let h = interior(dp, h)?;
    let a = dp.alphas.get(h);
    let e = a.offset();
    let e = if e.is_integer() {
        e.to_integer().to_usize()
    } else {
        None
    };
    let e = e
        .filter(|e| e * dp.cs[h].len() <= WORD_LIMIT)
        .ok_or_else(|| NormalizeError::TooLarge(a.offset().to_string()))?;
    let p = dp.ps[h].concat(&dp.cs[h].pow(e)).concat(&dp.ps[h + 1]);
    let c = dp.cs[h + 1].clone();
    let beta = zero_weight(a.k()).concat(dp.alphas.get(h + 1));
    replace_pair(dp, h, p, c, beta);
    Ok(())
}

fn merge_ambiguity(dp: &mut DoubleProduct, h: usize) -> Result<(), NormalizeError> {
    let h = interior(dp, h)?;
    let (x, a, b) = merge_words(&dp.cs[h], &dp.ps[h + 1], &dp.cs[h + 1])?;
    let p = dp.ps[h].concat(&dp.ps[h + 1]);
    let beta = dp
        .alphas
        .get(h)
        .scaled(&rat(a as i64))
        .concat(&dp.alphas.get(h + 1).scaled(&rat(b as i64)));
    replace_pair(dp, h, p, x, beta);
    Ok(())
}

/// Rewrites until no cycle is empty, no weight is constant and there is no transition
/// ambiguity; a single factor still violating this means the sequence is ultimately periodic.
pub fn disambiguate(dp: &DoubleProduct) -> Result<Disambiguated, NormalizeError> {
    let mut dp = dp.clone();
    loop {
        for j in 0..dp.m() {
            if dp.cs[j].is_empty() && !dp.alphas.get(j).is_constant() {
                let mut ws = dp.alphas.clone().into_weights();
                ws[j] = zero_weight(ws[j].k());
                dp.alphas = WeightTuple::new(ws).expect("m ≥ 1");
            }
        }
        let constant = (0..dp.m()).find(|&j| dp.alphas.get(j).is_constant());
        let ambiguity = find_ambiguity(&dp);
        if constant.is_none() && ambiguity.is_none() {
            return Ok(Disambiguated::Form(absorb_cycles(&dp)));
        }
        if dp.m() == 1 {
            let reason = if constant.is_some() {
                "the only weight is constant"
            } else {
                "the only cycle satisfies c^ω = p·c^ω"
            };
            return Ok(Disambiguated::UltimatelyPeriodic(UltimatelyPeriodicVerdict {
                reason: reason.to_string(),
                dp,
            }));
        }
        match constant {
            Some(h) => fold_constant(&mut dp, h)?,
            None => merge_ambiguity(&mut dp, ambiguity.expect("violation"))?,
        }
    }
}

/// Strips copies of `c_j` from the end of `p_j`, raising the offset of `α_j` accordingly.
pub fn absorb_cycles(dp: &DoubleProduct) -> DoubleProduct {
    let mut dp = dp.clone();
    let mut ws = dp.alphas.clone().into_weights();
    for j in 0..dp.m() {
        let c = &dp.cs[j];
        if c.is_empty() {
            continue;
        }
        let mut p = dp.ps[j].clone();
        let mut k = 0i64;
        while p.len() >= c.len() && p.suffix(c.len()) == *c {
            p.truncate(p.len() - c.len());
            k += 1;
        }
        if k > 0 {
            ws[j] = ws[j].with_offset(ws[j].offset() + rat(k));
            dp.ps[j] = p;
        }
    }
    dp.alphas = WeightTuple::new(ws).expect("m ≥ 1");
    dp
}
