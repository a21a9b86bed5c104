use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use super::{
    blockfun_polynomial, clear_denominators, one_weight_project, poly_transduct_normalize, squares_steps, ChainStep,
    DegreeError, Projection, ReductionChain, StepKind,
};
use crate::construct::BasicOp;
use crate::fst::{run_stream, zero_loops, Fst};
use crate::lookahead::la_compile_eager;
use crate::normalize::{
    disambiguate, dp_to_canonical, extract_transduct, Canonical, Disambiguated, DoubleProduct, NormalizeError,
    TransductExtraction,
};
use crate::poly::Polynomial;
use crate::seq::{blocks_encode, find_eventual_period, BlockFun, Stream};
use crate::weights::certify_spiralling;

/// Longest period tried by [`looks_ultimately_periodic`].
pub const PERIOD_SCAN: usize = 256;

/// True when the last half of a `bits`-bit prefix repeats with a period of at most
/// [`PERIOD_SCAN`]. A finite stream counts as periodic.
pub fn looks_ultimately_periodic(s: &Stream, bits: usize) -> bool {
    match s.prefix(bits) {
        Ok(p) => find_eventual_period(&p, PERIOD_SCAN, 2).is_some_and(|(start, _)| start <= bits / 2),
        Err(_) => true,
    }
}

/// The stages of the reduction `T(⟨f⟩) → ⟨n²⟩` for a quadratic `f`.
#[derive(Clone, Debug)]
pub struct AtomWitness {
    pub extraction: TransductExtraction,
    pub canonical: Canonical,
    pub projection: Projection,
    /// `b + Σ aⱼ·f(shift + nk + j)` for the projected weight.
    pub q: Polynomial,
    /// Common denominator of `q`.
    pub scale: BigUint,
    /// Bits before the canonical tail.
    pub dropped: u64,
    pub chain: ReductionChain,
}

/// Bits of `w` and of the first `rounds` rounds.
fn head_len(dp: &DoubleProduct, rounds: u64) -> Result<u64, NormalizeError> {
    let mut total = BigUint::from(dp.w.len());
    for i in 0..rounds {
        for j in 0..dp.m() {
            let e = dp.psi_natural(i, j).map_err(NormalizeError::Exponent)?;
            total += dp.ps[j].len() + e * dp.cs[j].len();
        }
    }
    total
        .to_u64()
        .ok_or_else(|| NormalizeError::TooLarge(total.to_string()))
}

fn natural(c: &crate::poly::Rational) -> Option<u64> {
    c.is_integer().then(|| c.to_integer().to_u64()).flatten()
}

/// Extraction, disambiguation, canonical form, projection and the squares chain, glued into one
/// chain carrying `T(⟨f⟩)` to `⟨n²⟩`.
pub fn atom_witness(t: &Fst, f: &BlockFun) -> Result<AtomWitness, DegreeError> {
    let p = blockfun_polynomial(f)
        .filter(|p| p.degree() == Some(2))
        .ok_or_else(|| DegreeError::NotQuadratic(f.to_string()))?;
    let z = zero_loops(t).z as u64;
    let cert = certify_spiralling(f, &[z], 0)?;
    let extraction = extract_transduct(t, f, &cert)?;
    let dp = match disambiguate(&extraction.dp)? {
        Disambiguated::Form(dp) => dp,
        Disambiguated::UltimatelyPeriodic(v) => return Err(DegreeError::UltimatelyPeriodic(v.reason)),
    };
    let canonical = dp_to_canonical(&dp)?;
    let dropped = head_len(&dp, canonical.n2)?;
    let forth = la_compile_eager(&canonical.forth)?;
    let projection = one_weight_project(&canonical.alphas, canonical.shift)?;
    let q = poly_transduct_normalize(&p, &projection.beta, canonical.shift);
    let (scale, dq) = clear_denominators(&q);
    let coeff = |i: usize| natural(&dq.coeff(i)).ok_or_else(|| DegreeError::NotQuadratic(dq.to_string()));
    let (c, b, a) = (coeff(0)?, coeff(1)?, coeff(2)?);

    let mut steps = vec![
        ChainStep {
            desc: format!("drop {dropped}"),
            kind: StepKind::DropBits(dropped),
            expect: None,
        },
        ChainStep::machine("forth", forth).expecting(Arc::new(canonical.g_prime())),
        ChainStep::machine(
            format!("project {} mod {}", projection.index, canonical.alphas.m()),
            projection.machine.clone(),
        )
        .expecting(Arc::new(projection.fun(f))),
    ];
    if !scale.is_one() {
        let d = scale.to_u64().ok_or_else(|| DegreeError::TooLarge(scale.to_string()))?;
        steps.push(ChainStep::basic(&BasicOp::ScaleUp(d))?.expecting(Arc::new(BlockFun::polynomial([c, b, a]))));
    }
    steps.extend(squares_steps(a, b, c)?);
    let chain = ReductionChain {
        steps,
        source_spec: format!("{} on blocks {f}", t.name()),
        target_spec: "blocks poly 0 0 1".into(),
        source: run_stream(t, &blocks_encode(f)),
        target: Arc::new(BlockFun::polynomial([0u32, 0, 1])),
    };
    Ok(AtomWitness {
        extraction,
        canonical,
        projection,
        q,
        scale,
        dropped,
        chain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::FstSpec;
    use crate::normalize::dp_emit;
    use crate::seq::shift_stream;

    fn machine(rows: &[(&str, u8, &str, &str)]) -> Fst {
        Fst::from_spec(&FstSpec::from_rows("m", "q0", rows)).unwrap()
    }

    fn squares(n: u64) -> Vec<BigUint> {
        (0..n).map(|i| BigUint::from(i * i)).collect()
    }

    fn check(t: &Fst) -> AtomWitness {
        let f = BlockFun::polynomial([0u32, 0, 1]);
        let w = atom_witness(t, &f).unwrap();
        let sigma = run_stream(t, &blocks_encode(&f));
        let tail = dp_emit(&w.canonical.tail());
        assert_eq!(
            shift_stream(&sigma, w.dropped).prefix(2048).unwrap(),
            tail.prefix(2048).unwrap()
        );
        let r = w.chain.verify(10);
        assert!(r.ok, "{r}");
        assert_eq!(r.final_blocks, squares(10));
        w
    }

    #[test]
    fn identity_machine() {
        let w = check(&Fst::identity());
        assert!(w.scale.is_one());
    }

    #[test]
    fn ambiguous_example() {
        check(&machine(&[
            ("q0", 0, "q0", "01"),
            ("q0", 1, "q1", "1"),
            ("q1", 0, "q1", "10"),
            ("q1", 1, "q0", "1"),
        ]));
    }

    #[test]
    fn three_state_example() {
        let w = check(&machine(&[
            ("q0", 0, "q1", "00"),
            ("q0", 1, "q2", "1"),
            ("q1", 1, "q0", "1"),
            ("q1", 0, "q2", "01"),
            ("q2", 0, "q0", "10"),
            ("q2", 1, "q1", "1"),
        ]));
        assert_eq!(w.extraction.z, 3);
    }

    #[test]
    fn periodic_and_linear_inputs_are_rejected() {
        let f = BlockFun::polynomial([0u32, 0, 1]);
        let ones = machine(&[("q0", 0, "q0", "-"), ("q0", 1, "q0", "1")]);
        assert!(looks_ultimately_periodic(&run_stream(&ones, &blocks_encode(&f)), 4096));
        assert!(!looks_ultimately_periodic(&blocks_encode(&f), 8192));
        assert!(matches!(
            atom_witness(&ones, &f),
            Err(DegreeError::UltimatelyPeriodic(_))
        ));
        assert!(matches!(
            atom_witness(&Fst::identity(), &BlockFun::identity()),
            Err(DegreeError::NotQuadratic(_))
        ));
    }
}
