use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::seq::{BlockFun, Family, NatFun, NotNatural};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertKind {
    /// Derived from the closed form of the function.
    ByFamily(String),
    /// Observed on `[0, horizon)`; not a proof.
    Empirical { horizon: u64 },
}

/// Moduli `m` with `(n₀, p)` such that `f(n + p) ≡ f(n) (mod m)` for `n ≥ n₀`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpirallingCertificate {
    pub subject: String,
    pub kind: CertKind,
    pub periods: BTreeMap<u64, (u64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpiralError {
    #[error("no period modulo {modulus} within horizon {horizon}")]
    NoWitness { modulus: u64, horizon: u64 },
    #[error("{0} is bounded, hence not spiralling")]
    Bounded(String),
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error(transparent)]
    NotNatural(#[from] NotNatural),
}

impl SpirallingCertificate {
    pub fn is_proof(&self) -> bool {
        matches!(self.kind, CertKind::ByFamily(_))
    }

    /// `(n₀, p)` for `m`, from `m` itself or any stored multiple of it.
    pub fn period_for(&self, m: u64) -> Option<(u64, u64)> {
        if let Some(&x) = self.periods.get(&m) {
            return Some(x);
        }
        self.periods
            .iter()
            .filter(|(k, _)| m > 0 && *k % m == 0)
            .map(|(_, &x)| x)
            .min_by_key(|&(n0, p)| (p, n0))
    }

    /// Re-checks every stored period on `[n₀, n₀ + 4p]`.
    pub fn verify(&self, f: &dyn NatFun) -> Result<bool, NotNatural> {
        for (&m, &(n0, p)) in &self.periods {
            let mb = BigUint::from(m);
            for n in n0..=n0 + 4 * p {
                if f.try_eval(n + p)? % &mb != f.try_eval(n)? % &mb {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn residues(f: &dyn NatFun, m: u64, count: u64) -> Result<Vec<u64>, NotNatural> {
    let mb = BigUint::from(m);
    (0..count)
        .map(|n| Ok((f.try_eval(n)? % &mb).to_u64().expect("residue below modulus")))
        .collect()
}

/// Smallest divisor `p` of `full` such that the residues (periodic with period `full` from
/// `n0`) repeat with period `p`; `vals` must cover `[n0, n0 + 2·full)`.
fn min_divisor_period(vals: &[u64], n0: u64, full: u64) -> u64 {
    (1..=full)
        .filter(|p| full.is_multiple_of(*p))
        .find(|&p| (n0..n0 + full).all(|n| vals[n as usize] == vals[(n + p) as usize]))
        .unwrap_or(full)
}

/// Period from the closed form: polynomials have period dividing `m` from 0, exponentials are
/// eventually periodic by iterating `x ↦ x·base mod m`, `⌊n/d⌋` has period dividing `d·m`.
fn family_period(f: &BlockFun, m: u64) -> Result<(u64, u64), SpiralError> {
    match &f.family {
        Family::Polynomial(_) => {
            let vals = residues(f, m, 2 * m)?;
            Ok((0, min_divisor_period(&vals, 0, m)))
        }
        Family::FloorDiv(d) => {
            let full = d * m;
            let vals = residues(f, m, 2 * full)?;
            Ok((0, min_divisor_period(&vals, 0, full)))
        }
        Family::Exponential { base, .. } => {
            let mb = BigUint::from(m);
            let step = (base % &mb).to_u64().expect("residue");
            let mut x = (f.eval(0) % &mb).to_u64().expect("residue");
            let mut seen: HashMap<u64, u64> = HashMap::new();
            let mut n = 0u64;
            loop {
                if let Some(&first) = seen.get(&x) {
                    return Ok((first, n - first));
                }
                seen.insert(x, n);
                x = ((x as u128 * step as u128) % m as u128) as u64;
                n += 1;
            }
        }
        Family::TableThenTail { table, tail } => {
            let len = table.len() as u64;
            let inner = tail.shifted(f.shift.saturating_sub(len));
            let (n0, p) = family_period(&inner, m)?;
            Ok((n0 + len.saturating_sub(f.shift), p))
        }
    }
}

/// Certificate for a closed-form function; falls back to an empirical search within
/// `horizon` for families without an analytic argument.
pub fn certify_spiralling(f: &BlockFun, moduli: &[u64], horizon: u64) -> Result<SpirallingCertificate, SpiralError> {
    if moduli.contains(&0) {
        return Err(SpiralError::ZeroModulus);
    }
    if !f.is_spiralling_by_family() {
        return Err(SpiralError::Bounded(f.to_string()));
    }
    let _ = horizon;
    let mut periods = BTreeMap::new();
    for &m in moduli {
        periods.insert(m, family_period(f, m)?);
    }
    let reason = match &f.family {
        Family::Polynomial(_) => "polynomial: f(n + m) ≡ f(n) mod m",
        Family::Exponential { .. } => "exponential: residues iterate a map on ℤ/m",
        Family::FloorDiv(_) => "floor division: f(n + dm) = f(n) + m",
        Family::TableThenTail { .. } => "finite table followed by a certified tail",
    };
    Ok(SpirallingCertificate {
        subject: f.to_string(),
        kind: CertKind::ByFamily(reason.to_string()),
        periods,
    })
}

/// Smallest `p`, then smallest `n₀`, with `n₀ + 4p ≤ horizon` and `n₀ ≤ horizon / 2` such that the
/// residues are `p`-periodic from `n₀` over the whole horizon.
pub fn certify_empirical(
    f: &dyn NatFun,
    subject: impl Into<String>,
    moduli: &[u64],
    horizon: u64,
) -> Result<SpirallingCertificate, SpiralError> {
    let mut periods = BTreeMap::new();
    for &m in moduli {
        if m == 0 {
            return Err(SpiralError::ZeroModulus);
        }
        let vals = residues(f, m, horizon)?;
        let found = (1..=horizon / 4).find_map(|p| {
            // last index breaking p-periodicity
            let last_bad = (0..horizon - p)
                .rev()
                .find(|&n| vals[n as usize] != vals[(n + p) as usize]);
            let n0 = last_bad.map_or(0, |n| n + 1);
            (n0 + 4 * p <= horizon && n0 <= horizon / 2).then_some((n0, p))
        });
        match found {
            Some(x) => {
                periods.insert(m, x);
            }
            None => return Err(SpiralError::NoWitness { modulus: m, horizon }),
        }
    }
    Ok(SpirallingCertificate {
        subject: subject.into(),
        kind: CertKind::Empirical { horizon },
        periods,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::FnNat;

    #[test]
    fn examples() {
        let c = certify_spiralling(&BlockFun::identity(), &[3], 64).unwrap();
        assert_eq!(c.periods[&3], (0, 3));
        let e = BlockFun::exponential(2u32, 1u32).unwrap();
        assert_eq!(certify_spiralling(&e, &[3], 64).unwrap().periods[&3], (0, 2));
        let sq = BlockFun::polynomial([0u32, 0, 1]);
        assert_eq!(certify_spiralling(&sq, &[4], 64).unwrap().periods[&4], (0, 2));
        assert!(certify_spiralling(&BlockFun::constant(3u32), &[2], 64).is_err());
    }

    #[test]
    fn exponential_preperiod() {
        // 2^n mod 8 = 1, 2, 4, 0, 0, …
        let e = BlockFun::exponential(2u32, 1u32).unwrap();
        let c = certify_spiralling(&e, &[8, 12], 64).unwrap();
        assert_eq!(c.periods[&8], (3, 1));
        assert_eq!(c.periods[&12], (2, 2));
        assert!(c.verify(&e).unwrap());
        assert_eq!(c.period_for(4), Some((3, 1)));
        assert_eq!(c.period_for(6), Some((2, 2)));
    }

    #[test]
    fn floordiv_and_table() {
        let f = BlockFun::floor_div(2).unwrap();
        let c = certify_spiralling(&f, &[3], 64).unwrap();
        assert_eq!(c.periods[&3], (0, 6));
        let t = BlockFun::table_then_tail([5u32, 9, 9], BlockFun::identity());
        let c = certify_spiralling(&t, &[2], 64).unwrap();
        assert!(c.verify(&t).unwrap());
        assert_eq!(c.periods[&2], (3, 2));
    }

    #[test]
    fn empirical_search() {
        let f = FnNat(|n: u64| BigUint::from(n * n + 3));
        let c = certify_empirical(&f, "n²+3", &[2, 3, 5, 8], 512).unwrap();
        assert!(!c.is_proof());
        assert!(c.verify(&f).unwrap());
        let g = FnNat(|n: u64| BigUint::from(if n < 200 { 0 } else { n }));
        assert_eq!(certify_empirical(&g, "late", &[7], 512).unwrap().periods[&7], (200, 7));
        let h = FnNat(|n: u64| BigUint::from(if n < 400 { 0 } else { n }));
        assert!(certify_empirical(&h, "too late", &[7], 512).is_err());
        // Thue-Morse is overlap-free, so no window of length 4p is p-periodic
        let t = FnNat(|n: u64| BigUint::from(n.count_ones()));
        assert_eq!(
            certify_empirical(&t, "popcount", &[2], 512),
            Err(SpiralError::NoWitness {
                modulus: 2,
                horizon: 512
            })
        );
    }
}
