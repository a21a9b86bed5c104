//! Closed-form functions `ℕ → ℕ` used as block-length sequences.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// `c0 + c1·x + c2·x² + …`, coefficients lowest degree first.
    Polynomial(Vec<BigUint>),
    /// `scale · base^x`.
    Exponential { base: BigUint, scale: BigUint },
    /// `⌊x / divisor⌋`.
    FloorDiv(u64),
    /// `table[x]` for `x < table.len()`, then `tail(x − table.len())`.
    TableThenTail { table: Vec<BigUint>, tail: Box<BlockFun> },
}

/// A function `n ↦ g(n + shift)` where `g` is in one of the closed-form families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockFun {
    pub family: Family,
    pub shift: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BlockFunError {
    #[error("exponential base must be at least 2")]
    BaseTooSmall,
    #[error("exponential scale must be at least 1")]
    ZeroScale,
    #[error("floor divisor must be at least 1")]
    ZeroDivisor,
}

impl BlockFun {
    fn new(family: Family) -> Self {
        BlockFun { family, shift: 0 }
    }

    pub fn polynomial<I, T>(coeffs: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigUint>,
    {
        let mut c: Vec<BigUint> = coeffs.into_iter().map(Into::into).collect();
        while c.len() > 1 && c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        if c.is_empty() {
            c.push(BigUint::zero());
        }
        Self::new(Family::Polynomial(c))
    }

    /// `f(n) = n`.
    pub fn identity() -> Self {
        Self::polynomial([0u32, 1])
    }

    pub fn constant(c: impl Into<BigUint>) -> Self {
        Self::polynomial([c.into()])
    }

    pub fn exponential(base: impl Into<BigUint>, scale: impl Into<BigUint>) -> Result<Self, BlockFunError> {
        let base = base.into();
        let scale = scale.into();
        if base < BigUint::from(2u32) {
            return Err(BlockFunError::BaseTooSmall);
        }
        if scale.is_zero() {
            return Err(BlockFunError::ZeroScale);
        }
        Ok(Self::new(Family::Exponential { base, scale }))
    }

    pub fn floor_div(divisor: u64) -> Result<Self, BlockFunError> {
        if divisor == 0 {
            return Err(BlockFunError::ZeroDivisor);
        }
        Ok(Self::new(Family::FloorDiv(divisor)))
    }

    pub fn table_then_tail<I, T>(table: I, tail: BlockFun) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigUint>,
    {
        Self::new(Family::TableThenTail {
            table: table.into_iter().map(Into::into).collect(),
            tail: Box::new(tail),
        })
    }

    /// `S^k f`, i.e. `n ↦ f(n + k)`.
    pub fn shifted(&self, k: u64) -> Self {
        BlockFun {
            family: self.family.clone(),
            shift: self.shift + k,
        }
    }

    pub fn eval(&self, n: u64) -> BigUint {
        eval_family(&self.family, n + self.shift)
    }

    pub fn values(&self, count: u64) -> Vec<BigUint> {
        (0..count).map(|n| self.eval(n)).collect()
    }

    /// True when the family guarantees `f(n) → ∞` and ultimate periodicity modulo every `m`.
    pub fn is_spiralling_by_family(&self) -> bool {
        match &self.family {
            Family::Polynomial(c) => c.iter().skip(1).any(|x| !x.is_zero()),
            Family::Exponential { .. } | Family::FloorDiv(_) => true,
            Family::TableThenTail { tail, .. } => tail.is_spiralling_by_family(),
        }
    }

    /// Index from which `f` is non-decreasing, if known from the family.
    pub fn monotone_from(&self) -> Option<u64> {
        match &self.family {
            Family::Polynomial(_) | Family::Exponential { .. } | Family::FloorDiv(_) => Some(0),
            Family::TableThenTail { table, tail } => {
                let start = (table.len() as u64).saturating_sub(self.shift);
                Some(start + tail.monotone_from()?)
            }
        }
    }

    /// Degree of a polynomial family (after the table, if any).
    pub fn polynomial_degree(&self) -> Option<usize> {
        match &self.family {
            Family::Polynomial(c) => Some(c.len() - 1),
            Family::TableThenTail { tail, .. } => tail.polynomial_degree(),
            _ => None,
        }
    }
}

fn eval_family(family: &Family, x: u64) -> BigUint {
    match family {
        Family::Polynomial(coeffs) => {
            let xb = BigUint::from(x);
            coeffs.iter().rev().fold(BigUint::zero(), |acc, c| acc * &xb + c)
        }
        Family::Exponential { base, scale } => {
            let e = x.to_u32().expect("exponent exceeds u32 range");
            scale * base.pow(e)
        }
        Family::FloorDiv(d) => BigUint::from(x / d),
        Family::TableThenTail { table, tail } => match usize::try_from(x) {
            Ok(i) if i < table.len() => table[i].clone(),
            _ => tail.eval(x - table.len() as u64),
        },
    }
}

impl fmt::Display for BlockFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Polynomial(c) => {
                write!(f, "poly")?;
                for x in c {
                    write!(f, " {x}")?;
                }
            }
            Family::Exponential { base, scale } => {
                write!(f, "exp {base}")?;
                if !scale.is_one() {
                    write!(f, " {scale}")?;
                }
            }
            Family::FloorDiv(d) => write!(f, "floordiv {d}")?,
            Family::TableThenTail { table, tail } => {
                write!(f, "table")?;
                for x in table {
                    write!(f, " {x}")?;
                }
                write!(f, " then {tail}")?;
            }
        }
        if self.shift > 0 {
            write!(f, " shift {}", self.shift)?;
        }
        Ok(())
    }
}

/// Value of a derived function that is not a natural number at some index.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("value {value} at index {index} is not a natural number")]
pub struct NotNatural {
    pub index: u64,
    pub value: String,
}

/// A possibly partial function `ℕ → ℕ` (derived functions may leave ℕ).
pub trait NatFun: Send + Sync + fmt::Debug {
    fn try_eval(&self, n: u64) -> Result<BigUint, NotNatural>;
}

impl NatFun for BlockFun {
    fn try_eval(&self, n: u64) -> Result<BigUint, NotNatural> {
        Ok(self.eval(n))
    }
}

impl<T: NatFun + ?Sized> NatFun for Arc<T> {
    fn try_eval(&self, n: u64) -> Result<BigUint, NotNatural> {
        (**self).try_eval(n)
    }
}

/// Pointwise closure wrapper, mostly for tests and ad-hoc functions.
pub struct FnNat<F>(pub F);

impl<F> fmt::Debug for FnNat<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnNat(..)")
    }
}

impl<F> NatFun for FnNat<F>
where
    F: Fn(u64) -> BigUint + Send + Sync,
{
    fn try_eval(&self, n: u64) -> Result<BigUint, NotNatural> {
        Ok((self.0)(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vals(f: &BlockFun, n: u64) -> Vec<u64> {
        f.values(n).iter().map(|v| v.to_u64().unwrap()).collect()
    }

    #[test]
    fn families_evaluate() {
        assert_eq!(vals(&BlockFun::identity(), 4), [0, 1, 2, 3]);
        assert_eq!(vals(&BlockFun::polynomial([0u32, 0, 1]), 5), [0, 1, 4, 9, 16]);
        assert_eq!(vals(&BlockFun::exponential(2u32, 3u32).unwrap(), 4), [3, 6, 12, 24]);
        assert_eq!(vals(&BlockFun::floor_div(2).unwrap(), 6), [0, 0, 1, 1, 2, 2]);
        let t = BlockFun::table_then_tail([7u32, 5], BlockFun::identity());
        assert_eq!(vals(&t, 4), [7, 5, 0, 1]);
    }

    #[test]
    fn shift_applies_before_evaluation() {
        let sq = BlockFun::polynomial([0u32, 0, 1]).shifted(1);
        assert_eq!(vals(&sq, 4), [1, 4, 9, 16]);
        assert_eq!(sq.to_string(), "poly 0 0 1 shift 1");
    }

    #[test]
    fn large_values_are_exact() {
        let e = BlockFun::exponential(2u32, 1u32).unwrap();
        assert_eq!(e.eval(100), BigUint::one() << 100usize);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert_eq!(BlockFun::exponential(1u32, 1u32), Err(BlockFunError::BaseTooSmall));
        assert_eq!(BlockFun::floor_div(0), Err(BlockFunError::ZeroDivisor));
        assert!(!BlockFun::constant(3u32).is_spiralling_by_family());
    }
}
