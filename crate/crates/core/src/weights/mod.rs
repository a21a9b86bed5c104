//! Weights and weighted products `α⃗ ⊙ f`.

mod spiral;
mod text;

pub use spiral::{certify_empirical, certify_spiralling, CertKind, SpiralError, SpirallingCertificate};
pub use text::{parse_rational, parse_weight, parse_weights, write_weights, WeightsTextError};

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use crate::poly::Rational;
use crate::poly::{rat, rat_big, Polynomial};
use crate::seq::{BlockFun, Family, NatFun, NotNatural};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WeightError {
    #[error("weight coefficient {index} is negative: {value}")]
    NegativeCoefficient { index: usize, value: String },
    #[error("a weight tuple needs at least one weight")]
    Empty,
    #[error("a weight needs at least the offset")]
    NoOffset,
}

/// `⟨a₀, …, a_{k−1}, b⟩`: `α·f = a₀f(0) + … + a_{k−1}f(k−1) + b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weight {
    coeffs: Vec<Rational>,
    offset: Rational,
}

impl Weight {
    pub fn new(coeffs: Vec<Rational>, offset: Rational) -> Result<Self, WeightError> {
        if let Some((index, c)) = coeffs.iter().enumerate().find(|(_, c)| c.is_negative()) {
            return Err(WeightError::NegativeCoefficient {
                index,
                value: c.to_string(),
            });
        }
        Ok(Weight { coeffs, offset })
    }

    /// From the full tuple, offset last.
    pub fn from_tuple(t: &[Rational]) -> Result<Self, WeightError> {
        let (b, a) = t.split_last().ok_or(WeightError::NoOffset)?;
        Self::new(a.to_vec(), b.clone())
    }

    /// From an integer tuple, offset last; panics on a negative coefficient or an empty tuple.
    pub fn ints(t: &[i64]) -> Self {
        let t: Vec<Rational> = t.iter().map(|&x| rat(x)).collect();
        Self::from_tuple(&t).expect("valid integer weight")
    }

    pub fn constant(b: Rational) -> Self {
        Weight {
            coeffs: Vec::new(),
            offset: b,
        }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn offset(&self) -> &Rational {
        &self.offset
    }

    /// `k`, the number of function values consumed.
    pub fn k(&self) -> usize {
        self.coeffs.len()
    }

    /// `|α| = k + 1`.
    pub fn len(&self) -> usize {
        self.coeffs.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// `α · S^shift f`.
    pub fn apply_by<E>(&self, shift: u64, mut f: impl FnMut(u64) -> Result<BigUint, E>) -> Result<Rational, E> {
        let mut acc = self.offset.clone();
        for (j, a) in self.coeffs.iter().enumerate() {
            if !a.is_zero() {
                acc += a * rat_big(&f(shift + j as u64)?);
            }
        }
        Ok(acc)
    }

    pub fn apply(&self, f: &BlockFun, shift: u64) -> Rational {
        self.apply_by::<std::convert::Infallible>(shift, |x| Ok(f.eval(x)))
            .unwrap_or_else(|e| match e {})
    }

    pub fn scaled(&self, k: &Rational) -> Weight {
        Weight {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
            offset: &self.offset * k,
        }
    }

    pub fn with_offset(&self, b: Rational) -> Weight {
        Weight {
            coeffs: self.coeffs.clone(),
            offset: b,
        }
    }

    /// Coefficients of `self` followed by those of `other`; the offsets add.
    pub fn concat(&self, other: &Weight) -> Weight {
        let mut coeffs = self.coeffs.clone();
        coeffs.extend(other.coeffs.iter().cloned());
        Weight {
            coeffs,
            offset: &self.offset + &other.offset,
        }
    }

    /// `(a, b, d)` with `α = ⟨a₀/d, …, a_{k−1}/d, b/d⟩` and `d` the lcm of all denominators.
    pub fn integer_form(&self) -> (Vec<BigUint>, BigInt, BigUint) {
        let d = self
            .coeffs
            .iter()
            .chain(std::iter::once(&self.offset))
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let scale = |c: &Rational| (c * Rational::from_integer(d.clone())).to_integer();
        let a = self
            .coeffs
            .iter()
            .map(|c| scale(c).to_biguint().expect("nonnegative coefficient"))
            .collect();
        (a, scale(&self.offset), d.to_biguint().expect("positive denominator"))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for c in &self.coeffs {
            write!(f, "{c} ")?;
        }
        write!(f, "| {})", self.offset)
    }
}

pub fn weight_nonconstant(alpha: &Weight) -> bool {
    !alpha.is_constant()
}

/// `α · f`.
pub fn wapply(alpha: &Weight, f: &BlockFun) -> Rational {
    alpha.apply(f, 0)
}

/// `⟨α₀, …, α_{m−1}⟩`, never empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightTuple(Vec<Weight>);

impl WeightTuple {
    pub fn new(ws: Vec<Weight>) -> Result<Self, WeightError> {
        if ws.is_empty() {
            return Err(WeightError::Empty);
        }
        Ok(WeightTuple(ws))
    }

    pub fn single(w: Weight) -> Self {
        WeightTuple(vec![w])
    }

    pub fn weights(&self) -> &[Weight] {
        &self.0
    }

    pub fn into_weights(self) -> Vec<Weight> {
        self.0
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, i: usize) -> &Weight {
        &self.0[i % self.0.len()]
    }

    /// `s_l = k₀ + … + k_{l−1}`.
    pub fn s(&self, l: usize) -> u64 {
        self.0[..l].iter().map(|w| w.k() as u64).sum()
    }

    pub fn s_m(&self) -> u64 {
        self.s(self.m())
    }

    /// `⟨α₁, …, α_{m−1}, α₀⟩`.
    pub fn rotate(&self) -> Self {
        let mut v = self.0.clone();
        v.rotate_left(1);
        WeightTuple(v)
    }

    pub fn all_constant(&self) -> bool {
        self.0.iter().all(Weight::is_constant)
    }

    pub fn all_nonconstant(&self) -> bool {
        self.0.iter().all(weight_nonconstant)
    }
}

impl fmt::Display for WeightTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨")?;
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, "⟩")
    }
}

/// `(r, t)` with `n = qm + r` and `t = q·s_m + s_r`.
pub fn wprod_position(alphas: &WeightTuple, n: u64) -> (usize, u64) {
    let m = alphas.m() as u64;
    let (q, r) = n.div_rem(&m);
    (r as usize, q * alphas.s_m() + alphas.s(r as usize))
}

/// `(α⃗ ⊙ f)(n)` for a fallible `f`.
pub fn wprod_by<E>(alphas: &WeightTuple, n: u64, f: impl FnMut(u64) -> Result<BigUint, E>) -> Result<Rational, E> {
    let (r, t) = wprod_position(alphas, n);
    alphas.get(r).apply_by(t, f)
}

/// `(α⃗ ⊙ f)(n)` through the closed form `α_r · S^t f`.
pub fn wprod(alphas: &WeightTuple, f: &BlockFun, n: u64) -> Rational {
    let (r, t) = wprod_position(alphas, n);
    alphas.get(r).apply(f, t)
}

/// `(α⃗ ⊙ f)(n)` by unrolling the defining recursion step by step.
pub fn wprod_recursive(alphas: &WeightTuple, f: &BlockFun, n: u64) -> Rational {
    let mut shift = 0u64;
    let mut head = 0usize;
    for _ in 0..n {
        shift += alphas.get(head).k() as u64;
        head = (head + 1) % alphas.m();
    }
    alphas.get(head).apply(f, shift)
}

pub fn wprod_values(alphas: &WeightTuple, f: &BlockFun, count: u64) -> Vec<Rational> {
    (0..count).map(|n| wprod(alphas, f, n)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Naturality {
    Natural,
    Violation { n: u64, value: Rational },
}

impl Naturality {
    pub fn is_natural(&self) -> bool {
        matches!(self, Naturality::Natural)
    }
}

pub fn is_natural_value(v: &Rational) -> bool {
    v.is_integer() && !v.is_negative()
}

/// Whether `(α⃗ ⊙ f)(n) ∈ ℕ` for all `n < horizon`.
pub fn wprod_natural(alphas: &WeightTuple, f: &BlockFun, horizon: u64) -> Naturality {
    for n in 0..horizon {
        let v = wprod(alphas, f, n);
        if !is_natural_value(&v) {
            return Naturality::Violation { n, value: v };
        }
    }
    Naturality::Natural
}

/// Largest scan towards a sign change accepted by [`wprod_natural_symbolic`].
const SYMBOLIC_SCAN_LIMIT: u64 = 1 << 20;

/// `(α⃗ ⊙ f)(qm + r)` as a polynomial in `q`, for polynomial `f`.
pub fn wprod_residue_polynomial(alphas: &WeightTuple, f: &BlockFun, r: usize) -> Option<Polynomial> {
    let Family::Polynomial(c) = &f.family else {
        return None;
    };
    let p = Polynomial::from_naturals(c);
    let s_m = rat(alphas.s_m() as i64);
    let w = alphas.get(r);
    let base = alphas.s(r) + f.shift;
    let mut acc = Polynomial::constant(w.offset().clone());
    for (j, a) in w.coeffs().iter().enumerate() {
        let term = p.compose_affine(&s_m, &rat((base + j as u64) as i64)).scale(a);
        acc = &acc + &term;
    }
    Some(acc)
}

/// Naturality for all `n`, decided per residue class when `f` is a polynomial: integrality
/// on `deg + 1` consecutive points, nonnegativity up to a root bound. `None` if `f` is not a
/// polynomial or the root bound is too large to scan.
pub fn wprod_natural_symbolic(alphas: &WeightTuple, f: &BlockFun) -> Option<Naturality> {
    let m = alphas.m() as u64;
    let mut first: Option<(u64, Rational)> = None;
    let mut note = |q: u64, r: usize, v: Rational| {
        let n = q * m + r as u64;
        if first.as_ref().is_none_or(|(k, _)| n < *k) {
            first = Some((n, v));
        }
    };
    for r in 0..alphas.m() {
        let g = wprod_residue_polynomial(alphas, f, r)?;
        let deg = g.degree().unwrap_or(0) as u64;
        if let Some(q) = (0..=deg).find(|&q| !g.eval_int(q as i64).is_integer()) {
            note(q, r, g.eval_int(q as i64));
            continue;
        }
        if g.leading().is_negative() {
            // eventually negative: find where
            let q = (0..SYMBOLIC_SCAN_LIMIT).find(|&q| g.eval_int(q as i64).is_negative())?;
            note(q, r, g.eval_int(q as i64));
            continue;
        }
        let bound = g.root_bound().ceil().to_integer().to_u64()?;
        if bound > SYMBOLIC_SCAN_LIMIT {
            return None;
        }
        if let Some(q) = (0..=bound).find(|&q| g.eval_int(q as i64).is_negative()) {
            note(q, r, g.eval_int(q as i64));
        }
    }
    Some(match first {
        None => Naturality::Natural,
        Some((n, value)) => Naturality::Violation { n, value },
    })
}

/// `β⃗` with `α⃗ ⊙ f = zip_m(⟨β₀⟩ ⊙ f, …, ⟨β_{m−1}⟩ ⊙ f)`; every `βᵢ` has length `s_m + 1`.
pub fn wprod_unzip(alphas: &WeightTuple) -> Vec<Weight> {
    let s_m = alphas.s_m() as usize;
    (0..alphas.m())
        .map(|i| {
            let mut c = vec![Rational::zero(); s_m];
            let start = alphas.s(i) as usize;
            for (h, a) in alphas.get(i).coeffs().iter().enumerate() {
                c[start + h] = a.clone();
            }
            Weight {
                coeffs: c,
                offset: alphas.get(i).offset().clone(),
            }
        })
        .collect()
}

/// `n ↦ f(n + k)`.
#[derive(Debug, Clone)]
pub struct ShiftedFun {
    pub f: Arc<dyn NatFun>,
    pub k: u64,
}

impl NatFun for ShiftedFun {
    fn try_eval(&self, n: u64) -> Result<BigUint, NotNatural> {
        self.f.try_eval(n + self.k)
    }
}

/// `zip_k(f₀, …, f_{k−1})(kn + i) = fᵢ(n)`.
#[derive(Debug, Clone)]
pub struct Zip(pub Vec<Arc<dyn NatFun>>);

pub fn zip(fs: Vec<Arc<dyn NatFun>>) -> Zip {
    assert!(!fs.is_empty(), "zip needs at least one function");
    Zip(fs)
}

impl NatFun for Zip {
    fn try_eval(&self, n: u64) -> Result<BigUint, NotNatural> {
        let k = self.0.len() as u64;
        self.0[(n % k) as usize].try_eval(n / k)
    }
}

/// `α⃗ ⊙ f` as a function `ℕ → ℕ`; non-natural values are errors.
#[derive(Debug, Clone)]
pub struct WprodFun {
    pub alphas: WeightTuple,
    pub f: Arc<dyn NatFun>,
}

impl WprodFun {
    pub fn new(alphas: WeightTuple, f: Arc<dyn NatFun>) -> Self {
        WprodFun { alphas, f }
    }

    pub fn of_blockfun(alphas: WeightTuple, f: &BlockFun) -> Self {
        Self::new(alphas, Arc::new(f.clone()))
    }

    pub fn value(&self, n: u64) -> Result<Rational, NotNatural> {
        wprod_by(&self.alphas, n, |x| self.f.try_eval(x))
    }
}

pub fn to_natural(index: u64, v: &Rational) -> Result<BigUint, NotNatural> {
    if is_natural_value(v) {
        let (sign, mag) = v.to_integer().into_parts();
        debug_assert!(sign != Sign::Minus);
        Ok(mag)
    } else {
        Err(NotNatural {
            index,
            value: v.to_string(),
        })
    }
}

impl NatFun for WprodFun {
    fn try_eval(&self, n: u64) -> Result<BigUint, NotNatural> {
        to_natural(n, &self.value(n)?)
    }
}
