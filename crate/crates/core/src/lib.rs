//! Finite-state transducers on infinite binary sequences.
//!
//! The crate covers complete deterministic transducers and their look-ahead variant, lazy
//! sequences with a block encoding `⟨f⟩ = ∏ 1 0^{f(i)}`, weighted products of spiralling
//! functions, normal forms of transducts, and reduction chains between block sequences.

pub mod construct;
pub mod degrees;
pub mod fst;
pub mod lookahead;
pub mod normalize;
pub mod poly;
pub mod seq;
pub mod weights;
