use num_integer::Integer;

use super::{Fst, StateId};
use crate::seq::{Bit, Word};

/// A simple cycle of 0-transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroLoop {
    pub states: Vec<StateId>,
}

impl ZeroLoop {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroLoopReport {
    pub loops: Vec<ZeroLoop>,
    /// lcm of all loop lengths, `Z(T)`.
    pub z: usize,
}

/// All zero-loops and `Z(T)`.
pub fn zero_loops(m: &Fst) -> ZeroLoopReport {
    let n = m.num_states();
    // 0 = unvisited, 1 = on the current path, 2 = finished
    let mut color = vec![0u8; n];
    let mut loops = Vec::new();
    for s in 0..n {
        if color[s] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut q = s;
        while color[q] == 0 {
            color[q] = 1;
            path.push(q);
            q = m.next(q, Bit::Zero);
        }
        if color[q] == 1 {
            let at = path.iter().position(|&x| x == q).expect("q on path");
            loops.push(ZeroLoop {
                states: path[at..].to_vec(),
            });
        }
        for p in path {
            color[p] = 2;
        }
    }
    let z = loops.iter().fold(1usize, |acc, l| acc.lcm(&l.len()));
    ZeroLoopReport { loops, z }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PumpDecomposition {
    pub q: StateId,
    pub n: usize,
    pub z: usize,
    pub p: Word,
    pub c: Word,
    pub target: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PumpError {
    #[error("pumping needs n ≥ |Q| = {states}, got {n}")]
    TooShort { n: usize, states: usize },
    #[error("decomposition fails at repetition {i}")]
    Unverified { i: usize },
}

/// Repetitions checked by [`pump`].
pub const PUMP_CHECKS: usize = 8;

/// `p = λ(q, 1 0ⁿ)` and `c = λ(δ(q, 1 0ⁿ), 0^z)` with `λ(q, 1 0^{n+iz}) = p cⁱ`.
pub fn pump(m: &Fst, q: StateId, n: usize) -> Result<PumpDecomposition, PumpError> {
    if n < m.num_states() {
        return Err(PumpError::TooShort {
            n,
            states: m.num_states(),
        });
    }
    let z = zero_loops(m).z;
    let (target, p) = m.run_word(q, &Word::block(n));
    let (_, c) = m.run_word(target, &Word::zeros(z));
    for i in 0..=PUMP_CHECKS {
        let (t, out) = m.run_word(q, &Word::block(n + i * z));
        if t != target || out != p.concat(&c.pow(i)) {
            return Err(PumpError::Unverified { i });
        }
    }
    Ok(PumpDecomposition { q, n, z, p, c, target })
}
