//! Complete deterministic finite-state transducers.

mod analysis;
mod compose;
mod run;
pub(crate) mod text;

pub use analysis::{pump, zero_loops, PumpDecomposition, PumpError, ZeroLoop, ZeroLoopReport};
pub use compose::{compose, compose_all, LazyCompose};
pub use run::{run_stream, run_stream_arc, STALL_LIMIT};
pub use text::{parse_fst, write_fst, FstTextError};

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::seq::{Bit, Word};

pub type StateId = usize;

/// Anything that reads one bit at a time and emits a word per bit.
pub trait Transducer: Send + Sync + fmt::Debug {
    fn initial(&self) -> StateId;

    /// Appends `λ(q, b)` to `out` and returns `δ(q, b)`.
    fn step_into(&self, q: StateId, b: Bit, out: &mut Word) -> StateId;

    /// Number of states when known without exploring.
    fn state_count(&self) -> Option<usize> {
        None
    }

    fn state_label(&self, q: StateId) -> String {
        format!("s{q}")
    }

    /// `(δ(q, u), λ(q, u))`.
    fn run_word(&self, q: StateId, u: &[Bit]) -> (StateId, Word) {
        let mut out = Word::empty();
        let q = u.iter().fold(q, |q, &b| self.step_into(q, b, &mut out));
        (q, out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FstError {
    #[error("missing transition for state {state} on bit {bit}")]
    MissingTransition { state: String, bit: Bit },
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("duplicate state {0}")]
    DuplicateState(String),
    #[error("duplicate transition for state {state} on bit {bit}")]
    DuplicateTransition { state: String, bit: Bit },
    #[error("machine has no states")]
    NoStates,
}

/// An unchecked description of a machine by state labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FstSpec {
    pub name: String,
    pub states: Vec<String>,
    pub initial: String,
    pub transitions: Vec<TransitionSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSpec {
    pub from: String,
    pub bit: Bit,
    pub to: String,
    pub out: Word,
}

impl FstSpec {
    /// States in order of first appearance, initial state first.
    pub fn from_rows(name: &str, initial: &str, rows: &[(&str, u8, &str, &str)]) -> Self {
        let mut states = vec![initial.to_string()];
        let mut transitions = Vec::new();
        for &(from, bit, to, out) in rows {
            for s in [from, to] {
                if !states.iter().any(|x| x == s) {
                    states.push(s.to_string());
                }
            }
            transitions.push(TransitionSpec {
                from: from.to_string(),
                bit: if bit == 0 { Bit::Zero } else { Bit::One },
                to: to.to_string(),
                out: Word::parse_token(out).expect("binary output word"),
            });
        }
        FstSpec {
            name: name.to_string(),
            states,
            initial: initial.to_string(),
            transitions,
        }
    }
}

/// Checks completeness and that every referenced state exists.
pub fn validate(spec: &FstSpec) -> Result<(), FstError> {
    Fst::from_spec(spec).map(|_| ())
}

/// A complete deterministic transducer `⟨Q, q₀, δ, λ⟩`.
#[derive(Clone, PartialEq, Eq)]
pub struct Fst {
    name: String,
    labels: Vec<String>,
    initial: StateId,
    trans: Vec<[(StateId, Word); 2]>,
}

impl fmt::Debug for Fst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fst({}, {} states)", self.name, self.labels.len())
    }
}

impl Fst {
    pub fn from_spec(spec: &FstSpec) -> Result<Fst, FstError> {
        if spec.states.is_empty() {
            return Err(FstError::NoStates);
        }
        let mut index = HashMap::new();
        for (i, s) in spec.states.iter().enumerate() {
            if index.insert(s.as_str(), i).is_some() {
                return Err(FstError::DuplicateState(s.clone()));
            }
        }
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| FstError::UnknownState(s.to_string()))
        };
        let initial = lookup(&spec.initial)?;
        let mut table: Vec<[Option<(StateId, Word)>; 2]> = vec![[None, None]; spec.states.len()];
        for t in &spec.transitions {
            let from = lookup(&t.from)?;
            let to = lookup(&t.to)?;
            let slot = &mut table[from][t.bit.index()];
            if slot.is_some() {
                return Err(FstError::DuplicateTransition {
                    state: t.from.clone(),
                    bit: t.bit,
                });
            }
            *slot = Some((to, t.out.clone()));
        }
        let mut trans = Vec::with_capacity(table.len());
        for (q, [a, b]) in table.into_iter().enumerate() {
            let missing = |bit| FstError::MissingTransition {
                state: spec.states[q].clone(),
                bit,
            };
            trans.push([
                a.ok_or_else(|| missing(Bit::Zero))?,
                b.ok_or_else(|| missing(Bit::One))?,
            ]);
        }
        Ok(Fst {
            name: spec.name.clone(),
            labels: spec.states.clone(),
            initial,
            trans,
        })
    }

    /// Builds a machine from a complete table; panics on dangling targets.
    pub fn from_table(
        name: impl Into<String>,
        labels: Vec<String>,
        initial: StateId,
        trans: Vec<[(StateId, Word); 2]>,
    ) -> Fst {
        assert_eq!(labels.len(), trans.len(), "one label per state");
        assert!(initial < trans.len(), "initial state out of range");
        assert!(
            trans.iter().flatten().all(|(q, _)| *q < trans.len()),
            "transition target out of range"
        );
        Fst {
            name: name.into(),
            labels,
            initial,
            trans,
        }
    }

    pub fn to_spec(&self) -> FstSpec {
        let mut transitions = Vec::with_capacity(2 * self.trans.len());
        for (q, row) in self.trans.iter().enumerate() {
            for b in Bit::ALL {
                let (to, out) = &row[b.index()];
                transitions.push(TransitionSpec {
                    from: self.labels[q].clone(),
                    bit: b,
                    to: self.labels[*to].clone(),
                    out: out.clone(),
                });
            }
        }
        FstSpec {
            name: self.name.clone(),
            states: self.labels.clone(),
            initial: self.labels[self.initial].clone(),
            transitions,
        }
    }

    /// The one-state copier.
    pub fn identity() -> Fst {
        Fst::from_table(
            "identity",
            vec!["q0".into()],
            0,
            vec![[(0, Word::zeros(1)), (0, Word::block(0))]],
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Fst {
        self.name = name.into();
        self
    }

    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    pub fn initial_state(&self) -> StateId {
        self.initial
    }

    pub fn label(&self, q: StateId) -> &str {
        &self.labels[q]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn state(&self, label: &str) -> Option<StateId> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn next(&self, q: StateId, b: Bit) -> StateId {
        self.trans[q][b.index()].0
    }

    pub fn out(&self, q: StateId, b: Bit) -> &Word {
        &self.trans[q][b.index()].1
    }

    pub fn transitions(&self) -> &[[(StateId, Word); 2]] {
        &self.trans
    }

    /// `(δ(q, u), λ(q, u))`.
    pub fn run_word(&self, q: StateId, u: &[Bit]) -> (StateId, Word) {
        Transducer::run_word(self, q, u)
    }

    /// Keeps only the states reachable from the initial state, renumbered in BFS order.
    pub fn trim(&self) -> Fst {
        let mut order = vec![self.initial];
        let mut id = vec![usize::MAX; self.trans.len()];
        id[self.initial] = 0;
        let mut i = 0;
        while i < order.len() {
            let q = order[i];
            for b in Bit::ALL {
                let t = self.next(q, b);
                if id[t] == usize::MAX {
                    id[t] = order.len();
                    order.push(t);
                }
            }
            i += 1;
        }
        let trans = order
            .iter()
            .map(|&q| Bit::ALL.map(|b| (id[self.next(q, b)], self.out(q, b).clone())))
            .collect();
        let labels = order.iter().map(|&q| self.labels[q].clone()).collect();
        Fst::from_table(self.name.clone(), labels, 0, trans)
    }
}

impl Transducer for Fst {
    fn initial(&self) -> StateId {
        self.initial
    }

    #[inline]
    fn step_into(&self, q: StateId, b: Bit, out: &mut Word) -> StateId {
        let (t, w) = &self.trans[q][b.index()];
        out.extend_from(w);
        *t
    }

    fn state_count(&self) -> Option<usize> {
        Some(self.trans.len())
    }

    fn state_label(&self, q: StateId) -> String {
        self.labels[q].clone()
    }
}

impl<T: Transducer + ?Sized> Transducer for Arc<T> {
    fn initial(&self) -> StateId {
        (**self).initial()
    }

    fn step_into(&self, q: StateId, b: Bit, out: &mut Word) -> StateId {
        (**self).step_into(q, b, out)
    }

    fn state_count(&self) -> Option<usize> {
        (**self).state_count()
    }

    fn state_label(&self, q: StateId) -> String {
        (**self).state_label(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::w;

    fn period_doubling() -> Fst {
        Fst::from_spec(&FstSpec::from_rows(
            "period_doubling",
            "q0",
            &[
                ("q0", 0, "q1", "-"),
                ("q0", 1, "q2", "-"),
                ("q1", 0, "q1", "0"),
                ("q1", 1, "q2", "1"),
                ("q2", 0, "q1", "1"),
                ("q2", 1, "q2", "0"),
            ],
        ))
        .unwrap()
    }

    #[test]
    fn validation_errors() {
        let mut s = period_doubling().to_spec();
        s.transitions.pop();
        assert_eq!(
            validate(&s),
            Err(FstError::MissingTransition {
                state: "q2".into(),
                bit: Bit::One
            })
        );
        let mut s = period_doubling().to_spec();
        s.states.push("q1".into());
        assert_eq!(validate(&s), Err(FstError::DuplicateState("q1".into())));
        let mut s = period_doubling().to_spec();
        s.initial = "q9".into();
        assert_eq!(validate(&s), Err(FstError::UnknownState("q9".into())));
        assert!(validate(&Fst::identity().to_spec()).is_ok());
    }

    #[test]
    fn period_doubling_run_word() {
        let m = period_doubling();
        let (q, out) = m.run_word(m.initial_state(), &w("01101001"));
        assert_eq!(out, w("1011101"));
        assert_eq!(m.label(q), "q2");
        assert_eq!(m.run_word(1, &[]), (1, Word::empty()));
    }

    #[test]
    fn trim_drops_unreachable() {
        let m = Fst::from_spec(&FstSpec::from_rows(
            "t",
            "a",
            &[
                ("a", 0, "a", "0"),
                ("a", 1, "a", "1"),
                ("b", 0, "a", "-"),
                ("b", 1, "b", "-"),
            ],
        ))
        .unwrap();
        assert_eq!(m.trim().num_states(), 1);
    }
}
