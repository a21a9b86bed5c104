//! Transducers with look-ahead: a rule `(q, u₁, u₂) → q' | w` fires when the remaining input
//! starts with `u₁u₂`, emits `w` and consumes only `u₁`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::fst::{text, Fst, FstTextError, StateId};
use crate::seq::{Bit, BitIter, Chunk, Chunks, Source, Stream, StreamError, Word};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub from: String,
    pub consume: Word,
    pub peek: Word,
    pub to: String,
    pub output: Word,
}

impl Rule {
    pub fn new(from: &str, consume: Word, peek: Word, to: &str, output: Word) -> Rule {
        Rule {
            from: from.to_string(),
            consume,
            peek,
            to: to.to_string(),
            output,
        }
    }

    /// `consume · peek`.
    pub fn word(&self) -> Word {
        self.consume.concat(&self.peek)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.from, self.consume.to_token())?;
        if !self.peek.is_empty() {
            write!(f, " peek {}", self.peek)?;
        }
        write!(f, " -> {} | {}", self.to, self.output.to_token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookaheadFst {
    pub name: String,
    pub states: Vec<String>,
    pub initial: String,
    pub rules: Vec<Rule>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LookaheadError {
    #[error("overlapping rules in state {state}: `{first}` and `{second}`")]
    OverlappingRules {
        state: String,
        first: String,
        second: String,
    },
    #[error("rule `{0}` consumes nothing")]
    EmptyConsume(String),
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("duplicate state {0}")]
    DuplicateState(String),
    #[error("buffered compilation needs {states} states, above the limit {limit}")]
    TooLarge { states: u128, limit: usize },
}

/// Upper bound on the size of a buffered compilation.
pub const BUFFERED_LIMIT: usize = 1 << 20;

impl LookaheadFst {
    /// States collected from `initial` and the rules, in order of appearance.
    pub fn from_rules(name: &str, initial: &str, rules: Vec<Rule>) -> Self {
        let mut states = vec![initial.to_string()];
        for r in &rules {
            for s in [&r.from, &r.to] {
                if !states.contains(s) {
                    states.push(s.clone());
                }
            }
        }
        LookaheadFst {
            name: name.to_string(),
            states,
            initial: initial.to_string(),
            rules,
        }
    }

    /// `ℓ`, the longest `consume · peek`.
    pub fn max_rule_len(&self) -> usize {
        self.rules
            .iter()
            .map(|r| r.consume.len() + r.peek.len())
            .max()
            .unwrap_or(0)
    }
}

/// Rules indexed by numeric state.
#[derive(Debug)]
struct Indexed {
    initial: StateId,
    /// per state: (full word, consumed length, target, output)
    rules: Vec<Vec<(Word, usize, StateId, Word)>>,
}

impl Indexed {
    fn new(t: &LookaheadFst) -> Result<Indexed, LookaheadError> {
        let mut ids = HashMap::new();
        for (i, s) in t.states.iter().enumerate() {
            if ids.insert(s.as_str(), i).is_some() {
                return Err(LookaheadError::DuplicateState(s.clone()));
            }
        }
        let id = |s: &str| {
            ids.get(s)
                .copied()
                .ok_or_else(|| LookaheadError::UnknownState(s.to_string()))
        };
        let initial = id(&t.initial)?;
        let mut rules = vec![Vec::new(); t.states.len()];
        for r in &t.rules {
            if r.consume.is_empty() {
                return Err(LookaheadError::EmptyConsume(r.to_string()));
            }
            rules[id(&r.from)?].push((r.word(), r.consume.len(), id(&r.to)?, r.output.clone()));
        }
        Ok(Indexed { initial, rules })
    }

    /// The rule of `q` whose word is a prefix of `buf`.
    fn matching(&self, q: StateId, buf: &[Bit]) -> Option<&(Word, usize, StateId, Word)> {
        self.rules[q].iter().find(|r| r.0.is_prefix_of(buf))
    }

    fn max_len(&self, q: StateId) -> usize {
        self.rules[q].iter().map(|r| r.0.len()).max().unwrap_or(0)
    }
}

/// Checks the determinism condition: no rule word of a state is a prefix of another.
pub fn la_validate(t: &LookaheadFst) -> Result<(), LookaheadError> {
    Indexed::new(t)?;
    for (i, r) in t.rules.iter().enumerate() {
        for s in &t.rules[i + 1..] {
            if r.from != s.from {
                continue;
            }
            let (a, b) = (r.word(), s.word());
            if a.is_prefix_of(&b) || b.is_prefix_of(&a) {
                return Err(LookaheadError::OverlappingRules {
                    state: r.from.clone(),
                    first: r.to_string(),
                    second: s.to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Consumed bits without output after which a run reports [`StreamError::Stalled`].
const SILENT_LIMIT: u64 = 1 << 22;

/// `T(σ)`, reporting [`StreamError::Stuck`] where no rule applies.
pub fn la_run(t: &LookaheadFst, s: &Stream) -> Result<Stream, LookaheadError> {
    la_validate(t)?;
    Ok(Stream::derived(LaSource {
        t: Arc::new(Indexed::new(t)?),
        input: s.clone(),
    }))
}

#[derive(Debug)]
struct LaSource {
    t: Arc<Indexed>,
    input: Stream,
}

impl Source for LaSource {
    fn open(&self) -> Chunks {
        let t = self.t.clone();
        let mut bits: BitIter = self.input.bits();
        let mut buf: VecDeque<Bit> = VecDeque::new();
        let mut q = t.initial;
        let mut pos = 0u64;
        let mut silent = 0u64;
        let mut ended = false;
        let mut done = false;
        Box::new(std::iter::from_fn(move || loop {
            if done {
                return None;
            }
            let need = t.max_len(q);
            while !ended && buf.len() < need {
                match bits.next() {
                    Some(Ok(b)) => buf.push_back(b),
                    Some(Err(e)) => {
                        done = true;
                        return Some(Err(e));
                    }
                    None => ended = true,
                }
            }
            if ended && buf.is_empty() {
                done = true;
                return None;
            }
            let view = buf.make_contiguous();
            let Some((_, consumed, next, out)) = t.matching(q, view) else {
                done = true;
                return Some(Err(StreamError::Stuck { position: pos }));
            };
            buf.drain(..*consumed);
            pos += *consumed as u64;
            q = *next;
            if out.is_empty() {
                silent += *consumed as u64;
                if silent >= SILENT_LIMIT {
                    done = true;
                    return Some(Err(StreamError::Stalled { input_chunks: silent }));
                }
                continue;
            }
            silent = 0;
            return Some(Ok(Chunk::once(out.clone())));
        }))
    }
}

fn buffered_size(states: usize, l: usize) -> u128 {
    states as u128 * ((1u128 << (l + 1).min(127)) - 1)
}

/// The buffering construction: states `(q, v)` with `|v| ≤ ℓ`; a full buffer fires the rule
/// matching it, a full buffer without a match keeps its state and emits nothing.
pub fn la_compile(t: &LookaheadFst) -> Result<Fst, LookaheadError> {
    la_validate(t)?;
    let ix = Indexed::new(t)?;
    let l = t.max_rule_len();
    let bound = buffered_size(t.states.len(), l);
    if bound > BUFFERED_LIMIT as u128 {
        return Err(LookaheadError::TooLarge {
            states: bound,
            limit: BUFFERED_LIMIT,
        });
    }
    let mut ids: HashMap<(StateId, Word), StateId> = HashMap::new();
    let mut keys: Vec<(StateId, Word)> = Vec::new();
    let mut intern = |k: (StateId, Word), keys: &mut Vec<(StateId, Word)>| -> StateId {
        *ids.entry(k.clone()).or_insert_with(|| {
            keys.push(k);
            keys.len() - 1
        })
    };
    intern((ix.initial, Word::empty()), &mut keys);
    let mut trans = Vec::new();
    let mut i = 0;
    while i < keys.len() {
        let (q, v) = keys[i].clone();
        let row = Bit::ALL.map(|a| {
            let (key, out) = if v.len() < l {
                let mut v2 = v.clone();
                v2.push(a);
                ((q, v2), Word::empty())
            } else if let Some((_, consumed, next, out)) = ix.matching(q, &v) {
                let mut v2 = v.slice(*consumed, v.len());
                v2.push(a);
                ((*next, v2), out.clone())
            } else {
                ((q, v.clone()), Word::empty())
            };
            (intern(key, &mut keys), out)
        });
        trans.push(row);
        i += 1;
    }
    let labels = keys
        .iter()
        .map(|(q, v)| format!("{}/{}", t.states[*q], v.to_token()))
        .collect();
    Ok(Fst::from_table(t.name.clone(), labels, 0, trans))
}

/// Compilation that fires a rule as soon as its word is in the buffer. States are `(q, v)` with
/// `v` a proper prefix of a rule word of `q`, plus a silent sink for inputs outside the domain.
pub fn la_compile_eager(t: &LookaheadFst) -> Result<Fst, LookaheadError> {
    la_validate(t)?;
    let ix = Indexed::new(t)?;
    const SINK: (StateId, Option<Word>) = (usize::MAX, None);
    let mut ids: HashMap<(StateId, Option<Word>), StateId> = HashMap::new();
    let mut keys: Vec<(StateId, Option<Word>)> = Vec::new();
    let mut intern = |k: (StateId, Option<Word>), keys: &mut Vec<(StateId, Option<Word>)>| -> StateId {
        *ids.entry(k.clone()).or_insert_with(|| {
            keys.push(k);
            keys.len() - 1
        })
    };
    intern((ix.initial, Some(Word::empty())), &mut keys);
    let mut trans = Vec::new();
    let mut i = 0;
    while i < keys.len() {
        let (q, v) = keys[i].clone();
        let row = Bit::ALL.map(|a| {
            let Some(v) = &v else {
                return (intern(SINK, &mut keys), Word::empty());
            };
            let mut buf = v.clone();
            buf.push(a);
            let mut q = q;
            let mut out = Word::empty();
            while let Some((w, consumed, next, o)) = ix.matching(q, &buf) {
                if w.len() > buf.len() {
                    break;
                }
                out.extend_from(o);
                buf = buf.slice(*consumed, buf.len());
                q = *next;
            }
            let live = ix.rules[q]
                .iter()
                .any(|r| buf.is_prefix_of(&r.0) && buf.len() < r.0.len());
            let key = if live { (q, Some(buf)) } else { SINK };
            (intern(key, &mut keys), out)
        });
        trans.push(row);
        i += 1;
    }
    let labels = keys
        .iter()
        .map(|(q, v)| match v {
            Some(v) => format!("{}/{}", t.states[*q], v.to_token()),
            None => "sink".to_string(),
        })
        .collect();
    Ok(Fst::from_table(t.name.clone(), labels, 0, trans))
}

/// Line format: `lfst <name>`, `initial <state>`, then
/// `<state> <consume> [peek <peek>] -> <state> | <output or ->`.
pub fn parse_lfst(s: &str) -> Result<LookaheadFst, FstTextError> {
    let mut lines = text::content_lines(s);
    let name = text::header(&mut lines, "lfst")?;
    let initial = text::header(&mut lines, "initial")?;
    let mut rules = Vec::new();
    for (n, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        let (from, consume, peek, to, out) = match toks[..] {
            [f, c, "->", t, "|", o] => (f, c, "-", t, o),
            [f, c, "peek", p, "->", t, "|", o] => (f, c, p, t, o),
            _ => {
                return Err(FstTextError::Syntax {
                    line: n,
                    msg: "expected `<state> <consume> [peek <peek>] -> <state> | <output>`".into(),
                })
            }
        };
        let word = |x: &str| {
            Word::parse_token(x).map_err(|e| FstTextError::Syntax {
                line: n,
                msg: e.to_string(),
            })
        };
        rules.push(Rule::new(from, word(consume)?, word(peek)?, to, word(out)?));
    }
    Ok(LookaheadFst::from_rules(&name, &initial, rules))
}

pub fn write_lfst(t: &LookaheadFst) -> String {
    let mut s = format!("lfst {}\ninitial {}\n", t.name, t.initial);
    for r in &t.rules {
        s.push_str(&format!("{r}\n"));
    }
    s
}
