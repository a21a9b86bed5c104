use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::{StateId, Transducer};
use crate::seq::{Chunk, Chunks, Reps, Source, Stream, StreamError, Word};

/// Consecutive input chunks without output after which a run reports [`StreamError::Stalled`].
pub const STALL_LIMIT: u64 = 1 << 16;

/// Repetition counts up to this bound are expanded literally.
const EXPAND_LIMIT: u64 = 64;

/// `T(σ)` as a lazy stream.
pub fn run_stream<T: Transducer + Clone + 'static>(m: &T, s: &Stream) -> Stream {
    run_stream_arc(Arc::new(m.clone()), s)
}

pub fn run_stream_arc(m: Arc<dyn Transducer>, s: &Stream) -> Stream {
    Stream::derived(RunSource {
        machine: m,
        input: s.clone(),
    })
}

#[derive(Debug)]
struct RunSource {
    machine: Arc<dyn Transducer>,
    input: Stream,
}

impl Source for RunSource {
    fn open(&self) -> Chunks {
        Box::new(Runner {
            state: self.machine.initial(),
            machine: self.machine.clone(),
            input: self.input.chunks(),
            pending: Vec::new(),
            idle: 0,
            finished: false,
        })
    }
}

struct Runner {
    machine: Arc<dyn Transducer>,
    input: Chunks,
    state: StateId,
    /// Output chunks in reverse order of emission.
    pending: Vec<Chunk>,
    idle: u64,
    finished: bool,
}

impl Runner {
    fn run_once(&mut self, word: &Word, out: &mut Word) {
        for &b in word.iter() {
            self.state = self.machine.step_into(self.state, b, out);
        }
    }

    /// Processes `word^reps`, pushing the produced chunks (in order) onto `emit`.
    fn process(&mut self, word: Word, reps: Reps, emit: &mut Vec<Chunk>) {
        if let Reps::Count(k) = &reps {
            if let Some(k) = k.to_u64().filter(|&k| k <= EXPAND_LIMIT) {
                let mut out = Word::empty();
                for _ in 0..k {
                    self.run_once(&word, &mut out);
                }
                if !out.is_empty() {
                    emit.push(Chunk::once(out));
                }
                return;
            }
        }
        // find a cycle in the state at the start of each repetition
        let mut seen: HashMap<StateId, usize> = HashMap::new();
        let mut starts: Vec<StateId> = Vec::new();
        let mut outs: Vec<Word> = Vec::new();
        let limit = match &reps {
            Reps::Count(k) => Some(k.clone()),
            Reps::Forever => None,
        };
        let cycle_start = loop {
            if let Some(k) = &limit {
                if BigUint::from(starts.len()) == *k {
                    let out: Word = outs.iter().flat_map(|w| w.iter().copied()).collect();
                    if !out.is_empty() {
                        emit.push(Chunk::once(out));
                    }
                    return;
                }
            }
            if let Some(&i) = seen.get(&self.state) {
                break i;
            }
            seen.insert(self.state, starts.len());
            starts.push(self.state);
            let mut out = Word::empty();
            self.run_once(&word, &mut out);
            outs.push(out);
        };
        let concat = |ws: &[Word]| -> Word { ws.iter().flat_map(|w| w.iter().copied()).collect() };
        let pre = concat(&outs[..cycle_start]);
        let cyc = concat(&outs[cycle_start..]);
        let period = starts.len() - cycle_start;
        if !pre.is_empty() {
            emit.push(Chunk::once(pre));
        }
        match limit {
            None => {
                // the remainder of the input is this cycle forever
                if !cyc.is_empty() {
                    emit.push(Chunk::forever(cyc));
                }
                self.finished = true;
            }
            Some(k) => {
                let remaining = k - BigUint::from(cycle_start);
                let (full, rem) = remaining.div_rem(&BigUint::from(period));
                let rem = rem.to_usize().expect("remainder below period");
                if !full.is_zero() && !cyc.is_empty() {
                    emit.push(Chunk::power(cyc, full));
                }
                let tail = concat(&outs[cycle_start..cycle_start + rem]);
                if !tail.is_empty() {
                    emit.push(Chunk::once(tail));
                }
                self.state = starts[cycle_start + rem];
            }
        }
    }
}

impl Iterator for Runner {
    type Item = Result<Chunk, StreamError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(c) = self.pending.pop() {
                return Some(Ok(c));
            }
            if self.finished {
                return None;
            }
            let chunk = match self.input.next() {
                None => {
                    self.finished = true;
                    return None;
                }
                Some(Err(e)) => {
                    self.finished = true;
                    return Some(Err(e));
                }
                Some(Ok(c)) => c,
            };
            let mut emit = Vec::new();
            self.process(chunk.word, chunk.reps, &mut emit);
            if emit.is_empty() {
                self.idle += 1;
                if self.idle >= STALL_LIMIT {
                    self.finished = true;
                    return Some(Err(StreamError::Stalled {
                        input_chunks: self.idle,
                    }));
                }
                continue;
            }
            self.idle = 0;
            emit.reverse();
            self.pending = emit;
        }
    }
}
