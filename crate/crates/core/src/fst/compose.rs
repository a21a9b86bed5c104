use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use super::{Fst, StateId, Transducer};
use crate::seq::{Bit, Word};

#[derive(Default)]
struct Table {
    pairs: Vec<(StateId, StateId)>,
    ids: HashMap<(StateId, StateId), StateId>,
    trans: Vec<[Option<(StateId, Word)>; 2]>,
}

impl Table {
    fn intern(&mut self, pair: (StateId, StateId)) -> StateId {
        if let Some(&id) = self.ids.get(&pair) {
            return id;
        }
        let id = self.pairs.len();
        self.pairs.push(pair);
        self.ids.insert(pair, id);
        self.trans.push([None, None]);
        id
    }
}

/// Wreath product built on demand: state `(p, q)` reads a bit with the inner machine from `p`
/// and feeds the inner output to the outer machine from `q`.
pub struct LazyCompose {
    outer: Arc<dyn Transducer>,
    inner: Arc<dyn Transducer>,
    table: Mutex<Table>,
}

impl fmt::Debug for LazyCompose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LazyCompose({:?} ∘ {:?})", self.outer, self.inner)
    }
}

impl LazyCompose {
    pub fn new(outer: Arc<dyn Transducer>, inner: Arc<dyn Transducer>) -> Self {
        let mut table = Table::default();
        table.intern((inner.initial(), outer.initial()));
        LazyCompose {
            outer,
            inner,
            table: Mutex::new(table),
        }
    }

    /// Number of product states discovered so far.
    pub fn discovered(&self) -> usize {
        self.table.lock().expect("table lock").pairs.len()
    }

    pub fn pair(&self, q: StateId) -> (StateId, StateId) {
        self.table.lock().expect("table lock").pairs[q]
    }
}

impl Transducer for LazyCompose {
    fn initial(&self) -> StateId {
        0
    }

    fn step_into(&self, q: StateId, b: Bit, out: &mut Word) -> StateId {
        let mut t = self.table.lock().expect("table lock");
        if let Some((next, w)) = &t.trans[q][b.index()] {
            out.extend_from(w);
            return *next;
        }
        let (p, r) = t.pairs[q];
        let mut mid = Word::empty();
        let p2 = self.inner.step_into(p, b, &mut mid);
        let (r2, w) = self.outer.run_word(r, &mid);
        let next = t.intern((p2, r2));
        out.extend_from(&w);
        t.trans[q][b.index()] = Some((next, w));
        next
    }

    fn state_label(&self, q: StateId) -> String {
        let (p, r) = self.pair(q);
        format!("{}.{}", self.inner.state_label(p), self.outer.state_label(r))
    }
}

/// The reachable part of the wreath product, as a table machine.
pub fn compose(outer: &Fst, inner: &Fst) -> Fst {
    let lazy = LazyCompose::new(Arc::new(outer.clone()), Arc::new(inner.clone()));
    let mut trans = Vec::new();
    let mut q = 0;
    while q < lazy.discovered() {
        let row = Bit::ALL.map(|b| {
            let mut out = Word::empty();
            let t = lazy.step_into(q, b, &mut out);
            (t, out)
        });
        trans.push(row);
        q += 1;
    }
    let labels = (0..trans.len())
        .map(|q| {
            let (p, r) = lazy.pair(q);
            format!("{}.{}", inner.label(p), outer.label(r))
        })
        .collect();
    Fst::from_table(format!("{}-{}", outer.name(), inner.name()), labels, 0, trans)
}

/// `ms[k−1] ∘ … ∘ ms[0]`, i.e. `ms[0]` reads the input. Returns the identity for an empty list.
pub fn compose_all(ms: &[Fst]) -> Fst {
    ms.iter()
        .fold(None, |acc: Option<Fst>, m| {
            Some(match acc {
                None => m.clone(),
                Some(a) => compose(m, &a),
            })
        })
        .unwrap_or_else(Fst::identity)
}
