//! Indexed triple store and copy-on-write overlays.
//!
//! [`TripleStore`] keeps every statement in three nested indexes
//! (subject-predicate-object, predicate-object-subject and
//! object-subject-predicate) so that any pattern with at least one bound
//! position is answered from the index whose leading key is bound.
//!
//! [`OverlayStore`] adds statements on top of a [`SharedStore`] without
//! touching it. Every mutation of the base bumps its generation; an overlay
//! created before such a mutation refuses all reads.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use crate::error::StoreError;
use crate::term::{Term, Triple, TriplePattern};

type Index = BTreeMap<Term, BTreeMap<Term, BTreeSet<Term>>>;

/// Read access to a set of triples.
pub trait Graph {
    /// Statements agreeing with `pattern` on every non-variable position,
    /// in (subject, predicate, object) order.
    fn match_pattern(&self, pattern: &TriplePattern) -> Result<Vec<Triple>, StoreError>;

    fn contains(&self, triple: &Triple) -> Result<bool, StoreError>;

    fn len(&self) -> Result<usize, StoreError>;

    fn is_empty(&self) -> Result<bool, StoreError> {
        Ok(self.len()? == 0)
    }

    /// Every statement, sorted.
    fn triples(&self) -> Result<Vec<Triple>, StoreError> {
        let all = TriplePattern::new(
            Term::Variable("s".into()),
            Term::Variable("p".into()),
            Term::Variable("o".into()),
        );
        self.match_pattern(&all)
    }
}

/// Write access on top of [`Graph`].
pub trait GraphMut: Graph {
    /// Returns true iff the triple was absent.
    fn insert(&mut self, triple: Triple) -> Result<bool, StoreError>;
}

#[derive(Debug, Default, Clone)]
pub struct TripleStore {
    spo: Index,
    pos: Index,
    osp: Index,
    len: usize,
    generation: u64,
}

fn index_insert(index: &mut Index, a: &Term, b: &Term, c: &Term) -> bool {
    index
        .entry(a.clone())
        .or_default()
        .entry(b.clone())
        .or_default()
        .insert(c.clone())
}

fn index_remove(index: &mut Index, a: &Term, b: &Term, c: &Term) -> bool {
    let Some(second) = index.get_mut(a) else {
        return false;
    };
    let Some(third) = second.get_mut(b) else {
        return false;
    };
    let removed = third.remove(c);
    if third.is_empty() {
        second.remove(b);
    }
    if second.is_empty() {
        index.remove(a);
    }
    removed
}

fn bound(term: &Term) -> Option<&Term> {
    (!term.is_variable()).then_some(term)
}

fn triple(s: &Term, p: &Term, o: &Term) -> Triple {
    Triple::new(s.clone(), p.clone(), o.clone()).expect("indexes hold valid triples")
}

impl TripleStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Self {
        let mut store = Self::new();
        for t in triples {
            store.insert(t);
        }
        store
    }

    /// Incremented on every successful insert or remove.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn insert(&mut self, t: Triple) -> bool {
        let (s, p, o) = (t.subject(), t.predicate(), t.object());
        if !index_insert(&mut self.spo, s, p, o) {
            return false;
        }
        index_insert(&mut self.pos, p, o, s);
        index_insert(&mut self.osp, o, s, p);
        self.len += 1;
        self.generation += 1;
        true
    }

    pub fn remove(&mut self, t: &Triple) -> bool {
        let (s, p, o) = (t.subject(), t.predicate(), t.object());
        if !index_remove(&mut self.spo, s, p, o) {
            return false;
        }
        index_remove(&mut self.pos, p, o, s);
        index_remove(&mut self.osp, o, s, p);
        self.len -= 1;
        self.generation += 1;
        true
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.spo
            .get(t.subject())
            .and_then(|m| m.get(t.predicate()))
            .is_some_and(|objs| objs.contains(t.object()))
    }

    /// See [`Graph::match_pattern`].
    pub fn matches(&self, pattern: &TriplePattern) -> Vec<Triple> {
        let (s, p, o) = (
            bound(&pattern.subject),
            bound(&pattern.predicate),
            bound(&pattern.object),
        );
        let mut out = Vec::new();
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                // a join may bind a literal to the subject: such a pattern has no match
                if self.spo.get(s).and_then(|m| m.get(p)).is_some_and(|objs| objs.contains(o)) {
                    out.push(triple(s, p, o));
                }
            }
            (Some(s), Some(p), None) => {
                if let Some(objs) = self.spo.get(s).and_then(|m| m.get(p)) {
                    out.extend(objs.iter().map(|o| triple(s, p, o)));
                }
            }
            (Some(s), None, Some(o)) => {
                if let Some(preds) = self.osp.get(o).and_then(|m| m.get(s)) {
                    out.extend(preds.iter().map(|p| triple(s, p, o)));
                }
            }
            (Some(s), None, None) => {
                if let Some(by_pred) = self.spo.get(s) {
                    for (p, objs) in by_pred {
                        out.extend(objs.iter().map(|o| triple(s, p, o)));
                    }
                }
            }
            (None, Some(p), Some(o)) => {
                if let Some(subjs) = self.pos.get(p).and_then(|m| m.get(o)) {
                    out.extend(subjs.iter().map(|s| triple(s, p, o)));
                }
            }
            (None, Some(p), None) => {
                if let Some(by_obj) = self.pos.get(p) {
                    for (o, subjs) in by_obj {
                        out.extend(subjs.iter().map(|s| triple(s, p, o)));
                    }
                }
                out.sort_unstable();
            }
            (None, None, Some(o)) => {
                if let Some(by_subj) = self.osp.get(o) {
                    for (s, preds) in by_subj {
                        out.extend(preds.iter().map(|p| triple(s, p, o)));
                    }
                }
            }
            (None, None, None) => {
                for (s, by_pred) in &self.spo {
                    for (p, objs) in by_pred {
                        out.extend(objs.iter().map(|o| triple(s, p, o)));
                    }
                }
            }
        }
        out
    }

    /// Enumerates the statement set through one index: 0 = SPO, 1 = POS, 2 = OSP.
    pub fn enumerate_index(&self, which: usize) -> BTreeSet<Triple> {
        let index = match which {
            0 => &self.spo,
            1 => &self.pos,
            2 => &self.osp,
            _ => panic!("no index {which}"),
        };
        let mut out = BTreeSet::new();
        for (a, second) in index {
            for (b, thirds) in second {
                for c in thirds {
                    out.insert(match which {
                        0 => triple(a, b, c),
                        1 => triple(c, a, b),
                        _ => triple(b, c, a),
                    });
                }
            }
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().flat_map(|(s, by_pred)| {
            by_pred
                .iter()
                .flat_map(move |(p, objs)| objs.iter().map(move |o| triple(s, p, o)))
        })
    }
}

impl Graph for TripleStore {
    fn match_pattern(&self, pattern: &TriplePattern) -> Result<Vec<Triple>, StoreError> {
        Ok(self.matches(pattern))
    }

    fn contains(&self, triple: &Triple) -> Result<bool, StoreError> {
        Ok(TripleStore::contains(self, triple))
    }

    fn len(&self) -> Result<usize, StoreError> {
        Ok(self.len)
    }
}

impl GraphMut for TripleStore {
    fn insert(&mut self, triple: Triple) -> Result<bool, StoreError> {
        Ok(TripleStore::insert(self, triple))
    }
}

/// A triple store shared between threads: many readers or one writer.
#[derive(Debug, Default, Clone)]
pub struct SharedStore {
    inner: Arc<RwLock<TripleStore>>,
}

impl SharedStore {
    pub fn new(store: TripleStore) -> Self {
        SharedStore {
            inner: Arc::new(RwLock::new(store)),
        }
    }

    pub fn read(&self) -> RwLockReadGuard<'_, TripleStore> {
        self.inner.read().unwrap_or_else(|e| e.into_inner())
    }

    pub fn write(&self) -> RwLockWriteGuard<'_, TripleStore> {
        self.inner.write().unwrap_or_else(|e| e.into_inner())
    }

    /// A fresh, empty overlay on top of this store.
    pub fn overlay(&self) -> OverlayStore {
        OverlayStore {
            base: self.clone(),
            added: TripleStore::new(),
            base_generation: self.read().generation(),
        }
    }
}

impl Graph for SharedStore {
    fn match_pattern(&self, pattern: &TriplePattern) -> Result<Vec<Triple>, StoreError> {
        Ok(self.read().matches(pattern))
    }

    fn contains(&self, triple: &Triple) -> Result<bool, StoreError> {
        Ok(self.read().contains(triple))
    }

    fn len(&self) -> Result<usize, StoreError> {
        Ok(self.read().len())
    }
}

/// Statements added on top of a read-only base.
#[derive(Debug)]
pub struct OverlayStore {
    base: SharedStore,
    added: TripleStore,
    base_generation: u64,
}

impl OverlayStore {
    fn base(&self) -> Result<RwLockReadGuard<'_, TripleStore>, StoreError> {
        let base = self.base.read();
        if base.generation() != self.base_generation {
            return Err(StoreError::StaleOverlay {
                expected: self.base_generation,
                actual: base.generation(),
            });
        }
        Ok(base)
    }

    /// Statements added through this overlay (never including base statements).
    pub fn added(&self) -> &TripleStore {
        &self.added
    }

    pub fn base_generation(&self) -> u64 {
        self.base_generation
    }
}

impl Graph for OverlayStore {
    fn match_pattern(&self, pattern: &TriplePattern) -> Result<Vec<Triple>, StoreError> {
        let base = self.base()?;
        let from_base = base.matches(pattern);
        let from_added = self.added.matches(pattern);
        if from_added.is_empty() {
            return Ok(from_base);
        }
        // The two sides are disjoint and individually sorted.
        let mut out = Vec::with_capacity(from_base.len() + from_added.len());
        let (mut a, mut b) = (from_base.into_iter().peekable(), from_added.into_iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(x), Some(y)) => {
                    if x < y {
                        out.push(a.next().unwrap());
                    } else {
                        out.push(b.next().unwrap());
                    }
                }
                (Some(_), None) => out.push(a.next().unwrap()),
                (None, Some(_)) => out.push(b.next().unwrap()),
                (None, None) => break,
            }
        }
        Ok(out)
    }

    fn contains(&self, triple: &Triple) -> Result<bool, StoreError> {
        Ok(self.base()?.contains(triple) || self.added.contains(triple))
    }

    fn len(&self) -> Result<usize, StoreError> {
        Ok(self.base()?.len() + self.added.len())
    }
}

impl GraphMut for OverlayStore {
    fn insert(&mut self, triple: Triple) -> Result<bool, StoreError> {
        if self.base()?.contains(&triple) {
            return Ok(false);
        }
        Ok(self.added.insert(triple))
    }
}
