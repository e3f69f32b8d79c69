use indexmap::{IndexMap, IndexSet};

use crate::ir::Atom;

/// Ground atoms indexed by predicate, iterated in insertion order.
///
/// Equality is set equality: two fact sets holding the same atoms are equal
/// whatever order they were inserted in.
#[derive(Clone, Debug, Default)]
pub struct FactSet {
    by_predicate: IndexMap<String, IndexSet<Atom>>,
    order: Vec<Atom>,
}

impl FactSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false if the atom was already present.
    pub fn insert(&mut self, atom: Atom) -> bool {
        debug_assert!(atom.is_ground(), "fact sets hold ground atoms only");
        let bucket = self.by_predicate.entry(atom.predicate.clone()).or_default();
        if bucket.insert(atom.clone()) {
            self.order.push(atom);
            true
        } else {
            false
        }
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.by_predicate.get(&atom.predicate).is_some_and(|b| b.contains(atom))
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Atom> {
        self.order.iter()
    }

    pub fn with_predicate<'a>(&'a self, predicate: &str) -> impl Iterator<Item = &'a Atom> + 'a {
        self.by_predicate.get(predicate).into_iter().flat_map(|b| b.iter())
    }
}

impl PartialEq for FactSet {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.iter().all(|a| other.contains(a))
    }
}

impl Eq for FactSet {}

impl FromIterator<Atom> for FactSet {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        let mut fs = FactSet::new();
        for a in iter {
            fs.insert(a);
        }
        fs
    }
}

impl<'a> IntoIterator for &'a FactSet {
    type Item = &'a Atom;
    type IntoIter = std::slice::Iter<'a, Atom>;

    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}
