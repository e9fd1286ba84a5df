//! Finite relational structures over the initial segment `[n] = {0, …, n-1}`.
//!
//! Everything here is immutable once constructed. Relations are stored as
//! ordered tuple sets so iteration (and therefore every encoding built on
//! top) is canonical.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Element = usize;
pub type Tuple = Vec<Element>;

/// Name of the built-in order; never usable as a relation symbol.
pub const ORDER_SYMBOL: &str = "<";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("relation {relation} expects arity {expected}, got a tuple of length {found}")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("element {element} of relation {relation} is outside the domain [0, {n})")]
    OutOfRange {
        relation: String,
        element: Element,
        n: usize,
    },
    #[error("structures must have a nonempty domain")]
    ZeroDomain,
    #[error("relation {0} is not in the signature")]
    UnknownRelation(String),
    #[error("relation {0} is declared twice")]
    DuplicateRelation(String),
    #[error("relation {0} has arity 0")]
    ZeroArity(String),
    #[error("{0:?} is reserved and cannot name a relation")]
    ReservedName(String),
    #[error("string structures must be nonempty")]
    EmptyString,
    #[error("character {ch:?} at position {position} is not one of 0 1 # [ ]")]
    BadCharacter { ch: char, position: usize },
    #[error("signatures differ")]
    SignatureMismatch,
    #[error("not a string structure: {0}")]
    NotAString(String),
    #[error("malformed structure document: {0}")]
    Document(String),
}

/// A finite set of tuples of fixed arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    arity: usize,
    tuples: BTreeSet<Tuple>,
}

impl Relation {
    pub fn empty(arity: usize) -> Self {
        Relation {
            arity,
            tuples: BTreeSet::new(),
        }
    }

    pub fn from_tuples<I>(arity: usize, tuples: I) -> Result<Self, StructureError>
    where
        I: IntoIterator<Item = Tuple>,
    {
        let mut rel = Relation::empty(arity);
        for t in tuples {
            if t.len() != arity {
                return Err(StructureError::ArityMismatch {
                    relation: String::from("<anonymous>"),
                    expected: arity,
                    found: t.len(),
                });
            }
            rel.tuples.insert(t);
        }
        Ok(rel)
    }

    /// Builds a relation from tuples already known to have the right arity.
    pub(crate) fn from_set(arity: usize, tuples: BTreeSet<Tuple>) -> Self {
        debug_assert!(tuples.iter().all(|t| t.len() == arity));
        Relation { arity, tuples }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, tuple: &[Element]) -> bool {
        self.tuples.contains(tuple)
    }

    /// Tuples in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = &Tuple> + '_ {
        self.tuples.iter()
    }

    pub fn tuples(&self) -> &BTreeSet<Tuple> {
        &self.tuples
    }

    pub(crate) fn insert(&mut self, tuple: Tuple) -> bool {
        debug_assert_eq!(tuple.len(), self.arity);
        self.tuples.insert(tuple)
    }

    /// Largest element mentioned, if any.
    pub fn max_element(&self) -> Option<Element> {
        self.tuples.iter().flat_map(|t| t.iter().copied()).max()
    }

    pub fn check_range(&self, name: &str, n: usize) -> Result<(), StructureError> {
        for t in &self.tuples {
            if let Some(&e) = t.iter().find(|&&e| e >= n) {
                return Err(StructureError::OutOfRange {
                    relation: name.to_string(),
                    element: e,
                    n,
                });
            }
        }
        Ok(())
    }

    /// The elements occurring as a component of some tuple.
    pub fn mention_set(&self) -> BTreeSet<Element> {
        self.tuples.iter().flat_map(|t| t.iter().copied()).collect()
    }

    /// Image of the relation under an element map.
    pub fn map_elements(&self, f: impl Fn(Element) -> Element) -> Relation {
        Relation {
            arity: self.arity,
            tuples: self
                .tuples
                .iter()
                .map(|t| t.iter().map(|&e| f(e)).collect())
                .collect(),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tuples.is_empty() {
            return f.write_str("{}");
        }
        for t in &self.tuples {
            f.write_str("(")?;
            for (i, e) in t.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{e}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Union of the mention sets of several relations.
pub fn mention_set_all<'a, I>(relations: I) -> BTreeSet<Element>
where
    I: IntoIterator<Item = &'a Relation>,
{
    relations
        .into_iter()
        .flat_map(|r| r.mention_set())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    relations: Vec<(String, usize)>,
    ordered: bool,
}

impl Signature {
    pub fn new<S: Into<String>>(
        relations: impl IntoIterator<Item = (S, usize)>,
        ordered: bool,
    ) -> Result<Self, StructureError> {
        let mut seen = BTreeSet::new();
        let mut rels = Vec::new();
        for (name, arity) in relations {
            let name = name.into();
            if name == ORDER_SYMBOL {
                return Err(StructureError::ReservedName(name));
            }
            if arity == 0 {
                return Err(StructureError::ZeroArity(name));
            }
            if !seen.insert(name.clone()) {
                return Err(StructureError::DuplicateRelation(name));
            }
            rels.push((name, arity));
        }
        Ok(Signature {
            relations: rels,
            ordered,
        })
    }

    pub fn empty(ordered: bool) -> Self {
        Signature {
            relations: Vec::new(),
            ordered,
        }
    }

    /// τ_str: the five position predicates plus the built-in order.
    pub fn string() -> Self {
        Signature {
            relations: Symbol::ALL
                .iter()
                .map(|s| (s.predicate().to_string(), 1))
                .collect(),
            ordered: true,
        }
    }

    pub fn relations(&self) -> &[(String, usize)] {
        &self.relations
    }

    pub fn is_ordered(&self) -> bool {
        self.ordered
    }

    pub fn arity_of(&self, name: &str) -> Option<usize> {
        self.index_of(name).map(|i| self.relations[i].1)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|(n, _)| n == name)
    }

    /// This signature extended with further relation symbols.
    pub fn extended<S: Into<String>>(
        &self,
        extra: impl IntoIterator<Item = (S, usize)>,
    ) -> Result<Signature, StructureError> {
        let all = self
            .relations
            .iter()
            .cloned()
            .chain(extra.into_iter().map(|(n, a)| (n.into(), a)));
        Signature::new(all, self.ordered)
    }

    pub fn with_order(&self, ordered: bool) -> Signature {
        Signature {
            relations: self.relations.clone(),
            ordered,
        }
    }
}

/// A finite structure with domain `[n]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Structure {
    sig: Signature,
    n: usize,
    // aligned with sig.relations
    relations: Vec<Relation>,
}

impl Structure {
    /// Validating constructor. Relations missing from `interp` are empty.
    pub fn new<S, I>(sig: Signature, n: usize, interp: I) -> Result<Self, StructureError>
    where
        S: AsRef<str>,
        I: IntoIterator<Item = (S, Vec<Tuple>)>,
    {
        if n == 0 {
            return Err(StructureError::ZeroDomain);
        }
        let mut relations: Vec<Relation> = sig
            .relations
            .iter()
            .map(|&(_, a)| Relation::empty(a))
            .collect();
        for (name, tuples) in interp {
            let name = name.as_ref();
            let idx = sig
                .index_of(name)
                .ok_or_else(|| StructureError::UnknownRelation(name.to_string()))?;
            let arity = sig.relations[idx].1;
            for t in tuples {
                if t.len() != arity {
                    return Err(StructureError::ArityMismatch {
                        relation: name.to_string(),
                        expected: arity,
                        found: t.len(),
                    });
                }
                relations[idx].insert(t);
            }
            relations[idx].check_range(name, n)?;
        }
        Ok(Structure { sig, n, relations })
    }

    /// Constructor from already-built relations, in signature order.
    pub fn from_relations(
        sig: Signature,
        n: usize,
        relations: Vec<Relation>,
    ) -> Result<Self, StructureError> {
        if n == 0 {
            return Err(StructureError::ZeroDomain);
        }
        if relations.len() != sig.relations.len() {
            return Err(StructureError::SignatureMismatch);
        }
        for ((name, arity), rel) in sig.relations.iter().zip(&relations) {
            if rel.arity() != *arity {
                return Err(StructureError::ArityMismatch {
                    relation: name.clone(),
                    expected: *arity,
                    found: rel.arity(),
                });
            }
            rel.check_range(name, n)?;
        }
        Ok(Structure { sig, n, relations })
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn is_ordered(&self) -> bool {
        self.sig.ordered
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.sig.index_of(name).map(|i| &self.relations[i])
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &Relation)> + '_ {
        self.sig
            .relations
            .iter()
            .map(|(n, _)| n.as_str())
            .zip(self.relations.iter())
    }

    pub fn relation_list(&self) -> &[Relation] {
        &self.relations
    }

    pub fn with_order(&self, ordered: bool) -> Structure {
        Structure {
            sig: self.sig.with_order(ordered),
            n: self.n,
            relations: self.relations.clone(),
        }
    }

    /// Relabels elements: element `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[Element]) -> Structure {
        assert_eq!(perm.len(), self.n);
        Structure {
            sig: self.sig.clone(),
            n: self.n,
            relations: self
                .relations
                .iter()
                .map(|r| r.map_elements(|e| perm[e]))
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, StructureError> {
        let doc: StructureDoc =
            serde_json::from_str(text).map_err(|e| StructureError::Document(e.to_string()))?;
        let sig = Signature::new(doc.signature, doc.ordered)?;
        Structure::new(sig, doc.n, doc.relations)
    }

    pub fn to_json(&self) -> String {
        let doc = StructureDoc {
            signature: self.sig.relations.clone(),
            ordered: self.sig.ordered,
            n: self.n,
            relations: self
                .relations()
                .map(|(name, r)| (name.to_string(), r.iter().cloned().collect()))
                .collect(),
        };
        serde_json::to_string(&doc).expect("structure documents always serialize")
    }
}

#[derive(Serialize, Deserialize)]
struct StructureDoc {
    signature: Vec<(String, usize)>,
    ordered: bool,
    n: usize,
    #[serde(default)]
    relations: BTreeMap<String, Vec<Tuple>>,
}

/// The five letters of the string alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Zero,
    One,
    Hash,
    Open,
    Close,
}

impl Symbol {
    pub const ALL: [Symbol; 5] = [
        Symbol::Zero,
        Symbol::One,
        Symbol::Hash,
        Symbol::Open,
        Symbol::Close,
    ];

    /// Name of the position predicate for this letter in τ_str.
    pub fn predicate(self) -> &'static str {
        match self {
            Symbol::Zero => "P0",
            Symbol::One => "P1",
            Symbol::Hash => "PHash",
            Symbol::Open => "POpen",
            Symbol::Close => "PClose",
        }
    }

    /// ASCII rendering; brackets are written `[` and `]`.
    pub fn as_char(self) -> char {
        match self {
            Symbol::Zero => '0',
            Symbol::One => '1',
            Symbol::Hash => '#',
            Symbol::Open => '[',
            Symbol::Close => ']',
        }
    }

    pub fn from_char(c: char) -> Option<Symbol> {
        match c {
            '0' => Some(Symbol::Zero),
            '1' => Some(Symbol::One),
            '#' => Some(Symbol::Hash),
            '[' | '⟨' => Some(Symbol::Open),
            ']' | '⟩' => Some(Symbol::Close),
            _ => None,
        }
    }

    pub fn bit(b: bool) -> Symbol {
        if b {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }
}

pub fn render_symbols(symbols: &[Symbol]) -> String {
    symbols.iter().map(|s| s.as_char()).collect()
}

pub fn parse_symbols(text: &str) -> Result<Vec<Symbol>, StructureError> {
    text.chars()
        .enumerate()
        .map(|(position, ch)| {
            Symbol::from_char(ch).ok_or(StructureError::BadCharacter { ch, position })
        })
        .collect()
}

/// A string viewed as an ordered structure over τ_str.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StringStructure {
    symbols: Vec<Symbol>,
    structure: Structure,
}

impl StringStructure {
    pub fn from_text(text: &str) -> Result<Self, StructureError> {
        Self::from_symbols(parse_symbols(text)?)
    }

    pub fn from_symbols(symbols: Vec<Symbol>) -> Result<Self, StructureError> {
        if symbols.is_empty() {
            return Err(StructureError::EmptyString);
        }
        let mut rels: Vec<Relation> = Symbol::ALL.iter().map(|_| Relation::empty(1)).collect();
        for (i, s) in symbols.iter().enumerate() {
            let slot = Symbol::ALL.iter().position(|x| x == s).unwrap();
            rels[slot].insert(vec![i]);
        }
        let structure = Structure {
            sig: Signature::string(),
            n: symbols.len(),
            relations: rels,
        };
        Ok(StringStructure { symbols, structure })
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn render(&self) -> String {
        render_symbols(&self.symbols)
    }

    pub fn as_structure(&self) -> &Structure {
        &self.structure
    }

    pub fn into_structure(self) -> Structure {
        self.structure
    }
}

impl fmt::Display for StringStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl TryFrom<&Structure> for StringStructure {
    type Error = StructureError;

    /// Reads a τ_str structure back as a string; each position must carry
    /// exactly one letter predicate.
    fn try_from(s: &Structure) -> Result<Self, StructureError> {
        if s.signature().relations() != Signature::string().relations() || !s.is_ordered() {
            return Err(StructureError::SignatureMismatch);
        }
        let mut symbols = Vec::with_capacity(s.size());
        for i in 0..s.size() {
            let letters: Vec<Symbol> = Symbol::ALL
                .iter()
                .copied()
                .filter(|sym| s.relation(sym.predicate()).unwrap().contains(&[i]))
                .collect();
            match letters.as_slice() {
                [one] => symbols.push(*one),
                [] => return Err(StructureError::NotAString(format!("position {i} has no letter"))),
                _ => {
                    return Err(StructureError::NotAString(format!(
                        "position {i} has {} letters",
                        letters.len()
                    )))
                }
            }
        }
        StringStructure::from_symbols(symbols)
    }
}

/// Decides isomorphism by backtracking over bijections. Ordered structures
/// admit only the identity, so they are isomorphic iff equal.
pub fn isomorphic(a: &Structure, b: &Structure) -> Result<bool, StructureError> {
    if a.sig != b.sig {
        return Err(StructureError::SignatureMismatch);
    }
    Ok(find_isomorphism(a, b).is_some())
}

/// An isomorphism `a → b` as an element map, if one exists.
pub fn find_isomorphism(a: &Structure, b: &Structure) -> Option<Vec<Element>> {
    if a.sig != b.sig || a.n != b.n {
        return None;
    }
    if a.is_ordered() {
        return (a == b).then(|| (0..a.n).collect());
    }
    if a.relations
        .iter()
        .zip(&b.relations)
        .any(|(ra, rb)| ra.len() != rb.len())
    {
        return None;
    }
    let mut map = vec![usize::MAX; a.n];
    let mut used = vec![false; b.n];
    if extend_iso(a, b, 0, &mut map, &mut used) {
        Some(map)
    } else {
        None
    }
}

fn extend_iso(
    a: &Structure,
    b: &Structure,
    next: usize,
    map: &mut [Element],
    used: &mut [bool],
) -> bool {
    if next == a.n {
        return true;
    }
    for cand in 0..b.n {
        if used[cand] {
            continue;
        }
        map[next] = cand;
        used[cand] = true;
        // tuples of a whose largest component is `next` become fully mapped now
        let ok = a.relations.iter().zip(&b.relations).all(|(ra, rb)| {
            ra.iter()
                .filter(|t| t.iter().all(|&e| e <= next) && t.contains(&next))
                .all(|t| {
                    let image: Tuple = t.iter().map(|&e| map[e]).collect();
                    rb.contains(&image)
                })
        });
        if ok && extend_iso(a, b, next + 1, map, used) {
            return true;
        }
        used[cand] = false;
    }
    map[next] = usize::MAX;
    false
}
