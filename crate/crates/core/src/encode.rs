//! Bit-level encodings: the bracketed structure encoding, the compact
//! encoding of binary relations used for guessed witnesses, and its
//! canonical preimage.
//!
//! Elements are written as `⌈log₂ n⌉` bits, least significant bit first.

use std::fmt;

use thiserror::Error;

use crate::eval::{ceil_log, log_pow};
use crate::structure::{
    parse_symbols, render_symbols, Element, Relation, Signature, Structure, StringStructure,
    StructureError, Symbol, Tuple,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("{value} does not fit in {width} bits")]
    Overflow { value: usize, width: usize },
    #[error("encoding needs an ordered structure")]
    Unordered,
    #[error("domain of size {0} is too small for this encoding")]
    DomainTooSmall(usize),
    #[error("element {element} is outside a domain of size {n}")]
    OutOfRange { element: usize, n: usize },
    #[error("parse error at symbol {position}: {message}")]
    ParseError { position: usize, message: String },
    #[error("{relation} has arity {expected} but a tuple has {found} components")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("length {len} is not a multiple of the chunk size {chunk}")]
    NotChunkAligned { len: usize, chunk: usize },
    #[error("{chunks} chunks exceed the bound {max}")]
    TooManyChunks { chunks: usize, max: usize },
    #[error("expected only 0 and 1, found {0:?}")]
    NotBinary(char),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// A finite word over `{0, 1, #, ⟨, ⟩}`; written with `[` and `]` as text.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString(Vec<Symbol>);

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_symbols(symbols: Vec<Symbol>) -> Self {
        BitString(symbols)
    }

    pub fn parse(text: &str) -> Result<Self, EncodeError> {
        Ok(BitString(parse_symbols(text)?))
    }

    /// Reads a pure `{0,1}` word.
    pub fn parse_bits(text: &str) -> Result<Self, EncodeError> {
        text.chars()
            .map(|c| match c {
                '0' => Ok(Symbol::Zero),
                '1' => Ok(Symbol::One),
                other => Err(EncodeError::NotBinary(other)),
            })
            .collect::<Result<_, _>>()
            .map(BitString)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The word as booleans, if it contains only bits.
    pub fn bits(&self) -> Option<Vec<bool>> {
        self.0
            .iter()
            .map(|s| match s {
                Symbol::Zero => Some(false),
                Symbol::One => Some(true),
                _ => None,
            })
            .collect()
    }

    fn push_bits(&mut self, value: usize, width: usize) {
        self.0
            .extend((0..width).map(|i| Symbol::bit((value >> i) & 1 == 1)));
    }

    fn wrap(mut self) -> Self {
        self.0.insert(0, Symbol::Open);
        self.0.push(Symbol::Close);
        self
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_symbols(&self.0))
    }
}

/// `⟨b₀…b_{w-1}⟩` with `b₀` the least significant bit of `j`.
pub fn enc_element(j: usize, width: usize) -> Result<BitString, EncodeError> {
    if width < usize::BITS as usize && j >> width != 0 {
        return Err(EncodeError::Overflow { value: j, width });
    }
    let mut out = BitString::new();
    out.push_bits(j, width);
    Ok(out.wrap())
}

fn enc_tuple(t: &[Element], width: usize) -> BitString {
    let mut out = BitString::new();
    for &e in t {
        out.0.extend(enc_element(e, width).expect("in range").0);
    }
    out.wrap()
}

/// `⟨enc(t₁)…enc(t_m)⟩` with tuples in ascending lexicographic order.
pub fn enc_relation(rel: &Relation, width: usize) -> BitString {
    let mut out = BitString::new();
    for t in rel.iter() {
        out.0.extend(enc_tuple(t, width).0);
    }
    out.wrap()
}

/// `⟨enc(A) enc(R₁) … enc(R_l)⟩` for an ordered structure with `n ≥ 2`.
pub fn enc_structure(a: &Structure) -> Result<BitString, EncodeError> {
    if !a.is_ordered() {
        return Err(EncodeError::Unordered);
    }
    let n = a.size();
    if n < 2 {
        return Err(EncodeError::DomainTooSmall(n));
    }
    let w = ceil_log(n).expect("n >= 2");
    let mut domain = BitString::new();
    for j in 0..n {
        domain.0.extend(enc_element(j, w)?.0);
    }
    let mut out = domain.wrap();
    for rel in a.relation_list() {
        out.0.extend(enc_relation(rel, w).0);
    }
    Ok(out.wrap())
}

struct Reader<'a> {
    symbols: &'a [Symbol],
    pos: usize,
}

impl Reader<'_> {
    fn error(&self, message: impl Into<String>) -> EncodeError {
        EncodeError::ParseError {
            position: self.pos,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<Symbol> {
        self.symbols.get(self.pos).copied()
    }

    fn expect(&mut self, s: Symbol) -> Result<(), EncodeError> {
        match self.peek() {
            Some(found) if found == s => {
                self.pos += 1;
                Ok(())
            }
            Some(found) => Err(self.error(format!(
                "expected {:?} but found {:?}",
                s.as_char(),
                found.as_char()
            ))),
            None => Err(self.error(format!("expected {:?} but input ended", s.as_char()))),
        }
    }

    fn at_open(&self) -> bool {
        self.peek() == Some(Symbol::Open)
    }

    /// `⟨bits⟩` as a number and its width.
    fn element(&mut self) -> Result<(usize, usize), EncodeError> {
        self.expect(Symbol::Open)?;
        let mut value = 0usize;
        let mut width = 0;
        loop {
            match self.peek() {
                Some(Symbol::Zero) => {}
                Some(Symbol::One) if width < usize::BITS as usize => value |= 1 << width,
                Some(Symbol::One) => return Err(self.error("element code too wide")),
                _ => break,
            }
            width += 1;
            self.pos += 1;
        }
        self.expect(Symbol::Close)?;
        Ok((value, width))
    }
}

/// Inverse of [`enc_structure`] for the given signature.
pub fn dec_structure(s: &BitString, sig: &Signature) -> Result<Structure, EncodeError> {
    let mut rd = Reader {
        symbols: s.symbols(),
        pos: 0,
    };
    rd.expect(Symbol::Open)?;
    rd.expect(Symbol::Open)?;
    let mut n = 0;
    let mut codes = Vec::new();
    while rd.at_open() {
        let start = rd.pos;
        codes.push((start, rd.element()?));
        n += 1;
    }
    rd.expect(Symbol::Close)?;
    if n < 2 {
        return Err(EncodeError::DomainTooSmall(n));
    }
    let w = ceil_log(n).expect("n >= 2");
    for (j, &(start, (value, width))) in codes.iter().enumerate() {
        if width != w || value != j {
            rd.pos = start;
            return Err(rd.error(format!("domain entry {j} is not the {w}-bit code of {j}")));
        }
    }
    let mut relations = Vec::with_capacity(sig.relations().len());
    for (name, arity) in sig.relations() {
        rd.expect(Symbol::Open)?;
        let mut rel = Relation::empty(*arity);
        let mut previous: Option<Tuple> = None;
        while rd.at_open() {
            rd.pos += 1;
            let mut t = Vec::with_capacity(*arity);
            while rd.at_open() {
                let start = rd.pos;
                let (value, width) = rd.element()?;
                if width != w || value >= n {
                    rd.pos = start;
                    return Err(rd.error(format!("not a {w}-bit code of an element below {n}")));
                }
                t.push(value);
            }
            rd.expect(Symbol::Close)?;
            if t.len() != *arity {
                return Err(EncodeError::ArityMismatch {
                    relation: name.clone(),
                    expected: *arity,
                    found: t.len(),
                });
            }
            if previous.as_ref().is_some_and(|p| *p >= t) {
                return Err(rd.error(format!("tuples of {name} are not strictly ascending")));
            }
            previous = Some(t.clone());
            rel.insert(t);
        }
        rd.expect(Symbol::Close)?;
        relations.push(rel);
    }
    rd.expect(Symbol::Close)?;
    if rd.pos != rd.symbols.len() {
        return Err(rd.error("trailing symbols"));
    }
    Ok(Structure::from_relations(sig.with_order(true), n, relations)?)
}

/// Bits per tuple in the compact binary-relation encoding.
pub fn j_chunk(n: usize) -> Result<usize, EncodeError> {
    match ceil_log(n) {
        Some(w) if w >= 2 => Ok(w - 1),
        _ => Err(EncodeError::DomainTooSmall(n)),
    }
}

/// For each pair `(a, b)` in order: the `⌈log₂ n⌉` LSB-first bits of `b`
/// without the last one. The first components are dropped.
pub fn j_encode_sequence(n: usize, pairs: &[(Element, Element)]) -> Result<BitString, EncodeError> {
    let chunk = j_chunk(n)?;
    let mut out = BitString::new();
    for &(a, b) in pairs {
        for e in [a, b] {
            if e >= n {
                return Err(EncodeError::OutOfRange { element: e, n });
            }
        }
        out.push_bits(b, chunk);
    }
    Ok(out)
}

/// [`j_encode_sequence`] over the tuples of a binary relation in lex order.
pub fn j_encode(n: usize, rel: &Relation) -> Result<BitString, EncodeError> {
    if rel.arity() != 2 {
        return Err(EncodeError::ArityMismatch {
            relation: "relation".into(),
            expected: 2,
            found: rel.arity(),
        });
    }
    let pairs: Vec<_> = rel.iter().map(|t| (t[0], t[1])).collect();
    j_encode_sequence(n, &pairs)
}

/// The canonical relation encoding to `word`: chunk `i` becomes
/// `(i mod n, b_i)` where `b_i` has the chunk as low bits and top bit 0.
pub fn j_preimage(n: usize, word: &BitString, k: u32) -> Result<Relation, EncodeError> {
    let chunk = j_chunk(n)?;
    let bits = word.bits().ok_or_else(|| {
        let bad = word
            .symbols()
            .iter()
            .find(|s| !matches!(s, Symbol::Zero | Symbol::One))
            .expect("some symbol is not a bit");
        EncodeError::NotBinary(bad.as_char())
    })?;
    if bits.len() % chunk != 0 {
        return Err(EncodeError::NotChunkAligned {
            len: bits.len(),
            chunk,
        });
    }
    let chunks = bits.len() / chunk;
    let max = log_pow(n, k).expect("n >= 4");
    if chunks > max {
        return Err(EncodeError::TooManyChunks { chunks, max });
    }
    let tuples = bits.chunks(chunk).enumerate().map(|(i, c)| {
        let b = c
            .iter()
            .enumerate()
            .map(|(j, &bit)| (bit as usize) << j)
            .sum();
        vec![i % n, b]
    });
    Ok(Relation::from_tuples(2, tuples)?)
}

/// The string whose symbols are `enc(A)`.
pub fn to_string_structure(a: &Structure) -> Result<StringStructure, EncodeError> {
    let s = enc_structure(a)?;
    Ok(StringStructure::from_symbols(s.0)?)
}

/// Joins words with a single `#` between neighbours.
pub fn concat_hash(parts: &[&[Symbol]]) -> Result<StringStructure, EncodeError> {
    let mut out = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        if i > 0 {
            out.push(Symbol::Hash);
        }
        out.extend_from_slice(p);
    }
    Ok(StringStructure::from_symbols(out)?)
}
