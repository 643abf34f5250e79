//! Pieces, independence pairs, cliques and finite heaps.
//!
//! A [`Heap`] is stored in Cartier-Foata normal form: a sequence of non-empty
//! cliques where every layer supports the next one. Since that decomposition
//! is unique, structural equality of the layer sequence is heap equality.
//!
//! Pieces are indices into the alphabet of an [`IndependencePair`], and
//! cliques are bit sets over those indices, so every operation that needs to
//! know which pieces commute goes through the independence pair.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported alphabet.
pub const MAX_PIECES: usize = 16;

/// A piece of the monoid, identified by its declaration index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Piece(pub u8);

impl Piece {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    fn bit(self) -> u32 {
        1 << self.0
    }
}

/// A set of pieces, stored as a bit set over declaration indices.
///
/// Whether the members are pairwise independent depends on the independence
/// pair; see [`IndependencePair::is_clique`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Clique(u32);

impl Clique {
    pub const EMPTY: Clique = Clique(0);

    pub fn singleton(piece: Piece) -> Self {
        Clique(piece.bit())
    }

    pub fn from_bits(bits: u32) -> Self {
        Clique(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, piece: Piece) -> bool {
        self.0 & piece.bit() != 0
    }

    pub fn with(self, piece: Piece) -> Self {
        Clique(self.0 | piece.bit())
    }

    pub fn without(self, piece: Piece) -> Self {
        Clique(self.0 & !piece.bit())
    }

    pub fn union(self, other: Clique) -> Self {
        Clique(self.0 | other.0)
    }

    pub fn intersection(self, other: Clique) -> Self {
        Clique(self.0 & other.0)
    }

    pub fn is_subset(self, other: Clique) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in declaration order.
    pub fn pieces(self) -> impl Iterator<Item = Piece> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros();
            bits &= bits - 1;
            Some(Piece(i as u8))
        })
    }
}

/// A finite heap in Cartier-Foata normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Heap {
    layers: Vec<Clique>,
}

impl Heap {
    /// The empty heap.
    pub fn empty() -> Self {
        Heap { layers: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// The Cartier-Foata layers, bottom first.
    pub fn layers(&self) -> &[Clique] {
        &self.layers
    }

    /// Number of pieces, `|x|`.
    pub fn len(&self) -> usize {
        self.layers.iter().map(|c| c.len()).sum()
    }

    /// Number of layers, `τ(x)`.
    pub fn height(&self) -> usize {
        self.layers.len()
    }

    /// Number of occurrences of `piece`, `|x|_a`.
    pub fn occurrences(&self, piece: Piece) -> usize {
        self.layers.iter().filter(|c| c.contains(piece)).count()
    }

    /// Set of pieces occurring in the heap.
    pub fn alphabet(&self) -> Clique {
        self.layers
            .iter()
            .fold(Clique::EMPTY, |acc, &c| acc.union(c))
    }

    /// The first (lowest) layer, or the empty clique for the empty heap.
    pub fn first_layer(&self) -> Clique {
        self.layers.first().copied().unwrap_or(Clique::EMPTY)
    }

    /// Canonical representative word: layers bottom-up, members of a layer in
    /// declaration order.
    pub fn word(&self) -> Vec<Piece> {
        self.layers.iter().flat_map(|c| c.pieces()).collect()
    }

    /// Sub-heap made of the first `k` layers (all of them if `k` exceeds the
    /// height).
    pub fn truncate(&self, k: usize) -> Heap {
        Heap {
            layers: self.layers[..k.min(self.layers.len())].to_vec(),
        }
    }
}

/// An alphabet of pieces together with a symmetric irreflexive independence
/// relation whose complement (the dependence graph) is connected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependencePair {
    names: Vec<String>,
    /// `independent[a]` is the set of pieces independent of `a`.
    independent: Vec<u32>,
    all: u32,
}

impl IndependencePair {
    /// Builds and validates an independence pair.
    pub fn new<S, P>(pieces: &[S], independent: &[(P, P)]) -> Result<Self>
    where
        S: AsRef<str>,
        P: AsRef<str>,
    {
        if pieces.len() < 2 {
            return Err(Error::TooFewPieces(pieces.len()));
        }
        if pieces.len() > MAX_PIECES {
            return Err(Error::TooManyPieces {
                got: pieces.len(),
                max: MAX_PIECES,
            });
        }
        let mut names: Vec<String> = Vec::with_capacity(pieces.len());
        for p in pieces {
            let name = p.as_ref();
            if !is_valid_name(name) {
                return Err(Error::InvalidPieceName(name.to_string()));
            }
            if names.iter().any(|n| n == name) {
                return Err(Error::DuplicatePiece(name.to_string()));
            }
            names.push(name.to_string());
        }
        let n = names.len();
        let mut ip = IndependencePair {
            names,
            independent: vec![0; n],
            all: if n == 32 { u32::MAX } else { (1u32 << n) - 1 },
        };
        for (a, b) in independent {
            let a = ip.piece(a.as_ref())?;
            let b = ip.piece(b.as_ref())?;
            if a == b {
                return Err(Error::ReflexiveIndependence(ip.name(a).to_string()));
            }
            ip.independent[a.index()] |= b.bit();
            ip.independent[b.index()] |= a.bit();
        }
        ip.check_connected()?;
        Ok(ip)
    }

    /// The monoid `⟨a,b,c | ab=ba⟩`.
    pub fn three_pieces() -> Self {
        Self::new(&["a", "b", "c"], &[("a", "b")]).expect("valid monoid")
    }

    /// The free monoid on `n` pieces named `p0, p1, ...`.
    pub fn free(n: usize) -> Result<Self> {
        let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        Self::new::<_, &str>(&names, &[])
    }

    fn check_connected(&self) -> Result<()> {
        let mut seen = 1u32;
        let mut queue = VecDeque::from([Piece(0)]);
        while let Some(a) = queue.pop_front() {
            let fresh = self.dependents(a).bits() & !seen;
            seen |= fresh;
            queue.extend(Clique(fresh).pieces());
        }
        if seen == self.all {
            return Ok(());
        }
        let unreachable: Vec<&str> = Clique(self.all & !seen)
            .pieces()
            .map(|p| self.name(p))
            .collect();
        Err(Error::DisconnectedDependence(format!(
            "{} not reachable from {}",
            unreachable.join(", "),
            self.names[0]
        )))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, piece: Piece) -> &str {
        &self.names[piece.index()]
    }

    pub fn piece(&self, name: &str) -> Result<Piece> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| Piece(i as u8))
            .ok_or_else(|| Error::UnknownPiece(name.to_string()))
    }

    pub fn pieces(&self) -> impl Iterator<Item = Piece> {
        (0..self.names.len() as u8).map(Piece)
    }

    /// The clique holding every piece; only a true clique for degenerate
    /// relations, but handy as an alphabet mask.
    pub fn alphabet(&self) -> Clique {
        Clique(self.all)
    }

    pub fn is_independent(&self, a: Piece, b: Piece) -> bool {
        self.independent[a.index()] & b.bit() != 0
    }

    /// Pieces independent of `a`.
    pub fn independents(&self, a: Piece) -> Clique {
        Clique(self.independent[a.index()])
    }

    /// Pieces dependent on `a`, `a` itself included.
    pub fn dependents(&self, a: Piece) -> Clique {
        Clique(self.all & !self.independent[a.index()])
    }

    pub fn is_clique(&self, c: Clique) -> bool {
        c.pieces()
            .all(|a| c.without(a).is_subset(self.independents(a)))
    }

    /// A clique is maximal when no outside piece is independent of all of it.
    pub fn is_maximal_clique(&self, c: Clique) -> bool {
        !Clique(self.all & !c.bits())
            .pieces()
            .any(|b| c.is_subset(self.independents(b)))
    }

    /// All cliques, the empty one included, ordered by size and then
    /// lexicographically on the sorted member names.
    pub fn cliques(&self) -> Vec<Clique> {
        let mut out = Vec::new();
        self.extend_cliques(Clique::EMPTY, 0, &mut out);
        out.sort_by(|&x, &y| self.compare_cliques(x, y));
        out
    }

    fn extend_cliques(&self, current: Clique, from: usize, out: &mut Vec<Clique>) {
        out.push(current);
        for i in from..self.len() {
            let p = Piece(i as u8);
            if current.is_subset(self.independents(p)) {
                self.extend_cliques(current.with(p), i + 1, out);
            }
        }
    }

    /// Canonical clique order: size first, then sorted member names.
    pub fn compare_cliques(&self, x: Clique, y: Clique) -> std::cmp::Ordering {
        x.len()
            .cmp(&y.len())
            .then_with(|| self.sorted_names(x).cmp(&self.sorted_names(y)))
    }

    fn sorted_names(&self, c: Clique) -> Vec<&str> {
        let mut v: Vec<&str> = c.pieces().map(|p| self.name(p)).collect();
        v.sort_unstable();
        v
    }

    /// `γ → γ′`: every piece of `γ′` depends on some piece of `γ`.
    pub fn supports(&self, lower: Clique, upper: Clique) -> bool {
        upper
            .pieces()
            .all(|b| !self.dependents(b).intersection(lower).is_empty())
    }

    /// Cartier-Foata normal form of a word.
    pub fn normalize(&self, word: &[Piece]) -> Heap {
        let mut builder = HeapBuilder::new(self);
        builder.extend(word.iter().copied());
        builder.finish()
    }

    /// Parses a word such as `acab`, `a c a b` or `a·c·a·b`. Tokens that are
    /// not piece names are split into single characters.
    pub fn parse_word(&self, text: &str) -> Result<Vec<Piece>> {
        let mut word = Vec::new();
        for token in text
            .split(|ch: char| ch.is_whitespace() || ch == '.' || ch == '·')
            .filter(|t| !t.is_empty())
        {
            if token == "0" && self.piece("0").is_err() {
                continue;
            }
            match self.piece(token) {
                Ok(p) => word.push(p),
                Err(err) => {
                    let split: Option<Vec<Piece>> = token
                        .chars()
                        .map(|ch| self.piece(ch.encode_utf8(&mut [0; 4])).ok())
                        .collect();
                    word.extend(split.ok_or(err)?);
                }
            }
        }
        Ok(word)
    }

    pub fn parse_heap(&self, text: &str) -> Result<Heap> {
        Ok(self.normalize(&self.parse_word(text)?))
    }

    /// Builds a heap from explicit layers, which must be non-empty cliques
    /// forming an admissible sequence.
    pub fn heap_from_layers(&self, layers: Vec<Clique>) -> Result<Heap> {
        for c in &layers {
            if c.is_empty() || !self.is_clique(*c) || !c.is_subset(self.alphabet()) {
                return Err(Error::InvalidArgument(format!(
                    "layer {} is not a non-empty clique",
                    self.format_clique(*c)
                )));
            }
        }
        if layers.windows(2).any(|w| !self.supports(w[0], w[1])) {
            return Err(Error::InvalidArgument(
                "layers are not Cartier-Foata admissible".into(),
            ));
        }
        Ok(Heap { layers })
    }

    /// `x·y` in normal form.
    pub fn concat(&self, x: &Heap, y: &Heap) -> Heap {
        let mut builder = HeapBuilder::from_heap(self, x);
        builder.push_heap(y);
        builder.finish()
    }

    /// Left divisibility, `x ≤ y`.
    pub fn leq(&self, x: &Heap, y: &Heap) -> bool {
        x.len() <= y.len() && self.peel(x, y).is_some()
    }

    /// The unique `z` with `x·z = y`, written `y − x`.
    pub fn residual(&self, x: &Heap, y: &Heap) -> Result<Heap> {
        self.peel(x, y)
            .map(|rest| self.normalize(&rest))
            .ok_or(Error::NotADivisor)
    }

    /// Removes the pieces of `x` from `y` one minimal occurrence at a time.
    /// The remaining word is still a linearisation of the remaining heap, so
    /// an occurrence is minimal iff no earlier remaining letter depends on it.
    fn peel(&self, x: &Heap, y: &Heap) -> Option<Vec<Piece>> {
        let mut rest = y.word();
        for a in x.word() {
            let dep = self.dependents(a).bits();
            let mut seen = 0u32;
            let pos = rest.iter().position(|&b| {
                if b == a && seen & dep == 0 {
                    return true;
                }
                seen |= b.bit();
                false
            })?;
            rest.remove(pos);
        }
        Some(rest)
    }

    /// Greatest common left divisor.
    pub fn meet(&self, x: &Heap, y: &Heap) -> Heap {
        let mut xr = x.clone();
        let mut yr = y.clone();
        let mut common = HeapBuilder::new(self);
        loop {
            let layer = xr.first_layer().intersection(yr.first_layer());
            if layer.is_empty() {
                break;
            }
            let h = Heap {
                layers: vec![layer],
            };
            xr = self.residual(&h, &xr).expect("first-layer pieces divide");
            yr = self.residual(&h, &yr).expect("first-layer pieces divide");
            common.push_clique(layer);
        }
        common.finish()
    }

    /// Least common right multiple, or `None` when `x` and `y` have no common
    /// upper bound.
    pub fn join(&self, x: &Heap, y: &Heap) -> Option<Heap> {
        let m = self.meet(x, y);
        let xr = self.residual(&m, x).ok()?;
        let yr = self.residual(&m, y).ok()?;
        let ay = yr.alphabet();
        let commute = xr
            .alphabet()
            .pieces()
            .all(|a| self.dependents(a).intersection(ay).is_empty());
        commute.then(|| self.concat(x, &yr))
    }

    pub fn format_clique(&self, c: Clique) -> String {
        if c.is_empty() {
            return "0".to_string();
        }
        c.pieces()
            .map(|p| self.name(p))
            .collect::<Vec<_>>()
            .join("·")
    }

    /// Canonical word of a heap with `·` separators; `0` for the empty heap.
    pub fn format_heap(&self, x: &Heap) -> String {
        if x.is_empty() {
            return "0".to_string();
        }
        x.word()
            .into_iter()
            .map(|p| self.name(p))
            .collect::<Vec<_>>()
            .join("·")
    }

    /// Displays a heap as its layers, e.g. `[a][c][a·b]`.
    pub fn format_layers(&self, x: &Heap) -> String {
        x.layers
            .iter()
            .map(|&c| format!("[{}]", self.format_clique(c)))
            .collect()
    }

    /// Display adapter for a heap.
    pub fn display<'a>(&'a self, x: &'a Heap) -> impl fmt::Display + 'a {
        HeapDisplay { ip: self, heap: x }
    }
}

struct HeapDisplay<'a> {
    ip: &'a IndependencePair,
    heap: &'a Heap,
}

impl fmt::Display for HeapDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.ip.format_heap(self.heap))
    }
}

fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && name != "0"
        && name
            .chars()
            .all(|ch| ch.is_alphanumeric() || ch == '_' || ch == '\'')
}

/// Incremental Cartier-Foata normalisation.
///
/// Each pushed piece lands one level above the highest occurrence of a piece
/// it depends on. `heights[a]` is the level of the top occurrence of `a`
/// (0 when absent).
#[derive(Debug, Clone)]
pub struct HeapBuilder {
    dependents: Vec<u32>,
    heights: Vec<usize>,
    layers: Vec<Clique>,
    present: u32,
    len: usize,
}

impl HeapBuilder {
    pub fn new(ip: &IndependencePair) -> Self {
        HeapBuilder {
            dependents: ip.pieces().map(|p| ip.dependents(p).bits()).collect(),
            heights: vec![0; ip.len()],
            layers: Vec::new(),
            present: 0,
            len: 0,
        }
    }

    pub fn from_heap(ip: &IndependencePair, x: &Heap) -> Self {
        let mut b = Self::new(ip);
        for (i, c) in x.layers.iter().enumerate() {
            for p in c.pieces() {
                b.heights[p.index()] = i + 1;
            }
            b.present |= c.bits();
            b.len += c.len();
        }
        b.layers = x.layers.clone();
        b
    }

    /// Level (1-based) at which `piece` would land if pushed now.
    pub fn landing_level(&self, piece: Piece) -> usize {
        1 + Clique(self.dependents[piece.index()])
            .pieces()
            .map(|b| self.heights[b.index()])
            .max()
            .unwrap_or(0)
    }

    pub fn push(&mut self, piece: Piece) {
        let level = self.landing_level(piece);
        if level > self.layers.len() {
            self.layers.push(Clique::singleton(piece));
        } else {
            self.layers[level - 1] = self.layers[level - 1].with(piece);
        }
        self.heights[piece.index()] = level;
        self.present |= piece.bit();
        self.len += 1;
    }

    /// Pushes every member of a clique; the order is irrelevant since the
    /// members commute.
    pub fn push_clique(&mut self, c: Clique) {
        for p in c.pieces() {
            self.push(p);
        }
    }

    pub fn push_heap(&mut self, x: &Heap) {
        for &c in &x.layers {
            self.push_clique(c);
        }
    }

    pub fn height(&self) -> usize {
        self.layers.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn layers(&self) -> &[Clique] {
        &self.layers
    }

    /// Pieces with at least one occurrence.
    pub fn alphabet(&self) -> Clique {
        Clique(self.present)
    }

    /// Whether the first layer can no longer change when more pieces are
    /// pushed: every piece of the alphabet already has a dependent
    /// occurrence, so any future occurrence lands at level 2 or above.
    pub fn first_layer_is_final(&self) -> bool {
        !self.layers.is_empty() && self.dependents.iter().all(|&d| d & self.present != 0)
    }

    /// Removes and returns the first layer.
    pub fn pop_first_layer(&mut self) -> Option<Clique> {
        if self.layers.is_empty() {
            return None;
        }
        let first = self.layers.remove(0);
        self.len -= first.len();
        self.present = 0;
        for (i, h) in self.heights.iter_mut().enumerate() {
            *h = h.saturating_sub(1);
            if *h > 0 {
                self.present |= 1 << i;
            }
        }
        Some(first)
    }

    pub fn to_heap(&self) -> Heap {
        Heap {
            layers: self.layers.clone(),
        }
    }

    pub fn finish(self) -> Heap {
        Heap {
            layers: self.layers,
        }
    }
}

impl Extend<Piece> for HeapBuilder {
    fn extend<T: IntoIterator<Item = Piece>>(&mut self, iter: T) {
        for p in iter {
            self.push(p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> IndependencePair {
        IndependencePair::three_pieces()
    }

    fn layers(ip: &IndependencePair, x: &Heap) -> String {
        ip.format_layers(x)
    }

    #[test]
    fn cliques_of_three_piece_monoid() {
        let ip = t();
        let names: Vec<String> = ip.cliques().iter().map(|&c| ip.format_clique(c)).collect();
        assert_eq!(names, ["0", "a", "b", "c", "a·b"]);
    }

    #[test]
    fn cliques_of_free_monoid() {
        let ip = IndependencePair::new::<_, &str>(&["a", "b"], &[]).unwrap();
        let names: Vec<String> = ip.cliques().iter().map(|&c| ip.format_clique(c)).collect();
        assert_eq!(names, ["0", "a", "b"]);
    }

    #[test]
    fn clique_order_uses_names_not_declaration() {
        let ip = IndependencePair::new(&["z", "y", "x", "w"], &[("z", "y"), ("y", "x")]).unwrap();
        let names: Vec<String> = ip.cliques().iter().map(|&c| ip.format_clique(c)).collect();
        // members print in declaration order, but sort by sorted names
        assert_eq!(names, ["0", "w", "x", "y", "z", "y·x", "z·y"]);
    }

    #[test]
    fn rejects_bad_independence_pairs() {
        let all = [("a", "b"), ("a", "c"), ("b", "c")];
        assert!(matches!(
            IndependencePair::new(&["a", "b", "c"], &all),
            Err(Error::DisconnectedDependence(_))
        ));
        assert!(matches!(
            IndependencePair::new(&["a", "b"], &[("a", "a")]),
            Err(Error::ReflexiveIndependence(_))
        ));
        assert!(matches!(
            IndependencePair::new::<_, &str>(&["a"], &[]),
            Err(Error::TooFewPieces(1))
        ));
        assert!(matches!(
            IndependencePair::new::<_, &str>(&["a", "a"], &[]),
            Err(Error::DuplicatePiece(_))
        ));
        assert!(matches!(
            IndependencePair::new(&["a", "b"], &[("a", "d")]),
            Err(Error::UnknownPiece(_))
        ));
    }

    #[test]
    fn supports_relation() {
        let ip = t();
        let [a, b, c] = [Piece(0), Piece(1), Piece(2)];
        let ab = Clique::singleton(a).with(b);
        assert!(ip.supports(Clique::singleton(c), ab));
        assert!(!ip.supports(Clique::singleton(a), Clique::singleton(b)));
        for g in ip.cliques() {
            assert!(ip.supports(g, Clique::EMPTY));
            assert_eq!(ip.supports(Clique::EMPTY, g), g.is_empty());
        }
    }

    #[test]
    fn normalize_congruent_words() {
        let ip = t();
        let x = ip.parse_heap("acab").unwrap();
        let y = ip.parse_heap("acba").unwrap();
        assert_eq!(x, y);
        assert_eq!(layers(&ip, &x), "[a][c][a·b]");
        assert_eq!(x.len(), 4);
        assert_eq!(x.height(), 3);
        assert_eq!(x.occurrences(Piece(0)), 2);
        assert!(ip.parse_heap("").unwrap().is_empty());
    }

    #[test]
    fn parse_word_forms() {
        let ip = t();
        let w = ip.parse_word("a·c a.b").unwrap();
        assert_eq!(w, vec![Piece(0), Piece(2), Piece(0), Piece(1)]);
        assert!(matches!(ip.parse_word("ad"), Err(Error::UnknownPiece(_))));
    }

    #[test]
    fn concat_examples() {
        let ip = t();
        let a = ip.parse_heap("a").unwrap();
        let b = ip.parse_heap("b").unwrap();
        assert_eq!(ip.concat(&a, &b), ip.concat(&b, &a));
        assert_eq!(ip.concat(&a, &b).height(), 1);
        assert_eq!(ip.concat(&a, &Heap::empty()), a);
        let ac = ip.parse_heap("ac").unwrap();
        assert_eq!(layers(&ip, &ip.concat(&ac, &b)), "[a][c][b]");
    }

    #[test]
    fn divisibility_examples() {
        let ip = t();
        let a = ip.parse_heap("a").unwrap();
        let b = ip.parse_heap("b").unwrap();
        let ab = ip.parse_heap("ab").unwrap();
        assert!(ip.leq(&a, &ab));
        assert!(ip.leq(&b, &ab));
        assert_eq!(ip.residual(&b, &ab).unwrap(), a);
        assert_eq!(ip.residual(&ab, &ab).unwrap(), Heap::empty());
        let c = ip.parse_heap("c").unwrap();
        assert!(!ip.leq(&c, &ip.parse_heap("ac").unwrap()));
        assert_eq!(ip.residual(&c, &ab), Err(Error::NotADivisor));
    }

    #[test]
    fn lattice_examples() {
        let ip = t();
        let a = ip.parse_heap("a").unwrap();
        let b = ip.parse_heap("b").unwrap();
        assert_eq!(ip.meet(&a, &b), Heap::empty());
        assert_eq!(ip.join(&a, &b), Some(ip.parse_heap("ab").unwrap()));
        assert_eq!(ip.join(&a, &a), Some(a.clone()));
        let aa = ip.parse_heap("aa").unwrap();
        let ca = ip.parse_heap("ca").unwrap();
        assert_eq!(ip.join(&aa, &ca), None);
    }

    #[test]
    fn maximal_cliques() {
        let ip = t();
        let is_max = |s: &str| {
            let h = ip.parse_heap(s).unwrap();
            ip.is_maximal_clique(h.first_layer())
        };
        assert!(is_max("c"));
        assert!(is_max("ab"));
        assert!(!is_max("a"));
        assert!(!is_max("b"));
    }

    #[test]
    fn builder_pops_first_layer() {
        let ip = t();
        let mut builder = HeapBuilder::new(&ip);
        builder.extend(ip.parse_word("bac").unwrap());
        assert!(builder.first_layer_is_final());
        assert_eq!(builder.pop_first_layer(), Some(ip.parse_heap("ab").unwrap().first_layer()));
        assert_eq!(builder.to_heap(), ip.parse_heap("c").unwrap());
        builder.push(Piece(0));
        assert_eq!(layers(&ip, &builder.to_heap()), "[c][a]");
    }

    #[test]
    fn heap_from_layers_checks_admissibility() {
        let ip = t();
        let a = Clique::singleton(Piece(0));
        let b = Clique::singleton(Piece(1));
        let c = Clique::singleton(Piece(2));
        assert!(ip.heap_from_layers(vec![a, c, b]).is_ok());
        assert!(ip.heap_from_layers(vec![a, b]).is_err());
        assert!(ip.heap_from_layers(vec![a.with(Piece(2))]).is_err());
        assert!(ip.heap_from_layers(vec![Clique::EMPTY]).is_err());
    }
}
