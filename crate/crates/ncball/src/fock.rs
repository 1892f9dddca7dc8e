//! Words over a finite alphabet and the truncated full Fock space they index.
//!
//! The basis of the truncation at length `m` consists of all words of length
//! at most `m` over letters `1..=n`, in graded lexicographic order (shorter
//! words first, same-length words lexicographically). The empty word plays
//! the role of the vacuum vector.
//!
//! Creation operators come in two flavours: the left operator for letter `i`
//! prepends `i` to a word, the right operator appends it. On the truncation
//! both map top-degree basis vectors to zero, which makes every tuple of
//! truncated creation operators nilpotent of order `m + 1`. That nilpotency
//! is what turns the identities checked throughout this crate into exact
//! finite-dimensional statements instead of approximations.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{zeros, CMat};

/// Which way creation operators act: prepend (left) or append (right).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// A word over the alphabet `{1, ..., n}`; the empty word is allowed.
///
/// Ordering is graded lexicographic: first by length, then letter by letter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn new(letters: Vec<u32>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(i: u32) -> Self {
        Word(vec![i])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    /// All letters lie in `1..=n`.
    pub fn is_valid(&self, n: usize) -> bool {
        self.0.iter().all(|&l| l >= 1 && (l as usize) <= n)
    }

    /// The word read backwards.
    pub fn reversed(&self) -> Word {
        let mut v = self.0.clone();
        v.reverse();
        Word(v)
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn prepended(&self, letter: u32) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(letter);
        v.extend_from_slice(&self.0);
        Word(v)
    }

    pub fn appended(&self, letter: u32) -> Word {
        let mut v = self.0.clone();
        v.push(letter);
        Word(v)
    }

    /// Prefix of the first `k` letters.
    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k].to_vec())
    }

    /// Suffix dropping the first `k` letters.
    pub fn suffix(&self, k: usize) -> Word {
        Word(self.0[k..].to_vec())
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "e")
        } else {
            for (k, l) in self.0.iter().enumerate() {
                if k > 0 {
                    write!(f, ".")?;
                }
                write!(f, "{l}")?;
            }
            Ok(())
        }
    }
}

/// Enumeration of all words of length at most `m` over `n` letters,
/// in graded lexicographic order, with index lookup.
#[derive(Debug, Clone)]
pub struct FockBasis {
    n: usize,
    m: usize,
    words: Vec<Word>,
    index: BTreeMap<Word, usize>,
    /// `degree_start[d]` is the index of the first word of length `d`;
    /// a final entry holds the total count.
    degree_start: Vec<usize>,
}

/// Build the graded-lex word basis for `n` letters truncated at length `m`.
pub fn enumerate_words(n: usize, m: usize) -> Result<FockBasis> {
    if n == 0 {
        return Err(Error::InvalidArgument("alphabet size n must be at least 1".into()));
    }
    // dimension (n^{m+1} - 1)/(n - 1), with overflow guard for CLI misuse
    let mut dim: usize = 0;
    let mut pow: usize = 1;
    for _ in 0..=m {
        dim = dim
            .checked_add(pow)
            .ok_or_else(|| Error::InvalidArgument("basis too large".into()))?;
        pow = pow
            .checked_mul(n)
            .ok_or_else(|| Error::InvalidArgument("basis too large".into()))?;
        if dim > 2_000_000 {
            return Err(Error::InvalidArgument(format!(
                "basis with n={n}, m={m} exceeds the supported size"
            )));
        }
    }

    let mut words = Vec::with_capacity(dim);
    let mut degree_start = Vec::with_capacity(m + 2);
    words.push(Word::empty());
    degree_start.push(0);
    let mut prev_start = 0;
    for _deg in 1..=m {
        degree_start.push(words.len());
        let prev_end = degree_start[degree_start.len() - 1];
        // children of the previous degree block, letters ascending: this
        // preserves lexicographic order within each degree
        let parents: Vec<Word> = words[prev_start..prev_end].to_vec();
        for p in &parents {
            for l in 1..=n as u32 {
                words.push(p.appended(l));
            }
        }
        prev_start = prev_end;
    }
    degree_start.push(words.len());
    debug_assert_eq!(words.len(), dim);

    let index = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
    Ok(FockBasis { n, m, words, index, degree_start })
}

impl FockBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Truncation length.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Total number of basis words.
    pub fn dim(&self) -> usize {
        self.words.len()
    }

    /// Number of words of length at most `d` (they form a prefix of the
    /// enumeration). `d` is clamped to the truncation length.
    pub fn dim_at_degree(&self, d: usize) -> usize {
        let d = d.min(self.m);
        self.degree_start[d + 1]
    }

    pub fn word(&self, i: usize) -> &Word {
        &self.words[i]
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Words of length at most `d`, as a slice of the enumeration.
    pub fn words_up_to(&self, d: usize) -> &[Word] {
        &self.words[..self.dim_at_degree(d)]
    }
}

/// Matrix of the creation operator for `letter` (1-based) on the truncated
/// Fock space. Words of maximal length are sent to zero.
pub fn creation_matrix(basis: &FockBasis, letter: u32, side: Side) -> Result<CMat> {
    if letter == 0 || letter as usize > basis.n {
        return Err(Error::InvalidArgument(format!(
            "letter {letter} outside 1..={}",
            basis.n
        )));
    }
    let d = basis.dim();
    let mut m = zeros(d, d);
    for (j, w) in basis.words.iter().enumerate() {
        if w.len() >= basis.m {
            continue; // truncated away
        }
        let target = match side {
            Side::Left => w.prepended(letter),
            Side::Right => w.appended(letter),
        };
        let i = basis.index_of(&target).expect("target word within truncation");
        m[(i, j)] = crate::linalg::cr(1.0);
    }
    Ok(m)
}

/// All `n` creation matrices for the given side, letter order `1..=n`.
pub fn creation_matrices(basis: &FockBasis, side: Side) -> Vec<CMat> {
    (1..=basis.n as u32)
        .map(|l| creation_matrix(basis, l, side).expect("letters in range"))
        .collect()
}

/// Orthogonal projection onto the span of the vacuum word.
pub fn vacuum_projection(basis: &FockBasis) -> CMat {
    let mut p = zeros(basis.dim(), basis.dim());
    p[(0, 0)] = crate::linalg::cr(1.0);
    p
}

/// The index permutation of the word-reversal unitary: entry `i` is the
/// basis index of the reversal of word `i`. An involution that exchanges
/// the left and right creation operators under conjugation.
pub fn flip_permutation(basis: &FockBasis) -> Vec<usize> {
    basis
        .words()
        .iter()
        .map(|w| basis.index_of(&w.reversed()).expect("reversal stays in basis"))
        .collect()
}

/// Row/column indices of `E (x) span{words of length <= d}` inside
/// `E (x) Fock` when the coefficient space `E` has dimension `dim_e` and
/// tensor indices are laid out as `e * dim_fock + word`.
pub fn tensor_indices_up_to(basis: &FockBasis, dim_e: usize, d: usize) -> Vec<usize> {
    let fd = basis.dim();
    let keep = basis.dim_at_degree(d);
    let mut idx = Vec::with_capacity(dim_e * keep);
    for e in 0..dim_e {
        for w in 0..keep {
            idx.push(e * fd + w);
        }
    }
    idx
}

/// Compress an operator on `E (x) Fock` to the block spanned by words of
/// length at most `d` (on both sides). The coefficient dimension `E` is
/// inferred from the matrix size, which must be a multiple of the Fock
/// dimension.
pub fn compress(m: &CMat, basis: &FockBasis, d: usize) -> Result<CMat> {
    let fd = basis.dim();
    if m.nrows() % fd != 0 || m.ncols() % fd != 0 {
        return Err(Error::ShapeMismatch(format!(
            "matrix {}x{} is not a tensor against a Fock factor of dimension {fd}",
            m.nrows(),
            m.ncols()
        )));
    }
    let rows = tensor_indices_up_to(basis, m.nrows() / fd, d);
    let cols = tensor_indices_up_to(basis, m.ncols() / fd, d);
    Ok(crate::linalg::select(m, &rows, &cols))
}
