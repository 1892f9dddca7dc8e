//! Free power series with matrix coefficients.
//!
//! A [`FreeSeries`] is a finitely supported map from words to complex
//! matrices of a fixed shape, together with a degree bound. It models an
//! operator-valued function of `n` noncommuting variables,
//!
//! ```text
//! f(X_1, ..., X_n) = sum over words w of  A_w (x) X_w ,
//! ```
//!
//! where `X_w` is the product of tuple entries along the word. Arithmetic is
//! coefficient arithmetic: sums are word-wise, products are free Cauchy
//! products (coefficients of a word collect all of its two-sided
//! factorizations). When a tuple is nilpotent — every product of more than
//! `max_degree` entries vanishes, as for truncated creation operators — the
//! finite sum *is* the function value and evaluation is an exact algebra
//! morphism.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fock::{creation_matrices, FockBasis, Side, Word};
use crate::linalg::{all_finite, cr, identity, kron, op_norm, zeros, CMat, MatrixJson};

/// A tuple `(X_1, ..., X_n)` of square matrices of one common size — a point
/// of the matrix ball at which series are evaluated.
#[derive(Debug, Clone)]
pub struct OperatorTuple {
    mats: Vec<CMat>,
}

impl OperatorTuple {
    pub fn new(mats: Vec<CMat>) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::InvalidArgument("tuple needs at least one entry".into()));
        }
        let d = mats[0].nrows();
        for (i, m) in mats.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::ShapeMismatch(format!(
                    "tuple entry {i} is {}x{}, expected {d}x{d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(OperatorTuple { mats })
    }

    /// The creation operators of the given side on a truncated Fock space.
    pub fn creation(basis: &FockBasis, side: Side) -> Self {
        OperatorTuple { mats: creation_matrices(basis, side) }
    }

    pub fn n(&self) -> usize {
        self.mats.len()
    }

    /// Common matrix size.
    pub fn dim(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn entry(&self, i: usize) -> &CMat {
        &self.mats[i]
    }

    pub fn entries(&self) -> &[CMat] {
        &self.mats
    }

    /// `(r X_1, ..., r X_n)`.
    pub fn scaled(&self, r: f64) -> Self {
        OperatorTuple { mats: self.mats.iter().map(|m| m * cr(r)).collect() }
    }

    /// `(X_1*, ..., X_n*)`.
    pub fn adjoint(&self) -> Self {
        OperatorTuple { mats: self.mats.iter().map(|m| m.adjoint()).collect() }
    }

    /// `|| X_1 X_1* + ... + X_n X_n* ||^{1/2}`, the row norm of the tuple.
    pub fn row_norm(&self) -> f64 {
        let d = self.dim();
        let mut s = zeros(d, d);
        for m in &self.mats {
            s += m * m.adjoint();
        }
        op_norm(&s).sqrt()
    }

    /// Whether every product of `order` tuple entries vanishes (up to a tiny
    /// numerical floor). Uses the iterate `Y_{k+1} = sum_i X_i Y_k X_i*`,
    /// whose `k`-th value is the Gram sum of all length-`k` products.
    pub fn is_nilpotent(&self, order: usize) -> bool {
        let d = self.dim();
        let mut y = identity(d);
        for _ in 0..order {
            let mut next = zeros(d, d);
            for m in &self.mats {
                next += m * &y * m.adjoint();
            }
            y = next;
            if op_norm(&y) == 0.0 {
                return true;
            }
        }
        // relative floor: the iterate is bounded by the row norm to the 2k
        let scale = self.row_norm().max(1.0).powi(order as i32);
        op_norm(&y).sqrt() < 1e-10 * scale
    }

    /// The product `X_w = X_{w_1} X_{w_2} ... X_{w_k}` (identity for the
    /// empty word). Letters are 1-based.
    pub fn word_product(&self, w: &Word) -> CMat {
        let mut p = identity(self.dim());
        for &l in w.letters() {
            p = p * &self.mats[(l - 1) as usize];
        }
        p
    }
}

/// All products `X_w` for the given words, with shared prefixes computed
/// once. Returns a map containing every requested word and its prefixes.
pub fn word_products(x: &OperatorTuple, words: &[Word]) -> BTreeMap<Word, CMat> {
    let mut table: BTreeMap<Word, CMat> = BTreeMap::new();
    table.insert(Word::empty(), identity(x.dim()));
    let mut sorted: Vec<&Word> = words.iter().collect();
    sorted.sort();
    for w in sorted {
        if table.contains_key(w) {
            continue;
        }
        // longest memoized prefix, then extend letter by letter
        let mut k = w.len();
        while k > 0 && !table.contains_key(&w.prefix(k)) {
            k -= 1;
        }
        let mut acc = table[&w.prefix(k)].clone();
        for j in k..w.len() {
            let l = w.letters()[j];
            acc = acc * &x.entries()[(l - 1) as usize];
            table.insert(w.prefix(j + 1), acc.clone());
        }
    }
    table
}

/// A free power series with matrix coefficients of a fixed shape, supported
/// on words of bounded length. Zero coefficients are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeSeries {
    n: usize,
    max_degree: usize,
    rows: usize,
    cols: usize,
    coeffs: BTreeMap<Word, CMat>,
}

impl FreeSeries {
    /// The zero series of the given coefficient shape.
    pub fn zero(n: usize, rows: usize, cols: usize, max_degree: usize) -> Self {
        FreeSeries { n, max_degree, rows, cols, coeffs: BTreeMap::new() }
    }

    /// The constant series with the given coefficient at the empty word.
    pub fn constant(n: usize, a: CMat, max_degree: usize) -> Self {
        let mut s = FreeSeries::zero(n, a.nrows(), a.ncols(), max_degree);
        s.set_coeff(Word::empty(), a).expect("constant coefficient fits");
        s
    }

    /// The constant series `I` of the given size.
    pub fn one(n: usize, size: usize, max_degree: usize) -> Self {
        FreeSeries::constant(n, identity(size), max_degree)
    }

    /// The scalar monomial for a single letter (1-based).
    pub fn letter(n: usize, l: u32, max_degree: usize) -> Self {
        let mut s = FreeSeries::zero(n, 1, 1, max_degree.max(1));
        s.set_coeff(Word::letter(l), identity(1)).expect("letter in range");
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn coeffs(&self) -> &BTreeMap<Word, CMat> {
        &self.coeffs
    }

    /// Stored coefficient or a zero matrix of the right shape.
    pub fn coeff(&self, w: &Word) -> CMat {
        self.coeffs.get(w).cloned().unwrap_or_else(|| zeros(self.rows, self.cols))
    }

    /// Insert (or, when zero, remove) a coefficient, validating the word and
    /// shape against the series.
    pub fn set_coeff(&mut self, w: Word, a: CMat) -> Result<()> {
        if !w.is_valid(self.n) {
            return Err(Error::InvalidArgument(format!(
                "word {w} uses letters outside 1..={}",
                self.n
            )));
        }
        if w.len() > self.max_degree {
            return Err(Error::InvalidArgument(format!(
                "word {w} longer than the degree bound {}",
                self.max_degree
            )));
        }
        if a.nrows() != self.rows || a.ncols() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "coefficient is {}x{}, series stores {}x{}",
                a.nrows(),
                a.ncols(),
                self.rows,
                self.cols
            )));
        }
        if !all_finite(&a) {
            return Err(Error::Numerical(format!("non-finite coefficient at {w}")));
        }
        if a.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
            self.coeffs.remove(&w);
        } else {
            self.coeffs.insert(w, a);
        }
        Ok(())
    }

    /// Drop all words longer than `d` and set the degree bound to `d`.
    /// Raising the bound keeps coefficients as they are.
    pub fn with_max_degree(&self, d: usize) -> FreeSeries {
        let mut s = self.clone();
        s.max_degree = d;
        s.coeffs.retain(|w, _| w.len() <= d);
        s
    }

    /// `a·f + b·g`, word by word.
    pub fn add(&self, g: &FreeSeries, a: Complex64, b: Complex64) -> Result<FreeSeries> {
        if self.n != g.n {
            return Err(Error::ShapeMismatch(format!(
                "alphabet sizes differ: {} vs {}",
                self.n, g.n
            )));
        }
        if self.rows != g.rows || self.cols != g.cols {
            return Err(Error::ShapeMismatch(format!(
                "coefficient shapes differ: {}x{} vs {}x{}",
                self.rows, self.cols, g.rows, g.cols
            )));
        }
        let mut out =
            FreeSeries::zero(self.n, self.rows, self.cols, self.max_degree.max(g.max_degree));
        for (w, m) in &self.coeffs {
            out.set_coeff(w.clone(), m * a)?;
        }
        for (w, m) in &g.coeffs {
            let cur = out.coeff(w);
            out.set_coeff(w.clone(), cur + m * b)?;
        }
        Ok(out)
    }

    /// `a·f`.
    pub fn scaled(&self, a: Complex64) -> FreeSeries {
        let mut s = self.clone();
        if a.re == 0.0 && a.im == 0.0 {
            s.coeffs.clear();
        } else {
            for m in s.coeffs.values_mut() {
                *m *= a;
            }
        }
        s
    }

    /// Coefficients damped geometrically: word `w` picks up `r^{|w|}`.
    /// Matches evaluation at a tuple scaled by `r`.
    pub fn scaled_radial(&self, r: f64) -> FreeSeries {
        let mut s = self.clone();
        for (w, m) in s.coeffs.iter_mut() {
            *m *= cr(r.powi(w.len() as i32));
        }
        s.coeffs.retain(|_, m| m.iter().any(|z| z.re != 0.0 || z.im != 0.0));
        s
    }

    /// The series `g` with `g_w = (f_{reversed w})*`, so that
    /// `g(X_1*, ..., X_n*) = f(X_1, ..., X_n)*` for any tuple.
    pub fn adjoint_reversed(&self) -> FreeSeries {
        let mut s = FreeSeries::zero(self.n, self.cols, self.rows, self.max_degree);
        for (w, m) in &self.coeffs {
            s.set_coeff(w.reversed(), m.adjoint()).expect("shape preserved");
        }
        s
    }

    /// Free Cauchy product truncated at `cap`: the coefficient of `w`
    /// collects `A_u B_v` over all factorizations `w = u·v`.
    pub fn multiply_trunc(&self, g: &FreeSeries, cap: usize) -> Result<FreeSeries> {
        if self.n != g.n {
            return Err(Error::ShapeMismatch(format!(
                "alphabet sizes differ: {} vs {}",
                self.n, g.n
            )));
        }
        if self.cols != g.rows {
            return Err(Error::ShapeMismatch(format!(
                "inner dimensions differ: {}x{} times {}x{}",
                self.rows, self.cols, g.rows, g.cols
            )));
        }
        let mut acc: BTreeMap<Word, CMat> = BTreeMap::new();
        for (u, a) in &self.coeffs {
            for (v, b) in &g.coeffs {
                if u.len() + v.len() > cap {
                    continue;
                }
                let w = u.concat(v);
                let prod = a * b;
                acc.entry(w)
                    .and_modify(|m| *m += &prod)
                    .or_insert(prod);
            }
        }
        let mut out = FreeSeries::zero(self.n, self.rows, g.cols, cap);
        for (w, m) in acc {
            out.set_coeff(w, m)?;
        }
        Ok(out)
    }

    /// Full free Cauchy product (degree bound is the sum of the bounds).
    pub fn multiply(&self, g: &FreeSeries) -> Result<FreeSeries> {
        self.multiply_trunc(g, self.max_degree + g.max_degree)
    }

    /// Evaluate at a tuple: `sum of A_w (x) X_w` over the stored support.
    ///
    /// Exact whenever products of more than `max_degree` tuple entries
    /// vanish; otherwise meaningful only on the open ball (row norm `< 1`),
    /// and rejected outside it.
    pub fn eval_tuple(&self, x: &OperatorTuple) -> Result<CMat> {
        if x.n() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "series over {} letters evaluated at a {}-tuple",
                self.n,
                x.n()
            )));
        }
        // a jointly nilpotent tuple on a d-dimensional space kills every
        // product of d entries (the generated algebra is triangularizable),
        // so testing at order d decides nilpotency outright
        if x.row_norm() >= 1.0 && !x.is_nilpotent(x.dim()) {
            return Err(Error::TruncationUnsound(
                "tuple has row norm >= 1 and is not nilpotent; the truncated sum does not \
                 determine the value"
                    .into(),
            ));
        }
        let words: Vec<Word> = self.coeffs.keys().cloned().collect();
        let table = word_products(x, &words);
        let d = x.dim();
        let mut out = zeros(self.rows * d, self.cols * d);
        for (w, a) in &self.coeffs {
            out += kron(a, &table[w]);
        }
        Ok(out)
    }

    /// Evaluate at the creation operators of the given side, scaled by `r`.
    /// Exact for every `r` in `[0, 1]` thanks to the truncation.
    pub fn radial_eval(&self, r: f64, basis: &FockBasis, side: Side) -> Result<CMat> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidArgument(format!("radius {r} outside [0, 1]")));
        }
        self.eval_tuple(&OperatorTuple::creation(basis, side).scaled(r))
    }

    /// `|| sum of A_w* A_w ||^{1/2}`, the norm of the coefficient Gram sum.
    pub fn h2_norm(&self) -> f64 {
        let mut gram = zeros(self.cols, self.cols);
        for a in self.coeffs.values() {
            gram += a.adjoint() * a;
        }
        op_norm(&gram).sqrt()
    }

    /// Operator norm of the evaluation at the right creation tuple of the
    /// basis — a truncation-level lower estimate of the supremum norm over
    /// the ball, exact in the limit of deep truncations.
    pub fn hinf_norm(&self, basis: &FockBasis) -> Result<f64> {
        Ok(op_norm(&self.radial_eval(1.0, basis, Side::Right)?))
    }

    /// Stack series with equal alphabet and column shape into one series
    /// whose coefficients are the vertical blocks.
    pub fn stack_rows(parts: &[FreeSeries]) -> Result<FreeSeries> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("nothing to stack".into()));
        }
        let n = parts[0].n;
        let cols = parts[0].cols;
        let max_degree = parts.iter().map(|p| p.max_degree).max().unwrap();
        for p in parts {
            if p.n != n || p.cols != cols {
                return Err(Error::ShapeMismatch(
                    "stacked series must share alphabet and column count".into(),
                ));
            }
        }
        let rows: usize = parts.iter().map(|p| p.rows).sum();
        let mut support: Vec<Word> = Vec::new();
        for p in parts {
            support.extend(p.coeffs.keys().cloned());
        }
        support.sort();
        support.dedup();
        let mut out = FreeSeries::zero(n, rows, cols, max_degree);
        for w in support {
            let blocks: Vec<CMat> = parts.iter().map(|p| p.coeff(&w)).collect();
            let refs: Vec<&CMat> = blocks.iter().collect();
            out.set_coeff(w, crate::linalg::vstack(&refs))?;
        }
        Ok(out)
    }

    /// Cut the series into vertical blocks of the given row heights, the
    /// inverse of [`FreeSeries::stack_rows`]. The heights must sum to the
    /// row count.
    pub fn row_blocks(&self, heights: &[usize]) -> Result<Vec<FreeSeries>> {
        if heights.iter().sum::<usize>() != self.rows {
            return Err(Error::ShapeMismatch(format!(
                "block heights sum to {}, series has {} rows",
                heights.iter().sum::<usize>(),
                self.rows
            )));
        }
        let mut out: Vec<FreeSeries> = heights
            .iter()
            .map(|&h| FreeSeries::zero(self.n, h, self.cols, self.max_degree))
            .collect();
        for (w, a) in &self.coeffs {
            let mut top = 0;
            for (part, &h) in out.iter_mut().zip(heights) {
                part.set_coeff(w.clone(), a.rows(top, h).into_owned())?;
                top += h;
            }
        }
        Ok(out)
    }
}

/// Largest absolute coefficient difference between two series over the
/// words of length at most `through_degree`. Degree bounds may differ; the
/// comparison treats absent coefficients as zero.
pub fn coefficient_distance(a: &FreeSeries, b: &FreeSeries, through_degree: usize) -> Result<f64> {
    if a.rows != b.rows || a.cols != b.cols || a.n != b.n {
        return Err(Error::ShapeMismatch(format!(
            "comparing {}x{} over {} letters with {}x{} over {}",
            a.rows, a.cols, a.n, b.rows, b.cols, b.n
        )));
    }
    let mut words: Vec<&Word> = a.coeffs.keys().chain(b.coeffs.keys()).collect();
    words.sort();
    words.dedup();
    Ok(words
        .into_iter()
        .filter(|w| w.len() <= through_degree)
        .map(|w| crate::linalg::max_abs(&(a.coeff(w) - b.coeff(w))))
        .fold(0.0, f64::max))
}

/// Degree-by-degree inverse of a series with invertible constant term:
/// returns `g` with `f·g = g·f = I` exactly through `max_degree`.
pub fn series_inverse(f: &FreeSeries, max_degree: usize) -> Result<FreeSeries> {
    if f.rows != f.cols {
        return Err(Error::ShapeMismatch(format!(
            "only square-coefficient series invert; got {}x{}",
            f.rows, f.cols
        )));
    }
    let f0 = f.coeff(&Word::empty());
    let f0_inv = f0.clone().try_inverse().ok_or_else(|| {
        Error::ConstantTerm("constant coefficient is singular; no series inverse".into())
    })?;
    let mut g = FreeSeries::zero(f.n, f.rows, f.cols, max_degree);
    g.set_coeff(Word::empty(), f0_inv.clone())?;
    // enumerate words degree by degree; g_w = -f0^{-1} sum over proper
    // prefixes u of w of f_u g_{suffix}
    let basis = crate::fock::enumerate_words(f.n, max_degree)?;
    for w in basis.words().iter().skip(1) {
        let mut s = zeros(f.rows, f.cols);
        let mut touched = false;
        for k in 1..=w.len() {
            let u = w.prefix(k);
            if let Some(fu) = f.coeffs.get(&u) {
                let v = w.suffix(k);
                if let Some(gv) = g.coeffs.get(&v) {
                    s += fu * gv;
                    touched = true;
                }
            }
        }
        if touched {
            g.set_coeff(w.clone(), -&f0_inv * s)?;
        }
    }
    Ok(g)
}

/// `(I - g)^{-1}` through `max_degree`, for `g` with `I - g_ε` invertible.
pub fn neumann_inverse(g: &FreeSeries, max_degree: usize) -> Result<FreeSeries> {
    if g.rows != g.cols {
        return Err(Error::ShapeMismatch(format!(
            "only square-coefficient series invert; got {}x{}",
            g.rows, g.cols
        )));
    }
    let one = FreeSeries::one(g.n, g.rows, g.max_degree());
    series_inverse(&one.add(g, cr(1.0), cr(-1.0))?, max_degree)
}

// ---- JSON form ----
//
// {"n":…, "max_degree":…, "rows":…, "cols":…,
//  "coeffs":[{"word":[…], "matrix":{"rows":…, "cols":…, "data":[[re,im],…]}}]}
//
// Coefficients appear in graded lexicographic word order, so serialization
// is deterministic; floats round-trip bit-exactly through serde_json.

#[derive(Serialize, Deserialize)]
struct CoeffJson {
    word: Vec<u32>,
    matrix: MatrixJson,
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    n: usize,
    max_degree: usize,
    rows: usize,
    cols: usize,
    coeffs: Vec<CoeffJson>,
}

impl Serialize for FreeSeries {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(w, m)| CoeffJson {
                word: w.letters().to_vec(),
                matrix: MatrixJson::from_matrix(m),
            })
            .collect();
        SeriesJson {
            n: self.n,
            max_degree: self.max_degree,
            rows: self.rows,
            cols: self.cols,
            coeffs,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for FreeSeries {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = SeriesJson::deserialize(de)?;
        let mut s = FreeSeries::zero(raw.n, raw.rows, raw.cols, raw.max_degree);
        for c in raw.coeffs {
            let m = c.matrix.to_matrix().map_err(D::Error::custom)?;
            s.set_coeff(Word::new(c.word), m).map_err(D::Error::custom)?;
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::enumerate_words;
    use crate::linalg::{c, max_abs};

    fn scalar_poly(n: usize, terms: &[(Vec<u32>, f64)], deg: usize) -> FreeSeries {
        let mut s = FreeSeries::zero(n, 1, 1, deg);
        for (w, v) in terms {
            s.set_coeff(Word::new(w.clone()), identity(1) * cr(*v)).unwrap();
        }
        s
    }

    #[test]
    fn cauchy_product_matches_polynomial_algebra() {
        // (1 + z)(1 - z) = 1 - z^2 in one variable
        let f = scalar_poly(1, &[(vec![], 1.0), (vec![1], 1.0)], 1);
        let g = scalar_poly(1, &[(vec![], 1.0), (vec![1], -1.0)], 1);
        let p = f.multiply(&g).unwrap();
        assert_eq!(p.coeff(&Word::empty())[(0, 0)], cr(1.0));
        assert_eq!(p.coeff(&Word::new(vec![1]))[(0, 0)], cr(0.0));
        assert_eq!(p.coeff(&Word::new(vec![1, 1]))[(0, 0)], cr(-1.0));

        // letters concatenate: x1 * x2 is supported on the word (1,2) only
        let x1 = FreeSeries::letter(2, 1, 1);
        let x2 = FreeSeries::letter(2, 2, 1);
        let p = x1.multiply(&x2).unwrap();
        assert_eq!(p.coeffs().len(), 1);
        assert_eq!(p.coeff(&Word::new(vec![1, 2]))[(0, 0)], cr(1.0));

        // multiplying by the constant identity changes nothing
        let one = FreeSeries::one(2, 1, 0);
        assert_eq!(one.multiply(&p).unwrap().coeffs(), p.coeffs());
    }

    #[test]
    fn add_is_wordwise_with_scalars() {
        let z = FreeSeries::letter(1, 1, 1);
        let z2 = scalar_poly(1, &[(vec![1, 1], 1.0)], 2);
        let s = z.add(&z2, cr(1.0), cr(1.0)).unwrap();
        assert_eq!(s.coeffs().len(), 2);
        let zero = z.add(&z, cr(1.0), cr(-1.0)).unwrap();
        assert!(zero.coeffs().is_empty());
    }

    #[test]
    fn neumann_inverse_of_z_is_the_geometric_series() {
        let z = FreeSeries::letter(1, 1, 1);
        let h = neumann_inverse(&z, 5).unwrap();
        for k in 0..=5 {
            assert_eq!(h.coeff(&Word::new(vec![1; k]))[(0, 0)], cr(1.0));
        }
        // and (I - z)·h = I exactly through the cap
        let one = FreeSeries::one(1, 1, 1);
        let imz = one.add(&z, cr(1.0), cr(-1.0)).unwrap();
        let prod = imz.multiply_trunc(&h, 5).unwrap();
        assert_eq!(prod.coeffs().len(), 1);
        assert_eq!(prod.coeff(&Word::empty())[(0, 0)], cr(1.0));

        let zero = FreeSeries::zero(2, 3, 3, 2);
        let h = neumann_inverse(&zero, 2).unwrap();
        assert_eq!(h.coeff(&Word::empty()), identity(3));
        assert_eq!(h.coeffs().len(), 1);
    }

    #[test]
    fn series_inverse_is_two_sided_through_the_cap() {
        // a 2x2-coefficient series over two letters with a non-trivial
        // constant term
        let mut f = FreeSeries::zero(2, 2, 2, 2);
        let f0 = CMat::from_row_slice(2, 2, &[c(1.0, 0.2), cr(0.3), cr(0.0), c(0.8, -0.1)]);
        f.set_coeff(Word::empty(), f0).unwrap();
        f.set_coeff(Word::letter(1), CMat::from_row_slice(2, 2, &[cr(0.5), cr(0.0), c(0.1, 0.4), cr(0.2)]))
            .unwrap();
        f.set_coeff(Word::new(vec![2, 1]), CMat::from_row_slice(2, 2, &[cr(0.0), cr(0.7), cr(0.1), cr(0.0)]))
            .unwrap();
        let g = series_inverse(&f, 3).unwrap();
        let one = FreeSeries::one(2, 2, 3);
        for p in [f.multiply_trunc(&g, 3).unwrap(), g.multiply_trunc(&f, 3).unwrap()] {
            let resid = p.add(&one, cr(1.0), cr(-1.0)).unwrap();
            let worst = resid.coeffs().values().map(max_abs).fold(0.0, f64::max);
            assert!(worst < 1e-13, "inverse residual {worst}");
        }

        let singular = FreeSeries::zero(1, 2, 2, 1);
        assert!(series_inverse(&singular, 1).is_err());
    }

    #[test]
    fn evaluation_is_a_morphism_on_nilpotent_tuples() {
        let basis = enumerate_words(2, 3).unwrap();
        let s = OperatorTuple::creation(&basis, Side::Left).scaled(0.7);
        let mut f = FreeSeries::zero(2, 1, 1, 2);
        f.set_coeff(Word::empty(), identity(1) * cr(0.5)).unwrap();
        f.set_coeff(Word::letter(2), identity(1) * c(0.0, 1.0)).unwrap();
        let mut g = FreeSeries::zero(2, 1, 1, 1);
        g.set_coeff(Word::letter(1), identity(1) * cr(2.0)).unwrap();
        g.set_coeff(Word::new(vec![2]), identity(1) * cr(-0.25)).unwrap();
        let lhs = f.multiply(&g).unwrap().eval_tuple(&s).unwrap();
        let rhs = f.eval_tuple(&s).unwrap() * g.eval_tuple(&s).unwrap();
        assert!(max_abs(&(lhs - rhs)) < 1e-14);
    }

    #[test]
    fn evaluation_of_a_letter_is_the_tuple_entry() {
        let basis = enumerate_words(2, 2).unwrap();
        let x1 = FreeSeries::letter(2, 1, 2);
        let ev = x1.radial_eval(1.0, &basis, Side::Left).unwrap();
        let s1 = crate::fock::creation_matrix(&basis, 1, Side::Left).unwrap();
        assert!(max_abs(&(ev - s1)) == 0.0);

        // right side and a radius
        let ev = x1.radial_eval(0.5, &basis, Side::Right).unwrap();
        let r1 = crate::fock::creation_matrix(&basis, 1, Side::Right).unwrap();
        assert!(max_abs(&(ev - r1 * cr(0.5))) < 1e-16);

        // a constant evaluates to A (x) I
        let a = CMat::from_row_slice(1, 2, &[cr(1.0), c(0.0, -2.0)]);
        let k = FreeSeries::constant(2, a.clone(), 0)
            .eval_tuple(&OperatorTuple::creation(&basis, Side::Left))
            .unwrap();
        assert!(max_abs(&(k - kron(&a, &identity(basis.dim())))) == 0.0);
    }

    #[test]
    fn unsound_evaluations_are_rejected() {
        // a non-nilpotent tuple with row norm >= 1 must be refused
        let x = OperatorTuple::new(vec![identity(2)]).unwrap();
        let f = FreeSeries::letter(1, 1, 1);
        assert!(matches!(f.eval_tuple(&x), Err(Error::TruncationUnsound(_))));
        // the same direction inside the ball is fine
        let x = OperatorTuple::new(vec![identity(2) * cr(0.5)]).unwrap();
        assert!(f.eval_tuple(&x).is_ok());
    }

    #[test]
    fn norms_match_hand_computed_values() {
        // (1 + z)/2: Gram sum 1/4 + 1/4
        let f = scalar_poly(1, &[(vec![], 0.5), (vec![1], 0.5)], 1);
        assert!((f.h2_norm() - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(FreeSeries::zero(2, 3, 2, 1).h2_norm(), 0.0);

        let basis = enumerate_words(2, 3).unwrap();
        let x1 = FreeSeries::letter(2, 1, 1);
        assert!((x1.hinf_norm(&basis).unwrap() - 1.0).abs() < 1e-12);
        let x1px2 = x1.add(&FreeSeries::letter(2, 2, 1), cr(1.0), cr(1.0)).unwrap();
        assert!((x1px2.hinf_norm(&basis).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let a = CMat::from_row_slice(1, 1, &[cr(-3.0)]);
        assert!((FreeSeries::constant(2, a, 0).hinf_norm(&basis).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn adjoint_series_evaluates_to_the_adjoint() {
        let basis = enumerate_words(2, 3).unwrap();
        let mut f = FreeSeries::zero(2, 2, 1, 2);
        f.set_coeff(Word::empty(), CMat::from_row_slice(2, 1, &[cr(0.3), c(0.1, 0.2)])).unwrap();
        f.set_coeff(Word::new(vec![1, 2]), CMat::from_row_slice(2, 1, &[c(0.0, 1.0), cr(0.5)]))
            .unwrap();
        for side in [Side::Left, Side::Right] {
            let x = OperatorTuple::creation(&basis, side).scaled(0.8);
            let lhs = f.eval_tuple(&x).unwrap().adjoint();
            let rhs = f.adjoint_reversed().eval_tuple(&x.adjoint()).unwrap();
            assert!(max_abs(&(lhs - rhs)) < 1e-14);
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut f = FreeSeries::zero(2, 2, 2, 3);
        f.set_coeff(
            Word::new(vec![2, 1, 1]),
            CMat::from_row_slice(2, 2, &[c(0.1, -0.7), cr(1.0 / 3.0), cr(0.0), c(-0.0, 2e-18)]),
        )
        .unwrap();
        f.set_coeff(Word::empty(), identity(2) * c(0.25, f64::MIN_POSITIVE)).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        let back: FreeSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(back.n(), f.n());
        assert_eq!(back.max_degree(), f.max_degree());
        for (w, m) in f.coeffs() {
            let b = back.coeff(w);
            for (x, y) in m.iter().zip(b.iter()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
        // and the serialization itself is reproducible
        assert_eq!(text, serde_json::to_string(&back).unwrap());
    }

    #[test]
    fn invalid_json_is_rejected() {
        let bad = r#"{"n":2,"max_degree":1,"rows":1,"cols":1,
            "coeffs":[{"word":[3],"matrix":{"rows":1,"cols":1,"data":[[1.0,0.0]]}}]}"#;
        assert!(serde_json::from_str::<FreeSeries>(bad).is_err());
        let bad_shape = r#"{"n":2,"max_degree":1,"rows":1,"cols":1,
            "coeffs":[{"word":[1],"matrix":{"rows":2,"cols":1,"data":[[1.0,0.0],[0.0,0.0]]}}]}"#;
        assert!(serde_json::from_str::<FreeSeries>(bad_shape).is_err());
    }

    #[test]
    fn stacking_series_stacks_each_coefficient() {
        let top = scalar_poly(2, &[(vec![], 1.0)], 1);
        let bot = scalar_poly(2, &[(vec![2], -2.0)], 1);
        let s = FreeSeries::stack_rows(&[top, bot]).unwrap();
        assert_eq!(s.rows(), 2);
        assert_eq!(s.coeff(&Word::empty())[(0, 0)], cr(1.0));
        assert_eq!(s.coeff(&Word::letter(2))[(1, 0)], cr(-2.0));
        assert_eq!(s.coeff(&Word::letter(2))[(0, 0)], cr(0.0));
    }
}
