//! Poisson-type transforms, the Cayley transform pair, and moment data of
//! positive-real series.
//!
//! The Poisson kernel of a row contraction `X` on `H` is the column operator
//!
//! ```text
//! K_X : H -> Fock (x) H,   K_X h = sum over words w of  e_w (x) D X_w* h ,
//! ```
//!
//! with `D = (I - sum X_i X_i*)^{1/2}`. Compression through the kernel,
//! `u -> K_X* (u (x) I) K_X`, is a completely positive map sending
//! `S_a S_b*` to `X_a X_b*`; on tuples that are nilpotent within the
//! truncation the kernel is an exact isometry and the transform is unital.
//!
//! The Cayley pair exchanges series with identity constant term and
//! positive real part against series with zero constant term and norm at
//! most one; on the truncated algebra the two maps are exact mutual
//! inverses, coefficient by coefficient.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fock::{FockBasis, Side, Word};
use crate::linalg::{cr, identity, max_abs, psd_sqrt, zeros, CMat};
use crate::series::{series_inverse, word_products, FreeSeries, OperatorTuple};

/// The Poisson kernel of a tuple against a word basis, stored as the blocks
/// `L_w = X_w · D` (the kernel's `w`-block is `L_w*`).
#[derive(Debug, Clone)]
pub struct PoissonKernel {
    x: OperatorTuple,
    blocks: Vec<CMat>,
    fock_dim: usize,
}

/// Build the Poisson kernel of `x` over the words of `basis`.
///
/// `x` must be a row contraction; the kernel is an exact isometry when `x`
/// is nilpotent of order at most `m + 1`, and an isometry up to the
/// truncation tail `|| sum over |w| = m+1 of X_w X_w* ||` otherwise.
pub fn poisson_kernel(x: &OperatorTuple, basis: &FockBasis) -> Result<PoissonKernel> {
    let rn = x.row_norm();
    if rn > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "row norm {rn:.6} exceeds 1; the Poisson kernel needs a row contraction"
        )));
    }
    let d = x.dim();
    let mut gram = zeros(d, d);
    for i in 0..x.n() {
        gram += x.entry(i) * x.entry(i).adjoint();
    }
    let defect = psd_sqrt(&(identity(d) - gram));
    let table = word_products(x, basis.words());
    let blocks = basis.words().iter().map(|w| &table[w] * &defect).collect();
    Ok(PoissonKernel { x: x.clone(), blocks, fock_dim: basis.dim() })
}

impl PoissonKernel {
    pub fn tuple(&self) -> &OperatorTuple {
        &self.x
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    fn dim_h(&self) -> usize {
        self.x.dim()
    }

    /// The kernel as a `(fock·dim H) x dim H` matrix.
    pub fn matrix(&self) -> CMat {
        let h = self.dim_h();
        let mut k = zeros(self.fock_dim * h, h);
        for (w, l) in self.blocks.iter().enumerate() {
            k.view_mut((w * h, 0), (h, h)).copy_from(&l.adjoint());
        }
        k
    }

    /// `K* (f (x) I) K` for `f` acting on the word span alone — the scalar
    /// Poisson transform. Computed block-wise; the Kronecker factor is never
    /// materialized.
    pub fn transform(&self, f: &CMat) -> Result<CMat> {
        let fd = self.fock_dim;
        if f.nrows() != fd || f.ncols() != fd {
            return Err(Error::ShapeMismatch(format!(
                "argument is {}x{}, expected {fd}x{fd}",
                f.nrows(),
                f.ncols()
            )));
        }
        let h = self.dim_h();
        let mut out = zeros(h, h);
        for dl in 0..fd {
            let mut a = zeros(h, h);
            let mut any = false;
            for g in 0..fd {
                let c = f[(g, dl)];
                if c.re != 0.0 || c.im != 0.0 {
                    a += &self.blocks[g] * c;
                    any = true;
                }
            }
            if any {
                out += a * self.blocks[dl].adjoint();
            }
        }
        Ok(out)
    }

    /// `(I_E (x) K*)(u (x) I)(I_E (x) K)` for `u` acting on `E (x) word
    /// span`; the coefficient dimension is inferred from the matrix size.
    pub fn operator_transform(&self, u: &CMat) -> Result<CMat> {
        let fd = self.fock_dim;
        if u.nrows() != u.ncols() || u.nrows() % fd != 0 {
            return Err(Error::ShapeMismatch(format!(
                "argument is {}x{}, expected square with a {fd}-dimensional word factor",
                u.nrows(),
                u.ncols()
            )));
        }
        let e = u.nrows() / fd;
        let h = self.dim_h();
        let mut out = zeros(e * h, e * h);
        for er in 0..e {
            for ec in 0..e {
                let block = u.view((er * fd, ec * fd), (fd, fd)).into_owned();
                let t = self.transform(&block)?;
                out.view_mut((er * h, ec * h), (h, h)).copy_from(&t);
            }
        }
        Ok(out)
    }
}

/// One-shot scalar Poisson transform `K_X*(f (x) I)K_X`.
pub fn poisson_transform(f: &CMat, x: &OperatorTuple, basis: &FockBasis) -> Result<CMat> {
    poisson_kernel(x, basis)?.transform(f)
}

/// One-shot operator Poisson transform on `E (x) word span`.
pub fn operator_poisson(u: &CMat, x: &OperatorTuple, basis: &FockBasis) -> Result<CMat> {
    poisson_kernel(x, basis)?.operator_transform(u)
}

/// The operator Poisson transform paired with the *right* creation
/// operators, at the scaled right tuple `s R`.
///
/// [`operator_poisson`] at a tuple `X` reproduces the left creation
/// algebra (`S_a S_b* -> X_a X_b*`), so radial damping of operators built
/// from right creations needs the mirrored kernel. Conjugating by the
/// word-reversal unitary exchanges the two sides, giving a unital
/// completely positive map with `R_a R_b* -> s^{|a|+|b|} R_a R_b*`
/// exactly on the truncation. In particular `f(R) -> f(sR)` for series
/// evaluated on the right, and by the Schwarz inequality
/// `f(sR)* f(sR) <= right_operator_poisson(f(R)* f(R), s)`.
pub fn right_operator_poisson(u: &CMat, s: f64, basis: &FockBasis) -> Result<CMat> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("scale {s} outside [0, 1]")));
    }
    let fd = basis.dim();
    if u.nrows() != u.ncols() || u.nrows() % fd != 0 {
        return Err(Error::ShapeMismatch(format!(
            "argument is {}x{}, expected square with a {fd}-dimensional word factor",
            u.nrows(),
            u.ncols()
        )));
    }
    let e = u.nrows() / fd;
    let perm = crate::fock::flip_permutation(basis);
    let conj = |m: &CMat| {
        CMat::from_fn(m.nrows(), m.ncols(), |i, j| {
            let (ei, wi) = (i / fd, i % fd);
            let (ej, wj) = (j / fd, j % fd);
            m[(ei * fd + perm[wi], ej * fd + perm[wj])]
        })
    };
    let x = OperatorTuple::creation(basis, Side::Left).scaled(s);
    let flipped = poisson_kernel(&x, basis)?.operator_transform(&conj(u))?;
    debug_assert_eq!(flipped.nrows(), e * fd);
    Ok(conj(&flipped))
}

/// Compression of an operator on `E (x) word span` to the vacuum component:
/// the `E`-block picking out row and column degree zero.
pub fn vacuum_functional(u: &CMat, basis: &FockBasis) -> Result<CMat> {
    crate::fock::compress(u, basis, 0)
}

const CONSTANT_TERM_TOL: f64 = 1e-12;

/// Cayley transform `f -> (f - I)(f + I)^{-1}` on the truncated algebra.
///
/// The constant term of `f` must equal `I` (within `1e-12`; it is treated
/// as exactly `I`), so the result has zero constant term. Maps series with
/// positive real part on the ball to contractive ones, and is inverted
/// exactly by [`inverse_cayley`] through the shared degree bound.
pub fn cayley(f: &FreeSeries) -> Result<FreeSeries> {
    if f.rows() != f.cols() {
        return Err(Error::ShapeMismatch(format!(
            "square coefficients required, got {}x{}",
            f.rows(),
            f.cols()
        )));
    }
    let dev = max_abs(&(f.coeff(&Word::empty()) - identity(f.rows())));
    if dev > CONSTANT_TERM_TOL {
        return Err(Error::ConstantTerm(format!(
            "constant term differs from the identity by {dev:.3e}"
        )));
    }
    let cap = f.max_degree();
    let mut num = f.clone();
    num.set_coeff(Word::empty(), zeros(f.rows(), f.cols()))?;
    let mut den = num.clone();
    den.set_coeff(Word::empty(), identity(f.rows()) * cr(2.0))?;
    num.multiply_trunc(&series_inverse(&den, cap)?, cap)
}

/// Inverse Cayley transform `g -> (I + g)(I - g)^{-1}` on the truncated
/// algebra. The constant term of `g` must vanish (within `1e-12`; it is
/// treated as exactly zero), so the result has constant term `I`.
pub fn inverse_cayley(g: &FreeSeries) -> Result<FreeSeries> {
    if g.rows() != g.cols() {
        return Err(Error::ShapeMismatch(format!(
            "square coefficients required, got {}x{}",
            g.rows(),
            g.cols()
        )));
    }
    let dev = max_abs(&g.coeff(&Word::empty()));
    if dev > CONSTANT_TERM_TOL {
        return Err(Error::ConstantTerm(format!(
            "constant term differs from zero by {dev:.3e}"
        )));
    }
    let cap = g.max_degree();
    let mut strict = g.clone();
    strict.set_coeff(Word::empty(), zeros(g.rows(), g.cols()))?;
    let mut num = strict.clone();
    num.set_coeff(Word::empty(), identity(g.rows()))?;
    let mut den = strict.scaled(cr(-1.0));
    den.set_coeff(Word::empty(), identity(g.rows()))?;
    num.multiply_trunc(&series_inverse(&den, cap)?, cap)
}

/// Word-indexed moments of the positive-real series attached to a
/// contractive series: the entry at `a` is the Gram convolution
/// `sum over g of A_g* A_{g·a}`, the entry at the empty word being the full
/// Gram sum. All coefficients act on the series' column space.
#[derive(Debug, Clone, PartialEq)]
pub struct HerglotzMoments {
    n: usize,
    dim: usize,
    max_degree: usize,
    values: BTreeMap<Word, CMat>,
}

impl HerglotzMoments {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of the space the moments act on.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &BTreeMap<Word, CMat> {
        &self.values
    }

    pub fn value(&self, w: &Word) -> CMat {
        self.values.get(w).cloned().unwrap_or_else(|| zeros(self.dim, self.dim))
    }
}

/// Gram convolution moments of a series, truncated at the basis depth: the
/// moment at `a` collects `A_g* A_{g·a}` over all `g` with `|g·a|` within
/// the truncation.
pub fn herglotz_moments(theta: &FreeSeries, basis: &FockBasis) -> Result<HerglotzMoments> {
    if theta.n() != basis.n() {
        return Err(Error::ShapeMismatch(format!(
            "series over {} letters, basis over {}",
            theta.n(),
            basis.n()
        )));
    }
    let m = basis.m();
    let mut values: BTreeMap<Word, CMat> = BTreeMap::new();
    for (g, a_g) in theta.coeffs() {
        if g.len() > m {
            continue;
        }
        for (w, a_w) in theta.coeffs() {
            if w.len() > m || w.len() < g.len() {
                continue;
            }
            if w.prefix(g.len()) != *g {
                continue;
            }
            let alpha = w.suffix(g.len());
            let term = a_g.adjoint() * a_w;
            values.entry(alpha).and_modify(|v| *v += &term).or_insert(term);
        }
    }
    values.retain(|_, v| v.iter().any(|z| z.re != 0.0 || z.im != 0.0));
    Ok(HerglotzMoments { n: theta.n(), dim: theta.cols(), max_degree: m, values })
}

/// The positive-real series rebuilt from moments: constant term the empty
/// moment, the coefficient at every non-empty word twice its moment.
pub fn herglotz_series(mu: &HerglotzMoments) -> FreeSeries {
    let mut w = FreeSeries::zero(mu.n, mu.dim, mu.dim, mu.max_degree);
    for (word, v) in &mu.values {
        let c = if word.is_empty() { v.clone() } else { v * cr(2.0) };
        w.set_coeff(word.clone(), c).expect("moment shapes are uniform");
    }
    w
}

// Moments serialize exactly like a series keyed by the same words.

impl Serialize for HerglotzMoments {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut f = FreeSeries::zero(self.n, self.dim, self.dim, self.max_degree);
        for (w, v) in &self.values {
            f.set_coeff(w.clone(), v.clone()).map_err(serde::ser::Error::custom)?;
        }
        f.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for HerglotzMoments {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let f = FreeSeries::deserialize(de)?;
        if f.rows() != f.cols() {
            return Err(serde::de::Error::custom("moment matrices must be square"));
        }
        Ok(HerglotzMoments {
            n: f.n(),
            dim: f.rows(),
            max_degree: f.max_degree(),
            values: f.coeffs().clone(),
        })
    }
}
