//! Seeded random instances shared by the test suites and the command-line
//! driver.
//!
//! Everything is deterministic in the seed: generators draw from an explicit
//! ChaCha stream, so a fixed seed reproduces the same matrices and series on
//! every platform. Norm control is by construction, not by rejection — series
//! are rescaled so a coefficient-wise budget guarantees the multiplier-norm
//! bound, which keeps randomized assertions away from boundary flakiness.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::fock::enumerate_words;
use crate::lifting::{validate_data, LiftingData};
use crate::linalg::{cr, identity, kron, null_space_basis, op_norm, vstack, zeros, CMat};
use crate::series::{FreeSeries, OperatorTuple};

/// The random stream used wherever the library needs randomness.
pub type Stream = ChaCha8Rng;

/// A deterministic stream for the given seed.
pub fn seeded(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One standard complex Gaussian sample, total variance one.
pub fn complex_gaussian(rng: &mut Stream) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) / 2f64.sqrt()
}

/// A matrix of independent standard complex Gaussians.
pub fn random_matrix(rng: &mut Stream, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// A random unitary: the Q factor of a Gaussian matrix, with column phases
/// fixed by the sign of the corresponding diagonal of R.
pub fn random_unitary(rng: &mut Stream, dim: usize) -> CMat {
    let qr = random_matrix(rng, dim, dim).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 1e-300 { d / d.norm() } else { cr(1.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// A strictly upper-triangular (hence jointly nilpotent) tuple, rescaled so
/// the row norm equals `margin`.
pub fn random_nilpotent_tuple(rng: &mut Stream, n: usize, dim: usize, margin: f64) -> OperatorTuple {
    let mats: Vec<CMat> = (0..n)
        .map(|_| {
            CMat::from_fn(dim, dim, |i, j| {
                if i < j {
                    complex_gaussian(rng)
                } else {
                    cr(0.0)
                }
            })
        })
        .collect();
    let x = OperatorTuple::new(mats).expect("consistent shapes by construction");
    let norm = x.row_norm();
    if norm > 1e-300 {
        x.scaled(margin / norm)
    } else {
        x
    }
}

/// A dense random tuple rescaled so the row norm equals `margin`.
pub fn random_row_contraction(rng: &mut Stream, n: usize, dim: usize, margin: f64) -> OperatorTuple {
    let mats: Vec<CMat> = (0..n).map(|_| random_matrix(rng, dim, dim)).collect();
    let x = OperatorTuple::new(mats).expect("consistent shapes by construction");
    let norm = x.row_norm();
    if norm > 1e-300 {
        x.scaled(margin / norm)
    } else {
        x
    }
}

/// A free series with independent Gaussian coefficients at every word
/// through `max_degree` (the constant term included only on request).
pub fn random_series(
    rng: &mut Stream,
    n: usize,
    rows: usize,
    cols: usize,
    max_degree: usize,
    include_constant: bool,
) -> FreeSeries {
    let words = enumerate_words(n, max_degree).expect("at least one letter");
    let mut f = FreeSeries::zero(n, rows, cols, max_degree);
    for w in words.words() {
        if w.len() == 0 && !include_constant {
            continue;
        }
        f.set_coeff(w.clone(), random_matrix(rng, rows, cols))
            .expect("shape fixed above");
    }
    f
}

/// Rescale a series so the sum over words of the largest singular value of
/// each coefficient equals `budget`. The multiplier norm of the result is at
/// most `budget`, with the gap to the true norm absorbing truncation noise.
pub fn rescale_l1(f: &FreeSeries, budget: f64) -> FreeSeries {
    let total: f64 = f.coeffs().values().map(op_norm).sum();
    if total > 1e-300 {
        f.scaled(cr(budget / total))
    } else {
        f.clone()
    }
}

/// Rescale a series so its coefficient two-norm equals `target`.
pub fn rescale_h2(f: &FreeSeries, target: f64) -> FreeSeries {
    let norm = f.h2_norm();
    if norm > 1e-300 {
        f.scaled(cr(target / norm))
    } else {
        f.clone()
    }
}

/// A random series whose multiplier norm is at most `budget` by the
/// coefficient-budget bound.
pub fn random_schur_series(
    rng: &mut Stream,
    n: usize,
    rows: usize,
    cols: usize,
    max_degree: usize,
    include_constant: bool,
    budget: f64,
) -> FreeSeries {
    rescale_l1(
        &random_series(rng, n, rows, cols, max_degree, include_constant),
        budget,
    )
}

/// Random data for the lifting solver with every hypothesis holding by
/// construction: the tuple is a row contraction with margin, the targets
/// `Q_i` are columns of one isometry so their Gram block is exactly the
/// identity, the constraints are either the targets themselves (`tight`,
/// forcing equality in the block inequality) or strictly shorter random
/// columns, and the data map is drawn from the exact solution space of the
/// intertwining equations and scaled well inside the ball.
pub fn random_lifting_data(
    rng: &mut Stream,
    n: usize,
    dim_x: usize,
    dim_h: usize,
    tight: bool,
) -> LiftingData {
    assert!(n >= 1 && dim_x > n, "need more constraint dimensions than letters");
    for _ in 0..256 {
        let t = random_row_contraction(rng, n, dim_h, 0.9);
        let q_stack = random_matrix(rng, dim_x, n).qr().q();
        let q: Vec<CMat> = (0..n).map(|i| q_stack.columns(i, 1).into_owned()).collect();
        let c: Vec<CMat> = if tight {
            q.clone()
        } else {
            (0..n)
                .map(|_| {
                    let col = random_matrix(rng, dim_x, 1);
                    let norm = op_norm(&col);
                    col * cr(0.8 / norm.max(1e-300))
                })
                .collect()
        };
        // vec(T_i A c_i) = (c_i^T (x) T_i) vec A and vec(A q_i) =
        // (q_i^T (x) I) vec A, so data maps satisfying the intertwining
        // relations are the null space of the stacked differences.
        let row_blocks: Vec<CMat> = (0..n)
            .map(|i| {
                kron(&c[i].transpose(), t.entry(i)) - kron(&q[i].transpose(), &identity(dim_h))
            })
            .collect();
        let refs: Vec<&CMat> = row_blocks.iter().collect();
        let null = null_space_basis(&vstack(&refs), 1e-10);
        if null.ncols() == 0 {
            continue;
        }
        let combo = &null * random_matrix(rng, null.ncols(), 1);
        let mut a = zeros(dim_h, dim_x);
        for col in 0..dim_x {
            for row in 0..dim_h {
                a[(row, col)] = combo[(col * dim_h + row, 0)];
            }
        }
        let norm = op_norm(&a);
        if norm < 1e-6 {
            continue;
        }
        a *= cr(0.7 / norm);
        let data = LiftingData::new(a, t, c, q).expect("shapes consistent by construction");
        if validate_data(&data).pass() {
            return data;
        }
    }
    panic!("no solvable lifting data found in 256 attempts");
}

/// A single-letter weighted interpolation instance `(T, A, P, Y)` drawn
/// from one common eigenbasis, so every hypothesis — `Y* P Y = P`,
/// `A*A ⪯ P`, `T A = A Y` — holds to rounding: `Y` is unitary with random
/// eigenphases, the weight has comfortable eigenvalues (one exact zero on
/// request), `A` shrinks each eigendirection below its weight, and `T` is
/// `Y` itself.
pub fn random_weighted_instance(
    rng: &mut Stream,
    dim: usize,
    rank_deficient: bool,
) -> (OperatorTuple, CMat, CMat, OperatorTuple) {
    use std::f64::consts::TAU;
    let u = random_unitary(rng, dim);
    let mut y_d = zeros(dim, dim);
    let mut p_d = zeros(dim, dim);
    let mut a_d = zeros(dim, dim);
    for k in 0..dim {
        y_d[(k, k)] = Complex64::from_polar(1.0, rng.gen_range(0.0..TAU));
        let weight = if rank_deficient && k == 0 { 0.0 } else { rng.gen_range(0.5..2.0) };
        p_d[(k, k)] = cr(weight);
        a_d[(k, k)] = Complex64::from_polar(0.7 * weight.sqrt(), rng.gen_range(0.0..TAU));
    }
    let y = &u * y_d * u.adjoint();
    let p = &u * p_d * u.adjoint();
    let a = &u * a_d * u.adjoint();
    let tuple = OperatorTuple::new(vec![y]).expect("square by construction");
    (tuple.clone(), a, p, tuple)
}
