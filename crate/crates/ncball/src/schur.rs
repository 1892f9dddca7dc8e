//! Linear-fractional column representations of series in the unit
//! coefficient-two-norm ball.
//!
//! Every series `Θ` with `h2_norm ≤ 1` factors as
//! `Θ = L (I − Σ (I⊗X_i) M_i)^{-1}` where the stacked column
//! `[L; M_1; …; M_n]` is a contractive multiplier. The columns doing so are
//! parametrized by contractive columns `Φ = [φ_1; …; φ_n]` acting on the
//! defect range of the symbol of `Θ`: the letter sum
//! `χ = Σ (I⊗X_i) φ_i` feeds the majorant parametrization,
//! `F = W + D (I+χ)(I−χ)^{-1} D` is a pluriharmonic majorant of `Θ*Θ`, and
//! the column is read off from `F` by
//!
//! * `L = 2 Θ (F + I)^{-1}`,
//! * `Σ (I⊗X_i) M_i = (F − I)(F + I)^{-1}`.
//!
//! On the truncated algebra every identity here is exact through the degree
//! bound, so the forward and inverse maps below round-trip to rounding
//! error. The representation is unique exactly when the symbol is an
//! isometry, in which case the parameter column lives on a zero-dimensional
//! space.

use serde::{Deserialize, Serialize};

use crate::fock::{FockBasis, Side, Word};
use crate::linalg::{cr, max_abs, op_norm};
use crate::majorant::{conjugated, majorant_from_param, param_from_majorant, symbol};
use crate::report::{Check, Report};
use crate::series::{coefficient_distance, series_inverse, FreeSeries};
use crate::transforms::{cayley, inverse_cayley};
use crate::{Error, Result, TOL_EIG, TOL_RES};

/// Tolerance below which a constant coefficient is treated as exactly zero.
const CONSTANT_TERM_TOL: f64 = 1e-12;

/// A linear-fractional column `[L; M_1; …; M_n]`: the numerator `L` maps the
/// source space into the target space and the denominators `M_i` act on the
/// source space. The stacked column must be a multiplier-norm contraction.
///
/// Serialized as `{"L": …, "M": […]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchurColumn {
    #[serde(rename = "L")]
    l: FreeSeries,
    #[serde(rename = "M")]
    m: Vec<FreeSeries>,
}

impl SchurColumn {
    /// Assemble and validate a column against the basis.
    pub fn new(l: FreeSeries, m: Vec<FreeSeries>, basis: &FockBasis) -> Result<Self> {
        let col = SchurColumn { l, m };
        col.validate(basis)?;
        Ok(col)
    }

    /// Check shapes and the contractivity of the stacked column. Intended
    /// both for construction and for data read back from JSON.
    pub fn validate(&self, basis: &FockBasis) -> Result<()> {
        let n = basis.n();
        if self.m.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} denominators for {} letters",
                self.m.len(),
                n
            )));
        }
        let e = self.l.cols();
        if self.l.n() != n {
            return Err(Error::ShapeMismatch(format!(
                "numerator over {} letters, basis over {n}",
                self.l.n()
            )));
        }
        for (i, mi) in self.m.iter().enumerate() {
            if mi.rows() != e || mi.cols() != e || mi.n() != n {
                return Err(Error::ShapeMismatch(format!(
                    "denominator {} is {}x{} over {} letters; expected {e}x{e} over {n}",
                    i + 1,
                    mi.rows(),
                    mi.cols(),
                    mi.n()
                )));
            }
        }
        let est = self.stacked()?.hinf_norm(basis)?;
        if est > 1.0 + TOL_EIG {
            return Err(Error::InvalidArgument(format!(
                "stacked column norm estimate {est:.9} exceeds 1"
            )));
        }
        Ok(())
    }

    /// The numerator series.
    pub fn l(&self) -> &FreeSeries {
        &self.l
    }

    /// The denominator series, one per letter.
    pub fn m(&self) -> &[FreeSeries] {
        &self.m
    }

    /// The column stacked into a single series with block rows
    /// `[L; M_1; …; M_n]`.
    pub fn stacked(&self) -> Result<FreeSeries> {
        let mut parts = vec![self.l.clone()];
        parts.extend(self.m.iter().cloned());
        FreeSeries::stack_rows(&parts)
    }
}

/// Split a series with vanishing constant term along its leading letter: the
/// `i`-th output collects the coefficients of words starting with letter
/// `i`, that letter stripped, so `coeff(out_i, β) = coeff(ψ, i·β)`.
/// Reassembling with [`left_letter_merge`] recovers the input exactly.
pub fn left_letter_split(psi: &FreeSeries) -> Result<Vec<FreeSeries>> {
    let dev = max_abs(&psi.coeff(&Word::empty()));
    if dev > CONSTANT_TERM_TOL {
        return Err(Error::ConstantTerm(format!(
            "leading-letter split needs a vanishing constant term; got {dev:.3e}"
        )));
    }
    let n = psi.n();
    let d = psi.max_degree().saturating_sub(1);
    let mut out = vec![FreeSeries::zero(n, psi.rows(), psi.cols(), d); n];
    for (w, a) in psi.coeffs() {
        if w.is_empty() {
            continue; // treated as exactly zero
        }
        let i = w.letters()[0] as usize - 1;
        out[i].set_coeff(w.suffix(1), a.clone())?;
    }
    Ok(out)
}

/// Rebuild `Σ (I⊗X_i) parts_i` from leading-letter components: the
/// coefficient at `i·β` is `coeff(parts_i, β)`. Words beyond `max_degree`
/// fall outside the truncated algebra and are dropped.
pub fn left_letter_merge(parts: &[FreeSeries], max_degree: usize) -> Result<FreeSeries> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("nothing to merge".into()));
    }
    let n = parts.len();
    let rows = parts[0].rows();
    let cols = parts[0].cols();
    let mut out = FreeSeries::zero(n, rows, cols, max_degree);
    for (i, p) in parts.iter().enumerate() {
        if p.rows() != rows || p.cols() != cols || p.n() != n {
            return Err(Error::ShapeMismatch(format!(
                "component {} is {}x{} over {} letters; expected {rows}x{cols} over {n}",
                i + 1,
                p.rows(),
                p.cols(),
                p.n()
            )));
        }
        for (w, a) in p.coeffs() {
            if w.len() + 1 > max_degree {
                continue;
            }
            out.set_coeff(w.prepended(i as u32 + 1), a.clone())?;
        }
    }
    Ok(out)
}

/// The zero parameter column for a given series: `n` zero series acting on
/// the defect range of the symbol. Zero-dimensional when the symbol is an
/// isometry — the representation is then unique.
pub fn zero_parameter(theta: &FreeSeries, basis: &FockBasis) -> Result<Vec<FreeSeries>> {
    let sym = symbol(theta, basis)?;
    let k = sym.defect_factor()?.1.len();
    let d = basis.m().saturating_sub(1);
    Ok(vec![FreeSeries::zero(basis.n(), k, k, d); basis.n()])
}

/// Build the column representing `theta` from a contractive parameter
/// column on the defect range of its symbol.
///
/// The parameter `phi` must hold one series per letter, each with square
/// coefficients of the defect rank. The letter sum `χ = Σ (I⊗X_i) φ_i` is
/// embedded through the defect range, the majorant
/// `F = W + D (I+χ)(I−χ)^{-1} D` is formed, and the column is
/// `L = 2 Θ (F+I)^{-1}` over the leading-letter split of the Cayley
/// transform of `F`. Errors if `theta` leaves the unit coefficient-two-norm
/// ball or the stacked parameter is not a contraction.
pub fn j_forward(theta: &FreeSeries, phi: &[FreeSeries], basis: &FockBasis) -> Result<SchurColumn> {
    let n = basis.n();
    let m = basis.m();
    let h2 = theta.h2_norm();
    if h2 > 1.0 + TOL_EIG {
        return Err(Error::InvalidArgument(format!(
            "coefficient two-norm {h2:.9} exceeds 1; no contractive column exists"
        )));
    }
    let sym = symbol(theta, basis)?;
    let (u, svals) = sym.defect_factor()?;
    let k = svals.len();
    if phi.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{} parameter series for {} letters",
            phi.len(),
            n
        )));
    }
    for (i, p) in phi.iter().enumerate() {
        if p.rows() != k || p.cols() != k || p.n() != n {
            return Err(Error::ShapeMismatch(format!(
                "parameter {} is {}x{} over {} letters; expected {k}x{k} over {n}",
                i + 1,
                p.rows(),
                p.cols(),
                p.n()
            )));
        }
    }
    let e = theta.cols();
    let chi = if k == 0 {
        FreeSeries::zero(n, e, e, m)
    } else {
        let est = FreeSeries::stack_rows(phi)?.hinf_norm(basis)?;
        if est > 1.0 + TOL_EIG {
            return Err(Error::InvalidArgument(format!(
                "stacked parameter norm estimate {est:.9} exceeds 1"
            )));
        }
        let embedded: Vec<FreeSeries> = phi
            .iter()
            .map(|p| conjugated(p, &u, &u.adjoint()))
            .collect::<Result<_>>()?;
        left_letter_merge(&embedded, m)?
    };
    let f = majorant_from_param(theta, &chi, basis)?;
    let m_list = left_letter_split(&cayley(&f)?)?;
    let one = FreeSeries::one(n, e, m);
    let half_sum = f.add(&one, cr(0.5), cr(0.5))?;
    let l = theta
        .with_max_degree(m)
        .multiply_trunc(&series_inverse(&half_sum, m)?, m)?;
    SchurColumn::new(l, m_list, basis)
}

/// Evaluate the linear-fractional representation of a column:
/// `Θ = L (I − Σ (I⊗X_i) M_i)^{-1}` through the truncation degree.
pub fn reconstruct_theta(col: &SchurColumn, basis: &FockBasis) -> Result<FreeSeries> {
    let m = basis.m();
    let denom = left_letter_merge(col.m(), m)?;
    let inv = crate::series::neumann_inverse(&denom, m)?;
    col.l().with_max_degree(m).multiply_trunc(&inv, m)
}

/// Recover the parameter column from a column representing `theta`.
///
/// The denominator sum is pulled back through the inverse Cayley transform
/// to the majorant `F`, the majorant parametrization produces the embedded
/// parameter, and compression to the defect range followed by the
/// leading-letter split yields `Φ`. Errors if the column does not
/// reconstruct `theta`, or if `F` falls outside the majorant family (the
/// column is then inconsistent).
pub fn j_inverse(
    theta: &FreeSeries,
    col: &SchurColumn,
    basis: &FockBasis,
) -> Result<Vec<FreeSeries>> {
    let m = basis.m();
    if col.l().rows() != theta.rows() || col.l().cols() != theta.cols() {
        return Err(Error::ShapeMismatch(format!(
            "column numerator is {}x{}; the series is {}x{}",
            col.l().rows(),
            col.l().cols(),
            theta.rows(),
            theta.cols()
        )));
    }
    let rebuilt = reconstruct_theta(col, basis)?;
    let gap = coefficient_distance(&rebuilt, theta, m.saturating_sub(1))?;
    if gap > TOL_RES {
        return Err(Error::Inconsistent(format!(
            "column reconstructs the series only to {gap:.3e} through degree {}",
            m.saturating_sub(1)
        )));
    }
    let f = inverse_cayley(&left_letter_merge(col.m(), m)?)?;
    let g_embedded = param_from_majorant(theta, &f, basis)?;
    let sym = symbol(theta, basis)?;
    let (u, svals) = sym.defect_factor()?;
    let k = svals.len();
    if k == 0 {
        return Ok(vec![
            FreeSeries::zero(basis.n(), 0, 0, m.saturating_sub(1));
            basis.n()
        ]);
    }
    let chi = conjugated(&g_embedded, &u.adjoint(), &u)?;
    left_letter_split(&chi)
}

/// Measure membership of a series in the contractive multiplier class on a
/// radial grid: one check per radius records the largest singular value of
/// the right radial evaluation, passing when it stays within `1 + 1e−9`.
/// A truncation-level necessary test — radii outside `[0, 1]` error.
pub fn schur_membership(f: &FreeSeries, basis: &FockBasis, r_grid: &[f64]) -> Result<Report> {
    let mut report = Report::new("schur-membership");
    for &r in r_grid {
        let norm = op_norm(&f.radial_eval(r, basis, Side::Right)?);
        report.push(Check::residual(
            format!("radial-norm r={r}"),
            norm,
            1.0 + TOL_EIG,
        ));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::enumerate_words;
    use crate::gen;
    use crate::linalg::{hermitian_part, identity, CMat};

    fn scalar(coeffs: &[(Vec<u32>, f64)], n: usize, deg: usize) -> FreeSeries {
        let mut s = FreeSeries::zero(n, 1, 1, deg);
        for (w, v) in coeffs {
            s.set_coeff(Word::new(w.clone()), CMat::from_element(1, 1, cr(*v)))
                .unwrap();
        }
        s
    }

    /// A scalar series over two letters with a one-dimensional defect range.
    fn sample_theta(deg: usize) -> FreeSeries {
        scalar(&[(vec![], 0.3), (vec![1], 0.4), (vec![2, 1], 0.2)], 2, deg)
    }

    /// A comfortably contractive two-letter parameter column on a
    /// one-dimensional space.
    fn sample_phi(deg: usize) -> Vec<FreeSeries> {
        vec![
            scalar(&[(vec![], 0.2), (vec![2], 0.3)], 2, deg),
            scalar(&[(vec![], -0.15), (vec![1], 0.1)], 2, deg),
        ]
    }

    /// Slice a stacked series into row blocks of the given heights.
    fn split_rows(f: &FreeSeries, heights: &[usize]) -> Vec<FreeSeries> {
        let mut out = Vec::new();
        let mut top = 0;
        for &h in heights {
            let mut part = FreeSeries::zero(f.n(), h, f.cols(), f.max_degree());
            for (w, a) in f.coeffs() {
                part.set_coeff(w.clone(), a.rows(top, h).into_owned()).unwrap();
            }
            out.push(part);
            top += h;
        }
        out
    }

    #[test]
    fn split_strips_the_leading_letter() {
        let a = CMat::from_element(1, 1, cr(0.7));
        let b = CMat::from_element(1, 1, cr(-0.2));
        let mut psi = FreeSeries::zero(2, 1, 1, 3);
        psi.set_coeff(Word::new(vec![1]), a.clone()).unwrap();
        psi.set_coeff(Word::new(vec![1, 2]), b.clone()).unwrap();
        let parts = left_letter_split(&psi).unwrap();
        assert_eq!(parts[0].coeff(&Word::empty()), a);
        assert_eq!(parts[0].coeff(&Word::new(vec![2])), b);
        assert!(parts[1].coeffs().values().all(|c| max_abs(c) == 0.0));

        let back = left_letter_merge(&parts, psi.max_degree()).unwrap();
        assert_eq!(coefficient_distance(&back, &psi, 3).unwrap(), 0.0);
    }

    #[test]
    fn split_and_merge_invert_each_other_on_random_series() {
        let mut rng = gen::seeded(42);
        let psi = gen::random_schur_series(&mut rng, 3, 2, 2, 3, false, 0.9);
        let back = left_letter_merge(&left_letter_split(&psi).unwrap(), 3).unwrap();
        assert_eq!(coefficient_distance(&back, &psi, 3).unwrap(), 0.0);

        let mut with_constant = psi;
        with_constant
            .set_coeff(Word::empty(), identity(2).scale(0.1))
            .unwrap();
        assert!(matches!(
            left_letter_split(&with_constant),
            Err(Error::ConstantTerm(_))
        ));
    }

    #[test]
    fn an_isometric_symbol_forces_the_plain_column() {
        let basis = enumerate_words(1, 5).unwrap();
        let theta = scalar(&[(vec![1], 1.0)], 1, 1);
        let phi = zero_parameter(&theta, &basis).unwrap();
        assert_eq!(phi[0].rows(), 0);
        let col = j_forward(&theta, &phi, &basis).unwrap();
        assert!(max_abs(&(col.l().coeff(&Word::new(vec![1])) - identity(1))) < 1e-12);
        for mi in col.m() {
            assert!(mi.coeffs().values().all(|c| max_abs(c) < 1e-12));
        }
        let back = reconstruct_theta(&col, &basis).unwrap();
        assert!(coefficient_distance(&back, &theta, 4).unwrap() < 1e-10);
        let recovered = j_inverse(&theta, &col, &basis).unwrap();
        assert_eq!(recovered[0].rows(), 0);
    }

    #[test]
    fn zero_series_columns_carry_the_parameter_verbatim() {
        let basis = enumerate_words(2, 4).unwrap();
        let theta = FreeSeries::zero(2, 1, 1, 0);
        let phi = sample_phi(2);
        let col = j_forward(&theta, &phi, &basis).unwrap();
        assert!(col.l().coeffs().values().all(|c| max_abs(c) < 1e-14));
        // with a zero numerator the denominators are the Cayley transform of
        // the dressed parameter alone: recovering the parameter splits them
        let recovered = j_inverse(&theta, &col, &basis).unwrap();
        for (p, q) in phi.iter().zip(&recovered) {
            assert!(coefficient_distance(p, q, 3).unwrap() < 1e-12);
        }
    }

    #[test]
    fn forward_columns_reconstruct_the_series() {
        let basis = enumerate_words(2, 4).unwrap();
        let theta = sample_theta(2);
        let col = j_forward(&theta, &sample_phi(2), &basis).unwrap();
        let back = reconstruct_theta(&col, &basis).unwrap();
        assert!(coefficient_distance(&back, &theta, 3).unwrap() < 1e-10);
    }

    #[test]
    fn parameters_round_trip_through_the_column() {
        let basis = enumerate_words(2, 4).unwrap();
        let theta = sample_theta(2);
        let phi = sample_phi(2);
        let col = j_forward(&theta, &phi, &basis).unwrap();
        let recovered = j_inverse(&theta, &col, &basis).unwrap();
        for (p, q) in phi.iter().zip(&recovered) {
            assert!(coefficient_distance(p, q, 3).unwrap() < 1e-10);
        }
        let again = j_forward(&theta, &recovered, &basis).unwrap();
        assert!(coefficient_distance(again.l(), col.l(), 3).unwrap() < 1e-8);
        for (a, b) in again.m().iter().zip(col.m()) {
            assert!(coefficient_distance(a, b, 3).unwrap() < 1e-8);
        }
    }

    #[test]
    fn oversized_parameters_are_rejected() {
        let basis = enumerate_words(2, 4).unwrap();
        let theta = sample_theta(2);
        let phi = vec![
            scalar(&[(vec![], 1.4)], 2, 1),
            scalar(&[(vec![], 0.0)], 2, 1),
        ];
        assert!(matches!(
            j_forward(&theta, &phi, &basis),
            Err(Error::InvalidArgument(_))
        ));
        let big = scalar(&[(vec![], 1.2), (vec![1], 0.4)], 2, 2);
        assert!(matches!(
            j_forward(&big, &sample_phi(1), &basis),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn constant_numerators_reconstruct_to_themselves() {
        let basis = enumerate_words(2, 3).unwrap();
        let mut rng = gen::seeded(5);
        let a = gen::random_unitary(&mut rng, 2) * cr(0.5);
        let l = FreeSeries::constant(2, a.clone(), 0);
        let m = vec![FreeSeries::zero(2, 2, 2, 0), FreeSeries::zero(2, 2, 2, 0)];
        let col = SchurColumn::new(l, m, &basis).unwrap();
        let theta = reconstruct_theta(&col, &basis).unwrap();
        assert!(max_abs(&(theta.coeff(&Word::empty()) - a)) < 1e-14);
        assert!(theta.coeffs().len() == 1);
    }

    #[test]
    fn the_geometric_column_sums_to_the_geometric_series() {
        let basis = enumerate_words(1, 5).unwrap();
        let half = (0.5f64).sqrt();
        let l = scalar(&[(vec![1], half)], 1, 1);
        let m = vec![scalar(&[(vec![], half)], 1, 0)];
        let col = SchurColumn::new(l, m, &basis).unwrap();
        let theta = reconstruct_theta(&col, &basis).unwrap();
        for k in 1..=5usize {
            let expect = 2f64.powf(-(k as f64) / 2.0);
            let got = theta.coeff(&Word::new(vec![1; k]))[(0, 0)];
            assert!((got - cr(expect)).norm() < 1e-12, "degree {k}");
        }
        assert!(theta.h2_norm() <= 1.0);
    }

    #[test]
    fn random_columns_stay_in_the_two_norm_ball() {
        let basis = enumerate_words(2, 3).unwrap();
        let mut rng = gen::seeded(2024);
        for trial in 0..50 {
            let stacked = gen::random_schur_series(&mut rng, 2, 2 + 2 * 2, 2, 2, true, 0.95);
            let parts = split_rows(&stacked, &[2, 2, 2]);
            let col = SchurColumn::new(parts[0].clone(), parts[1..].to_vec(), &basis)
                .unwrap_or_else(|e| panic!("trial {trial}: {e}"));
            let theta = reconstruct_theta(&col, &basis).unwrap();
            assert!(theta.h2_norm() <= 1.0 + 1e-6, "trial {trial}");
        }
    }

    #[test]
    fn random_parameters_give_valid_columns() {
        let basis = enumerate_words(2, 3).unwrap();
        let mut rng = gen::seeded(77);
        for trial in 0..50 {
            let theta = gen::rescale_h2(&gen::random_series(&mut rng, 2, 2, 2, 2, true), 0.9);
            let k = symbol(&theta, &basis)
                .unwrap()
                .defect_factor()
                .unwrap()
                .1
                .len();
            let stacked = gen::random_schur_series(&mut rng, 2, 2 * k, k, 2, true, 0.95);
            let phi = split_rows(&stacked, &[k, k]);
            let col = j_forward(&theta, &phi, &basis)
                .unwrap_or_else(|e| panic!("trial {trial}: {e}"));
            let back = reconstruct_theta(&col, &basis).unwrap();
            assert!(
                coefficient_distance(&back, &theta, 2).unwrap() < 1e-8,
                "trial {trial}"
            );
        }
    }

    #[test]
    fn the_column_identity_binds_the_majorant_to_the_denominators() {
        let basis = enumerate_words(2, 4).unwrap();
        let theta = sample_theta(2);
        let col = j_forward(&theta, &sample_phi(2), &basis).unwrap();
        let psi = left_letter_merge(col.m(), basis.m()).unwrap();
        let f = inverse_cayley(&psi).unwrap();
        let dim = col.l().cols() * basis.dim();
        for r in [0.4, 0.8, 1.0] {
            let fr = f.radial_eval(r, &basis, Side::Right).unwrap();
            let pr = psi.radial_eval(r, &basis, Side::Right).unwrap();
            let resolvent = (identity(dim) - &pr)
                .try_inverse()
                .expect("denominator evaluation is nilpotent");
            let rhs = resolvent.adjoint()
                * (identity(dim) - pr.adjoint() * &pr)
                * &resolvent;
            let residual = max_abs(&(hermitian_part(&fr) - rhs));
            assert!(residual < 1e-8, "r = {r}: residual {residual:.3e}");
        }
    }

    #[test]
    fn membership_flags_exactly_the_contractive_examples() {
        let basis = enumerate_words(2, 3).unwrap();
        let grid = [0.0, 0.5, 1.0];
        let mut rng = gen::seeded(9);
        let unitary = FreeSeries::constant(2, gen::random_unitary(&mut rng, 2), 0);
        let report = schur_membership(&unitary, &basis, &grid).unwrap();
        assert!(report.pass());
        assert!(report
            .checks
            .iter()
            .all(|c| (c.residual - 1.0).abs() < 1e-12));

        let too_big = scalar(&[(vec![1], 2.0)], 2, 1);
        let report = schur_membership(&too_big, &basis, &grid).unwrap();
        assert!(!report.pass());
        assert!(report.checks.last().unwrap().residual > 1.9);

        let row = scalar(&[(vec![1], 1.0 / 2f64.sqrt()), (vec![2], 1.0 / 2f64.sqrt())], 2, 1);
        let report = schur_membership(&row, &basis, &grid).unwrap();
        assert!(report.pass());
        let worst = report
            .checks
            .iter()
            .map(|c| c.residual)
            .fold(0.0f64, f64::max);
        assert!((worst - 1.0).abs() < 1e-12);
    }

    #[test]
    fn columns_round_trip_through_json() {
        let basis = enumerate_words(2, 4).unwrap();
        let col = j_forward(&sample_theta(2), &sample_phi(2), &basis).unwrap();
        let text = serde_json::to_string(&col).unwrap();
        let back: SchurColumn = serde_json::from_str(&text).unwrap();
        back.validate(&basis).unwrap();
        assert_eq!(coefficient_distance(back.l(), col.l(), 4).unwrap(), 0.0);
        for (a, b) in back.m().iter().zip(col.m()) {
            assert_eq!(coefficient_distance(a, b, 4).unwrap(), 0.0);
        }
        assert_eq!(text, serde_json::to_string(&back).unwrap());
    }

    #[test]
    fn inconsistent_columns_are_rejected() {
        let basis = enumerate_words(2, 4).unwrap();
        let theta = sample_theta(2);
        let col = j_forward(&theta, &sample_phi(2), &basis).unwrap();
        let other = scalar(&[(vec![], 0.1), (vec![2], 0.5)], 2, 2);
        assert!(matches!(
            j_inverse(&other, &col, &basis),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn reconstruction_matches_the_resolvent_form() {
        // the reconstruction is literally L (I - sum)^{-1}: compare against
        // an independent evaluation of numerator times resolvent
        let basis = enumerate_words(2, 4).unwrap();
        let theta = sample_theta(2);
        let col = j_forward(&theta, &sample_phi(2), &basis).unwrap();
        let back = reconstruct_theta(&col, &basis).unwrap();
        let psi = left_letter_merge(col.m(), basis.m()).unwrap();
        for r in [0.5, 1.0] {
            let lhs = back.radial_eval(r, &basis, Side::Right).unwrap();
            let num = col.l().radial_eval(r, &basis, Side::Right).unwrap();
            let den = psi.radial_eval(r, &basis, Side::Right).unwrap();
            let inv = (identity(den.nrows()) - den).try_inverse().unwrap();
            assert!(max_abs(&(lhs - num * inv)) < 1e-10, "r = {r}");
        }
    }
}
