//! Constrained commutant lifting on the truncated word space.
//!
//! A problem instance packs four finite families: a contraction `A` from a
//! constraint space X into H, a row contraction `T = (T_1, ..., T_n)` on H,
//! and column families `C_i, Q_i : G_i -> X` subject to the block inequality
//! `[δ_ij C_i*C_j] ⪯ [Q_i*Q_j]` and the intertwining relations
//! `T_i A C_i = A Q_i`. Sought are all contractions `B : X -> K` into the
//! minimal isometric dilation space `K ⊇ H` of the tuple that compress back
//! to the data (`P_H B = A`) and intertwine the dilated tuple
//! (`V_i B C_i = B Q_i`).
//!
//! The solver runs the linear-fractional route end to end. The data fold
//! into a single contraction Ω living on the subspace F of the defect range
//! of `A` spanned by the vectors `D_A Q_i y`; a free Schur-class parameter
//! from the complement `G = D_A ⊖ F` into the defect of Ω* extends Ω to a
//! full Schur column `[L; M_1; ...; M_n]`; the column reconstructs a series
//! `Θ = L (I - Σ X_i M_i)^{-1}` whose symbol Γ fills the lower block of the
//! interpolant `B = [A; Γ D_A]`. Distinct parameters give distinct
//! interpolants, the zero parameter gives the central one, and
//! [`verify_interpolant`] replays every defining constraint on the result.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::fock::{creation_matrices, FockBasis, Side, Word};
use crate::linalg::{
    all_finite, block_diag, cr, hermitian_defect, hermitian_part, hstack, identity, kron, max_abs,
    min_eig_hermitian, op_norm, pinv, vstack, zeros, CMat, MatrixJson, RANK_REL_TOL,
};
use crate::majorant::{conjugated, symbol, Symbol};
use crate::report::{Check, Report};
use crate::schur::{reconstruct_theta, SchurColumn};
use crate::series::{FreeSeries, OperatorTuple};
use crate::{Error, Result, TOL_EIG, TOL_RES};

/// Residual allowance on the hypotheses of the data itself (block
/// inequality, intertwining relations, factorization preconditions).
const DATA_TOL: f64 = 1e-10;

/// One lifting problem: `A : X -> H` contractive, a row contraction `T` on
/// H, and constraint/target column families `C_i, Q_i : G_i -> X`.
///
/// Construction checks shapes and finiteness only; [`validate_data`]
/// measures the analytic hypotheses and reports their residuals.
#[derive(Debug, Clone)]
pub struct LiftingData {
    a: CMat,
    t: OperatorTuple,
    c: Vec<CMat>,
    q: Vec<CMat>,
}

impl LiftingData {
    pub fn new(a: CMat, t: OperatorTuple, c: Vec<CMat>, q: Vec<CMat>) -> Result<Self> {
        let n = t.n();
        if c.len() != n || q.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} constraint and {} target columns for {} letters",
                c.len(),
                q.len(),
                n
            )));
        }
        if a.nrows() != t.dim() {
            return Err(Error::ShapeMismatch(format!(
                "A has {} rows, the tuple acts on dimension {}",
                a.nrows(),
                t.dim()
            )));
        }
        let x = a.ncols();
        for i in 0..n {
            if c[i].nrows() != x || q[i].nrows() != x || c[i].ncols() != q[i].ncols() {
                return Err(Error::ShapeMismatch(format!(
                    "column pair {} must map a common space into the {x}-dimensional constraint space",
                    i + 1
                )));
            }
        }
        if !std::iter::once(&a).chain(&c).chain(&q).all(all_finite) {
            return Err(Error::Numerical("non-finite entry in lifting data".into()));
        }
        Ok(LiftingData { a, t, c, q })
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }

    pub fn t(&self) -> &OperatorTuple {
        &self.t
    }

    pub fn c(&self) -> &[CMat] {
        &self.c
    }

    pub fn q(&self) -> &[CMat] {
        &self.q
    }

    pub fn n(&self) -> usize {
        self.t.n()
    }

    pub fn dim_h(&self) -> usize {
        self.t.dim()
    }

    pub fn dim_x(&self) -> usize {
        self.a.ncols()
    }
}

#[derive(Serialize, Deserialize)]
struct LiftingDataJson {
    #[serde(rename = "A")]
    a: MatrixJson,
    #[serde(rename = "T")]
    t: Vec<MatrixJson>,
    #[serde(rename = "C")]
    c: Vec<MatrixJson>,
    #[serde(rename = "Q")]
    q: Vec<MatrixJson>,
}

impl Serialize for LiftingData {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        LiftingDataJson {
            a: MatrixJson::from_matrix(&self.a),
            t: self.t.entries().iter().map(MatrixJson::from_matrix).collect(),
            c: self.c.iter().map(MatrixJson::from_matrix).collect(),
            q: self.q.iter().map(MatrixJson::from_matrix).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for LiftingData {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = LiftingDataJson::deserialize(de)?;
        fn mats<E: serde::de::Error>(v: &[MatrixJson]) -> std::result::Result<Vec<CMat>, E> {
            v.iter().map(|m| m.to_matrix().map_err(E::custom)).collect()
        }
        let t = OperatorTuple::new(mats(&raw.t)?).map_err(D::Error::custom)?;
        LiftingData::new(raw.a.to_matrix().map_err(D::Error::custom)?, t, mats(&raw.c)?, mats(&raw.q)?)
            .map_err(D::Error::custom)
    }
}

/// Measure the analytic hypotheses of the data: `T` a row contraction, `A`
/// a contraction, the block inequality between targets and constraints, and
/// the intertwining relations. Shape problems are caught when the data is
/// constructed; this reports residuals of the genuinely numerical
/// conditions.
pub fn validate_data(data: &LiftingData) -> Report {
    let mut report = Report::new("lifting-data");
    report.push(Check::residual("row-contraction", data.t.row_norm(), 1.0 + TOL_EIG));
    report.push(Check::residual("data-contraction", op_norm(&data.a), 1.0 + TOL_EIG));
    let widths: Vec<usize> = data.c.iter().map(|c| c.ncols()).collect();
    let offsets: Vec<usize> = widths
        .iter()
        .scan(0, |acc, w| {
            let here = *acc;
            *acc += w;
            Some(here)
        })
        .collect();
    let total: usize = widths.iter().sum();
    let mut gap = zeros(total, total);
    for i in 0..data.n() {
        for j in 0..data.n() {
            let mut blk = data.q[i].adjoint() * &data.q[j];
            if i == j {
                blk -= data.c[i].adjoint() * &data.c[i];
            }
            gap.view_mut((offsets[i], offsets[j]), (widths[i], widths[j])).copy_from(&blk);
        }
    }
    report.push(Check::eigen_floor("block-inequality", min_eig_hermitian(&gap), DATA_TOL));
    let worst = (0..data.n())
        .map(|i| op_norm(&(data.t.entry(i) * &data.a * &data.c[i] - &data.a * &data.q[i])))
        .fold(0.0, f64::max);
    report.push(Check::residual("intertwining", worst, DATA_TOL));
    report
}

fn require_valid(data: &LiftingData) -> Result<()> {
    let report = validate_data(data);
    if let Some(bad) = report.checks.iter().find(|c| !c.pass) {
        return Err(Error::Inconsistent(format!(
            "lifting data fails the {} check (residual {:.3e})",
            bad.name, bad.residual
        )));
    }
    Ok(())
}

/// Square root of a Hermitian PSD matrix with rank decisions made against
/// `max(λ_max, 1)`: eigenvalues within `RANK_REL_TOL` of that scale count
/// as exact zeros and the root is rebuilt from the surviving eigenpairs.
/// Nearly isometric data thus collapses to a genuinely trivial defect
/// instead of leaving square-rooted rounding noise behind. Returns the
/// cleaned root and an orthonormal basis of its range.
fn clean_sqrt_and_range(p: &CMat) -> (CMat, CMat) {
    if p.nrows() == 0 {
        return (p.clone(), zeros(0, 0));
    }
    let eig = hermitian_part(p).symmetric_eigen();
    let lam_max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > RANK_REL_TOL * lam_max.max(1.0))
        .collect();
    let mut u = zeros(p.nrows(), keep.len());
    let mut s = zeros(keep.len(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        u.column_mut(j).copy_from(&eig.eigenvectors.column(i));
        s[(j, j)] = cr(eig.eigenvalues[i].sqrt());
    }
    (&u * s * u.adjoint(), u)
}

/// Orthonormal range basis with the singular-value cutoff taken against
/// `max(σ_max, 1)`: directions are kept only when they are genuinely
/// present at the scale of contractive data.
fn scaled_range_basis(m: &CMat) -> CMat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("svd with u requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > RANK_REL_TOL * smax.max(1.0))
        .collect();
    let mut out = zeros(m.nrows(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &u.column(i));
    }
    out
}

/// Orthonormal basis of the range of a numerical orthogonal projection:
/// eigenvectors with eigenvalue above one half.
fn projector_range(p: &CMat) -> CMat {
    if p.nrows() == 0 {
        return zeros(0, 0);
    }
    let eig = hermitian_part(p).symmetric_eigen();
    let keep: Vec<usize> =
        (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let mut out = zeros(p.nrows(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.column_mut(j).copy_from(&eig.eigenvectors.column(i));
    }
    out
}

/// The defect of a row contraction: the positive square root of the block
/// matrix `[δ_ij I - T_i* T_j]` on `H^(n)`, with an orthonormal basis of
/// its range. A row isometry has an empty range.
fn tuple_defect(t: &OperatorTuple) -> Result<(CMat, CMat)> {
    if t.row_norm() > 1.0 + TOL_EIG {
        return Err(Error::InvalidArgument(
            "the tuple is not a row contraction; no isometric dilation exists".into(),
        ));
    }
    let (n, h) = (t.n(), t.dim());
    let mut d2 = zeros(n * h, n * h);
    for i in 0..n {
        for j in 0..n {
            let mut blk = -(t.entry(i).adjoint() * t.entry(j));
            if i == j {
                blk += identity(h);
            }
            d2.view_mut((i * h, j * h), (h, h)).copy_from(&blk);
        }
    }
    Ok(clean_sqrt_and_range(&d2))
}

/// The minimal isometric dilation of a row contraction, realized on the
/// truncated space `K = H ⊕ (D ⊗ word span)` where D is the defect range
/// of the tuple. Each `V_i` acts as `T_i` on H, writes the i-th defect
/// coordinate of a vector into the vacuum slot, and shifts the word factor
/// by the letter i. On vectors supported below the top word length the
/// `V_i` are genuinely jointly isometric; [`DilationSpace::safe_projection`]
/// cuts to that block.
#[derive(Debug, Clone)]
pub struct DilationSpace {
    v: OperatorTuple,
    delta: Vec<CMat>,
    defect_root: CMat,
    d_basis: CMat,
    dim_h: usize,
    basis: FockBasis,
}

pub fn minimal_isometric_dilation(t: &OperatorTuple, basis: &FockBasis) -> Result<DilationSpace> {
    if t.n() != basis.n() {
        return Err(Error::ShapeMismatch(format!(
            "tuple over {} letters, basis over {}",
            t.n(),
            basis.n()
        )));
    }
    let (defect_root, d_basis) = tuple_defect(t)?;
    let (n, h, fd) = (t.n(), t.dim(), basis.dim());
    let dim_d = d_basis.ncols();
    let k = h + dim_d * fd;
    // rows of the defect root in range coordinates, sliced per letter
    let coords = d_basis.adjoint() * &defect_root;
    let vac = basis.index_of(&Word::empty()).expect("vacuum in basis");
    let mut e_vac = zeros(fd, 1);
    e_vac[(vac, 0)] = cr(1.0);
    let shifts = creation_matrices(basis, Side::Left);
    let mut vs = Vec::with_capacity(n);
    let mut delta = Vec::with_capacity(n);
    for i in 0..n {
        let slice = coords.columns(i * h, h).into_owned();
        let delta_i = kron(&slice, &e_vac);
        let mut v = zeros(k, k);
        v.view_mut((0, 0), (h, h)).copy_from(t.entry(i));
        v.view_mut((h, 0), (dim_d * fd, h)).copy_from(&delta_i);
        if dim_d > 0 {
            v.view_mut((h, h), (dim_d * fd, dim_d * fd))
                .copy_from(&kron(&identity(dim_d), &shifts[i]));
        }
        vs.push(v);
        delta.push(delta_i);
    }
    Ok(DilationSpace {
        v: OperatorTuple::new(vs)?,
        delta,
        defect_root,
        d_basis,
        dim_h: h,
        basis: basis.clone(),
    })
}

impl DilationSpace {
    /// The dilated tuple on K.
    pub fn v(&self) -> &OperatorTuple {
        &self.v
    }

    /// The injection blocks `Δ_i : H -> D ⊗ word span`.
    pub fn delta(&self) -> &[CMat] {
        &self.delta
    }

    /// The defect root of the tuple on `H^(n)`.
    pub fn defect_root(&self) -> &CMat {
        &self.defect_root
    }

    /// Orthonormal basis of the defect range inside `H^(n)`.
    pub fn d_basis(&self) -> &CMat {
        &self.d_basis
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn defect_rank(&self) -> usize {
        self.d_basis.ncols()
    }

    pub fn k_dim(&self) -> usize {
        self.dim_h + self.defect_rank() * self.basis.dim()
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    /// Projection of K onto `H ⊕ (D ⊗ words shorter than the bound)` — the
    /// block on which the truncated shifts are still isometric, so the
    /// dilation relations hold there exactly.
    pub fn safe_projection(&self) -> CMat {
        let fd = self.basis.dim();
        let keep = self.basis.dim_at_degree(self.basis.m().saturating_sub(1));
        let h = self.dim_h;
        CMat::from_fn(self.k_dim(), self.k_dim(), |i, j| {
            if i != j {
                cr(0.0)
            } else if i < h || (i - h) % fd < keep {
                cr(1.0)
            } else {
                cr(0.0)
            }
        })
    }
}

/// The contraction the data induce on the generator subspace
/// `F = span{D_A Q_i y} ⊆ range(D_A)`: its first block maps a generator to
/// the tuple-defect coordinates of the lifted vectors `⊕ A C_i y_i`, its
/// second to the stacked constraint defects `⊕ D_A C_i y_i`. Solutions of
/// the lifting problem are exactly the Schur columns restricting to this
/// contraction on F, so the pair carries everything the solver needs: the
/// subspace bases, the two blocks, and whether the map is an isometry
/// (equality in the block inequality of the data).
#[derive(Debug, Clone)]
pub struct OmegaPair {
    u_da: CMat,
    d_a: CMat,
    u_f: CMat,
    u_g: CMat,
    omega1: CMat,
    omega2: CMat,
    // per-letter ingredients of the defining equations, kept so candidate
    // symbols can be checked against the problem later: the generators
    // D_A Q_i and constraints D_A C_i in defect coordinates, and the
    // vacuum blocks Delta(A C_i) in tuple-defect coordinates
    gen_slots: Vec<CMat>,
    con_slots: Vec<CMat>,
    vac_slots: Vec<CMat>,
    dim_d: usize,
    n: usize,
    isometric: bool,
}

impl OmegaPair {
    /// Orthonormal basis of the defect range of `A` in constraint-space
    /// coordinates.
    pub fn u_da(&self) -> &CMat {
        &self.u_da
    }

    /// Cleaned defect root of `A` on the constraint space.
    pub fn a_defect_root(&self) -> &CMat {
        &self.d_a
    }

    /// Orthonormal basis of the generator subspace F.
    pub fn u_f(&self) -> &CMat {
        &self.u_f
    }

    /// Orthonormal basis of the parameter domain `G = range(D_A) ⊖ F`.
    pub fn u_g(&self) -> &CMat {
        &self.u_g
    }

    /// First block, into the defect range of the tuple.
    pub fn omega1(&self) -> &CMat {
        &self.omega1
    }

    /// Second block, into the stacked defect ranges of `A`.
    pub fn omega2(&self) -> &CMat {
        &self.omega2
    }

    /// Both blocks stacked.
    pub fn omega(&self) -> CMat {
        vstack(&[&self.omega1, &self.omega2])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Rank of the tuple defect (the D factor of the dilation space).
    pub fn dim_d(&self) -> usize {
        self.dim_d
    }

    pub fn da_rank(&self) -> usize {
        self.u_da.ncols()
    }

    pub fn f_rank(&self) -> usize {
        self.u_f.ncols()
    }

    pub fn complement_rank(&self) -> usize {
        self.u_g.ncols()
    }

    /// F expressed in defect-range coordinates (orthonormal columns).
    pub fn f_in_da(&self) -> CMat {
        self.u_da.adjoint() * &self.u_f
    }

    /// G expressed in defect-range coordinates (orthonormal columns).
    pub fn g_in_da(&self) -> CMat {
        self.u_da.adjoint() * &self.u_g
    }

    /// Whether the contraction is an isometry — exactly when the data meet
    /// the block inequality with equality.
    pub fn is_isometric(&self) -> bool {
        self.isometric
    }

    /// Cleaned defect root of the adjoint of the full contraction, with an
    /// orthonormal basis of its range: the codomain of free parameters.
    pub fn adjoint_defect(&self) -> (CMat, CMat) {
        let full = self.omega();
        let gap = identity(full.nrows()) - &full * full.adjoint();
        clean_sqrt_and_range(&gap)
    }
}

/// Fold validated data into the contraction on its generator subspace.
///
/// The two defining equations are solved in least squares over the
/// generators `D_A Q_i y`; the data hypotheses make the system consistent
/// and the solution contractive, so a residual beyond tolerance or an
/// operator norm above one is reported as inconsistent data rather than
/// patched over.
pub fn build_omega(data: &LiftingData) -> Result<OmegaPair> {
    require_valid(data)?;
    let (delta_t, u_d) = tuple_defect(&data.t)?;
    let n = data.n();
    let (h, x) = (data.dim_h(), data.dim_x());
    let dim_d = u_d.ncols();
    let (d_a, u_da) = clean_sqrt_and_range(&(identity(x) - data.a.adjoint() * &data.a));
    let dim_da = u_da.ncols();

    let mapped: Vec<CMat> = data.q.iter().map(|qi| &d_a * qi).collect();
    let refs: Vec<&CMat> = mapped.iter().collect();
    let generators = hstack(&refs);
    let u_f = scaled_range_basis(&generators);
    let u_g = projector_range(&(&u_da * u_da.adjoint() - &u_f * u_f.adjoint()));

    let widths: Vec<usize> = data.c.iter().map(|c| c.ncols()).collect();
    let total: usize = widths.iter().sum();
    let mut lifted = zeros(n * h, total);
    let mut constrained = zeros(n * dim_da, total);
    let mut gen_slots = Vec::with_capacity(n);
    let mut con_slots = Vec::with_capacity(n);
    let mut vac_slots = Vec::with_capacity(n);
    let mut off = 0;
    for i in 0..n {
        let ac = &data.a * &data.c[i];
        lifted.view_mut((i * h, off), (h, widths[i])).copy_from(&ac);
        let dc = u_da.adjoint() * &d_a * &data.c[i];
        constrained.view_mut((i * dim_da, off), (dim_da, widths[i])).copy_from(&dc);
        gen_slots.push(u_da.adjoint() * &mapped[i]);
        con_slots.push(dc);
        vac_slots.push(u_d.adjoint() * delta_t.columns(i * h, h) * ac);
        off += widths[i];
    }
    let target = vstack(&[&(u_d.adjoint() * &delta_t * &lifted), &constrained]);
    let gen = u_f.adjoint() * &generators;
    let omega_full = &target * pinv(&gen, RANK_REL_TOL);
    let resid = op_norm(&(&omega_full * &gen - &target));
    if resid > TOL_RES * op_norm(&target).max(1.0) {
        return Err(Error::Inconsistent(format!(
            "the data do not define a single-valued map on the generator subspace (residual {resid:.3e})"
        )));
    }
    let norm = op_norm(&omega_full);
    if norm > 1.0 + TOL_EIG {
        return Err(Error::Numerical(format!(
            "the induced map has norm {norm:.12}, above one at working precision"
        )));
    }
    let dim_f = u_f.ncols();
    let iso_gap = max_abs(&(omega_full.adjoint() * &omega_full - identity(dim_f)));
    Ok(OmegaPair {
        omega1: omega_full.rows(0, dim_d).into_owned(),
        omega2: omega_full.rows(dim_d, n * dim_da).into_owned(),
        u_da,
        d_a,
        u_f,
        u_g,
        gen_slots,
        con_slots,
        vac_slots,
        dim_d,
        n,
        isometric: iso_gap <= TOL_RES,
    })
}

/// The compression a solution symbol induces between `F_Γ = closure(D_Γ F)`
/// and the stacked defect of the symbol: the operator Λ with
/// `Λ D_Γ x = (⊕ D_Γ) Ω_2 x` for x in F. It exists exactly when the symbol
/// solves the lifting problem the pair came from, is then a contraction,
/// and matches the data contraction in being an isometry, up to
/// coefficients pushed past the truncation degree.
#[derive(Debug, Clone)]
pub struct LambdaMap {
    matrix: CMat,
    f_basis: CMat,
    isometric: bool,
}

impl LambdaMap {
    /// The map from `F_Γ` coordinates into the stacked ambient defect
    /// coordinates of the symbol.
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Orthonormal basis of `F_Γ` in the symbol's defect coordinates.
    pub fn f_basis(&self) -> &CMat {
        &self.f_basis
    }

    pub fn rank(&self) -> usize {
        self.f_basis.ncols()
    }

    pub fn is_isometric(&self) -> bool {
        self.isometric
    }
}

/// Build the compression map of a candidate symbol against a folded
/// problem. The symbol is first checked against the defining equations of
/// the problem — it must be a contraction sending each generator block
/// `D_A Q_i` to the matching vacuum block plus its own letter-`i` shift on
/// the constraint block `D_A C_i`; a residual there means the symbol solves
/// nothing and the map does not exist. For genuine solutions the returned
/// map is a well-defined contraction on `F_Γ`.
pub fn build_lambda(sym: &Symbol, pair: &OmegaPair) -> Result<LambdaMap> {
    if sym.dim_e() != pair.da_rank() || sym.dim_y() != pair.dim_d() {
        return Err(Error::ShapeMismatch(format!(
            "symbol maps {} defect coordinates into {}; the problem wants {} into {}",
            sym.dim_e(),
            sym.dim_y(),
            pair.da_rank(),
            pair.dim_d()
        )));
    }
    if sym.basis().n() != pair.n() {
        return Err(Error::ShapeMismatch(format!(
            "symbol over {} letters, problem over {}",
            sym.basis().n(),
            pair.n()
        )));
    }
    let fd = sym.basis().dim();
    let vac = sym.basis().index_of(&Word::empty()).expect("vacuum in basis");
    let mut e_vac = zeros(fd, 1);
    e_vac[(vac, 0)] = cr(1.0);
    let shifts = creation_matrices(sym.basis(), Side::Left);
    let gamma = sym.matrix();
    let mut worst = 0.0f64;
    for i in 0..pair.n() {
        let shifted = kron(&identity(pair.dim_d()), &shifts[i]) * (gamma * &pair.con_slots[i]);
        let gap = shifted + kron(&pair.vac_slots[i], &e_vac) - gamma * &pair.gen_slots[i];
        worst = worst.max(op_norm(&gap));
    }
    if worst > TOL_RES {
        return Err(Error::Inconsistent(format!(
            "the symbol does not solve the lifting problem (intertwining residual {worst:.3e})"
        )));
    }
    let (u_def, svals) = sym.defect_factor()?;
    let mut scaled = u_def.clone();
    for (j, s) in svals.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*s);
    }
    let d_g = &scaled * u_def.adjoint();
    let f_in = pair.f_in_da();
    let lhs = &d_g * &f_in;
    let f_basis = scaled_range_basis(&lhs);
    let copies: Vec<&CMat> = std::iter::repeat(&d_g).take(pair.n()).collect();
    let target = block_diag(&copies) * pair.omega2();
    let gen = f_basis.adjoint() * &lhs;
    let lambda = &target * pinv(&gen, RANK_REL_TOL);
    let resid = op_norm(&(&lambda * &gen - &target));
    if resid > TOL_RES * op_norm(&target).max(1.0) {
        return Err(Error::Inconsistent(format!(
            "the symbol does not solve the lifting problem: its defect blocks are not single-valued on the generator subspace (residual {resid:.3e})"
        )));
    }
    let norm = op_norm(&lambda);
    if norm > 1.0 + TOL_EIG {
        return Err(Error::Inconsistent(format!(
            "the symbol does not solve the lifting problem: the induced block map has norm {norm:.12}"
        )));
    }
    let gap = max_abs(&(lambda.adjoint() * &lambda - identity(f_basis.ncols())));
    Ok(LambdaMap { matrix: lambda, f_basis, isometric: gap <= TOL_RES })
}

/// The zero parameter of the right shape for [`constrained_schur`]; feeding
/// it to the solver yields the central solution.
pub fn zero_lift_parameter(pair: &OmegaPair, basis: &FockBasis) -> FreeSeries {
    let (_, u_os) = pair.adjoint_defect();
    FreeSeries::zero(pair.n(), u_os.ncols(), pair.complement_rank(), basis.m())
}

/// Extend the data contraction to a full Schur column through a free
/// parameter: the column `Ψ = (Ω P_F ⊗ I) + (D_{Ω*} ⊗ I) Ψ₁ (P_G ⊗ I)`
/// restricts to Ω on the generator subspace — its constant coefficient acts
/// there as Ω and all higher coefficients vanish there — and lies in the
/// unit ball whenever the parameter does. The parameter is a series with
/// coefficients from G-coordinates into the range of the adjoint defect
/// (shape [`OmegaPair::adjoint_defect`] rank × [`OmegaPair::complement_rank`]);
/// words beyond the truncation depth are ignored.
pub fn constrained_schur(
    pair: &OmegaPair,
    param: &FreeSeries,
    basis: &FockBasis,
) -> Result<SchurColumn> {
    let n = pair.n();
    if basis.n() != n || param.n() != n {
        return Err(Error::ShapeMismatch(format!(
            "data over {} letters, parameter over {}, basis over {}",
            n,
            param.n(),
            basis.n()
        )));
    }
    let dim_da = pair.da_rank();
    let omega_full = pair.omega();
    let (dos, u_os) = pair.adjoint_defect();
    if param.rows() != u_os.ncols() || param.cols() != pair.complement_rank() {
        return Err(Error::ShapeMismatch(format!(
            "parameter is {}x{}; this problem wants {}x{} (adjoint-defect rank x complement rank)",
            param.rows(),
            param.cols(),
            u_os.ncols(),
            pair.complement_rank()
        )));
    }
    if param.hinf_norm(basis)? > 1.0 + TOL_EIG {
        return Err(Error::InvalidArgument("the parameter leaves the unit ball".into()));
    }
    let constant = &omega_full * pair.f_in_da().adjoint();
    let embedded = conjugated(
        &param.with_max_degree(basis.m()),
        &(&dos * &u_os),
        &pair.g_in_da().adjoint(),
    )?;
    let column = embedded.add(&FreeSeries::constant(n, constant, basis.m()), cr(1.0), cr(1.0))?;
    let mut heights = vec![pair.dim_d()];
    heights.extend(std::iter::repeat(dim_da).take(n));
    let mut blocks = column.row_blocks(&heights)?;
    let l = blocks.remove(0);
    SchurColumn::new(l, blocks, basis)
}

/// A solution of a lifting problem: the interpolant `B` on the dilation
/// space, the series whose symbol fills its lower block, and that symbol.
#[derive(Debug, Clone)]
pub struct LiftingSolution {
    pub b: CMat,
    pub theta: FreeSeries,
    pub gamma: Symbol,
}

/// Solve the lifting problem for one free parameter: fold the data into
/// their contraction, extend it to a Schur column through the parameter,
/// reconstruct the series `Θ = L (I - Σ X_i M_i)^{-1}`, and assemble
/// `B = [A; Γ D_A]`. Every contractive interpolant arises from a parameter
/// in the ball, and distinct parameters give distinct interpolants.
pub fn solve_gncl(
    data: &LiftingData,
    param: &FreeSeries,
    basis: &FockBasis,
) -> Result<LiftingSolution> {
    let pair = build_omega(data)?;
    solve_with_omega(data, &pair, param, basis)
}

/// As [`solve_gncl`] with the data contraction precomputed, so sweeps over
/// many parameters share the folding work.
pub fn solve_with_omega(
    data: &LiftingData,
    pair: &OmegaPair,
    param: &FreeSeries,
    basis: &FockBasis,
) -> Result<LiftingSolution> {
    let col = constrained_schur(pair, param, basis)?;
    let theta = reconstruct_theta(&col, basis)?;
    let gamma = symbol(&theta, basis)?;
    let to_defect = pair.u_da().adjoint() * pair.a_defect_root();
    let lower = gamma.matrix() * &to_defect;
    let b = vstack(&[&data.a, &lower]);
    Ok(LiftingSolution { b, theta, gamma })
}

/// Replay the defining constraints on an explicit candidate interpolant:
/// contractivity, compression back to the data, and the intertwining
/// relations against the dilated tuple — the latter on the block where the
/// truncated shift is still isometric, one word length below the bound.
pub fn verify_interpolant(data: &LiftingData, b: &CMat, dil: &DilationSpace) -> Result<Report> {
    if dil.dim_h() != data.dim_h() || dil.v().n() != data.n() {
        return Err(Error::ShapeMismatch("dilation built for a different tuple".into()));
    }
    if b.nrows() != dil.k_dim() || b.ncols() != data.dim_x() {
        return Err(Error::ShapeMismatch(format!(
            "interpolant is {}x{}, the dilation space wants {}x{}",
            b.nrows(),
            b.ncols(),
            dil.k_dim(),
            data.dim_x()
        )));
    }
    let mut report = Report::new("interpolant-verification");
    report.push(Check::residual("contraction", op_norm(b), 1.0 + TOL_EIG));
    let top = b.rows(0, data.dim_h()).into_owned();
    report.push(Check::residual("compression-to-data", max_abs(&(top - &data.a)), TOL_RES));
    let p = dil.safe_projection();
    for i in 0..data.n() {
        let gap = dil.v().entry(i) * b * &data.c[i] - b * &data.q[i];
        report.push(Check::residual(
            format!("intertwining-{}", i + 1),
            op_norm(&(&p * gap)),
            TOL_RES,
        ));
    }
    Ok(report)
}

/// The rank criterion for uniqueness: the solution is unique exactly when
/// the generator subspace already fills the defect range of `A` (no free
/// domain is left), or the data contraction maps it onto all of
/// `D ⊕ D_A^(n)` (no free codomain is left).
pub fn uniqueness_by_ranks(pair: &OmegaPair) -> bool {
    if pair.f_rank() == pair.da_rank() {
        return true;
    }
    let full = pair.omega();
    scaled_range_basis(&full).ncols() == full.nrows()
}

/// Uniqueness of the lift for data in commutant-lifting form: every `C_i`
/// the identity on the constraint space and `(Q_1, ..., Q_n)` a row
/// isometry. Data outside that form is rejected; for it, use
/// [`uniqueness_by_ranks`] on the folded contraction directly.
pub fn nclt_uniqueness(data: &LiftingData) -> Result<bool> {
    let x = data.dim_x();
    for c in &data.c {
        if c.ncols() != x || max_abs(&(c - identity(x))) > 1e-12 {
            return Err(Error::InvalidArgument(
                "data is not in commutant-lifting form: every constraint column must be the identity"
                    .into(),
            ));
        }
    }
    for i in 0..data.n() {
        for j in 0..data.n() {
            let mut gram = data.q[i].adjoint() * &data.q[j];
            if i == j {
                gram -= identity(x);
            }
            if max_abs(&gram) > TOL_EIG {
                return Err(Error::InvalidArgument(
                    "data is not in commutant-lifting form: the targets must form a row isometry"
                        .into(),
                ));
            }
        }
    }
    Ok(uniqueness_by_ranks(&build_omega(data)?))
}

/// A weighted problem reduced to standard lifting data, together with the
/// factor that carries solutions back: if `B̃` solves `data` then
/// `B = B̃ · factor` satisfies `P_H B = A`, `V_i B = B Y_i`, and
/// `B* B ⪯ P`.
#[derive(Debug, Clone)]
pub struct WeightedReduction {
    pub data: LiftingData,
    pub factor: CMat,
}

/// Reduce a weighted interpolation problem to standard lifting data. Given
/// a row contraction `T` on H, a map `A : X -> H`, a PSD weight `P` on X
/// with `A*A ⪯ P` and `[Y_i* P Y_j] ⪰ [δ_ij P]`, and intertwinings
/// `T_i A = A Y_i`, the reduced data live on the range of the weight root:
/// the data map is the contractive factor of `A` through `P^(1/2)`, the
/// constraint columns are `P^(1/2)` itself and the targets `P^(1/2) Y_i`.
pub fn weighted_reduce(
    t: &OperatorTuple,
    a: &CMat,
    p: &CMat,
    y: &OperatorTuple,
) -> Result<WeightedReduction> {
    let n = t.n();
    let (h, x) = (t.dim(), y.dim());
    if y.n() != n {
        return Err(Error::ShapeMismatch(format!(
            "tuples over {} and {} letters",
            n,
            y.n()
        )));
    }
    if a.nrows() != h || a.ncols() != x {
        return Err(Error::ShapeMismatch(format!(
            "A is {}x{}, the tuples want {h}x{x}",
            a.nrows(),
            a.ncols()
        )));
    }
    if p.nrows() != x || p.ncols() != x {
        return Err(Error::ShapeMismatch(format!(
            "weight is {}x{}, the domain has dimension {x}",
            p.nrows(),
            p.ncols()
        )));
    }
    if hermitian_defect(p) > TOL_EIG {
        return Err(Error::InvalidArgument("the weight is not Hermitian".into()));
    }
    if min_eig_hermitian(p) < -TOL_EIG {
        return Err(Error::InvalidArgument("the weight is not positive semidefinite".into()));
    }
    if min_eig_hermitian(&(p - a.adjoint() * a)) < -DATA_TOL {
        return Err(Error::Inconsistent("the data violate A*A ⪯ P".into()));
    }
    let mut expansion = zeros(n * x, n * x);
    for i in 0..n {
        for j in 0..n {
            let mut blk = y.entry(i).adjoint() * p * y.entry(j);
            if i == j {
                blk -= p;
            }
            expansion.view_mut((i * x, j * x), (x, x)).copy_from(&blk);
        }
    }
    if min_eig_hermitian(&expansion) < -DATA_TOL {
        return Err(Error::Inconsistent(
            "the weight fails the block expansion inequality against the targets".into(),
        ));
    }
    let worst = (0..n)
        .map(|i| op_norm(&(t.entry(i) * a - a * y.entry(i))))
        .fold(0.0, f64::max);
    if worst > DATA_TOL {
        return Err(Error::Inconsistent(format!(
            "the tuples do not intertwine the data map (residual {worst:.3e})"
        )));
    }
    let (p_root, u_p) = clean_sqrt_and_range(p);
    let factor = u_p.adjoint() * &p_root;
    let a_tilde = a * pinv(&factor, RANK_REL_TOL);
    let resid = op_norm(&(&a_tilde * &factor - a));
    if resid > TOL_RES * op_norm(a).max(1.0) {
        return Err(Error::Inconsistent(
            "the data map does not factor through the range of the weight".into(),
        ));
    }
    let c: Vec<CMat> = (0..n).map(|_| factor.clone()).collect();
    let q: Vec<CMat> = (0..n).map(|i| &factor * y.entry(i)).collect();
    let data = LiftingData::new(a_tilde, t.clone(), c, q)?;
    Ok(WeightedReduction { data, factor })
}
