//! The end-to-end verification suite: eleven numbered scenarios, each
//! replaying one advertised guarantee of the library on deterministic
//! pseudo-random instances and reporting worst-case residuals over its
//! trial set.
//!
//! Every scenario is a function returning a [`Report`]; [`run_all`] collects
//! them in order. The same reports back the `selftest` subcommand of the
//! CLI, so a fixed seed reproduces the suite byte for byte. Scale is kept
//! deliberately small (two letters, truncation degree four, coefficient
//! dimensions at most four): on the truncated space the identities under
//! test are exact, so small instances already decide them.

use num_complex::Complex64;

use crate::fock::{compress, enumerate_words, Side, Word};
use crate::gen::{
    random_lifting_data, random_row_contraction, random_schur_series, random_series,
    random_unitary, random_weighted_instance, rescale_h2, seeded,
};
use crate::lifting::{
    build_omega, minimal_isometric_dilation, nclt_uniqueness, solve_with_omega, weighted_reduce,
    zero_lift_parameter, LiftingData,
};
use crate::linalg::{
    cr, fro_norm, hermitian_part, identity, max_abs, min_eig_hermitian, op_norm,
};
use crate::majorant::{
    defect_residual, is_subpluriharmonic, least_majorant, majorant_from_param,
    param_from_majorant, CurveSampler,
};
use crate::report::{Check, Report};
use crate::schur::{j_forward, j_inverse, reconstruct_theta, SchurColumn};
use crate::series::{coefficient_distance, FreeSeries, OperatorTuple};
use crate::transforms::{
    cayley, herglotz_moments, herglotz_series, inverse_cayley, poisson_kernel,
    right_operator_poisson,
};
use crate::Result;

/// Number of scenarios in the suite.
pub const COUNT: usize = 11;

/// Radial grid shared by the majorant-identity and domination scenarios.
const R_GRID: [f64; 4] = [0.3, 0.6, 0.9, 1.0];

/// Run every scenario with one seed; the `k`-th report carries a title
/// starting with the zero-padded scenario number.
pub fn run_all(seed: u64) -> Result<Vec<Report>> {
    Ok(vec![
        poisson_moments()?,
        majorant_defect_identity(seed)?,
        sub_pluriharmonicity(seed)?,
        least_majorant_oracles(seed)?,
        majorant_family(seed)?,
        cayley_bijection(seed)?,
        column_bijection(seed)?,
        lifting_soundness(seed)?,
        lifting_uniqueness(seed)?,
        weighted_lifting(seed)?,
        dilation_exactness(seed)?,
    ])
}

/// The suite with the two workaday tolerances swapped out: every check
/// calibrated at the library defaults ([`crate::TOL_EIG`], [`crate::TOL_RES`],
/// or `1 + TOL_EIG` for norm bounds) is re-judged against the given values,
/// while specially calibrated thresholds — exactness at zero, coefficient
/// agreement at `1e-12`, quadrature at `1e-6` — stay fixed. Tolerances near
/// machine epsilon make honestly measured rounding visible as failures;
/// looser ones weaken the gate and are the caller's own responsibility.
pub fn run_all_with(seed: u64, tol_eig: f64, tol_res: f64) -> Result<Vec<Report>> {
    let mut reports = run_all(seed)?;
    for report in &mut reports {
        crate::report::retune(report, tol_eig, tol_res);
    }
    Ok(reports)
}

/// The ten random test series shared by the defect-identity and
/// sub-pluriharmonicity scenarios: two letters, degree at most two,
/// coefficient two-norm alternating between the boundary value one and a
/// strictly interior value.
fn sample_thetas(seed: u64) -> Vec<FreeSeries> {
    let mut rng = seeded(seed ^ 0x5eed);
    (0..10)
        .map(|k| {
            let raw = random_series(&mut rng, 2, 2, 2, 2, true);
            rescale_h2(&raw, if k % 2 == 0 { 1.0 } else { 0.85 })
        })
        .collect()
}

/// 01 — the compression through the Poisson kernel of the truncated
/// creation tuple fixes every word moment `S_a S_b*` exactly, and is
/// unital.
pub fn poisson_moments() -> Result<Report> {
    let mut report = Report::new("01 poisson-moments");
    let basis = enumerate_words(2, 4)?;
    let s = OperatorTuple::creation(&basis, Side::Left);
    let kernel = poisson_kernel(&s, &basis)?;
    let words = &basis.words()[..basis.dim_at_degree(3)];
    let mut worst = 0.0f64;
    for a in words {
        let sa = s.word_product(a);
        for b in words {
            let arg = &sa * s.word_product(b).adjoint();
            let p = kernel.transform(&arg)?;
            worst = worst.max(op_norm(&(p - arg)));
        }
    }
    report.push(Check::residual("word-moment-identity", worst, 1e-12));
    let unit = kernel.transform(&identity(basis.dim()))?;
    report.push(Check::residual(
        "kernel-unitality",
        max_abs(&(unit - identity(basis.dim()))),
        1e-12,
    ));
    Ok(report)
}

/// 02 — the least majorant of `theta* theta` satisfies its defining radial
/// identity: the gap between `Re W(rR)` and `theta(rR)* theta(rR)` equals
/// the explicit positive defect at every radius, and vanishes on the
/// resolved block at the boundary.
pub fn majorant_defect_identity(seed: u64) -> Result<Report> {
    let mut report = Report::new("02 majorant-defect-identity");
    let basis = enumerate_words(2, 4)?;
    let mut worst_radial = 0.0f64;
    let mut worst_boundary = 0.0f64;
    for theta in &sample_thetas(seed) {
        for r in R_GRID {
            worst_radial = worst_radial.max(defect_residual(theta, r, &basis)?);
        }
        let deg = theta.coeffs().keys().map(Word::len).max().unwrap_or(0);
        let w = least_majorant(theta, &basis)?;
        let wr = hermitian_part(&w.radial_eval(1.0, &basis, Side::Right)?);
        let tr = theta.radial_eval(1.0, &basis, Side::Right)?;
        let gap = compress(&(wr - tr.adjoint() * tr), &basis, basis.m() - deg - 1)?;
        worst_boundary = worst_boundary.max(fro_norm(&gap));
    }
    report.push(Check::residual("radial-defect-identity", worst_radial, 1e-8));
    report.push(Check::residual("boundary-defect-gap", worst_boundary, 1e-8));
    Ok(report)
}

/// 03 — the squared-modulus curves of the same test series pass the
/// transform-domination test between every pair of grid radii, and the
/// pluriharmonic control curve `Re W` turns the domination into equality.
pub fn sub_pluriharmonicity(seed: u64) -> Result<Report> {
    let mut report = Report::new("03 sub-pluriharmonicity");
    let basis = enumerate_words(2, 4)?;
    let mut floor = f64::INFINITY;
    let mut failures = 0usize;
    let mut worst_eq = 0.0f64;
    for theta in &sample_thetas(seed) {
        let curve = CurveSampler::squared_modulus(theta, &basis);
        let w = least_majorant(theta, &basis)?;
        for (gi, &gamma) in R_GRID.iter().enumerate() {
            let sub: Vec<f64> = R_GRID[..=gi].to_vec();
            let rep = is_subpluriharmonic(&curve, &sub, gamma, &basis, 1e-9)?;
            failures += rep.checks.iter().filter(|c| !c.pass).count();
            floor = rep
                .checks
                .iter()
                .filter_map(|c| c.min_eigenvalue)
                .fold(floor, f64::min);
            let top = hermitian_part(&w.radial_eval(gamma, &basis, Side::Right)?);
            for &r in &sub {
                let lhs = right_operator_poisson(&top, r / gamma, &basis)?;
                let rhs = hermitian_part(&w.radial_eval(r, &basis, Side::Right)?);
                worst_eq = worst_eq.max(fro_norm(&(lhs - rhs)));
            }
        }
    }
    report.push(Check::eigen_floor("transform-domination-floor", floor, 1e-9));
    report.push(Check::residual("grid-report-failures", failures as f64, 0.0));
    report.push(Check::residual("pluriharmonic-control-equality", worst_eq, 1e-9));
    Ok(report)
}

/// 04 — the two computations of the least majorant (symbol products and
/// Gram-convolution moments) agree coefficient-exactly, and for the scalar
/// series `(1+z)/2` the majorant matches the classical one-variable
/// answer: coefficients `1/2 + z/2`, boundary real part the Poisson
/// quadrature of `|(1+e^{it})/2|^2`.
pub fn least_majorant_oracles(seed: u64) -> Result<Report> {
    let mut report = Report::new("04 least-majorant-oracles");
    let basis = enumerate_words(2, 4)?;
    let mut worst_pair = 0.0f64;
    for theta in &sample_thetas(seed) {
        let w1 = least_majorant(theta, &basis)?;
        let w2 = herglotz_series(&herglotz_moments(theta, &basis)?);
        worst_pair = worst_pair.max(coefficient_distance(&w1, &w2, basis.m())?);
    }
    report.push(Check::residual("two-formula-agreement", worst_pair, 1e-12));

    let line = enumerate_words(1, 4)?;
    let theta = FreeSeries::one(1, 1, 1).add(&FreeSeries::letter(1, 1, 1), cr(0.5), cr(0.5))?;
    let w = least_majorant(&theta, &line)?;
    let mut dev = max_abs(&(w.coeff(&Word::empty()) - identity(1) * cr(0.5)));
    dev = dev.max(max_abs(&(w.coeff(&Word::letter(1)) - identity(1) * cr(0.5))));
    for (word, a) in w.coeffs() {
        if word.len() > 1 {
            dev = dev.max(max_abs(a));
        }
    }
    report.push(Check::residual("classical-coefficients", dev, 1e-12));

    // harmonic extension of the boundary modulus, via Poisson quadrature
    let eval = |z: Complex64| -> Complex64 {
        w.coeffs().iter().map(|(word, a)| a[(0, 0)] * z.powu(word.len() as u32)).sum()
    };
    let (radius, nodes) = (0.9f64, 512usize);
    let mut worst_q = 0.0f64;
    for k in 0..64 {
        let phi = std::f64::consts::TAU * k as f64 / 64.0;
        let direct = eval(Complex64::from_polar(radius, phi)).re;
        let mut quad = 0.0;
        for j in 0..nodes {
            let t = std::f64::consts::TAU * j as f64 / nodes as f64;
            let boundary = (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, t)) / 2.0;
            let kernel = (1.0 - radius * radius)
                / (1.0 - 2.0 * radius * (phi - t).cos() + radius * radius);
            quad += kernel * boundary.norm_sqr();
        }
        quad /= nodes as f64;
        worst_q = worst_q.max((direct - quad).abs());
    }
    report.push(Check::residual("classical-circle-quadrature", worst_q, 1e-6));
    Ok(report)
}

/// 05 — majorants built from contractive parameters dominate both the
/// squared modulus and the least majorant on the resolved boundary block,
/// and the parameter is recovered from the majorant exactly.
pub fn majorant_family(seed: u64) -> Result<Report> {
    let mut report = Report::new("05 majorant-family");
    let basis = enumerate_words(2, 4)?;
    let mut rng = seeded(seed ^ 0xfa311);
    let mut floor_series = f64::INFINITY;
    let mut floor_least = f64::INFINITY;
    let mut worst_trip = 0.0f64;
    for _ in 0..20 {
        let theta = rescale_h2(&random_series(&mut rng, 2, 2, 2, 2, true), 0.9);
        let g = random_schur_series(&mut rng, 2, 2, 2, 2, false, 0.9);
        let f = majorant_from_param(&theta, &g, &basis)?;
        let deg = theta.coeffs().keys().map(Word::len).max().unwrap_or(0);
        let cut = basis.m() - deg - 1;

        let fr = hermitian_part(&f.radial_eval(1.0, &basis, Side::Right)?);
        let tr = theta.radial_eval(1.0, &basis, Side::Right)?;
        let gap = compress(&(&fr - tr.adjoint() * tr), &basis, cut)?;
        floor_series = floor_series.min(min_eig_hermitian(&gap));

        let w = least_majorant(&theta, &basis)?;
        let wr = hermitian_part(&w.radial_eval(1.0, &basis, Side::Right)?);
        let over = compress(&(fr - wr), &basis, cut)?;
        floor_least = floor_least.min(min_eig_hermitian(&over));

        let g_back = param_from_majorant(&theta, &f, &basis)?;
        worst_trip = worst_trip.max(coefficient_distance(&g, &g_back, basis.m())?);
    }
    report.push(Check::eigen_floor("majorant-dominates-series", floor_series, 1e-9));
    report.push(Check::eigen_floor("majorant-dominates-least", floor_least, 1e-9));
    report.push(Check::residual("parameter-round-trip", worst_trip, 1e-8));
    Ok(report)
}

/// 06 — the Cayley pair is a bijection on the truncated algebra: both
/// compositions restore every coefficient through the full degree bound.
pub fn cayley_bijection(seed: u64) -> Result<Report> {
    let mut report = Report::new("06 cayley-bijection");
    let basis = enumerate_words(2, 4)?;
    let m = basis.m();
    let mut rng = seeded(seed ^ 0xca71e);
    let mut worst_gf = 0.0f64;
    let mut worst_fg = 0.0f64;
    for _ in 0..20 {
        let g = random_schur_series(&mut rng, 2, 2, 2, m, false, 0.9);
        let back = cayley(&inverse_cayley(&g)?)?;
        worst_gf = worst_gf.max(coefficient_distance(&g, &back, m)?);

        let mut f = random_series(&mut rng, 2, 2, 2, m, false).scaled(cr(0.5));
        f.set_coeff(Word::empty(), identity(2))?;
        let back = inverse_cayley(&cayley(&f)?)?;
        worst_fg = worst_fg.max(coefficient_distance(&f, &back, m)?);
    }
    report.push(Check::residual("contractive-to-positive-trip", worst_gf, 1e-10));
    report.push(Check::residual("positive-to-contractive-trip", worst_fg, 1e-10));
    Ok(report)
}

/// 07 — the column representation is a bijection: series and parameter
/// both survive the forward/inverse composition one degree below the
/// truncation, and every contractive column reconstructs a series inside
/// the coefficient two-norm ball.
pub fn column_bijection(seed: u64) -> Result<Report> {
    let mut report = Report::new("07 schur-column-bijection");
    let basis = enumerate_words(2, 4)?;
    let m = basis.m();
    let mut rng = seeded(seed ^ 0x5c47);
    let mut worst_theta = 0.0f64;
    let mut worst_phi = 0.0f64;
    for _ in 0..20 {
        let theta = rescale_h2(&random_series(&mut rng, 2, 2, 2, 2, true), 0.9);
        let k = 2; // strict contraction in two columns: full defect rank
        let stacked = random_schur_series(&mut rng, 2, 2 * k, k, 2, true, 0.9);
        let phi = stacked.row_blocks(&[k, k])?;
        let col = j_forward(&theta, &phi, &basis)?;
        let rebuilt = reconstruct_theta(&col, &basis)?;
        worst_theta = worst_theta.max(coefficient_distance(&rebuilt, &theta, m - 1)?);
        let back = j_inverse(&theta, &col, &basis)?;
        for (p, q) in phi.iter().zip(&back) {
            worst_phi = worst_phi.max(coefficient_distance(p, q, m - 1)?);
        }
    }
    report.push(Check::residual("series-round-trip", worst_theta, 1e-8));
    report.push(Check::residual("parameter-round-trip", worst_phi, 1e-8));

    let mut worst_h2 = 0.0f64;
    for _ in 0..50 {
        let stacked = random_schur_series(&mut rng, 2, 2 + 2 * 2, 2, 2, true, 0.95);
        let mut parts = stacked.row_blocks(&[2, 2, 2])?;
        let l = parts.remove(0);
        let col = SchurColumn::new(l, parts, &basis)?;
        worst_h2 = worst_h2.max(reconstruct_theta(&col, &basis)?.h2_norm());
    }
    report.push(Check::residual("reconstruction-h2-bound", worst_h2, 1.0 + 1e-6));
    Ok(report)
}

/// 08 — solutions of random solvable lifting problems satisfy every
/// defining constraint: contractive, compressing exactly to the data map,
/// intertwining the dilated tuple on the resolved block; the central
/// parameter always produces one.
pub fn lifting_soundness(seed: u64) -> Result<Report> {
    let mut report = Report::new("08 lifting-soundness");
    let basis = enumerate_words(2, 4)?;
    let mut rng = seeded(seed ^ 0x50d4);
    let mut worst_norm = 0.0f64;
    let mut worst_top = 0.0f64;
    let mut worst_int = 0.0f64;
    let mut central_failures = 0usize;
    for _ in 0..10 {
        let data = random_lifting_data(&mut rng, 2, 3, 2, false);
        let pair = build_omega(&data)?;
        let dil = minimal_isometric_dilation(data.t(), &basis)?;
        let proj = dil.safe_projection();
        let (_, u_os) = pair.adjoint_defect();
        let mut params = vec![zero_lift_parameter(&pair, &basis)];
        for _ in 0..4 {
            params.push(random_schur_series(
                &mut rng,
                2,
                u_os.ncols(),
                pair.complement_rank(),
                2,
                true,
                0.9,
            ));
        }
        for (pi, param) in params.iter().enumerate() {
            let sol = match solve_with_omega(&data, &pair, param, &basis) {
                Ok(sol) => sol,
                Err(_) if pi == 0 => {
                    central_failures += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            worst_norm = worst_norm.max(op_norm(&sol.b));
            let top = sol.b.rows(0, data.dim_h()).into_owned();
            worst_top = worst_top.max(max_abs(&(top - data.a())));
            for i in 0..2 {
                let gap = dil.v().entry(i) * &sol.b * &data.c()[i] - &sol.b * &data.q()[i];
                worst_int = worst_int.max(op_norm(&(&proj * gap)));
            }
        }
    }
    report.push(Check::residual("interpolant-norm", worst_norm, 1.0 + 1e-9));
    report.push(Check::residual("compression-to-data", worst_top, 0.0));
    report.push(Check::residual("intertwining-compressed", worst_int, 1e-8));
    report.push(Check::residual("central-solution-exists", central_failures as f64, 0.0));
    Ok(report)
}

/// 09 — the uniqueness criterion: data with a unitary data map admit
/// exactly one solution, while a generic problem with free parameter
/// directions separates distinct parameters into distinct interpolants.
pub fn lifting_uniqueness(seed: u64) -> Result<Report> {
    let mut report = Report::new("09 lifting-uniqueness");
    let mut rng = seeded(seed ^ 0x0a1);
    let a = random_unitary(&mut rng, 3);
    let y = random_unitary(&mut rng, 3);
    let t = OperatorTuple::new(vec![&a * &y * a.adjoint()])?;
    let data = LiftingData::new(a, t, vec![identity(3)], vec![y])?;
    let unique = nclt_uniqueness(&data)?;
    report.push(Check::residual(
        "unitary-data-uniqueness",
        if unique { 0.0 } else { 1.0 },
        0.0,
    ));

    let basis = enumerate_words(2, 4)?;
    let mut separation = 0.0f64;
    for _ in 0..16 {
        let data = random_lifting_data(&mut rng, 2, 3, 2, false);
        let pair = build_omega(&data)?;
        let (_, u_os) = pair.adjoint_defect();
        if pair.complement_rank() == 0 || u_os.ncols() == 0 {
            continue; // no free directions: not the generic case sought
        }
        let central = solve_with_omega(&data, &pair, &zero_lift_parameter(&pair, &basis), &basis)?;
        let param =
            random_schur_series(&mut rng, 2, u_os.ncols(), pair.complement_rank(), 2, true, 0.9);
        let other = solve_with_omega(&data, &pair, &param, &basis)?;
        separation = fro_norm(&(&central.b - &other.b));
        break;
    }
    report.push(Check {
        name: "interpolant-separation".into(),
        residual: separation,
        min_eigenvalue: None,
        threshold: 1e-10,
        pass: separation > 1e-10,
    });
    Ok(report)
}

/// 10 — weighted problems: the interpolant stays under the weight
/// (`B*B ⪯ P`) and intertwines the dilation against the commuting tuple on
/// the resolved block.
pub fn weighted_lifting(seed: u64) -> Result<Report> {
    let mut report = Report::new("10 weighted-lifting");
    let basis = enumerate_words(1, 4)?;
    let mut rng = seeded(seed ^ 0x3197);
    let mut floor = f64::INFINITY;
    let mut worst_int = 0.0f64;
    for k in 0..5 {
        let (t, a, p, y) = random_weighted_instance(&mut rng, 3, k % 2 == 1);
        let red = weighted_reduce(&t, &a, &p, &y)?;
        let dil = minimal_isometric_dilation(&t, &basis)?;
        let pair = build_omega(&red.data)?;
        let sol = solve_with_omega(&red.data, &pair, &zero_lift_parameter(&pair, &basis), &basis)?;
        let b = &sol.b * &red.factor;
        floor = floor.min(min_eig_hermitian(&(&p - b.adjoint() * &b)));
        let gap = dil.v().entry(0) * &b - &b * y.entry(0);
        worst_int = worst_int.max(op_norm(&(dil.safe_projection() * gap)));
    }
    report.push(Check::eigen_floor("weight-domination", floor, 1e-8));
    report.push(Check::residual("weighted-intertwining", worst_int, 1e-8));
    Ok(report)
}

/// 11 — the minimal isometric dilation: the tuple occupies the top rows of
/// its dilation exactly, the dilated tuple is a shift-type isometry on the
/// block one degree below the truncation, and a unitary (the only
/// finite-dimensional row isometry, necessarily on one letter) needs no
/// extra space at all.
pub fn dilation_exactness(seed: u64) -> Result<Report> {
    let mut report = Report::new("11 isometric-dilation");
    let basis = enumerate_words(2, 4)?;
    let mut rng = seeded(seed ^ 0xd11a);
    let mut worst_rows = 0.0f64;
    let mut worst_iso = 0.0f64;
    for margin in [0.6, 0.9, 1.0] {
        let t = random_row_contraction(&mut rng, 2, 3, margin);
        let dil = minimal_isometric_dilation(&t, &basis)?;
        let proj = dil.safe_projection();
        for i in 0..2 {
            let top = dil.v().entry(i).rows(0, 3).into_owned();
            let mut want = crate::linalg::zeros(3, dil.k_dim());
            want.view_mut((0, 0), (3, 3)).copy_from(t.entry(i));
            worst_rows = worst_rows.max(max_abs(&(top - want)));
            for j in 0..2 {
                let mut gram = dil.v().entry(i).adjoint() * dil.v().entry(j);
                if i == j {
                    gram -= identity(dil.k_dim());
                }
                worst_iso = worst_iso.max(max_abs(&(&proj * gram * &proj)));
            }
        }
    }
    report.push(Check::residual("tuple-rows-exact", worst_rows, 0.0));
    report.push(Check::residual("shift-isometry-block", worst_iso, 1e-12));

    let u = random_unitary(&mut rng, 3);
    let line = enumerate_words(1, 4)?;
    let dil = minimal_isometric_dilation(&OperatorTuple::new(vec![u])?, &line)?;
    report.push(Check::residual(
        "row-isometry-collapse",
        (dil.k_dim() - 3) as f64,
        0.0,
    ));
    Ok(report)
}
