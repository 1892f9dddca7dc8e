//! The end-to-end verification suite, one test per scenario. Each test
//! prints a single pass/fail line (visible with `--nocapture` or on
//! failure, where the full residual table follows) and asserts the verdict.

use ncball::acceptance;
use ncball::report::Report;

const SEED: u64 = 271828;

fn settle(report: Report) {
    let verdict = if report.pass() { "pass" } else { "FAIL" };
    println!("criterion {} ... {verdict}", report.title);
    assert!(report.pass(), "\n{}", report.render_table());
}

#[test]
fn criterion_01_poisson_moments() {
    settle(acceptance::poisson_moments().unwrap());
}

#[test]
fn criterion_02_majorant_defect_identity() {
    settle(acceptance::majorant_defect_identity(SEED).unwrap());
}

#[test]
fn criterion_03_sub_pluriharmonicity() {
    settle(acceptance::sub_pluriharmonicity(SEED).unwrap());
}

#[test]
fn criterion_04_least_majorant_oracles() {
    settle(acceptance::least_majorant_oracles(SEED).unwrap());
}

#[test]
fn criterion_05_majorant_family() {
    settle(acceptance::majorant_family(SEED).unwrap());
}

#[test]
fn criterion_06_cayley_bijection() {
    settle(acceptance::cayley_bijection(SEED).unwrap());
}

#[test]
fn criterion_07_schur_column_bijection() {
    settle(acceptance::column_bijection(SEED).unwrap());
}

#[test]
fn criterion_08_lifting_soundness() {
    settle(acceptance::lifting_soundness(SEED).unwrap());
}

#[test]
fn criterion_09_lifting_uniqueness() {
    settle(acceptance::lifting_uniqueness(SEED).unwrap());
}

#[test]
fn criterion_10_weighted_lifting() {
    settle(acceptance::weighted_lifting(SEED).unwrap());
}

#[test]
fn criterion_11_isometric_dilation() {
    settle(acceptance::dilation_exactness(SEED).unwrap());
}
