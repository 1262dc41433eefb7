use ladderlattice_core::verify::{run_suite, Config, Faults, FamilyRequest, Status};
use ladderlattice_core::Rational;

fn small(names: &[&str]) -> Config {
    Config {
        families: names.iter().map(|n| FamilyRequest::catalog(n)).collect(),
        n_max: 4,
        m_max: 1,
        ..Config::default()
    }
}

fn ppm() -> Rational {
    Rational::new(1.into(), 1_000_000.into())
}

#[test]
fn constant_k_families_pass_everything() {
    let r = run_suite(&small(&["hermite", "charlier", "kravchuk"]));
    let bad: Vec<_> = r.failing().map(|c| (&c.identity, &c.family, c.m, c.n)).collect();
    assert!(bad.is_empty(), "{bad:?}");
    assert!(r.summary.passed > 100);
    assert_eq!(r.summary.total, r.cells.len());
}

#[test]
fn adjointness_is_the_only_failure_on_hahn() {
    let r = run_suite(&small(&["hahn"]));
    assert!(r.summary.failed > 0);
    assert!(r.failing().all(|c| c.identity == "adjointness"));
}

#[test]
fn empty_family_list_gives_an_empty_report() {
    let r = run_suite(&Config { families: vec![], ..Config::default() });
    assert!(r.cells.is_empty());
    assert_eq!((r.summary.total, r.summary.passed, r.summary.failed, r.summary.skipped), (0, 0, 0, 0));
}

#[test]
fn runs_are_identical() {
    let cfg = small(&["meixner", "qhahn"]);
    assert_eq!(run_suite(&cfg), run_suite(&cfg));
}

#[test]
fn corrupted_beta_fails_only_recurrence() {
    let mut cfg = small(&["kravchuk", "charlier"]);
    cfg.faults.beta_shift = Some(Rational::new(1.into(), 1000.into()));
    let r = run_suite(&cfg);
    assert!(r.summary.failed > 0);
    assert!(r.failing().all(|c| c.identity == "recurrence"));
}

#[test]
fn each_fault_is_detected() {
    let faults = [
        Faults { tau_shift: Some(ppm()), ..Faults::default() },
        Faults { alpha_shift: Some(ppm()), ..Faults::default() },
        Faults { flip_amn_sign: true, ..Faults::default() },
    ];
    for f in faults {
        for field in [ladderlattice_core::verify::Field::Rational, ladderlattice_core::verify::Field::Float] {
            let mut cfg = small(&["kravchuk"]);
            cfg.faults = f.clone();
            cfg.field = field;
            let r = run_suite(&cfg);
            assert!(r.summary.failed > 0, "{f:?} {field:?}");
        }
    }
}

#[test]
fn rational_field_skips_square_roots() {
    let mut cfg = small(&["kravchuk"]);
    cfg.field = ladderlattice_core::verify::Field::Rational;
    let r = run_suite(&cfg);
    assert!(r.cells.iter().all(|c| c.field == "rational"));
    assert!(!r.cells.iter().any(|c| c.identity.starts_with("omega")));
    assert!(r.all_pass());
    assert!(r.cells.iter().all(|c| c.status != Status::Fail));
}
