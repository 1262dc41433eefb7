use ladderlattice::catalog::{parse_catalog, CatalogError};
use ladderlattice::report::{to_csv, to_json, to_plain, CSV_COLUMNS, SCHEMA};
use ladderlattice_core::lattice::LatticeKind;
use ladderlattice_core::verify::{run_suite, Config, FamilyRequest};
use ladderlattice_core::Rational;

#[test]
fn catalog_reads_every_number_form() {
    let defs = parse_catalog(
        r#"{ "families": [
            { "name": "Lin", "lattice": "linear", "sigma": [0, 1], "tau": ["7", -2.0], "b": 8 },
            { "name": "quad", "lattice": "quadratic", "coeffs": [1, 1, 0],
              "sigma": ["-1/2", 0.25, "1e-1"], "tau": [1, 0], "a": 1, "b": 9, "sign": 1, "base": "3/2" }
        ] }"#,
    )
    .unwrap();
    assert_eq!(defs[0].name, "lin");
    assert_eq!(defs[0].tau[1], Rational::from_integer((-2).into()));
    assert_eq!(defs[0].sign, -1);
    assert_eq!(defs[1].kind, LatticeKind::Quadratic);
    assert_eq!(defs[1].sigma[0], Rational::new((-1).into(), 2.into()));
    assert_eq!(defs[1].sigma[2], Rational::new(1.into(), 10.into()));
    assert_eq!(defs[1].base, Rational::new(3.into(), 2.into()));
}

#[test]
fn catalog_rejections() {
    let bad = [
        r#"{ "families": [ { "name": "a", "lattice": "cubic", "sigma": [], "tau": [] } ] }"#,
        r#"{ "families": [ { "name": "a", "lattice": "quadratic", "sigma": [], "tau": [] } ] }"#,
        r#"{ "families": [ { "name": "a", "lattice": "q-exponential", "coeffs": [1, 0, 0], "sigma": [], "tau": [] } ] }"#,
        r#"{ "families": [ { "name": "a", "lattice": "linear", "sigma": ["x"], "tau": [] } ] }"#,
        r#"{ "families": [ { "name": "a", "lattice": "linear", "sigma": [], "tau": [], "b": 0 } ] }"#,
        r#"{ "families": [ { "name": "a", "lattice": "linear", "sigma": [], "tau": [], "colour": 1 } ] }"#,
    ];
    for text in bad {
        assert!(matches!(parse_catalog(text), Err(CatalogError::Invalid { .. }) | Err(CatalogError::Syntax(_))), "{text}");
    }
    let dup = r#"{ "families": [
        { "name": "a", "lattice": "linear", "sigma": [0, 1], "tau": [1, -1] },
        { "name": "A", "lattice": "linear", "sigma": [0, 1], "tau": [1, -1] } ] }"#;
    assert!(parse_catalog(dup).is_err());
    assert!(matches!(parse_catalog("not json"), Err(CatalogError::Syntax(_))));
}

#[test]
fn report_serializations_are_stable() {
    let cfg = Config { families: vec![FamilyRequest::catalog("kravchuk")], n_max: 2, m_max: 1, ..Config::default() };
    let r = run_suite(&cfg);
    let j = to_json(&r);
    assert_eq!(j["schema"], SCHEMA);
    assert_eq!(j["cells"].as_array().unwrap().len(), r.cells.len());
    assert_eq!(j["cells"][0]["identity"], "pearson");
    assert_eq!(j["cells"][0]["params"]["N"], "14");
    assert_eq!(j["environment"]["seed"], 0);

    let csv_text = to_csv(&r);
    let mut rd = csv::Reader::from_reader(csv_text.as_bytes());
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), CSV_COLUMNS);
    assert_eq!(rd.records().count(), r.cells.len());
    assert_eq!(csv_text, to_csv(&run_suite(&cfg)));

    assert!(to_plain(&r).ends_with(&format!("{} cells: {} passed, 0 failed, 0 skipped\n", r.cells.len(), r.cells.len())));
}
