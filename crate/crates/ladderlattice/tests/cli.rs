use std::path::PathBuf;
use std::process::{Command, Output};

use ladderlattice::table::{read_table, write_table};
use ladderlattice_core::{Rational, Real};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ladderlattice"));
    c.env_remove("LADDERLATTICE_PRECISION");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ladderlattice-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const KRAVCHUK_HALF: &str = r#"{ "families": [ {
    "name": "kravchuk-half", "lattice": "linear",
    "sigma": [0, 1], "tau": [7, -2],
    "a": 0, "b": 8, "sign": -1, "base": 1, "factorial": true
} ] }"#;

#[test]
fn eval_examples() {
    let o = run(&["eval", "hermite", "--n", "2", "--m", "0", "--at", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "0\t-2");

    let o = run(&["eval", "charlier", "--mu", "1", "--n", "0", "--m", "0", "--at", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "5\t1");

    let o = run(&["eval", "hermite", "--n", "3", "--at", "-1,1/2,2"]);
    assert_eq!(stdout(&o), "-1\t4\n1/2\t-5\n2\t40\n");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["eval", "kravchuk", "--p", "0.5", "--N", "4", "--n", "5", "--at", "0"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "legendre", "--n", "1", "--at", "0"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "hermite", "--n", "1"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "charlier", "--mu", "abc", "--n", "1", "--at", "0"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "charlier", "--mu", "-1", "--n", "1", "--at", "0"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "hermite", "--n", "1", "--m", "2", "--at", "0"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "kravchuk", "--n", "1", "--at", "1/3"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--identity", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let o = bin().env("LADDERLATTICE_PRECISION", "many").args(["families"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn hermite_lowering_gives_six_h2() {
    let o = run(&["ladder", "hermite", "--n", "3", "--direction", "lower", "--from", "-2", "--to", "2", "--step", "1/4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), ["s", "x", "before", "after", "target"]);
    let mut rows = 0;
    for rec in rd.records() {
        let rec = rec.unwrap();
        let x = ladderlattice_core::parse_rational(&rec[1]).unwrap();
        let h2 = Rational::from_integer(4.into()) * x.clone() * x - Rational::from_integer(2.into());
        let six_h2 = (Rational::from_integer(6.into()) * h2).to_string();
        assert_eq!(&rec[3], six_h2);
        assert_eq!(&rec[4], six_h2);
        rows += 1;
    }
    assert_eq!(rows, 17);
}

#[test]
fn grid_ladder_reports_zero_deviation() {
    let o = run(&["ladder", "hahn", "--n", "2", "--m", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["max_deviation"], "0");
    assert_eq!(v["field"], "rational");
    assert_eq!(run(&["ladder", "hahn", "--n", "2", "--m", "2", "--direction", "lower"]).status.code(), Some(2));
}

#[test]
fn table_round_trips_exactly() {
    for args in [
        vec!["table", "kravchuk", "--n", "3", "--m", "1"],
        vec!["table", "hermite", "--n", "4", "--from", "-2", "--to", "2", "--step", "1/3"],
        vec!["table", "qhahn", "--n", "2", "--q", "1/3", "--to", "6"],
        vec!["table", "meixner", "--n", "3", "--field", "float"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        let float = args.contains(&"float") || args.contains(&"qhahn");
        let again = if float {
            write_table(&read_table::<Real>(&text).unwrap())
        } else {
            write_table(&read_table::<Rational>(&text).unwrap())
        };
        assert_eq!(again, text, "{args:?}");
        assert!(text.lines().count() > 5);
    }
}

#[test]
fn eval_json_and_omega() {
    let o = run(&["eval", "hermite", "--n", "2", "--at", "1/2", "--omega", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["values"][0]["v"], "-1");
    let om: f64 = v["values"][0]["omega"].as_str().unwrap().parse().unwrap();
    let want = -(-0.125f64).exp() / (8.0 * std::f64::consts::PI.sqrt()).sqrt();
    assert!((om - want).abs() < 1e-15, "{om} vs {want}");
}

#[test]
fn precision_env_changes_the_float_field() {
    let o = bin()
        .env("LADDERLATTICE_PRECISION", "60")
        .args(["eval", "meixner", "--n", "2", "--at", "1", "--field", "float", "--format", "json"])
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["field"], "float-256");
}

#[test]
fn verify_exit_codes_and_formats() {
    let o = run(&["verify", "--families", "kravchuk,charlier,hermite", "--nmax", "3", "--mmax", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], "ladderlattice-report/1");
    assert_eq!(v["summary"]["failed"], 0);
    assert!(v["cells"].as_array().unwrap().len() > 50);

    let o = run(&["verify", "--families", "hahn", "--nmax", "2", "--mmax", "0", "--format", "plain"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("adjointness"));

    let o = run(&["verify", "--families", "kravchuk", "--nmax", "2", "--fault-beta", "1/1000", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.starts_with("identity,family,params,m,n,field,max_residual,tolerance,status,note\n"));
    for line in text.lines().skip(1).filter(|l| l.contains(",fail,")) {
        assert!(line.starts_with("recurrence,"), "{line}");
    }

    let o = run(&["verify", "--families", "", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["summary"]["total"], 0);
}

#[test]
fn verify_output_is_deterministic() {
    let args = ["verify", "--families", "meixner", "--nmax", "3", "--mmax", "1", "--format", "csv"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn custom_catalog_matches_the_shipped_family() {
    let path = tmp("catalog.json");
    std::fs::write(&path, KRAVCHUK_HALF).unwrap();
    let p = path.to_str().unwrap();
    let custom = run(&["eval", "kravchuk-half", "--families", p, "--n", "3", "--m", "1", "--at", "0,1,2,5"]);
    let shipped = run(&["eval", "kravchuk", "--p", "1/2", "--N", "7", "--n", "3", "--m", "1", "--at", "0,1,2,5"]);
    assert_eq!(custom.status.code(), Some(0), "{}", String::from_utf8_lossy(&custom.stderr));
    assert_eq!(stdout(&custom), stdout(&shipped));

    let list = stdout(&run(&["families", "--families", p]));
    assert_eq!(list.lines().count(), 10);
    assert!(list.contains("kravchuk-half"));

    let o = run(&["verify", "--families", p, "--nmax", "3", "--mmax", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    std::fs::write(&path, "{ \"families\": [ { \"name\": \"x\" } ] }").unwrap();
    assert_eq!(run(&["eval", "x", "--families", p, "--n", "1", "--at", "0"]).status.code(), Some(2));
}

#[test]
fn output_file_option() {
    let path = tmp("families.json");
    let o = run(&["families", "--format", "json", "-o", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 9);
    assert_eq!(v[8]["lattice"], "q-exponential");
}
