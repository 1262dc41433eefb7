use ladderlattice_core::rodrigues::shifted_poly;
use ladderlattice_core::{catalog_get, parse_rational, Params, Rational};
use num_traits::Zero;

// Standard polynomials at fixed points, computed independently from their
// terminating hypergeometric series in exact rational arithmetic.
const HERMITE: [[&str; 4]; 7] = [
    ["1", "1", "1", "1"],
    ["0", "2/3", "4", "-10/7"],
    ["-2", "-14/9", "14", "2/49"],
    ["0", "-100/27", "40", "1940/343"],
    ["12", "556/81", "76", "-19988/2401"],
    ["0", "8312/243", "-16", "-560600/16807"],
    ["-120", "-33416/729", "-824", "15400120/117649"],
];
const LAGUERRE: [[&str; 4]; 7] = [
    ["1", "1", "1", "1"],
    ["3/2", "7/6", "-1/2", "31/14"],
    ["15/8", "79/72", "-9/8", "1535/392"],
    ["35/16", "1189/1296", "-43/48", "103165/16464"],
    ["315/128", "21265/31104", "-95/384", "8704945/921984"],
    ["693/256", "399103/933120", "557/1280", "176168203/12907776"],
    ["3003/1024", "5687551/33592320", "42199/46080", "20740832003/1084253184"],
];
const JACOBI: [[&str; 4]; 7] = [
    ["1", "1", "1", "1"],
    ["-1/2", "1/6", "7/2", "-27/14"],
    ["-5/8", "-5/8", "95/8", "855/392"],
    ["7/16", "-203/432", "651/16", "-1237/784"],
    ["63/128", "833/3456", "18039/128", "17469/43904"],
    ["-99/256", "3751/6912", "126093/256", "3400947/4302592"],
    ["-429/1024", "30173/248832", "1775631/1024", "-24679083/17210368"],
];
const CHARLIER: [[&str; 4]; 7] = [
    ["1", "1", "1", "1"],
    ["1", "1/3", "-1", "-11/3"],
    ["1", "-1/3", "-1/3", "31/3"],
    ["1", "-1", "11/9", "-173/9"],
    ["1", "-5/3", "17/9", "307/27"],
    ["1", "-7/3", "-1/9", "359/9"],
    ["1", "-3", "-59/9", "-4147/81"],
];
const MEIXNER: [[&str; 4]; 7] = [
    ["1", "1", "1", "1"],
    ["1", "1/5", "-7/5", "-23/5"],
    ["1", "-3/5", "-37/35", "9"],
    ["1", "-7/5", "17/21", "-13/15"],
    ["1", "-11/5", "313/105", "-2443/165"],
    ["1", "-3", "89/21", "-1237/143"],
    ["1", "-19/5", "353/105", "14163/715"],
];
const KRAVCHUK: [[&str; 4]; 7] = [
    ["1", "1", "1", "1"],
    ["1", "11/14", "5/14", "-1/2"],
    ["1", "4/7", "1/91", "1/13"],
    ["1", "5/14", "-41/364", "7/52"],
    ["1", "1/7", "-8/91", "-1/11"],
    ["1", "-1/14", "1/91", "-23/286"],
    ["1", "-2/7", "10/91", "17/143"],
];
const HAHN: [[&str; 4]; 7] = [
    ["1", "1", "1", "1"],
    ["1", "53/60", "13/20", "11/60"],
    ["1", "7/10", "61/280", "-11/40"],
    ["1", "9/20", "-367/2240", "-43/320"],
    ["1", "2/15", "-201/560", "407/1920"],
    ["1", "-1/4", "-783/2912", "12633/73216"],
    ["1", "-7/10", "837/7280", "-197859/732160"],
];

const CONTINUOUS_POINTS: [&str; 4] = ["0", "1/3", "2", "-5/7"];
const GRID_POINTS: [&str; 4] = ["0", "1", "3", "7"];

fn r(text: &str) -> Rational {
    parse_rational(text).expect("rational literal")
}

fn values(name: &str, n: i64, points: &[&str; 4]) -> Vec<Rational> {
    let fam = catalog_get::<Rational>(name, &Params::new()).expect("shipped family");
    let y = shifted_poly(&fam, 0, n).expect("polynomial");
    points.iter().map(|p| y.poly.eval(&r(p))).collect()
}

fn assert_equal(name: &str, table: &[[&str; 4]; 7]) {
    for (n, row) in table.iter().enumerate() {
        let ours = values(name, n as i64, &CONTINUOUS_POINTS);
        let want: Vec<Rational> = row.iter().map(|v| r(v)).collect();
        assert_eq!(ours, want, "{name} degree {n}");
    }
}

fn assert_proportional(name: &str, table: &[[&str; 4]; 7]) {
    for (n, row) in table.iter().enumerate() {
        let ours = values(name, n as i64, &GRID_POINTS);
        let want: Vec<Rational> = row.iter().map(|v| r(v)).collect();
        let pivot = want.iter().position(|w| !w.is_zero()).expect("nonzero oracle value");
        let ratio = ours[pivot].clone() / want[pivot].clone();
        assert!(!ratio.is_zero(), "{name} degree {n} vanishes");
        for (o, w) in ours.iter().zip(&want) {
            assert_eq!(o.clone(), ratio.clone() * w.clone(), "{name} degree {n}");
        }
    }
}

#[test]
fn hermite_matches_physicists_convention() {
    assert_equal("hermite", &HERMITE);
}

#[test]
fn laguerre_matches_generalized_laguerre() {
    assert_equal("laguerre", &LAGUERRE);
}

#[test]
fn jacobi_matches_standard_jacobi() {
    assert_equal("jacobi", &JACOBI);
}

#[test]
fn charlier_is_proportional_to_standard_charlier() {
    assert_proportional("charlier", &CHARLIER);
}

#[test]
fn meixner_is_proportional_to_standard_meixner() {
    assert_proportional("meixner", &MEIXNER);
}

#[test]
fn kravchuk_is_proportional_to_standard_kravchuk() {
    assert_proportional("kravchuk", &KRAVCHUK);
}

#[test]
fn hahn_is_proportional_to_standard_hahn() {
    assert_proportional("hahn", &HAHN);
}
