use std::path::PathBuf;

use proptest::prelude::*;

use milnor_core::config::AnalysisConfig;
use milnor_core::poly::{ratio, PolyMap, Polynomial, VarList};
use milnor_core::report::{Bundle, Which};
use milnor_core::tameness::check_tame;
use milnor_core::topology::gradient_degree;

const PLANAR: [(&str, i64); 5] = [
    ("x^2+y^2", 1),
    ("x*y", -1),
    ("x^3-3*x*y^2", -2),
    ("x^4+y^4", 1),
    ("x^4-6*x^2*y^2+y^4", -3),
];

fn xy() -> VarList {
    VarList::new(&["x", "y"])
}

/// Rotation by the angle of the Pythagorean triple `(a² − b², 2ab)`.
fn rotation(a: i64, b: i64) -> PolyMap {
    let n = a * a + b * b;
    let (c, s) = (ratio(a * a - b * b, n), ratio(2 * a * b, n));
    let m = vec![vec![c.clone(), -s.clone()], vec![s, c]];
    PolyMap::linear(&xy(), &m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn degree_does_not_depend_on_the_radius(k in 0usize..PLANAR.len(), r in 0.02f64..0.3) {
        let (text, deg) = PLANAR[k];
        let f = Polynomial::parse(text, &xy()).unwrap();
        let got = gradient_degree(&f, r, &AnalysisConfig::default()).unwrap();
        prop_assert_eq!(got.degree, deg);
    }

    #[test]
    fn degree_is_invariant_under_rotation(k in 0usize..PLANAR.len(), a in 1i64..6, b in 1i64..6) {
        let (text, deg) = PLANAR[k];
        let f = Polynomial::parse(text, &xy()).unwrap();
        let rotated = f.substitute(rotation(a, b).components()).unwrap();
        let got = gradient_degree(&rotated, 0.1, &AnalysisConfig::default()).unwrap();
        prop_assert_eq!(got.degree, deg);
    }

    #[test]
    fn regular_germs_in_odd_dimension_have_degree_zero(
        lin in prop::array::uniform3(-3i64..=3),
        quad in prop::array::uniform3(-3i64..=3),
    ) {
        prop_assume!(lin.iter().any(|c| *c != 0));
        let xyz = VarList::new(&["x", "y", "z"]);
        let text = format!(
            "{}*x+{}*y+{}*z+{}*x*y+{}*y*z^2+{}*x^3",
            lin[0], lin[1], lin[2], quad[0], quad[1], quad[2]
        );
        let f = Polynomial::parse(&text, &xyz).unwrap();
        let got = gradient_degree(&f, 0.05, &AnalysisConfig::default()).unwrap();
        prop_assert_eq!(got.degree, 0);
    }
}

fn bundle(name: &str) -> Bundle {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../bundles")
        .join(format!("{name}.json"));
    Bundle::load(&path).unwrap()
}

#[test]
fn same_seed_reproduces_the_verdict_record() {
    let b = bundle("untame_outer_map");
    let g = b.map(Which::G).unwrap();
    let rho = b.rho_for(Which::G).unwrap();
    let first = check_tame(&g, &rho, &b.config).unwrap();
    let second = check_tame(&g, &rho, &b.config).unwrap();
    assert_eq!(
        serde_json::to_string(&first).unwrap(),
        serde_json::to_string(&second).unwrap()
    );
}

#[test]
fn verdicts_are_stable_across_seeds() {
    let b = bundle("untame_composite");
    let h = b.map(Which::H).unwrap();
    let statuses: Vec<_> = (10..13u64)
        .map(|seed| {
            let cfg = b.config.clone().with_seed(seed);
            check_tame(&h, &b.rho, &cfg).unwrap().status
        })
        .collect();
    assert!(statuses.windows(2).all(|w| w[0] == w[1]), "{statuses:?}");
}

#[test]
fn gradient_degree_is_reproducible() {
    let f = Polynomial::parse("x^3-3*x*y^2", &xy()).unwrap();
    let cfg = AnalysisConfig::default();
    let a = gradient_degree(&f, 0.1, &cfg).unwrap();
    let b = gradient_degree(&f, 0.1, &cfg).unwrap();
    assert_eq!(a, b);
}
