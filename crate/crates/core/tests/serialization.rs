use hilmod_core::fredholm::{k0_class, verify_index_formula};
use hilmod_core::scenarios::{random_fredholm_operator, random_scenario, run_scenario};
use hilmod_core::{
    AdjointableOperator, AlgebraElement, AlgebraShape, K0Class, MatrixOverA,
    Report, Scenario, ScenarioKind, Tolerances,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn shape(d: &[usize]) -> AlgebraShape {
    AlgebraShape::new(d.to_vec()).unwrap()
}

fn round_trip<T>(value: &T) -> T
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    serde_json::from_str(&serde_json::to_string(value).unwrap()).unwrap()
}

#[test]
fn algebra_values_round_trip_exactly() {
    let sh = shape(&[1, 2, 3]);
    assert_eq!(round_trip(&sh), sh);
    let a = AlgebraElement::random(&sh, 4);
    assert_eq!(round_trip(&a), a);
    let m = MatrixOverA::random(&sh, 2, 3, 5);
    assert_eq!(round_trip(&m), m);
    let k = K0Class::new(&sh, vec![1, -2, 0]).unwrap();
    assert_eq!(round_trip(&k), k);
}

#[test]
fn shape_serializes_as_bare_list() {
    assert_eq!(serde_json::to_string(&shape(&[1, 2, 2])).unwrap(), "[1,2,2]");
    assert!(serde_json::from_str::<AlgebraShape>("[0,2]").is_err());
}

#[test]
fn operator_round_trip_preserves_index() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = random_fredholm_operator(&shape(&[1, 2]), 3, 2, &mut rng).unwrap();
    let back: AdjointableOperator = round_trip(&f);
    assert!(back.matrix().distance(f.matrix()).unwrap() < 1e-12);
    assert_eq!(k0_class(back.source(), &tol).unwrap(), k0_class(f.source(), &tol).unwrap());
    let (a, b) = (verify_index_formula(&f, &tol), verify_index_formula(&back, &tol));
    assert!(a.passed() && b.passed());
    assert_eq!(a.index_kernels, b.index_kernels);
}

#[test]
fn scenarios_and_reports_round_trip() {
    for kind in ScenarioKind::ALL {
        let s = random_scenario(kind, 3, &shape(&[1, 2]), &[]);
        let back: Scenario = round_trip(&s);
        assert_eq!(back, s);
        let report = run_scenario(&s).unwrap();
        assert!(report.passed, "{kind}: {:?}", report.flags);
        let again: Report = round_trip(&report);
        assert_eq!(again, report);
        let text = serde_json::to_string(&report).unwrap();
        assert_eq!(text, serde_json::to_string(&run_scenario(&s).unwrap()).unwrap());
    }
}

#[test]
fn scenario_defaults_and_unknown_fields() {
    let s: Scenario =
        serde_json::from_str(r#"{"kind": "duality_suite", "seed": 2, "shape": [2]}"#).unwrap();
    assert_eq!(s.schema, 1);
    assert_eq!(s.samples, 1);
    assert!(run_scenario(&s).unwrap().passed);
    let bad = r#"{"kind": "duality_suite", "seed": 2, "shape": [2], "extra": 1}"#;
    assert!(serde_json::from_str::<Scenario>(bad).is_err());
    let unknown: Scenario =
        serde_json::from_str(r#"{"kind": "nope", "seed": 0, "shape": [1]}"#).unwrap();
    assert!(run_scenario(&unknown).is_err());
}
