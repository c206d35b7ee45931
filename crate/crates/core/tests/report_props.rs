use lyocert::certificates::LogNum;
use lyocert::report::{assemble, complex, integer, log_value, object, render, untagged_numbers, value, vector};
use lyocert::transfer::C64;
use proptest::prelude::*;
use serde_json::Value;

proptest! {
    #[test]
    fn render_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::ZERO, ln in -3000.0f64..3000.0,
                          n in any::<u64>(), re in -1e6f64..1e6, im in -1e6f64..1e6,
                          xs in proptest::collection::vec(-1e3f64..1e3, 0..6)) {
        let results = object(vec![
            ("a", value("ladder.c2", x, &["x"])),
            ("b", log_value("resolvent.kStar", LogNum::from_ln(ln), &[])),
            ("c", integer("ladder.n0", n, &[])),
            ("d", complex("extension.value", C64::new(re, im), &[])),
            ("e", vector("boundary.path", &xs, &[])),
        ]);
        let rep = assemble("certify", object(vec![("seed", n.into())]), results);
        let text = render(&rep);
        let back: Value = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &rep);
        prop_assert_eq!(render(&back), text);
        prop_assert!(untagged_numbers(&back["results"]).is_empty());
        for id in back["formulas"].as_object().unwrap().values() {
            prop_assert!(!id.as_str().unwrap().is_empty());
        }
    }
}

#[test]
fn non_finite_values_become_null() {
    let v = value("ladder.c2", f64::INFINITY, &[]);
    assert!(v["value"].is_null());
    assert!(render(&v).contains("\"value\": null"));
}
