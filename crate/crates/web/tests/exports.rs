use hsmoments_web::{histogram, intermediate_curves_json, mc_histogram_json, reconstruct_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn intermediate_curves_start_at_the_constant_term() {
    let v = parse(intermediate_curves_json(2, 2.0, 5).unwrap());
    assert_eq!(v["mu"].as_array().unwrap().len(), 5);
    assert_eq!(v["curves"].as_array().unwrap().len(), 2);
    assert_eq!(v["curves"][0][0].as_f64().unwrap(), -0.2);
    assert!((v["curves"][0][4].as_f64().unwrap() + 289.0 / 125.0).abs() < 1e-12);
    assert!(intermediate_curves_json(10, 1.0, 5).is_err());
    assert!(intermediate_curves_json(1, 0.0, 5).is_err());
}

#[test]
fn reconstructions() {
    let v = parse(reconstruct_json("detPT", "poly", 9, 11).unwrap());
    assert_eq!(v["support"], serde_json::json!(["-1/16", "1/256"]));
    assert_eq!(v["curve"]["x"].as_array().unwrap().len(), 11);
    assert!(v["negative_mass"].as_f64().unwrap() > 0.0);
    let v = parse(reconstruct_json("det", "stable", 24, 11).unwrap());
    assert!(v["negative_mass"].is_null());
    assert!(reconstruct_json("detPT", "poly", 10, 11).is_err());
    assert!(reconstruct_json("det", "spline", 4, 11).is_err());
}

#[test]
fn histograms() {
    let h = histogram(&[0.0, 0.1, 0.5, 0.99, 1.0, 2.0], 0.0, 1.0, 2);
    assert_eq!(h.edges, vec![0.0, 0.5, 1.0]);
    assert_eq!(h.counts, vec![2, 4]);

    let v = parse(mc_histogram_json("det", "real", 4, 20_000, 3, 40).unwrap());
    let counts: u64 = v["histogram"]["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum();
    assert_eq!(counts, 20_000);
    assert_eq!(v["exact_mean"].as_f64().unwrap(), 1.0 / 2288.0);
    assert_eq!(v["nonnegative_fraction"].as_f64().unwrap(), 1.0);
    assert!(mc_histogram_json("detPT", "quaternion", 4, 10, 0, 4).is_err());
    assert!(mc_histogram_json("det", "octonion", 4, 10, 0, 4).is_err());
}
