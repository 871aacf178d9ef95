use serde_json::Value;
use vqalab_demo::{bounds_curve, noise_contraction, vqe_scan};

fn parse(s: Result<String, wasm_bindgen::JsError>) -> Vec<Value> {
    match s {
        Ok(text) => serde_json::from_str::<Vec<Value>>(&text).unwrap(),
        Err(_) => panic!("binding returned an error"),
    }
}

#[test]
fn bounds_curve_grows_with_depth_and_shrinks_with_noise() {
    let pts = parse(bounds_curve(7, 4, 0.05, 0.1));
    assert_eq!(pts.len(), 4);
    let ideal: Vec<f64> = pts.iter().map(|p| p["ln_ideal"].as_f64().unwrap()).collect();
    assert!(ideal.windows(2).all(|w| w[1] > w[0]));
    for p in &pts {
        assert!(p["ln_depolarizing"].as_f64().unwrap() < p["ln_ideal"].as_f64().unwrap());
    }
}

#[test]
fn noise_contraction_agrees_with_closed_form() {
    for p in parse(noise_contraction(0.05, 3, 1)) {
        let (a, b) = (p["exact"].as_f64().unwrap(), p["closed_form"].as_f64().unwrap());
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn vqe_scan_covers_the_table() {
    let pts = parse(vqe_scan("restricted", 0));
    assert_eq!(pts.len(), 20);
    for p in &pts {
        assert!(p["vqe"].as_f64().unwrap() >= p["exact"].as_f64().unwrap() - 1e-9);
    }
}
