//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export returns a JSON string; the `*_json` functions hold the logic
//! so it can be tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use hsmoments::bloore::intermediate;
use hsmoments::ensemble::{Family, Target};
use hsmoments::exactnum::{format_rat, rat_to_f64, Rat};
use hsmoments::moments::{det_moments, pt_moments, MAX_PT_ORDER};
use hsmoments::reconstruct::{
    fit_poly_density, map_moments, negative_mass, poly_curve, stable_curve, Curve,
};
use hsmoments::sampler::{exact_moment, sample_values};

/// Largest sample count accepted by `mc_histogram`.
pub const MAX_DEMO_SAMPLES: usize = 2_000_000;

#[derive(Serialize)]
struct IntermediateCurves {
    mu: Vec<f64>,
    /// One curve per order `1..=max_m`.
    curves: Vec<Vec<f64>>,
}

/// `I_m(mu)` for `m = 1..=max_m` on `points` values of `mu` in `[0, mu_max]`.
pub fn intermediate_curves_json(max_m: u32, mu_max: f64, points: usize) -> Result<String, String> {
    if !(1..=9).contains(&max_m) {
        return Err("orders 1..=9 are tabulated".into());
    }
    if !(mu_max > 0.0) || points < 2 {
        return Err("need mu_max > 0 and at least 2 points".into());
    }
    let mu: Vec<f64> = (0..points).map(|i| mu_max * i as f64 / (points - 1) as f64).collect();
    let curves = (1..=max_m)
        .map(|m| {
            let poly = intermediate(m).map_err(|e| e.to_string())?;
            Ok(mu.iter().map(|&x| poly.eval_f64(x)).collect())
        })
        .collect::<Result<_, String>>()?;
    serde_json::to_string(&IntermediateCurves { mu, curves }).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Reconstruction {
    curve: Curve,
    support: [String; 2],
    negative_mass: Option<f64>,
}

/// Density of `det(rho)` (real, `target = "det"`) or `det(rho^PT)`
/// (`"detPT"`) from exact moments, by `method` `"poly"` or `"stable"`.
pub fn reconstruct_json(target: &str, method: &str, order: u32, points: usize) -> Result<String, String> {
    let target: Target = target.parse()?;
    let mv = match target {
        Target::DetPt if order > MAX_PT_ORDER => {
            return Err(format!("detPT moments are available up to order {MAX_PT_ORDER}"))
        }
        Target::DetPt => pt_moments(order).map_err(|e| e.to_string())?,
        Target::Det => det_moments(Family::Real, order),
    };
    let mapped = map_moments(&mv).map_err(|e| e.to_string())?;
    let (curve, negative) = match method {
        "poly" => {
            let pd = fit_poly_density(&mapped, order as usize).map_err(|e| e.to_string())?;
            let nm = negative_mass(&pd).map_err(|e| e.to_string())?;
            (poly_curve(&pd, points), Some(nm.below))
        }
        "stable" => (stable_curve(&mapped, order, points).map_err(|e| e.to_string())?, None),
        other => return Err(format!("unknown method {other:?} (poly, stable)")),
    };
    let (a, b): &(Rat, Rat) = mv.support();
    serde_json::to_string(&Reconstruction {
        curve,
        support: [format_rat(a), format_rat(b)],
        negative_mass: negative,
    })
    .map_err(|e| e.to_string())
}

#[derive(Serialize, Debug, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Equal-width histogram over `[lo, hi]`; values outside are clamped into
/// the end bins.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Histogram {
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0; bins];
    for &v in values {
        let i = ((v - lo) / width).floor().clamp(0.0, (bins - 1) as f64) as usize;
        counts[i] += 1;
    }
    let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
    Histogram { edges, counts }
}

#[derive(Serialize)]
struct McHistogram {
    histogram: Histogram,
    mean: f64,
    exact_mean: Option<f64>,
    nonnegative_fraction: f64,
}

/// Histogram of `samples` Monte Carlo draws of the target determinant.
pub fn mc_histogram_json(
    target: &str,
    family: &str,
    dims: usize,
    samples: usize,
    seed: u64,
    bins: usize,
) -> Result<String, String> {
    let target: Target = target.parse()?;
    let family: Family = family.parse()?;
    if samples == 0 || samples > MAX_DEMO_SAMPLES || bins == 0 {
        return Err(format!("need 1..={MAX_DEMO_SAMPLES} samples and at least one bin"));
    }
    let values = sample_values(target, family, dims, samples, seed).map_err(|e| e.to_string())?;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let hist = histogram(&values, lo, if hi > lo { hi } else { lo + 1e-12 }, bins);
    serde_json::to_string(&McHistogram {
        histogram: hist,
        mean: values.iter().sum::<f64>() / samples as f64,
        exact_mean: exact_moment(family, dims, target, 1).map(|r| rat_to_f64(&r)),
        nonnegative_fraction: values.iter().filter(|&&v| v >= 0.0).count() as f64 / samples as f64,
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn intermediate_curves(max_m: u32, mu_max: f64, points: usize) -> Result<String, JsError> {
    intermediate_curves_json(max_m, mu_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn reconstruct(target: &str, method: &str, order: u32, points: usize) -> Result<String, JsError> {
    reconstruct_json(target, method, order, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn mc_histogram(
    target: &str,
    family: &str,
    dims: usize,
    samples: usize,
    seed: u64,
    bins: usize,
) -> Result<String, JsError> {
    mc_histogram_json(target, family, dims, samples, seed, bins).map_err(|e| JsError::new(&e))
}
