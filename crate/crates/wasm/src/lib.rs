//! wasm-bindgen exports for the browser demo. Every function returns a JSON
//! string, or throws a string on bad input.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use logistic_ts::agent::Posterior;
use logistic_ts::geometry::UnitVector;
use logistic_ts::harness::figures::curve;
use logistic_ts::harness::scan::{random_posterior, Family};
use logistic_ts::harness::{regret_bound_main, run_experiment, ExperimentConfig};
use logistic_ts::math::Surrogate;
use logistic_ts::metrics::{information_ratio, InfoRatioReport};
use logistic_ts::rng::{Purpose, StreamTree};
use logistic_ts::{Error, Slope};

const MAX_RESOLUTION: usize = 5_000;
const MAX_ATOMS: usize = 400;
const MAX_WORK: usize = 100_000_000;

fn fail(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn json<T: Serialize>(v: &T) -> Result<String, JsValue> {
    serde_json::to_string(v).map_err(fail)
}

#[derive(Serialize)]
struct Curves {
    beta: f64,
    delta: f64,
    ratio_at_delta: f64,
    x: Vec<f64>,
    psi: Vec<f64>,
    surrogate: Vec<f64>,
}

/// `ψ_β` and its surrogate on `[0, 2]`.
#[wasm_bindgen]
pub fn psi_curves(beta: f64, resolution: usize) -> Result<String, JsValue> {
    let slope = Slope::new(beta).map_err(fail)?;
    if resolution > MAX_RESOLUTION {
        return Err(fail(format!("resolution is capped at {MAX_RESOLUTION}")));
    }
    let s = Surrogate::new(slope).map_err(fail)?;
    let pts = curve(slope, resolution).map_err(fail)?;
    json(&Curves {
        beta,
        delta: s.breakpoint.delta,
        ratio_at_delta: s.breakpoint.ratio_at_delta,
        x: pts.iter().map(|p| p.x).collect(),
        psi: pts.iter().map(|p| p.psi).collect(),
        surrogate: pts.iter().map(|p| p.surrogate).collect(),
    })
}

#[derive(Serialize)]
struct RatioOut {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
    #[serde(flatten)]
    report: InfoRatioReport,
}

fn family(name: &str) -> Result<Family, JsValue> {
    Ok(match name {
        "random" => Family::Random,
        "clustered" => Family::Clustered,
        "antipodal" => Family::Antipodal,
        "near_point_mass" => Family::NearPointMass,
        "simplex" => Family::Simplex,
        "cross_polytope" => Family::CrossPolytope,
        "antipodal_clusters" => Family::AntipodalClusters,
        other => return Err(fail(format!("unknown family {other:?}"))),
    })
}

fn ratio_out(post: &Posterior, beta: Slope) -> Result<String, JsValue> {
    json(&RatioOut {
        atoms: post.atoms().iter().map(|a| a.coords().to_vec()).collect(),
        weights: post.weights().to_vec(),
        report: information_ratio(post, beta, post.dim()),
    })
}

/// Information ratio of a two-atom posterior in the plane: atoms at angles 0
/// and `angle` (radians), the first with mass `weight`.
#[wasm_bindgen]
pub fn info_ratio_two_atom(beta: f64, angle: f64, weight: f64) -> Result<String, JsValue> {
    let slope = Slope::new(beta).map_err(fail)?;
    if !(0.0..=1.0).contains(&weight) {
        return Err(fail("weight must lie in [0, 1]"));
    }
    let a = UnitVector::basis(2, 0);
    let b = UnitVector::normalize(vec![angle.cos(), angle.sin()]).map_err(fail)?;
    let post = Posterior::new(vec![a, b], vec![weight, 1.0 - weight]).map_err(fail)?;
    ratio_out(&post, slope)
}

/// Information ratio of a seeded random posterior with at most `n` atoms.
#[wasm_bindgen]
pub fn info_ratio_random(kind: &str, dim: usize, beta: f64, n: usize, seed: u64) -> Result<String, JsValue> {
    let slope = Slope::new(beta).map_err(fail)?;
    if dim == 0 || !(2..=MAX_ATOMS).contains(&n) {
        return Err(fail(format!("need dim >= 1 and 2 <= n <= {MAX_ATOMS}")));
    }
    let mut rng = StreamTree::new(seed).stream(0, Purpose::Scan);
    let post = random_posterior(family(kind)?, dim, 2, n, &mut rng);
    ratio_out(&post, slope)
}

#[derive(Serialize)]
struct RegretOut {
    mean_regret: Vec<f64>,
    bound: Vec<f64>,
    final_mean: f64,
    final_stderr: f64,
}

/// Mean cumulative expected regret of Thompson Sampling under a uniform prior
/// on the sphere, with the closed-form bound at every step.
#[wasm_bindgen]
pub fn regret_curve(
    dim: usize,
    beta: f64,
    horizon: usize,
    episodes: usize,
    particles: usize,
    seed: u64,
) -> Result<String, JsValue> {
    let slope = Slope::new(beta).map_err(fail)?;
    if episodes.saturating_mul(horizon).saturating_mul(particles) > MAX_WORK {
        return Err(fail(
            "episodes x horizon x particles is too large for the browser",
        ));
    }
    let mut cfg = ExperimentConfig::new(dim, slope, horizon);
    cfg.episodes = episodes;
    cfg.particles = particles;
    cfg.seed = seed;
    cfg.metrics_every = 0;
    cfg.net_budget = 0;
    let report = run_experiment(&cfg).map_err(|e: Error| fail(e))?;
    json(&RegretOut {
        mean_regret: report.trace.mean_cumulative_expected(horizon),
        bound: (1..=horizon).map(|t| regret_bound_main(dim, beta, t)).collect(),
        final_mean: report.summary.mean_cum_regret_expected,
        final_stderr: report.summary.stderr_cum_regret_expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_have_requested_length() {
        let v: serde_json::Value = serde_json::from_str(&psi_curves(2.0, 11).unwrap()).unwrap();
        assert_eq!(v["x"].as_array().unwrap().len(), 11);
        assert!(v["delta"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn antipodal_pair_has_finite_ratio() {
        let v: serde_json::Value =
            serde_json::from_str(&info_ratio_two_atom(2.0, std::f64::consts::PI, 0.5).unwrap()).unwrap();
        let g = v["gamma"].as_f64().unwrap();
        assert!(g > 0.0 && g <= v["bound"].as_f64().unwrap());
    }

    #[test]
    fn regret_curve_is_monotone() {
        let v: serde_json::Value =
            serde_json::from_str(&regret_curve(2, 2.0, 30, 3, 50, 7).unwrap()).unwrap();
        let m: Vec<f64> = v["mean_regret"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        assert_eq!(m.len(), 30);
        assert!(m.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }
}
