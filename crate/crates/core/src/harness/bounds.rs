//! Closed-form regret bounds and the net-size bookkeeping behind them.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{build_eps_net, covering_number_bounds, net_entropy_bound, EpsNet};
use crate::metrics::info_ratio_bound;

/// `3 d √(T · log √(3 + 6βT/d))`.
pub fn regret_bound_main(d: usize, beta: f64, horizon: usize) -> f64 {
    let (d, t) = (d as f64, horizon as f64);
    3.0 * d * (t * (3.0 + 6.0 * beta * t / d).sqrt().ln()).sqrt()
}

/// `√(Γ T (H + εβT))`.
pub fn regret_bound_quantized(gamma: f64, horizon: usize, entropy: f64, epsilon: f64, beta: f64) -> f64 {
    let t = horizon as f64;
    (gamma * t * (entropy + epsilon * beta * t)).sqrt()
}

/// `d/(βT)` clipped to `(0, 2]`.
pub fn default_epsilon(d: usize, beta: f64, horizon: usize) -> f64 {
    if horizon == 0 {
        return 2.0;
    }
    (d as f64 / (beta * horizon as f64)).min(2.0)
}

/// `Γ(k/2)` for a positive integer `k`.
fn gamma_half(k: usize) -> f64 {
    let mut x = if k.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut a = if k.is_multiple_of(2) { 1.0 } else { 0.5 };
    while a < k as f64 / 2.0 - 1e-9 {
        x *= a;
        a += 1.0;
    }
    x
}

/// Rough size of a greedy ε-packing of `S_{d-1}`: sphere area divided by the
/// flat area of a cap of radius ε/2.
pub fn estimated_net_size(d: usize, epsilon: f64) -> f64 {
    if epsilon >= 2.0 {
        return 1.0;
    }
    if d == 1 {
        return 2.0;
    }
    let area = 2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d);
    let k = (d - 1) as f64;
    let cap = PI.powf(k / 2.0) * (epsilon / 2.0).powf(k) / gamma_half(d + 1);
    (area / cap).max(1.0)
}

/// Default largest net [`entropy_bound`] will try to build.
pub const NET_BUDGET: usize = 20_000;

/// Where an entropy bound came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropySource {
    /// `log |net|` of a constructed net.
    Net,
    /// `d · log(1 + 2/ε)` from the covering-number bound.
    CoveringBound,
}

impl EntropySource {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Net => "net",
            Self::CoveringBound => "covering_bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyBound {
    pub value: f64,
    pub source: EntropySource,
    pub net_size: Option<usize>,
    pub empirical_radius: Option<f64>,
}

/// Bound on `H(Θ_ε)`: `log |net|` when a net with at most `budget` atoms is
/// expected, otherwise the covering bound.
pub fn entropy_bound<R: Rng + ?Sized>(
    d: usize,
    epsilon: f64,
    budget: usize,
    rng: &mut R,
) -> Result<EntropyBound> {
    if estimated_net_size(d, epsilon) <= budget as f64 {
        let net = build_eps_net(d, epsilon, rng)?;
        Ok(from_net(&net))
    } else {
        Ok(EntropyBound {
            value: covering_number_bounds(d, epsilon).1.ln(),
            source: EntropySource::CoveringBound,
            net_size: None,
            empirical_radius: None,
        })
    }
}

pub fn from_net(net: &EpsNet) -> EntropyBound {
    EntropyBound {
        value: net_entropy_bound(net),
        source: EntropySource::Net,
        net_size: Some(net.len()),
        empirical_radius: net.coverage.map(|c| c.empirical_radius),
    }
}

/// One line of the `bounds` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsRow {
    pub d: usize,
    pub beta: f64,
    pub horizon: usize,
    pub epsilon: f64,
    pub bound_main: f64,
    pub bound_quantized: f64,
    pub net_size: Option<usize>,
    pub entropy_bound: f64,
    pub entropy_source: EntropySource,
}

impl BoundsRow {
    pub fn new(d: usize, beta: f64, horizon: usize, epsilon: f64, entropy: &EntropyBound) -> Self {
        Self {
            d,
            beta,
            horizon,
            epsilon,
            bound_main: regret_bound_main(d, beta, horizon),
            bound_quantized: regret_bound_quantized(
                info_ratio_bound(d),
                horizon,
                entropy.value,
                epsilon,
                beta,
            ),
            net_size: entropy.net_size,
            entropy_bound: entropy.value,
            entropy_source: entropy.source,
        }
    }
}
