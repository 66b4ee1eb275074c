//! Scalar functions of the logistic reward model.
//!
//! Everything here is pure. Entropies are in nats.
//!
//! * [`logistic`] is the link `e^{βx} / (1 + e^{βx})`.
//! * [`psi`] is the regret of playing an action whose inner product with the
//!   parameter is `1 - x`: `ψ_β(x) = logistic(β, 1) - logistic(β, 1 - x)`.
//! * [`Surrogate`] is the smallest majorant of `ψ_β` whose ratio to `x` is
//!   non-decreasing. It follows `ψ_β` up to the breakpoint `δ_β` (the maximiser
//!   of `ψ_β(x)/x`) and continues linearly along the chord through the origin.
//! * [`limit_psi`] and [`limit_phi`] are the shapes the two curves take as
//!   `β → ∞` after clipping and rescaling.

use serde::{Deserialize, Serialize};

use crate::check::BoundCheck;
use crate::error::{Error, Result};

/// Logistic slope `β`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Slope(f64);

impl Slope {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta > 0.0 {
            Ok(Self(beta))
        } else {
            Err(Error::InvalidSlope(beta))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Slope {
    type Error = Error;

    fn try_from(beta: f64) -> Result<Self> {
        Self::new(beta)
    }
}

impl From<Slope> for f64 {
    fn from(s: Slope) -> f64 {
        s.0
    }
}

/// Standard sigmoid, evaluated on the branch where the exponential cannot overflow.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(sigmoid(z))` without forming `sigmoid(z)`.
#[inline]
pub fn log_sigmoid(z: f64) -> f64 {
    // -softplus(-z)
    -((-z).max(0.0) + (-z.abs()).exp().ln_1p())
}

#[inline]
pub fn logistic(beta: Slope, x: f64) -> f64 {
    sigmoid(beta.0 * x)
}

#[inline]
pub fn psi(beta: Slope, x: f64) -> f64 {
    logistic(beta, 1.0) - logistic(beta, 1.0 - x)
}

/// `d/dx ψ_β(x) = β σ(β(1-x)) σ(-β(1-x))`.
#[inline]
pub fn psi_derivative(beta: Slope, x: f64) -> f64 {
    let z = beta.0 * (1.0 - x);
    beta.0 * sigmoid(z) * sigmoid(-z)
}

/// Maximiser of `ψ_β(x)/x` on `(0, 2]` and the ratio attained there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurrogateBreakpoint {
    pub delta: f64,
    pub ratio_at_delta: f64,
}

impl SurrogateBreakpoint {
    /// `ψ_β(δ_β)`.
    pub fn value_at_delta(&self) -> f64 {
        self.ratio_at_delta * self.delta
    }
}

const BRACKET_POINTS: usize = 1024;
const GOLDEN_MAX_ITER: usize = 400;
const BISECT_MAX_ITER: usize = 200;

/// Constant `c` in the stationarity guarantee `|δ ψ'(δ) - ψ(δ)| <= c * tol`
/// satisfied by [`delta_beta`]: the residual has slope `x ψ''(x)` and
/// `|ψ''| <= β² / (6√3)` on `[0, 2]`, so `c = 1 + β²/5` suffices.
pub fn stationarity_constant(beta: Slope) -> f64 {
    1.0 + beta.0 * beta.0 / 5.0
}

/// Locate `δ_β = argmax_{x ∈ (0, 2]} ψ_β(x)/x` to within `tol`.
///
/// A 1024-point grid brackets the maximum, golden-section search narrows the
/// bracket to `tol`, and the result is polished by bisection on the
/// stationarity residual `x ψ'(x) - ψ(x)`, which changes sign exactly once
/// (from positive to negative) on `(1, 2]`.
pub fn delta_beta(beta: Slope, tol: f64) -> Result<SurrogateBreakpoint> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let ratio = |x: f64| psi(beta, x) / x;
    let h = 2.0 / BRACKET_POINTS as f64;

    let (best_k, _) =
        (1..=BRACKET_POINTS)
            .map(|k| (k, ratio(k as f64 * h)))
            .fold(
                (1, f64::NEG_INFINITY),
                |acc, (k, r)| if r > acc.1 { (k, r) } else { acc },
            );
    let mut lo = (best_k - 1) as f64 * h;
    let mut hi = ((best_k + 1) as f64 * h).min(2.0);
    // The ratio is not defined at 0; stay strictly inside.
    if lo <= 0.0 {
        lo = h * 1e-3;
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = lo;
    let mut b = hi;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (ratio(c), ratio(d));
    let mut iter = 0;
    while b - a > tol {
        iter += 1;
        if iter > GOLDEN_MAX_ITER {
            return Err(Error::BreakpointNoConvergence {
                beta: beta.0,
                iterations: iter,
            });
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = ratio(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = ratio(d);
        }
    }
    let mut delta = 0.5 * (a + b);

    // Bisection polish on the stationarity residual.
    let residual = |x: f64| x * psi_derivative(beta, x) - psi(beta, x);
    if hi >= 2.0 && residual(2.0) >= 0.0 {
        delta = 2.0;
    } else {
        lo = lo.max(1.0);
        if residual(lo) > 0.0 && residual(hi) < 0.0 {
            let mut iter = 0;
            // Bisect to machine resolution; the loop exits once the midpoint
            // stops moving.
            loop {
                iter += 1;
                if iter > BISECT_MAX_ITER {
                    return Err(Error::BreakpointNoConvergence {
                        beta: beta.0,
                        iterations: iter,
                    });
                }
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if residual(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            delta = 0.5 * (lo + hi);
        }
    }

    Ok(SurrogateBreakpoint {
        delta,
        ratio_at_delta: psi(beta, delta) / delta,
    })
}

/// Evaluate the logistic surrogate for a given breakpoint.
#[inline]
pub fn surrogate(beta: Slope, bp: &SurrogateBreakpoint, x: f64) -> f64 {
    if x <= bp.delta {
        psi(beta, x)
    } else {
        bp.value_at_delta() + (x - bp.delta) * bp.ratio_at_delta
    }
}

/// A slope paired with its breakpoint, so the surrogate can be evaluated
/// repeatedly without re-solving for `δ_β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Surrogate {
    pub beta: Slope,
    pub breakpoint: SurrogateBreakpoint,
}

impl Surrogate {
    pub const DEFAULT_TOL: f64 = 1e-10;

    pub fn new(beta: Slope) -> Result<Self> {
        Ok(Self {
            beta,
            breakpoint: delta_beta(beta, Self::DEFAULT_TOL)?,
        })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        surrogate(self.beta, &self.breakpoint, x)
    }
}

/// `β → ∞` limit of the rescaled `ψ_β`: an indicator of `x > 1`.
#[inline]
pub fn limit_psi(x: f64) -> f64 {
    if x > 1.0 {
        1.0
    } else {
        0.0
    }
}

/// `β → ∞` limit of the rescaled surrogate: `1 + 2(x - 1)` past `x = 1`.
#[inline]
pub fn limit_phi(x: f64) -> f64 {
    if x > 1.0 {
        1.0 + 2.0 * (x - 1.0)
    } else {
        0.0
    }
}

/// Binary entropy in nats, with `0 log 0 = 0`.
#[inline]
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.ln() - (1.0 - p) * (-p).ln_1p()
}

/// `h₂'(p) = log((1-p)/p)` for `p ∈ (0, 1)`.
#[inline]
pub fn binary_entropy_derivative(p: f64) -> f64 {
    (-p).ln_1p() - p.ln()
}

/// `log P(R = r | a, θ)` under the logistic model.
pub fn log_likelihood(beta: Slope, action: &[f64], theta: &[f64], reward: u8) -> f64 {
    let z = beta.0 * crate::geometry::dot(action, theta);
    if reward == 1 {
        log_sigmoid(z)
    } else {
        log_sigmoid(-z)
    }
}

/// Compare `|log f(r|a,θ₁) - log f(r|a,θ₂)|` against `β ‖θ₁ - θ₂‖₂`.
pub fn loglik_lipschitz_check(
    beta: Slope,
    action: &[f64],
    theta1: &[f64],
    theta2: &[f64],
    reward: u8,
) -> BoundCheck {
    let lhs =
        (log_likelihood(beta, action, theta1, reward) - log_likelihood(beta, action, theta2, reward)).abs();
    let rhs = beta.0 * crate::geometry::distance(theta1, theta2);
    BoundCheck::le(lhs, rhs, 1e-12)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn b(beta: f64) -> Slope {
        Slope::new(beta).unwrap()
    }

    #[test]
    fn slope_rejects_nonpositive() {
        assert!(Slope::new(0.0).is_err());
        assert!(Slope::new(-1.0).is_err());
        assert!(Slope::new(f64::NAN).is_err());
        assert!(Slope::new(f64::INFINITY).is_err());
    }

    #[test]
    fn logistic_values() {
        for beta in [0.1, 1.0, 7.0] {
            assert_eq!(logistic(b(beta), 0.0), 0.5);
        }
        assert_abs_diff_eq!(logistic(b(1.0), 1.0), 0.731_058_578_630_004_9, epsilon = 1e-15);
        assert_abs_diff_eq!(
            logistic(b(2.0), -1.0),
            1.0 - logistic(b(2.0), 1.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn logistic_is_stable_at_extreme_slopes() {
        let beta = b(1e4);
        let mut prev = 0.0;
        for k in 0..=2000 {
            let x = -1.0 + k as f64 * 1e-3;
            let p = logistic(beta, x);
            assert!(p.is_finite() && (0.0..=1.0).contains(&p));
            assert!(p >= prev);
            prev = p;
        }
        // Open-interval values are only representable while the tail exceeds
        // the f64 resolution.
        let p = logistic(b(30.0), 1.0);
        assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn log_sigmoid_matches_direct() {
        for z in [-30.0, -3.0, -0.1, 0.0, 0.4, 5.0, 30.0] {
            assert_abs_diff_eq!(log_sigmoid(z), sigmoid(z).ln(), epsilon = 1e-12);
        }
        assert!(log_sigmoid(-1e4).is_finite());
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(b(3.0), 0.0), 0.0);
        assert_abs_diff_eq!(psi(b(2.0), 2.0), 0.761_594_155_955_764_9, epsilon = 1e-15);
        assert_abs_diff_eq!(psi(b(1.0), 1.0), 0.231_058_578_630_004_9, epsilon = 1e-15);
    }

    #[test]
    fn psi_derivative_matches_finite_differences() {
        for beta in [0.5, 2.0, 20.0] {
            for x in [0.1, 0.7, 1.0, 1.3, 1.9] {
                let h = 1e-6;
                let fd = (psi(b(beta), x + h) - psi(b(beta), x - h)) / (2.0 * h);
                assert_abs_diff_eq!(psi_derivative(b(beta), x), fd, epsilon = 1e-6 * beta.max(1.0));
            }
        }
    }

    /// Dense-grid oracle for the maximiser of `ψ_β(x)/x`.
    fn grid_argmax(beta: f64, points: usize) -> f64 {
        let s = |z: f64| 1.0 / (1.0 + (-z).exp());
        let mut best = (0.0, f64::NEG_INFINITY);
        for k in 1..=points {
            let x = 2.0 * k as f64 / points as f64;
            let r = (s(beta) - s(beta * (1.0 - x))) / x;
            if r > best.1 {
                best = (x, r);
            }
        }
        best.0
    }

    #[test]
    fn delta_beta_matches_grid_oracle() {
        let oracle = grid_argmax(1.0, 1_000_000);
        let bp = delta_beta(b(1.0), 1e-8).unwrap();
        assert!((bp.delta - 1.5).abs() <= 0.05);
        assert!((bp.delta - oracle).abs() < 1e-5, "{} vs {}", bp.delta, oracle);
        // high-precision reference 1.48810891851158...
        assert_abs_diff_eq!(bp.delta, 1.488_108_918_511_580_6, epsilon = 1e-9);
    }

    #[test]
    fn delta_beta_satisfies_stationarity() {
        for beta in [0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0, 200.0] {
            let tol = 1e-10;
            let bp = delta_beta(b(beta), tol).unwrap();
            let res = bp.delta * psi_derivative(b(beta), bp.delta) - psi(b(beta), bp.delta);
            assert!(
                res.abs() <= stationarity_constant(b(beta)) * tol,
                "beta {beta}: residual {res}"
            );
            assert!(bp.delta > 1.0 && bp.delta <= 2.0);
            assert_abs_diff_eq!(bp.ratio_at_delta, psi(b(beta), bp.delta) / bp.delta);
        }
    }

    #[test]
    fn delta_beta_reference_values() {
        // mpmath root of x ψ'(x) = ψ(x) at 40 digits
        let refs = [
            (0.5, 1.496_914_826_423_432_3, 0.123_090_578_906_956_8),
            (2.0, 1.458_299_385_147_184_1, 0.408_109_376_688_393),
            (32.0, 1.110_693_163_166_022_6, 0.875_007_111_722_375_3),
        ];
        for (beta, delta, ratio) in refs {
            let bp = delta_beta(b(beta), 1e-12).unwrap();
            assert_abs_diff_eq!(bp.delta, delta, epsilon = 1e-9);
            assert_abs_diff_eq!(bp.ratio_at_delta, ratio, epsilon = 1e-12);
        }
    }

    #[test]
    fn delta_beta_decreases_towards_one() {
        let d05 = delta_beta(b(0.5), 1e-10).unwrap().delta;
        let d2 = delta_beta(b(2.0), 1e-10).unwrap().delta;
        let d10 = delta_beta(b(10.0), 1e-10).unwrap().delta;
        let d200 = delta_beta(b(200.0), 1e-10).unwrap().delta;
        assert!(d05 > d2 && d2 > d10 && d10 > d200);
        assert!(d200 > 1.0 && d200 < 1.05, "{d200}");
    }

    #[test]
    fn delta_beta_rejects_bad_tolerance() {
        assert!(delta_beta(b(1.0), 0.0).is_err());
        assert!(delta_beta(b(1.0), f64::NAN).is_err());
    }

    #[test]
    fn surrogate_values() {
        let s = Surrogate::new(b(1.0)).unwrap();
        assert_eq!(s.eval(0.0), 0.0);
        let d = s.breakpoint.delta;
        assert_abs_diff_eq!(s.eval(d), psi(b(1.0), d), epsilon = 1e-15);
        // linear branch through the grid-oracle breakpoint
        let oracle_delta = grid_argmax(1.0, 1_000_000);
        let oracle = psi(b(1.0), oracle_delta) * 2.0 / oracle_delta;
        assert_abs_diff_eq!(s.eval(2.0), oracle, epsilon = 1e-9);
        assert_abs_diff_eq!(s.eval(2.0), 0.471_362_566_359_848_2, epsilon = 1e-12);
    }

    #[test]
    fn surrogate_is_continuous_at_breakpoint() {
        for beta in [0.3, 4.0, 60.0] {
            let s = Surrogate::new(b(beta)).unwrap();
            let d = s.breakpoint.delta;
            assert_abs_diff_eq!(s.eval(d - 1e-12), s.eval(d + 1e-12), epsilon = 1e-9);
        }
    }

    #[test]
    fn limit_functions() {
        assert_eq!(limit_psi(0.5), 0.0);
        assert_eq!(limit_phi(0.5), 0.0);
        assert_eq!(limit_psi(1.0), 0.0);
        assert_eq!(limit_phi(1.0), 0.0);
        assert_eq!(limit_psi(1.5), 1.0);
        assert_eq!(limit_phi(1.5), 2.0);
        assert_eq!(limit_phi(2.0), 3.0);
    }

    #[test]
    fn binary_entropy_values() {
        assert_abs_diff_eq!(binary_entropy(0.5), std::f64::consts::LN_2, epsilon = 1e-15);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert_abs_diff_eq!(binary_entropy(0.25), 0.562_335_144_618_808_4, epsilon = 1e-15);
        assert_abs_diff_eq!(binary_entropy(0.3), binary_entropy(0.7), epsilon = 1e-15);
    }

    #[test]
    fn binary_entropy_taylor_bound() {
        let n = 300;
        for i in 0..=n {
            let x = i as f64 / n as f64;
            for j in 1..n {
                let p = j as f64 / n as f64;
                let rhs =
                    binary_entropy(p) + (x - p) * binary_entropy_derivative(p) - 2.0 * (x - p) * (x - p);
                assert!(binary_entropy(x) <= rhs + 1e-12, "x={x} p={p}");
            }
        }
    }

    #[test]
    fn lipschitz_trivial_cases() {
        let beta = b(5.0);
        let t = [0.6, 0.8, 0.0];
        let c = loglik_lipschitz_check(beta, &[0.1, 0.2, 0.3], &t, &t, 1);
        assert!(c.holds);
        assert_eq!(c.lhs, 0.0);
        assert_eq!(c.rhs, 0.0);
        let c = loglik_lipschitz_check(beta, &[0.0; 3], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 0);
        assert!(c.holds);
        assert_eq!(c.lhs, 0.0);
    }
}
