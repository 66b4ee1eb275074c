//! Exact information-ratio quantities on finite posteriors.
//!
//! For Thompson Sampling the sampled parameter `Θ̂` and the true parameter `Θ`
//! are i.i.d. draws from the current posterior, and the played action is `Θ̂`
//! itself. With atoms `a_i` and weights `w_i` every expectation below is an
//! exact double sum over `(Θ, Θ̂) = (a_i, a_j)`:
//!
//! * expected regret `Σ_ij w_i w_j ψ_β(1 - ⟨a_i, a_j⟩)`;
//! * mutual information `I(Θ; R | Θ̂) = Σ_j w_j [h₂(Σ_i w_i p_ij) - Σ_i w_i h₂(p_ij)]`
//!   with `p_ij = logistic(β, ⟨a_j, a_i⟩)`. Because `Θ` and `Θ̂` are
//!   independent this equals `I(Θ; R, Θ̂)`;
//! * `Γ = regret² / I`.
//!
//! The remaining functions evaluate both sides of the inequalities that bound
//! `Γ` by `4.5 d`, so each step of that chain can be checked separately.

use serde::Serialize;

use crate::agent::Posterior;
use crate::check::BoundCheck;
use crate::error::Result;
use crate::geometry::dot;
use crate::math::{binary_entropy, limit_phi, limit_psi, logistic, psi, Slope, Surrogate};

/// Mutual information at or below this is treated as zero.
pub const MI_FLOOR: f64 = 1e-14;
/// Tolerance for algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Tolerance for inequality checks after O(N²) summation.
pub const BOUND_TOL: f64 = 1e-9;

/// `Θ` and `Θ̂` i.i.d. from the same weights.
pub type DiscreteJoint = Posterior;

/// `9/2 · d`.
pub fn info_ratio_bound(d: usize) -> f64 {
    4.5 * d as f64
}

/// Weights plus the Gram matrix of the atoms.
pub struct Pairwise<'a> {
    weights: &'a [f64],
    gram: Vec<f64>,
    n: usize,
}

impl<'a> Pairwise<'a> {
    pub fn new(post: &'a Posterior) -> Self {
        let atoms = post.atoms();
        let n = atoms.len();
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let g = if i == j { 1.0 } else { dot(&atoms[i], &atoms[j]) };
                gram[i * n + j] = g;
                gram[j * n + i] = g;
            }
        }
        Self {
            weights: post.weights(),
            gram,
            n,
        }
    }

    #[inline]
    fn inner(&self, i: usize, j: usize) -> f64 {
        self.gram[i * self.n + j]
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.gram[i * self.n..(i + 1) * self.n]
    }

    pub fn expected_regret(&self, beta: Slope) -> f64 {
        let w = self.weights;
        let mut total = 0.0;
        for i in 0..self.n {
            if w[i] == 0.0 {
                continue;
            }
            let inner: f64 = self
                .row(i)
                .iter()
                .zip(w)
                .map(|(g, wj)| wj * psi(beta, 1.0 - g))
                .sum();
            total += w[i] * inner;
        }
        total.max(0.0)
    }

    pub fn mutual_information(&self, beta: Slope) -> f64 {
        let w = self.weights;
        let mut total = 0.0;
        // j indexes the played action Θ̂, i the true parameter Θ.
        for j in 0..self.n {
            if w[j] == 0.0 {
                continue;
            }
            let mut mean = 0.0;
            let mut mean_h = 0.0;
            for (g, wi) in self.row(j).iter().zip(w) {
                let p = logistic(beta, *g);
                mean += wi * p;
                mean_h += wi * binary_entropy(p);
            }
            total += w[j] * (binary_entropy(mean) - mean_h).max(0.0);
        }
        total
    }

    /// `E_Θ[ Var_Θ̂[ g(1 - ⟨Θ̂, Θ⟩) | Θ ] ]`, two-pass per `Θ`.
    pub fn expected_conditional_variance<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        let w = self.weights;
        let mut vals = vec![0.0; self.n];
        let mut total = 0.0;
        for i in 0..self.n {
            if w[i] == 0.0 {
                continue;
            }
            for (v, inner) in vals.iter_mut().zip(self.row(i)) {
                *v = g(1.0 - inner);
            }
            let mean: f64 = vals.iter().zip(w).map(|(v, wj)| wj * v).sum();
            let var: f64 = vals
                .iter()
                .zip(w)
                .map(|(v, wj)| wj * (v - mean) * (v - mean))
                .sum();
            total += w[i] * var;
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfoRatioReport {
    pub step: usize,
    pub expected_regret: f64,
    pub mutual_info: f64,
    /// `None` when the mutual information is at most [`MI_FLOOR`].
    pub gamma: Option<f64>,
    pub bound: f64,
}

impl InfoRatioReport {
    pub fn degenerate(&self) -> bool {
        self.gamma.is_none()
    }

    pub fn within_bound(&self) -> bool {
        self.gamma.is_none_or(|g| g <= self.bound + BOUND_TOL)
    }
}

pub fn expected_regret(post: &Posterior, beta: Slope) -> f64 {
    Pairwise::new(post).expected_regret(beta)
}

pub fn mutual_information(post: &Posterior, beta: Slope) -> f64 {
    Pairwise::new(post).mutual_information(beta)
}

pub fn information_ratio(post: &Posterior, beta: Slope, d: usize) -> InfoRatioReport {
    let pw = Pairwise::new(post);
    report_from(&pw, beta, d)
}

fn report_from(pw: &Pairwise<'_>, beta: Slope, d: usize) -> InfoRatioReport {
    let expected_regret = pw.expected_regret(beta);
    let mutual_info = pw.mutual_information(beta);
    let gamma = (mutual_info > MI_FLOOR).then(|| expected_regret * expected_regret / mutual_info);
    InfoRatioReport {
        step: 0,
        expected_regret,
        mutual_info,
        gamma,
        bound: info_ratio_bound(d),
    }
}

/// Shannon entropy of a table of probabilities.
fn entropy<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    probs.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum()
}

/// Build the joint law of `(Θ, Θ̂, R)` explicitly and compare
/// `I(Θ; R, Θ̂)` with `I(Θ; R | Θ̂)`, both from entropies of its marginals.
pub fn mi_chain_identity_check(post: &Posterior, beta: Slope) -> BoundCheck {
    let pw = Pairwise::new(post);
    let n = pw.n;
    let w = pw.weights;
    // joint[(i * n + j) * 2 + r]
    let mut joint = vec![0.0; n * n * 2];
    for i in 0..n {
        for j in 0..n {
            let p1 = logistic(beta, pw.inner(j, i));
            let base = w[i] * w[j];
            joint[(i * n + j) * 2 + 1] = base * p1;
            joint[(i * n + j) * 2] = base * (1.0 - p1);
        }
    }
    let mut theta = vec![0.0; n];
    let mut action = vec![0.0; n];
    let mut theta_action = vec![0.0; n * n];
    let mut action_reward = vec![0.0; n * 2];
    for i in 0..n {
        for j in 0..n {
            for r in 0..2 {
                let p = joint[(i * n + j) * 2 + r];
                theta[i] += p;
                action[j] += p;
                theta_action[i * n + j] += p;
                action_reward[j * 2 + r] += p;
            }
        }
    }
    let h_all = entropy(joint.iter().copied());
    let h_theta = entropy(theta);
    let h_action = entropy(action);
    let h_ta = entropy(theta_action);
    let h_ar = entropy(action_reward.iter().copied());

    let joint_mi = h_theta + h_ar - h_all;
    let conditional_mi = h_ta + h_ar - h_all - h_action;
    BoundCheck::eq(joint_mi, conditional_mi, 1e-10)
}

/// `I(U; Bern(U)) >= 2 Var(U)` for a discrete `U` on `[0, 1]`.
pub fn lemma_mi_ge_2var(u_atoms: &[f64], u_weights: &[f64]) -> BoundCheck {
    let mean: f64 = u_atoms.iter().zip(u_weights).map(|(u, w)| w * u).sum();
    let mean_h: f64 = u_atoms
        .iter()
        .zip(u_weights)
        .map(|(u, w)| w * binary_entropy(*u))
        .sum();
    let var: f64 = u_atoms
        .iter()
        .zip(u_weights)
        .map(|(u, w)| w * (u - mean) * (u - mean))
        .sum();
    BoundCheck::ge(binary_entropy(mean) - mean_h, 2.0 * var, IDENTITY_TOL)
}

/// `I(Θ; R, Θ̂) >= 2 E[Var[logistic(β, ⟨Θ̂, Θ⟩) | Θ]]`.
pub fn lemma_mi_lower_bound_check(post: &Posterior, beta: Slope) -> BoundCheck {
    let pw = Pairwise::new(post);
    let mi = pw.mutual_information(beta);
    let ev = pw.expected_conditional_variance(|x| logistic(beta, 1.0 - x));
    BoundCheck::ge(mi, 2.0 * ev, IDENTITY_TOL)
}

/// A finite joint law of two random vectors: `(U, V) = pairs[k]` with
/// probability `weights[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorPairs {
    pub pairs: Vec<(Vec<f64>, Vec<f64>)>,
    pub weights: Vec<f64>,
}

/// `E[UᵀV]² <= d · E[(ŨᵀṼ)²]` with `Ũ`, `Ṽ` independent copies of the marginals.
pub fn lemma_inner_product_d_check(joint: &VectorPairs, d: usize) -> BoundCheck {
    let w = &joint.weights;
    let mean: f64 = joint.pairs.iter().zip(w).map(|((u, v), wk)| wk * dot(u, v)).sum();
    let mut second = 0.0;
    for ((u, _), wk) in joint.pairs.iter().zip(w) {
        for ((_, v), wl) in joint.pairs.iter().zip(w) {
            let s = dot(u, v);
            second += wk * wl * s * s;
        }
    }
    let rhs = d as f64 * second;
    BoundCheck::le(mean * mean, rhs, IDENTITY_TOL * rhs.max(1.0))
}

/// Functions `f` with `f(0) >= 0` and `f(x)/x` non-decreasing on `[0, 2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioFn {
    Identity,
    Surrogate(Surrogate),
    LimitPhi,
}

impl RatioFn {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Identity => x,
            Self::Surrogate(s) => s.eval(x),
            Self::LimitPhi => limit_phi(x),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Surrogate(_) => "surrogate",
            Self::LimitPhi => "limit_phi",
        }
    }

    /// Grid check of the preconditions on `(0, 2]`.
    pub fn satisfies_preconditions(&self, points: usize) -> bool {
        if self.eval(0.0) < 0.0 {
            return false;
        }
        let mut prev = f64::NEG_INFINITY;
        (1..=points).all(|k| {
            let x = 2.0 * k as f64 / points as f64;
            let r = self.eval(x) / x;
            let ok = r >= prev - 1e-10;
            prev = r;
            ok
        })
    }
}

/// `E[f(U)]² / E[U]² <= Var[f(U)] / Var[U]` for non-negative discrete `U`.
/// Returns `None` when `Var[U]` or `E[U]` vanishes.
pub fn lemma_ratio_exp_var_check(f: &RatioFn, u_atoms: &[f64], u_weights: &[f64]) -> Option<BoundCheck> {
    let stats = |vals: &mut dyn Iterator<Item = f64>| {
        let vals: Vec<f64> = vals.collect();
        let mean: f64 = vals.iter().zip(u_weights).map(|(v, w)| w * v).sum();
        let var: f64 = vals
            .iter()
            .zip(u_weights)
            .map(|(v, w)| w * (v - mean) * (v - mean))
            .sum();
        (mean, var)
    };
    let (mu, var_u) = stats(&mut u_atoms.iter().copied());
    if var_u <= MI_FLOOR || mu <= 0.0 {
        return None;
    }
    let (mf, var_f) = stats(&mut u_atoms.iter().map(|&u| f.eval(u)));
    let lhs = mf * mf / (mu * mu);
    let rhs = var_f / var_u;
    Some(BoundCheck::le(lhs, rhs, 1e-10 * rhs.max(1.0)))
}

/// Ratio of expected conditional variances of the limit shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitRatio {
    /// `E[Var[φ̄(1 - ⟨Θ̂,Θ⟩) | Θ]]`
    pub numerator: f64,
    /// `E[Var[ψ̄(1 - ⟨Θ̂,Θ⟩) | Θ]] = E[Q(Θ)(1 - Q(Θ))]`
    pub denominator: f64,
    /// `None` when the denominator is zero (no pair with negative inner product).
    pub ratio: Option<f64>,
    pub holds_9: bool,
}

/// Evaluate the limit-shape variance ratio via the indicator decomposition.
///
/// With `I = 1{⟨Θ̂,Θ⟩ < 0}` and `Q(Θ) = E[I | Θ]`, the ψ̄ term is Bernoulli so
/// its conditional variance is `Q(1 - Q)`; φ̄ equals `I (1 - 2⟨Θ̂,Θ⟩)` so its
/// conditional variance is `E[I (1 - 2⟨Θ̂,Θ⟩)² | Θ] - E[I (1 - 2⟨Θ̂,Θ⟩) | Θ]²`.
pub fn variance_ratio_limit_check(joint: &DiscreteJoint) -> LimitRatio {
    let pw = Pairwise::new(joint);
    let w = pw.weights;
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for i in 0..pw.n {
        if w[i] == 0.0 {
            continue;
        }
        let (mut q, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (g, wj) in pw.row(i).iter().zip(w) {
            if *g < 0.0 {
                let y = 1.0 - 2.0 * g;
                q += wj;
                m1 += wj * y;
                m2 += wj * y * y;
            }
        }
        numerator += w[i] * (m2 - m1 * m1).max(0.0);
        denominator += w[i] * q * (1.0 - q);
    }
    let ratio = (denominator > MI_FLOOR).then(|| numerator / denominator);
    LimitRatio {
        numerator,
        denominator,
        ratio,
        holds_9: ratio.is_none_or(|r| r <= 9.0 + BOUND_TOL),
    }
}

/// Direct two-pass evaluation of the limit-shape variances, for cross-checking
/// [`variance_ratio_limit_check`].
pub fn limit_variances_direct(joint: &DiscreteJoint) -> (f64, f64) {
    let pw = Pairwise::new(joint);
    (
        pw.expected_conditional_variance(limit_phi),
        pw.expected_conditional_variance(limit_psi),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityCheck {
    pub ratio_beta: f64,
    pub ratio_limit: f64,
    pub holds: bool,
}

/// Surrogate-to-ψ variance ratio at finite `β` against its `β → ∞` counterpart.
/// `None` when either denominator vanishes.
pub fn beta_monotonicity_check(joint: &DiscreteJoint, surrogate: &Surrogate) -> Option<MonotonicityCheck> {
    let limit = variance_ratio_limit_check(joint);
    let ratio_limit = limit.ratio?;
    let ratio_beta = surrogate_psi_variance_ratio(joint, surrogate)?;
    Some(MonotonicityCheck {
        ratio_beta,
        ratio_limit,
        holds: ratio_beta <= ratio_limit + BOUND_TOL,
    })
}

/// `E[Var[φ_β(1-⟨Θ̂,Θ⟩)|Θ]] / E[Var[ψ_β(1-⟨Θ̂,Θ⟩)|Θ]]` for the surrogate `φ_β`.
pub fn surrogate_psi_variance_ratio(joint: &DiscreteJoint, surrogate: &Surrogate) -> Option<f64> {
    let pw = Pairwise::new(joint);
    let beta = surrogate.beta;
    let den = pw.expected_conditional_variance(|x| psi(beta, x));
    if den <= MI_FLOOR {
        return None;
    }
    Some(pw.expected_conditional_variance(|x| surrogate.eval(x)) / den)
}

/// `regret² <= d · E[Var[φ_β(1 - ⟨Θ̂,Θ⟩) | Θ]]` for the surrogate `φ_β`.
pub fn squared_regret_upper_check(post: &Posterior, surrogate: &Surrogate, d: usize) -> BoundCheck {
    let pw = Pairwise::new(post);
    let regret = pw.expected_regret(surrogate.beta);
    let ev = pw.expected_conditional_variance(|x| surrogate.eval(x));
    BoundCheck::le(regret * regret, d as f64 * ev, IDENTITY_TOL)
}

/// All per-posterior quantities of the `Γ <= 4.5 d` argument, from one Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainReport {
    pub report: InfoRatioReport,
    /// `E[Var[logistic(β, ⟨Θ̂,Θ⟩) | Θ]]`
    pub link_variance: f64,
    /// `E[Var[φ_β(1-⟨Θ̂,Θ⟩) | Θ]]`
    pub surrogate_variance: f64,
    /// `E[Var[ψ_β(1-⟨Θ̂,Θ⟩) | Θ]]`
    pub psi_variance: f64,
}

impl ChainReport {
    pub fn new(post: &Posterior, surrogate: &Surrogate, d: usize) -> Self {
        let pw = Pairwise::new(post);
        let beta = surrogate.beta;
        Self {
            report: report_from(&pw, beta, d),
            link_variance: pw.expected_conditional_variance(|x| logistic(beta, 1.0 - x)),
            surrogate_variance: pw.expected_conditional_variance(|x| surrogate.eval(x)),
            psi_variance: pw.expected_conditional_variance(|x| psi(beta, x)),
        }
    }

    /// `Γ <= (d/2) · ratio_β`, the combination of the mutual-information lower
    /// bound and the squared-regret upper bound.
    pub fn chain_check(&self, d: usize) -> Option<BoundCheck> {
        let gamma = self.report.gamma?;
        if self.psi_variance <= MI_FLOOR {
            return None;
        }
        let ratio_beta = self.surrogate_variance / self.psi_variance;
        let rhs = 0.5 * d as f64 * ratio_beta;
        Some(BoundCheck::le(gamma, rhs, BOUND_TOL * rhs.max(1.0)))
    }
}

/// Helper for sweeps: build a [`Surrogate`] for `beta`.
pub fn surrogate_for(beta: Slope) -> Result<Surrogate> {
    Surrogate::new(beta)
}
