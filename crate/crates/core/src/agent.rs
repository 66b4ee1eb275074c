//! Thompson Sampling with an exact finite-support posterior.
//!
//! Continuous priors are replaced by `N` i.i.d. particles at `t = 0`; after that
//! every update is exact Bayes under the Bernoulli-logistic likelihood. Weights
//! are accumulated in log space and renormalised once per step.

use std::path::Path;

use rand::Rng;

use crate::env::{sample_weighted, FinitePrior, LogisticBanditEnv, PriorSpec};
use crate::error::{Error, Result};
use crate::geometry::{sample_uniform_sphere, UnitVector};
use crate::math::{log_likelihood, Slope};
use crate::textio;

const WEIGHT_SUM_TOL: f64 = 1e-9;

/// A probability vector over unit-sphere atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    atoms: Vec<UnitVector>,
    weights: Vec<f64>,
}

impl Posterior {
    pub fn new(atoms: Vec<UnitVector>, weights: Vec<f64>) -> Result<Self> {
        let prior = FinitePrior::new(atoms, weights)?;
        Ok(Self::from(prior))
    }

    pub fn uniform(atoms: Vec<UnitVector>) -> Result<Self> {
        Ok(Self::from(FinitePrior::uniform(atoms)?))
    }

    pub fn point_mass(atom: UnitVector) -> Self {
        Self::from(FinitePrior::point_mass(atom))
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].dim()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[UnitVector] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Shannon entropy of the weights, in nats.
    pub fn entropy(&self) -> f64 {
        self.weights
            .iter()
            .filter(|&&w| w > 0.0)
            .map(|&w| -w * w.ln())
            .sum()
    }

    /// Export in the finite-prior text format.
    pub fn save(&self, path: &Path) -> Result<()> {
        let refs: Vec<&[f64]> = self.atoms.iter().map(|a| a.coords()).collect();
        textio::write_points_file(path, self.dim(), 0.0, &refs, Some(&self.weights))
    }
}

impl From<FinitePrior> for Posterior {
    fn from(p: FinitePrior) -> Self {
        let (atoms, weights) = p.into_parts();
        Self { atoms, weights }
    }
}

/// Agent state: the current posterior and its log-weights.
#[derive(Debug, Clone)]
pub struct AgentState {
    posterior: Posterior,
    log_weights: Vec<f64>,
    beta: Slope,
    step: usize,
}

impl AgentState {
    /// Start from `prior`. A uniform-sphere prior is discretised into
    /// `particles` i.i.d. atoms with equal weight; a finite prior is used as is.
    pub fn init<R: Rng + ?Sized>(
        dim: usize,
        prior: &PriorSpec,
        particles: usize,
        beta: Slope,
        rng: &mut R,
    ) -> Result<Self> {
        let posterior = match prior {
            PriorSpec::UniformSphere => {
                if particles == 0 {
                    return Err(Error::Config("particle count must be at least 1".into()));
                }
                let atoms = (0..particles)
                    .map(|_| sample_uniform_sphere(dim, rng))
                    .collect::<Result<Vec<_>>>()?;
                Posterior::uniform(atoms)?
            }
            PriorSpec::Finite(p) => {
                if p.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: p.dim(),
                    });
                }
                Posterior::from(p.clone())
            }
        };
        Ok(Self::from_posterior(posterior, beta))
    }

    pub fn from_posterior(posterior: Posterior, beta: Slope) -> Self {
        let log_weights = posterior.weights.iter().map(|w| w.ln()).collect();
        Self {
            posterior,
            log_weights,
            beta,
            step: 1,
        }
    }

    pub fn posterior(&self) -> &Posterior {
        &self.posterior
    }

    pub fn beta(&self) -> Slope {
        self.beta
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Sample `Θ̂ ~ posterior` and play `π*(Θ̂) = Θ̂`.
    pub fn sample_action<R: Rng + ?Sized>(&self, rng: &mut R) -> (&UnitVector, usize) {
        let idx = sample_weighted(&self.posterior.weights, rng);
        (&self.posterior.atoms[idx], idx)
    }

    /// Bayes update after observing `reward` for `action`.
    pub fn update(&mut self, action: &[f64], reward: u8) -> Result<()> {
        if reward > 1 {
            return Err(Error::InvalidReward(reward));
        }
        if action.len() != self.posterior.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.posterior.dim(),
                actual: action.len(),
            });
        }
        for (lw, atom) in self.log_weights.iter_mut().zip(&self.posterior.atoms) {
            *lw += log_likelihood(self.beta, action, atom, reward);
        }
        let max = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // Logistic likelihoods are strictly positive, so some atom keeps mass.
        assert!(max.is_finite(), "posterior lost all mass");
        let mut total = 0.0;
        for (w, lw) in self.posterior.weights.iter_mut().zip(&self.log_weights) {
            *w = (lw - max).exp();
            total += *w;
        }
        let log_total = total.ln();
        for (w, lw) in self.posterior.weights.iter_mut().zip(self.log_weights.iter_mut()) {
            *w /= total;
            *lw -= max + log_total;
        }
        debug_assert!((self.posterior.weights.iter().sum::<f64>() - 1.0).abs() < WEIGHT_SUM_TOL);
        self.step += 1;
        Ok(())
    }
}

/// What a per-step observer sees. `posterior` is the belief *before* the
/// update with this step's reward.
pub struct StepView<'a> {
    pub t: usize,
    pub posterior: &'a Posterior,
    pub sampled_index: usize,
    pub action: &'a UnitVector,
    pub reward: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep {
    pub t: usize,
    pub sampled_index: usize,
    pub action: UnitVector,
    pub reward: u8,
}

/// Run Thompson Sampling for `horizon` steps.
pub fn run_episode<R, F>(
    env: &mut LogisticBanditEnv,
    agent: &mut AgentState,
    horizon: usize,
    policy_rng: &mut R,
    mut on_step: F,
) -> Result<Vec<TrajectoryStep>>
where
    R: Rng + ?Sized,
    F: FnMut(&StepView<'_>),
{
    let mut traj = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let (action, idx) = agent.sample_action(policy_rng);
        let action = action.clone();
        let reward = env.pull(&action)?;
        on_step(&StepView {
            t,
            posterior: agent.posterior(),
            sampled_index: idx,
            action: &action,
            reward,
        });
        agent.update(&action, reward)?;
        traj.push(TrajectoryStep {
            t,
            sampled_index: idx,
            action,
            reward,
        });
    }
    Ok(traj)
}
