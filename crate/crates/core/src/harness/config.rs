use std::path::PathBuf;

use serde::Serialize;

use crate::env::PriorSpec;
use crate::error::{Error, Result};
use crate::harness::bounds::{default_epsilon, NET_BUDGET};
use crate::math::Slope;

/// Settings of one regret experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub beta: Slope,
    pub horizon: usize,
    pub episodes: usize,
    pub prior: PriorSpec,
    /// Atoms drawn per episode when the prior is continuous.
    pub particles: usize,
    /// Net resolution for the quantized bound; `d/(βT)` when unset.
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub jobs: usize,
    /// Compute the information ratio every this many steps (0 = never).
    pub metrics_every: usize,
    /// Largest net built for the quantized bound.
    pub net_budget: usize,
}

impl ExperimentConfig {
    pub fn new(dim: usize, beta: Slope, horizon: usize) -> Self {
        Self {
            dim,
            beta,
            horizon,
            episodes: 1,
            prior: PriorSpec::UniformSphere,
            particles: 500,
            epsilon: None,
            seed: 0,
            out_dir: PathBuf::from("out"),
            jobs: 1,
            metrics_every: 1,
            net_budget: NET_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if self.episodes == 0 {
            return Err(Error::Config("episodes must be at least 1".into()));
        }
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        match &self.prior {
            PriorSpec::UniformSphere if self.particles == 0 => {
                return Err(Error::Config("particles must be at least 1".into()))
            }
            PriorSpec::Finite(p) if p.dim() != self.dim => {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    actual: p.dim(),
                })
            }
            _ => {}
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps <= 2.0) {
                return Err(Error::InvalidEpsilon(eps));
            }
        }
        Ok(())
    }

    pub fn effective_epsilon(&self) -> f64 {
        self.epsilon
            .unwrap_or_else(|| default_epsilon(self.dim, self.beta.get(), self.horizon))
    }

    pub fn record(&self) -> ConfigRecord {
        ConfigRecord {
            dim: self.dim,
            beta: self.beta.get(),
            horizon: self.horizon,
            episodes: self.episodes,
            prior: self.prior.label(),
            particles: match self.prior {
                PriorSpec::UniformSphere => Some(self.particles),
                PriorSpec::Finite(_) => None,
            },
            epsilon: self.effective_epsilon(),
            seed: self.seed,
            metrics_every: self.metrics_every,
        }
    }
}

/// The parts of a config that determine the output, for the summary file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigRecord {
    pub dim: usize,
    pub beta: f64,
    pub horizon: usize,
    pub episodes: usize,
    pub prior: String,
    pub particles: Option<usize>,
    pub epsilon: f64,
    pub seed: u64,
    pub metrics_every: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::FinitePrior;
    use crate::geometry::UnitVector;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig::new(2, Slope::new(5.0).unwrap(), 1000)
    }

    #[test]
    fn defaults_validate() {
        let c = cfg();
        c.validate().unwrap();
        assert!((c.effective_epsilon() - 4e-4).abs() < 1e-18);
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = cfg();
        c.episodes = 0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.epsilon = Some(2.5);
        assert!(matches!(c.validate(), Err(Error::InvalidEpsilon(_))));
        let mut c = cfg();
        c.epsilon = Some(0.0);
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.dim = 0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.particles = 0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.prior = PriorSpec::Finite(FinitePrior::point_mass(UnitVector::basis(3, 0)));
        assert!(matches!(c.validate(), Err(Error::DimensionMismatch { .. })));
    }
}
