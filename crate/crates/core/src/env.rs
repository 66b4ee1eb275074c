//! The logistic bandit: a hidden unit parameter, actions in the unit ball and
//! Bernoulli rewards with success probability `logistic(β, ⟨a, θ*⟩)`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{dot, norm, sample_uniform_sphere, UnitVector};
use crate::math::{logistic, Slope};
use crate::rng::StreamRng;
use crate::textio;

const WEIGHT_SUM_TOL: f64 = 1e-9;
const ACTION_NORM_TOL: f64 = 1e-12;
/// Atoms read from disk are renormalised if they are this close to unit norm.
const LOAD_NORM_TOL: f64 = 1e-6;

/// A finite-support distribution over unit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePrior {
    atoms: Vec<UnitVector>,
    weights: Vec<f64>,
}

impl FinitePrior {
    pub fn new(atoms: Vec<UnitVector>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidWeights("prior needs at least one atom".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::InvalidWeights(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        let dim = atoms[0].dim();
        if let Some(a) = atoms.iter().find(|a| a.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: a.dim(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidWeights(format!(
                "weight {w} is negative or not finite"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { atoms, weights })
    }

    pub fn uniform(atoms: Vec<UnitVector>) -> Result<Self> {
        let n = atoms.len();
        Self::new(atoms, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn point_mass(atom: UnitVector) -> Self {
        Self {
            atoms: vec![atom],
            weights: vec![1.0],
        }
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

    pub fn into_parts(self) -> (Vec<UnitVector>, Vec<f64>) {
        (self.atoms, self.weights)
    }

    /// Index drawn with probability proportional to its weight.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_weighted(&self.weights, rng)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = textio::read_points_file(path)?;
        let atoms = file
            .points
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let n = norm(&p);
                if (n - 1.0).abs() > LOAD_NORM_TOL {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: i + 2,
                        msg: format!("atom norm {n} is not 1"),
                    });
                }
                UnitVector::normalize(p)
            })
            .collect::<Result<Vec<_>>>()?;
        match file.weights {
            Some(w) => Self::new(atoms, w),
            None => Self::uniform(atoms),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let refs: Vec<&[f64]> = self.atoms.iter().map(|a| a.coords()).collect();
        textio::write_points_file(path, self.dim(), 0.0, &refs, Some(&self.weights))
    }
}

/// Draw an index from a probability vector with a single uniform variate.
pub fn sample_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // Rounding left the cumulative sum just below one: take the last atom
    // with positive weight.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Prior over the hidden parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorSpec {
    /// Uniform on the unit sphere.
    UniformSphere,
    Finite(FinitePrior),
}

impl PriorSpec {
    /// Parse `uniform-sphere` or `file:<path>`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.parse::<PriorArg>()? {
            PriorArg::UniformSphere => Ok(Self::UniformSphere),
            PriorArg::File(p) => Ok(Self::Finite(FinitePrior::load(&p)?)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::UniformSphere => "uniform-sphere".into(),
            Self::Finite(p) => format!("finite({} atoms)", p.len()),
        }
    }
}

/// Unresolved prior argument as typed on a command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PriorArg {
    UniformSphere,
    File(PathBuf),
}

impl FromStr for PriorArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "uniform-sphere" {
            Ok(Self::UniformSphere)
        } else if let Some(p) = s.strip_prefix("file:") {
            Ok(Self::File(PathBuf::from(p)))
        } else {
            Err(Error::Config(format!(
                "prior must be `uniform-sphere` or `file:<path>`, got {s:?}"
            )))
        }
    }
}

impl fmt::Display for PriorArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UniformSphere => f.write_str("uniform-sphere"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub step: usize,
    pub action: Vec<f64>,
    pub reward: u8,
}

pub struct LogisticBanditEnv {
    dim: usize,
    beta: Slope,
    theta_star: UnitVector,
    rng: StreamRng,
    history: Vec<HistoryEntry>,
    step: usize,
}

impl LogisticBanditEnv {
    /// Draw the hidden parameter from `prior` and answer pulls from the same stream.
    pub fn new(dim: usize, beta: Slope, prior: &PriorSpec, mut rng: StreamRng) -> Result<Self> {
        let theta_star = match prior {
            PriorSpec::UniformSphere => sample_uniform_sphere(dim, &mut rng)?,
            PriorSpec::Finite(p) => {
                if p.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: p.dim(),
                    });
                }
                p.atoms()[p.sample_index(&mut rng)].clone()
            }
        };
        Ok(Self::with_parameter(beta, theta_star, rng))
    }

    pub fn with_parameter(beta: Slope, theta_star: UnitVector, rng: StreamRng) -> Self {
        Self {
            dim: theta_star.dim(),
            beta,
            theta_star,
            rng,
            history: Vec::new(),
            step: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn beta(&self) -> Slope {
        self.beta
    }

    /// Index of the next pull (starts at 1).
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    /// `P(R = 1 | a)` under the hidden parameter.
    pub fn success_probability(&self, action: &[f64]) -> f64 {
        logistic(self.beta, dot(action, &self.theta_star))
    }

    /// Play `action` and observe a Bernoulli reward.
    pub fn pull(&mut self, action: &[f64]) -> Result<u8> {
        if action.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: action.len(),
            });
        }
        let n = norm(action);
        if n.is_nan() || n > 1.0 + ACTION_NORM_TOL {
            return Err(Error::ActionOutsideBall(n));
        }
        let p = self.success_probability(action);
        let reward = u8::from(self.rng.random::<f64>() < p);
        self.history.push(HistoryEntry {
            step: self.step,
            action: action.to_vec(),
            reward,
        });
        self.step += 1;
        Ok(reward)
    }

    /// The best action, `θ*` itself. Not visible to the agent.
    pub fn optimal_action(&self) -> &UnitVector {
        &self.theta_star
    }
}
