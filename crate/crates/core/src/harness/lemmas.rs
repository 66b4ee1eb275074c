//! Randomised sweeps of the lemma oracles in [`crate::metrics`].

use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::check::BoundCheck;
use crate::error::{Error, Result};
use crate::geometry::sample_uniform_sphere;
use crate::harness::csvout::{write_table, Cell};
use crate::harness::par_map;
use crate::harness::scan::{random_posterior, Family};
use crate::math::{loglik_lipschitz_check, Slope, Surrogate};
use crate::metrics::{
    beta_monotonicity_check, lemma_inner_product_d_check, lemma_mi_ge_2var, lemma_mi_lower_bound_check,
    lemma_ratio_exp_var_check, mi_chain_identity_check, squared_regret_upper_check,
    variance_ratio_limit_check, ChainReport, RatioFn, VectorPairs,
};
use crate::rng::{Purpose, StreamRng, StreamTree};

pub const LEMMA_COLUMNS: [&str; 6] = ["lemma", "trial", "lhs", "rhs", "margin", "holds"];

/// Slopes drawn by the posterior-based sweeps.
pub const SWEEP_BETAS: [f64; 6] = [0.5, 1.0, 2.0, 5.0, 10.0, 100.0];
/// Slopes tried for every joint in the monotonicity sweep.
pub const MONOTONICITY_BETAS: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 20.0];
/// Slopes of the surrogates in the expectation/variance ratio sweep.
pub const SURROGATE_BETAS: [f64; 8] = [0.1, 0.5, 1.0, 2.0, 3.0, 5.0, 20.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaKind {
    /// `I(U; Bern(U)) >= 2 Var U`
    MiGe2Var,
    /// `I >= 2 E[Var[logistic | Θ]]`
    MiLowerBound,
    /// `regret² <= d E[Var[φ_β | Θ]]`
    SquaredRegretUpper,
    /// `E[UᵀV]² <= d E[(ŨᵀṼ)²]`
    InnerProductD,
    /// Expectation ratio below variance ratio, `f` = surrogate.
    RatioExpVarSurrogate,
    /// Expectation ratio below variance ratio, `f` = limit φ̄.
    RatioExpVarLimitPhi,
    /// Limit variance ratio at most 9.
    VarianceRatioLimit,
    /// Finite-β variance ratio below the limit ratio.
    BetaMonotonicity,
    /// `I(Θ; R, Â) = I(Θ; R | Â)`
    MiChainIdentity,
    /// `Γ <= (d/2) ratio_β`
    GammaChain,
    /// Log-likelihood is β-Lipschitz in θ.
    LoglikLipschitz,
}

impl LemmaKind {
    pub const ALL: [LemmaKind; 11] = [
        Self::MiGe2Var,
        Self::MiLowerBound,
        Self::SquaredRegretUpper,
        Self::InnerProductD,
        Self::RatioExpVarSurrogate,
        Self::RatioExpVarLimitPhi,
        Self::VarianceRatioLimit,
        Self::BetaMonotonicity,
        Self::MiChainIdentity,
        Self::GammaChain,
        Self::LoglikLipschitz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::MiGe2Var => "mi_ge_2var",
            Self::MiLowerBound => "mi_lower_bound",
            Self::SquaredRegretUpper => "squared_regret_upper",
            Self::InnerProductD => "inner_product_d",
            Self::RatioExpVarSurrogate => "ratio_exp_var_surrogate",
            Self::RatioExpVarLimitPhi => "ratio_exp_var_limit_phi",
            Self::VarianceRatioLimit => "variance_ratio_limit",
            Self::BetaMonotonicity => "beta_monotonicity",
            Self::MiChainIdentity => "mi_chain_identity",
            Self::GammaChain => "gamma_chain",
            Self::LoglikLipschitz => "loglik_lipschitz",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Self::MiGe2Var | Self::VarianceRatioLimit | Self::LoglikLipschitz => 100_000,
            Self::MiChainIdentity => 1_000,
            _ => 10_000,
        }
    }
}

impl FromStr for LemmaKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown lemma {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaRow {
    pub lemma: &'static str,
    pub trial: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

impl LemmaRow {
    fn new(kind: LemmaKind, trial: usize, c: BoundCheck) -> Self {
        Self {
            lemma: kind.name(),
            trial,
            lhs: c.lhs,
            rhs: c.rhs,
            margin: c.margin(),
            holds: c.holds,
        }
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.lemma.into(),
            self.trial.into(),
            self.lhs.into(),
            self.rhs.into(),
            self.margin.into(),
            self.holds.into(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaSweep {
    pub kind: LemmaKind,
    pub trials: usize,
    pub rows: Vec<LemmaRow>,
    /// Trials excluded as degenerate (zero variance or zero denominator).
    pub skipped: usize,
}

impl LemmaSweep {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.holds).count()
    }

    /// Smallest margin seen, if any row was produced.
    pub fn worst_margin(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.margin).reduce(f64::min)
    }
}

pub fn write_lemma_csv<W: Write>(out: W, sweeps: &[LemmaSweep]) -> Result<()> {
    write_table(
        out,
        &LEMMA_COLUMNS,
        sweeps.iter().flat_map(|s| s.rows.iter().map(LemmaRow::cells)),
    )
}

/// Discrete `U` with up to 20 atoms on `[0, hi]`, including endpoint-heavy cases.
fn random_discrete<R: Rng + ?Sized>(hi: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let k = rng.random_range(1..=20);
    let shape = rng.random_range(0..4);
    let atoms = (0..k)
        .map(|_| {
            let u: f64 = rng.random();
            hi * match shape {
                0 => u,
                1 => u.powi(6),
                2 => 1.0 - u.powi(6),
                _ => {
                    if rng.random_bool(0.5) {
                        (u > 0.5) as u8 as f64
                    } else {
                        u
                    }
                }
            }
        })
        .collect();
    let mut w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    (atoms, w)
}

fn random_joint_pairs<R: Rng + ?Sized>(rng: &mut R) -> (VectorPairs, usize) {
    let d = rng.random_range(1..=6);
    let k = rng.random_range(1..=10);
    let gauss = |rng: &mut R, s: f64| -> Vec<f64> {
        (0..d).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect()
    };
    let coupling = rng.random_range(0..3);
    let pairs = (0..k)
        .map(|_| {
            let scale = rng.random_range(0.1..2.0);
            let u = gauss(rng, scale);
            let v = match coupling {
                0 => gauss(rng, 1.0),
                1 => {
                    let noise = gauss(rng, 0.05);
                    u.iter().zip(noise).map(|(a, b)| a + b).collect()
                }
                _ => u.iter().map(|a| -a).collect(),
            };
            (u, v)
        })
        .collect();
    let mut w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    (VectorPairs { pairs, weights: w }, d)
}

const POSTERIOR_FAMILIES: [Family; 7] = [
    Family::Random,
    Family::Clustered,
    Family::Antipodal,
    Family::NearPointMass,
    Family::Simplex,
    Family::CrossPolytope,
    Family::AntipodalClusters,
];

fn random_family<R: Rng + ?Sized>(rng: &mut R) -> Family {
    // Half the draws are plain random supports.
    if rng.random_bool(0.5) {
        Family::Random
    } else {
        POSTERIOR_FAMILIES[rng.random_range(1..POSTERIOR_FAMILIES.len())]
    }
}

fn ball_point<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    if rng.random_bool(0.02) {
        return vec![0.0; d];
    }
    let dir = sample_uniform_sphere(d, rng).unwrap();
    let r = rng.random::<f64>().powf(1.0 / d as f64);
    dir.iter().map(|c| c * r).collect()
}

/// One trial. Returns zero or more rows plus the number of skipped checks.
fn trial(kind: LemmaKind, t: usize, rng: &mut StreamRng, surrogates: &[Surrogate]) -> (Vec<LemmaRow>, usize) {
    let slope = |b: f64| Slope::new(b).expect("sweep slopes are positive");
    let one = |c: BoundCheck| (vec![LemmaRow::new(kind, t, c)], 0);
    let posterior = |rng: &mut StreamRng, d_max: usize, n_max: usize| {
        let d = rng.random_range(1..=d_max);
        (random_posterior(random_family(rng), d, 2, n_max, rng), d)
    };
    match kind {
        LemmaKind::MiGe2Var => {
            let (a, w) = random_discrete(1.0, rng);
            one(lemma_mi_ge_2var(&a, &w))
        }
        LemmaKind::MiLowerBound => {
            let (p, _) = posterior(rng, 4, 30);
            let b = SWEEP_BETAS[rng.random_range(0..SWEEP_BETAS.len())];
            one(lemma_mi_lower_bound_check(&p, slope(b)))
        }
        LemmaKind::SquaredRegretUpper => {
            let (p, d) = posterior(rng, 5, 30);
            let s = &surrogates[rng.random_range(0..surrogates.len())];
            one(squared_regret_upper_check(&p, s, d))
        }
        LemmaKind::InnerProductD => {
            let (j, d) = random_joint_pairs(rng);
            one(lemma_inner_product_d_check(&j, d))
        }
        LemmaKind::RatioExpVarSurrogate | LemmaKind::RatioExpVarLimitPhi => {
            let f = if kind == LemmaKind::RatioExpVarLimitPhi {
                RatioFn::LimitPhi
            } else {
                RatioFn::Surrogate(surrogates[rng.random_range(0..surrogates.len())])
            };
            let (a, w) = random_discrete(2.0, rng);
            match lemma_ratio_exp_var_check(&f, &a, &w) {
                Some(c) => one(c),
                None => (vec![], 1),
            }
        }
        LemmaKind::VarianceRatioLimit => {
            let (p, _) = posterior(rng, 5, 40);
            let r = variance_ratio_limit_check(&p);
            match r.ratio {
                Some(ratio) => (
                    vec![LemmaRow {
                        lemma: kind.name(),
                        trial: t,
                        lhs: ratio,
                        rhs: 9.0,
                        margin: 9.0 - ratio,
                        holds: r.holds_9,
                    }],
                    0,
                ),
                None => (vec![], 1),
            }
        }
        LemmaKind::BetaMonotonicity => {
            let (p, _) = posterior(rng, 5, 40);
            let mut rows = Vec::new();
            let mut skipped = 0;
            for &b in &MONOTONICITY_BETAS {
                let s = surrogates
                    .iter()
                    .find(|s| s.beta.get() == b)
                    .copied()
                    .unwrap_or_else(|| Surrogate::new(slope(b)).expect("breakpoint"));
                match beta_monotonicity_check(&p, &s) {
                    Some(c) => rows.push(LemmaRow {
                        lemma: kind.name(),
                        trial: t,
                        lhs: c.ratio_beta,
                        rhs: c.ratio_limit,
                        margin: c.ratio_limit - c.ratio_beta,
                        holds: c.holds,
                    }),
                    None => skipped += 1,
                }
            }
            (rows, skipped)
        }
        LemmaKind::MiChainIdentity => {
            let (p, _) = posterior(rng, 4, 20);
            let b = SWEEP_BETAS[rng.random_range(0..SWEEP_BETAS.len())];
            one(mi_chain_identity_check(&p, slope(b)))
        }
        LemmaKind::GammaChain => {
            let (p, d) = posterior(rng, 5, 30);
            let s = &surrogates[rng.random_range(0..surrogates.len())];
            match ChainReport::new(&p, s, d).chain_check(d) {
                Some(c) => one(c),
                None => (vec![], 1),
            }
        }
        LemmaKind::LoglikLipschitz => {
            let b = if t.is_multiple_of(2) { 1.0 } else { 10.0 };
            let a = ball_point(3, rng);
            let th1 = sample_uniform_sphere(3, rng).unwrap();
            let th2 = if rng.random_bool(0.3) {
                let v: Vec<f64> = th1
                    .iter()
                    .map(|c| c + 1e-3 * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                crate::geometry::UnitVector::normalize(v).unwrap()
            } else {
                sample_uniform_sphere(3, rng).unwrap()
            };
            let r = rng.random_range(0..=1u8);
            one(loglik_lipschitz_check(slope(b), &a, &th1, &th2, r))
        }
    }
}

/// Run `trials` random instances of `kind`.
pub fn lemma_sweep(kind: LemmaKind, trials: usize, seed: u64, jobs: usize) -> Result<LemmaSweep> {
    let surrogates = SURROGATE_BETAS
        .iter()
        .map(|&b| Surrogate::new(Slope::new(b)?))
        .collect::<Result<Vec<_>>>()?;
    if kind == LemmaKind::RatioExpVarSurrogate || kind == LemmaKind::RatioExpVarLimitPhi {
        // The oracle is only meaningful when f(x)/x is non-decreasing.
        let pre_ok = surrogates
            .iter()
            .map(|s| RatioFn::Surrogate(*s))
            .chain([RatioFn::LimitPhi])
            .all(|f| f.satisfies_preconditions(10_000));
        if !pre_ok {
            return Err(Error::Config("ratio function fails its grid precondition".into()));
        }
    }
    let tree = StreamTree::new(seed).child(kind as u64);
    let results = par_map(trials, jobs, |t| {
        let mut rng = tree.stream(t as u64, Purpose::Lemma);
        trial(kind, t, &mut rng, &surrogates)
    });
    let mut sweep = LemmaSweep {
        kind,
        trials,
        rows: Vec::new(),
        skipped: 0,
    };
    for (rows, skipped) in results {
        sweep.rows.extend(rows);
        sweep.skipped += skipped;
    }
    Ok(sweep)
}
