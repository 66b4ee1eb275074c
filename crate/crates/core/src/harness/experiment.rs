//! Multi-episode regret simulations.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::Serialize;

use crate::agent::{run_episode, AgentState};
use crate::env::{sample_weighted, LogisticBanditEnv, PriorSpec};
use crate::error::Result;
use crate::geometry::dot;
use crate::harness::bounds::{entropy_bound, regret_bound_main, regret_bound_quantized, EntropyBound};
use crate::harness::config::{ConfigRecord, ExperimentConfig};
use crate::harness::csvout::{write_table, Cell};
use crate::harness::{mean_stderr, par_map};
use crate::math::{logistic, sigmoid};
use crate::metrics::{info_ratio_bound, information_ratio, InfoRatioReport};
use crate::rng::{Purpose, StreamTree};

/// Column order of the per-step trace.
pub const TRACE_COLUMNS: [&str; 10] = [
    "episode",
    "t",
    "action_dot_theta",
    "reward",
    "inst_regret_expected",
    "inst_regret_realized",
    "cum_regret_realized",
    "mutual_info",
    "gamma",
    "gamma_flag",
];

/// Regret above this at zero mutual information is reported separately.
pub const DEGENERATE_REGRET_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaFlag {
    Ok,
    /// Mutual information at or below the floor.
    Degenerate,
    /// Zero mutual information but non-negligible expected regret.
    DegenerateRegret,
    /// Above `4.5 d`.
    Exceeds,
    /// Not computed at this step.
    Skipped,
}

impl GammaFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::Degenerate => "degenerate",
            Self::DegenerateRegret => "degenerate_regret",
            Self::Exceeds => "exceeds",
            Self::Skipped => "skipped",
        }
    }

    fn classify(report: Option<&InfoRatioReport>) -> Self {
        match report {
            None => Self::Skipped,
            Some(r) if r.degenerate() => {
                if r.expected_regret > DEGENERATE_REGRET_TOL {
                    Self::DegenerateRegret
                } else {
                    Self::Degenerate
                }
            }
            Some(r) if !r.within_bound() => Self::Exceeds,
            Some(_) => Self::Ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub episode: usize,
    pub t: usize,
    pub action_dot_theta: f64,
    pub reward: u8,
    /// `σ(β) − logistic(β, ⟨A_t, θ*⟩)`
    pub inst_regret_expected: f64,
    /// Counterfactual optimal reward minus the observed reward.
    pub inst_regret_realized: f64,
    pub cum_regret_realized: f64,
    /// Posterior-exact expected regret, mutual information and Γ.
    pub info: Option<InfoRatioReport>,
    pub gamma_flag: GammaFlag,
}

impl TraceRow {
    fn cells(&self) -> Vec<Cell> {
        vec![
            self.episode.into(),
            self.t.into(),
            self.action_dot_theta.into(),
            self.reward.into(),
            self.inst_regret_expected.into(),
            self.inst_regret_realized.into(),
            self.cum_regret_realized.into(),
            self.info.map(|r| r.mutual_info).into(),
            self.info.and_then(|r| r.gamma).into(),
            self.gamma_flag.as_str().into(),
        ]
    }
}

/// Per-episode totals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpisodeTotals {
    pub cum_regret_expected: f64,
    pub cum_regret_realized: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegretTrace {
    pub rows: Vec<TraceRow>,
    pub episodes: Vec<EpisodeTotals>,
}

impl RegretTrace {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_table(out, &TRACE_COLUMNS, self.rows.iter().map(TraceRow::cells))
    }

    /// Mean over episodes of cumulative expected regret after each step.
    pub fn mean_cumulative_expected(&self, horizon: usize) -> Vec<f64> {
        let mut acc = vec![0.0; horizon];
        let mut running = 0.0;
        for r in &self.rows {
            if r.t == 1 {
                running = 0.0;
            }
            running += r.inst_regret_expected;
            acc[r.t - 1] += running;
        }
        let n = self.episodes.len().max(1) as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub config: ConfigRecord,
    pub mean_cum_regret_expected: f64,
    pub stderr_cum_regret_expected: f64,
    pub mean_cum_regret_realized: f64,
    pub stderr_cum_regret_realized: f64,
    pub bound_main: f64,
    pub bound_quantized: f64,
    pub gamma_bound: f64,
    pub entropy: EntropyBound,
    pub gamma_max: Option<f64>,
    pub gamma_evaluated: usize,
    pub gamma_exceeded: usize,
    pub gamma_degenerate: usize,
    pub degenerate_with_regret: usize,
}

impl Summary {
    /// Mean cumulative expected regret plus `k` standard errors.
    pub fn upper_expected(&self, k: f64) -> f64 {
        self.mean_cum_regret_expected + k * self.stderr_cum_regret_expected
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub trace: RegretTrace,
    pub summary: Summary,
}

impl ExperimentReport {
    /// Write `simulate.csv` and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join("simulate.csv");
        self.trace.write_csv(BufWriter::new(File::create(&csv_path)?))?;
        let json_path = dir.join("summary.json");
        let mut f = BufWriter::new(File::create(&json_path)?);
        serde_json::to_writer_pretty(&mut f, &self.summary)?;
        writeln!(f)?;
        f.flush()?;
        Ok((csv_path, json_path))
    }
}

/// Run one episode. The agent's particles (continuous prior) are drawn first
/// and the hidden parameter is one of them, so the agent's prior is exact.
fn run_one(
    cfg: &ExperimentConfig,
    tree: &StreamTree,
    episode: usize,
) -> Result<(Vec<TraceRow>, EpisodeTotals)> {
    let e = episode as u64;
    let beta = cfg.beta;
    let mut agent = AgentState::init(
        cfg.dim,
        &cfg.prior,
        cfg.particles,
        beta,
        &mut tree.stream(e, Purpose::Prior),
    )?;
    let mut env_rng = tree.stream(e, Purpose::Environment);
    let theta_star = match &cfg.prior {
        PriorSpec::UniformSphere => {
            let post = agent.posterior();
            post.atoms()[sample_weighted(post.weights(), &mut env_rng)].clone()
        }
        PriorSpec::Finite(p) => p.atoms()[p.sample_index(&mut env_rng)].clone(),
    };
    let mut env =
        LogisticBanditEnv::with_parameter(beta, theta_star.clone(), tree.stream(e, Purpose::Rewards));
    let mut counterfactual = tree.stream(e, Purpose::Counterfactual);
    let best = sigmoid(beta.get());

    let mut rows = Vec::with_capacity(cfg.horizon);
    let mut cum_realized = 0.0;
    let mut cum_expected = 0.0;
    run_episode(
        &mut env,
        &mut agent,
        cfg.horizon,
        &mut tree.stream(e, Purpose::Policy),
        |step| {
            let inner = dot(step.action, &theta_star);
            let expected = (best - logistic(beta, inner)).max(0.0);
            let optimal_reward = u8::from(counterfactual.random::<f64>() < best);
            let realized = f64::from(optimal_reward) - f64::from(step.reward);
            cum_realized += realized;
            cum_expected += expected;
            let info = (cfg.metrics_every > 0 && (step.t - 1) % cfg.metrics_every == 0).then(|| {
                let mut r = information_ratio(step.posterior, beta, cfg.dim);
                r.step = step.t;
                r
            });
            rows.push(TraceRow {
                episode,
                t: step.t,
                action_dot_theta: inner,
                reward: step.reward,
                inst_regret_expected: expected,
                inst_regret_realized: realized,
                cum_regret_realized: cum_realized,
                info,
                gamma_flag: GammaFlag::classify(info.as_ref()),
            });
        },
    )?;
    Ok((
        rows,
        EpisodeTotals {
            cum_regret_expected: cum_expected,
            cum_regret_realized: cum_realized,
        },
    ))
}

/// Run all episodes of `cfg`. Output is identical for any `cfg.jobs`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let tree = StreamTree::new(cfg.seed);
    let results = par_map(cfg.episodes, cfg.jobs, |e| run_one(cfg, &tree, e));

    let mut trace = RegretTrace::default();
    for r in results {
        let (rows, totals) = r?;
        trace.rows.extend(rows);
        trace.episodes.push(totals);
    }

    let expected: Vec<f64> = trace.episodes.iter().map(|e| e.cum_regret_expected).collect();
    let realized: Vec<f64> = trace.episodes.iter().map(|e| e.cum_regret_realized).collect();
    let (me, se) = mean_stderr(&expected);
    let (mr, sr) = mean_stderr(&realized);

    let beta = cfg.beta.get();
    let epsilon = cfg.effective_epsilon();
    let gamma_bound = info_ratio_bound(cfg.dim);
    let entropy = entropy_bound(
        cfg.dim,
        epsilon,
        cfg.net_budget,
        &mut tree.stream(u64::MAX, Purpose::NetBuild),
    )?;

    let mut gamma_max: Option<f64> = None;
    let (mut evaluated, mut exceeded, mut degenerate, mut degenerate_regret) = (0, 0, 0, 0);
    for row in &trace.rows {
        match row.gamma_flag {
            GammaFlag::Skipped => continue,
            GammaFlag::Exceeds => exceeded += 1,
            GammaFlag::Degenerate => degenerate += 1,
            GammaFlag::DegenerateRegret => {
                degenerate += 1;
                degenerate_regret += 1
            }
            GammaFlag::Ok => {}
        }
        evaluated += 1;
        if let Some(g) = row.info.and_then(|r| r.gamma) {
            gamma_max = Some(gamma_max.map_or(g, |m: f64| m.max(g)));
        }
    }

    let summary = Summary {
        config: cfg.record(),
        mean_cum_regret_expected: me,
        stderr_cum_regret_expected: se,
        mean_cum_regret_realized: mr,
        stderr_cum_regret_realized: sr,
        bound_main: regret_bound_main(cfg.dim, beta, cfg.horizon),
        bound_quantized: regret_bound_quantized(gamma_bound, cfg.horizon, entropy.value, epsilon, beta),
        gamma_bound,
        entropy,
        gamma_max,
        gamma_evaluated: evaluated,
        gamma_exceeded: exceeded,
        gamma_degenerate: degenerate,
        degenerate_with_regret: degenerate_regret,
    };
    Ok(ExperimentReport { trace, summary })
}
