//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process fails if any criterion fails.

use std::fs;
use std::process::Command;
use std::time::Instant;

use rand::Rng;

use logistic_ts::agent::{AgentState, Posterior};
use logistic_ts::env::{FinitePrior, PriorSpec};
use logistic_ts::geometry::{
    build_eps_net, net_entropy_bound, sample_uniform_sphere, validate_net, UnitVector,
};
use logistic_ts::harness::bounds::regret_bound_quantized;
use logistic_ts::harness::lemmas::{lemma_sweep, LemmaKind};
use logistic_ts::harness::scan::Family;
use logistic_ts::harness::{default_jobs, info_ratio_scan, run_experiment, ExperimentConfig, ScanSpec};
use logistic_ts::math::{delta_beta, psi, Surrogate};
use logistic_ts::metrics::information_ratio;
use logistic_ts::rng::{Purpose, StreamTree};
use logistic_ts::Slope;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn slope(b: f64) -> Slope {
    Slope::new(b).unwrap()
}

// Oracles written out independently of the library.
fn oracle_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn oracle_h2(p: f64) -> f64 {
    let term = |q: f64| if q > 0.0 { -q * q.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

fn oracle_psi(beta: f64, x: f64) -> f64 {
    oracle_sigmoid(beta) - oracle_sigmoid(beta * (1.0 - x))
}

fn criterion_1() -> Outcome {
    let spec = ScanSpec {
        seed: 20_240_601,
        jobs: default_jobs(),
        ..ScanSpec::default()
    };
    let out = info_ratio_scan(&spec).unwrap();
    let canonical = out.rows.iter().any(|r| r.family == Family::Canonical);
    let families = out
        .rows
        .iter()
        .filter(|r| r.family != Family::Random && r.family != Family::Clustered)
        .count();
    let max = out.max_gamma_over_d().unwrap_or(0.0);
    outcome(
        out.violations.is_empty() && canonical && out.rows.len() >= 30 * 10_000,
        format!(
            "{} posteriors ({} structured), max gamma/d = {max:.6}, {} above 4.5 d",
            out.rows.len(),
            families,
            out.violations.len()
        ),
    )
}

fn criterion_2() -> Outcome {
    let e = UnitVector::basis(1, 0);
    let post = Posterior::uniform(vec![e.clone(), e.neg()]).unwrap();
    let r = information_ratio(&post, slope(2.0), 1);
    let regret = 0.5 * 1f64.tanh();
    let mi = std::f64::consts::LN_2 - oracle_h2(oracle_sigmoid(2.0));
    let gamma = r.gamma.unwrap_or(f64::NAN);
    let pass = (r.expected_regret - regret).abs() <= 1e-12
        && (r.mutual_info - mi).abs() <= 1e-12
        && (gamma - 0.4423).abs() <= 1e-4;
    outcome(
        pass,
        format!(
            "regret {:.16} (oracle {regret:.16}), MI {:.16} (oracle {mi:.16}), gamma {gamma:.6}",
            r.expected_regret, r.mutual_info
        ),
    )
}

fn criterion_3() -> Outcome {
    let kinds = [
        LemmaKind::MiGe2Var,
        LemmaKind::MiLowerBound,
        LemmaKind::SquaredRegretUpper,
        LemmaKind::InnerProductD,
        LemmaKind::RatioExpVarSurrogate,
        LemmaKind::RatioExpVarLimitPhi,
        LemmaKind::VarianceRatioLimit,
        LemmaKind::BetaMonotonicity,
        LemmaKind::MiChainIdentity,
        LemmaKind::GammaChain,
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for k in kinds {
        let s = lemma_sweep(k, k.default_trials(), 77, default_jobs()).unwrap();
        let v = s.violations();
        pass &= v == 0 && !s.rows.is_empty();
        parts.push(format!("{} {}/{}", k.name(), s.rows.len() - v, s.rows.len()));
    }
    outcome(pass, parts.join(", "))
}

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, beta, horizon) in [
        (1usize, 2.0, 500usize),
        (2, 1.0, 2000),
        (2, 20.0, 2000),
        (3, 5.0, 1000),
    ] {
        let mut cfg = ExperimentConfig::new(d, slope(beta), horizon);
        cfg.episodes = 200;
        cfg.particles = 500;
        cfg.metrics_every = 0;
        cfg.net_budget = 0;
        cfg.jobs = default_jobs();
        cfg.seed = 4_000 + d as u64;
        if d == 1 {
            let e = UnitVector::basis(1, 0);
            cfg.prior = PriorSpec::Finite(FinitePrior::uniform(vec![e.clone(), e.neg()]).unwrap());
        }
        let s = run_experiment(&cfg).unwrap().summary;
        let upper = s.upper_expected(3.0);
        let upper_realized = s.mean_cum_regret_realized + 3.0 * s.stderr_cum_regret_realized;
        let ok = upper <= s.bound_main && upper_realized <= s.bound_main;
        pass &= ok;
        parts.push(format!(
            "(d={d}, beta={beta}, T={horizon}) {:.2}±{:.2} vs {:.2}",
            s.mean_cum_regret_expected, s.stderr_cum_regret_expected, s.bound_main
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let (d, beta, horizon) = (2usize, 5.0, 1000usize);
    let epsilon = d as f64 / (beta * horizon as f64);
    let tree = StreamTree::new(5_005);
    let net = build_eps_net(d, epsilon, &mut tree.stream(0, Purpose::NetBuild)).unwrap();
    let radius = validate_net(&net, 100_000, &mut tree.stream(0, Purpose::NetValidate)).unwrap();
    let h = net_entropy_bound(&net);
    let cover_bound = d as f64 * (1.0 + 2.0 / epsilon).ln();
    let bound = regret_bound_quantized(4.5 * d as f64, horizon, h, epsilon, beta);

    let mut cfg = ExperimentConfig::new(d, slope(beta), horizon);
    cfg.episodes = 200;
    cfg.particles = 500;
    cfg.metrics_every = 0;
    cfg.net_budget = 0;
    cfg.jobs = default_jobs();
    cfg.seed = 5_005;
    let s = run_experiment(&cfg).unwrap().summary;
    let upper = s.upper_expected(3.0);
    let pass = radius <= epsilon && h <= cover_bound && upper <= bound;
    outcome(
        pass,
        format!(
            "|net| = {}, radius {radius:.3e} <= {epsilon:.1e}, log|net| = {h:.4} <= {cover_bound:.4}, regret {:.2}±{:.2} vs {bound:.2}",
            net.len(),
            s.mean_cum_regret_expected,
            s.stderr_cum_regret_expected
        ),
    )
}

fn criterion_6() -> Outcome {
    let tree = StreamTree::new(6_006);
    let mut worst = 0.0f64;
    for trial in 0..1000u64 {
        let mut rng = tree.stream(trial, Purpose::Lemma);
        let d = rng.random_range(1..=4);
        let n = rng.random_range(1..=20);
        let len = rng.random_range(0..=50);
        let beta = 10f64.powf(rng.random_range(-1.0..2.0));
        let atoms: Vec<UnitVector> = (0..n)
            .map(|_| sample_uniform_sphere(d, &mut rng).unwrap())
            .collect();
        let mut w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.01).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        let mut agent =
            AgentState::from_posterior(Posterior::new(atoms.clone(), w.clone()).unwrap(), slope(beta));
        let mut history = Vec::new();
        for _ in 0..len {
            let a: Vec<f64> = if rng.random_bool(0.5) {
                atoms[rng.random_range(0..n)].to_vec()
            } else {
                let u = sample_uniform_sphere(d, &mut rng).unwrap();
                let r = rng.random::<f64>();
                u.iter().map(|c| c * r).collect()
            };
            let reward = rng.random_range(0..=1u8);
            agent.update(&a, reward).unwrap();
            history.push((a, reward));
        }
        // Full-history likelihood product, normalised in log space.
        let logs: Vec<f64> = atoms
            .iter()
            .zip(&w)
            .map(|(theta, wi)| {
                wi.ln()
                    + history
                        .iter()
                        .map(|(a, r)| {
                            let z = beta * a.iter().zip(theta.iter()).map(|(x, y)| x * y).sum::<f64>();
                            let p = if *r == 1 {
                                oracle_sigmoid(z)
                            } else {
                                oracle_sigmoid(-z)
                            };
                            p.ln()
                        })
                        .sum::<f64>()
            })
            .collect();
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = logs.iter().map(|l| (l - m).exp()).sum();
        for (l, got) in logs.iter().zip(agent.posterior().weights()) {
            worst = worst.max(((l - m).exp() / z - got).abs());
        }
    }
    outcome(
        worst <= 1e-10,
        format!("1000 histories, max weight error {worst:.3e}"),
    )
}

fn criterion_7() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for b in [0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0] {
        let s = Surrogate::new(slope(b)).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 1..=10_000 {
            let x = 2.0 * k as f64 / 10_000.0;
            let v = s.eval(x);
            let ratio = v / x;
            if v < psi(slope(b), x) || ratio < prev - 1e-10 {
                pass = false;
                notes.push(format!("surrogate shape fails at beta={b}, x={x}"));
                break;
            }
            prev = ratio;
        }
    }
    let grid = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
    let bps: Vec<_> = grid
        .iter()
        .map(|&b| delta_beta(slope(b), 1e-10).unwrap())
        .collect();
    let delta_ok = bps.windows(2).all(|w| w[1].delta <= w[0].delta);
    let ratio_ok = bps.windows(2).all(|w| w[1].ratio_at_delta >= w[0].ratio_at_delta);
    pass &= delta_ok && ratio_ok;

    let (mut best_x, mut best) = (0.0, f64::NEG_INFINITY);
    for k in 1..=1_000_000 {
        let x = 2.0 * k as f64 / 1e6;
        let r = oracle_psi(1.0, x) / x;
        if r > best {
            best = r;
            best_x = x;
        }
    }
    let d1 = bps[2].delta;
    let d1_ok = (d1 - 1.5).abs() <= 0.05 && (d1 - best_x).abs() <= 1e-4;
    pass &= d1_ok;
    notes.push(format!(
        "delta non-increasing {delta_ok}, ratio non-decreasing {ratio_ok}, delta_1 = {d1:.6} (grid {best_x:.6})"
    ));
    outcome(pass, notes.join("; "))
}

fn criterion_8() -> Outcome {
    let s = lemma_sweep(LemmaKind::LoglikLipschitz, 100_000, 8_008, default_jobs()).unwrap();
    outcome(
        s.violations() == 0 && s.rows.len() == 100_000,
        format!("{} draws, {} violations", s.rows.len(), s.violations()),
    )
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |jobs: &str| {
        let out = dir.path().join(format!("jobs{jobs}"));
        let status = Command::new(env!("CARGO_BIN_EXE_lts"))
            .args([
                "simulate",
                "--dim",
                "2",
                "--beta",
                "3",
                "--horizon",
                "60",
                "--episodes",
                "24",
                "--particles",
                "80",
                "--seed",
                "99",
                "--jobs",
                jobs,
            ])
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        (
            fs::read(out.join("simulate.csv")).unwrap(),
            fs::read(out.join("summary.json")).unwrap(),
        )
    };
    let (csv1, json1) = run("1");
    let (csv8, json8) = run("8");
    let lines = csv1.iter().filter(|&&b| b == b'\n').count();
    outcome(
        csv1 == csv8 && json1 == json8 && lines == 24 * 60 + 1,
        format!("{} bytes, {lines} lines, identical: {}", csv1.len(), csv1 == csv8),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("information-ratio bound", criterion_1),
        ("canonical two-atom case", criterion_2),
        ("lemma oracles", criterion_3),
        ("regret below main bound", criterion_4),
        ("quantized bound", criterion_5),
        ("exact Bayes posterior", criterion_6),
        ("surrogate and breakpoint", criterion_7),
        ("log-likelihood Lipschitz", criterion_8),
        ("determinism across jobs", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] criterion {} {name} ({:.1}s): {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
