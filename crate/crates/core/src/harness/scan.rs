//! Randomised and structured searches for large information ratios.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::Serialize;

use crate::agent::Posterior;
use crate::error::Result;
use crate::geometry::{sample_uniform_sphere, UnitVector};
use crate::harness::csvout::{write_table, Cell};
use crate::harness::par_map;
use crate::math::Slope;
use crate::metrics::{information_ratio, InfoRatioReport, BOUND_TOL};
use crate::rng::{Purpose, StreamTree};

pub const SCAN_COLUMNS: [&str; 11] = [
    "d",
    "beta",
    "family",
    "trial",
    "n_atoms",
    "expected_regret",
    "mutual_info",
    "gamma",
    "gamma_over_d",
    "running_max",
    "flag",
];

/// Shapes of posteriors tried by the scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Uniform atoms, Dirichlet weights.
    Random,
    /// Atoms around one random centre.
    Clustered,
    /// `{u, -u}` with arbitrary weights.
    Antipodal,
    /// One atom with almost all the mass.
    NearPointMass,
    /// Vertices of a rotated regular simplex.
    Simplex,
    /// `{±e_i}` after a random rotation.
    CrossPolytope,
    /// Two tight clusters around `u` and `-u`.
    AntipodalClusters,
    /// `{+1, -1}` in one dimension with equal weights.
    Canonical,
}

impl Family {
    pub const STRUCTURED: [Family; 5] = [
        Family::Antipodal,
        Family::NearPointMass,
        Family::Simplex,
        Family::CrossPolytope,
        Family::AntipodalClusters,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::Clustered => "clustered",
            Self::Antipodal => "antipodal",
            Self::NearPointMass => "near_point_mass",
            Self::Simplex => "simplex",
            Self::CrossPolytope => "cross_polytope",
            Self::AntipodalClusters => "antipodal_clusters",
            Self::Canonical => "canonical",
        }
    }
}

fn dirichlet<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    // Concentration spread over two decades so both flat and spiky weights occur.
    let alpha = 10f64.powf(rng.random_range(-1.0..1.0));
    let g = Gamma::new(alpha, 1.0).expect("positive shape");
    let mut w: Vec<f64> = (0..n).map(|_| g.sample(rng)).collect();
    let mut total: f64 = w.iter().sum();
    if total.is_nan() || total <= 0.0 {
        w = vec![1.0; n];
        total = n as f64;
    }
    w.iter_mut().for_each(|x| *x /= total);
    w
}

fn perturbed<R: Rng + ?Sized>(centre: &[f64], spread: f64, rng: &mut R) -> UnitVector {
    loop {
        let v: Vec<f64> = centre
            .iter()
            .map(|c| c + spread * rng.sample::<f64, _>(StandardNormal))
            .collect();
        if let Ok(u) = UnitVector::normalize(v) {
            return u;
        }
    }
}

/// Random orthogonal matrix (rows) by Gram-Schmidt on Gaussian vectors.
fn random_rotation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(d);
    while rows.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for r in &rows {
            let p: f64 = v.iter().zip(r).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(r).for_each(|(a, b)| *a -= p * b);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            rows.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    rows
}

fn rotate(rot: &[Vec<f64>], v: &[f64]) -> UnitVector {
    let out: Vec<f64> = rot
        .iter()
        .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect();
    UnitVector::normalize(out).expect("rotation keeps the norm")
}

/// `d + 1` unit vectors in `R^d` with pairwise inner product `-1/d`.
pub fn simplex_vertices(d: usize) -> Vec<UnitVector> {
    // Centre the basis of R^{d+1}, then express it in an orthonormal basis
    // of the hyperplane orthogonal to (1, ..., 1).
    let m = d + 1;
    let centred: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| if i == j { 1.0 } else { 0.0 } - 1.0 / m as f64)
                .collect()
        })
        .collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    for v in &centred {
        if basis.len() == d {
            break;
        }
        let mut w = v.clone();
        for b in &basis {
            let p: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            basis.push(w.into_iter().map(|x| x / n).collect());
        }
    }
    centred
        .iter()
        .map(|v| {
            let coords: Vec<f64> = basis
                .iter()
                .map(|b| b.iter().zip(v).map(|(x, y)| x * y).sum())
                .collect();
            UnitVector::normalize(coords).expect("simplex vertex is nonzero")
        })
        .collect()
}

/// A random posterior of the given family with at most `n_max` atoms.
pub fn random_posterior<R: Rng + ?Sized>(
    family: Family,
    d: usize,
    n_min: usize,
    n_max: usize,
    rng: &mut R,
) -> Posterior {
    let n = rng.random_range(n_min.max(1)..=n_max.max(n_min.max(1)));
    let (atoms, weights) = match family {
        Family::Random => {
            let atoms = (0..n).map(|_| sample_uniform_sphere(d, rng).unwrap()).collect();
            (atoms, dirichlet(n, rng))
        }
        Family::Clustered => {
            let c = sample_uniform_sphere(d, rng).unwrap();
            let spread = 10f64.powf(rng.random_range(-3.0..0.0));
            let atoms = (0..n).map(|_| perturbed(&c, spread, rng)).collect();
            (atoms, dirichlet(n, rng))
        }
        Family::Antipodal => {
            let u = sample_uniform_sphere(d, rng).unwrap();
            let p = match rng.random_range(0..3) {
                0 => 0.5,
                1 => rng.random::<f64>(),
                _ => 10f64.powf(rng.random_range(-12.0..-1.0)),
            };
            (vec![u.clone(), u.neg()], vec![1.0 - p, p])
        }
        Family::NearPointMass => {
            let n = n.max(2);
            let atoms: Vec<UnitVector> = (0..n).map(|_| sample_uniform_sphere(d, rng).unwrap()).collect();
            let eta = 10f64.powf(rng.random_range(-12.0..-1.0));
            let rest = dirichlet(n - 1, rng);
            let mut w = vec![1.0 - eta];
            w.extend(rest.iter().map(|r| r * eta));
            (atoms, w)
        }
        Family::Simplex => {
            let rot = random_rotation(d, rng);
            let atoms: Vec<UnitVector> = simplex_vertices(d).iter().map(|v| rotate(&rot, v)).collect();
            let k = atoms.len();
            let w = if rng.random_bool(0.5) {
                vec![1.0 / k as f64; k]
            } else {
                dirichlet(k, rng)
            };
            (atoms, w)
        }
        Family::CrossPolytope => {
            let rot = random_rotation(d, rng);
            let atoms: Vec<UnitVector> = (0..d)
                .flat_map(|i| {
                    let e = UnitVector::basis(d, i);
                    [rotate(&rot, &e), rotate(&rot, &e.neg())]
                })
                .collect();
            let k = atoms.len();
            let w = if rng.random_bool(0.5) {
                vec![1.0 / k as f64; k]
            } else {
                dirichlet(k, rng)
            };
            (atoms, w)
        }
        Family::AntipodalClusters => {
            let u = sample_uniform_sphere(d, rng).unwrap();
            let neg = u.neg();
            let spread = 10f64.powf(rng.random_range(-4.0..-1.0));
            let n = n.max(2);
            let atoms = (0..n)
                .map(|i| perturbed(if i % 2 == 0 { &u } else { &neg }, spread, rng))
                .collect();
            (atoms, dirichlet(n, rng))
        }
        Family::Canonical => {
            let e = UnitVector::basis(1, 0);
            (vec![e.clone(), e.neg()], vec![0.5, 0.5])
        }
    };
    let total: f64 = weights.iter().sum();
    let weights = weights.into_iter().map(|w| w / total).collect();
    Posterior::new(atoms, weights).expect("generated posterior is valid")
}

/// What to scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub dims: Vec<usize>,
    pub betas: Vec<f64>,
    pub n_min: usize,
    pub n_max: usize,
    /// Random posteriors per `(d, β)` cell.
    pub trials: usize,
    /// Posteriors per structured family per cell.
    pub structured_trials: usize,
    pub seed: u64,
    pub jobs: usize,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            dims: vec![1, 2, 3, 4, 5],
            betas: vec![0.5, 1.0, 2.0, 5.0, 10.0, 100.0],
            n_min: 2,
            n_max: 50,
            trials: 10_000,
            structured_trials: 200,
            seed: 0,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub d: usize,
    pub beta: f64,
    pub family: Family,
    pub trial: usize,
    pub report: InfoRatioReport,
    pub n_atoms: usize,
    pub running_max: f64,
}

impl ScanRow {
    pub fn gamma_over_d(&self) -> Option<f64> {
        self.report.gamma.map(|g| g / self.d as f64)
    }

    pub fn flag(&self) -> &'static str {
        if self.report.degenerate() {
            "degenerate"
        } else if self.report.within_bound() {
            "ok"
        } else {
            "exceeds"
        }
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.d.into(),
            self.beta.into(),
            self.family.as_str().into(),
            self.trial.into(),
            self.n_atoms.into(),
            self.report.expected_regret.into(),
            self.report.mutual_info.into(),
            self.report.gamma.into(),
            self.gamma_over_d().into(),
            self.running_max.into(),
            self.flag().into(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanOutput {
    pub rows: Vec<ScanRow>,
    /// Posteriors whose Γ exceeded `4.5 d`, for reproduction.
    pub violations: Vec<(ScanRow, Posterior)>,
}

impl ScanOutput {
    pub fn max_gamma_over_d(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(ScanRow::gamma_over_d)
            .reduce(f64::max)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_table(out, &SCAN_COLUMNS, self.rows.iter().map(ScanRow::cells))
    }
}

struct Job {
    cell: usize,
    d: usize,
    beta: f64,
    family: Family,
    trial: usize,
}

/// Scan `spec`. Each trial draws its posterior from its own stream, so the
/// result is independent of `spec.jobs`. The canonical two-atom case is
/// appended to every `d = 1, β = 2` cell.
pub fn info_ratio_scan(spec: &ScanSpec) -> Result<ScanOutput> {
    for &b in &spec.betas {
        Slope::new(b)?;
    }
    let tree = StreamTree::new(spec.seed);
    let mut jobs = Vec::new();
    let mut cell = 0;
    for &d in &spec.dims {
        if d == 0 {
            return Err(crate::Error::ZeroDimension);
        }
        for &beta in &spec.betas {
            let mut trial = 0;
            let mut push = |family, jobs: &mut Vec<Job>| {
                jobs.push(Job {
                    cell,
                    d,
                    beta,
                    family,
                    trial,
                });
                trial += 1;
            };
            for k in 0..spec.trials {
                push(
                    if k % 2 == 0 {
                        Family::Random
                    } else {
                        Family::Clustered
                    },
                    &mut jobs,
                );
            }
            if spec.trials > 0 {
                for f in Family::STRUCTURED {
                    for _ in 0..spec.structured_trials {
                        push(f, &mut jobs);
                    }
                }
                if d == 1 && beta == 2.0 {
                    push(Family::Canonical, &mut jobs);
                }
            }
            cell += 1;
        }
    }

    let evaluated = par_map(jobs.len(), spec.jobs, |i| {
        let j = &jobs[i];
        let mut rng = tree.child(j.cell as u64).stream(j.trial as u64, Purpose::Scan);
        let post = random_posterior(j.family, j.d, spec.n_min, spec.n_max, &mut rng);
        let beta = Slope::new(j.beta).expect("checked above");
        let report = information_ratio(&post, beta, j.d);
        (report, post)
    });

    let mut out = ScanOutput::default();
    let mut running = f64::NEG_INFINITY;
    for (j, (report, post)) in jobs.iter().zip(evaluated) {
        if let Some(g) = report.gamma {
            running = running.max(g / j.d as f64);
        }
        let row = ScanRow {
            d: j.d,
            beta: j.beta,
            family: j.family,
            trial: j.trial,
            n_atoms: post.len(),
            report,
            running_max: running.max(0.0),
        };
        if report.gamma.is_some_and(|g| g > report.bound + BOUND_TOL) {
            out.violations.push((row.clone(), post));
        }
        out.rows.push(row);
    }
    Ok(out)
}
