//! Unit-sphere points, epsilon-nets and the nearest-atom quantiser.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::ops::Deref;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::textio::{read_points_file, write_points_file};

pub const UNIT_NORM_TOL: f64 = 1e-12;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// A point on the unit sphere `S_{d-1} ⊂ R^d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Accept `coords` if its norm is within [`UNIT_NORM_TOL`] of one.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ZeroDimension);
        }
        let n = norm(&coords);
        if (n - 1.0).abs() > UNIT_NORM_TOL || !n.is_finite() {
            return Err(Error::NotUnit {
                norm: n,
                tol: UNIT_NORM_TOL,
            });
        }
        Ok(Self(coords))
    }

    /// Scale `coords` onto the sphere.
    pub fn normalize(mut coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ZeroDimension);
        }
        let n = norm(&coords);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotUnit {
                norm: n,
                tol: UNIT_NORM_TOL,
            });
        }
        coords.iter_mut().for_each(|c| *c /= n);
        Ok(Self(coords))
    }

    /// The `i`-th standard basis vector of `R^d`.
    pub fn basis(d: usize, i: usize) -> Self {
        assert!(i < d, "basis index {i} out of range for dimension {d}");
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }
}

impl Deref for UnitVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Draw from the rotation-invariant law on `S_{d-1}`.
pub fn sample_uniform_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<UnitVector> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if d == 1 {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return Ok(UnitVector(vec![sign]));
    }
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-100 {
            return Ok(UnitVector(v.into_iter().map(|c| c / n).collect()));
        }
    }
}

/// How an [`EpsNet`]'s covering radius was checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coverage {
    /// Size of the last (passing) validation batch.
    pub validation_samples: usize,
    /// Number of validation rounds run.
    pub rounds: usize,
    /// Largest distance from a validation sample to its nearest atom.
    pub empirical_radius: f64,
    /// Radius the construction and validation aimed for (below `epsilon`).
    pub build_radius: f64,
    /// `false` when coverage is exact by construction (trivial nets),
    /// `true` when it is certified by sampling only.
    pub statistical: bool,
}

/// A finite subset of the unit sphere with a nearest-atom projection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsNet {
    pub atoms: Vec<UnitVector>,
    pub epsilon: f64,
    pub dim: usize,
    pub coverage: Option<Coverage>,
}

impl EpsNet {
    /// Wrap an existing atom list (for example one loaded from disk).
    pub fn from_atoms(dim: usize, epsilon: f64, atoms: Vec<UnitVector>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if atoms.is_empty() {
            return Err(Error::Config("an epsilon-net needs at least one atom".into()));
        }
        if let Some(a) = atoms.iter().find(|a| a.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: a.dim(),
            });
        }
        Ok(Self {
            atoms,
            epsilon,
            dim,
            coverage: None,
        })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Write the atoms as a point file (`d epsilon n` header).
    pub fn save(&self, path: &Path) -> Result<()> {
        let pts: Vec<&[f64]> = self.atoms.iter().map(|a| a.coords()).collect();
        write_points_file(path, self.dim, self.epsilon, &pts, None)
    }

    /// Read a net written by [`EpsNet::save`]. Coverage metadata is not stored.
    pub fn load(path: &Path) -> Result<Self> {
        let f = read_points_file(path)?;
        let atoms = f
            .points
            .into_iter()
            .map(UnitVector::new)
            .collect::<Result<Vec<_>>>()?;
        Self::from_atoms(f.dim, f.epsilon, atoms)
    }

    /// Upper covering bound `(1 + 2/ε)^d` on the cardinality.
    pub fn cardinality_bound(&self) -> f64 {
        covering_number_bounds(self.dim, self.epsilon).1
    }
}

/// Knobs for [`build_eps_net_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetOptions {
    pub validation_samples: usize,
    pub max_rounds: usize,
    pub max_atoms: usize,
    /// Build and validate at `(1 - margin) ε` so that coverage at `ε` holds
    /// with room to spare on points outside the validation batches.
    pub margin: f64,
}

impl Default for NetOptions {
    fn default() -> Self {
        Self {
            validation_samples: 100_000,
            max_rounds: 64,
            max_atoms: 200_000,
            margin: 0.1,
        }
    }
}

/// Build an ε-net of `S_{d-1}` with the default [`NetOptions`].
pub fn build_eps_net<R: Rng + ?Sized>(d: usize, epsilon: f64, rng: &mut R) -> Result<EpsNet> {
    build_eps_net_with(d, epsilon, NetOptions::default(), rng)
}

/// Uniform grid over ambient coordinates, for radius queries.
struct CellIndex {
    side: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl CellIndex {
    fn new<P: AsRef<[f64]>>(side: f64, points: &[P]) -> Self {
        let mut idx = Self {
            side,
            cells: HashMap::new(),
        };
        for (i, p) in points.iter().enumerate() {
            idx.insert(i, p.as_ref());
        }
        idx
    }

    fn insert(&mut self, i: usize, p: &[f64]) {
        let key = p.iter().map(|c| (c / self.side).floor() as i64).collect();
        self.cells.entry(key).or_default().push(i);
    }

    /// Call `f` on every stored index whose cell meets the cube of
    /// half-width `r` around `p`, a superset of the points within `r`.
    fn visit(&self, p: &[f64], r: f64, mut f: impl FnMut(usize)) {
        let lo: Vec<i64> = p.iter().map(|c| ((c - r) / self.side).floor() as i64).collect();
        let hi: Vec<i64> = p.iter().map(|c| ((c + r) / self.side).floor() as i64).collect();
        let span: f64 = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as f64).product();
        if span >= self.cells.len() as f64 {
            for members in self.cells.values() {
                members.iter().for_each(|&i| f(i));
            }
            return;
        }
        let mut key = lo.clone();
        loop {
            if let Some(members) = self.cells.get(&key) {
                members.iter().for_each(|&i| f(i));
            }
            // odometer increment
            let mut k = 0;
            loop {
                if k == key.len() {
                    return;
                }
                if key[k] < hi[k] {
                    key[k] += 1;
                    break;
                }
                key[k] = lo[k];
                k += 1;
            }
        }
    }
}

/// Max-heap entry: larger distance first, then lower index.
#[derive(PartialEq)]
struct Far(f64, usize);

impl Eq for Far {}

impl PartialOrd for Far {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Far {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Greedy farthest-point construction.
///
/// Starting from one uniform sample, the candidate farthest from the current
/// atoms is inserted until every candidate is within `r = (1 - margin) ε`. A
/// fresh batch of uniform samples then validates coverage at `r`; samples
/// that are still uncovered become the candidates of the next round. The
/// build succeeds once a whole batch is covered.
///
/// Every inserted atom is more than `r` from all earlier atoms, so the atoms
/// form an `r`-packing. The result is rejected if it has more than
/// `(1 + 2/ε)^d` atoms.
pub fn build_eps_net_with<R: Rng + ?Sized>(
    d: usize,
    epsilon: f64,
    opts: NetOptions,
    rng: &mut R,
) -> Result<EpsNet> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) || epsilon > 2.0 {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let first = sample_uniform_sphere(d, rng)?;
    if epsilon >= 2.0 {
        return Ok(EpsNet {
            atoms: vec![first],
            epsilon,
            dim: d,
            coverage: Some(Coverage {
                validation_samples: 0,
                rounds: 0,
                empirical_radius: 2.0,
                build_radius: 2.0,
                statistical: false,
            }),
        });
    }

    let radius = epsilon * (1.0 - opts.margin.clamp(0.0, 0.5));
    let r2 = radius * radius;
    let mut atoms: Vec<UnitVector> = vec![first];
    let mut candidates: Vec<UnitVector> = (0..opts.validation_samples.max(1))
        .map(|_| sample_uniform_sphere(d, rng))
        .collect::<Result<_>>()?;
    let mut worst = f64::INFINITY;

    for round in 1..=opts.max_rounds {
        // Squared distance from each candidate to its nearest atom.
        let mut nearest: Vec<f64> = nearest_distances(&candidates, &atoms, radius)
            .into_iter()
            .map(|x| x * x)
            .collect();
        let index = CellIndex::new(radius, &candidates);
        let mut heap: BinaryHeap<Far> = nearest.iter().enumerate().map(|(i, &v)| Far(v, i)).collect();
        while let Some(Far(far, idx)) = heap.pop() {
            if far > nearest[idx] {
                continue; // stale
            }
            if far <= r2 {
                break;
            }
            if atoms.len() >= opts.max_atoms {
                return Err(Error::NetBudgetExceeded {
                    budget: opts.max_atoms,
                });
            }
            let new_atom = candidates[idx].clone();
            // Only candidates closer to the new atom than `far` can improve.
            index.visit(&new_atom, far.sqrt(), |c| {
                let d2 = squared_distance(&candidates[c], &new_atom);
                if d2 < nearest[c] {
                    nearest[c] = d2;
                    heap.push(Far(d2, c));
                }
            });
            atoms.push(new_atom);
        }

        let batch: Vec<UnitVector> = (0..opts.validation_samples.max(1))
            .map(|_| sample_uniform_sphere(d, rng))
            .collect::<Result<_>>()?;
        let dists = nearest_distances(&batch, &atoms, radius);
        worst = dists.iter().copied().fold(0.0, f64::max);
        if worst <= radius {
            let bound = covering_number_bounds(d, epsilon).1.ceil();
            if atoms.len() as f64 > bound {
                return Err(Error::NetCardinality {
                    size: atoms.len(),
                    bound,
                });
            }
            return Ok(EpsNet {
                atoms,
                epsilon,
                dim: d,
                coverage: Some(Coverage {
                    validation_samples: batch.len(),
                    rounds: round,
                    empirical_radius: worst,
                    build_radius: radius,
                    statistical: true,
                }),
            });
        }
        candidates = batch
            .into_iter()
            .zip(dists)
            .filter(|(_, dist)| *dist > radius)
            .map(|(p, _)| p)
            .collect();
    }
    Err(Error::NetNoCoverage {
        epsilon,
        rounds: opts.max_rounds,
        worst,
    })
}

/// Exact distance from each point to its nearest atom. Atoms within `radius`
/// are found through a grid; points with none fall back to a full scan.
fn nearest_distances(points: &[UnitVector], atoms: &[UnitVector], radius: f64) -> Vec<f64> {
    let index = CellIndex::new(radius, atoms);
    let r2 = radius * radius;
    let full = |p: &UnitVector| {
        atoms
            .iter()
            .map(|a| squared_distance(p, a))
            .fold(f64::INFINITY, f64::min)
    };
    let one = |p: &UnitVector| {
        let mut best = f64::INFINITY;
        index.visit(p, radius, |i| best = best.min(squared_distance(p, &atoms[i])));
        if best > r2 {
            best = full(p);
        }
        best.sqrt()
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        points.par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        points.iter().map(one).collect()
    }
}

/// Largest distance from `samples` uniform sphere points to their nearest atom.
pub fn validate_net<R: Rng + ?Sized>(net: &EpsNet, samples: usize, rng: &mut R) -> Result<f64> {
    let batch: Vec<UnitVector> = (0..samples)
        .map(|_| sample_uniform_sphere(net.dim, rng))
        .collect::<Result<_>>()?;
    Ok(nearest_distances(&batch, &net.atoms, net.epsilon.min(2.0))
        .into_iter()
        .fold(0.0, f64::max))
}

/// Project `theta` onto its nearest atom (lowest index on ties).
pub fn quantize<'a>(theta: &[f64], net: &'a EpsNet) -> Result<(usize, &'a UnitVector)> {
    if theta.len() != net.dim {
        return Err(Error::DimensionMismatch {
            expected: net.dim,
            actual: theta.len(),
        });
    }
    // On the sphere the nearest atom is the one with the largest inner product.
    let mut best = 0;
    let mut best_dot = f64::NEG_INFINITY;
    for (i, a) in net.atoms.iter().enumerate() {
        let s = dot(theta, a);
        if s > best_dot {
            best_dot = s;
            best = i;
        }
    }
    Ok((best, &net.atoms[best]))
}

/// Lower and upper bounds on the ε-covering number of the unit ball in `R^d`.
pub fn covering_number_bounds(d: usize, epsilon: f64) -> (f64, f64) {
    if epsilon >= 1.0 {
        return (1.0, 1.0);
    }
    let d = d as i32;
    ((1.0 / epsilon).powi(d), (1.0 + 2.0 / epsilon).powi(d))
}

/// `log |atoms|`, an upper bound on the entropy of the quantised parameter.
pub fn net_entropy_bound(net: &EpsNet) -> f64 {
    (net.atoms.len() as f64).ln()
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::rng::{Purpose, StreamTree};

    fn rng(seed: u64) -> crate::rng::StreamRng {
        StreamTree::new(seed).stream(0, Purpose::NetBuild)
    }

    #[test]
    fn net_file_round_trip() {
        let net = build_eps_net(3, 0.7, &mut rng(8)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.txt");
        net.save(&path).unwrap();
        let back = EpsNet::load(&path).unwrap();
        assert_eq!(back.atoms, net.atoms);
        assert_eq!(back.epsilon, net.epsilon);
        assert!(back.coverage.is_none());
    }

    #[test]
    fn unit_vector_validation() {
        assert!(UnitVector::new(vec![0.6, 0.8]).is_ok());
        assert!(UnitVector::new(vec![0.6, 0.81]).is_err());
        assert!(UnitVector::new(vec![]).is_err());
        assert!(UnitVector::normalize(vec![0.0, 0.0]).is_err());
        let v = UnitVector::normalize(vec![3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(v[0], 0.6, epsilon = 1e-15);
    }

    #[test]
    fn sphere_sampling_basics() {
        let mut r = rng(1);
        assert!(sample_uniform_sphere(0, &mut r).is_err());
        let mut plus = 0;
        for _ in 0..10_000 {
            let v = sample_uniform_sphere(1, &mut r).unwrap();
            assert!(v[0] == 1.0 || v[0] == -1.0);
            plus += (v[0] > 0.0) as usize;
        }
        assert!((plus as f64 / 1e4 - 0.5).abs() < 0.02);
        let a = sample_uniform_sphere(3, &mut rng(9)).unwrap();
        let b = sample_uniform_sphere(3, &mut rng(9)).unwrap();
        assert_eq!(a, b);
        assert!((norm(&a) - 1.0).abs() <= UNIT_NORM_TOL);
    }

    #[test]
    fn sphere_sampling_mean_is_near_zero() {
        let mut r = rng(2);
        let n = 100_000;
        let mut mean = [0.0; 4];
        for _ in 0..n {
            let v = sample_uniform_sphere(4, &mut r).unwrap();
            for (m, c) in mean.iter_mut().zip(v.iter()) {
                *m += c / n as f64;
            }
        }
        // ‖mean‖ has scale √(1/N); 0.02 is ~6x that.
        assert!(norm(&mean) <= 0.02, "{}", norm(&mean));
    }

    #[test]
    fn trivial_nets() {
        let net = build_eps_net(4, 2.0, &mut rng(3)).unwrap();
        assert_eq!(net.len(), 1);
        let net = build_eps_net(1, 0.5, &mut rng(3)).unwrap();
        let mut coords: Vec<f64> = net.atoms.iter().map(|a| a[0]).collect();
        coords.sort_by(f64::total_cmp);
        assert_eq!(coords, vec![-1.0, 1.0]);
        assert!(build_eps_net(2, 0.0, &mut rng(3)).is_err());
        assert!(build_eps_net(2, 2.5, &mut rng(3)).is_err());
        assert!(build_eps_net(0, 0.5, &mut rng(3)).is_err());
    }

    #[test]
    fn net_in_three_dimensions_covers_and_respects_cardinality() {
        let net = build_eps_net(3, 0.5, &mut rng(4)).unwrap();
        assert!(net.len() as f64 <= 125.0, "{}", net.len());
        let cov = net.coverage.unwrap();
        assert!(cov.statistical && cov.empirical_radius <= 0.5);
        let radius = validate_net(&net, 100_000, &mut rng(5)).unwrap();
        assert!(radius <= 0.5, "{radius}");
        // packing: atoms pairwise further than the build radius
        for (i, a) in net.atoms.iter().enumerate() {
            for b in &net.atoms[..i] {
                assert!(distance(a, b) > cov.build_radius);
            }
        }
    }

    #[test]
    fn net_budget_is_enforced() {
        let opts = NetOptions {
            max_atoms: 5,
            ..NetOptions::default()
        };
        assert!(matches!(
            build_eps_net_with(3, 0.1, opts, &mut rng(6)),
            Err(Error::NetBudgetExceeded { budget: 5 })
        ));
    }

    #[test]
    fn quantize_cases() {
        let net = build_eps_net(3, 0.5, &mut rng(7)).unwrap();
        for (i, a) in net.atoms.iter().enumerate() {
            let (j, b) = quantize(a, &net).unwrap();
            assert_eq!(i, j);
            assert_eq!(distance(a, b), 0.0);
        }
        assert!(quantize(&[1.0, 0.0], &net).is_err());

        let d1 = EpsNet::from_atoms(
            1,
            0.5,
            vec![
                UnitVector::new(vec![1.0]).unwrap(),
                UnitVector::new(vec![-1.0]).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(quantize(&[1.0], &d1).unwrap().0, 0);
        assert_eq!(quantize(&[-1.0], &d1).unwrap().0, 1);
    }

    #[test]
    fn quantize_ties_go_to_lowest_index() {
        let net = EpsNet::from_atoms(2, 1.5, vec![UnitVector::basis(2, 0), UnitVector::basis(2, 1)]).unwrap();
        let theta = UnitVector::normalize(vec![1.0, 1.0]).unwrap();
        assert_eq!(quantize(&theta, &net).unwrap().0, 0);
    }

    #[test]
    fn quantize_matches_linear_scan_oracle() {
        let net = build_eps_net(3, 0.3, &mut rng(8)).unwrap();
        let mut r = rng(10);
        for _ in 0..2_000 {
            let theta = sample_uniform_sphere(3, &mut r).unwrap();
            let mut best = (0, f64::INFINITY);
            for (i, a) in net.atoms.iter().enumerate() {
                let dd = ((theta[0] - a[0]).powi(2) + (theta[1] - a[1]).powi(2) + (theta[2] - a[2]).powi(2))
                    .sqrt();
                if dd < best.1 {
                    best = (i, dd);
                }
            }
            let (idx, _) = quantize(&theta, &net).unwrap();
            assert_eq!(idx, best.0);
            assert!(best.1 <= 0.3 + 1e-9);
        }
    }

    #[test]
    fn covering_bounds() {
        assert_eq!(covering_number_bounds(3, 1.5), (1.0, 1.0));
        assert_eq!(covering_number_bounds(2, 0.5), (4.0, 25.0));
        let (lo, hi) = covering_number_bounds(5, 0.1);
        assert_abs_diff_eq!(lo, 1e5, epsilon = 1e-6);
        assert_abs_diff_eq!(hi, 21f64.powi(5), epsilon = 1e-6);
        for d in 1..6 {
            for e in [0.01, 0.2, 0.7, 0.99] {
                let (lo, hi) = covering_number_bounds(d, e);
                assert!(lo <= hi);
            }
        }
    }

    #[test]
    fn entropy_bound_dominates_plugin_entropy() {
        let single = build_eps_net(2, 2.0, &mut rng(11)).unwrap();
        assert_eq!(net_entropy_bound(&single), 0.0);
        let two = build_eps_net(1, 0.5, &mut rng(11)).unwrap();
        assert_abs_diff_eq!(net_entropy_bound(&two), std::f64::consts::LN_2);

        let net = build_eps_net(3, 0.5, &mut rng(12)).unwrap();
        let mut counts = vec![0usize; net.len()];
        let mut r = rng(13);
        let n = 1_000_000;
        for _ in 0..n {
            let theta = sample_uniform_sphere(3, &mut r).unwrap();
            counts[quantize(&theta, &net).unwrap().0] += 1;
        }
        let plugin: f64 = counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n as f64;
                -p * p.ln()
            })
            .sum();
        assert!(plugin <= net_entropy_bound(&net) + 1e-12);
    }
}
