//! Synthetic problems with controlled conditioning, sparsity and noise.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::oracle::{oracle_solution, Oracle, ORACLE_TOL};
use crate::error::{Error, Result};
use crate::problem::{nuclear_norm, ConstraintSet, LsProblem, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformKind {
    Identity,
    RandomOrthogonal,
}

/// Sparse-vector problem: `y = A x_gt + w` with `Φ x_gt` `s`-sparse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub n: usize,
    pub d: usize,
    pub sparsity: usize,
    pub kappa: f64,
    pub transform: TransformKind,
    #[serde(default = "default_snr")]
    pub snr: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Low-rank matrix problem: `Y = A X_gt + W` with `rank(X_gt) = rank`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowRankSpec {
    pub n: usize,
    pub d: usize,
    pub q: usize,
    pub rank: usize,
    pub kappa: f64,
    #[serde(default = "default_snr")]
    pub snr: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_snr() -> f64 {
    10.0
}

/// Generator `κ` of the desk-scale presets. The singular values of `A` then
/// span a factor `κ^{(d−1)/d}`, so `L/μ ≈ κ² ≈ 10⁴`.
pub const PRESET_KAPPA: f64 = 100.0;

impl SynthSpec {
    /// `n = 10000`, `d = 100`, `s = 10`, `Φ = I`.
    pub fn syn1_small(seed: u64) -> Self {
        SynthSpec {
            n: 10_000,
            d: 100,
            sparsity: 10,
            kappa: PRESET_KAPPA,
            transform: TransformKind::Identity,
            snr: 10.0,
            seed,
        }
    }

    /// Syn1-small with a random orthogonal dictionary `Φ`.
    pub fn syn2_small(seed: u64) -> Self {
        SynthSpec {
            transform: TransformKind::RandomOrthogonal,
            ..Self::syn1_small(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::InvalidDimension(format!("n={} d={}", self.n, self.d)));
        }
        if self.sparsity == 0 || self.sparsity > self.d {
            return Err(Error::InvalidConfig(format!(
                "sparsity {} must lie in 1..={}",
                self.sparsity, self.d
            )));
        }
        check_kappa_snr(self.kappa, self.snr)
    }
}

impl LowRankSpec {
    /// `n = 5000`, `d = q = 50`, rank 5.
    pub fn syn3_small(seed: u64) -> Self {
        LowRankSpec {
            n: 5000,
            d: 50,
            q: 50,
            rank: 5,
            kappa: PRESET_KAPPA,
            snr: 10.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 || self.q == 0 {
            return Err(Error::InvalidDimension(format!(
                "n={} d={} q={}",
                self.n, self.d, self.q
            )));
        }
        if self.rank == 0 || self.rank > self.d.min(self.q) {
            return Err(Error::InvalidConfig(format!("rank {}", self.rank)));
        }
        check_kappa_snr(self.kappa, self.snr)
    }
}

fn check_kappa_snr(kappa: f64, snr: f64) -> Result<()> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::InvalidConfig(format!("kappa {kappa} must be >= 1")));
    }
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::InvalidConfig(format!("snr {snr} must be positive")));
    }
    Ok(())
}

/// A generated problem with its ground truth and certified reference solution.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub problem: LsProblem,
    pub x_gt: Point,
    pub oracle: Oracle,
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Gaussian `n×d` matrix whose singular values are replaced by the geometric
/// sequence `σ_i = σ_{i−1}/κ^{1/d}` starting from the largest one.
pub fn conditioned_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize, kappa: f64) -> Result<DMatrix<f64>> {
    let g = gaussian(rng, n, d);
    let svd = g.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Numerical("svd did not return factors".into())),
    };
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let ratio = kappa.powf(-1.0 / d as f64);
    let mut scaled = u;
    let mut sigma = sv[order[0]];
    for &k in &order {
        scaled.column_mut(k).scale_mut(sigma);
        sigma *= ratio;
    }
    Ok(scaled * v_t)
}

/// Haar-distributed orthogonal matrix via QR with sign correction.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let qr = gaussian(rng, d, d).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn add_noise(rng: &mut ChaCha8Rng, signal: DMatrix<f64>, snr: f64) -> DMatrix<f64> {
    let w = gaussian(rng, signal.nrows(), signal.ncols());
    let (s, wn) = (signal.norm(), w.norm());
    if s == 0.0 || wn == 0.0 {
        return signal;
    }
    signal + w * (s / (snr * wn))
}

/// Generates the problem only, without computing the oracle.
pub fn gen_problem(spec: &SynthSpec) -> Result<(LsProblem, Point)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let a = conditioned_matrix(&mut rng, spec.n, spec.d, spec.kappa)?;
    let phi = match spec.transform {
        TransformKind::Identity => None,
        TransformKind::RandomOrthogonal => Some(random_orthogonal(&mut rng, spec.d)),
    };
    let support = rand::seq::index::sample(&mut rng, spec.d, spec.sparsity);
    let mut u = Point::zeros(spec.d, 1);
    for k in support.iter() {
        u[k] = rng.sample(StandardNormal);
    }
    let radius = u.iter().map(|v| v.abs()).sum::<f64>();
    let x_gt = match &phi {
        Some(phi) => phi.tr_mul(&u),
        None => u,
    };
    let y = add_noise(&mut rng, &a * &x_gt, spec.snr);
    let constraint = match phi {
        Some(phi) => ConstraintSet::transformed_l1(phi, radius)?,
        None => ConstraintSet::l1(radius)?,
    };
    Ok((LsProblem::new(a, y, constraint)?, x_gt))
}

/// Generates a sparse problem and its certified oracle.
pub fn gen_synthetic(spec: &SynthSpec) -> Result<Synthetic> {
    let (problem, x_gt) = gen_problem(spec)?;
    let oracle = oracle_solution(&problem, ORACLE_TOL)?;
    Ok(Synthetic {
        problem,
        x_gt,
        oracle,
    })
}

/// Generates the low-rank problem only, without computing the oracle.
pub fn gen_lowrank_problem(spec: &LowRankSpec) -> Result<(LsProblem, Point)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let a = conditioned_matrix(&mut rng, spec.n, spec.d, spec.kappa)?;
    let left = gaussian(&mut rng, spec.d, spec.rank);
    let right = gaussian(&mut rng, spec.q, spec.rank);
    let x_gt = &left * right.transpose();
    let radius = nuclear_norm(&x_gt);
    let y = add_noise(&mut rng, &a * &x_gt, spec.snr);
    let constraint = ConstraintSet::nuclear(radius, spec.d, spec.q)?;
    Ok((LsProblem::new(a, y, constraint)?, x_gt))
}

pub fn gen_lowrank(spec: &LowRankSpec) -> Result<Synthetic> {
    let (problem, x_gt) = gen_lowrank_problem(spec)?;
    let oracle = oracle_solution(&problem, ORACLE_TOL)?;
    Ok(Synthetic {
        problem,
        x_gt,
        oracle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(transform: TransformKind) -> SynthSpec {
        SynthSpec {
            n: 200,
            d: 20,
            sparsity: 3,
            kappa: 100.0,
            transform,
            snr: 10.0,
            seed: 4,
        }
    }

    #[test]
    fn condition_number_and_snr() {
        let spec = small(TransformKind::Identity);
        let (p, x_gt) = gen_problem(&spec).unwrap();
        let sv = p.a().clone().singular_values();
        let cond = sv.max() / sv.min();
        let expected = 100f64.powf(19.0 / 20.0);
        assert!((cond / expected - 1.0).abs() < 1e-9, "{cond} vs {expected}");
        let signal = p.a() * &x_gt;
        let noise = p.y() - &signal;
        assert!((signal.norm() / noise.norm() - 10.0).abs() < 1e-9);
        assert_eq!(x_gt.iter().filter(|v| **v != 0.0).count(), 3);
        let r = p.constraint().radius().unwrap();
        assert!((r - x_gt.iter().map(|v| v.abs()).sum::<f64>()).abs() < 1e-15);
    }

    #[test]
    fn transformed_ground_truth_is_on_boundary() {
        let spec = small(TransformKind::RandomOrthogonal);
        let (p, x_gt) = gen_problem(&spec).unwrap();
        let gauge = p.constraint().gauge(&x_gt);
        assert!((gauge - p.constraint().radius().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn deterministic() {
        let spec = small(TransformKind::RandomOrthogonal);
        let (p1, _) = gen_problem(&spec).unwrap();
        let (p2, _) = gen_problem(&spec).unwrap();
        assert_eq!(p1.a(), p2.a());
        assert_eq!(p1.y(), p2.y());
    }

    #[test]
    fn lowrank_shapes() {
        let spec = LowRankSpec {
            n: 60,
            d: 6,
            q: 4,
            rank: 2,
            kappa: 10.0,
            snr: 10.0,
            seed: 1,
        };
        let (p, x_gt) = gen_lowrank_problem(&spec).unwrap();
        assert_eq!(p.dim(), 6);
        assert_eq!(p.responses(), 4);
        let sv = x_gt.singular_values();
        assert_eq!(sv.iter().filter(|v| **v > 1e-10).count(), 2);
    }

    #[test]
    fn invalid_specs() {
        let mut spec = small(TransformKind::Identity);
        spec.sparsity = 21;
        assert!(gen_problem(&spec).is_err());
        spec.sparsity = 2;
        spec.kappa = 0.5;
        assert!(gen_problem(&spec).is_err());
    }
}
