//! Computable forms of the convergence theory for Gaussian sketches: the
//! expected Gaussian norm `b_m`, Gaussian-width bounds, the inner/outer
//! contraction bounds α, ρ, σ, and the composite rate factors.
//!
//! All bounds are high-probability statements for i.i.d. Gaussian sketches;
//! [`Diagnostics::advisory_only`] marks results computed for other sketch kinds.

use crate::error::{Error, Result};
use crate::sketch::SketchKind;

/// Default tail parameter θ used in diagnostics.
pub const DEFAULT_THETA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    /// Sketch size.
    pub m: usize,
    /// Ambient dimension of the solution domain.
    pub d: usize,
    /// Gaussian width of the transformed cone `AC ∩ S^{n−1}`.
    pub width: f64,
    /// Tail parameter θ > 0.
    pub theta: f64,
    pub l: f64,
    pub mu: f64,
    /// Inner iterations per outer loop.
    pub k: usize,
    /// 1 for fixed steps, `γ_u` with line search.
    pub beta: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Domain("sketch size m must be at least 1".into()));
        }
        if !(self.theta > 0.0) {
            return Err(Error::Domain(format!("theta = {} must be positive", self.theta)));
        }
        for (name, v) in [
            ("width", self.width),
            ("L", self.l),
            ("mu", self.mu),
            ("beta", self.beta),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} = {v} must be finite and nonnegative")));
            }
        }
        Ok(())
    }
}

/// Expected norm of an `m`-dimensional standard Gaussian vector,
/// `√2·Γ((m+1)/2)/Γ(m/2)`.
pub fn b_m(m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("b_m is undefined for m = 0".into()));
    }
    // with x = m/2: b_m = √2·Γ(x + ½)/Γ(x)
    let x = m as f64 / 2.0;
    let ratio = if m < 200 {
        // exact recurrence r(x+1) = r(x)·(x+½)/x from r(½) or r(1)
        let (mut r, mut at) = if m % 2 == 1 {
            (1.0 / std::f64::consts::PI.sqrt(), 0.5)
        } else {
            (std::f64::consts::PI.sqrt() / 2.0, 1.0)
        };
        while at < x {
            r *= (at + 0.5) / at;
            at += 1.0;
        }
        r
    } else {
        // asymptotic series of Γ(x+½)/Γ(x)/√x, truncation error below 1e-17 for x ≥ 100
        const C: [f64; 7] = [
            1.0,
            -1.0 / 8.0,
            1.0 / 128.0,
            5.0 / 1024.0,
            -21.0 / 32768.0,
            -399.0 / 262144.0,
            869.0 / 4194304.0,
        ];
        let inv = 1.0 / x;
        let series = C.iter().rev().fold(0.0, |acc, c| acc * inv + c);
        x.sqrt() * series
    };
    Ok(std::f64::consts::SQRT_2 * ratio)
}

/// Upper bound on the Gaussian width of the ℓ1 descent cone at an
/// `s`-sparse point in dimension `d`: `√(2s·ln(d/s) + 5s/4)`.
pub fn l1_cone_width(s: usize, d: usize) -> Result<f64> {
    if s == 0 || s > d {
        return Err(Error::Domain(format!("sparsity {s} must lie in 1..={d}")));
    }
    let (s, d) = (s as f64, d as f64);
    Ok((2.0 * s * (d / s).ln() + 1.25 * s).sqrt())
}

/// Width used for the transformed cone: the ℓ1 bound when a sparsity is
/// known, capped by the subspace ceiling `√d`.
pub fn transformed_cone_width(sparsity: Option<usize>, d: usize) -> Result<f64> {
    let ceiling = (d as f64).sqrt();
    match sparsity {
        Some(s) => Ok(l1_cone_width(s, d)?.min(ceiling)),
        None => Ok(ceiling),
    }
}

/// Width bound for the nuclear-norm descent cone at a rank-`r` point of
/// `R^{d×q}`: `√(3r(d + q − r))`, capped by `√(dq)`.
pub fn nuclear_cone_width(rank: usize, d: usize, q: usize) -> Result<f64> {
    if rank == 0 || rank > d.min(q) {
        return Err(Error::Domain(format!("rank {rank} must lie in 1..={}", d.min(q))));
    }
    let (r, d, q) = (rank as f64, d as f64, q as f64);
    Ok((3.0 * r * (d + q - r)).sqrt().min((d * q).sqrt()))
}

fn distortion_margins(input: &BoundInputs) -> Result<(f64, f64, f64)> {
    input.validate()?;
    let b = b_m(input.m)?;
    let spread = (input.d as f64).sqrt() + input.theta;
    if b <= spread {
        return Err(Error::Domain(format!(
            "sketch too small for inner-loop guarantee: b_m = {b:.4} <= sqrt(d) + theta = {spread:.4}"
        )));
    }
    Ok((b, b - spread, b + spread))
}

/// Inner-loop contraction bound
/// `α ≤ 1 − (μ/L)·(b_m − √d − θ)²/(b_m + √d + θ)²`.
pub fn alpha_bound(input: &BoundInputs) -> Result<f64> {
    let (_, lo, hi) = distortion_margins(input)?;
    if input.l <= 0.0 {
        return Err(Error::Domain("L must be positive".into()));
    }
    let ratio = (input.mu / input.l).min(1.0);
    Ok((1.0 - ratio * (lo / hi).powi(2)).clamp(0.0, 1.0))
}

/// Step size under which [`alpha_bound`] holds: `1/(L(b_m + √d + θ)²)`.
pub fn alpha_step(input: &BoundInputs) -> Result<f64> {
    let (_, _, hi) = distortion_margins(input)?;
    Ok(1.0 / (input.l * hi * hi))
}

/// Outer-loop contraction bound
/// `ρ ≤ m/(b_m − W − θ)²·(√2·b_m(W + θ)/m + |b_m²/m − 1|)`.
pub fn rho_bound(input: &BoundInputs) -> Result<f64> {
    input.validate()?;
    let b = b_m(input.m)?;
    let m = input.m as f64;
    let spread = input.width + input.theta;
    if b <= spread {
        return Err(Error::Domain(format!(
            "sketch too small for outer-loop guarantee: b_m = {b:.4} <= W + theta = {spread:.4}"
        )));
    }
    let lead = m / (b - spread).powi(2);
    Ok(lead * (std::f64::consts::SQRT_2 * b * spread / m + (b * b / m - 1.0).abs()))
}

/// Simplified outer-loop rate `√2(W/√m)/(1 − W/√m)²`, for plots.
pub fn rho_asymptotic(width: f64, m: usize) -> Result<f64> {
    let r = width / (m as f64).sqrt();
    if r >= 1.0 {
        return Err(Error::Domain(format!("W/sqrt(m) = {r:.4} must be below 1")));
    }
    Ok(std::f64::consts::SQRT_2 * r / (1.0 - r).powi(2))
}

/// Sketch distortion bound `σ ≤ (b_m + √d + θ)²/(b_m − √d − θ)²`.
pub fn sigma_bound(input: &BoundInputs) -> Result<f64> {
    let (_, lo, hi) = distortion_margins(input)?;
    Ok((hi / lo).powi(2))
}

/// `ρ⋆ = α^k·(1 + ρ)·√(L/μ) + ρ`; linear convergence is predicted when `ρ⋆ < 1`.
pub fn theorem1_outer_factor(input: &BoundInputs, alpha: f64, rho: f64) -> Result<f64> {
    if !(input.mu > 0.0) {
        return Err(Error::Domain(
            "outer-loop factor needs strong convexity (mu > 0)".into(),
        ));
    }
    if !(alpha >= 0.0) || !(rho >= 0.0) {
        return Err(Error::Domain("alpha and rho must be nonnegative".into()));
    }
    let k = i32::try_from(input.k).unwrap_or(i32::MAX);
    Ok(alpha.powi(k) * (1.0 + rho) * (input.l / input.mu).sqrt() + rho)
}

/// Additive error floors `(GPIS, Acc-GPIS)`:
/// `√σ_max/(1 − ρ_max)·√(βLR/2k)` and `√σ_max/(1 − ρ_max)·√(2βLR/(k+1)²)`.
pub fn theorem23_residual(
    input: &BoundInputs,
    sigma_max: f64,
    rho_max: f64,
    r: f64,
) -> Result<(f64, f64)> {
    if !(rho_max < 1.0) {
        return Err(Error::Domain(format!("rho_max = {rho_max} must be below 1")));
    }
    if !(r >= 0.0) || !(sigma_max >= 0.0) || input.k == 0 {
        return Err(Error::Domain("R, sigma_max must be nonnegative and k positive".into()));
    }
    let lead = sigma_max.sqrt() / (1.0 - rho_max);
    let k = input.k as f64;
    let blr = input.beta * input.l * r;
    let plain = lead * (blr / (2.0 * k)).sqrt();
    let accelerated = lead * (2.0 * blr / ((k + 1.0) * (k + 1.0))).sqrt();
    Ok((plain, accelerated))
}

/// Accuracy floor of the classical-sketch warm start, `2ρ₀‖e‖₂`.
pub fn gpcs_floor(rho0: f64, e_norm: f64) -> f64 {
    2.0 * rho0 * e_norm
}

/// Failure probability attached to the α and σ bounds, `2e^{−θ²/2}`.
pub fn alpha_sigma_failure_probability(theta: f64) -> f64 {
    (2.0 * (-theta * theta / 2.0).exp()).min(1.0)
}

/// Failure probability attached to the ρ bound,
/// `1 − (1 − e^{−θ²/2})(1 − 8e^{−θ²/8})`.
pub fn rho_failure_probability(theta: f64) -> f64 {
    let ok = (1.0 - (-theta * theta / 2.0).exp()) * (1.0 - 8.0 * (-theta * theta / 8.0).exp());
    (1.0 - ok.max(0.0)).clamp(0.0, 1.0)
}

/// Every diagnostic for one sketch size. Unavailable quantities (a violated
/// precondition) are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub m: usize,
    pub b_m: f64,
    pub width: f64,
    pub alpha: Option<f64>,
    pub rho: Option<f64>,
    pub sigma: Option<f64>,
    pub theorem1: Option<f64>,
    /// Predicted epoch cost of one outer loop, `2 + k·m/n`.
    pub epochs_per_outer: f64,
    /// True when the run used a non-Gaussian sketch.
    pub advisory_only: bool,
}

impl Diagnostics {
    pub fn compute(input: &BoundInputs, n: usize, sketch: SketchKind) -> Result<Self> {
        input.validate()?;
        let alpha = alpha_bound(input).ok();
        let rho = rho_bound(input).ok();
        let sigma = sigma_bound(input).ok();
        let theorem1 = match (alpha, rho) {
            (Some(a), Some(r)) => theorem1_outer_factor(input, a, r).ok(),
            _ => None,
        };
        Ok(Diagnostics {
            m: input.m,
            b_m: b_m(input.m)?,
            width: input.width,
            alpha,
            rho,
            sigma,
            theorem1,
            epochs_per_outer: 2.0 + input.k as f64 * input.m as f64 / n as f64,
            advisory_only: sketch != SketchKind::Gaussian,
        })
    }
}
