//! Scalar entropic functionals. All logarithms are natural; values are in
//! nats. +∞ is a value, not an error: it appears exactly when the defining
//! support condition fails.

use crate::error::{Error, Result};
use crate::linalg::{schatten, ComplexMatrix, HermitianOperator};
use crate::states::{DensityOperator, Instance, PositiveOperator};

/// Tag for reported entropy values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntropyKind {
    H,
    HAlpha,
    D,
    DAlpha,
    DTildeAlpha,
    D0,
    D2,
    Dmax,
    Delta,
}

/// A scalar entropic value together with what it is.
#[derive(Clone, Copy, Debug)]
pub struct EntropyValue {
    pub value: f64,
    pub alpha: Option<f64>,
    pub kind: EntropyKind,
}

/// supp(a) ⊆ supp(b), decided through the projector onto b's kernel.
pub fn support_contained(a: &HermitianOperator, b: &HermitianOperator) -> bool {
    let comp = ComplexMatrix::identity(b.dim()).sub(b.projector().matrix());
    let leak = comp.mul(a.matrix()).mul(&comp);
    schatten(&leak, f64::INFINITY).map(|n| n <= 1e-10).unwrap_or(false)
}

/// −Tr{ρ log ρ} over the support.
pub fn vn_entropy(rho: &DensityOperator) -> f64 {
    vn_entropy_op(rho.op())
}

pub fn vn_entropy_op(op: &HermitianOperator) -> f64 {
    let cutoff = op.support_cutoff();
    -op.eigenvalues()
        .iter()
        .filter(|l| **l > cutoff)
        .map(|l| l * l.ln())
        .sum::<f64>()
}

/// Umegaki relative entropy D(ρ‖σ); +∞ unless supp ρ ⊆ supp σ.
pub fn relative_entropy(rho: &DensityOperator, sigma: &PositiveOperator) -> f64 {
    relative_entropy_ops(rho.op(), sigma.op())
}

pub fn relative_entropy_ops(rho: &HermitianOperator, sigma: &HermitianOperator) -> f64 {
    if !support_contained(rho, sigma) {
        return f64::INFINITY;
    }
    let log_rho = rho.log().expect("PSD operator has a log on support");
    let log_sigma = sigma.log().expect("PSD operator has a log on support");
    let diff = log_rho.matrix().sub(log_sigma.matrix());
    rho.matrix().mul(&diff).trace().re
}

/// Rényi relative entropy D_α via the 2-norm rewriting
/// (2/(α−1)) log ‖σ^{(1−α)/2} ρ^{α/2}‖_2.
pub fn renyi_rel(rho: &DensityOperator, sigma: &PositiveOperator, alpha: f64) -> Result<f64> {
    renyi_rel_ops(rho.op(), sigma.op(), alpha)
}

pub fn renyi_rel_ops(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
) -> Result<f64> {
    if alpha == 1.0 || alpha < 0.0 {
        return Err(Error::InvalidInput(format!("Renyi order {alpha} outside (0,1)∪(1,∞)")));
    }
    if alpha > 1.0 && !support_contained(rho, sigma) {
        return Ok(f64::INFINITY);
    }
    let s_pow = sigma.power((1.0 - alpha) / 2.0)?;
    let r_pow = rho.power(alpha / 2.0)?;
    let norm = schatten(&s_pow.matrix().mul(r_pow.matrix()), 2.0)?;
    if norm == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(2.0 / (alpha - 1.0) * norm.ln())
}

/// Sandwiched Rényi relative entropy D̃_α via the 2α-norm rewriting
/// (2α/(α−1)) log ‖σ^{(1−α)/2α} ρ^{1/2}‖_{2α}; α = ∞ gives D_max.
pub fn sandwiched_rel(rho: &DensityOperator, sigma: &PositiveOperator, alpha: f64) -> Result<f64> {
    sandwiched_rel_ops(rho.op(), sigma.op(), alpha)
}

pub fn sandwiched_rel_ops(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
) -> Result<f64> {
    if alpha.is_infinite() {
        return Ok(dmax_ops(rho, sigma));
    }
    if alpha == 1.0 || alpha <= 0.0 {
        return Err(Error::InvalidInput(format!("sandwiched order {alpha} outside (0,1)∪(1,∞]")));
    }
    if alpha > 1.0 && !support_contained(rho, sigma) {
        return Ok(f64::INFINITY);
    }
    let s_pow = sigma.power((1.0 - alpha) / (2.0 * alpha))?;
    let r_half = rho.power(0.5)?;
    let norm = schatten(&s_pow.matrix().mul(r_half.matrix()), 2.0 * alpha)?;
    if norm == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(2.0 * alpha / (alpha - 1.0) * norm.ln())
}

/// D_max(ρ‖σ) = log ‖σ^{−1/2} ρ σ^{−1/2}‖_∞; +∞ on support failure.
pub fn dmax(rho: &DensityOperator, sigma: &PositiveOperator) -> f64 {
    dmax_ops(rho.op(), sigma.op())
}

pub fn dmax_ops(rho: &HermitianOperator, sigma: &HermitianOperator) -> f64 {
    if !support_contained(rho, sigma) {
        return f64::INFINITY;
    }
    let s_inv_half = sigma.power(-0.5).expect("PSD pseudo-inverse root");
    let sandwich = s_inv_half.matrix().mul(rho.matrix()).mul(s_inv_half.matrix());
    schatten(&sandwich, f64::INFINITY).expect("operator norm").ln()
}

/// Quantum fidelity F(ρ,σ) = ‖√ρ √σ‖_1².
pub fn fidelity(rho: &DensityOperator, sigma: &PositiveOperator) -> f64 {
    fidelity_ops(rho.op(), sigma.op())
}

pub fn fidelity_ops(rho: &HermitianOperator, sigma: &HermitianOperator) -> f64 {
    let r_half = rho.power(0.5).expect("PSD root");
    let s_half = sigma.power(0.5).expect("PSD root");
    let t = schatten(&r_half.matrix().mul(s_half.matrix()), 1.0).expect("trace norm");
    t * t
}

/// Collision relative entropy D_2 = D_α at α = 2, i.e. log Tr{ρ² σ^{−1}}
/// evaluated on support; +∞ on support failure.
pub fn d2(rho: &DensityOperator, sigma: &PositiveOperator) -> f64 {
    d2_ops(rho.op(), sigma.op())
}

pub fn d2_ops(rho: &HermitianOperator, sigma: &HermitianOperator) -> f64 {
    renyi_rel_ops(rho, sigma, 2.0).expect("alpha = 2 is valid")
}

/// Zero-relative entropy D_0 = −log Tr{Π_ρ σ}.
pub fn d0(rho: &DensityOperator, sigma: &PositiveOperator) -> f64 {
    d0_ops(rho.op(), sigma.op())
}

pub fn d0_ops(rho: &HermitianOperator, sigma: &HermitianOperator) -> f64 {
    let overlap = rho.projector().matrix().mul(sigma.matrix()).trace().re;
    if overlap <= 0.0 {
        return f64::INFINITY;
    }
    -overlap.ln()
}

/// Relative entropy difference Δ(ρ,σ,N) = D(ρ‖σ) − D(N(ρ)‖N(σ)).
pub fn delta(inst: &Instance) -> Result<f64> {
    if !inst.support_ok() {
        return Err(Error::SupportViolation);
    }
    let first = relative_entropy_ops(inst.rho().op(), inst.sigma().op());
    let second = relative_entropy_ops(inst.n_rho(), inst.n_sigma());
    Ok(first - second)
}
