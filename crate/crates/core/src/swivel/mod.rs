//! Swiveled Rényi generalizations of the relative entropy difference:
//! commutant parametrization, the chain objectives, a deterministic
//! maximizer over swivel unitaries, Δ′_α / Δ̃′_α, their one-sided limits at
//! α = 1, and the unswiveled Δ_α oracle.

pub mod groups;
pub(crate) mod objective;
pub mod optim;

use crate::error::{Error, Result};
use crate::linalg::{tol, ComplexMatrix, HermitianOperator};
use crate::states::{derive_seed, Instance};

pub use groups::{Commutant, SwivelGroup};
pub use optim::Budget;

use objective::{FOneObjective, NormChain, SwivelObjective};

/// A concrete pair of commutant unitaries plus the parameters that generated
/// it. `v_out` lives on the channel output space (commutant of N(σ)), `v_in`
/// on the input space (commutant of σ).
#[derive(Clone, Debug)]
pub struct SwivelPoint {
    pub v_out: ComplexMatrix,
    pub v_in: ComplexMatrix,
    pub params: Vec<f64>,
}

impl SwivelPoint {
    pub fn identity(inst: &Instance) -> Self {
        Self {
            v_out: ComplexMatrix::identity(inst.channel().dim_out()),
            v_in: ComplexMatrix::identity(inst.channel().dim_in()),
            params: vec![],
        }
    }
}

/// Result of a swivel maximization. `value` is the maximal log-norm, before
/// the sign-carrying prefactor is applied.
#[derive(Clone, Debug)]
pub struct SwivelOptimum {
    pub value: f64,
    pub point: SwivelPoint,
    pub restarts_used: usize,
    /// True when every commutant is a torus of total free dimension ≤ 3 and
    /// a grid + refinement search was used.
    pub certified: bool,
}

/// A swiveled quantity with its provenance.
#[derive(Clone, Debug)]
pub struct SwiveledValue {
    /// The prefactored value (extended real; ±∞ possible).
    pub value: f64,
    /// Maximal log-norm found by the optimizer.
    pub lognorm: f64,
    pub certified: bool,
    pub point: SwivelPoint,
    pub restarts_used: usize,
    pub flags: Vec<String>,
}

/// Which norm chain to maximize.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainFamily {
    /// 2-norm chain of Δ′_α (parameter is α).
    F,
    /// 2α-norm chain of Δ̃′_α (parameter is α, possibly ∞).
    G,
    /// Single-swivel p-norm chain of the trace quantities (parameter is p).
    TraceP,
}

fn with_env(m: &ComplexMatrix, env: usize) -> ComplexMatrix {
    if env > 1 {
        m.kron(&ComplexMatrix::identity(env))
    } else {
        m.clone()
    }
}

/// Commutant of a single Hermitian operator with the default clustering rule.
pub fn commutant_of(omega: &HermitianOperator, cluster_tol: f64) -> Commutant {
    Commutant::of(omega, cluster_tol)
}

/// The (output, input) swivel groups of an instance. The output group lives
/// on the channel output space, tensored with the environment identity when
/// `with_env_factor` is set (as the norm chains need); instances carrying a
/// tensor-factor restriction (the conditional-mutual-information structure)
/// get the restricted commutants.
pub fn swivel_groups(inst: &Instance, with_env_factor: bool) -> (SwivelGroup, SwivelGroup) {
    let env = if with_env_factor { inst.channel().env_dim() } else { 1 };
    match inst.swivel_restriction() {
        Some(r) => (
            SwivelGroup::embedded(
                &r.output.base,
                r.output.full_dims.clone(),
                r.output.systems.clone(),
                env,
            ),
            SwivelGroup::embedded(&r.input.base, r.input.full_dims.clone(), r.input.systems.clone(), 1),
        ),
        None => (
            SwivelGroup::natural(inst.n_sigma(), env),
            SwivelGroup::natural(inst.sigma().op(), 1),
        ),
    }
}

fn f_chain(inst: &Instance, alpha: f64) -> Result<NormChain> {
    let env = inst.channel().env_dim();
    let a = inst.n_rho().power((1.0 - alpha) / 2.0)?;
    let b = inst.n_sigma().power((alpha - 1.0) / 2.0)?;
    let c = inst.sigma().op().power((1.0 - alpha) / 2.0)?;
    let d = inst.rho().op().power(alpha / 2.0)?;
    let (out_group, in_group) = swivel_groups(inst, true);
    let seg0 = with_env(a.matrix(), env);
    let seg1 = with_env(b.matrix(), env).mul(inst.channel().dilation()).mul(c.matrix());
    Ok(NormChain {
        segments: vec![seg0, seg1, d.matrix().clone()],
        groups: vec![out_group, in_group],
        p: 2.0,
    })
}

fn g_chain(inst: &Instance, alpha: f64) -> Result<NormChain> {
    let env = inst.channel().env_dim();
    let (ap, p) = if alpha.is_infinite() {
        (1.0, f64::INFINITY)
    } else {
        ((alpha - 1.0) / alpha, 2.0 * alpha)
    };
    let a = inst.n_rho().power(-ap / 2.0)?;
    let b = inst.n_sigma().power(ap / 2.0)?;
    let c = inst.sigma().op().power(-ap / 2.0)?;
    let d = inst.rho().op().power(0.5)?;
    let (out_group, in_group) = swivel_groups(inst, true);
    let seg0 = with_env(a.matrix(), env);
    let seg1 = with_env(b.matrix(), env).mul(inst.channel().dilation()).mul(c.matrix());
    Ok(NormChain {
        segments: vec![seg0, seg1, d.matrix().clone()],
        groups: vec![out_group, in_group],
        p,
    })
}

fn trace_chain(inst: &Instance, p: f64) -> Result<NormChain> {
    let env = inst.channel().env_dim();
    let a = inst.n_rho().power(1.0 / p)?;
    let b = inst.n_sigma().power(-1.0 / p)?;
    let c = inst.sigma().op().power(1.0 / p)?;
    let (out_group, _) = swivel_groups(inst, true);
    let seg0 = with_env(a.matrix(), env);
    let seg1 = with_env(b.matrix(), env).mul(inst.channel().dilation()).mul(c.matrix());
    Ok(NormChain { segments: vec![seg0, seg1], groups: vec![out_group], p })
}

fn chain_for(inst: &Instance, x: f64, family: ChainFamily) -> Result<NormChain> {
    match family {
        ChainFamily::F => f_chain(inst, x),
        ChainFamily::G => g_chain(inst, x),
        ChainFamily::TraceP => trace_chain(inst, x),
    }
}

fn optimum_from_outcome(
    inst: &Instance,
    chain: &NormChain,
    outcome: optim::OptimOutcome,
) -> Result<SwivelOptimum> {
    let mut offset = 0usize;
    let mut members_point = Vec::with_capacity(chain.groups.len());
    for grp in &chain.groups {
        let len = grp.params_len();
        members_point.push(grp.point_member(&outcome.params[offset..offset + len])?);
        offset += len;
    }
    let v_out = members_point
        .first()
        .cloned()
        .unwrap_or_else(|| ComplexMatrix::identity(inst.channel().dim_out()));
    let v_in = members_point
        .get(1)
        .cloned()
        .unwrap_or_else(|| ComplexMatrix::identity(inst.channel().dim_in()));
    Ok(SwivelOptimum {
        value: outcome.value,
        point: SwivelPoint { v_out, v_in, params: outcome.params },
        restarts_used: outcome.restarts_used,
        certified: outcome.certified,
    })
}

/// Maximize the log-norm of the requested chain over the swivel unitaries.
pub fn maximize_norm(
    inst: &Instance,
    x: f64,
    family: ChainFamily,
    budget: &Budget,
) -> Result<SwivelOptimum> {
    let chain = chain_for(inst, x, family)?;
    let seed = derive_seed(inst.seed().unwrap_or(0), family_tag(family));
    let outcome = optim::maximize(&chain, budget, seed)?;
    optimum_from_outcome(inst, &chain, outcome)
}

fn family_tag(family: ChainFamily) -> u64 {
    match family {
        ChainFamily::F => 0xf0,
        ChainFamily::G => 0xf1,
        ChainFamily::TraceP => 0xf2,
    }
}

fn eval_chain_at(chain: &NormChain, point: &SwivelPoint) -> f64 {
    let mut members = Vec::with_capacity(chain.groups.len());
    members.push(chain.groups[0].tensor_env(&point.v_out));
    if chain.groups.len() > 1 {
        members.push(point.v_in.clone());
    }
    chain.eval_with_members(&members)
}

fn guard_alpha(alpha: f64) -> Result<()> {
    if (alpha - 1.0).abs() < tol::ALPHA_GUARD {
        return Err(Error::DegenerateAlpha(alpha));
    }
    Ok(())
}

/// f(α, V_{N(σ)}, V_σ): the prefactored 2-norm chain at an explicit point.
pub fn objective_f(inst: &Instance, alpha: f64, point: &SwivelPoint) -> Result<f64> {
    guard_alpha(alpha)?;
    if alpha > 1.0 && !inst.support_ok() {
        return Ok(f64::INFINITY);
    }
    let chain = f_chain(inst, alpha)?;
    let lognorm = eval_chain_at(&chain, point);
    Ok(2.0 / (alpha - 1.0) * lognorm)
}

/// g(α, V_{N(σ)}, V_σ): the prefactored 2α-norm chain at an explicit point.
pub fn objective_g(inst: &Instance, alpha: f64, point: &SwivelPoint) -> Result<f64> {
    if !alpha.is_infinite() {
        guard_alpha(alpha)?;
    }
    if alpha > 1.0 && !inst.support_ok() {
        return Ok(f64::INFINITY);
    }
    let chain = g_chain(inst, alpha)?;
    let lognorm = eval_chain_at(&chain, point);
    let pref = if alpha.is_infinite() { 2.0 } else { 2.0 * alpha / (alpha - 1.0) };
    Ok(pref * lognorm)
}

fn f_one_objective(inst: &Instance, sign: f64) -> Result<FOneObjective> {
    let constant = {
        let log_rho = inst.rho().op().log()?;
        let log_sigma = inst.sigma().op().log()?;
        inst.rho()
            .matrix()
            .mul(&log_rho.matrix().sub(log_sigma.matrix()))
            .trace()
            .re
    };
    let (out_group, in_group) = swivel_groups(inst, false);
    Ok(FOneObjective {
        groups: vec![out_group, in_group],
        constant,
        rho: inst.rho().matrix().clone(),
        log_n_rho: inst.n_rho().log()?.matrix().clone(),
        log_n_sigma: inst.n_sigma().log()?.matrix().clone(),
        kraus: inst.channel().kraus().to_vec(),
        sign,
    })
}

/// f(1, V_{N(σ)}, V_σ): the α = 1 boundary function at an explicit point.
pub fn f_at_one(inst: &Instance, point: &SwivelPoint) -> Result<f64> {
    if !inst.support_ok() {
        return Err(Error::SupportViolation);
    }
    let obj = f_one_objective(inst, 1.0)?;
    Ok(obj.value(&point.v_out, &point.v_in))
}

/// One-sided limits of Δ′_α (equivalently Δ̃′_α) at α = 1: the extremal
/// values of f(1, ·, ·) over the swivels. Identity is always a candidate, so
/// left ≤ Δ ≤ right holds by construction.
#[derive(Clone, Debug)]
pub struct LimitsAtOne {
    pub left: f64,
    pub right: f64,
    pub left_point: SwivelPoint,
    pub right_point: SwivelPoint,
    pub certified: bool,
}

pub fn limits_at_one(inst: &Instance, budget: &Budget) -> Result<LimitsAtOne> {
    if !inst.support_ok() {
        return Err(Error::SupportViolation);
    }
    let seed = derive_seed(inst.seed().unwrap_or(0), 0xa1);
    let point_of = |outcome: &optim::OptimOutcome, obj: &FOneObjective| -> Result<SwivelPoint> {
        let mut offset = 0usize;
        let mut members = Vec::with_capacity(2);
        for grp in &obj.groups {
            let len = grp.params_len();
            members.push(grp.point_member(&outcome.params[offset..offset + len])?);
            offset += len;
        }
        Ok(SwivelPoint {
            v_out: members[0].clone(),
            v_in: members[1].clone(),
            params: outcome.params.clone(),
        })
    };

    let max_obj = f_one_objective(inst, 1.0)?;
    let max_outcome = optim::maximize(&max_obj, budget, seed)?;
    let right_point = point_of(&max_outcome, &max_obj)?;

    let min_obj = f_one_objective(inst, -1.0)?;
    let min_outcome = optim::maximize(&min_obj, budget, derive_seed(seed, 1))?;
    let left_point = point_of(&min_outcome, &min_obj)?;

    Ok(LimitsAtOne {
        left: -min_outcome.value,
        right: max_outcome.value,
        left_point,
        right_point,
        certified: max_outcome.certified && min_outcome.certified,
    })
}

/// Δ′_α: the signed prefactor applied to the maximal log-norm of the f
/// chain. For α < 1 the negative prefactor makes this the minimum of f over
/// the swivels, exactly as the α = 1 limit analysis reads the definition.
pub fn delta_prime(inst: &Instance, alpha: f64, budget: &Budget) -> Result<SwiveledValue> {
    if !(0.0..=2.0).contains(&alpha) {
        return Err(Error::InvalidInput(format!("delta_prime needs alpha in [0,2], got {alpha}")));
    }
    guard_alpha(alpha)?;
    if alpha > 1.0 && !inst.support_ok() {
        return Ok(support_violation_value(inst));
    }
    let opt = maximize_norm(inst, alpha, ChainFamily::F, budget)?;
    let value = 2.0 / (alpha - 1.0) * opt.value;
    Ok(SwiveledValue {
        value,
        lognorm: opt.value,
        certified: opt.certified,
        point: opt.point,
        restarts_used: opt.restarts_used,
        flags: inst.warnings().to_vec(),
    })
}

/// Δ̃′_α for α ∈ [1/2, ∞]; α = ∞ is the operator-norm chain.
pub fn delta_tilde_prime(inst: &Instance, alpha: f64, budget: &Budget) -> Result<SwiveledValue> {
    if alpha.is_nan() || alpha < 0.5 {
        return Err(Error::InvalidInput(format!(
            "delta_tilde_prime needs alpha in [1/2,∞], got {alpha}"
        )));
    }
    if !alpha.is_infinite() {
        guard_alpha(alpha)?;
    }
    if alpha > 1.0 && !inst.support_ok() {
        return Ok(support_violation_value(inst));
    }
    let opt = maximize_norm(inst, alpha, ChainFamily::G, budget)?;
    let pref = if alpha.is_infinite() { 2.0 } else { 2.0 * alpha / (alpha - 1.0) };
    let value = pref * opt.value;
    Ok(SwiveledValue {
        value,
        lognorm: opt.value,
        certified: opt.certified,
        point: opt.point,
        restarts_used: opt.restarts_used,
        flags: inst.warnings().to_vec(),
    })
}

fn support_violation_value(inst: &Instance) -> SwiveledValue {
    let mut flags = inst.warnings().to_vec();
    flags.push("support violation: value is +inf by definition".into());
    SwiveledValue {
        value: f64::INFINITY,
        lognorm: f64::INFINITY,
        certified: true,
        point: SwivelPoint::identity(inst),
        restarts_used: 0,
        flags,
    }
}

/// Q_α: the squared 2-norm of the unswiveled chain. Valid at α = 1 too,
/// where the powers collapse to support projectors and Q_1 = 1 under the
/// support condition.
pub fn q_alpha(inst: &Instance, alpha: f64) -> Result<f64> {
    let chain = f_chain(inst, alpha)?;
    let lognorm = eval_chain_at(&chain, &SwivelPoint::identity(inst));
    if lognorm == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    Ok((2.0 * lognorm).exp())
}

/// Δ_α without swivels: the f chain at the identity point.
pub fn delta_alpha_unswiveled(inst: &Instance, alpha: f64) -> Result<f64> {
    if alpha == 1.0 {
        return Err(Error::InvalidInput("alpha = 1 is the Δ limit; use entropy::delta".into()));
    }
    if alpha > 1.0 && !inst.support_ok() {
        return Ok(f64::INFINITY);
    }
    let chain = f_chain(inst, alpha)?;
    let lognorm = eval_chain_at(&chain, &SwivelPoint::identity(inst));
    Ok(2.0 / (alpha - 1.0) * lognorm)
}

/// Member check: how far V is from commuting with ω.
pub fn commutation_residual(v: &ComplexMatrix, omega: &HermitianOperator) -> f64 {
    let lhs = v.mul(omega.matrix());
    let rhs = omega.matrix().mul(v);
    crate::linalg::schatten(&lhs.sub(&rhs), f64::INFINITY).unwrap_or(f64::INFINITY)
}

/// Exhaustive phase-grid oracle over qubit-scale torus commutants (free
/// dimension ≤ 1 per swivel). The search is what it certifies: every grid
/// point is evaluated by plain term accumulation plus singular values, with
/// none of the optimizer's closed-form shortcuts.
pub fn phase_grid_oracle(
    inst: &Instance,
    x: f64,
    family: ChainFamily,
    resolution_rad: f64,
) -> Result<f64> {
    let chain = chain_for(inst, x, family)?;
    for grp in &chain.groups {
        if !grp.is_torus() || grp.free_dim() > 1 {
            return Err(Error::InvalidInput(
                "phase grid oracle supports qubit-style tori only (free dim ≤ 1 per swivel)".into(),
            ));
        }
    }
    let tt = chain
        .torus_terms()?
        .ok_or_else(|| Error::InvalidInput("phase grid oracle needs torus commutants".into()))?;
    let free: Vec<usize> =
        (0..chain.groups.len()).filter(|&g| chain.groups[g].free_dim() == 1).collect();
    let steps = (2.0 * std::f64::consts::PI / resolution_rad).ceil() as usize;
    let mut angles: Vec<Vec<f64>> = tt.group_sizes.iter().map(|&k| vec![0.0; k]).collect();
    let mut best = f64::NEG_INFINITY;
    match free.len() {
        0 => best = tt.eval(&tt.phases(&angles)),
        1 => {
            for i in 0..steps {
                angles[free[0]][1] = 2.0 * std::f64::consts::PI * i as f64 / steps as f64;
                best = best.max(tt.eval(&tt.phases(&angles)));
            }
        }
        _ => {
            for i in 0..steps {
                angles[free[0]][1] = 2.0 * std::f64::consts::PI * i as f64 / steps as f64;
                for j in 0..steps {
                    angles[free[1]][1] = 2.0 * std::f64::consts::PI * j as f64 / steps as f64;
                    best = best.max(tt.eval(&tt.phases(&angles)));
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy;
    use crate::linalg::schatten;
    use crate::states::{
        random_classical_instance, random_density, random_instance, random_pd_instance,
        random_positive, Instance, QuantumChannel,
    };

    /// Δ_α through the adjoint-form trace expression, independent of the
    /// dilation chain: Tr{ρ^α σ^{(1−α)/2} N†(N(σ)^{(α−1)/2} N(ρ)^{1−α}
    /// N(σ)^{(α−1)/2}) σ^{(1−α)/2}}.
    fn delta_alpha_trace_form(inst: &Instance, alpha: f64) -> f64 {
        let rho_a = inst.rho().op().power(alpha).unwrap();
        let s_pow = inst.sigma().op().power((1.0 - alpha) / 2.0).unwrap();
        let ns_pow = inst.n_sigma().power((alpha - 1.0) / 2.0).unwrap();
        let nr_pow = inst.n_rho().power(1.0 - alpha).unwrap();
        let inner = ns_pow.matrix().mul(nr_pow.matrix()).mul(ns_pow.matrix());
        let pulled = inst.channel().adjoint_apply(&inner).unwrap();
        let val = rho_a
            .matrix()
            .mul(s_pow.matrix())
            .mul(&pulled)
            .mul(s_pow.matrix())
            .trace()
            .re;
        val.ln() / (alpha - 1.0)
    }

    /// Δ̃_α through the α-norm adjoint form.
    fn delta_tilde_alpha_trace_form(inst: &Instance, alpha: f64) -> f64 {
        let ap = (alpha - 1.0) / alpha;
        let rho_half = inst.rho().op().power(0.5).unwrap();
        let s_pow = inst.sigma().op().power(-ap / 2.0).unwrap();
        let ns_pow = inst.n_sigma().power(ap / 2.0).unwrap();
        let nr_pow = inst.n_rho().power(-ap).unwrap();
        let inner = ns_pow.matrix().mul(nr_pow.matrix()).mul(ns_pow.matrix());
        let pulled = inst.channel().adjoint_apply(&inner).unwrap();
        let m = rho_half
            .matrix()
            .mul(s_pow.matrix())
            .mul(&pulled)
            .mul(s_pow.matrix())
            .mul(rho_half.matrix());
        schatten(&m, alpha).unwrap().ln() / ap
    }

    #[test]
    fn commutant_block_structure() {
        let full = HermitianOperator::new(ComplexMatrix::identity(3)).unwrap();
        let c = Commutant::of(&full, 1e-8);
        assert_eq!(c.blocks(), &[(0, 3)]);
        assert!(!c.is_torus());

        let two = HermitianOperator::new(ComplexMatrix::diag(&[2.0, 1.0])).unwrap();
        let c = Commutant::of(&two, 1e-8);
        assert_eq!(c.blocks(), &[(0, 1), (1, 1)]);
        assert!(c.is_torus());

        let degenerate = HermitianOperator::new(ComplexMatrix::diag(&[1.0, 1.0, 0.0])).unwrap();
        let c = Commutant::of(&degenerate, 1e-8);
        assert_eq!(c.blocks(), &[(0, 2), (2, 1)]);
    }

    #[test]
    fn members_are_unitary_and_commute() {
        let base = random_positive(4, 1.0, 51).unwrap();
        let grp = SwivelGroup::natural(base.op(), 1);
        let mut rng = crate::states::seeded_rng(52);
        for _ in 0..3 {
            let params = grp.random_params(&mut rng);
            let v = grp.member(&params).unwrap();
            assert!(v.isometry_residual() < 1e-10);
            assert!(commutation_residual(&v, base.op()) < 1e-8);
        }
        // Degenerate base exercises the block parametrization.
        let deg = HermitianOperator::new(ComplexMatrix::diag(&[1.0, 1.0, 0.5, 0.0])).unwrap();
        let grp = SwivelGroup::natural(&deg, 1);
        assert!(!grp.is_torus());
        let params = grp.random_params(&mut rng);
        let v = grp.member(&params).unwrap();
        assert!(v.isometry_residual() < 1e-10);
        assert!(commutation_residual(&v, &deg) < 1e-8);
    }

    #[test]
    fn objective_f_identity_matches_trace_form() {
        let inst = random_pd_instance(3, 2, 2, 53).unwrap();
        for &alpha in &[0.3, 0.7, 1.5, 2.0] {
            let chain_side = delta_alpha_unswiveled(&inst, alpha).unwrap();
            let trace_side = delta_alpha_trace_form(&inst, alpha);
            assert!((chain_side - trace_side).abs() < 1e-10, "alpha {alpha}");
            let via_point =
                objective_f(&inst, alpha, &SwivelPoint::identity(&inst)).unwrap();
            assert!((via_point - chain_side).abs() < 1e-12);
        }
    }

    #[test]
    fn objective_g_identity_matches_trace_form() {
        let inst = random_pd_instance(3, 2, 2, 54).unwrap();
        for &alpha in &[0.6, 1.5, 2.0, 4.0] {
            let via_point =
                objective_g(&inst, alpha, &SwivelPoint::identity(&inst)).unwrap();
            let trace_side = delta_tilde_alpha_trace_form(&inst, alpha);
            assert!((via_point - trace_side).abs() < 1e-10, "alpha {alpha}");
        }
    }

    #[test]
    fn classical_instance_is_swivel_independent() {
        let (inst, _, _, _) = random_classical_instance(3, 3, 55).unwrap();
        let (out_group, in_group) = swivel_groups(&inst, false);
        let mut rng = crate::states::seeded_rng(56);
        let id = SwivelPoint::identity(&inst);
        for &alpha in &[0.5, 1.5] {
            let base = objective_f(&inst, alpha, &id).unwrap();
            for _ in 0..3 {
                let p_out = out_group.random_params(&mut rng);
                let p_in = in_group.random_params(&mut rng);
                let point = SwivelPoint {
                    v_out: out_group.point_member(&p_out).unwrap(),
                    v_in: in_group.point_member(&p_in).unwrap(),
                    params: vec![],
                };
                let rotated = objective_f(&inst, alpha, &point).unwrap();
                assert!((rotated - base).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn global_phase_leaves_objective_unchanged() {
        let inst = random_pd_instance(2, 2, 2, 57).unwrap();
        let id = SwivelPoint::identity(&inst);
        let base = objective_f(&inst, 1.5, &id).unwrap();
        let phase = num_complex::Complex64::from_polar(1.0, 0.9);
        let spun = SwivelPoint {
            v_out: id.v_out.scale(phase),
            v_in: id.v_in.clone(),
            params: vec![],
        };
        assert!((objective_f(&inst, 1.5, &spun).unwrap() - base).abs() < 1e-12);
        let spun_in = SwivelPoint {
            v_out: id.v_out.clone(),
            v_in: id.v_in.scale(phase),
            params: vec![],
        };
        assert!((objective_f(&inst, 1.5, &spun_in).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn maximizer_constant_on_commuting_instances() {
        let (inst, _, _, _) = random_classical_instance(3, 2, 58).unwrap();
        let budget = Budget::default();
        for &alpha in &[0.5, 1.5] {
            let opt = maximize_norm(&inst, alpha, ChainFamily::F, &budget).unwrap();
            let id_val = delta_alpha_unswiveled(&inst, alpha).unwrap() * (alpha - 1.0) / 2.0;
            assert!((opt.value - id_val).abs() < 1e-9);
        }
    }

    #[test]
    fn maximizer_matches_coarse_grid_oracle() {
        // seed 37 qubit instance; the fine 1e-3 oracle runs in acceptance.
        let inst = random_pd_instance(2, 2, 2, 37).unwrap();
        let budget = Budget::default();
        for &(family, x) in &[(ChainFamily::F, 0.5), (ChainFamily::F, 1.5), (ChainFamily::G, 2.0)]
        {
            let opt = maximize_norm(&inst, x, family, &budget).unwrap();
            assert!(opt.certified);
            let grid = phase_grid_oracle(&inst, x, family, 1e-2).unwrap();
            assert!(opt.value >= grid - 1e-9, "optimizer below grid");
            assert!(opt.value - grid < 1e-3, "optimizer {} vs grid {}", opt.value, grid);
        }
    }

    #[test]
    fn doubled_budget_never_decreases() {
        let inst = random_pd_instance(2, 2, 2, 59).unwrap();
        let small = Budget { restarts: 2, max_evals: 4_000 };
        let large = Budget { restarts: 4, max_evals: 8_000 };
        let a = maximize_norm(&inst, 1.5, ChainFamily::F, &small).unwrap();
        let b = maximize_norm(&inst, 1.5, ChainFamily::F, &large).unwrap();
        assert!(b.value >= a.value - 1e-12);
    }

    #[test]
    fn delta_prime_reduces_for_trace_channel() {
        let rho = random_density(3, 3, 60).unwrap();
        let sigma = random_positive(3, 1.4, 61).unwrap();
        let inst =
            Instance::new(rho.clone(), sigma.clone(), QuantumChannel::trace_channel(3), Some(60))
                .unwrap();
        let log_tr = 1.4f64.ln();
        let budget = Budget::default();
        for &alpha in &[0.5, 1.5, 2.0] {
            let lhs = delta_prime(&inst, alpha, &budget).unwrap().value;
            let rhs = entropy::renyi_rel(&rho, &sigma, alpha).unwrap() + log_tr;
            assert!((lhs - rhs).abs() < 1e-8, "alpha {alpha}: {lhs} vs {rhs}");
        }
        for &alpha in &[0.6, 2.0, 8.0] {
            let lhs = delta_tilde_prime(&inst, alpha, &budget).unwrap().value;
            let rhs = entropy::sandwiched_rel(&rho, &sigma, alpha).unwrap() + log_tr;
            assert!((lhs - rhs).abs() < 1e-8, "tilde alpha {alpha}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn delta_prime_nonnegative_and_bounded_by_unswiveled() {
        let inst = random_instance(3, 3, 2, 2, 41).unwrap();
        let budget = Budget::default();
        for &alpha in &[0.5, 1.5, 2.0] {
            let v = delta_prime(&inst, alpha, &budget).unwrap().value;
            assert!(v >= -1e-6, "alpha {alpha}: {v}");
            let un = delta_alpha_unswiveled(&inst, alpha).unwrap();
            if alpha > 1.0 {
                assert!(v >= un - 1e-9);
            } else {
                assert!(v <= un + 1e-9);
            }
        }
        let inst43 = random_instance(3, 3, 2, 2, 43).unwrap();
        for &alpha in &[0.6, 2.0, 8.0] {
            let v = delta_tilde_prime(&inst43, alpha, &budget).unwrap().value;
            assert!(v >= -1e-6, "tilde alpha {alpha}: {v}");
        }
    }

    #[test]
    fn alpha_guard_refuses_near_one() {
        let inst = random_pd_instance(2, 2, 2, 62).unwrap();
        let budget = Budget::default();
        assert!(matches!(
            delta_prime(&inst, 1.0 + 1e-8, &budget),
            Err(Error::DegenerateAlpha(_))
        ));
    }

    #[test]
    fn support_violation_reports_infinity_with_flag() {
        let rho =
            crate::states::DensityOperator::new(ComplexMatrix::diag(&[1.0, 0.0])).unwrap();
        let sigma =
            crate::states::PositiveOperator::new(ComplexMatrix::diag(&[0.0, 1.0])).unwrap();
        let inst = Instance::new(rho, sigma, QuantumChannel::identity(2), None).unwrap();
        let v = delta_prime(&inst, 1.5, &Budget::default()).unwrap();
        assert!(v.value.is_infinite());
        assert!(v.flags.iter().any(|f| f.contains("support violation")));
    }

    #[test]
    fn f_at_one_identity_is_delta() {
        let inst = random_pd_instance(3, 2, 2, 63).unwrap();
        let f1 = f_at_one(&inst, &SwivelPoint::identity(&inst)).unwrap();
        let d = entropy::delta(&inst).unwrap();
        assert!((f1 - d).abs() < 1e-10);
    }

    #[test]
    fn f_at_one_classical_diagonal_points_give_delta() {
        let (inst, _, _, _) = random_classical_instance(3, 2, 64).unwrap();
        let d = entropy::delta(&inst).unwrap();
        let (out_group, in_group) = swivel_groups(&inst, false);
        let mut rng = crate::states::seeded_rng(65);
        for _ in 0..3 {
            let point = SwivelPoint {
                v_out: out_group.point_member(&out_group.random_params(&mut rng)).unwrap(),
                v_in: in_group.point_member(&in_group.random_params(&mut rng)).unwrap(),
                params: vec![],
            };
            assert!((f_at_one(&inst, &point).unwrap() - d).abs() < 1e-10);
        }
    }

    #[test]
    fn f_slope_is_linear_at_fixed_point() {
        // seed 31: |f(1+γ, point) − f(1, point)| ≤ C|γ| fit from two steps.
        let inst = random_pd_instance(2, 2, 2, 31).unwrap();
        let (out_group, in_group) = swivel_groups(&inst, false);
        let mut rng = crate::states::seeded_rng(32);
        let point = SwivelPoint {
            v_out: out_group.point_member(&out_group.random_params(&mut rng)).unwrap(),
            v_in: in_group.point_member(&in_group.random_params(&mut rng)).unwrap(),
            params: vec![],
        };
        let f1 = f_at_one(&inst, &point).unwrap();
        let e1 = (objective_f(&inst, 1.0 + 1e-2, &point).unwrap() - f1).abs();
        let e2 = (objective_f(&inst, 1.0 + 1e-3, &point).unwrap() - f1).abs();
        let c = e1 / 1e-2;
        assert!(e2 <= (c + 0.5) * 1e-3, "e1 {e1:.2e} e2 {e2:.2e}");
    }

    #[test]
    fn limits_sandwich_delta() {
        // Commuting instance: left = right = Δ.
        let (classical, _, _, _) = random_classical_instance(3, 2, 66).unwrap();
        let lim = limits_at_one(&classical, &Budget::default()).unwrap();
        let d = entropy::delta(&classical).unwrap();
        assert!((lim.left - d).abs() < 1e-9);
        assert!((lim.right - d).abs() < 1e-9);

        // seed 47 qubit instance: left ≤ Δ ≤ right.
        let inst = random_pd_instance(2, 2, 2, 47).unwrap();
        let lim = limits_at_one(&inst, &Budget::default()).unwrap();
        let d = entropy::delta(&inst).unwrap();
        assert!(lim.left <= d + 1e-8);
        assert!(d <= lim.right + 1e-8);
        assert!(lim.certified);
    }

    #[test]
    fn q_alpha_at_one_is_unity() {
        // Including a rank-deficient ρ with full-rank σ: the support
        // condition is what matters.
        let inst = random_instance(3, 2, 2, 2, 53).unwrap();
        assert!(inst.support_ok());
        assert!((q_alpha(&inst, 1.0).unwrap() - 1.0).abs() < 1e-9);

        // seed 53 slope contract for Δ_α.
        let pd = random_pd_instance(3, 2, 2, 53).unwrap();
        let d = entropy::delta(&pd).unwrap();
        let e1 = (delta_alpha_unswiveled(&pd, 1.01).unwrap() - d).abs();
        let e2 = (delta_alpha_unswiveled(&pd, 1.001).unwrap() - d).abs();
        let c = e1 / 0.01;
        assert!(e2 <= (c + 0.5) * 0.001);
    }

    #[test]
    fn classical_delta_matches_scalar_oracle() {
        let (inst, p, s, t) = random_classical_instance(3, 3, 67).unwrap();
        let budget = Budget::default();
        for &alpha in &[0.5, 1.5, 2.0] {
            let sv = delta_prime(&inst, alpha, &budget).unwrap().value;
            let oracle = crate::verify::oracle::delta_alpha(&p, &s, &t, alpha);
            assert!((sv - oracle).abs() < 1e-10, "alpha {alpha}: {sv} vs {oracle}");
        }
        for &alpha in &[0.6, 2.0] {
            let sv = delta_tilde_prime(&inst, alpha, &budget).unwrap().value;
            let oracle = crate::verify::oracle::delta_tilde_alpha(&p, &s, &t, alpha);
            assert!((sv - oracle).abs() < 1e-10, "tilde alpha {alpha}: {sv} vs {oracle}");
        }
    }
}
