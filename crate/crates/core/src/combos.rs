//! Swiveled Rényi generalizations of arbitrary {−1,0,+1} linear combinations
//! of von Neumann entropies, and the single-swivel trace quantities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::entropy::{relative_entropy_ops, vn_entropy_op};
use crate::error::{Error, Result};
use crate::linalg::{
    embed_operator, exp_hermitian, partial_trace, tol, ComplexMatrix, HermitianOperator,
};
use crate::recovery::TripartiteState;
use crate::states::{derive_seed, purify, DensityOperator, Instance};
use crate::swivel::objective::{NormChain, SwivelObjective};
use crate::swivel::{self, optim, Budget, ChainFamily, SwivelGroup};

/// Subset of systems as a bitmask (bit i = system i).
pub type SubsetMask = u32;

/// A linear combination Σ_S a_S H(S) with coefficients in {−1, 0, +1} and an
/// explicit ordering of the marginals entering the norm chain. The library
/// never picks an order silently; `cmi_order` is the preset matching the
/// conditional-mutual-information chain.
#[derive(Clone, Debug)]
pub struct EntropyCombo {
    systems: Vec<(String, usize)>,
    coeffs: BTreeMap<SubsetMask, i8>,
    marginal_order: Vec<SubsetMask>,
}

impl EntropyCombo {
    pub fn new(
        systems: Vec<(String, usize)>,
        coeffs: BTreeMap<SubsetMask, i8>,
        marginal_order: Vec<SubsetMask>,
    ) -> Result<Self> {
        let l = systems.len();
        if l == 0 || l > 16 {
            return Err(Error::InvalidInput("need between 1 and 16 systems".into()));
        }
        let full: SubsetMask = (1u32 << l) - 1;
        for (&mask, &a) in &coeffs {
            if mask == 0 || mask > full {
                return Err(Error::InvalidInput(format!("subset mask {mask:#b} out of range")));
            }
            if !(-1..=1).contains(&a) {
                return Err(Error::InvalidInput("coefficients must be in {-1,0,1}".into()));
            }
        }
        let expected: Vec<SubsetMask> = coeffs
            .iter()
            .filter(|&(&m, &a)| a != 0 && m != full)
            .map(|(&m, _)| m)
            .collect();
        let mut order_sorted = marginal_order.clone();
        order_sorted.sort_unstable();
        let mut expected_sorted = expected;
        expected_sorted.sort_unstable();
        if order_sorted != expected_sorted {
            return Err(Error::InvalidInput(
                "marginal_order must list exactly the proper subsets with non-zero coefficient"
                    .into(),
            ));
        }
        Ok(Self { systems, coeffs, marginal_order })
    }

    pub fn systems(&self) -> &[(String, usize)] {
        &self.systems
    }

    pub fn dims(&self) -> Vec<usize> {
        self.systems.iter().map(|(_, d)| *d).collect()
    }

    pub fn coeff(&self, mask: SubsetMask) -> i8 {
        self.coeffs.get(&mask).copied().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &BTreeMap<SubsetMask, i8> {
        &self.coeffs
    }

    pub fn marginal_order(&self) -> &[SubsetMask] {
        &self.marginal_order
    }

    pub fn full_mask(&self) -> SubsetMask {
        (1u32 << self.systems.len()) - 1
    }

    /// The conditional-mutual-information combination on three systems with
    /// the chain order (BC, C, AC) matching the recovery interpretation.
    pub fn cmi_combo(dims: [usize; 3]) -> Self {
        let systems = vec![
            ("A".to_string(), dims[0]),
            ("B".to_string(), dims[1]),
            ("C".to_string(), dims[2]),
        ];
        let (a, b, c) = (0b001u32, 0b010u32, 0b100u32);
        let mut coeffs = BTreeMap::new();
        coeffs.insert(a | c, 1);
        coeffs.insert(b | c, 1);
        coeffs.insert(c, -1);
        coeffs.insert(a | b | c, -1);
        Self::new(systems, coeffs, vec![b | c, c, a | c]).expect("preset is valid")
    }

    fn systems_of(&self, mask: SubsetMask) -> Vec<usize> {
        (0..self.systems.len()).filter(|i| mask & (1 << i) != 0).collect()
    }
}

/// Where a normalized combo came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    FactoredMinusOne,
    Purified,
    Mixed,
}

/// Combo brought to the canonical a_full = −1 form, with the working state
/// purified and/or ε-mixed as the recipe requires.
#[derive(Clone, Debug)]
pub struct NormalizedCombo {
    combo: EntropyCombo,
    state: DensityOperator,
    epsilon: f64,
    provenance: Vec<Provenance>,
    seed: Option<u64>,
}

/// Apply, in order: a global sign flip when a_full = +1; purification with a
/// vanishing full-system entropy term when a_full = 0; ε-mixing with the
/// maximally mixed state when the working state is not positive definite.
pub fn normalize_combo(
    combo: &EntropyCombo,
    state: &DensityOperator,
    epsilon: f64,
) -> Result<NormalizedCombo> {
    let dims = combo.dims();
    let total: usize = dims.iter().product();
    if state.dim() != total {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} vs systems {:?}",
            state.dim(),
            dims
        )));
    }
    let mut provenance = Vec::new();
    let mut combo = combo.clone();
    let mut state = state.clone();

    let full = combo.full_mask();
    match combo.coeff(full) {
        1 => {
            let flipped: BTreeMap<SubsetMask, i8> =
                combo.coeffs.iter().map(|(&m, &a)| (m, -a)).collect();
            combo = EntropyCombo::new(
                combo.systems.clone(),
                flipped,
                combo.marginal_order.clone(),
            )?;
            provenance.push(Provenance::FactoredMinusOne);
        }
        0 => {
            let reference_dim = state.dim();
            state = purify(&state)?;
            let mut systems = combo.systems.clone();
            systems.push(("R".to_string(), reference_dim));
            let new_full = (1u32 << systems.len()) - 1;
            let mut coeffs = combo.coeffs.clone();
            coeffs.insert(new_full, -1);
            combo = EntropyCombo::new(systems, coeffs, combo.marginal_order.clone())?;
            provenance.push(Provenance::Purified);
        }
        _ => {}
    }

    let cutoff = state.op().support_cutoff();
    let needs_mixing = state.op().min_eigenvalue() <= cutoff.max(10.0 * tol::TAU_SUPP);
    if needs_mixing {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidInput(format!(
                "rank-deficient working state needs epsilon in (0,1), got {epsilon}"
            )));
        }
        let d = state.dim();
        let mut mixed = state.matrix().scale_re(1.0 - epsilon);
        for i in 0..d {
            mixed[(i, i)] += num_complex::Complex64::new(epsilon / d as f64, 0.0);
        }
        state = DensityOperator::new(mixed)?;
        provenance.push(Provenance::Mixed);
    }

    Ok(NormalizedCombo { combo, state, epsilon, provenance, seed: None })
}

impl NormalizedCombo {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn combo(&self) -> &EntropyCombo {
        &self.combo
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    fn marginal(&self, mask: SubsetMask) -> Result<HermitianOperator> {
        let dims = self.combo.dims();
        let keep = self.combo.systems_of(mask);
        let traced: Vec<usize> = (0..dims.len()).filter(|s| !keep.contains(s)).collect();
        HermitianOperator::new(partial_trace(self.state.matrix(), &dims, &traced)?)
    }
}

/// L(ρ) = Σ_S a_S H(S), computed twice: as the entropy sum and through the
/// relative-entropy rewriting D(ρ ‖ exp{Σ_{S∈P'} a_S log ρ_S}). The two
/// routes must agree to 1e-8.
pub fn l_value(nc: &NormalizedCombo) -> Result<f64> {
    let full = nc.combo.full_mask();
    if !nc.state.op().is_positive_definite() {
        return Err(Error::SupportViolation);
    }
    let mut direct = -vn_entropy_op(nc.state.op());
    for (&mask, &a) in nc.combo.coeffs() {
        if mask == full || a == 0 {
            continue;
        }
        direct += f64::from(a) * vn_entropy_op(&nc.marginal(mask)?);
    }

    // Rewriting: assemble the exponent, exponentiate, take D(ρ‖·).
    let dims = nc.combo.dims();
    let total: usize = dims.iter().product();
    let mut exponent = ComplexMatrix::zeros(total, total);
    for &mask in nc.combo.marginal_order() {
        let a = nc.combo.coeff(mask);
        let marg = nc.marginal(mask)?;
        let lifted = embed_operator(marg.log()?.matrix(), &dims, &nc.combo.systems_of(mask))?;
        exponent = exponent.add(&lifted.scale_re(f64::from(a)));
    }
    let omega = exp_hermitian(&exponent)?;
    let rewritten = relative_entropy_ops(nc.state.op(), &omega);

    if (direct - rewritten).abs() > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "entropy-sum and relative-entropy routes disagree: {direct} vs {rewritten}"
        )));
    }
    Ok(direct)
}

fn l_norm_chain(nc: &NormalizedCombo, alpha: f64, tilde: bool) -> Result<NormChain> {
    let dims = nc.combo.dims();
    let x = if tilde {
        if alpha.is_infinite() {
            1.0
        } else {
            (alpha - 1.0) / alpha
        }
    } else {
        alpha - 1.0
    };
    let p = if tilde {
        if alpha.is_infinite() {
            f64::INFINITY
        } else {
            2.0 * alpha
        }
    } else {
        2.0
    };
    let tail_pow = if tilde { 0.5 } else { alpha / 2.0 };

    let mut segments = Vec::new();
    let mut groups = Vec::new();
    for &mask in nc.combo.marginal_order() {
        let a = f64::from(nc.combo.coeff(mask));
        let marg = nc.marginal(mask)?;
        let systems = nc.combo.systems_of(mask);
        let powered = marg.power(-a * x / 2.0)?;
        segments.push(embed_operator(powered.matrix(), &dims, &systems)?);
        groups.push(SwivelGroup::embedded(&marg, dims.clone(), systems, 1));
    }
    segments.push(nc.state.op().power(tail_pow)?.matrix().clone());
    Ok(NormChain { segments, groups, p })
}

/// Result of a swiveled combo evaluation.
#[derive(Clone, Debug)]
pub struct ComboValue {
    pub value: f64,
    pub lognorm: f64,
    pub certified: bool,
}

/// L′_α = (2/(α−1)) max_{{V_S}} log‖[Π_S ρ_S^{−a_S(α−1)/2} V_S] ρ^{α/2}‖_2.
pub fn l_prime(nc: &NormalizedCombo, alpha: f64, budget: &Budget) -> Result<ComboValue> {
    if !(0.0..=2.0).contains(&alpha) {
        return Err(Error::InvalidInput(format!("l_prime needs alpha in [0,2], got {alpha}")));
    }
    if (alpha - 1.0).abs() < tol::ALPHA_GUARD {
        return Err(Error::DegenerateAlpha(alpha));
    }
    let chain = l_norm_chain(nc, alpha, false)?;
    let outcome = optim::maximize(&chain, budget, derive_seed(nc.seed.unwrap_or(0), 0xc0))?;
    Ok(ComboValue {
        value: 2.0 / (alpha - 1.0) * outcome.value,
        lognorm: outcome.value,
        certified: outcome.certified,
    })
}

/// The 2α-norm variant; α = ∞ uses the operator norm.
pub fn l_tilde_prime(nc: &NormalizedCombo, alpha: f64, budget: &Budget) -> Result<ComboValue> {
    if alpha.is_nan() || alpha < 0.5 {
        return Err(Error::InvalidInput(format!(
            "l_tilde_prime needs alpha in [1/2,∞], got {alpha}"
        )));
    }
    if !alpha.is_infinite() && (alpha - 1.0).abs() < tol::ALPHA_GUARD {
        return Err(Error::DegenerateAlpha(alpha));
    }
    let chain = l_norm_chain(nc, alpha, true)?;
    let outcome = optim::maximize(&chain, budget, derive_seed(nc.seed.unwrap_or(0), 0xc1))?;
    let pref = if alpha.is_infinite() { 2.0 } else { 2.0 * alpha / (alpha - 1.0) };
    Ok(ComboValue {
        value: pref * outcome.value,
        lognorm: outcome.value,
        certified: outcome.certified,
    })
}

/// The α = 1 boundary function of the combo chains:
/// Tr{ρ log ρ} − Σ_k a_k Tr{ρ · suffix_k† (log ρ_{S_k}) suffix_k}
/// with suffix_k = V_k V_{k+1} ⋯ V_G.
struct LBoundaryObjective {
    groups: Vec<SwivelGroup>,
    constant: f64,
    rho: ComplexMatrix,
    logs: Vec<(f64, ComplexMatrix)>,
    sign: f64,
}

impl LBoundaryObjective {
    fn value(&self, vs: &[ComplexMatrix]) -> f64 {
        let n = vs.len();
        let dim = self.rho.rows();
        let mut out = self.constant;
        let mut suffix = ComplexMatrix::identity(dim);
        for k in (0..n).rev() {
            suffix = vs[k].mul(&suffix);
            let (a, l) = &self.logs[k];
            let rotated = suffix.adjoint().mul(l).mul(&suffix);
            out -= a * self.rho.mul(&rotated).trace().re;
        }
        out
    }
}

impl SwivelObjective for LBoundaryObjective {
    fn groups(&self) -> &[SwivelGroup] {
        &self.groups
    }

    fn eval_members(&self, vs: &[ComplexMatrix]) -> f64 {
        self.sign * self.value(vs)
    }

    fn phase_quadratic(&self) -> Result<Option<crate::swivel::objective::PhaseQuadratic>> {
        Ok(None)
    }

    fn torus_terms(&self) -> Result<Option<crate::swivel::objective::TorusTerms>> {
        Ok(None)
    }

    fn quad_to_value(&self, e: f64) -> f64 {
        e
    }
}

/// One-sided limits of L′_α (and L̃′_α) at α = 1; identity is always a
/// candidate, so left ≤ L ≤ right by construction.
pub fn l_limits_at_one(nc: &NormalizedCombo, budget: &Budget) -> Result<(f64, f64)> {
    if !nc.state.op().is_positive_definite() {
        return Err(Error::SupportViolation);
    }
    let dims = nc.combo.dims();
    let constant = {
        let log_rho = nc.state.op().log()?;
        nc.state.matrix().mul(log_rho.matrix()).trace().re
    };
    let mut groups = Vec::new();
    let mut logs = Vec::new();
    for &mask in nc.combo.marginal_order() {
        let a = f64::from(nc.combo.coeff(mask));
        let marg = nc.marginal(mask)?;
        let systems = nc.combo.systems_of(mask);
        logs.push((a, embed_operator(marg.log()?.matrix(), &dims, &systems)?));
        groups.push(SwivelGroup::embedded(&marg, dims.clone(), systems, 1));
    }
    let seed = derive_seed(nc.seed.unwrap_or(0), 0xb1);
    let max_obj = LBoundaryObjective {
        groups: groups.clone(),
        constant,
        rho: nc.state.matrix().clone(),
        logs: logs.clone(),
        sign: 1.0,
    };
    let right = optim::maximize(&max_obj, budget, seed)?.value;
    let min_obj = LBoundaryObjective {
        groups,
        constant,
        rho: nc.state.matrix().clone(),
        logs,
        sign: -1.0,
    };
    let left = -optim::maximize(&min_obj, budget, derive_seed(seed, 1))?.value;
    Ok((left, right))
}

// ---------------------------------------------------------------------------
// Trace quantities (single swivel on N(σ)).

#[derive(Clone, Debug)]
pub struct TraceQuantity {
    pub value: f64,
    pub certified: bool,
}

/// max_V ‖[N(ρ)^{1/p} V N(σ)^{−1/p} ⊗ I_E] U σ^{1/p}‖_p^p for p ∈ [2, ∞);
/// bounded by 1 whenever supp ρ ⊆ supp σ, with equality at p = 2.
pub fn trace_quantity(inst: &Instance, p: f64, budget: &Budget) -> Result<TraceQuantity> {
    if !(2.0..f64::INFINITY).contains(&p) {
        return Err(Error::InvalidInput(format!("trace quantity needs p in [2,∞), got {p}")));
    }
    let opt = swivel::maximize_norm(inst, p, ChainFamily::TraceP, budget)?;
    Ok(TraceQuantity { value: (p * opt.value).exp(), certified: opt.certified })
}

/// The conditional-mutual-information trace quantity at Rényi parameter α:
/// the (ρ_ABC, ρ_AC⊗I_B, Tr_A) specialization with p = 2/(1−α).
/// α ∈ (1,2] requires a positive definite state and evaluates at β = 2−α,
/// to which it is equal by the reflection identity.
pub fn cmi_trace_quantity(
    state: &TripartiteState,
    alpha: f64,
    budget: &Budget,
) -> Result<TraceQuantity> {
    if !(0.0..=2.0).contains(&alpha) || (alpha - 1.0).abs() < tol::ALPHA_GUARD {
        return Err(Error::InvalidInput(format!(
            "cmi trace quantity needs alpha in [0,1)∪(1,2], got {alpha}"
        )));
    }
    let inst = state.cmi_instance()?;
    let a_eff = if alpha > 1.0 {
        if !inst.pd_flags().rho {
            return Err(Error::PositiveDefiniteRequired(
                "alpha in (1,2] needs a positive definite state".into(),
            ));
        }
        2.0 - alpha
    } else {
        alpha
    };
    let p = 2.0 / (1.0 - a_eff);
    trace_quantity(&inst, p, budget)
}

// ---------------------------------------------------------------------------
// Combo file format (JSON).

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComboFile {
    pub systems: Vec<ComboSystem>,
    /// Subset → coefficient; subsets are sorted label strings like "AC".
    pub coeffs: BTreeMap<String, i8>,
    pub order: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComboSystem {
    pub label: String,
    pub dim: usize,
}

impl ComboFile {
    pub fn to_combo(&self) -> Result<EntropyCombo> {
        let systems: Vec<(String, usize)> =
            self.systems.iter().map(|s| (s.label.clone(), s.dim)).collect();
        if systems.iter().any(|(l, _)| l.chars().count() != 1) {
            return Err(Error::InvalidInput("system labels must be single characters".into()));
        }
        let mask_of = |subset: &str| -> Result<SubsetMask> {
            let mut mask = 0u32;
            for ch in subset.chars() {
                let idx = systems
                    .iter()
                    .position(|(l, _)| l == &ch.to_string())
                    .ok_or_else(|| Error::InvalidInput(format!("unknown system label {ch}")))?;
                mask |= 1 << idx;
            }
            Ok(mask)
        };
        let mut coeffs = BTreeMap::new();
        for (subset, &a) in &self.coeffs {
            coeffs.insert(mask_of(subset)?, a);
        }
        let mut order = Vec::new();
        for subset in &self.order {
            order.push(mask_of(subset)?);
        }
        EntropyCombo::new(systems, coeffs, order)
    }

    pub fn from_combo(combo: &EntropyCombo) -> Self {
        let label_of = |mask: SubsetMask| -> String {
            let mut labels: Vec<&str> = combo
                .systems()
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, (l, _))| l.as_str())
                .collect();
            labels.sort_unstable();
            labels.concat()
        };
        Self {
            systems: combo
                .systems()
                .iter()
                .map(|(label, dim)| ComboSystem { label: label.clone(), dim: *dim })
                .collect(),
            coeffs: combo.coeffs().iter().map(|(&m, &a)| (label_of(m), a)).collect(),
            order: combo.marginal_order().iter().map(|&m| label_of(m)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::vn_entropy_op;
    use crate::recovery;
    use crate::states::{random_density, DensityOperator};

    fn budget() -> Budget {
        Budget::default()
    }

    fn label(s: &str, d: usize) -> (String, usize) {
        (s.to_string(), d)
    }

    #[test]
    fn normalize_keeps_canonical_combo() {
        let combo = EntropyCombo::cmi_combo([2, 2, 2]);
        let state = random_density(8, 8, 5).unwrap();
        let nc = normalize_combo(&combo, &state, 1e-6).unwrap();
        assert!(nc.provenance().is_empty());
        assert_eq!(nc.state().dim(), 8);
    }

    #[test]
    fn normalize_purifies_when_full_coefficient_vanishes() {
        // H(AB) + H(BC) + H(AC): a_full = 0, so the recipe purifies to R and
        // adds the vanishing full-system term.
        let systems = vec![label("A", 2), label("B", 2), label("C", 2)];
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0b011u32, 1i8);
        coeffs.insert(0b110u32, 1i8);
        coeffs.insert(0b101u32, 1i8);
        let combo =
            EntropyCombo::new(systems, coeffs, vec![0b011, 0b110, 0b101]).unwrap();
        let state = random_density(8, 8, 7).unwrap();
        let nc = normalize_combo(&combo, &state, 1e-6).unwrap();
        assert!(nc.provenance().contains(&Provenance::Purified));
        assert_eq!(nc.combo().systems().len(), 4);
        assert_eq!(nc.combo().coeff(nc.combo().full_mask()), -1);
        // The purified state is pure before mixing; mixing then perturbs it.
        assert!(nc.provenance().contains(&Provenance::Mixed));
        assert_eq!(nc.state().dim(), 64);
    }

    #[test]
    fn normalize_flips_global_sign() {
        let systems = vec![label("A", 2), label("B", 2)];
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0b11u32, 1i8);
        coeffs.insert(0b01u32, -1i8);
        let combo = EntropyCombo::new(systems, coeffs, vec![0b01]).unwrap();
        let state = random_density(4, 4, 9).unwrap();
        let nc = normalize_combo(&combo, &state, 1e-6).unwrap();
        assert!(nc.provenance().contains(&Provenance::FactoredMinusOne));
        assert_eq!(nc.combo().coeff(0b11), -1);
        assert_eq!(nc.combo().coeff(0b01), 1);
    }

    #[test]
    fn mixing_bounds_minimum_eigenvalue() {
        let systems = vec![label("A", 2), label("B", 2)];
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0b11u32, -1i8);
        coeffs.insert(0b01u32, 1i8);
        let combo = EntropyCombo::new(systems, coeffs, vec![0b01]).unwrap();
        let state = random_density(4, 2, 11).unwrap();
        let nc = normalize_combo(&combo, &state, 0.01).unwrap();
        assert!(nc.provenance().contains(&Provenance::Mixed));
        assert!(nc.state().op().min_eigenvalue() >= 0.01 / 4.0 - 1e-12);
    }

    #[test]
    fn l_value_cmi_coefficients_equal_cmi() {
        let state = recovery::TripartiteState::random_pd([2, 2, 2], 13).unwrap();
        let combo = EntropyCombo::cmi_combo([2, 2, 2]);
        let nc = normalize_combo(&combo, state.state(), 1e-6).unwrap();
        let l = l_value(&nc).unwrap();
        assert!((l - recovery::cmi(&state)).abs() < 1e-10);
    }

    #[test]
    fn l_value_single_marginal_on_pure_state() {
        // {A: −1} on a bipartite pure state: L = −H(A). A pure state needs
        // mixing, so compare against the mixed state's entropy.
        let systems = vec![label("A", 2), label("B", 2)];
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0b01u32, -1i8);
        // a_full = 0 would purify again; use the full-system coefficient
        // directly: L = −H(AB) + ... simplest single-term case instead:
        coeffs.insert(0b11u32, -1i8);
        coeffs.insert(0b01u32, 1i8);
        let combo = EntropyCombo::new(systems, coeffs, vec![0b01]).unwrap();
        let state = crate::states::purify(&random_density(2, 2, 15).unwrap()).unwrap();
        let nc = normalize_combo(&combo, &state, 1e-9).unwrap();
        let l = l_value(&nc).unwrap();
        let dims = nc.combo().dims();
        let rho_a = HermitianOperator::new(
            partial_trace(nc.state().matrix(), &dims, &[1]).unwrap(),
        )
        .unwrap();
        let expect = vn_entropy_op(&rho_a) - vn_entropy_op(nc.state().op());
        assert!((l - expect).abs() < 1e-9);
    }

    #[test]
    fn l_prime_singleton_is_minus_renyi_entropy() {
        let systems = vec![label("A", 3)];
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0b1u32, -1i8);
        let combo = EntropyCombo::new(systems, coeffs, vec![]).unwrap();
        let state = random_density(3, 3, 17).unwrap();
        let nc = normalize_combo(&combo, &state, 1e-6).unwrap();
        for &alpha in &[0.5, 2.0] {
            let lp = l_prime(&nc, alpha, &budget()).unwrap();
            let h_alpha = nc
                .state()
                .op()
                .eigenvalues()
                .iter()
                .filter(|l| **l > 0.0)
                .map(|l| l.powf(alpha))
                .sum::<f64>()
                .ln()
                / (1.0 - alpha);
            assert!((lp.value + h_alpha).abs() < 1e-10, "alpha {alpha}");
            assert!(lp.certified);
        }
    }

    #[test]
    fn l_prime_cmi_coefficients_match_cmi_prime() {
        // seed 71 cross-module equivalence.
        let state = recovery::TripartiteState::random_pd([2, 2, 2], 71).unwrap();
        let combo = EntropyCombo::cmi_combo([2, 2, 2]);
        let nc = normalize_combo(&combo, state.state(), 1e-6).unwrap().with_seed(71);
        for &alpha in &[0.5, 1.5] {
            let via_combo = l_prime(&nc, alpha, &budget()).unwrap().value;
            let via_cmi = recovery::cmi_prime(&state, alpha, &budget()).unwrap().value;
            assert!(
                (via_combo - via_cmi).abs() < 1e-8,
                "alpha {alpha}: {via_combo} vs {via_cmi}"
            );
        }
    }

    #[test]
    fn l_prime_classical_matches_oracle() {
        let (state, p) = recovery::TripartiteState::random_classical([2, 2, 2], 19).unwrap();
        let combo = EntropyCombo::cmi_combo([2, 2, 2]);
        let nc = normalize_combo(&combo, state.state(), 1e-6).unwrap().with_seed(19);
        let subsets = [(0b110u32, 1i8), (0b100u32, -1i8), (0b101u32, 1i8)];
        for &alpha in &[0.5, 2.0] {
            let lhs = l_prime(&nc, alpha, &budget()).unwrap().value;
            let rhs = crate::verify::oracle::l_alpha(&p, &[2, 2, 2], &subsets, alpha);
            assert!((lhs - rhs).abs() < 1e-9, "alpha {alpha}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn l_limits_sandwich_l() {
        let state = random_density(4, 4, 21).unwrap();
        let systems = vec![label("A", 2), label("B", 2)];
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0b11u32, -1i8);
        coeffs.insert(0b01u32, 1i8);
        coeffs.insert(0b10u32, 1i8);
        let combo = EntropyCombo::new(systems, coeffs, vec![0b01, 0b10]).unwrap();
        let nc = normalize_combo(&combo, &state, 1e-6).unwrap().with_seed(21);
        let l = l_value(&nc).unwrap();
        let (left, right) = l_limits_at_one(&nc, &budget()).unwrap();
        assert!(left <= l + 1e-8, "left {left} vs L {l}");
        assert!(l <= right + 1e-8, "right {right} vs L {l}");
    }

    #[test]
    fn trace_quantity_is_one_at_p_two() {
        for seed in [23u64, 29] {
            let inst = crate::states::random_instance(3, 3, 2, 2, seed).unwrap();
            let tq = trace_quantity(&inst, 2.0, &budget()).unwrap();
            assert!((tq.value - 1.0).abs() < 1e-9, "seed {seed}: {}", tq.value);
        }
    }

    #[test]
    fn trace_quantity_monotone_in_p() {
        // seed 73 per the grid example.
        let inst = crate::states::random_instance(3, 3, 2, 2, 73).unwrap();
        let mut prev = f64::INFINITY;
        for &p in &[2.0, 3.0, 4.0, 8.0, 16.0] {
            let tq = trace_quantity(&inst, p, &budget()).unwrap().value;
            assert!(tq <= prev + 1e-6, "p {p}");
            assert!(tq <= 1.0 + 1e-9);
            prev = tq;
        }
    }

    #[test]
    fn trace_quantity_classical_matches_oracle() {
        let (inst, p_dist, s, t) =
            crate::states::random_classical_instance(3, 2, 31).unwrap();
        for &p in &[2.0, 4.0, 8.0] {
            let lhs = trace_quantity(&inst, p, &budget()).unwrap().value;
            let rhs = crate::verify::oracle::trace_quantity(&s, &t, &p_dist, p);
            assert!((lhs - rhs).abs() < 1e-10, "p {p}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn cmi_trace_quantity_contract() {
        let state = recovery::TripartiteState::random_pd([2, 2, 2], 37).unwrap();
        let at_zero = cmi_trace_quantity(&state, 0.0, &budget()).unwrap().value;
        assert!((at_zero - 1.0).abs() < 1e-9);

        let mut prev = f64::INFINITY;
        for &alpha in &[0.0, 0.25, 0.5, 0.75] {
            let v = cmi_trace_quantity(&state, alpha, &budget()).unwrap().value;
            assert!(v <= prev + 1e-9, "alpha {alpha}");
            prev = v;
        }

        // Reflection equality on positive definite states.
        for &alpha in &[1.25, 1.5] {
            let hi = cmi_trace_quantity(&state, alpha, &budget()).unwrap().value;
            let lo = cmi_trace_quantity(&state, 2.0 - alpha, &budget()).unwrap().value;
            assert!((hi - lo).abs() < 1e-9, "alpha {alpha}: {hi} vs {lo}");
        }
    }

    #[test]
    fn epsilon_mixing_perturbation_shrinks_linearly() {
        let combo = EntropyCombo::cmi_combo([2, 2, 2]);
        // Rank-deficient state so mixing actually runs.
        let state = random_density(8, 5, 41).unwrap();
        // Reference value on the raw state (entropies handle rank deficiency).
        let dims = [2usize, 2, 2];
        let l_of = |rho: &DensityOperator| -> f64 {
            let m = rho.matrix();
            let h = |traced: &[usize]| {
                vn_entropy_op(&HermitianOperator::new(partial_trace(m, &dims, traced).unwrap()).unwrap())
            };
            h(&[1]) + h(&[0]) - h(&[0, 1]) - vn_entropy_op(rho.op())
        };
        let l_orig = l_of(&state);
        let mut deviations = Vec::new();
        for &eps in &[1e-2, 1e-3] {
            let nc = normalize_combo(&combo, &state, eps).unwrap();
            deviations.push((l_value(&nc).unwrap() - l_orig).abs());
        }
        assert!(
            deviations[1] <= 0.2 * deviations[0] + 1e-12,
            "deviations {deviations:?}"
        );
    }

    #[test]
    fn combo_file_round_trip() {
        let combo = EntropyCombo::cmi_combo([2, 2, 2]);
        let file = ComboFile::from_combo(&combo);
        let text = serde_json::to_string_pretty(&file).unwrap();
        let re_read: ComboFile = serde_json::from_str(&text).unwrap();
        let back = re_read.to_combo().unwrap();
        assert_eq!(back.coeffs(), combo.coeffs());
        assert_eq!(back.marginal_order(), combo.marginal_order());
        assert_eq!(file.coeffs.get("ABC"), Some(&-1));
        assert_eq!(file.order, vec!["BC", "C", "AC"]);
    }

    #[test]
    fn marginal_order_must_be_explicit_and_exact() {
        let systems = vec![label("A", 2), label("B", 2)];
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0b11u32, -1i8);
        coeffs.insert(0b01u32, 1i8);
        // Missing order entry.
        assert!(EntropyCombo::new(systems.clone(), coeffs.clone(), vec![]).is_err());
        // Superfluous entry.
        assert!(EntropyCombo::new(systems, coeffs, vec![0b01, 0b10]).is_err());
    }

    #[test]
    fn observe_marginal_order_spread() {
        // Whether different marginal orders change L′_α is unresolved;
        // record the spread on one state without asserting anything.
        let state = recovery::TripartiteState::random_pd([2, 2, 2], 43).unwrap();
        let systems = vec![label("A", 2), label("B", 2), label("C", 2)];
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0b111u32, -1i8);
        coeffs.insert(0b011u32, 1i8);
        coeffs.insert(0b110u32, 1i8);
        let orders = [vec![0b011u32, 0b110], vec![0b110u32, 0b011]];
        let mut values = Vec::new();
        for order in &orders {
            let combo =
                EntropyCombo::new(systems.clone(), coeffs.clone(), order.clone()).unwrap();
            let nc = normalize_combo(&combo, state.state(), 1e-6).unwrap().with_seed(43);
            values.push(l_prime(&nc, 1.5, &budget()).unwrap().value);
        }
        eprintln!(
            "marginal-order spread at alpha 1.5: {:?} (range {:.3e})",
            values,
            values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - values.iter().cloned().fold(f64::INFINITY, f64::min)
        );
    }
}
