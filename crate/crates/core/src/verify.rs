//! Claim verification harness: each claim checks one theorem-shaped
//! inequality family on seeded random instances and reports the worst
//! violation observed. Trials are distributed by seed partition and merged
//! in index order, so parallel and serial runs produce identical reports.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combos::{self, EntropyCombo};
use crate::entropy;
use crate::error::{Error, Result};
use crate::recovery::{self, TripartiteState};
use crate::states::{
    derive_seed, random_channel, random_classical_instance, random_pd_instance, random_positive,
    random_tr_first_instance, DensityOperator, Instance, QuantumChannel,
};
use crate::swivel::{self, Budget, ChainFamily, SwivelGroup, SwivelPoint};

/// Per-claim run configuration.
#[derive(Clone, Debug)]
pub struct ClaimConfig {
    pub trials: usize,
    pub seed: u64,
    pub tolerance: Option<f64>,
    pub budget: Budget,
    pub jobs: usize,
}

impl Default for ClaimConfig {
    fn default() -> Self {
        Self { trials: 50, seed: 1, tolerance: None, budget: Budget::default(), jobs: 1 }
    }
}

/// Outcome of one claim run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim_id: String,
    pub trials: usize,
    pub passes: usize,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub seeds: Vec<u64>,
    pub wall_time_s: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.passes == self.trials
    }
}

struct TrialResult {
    violation: f64,
    notes: Vec<String>,
}

impl TrialResult {
    fn ok(violation: f64) -> Self {
        Self { violation, notes: vec![] }
    }
}

pub struct ClaimSpec {
    pub id: &'static str,
    pub description: &'static str,
    pub default_trials: usize,
    pub default_tolerance: f64,
}

pub fn list_claims() -> Vec<ClaimSpec> {
    vec![
        ClaimSpec {
            id: "thm-monotone",
            description: "Δ′_α non-decreasing on [0,2]\\{1} (step 0.1), certified torus optima",
            default_trials: 50,
            default_tolerance: 1e-5,
        },
        ClaimSpec {
            id: "thm-monotone-tilde",
            description: "Δ̃′_α non-decreasing on {0.5..0.9, 1.25, 1.5, 2, 4, 8, ∞}",
            default_trials: 50,
            default_tolerance: 1e-5,
        },
        ClaimSpec {
            id: "reduction",
            description: "N = Tr: Δ′_α = D_α + log Tr σ and Δ̃′_α = D̃_α + log Tr σ",
            default_trials: 50,
            default_tolerance: 1e-8,
        },
        ClaimSpec {
            id: "prop-lim-a-1",
            description: "α = 1 limits sandwich Δ; one-sided limits approached linearly",
            default_trials: 50,
            default_tolerance: 1e-7,
        },
        ClaimSpec {
            id: "non-negativity",
            description: "Δ′_α ≥ 0 on [0,2] and Δ̃′_α ≥ 0 on [1/2,∞]",
            default_trials: 50,
            default_tolerance: 1e-6,
        },
        ClaimSpec {
            id: "cor-recover",
            description: "fidelity/D_0 recovery lower bounds ≤ Δ; D_max/D_2 upper bounds ≥ Δ",
            default_trials: 50,
            default_tolerance: 1e-7,
        },
        ClaimSpec {
            id: "thm-rel-ent-other",
            description: "rotated-Petz witnesses: some t with D_0 ≤ Δ and some t with D_2 ≥ Δ",
            default_trials: 50,
            default_tolerance: 1e-6,
        },
        ClaimSpec {
            id: "cmi-suite",
            description: "swiveled CMI: non-negative, α-monotone, B-data-processing, SSA bounds",
            default_trials: 12,
            default_tolerance: 1e-5,
        },
        ClaimSpec {
            id: "prop-zhang",
            description: "trace quantity ≤ 1, non-increasing in p; CMI trace quantity reflection",
            default_trials: 50,
            default_tolerance: 1e-6,
        },
        ClaimSpec {
            id: "appendix-a",
            description: "Q_1 = 1 under the support condition; Δ_α → Δ linearly",
            default_trials: 50,
            default_tolerance: 1e-9,
        },
        ClaimSpec {
            id: "appendix-c",
            description: "f(α,V,W) → f(1,V,W) linearly at fixed swivel points",
            default_trials: 50,
            default_tolerance: 0.2,
        },
        ClaimSpec {
            id: "oracle-equivalence",
            description: "classical scalar oracles and the qubit phase-grid oracle agree",
            default_trials: 12,
            default_tolerance: 1e-8,
        },
        ClaimSpec {
            id: "combos",
            description: "L′ ordering bounds sandwich L; dual-path l_value agreement",
            default_trials: 20,
            default_tolerance: 1e-5,
        },
    ]
}

pub fn default_tolerance(claim_id: &str) -> Option<f64> {
    list_claims().iter().find(|c| c.id == claim_id).map(|c| c.default_tolerance)
}

pub fn default_trials(claim_id: &str) -> Option<usize> {
    list_claims().iter().find(|c| c.id == claim_id).map(|c| c.default_trials)
}

/// Run one claim. The report's `passes` counts trials whose worst violation
/// stayed within tolerance.
pub fn run_claim(claim_id: &str, cfg: &ClaimConfig) -> Result<VerificationReport> {
    let start = std::time::Instant::now();
    let tolerance = cfg
        .tolerance
        .or_else(|| default_tolerance(claim_id))
        .ok_or_else(|| Error::UnknownClaim(claim_id.to_string()))?;
    let runner: fn(u64, &ClaimConfig) -> Result<TrialResult> = match claim_id {
        "thm-monotone" => trial_monotone,
        "thm-monotone-tilde" => trial_monotone_tilde,
        "reduction" => trial_reduction,
        "prop-lim-a-1" => trial_lim_a_1,
        "non-negativity" => trial_non_negativity,
        "cor-recover" => trial_recover,
        "thm-rel-ent-other" => trial_rel_ent_other,
        "cmi-suite" => trial_cmi_suite,
        "prop-zhang" => trial_zhang,
        "appendix-a" => trial_appendix_a,
        "appendix-c" => trial_appendix_c,
        "oracle-equivalence" => trial_oracle_equivalence,
        "combos" => trial_combos,
        _ => return Err(Error::UnknownClaim(claim_id.to_string())),
    };

    let seeds: Vec<u64> = (0..cfg.trials).map(|i| derive_seed(cfg.seed, i as u64)).collect();
    let results: Vec<Result<TrialResult>> = if cfg.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        pool.install(|| seeds.par_iter().map(|&s| runner(s, cfg)).collect())
    } else {
        seeds.iter().map(|&s| runner(s, cfg)).collect()
    };

    let mut passes = 0usize;
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut notes = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(t) => {
                if t.violation <= tolerance {
                    passes += 1;
                } else {
                    notes.push(format!("trial {i}: violation {:.3e}", t.violation));
                }
                worst = worst.max(t.violation);
                notes.extend(t.notes);
            }
            Err(e) => {
                worst = worst.max(f64::INFINITY);
                notes.push(format!("trial {i}: error: {e}"));
            }
        }
    }

    // prop-lim-a-1 additionally demands that the discontinuity is actually
    // observed somewhere in the batch.
    if claim_id == "prop-lim-a-1" {
        let witnessed = notes.iter().any(|n| n == "discontinuity-witness");
        notes.retain(|n| n != "discontinuity-witness");
        if !witnessed {
            passes = 0;
            notes.push("no instance exhibited left < right - 1e-4".into());
        }
    }

    // oracle-equivalence also checks the optimizer against the exhaustive
    // 1e-3 rad phase-grid oracle once per run (the grid is ~4e7 points).
    if claim_id == "oracle-equivalence" {
        let grid_violation = optimizer_vs_grid_oracle(derive_seed(cfg.seed, 999), &cfg.budget)?;
        notes.push(format!("phase-grid oracle deviation: {grid_violation:.3e}"));
        if grid_violation > 1e-6 {
            passes = 0;
            notes.push("optimizer missed the phase-grid oracle by more than 1e-6".into());
        }
    }

    Ok(VerificationReport {
        claim_id: claim_id.to_string(),
        trials: cfg.trials,
        passes,
        worst_violation: if worst.is_finite() || worst.is_infinite() { worst } else { 0.0 },
        tolerance,
        seeds,
        wall_time_s: start.elapsed().as_secs_f64(),
        notes,
    })
}

fn qubit_instance(seed: u64) -> Result<Instance> {
    random_pd_instance(2, 2, 2, seed)
}

fn monotone_violation(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::NEG_INFINITY, f64::max)
}

fn trial_monotone(seed: u64, cfg: &ClaimConfig) -> Result<TrialResult> {
    let inst = qubit_instance(seed)?;
    let mut grid: Vec<f64> = Vec::new();
    for k in 0..=20 {
        let alpha = k as f64 * 0.1;
        if (alpha - 1.0).abs() > 1e-9 {
            grid.push(alpha);
        }
    }
    let mut values = Vec::with_capacity(grid.len());
    for &alpha in &grid {
        let v = swivel::delta_prime(&inst, alpha, &cfg.budget)?;
        if !v.certified {
            return Err(Error::InvalidInput(format!(
                "expected certified optimum for qubit instance at alpha {alpha}"
            )));
        }
        values.push(v.value);
    }
    Ok(TrialResult::ok(monotone_violation(&values)))
}

const TILDE_GRID: [f64; 11] =
    [0.5, 0.6, 0.7, 0.8, 0.9, 1.25, 1.5, 2.0, 4.0, 8.0, f64::INFINITY];

fn trial_monotone_tilde(seed: u64, cfg: &ClaimConfig) -> Result<TrialResult> {
    let inst = qubit_instance(seed)?;
    let mut values = Vec::with_capacity(TILDE_GRID.len());
    for &alpha in TILDE_GRID.iter() {
        values.push(swivel::delta_tilde_prime(&inst, alpha, &cfg.budget)?.value);
    }
    Ok(TrialResult::ok(monotone_violation(&values)))
}

fn trial_reduction(seed: u64, cfg: &ClaimConfig) -> Result<TrialResult> {
    let dim = 3;
    let rho = crate::states::random_density(dim, dim, derive_seed(seed, 1))?;
    // Exercise log Tr σ ≠ 0.
    let trace = 0.5 + 1.5 * ((seed % 7) as f64) / 7.0 + 0.1;
    let sigma = random_positive(dim, trace, derive_seed(seed, 2))?;
    let inst = Instance::new(rho, sigma, QuantumChannel::trace_channel(dim), Some(seed))?;
    let log_tr = inst.sigma().op().trace_re().ln();
    let mut worst = f64::NEG_INFINITY;
    for &alpha in &[0.3, 0.7, 1.5, 2.0] {
        let lhs = swivel::delta_prime(&inst, alpha, &cfg.budget)?.value;
        let rhs = entropy::renyi_rel(inst.rho(), inst.sigma(), alpha)? + log_tr;
        worst = worst.max((lhs - rhs).abs());
    }
    for &alpha in &[0.6, 2.0, 8.0] {
        let lhs = swivel::delta_tilde_prime(&inst, alpha, &cfg.budget)?.value;
        let rhs = entropy::sandwiched_rel(inst.rho(), inst.sigma(), alpha)? + log_tr;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(TrialResult::ok(worst))
}

/// Ratio check helper: errors at γ = 1e-2 and 1e-3 should shrink roughly
/// linearly. Returns a violation ≤ 0 when the decay looks linear (or when
/// both errors are already at the noise floor).
fn linear_decay_violation(e_coarse: f64, e_fine: f64, ratio_cap: f64) -> f64 {
    if e_coarse < 1e-9 {
        return if e_fine < 1e-8 { -1.0 } else { e_fine };
    }
    e_fine / e_coarse - ratio_cap
}

fn trial_lim_a_1(seed: u64, cfg: &ClaimConfig) -> Result<TrialResult> {
    let inst = qubit_instance(seed)?;
    let delta = entropy::delta(&inst)?;
    let lim = swivel::limits_at_one(&inst, &cfg.budget)?;
    let sandwich = (lim.left - delta).max(delta - lim.right);

    let mut worst = sandwich;
    for (target, sign) in [(lim.right, 1.0), (lim.left, -1.0)] {
        let e1 = (swivel::delta_prime(&inst, 1.0 + sign * 1e-2, &cfg.budget)?.value - target).abs();
        let e2 = (swivel::delta_prime(&inst, 1.0 + sign * 1e-3, &cfg.budget)?.value - target).abs();
        // Scale the ratio violation so it shares the claim tolerance axis.
        let ratio_violation = linear_decay_violation(e1, e2, 0.2);
        if ratio_violation > 0.0 {
            worst = worst.max(1.0 + ratio_violation);
        }
    }

    let mut result = TrialResult::ok(worst);
    if lim.left < lim.right - 1e-4 {
        result.notes.push("discontinuity-witness".into());
    }
    Ok(result)
}

fn trial_non_negativity(seed: u64, cfg: &ClaimConfig) -> Result<TrialResult> {
    let dim = if seed % 2 == 0 { 2 } else { 3 };
    let rank = if seed % 3 == 0 { dim - 1 } else { dim };
    let inst = crate::states::random_instance(dim, rank.max(1), dim, 2, seed)?;
    let mut worst = f64::NEG_INFINITY;
    for &alpha in &[0.0, 0.25, 0.5, 0.75, 1.25, 1.5, 2.0] {
        worst = worst.max(-swivel::delta_prime(&inst, alpha, &cfg.budget)?.value);
    }
    for &alpha in &[0.5, 0.75, 1.25, 2.0, 8.0, f64::INFINITY] {
        worst = worst.max(-swivel::delta_tilde_prime(&inst, alpha, &cfg.budget)?.value);
    }
    Ok(TrialResult::ok(worst))
}

fn trial_recover(seed: u64, cfg: &ClaimConfig) -> Result<TrialResult> {
    // Lower bounds on a generic instance (dimension-reducing channel).
    let inst = crate::states::random_instance(3, 3, 2, 2, derive_seed(seed, 5))?;
    let delta = entropy::delta(&inst)?;
    let fid = swivel::delta_tilde_prime(&inst, 0.5, &cfg.budget)?.value;
    let d0 = swivel::delta_prime(&inst, 0.0, &cfg.budget)?.value;
    let mut worst = (fid - delta).max(d0 - delta);

    // Upper bounds on the unitary-dilation structure.
    let tr_inst = random_tr_first_instance(2, 2, derive_seed(seed, 6))?;
    if !tr_inst.pd_flags().all() {
        return Err(Error::PositiveDefiniteRequired("tr-first instance".into()));
    }
    let delta_u = entropy::delta(&tr_inst)?;
    let dmax = swivel::delta_tilde_prime(&tr_inst, f64::INFINITY, &cfg.budget)?.value;
    let d2 = swivel::delta_prime(&tr_inst, 2.0, &cfg.budget)?.value;
    worst = worst.max(delta_u - dmax).max(delta_u - d2);
    Ok(TrialResult::ok(worst))
}

fn default_t_grid() -> Vec<f64> {
    let mut grid = Vec::new();
    let mut t = -10.0f64;
    while t <= 10.0 + 1e-12 {
        grid.push(t);
        t += 0.05;
    }
    grid
}

fn rotated_curve(inst: &Instance, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        let map =
            recovery::build_recovery(recovery::RecoveryKind::Rotated(t), inst.sigma(), inst.channel())?;
        let omega = map.apply_herm(inst.n_rho())?;
        out.push((
            entropy::d0_ops(inst.rho().op(), &omega),
            entropy::d2_ops(inst.rho().op(), &omega),
        ));
    }
    Ok(out)
}

fn trial_rel_ent_other(seed: u64, _cfg: &ClaimConfig) -> Result<TrialResult> {
    let grid = default_t_grid();
    // D_0 witness on a generic instance.
    let inst = crate::states::random_instance(3, 3, 2, 2, derive_seed(seed, 7))?;
    let delta = entropy::delta(&inst)?;
    let curve = rotated_curve(&inst, &grid)?;
    let min_d0 = curve.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let mut worst = min_d0 - delta;

    // D_2 witness on the unitary-dilation structure.
    let tr_inst = random_tr_first_instance(2, 2, derive_seed(seed, 8))?;
    let delta_u = entropy::delta(&tr_inst)?;
    let curve2 = rotated_curve(&tr_inst, &grid)?;
    let max_d2 = curve2.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    worst = worst.max(delta_u - max_d2);
    Ok(TrialResult::ok(worst))
}

fn trial_cmi_suite(seed: u64, cfg: &ClaimConfig) -> Result<TrialResult> {
    let state = TripartiteState::random_pd([2, 2, 2], derive_seed(seed, 9))?;
    let mut worst = f64::NEG_INFINITY;

    // Non-negativity.
    for &alpha in &[0.5, 2.0] {
        worst = worst.max(-recovery::cmi_prime(&state, alpha, &cfg.budget)?.value);
    }
    for &alpha in &[0.5, 2.0, 8.0] {
        worst = worst.max(-recovery::cmi_tilde_prime(&state, alpha, &cfg.budget)?.value);
    }

    // Monotonicity in α.
    let prime_grid = [0.0, 0.25, 0.5, 0.75, 1.25, 1.5, 1.75, 2.0];
    let mut values = Vec::new();
    for &alpha in &prime_grid {
        values.push(recovery::cmi_prime(&state, alpha, &cfg.budget)?.value);
    }
    worst = worst.max(monotone_violation(&values));
    let tilde_grid = [0.5, 0.75, 1.25, 1.5, 2.0, 4.0, 8.0, f64::INFINITY];
    let mut tvalues = Vec::new();
    for &alpha in &tilde_grid {
        tvalues.push(recovery::cmi_tilde_prime(&state, alpha, &cfg.budget)?.value);
    }
    worst = worst.max(monotone_violation(&tvalues));

    // Data processing under a channel on B.
    let channel = random_channel(2, 2, 2, derive_seed(seed, 10))?;
    let pushed = state.apply_channel_on_b(&channel)?;
    for &alpha in &[0.5, 2.0] {
        let before = recovery::cmi_prime(&state, alpha, &cfg.budget)?.value;
        let after = recovery::cmi_prime(&pushed, alpha, &cfg.budget)?.value;
        worst = worst.max(after - before);
    }
    for &alpha in &[0.5, 2.0, 8.0] {
        let before = recovery::cmi_tilde_prime(&state, alpha, &cfg.budget)?.value;
        let after = recovery::cmi_tilde_prime(&pushed, alpha, &cfg.budget)?.value;
        worst = worst.max(after - before);
    }

    // SSA refinement bounds.
    let ssa = recovery::ssa_refinement(&state, &cfg.budget)?;
    worst = worst.max(ssa.fidelity_lower - ssa.cmi).max(ssa.d0_lower - ssa.cmi);
    if let (Some(dmax), Some(d2)) = (ssa.dmax_upper, ssa.d2_upper) {
        worst = worst.max(ssa.cmi - dmax).max(ssa.cmi - d2);
    } else {
        return Err(Error::PositiveDefiniteRequired("ssa upper bounds".into()));
    }
    Ok(TrialResult::ok(worst))
}

/// Components with tighter bounds than the claim tolerance map an excess to
/// a large violation; satisfied components report their (negative) slack.
fn strict_excess(excess: f64) -> f64 {
    if excess > 0.0 {
        1.0 + excess
    } else {
        excess
    }
}

fn trial_zhang(seed: u64, cfg: &ClaimConfig) -> Result<TrialResult> {
    let inst = crate::states::random_instance(3, 3, 3, 2, derive_seed(seed, 11))?;
    let mut worst = f64::NEG_INFINITY;
    let mut prev = f64::INFINITY;
    for &p in &[2.0, 3.0, 4.0, 8.0, 16.0] {
        let tq = combos::trace_quantity(&inst, p, &cfg.budget)?.value;
        // Bounded by one (1e-9), monotone non-increasing (claim tolerance).
        worst = worst.max(strict_excess(tq - 1.0 - 1e-9));
        worst = worst.max(tq - prev);
        prev = tq;
    }

    let state = TripartiteState::random_pd([2, 2, 2], derive_seed(seed, 12))?;
    let at_zero = combos::cmi_trace_quantity(&state, 0.0, &cfg.budget)?.value;
    worst = worst.max(strict_excess((at_zero - 1.0).abs() - 1e-9));
    for &alpha in &[1.25, 1.5] {
        let hi = combos::cmi_trace_quantity(&state, alpha, &cfg.budget)?.value;
        let lo = combos::cmi_trace_quantity(&state, 2.0 - alpha, &cfg.budget)?.value;
        worst = worst.max(strict_excess((hi - lo).abs() - 1e-8));
    }
    Ok(TrialResult::ok(worst))
}

fn trial_appendix_a(seed: u64, _cfg: &ClaimConfig) -> Result<TrialResult> {
    // Q_1 = 1 under the support condition, including rank-deficient ρ.
    let dim = 3;
    let rank = if seed % 2 == 0 { dim } else { dim - 1 };
    let inst = crate::states::random_instance(dim, rank, 2, 2, derive_seed(seed, 13))?;
    let q1 = swivel::q_alpha(&inst, 1.0)?;
    let mut worst = (q1 - 1.0).abs();

    // |Δ_α − Δ| decays linearly in |α − 1| on positive definite instances.
    let pd = random_pd_instance(3, 3, 2, derive_seed(seed, 14))?;
    let delta = entropy::delta(&pd)?;
    for sign in [1.0, -1.0] {
        let e1 = (swivel::delta_alpha_unswiveled(&pd, 1.0 + sign * 1e-2)? - delta).abs();
        let e2 = (swivel::delta_alpha_unswiveled(&pd, 1.0 + sign * 1e-3)? - delta).abs();
        if e1 > 1e-9 {
            let ratio = e2 / e1;
            if !(0.05..=0.2).contains(&ratio) {
                worst = worst.max(1.0 + (ratio - 0.2).abs());
            }
        }
    }
    Ok(TrialResult::ok(worst))
}

fn trial_appendix_c(seed: u64, _cfg: &ClaimConfig) -> Result<TrialResult> {
    let inst = random_pd_instance(2, 2, 2, derive_seed(seed, 15))?;
    // Fixed random swivel point.
    let (out_group, in_group) = swivel::swivel_groups(&inst, false);
    let point = random_point(&out_group, &in_group, derive_seed(seed, 16))?;
    let f1 = swivel::f_at_one(&inst, &point)?;
    let mut worst = f64::NEG_INFINITY;
    for sign in [1.0, -1.0] {
        let e1 = (swivel::objective_f(&inst, 1.0 + sign * 1e-2, &point)? - f1).abs();
        let e2 = (swivel::objective_f(&inst, 1.0 + sign * 1e-3, &point)? - f1).abs();
        if e1 > 1e-9 {
            let ratio = e2 / e1;
            worst = worst.max(ratio - 0.2).max(0.05 - ratio);
        } else {
            worst = worst.max(e2 - 1e-8);
        }
    }
    Ok(TrialResult::ok(worst))
}

fn random_point(
    out_group: &SwivelGroup,
    in_group: &SwivelGroup,
    seed: u64,
) -> Result<SwivelPoint> {
    let mut rng = crate::states::seeded_rng(seed);
    let p_out = out_group.random_params(&mut rng);
    let p_in = in_group.random_params(&mut rng);
    let mut params = p_out.clone();
    params.extend(p_in.iter());
    Ok(SwivelPoint {
        v_out: out_group.point_member(&p_out)?,
        v_in: in_group.point_member(&p_in)?,
        params,
    })
}

// ---------------------------------------------------------------------------
// Scalar joint-distribution oracles. Pure f64 sums over classical indices,
// independent of the operator machinery they check.

pub mod oracle {
    /// Push a distribution through a column-stochastic kernel t[j][i] = T(j|i).
    pub fn push(t: &[Vec<f64>], p: &[f64]) -> Vec<f64> {
        (0..t.len()).map(|j| (0..p.len()).map(|i| t[j][i] * p[i]).sum()).collect()
    }

    /// Δ_α for diagonal (ρ, σ, classical channel); swivels are vacuous here.
    pub fn delta_alpha(p: &[f64], s: &[f64], t: &[Vec<f64>], alpha: f64) -> f64 {
        let q = push(t, p);
        let r = push(t, s);
        let mut total = 0.0;
        for i in 0..p.len() {
            for j in 0..q.len() {
                if t[j][i] == 0.0 {
                    continue;
                }
                total += p[i].powf(alpha)
                    * s[i].powf(1.0 - alpha)
                    * t[j][i]
                    * q[j].powf(1.0 - alpha)
                    * r[j].powf(alpha - 1.0);
            }
        }
        total.ln() / (alpha - 1.0)
    }

    /// Δ̃_α for the same diagonal data.
    pub fn delta_tilde_alpha(p: &[f64], s: &[f64], t: &[Vec<f64>], alpha: f64) -> f64 {
        let ap = (alpha - 1.0) / alpha;
        let q = push(t, p);
        let r = push(t, s);
        let mut total = 0.0;
        for i in 0..p.len() {
            let inner: f64 = (0..q.len())
                .map(|j| t[j][i] * q[j].powf(-ap) * r[j].powf(ap))
                .sum();
            total += (p[i] * s[i].powf(-ap) * inner).powf(alpha);
        }
        total.ln() / (alpha - 1.0)
    }

    /// The §7 trace quantity for diagonal data.
    pub fn trace_quantity(s: &[f64], t: &[Vec<f64>], p_dist: &[f64], p: f64) -> f64 {
        let q = push(t, p_dist);
        let r = push(t, s);
        let mut total = 0.0;
        for i in 0..s.len() {
            let inner: f64 = (0..q.len())
                .map(|j| t[j][i] * q[j].powf(2.0 / p) * r[j].powf(-2.0 / p))
                .sum();
            total += (s[i].powf(2.0 / p) * inner).powf(p / 2.0);
        }
        total
    }

    fn marginal(p: &[f64], dims: [usize; 3], keep_a: bool, keep_b: bool, keep_c: bool) -> Vec<f64> {
        let [da, db, dc] = dims;
        let sa = if keep_a { da } else { 1 };
        let sb = if keep_b { db } else { 1 };
        let sc = if keep_c { dc } else { 1 };
        let mut out = vec![0.0; sa * sb * sc];
        for a in 0..da {
            for b in 0..db {
                for c in 0..dc {
                    let ia = if keep_a { a } else { 0 };
                    let ib = if keep_b { b } else { 0 };
                    let ic = if keep_c { c } else { 0 };
                    out[(ia * sb + ib) * sc + ic] += p[(a * db + b) * dc + c];
                }
            }
        }
        out
    }

    /// Classical I(A;B|C).
    pub fn cmi(p: &[f64], dims: [usize; 3]) -> f64 {
        let [da, db, dc] = dims;
        let pac = marginal(p, dims, true, false, true);
        let pbc = marginal(p, dims, false, true, true);
        let pc = marginal(p, dims, false, false, true);
        let mut total = 0.0;
        for a in 0..da {
            for b in 0..db {
                for c in 0..dc {
                    let pabc = p[(a * db + b) * dc + c];
                    if pabc <= 0.0 {
                        continue;
                    }
                    total += pabc * (pabc * pc[c] / (pac[a * dc + c] * pbc[b * dc + c])).ln();
                }
            }
        }
        total
    }

    /// Classical Rényi CMI: both swiveled families reduce to this for
    /// diagonal states.
    pub fn cmi_alpha(p: &[f64], dims: [usize; 3], alpha: f64) -> f64 {
        let [da, db, dc] = dims;
        let pac = marginal(p, dims, true, false, true);
        let pbc = marginal(p, dims, false, true, true);
        let pc = marginal(p, dims, false, false, true);
        let mut total = 0.0;
        for a in 0..da {
            for b in 0..db {
                for c in 0..dc {
                    let pabc = p[(a * db + b) * dc + c];
                    if pabc <= 0.0 {
                        continue;
                    }
                    total += pabc.powf(alpha)
                        * pac[a * dc + c].powf(1.0 - alpha)
                        * pc[c].powf(alpha - 1.0)
                        * pbc[b * dc + c].powf(1.0 - alpha);
                }
            }
        }
        total.ln() / (alpha - 1.0)
    }

    /// Classical L′_α for a diagonal state and subset masks with ±1 coeffs.
    pub fn l_alpha(
        p: &[f64],
        dims: &[usize],
        subsets: &[(u32, i8)],
        alpha: f64,
    ) -> f64 {
        let total_dim: usize = dims.iter().product();
        let digits = |mut x: usize| -> Vec<usize> {
            let mut d = vec![0; dims.len()];
            for k in (0..dims.len()).rev() {
                d[k] = x % dims[k];
                x /= dims[k];
            }
            d
        };
        // Marginal probability of the subset cells.
        let sub_prob = |mask: u32, x: &[usize]| -> f64 {
            let mut acc = 0.0;
            for y in 0..total_dim {
                let dy = digits(y);
                if (0..dims.len()).all(|k| mask & (1 << k) == 0 || dy[k] == x[k]) {
                    acc += p[y];
                }
            }
            acc
        };
        let mut total = 0.0;
        for x in 0..total_dim {
            let dx = digits(x);
            if p[x] <= 0.0 {
                continue;
            }
            let mut term = p[x].powf(alpha);
            for &(mask, a) in subsets {
                term *= sub_prob(mask, &dx).powf(-f64::from(a) * (alpha - 1.0));
            }
            total += term;
        }
        total.ln() / (alpha - 1.0)
    }
}

fn trial_oracle_equivalence(seed: u64, cfg: &ClaimConfig) -> Result<TrialResult> {
    let mut worst = f64::NEG_INFINITY;

    // Classical instance: every swiveled quantity vs the scalar oracle.
    let (inst, p, s, t) = random_classical_instance(3, 3, derive_seed(seed, 17))?;
    for &alpha in &[0.3, 0.7, 1.5, 2.0] {
        let lhs = swivel::delta_prime(&inst, alpha, &cfg.budget)?.value;
        worst = worst.max((lhs - oracle::delta_alpha(&p, &s, &t, alpha)).abs());
        let un = swivel::delta_alpha_unswiveled(&inst, alpha)?;
        worst = worst.max((un - oracle::delta_alpha(&p, &s, &t, alpha)).abs());
    }
    for &alpha in &[0.6, 2.0, 8.0] {
        let lhs = swivel::delta_tilde_prime(&inst, alpha, &cfg.budget)?.value;
        worst = worst.max((lhs - oracle::delta_tilde_alpha(&p, &s, &t, alpha)).abs());
    }
    for &pp in &[2.0, 3.0, 8.0] {
        let lhs = combos::trace_quantity(&inst, pp, &cfg.budget)?.value;
        worst = worst.max((lhs - oracle::trace_quantity(&s, &t, &p, pp)).abs());
    }

    // Classical tripartite state: swiveled CMI families vs the scalar CMI.
    let (state, pabc) = TripartiteState::random_classical([2, 2, 2], derive_seed(seed, 18))?;
    for &alpha in &[0.5, 2.0] {
        let lhs = recovery::cmi_prime(&state, alpha, &cfg.budget)?.value;
        worst = worst.max((lhs - oracle::cmi_alpha(&pabc, [2, 2, 2], alpha)).abs());
        let lhs_t = recovery::cmi_tilde_prime(&state, alpha, &cfg.budget)?.value;
        worst = worst.max((lhs_t - oracle::cmi_alpha(&pabc, [2, 2, 2], alpha)).abs());
    }

    // Classical combo (conditional entropy on two systems).
    let combo = conditional_entropy_combo();
    let (cstate, pab) = classical_bipartite(derive_seed(seed, 19))?;
    let nc = combos::normalize_combo(&combo, &cstate, 1e-6)?.with_seed(seed);
    for &alpha in &[0.5, 1.5] {
        let lhs = combos::l_prime(&nc, alpha, &cfg.budget)?.value;
        let rhs = oracle::l_alpha(&pab, &[2, 2], &[(0b01, 1)], alpha);
        worst = worst.max((lhs - rhs).abs());
    }

    Ok(TrialResult::ok(worst))
}

/// {AB: −1, A: +1}: L = H(A) − H(AB) = −H(B|A).
fn conditional_entropy_combo() -> EntropyCombo {
    let systems = vec![("A".to_string(), 2), ("B".to_string(), 2)];
    let mut coeffs = std::collections::BTreeMap::new();
    coeffs.insert(0b11u32, -1i8);
    coeffs.insert(0b01u32, 1i8);
    EntropyCombo::new(systems, coeffs, vec![0b01]).expect("valid combo")
}

fn classical_bipartite(seed: u64) -> Result<(DensityOperator, Vec<f64>)> {
    let mut rng = crate::states::seeded_rng(seed);
    use rand_chacha::rand_core::RngCore;
    let mut p: Vec<f64> = (0..4)
        .map(|_| (((rng.next_u64() >> 11) + 1) as f64) * (1.0 / 9007199254740992.0) + 0.1)
        .collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    Ok((DensityOperator::new(crate::linalg::ComplexMatrix::diag(&p))?, p))
}

/// The optimizer against the exhaustive qubit phase-grid oracle (1e-3 rad).
/// Run as part of oracle-equivalence but only on the first few seeds: the
/// grid has ~4e7 points per family.
pub fn optimizer_vs_grid_oracle(seed: u64, budget: &Budget) -> Result<f64> {
    let inst = qubit_instance(seed)?;
    let mut worst = f64::NEG_INFINITY;
    for &(family, x) in
        &[(ChainFamily::F, 0.5), (ChainFamily::F, 1.7), (ChainFamily::G, 0.75)]
    {
        let opt = swivel::maximize_norm(&inst, x, family, budget)?;
        let grid = swivel::phase_grid_oracle(&inst, x, family, 1e-3)?;
        worst = worst.max((opt.value - grid).abs());
    }
    Ok(worst)
}

fn trial_combos(seed: u64, cfg: &ClaimConfig) -> Result<TrialResult> {
    let mut worst = f64::NEG_INFINITY;

    // Mutual information on two qubits: {AB:−1, A:+1, B:+1}.
    let systems = vec![("A".to_string(), 2), ("B".to_string(), 2)];
    let mut coeffs = std::collections::BTreeMap::new();
    coeffs.insert(0b11u32, -1i8);
    coeffs.insert(0b01u32, 1i8);
    coeffs.insert(0b10u32, 1i8);
    let mi = EntropyCombo::new(systems, coeffs, vec![0b01, 0b10])?;
    let state = crate::states::random_density(4, 4, derive_seed(seed, 20))?;
    worst = worst.max(combo_ordering_violation(&mi, &state, seed, cfg)?);

    // Conditional entropy {AB:−1, A:+1}.
    let ce = conditional_entropy_combo();
    let state2 = crate::states::random_density(4, 4, derive_seed(seed, 21))?;
    worst = worst.max(combo_ordering_violation(&ce, &state2, seed, cfg)?);

    // Three systems, one marginal: {ABC:−1, AB:+1}.
    let systems3 = vec![
        ("A".to_string(), 2),
        ("B".to_string(), 2),
        ("C".to_string(), 2),
    ];
    let mut coeffs3 = std::collections::BTreeMap::new();
    coeffs3.insert(0b111u32, -1i8);
    coeffs3.insert(0b011u32, 1i8);
    let three = EntropyCombo::new(systems3, coeffs3, vec![0b011])?;
    let state3 = crate::states::random_density(8, 8, derive_seed(seed, 22))?;
    worst = worst.max(combo_ordering_violation(&three, &state3, seed, cfg)?);

    Ok(TrialResult::ok(worst))
}

fn combo_ordering_violation(
    combo: &EntropyCombo,
    state: &DensityOperator,
    seed: u64,
    cfg: &ClaimConfig,
) -> Result<f64> {
    let nc = combos::normalize_combo(combo, state, 1e-6)?.with_seed(seed);
    let l = combos::l_value(&nc)?;
    let l0 = combos::l_prime(&nc, 0.0, &cfg.budget)?;
    let l2 = combos::l_prime(&nc, 2.0, &cfg.budget)?;
    let lt_half = combos::l_tilde_prime(&nc, 0.5, &cfg.budget)?;
    let lt_inf = combos::l_tilde_prime(&nc, f64::INFINITY, &cfg.budget)?;
    for v in [&l0, &l2, &lt_half, &lt_inf] {
        if !v.certified {
            return Err(Error::InvalidInput("expected certified combo optimum".into()));
        }
    }
    let mut worst = f64::NEG_INFINITY;
    worst = worst.max(l0.value - l);
    worst = worst.max(l - l2.value);
    worst = worst.max(lt_half.value - l);
    worst = worst.max(l - lt_inf.value);
    // Dual-path agreement is asserted inside l_value at 1e-8; reaching this
    // point means it held.
    Ok(worst)
}
