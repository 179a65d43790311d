//! Tripartite states, conditional mutual information and its swiveled Rényi
//! variants (through the (ρ_ABC, ρ_AC⊗I_B, Tr_A) specialization), and the
//! Petz / rotated / swiveled recovery maps with their inequality reports.

use crate::entropy::{self, vn_entropy_op};
use crate::error::{Error, Result};
use crate::linalg::{embed_operator, partial_trace, ComplexMatrix, HermitianOperator};
use crate::states::{
    derive_seed, random_density, seeded_rng, DensityOperator, EmbeddedBase, Instance,
    PositiveOperator, QuantumChannel, SwivelRestriction,
};
use crate::swivel::{self, Budget, SwivelPoint, SwiveledValue};

/// Density operator on A⊗B⊗C with all marginals cached at construction.
#[derive(Clone, Debug)]
pub struct TripartiteState {
    state: DensityOperator,
    dims: [usize; 3],
    rho_ab: HermitianOperator,
    rho_ac: HermitianOperator,
    rho_bc: HermitianOperator,
    rho_a: HermitianOperator,
    rho_b: HermitianOperator,
    rho_c: HermitianOperator,
    seed: Option<u64>,
}

impl TripartiteState {
    pub fn new(state: DensityOperator, dims: [usize; 3], seed: Option<u64>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if state.dim() != total {
            return Err(Error::DimensionMismatch(format!(
                "state dim {} does not match dims {:?}",
                state.dim(),
                dims
            )));
        }
        let d = &dims[..];
        let m = state.matrix();
        let rho_ab = HermitianOperator::new(partial_trace(m, d, &[2])?)?;
        let rho_ac = HermitianOperator::new(partial_trace(m, d, &[1])?)?;
        let rho_bc = HermitianOperator::new(partial_trace(m, d, &[0])?)?;
        let rho_a = HermitianOperator::new(partial_trace(m, d, &[1, 2])?)?;
        let rho_b = HermitianOperator::new(partial_trace(m, d, &[0, 2])?)?;
        let rho_c = HermitianOperator::new(partial_trace(m, d, &[0, 1])?)?;
        Ok(Self { state, dims, rho_ab, rho_ac, rho_bc, rho_a, rho_b, rho_c, seed })
    }

    pub fn random(dims: [usize; 3], rank: usize, seed: u64) -> Result<Self> {
        let total: usize = dims.iter().product();
        let state = random_density(total, rank, derive_seed(seed, 21))?;
        Self::new(state, dims, Some(seed))
    }

    pub fn random_pd(dims: [usize; 3], seed: u64) -> Result<Self> {
        let total: usize = dims.iter().product();
        Self::random(dims, total, seed)
    }

    /// Classical state: diagonal embedding of a strictly positive p(a,b,c).
    pub fn classical(dims: [usize; 3], p: &[f64], seed: Option<u64>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if p.len() != total {
            return Err(Error::DimensionMismatch("distribution length".into()));
        }
        let state = DensityOperator::new(ComplexMatrix::diag(p))?;
        Self::new(state, dims, seed)
    }

    pub fn random_classical(dims: [usize; 3], seed: u64) -> Result<(Self, Vec<f64>)> {
        let total: usize = dims.iter().product();
        let mut rng = seeded_rng(derive_seed(seed, 23));
        let mut p: Vec<f64> = (0..total)
            .map(|_| {
                use rand_chacha::rand_core::RngCore;
                (((rng.next_u64() >> 11) + 1) as f64) * (1.0 / 9007199254740992.0) + 0.05
            })
            .collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        Ok((Self::classical(dims, &p, Some(seed))?, p))
    }

    /// Classical short Markov chain A — C — B: p(a,b,c) = p(c) p(a|c) p(b|c),
    /// so I(A;B|C) = 0 exactly and the Petz map recovers the state.
    pub fn classical_markov(dims: [usize; 3], seed: u64) -> Result<Self> {
        let [da, db, dc] = dims;
        let mut rng = seeded_rng(derive_seed(seed, 29));
        let mut draw = |n: usize| -> Vec<f64> {
            use rand_chacha::rand_core::RngCore;
            let mut v: Vec<f64> = (0..n)
                .map(|_| {
                    (((rng.next_u64() >> 11) + 1) as f64) * (1.0 / 9007199254740992.0) + 0.1
                })
                .collect();
            let s: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= s);
            v
        };
        let pc = draw(dc);
        let pa_given: Vec<Vec<f64>> = (0..dc).map(|_| draw(da)).collect();
        let pb_given: Vec<Vec<f64>> = (0..dc).map(|_| draw(db)).collect();
        let mut p = vec![0.0f64; da * db * dc];
        for a in 0..da {
            for b in 0..db {
                for c in 0..dc {
                    p[(a * db + b) * dc + c] = pc[c] * pa_given[c][a] * pb_given[c][b];
                }
            }
        }
        Self::classical(dims, &p, Some(seed))
    }

    /// Quantum short Markov chain: ρ_ABC = Σ_c p_c ρ_A^{(c)} ⊗ ρ_B^{(c)} ⊗ |c⟩⟨c|.
    pub fn quantum_markov(dims: [usize; 3], seed: u64) -> Result<Self> {
        let [da, db, dc] = dims;
        let mut rng = seeded_rng(derive_seed(seed, 31));
        let mut pc: Vec<f64> = (0..dc)
            .map(|i| {
                use rand_chacha::rand_core::RngCore;
                (((rng.next_u64() >> 11) + 1) as f64) * (1.0 / 9007199254740992.0)
                    + 0.2
                    + 0.13 * i as f64
            })
            .collect();
        let s: f64 = pc.iter().sum();
        pc.iter_mut().for_each(|x| *x /= s);

        let total = da * db * dc;
        let mut mat = ComplexMatrix::zeros(total, total);
        for c in 0..dc {
            let rho_a = random_density(da, da, derive_seed(seed, 100 + c as u64))?;
            let rho_b = random_density(db, db, derive_seed(seed, 200 + c as u64))?;
            let block = rho_a.matrix().kron(rho_b.matrix());
            for i in 0..da * db {
                for j in 0..da * db {
                    let (ia, ib) = (i / db, i % db);
                    let (ja, jb) = (j / db, j % db);
                    let row = (ia * db + ib) * dc + c;
                    let col = (ja * db + jb) * dc + c;
                    mat[(row, col)] = block[(i, j)] * pc[c];
                }
            }
        }
        let state = DensityOperator::new(mat)?;
        Self::new(state, dims, Some(seed))
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn rho_ab(&self) -> &HermitianOperator {
        &self.rho_ab
    }

    pub fn rho_ac(&self) -> &HermitianOperator {
        &self.rho_ac
    }

    pub fn rho_bc(&self) -> &HermitianOperator {
        &self.rho_bc
    }

    pub fn rho_a(&self) -> &HermitianOperator {
        &self.rho_a
    }

    pub fn rho_b(&self) -> &HermitianOperator {
        &self.rho_b
    }

    pub fn rho_c(&self) -> &HermitianOperator {
        &self.rho_c
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Exchange the roles of A and B (the swiveled quantities are not
    /// symmetric in A and B, so this re-invokes rather than symmetrizes).
    pub fn swap_ab(&self) -> Result<Self> {
        let [da, db, dc] = self.dims;
        let total = da * db * dc;
        let m = self.state.matrix();
        let mut out = ComplexMatrix::zeros(total, total);
        let reindex = |a: usize, b: usize, c: usize| (b * da + a) * dc + c;
        for a in 0..da {
            for b in 0..db {
                for c in 0..dc {
                    for a2 in 0..da {
                        for b2 in 0..db {
                            for c2 in 0..dc {
                                out[(reindex(a, b, c), reindex(a2, b2, c2))] =
                                    m[((a * db + b) * dc + c, (a2 * db + b2) * dc + c2)];
                            }
                        }
                    }
                }
            }
        }
        Self::new(DensityOperator::new(out)?, [db, da, dc], self.seed)
    }

    /// Push a channel through the B system.
    pub fn apply_channel_on_b(&self, channel: &QuantumChannel) -> Result<Self> {
        let [da, db, dc] = self.dims;
        if channel.dim_in() != db || channel.dim_out() != db {
            return Err(Error::DimensionMismatch(
                "B-system channel must have matching input/output dims".into(),
            ));
        }
        let mut out = ComplexMatrix::zeros(self.state.dim(), self.state.dim());
        for k in channel.kraus() {
            let lifted = embed_operator(k, &[da, db, dc], &[1])?;
            out = out.add(&lifted.mul(self.state.matrix()).mul(&lifted.adjoint()));
        }
        Self::new(DensityOperator::new(out)?, self.dims, self.seed)
    }

    /// The (ρ_ABC, ρ_AC ⊗ I_B, Tr_A) instance with swivels restricted to the
    /// commutants of ρ_C and ρ_AC.
    pub fn cmi_instance(&self) -> Result<Instance> {
        let [da, db, dc] = self.dims;
        let sigma_mat = embed_operator(self.rho_ac.matrix(), &[da, db, dc], &[0, 2])?;
        let sigma = PositiveOperator::new(sigma_mat)?;
        let channel = QuantumChannel::trace_out_first(da, db * dc);
        let restriction = SwivelRestriction {
            input: EmbeddedBase {
                base: self.rho_ac.clone(),
                full_dims: vec![da, db, dc],
                systems: vec![0, 2],
            },
            output: EmbeddedBase {
                base: self.rho_c.clone(),
                full_dims: vec![db, dc],
                systems: vec![1],
            },
        };
        Instance::with_restriction(
            self.state.clone(),
            sigma,
            channel,
            self.seed,
            Some(restriction),
        )
    }
}

/// I(A;B|C) = H(AC) + H(BC) − H(C) − H(ABC).
pub fn cmi(state: &TripartiteState) -> f64 {
    vn_entropy_op(state.rho_ac()) + vn_entropy_op(state.rho_bc())
        - vn_entropy_op(state.rho_c())
        - vn_entropy_op(state.state().op())
}

/// Swiveled Rényi conditional mutual information I′_α.
pub fn cmi_prime(state: &TripartiteState, alpha: f64, budget: &Budget) -> Result<SwiveledValue> {
    let inst = state.cmi_instance()?;
    swivel::delta_prime(&inst, alpha, budget)
}

/// Sandwiched swiveled Rényi conditional mutual information Ĩ′_α.
pub fn cmi_tilde_prime(
    state: &TripartiteState,
    alpha: f64,
    budget: &Budget,
) -> Result<SwiveledValue> {
    let inst = state.cmi_instance()?;
    swivel::delta_tilde_prime(&inst, alpha, budget)
}

// ---------------------------------------------------------------------------
// Recovery maps.

#[derive(Clone, Debug)]
pub enum RecoveryKind {
    Petz,
    Rotated(f64),
    Swiveled(SwivelPoint),
}

/// A realized recovery map: completely positive and trace non-increasing,
/// stored in Kraus form. Recovers σ from N(σ) exactly on supp σ.
#[derive(Clone, Debug)]
pub struct RecoveryMap {
    pub kind: RecoveryKind,
    kraus: Vec<ComplexMatrix>,
}

impl RecoveryMap {
    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d_in = self.kraus[0].cols();
        if x.rows() != d_in || x.cols() != d_in {
            return Err(Error::DimensionMismatch("recovery map input dim".into()));
        }
        let d_out = self.kraus[0].rows();
        let mut out = ComplexMatrix::zeros(d_out, d_out);
        for k in &self.kraus {
            out = out.add(&k.mul(x).mul(&k.adjoint()));
        }
        Ok(out)
    }

    pub fn apply_herm(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        HermitianOperator::new(self.apply(x.matrix())?)
    }

    /// Choi matrix of the realized map (PSD for a CP map).
    pub fn choi(&self) -> ComplexMatrix {
        let d = self.kraus[0].cols();
        let m = self.kraus[0].rows();
        let mut choi = ComplexMatrix::zeros(d * m, d * m);
        for k in &self.kraus {
            for i in 0..d {
                for j in 0..d {
                    for o in 0..m {
                        for op in 0..m {
                            choi[(i * m + o, j * m + op)] += k[(o, i)] * k[(op, j)].conj();
                        }
                    }
                }
            }
        }
        choi
    }
}

/// P_{σ,N}(·) = σ^{1/2} N†( N(σ)^{−1/2} (·) N(σ)^{−1/2} ) σ^{1/2}, with the
/// rotated variant conjugating by ω^{it} sandwiches and the swiveled variant
/// by commutant unitaries.
pub fn build_recovery(
    kind: RecoveryKind,
    sigma: &PositiveOperator,
    channel: &QuantumChannel,
) -> Result<RecoveryMap> {
    let n_sigma = channel.apply_herm(sigma.op())?;
    if n_sigma.max_eigenvalue() <= 0.0 {
        return Err(Error::InvalidInput("N(sigma) vanishes".into()));
    }
    let sigma_half = sigma.op().power(0.5)?;
    let n_sigma_inv_half = n_sigma.power(-0.5)?;

    // Base Petz Kraus: σ^{1/2} K† N(σ)^{−1/2}.
    let base: Vec<ComplexMatrix> = channel
        .kraus()
        .iter()
        .map(|k| sigma_half.matrix().mul(&k.adjoint()).mul(n_sigma_inv_half.matrix()))
        .collect();

    let kraus = match &kind {
        RecoveryKind::Petz => base,
        RecoveryKind::Rotated(t) => {
            let pre = n_sigma.power_it(-t)?;
            let post = sigma.op().power_it(*t)?;
            base.iter().map(|k| post.mul(k).mul(&pre)).collect()
        }
        RecoveryKind::Swiveled(point) => {
            base.iter().map(|k| point.v_in.mul(k).mul(&point.v_out)).collect()
        }
    };
    Ok(RecoveryMap { kind, kraus })
}

// ---------------------------------------------------------------------------
// Inequality reports.

/// One rotated-Petz grid sample.
#[derive(Clone, Copy, Debug)]
pub struct RotatedSample {
    pub t: f64,
    pub d0: f64,
    pub d2: f64,
}

/// Lower and upper recovery bounds on Δ, plus the rotated-Petz curves.
#[derive(Clone, Debug)]
pub struct RecoveryReport {
    pub delta: f64,
    /// −log max_{V,W} F(ρ, R^{V,W}(N(ρ))) = Δ̃′_{1/2}.
    pub fidelity_lower: f64,
    /// min_{V,W} D_0(ρ‖R^{V,W}(N(ρ))) = Δ′_0.
    pub d0_lower: f64,
    /// max_{V,W} D_max = Δ̃′_∞ (unitary-dilation instances only).
    pub dmax_upper: Option<f64>,
    /// max_{V,W} D_2 = Δ′_2 (unitary-dilation instances only).
    pub d2_upper: Option<f64>,
    pub rotated: Vec<RotatedSample>,
    pub certified: bool,
}

/// All recovery-type bounds for one instance. Upper bounds need the
/// unitary-dilation structure with positive definite operators; pass
/// `require_upper` to turn a non-qualifying instance into an error instead
/// of a report without them.
pub fn recovery_bounds(
    inst: &Instance,
    t_grid: &[f64],
    budget: &Budget,
    require_upper: bool,
) -> Result<RecoveryReport> {
    if !inst.support_ok() {
        return Err(Error::SupportViolation);
    }
    let delta = entropy::delta(inst)?;
    let fid = swivel::delta_tilde_prime(inst, 0.5, budget)?;
    let d0v = swivel::delta_prime(inst, 0.0, budget)?;

    let qualifies = inst.channel().has_unitary_dilation() && inst.pd_flags().all();
    if require_upper && !qualifies {
        return Err(Error::StructureRequired(
            "upper bounds need a unitary dilation and positive definite operators".into(),
        ));
    }
    let (dmax_upper, d2_upper, upper_certified) = if qualifies {
        let dmax = swivel::delta_tilde_prime(inst, f64::INFINITY, budget)?;
        let d2v = swivel::delta_prime(inst, 2.0, budget)?;
        let cert = dmax.certified && d2v.certified;
        (Some(dmax.value), Some(d2v.value), cert)
    } else {
        (None, None, true)
    };

    let mut rotated = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let map = build_recovery(RecoveryKind::Rotated(t), inst.sigma(), inst.channel())?;
        let omega = map.apply_herm(inst.n_rho())?;
        rotated.push(RotatedSample {
            t,
            d0: entropy::d0_ops(inst.rho().op(), &omega),
            d2: entropy::d2_ops(inst.rho().op(), &omega),
        });
    }

    Ok(RecoveryReport {
        delta,
        fidelity_lower: fid.value,
        d0_lower: d0v.value,
        dmax_upper,
        d2_upper,
        rotated,
        certified: fid.certified && d0v.certified && upper_certified,
    })
}

/// Strong-subadditivity refinement report for a tripartite state: recovery
/// bounds sandwiching I(A;B|C) through the swiveled Petz map C → AC.
#[derive(Clone, Debug)]
pub struct SsaReport {
    pub cmi: f64,
    pub fidelity_lower: f64,
    pub d0_lower: f64,
    pub dmax_upper: Option<f64>,
    pub d2_upper: Option<f64>,
}

pub fn ssa_refinement(state: &TripartiteState, budget: &Budget) -> Result<SsaReport> {
    let inst = state.cmi_instance()?;
    if !inst.support_ok() {
        return Err(Error::SupportViolation);
    }
    let fid = swivel::delta_tilde_prime(&inst, 0.5, budget)?;
    let d0v = swivel::delta_prime(&inst, 0.0, budget)?;
    let pd = inst.pd_flags().all();
    let (dmax_upper, d2_upper) = if pd {
        (
            Some(swivel::delta_tilde_prime(&inst, f64::INFINITY, budget)?.value),
            Some(swivel::delta_prime(&inst, 2.0, budget)?.value),
        )
    } else {
        (None, None)
    };
    Ok(SsaReport {
        cmi: cmi(state),
        fidelity_lower: fid.value,
        d0_lower: d0v.value,
        dmax_upper,
        d2_upper,
    })
}
