//! Objectives the swivel optimizer maximizes: log-Schatten-norms of operator
//! chains with swivel slots, and the α = 1 boundary function f(1, V, W).
//!
//! Torus commutants admit two fast representations. Any chain collapses to
//! T(θ) = Σ_κ z_κ T_κ over phase products z_κ, and for the 2-norm the squared
//! norm is the Hermitian form z†Gz of the Gram matrix of the T_κ — quadratic
//! in each phase, with an exact per-angle maximum.

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::{schatten, ComplexMatrix};
use crate::swivel::groups::SwivelGroup;

type C64 = Complex64;

/// Operator chain S_0 · V_1 · S_1 · … · V_G · S_G with a Schatten order.
pub(crate) struct NormChain {
    pub segments: Vec<ComplexMatrix>,
    pub groups: Vec<SwivelGroup>,
    /// Schatten order of the norm (2, 2α, p, or ∞).
    pub p: f64,
}

impl NormChain {
    pub fn eval_with_members(&self, vs: &[ComplexMatrix]) -> f64 {
        debug_assert_eq!(vs.len(), self.groups.len());
        let mut m = self.segments[0].clone();
        for (v, seg) in vs.iter().zip(self.segments.iter().skip(1)) {
            m = m.mul(v).mul(seg);
        }
        ln_schatten(&m, self.p)
    }
}

pub(crate) fn ln_schatten(m: &ComplexMatrix, p: f64) -> f64 {
    let norm = schatten(m, p).expect("valid Schatten order");
    if norm <= 0.0 {
        f64::NEG_INFINITY
    } else {
        norm.ln()
    }
}

/// Phase products z_κ and the chain terms T_κ for all-torus groups:
/// T(θ) = Σ_κ z_κ T_κ with κ running over one block index per group.
pub(crate) struct TorusTerms {
    pub group_sizes: Vec<usize>,
    /// Row-major over the multi-index κ (last group fastest).
    pub terms: Vec<ComplexMatrix>,
    pub p: f64,
}

impl TorusTerms {
    /// Multi-index strides, last group fastest.
    pub fn strides(group_sizes: &[usize]) -> Vec<usize> {
        let mut strides = vec![1usize; group_sizes.len()];
        for g in (0..group_sizes.len().saturating_sub(1)).rev() {
            strides[g] = strides[g + 1] * group_sizes[g + 1];
        }
        strides
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// z_κ = Π_g e^{iθ^g_{κ_g}} for the stacked angle vector.
    pub fn phases(&self, angles: &[Vec<f64>]) -> Vec<C64> {
        let strides = Self::strides(&self.group_sizes);
        let k_total: usize = self.group_sizes.iter().product();
        let mut z = vec![C64::new(1.0, 0.0); k_total];
        for (kappa, zk) in z.iter_mut().enumerate() {
            let mut phase = 0.0;
            for (g, stride) in strides.iter().enumerate() {
                let idx = (kappa / stride) % self.group_sizes[g];
                phase += angles[g][idx];
            }
            *zk = C64::from_polar(1.0, phase);
        }
        z
    }

    pub fn eval(&self, z: &[C64]) -> f64 {
        let (rows, cols) = (self.terms[0].rows(), self.terms[0].cols());
        let mut m = ComplexMatrix::zeros(rows, cols);
        for (zk, t) in z.iter().zip(self.terms.iter()) {
            m.axpy(*zk, t);
        }
        ln_schatten(&m, self.p)
    }
}

/// E(θ) = const + Σ_{a,b} conj(z_a) G[a,b] z_b with G Hermitian; covers both
/// ‖T(θ)‖_2² (Gram of the chain terms) and f(1, ·, ·) on torus commutants.
pub(crate) struct PhaseQuadratic {
    pub group_sizes: Vec<usize>,
    /// K×K Hermitian, row-major: gram[a*K + b] = G[a,b].
    pub gram: Vec<C64>,
    pub constant: f64,
}

impl PhaseQuadratic {
    pub fn k_total(&self) -> usize {
        self.group_sizes.iter().product()
    }

    pub fn eval(&self, z: &[C64]) -> f64 {
        let k = z.len();
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..k {
            let za = z[a].conj();
            let row = a * k;
            for (b, zb) in z.iter().enumerate() {
                acc += za * self.gram[row + b] * zb;
            }
        }
        self.constant + acc.re
    }

    /// Block index of multi-index `kappa` within group `g`.
    pub fn block_of(&self, kappa: usize, g: usize, strides: &[usize]) -> usize {
        (kappa / strides[g]) % self.group_sizes[g]
    }

    /// Exact maximization over one angle (group g, block t), all others
    /// fixed. Returns the new value; `z` and `angles` are updated in place.
    pub fn coord_max(
        &self,
        z: &mut [C64],
        angles: &mut [Vec<f64>],
        g: usize,
        t: usize,
        strides: &[usize],
        current: f64,
    ) -> f64 {
        let k = z.len();
        // S = Σ_{a∈Mt, b∉Mt} conj(z_a) G[a,b] z_b ; E(δ) = A + 2Re(e^{−iδ}S).
        let mut s = C64::new(0.0, 0.0);
        for a in 0..k {
            if self.block_of(a, g, strides) != t {
                continue;
            }
            let za = z[a].conj();
            let row = a * k;
            for (b, zb) in z.iter().enumerate() {
                if self.block_of(b, g, strides) == t {
                    continue;
                }
                s += za * self.gram[row + b] * zb;
            }
        }
        let delta = s.arg();
        let new_value = current - 2.0 * s.re + 2.0 * s.norm();
        angles[g][t] += delta;
        let rot = C64::from_polar(1.0, delta);
        for (a, za) in z.iter_mut().enumerate() {
            if self.block_of(a, g, strides) == t {
                *za *= rot;
            }
        }
        new_value
    }

    pub fn phases(&self, angles: &[Vec<f64>]) -> Vec<C64> {
        let strides = TorusTerms::strides(&self.group_sizes);
        let k_total = self.k_total();
        let mut z = vec![C64::new(1.0, 0.0); k_total];
        for (kappa, zk) in z.iter_mut().enumerate() {
            let mut phase = 0.0;
            for (g, stride) in strides.iter().enumerate() {
                let idx = (kappa / stride) % self.group_sizes[g];
                phase += angles[g][idx];
            }
            *zk = C64::from_polar(1.0, phase);
        }
        z
    }
}

/// What the optimizer drives. `eval` is the quantity to maximize; the two
/// optional fast forms are available when every group is a torus.
pub(crate) trait SwivelObjective {
    fn groups(&self) -> &[SwivelGroup];
    /// Evaluate at explicit (lifted) members.
    fn eval_members(&self, vs: &[ComplexMatrix]) -> f64;
    fn eval_params(&self, params: &[f64]) -> Result<f64> {
        let mut vs = Vec::with_capacity(self.groups().len());
        let mut offset = 0usize;
        for grp in self.groups() {
            let len = grp.params_len();
            vs.push(grp.member(&params[offset..offset + len])?);
            offset += len;
        }
        Ok(self.eval_members(&vs))
    }
    /// Quadratic phase form, when it exists (torus groups; 2-norm or f(1,·)).
    /// The optimizer maximizes the form and converts back with `quad_to_value`.
    fn phase_quadratic(&self) -> Result<Option<PhaseQuadratic>>;
    /// Chain terms for torus groups at general Schatten order.
    fn torus_terms(&self) -> Result<Option<TorusTerms>>;
    /// Map the quadratic-form value back to the objective scale.
    fn quad_to_value(&self, e: f64) -> f64;
}

impl SwivelObjective for NormChain {
    fn groups(&self) -> &[SwivelGroup] {
        &self.groups
    }

    fn eval_members(&self, vs: &[ComplexMatrix]) -> f64 {
        self.eval_with_members(vs)
    }

    fn phase_quadratic(&self) -> Result<Option<PhaseQuadratic>> {
        if self.p != 2.0 {
            return Ok(None);
        }
        let Some(terms) = self.torus_terms()? else {
            return Ok(None);
        };
        let k = terms.n_terms();
        let mut gram = vec![C64::new(0.0, 0.0); k * k];
        for a in 0..k {
            for b in a..k {
                let inner = terms.terms[a].hs_inner(&terms.terms[b]);
                gram[a * k + b] = inner;
                gram[b * k + a] = inner.conj();
            }
        }
        Ok(Some(PhaseQuadratic { group_sizes: terms.group_sizes, gram, constant: 0.0 }))
    }

    fn torus_terms(&self) -> Result<Option<TorusTerms>> {
        let mut projectors = Vec::with_capacity(self.groups.len());
        for grp in &self.groups {
            match grp.lifted_projectors()? {
                Some(p) => projectors.push(p),
                None => return Ok(None),
            }
        }
        let group_sizes: Vec<usize> = projectors.iter().map(|p| p.len()).collect();
        let strides = TorusTerms::strides(&group_sizes);
        let k_total: usize = group_sizes.iter().product();
        let mut terms = Vec::with_capacity(k_total);
        for kappa in 0..k_total {
            let mut m = self.segments[0].clone();
            for g in 0..self.groups.len() {
                let idx = (kappa / strides[g]) % group_sizes[g];
                m = m.mul(&projectors[g][idx]).mul(&self.segments[g + 1]);
            }
            terms.push(m);
        }
        Ok(Some(TorusTerms { group_sizes, terms, p: self.p }))
    }

    /// Quadratic form carries ‖T‖₂²; the chain objective is ln‖T‖₂.
    fn quad_to_value(&self, e: f64) -> f64 {
        if e <= 0.0 {
            f64::NEG_INFINITY
        } else {
            0.5 * e.ln()
        }
    }
}

/// f(1, V_{N(σ)}, V_σ) = c − Tr{N(V ρ V†)[W†(log N(ρ))W − log N(σ)]},
/// optionally negated so that the optimizer's max realizes the min side.
pub(crate) struct FOneObjective {
    /// groups[0] is the V_{N(σ)} slot (output space, no environment),
    /// groups[1] the V_σ slot.
    pub groups: Vec<SwivelGroup>,
    pub constant: f64,
    pub rho: ComplexMatrix,
    pub log_n_rho: ComplexMatrix,
    pub log_n_sigma: ComplexMatrix,
    pub kraus: Vec<ComplexMatrix>,
    /// +1 for the max side, −1 for the min side.
    pub sign: f64,
}

impl FOneObjective {
    fn channel_apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let d = self.kraus[0].rows();
        let mut out = ComplexMatrix::zeros(d, d);
        for k in &self.kraus {
            out = out.add(&k.mul(x).mul(&k.adjoint()));
        }
        out
    }

    pub fn value(&self, w_out: &ComplexMatrix, v_in: &ComplexMatrix) -> f64 {
        let rotated_rho = v_in.mul(&self.rho).mul(&v_in.adjoint());
        let pushed = self.channel_apply(&rotated_rho);
        let rotated_log = w_out.adjoint().mul(&self.log_n_rho).mul(w_out);
        let bracket = rotated_log.sub(&self.log_n_sigma);
        self.constant - pushed.mul(&bracket).trace().re
    }
}

impl SwivelObjective for FOneObjective {
    fn groups(&self) -> &[SwivelGroup] {
        &self.groups
    }

    fn eval_members(&self, vs: &[ComplexMatrix]) -> f64 {
        self.sign * self.value(&vs[0], &vs[1])
    }

    fn phase_quadratic(&self) -> Result<Option<PhaseQuadratic>> {
        let Some(p_out) = self.groups[0].lifted_projectors()? else {
            return Ok(None);
        };
        let Some(q_in) = self.groups[1].lifted_projectors()? else {
            return Ok(None);
        };
        let k1 = p_out.len();
        let k2 = q_in.len();
        let k = k1 * k2;
        // Multi-index a = (j, k): out-block j major, in-block k minor.
        let mut gram = vec![C64::new(0.0, 0.0); k * k];
        // N(Q_k ρ Q_{k'}) for all in-block pairs.
        let mut pushed = vec![ComplexMatrix::zeros(0, 0); k2 * k2];
        for ki in 0..k2 {
            for kj in 0..k2 {
                let x = q_in[ki].mul(&self.rho).mul(&q_in[kj]);
                pushed[ki * k2 + kj] = self.channel_apply(&x);
            }
        }
        // Term −Tr{N(Q_k ρ Q_{k'}) P_j L P_{j'}} lands at a=(j,k'), b=(j',k).
        for j in 0..k1 {
            for jp in 0..k1 {
                let plp = p_out[j].mul(&self.log_n_rho).mul(&p_out[jp]);
                for kk in 0..k2 {
                    for kp in 0..k2 {
                        let tr = pushed[kk * k2 + kp].mul(&plp).trace();
                        let a = j * k2 + kp;
                        let b = jp * k2 + kk;
                        gram[a * k + b] -= tr;
                    }
                }
            }
        }
        // Term +Tr{N(Q_k ρ Q_{k'}) log N(σ)}: no out-phase; spread over j=j'.
        for kk in 0..k2 {
            for kp in 0..k2 {
                let tr = pushed[kk * k2 + kp].mul(&self.log_n_sigma).trace();
                let share = tr.unscale(k1 as f64);
                for j in 0..k1 {
                    let a = j * k2 + kp;
                    let b = j * k2 + kk;
                    gram[a * k + b] += share;
                }
            }
        }
        if self.sign < 0.0 {
            for gm in &mut gram {
                *gm = -*gm;
            }
        }
        Ok(Some(PhaseQuadratic {
            group_sizes: vec![k1, k2],
            gram,
            constant: self.sign * self.constant,
        }))
    }

    fn torus_terms(&self) -> Result<Option<TorusTerms>> {
        Ok(None)
    }

    fn quad_to_value(&self, e: f64) -> f64 {
        e
    }
}
