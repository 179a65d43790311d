//! States, positive operators, channels with cached Stinespring dilations,
//! and seeded random instance generation.
//!
//! Random generation is a pure function of the seed: every object draws from
//! its own ChaCha stream, so parallel and serial harness runs see identical
//! instances bit for bit.

use std::collections::BTreeMap;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, partial_trace, tol, ComplexMatrix, HermitianOperator, C64,
};

/// Positive semi-definite operator with unit trace.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    op: HermitianOperator,
}

impl DensityOperator {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let op = HermitianOperator::new(mat)?;
        if !op.is_positive_semidefinite() {
            return Err(Error::NegativeEigenvalue(op.min_eigenvalue()));
        }
        let tr = op.trace_re();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("density operator trace {tr} is not 1")));
        }
        Ok(Self { op })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn purity(&self) -> f64 {
        self.op.eigenvalues().iter().map(|l| l * l).sum()
    }
}

/// Non-zero positive semi-definite operator; the trace is unconstrained.
#[derive(Clone, Debug)]
pub struct PositiveOperator {
    op: HermitianOperator,
}

impl PositiveOperator {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let op = HermitianOperator::new(mat)?;
        if !op.is_positive_semidefinite() {
            return Err(Error::NegativeEigenvalue(op.min_eigenvalue()));
        }
        if op.max_eigenvalue() <= 0.0 {
            return Err(Error::InvalidInput("positive operator must be non-zero".into()));
        }
        Ok(Self { op })
    }

    pub fn from_density(rho: &DensityOperator) -> Self {
        Self { op: rho.op.clone() }
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

/// Completely positive trace-preserving map in Kraus form, with the
/// isometric extension U = Σ_i K_i ⊗ |i⟩_E cached at construction.
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    env_dim: usize,
    kraus: Vec<ComplexMatrix>,
    dilation: ComplexMatrix,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidInput("channel needs at least one Kraus operator".into()));
        }
        let dim_out = kraus[0].rows();
        let dim_in = kraus[0].cols();
        if kraus.iter().any(|k| k.rows() != dim_out || k.cols() != dim_in) {
            return Err(Error::DimensionMismatch("Kraus operators have mixed shapes".into()));
        }
        let mut sum = ComplexMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            sum = sum.add(&k.adjoint().mul(k));
        }
        let mut worst = 0.0f64;
        for i in 0..dim_in {
            for j in 0..dim_in {
                let expect = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((sum[(i, j)] - expect).norm());
            }
        }
        if worst > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "not trace preserving: |ΣK†K − I| = {worst:.3e}"
            )));
        }
        let env_dim = kraus.len();
        // U[(o,e), j] = K_e[o, j], with row index (o, e) in row-major
        // (output, environment) order.
        let mut dilation = ComplexMatrix::zeros(dim_out * env_dim, dim_in);
        for (e, k) in kraus.iter().enumerate() {
            for o in 0..dim_out {
                for j in 0..dim_in {
                    dilation[(o * env_dim + e, j)] = k[(o, j)];
                }
            }
        }
        Ok(Self { dim_in, dim_out, env_dim, kraus, dilation })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(dim)]).expect("identity channel is CPTP")
    }

    /// The full trace as a channel: Kraus operators {⟨i|}.
    pub fn trace_channel(dim_in: usize) -> Self {
        let kraus = (0..dim_in)
            .map(|i| ComplexMatrix::from_fn(1, dim_in, |_, j| {
                if j == i { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
            }))
            .collect();
        Self::new(kraus).expect("trace channel is CPTP")
    }

    /// Tr over the first tensor factor of C^{d_first} ⊗ C^{d_rest}.
    /// Its dilation is a permutation unitary, which is exactly the structure
    /// the D_2 / D_max upper bounds need.
    pub fn trace_out_first(d_first: usize, d_rest: usize) -> Self {
        let kraus = (0..d_first)
            .map(|a| {
                ComplexMatrix::from_fn(d_rest, d_first * d_rest, |r, col| {
                    if col == a * d_rest + r { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
                })
            })
            .collect();
        Self::new(kraus).expect("partial trace channel is CPTP")
    }

    /// Fully dephasing channel in the computational basis.
    pub fn dephasing(dim: usize) -> Self {
        let kraus = (0..dim)
            .map(|i| {
                ComplexMatrix::from_fn(dim, dim, |r, c| {
                    if r == i && c == i { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
                })
            })
            .collect();
        Self::new(kraus).expect("dephasing channel is CPTP")
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// Isometric extension U with N(X) = Tr_E{U X U†}.
    pub fn dilation(&self) -> &ComplexMatrix {
        &self.dilation
    }

    /// True when the dilation is square, i.e. a unitary rather than a proper
    /// isometry. Required by the upper-bound recovery relations.
    pub fn has_unitary_dilation(&self) -> bool {
        self.dim_out * self.env_dim == self.dim_in
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim_in || x.cols() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "channel input is {}x{}, expected {0}x{0} with dim {}",
                x.rows(),
                x.cols(),
                self.dim_in
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = out.add(&k.mul(x).mul(&k.adjoint()));
        }
        Ok(out)
    }

    pub fn adjoint_apply(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        if y.rows() != self.dim_out || y.cols() != self.dim_out {
            return Err(Error::DimensionMismatch(format!(
                "adjoint input is {}x{}, expected dim {}",
                y.rows(),
                y.cols(),
                self.dim_out
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out = out.add(&k.adjoint().mul(y).mul(k));
        }
        Ok(out)
    }

    /// Evaluate through the dilation: Tr_E{U X U†}. Agrees with the Kraus sum.
    pub fn apply_via_dilation(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let big = self.dilation.mul(x).mul(&self.dilation.adjoint());
        partial_trace(&big, &[self.dim_out, self.env_dim], &[1])
    }

    pub fn apply_herm(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        HermitianOperator::new(self.apply(x.matrix())?)
    }

    /// Choi matrix (id ⊗ N)(|Ω⟩⟨Ω|) on C^{d_in} ⊗ C^{d_out}.
    pub fn choi(&self) -> ComplexMatrix {
        let d = self.dim_in;
        let m = self.dim_out;
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

/// Restricts the swivel optimization to commutant unitaries of an operator
/// living on a tensor factor, lifted by the identity elsewhere. Used by the
/// conditional-mutual-information specialization, where the swivels are
/// V_{ρ_C} and V_{ρ_AC} rather than the full commutants of I⊗ρ_C and ρ_AC⊗I.
#[derive(Clone, Debug)]
pub struct EmbeddedBase {
    pub base: HermitianOperator,
    pub full_dims: Vec<usize>,
    pub systems: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SwivelRestriction {
    /// Swivel acting on the channel input space (the V_σ slot).
    pub input: EmbeddedBase,
    /// Swivel acting on the channel output space (the V_{N(σ)} slot).
    pub output: EmbeddedBase,
}

/// Booleans for the positive-definite variant of the instance definition.
#[derive(Clone, Copy, Debug)]
pub struct PdFlags {
    pub rho: bool,
    pub sigma: bool,
    pub n_rho: bool,
    pub n_sigma: bool,
}

impl PdFlags {
    pub fn all(&self) -> bool {
        self.rho && self.sigma && self.n_rho && self.n_sigma
    }
}

/// A (ρ, σ, N) triple with validated support relations: the unit of every
/// computation and every verification trial.
#[derive(Clone, Debug)]
pub struct Instance {
    rho: DensityOperator,
    sigma: PositiveOperator,
    channel: QuantumChannel,
    n_rho: HermitianOperator,
    n_sigma: HermitianOperator,
    support_ok: bool,
    pd_flags: PdFlags,
    warnings: Vec<String>,
    seed: Option<u64>,
    swivel_restriction: Option<SwivelRestriction>,
}

impl Instance {
    pub fn new(
        rho: DensityOperator,
        sigma: PositiveOperator,
        channel: QuantumChannel,
        seed: Option<u64>,
    ) -> Result<Self> {
        Self::with_restriction(rho, sigma, channel, seed, None)
    }

    pub fn with_restriction(
        rho: DensityOperator,
        sigma: PositiveOperator,
        channel: QuantumChannel,
        seed: Option<u64>,
        swivel_restriction: Option<SwivelRestriction>,
    ) -> Result<Self> {
        if rho.dim() != channel.dim_in() || sigma.dim() != channel.dim_in() {
            return Err(Error::DimensionMismatch(format!(
                "rho dim {}, sigma dim {}, channel input dim {}",
                rho.dim(),
                sigma.dim(),
                channel.dim_in()
            )));
        }
        let n_rho = channel.apply_herm(rho.op())?;
        let n_sigma = channel.apply_herm(sigma.op())?;

        // supp ρ ⊆ supp σ ⇔ (I − Π_σ) ρ (I − Π_σ) vanishes.
        let pi_sigma = sigma.op().projector();
        let comp = ComplexMatrix::identity(sigma.dim()).sub(pi_sigma.matrix());
        let leak = comp.mul(rho.matrix()).mul(&comp);
        let support_ok = linalg::schatten(&leak, f64::INFINITY)? <= 1e-10;

        let pd_flags = PdFlags {
            rho: rho.op().is_positive_definite() && rho.op().support_rank() == rho.dim(),
            sigma: sigma.op().is_positive_definite() && sigma.op().support_rank() == sigma.dim(),
            n_rho: n_rho.is_positive_definite() && n_rho.support_rank() == n_rho.dim(),
            n_sigma: n_sigma.is_positive_definite() && n_sigma.support_rank() == n_sigma.dim(),
        };

        let mut warnings = Vec::new();
        for (name, op) in [
            ("rho", rho.op()),
            ("sigma", sigma.op()),
            ("N(rho)", &n_rho),
            ("N(sigma)", &n_sigma),
        ] {
            let cutoff = op.support_cutoff();
            if cutoff > 0.0
                && op
                    .eigenvalues()
                    .iter()
                    .any(|l| l.abs() > cutoff / 10.0 && l.abs() < 10.0 * cutoff)
            {
                warnings.push(format!("{name} has eigenvalues near the support cutoff"));
            }
        }

        Ok(Self {
            rho,
            sigma,
            channel,
            n_rho,
            n_sigma,
            support_ok,
            pd_flags,
            warnings,
            seed,
            swivel_restriction,
        })
    }

    pub fn rho(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn sigma(&self) -> &PositiveOperator {
        &self.sigma
    }

    pub fn channel(&self) -> &QuantumChannel {
        &self.channel
    }

    pub fn n_rho(&self) -> &HermitianOperator {
        &self.n_rho
    }

    pub fn n_sigma(&self) -> &HermitianOperator {
        &self.n_sigma
    }

    pub fn support_ok(&self) -> bool {
        self.support_ok
    }

    pub fn pd_flags(&self) -> PdFlags {
        self.pd_flags
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn swivel_restriction(&self) -> Option<&SwivelRestriction> {
        self.swivel_restriction.as_ref()
    }
}

// ---------------------------------------------------------------------------
// Seeded random generation.

/// SplitMix64 step, used to derive per-object seeds from a master seed.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive a stream seed from a master seed and a stream index.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream.wrapping_add(0x1234_5678_9abc_def0)))
}

pub(crate) fn seeded_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

fn uniform01(rng: &mut ChaCha12Rng) -> f64 {
    // (0, 1]: never zero, so the Box-Muller log is always finite.
    (((rng.next_u64() >> 11) + 1) as f64) * (1.0 / 9007199254740992.0)
}

fn gaussian_pair(rng: &mut ChaCha12Rng) -> (f64, f64) {
    let u1 = uniform01(rng);
    let u2 = uniform01(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

fn gaussian_complex(rng: &mut ChaCha12Rng) -> C64 {
    let (re, im) = gaussian_pair(rng);
    C64::new(re, im)
}

pub fn random_gaussian_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut rng = seeded_rng(seed);
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = gaussian_complex(&mut rng);
        }
    }
    m
}

/// Hilbert–Schmidt-induced random state of the requested rank: GG†/Tr from a
/// seeded complex-Gaussian dim×rank matrix G.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    if rank == 0 || rank > dim {
        return Err(Error::InvalidInput(format!("rank {rank} out of range for dim {dim}")));
    }
    let g = random_gaussian_matrix(dim, rank, seed);
    let m = g.mul(&g.adjoint());
    let tr = m.trace().re;
    DensityOperator::new(m.scale_re(1.0 / tr))
}

/// Random full-rank positive operator with the given trace.
pub fn random_positive(dim: usize, trace: f64, seed: u64) -> Result<PositiveOperator> {
    let g = random_gaussian_matrix(dim, dim, seed);
    let m = g.mul(&g.adjoint());
    let tr = m.trace().re;
    PositiveOperator::new(m.scale_re(trace / tr))
}

/// Random CPTP channel: a seeded Gaussian Kraus stack orthonormalized through
/// the polar decomposition so that ΣK†K = I exactly (to working precision).
pub fn random_channel(
    dim_in: usize,
    dim_out: usize,
    n_kraus: usize,
    seed: u64,
) -> Result<QuantumChannel> {
    if n_kraus == 0 {
        return Err(Error::InvalidInput("need at least one Kraus operator".into()));
    }
    if n_kraus * dim_out < dim_in {
        return Err(Error::InvalidInput(format!(
            "cannot be trace preserving: {n_kraus} Kraus of {dim_out}x{dim_in} has rank < {dim_in}"
        )));
    }
    let s = random_gaussian_matrix(n_kraus * dim_out, dim_in, seed);
    let gram = HermitianOperator::new(s.adjoint().mul(&s))?;
    let w = s.mul(gram.power(-0.5)?.matrix());
    let kraus = (0..n_kraus)
        .map(|e| ComplexMatrix::from_fn(dim_out, dim_in, |o, j| w[(e * dim_out + o, j)]))
        .collect();
    QuantumChannel::new(kraus)
}

/// Random unitary via the polar decomposition of a Gaussian matrix.
pub fn random_unitary(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    let s = random_gaussian_matrix(dim, dim, seed);
    let gram = HermitianOperator::new(s.adjoint().mul(&s))?;
    Ok(s.mul(gram.power(-0.5)?.matrix()))
}

/// Canonical purification |ψ⟩ = Σ_i √λ_i |v_i⟩ ⊗ |i⟩ on the doubled space;
/// the reference index follows the descending eigenvalue order, so a pure
/// input gets the reference in the first basis state.
pub fn purify(rho: &DensityOperator) -> Result<DensityOperator> {
    let d = rho.dim();
    let eig = rho.op().eig();
    let mut psi = vec![C64::new(0.0, 0.0); d * d];
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l <= 0.0 {
            continue;
        }
        let amp = l.sqrt();
        for row in 0..d {
            psi[row * d + i] += eig.eigenvectors[(row, i)] * amp;
        }
    }
    let mut mat = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d * d {
        for j in 0..d * d {
            mat[(i, j)] = psi[i] * psi[j].conj();
        }
    }
    DensityOperator::new(mat)
}

/// Generic random instance: rank-controlled ρ, full-rank σ (so the support
/// condition holds), and a random channel.
pub fn random_instance(
    dim: usize,
    rank_rho: usize,
    dim_out: usize,
    n_kraus: usize,
    seed: u64,
) -> Result<Instance> {
    let rho = random_density(dim, rank_rho, derive_seed(seed, 1))?;
    let sigma = random_positive(dim, 1.0, derive_seed(seed, 2))?;
    let channel = random_channel(dim, dim_out, n_kraus, derive_seed(seed, 3))?;
    Instance::new(rho, sigma, channel, Some(seed))
}

/// Random positive-definite instance (ρ, σ, N(ρ), N(σ) all full rank).
pub fn random_pd_instance(
    dim: usize,
    dim_out: usize,
    n_kraus: usize,
    seed: u64,
) -> Result<Instance> {
    let inst = random_instance(dim, dim, dim_out, n_kraus, seed)?;
    if !inst.pd_flags().all() {
        // Full-rank inputs through a random channel give full-rank outputs
        // except on a measure-zero set; fail loudly rather than silently.
        return Err(Error::PositiveDefiniteRequired(format!(
            "seed {seed} produced a rank-deficient instance"
        )));
    }
    Ok(inst)
}

/// Random σ, ρ positive definite on C^{dA} ⊗ C^{dB} with the channel Tr over
/// the first factor. The dilation is a permutation unitary.
pub fn random_tr_first_instance(d_a: usize, d_b: usize, seed: u64) -> Result<Instance> {
    let dim = d_a * d_b;
    let rho = random_density(dim, dim, derive_seed(seed, 1))?;
    let sigma = random_positive(dim, 1.0, derive_seed(seed, 2))?;
    let channel = QuantumChannel::trace_out_first(d_a, d_b);
    Instance::new(rho, sigma, channel, Some(seed))
}

/// Classical (fully commuting) instance: diagonal ρ and σ with full support,
/// and a classical channel whose Kraus operators are √T(j|i) |j⟩⟨i|.
pub fn random_classical_instance(
    dim_in: usize,
    dim_out: usize,
    seed: u64,
) -> Result<(Instance, Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
    let mut rng = seeded_rng(derive_seed(seed, 11));
    let mut p: Vec<f64> = (0..dim_in).map(|_| uniform01(&mut rng) + 0.05).collect();
    let sp: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= sp);
    let mut s: Vec<f64> = (0..dim_in).map(|_| uniform01(&mut rng) + 0.05).collect();
    let ss: f64 = s.iter().sum();
    s.iter_mut().for_each(|x| *x /= ss);
    // Column-stochastic transition kernel T[j][i] = T(j|i).
    let mut t = vec![vec![0.0f64; dim_in]; dim_out];
    for i in 0..dim_in {
        let mut col: Vec<f64> = (0..dim_out).map(|_| uniform01(&mut rng) + 0.05).collect();
        let cs: f64 = col.iter().sum();
        col.iter_mut().for_each(|x| *x /= cs);
        for j in 0..dim_out {
            t[j][i] = col[j];
        }
    }
    let kraus: Vec<ComplexMatrix> = (0..dim_in)
        .flat_map(|i| {
            let t = &t;
            (0..dim_out).map(move |j| {
                ComplexMatrix::from_fn(dim_out, dim_in, |r, c| {
                    if r == j && c == i {
                        C64::new(t[j][i].sqrt(), 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
            })
        })
        .collect();
    let rho = DensityOperator::new(ComplexMatrix::diag(&p))?;
    let sigma = PositiveOperator::new(ComplexMatrix::diag(&s))?;
    let channel = QuantumChannel::new(kraus)?;
    let inst = Instance::new(rho, sigma, channel, Some(seed))?;
    Ok((inst, p, s, t))
}

// ---------------------------------------------------------------------------
// Instance file format (JSON).

/// On-disk instance format. Matrices are nested arrays of [re, im] pairs,
/// row-major; numbers round-trip bit-exactly through the shortest-decimal
/// float encoding.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    /// Subsystem dimensions of the channel input space.
    pub dims: Vec<usize>,
    pub rho: ComplexMatrix,
    pub sigma: ComplexMatrix,
    pub kraus: Vec<ComplexMatrix>,
    pub seed: u64,
    pub labels: BTreeMap<String, String>,
}

impl InstanceFile {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_instance(&self) -> Result<Instance> {
        let din: usize = self.dims.iter().product();
        if self.rho.rows() != din || self.sigma.rows() != din {
            return Err(Error::DimensionMismatch(format!(
                "dims {:?} give {}, but rho is {}x{}",
                self.dims,
                din,
                self.rho.rows(),
                self.rho.cols()
            )));
        }
        let rho = DensityOperator::new(self.rho.clone())?;
        let sigma = PositiveOperator::new(self.sigma.clone())?;
        let channel = QuantumChannel::new(self.kraus.clone())?;
        let restriction = if self.labels.get("structure").map(String::as_str)
            == Some("tripartite")
        {
            if self.dims.len() != 3 {
                return Err(Error::InvalidInput(
                    "tripartite structure needs exactly three dims".into(),
                ));
            }
            let (da, db, dc) = (self.dims[0], self.dims[1], self.dims[2]);
            let rho_c = HermitianOperator::new(partial_trace(
                rho.matrix(),
                &[da, db, dc],
                &[0, 1],
            )?)?;
            let rho_ac = HermitianOperator::new(partial_trace(
                rho.matrix(),
                &[da, db, dc],
                &[1],
            )?)?;
            Some(SwivelRestriction {
                input: EmbeddedBase {
                    base: rho_ac,
                    full_dims: vec![da, db, dc],
                    systems: vec![0, 2],
                },
                output: EmbeddedBase {
                    base: rho_c,
                    full_dims: vec![db, dc],
                    systems: vec![1],
                },
            })
        } else {
            None
        };
        Instance::with_restriction(rho, sigma, channel, Some(self.seed), restriction)
    }

    pub fn from_instance(inst: &Instance, dims: Vec<usize>, labels: BTreeMap<String, String>) -> Self {
        Self {
            dims,
            rho: inst.rho().matrix().clone(),
            sigma: inst.sigma().matrix().clone(),
            kraus: inst.channel().kraus().to_vec(),
            seed: inst.seed().unwrap_or(0),
            labels,
        }
    }
}

/// Keep τ_supp visible to downstream callers that reason about near-cutoff
/// spectra the same way Instance construction does.
pub fn support_tolerance() -> f64 {
    tol::TAU_SUPP
}
