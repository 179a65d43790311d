//! Commutant parametrization: block structure of all unitaries commuting
//! with a Hermitian operator, plus the lift of commutant members into the
//! space a norm chain acts on (tensor-factor embedding and the environment
//! identity of an isometric extension).

use num_complex::Complex64;
use rand_chacha::rand_core::RngCore;
use rand_chacha::ChaCha12Rng;

use crate::error::Result;
use crate::linalg::{embed_operator, exp_i_hermitian, tol, ComplexMatrix, HermitianOperator};

type C64 = Complex64;

/// Block structure of the commutant of a Hermitian operator: eigenbasis plus
/// eigenvalue clusters (the kernel cluster included). Members are unitaries
/// block-diagonal in this basis.
#[derive(Clone, Debug)]
pub struct Commutant {
    basis: ComplexMatrix,
    /// (start index, size) per eigenvalue cluster, in descending-λ order.
    blocks: Vec<(usize, usize)>,
    cluster_tol: f64,
    dim: usize,
}

impl Commutant {
    /// Cluster the spectrum with the gap rule: a new block starts whenever
    /// consecutive (descending) eigenvalues differ by more than
    /// cluster_tol · max(1, |λ_max|).
    pub fn of(omega: &HermitianOperator, cluster_tol: f64) -> Self {
        let eig = omega.eig();
        let n = omega.dim();
        let scale = eig.eigenvalues.first().map(|l| l.abs()).unwrap_or(0.0).max(1.0);
        let gap = cluster_tol * scale;
        let mut blocks = Vec::new();
        let mut start = 0usize;
        for i in 1..n {
            if (eig.eigenvalues[i - 1] - eig.eigenvalues[i]).abs() > gap {
                blocks.push((start, i - start));
                start = i;
            }
        }
        if n > 0 {
            blocks.push((start, n - start));
        }
        Self { basis: eig.eigenvectors.clone(), blocks, cluster_tol, dim: n }
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All clusters simple: the commutant is a torus of diagonal phases.
    pub fn is_torus(&self) -> bool {
        self.blocks.iter().all(|&(_, size)| size == 1)
    }
}

/// How a commutant member is lifted into the space the chain acts on.
#[derive(Clone, Debug)]
struct Lift {
    /// When the swivel is restricted to a tensor factor: the full subsystem
    /// dims of the chain-position space and the factor(s) the base occupies.
    embed: Option<(Vec<usize>, Vec<usize>)>,
    /// Environment dimension of an isometric extension: members act as V ⊗ I_E.
    env_dim: usize,
}

/// A swivel slot in a norm chain: a commutant together with its lift.
#[derive(Clone, Debug)]
pub struct SwivelGroup {
    commutant: Commutant,
    lift: Lift,
    /// Dimension of the chain-position space before the environment factor.
    point_dim: usize,
}

impl SwivelGroup {
    /// Unrestricted commutant of `base`, acting on the whole space.
    pub fn natural(base: &HermitianOperator, env_dim: usize) -> Self {
        let commutant = Commutant::of(base, tol::CLUSTER_TOL);
        let point_dim = base.dim();
        Self { commutant, lift: Lift { embed: None, env_dim }, point_dim }
    }

    /// Commutant of an operator living on the subsystems `systems` of a
    /// product space with dims `full_dims`; members act as identity on the
    /// remaining factors.
    pub fn embedded(
        base: &HermitianOperator,
        full_dims: Vec<usize>,
        systems: Vec<usize>,
        env_dim: usize,
    ) -> Self {
        let commutant = Commutant::of(base, tol::CLUSTER_TOL);
        let point_dim = full_dims.iter().product();
        Self {
            commutant,
            lift: Lift { embed: Some((full_dims, systems)), env_dim },
            point_dim,
        }
    }

    pub fn commutant(&self) -> &Commutant {
        &self.commutant
    }

    pub fn is_torus(&self) -> bool {
        self.commutant.is_torus()
    }

    pub fn n_blocks(&self) -> usize {
        self.commutant.blocks.len()
    }

    /// Free search dimensions for a torus commutant (one global phase is
    /// irrelevant to every objective).
    pub fn free_dim(&self) -> usize {
        self.n_blocks().saturating_sub(1)
    }

    pub fn params_len(&self) -> usize {
        if self.is_torus() {
            self.n_blocks()
        } else {
            self.commutant.blocks.iter().map(|&(_, m)| m * m).sum()
        }
    }

    pub fn identity_params(&self) -> Vec<f64> {
        vec![0.0; self.params_len()]
    }

    pub fn random_params(&self, rng: &mut ChaCha12Rng) -> Vec<f64> {
        let uniform = |rng: &mut ChaCha12Rng| {
            (((rng.next_u64() >> 11) + 1) as f64) * (1.0 / 9007199254740992.0)
        };
        if self.is_torus() {
            (0..self.params_len())
                .map(|_| (uniform(rng) - 0.5) * 2.0 * std::f64::consts::PI)
                .collect()
        } else {
            // Hermitian generator coordinates, moderate amplitude.
            (0..self.params_len()).map(|_| (uniform(rng) - 0.5) * 2.0).collect()
        }
    }

    /// Member unitary in the small (commutant-base) space.
    pub fn small_member(&self, params: &[f64]) -> Result<ComplexMatrix> {
        let n = self.commutant.dim;
        let basis = &self.commutant.basis;
        if self.is_torus() {
            // V = Σ_k e^{iθ_k} |v_k⟩⟨v_k|
            let mut scaled = basis.clone();
            for (k, &theta) in params.iter().enumerate() {
                let phase = C64::from_polar(1.0, theta);
                for i in 0..n {
                    scaled[(i, k)] *= phase;
                }
            }
            Ok(scaled.mul(&basis.adjoint()))
        } else {
            // V = basis · blockdiag(exp(iH_b)) · basis†
            let mut blockdiag = ComplexMatrix::zeros(n, n);
            let mut offset = 0usize;
            for &(start, m) in &self.commutant.blocks {
                let h = hermitian_from_params(&params[offset..offset + m * m], m);
                offset += m * m;
                let u = exp_i_hermitian(&h)?;
                for i in 0..m {
                    for j in 0..m {
                        blockdiag[(start + i, start + j)] = u[(i, j)];
                    }
                }
            }
            Ok(basis.mul(&blockdiag).mul(&basis.adjoint()))
        }
    }

    /// Member lifted to the chain-position space (embedding, no environment).
    pub fn point_member(&self, params: &[f64]) -> Result<ComplexMatrix> {
        let small = self.small_member(params)?;
        self.embed_small(&small)
    }

    /// Member lifted all the way into the chain space (with environment).
    pub fn member(&self, params: &[f64]) -> Result<ComplexMatrix> {
        let point = self.point_member(params)?;
        Ok(self.tensor_env(&point))
    }

    fn embed_small(&self, small: &ComplexMatrix) -> Result<ComplexMatrix> {
        match &self.lift.embed {
            None => Ok(small.clone()),
            Some((full_dims, systems)) => embed_operator(small, full_dims, systems),
        }
    }

    /// Lift an explicit chain-position-space unitary into the chain space.
    pub fn tensor_env(&self, point_matrix: &ComplexMatrix) -> ComplexMatrix {
        if self.lift.env_dim <= 1 {
            point_matrix.clone()
        } else {
            point_matrix.kron(&ComplexMatrix::identity(self.lift.env_dim))
        }
    }

    /// Torus only: the eigenprojectors lifted into the chain space, one per
    /// block, so that member(θ) = Σ_k e^{iθ_k} P_k.
    pub fn lifted_projectors(&self) -> Result<Option<Vec<ComplexMatrix>>> {
        if !self.is_torus() {
            return Ok(None);
        }
        let n = self.commutant.dim;
        let basis = &self.commutant.basis;
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut p = ComplexMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] = basis[(i, k)] * basis[(j, k)].conj();
                }
            }
            let embedded = self.embed_small(&p)?;
            out.push(self.tensor_env(&embedded));
        }
        Ok(Some(out))
    }

    pub fn point_dim(&self) -> usize {
        self.point_dim
    }
}

/// Hermitian m×m from m² real coordinates: the diagonal first, then the
/// (re, im) pairs of the strict upper triangle, row by row.
fn hermitian_from_params(params: &[f64], m: usize) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(m, m);
    for i in 0..m {
        h[(i, i)] = C64::new(params[i], 0.0);
    }
    let mut idx = m;
    for i in 0..m {
        for j in (i + 1)..m {
            let z = C64::new(params[idx], params[idx + 1]);
            idx += 2;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}
