//! Dense complex linear algebra for desk-scale Hermitian problems.
//!
//! Everything here is deterministic: the Jacobi solvers visit index pairs in a
//! fixed cyclic order, so identical input bits give identical output bits.
//! Operators are stored row-major; dimensions stay small (≤ ~64), so dense is
//! the right representation throughout.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Numerical tolerances shared by the whole crate.
pub mod tol {
    /// Hermitian symmetry check at construction (entrywise).
    pub const TAU_HERM: f64 = 1e-10;
    /// Eigendecomposition reconstruction / unitarity residual.
    pub const TAU_RECON: f64 = 1e-10;
    /// Support cutoff, relative to the largest |eigenvalue|.
    pub const TAU_SUPP: f64 = 1e-10;
    /// Eigenvalue clustering tolerance for commutant blocks, relative.
    pub const CLUSTER_TOL: f64 = 1e-8;
    /// Refuse direct evaluation of the swiveled quantities this close to α = 1.
    pub const ALPHA_GUARD: f64 = 1e-6;
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix entry is not finite".into()));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn conjugate(&self) -> Self {
        let mut out = self.clone();
        for z in &mut out.entries {
            *z = z.conj();
        }
        out
    }

    pub fn scale(&self, a: C64) -> Self {
        let mut out = self.clone();
        for z in &mut out.entries {
            *z *= a;
        }
        out
    }

    pub fn scale_re(&self, a: f64) -> Self {
        self.scale(C64::new(a, 0.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matrix product dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row_out = i * other.cols;
                let row_b = k * other.cols;
                for j in 0..other.cols {
                    out.entries[row_out + j] += a * other.entries[row_b + j];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (z, w) in out.entries.iter_mut().zip(other.entries.iter()) {
            *z += w;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (z, w) in out.entries.iter_mut().zip(other.entries.iter()) {
            *z -= w;
        }
        out
    }

    /// In-place axpy: self += a * other.
    pub fn axpy(&mut self, a: C64, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (z, w) in self.entries.iter_mut().zip(other.entries.iter()) {
            *z += a * w;
        }
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Hilbert–Schmidt inner product ⟨self, other⟩ = Tr{self† other}.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Entrywise distance from Hermitian symmetry.
    pub fn hermitian_residual(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = self[(i, j)] - self[(j, i)].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// max |(self† self − I)_{ij}|, i.e. how far the columns are from orthonormal.
    pub fn isometry_residual(&self) -> f64 {
        let g = self.adjoint().mul(self);
        let mut worst = 0.0f64;
        for i in 0..g.rows {
            for j in 0..g.cols {
                let expect = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((g[(i, j)] - expect).norm());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.cols + j]
    }
}

impl std::ops::Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.mul(rhs)
    }
}

// JSON encoding: nested arrays of [re, im] pairs, row-major.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| [self[(i, j)].re, self[(i, j)].im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(deserializer)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        let entries: Vec<C64> =
            rows.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
        ComplexMatrix::from_entries(nrows, ncols, entries).map_err(D::Error::custom)
    }
}

/// Eigendecomposition of a Hermitian operator, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Unitary; column i is the eigenvector for `eigenvalues[i]`.
    pub eigenvectors: ComplexMatrix,
    /// Count of eigenvalues with |λ| above the relative support cutoff.
    pub support_rank: usize,
}

impl SpectralDecomposition {
    fn from_sorted(eigenvalues: Vec<f64>, eigenvectors: ComplexMatrix) -> Self {
        let support_rank = support_rank_of(&eigenvalues);
        Self { eigenvalues, eigenvectors, support_rank }
    }

    /// Absolute support cutoff: τ_supp relative to the largest |λ|.
    pub fn support_cutoff(&self) -> f64 {
        let max = self.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
        tol::TAU_SUPP * max
    }
}

fn support_rank_of(eigenvalues: &[f64]) -> usize {
    let max = eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    eigenvalues.iter().filter(|l| l.abs() > tol::TAU_SUPP * max).count()
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// The input is symmetrized first; ties in the descending sort keep the
/// first-encountered eigenvector order (stable sort), which downstream
/// commutant block construction relies on.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<SpectralDecomposition> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("eig_hermitian needs a square matrix".into()));
    }
    let n = m.rows();
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(1.0);

    let mut converged = false;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= 1e-14 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-18 * scale {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let u = apq / r;
                rotate_hermitian(&mut a, &mut v, p, q, c, s, u);
            }
        }
    }
    if !converged {
        // One last check after the final sweep.
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() > 1e-12 * scale {
            return Err(Error::NonConvergence(JACOBI_MAX_SWEEPS));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(SpectralDecomposition::from_sorted(eigenvalues, eigenvectors))
}

/// Apply A ← J†AJ and V ← VJ where J is the (p,q) complex Jacobi rotation.
fn rotate_hermitian(
    a: &mut ComplexMatrix,
    v: &mut ComplexMatrix,
    p: usize,
    q: usize,
    c: f64,
    s: f64,
    u: C64,
) {
    let n = a.rows();
    let ub = u.conj();
    // Columns: col_p' = c·col_p − s·ū·col_q ; col_q' = s·u·col_p + c·col_q
    for i in 0..n {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * c - aiq * (ub * s);
        a[(i, q)] = aip * (u * s) + aiq * c;
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * c - viq * (ub * s);
        v[(i, q)] = vip * (u * s) + viq * c;
    }
    // Rows: row_p' = c·row_p − s·u·row_q ; row_q' = s·ū·row_p + c·row_q
    for j in 0..n {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = apj * c - aqj * (u * s);
        a[(q, j)] = apj * (ub * s) + aqj * c;
    }
    // Clean up the rotated pivot to keep the diagonal exactly real.
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

/// Singular values (descending) via one-sided Jacobi; accurate for the small
/// singular values too, which the Schatten quantities at p < 1 care about.
/// One and two columns are handled by a single exact rotation.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let wide = m.rows() < m.cols();
    let (rows, cols) = if wide { (m.cols(), m.rows()) } else { (m.rows(), m.cols()) };
    if cols == 0 || rows == 0 {
        return vec![];
    }
    let col = |i: usize, j: usize| if wide { m[(j, i)].conj() } else { m[(i, j)] };
    if cols == 1 {
        return vec![(0..rows).map(|i| col(i, 0).norm_sqr()).sum::<f64>().sqrt()];
    }
    if cols == 2 {
        let mut app = 0.0f64;
        let mut aqq = 0.0f64;
        let mut apq = C64::new(0.0, 0.0);
        for i in 0..rows {
            let x = col(i, 0);
            let y = col(i, 1);
            app += x.norm_sqr();
            aqq += y.norm_sqr();
            apq += x.conj() * y;
        }
        let r = apq.norm();
        let (s0, s1) = if r <= 1e-15 * (app * aqq).sqrt() || app == 0.0 || aqq == 0.0 {
            (app.sqrt(), aqq.sqrt())
        } else {
            let tau = (aqq - app) / (2.0 * r);
            let t = if tau >= 0.0 {
                1.0 / (tau + (1.0 + tau * tau).sqrt())
            } else {
                -1.0 / (-tau + (1.0 + tau * tau).sqrt())
            };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;
            let u = apq / r;
            let ub = u.conj();
            let mut n0 = 0.0f64;
            let mut n1 = 0.0f64;
            for i in 0..rows {
                let x = col(i, 0);
                let y = col(i, 1);
                n0 += (x * c - y * (ub * s)).norm_sqr();
                n1 += (x * (u * s) + y * c).norm_sqr();
            }
            (n0.sqrt(), n1.sqrt())
        };
        return if s0 >= s1 { vec![s0, s1] } else { vec![s1, s0] };
    }
    let mut b = if wide { m.adjoint() } else { m.clone() };
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let mut app = 0.0f64;
                let mut aqq = 0.0f64;
                let mut apq = C64::new(0.0, 0.0);
                for i in 0..rows {
                    let bip = b[(i, p)];
                    let biq = b[(i, q)];
                    app += bip.norm_sqr();
                    aqq += biq.norm_sqr();
                    apq += bip.conj() * biq;
                }
                let r = apq.norm();
                if r <= 1e-15 * (app * aqq).sqrt() || app == 0.0 || aqq == 0.0 {
                    continue;
                }
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let u = apq / r;
                let ub = u.conj();
                for i in 0..rows {
                    let bip = b[(i, p)];
                    let biq = b[(i, q)];
                    b[(i, p)] = bip * c - biq * (ub * s);
                    b[(i, q)] = bip * (u * s) + biq * c;
                }
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma: Vec<f64> = (0..cols)
        .map(|j| (0..rows).map(|i| b[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sigma.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sigma
}

/// Schatten p-quantity [Tr{|A|^p}]^{1/p}; p = ∞ is the operator norm.
/// The same formula is used for p ∈ (0,1) even though it is not a norm there.
pub fn schatten(a: &ComplexMatrix, p: f64) -> Result<f64> {
    if !p.is_infinite() && (p.is_nan() || p <= 0.0) {
        return Err(Error::InvalidInput(format!("schatten order must be > 0 or ∞, got {p}")));
    }
    if p == 2.0 {
        return Ok(a.frobenius_norm());
    }
    let sigma = singular_values(a);
    if p.is_infinite() {
        return Ok(sigma.first().copied().unwrap_or(0.0));
    }
    // Singular values at rounding-noise level relative to σ_max are zeros;
    // p < 1 would otherwise amplify them.
    let cutoff = sigma.first().copied().unwrap_or(0.0) * 1e-14;
    let sum: f64 = sigma.iter().filter(|s| **s > cutoff).map(|s| s.powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}

/// Mixed-radix index composition; system 0 is the most significant digit.
pub fn compose_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims.iter()).fold(0, |acc, (&d, &dim)| acc * dim + d)
}

fn decompose_index(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        digits[k] = idx % dims[k];
        idx /= dims[k];
    }
    digits
}

/// Trace out the listed subsystems of an operator on ⊗_k C^{dims[k]}.
/// Kept systems retain their original order.
pub fn partial_trace(
    m: &ComplexMatrix,
    dims: &[usize],
    traced: &[usize],
) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but subsystem dims {:?} give total {}",
            m.rows(),
            m.cols(),
            dims,
            total
        )));
    }
    if traced.iter().any(|&t| t >= dims.len()) {
        return Err(Error::InvalidInput("traced system index out of range".into()));
    }
    let kept: Vec<usize> = (0..dims.len()).filter(|k| !traced.contains(k)).collect();
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&t| dims[t]).collect();
    let dk: usize = kept_dims.iter().product();
    let dt: usize = traced_dims.iter().product();

    let mut out = ComplexMatrix::zeros(dk, dk);
    let mut full_row = vec![0usize; dims.len()];
    let mut full_col = vec![0usize; dims.len()];
    for i in 0..dk {
        let di = decompose_index(i, &kept_dims);
        for j in 0..dk {
            let dj = decompose_index(j, &kept_dims);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..dt {
                let dtr = decompose_index(t, &traced_dims);
                for (pos, &sys) in kept.iter().enumerate() {
                    full_row[sys] = di[pos];
                    full_col[sys] = dj[pos];
                }
                for (pos, &sys) in traced.iter().enumerate() {
                    full_row[sys] = dtr[pos];
                    full_col[sys] = dtr[pos];
                }
                acc += m[(compose_index(&full_row, dims), compose_index(&full_col, dims))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Place an operator acting on the listed subsystems (in the listed order)
/// into the full product space, identity elsewhere.
pub fn embed_operator(
    op: &ComplexMatrix,
    full_dims: &[usize],
    systems: &[usize],
) -> Result<ComplexMatrix> {
    let sub_dims: Vec<usize> = systems.iter().map(|&s| full_dims[s]).collect();
    let dsub: usize = sub_dims.iter().product();
    if !op.is_square() || op.rows() != dsub {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but target systems {:?} of {:?} give dim {}",
            op.rows(),
            op.cols(),
            systems,
            full_dims,
            dsub
        )));
    }
    let others: Vec<usize> = (0..full_dims.len()).filter(|k| !systems.contains(k)).collect();
    let other_dims: Vec<usize> = others.iter().map(|&k| full_dims[k]).collect();
    let dother: usize = other_dims.iter().product();
    let total: usize = full_dims.iter().product();

    let mut out = ComplexMatrix::zeros(total, total);
    let mut full_row = vec![0usize; full_dims.len()];
    let mut full_col = vec![0usize; full_dims.len()];
    for si in 0..dsub {
        let dsi = decompose_index(si, &sub_dims);
        for sj in 0..dsub {
            let v = op[(si, sj)];
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            let dsj = decompose_index(sj, &sub_dims);
            for o in 0..dother {
                let dot = decompose_index(o, &other_dims);
                for (pos, &sys) in systems.iter().enumerate() {
                    full_row[sys] = dsi[pos];
                    full_col[sys] = dsj[pos];
                }
                for (pos, &sys) in others.iter().enumerate() {
                    full_row[sys] = dot[pos];
                    full_col[sys] = dot[pos];
                }
                out[(compose_index(&full_row, full_dims), compose_index(&full_col, full_dims))] = v;
            }
        }
    }
    Ok(out)
}

/// Scalar functions applied to Hermitian operators on their support.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarFn {
    /// λ ↦ λ^t on the support (t may be negative: pseudo-inverse powers).
    Power(f64),
    /// λ ↦ ln λ on the support.
    Log,
    /// λ ↦ 1 on the support: the support projector Π.
    Projector,
}

/// Hermitian operator with its spectral decomposition computed at
/// construction (populate-once cache; the value is immutable afterwards).
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    mat: ComplexMatrix,
    eig: SpectralDecomposition,
}

impl HermitianOperator {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch("Hermitian operator must be square".into()));
        }
        let residual = mat.hermitian_residual();
        if residual > tol::TAU_HERM {
            return Err(Error::InvalidInput(format!(
                "not Hermitian: symmetry residual {residual:.3e} exceeds {:.1e}",
                tol::TAU_HERM
            )));
        }
        let sym = ComplexMatrix::from_fn(mat.rows(), mat.cols(), |i, j| {
            (mat[(i, j)] + mat[(j, i)].conj()) * 0.5
        });
        let eig = eig_hermitian(&sym)?;
        Ok(Self { mat: sym, eig })
    }

    /// Rebuild from a known decomposition (used by the on-support functions,
    /// which transform eigenvalues without re-running the solver).
    fn from_eig(eigenvalues: Vec<f64>, eigenvectors: ComplexMatrix) -> Self {
        let n = eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eigenvalues[j].partial_cmp(&eigenvalues[i]).unwrap());
        let sorted_vals: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
        let sorted_vecs = ComplexMatrix::from_fn(n, n, |i, j| eigenvectors[(i, order[j])]);
        let mat = reassemble(&sorted_vals, &sorted_vecs);
        Self { mat, eig: SpectralDecomposition::from_sorted(sorted_vals, sorted_vecs) }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn eig(&self) -> &SpectralDecomposition {
        &self.eig
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.eigenvalues
    }

    pub fn support_rank(&self) -> usize {
        self.eig.support_rank
    }

    pub fn support_cutoff(&self) -> f64 {
        self.eig.support_cutoff()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eig.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn trace_re(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        self.min_eigenvalue() >= -self.support_cutoff()
    }

    /// True when every eigenvalue clears the support cutoff.
    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > self.support_cutoff()
    }

    /// f(A) = Σ_{i: λ_i on support} f(λ_i) |i⟩⟨i|.
    ///
    /// Eigenvalues below the support cutoff map to 0. Log and non-integer
    /// powers reject operators with eigenvalues below −cutoff.
    pub fn func_on_support(&self, f: ScalarFn) -> Result<HermitianOperator> {
        let cutoff = self.support_cutoff();
        let needs_psd = match f {
            ScalarFn::Log => true,
            ScalarFn::Power(t) => !(t >= 0.0 && (t - t.round()).abs() < 1e-12),
            ScalarFn::Projector => false,
        };
        if needs_psd {
            if let Some(&bad) =
                self.eig.eigenvalues.iter().find(|l| **l < -cutoff)
            {
                return Err(Error::NegativeEigenvalue(bad));
            }
        }
        let mapped: Vec<f64> = self
            .eig
            .eigenvalues
            .iter()
            .map(|&l| {
                if l.abs() <= cutoff {
                    0.0
                } else {
                    match f {
                        ScalarFn::Power(t) => {
                            if t == 0.0 {
                                1.0
                            } else if l > 0.0 {
                                l.powf(t)
                            } else {
                                // Negative eigenvalue, integer power.
                                let k = t.round() as i32;
                                l.powi(k)
                            }
                        }
                        ScalarFn::Log => l.ln(),
                        ScalarFn::Projector => 1.0,
                    }
                }
            })
            .collect();
        Ok(HermitianOperator::from_eig(mapped, self.eig.eigenvectors.clone()))
    }

    pub fn power(&self, t: f64) -> Result<HermitianOperator> {
        self.func_on_support(ScalarFn::Power(t))
    }

    pub fn log(&self) -> Result<HermitianOperator> {
        self.func_on_support(ScalarFn::Log)
    }

    pub fn projector(&self) -> HermitianOperator {
        self.func_on_support(ScalarFn::Projector).expect("projector never fails")
    }

    /// A^{it} on the support (a partial isometry: zero on the kernel).
    pub fn power_it(&self, t: f64) -> Result<ComplexMatrix> {
        let cutoff = self.support_cutoff();
        if let Some(&bad) = self.eig.eigenvalues.iter().find(|l| **l < -cutoff) {
            return Err(Error::NegativeEigenvalue(bad));
        }
        let n = self.dim();
        let v = &self.eig.eigenvectors;
        let phases: Vec<C64> = self
            .eig
            .eigenvalues
            .iter()
            .map(|&l| {
                if l.abs() <= cutoff {
                    C64::new(0.0, 0.0)
                } else {
                    C64::from_polar(1.0, t * l.ln())
                }
            })
            .collect();
        let mut scaled = v.clone();
        for j in 0..n {
            for i in 0..n {
                scaled[(i, j)] *= phases[j];
            }
        }
        Ok(scaled.mul(&v.adjoint()))
    }
}

fn reassemble(eigenvalues: &[f64], eigenvectors: &ComplexMatrix) -> ComplexMatrix {
    let n = eigenvalues.len();
    let mut scaled = eigenvectors.clone();
    for j in 0..n {
        for i in 0..n {
            scaled[(i, j)] *= eigenvalues[j];
        }
    }
    let m = scaled.mul(&eigenvectors.adjoint());
    // Round off the asymmetry produced by the two products.
    ComplexMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// Unitary exp(iH) for Hermitian H.
pub fn exp_i_hermitian(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(h)?;
    let n = h.rows();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for j in 0..n {
        let phase = C64::from_polar(1.0, eig.eigenvalues[j]);
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    Ok(scaled.mul(&v.adjoint()))
}

/// exp(H) for Hermitian H (used by the relative-entropy rewriting of the
/// linear entropy combinations).
pub fn exp_hermitian(h: &ComplexMatrix) -> Result<HermitianOperator> {
    let eig = eig_hermitian(h)?;
    let mapped: Vec<f64> = eig.eigenvalues.iter().map(|l| l.exp()).collect();
    Ok(HermitianOperator::from_eig(mapped, eig.eigenvectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eig_identity() {
        let eig = eig_hermitian(&ComplexMatrix::identity(2)).unwrap();
        assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-12);
        assert_eq!(eig.support_rank, 2);
    }

    #[test]
    fn eig_diagonal_already() {
        let eig = eig_hermitian(&ComplexMatrix::diag(&[3.0, 1.0])).unwrap();
        assert!((eig.eigenvalues[0] - 3.0).abs() < 1e-12);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-12);
        // Standard-basis eigenvectors (up to phase; diagonal input keeps them exact).
        assert!((eig.eigenvectors[(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!((eig.eigenvectors[(1, 1)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_pauli_x() {
        let mut x = ComplexMatrix::zeros(2, 2);
        x[(0, 1)] = c(1.0, 0.0);
        x[(1, 0)] = c(1.0, 0.0);
        let eig = eig_hermitian(&x).unwrap();
        assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((eig.eigenvalues[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_reconstruction_random_hermitian() {
        // Deterministic pseudo-random Hermitian.
        let n = 6;
        let mut m = ComplexMatrix::zeros(n, n);
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / (1u64 << 53) as f64 - 0.5
        };
        for i in 0..n {
            for j in i..n {
                if i == j {
                    m[(i, i)] = c(next(), 0.0);
                } else {
                    let z = c(next(), next());
                    m[(i, j)] = z;
                    m[(j, i)] = z.conj();
                }
            }
        }
        let eig = eig_hermitian(&m).unwrap();
        // Reconstruction residual.
        let mut recon = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    recon[(i, j)] += eig.eigenvectors[(i, k)]
                        * eig.eigenvalues[k]
                        * eig.eigenvectors[(j, k)].conj();
                }
            }
        }
        assert!(recon.sub(&m).max_abs() < tol::TAU_RECON);
        assert!(eig.eigenvectors.isometry_residual() < tol::TAU_RECON);
        // Sorted descending.
        for w in eig.eigenvalues.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn func_on_support_pseudo_inverse_root() {
        let m = HermitianOperator::new(ComplexMatrix::diag(&[4.0, 0.0])).unwrap();
        let half = m.power(0.5).unwrap();
        assert!((half.matrix()[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!(half.matrix()[(1, 1)].norm() < 1e-12);
        let inv_half = m.power(-0.5).unwrap();
        assert!((inv_half.matrix()[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!(inv_half.matrix()[(1, 1)].norm() < 1e-12);
    }

    #[test]
    fn func_on_support_log() {
        let m = HermitianOperator::new(ComplexMatrix::diag(&[std::f64::consts::E, 1.0, 0.0]))
            .unwrap();
        let lg = m.log().unwrap();
        assert!((lg.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(lg.matrix()[(1, 1)].norm() < 1e-12);
        assert!(lg.matrix()[(2, 2)].norm() < 1e-12);
    }

    #[test]
    fn func_rejects_log_of_indefinite() {
        let m = HermitianOperator::new(ComplexMatrix::diag(&[1.0, -1.0])).unwrap();
        assert!(matches!(m.log(), Err(Error::NegativeEigenvalue(_))));
        assert!(matches!(m.power(-0.5), Err(Error::NegativeEigenvalue(_))));
        // Integer powers of indefinite operators are fine.
        assert!(m.power(2.0).is_ok());
    }

    #[test]
    fn schatten_identity_and_rank_one() {
        assert!((schatten(&ComplexMatrix::identity(4), 2.0).unwrap() - 2.0).abs() < 1e-12);
        // Unit-norm rank-1 projector has a single unit singular value.
        let mut v = ComplexMatrix::zeros(3, 1);
        v[(0, 0)] = c(0.6, 0.0);
        v[(1, 0)] = c(0.0, 0.8);
        let proj = v.mul(&v.adjoint());
        for &p in &[0.5, 1.0, 2.0, 7.0, f64::INFINITY] {
            assert!((schatten(&proj, p).unwrap() - 1.0).abs() < 1e-12, "p = {p}");
        }
    }

    #[test]
    fn partial_trace_maximally_entangled() {
        let mut psi = ComplexMatrix::zeros(4, 1);
        psi[(0, 0)] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[(3, 0)] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let rho = psi.mul(&psi.adjoint());
        let reduced = partial_trace(&rho, &[2, 2], &[1]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 0.5 } else { 0.0 };
                assert!((reduced[(i, j)] - c(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_product_state() {
        let rho = ComplexMatrix::diag(&[0.7, 0.3]);
        let sigma = ComplexMatrix::diag(&[0.2, 0.8]);
        let joint = rho.kron(&sigma);
        let back = partial_trace(&joint, &[2, 2], &[1]).unwrap();
        assert!(back.sub(&rho).max_abs() < 1e-12);
    }

    #[test]
    fn partial_trace_dim_one_factor() {
        let m = ComplexMatrix::diag(&[0.25, 0.75]);
        let same = partial_trace(&m, &[2, 1], &[1]).unwrap();
        assert!(same.sub(&m).max_abs() < 1e-14);
    }

    #[test]
    fn embed_places_identity_elsewhere() {
        let x = ComplexMatrix::diag(&[2.0, 5.0]);
        let lifted = embed_operator(&x, &[2, 3], &[0]).unwrap();
        let expect = x.kron(&ComplexMatrix::identity(3));
        assert!(lifted.sub(&expect).max_abs() < 1e-14);
        let lifted_right = embed_operator(&x, &[3, 2], &[1]).unwrap();
        let expect_right = ComplexMatrix::identity(3).kron(&x);
        assert!(lifted_right.sub(&expect_right).max_abs() < 1e-14);
    }

    #[test]
    fn exp_i_hermitian_is_unitary() {
        let mut h = ComplexMatrix::zeros(3, 3);
        h[(0, 1)] = c(0.3, 0.2);
        h[(1, 0)] = c(0.3, -0.2);
        h[(2, 2)] = c(-0.7, 0.0);
        let u = exp_i_hermitian(&h).unwrap();
        assert!(u.isometry_residual() < 1e-12);
    }

    #[test]
    fn power_it_is_partial_isometry() {
        let m = HermitianOperator::new(ComplexMatrix::diag(&[2.0, 0.5, 0.0])).unwrap();
        let u = m.power_it(1.7).unwrap();
        // Unitary on the support, zero on the kernel.
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!((u[(1, 1)].norm() - 1.0).abs() < 1e-12);
        assert!(u[(2, 2)].norm() < 1e-12);
    }
}
