//! Dense complex linear algebra for small operators.
//!
//! Everything here is sized for spin systems of at most a few dozen basis
//! states: row-major storage, no sparsity, and a cyclic Jacobi solver for
//! the Hermitian eigenproblem.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Structural tolerance: hermiticity, trace, Kraus completeness.
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Spectral tolerance: unitarity and eigenvalue positivity.
pub const SPECTRAL_TOL: f64 = 1e-10;

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// Outer product |a><b|.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                m[(i, j)] = ai * bj.conj();
            }
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(c, r)] = self[(r, c)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * rho * self^dagger`.
    pub fn conjugate(&self, rho: &Self) -> Result<Self> {
        self.matmul(rho)?.matmul(&self.adjoint())
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// `<a| self |b>`.
    pub fn expectation(&self, a: &[C64], b: &[C64]) -> Result<C64> {
        let mb = self.apply(b)?;
        Ok(a.iter().zip(&mb).map(|(x, y)| x.conj() * y).sum())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch in max_abs_diff"
        );
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() < tol
    }

    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let prod = self.adjoint().matmul(self).expect("square");
        prod.max_abs_diff(&Self::identity(self.rows))
    }

    /// Commutator `[a, b] = ab - ba`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(&self.matmul(other)? - &other.matmul(self)?)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let s = a[(ar, ac)];
            if s == ZERO {
                continue;
            }
            for br in 0..b.rows {
                for bc in 0..b.cols {
                    out[(ar * b.rows + br, ac * b.cols + bc)] = s * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all<'a, I>(factors: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1), |acc, f| kron(&acc, f))
}

/// Eigendecomposition of a Hermitian matrix: `h = V diag(values) V^dagger`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Rebuild `V f(Λ) V^dagger` for a scalar function of the eigenvalues.
    pub fn map_spectrum<F>(&self, f: F) -> ComplexMatrix
    where
        F: Fn(f64) -> C64,
    {
        let n = self.values.len();
        let fv: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += v[(r, k)] * fv[k] * v[(c, k)].conj();
                }
                out[(r, c)] = acc;
            }
        }
        out
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary, then applies a real Givens rotation in the (p, q) plane.
pub fn eigh(h: &ComplexMatrix) -> Result<HermitianEigen> {
    const MAX_SWEEPS: usize = 100;

    if !h.is_square() {
        return Err(Error::DimensionMismatch(
            "eigh needs a square matrix".into(),
        ));
    }
    let herm = h.hermiticity_error();
    if herm >= STRUCTURAL_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian(herm));
    }

    let n = h.rows;
    let mut a = h.clone();
    // symmetrize exactly so the rotations see a true Hermitian matrix
    for r in 0..n {
        a[(r, r)] = C64::new(a[(r, r)].re, 0.0);
        for c in r + 1..n {
            let avg = 0.5 * (a[(r, c)] + a[(c, r)].conj());
            a[(r, c)] = avg;
            a[(c, r)] = avg.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);

    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[(r, c)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                // phase removal: scale column q by e^{-iφ} and row q by e^{iφ}
                let phase = apq / mag;
                let conj_phase = phase.conj();
                for k in 0..n {
                    a[(k, q)] *= conj_phase;
                }
                for k in 0..n {
                    a[(q, k)] *= phase;
                }
                for k in 0..n {
                    v[(k, q)] *= conj_phase;
                }

                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * s;
                    a[(k, q)] = akp * s + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * s;
                    a[(q, k)] = apk * s + aqk * c;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * s;
                    v[(k, q)] = vkp * s + vkq * c;
                }
            }
        }
    }

    Ok(HermitianEigen {
        values: (0..n).map(|i| a[(i, i)].re).collect(),
        vectors: v,
    })
}

/// Time evolution operator `e^{-iHt}` for a fixed Hermitian generator.
///
/// The eigendecomposition is computed once; `at(t)` is then cheap, which is
/// what sweeps over a time grid need.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigen: HermitianEigen,
}

impl Propagator {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        Ok(Self { eigen: eigh(h)? })
    }

    pub fn dim(&self) -> usize {
        self.eigen.values.len()
    }

    pub fn at(&self, t: f64) -> ComplexMatrix {
        self.eigen.map_spectrum(|l| C64::from_polar(1.0, -l * t))
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }
}

/// `U = e^{-iht}` for Hermitian `h`.
pub fn hermitian_evolve(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(Propagator::new(h)?.at(t))
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState("not square".into()));
        }
        let herm = matrix.hermiticity_error();
        if herm >= STRUCTURAL_TOL {
            return Err(Error::InvalidState(format!("hermiticity error {herm:e}")));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() >= STRUCTURAL_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min_eig = eigh(&matrix)?
            .values
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -SPECTRAL_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Wrap without validation. Callers must guarantee the invariants, which
    /// holds for anything produced by CPTP maps from a valid state.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix }
    }

    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > STRUCTURAL_TOL {
            return Err(Error::InvalidState(format!("state norm^2 = {norm}")));
        }
        Ok(Self::from_trusted(ComplexMatrix::outer(psi, psi)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_trusted(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(index, index)] = ONE;
        Self::from_trusted(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Real diagonal (computational-basis populations).
    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().into_iter().map(|z| z.re).collect()
    }

    /// `<psi| rho |psi>`.
    pub fn overlap(&self, psi: &[C64]) -> f64 {
        self.matrix
            .expectation(psi, psi)
            .expect("state dimension mismatch")
            .re
    }

    pub fn evolve(&self, u: &ComplexMatrix) -> Result<Self> {
        Ok(Self::from_trusted(u.conjugate(&self.matrix)?))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self::from_trusted(kron(&self.matrix, &other.matrix))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh(&self.matrix)
            .map(|e| e.values.into_iter().fold(f64::INFINITY, f64::min))
            .unwrap_or(f64::NEG_INFINITY)
    }
}

/// Trace out every subsystem not listed in `keep`.
///
/// `dims` lists subsystem dimensions in tensor order; kept subsystems appear
/// in the result in their original order.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    if total != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dims {dims:?} multiply to {total}, state has dim {}",
            rho.dim()
        )));
    }
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "keep indices {keep:?} out of range for {} subsystems",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len())
        .filter(|i| !keep_sorted.contains(i))
        .collect();

    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&i| dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let kept_dim: usize = kept_dims.iter().product();
    let traced_dim: usize = traced_dims.iter().product();

    // strides of each subsystem in the full index
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let full_index = |kept: usize, tr: usize| -> usize {
        let mut idx = 0;
        let mut rem = kept;
        for (pos, &sub) in keep_sorted.iter().enumerate().rev() {
            idx += (rem % kept_dims[pos]) * strides[sub];
            rem /= kept_dims[pos];
        }
        let mut rem = tr;
        for (pos, &sub) in traced.iter().enumerate().rev() {
            idx += (rem % traced_dims[pos]) * strides[sub];
            rem /= traced_dims[pos];
        }
        idx
    };

    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for r in 0..kept_dim {
        for c in 0..kept_dim {
            let mut acc = ZERO;
            for k in 0..traced_dim {
                acc += m[(full_index(r, k), full_index(c, k))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// Random full-rank density matrix `A A^dagger / tr(A A^dagger)` with complex
/// Gaussian `A`.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let data: Vec<C64> = (0..dim * dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let a = ComplexMatrix::from_vec(dim, dim, data).expect("square");
    let aa = &a * &a.adjoint();
    let tr = aa.trace().re;
    DensityMatrix::from_trusted(aa.scale_real(1.0 / tr))
}

/// Random Hermitian matrix with standard complex Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(dim, dim);
    for r in 0..dim {
        h[(r, r)] = C64::new(rng.sample(StandardNormal), 0.0);
        for c in r + 1..dim {
            let z = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            h[(r, c)] = z;
            h[(c, r)] = z.conj();
        }
    }
    h
}

/// Pauli matrices and common single-qubit gates.
pub mod pauli {
    use super::{ComplexMatrix, C64, I, ONE, ZERO};

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_vec(2, 2, vec![ZERO, -I, I, ZERO]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_vec(2, 2, vec![ONE, ZERO, ZERO, -ONE]).unwrap()
    }

    pub fn h() -> ComplexMatrix {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        ComplexMatrix::from_vec(2, 2, vec![s, s, s, -s]).unwrap()
    }

    /// `diag(e^{-iθ/2}, e^{iθ/2})`.
    pub fn rz(theta: f64) -> ComplexMatrix {
        ComplexMatrix::from_diag(&[
            C64::from_polar(1.0, -theta / 2.0),
            C64::from_polar(1.0, theta / 2.0),
        ])
    }

    /// Rotates `|0>` to `cos(θ/2)|0> + sin(θ/2)|1>`.
    pub fn ry(theta: f64) -> ComplexMatrix {
        let (s, c) = (theta / 2.0).sin_cos();
        ComplexMatrix::from_real(2, 2, &[c, -s, s, c]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real_diag(v)
    }

    #[test]
    fn kron_with_identity_factor() {
        let z = diag(&[1.0, -1.0]);
        let id = ComplexMatrix::identity(2);
        assert_eq!(kron(&id, &z), diag(&[1.0, -1.0, 1.0, -1.0]));
        assert_eq!(kron(&z, &id), diag(&[1.0, 1.0, -1.0, -1.0]));
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = |rng: &mut ChaCha8Rng| {
            let d: Vec<C64> = (0..4)
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            ComplexMatrix::from_vec(2, 2, d).unwrap()
        };
        let (a, b, c, d) = (r(&mut rng), r(&mut rng), r(&mut rng), r(&mut rng));
        let lhs = &kron(&a, &b) * &kron(&c, &d);
        let rhs = kron(&(&a * &c), &(&b * &d));
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn kron_associative_on_integers() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = ComplexMatrix::from_real(2, 1, &[5.0, -1.0]).unwrap();
        let c = ComplexMatrix::from_real(1, 3, &[2.0, 0.0, 7.0]).unwrap();
        assert_eq!(kron(&kron(&a, &b), &c), kron(&a, &kron(&b, &c)));
    }

    #[test]
    fn evolve_half_sigma_z_full_turn_is_minus_identity() {
        let h = diag(&[0.5, -0.5]);
        let u = hermitian_evolve(&h, 2.0 * std::f64::consts::PI).unwrap();
        let minus_id = ComplexMatrix::identity(2).scale_real(-1.0);
        assert!(u.max_abs_diff(&minus_id) < 1e-12);
    }

    #[test]
    fn evolve_at_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(5, &mut rng);
        let u = hermitian_evolve(&h, 0.0).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(5)) < 1e-12);
    }

    #[test]
    fn evolve_semigroup() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(4, &mut rng);
        let p = Propagator::new(&h).unwrap();
        let (t1, t2) = (0.37, 1.91);
        let lhs = &p.at(t1) * &p.at(t2);
        assert!(lhs.max_abs_diff(&p.at(t1 + t2)) < 1e-10);
        assert!(p.at(t1).unitarity_error() < 1e-10);
    }

    #[test]
    fn evolve_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            hermitian_evolve(&m, 1.0),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn eigh_reconstructs_degenerate_spectrum() {
        // spin-1 Casimir-like degenerate matrix plus complex off-diagonals
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h0 = random_hermitian(6, &mut rng);
        let e = eigh(&h0).unwrap();
        let rebuilt = e.map_spectrum(|l| C64::new(l, 0.0));
        assert!(rebuilt.max_abs_diff(&h0) < 1e-12);
        assert!(e.vectors.unitarity_error() < 1e-12);

        let degenerate = kron(&ComplexMatrix::identity(3), &pauli::y());
        let e = eigh(&degenerate).unwrap();
        assert!(
            e.map_spectrum(|l| C64::new(l, 0.0))
                .max_abs_diff(&degenerate)
                < 1e-12
        );
    }

    fn singlet() -> Vec<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![ZERO, C64::new(s, 0.0), C64::new(-s, 0.0), ZERO]
    }

    #[test]
    fn singlet_reduces_to_maximally_mixed() {
        let rho = DensityMatrix::pure(&singlet()).unwrap();
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        for keep in [0, 1] {
            let r = partial_trace(&rho, &[2, 2], &[keep]).unwrap();
            assert!(r.matrix().max_abs_diff(&half) < 1e-15);
        }
    }

    #[test]
    fn product_state_trace_recovers_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_density_matrix(3, &mut rng);
        let b = random_density_matrix(2, &mut rng);
        let ab = a.tensor(&b);
        let r = partial_trace(&ab, &[3, 2], &[0]).unwrap();
        assert!(r.matrix().max_abs_diff(a.matrix()) < 1e-14);
        let r = partial_trace(&ab, &[3, 2], &[1]).unwrap();
        assert!(r.matrix().max_abs_diff(b.matrix()) < 1e-14);
    }

    #[test]
    fn partial_trace_middle_matches_index_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rho = random_density_matrix(12, &mut rng);
        let got = partial_trace(&rho, &[2, 3, 2], &[0, 2]).unwrap();
        // naive oracle: index (a, b, c) -> a*6 + b*2 + c
        let m = rho.matrix();
        let mut want = ComplexMatrix::zeros(4, 4);
        for a in 0..2 {
            for c in 0..2 {
                for a2 in 0..2 {
                    for c2 in 0..2 {
                        let mut acc = ZERO;
                        for b in 0..3 {
                            acc += m[(a * 6 + b * 2 + c, a2 * 6 + b * 2 + c2)];
                        }
                        want[(a * 2 + c, a2 * 2 + c2)] = acc;
                    }
                }
            }
        }
        assert!(got.matrix().max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(matches!(
            partial_trace(&rho, &[2, 3], &[0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn density_matrix_validation() {
        let bad = ComplexMatrix::from_real_diag(&[1.5, -0.5]);
        assert!(DensityMatrix::new(bad).is_err());
        let ok = ComplexMatrix::from_real_diag(&[0.25, 0.75]);
        assert!(DensityMatrix::new(ok).is_ok());
    }
}
