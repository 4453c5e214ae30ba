//! Dense complex linear algebra over explicitly shaped register systems.
//!
//! A flat index over registers with dimensions `[d_0, d_1, ..., d_{r-1}]` is
//! `sum_i digit_i * prod_{j>i} d_j`: register 0 is the most significant digit.
//! Every tensor product, partial trace and partial transpose in the crate
//! goes through [`RegisterShape`] so this convention lives in one place.

mod ops;
mod random;
mod spectral;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub use ops::{apply_on_registers, partial_trace, partial_transpose, Tensor};
pub use random::{haar_state_from_rng, haar_unitary};
pub use spectral::{
    eigh, eigvalsh, fidelity, numeric_rank, pinv_sqrt, psd_sqrt, real_symmetric_eigenvalues,
    support_projector, trace_distance, trace_norm,
};

pub type C64 = num_complex::Complex64;

/// Unit-norm tolerance for state vectors.
pub const NORM_TOL: f64 = 1e-10;
/// Maximum entrywise deviation from Hermiticity accepted for `hermitian_hint`.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Negative eigenvalues above `-CLIP_TOL` are treated as zero.
pub const CLIP_TOL: f64 = 1e-9;
/// Eigenvalues below `-PSD_TOL` make an input not positive semidefinite.
pub const PSD_TOL: f64 = 1e-8;
/// Default relative threshold for numeric rank and support projectors.
pub const RANK_REL_THRESHOLD: f64 = 1e-8;

/// Allocation caps. Every constructor that can blow up checks against these.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest flat dimension of a state or operator.
    pub dim: usize,
    /// Largest number of items (types, keys, subset pairs) enumerated exhaustively.
    pub enumeration: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            dim: 16_384,
            enumeration: 1_000_000,
        }
    }
}

impl Limits {
    pub fn check_dim(&self, requested: u128) -> Result<()> {
        if requested > self.dim as u128 {
            Err(Error::DimensionOverflow {
                requested,
                cap: self.dim,
            })
        } else {
            Ok(())
        }
    }

    pub fn check_enum(&self, requested: u128) -> Result<()> {
        if requested > self.enumeration as u128 {
            Err(Error::EnumerationTooLarge {
                requested,
                cap: self.enumeration,
            })
        } else {
            Ok(())
        }
    }

    /// Checks `base^exp` against the dimension cap without overflowing.
    pub fn check_power(&self, base: usize, exp: usize) -> Result<()> {
        let mut total: u128 = 1;
        for _ in 0..exp {
            total = total.saturating_mul(base as u128);
        }
        self.check_dim(total)
    }
}

/// Ordered per-register dimensions of a composite system.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegisterShape {
    dims: Vec<usize>,
    total: usize,
}

impl RegisterShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::ShapeMismatch(format!(
                "register dimension {d} is below 2"
            )));
        }
        let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        let total = total.ok_or(Error::DimensionOverflow {
            requested: u128::MAX,
            cap: usize::MAX,
        })?;
        Ok(RegisterShape { dims, total })
    }

    /// `count` registers of dimension `dim` each.
    pub fn uniform(dim: usize, count: usize) -> Result<Self> {
        Self::new(vec![dim; count])
    }

    /// The shape with no registers (flat dimension 1).
    pub fn scalar() -> Self {
        RegisterShape {
            dims: Vec::new(),
            total: 1,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_registers(&self) -> usize {
        self.dims.len()
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Place value of each register's digit in the flat index.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    pub fn digits(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for i in (0..self.dims.len()).rev() {
            out[i] = flat % self.dims[i];
            flat /= self.dims[i];
        }
        out
    }

    pub fn flat(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&x, &d)| acc * d + x)
    }

    pub fn concat(&self, other: &RegisterShape) -> RegisterShape {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        RegisterShape {
            dims,
            total: self.total * other.total,
        }
    }

    pub(crate) fn check_registers(&self, regs: &[usize]) -> Result<()> {
        for &r in regs {
            if r >= self.dims.len() {
                return Err(Error::BadRegisterIndex {
                    index: r,
                    registers: self.dims.len(),
                });
            }
        }
        Ok(())
    }
}

/// A normalised pure state on a register system.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    shape: RegisterShape,
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(shape: RegisterShape, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != shape.total() {
            return Err(Error::ShapeMismatch(format!(
                "{} amplitudes for flat dimension {}",
                amplitudes.len(),
                shape.total()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::ParameterError(format!(
                "state norm {norm} differs from 1"
            )));
        }
        Ok(StateVector { shape, amplitudes })
    }

    /// Normalises `amplitudes` before wrapping them.
    pub fn normalized(shape: RegisterShape, amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::ParameterError("zero vector".into()));
        }
        Self::new(shape, amplitudes.unscale(norm))
    }

    pub fn basis(shape: RegisterShape, index: usize) -> Result<Self> {
        if index >= shape.total() {
            return Err(Error::ShapeMismatch(format!(
                "basis index {index} out of range {}",
                shape.total()
            )));
        }
        let mut v = DVector::zeros(shape.total());
        v[index] = C64::new(1.0, 0.0);
        Ok(StateVector {
            shape,
            amplitudes: v,
        })
    }

    pub fn shape(&self) -> &RegisterShape {
        &self.shape
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(
                "inner product of different shapes".into(),
            ));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn to_density(&self) -> Operator {
        Operator {
            shape: self.shape.clone(),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
            hermitian_hint: true,
        }
    }
}

/// A square operator on a register system.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    shape: RegisterShape,
    matrix: DMatrix<C64>,
    hermitian_hint: bool,
}

impl Operator {
    pub fn new(shape: RegisterShape, matrix: DMatrix<C64>) -> Result<Self> {
        let n = shape.total();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix for flat dimension {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Operator {
            shape,
            matrix,
            hermitian_hint: false,
        })
    }

    /// Wraps a Hermitian matrix, verifying the Hermiticity tolerance.
    pub fn hermitian(shape: RegisterShape, matrix: DMatrix<C64>) -> Result<Self> {
        let mut op = Self::new(shape, matrix)?;
        let dev = op.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::PreconditionViolated(format!(
                "matrix deviates from Hermitian by {dev:e}"
            )));
        }
        op.hermitian_hint = true;
        Ok(op)
    }

    /// Wraps a matrix built Hermitian by construction, skipping the check.
    pub(crate) fn hermitian_unchecked(shape: RegisterShape, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), shape.total());
        Operator {
            shape,
            matrix,
            hermitian_hint: true,
        }
    }

    pub fn zeros(shape: RegisterShape) -> Self {
        let n = shape.total();
        Self::hermitian_unchecked(shape, DMatrix::zeros(n, n))
    }

    pub fn identity(shape: RegisterShape) -> Self {
        let n = shape.total();
        Self::hermitian_unchecked(shape, DMatrix::identity(n, n))
    }

    pub fn maximally_mixed(shape: RegisterShape) -> Self {
        let n = shape.total();
        Self::hermitian_unchecked(shape, DMatrix::identity(n, n).unscale(n as f64))
    }

    pub fn shape(&self) -> &RegisterShape {
        &self.shape
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.shape.total()
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            shape: self.shape.clone(),
            matrix: self.matrix.adjoint(),
            hermitian_hint: self.hermitian_hint,
        }
    }

    pub fn scale(&self, factor: f64) -> Operator {
        Operator {
            shape: self.shape.clone(),
            matrix: self.matrix.scale(factor),
            hermitian_hint: self.hermitian_hint,
        }
    }

    fn check_same_shape(&self, other: &Operator) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape.dims(),
                other.shape.dims()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_same_shape(other)?;
        Ok(Operator {
            shape: self.shape.clone(),
            matrix: &self.matrix + &other.matrix,
            hermitian_hint: self.hermitian_hint && other.hermitian_hint,
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.check_same_shape(other)?;
        Ok(Operator {
            shape: self.shape.clone(),
            matrix: &self.matrix - &other.matrix,
            hermitian_hint: self.hermitian_hint && other.hermitian_hint,
        })
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        self.check_same_shape(other)?;
        Ok(Operator {
            shape: self.shape.clone(),
            matrix: &self.matrix * &other.matrix,
            hermitian_hint: false,
        })
    }

    /// `U self U^dagger`.
    pub fn conjugate(&self, unitary: &DMatrix<C64>) -> Result<Operator> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::ShapeMismatch(
                "conjugating unitary has wrong size".into(),
            ));
        }
        Ok(Operator {
            shape: self.shape.clone(),
            matrix: unitary * &self.matrix * unitary.adjoint(),
            hermitian_hint: self.hermitian_hint,
        })
    }

    /// `D self D^dagger` for the diagonal unitary `D = diag(phases)`.
    pub fn conjugate_diagonal(&self, phases: &[C64]) -> Result<Operator> {
        let n = self.dim();
        if phases.len() != n {
            return Err(Error::ShapeMismatch("phase vector has wrong length".into()));
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| {
            phases[i] * self.matrix[(i, j)] * phases[j].conj()
        });
        Ok(Operator {
            shape: self.shape.clone(),
            matrix,
            hermitian_hint: self.hermitian_hint,
        })
    }

    /// Entrywise product with a real matrix given as a closure over `(row, col)`.
    pub(crate) fn mask(&self, weight: impl Fn(usize, usize) -> f64) -> Operator {
        let n = self.dim();
        Operator {
            shape: self.shape.clone(),
            matrix: DMatrix::from_fn(n, n, |i, j| self.matrix[(i, j)] * weight(i, j)),
            hermitian_hint: self.hermitian_hint,
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Operator) -> Result<C64> {
        self.check_same_shape(other)?;
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.matrix[(i, k)] * other.matrix[(k, i)];
            }
        }
        Ok(acc)
    }

    /// Verifies the density-matrix contract: Hermitian, unit trace, PSD up to clipping.
    pub fn check_density(&self) -> Result<()> {
        let dev = self.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::PreconditionViolated(format!(
                "density matrix deviates from Hermitian by {dev:e}"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::PreconditionViolated(format!("trace {tr} is not 1")));
        }
        let min = eigvalsh(self)?.into_iter().fold(f64::INFINITY, f64::min);
        if min < -CLIP_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(())
    }

    /// Uniform average of operators sharing one shape.
    pub fn average<'a>(items: impl IntoIterator<Item = &'a Operator>) -> Result<Operator> {
        let mut iter = items.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::ParameterError("average of no operators".into()))?;
        let mut acc = first.clone();
        let mut count = 1usize;
        for op in iter {
            acc.check_same_shape(op)?;
            acc.matrix += &op.matrix;
            acc.hermitian_hint &= op.hermitian_hint;
            count += 1;
        }
        acc.matrix.unscale_mut(count as f64);
        Ok(acc)
    }
}
