//! Initial states: deviation density matrices for the four-spin register.
//!
//! At high temperature the density matrix splits into a uniform background
//! (which never evolves and carries the unit trace) plus a small deviation
//! part; everything in this crate propagates and reports the deviation
//! coefficients `r_nk` with the overall temperature prefactor scaled out to
//! unity. The four lowest basis states — both high-frequency spins in their
//! ground state, spins 0 and 1 forming a two-qubit register — are the
//! *active* states and are prepared in a chosen pure state or classical
//! mixture; the remaining twelve *passive* states keep the fixed ensemble
//! populations of the reference four-spin molecule.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::operators::{BasisIndex, SpinSystemConfig};
use crate::scalar::{cabs_inf, fmax, Real};

/// Dimension of the active register block.
pub const ACTIVE_DIM: usize = 4;

/// Equilibrium deviation populations of the passive states (basis indices
/// 4 through 15) of the reference molecule, in index order. Exact rationals,
/// so construction tests can compare bitwise.
const PASSIVE_DIAGONAL: [f64; 12] = [
    -0.5, 0.5, 0.5, 0.5, 0.5, -0.5, -0.5, -0.5, -1.0, 0.0, 0.0, 0.0,
];

/// How an active block was produced; used only for human-readable labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ActiveKind {
    Digital(usize),
    Superposition,
    Custom,
}

/// 4×4 block of deviation coefficients for the active register states.
///
/// Invariants, enforced at construction: Hermitian and unit diagonal sum
/// (each within 10⁻¹⁰). Blocks built from amplitudes are additionally rank-1
/// projectors.
#[derive(Debug, Clone)]
pub struct ActiveBlock<T: Real> {
    m: Matrix4<Complex<T>>,
    kind: ActiveKind,
}

/// Equality compares coefficients only; the provenance label is metadata.
impl<T: Real> PartialEq for ActiveBlock<T> {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m
    }
}

impl<T: Real> ActiveBlock<T> {
    /// Wraps a caller-supplied block after checking its invariants.
    pub fn from_matrix(m: Matrix4<Complex<T>>) -> Result<Self> {
        let block = Self {
            m,
            kind: ActiveKind::Custom,
        };
        block.validate()?;
        Ok(block)
    }

    /// Wraps a block whose invariants are guaranteed by construction.
    pub(crate) fn from_matrix_unchecked(m: Matrix4<Complex<T>>, kind: ActiveKind) -> Self {
        Self { m, kind }
    }

    /// Checks Hermiticity and unit diagonal sum, each within 10⁻¹⁰.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_residue();
        if herm > T::lit(1e-10) {
            return Err(Error::InvalidActiveBlock {
                reason: "active block is not Hermitian",
                residue: herm.as_f64(),
            });
        }
        let tr = self.trace();
        let one = Complex::new(T::one(), T::zero());
        let tr_res = cabs_inf(tr - one);
        if tr_res > T::lit(1e-10) {
            return Err(Error::InvalidActiveBlock {
                reason: "active diagonal must sum to 1",
                residue: tr_res.as_f64(),
            });
        }
        Ok(())
    }

    /// Coefficient at (row, col).
    pub fn entry(&self, row: usize, col: usize) -> Complex<T> {
        self.m[(row, col)]
    }

    /// Borrow of the underlying 4×4 matrix.
    pub fn as_matrix(&self) -> &Matrix4<Complex<T>> {
        &self.m
    }

    /// Sum of the diagonal.
    pub fn trace(&self) -> Complex<T> {
        (0..ACTIVE_DIM)
            .map(|i| self.m[(i, i)])
            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    /// Max elementwise magnitude of `A - A^H`.
    pub fn hermiticity_residue(&self) -> T {
        let mut r = T::zero();
        for j in 0..ACTIVE_DIM {
            for i in 0..=j {
                r = fmax(r, cabs_inf(self.m[(i, j)] - self.m[(j, i)].conj()));
            }
        }
        r
    }

    /// Real parts of the diagonal (the register populations).
    pub fn diagonal_populations(&self) -> [T; ACTIVE_DIM] {
        [
            self.m[(0, 0)].re,
            self.m[(1, 1)].re,
            self.m[(2, 2)].re,
            self.m[(3, 3)].re,
        ]
    }

    /// Human-readable label for reports, e.g. `digital |0001>` or
    /// `superposition diag=[0.3000, 0.2000, 0.3333, 0.1667]`.
    pub fn describe(&self) -> String {
        match self.kind {
            ActiveKind::Digital(k) => {
                let ket = BasisIndex::new(k, 4).expect("active index is within 0..16");
                format!("digital {ket}")
            }
            ActiveKind::Superposition | ActiveKind::Custom => {
                let d = self.diagonal_populations();
                let prefix = if self.kind == ActiveKind::Superposition {
                    "superposition"
                } else {
                    "custom"
                };
                format!(
                    "{prefix} diag=[{:.4}, {:.4}, {:.4}, {:.4}]",
                    d[0].as_f64(),
                    d[1].as_f64(),
                    d[2].as_f64(),
                    d[3].as_f64()
                )
            }
        }
    }
}

/// Active block with all population on register state `k` (0 ≤ k ≤ 3):
/// `r_kk = 1`, everything else zero.
pub fn digital_active<T: Real>(k: usize) -> Result<ActiveBlock<T>> {
    if k >= ACTIVE_DIM {
        return Err(Error::ActiveIndexOutOfRange { index: k });
    }
    let mut m = Matrix4::zeros();
    m[(k, k)] = Complex::new(T::one(), T::zero());
    Ok(ActiveBlock::from_matrix_unchecked(
        m,
        ActiveKind::Digital(k),
    ))
}

/// Active block for the pure register state with amplitudes `c`:
/// `r_nk = conj(c_n) · c_k`.
///
/// The amplitudes must be normalized within 10⁻¹⁰; they are then renormalized
/// exactly so the projector trace is 1 to rounding. Note the index
/// convention: row `n` carries the *conjugated* amplitude, so for complex
/// amplitudes the block is the transpose of the usual outer product
/// `|c⟩⟨c|`; both conventions are Hermitian and evolve identically up to
/// conjugation of the reported off-diagonal phases.
pub fn embed_superposition<T: Real>(c: [Complex<T>; ACTIVE_DIM]) -> Result<ActiveBlock<T>> {
    let norm_sqr = c.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
    let norm = num_traits::Float::sqrt(norm_sqr);
    if num_traits::Float::abs(norm_sqr - T::one()) > T::lit(1e-10) {
        return Err(Error::UnnormalizedAmplitudes {
            norm: norm.as_f64(),
        });
    }
    let mut m = Matrix4::zeros();
    for n in 0..ACTIVE_DIM {
        for k in 0..ACTIVE_DIM {
            m[(n, k)] = c[n].conj() * c[k] / norm_sqr;
        }
    }
    Ok(ActiveBlock::from_matrix_unchecked(
        m,
        ActiveKind::Superposition,
    ))
}

/// Full deviation density matrix of the spin cluster.
///
/// Stores the dimensionless coefficient matrix `r_nk`; the uniform
/// background and the temperature prefactor are scaled out. Hermitian within
/// 10⁻¹² elementwise (the bundled constructors produce exactly Hermitian
/// matrices; the tolerance only concerns foreign inputs).
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationMatrix<T: Real> {
    r: DMatrix<Complex<T>>,
}

impl<T: Real> DeviationMatrix<T> {
    /// Wraps a caller-supplied coefficient matrix, checking that it is
    /// square with power-of-two dimension and Hermitian within 10⁻¹².
    pub fn from_matrix(r: DMatrix<Complex<T>>) -> Result<Self> {
        if r.nrows() != r.ncols() {
            return Err(Error::DimensionMismatch {
                expected: r.nrows(),
                actual: r.ncols(),
            });
        }
        if !r.nrows().is_power_of_two() {
            return Err(Error::InvalidConfig {
                reason: format!("state dimension {} is not a power of two", r.nrows()),
            });
        }
        let out = Self { r };
        let herm = out.hermiticity_residue();
        if herm > T::lit(1e-12) {
            return Err(Error::NotHermitian {
                residue: herm.as_f64(),
            });
        }
        Ok(out)
    }

    /// Wraps a matrix whose invariants are guaranteed by construction.
    pub(crate) fn from_matrix_unchecked(r: DMatrix<Complex<T>>) -> Self {
        Self { r }
    }

    /// Matrix dimension (`2^n_spins`).
    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    /// Number of spins, recovered from the dimension.
    pub fn n_spins(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    /// Coefficient at (row, col).
    pub fn entry(&self, row: usize, col: usize) -> Complex<T> {
        self.r[(row, col)]
    }

    /// Borrow of the underlying coefficient matrix.
    pub fn as_matrix(&self) -> &DMatrix<Complex<T>> {
        &self.r
    }

    /// Consumes into the underlying coefficient matrix.
    pub fn into_matrix(self) -> DMatrix<Complex<T>> {
        self.r
    }

    /// Sum of the diagonal; 0 (to rounding) for the thermal-deviation family.
    pub fn trace(&self) -> Complex<T> {
        (0..self.dim())
            .map(|i| self.r[(i, i)])
            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    /// Max elementwise magnitude of `r - r^H`.
    pub fn hermiticity_residue(&self) -> T {
        let mut res = T::zero();
        for j in 0..self.dim() {
            for i in 0..=j {
                res = fmax(res, cabs_inf(self.r[(i, j)] - self.r[(j, i)].conj()));
            }
        }
        res
    }

    /// Second moment `trace(r²)`; conserved under the closed evolution, so
    /// its drift measures integrator quality. Computed as `Σ|r_ij|²`, which
    /// equals the trace for Hermitian input.
    pub fn second_moment(&self) -> T {
        self.r.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    /// Diagonal populations as reals.
    ///
    /// Fails if any diagonal entry carries an imaginary part above 10⁻⁸
    /// (the bundled propagators keep the diagonal exactly or near-exactly
    /// real; a larger residue signals a corrupted state).
    pub fn populations(&self) -> Result<Vec<T>> {
        self.populations_within(T::lit(1e-8))
    }

    /// Populations with a caller-chosen imaginary-residue bound; the
    /// sampling path uses a tighter bound than the public accessor.
    pub(crate) fn populations_within(&self, tol: T) -> Result<Vec<T>> {
        let mut residue = T::zero();
        for i in 0..self.dim() {
            residue = fmax(residue, num_traits::Float::abs(self.r[(i, i)].im));
        }
        if residue > tol {
            return Err(Error::NonRealPopulations {
                residue: residue.as_f64(),
            });
        }
        Ok((0..self.dim()).map(|i| self.r[(i, i)].re).collect())
    }

    /// Copy of the active 4×4 register block (indices 0–3). Defined for the
    /// four-spin cluster only.
    pub fn active_block(&self) -> Result<ActiveBlock<T>> {
        if self.n_spins() != 4 {
            return Err(Error::RequiresFourSpins {
                n_spins: self.n_spins(),
            });
        }
        let mut m = Matrix4::zeros();
        for i in 0..ACTIVE_DIM {
            for j in 0..ACTIVE_DIM {
                m[(i, j)] = self.r[(i, j)];
            }
        }
        Ok(ActiveBlock::from_matrix_unchecked(m, ActiveKind::Custom))
    }
}

/// Builds the initial deviation matrix of the thermal ensemble with the
/// active register prepared in `active`.
///
/// The active block is placed on basis indices 0–3, the passive diagonal
/// takes the fixed ensemble values of the reference molecule, and all
/// passive off-diagonals are zero. The active block is validated (Hermitian
/// and unit trace within 10⁻¹⁰) and then replaced by its Hermitian part
/// `(A + A^H)/2`, so the result is exactly Hermitian; blocks from the
/// bundled constructors are unchanged by this.
///
/// Only the four-spin cluster is supported: the passive populations are
/// specific to the reference molecule.
pub fn thermal_deviation<T: Real>(
    cfg: &SpinSystemConfig<T>,
    active: &ActiveBlock<T>,
) -> Result<DeviationMatrix<T>> {
    if cfg.n_spins() != 4 {
        return Err(Error::RequiresFourSpins {
            n_spins: cfg.n_spins(),
        });
    }
    active.validate()?;

    let dim = cfg.dim();
    let mut r = DMatrix::<Complex<T>>::zeros(dim, dim);
    let half = Complex::new(T::lit(0.5), T::zero());
    for i in 0..ACTIVE_DIM {
        for j in 0..ACTIVE_DIM {
            r[(i, j)] = (active.entry(i, j) + active.entry(j, i).conj()) * half;
        }
    }
    for (offset, &value) in PASSIVE_DIAGONAL.iter().enumerate() {
        r[(ACTIVE_DIM + offset, ACTIVE_DIM + offset)] = Complex::new(T::lit(value), T::zero());
    }
    Ok(DeviationMatrix::from_matrix_unchecked(r))
}
