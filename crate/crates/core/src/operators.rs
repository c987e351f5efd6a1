//! Spin operators and the rotating-frame Hamiltonian.
//!
//! The system is a cluster of `n` spin-1/2 nuclei with pairwise Ising
//! coupling, a static field gradient (one Larmor frequency per spin), and a
//! transverse drive described in the frame rotating at the drive frequency.
//! Basis states are labelled by the decimal index whose bit `a` holds the
//! state of spin `a` (bit value 0 = single-spin ground state, `I^z`
//! eigenvalue +1/2); for four spins, bit 3 is the most significant bit, so
//! index 1 is the state with only spin 0 flipped.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cabs_inf, fmax, Real};

/// Largest supported cluster size; operators are stored dense, so the memory
/// cost is `4^n` complex entries per operator.
pub const MAX_SPINS: usize = 12;

/// Computational-basis state label for an `n`-spin cluster.
///
/// Wraps the decimal index together with the cluster size so the bit-string
/// view is always well defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    index: usize,
    n_spins: usize,
}

impl BasisIndex {
    /// Builds a label, checking `index < 2^n_spins`.
    pub fn new(index: usize, n_spins: usize) -> Result<Self> {
        let dim = 1usize << n_spins;
        if index >= dim {
            return Err(Error::BasisIndexOutOfRange { index, dim });
        }
        Ok(Self { index, n_spins })
    }

    /// Builds a label from per-spin states, `bits[a]` being the state of
    /// spin `a` (0 = ground, 1 = flipped).
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut index = 0usize;
        for (a, &b) in bits.iter().enumerate() {
            debug_assert!(b <= 1, "spin states are 0 or 1");
            index |= usize::from(b & 1) << a;
        }
        Self {
            index,
            n_spins: bits.len(),
        }
    }

    /// Decimal index of the state.
    pub fn index(self) -> usize {
        self.index
    }

    /// Number of spins in the cluster this label belongs to.
    pub fn n_spins(self) -> usize {
        self.n_spins
    }

    /// State of spin `a` (0 = ground, 1 = flipped).
    pub fn spin_state(self, a: usize) -> u8 {
        ((self.index >> a) & 1) as u8
    }

    /// Per-spin states, entry `a` describing spin `a`.
    pub fn bits(self) -> Vec<u8> {
        (0..self.n_spins).map(|a| self.spin_state(a)).collect()
    }

    /// Number of flipped spins.
    pub fn excitation_count(self) -> u32 {
        self.index.count_ones()
    }

    /// `I^z` eigenvalue of spin `a` in this state: +1/2 for ground, -1/2 for
    /// flipped.
    pub fn z_half<T: Real>(self, a: usize) -> T {
        if self.spin_state(a) == 0 {
            T::lit(0.5)
        } else {
            T::lit(-0.5)
        }
    }
}

impl std::fmt::Display for BasisIndex {
    /// Ket notation with the highest spin leftmost, e.g. `|0001>` for index 1
    /// of a four-spin cluster.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|")?;
        for a in (0..self.n_spins).rev() {
            write!(f, "{}", self.spin_state(a))?;
        }
        write!(f, ">")
    }
}

/// Parameters of the spin cluster and its drive.
///
/// All frequencies are angular and dimensionless (fix the unit of time by
/// choosing the unit of the coupling); `Default` supplies the four-spin
/// reference parameter set used by the bundled experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystemConfig<T: Real> {
    omega: Vec<T>,
    j_coupling: T,
    rabi: T,
    rf_freq: T,
}

impl<T: Real> SpinSystemConfig<T> {
    /// Builds a validated configuration.
    ///
    /// `omega` holds one strictly positive Larmor frequency per spin (its
    /// length sets the cluster size), `j_coupling` the uniform Ising coupling,
    /// `rabi` the non-negative drive amplitude and `rf_freq` the frame/drive
    /// frequency.
    pub fn new(omega: Vec<T>, j_coupling: T, rabi: T, rf_freq: T) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::InvalidConfig {
                reason: "at least one spin is required".into(),
            });
        }
        if omega.len() > MAX_SPINS {
            return Err(Error::InvalidConfig {
                reason: format!(
                    "{} spins exceed the dense-operator limit of {MAX_SPINS}",
                    omega.len()
                ),
            });
        }
        for (a, &w) in omega.iter().enumerate() {
            if w <= T::zero() || !num_traits::Float::is_finite(w) {
                return Err(Error::InvalidConfig {
                    reason: format!("omega[{a}] must be strictly positive and finite"),
                });
            }
        }
        if rabi < T::zero() || !num_traits::Float::is_finite(rabi) {
            return Err(Error::InvalidConfig {
                reason: "rabi must be non-negative and finite".into(),
            });
        }
        if !num_traits::Float::is_finite(j_coupling) || !num_traits::Float::is_finite(rf_freq) {
            return Err(Error::InvalidConfig {
                reason: "j_coupling and rf_freq must be finite".into(),
            });
        }
        Ok(Self {
            omega,
            j_coupling,
            rabi,
            rf_freq,
        })
    }

    /// Number of spins in the cluster.
    pub fn n_spins(&self) -> usize {
        self.omega.len()
    }

    /// Hilbert-space dimension, `2^n_spins`.
    pub fn dim(&self) -> usize {
        1 << self.n_spins()
    }

    /// Larmor frequency of spin `a`.
    pub fn omega(&self, a: usize) -> T {
        self.omega[a]
    }

    /// All Larmor frequencies, spin 0 first.
    pub fn omegas(&self) -> &[T] {
        &self.omega
    }

    /// Uniform Ising coupling between every spin pair.
    pub fn j_coupling(&self) -> T {
        self.j_coupling
    }

    /// Drive (Rabi) amplitude.
    pub fn rabi(&self) -> T {
        self.rabi
    }

    /// Frame/drive frequency.
    pub fn rf_freq(&self) -> T {
        self.rf_freq
    }

    /// Copy with a different drive amplitude.
    pub fn with_rabi(&self, rabi: T) -> Result<Self> {
        Self::new(self.omega.clone(), self.j_coupling, rabi, self.rf_freq)
    }

    /// Copy with a different drive frequency.
    pub fn with_rf_freq(&self, rf_freq: T) -> Result<Self> {
        Self::new(self.omega.clone(), self.j_coupling, self.rabi, rf_freq)
    }

    /// Copy with a different Ising coupling.
    pub fn with_j_coupling(&self, j_coupling: T) -> Result<Self> {
        Self::new(self.omega.clone(), j_coupling, self.rabi, self.rf_freq)
    }
}

impl<T: Real> Default for SpinSystemConfig<T> {
    /// Four-spin reference parameters: Larmor frequencies 100, 200, 300, 400,
    /// coupling 10, drive amplitude 0.1, drive frequency 130 (the resonance
    /// for flipping spin 0 when all other spins are in their ground state).
    fn default() -> Self {
        Self {
            omega: [100.0, 200.0, 300.0, 400.0].map(T::lit).to_vec(),
            j_coupling: T::lit(10.0),
            rabi: T::lit(0.1),
            rf_freq: T::lit(130.0),
        }
    }
}

/// Single-spin operator component selected by [`build_spin_operator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// `I^x`, off-diagonal 1/2.
    X,
    /// `I^y`, off-diagonal -i/2 and +i/2.
    Y,
    /// `I^z`, diag(+1/2, -1/2).
    Z,
    /// Raising operator `I^+ = I^x + i I^y`, mapping the flipped state to the
    /// ground state with unit amplitude.
    Plus,
}

/// Dense complex matrix acting on the full cluster Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T: Real> {
    m: DMatrix<Complex<T>>,
}

impl<T: Real> OperatorMatrix<T> {
    /// Wraps a dense matrix, checking that it is square with a power-of-two
    /// dimension. No Hermiticity requirement: non-Hermitian observables such
    /// as the raising operator are legitimate instances.
    pub fn from_matrix(m: DMatrix<Complex<T>>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                actual: m.ncols(),
            });
        }
        if !m.nrows().is_power_of_two() {
            return Err(Error::InvalidConfig {
                reason: format!("operator dimension {} is not a power of two", m.nrows()),
            });
        }
        Ok(Self { m })
    }

    /// Matrix dimension (`2^n_spins`).
    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// Entry at (row, col).
    pub fn entry(&self, row: usize, col: usize) -> Complex<T> {
        self.m[(row, col)]
    }

    /// Borrow of the underlying dense matrix.
    pub fn as_matrix(&self) -> &DMatrix<Complex<T>> {
        &self.m
    }

    /// Consumes into the underlying dense matrix.
    pub fn into_matrix(self) -> DMatrix<Complex<T>> {
        self.m
    }

    /// Max elementwise magnitude of `M - M^H`; zero for exactly Hermitian
    /// matrices.
    pub fn hermiticity_residue(&self) -> T {
        let mut r = T::zero();
        for j in 0..self.dim() {
            for i in 0..=j {
                r = fmax(r, cabs_inf(self.m[(i, j)] - self.m[(j, i)].conj()));
            }
        }
        r
    }

    /// Number of diagonal entries that are not exactly zero.
    pub fn nonzero_diagonal_count(&self) -> usize {
        (0..self.dim())
            .filter(|&i| self.m[(i, i)] != Complex::new(T::zero(), T::zero()))
            .count()
    }

    /// Number of off-diagonal entries that are not exactly zero.
    pub fn nonzero_off_diagonal_count(&self) -> usize {
        let mut count = 0;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                if i != j && self.m[(i, j)] != Complex::new(T::zero(), T::zero()) {
                    count += 1;
                }
            }
        }
        count
    }

    /// Max elementwise magnitude over the matrix.
    pub fn max_abs(&self) -> T {
        self.m
            .iter()
            .fold(T::zero(), |acc, z| fmax(acc, cabs_inf(*z)))
    }
}

/// The four single-spin matrices in the (ground, flipped) basis.
fn single_spin_matrix<T: Real>(axis: Axis) -> DMatrix<Complex<T>> {
    let zero = Complex::new(T::zero(), T::zero());
    let half = Complex::new(T::lit(0.5), T::zero());
    let ihalf = Complex::new(T::zero(), T::lit(0.5));
    let one = Complex::new(T::one(), T::zero());
    let (m00, m01, m10, m11) = match axis {
        Axis::X => (zero, half, half, zero),
        Axis::Y => (zero, -ihalf, ihalf, zero),
        Axis::Z => (half, zero, zero, -half),
        Axis::Plus => (zero, one, zero, zero),
    };
    DMatrix::from_row_slice(2, 2, &[m00, m01, m10, m11])
}

/// Embeds the single-spin operator `axis` acting on spin `spin_index` into
/// the full cluster space by Kronecker products with identities.
///
/// The factor order follows the index convention: spin `n-1` is the leftmost
/// (most significant) factor, spin 0 the rightmost.
pub fn build_spin_operator<T: Real>(
    config: &SpinSystemConfig<T>,
    axis: Axis,
    spin_index: usize,
) -> Result<OperatorMatrix<T>> {
    let n = config.n_spins();
    if spin_index >= n {
        return Err(Error::SpinIndexOutOfRange {
            index: spin_index,
            n_spins: n,
        });
    }
    let op = single_spin_matrix::<T>(axis);
    let left =
        DMatrix::<Complex<T>>::identity(1 << (n - 1 - spin_index), 1 << (n - 1 - spin_index));
    let right = DMatrix::<Complex<T>>::identity(1 << spin_index, 1 << spin_index);
    let full = left.kronecker(&op).kronecker(&right);
    OperatorMatrix::from_matrix(full)
}

/// Rotating-frame Hamiltonian (units of the reduced Planck constant):
///
/// ```text
/// H = - sum_a [ (omega_a - omega_rf) I^z_a
///               + 2 J sum_{b>a} I^z_a I^z_b
///               + Omega I^x_a ]
/// ```
///
/// The result is Hermitian by construction (exactly, not merely to rounding):
/// every term is assembled from exactly symmetric pieces.
pub fn build_hamiltonian<T: Real>(config: &SpinSystemConfig<T>) -> Result<OperatorMatrix<T>> {
    let n = config.n_spins();
    let dim = config.dim();
    let mut h = DMatrix::<Complex<T>>::zeros(dim, dim);

    // Diagonal part: Zeeman detunings and Ising couplings, evaluated per
    // basis state from the z eigenvalues. This is algebraically identical to
    // summing the embedded I^z products, but exact and O(dim * n^2).
    for idx in 0..dim {
        let state = BasisIndex::new(idx, n)?;
        let mut e = T::zero();
        for a in 0..n {
            let sa: T = state.z_half(a);
            e -= (config.omega(a) - config.rf_freq()) * sa;
            for b in (a + 1)..n {
                let sb: T = state.z_half(b);
                e -= T::lit(2.0) * config.j_coupling() * sa * sb;
            }
        }
        h[(idx, idx)] = Complex::new(e, T::zero());
    }

    // Transverse drive: -Omega * I^x_a couples every pair of states that
    // differ in exactly one spin, with matrix element -Omega/2 on both sides.
    let half_rabi = config.rabi() * T::lit(0.5);
    if half_rabi != T::zero() {
        for idx in 0..dim {
            for a in 0..n {
                let flipped = idx ^ (1 << a);
                h[(flipped, idx)] -= Complex::new(half_rabi, T::zero());
            }
        }
    }

    OperatorMatrix::from_matrix(h)
}

/// Energies of all basis states with the drive and the rotating frame
/// switched off (`Omega = 0`, `omega_rf = 0`), i.e. the bare level diagram of
/// the cluster. Returned sorted by ascending energy (ties broken by index).
pub fn spectrum_at_zero_field<T: Real>(
    config: &SpinSystemConfig<T>,
) -> Result<Vec<(BasisIndex, T)>> {
    let bare = SpinSystemConfig::new(
        config.omegas().to_vec(),
        config.j_coupling(),
        T::zero(),
        T::zero(),
    )?;
    let h = build_hamiltonian(&bare)?;
    let n = config.n_spins();
    let mut levels: Vec<(BasisIndex, T)> = (0..config.dim())
        .map(|idx| {
            let state = BasisIndex::new(idx, n).expect("index in range");
            (state, h.entry(idx, idx).re)
        })
        .collect();
    levels.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .expect("finite energies")
            .then(a.0.index().cmp(&b.0.index()))
    });
    Ok(levels)
}

/// Max elementwise magnitude of the commutator `[A, B]`; test helper for
/// conservation-law checks.
pub fn commutator_residue<T: Real>(a: &OperatorMatrix<T>, b: &OperatorMatrix<T>) -> T {
    let ab = a.as_matrix() * b.as_matrix();
    let ba = b.as_matrix() * a.as_matrix();
    (ab - ba)
        .iter()
        .fold(T::zero(), |acc, z| fmax(acc, cabs_inf(*z)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> SpinSystemConfig<f64> {
        SpinSystemConfig::default()
    }

    #[test]
    fn basis_index_bit_roundtrip() {
        let b = BasisIndex::from_bits(&[1, 0, 0, 0]); // spin 0 flipped
        assert_eq!(b.index(), 1);
        assert_eq!(b.to_string(), "|0001>");
        let c = BasisIndex::new(0b1010, 4).unwrap();
        assert_eq!(c.bits(), vec![0, 1, 0, 1]);
        assert_eq!(c.excitation_count(), 2);
        assert_eq!(BasisIndex::from_bits(&c.bits()), c);
    }

    #[test]
    fn basis_index_rejects_out_of_range() {
        assert!(matches!(
            BasisIndex::new(16, 4),
            Err(Error::BasisIndexOutOfRange { index: 16, dim: 16 })
        ));
    }

    #[test]
    fn config_validation_rejects_bad_parameters() {
        assert!(SpinSystemConfig::<f64>::new(vec![], 1.0, 0.1, 1.0).is_err());
        assert!(SpinSystemConfig::new(vec![100.0, -1.0], 1.0, 0.1, 1.0).is_err());
        assert!(SpinSystemConfig::new(vec![100.0], 1.0, -0.1, 1.0).is_err());
        assert!(SpinSystemConfig::new(vec![100.0], f64::NAN, 0.1, 1.0).is_err());
        assert!(SpinSystemConfig::new(vec![100.0; 13], 1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn z_operator_ground_state_eigenvalue() {
        let cfg = reference();
        let z0 = build_spin_operator(&cfg, Axis::Z, 0).unwrap();
        // all-ground state: spin 0 contributes +1/2
        assert_eq!(z0.entry(0, 0), num_complex::Complex::new(0.5, 0.0));
        // state with spin 0 flipped: -1/2
        assert_eq!(z0.entry(1, 1), num_complex::Complex::new(-0.5, 0.0));
    }

    #[test]
    fn x_operator_couples_single_flips() {
        let cfg = reference();
        let x0 = build_spin_operator(&cfg, Axis::X, 0).unwrap();
        assert_eq!(x0.entry(0, 1), num_complex::Complex::new(0.5, 0.0));
        assert_eq!(x0.entry(1, 0), num_complex::Complex::new(0.5, 0.0));
        assert_eq!(x0.entry(0, 2), num_complex::Complex::new(0.0, 0.0));
    }

    #[test]
    fn raising_operator_structure() {
        let cfg = reference();
        let plus2 = build_spin_operator(&cfg, Axis::Plus, 2).unwrap();
        // one unit entry per state with spin 2 flipped: 8 of the 16 states
        let mut found = 0;
        for col in 0..16 {
            for row in 0..16 {
                let v = plus2.entry(row, col);
                if v != num_complex::Complex::new(0.0, 0.0) {
                    assert_eq!(v, num_complex::Complex::new(1.0, 0.0));
                    assert_eq!(col & 0b100, 0b100, "source state has spin 2 flipped");
                    assert_eq!(row, col ^ 0b100, "target clears spin 2");
                    found += 1;
                }
            }
        }
        assert_eq!(found, 8);
    }

    #[test]
    fn raising_equals_x_plus_iy() {
        let cfg = reference();
        for a in 0..4 {
            let x = build_spin_operator(&cfg, Axis::X, a).unwrap();
            let y = build_spin_operator(&cfg, Axis::Y, a).unwrap();
            let plus = build_spin_operator(&cfg, Axis::Plus, a).unwrap();
            let i = num_complex::Complex::new(0.0, 1.0);
            let combo = x.as_matrix() + y.as_matrix() * i;
            let diff = (&combo - plus.as_matrix())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(diff == 0.0, "I^+ != I^x + i I^y for spin {a}: {diff}");
        }
    }

    #[test]
    fn spin_operator_rejects_bad_index() {
        let cfg = reference();
        assert!(matches!(
            build_spin_operator(&cfg, Axis::Z, 4),
            Err(Error::SpinIndexOutOfRange {
                index: 4,
                n_spins: 4
            })
        ));
    }

    #[test]
    fn hamiltonian_reference_corner_entries() {
        let h = build_hamiltonian(&reference()).unwrap();
        // all-ground diagonal entry and the spin-0 drive element
        assert_eq!(h.entry(0, 0), num_complex::Complex::new(-270.0, 0.0));
        assert_eq!(h.entry(0, 1), num_complex::Complex::new(-0.05, 0.0));
        // the driven transition is resonant: the two diagonal entries agree
        assert_eq!(h.entry(1, 1), num_complex::Complex::new(-270.0, 0.0));
    }

    #[test]
    fn hamiltonian_is_exactly_hermitian() {
        let h = build_hamiltonian(&reference()).unwrap();
        assert_eq!(h.hermiticity_residue(), 0.0);
    }

    #[test]
    fn hamiltonian_nonzero_structure() {
        let h = build_hamiltonian(&reference()).unwrap();
        assert_eq!(h.nonzero_diagonal_count(), 16);
        assert_eq!(h.nonzero_off_diagonal_count(), 64);
    }

    #[test]
    fn hamiltonian_matches_operator_composition() {
        // independent route: assemble H from embedded operators and compare
        let cfg = reference();
        let dim = cfg.dim();
        let mut h = nalgebra::DMatrix::<num_complex::Complex<f64>>::zeros(dim, dim);
        for a in 0..4 {
            let za = build_spin_operator(&cfg, Axis::Z, a).unwrap();
            let xa = build_spin_operator(&cfg, Axis::X, a).unwrap();
            let det = num_complex::Complex::new(cfg.omega(a) - cfg.rf_freq(), 0.0);
            h -= za.as_matrix() * det;
            h -= xa.as_matrix() * num_complex::Complex::new(cfg.rabi(), 0.0);
            for b in (a + 1)..4 {
                let zb = build_spin_operator(&cfg, Axis::Z, b).unwrap();
                let prod = za.as_matrix() * zb.as_matrix();
                h -= prod * num_complex::Complex::new(2.0 * cfg.j_coupling(), 0.0);
            }
        }
        let built = build_hamiltonian(&cfg).unwrap();
        let diff = (&h - built.as_matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12, "composition route disagrees by {diff}");
    }

    #[test]
    fn zero_drive_hamiltonian_commutes_with_total_z() {
        let cfg = reference().with_rabi(0.0).unwrap();
        let h = build_hamiltonian(&cfg).unwrap();
        let mut zt = nalgebra::DMatrix::<num_complex::Complex<f64>>::zeros(16, 16);
        for a in 0..4 {
            zt += build_spin_operator(&cfg, Axis::Z, a).unwrap().as_matrix();
        }
        let zt = OperatorMatrix::from_matrix(zt).unwrap();
        assert!(commutator_residue(&h, &zt) < 1e-12);
    }

    #[test]
    fn zero_field_spectrum_endpoints() {
        let levels = spectrum_at_zero_field(&reference()).unwrap();
        assert_eq!(levels[0].0.index(), 0);
        assert_eq!(levels[0].1, -530.0); // -(sum omega)/2 - 6J/2, exact
        assert_eq!(levels[15].0.index(), 15);
        assert_eq!(levels[15].1, 470.0); // +(sum omega)/2 - 3J, exact
    }

    #[test]
    fn zero_field_spectrum_class_sizes() {
        // One state per excitation class 0 and 4, four per class 1 and 3, six
        // per class 2. Note the classes interleave in energy for the
        // reference parameters (the lowest two-flip level sits below the
        // highest one-flip level), so only the class populations are checked.
        let levels = spectrum_at_zero_field(&reference()).unwrap();
        let mut counts = [0usize; 5];
        for (state, _) in &levels {
            counts[state.excitation_count() as usize] += 1;
        }
        assert_eq!(counts, [1, 4, 6, 4, 1]);
        // and the interleaving itself, as a regression guard:
        let e_two_flip_min = levels
            .iter()
            .filter(|(s, _)| s.excitation_count() == 2)
            .map(|&(_, e)| e)
            .fold(f64::INFINITY, f64::min);
        let e_one_flip_max = levels
            .iter()
            .filter(|(s, _)| s.excitation_count() == 1)
            .map(|&(_, e)| e)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(e_two_flip_min < e_one_flip_max);
    }

    #[test]
    fn zero_field_spectrum_matches_closed_form() {
        let cfg = reference();
        let levels = spectrum_at_zero_field(&cfg).unwrap();
        for (state, e) in levels {
            let mut expect = 0.0;
            for a in 0..4 {
                let sa: f64 = state.z_half(a);
                expect -= cfg.omega(a) * sa;
                for b in (a + 1)..4 {
                    let sb: f64 = state.z_half(b);
                    expect -= 2.0 * cfg.j_coupling() * sa * sb;
                }
            }
            assert!((e - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn single_spin_system_works() {
        let cfg = SpinSystemConfig::new(vec![50.0], 0.0, 0.2, 50.0).unwrap();
        let h = build_hamiltonian(&cfg).unwrap();
        assert_eq!(h.dim(), 2);
        // on resonance the diagonal vanishes, leaving only the drive
        assert_eq!(h.entry(0, 0), num_complex::Complex::new(0.0, 0.0));
        assert_eq!(h.entry(0, 1), num_complex::Complex::new(-0.1, 0.0));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_config() -> impl Strategy<Value = SpinSystemConfig<f64>> {
            (
                proptest::collection::vec(10.0f64..500.0, 1..=5),
                -20.0f64..20.0,
                0.0f64..2.0,
                0.0f64..500.0,
            )
                .prop_map(|(omega, j, rabi, rf)| {
                    SpinSystemConfig::new(omega, j, rabi, rf).expect("ranges satisfy validation")
                })
        }

        proptest! {
            /// Construction is exactly Hermitian for any valid parameters.
            #[test]
            fn hamiltonian_is_hermitian_for_random_configs(cfg in arb_config()) {
                let h = build_hamiltonian(&cfg).unwrap();
                prop_assert_eq!(h.hermiticity_residue(), 0.0);
            }

            /// Without a drive the total z-polarization is conserved.
            #[test]
            fn zero_drive_commutes_with_total_z(cfg in arb_config()) {
                let cfg = cfg.with_rabi(0.0).unwrap();
                let h = build_hamiltonian(&cfg).unwrap();
                let dim = cfg.dim();
                let mut zt = nalgebra::DMatrix::<num_complex::Complex<f64>>::zeros(dim, dim);
                for a in 0..cfg.n_spins() {
                    zt += build_spin_operator(&cfg, Axis::Z, a).unwrap().as_matrix();
                }
                let zt = OperatorMatrix::from_matrix(zt).unwrap();
                prop_assert!(commutator_residue(&h, &zt) < 1e-12);
            }

            /// The zero-field spectrum always matches the closed-form
            /// diagonal energies, for any cluster size and coupling.
            #[test]
            fn zero_field_spectrum_closed_form_any_config(cfg in arb_config()) {
                let levels = spectrum_at_zero_field(&cfg).unwrap();
                let n = cfg.n_spins();
                for (state, e) in levels {
                    let mut expect = 0.0;
                    for a in 0..n {
                        let sa: f64 = state.z_half(a);
                        expect -= cfg.omega(a) * sa;
                        for b in (a + 1)..n {
                            let sb: f64 = state.z_half(b);
                            expect -= 2.0 * cfg.j_coupling() * sa * sb;
                        }
                    }
                    prop_assert!((e - expect).abs() < 1e-12);
                }
            }

            /// Any nonzero drive gives the four-spin Hamiltonian its full
            /// 16-diagonal / 64-off-diagonal sparsity pattern.
            #[test]
            fn four_spin_structure_for_any_drive(rabi in 0.01f64..5.0) {
                let cfg = SpinSystemConfig::default().with_rabi(rabi).unwrap();
                let h = build_hamiltonian(&cfg).unwrap();
                prop_assert_eq!(h.nonzero_diagonal_count(), 16);
                prop_assert_eq!(h.nonzero_off_diagonal_count(), 64);
            }

            /// Index -> bits -> index is the identity, and the excitation
            /// count is the population count of the index.
            #[test]
            fn basis_index_roundtrip(
                (n, idx) in (1usize..=12).prop_flat_map(|n| (Just(n), 0..(1usize << n)))
            ) {
                let b = BasisIndex::new(idx, n).unwrap();
                prop_assert_eq!(BasisIndex::from_bits(&b.bits()), b);
                prop_assert_eq!(b.excitation_count(), idx.count_ones());
            }
        }
    }
}
