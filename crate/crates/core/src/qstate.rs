//! Network density matrices, single-qubit reduced states, and the action of
//! qubit permutations on them.
//!
//! Tensor order: qubit 0 is the most significant bit of a basis index, so for
//! `n` qubits qubit `j` lives at bit `n - 1 - j`.
//!
//! A node permutation `π` acts by `U_π (ψ_0 ⊗ .. ⊗ ψ_{n-1}) = ψ_{π(0)} ⊗ .. ⊗
//! ψ_{π(n-1)}`. On basis states this sends index `b` to the index whose qubit-`j`
//! bit is the qubit-`π(j)` bit of `b`. Because of this, `U_{p∘q} = U_q U_p`.

use nalgebra::{Complex, DMatrix, Dim, Matrix, Matrix2, Storage, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::permgroup::Permutation;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Largest network simulated with a dense density matrix unless overridden.
pub const DEFAULT_QUBIT_CAP: usize = 10;
pub const TRACE_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Lower bound accepted for the smallest eigenvalue of a density matrix.
pub const PSD_TOL: f64 = 1e-8;

/// A 2x2 single-qubit density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState(Matrix2<C64>);

impl QubitState {
    pub fn new(m: Matrix2<C64>) -> Result<Self> {
        let trace = m[(0, 0)] + m[(1, 1)];
        if (trace - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("qubit trace {trace}")));
        }
        if (m - m.adjoint()).iter().any(|z| z.norm() > HERMITIAN_TOL) {
            return Err(Error::InvalidState("qubit state is not Hermitian".into()));
        }
        Ok(QubitState(m))
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.0
    }

    pub fn maximally_mixed() -> Self {
        QubitState(Matrix2::identity() * C64::new(0.5, 0.0))
    }

    /// Entrywise mean of the given states.
    pub fn average<'a>(states: impl IntoIterator<Item = &'a QubitState>) -> Result<QubitState> {
        let mut sum = Matrix2::zeros();
        let mut count = 0usize;
        for s in states {
            sum += s.0;
            count += 1;
        }
        if count == 0 {
            return Err(Error::InvalidArgument("cannot average zero states".into()));
        }
        Ok(QubitState(sum / C64::new(count as f64, 0.0)))
    }

    /// Squared Hilbert–Schmidt distance to `other`.
    pub fn distance_sq(&self, other: &QubitState) -> f64 {
        (self.0 - other.0).norm_squared()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StandardState {
    Ket0,
    Ket1,
    Plus,
    Minus,
}

impl StandardState {
    /// Projector onto the named vector.
    pub fn state(self) -> QubitState {
        let (a, b, c) = match self {
            StandardState::Ket0 => (1.0, 0.0, 0.0),
            StandardState::Ket1 => (0.0, 0.0, 1.0),
            StandardState::Plus => (0.5, 0.5, 0.5),
            StandardState::Minus => (0.5, -0.5, 0.5),
        };
        let r = |x| C64::new(x, 0.0);
        QubitState(Matrix2::new(r(a), r(b), r(b), r(c)))
    }

    /// `0`, `1`, `+` or `-`.
    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '0' => Some(StandardState::Ket0),
            '1' => Some(StandardState::Ket1),
            '+' => Some(StandardState::Plus),
            '-' => Some(StandardState::Minus),
            _ => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            StandardState::Ket0 => '0',
            StandardState::Ket1 => '1',
            StandardState::Plus => '+',
            StandardState::Minus => '-',
        }
    }
}

pub fn standard_state(name: StandardState) -> QubitState {
    name.state()
}

/// Dense `2^n x 2^n` density matrix of an `n`-qubit network.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: CMatrix,
}

impl DensityMatrix {
    /// Checks shape, unit trace and Hermiticity. Positivity is not checked
    /// here; see [`DensityMatrix::check_psd`].
    pub fn new(data: CMatrix) -> Result<Self> {
        let dim = data.nrows();
        if dim != data.ncols() || !dim.is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "{}x{} is not a 2^n x 2^n matrix",
                data.nrows(),
                data.ncols()
            )));
        }
        let rho = DensityMatrix {
            n: dim.trailing_zeros() as usize,
            data,
        };
        if rho.trace_defect() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {}", rho.trace())));
        }
        if rho.hermiticity_defect() > HERMITIAN_TOL {
            return Err(Error::InvalidState("matrix is not Hermitian".into()));
        }
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(data: CMatrix) -> Self {
        DensityMatrix {
            n: data.nrows().trailing_zeros() as usize,
            data,
        }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        DensityMatrix {
            n,
            data: CMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0),
        }
    }

    /// Projector onto a (not necessarily normalized) state vector.
    pub fn from_pure(amplitudes: &[C64]) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = nalgebra::DVector::from_column_slice(amplitudes);
        Self::new(&v * v.adjoint() / C64::new(norm_sq, 0.0))
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn trace_defect(&self) -> f64 {
        (self.trace() - C64::new(1.0, 0.0)).norm()
    }

    /// Largest entry of `|ρ - ρ†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for c in 0..d {
            for r in c..d {
                worst = worst.max((self.data[(r, c)] - self.data[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let eig = SymmetricEigen::new(self.data.clone());
        eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn check_psd(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }

    /// Squared Hilbert–Schmidt distance to `other`.
    pub fn distance_sq(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::SizeMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum())
    }

    /// Reduced state of qubit `i` (0-based).
    pub fn reduced_state(&self, i: usize) -> Result<QubitState> {
        if i >= self.n {
            return Err(Error::InvalidArgument(format!(
                "qubit {i} out of range for {} qubits",
                self.n
            )));
        }
        let shift = self.n - 1 - i;
        let bit = 1usize << shift;
        let mut m = Matrix2::zeros();
        for rest in (0..self.dim()).filter(|r| r & bit == 0) {
            for a in 0..2 {
                for b in 0..2 {
                    m[(a, b)] += self.data[(rest | (a << shift), rest | (b << shift))];
                }
            }
        }
        Ok(QubitState(m))
    }

    pub fn reduced_states(&self) -> Vec<QubitState> {
        (0..self.n)
            .map(|i| self.reduced_state(i).expect("index in range"))
            .collect()
    }

    /// `U_π† ρ U_π`, computed by relabeling basis indices.
    pub fn conjugate(&self, relabel: &BasisRelabel) -> Result<DensityMatrix> {
        if relabel.n != self.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: relabel.n,
            });
        }
        let d = self.dim();
        let src = self.data.as_slice();
        let map = &relabel.map;
        let data = CMatrix::from_fn(d, d, |x, y| src[map[x] + map[y] * d]);
        Ok(DensityMatrix { n: self.n, data })
    }
}

/// The basis-index map induced by a node permutation: `U_π e_b = e_{map[b]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisRelabel {
    n: usize,
    map: Vec<usize>,
}

impl BasisRelabel {
    pub fn new(p: &Permutation) -> Result<Self> {
        Self::with_cap(p, DEFAULT_QUBIT_CAP)
    }

    pub fn with_cap(p: &Permutation, cap: usize) -> Result<Self> {
        let n = p.len();
        check_cap("basis relabeling", n, cap)?;
        let map = (0..1usize << n)
            .map(|b| {
                (0..n).fold(0usize, |acc, j| {
                    let bit = (b >> (n - 1 - p.apply(j))) & 1;
                    acc | (bit << (n - 1 - j))
                })
            })
            .collect();
        Ok(BasisRelabel { n, map })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn map(&self) -> &[usize] {
        &self.map
    }
}

fn check_cap(what: &'static str, n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::DimensionCap { what, n, cap });
    }
    Ok(())
}

/// Tensor product of single-qubit states in the listed order.
pub fn product_state(factors: &[QubitState]) -> Result<DensityMatrix> {
    product_state_with_cap(factors, DEFAULT_QUBIT_CAP)
}

pub fn product_state_with_cap(factors: &[QubitState], cap: usize) -> Result<DensityMatrix> {
    if factors.is_empty() {
        return Err(Error::InvalidArgument("product state needs at least one factor".into()));
    }
    check_cap("product state", factors.len(), cap)?;
    let mut data = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for f in factors {
        data = data.kronecker(&f.0);
    }
    Ok(DensityMatrix {
        n: factors.len(),
        data,
    })
}

/// The explicit `2^n x 2^n` 0/1 matrix of `U_π`.
pub fn permutation_unitary(p: &Permutation) -> Result<DMatrix<f64>> {
    permutation_unitary_with_cap(p, DEFAULT_QUBIT_CAP)
}

pub fn permutation_unitary_with_cap(p: &Permutation, cap: usize) -> Result<DMatrix<f64>> {
    let relabel = BasisRelabel::with_cap(p, cap)?;
    let d = relabel.map.len();
    let mut u = DMatrix::zeros(d, d);
    for (b, &image) in relabel.map.iter().enumerate() {
        u[(image, b)] = 1.0;
    }
    Ok(u)
}

/// `U_π† ρ U_π`.
pub fn conjugate_by_permutation(rho: &DensityMatrix, p: &Permutation) -> Result<DensityMatrix> {
    if p.len() != rho.n_qubits() {
        return Err(Error::SizeMismatch {
            left: rho.n_qubits(),
            right: p.len(),
        });
    }
    rho.conjugate(&BasisRelabel::with_cap(p, usize::MAX)?)
}

pub fn partial_trace_qubit(rho: &DensityMatrix, i: usize) -> Result<QubitState> {
    rho.reduced_state(i)
}

/// Frobenius (Hilbert–Schmidt) norm of `a - b`.
pub fn hs_distance<R, C, S1, S2>(a: &Matrix<C64, R, C, S1>, b: &Matrix<C64, R, C, S2>) -> Result<f64>
where
    R: Dim,
    C: Dim,
    S1: Storage<C64, R, C>,
    S2: Storage<C64, R, C>,
{
    if a.shape() != b.shape() {
        return Err(Error::SizeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Random full-rank mixed state `G G† / Tr(G G†)` with uniformly distributed
/// entries of `G`. Not Haar-distributed; meant for tests and examples.
pub fn random_mixed_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityMatrix> {
    check_cap("random state", n, DEFAULT_QUBIT_CAP)?;
    let d = 1usize << n;
    let g = CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let gg = &g * g.adjoint();
    let tr = gg.trace();
    let mut data = gg / tr;
    // Clean up rounding so the matrix is exactly Hermitian.
    for c in 0..d {
        data[(c, c)].im = 0.0;
        for r in c + 1..d {
            data[(c, r)] = data[(r, c)].conj();
        }
    }
    Ok(DensityMatrix { n, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgroup::canonical_cycle;
    use StandardState::*;

    fn p1(images: &[usize]) -> Permutation {
        Permutation::from_one_based(images).unwrap()
    }

    fn basis(n: usize, index: usize) -> nalgebra::DVector<f64> {
        let mut v = nalgebra::DVector::zeros(1 << n);
        v[index] = 1.0;
        v
    }

    // Pins the direction convention before anything else relies on it.
    #[test]
    fn swap_sends_01_to_10() {
        let swap = p1(&[2, 1]);
        let u = permutation_unitary(&swap).unwrap();
        assert_eq!(u * basis(2, 0b01), basis(2, 0b10));
    }

    #[test]
    fn three_cycle_moves_qubit_contents() {
        // π = (1 2 3): slot j receives the state of qubit π(j).
        let c = p1(&[2, 3, 1]);
        let u = permutation_unitary(&c).unwrap();
        // |1 0 0> -> |ψ2 ψ3 ψ1> = |0 0 1>
        assert_eq!(&u * basis(3, 0b100), basis(3, 0b001));
        let u3 = &u * &u * &u;
        assert_eq!(u3, DMatrix::identity(8, 8));
        for col in 0..8 {
            assert_eq!(u.column(col).sum(), 1.0);
            assert_eq!(u.row(col).sum(), 1.0);
        }
    }

    #[test]
    fn identity_unitary() {
        let u = permutation_unitary(&Permutation::identity(3)).unwrap();
        assert_eq!(u, DMatrix::identity(8, 8));
    }

    #[test]
    fn unitary_of_composition_reverses_order() {
        let p = p1(&[2, 3, 1, 4]);
        let q = p1(&[1, 4, 3, 2]);
        let upq = permutation_unitary(&p.compose(&q).unwrap()).unwrap();
        let up = permutation_unitary(&p).unwrap();
        let uq = permutation_unitary(&q).unwrap();
        assert_eq!(upq, uq * up);
    }

    #[test]
    fn standard_states() {
        assert_eq!(Ket0.state().matrix()[(0, 0)], C64::new(1.0, 0.0));
        assert!(Plus.state().matrix().iter().all(|z| *z == C64::new(0.5, 0.0)));
        let m = Minus.state();
        assert_eq!(m.matrix()[(0, 1)], C64::new(-0.5, 0.0));
        assert_eq!(m.matrix()[(1, 1)], C64::new(0.5, 0.0));
        for s in [Ket0, Ket1, Plus, Minus] {
            assert_eq!(StandardState::from_symbol(s.symbol()), Some(s));
            assert!(QubitState::new(*s.state().matrix()).is_ok());
        }
    }

    #[test]
    fn product_state_ordering() {
        let rho = product_state(&[Ket0.state(), Ket1.state()]).unwrap();
        let mut expected = CMatrix::zeros(4, 4);
        expected[(1, 1)] = C64::new(1.0, 0.0);
        assert_eq!(rho.matrix(), &expected);
        assert_eq!(product_state(&[Ket0.state()]).unwrap().matrix()[(0, 0)].re, 1.0);
        assert!(product_state(&[]).is_err());
        let too_many = vec![Ket0.state(); 11];
        assert!(matches!(
            product_state(&too_many),
            Err(Error::DimensionCap { n: 11, cap: 10, .. })
        ));
    }

    #[test]
    fn product_of_pure_states_is_pure() {
        let a = product_state(&[Ket0, Ket1, Plus, Minus, Ket0].map(|s| s.state())).unwrap();
        assert_eq!(a.dim(), 32);
        assert!(a.trace_defect() < 1e-15);
        assert!((a.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conjugation_matches_explicit_product() {
        let rho = product_state(&[Ket0.state(), Ket1.state()]).unwrap();
        let swap = p1(&[2, 1]);
        let fast = conjugate_by_permutation(&rho, &swap).unwrap();
        let u = permutation_unitary(&swap).unwrap().map(|x| C64::new(x, 0.0));
        let slow = u.adjoint() * rho.matrix() * &u;
        assert!(hs_distance(fast.matrix(), &slow).unwrap() < 1e-12);
        assert_eq!(fast, product_state(&[Ket1.state(), Ket0.state()]).unwrap());
    }

    #[test]
    fn conjugated_product_state_takes_factor_from_inverse_image() {
        // Slot j of U†ρU holds the factor of qubit π⁻¹(j).
        let factors = [Ket0.state(), Ket1.state(), Plus.state()];
        let rho = product_state(&factors).unwrap();
        let c = p1(&[2, 3, 1]);
        let inv = c.inverse();
        let expected: Vec<_> = (0..3).map(|j| factors[inv.apply(j)]).collect();
        assert_eq!(
            conjugate_by_permutation(&rho, &c).unwrap(),
            product_state(&expected).unwrap()
        );
    }

    #[test]
    fn conjugation_fixes_identity_and_mixed_state() {
        let mut rng = rand::rng();
        let rho = random_mixed_state(3, &mut rng).unwrap();
        assert_eq!(conjugate_by_permutation(&rho, &Permutation::identity(3)).unwrap(), rho);
        let mixed = DensityMatrix::maximally_mixed(3);
        let c = canonical_cycle(&[0, 1, 2], 3).unwrap();
        assert_eq!(conjugate_by_permutation(&mixed, &c).unwrap(), mixed);
    }

    #[test]
    fn partial_traces() {
        let rho = product_state(&[Ket0.state(), Ket1.state()]).unwrap();
        assert_eq!(partial_trace_qubit(&rho, 1).unwrap(), Ket1.state());
        assert!(partial_trace_qubit(&rho, 2).is_err());

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let bell = DensityMatrix::from_pure(&[C64::new(s, 0.0), z, z, C64::new(s, 0.0)]).unwrap();
        let r = partial_trace_qubit(&bell, 0).unwrap();
        assert!((r.matrix() - QubitState::maximally_mixed().matrix()).norm() < 1e-15);

        let a = [Ket0, Ket1, Plus, Minus, Ket0].map(|s| s.state());
        let aa: Vec<_> = a.iter().chain(a.iter()).copied().collect();
        let rho0 = product_state(&aa).unwrap();
        assert!(partial_trace_qubit(&rho0, 2).unwrap().distance_sq(&Plus.state()) < 1e-28);
    }

    #[test]
    fn hilbert_schmidt_distances() {
        let k0 = Ket0.state();
        let k1 = Ket1.state();
        assert_eq!(hs_distance(k0.matrix(), k0.matrix()).unwrap(), 0.0);
        assert!((hs_distance(k0.matrix(), k1.matrix()).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        // entries of ket0 - plus are ±1/2, so the squared norm is 4 * 1/4
        assert!((hs_distance(k0.matrix(), Plus.state().matrix()).unwrap() - 1.0).abs() < 1e-15);
        assert!(hs_distance(&CMatrix::zeros(2, 2), &CMatrix::zeros(4, 4)).is_err());
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        assert!(DensityMatrix::new(CMatrix::zeros(3, 3)).is_err());
        assert!(DensityMatrix::new(CMatrix::zeros(4, 4)).is_err());
        let mut m = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        m[(0, 1)] = C64::new(0.0, 0.3);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn psd_check() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(1.5, 0.0);
        m[(1, 1)] = C64::new(-0.5, 0.0);
        let rho = DensityMatrix::new(m).unwrap();
        assert!(rho.check_psd().is_err());
        assert!(DensityMatrix::maximally_mixed(2).check_psd().is_ok());
    }
}
