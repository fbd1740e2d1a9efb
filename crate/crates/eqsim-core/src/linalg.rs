//! Dense complex operator algebra: tensor products, partial traces, Hermitian
//! eigendecomposition, Schatten norms, commutators and expectation values.
//!
//! All operators are dense `Complex64` matrices; system sizes stay at or below
//! dim 1024, where full dense diagonalization is the right tool.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Relative tolerance for the Hermiticity scan.
pub const HERMITICITY_RTOL: f64 = 1e-12;
/// Residual tolerance for eigendecomposition invariants.
pub const EIG_RTOL: f64 = 1e-10;

/// Square complex matrix with an optional Hermitian tag.
///
/// The universal carrier for Hamiltonians, density matrices, dephased states
/// and observables.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    data: Array2<C64>,
    hermitian_hint: bool,
}

impl DenseOperator {
    /// Wrap a square matrix without a Hermitian tag.
    pub fn new(data: Array2<C64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch {
                op: "DenseOperator::new",
                lhs: data.nrows(),
                rhs: data.ncols(),
            });
        }
        Ok(Self {
            data,
            hermitian_hint: false,
        })
    }

    /// Wrap a square matrix and verify max|A - A^H| <= 1e-12 * max|A|.
    pub fn hermitian(data: Array2<C64>) -> Result<Self> {
        let mut op = Self::new(data)?;
        let dev = op.hermiticity_deviation();
        let scale = op.max_abs().max(f64::MIN_POSITIVE);
        if dev > HERMITICITY_RTOL * scale {
            return Err(Error::NotHermitian {
                deviation: dev,
                tol: HERMITICITY_RTOL * scale,
            });
        }
        op.hermitian_hint = true;
        Ok(op)
    }

    /// Tag as Hermitian without scanning (for matrices Hermitian by construction).
    pub fn hermitian_unchecked(data: Array2<C64>) -> Result<Self> {
        let mut op = Self::new(data)?;
        op.hermitian_hint = true;
        Ok(op)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            data: Array2::eye(dim),
            hermitian_hint: true,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: Array2::zeros((dim, dim)),
            hermitian_hint: true,
        }
    }

    /// Projector |psi><psi| onto a (not necessarily normalized) vector.
    pub fn projector(psi: &Array1<C64>) -> Self {
        let d = psi.len();
        let data = Array2::from_shape_fn((d, d), |(i, j)| psi[i] * psi[j].conj());
        Self {
            data,
            hermitian_hint: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.data
    }

    pub fn into_entries(self) -> Array2<C64> {
        self.data
    }

    pub fn is_hermitian_tagged(&self) -> bool {
        self.hermitian_hint
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |A[i,j] - conj(A[j,i])| over the upper triangle.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                dev = dev.max((self.data[[i, j]] - self.data[[j, i]].conj()).norm());
            }
        }
        dev
    }

    pub fn adjoint(&self) -> Self {
        Self {
            data: self.data.t().mapv(|z| z.conj()),
            hermitian_hint: self.hermitian_hint,
        }
    }

    pub fn trace(&self) -> C64 {
        self.data.diag().sum()
    }

    /// Matrix product; the result carries no Hermitian tag.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                lhs: self.dim(),
                rhs: rhs.dim(),
            });
        }
        Self::new(self.data.dot(&rhs.data))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            data: self.data.mapv(|z| z * factor),
            hermitian_hint: self.hermitian_hint && factor.im == 0.0,
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                op: "add",
                lhs: self.dim(),
                rhs: rhs.dim(),
            });
        }
        Ok(Self {
            data: &self.data + &rhs.data,
            hermitian_hint: self.hermitian_hint && rhs.hermitian_hint,
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                op: "sub",
                lhs: self.dim(),
                rhs: rhs.dim(),
            });
        }
        Ok(Self {
            data: &self.data - &rhs.data,
            hermitian_hint: self.hermitian_hint && rhs.hermitian_hint,
        })
    }

    /// Apply to a vector: A |psi>.
    pub fn apply(&self, psi: &Array1<C64>) -> Result<Array1<C64>> {
        if self.dim() != psi.len() {
            return Err(Error::DimensionMismatch {
                op: "apply",
                lhs: self.dim(),
                rhs: psi.len(),
            });
        }
        Ok(self.data.dot(psi))
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian operator.
///
/// Column `k` of `eigenvectors` is the eigenvector for `eigenvalues[k]`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Array1<f64>,
    pub eigenvectors: Array2<C64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// E_max - E_min; the fastest phase in the dynamics.
    pub fn spectral_width(&self) -> f64 {
        let n = self.eigenvalues.len();
        if n == 0 {
            0.0
        } else {
            self.eigenvalues[n - 1] - self.eigenvalues[0]
        }
    }

    /// max(|E_min|, |E_max|) = operator norm of the decomposed matrix.
    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max)
    }

    /// Reassemble V diag(lambda) V^H.
    pub fn reconstruct(&self) -> DenseOperator {
        let scaled = scale_columns(&self.eigenvectors, &self.eigenvalues);
        let data = scaled.dot(&self.eigenvectors.t().mapv(|z| z.conj()));
        DenseOperator {
            data,
            hermitian_hint: true,
        }
    }

    /// max|V^H V - I|, for invariant checks.
    pub fn orthonormality_deviation(&self) -> f64 {
        let vhv = self
            .eigenvectors
            .t()
            .mapv(|z| z.conj())
            .dot(&self.eigenvectors);
        let d = vhv.nrows();
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let expect = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                dev = dev.max((vhv[[i, j]] - expect).norm());
            }
        }
        dev
    }
}

/// Multiply column k of `m` by `weights[k]`.
pub(crate) fn scale_columns(m: &Array2<C64>, weights: &Array1<f64>) -> Array2<C64> {
    let mut out = m.clone();
    for (mut col, &w) in out.columns_mut().into_iter().zip(weights.iter()) {
        col.mapv_inplace(|z| z * w);
    }
    out
}

/// Chain length plus the contiguous subsystem prefix it is split into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct BipartitionSpec {
    pub l: usize,
    pub l_s: usize,
}

impl BipartitionSpec {
    pub fn new(l: usize, l_s: usize) -> Result<Self> {
        if l_s < 1 || l_s >= l {
            return Err(Error::InvalidBipartition { l, l_s });
        }
        Ok(Self { l, l_s })
    }

    pub fn dim(&self) -> usize {
        1 << self.l
    }

    pub fn d_s(&self) -> usize {
        1 << self.l_s
    }

    pub fn d_b(&self) -> usize {
        1 << (self.l - self.l_s)
    }
}

/// Which marginal `partial_trace` keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    Subsystem,
    Bath,
}

/// Tensor product A (x) B, left factor owning the most significant index block.
pub fn kronecker(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    let (da, db) = (a.dim(), b.dim());
    let mut out = Array2::zeros((da * db, da * db));
    for i in 0..da {
        for j in 0..da {
            let aij = a.data[[i, j]];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out[[i * db + k, j * db + l]] = aij * b.data[[k, l]];
                }
            }
        }
    }
    DenseOperator {
        data: out,
        hermitian_hint: a.hermitian_hint && b.hermitian_hint,
    }
}

/// Trace out one tensor factor of a d_S * d_B operator.
pub fn partial_trace(rho: &DenseOperator, split: &BipartitionSpec, keep: Keep) -> Result<DenseOperator> {
    let (ds, db) = (split.d_s(), split.d_b());
    if rho.dim() != ds * db {
        return Err(Error::DimensionMismatch {
            op: "partial_trace",
            lhs: rho.dim(),
            rhs: ds * db,
        });
    }
    let data = match keep {
        Keep::Subsystem => {
            let mut out = Array2::zeros((ds, ds));
            for a in 0..ds {
                for b in 0..ds {
                    let mut acc = C64::new(0.0, 0.0);
                    for beta in 0..db {
                        acc += rho.data[[a * db + beta, b * db + beta]];
                    }
                    out[[a, b]] = acc;
                }
            }
            out
        }
        Keep::Bath => {
            let mut out = Array2::zeros((db, db));
            for alpha in 0..db {
                for beta in 0..db {
                    let mut acc = C64::new(0.0, 0.0);
                    for a in 0..ds {
                        acc += rho.data[[a * db + alpha, a * db + beta]];
                    }
                    out[[alpha, beta]] = acc;
                }
            }
            out
        }
    };
    Ok(DenseOperator {
        data,
        hermitian_hint: rho.hermitian_hint,
    })
}

/// Partial trace of |psi><psi| over the bath, avoiding the full outer product.
pub fn reduced_from_vector(psi: &Array1<C64>, split: &BipartitionSpec) -> Result<DenseOperator> {
    let (ds, db) = (split.d_s(), split.d_b());
    if psi.len() != ds * db {
        return Err(Error::DimensionMismatch {
            op: "reduced_from_vector",
            lhs: psi.len(),
            rhs: ds * db,
        });
    }
    let mut out = Array2::zeros((ds, ds));
    for a in 0..ds {
        for b in 0..ds {
            let mut acc = C64::new(0.0, 0.0);
            for beta in 0..db {
                acc += psi[a * db + beta] * psi[b * db + beta].conj();
            }
            out[[a, b]] = acc;
        }
    }
    Ok(DenseOperator {
        data: out,
        hermitian_hint: true,
    })
}

/// Full eigendecomposition of a Hermitian operator, ascending eigenvalues.
///
/// Requires the operator to be tagged Hermitian and to pass the Hermiticity
/// scan; backs onto LAPACK `zheev`.
pub fn hermitian_eig(a: &DenseOperator) -> Result<SpectralDecomposition> {
    let dev = a.hermiticity_deviation();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    if !a.hermitian_hint || dev > HERMITICITY_RTOL * scale {
        return Err(Error::NotHermitian {
            deviation: dev,
            tol: HERMITICITY_RTOL * scale,
        });
    }
    let (vals, vecs) = a
        .data
        .eigh(UPLO::Lower)
        .map_err(|e| Error::EigensolverFailure {
            detail: format!("zheev on dim {}: {}", a.dim(), e),
        })?;
    debug_assert!(vals.windows(2).into_iter().all(|w| w[0] <= w[1]));
    // lax hands the row-major buffer straight to column-major LAPACK, so the
    // solve acts on A^T = conj(A); conjugating the returned vectors restores
    // eigenvectors of A in the columns.
    let vecs = vecs.mapv(|z| z.conj());
    Ok(SpectralDecomposition {
        eigenvalues: vals,
        eigenvectors: vecs,
    })
}

/// Schatten p-norm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchattenP {
    One,
    Two,
    Infinity,
}

/// Schatten norm of a square operator.
///
/// The 2-norm is the entrywise Frobenius sum. For p = 1 and p = inf the
/// singular values are |eigenvalues| when the operator is tagged Hermitian and
/// are otherwise obtained from A^H A.
pub fn schatten_norm(a: &DenseOperator, p: SchattenP) -> Result<f64> {
    match p {
        SchattenP::Two => Ok(a.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()),
        SchattenP::One | SchattenP::Infinity => {
            let svals = singular_values(a)?;
            Ok(match p {
                SchattenP::One => svals.iter().sum(),
                SchattenP::Infinity => svals.iter().copied().fold(0.0, f64::max),
                SchattenP::Two => unreachable!(),
            })
        }
    }
}

fn singular_values(a: &DenseOperator) -> Result<Vec<f64>> {
    if a.hermitian_hint {
        let spec = hermitian_eig(a)?;
        return Ok(spec.eigenvalues.iter().map(|x| x.abs()).collect());
    }
    // singular values = sqrt(eigenvalues of A^H A)
    let aha = a.data.t().mapv(|z| z.conj()).dot(&a.data);
    let gram = DenseOperator {
        data: aha,
        hermitian_hint: true,
    };
    let spec = hermitian_eig(&gram)?;
    Ok(spec
        .eigenvalues
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .collect())
}

/// Commutator AB - BA. Anti-Hermitian when both inputs are Hermitian.
pub fn commutator(a: &DenseOperator, b: &DenseOperator) -> Result<DenseOperator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            op: "commutator",
            lhs: a.dim(),
            rhs: b.dim(),
        });
    }
    let data = a.data.dot(&b.data) - b.data.dot(&a.data);
    DenseOperator::new(data)
}

/// <psi|A|psi> for a normalized state vector.
pub fn expectation(psi: &Array1<C64>, a: &DenseOperator) -> Result<C64> {
    if psi.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            op: "expectation",
            lhs: psi.len(),
            rhs: a.dim(),
        });
    }
    let apsi = a.data.dot(psi);
    Ok(psi
        .iter()
        .zip(apsi.iter())
        .map(|(p, q)| p.conj() * q)
        .sum())
}

/// Tr(rho A) for a unit-trace density matrix.
pub fn expectation_density(rho: &DenseOperator, a: &DenseOperator) -> Result<C64> {
    if rho.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            op: "expectation_density",
            lhs: rho.dim(),
            rhs: a.dim(),
        });
    }
    // Tr(rho A) = sum_ij rho[i,j] A[j,i]
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            acc += rho.data[[i, j]] * a.data[[j, i]];
        }
    }
    Ok(acc)
}

/// Norm of a state vector.
pub fn vector_norm(psi: &Array1<C64>) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn sx() -> DenseOperator {
        DenseOperator::hermitian(array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
        ])
        .unwrap()
    }

    fn sy() -> DenseOperator {
        DenseOperator::hermitian(array![
            [C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
            [C64::new(0.0, 1.0), C64::new(0.0, 0.0)]
        ])
        .unwrap()
    }

    fn sz() -> DenseOperator {
        DenseOperator::hermitian(array![
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]
        ])
        .unwrap()
    }

    #[test]
    fn kron_identity_case() {
        let i2 = DenseOperator::identity(2);
        let i4 = kronecker(&i2, &i2);
        assert_eq!(i4.dim(), 4);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((i4.entries()[[i, j]] - C64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn kron_sz_sz_diagonal() {
        let zz = kronecker(&sz(), &sz());
        let expect = [1.0, -1.0, -1.0, 1.0];
        for (i, &e) in expect.iter().enumerate() {
            assert!((zz.entries()[[i, i]] - C64::new(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn pauli_commutator() {
        // [sx, sy] = 2i sz
        let c = commutator(&sx(), &sy()).unwrap();
        let expect = sz().scaled(C64::new(0.0, 2.0));
        let dev = c.sub(&expect).unwrap().max_abs();
        assert!(dev < 1e-15);
    }

    #[test]
    fn self_commutator_vanishes() {
        let c = commutator(&sx(), &sx()).unwrap();
        assert!(c.max_abs() < 1e-15);
    }

    #[test]
    fn schatten_norms_identity_and_sz() {
        let i4 = DenseOperator::identity(4);
        assert!((schatten_norm(&i4, SchattenP::One).unwrap() - 4.0).abs() < 1e-12);
        assert!((schatten_norm(&i4, SchattenP::Two).unwrap() - 2.0).abs() < 1e-12);
        assert!((schatten_norm(&i4, SchattenP::Infinity).unwrap() - 1.0).abs() < 1e-12);
        let z = sz();
        assert!((schatten_norm(&z, SchattenP::One).unwrap() - 2.0).abs() < 1e-12);
        assert!((schatten_norm(&z, SchattenP::Two).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!((schatten_norm(&z, SchattenP::Infinity).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigh_diagonal_input_sorted() {
        let d = DenseOperator::hermitian(array![
            [C64::new(3.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(2.0, 0.0)]
        ])
        .unwrap();
        let spec = hermitian_eig(&d).unwrap();
        let expect = [1.0, 2.0, 3.0];
        for (v, e) in spec.eigenvalues.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn eigh_pauli_x_spectrum() {
        let spec = hermitian_eig(&sx()).unwrap();
        assert!((spec.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((spec.eigenvalues[1] - 1.0).abs() < 1e-12);
        assert!(spec.orthonormality_deviation() < 1e-10);
        assert!(spec.reconstruct().sub(&sx()).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn eigh_pauli_y_eigenvectors() {
        // complex eigenvectors: catches any row/column or conjugation mixup
        let spec = hermitian_eig(&sy()).unwrap();
        for k in 0..2 {
            let v = spec.eigenvectors.column(k).to_owned();
            let av = sy().entries().dot(&v);
            for i in 0..2 {
                assert!((av[i] - v[i] * spec.eigenvalues[k]).norm() < 1e-12);
            }
        }
        assert!(spec.reconstruct().sub(&sy()).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = DenseOperator::new(array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(2.0, 0.0), C64::new(0.0, 0.0)]
        ])
        .unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
        assert!(DenseOperator::hermitian(m.entries().clone()).is_err());
    }

    #[test]
    fn partial_trace_bell_state() {
        // (|00> + |11>)/sqrt(2) on L=2, trace out second qubit -> I/2
        let mut psi = Array1::zeros(4);
        psi[0] = C64::new(1.0 / 2f64.sqrt(), 0.0);
        psi[3] = C64::new(1.0 / 2f64.sqrt(), 0.0);
        let split = BipartitionSpec::new(2, 1).unwrap();
        let rho = DenseOperator::projector(&psi);
        let rs = partial_trace(&rho, &split, Keep::Subsystem).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 0.5 } else { 0.0 };
                assert!((rs.entries()[[i, j]] - C64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
        // trace preserved
        assert!((rs.trace() - rho.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let rho = DenseOperator::identity(4).scaled(C64::new(0.25, 0.0));
        let split = BipartitionSpec::new(3, 1).unwrap();
        assert!(partial_trace(&rho, &split, Keep::Subsystem).is_err());
    }

    #[test]
    fn expectation_basis_states() {
        // <0|sz|0> = +1 under the spin-up convention
        let mut psi = Array1::zeros(2);
        psi[0] = C64::new(1.0, 0.0);
        let v = expectation(&psi, &sz()).unwrap();
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-15);
        // Tr((I/d) A) = Tr(A)/d
        let a = sx().add(&sz()).unwrap();
        let mixed = DenseOperator::identity(2).scaled(C64::new(0.5, 0.0));
        let t = expectation_density(&mixed, &a).unwrap();
        assert!((t - a.trace() * C64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn bipartition_validation() {
        assert!(BipartitionSpec::new(4, 0).is_err());
        assert!(BipartitionSpec::new(4, 4).is_err());
        let s = BipartitionSpec::new(4, 1).unwrap();
        assert_eq!(s.d_s() * s.d_b(), s.dim());
    }
}
