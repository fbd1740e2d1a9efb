//! Scalar information measures feeding the bounds: commutator coherence I_L,
//! variance, quantum Fisher information, trace-norm coherence, entropies,
//! relative entropy, mutual information, subsystem purity and operator
//! extrema.
//!
//! Natural logarithms throughout; 0 ln 0 = 0 by the support-floor convention.

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    commutator, expectation, hermitian_eig, partial_trace, schatten_norm, BipartitionSpec,
    DenseOperator, Keep, SchattenP,
};

/// Eigenvalue floor below which spectral weights are treated as exactly zero
/// in logarithms and QFI denominators.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EntropyConvention {
    pub support_floor: f64,
}

impl Default for EntropyConvention {
    fn default() -> Self {
        Self {
            support_floor: 1e-12,
        }
    }
}

/// Relative entropy extends to +infinity when supports fail to nest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RelativeEntropy {
    Finite(f64),
    Infinite,
}

impl RelativeEntropy {
    pub fn value(self) -> f64 {
        match self {
            RelativeEntropy::Finite(x) => x,
            RelativeEntropy::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, RelativeEntropy::Finite(_))
    }
}

/// Lower bound on the Wigner-Yanase skew information:
/// I_L = -(1/4) Tr([rho, H]^2) = (1/4) ||[rho, H]||_2^2.
pub fn skew_lower_il(rho: &DenseOperator, h: &DenseOperator) -> Result<f64> {
    let comm = commutator(rho, h)?;
    let n2 = schatten_norm(&comm, SchattenP::Two)?;
    Ok(0.25 * n2 * n2)
}

/// Variance of H in a normalized pure state; returns (Delta H)^2 and Delta H.
pub fn variance(psi: &Array1<C64>, h: &DenseOperator) -> Result<(f64, f64)> {
    let hpsi = h.apply(psi)?;
    let mean: C64 = psi.iter().zip(hpsi.iter()).map(|(a, b)| a.conj() * b).sum();
    let second: f64 = hpsi.iter().map(|z| z.norm_sqr()).sum();
    let var = (second - mean.norm_sqr()).max(0.0);
    Ok((var, var.sqrt()))
}

/// Quantum Fisher information of (rho, H):
/// F_Q = (1/2) sum_{k,l} (lambda_k - lambda_l)^2 / (lambda_k + lambda_l) |<k|H|l>|^2,
/// pairs with lambda_k + lambda_l at or below the support floor dropped.
pub fn qfi(rho: &DenseOperator, h: &DenseOperator, conv: &EntropyConvention) -> Result<f64> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            op: "qfi",
            lhs: rho.dim(),
            rhs: h.dim(),
        });
    }
    let spec = hermitian_eig(rho)?;
    if let Some(&min) = spec
        .eigenvalues
        .iter()
        .min_by(|a, b| a.partial_cmp(b).unwrap())
    {
        if min < -1e-10 {
            return Err(Error::NotPositive { eigenvalue: min });
        }
    }
    let lam: Vec<f64> = spec.eigenvalues.iter().map(|x| x.max(0.0)).collect();
    // H in the eigenbasis of rho
    let vh = spec.eigenvectors.t().mapv(|z| z.conj());
    let h_eig = vh.dot(h.entries()).dot(&spec.eigenvectors);
    let d = rho.dim();
    let mut acc = 0.0;
    for k in 0..d {
        for l in 0..d {
            let denom = lam[k] + lam[l];
            if denom <= conv.support_floor {
                continue;
            }
            let diff = lam[k] - lam[l];
            acc += 0.5 * diff * diff / denom * h_eig[[k, l]].norm_sqr();
        }
    }
    Ok(acc)
}

/// Trace-norm coherence of the initial state against the dephased steady
/// state: ||rho(0) - omega||_1.
pub fn coherence_trace_norm(rho0: &DenseOperator, omega: &DenseOperator) -> Result<f64> {
    let diff = rho0.sub(omega)?;
    let herm = DenseOperator::hermitian(diff.entries().clone())?;
    schatten_norm(&herm, SchattenP::One)
}

/// Von Neumann entropy S = -sum lambda ln lambda over the support.
pub fn von_neumann_entropy(rho: &DenseOperator, conv: &EntropyConvention) -> Result<f64> {
    let tr_dev = (rho.trace().re - 1.0).abs();
    if tr_dev > 1e-8 {
        return Err(Error::NotUnitTrace { deviation: tr_dev });
    }
    let spec = hermitian_eig(rho)?;
    Ok(spec
        .eigenvalues
        .iter()
        .filter(|&&x| x > conv.support_floor)
        .map(|&x| -x * x.ln())
        .sum())
}

/// Relative entropy S(x||y) = -S(x) - Tr(x ln y); +infinity unless
/// support(x) nests inside support(y).
pub fn relative_entropy(
    x: &DenseOperator,
    y: &DenseOperator,
    conv: &EntropyConvention,
) -> Result<RelativeEntropy> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            op: "relative_entropy",
            lhs: x.dim(),
            rhs: y.dim(),
        });
    }
    let spec_y = hermitian_eig(y)?;
    // populations of x in the eigenbasis of y
    let d = x.dim();
    let mut cross = 0.0;
    for k in 0..d {
        let col = spec_y.eigenvectors.column(k).to_owned();
        let p = expectation(&col, x)?.re;
        let lam = spec_y.eigenvalues[k];
        if lam <= conv.support_floor {
            if p > conv.support_floor {
                return Ok(RelativeEntropy::Infinite);
            }
            continue;
        }
        cross += p * lam.ln();
    }
    let s_x = von_neumann_entropy(x, conv)?;
    Ok(RelativeEntropy::Finite((-s_x - cross).max(-1e-10)))
}

/// Mutual information I_SB = S(rho_S) + S(rho_B) - S(rho).
pub fn mutual_information(
    rho: &DenseOperator,
    split: &BipartitionSpec,
    conv: &EntropyConvention,
) -> Result<f64> {
    let rho_s = partial_trace(rho, split, Keep::Subsystem)?;
    let rho_b = partial_trace(rho, split, Keep::Bath)?;
    Ok(von_neumann_entropy(&rho_s, conv)? + von_neumann_entropy(&rho_b, conv)?
        - von_neumann_entropy(rho, conv)?)
}

/// Subsystem purity p_S = Tr(rho_S^2).
pub fn subsystem_purity(rho_s: &DenseOperator) -> f64 {
    rho_s.entries().iter().map(|z| z.norm_sqr()).sum()
}

/// Extreme eigenvalues (lambda_min, lambda_max) of a Hermitian operator.
pub fn operator_extrema(a: &DenseOperator) -> Result<(f64, f64)> {
    let spec = hermitian_eig(a)?;
    let n = spec.eigenvalues.len();
    Ok((spec.eigenvalues[0], spec.eigenvalues[n - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kronecker;
    use crate::spin::{pauli_site, PauliAxis};
    use ndarray::array;

    fn conv() -> EntropyConvention {
        EntropyConvention::default()
    }

    fn qubit_diag(a: f64, b: f64) -> DenseOperator {
        DenseOperator::hermitian_unchecked(array![
            [C64::new(a, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(b, 0.0)]
        ])
        .unwrap()
    }

    #[test]
    fn skew_il_commuting_vanishes() {
        let rho = qubit_diag(0.5, 0.5);
        let h = pauli_site(1, 1, PauliAxis::Z).unwrap();
        assert!(skew_lower_il(&rho, &h).unwrap() < 1e-15);
    }

    #[test]
    fn variance_of_eigenstate_vanishes() {
        let h = pauli_site(1, 1, PauliAxis::Z).unwrap();
        let mut psi = Array1::zeros(2);
        psi[0] = C64::new(1.0, 0.0);
        let (var, dh) = variance(&psi, &h).unwrap();
        assert!(var < 1e-15 && dh < 1e-7);
    }

    #[test]
    fn qfi_two_level_closed_form() {
        // rho = diag(3/4, 1/4), H = sigma_x:
        // F_Q = (l1 - l2)^2 / (l1 + l2) * 2 |<1|H|2>|^2 / 2 = 1/4
        let rho = qubit_diag(0.75, 0.25);
        let h = pauli_site(1, 1, PauliAxis::X).unwrap();
        let f = qfi(&rho, &h, &conv()).unwrap();
        assert!((f - 0.25).abs() < 1e-12);
    }

    #[test]
    fn qfi_rejects_negative_state() {
        let rho = qubit_diag(1.5, -0.5);
        let h = pauli_site(1, 1, PauliAxis::X).unwrap();
        assert!(matches!(
            qfi(&rho, &h, &conv()),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn coherence_plus_state_vs_dephased() {
        // |+> dephased in the sigma_z basis leaves (1/2) sigma_x off-diagonals
        let plus = Array1::from_vec(vec![
            C64::new(1.0 / 2f64.sqrt(), 0.0),
            C64::new(1.0 / 2f64.sqrt(), 0.0),
        ]);
        let rho0 = DenseOperator::projector(&plus);
        let omega = qubit_diag(0.5, 0.5);
        let norm = coherence_trace_norm(&rho0, &omega).unwrap();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(coherence_trace_norm(&rho0, &rho0).unwrap() < 1e-10);
    }

    #[test]
    fn entropy_known_values() {
        let pure = qubit_diag(1.0, 0.0);
        assert!(von_neumann_entropy(&pure, &conv()).unwrap() < 1e-10);
        let mixed = DenseOperator::identity(4).scaled(C64::new(0.25, 0.0));
        assert!((von_neumann_entropy(&mixed, &conv()).unwrap() - 4f64.ln()).abs() < 1e-12);
        // -(3/4) ln(3/4) - (1/4) ln(1/4)
        let q = qubit_diag(0.75, 0.25);
        assert!((von_neumann_entropy(&q, &conv()).unwrap() - 0.5623351446188083).abs() < 1e-12);
        let bad = qubit_diag(0.75, 0.75);
        assert!(matches!(
            von_neumann_entropy(&bad, &conv()),
            Err(Error::NotUnitTrace { .. })
        ));
    }

    #[test]
    fn relative_entropy_cases() {
        let q = qubit_diag(0.75, 0.25);
        match relative_entropy(&q, &q, &conv()).unwrap() {
            RelativeEntropy::Finite(v) => assert!(v.abs() < 1e-10),
            RelativeEntropy::Infinite => panic!("S(x||x) must be finite"),
        }
        // S(pure || I/d) = ln d
        let pure = qubit_diag(1.0, 0.0);
        let mixed = qubit_diag(0.5, 0.5);
        match relative_entropy(&pure, &mixed, &conv()).unwrap() {
            RelativeEntropy::Finite(v) => assert!((v - 2f64.ln()).abs() < 1e-10),
            RelativeEntropy::Infinite => panic!("finite expected"),
        }
        // support violation
        let other = qubit_diag(0.0, 1.0);
        assert_eq!(
            relative_entropy(&other, &pure, &conv()).unwrap(),
            RelativeEntropy::Infinite
        );
    }

    #[test]
    fn mutual_information_product_and_bell() {
        let split = BipartitionSpec::new(2, 1).unwrap();
        let a = qubit_diag(0.75, 0.25);
        let b = qubit_diag(0.5, 0.5);
        let product = kronecker(&a, &b);
        assert!(mutual_information(&product, &split, &conv()).unwrap().abs() < 1e-10);
        let mut bell = Array1::zeros(4);
        bell[0] = C64::new(1.0 / 2f64.sqrt(), 0.0);
        bell[3] = C64::new(1.0 / 2f64.sqrt(), 0.0);
        let rho = DenseOperator::projector(&bell);
        let i_sb = mutual_information(&rho, &split, &conv()).unwrap();
        assert!((i_sb - 2.0 * 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn purity_and_extrema() {
        let pure = qubit_diag(1.0, 0.0);
        assert!((subsystem_purity(&pure) - 1.0).abs() < 1e-14);
        let mixed = DenseOperator::identity(4).scaled(C64::new(0.25, 0.0));
        assert!((subsystem_purity(&mixed) - 0.25).abs() < 1e-14);
        let z = pauli_site(1, 1, PauliAxis::Z).unwrap();
        let (lo, hi) = operator_extrema(&z).unwrap();
        assert!((lo + 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }
}
