//! Spin-chain Hamiltonians as Pauli-string term lists, the alternating
//! product initial state, and diagnostics for the non-degenerate-gap
//! assumptions behind the analytic time averages.
//!
//! Convention: site 1 is the most significant bit of the computational basis
//! index; |0> is spin up (sigma_z eigenvalue +1) and |1> is spin down.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, DenseOperator, SpectralDecomposition};

/// Largest dimension accepted by the O(d^2) gap scans.
pub const GAP_SCAN_MAX_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    fn matrix(self) -> Array2<C64> {
        let (zero, one, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
        match self {
            PauliAxis::X => ndarray::array![[zero, one], [one, zero]],
            PauliAxis::Y => ndarray::array![[zero, -i], [i, zero]],
            PauliAxis::Z => ndarray::array![[one, zero], [zero, -one]],
        }
    }
}

/// One product of single-site Paulis with a real coefficient.
///
/// Sites are 1-indexed and strictly increasing; sites not listed carry the
/// identity.
#[derive(Debug, Clone)]
pub struct PauliString {
    pub coeff: f64,
    pub factors: Vec<(usize, PauliAxis)>,
}

impl PauliString {
    pub fn new(coeff: f64, factors: Vec<(usize, PauliAxis)>) -> Self {
        debug_assert!(factors.windows(2).all(|w| w[0].0 < w[1].0));
        Self { coeff, factors }
    }

    pub fn min_site(&self) -> usize {
        self.factors.first().map_or(usize::MAX, |f| f.0)
    }

    pub fn max_site(&self) -> usize {
        self.factors.last().map_or(0, |f| f.0)
    }

    /// Dense matrix on the first `l` sites (all touched sites must fit).
    fn matrix(&self, l: usize) -> Array2<C64> {
        let mut out = Array2::from_elem((1, 1), C64::new(self.coeff, 0.0));
        let mut next = self.factors.iter().peekable();
        for site in 1..=l {
            let factor = match next.peek() {
                Some(&&(s, ax)) if s == site => {
                    next.next();
                    ax.matrix()
                }
                _ => Array2::eye(2),
            };
            out = kron_arrays(&out, &factor);
        }
        out
    }
}

fn kron_arrays(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[[i, j]];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[[i * rb + k, j * cb + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// A chain Hamiltonian kept as its local term list, so that the S/B/SB split
/// relative to a bipartition cut stays exact.
#[derive(Debug, Clone)]
pub struct LocalHamiltonian {
    pub l: usize,
    pub terms: Vec<PauliString>,
}

/// Operator norms of the Hamiltonian parts entering the interaction-sensitive
/// bounds: ||H_S (x) I_B + H_SB||_inf and ||H_SB||_inf.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SplitNorms {
    pub s_plus_sb_inf: f64,
    pub sb_inf: f64,
}

impl LocalHamiltonian {
    /// Dense matrix on the full chain.
    pub fn matrix(&self) -> DenseOperator {
        let d = 1usize << self.l;
        let mut acc = Array2::<C64>::zeros((d, d));
        for term in &self.terms {
            acc += &term.matrix(self.l);
        }
        DenseOperator::hermitian_unchecked(acc).expect("term sum is square")
    }

    /// Norms of the S-touching and crossing parts for a prefix cut after
    /// site `l_s`.
    ///
    /// Terms acting on the first k <= L sites equal T (x) I on the rest, so
    /// their spectra (and norms) are computed on the compact prefix support.
    pub fn split_norms(&self, l_s: usize) -> Result<SplitNorms> {
        if l_s < 1 || l_s >= self.l {
            return Err(Error::InvalidBipartition { l: self.l, l_s });
        }
        let s_touching: Vec<&PauliString> =
            self.terms.iter().filter(|t| t.min_site() <= l_s).collect();
        let crossing: Vec<&PauliString> = self
            .terms
            .iter()
            .filter(|t| t.min_site() <= l_s && t.max_site() > l_s)
            .collect();
        Ok(SplitNorms {
            s_plus_sb_inf: prefix_norm(&s_touching)?,
            sb_inf: prefix_norm(&crossing)?,
        })
    }

    /// Dense matrix of the crossing terms H_SB on the full chain.
    pub fn coupling_matrix(&self, l_s: usize) -> Result<DenseOperator> {
        if l_s < 1 || l_s >= self.l {
            return Err(Error::InvalidBipartition { l: self.l, l_s });
        }
        let d = 1usize << self.l;
        let mut acc = Array2::<C64>::zeros((d, d));
        for term in &self.terms {
            if term.min_site() <= l_s && term.max_site() > l_s {
                acc += &term.matrix(self.l);
            }
        }
        DenseOperator::hermitian_unchecked(acc)
    }
}

fn prefix_norm(terms: &[&PauliString]) -> Result<f64> {
    let Some(k) = terms.iter().map(|t| t.max_site()).max() else {
        return Ok(0.0);
    };
    let d = 1usize << k;
    let mut acc = Array2::<C64>::zeros((d, d));
    for term in terms {
        acc += &term.matrix(k);
    }
    let op = DenseOperator::hermitian_unchecked(acc)?;
    let spec = hermitian_eig(&op)?;
    Ok(spec.operator_norm())
}

/// Transverse-field Ising chain with local fields.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IsingParams {
    pub l: usize,
    pub j: f64,
    pub h_x: f64,
    pub h_z: f64,
}

impl IsingParams {
    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(Error::InvalidParams(format!("Ising needs L >= 2, got {}", self.l)));
        }
        if ![self.j, self.h_x, self.h_z].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParams("Ising parameters must be finite".into()));
        }
        Ok(())
    }
}

/// XXZ chain with next-nearest-neighbor hopping.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct XXZParams {
    pub l: usize,
    pub j: f64,
    pub u_aniso: f64,
    pub j_nnn: f64,
}

impl XXZParams {
    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(Error::InvalidParams(format!("XXZ needs L >= 2, got {}", self.l)));
        }
        if self.j_nnn != 0.0 && self.l < 3 {
            return Err(Error::InvalidParams(
                "XXZ three-site hopping needs L >= 3".into(),
            ));
        }
        if ![self.j, self.u_aniso, self.j_nnn].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParams("XXZ parameters must be finite".into()));
        }
        Ok(())
    }
}

/// sigma^axis at site j embedded in the 2^L-dimensional chain.
pub fn pauli_site(l: usize, j: usize, axis: PauliAxis) -> Result<DenseOperator> {
    if j < 1 || j > l {
        return Err(Error::SiteOutOfRange { site: j, l });
    }
    let term = PauliString::new(1.0, vec![(j, axis)]);
    DenseOperator::hermitian_unchecked(term.matrix(l))
}

/// H = J sum_j sx_j sx_{j+1} + sum_j (h_x sx_j + h_z sz_j), open boundary.
pub fn build_ising(p: &IsingParams) -> Result<LocalHamiltonian> {
    p.validate()?;
    let mut terms = Vec::new();
    for j in 1..p.l {
        terms.push(PauliString::new(
            p.j,
            vec![(j, PauliAxis::X), (j + 1, PauliAxis::X)],
        ));
    }
    for j in 1..=p.l {
        terms.push(PauliString::new(p.h_x, vec![(j, PauliAxis::X)]));
        terms.push(PauliString::new(p.h_z, vec![(j, PauliAxis::Z)]));
    }
    Ok(LocalHamiltonian { l: p.l, terms })
}

/// H = J sum_j (sx_j sx_{j+1} + sy_j sy_{j+1}) + U sum_j sz_j sz_{j+1}
///   + J_nnn sum_j (sx_j sz_{j+1} sx_{j+2} + sy_j sz_{j+1} sy_{j+2}),
/// all sums open-boundary (nearest-neighbor sums run to L-1, the three-site
/// sum to L-2).
pub fn build_xxz(p: &XXZParams) -> Result<LocalHamiltonian> {
    p.validate()?;
    let mut terms = Vec::new();
    for j in 1..p.l {
        terms.push(PauliString::new(
            p.j,
            vec![(j, PauliAxis::X), (j + 1, PauliAxis::X)],
        ));
        terms.push(PauliString::new(
            p.j,
            vec![(j, PauliAxis::Y), (j + 1, PauliAxis::Y)],
        ));
        terms.push(PauliString::new(
            p.u_aniso,
            vec![(j, PauliAxis::Z), (j + 1, PauliAxis::Z)],
        ));
    }
    if p.j_nnn != 0.0 {
        for j in 1..p.l.saturating_sub(1) {
            terms.push(PauliString::new(
                p.j_nnn,
                vec![(j, PauliAxis::X), (j + 1, PauliAxis::Z), (j + 2, PauliAxis::X)],
            ));
            terms.push(PauliString::new(
                p.j_nnn,
                vec![(j, PauliAxis::Y), (j + 1, PauliAxis::Z), (j + 2, PauliAxis::Y)],
            ));
        }
    }
    Ok(LocalHamiltonian { l: p.l, terms })
}

/// Basis index of the product state described by `bits` (site 1 first, '1' =
/// spin down).
pub fn basis_index_from_bits(bits: &str) -> Result<usize> {
    let mut idx = 0usize;
    for ch in bits.chars() {
        idx = (idx << 1)
            | match ch {
                '0' => 0,
                '1' => 1,
                other => {
                    return Err(Error::Config(format!(
                        "bitstring may contain only 0 and 1, found {other:?}"
                    )))
                }
            };
    }
    Ok(idx)
}

/// Computational basis vector |bits>.
pub fn basis_state_from_bits(l: usize, bits: &str) -> Result<Array1<C64>> {
    if bits.len() != l {
        return Err(Error::Config(format!(
            "bitstring length {} does not match L = {}",
            bits.len(),
            l
        )));
    }
    let idx = basis_index_from_bits(bits)?;
    let mut psi = Array1::zeros(1usize << l);
    psi[idx] = C64::new(1.0, 0.0);
    Ok(psi)
}

/// Alternating |1,0,1,0,...> state with spin down at odd sites.
pub fn cdw_state(l: usize) -> Result<Array1<C64>> {
    if l < 2 {
        return Err(Error::InvalidParams(format!("CDW state needs L >= 2, got {l}")));
    }
    let bits: String = (1..=l).map(|j| if j % 2 == 1 { '1' } else { '0' }).collect();
    basis_state_from_bits(l, &bits)
}

/// Exhaustive scan of level spacings and gap collisions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapReport {
    pub n_levels: usize,
    pub min_level_spacing: f64,
    pub min_gap_collision: f64,
    pub degenerate: bool,
    pub tol: f64,
}

/// Scan a spectrum for degenerate levels and degenerate gaps.
///
/// Level spacings are adjacent differences of the sorted spectrum; gap
/// collisions are adjacent differences of the sorted list of all positive
/// gaps E_j - E_i (i < j), O(d^2 log d).
pub fn gap_degeneracy_report(spec: &SpectralDecomposition, tol: f64) -> Result<GapReport> {
    gap_report_from_levels(spec.eigenvalues.as_slice().unwrap(), tol)
}

/// Same scan on a plain eigenvalue list (used for occupied-level checks).
pub fn gap_report_from_levels(levels: &[f64], tol: f64) -> Result<GapReport> {
    let d = levels.len();
    if d > GAP_SCAN_MAX_DIM {
        return Err(Error::SpectrumTooLarge { dim: d });
    }
    let mut sorted = levels.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let min_level_spacing = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let mut gaps = Vec::with_capacity(d * (d - 1) / 2);
    for i in 0..d {
        for j in (i + 1)..d {
            gaps.push(sorted[j] - sorted[i]);
        }
    }
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let min_gap_collision = gaps
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let degenerate = min_level_spacing < tol || min_gap_collision < tol;
    Ok(GapReport {
        n_levels: d,
        min_level_spacing,
        min_gap_collision,
        degenerate,
        tol,
    })
}
