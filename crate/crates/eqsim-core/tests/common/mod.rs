//! Shared test fixtures: an independent cyclic-Jacobi eigensolver used as the
//! oracle against the LAPACK-backed implementation, seeded random operators,
//! and the two reference models at their study couplings.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eqsim_core::linalg::{BipartitionSpec, DenseOperator};
use eqsim_core::spin::{build_ising, build_xxz, IsingParams, LocalHamiltonian, XXZParams};

/// Eigenvalues of a complex Hermitian matrix by cyclic Jacobi rotations.
///
/// Deliberately independent of LAPACK: plain two-sided unitary 2x2 rotations
/// sweeping the upper triangle until the off-diagonal mass is negligible.
/// Returns eigenvalues in ascending order.
pub fn jacobi_eigenvalues(a: &Array2<C64>, max_sweeps: usize) -> Vec<f64> {
    let d = a.nrows();
    assert_eq!(d, a.ncols());
    let mut m = a.clone();
    let scale: f64 = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    for _ in 0..max_sweeps {
        let mut off: f64 = 0.0;
        for p in 0..d {
            for q in (p + 1)..d {
                off = off.max(m[[p, q]].norm());
            }
        }
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = m[[p, q]];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                let app = m[[p, p]].re;
                let aqq = m[[q, q]].re;
                // phase that makes the pivot real, then a real Jacobi angle
                let phase = apq / apq.norm();
                let g = apq.norm();
                let theta = 0.5 * (2.0 * g).atan2(app - aqq);
                let (c, s) = (theta.cos(), theta.sin());
                // columns: [p q] <- [p q] * [[c, -s],[s, c]] with phase folded in
                for i in 0..d {
                    let mip = m[[i, p]];
                    let miq = m[[i, q]];
                    m[[i, p]] = mip * c + miq * phase.conj() * s;
                    m[[i, q]] = -mip * phase * s + miq * c;
                }
                for j in 0..d {
                    let mpj = m[[p, j]];
                    let mqj = m[[q, j]];
                    m[[p, j]] = mpj * c + mqj * phase * s;
                    m[[q, j]] = -mpj * phase.conj() * s + mqj * c;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..d).map(|i| m[[i, i]].re).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> DenseOperator {
    let mut m = Array2::<C64>::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            m[[i, j]] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let herm = (&m + &m.t().mapv(|z| z.conj())).mapv(|z| z * 0.5 * scale);
    DenseOperator::hermitian_unchecked(herm).unwrap()
}

pub fn random_state(rng: &mut ChaCha8Rng, d: usize) -> Array1<C64> {
    let mut v = Array1::<C64>::zeros(d);
    for i in 0..d {
        v[i] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv(|z| z / norm)
}

pub fn paper_ising(l: usize) -> LocalHamiltonian {
    build_ising(&IsingParams {
        l,
        j: 1.0,
        h_x: 0.5,
        h_z: -1.05,
    })
    .unwrap()
}

pub fn paper_xxz(l: usize) -> LocalHamiltonian {
    build_xxz(&XXZParams {
        l,
        j: 1.0,
        u_aniso: 2.0,
        j_nnn: 0.2,
    })
    .unwrap()
}

pub fn prefix_split(l: usize) -> BipartitionSpec {
    BipartitionSpec::new(l, 1).unwrap()
}

/// Random split Hamiltonian H_S (x) I + I (x) H_B + H_SB with known parts,
/// for the randomized bound-theorem scenarios.
pub struct RandomSplitScenario {
    pub l: usize,
    pub l_s: usize,
    pub h: DenseOperator,
    pub norm_s_plus_sb: f64,
    pub norm_sb: f64,
    pub psi0: Array1<C64>,
}

pub fn random_split_scenario(seed: u64) -> RandomSplitScenario {
    use eqsim_core::linalg::{hermitian_eig, kronecker};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = rng.gen_range(2..=4usize);
    let l_s = rng.gen_range(1..l);
    let (ds, db) = (1usize << l_s, 1usize << (l - l_s));
    let hs = random_hermitian(&mut rng, ds, 1.0);
    let hb = random_hermitian(&mut rng, db, 1.0);
    let hsb = random_hermitian(&mut rng, ds * db, 0.7);
    let hs_full = kronecker(&hs, &DenseOperator::identity(db));
    let hb_full = kronecker(&DenseOperator::identity(ds), &hb);
    let h = hs_full.add(&hb_full).unwrap().add(&hsb).unwrap();
    let s_plus_sb = hs_full.add(&hsb).unwrap();
    let norm_s_plus_sb = hermitian_eig(&s_plus_sb).unwrap().operator_norm();
    let norm_sb = hermitian_eig(&hsb).unwrap().operator_norm();
    let psi0 = random_state(&mut rng, ds * db);
    RandomSplitScenario {
        l,
        l_s,
        h,
        norm_s_plus_sb,
        norm_sb,
        psi0,
    }
}
