//! Model-construction oracles: explicit tensor-product builds, closed-form
//! variances, symmetry checks and gap-degeneracy classification for the two
//! reference chains.

mod common;

use common::{paper_ising, paper_xxz};
use num_complex::Complex64 as C64;

use eqsim_core::evolve::make_context;
use eqsim_core::info::variance;
use eqsim_core::linalg::{
    commutator, expectation, hermitian_eig, kronecker, BipartitionSpec, DenseOperator,
};
use eqsim_core::spin::{
    build_ising, build_xxz, cdw_state, gap_degeneracy_report, pauli_site, IsingParams, PauliAxis,
    XXZParams,
};

#[test]
fn pauli_site_squares_to_identity() {
    for l in 1..=6usize {
        for j in 1..=l {
            for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
                let p = pauli_site(l, j, axis).unwrap();
                let sq = p.matmul(&p).unwrap();
                let dev = sq.sub(&DenseOperator::identity(1 << l)).unwrap().max_abs();
                assert!(dev < 1e-14, "L={l} j={j}");
            }
        }
    }
}

#[test]
fn ising_l3_matches_term_by_term_kron() {
    let h = paper_ising(3).matrix();
    // independent construction: explicit kroneckered sum
    let x = pauli_site(1, 1, PauliAxis::X).unwrap();
    let z = pauli_site(1, 1, PauliAxis::Z).unwrap();
    let i2 = DenseOperator::identity(2);
    let term = |ops: [&DenseOperator; 3], w: f64| {
        kronecker(&kronecker(ops[0], ops[1]), ops[2]).scaled(C64::new(w, 0.0))
    };
    let mut expect = DenseOperator::zeros(8);
    expect = expect.add(&term([&x, &x, &i2], 1.0)).unwrap();
    expect = expect.add(&term([&i2, &x, &x], 1.0)).unwrap();
    for site in 0..3 {
        let mut ops = [&i2, &i2, &i2];
        ops[site] = &x;
        expect = expect.add(&term(ops, 0.5)).unwrap();
        let mut ops = [&i2, &i2, &i2];
        ops[site] = &z;
        expect = expect.add(&term(ops, -1.05)).unwrap();
    }
    assert!(h.sub(&expect).unwrap().max_abs() < 1e-14);
}

#[test]
fn variance_closed_forms_for_cdw() {
    // Ising: (Delta H)^2 = (L-1) J^2 + L h_x^2; XXZ: Delta H = 2 J sqrt(L-1)
    for l in [4usize, 6, 8, 10] {
        let psi = cdw_state(l).unwrap();
        let h = paper_ising(l).matrix();
        let (_, dh) = variance(&psi, &h).unwrap();
        let expect = ((l - 1) as f64 + l as f64 * 0.25).sqrt();
        assert!((dh - expect).abs() < 1e-10, "ising L={l}: {dh} vs {expect}");
        let hx = paper_xxz(l).matrix();
        let (_, dhx) = variance(&psi, &hx).unwrap();
        let expectx = 2.0 * ((l - 1) as f64).sqrt();
        assert!((dhx - expectx).abs() < 1e-10, "xxz L={l}: {dhx} vs {expectx}");
    }
}

#[test]
fn xxz_commutes_with_total_magnetization() {
    for l in 3..=6usize {
        let h = paper_xxz(l).matrix();
        let mut mz = DenseOperator::zeros(1 << l);
        for j in 1..=l {
            mz = mz.add(&pauli_site(l, j, PauliAxis::Z).unwrap()).unwrap();
        }
        let comm = commutator(&h, &mz).unwrap();
        assert!(comm.max_abs() <= 1e-12, "L={l}");
    }
}

#[test]
fn field_free_spectra_symmetric_about_zero() {
    let h = build_ising(&IsingParams {
        l: 4,
        j: 1.0,
        h_x: 0.0,
        h_z: 0.0,
    })
    .unwrap()
    .matrix();
    let spec = hermitian_eig(&h).unwrap();
    let d = spec.eigenvalues.len();
    for i in 0..d {
        assert!(
            (spec.eigenvalues[i] + spec.eigenvalues[d - 1 - i]).abs() < 1e-10,
            "ising spectrum not symmetric at {i}"
        );
    }
    let h = build_xxz(&XXZParams {
        l: 4,
        j: 1.0,
        u_aniso: 0.0,
        j_nnn: 0.0,
    })
    .unwrap()
    .matrix();
    let spec = hermitian_eig(&h).unwrap();
    for i in 0..d {
        assert!(
            (spec.eigenvalues[i] + spec.eigenvalues[d - 1 - i]).abs() < 1e-10,
            "xxz spectrum not symmetric at {i}"
        );
    }
}

#[test]
fn ising_l4_gaps_non_degenerate() {
    let spec = hermitian_eig(&paper_ising(4).matrix()).unwrap();
    let report = gap_degeneracy_report(&spec, 1e-10).unwrap();
    assert!(!report.degenerate, "{report:?}");
    assert_eq!(report.n_levels, 16);
}

#[test]
fn xxz_full_spectrum_degenerate_but_occupied_levels_clean() {
    // the two fully polarized product states share energy U (L - 1), so the
    // full spectrum always fails the scan; the CDW-occupied levels pass
    let l = 4;
    let h = paper_xxz(l).matrix();
    let spec = hermitian_eig(&h).unwrap();
    let full = gap_degeneracy_report(&spec, 1e-10).unwrap();
    assert!(full.degenerate);
    assert!(full.min_level_spacing < 1e-12);
    let ctx = make_context(
        spec,
        cdw_state(l).unwrap(),
        BipartitionSpec::new(l, 1).unwrap(),
    )
    .unwrap();
    let occ = ctx.occupied_gap_report(1e-10).unwrap();
    assert!(!occ.degenerate, "{occ:?}");
    assert_eq!(occ.n_levels, 6); // the magnetization-zero sector of L = 4
    assert!(occ.min_level_spacing > 0.1);
}

#[test]
fn polarized_states_are_degenerate_eigenstates_of_xxz() {
    // direct check of the mechanism behind the full-spectrum degeneracy
    let l = 4;
    let h = paper_xxz(l).matrix();
    let e_pol = 2.0 * (l as f64 - 1.0);
    for idx in [0usize, (1 << l) - 1] {
        let mut psi = ndarray::Array1::<C64>::zeros(1 << l);
        psi[idx] = C64::new(1.0, 0.0);
        let hpsi = h.apply(&psi).unwrap();
        for i in 0..(1 << l) {
            let expect = if i == idx {
                C64::new(e_pol, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            assert!((hpsi[i] - expect).norm() < 1e-13);
        }
    }
}

#[test]
fn cdw_energy_expectation_xxz() {
    // J-hopping and the three-site terms annihilate or move the CDW state;
    // only the anisotropy survives: <H> = -U (L - 1)
    for l in [4usize, 6] {
        let h = paper_xxz(l).matrix();
        let psi = cdw_state(l).unwrap();
        let v = expectation(&psi, &h).unwrap();
        assert!((v.re - (-2.0 * (l as f64 - 1.0))).abs() < 1e-12, "L={l}");
    }
}
