//! Spectral time evolution and the equilibration diagnostics built on it:
//! the dephased steady state, relative purity f(t) and its rate, the figure
//! of merit g(t), effective dimension, finite and analytic infinite time
//! averages, and the constant-of-motion checks.
//!
//! After one diagonalization every time point costs O(d^2): the state is
//! carried as eigenbasis coefficients c_j and phases e^{-i E_j t}, and
//! f(t) = v(t)^H M v(t) with M_{lj} = <E_l| (omega_S (x) I_B) |E_j>.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    kronecker, partial_trace, reduced_from_vector, scale_columns, vector_norm, BipartitionSpec,
    DenseOperator, Keep, SpectralDecomposition,
};
use crate::spin::{gap_report_from_levels, GapReport};

/// Sampling guard: dt * (E_max - E_min) must not exceed this.
pub const GRID_GUARD: f64 = 0.25;
/// Eigenvalues with |c_k| at or below this floor do not participate in the
/// dynamics for gap-degeneracy purposes.
pub const OCCUPANCY_FLOOR: f64 = 1e-12;

const BLOCK: usize = 64;

/// Uniform time grid on [0, t_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, n_points: usize) -> Result<Self> {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::InvalidParams(format!("t_max must be positive, got {t_max}")));
        }
        if n_points < 2 {
            return Err(Error::InvalidParams(format!(
                "grid needs n_points >= 2, got {n_points}"
            )));
        }
        Ok(Self { t_max, n_points })
    }

    /// Grid with at least `n_points` samples, raised if needed so that
    /// dt * spectral_width <= 0.25.
    pub fn with_guard(t_max: f64, n_points: usize, spectral_width: f64) -> Result<Self> {
        let base = Self::new(t_max, n_points)?;
        let needed = Self::points_for_guard(t_max, spectral_width);
        Ok(Self {
            t_max,
            n_points: base.n_points.max(needed),
        })
    }

    pub fn points_for_guard(t_max: f64, spectral_width: f64) -> usize {
        if spectral_width <= 0.0 {
            return 2;
        }
        ((t_max * spectral_width / GRID_GUARD).ceil() as usize + 1).max(2)
    }

    pub fn dt(&self) -> f64 {
        self.t_max / (self.n_points - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.dt() * i as f64
    }

    pub fn guard_ok(&self, spectral_width: f64) -> bool {
        self.dt() * spectral_width <= GRID_GUARD * (1.0 + 1e-12)
    }

    fn require_guard(&self, spectral_width: f64) -> Result<()> {
        if self.guard_ok(spectral_width) {
            Ok(())
        } else {
            Err(Error::GridTooCoarse {
                product: self.dt() * spectral_width,
                needed: Self::points_for_guard(self.t_max, spectral_width),
            })
        }
    }
}

/// Real-valued series aligned to a grid.
#[derive(Debug, Clone, Serialize)]
pub struct TimeSeries {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_points);
        Self { grid, values }
    }
}

/// Precomputed spectral data for one (H, psi0, bipartition) scenario.
///
/// Immutable after construction and shareable across workers; all per-time
/// evaluations are O(d^2).
#[derive(Debug, Clone)]
pub struct EvolutionContext {
    spec: SpectralDecomposition,
    split: BipartitionSpec,
    psi0: Array1<C64>,
    c: Array1<C64>,
    omega: DenseOperator,
    omega_s: DenseOperator,
    omega_b: DenseOperator,
    m: Array2<C64>,
    f_inf: f64,
}

/// Spectral evolution setup: coefficients, dephased states and the overlap
/// matrix M.
pub fn make_context(
    spec: SpectralDecomposition,
    psi0: Array1<C64>,
    split: BipartitionSpec,
) -> Result<EvolutionContext> {
    if spec.dim() != split.dim() {
        return Err(Error::DimensionMismatch {
            op: "make_context",
            lhs: spec.dim(),
            rhs: split.dim(),
        });
    }
    if psi0.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            op: "make_context",
            lhs: psi0.len(),
            rhs: spec.dim(),
        });
    }
    let norm_dev = (vector_norm(&psi0) - 1.0).abs();
    if norm_dev > 1e-10 {
        return Err(Error::NotNormalized { deviation: norm_dev });
    }
    let vh = spec.eigenvectors.t().mapv(|z| z.conj());
    let c = vh.dot(&psi0);
    let weights: Array1<f64> = c.mapv(|z| z.norm_sqr());
    let wsum: f64 = weights.sum();
    if (wsum - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized {
            deviation: (wsum - 1.0).abs(),
        });
    }
    // omega = V diag(|c|^2) V^H
    let omega_data = scale_columns(&spec.eigenvectors, &weights).dot(&vh);
    let omega = DenseOperator::hermitian_unchecked(omega_data)?;
    let omega_s = partial_trace(&omega, &split, Keep::Subsystem)?;
    let omega_b = partial_trace(&omega, &split, Keep::Bath)?;
    // M_{lj} = <E_l| (omega_S (x) I_B) |E_j>
    let osi = kronecker(&omega_s, &DenseOperator::identity(split.d_b()));
    let m = vh.dot(osi.entries()).dot(&spec.eigenvectors);
    let f_inf = omega_s
        .entries()
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>();
    Ok(EvolutionContext {
        spec,
        split,
        psi0,
        c,
        omega,
        omega_s,
        omega_b,
        m,
        f_inf,
    })
}

impl EvolutionContext {
    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn split(&self) -> &BipartitionSpec {
        &self.split
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spec
    }

    pub fn initial_state(&self) -> &Array1<C64> {
        &self.psi0
    }

    /// Eigenbasis coefficients c_j = <E_j|Psi(0)>.
    pub fn coefficients(&self) -> &Array1<C64> {
        &self.c
    }

    /// Dephased global steady state and its subsystem marginal.
    pub fn dephased_state(&self) -> (&DenseOperator, &DenseOperator) {
        (&self.omega, &self.omega_s)
    }

    pub fn omega(&self) -> &DenseOperator {
        &self.omega
    }

    pub fn omega_s(&self) -> &DenseOperator {
        &self.omega_s
    }

    pub fn omega_b(&self) -> &DenseOperator {
        &self.omega_b
    }

    /// Overlap matrix M_{lj} = <E_l| (omega_S (x) I_B) |E_j>.
    pub fn overlap_matrix(&self) -> &Array2<C64> {
        &self.m
    }

    /// Infinite-time average of f under non-degenerate gaps: Tr_S(omega_S^2).
    pub fn f_infinity(&self) -> f64 {
        self.f_inf
    }

    pub fn spectral_width(&self) -> f64 {
        self.spec.spectral_width()
    }

    /// Guarded grid reaching t_max with at least `n_points` samples.
    pub fn guarded_grid(&self, t_max: f64, n_points: usize) -> Result<TimeGrid> {
        TimeGrid::with_guard(t_max, n_points, self.spectral_width())
    }

    /// Eigenvalues of levels with |c_k| above the occupancy floor.
    pub fn occupied_levels(&self) -> Vec<f64> {
        self.spec
            .eigenvalues
            .iter()
            .zip(self.c.iter())
            .filter(|(_, ck)| ck.norm() > OCCUPANCY_FLOOR)
            .map(|(e, _)| *e)
            .collect()
    }

    /// Gap-degeneracy scan restricted to occupied levels; gates the analytic
    /// infinite-time averages.
    pub fn occupied_gap_report(&self, tol: f64) -> Result<GapReport> {
        gap_report_from_levels(&self.occupied_levels(), tol)
    }

    /// Phase coefficients v_j(t) = c_j e^{-i E_j t}.
    fn phase_vector(&self, t: f64) -> Array1<C64> {
        let e = &self.spec.eigenvalues;
        Array1::from_shape_fn(self.dim(), |j| self.c[j] * C64::from_polar(1.0, -e[j] * t))
    }

    /// |psi(t)> in the computational basis.
    pub fn state_at(&self, t: f64) -> Array1<C64> {
        self.spec.eigenvectors.dot(&self.phase_vector(t))
    }

    /// rho_S(t) via phase evolution followed by a partial trace.
    pub fn reduced_state_at(&self, t: f64) -> DenseOperator {
        let psi = self.state_at(t);
        reduced_from_vector(&psi, &self.split).expect("context dims consistent")
    }

    /// f(t) = Tr_S(omega_S rho_S(t)) through the coefficient sum.
    pub fn relative_purity_at(&self, t: f64) -> f64 {
        let v = self.phase_vector(t);
        let mv = self.m.dot(&v);
        let acc: C64 = v.iter().zip(mv.iter()).map(|(a, b)| a.conj() * b).sum();
        debug_assert!(acc.im.abs() <= 1e-12 * acc.re.abs().max(1.0));
        acc.re
    }

    /// df/dt at one time, from the closed-form derivative of the coefficient
    /// sum.
    pub fn relative_purity_rate(&self, t: f64) -> f64 {
        let e = &self.spec.eigenvalues;
        let v = self.phase_vector(t);
        let u = Array1::from_shape_fn(self.dim(), |j| v[j] * e[j]);
        let mv = self.m.dot(&v);
        let mu = self.m.dot(&u);
        // rate = Re[ -i (v^H M u - sum_l E_l conj(v_l) (Mv)_l) ]
        let a: C64 = v.iter().zip(mu.iter()).map(|(x, y)| x.conj() * y).sum();
        let b: C64 = v
            .iter()
            .zip(mv.iter())
            .zip(e.iter())
            .map(|((x, y), el)| x.conj() * y * el)
            .sum();
        (C64::new(0.0, -1.0) * (a - b)).re
    }

    /// f on every grid point, O(d^2) each via blocked matrix products.
    pub fn relative_purity_series(&self, grid: &TimeGrid) -> Result<TimeSeries> {
        grid.require_guard(self.spectral_width())?;
        let values = self.quadratic_series(&self.m, grid);
        Ok(TimeSeries::new(*grid, values))
    }

    /// |df/dt| ingredients on every grid point (signed rate).
    pub fn rate_series(&self, grid: &TimeGrid) -> Result<TimeSeries> {
        grid.require_guard(self.spectral_width())?;
        // M1_{lj} = -i (E_j - E_l) M_{lj} is Hermitian, so the quadratic form
        // is real.
        let e = &self.spec.eigenvalues;
        let d = self.dim();
        let mut m1 = self.m.clone();
        for l in 0..d {
            for j in 0..d {
                m1[[l, j]] *= C64::new(0.0, -(e[j] - e[l]));
            }
        }
        let values = self.quadratic_series(&m1, grid);
        Ok(TimeSeries::new(*grid, values))
    }

    /// g(t) = |f(t) - Tr_S(omega_S^2)|^2 from an existing f series.
    pub fn figure_of_merit_from(&self, f: &TimeSeries) -> TimeSeries {
        let values = f
            .values
            .iter()
            .map(|x| {
                let dev = x - self.f_inf;
                dev * dev
            })
            .collect();
        TimeSeries::new(f.grid, values)
    }

    pub fn figure_of_merit_series(&self, grid: &TimeGrid) -> Result<TimeSeries> {
        Ok(self.figure_of_merit_from(&self.relative_purity_series(grid)?))
    }

    /// Blocked evaluation of t -> v(t)^H mat v(t) over the grid.
    fn quadratic_series(&self, mat: &Array2<C64>, grid: &TimeGrid) -> Vec<f64> {
        let d = self.dim();
        let e = &self.spec.eigenvalues;
        let n = grid.n_points;
        let starts: Vec<usize> = (0..n).step_by(BLOCK).collect();
        let chunks: Vec<Vec<f64>> = starts
            .par_iter()
            .map(|&s| {
                let end = (s + BLOCK).min(n);
                let nb = end - s;
                let mut vb = Array2::<C64>::zeros((d, nb));
                for col in 0..nb {
                    let t = grid.time(s + col);
                    for j in 0..d {
                        vb[[j, col]] = self.c[j] * C64::from_polar(1.0, -e[j] * t);
                    }
                }
                let mv = mat.dot(&vb);
                (0..nb)
                    .map(|col| {
                        let mut acc = C64::new(0.0, 0.0);
                        for j in 0..d {
                            acc += vb[[j, col]].conj() * mv[[j, col]];
                        }
                        acc.re
                    })
                    .collect()
            })
            .collect();
        chunks.concat()
    }

    /// |psi(t)> columns for a slice of grid indices (shared by the bound
    /// evaluations that need computational-basis states).
    pub(crate) fn state_block(&self, grid: &TimeGrid, start: usize, end: usize) -> Array2<C64> {
        let d = self.dim();
        let e = &self.spec.eigenvalues;
        let nb = end - start;
        let mut vb = Array2::<C64>::zeros((d, nb));
        for col in 0..nb {
            let t = grid.time(start + col);
            for j in 0..d {
                vb[[j, col]] = self.c[j] * C64::from_polar(1.0, -e[j] * t);
            }
        }
        self.spec.eigenvectors.dot(&vb)
    }

    /// Analytic infinite-time average of g under non-degenerate occupied
    /// gaps: sum_{k != l} |c_k|^2 |c_l|^2 |M_{kl}|^2.
    pub fn infinite_average_g_analytic(&self, degeneracy_tol: f64) -> Result<f64> {
        let report = self.occupied_gap_report(degeneracy_tol)?;
        if report.degenerate {
            return Err(Error::DegenerateGaps {
                tol: degeneracy_tol,
                min_spacing: report.min_level_spacing,
                min_collision: report.min_gap_collision,
            });
        }
        let d = self.dim();
        let w: Vec<f64> = self.c.iter().map(|z| z.norm_sqr()).collect();
        let mut acc = 0.0;
        for k in 0..d {
            if w[k] == 0.0 {
                continue;
            }
            for l in 0..d {
                if l == k {
                    continue;
                }
                acc += w[k] * w[l] * self.m[[k, l]].norm_sqr();
            }
        }
        Ok(acc)
    }

    /// Verify the constants of motion F(rho(t), omega) = Tr(omega rho(0)) and
    /// the pure-state fidelity identity, over the grid.
    pub fn global_constants_of_motion(&self, grid: &TimeGrid) -> ConstantsOfMotionReport {
        // reference Tr(omega rho(0)) via a dense trace, the fidelity via the
        // quadratic form: distinct floating-point routes on purpose.
        let rho0 = DenseOperator::projector(&self.psi0);
        let reference = crate::linalg::expectation_density(&self.omega, &rho0)
            .expect("dims consistent")
            .re;
        let fidelity = crate::linalg::expectation(&self.psi0, &self.omega)
            .expect("dims consistent")
            .re;
        let n = grid.n_points;
        let starts: Vec<usize> = (0..n).step_by(BLOCK).collect();
        let max_drift = starts
            .par_iter()
            .map(|&s| {
                let end = (s + BLOCK).min(n);
                let psi = self.state_block(grid, s, end);
                let opsi = self.omega.entries().dot(&psi);
                let mut worst: f64 = 0.0;
                for col in 0..(end - s) {
                    let mut acc = C64::new(0.0, 0.0);
                    for j in 0..self.dim() {
                        acc += psi[[j, col]].conj() * opsi[[j, col]];
                    }
                    worst = worst.max((acc.re - reference).abs());
                }
                worst
            })
            .reduce(|| 0.0, f64::max);
        ConstantsOfMotionReport {
            reference,
            max_drift,
            fidelity_identity_gap: (fidelity - reference).abs(),
        }
    }
}

/// Deviations of the motion constants over a grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConstantsOfMotionReport {
    /// Tr(omega rho(0)); also the Uhlmann fidelity of rho(t) and omega.
    pub reference: f64,
    /// max_t |F(rho(t), omega) - reference|.
    pub max_drift: f64,
    /// |<Psi0|omega|Psi0> - reference|.
    pub fidelity_identity_gap: f64,
}

/// 1 / Tr(omega^2).
pub fn effective_dimension(omega: &DenseOperator) -> f64 {
    let purity: f64 = omega.entries().iter().map(|z| z.norm_sqr()).sum();
    1.0 / purity
}

/// Trapezoidal time-average of a series over [0, tau], tau snapped to the
/// nearest grid point.
pub fn finite_time_average(series: &TimeSeries, tau: f64) -> Result<f64> {
    let grid = &series.grid;
    let idx = (tau / grid.dt()).round() as isize;
    if idx < 1 || idx as usize >= grid.n_points {
        return Err(Error::TauOutOfRange {
            tau,
            t_max: grid.t_max,
        });
    }
    let idx = idx as usize;
    let dt = grid.dt();
    let mut integral = 0.0;
    for i in 0..idx {
        integral += 0.5 * dt * (series.values[i] + series.values[i + 1]);
    }
    Ok(integral / (dt * idx as f64))
}

/// Running trapezoidal average <h>_t at every grid point; the t = 0 entry is
/// h(0).
pub fn running_time_average(series: &TimeSeries) -> TimeSeries {
    let dt = series.grid.dt();
    let mut out = Vec::with_capacity(series.values.len());
    out.push(series.values[0]);
    let mut integral = 0.0;
    for i in 1..series.values.len() {
        integral += 0.5 * dt * (series.values[i - 1] + series.values[i]);
        out.push(integral / (dt * i as f64));
    }
    TimeSeries::new(series.grid, out)
}
