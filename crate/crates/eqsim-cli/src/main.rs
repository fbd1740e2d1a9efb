//! `eqsim` — run, sweep and audit spin-chain equilibration scenarios.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eqsim_core::error::Error;
use eqsim_core::evolve::TimeGrid;
use eqsim_core::linalg::{hermitian_eig, schatten_norm, DenseOperator, SchattenP};
use eqsim_core::scenario::{
    self, load_config, load_sweep_config, run_scenario, write_outputs, write_summary_csv,
    OutputKind, RunResult, SummaryRow,
};

#[derive(Parser)]
#[command(name = "eqsim", version, about = "Closed-spin-chain equilibration simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory for series.csv / bounds.json / summary.csv
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Restrict file outputs to one format (default: everything the config requests)
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Worker threads; 0 means auto
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Seed for the randomized self-audit in `check`
    #[arg(long, global = true, default_value_t = 0x5eed_cafe)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario config and persist its outputs
    Run { config: PathBuf },
    /// Run a system-size sweep config and persist per-size outputs plus a summary table
    Sweep { config: PathBuf },
    /// Gap/degeneracy and invariant audit of a scenario, without persisting series
    Check { config: PathBuf },
    /// Print the version
    Version,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl FormatArg {
    fn to_kind(self) -> OutputKind {
        match self {
            FormatArg::Csv => OutputKind::Series,
            FormatArg::Json => OutputKind::Bounds,
        }
    }
}

fn main() -> ExitCode {
    // single-threaded BLAS keeps every run bitwise reproducible
    std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    let cli = Cli::parse();
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Version => {
            println!("eqsim {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
        Command::Run { config } => {
            let cfg = load_config(config)?;
            let result = run_scenario(&cfg)?;
            let dir = write_outputs(&result, &cli.out, cli.format.map(FormatArg::to_kind))?;
            print_run_summary(&result);
            println!("wrote {}", dir.display());
            Ok(())
        }
        Command::Sweep { config } => {
            let sweep_cfg = load_sweep_config(config)?;
            let cfgs = sweep_cfg.expand()?;
            let results = scenario::sweep(&cfgs);
            let mut rows = Vec::new();
            let mut first_err: Option<Error> = None;
            for res in results {
                match res {
                    Ok(r) => {
                        write_outputs(&r, &cli.out, cli.format.map(FormatArg::to_kind))?;
                        print_run_summary(&r);
                        rows.push(SummaryRow::from_result(&r));
                    }
                    Err(e) => {
                        eprintln!("scenario failed: {e}");
                        if first_err.is_none() {
                            first_err = Some(e);
                        }
                    }
                }
            }
            if !rows.is_empty() {
                std::fs::create_dir_all(&cli.out).map_err(|source| Error::Io {
                    path: cli.out.display().to_string(),
                    source,
                })?;
                let path = cli.out.join("summary.csv");
                let file = std::fs::File::create(&path).map_err(|source| Error::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                write_summary_csv(&rows, std::io::BufWriter::new(file)).map_err(|source| {
                    Error::Io {
                        path: path.display().to_string(),
                        source,
                    }
                })?;
                println!("wrote {}", path.display());
            }
            match first_err {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Command::Check { config } => {
            let cfg = load_config(config)?;
            check_scenario(&cfg, cli.seed)
        }
    }
}

fn print_run_summary(r: &RunResult) {
    println!(
        "{}: L={} d_eff={:.4} g_bound={:.6e} g_inf={:.6e} ({}) tau_qsl={:.6e} (idx {}) \
         tau_eq={:.6e} (idx {}) delta_tau={:.6e}",
        r.scenario_id,
        r.scenario.l,
        r.bounds.d_eff_omega,
        r.bounds.g_bound_eq6,
        r.bounds.g_infty.0,
        r.bounds.g_infty_method,
        r.bounds.tau_qsl.0,
        r.bounds.dominant_tau_index,
        r.bounds.tau_eq_unified.0,
        r.bounds.dominant_tau_eq_index,
        r.bounds.delta_tau,
    );
    for note in &r.bounds.notes {
        println!("  note: {note}");
    }
}

/// Invariant audit: gap reports, context sanity, constants of motion, plus a
/// seeded random eigensolver self-test.
fn check_scenario(cfg: &eqsim_core::scenario::ScenarioConfig, seed: u64) -> Result<(), Error> {
    let (ctx, model) = eqsim_core::scenario::build_context(cfg)?;
    let tol = cfg.tolerances.degeneracy_tol;
    let full = eqsim_core::spin::gap_degeneracy_report(ctx.spectrum(), tol)?;
    let occ = ctx.occupied_gap_report(tol)?;
    println!(
        "gap report (full spectrum): levels={} min_spacing={:.3e} min_gap_collision={:.3e} degenerate={}",
        full.n_levels, full.min_level_spacing, full.min_gap_collision, full.degenerate
    );
    println!(
        "gap report (occupied):      levels={} min_spacing={:.3e} min_gap_collision={:.3e} degenerate={}",
        occ.n_levels, occ.min_level_spacing, occ.min_gap_collision, occ.degenerate
    );

    let mut failures = 0usize;
    let mut check = |name: &str, value: f64, limit: f64| {
        let ok = value <= limit;
        println!("{}: {:.3e} (limit {:.1e}) {}", name, value, limit, if ok { "ok" } else { "VIOLATED" });
        if !ok {
            failures += 1;
        }
    };

    let csum: f64 = ctx.coefficients().iter().map(|z| z.norm_sqr()).sum();
    check("sum |c_j|^2 - 1", (csum - 1.0).abs(), 1e-12);
    check("Tr(omega) - 1", (ctx.omega().trace().re - 1.0).abs(), 1e-12);
    let spec_omega = hermitian_eig(ctx.omega())?;
    check("-min eigenvalue(omega)", (-spec_omega.eigenvalues[0]).max(0.0), 1e-10);
    let m = ctx.overlap_matrix();
    let mut m_dev: f64 = 0.0;
    for i in 0..ctx.dim() {
        for j in i..ctx.dim() {
            m_dev = m_dev.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    check("M hermiticity", m_dev, 1e-12);
    let h = ctx.spectrum().reconstruct();
    let comm = eqsim_core::linalg::commutator(ctx.omega(), &h)?;
    let rel = schatten_norm(&comm, SchattenP::Two)? / schatten_norm(&h, SchattenP::Two)?;
    check("||[omega, H]||_2 / ||H||_2", rel, 1e-12);

    let grid = ctx.guarded_grid(cfg.grid.t_max, cfg.grid.n_points.min(512))?;
    let motion = ctx.global_constants_of_motion(&grid);
    check("max drift of Tr(omega rho(t))", motion.max_drift, 1e-10);
    check("fidelity identity gap", motion.fidelity_identity_gap, 1e-12);

    let norms = model.split_norms(cfg.l_s)?;
    println!(
        "split norms: ||H_S(x)I + H_SB||_inf = {:.6}, ||H_SB||_inf = {:.6}",
        norms.s_plus_sb_inf, norms.sb_inf
    );

    // randomized eigensolver self-audit
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_recon: f64 = 0.0;
    let mut worst_ortho: f64 = 0.0;
    for _ in 0..25 {
        let d = rng.gen_range(2..=32);
        let a = random_hermitian(&mut rng, d);
        let spec = hermitian_eig(&a)?;
        let scale = spec.operator_norm().max(1.0);
        worst_recon = worst_recon.max(spec.reconstruct().sub(&a)?.max_abs() / scale);
        worst_ortho = worst_ortho.max(spec.orthonormality_deviation());
    }
    check("random eigh reconstruction", worst_recon, 1e-10);
    check("random eigh orthonormality", worst_ortho, 1e-10);

    // sampling-guard headroom for the configured grid
    let configured = TimeGrid::new(cfg.grid.t_max, cfg.grid.n_points)?;
    println!(
        "grid: configured dt*width = {:.4}, guarded n_points = {}",
        configured.dt() * ctx.spectral_width(),
        grid.n_points
    );

    if failures > 0 {
        Err(Error::EigensolverFailure {
            detail: format!("{failures} invariant check(s) violated"),
        })
    } else {
        println!("all invariant checks passed");
        Ok(())
    }
}

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> DenseOperator {
    let mut m = Array2::<C64>::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            m[[i, j]] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let herm = (&m + &m.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
    DenseOperator::hermitian_unchecked(herm).expect("square by construction")
}
