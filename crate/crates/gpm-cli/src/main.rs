//! `gpm`: command-line front end for the slab pseudomode pipeline.
//!
//! Subcommands: `qnm` (mode listing), `matrices` (Hermitization dumps and
//! recovered Lindblad parameters), `spectral` (grid tabulation), `compare`
//! (grid differencing with optional pass/fail threshold).
//!
//! Exit codes: 0 success / thresholds pass, 1 threshold fail, 2 validation
//! error (bad flags, bad files, out-of-domain points), 3 numerical failure
//! (positive-definiteness, ill-conditioning, quadrature budget).

mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::thread;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use gpm_core::gpm::GpmParameters;
use gpm_core::hermitization::{factorize_v, family_matrix, hermitian_block};
use gpm_core::linalg::{hermitian_eigendecompose, ComplexMatrix};
use gpm_core::metrics::{
    build_grid_with, compare_grids, AxisSpec, Method, Region, SpectralEvaluator, SpectralGrid,
    XpSpec, XpValues,
};
use gpm_core::slab::{QnmSet, SlabCavity};
use gpm_core::Complex64;

use output::{
    grid_to_csv, grid_to_json, read_grid, render_json, write_json, write_matrix, write_values,
    MetricsDoc, QnmDoc, QnmEntry, FREQUENCY_UNITS,
};

#[derive(Parser)]
#[command(
    name = "gpm",
    version,
    about = "Generalized pseudomodes for a lossy 1D dielectric slab"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List quasi-normal modes with their complex frequencies
    Qnm(QnmArgs),
    /// Dump Hermitization matrices and recovered Lindblad parameters
    Matrices(MatricesArgs),
    /// Tabulate a spectral-density grid over (x, x', omega)
    Spectral(SpectralArgs),
    /// Compare two grid files and report difference metrics
    Compare(CompareArgs),
}

#[derive(Args, Clone)]
struct CavityArgs {
    /// Slab refractive index n_R
    #[arg(long = "n-r", default_value_t = 4.0)]
    n_r: f64,
    /// Background refractive index n_B
    #[arg(long = "n-b", default_value_t = 1.0)]
    n_b: f64,
    /// Slab length L
    #[arg(long, default_value_t = 1.0)]
    length: f64,
    /// Truncation order M (modes mu = 1..M, extended set mu = -M..M)
    #[arg(long, default_value_t = 30)]
    m: usize,
}

impl CavityArgs {
    fn cavity(&self) -> Result<SlabCavity> {
        Ok(SlabCavity::new(self.n_r, self.n_b, self.length)?)
    }
}

#[derive(Args, Clone)]
struct FamilyArgs {
    /// Real part of the Hermitization family parameter a (a = 2: slab T)
    #[arg(long = "a-re", default_value_t = 2.0)]
    a_re: f64,
    /// Imaginary part of a
    #[arg(long = "a-im", default_value_t = 0.0)]
    a_im: f64,
}

impl FamilyArgs {
    fn a_param(&self) -> Complex64 {
        Complex64::new(self.a_re, self.a_im)
    }
}

#[derive(Args)]
struct QnmArgs {
    #[command(flatten)]
    cavity: CavityArgs,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MatricesArgs {
    #[command(flatten)]
    cavity: CavityArgs,
    #[command(flatten)]
    family: FamilyArgs,
    /// Output directory for the JSON dumps
    #[arg(long)]
    out: PathBuf,
    /// Run the randomized gauge-invariance diagnostic with this seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SpectralArgs {
    #[command(flatten)]
    cavity: CavityArgs,
    #[command(flatten)]
    family: FamilyArgs,
    /// exact | gpm | pole_full | pole_positive | naive | qqnm
    #[arg(long, default_value = "gpm")]
    method: String,
    #[arg(long)]
    x_min: f64,
    #[arg(long)]
    x_max: f64,
    #[arg(long)]
    x_steps: usize,
    /// x' axis: `diag` (x' = x) or `min:max:count`
    #[arg(long, default_value = "diag")]
    xp: String,
    #[arg(long)]
    omega_min: f64,
    #[arg(long)]
    omega_max: f64,
    #[arg(long)]
    omega_steps: usize,
    /// Output file
    #[arg(long)]
    out: PathBuf,
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Worker threads (default: available parallelism). Output bytes do not
    /// depend on this.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    /// Candidate grid file
    file_a: PathBuf,
    /// Reference grid file (normalizes rel_l2 and peak)
    file_b: PathBuf,
    /// Restrict the region in x
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    /// Restrict the region in x'
    #[arg(long)]
    xp_min: Option<f64>,
    #[arg(long)]
    xp_max: Option<f64>,
    /// Restrict the region in omega
    #[arg(long)]
    omega_min: Option<f64>,
    #[arg(long)]
    omega_max: Option<f64>,
    /// Exit 1 unless max_abs_diff <= threshold x peak of reference
    #[arg(long)]
    threshold: Option<f64>,
    /// Metrics JSON output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Qnm(args) => cmd_qnm(args),
        Command::Matrices(args) => cmd_matrices(args),
        Command::Spectral(args) => cmd_spectral(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

/// Validation problems exit 2, numerical failures exit 3.
fn classify(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<gpm_core::Error>() {
        Some(e) if !e.is_validation() => 3,
        _ => 2,
    }
}

fn cmd_qnm(args: QnmArgs) -> Result<ExitCode> {
    let cavity = args.cavity.cavity()?;
    let qnms = QnmSet::new(cavity, args.cavity.m)?;
    let config = json!({
        "command": "qnm",
        "n_r": args.cavity.n_r,
        "n_b": args.cavity.n_b,
        "length": args.cavity.length,
        "m": args.cavity.m,
    });
    // M = 0 still has the mu = 0 mode; the extended listing is never empty.
    let indices = if args.cavity.m == 0 {
        vec![0]
    } else {
        qnms.indices()
    };
    let modes: Vec<QnmEntry> = indices
        .into_iter()
        .map(|mu| {
            let w = qnms.frequency(mu);
            QnmEntry {
                mu,
                re_omega: w.re,
                im_omega: w.im,
                round_trip_residual: qnms.round_trip_residual(mu),
            }
        })
        .collect();
    let doc = QnmDoc {
        config,
        units: FREQUENCY_UNITS.to_string(),
        modes,
    };
    match &args.out {
        Some(path) => write_json(path, &doc)?,
        None => print!("{}", render_json(&doc)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_matrices(args: MatricesArgs) -> Result<ExitCode> {
    let cavity = args.cavity.cavity()?;
    let qnms = QnmSet::new(cavity, args.cavity.m)?;
    let a = args.family.a_param();
    let config = json!({
        "command": "matrices",
        "n_r": args.cavity.n_r,
        "n_b": args.cavity.n_b,
        "length": args.cavity.length,
        "m": args.cavity.m,
        "a_re": args.family.a_re,
        "a_im": args.family.a_im,
        "seed": args.seed,
    });
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating output directory {}", args.out.display()))?;
    let file = |name: &str| args.out.join(name);

    // Stage the pipeline by hand so the stages before a positive-definiteness
    // failure still leave their dumps behind.
    let t_extended = family_matrix(&qnms, a);
    write_matrix(&file("t_extended.json"), &t_extended, FREQUENCY_UNITS, &config)?;
    let t_hermitian = hermitian_block(&t_extended, &qnms)?;
    write_matrix(&file("t_hermitian.json"), &t_hermitian, FREQUENCY_UNITS, &config)?;
    let (eigenvalues, _) = hermitian_eigendecompose(&t_hermitian)?;
    write_values(
        &file("t_hermitian_eigenvalues.json"),
        &eigenvalues,
        FREQUENCY_UNITS,
        &config,
    )?;
    if eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(gpm_core::Error::NotPositiveDefinite { eigenvalues }.into());
    }
    let v = factorize_v(&t_hermitian)?;
    write_matrix(&file("v.json"), &v, "sqrt_c_over_L", &config)?;
    let params = GpmParameters::from_v(&qnms, v)?;
    write_matrix(&file("h.json"), params.h_matrix(), FREQUENCY_UNITS, &config)?;
    write_matrix(&file("omega.json"), params.omega_matrix(), FREQUENCY_UNITS, &config)?;
    write_matrix(&file("kappa.json"), params.kappa_matrix(), FREQUENCY_UNITS, &config)?;
    write_matrix(&file("gamma.json"), params.gamma_matrix(), FREQUENCY_UNITS, &config)?;
    let (kappa_eigenvalues, _) = hermitian_eigendecompose(params.kappa_matrix())?;
    write_values(
        &file("kappa_eigenvalues.json"),
        &kappa_eigenvalues,
        FREQUENCY_UNITS,
        &config,
    )?;
    let (gamma_eigenvalues, _) = hermitian_eigendecompose(params.gamma_matrix())?;
    write_values(
        &file("gamma_eigenvalues.json"),
        &gamma_eigenvalues,
        FREQUENCY_UNITS,
        &config,
    )?;

    if let Some(seed) = args.seed {
        let report = gauge_check(&qnms, &params, seed)?;
        write_json(&file("gauge_check.json"), &report)?;
        if !report["passed"].as_bool().unwrap_or(false) {
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Draw a Haar-ish random unitary (Gram-Schmidt on a square matrix with
/// uniform complex entries) and verify the spectral density is unchanged
/// under V -> VU while the parameter matrices move.
fn gauge_check(qnms: &QnmSet, params: &GpmParameters, seed: u64) -> Result<Value> {
    let m = qnms.truncation();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_unitary(m, &mut rng);
    let unitarity = u
        .mul(&u.adjoint())
        .max_abs_diff(&ComplexMatrix::identity(m));
    let gauged = GpmParameters::from_v(qnms, params.v_factor().mul(&u))?;
    let omega_shift = gauged.omega_matrix().max_abs_diff(params.omega_matrix());
    let half = 0.45 * qnms.cavity().length;
    let nodes: Vec<(f64, f64, f64)> = (0..8)
        .map(|_| {
            (
                rng.gen_range(-half..half),
                rng.gen_range(-half..half),
                rng.gen_range(0.5..20.0),
            )
        })
        .collect();
    let mut spectral_shift = 0.0f64;
    for &(x, xp, omega) in &nodes {
        let base = params.spectral(x, xp, omega)?;
        let moved = gauged.spectral(x, xp, omega)?;
        spectral_shift = spectral_shift.max((base - moved).abs());
    }
    let tolerance = 1e-9;
    Ok(json!({
        "seed": seed,
        "unitarity_residual": unitarity,
        "omega_shift": omega_shift,
        "spectral_max_shift": spectral_shift,
        "tolerance": tolerance,
        "nodes": nodes.iter().map(|&(x, xp, w)| json!([x, xp, w])).collect::<Vec<_>>(),
        "passed": spectral_shift <= tolerance && omega_shift > tolerance,
    }))
}

fn random_unitary(m: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    loop {
        let raw = ComplexMatrix::from_fn(m, m, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        if let Some(q) = gram_schmidt_columns(&raw) {
            return q;
        }
    }
}

/// Column-wise modified Gram-Schmidt; None when a column degenerates.
fn gram_schmidt_columns(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    let m = a.rows();
    let mut cols: Vec<Vec<Complex64>> = (0..m).map(|j| a.column(j)).collect();
    for j in 0..m {
        for k in 0..j {
            let proj: Complex64 = (0..m).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..m {
                let sub = proj * cols[k][i];
                cols[j][i] -= sub;
            }
        }
        let norm: f64 = cols[j].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            return None;
        }
        for i in 0..m {
            cols[j][i] /= norm;
        }
    }
    Some(ComplexMatrix::from_fn(m, m, |i, j| cols[j][i]))
}

fn parse_xp_spec(spec: &str) -> Result<XpSpec> {
    if spec == "diag" {
        return Ok(XpSpec::Diagonal);
    }
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("--xp must be `diag` or `min:max:count`, got '{spec}'");
    }
    let min: f64 = parts[0].parse().context("--xp min")?;
    let max: f64 = parts[1].parse().context("--xp max")?;
    let count: usize = parts[2].parse().context("--xp count")?;
    Ok(XpSpec::Axis(AxisSpec::new(min, max, count)?))
}

fn axis_echo(spec: &AxisSpec) -> Value {
    json!({"min": spec.min(), "max": spec.max(), "steps": spec.count()})
}

fn cmd_spectral(args: SpectralArgs) -> Result<ExitCode> {
    let cavity = args.cavity.cavity()?;
    let method = Method::parse(&args.method)?;
    let x_spec = AxisSpec::new(args.x_min, args.x_max, args.x_steps).context("--x axis")?;
    let omega_spec =
        AxisSpec::new(args.omega_min, args.omega_max, args.omega_steps).context("--omega axis")?;
    let xp_spec = parse_xp_spec(&args.xp)?;
    if !matches!(args.format.as_str(), "csv" | "json") {
        bail!("--format must be csv or json, got '{}'", args.format);
    }
    let config = json!({
        "command": "spectral",
        "n_r": args.cavity.n_r,
        "n_b": args.cavity.n_b,
        "length": args.cavity.length,
        "m": args.cavity.m,
        "a_re": args.family.a_re,
        "a_im": args.family.a_im,
        "method": method.tag(),
        "x": axis_echo(&x_spec),
        "xp": match &xp_spec {
            XpSpec::Diagonal => json!("diag"),
            XpSpec::Axis(spec) => axis_echo(spec),
        },
        "omega": axis_echo(&omega_spec),
        "format": args.format,
    });
    let evaluator = SpectralEvaluator::new(&cavity, args.cavity.m, method, args.family.a_param())?;
    let jobs = args
        .jobs
        .unwrap_or_else(|| {
            thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .max(1);
    let grid = parallel_grid(&evaluator, &x_spec, &xp_spec, &omega_spec, jobs)?;
    let text = match args.format.as_str() {
        "csv" => grid_to_csv(&grid, &config),
        _ => grid_to_json(&grid, &config)?,
    };
    std::fs::write(&args.out, text)
        .with_context(|| format!("writing {}", args.out.display()))?;
    Ok(ExitCode::SUCCESS)
}

/// Evaluate the grid with `jobs` workers over contiguous x chunks. Chunks are
/// reassembled in axis order and every node is a pure function of its
/// coordinates, so the result is identical to the sequential evaluation.
fn parallel_grid(
    evaluator: &SpectralEvaluator,
    x_spec: &AxisSpec,
    xp_spec: &XpSpec,
    omega_spec: &AxisSpec,
    jobs: usize,
) -> Result<SpectralGrid> {
    let x_values = x_spec.values();
    if jobs <= 1 || x_values.len() <= 1 {
        return Ok(build_grid_with(evaluator, x_spec, xp_spec, omega_spec)?);
    }
    let omega_values = omega_spec.values();
    let xp = match xp_spec {
        XpSpec::Diagonal => XpValues::Diagonal,
        XpSpec::Axis(spec) => XpValues::Axis(spec.values()),
    };
    let xp_axis: Option<&[f64]> = match &xp {
        XpValues::Diagonal => None,
        XpValues::Axis(v) => Some(v),
    };
    let per_x = xp_axis.map_or(1, |v| v.len()) * omega_values.len();
    let workers = jobs.min(x_values.len());
    let chunk_len = x_values.len().div_ceil(workers);
    let chunks: Vec<&[f64]> = x_values.chunks(chunk_len).collect();
    let results: Vec<gpm_core::Result<Vec<f64>>> = thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|chunk| {
                let omega_values = &omega_values;
                scope.spawn(move || -> gpm_core::Result<Vec<f64>> {
                    let mut values = Vec::with_capacity(chunk.len() * per_x);
                    for &x in *chunk {
                        let xps: &[f64] = match xp_axis {
                            None => core::slice::from_ref(&x),
                            Some(v) => v,
                        };
                        for &xp_here in xps {
                            for &omega in omega_values {
                                let value = evaluator
                                    .eval(x, xp_here, omega)
                                    .map_err(|e| e.at_grid_node(x, xp_here, omega))?;
                                values.push(value);
                            }
                        }
                    }
                    Ok(values)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("grid worker panicked"))
            .collect()
    });
    let mut values = Vec::with_capacity(x_values.len() * per_x);
    for chunk in results {
        values.extend(chunk?);
    }
    Ok(SpectralGrid::from_parts(
        evaluator.method(),
        evaluator.cavity().clone(),
        evaluator.truncation(),
        x_values,
        xp,
        omega_values,
        values,
    )?)
}

fn bounds(min: Option<f64>, max: Option<f64>) -> Option<(f64, f64)> {
    match (min, max) {
        (None, None) => None,
        (lo, hi) => Some((
            lo.unwrap_or(f64::NEG_INFINITY),
            hi.unwrap_or(f64::INFINITY),
        )),
    }
}

fn bounds_echo(range: Option<(f64, f64)>) -> Value {
    match range {
        None => Value::Null,
        Some((lo, hi)) => json!([lo, hi]),
    }
}

fn cmd_compare(args: CompareArgs) -> Result<ExitCode> {
    let (candidate, _) = read_grid(&args.file_a)?;
    let (reference, _) = read_grid(&args.file_b)?;
    let region = Region {
        x: bounds(args.x_min, args.x_max),
        xp: bounds(args.xp_min, args.xp_max),
        omega: bounds(args.omega_min, args.omega_max),
    };
    let metrics = compare_grids(&candidate, &reference, &region)?;
    let config = json!({
        "command": "compare",
        "file_a": args.file_a.display().to_string(),
        "file_b": args.file_b.display().to_string(),
        "threshold": args.threshold,
    });
    let doc = MetricsDoc {
        config,
        max_abs_diff: metrics.max_abs_diff,
        rel_l2: metrics.rel_l2,
        peak: metrics.peak_of_reference,
        region: json!({
            "x": bounds_echo(region.x),
            "xp": bounds_echo(region.xp),
            "omega": bounds_echo(region.omega),
        }),
    };
    match &args.out {
        Some(path) => write_json(path, &doc)?,
        None => print!("{}", render_json(&doc)?),
    }
    if let Some(threshold) = args.threshold {
        if metrics.max_abs_diff > threshold * metrics.peak_of_reference {
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}
