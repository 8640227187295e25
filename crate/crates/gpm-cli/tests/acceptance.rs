//! Acceptance suite: fourteen numbered criteria, one PASS/FAIL line each,
//! nonzero exit when any fail. Tolerances and runtime budgets are pinned in
//! the constants below next to each criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gpm_core::gpm::{
    kramers_kronig_check, pole_expansion_spectral_hermitized, time_domain_oracle, GpmParameters,
};
use gpm_core::hermitization::{
    extended_identity_residual, family_matrix, hermitian_block, t2_matrix, HermitizationSolution,
    T2Method,
};
use gpm_core::linalg::{hermitian_eigendecompose, ComplexMatrix};
use gpm_core::metrics::{
    build_grid_with, compare_grids, AxisSpec, Method, Region, SpectralEvaluator, SpectralGrid,
    XpSpec, DEFAULT_A_PARAM,
};
use gpm_core::slab::{exact_spectral, QnmSet, SlabCavity};
use gpm_core::Complex64;

type Outcome = Result<String, String>;

fn fail<T>(msg: String) -> Result<T, String> {
    Err(msg)
}

fn err_str(e: gpm_core::Error) -> String {
    e.to_string()
}

fn cavity() -> SlabCavity {
    SlabCavity::new(4.0, 1.0, 1.0).expect("default cavity is valid")
}

fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    AxisSpec::new(min, max, count).expect("valid axis").values()
}

/// ‖candidate − reference‖₂ / ‖reference‖₂.
fn rel_l2(candidate: &[f64], reference: &[f64]) -> f64 {
    let num: f64 = candidate
        .iter()
        .zip(reference)
        .map(|(c, r)| (c - r).powi(2))
        .sum();
    let den: f64 = reference.iter().map(|r| r * r).sum();
    (num / den).sqrt()
}

/// Shared interior-regression grids (diagonal x/L ∈ [0, 0.4] × 41,
/// ωL/c ∈ [2, 20] × 181, M = 30): criterion 7 judges them, criteria 8, 12,
/// and 13 reuse the frozen bound and the reference data.
struct Shared {
    gpm: SpectralGrid,
    exact: SpectralGrid,
    max_abs_diff: f64,
    peak: f64,
    /// 0.05 × max|exact|: the interior acceptance tolerance.
    bound: f64,
    build_seconds: f64,
}

const INTERIOR_RATIO_TOL: f64 = 0.05;

fn build_shared() -> Result<Shared, String> {
    let cav = cavity();
    let x = AxisSpec::new(0.0, 0.4, 41).map_err(err_str)?;
    let w = AxisSpec::new(2.0, 20.0, 181).map_err(err_str)?;
    let start = Instant::now();
    let gpm_eval = SpectralEvaluator::new(&cav, 30, Method::Gpm, DEFAULT_A_PARAM).map_err(err_str)?;
    let gpm = build_grid_with(&gpm_eval, &x, &XpSpec::Diagonal, &w).map_err(err_str)?;
    let exact_eval =
        SpectralEvaluator::new(&cav, 30, Method::Exact, DEFAULT_A_PARAM).map_err(err_str)?;
    let exact = build_grid_with(&exact_eval, &x, &XpSpec::Diagonal, &w).map_err(err_str)?;
    let build_seconds = start.elapsed().as_secs_f64();
    let metrics = compare_grids(&gpm, &exact, &Region::all()).map_err(err_str)?;
    Ok(Shared {
        gpm,
        exact,
        max_abs_diff: metrics.max_abs_diff,
        peak: metrics.peak_of_reference,
        bound: INTERIOR_RATIO_TOL * metrics.peak_of_reference,
        build_seconds,
    })
}

/// 1. QNM closed forms: round-trip condition and conjugation symmetry within
/// 1e−13 for μ ∈ [−30, 30], n_R ∈ {2, 4, 8}, n_B = 1, in under a second.
fn criterion_1() -> Outcome {
    const TOL: f64 = 1e-13;
    const BUDGET_S: f64 = 1.0;
    let start = Instant::now();
    let mut max_round_trip = 0.0f64;
    let mut max_conjugation = 0.0f64;
    for n_r in [2.0, 4.0, 8.0] {
        let cav = SlabCavity::new(n_r, 1.0, 1.0).map_err(err_str)?;
        let qnms = QnmSet::new(cav, 30).map_err(err_str)?;
        for mu in -30..=30 {
            max_round_trip = max_round_trip.max(qnms.round_trip_residual(mu));
            let conj = (qnms.frequency(mu) + qnms.frequency(-mu).conj()).norm();
            max_conjugation = max_conjugation.max(conj);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    if max_round_trip > TOL {
        return fail(format!("round-trip residual {max_round_trip:.3e} > {TOL:.0e}"));
    }
    if max_conjugation > TOL {
        return fail(format!("conjugation residual {max_conjugation:.3e} > {TOL:.0e}"));
    }
    if elapsed > BUDGET_S {
        return fail(format!("runtime {elapsed:.2} s exceeds {BUDGET_S} s"));
    }
    Ok(format!(
        "round-trip {max_round_trip:.2e}, conjugation {max_conjugation:.2e} (tol {TOL:.0e}, {elapsed:.2} s)"
    ))
}

/// 2. Quadrature and closed-form evaluations of the second family matrix
/// agree entrywise within 1e−8 relative on the full extended block of an
/// M = 20 mode set (41×41), n_R = 4, in under 30 s. Entries the closed form
/// sends to exact zero (parity) are compared absolutely.
fn criterion_2() -> Outcome {
    const REL_TOL: f64 = 1e-8;
    const ZERO_TOL: f64 = 1e-10;
    const BUDGET_S: f64 = 30.0;
    let start = Instant::now();
    let qnms = QnmSet::new(cavity(), 20).map_err(err_str)?;
    let quad = t2_matrix(&qnms, T2Method::Quadrature).map_err(err_str)?;
    let closed = t2_matrix(&qnms, T2Method::SlabClosedForm).map_err(err_str)?;
    let elapsed = start.elapsed().as_secs_f64();
    let scale = closed.max_abs();
    let mut worst_rel = 0.0f64;
    let mut worst_zero = 0.0f64;
    for i in 0..closed.rows() {
        for j in 0..closed.cols() {
            let c = closed[(i, j)];
            let q = quad[(i, j)];
            if c.norm() > 1e-12 * scale {
                worst_rel = worst_rel.max((q - c).norm() / c.norm());
            } else {
                worst_zero = worst_zero.max(q.norm() / scale);
            }
        }
    }
    if worst_rel > REL_TOL {
        return fail(format!("relative disagreement {worst_rel:.3e} > {REL_TOL:.0e}"));
    }
    if worst_zero > ZERO_TOL {
        return fail(format!("parity-zero entry at {worst_zero:.3e} of scale > {ZERO_TOL:.0e}"));
    }
    if elapsed > BUDGET_S {
        return fail(format!("runtime {elapsed:.2} s exceeds {BUDGET_S} s"));
    }
    Ok(format!(
        "worst relative {worst_rel:.2e}, worst parity-zero {worst_zero:.2e} ({elapsed:.1} s)"
    ))
}

/// 3. Extended-identity residual of the a = 2 family matrix, sampled at
/// x/L ∈ {0.05, 0.1, 0.2} × μ ∈ {1, 2, 3}: the aggregate (max over the nine
/// samples) decreases monotonically across M ∈ {10, 20, 30, 60}, every
/// individual sample decreases end to end, and the M = 60 aggregate is
/// ≤ 1e−2.
fn criterion_3() -> Outcome {
    const FINAL_TOL: f64 = 1e-2;
    const MS: [usize; 4] = [10, 20, 30, 60];
    let xs = [0.05, 0.1, 0.2];
    let mus = [1i64, 2, 3];
    let mut per_sample = vec![[0.0f64; 4]; 9];
    let mut aggregate = [0.0f64; 4];
    for (mi, &m) in MS.iter().enumerate() {
        let qnms = QnmSet::new(cavity(), m).map_err(err_str)?;
        let t = family_matrix(&qnms, Complex64::new(2.0, 0.0));
        for (si, (x, mu)) in xs
            .iter()
            .flat_map(|x| mus.iter().map(move |mu| (*x, *mu)))
            .enumerate()
        {
            let r = extended_identity_residual(&qnms, &t, mu, x).map_err(err_str)?;
            per_sample[si][mi] = r;
            aggregate[mi] = aggregate[mi].max(r);
        }
    }
    for w in aggregate.windows(2) {
        if w[1] >= w[0] {
            return fail(format!(
                "aggregate residuals not monotone: {aggregate:?} over M={MS:?}"
            ));
        }
    }
    for (si, r) in per_sample.iter().enumerate() {
        if r[3] >= r[0] {
            return fail(format!(
                "sample {si} residual did not decrease end to end: {:.3e} → {:.3e}",
                r[0], r[3]
            ));
        }
    }
    if aggregate[3] > FINAL_TOL {
        return fail(format!("M=60 aggregate {:.3e} > {FINAL_TOL:.0e}", aggregate[3]));
    }
    Ok(format!(
        "aggregate residuals {:.2e} → {:.2e} → {:.2e} → {:.2e} over M={MS:?}",
        aggregate[0], aggregate[1], aggregate[2], aggregate[3]
    ))
}

/// 4. The Hermitian block for n_R = 4, M = 30 is positive definite: all 30
/// eigenvalues strictly positive, in under a second.
fn criterion_4() -> Outcome {
    const BUDGET_S: f64 = 1.0;
    let start = Instant::now();
    let qnms = QnmSet::new(cavity(), 30).map_err(err_str)?;
    let t = family_matrix(&qnms, Complex64::new(2.0, 0.0));
    let th = hermitian_block(&t, &qnms).map_err(err_str)?;
    let (eigenvalues, _) = hermitian_eigendecompose(&th).map_err(err_str)?;
    let elapsed = start.elapsed().as_secs_f64();
    if eigenvalues.len() != 30 {
        return fail(format!("expected 30 eigenvalues, got {}", eigenvalues.len()));
    }
    let min = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return fail(format!("smallest eigenvalue {min:.3e} is not positive"));
    }
    if elapsed > BUDGET_S {
        return fail(format!("runtime {elapsed:.2} s exceeds {BUDGET_S} s"));
    }
    Ok(format!("30 eigenvalues in [{min:.3e}, {:.3e}] ({elapsed:.2} s)",
        eigenvalues.iter().cloned().fold(0.0f64, f64::max)))
}

/// 5. gPM spectral density ≡ Hermitized pole expansion within 1e−10 at 100
/// seeded random interior (x, x′, ω) triples, M = 30.
fn criterion_5() -> Outcome {
    const TOL: f64 = 1e-10;
    let qnms = QnmSet::new(cavity(), 30).map_err(err_str)?;
    let solution = HermitizationSolution::solve(&qnms, DEFAULT_A_PARAM).map_err(err_str)?;
    let params = GpmParameters::from_solution(&qnms, &solution).map_err(err_str)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x = rng.gen_range(-0.45..0.45);
        let xp = rng.gen_range(-0.45..0.45);
        let omega = rng.gen_range(0.5..25.0);
        let direct = params.spectral(x, xp, omega).map_err(err_str)?;
        let pole = pole_expansion_spectral_hermitized(&solution.t_hermitian, &qnms, x, xp, omega)
            .map_err(err_str)?;
        worst = worst.max((direct - pole).abs());
    }
    if worst > TOL {
        return fail(format!("max |gPM − pole route| = {worst:.3e} > {TOL:.0e}"));
    }
    Ok(format!("max |gPM − pole route| = {worst:.2e} over 100 triples (tol {TOL:.0e})"))
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

/// 6. Gauge invariance: under ten seeded random unitaries V → VU the spectral
/// density moves by ≤ 1e−9 while the ω, κ, γ matrices all move by a
/// macroscopic amount (the check is not vacuous).
fn criterion_6() -> Outcome {
    const SPECTRAL_TOL: f64 = 1e-9;
    const MOVEMENT_FLOOR: f64 = 1e-6;
    let qnms = QnmSet::new(cavity(), 30).map_err(err_str)?;
    let solution = HermitizationSolution::solve(&qnms, DEFAULT_A_PARAM).map_err(err_str)?;
    let params = GpmParameters::from_solution(&qnms, &solution).map_err(err_str)?;
    let nodes = [
        (0.1, 0.1, 3.0),
        (-0.2, 0.35, 7.5),
        (0.05, -0.4, 12.0),
        (0.15, 0.15, 18.0),
        (-0.3, -0.1, 0.7),
    ];
    let base: Vec<f64> = nodes
        .iter()
        .map(|&(x, xp, w)| params.spectral(x, xp, w))
        .collect::<gpm_core::Result<_>>()
        .map_err(err_str)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let mut worst_shift = 0.0f64;
    let mut least_movement = f64::INFINITY;
    for _ in 0..10 {
        let u = random_unitary(30, &mut rng);
        let gauged =
            GpmParameters::from_v(&qnms, params.v_factor().mul(&u)).map_err(err_str)?;
        for (node, base_value) in nodes.iter().zip(&base) {
            let moved = gauged.spectral(node.0, node.1, node.2).map_err(err_str)?;
            worst_shift = worst_shift.max((moved - base_value).abs());
        }
        for (ours, theirs) in [
            (params.omega_matrix(), gauged.omega_matrix()),
            (params.kappa_matrix(), gauged.kappa_matrix()),
            (params.gamma_matrix(), gauged.gamma_matrix()),
        ] {
            least_movement = least_movement.min(ours.max_abs_diff(theirs));
        }
    }
    if worst_shift > SPECTRAL_TOL {
        return fail(format!("spectral density shifted by {worst_shift:.3e} > {SPECTRAL_TOL:.0e}"));
    }
    if least_movement < MOVEMENT_FLOOR {
        return fail(format!(
            "a parameter matrix moved only {least_movement:.3e}; the gauge check is vacuous"
        ));
    }
    Ok(format!(
        "max spectral shift {worst_shift:.2e} (tol {SPECTRAL_TOL:.0e}); parameter matrices moved ≥ {least_movement:.2e}"
    ))
}

/// 7. Interior matching regression: on the shared diagonal grid,
/// max|gPM − exact| ≤ 0.05 × max|exact|, built single-threaded in < 2 min.
fn criterion_7(shared: &Shared) -> Outcome {
    const BUDGET_S: f64 = 120.0;
    let ratio = shared.max_abs_diff / shared.peak;
    if ratio > INTERIOR_RATIO_TOL {
        return fail(format!(
            "max|gPM − exact| = {:.4} is {ratio:.4} of peak {:.4} (tol {INTERIOR_RATIO_TOL})",
            shared.max_abs_diff, shared.peak
        ));
    }
    if shared.build_seconds > BUDGET_S {
        return fail(format!(
            "grid construction took {:.1} s, budget {BUDGET_S} s",
            shared.build_seconds
        ));
    }
    Ok(format!(
        "max|gPM − exact| = {:.4} ≤ {INTERIOR_RATIO_TOL} × peak {:.4} (ratio {ratio:.4}, {:.1} s)",
        shared.max_abs_diff, shared.peak, shared.build_seconds
    ))
}

/// 8. Above the truncation band (ωL/c ∈ [25, 30], same x axis, same M) the
/// deviation exceeds the interior bound.
fn criterion_8(shared: &Shared) -> Outcome {
    let cav = cavity();
    let x = AxisSpec::new(0.0, 0.4, 41).map_err(err_str)?;
    let w = AxisSpec::new(25.0, 30.0, 51).map_err(err_str)?;
    let gpm_eval = SpectralEvaluator::new(&cav, 30, Method::Gpm, DEFAULT_A_PARAM).map_err(err_str)?;
    let gpm = build_grid_with(&gpm_eval, &x, &XpSpec::Diagonal, &w).map_err(err_str)?;
    let exact_eval =
        SpectralEvaluator::new(&cav, 30, Method::Exact, DEFAULT_A_PARAM).map_err(err_str)?;
    let exact = build_grid_with(&exact_eval, &x, &XpSpec::Diagonal, &w).map_err(err_str)?;
    let metrics = compare_grids(&gpm, &exact, &Region::all()).map_err(err_str)?;
    if metrics.max_abs_diff <= shared.bound {
        return fail(format!(
            "high-band deviation {:.4} does not exceed the interior bound {:.4}",
            metrics.max_abs_diff, shared.bound
        ));
    }
    Ok(format!(
        "high-band max|gPM − exact| = {:.3} > interior bound {:.4}",
        metrics.max_abs_diff, shared.bound
    ))
}

/// 9. Low-frequency artifact at x/L = 0.15: the deviation at ωL/c = 0.2
/// exceeds the deviation at ωL/c = 5. Run at M = 60, where truncation error
/// at ω = 5 is resolved away and the ω-independent low-frequency artifact is
/// isolated; at M = 30 the ω = 5 point sits on a truncation-error
/// oscillation of comparable size.
fn criterion_9() -> Outcome {
    let cav = cavity();
    let eval = SpectralEvaluator::new(&cav, 60, Method::Gpm, DEFAULT_A_PARAM).map_err(err_str)?;
    let x = 0.15;
    let dev = |omega: f64| -> Result<f64, String> {
        let approx = eval.eval(x, x, omega).map_err(err_str)?;
        let truth = exact_spectral(&cav, x, x, omega).map_err(err_str)?;
        Ok((approx - truth).abs())
    };
    let low = dev(0.2)?;
    let mid = dev(5.0)?;
    if low <= mid {
        return fail(format!("deviation at ω=0.2 ({low:.4e}) ≤ deviation at ω=5 ({mid:.4e})"));
    }
    Ok(format!("deviation at ω=0.2 is {low:.3e} > {mid:.3e} at ω=5 (M=60)"))
}

/// 10. Time-domain oracle at M = 10: the Fourier transform of the
/// ODE-integrated correlator matches the resolvent within 1e−4 across
/// ωL/c ∈ [0, 20], in under a minute.
fn criterion_10() -> Outcome {
    const TOL: f64 = 1e-4;
    const BUDGET_S: f64 = 60.0;
    let start = Instant::now();
    let qnms = QnmSet::new(cavity(), 10).map_err(err_str)?;
    let solution = HermitizationSolution::solve(&qnms, DEFAULT_A_PARAM).map_err(err_str)?;
    let params = GpmParameters::from_solution(&qnms, &solution).map_err(err_str)?;
    let omegas = linspace(0.0, 20.0, 41);
    // Horizon 150 pushes the slowest mode's tail, e^(Im ω̃ · H) with
    // Im ω̃ = ln(0.6)/4, below the oracle's 1e-8 decay threshold.
    let report = time_domain_oracle(&params, &omegas, 150.0, 0.005).map_err(err_str)?;
    let elapsed = start.elapsed().as_secs_f64();
    let worst = report.deviations.iter().cloned().fold(0.0f64, f64::max);
    if !report.decayed {
        return fail(format!("correlator tail {:.3e} had not decayed by the horizon", report.tail));
    }
    if worst > TOL {
        return fail(format!("max deviation {worst:.3e} > {TOL:.0e}"));
    }
    if elapsed > BUDGET_S {
        return fail(format!("runtime {elapsed:.1} s exceeds {BUDGET_S} s"));
    }
    Ok(format!("max deviation {worst:.2e} over 41 frequencies (tol {TOL:.0e}, {elapsed:.1} s)"))
}

/// 11. Kramers-Kronig: the Lorentzian closed-form oracle reconstructs within
/// 2% (cutoff 602 ≈ 50|z₀|); the gPM real part at x/L = 0.15, ωL/c = 10,
/// M = 30 reconstructs from the spectral density within 5% with cutoff 200.
fn criterion_11() -> Outcome {
    const LORENTZIAN_TOL: f64 = 0.02;
    const GPM_TOL: f64 = 0.05;
    let z0 = Complex64::new(12.0, -1.0);
    let r = 2.0;
    let analytic = (r / (z0 - 10.0)).re;
    let reconstructed =
        kramers_kronig_check(|w| (r / (z0 - w)).im, 10.0, 602.0).map_err(err_str)?;
    let lorentzian_rel = (reconstructed - analytic).abs() / analytic.abs();
    if lorentzian_rel > LORENTZIAN_TOL {
        return fail(format!(
            "Lorentzian reconstruction off by {:.2}% > {:.0}%",
            100.0 * lorentzian_rel,
            100.0 * LORENTZIAN_TOL
        ));
    }
    let qnms = QnmSet::new(cavity(), 30).map_err(err_str)?;
    let solution = HermitizationSolution::solve(&qnms, DEFAULT_A_PARAM).map_err(err_str)?;
    let params = GpmParameters::from_solution(&qnms, &solution).map_err(err_str)?;
    let x = 0.15;
    let direct = params.correlator(x, x, 10.0).map_err(err_str)?.re;
    let recon = kramers_kronig_check(
        |w| params.spectral(x, x, w).expect("gPM spectral density is total in ω"),
        10.0,
        200.0,
    )
    .map_err(err_str)?;
    let gpm_rel = (recon - direct).abs() / direct.abs();
    if gpm_rel > GPM_TOL {
        return fail(format!(
            "gPM reconstruction off by {:.2}% > {:.0}%",
            100.0 * gpm_rel,
            100.0 * GPM_TOL
        ));
    }
    Ok(format!(
        "Lorentzian within {:.2}% (tol 2%), gPM within {:.2}% (tol 5%)",
        100.0 * lorentzian_rel,
        100.0 * gpm_rel
    ))
}

/// 12. Method ordering on the shared interior grid: aggregate relative L2
/// error of gPM is below both the naive pole sum and the quantized-QNM
/// construction; in the low band (ωL/c ∈ (0, 5), x/L = 0.15) the
/// quantized-QNM error exceeds gPM's. Under 10 min including the S-matrix
/// quadrature.
fn criterion_12(shared: &Shared) -> Outcome {
    const BUDGET_S: f64 = 600.0;
    let start = Instant::now();
    let cav = cavity();
    let x = AxisSpec::new(0.0, 0.4, 41).map_err(err_str)?;
    let w = AxisSpec::new(2.0, 20.0, 181).map_err(err_str)?;
    let naive_eval =
        SpectralEvaluator::new(&cav, 30, Method::Naive, DEFAULT_A_PARAM).map_err(err_str)?;
    let naive = build_grid_with(&naive_eval, &x, &XpSpec::Diagonal, &w).map_err(err_str)?;
    let qqnm_eval =
        SpectralEvaluator::new(&cav, 30, Method::Qqnm, DEFAULT_A_PARAM).map_err(err_str)?;
    let qqnm = build_grid_with(&qqnm_eval, &x, &XpSpec::Diagonal, &w).map_err(err_str)?;
    let gpm_err = compare_grids(&shared.gpm, &shared.exact, &Region::all())
        .map_err(err_str)?
        .rel_l2;
    let naive_err = compare_grids(&naive, &shared.exact, &Region::all())
        .map_err(err_str)?
        .rel_l2;
    let qqnm_err = compare_grids(&qqnm, &shared.exact, &Region::all())
        .map_err(err_str)?
        .rel_l2;
    if gpm_err > naive_err {
        return fail(format!("gPM error {gpm_err:.4} exceeds naive error {naive_err:.4}"));
    }
    if gpm_err > qqnm_err {
        return fail(format!("gPM error {gpm_err:.4} exceeds quantized-QNM error {qqnm_err:.4}"));
    }
    // Low band, strictly inside (0, 5).
    let gpm_eval = SpectralEvaluator::new(&cav, 30, Method::Gpm, DEFAULT_A_PARAM).map_err(err_str)?;
    let omegas = linspace(0.2, 4.8, 24);
    let xs = 0.15;
    let mut truth = Vec::with_capacity(omegas.len());
    let mut gpm_low = Vec::with_capacity(omegas.len());
    let mut qqnm_low = Vec::with_capacity(omegas.len());
    for &omega in &omegas {
        truth.push(exact_spectral(&cav, xs, xs, omega).map_err(err_str)?);
        gpm_low.push(gpm_eval.eval(xs, xs, omega).map_err(err_str)?);
        qqnm_low.push(qqnm_eval.eval(xs, xs, omega).map_err(err_str)?);
    }
    let gpm_low_err = rel_l2(&gpm_low, &truth);
    let qqnm_low_err = rel_l2(&qqnm_low, &truth);
    let elapsed = start.elapsed().as_secs_f64();
    if qqnm_low_err <= gpm_low_err {
        return fail(format!(
            "low-band quantized-QNM error {qqnm_low_err:.4} does not exceed gPM's {gpm_low_err:.4}"
        ));
    }
    if elapsed > BUDGET_S {
        return fail(format!("runtime {elapsed:.1} s exceeds {BUDGET_S} s"));
    }
    Ok(format!(
        "rel-L2: gPM {gpm_err:.4} ≤ naive {naive_err:.4}, ≤ qQNM {qqnm_err:.4}; low band qQNM {qqnm_low_err:.3} > gPM {gpm_low_err:.3} ({elapsed:.1} s)"
    ))
}

/// 13. Position-swap asymmetry at ωL/c = 15: max |S(x,x′) − S(x′,x)| of the
/// gPM density over x, x′ ∈ [0, 0.4]L stays within the interior bound.
fn criterion_13(shared: &Shared) -> Outcome {
    let cav = cavity();
    let axis = AxisSpec::new(0.0, 0.4, 41).map_err(err_str)?;
    let w = AxisSpec::new(15.0, 15.0, 1).map_err(err_str)?;
    let eval = SpectralEvaluator::new(&cav, 30, Method::Gpm, DEFAULT_A_PARAM).map_err(err_str)?;
    let grid = build_grid_with(&eval, &axis, &XpSpec::Axis(axis.clone()), &w).map_err(err_str)?;
    let n = grid.x_values().len();
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((grid.value(i, j, 0) - grid.value(j, i, 0)).abs());
        }
    }
    if asym > shared.bound {
        return fail(format!(
            "max asymmetry {asym:.4} exceeds the interior bound {:.4}",
            shared.bound
        ));
    }
    Ok(format!("max |S(x,x′) − S(x′,x)| = {asym:.4} ≤ interior bound {:.4}", shared.bound))
}

/// 14. Two identical invocations of the full interior-grid pipeline through
/// the CLI produce byte-identical CSV files.
fn criterion_14() -> Outcome {
    let dir = std::env::temp_dir().join(format!("gpm-acceptance-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let run = |name: &str| -> Result<Vec<u8>, String> {
        let path = dir.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_gpm"))
            .args([
                "spectral",
                "--m",
                "30",
                "--method",
                "gpm",
                "--x-min",
                "0",
                "--x-max",
                "0.4",
                "--x-steps",
                "41",
                "--omega-min",
                "2",
                "--omega-max",
                "20",
                "--omega-steps",
                "181",
                "--out",
                path.to_str().expect("temp path is UTF-8"),
            ])
            .status()
            .map_err(|e| format!("launching the CLI: {e}"))?;
        if !status.success() {
            return fail(format!("CLI exited with {status}"));
        }
        std::fs::read(&path).map_err(|e| e.to_string())
    };
    let first = run("first.csv")?;
    let second = run("second.csv")?;
    if first != second {
        let diverge = first
            .iter()
            .zip(&second)
            .position(|(a, b)| a != b)
            .unwrap_or_else(|| first.len().min(second.len()));
        return fail(format!(
            "outputs differ (lengths {} vs {}, first divergence at byte {diverge})",
            first.len(),
            second.len()
        ));
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("two runs produced identical {}-byte CSV files", first.len()))
}

fn run_criterion(failed: &mut usize, number: usize, name: &str, body: impl FnOnce() -> Outcome) {
    let result = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| panic.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panicked".to_string());
        Err(format!("panicked: {msg}"))
    });
    match result {
        Ok(detail) => println!("PASS criterion {number}: {name} — {detail}"),
        Err(detail) => {
            println!("FAIL criterion {number}: {name} — {detail}");
            *failed += 1;
        }
    }
}

fn main() {
    let overall = Instant::now();
    let shared = build_shared();
    let with_shared = |body: fn(&Shared) -> Outcome| {
        let shared = &shared;
        move || match shared {
            Ok(s) => body(s),
            Err(e) => fail(format!("interior grids unavailable: {e}")),
        }
    };

    let mut failed = 0usize;
    run_criterion(&mut failed, 1, "QNM closed-form suite", criterion_1);
    run_criterion(&mut failed, 2, "T(2) quadrature vs closed form", criterion_2);
    run_criterion(&mut failed, 3, "extended-identity residual convergence", criterion_3);
    run_criterion(&mut failed, 4, "Hermitian block positive definiteness", criterion_4);
    run_criterion(&mut failed, 5, "gPM matches Hermitized pole expansion", criterion_5);
    run_criterion(&mut failed, 6, "gauge invariance under random unitaries", criterion_6);
    run_criterion(&mut failed, 7, "interior matching regression", with_shared(criterion_7));
    run_criterion(
        &mut failed,
        8,
        "deviation growth above the truncation band",
        with_shared(criterion_8),
    );
    run_criterion(&mut failed, 9, "low-frequency deviation artifact", criterion_9);
    run_criterion(&mut failed, 10, "time-domain transform oracle", criterion_10);
    run_criterion(&mut failed, 11, "Kramers-Kronig reconstruction", criterion_11);
    run_criterion(&mut failed, 12, "method error ordering", with_shared(criterion_12));
    run_criterion(&mut failed, 13, "position-swap asymmetry bound", with_shared(criterion_13));
    run_criterion(&mut failed, 14, "byte-identical pipeline reruns", criterion_14);

    let elapsed = overall.elapsed().as_secs_f64();
    if failed == 0 {
        println!("acceptance: all 14 criteria passed ({elapsed:.1} s)");
    } else {
        println!("acceptance: {failed} of 14 criteria FAILED ({elapsed:.1} s)");
        std::process::exit(1);
    }
}
