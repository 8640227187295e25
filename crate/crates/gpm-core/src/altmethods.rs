//! Baseline constructions the gPM method is benchmarked against: the naive
//! Hermitization guess T_{μν} = |ω̃_μ|δ_{μν}, and the quantized-QNM (qQNM)
//! pipeline built from regularized modes, a frequency-window cutoff, and the
//! radiative overlap matrix S.
//!
//! The qQNM route symmetrizes the QNMs through the principal square root of
//! S and evaluates its own resolvent correlator with 𝒳 = S^{−1/2} diag(ω̃)
//! S^{1/2}. It is self-contained: the background Green's function here keeps
//! its own sign convention, which never mixes with the defect-equation
//! convention used by [`crate::slab::exact_green`].

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
// Under no_std the inherent f64 math methods are absent; the trait fills in.
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::linalg::{
    adaptive_quadrature, hermitian_eigendecompose, lu_factor, ComplexMatrix, CONDITION_LIMIT,
};
use crate::slab::{parity, QnmSet, SlabCavity};

/// ω^cut_λ = −14·Im ω̃_λ: the window scale of the qQNM cutoff function.
const CUTOFF_MULTIPLE: f64 = 14.0;

/// Hermiticity residual of the quadrature-assembled S above which the matrix
/// is flagged before symmetrization (symmetrization itself always happens,
/// since the square root needs an exactly Hermitian input).
pub const S_HERMITICITY_WARN: f64 = 1e-6;

/// Absolute tolerance for the mode-continuation quadrature in
/// [`regularized_qnm`].
const REG_QUAD_TOL: f64 = 1e-10;

/// Default per-entry tolerance for the S-matrix quadratures.
pub const S_QUAD_TOL: f64 = 1e-9;

/// Naive-Hermitization spectral density: the hermitized pole correlator with
/// T_{μν} = |ω̃_μ|δ_{μν}, i.e. residues forced real,
/// (1/2)·Im[Σ_μ |ω̃_μ| f̃_μ(x) f̃_μ*(x′)/(ω̃_μ − ω)].
pub fn naive_spectral(qnms: &QnmSet, x: f64, xp: f64, omega: f64) -> Result<f64> {
    qnms.cavity().require_inside("naive position x", x)?;
    qnms.cavity().require_inside("naive position x'", xp)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for lambda in 1..=qnms.truncation() as i64 {
        let w = qnms.frequency(lambda);
        acc += w.norm() * qnms.mode_inside(lambda, x) * qnms.mode_inside(lambda, xp).conj()
            / (w - omega);
    }
    Ok(0.5 * acc.im)
}

/// Background Green's function c/(2iω n_B)·e^{i n_B ω|x−x′|/c} of the
/// uniform embedding medium, kept exactly in this form (its sign convention
/// is internal to the qQNM pipeline).
pub fn background_green(cavity: &SlabCavity, x: f64, xp: f64, omega: f64) -> Result<Complex64> {
    if !(omega > 0.0) {
        return Err(Error::OutOfDomain {
            what: "background green omega",
            value: omega,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    let q = cavity.n_b * omega / cavity.c;
    let phase = (Complex64::i() * q * (x - xp).abs()).exp();
    Ok(phase * cavity.c / Complex64::new(0.0, 2.0 * omega * cavity.n_b))
}

/// Regularized QNM: f̃_λ(x) inside the slab, and the background-propagated
/// continuation ∫ G_B(x,x′,ω)(n_R²−n_B²) f̃_λ(x′) dx′ outside. The cavity is
/// passed separately so the contrast factor can be toggled (n_R → n_B makes
/// the outside branch vanish identically).
pub fn regularized_qnm(
    cavity: &SlabCavity,
    qnms: &QnmSet,
    lambda: i64,
    x: f64,
    omega: f64,
) -> Result<Complex64> {
    if qnms.cavity().contains(x) {
        return qnms.mode(lambda, x);
    }
    let contrast = cavity.n_r * cavity.n_r - cavity.n_b * cavity.n_b;
    if contrast == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if !(omega > 0.0) {
        return Err(Error::OutOfDomain {
            what: "regularized qnm omega",
            value: omega,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    let half = 0.5 * qnms.cavity().length;
    let q = cavity.n_b * omega / cavity.c;
    let prefactor = contrast * cavity.c / Complex64::new(0.0, 2.0 * omega * cavity.n_b);
    let (integral, _) = adaptive_quadrature(
        |t| (Complex64::i() * q * (x - t).abs()).exp() * qnms.mode_inside(lambda, t),
        -half,
        half,
        REG_QUAD_TOL,
    )?;
    Ok(prefactor * integral)
}

/// Magnitude of the jump between the outside branch evaluated at the slab
/// face and the interior mode value there. The regularization does not
/// promise continuity; this quantifies the mismatch instead of asserting it
/// away.
pub fn regularization_jump(
    cavity: &SlabCavity,
    qnms: &QnmSet,
    lambda: i64,
    omega: f64,
) -> Result<f64> {
    let half = 0.5 * qnms.cavity().length;
    let contrast = cavity.n_r * cavity.n_r - cavity.n_b * cavity.n_b;
    if !(omega > 0.0) {
        return Err(Error::OutOfDomain {
            what: "regularized qnm omega",
            value: omega,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    let q = cavity.n_b * omega / cavity.c;
    let prefactor = contrast * cavity.c / Complex64::new(0.0, 2.0 * omega * cavity.n_b);
    // Outside branch evaluated exactly at x = L/2.
    let (integral, _) = adaptive_quadrature(
        |t| (Complex64::i() * q * (half - t).abs()).exp() * qnms.mode_inside(lambda, t),
        -half,
        half,
        REG_QUAD_TOL,
    )?;
    let outside = prefactor * integral;
    Ok((outside - qnms.mode_inside(lambda, half)).norm())
}

/// ∫_{−L/2}^{L/2} e^{ipx} dx = 2 sin(pL/2)/p, entire in p (→ L as p → 0).
fn boundary_transform(p: Complex64, length: f64) -> Complex64 {
    if p.norm() * length < 1e-12 {
        return Complex64::new(length, 0.0);
    }
    (p * (0.5 * length)).sin() * 2.0 / p
}

/// Outgoing amplitude of the regularized mode on the +x side: for x ≥ L/2
/// the continuation is C_R·e^{i n_B ω x/c} with
/// C_R = (n_R²−n_B²)·ω/(2i c n_B)·∫ e^{−i n_B ω x′/c} f̃_λ(x′) dx′,
/// the convolution of the background propagator with the mode's polarization
/// source done in closed form. The source carries the defect equation's
/// ω²/c² normalization; dropping it destroys the ω_λ scaling of the overlap
/// matrix S and with it the construction's mid-band accuracy. The −x side
/// carries (−1)^λ C_R by mode parity.
fn radiated_coefficient(cavity: &SlabCavity, qnms: &QnmSet, lambda: i64, omega: f64) -> Complex64 {
    let q = cavity.n_b * omega / cavity.c;
    let k = qnms.frequency(lambda) * (qnms.cavity().n_r / qnms.cavity().c);
    let length = qnms.cavity().length;
    let overlap = qnms.normalization(lambda)
        * (boundary_transform(k - q, length)
            + parity(lambda) * boundary_transform(k + q, length));
    let contrast = cavity.n_r * cavity.n_r - cavity.n_b * cavity.n_b;
    overlap * contrast * omega / Complex64::new(0.0, 2.0 * cavity.c * cavity.n_b)
}

/// Boundary-difference evaluation without the ω > 0 guard, for use inside
/// quadratures whose domain already excludes ω ≤ 0.
fn s_rad_value(
    cavity: &SlabCavity,
    qnms: &QnmSet,
    lambda: i64,
    lambdap: i64,
    omega: f64,
) -> Complex64 {
    let q = cavity.n_b * omega / cavity.c;
    let c_r = radiated_coefficient(cavity, qnms, lambda, omega);
    let c_rp = radiated_coefficient(cavity, qnms, lambdap, omega);
    let c_l = parity(lambda) * c_r;
    let c_lp = parity(lambdap) * c_rp;
    // [∂ₓF̃_λ·F̃*_λ′ − F̃_λ·∂ₓF̃*_λ′] with F̃ = C e^{±iqx}: the e^{±iqL/2}
    // phases cancel against their conjugates, leaving pure coefficient
    // products.
    let bracket_plus = Complex64::i() * 2.0 * q * c_r * c_rp.conj();
    let bracket_minus = -Complex64::i() * 2.0 * q * c_l * c_lp.conj();
    let prefactor = cavity.c * cavity.c / Complex64::new(0.0, 2.0 * omega * omega);
    prefactor * (bracket_plus - bracket_minus)
}

/// Radiative overlap S^rad_{λλ′}(ω): the flux bracket
/// (c²/2iω²)[∂ₓF̃_λ·F̃*_λ′ − F̃_λ·∂ₓF̃*_λ′] of the regularized modes,
/// evaluated as the difference between the slab faces x = ±L/2 using the
/// closed-form outside-branch coefficients.
pub fn s_rad(
    cavity: &SlabCavity,
    qnms: &QnmSet,
    lambda: i64,
    lambdap: i64,
    omega: f64,
) -> Result<Complex64> {
    if !(omega > 0.0) {
        return Err(Error::OutOfDomain {
            what: "s_rad omega",
            value: omega,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    Ok(s_rad_value(cavity, qnms, lambda, lambdap, omega))
}

/// Windowed pole amplitude A_λ(ω) = ω/(2(ω̃_λ − ω))·Rect(arg), with
/// arg = (ω − ω_λ)/(ω − ω_λ + 2ω^cut_λ), Rect = 1 on (−1/2, 1/2) and 0
/// elsewhere, ω_λ = Re ω̃_λ, ω^cut_λ = −14·Im ω̃_λ.
pub fn a_cutoff(qnms: &QnmSet, lambda: i64, omega: f64) -> Complex64 {
    let w = qnms.frequency(lambda);
    let detuning = omega - w.re;
    let cut = -CUTOFF_MULTIPLE * w.im;
    let arg = detuning / (detuning + 2.0 * cut);
    if arg.abs() < 0.5 {
        Complex64::new(omega, 0.0) / ((w - omega) * 2.0)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Support of the Rect window of A_λ: |t/(t + 2w)| < 1/2 with t = ω − ω_λ
/// solves to t ∈ (−2w/3, 2w); for t ≤ −2w the ratio has modulus
/// |t+2w|/|t| + ... ≥ 1, so there is no second branch.
pub fn cutoff_window(qnms: &QnmSet, lambda: i64) -> (f64, f64) {
    let w = qnms.frequency(lambda);
    let cut = -CUTOFF_MULTIPLE * w.im;
    (w.re - 2.0 * cut / 3.0, w.re + 2.0 * cut)
}

/// S matrix with its raw Hermiticity residual:
/// S_{λλ′} = ∫₀^∞ dω 2A_λ(ω)A*_λ′(ω)/(π√(ω_λω_λ′))·S^rad_{λλ′}(ω).
/// The Rect windows make the integrand vanish outside the intersection of
/// the two supports (the union minus that intersection contributes zero), so
/// the quadrature runs on the window overlap clipped to ω ≥ 0; disjoint
/// windows give an exact zero. The returned matrix is symmetrized (S+S†)/2;
/// the residual tells how much that moved it.
pub fn s_matrix_with_diagnostics(
    cavity: &SlabCavity,
    qnms: &QnmSet,
    tol: f64,
) -> Result<(ComplexMatrix, f64)> {
    let m = qnms.truncation();
    let mut raw = ComplexMatrix::zeros(m, m);
    for i in 0..m {
        let lambda = i as i64 + 1;
        let (lo_a, hi_a) = cutoff_window(qnms, lambda);
        let omega_a = qnms.frequency(lambda).re;
        for j in 0..m {
            let lambdap = j as i64 + 1;
            let (lo_b, hi_b) = cutoff_window(qnms, lambdap);
            let lo = lo_a.max(lo_b).max(0.0);
            let hi = hi_a.min(hi_b);
            if lo >= hi {
                continue;
            }
            let omega_b = qnms.frequency(lambdap).re;
            let norm = core::f64::consts::PI * (omega_a * omega_b).sqrt();
            let (value, _) = adaptive_quadrature(
                |w| {
                    let a = a_cutoff(qnms, lambda, w);
                    let b = a_cutoff(qnms, lambdap, w).conj();
                    a * b * s_rad_value(cavity, qnms, lambda, lambdap, w) * (2.0 / norm)
                },
                lo,
                hi,
                tol,
            )?;
            raw[(i, j)] = value;
        }
    }
    let residual = raw.hermiticity_residual();
    Ok((raw.hermitian_part(), residual))
}

/// Symmetrized S matrix (see [`s_matrix_with_diagnostics`]).
pub fn s_matrix(cavity: &SlabCavity, qnms: &QnmSet, tol: f64) -> Result<ComplexMatrix> {
    Ok(s_matrix_with_diagnostics(cavity, qnms, tol)?.0)
}

/// Assembled qQNM construction: S, its principal square root, the similarity
/// transform 𝒳, and the symmetrized-mode evaluator.
#[derive(Debug, Clone)]
pub struct QqnmParameters {
    qnms: QnmSet,
    s: ComplexMatrix,
    s_sqrt: ComplexMatrix,
    x_matrix: ComplexMatrix,
    /// Real pole positions ω_λ = Re ω̃_λ, λ = 1..M.
    omega_lambda: Vec<f64>,
    /// Window scales ω^cut_λ = −14·Im ω̃_λ.
    omega_cut: Vec<f64>,
    hermiticity_residual: f64,
    symmetrized: bool,
}

impl QqnmParameters {
    /// Run the S-matrix quadrature and assemble the construction.
    pub fn new(qnms: &QnmSet, tol: f64) -> Result<Self> {
        let (s, residual) = s_matrix_with_diagnostics(qnms.cavity(), qnms, tol)?;
        Self::build(qnms, s, residual)
    }

    /// Assemble from an explicit S (degenerate cases, tests, exploration).
    pub fn from_s_matrix(qnms: &QnmSet, s: ComplexMatrix) -> Result<Self> {
        let residual = s.hermiticity_residual();
        Self::build(qnms, s.hermitian_part(), residual)
    }

    fn build(qnms: &QnmSet, s: ComplexMatrix, residual: f64) -> Result<Self> {
        let m = qnms.truncation();
        if m == 0 {
            return Err(Error::InvalidInput(
                "qQNM construction needs at least one mode (M >= 1)".into(),
            ));
        }
        if s.rows() != m || s.cols() != m {
            return Err(Error::InvalidInput(alloc::format!(
                "S must be {m}x{m}, got {}x{}",
                s.rows(),
                s.cols()
            )));
        }
        let (eigenvalues, basis) = hermitian_eigendecompose(&s)?;
        if eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(Error::NotPositiveDefinite { eigenvalues });
        }
        let condition = eigenvalues[m - 1] / eigenvalues[0];
        if condition >= CONDITION_LIMIT {
            return Err(Error::IllConditioned { condition });
        }
        // Principal square root S^{1/2} = U diag(√λ) U†, itself Hermitian.
        let from_spectrum = |weights: &[f64]| {
            ComplexMatrix::from_fn(m, m, |i, j| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, &w) in weights.iter().enumerate() {
                    acc += basis[(i, k)] * basis[(j, k)].conj() * w;
                }
                acc
            })
        };
        let roots: Vec<f64> = eigenvalues.iter().map(|l| l.sqrt()).collect();
        let inverse_roots: Vec<f64> = roots.iter().map(|r| 1.0 / r).collect();
        let s_sqrt = from_spectrum(&roots);
        let s_inv_sqrt = from_spectrum(&inverse_roots);
        // 𝒳 = S^{−1/2} diag(ω̃) S^{1/2}; similar to diag(ω̃), so it keeps the
        // QNM frequencies as its spectrum.
        let d_sqrt = ComplexMatrix::from_fn(m, m, |i, j| {
            qnms.frequency(i as i64 + 1) * s_sqrt[(i, j)]
        });
        let x_matrix = s_inv_sqrt.mul(&d_sqrt);
        let omega_lambda: Vec<f64> = (1..=m as i64).map(|l| qnms.frequency(l).re).collect();
        let omega_cut: Vec<f64> = (1..=m as i64)
            .map(|l| -CUTOFF_MULTIPLE * qnms.frequency(l).im)
            .collect();
        Ok(QqnmParameters {
            qnms: qnms.clone(),
            s,
            s_sqrt,
            x_matrix,
            omega_lambda,
            omega_cut,
            hermiticity_residual: residual,
            symmetrized: residual > S_HERMITICITY_WARN,
        })
    }

    pub fn truncation(&self) -> usize {
        self.s.rows()
    }

    pub fn qnms(&self) -> &QnmSet {
        &self.qnms
    }

    pub fn s_matrix(&self) -> &ComplexMatrix {
        &self.s
    }

    pub fn s_sqrt(&self) -> &ComplexMatrix {
        &self.s_sqrt
    }

    pub fn x_matrix(&self) -> &ComplexMatrix {
        &self.x_matrix
    }

    pub fn omega_lambda(&self) -> &[f64] {
        &self.omega_lambda
    }

    pub fn omega_cut(&self) -> &[f64] {
        &self.omega_cut
    }

    /// Raw Hermiticity residual of the quadrature-assembled S.
    pub fn hermiticity_residual(&self) -> f64 {
        self.hermiticity_residual
    }

    /// True when the residual exceeded [`S_HERMITICITY_WARN`] and the
    /// symmetrization actually mattered.
    pub fn symmetrized(&self) -> bool {
        self.symmetrized
    }

    /// Symmetrized mode f̃^s_λ(x) = Σ_λ′ S^{1/2}_{λ′λ} √(ω_λ′/ω_λ) f̃_λ′(x).
    pub fn f_s(&self, lambda: usize, x: f64) -> Result<Complex64> {
        let m = self.truncation();
        if lambda < 1 || lambda > m {
            return Err(Error::InvalidInput(alloc::format!(
                "qQNM index must satisfy 1 <= lambda <= {m}, got {lambda}"
            )));
        }
        self.qnms.cavity().require_inside("qqnm position x", x)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for nu in 0..m {
            acc += self.s_sqrt[(nu, lambda - 1)]
                * (self.omega_lambda[nu] / self.omega_lambda[lambda - 1]).sqrt()
                * self.qnms.mode_inside(nu as i64 + 1, x);
        }
        Ok(acc)
    }

    /// qQNM spectral density
    /// (1/2)·Im[Σ_{λλ′} √(ω_λω_λ′) f̃^s_λ(x)(𝒳 − ω)⁻¹_{λλ′} f̃^{s*}_λ′(x′)].
    pub fn spectral(&self, x: f64, xp: f64, omega: f64) -> Result<f64> {
        self.qnms.cavity().require_inside("qqnm position x", x)?;
        self.qnms.cavity().require_inside("qqnm position x'", xp)?;
        let m = self.truncation();
        let g_x: Vec<Complex64> = (0..m)
            .map(|nu| self.omega_lambda[nu].sqrt() * self.qnms.mode_inside(nu as i64 + 1, x))
            .collect();
        let g_xp: Vec<Complex64> = (0..m)
            .map(|nu| {
                self.omega_lambda[nu].sqrt() * self.qnms.mode_inside(nu as i64 + 1, xp).conj()
            })
            .collect();
        // √ω_λ f̃^s_λ(x) = (S^{1/2,T} g)_λ and √ω_λ′ f̃^{s*}_λ′(x′) uses the
        // conjugated column sums; the ω_λ ratios inside f̃^s cancel.
        let mut u = vec![Complex64::new(0.0, 0.0); m];
        let mut w = vec![Complex64::new(0.0, 0.0); m];
        for l in 0..m {
            let mut acc_u = Complex64::new(0.0, 0.0);
            let mut acc_w = Complex64::new(0.0, 0.0);
            for nu in 0..m {
                acc_u += self.s_sqrt[(nu, l)] * g_x[nu];
                acc_w += self.s_sqrt[(nu, l)].conj() * g_xp[nu];
            }
            u[l] = acc_u;
            w[l] = acc_w;
        }
        let shifted = ComplexMatrix::from_fn(m, m, |i, j| {
            self.x_matrix[(i, j)]
                - if i == j {
                    Complex64::new(omega, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
        });
        let lu = lu_factor(&shifted)?;
        let y = lu.solve_vec(&w);
        let total: Complex64 = u.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        Ok(0.5 * total.im)
    }
}

/// Free-function form of [`QqnmParameters::spectral`].
pub fn qqnm_spectral(params: &QqnmParameters, x: f64, xp: f64, omega: f64) -> Result<f64> {
    params.spectral(x, xp, omega)
}
