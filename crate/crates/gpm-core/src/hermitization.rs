//! Solving the Hermitization condition T = VV† for the slab.
//!
//! The QNM pole expansion closes on the extended index family through
//! ω̃_μ f̃_μ(x) = Σ_ν T̃_{μν} f̃_ν*(x). T̃ is not unique: any member of the
//! one-parameter family (1−a)T̃⁽¹⁾ + aT̃⁽²⁾ satisfies the identity. For the
//! slab, a = 2 cancels the anti-Hermitian ω̃_μ δ_{μ,−ν} ladder entirely; the
//! Hermitian part of that matrix on the positive block is positive definite
//! (numerically, for the parameter ranges exercised here) and factors as
//! T^H = VV†, which is what the mode recovery in [`crate::gpm`] consumes.
//!
//! Extended matrices are indexed row i ↔ μ = i − M over μ ∈ {−M..M};
//! positive-block matrices row i ↔ μ = i + 1 over μ ∈ {1..M}.

use alloc::vec::Vec;

use num_complex::Complex64;
// Under no_std the inherent f64 math methods are absent; the trait fills in.
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::linalg::{
    adaptive_quadrature, hermitian_eigendecompose, ComplexMatrix, FACTORIZATION_TOL,
};
use crate::slab::QnmSet;

/// Below this magnitude of ω̃_μ f̃_μ(x) (a node of the mode) the identity
/// residual switches from relative to absolute normalization.
const NODE_FLOOR: f64 = 1e-12;

/// Absolute per-entry tolerance for the T⁽²⁾ overlap quadratures; entries are
/// O(1)..O(M) in c/L units, so this leaves the 1e−8 agreement check two
/// decades of headroom.
const T2_QUAD_TOL: f64 = 1e-10;

/// Row/column index of μ in an extended-domain matrix of truncation M.
pub fn extended_index(m: usize, mu: i64) -> usize {
    debug_assert!(mu.unsigned_abs() as usize <= m);
    (mu + m as i64) as usize
}

/// Side length 2M+1 of the extended-domain matrices.
pub fn extended_dim(m: usize) -> usize {
    2 * m + 1
}

/// Evaluation route for T⁽²⁾.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum T2Method {
    /// (ω̃_μ/2) ∫ n_R² f̃_μ f̃_ν* dx over the slab, by adaptive quadrature.
    Quadrature,
    /// The slab closed form (the quadrature done analytically).
    SlabClosedForm,
}

/// T̃⁽¹⁾_{μν} = ω̃_μ δ_{μ,−ν} on the extended domain. Anti-Hermitian, since
/// ω̃_μ* = −ω̃_{−μ}.
pub fn t1_matrix(qnms: &QnmSet) -> ComplexMatrix {
    let m = qnms.truncation() as i64;
    let dim = extended_dim(qnms.truncation());
    ComplexMatrix::from_fn(dim, dim, |i, j| {
        let mu = i as i64 - m;
        let nu = j as i64 - m;
        if nu == -mu {
            qnms.frequency(mu)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Closed-form entry of T̃⁽²⁾ without the ω̃_μ/2 prefactor:
/// δ_{μ,−ν} − (2i n_R n_B/(n_R² − n_B²))·(1+(−1)^{μ−ν})/((μ−ν)π + 2i ln α).
/// The parity factor is kept exact so odd μ−ν entries are exactly zero.
fn t2_bracket(qnms: &QnmSet, mu: i64, nu: i64) -> Complex64 {
    let cav = qnms.cavity();
    let delta = if nu == -mu {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, 0.0)
    };
    if (mu - nu).rem_euclid(2) != 0 {
        return delta;
    }
    let contrast = 2.0 * cav.n_r * cav.n_b / (cav.n_r * cav.n_r - cav.n_b * cav.n_b);
    let denom = Complex64::new((mu - nu) as f64 * core::f64::consts::PI, 2.0 * cav.alpha().ln());
    delta - Complex64::new(0.0, contrast) * 2.0 / denom
}

/// T̃⁽²⁾ on the extended domain, by the selected route. The quadrature route
/// exists to guard the closed form against transcription slips; the two agree
/// entrywise to better than 1e−8 of the matrix scale (see
/// [`verify_t2_agreement`], exercised by the test suite since the sweep costs
/// seconds, not microseconds).
pub fn t2_matrix(qnms: &QnmSet, method: T2Method) -> Result<ComplexMatrix> {
    let m = qnms.truncation() as i64;
    let dim = extended_dim(qnms.truncation());
    match method {
        T2Method::SlabClosedForm => Ok(ComplexMatrix::from_fn(dim, dim, |i, j| {
            let mu = i as i64 - m;
            let nu = j as i64 - m;
            qnms.frequency(mu) * 0.5 * t2_bracket(qnms, mu, nu)
        })),
        T2Method::Quadrature => {
            let cav = *qnms.cavity();
            let half = 0.5 * cav.length;
            let n_sq = cav.n_r * cav.n_r;
            let mut out = ComplexMatrix::zeros(dim, dim);
            for i in 0..dim {
                let mu = i as i64 - m;
                for j in 0..dim {
                    let nu = j as i64 - m;
                    let (overlap, _) = adaptive_quadrature(
                        |x| qnms.mode_inside(mu, x) * qnms.mode_inside(nu, x).conj(),
                        -half,
                        half,
                        T2_QUAD_TOL,
                    )?;
                    out[(i, j)] = qnms.frequency(mu) * 0.5 * n_sq * overlap;
                }
            }
            Ok(out)
        }
    }
}

/// Max entrywise deviation between the two T⁽²⁾ routes, normalized by the
/// closed form's largest entry. Values above 1e−8 mean one of the routes is
/// wrong and the build must not be trusted.
pub fn verify_t2_agreement(qnms: &QnmSet) -> Result<f64> {
    let closed = t2_matrix(qnms, T2Method::SlabClosedForm)?;
    let quad = t2_matrix(qnms, T2Method::Quadrature)?;
    let scale = closed.max_abs();
    if scale == 0.0 {
        return Ok(quad.max_abs());
    }
    Ok(quad.max_abs_diff(&closed) / scale)
}

/// Family member (1−a)T̃⁽¹⁾ + aT̃⁽²⁾ on the extended domain; every member
/// satisfies the extended identity up to truncation. Built from the closed
/// forms.
pub fn family_matrix(qnms: &QnmSet, a_param: Complex64) -> ComplexMatrix {
    let t1 = t1_matrix(qnms);
    let t2 = t2_matrix(qnms, T2Method::SlabClosedForm)
        .expect("closed form cannot fail");
    t1.scale(Complex64::new(1.0, 0.0) - a_param)
        .add(&t2.scale(a_param))
}

/// Direct closed form of the a=2 member,
/// T̃_{μν} = −2i ω̃_μ n_R n_B/(n_R²−n_B²)·(1+(−1)^{μ−ν})/((μ−ν)π + 2i ln α),
/// in which the δ_{μ,−ν} ladder has cancelled. Used to cross-check
/// [`family_matrix`] at a = 2.
pub fn slab_t_matrix(qnms: &QnmSet) -> ComplexMatrix {
    let m = qnms.truncation() as i64;
    let dim = extended_dim(qnms.truncation());
    let cav = qnms.cavity();
    let contrast = 2.0 * cav.n_r * cav.n_b / (cav.n_r * cav.n_r - cav.n_b * cav.n_b);
    ComplexMatrix::from_fn(dim, dim, |i, j| {
        let mu = i as i64 - m;
        let nu = j as i64 - m;
        if (mu - nu).rem_euclid(2) != 0 {
            return Complex64::new(0.0, 0.0);
        }
        let denom = Complex64::new((mu - nu) as f64 * core::f64::consts::PI, 2.0 * cav.alpha().ln());
        -Complex64::new(0.0, contrast) * qnms.frequency(mu) * 2.0 / denom
    })
}

/// Residual of the extended identity ω̃_μ f̃_μ(x) = Σ_ν T_{μν} f̃_ν*(x) at one
/// (μ, x). Relative to |ω̃_μ f̃_μ(x)| away from mode nodes, absolute at them.
pub fn extended_identity_residual(
    qnms: &QnmSet,
    t: &ComplexMatrix,
    mu: i64,
    x: f64,
) -> Result<f64> {
    let m = qnms.truncation() as i64;
    let dim = extended_dim(qnms.truncation());
    if t.rows() != dim || t.cols() != dim {
        return Err(Error::InvalidInput(alloc::format!(
            "extended matrix must be {dim}x{dim} for M={}, got {}x{}",
            qnms.truncation(),
            t.rows(),
            t.cols()
        )));
    }
    let target = qnms.g_mode(mu, x)?;
    let row = extended_index(qnms.truncation(), mu);
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..dim {
        let nu = j as i64 - m;
        sum += t[(row, j)] * qnms.mode_inside(nu, x).conj();
    }
    let deviation = (target - sum).norm();
    if target.norm() > NODE_FLOOR {
        Ok(deviation / target.norm())
    } else {
        Ok(deviation)
    }
}

/// Restrict an extended matrix to the positive block μ,ν ∈ {1..M} and take
/// the Hermitian part (B + B†)/2. For the slab a=2 family this reproduces
/// [`t_hermitian_closed`] entrywise.
pub fn hermitian_block(t_extended: &ComplexMatrix, qnms: &QnmSet) -> Result<ComplexMatrix> {
    let m = qnms.truncation();
    let dim = extended_dim(m);
    if t_extended.rows() != dim || t_extended.cols() != dim {
        return Err(Error::InvalidInput(alloc::format!(
            "extended matrix must be {dim}x{dim} for M={m}, got {}x{}",
            t_extended.rows(),
            t_extended.cols()
        )));
    }
    let block = ComplexMatrix::from_fn(m, m, |i, j| {
        t_extended[(extended_index(m, i as i64 + 1), extended_index(m, j as i64 + 1))]
    });
    Ok(block.hermitian_part())
}

/// Closed form of the slab's positive-block Hermitian part,
/// T^H_{μν} = −(c/L)(μ+ν)π i n_B/(n_R²−n_B²)·(1+(−1)^{μ−ν})/((μ−ν)π + 2i ln α).
pub fn t_hermitian_closed(qnms: &QnmSet) -> ComplexMatrix {
    let m = qnms.truncation();
    let cav = qnms.cavity();
    let prefactor = cav.c / cav.length * cav.n_b / (cav.n_r * cav.n_r - cav.n_b * cav.n_b);
    ComplexMatrix::from_fn(m, m, |i, j| {
        let mu = i as i64 + 1;
        let nu = j as i64 + 1;
        if (mu - nu).rem_euclid(2) != 0 {
            return Complex64::new(0.0, 0.0);
        }
        let denom = Complex64::new((mu - nu) as f64 * core::f64::consts::PI, 2.0 * cav.alpha().ln());
        -Complex64::new(0.0, (mu + nu) as f64 * core::f64::consts::PI * prefactor) * 2.0 / denom
    })
}

/// Eigenbasis factor V = U diag(√λ) with VV† = t_hermitian. Fails with the
/// full spectrum attached when any eigenvalue is not strictly positive; no
/// remedy is attempted (none is known).
pub fn factorize_v(t_hermitian: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (eigenvalues, basis) = hermitian_eigendecompose(t_hermitian)?;
    if eigenvalues.iter().any(|&lambda| lambda <= 0.0) {
        return Err(Error::NotPositiveDefinite {
            eigenvalues: eigenvalues.clone(),
        });
    }
    let n = eigenvalues.len();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        basis[(i, j)] * eigenvalues[j].sqrt()
    }))
}

/// The assembled Hermitization data for one (cavity, M, a) choice.
#[derive(Debug, Clone)]
pub struct HermitizationSolution {
    pub a_param: Complex64,
    /// Family member on the extended domain, (2M+1)×(2M+1).
    pub t_extended: ComplexMatrix,
    /// Hermitian part of the positive block, M×M.
    pub t_hermitian: ComplexMatrix,
    /// Ascending spectrum of `t_hermitian`; strictly positive.
    pub eigenvalues: Vec<f64>,
    /// V with VV† = t_hermitian.
    pub v_factor: ComplexMatrix,
}

impl HermitizationSolution {
    /// Build the extended family member, its positive-block Hermitian part,
    /// and the factor V. Errors when M = 0, when the spectrum is not strictly
    /// positive, or when the multiply-back residual exceeds the
    /// factorization tolerance.
    pub fn solve(qnms: &QnmSet, a_param: Complex64) -> Result<Self> {
        if qnms.truncation() == 0 {
            return Err(Error::InvalidInput(
                "Hermitization needs at least one mode (M >= 1)".into(),
            ));
        }
        let t_extended = family_matrix(qnms, a_param);
        let t_hermitian = hermitian_block(&t_extended, qnms)?;
        let (eigenvalues, _) = hermitian_eigendecompose(&t_hermitian)?;
        if eigenvalues.iter().any(|&lambda| lambda <= 0.0) {
            return Err(Error::NotPositiveDefinite { eigenvalues });
        }
        let v_factor = factorize_v(&t_hermitian)?;
        let reconstruction = v_factor.mul(&v_factor.adjoint());
        let residual = reconstruction.max_abs_diff(&t_hermitian);
        let scale = t_hermitian.max_abs();
        if residual > FACTORIZATION_TOL * scale.max(1.0) {
            return Err(Error::IllConditioned {
                condition: residual / scale.max(f64::MIN_POSITIVE),
            });
        }
        Ok(HermitizationSolution {
            a_param,
            t_extended,
            t_hermitian,
            eigenvalues,
            v_factor,
        })
    }

    pub fn truncation(&self) -> usize {
        self.t_hermitian.rows()
    }
}
