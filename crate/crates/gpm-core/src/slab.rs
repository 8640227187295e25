//! The 1D dielectric slab: closed-form quasi-normal modes and the exact
//! Green's-function oracle the rest of the crate is benchmarked against.
//!
//! The slab occupies x ∈ [−L/2, L/2] with refractive index `n_R`, embedded in
//! a background of index `n_B`. Its QNMs solve the source-free Helmholtz
//! equation with outgoing (Silver-Müller) boundary conditions:
//!
//! ```text
//! ω̃_μ = (μπ + i ln α)·c/(L n_R),      α = |n_R − n_B|/(n_R + n_B)
//! f̃_μ(x) = A_μ (e^{i n_R ω̃_μ x/c} + e^{−i n_R ω̃_μ x/c + iμπ})
//! A_μ = e^{−iμπ/2}/(n_R √(2L))
//! ```
//!
//! All `Im ω̃_μ = ln(α)·c/(L n_R) < 0`: every resonance decays.

use alloc::vec::Vec;

use num_complex::Complex64;
// Under no_std the inherent f64 math methods are absent; the trait fills in.
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::linalg::adaptive_quadrature;

/// Absolute tolerance for the mode-overlap quadratures used by the
/// completeness check; integrands are smooth products of exponentials, so
/// this is reached in a handful of panels.
const OVERLAP_QUAD_TOL: f64 = 1e-10;

/// Slab geometry and refractive indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabCavity {
    pub n_r: f64,
    pub n_b: f64,
    pub length: f64,
    pub c: f64,
}

impl SlabCavity {
    /// Validated constructor with c = 1 (frequencies in units c/L).
    ///
    /// Requires n_R, n_B > 0 and n_R ≠ n_B so that α ∈ (0, 1).
    pub fn new(n_r: f64, n_b: f64, length: f64) -> Result<Self> {
        if !(n_r.is_finite() && n_r > 0.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "slab index n_R must be positive and finite, got {n_r}"
            )));
        }
        if !(n_b.is_finite() && n_b > 0.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "background index n_B must be positive and finite, got {n_b}"
            )));
        }
        if n_r == n_b {
            return Err(Error::InvalidInput(
                "n_R = n_B gives α = 0 (no resonator); rejected at construction".into(),
            ));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "slab length must be positive and finite, got {length}"
            )));
        }
        Ok(SlabCavity {
            n_r,
            n_b,
            length,
            c: 1.0,
        })
    }

    /// Homogeneous medium n_R = n_B = n. Exists solely so the free-space
    /// closed form G(x,x,ω) = ic/(2nω) can exercise `exact_green` and
    /// `exact_spectral` in self-tests; QNM construction rejects it.
    pub fn homogeneous_for_validation(n: f64, length: f64) -> Self {
        SlabCavity {
            n_r: n,
            n_b: n,
            length,
            c: 1.0,
        }
    }

    /// α = |n_R − n_B|/(n_R + n_B) ∈ (0, 1) for a valid cavity.
    pub fn alpha(&self) -> f64 {
        (self.n_r - self.n_b).abs() / (self.n_r + self.n_b)
    }

    pub fn contains(&self, x: f64) -> bool {
        x.abs() <= 0.5 * self.length
    }

    /// OutOfDomain error unless |x| ≤ L/2.
    pub fn require_inside(&self, what: &'static str, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                what,
                value: x,
                min: -0.5 * self.length,
                max: 0.5 * self.length,
            })
        }
    }
}

/// (−1)^μ, exact for any integer.
pub(crate) fn parity(mu: i64) -> f64 {
    if mu.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// e^{−iμπ/2}, exact on the 4-cycle {1, −i, −1, i}.
fn quarter_phase(mu: i64) -> Complex64 {
    match mu.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// Truncated QNM family: indices μ ∈ {−M, …, M} (including 0) for M ≥ 1,
/// empty for M = 0. The closed forms above assume outgoing waves leave into
/// the optically thinner medium, so construction requires n_R > n_B.
#[derive(Debug, Clone)]
pub struct QnmSet {
    cavity: SlabCavity,
    m: usize,
}

impl QnmSet {
    pub fn new(cavity: SlabCavity, m: usize) -> Result<Self> {
        if cavity.n_r == cavity.n_b {
            return Err(Error::InvalidInput(
                "QNM construction needs a resonator (n_R ≠ n_B)".into(),
            ));
        }
        if cavity.n_r < cavity.n_b {
            // The matched-coefficient outgoing condition B₋ = 0 (see
            // `silver_mueller_residual`) fails for n_R < n_B: the printed
            // frequencies then describe incoming waves.
            return Err(Error::InvalidInput(
                "closed-form QNMs require n_R > n_B (outgoing-wave matching)".into(),
            ));
        }
        Ok(QnmSet { cavity, m })
    }

    pub fn cavity(&self) -> &SlabCavity {
        &self.cavity
    }

    /// Truncation order M (count of positive-index modes).
    pub fn truncation(&self) -> usize {
        self.m
    }

    /// Extended index list −M..M including 0; empty at M = 0.
    pub fn indices(&self) -> Vec<i64> {
        if self.m == 0 {
            Vec::new()
        } else {
            let m = self.m as i64;
            (-m..=m).collect()
        }
    }

    /// ω̃_μ = (μπ + i ln α)·c/(L n_R).
    pub fn frequency(&self, mu: i64) -> Complex64 {
        let cav = &self.cavity;
        let ln_alpha = cav.alpha().ln();
        Complex64::new(mu as f64 * core::f64::consts::PI, ln_alpha) * (cav.c / (cav.length * cav.n_r))
    }

    /// A_μ = e^{−iμπ/2}/(n_R √(2L)).
    pub fn normalization(&self, mu: i64) -> Complex64 {
        quarter_phase(mu) / (self.cavity.n_r * (2.0 * self.cavity.length).sqrt())
    }

    /// f̃_μ(x) = A_μ (e^{i n_R ω̃_μ x/c} + e^{−i n_R ω̃_μ x/c + iμπ}), valid
    /// inside the slab only (exterior values are handled by the regularized
    /// construction in `altmethods`).
    pub fn mode(&self, mu: i64, x: f64) -> Result<Complex64> {
        self.cavity.require_inside("qnm position x", x)?;
        Ok(self.mode_inside(mu, x))
    }

    /// `mode` without the domain check, for grid loops that validated once.
    pub fn mode_inside(&self, mu: i64, x: f64) -> Complex64 {
        let cav = &self.cavity;
        let k = self.frequency(mu) * (cav.n_r / cav.c);
        let plus = (Complex64::i() * k * x).exp();
        let minus = (-Complex64::i() * k * x).exp() * parity(mu);
        self.normalization(mu) * (plus + minus)
    }

    /// g̃_μ(x) = ω̃_μ f̃_μ(x), the derivative-side member of the mode pair.
    pub fn g_mode(&self, mu: i64, x: f64) -> Result<Complex64> {
        Ok(self.frequency(mu) * self.mode(mu, x)?)
    }

    /// ḡ_μ(x) = f̃_μ*(x), which equals f̃_{−μ}(x) by conjugation symmetry.
    pub fn g_bar_mode(&self, mu: i64, x: f64) -> Result<Complex64> {
        Ok(self.mode(mu, x)?.conj())
    }

    /// |r² e^{2 i n_R ω̃_μ L/c} − 1| with r = (n_R−n_B)/(n_R+n_B): the
    /// round-trip condition every QNM frequency satisfies.
    pub fn round_trip_residual(&self, mu: i64) -> f64 {
        let cav = &self.cavity;
        let r = (cav.n_r - cav.n_b) / (cav.n_r + cav.n_b);
        let phase = (Complex64::i() * 2.0 * cav.n_r * self.frequency(mu) * (cav.length / cav.c)).exp();
        (phase * r * r - Complex64::new(1.0, 0.0)).norm()
    }

    /// Relative magnitude of the incoming-wave coefficient B₋ obtained by
    /// matching f̃_μ and its derivative to B₊e^{iqx} + B₋e^{−iqx} at
    /// x = L/2, q = n_B ω̃_μ/c. Outgoing radiation (the 1D Silver-Müller
    /// condition) means B₋ = 0; the closed forms satisfy this exactly for
    /// n_R > n_B, so the residual is rounding-level. Checked symbolically
    /// through the matched coefficients, never by exterior evaluation.
    pub fn silver_mueller_residual(&self, mu: i64) -> f64 {
        let cav = &self.cavity;
        let half_phase = (Complex64::i() * cav.n_r * self.frequency(mu) * (0.5 * cav.length / cav.c)).exp();
        let ratio = cav.n_r / cav.n_b;
        let term_in = (1.0 - ratio) * half_phase;
        let term_out = (1.0 + ratio) * parity(mu) / half_phase;
        (term_in + term_out).norm() / (term_in.norm() + term_out.norm())
    }
}

/// Exact retarded Green's function of the slab, solving
/// [−∂²_x − n²(x) ω²/c²] G(x, x′, ω) = δ(x − x′) with outgoing conditions.
///
/// Built from the two homogeneous solutions u_right (outgoing toward +∞) and
/// u_left(x) = u_right(−x) (outgoing toward −∞, by mirror symmetry of the
/// cavity) as G = −u_left(x_<) u_right(x_>)/W. The sign makes
/// Im G(x, x, ω) > 0 for ω > 0, the convention the spectral density needs.
pub fn exact_green(cavity: &SlabCavity, x: f64, xp: f64, omega: f64) -> Result<Complex64> {
    cavity.require_inside("green position x", x)?;
    cavity.require_inside("green position x'", xp)?;
    if !(omega > 0.0) {
        return Err(Error::OutOfDomain {
            what: "omega",
            value: omega,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    let k_r = cavity.n_r * omega / cavity.c;
    let k_b = cavity.n_b * omega / cavity.c;
    let half = 0.5 * cavity.length;
    // Interior coefficients of u_right, matched at x = L/2 to a unit-amplitude
    // outgoing wave e^{i k_B x}.
    let boundary = (Complex64::i() * k_b * half).exp();
    let a = boundary * 0.5 * (1.0 + k_b / k_r) * (-Complex64::i() * k_r * half).exp();
    let b = boundary * 0.5 * (1.0 - k_b / k_r) * (Complex64::i() * k_r * half).exp();
    let u_right = |t: f64| {
        a * (Complex64::i() * k_r * t).exp() + b * (-Complex64::i() * k_r * t).exp()
    };
    let wronskian = Complex64::i() * 2.0 * k_r * (a * a - b * b);
    let (lo, hi) = if x <= xp { (x, xp) } else { (xp, x) };
    // u_left(x_<) = u_right(−x_<).
    Ok(-u_right(-lo) * u_right(hi) / wronskian)
}

/// Exact spectral density θ(ω)·ω²·Im G(x, x′, ω)/c² in units ħ/(ε₀L)
/// (ħ = ε₀ = 1 internally). Exactly zero for ω ≤ 0.
pub fn exact_spectral(cavity: &SlabCavity, x: f64, xp: f64, omega: f64) -> Result<f64> {
    cavity.require_inside("spectral position x", x)?;
    cavity.require_inside("spectral position x'", xp)?;
    if omega <= 0.0 {
        return Ok(0.0);
    }
    let g = exact_green(cavity, x, xp, omega)?;
    Ok(omega * omega * g.im / (cavity.c * cavity.c))
}

/// Index range for the pole expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    /// μ ∈ {−M, …, M} including 0: the exact two-sided expansion.
    Full,
    /// μ ∈ {1, …, M}: the meromorphic approximation that keeps only poles
    /// with positive real part.
    PositiveOnly,
}

/// Pole expansion of the spectral density,
/// (1/2)·Im[Σ_μ ω̃_μ f̃_μ(x) f̃_μ(x′)/(ω̃_μ − ω)], over the selected block.
pub fn pole_spectral(qnms: &QnmSet, x: f64, xp: f64, omega: f64, block: Block) -> Result<f64> {
    qnms.cavity.require_inside("pole position x", x)?;
    qnms.cavity.require_inside("pole position x'", xp)?;
    let mut acc = Complex64::new(0.0, 0.0);
    let m = qnms.m as i64;
    let range = match block {
        Block::Full => {
            if qnms.m == 0 {
                return Ok(0.0);
            }
            -m..=m
        }
        Block::PositiveOnly => 1..=m,
    };
    for mu in range {
        let w = qnms.frequency(mu);
        acc += w * qnms.mode_inside(mu, x) * qnms.mode_inside(mu, xp) / (w - omega);
    }
    Ok(0.5 * acc.im)
}

/// Completeness deviation |φ(x) − (n_R²/2) Σ_{|μ|≤M} f̃_μ(x) ∫ f̃_μ φ dx′|
/// over the slab. Decreases with M at interior points for smooth φ.
pub fn completeness_check(
    qnms: &QnmSet,
    testfn: impl Fn(f64) -> Complex64,
    x: f64,
) -> Result<f64> {
    qnms.cavity.require_inside("completeness position x", x)?;
    let half = 0.5 * qnms.cavity.length;
    let mut acc = Complex64::new(0.0, 0.0);
    for mu in qnms.indices() {
        let (overlap, _) =
            adaptive_quadrature(|t| qnms.mode_inside(mu, t) * testfn(t), -half, half, OVERLAP_QUAD_TOL)?;
        acc += qnms.mode_inside(mu, x) * overlap;
    }
    let n_r = qnms.cavity.n_r;
    Ok((testfn(x) - acc * (0.5 * n_r * n_r)).norm())
}

/// Partial sum Σ_{|μ|≤M} f̃_μ(x) f̃_μ(x′)/ω̃_μ of the over-completeness
/// identity (the full two-sided sum tends to a vanishing combination, making
/// the family linearly dependent). μ = 0 is included, consistent with the
/// other extended-domain sums; ω̃₀ = i ln(α)·c/(L n_R) ≠ 0, so the term is
/// finite.
pub fn overcompleteness_check(qnms: &QnmSet, x: f64, xp: f64) -> Result<Complex64> {
    qnms.cavity.require_inside("overcompleteness position x", x)?;
    qnms.cavity.require_inside("overcompleteness position x'", xp)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for mu in qnms.indices() {
        acc += qnms.mode_inside(mu, x) * qnms.mode_inside(mu, xp) / qnms.frequency(mu);
    }
    Ok(acc)
}
