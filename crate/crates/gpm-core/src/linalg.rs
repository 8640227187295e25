//! Dense complex linear algebra sized for the problems at hand (M ≲ 64):
//! row-major matrices, a cyclic Jacobi eigensolver for Hermitian matrices,
//! LU solves with partial pivoting and a condition estimate, and adaptive
//! Gauss-Kronrod quadrature for complex-valued integrands.
//!
//! Iterative or sparse methods are deliberately absent; a 30×30 Hermitian
//! eigenproblem is far below the size where they pay off.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
// Under no_std the inherent f64 math methods are absent; the trait fills in.
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::{Error, Result};

/// Relative residual accepted for factorizations (eigendecomposition
/// reconstruction, V V† multiply-back, linear-solve residuals). Double
/// precision leaves ~1e−13 for 30×30 problems; 1e−10 adds headroom.
pub const FACTORIZATION_TOL: f64 = 1e-10;

/// Relative off-Hermitian residual above which a matrix stops counting as
/// Hermitian. Matrices built from closed forms are Hermitian to rounding
/// error, so anything past 1e−12 indicates a construction bug.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Condition-number estimate above which linear solves are refused.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Hard cap on adaptive-quadrature subdivisions; bounds runtime on integrands
/// that never converge (the error estimate is still reported).
pub const QUADRATURE_PANEL_BUDGET: usize = 1 << 20;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must be rows × cols");
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
        ComplexMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must match");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += aik * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "vector length must match columns");
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * factor)
    }

    /// self += factor · rhs, without allocating.
    pub fn add_scaled_in_place(&mut self, rhs: &Self, factor: Complex64) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += factor * b;
        }
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference to another matrix.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max|A − A†|, the quantity classified against [`HERMITICITY_TOL`].
    pub fn hermiticity_residual(&self) -> f64 {
        assert!(self.is_square());
        let mut res: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                res = res.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        res
    }

    /// Hermitian part (A + A†)/2.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Anti-Hermitian part (A − A†)/2.
    pub fn anti_hermitian_part(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] - self[(j, i)].conj()) * 0.5
        })
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].norm()).sum())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition A = U diag(λ) U† of a Hermitian matrix via cyclic
/// Jacobi rotations. Eigenvalues ascend; eigenvector columns are phased so
/// that each column's largest-modulus entry is real and positive, which makes
/// the decomposition reproducible (and maps the identity to itself).
///
/// Rejects inputs whose Hermiticity residual exceeds
/// [`HERMITICITY_TOL`] × max|A|.
pub fn hermitian_eigendecompose(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !a.is_square() {
        return Err(Error::InvalidInput("eigendecomposition needs a square matrix".into()));
    }
    let n = a.rows();
    let scale = a.max_abs();
    let herm_res = a.hermiticity_residual();
    if scale > 0.0 && herm_res > HERMITICITY_TOL * scale {
        return Err(Error::NotHermitian {
            residual: herm_res,
            tolerance: HERMITICITY_TOL * scale,
        });
    }

    // Work on the exactly Hermitian average so rotations see clean data.
    let mut m = a.hermitian_part();
    let mut u = ComplexMatrix::identity(n);
    if scale == 0.0 {
        return Ok((vec![0.0; n], u));
    }

    let off = |m: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += m[(i, j)].norm_sqr();
            }
        }
        s.sqrt()
    };

    // Each rotation removes 2|a_pq|² from the off-diagonal Frobenius norm,
    // so cyclic sweeps converge; ~10 sweeps suffice for n = 64.
    for _sweep in 0..64 {
        if off(&m) <= 1e-14 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = m[(p, q)];
                let abs_b = beta.norm();
                if abs_b <= 1e-300 {
                    continue;
                }
                let phase = beta / abs_b;
                let zeta = (m[(q, q)].re - m[(p, p)].re) / (2.0 * abs_b);
                let sgn = if zeta >= 0.0 { 1.0 } else { -1.0 };
                // Smaller-magnitude root of t² − 2ζt − 1 = 0: stable rotation.
                let t = -sgn / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // A ← G†AG with G_pp = c·e^{iδ}, G_pq = −s·e^{iδ},
                // G_qp = s, G_qq = c, where e^{iδ} = a_pq/|a_pq|.
                for i in 0..n {
                    let aip = m[(i, p)];
                    let aiq = m[(i, q)];
                    m[(i, p)] = aip * phase * c + aiq * s;
                    m[(i, q)] = -aip * phase * s + aiq * c;
                }
                for j in 0..n {
                    let apj = m[(p, j)];
                    let aqj = m[(q, j)];
                    m[(p, j)] = apj * phase.conj() * c + aqj * s;
                    m[(q, j)] = -apj * phase.conj() * s + aqj * c;
                }
                // Clean up rounding in the eliminated pair.
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    let uip = u[(i, p)];
                    let uiq = u[(i, q)];
                    u[(i, p)] = uip * phase * c + uiq * s;
                    u[(i, q)] = -uip * phase * s + uiq * c;
                }
            }
        }
    }

    // Ascending eigenvalue order with the matching column permutation.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(i, i)].re.partial_cmp(&m[(j, j)].re).unwrap_or(Ordering::Equal)
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        // Canonical phase: largest-modulus entry becomes real positive.
        let mut best = 0usize;
        let mut best_norm = 0.0;
        for i in 0..n {
            let nrm = u[(i, old_col)].norm();
            if nrm > best_norm {
                best_norm = nrm;
                best = i;
            }
        }
        let anchor = u[(best, old_col)];
        let gauge = if best_norm > 0.0 {
            anchor.conj() / best_norm
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            vectors[(i, new_col)] = u[(i, old_col)] * gauge;
        }
    }
    Ok((eigenvalues, vectors))
}

/// LU factorization with partial pivoting, plus a condition estimate
/// ‖A‖∞·‖A⁻¹‖∞ (the inverse is formed explicitly; at n ≤ 64 that costs
/// nothing worth optimizing away).
pub struct LuFactors {
    n: usize,
    lu: ComplexMatrix,
    pivots: Vec<usize>,
    condition: f64,
}

pub fn lu_factor(a: &ComplexMatrix) -> Result<LuFactors> {
    if !a.is_square() {
        return Err(Error::InvalidInput("linear solve needs a square matrix".into()));
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut pivots = vec![0usize; n];
    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_mag = lu[(k, k)].norm();
        for i in (k + 1)..n {
            let mag = lu[(i, k)].norm();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if pivot_mag == 0.0 {
            return Err(Error::IllConditioned { condition: f64::INFINITY });
        }
        pivots[k] = pivot_row;
        if pivot_row != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(pivot_row, j)];
                lu[(pivot_row, j)] = tmp;
            }
        }
        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            let factor = lu[(i, k)] / pivot;
            lu[(i, k)] = factor;
            for j in (k + 1)..n {
                let sub = factor * lu[(k, j)];
                lu[(i, j)] -= sub;
            }
        }
    }

    let mut factors = LuFactors {
        n,
        lu,
        pivots,
        condition: 0.0,
    };
    // ‖A⁻¹‖∞ column by column from the factorization itself.
    let mut inv_norm_rows = vec![0.0f64; n];
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = Complex64::new(1.0, 0.0);
        let col = factors.solve_vec_unchecked(&e);
        e[j] = Complex64::new(0.0, 0.0);
        for i in 0..n {
            inv_norm_rows[i] += col[i].norm();
        }
    }
    let inv_norm = inv_norm_rows.iter().fold(0.0f64, |acc, &v| acc.max(v));
    factors.condition = a.norm_inf() * inv_norm;
    if !factors.condition.is_finite() || factors.condition >= CONDITION_LIMIT {
        return Err(Error::IllConditioned {
            condition: factors.condition,
        });
    }
    Ok(factors)
}

impl LuFactors {
    pub fn condition(&self) -> f64 {
        self.condition
    }

    fn solve_vec_unchecked(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x = b.to_vec();
        // The factorization swaps whole rows, multiplier columns included, so
        // the stored multipliers belong to fully permuted row positions: all
        // swaps must land on the right-hand side before elimination starts.
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
        }
        for k in 0..n {
            let xk = x[k];
            for i in (k + 1)..n {
                let sub = self.lu[(i, k)] * xk;
                x[i] -= sub;
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            for j in (k + 1)..n {
                acc -= self.lu[(k, j)] * x[j];
            }
            x[k] = acc / self.lu[(k, k)];
        }
        x
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n, "right-hand side length must match");
        self.solve_vec_unchecked(b)
    }
}

/// Solve A·X = B, rejecting systems whose condition estimate reaches
/// [`CONDITION_LIMIT`].
pub fn solve_linear(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows() != b.rows() {
        return Err(Error::InvalidInput("row counts of A and B must match".into()));
    }
    let factors = lu_factor(a)?;
    let mut x = ComplexMatrix::zeros(b.rows(), b.cols());
    for j in 0..b.cols() {
        let col = factors.solve_vec(&b.column(j));
        for i in 0..b.rows() {
            x[(i, j)] = col[i];
        }
    }
    Ok(x)
}

/// Matrix inverse via [`solve_linear`] against the identity.
pub fn invert(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve_linear(a, &ComplexMatrix::identity(a.rows()))
}

// 15-point Kronrod abscissae on [−1, 1] (positive half) and the embedded
// 7-point Gauss weights, as tabulated in QUADPACK's qk15.
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

struct PanelResult {
    integral: Complex64,
    error: f64,
}

/// One G7/K15 panel with QUADPACK's error rescaling.
fn gauss_kronrod_panel(f: &mut impl FnMut(f64) -> Complex64, lo: f64, hi: f64) -> PanelResult {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut result_gauss = fc * WG[3];
    let mut result_kronrod = fc * WGK[7];
    let mut resabs = fc.norm() * WGK[7];
    let mut values = [[Complex64::new(0.0, 0.0); 2]; 7];
    for j in 0..7 {
        let abscissa = half * XGK[j];
        let f1 = f(center - abscissa);
        let f2 = f(center + abscissa);
        values[j] = [f1, f2];
        let fsum = f1 + f2;
        result_kronrod += fsum * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            result_gauss += fsum * WG[j / 2];
        }
    }
    let mean = result_kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        resasc += WGK[j] * ((values[j][0] - mean).norm() + (values[j][1] - mean).norm());
    }
    let integral = result_kronrod * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut error = ((result_kronrod - result_gauss) * half).norm();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    let underflow_guard = f64::MIN_POSITIVE / (50.0 * f64::EPSILON);
    if resabs > underflow_guard {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    PanelResult { integral, error }
}

struct Segment {
    lo: f64,
    hi: f64,
    integral: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// Adaptive Gauss-Kronrod integration of a complex-valued integrand.
///
/// Returns the integral and an error estimate once the summed panel estimate
/// drops to `tol` (absolute). Bisects the worst panel first; gives up after
/// [`QUADRATURE_PANEL_BUDGET`] panels with a [`Error::QuadratureBudget`]
/// carrying the partial result.
pub fn adaptive_quadrature(
    mut f: impl FnMut(f64) -> Complex64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(Complex64, f64)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("quadrature tolerance must be positive".into()));
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidInput("quadrature bounds must be finite".into()));
    }
    if lo == hi {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }

    let first = gauss_kronrod_panel(&mut f, lo, hi);
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        lo,
        hi,
        integral: first.integral,
        error: first.error,
    });
    let mut total_error = first.error;
    let mut panels = 1usize;

    while total_error > tol {
        if panels >= QUADRATURE_PANEL_BUDGET {
            let partial = heap.iter().map(|s| s.integral).sum();
            return Err(Error::QuadratureBudget {
                partial,
                error_estimate: total_error,
                tolerance: tol,
            });
        }
        let worst = heap.pop().expect("heap never empty while error positive");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Panel width at rounding floor; keep it and stop refining.
            total_error -= worst.error;
            let pinned = Segment { error: 0.0, ..worst };
            heap.push(pinned);
            if total_error <= tol {
                break;
            }
            continue;
        }
        let left = gauss_kronrod_panel(&mut f, worst.lo, mid);
        let right = gauss_kronrod_panel(&mut f, mid, worst.hi);
        total_error += left.error + right.error - worst.error;
        heap.push(Segment {
            lo: worst.lo,
            hi: mid,
            integral: left.integral,
            error: left.error,
        });
        heap.push(Segment {
            lo: mid,
            hi: worst.hi,
            integral: right.integral,
            error: right.error,
        });
        panels += 1;
    }

    let value = heap.iter().map(|s| s.integral).sum();
    let error = heap.iter().map(|s| s.error).sum();
    Ok((value, error))
}
