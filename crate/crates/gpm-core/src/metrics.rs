//! Spectral-density grids over (x, x′, ω), method dispatch, and the
//! comparison metrics that quantify agreement between constructions.
//!
//! Grids are evaluated node by node through a [`SpectralEvaluator`], which
//! front-loads all per-method setup (Hermitization solve, S-matrix
//! quadrature) so that per-node evaluation is a pure function safe to fan out
//! across threads. The crate itself stays single-threaded; callers that want
//! parallelism evaluate chunks themselves and reassemble with
//! [`SpectralGrid::from_parts`].

use alloc::vec::Vec;

use num_complex::Complex64;
// Under no_std the inherent f64 math methods are absent; the trait fills in.
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::altmethods::{naive_spectral, QqnmParameters, S_QUAD_TOL};
use crate::error::{Error, Result};
use crate::gpm::GpmParameters;
use crate::hermitization::HermitizationSolution;
use crate::slab::{exact_spectral, pole_spectral, Block, QnmSet, SlabCavity};

/// Hermitization family parameter used when a method needs one and the
/// caller does not say otherwise: a = 2 selects the slab T matrix.
pub const DEFAULT_A_PARAM: Complex64 = Complex64::new(2.0, 0.0);

/// Spectral-density construction selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Continuum result from the slab Green's function.
    Exact,
    /// Generalized-pseudomode correlator (Hermitization + Lindblad recovery).
    Gpm,
    /// Bare pole expansion over the full index block μ ∈ {−M..M}.
    PoleFull,
    /// Bare pole expansion over μ ∈ {1..M} only.
    PolePositive,
    /// Naive Hermitization (residues forced real).
    Naive,
    /// Quantized-QNM construction (regularized modes + S matrix).
    Qqnm,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Exact,
        Method::Gpm,
        Method::PoleFull,
        Method::PolePositive,
        Method::Naive,
        Method::Qqnm,
    ];

    /// Stable tag used in file outputs and CLI flags.
    pub fn tag(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Gpm => "gpm",
            Method::PoleFull => "pole_full",
            Method::PolePositive => "pole_positive",
            Method::Naive => "naive",
            Method::Qqnm => "qqnm",
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == tag)
            .ok_or_else(|| {
                Error::InvalidInput(alloc::format!(
                    "unknown method '{tag}' (expected one of exact, gpm, pole_full, \
                     pole_positive, naive, qqnm)"
                ))
            })
    }
}

/// Uniform axis: `count` points from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    min: f64,
    max: f64,
    count: usize,
}

impl AxisSpec {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidInput("axis bounds must be finite".into()));
        }
        if count == 0 {
            return Err(Error::InvalidInput(
                "axis needs at least one point".into(),
            ));
        }
        if count == 1 && min != max {
            return Err(Error::InvalidInput(
                "single-point axis requires min == max".into(),
            ));
        }
        if count > 1 && !(min < max) {
            return Err(Error::InvalidInput(alloc::format!(
                "axis requires min < max, got [{min}, {max}]"
            )));
        }
        Ok(AxisSpec { min, max, count })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Endpoint-exact linear interpolation; strictly increasing for count > 1.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return alloc::vec![self.min];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / n;
                self.min * (1.0 - t) + self.max * t
            })
            .collect()
    }
}

/// x′ handling: either the diagonal x′ = x, or an independent axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XpSpec {
    Diagonal,
    Axis(AxisSpec),
}

/// x′ values carried by a built grid.
#[derive(Debug, Clone, PartialEq)]
pub enum XpValues {
    /// x′ = x pointwise; the tensor has a collapsed x′ dimension of size 1.
    Diagonal,
    Axis(Vec<f64>),
}

/// Tabulated spectral density; tensor indexed (x outer, x′ middle, ω inner).
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    method: Method,
    cavity: SlabCavity,
    truncation: usize,
    x_values: Vec<f64>,
    xp: XpValues,
    omega_values: Vec<f64>,
    values: Vec<f64>,
}

fn require_strictly_increasing(what: &'static str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidInput(alloc::format!("{what} axis is empty")));
    }
    for w in values.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::InvalidInput(alloc::format!(
                "{what} axis must be strictly increasing ({} then {})",
                w[0],
                w[1]
            )));
        }
    }
    Ok(())
}

impl SpectralGrid {
    /// Assemble a grid from already-computed values (chunked parallel
    /// evaluation, file parsing). Axes must be strictly increasing, the value
    /// tensor must have exactly one entry per node, and every value must be
    /// finite.
    pub fn from_parts(
        method: Method,
        cavity: SlabCavity,
        truncation: usize,
        x_values: Vec<f64>,
        xp: XpValues,
        omega_values: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        require_strictly_increasing("x", &x_values)?;
        if let XpValues::Axis(xp_values) = &xp {
            require_strictly_increasing("x'", xp_values)?;
        }
        require_strictly_increasing("omega", &omega_values)?;
        let xp_count = match &xp {
            XpValues::Diagonal => 1,
            XpValues::Axis(v) => v.len(),
        };
        let expected = x_values.len() * xp_count * omega_values.len();
        if values.len() != expected {
            return Err(Error::InvalidInput(alloc::format!(
                "value tensor has {} entries, grid has {expected} nodes",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(alloc::format!(
                "non-finite value at flat index {bad}"
            )));
        }
        Ok(SpectralGrid {
            method,
            cavity,
            truncation,
            x_values,
            xp,
            omega_values,
            values,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn cavity(&self) -> &SlabCavity {
        &self.cavity
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn x_values(&self) -> &[f64] {
        &self.x_values
    }

    pub fn xp(&self) -> &XpValues {
        &self.xp
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.xp, XpValues::Diagonal)
    }

    pub fn omega_values(&self) -> &[f64] {
        &self.omega_values
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn xp_count(&self) -> usize {
        match &self.xp {
            XpValues::Diagonal => 1,
            XpValues::Axis(v) => v.len(),
        }
    }

    /// The x′ coordinate of node (ix, ixp); on diagonal grids this is x_ix.
    pub fn xp_at(&self, ix: usize, ixp: usize) -> f64 {
        match &self.xp {
            XpValues::Diagonal => self.x_values[ix],
            XpValues::Axis(v) => v[ixp],
        }
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, ix: usize, ixp: usize, iw: usize) -> f64 {
        let nw = self.omega_values.len();
        self.values[(ix * self.xp_count() + ixp) * nw + iw]
    }

    /// Visit every node in storage order with its coordinates and value.
    pub fn for_each_node(&self, mut f: impl FnMut(f64, f64, f64, f64)) {
        let mut flat = 0;
        for (ix, &x) in self.x_values.iter().enumerate() {
            for ixp in 0..self.xp_count() {
                let xp = self.xp_at(ix, ixp);
                for &omega in &self.omega_values {
                    f(x, xp, omega, self.values[flat]);
                    flat += 1;
                }
            }
        }
    }

    fn axes_match(&self, other: &SpectralGrid) -> bool {
        self.x_values == other.x_values
            && self.xp == other.xp
            && self.omega_values == other.omega_values
    }
}

/// Per-method evaluation state: everything expensive happens in [`new`],
/// after which [`eval`] is a pure function of the node coordinates.
///
/// [`new`]: SpectralEvaluator::new
/// [`eval`]: SpectralEvaluator::eval
#[derive(Debug, Clone)]
pub struct SpectralEvaluator {
    method: Method,
    cavity: SlabCavity,
    truncation: usize,
    backend: Backend,
}

#[derive(Debug, Clone)]
enum Backend {
    Exact,
    Pole { qnms: QnmSet, block: Block },
    Gpm(GpmParameters),
    Naive(QnmSet),
    Qqnm(QqnmParameters),
}

impl SpectralEvaluator {
    pub fn new(
        cavity: &SlabCavity,
        truncation: usize,
        method: Method,
        a_param: Complex64,
    ) -> Result<Self> {
        let backend = match method {
            Method::Exact => Backend::Exact,
            Method::PoleFull => Backend::Pole {
                qnms: QnmSet::new(cavity.clone(), truncation)?,
                block: Block::Full,
            },
            Method::PolePositive => Backend::Pole {
                qnms: QnmSet::new(cavity.clone(), truncation)?,
                block: Block::PositiveOnly,
            },
            Method::Gpm => {
                let qnms = QnmSet::new(cavity.clone(), truncation)?;
                let solution = HermitizationSolution::solve(&qnms, a_param)?;
                Backend::Gpm(GpmParameters::from_solution(&qnms, &solution)?)
            }
            Method::Naive => Backend::Naive(QnmSet::new(cavity.clone(), truncation)?),
            Method::Qqnm => {
                let qnms = QnmSet::new(cavity.clone(), truncation)?;
                Backend::Qqnm(QqnmParameters::new(&qnms, S_QUAD_TOL)?)
            }
        };
        Ok(SpectralEvaluator {
            method,
            cavity: cavity.clone(),
            truncation,
            backend,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn cavity(&self) -> &SlabCavity {
        &self.cavity
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Spectral density of the selected method at one node.
    pub fn eval(&self, x: f64, xp: f64, omega: f64) -> Result<f64> {
        match &self.backend {
            Backend::Exact => exact_spectral(&self.cavity, x, xp, omega),
            Backend::Pole { qnms, block } => pole_spectral(qnms, x, xp, omega, *block),
            Backend::Gpm(params) => params.spectral(x, xp, omega),
            Backend::Naive(qnms) => naive_spectral(qnms, x, xp, omega),
            Backend::Qqnm(params) => params.spectral(x, xp, omega),
        }
    }
}

/// Evaluate `method` on the tensor grid, with all setup defaults (a = 2 for
/// the Hermitization family).
pub fn build_grid(
    cavity: &SlabCavity,
    truncation: usize,
    method: Method,
    x_spec: &AxisSpec,
    xp_spec: &XpSpec,
    omega_spec: &AxisSpec,
) -> Result<SpectralGrid> {
    let evaluator = SpectralEvaluator::new(cavity, truncation, method, DEFAULT_A_PARAM)?;
    build_grid_with(&evaluator, x_spec, xp_spec, omega_spec)
}

/// Evaluate an already-constructed evaluator on the tensor grid,
/// single-threaded, in storage order.
pub fn build_grid_with(
    evaluator: &SpectralEvaluator,
    x_spec: &AxisSpec,
    xp_spec: &XpSpec,
    omega_spec: &AxisSpec,
) -> Result<SpectralGrid> {
    let x_values = x_spec.values();
    let omega_values = omega_spec.values();
    let xp = match xp_spec {
        XpSpec::Diagonal => XpValues::Diagonal,
        XpSpec::Axis(spec) => XpValues::Axis(spec.values()),
    };
    let xp_count = match &xp {
        XpValues::Diagonal => 1,
        XpValues::Axis(v) => v.len(),
    };
    let mut values = Vec::with_capacity(x_values.len() * xp_count * omega_values.len());
    for (ix, &x) in x_values.iter().enumerate() {
        for ixp in 0..xp_count {
            let xp_here = match &xp {
                XpValues::Diagonal => x_values[ix],
                XpValues::Axis(v) => v[ixp],
            };
            for &omega in &omega_values {
                let value = evaluator
                    .eval(x, xp_here, omega)
                    .map_err(|e| e.at_grid_node(x, xp_here, omega))?;
                values.push(value);
            }
        }
    }
    SpectralGrid::from_parts(
        evaluator.method(),
        evaluator.cavity().clone(),
        evaluator.truncation(),
        x_values,
        xp,
        omega_values,
        values,
    )
}

/// Axis-aligned sub-grid predicate; `None` leaves a coordinate unrestricted,
/// bounds are inclusive.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Region {
    pub x: Option<(f64, f64)>,
    pub xp: Option<(f64, f64)>,
    pub omega: Option<(f64, f64)>,
}

impl Region {
    pub fn all() -> Self {
        Region::default()
    }

    pub fn contains(&self, x: f64, xp: f64, omega: f64) -> bool {
        let inside = |range: Option<(f64, f64)>, v: f64| match range {
            None => true,
            Some((lo, hi)) => lo <= v && v <= hi,
        };
        inside(self.x, x) && inside(self.xp, xp) && inside(self.omega, omega)
    }
}

/// Aggregate discrepancy between a candidate grid and a reference grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonMetrics {
    /// max |candidate − reference| over the region.
    pub max_abs_diff: f64,
    /// ‖candidate − reference‖₂ / ‖reference‖₂ over the region.
    pub rel_l2: f64,
    /// max |reference| over the region, for normalizing max_abs_diff.
    pub peak_of_reference: f64,
}

/// Pointwise and aggregate comparison over the nodes selected by `region`.
/// Axes must match exactly; methods, cavities, and truncations may differ
/// (that is the point of comparing). The reference's L2 norm over the same
/// region normalizes rel_l2; a zero reference with a nonzero candidate
/// reports infinite rel_l2 rather than erroring.
pub fn compare_grids(
    candidate: &SpectralGrid,
    reference: &SpectralGrid,
    region: &Region,
) -> Result<ComparisonMetrics> {
    if !candidate.axes_match(reference) {
        return Err(Error::InvalidInput(
            "grid axes differ; comparison needs identical x, x', omega axes".into(),
        ));
    }
    let mut max_abs_diff = 0.0f64;
    let mut peak = 0.0f64;
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    let mut selected = 0usize;
    let mut flat = 0usize;
    for (ix, &x) in candidate.x_values.iter().enumerate() {
        for ixp in 0..candidate.xp_count() {
            let xp = candidate.xp_at(ix, ixp);
            for &omega in &candidate.omega_values {
                if region.contains(x, xp, omega) {
                    let a = candidate.values[flat];
                    let b = reference.values[flat];
                    let diff = (a - b).abs();
                    max_abs_diff = max_abs_diff.max(diff);
                    peak = peak.max(b.abs());
                    num += (a - b) * (a - b);
                    den += b * b;
                    selected += 1;
                }
                flat += 1;
            }
        }
    }
    if selected == 0 {
        return Err(Error::InvalidInput(
            "region selects no grid nodes".into(),
        ));
    }
    let rel_l2 = if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        (num / den).sqrt()
    };
    Ok(ComparisonMetrics {
        max_abs_diff,
        rel_l2,
        peak_of_reference: peak,
    })
}
