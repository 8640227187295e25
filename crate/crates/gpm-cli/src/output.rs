//! File formats: CSV spectral grids, JSON matrices/metrics/QNM listings, and
//! the parsing that loads grids back for comparison.
//!
//! Everything written here is byte-deterministic for a fixed config: floats
//! go out as `{:.16e}` (17 significant digits, exact round-trip) in CSV and
//! through serde_json's shortest-round-trip form in JSON; config echoes are
//! JSON objects with sorted keys; row order is fixed (x outer, x′ middle,
//! ω inner).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use gpm_core::linalg::ComplexMatrix;
use gpm_core::metrics::{Method, SpectralGrid, XpValues};
use gpm_core::slab::SlabCavity;

/// Exact header line of spectral CSV files. The trailing token annotates the
/// units of the `value` column; data rows carry the first five fields.
pub const CSV_HEADER: &str = "x,xp,omega,value,method,units=hbar_over_eps0_L";

const CONFIG_PREFIX: &str = "# config: ";

/// Spectral-density units: ħ/(ε₀L) with c = L = 1.
pub const SPECTRAL_UNITS: &str = "hbar_over_eps0_L";

/// Frequency/matrix units: c/L.
pub const FREQUENCY_UNITS: &str = "c_over_L";

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Render a grid as the documented CSV format.
pub fn grid_to_csv(grid: &SpectralGrid, config: &Value) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CONFIG_PREFIX}{config}");
    let _ = writeln!(out, "{CSV_HEADER}");
    let tag = grid.method().tag();
    grid.for_each_node(|x, xp, omega, value| {
        let _ = writeln!(
            out,
            "{},{},{},{},{tag}",
            fmt_float(x),
            fmt_float(xp),
            fmt_float(omega),
            fmt_float(value)
        );
    });
    out
}

/// JSON form of a spectral grid (`--format json`); `xp: null` means the
/// diagonal x′ = x.
#[derive(Debug, Serialize, Deserialize)]
pub struct GridDoc {
    pub config: Value,
    pub method: String,
    pub units: String,
    pub n_r: f64,
    pub n_b: f64,
    pub length: f64,
    pub m: usize,
    pub x: Vec<f64>,
    pub xp: Option<Vec<f64>>,
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn grid_to_json(grid: &SpectralGrid, config: &Value) -> Result<String> {
    let doc = GridDoc {
        config: config.clone(),
        method: grid.method().tag().to_string(),
        units: SPECTRAL_UNITS.to_string(),
        n_r: grid.cavity().n_r,
        n_b: grid.cavity().n_b,
        length: grid.cavity().length,
        m: grid.truncation(),
        x: grid.x_values().to_vec(),
        xp: match grid.xp() {
            XpValues::Diagonal => None,
            XpValues::Axis(v) => Some(v.clone()),
        },
        omega: grid.omega_values().to_vec(),
        values: grid.values().to_vec(),
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn grid_from_doc(doc: GridDoc) -> Result<(SpectralGrid, Value)> {
    let method = Method::parse(&doc.method).context("grid file method")?;
    let cavity = SlabCavity::new(doc.n_r, doc.n_b, doc.length).context("grid file cavity")?;
    let xp = match doc.xp {
        None => XpValues::Diagonal,
        Some(v) => XpValues::Axis(v),
    };
    let grid = SpectralGrid::from_parts(method, cavity, doc.m, doc.x, xp, doc.omega, doc.values)
        .context("grid file shape")?;
    Ok((grid, doc.config))
}

fn config_f64(config: &Value, key: &str) -> Result<f64> {
    config
        .get(key)
        .and_then(Value::as_f64)
        .with_context(|| format!("config comment lacks numeric '{key}'"))
}

fn config_usize(config: &Value, key: &str) -> Result<usize> {
    config
        .get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .with_context(|| format!("config comment lacks integer '{key}'"))
}

fn axis_steps(config: &Value, key: &str) -> Result<usize> {
    config
        .get(key)
        .and_then(|axis| axis.get("steps"))
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .with_context(|| format!("config comment lacks '{key}.steps'"))
}

fn parse_grid_csv(text: &str) -> Result<(SpectralGrid, Value)> {
    let mut config: Option<Value> = None;
    let mut header_seen = false;
    let mut rows: Vec<(f64, f64, f64, f64)> = Vec::new();
    let mut method: Option<String> = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let Some(json) = line.strip_prefix(CONFIG_PREFIX) {
                config = Some(
                    serde_json::from_str(json)
                        .with_context(|| format!("line {}: bad config comment", lineno + 1))?,
                );
            }
            continue;
        }
        if !header_seen {
            if line != CSV_HEADER {
                bail!(
                    "line {}: header must be exactly '{CSV_HEADER}', got '{line}'",
                    lineno + 1
                );
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            bail!("line {}: expected 5 fields, got {}", lineno + 1, fields.len());
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .with_context(|| format!("line {}: bad {what} '{s}'", lineno + 1))
        };
        rows.push((
            parse(fields[0], "x")?,
            parse(fields[1], "xp")?,
            parse(fields[2], "omega")?,
            parse(fields[3], "value")?,
        ));
        match &method {
            None => method = Some(fields[4].to_string()),
            Some(tag) if tag == fields[4] => {}
            Some(tag) => bail!(
                "line {}: mixed method tags '{tag}' and '{}'",
                lineno + 1,
                fields[4]
            ),
        }
    }
    let config = config.context("CSV lacks the '# config: {...}' comment line")?;
    if !header_seen {
        bail!("CSV lacks the header line");
    }
    if rows.is_empty() {
        bail!("CSV has no data rows");
    }
    let method = Method::parse(&method.context("CSV has no method column values")?)
        .context("CSV method column")?;
    let cavity = SlabCavity::new(
        config_f64(&config, "n_r")?,
        config_f64(&config, "n_b")?,
        config_f64(&config, "length")?,
    )
    .context("config comment cavity")?;
    let truncation = config_usize(&config, "m")?;
    let nx = axis_steps(&config, "x")?;
    let nw = axis_steps(&config, "omega")?;
    let diagonal = matches!(config.get("xp"), Some(Value::String(s)) if s == "diag");
    let nxp = if diagonal {
        1
    } else {
        axis_steps(&config, "xp")?
    };
    if rows.len() != nx * nxp * nw {
        bail!(
            "CSV has {} rows, config promises {} = {nx} x {nxp} x {nw}",
            rows.len(),
            nx * nxp * nw
        );
    }
    let x_values: Vec<f64> = (0..nx).map(|i| rows[i * nxp * nw].0).collect();
    let omega_values: Vec<f64> = (0..nw).map(|k| rows[k].2).collect();
    let xp = if diagonal {
        XpValues::Diagonal
    } else {
        XpValues::Axis((0..nxp).map(|j| rows[j * nw].1).collect())
    };
    // Every row must sit on the reconstructed lattice; CSV floats round-trip
    // exactly, so equality is the right check.
    let mut flat = 0usize;
    for (i, &x) in x_values.iter().enumerate() {
        for j in 0..nxp {
            let expect_xp = match &xp {
                XpValues::Diagonal => x_values[i],
                XpValues::Axis(v) => v[j],
            };
            for &omega in &omega_values {
                let row = rows[flat];
                if row.0 != x || row.1 != expect_xp || row.2 != omega {
                    bail!(
                        "row {} is off-lattice: ({}, {}, {}) expected ({x}, {expect_xp}, {omega})",
                        flat + 1,
                        row.0,
                        row.1,
                        row.2
                    );
                }
                flat += 1;
            }
        }
    }
    let values: Vec<f64> = rows.iter().map(|r| r.3).collect();
    let grid = SpectralGrid::from_parts(method, cavity, truncation, x_values, xp, omega_values, values)
        .context("CSV grid shape")?;
    Ok((grid, config))
}

/// Load a spectral grid from either output format (sniffed by first byte).
pub fn read_grid(path: &Path) -> Result<(SpectralGrid, Value)> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading grid file {}", path.display()))?;
    if text.trim_start().starts_with('{') {
        let doc: GridDoc = serde_json::from_str(&text)
            .with_context(|| format!("parsing JSON grid {}", path.display()))?;
        grid_from_doc(doc)
    } else {
        parse_grid_csv(&text).with_context(|| format!("parsing CSV grid {}", path.display()))
    }
}

/// JSON matrix dump: entries row-major as [re, im] pairs.
#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub config: Value,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
    pub units: String,
}

pub fn write_matrix(path: &Path, matrix: &ComplexMatrix, units: &str, config: &Value) -> Result<()> {
    let doc = MatrixDoc {
        config: config.clone(),
        rows: matrix.rows(),
        cols: matrix.cols(),
        entries: matrix.entries().iter().map(|c| [c.re, c.im]).collect(),
        units: units.to_string(),
    };
    write_json(path, &doc)
}

/// JSON list of real values (eigenvalue dumps).
#[derive(Debug, Serialize, Deserialize)]
pub struct ValuesDoc {
    pub config: Value,
    pub units: String,
    pub values: Vec<f64>,
}

pub fn write_values(path: &Path, values: &[f64], units: &str, config: &Value) -> Result<()> {
    let doc = ValuesDoc {
        config: config.clone(),
        units: units.to_string(),
        values: values.to_vec(),
    };
    write_json(path, &doc)
}

/// One QNM row of the `qnm` listing.
#[derive(Debug, Serialize, Deserialize)]
pub struct QnmEntry {
    pub mu: i64,
    pub re_omega: f64,
    pub im_omega: f64,
    pub round_trip_residual: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QnmDoc {
    pub config: Value,
    pub units: String,
    pub modes: Vec<QnmEntry>,
}

/// Comparison result: the four documented metrics plus the config echo.
#[derive(Debug, Serialize, Deserialize)]
pub struct MetricsDoc {
    pub config: Value,
    pub max_abs_diff: f64,
    pub rel_l2: f64,
    pub peak: f64,
    pub region: Value,
}

pub fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(doc)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn render_json<T: Serialize>(doc: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(doc)? + "\n")
}
