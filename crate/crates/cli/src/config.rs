//! Scenario files: flat `key = value` lines with dotted keys.
//!
//! ```text
//! # rotation sweep over a full turn
//! grid.N = 3
//! grid.M = 2
//! grid.d_x = 1
//! grid.d_y = 2
//! grid.sigma = 1
//! grid.rho = 0.5
//! deformation.kind = rotation
//! sweep.variable = theta
//! sweep.steps = 256
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qfim_core::grid::{DeformationMap, EmitterGrid};
use qfim_core::qfim::CostMatrix;
use qfim_core::RMatrix;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {key}: {message}")]
    Field { line: usize, key: String, message: String },
    #[error("{key}: {message}")]
    Missing { key: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

/// What a sweep axis varies.
#[derive(Debug, Clone, PartialEq)]
pub enum AxisVariable {
    Cols,
    Rows,
    /// `N` and `M` together along the diagonal.
    Square,
    /// Index into the deformation parameters.
    Param(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AxisValues {
    Integers(Vec<usize>),
    Reals(Vec<f64>),
}

impl AxisValues {
    pub fn len(&self) -> usize {
        match self {
            Self::Integers(v) => v.len(),
            Self::Reals(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub variable: AxisVariable,
    pub name: String,
    pub values: AxisValues,
}

/// Everything except the sweep needed to build one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub n_cols: usize,
    pub n_rows: usize,
    pub d_x: f64,
    pub d_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub rho: f64,
    pub photons: Photons,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Photons {
    Uniform(u32),
    PerSource(Vec<u32>),
}

impl GridSpec {
    pub fn build(&self, n_cols: usize, n_rows: usize) -> qfim_core::Result<EmitterGrid> {
        let g = EmitterGrid::anisotropic(n_cols, n_rows, self.d_x, self.d_y, self.sigma_x, self.sigma_y, self.rho)?;
        match &self.photons {
            Photons::Uniform(n) => g.with_photons(*n),
            Photons::PerSource(counts) => g.with_photon_counts(counts.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub grid: GridSpec,
    pub map: DeformationMap,
    pub kind: String,
    pub params: Vec<f64>,
    pub param_names: Vec<&'static str>,
    /// Outer axis first.
    pub sweep: Vec<SweepAxis>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub cost: Option<CostMatrix>,
    pub repetitions: u32,
}

/// Short column label of a deformation parameter.
pub fn short_label(name: &str) -> &str {
    match name {
        "alpha" => "a",
        "beta" => "b",
        "iota" => "i",
        "kappa" => "k",
        "theta" => "t",
        "gamma" => "g",
        other => other,
    }
}

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

struct Entries {
    map: BTreeMap<String, Entry>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected 'key = value', got '{content}'"),
            })?;
            let key = key.trim().to_string();
            let value = value.trim().trim_matches('"').to_string();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    message: "empty key".into(),
                });
            }
            if let Some(prev) = map.get(&key) {
                let prev: &Entry = prev;
                return Err(ConfigError::Field {
                    line,
                    key,
                    message: format!("duplicate key (first set on line {})", prev.line),
                });
            }
            map.insert(
                key,
                Entry {
                    line,
                    value,
                    used: false,
                },
            );
        }
        Ok(Self { map })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.get_mut(key).map(|e| {
            e.used = true;
            (e.line, e.value.clone())
        })
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn parsed<T: FromStr>(&mut self, key: &str, what: &str) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| ConfigError::Field {
                line,
                key: key.to_string(),
                message: format!("expected {what}, got '{v}'"),
            }),
        }
    }

    fn required<T: FromStr>(&mut self, key: &str, what: &str) -> Result<T, ConfigError> {
        self.parsed(key, what)?.ok_or_else(|| ConfigError::Missing {
            key: key.to_string(),
            message: format!("required {what} is missing"),
        })
    }

    fn field_error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        match self.map.get(key) {
            Some(e) => ConfigError::Field {
                line: e.line,
                key: key.to_string(),
                message: message.into(),
            },
            None => ConfigError::Missing {
                key: key.to_string(),
                message: message.into(),
            },
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.map.iter().filter(|(_, e)| !e.used).min_by_key(|(_, e)| e.line) {
            Some((key, e)) => Err(ConfigError::Field {
                line: e.line,
                key: key.clone(),
                message: "unknown key".into(),
            }),
            None => Ok(()),
        }
    }
}

fn parse_map(kind: &str) -> Option<DeformationMap> {
    match kind {
        "stretch" => Some(DeformationMap::Stretch),
        "shear" => Some(DeformationMap::Shear),
        "rotation" => Some(DeformationMap::Rotation),
        "inhom_exp" => Some(DeformationMap::InhomExp),
        _ => None,
    }
}

const KINDS: &str = "stretch, shear, rotation, inhom_exp or composite";

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut e = Entries::parse(text)?;
        let grid = parse_grid(&mut e)?;
        let (kind, map) = parse_deformation(&mut e)?;
        let param_names = map.param_names();
        let params = parse_params(&mut e, &param_names)?;
        let mut sweep = Vec::new();
        if e.has("sweep.variable") {
            sweep.push(parse_axis(&mut e, "sweep", &param_names)?);
        }
        if e.has("sweep.inner.variable") {
            if sweep.is_empty() {
                return Err(e.field_error("sweep.inner.variable", "inner axis needs an outer sweep.variable"));
            }
            let inner = parse_axis(&mut e, "sweep.inner", &param_names)?;
            if axes_overlap(&sweep[0].variable, &inner.variable) {
                return Err(e.field_error("sweep.inner.variable", "inner axis repeats the outer variable"));
            }
            sweep.push(inner);
        }
        if let (Photons::PerSource(_), true) = (
            &grid.photons,
            sweep.iter().any(|a| matches!(a.variable, AxisVariable::Cols | AxisVariable::Rows | AxisVariable::Square)),
        ) {
            return Err(e.field_error("grid.photons", "per-source photon list cannot be combined with a grid-size sweep"));
        }
        if !params_present_for(&map, &params, &sweep) {
            return Err(e.field_error("deformation.gamma", "inhom_exp requires a non-zero gamma"));
        }

        let output_path = e.take("output.path").map(|(_, v)| PathBuf::from(v));
        let format = e.parsed::<Format>("output.format", "csv or json")?.unwrap_or(Format::Csv);
        let cost = match e.take("cost_matrix") {
            None => None,
            Some((line, v)) => Some(parse_cost(&v, param_names.len()).map_err(|message| ConfigError::Field {
                line,
                key: "cost_matrix".into(),
                message,
            })?),
        };
        let repetitions: u32 = e.parsed("repetitions", "positive integer")?.unwrap_or(1);
        if repetitions == 0 {
            return Err(e.field_error("repetitions", "must be at least 1"));
        }
        e.finish()?;
        Ok(Self {
            grid,
            map,
            kind,
            params,
            param_names,
            sweep,
            output_path,
            format,
            cost,
            repetitions,
        })
    }
}

fn axes_overlap(a: &AxisVariable, b: &AxisVariable) -> bool {
    use AxisVariable::*;
    match (a, b) {
        (Square, Cols | Rows | Square) | (Cols | Rows, Square) => true,
        _ => a == b,
    }
}

fn params_present_for(map: &DeformationMap, params: &[f64], sweep: &[SweepAxis]) -> bool {
    let names = map.param_names();
    names.iter().enumerate().all(|(i, n)| {
        *n != "gamma" || params[i] != 0.0 || sweep.iter().any(|a| a.variable == AxisVariable::Param(i))
    })
}

fn parse_grid(e: &mut Entries) -> Result<GridSpec, ConfigError> {
    let n_cols: usize = e.required("grid.N", "positive integer")?;
    let n_rows: usize = e.required("grid.M", "positive integer")?;
    for (key, v) in [("grid.N", n_cols), ("grid.M", n_rows)] {
        if v == 0 {
            return Err(e.field_error(key, "must be at least 1"));
        }
    }
    let d_x: f64 = e.required("grid.d_x", "positive number")?;
    let d_y: f64 = e.required("grid.d_y", "positive number")?;
    let sigma: Option<f64> = e.parsed("grid.sigma", "positive number")?;
    let sigma_x: Option<f64> = e.parsed("grid.sigma_x", "positive number")?;
    let sigma_y: Option<f64> = e.parsed("grid.sigma_y", "positive number")?;
    let (sigma_x, sigma_y) = match (sigma, sigma_x, sigma_y) {
        (Some(s), None, None) => (s, s),
        (None, Some(x), Some(y)) => (x, y),
        (Some(_), _, _) => return Err(e.field_error("grid.sigma", "give either grid.sigma or grid.sigma_x/grid.sigma_y")),
        _ => {
            return Err(ConfigError::Missing {
                key: "grid.sigma".into(),
                message: "required: grid.sigma, or both grid.sigma_x and grid.sigma_y".into(),
            })
        }
    };
    let rho: f64 = e.parsed("grid.rho", "number in (-1, 1)")?.unwrap_or(0.0);
    for (key, v) in [("grid.d_x", d_x), ("grid.d_y", d_y), ("grid.sigma_x", sigma_x), ("grid.sigma_y", sigma_y)] {
        if !(v > 0.0 && v.is_finite()) {
            let key = if e.has(key) { key } else { "grid.sigma" };
            return Err(e.field_error(key, format!("must be positive and finite, got {v}")));
        }
    }
    if !(rho.abs() < 1.0) {
        return Err(e.field_error("grid.rho", format!("must satisfy |rho| < 1, got {rho}")));
    }
    let photons = match e.take("grid.photons") {
        None => Photons::Uniform(1),
        Some((line, v)) => {
            let counts: Result<Vec<u32>, _> = v.split(',').map(|t| t.trim().parse::<u32>()).collect();
            let field = |message: String| ConfigError::Field {
                line,
                key: "grid.photons".into(),
                message,
            };
            let counts = counts.map_err(|_| field(format!("expected positive integer(s), got '{v}'")))?;
            if counts.contains(&0) {
                return Err(field("photon numbers must be positive".into()));
            }
            match counts.len() {
                1 => Photons::Uniform(counts[0]),
                n if n == n_cols * n_rows => Photons::PerSource(counts),
                n => return Err(field(format!("expected 1 or N*M = {} values, got {n}", n_cols * n_rows))),
            }
        }
    };
    Ok(GridSpec {
        n_cols,
        n_rows,
        d_x,
        d_y,
        sigma_x,
        sigma_y,
        rho,
        photons,
    })
}

fn parse_deformation(e: &mut Entries) -> Result<(String, DeformationMap), ConfigError> {
    let (line, kind) = e.take("deformation.kind").ok_or_else(|| ConfigError::Missing {
        key: "deformation.kind".into(),
        message: format!("required: one of {KINDS}"),
    })?;
    let field = |message: String| ConfigError::Field {
        line,
        key: "deformation.kind".into(),
        message,
    };
    if kind == "composite" {
        let (mline, list) = e.take("deformation.maps").ok_or_else(|| ConfigError::Missing {
            key: "deformation.maps".into(),
            message: "composite deformation needs a comma-separated list of maps".into(),
        })?;
        let mut maps = Vec::new();
        let mut seen: Vec<&str> = Vec::new();
        for name in list.split(',').map(str::trim) {
            let m = parse_map(name).ok_or_else(|| ConfigError::Field {
                line: mline,
                key: "deformation.maps".into(),
                message: format!("unknown map '{name}'"),
            })?;
            if seen.contains(&name) {
                return Err(ConfigError::Field {
                    line: mline,
                    key: "deformation.maps".into(),
                    message: format!("map '{name}' listed twice"),
                });
            }
            seen.push(name);
            maps.push(m);
        }
        return Ok((kind, DeformationMap::Composite(maps)));
    }
    if e.has("deformation.maps") {
        return Err(e.field_error("deformation.maps", "only valid with deformation.kind = composite"));
    }
    let map = parse_map(&kind).ok_or_else(|| field(format!("unknown kind '{kind}', expected {KINDS}")))?;
    Ok((kind, map))
}

fn parse_params(e: &mut Entries, names: &[&'static str]) -> Result<Vec<f64>, ConfigError> {
    let defaults = |name: &str| match name {
        "alpha" | "beta" => 1.0,
        _ => 0.0,
    };
    let mut params = Vec::with_capacity(names.len());
    for name in names {
        let key = format!("deformation.{name}");
        let mut value: Option<f64> = e.parsed(&key, "number")?;
        if *name == "theta" {
            let deg: Option<f64> = e.parsed("deformation.theta_deg", "number")?;
            if let Some(d) = deg {
                if value.is_some() {
                    return Err(e.field_error("deformation.theta_deg", "give either theta or theta_deg"));
                }
                value = Some(d.to_radians());
            }
        }
        let v = value.unwrap_or_else(|| defaults(name));
        if !v.is_finite() {
            return Err(e.field_error(&key, "must be finite"));
        }
        params.push(v);
    }
    for key in ["alpha", "beta", "iota", "kappa", "theta", "theta_deg", "gamma"] {
        let full = format!("deformation.{key}");
        if e.has(&full) && !names.iter().any(|n| *n == key || (key == "theta_deg" && *n == "theta")) {
            return Err(e.field_error(&full, format!("not a parameter of this deformation ({})", names.join(", "))));
        }
    }
    Ok(params)
}

fn parse_axis(e: &mut Entries, prefix: &str, names: &[&'static str]) -> Result<SweepAxis, ConfigError> {
    let var_key = format!("{prefix}.variable");
    let (line, name) = e.take(&var_key).expect("caller checked presence");
    let variable = match name.as_str() {
        "N" => AxisVariable::Cols,
        "M" => AxisVariable::Rows,
        "N=M" => AxisVariable::Square,
        other => match names.iter().position(|n| *n == other) {
            Some(i) => AxisVariable::Param(i),
            None => {
                return Err(ConfigError::Field {
                    line,
                    key: var_key,
                    message: format!("unknown sweep variable '{other}' (expected N, M, N=M or one of {})", names.join(", ")),
                })
            }
        },
    };
    let from_key = format!("{prefix}.from");
    let to_key = format!("{prefix}.to");
    let steps_key = format!("{prefix}.steps");
    let endpoint_key = format!("{prefix}.endpoint");
    let values = match variable {
        AxisVariable::Cols | AxisVariable::Rows | AxisVariable::Square => {
            let from: usize = e.required(&from_key, "positive integer")?;
            let to: usize = e.required(&to_key, "positive integer")?;
            if from == 0 || to < from {
                return Err(e.field_error(&to_key, format!("need 1 <= from <= to, got {from}..{to}")));
            }
            let count = to - from + 1;
            if let Some(steps) = e.parsed::<usize>(&steps_key, "positive integer")? {
                if steps != count {
                    return Err(e.field_error(&steps_key, format!("integer sweep {from}..={to} has {count} points, got steps = {steps}")));
                }
            }
            if e.has(&endpoint_key) {
                return Err(e.field_error(&endpoint_key, "integer sweeps always include both ends"));
            }
            AxisValues::Integers((from..=to).collect())
        }
        AxisVariable::Param(i) => {
            let periodic = names[i] == "theta";
            let (def_from, def_to, def_steps) = if periodic { (Some(0.0), Some(2.0 * PI), Some(256)) } else { (None, None, None) };
            let from: f64 = match e.parsed(&from_key, "number")? {
                Some(v) => v,
                None => def_from.ok_or_else(|| ConfigError::Missing {
                    key: from_key.clone(),
                    message: "required number is missing".into(),
                })?,
            };
            let to: f64 = match e.parsed(&to_key, "number")? {
                Some(v) => v,
                None => def_to.ok_or_else(|| ConfigError::Missing {
                    key: to_key.clone(),
                    message: "required number is missing".into(),
                })?,
            };
            let steps: usize = match e.parsed(&steps_key, "positive integer")? {
                Some(v) => v,
                None => def_steps.ok_or_else(|| ConfigError::Missing {
                    key: steps_key.clone(),
                    message: "required positive integer is missing".into(),
                })?,
            };
            if steps == 0 {
                return Err(e.field_error(&steps_key, "must be at least 1"));
            }
            if !(from.is_finite() && to.is_finite()) {
                return Err(e.field_error(&to_key, "sweep bounds must be finite"));
            }
            let endpoint: bool = e.parsed(&endpoint_key, "true or false")?.unwrap_or(!periodic);
            AxisValues::Reals(linspace(from, to, steps, endpoint))
        }
    };
    let name = match variable {
        AxisVariable::Param(i) => names[i].to_string(),
        _ => name,
    };
    Ok(SweepAxis { variable, name, values })
}

/// `steps` points from `from` towards `to`; `to` itself is included only
/// when `endpoint` is set.
pub fn linspace(from: f64, to: f64, steps: usize, endpoint: bool) -> Vec<f64> {
    if steps == 1 {
        return vec![from];
    }
    let intervals = if endpoint { steps - 1 } else { steps } as f64;
    (0..steps).map(|k| from + (to - from) * (k as f64 / intervals)).collect()
}

fn parse_cost(text: &str, dim: usize) -> Result<CostMatrix, String> {
    let rows: Vec<&str> = text.split(';').map(str::trim).filter(|r| !r.is_empty()).collect();
    if rows.len() != dim {
        return Err(format!("expected {dim} rows separated by ';', got {}", rows.len()));
    }
    let mut values = Vec::with_capacity(dim * dim);
    for r in rows {
        let row: Result<Vec<f64>, _> = r.split(',').map(|t| t.trim().parse::<f64>()).collect();
        let row = row.map_err(|_| format!("row '{r}' is not a list of numbers"))?;
        if row.len() != dim {
            return Err(format!("expected {dim} entries per row, got {} in '{r}'", row.len()));
        }
        values.extend(row);
    }
    CostMatrix::new(RMatrix::from_row_slice(dim, dim, &values)).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "grid.N = 3\ngrid.M = 2\ngrid.d_x = 1\ngrid.d_y = 2\ngrid.sigma = 1\n";

    fn with(extra: &str) -> Result<ScenarioConfig, ConfigError> {
        ScenarioConfig::parse(&format!("{BASE}{extra}"))
    }

    #[test]
    fn minimal_stretch() {
        let c = with("deformation.kind = stretch  # comment\n").unwrap();
        assert_eq!(c.params, vec![1.0, 1.0]);
        assert_eq!(c.grid.rho, 0.0);
        assert_eq!(c.format, Format::Csv);
        assert!(c.sweep.is_empty() && c.cost.is_none() && c.repetitions == 1);
    }

    #[test]
    fn theta_sweep_defaults_to_full_turn() {
        let c = with("deformation.kind = rotation\nsweep.variable = theta\n").unwrap();
        let AxisValues::Reals(v) = &c.sweep[0].values else { panic!() };
        assert_eq!(v.len(), 256);
        assert_eq!(v[0], 0.0);
        assert!((v[255] - 2.0 * PI * 255.0 / 256.0).abs() < 1e-15);
    }

    #[test]
    fn degrees_are_converted() {
        let c = with("deformation.kind = rotation\ndeformation.theta_deg = 90\n").unwrap();
        assert!((c.params[0] - PI / 2.0).abs() < 1e-15);
        assert!(with("deformation.kind = rotation\ndeformation.theta_deg = 90\ndeformation.theta = 1\n").is_err());
    }

    #[test]
    fn two_axis_sweep() {
        let c = with("deformation.kind = stretch\nsweep.variable = N\nsweep.from = 1\nsweep.to = 4\nsweep.inner.variable = M\nsweep.inner.from = 1\nsweep.inner.to = 3\n").unwrap();
        assert_eq!(c.sweep.len(), 2);
        assert_eq!(c.sweep[0].values, AxisValues::Integers(vec![1, 2, 3, 4]));
        assert_eq!(c.sweep[1].values.len(), 3);
        assert!(with("deformation.kind = stretch\nsweep.variable = N=M\nsweep.from = 1\nsweep.to = 4\nsweep.inner.variable = M\nsweep.inner.from = 1\nsweep.inner.to = 3\n").is_err());
    }

    #[test]
    fn diagnostics_name_line_and_key() {
        let err = with("deformation.kind = twist\n").unwrap_err();
        assert!(matches!(err, ConfigError::Field { line: 6, ref key, .. } if key == "deformation.kind"), "{err}");
        let err = with("deformation.kind = stretch\ngrid.colour = red\n").unwrap_err();
        assert_eq!(err.to_string(), "line 7: grid.colour: unknown key");
        let err = ScenarioConfig::parse("grid.N = three\n").unwrap_err();
        assert_eq!(err.to_string(), "line 1: grid.N: expected positive integer, got 'three'");
        let err = with("deformation.kind = stretch\ngrid.N = 4\n").unwrap_err();
        assert!(err.to_string().contains("duplicate key"));
        let err = with("just words\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 6, .. }));
    }

    #[test]
    fn grid_invariants_are_enforced() {
        assert!(ScenarioConfig::parse("grid.N = 0\ngrid.M = 1\ngrid.d_x = 1\ngrid.d_y = 1\ngrid.sigma = 1\ndeformation.kind = stretch\n").is_err());
        assert!(with("grid.rho = 1\ndeformation.kind = stretch\n").is_err());
        assert!(with("deformation.kind = stretch\ngrid.photons = 1,2\n").is_err());
        assert!(with("deformation.kind = stretch\ngrid.photons = 1,2,1,2,1,2\n").is_ok());
    }

    #[test]
    fn composite_and_gamma() {
        let c = with("deformation.kind = composite\ndeformation.maps = stretch, rotation\ndeformation.theta = 0.5\n").unwrap();
        assert_eq!(c.param_names, vec!["alpha", "beta", "theta"]);
        assert_eq!(c.params, vec![1.0, 1.0, 0.5]);
        assert!(with("deformation.kind = composite\ndeformation.maps = stretch, stretch\n").is_err());
        assert!(with("deformation.kind = inhom_exp\n").is_err());
        assert!(with("deformation.kind = inhom_exp\ndeformation.gamma = 2\n").is_ok());
        assert!(with("deformation.kind = stretch\ndeformation.theta = 1\n").is_err());
    }

    #[test]
    fn cost_matrix_parsing() {
        let c = with("deformation.kind = stretch\ncost_matrix = 1,0;0,2\nrepetitions = 5\n").unwrap();
        assert_eq!(c.cost.unwrap().entries()[(1, 1)], 2.0);
        assert_eq!(c.repetitions, 5);
        assert!(with("deformation.kind = stretch\ncost_matrix = 1,0\n").is_err());
        assert!(with("deformation.kind = stretch\nrepetitions = 0\n").is_err());
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.0, 1.0, 3, true), vec![0.0, 0.5, 1.0]);
        assert_eq!(linspace(0.0, 1.0, 4, false), vec![0.0, 0.25, 0.5, 0.75]);
        assert_eq!(linspace(2.0, 5.0, 1, true), vec![2.0]);
    }
}
