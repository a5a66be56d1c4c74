//! Flat `section.key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use knotfield::params::{validate_indices, KnotIndices, PhysicalScales, UnitSystem};
use knotfield::quadrature::QuadratureSpec;
use knotfield::FieldKind;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutputKind {
    Fields,
    Observables,
    Spectral,
    Verify,
    Correlation,
    Curve,
    TraceSummary,
}

impl OutputKind {
    const ALL: [OutputKind; 7] = [
        OutputKind::Fields,
        OutputKind::Observables,
        OutputKind::Spectral,
        OutputKind::Verify,
        OutputKind::Correlation,
        OutputKind::Curve,
        OutputKind::TraceSummary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OutputKind::Fields => "fields",
            OutputKind::Observables => "observables",
            OutputKind::Spectral => "spectral",
            OutputKind::Verify => "verify",
            OutputKind::Correlation => "correlation",
            OutputKind::Curve => "curve",
            OutputKind::TraceSummary => "trace_summary",
        }
    }

    pub fn formats(self) -> &'static [Format] {
        match self {
            OutputKind::Fields | OutputKind::Curve => &[Format::Csv, Format::Vtk],
            OutputKind::Spectral | OutputKind::Correlation => &[Format::Csv],
            OutputKind::Observables | OutputKind::Verify | OutputKind::TraceSummary => &[Format::Json],
        }
    }
}

impl FromStr for OutputKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown output kind '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Vtk,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Vtk => "vtk",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "vtk" => Ok(Format::Vtk),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub kind: OutputKind,
    pub format: Format,
    /// May contain `{i}`, replaced by the time or seed index.
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub half_width: f64,
    pub points_per_axis: usize,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceConfig {
    pub field: FieldKind,
    pub seeds: Option<PathBuf>,
    pub max_arc_length: f64,
    pub closure_tol: f64,
    pub max_step: f64,
    pub resample: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub indices: KnotIndices,
    pub scales: PhysicalScales<f64>,
    pub grid: GridConfig,
    pub quadrature: QuadratureSpec<f64>,
    pub trace: TraceConfig,
    pub verify: VerifyConfig,
    pub seed: u64,
    pub outputs: BTreeMap<usize, OutputSpec>,
}

const DEFAULTS: &str = "\
grid.half_width = 4
grid.points_per_axis = 32
grid.times = 0
indices.l = 1
indices.m = 1
indices.n = 1
indices.s = 1
quadrature.abs_tol = 1e-300
quadrature.angular_order = 12
quadrature.radial_order = 16
quadrature.rel_tol = 1e-10
scales.a = 1
scales.l0 = 1
scales.units = natural
seed = 42
trace.closure_tol = 1e-4
trace.field = B
trace.max_arc_length = 1000
trace.max_step = 0.02
trace.resample = 4000
verify.points = 1000
";

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::InvalidConfig(format!("line {}: expected 'key = value'", no + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(CliError::InvalidConfig(format!("line {}: empty key", no + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::InvalidConfig(format!("line {}: duplicate key '{k}'", no + 1)));
        }
    }
    Ok(out)
}

/// Shortest round-trip text, in exponent form for very large or small magnitudes.
fn num(x: f64) -> String {
    if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn field_name(f: FieldKind) -> &'static str {
    match f {
        FieldKind::Electric => "E",
        FieldKind::Magnetic => "B",
    }
}

struct Pairs(BTreeMap<String, String>);

impl Pairs {
    fn take<T: FromStr>(&mut self, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.0.remove(key).ok_or_else(|| CliError::InvalidConfig(format!("missing key '{key}'")))?;
        v.parse().map_err(|e| CliError::InvalidConfig(format!("{key} = {v}: {e}")))
    }
}

impl RunConfig {
    /// Builds a config from file text plus `key=value` overrides applied on top.
    pub fn from_text(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut pairs = parse_pairs(DEFAULTS)?;
        pairs.extend(parse_pairs(text)?);
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got '{o}'")))?;
            pairs.insert(k.trim().to_string(), v.trim().to_string());
        }
        Self::from_pairs(pairs)
    }

    fn from_pairs(pairs: BTreeMap<String, String>) -> Result<Self, CliError> {
        let mut p = Pairs(pairs);
        let indices = validate_indices(p.take("indices.n")?, p.take("indices.m")?, p.take("indices.l")?, p.take("indices.s")?)
            .map_err(|e| CliError::InvalidConfig(e.to_string()))?;
        let units: UnitSystem = p.take("scales.units")?;
        let scales = PhysicalScales::new(p.take("scales.a")?, p.take("scales.l0")?, units)
            .map_err(|e| CliError::InvalidConfig(e.to_string()))?;
        let times: String = p.take("grid.times")?;
        let times = times
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| CliError::InvalidConfig(format!("grid.times: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let grid = GridConfig {
            half_width: p.take("grid.half_width")?,
            points_per_axis: p.take("grid.points_per_axis")?,
            times,
        };
        if grid.points_per_axis < 2 {
            return Err(CliError::InvalidConfig("grid.points_per_axis must be at least 2".into()));
        }
        if !(grid.half_width > 0.0 && grid.half_width.is_finite()) {
            return Err(CliError::InvalidConfig("grid.half_width must be positive".into()));
        }
        if grid.times.iter().any(|t| !t.is_finite()) {
            return Err(CliError::InvalidConfig("grid.times must be finite".into()));
        }
        let quadrature = QuadratureSpec {
            radial_order: p.take("quadrature.radial_order")?,
            angular_order: p.take("quadrature.angular_order")?,
            rel_tol: p.take("quadrature.rel_tol")?,
            abs_tol: p.take("quadrature.abs_tol")?,
            ..QuadratureSpec::default()
        };
        quadrature.validate().map_err(|e| CliError::InvalidConfig(e.to_string()))?;
        let seeds: Option<String> = p.0.remove("trace.seeds");
        let trace = TraceConfig {
            field: p.take("trace.field")?,
            seeds: seeds.map(PathBuf::from),
            max_arc_length: p.take("trace.max_arc_length")?,
            closure_tol: p.take("trace.closure_tol")?,
            max_step: p.take("trace.max_step")?,
            resample: p.take("trace.resample")?,
        };
        let verify = VerifyConfig { points: p.take("verify.points")? };
        let seed = p.take("seed")?;
        let outputs = take_outputs(&mut p)?;
        if let Some(k) = p.0.keys().next() {
            return Err(CliError::InvalidConfig(format!("unknown key '{k}'")));
        }
        Ok(Self {
            indices,
            scales,
            grid,
            quadrature,
            trace,
            verify,
            seed,
            outputs,
        })
    }

    /// Sorted `key = value` lines that parse back to the same config.
    pub fn serialize(&self) -> String {
        let mut m: BTreeMap<String, String> = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("indices.n", self.indices.n().to_string());
        put("indices.m", self.indices.m().to_string());
        put("indices.l", self.indices.l().to_string());
        put("indices.s", self.indices.s().to_string());
        put("scales.a", num(self.scales.a()));
        put("scales.l0", num(self.scales.l0()));
        put("scales.units", self.scales.units().to_string());
        put("grid.half_width", num(self.grid.half_width));
        put("grid.points_per_axis", self.grid.points_per_axis.to_string());
        put("grid.times", self.grid.times.iter().map(|&t| num(t)).collect::<Vec<_>>().join(","));
        put("quadrature.radial_order", self.quadrature.radial_order.to_string());
        put("quadrature.angular_order", self.quadrature.angular_order.to_string());
        put("quadrature.rel_tol", num(self.quadrature.rel_tol));
        put("quadrature.abs_tol", num(self.quadrature.abs_tol));
        put("trace.field", field_name(self.trace.field).to_string());
        if let Some(s) = &self.trace.seeds {
            put("trace.seeds", s.display().to_string());
        }
        put("trace.max_arc_length", num(self.trace.max_arc_length));
        put("trace.closure_tol", num(self.trace.closure_tol));
        put("trace.max_step", num(self.trace.max_step));
        put("trace.resample", self.trace.resample.to_string());
        put("verify.points", self.verify.points.to_string());
        put("seed", self.seed.to_string());
        for (i, o) in &self.outputs {
            put(&format!("output.{i}.kind"), o.kind.name().to_string());
            put(&format!("output.{i}.format"), o.format.name().to_string());
            put(&format!("output.{i}.path"), o.path.display().to_string());
        }
        let mut text = String::new();
        for (k, v) in m {
            let _ = writeln!(text, "{k} = {v}");
        }
        text
    }

    pub fn outputs_of(&self, kinds: &[OutputKind]) -> Vec<&OutputSpec> {
        self.outputs.values().filter(|o| kinds.contains(&o.kind)).collect()
    }
}

fn take_outputs(p: &mut Pairs) -> Result<BTreeMap<usize, OutputSpec>, CliError> {
    let mut ids: Vec<usize> = Vec::new();
    for key in p.0.keys() {
        if let Some(rest) = key.strip_prefix("output.") {
            let id = rest.split('.').next().unwrap_or("");
            let id: usize = id
                .parse()
                .map_err(|_| CliError::InvalidConfig(format!("output key '{key}' needs a numeric index")))?;
            ids.push(id);
        }
    }
    ids.sort_unstable();
    ids.dedup();
    let mut out = BTreeMap::new();
    for id in ids {
        let kind: OutputKind = p.take(&format!("output.{id}.kind"))?;
        let format: Format = p.take(&format!("output.{id}.format"))?;
        let path: String = p.take(&format!("output.{id}.path"))?;
        if !kind.formats().contains(&format) {
            return Err(CliError::InvalidConfig(format!(
                "output.{id}: format {} is not available for {}",
                format.name(),
                kind.name()
            )));
        }
        out.insert(id, OutputSpec { kind, format, path: PathBuf::from(path) });
    }
    Ok(out)
}
