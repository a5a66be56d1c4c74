//! `fields`, `observables` and `trace`.

use std::fs;
use std::io::Write;
use std::path::Path;

use knotfield::export::{write_curve_csv, write_curve_vtk, write_grid_csv, write_grid_vtk, write_spectral_csv};
use knotfield::fft::{FftGrid, GridFields};
use knotfield::observables::observables_report;
use knotfield::quadrature::k3_rule;
use knotfield::topology::{linking_number, trace_fieldline, winding_numbers, Curve, TorusFrame, TraceOptions};
use knotfield::vector::Vec3;
use knotfield::FieldKind;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, OutputKind, RunConfig};
use crate::error::CliError;
use crate::output::{indexed_path, write_file, write_json};

fn require_outputs(cfg: &RunConfig, kinds: &[OutputKind], command: &str) -> Result<(), CliError> {
    if cfg.outputs_of(kinds).is_empty() {
        let names: Vec<&str> = kinds.iter().map(|k| k.name()).collect();
        return Err(CliError::InvalidConfig(format!(
            "'{command}' needs at least one output of kind {}",
            names.join(" or ")
        )));
    }
    Ok(())
}

pub fn cmd_fields(cfg: &RunConfig) -> Result<(), CliError> {
    require_outputs(cfg, &[OutputKind::Fields], "fields")?;
    let grid = FftGrid::new(cfg.grid.points_per_axis, cfg.grid.half_width)
        .map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    let count = cfg.grid.times.len();
    for (i, &t) in cfg.grid.times.iter().enumerate() {
        let g = GridFields::sample(&grid, t, &cfg.indices, &cfg.scales)?;
        for o in cfg.outputs_of(&[OutputKind::Fields]) {
            let path = indexed_path(&o.path, i, count);
            write_file(&path, |mut w| match o.format {
                Format::Vtk => write_grid_vtk(&mut w, &g, &cfg.scales),
                _ => write_grid_csv(&mut w, &g, &cfg.scales),
            })?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

pub fn cmd_observables(cfg: &RunConfig) -> Result<(), CliError> {
    let kinds = [OutputKind::Observables, OutputKind::Spectral];
    require_outputs(cfg, &kinds, "observables")?;
    for o in cfg.outputs_of(&kinds) {
        match o.kind {
            OutputKind::Observables => {
                let report = observables_report(&cfg.indices, &cfg.scales, &cfg.quadrature)?;
                write_json(&o.path, &report)?;
            }
            _ => {
                let rule = k3_rule::<f64>(cfg.quadrature.radial_order, cfg.quadrature.angular_order, 2.0);
                let ks: Vec<Vec3<f64>> = rule.nodes.iter().map(|n| n.0).collect();
                write_file(&o.path, |mut w| write_spectral_csv(&mut w, &ks, &cfg.indices, &cfg.scales))?;
            }
        }
        println!("wrote {}", o.path.display());
    }
    Ok(())
}

/// Seeds as `X,Y,Z` rows; blank lines, `#` comments and a header row are skipped.
pub fn read_seeds(path: &Path) -> Result<Vec<Vec3<f64>>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut seeds = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if seeds.is_empty() && fields.iter().map(|f| f.to_ascii_lowercase()).eq(["x", "y", "z"]) {
            continue;
        }
        let parse_error = |message: String| CliError::Parse {
            path: path.to_path_buf(),
            line: no + 1,
            message,
        };
        if fields.len() != 3 {
            return Err(parse_error(format!("expected 3 comma-separated values, found {}", fields.len())));
        }
        let mut xyz = [0.0; 3];
        for (slot, f) in xyz.iter_mut().zip(&fields) {
            *slot = f
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_error(format!("'{f}' is not a finite number")))?;
        }
        seeds.push(Vec3::from_array(xyz));
    }
    Ok(seeds)
}

#[derive(Debug, Serialize)]
pub struct SeedSummary {
    pub seed: [f64; 3],
    pub closed: bool,
    pub arc_length: Option<f64>,
    pub points: usize,
    pub windings: Option<[i64; 2]>,
    pub winding_error: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct TraceSummary {
    pub field: &'static str,
    pub indices: knotfield::KnotIndices,
    pub seeds: Vec<SeedSummary>,
    /// Raw Gauss integrals; `null` on the diagonal and wherever a curve is missing or open.
    pub linking: Vec<Vec<Option<f64>>>,
}

/// Torus frame of the traced field: the `Z` axis for `B`, the `X` axis for `E`.
pub fn frame_for(field: FieldKind) -> TorusFrame<f64> {
    match field {
        FieldKind::Magnetic => TorusFrame::default(),
        FieldKind::Electric => TorusFrame::about(Vec3::unit_x(), 1.0),
    }
}

pub fn trace_options(cfg: &RunConfig) -> TraceOptions<f64> {
    TraceOptions {
        max_arc_length: cfg.trace.max_arc_length,
        closure_tol: cfg.trace.closure_tol,
        max_step: cfg.trace.max_step,
        ..TraceOptions::default()
    }
}

pub fn trace_all(cfg: &RunConfig, seeds: &[Vec3<f64>]) -> (Vec<Option<Curve<f64>>>, TraceSummary) {
    let opts = trace_options(cfg);
    let results: Vec<_> = seeds
        .par_iter()
        .map(|&seed| trace_fieldline(cfg.trace.field, seed, &cfg.indices, &cfg.scales, &opts))
        .collect();
    let frame = frame_for(cfg.trace.field);
    let mut summaries = Vec::new();
    let mut curves = Vec::new();
    for (seed, r) in seeds.iter().zip(results) {
        let mut s = SeedSummary {
            seed: seed.to_array(),
            closed: false,
            arc_length: None,
            points: 0,
            windings: None,
            winding_error: None,
            error: None,
        };
        match r {
            Ok(c) => {
                s.closed = c.closed;
                s.arc_length = Some(c.arc_length);
                s.points = c.points.len();
                match winding_numbers(&c, &frame) {
                    Ok(w) => s.windings = Some([w.toroidal, w.poloidal]),
                    Err(e) => s.winding_error = Some(e.to_string()),
                }
                curves.push(Some(c));
            }
            Err(e) => {
                s.error = Some(e.to_string());
                curves.push(None);
            }
        }
        summaries.push(s);
    }
    let resampled: Vec<Option<Curve<f64>>> = curves
        .iter()
        .map(|c| c.as_ref().filter(|c| c.closed).map(|c| c.resampled(cfg.trace.resample.max(16))))
        .collect();
    let n = seeds.len();
    let linking = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (i != j, &resampled[i], &resampled[j]) {
                    (true, Some(a), Some(b)) => linking_number(a, b).ok().map(|l| l.raw),
                    _ => None,
                })
                .collect()
        })
        .collect();
    let field = match cfg.trace.field {
        FieldKind::Electric => "E",
        FieldKind::Magnetic => "B",
    };
    (
        curves,
        TraceSummary {
            field,
            indices: cfg.indices,
            seeds: summaries,
            linking,
        },
    )
}

pub fn cmd_trace(cfg: &RunConfig, seeds_path: Option<&Path>) -> Result<(), CliError> {
    let kinds = [OutputKind::Curve, OutputKind::TraceSummary];
    require_outputs(cfg, &kinds, "trace")?;
    let path = seeds_path
        .or(cfg.trace.seeds.as_deref())
        .ok_or_else(|| CliError::Usage("trace needs --seeds <file> or trace.seeds in the config".into()))?;
    let seeds = read_seeds(path)?;
    let (curves, summary) = trace_all(cfg, &seeds);
    for o in cfg.outputs_of(&[OutputKind::Curve]) {
        for (i, c) in curves.iter().enumerate() {
            let Some(c) = c else { continue };
            let p = indexed_path(&o.path, i, curves.len());
            write_file(&p, |mut w| match o.format {
                Format::Vtk => write_curve_vtk(&mut w, c),
                _ => write_curve_csv(&mut w, c),
            })?;
            println!("wrote {}", p.display());
        }
    }
    for o in cfg.outputs_of(&[OutputKind::TraceSummary]) {
        write_json(&o.path, &summary)?;
        println!("wrote {}", o.path.display());
    }
    let mut out = std::io::stdout().lock();
    for (i, s) in summary.seeds.iter().enumerate() {
        let state = match (&s.error, s.closed) {
            (Some(e), _) => format!("error: {e}"),
            (None, true) => format!("closed, arc length {:.6}", s.arc_length.unwrap_or(f64::NAN)),
            (None, false) => "open".to_string(),
        };
        let _ = writeln!(out, "seed {i} {:?}: {state}; windings {:?}", s.seed, s.windings);
    }
    for row in &summary.linking {
        let cells: Vec<String> = row
            .iter()
            .map(|v| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into()))
            .collect();
        let _ = writeln!(out, "[{}]", cells.join(", "));
    }
    Ok(())
}
