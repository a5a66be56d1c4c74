//! Verification suites run by `knotfield verify`.

use clap::ValueEnum;
use knotfield::export::{write_correlation_csv, CorrelationRow};
use knotfield::fields::{default_step, field_at, initial_fields, maxwell_residual};
use knotfield::observables::{derived, observables_report};
use knotfield::params::Point4;
use knotfield::quadrature::{integrate_k3, QuadratureSpec};
use knotfield::quantumstate::{
    e_plus, first_order_coherence, quadrature_uncertainties, sample_photon_counts, second_order_coherence,
    CorrelationPoint, ModeSet,
};
use knotfield::spectral::{polarization_basis, w_norm_sq, w_vector, WaveVec};
use knotfield::vector::Vec3;
use knotfield::FieldKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::commands::trace_all;
use crate::config::{OutputKind, RunConfig};
use crate::error::CliError;
use crate::output::{write_file, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Identities,
    Maxwell,
    Topology,
    Quantum,
    All,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub indices: knotfield::KnotIndices,
    pub seed: u64,
    pub checks: Vec<Check>,
}

/// Passes when `value <= threshold`.
fn at_most(suite: &'static str, name: &'static str, value: f64, threshold: f64, detail: String) -> Check {
    Check {
        suite,
        name,
        value,
        threshold,
        passed: value <= threshold,
        detail,
    }
}

fn rng(cfg: &RunConfig, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(stream))
}

fn random_vec(r: &mut ChaCha8Rng, half: f64) -> Vec3<f64> {
    Vec3::new(r.random_range(-half..half), r.random_range(-half..half), r.random_range(-half..half))
}

fn identities(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    const S: &str = "identities";
    let (k, s) = (&cfg.indices, &cfg.scales);
    let mut r = rng(cfg, 1);
    let n = cfg.verify.points.max(1);
    let mut reduction = 0.0f64;
    for _ in 0..n {
        let p = Point4::at(random_vec(&mut r, 4.0), 0.0);
        let a = field_at(&p, k, s)?;
        let b = initial_fields(&p, k, s)?;
        let scale = (a.e.norm() / s.c()).max(a.b.norm()).max(f64::MIN_POSITIVE);
        reduction = reduction.max(((a.e - b.e).norm() / s.c()).max((a.b - b.b).norm()) / scale);
    }
    let mut transverse = 0.0f64;
    let mut completeness = 0.0f64;
    for _ in 0..n {
        let kv = WaveVec::new(random_vec(&mut r, 10.0));
        let w = w_vector(&kv, k);
        let norm = w_norm_sq(&kv, k);
        if norm == 0.0 {
            continue;
        }
        transverse = transverse.max(w.dot_real(kv.k).norm() / (kv.kmag * norm.sqrt()));
        let b = polarization_basis(&kv)?;
        let sum = b.eplus.hdot(w).norm_sqr() + b.eminus.hdot(w).norm_sqr();
        completeness = completeness.max((sum - norm).abs() / norm);
    }
    let oracle_spec = QuadratureSpec { rel_tol: 1e-13, abs_tol: 0.0, ..cfg.quadrature };
    let moment = integrate_k3(
        |kv: Vec3<f64>| {
            let wv = WaveVec::new(kv);
            wv.kmag * (-2.0 * wv.kmag).exp() * w_norm_sq(&wv, k)
        },
        &oracle_spec,
    )?
    .value;
    let want: f64 = derived::weighted_w_moment(k);
    let report = observables_report(k, s, &cfg.quadrature)?;
    let worst = [&report.energy, &report.photon_number, &report.spin_helicity, &report.magnetic_helicity]
        .iter()
        .map(|e| e.rel_deviation)
        .fold(0.0, f64::max);
    Ok(vec![
        at_most(S, "t0_reduction", reduction, 1e-12, format!("{n} points")),
        at_most(S, "transversality", transverse, 1e-13, format!("{n} wave vectors")),
        at_most(S, "polarization_completeness", completeness, 1e-12, format!("{n} wave vectors")),
        at_most(
            S,
            "w_moment_oracle",
            (moment - want).abs() / want,
            1e-10,
            format!("quadrature {moment:.15}, closed form {want:.15}"),
        ),
        at_most(S, "observables_vs_closed_forms", worst, 1e-8, "largest of H, N, Λ, Hm".into()),
    ])
}

fn maxwell(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let mut r = rng(cfg, 2);
    let n = cfg.verify.points.max(1);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let p = Point4::at(random_vec(&mut r, 3.0), r.random_range(-2.0..2.0));
        worst = worst.max(maxwell_residual(&p, &cfg.indices, &cfg.scales, default_step(&p))?.relative());
    }
    Ok(vec![at_most("maxwell", "residual", worst, 1e-6, format!("{n} spacetime points"))])
}

fn topology(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    const S: &str = "topology";
    let mut cfg = cfg.clone();
    cfg.trace.field = FieldKind::Magnetic;
    let seeds = [Vec3::new(0.5, 0.0, 0.0), Vec3::new(1.3, 0.0, 0.2)];
    let (_, summary) = trace_all(&cfg, &seeds);
    let (n, m) = (cfg.indices.n() as i64, cfg.indices.m() as i64);
    let closed = summary.seeds.iter().filter(|s| s.closed).count();
    let mut checks = vec![Check {
        suite: S,
        name: "closure",
        value: closed as f64,
        threshold: seeds.len() as f64,
        passed: closed == seeds.len(),
        detail: format!("{closed} of {} magnetic lines closed", seeds.len()),
    }];
    let windings = summary.seeds[0].windings;
    let mut pair = windings.map(|w| [w[0].abs(), w[1].abs()]).unwrap_or([0, 0]);
    pair.sort_unstable();
    let mut want = [n, m];
    want.sort_unstable();
    checks.push(Check {
        suite: S,
        name: "windings",
        value: f64::from(u8::from(pair != want)),
        threshold: 0.0,
        passed: pair == want,
        detail: format!("(toroidal, poloidal) = {windings:?}, expected the pair {{{n}, {m}}}"),
    });
    let raw = summary.linking[0][1].unwrap_or(f64::NAN);
    let target = (n * m) as f64;
    let dev = (raw - target).abs();
    checks.push(Check {
        suite: S,
        name: "linking",
        value: raw,
        threshold: 0.05,
        passed: dev <= 0.05,
        detail: format!("linking = {raw:.6}, expected {target}"),
    });
    Ok(checks)
}

fn quantum(cfg: &RunConfig) -> Result<(Vec<Check>, Vec<CorrelationRow<f64>>), CliError> {
    const S: &str = "quantum";
    let (k, s) = (&cfg.indices, &cfg.scales);
    let mut r = rng(cfg, 4);
    let count = cfg.verify.points.clamp(2, 40);
    let points: Vec<CorrelationPoint<f64>> =
        (0..count).map(|_| CorrelationPoint::new(random_vec(&mut r, 2.0), r.random_range(0.0..1.5))).collect();
    let fields = points.iter().map(|p| e_plus(p, k, s, &cfg.quadrature)).collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for i in 0..count {
        for j in i..count {
            rows.push(CorrelationRow {
                x: points[i],
                y: points[j],
                g1: first_order_coherence(fields[i], fields[j])?,
                g2: second_order_coherence(fields[i], fields[j])?,
            });
        }
    }
    let g2_dev = rows.iter().map(|row| (row.g2 - 1.0).abs()).fold(0.0, f64::max);
    let g1_max = rows.iter().map(|row| row.g1.norm()).fold(0.0, f64::max);
    let g1_min = rows.iter().map(|row| row.g1.norm()).fold(f64::INFINITY, f64::min);
    let modes = ModeSet::from_quadrature(k, s, &cfg.quadrature)?;
    let mut var_dev = 0.0f64;
    for i in 0..modes.len() {
        let q = quadrature_uncertainties(&modes, i)?;
        var_dev = var_dev.max((q.var_x - 0.5).abs()).max((q.var_p - 0.5).abs());
    }
    let bright = modes.brightest().unwrap_or(0);
    let mean = modes.mode(bright)?.amplitude.norm_sqr();
    const DRAWS: usize = 10_000;
    let counts = sample_photon_counts(&modes, bright, DRAWS, cfg.seed)?;
    let sample_mean = counts.iter().sum::<u64>() as f64 / DRAWS as f64;
    let sigma = (mean / DRAWS as f64).sqrt();
    Ok((
        vec![
            at_most(S, "g2_equals_one", g2_dev, 1e-12, format!("{} pairs", rows.len())),
            at_most(S, "g1_bounded", g1_max, 1.0 + 1e-12, format!("max |g1| over {} pairs", rows.len())),
            at_most(S, "g1_below_one", g1_min, 1.0 - 1e-3, "min |g1| over the sampled pairs".into()),
            at_most(S, "quadrature_variances", var_dev, 0.0, format!("{} modes", modes.len())),
            at_most(
                S,
                "poisson_sample_mean",
                (sample_mean - mean).abs() / sigma.max(f64::MIN_POSITIVE),
                5.0,
                format!("mode {bright}: mean {mean:.6e}, sample mean {sample_mean:.6e} from {DRAWS} draws, seed {}", cfg.seed),
            ),
        ],
        rows,
    ))
}

pub fn cmd_verify(cfg: &RunConfig, suite: Suite) -> Result<(), CliError> {
    let wants = |s: Suite| suite == Suite::All || suite == s;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    if wants(Suite::Identities) {
        checks.extend(identities(cfg)?);
    }
    if wants(Suite::Maxwell) {
        checks.extend(maxwell(cfg)?);
    }
    if wants(Suite::Topology) {
        checks.extend(topology(cfg)?);
    }
    if wants(Suite::Quantum) {
        let (c, r) = quantum(cfg)?;
        checks.extend(c);
        rows = r;
    }
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag} {}/{}: value {:.6e}, threshold {:.6e}; {}", c.suite, c.name, c.value, c.threshold, c.detail);
    }
    let report = VerifyReport {
        indices: cfg.indices,
        seed: cfg.seed,
        checks,
    };
    for o in cfg.outputs_of(&[OutputKind::Verify]) {
        write_json(&o.path, &report)?;
    }
    if !rows.is_empty() {
        for o in cfg.outputs_of(&[OutputKind::Correlation]) {
            write_file(&o.path, |mut w| write_correlation_csv(&mut w, &rows))?;
        }
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}
