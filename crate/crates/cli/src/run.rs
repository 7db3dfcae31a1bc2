//! The subcommands.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use spinbath_core::analysis::{self, DecoherenceReport, Recurrence, ReportOptions};
use spinbath_core::closed_form::{
    case2_cross_term, case2_expectation, case3_expectation, expectation_with, r1, r1_abs2,
    r1_abs2_ln, r1_log, sample_curve, Convention, Curve, LOG_MODE_MIN_N,
};
use spinbath_core::ensemble::{ensemble_average, sample_model, EnsembleStats, PhaseMode};
use spinbath_core::model::{case1_spec, case2_spec, case3_spec};
use spinbath_core::oracle::{expectation_oracle, MAX_ORACLE_QUBITS};
use spinbath_core::{ModelConfig, ObservableSpec, C64};

use crate::config::{resolve, CaseKind, FileConfig, RunArgs, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{num, opt, write_curve, write_ensemble, write_text, Summary};

pub const VERIFY_TOLERANCE: f64 = 1e-10;
/// Offset added to every closed-form value by the `--corrupt` hook.
pub const CORRUPTION: f64 = 1e-6;

pub const CURVE_FILE: &str = "curve.csv";
pub const ENSEMBLE_FILE: &str = "ensemble.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const VERIFY_FILE: &str = "verify.txt";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const ENVELOPE_FILE: &str = "envelope.txt";
pub const RECURRENCE_FILE: &str = "recurrence.txt";

pub fn build_model(rc: &RunConfig) -> CliResult<ModelConfig> {
    Ok(match &rc.env {
        Some(env) => ModelConfig::new(rc.system, env.clone())?,
        None => sample_model(&rc.policy, rc.n, rc.system)?,
    })
}

fn uses_log_mode(cfg: &ModelConfig) -> bool {
    cfg.n() > LOG_MODE_MIN_N
}

/// The case's signal and its squared modulus on the grid.
#[derive(Debug, Clone)]
pub struct CaseCurve {
    pub curve: Curve,
    /// `|r₁|²` from its direct product form in case 1, `|v|²` otherwise.
    pub abs2: Vec<f64>,
    pub log_mode: bool,
}

/// Case 1: `r₁(t)`. Case 2: the complex cross term, whose real part is the
/// oscillating part of the expectation value. Case 3 and general: the
/// expectation value itself.
pub fn case_curve(rc: &RunConfig, cfg: &ModelConfig) -> CliResult<CaseCurve> {
    let grid = &rc.grid;
    let log_mode = rc.case == CaseKind::Case1 && uses_log_mode(cfg);
    let curve = match rc.case {
        CaseKind::Case1 if log_mode => sample_curve(grid, |t| Ok(r1_log(cfg, t).to_complex()))?,
        CaseKind::Case1 => sample_curve(grid, |t| Ok(r1(cfg, t)))?,
        CaseKind::Case2 => {
            let j = rc.j.unwrap_or(1);
            let blk = rc.particle_blocks[0];
            sample_curve(grid, |t| case2_cross_term(cfg, j, &blk, t, rc.convention))?
        }
        CaseKind::Case3 => sample_curve(grid, |t| {
            case3_expectation(cfg, &rc.particle_blocks, t, rc.convention).map(|v| C64::new(v, 0.0))
        })?,
        CaseKind::General => {
            let spec = rc.general_spec();
            sample_curve(grid, |t| {
                expectation_with(cfg, &spec, t, rc.convention).map(|v| C64::new(v, 0.0))
            })?
        }
    };
    let abs2 = match rc.case {
        CaseKind::Case1 if log_mode => grid.times().map(|t| r1_abs2_ln(cfg, t).exp()).collect(),
        CaseKind::Case1 => grid.times().map(|t| r1_abs2(cfg, t)).collect(),
        _ => curve.abs2(),
    };
    Ok(CaseCurve {
        curve,
        abs2,
        log_mode,
    })
}

pub fn report_options(rc: &RunConfig) -> ReportOptions {
    ReportOptions {
        threshold: rc.threshold,
        persistence: rc.persistence,
        ..ReportOptions::default()
    }
}

/// Report on `|v(t)|² / |v(t_start)|²`; `None` when `v(t_start)` vanishes.
pub fn metric_report(rc: &RunConfig, abs2: &[f64]) -> CliResult<Option<DecoherenceReport>> {
    let v0 = abs2[0];
    if !(v0 > 0.0 && v0.is_finite()) {
        return Ok(None);
    }
    let normalized: Vec<f64> = abs2.iter().map(|a| a / v0).collect();
    let metric = Curve::from_real(rc.grid, &normalized)?;
    Ok(Some(analysis::report(&metric, &report_options(rc))?))
}

fn phase_name(mode: PhaseMode) -> &'static str {
    match mode {
        PhaseMode::RealAmplitudes => "real",
        PhaseMode::RandomPhases => "random",
    }
}

fn convention_name(c: Convention) -> &'static str {
    match c {
        Convention::OracleConsistent => "oracle-consistent",
        Convention::StrictPaper => "strict-paper",
    }
}

fn describe_run(rc: &RunConfig, s: &mut Summary) {
    s.put("case", rc.case)
        .put("n", rc.n)
        .put("p", rc.p.map_or_else(|| "-".to_owned(), |p| p.to_string()))
        .put("j", rc.j.map_or_else(|| "-".to_owned(), |j| j.to_string()));
    if rc.env.is_some() {
        s.put("bath", "explicit");
    } else {
        s.put("bath", "sampled")
            .put("seed", rc.policy.seed)
            .put("g_min", format!("{:e}", rc.policy.g_min))
            .put("g_max", format!("{:e}", rc.policy.g_max))
            .put("phase_mode", phase_name(rc.policy.phase_mode));
    }
    s.put(
        "system_a",
        format!("{:e} {:e}", rc.system.a().re, rc.system.a().im),
    )
    .put(
        "system_b",
        format!("{:e} {:e}", rc.system.b().re, rc.system.b().im),
    )
    .put("convention", convention_name(rc.convention))
    .put("t_start", format!("{:e}", rc.grid.t_start()))
    .put("t_end", format!("{:e}", rc.grid.t_end()))
    .put("steps", rc.grid.steps());
}

fn describe_report(rc: &RunConfig, report: Option<&DecoherenceReport>, s: &mut Summary) {
    s.put("metric", "normalized_abs2")
        .put("threshold", format!("{:e}", rc.threshold))
        .put("persistence", rc.persistence);
    match report {
        Some(r) => {
            s.put("decoherence_time", opt(r.decoherence_time))
                .put("fluctuation_rms", format!("{:e}", r.fluctuation_rms))
                .put("fluctuation_max", format!("{:e}", r.fluctuation_max))
                .put("recurrence_time", opt(r.recurrence_time));
        }
        None => {
            s.put("decoherence_time", "none")
                .put("report", "unavailable: signal vanishes at t_start");
        }
    }
}

/// Outcome of one simulation.
#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub files: Vec<PathBuf>,
    pub report: Option<DecoherenceReport>,
}

pub fn run_simulate(rc: &RunConfig) -> CliResult<SimulateOutcome> {
    simulate_into(rc, &rc.out)
}

/// Writes the curve (or ensemble table) and summary of `rc` into `dir`.
pub fn simulate_into(rc: &RunConfig, dir: &Path) -> CliResult<SimulateOutcome> {
    let mut summary = Summary::new();
    describe_run(rc, &mut summary);
    let mut files = Vec::new();
    let report = if rc.samples > 1 {
        let stats = ensemble(rc)?;
        files.push(write_ensemble(&dir.join(ENSEMBLE_FILE), &stats)?);
        summary.put("samples", rc.samples);
        let report = metric_report(rc, &stats.mean)?;
        describe_report(rc, report.as_ref(), &mut summary);
        report
    } else {
        let cfg = build_model(rc)?;
        let cc = case_curve(rc, &cfg)?;
        files.push(write_curve(
            &dir.join(CURVE_FILE),
            &rc.grid,
            cc.curve.values(),
            &cc.abs2,
        )?);
        summary.put("log_mode", cc.log_mode);
        let report = metric_report(rc, &cc.abs2)?;
        describe_report(rc, report.as_ref(), &mut summary);
        report
    };
    files.push(write_text(&dir.join(SUMMARY_FILE), &summary.render())?);
    Ok(SimulateOutcome { files, report })
}

/// Ensemble mean and variance of `|r₁(t)|²`.
pub fn ensemble(rc: &RunConfig) -> CliResult<EnsembleStats> {
    let log_mode = rc.n > LOG_MODE_MIN_N;
    Ok(ensemble_average(
        &rc.policy,
        rc.n,
        rc.samples,
        rc.system,
        &rc.grid,
        |cfg, t| {
            Ok(if log_mode {
                r1_abs2_ln(cfg, t).exp()
            } else {
                r1_abs2(cfg, t)
            })
        },
    )?)
}

/// Oracle comparison result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOutcome {
    pub max_deviation: f64,
    pub worst_time: f64,
    pub passed: bool,
}

fn verify_spec(rc: &RunConfig, cfg: &ModelConfig) -> CliResult<ObservableSpec> {
    Ok(match rc.case {
        CaseKind::Case1 => case1_spec(cfg, rc.system_block),
        CaseKind::Case2 => case2_spec(cfg, rc.j.unwrap_or(1), rc.particle_blocks[0])?,
        CaseKind::Case3 => case3_spec(cfg, &rc.particle_blocks)?,
        CaseKind::General => rc.general_spec(),
    })
}

fn closed_value(
    rc: &RunConfig,
    cfg: &ModelConfig,
    spec: &ObservableSpec,
    t: f64,
) -> CliResult<f64> {
    Ok(match rc.case {
        CaseKind::Case1 | CaseKind::General => expectation_with(cfg, spec, t, rc.convention)?,
        CaseKind::Case2 => case2_expectation(
            cfg,
            rc.j.unwrap_or(1),
            &rc.particle_blocks[0],
            t,
            rc.convention,
        )?,
        CaseKind::Case3 => case3_expectation(cfg, &rc.particle_blocks, t, rc.convention)?,
    })
}

/// Compares the closed form of the configured case against the state-vector
/// oracle at every grid point. Writes `verify.txt` in all cases and fails
/// with [`CliError::Verification`] above [`VERIFY_TOLERANCE`].
pub fn run_verify(rc: &RunConfig, corrupt: bool) -> CliResult<VerifyOutcome> {
    if rc.n > MAX_ORACLE_QUBITS {
        return Err(CliError::field(
            "n",
            format!(
                "verify builds the full state vector and supports N <= {MAX_ORACLE_QUBITS} \
                 (got {}); rerun with --n {MAX_ORACLE_QUBITS} or smaller",
                rc.n
            ),
        ));
    }
    let cfg = build_model(rc)?;
    let spec = verify_spec(rc, &cfg)?;
    let mut max_deviation = 0.0_f64;
    let mut worst_time = rc.grid.t_start();
    for t in rc.grid.times() {
        let mut closed = closed_value(rc, &cfg, &spec, t)?;
        if corrupt {
            closed += CORRUPTION;
        }
        let d = (closed - expectation_oracle(&cfg, &spec, t)?).abs();
        // NaN compares false, so route it through the failure branch.
        if d > max_deviation || d.is_nan() {
            max_deviation = if d.is_nan() { f64::INFINITY } else { d };
            worst_time = t;
        }
    }
    let passed = max_deviation <= VERIFY_TOLERANCE;
    let mut s = Summary::new();
    describe_run(rc, &mut s);
    s.put("max_abs_deviation", format!("{max_deviation:e}"))
        .put("worst_time", format!("{worst_time:e}"))
        .put("tolerance", format!("{VERIFY_TOLERANCE:e}"))
        .put("status", if passed { "pass" } else { "fail" });
    write_text(&rc.out.join(VERIFY_FILE), &s.render())?;
    if !passed {
        return Err(CliError::Verification {
            deviation: max_deviation,
            tolerance: VERIFY_TOLERANCE,
        });
    }
    Ok(VerifyOutcome {
        max_deviation,
        worst_time,
        passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    N,
    P,
    Samples,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            Self::N => "n",
            Self::P => "p",
            Self::Samples => "samples",
        }
    }
}

/// One row of the aggregate sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: usize,
    pub decoherence_time: Option<f64>,
    pub fluctuation_rms: Option<f64>,
}

/// Runs [`simulate_into`] once per value into `<out>/<param>_<value>/` and
/// writes the aggregate `sweep.csv`.
pub fn run_sweep(
    args: &RunArgs,
    file: &FileConfig,
    param: SweepParam,
    values: &[usize],
) -> CliResult<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(CliError::field("values", "at least one value is required"));
    }
    let base = resolve(args, file)?;
    match (param, base.case) {
        (SweepParam::P, c) if c != CaseKind::Case3 => {
            return Err(CliError::field("param", "sweeping p requires --case 3"))
        }
        (SweepParam::Samples, c) if c != CaseKind::Case1 => {
            return Err(CliError::field(
                "param",
                "sweeping samples requires --case 1",
            ))
        }
        _ => {}
    }
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let mut a = args.clone();
        match param {
            SweepParam::N => a.n = Some(v),
            SweepParam::P => a.p = Some(v),
            SweepParam::Samples => a.samples = Some(v),
        }
        let mut rc = resolve(&a, file)?;
        rc.out = base.out.clone();
        let dir = base.out.join(format!("{}_{v}", param.name()));
        let outcome = simulate_into(&rc, &dir)?;
        rows.push(SweepRow {
            value: v,
            decoherence_time: outcome.report.and_then(|r| r.decoherence_time),
            fluctuation_rms: outcome.report.map(|r| r.fluctuation_rms),
        });
    }
    let mut table = format!("{},decoherence_time,fluctuation_rms\n", param.name());
    for r in &rows {
        let cell = |x: Option<f64>| x.map_or_else(|| "none".to_owned(), num);
        table.push_str(&format!(
            "{},{},{}\n",
            r.value,
            cell(r.decoherence_time),
            cell(r.fluctuation_rms)
        ));
    }
    write_text(&base.out.join(SWEEP_FILE), &table)?;
    Ok(rows)
}

/// Envelope of `|r₁|²` and the range a grid scan actually reaches.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeOutcome {
    pub bounds: analysis::EnvelopeBounds,
    pub scan_min: f64,
    pub scan_max: f64,
}

pub fn run_envelope(rc: &RunConfig) -> CliResult<EnvelopeOutcome> {
    let cfg = build_model(rc)?;
    let bounds = analysis::envelope_bounds(&cfg);
    let (mut scan_min, mut scan_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in rc.grid.times() {
        let v = if uses_log_mode(&cfg) {
            r1_abs2_ln(&cfg, t).exp()
        } else {
            r1_abs2(&cfg, t)
        };
        scan_min = scan_min.min(v);
        scan_max = scan_max.max(v);
    }
    let mut s = Summary::new();
    describe_run(rc, &mut s);
    s.put("min_product", format!("{:e}", bounds.min_product))
        .put("max_product", format!("{:e}", bounds.max_product))
        .put(
            "lower_bound",
            if bounds.simultaneous {
                "attainable"
            } else {
                "factor-wise, not simultaneous"
            },
        )
        .put("scan_min", format!("{scan_min:e}"))
        .put("scan_max", format!("{scan_max:e}"));
    for (i, f) in bounds.factor_min.iter().enumerate() {
        s.put(&format!("factor_min_{}", i + 1), format!("{f:e}"));
    }
    write_text(&rc.out.join(ENVELOPE_FILE), &s.render())?;
    Ok(EnvelopeOutcome {
        bounds,
        scan_min,
        scan_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecurrenceMetric {
    /// `Re r₁(t)`; recurs with the full period of the couplings.
    Re,
    /// `|r₁(t)|²`; recurs already at half periods.
    Abs2,
}

pub fn run_recurrence(
    rc: &RunConfig,
    metric: RecurrenceMetric,
    threshold: f64,
) -> CliResult<Option<Recurrence>> {
    let cfg = build_model(rc)?;
    let log_mode = uses_log_mode(&cfg);
    let found = analysis::recurrence_search(
        &cfg,
        |c, t| match (metric, log_mode) {
            (RecurrenceMetric::Re, false) => r1(c, t).re,
            (RecurrenceMetric::Re, true) => r1_log(c, t).to_complex().re,
            (RecurrenceMetric::Abs2, false) => r1_abs2(c, t),
            (RecurrenceMetric::Abs2, true) => r1_abs2_ln(c, t).exp(),
        },
        threshold,
        &rc.grid,
    )?;
    let mut s = Summary::new();
    describe_run(rc, &mut s);
    s.put(
        "metric",
        match metric {
            RecurrenceMetric::Re => "re_r1",
            RecurrenceMetric::Abs2 => "abs2_r1",
        },
    )
    .put("recurrence_threshold", format!("{threshold:e}"))
    .put("grid_spacing", format!("{:e}", rc.grid.spacing()))
    .put("onset", opt(found.map(|r| r.onset)))
    .put("peak", opt(found.map(|r| r.peak)))
    .put("peak_value", opt(found.map(|r| r.peak_value)));
    write_text(&rc.out.join(RECURRENCE_FILE), &s.render())?;
    Ok(found)
}
