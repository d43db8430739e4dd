//! Command implementations.

use std::fmt::Write as _;
use std::path::Path;

use lspacf::oracle::{pacf_oracle, uniform_grid};
use lspacf::simulate::{model_acf, simulate, ModelSpec};
use lspacf::tune::{self, TestOptions, TuningRecord};
use lspacf::{sieve, BasisFamily, BasisSet, TestKind, TestResult, TimeSeries};
use serde::{Deserialize, Serialize};

use crate::args::*;
use crate::bench::{run_scenario, BenchReport, Scenario};
use crate::error::{CliError, Result};
use crate::ingest::{ingest_csv, series_csv};
use crate::output::{emit, write_with_sidecar, RunConfig, Tuning};
use crate::svg::{Plot, Series};

/// Dispatches one parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Estimate(a) => cmd_estimate(&a),
        Command::Test(a) => cmd_test(&a),
        Command::Tune(a) => cmd_tune(&a),
        Command::PacfPlot(a) => cmd_pacf_plot(&a),
        Command::PvalueSweep(a) => cmd_pvalue_sweep(&a),
        Command::Bench(a) => cmd_bench(&a),
    }
}

pub fn model_spec(m: &ModelArgs) -> ModelSpec {
    match m.model {
        ModelKind::Ar2 => ModelSpec::stationary_ar2(m.delta1, m.delta2),
        ModelKind::Tvar2 => ModelSpec::tv_ar2(m.delta1, m.delta2),
        ModelKind::Ma1 => ModelSpec::stationary_ma1(m.delta1),
        ModelKind::Tvma1 => ModelSpec::tv_ma1(m.delta1),
    }
}

fn describe_model(cfg: &mut RunConfig, m: &ModelArgs) -> Result<()> {
    cfg.set("model", format!("{:?}", m.model).to_lowercase())?;
    cfg.set("delta1", m.delta1)?;
    cfg.set("delta2", m.delta2)
}

/// Reads the input series, demeaning on request.
pub fn load(input: &InputArgs) -> Result<TimeSeries> {
    let x = ingest_csv(&input.input, input.column.as_deref())?;
    Ok(if input.demean { x.demeaned() } else { x })
}

fn base_config(command: &str, input: &InputArgs) -> RunConfig {
    let mut cfg = RunConfig::new(command);
    cfg.input = Some(input.input.clone());
    cfg.demean = input.demean;
    cfg
}

/// Basis size for an order-`lag` estimate: fixed, or cross-validated over the
/// estimation grid.
pub fn estimation_c(x: &TimeSeries, lag: usize, family: BasisFamily, c: Tuning) -> Result<usize> {
    match c {
        Tuning::Fixed(c) => Ok(c),
        Tuning::Auto => Ok(tune::select_c(x, &tune::default_c_grid(x.len()), lag, family)?.c),
    }
}

fn check_grid(points: usize) -> Result<()> {
    if points < 2 {
        return Err(CliError::Usage("grid-points must be at least 2".into()));
    }
    Ok(())
}

fn check_lags(lags: usize) -> Result<()> {
    if lags == 0 {
        return Err(
            lspacf::Error::InvalidArgument("number of lags must be at least 1".into()).into(),
        );
    }
    Ok(())
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let x = simulate(&model_spec(&a.model), a.n, a.seed)?;
    let mut cfg = RunConfig::new("simulate");
    cfg.seed = Some(a.seed);
    cfg.outputs = a.output.iter().cloned().collect();
    describe_model(&mut cfg, &a.model)?;
    cfg.set("n", a.n)?;
    emit(a.output.as_deref(), &series_csv(x.values()), &cfg)
}

/// One point of a curve family: `value` of curve `index` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub t: f64,
    pub index: usize,
    pub value: f64,
}

/// CSV with header `t,<index>,<value>`.
pub fn curves_csv(rows: &[CurveRow], index: &str, value: &str) -> String {
    let mut out = format!("t,{index},{value}\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.t, r.index, r.value);
    }
    out
}

pub fn cmd_oracle(a: &OracleArgs) -> Result<()> {
    check_lags(a.lags)?;
    check_grid(a.grid_points)?;
    let acf = model_acf(&model_spec(&a.model))?;
    let grid = uniform_grid(a.grid_points);
    let mut rows = Vec::new();
    for lag in 1..=a.lags {
        let curve = pacf_oracle(&acf, lag, &grid)?;
        rows.extend(curve.t.iter().zip(&curve.rho).map(|(&t, &value)| CurveRow {
            t,
            index: lag,
            value,
        }));
    }
    let mut cfg = RunConfig::new("oracle");
    cfg.lag = Some(a.lags);
    cfg.grid_points = Some(a.grid_points);
    cfg.outputs = a.output.iter().cloned().collect();
    describe_model(&mut cfg, &a.model)?;
    emit(a.output.as_deref(), &curves_csv(&rows, "lag", "rho"), &cfg)
}

pub fn cmd_estimate(a: &EstimateArgs) -> Result<()> {
    check_lags(a.lag)?;
    check_grid(a.grid_points)?;
    let x = load(&a.input)?;
    let c = estimation_c(&x, a.lag, a.basis, a.c)?;
    let fit = sieve::fit(&x, a.lag, &BasisSet::new(a.basis, c)?)?;
    let grid = uniform_grid(a.grid_points);
    let mut rows = Vec::new();
    for k in 1..=a.lag {
        for &t in &grid {
            rows.push(CurveRow {
                t,
                index: k,
                value: fit.eval_coeff(k, t)?,
            });
        }
    }
    let mut cfg = base_config("estimate", &a.input);
    cfg.basis = Some(a.basis);
    cfg.c_request = Some(a.c);
    cfg.c = vec![c];
    cfg.lag = Some(a.lag);
    cfg.grid_points = Some(a.grid_points);
    cfg.outputs = a.output.iter().cloned().collect();
    emit(
        a.output.as_deref(),
        &curves_csv(&rows, "k", "coefficient"),
        &cfg,
    )
}

/// Estimated PACF curves `ρ̂_j`, `j = 1..lags`, each with its own basis size.
pub fn pacf_rows(
    x: &TimeSeries,
    lags: usize,
    family: BasisFamily,
    c: Tuning,
    grid_points: usize,
) -> Result<(Vec<CurveRow>, Vec<usize>)> {
    check_lags(lags)?;
    check_grid(grid_points)?;
    let grid = uniform_grid(grid_points);
    let mut rows = Vec::with_capacity(lags * grid_points);
    let mut sizes = Vec::with_capacity(lags);
    for lag in 1..=lags {
        let c = estimation_c(x, lag, family, c)?;
        let fit = sieve::fit(x, lag, &BasisSet::new(family, c)?)?;
        let rho = fit.pacf_curve(&grid)?;
        rows.extend(grid.iter().zip(rho).map(|(&t, value)| CurveRow {
            t,
            index: lag,
            value,
        }));
        sizes.push(c);
    }
    Ok((rows, sizes))
}

/// Plot of the PACF rows: one polyline per lag.
pub fn pacf_plot(rows: &[CurveRow]) -> Plot {
    let mut series: Vec<Series> = Vec::new();
    for r in rows {
        if series
            .last()
            .map(|s| s.label != format!("lag {}", r.index))
            .unwrap_or(true)
        {
            series.push(Series {
                label: format!("lag {}", r.index),
                points: Vec::new(),
            });
        }
        series
            .last_mut()
            .expect("just pushed")
            .points
            .push((r.t, r.value));
    }
    Plot {
        title: "Estimated local PACF".into(),
        x_label: "t".into(),
        y_label: "rho_j(t)".into(),
        series,
        ..Plot::default()
    }
}

fn write_svg(path: &Path, plot: &Plot, cfg: &RunConfig) -> Result<()> {
    write_with_sidecar(path, &plot.render(), cfg)
}

pub fn cmd_pacf_plot(a: &PacfPlotArgs) -> Result<()> {
    let x = load(&a.input)?;
    let (rows, sizes) = pacf_rows(&x, a.lags, a.basis, a.c, a.grid_points)?;
    let mut cfg = base_config("pacf-plot", &a.input);
    cfg.basis = Some(a.basis);
    cfg.c_request = Some(a.c);
    cfg.c = sizes;
    cfg.lag = Some(a.lags);
    cfg.grid_points = Some(a.grid_points);
    cfg.outputs = a.output.iter().chain(&a.svg).cloned().collect();
    emit(
        a.output.as_deref(),
        &curves_csv(&rows, "lag", "rho_hat"),
        &cfg,
    )?;
    if let Some(svg) = &a.svg {
        write_svg(svg, &pacf_plot(&rows), &cfg)?;
    }
    Ok(())
}

/// Options for the tuned tests from the command line.
pub fn test_options(t: &TuningArgs, max_h: usize) -> TestOptions {
    let mut opts = TestOptions::new(t.basis, t.seed)
        .with_replicates(t.replicates)
        .with_alpha(t.alpha);
    opts.c = t.c.fixed();
    opts.m = t.m.fixed();
    opts.max_h = max_h;
    opts
}

fn tuning_config(cfg: &mut RunConfig, t: &TuningArgs) {
    cfg.basis = Some(t.basis);
    cfg.c_request = Some(t.c);
    cfg.m_request = Some(t.m);
    cfg.alpha = Some(t.alpha);
    cfg.replicates = Some(t.replicates);
    cfg.seed = Some(t.seed);
}

/// Machine-readable test outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub kind: String,
    pub lag_or_h: usize,
    #[serde(rename = "T")]
    pub statistic: f64,
    #[serde(rename = "nT")]
    pub n_statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    #[serde(rename = "B")]
    pub replicates: usize,
    pub c: usize,
    pub m: usize,
    pub basis: String,
    pub seed: u64,
    pub n: usize,
    pub tuning: TuningRecord,
    pub config: RunConfig,
}

impl TestReport {
    pub fn new(res: &TestResult, tuning: TuningRecord, config: RunConfig) -> Self {
        TestReport {
            kind: res.kind.name().to_string(),
            lag_or_h: res.lag,
            statistic: res.statistic,
            n_statistic: res.n_statistic,
            p_value: res.p_value,
            reject: res.reject,
            alpha: res.alpha,
            replicates: res.replicates,
            c: res.c,
            m: res.m,
            basis: res.basis.name().to_string(),
            seed: res.seed,
            n: res.n,
            tuning,
            config,
        }
    }
}

/// Runs the configured test and returns its report.
pub fn test_report(a: &TestArgs) -> Result<TestReport> {
    let x = load(&a.input)?;
    let opts = test_options(&a.tuning, a.max_h);
    let (res, record) = tune::auto_test(&x, a.kind, a.lag, &opts)?;
    let mut cfg = base_config("test", &a.input);
    tuning_config(&mut cfg, &a.tuning);
    cfg.c = vec![record.c];
    cfg.m = vec![record.m];
    match a.kind {
        TestKind::WhiteNoise => cfg.h = Some(res.lag),
        _ => cfg.lag = Some(res.lag),
    }
    cfg.set("kind", a.kind.name())?;
    cfg.outputs = a.output.iter().cloned().collect();
    Ok(TestReport::new(&res, record, cfg))
}

pub fn cmd_test(a: &TestArgs) -> Result<()> {
    let report = test_report(a)?;
    eprintln!(
        "{} test, lag/h = {}: nT = {:.4}, p = {:.4}, {} at alpha = {}",
        report.kind,
        report.lag_or_h,
        report.n_statistic,
        report.p_value,
        if report.reject { "reject" } else { "accept" },
        report.alpha
    );
    let json = serde_json::to_string_pretty(&report)? + "\n";
    emit(a.output.as_deref(), &json, &report.config)
}

/// Tuning record plus the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub tuning: TuningRecord,
    pub config: RunConfig,
}

pub fn cmd_tune(a: &TuneArgs) -> Result<()> {
    let x = load(&a.input)?;
    let opts = test_options(&a.tuning, a.max_h);
    let (h, order) = match (a.kind, a.lag) {
        (TestKind::WhiteNoise, None) => {
            let rep = tune::select_h(&x, a.max_h, &opts)?;
            (rep.selected, Some(rep))
        }
        (TestKind::SingleLag, None) => {
            return Err(CliError::Usage("the single-lag test needs --lag".into()))
        }
        (_, lag) => (lag.unwrap_or(1), None),
    };
    let (_, mut record) = tune::resolve(&x, h, &opts)?;
    let mut cfg = base_config("tune", &a.input);
    tuning_config(&mut cfg, &a.tuning);
    cfg.c = vec![record.c];
    cfg.m = vec![record.m];
    if a.kind == TestKind::WhiteNoise {
        record.h = Some(h);
        record.order = order;
        cfg.h = Some(h);
    } else {
        cfg.lag = Some(h);
    }
    cfg.set("kind", a.kind.name())?;
    cfg.outputs = a.output.iter().cloned().collect();
    let report = TuneReport {
        tuning: record,
        config: cfg,
    };
    let json = serde_json::to_string_pretty(&report)? + "\n";
    emit(a.output.as_deref(), &json, &report.config)
}

/// One lag of a p-value sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvalueRow {
    pub lag: usize,
    pub p_value: f64,
    pub reject: bool,
    pub c: usize,
    pub m: usize,
}

/// Single-lag tests at `j = 1..lags`, each tuned separately.
pub fn pvalue_rows(x: &TimeSeries, lags: usize, opts: &TestOptions) -> Result<Vec<PvalueRow>> {
    check_lags(lags)?;
    (1..=lags)
        .map(|lag| {
            let (res, rec) = tune::tuned_lag_test(x, TestKind::SingleLag, lag, opts)?;
            Ok(PvalueRow {
                lag,
                p_value: res.p_value,
                reject: res.reject,
                c: rec.c,
                m: rec.m,
            })
        })
        .collect()
}

pub fn pvalue_csv(rows: &[PvalueRow]) -> String {
    let mut out = String::from("lag,p_value,reject,c,m\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.lag, r.p_value, r.reject, r.c, r.m);
    }
    out
}

/// Plot of the sweep: p-value markers per lag with the level as reference line.
pub fn pvalue_plot(rows: &[PvalueRow], alpha: f64) -> Plot {
    Plot {
        title: "Single-lag p-values".into(),
        x_label: "lag".into(),
        y_label: "p-value".into(),
        series: vec![Series {
            label: "p-value".into(),
            points: rows.iter().map(|r| (r.lag as f64, r.p_value)).collect(),
        }],
        reference: Some((alpha, format!("alpha = {alpha}"))),
        markers: true,
    }
}

pub fn cmd_pvalue_sweep(a: &PvalueSweepArgs) -> Result<()> {
    let x = load(&a.input)?;
    let opts = test_options(&a.tuning, tune::DEFAULT_MAX_H);
    let rows = pvalue_rows(&x, a.lags, &opts)?;
    let mut cfg = base_config("pvalue-sweep", &a.input);
    tuning_config(&mut cfg, &a.tuning);
    cfg.c = rows.iter().map(|r| r.c).collect();
    cfg.m = rows.iter().map(|r| r.m).collect();
    cfg.lag = Some(a.lags);
    cfg.outputs = a.output.iter().chain(&a.svg).cloned().collect();
    emit(a.output.as_deref(), &pvalue_csv(&rows), &cfg)?;
    if let Some(svg) = &a.svg {
        write_svg(svg, &pvalue_plot(&rows, a.tuning.alpha), &cfg)?;
    }
    Ok(())
}

/// Benchmark report plus the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOutput {
    #[serde(flatten)]
    pub report: BenchReport,
    pub config: RunConfig,
}

pub fn cmd_bench(a: &BenchArgs) -> Result<()> {
    if a.list {
        let mut out = String::new();
        for s in Scenario::all() {
            let _ = writeln!(out, "{s}");
        }
        print!("{out}");
        return Ok(());
    }
    let id = a
        .scenario
        .as_deref()
        .ok_or_else(|| CliError::Usage("--scenario is required".into()))?;
    let seed = a
        .seed
        .ok_or_else(|| CliError::Usage("--seed is required for bench".into()))?;
    let scenario: Scenario = id.parse()?;
    let report = run_scenario(&scenario, a.replicates, a.bootstrap, seed)?;
    for cell in &report.cells {
        eprintln!(
            "{} {}: {} = {:.4} ({} replicates)",
            report.scenario, cell.label, cell.metric, cell.value, cell.completed
        );
    }
    let mut cfg = RunConfig::new("bench");
    cfg.seed = Some(seed);
    cfg.replicates = Some(a.bootstrap);
    cfg.set("scenario", scenario.to_string())?;
    cfg.set("monte_carlo_replicates", a.replicates)?;
    cfg.outputs = a.output.iter().cloned().collect();
    let out = BenchOutput {
        report,
        config: cfg,
    };
    let json = serde_json::to_string_pretty(&out)? + "\n";
    emit(a.output.as_deref(), &json, &out.config)
}
