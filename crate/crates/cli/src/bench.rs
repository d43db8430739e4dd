//! Monte Carlo size, MISE and power experiments.
//!
//! Scenario ids:
//! * `size/<model>/<basis>/s<setting>[/<alpha>]`: Type-I rejection rate of
//!   setting 1–5 (`alpha` defaults to 0.05);
//! * `mise/<model>/<basis>/j<lag>`: MISE of the estimated `ρ_j` at n = 1024;
//! * `power/<model>/<basis>`: white-noise test power over `δ_1 ∈ {0, 0.1, …, 0.5}`.
//!
//! `<model>` is `ar2` (stationary AR(2)) or `tvar2` (time-varying AR(2)).

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use lspacf::basis::BasisFamily;
use lspacf::oracle::pacf_oracle;
use lspacf::quadrature::RIEMANN_CELLS;
use lspacf::simulate::{model_acf, simulate, ModelSpec};
use lspacf::tune::{self, TestOptions};
use lspacf::{sieve, BasisSet, TestKind};
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Sample size of the Type-I and power scenarios.
pub const TEST_N: usize = 600;
/// Sample size of the MISE scenarios.
pub const MISE_N: usize = 1024;
/// Default bootstrap replicates per test in benchmarks.
pub const BENCH_BOOTSTRAP: usize = 500;
/// Decay exponent behind the white-noise order `h = ⌈n^{1/(2(τ−1))}⌉`.
pub const WHITE_NOISE_TAU: f64 = 3.0;
/// Alternatives of the power sweep.
pub const POWER_DELTAS: [f64; 6] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];

/// Stationary (`ar2`) or time-varying (`tvar2`) AR(2) benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BenchModel {
    Stationary,
    TimeVarying,
}

impl BenchModel {
    pub fn spec(self, delta1: f64, delta2: f64) -> ModelSpec {
        match self {
            BenchModel::Stationary => ModelSpec::stationary_ar2(delta1, delta2),
            BenchModel::TimeVarying => ModelSpec::tv_ar2(delta1, delta2),
        }
    }

    fn id(self) -> &'static str {
        match self {
            BenchModel::Stationary => "ar2",
            BenchModel::TimeVarying => "tvar2",
        }
    }
}

/// A reproducible Monte Carlo experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Scenario {
    Size {
        model: BenchModel,
        basis: BasisFamily,
        setting: u8,
        alpha: f64,
    },
    Mise {
        model: BenchModel,
        basis: BasisFamily,
        lag: usize,
    },
    Power {
        model: BenchModel,
        basis: BasisFamily,
    },
}

/// What a size setting tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setting {
    pub delta: (f64, f64),
    pub kind: TestKind,
    /// Tested lag, or white-noise order.
    pub lag: usize,
}

/// Settings 1–4 test a null lag of AR(2) data; setting 5 tests white noise.
pub fn setting(index: u8, n: usize) -> Result<Setting> {
    let lag_test = |d1, d2, lag| Setting {
        delta: (d1, d2),
        kind: TestKind::SingleLag,
        lag,
    };
    Ok(match index {
        1 => lag_test(0.5, 0.0, 2),
        2 => lag_test(0.5, 0.0, 4),
        3 => lag_test(0.3, 0.3, 3),
        4 => lag_test(0.3, 0.3, 5),
        5 => Setting {
            delta: (0.0, 0.0),
            kind: TestKind::WhiteNoise,
            lag: tune::lag_cutoff(n, WHITE_NOISE_TAU)?,
        },
        other => return Err(CliError::UnknownScenario(format!("setting s{other}"))),
    })
}

impl Scenario {
    /// Every named scenario (size cells at α = 0.05 and 0.1).
    pub fn all() -> Vec<Scenario> {
        let mut out = Vec::new();
        let models = [BenchModel::Stationary, BenchModel::TimeVarying];
        let bases = [BasisFamily::Fourier, BasisFamily::Legendre];
        for model in models {
            for basis in bases {
                for alpha in [0.05, 0.1] {
                    for setting in 1..=5 {
                        out.push(Scenario::Size {
                            model,
                            basis,
                            setting,
                            alpha,
                        });
                    }
                }
                for lag in 1..=4 {
                    out.push(Scenario::Mise { model, basis, lag });
                }
                out.push(Scenario::Power { model, basis });
            }
        }
        out
    }

    pub fn sample_size(&self) -> usize {
        match self {
            Scenario::Mise { .. } => MISE_N,
            _ => TEST_N,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::Size {
                model,
                basis,
                setting,
                alpha,
            } => {
                write!(f, "size/{}/{basis}/s{setting}/{alpha}", model.id())
            }
            Scenario::Mise { model, basis, lag } => write!(f, "mise/{}/{basis}/j{lag}", model.id()),
            Scenario::Power { model, basis } => write!(f, "power/{}/{basis}", model.id()),
        }
    }
}

impl FromStr for Scenario {
    type Err = CliError;

    fn from_str(id: &str) -> Result<Self> {
        let unknown = || CliError::UnknownScenario(id.to_string());
        let parts: Vec<&str> = id.split('/').collect();
        if parts.len() < 3 {
            return Err(unknown());
        }
        let model = match parts[1] {
            "ar2" => BenchModel::Stationary,
            "tvar2" => BenchModel::TimeVarying,
            _ => return Err(unknown()),
        };
        let basis: BasisFamily = parts[2].parse().map_err(|_| unknown())?;
        let number =
            |s: &str, prefix: char| s.strip_prefix(prefix).and_then(|v| v.parse::<usize>().ok());
        let scenario = match (parts[0].to_ascii_lowercase().as_str(), parts.len()) {
            ("size", 4 | 5) => {
                let setting = number(parts[3], 's')
                    .and_then(|v| u8::try_from(v).ok())
                    .ok_or_else(unknown)?;
                let alpha = match parts.get(4) {
                    Some(a) => a.parse::<f64>().map_err(|_| unknown())?,
                    None => 0.05,
                };
                if !(1..=5).contains(&setting) || !(alpha > 0.0 && alpha < 1.0) {
                    return Err(unknown());
                }
                Scenario::Size {
                    model,
                    basis,
                    setting,
                    alpha,
                }
            }
            ("mise", 4) => {
                let lag = number(parts[3], 'j').ok_or_else(unknown)?;
                if lag == 0 {
                    return Err(unknown());
                }
                Scenario::Mise { model, basis, lag }
            }
            ("power", 3) => Scenario::Power { model, basis },
            _ => return Err(unknown()),
        };
        Ok(scenario)
    }
}

/// One reported number of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCell {
    pub label: String,
    /// `rejection_rate` or `mise`.
    pub metric: String,
    pub value: f64,
    /// Replicates that produced a value.
    pub completed: usize,
    /// Replicates lost to numerical failures (excluded from `value`).
    pub failed: usize,
}

/// Outcome of [`run_scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub scenario: String,
    pub n: usize,
    pub replicates: usize,
    pub bootstrap_replicates: usize,
    pub seed: u64,
    pub cells: Vec<BenchCell>,
    pub wall_clock_secs: f64,
}

/// Seed of replicate `r` for purpose `stream` (0 data, 1 bootstrap).
pub fn replicate_seed(seed: u64, r: usize, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((r as u64) << 1) | stream);
    rng.next_u64()
}

/// Runs a scenario with `replicates` Monte Carlo draws and `bootstrap`
/// multiplier replicates per test. Deterministic given `seed`.
pub fn run_scenario(
    scenario: &Scenario,
    replicates: usize,
    bootstrap: usize,
    seed: u64,
) -> Result<BenchReport> {
    if replicates == 0 {
        return Err(CliError::Usage("replicates must be positive".into()));
    }
    let start = Instant::now();
    let n = scenario.sample_size();
    let cells = match *scenario {
        Scenario::Size {
            model,
            basis,
            setting: s,
            alpha,
        } => {
            let st = setting(s, n)?;
            let spec = model.spec(st.delta.0, st.delta.1);
            let label = format!("{} lag/h={}", st.kind, st.lag);
            vec![rejection_cell(
                label, &spec, st.kind, st.lag, basis, alpha, n, replicates, bootstrap, seed,
            )?]
        }
        Scenario::Mise { model, basis, lag } => {
            vec![mise_cell(
                &model.spec(0.5, 0.0),
                basis,
                lag,
                n,
                replicates,
                seed,
            )?]
        }
        Scenario::Power { model, basis } => {
            let h = tune::lag_cutoff(n, WHITE_NOISE_TAU)?;
            POWER_DELTAS
                .iter()
                .map(|&d| {
                    rejection_cell(
                        format!("delta1={d}"),
                        &model.spec(d, 0.0),
                        TestKind::WhiteNoise,
                        h,
                        basis,
                        0.05,
                        n,
                        replicates,
                        bootstrap,
                        seed,
                    )
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(BenchReport {
        scenario: scenario.to_string(),
        n,
        replicates,
        bootstrap_replicates: bootstrap,
        seed,
        cells,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

/// Share of replicates rejecting at level `alpha`. Replicate `r` uses the same
/// data seed in every cell, so sweeps over a model parameter share their noise.
#[allow(clippy::too_many_arguments)]
pub fn rejection_cell(
    label: String,
    spec: &ModelSpec,
    kind: TestKind,
    lag: usize,
    basis: BasisFamily,
    alpha: f64,
    n: usize,
    replicates: usize,
    bootstrap: usize,
    seed: u64,
) -> Result<BenchCell> {
    let outcomes: Vec<Option<bool>> = (0..replicates)
        .into_par_iter()
        .map(|r| -> Result<Option<bool>> {
            let x = simulate(spec, n, replicate_seed(seed, r, 0))?;
            let opts = TestOptions::new(basis, replicate_seed(seed, r, 1))
                .with_replicates(bootstrap)
                .with_alpha(alpha);
            match tune::auto_test(&x, kind, Some(lag), &opts) {
                Ok((res, _)) => Ok(Some(res.reject)),
                Err(e) if e.is_numerical() => {
                    log::warn!("replicate {r}: {e}");
                    Ok(None)
                }
                Err(e) => Err(e.into()),
            }
        })
        .collect::<Result<_>>()?;
    Ok(summarize(
        label,
        "rejection_rate",
        outcomes.into_iter().map(|o| o.map(f64::from)),
    ))
}

/// Mean integrated squared error of `ρ̂_lag` with `c` chosen by cross-validation.
pub fn mise_cell(
    spec: &ModelSpec,
    basis: BasisFamily,
    lag: usize,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<BenchCell> {
    let grid: Vec<f64> = (0..RIEMANN_CELLS)
        .map(|i| (i as f64 + 0.5) / RIEMANN_CELLS as f64)
        .collect();
    let truth = pacf_oracle(&model_acf(spec)?, lag, &grid)?.rho;
    let candidates = tune::default_c_grid(n);
    let errors: Vec<Option<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| -> Result<Option<f64>> {
            let x = simulate(spec, n, replicate_seed(seed, r, 0))?;
            let est = tune::select_c(&x, &candidates, lag, basis)
                .and_then(|cv| BasisSet::new(basis, cv.c))
                .and_then(|b| sieve::fit(&x, lag, &b))
                .and_then(|f| f.pacf_curve(&grid));
            match est {
                Ok(rho) => {
                    let ise = rho
                        .iter()
                        .zip(&truth)
                        .map(|(a, b)| (a - b).powi(2))
                        .sum::<f64>()
                        / grid.len() as f64;
                    Ok(Some(ise))
                }
                Err(e) if e.is_numerical() => {
                    log::warn!("replicate {r}: {e}");
                    Ok(None)
                }
                Err(e) => Err(e.into()),
            }
        })
        .collect::<Result<_>>()?;
    Ok(summarize(
        format!("MISE({lag})"),
        "mise",
        errors.into_iter(),
    ))
}

fn summarize(label: String, metric: &str, values: impl Iterator<Item = Option<f64>>) -> BenchCell {
    let (mut sum, mut completed, mut failed) = (0.0, 0, 0);
    for v in values {
        match v {
            Some(v) => {
                sum += v;
                completed += 1;
            }
            None => failed += 1,
        }
    }
    BenchCell {
        label,
        metric: metric.to_string(),
        value: if completed > 0 {
            sum / completed as f64
        } else {
            f64::NAN
        },
        completed,
        failed,
    }
}
