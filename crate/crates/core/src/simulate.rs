//! Benchmark and user-defined time-varying AR/MA generators.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::AcfFunction;

/// Steps discarded before the first recorded observation.
pub const BURN_IN: usize = 200;

/// Grid used to check that a time-varying AR polynomial is stable everywhere.
const STABILITY_GRID: usize = 1_000;

/// A coefficient or scale function on rescaled time [0,1].
pub type CurveFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A data-generating process.
///
/// `TvAr2` is `x_i = a_1(i/n) x_{i−1} + a_2(i/n) x_{i−2} + σ(i/n) ε_i` with
/// `a = (δ_1, δ_2)` and `σ ≡ 1` when stationary, and
/// `a(t) = (δ_1 sin 2πt, δ_2 cos 2πt)`, `σ(t) = 0.4 + 0.4|sin 2πt|` otherwise.
/// `TvMa1` is `x_i = ε_i + θ(i/n) ε_{i−1}` with `θ ≡ δ` or `θ(t) = δ sin 2πt`.
#[derive(Clone)]
pub enum ModelSpec {
    TvAr2 {
        delta1: f64,
        delta2: f64,
        stationary: bool,
    },
    TvMa1 {
        delta: f64,
        stationary: bool,
    },
    CustomTvAr {
        coefficients: Vec<CurveFn>,
        sigma: CurveFn,
    },
    CustomTvMa {
        coefficients: Vec<CurveFn>,
        sigma: CurveFn,
    },
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::TvAr2 {
                delta1,
                delta2,
                stationary,
            } => f
                .debug_struct("TvAr2")
                .field("delta1", delta1)
                .field("delta2", delta2)
                .field("stationary", stationary)
                .finish(),
            ModelSpec::TvMa1 { delta, stationary } => f
                .debug_struct("TvMa1")
                .field("delta", delta)
                .field("stationary", stationary)
                .finish(),
            ModelSpec::CustomTvAr { coefficients, .. } => {
                write!(f, "CustomTvAr(order {})", coefficients.len())
            }
            ModelSpec::CustomTvMa { coefficients, .. } => {
                write!(f, "CustomTvMa(order {})", coefficients.len())
            }
        }
    }
}

impl ModelSpec {
    /// Stationary AR(2): `x_i = δ_1 x_{i−1} + δ_2 x_{i−2} + ε_i`.
    pub fn stationary_ar2(delta1: f64, delta2: f64) -> Self {
        ModelSpec::TvAr2 {
            delta1,
            delta2,
            stationary: true,
        }
    }

    /// Locally stationary AR(2) with sinusoidal coefficients and scale.
    pub fn tv_ar2(delta1: f64, delta2: f64) -> Self {
        ModelSpec::TvAr2 {
            delta1,
            delta2,
            stationary: false,
        }
    }

    pub fn stationary_ma1(delta: f64) -> Self {
        ModelSpec::TvMa1 {
            delta,
            stationary: true,
        }
    }

    pub fn tv_ma1(delta: f64) -> Self {
        ModelSpec::TvMa1 {
            delta,
            stationary: false,
        }
    }

    /// Frozen AR coefficients at rescaled time `t` (empty for MA models).
    pub fn ar_coefficients(&self, t: f64) -> Vec<f64> {
        match self {
            ModelSpec::TvAr2 {
                delta1,
                delta2,
                stationary,
            } => {
                if *stationary {
                    vec![*delta1, *delta2]
                } else {
                    let arg = 2.0 * PI * t;
                    vec![delta1 * arg.sin(), delta2 * arg.cos()]
                }
            }
            ModelSpec::CustomTvAr { coefficients, .. } => {
                coefficients.iter().map(|f| f(t)).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Frozen MA coefficients at rescaled time `t` (empty for AR models).
    pub fn ma_coefficients(&self, t: f64) -> Vec<f64> {
        match self {
            ModelSpec::TvMa1 { delta, stationary } => {
                if *stationary {
                    vec![*delta]
                } else {
                    vec![delta * (2.0 * PI * t).sin()]
                }
            }
            ModelSpec::CustomTvMa { coefficients, .. } => {
                coefficients.iter().map(|f| f(t)).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Innovation scale σ(t).
    pub fn sigma(&self, t: f64) -> f64 {
        match self {
            ModelSpec::TvAr2 { stationary, .. } => {
                if *stationary {
                    1.0
                } else {
                    0.4 + 0.4 * (2.0 * PI * t).sin().abs()
                }
            }
            ModelSpec::TvMa1 { .. } => 1.0,
            ModelSpec::CustomTvAr { sigma, .. } | ModelSpec::CustomTvMa { sigma, .. } => sigma(t),
        }
    }

    fn is_ar(&self) -> bool {
        matches!(self, ModelSpec::TvAr2 { .. } | ModelSpec::CustomTvAr { .. })
    }

    fn check_benchmark_range(&self) {
        let deltas: Vec<f64> = match self {
            ModelSpec::TvAr2 { delta1, delta2, .. } => vec![*delta1, *delta2],
            ModelSpec::TvMa1 { delta, .. } => vec![*delta],
            _ => return,
        };
        if deltas.iter().any(|d| !(0.0..=0.5).contains(d)) {
            log::warn!("model parameters {deltas:?} lie outside the benchmark range [0, 0.5]");
        }
    }

    /// Checks σ > 0 and, for AR specs, that the frozen polynomial is stable
    /// on a 1,000-point grid.
    pub fn validate(&self) -> Result<()> {
        self.check_benchmark_range();
        for i in 0..STABILITY_GRID {
            let t = i as f64 / (STABILITY_GRID - 1) as f64;
            let s = self.sigma(t);
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::invalid(format!(
                    "innovation scale σ({t}) = {s} is not positive"
                )));
            }
            if self.is_ar() {
                let a = self.ar_coefficients(t);
                if ar_root_modulus(&a)? >= 1.0 {
                    return Err(Error::ModelUnstable(format!(
                        "frozen AR polynomial at t = {t:.4} has a root on or inside the unit circle (a = {a:?})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Largest modulus among the roots of `z^p − a_1 z^{p−1} − … − a_p`, i.e.
/// the reciprocal of the smallest root of `1 − a_1 z − … − a_p z^p`.
/// Orders above two are unsupported.
pub fn ar_root_modulus(a: &[f64]) -> Result<f64> {
    match a.len() {
        0 => Ok(0.0),
        1 => Ok(a[0].abs()),
        2 => {
            let (a1, a2) = (a[0], a[1]);
            let disc = a1 * a1 + 4.0 * a2;
            if disc >= 0.0 {
                let s = disc.sqrt();
                Ok(((a1 + s) / 2.0).abs().max(((a1 - s) / 2.0).abs()))
            } else {
                // complex pair: |λ|² = −a_2
                Ok((-a2).sqrt())
            }
        }
        p => Err(Error::Unsupported(format!("AR order {p} > 2"))),
    }
}

/// Observed series `x_1..x_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    /// Seed of the generator that produced the series, if simulated.
    pub seed: Option<u64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid(
                "time series must contain at least one value",
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "value at position {} is not finite",
                i + 1
            )));
        }
        Ok(TimeSeries { values, seed: None })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Subtracts the global sample mean.
    pub fn demeaned(&self) -> TimeSeries {
        let mean = self.values.iter().sum::<f64>() / self.len() as f64;
        TimeSeries {
            values: self.values.iter().map(|v| v - mean).collect(),
            seed: self.seed,
        }
    }

    /// Multiplies every observation by `lambda`.
    pub fn scaled(&self, lambda: f64) -> TimeSeries {
        TimeSeries {
            values: self.values.iter().map(|v| v * lambda).collect(),
            seed: self.seed,
        }
    }

    /// The leading `len` observations.
    pub fn head(&self, len: usize) -> Result<TimeSeries> {
        if len == 0 || len > self.len() {
            return Err(Error::invalid(format!(
                "cannot take {len} leading values of a series of length {}",
                self.len()
            )));
        }
        Ok(TimeSeries {
            values: self.values[..len].to_vec(),
            seed: self.seed,
        })
    }
}

/// Draws `n` observations of `spec`; identical `(spec, n, seed)` give
/// bit-identical output.
pub fn simulate(spec: &ModelSpec, n: usize, seed: u64) -> Result<TimeSeries> {
    if n < 10 {
        return Err(Error::invalid(format!("simulate needs n ≥ 10, got {n}")));
    }
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = move || -> f64 { StandardNormal.sample(&mut rng) };
    let nf = n as f64;

    let values = if spec.is_ar() {
        let a0 = spec.ar_coefficients(0.0);
        let s0 = spec.sigma(0.0);
        // hist[k] = x_{i−1−k}
        let mut hist = vec![0.0; a0.len()];
        let push = |hist: &mut Vec<f64>, v: f64| {
            if !hist.is_empty() {
                hist.rotate_right(1);
                hist[0] = v;
            }
        };
        for _ in 0..BURN_IN {
            let v = ar_step(&a0, &hist) + s0 * draw();
            push(&mut hist, v);
        }
        let mut out = Vec::with_capacity(n);
        for i in 1..=n {
            let t = i as f64 / nf;
            let v = ar_step(&spec.ar_coefficients(t), &hist) + spec.sigma(t) * draw();
            push(&mut hist, v);
            out.push(v);
        }
        out
    } else {
        let q = spec.ma_coefficients(0.0).len();
        // ε_{1−q}, …, ε_0 followed by ε_1..ε_n
        let eps: Vec<f64> = (0..n + q).map(|_| draw()).collect();
        (1..=n)
            .map(|i| {
                let t = i as f64 / nf;
                let theta = spec.ma_coefficients(t);
                let cur = q + i - 1;
                let ma: f64 = theta
                    .iter()
                    .enumerate()
                    .map(|(k, th)| th * eps[cur - k - 1])
                    .sum();
                spec.sigma(t) * (eps[cur] + ma)
            })
            .collect()
    };
    let mut ts = TimeSeries::new(values)?;
    ts.seed = Some(seed);
    Ok(ts)
}

fn ar_step(a: &[f64], hist: &[f64]) -> f64 {
    a.iter().zip(hist).map(|(a, x)| a * x).sum()
}

/// Local autocovariance `γ(t, k)` of the stationary process obtained by
/// freezing the coefficients of `spec` at `t`.
pub fn model_acf(spec: &ModelSpec) -> Result<AcfFunction> {
    spec.validate()?;
    let spec = spec.clone();
    if spec.is_ar() {
        let p = spec.ar_coefficients(0.0).len();
        if p > 2 {
            return Err(Error::Unsupported(format!(
                "analytic ACF for AR order {p} > 2"
            )));
        }
        Ok(AcfFunction::new(move |t, k| {
            let a = spec.ar_coefficients(t);
            let a1 = a.first().copied().unwrap_or(0.0);
            let a2 = a.get(1).copied().unwrap_or(0.0);
            ar2_acf(a1, a2, spec.sigma(t), k)
        }))
    } else {
        Ok(AcfFunction::new(move |t, k| {
            let mut psi = vec![1.0];
            psi.extend(spec.ma_coefficients(t));
            let s2 = spec.sigma(t).powi(2);
            if k >= psi.len() {
                0.0
            } else {
                s2 * psi.iter().zip(&psi[k..]).map(|(a, b)| a * b).sum::<f64>()
            }
        }))
    }
}

/// Stationary AR(2) autocovariance at lag `k`: solves the moment system for
/// (γ_0, γ_1, γ_2) and extends by the AR recursion.
fn ar2_acf(a1: f64, a2: f64, sigma: f64, k: usize) -> f64 {
    use nalgebra::{Matrix3, Vector3};
    #[rustfmt::skip]
    let m = Matrix3::new(
        1.0, -a1,       -a2,
        -a1, 1.0 - a2,  0.0,
        -a2, -a1,       1.0,
    );
    let rhs = Vector3::new(sigma * sigma, 0.0, 0.0);
    let g = m
        .lu()
        .solve(&rhs)
        .expect("stable AR(2) moment system is nonsingular");
    if k <= 2 {
        return g[k];
    }
    let (mut g1, mut g2) = (g[2], g[1]);
    for _ in 3..=k {
        let next = a1 * g1 + a2 * g2;
        g2 = g1;
        g1 = next;
    }
    g1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lag_corr(x: &[f64], k: usize) -> f64 {
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        let c0: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
        let ck: f64 = (k..n).map(|i| (x[i] - mean) * (x[i - k] - mean)).sum();
        ck / c0
    }

    #[test]
    fn reproducible() {
        let spec = ModelSpec::tv_ar2(0.5, 0.3);
        let a = simulate(&spec, 300, 42).unwrap();
        let b = simulate(&spec, 300, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate(&spec, 300, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn different_seeds_uncorrelated() {
        let spec = ModelSpec::stationary_ar2(0.0, 0.0);
        let n = 2000;
        for seed in 0..5u64 {
            let a = simulate(&spec, n, seed).unwrap();
            let b = simulate(&spec, n, seed + 1000).unwrap();
            let r: f64 = a
                .values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| x * y)
                .sum::<f64>()
                / (a.values().iter().map(|x| x * x).sum::<f64>()
                    * b.values().iter().map(|y| y * y).sum::<f64>())
                .sqrt();
            assert!(r.abs() < 3.0 / (n as f64).sqrt(), "seed {seed}: r = {r}");
        }
    }

    #[test]
    fn rejects_short_or_unstable() {
        assert!(matches!(
            simulate(&ModelSpec::stationary_ar2(0.1, 0.1), 5, 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            simulate(&ModelSpec::stationary_ar2(0.7, 0.4), 100, 0),
            Err(Error::ModelUnstable(_))
        ));
    }

    #[test]
    fn white_noise_has_no_lag_one_correlation() {
        let x = simulate(&ModelSpec::tv_ar2(0.0, 0.0), 600, 7).unwrap();
        assert!(lag_corr(x.values(), 1).abs() < 0.15);
        let big = simulate(&ModelSpec::tv_ar2(0.0, 0.0), 60_000, 7).unwrap();
        assert!(lag_corr(big.values(), 1).abs() < 0.02);
    }

    #[test]
    fn long_run_sample_acf_matches_closed_forms() {
        let x = simulate(&ModelSpec::stationary_ar2(0.5, 0.3), 100_000, 11).unwrap();
        assert_abs_diff_eq!(lag_corr(x.values(), 1), 0.714286, epsilon = 0.02);
        let x = simulate(&ModelSpec::stationary_ma1(0.5), 100_000, 12).unwrap();
        assert_abs_diff_eq!(lag_corr(x.values(), 1), 0.4, epsilon = 0.02);
    }

    #[test]
    fn analytic_acf_examples() {
        let wn = model_acf(&ModelSpec::stationary_ar2(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(wn.gamma(0.3, 0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(wn.gamma(0.3, 1), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(wn.gamma(0.3, 4), 0.0, epsilon = 1e-14);

        let ma = model_acf(&ModelSpec::stationary_ma1(0.5)).unwrap();
        assert_abs_diff_eq!(ma.gamma(0.9, 0), 1.25, epsilon = 1e-14);
        assert_abs_diff_eq!(ma.gamma(0.9, 1), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(ma.gamma(0.9, 2), 0.0, epsilon = 1e-14);

        let tv = model_acf(&ModelSpec::tv_ar2(0.5, 0.3)).unwrap();
        for k in 0..6 {
            let expect = 0.64 * 0.5f64.powi(k as i32) / 0.75;
            assert_abs_diff_eq!(tv.gamma(0.25, k), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn ar2_acf_decays_geometrically() {
        for &(d1, d2) in &[(0.5, 0.3), (0.3, 0.3), (0.5, 0.0), (0.2, -0.4)] {
            let spec = ModelSpec::stationary_ar2(d1, d2);
            let acf = model_acf(&spec).unwrap();
            let r = ar_root_modulus(&[d1, d2]).unwrap() + 0.05;
            let g0 = acf.gamma(0.5, 0);
            for k in 0..40 {
                assert!(acf.gamma(0.5, k).abs() <= g0 * r.powi(k as i32) + 1e-14);
            }
            let closed = (1.0 - d2) / ((1.0 + d2) * ((1.0 - d2).powi(2) - d1 * d1));
            assert_abs_diff_eq!(g0, closed, epsilon = 1e-12);
        }
    }

    #[test]
    fn custom_specs() {
        let spec = ModelSpec::CustomTvAr {
            coefficients: vec![Arc::new(|t: f64| 0.4 * t)],
            sigma: Arc::new(|_| 2.0),
        };
        let acf = model_acf(&spec).unwrap();
        assert_abs_diff_eq!(acf.gamma(1.0, 0), 4.0 / (1.0 - 0.16), epsilon = 1e-12);
        assert_eq!(simulate(&spec, 50, 1).unwrap().len(), 50);

        let high = ModelSpec::CustomTvAr {
            coefficients: (0..3).map(|_| Arc::new(|_| 0.1) as CurveFn).collect(),
            sigma: Arc::new(|_| 1.0),
        };
        assert!(matches!(model_acf(&high), Err(Error::Unsupported(_))));

        let bad_sigma = ModelSpec::CustomTvMa {
            coefficients: vec![Arc::new(|_| 0.1)],
            sigma: Arc::new(|t| t - 0.5),
        };
        assert!(simulate(&bad_sigma, 50, 1).is_err());
    }
}
