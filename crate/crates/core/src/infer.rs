//! Test statistics on fitted PACFs and their multiplier-bootstrap calibration.
//!
//! Three hypotheses are supported:
//!
//! * [`TestKind::SingleLag`]: `ρ_j(t) ≡ 0`, statistic `T1 = ∫ ρ̂_j²`.
//! * [`TestKind::WhiteNoise`]: `ρ_k(t) ≡ 0` for every `k ≥ 1`, statistic
//!   `T2 = Σ_{k≤h} ∫ φ̂_{h,k}²` from a single order-`h` fit.
//! * [`TestKind::Constancy`]: `ρ_1(t)` constant in time, statistic
//!   `T1* = ∫ (ρ̂_1 − ∫ρ̂_1)²`.
//!
//! `n·T` is compared against `B` bootstrap draws of a quadratic form in
//! `Φ̂`, a Gaussian-weighted sum of block sums of the score vectors
//! `ŵ_i = (x_{i−1}, …, x_{i−ℓ}) ε̂_i` tensored with the basis.
//!
//! Each replicate draws its multipliers from its own ChaCha stream
//! `(seed, replicate)`, so results do not depend on the worker count.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisFamily, BasisSet};
use crate::error::{Error, Result};
use crate::sieve::{self, SieveFit};
use crate::simulate::TimeSeries;

/// Smallest accepted number of bootstrap replicates.
pub const MIN_REPLICATES: usize = 100;

/// Replicates per parallel work item.
const REPLICATE_CHUNK: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    /// `H0: ρ_j ≡ 0` for one lag `j`.
    #[serde(rename = "lag")]
    SingleLag,
    /// `H0: the series is (locally stationary) white noise`.
    #[serde(rename = "whitenoise")]
    WhiteNoise,
    /// `H0: ρ_1` does not vary with time.
    Constancy,
}

impl TestKind {
    pub fn name(self) -> &'static str {
        match self {
            TestKind::SingleLag => "lag",
            TestKind::WhiteNoise => "whitenoise",
            TestKind::Constancy => "constancy",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lag" | "singlelag" | "single-lag" => Ok(TestKind::SingleLag),
            "whitenoise" | "white-noise" => Ok(TestKind::WhiteNoise),
            "constancy" => Ok(TestKind::Constancy),
            other => Err(Error::invalid(format!("unknown test kind `{other}`"))),
        }
    }
}

/// Bootstrap settings: `B` replicates, block size `m`, RNG seed, level `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub block_size: usize,
    pub seed: u64,
    pub alpha: f64,
}

impl BootstrapConfig {
    pub fn new(block_size: usize, seed: u64) -> Self {
        BootstrapConfig {
            replicates: 1000,
            block_size,
            seed,
            alpha: 0.05,
        }
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    fn validate(&self, n: usize, lag: usize) -> Result<()> {
        if self.replicates < MIN_REPLICATES {
            return Err(Error::invalid(format!(
                "at least {MIN_REPLICATES} bootstrap replicates are required, got {}",
                self.replicates
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!(
                "level α = {} outside (0,1)",
                self.alpha
            )));
        }
        check_block_size(n, lag, self.block_size)
    }
}

fn check_block_size(n: usize, lag: usize, m: usize) -> Result<()> {
    if m == 0 || lag + m >= n {
        return Err(Error::invalid(format!(
            "block size m = {m} must satisfy 1 ≤ m ≤ n − ℓ − 1 = {}",
            n as i64 - lag as i64 - 1
        )));
    }
    Ok(())
}

/// Outcome of one bootstrap test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub kind: TestKind,
    /// Lag `j` (single-lag, constancy) or order `h` (white noise).
    pub lag: usize,
    pub statistic: f64,
    pub n_statistic: f64,
    /// Sorted bootstrap draws `𝒯̂^{(1)} ≤ … ≤ 𝒯̂^{(B)}`.
    pub bootstrap: Vec<f64>,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub replicates: usize,
    pub c: usize,
    pub m: usize,
    pub basis: BasisFamily,
    pub seed: u64,
    pub n: usize,
}

impl TestResult {
    /// Decision at another level, from the same bootstrap draws.
    pub fn reject_at(&self, alpha: f64) -> bool {
        reject_decision(&self.bootstrap, self.n_statistic, alpha)
    }
}

/// `T1 = ∫ ρ̂_ℓ(t)² dt` of a lag-`ℓ` fit.
pub fn stat_t1(fit: &SieveFit) -> f64 {
    fit.integrated_square(fit.lag())
}

/// `T2 = Σ_{k≤h} ∫ φ̂_{h,k}(t)² dt` of an order-`h` fit.
pub fn stat_t2(fit: &SieveFit) -> f64 {
    (1..=fit.lag()).map(|k| fit.integrated_square(k)).sum()
}

/// `T_BP = Σ_{k≤h} ∫ ρ̂_k(t)² dt`, one fit per lag.
pub fn stat_tbp(x: &TimeSeries, basis: &BasisSet, h: usize) -> Result<f64> {
    if h == 0 {
        return Err(Error::invalid("T_BP needs h ≥ 1"));
    }
    (1..=h)
        .into_par_iter()
        .map(|k| sieve::fit(x, k, basis).map(|f| stat_t1(&f)))
        .collect::<Result<Vec<f64>>>()
        .map(|v| v.iter().sum())
}

/// `T1* = ∫ (ρ̂_1(t) − ∫ρ̂_1)² dt` of a lag-1 fit.
pub fn stat_t1_star(fit: &SieveFit) -> Result<f64> {
    if fit.lag() != 1 {
        return Err(Error::invalid("the constancy statistic needs a lag-1 fit"));
    }
    Ok(fit.integrated_centered_square(1))
}

/// Statistic `T` for `kind`.
pub fn statistic(fit: &SieveFit, kind: TestKind) -> Result<f64> {
    match kind {
        TestKind::SingleLag => Ok(stat_t1(fit)),
        TestKind::WhiteNoise => Ok(stat_t2(fit)),
        TestKind::Constancy => stat_t1_star(fit),
    }
}

/// Rows `(Σ_{j=i}^{i+m} ŵ_j) ⊗ B(i/n)` for `i = ℓ+1..n−m`, with the common
/// normalization `[(n−m−ℓ+1)·m]^{−1/2}`.
#[derive(Debug, Clone)]
pub struct BootstrapPlan {
    /// `(n−m−ℓ) × ℓc`.
    rows: DMatrix<f64>,
    scale: f64,
}

impl BootstrapPlan {
    pub fn new(x: &TimeSeries, fit: &SieveFit, m: usize) -> Result<Self> {
        let n = x.len();
        let lag = fit.lag();
        check_block_size(n, lag, m)?;
        let resid = fit.residuals(x)?;
        let xs = x.values();
        // prefix[r] = Σ ŵ_j over the first r residual indices (j = ℓ+1..)
        let mut prefix = vec![vec![0.0; lag]; resid.len() + 1];
        for (r, e) in resid.iter().enumerate() {
            let j = lag + 1 + r;
            let (head, tail) = prefix.split_at_mut(r + 1);
            for l in 0..lag {
                tail[0][l] = head[r][l] + xs[j - l - 2] * e;
            }
        }
        let c = fit.basis().size();
        let terms = n - m - lag;
        let mut rows = DMatrix::zeros(terms, lag * c);
        let mut b = vec![0.0; c];
        for r in 0..terms {
            let i = lag + 1 + r;
            fit.basis()
                .eval_into(i as f64 / fit.time_scale() as f64, &mut b);
            // block sum over j = i..=i+m, i.e. residual offsets r..=r+m
            for l in 0..lag {
                let s = prefix[r + m + 1][l] - prefix[r][l];
                for (k, bk) in b.iter().enumerate() {
                    rows[(r, l * c + k)] = s * bk;
                }
            }
        }
        let scale = 1.0 / (((n - m - lag + 1) * m) as f64).sqrt();
        Ok(BootstrapPlan { rows, scale })
    }

    /// Number of multipliers `R_i` consumed per replicate.
    pub fn terms(&self) -> usize {
        self.rows.nrows()
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    /// `Φ̂` for the given multipliers.
    pub fn phi(&self, multipliers: &[f64]) -> Result<Vec<f64>> {
        if multipliers.len() != self.terms() {
            return Err(Error::invalid(format!(
                "{} multipliers supplied, {} required",
                multipliers.len(),
                self.terms()
            )));
        }
        let mut out = vec![0.0; self.dim()];
        for (col, o) in self.rows.column_iter().zip(out.iter_mut()) {
            *o = self.scale * sieve::dot(col.as_slice(), multipliers);
        }
        Ok(out)
    }

    /// `Φ̂` with standard Gaussian multipliers from `rng`.
    pub fn draw_phi<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let r: Vec<f64> = (0..self.terms())
            .map(|_| rng.sample(StandardNormal))
            .collect();
        self.phi(&r).expect("multiplier count matches")
    }

    /// `Π̂ = E[Φ̂Φ̂ᵀ | x]`.
    pub fn pi_hat(&self) -> DMatrix<f64> {
        self.rows.tr_mul(&self.rows) * (self.scale * self.scale)
    }
}

/// `Φ̂` for one set of standard Gaussian multipliers drawn from `rng`.
pub fn bootstrap_phi<R: Rng + ?Sized>(
    x: &TimeSeries,
    fit: &SieveFit,
    m: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(BootstrapPlan::new(x, fit, m)?.draw_phi(rng))
}

/// Quadratic form `Φ̂ᵀ Σ̂⁻¹ M Σ̂⁻¹ Φ̂` with `M` selecting the last block
/// (single lag), everything (white noise, `Σ̂⁻²`), or the non-constant part
/// of the last block (constancy).
pub fn bootstrap_stat(phi: &[f64], fit: &SieveFit, kind: TestKind) -> Result<f64> {
    let z = fit.solve_sigma(phi)?;
    Ok(quadratic_form(&z, fit, kind))
}

fn selected_range(fit: &SieveFit, kind: TestKind) -> std::ops::Range<usize> {
    let c = fit.basis().size();
    let p = fit.lag() * c;
    match kind {
        TestKind::SingleLag => p - c..p,
        TestKind::WhiteNoise => 0..p,
        TestKind::Constancy => p - c + 1..p,
    }
}

fn quadratic_form(z: &[f64], fit: &SieveFit, kind: TestKind) -> f64 {
    z[selected_range(fit, kind)].iter().map(|v| v * v).sum()
}

/// RNG for bootstrap replicate `replicate` under `seed`.
pub fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

/// `B` bootstrap draws of the statistic, unsorted, in replicate order.
pub fn bootstrap_draws(
    x: &TimeSeries,
    fit: &SieveFit,
    kind: TestKind,
    replicates: usize,
    m: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if kind == TestKind::Constancy && fit.lag() != 1 {
        return Err(Error::invalid("the constancy test needs a lag-1 fit"));
    }
    let plan = BootstrapPlan::new(x, fit, m)?;
    // Only the selected coordinates of Σ̂⁻¹Φ̂ matter, so fold Σ̂⁻¹ into the
    // rows once: z_sel = scale · (Rows Σ̂⁻¹)_selᵀ r.
    let range = selected_range(fit, kind);
    let terms = plan.terms();
    let mut proj = DMatrix::zeros(terms, range.len());
    let mut row = vec![0.0; plan.dim()];
    for r in 0..terms {
        for (k, v) in row.iter_mut().enumerate() {
            *v = plan.rows[(r, k)];
        }
        let solved = fit.solve_sigma(&row)?;
        for (col, k) in range.clone().enumerate() {
            proj[(r, col)] = solved[k] * plan.scale;
        }
    }
    let chunks: Vec<usize> = (0..replicates).step_by(REPLICATE_CHUNK).collect();
    let draws: Vec<Vec<f64>> = chunks
        .par_iter()
        .map(|&start| {
            let end = (start + REPLICATE_CHUNK).min(replicates);
            let width = end - start;
            let mut mult = DMatrix::zeros(terms, width);
            for (col, s) in (start..end).enumerate() {
                let mut rng = replicate_rng(seed, s);
                for r in 0..terms {
                    mult[(r, col)] = rng.sample(StandardNormal);
                }
            }
            let z = proj.tr_mul(&mult);
            z.column_iter()
                .map(|c| c.iter().map(|v| v * v).sum())
                .collect()
        })
        .collect();
    Ok(draws.into_iter().flatten().collect())
}

/// `reject ⇔ nT > 𝒯̂^{(⌊B(1−α)⌋)}` on sorted draws.
fn reject_decision(sorted: &[f64], n_stat: f64, alpha: f64) -> bool {
    let idx = (sorted.len() as f64 * (1.0 - alpha)).floor() as usize;
    if idx == 0 {
        return true;
    }
    n_stat > sorted[idx.min(sorted.len()) - 1]
}

/// `p = 1 − B*/B` with `B* = #{s : 𝒯̂^s ≤ nT}`.
pub fn p_value(sorted: &[f64], n_stat: f64) -> f64 {
    let b_star = sorted.partition_point(|v| *v <= n_stat);
    1.0 - b_star as f64 / sorted.len() as f64
}

/// Runs the bootstrap test of `kind` at lag (or order) `lag` with a fixed
/// basis and block size.
pub fn run_test(
    x: &TimeSeries,
    kind: TestKind,
    lag: usize,
    basis: &BasisSet,
    config: &BootstrapConfig,
) -> Result<TestResult> {
    if kind == TestKind::Constancy && lag != 1 {
        return Err(Error::invalid("the constancy test is defined for lag 1"));
    }
    if lag == 0 {
        return Err(Error::invalid("lag must be at least 1"));
    }
    config.validate(x.len(), lag)?;
    let fit = sieve::fit(x, lag, basis)?;
    run_test_on_fit(x, &fit, kind, config)
}

/// As [`run_test`], reusing an existing fit.
pub fn run_test_on_fit(
    x: &TimeSeries,
    fit: &SieveFit,
    kind: TestKind,
    config: &BootstrapConfig,
) -> Result<TestResult> {
    config.validate(x.len(), fit.lag())?;
    let statistic = statistic(fit, kind)?;
    let n_statistic = x.len() as f64 * statistic;
    let mut draws = bootstrap_draws(
        x,
        fit,
        kind,
        config.replicates,
        config.block_size,
        config.seed,
    )?;
    draws.sort_by(f64::total_cmp);
    Ok(TestResult {
        kind,
        lag: fit.lag(),
        statistic,
        n_statistic,
        p_value: p_value(&draws, n_statistic),
        reject: reject_decision(&draws, n_statistic, config.alpha),
        bootstrap: draws,
        alpha: config.alpha,
        replicates: config.replicates,
        c: fit.basis().size(),
        m: config.block_size,
        basis: fit.basis().family(),
        seed: config.seed,
        n: x.len(),
    })
}
