//! Data-driven choices of the basis size `c`, the block size `m` and the
//! white-noise order `h`, plus sequential order selection.
//!
//! * `c` minimizes one-step forecast error on a held-out tail of length
//!   `⌊3 log₂ n⌋`, with the training fit keeping the full-sample time scale.
//! * `m` minimizes the local variability of `Π̂_m` across neighbouring grid
//!   points (minimum volatility).
//! * `h` is the first lag whose single-lag test does not reject.

use std::fmt;

use log::warn;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisFamily, BasisSet};
use crate::error::{Error, Result};
use crate::infer::{self, BootstrapConfig, BootstrapPlan, TestKind, TestResult};
use crate::sieve::{self, SieveFit};
use crate::simulate::TimeSeries;

/// Half-width of the minimum-volatility window.
pub const MV_HALF_WIDTH: usize = 3;

/// Default cap for white-noise order selection.
pub const DEFAULT_MAX_H: usize = 50;

/// Power iterations for the spectral norm.
const POWER_ITERATIONS: usize = 50;

/// Relative tolerance under which two validation errors count as tied.
const CV_TIE_TOL: f64 = 1e-10;

/// Diagonal ratio of the triangular factor below which a candidate `c` is
/// treated as numerically singular (`ratio² ≈ rcond(Σ̂)`).
const MIN_DIAG_RATIO: f64 = 1e-5;

/// Matrix norm used by the minimum-volatility criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixNorm {
    #[default]
    Spectral,
    Frobenius,
}

impl fmt::Display for MatrixNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixNorm::Spectral => "spectral",
            MatrixNorm::Frobenius => "frobenius",
        })
    }
}

/// Validation-tail length `⌊3 log₂ n⌋`.
pub fn validation_length(n: usize) -> usize {
    (3.0 * (n as f64).log2()).floor() as usize
}

/// `⌈factor · n^power⌉`, ignoring floating-point noise at exact integers.
fn ceil_power(n: usize, power: f64, factor: f64) -> usize {
    let v = factor * (n as f64).powf(power);
    let r = v.round();
    if (v - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        v.ceil() as usize
    }
}

/// Default basis-size grid for estimation, `{2, …, ⌈2 n^{1/5}⌉}`.
pub fn default_c_grid(n: usize) -> Vec<usize> {
    (2..=ceil_power(n, 0.2, 2.0).max(2)).collect()
}

/// Default basis-size grid for tests, `{⌈n^{1/5}⌉, …, ⌈1.5 n^{1/5}⌉}`. Too
/// small a basis leaves lower-lag structure in the residuals, which the
/// tested lag then absorbs; too large a one shrinks the bootstrap variance.
pub fn default_test_c_grid(n: usize) -> Vec<usize> {
    let lo = ceil_power(n, 0.2, 1.0).max(1);
    (lo..=ceil_power(n, 0.2, 1.5).max(lo)).collect()
}

/// Default block-size grid `{⌈n^{1/5}⌉, …, ⌈1.5 n^{1/5}⌉}`, extended by
/// `h₀` unit steps on each side, clamped to `1 ≤ m ≤ n − ℓ − 2`.
pub fn default_m_grid(n: usize, lag: usize) -> Vec<usize> {
    let lo = ceil_power(n, 0.2, 1.0) as i64;
    let hi = ceil_power(n, 0.2, 1.5) as i64;
    let cap = n as i64 - lag as i64 - 2;
    let h0 = MV_HALF_WIDTH as i64;
    (lo - h0..=hi + h0)
        .filter(|&m| m >= 1 && m <= cap)
        .map(|m| m as usize)
        .collect()
}

/// Lag cutoff `⌈n^{1/(2(τ−1))}⌉` for coefficients decaying like `k^{−τ}`.
pub fn lag_cutoff(n: usize, tau: f64) -> Result<usize> {
    if !(tau > 1.0) || !tau.is_finite() {
        return Err(Error::invalid(format!(
            "decay exponent τ = {tau} must exceed 1"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("sample size must be positive"));
    }
    Ok(ceil_power(n, 1.0 / (2.0 * (tau - 1.0)), 1.0))
}

/// Cross-validation outcome for the basis size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub c: usize,
    pub candidates: Vec<usize>,
    /// Validation mean squared error per candidate; `None` when infeasible.
    pub mse: Vec<Option<f64>>,
}

/// Picks `c` from `candidates` by one-step forecasting of the last
/// `⌊3 log₂ n⌋` observations from an order-`h2` fit on the rest.
pub fn select_c(
    x: &TimeSeries,
    candidates: &[usize],
    h2: usize,
    family: BasisFamily,
) -> Result<CvReport> {
    if candidates.is_empty() || candidates.contains(&0) {
        return Err(Error::invalid(
            "basis-size candidates must be a non-empty set of positive integers",
        ));
    }
    if h2 == 0 {
        return Err(Error::invalid("fitting order must be at least 1"));
    }
    let n = x.len();
    let hold = validation_length(n);
    if hold == 0 || hold + h2 + 1 >= n {
        return Err(Error::SampleTooSmall {
            rows: n.saturating_sub(hold + h2),
            cols: h2,
        });
    }
    let train_len = n - hold;
    let rows = train_len - h2;
    let c_max = candidates.iter().copied().filter(|c| c * h2 <= rows).max();
    let mut mse = vec![None; candidates.len()];
    let Some(c_max) = c_max else {
        return Err(Error::SampleTooSmall {
            rows,
            cols: candidates.iter().min().unwrap() * h2,
        });
    };
    let big = BasisSet::new(family, c_max)?;
    let xs = x.values();

    // Basis-major design: column (k−1)·h2 + (l−1). Leading c·h2 columns form
    // the design for basis size c because the families are nested.
    let p_max = c_max * h2;
    let mut design = DMatrix::zeros(rows, p_max);
    let mut y = DVector::zeros(rows);
    let mut b = vec![0.0; c_max];
    for r in 0..rows {
        let i = h2 + 1 + r;
        big.eval_into(i as f64 / n as f64, &mut b);
        for (k, bk) in b.iter().enumerate() {
            for l in 0..h2 {
                design[(r, k * h2 + l)] = bk * xs[i - l - 2];
            }
        }
        y[r] = xs[i - 1];
    }
    let qr = design.qr();
    let rmat = qr.r();
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);

    // validation regressors, basis-major as above
    let mut val = DMatrix::zeros(hold, p_max);
    for v in 0..hold {
        let i = train_len + 1 + v;
        big.eval_into(i as f64 / n as f64, &mut b);
        for (k, bk) in b.iter().enumerate() {
            for l in 0..h2 {
                val[(v, k * h2 + l)] = bk * xs[i - l - 2];
            }
        }
    }
    let target = &xs[train_len..];
    let scale = target.iter().map(|v| v * v).sum::<f64>() / hold as f64;

    for (slot, &c) in mse.iter_mut().zip(candidates) {
        let p = c * h2;
        if p > rows {
            warn!("basis size c = {c} skipped: {p} regressors but only {rows} training rows");
            continue;
        }
        let sub = rmat.view((0, 0), (p, p)).into_owned();
        let diag: Vec<f64> = (0..p).map(|i| sub[(i, i)].abs()).collect();
        let dmax = diag.iter().cloned().fold(0.0, f64::max);
        let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(dmax > 0.0) || dmin < MIN_DIAG_RATIO * dmax {
            warn!("basis size c = {c} skipped: training design is numerically singular");
            continue;
        }
        let coef = sieve::solve_upper(&sub, &qty.as_slice()[..p]);
        let err: f64 = (0..hold)
            .map(|v| {
                let pred: f64 = (0..p).map(|k| val[(v, k)] * coef[k]).sum();
                (target[v] - pred).powi(2)
            })
            .sum::<f64>()
            / hold as f64;
        *slot = Some(err);
    }
    let best = mse.iter().filter_map(|v| *v).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::singular(
            "basis-size selection: every candidate is infeasible",
            0.0,
        ));
    }
    let tol = best + CV_TIE_TOL * scale.max(f64::MIN_POSITIVE);
    let c = candidates
        .iter()
        .zip(&mse)
        .filter(|(_, e)| e.is_some_and(|e| e <= tol))
        .map(|(c, _)| *c)
        .min()
        .expect("at least one feasible candidate");
    Ok(CvReport {
        c,
        candidates: candidates.to_vec(),
        mse,
    })
}

/// `Π̂` for block size `m`.
pub fn pi_hat(x: &TimeSeries, fit: &SieveFit, m: usize) -> Result<DMatrix<f64>> {
    Ok(BootstrapPlan::new(x, fit, m)?.pi_hat())
}

/// Minimum-volatility outcome for the block size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvReport {
    pub m: usize,
    pub grid: Vec<usize>,
    /// Interior grid points and their local standard errors.
    pub interior: Vec<usize>,
    pub se: Vec<f64>,
    pub norm: MatrixNorm,
}

/// Picks `m` from `grid` (already extended by `h₀` points on each side) by
/// minimum volatility of `Π̂_m`.
pub fn select_m(
    x: &TimeSeries,
    fit: &SieveFit,
    grid: &[usize],
    norm: MatrixNorm,
) -> Result<MvReport> {
    let n = x.len();
    for &m in grid {
        if m == 0 || fit.lag() + m >= n {
            return Err(Error::invalid(format!(
                "block size {m} in the grid violates 1 ≤ m ≤ n − ℓ − 1"
            )));
        }
    }
    select_m_with(grid, norm, |m| pi_hat(x, fit, m))
}

/// Minimum volatility over `grid` for an arbitrary matrix-valued map.
pub fn select_m_with<F>(grid: &[usize], norm: MatrixNorm, pi: F) -> Result<MvReport>
where
    F: Fn(usize) -> Result<DMatrix<f64>> + Sync,
{
    let h0 = MV_HALF_WIDTH;
    if grid.len() < 2 * h0 + 1 {
        return Err(Error::invalid(format!(
            "block-size grid needs at least {} points, got {}",
            2 * h0 + 1,
            grid.len()
        )));
    }
    let mats = grid
        .par_iter()
        .map(|&m| pi(m))
        .collect::<Result<Vec<_>>>()?;
    let interior: Vec<usize> = (h0..grid.len() - h0).collect();
    let se: Vec<f64> = interior
        .par_iter()
        .map(|&j| {
            let window = &mats[j - h0..=j + h0];
            // centred on the first member so a constant window gives exact zeros
            let mut shift = DMatrix::zeros(window[0].nrows(), window[0].ncols());
            for w in &window[1..] {
                shift += w - &window[0];
            }
            let mean = &window[0] + shift / window.len() as f64;
            let ss: f64 = window
                .iter()
                .map(|w| matrix_norm(&(&mean - w), norm).powi(2))
                .sum();
            (ss / (2 * h0) as f64).sqrt()
        })
        .collect();
    let mut best = 0;
    for (k, v) in se.iter().enumerate() {
        if *v < se[best] {
            best = k;
        }
    }
    Ok(MvReport {
        m: grid[interior[best]],
        grid: grid.to_vec(),
        interior: interior.iter().map(|&j| grid[j]).collect(),
        se,
        norm,
    })
}

/// Spectral (largest singular value, by power iteration on `AᵀA`) or
/// Frobenius norm.
pub fn matrix_norm(a: &DMatrix<f64>, norm: MatrixNorm) -> f64 {
    match norm {
        MatrixNorm::Frobenius => a.norm(),
        MatrixNorm::Spectral => {
            let ata = a.tr_mul(a);
            let p = ata.ncols();
            if p == 0 {
                return 0.0;
            }
            // deterministic start, nudged off symmetric subspaces
            let mut v = DVector::from_fn(p, |i, _| 1.0 + 1e-3 * i as f64);
            v /= v.norm();
            let mut lambda = 0.0;
            for _ in 0..POWER_ITERATIONS {
                let w = &ata * &v;
                let len = w.norm();
                if len == 0.0 {
                    return 0.0;
                }
                lambda = len;
                v = w / len;
            }
            lambda.sqrt()
        }
    }
}

/// Explicit or automatic tuning inputs for a test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOptions {
    pub family: BasisFamily,
    /// Fixed basis size; `None` selects by cross-validation.
    pub c: Option<usize>,
    /// Fixed block size; `None` selects by minimum volatility.
    pub m: Option<usize>,
    pub c_grid: Option<Vec<usize>>,
    pub m_grid: Option<Vec<usize>>,
    pub norm: MatrixNorm,
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Upper bound for automatic white-noise order selection.
    pub max_h: usize,
}

impl TestOptions {
    pub fn new(family: BasisFamily, seed: u64) -> Self {
        TestOptions {
            family,
            c: None,
            m: None,
            c_grid: None,
            m_grid: None,
            norm: MatrixNorm::Spectral,
            replicates: 1000,
            alpha: 0.05,
            seed,
            max_h: DEFAULT_MAX_H,
        }
    }

    pub fn with_c(mut self, c: usize) -> Self {
        self.c = Some(c);
        self
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_replicates(mut self, b: usize) -> Self {
        self.replicates = b;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }
}

/// Values actually used by a test, with selection diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningRecord {
    pub basis: BasisFamily,
    pub c: usize,
    pub m: usize,
    pub h: Option<usize>,
    pub seed: u64,
    pub cv: Option<CvReport>,
    pub mv: Option<MvReport>,
    pub order: Option<OrderReport>,
}

/// Resolves `c` (for an order-`lag` fit) then `m`, returning the fit.
pub fn resolve(x: &TimeSeries, lag: usize, opts: &TestOptions) -> Result<(SieveFit, TuningRecord)> {
    let n = x.len();
    let (c, cv) = match opts.c {
        Some(c) => (c, None),
        None => {
            let grid = opts
                .c_grid
                .clone()
                .unwrap_or_else(|| default_test_c_grid(n));
            let rep = select_c(x, &grid, lag, opts.family)?;
            (rep.c, Some(rep))
        }
    };
    let basis = BasisSet::new(opts.family, c)?;
    let fit = sieve::fit(x, lag, &basis)?;
    let (m, mv) = match opts.m {
        Some(m) => (m, None),
        None => {
            let grid = opts
                .m_grid
                .clone()
                .unwrap_or_else(|| default_m_grid(n, lag));
            let rep = select_m(x, &fit, &grid, opts.norm)?;
            (rep.m, Some(rep))
        }
    };
    let record = TuningRecord {
        basis: opts.family,
        c,
        m,
        h: None,
        seed: opts.seed,
        cv,
        mv,
        order: None,
    };
    Ok((fit, record))
}

fn config(opts: &TestOptions, m: usize) -> BootstrapConfig {
    BootstrapConfig {
        replicates: opts.replicates,
        block_size: m,
        seed: opts.seed,
        alpha: opts.alpha,
    }
}

/// Single-lag test at `lag` with tuning resolved from `opts`.
pub fn tuned_lag_test(
    x: &TimeSeries,
    kind: TestKind,
    lag: usize,
    opts: &TestOptions,
) -> Result<(TestResult, TuningRecord)> {
    if lag == 0 {
        return Err(Error::invalid("lag must be at least 1"));
    }
    if kind == TestKind::Constancy && lag != 1 {
        return Err(Error::invalid("the constancy test is defined for lag 1"));
    }
    let (fit, record) = resolve(x, lag, opts)?;
    let result = infer::run_test_on_fit(x, &fit, kind, &config(opts, record.m))?;
    Ok((result, record))
}

/// Runs a test of `kind`. For white noise, `lag` is the order `h`; `None`
/// selects it sequentially. Constancy always uses lag 1.
pub fn auto_test(
    x: &TimeSeries,
    kind: TestKind,
    lag: Option<usize>,
    opts: &TestOptions,
) -> Result<(TestResult, TuningRecord)> {
    match kind {
        TestKind::SingleLag => {
            let lag = lag.ok_or_else(|| Error::invalid("the single-lag test needs a lag"))?;
            tuned_lag_test(x, kind, lag, opts)
        }
        TestKind::Constancy => tuned_lag_test(x, kind, lag.unwrap_or(1), opts),
        TestKind::WhiteNoise => {
            let (h, order) = match lag {
                Some(h) => (h, None),
                None => {
                    let rep = select_h(x, opts.max_h, opts)?;
                    (rep.selected, Some(rep))
                }
            };
            let (res, mut record) = tuned_lag_test(x, kind, h, opts)?;
            record.h = Some(h);
            record.order = order;
            Ok((res, record))
        }
    }
}

/// Sequential single-lag testing outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderReport {
    pub selected: usize,
    /// `true` when no lag up to the cap was accepted.
    pub capped: bool,
    pub p_values: Vec<f64>,
    pub rejections: Vec<bool>,
}

/// First lag `j ≤ max_h` whose single-lag test does not reject; `max_h` with
/// a warning when every lag rejects.
pub fn select_h(x: &TimeSeries, max_h: usize, opts: &TestOptions) -> Result<OrderReport> {
    if max_h == 0 {
        return Err(Error::invalid("maximum order must be at least 1"));
    }
    let mut p_values = Vec::new();
    let mut rejections = Vec::new();
    for j in 1..=max_h {
        let (res, _) = tuned_lag_test(x, TestKind::SingleLag, j, opts)?;
        p_values.push(res.p_value);
        rejections.push(res.reject);
        if !res.reject {
            return Ok(OrderReport {
                selected: j,
                capped: false,
                p_values,
                rejections,
            });
        }
    }
    warn!("every lag up to {max_h} rejected; using h = {max_h}");
    Ok(OrderReport {
        selected: max_h,
        capped: true,
        p_values,
        rejections,
    })
}

/// `p̃ = max{j ≤ p* : H0 at lag j rejected}`, or 0 when nothing rejects.
pub fn order_select(x: &TimeSeries, max_order: usize, opts: &TestOptions) -> Result<OrderReport> {
    if max_order == 0 {
        return Err(Error::invalid("maximum order must be at least 1"));
    }
    let results = (1..=max_order)
        .map(|j| tuned_lag_test(x, TestKind::SingleLag, j, opts).map(|(r, _)| r))
        .collect::<Result<Vec<_>>>()?;
    let rejections: Vec<bool> = results.iter().map(|r| r.reject).collect();
    let selected = rejections.iter().rposition(|r| *r).map_or(0, |k| k + 1);
    Ok(OrderReport {
        selected,
        capped: false,
        p_values: results.iter().map(|r| r.p_value).collect(),
        rejections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::make_basis;
    use crate::simulate::{simulate, ModelSpec};
    use approx::assert_abs_diff_eq;

    fn decay(n: usize) -> TimeSeries {
        TimeSeries::new((0..n).map(|i| 0.5f64.powi(i as i32)).collect()).unwrap()
    }

    #[test]
    fn cutoff_values() {
        assert_eq!(lag_cutoff(10_000, 2.0).unwrap(), 100);
        assert_eq!(lag_cutoff(600, 4.0).unwrap(), 3);
        assert_eq!(lag_cutoff(1000, 2.5).unwrap(), 10);
        assert!(lag_cutoff(100, 1.0).is_err());
        assert!(lag_cutoff(100, 0.5).is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(validation_length(600), 27);
        assert_eq!(validation_length(1024), 30);
        assert_eq!(default_c_grid(600), (2..=8).collect::<Vec<_>>());
        assert_eq!(default_c_grid(1024), (2..=8).collect::<Vec<_>>());
        assert_eq!(default_test_c_grid(600), (4..=6).collect::<Vec<_>>());
        // core 4..=6 plus three unit steps each side
        assert_eq!(default_m_grid(600, 3), (1..=9).collect::<Vec<_>>());
        assert_eq!(default_m_grid(12, 2), (1..=6).collect::<Vec<_>>());
    }

    #[test]
    fn cv_prefers_smallest_exact_fit() {
        let x = decay(100);
        let rep = select_c(&x, &(1..=8).collect::<Vec<_>>(), 1, BasisFamily::Legendre).unwrap();
        assert_eq!(rep.c, 1);
    }

    #[test]
    fn cv_matches_direct_refits() {
        let x = simulate(&ModelSpec::tv_ar2(0.5, 0.0), 400, 3).unwrap();
        let cands = vec![2, 3, 4, 5, 6];
        for family in BasisFamily::ALL {
            let rep = select_c(&x, &cands, 2, family).unwrap();
            let n = x.len();
            let hold = validation_length(n);
            let train = x.head(n - hold).unwrap();
            for (c, e) in cands.iter().zip(&rep.mse) {
                let b = make_basis(family, *c).unwrap();
                let d = sieve::build_design_rescaled(&train, 2, &b, n).unwrap();
                let f = sieve::fit_ols(&d).unwrap();
                let direct: f64 = (n - hold + 1..=n)
                    .map(|i| (x.values()[i - 1] - f.forecast(&x, i).unwrap()).powi(2))
                    .sum::<f64>()
                    / hold as f64;
                assert!(
                    (e.unwrap() - direct).abs() < 1e-9 * direct,
                    "{family} c={c}"
                );
            }
        }
    }

    #[test]
    fn cv_skips_infeasible_and_errors_when_none_fit() {
        let x = simulate(&ModelSpec::stationary_ar2(0.3, 0.0), 60, 1).unwrap();
        let rep = select_c(&x, &[2, 50], 1, BasisFamily::Fourier).unwrap();
        assert_eq!(rep.c, 2);
        assert!(rep.mse[1].is_none());
        assert!(select_c(&x, &[60], 1, BasisFamily::Fourier).is_err());
        assert!(select_c(&x, &[], 1, BasisFamily::Fourier).is_err());
    }

    #[test]
    fn mv_constant_map_picks_first_interior_point() {
        let grid: Vec<usize> = (1..=9).collect();
        let fixed = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 3.0]);
        let rep = select_m_with(&grid, MatrixNorm::Spectral, |_| Ok(fixed.clone())).unwrap();
        assert_eq!(rep.m, 4);
        assert!(rep.se.iter().all(|v| *v == 0.0));
        let one = select_m_with(&grid[..7], MatrixNorm::Spectral, |_| Ok(fixed.clone())).unwrap();
        assert_eq!(one.interior, vec![4]);
        assert!(select_m_with(&grid[..6], MatrixNorm::Spectral, |_| Ok(fixed.clone())).is_err());
    }

    #[test]
    fn mv_finds_flat_region() {
        // scalar map m ↦ (m − 12)², flattest around 12
        let grid: Vec<usize> = (1..=25).collect();
        let rep = select_m_with(&grid, MatrixNorm::Frobenius, |m| {
            let v = (m as f64 - 12.0).powi(2);
            Ok(DMatrix::from_element(1, 1, v))
        })
        .unwrap();
        assert_eq!(rep.m, 12);
    }

    #[test]
    fn spectral_norm_matches_eigen() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let exact = 2.0 + 2f64.sqrt();
        assert_abs_diff_eq!(matrix_norm(&a, MatrixNorm::Spectral), exact, epsilon = 1e-8);
        assert_abs_diff_eq!(
            matrix_norm(&a, MatrixNorm::Frobenius),
            16f64.sqrt(),
            epsilon = 1e-12
        );
        assert_eq!(
            matrix_norm(&DMatrix::zeros(2, 2), MatrixNorm::Spectral),
            0.0
        );
    }

    #[test]
    fn select_m_on_data_returns_grid_point() {
        let x = simulate(&ModelSpec::tv_ar2(0.4, 0.0), 500, 4).unwrap();
        let b = make_basis(BasisFamily::Legendre, 3).unwrap();
        let f = sieve::fit(&x, 2, &b).unwrap();
        let grid = default_m_grid(500, 2);
        let rep = select_m(&x, &f, &grid, MatrixNorm::Spectral).unwrap();
        assert!(rep.interior.contains(&rep.m));
        assert_eq!(rep.se.len(), grid.len() - 6);
        assert!(select_m(&x, &f, &[0, 1, 2, 3, 4, 5, 6], MatrixNorm::Spectral).is_err());
    }

    #[test]
    fn order_selection_on_ar2() {
        let x = simulate(&ModelSpec::stationary_ar2(0.5, 0.3), 800, 5).unwrap();
        let opts = TestOptions::new(BasisFamily::Legendre, 7)
            .with_c(3)
            .with_replicates(200);
        let rep = order_select(&x, 4, &opts).unwrap();
        assert!(rep.rejections[0] && rep.rejections[1]);
        assert!(rep.selected >= 2);
        let h = select_h(&x, 5, &opts).unwrap();
        assert!(h.selected >= 3 || h.capped);
    }

    #[test]
    fn auto_white_noise_records_tuning() {
        let x = simulate(&ModelSpec::stationary_ar2(0.0, 0.0), 400, 6).unwrap();
        let opts = TestOptions::new(BasisFamily::Fourier, 2).with_replicates(200);
        let (res, rec) = auto_test(&x, TestKind::WhiteNoise, None, &opts).unwrap();
        assert_eq!(Some(res.lag), rec.h);
        assert_eq!(res.c, rec.c);
        assert_eq!(res.m, rec.m);
        assert!(rec.cv.is_some() && rec.mv.is_some() && rec.order.is_some());
        assert!(auto_test(&x, TestKind::SingleLag, None, &opts).is_err());
    }
}
