//! Sieve least-squares estimation of time-varying AR coefficients.
//!
//! For a working lag `ℓ` and a basis `α_1..α_c`, every coefficient function
//! `φ_{ℓ,l}(t)` is expanded as `Σ_k a_{k,l} α_k(t)` and all `ℓ·c` weights are
//! fitted in one OLS regression of `x_i` on `z_{kl}(i/n) = α_k(i/n) x_{i−l}`.
//! Columns are stacked lag-major, basis-minor: the weight of `α_k` on lag `l`
//! lives at index `(l−1)·c + (k−1)`. The last lag block gives the PACF
//! estimate `ρ̂_ℓ(t)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::basis::BasisSet;
use crate::error::{Error, Result};
use crate::quadrature::{self, RIEMANN_CELLS};
use crate::simulate::TimeSeries;

/// Fits with a reciprocal condition number of `Σ̂` below this are rejected.
pub const MIN_RCOND: f64 = 1e-10;

/// Regression design `Y` (rows `i = ℓ+1..n`, columns `ℓ·c`) and response.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    lag: usize,
    basis: BasisSet,
    n: usize,
    time_scale: usize,
    matrix: DMatrix<f64>,
    response: DVector<f64>,
}

impl DesignMatrix {
    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    /// Length of the series the design was built from.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Denominator used for rescaled time `i / time_scale`.
    pub fn time_scale(&self) -> usize {
        self.time_scale
    }

    /// The `(n−ℓ) × ℓc` matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `(x_{ℓ+1}, …, x_n)`.
    pub fn response(&self) -> &DVector<f64> {
        &self.response
    }
}

/// Builds the stacked design with rescaled time `i/n`.
pub fn build_design(x: &TimeSeries, lag: usize, basis: &BasisSet) -> Result<DesignMatrix> {
    build_design_rescaled(x, lag, basis, x.len())
}

/// Builds the design with rescaled time `i / time_scale`, for fitting a
/// leading segment of a longer series on that series' time axis.
pub fn build_design_rescaled(
    x: &TimeSeries,
    lag: usize,
    basis: &BasisSet,
    time_scale: usize,
) -> Result<DesignMatrix> {
    let n = x.len();
    if lag == 0 {
        return Err(Error::invalid("lag must be at least 1"));
    }
    if time_scale < n {
        return Err(Error::invalid(format!(
            "time scale {time_scale} shorter than the series ({n})"
        )));
    }
    let c = basis.size();
    let cols = lag * c;
    let rows = n.saturating_sub(lag);
    if rows < cols || rows == 0 {
        return Err(Error::SampleTooSmall { rows, cols });
    }
    let xs = x.values();
    let mut b = vec![0.0; c];
    let mut matrix = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        // observation i = lag + 1 + r (1-based) sits at xs[lag + r]
        let i = lag + 1 + r;
        basis.eval_into(i as f64 / time_scale as f64, &mut b);
        for l in 1..=lag {
            let lagged = xs[i - l - 1];
            for (k, bk) in b.iter().enumerate() {
                matrix[(r, (l - 1) * c + k)] = bk * lagged;
            }
        }
    }
    let response = DVector::from_iterator(rows, xs[lag..].iter().copied());
    Ok(DesignMatrix {
        lag,
        basis: basis.clone(),
        n,
        time_scale,
        matrix,
        response,
    })
}

/// A fitted sieve regression.
#[derive(Debug, Clone)]
pub struct SieveFit {
    lag: usize,
    basis: BasisSet,
    n: usize,
    time_scale: usize,
    beta: Vec<f64>,
    /// Upper-triangular factor of `Y = QR`, so `Σ̂ = RᵀR / n`.
    r: DMatrix<f64>,
    rcond: f64,
}

/// Ordinary least squares via Householder QR of the design.
pub fn fit_ols(design: &DesignMatrix) -> Result<SieveFit> {
    let p = design.matrix.ncols();
    let qr = design.matrix.clone().qr();
    let r = qr.r();
    let mut qty = design.response.clone();
    qr.q_tr_mul(&mut qty);

    let n = design.n as f64;
    let sigma = r.tr_mul(&r) / n;
    let eig = SymmetricEigen::new(sigma).eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| {
        (lo.min(v), hi.max(v.abs()))
    });
    let rcond = if hi > 0.0 { lo / hi } else { 0.0 };
    if !(rcond >= MIN_RCOND) {
        return Err(Error::singular(
            format!(
                "design of lag {} with {} basis functions is rank deficient",
                design.lag,
                design.basis.size()
            ),
            rcond,
        ));
    }
    let beta = solve_upper(&r, &qty.as_slice()[..p]);
    Ok(SieveFit {
        lag: design.lag,
        basis: design.basis.clone(),
        n: design.n,
        time_scale: design.time_scale,
        beta,
        r,
        rcond,
    })
}

/// Builds the design for `x` and fits it.
pub fn fit(x: &TimeSeries, lag: usize, basis: &BasisSet) -> Result<SieveFit> {
    fit_ols(&build_design(x, lag, basis)?)
}

/// Back substitution with an upper-triangular `r`.
pub(crate) fn solve_upper(r: &DMatrix<f64>, rhs: &[f64]) -> Vec<f64> {
    let p = rhs.len();
    let mut out = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|k| r[(i, k)] * out[k]).sum();
        out[i] = (rhs[i] - s) / r[(i, i)];
    }
    out
}

/// Forward substitution with `rᵀ` (lower triangular).
pub(crate) fn solve_upper_transposed(r: &DMatrix<f64>, rhs: &[f64]) -> Vec<f64> {
    let p = rhs.len();
    let mut out = vec![0.0; p];
    for i in 0..p {
        let s: f64 = (0..i).map(|k| r[(k, i)] * out[k]).sum();
        out[i] = (rhs[i] - s) / r[(i, i)];
    }
    out
}

impl SieveFit {
    /// Working lag `ℓ`.
    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn time_scale(&self) -> usize {
        self.time_scale
    }

    /// Stacked weights `β̂` of length `ℓ·c`.
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    #[cfg(test)]
    pub(crate) fn set_beta_for_tests(&mut self, beta: Vec<f64>) {
        assert_eq!(beta.len(), self.beta.len());
        self.beta = beta;
    }

    /// Reciprocal condition number of `Σ̂`.
    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    /// Weights of lag block `k` (1-based).
    pub fn block(&self, k: usize) -> &[f64] {
        let c = self.basis.size();
        &self.beta[(k - 1) * c..k * c]
    }

    /// `Σ̂ = YᵀY / n`.
    pub fn sigma_hat(&self) -> DMatrix<f64> {
        self.r.tr_mul(&self.r) / self.n as f64
    }

    /// `Σ̂⁻¹ v`, reusing the QR factor.
    pub fn solve_sigma(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.beta.len() {
            return Err(Error::invalid(format!(
                "vector of length {} against a {}-dimensional fit",
                v.len(),
                self.beta.len()
            )));
        }
        let z = solve_upper_transposed(&self.r, v);
        let mut w = solve_upper(&self.r, &z);
        let n = self.n as f64;
        w.iter_mut().for_each(|x| *x *= n);
        Ok(w)
    }

    /// `ρ̂_ℓ(t)`: the last coefficient block evaluated at `t`.
    pub fn eval_pacf(&self, t: f64) -> Result<f64> {
        self.eval_coeff(self.lag, t)
    }

    /// `φ̂_{ℓ,k}(t)`.
    pub fn eval_coeff(&self, k: usize, t: f64) -> Result<f64> {
        if k == 0 || k > self.lag {
            return Err(Error::invalid(format!(
                "coefficient index {k} outside 1..={}",
                self.lag
            )));
        }
        let b = self.basis.eval(t)?;
        Ok(dot(self.block(k), &b))
    }

    fn coeffs_into(&self, t: f64, basis_buf: &mut [f64], out: &mut [f64]) {
        self.basis.eval_into(t, basis_buf);
        for (k, o) in out.iter_mut().enumerate() {
            *o = dot(self.block(k + 1), basis_buf);
        }
    }

    /// `ε̂_i = x_i − Σ_k φ̂_k(i/n) x_{i−k}` for `i = ℓ+1..n`.
    pub fn residuals(&self, x: &TimeSeries) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::invalid(format!(
                "series of length {} does not match the fit (n = {})",
                x.len(),
                self.n
            )));
        }
        let xs = x.values();
        let mut bbuf = vec![0.0; self.basis.size()];
        let mut phi = vec![0.0; self.lag];
        Ok((self.lag + 1..=self.n)
            .map(|i| {
                self.coeffs_into(i as f64 / self.time_scale as f64, &mut bbuf, &mut phi);
                xs[i - 1] - predict(&phi, xs, i)
            })
            .collect())
    }

    /// One-step forecast `x̂_i = Σ_k φ̂_k(i/N) x_{i−k}` with `N` the fit's
    /// time scale; `i` is 1-based and needs `ℓ < i ≤ min(len(x), N)`.
    pub fn forecast(&self, x: &TimeSeries, i: usize) -> Result<f64> {
        if i <= self.lag || i > x.len() || i > self.time_scale {
            return Err(Error::invalid(format!(
                "forecast index {i} outside {}..={}",
                self.lag + 1,
                x.len().min(self.time_scale)
            )));
        }
        let mut bbuf = vec![0.0; self.basis.size()];
        let mut phi = vec![0.0; self.lag];
        self.coeffs_into(i as f64 / self.time_scale as f64, &mut bbuf, &mut phi);
        Ok(predict(&phi, x.values(), i))
    }

    /// `∫₀¹ φ̂_{ℓ,k}(t)² dt`.
    pub fn integrated_square(&self, k: usize) -> f64 {
        if self.basis.family().is_exactly_orthonormal() {
            self.block(k).iter().map(|v| v * v).sum()
        } else {
            let block = self.block(k);
            let mut buf = vec![0.0; self.basis.size()];
            quadrature::midpoint(RIEMANN_CELLS, |t| {
                self.basis.eval_into(t, &mut buf);
                dot(block, &buf).powi(2)
            })
        }
    }

    /// `∫₀¹ (φ̂_{ℓ,k}(t) − ∫₀¹ φ̂_{ℓ,k})² dt`.
    pub fn integrated_centered_square(&self, k: usize) -> f64 {
        let block = self.block(k);
        if self.basis.family().is_exactly_orthonormal() {
            block[1..].iter().map(|v| v * v).sum()
        } else {
            let mut buf = vec![0.0; self.basis.size()];
            let mut vals = Vec::with_capacity(RIEMANN_CELLS);
            quadrature::midpoint(RIEMANN_CELLS, |t| {
                self.basis.eval_into(t, &mut buf);
                let v = dot(block, &buf);
                vals.push(v);
                v
            });
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64
        }
    }

    /// `ρ̂_ℓ` on a grid.
    pub fn pacf_curve(&self, grid: &[f64]) -> Result<Vec<f64>> {
        grid.iter().map(|&t| self.eval_pacf(t)).collect()
    }
}

fn predict(phi: &[f64], xs: &[f64], i: usize) -> f64 {
    phi.iter().enumerate().map(|(k, p)| p * xs[i - k - 2]).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Free-function form of [`SieveFit::eval_pacf`].
pub fn eval_pacf(f: &SieveFit, t: f64) -> Result<f64> {
    f.eval_pacf(t)
}

/// Free-function form of [`SieveFit::eval_coeff`].
pub fn eval_coeff(f: &SieveFit, k: usize, t: f64) -> Result<f64> {
    f.eval_coeff(k, t)
}

/// Free-function form of [`SieveFit::residuals`].
pub fn residuals(f: &SieveFit, x: &TimeSeries) -> Result<Vec<f64>> {
    f.residuals(x)
}

/// Free-function form of [`SieveFit::forecast`].
pub fn forecast(f: &SieveFit, x: &TimeSeries, i: usize) -> Result<f64> {
    f.forecast(x, i)
}
