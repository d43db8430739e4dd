//! Ground-truth local PACFs from an analytic autocovariance.
//!
//! Two independent routes are provided: a direct Cholesky solve of the local
//! Yule-Walker system `Γ_j(t) φ = ν_j(t)` ([`yw_solve`]) and the
//! Levinson-Durbin recursion ([`levinson_durbin`]), which yields every
//! partial autocorrelation `ρ_1..ρ_J` in one O(J²) pass.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative pivot threshold: factorizations fail once a pivot drops below
/// `SINGULAR_REL_TOL · γ(t,0)`.
pub const SINGULAR_REL_TOL: f64 = 1e-12;

/// Local autocovariance `γ(t, k)` of a locally stationary process.
#[derive(Clone)]
pub struct AcfFunction {
    gamma: Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>,
    max_lag: Option<usize>,
}

impl fmt::Debug for AcfFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AcfFunction")
            .field("max_lag", &self.max_lag)
            .finish_non_exhaustive()
    }
}

impl AcfFunction {
    pub fn new(gamma: impl Fn(f64, usize) -> f64 + Send + Sync + 'static) -> Self {
        AcfFunction {
            gamma: Arc::new(gamma),
            max_lag: None,
        }
    }

    /// Time-invariant autocovariance given as `γ_0, γ_1, …`; lags past the
    /// end of the slice are zero.
    pub fn stationary(gamma: Vec<f64>) -> Self {
        AcfFunction {
            gamma: Arc::new(move |_, k| gamma.get(k).copied().unwrap_or(0.0)),
            max_lag: None,
        }
    }

    /// Caps the lags that may be queried.
    pub fn with_max_lag(mut self, max_lag: usize) -> Self {
        self.max_lag = Some(max_lag);
        self
    }

    pub fn max_lag(&self) -> Option<usize> {
        self.max_lag
    }

    pub fn gamma(&self, t: f64, k: usize) -> f64 {
        (self.gamma)(t, k)
    }

    /// `γ(t, 0..=lags)`.
    pub fn sequence(&self, t: f64, lags: usize) -> Result<Vec<f64>> {
        if let Some(max) = self.max_lag {
            if lags > max {
                return Err(Error::invalid(format!(
                    "lag {lags} exceeds the usable maximum {max}"
                )));
            }
        }
        Ok((0..=lags).map(|k| self.gamma(t, k)).collect())
    }

    /// Multiplies the autocovariance by `lambda`.
    pub fn scaled(&self, lambda: f64) -> AcfFunction {
        let inner = self.gamma.clone();
        AcfFunction {
            gamma: Arc::new(move |t, k| lambda * inner(t, k)),
            max_lag: self.max_lag,
        }
    }
}

/// Local PACF `ρ_j(t)` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacfCurve {
    pub lag: usize,
    pub t: Vec<f64>,
    pub rho: Vec<f64>,
}

/// Solves `Γ_j(t) φ = ν_j(t)` with `Γ_j^{(k,l)} = γ(t,|k−l|)` and
/// `ν_j^{(k)} = γ(t,k)`, by Cholesky factorization.
pub fn yw_solve(acf: &AcfFunction, t: f64, j: usize) -> Result<Vec<f64>> {
    if j == 0 {
        return Err(Error::invalid("Yule-Walker order must be at least 1"));
    }
    let gamma = acf.sequence(t, j)?;
    toeplitz_cholesky_solve(&gamma)
}

/// Cholesky solve of the order-`γ.len()−1` Yule-Walker system.
pub(crate) fn toeplitz_cholesky_solve(gamma: &[f64]) -> Result<Vec<f64>> {
    let j = gamma.len() - 1;
    let g0 = gamma[0];
    if !(g0 > 0.0) {
        return Err(Error::singular("γ(t,0) must be positive", g0));
    }
    let tol = SINGULAR_REL_TOL * g0;
    // lower-triangular L with Γ = L Lᵀ, packed row-major
    let mut l = vec![0.0; j * j];
    for r in 0..j {
        for c in 0..=r {
            let mut s = gamma[r.abs_diff(c)];
            for k in 0..c {
                s -= l[r * j + k] * l[c * j + k];
            }
            if r == c {
                if s < tol {
                    return Err(Error::singular(
                        format!("Toeplitz matrix of order {j} is not positive definite"),
                        s / g0,
                    ));
                }
                l[r * j + r] = s.sqrt();
            } else {
                l[r * j + c] = s / l[c * j + c];
            }
        }
    }
    // forward then backward substitution
    let mut y = vec![0.0; j];
    for r in 0..j {
        let s: f64 = (0..r).map(|k| l[r * j + k] * y[k]).sum();
        y[r] = (gamma[r + 1] - s) / l[r * j + r];
    }
    let mut phi = vec![0.0; j];
    for r in (0..j).rev() {
        let s: f64 = (r + 1..j).map(|k| l[k * j + r] * phi[k]).sum();
        phi[r] = (y[r] - s) / l[r * j + r];
    }
    Ok(phi)
}

/// Output of [`levinson_durbin`].
#[derive(Debug, Clone, PartialEq)]
pub struct Levinson {
    /// `ρ_1..ρ_J`.
    pub pacf: Vec<f64>,
    /// Order-J prediction coefficients `φ_{J,1..J}`.
    pub coefficients: Vec<f64>,
    /// One-step prediction error variances for orders 0..=J.
    pub innovation_variance: Vec<f64>,
}

/// Levinson-Durbin recursion on `γ_0..γ_J`.
pub fn levinson_durbin(gamma: &[f64]) -> Result<Levinson> {
    let Some(&g0) = gamma.first() else {
        return Err(Error::invalid("levinson_durbin needs at least γ_0"));
    };
    if !(g0 > 0.0) {
        return Err(Error::singular("γ_0 must be positive", g0));
    }
    let order = gamma.len() - 1;
    let tol = SINGULAR_REL_TOL * g0;
    let mut phi: Vec<f64> = Vec::with_capacity(order);
    let mut pacf = Vec::with_capacity(order);
    let mut v = vec![g0];
    let mut err = g0;
    for k in 1..=order {
        let acc: f64 = phi
            .iter()
            .enumerate()
            .map(|(i, p)| p * gamma[k - 1 - i])
            .sum();
        let kappa = (gamma[k] - acc) / err;
        let prev = phi.clone();
        for i in 0..k - 1 {
            phi[i] = prev[i] - kappa * prev[k - 2 - i];
        }
        phi.push(kappa);
        err *= 1.0 - kappa * kappa;
        if err <= tol {
            return Err(Error::singular(
                format!("prediction error variance vanished at order {k}"),
                err / g0,
            ));
        }
        pacf.push(kappa);
        v.push(err);
    }
    Ok(Levinson {
        pacf,
        coefficients: phi,
        innovation_variance: v,
    })
}

/// `ρ_j(t)` on `grid`, one Levinson-Durbin pass per grid point.
pub fn pacf_oracle(acf: &AcfFunction, lag: usize, grid: &[f64]) -> Result<PacfCurve> {
    if lag == 0 {
        return Err(Error::invalid("PACF lag must be at least 1"));
    }
    if let Some(t) = grid.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::Domain(format!("grid point {t} outside [0,1]")));
    }
    let rho = grid
        .par_iter()
        .map(|&t| {
            let gamma = acf.sequence(t, lag)?;
            Ok(levinson_durbin(&gamma)?.pacf[lag - 1])
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(PacfCurve {
        lag,
        t: grid.to_vec(),
        rho,
    })
}

/// `n` equally spaced points covering [0,1] (endpoints included).
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{model_acf, ModelSpec};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ar2_acf(a1: f64, a2: f64) -> AcfFunction {
        model_acf(&ModelSpec::stationary_ar2(a1, a2)).unwrap()
    }

    #[test]
    fn yw_examples() {
        let wn = AcfFunction::stationary(vec![1.0]);
        assert_eq!(yw_solve(&wn, 0.3, 3).unwrap(), vec![0.0; 3]);

        let phi = yw_solve(&ar2_acf(0.5, 0.3), 0.5, 2).unwrap();
        assert_abs_diff_eq!(phi[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(phi[1], 0.3, epsilon = 1e-12);

        let ma = AcfFunction::stationary(vec![1.25, 0.5]);
        let phi = yw_solve(&ma, 0.0, 2).unwrap();
        // [[1.25, 0.5], [0.5, 1.25]] φ = (0.5, 0) solved by Cramer's rule
        let det = 1.25 * 1.25 - 0.25;
        assert_abs_diff_eq!(phi[0], 0.5 * 1.25 / det, epsilon = 1e-12);
        assert_abs_diff_eq!(phi[1], -0.25 / det, epsilon = 1e-12);
        assert_abs_diff_eq!(phi[0], 0.47619048, epsilon = 1e-8);
        assert_abs_diff_eq!(phi[1], -0.19047619, epsilon = 1e-8);
    }

    #[test]
    fn singular_toeplitz_detected() {
        // perfectly correlated: γ ≡ 1 at all lags
        let acf = AcfFunction::stationary(vec![1.0; 5]);
        assert!(matches!(
            yw_solve(&acf, 0.0, 3),
            Err(Error::Singular { .. })
        ));
        assert!(matches!(
            levinson_durbin(&[1.0, 1.0, 1.0]),
            Err(Error::Singular { .. })
        ));
        assert!(matches!(
            levinson_durbin(&[0.0, 0.0]),
            Err(Error::Singular { .. })
        ));
        assert!(levinson_durbin(&[]).is_err());
    }

    #[test]
    fn levinson_examples() {
        let ld = levinson_durbin(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(ld.pacf, vec![0.0; 3]);

        let gamma = ar2_acf(0.5, 0.3).sequence(0.0, 3).unwrap();
        let ld = levinson_durbin(&gamma).unwrap();
        assert_abs_diff_eq!(ld.pacf[0], 0.71428571, epsilon = 1e-8);
        assert_abs_diff_eq!(ld.pacf[1], 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(ld.pacf[2], 0.0, epsilon = 1e-12);

        let ld = levinson_durbin(&[1.25, 0.5, 0.0]).unwrap();
        assert_abs_diff_eq!(ld.pacf[0], 0.4, epsilon = 1e-12);
        let theta: f64 = 0.5;
        let rho2 = -theta.powi(2) / (1.0 + theta.powi(2) + theta.powi(4));
        assert_abs_diff_eq!(ld.pacf[1], rho2, epsilon = 1e-12);
    }

    #[test]
    fn oracle_curves() {
        let grid = uniform_grid(101);
        let acf = model_acf(&ModelSpec::tv_ar2(0.5, 0.0)).unwrap();
        let c1 = pacf_oracle(&acf, 1, &grid).unwrap();
        for (t, r) in c1.t.iter().zip(&c1.rho) {
            assert_abs_diff_eq!(
                *r,
                0.5 * (2.0 * std::f64::consts::PI * t).sin(),
                epsilon = 1e-12
            );
        }
        let c3 = pacf_oracle(&acf, 3, &grid).unwrap();
        assert!(c3.rho.iter().all(|r| r.abs() < 1e-12));

        let acf = model_acf(&ModelSpec::stationary_ar2(0.5, 0.3)).unwrap();
        let c2 = pacf_oracle(&acf, 2, &grid).unwrap();
        assert!(c2.rho.iter().all(|r| (r - 0.3).abs() < 1e-12));

        assert!(pacf_oracle(&acf, 1, &[1.2]).is_err());
        assert!(pacf_oracle(&acf, 0, &grid).is_err());
    }

    #[test]
    fn ma1_pacf_decays_monotonically() {
        for &delta in &[0.2, 0.5] {
            for stationary in [true, false] {
                let spec = if stationary {
                    ModelSpec::stationary_ma1(delta)
                } else {
                    ModelSpec::tv_ma1(delta)
                };
                let acf = model_acf(&spec).unwrap();
                for &t in &[0.1, 0.3, 0.6] {
                    let ld = levinson_durbin(&acf.sequence(t, 15).unwrap()).unwrap();
                    for w in ld.pacf.windows(2) {
                        assert!(w[1].abs() <= w[0].abs() + 1e-15);
                    }
                }
            }
        }
    }

    /// Autocovariance of a causal AR(p) from its truncated MA(∞) weights.
    fn ar_acf_by_psi(a: &[f64], lags: usize) -> Vec<f64> {
        let terms = 4000;
        let mut psi = vec![0.0; terms];
        psi[0] = 1.0;
        for i in 1..terms {
            psi[i] = a
                .iter()
                .enumerate()
                .filter(|(k, _)| *k < i)
                .map(|(k, ak)| ak * psi[i - k - 1])
                .sum();
        }
        (0..=lags)
            .map(|k| (0..terms - k).map(|i| psi[i] * psi[i + k]).sum())
            .collect()
    }

    proptest! {
        #[test]
        fn routes_agree_and_cut_off(r1 in -0.8f64..0.8, r2 in -0.8f64..0.8, r3 in -0.8f64..0.8) {
            // AR(3) with real roots r1..r3 inside the unit disk
            let a = [r1 + r2 + r3, -(r1 * r2 + r1 * r3 + r2 * r3), r1 * r2 * r3];
            let gamma = ar_acf_by_psi(&a, 20);
            let ld = levinson_durbin(&gamma).unwrap();
            for j in 1..=20 {
                let phi = toeplitz_cholesky_solve(&gamma[..=j]).unwrap();
                prop_assert!((phi[j - 1] - ld.pacf[j - 1]).abs() < 1e-10);
            }
            for j in 3..20 {
                prop_assert!(ld.pacf[j].abs() < 1e-10);
            }
            prop_assert!((ld.pacf[2] - a[2]).abs() < 1e-10);
        }

        #[test]
        fn scale_free(lambda in 1e-3f64..1e3, d1 in 0.0f64..0.5, d2 in 0.0f64..0.4) {
            let acf = ar2_acf(d1, d2);
            let base = levinson_durbin(&acf.sequence(0.0, 6).unwrap()).unwrap();
            let scaled = levinson_durbin(&acf.scaled(lambda).sequence(0.0, 6).unwrap()).unwrap();
            for (a, b) in base.pacf.iter().zip(&scaled.pacf) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
