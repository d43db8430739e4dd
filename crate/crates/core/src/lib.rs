//! Time-varying partial autocorrelation of locally stationary time series.
//!
//! The crate estimates the local PACF `ρ_j(t)` of a series observed on
//! rescaled time `t = i/n ∈ [0,1]` by sieve least squares, and tests
//! hypotheses about it with a Gaussian multiplier bootstrap:
//!
//! * [`basis`]: orthonormal bases on [0,1] (Legendre, Fourier, Chebyshev).
//! * [`simulate`]: time-varying AR(2)/MA(1) benchmark generators.
//! * [`oracle`]: exact local PACFs from an analytic autocovariance.
//! * [`sieve`]: the stacked OLS fit, PACF curves, residuals and forecasts.
//! * [`infer`]: significance, white-noise and constancy tests.
//! * [`tune`]: data-driven choice of basis size, block size and lags.
//!
//! ```
//! use lspacf::basis::{make_basis, BasisFamily};
//! use lspacf::simulate::{simulate, ModelSpec};
//! use lspacf::sieve;
//!
//! let x = simulate(&ModelSpec::tv_ar2(0.5, 0.0), 800, 1)?;
//! let basis = make_basis(BasisFamily::Legendre, 4)?;
//! let fit = sieve::fit(&x, 1, &basis)?;
//! // ρ_1(t) = 0.5 sin(2πt) peaks at t = 1/4
//! assert!(fit.eval_pacf(0.25)? > 0.3);
//! # Ok::<(), lspacf::Error>(())
//! ```

// `!(x > 0.0)` style checks are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod error;
pub mod infer;
pub mod oracle;
pub mod quadrature;
pub mod sieve;
pub mod simulate;
pub mod tune;

pub use basis::{BasisFamily, BasisSet};
pub use error::{Error, Result};
pub use infer::{BootstrapConfig, TestKind, TestResult};
pub use oracle::{AcfFunction, PacfCurve};
pub use sieve::{DesignMatrix, SieveFit};
pub use simulate::{ModelSpec, TimeSeries};
pub use tune::TuningRecord;
