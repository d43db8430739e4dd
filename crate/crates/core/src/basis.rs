//! Orthonormal sieve bases on [0,1].
//!
//! Every family starts with the constant function `α_1 ≡ 1`, so the first
//! coefficient of a fitted curve is its mean over [0,1]. Legendre and Fourier
//! are orthonormal in closed form; Chebyshev polynomials are orthonormalized
//! numerically (modified Gram-Schmidt against the 10,001-node trapezoid rule)
//! and the result is cached per size.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisFamily {
    Legendre,
    Fourier,
    Chebyshev,
}

impl BasisFamily {
    pub const ALL: [BasisFamily; 3] = [
        BasisFamily::Legendre,
        BasisFamily::Fourier,
        BasisFamily::Chebyshev,
    ];

    /// Whether orthonormality holds in closed form, so that `∫ (Σ b_k α_k)² = |b|²`.
    pub fn is_exactly_orthonormal(self) -> bool {
        !matches!(self, BasisFamily::Chebyshev)
    }

    pub fn name(self) -> &'static str {
        match self {
            BasisFamily::Legendre => "legendre",
            BasisFamily::Fourier => "fourier",
            BasisFamily::Chebyshev => "chebyshev",
        }
    }
}

impl fmt::Display for BasisFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BasisFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "legendre" => Ok(BasisFamily::Legendre),
            "fourier" => Ok(BasisFamily::Fourier),
            "chebyshev" => Ok(BasisFamily::Chebyshev),
            other => Err(Error::invalid(format!("unknown basis family `{other}`"))),
        }
    }
}

/// The first `c` functions of a basis family.
#[derive(Debug, Clone)]
pub struct BasisSet {
    family: BasisFamily,
    c: usize,
    /// Row k holds the coefficients of α_{k+1} in the Chebyshev polynomials
    /// T_0..T_k of `2t − 1`. Only set for the Chebyshev family.
    chebyshev: Option<Arc<Vec<Vec<f64>>>>,
}

/// Builds the basis `α_1..α_c` of `family`.
pub fn make_basis(family: BasisFamily, c: usize) -> Result<BasisSet> {
    BasisSet::new(family, c)
}

impl BasisSet {
    pub fn new(family: BasisFamily, c: usize) -> Result<Self> {
        if c == 0 {
            return Err(Error::invalid("basis size c must be at least 1"));
        }
        let chebyshev = match family {
            BasisFamily::Chebyshev => Some(chebyshev_coefficients(c)),
            _ => None,
        };
        Ok(BasisSet {
            family,
            c,
            chebyshev,
        })
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    /// Number of basis functions.
    pub fn size(&self) -> usize {
        self.c
    }

    /// Evaluates `B(t) = (α_1(t), …, α_c(t))`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!(
                "basis evaluated at t = {t} outside [0,1]"
            )));
        }
        let mut out = vec![0.0; self.c];
        self.eval_into(t, &mut out);
        Ok(out)
    }

    /// Unchecked evaluation into `out[..c]`. `t` should lie in [0,1].
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let out = &mut out[..self.c];
        match self.family {
            BasisFamily::Legendre => {
                let x = 2.0 * t - 1.0;
                let (mut prev, mut cur) = (1.0, x);
                out[0] = 1.0;
                for (k, slot) in out.iter_mut().enumerate().skip(1) {
                    // cur = P_k(x)
                    *slot = ((2 * k + 1) as f64).sqrt() * cur;
                    let next = ((2 * k + 1) as f64 * x * cur - k as f64 * prev) / (k + 1) as f64;
                    prev = cur;
                    cur = next;
                }
            }
            BasisFamily::Fourier => {
                out[0] = 1.0;
                for (idx, v) in out.iter_mut().enumerate().skip(1) {
                    let freq = idx.div_ceil(2) as f64;
                    let arg = 2.0 * PI * freq * t;
                    *v = if idx % 2 == 1 {
                        SQRT_2 * arg.cos()
                    } else {
                        SQRT_2 * arg.sin()
                    };
                }
            }
            BasisFamily::Chebyshev => {
                let coeffs = self.chebyshev.as_ref().expect("chebyshev coefficients");
                let x = 2.0 * t - 1.0;
                let mut cheb = vec![0.0; self.c];
                chebyshev_t(x, &mut cheb);
                for (k, row) in coeffs.iter().enumerate().take(self.c) {
                    out[k] = row.iter().zip(&cheb).map(|(a, b)| a * b).sum();
                }
            }
        }
    }

    /// Evaluates the basis at `t_i = i / n` for each index in `indices`,
    /// returned row-major (`indices.len() × c`).
    pub fn eval_rescaled(&self, indices: impl Iterator<Item = usize>, n: usize) -> Vec<f64> {
        let mut rows = Vec::new();
        let mut buf = vec![0.0; self.c];
        for i in indices {
            self.eval_into(i as f64 / n as f64, &mut buf);
            rows.extend_from_slice(&buf);
        }
        rows
    }

    /// Sup-norm constants over an equally spaced grid of `grid_size` points:
    /// `ξ_c = max_t max_k |α_k(t)|` and `ζ_c = max_t |B(t)|`.
    pub fn sup_norms(&self, grid_size: usize) -> Result<(f64, f64)> {
        if grid_size < 2 {
            return Err(Error::invalid("sup-norm grid needs at least two points"));
        }
        let mut buf = vec![0.0; self.c];
        let (mut xi, mut zeta) = (0.0f64, 0.0f64);
        for i in 0..grid_size {
            self.eval_into(i as f64 / (grid_size - 1) as f64, &mut buf);
            let max_abs = buf.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let norm = buf.iter().map(|v| v * v).sum::<f64>().sqrt();
            xi = xi.max(max_abs);
            zeta = zeta.max(norm);
        }
        Ok((xi, zeta))
    }
}

/// Free-function form of [`BasisSet::eval`].
pub fn eval_basis(b: &BasisSet, t: f64) -> Result<Vec<f64>> {
    b.eval(t)
}

/// Free-function form of [`BasisSet::sup_norms`].
pub fn basis_sup_norms(b: &BasisSet, grid_size: usize) -> Result<(f64, f64)> {
    b.sup_norms(grid_size)
}

/// T_0(x), …, T_{len−1}(x).
fn chebyshev_t(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 2..out.len() {
        out[k] = 2.0 * x * out[k - 1] - out[k - 2];
    }
}

/// Coefficients of the orthonormalized elements in the T_k basis, per basis size.
type ChebyshevCache = Mutex<HashMap<usize, Arc<Vec<Vec<f64>>>>>;

fn chebyshev_coefficients(c: usize) -> Arc<Vec<Vec<f64>>> {
    static CACHE: OnceLock<ChebyshevCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&c) {
        return hit.clone();
    }
    let computed = Arc::new(orthonormalize_chebyshev(c));
    cache.lock().unwrap().entry(c).or_insert(computed).clone()
}

/// Modified Gram-Schmidt (two passes) of T_0..T_{c−1}(2t−1) under the
/// trapezoid inner product; tracks each result's coefficients in the T basis.
fn orthonormalize_chebyshev(c: usize) -> Vec<Vec<f64>> {
    let (nodes, weights) = quadrature::trapezoid_rule(quadrature::FINE_GRID);
    let npts = nodes.len();
    let mut samples = vec![vec![0.0; npts]; c];
    let mut tmp = vec![0.0; c];
    for (i, &t) in nodes.iter().enumerate() {
        chebyshev_t(2.0 * t - 1.0, &mut tmp);
        for k in 0..c {
            samples[k][i] = tmp[k];
        }
    }
    let inner = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .zip(&weights)
            .map(|((x, y), w)| x * y * w)
            .sum()
    };

    let mut q: Vec<Vec<f64>> = Vec::with_capacity(c);
    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(c);
    for k in 0..c {
        let mut v = samples[k].clone();
        let mut coef = vec![0.0; c];
        coef[k] = 1.0;
        for _pass in 0..2 {
            for (qj, cj) in q.iter().zip(&coeffs) {
                let proj = inner(&v, qj);
                for (vi, qi) in v.iter_mut().zip(qj) {
                    *vi -= proj * qi;
                }
                for (a, b) in coef.iter_mut().zip(cj) {
                    *a -= proj * b;
                }
            }
        }
        let norm = inner(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        coef.iter_mut().for_each(|x| *x /= norm);
        q.push(v);
        coeffs.push(coef);
    }
    for row in coeffs.iter_mut() {
        // Coefficients past the diagonal are exactly zero; keep only T_0..T_k.
        let last = row.iter().rposition(|v| *v != 0.0).unwrap_or(0);
        row.truncate(last + 1);
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gram(b: &BasisSet) -> Vec<Vec<f64>> {
        gram_with(b, quadrature::trapezoid_rule(quadrature::FINE_GRID))
    }

    fn gram_with(b: &BasisSet, (nodes, weights): (Vec<f64>, Vec<f64>)) -> Vec<Vec<f64>> {
        let c = b.size();
        let mut g = vec![vec![0.0; c]; c];
        let mut buf = vec![0.0; c];
        for (t, w) in nodes.iter().zip(&weights) {
            b.eval_into(*t, &mut buf);
            for j in 0..c {
                for k in 0..c {
                    g[j][k] += w * buf[j] * buf[k];
                }
            }
        }
        g
    }

    #[test]
    fn zero_size_rejected() {
        assert!(matches!(
            make_basis(BasisFamily::Legendre, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn closed_form_values() {
        let l1 = make_basis(BasisFamily::Legendre, 1).unwrap();
        assert_eq!(l1.eval(0.77).unwrap(), vec![1.0]);

        let l2 = make_basis(BasisFamily::Legendre, 2).unwrap();
        let v = l2.eval(0.5).unwrap();
        assert_abs_diff_eq!(v[0], 1.0);
        assert_abs_diff_eq!(v[1], 0.0, epsilon = 1e-15);
        let v = l2.eval(1.0).unwrap();
        assert_abs_diff_eq!(v[1], 3f64.sqrt(), epsilon = 1e-14);

        let l3 = make_basis(BasisFamily::Legendre, 3).unwrap();
        let v = l3.eval(0.0).unwrap();
        assert_abs_diff_eq!(v[0], 1.0);
        assert_abs_diff_eq!(v[1], -(3f64.sqrt()), epsilon = 1e-14);
        assert_abs_diff_eq!(v[2], 5f64.sqrt(), epsilon = 1e-14);

        let f3 = make_basis(BasisFamily::Fourier, 3).unwrap();
        let v = f3.eval(0.25).unwrap();
        assert_abs_diff_eq!(v[0], 1.0);
        assert_abs_diff_eq!(v[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v[2], 2f64.sqrt(), epsilon = 1e-14);

        for fam in BasisFamily::ALL {
            let b = make_basis(fam, 1).unwrap();
            assert_abs_diff_eq!(b.eval(0.37).unwrap()[0], 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn domain_checked() {
        let b = make_basis(BasisFamily::Fourier, 4).unwrap();
        assert!(matches!(b.eval(-0.01), Err(Error::Domain(_))));
        assert!(matches!(b.eval(1.5), Err(Error::Domain(_))));
    }

    fn max_gram_error(g: &[Vec<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, row) in g.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    #[test]
    fn orthonormal_up_to_thirty() {
        // Fourier is integrated exactly by the periodic trapezoid rule and
        // Chebyshev is orthonormalized on that very grid.
        for fam in [BasisFamily::Fourier, BasisFamily::Chebyshev] {
            let b = make_basis(fam, 30).unwrap();
            assert!(max_gram_error(&gram(&b)) <= 1e-6, "{fam}");
        }
        // Legendre products are polynomials of degree ≤ 58: a 30-node Gauss
        // rule is exact.
        let b = make_basis(BasisFamily::Legendre, 30).unwrap();
        let g = gram_with(&b, quadrature::gauss_legendre_rule(30));
        assert!(max_gram_error(&g) <= 1e-12);
    }

    #[test]
    fn legendre_trapezoid_error_is_the_endpoint_term() {
        // Euler–Maclaurin: trapezoid − ∫f ≈ h²/12 (f'(1) − f'(0)). With
        // α_k(1) = √(2k+1) and α_k'(1) = √(2k+1)·k(k+1), f = α_k² has
        // f'(1) = 2(2k+1)·k(k+1).
        let h = 1.0 / (quadrature::FINE_GRID - 1) as f64;
        let b = make_basis(BasisFamily::Legendre, 30).unwrap();
        let g = gram(&b);
        for k in [3usize, 12, 29] {
            let kk = k as f64;
            let slope_at_one = 2.0 * (2.0 * kk + 1.0) * kk * (kk + 1.0);
            // f'(0) = −f'(1) since α_k² is symmetric about 1/2
            let predicted = h * h / 12.0 * 2.0 * slope_at_one;
            let observed = g[k][k] - 1.0;
            assert!((observed - predicted).abs() < 1e-3 * predicted, "k={k}");
        }
        assert!(max_gram_error(&g) > 1e-4);
    }

    #[test]
    fn non_constant_elements_integrate_to_zero() {
        let gauss = quadrature::gauss_legendre_rule(20);
        for fam in BasisFamily::ALL {
            let b = make_basis(fam, 12).unwrap();
            let mut buf = vec![0.0; 12];
            for k in 1..12 {
                let integral = if fam == BasisFamily::Legendre {
                    gauss
                        .0
                        .iter()
                        .zip(&gauss.1)
                        .map(|(t, w)| {
                            b.eval_into(*t, &mut buf);
                            w * buf[k]
                        })
                        .sum()
                } else {
                    quadrature::trapezoid(quadrature::FINE_GRID, |t| {
                        b.eval_into(t, &mut buf);
                        buf[k]
                    })
                };
                assert!(integral.abs() < 1e-10, "{fam} k={k}: {integral}");
            }
        }
    }

    #[test]
    fn legendre_recurrence_matches_expansion() {
        // Shifted Legendre: P_n(2t−1) = Σ_k (−1)^{n+k} C(n,k) C(n+k,k) t^k.
        fn binom(n: u64, k: u64) -> f64 {
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        }
        let b = make_basis(BasisFamily::Legendre, 10).unwrap();
        let mut buf = vec![0.0; 10];
        for step in 0..=50 {
            let t = step as f64 / 50.0;
            b.eval_into(t, &mut buf);
            for n in 0..10u64 {
                let terms: Vec<f64> = (0..=n)
                    .map(|k| {
                        let sign = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
                        sign * binom(n, k) * binom(n + k, k) * t.powi(k as i32)
                    })
                    .collect();
                let norm = ((2 * n + 1) as f64).sqrt();
                let direct = terms.iter().sum::<f64>() * norm;
                // the expansion cancels heavily; scale by its term magnitudes
                let mag = terms.iter().map(|v| v.abs()).sum::<f64>() * norm;
                assert!(
                    (buf[n as usize] - direct).abs() < 1e-14 * mag.max(1.0),
                    "n={n} t={t}"
                );
            }
        }
    }

    #[test]
    fn sup_norms() {
        let f = make_basis(BasisFamily::Fourier, 9).unwrap();
        let (xi, zeta) = f.sup_norms(10_001).unwrap();
        assert_abs_diff_eq!(xi, SQRT_2, epsilon = 1e-6);
        assert!(xi <= zeta);

        let l = make_basis(BasisFamily::Legendre, 3).unwrap();
        let (xi, _) = l.sup_norms(10_001).unwrap();
        assert_abs_diff_eq!(xi, 5f64.sqrt(), epsilon = 1e-6);

        for fam in BasisFamily::ALL {
            let b = make_basis(fam, 1).unwrap();
            let (xi, zeta) = b.sup_norms(17).unwrap();
            assert_abs_diff_eq!(xi, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(zeta, 1.0, epsilon = 1e-12);
        }
        assert!(l.sup_norms(1).is_err());
    }

    #[test]
    fn parse_family() {
        assert_eq!(
            "Fourier".parse::<BasisFamily>().unwrap(),
            BasisFamily::Fourier
        );
        assert!("daubechies".parse::<BasisFamily>().is_err());
    }
}
