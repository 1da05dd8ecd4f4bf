//! Moments of `h(X) = X ln X` for Poisson `X`.
//!
//! Exact values come from truncated sums over the Poisson support, walked
//! outward from the mode in log space so that large means neither underflow
//! nor lose precision. Terms below `1e-18` of the modal probability are
//! dropped, which keeps the absolute error far below `1e-8` for every
//! quantity here.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Means at or above this use the asymptotic expansion of `E[X ln X]`.
/// The expansion error decays like `0.17/mu^3`, so the two branches agree
/// to better than `1e-8` here.
pub const SERIES_LIMIT: f64 = 300.0;

/// Ratio taken to mean "much greater than" when checking the validity of
/// the asymptotic moment approximations.
pub const MUCH_GREATER: f64 = 10.0;

const TAIL: f64 = 1e-18;

/// `x ln x` with `0 ln 0 = 0`.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Truncated Poisson probability mass function on `start..start+probs.len()`.
#[derive(Debug, Clone)]
pub(crate) struct Pmf {
    pub start: u64,
    pub probs: Vec<f64>,
}

impl Pmf {
    pub fn poisson(mu: f64) -> Self {
        if mu <= 0.0 {
            return Self {
                start: 0,
                probs: vec![1.0],
            };
        }
        let mode = mu.floor();
        let p_mode = (mode * mu.ln() - mu - ln_gamma(mode + 1.0)).exp();
        let floor = p_mode * TAIL;
        let mut below = Vec::new();
        let mut p = p_mode;
        let mut k = mode;
        while k > 0.0 {
            p *= k / mu;
            k -= 1.0;
            if p < floor {
                break;
            }
            below.push(p);
        }
        let mut above = Vec::new();
        let mut p = p_mode;
        let mut k = mode;
        loop {
            k += 1.0;
            p *= mu / k;
            if p < floor {
                break;
            }
            above.push(p);
        }
        let start = mode as u64 - below.len() as u64;
        let mut probs = below;
        probs.reverse();
        probs.push(p_mode);
        probs.extend(above);
        Self { start, probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(k, &p)| (self.start + k as u64, p))
    }
}

fn check_mean(mu: f64) -> Result<()> {
    if mu.is_finite() && mu >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidMean(mu))
    }
}

/// `E[X ln X]` by direct summation.
pub fn poisson_xlogx_mean_series(mu: f64) -> Result<f64> {
    check_mean(mu)?;
    Ok(series(mu))
}

fn series(mu: f64) -> f64 {
    Pmf::poisson(mu)
        .iter()
        .map(|(k, p)| p * xlogx(k as f64))
        .sum()
}

/// Four-term expansion `mu ln mu + 1/2 + 1/(12 mu) + 1/(12 mu^2)`.
pub fn poisson_xlogx_mean_taylor(mu: f64) -> Result<f64> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidMean(mu));
    }
    Ok(taylor(mu))
}

fn taylor(mu: f64) -> f64 {
    mu * mu.ln() + 0.5 + 1.0 / (12.0 * mu) + 1.0 / (12.0 * mu * mu)
}

/// `f(mu) = E[X ln X]` for `X ~ Poisson(mu)`.
pub fn poisson_xlogx_mean(mu: f64) -> Result<f64> {
    check_mean(mu)?;
    Ok(f(mu))
}

/// Unchecked `f`, for callers that already validated the mean.
#[inline]
pub(crate) fn f(mu: f64) -> f64 {
    if mu < SERIES_LIMIT {
        series(mu)
    } else {
        taylor(mu)
    }
}

/// `f(mu) - mu ln mu - 1/2`: the part of `f` beyond its two leading terms.
/// Behaves like `1/(12 mu)` for large means and equals `-1/2` at zero.
pub(crate) fn remainder(mu: f64) -> f64 {
    f(mu) - xlogx(mu) - 0.5
}

/// `(a, b, c)`: `a = var(h(X))`, `b = cov(h(X), h(X+U))`,
/// `c = cov(h(X+U), h(X+W))` for independent `X ~ Poisson(mu)`,
/// `X+U ~ Poisson(lambda)`, `X+W ~ Poisson(gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XlogxMoments {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

fn check_moment_args(mu: f64, lambda: f64, gamma: f64) -> Result<()> {
    for v in [mu, lambda, gamma] {
        check_mean(v)?;
    }
    if lambda < mu || gamma < mu {
        return Err(Error::InvalidMomentArguments {
            shared: mu,
            total: lambda.min(gamma),
        });
    }
    Ok(())
}

pub fn xlogx_moments(mu: f64, lambda: f64, gamma: f64) -> Result<XlogxMoments> {
    check_moment_args(mu, lambda, gamma)?;
    Ok(XlogxMoments {
        a: shared_cov(mu, 0.0, 0.0),
        b: shared_cov(mu, 0.0, lambda - mu),
        c: shared_cov(mu, lambda - mu, gamma - mu),
    })
}

/// `a(mu) = var(X ln X)`.
pub fn xlogx_variance(mu: f64) -> Result<f64> {
    check_mean(mu)?;
    Ok(shared_cov(mu, 0.0, 0.0))
}

/// `b(mu, lambda) = cov(X ln X, (X+U) ln (X+U))`.
pub fn xlogx_nested_cov(mu: f64, lambda: f64) -> Result<f64> {
    check_moment_args(mu, lambda, lambda)?;
    Ok(shared_cov(mu, 0.0, lambda - mu))
}

/// `c(mu, lambda, gamma) = cov((X+U) ln (X+U), (X+W) ln (X+W))`.
pub fn xlogx_shared_cov(mu: f64, lambda: f64, gamma: f64) -> Result<f64> {
    check_moment_args(mu, lambda, gamma)?;
    Ok(shared_cov(mu, lambda - mu, gamma - mu))
}

/// Degree of the Chebyshev interpolant used for wide supports.
const CHEB_DEGREE: usize = 32;

/// `H(x) = E[h(x + V)]` for `V ~ Poisson(nu)` at every `x` in the support
/// of `x_pmf`.
///
/// When both supports are wide, `H` is evaluated exactly at Chebyshev points
/// of the `x` range and interpolated. `H` is analytic away from
/// `x = -v` for `v` in the support of `V`; the interpolant is only used when
/// that singularity lies at least three half-widths from the range, where
/// the degree-32 error is below `1e-25` relative.
pub(crate) fn smoothed_xlogx(x_pmf: &Pmf, nu: f64) -> Vec<f64> {
    if nu <= 0.0 {
        return x_pmf.iter().map(|(x, _)| xlogx(x as f64)).collect();
    }
    let v = Pmf::poisson(nu);
    let lx = x_pmf.len();
    let half = (lx - 1) as f64 / 2.0;
    let clearance = (x_pmf.start + v.start) as f64;
    if lx > 2 * (CHEB_DEGREE + 1) && clearance >= 3.0 * half {
        let center = x_pmf.start as f64 + half;
        let nodes: Vec<f64> = (0..=CHEB_DEGREE)
            .map(|k| center + half * (std::f64::consts::PI * k as f64 / CHEB_DEGREE as f64).cos())
            .collect();
        let values: Vec<f64> = nodes
            .iter()
            .map(|&t| v.iter().map(|(k, p)| p * xlogx(t + k as f64)).sum())
            .collect();
        return (0..lx)
            .map(|i| barycentric(&nodes, &values, (x_pmf.start + i as u64) as f64))
            .collect();
    }
    let base = x_pmf.start + v.start;
    let h: Vec<f64> = (0..(lx + v.len()) as u64)
        .map(|k| xlogx((base + k) as f64))
        .collect();
    (0..lx)
        .map(|x| v.probs.iter().zip(&h[x..]).map(|(p, hv)| p * hv).sum())
        .collect()
}

/// Barycentric evaluation on Chebyshev points of the second kind.
fn barycentric(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let last = nodes.len() - 1;
    let (mut num, mut den) = (0.0, 0.0);
    for (k, (&t, &fv)) in nodes.iter().zip(values).enumerate() {
        let d = x - t;
        if d == 0.0 {
            return fv;
        }
        let mut w = if k % 2 == 0 { 1.0 } else { -1.0 };
        if k == 0 || k == last {
            w *= 0.5;
        }
        num += w * fv / d;
        den += w / d;
    }
    num / den
}

/// Covariance of `g1(X) = E[h(X+U)|X]` and `g2(X) = E[h(X+W)|X]` under
/// `X ~ Poisson(mu)`, `U ~ Poisson(nu_u)`, `W ~ Poisson(nu_w)`.
pub(crate) fn shared_cov(mu: f64, nu_u: f64, nu_w: f64) -> f64 {
    if mu <= 0.0 {
        return 0.0;
    }
    let x = Pmf::poisson(mu);
    let g1 = smoothed_xlogx(&x, nu_u);
    let g2 = if nu_w == nu_u {
        g1.clone()
    } else {
        smoothed_xlogx(&x, nu_w)
    };
    centered_cov(&x.probs, &g1, &g2)
}

pub(crate) fn centered_cov(p: &[f64], g1: &[f64], g2: &[f64]) -> f64 {
    let total: f64 = p.iter().sum();
    let e1 = p.iter().zip(g1).map(|(p, v)| p * v).sum::<f64>() / total;
    let e2 = p.iter().zip(g2).map(|(p, v)| p * v).sum::<f64>() / total;
    p.iter()
        .zip(g1.iter().zip(g2))
        .map(|(p, (a, b))| p * (a - e1) * (b - e2))
        .sum::<f64>()
        / total
}

/// Asymptotic moment approximations with flags telling whether their
/// validity conditions hold (`mu > 1`; `lambda, gamma >> mu` and `>> 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorMoments {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub a_valid: bool,
    pub b_valid: bool,
    pub c_valid: bool,
}

/// `cov(X, X ln X) ~ mu ln mu + mu - 1/(12 mu)`.
pub fn xlogx_cov_taylor(mu: f64) -> f64 {
    mu * mu.ln() + mu - 1.0 / (12.0 * mu)
}

pub(crate) fn a_taylor(mu: f64) -> f64 {
    let l = mu.ln();
    mu * l * l + 2.0 * mu * l + mu + 0.5 + 7.0 * l / (15.0 * mu) - 1.0 / (6.0 * mu) + l / (mu * mu)
        - 13.0 / (144.0 * mu * mu)
}

pub(crate) fn b_taylor(mu: f64, lambda: f64) -> f64 {
    (1.0 + lambda.ln()) * xlogx_cov_taylor(mu)
}

pub(crate) fn c_taylor(mu: f64, lambda: f64, gamma: f64) -> f64 {
    let (ll, lg) = (lambda.ln(), gamma.ln());
    mu * (ll * lg + ll + lg + 1.0)
}

pub(crate) fn a_valid(mu: f64) -> bool {
    mu > 1.0
}

pub(crate) fn b_valid(mu: f64, lambda: f64) -> bool {
    mu > 0.0 && lambda >= MUCH_GREATER * mu && lambda >= MUCH_GREATER
}

pub(crate) fn c_valid(mu: f64, lambda: f64, gamma: f64) -> bool {
    mu > 0.0 && lambda >= MUCH_GREATER * mu && gamma >= MUCH_GREATER * mu
}

pub fn xlogx_moments_taylor(mu: f64, lambda: f64, gamma: f64) -> Result<TaylorMoments> {
    check_moment_args(mu, lambda, gamma)?;
    if mu <= 0.0 {
        return Err(Error::InvalidMean(mu));
    }
    Ok(TaylorMoments {
        a: a_taylor(mu),
        b: b_taylor(mu, lambda),
        c: c_taylor(mu, lambda, gamma),
        a_valid: a_valid(mu),
        b_valid: b_valid(mu, lambda),
        c_valid: c_valid(mu, lambda, gamma),
    })
}
