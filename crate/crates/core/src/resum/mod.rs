//! Total perturbation correction from a divergent correction series.
//!
//! Two routes are provided: optimal truncation at the term of least magnitude,
//! and Borel summation in which the Borel transform is continued past its
//! circle of convergence by a conformal map and integrated along the
//! positive axis.

mod conformal;
mod gamma;
mod quadrature;
mod singularity;

use rug::{Float, Rational};
use serde::Serialize;
use serde_json::Value;

pub use conformal::{conformal_reexpand, ConformalMap};
pub use gamma::{factorial, gamma_function, Gamma};
pub use quadrature::{integrate_adaptive, GaussLegendre, Quadrature};
pub use singularity::{
    borel_coefficients, estimate_singularity, SingularityEstimate, AGREEMENT, MIN_TERMS,
};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::OscillatorKind;
use crate::scalar::{bits_for_digits, ArithMode, DEFAULT_DIGITS};
use crate::series::CorrectionSeries;

pub const DEFAULT_EPSILON: f64 = 0.001;
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;
/// Relative change between successive partial sums regarded as stable.
pub const STABLE_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct BorelConfig {
    /// Borel exponent; the transform divides `E_j` by `Γ(j/γ + 1)`.
    pub gamma: Rational,
    pub r_c: f64,
    /// Singularity exponent, carried for reporting only.
    pub p_exp: Option<f64>,
    pub epsilon: f64,
    pub n_c: usize,
    pub quad_tol: f64,
}

impl BorelConfig {
    pub fn new(gamma: Rational, r_c: f64, n_c: usize) -> Self {
        BorelConfig {
            gamma,
            r_c,
            p_exp: None,
            epsilon: DEFAULT_EPSILON,
            n_c,
            quad_tol: DEFAULT_QUAD_TOL,
        }
    }

    /// Radius and exponent taken from the ratio estimator on all available
    /// orders of `series`.
    pub fn estimated(
        series: &CorrectionSeries,
        gamma: Rational,
        n_c: usize,
    ) -> Result<(Self, SingularityEstimate)> {
        let b = borel_coefficients(series, &gamma, series.max_order(), working_bits(series))?;
        let est = estimate_singularity(&b)?;
        let mut cfg = BorelConfig::new(gamma, est.r_c, n_c);
        cfg.p_exp = Some(est.p_exp);
        Ok((cfg, est))
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma <= 0 {
            return Err(Error::Domain(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.r_c.is_finite() && self.r_c > 0.0) {
            return Err(Error::Domain(format!(
                "r_c must be positive, got {}",
                self.r_c
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Domain(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.n_c < 2 {
            return Err(Error::Domain(format!(
                "N_c must be at least 2, got {}",
                self.n_c
            )));
        }
        if !(self.quad_tol > 0.0 && self.quad_tol < 1.0) {
            return Err(Error::Domain(format!(
                "quadrature tolerance must lie in (0, 1), got {}",
                self.quad_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "mot")]
    OptimalTruncation,
    #[serde(rename = "borel")]
    Borel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummationResult {
    pub method: Method,
    pub kind: OscillatorKind,
    pub g: f64,
    pub xi: f64,
    pub gamma: Option<f64>,
    pub r_c: Option<f64>,
    pub p_exp: Option<f64>,
    /// `N₀` for truncation, `N_c` for Borel.
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "delta_E")]
    pub delta_e: f64,
    #[serde(rename = "E_tot")]
    pub e_tot: f64,
    pub converged: bool,
    pub error_estimate: f64,
    #[serde(skip)]
    pub e0: f64,
    /// `(N, (ΔE)_N)` for `N = 2..=N_c` (Borel only).
    #[serde(skip)]
    pub partial_sums: Vec<(usize, f64)>,
}

impl SummationResult {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("summary serializes")
    }

    /// Turns an unstable partial-sum sequence into an error.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            return Ok(self);
        }
        let step = self.last_relative_step().unwrap_or(f64::NAN);
        Err(Error::Convergence(format!(
            "partial sums changed by {step:.2e} (relative) at N = {}; raise N_c",
            self.n
        )))
    }

    /// `|(ΔE)_N − (ΔE)_{N−1}| / |(ΔE)_N|` at the last `N`.
    pub fn last_relative_step(&self) -> Option<f64> {
        let n = self.partial_sums.len();
        if n < 2 {
            return None;
        }
        let (a, b) = (self.partial_sums[n - 2].1, self.partial_sums[n - 1].1);
        Some(relative_step(a, b))
    }
}

fn relative_step(prev: f64, cur: f64) -> f64 {
    if prev == cur {
        0.0
    } else {
        (cur - prev).abs() / cur.abs()
    }
}

fn working_bits(series: &CorrectionSeries) -> u32 {
    match series.mode() {
        ArithMode::Exact => bits_for_digits(DEFAULT_DIGITS),
        ArithMode::Extended { digits } => bits_for_digits(digits),
    }
}

fn base_result(series: &CorrectionSeries, method: Method) -> SummationResult {
    let e0 = series.e0().to_f64();
    SummationResult {
        method,
        kind: series.spec.kind,
        g: series.spec.g_f64(),
        xi: crate::scalar::rational_to_f64(&series.spec.xi()),
        gamma: None,
        r_c: None,
        p_exp: None,
        n: 0,
        delta_e: 0.0,
        e_tot: e0,
        converged: true,
        error_estimate: 0.0,
        e0,
        partial_sums: Vec::new(),
    }
}

/// Index of the term of least magnitude among `E_k`, `k ≥ 2`: the first `k`
/// with `|E_{k+1}| > |E_k|`.
pub fn least_term_index(series: &CorrectionSeries) -> Result<usize> {
    let e = series.corrections();
    (2..series.max_order())
        .find(|&k| e[k + 1].cmp_abs(&e[k]).is_gt())
        .ok_or(Error::NoTlm {
            orders: series.max_order(),
        })
}

/// `Σ_{k=0}^{N₀} E_k` with `N₀` the term of least magnitude. The error
/// estimate is the magnitude of that term.
pub fn optimal_truncation(series: &CorrectionSeries) -> Result<SummationResult> {
    let n0 = least_term_index(series)?;
    let bits = working_bits(series);
    let e = series.corrections();
    let delta = e[1..=n0]
        .iter()
        .fold(Float::new(bits), |acc, x| acc + x.to_float(bits));
    let mut out = base_result(series, Method::OptimalTruncation);
    out.n = n0;
    out.delta_e = delta.to_f64();
    out.e_tot = (delta + e[0].to_float(bits)).to_f64();
    out.error_estimate = e[n0].to_f64().abs();
    Ok(out)
}

/// Conformal-map Borel sum with the default execution policy.
pub fn borel_sum(series: &CorrectionSeries, cfg: &BorelConfig) -> Result<SummationResult> {
    borel_sum_with(series, cfg, Execution::default())
}

/// `(ΔE)_N = ∫_0^{1−ε} f_N(z) dz` for `N = 2..=N_c`, where
/// `f_N(z) = γρ (1+z)/(1−z)³ u^{γ−1} exp(−u^γ) Σ_{k≤N} B_k z^k`,
/// `u = ρz/(1−z)²` and `ρ = 4 r_c`.
///
/// The partial sums are evaluated independently under `exec`. `ΔE` is the
/// value at `N_c`, and `converged` records whether the final step changed
/// it by less than one part in 10⁶.
pub fn borel_sum_with(
    series: &CorrectionSeries,
    cfg: &BorelConfig,
    exec: Execution,
) -> Result<SummationResult> {
    cfg.validate()?;
    let bits = working_bits(series);
    let b = borel_coefficients(series, &cfg.gamma, cfg.n_c, bits)?;
    let map = ConformalMap::new(cfg.r_c);
    let rho = Float::with_val(bits, 4) * cfg.r_c;
    let big_b: Vec<f64> = conformal_reexpand(&b, &rho, cfg.n_c)
        .iter()
        .map(Float::to_f64)
        .collect();
    let gamma = crate::scalar::rational_to_f64(&cfg.gamma);

    let orders: Vec<usize> = (2..=cfg.n_c).collect();
    let sums = exec.map(&orders, |&n| borel_integral(&big_b[..n], &map, gamma, cfg));
    let mut partial_sums = Vec::with_capacity(sums.len());
    let mut last_error = 0.0;
    for (n, q) in orders.iter().zip(sums) {
        let q = q?;
        partial_sums.push((*n, q.value));
        last_error = q.error;
    }

    let delta = partial_sums.last().map_or(0.0, |p| p.1);
    let mut out = base_result(series, Method::Borel);
    out.gamma = Some(gamma);
    out.r_c = Some(cfg.r_c);
    out.p_exp = cfg.p_exp;
    out.n = cfg.n_c;
    out.delta_e = delta;
    out.e_tot = out.e0 + delta;
    out.error_estimate = last_error;
    out.partial_sums = partial_sums;
    out.converged = out.last_relative_step().is_some_and(|s| s < STABLE_STEP);
    Ok(out)
}

/// One Borel partial sum for the re-expanded coefficients `big_b` (element
/// `i` is `B_{i+1}`).
pub fn borel_integral(
    big_b: &[f64],
    map: &ConformalMap,
    gamma: f64,
    cfg: &BorelConfig,
) -> Result<Quadrature> {
    if big_b.iter().all(|&c| c == 0.0) {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
        });
    }
    let rho = map.rho();
    let integrand = |z: f64| {
        if z <= 0.0 {
            return 0.0;
        }
        let w = 1.0 - z;
        let u = rho * z / (w * w);
        let ug = u.powf(gamma);
        let weight = (-ug).exp();
        if weight == 0.0 {
            return 0.0;
        }
        let poly = big_b.iter().rev().fold(0.0, |acc, c| (acc + c) * z);
        gamma * rho * (1.0 + z) / (w * w * w) * (ug / u) * weight * poly
    };
    // The weight u^{γ-1} exp(-u^γ) turns over where u^γ ≈ γ.
    let top = 1.0 - cfg.epsilon;
    let peak = map.z(gamma.powf(1.0 / gamma));
    let mut points = vec![0.0, top];
    for p in [0.5 * peak, peak, 0.5 * (peak + top)] {
        if p > 0.0 && p < top {
            points.push(p);
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    integrate_adaptive(&integrand, &points, cfg.quad_tol, Execution::Sequential)
}

/// `ΔE` at `N_c` for each trial radius, to check for a plateau in `r_c`.
pub fn scan_radius(
    series: &CorrectionSeries,
    cfg: &BorelConfig,
    radii: &[f64],
    exec: Execution,
) -> Vec<(f64, Result<f64>)> {
    let results = exec.map(radii, |&r| {
        let mut c = cfg.clone();
        c.r_c = r;
        borel_sum_with(series, &c, Execution::Sequential).map(|s| s.delta_e)
    });
    radii.iter().copied().zip(results).collect()
}
