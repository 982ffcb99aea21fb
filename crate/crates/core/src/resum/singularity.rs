//! Borel coefficients and ratio estimates of the nearest Borel-plane
//! singularity.

use rug::{Float, Rational};
use serde::Serialize;

use super::gamma::Gamma;
use crate::error::{Error, Result};
use crate::series::CorrectionSeries;

/// Minimum run of nonzero coefficients from `b_2` on.
pub const MIN_TERMS: usize = 6;
/// Three successive estimates must agree to this relative spread.
pub const AGREEMENT: f64 = 0.01;

/// `b_j = E_j / Γ(j/γ + 1)` for `j = 1..=count`, at precision `bits`.
/// Element `i` of the result is `b_{i+1}`.
pub fn borel_coefficients(
    series: &CorrectionSeries,
    gamma: &Rational,
    count: usize,
    bits: u32,
) -> Result<Vec<Float>> {
    if *gamma <= 0 {
        return Err(Error::Domain(format!(
            "Borel exponent must be positive, got {gamma}"
        )));
    }
    if series.max_order() < count {
        return Err(Error::InsufficientTerms {
            needed: count,
            got: series.max_order(),
        });
    }
    let gamma_fn = Gamma::new(bits);
    (1..=count)
        .map(|j| {
            let arg = Rational::from(j) / gamma + 1u32;
            let denom = gamma_fn.eval_rational(&arg)?;
            Ok(series.corrections()[j].to_float(bits) / denom)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularityEstimate {
    /// Distance of the singularity from the origin; it sits at `u = −r_c`
    /// for an alternating series.
    pub r_c: f64,
    pub p_exp: f64,
    pub converged: bool,
    pub p_converged: bool,
    /// `(j, r_c(j), p(j))` for every usable `j`.
    pub estimates: Vec<(usize, f64, f64)>,
}

/// Ratio estimates of the radius and exponent of a `(u + r_c)^p` singularity.
///
/// With `d_j = j b_j² − (j+1) b_{j+1} b_{j−1}`:
/// `r_c(j) = b_j b_{j−1} / d_j` and `p(j) = (j² b_j² − (j²−1) b_{j−1} b_{j+1}) / d_j`.
/// Both are exact for the ansatz coefficients, whose consecutive ratio is
/// `(p − j)/((j+1) r_c)`. `b[i]` holds `b_{i+1}`.
///
/// Fails with `NonConvergence` unless the last three radius estimates agree
/// to 1%; the error carries the trailing estimates so the caller can pick a
/// radius by hand.
pub fn estimate_singularity(b: &[Float]) -> Result<SingularityEstimate> {
    let coef = |j: usize| &b[j - 1];
    let run = (2..=b.len()).take_while(|&j| !coef(j).is_zero()).count();
    if run < MIN_TERMS {
        return Err(Error::InsufficientTerms {
            needed: MIN_TERMS,
            got: run,
        });
    }
    let last = 1 + run; // highest j with a nonzero b_j
    let mut estimates = Vec::new();
    for j in 3..last {
        let prec = coef(j).prec();
        let bj2 = Float::with_val(prec, coef(j).square_ref());
        let cross = Float::with_val(prec, coef(j + 1) * coef(j - 1));
        let d =
            Float::with_val(prec, &bj2 * j as u32) - Float::with_val(prec, &cross * (j as u32 + 1));
        if d.is_zero() {
            continue;
        }
        let r = Float::with_val(prec, coef(j) * coef(j - 1)) / &d;
        let jj = (j * j) as u32;
        let p = (bj2 * jj - cross * (jj - 1)) / &d;
        estimates.push((j, r.to_f64(), p.to_f64()));
    }
    if estimates.len() < 3 {
        return Err(Error::InsufficientTerms {
            needed: MIN_TERMS,
            got: estimates.len(),
        });
    }
    let tail = &estimates[estimates.len() - 3..];
    let converged = agree(tail.iter().map(|e| e.1));
    let p_converged = agree(tail.iter().map(|e| e.2));
    let &(_, r_c, p_exp) = estimates.last().unwrap();
    if !converged || r_c <= 0.0 {
        let keep = estimates.len().saturating_sub(5);
        return Err(Error::NonConvergence {
            partial: estimates[keep..].to_vec(),
        });
    }
    Ok(SingularityEstimate {
        r_c,
        p_exp,
        converged,
        p_converged,
        estimates,
    })
}

fn agree(values: impl Iterator<Item = f64> + Clone) -> bool {
    let (lo, hi) = values
        .clone()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    let last = values.last().unwrap_or(f64::NAN);
    lo.is_finite() && hi.is_finite() && (hi - lo) <= AGREEMENT * last.abs()
}
