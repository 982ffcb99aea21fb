//! Oscillator systems and their leading-order mean-field solution.
//!
//! The mean-field Hamiltonian is the harmonic approximation
//! `H0 = p²/2 + ω²x²/2 + h0`, with ω fixed by a kind-specific gap equation and
//! `h0` chosen so that `<H> = <H0>` in the harmonic state of level `n`.
//!
//! Harmonic-state moments (σ = 0):
//!
//! ```text
//! <x²> = ξ/ω,  <p²> = ωξ,  <x⁴> = 3(1+4ξ²)/(8ω²),  <x⁶> = (5/8)(ξ/ω³)(5+4ξ²)
//! ```
//!
//! These follow from `<n|(a+a†)^{2m}|n>/(2ω)^m`; they are the forms for which
//! `<H>` minimized over ω reproduces each gap equation.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{best_rational, Field, Precision, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OscillatorKind {
    /// `H = p²/2 + x²/2 + g x⁴`
    Qaho,
    /// `H = p²/2 + x²/2 + g x⁶`
    Saho,
    /// `H = p²/2 - x²/2 + g x⁴`
    Qdwo,
}

impl OscillatorKind {
    pub const ALL: [OscillatorKind; 3] = [
        OscillatorKind::Qaho,
        OscillatorKind::Saho,
        OscillatorKind::Qdwo,
    ];

    /// Anharmonic power `K` in `g x^{2K}`.
    pub fn power(self) -> usize {
        match self {
            OscillatorKind::Qaho | OscillatorKind::Qdwo => 2,
            OscillatorKind::Saho => 3,
        }
    }

    /// Coefficient of `x²/2` in the bare Hamiltonian.
    pub fn quadratic_sign(self) -> i64 {
        match self {
            OscillatorKind::Qaho | OscillatorKind::Saho => 1,
            OscillatorKind::Qdwo => -1,
        }
    }

    /// Default Borel exponent γ for resummation.
    pub fn default_gamma(self) -> Rational {
        match self {
            OscillatorKind::Qaho | OscillatorKind::Qdwo => Rational::from(1),
            OscillatorKind::Saho => Rational::from((1, 2)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OscillatorKind::Qaho => "qaho",
            OscillatorKind::Saho => "saho",
            OscillatorKind::Qdwo => "qdwo",
        }
    }
}

impl fmt::Display for OscillatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OscillatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qaho" => Ok(OscillatorKind::Qaho),
            "saho" => Ok(OscillatorKind::Saho),
            "qdwo" => Ok(OscillatorKind::Qdwo),
            _ => Err(Error::Parse(format!("unknown oscillator kind {s:?}"))),
        }
    }
}

/// Which system, at which coupling, for which level.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorSpec {
    pub kind: OscillatorKind,
    g: Rational,
    n: u32,
}

impl OscillatorSpec {
    pub fn new(kind: OscillatorKind, g: Rational, n: u32) -> Result<Self> {
        if g.cmp0() != Ordering::Greater {
            return Err(Error::Domain(format!("coupling must be positive, got {g}")));
        }
        Ok(OscillatorSpec { kind, g, n })
    }

    /// Convenience constructor from an `f64` coupling (converted exactly).
    pub fn from_f64(kind: OscillatorKind, g: f64, n: u32) -> Result<Self> {
        let g = Rational::from_f64(g)
            .ok_or_else(|| Error::Domain(format!("coupling {g} is not finite")))?;
        Self::new(kind, g, n)
    }

    pub fn ground(kind: OscillatorKind, g: Rational) -> Result<Self> {
        Self::new(kind, g, 0)
    }

    pub fn g(&self) -> &Rational {
        &self.g
    }

    pub fn g_f64(&self) -> f64 {
        crate::scalar::rational_to_f64(&self.g)
    }

    pub fn level(&self) -> u32 {
        self.n
    }

    /// Spectral parameter ξ = n + 1/2.
    pub fn xi(&self) -> Rational {
        xi_of(self.n)
    }

    /// Distance from the bottom of the potential to `V = 0`: the QDWO minima
    /// sit at `-1/(16g)`, the single wells at zero.
    pub fn well_offset(&self) -> Rational {
        match self.kind {
            OscillatorKind::Qdwo => Rational::from(1) / (Rational::from(16) * &self.g),
            _ => Rational::new(),
        }
    }

    /// Gap polynomial coefficients in ω, lowest power first.
    pub fn gap_polynomial(&self) -> Vec<Rational> {
        let xi = self.xi();
        match self.kind {
            OscillatorKind::Qaho | OscillatorKind::Qdwo => {
                let c = Rational::from(6) * &self.g * f_xi(&xi);
                let linear = Rational::from(-self.kind.quadratic_sign());
                vec![-c, linear, Rational::new(), Rational::from(1)]
            }
            OscillatorKind::Saho => {
                let five_plus = Rational::from(5) + Rational::from(4) * Rational::from(&xi * &xi);
                let c = Rational::from((15, 4)) * &self.g * five_plus;
                vec![
                    -c,
                    Rational::new(),
                    Rational::from(-1),
                    Rational::new(),
                    Rational::from(1),
                ]
            }
        }
    }
}

fn xi_of(n: u32) -> Rational {
    Rational::from((2 * i64::from(n) + 1, 2))
}

/// `f(ξ) = ξ + 1/(4ξ)`.
fn f_xi(xi: &Rational) -> Rational {
    xi + Rational::from(1) / (Rational::from(4) * xi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "AHO")]
    Aho,
    #[serde(rename = "QDWO_SR")]
    QdwoSr,
    #[serde(rename = "QDWO_SSB")]
    QdwoSsb,
}

/// Leading-order solution of the mean-field problem.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanField {
    pub omega: Scalar,
    pub h0: Scalar,
    pub sigma: Scalar,
    pub e0: Scalar,
    pub phase: Phase,
}

impl MeanField {
    pub fn is_exact(&self) -> bool {
        matches!(self.omega, Scalar::Exact(_))
    }
}

/// Critical coupling `g_c(ξ) = (2/3)^{3/2} / (3(5ξ - 1/(4ξ)))` separating the
/// QDWO phases.
pub fn critical_coupling(n: u32) -> f64 {
    critical_coupling_float(n, 128).to_f64()
}

pub fn critical_coupling_float(n: u32, prec: u32) -> Float {
    let xi = xi_of(n);
    let denom = Rational::from(3)
        * (Rational::from(5) * &xi - Rational::from(1) / (Rational::from(4) * &xi));
    let two_thirds = Float::with_val(prec, Rational::from((2, 3)));
    let num = Float::with_val(prec, two_thirds.clone().sqrt() * two_thirds);
    num / denom
}

/// Printed numerical value of the ground-state critical coupling, kept for
/// diagnostics (the formula gives ≈ 0.0907).
pub const PRINTED_GROUND_CRITICAL_COUPLING: f64 = 0.09718;

/// Solves the gap equation at the default precision.
pub fn solve_gap(spec: &OscillatorSpec) -> Result<MeanField> {
    solve_gap_with(spec, Precision::default())
}

/// Solves the gap equation. Exact mode is chosen when `precision.allow_exact`
/// is set and the positive root is rational.
pub fn solve_gap_with(spec: &OscillatorSpec, precision: Precision) -> Result<MeanField> {
    let phase = match spec.kind {
        OscillatorKind::Qaho | OscillatorKind::Saho => Phase::Aho,
        OscillatorKind::Qdwo => {
            let g_c = critical_coupling_float(spec.n, 256);
            if Float::with_val(256, spec.g()) <= g_c {
                return Err(Error::Phase {
                    g: spec.g_f64(),
                    g_c: g_c.to_f64(),
                });
            }
            Phase::QdwoSr
        }
    };

    let poly = spec.gap_polynomial();
    let omega = positive_root(&poly, precision.bits());

    if precision.allow_exact {
        if let Some(q) = best_rational(&omega, &Integer::from(10u64.pow(12))) {
            if q.cmp0() == Ordering::Greater && eval_poly(&poly, &q).is_zero() {
                return Ok(assemble(spec, q, phase));
            }
        }
    }
    Ok(assemble(spec, omega, phase))
}

/// Positive root of the gap polynomial with no phase check; for the QDWO
/// below the critical coupling this is a frequency scale only.
pub fn gap_root(spec: &OscillatorSpec, bits: u32) -> Float {
    positive_root(&spec.gap_polynomial(), bits)
}

fn assemble<T: Field>(spec: &OscillatorSpec, omega: T, phase: Phase) -> MeanField {
    let (e0, h0) = leading_energy(spec, &omega);
    let sigma = omega.zero();
    MeanField {
        omega: omega.into_scalar(),
        h0: h0.into_scalar(),
        sigma: sigma.into_scalar(),
        e0: e0.into_scalar(),
        phase,
    }
}

/// `(E0, h0)` for a given ω.
fn leading_energy<T: Field>(spec: &OscillatorSpec, omega: &T) -> (T, T) {
    let xi = omega.lift(&spec.xi());
    let inv = omega.lift_int(1).div(omega);
    match spec.kind {
        OscillatorKind::Qaho => {
            let quarter = xi.div(&omega.lift_int(4));
            let e0 = quarter.mul(&omega.lift_int(3).mul(omega).add(&inv));
            let h0 = quarter.mul(&inv.sub(omega));
            (e0, h0)
        }
        OscillatorKind::Saho => {
            let third = xi.div(&omega.lift_int(3));
            let e0 = third.mul(&omega.lift_int(2).mul(omega).add(&inv));
            let h0 = third.mul(&inv.sub(omega));
            (e0, h0)
        }
        OscillatorKind::Qdwo => {
            let quarter = xi.div(&omega.lift_int(4));
            let e0 = quarter.mul(&omega.lift_int(3).mul(omega).sub(&inv));
            let h0 = e0.sub(&omega.mul(&xi));
            (e0, h0)
        }
    }
}

fn eval_poly<T: Field>(coeffs: &[Rational], x: &T) -> T {
    let mut acc = x.zero();
    for c in coeffs.iter().rev() {
        acc = acc.mul(x).add(&x.lift(c));
    }
    acc
}

fn eval_poly_derivative<T: Field>(coeffs: &[Rational], x: &T) -> T {
    let mut acc = x.zero();
    for (k, c) in coeffs.iter().enumerate().skip(1).rev() {
        acc = acc.mul(x).add(&x.lift(&(c * Rational::from(k as i64))));
    }
    acc
}

/// The unique positive root of a gap polynomial: bisection in `f64` on the
/// bracket `[1e-6, 1 + c^{1/3} + 10]` (widened if needed), then Newton
/// polishing at `bits` of precision.
fn positive_root(coeffs: &[Rational], bits: u32) -> Float {
    let f64_coeffs: Vec<f64> = coeffs.iter().map(Rational::to_f64).collect();
    let eval = |x: f64| f64_coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
    let c = -f64_coeffs[0];
    let mut lo = 1e-6;
    let mut hi = 1.0 + c.abs().cbrt() + 10.0;
    while eval(hi) <= 0.0 {
        hi *= 2.0;
    }
    if eval(lo) > 0.0 {
        lo = 0.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eval(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let mut x = Float::with_val(bits, 0.5 * (lo + hi));
    let tol = Float::with_val(bits, 1) >> (bits as i32 - 4);
    for _ in 0..64 {
        let fx = eval_poly(coeffs, &x);
        let dfx = eval_poly_derivative(coeffs, &x);
        if dfx.is_zero() {
            break;
        }
        let step = fx.div(&dfx);
        x = x.sub(&step);
        if Float::with_val(bits, step.abs_ref()) <= Float::with_val(bits, &tol * &x) {
            // one more step to clear the last rounding
            let fx = eval_poly(coeffs, &x);
            let dfx = eval_poly_derivative(coeffs, &x);
            x = x.sub(&fx.div(&dfx));
            break;
        }
    }
    x
}

/// Value of the gap polynomial at ω (zero at the exact root).
pub fn gap_residual(spec: &OscillatorSpec, omega: &Scalar) -> Scalar {
    let poly = spec.gap_polynomial();
    match omega {
        Scalar::Exact(q) => eval_poly(&poly, q).into_scalar(),
        Scalar::Extended(f) => eval_poly(&poly, f).into_scalar(),
    }
}

/// QAHO closed form `ω = (3gf)^{1/3}[(1+√(1-ρ))^{1/3} + (1-√(1-ρ))^{1/3}]`
/// with `1/ρ = 243 g² f²`; `None` when `1 - ρ < 0` (complex radicals) or for
/// other kinds.
pub fn closed_form_omega(spec: &OscillatorSpec, bits: u32) -> Option<Float> {
    if spec.kind != OscillatorKind::Qaho {
        return None;
    }
    let gf = spec.g() * f_xi(&spec.xi());
    let inv_rho = Rational::from(243) * Rational::from(&gf * &gf);
    let one_minus_rho = Rational::from(1) - Rational::from(1) / inv_rho;
    if one_minus_rho.cmp0() == Ordering::Less {
        return None;
    }
    let root = Float::with_val(bits, &one_minus_rho).sqrt();
    let plus = Float::with_val(bits, 1 + &root).cbrt();
    let minus = Float::with_val(bits, 1 - &root).cbrt();
    let scale = Float::with_val(bits, Rational::from(3) * gf).cbrt();
    Some(scale * (plus + minus))
}

/// Harmonic-state averages in the mean-field ground of level `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub x2: Scalar,
    pub x4: Scalar,
    pub x6: Scalar,
    pub p2: Scalar,
}

pub fn moments(mf: &MeanField, spec: &OscillatorSpec) -> Moments {
    match &mf.omega {
        Scalar::Exact(w) => moments_in(w, spec),
        Scalar::Extended(w) => moments_in(w, spec),
    }
}

fn moments_in<T: Field>(omega: &T, spec: &OscillatorSpec) -> Moments {
    let [x2, x4, x6, p2] = moment_values(omega, &spec.xi());
    Moments {
        x2: x2.into_scalar(),
        x4: x4.into_scalar(),
        x6: x6.into_scalar(),
        p2: p2.into_scalar(),
    }
}

fn moment_values<T: Field>(omega: &T, xi: &Rational) -> [T; 4] {
    let xi_t = omega.lift(xi);
    let xi2 = Rational::from(xi * xi);
    let w2 = omega.mul(omega);
    let x2 = xi_t.div(omega);
    let p2 = omega.mul(&xi_t);
    let x4 = omega
        .lift(
            &(Rational::from(3) * (Rational::from(1) + Rational::from(4) * &xi2)
                / Rational::from(8)),
        )
        .div(&w2);
    let x6 = omega
        .lift(&(Rational::from((5, 8)) * xi * (Rational::from(5) + Rational::from(4) * &xi2)))
        .div(&w2.mul(omega));
    [x2, x4, x6, p2]
}

/// `<H>` assembled from the moments: `<p²>/2 ± <x²>/2 + g<x^{2K}>`.
pub fn energy_expectation(mf: &MeanField, spec: &OscillatorSpec) -> Scalar {
    match &mf.omega {
        Scalar::Exact(w) => energy_expectation_in(w, spec).into_scalar(),
        Scalar::Extended(w) => energy_expectation_in(w, spec).into_scalar(),
    }
}

fn energy_expectation_in<T: Field>(omega: &T, spec: &OscillatorSpec) -> T {
    let [x2, x4, x6, p2] = moment_values(omega, &spec.xi());
    let half = omega.lift(&Rational::from((1, 2)));
    let quad = half.mul(&omega.lift_int(spec.kind.quadratic_sign()));
    let anharmonic = if spec.kind.power() == 2 { x4 } else { x6 };
    half.mul(&p2)
        .add(&quad.mul(&x2))
        .add(&omega.lift(spec.g()).mul(&anharmonic))
}

/// `<H'> = g<x^{2K}> - (ω² ∓ 1)<x²>/2 - h0`, which vanishes by construction.
pub fn perturbation_average(mf: &MeanField, spec: &OscillatorSpec) -> Scalar {
    match (&mf.omega, &mf.h0) {
        (Scalar::Exact(w), Scalar::Exact(h)) => perturbation_average_in(w, h, spec).into_scalar(),
        (Scalar::Extended(w), Scalar::Extended(h)) => {
            perturbation_average_in(w, h, spec).into_scalar()
        }
        _ => panic!("mean field mixes arithmetic modes"),
    }
}

fn perturbation_average_in<T: Field>(omega: &T, h0: &T, spec: &OscillatorSpec) -> T {
    let [x2, x4, x6, _] = moment_values(omega, &spec.xi());
    let anharmonic = if spec.kind.power() == 2 { x4 } else { x6 };
    let shift = omega
        .mul(omega)
        .add(&omega.lift_int(-spec.kind.quadratic_sign()));
    omega
        .lift(spec.g())
        .mul(&anharmonic)
        .sub(&shift.mul(&x2).div(&omega.lift_int(2)))
        .sub(h0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn spec(kind: OscillatorKind, g: Rational) -> OscillatorSpec {
        OscillatorSpec::ground(kind, g).unwrap()
    }

    #[test]
    fn qaho_fixture_is_exact() {
        let s = spec(OscillatorKind::Qaho, q(1, 1));
        let mf = solve_gap(&s).unwrap();
        assert_eq!(mf.omega, Scalar::Exact(q(2, 1)));
        assert_eq!(mf.h0, Scalar::Exact(q(-3, 16)));
        assert_eq!(mf.e0, Scalar::Exact(q(13, 16)));
        assert_eq!(mf.phase, Phase::Aho);
        assert_eq!(mf.e0.to_f64(), 0.8125);
    }

    #[test]
    fn saho_fixture_is_exact() {
        let mf = solve_gap(&spec(OscillatorKind::Saho, q(8, 15))).unwrap();
        assert_eq!(mf.omega, Scalar::Exact(q(2, 1)));
        assert_eq!(mf.h0, Scalar::Exact(q(-1, 4)));
        assert_eq!(mf.e0, Scalar::Exact(q(3, 4)));
    }

    #[test]
    fn qdwo_fixture_is_exact() {
        let mf = solve_gap(&spec(OscillatorKind::Qdwo, q(1, 3))).unwrap();
        assert_eq!(mf.omega, Scalar::Exact(q(1, 1)));
        assert_eq!(mf.h0, Scalar::Exact(q(-1, 4)));
        assert_eq!(mf.e0, Scalar::Exact(q(1, 4)));
        assert_eq!(mf.phase, Phase::QdwoSr);
        assert!(mf.sigma.is_zero());
    }

    #[test]
    fn irrational_root_falls_back_to_float() {
        let mf = solve_gap(&spec(OscillatorKind::Qaho, q(1, 10))).unwrap();
        assert!(!mf.is_exact());
        assert!((mf.e0.to_f64() - 0.5603).abs() < 5e-5);
    }

    #[test]
    fn qdwo_below_critical_coupling_is_rejected() {
        let err = solve_gap(&spec(OscillatorKind::Qdwo, q(1, 20))).unwrap_err();
        assert!(matches!(err, Error::Phase { .. }));
        let at_09 = solve_gap(&spec(OscillatorKind::Qdwo, q(9, 100))).unwrap_err();
        assert!(matches!(at_09, Error::Phase { .. }));
        assert!(solve_gap(&spec(OscillatorKind::Qdwo, q(1, 10))).is_ok());
    }

    #[test]
    fn nonpositive_coupling_is_a_domain_error() {
        assert!(matches!(
            OscillatorSpec::new(OscillatorKind::Qaho, q(0, 1), 0),
            Err(Error::Domain(_))
        ));
        assert!(OscillatorSpec::new(OscillatorKind::Saho, q(-1, 2), 0).is_err());
    }

    #[test]
    fn critical_coupling_values() {
        let expected = (2.0f64 / 3.0).powf(1.5) / 6.0;
        assert!((critical_coupling(0) - expected).abs() < 1e-15);
        assert!((critical_coupling(0) - 0.0907).abs() < 1e-4);
        let n1 = (2.0f64 / 3.0).powf(1.5) / (3.0 * (7.5 - 1.0 / 6.0));
        assert!((critical_coupling(1) - n1).abs() < 1e-15);
        let mut last = critical_coupling(0);
        for n in 1..50 {
            let g_c = critical_coupling(n);
            assert!(g_c < last);
            last = g_c;
        }
        assert!(critical_coupling(10_000) < 1e-5);
    }

    #[test]
    fn ground_state_moments() {
        let mf = MeanField {
            omega: Scalar::Exact(q(1, 1)),
            h0: Scalar::Exact(q(0, 1)),
            sigma: Scalar::Exact(q(0, 1)),
            e0: Scalar::Exact(q(1, 2)),
            phase: Phase::Aho,
        };
        let m = moments(&mf, &spec(OscillatorKind::Qaho, q(1, 1)));
        assert_eq!(m.x2, Scalar::Exact(q(1, 2)));
        assert_eq!(m.x4, Scalar::Exact(q(3, 4)));
        assert_eq!(m.x6, Scalar::Exact(q(15, 8)));
        assert_eq!(m.p2, Scalar::Exact(q(1, 2)));

        let mf2 = solve_gap(&spec(OscillatorKind::Qaho, q(1, 1))).unwrap();
        assert_eq!(
            moments(&mf2, &spec(OscillatorKind::Qaho, q(1, 1))).p2,
            Scalar::Exact(q(1, 1))
        );
    }

    #[test]
    fn perturbation_average_vanishes_at_fixtures() {
        for (kind, g) in [
            (OscillatorKind::Qaho, q(1, 1)),
            (OscillatorKind::Saho, q(8, 15)),
            (OscillatorKind::Qdwo, q(1, 3)),
        ] {
            let s = spec(kind, g);
            let mf = solve_gap(&s).unwrap();
            assert!(perturbation_average(&mf, &s).is_zero(), "{kind}");
            assert_eq!(energy_expectation(&mf, &s), mf.e0, "{kind}");
        }
    }

    #[test]
    fn closed_form_matches_root_finder() {
        let bits = crate::scalar::bits_for_digits(100);
        for g in [q(1, 1), q(10, 1), q(100, 1), q(1, 10), q(37, 3)] {
            let s = spec(OscillatorKind::Qaho, g);
            let closed = closed_form_omega(&s, bits).unwrap();
            let mf = solve_gap_with(&s, Precision::extended(100)).unwrap();
            let diff = Float::with_val(bits, &closed - &mf.omega.to_float(bits)).abs();
            assert!(diff < Float::with_val(bits, 1e-90), "g = {}", s.g());
        }
        // 243 g² f² < 1: radicals turn complex
        assert!(closed_form_omega(&spec(OscillatorKind::Qaho, q(1, 100)), bits).is_none());
        assert!(closed_form_omega(&spec(OscillatorKind::Saho, q(1, 1)), bits).is_none());
    }

    #[test]
    fn well_offset_only_for_double_well() {
        assert_eq!(spec(OscillatorKind::Qdwo, q(1, 2)).well_offset(), q(1, 8));
        assert_eq!(spec(OscillatorKind::Qaho, q(1, 2)).well_offset(), q(0, 1));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!(
            "QAHO".parse::<OscillatorKind>().unwrap(),
            OscillatorKind::Qaho
        );
        assert_eq!(
            "saho".parse::<OscillatorKind>().unwrap(),
            OscillatorKind::Saho
        );
        assert!("quartic".parse::<OscillatorKind>().is_err());
    }
}
