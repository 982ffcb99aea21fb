//! Perturbation corrections to arbitrary order.
//!
//! With `X(j,i)` the coefficient of `η^i` in `<x^{2j}>` for the associated
//! Hamiltonian `H0 + ηH'`, the hypervirial theorem gives
//!
//! ```text
//! X(j,i) = a(j) X(j-1,i) + b(j) Σ_{m=0}^{i} E_m X(j-1,i-m) + c(j) X(j-2,i)
//!        - a(j) X(j-1,i-1) + e_ω X(j,i-1) - f(j) X(j+K-1,i-1)
//! ```
//!
//! and Feynman–Hellmann closes the system:
//! `E_1 = g X(K,0) - (ω² ∓ 1) X(1,0)/2 - h0`,
//! `p E_p = g X(K,p-1) - (ω² ∓ 1) X(1,p-1)/2` for `p ≥ 2`.
//!
//! Levels are filled in order `i = 0, 1, …` with `j` ascending; the only
//! reference to a larger `j` is at level `i-1`, which is already complete.

use std::cmp::Ordering;

use rug::ops::Pow;
use rug::{Float, Rational};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::{MeanField, OscillatorKind, OscillatorSpec, Phase};
use crate::scalar::{bits_for_digits, ArithMode, Field, Scalar};

/// Coefficients of the moment recursion for one mean-field solution.
#[derive(Debug, Clone)]
pub struct RecursionCoefficients<T> {
    pub power: usize,
    omega2: T,
    h0: T,
    g: T,
    /// `(ω² ∓ 1)/ω²`; the sign follows the `x²` term of `H'`.
    pub e_omega: T,
    /// `ω² ∓ 1`, the coefficient of `-x²/2` in `H'`.
    pub shift: T,
}

impl<T: Field> RecursionCoefficients<T> {
    pub fn new(power: usize, quadratic_sign: i64, omega: &T, h0: &T, g: &T) -> Self {
        let omega2 = omega.mul(omega);
        let shift = omega2.sub(&omega.lift_int(quadratic_sign));
        let e_omega = shift.div(&omega2);
        RecursionCoefficients {
            power,
            omega2,
            h0: h0.clone(),
            g: g.clone(),
            e_omega,
            shift,
        }
    }

    fn ratio(&self, num: i64, den: i64) -> T {
        self.g.lift(&Rational::from((num, den)))
    }

    /// `a(j) = (-h0/ω²)(2j-1)/j`
    pub fn a(&self, j: i64) -> T {
        self.h0
            .neg()
            .div(&self.omega2)
            .mul(&self.ratio(2 * j - 1, j))
    }

    /// `b(j) = (2j-1)/(ω² j)`
    pub fn b(&self, j: i64) -> T {
        self.ratio(2 * j - 1, j).div(&self.omega2)
    }

    /// `c(j) = (j-1)[4(j-1)² - 1]/(4j ω²)`
    pub fn c(&self, j: i64) -> T {
        let jm = j - 1;
        self.ratio(jm * (4 * jm * jm - 1), 4 * j).div(&self.omega2)
    }

    /// `f(j) = (g/ω²)(2j-1+K)/j`
    pub fn f(&self, j: i64) -> T {
        self.g
            .div(&self.omega2)
            .mul(&self.ratio(2 * j - 1 + self.power as i64, j))
    }
}

/// `X(j,i)` for `0 ≤ i < P`, `0 ≤ j ≤ (K-1)(P-i)+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    levels: Vec<Vec<Scalar>>,
}

impl MomentTable {
    /// `X(j,i)`, with the boundary values `X(0,i) = δ_{0i}` and `X(j<0,i) = 0`.
    /// `None` outside the computed range.
    pub fn get(&self, j: i64, i: usize) -> Option<Scalar> {
        if j < 0 {
            return self.levels.first().map(|l| zero_like(&l[0]));
        }
        self.levels.get(i)?.get(j as usize).cloned()
    }

    pub fn orders(&self) -> usize {
        self.levels.len()
    }

    /// Highest `j` stored at level `i`.
    pub fn max_j(&self, i: usize) -> Option<usize> {
        self.levels.get(i).map(|l| l.len() - 1)
    }
}

fn zero_like(s: &Scalar) -> Scalar {
    match s {
        Scalar::Exact(_) => Scalar::Exact(Rational::new()),
        Scalar::Extended(f) => Scalar::Extended(Float::new(f.prec())),
    }
}

/// `E_0, E_1, …, E_P` for one oscillator level.
#[derive(Debug, Clone)]
pub struct CorrectionSeries {
    pub spec: OscillatorSpec,
    pub mf: MeanField,
    corrections: Vec<Scalar>,
    mode: ArithMode,
    table: Option<MomentTable>,
    error_bounds: Option<Vec<Float>>,
}

impl CorrectionSeries {
    /// Wraps externally supplied corrections (e.g. parsed from JSON).
    pub fn from_corrections(
        spec: OscillatorSpec,
        mf: MeanField,
        corrections: Vec<Scalar>,
    ) -> Result<Self> {
        let first = corrections
            .first()
            .ok_or_else(|| Error::Domain("empty correction series".into()))?;
        let mode = first.mode();
        if corrections
            .iter()
            .any(|c| c.mode().is_exact() != mode.is_exact())
        {
            return Err(Error::Domain(
                "correction series mixes arithmetic modes".into(),
            ));
        }
        Ok(CorrectionSeries {
            spec,
            mf,
            corrections,
            mode,
            table: None,
            error_bounds: None,
        })
    }

    pub fn corrections(&self) -> &[Scalar] {
        &self.corrections
    }

    pub fn correction(&self, k: usize) -> Option<&Scalar> {
        self.corrections.get(k)
    }

    /// Highest order `P`.
    pub fn max_order(&self) -> usize {
        self.corrections.len() - 1
    }

    pub fn mode(&self) -> ArithMode {
        self.mode
    }

    pub fn e0(&self) -> &Scalar {
        &self.corrections[0]
    }

    pub fn moment_table(&self) -> Option<&MomentTable> {
        self.table.as_ref()
    }

    /// Running absolute error bounds on each `E_p` (float mode only).
    pub fn error_bounds(&self) -> Option<&[Float]> {
        self.error_bounds.as_deref()
    }

    /// Error bound on `E_p` relative to `|E_p|`.
    pub fn relative_error_bound(&self, p: usize) -> Option<f64> {
        let bound = self.error_bounds.as_ref()?.get(p)?;
        let value = self.corrections.get(p)?.to_float(53).abs();
        Some(Float::with_val(53, bound / &value).to_f64())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.corrections.iter().map(Scalar::to_f64).collect()
    }

    /// Same series truncated at order `p`.
    pub fn truncated(&self, p: usize) -> CorrectionSeries {
        let mut out = self.clone();
        out.corrections.truncate(p + 1);
        if let Some(b) = out.error_bounds.as_mut() {
            b.truncate(p + 1);
        }
        out
    }

    /// Rationals as `"p/q"` strings in a bare array; floats as decimal strings
    /// under an explicit precision tag.
    pub fn to_json(&self) -> Value {
        let values: Vec<String> = self
            .corrections
            .iter()
            .map(Scalar::to_json_string)
            .collect();
        match self.mode {
            ArithMode::Exact => json!(values),
            ArithMode::Extended { digits } => json!({
                "precision_digits": digits,
                "corrections": values,
            }),
        }
    }
}

/// Parses the output of [`CorrectionSeries::to_json`].
pub fn parse_corrections_json(value: &Value) -> Result<Vec<Scalar>> {
    let (items, digits) = match value {
        Value::Array(items) => (items, None),
        Value::Object(map) => {
            let digits = map
                .get("precision_digits")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse("missing precision_digits".into()))?;
            let items = map
                .get("corrections")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("missing corrections array".into()))?;
            (items, Some(digits as u32))
        }
        _ => return Err(Error::Parse("expected a JSON array or object".into())),
    };
    items
        .iter()
        .map(|v| {
            let s = v
                .as_str()
                .ok_or_else(|| Error::Parse(format!("correction {v} is not a string")))?;
            Scalar::parse(s, digits)
        })
        .collect()
}

/// Corrections `E_0 … E_P` about the mean-field Hamiltonian.
pub fn compute_corrections(
    spec: &OscillatorSpec,
    mf: &MeanField,
    max_order: usize,
) -> Result<CorrectionSeries> {
    if max_order < 1 {
        return Err(Error::Domain("need at least one perturbative order".into()));
    }
    let sign = spec.kind.quadratic_sign();
    let power = spec.kind.power();
    match (&mf.omega, &mf.h0, &mf.e0) {
        (Scalar::Exact(w), Scalar::Exact(h), Scalar::Exact(e)) => {
            let g = spec.g().clone();
            let out = run_recursion(power, sign, w, h, &g, e, max_order);
            finish(spec.clone(), mf.clone(), out)
        }
        (Scalar::Extended(w), Scalar::Extended(h), Scalar::Extended(e)) => {
            let g = Float::with_val(w.prec(), spec.g());
            let out = run_recursion(power, sign, w, h, &g, e, max_order);
            finish(spec.clone(), mf.clone(), out)
        }
        _ => Err(Error::Domain("mean field mixes arithmetic modes".into())),
    }
}

/// Corrections computed at `digits` and `digits + 40`; returns the series at
/// the higher precision together with the number of decimal digits on which
/// the two runs agree for each order.
pub fn certified_corrections(
    spec: &OscillatorSpec,
    max_order: usize,
    digits: u32,
) -> Result<(CorrectionSeries, Vec<f64>)> {
    use crate::model::solve_gap_with;
    use crate::scalar::Precision;

    let low_mf = solve_gap_with(spec, Precision::extended(digits))?;
    let low = compute_corrections(spec, &low_mf, max_order)?;
    let high_mf = solve_gap_with(spec, Precision::extended(digits + 40))?;
    let high = compute_corrections(spec, &high_mf, max_order)?;
    let bits = bits_for_digits(digits + 40);
    let agreed = low
        .corrections
        .iter()
        .zip(&high.corrections)
        .map(|(a, b)| {
            let b = b.to_float(bits);
            let diff = Float::with_val(bits, &a.to_float(bits) - &b).abs();
            if diff.is_zero() {
                f64::from(digits)
            } else if b.is_zero() {
                -diff.log10().to_f64()
            } else {
                (Float::with_val(bits, b.abs_ref()).log10() - diff.log10()).to_f64()
            }
        })
        .collect();
    Ok((high, agreed))
}

/// Standard Rayleigh–Schrödinger coefficients `𝓔_k` of `g^k`, from the same
/// recursion about the bare harmonic oscillator (`ω = 1`, `h0 = 0`).
pub fn sfpt_corrections(spec: &OscillatorSpec, max_order: usize) -> Result<CorrectionSeries> {
    if spec.kind == OscillatorKind::Qdwo {
        return Err(Error::Domain(
            "bare-well expansion is only defined for qaho and saho".into(),
        ));
    }
    let one = Rational::from(1);
    let zero = Rational::new();
    let xi = spec.xi();
    let mf = MeanField {
        omega: Scalar::Exact(one.clone()),
        h0: Scalar::Exact(zero.clone()),
        sigma: Scalar::Exact(zero.clone()),
        e0: Scalar::Exact(xi.clone()),
        phase: Phase::Aho,
    };
    let out = run_recursion(spec.kind.power(), 1, &one, &zero, &one, &xi, max_order);
    finish(spec.clone(), mf, out)
}

struct RecursionOutput<T> {
    energies: Vec<T>,
    levels: Vec<Vec<T>>,
    bounds: Option<Vec<Float>>,
}

/// Rejects a float-mode series whose error bound on some `E_p` (`p ≥ 2`)
/// exceeds `10^(-digits/2) |E_p|`.
pub fn check_precision(values: &[Scalar], bounds: &[Float], digits: u32) -> Result<()> {
    let threshold = Float::with_val(53, 10).pow(-f64::from(digits) / 2.0);
    for (p, (value, bound)) in values.iter().zip(bounds).enumerate().skip(2) {
        let magnitude = value.to_float(53).abs();
        let limit = Float::with_val(53, &threshold * &magnitude);
        if !bound.is_finite() || *bound > limit {
            return Err(Error::Precision {
                order: p,
                bound: bound.to_f64(),
                magnitude: magnitude.to_f64(),
            });
        }
    }
    Ok(())
}

fn finish<T: Field>(
    spec: OscillatorSpec,
    mf: MeanField,
    out: RecursionOutput<T>,
) -> Result<CorrectionSeries> {
    let corrections: Vec<Scalar> = out.energies.into_iter().map(Field::into_scalar).collect();
    let mode = corrections[0].mode();
    if let (ArithMode::Extended { digits }, Some(bounds)) = (mode, out.bounds.as_ref()) {
        check_precision(&corrections, bounds, digits)?;
    }
    let table = MomentTable {
        levels: out
            .levels
            .into_iter()
            .map(|l| l.into_iter().map(Field::into_scalar).collect())
            .collect(),
    };
    Ok(CorrectionSeries {
        spec,
        mf,
        corrections,
        mode,
        table: Some(table),
        error_bounds: out.bounds,
    })
}

/// Running sum of `coef · x` terms with a first-order error bound.
struct Acc<T> {
    value: T,
    err: Float,
    magnitude: Float,
    terms: u32,
    tracking: bool,
}

impl<T: Field> Acc<T> {
    fn new(zero: T, tracking: bool) -> Self {
        Acc {
            value: zero,
            err: Float::new(53),
            magnitude: Float::new(53),
            terms: 0,
            tracking,
        }
    }

    fn add(&mut self, coef: &T, x: &T, x_err: &Float) {
        if x.is_zero() && x_err.is_zero() {
            return;
        }
        let term = coef.mul(x);
        if self.tracking {
            self.err += Float::with_val(53, &coef.magnitude() * x_err);
            self.magnitude += term.magnitude();
        }
        self.value = self.value.add(&term);
        self.terms += 1;
    }

    /// Final value and its absolute error bound: propagated input errors plus
    /// rounding of every product, coefficient and partial sum.
    fn finish(self) -> (T, Float) {
        if !self.tracking {
            return (self.value, self.err);
        }
        let u = self.value.unit_roundoff();
        let rounding = Float::with_val(53, &self.magnitude * (u * f64::from(self.terms + 4)));
        (self.value, self.err + rounding)
    }
}

fn run_recursion<T: Field>(
    power: usize,
    quadratic_sign: i64,
    omega: &T,
    h0: &T,
    g: &T,
    e0: &T,
    max_order: usize,
) -> RecursionOutput<T> {
    let coeffs = RecursionCoefficients::new(power, quadratic_sign, omega, h0, g);
    let k = power as i64;
    let u = omega.unit_roundoff();
    let tracking = u > 0.0;
    let zero = omega.zero();
    let one = omega.lift_int(1);
    let no_err = Float::new(53);
    let half_shift = coeffs.shift.div(&omega.lift_int(2));

    let mut energies: Vec<T> = Vec::with_capacity(max_order + 1);
    let mut energy_err: Vec<Float> = Vec::with_capacity(max_order + 1);
    energies.push(e0.clone());
    energy_err.push(Float::with_val(53, &e0.magnitude() * u));

    // levels[i][j] = X(j,i); errs[i][j] its bound.
    let mut levels: Vec<Vec<T>> = Vec::with_capacity(max_order);
    let mut errs: Vec<Vec<Float>> = Vec::with_capacity(max_order);

    for i in 0..max_order {
        let jmax = (power - 1) * (max_order - i) + 1;
        let mut row: Vec<T> = Vec::with_capacity(jmax + 1);
        let mut row_err: Vec<Float> = Vec::with_capacity(jmax + 1);
        row.push(if i == 0 { one.clone() } else { zero.clone() });
        row_err.push(no_err.clone());

        // X(j, level) with the boundary conditions; `level == i` reads the
        // row under construction.
        let at = |row: &[T], row_err: &[Float], j: i64, level: i64| -> (T, Float) {
            if j < 0 || level < 0 {
                return (zero.clone(), no_err.clone());
            }
            if j == 0 {
                return (
                    if level == 0 {
                        one.clone()
                    } else {
                        zero.clone()
                    },
                    no_err.clone(),
                );
            }
            if level == i as i64 {
                (row[j as usize].clone(), row_err[j as usize].clone())
            } else {
                let l = level as usize;
                (levels[l][j as usize].clone(), errs[l][j as usize].clone())
            }
        };

        let il = i as i64;
        for j in 1..=jmax as i64 {
            let a = coeffs.a(j);
            let mut acc = Acc::new(zero.clone(), tracking);

            let (x, e) = at(&row, &row_err, j - 1, il);
            acc.add(&a, &x, &e);

            // b(j) Σ_m E_m X(j-1, i-m)
            let mut conv = Acc::new(zero.clone(), tracking);
            for m in 0..=i {
                let (x, xe) = at(&row, &row_err, j - 1, il - m as i64);
                if x.is_zero() && xe.is_zero() {
                    continue;
                }
                conv.add(&energies[m], &x, &xe);
                if tracking {
                    conv.err += Float::with_val(53, &energy_err[m] * &x.magnitude());
                }
            }
            let (conv_value, conv_err) = conv.finish();
            acc.add(&coeffs.b(j), &conv_value, &conv_err);

            let (x, e) = at(&row, &row_err, j - 2, il);
            acc.add(&coeffs.c(j), &x, &e);
            let (x, e) = at(&row, &row_err, j - 1, il - 1);
            acc.add(&a.neg(), &x, &e);
            let (x, e) = at(&row, &row_err, j, il - 1);
            acc.add(&coeffs.e_omega, &x, &e);
            let (x, e) = at(&row, &row_err, j + k - 1, il - 1);
            acc.add(&coeffs.f(j).neg(), &x, &e);

            let (value, err) = acc.finish();
            row.push(value);
            row_err.push(err);
        }

        // E_{i+1} from the completed level i
        let mut acc = Acc::new(zero.clone(), tracking);
        acc.add(g, &row[power], &row_err[power]);
        acc.add(&half_shift.neg(), &row[1], &row_err[1]);
        let (mut value, mut err) = acc.finish();
        let p = i + 1;
        if p == 1 {
            value = value.sub(h0);
            err += Float::with_val(53, &h0.magnitude() * u);
        } else {
            value = value.div(&omega.lift_int(p as i64));
            err /= p as u32;
            err += Float::with_val(53, &value.magnitude() * u);
        }
        energies.push(value);
        energy_err.push(err);
        levels.push(row);
        errs.push(row_err);
    }

    RecursionOutput {
        energies,
        levels,
        bounds: tracking.then_some(energy_err),
    }
}

/// Whether `E_{k+1}` and `E_k` have opposite signs for every `k ≥ 2`.
pub fn alternates_from_second_order(series: &CorrectionSeries) -> bool {
    series.corrections[2..]
        .windows(2)
        .all(|w| w[0].signum() * w[1].signum() == -1)
}

/// First order `k ≥ 2` after which `|E_k|` increases monotonically through the
/// end of the series.
pub fn divergence_onset(series: &CorrectionSeries) -> Option<usize> {
    let c = &series.corrections;
    let last = c.len().checked_sub(1)?;
    let mut onset = last;
    while onset > 2 && c[onset - 1].cmp_abs(&c[onset]) == Ordering::Less {
        onset -= 1;
    }
    (onset < last).then_some(onset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::solve_gap;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn exact_series(kind: OscillatorKind, g: Rational, p: usize) -> CorrectionSeries {
        let spec = OscillatorSpec::ground(kind, g).unwrap();
        let mf = solve_gap(&spec).unwrap();
        assert!(mf.is_exact());
        compute_corrections(&spec, &mf, p).unwrap()
    }

    fn as_rationals(s: &CorrectionSeries) -> Vec<Rational> {
        s.corrections()
            .iter()
            .map(|c| c.as_rational().unwrap().clone())
            .collect()
    }

    #[test]
    fn qaho_fixture_corrections() {
        let s = exact_series(OscillatorKind::Qaho, q(1, 1), 5);
        assert_eq!(
            as_rationals(&s),
            vec![
                q(13, 16),
                q(0, 1),
                q(-3, 256),
                q(27, 4096),
                q(-2373, 262144),
                q(65457, 4194304)
            ]
        );
    }

    #[test]
    fn saho_fixture_corrections() {
        let s = exact_series(OscillatorKind::Saho, q(8, 15), 5);
        assert_eq!(
            as_rationals(&s)[1..],
            [
                q(0, 1),
                q(-49, 960),
                q(671, 4608),
                q(-53621891, 55296000),
                q(2610955409, 265420800)
            ]
        );
    }

    #[test]
    fn qdwo_fixture_corrections() {
        let s = exact_series(OscillatorKind::Qdwo, q(1, 3), 5);
        assert_eq!(
            as_rationals(&s),
            vec![
                q(1, 4),
                q(0, 1),
                q(-1, 24),
                q(1, 16),
                q(-791, 3456),
                q(7273, 6912)
            ]
        );
    }

    #[test]
    fn first_moment_is_harmonic_average() {
        let s = exact_series(OscillatorKind::Qaho, q(1, 1), 3);
        // ξ/ω = (1/2)/2
        assert_eq!(
            s.moment_table().unwrap().get(1, 0).unwrap(),
            Scalar::Exact(q(1, 4))
        );
        assert_eq!(
            s.moment_table().unwrap().get(0, 2).unwrap(),
            Scalar::Exact(q(0, 1))
        );
        assert_eq!(
            s.moment_table().unwrap().get(-1, 1).unwrap(),
            Scalar::Exact(q(0, 1))
        );
    }

    #[test]
    fn table_ranges_follow_order() {
        let s = exact_series(OscillatorKind::Saho, q(8, 15), 6);
        let t = s.moment_table().unwrap();
        assert_eq!(t.orders(), 6);
        for i in 0..6 {
            assert_eq!(t.max_j(i), Some(2 * (6 - i) + 1));
        }
    }

    #[test]
    fn qdwo_e_omega_uses_plus_sign() {
        let c = RecursionCoefficients::new(2, -1, &q(1, 1), &q(-1, 4), &q(1, 3));
        assert_eq!(c.e_omega, q(2, 1));
        let c = RecursionCoefficients::new(2, 1, &q(2, 1), &q(-3, 16), &q(1, 1));
        assert_eq!(c.e_omega, q(3, 4));
        assert_eq!(c.a(1), q(3, 64));
        assert_eq!(c.b(2), q(3, 8));
        assert_eq!(c.c(2), q(3, 32));
        assert_eq!(c.f(1), q(3, 4));
    }

    #[test]
    fn sfpt_low_orders() {
        let spec = OscillatorSpec::ground(OscillatorKind::Qaho, q(1, 1)).unwrap();
        let s = sfpt_corrections(&spec, 6).unwrap();
        let r = as_rationals(&s);
        assert_eq!(r[0], q(1, 2));
        assert_eq!(r[1], q(3, 4));
        assert_eq!(r[2], q(-21, 8));
        assert_eq!(r[3], q(333, 16));
        for k in 1..6 {
            assert_eq!(
                s.corrections()[k].signum(),
                -s.corrections()[k + 1].signum()
            );
        }
        let qd = OscillatorSpec::ground(OscillatorKind::Qdwo, q(1, 1)).unwrap();
        assert!(sfpt_corrections(&qd, 4).is_err());
    }

    #[test]
    fn zero_order_rejected() {
        let spec = OscillatorSpec::ground(OscillatorKind::Qaho, q(1, 1)).unwrap();
        let mf = solve_gap(&spec).unwrap();
        assert!(compute_corrections(&spec, &mf, 0).is_err());
    }

    #[test]
    fn json_roundtrip_exact() {
        let s = exact_series(OscillatorKind::Qdwo, q(1, 3), 5);
        let v = s.to_json();
        assert_eq!(
            v,
            json!(["1/4", "0", "-1/24", "1/16", "-791/3456", "7273/6912"])
        );
        let back = parse_corrections_json(&v).unwrap();
        assert_eq!(back, s.corrections());
    }

    #[test]
    fn json_roundtrip_float() {
        let spec = OscillatorSpec::ground(OscillatorKind::Qaho, q(1, 10)).unwrap();
        let mf = solve_gap(&spec).unwrap();
        let s = compute_corrections(&spec, &mf, 8).unwrap();
        let v = s.to_json();
        assert_eq!(v["precision_digits"], json!(100));
        assert_eq!(parse_corrections_json(&v).unwrap(), s.corrections());
        assert!(parse_corrections_json(&json!({"corrections": []})).is_err());
    }

    #[test]
    fn error_bound_dominates_actual_error() {
        use crate::model::solve_gap_with;
        use crate::scalar::Precision;
        let spec = OscillatorSpec::ground(OscillatorKind::Qaho, q(1, 1)).unwrap();
        let exact = exact_series(OscillatorKind::Qaho, q(1, 1), 40);
        for digits in [1, 12, 40] {
            let mf = solve_gap_with(&spec, Precision::extended(digits)).unwrap();
            let s = compute_corrections(&spec, &mf, 40).unwrap();
            for p in 2..=40 {
                let diff = Float::with_val(
                    512,
                    &s.corrections()[p].to_float(512) - &exact.corrections()[p].to_float(512),
                )
                .abs();
                assert!(
                    diff <= s.error_bounds().unwrap()[p],
                    "digits {digits}, p {p}"
                );
            }
            assert!(s.relative_error_bound(40).unwrap() < 10f64.powf(-f64::from(digits) / 2.0));
        }
    }

    #[test]
    fn precision_check_rejects_large_bounds() {
        let values: Vec<Scalar> = [1.0, 0.0, 0.5, -0.25]
            .iter()
            .map(|v| Scalar::Extended(Float::with_val(100, *v)))
            .collect();
        let small: Vec<Float> = vec![Float::with_val(53, 1e-30); 4];
        assert!(check_precision(&values, &small, 40).is_ok());
        let mut large = small.clone();
        large[3] = Float::with_val(53, 1e-5);
        let err = check_precision(&values, &large, 40).unwrap_err();
        assert!(matches!(err, Error::Precision { order: 3, .. }), "{err}");
        large[3] = Float::with_val(53, f64::INFINITY);
        assert!(check_precision(&values, &large, 40).is_err());
    }

    #[test]
    fn high_orders_stay_within_bounds() {
        let spec = OscillatorSpec::ground(OscillatorKind::Saho, q(1, 1)).unwrap();
        let mf = solve_gap(&spec).unwrap();
        let s = compute_corrections(&spec, &mf, 120).unwrap();
        assert!(s.corrections()[120].to_float(53).abs() > Float::with_val(53, 1e300));
        assert!(s.relative_error_bound(120).unwrap() < 1e-50);
    }

    #[test]
    fn certified_digits_track_precision() {
        let spec = OscillatorSpec::ground(OscillatorKind::Saho, q(1, 1)).unwrap();
        let (s, digits) = certified_corrections(&spec, 30, 60).unwrap();
        assert_eq!(s.mode(), ArithMode::Extended { digits: 100 });
        assert!(digits[2..].iter().all(|d| *d > 40.0), "{digits:?}");
    }
}
